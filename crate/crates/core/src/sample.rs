//! Samples, empirical distribution functions and right-closed step functions.

use crate::error::{Error, Result};

/// Ordered, strictly positive observations.
#[derive(Debug, Clone, PartialEq)]
pub struct SortedSample {
    values: Vec<f64>,
}

impl SortedSample {
    /// Wraps already-sorted observations, checking every invariant.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySample);
        }
        if let Some(bad) = values.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::InvalidSample(format!(
                "observation {bad} is not a finite positive number"
            )));
        }
        if values.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidSample("observations are not sorted".into()));
        }
        Ok(Self { values })
    }

    /// Sorts the observations first.
    pub fn from_unsorted(mut values: Vec<f64>) -> Result<Self> {
        values.sort_by(f64::total_cmp);
        Self::new(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max(&self) -> f64 {
        self.values[self.values.len() - 1]
    }
}

/// Empirical distribution function with masses kept as integer counts over `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCdf {
    jump_points: Vec<f64>,
    counts: Vec<u64>,
    cumulative: Vec<u64>,
    n: u64,
}

impl EmpiricalCdf {
    /// Collapses ties into single jumps.
    pub fn new(sample: &SortedSample) -> Self {
        let mut jump_points: Vec<f64> = Vec::new();
        let mut counts: Vec<u64> = Vec::new();
        for &v in sample.values() {
            match jump_points.last() {
                Some(&last) if last == v => *counts.last_mut().unwrap() += 1,
                _ => {
                    jump_points.push(v);
                    counts.push(1);
                }
            }
        }
        let cumulative = counts
            .iter()
            .scan(0u64, |acc, c| {
                *acc += c;
                Some(*acc)
            })
            .collect();
        Self {
            jump_points,
            counts,
            cumulative,
            n: sample.len() as u64,
        }
    }

    pub fn jump_points(&self) -> &[f64] {
        &self.jump_points
    }

    /// Number of observations tied at each jump point.
    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// Number of observations `<=` each jump point.
    pub fn cumulative_counts(&self) -> &[u64] {
        &self.cumulative
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    /// Number of observations `<= t`.
    pub fn count_at_or_below(&self, t: f64) -> u64 {
        let idx = self.jump_points.partition_point(|&x| x <= t);
        if idx == 0 {
            0
        } else {
            self.cumulative[idx - 1]
        }
    }

    /// Number of observations `< t`, i.e. the left limit of the count.
    pub fn count_below(&self, t: f64) -> u64 {
        let idx = self.jump_points.partition_point(|&x| x < t);
        if idx == 0 {
            0
        } else {
            self.cumulative[idx - 1]
        }
    }

    /// `F_n(t)`, right-continuous.
    pub fn eval(&self, t: f64) -> f64 {
        self.count_at_or_below(t) as f64 / self.n as f64
    }

    /// `F_n(t-)`.
    pub fn eval_left(&self, t: f64) -> f64 {
        self.count_below(t) as f64 / self.n as f64
    }

    pub fn total_count(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// Which side a [`StepFunction`] takes its value from at a breakpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Continuity {
    /// Value at a breakpoint is the level of the interval ending there
    /// (left-derivative objects such as the Grenander estimate).
    Left,
    /// Value at a breakpoint is the level of the interval starting there
    /// (distribution-function-like objects such as the mixing estimate).
    Right,
}

/// Piecewise-constant function with finitely many breakpoints.
///
/// `levels[i]` is the value between `breakpoints[i-1]` and `breakpoints[i]`
/// (with `levels[0]` extending to the left); `terminal` is the value past the
/// last breakpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct StepFunction {
    breakpoints: Vec<f64>,
    levels: Vec<f64>,
    terminal: f64,
    continuity: Continuity,
}

impl StepFunction {
    pub fn new(
        breakpoints: Vec<f64>,
        levels: Vec<f64>,
        terminal: f64,
        continuity: Continuity,
    ) -> Result<Self> {
        if breakpoints.len() != levels.len() {
            return Err(Error::InvalidParameter(format!(
                "{} breakpoints but {} levels",
                breakpoints.len(),
                levels.len()
            )));
        }
        if breakpoints.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidParameter(
                "breakpoints must be strictly increasing".into(),
            ));
        }
        Ok(Self {
            breakpoints,
            levels,
            terminal,
            continuity,
        })
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn terminal(&self) -> f64 {
        self.terminal
    }

    pub fn continuity(&self) -> Continuity {
        self.continuity
    }

    /// Index of the piece `t` falls in; `levels.len()` means the terminal piece.
    pub fn piece_index(&self, t: f64) -> usize {
        match self.continuity {
            Continuity::Left => self.breakpoints.partition_point(|&b| b < t),
            Continuity::Right => self.breakpoints.partition_point(|&b| b <= t),
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        let idx = self.piece_index(t);
        self.levels.get(idx).copied().unwrap_or(self.terminal)
    }

    /// Integral over `[start, last breakpoint]` of the left pieces, assuming
    /// the first piece begins at `start`.
    pub fn integral_from(&self, start: f64) -> f64 {
        let mut prev = start;
        let mut total = 0.0;
        for (&b, &l) in self.breakpoints.iter().zip(&self.levels) {
            total += l * (b - prev);
            prev = b;
        }
        total
    }
}

/// Evaluates a step function at `t`.
pub fn evaluate_step(f: &StepFunction, t: f64) -> f64 {
    f.eval(t)
}
