//! The argmax process `ŝ_n(a) = argmax_s {F_n(s) - a s}` and an exact checker
//! for the switching relation `{f̂_n(t0) > a} = {ŝ_n(a) > t0}`.
//!
//! Conventions: `f̂_n` is the left derivative of the majorant and `ŝ_n(a)` is
//! the SMALLEST maximizer. With these, `{f̂_n(t0) > a} = (0, ŝ_n(a)]`, so
//!
//! ```text
//!     f̂_n(t0) > a   <=>   ŝ_n(a) >= t0      for every t0 > 0, a >= 0.
//! ```
//!
//! Since `ŝ_n(a)` is 0 or an observation, this is the strict relation
//! `ŝ_n(a) > t0` at every `t0` that is not an observation. At an observation
//! the strict form cannot hold for all levels (take `a` strictly between the
//! two slopes meeting there), and the largest maximizer breaks it even off the
//! observations at tie levels: for the sample `{1, 2}`, `a = 1/2`, `t0 = 1`
//! gives `f̂_n(1) = 1/2` but the largest maximizer is 2.

use std::cmp::Ordering;

use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rand::Rng;
use rand_distr::{Distribution, Exp1};

use crate::error::{Error, Result};
use crate::exact::{self, rational};
use crate::grenander::{fit, GrenanderFit};
use crate::rng::stream_rng;
use crate::sample::{EmpiricalCdf, SortedSample};

/// Statement of the tie convention, reported alongside sweep results.
pub const TIE_RULE: &str = "argmax ties resolved to the smallest maximizer; density estimate is \
the left derivative; checked relation: f_hat(t0) > a <=> s_hat(a) >= t0 (strict > off the observations)";

#[derive(Debug, Clone, PartialEq)]
pub struct ArgmaxResult {
    /// `0` or a jump point of `F_n`.
    pub location: f64,
    pub value: BigRational,
    /// Number of candidates attaining the maximum.
    pub tie_count: usize,
}

impl ArgmaxResult {
    pub fn value_f64(&self) -> f64 {
        exact::to_f64(&self.value)
    }
}

/// `ŝ_n(a)` for a level given as a float (converted exactly).
pub fn s_hat(cdf: &EmpiricalCdf, a: f64) -> Result<ArgmaxResult> {
    if !(a >= 0.0) || !a.is_finite() {
        return Err(Error::NegativeLevel(a));
    }
    s_hat_exact(cdf, &rational(a))
}

/// `ŝ_n(a)` over the candidates `{0} ∪ jump points`, in exact arithmetic.
pub fn s_hat_exact(cdf: &EmpiricalCdf, a: &BigRational) -> Result<ArgmaxResult> {
    if a.is_negative() {
        return Err(Error::NegativeLevel(exact::to_f64(a)));
    }
    let n = exact::rational_int(cdf.n() as i64);
    let mut best = ArgmaxResult {
        location: 0.0,
        value: BigRational::zero(),
        tie_count: 1,
    };
    for (&x, &c) in cdf.jump_points().iter().zip(cdf.cumulative_counts()) {
        let value = exact::rational_int(c as i64) / &n - a * rational(x);
        match value.cmp(&best.value) {
            Ordering::Greater => {
                best = ArgmaxResult {
                    location: x,
                    value,
                    tie_count: 1,
                }
            }
            Ordering::Equal => best.tie_count += 1,
            Ordering::Less => {}
        }
    }
    Ok(best)
}

/// Whether `(f̂_n(t0) > a) ⟺ (ŝ_n(a) >= t0)` holds; see the module docs for
/// why the argmax side is closed at observations.
pub fn switching_holds(fit: &GrenanderFit, a: f64, t0: f64) -> Result<bool> {
    if !(a >= 0.0) {
        return Err(Error::NegativeLevel(a));
    }
    switching_holds_exact(fit, &rational(a), t0)
}

pub fn switching_holds_exact(fit: &GrenanderFit, a: &BigRational, t0: f64) -> Result<bool> {
    let argmax = s_hat_exact(fit.ecdf(), a)?;
    Ok(side_by_density(fit, a, t0) == side_by_argmax(&argmax, t0))
}

fn side_by_argmax(argmax: &ArgmaxResult, t0: f64) -> bool {
    argmax.location >= t0
}

fn side_by_density(fit: &GrenanderFit, a: &BigRational, t0: f64) -> bool {
    fit.density_at_exact(t0) > *a
}

/// Levels at which the relation is most delicate: every slope of `f̂_n`, the
/// midpoints between consecutive slopes, zero, and points just outside the
/// slope range.
pub fn critical_levels(fit: &GrenanderFit) -> Vec<BigRational> {
    let slopes = fit.majorant().exact_slopes().expect("exact ordinates");
    let two = exact::rational_int(2);
    let mut levels = vec![BigRational::zero()];
    levels.extend(slopes.iter().cloned());
    levels.extend(slopes.windows(2).map(|w| (&w[0] + &w[1]) / &two));
    let top = &slopes[0];
    levels.push(top + exact::rational_int(1));
    levels.push(slopes[slopes.len() - 1].clone() / &two);
    levels.sort();
    levels.dedup();
    levels
}

/// Evaluation points: every jump point of `F_n`, the midpoints between
/// consecutive jump points (and between 0 and the first), and one point past
/// the sample maximum.
pub fn critical_points(fit: &GrenanderFit) -> Vec<f64> {
    let jumps = fit.ecdf().jump_points();
    let mut pts = Vec::with_capacity(2 * jumps.len() + 1);
    let mut prev = 0.0;
    for &x in jumps {
        pts.push(0.5 * (prev + x));
        pts.push(x);
        prev = x;
    }
    pts.push(prev + 1.0);
    pts
}

#[derive(Debug, Clone, PartialEq)]
pub struct Counterexample {
    pub sample: Vec<f64>,
    pub level: String,
    pub t0: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SweepReport {
    pub samples: usize,
    pub checks: u64,
    pub violations: u64,
    pub first_counterexample: Option<Counterexample>,
}

impl SweepReport {
    pub fn merge(&mut self, other: SweepReport) {
        self.samples += other.samples;
        self.checks += other.checks;
        self.violations += other.violations;
        if self.first_counterexample.is_none() {
            self.first_counterexample = other.first_counterexample;
        }
    }
}

/// Checks the relation on the full critical `(level, t0)` grid of one sample.
pub fn sweep_fit(fit: &GrenanderFit) -> SweepReport {
    let mut report = SweepReport {
        samples: 1,
        ..Default::default()
    };
    let points = critical_points(fit);
    for a in critical_levels(fit) {
        let argmax = s_hat_exact(fit.ecdf(), &a).expect("levels are nonnegative");
        for &t0 in &points {
            report.checks += 1;
            if side_by_density(fit, &a, t0) != side_by_argmax(&argmax, t0) {
                report.violations += 1;
                if report.first_counterexample.is_none() {
                    report.first_counterexample = Some(Counterexample {
                        sample: fit.sample().values().to_vec(),
                        level: a.to_string(),
                        t0,
                    });
                }
            }
        }
    }
    report
}

/// Random sample for the sweep: exponential draws, rounded to two decimals in
/// every other sample so ties and collinear hull points are common.
pub fn random_sweep_sample(rng: &mut impl Rng, n: usize, rounded: bool) -> SortedSample {
    let values = (0..n)
        .map(|_| {
            let v: f64 = Exp1.sample(rng);
            if rounded {
                ((v * 100.0).round() + 1.0) / 100.0
            } else {
                v + f64::MIN_POSITIVE
            }
        })
        .collect();
    SortedSample::from_unsorted(values).expect("positive draws")
}

/// Randomized sweep over `samples` samples with sizes uniform on `1..=max_n`.
pub fn random_sweep(samples: usize, max_n: usize, seed: u64) -> SweepReport {
    let mut report = SweepReport::default();
    for i in 0..samples {
        let mut rng = stream_rng(seed, i as u64);
        let n = rng.random_range(1..=max_n);
        let sample = random_sweep_sample(&mut rng, n, i % 2 == 1);
        let fit = fit(&sample).expect("valid sample");
        report.merge(sweep_fit(&fit));
    }
    report
}

/// `min{a in levels : ŝ_n(a) < t0}`, the density recovered from the argmax
/// process over a finite grid of levels.
pub fn density_from_argmax(
    cdf: &EmpiricalCdf,
    t0: f64,
    levels: &[BigRational],
) -> Option<BigRational> {
    levels
        .iter()
        .filter(|a| {
            s_hat_exact(cdf, a)
                .map(|r| r.location < t0)
                .unwrap_or(false)
        })
        .min()
        .cloned()
}
