//! The discretized Strassen set `{g : g(0) = 0, ∫ġ² ≤ 1}`, its scaling
//! map, the quadratic-drift argmax, and the minimal-energy problem whose
//! answer gives `M = (3/4)^(1/3)`.
//!
//! Grid functions are stored through their derivative on the cells of a
//! symmetric uniform grid; `g` is always the cumulative sum from 0.

use crate::error::{Error, Result};

pub const DEFAULT_HALF_RANGE: f64 = 3.0;
pub const DEFAULT_ETA: f64 = 1e-3;
pub const ENERGY_TOLERANCE: f64 = 1e-9;
const FEASIBILITY_TOL: f64 = 1e-9;
const TIE_REL_TOL: f64 = 1e-12;

fn cells_per_side(half_range: f64, eta: f64) -> Result<usize> {
    if !(half_range > 0.0 && half_range.is_finite()) {
        return Err(Error::InvalidGrid(format!(
            "half range {half_range} must be positive"
        )));
    }
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(Error::InvalidGrid(format!(
            "spacing {eta} must be positive"
        )));
    }
    let ratio = half_range / eta;
    let k = ratio.round();
    if k < 1.0 || (ratio - k).abs() > 1e-9 * k.max(1.0) {
        return Err(Error::InvalidGrid(format!(
            "half range {half_range} is not an integer multiple of spacing {eta}"
        )));
    }
    Ok(k as usize)
}

/// A member of the discretized Strassen set on `[-H, H]`.
#[derive(Debug, Clone, PartialEq)]
pub struct StrassenGridFunction {
    half_range: f64,
    eta: f64,
    half_cells: usize,
    gdot: Vec<f64>,
    g: Vec<f64>,
}

impl StrassenGridFunction {
    /// `gdot[i]` is the derivative on `[t_i, t_{i+1}]`, `t_i = (i - K) η`,
    /// with `2K` cells in total.
    pub fn from_gdot(half_range: f64, eta: f64, gdot: Vec<f64>) -> Result<Self> {
        let f = Self::build(half_range, eta, gdot)?;
        let e = f.energy();
        if e > 1.0 + ENERGY_TOLERANCE {
            return Err(Error::InvalidParameter(format!("energy {e} exceeds 1")));
        }
        Ok(f)
    }

    /// Derivative given by `rate` at cell midpoints.
    pub fn from_fn(half_range: f64, eta: f64, rate: impl Fn(f64) -> f64) -> Result<Self> {
        let k = cells_per_side(half_range, eta)?;
        let gdot = (0..2 * k)
            .map(|i| rate((i as f64 - k as f64 + 0.5) * eta))
            .collect();
        Self::from_gdot(half_range, eta, gdot)
    }

    pub fn zero(half_range: f64, eta: f64) -> Result<Self> {
        let k = cells_per_side(half_range, eta)?;
        Self::from_gdot(half_range, eta, vec![0.0; 2 * k])
    }

    fn build(half_range: f64, eta: f64, gdot: Vec<f64>) -> Result<Self> {
        let k = cells_per_side(half_range, eta)?;
        if gdot.len() != 2 * k {
            return Err(Error::InvalidGrid(format!(
                "expected {} cell values, got {}",
                2 * k,
                gdot.len()
            )));
        }
        if let Some(bad) = gdot.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "non-finite derivative {bad}"
            )));
        }
        let mut g = vec![0.0; 2 * k + 1];
        for i in k..2 * k {
            g[i + 1] = g[i] + gdot[i] * eta;
        }
        for i in (0..k).rev() {
            g[i] = g[i + 1] - gdot[i] * eta;
        }
        Ok(Self {
            half_range,
            eta,
            half_cells: k,
            gdot,
            g,
        })
    }

    pub fn half_range(&self) -> f64 {
        self.half_range
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn gdot(&self) -> &[f64] {
        &self.gdot
    }

    /// Values at the grid points.
    pub fn g(&self) -> &[f64] {
        &self.g
    }

    pub fn grid_point(&self, i: usize) -> f64 {
        (i as f64 - self.half_cells as f64) * self.eta
    }

    pub fn grid(&self) -> Vec<f64> {
        (0..self.g.len()).map(|i| self.grid_point(i)).collect()
    }

    pub fn energy(&self) -> f64 {
        energy_of(&self.gdot, self.eta)
    }

    /// Energy carried by the cells meeting `[lo, hi]`, with partial cells
    /// weighted by overlap.
    pub fn energy_on(&self, lo: f64, hi: f64) -> f64 {
        let mut total = 0.0;
        for (i, v) in self.gdot.iter().enumerate() {
            let a = self.grid_point(i).max(lo);
            let b = self.grid_point(i + 1).min(hi);
            if b > a {
                total += v * v * (b - a);
            }
        }
        total
    }

    /// Linear interpolation of `g`, constant beyond the grid.
    pub fn eval(&self, t: f64) -> f64 {
        let k = self.half_cells as f64;
        let pos = t / self.eta + k;
        if pos <= 0.0 {
            return self.g[0];
        }
        let last = self.g.len() - 1;
        if pos >= last as f64 {
            return self.g[last];
        }
        let i = (pos.floor() as usize).min(last - 1);
        let frac = pos - i as f64;
        self.g[i] + frac * (self.g[i + 1] - self.g[i])
    }
}

fn energy_of(gdot: &[f64], eta: f64) -> f64 {
    gdot.iter().map(|v| v * v).sum::<f64>() * eta
}

/// `∑ ġ² η`.
pub fn energy(f: &StrassenGridFunction) -> f64 {
    f.energy()
}

/// `t ↦ c^(-1/2) (g(ct + d) - g(d))` sampled on the grid of `f`.
pub fn rescale(f: &StrassenGridFunction, c: f64, d: f64) -> Result<StrassenGridFunction> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "scale {c} must be positive"
        )));
    }
    if !d.is_finite() {
        return Err(Error::InvalidParameter(format!("shift {d} must be finite")));
    }
    let base = f.eval(d);
    let norm = c.sqrt().recip();
    let values: Vec<f64> = (0..f.g.len())
        .map(|i| norm * (f.eval(c * f.grid_point(i) + d) - base))
        .collect();
    let gdot = values.windows(2).map(|w| (w[1] - w[0]) / f.eta).collect();
    StrassenGridFunction::from_gdot(f.half_range, f.eta, gdot)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticArgmax {
    pub location: f64,
    pub value: f64,
    /// The maximizer sits on an end of the grid, so the untruncated
    /// maximizer may lie outside it.
    pub on_boundary: bool,
}

/// Grid argmax of `α g(h) - β h² - γ h`; near-ties go to the largest `h`.
pub fn argmax_quadratic(
    f: &StrassenGridFunction,
    alpha: f64,
    beta: f64,
    gamma: f64,
) -> Result<QuadraticArgmax> {
    if !(alpha > 0.0 && alpha.is_finite()) || !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "alpha {alpha} and beta {beta} must be positive"
        )));
    }
    if !gamma.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "gamma {gamma} must be finite"
        )));
    }
    let objective = |i: usize| {
        let h = f.grid_point(i);
        alpha * f.g[i] - beta * h * h - gamma * h
    };
    let mut best_i = 0;
    let mut best_v = f64::NEG_INFINITY;
    for i in 0..f.g.len() {
        let v = objective(i);
        let tol = TIE_REL_TOL * v.abs().max(best_v.abs()).max(1.0);
        // Later points have larger h, so near-ties move right.
        if v >= best_v - tol {
            best_i = i;
            best_v = best_v.max(v);
        }
    }
    Ok(QuadraticArgmax {
        location: f.grid_point(best_i),
        value: objective(best_i),
        on_boundary: best_i == 0 || best_i == f.g.len() - 1,
    })
}

/// Energy and feasibility of one solver iterate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterateRecord {
    pub energy: f64,
    pub max_violation: f64,
    pub active_constraints: usize,
}

impl IterateRecord {
    pub fn is_feasible(&self) -> bool {
        self.max_violation <= FEASIBILITY_TOL
    }
}

/// Minimal-energy derivative on `[0, t0]` whose `g(t) - t²` peaks at `t0`.
#[derive(Debug, Clone, PartialEq)]
pub struct VariationalSolution {
    pub t0: f64,
    /// Actual spacing: `t0` divided by the number of cells.
    pub eta: f64,
    /// Derivative on the cells of `[0, t0]`.
    pub gdot_opt: Vec<f64>,
    pub energy: f64,
    pub iterations: usize,
    pub max_violation: f64,
    pub trace: Vec<IterateRecord>,
}

impl VariationalSolution {
    /// `4 t0³ / 3`.
    pub fn continuum_energy(&self) -> f64 {
        4.0 * self.t0.powi(3) / 3.0
    }

    pub fn cell_midpoints(&self) -> Vec<f64> {
        (0..self.gdot_opt.len())
            .map(|j| (j as f64 + 0.5) * self.eta)
            .collect()
    }

    /// `max_u |ġ(u) - 2u|` over cell midpoints.
    pub fn sup_distance_to_linear(&self) -> f64 {
        self.gdot_opt
            .iter()
            .zip(self.cell_midpoints())
            .map(|(v, u)| (v - 2.0 * u).abs())
            .fold(0.0, f64::max)
    }

    /// Values `g(t_k)` on the grid of `[0, t0]`.
    pub fn g_values(&self) -> Vec<f64> {
        let mut g = Vec::with_capacity(self.gdot_opt.len() + 1);
        let mut acc = 0.0;
        g.push(acc);
        for v in &self.gdot_opt {
            acc += v * self.eta;
            g.push(acc);
        }
        g
    }

    /// The solution embedded with zero derivative off `[0, t0]` in the
    /// smallest grid `[-H', H']` of the solution's spacing with `H' ≥ H`.
    /// Fails when the energy exceeds one.
    pub fn to_grid_function(&self, half_range: f64) -> Result<StrassenGridFunction> {
        let k = ((half_range / self.eta) - 1e-9).ceil().max(1.0) as usize;
        let half_range = k as f64 * self.eta;
        if self.gdot_opt.len() > k {
            return Err(Error::InvalidGrid(format!(
                "t0 = {} does not fit in half range {half_range}",
                self.t0
            )));
        }
        let mut gdot = vec![0.0; 2 * k];
        gdot[k..k + self.gdot_opt.len()].copy_from_slice(&self.gdot_opt);
        StrassenGridFunction::from_gdot(half_range, self.eta, gdot)
    }
}

/// Cells used for `[0, t0]` at requested spacing `eta`.
pub fn cell_count(t0: f64, eta: f64) -> usize {
    ((t0 / eta) - 1e-9).ceil().max(1.0) as usize
}

/// Constraint right-hand sides `b_k = t0² - t_k²`, with `b_m = 0`.
fn tail_bounds(t0: f64, m: usize) -> Vec<f64> {
    let h = t0 / m as f64;
    (0..=m)
        .map(|k| {
            let t = k as f64 * h;
            // (t0 - t)(t0 + t) avoids cancellation near t0.
            (t0 - t) * (t0 + t)
        })
        .collect()
}

/// Minimizes `η ∑ ġ_j²` over the cells of `[0, t0]` subject to
/// `g(t0) - t0² ≥ g(t_k) - t_k²` at every grid point.
///
/// Works with tail sums `S_k = g(t0) - g(t_k)`: the constraints become
/// `S_k ≥ b_k` and the objective the Dirichlet energy of `S`. An active set
/// is grown from empty, adding the most violated bound and dropping bounds
/// whose multiplier turns negative; between active points `S` is linear and
/// it is flat to the left of the first one.
pub fn min_energy_given_argmax(t0: f64, eta: f64) -> Result<VariationalSolution> {
    if !(t0 > 0.0 && t0.is_finite()) {
        return Err(Error::InvalidParameter(format!("t0 {t0} must be positive")));
    }
    if !(eta > 0.0 && eta <= t0 / 50.0) {
        return Err(Error::InvalidGrid(format!(
            "spacing {eta} must lie in (0, t0/50]"
        )));
    }
    let m = cell_count(t0, eta);
    let h = t0 / m as f64;
    let b = tail_bounds(t0, m);
    let scale = t0 * t0;
    let max_iterations = 4 * m + 100;

    let mut active = vec![false; m + 1];
    active[m] = true;
    let mut s = vec![0.0; m + 1];
    let mut trace = Vec::new();
    let mut prev_energy = f64::NAN;

    for iteration in 1..=max_iterations {
        solve_on_active_set(&active, &b, &mut s);
        let gdot: Vec<f64> = s.windows(2).map(|w| (w[0] - w[1]) / h).collect();
        let e = energy_of(&gdot, h);

        let mut worst = (0.0, None);
        for k in 0..m {
            let v = b[k] - s[k];
            if v > worst.0 {
                worst = (v, Some(k));
            }
        }
        let max_violation = worst.0 / scale;
        trace.push(IterateRecord {
            energy: e,
            max_violation,
            active_constraints: active.iter().filter(|a| **a).count() - 1,
        });

        // Multiplier of bound k is 2(ġ_k - ġ_{k-1}) with ġ_{-1} = 0.
        let mut most_negative = (0.0, None);
        for k in 0..m {
            if active[k] {
                let left = if k == 0 { 0.0 } else { gdot[k - 1] };
                let lambda = 2.0 * (gdot[k] - left);
                if lambda < most_negative.0 {
                    most_negative = (lambda, Some(k));
                }
            }
        }

        let energy_change = (e - prev_energy).abs();
        prev_energy = e;
        let multipliers_ok = most_negative.0 >= -1e-12 * (t0 + 1.0);

        if max_violation <= FEASIBILITY_TOL && multipliers_ok {
            return Ok(VariationalSolution {
                t0,
                eta: h,
                gdot_opt: gdot,
                energy: e,
                iterations: iteration,
                max_violation,
                trace,
            });
        }
        if !multipliers_ok {
            active[most_negative.1.expect("negative multiplier recorded")] = false;
        } else if let Some(k) = worst.1 {
            active[k] = true;
        }
        if iteration == max_iterations {
            return Err(Error::NonConvergence {
                iterations: iteration,
                max_violation,
                energy_change,
            });
        }
    }
    unreachable!("loop returns on its last iteration")
}

fn solve_on_active_set(active: &[bool], b: &[f64], s: &mut [f64]) {
    let m = s.len() - 1;
    let anchor_value = |k: usize| if k == m { 0.0 } else { b[k] };
    let mut prev: Option<usize> = None;
    for k in 0..=m {
        if !active[k] {
            continue;
        }
        let vk = anchor_value(k);
        match prev {
            None => s[..=k].iter_mut().for_each(|x| *x = vk),
            Some(p) => {
                let vp = anchor_value(p);
                let len = (k - p) as f64;
                for (j, x) in s[p..=k].iter_mut().enumerate() {
                    let w = j as f64 / len;
                    *x = vp + w * (vk - vp);
                }
            }
        }
        prev = Some(k);
    }
}

/// Result of the bisection for `M`.
#[derive(Debug, Clone, PartialEq)]
pub struct SupTResult {
    pub value: f64,
    pub bracket: (f64, f64),
    pub bisection_steps: usize,
    pub eta: f64,
    /// Extremal solution at the lower end of the final bracket.
    pub extremal: VariationalSolution,
}

/// Largest `t0` in `[lo, hi]` with `min_energy_given_argmax(t0) ≤ 1`.
pub fn sup_t_in(lo: f64, hi: f64, eta: f64, tol: f64) -> Result<SupTResult> {
    if !(lo > 0.0 && hi > lo && tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "bad bracket [{lo}, {hi}] or tolerance {tol}"
        )));
    }
    let mut low_sol = min_energy_given_argmax(lo, eta)?;
    if low_sol.energy > 1.0 {
        return Err(Error::InvalidParameter(format!(
            "energy at lower end {lo} already exceeds 1"
        )));
    }
    if min_energy_given_argmax(hi, eta)?.energy <= 1.0 {
        return Err(Error::InvalidParameter(format!(
            "energy at upper end {hi} does not exceed 1"
        )));
    }
    let (mut a, mut c) = (lo, hi);
    let mut steps = 0;
    while c - a > tol {
        let mid = 0.5 * (a + c);
        let sol = min_energy_given_argmax(mid, eta)?;
        if sol.energy <= 1.0 {
            a = mid;
            low_sol = sol;
        } else {
            c = mid;
        }
        steps += 1;
    }
    Ok(SupTResult {
        value: 0.5 * (a + c),
        bracket: (a, c),
        bisection_steps: steps,
        eta,
        extremal: low_sol,
    })
}

/// `M` by bisection over `t0 ∈ [0.3, 1.2]` at spacing `eta`.
pub fn sup_t(eta: f64) -> Result<SupTResult> {
    sup_t_in(0.3, 1.2, eta, 1e-7)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn unit_box(eta: f64) -> StrassenGridFunction {
        StrassenGridFunction::from_fn(
            3.0,
            eta,
            |u| if (0.0..1.0).contains(&u) { 1.0 } else { 0.0 },
        )
        .unwrap()
    }

    #[test]
    fn energies_of_simple_functions() {
        assert_eq!(energy(&StrassenGridFunction::zero(3.0, 0.01).unwrap()), 0.0);
        assert_relative_eq!(energy(&unit_box(0.01)), 1.0, max_relative = 1e-12);
        let t0 = 0.8;
        let f = StrassenGridFunction::from_fn(3.0, 0.001, |u| {
            if (0.0..t0).contains(&u) {
                2.0 * u
            } else {
                0.0
            }
        })
        .unwrap();
        assert!((energy(&f) - 4.0 * t0 * t0 * t0 / 3.0).abs() < 1e-5);
    }

    #[test]
    fn g_is_cumulative_from_zero() {
        let f = StrassenGridFunction::from_fn(1.0, 0.25, |u| u).unwrap();
        assert_eq!(f.g()[4], 0.0);
        assert_relative_eq!(f.g()[5], 0.125 * 0.25);
        assert_relative_eq!(f.g()[3], 0.125 * 0.25);
        assert_relative_eq!(f.eval(0.125), 0.5 * 0.125 * 0.25);
        assert_eq!(f.eval(5.0), f.g()[8]);
    }

    #[test]
    fn energy_above_one_rejected() {
        assert!(StrassenGridFunction::from_fn(3.0, 0.01, |_| 1.0).is_err());
    }

    #[test]
    fn rescale_identity_and_box() {
        let f = unit_box(0.01);
        let same = rescale(&f, 1.0, 0.0).unwrap();
        for (a, b) in same.g().iter().zip(f.g()) {
            assert!((a - b).abs() < 1e-12);
        }
        let squeezed = rescale(&f, 4.0, 0.0).unwrap();
        assert!((energy(&squeezed) - 1.0).abs() < 1e-3);
        assert!(rescale(&f, 0.0, 0.0).is_err());
    }

    #[test]
    fn argmax_examples() {
        let zero = StrassenGridFunction::zero(3.0, 0.01).unwrap();
        let r = argmax_quadratic(&zero, 1.0, 2.0, 1.0).unwrap();
        assert!((r.location + 0.25).abs() <= 0.005 + 1e-12);
        assert!(!r.on_boundary);
        let r = argmax_quadratic(&unit_box(0.01), 1.0, 1.0, 0.0).unwrap();
        assert!((r.location - 0.5).abs() < 1e-9);
        let r = argmax_quadratic(&zero, 1.0, 1.0, -100.0).unwrap();
        assert!(r.on_boundary);
    }

    #[test]
    fn argmax_ties_go_right() {
        // h/2 - h² vanishes at h = 0 and h = 1/2.
        let f = StrassenGridFunction::zero(3.0, 0.5).unwrap();
        let r = argmax_quadratic(&f, 1.0, 1.0, -0.5).unwrap();
        assert_eq!(r.location, 0.5);
    }

    #[test]
    fn discrete_optimum_is_known() {
        // Every bound active gives ġ_j = (2j + 1) η, twice the cell midpoint.
        let sol = min_energy_given_argmax(1.0, 0.01).unwrap();
        assert!(sol.sup_distance_to_linear() < 1e-10);
        let expect = (4.0 - 0.01f64 * 0.01) / 3.0;
        assert_relative_eq!(sol.energy, expect, max_relative = 1e-10);
        assert!(sol.max_violation <= 1e-12);
    }

    #[test]
    fn closed_form_energies() {
        for (t0, e) in [(0.5, 1.0 / 6.0), (1.0, 4.0 / 3.0), (0.75f64.cbrt(), 1.0)] {
            let sol = min_energy_given_argmax(t0, DEFAULT_ETA).unwrap();
            assert_relative_eq!(sol.energy, e, max_relative = 1e-3);
            assert!(sol.sup_distance_to_linear() < 10.0 * sol.eta);
        }
        assert!(min_energy_given_argmax(0.95, DEFAULT_ETA).unwrap().energy > 1.0);
        assert!(min_energy_given_argmax(0.85, DEFAULT_ETA).unwrap().energy < 1.0);
    }

    #[test]
    fn coarse_spacing_rejected() {
        assert!(min_energy_given_argmax(1.0, 0.02).is_ok());
        assert!(min_energy_given_argmax(1.0, 0.021).is_err());
        assert!(min_energy_given_argmax(0.0, 0.001).is_err());
    }

    #[test]
    fn sup_t_finds_m() {
        let r = sup_t(DEFAULT_ETA).unwrap();
        assert!((r.value - 0.75f64.cbrt()).abs() < 1e-3);
        assert!(r.extremal.energy <= 1.0);
        let f = r.extremal.to_grid_function(DEFAULT_HALF_RANGE).unwrap();
        let am = argmax_quadratic(&f, 1.0, 1.0, 0.0).unwrap();
        assert!((am.location - r.extremal.t0).abs() <= 2.0 * r.extremal.eta);
    }
}
