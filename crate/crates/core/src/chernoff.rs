//! Two-sided Brownian motion on a grid, two samplers for Chernoff's `Z`, and
//! the Airy-function tail asymptotics of its density.
//!
//! `Z = argmin_t {W(t) + t^2}`; equivalently `2Z` is the slope at zero of the
//! least concave majorant of `W(t) - t^2`. Both routes are implemented so one
//! can serve as an oracle for the other.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::majorant::{least_concave_majorant, HullPointSet};
use crate::rng::stream_rng;

pub const DEFAULT_HALF_WIDTH: f64 = 3.0;
pub const DEFAULT_STEP: f64 = 0.002;

/// `W` on the symmetric grid `{-L, ..., -δ, 0, δ, ..., L}`.
#[derive(Debug, Clone, PartialEq)]
pub struct BrownianGridPath {
    half_width: f64,
    step: f64,
    half_points: usize,
    values: Vec<f64>,
}

fn half_points(half_width: f64, step: f64) -> Result<usize> {
    if !(half_width > 0.0 && half_width.is_finite()) {
        return Err(Error::InvalidGrid(format!(
            "half width {half_width} must be positive"
        )));
    }
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::InvalidGrid(format!("step {step} must be positive")));
    }
    let ratio = half_width / step;
    let k = ratio.round();
    if k < 1.0 || (ratio - k).abs() > 1e-9 * k.max(1.0) {
        return Err(Error::InvalidGrid(format!(
            "half width {half_width} is not an integer multiple of step {step}"
        )));
    }
    Ok(k as usize)
}

impl BrownianGridPath {
    /// Wraps explicit values on the grid; `values[half_points]` must be 0.
    pub fn from_values(half_width: f64, step: f64, values: Vec<f64>) -> Result<Self> {
        let k = half_points(half_width, step)?;
        if values.len() != 2 * k + 1 {
            return Err(Error::InvalidGrid(format!(
                "expected {} values, got {}",
                2 * k + 1,
                values.len()
            )));
        }
        if values[k] != 0.0 {
            return Err(Error::InvalidGrid("path must vanish at 0".into()));
        }
        Ok(Self {
            half_width,
            step,
            half_points: k,
            values,
        })
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Grid location of index `i`.
    pub fn time(&self, i: usize) -> f64 {
        (i as f64 - self.half_points as f64) * self.step
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.values.len()).map(|i| self.time(i)).collect()
    }

    /// Every `factor`-th grid point, itself a Brownian path with step
    /// `factor * δ` on the largest symmetric grid that fits.
    pub fn coarsen(&self, factor: usize) -> Result<Self> {
        if factor == 0 || self.half_points / factor == 0 {
            return Err(Error::InvalidGrid(format!("cannot coarsen by {factor}")));
        }
        let k = self.half_points / factor;
        let values = (0..=2 * k)
            .map(|j| self.values[self.half_points + j * factor - k * factor])
            .collect();
        Ok(Self {
            half_width: k as f64 * factor as f64 * self.step,
            step: factor as f64 * self.step,
            half_points: k,
            values,
        })
    }

    /// The sub-path on `[-half_width, half_width]`.
    pub fn truncate(&self, half_width: f64) -> Result<Self> {
        let k = half_points(half_width, self.step)?;
        if k > self.half_points {
            return Err(Error::InvalidGrid(format!(
                "cannot widen a path from {} to {half_width}",
                self.half_width
            )));
        }
        let values = self.values[self.half_points - k..=self.half_points + k].to_vec();
        Ok(Self {
            half_width,
            step: self.step,
            half_points: k,
            values,
        })
    }
}

/// Two independent Gaussian random walks glued at 0, drawn outward with the
/// right and left increments interleaved. A path on `[-L, L]` is therefore
/// the restriction of the path on any wider grid drawn from the same stream.
pub fn sample_path(half_width: f64, step: f64, rng: &mut impl Rng) -> Result<BrownianGridPath> {
    let k = half_points(half_width, step)?;
    let sd = step.sqrt();
    let mut values = vec![0.0; 2 * k + 1];
    let (mut right, mut left) = (0.0, 0.0);
    for i in 1..=k {
        let zr: f64 = rng.sample(StandardNormal);
        let zl: f64 = rng.sample(StandardNormal);
        right += sd * zr;
        left += sd * zl;
        values[k + i] = right;
        values[k - i] = left;
    }
    Ok(BrownianGridPath {
        half_width,
        step,
        half_points: k,
        values,
    })
}

/// Grid minimizer of `W(t) + t^2`; ties go to the smallest `|t|`, then to the
/// negative side.
pub fn chernoff_argmin(path: &BrownianGridPath) -> f64 {
    let k = path.half_points as isize;
    let mut best_i = 0isize;
    let mut best_v = f64::INFINITY;
    for (idx, &w) in path.values.iter().enumerate() {
        let i = idx as isize - k;
        let t = i as f64 * path.step;
        let v = w + t * t;
        let better = v < best_v
            || (v == best_v && (i.abs() < best_i.abs() || (i.abs() == best_i.abs() && i < best_i)));
        if better {
            best_v = v;
            best_i = i;
        }
    }
    best_i as f64 * path.step
}

/// Half the slope at 0 of the majorant of `W(t) - t^2` over the grid.
///
/// On a grid 0 is often a knot of the majorant, where the slope is not
/// defined; we take the mean of the left and right slopes there. A one-sided
/// choice would shift every draw by up to `δ/2` in one direction.
pub fn chernoff_slope(path: &BrownianGridPath) -> f64 {
    let ts = path.times();
    let ys: Vec<f64> = ts
        .iter()
        .zip(&path.values)
        .map(|(t, w)| w - t * t)
        .collect();
    let pts = HullPointSet::from_real(ts, ys).expect("grid is strictly increasing");
    let hull = least_concave_majorant(&pts);
    let left = hull.left_slope_at(0.0).expect("0 is interior to the grid");
    let right = hull.right_slope_at(0.0).expect("0 is interior to the grid");
    0.25 * (left + right)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SamplerMethod {
    Argmin,
    Slope,
}

impl SamplerMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            SamplerMethod::Argmin => "argmin",
            SamplerMethod::Slope => "slope",
        }
    }
}

impl std::str::FromStr for SamplerMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "argmin" => Ok(SamplerMethod::Argmin),
            "slope" => Ok(SamplerMethod::Slope),
            other => Err(Error::InvalidParameter(format!(
                "unknown sampler method {other:?}"
            ))),
        }
    }
}

/// Draws of `Z` together with everything needed to regenerate them.
#[derive(Debug, Clone, PartialEq)]
pub struct ChernoffSampleSet {
    pub draws: Vec<f64>,
    pub method: SamplerMethod,
    pub half_width: f64,
    pub step: f64,
    pub seed: u64,
}

/// One draw from replicate stream `index` of `seed`.
pub fn chernoff_draw(
    method: SamplerMethod,
    half_width: f64,
    step: f64,
    seed: u64,
    index: u64,
) -> Result<f64> {
    let mut rng = stream_rng(seed, index);
    let path = sample_path(half_width, step, &mut rng)?;
    Ok(match method {
        SamplerMethod::Argmin => chernoff_argmin(&path),
        SamplerMethod::Slope => chernoff_slope(&path),
    })
}

/// `count` independent draws; replicate `i` always uses stream `(seed, i)`.
pub fn sample_chernoff(
    method: SamplerMethod,
    count: usize,
    half_width: f64,
    step: f64,
    seed: u64,
) -> Result<ChernoffSampleSet> {
    half_points(half_width, step)?;
    let draws = (0..count as u64)
        .into_par_iter()
        .map(|i| chernoff_draw(method, half_width, step, seed, i))
        .collect::<Result<Vec<f64>>>()?;
    Ok(ChernoffSampleSet {
        draws,
        method,
        half_width,
        step,
        seed,
    })
}

/// Constants of the Airy tail asymptotics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AiryTailParams {
    /// Largest zero of `Ai`.
    pub a1: f64,
    /// `Ai'(a1)`.
    pub ai_prime_a1: f64,
}

impl Default for AiryTailParams {
    fn default() -> Self {
        Self {
            a1: -2.3381,
            ai_prime_a1: 0.7022,
        }
    }
}

fn airy_prefactor(p: &AiryTailParams) -> f64 {
    4f64.powf(4.0 / 3.0) / (2.0 * p.ai_prime_a1)
}

/// `f_Z(z) ~ 4^(4/3) z exp(-2z^3/3 + 3^(1/3) a1 z) / (2 Ai'(a1))` as `z → ∞`.
pub fn airy_tail_density(z: f64, p: &AiryTailParams) -> Result<f64> {
    if !(z > 0.0) {
        return Err(Error::AsymptoticDomain(z));
    }
    Ok(airy_prefactor(p) * z * (-(2.0 / 3.0) * z.powi(3) + 3f64.cbrt() * p.a1 * z).exp())
}

/// `P(Z > z) ~ 4^(4/3) exp(-2z^3/3) / (2 Ai'(a1) z)` as `z → ∞`.
pub fn airy_tail_probability(z: f64, p: &AiryTailParams) -> Result<f64> {
    if !(z > 0.0) {
        return Err(Error::AsymptoticDomain(z));
    }
    Ok(airy_prefactor(p) / z * (-(2.0 / 3.0) * z.powi(3)).exp())
}

/// `∫_z^∞` of [`airy_tail_density`]: the tail probability implied by the
/// density asymptotics, which (unlike [`airy_tail_probability`]) carries the
/// `exp(3^(1/3) a1 z)` factor.
pub fn airy_tail_integrated(z: f64, p: &AiryTailParams) -> Result<f64> {
    if !(z > 0.0) {
        return Err(Error::AsymptoticDomain(z));
    }
    // The integrand is below 1e-300 of its value at z well before z + 12.
    let upper = z + 12.0;
    let panels = 24_000usize;
    let h = (upper - z) / panels as f64;
    let f = |u: f64| airy_tail_density(u, p).expect("positive abscissa");
    let mut total = f(z) + f(upper);
    for i in 1..panels {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        total += w * f(z + i as f64 * h);
    }
    Ok(total * h / 3.0)
}

/// Fraction of draws strictly above `z`.
pub fn empirical_tail(draws: &[f64], z: f64) -> f64 {
    draws.iter().filter(|&&d| d > z).count() as f64 / draws.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn smallest_grid_has_three_points() {
        let mut rng = stream_rng(1, 0);
        let p = sample_path(0.5, 0.5, &mut rng).unwrap();
        assert_eq!(p.len(), 3);
        assert_eq!(p.values()[1], 0.0);
        assert_eq!(p.times(), vec![-0.5, 0.0, 0.5]);
    }

    #[test]
    fn non_integral_grid_rejected() {
        let mut rng = stream_rng(1, 0);
        assert!(matches!(
            sample_path(1.0, 0.3, &mut rng),
            Err(Error::InvalidGrid(_))
        ));
        assert!(sample_path(-1.0, 0.5, &mut rng).is_err());
        assert!(sample_path(1.0, 0.0, &mut rng).is_err());
    }

    #[test]
    fn fixed_seed_reproduces_path() {
        let a = sample_path(1.0, 0.01, &mut stream_rng(42, 3)).unwrap();
        let b = sample_path(1.0, 0.01, &mut stream_rng(42, 3)).unwrap();
        assert_eq!(a, b);
        let c = sample_path(1.0, 0.01, &mut stream_rng(42, 4)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn zero_path_gives_zero_draws() {
        let p = BrownianGridPath::from_values(1.0, 0.25, vec![0.0; 9]).unwrap();
        assert_eq!(chernoff_argmin(&p), 0.0);
        assert_eq!(chernoff_slope(&p), 0.0);
    }

    #[test]
    fn constructed_dip_moves_argmin() {
        let mut v = vec![0.0; 5];
        v[3] = -4.0;
        let p = BrownianGridPath::from_values(1.0, 0.5, v).unwrap();
        assert_eq!(chernoff_argmin(&p), 0.5);
    }

    #[test]
    fn argmin_ties_prefer_small_then_negative() {
        // W(t) + t^2 equal at t = -0.5 and 0.5, both below the value at 0.
        let v = vec![0.0, -1.0, 0.0, -1.0, 0.0];
        let p = BrownianGridPath::from_values(1.0, 0.5, v).unwrap();
        assert_eq!(chernoff_argmin(&p), -0.5);
    }

    #[test]
    fn slope_on_five_point_path() {
        // t = -1, -0.5, 0, 0.5, 1 with W = (0.5, 0.2, 0, 0.6, -0.2):
        // W - t^2 = (-0.5, -0.05, 0, 0.35, -1.2). Upper hull: (-1,-0.5), (-0.5,-0.05),
        // (0.5, 0.35), (1, -1.2); 0 lies below the chord from -0.5 to 0.5,
        // so the slope there is unambiguous.
        let v = vec![0.5, 0.2, 0.0, 0.6, -0.2];
        let p = BrownianGridPath::from_values(1.0, 0.5, v).unwrap();
        let chord = (0.35 - (-0.05)) / 1.0;
        assert_relative_eq!(chernoff_slope(&p), chord / 2.0, epsilon = 1e-12);
    }

    #[test]
    fn airy_density_value_and_identities() {
        let p = AiryTailParams::default();
        let at1 = airy_tail_density(1.0, &p).unwrap();
        let expect = (1.0 / (2.0 * 0.7022))
            * 4f64.powf(4.0 / 3.0)
            * (-2.0 / 3.0 + 3f64.cbrt() * -2.3381f64).exp();
        assert_relative_eq!(at1, expect, max_relative = 1e-14);
        assert!(airy_tail_density(2.0, &p).unwrap() < airy_tail_density(1.5, &p).unwrap());
        for z in [0.3, 1.0, 2.7] {
            let core =
                4f64.powf(4.0 / 3.0) * z * (-2.0 * z * z * z / 3.0 + 3f64.cbrt() * p.a1 * z).exp();
            assert_relative_eq!(
                airy_tail_density(z, &p).unwrap() / core,
                1.0 / (2.0 * 0.7022),
                max_relative = 1e-12
            );
        }
        assert_eq!(
            airy_tail_density(0.0, &p),
            Err(Error::AsymptoticDomain(0.0))
        );
    }

    #[test]
    fn airy_probability_shape() {
        let p = AiryTailParams::default();
        assert!(airy_tail_probability(2.0, &p).unwrap() < airy_tail_probability(1.5, &p).unwrap());
        let (z, w) = (2.0f64, 1.5f64);
        let lhs =
            airy_tail_probability(z, &p).unwrap().ln() - airy_tail_probability(w, &p).unwrap().ln();
        let rhs = -(2.0 / 3.0) * (z.powi(3) - w.powi(3)) - (z / w).ln();
        assert_relative_eq!(lhs, rhs, max_relative = 1e-12);
        assert!(airy_tail_probability(-1.0, &p).is_err());
    }

    #[test]
    fn integrated_tail_matches_closed_form_asymptotics() {
        // For large z the integral behaves like f(z) / (2 z^2 - 3^(1/3) a1).
        let p = AiryTailParams::default();
        let z = 4.0;
        let approx_tail = airy_tail_density(z, &p).unwrap() / (2.0 * z * z - 3f64.cbrt() * p.a1);
        let integral = airy_tail_integrated(z, &p).unwrap();
        assert_relative_eq!(integral, approx_tail, max_relative = 0.05);
    }

    #[test]
    fn displayed_survival_lacks_the_linear_exponent() {
        // The two displayed asymptotics disagree by roughly exp(-3^(1/3) a1 z).
        let p = AiryTailParams::default();
        let ratio =
            airy_tail_probability(1.5, &p).unwrap() / airy_tail_integrated(1.5, &p).unwrap();
        assert!(ratio > 100.0, "ratio {ratio}");
    }

    #[test]
    fn coarsen_and_truncate_are_restrictions() {
        let p = sample_path(2.0, 0.25, &mut stream_rng(9, 0)).unwrap();
        let c = p.coarsen(2).unwrap();
        assert_eq!(c.step(), 0.5);
        assert_eq!(c.len(), 9);
        assert_eq!(c.values()[4], 0.0);
        assert_eq!(c.values()[5], p.values()[10]);
        assert_eq!(c.values()[3], p.values()[6]);
        let t = p.truncate(1.0).unwrap();
        assert_eq!(t.len(), 9);
        let narrow = sample_path(1.0, 0.25, &mut stream_rng(9, 0)).unwrap();
        assert_eq!(t, narrow);
    }

    #[test]
    fn samplers_are_deterministic() {
        let a = sample_chernoff(SamplerMethod::Slope, 20, 1.0, 0.01, 5).unwrap();
        let b = sample_chernoff(SamplerMethod::Slope, 20, 1.0, 0.01, 5).unwrap();
        assert_eq!(a, b);
        assert_eq!(
            a.draws[7],
            chernoff_draw(SamplerMethod::Slope, 1.0, 0.01, 5, 7).unwrap()
        );
    }
}
