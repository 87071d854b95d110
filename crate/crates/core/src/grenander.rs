//! The Grenander estimator of a nonincreasing density, the mixing-distribution
//! estimator obtained from it, and the limit constants of the pointwise theory.

use num_rational::BigRational;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::exact;
use crate::majorant::{
    least_concave_majorant, left_derivative_step, HullPointSet, PiecewiseLinearConcave,
};
use crate::sample::{Continuity, EmpiricalCdf, SortedSample, StepFunction};

/// `sup_{g in G} argmax_t {g(t) - t^2}` over the two-sided Strassen set.
pub fn strassen_m() -> f64 {
    0.75f64.cbrt()
}

/// Grenander fit of a sample.
#[derive(Debug, Clone)]
pub struct GrenanderFit {
    sample: SortedSample,
    cdf: EmpiricalCdf,
    majorant: PiecewiseLinearConcave,
    density: StepFunction,
    mixing: StepFunction,
}

/// Fits the left derivative of the least concave majorant of the empirical CDF.
pub fn fit(sample: &SortedSample) -> Result<GrenanderFit> {
    let cdf = EmpiricalCdf::new(sample);
    let pts = HullPointSet::from_ecdf(&cdf);
    let majorant = least_concave_majorant(&pts);
    let density = left_derivative_step(&majorant);
    let mixing = mixing_step(&majorant)?;
    Ok(GrenanderFit {
        sample: sample.clone(),
        cdf,
        majorant,
        density,
        mixing,
    })
}

/// `G(t) = F(t) - t f(t)` is constant on each hull segment `(x_{j}, x_{j+1})`,
/// equal to `y_j - s_j x_j`. Breakpoints take the value on their right so the
/// result is a distribution function.
fn mixing_step(m: &PiecewiseLinearConcave) -> Result<StepFunction> {
    let xs = m.knot_xs();
    let slopes = m.exact_slopes().expect("exact ordinates");
    let levels = slopes
        .iter()
        .enumerate()
        .map(|(j, s)| {
            let y = m.knots().y_exact(j).expect("exact ordinates");
            exact::to_f64(&(y - s * exact::rational(xs[j])))
        })
        .collect();
    StepFunction::new(xs[1..].to_vec(), levels, 1.0, Continuity::Right)
}

impl GrenanderFit {
    pub fn sample(&self) -> &SortedSample {
        &self.sample
    }

    pub fn ecdf(&self) -> &EmpiricalCdf {
        &self.cdf
    }

    /// The least concave majorant `F̂_n`.
    pub fn majorant(&self) -> &PiecewiseLinearConcave {
        &self.majorant
    }

    /// The density estimate `f̂_n` (left-continuous).
    pub fn density(&self) -> &StepFunction {
        &self.density
    }

    /// The mixing-distribution estimate `Ĝ_n` (right-continuous).
    pub fn mixing(&self) -> &StepFunction {
        &self.mixing
    }

    pub fn density_at(&self, t: f64) -> f64 {
        self.density.eval(t)
    }

    pub fn cdf_at(&self, t: f64) -> f64 {
        if t <= 0.0 {
            0.0
        } else {
            self.majorant.eval(t)
        }
    }

    /// `f̂_n(t)` as an exact rational.
    pub fn density_at_exact(&self, t: f64) -> BigRational {
        let slopes = self
            .majorant
            .exact_slopes()
            .expect("majorant of an empirical CDF has exact ordinates");
        let last = *self.majorant.knot_xs().last().unwrap();
        if t > last {
            BigRational::zero()
        } else {
            let j = self.majorant.segment_left_of(t).unwrap_or(0);
            slopes[j].clone()
        }
    }

    /// `∫ f̂_n`, computed exactly; equals one for every sample.
    pub fn exact_integral(&self) -> BigRational {
        let xs = self.majorant.knot_xs();
        self.majorant
            .exact_slopes()
            .expect("exact ordinates")
            .into_iter()
            .enumerate()
            .map(|(j, s)| s * (exact::rational(xs[j + 1]) - exact::rational(xs[j])))
            .fold(BigRational::zero(), |acc, v| acc + v)
    }
}

/// `Ĝ_n(t) = F̂_n(t) - t f̂_n(t)`.
pub fn mixing_estimate_at(fit: &GrenanderFit, t: f64) -> f64 {
    fit.mixing.eval(t)
}

/// Local behaviour of the true density at the evaluation point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalParams {
    t0: f64,
    f_t0: f64,
    fprime_t0: f64,
}

impl LocalParams {
    pub fn new(t0: f64, f_t0: f64, fprime_t0: f64) -> Result<Self> {
        if !(t0 > 0.0 && t0.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "t0 = {t0} must be positive"
            )));
        }
        if !(f_t0 > 0.0 && f_t0.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "f(t0) = {f_t0} must be positive"
            )));
        }
        if !(fprime_t0 < 0.0 && fprime_t0.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "f'(t0) = {fprime_t0} must be negative"
            )));
        }
        Ok(Self {
            t0,
            f_t0,
            fprime_t0,
        })
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn f_t0(&self) -> f64 {
        self.f_t0
    }

    pub fn fprime_t0(&self) -> f64 {
        self.fprime_t0
    }
}

/// `|f(t0) f'(t0) / 2|^(1/3) * 2`, the factor in front of Chernoff's `Z`.
pub fn limit_constant(p: &LocalParams) -> f64 {
    (0.5 * p.f_t0 * p.fprime_t0).abs().cbrt() * 2.0
}

/// Almost-sure limsup of `n^(1/3) (f̂_n(t0) - f(t0)) / (2 log log n)^(1/3)`.
pub fn lil_limit(p: &LocalParams) -> f64 {
    limit_constant(p) * strassen_m()
}

/// The same limsup for `Ĝ_n(t0)`; carries an extra factor `t0`.
pub fn mixing_lil_limit(p: &LocalParams) -> f64 {
    p.t0 * lil_limit(p)
}

/// Uniform distances of the majorant and of the empirical CDF to a true CDF.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarshallReport {
    /// `sup_t |F̂_n(t) - F(t)|`.
    pub sup_majorant: f64,
    /// `sup_t |F_n(t) - F(t)|`, including left limits at the jumps.
    pub sup_empirical: f64,
    /// Points of the uniform grid on `[0, max sample]`.
    pub grid_points: usize,
}

impl MarshallReport {
    pub fn holds(&self) -> bool {
        self.sup_majorant <= self.sup_empirical
    }
}

pub const MARSHALL_GRID_POINTS: usize = 1000;

/// Compares `sup|F̂_n - F|` with `sup|F_n - F|` for a concave `F`.
///
/// Both suprema are evaluated at the jump points, their midpoints and a
/// 1000-point grid on `[0, max]`. The empirical CDF additionally uses its left
/// limits at the jumps. On each majorant segment `F - F̂_n` is concave, so its
/// interior maximum is located by golden-section search.
pub fn marshall_check(
    sample: &SortedSample,
    true_cdf: &dyn Fn(f64) -> f64,
) -> Result<MarshallReport> {
    let fit = fit(sample)?;
    Ok(marshall_check_fit(&fit, true_cdf))
}

pub fn marshall_check_fit(fit: &GrenanderFit, true_cdf: &dyn Fn(f64) -> f64) -> MarshallReport {
    let jumps = fit.cdf.jump_points();
    let max = fit.sample.max();
    let mut probe: Vec<f64> = Vec::with_capacity(2 * jumps.len() + MARSHALL_GRID_POINTS + 1);
    probe.push(0.0);
    let mut prev = 0.0;
    for &x in jumps {
        probe.push(0.5 * (prev + x));
        probe.push(x);
        prev = x;
    }
    probe.extend(
        (0..MARSHALL_GRID_POINTS).map(|i| max * i as f64 / (MARSHALL_GRID_POINTS - 1) as f64),
    );

    let mut sup_majorant = 0.0f64;
    let mut sup_empirical = 0.0f64;
    for &t in &probe {
        let f = true_cdf(t);
        sup_majorant = sup_majorant.max((fit.cdf_at(t) - f).abs());
        sup_empirical = sup_empirical.max((fit.cdf.eval(t) - f).abs());
    }
    for &x in jumps {
        sup_empirical = sup_empirical.max((fit.cdf.eval_left(x) - true_cdf(x)).abs());
    }
    let kx = fit.majorant.knot_xs();
    for w in kx.windows(2) {
        let gap = |t: f64| true_cdf(t) - fit.majorant.eval(t);
        sup_majorant = sup_majorant.max(golden_max(gap, w[0], w[1]).abs());
    }
    MarshallReport {
        sup_majorant,
        sup_empirical,
        grid_points: MARSHALL_GRID_POINTS,
    }
}

fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..80 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = f(d);
        }
    }
    fc.max(fd)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use num_traits::One;

    fn fit_of(v: &[f64]) -> GrenanderFit {
        fit(&SortedSample::new(v.to_vec()).unwrap()).unwrap()
    }

    #[test]
    fn single_observation() {
        let f = fit_of(&[2.0]);
        assert_eq!(f.density().levels(), &[0.5]);
        assert_eq!(f.density_at(1.0), 0.5);
        assert_eq!(f.density_at(2.0), 0.5);
        assert_eq!(f.density_at(2.0001), 0.0);
        assert_eq!(mixing_estimate_at(&f, 1.0), 0.0);
        assert_eq!(mixing_estimate_at(&f, 2.5), 1.0);
        assert_eq!(mixing_estimate_at(&f, 2.0), 1.0);
        assert_eq!(mixing_estimate_at(&f, 0.0), 0.0);
    }

    #[test]
    fn collinear_pair() {
        let f = fit_of(&[1.0, 2.0]);
        assert_eq!(f.density().levels(), &[0.5]);
        assert_eq!(f.density().breakpoints(), &[2.0]);
    }

    #[test]
    fn pair_one_three() {
        let f = fit_of(&[1.0, 3.0]);
        assert_eq!(f.density().levels(), &[0.5, 0.25]);
        assert_eq!(f.density_at(2.0), 0.25);
        assert_eq!(f.cdf_at(2.0), 0.75);
        assert_eq!(mixing_estimate_at(&f, 2.0), 0.25);
        assert_eq!(
            f.density_at_exact(2.0),
            BigRational::new(1.into(), 4.into())
        );
    }

    #[test]
    fn integral_is_one() {
        let f = fit_of(&[0.3, 0.31, 0.9, 1.7, 1.7, 2.2, 5.0]);
        assert!(f.exact_integral().is_one());
        assert_relative_eq!(f.density().integral_from(0.0), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn example_constants() {
        let ln2 = std::f64::consts::LN_2;
        let exp1 = LocalParams::new(ln2, 0.5, -0.5).unwrap();
        assert_relative_eq!(limit_constant(&exp1), 1.0, epsilon = 1e-15);
        assert_relative_eq!(lil_limit(&exp1), 0.75f64.cbrt(), epsilon = 1e-15);
        assert_relative_eq!(lil_limit(&exp1), 0.908560, epsilon = 1e-6);
        assert_relative_eq!(
            mixing_lil_limit(&exp1),
            ln2 * 0.75f64.cbrt(),
            epsilon = 1e-15
        );

        let pareto = LocalParams::new(1.0, 0.25, -0.25).unwrap();
        assert_relative_eq!(
            limit_constant(&pareto),
            2f64.powf(-2.0 / 3.0),
            epsilon = 1e-15
        );
        assert_relative_eq!(lil_limit(&pareto), (3.0f64 / 16.0).cbrt(), epsilon = 1e-15);
        assert_relative_eq!(
            mixing_lil_limit(&pareto),
            (3.0f64 / 16.0).cbrt(),
            epsilon = 1e-15
        );

        let tri = LocalParams::new(2f64.sqrt() - 1.0, 1.0, -1.0).unwrap();
        assert_relative_eq!(limit_constant(&tri), 2f64.powf(2.0 / 3.0), epsilon = 1e-15);
        assert_relative_eq!(lil_limit(&tri), 3f64.cbrt(), epsilon = 1e-15);
    }

    #[test]
    fn mixing_limit_vanishes_with_t0() {
        let p = LocalParams::new(1e-12, 0.5, -0.5).unwrap();
        assert!(mixing_lil_limit(&p) < 1e-11);
    }

    #[test]
    fn local_params_validated() {
        assert!(LocalParams::new(0.0, 1.0, -1.0).is_err());
        assert!(LocalParams::new(1.0, 0.0, -1.0).is_err());
        assert!(LocalParams::new(1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn marshall_on_own_majorant_is_zero() {
        let s = SortedSample::new(vec![0.2, 0.5, 0.6, 1.4, 3.0]).unwrap();
        let f = fit(&s).unwrap();
        let own = f.clone();
        let r = marshall_check_fit(&f, &move |t| own.cdf_at(t));
        assert!(r.sup_majorant < 1e-12);
        assert!(r.holds());
        assert_eq!(r.grid_points, MARSHALL_GRID_POINTS);
    }

    #[test]
    fn marshall_single_observation() {
        let s = SortedSample::new(vec![0.7]).unwrap();
        let r = marshall_check(&s, &|t: f64| 1.0 - (-t).exp()).unwrap();
        assert!(r.holds());
        // F_n jumps from 0 to 1 at 0.7, so the distance is max(F, 1 - F) there.
        let f = 1.0 - (-0.7f64).exp();
        assert_relative_eq!(r.sup_empirical, f.max(1.0 - f), epsilon = 1e-15);
    }
}
