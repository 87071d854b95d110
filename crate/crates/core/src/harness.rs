//! Monte Carlo experiments on three example densities: nested-sample traces
//! of the normalized LIL statistic, and distributional comparisons of the
//! Grenander and mixing estimators against Chernoff's law.

use std::f64::consts::{LN_2, SQRT_2};
use std::fmt;
use std::str::FromStr;

use rand::distr::Open01;
use rand::Rng;
use rayon::prelude::*;

use crate::chernoff::{sample_chernoff, SamplerMethod, DEFAULT_HALF_WIDTH, DEFAULT_STEP};
use crate::error::{Error, Result};
use crate::grenander::{fit, lil_limit, limit_constant, mixing_estimate_at, LocalParams};
use crate::rng::{derive_seed, stream_rng};
use crate::sample::SortedSample;
use crate::stats::{ks_distance, quantile_table, QuantileRow};

pub const DEFAULT_GROWTH: f64 = 1.5;
pub const TRACE_START: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DensityName {
    Exp1,
    ParetoLike,
    Triangular,
}

impl DensityName {
    pub const ALL: [DensityName; 3] = [
        DensityName::Exp1,
        DensityName::ParetoLike,
        DensityName::Triangular,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            DensityName::Exp1 => "exp1",
            DensityName::ParetoLike => "pareto_like",
            DensityName::Triangular => "triangular",
        }
    }
}

impl fmt::Display for DensityName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DensityName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exp1" => Ok(DensityName::Exp1),
            "pareto_like" => Ok(DensityName::ParetoLike),
            "triangular" => Ok(DensityName::Triangular),
            other => Err(Error::InvalidParameter(format!(
                "unknown density {other:?} (expected exp1, pareto_like or triangular)"
            ))),
        }
    }
}

fn pdf(name: DensityName, x: f64) -> f64 {
    if x < 0.0 {
        return 0.0;
    }
    match name {
        DensityName::Exp1 => (-x).exp(),
        DensityName::ParetoLike => (1.0 + x).powi(-2),
        DensityName::Triangular => (SQRT_2 - x).max(0.0),
    }
}

fn pdf_derivative(name: DensityName, x: f64) -> f64 {
    match name {
        DensityName::Exp1 => -(-x).exp(),
        DensityName::ParetoLike => -2.0 * (1.0 + x).powi(-3),
        DensityName::Triangular if (0.0..SQRT_2).contains(&x) => -1.0,
        DensityName::Triangular => 0.0,
    }
}

/// One of the worked examples, with its canonical evaluation point.
///
/// * `exp1`: `f(x) = e^-x`, `t0 = log 2`
/// * `pareto_like`: `f(x) = (1 + x)^-2`, `t0 = 1`
/// * `triangular`: `f(x) = sqrt 2 - x` on `[0, sqrt 2]`, `t0 = sqrt 2 - 1`
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExampleDensity {
    pub name: DensityName,
    pub t0: f64,
    pub local: LocalParams,
}

impl ExampleDensity {
    pub fn new(name: DensityName) -> Self {
        let t0 = match name {
            DensityName::Exp1 => LN_2,
            DensityName::ParetoLike => 1.0,
            DensityName::Triangular => SQRT_2 - 1.0,
        };
        let local = LocalParams::new(t0, pdf(name, t0), pdf_derivative(name, t0))
            .expect("example densities are strictly decreasing at t0");
        Self { name, t0, local }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        pdf(self.name, x)
    }

    pub fn pdf_derivative(&self, x: f64) -> f64 {
        pdf_derivative(self.name, x)
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        match self.name {
            DensityName::Exp1 => -(-x).exp_m1(),
            DensityName::ParetoLike => x / (1.0 + x),
            DensityName::Triangular => {
                let x = x.min(SQRT_2);
                SQRT_2 * x - 0.5 * x * x
            }
        }
    }

    /// Inverse CDF on `(0, 1)`, written to stay positive for tiny `u`.
    pub fn quantile(&self, u: f64) -> f64 {
        match self.name {
            DensityName::Exp1 => -(-u).ln_1p(),
            DensityName::ParetoLike => u / (1.0 - u),
            // sqrt 2 - sqrt(2 - 2u), rationalized.
            DensityName::Triangular => 2.0 * u / (SQRT_2 + (2.0 - 2.0 * u).sqrt()),
        }
    }

    /// `G(x) = F(x) - x f(x)`.
    pub fn mixing_cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        match self.name {
            DensityName::Exp1 => -(-x).exp_m1() - x * (-x).exp(),
            DensityName::ParetoLike => (x / (1.0 + x)).powi(2),
            DensityName::Triangular => {
                let x = x.min(SQRT_2);
                0.5 * x * x
            }
        }
    }

    pub fn limit_constant(&self) -> f64 {
        limit_constant(&self.local)
    }

    pub fn lil_limit(&self) -> f64 {
        lil_limit(&self.local)
    }
}

/// `n` i.i.d. draws by inverse-CDF sampling from open-interval uniforms.
pub fn sample_density(d: &ExampleDensity, n: usize, rng: &mut impl Rng) -> Result<SortedSample> {
    if n == 0 {
        return Err(Error::EmptySample);
    }
    let draws = draw_values(d, n, rng);
    SortedSample::from_unsorted(draws)
}

fn draw_values(d: &ExampleDensity, n: usize, rng: &mut impl Rng) -> Vec<f64> {
    (0..n).map(|_| d.quantile(rng.sample(Open01))).collect()
}

/// `(2 log log n)^(1/3) / n^(1/3)`.
pub fn lil_normalization(n: usize) -> f64 {
    let n = n as f64;
    (2.0 * n.ln().ln() / n).cbrt()
}

/// Sample sizes `100, ceil(100 g), ...` up to and including `n_max`.
pub fn geometric_schedule(n_max: usize, growth: f64) -> Result<Vec<usize>> {
    if n_max < TRACE_START {
        return Err(Error::InvalidParameter(format!(
            "n_max = {n_max} must be at least {TRACE_START}"
        )));
    }
    if !(growth > 1.0 && growth.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "growth factor {growth} must exceed 1"
        )));
    }
    let mut sizes = vec![TRACE_START];
    loop {
        let last = *sizes.last().expect("nonempty");
        if last >= n_max {
            break;
        }
        let next = ((last as f64 * growth).ceil() as usize).max(last + 1);
        sizes.push(next.min(n_max));
    }
    Ok(sizes)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LilRow {
    pub n: usize,
    pub estimate: f64,
    pub statistic: f64,
    pub running_max: f64,
}

/// `R_n = (f̂_n(t0) - f(t0)) / b_n` along one growing sample.
#[derive(Debug, Clone, PartialEq)]
pub struct LilTrace {
    pub density: DensityName,
    pub seed: u64,
    pub growth: f64,
    pub limit: f64,
    pub rows: Vec<LilRow>,
}

impl LilTrace {
    pub fn final_running_max(&self) -> f64 {
        self.rows.last().map_or(f64::NAN, |r| r.running_max)
    }
}

/// Extends one sample along the geometric schedule, refitting at each size.
pub fn lil_trace(d: &ExampleDensity, n_max: usize, growth: f64, seed: u64) -> Result<LilTrace> {
    let sizes = geometric_schedule(n_max, growth)?;
    let mut rng = stream_rng(seed, 0);
    let mut values: Vec<f64> = Vec::with_capacity(n_max);
    let f_t0 = d.pdf(d.t0);
    let mut rows = Vec::with_capacity(sizes.len());
    let mut running_max = f64::NEG_INFINITY;
    for n in sizes {
        values.extend(draw_values(d, n - values.len(), &mut rng));
        let sample = SortedSample::from_unsorted(values.clone())?;
        let estimate = fit(&sample)?.density_at(d.t0);
        let statistic = (estimate - f_t0) / lil_normalization(n);
        running_max = running_max.max(statistic);
        rows.push(LilRow {
            n,
            estimate,
            statistic,
            running_max,
        });
    }
    Ok(LilTrace {
        density: d.name,
        seed,
        growth,
        limit: d.lil_limit(),
        rows,
    })
}

/// Grid used for the Chernoff reference draws.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceGrid {
    pub method: SamplerMethod,
    pub half_width: f64,
    pub step: f64,
}

impl Default for ReferenceGrid {
    fn default() -> Self {
        Self {
            method: SamplerMethod::Argmin,
            half_width: DEFAULT_HALF_WIDTH,
            step: DEFAULT_STEP,
        }
    }
}

/// Normalized statistics against an equally sized Chernoff reference.
#[derive(Debug, Clone, PartialEq)]
pub struct DistributionReport {
    pub density: DensityName,
    pub n: usize,
    pub replicates: usize,
    pub seed: u64,
    /// Divisor turning the raw `n^(1/3)` error into a draw of `Z`.
    pub scale: f64,
    pub statistics: Vec<f64>,
    pub reference: Vec<f64>,
    pub ks: f64,
    pub quantiles: Vec<QuantileRow>,
    /// Smallest and largest raw estimate seen.
    pub estimate_range: (f64, f64),
}

/// Seed of the Chernoff reference shared by all checks with master `seed`.
pub fn reference_seed(seed: u64) -> u64 {
    derive_seed(seed, "chernoff-reference")
}

fn replicate_seed(seed: u64, d: &ExampleDensity, label: &str) -> u64 {
    derive_seed(seed, &format!("{label}/{}", d.name))
}

struct Target {
    label: &'static str,
    scale: f64,
    value: f64,
}

fn distribution_report(
    d: &ExampleDensity,
    n: usize,
    replicates: usize,
    seed: u64,
    grid: ReferenceGrid,
    target: Target,
    estimator: impl Fn(&SortedSample) -> Result<f64> + Sync,
) -> Result<DistributionReport> {
    if n == 0 || replicates < 2 {
        return Err(Error::InvalidParameter(format!(
            "need n >= 1 and at least 2 replicates (got n = {n}, replicates = {replicates})"
        )));
    }
    let rep_seed = replicate_seed(seed, d, target.label);
    let estimates: Vec<f64> = (0..replicates as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(rep_seed, i);
            let sample = sample_density(d, n, &mut rng)?;
            estimator(&sample)
        })
        .collect::<Result<_>>()?;
    let root = (n as f64).cbrt();
    let statistics: Vec<f64> = estimates
        .iter()
        .map(|e| root * (e - target.value) / target.scale)
        .collect();
    let reference = sample_chernoff(
        grid.method,
        replicates,
        grid.half_width,
        grid.step,
        reference_seed(seed),
    )?
    .draws;
    let estimate_range = estimates
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &e| {
            (lo.min(e), hi.max(e))
        });
    Ok(DistributionReport {
        density: d.name,
        n,
        replicates,
        seed,
        scale: target.scale,
        ks: ks_distance(&statistics, &reference),
        quantiles: quantile_table(&statistics, &reference),
        statistics,
        reference,
        estimate_range,
    })
}

/// `n^(1/3)(f̂_n(t0) - f(t0)) / limit_constant` over independent replicates.
pub fn limit_distribution_check(
    d: &ExampleDensity,
    n: usize,
    replicates: usize,
    seed: u64,
    grid: ReferenceGrid,
) -> Result<DistributionReport> {
    let t0 = d.t0;
    distribution_report(
        d,
        n,
        replicates,
        seed,
        grid,
        Target {
            label: "density",
            scale: d.limit_constant(),
            value: d.pdf(t0),
        },
        |s| Ok(fit(s)?.density_at(t0)),
    )
}

/// `n^(1/3)(Ĝ_n(t0) - G(t0)) / (t0 limit_constant)` over independent replicates.
pub fn mixing_distribution_check(
    d: &ExampleDensity,
    n: usize,
    replicates: usize,
    seed: u64,
    grid: ReferenceGrid,
) -> Result<DistributionReport> {
    let t0 = d.t0;
    distribution_report(
        d,
        n,
        replicates,
        seed,
        grid,
        Target {
            label: "mixing",
            scale: t0 * d.limit_constant(),
            value: d.mixing_cdf(t0),
        },
        |s| Ok(mixing_estimate_at(&fit(s)?, t0)),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn quantiles_and_cdfs() {
        let e = ExampleDensity::new(DensityName::Exp1);
        assert_relative_eq!(e.quantile(0.5), LN_2, max_relative = 1e-15);
        let p = ExampleDensity::new(DensityName::ParetoLike);
        assert_eq!(p.quantile(0.5), 1.0);
        let t = ExampleDensity::new(DensityName::Triangular);
        assert_relative_eq!(t.cdf(SQRT_2), 1.0, max_relative = 1e-15);
        for d in DensityName::ALL.map(ExampleDensity::new) {
            for u in [1e-300, 1e-12, 0.1, 0.5, 0.9, 1.0 - 1e-12] {
                let x = d.quantile(u);
                assert!(x > 0.0, "{} at {u}", d.name);
                assert_relative_eq!(d.cdf(x), u, max_relative = 1e-6);
            }
        }
    }

    #[test]
    fn local_constants() {
        let c = |n| ExampleDensity::new(n).limit_constant();
        assert_relative_eq!(c(DensityName::Exp1), 1.0, max_relative = 1e-12);
        assert_relative_eq!(
            c(DensityName::ParetoLike),
            2f64.powf(-2.0 / 3.0),
            max_relative = 1e-12
        );
        assert_relative_eq!(
            c(DensityName::Triangular),
            2f64.powf(2.0 / 3.0),
            max_relative = 1e-12
        );
        let m = 0.75f64.cbrt();
        assert_relative_eq!(
            ExampleDensity::new(DensityName::Exp1).lil_limit(),
            m,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            ExampleDensity::new(DensityName::Triangular).lil_limit(),
            3f64.cbrt(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn mixing_cdfs_follow_inversion() {
        for d in DensityName::ALL.map(ExampleDensity::new) {
            for x in [0.1, 0.5, 1.0, 1.3] {
                assert_relative_eq!(
                    d.mixing_cdf(x),
                    d.cdf(x) - x * d.pdf(x),
                    max_relative = 1e-12
                );
            }
        }
    }

    #[test]
    fn schedule_is_geometric_and_ends_at_n_max() {
        assert_eq!(geometric_schedule(100, 1.5).unwrap(), vec![100]);
        assert_eq!(
            geometric_schedule(400, 1.5).unwrap(),
            vec![100, 150, 225, 338, 400]
        );
        assert!(geometric_schedule(99, 1.5).is_err());
        assert!(geometric_schedule(1000, 1.0).is_err());
    }

    #[test]
    fn trace_is_nested_and_deterministic() {
        let d = ExampleDensity::new(DensityName::Exp1);
        let a = lil_trace(&d, 2000, 1.5, 11).unwrap();
        let b = lil_trace(&d, 2000, 1.5, 11).unwrap();
        assert_eq!(a, b);
        assert_relative_eq!(a.limit, 0.75f64.cbrt(), max_relative = 1e-12);
        for w in a.rows.windows(2) {
            assert!(w[1].running_max >= w[0].running_max);
        }
        // The first 100 draws of a longer run are the n = 100 sample.
        let mut rng = stream_rng(11, 0);
        let prefix = sample_density(&d, 100, &mut rng).unwrap();
        let est = fit(&prefix).unwrap().density_at(d.t0);
        assert_eq!(a.rows[0].estimate, est);
    }

    #[test]
    fn statistic_vanishes_when_estimate_is_exact() {
        // With one observation at 2, f̂ = 1/2 on (0, 2] = f(log 2) for exp1.
        let d = ExampleDensity::new(DensityName::Exp1);
        let est = fit(&SortedSample::new(vec![2.0]).unwrap())
            .unwrap()
            .density_at(d.t0);
        assert_eq!((est - d.pdf(d.t0)) / lil_normalization(100), 0.0);
    }

    #[test]
    fn small_distribution_check_runs() {
        let d = ExampleDensity::new(DensityName::Exp1);
        let r = mixing_distribution_check(&d, 200, 50, 3, ReferenceGrid::default()).unwrap();
        assert_eq!(r.statistics.len(), 50);
        assert_eq!(r.reference.len(), 50);
        assert!(r.estimate_range.0 >= 0.0 && r.estimate_range.1 <= 1.0);
        assert_relative_eq!(r.scale, LN_2, max_relative = 1e-12);
        let again = mixing_distribution_check(&d, 200, 50, 3, ReferenceGrid::default()).unwrap();
        assert_eq!(r, again);
    }
}
