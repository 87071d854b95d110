use monolil_core::chernoff::{chernoff_argmin, sample_chernoff, sample_path, SamplerMethod};
use monolil_core::rng::stream_rng;
use monolil_core::stats::{ks_distance, mean_and_se, quantiles};
use rayon::prelude::*;

#[test]
fn increments_have_variance_step() {
    let step = 0.01;
    let incs: Vec<f64> = (0..100_000u64)
        .flat_map(|i| {
            let p = sample_path(0.02, step, &mut stream_rng(5, i)).unwrap();
            let v = p.values().to_vec();
            vec![v[3] - v[2], v[2] - v[1]]
        })
        .collect();
    let var = incs.iter().map(|x| x * x).sum::<f64>() / incs.len() as f64;
    assert!(
        (var / step - 1.0).abs() < 0.02,
        "variance ratio {}",
        var / step
    );
}

#[test]
fn samplers_agree_and_are_symmetric() {
    let n = 20_000;
    let a = sample_chernoff(SamplerMethod::Argmin, n, 3.0, 0.002, 1).unwrap();
    let s = sample_chernoff(SamplerMethod::Slope, n, 3.0, 0.002, 2).unwrap();
    let ks = ks_distance(&a.draws, &s.draws);
    assert!(ks < 0.025, "ks {ks}");
    for draws in [&a.draws, &s.draws] {
        let (mean, se) = mean_and_se(draws);
        assert!(mean.abs() < 3.0 * se, "mean {mean} se {se}");
    }
}

/// Argmin draws on the wide path and on derived paths from the same stream.
fn coupled_draws(
    n: u64,
    derive: impl Fn(&monolil_core::chernoff::BrownianGridPath) -> monolil_core::chernoff::BrownianGridPath
        + Sync,
    half_width: f64,
) -> (Vec<f64>, Vec<f64>) {
    (0..n)
        .into_par_iter()
        .map(|i| {
            let p = sample_path(half_width, 0.002, &mut stream_rng(21, i)).unwrap();
            (chernoff_argmin(&p), chernoff_argmin(&derive(&p)))
        })
        .unzip()
}

#[test]
fn truncation_does_not_move_quantiles() {
    let (wide, narrow) = coupled_draws(20_000, |p| p.truncate(3.0).unwrap(), 5.0);
    let probs = [0.05, 0.5, 0.95];
    for (a, b) in quantiles(&wide, &probs)
        .iter()
        .zip(quantiles(&narrow, &probs))
    {
        assert!((a - b).abs() < 0.01, "{a} vs {b}");
    }
}

#[test]
fn grid_refinement_does_not_move_quantiles() {
    let (fine, coarse) = coupled_draws(20_000, |p| p.coarsen(2).unwrap(), 3.0);
    let probs = [0.05, 0.5, 0.95];
    for (a, b) in quantiles(&fine, &probs)
        .iter()
        .zip(quantiles(&coarse, &probs))
    {
        assert!((a - b).abs() < 0.01, "{a} vs {b}");
    }
}
