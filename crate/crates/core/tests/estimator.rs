use monolil_core::grenander::{fit, marshall_check_fit, mixing_estimate_at};
use monolil_core::harness::{sample_density, DensityName, ExampleDensity};
use monolil_core::rng::stream_rng;
use monolil_core::switching::random_sweep;

fn ks_statistic(sorted: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            ((i + 1) as f64 / n - f).max(f - i as f64 / n)
        })
        .fold(0.0, f64::max)
}

#[test]
fn marshall_inequality_for_concave_cdfs() {
    for name in DensityName::ALL {
        let d = ExampleDensity::new(name);
        for i in 0..60u64 {
            let n = [5, 50, 500][i as usize % 3];
            let s = sample_density(&d, n, &mut stream_rng(99, i)).unwrap();
            let f = fit(&s).unwrap();
            let cdf = |x: f64| d.cdf(x);
            let r = marshall_check_fit(&f, &cdf);
            assert!(r.holds(), "{name} sample {i}: {r:?}");
            // Independent closed form for the empirical side.
            let ks = ks_statistic(s.values(), cdf);
            assert!(
                (r.sup_empirical - ks).abs() < 1e-12,
                "{} vs {ks}",
                r.sup_empirical
            );
            // Dense probing never beats the reported majorant distance.
            let top = s.max() * 1.2;
            for k in 0..=4000 {
                let t = top * k as f64 / 4000.0;
                assert!((f.cdf_at(t) - d.cdf(t)).abs() <= r.sup_majorant + 1e-12);
            }
        }
    }
}

#[test]
fn mixing_estimate_is_the_inversion_of_the_fit() {
    let d = ExampleDensity::new(DensityName::Exp1);
    let s = sample_density(&d, 300, &mut stream_rng(4, 0)).unwrap();
    let f = fit(&s).unwrap();
    for k in 1..200 {
        let t = s.max() * k as f64 / 200.0;
        // Off the knots the density is locally constant, so the identity is exact.
        if f.majorant().knot_xs().contains(&t) {
            continue;
        }
        let want = f.cdf_at(t) - t * f.density_at(t);
        let got = mixing_estimate_at(&f, t);
        assert!((got - want).abs() < 1e-12, "at {t}: {got} vs {want}");
        assert!((0.0..=1.0).contains(&got));
    }
}

#[test]
fn switching_sweep_finds_no_violations() {
    let r = random_sweep(60, 40, 17);
    assert_eq!(r.samples, 60);
    assert!(r.checks > 1000);
    assert_eq!(r.violations, 0, "{:?}", r.first_counterexample);
}
