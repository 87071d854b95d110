//! Small sample summaries used by the Monte Carlo checks.

/// Probabilities reported in quantile tables.
pub const REPORT_PROBS: [f64; 5] = [0.05, 0.25, 0.5, 0.75, 0.95];

fn sorted_copy(xs: &[f64]) -> Vec<f64> {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// Two-sample Kolmogorov–Smirnov distance `sup_x |F_a(x) - F_b(x)|`.
pub fn ks_distance(a: &[f64], b: &[f64]) -> f64 {
    if a.is_empty() || b.is_empty() {
        return f64::NAN;
    }
    let a = sorted_copy(a);
    let b = sorted_copy(b);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Linearly interpolated quantile of sorted data (R's type 7).
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let h = (sorted.len() - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn quantiles(xs: &[f64], probs: &[f64]) -> Vec<f64> {
    let s = sorted_copy(xs);
    probs.iter().map(|&p| quantile_sorted(&s, p)).collect()
}

/// Mean and its standard error.
pub fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantileRow {
    pub prob: f64,
    pub observed: f64,
    pub reference: f64,
}

pub fn quantile_table(observed: &[f64], reference: &[f64]) -> Vec<QuantileRow> {
    let o = quantiles(observed, &REPORT_PROBS);
    let r = quantiles(reference, &REPORT_PROBS);
    REPORT_PROBS
        .iter()
        .zip(o.into_iter().zip(r))
        .map(|(&prob, (observed, reference))| QuantileRow {
            prob,
            observed,
            reference,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_ks(a: &[f64], b: &[f64]) -> f64 {
        let ecdf =
            |s: &[f64], x: f64| s.iter().filter(|v| **v <= x).count() as f64 / s.len() as f64;
        a.iter()
            .chain(b)
            .map(|&x| (ecdf(a, x) - ecdf(b, x)).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn ks_simple_cases() {
        assert_eq!(ks_distance(&[1.0, 2.0], &[1.0, 2.0]), 0.0);
        assert_eq!(ks_distance(&[1.0, 2.0], &[3.0, 4.0]), 1.0);
        assert_eq!(ks_distance(&[1.0, 3.0], &[2.0]), 0.5);
    }

    #[test]
    fn ks_matches_brute_force_with_ties() {
        let a = [0.5, 1.0, 1.0, 2.0, 2.5, 3.0];
        let b = [1.0, 1.0, 1.5, 3.0];
        assert!((ks_distance(&a, &b) - brute_ks(&a, &b)).abs() < 1e-15);
    }

    #[test]
    fn quantiles_interpolate() {
        let s = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(quantile_sorted(&s, 0.5), 3.0);
        assert_eq!(quantile_sorted(&s, 0.0), 1.0);
        assert_eq!(quantile_sorted(&s, 1.0), 5.0);
        assert_eq!(quantile_sorted(&s, 0.125), 1.5);
        assert_eq!(quantiles(&[3.0, 1.0, 2.0], &[0.5]), vec![2.0]);
    }

    #[test]
    fn mean_and_standard_error() {
        let (m, se) = mean_and_se(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((se - (5.0f64 / 12.0).sqrt()).abs() < 1e-15);
    }
}
