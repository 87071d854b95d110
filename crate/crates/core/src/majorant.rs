//! Least concave majorants and greatest convex minorants of finite point sets.
//!
//! The fast path is a monotone-chain sweep over points already sorted by
//! abscissa, O(n). Collinear interior points are discarded so consecutive
//! segment slopes are strictly decreasing. For point sets built from an
//! empirical CDF the ordinates are integer counts and every orientation test
//! is exact; for real ordinates (Brownian paths) a relative tolerance of
//! [`REAL_COLLINEAR_TOL`] decides collinearity.

use std::cmp::Ordering;

use num_rational::BigRational;

use crate::error::{Error, Result};
use crate::exact::{self, orient_counts, orient_real};
use crate::sample::{Continuity, EmpiricalCdf, StepFunction};

/// Relative tolerance used by orientation tests on real-valued ordinates.
pub const REAL_COLLINEAR_TOL: f64 = 1e-12;

/// Largest point set accepted by [`brute_force_lcm`].
pub const BRUTE_FORCE_MAX_POINTS: usize = 500;

#[derive(Debug, Clone, PartialEq)]
pub enum Ordinates {
    /// `y_i = counts[i] / denominator`, compared exactly.
    Counts {
        counts: Vec<i64>,
        denominator: u64,
    },
    Real(Vec<f64>),
}

/// Points with strictly increasing abscissae.
#[derive(Debug, Clone, PartialEq)]
pub struct HullPointSet {
    xs: Vec<f64>,
    ys: Ordinates,
}

impl HullPointSet {
    pub fn from_counts(xs: Vec<f64>, counts: Vec<i64>, denominator: u64) -> Result<Self> {
        if denominator == 0 {
            return Err(Error::InvalidPointSet("zero denominator".into()));
        }
        Self::validated(
            xs,
            Ordinates::Counts {
                counts,
                denominator,
            },
        )
    }

    pub fn from_real(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if ys.iter().any(|y| !y.is_finite()) {
            return Err(Error::InvalidPointSet("non-finite ordinate".into()));
        }
        Self::validated(xs, Ordinates::Real(ys))
    }

    /// `(0, 0)` followed by `(x_j, F_n(x_j))` at every jump point.
    pub fn from_ecdf(cdf: &EmpiricalCdf) -> Self {
        let mut xs = Vec::with_capacity(cdf.jump_points().len() + 1);
        let mut counts = Vec::with_capacity(xs.capacity());
        xs.push(0.0);
        counts.push(0);
        xs.extend_from_slice(cdf.jump_points());
        counts.extend(cdf.cumulative_counts().iter().map(|&c| c as i64));
        Self {
            xs,
            ys: Ordinates::Counts {
                counts,
                denominator: cdf.n(),
            },
        }
    }

    fn validated(xs: Vec<f64>, ys: Ordinates) -> Result<Self> {
        let ny = match &ys {
            Ordinates::Counts { counts, .. } => counts.len(),
            Ordinates::Real(v) => v.len(),
        };
        if xs.len() != ny {
            return Err(Error::InvalidPointSet(format!(
                "{} abscissae but {} ordinates",
                xs.len(),
                ny
            )));
        }
        if xs.len() < 2 {
            return Err(Error::InvalidPointSet("need at least two points".into()));
        }
        if xs.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidPointSet("non-finite abscissa".into()));
        }
        if xs.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidPointSet(
                "abscissae must be strictly increasing".into(),
            ));
        }
        Ok(Self { xs, ys })
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ordinates(&self) -> &Ordinates {
        &self.ys
    }

    pub fn y(&self, i: usize) -> f64 {
        match &self.ys {
            Ordinates::Counts {
                counts,
                denominator,
            } => counts[i] as f64 / *denominator as f64,
            Ordinates::Real(v) => v[i],
        }
    }

    /// Exact ordinate; `None` for real-valued point sets.
    pub fn y_exact(&self, i: usize) -> Option<BigRational> {
        match &self.ys {
            Ordinates::Counts {
                counts,
                denominator,
            } => Some(exact::rational_int(counts[i]) / exact::rational_int(*denominator as i64)),
            Ordinates::Real(_) => None,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.ys, Ordinates::Counts { .. })
    }

    /// Orientation of point `p` relative to the directed line `a -> b`.
    pub(crate) fn orient(&self, a: usize, b: usize, p: usize) -> Ordering {
        match &self.ys {
            Ordinates::Counts { counts, .. } => orient_counts(
                (self.xs[a], counts[a]),
                (self.xs[b], counts[b]),
                (self.xs[p], counts[p]),
            ),
            Ordinates::Real(v) => orient_real(
                (self.xs[a], v[a]),
                (self.xs[b], v[b]),
                (self.xs[p], v[p]),
                REAL_COLLINEAR_TOL,
            ),
        }
    }

    /// Reflection `y -> -y`.
    pub fn reflect(&self) -> Self {
        let ys = match &self.ys {
            Ordinates::Counts {
                counts,
                denominator,
            } => Ordinates::Counts {
                counts: counts.iter().map(|c| -c).collect(),
                denominator: *denominator,
            },
            Ordinates::Real(v) => Ordinates::Real(v.iter().map(|y| -y).collect()),
        };
        Self {
            xs: self.xs.clone(),
            ys,
        }
    }

    fn subset(&self, idx: &[usize]) -> Self {
        let xs = idx.iter().map(|&i| self.xs[i]).collect();
        let ys = match &self.ys {
            Ordinates::Counts {
                counts,
                denominator,
            } => Ordinates::Counts {
                counts: idx.iter().map(|&i| counts[i]).collect(),
                denominator: *denominator,
            },
            Ordinates::Real(v) => Ordinates::Real(idx.iter().map(|&i| v[i]).collect()),
        };
        Self { xs, ys }
    }
}

/// Concave piecewise-linear function given by its knots.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinearConcave {
    knots: HullPointSet,
    indices: Vec<usize>,
    slopes: Vec<f64>,
}

impl PiecewiseLinearConcave {
    fn from_indices(pts: &HullPointSet, indices: Vec<usize>) -> Self {
        let knots = pts.subset(&indices);
        let mut hull = Self {
            knots,
            indices,
            slopes: Vec::new(),
        };
        // Correctly rounded from the exact slopes, so strict decrease survives
        // as (weak) decrease in floating point.
        hull.slopes = match hull.exact_slopes() {
            Some(exact) => exact.iter().map(exact::to_f64).collect(),
            None => hull
                .knots
                .xs
                .windows(2)
                .enumerate()
                .map(|(j, w)| segment_slope(&hull.knots, j, w))
                .collect(),
        };
        hull
    }

    /// Knots as a point set.
    pub fn knots(&self) -> &HullPointSet {
        &self.knots
    }

    pub fn knot_xs(&self) -> &[f64] {
        &self.knots.xs
    }

    pub fn knot_ys(&self) -> Vec<f64> {
        (0..self.knots.len()).map(|i| self.knots.y(i)).collect()
    }

    /// Positions of the knots in the point set the hull was built from.
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn slopes(&self) -> &[f64] {
        &self.slopes
    }

    pub fn num_segments(&self) -> usize {
        self.slopes.len()
    }

    /// Exact segment slopes for count-valued hulls.
    pub fn exact_slopes(&self) -> Option<Vec<BigRational>> {
        match &self.knots.ys {
            Ordinates::Counts {
                counts,
                denominator,
            } => Some(
                (0..self.knots.len() - 1)
                    .map(|j| {
                        exact::count_slope(
                            self.knots.xs[j],
                            counts[j],
                            self.knots.xs[j + 1],
                            counts[j + 1],
                            *denominator,
                        )
                    })
                    .collect(),
            ),
            Ordinates::Real(_) => None,
        }
    }

    /// Index `j` of the segment `(x_j, x_{j+1}]` containing `t`, if any.
    pub fn segment_left_of(&self, t: f64) -> Option<usize> {
        let xs = &self.knots.xs;
        if !(t > xs[0]) || t > xs[xs.len() - 1] {
            return None;
        }
        Some(xs.partition_point(|&x| x < t) - 1)
    }

    /// Slope of the segment ending at or passing through `t`.
    pub fn left_slope_at(&self, t: f64) -> Option<f64> {
        self.segment_left_of(t).map(|j| self.slopes[j])
    }

    /// Slope of the segment starting at or passing through `t`.
    pub fn right_slope_at(&self, t: f64) -> Option<f64> {
        let xs = &self.knots.xs;
        if !(t >= xs[0]) || !(t < xs[xs.len() - 1]) {
            return None;
        }
        Some(self.slopes[xs.partition_point(|&x| x <= t) - 1])
    }

    /// Linear interpolation between knots; constant extension outside them.
    pub fn eval(&self, t: f64) -> f64 {
        let xs = &self.knots.xs;
        let last = xs.len() - 1;
        if t <= xs[0] {
            return self.knots.y(0);
        }
        if t >= xs[last] {
            return self.knots.y(last);
        }
        let j = xs.partition_point(|&x| x <= t) - 1;
        if t == xs[j] {
            return self.knots.y(j);
        }
        self.knots.y(j) + self.slopes[j] * (t - xs[j])
    }

    /// Whether every point of `pts` lies on or below this function. Exact for
    /// count-valued point sets; real-valued sets use the collinearity tolerance.
    pub fn majorizes(&self, pts: &HullPointSet) -> bool {
        if std::mem::discriminant(&self.knots.ys) != std::mem::discriminant(&pts.ys) {
            return false;
        }
        if let (
            Ordinates::Counts { denominator: a, .. },
            Ordinates::Counts { denominator: b, .. },
        ) = (&self.knots.ys, &pts.ys)
        {
            if a != b {
                return false;
            }
        }
        let kx = &self.knots.xs;
        (0..pts.len()).all(|i| {
            let x = pts.xs[i];
            if x < kx[0] || x > kx[kx.len() - 1] {
                return false;
            }
            let j = kx.partition_point(|&k| k < x);
            if kx[j] == x {
                return match (&self.knots.ys, &pts.ys) {
                    (
                        Ordinates::Counts { counts: kc, .. },
                        Ordinates::Counts { counts: pc, .. },
                    ) => pc[i] <= kc[j],
                    (Ordinates::Real(kv), Ordinates::Real(pv)) => {
                        pv[i] <= kv[j] + REAL_COLLINEAR_TOL * kv[j].abs().max(1.0)
                    }
                    _ => false,
                };
            }
            let (a, b) = (j - 1, j);
            let ordering = match (&self.knots.ys, &pts.ys) {
                (Ordinates::Counts { counts: kc, .. }, Ordinates::Counts { counts: pc, .. }) => {
                    orient_counts((kx[a], kc[a]), (kx[b], kc[b]), (x, pc[i]))
                }
                (Ordinates::Real(kv), Ordinates::Real(pv)) => orient_real(
                    (kx[a], kv[a]),
                    (kx[b], kv[b]),
                    (x, pv[i]),
                    REAL_COLLINEAR_TOL,
                ),
                _ => return false,
            };
            ordering != Ordering::Greater
        })
    }
}

fn segment_slope(knots: &HullPointSet, j: usize, w: &[f64]) -> f64 {
    (knots.y(j + 1) - knots.y(j)) / (w[1] - w[0])
}

/// Upper concave hull by monotone chain.
pub fn least_concave_majorant(pts: &HullPointSet) -> PiecewiseLinearConcave {
    let mut stack: Vec<usize> = Vec::with_capacity(pts.len());
    for i in 0..pts.len() {
        while stack.len() >= 2
            && pts.orient(stack[stack.len() - 2], stack[stack.len() - 1], i) != Ordering::Less
        {
            stack.pop();
        }
        stack.push(i);
    }
    PiecewiseLinearConcave::from_indices(pts, stack)
}

/// Lower convex hull, represented through the majorant of the reflected set.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexMinorant {
    reflected: PiecewiseLinearConcave,
}

impl ConvexMinorant {
    pub fn knot_xs(&self) -> &[f64] {
        self.reflected.knot_xs()
    }

    pub fn knot_ys(&self) -> Vec<f64> {
        self.reflected.knot_ys().into_iter().map(|y| -y).collect()
    }

    pub fn indices(&self) -> &[usize] {
        self.reflected.indices()
    }

    /// Strictly increasing segment slopes.
    pub fn slopes(&self) -> Vec<f64> {
        self.reflected.slopes().iter().map(|s| -s).collect()
    }

    pub fn left_slope_at(&self, t: f64) -> Option<f64> {
        self.reflected.left_slope_at(t).map(|s| -s)
    }

    pub fn eval(&self, t: f64) -> f64 {
        -self.reflected.eval(t)
    }

    /// The majorant of the reflected points.
    pub fn reflected(&self) -> &PiecewiseLinearConcave {
        &self.reflected
    }
}

pub fn greatest_convex_minorant(pts: &HullPointSet) -> ConvexMinorant {
    ConvexMinorant {
        reflected: least_concave_majorant(&pts.reflect()),
    }
}

/// Left derivative of a concave majorant as a left-continuous step function,
/// zero past the last knot.
pub fn left_derivative_step(m: &PiecewiseLinearConcave) -> StepFunction {
    StepFunction::new(
        m.knot_xs()[1..].to_vec(),
        m.slopes().to_vec(),
        0.0,
        Continuity::Left,
    )
    .expect("hull knots are strictly increasing")
}

/// Gift-wrapping reference hull: from each knot, the next knot is the point
/// of maximal chord slope, farthest on ties. O(n h); testing use only.
pub fn brute_force_lcm(pts: &HullPointSet) -> Result<PiecewiseLinearConcave> {
    if pts.len() > BRUTE_FORCE_MAX_POINTS {
        return Err(Error::TooManyPoints {
            got: pts.len(),
            max: BRUTE_FORCE_MAX_POINTS,
        });
    }
    let n = pts.len();
    let mut knots = vec![0usize];
    let mut current = 0usize;
    while current + 1 < n {
        let mut best = current + 1;
        for k in current + 2..n {
            match pts.orient(current, best, k) {
                Ordering::Greater | Ordering::Equal => best = k,
                Ordering::Less => {}
            }
        }
        knots.push(best);
        current = best;
    }
    Ok(PiecewiseLinearConcave::from_indices(pts, knots))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Signed;

    fn real(pts: &[(f64, f64)]) -> HullPointSet {
        HullPointSet::from_real(
            pts.iter().map(|p| p.0).collect(),
            pts.iter().map(|p| p.1).collect(),
        )
        .unwrap()
    }

    #[test]
    fn two_points_single_segment() {
        let h = least_concave_majorant(&real(&[(0.0, 0.0), (1.0, 1.0)]));
        assert_eq!(h.slopes(), &[1.0]);
    }

    #[test]
    fn collinear_point_is_merged() {
        let h = least_concave_majorant(&real(&[(0.0, 0.0), (1.0, 0.5), (2.0, 1.0)]));
        assert_eq!(h.indices(), &[0, 2]);
        assert_eq!(h.slopes(), &[0.5]);
    }

    #[test]
    fn point_below_chord_is_dropped() {
        let h = least_concave_majorant(&real(&[(0.0, 0.0), (1.0, 0.5), (1.2, 1.0)]));
        assert_eq!(h.indices(), &[0, 2]);
        assert!((h.slopes()[0] - 5.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn convex_minorant_of_two_points() {
        let m = greatest_convex_minorant(&real(&[(0.0, 0.0), (1.0, -1.0)]));
        assert_eq!(m.slopes(), vec![-1.0]);
        assert_eq!(m.eval(0.5), -0.5);
    }

    #[test]
    fn left_derivative_of_single_segment() {
        let h = least_concave_majorant(&real(&[(0.0, 0.0), (1.0, 1.0)]));
        let f = left_derivative_step(&h);
        assert_eq!(f.breakpoints(), &[1.0]);
        assert_eq!(f.eval(0.5), 1.0);
        assert_eq!(f.eval(1.0), 1.0);
        assert_eq!(f.eval(1.5), 0.0);
    }

    #[test]
    fn left_derivative_of_sample_one_three() {
        // F_n of {1, 3}: (0,0), (1,1/2), (3,1); the middle point is above the chord.
        let pts = HullPointSet::from_counts(vec![0.0, 1.0, 3.0], vec![0, 1, 2], 2).unwrap();
        let h = least_concave_majorant(&pts);
        let f = left_derivative_step(&h);
        assert_eq!(f.levels(), &[0.5, 0.25]);
        assert_eq!(f.eval(1.0), 0.5);
        assert_eq!(f.eval(2.0), 0.25);
        assert_eq!(f.eval(3.0), 0.25);
        assert_eq!(f.eval(3.5), 0.0);
        // Interior point of a segment sees that segment's slope.
        assert_eq!(h.left_slope_at(0.3), Some(0.5));
        assert_eq!(h.left_slope_at(1.0), Some(0.5));
        assert_eq!(h.right_slope_at(1.0), Some(0.25));
        assert_eq!(h.right_slope_at(0.0), Some(0.5));
        assert_eq!(h.right_slope_at(3.0), None);
        assert_eq!(h.left_slope_at(0.0), None);
    }

    #[test]
    fn exact_slopes_strictly_decrease() {
        let pts = HullPointSet::from_counts(
            vec![0.0, 0.5, 0.7, 1.9, 2.0, 4.0],
            vec![0, 2, 3, 4, 5, 6],
            6,
        )
        .unwrap();
        let h = least_concave_majorant(&pts);
        let s = h.exact_slopes().unwrap();
        assert!(s.windows(2).all(|w| w[0] > w[1]));
        assert!(s.iter().all(|v| v.is_positive()));
        assert!(h.majorizes(&pts));
    }

    #[test]
    fn invalid_point_sets() {
        assert!(HullPointSet::from_real(vec![0.0, 0.0], vec![1.0, 2.0]).is_err());
        assert!(HullPointSet::from_real(vec![1.0, 0.0], vec![1.0, 2.0]).is_err());
        assert!(HullPointSet::from_real(vec![0.0], vec![1.0]).is_err());
        assert!(HullPointSet::from_counts(vec![0.0, 1.0], vec![0, 1], 0).is_err());
    }

    #[test]
    fn brute_force_rejects_large_sets() {
        let xs: Vec<f64> = (0..=BRUTE_FORCE_MAX_POINTS).map(|i| i as f64).collect();
        let ys = xs.clone();
        let pts = HullPointSet::from_real(xs, ys).unwrap();
        assert!(matches!(
            brute_force_lcm(&pts),
            Err(Error::TooManyPoints { .. })
        ));
    }

    #[test]
    fn brute_force_matches_on_small_sets() {
        let sets = [
            real(&[(0.0, 0.0), (1.0, 0.5), (1.2, 1.0)]),
            real(&[(0.0, 0.0), (1.0, 0.8), (2.0, 1.0)]),
            real(&[(0.0, 0.0), (1.0, 0.5), (2.0, 1.0)]),
        ];
        for s in &sets {
            assert_eq!(least_concave_majorant(s), brute_force_lcm(s).unwrap());
        }
    }
}
