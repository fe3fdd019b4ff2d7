//! Polyhedral cones described by a finite set of dual generators.
//!
//! A [`GeneratorSet`] `C = {c_1, .., c_p}` stands for the cone
//! `K = {x : <c, x> >= 0 for every c in C}`; its positive polar is the conic
//! hull of `C`. Every quantity here is computed from `C` directly: the gauge
//! `G(x) = max_c <c, x>`, membership in `K` and in `int K`, and the orders
//! `x <= y` (`y - x` in `K`) and `x < y` (`y - x` in `int K`).
//!
//! The convex hull of the points is the compact convex set the cone is
//! generated from; a linear functional over it attains its extrema at the
//! listed points, so maxima over the list are exact.

use nalgebra::DMatrix;

use crate::error::{invalid, Error, Result};
use crate::linalg::{check_dim, check_finite, distance, dot, norm, sub};

/// Points closer than this are treated as duplicates.
pub const DEDUP_TOL: f64 = 1e-12;

/// Singular values below this (relative to the largest, floored at one) do
/// not count towards the rank of the generator matrix.
pub const RANK_TOL: f64 = 1e-10;

/// Finite dual generating set. Nonempty, finite entries, common dimension,
/// no two points within [`DEDUP_TOL`] of each other.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorSet {
    points: Vec<Vec<f64>>,
}

impl GeneratorSet {
    /// Builds a generator set, dropping near-duplicates (first occurrence wins).
    pub fn new(points: Vec<Vec<f64>>) -> Result<Self> {
        let first = points.first().ok_or(Error::Empty)?;
        let dim = first.len();
        if dim == 0 {
            return Err(invalid("generators must have at least one coordinate"));
        }
        let mut kept: Vec<Vec<f64>> = Vec::with_capacity(points.len());
        for p in points {
            check_dim(dim, &p)?;
            check_finite(&p, "generator")?;
            if kept.iter().all(|q| distance(q, &p) > DEDUP_TOL) {
                kept.push(p);
            }
        }
        Ok(Self { points: kept })
    }

    /// Same as [`GeneratorSet::new`] but also enforces `||c|| <= bound`.
    pub fn with_bound(points: Vec<Vec<f64>>, bound: f64) -> Result<Self> {
        let set = Self::new(points)?;
        set.check_bound(bound)?;
        Ok(set)
    }

    /// `max ||c|| <= bound`, with a relative slack of `1e-12` for rounding.
    pub fn check_bound(&self, bound: f64) -> Result<()> {
        let norm = self.max_norm();
        if norm > bound * (1.0 + 1e-12) {
            return Err(Error::BoundExceeded { norm, bound });
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.points[0].len()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn into_points(self) -> Vec<Vec<f64>> {
        self.points
    }

    pub fn max_norm(&self) -> f64 {
        self.points.iter().map(|p| norm(p)).fold(0.0, f64::max)
    }

    /// Support function of the generators: `max_c <c, x>`.
    pub fn gauge(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim(), x)?;
        Ok(self.points.iter().map(|c| dot(c, x)).fold(f64::NEG_INFINITY, f64::max))
    }

    /// Lower envelope of the generators: `min_c <c, x>`.
    pub fn lower_envelope(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim(), x)?;
        Ok(self.points.iter().map(|c| dot(c, x)).fold(f64::INFINITY, f64::min))
    }

    /// `x` in `K`, evaluated as `gauge(-x) <= eps_membership`.
    pub fn cone_contains(&self, x: &[f64], tol: &OrderTolerance) -> Result<bool> {
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        Ok(self.gauge(&neg)? <= tol.eps_membership)
    }

    /// `x` in `int K`: every nonzero normalized generator pairs with `x` to at
    /// least `eps_strict`.
    pub fn interior_contains(&self, x: &[f64], tol: &OrderTolerance) -> Result<bool> {
        check_dim(self.dim(), x)?;
        let mut any = false;
        for c in &self.points {
            let n = norm(c);
            if n == 0.0 {
                continue;
            }
            any = true;
            if dot(c, x) / n < tol.eps_strict {
                return Ok(false);
            }
        }
        if !any {
            return Err(Error::DegenerateOrder);
        }
        Ok(true)
    }

    /// `x <= y` in the cone order.
    pub fn leq(&self, x: &[f64], y: &[f64], tol: &OrderTolerance) -> Result<bool> {
        check_dim(self.dim(), x)?;
        check_dim(self.dim(), y)?;
        self.cone_contains(&sub(y, x), tol)
    }

    /// `x < y` in the strict (interior) order.
    pub fn lt(&self, x: &[f64], y: &[f64], tol: &OrderTolerance) -> Result<bool> {
        check_dim(self.dim(), x)?;
        check_dim(self.dim(), y)?;
        self.interior_contains(&sub(y, x), tol)
    }

    /// Numerical rank of the `p x m` generator matrix.
    pub fn rank(&self) -> usize {
        let (p, m) = (self.len(), self.dim());
        let mat = DMatrix::from_fn(p, m, |i, j| self.points[i][j]);
        let sv = mat.singular_values();
        let top = sv.iter().cloned().fold(0.0, f64::max).max(1.0);
        sv.iter().filter(|&&s| s > RANK_TOL * top).count()
    }

    /// Pointedness diagnostic: the generators span the whole value space,
    /// which makes `K` pointed.
    pub fn spans_space(&self) -> bool {
        self.rank() == self.dim()
    }
}

/// The canonical basis `{e_1, .., e_m}`, generating the nonnegative orthant.
pub fn orthant_generators(m: usize) -> Result<GeneratorSet> {
    if m == 0 {
        return Err(invalid("orthant dimension must be positive"));
    }
    let pts = (0..m)
        .map(|i| {
            let mut e = vec![0.0; m];
            e[i] = 1.0;
            e
        })
        .collect();
    GeneratorSet::new(pts)
}

/// Slack for cone membership and margin for interior membership.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrderTolerance {
    eps_membership: f64,
    eps_strict: f64,
}

impl OrderTolerance {
    pub fn new(eps_membership: f64, eps_strict: f64) -> Result<Self> {
        if !(eps_membership >= 0.0 && eps_membership < eps_strict && eps_strict.is_finite()) {
            return Err(invalid(format!(
                "order tolerance needs 0 <= eps_membership < eps_strict, got {eps_membership} and {eps_strict}"
            )));
        }
        Ok(Self {
            eps_membership,
            eps_strict,
        })
    }

    pub fn eps_membership(&self) -> f64 {
        self.eps_membership
    }

    pub fn eps_strict(&self) -> f64 {
        self.eps_strict
    }
}

impl Default for OrderTolerance {
    fn default() -> Self {
        Self {
            eps_membership: 0.0,
            eps_strict: 1e-9,
        }
    }
}
