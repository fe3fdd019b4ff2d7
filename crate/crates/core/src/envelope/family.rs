//! Parameterized fiber families `a -> J_a` over a box in `R^d`.

use crate::cone::GeneratorSet;
use crate::error::{invalid, Error, Result};
use crate::linalg::{check_dim, distance, dot, norm};
use crate::minnorm::{dist_to_hull, DEFAULT_GAP_TOL};

/// Axis-aligned parameter box, bounds inclusive.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainBox {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl DomainBox {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.is_empty() {
            return Err(invalid("domain needs at least one coordinate"));
        }
        check_dim(lower.len(), &upper)?;
        for (l, u) in lower.iter().zip(&upper) {
            if !(l.is_finite() && u.is_finite() && l <= u) {
                return Err(invalid(format!("bad domain interval [{l}, {u}]")));
            }
        }
        Ok(Self { lower, upper })
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn contains(&self, a: &[f64]) -> bool {
        a.len() == self.dim()
            && a.iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(v, (l, u))| v.is_finite() && *l <= *v && *v <= *u)
    }

    /// Longest side length.
    pub fn scale(&self) -> f64 {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(l, u)| u - l)
            .fold(0.0, f64::max)
    }
}

/// How the fiber depends on the scalar driver `t = <w, a>`.
#[derive(Debug, Clone, PartialEq)]
pub enum FiberKind {
    /// Same set everywhere.
    Constant { base: GeneratorSet },
    /// Base generators rotated by the angle `rate * t` in the plane of the
    /// first two coordinates.
    Rotation { base: GeneratorSet, rate: f64 },
    /// `below` for `t <= breakpoint`, `above` otherwise.
    Jump {
        below: GeneratorSet,
        above: GeneratorSet,
        breakpoint: f64,
    },
    /// `at_center` exactly at `t == center`, the strictly smaller hull
    /// `elsewhere` everywhere else (lower semicontinuity fails at the center).
    Pinch {
        center: f64,
        at_center: GeneratorSet,
        elsewhere: GeneratorSet,
    },
    /// `at_center` exactly at `t == center`, the strictly larger hull
    /// `elsewhere` everywhere else (upper semicontinuity fails at the center).
    Expand {
        center: f64,
        at_center: GeneratorSet,
        elsewhere: GeneratorSet,
    },
    /// Piecewise-linear interpolation of matching generator lists between
    /// increasing nodes; constant beyond the end nodes.
    Interpolation { nodes: Vec<f64>, sets: Vec<Vec<Vec<f64>>> },
    /// Nearest-entry lookup in parameter space (ties go to the earlier entry).
    Table { entries: Vec<(Vec<f64>, GeneratorSet)> },
}

/// A multifunction `a -> J_a` with a shared generator bound `B`.
#[derive(Debug, Clone, PartialEq)]
pub struct FiberFamily {
    domain: DomainBox,
    bound: f64,
    driver: Vec<f64>,
    kind: FiberKind,
}

impl FiberFamily {
    /// `driver` defaults to the first coordinate axis.
    pub fn new(kind: FiberKind, domain: DomainBox, bound: f64, driver: Option<Vec<f64>>) -> Result<Self> {
        if !(bound > 0.0 && bound.is_finite()) {
            return Err(invalid("bound must be positive and finite"));
        }
        let d = domain.dim();
        let driver = match driver {
            Some(w) => {
                check_dim(d, &w)?;
                if norm(&w) == 0.0 || w.iter().any(|v| !v.is_finite()) {
                    return Err(invalid("driver must be a finite nonzero vector"));
                }
                w
            }
            None => {
                let mut e = vec![0.0; d];
                e[0] = 1.0;
                e
            }
        };
        validate_kind(&kind, d)?;
        Ok(Self {
            domain,
            bound,
            driver,
            kind,
        })
    }

    pub fn constant(base: GeneratorSet, domain: DomainBox, bound: f64) -> Result<Self> {
        Self::new(FiberKind::Constant { base }, domain, bound, None)
    }

    pub fn domain(&self) -> &DomainBox {
        &self.domain
    }

    pub fn bound(&self) -> f64 {
        self.bound
    }

    pub fn kind(&self) -> &FiberKind {
        &self.kind
    }

    pub fn driver(&self) -> &[f64] {
        &self.driver
    }

    pub fn param_dim(&self) -> usize {
        self.domain.dim()
    }

    /// Dimension `m` of the value space.
    pub fn value_dim(&self) -> usize {
        match &self.kind {
            FiberKind::Constant { base } | FiberKind::Rotation { base, .. } => base.dim(),
            FiberKind::Jump { below, .. } => below.dim(),
            FiberKind::Pinch { at_center, .. } | FiberKind::Expand { at_center, .. } => at_center.dim(),
            FiberKind::Interpolation { sets, .. } => sets[0][0].len(),
            FiberKind::Table { entries } => entries[0].1.dim(),
        }
    }

    pub fn check_domain(&self, a: &[f64]) -> Result<()> {
        check_dim(self.param_dim(), a)?;
        if !self.domain.contains(a) {
            return Err(Error::OutOfDomain { point: a.to_vec() });
        }
        Ok(())
    }

    /// The fiber `J_a`, validated against the shared bound.
    pub fn fiber(&self, a: &[f64]) -> Result<GeneratorSet> {
        self.check_domain(a)?;
        let set = self.raw_fiber(a)?;
        set.check_bound(self.bound)?;
        Ok(set)
    }

    fn raw_fiber(&self, a: &[f64]) -> Result<GeneratorSet> {
        let t = dot(&self.driver, a);
        match &self.kind {
            FiberKind::Constant { base } => Ok(base.clone()),
            FiberKind::Rotation { base, rate } => {
                let (sin, cos) = (rate * t).sin_cos();
                let pts = base
                    .points()
                    .iter()
                    .map(|p| {
                        let mut q = p.clone();
                        q[0] = cos * p[0] - sin * p[1];
                        q[1] = sin * p[0] + cos * p[1];
                        q
                    })
                    .collect();
                GeneratorSet::new(pts)
            }
            FiberKind::Jump {
                below,
                above,
                breakpoint,
            } => Ok(if t <= *breakpoint { below.clone() } else { above.clone() }),
            FiberKind::Pinch {
                center,
                at_center,
                elsewhere,
            }
            | FiberKind::Expand {
                center,
                at_center,
                elsewhere,
            } => Ok(if t == *center {
                at_center.clone()
            } else {
                elsewhere.clone()
            }),
            FiberKind::Interpolation { nodes, sets } => {
                let last = nodes.len() - 1;
                if t <= nodes[0] {
                    return GeneratorSet::new(sets[0].clone());
                }
                if t >= nodes[last] {
                    return GeneratorSet::new(sets[last].clone());
                }
                let k = nodes.windows(2).position(|w| t <= w[1]).unwrap();
                let s = (t - nodes[k]) / (nodes[k + 1] - nodes[k]);
                let pts = sets[k]
                    .iter()
                    .zip(&sets[k + 1])
                    .map(|(p, q)| p.iter().zip(q).map(|(x, y)| (1.0 - s) * x + s * y).collect())
                    .collect();
                GeneratorSet::new(pts)
            }
            FiberKind::Table { entries } => {
                let mut best = 0;
                let mut best_d = f64::INFINITY;
                for (i, (at, _)) in entries.iter().enumerate() {
                    let d = distance(at, a);
                    if d < best_d {
                        best_d = d;
                        best = i;
                    }
                }
                Ok(entries[best].1.clone())
            }
        }
    }

    /// Lipschitz constant of `a -> J_a` in the Hausdorff metric when the
    /// family is continuous by construction; `None` for the piecewise kinds.
    pub fn param_lipschitz(&self) -> Option<f64> {
        let w = norm(&self.driver);
        match &self.kind {
            FiberKind::Constant { .. } => Some(0.0),
            FiberKind::Rotation { base, rate } => Some(rate.abs() * base.max_norm() * w),
            FiberKind::Interpolation { nodes, sets } => {
                let mut slope: f64 = 0.0;
                for k in 0..nodes.len().saturating_sub(1) {
                    let h = nodes[k + 1] - nodes[k];
                    for (p, q) in sets[k].iter().zip(&sets[k + 1]) {
                        slope = slope.max(distance(p, q) / h);
                    }
                }
                Some(slope * w)
            }
            FiberKind::Jump { .. } | FiberKind::Pinch { .. } | FiberKind::Expand { .. } | FiberKind::Table { .. } => {
                None
            }
        }
    }
}

fn validate_kind(kind: &FiberKind, d: usize) -> Result<()> {
    let same_dim = |a: &GeneratorSet, b: &GeneratorSet| {
        if a.dim() != b.dim() {
            Err(Error::DimensionMismatch {
                expected: a.dim(),
                found: b.dim(),
            })
        } else {
            Ok(())
        }
    };
    match kind {
        FiberKind::Constant { .. } => Ok(()),
        FiberKind::Rotation { base, rate } => {
            if base.dim() < 2 {
                return Err(invalid("rotation family needs a value space of dimension at least 2"));
            }
            if !rate.is_finite() {
                return Err(Error::NonFinite("rotation rate"));
            }
            Ok(())
        }
        FiberKind::Jump {
            below,
            above,
            breakpoint,
        } => {
            same_dim(below, above)?;
            if !breakpoint.is_finite() {
                return Err(Error::NonFinite("breakpoint"));
            }
            Ok(())
        }
        FiberKind::Pinch {
            at_center, elsewhere, ..
        } => {
            same_dim(at_center, elsewhere)?;
            // nearby hull must sit inside the center hull
            for p in elsewhere.points() {
                if dist_to_hull(p, at_center.points(), DEFAULT_GAP_TOL)? > 1e-9 {
                    return Err(invalid("pinch family: nearby fiber must lie inside the center fiber"));
                }
            }
            Ok(())
        }
        FiberKind::Expand {
            at_center, elsewhere, ..
        } => {
            same_dim(at_center, elsewhere)?;
            for p in at_center.points() {
                if dist_to_hull(p, elsewhere.points(), DEFAULT_GAP_TOL)? > 1e-9 {
                    return Err(invalid("expand family: center fiber must lie inside the nearby fiber"));
                }
            }
            Ok(())
        }
        FiberKind::Interpolation { nodes, sets } => {
            if nodes.is_empty() || nodes.len() != sets.len() {
                return Err(invalid("interpolation needs one generator list per node"));
            }
            if nodes.windows(2).any(|w| !(w[0] < w[1])) || nodes.iter().any(|v| !v.is_finite()) {
                return Err(invalid("interpolation nodes must be finite and strictly increasing"));
            }
            let count = sets[0].len();
            let dim = sets[0].first().map_or(0, Vec::len);
            if count == 0 || dim == 0 {
                return Err(Error::Empty);
            }
            for s in sets {
                if s.len() != count {
                    return Err(invalid("interpolation generator lists must have equal length"));
                }
                for p in s {
                    check_dim(dim, p)?;
                }
                GeneratorSet::new(s.clone())?;
            }
            Ok(())
        }
        FiberKind::Table { entries } => {
            let first = entries.first().ok_or(Error::Empty)?;
            for (at, set) in entries {
                check_dim(d, at)?;
                same_dim(&first.1, set)?;
            }
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cone::orthant_generators;

    fn line(l: f64, u: f64) -> DomainBox {
        DomainBox::new(vec![l], vec![u]).unwrap()
    }

    fn set(pts: &[[f64; 2]]) -> GeneratorSet {
        GeneratorSet::new(pts.iter().map(|p| p.to_vec()).collect()).unwrap()
    }

    #[test]
    fn constant_family_returns_base() {
        let f = FiberFamily::constant(orthant_generators(2).unwrap(), line(-1.0, 1.0), 1.0).unwrap();
        assert_eq!(f.fiber(&[0.3]).unwrap(), orthant_generators(2).unwrap());
        assert!(matches!(f.fiber(&[2.0]), Err(Error::OutOfDomain { .. })));
        assert!(f.fiber(&[0.0, 0.0]).is_err());
    }

    #[test]
    fn rotation_matches_rotation_matrix() {
        let omega = 0.7;
        let f = FiberFamily::new(
            FiberKind::Rotation {
                base: orthant_generators(2).unwrap(),
                rate: omega,
            },
            line(-2.0, 2.0),
            1.0 + 1e-12,
            None,
        )
        .unwrap();
        let a = 1.3;
        let th = omega * a;
        let fib = f.fiber(&[a]).unwrap();
        let e1 = [th.cos(), th.sin()];
        let e2 = [-th.sin(), th.cos()];
        assert!(distance(&fib.points()[0], &e1) < 1e-15);
        assert!(distance(&fib.points()[1], &e2) < 1e-15);
    }

    #[test]
    fn jump_splits_at_breakpoint() {
        let c0 = set(&[[1.0, 0.0], [0.0, 1.0]]);
        let c1 = set(&[[2.0, 0.0], [0.0, 1.0]]);
        let f = FiberFamily::new(
            FiberKind::Jump {
                below: c0.clone(),
                above: c1.clone(),
                breakpoint: 0.0,
            },
            line(-1.0, 1.0),
            2.0,
            None,
        )
        .unwrap();
        assert_eq!(f.fiber(&[0.0]).unwrap(), c0);
        assert_eq!(f.fiber(&[-1e-300]).unwrap(), c0);
        assert_eq!(f.fiber(&[1e-300]).unwrap(), c1);
    }

    #[test]
    fn pinch_and_expand_are_checked() {
        let small = set(&[[1.0, 0.0], [0.0, 1.0]]);
        let big = set(&[[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]]);
        let ok = FiberKind::Pinch {
            center: 0.0,
            at_center: big.clone(),
            elsewhere: small.clone(),
        };
        assert!(FiberFamily::new(ok, line(-1.0, 1.0), 2.0, None).is_ok());
        let wrong = FiberKind::Pinch {
            center: 0.0,
            at_center: small.clone(),
            elsewhere: big.clone(),
        };
        assert!(FiberFamily::new(wrong, line(-1.0, 1.0), 2.0, None).is_err());
        let expand = FiberKind::Expand {
            center: 0.0,
            at_center: small,
            elsewhere: big,
        };
        let f = FiberFamily::new(expand, line(-1.0, 1.0), 2.0, None).unwrap();
        assert_eq!(f.fiber(&[0.0]).unwrap().len(), 2);
        assert_eq!(f.fiber(&[0.1]).unwrap().len(), 3);
    }

    #[test]
    fn interpolation_and_bound_violation() {
        // generator a * e1 on a wide domain with a small declared bound
        let f = FiberFamily::new(
            FiberKind::Interpolation {
                nodes: vec![-10.0, 10.0],
                sets: vec![vec![vec![-10.0, 0.0]], vec![vec![10.0, 0.0]]],
            },
            line(-10.0, 10.0),
            3.0,
            None,
        )
        .unwrap();
        assert_eq!(f.fiber(&[2.5]).unwrap().points()[0], vec![2.5, 0.0]);
        assert!(matches!(f.fiber(&[5.0]), Err(Error::BoundExceeded { .. })));
        assert_eq!(f.param_lipschitz(), Some(1.0));
    }

    #[test]
    fn table_uses_nearest_entry() {
        let f = FiberFamily::new(
            FiberKind::Table {
                entries: vec![
                    (vec![0.0, 0.0], orthant_generators(2).unwrap()),
                    (vec![1.0, 1.0], set(&[[1.0, 1.0]])),
                ],
            },
            DomainBox::new(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap(),
            2.0,
            None,
        )
        .unwrap();
        assert_eq!(f.fiber(&[0.2, 0.1]).unwrap().len(), 2);
        assert_eq!(f.fiber(&[0.9, 0.6]).unwrap().len(), 1);
    }

    #[test]
    fn driver_projects_parameters() {
        let c0 = set(&[[1.0, 0.0], [0.0, 1.0]]);
        let c1 = set(&[[2.0, 0.0], [0.0, 1.0]]);
        let f = FiberFamily::new(
            FiberKind::Jump {
                below: c0,
                above: c1,
                breakpoint: 0.0,
            },
            DomainBox::new(vec![-1.0, -1.0], vec![1.0, 1.0]).unwrap(),
            2.0,
            Some(vec![0.0, 1.0]),
        )
        .unwrap();
        assert_eq!(f.fiber(&[0.9, -0.1]).unwrap().max_norm(), 1.0);
        assert_eq!(f.fiber(&[-0.9, 0.1]).unwrap().max_norm(), 2.0);
    }
}
