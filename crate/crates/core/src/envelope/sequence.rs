//! Geometric sequences `a_j = a + r0 * ratio^j * direction` converging to a
//! base point, used to sample the sequential limit sets of a fiber family.

use crate::error::{invalid, Result};
use crate::linalg::{axpy, norm};

use super::family::DomainBox;

#[derive(Debug, Clone, PartialEq)]
pub struct SequenceSpec {
    direction: Vec<f64>,
    r0: f64,
    ratio: f64,
    length: usize,
}

impl SequenceSpec {
    /// `direction` is normalized; `r0 > 0`, `ratio` in `(0, 1)`, `length >= 8`.
    pub fn new(direction: Vec<f64>, r0: f64, ratio: f64, length: usize) -> Result<Self> {
        let n = norm(&direction);
        if !(n > 0.0 && n.is_finite()) {
            return Err(invalid("sequence direction must be finite and nonzero"));
        }
        if !(r0 > 0.0 && r0.is_finite()) {
            return Err(invalid("sequence r0 must be positive"));
        }
        if !(ratio > 0.0 && ratio < 1.0) {
            return Err(invalid("sequence ratio must lie in (0, 1)"));
        }
        if length < 8 {
            return Err(invalid("sequence length must be at least 8"));
        }
        Ok(Self {
            direction: direction.iter().map(|v| v / n).collect(),
            r0,
            ratio,
            length,
        })
    }

    pub fn direction(&self) -> &[f64] {
        &self.direction
    }

    pub fn r0(&self) -> f64 {
        self.r0
    }

    pub fn ratio(&self) -> f64 {
        self.ratio
    }

    pub fn length(&self) -> usize {
        self.length
    }

    /// All `length` points of the sequence around `a`.
    pub fn points(&self, a: &[f64]) -> Vec<Vec<f64>> {
        (0..self.length)
            .map(|j| axpy(a, self.r0 * self.ratio.powi(j as i32), &self.direction))
            .collect()
    }

    /// Index of the first tail term; the tail is the last `ceil(length / 2)` terms.
    pub fn tail_start(&self) -> usize {
        self.length - self.length.div_ceil(2)
    }

    pub fn tail(&self, a: &[f64]) -> Vec<Vec<f64>> {
        self.points(a).split_off(self.tail_start())
    }

    /// A sequence is usable at `a` only if every term lies in the domain.
    pub fn stays_in(&self, domain: &DomainBox, a: &[f64]) -> bool {
        self.points(a).iter().all(|p| domain.contains(p))
    }
}

/// Knobs for [`default_specs`].
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceDefaults {
    pub directions: usize,
    pub length: usize,
    pub ratio: f64,
    /// Defaults to one eighth of the domain scale.
    pub r0: Option<f64>,
}

impl Default for SequenceDefaults {
    fn default() -> Self {
        Self {
            directions: 8,
            length: 48,
            ratio: 0.5,
            r0: None,
        }
    }
}

/// Deterministic spec set. In `R^1` only the two signs are available, so the
/// count is filled by cycling through shrinking starting radii; in higher
/// dimensions directions run through `+-e_i`, then `(+-e_i +- e_j)/sqrt(2)`.
pub fn default_specs(domain: &DomainBox, defaults: &SequenceDefaults) -> Result<Vec<SequenceSpec>> {
    let d = domain.dim();
    let r0 = defaults.r0.unwrap_or(domain.scale() / 8.0);
    let mut dirs: Vec<Vec<f64>> = Vec::new();
    for i in 0..d {
        for sign in [1.0, -1.0] {
            let mut e = vec![0.0; d];
            e[i] = sign;
            dirs.push(e);
        }
    }
    for i in 0..d {
        for j in (i + 1)..d {
            for (si, sj) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
                let mut e = vec![0.0; d];
                e[i] = si;
                e[j] = sj;
                dirs.push(e);
            }
        }
    }
    let count = defaults.directions.max(1);
    let radii = [1.0, 0.7, 0.45, 0.3];
    (0..count)
        .map(|k| {
            let dir = dirs[k % dirs.len()].clone();
            let shrink = radii[(k / dirs.len()) % radii.len()];
            SequenceSpec::new(dir, r0 * shrink, defaults.ratio, defaults.length)
        })
        .collect()
}
