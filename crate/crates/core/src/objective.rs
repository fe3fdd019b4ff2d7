//! Smooth vector objectives `F_s : R^n -> R^m` indexed by a parameter `s in R^q`.
//!
//! Every kind has a closed-form Jacobian, and every coefficient depends
//! continuously (affinely or piecewise linearly) on `s`.

use serde::{Deserialize, Serialize};

use crate::envelope::DomainBox;
use crate::error::{invalid, Error, Result};
use crate::linalg::{check_dim, check_finite, dot, sq_norm, sub};

/// `0.5 (x - c(s))^T H (x - c(s)) + offset` with `c(s) = center + sum_k s_k center_drift[k]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadraticComponent {
    pub hessian: Vec<Vec<f64>>,
    pub center: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub center_drift: Vec<Vec<f64>>,
    #[serde(default)]
    pub offset: f64,
}

/// `amplitude * sin(<frequency, x> + phase + <phase_drift, s>) + 0.5 ridge |x|^2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrigComponent {
    pub amplitude: f64,
    pub frequency: Vec<f64>,
    #[serde(default)]
    pub phase: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub phase_drift: Vec<f64>,
    #[serde(default)]
    pub ridge: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ObjectiveKind {
    /// `(A + sum_k s_k drift[k]) x + offset`.
    Affine {
        matrix: Vec<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        offset: Vec<f64>,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        drift: Vec<Vec<Vec<f64>>>,
    },
    QuadraticVector {
        components: Vec<QuadraticComponent>,
    },
    TrigVector {
        components: Vec<TrigComponent>,
    },
    /// Quadratics tabulated at `nodes` of `s[0]`; hessians, centers and
    /// offsets are interpolated linearly between nodes and clamped outside.
    TableOfQuadratics {
        nodes: Vec<f64>,
        tables: Vec<Vec<QuadraticComponent>>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObjectiveFamily {
    n: usize,
    m: usize,
    q: usize,
    kind: ObjectiveKind,
    param_domain: Option<DomainBox>,
}

fn check_matrix(rows: &[Vec<f64>], r: usize, c: usize, what: &'static str) -> Result<()> {
    if rows.len() != r {
        return Err(Error::DimensionMismatch {
            expected: r,
            found: rows.len(),
        });
    }
    for row in rows {
        check_dim(c, row)?;
        check_finite(row, what)?;
    }
    Ok(())
}

fn check_quadratic(qc: &QuadraticComponent, n: usize, q: usize, allow_drift: bool) -> Result<()> {
    check_matrix(&qc.hessian, n, n, "hessian")?;
    check_dim(n, &qc.center)?;
    check_finite(&qc.center, "center")?;
    if !qc.offset.is_finite() {
        return Err(Error::NonFinite("offset"));
    }
    if !qc.center_drift.is_empty() {
        if !allow_drift {
            return Err(invalid("tabulated quadratics take no center_drift"));
        }
        check_matrix(&qc.center_drift, q, n, "center_drift")?;
    }
    Ok(())
}

impl ObjectiveFamily {
    pub fn new(n: usize, m: usize, q: usize, kind: ObjectiveKind) -> Result<Self> {
        if n == 0 || m == 0 {
            return Err(invalid("objective dimensions n and m must be positive"));
        }
        match &kind {
            ObjectiveKind::Affine { matrix, offset, drift } => {
                check_matrix(matrix, m, n, "matrix")?;
                if !offset.is_empty() {
                    check_dim(m, offset)?;
                    check_finite(offset, "offset")?;
                }
                if !drift.is_empty() {
                    if drift.len() != q {
                        return Err(Error::DimensionMismatch {
                            expected: q,
                            found: drift.len(),
                        });
                    }
                    for d in drift {
                        check_matrix(d, m, n, "drift")?;
                    }
                }
            }
            ObjectiveKind::QuadraticVector { components } => {
                if components.len() != m {
                    return Err(Error::DimensionMismatch {
                        expected: m,
                        found: components.len(),
                    });
                }
                for c in components {
                    check_quadratic(c, n, q, true)?;
                }
            }
            ObjectiveKind::TrigVector { components } => {
                if components.len() != m {
                    return Err(Error::DimensionMismatch {
                        expected: m,
                        found: components.len(),
                    });
                }
                for c in components {
                    check_dim(n, &c.frequency)?;
                    check_finite(&c.frequency, "frequency")?;
                    if !c.phase_drift.is_empty() {
                        check_dim(q, &c.phase_drift)?;
                        check_finite(&c.phase_drift, "phase_drift")?;
                    }
                    if !(c.amplitude.is_finite() && c.phase.is_finite() && c.ridge.is_finite()) {
                        return Err(Error::NonFinite("trig coefficients"));
                    }
                }
            }
            ObjectiveKind::TableOfQuadratics { nodes, tables } => {
                if q == 0 {
                    return Err(invalid("tabulated quadratics need a parameter (q >= 1)"));
                }
                if nodes.is_empty() || nodes.len() != tables.len() {
                    return Err(invalid("nodes and tables must be nonempty and of equal length"));
                }
                check_finite(nodes, "nodes")?;
                if nodes.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(invalid("nodes must be strictly increasing"));
                }
                for t in tables {
                    if t.len() != m {
                        return Err(Error::DimensionMismatch {
                            expected: m,
                            found: t.len(),
                        });
                    }
                    for c in t {
                        check_quadratic(c, n, q, false)?;
                    }
                }
            }
        }
        Ok(Self {
            n,
            m,
            q,
            kind,
            param_domain: None,
        })
    }

    /// Restricts admissible parameters `s` to a box.
    pub fn with_param_domain(mut self, domain: DomainBox) -> Result<Self> {
        if domain.dim() != self.q {
            return Err(Error::DimensionMismatch {
                expected: self.q,
                found: domain.dim(),
            });
        }
        self.param_domain = Some(domain);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn kind(&self) -> &ObjectiveKind {
        &self.kind
    }

    pub fn param_domain(&self) -> Option<&DomainBox> {
        self.param_domain.as_ref()
    }

    pub fn admits(&self, s: &[f64]) -> bool {
        s.len() == self.q && self.param_domain.as_ref().is_none_or(|d| d.contains(s))
    }

    fn check_args(&self, s: &[f64], alpha: &[f64]) -> Result<()> {
        check_dim(self.n, alpha)?;
        check_finite(alpha, "alpha")?;
        check_dim(self.q, s)?;
        check_finite(s, "s")?;
        if let Some(d) = &self.param_domain {
            if !d.contains(s) {
                return Err(Error::OutOfDomain { point: s.to_vec() });
            }
        }
        Ok(())
    }

    pub fn value(&self, s: &[f64], alpha: &[f64]) -> Result<Vec<f64>> {
        self.check_args(s, alpha)?;
        let out: Vec<f64> = match &self.kind {
            ObjectiveKind::Affine { .. } => {
                let (mat, off) = self.affine_at(s);
                mat.iter().zip(&off).map(|(row, b)| dot(row, alpha) + b).collect()
            }
            ObjectiveKind::QuadraticVector { components } => {
                components.iter().map(|c| quad_value(&quad_at(c, s), alpha)).collect()
            }
            ObjectiveKind::TrigVector { components } => components
                .iter()
                .map(|c| c.amplitude * trig_arg(c, s, alpha).sin() + 0.5 * c.ridge * sq_norm(alpha))
                .collect(),
            ObjectiveKind::TableOfQuadratics { nodes, tables } => table_at(nodes, tables, s[0])
                .iter()
                .map(|c| quad_value(c, alpha))
                .collect(),
        };
        check_finite(&out, "objective value")?;
        Ok(out)
    }

    /// `DF_s(alpha)` as `m` rows of length `n`.
    pub fn jacobian(&self, s: &[f64], alpha: &[f64]) -> Result<Vec<Vec<f64>>> {
        self.check_args(s, alpha)?;
        let jac: Vec<Vec<f64>> = match &self.kind {
            ObjectiveKind::Affine { .. } => self.affine_at(s).0,
            ObjectiveKind::QuadraticVector { components } => {
                components.iter().map(|c| quad_grad(&quad_at(c, s), alpha)).collect()
            }
            ObjectiveKind::TrigVector { components } => components
                .iter()
                .map(|c| {
                    let k = c.amplitude * trig_arg(c, s, alpha).cos();
                    c.frequency
                        .iter()
                        .zip(alpha)
                        .map(|(w, x)| k * w + c.ridge * x)
                        .collect()
                })
                .collect(),
            ObjectiveKind::TableOfQuadratics { nodes, tables } => table_at(nodes, tables, s[0])
                .iter()
                .map(|c| quad_grad(c, alpha))
                .collect(),
        };
        for row in &jac {
            check_finite(row, "jacobian")?;
        }
        Ok(jac)
    }

    fn affine_at(&self, s: &[f64]) -> (Vec<Vec<f64>>, Vec<f64>) {
        let ObjectiveKind::Affine { matrix, offset, drift } = &self.kind else {
            unreachable!("affine_at on a non-affine objective")
        };
        let mut mat = matrix.clone();
        for (sk, dk) in s.iter().zip(drift) {
            for (row, drow) in mat.iter_mut().zip(dk) {
                for (v, d) in row.iter_mut().zip(drow) {
                    *v += sk * d;
                }
            }
        }
        let off = if offset.is_empty() {
            vec![0.0; self.m]
        } else {
            offset.clone()
        };
        (mat, off)
    }
}

fn quad_at(c: &QuadraticComponent, s: &[f64]) -> QuadraticComponent {
    let mut center = c.center.clone();
    for (sk, drift) in s.iter().zip(&c.center_drift) {
        for (v, d) in center.iter_mut().zip(drift) {
            *v += sk * d;
        }
    }
    QuadraticComponent {
        hessian: c.hessian.clone(),
        center,
        center_drift: vec![],
        offset: c.offset,
    }
}

fn quad_value(c: &QuadraticComponent, alpha: &[f64]) -> f64 {
    let r = sub(alpha, &c.center);
    let hr: Vec<f64> = c.hessian.iter().map(|row| dot(row, &r)).collect();
    0.5 * dot(&r, &hr) + c.offset
}

/// Gradient of the quadratic form; uses the symmetric part of the hessian.
fn quad_grad(c: &QuadraticComponent, alpha: &[f64]) -> Vec<f64> {
    let r = sub(alpha, &c.center);
    let n = r.len();
    (0..n)
        .map(|i| 0.5 * (0..n).map(|j| (c.hessian[i][j] + c.hessian[j][i]) * r[j]).sum::<f64>())
        .collect()
}

fn trig_arg(c: &TrigComponent, s: &[f64], alpha: &[f64]) -> f64 {
    let drift = if c.phase_drift.is_empty() {
        0.0
    } else {
        dot(&c.phase_drift, s)
    };
    dot(&c.frequency, alpha) + c.phase + drift
}

fn lerp(a: &[f64], b: &[f64], w: f64) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| (1.0 - w) * x + w * y).collect()
}

fn table_at(nodes: &[f64], tables: &[Vec<QuadraticComponent>], t: f64) -> Vec<QuadraticComponent> {
    let last = nodes.len() - 1;
    if t <= nodes[0] {
        return tables[0].clone();
    }
    if t >= nodes[last] {
        return tables[last].clone();
    }
    let k = nodes.windows(2).position(|w| t <= w[1]).unwrap_or(last - 1);
    let w = (t - nodes[k]) / (nodes[k + 1] - nodes[k]);
    tables[k]
        .iter()
        .zip(&tables[k + 1])
        .map(|(lo, hi)| QuadraticComponent {
            hessian: lo.hessian.iter().zip(&hi.hessian).map(|(a, b)| lerp(a, b, w)).collect(),
            center: lerp(&lo.center, &hi.center, w),
            center_drift: vec![],
            offset: (1.0 - w) * lo.offset + w * hi.offset,
        })
        .collect()
}

/// Central finite-difference Jacobian with step `h`.
pub fn fd_jacobian(obj: &ObjectiveFamily, s: &[f64], alpha: &[f64], h: f64) -> Result<Vec<Vec<f64>>> {
    let mut jac = vec![vec![0.0; obj.n()]; obj.m()];
    for j in 0..obj.n() {
        let mut plus = alpha.to_vec();
        let mut minus = alpha.to_vec();
        plus[j] += h;
        minus[j] -= h;
        let fp = obj.value(s, &plus)?;
        let fm = obj.value(s, &minus)?;
        for i in 0..obj.m() {
            jac[i][j] = (fp[i] - fm[i]) / (2.0 * h);
        }
    }
    Ok(jac)
}

/// `J v`.
pub fn apply(jac: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    jac.iter().map(|row| dot(row, v)).collect()
}

/// `J^T c`.
pub fn pullback(jac: &[Vec<f64>], c: &[f64]) -> Vec<f64> {
    let n = jac.first().map_or(0, Vec::len);
    let mut g = vec![0.0; n];
    for (row, ci) in jac.iter().zip(c) {
        for (gj, r) in g.iter_mut().zip(row) {
            *gj += ci * r;
        }
    }
    g
}

/// `0.5 |x|^2` on `R^n`, a scalar objective.
pub fn half_sq_norm(n: usize) -> ObjectiveFamily {
    let hessian = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    ObjectiveFamily::new(
        n,
        1,
        0,
        ObjectiveKind::QuadraticVector {
            components: vec![QuadraticComponent {
                hessian,
                center: vec![0.0; n],
                center_drift: vec![],
                offset: 0.0,
            }],
        },
    )
    .expect("identity quadratic is valid")
}

/// `(0.5 |x|^2, 0.5 |x - (2, 0)|^2)` on `R^2`.
pub fn biobjective_quadratics() -> ObjectiveFamily {
    let id = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
    let comp = |c: [f64; 2]| QuadraticComponent {
        hessian: id.clone(),
        center: c.to_vec(),
        center_drift: vec![],
        offset: 0.0,
    };
    ObjectiveFamily::new(
        2,
        2,
        0,
        ObjectiveKind::QuadraticVector {
            components: vec![comp([0.0, 0.0]), comp([2.0, 0.0])],
        },
    )
    .expect("bi-objective quadratics are valid")
}
