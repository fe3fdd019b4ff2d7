//! Steepest descent with respect to the cone order of a fiber.
//!
//! At `alpha` the generators `c_i` of `J_a` are pulled back to
//! `g_i = DF_s(alpha)^T c_i`. The direction solving
//! `min_nu max_i <g_i, nu> + 0.5 |nu|^2` is the negated minimum-norm point of
//! `conv{g_i}`, and the optimal value is `-0.5 |nu|^2`.

use log::debug;
use serde::Serialize;

use crate::cone::{GeneratorSet, OrderTolerance};
use crate::envelope::FiberFamily;
use crate::error::{invalid, Error, Result};
use crate::linalg::{axpy, check_dim, check_finite, distance, norm, sq_norm, sub};
use crate::minnorm::{min_norm_point, MinNormResult, SimplexWeights, DEFAULT_GAP_TOL};
use crate::objective::{apply, pullback, ObjectiveFamily};

pub const DEFAULT_CRIT_TOL: f64 = 1e-8;

/// Minimum-norm point whose certificate gap is also small relative to the
/// result: an absolute gap cannot tell a short direction from noise, so the
/// solve is repeated with gap `1e-3 |x|^2` (floored at `1e-15 max |g|^2`).
/// Points shorter than `1e-10 max |g|` are already zero at working precision
/// and are not refined; a refinement that fails to converge is discarded.
fn resolved_min_norm(g: &[Vec<f64>], gap_tol: f64) -> Result<MinNormResult> {
    let scale = g.iter().map(|v| sq_norm(v)).fold(0.0, f64::max);
    let floor = (1e-15 * scale).max(f64::MIN_POSITIVE);
    let negligible = 1e-20 * scale;
    let mut gap = gap_tol;
    let mut r = min_norm_point(g, gap)?;
    while r.converged && r.sq_norm > negligible && 1e-3 * r.sq_norm < gap && gap > floor {
        gap = (1e-3 * r.sq_norm).max(floor);
        let next = min_norm_point(g, gap)?;
        if !next.converged {
            debug!("refined min-norm solve at gap {gap:e} did not converge; keeping gap {gap_tol:e} result");
            break;
        }
        r = next;
    }
    Ok(r)
}

/// A fiber family, an objective family, and the parameters `(a, s)` fixing
/// one cone and one objective.
#[derive(Debug, Clone, Copy)]
pub struct DescentProblem<'a> {
    family: &'a FiberFamily,
    objective: &'a ObjectiveFamily,
    a: &'a [f64],
    s: &'a [f64],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DescentResult {
    pub nu: Vec<f64>,
    pub m_value: f64,
    pub weights: SimplexWeights,
    pub critical: bool,
    pub subproblem: MinNormResult,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LineSearchParams {
    pub sigma: f64,
    pub beta: f64,
    pub t0: f64,
    pub max_backtracks: usize,
}

impl Default for LineSearchParams {
    fn default() -> Self {
        Self {
            sigma: 0.1,
            beta: 0.5,
            t0: 1.0,
            max_backtracks: 60,
        }
    }
}

impl LineSearchParams {
    pub fn validate(&self) -> Result<()> {
        let open_unit = |v: f64| v > 0.0 && v < 1.0;
        if !open_unit(self.sigma) || !open_unit(self.beta) {
            return Err(invalid("sigma and beta must lie in (0, 1)"));
        }
        if !(self.t0 > 0.0 && self.t0.is_finite()) {
            return Err(invalid("t0 must be positive and finite"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepOutcome {
    pub t: f64,
    pub accepted: bool,
    pub backtracks: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Critical,
    MaxIter,
    LineSearchFailed,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRow {
    pub iter: usize,
    pub alpha: Vec<f64>,
    pub nu: Vec<f64>,
    pub m: f64,
    /// Step taken from this iterate; 0 on the last row.
    pub t: f64,
    /// `F(alpha_{k+1}) < F(alpha_k)` in the strict cone order; false on the last row.
    pub strict_decrease: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationTrace {
    pub rows: Vec<TraceRow>,
    pub status: SolveStatus,
    pub iterations: usize,
}

impl IterationTrace {
    pub fn last(&self) -> &TraceRow {
        self.rows.last().expect("a trace always has a final row")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContinuityRow {
    pub delta: f64,
    pub max_dnu: f64,
    pub max_dm: f64,
    pub evaluated: usize,
    pub skipped: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContinuityTable {
    pub rows: Vec<ContinuityRow>,
    /// Least-squares slope of `max_dnu` against `delta` through the origin.
    pub fitted_slope: Option<f64>,
}

impl ContinuityTable {
    /// `max_dnu` is nonincreasing along the (decreasing) radii.
    pub fn is_monotone(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].max_dnu <= w[0].max_dnu)
    }
}

impl<'a> DescentProblem<'a> {
    pub fn new(family: &'a FiberFamily, objective: &'a ObjectiveFamily, a: &'a [f64], s: &'a [f64]) -> Result<Self> {
        if family.value_dim() != objective.m() {
            return Err(Error::DimensionMismatch {
                expected: objective.m(),
                found: family.value_dim(),
            });
        }
        family.check_domain(a)?;
        check_dim(objective.q(), s)?;
        if !objective.admits(s) {
            return Err(Error::OutOfDomain { point: s.to_vec() });
        }
        Ok(Self {
            family,
            objective,
            a,
            s,
        })
    }

    pub fn family(&self) -> &'a FiberFamily {
        self.family
    }

    pub fn objective(&self) -> &'a ObjectiveFamily {
        self.objective
    }

    pub fn a(&self) -> &'a [f64] {
        self.a
    }

    pub fn s(&self) -> &'a [f64] {
        self.s
    }

    pub fn fiber(&self) -> Result<GeneratorSet> {
        self.family.fiber(self.a)
    }

    /// `g_i = DF_s(alpha)^T c_i` for every generator of the fiber.
    pub fn pullbacks(&self, alpha: &[f64]) -> Result<Vec<Vec<f64>>> {
        let jac = self.objective.jacobian(self.s, alpha)?;
        Ok(self.fiber()?.points().iter().map(|c| pullback(&jac, c)).collect())
    }

    /// `f_alpha(nu) = G(a, DF_s(alpha) nu)`.
    pub fn f_alpha(&self, alpha: &[f64], nu: &[f64]) -> Result<f64> {
        check_dim(self.objective.n(), nu)?;
        let jac = self.objective.jacobian(self.s, alpha)?;
        self.fiber()?.gauge(&apply(&jac, nu))
    }

    pub fn steepest_descent_direction(&self, alpha: &[f64], gap_tol: f64, crit_tol: f64) -> Result<DescentResult> {
        let g = self.pullbacks(alpha)?;
        let sub = resolved_min_norm(&g, gap_tol)?;
        if !sub.converged {
            debug!("min-norm subproblem did not certify at alpha = {alpha:?}");
        }
        let nu: Vec<f64> = sub.point.iter().map(|v| -v).collect();
        let nn = norm(&nu);
        Ok(DescentResult {
            m_value: -0.5 * nn * nn,
            critical: nn <= crit_tol,
            weights: sub.weights.clone(),
            nu,
            subproblem: sub,
        })
    }

    pub fn is_critical(&self, alpha: &[f64], crit_tol: f64) -> Result<bool> {
        Ok(self
            .steepest_descent_direction(alpha, DEFAULT_GAP_TOL, crit_tol)?
            .critical)
    }

    /// Backtracking until the residual `F(alpha + t nu) - F(alpha) - sigma t DF nu`
    /// has nonpositive gauge.
    pub fn armijo_step(&self, alpha: &[f64], nu: &[f64], params: &LineSearchParams) -> Result<StepOutcome> {
        params.validate()?;
        check_dim(self.objective.n(), nu)?;
        let fiber = self.fiber()?;
        let f0 = self.objective.value(self.s, alpha)?;
        let lin = apply(&self.objective.jacobian(self.s, alpha)?, nu);
        let mut t = params.t0;
        for k in 0..=params.max_backtracks {
            let f1 = self.objective.value(self.s, &axpy(alpha, t, nu))?;
            let residual: Vec<f64> = f1
                .iter()
                .zip(&f0)
                .zip(&lin)
                .map(|((x1, x0), l)| x1 - x0 - params.sigma * t * l)
                .collect();
            check_finite(&residual, "line-search residual")?;
            if fiber.gauge(&residual)? <= 0.0 {
                return Ok(StepOutcome {
                    t,
                    accepted: true,
                    backtracks: k,
                });
            }
            t *= params.beta;
        }
        Ok(StepOutcome {
            t: 0.0,
            accepted: false,
            backtracks: params.max_backtracks,
        })
    }

    pub fn solve(
        &self,
        alpha0: &[f64],
        params: &LineSearchParams,
        crit_tol: f64,
        gap_tol: f64,
        max_iter: usize,
    ) -> Result<IterationTrace> {
        check_dim(self.objective.n(), alpha0)?;
        check_finite(alpha0, "alpha0")?;
        params.validate()?;
        let fiber = self.fiber()?;
        let order = OrderTolerance::default();
        let mut alpha = alpha0.to_vec();
        let mut rows = Vec::new();
        let mut iter = 0;
        let status = loop {
            let dir = self.steepest_descent_direction(&alpha, gap_tol, crit_tol)?;
            let mut row = TraceRow {
                iter,
                alpha: alpha.clone(),
                nu: dir.nu.clone(),
                m: dir.m_value,
                t: 0.0,
                strict_decrease: false,
            };
            if dir.critical {
                rows.push(row);
                break SolveStatus::Critical;
            }
            if iter == max_iter {
                rows.push(row);
                break SolveStatus::MaxIter;
            }
            let step = self.armijo_step(&alpha, &dir.nu, params)?;
            if !step.accepted {
                debug!("line search failed at iteration {iter}");
                rows.push(row);
                break SolveStatus::LineSearchFailed;
            }
            let next = axpy(&alpha, step.t, &dir.nu);
            let f0 = self.objective.value(self.s, &alpha)?;
            let f1 = self.objective.value(self.s, &next)?;
            row.t = step.t;
            row.strict_decrease = fiber.lt(&f1, &f0, &order).unwrap_or(false);
            rows.push(row);
            alpha = next;
            iter += 1;
        };
        Ok(IterationTrace {
            rows,
            status,
            iterations: iter,
        })
    }

    /// Signed coordinate perturbations of `(a, s, alpha)` at each radius;
    /// perturbed points outside the parameter domains are skipped.
    pub fn continuity_probe(&self, alpha: &[f64], radii: &[f64], gap_tol: f64) -> Result<ContinuityTable> {
        if radii.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
            return Err(invalid("radii must be finite and nonnegative"));
        }
        if radii.windows(2).any(|w| w[1] > w[0]) {
            return Err(invalid("radii must be nonincreasing"));
        }
        let base = self.steepest_descent_direction(alpha, gap_tol, 0.0)?;
        let (d, q, n) = (self.a.len(), self.s.len(), alpha.len());
        let mut rows = Vec::with_capacity(radii.len());
        for &delta in radii {
            let mut row = ContinuityRow {
                delta,
                max_dnu: 0.0,
                max_dm: 0.0,
                evaluated: 0,
                skipped: 0,
            };
            for coord in 0..d + q + n {
                for sign in [1.0, -1.0] {
                    let mut a = self.a.to_vec();
                    let mut s = self.s.to_vec();
                    let mut x = alpha.to_vec();
                    let h = sign * delta;
                    if coord < d {
                        a[coord] += h;
                    } else if coord < d + q {
                        s[coord - d] += h;
                    } else {
                        x[coord - d - q] += h;
                    }
                    let Ok(p) = DescentProblem::new(self.family, self.objective, &a, &s) else {
                        row.skipped += 1;
                        continue;
                    };
                    let r = p.steepest_descent_direction(&x, gap_tol, 0.0)?;
                    row.max_dnu = row.max_dnu.max(distance(&r.nu, &base.nu));
                    row.max_dm = row.max_dm.max((r.m_value - base.m_value).abs());
                    row.evaluated += 1;
                }
            }
            rows.push(row);
        }
        let (num, den) = rows
            .iter()
            .filter(|r| r.delta > 0.0 && r.evaluated > 0)
            .fold((0.0, 0.0), |(a, b), r| (a + r.delta * r.max_dnu, b + r.delta * r.delta));
        Ok(ContinuityTable {
            rows,
            fitted_slope: (den > 0.0).then(|| num / den),
        })
    }
}

/// Shortest distance from `alpha` to the segment `[p, q]`.
pub fn distance_to_segment(alpha: &[f64], p: &[f64], q: &[f64]) -> f64 {
    let dir = sub(q, p);
    let len2 = sq_norm(&dir);
    let w = if len2 == 0.0 {
        0.0
    } else {
        (crate::linalg::dot(&sub(alpha, p), &dir) / len2).clamp(0.0, 1.0)
    };
    distance(alpha, &axpy(p, w, &dir))
}
