//! Minimum-norm point of the convex hull of a finite point set.
//!
//! The primary solver is Wolfe's active-set ("corral") method. It keeps a set
//! of affinely independent points whose affine minimizer is strictly inside
//! their hull, and terminates with the optimality certificate
//! `min_i <x, p_i> >= ||x||^2 - gap_tol`. When the affine subproblem becomes
//! numerically singular and ridge regularization cannot repair it, the solver
//! continues with away-step Frank-Wolfe from the current weights.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::linalg::{check_dim, check_finite, combine, dot, sq_norm, sub};

pub const DEFAULT_GAP_TOL: f64 = 1e-10;

/// Weights at or below this are removed from the corral.
const WEIGHT_ZERO: f64 = 1e-12;
/// Reciprocal condition number below which the affine system counts as singular.
const SINGULAR_RCOND: f64 = 1e-12;
const RIDGE: f64 = 1e-14;
/// Largest affine weight accepted from a regularized solve.
const MAX_AFFINE_WEIGHT: f64 = 1e6;
const FW_MAX_ITER: usize = 200_000;

/// Convex-combination weights, one per input point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimplexWeights(Vec<f64>);

impl SimplexWeights {
    /// Accepts weights with `w_i >= -1e-12` and `|sum - 1| <= 1e-10`.
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::Empty);
        }
        check_finite(&weights, "simplex weights")?;
        if weights.iter().any(|&w| w < -1e-12) {
            return Err(invalid("simplex weight below zero"));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-10 {
            return Err(invalid(format!("simplex weights sum to {total}")));
        }
        Ok(Self(weights))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `sum_i w_i p_i`
    pub fn combine(&self, points: &[Vec<f64>]) -> Vec<f64> {
        combine(points, &self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinNormResult {
    pub point: Vec<f64>,
    pub weights: SimplexWeights,
    pub sq_norm: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl MinNormResult {
    /// Largest violation of the Wolfe inequality `<x, p_i> >= ||x||^2 - gap`.
    pub fn certificate_gap(&self, points: &[Vec<f64>]) -> f64 {
        let min_pair = points.iter().map(|p| dot(&self.point, p)).fold(f64::INFINITY, f64::min);
        self.sq_norm - min_pair
    }
}

fn validate(points: &[Vec<f64>], gap_tol: f64) -> Result<usize> {
    let dim = points.first().ok_or(Error::Empty)?.len();
    for p in points {
        check_dim(dim, p)?;
        check_finite(p, "hull point")?;
    }
    if !(gap_tol > 0.0) {
        return Err(invalid("gap_tol must be positive"));
    }
    Ok(dim)
}

fn finish(points: &[Vec<f64>], lambda: Vec<f64>, iterations: usize, converged: bool) -> Result<MinNormResult> {
    let mut lambda = lambda;
    for w in lambda.iter_mut() {
        if *w < 0.0 {
            *w = 0.0;
        }
    }
    let total: f64 = lambda.iter().sum();
    for w in lambda.iter_mut() {
        *w /= total;
    }
    let point = combine(points, &lambda);
    let sq_norm = sq_norm(&point);
    Ok(MinNormResult {
        point,
        weights: SimplexWeights::new(lambda)?,
        sq_norm,
        iterations,
        converged,
    })
}

/// Minimum-norm point of `conv(points)`.
///
/// The iteration cap is `10 * p * dim + 1000` counting both major and minor
/// cycles; on overrun the best iterate is returned with `converged = false`.
pub fn min_norm_point(points: &[Vec<f64>], gap_tol: f64) -> Result<MinNormResult> {
    let dim = validate(points, gap_tol)?;
    let p = points.len();
    if p == 1 {
        return finish(points, vec![1.0], 0, true);
    }
    let max_iter = 10 * p * dim + 1000;

    let start = (0..p)
        .min_by(|&i, &j| sq_norm(&points[i]).total_cmp(&sq_norm(&points[j])))
        .unwrap();
    let mut lambda = vec![0.0; p];
    lambda[start] = 1.0;
    let mut corral = vec![start];
    let mut x = points[start].clone();
    let mut iterations = 0;

    loop {
        let xx = sq_norm(&x);
        let (j, best) = (0..p)
            .map(|i| (i, dot(&x, &points[i])))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        if best >= xx - gap_tol {
            return finish(points, lambda, iterations, true);
        }
        if iterations >= max_iter {
            log::debug!(
                "min-norm: active set cycling after {iterations} iterations, switching to away-step Frank-Wolfe"
            );
            return frank_wolfe_from(points, lambda, gap_tol, iterations);
        }
        if corral.contains(&j) {
            // Affine minimizer of the corral is not accurate enough to
            // certify; polish with Frank-Wolfe.
            log::debug!("min-norm: corral stalled at {iterations} iterations, switching to away-step Frank-Wolfe");
            return frank_wolfe_from(points, lambda, gap_tol, iterations);
        }
        corral.push(j);

        // Minor cycles.
        loop {
            iterations += 1;
            let alpha = match affine_minimizer(points, &corral) {
                Some(a) => a,
                None => {
                    // Drop the smallest-weight point other than the newcomer.
                    let newcomer = *corral.last().unwrap();
                    let victim = corral
                        .iter()
                        .enumerate()
                        .filter(|(_, &c)| c != newcomer)
                        .min_by(|a, b| lambda[*a.1].total_cmp(&lambda[*b.1]))
                        .map(|(k, _)| k);
                    match victim {
                        Some(k) if corral.len() > 2 => {
                            let gone = corral.remove(k);
                            let w = lambda[gone];
                            lambda[gone] = 0.0;
                            let rest: f64 = corral.iter().map(|&c| lambda[c]).sum();
                            if rest > 0.0 {
                                for &c in &corral {
                                    lambda[c] *= (rest + w) / rest;
                                }
                            }
                            continue;
                        }
                        _ => {
                            log::debug!("min-norm: singular corral, switching to away-step Frank-Wolfe");
                            return frank_wolfe_from(points, lambda, gap_tol, iterations);
                        }
                    }
                }
            };

            if alpha.iter().all(|&a| a > WEIGHT_ZERO) {
                for (k, &c) in corral.iter().enumerate() {
                    lambda[c] = alpha[k];
                }
                x = combine(points, &lambda);
                break;
            }

            // Move from lambda towards alpha until the first weight hits zero.
            let mut theta = f64::INFINITY;
            let mut hit = 0;
            for (k, &c) in corral.iter().enumerate() {
                if alpha[k] <= WEIGHT_ZERO {
                    let denom = lambda[c] - alpha[k];
                    let ratio = if denom > 0.0 { lambda[c] / denom } else { 0.0 };
                    if ratio < theta {
                        theta = ratio;
                        hit = k;
                    }
                }
            }
            let theta = theta.clamp(0.0, 1.0);
            for (k, &c) in corral.iter().enumerate() {
                lambda[c] = (1.0 - theta) * lambda[c] + theta * alpha[k];
            }
            lambda[corral[hit]] = 0.0;
            let mut kept = Vec::with_capacity(corral.len());
            for &c in &corral {
                if lambda[c] > WEIGHT_ZERO {
                    kept.push(c);
                } else {
                    lambda[c] = 0.0;
                }
            }
            corral = kept;
            if corral.is_empty() {
                return frank_wolfe_from(points, lambda, gap_tol, iterations);
            }
            let total: f64 = corral.iter().map(|&c| lambda[c]).sum();
            for &c in &corral {
                lambda[c] /= total;
            }
            x = combine(points, &lambda);
            if corral.len() == 1 || iterations >= max_iter {
                break;
            }
        }
    }
}

/// Weights of the point of minimum norm in the affine hull of the corral,
/// from the bordered system `[G 1; 1' 0] [a; mu] = [0; 1]`.
fn affine_minimizer(points: &[Vec<f64>], corral: &[usize]) -> Option<Vec<f64>> {
    let k = corral.len();
    let gram = |ridge: f64| {
        let mut m = DMatrix::<f64>::zeros(k + 1, k + 1);
        for (r, &i) in corral.iter().enumerate() {
            for (c, &j) in corral.iter().enumerate() {
                m[(r, c)] = dot(&points[i], &points[j]);
            }
            m[(r, r)] += ridge;
            m[(r, k)] = 1.0;
            m[(k, r)] = 1.0;
        }
        m
    };
    let mut rhs = DVector::<f64>::zeros(k + 1);
    rhs[k] = 1.0;

    let system = gram(0.0);
    let svd = system.clone().svd(true, true);
    let top = svd.singular_values.max();
    let bottom = svd.singular_values.min();
    let sol = if top > 0.0 && bottom / top >= SINGULAR_RCOND {
        svd.solve(&rhs, 0.0).ok()?
    } else {
        let ridged = gram(RIDGE).svd(true, true);
        let cut = ridged.singular_values.max() * 1e-15;
        ridged.solve(&rhs, cut).ok()?
    };
    let alpha: Vec<f64> = sol.iter().take(k).cloned().collect();
    let total: f64 = alpha.iter().sum();
    if alpha.iter().any(|a| !a.is_finite() || a.abs() > MAX_AFFINE_WEIGHT) || (total - 1.0).abs() > 1e-8 {
        return None;
    }
    Some(alpha.iter().map(|a| a / total).collect())
}

/// Away-step Frank-Wolfe for `min ||sum_i w_i p_i||^2` over the simplex, with
/// exact line search. Stops on the same Wolfe certificate as the active-set
/// solver.
pub fn away_step_frank_wolfe(points: &[Vec<f64>], gap_tol: f64) -> Result<MinNormResult> {
    validate(points, gap_tol)?;
    let p = points.len();
    frank_wolfe_from(points, vec![1.0 / p as f64; p], gap_tol, 0)
}

fn frank_wolfe_from(
    points: &[Vec<f64>],
    mut lambda: Vec<f64>,
    gap_tol: f64,
    mut iterations: usize,
) -> Result<MinNormResult> {
    let p = points.len();
    let mut x = combine(points, &lambda);
    for _ in 0..FW_MAX_ITER {
        let grads: Vec<f64> = points.iter().map(|q| dot(&x, q)).collect();
        let xx = sq_norm(&x);
        let (s, gs) = grads
            .iter()
            .cloned()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        let fw_gap = xx - gs;
        if fw_gap <= gap_tol {
            return finish(points, lambda, iterations, true);
        }
        iterations += 1;
        let away = (0..p)
            .filter(|&i| lambda[i] > 0.0)
            .max_by(|&a, &b| grads[a].total_cmp(&grads[b]))
            .unwrap();
        let away_gap = grads[away] - xx;

        let (dir, max_step, toward, from) = if fw_gap >= away_gap {
            (sub(&points[s], &x), 1.0, Some(s), None)
        } else {
            let w = lambda[away];
            let cap = if w < 1.0 { w / (1.0 - w) } else { f64::INFINITY };
            (sub(&x, &points[away]), cap, None, Some(away))
        };
        let dd = sq_norm(&dir);
        if dd == 0.0 {
            return finish(points, lambda, iterations, false);
        }
        let step = (-dot(&x, &dir) / dd).clamp(0.0, max_step);
        match (toward, from) {
            (Some(s), _) => {
                for w in lambda.iter_mut() {
                    *w *= 1.0 - step;
                }
                lambda[s] += step;
            }
            (_, Some(v)) => {
                for w in lambda.iter_mut() {
                    *w *= 1.0 + step;
                }
                lambda[v] -= step;
                if lambda[v] < WEIGHT_ZERO {
                    lambda[v] = 0.0;
                }
            }
            _ => unreachable!(),
        }
        x = combine(points, &lambda);
    }
    finish(points, lambda, iterations, false)
}

/// Euclidean distance from `q` to `conv(points)`.
pub fn dist_to_hull(q: &[f64], points: &[Vec<f64>], gap_tol: f64) -> Result<f64> {
    let dim = points.first().ok_or(Error::Empty)?.len();
    check_dim(dim, q)?;
    let shifted: Vec<Vec<f64>> = points.iter().map(|p| sub(p, q)).collect();
    Ok(min_norm_point(&shifted, gap_tol)?.sq_norm.sqrt())
}
