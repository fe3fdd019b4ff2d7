//! Brute-force oracles shared by the integration suites. None of these call
//! into the solver paths they are used to check.
#![allow(dead_code)]

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_points(rng: &mut ChaCha8Rng, p: usize, dim: usize, scale: f64) -> Vec<Vec<f64>> {
    (0..p)
        .map(|_| (0..dim).map(|_| rng.gen_range(-scale..scale)).collect())
        .collect()
}

fn sq_norm_of_combination(points: &[Vec<f64>], w: &[f64]) -> f64 {
    let dim = points[0].len();
    let mut acc = vec![0.0; dim];
    for (p, &wi) in points.iter().zip(w) {
        for k in 0..dim {
            acc[k] += wi * p[k];
        }
    }
    acc.iter().map(|v| v * v).sum()
}

/// Visits every composition of `total` into `parts` nonnegative integers.
fn compositions(parts: usize, total: usize, f: &mut impl FnMut(&[usize])) {
    fn rec(buf: &mut Vec<usize>, parts: usize, left: usize, f: &mut impl FnMut(&[usize])) {
        if buf.len() + 1 == parts {
            buf.push(left);
            f(buf);
            buf.pop();
            return;
        }
        for k in 0..=left {
            buf.push(k);
            rec(buf, parts, left - k, f);
            buf.pop();
        }
    }
    let mut buf = Vec::with_capacity(parts);
    rec(&mut buf, parts, total, f);
}

/// Exhaustive search of `||sum w_i p_i||^2` over the simplex lattice of step
/// `1/divisions`, followed by local lattice refinements around the incumbent.
/// Returns `(best value, best weights)`.
pub fn simplex_grid_min_sq_norm(points: &[Vec<f64>], divisions: usize, refinements: usize) -> (f64, Vec<f64>) {
    let p = points.len();
    if p == 1 {
        return (sq_norm_of_combination(points, &[1.0]), vec![1.0]);
    }
    let mut best = f64::INFINITY;
    let mut best_w = vec![0.0; p];
    let mut w = vec![0.0; p];
    compositions(p, divisions, &mut |c| {
        for (wi, &ci) in w.iter_mut().zip(c) {
            *wi = ci as f64 / divisions as f64;
        }
        let v = sq_norm_of_combination(points, &w);
        if v < best {
            best = v;
            best_w.copy_from_slice(&w);
        }
    });

    // Refine: perturb the first p-1 weights on a finer lattice, last weight
    // absorbs the difference, reject points leaving the simplex.
    let mut step = 1.0 / divisions as f64;
    let radius: i64 = if p <= 4 { 10 } else { 4 };
    for _ in 0..refinements {
        let fine = step / radius as f64;
        let center = best_w.clone();
        let free = p - 1;
        let span = (2 * radius + 1) as usize;
        let total = span.pow(free as u32);
        for idx in 0..total {
            let mut rem = idx;
            let mut ok = true;
            let mut sum = 0.0;
            for k in 0..free {
                let z = (rem % span) as i64 - radius;
                rem /= span;
                let v = center[k] + z as f64 * fine;
                if v < 0.0 {
                    ok = false;
                    break;
                }
                w[k] = v;
                sum += v;
            }
            if !ok || sum > 1.0 {
                continue;
            }
            w[free] = 1.0 - sum;
            let v = sq_norm_of_combination(points, &w);
            if v < best {
                best = v;
                best_w.copy_from_slice(&w);
            }
        }
        step = fine;
    }
    (best, best_w)
}

/// Minimizes `max_i <g_i, nu> + 0.5 ||nu||^2` over a lattice in the box
/// `[-r, r]^n` (`r = max ||g_i||`), then refines the lattice around the
/// incumbent. Returns `(value, minimizer)`.
pub fn primal_grid_descent(pullbacks: &[Vec<f64>], coarse: usize, levels: usize) -> (f64, Vec<f64>) {
    let n = pullbacks[0].len();
    let objective = |nu: &[f64]| -> f64 {
        let f = pullbacks
            .iter()
            .map(|g| g.iter().zip(nu).map(|(a, b)| a * b).sum::<f64>())
            .fold(f64::NEG_INFINITY, f64::max);
        f + 0.5 * nu.iter().map(|v| v * v).sum::<f64>()
    };
    let r = pullbacks
        .iter()
        .map(|g| g.iter().map(|v| v * v).sum::<f64>().sqrt())
        .fold(0.0, f64::max)
        .max(1e-3);
    let mut center = vec![0.0; n];
    let mut half = r;
    let mut best = objective(&center);
    let mut best_nu = center.clone();
    let mut nu = vec![0.0; n];
    for _ in 0..levels {
        let h = 2.0 * half / coarse as f64;
        let pts = coarse + 1;
        let total = pts.pow(n as u32);
        for idx in 0..total {
            let mut rem = idx;
            for k in 0..n {
                nu[k] = center[k] - half + (rem % pts) as f64 * h;
                rem /= pts;
            }
            let v = objective(&nu);
            if v < best {
                best = v;
                best_nu.copy_from_slice(&nu);
            }
        }
        center = best_nu.clone();
        half = 3.0 * h;
    }
    (best, best_nu)
}
