//! Lower envelopes, the variational gauge, and sequence-sampled
//! semicontinuity estimates.

use serde::Serialize;

use crate::cone::GeneratorSet;
use crate::error::{invalid, Error, Result};
use crate::minnorm::dist_to_hull;

use super::family::FiberFamily;
use super::sequence::SequenceSpec;

/// `I[x](a) = min_{c in J_a} <c, x>`.
pub fn envelope(family: &FiberFamily, x: &[f64], a: &[f64]) -> Result<f64> {
    family.fiber(a)?.lower_envelope(x)
}

/// `G(a, x) = max_{c in J_a} <c, x>`.
pub fn variational_gauge(family: &FiberFamily, a: &[f64], x: &[f64]) -> Result<f64> {
    family.fiber(a)?.gauge(x)
}

/// Estimates of `liminf` and `limsup` of `I[x]` at a point, with the value
/// at the point itself (the constant sequence) in both pools.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LimitBounds {
    pub liminf_est: f64,
    pub value: f64,
    pub limsup_est: f64,
    pub sequences_used: usize,
}

/// Tail fibers of every usable spec, in spec order; `None` for specs that
/// leave the domain.
pub(crate) fn tail_fibers(
    family: &FiberFamily,
    a: &[f64],
    specs: &[SequenceSpec],
) -> Result<Vec<Option<Vec<GeneratorSet>>>> {
    specs
        .iter()
        .map(|spec| {
            if !spec.stays_in(family.domain(), a) {
                return Ok(None);
            }
            spec.tail(a)
                .iter()
                .map(|p| family.fiber(p))
                .collect::<Result<Vec<_>>>()
                .map(Some)
        })
        .collect()
}

pub(crate) fn bounds_from_tails(value: f64, x: &[f64], tails: &[Option<Vec<GeneratorSet>>]) -> Result<LimitBounds> {
    let mut lo = value;
    let mut hi = value;
    let mut used = 0;
    for tail in tails.iter().flatten() {
        used += 1;
        for fib in tail {
            let v = fib.lower_envelope(x)?;
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    if used == 0 {
        return Err(Error::NoValidSequence);
    }
    Ok(LimitBounds {
        liminf_est: lo,
        value,
        limsup_est: hi,
        sequences_used: used,
    })
}

/// `liminf` estimate: smallest tail value over all sequences; `limsup`
/// estimate: largest. Sequences leaving the domain are skipped.
pub fn envelope_limit_bounds(
    family: &FiberFamily,
    x: &[f64],
    a: &[f64],
    specs: &[SequenceSpec],
) -> Result<LimitBounds> {
    if specs.len() < 4 {
        return Err(invalid("at least four sequence specs are required"));
    }
    let value = envelope(family, x, a)?;
    let tails = tail_fibers(family, a, specs)?;
    bounds_from_tails(value, x, &tails)
}

fn require_inside(family: &FiberFamily, a: &[f64], spec: &SequenceSpec) -> Result<()> {
    family.check_domain(a)?;
    if let Some(p) = spec.points(a).into_iter().find(|p| !family.domain().contains(p)) {
        return Err(Error::OutOfDomain { point: p });
    }
    Ok(())
}

pub(crate) fn lsc_deficit_from_tail(base: &GeneratorSet, tail: &[GeneratorSet], gap_tol: f64) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for v in base.points() {
        for fib in tail {
            worst = worst.max(dist_to_hull(v, fib.points(), gap_tol)?);
        }
    }
    Ok(worst)
}

pub(crate) fn usc_deficit_from_tail(base: &GeneratorSet, tail: &[GeneratorSet], gap_tol: f64) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for fib in tail {
        for w in fib.points() {
            worst = worst.max(dist_to_hull(w, base.points(), gap_tol)?);
        }
    }
    Ok(worst)
}

/// How far points of `J_a` stay from the nearby fibers along the tail of
/// `spec`. Zero up to tolerance means `J` is lower semicontinuous along it.
pub fn fiber_lsc_deficit(family: &FiberFamily, a: &[f64], spec: &SequenceSpec, gap_tol: f64) -> Result<f64> {
    require_inside(family, a, spec)?;
    let base = family.fiber(a)?;
    let tail = spec
        .tail(a)
        .iter()
        .map(|p| family.fiber(p))
        .collect::<Result<Vec<_>>>()?;
    lsc_deficit_from_tail(&base, &tail, gap_tol)
}

/// How far the nearby fibers along the tail of `spec` escape `J_a`. Zero up
/// to tolerance means `J` is upper semicontinuous along it.
pub fn fiber_usc_deficit(family: &FiberFamily, a: &[f64], spec: &SequenceSpec, gap_tol: f64) -> Result<f64> {
    require_inside(family, a, spec)?;
    let base = family.fiber(a)?;
    let tail = spec
        .tail(a)
        .iter()
        .map(|p| family.fiber(p))
        .collect::<Result<Vec<_>>>()?;
    usc_deficit_from_tail(&base, &tail, gap_tol)
}
