//! Sampled c-regularity analysis of a fiber family at a point.
//!
//! Two independent channels are measured. The fiber channel compares `J_a`
//! with the nearby fibers through one-sided Hausdorff deficits. The envelope
//! channel compares `I[x](a)` with its sampled `liminf` / `limsup` over a set
//! of probe directions `x`. Lower semicontinuity of `J` corresponds to upper
//! semicontinuity of every envelope and vice versa, so the report records
//! whether the two channels agree.
//!
//! Limit sets are also estimated directly. Candidate points (the generators
//! of `J_a` and of every tail fiber) are kept in the limit cloud when they
//! stay close to every tail fiber, and in the cluster cloud when they are
//! close to at least a quarter of the tail fibers. The three regularity
//! notions compare, respectively, the hull of the limit cloud, the cluster
//! cloud as a point set, and the hull of the cluster cloud against `J_a`.
//!
//! Verdicts are falsification-style: `Irregular` certifies a discontinuity
//! beyond ten times the tolerance, `Regular` only says nothing was seen at
//! the sampled resolution.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::cone::GeneratorSet;
use crate::error::{invalid, Error, Result};
use crate::linalg::{distance, norm};
use crate::minnorm::{dist_to_hull, DEFAULT_GAP_TOL};

use super::analysis::{bounds_from_tails, lsc_deficit_from_tail, tail_fibers, usc_deficit_from_tail};
use super::family::{DomainBox, FiberFamily};
use super::sequence::SequenceSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Regular,
    Irregular,
    Inconclusive,
}

impl Verdict {
    /// `Regular` at or below `eps`, `Irregular` above `10 * eps`.
    pub fn classify(value: f64, eps: f64) -> Self {
        if value <= eps {
            Verdict::Regular
        } else if value > 10.0 * eps {
            Verdict::Irregular
        } else {
            Verdict::Inconclusive
        }
    }

    /// Worst of two verdicts.
    pub fn and(self, other: Self) -> Self {
        use Verdict::*;
        match (self, other) {
            (Irregular, _) | (_, Irregular) => Irregular,
            (Inconclusive, _) | (_, Inconclusive) => Inconclusive,
            _ => Regular,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Regular => "regular",
            Verdict::Irregular => "irregular",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

/// `haus` bounds the fiber deficits; `env` bounds envelope gaps per unit
/// probe norm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegularityTolerances {
    pub haus: f64,
    pub env: f64,
    pub gap_tol: f64,
}

impl RegularityTolerances {
    /// `1e-6 * B` for both channels.
    pub fn for_family(family: &FiberFamily) -> Self {
        Self {
            haus: 1e-6 * family.bound(),
            env: 1e-6 * family.bound(),
            gap_tol: DEFAULT_GAP_TOL,
        }
    }
}

/// A sampled limit set: the surviving candidates and, per candidate, its
/// convergence residual.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitFiberEstimate {
    pub cloud: Vec<Vec<f64>>,
    pub residuals: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SequenceDiagnostics {
    pub index: usize,
    pub direction: Vec<f64>,
    pub r0: f64,
    pub ratio: f64,
    pub length: usize,
    pub usable: bool,
    pub lsc_deficit: Option<f64>,
    pub usc_deficit: Option<f64>,
    /// Hausdorff distance between the hulls of the limit cloud and `J_a`.
    pub limit_distance: Option<f64>,
    /// Point-set discrepancy between the cluster cloud and `J_a`.
    pub cluster_distance: Option<f64>,
    /// Hausdorff distance between the hulls of the cluster cloud and `J_a`.
    pub cluster_hull_distance: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnvelopeProbe {
    pub x: Vec<f64>,
    pub liminf_est: f64,
    pub value: f64,
    pub limsup_est: f64,
    /// `value - liminf_est`
    pub lsc_gap: f64,
    /// `limsup_est - value`
    pub usc_gap: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LimitSetVerdicts {
    pub c: Verdict,
    pub c1: Verdict,
    pub c2: Verdict,
    pub c_distance: f64,
    pub c1_distance: f64,
    pub c2_distance: f64,
}

impl LimitSetVerdicts {
    pub fn agree(&self) -> bool {
        self.c == self.c1 && self.c1 == self.c2
    }
}

/// Flags are raised when a quantity is beyond ten times its tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChannelCheck {
    pub fiber_lsc_flag: bool,
    pub fiber_usc_flag: bool,
    pub envelope_usc_flag: bool,
    pub envelope_lsc_flag: bool,
    /// fiber lsc <-> envelope usc and fiber usc <-> envelope lsc.
    pub consistent: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegularityReport {
    pub point: Vec<f64>,
    pub lsc_deficit: f64,
    pub usc_deficit: f64,
    /// Largest `(value - liminf) / ||x||` over probes.
    pub envelope_lsc_gap: f64,
    /// Largest `(limsup - value) / ||x||` over probes.
    pub envelope_usc_gap: f64,
    pub c_regular: Verdict,
    pub limit_sets: LimitSetVerdicts,
    pub channels: ChannelCheck,
    /// Every usable sequence produced a nonempty limit cloud.
    pub limit_clouds_nonempty: bool,
    pub per_sequence: Vec<SequenceDiagnostics>,
    pub envelope_crosscheck: Vec<EnvelopeProbe>,
    pub tolerances: RegularityTolerances,
    pub caveat: String,
}

fn dedup(points: Vec<Vec<f64>>, tol: f64) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    for p in points {
        if out.iter().all(|q| distance(q, &p) > tol) {
            out.push(p);
        }
    }
    out
}

/// Limit cloud (`J^s`) and cluster cloud (`J^ws`) estimates from the tail
/// fibers of one sequence.
pub fn limit_clouds(
    base: &GeneratorSet,
    tail: &[GeneratorSet],
    tol: f64,
    gap_tol: f64,
) -> Result<(LimitFiberEstimate, LimitFiberEstimate)> {
    let mut candidates: Vec<Vec<f64>> = base.points().to_vec();
    for fib in tail {
        candidates.extend(fib.points().iter().cloned());
    }
    let candidates = dedup(candidates, tol * 1e-1);
    let need = tail.len().div_ceil(4).max(1);

    let mut limit = LimitFiberEstimate {
        cloud: vec![],
        residuals: vec![],
    };
    let mut cluster = limit.clone();
    for v in candidates {
        let mut r = tail
            .iter()
            .map(|fib| dist_to_hull(&v, fib.points(), gap_tol))
            .collect::<Result<Vec<f64>>>()?;
        let worst = r.iter().cloned().fold(0.0, f64::max);
        r.sort_by(f64::total_cmp);
        let typical = r[need - 1];
        if worst <= tol {
            limit.cloud.push(v.clone());
            limit.residuals.push(worst);
        }
        if typical <= tol {
            cluster.cloud.push(v);
            cluster.residuals.push(typical);
        }
    }
    Ok((limit, cluster))
}

fn hull_hausdorff(a: &[Vec<f64>], b: &[Vec<f64>], gap_tol: f64) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Ok(f64::INFINITY);
    }
    let mut worst: f64 = 0.0;
    for p in a {
        worst = worst.max(dist_to_hull(p, b, gap_tol)?);
    }
    for p in b {
        worst = worst.max(dist_to_hull(p, a, gap_tol)?);
    }
    Ok(worst)
}

/// Cloud inside `conv(base)`, and every base generator a point of the cloud.
fn cloud_discrepancy(cloud: &[Vec<f64>], base: &[Vec<f64>], gap_tol: f64) -> Result<f64> {
    if cloud.is_empty() {
        return Ok(f64::INFINITY);
    }
    let mut worst: f64 = 0.0;
    for w in cloud {
        worst = worst.max(dist_to_hull(w, base, gap_tol)?);
    }
    for u in base {
        let nearest = cloud.iter().map(|w| distance(u, w)).fold(f64::INFINITY, f64::min);
        worst = worst.max(nearest);
    }
    Ok(worst)
}

fn has_signed_axes(probes: &[Vec<f64>], m: usize) -> bool {
    (0..m).all(|i| {
        [1.0, -1.0].iter().all(|&s| {
            probes
                .iter()
                .any(|p| p.len() == m && (0..m).all(|k| (p[k] - if k == i { s } else { 0.0 }).abs() <= 1e-12))
        })
    })
}

/// Full regularity analysis of `family` at `a`.
///
/// Needs at least four sequence specs and at least eight probes including
/// `+-e_i` for every axis of the value space.
pub fn c_regularity_verdict(
    family: &FiberFamily,
    a: &[f64],
    specs: &[SequenceSpec],
    probes: &[Vec<f64>],
    tols: &RegularityTolerances,
) -> Result<RegularityReport> {
    if specs.len() < 4 {
        return Err(invalid("at least four sequence specs are required"));
    }
    let m = family.value_dim();
    if probes.len() < 8 || !has_signed_axes(probes, m) {
        return Err(invalid(
            "at least eight probes are required, including the signed canonical basis",
        ));
    }
    let base = family.fiber(a)?;
    let tails = tail_fibers(family, a, specs)?;
    if tails.iter().all(Option::is_none) {
        return Err(Error::NoValidSequence);
    }

    let mut per_sequence = Vec::with_capacity(specs.len());
    let (mut lsc, mut usc) = (0.0f64, 0.0f64);
    let (mut c_d, mut c1_d, mut c2_d) = (0.0f64, 0.0f64, 0.0f64);
    let mut clouds_nonempty = true;
    for (index, (spec, tail)) in specs.iter().zip(&tails).enumerate() {
        let mut diag = SequenceDiagnostics {
            index,
            direction: spec.direction().to_vec(),
            r0: spec.r0(),
            ratio: spec.ratio(),
            length: spec.length(),
            usable: tail.is_some(),
            lsc_deficit: None,
            usc_deficit: None,
            limit_distance: None,
            cluster_distance: None,
            cluster_hull_distance: None,
        };
        if let Some(tail) = tail {
            let l = lsc_deficit_from_tail(&base, tail, tols.gap_tol)?;
            let u = usc_deficit_from_tail(&base, tail, tols.gap_tol)?;
            let (limit, cluster) = limit_clouds(&base, tail, tols.haus, tols.gap_tol)?;
            clouds_nonempty &= !limit.cloud.is_empty();
            let dc = hull_hausdorff(&limit.cloud, base.points(), tols.gap_tol)?;
            let dc1 = cloud_discrepancy(&cluster.cloud, base.points(), tols.gap_tol)?;
            let dc2 = hull_hausdorff(&cluster.cloud, base.points(), tols.gap_tol)?;
            lsc = lsc.max(l);
            usc = usc.max(u);
            c_d = c_d.max(dc);
            c1_d = c1_d.max(dc1);
            c2_d = c2_d.max(dc2);
            diag.lsc_deficit = Some(l);
            diag.usc_deficit = Some(u);
            diag.limit_distance = Some(dc);
            diag.cluster_distance = Some(dc1);
            diag.cluster_hull_distance = Some(dc2);
        }
        per_sequence.push(diag);
    }

    let mut crosscheck = Vec::with_capacity(probes.len());
    let (mut env_lsc, mut env_usc) = (0.0f64, 0.0f64);
    let mut probe_verdict = Verdict::Regular;
    for x in probes {
        let xn = norm(x);
        let value = base.lower_envelope(x)?;
        let b = bounds_from_tails(value, x, &tails)?;
        let probe = EnvelopeProbe {
            x: x.clone(),
            liminf_est: b.liminf_est,
            value,
            limsup_est: b.limsup_est,
            lsc_gap: value - b.liminf_est,
            usc_gap: b.limsup_est - value,
        };
        if xn > 0.0 {
            env_lsc = env_lsc.max(probe.lsc_gap / xn);
            env_usc = env_usc.max(probe.usc_gap / xn);
            let eps = tols.env * xn;
            probe_verdict = probe_verdict
                .and(Verdict::classify(b.limsup_est - b.liminf_est, eps))
                .and(Verdict::classify((b.liminf_est - value).abs(), eps));
        }
        crosscheck.push(probe);
    }

    let c_regular = Verdict::classify(lsc, tols.haus)
        .and(Verdict::classify(usc, tols.haus))
        .and(probe_verdict);

    let flag = |v: f64, eps: f64| Verdict::classify(v, eps) == Verdict::Irregular;
    let channels = {
        let fiber_lsc_flag = flag(lsc, tols.haus);
        let fiber_usc_flag = flag(usc, tols.haus);
        let envelope_usc_flag = flag(env_usc, tols.env);
        let envelope_lsc_flag = flag(env_lsc, tols.env);
        ChannelCheck {
            fiber_lsc_flag,
            fiber_usc_flag,
            envelope_usc_flag,
            envelope_lsc_flag,
            consistent: fiber_lsc_flag == envelope_usc_flag && fiber_usc_flag == envelope_lsc_flag,
        }
    };

    let limit_sets = LimitSetVerdicts {
        c: Verdict::classify(c_d, tols.haus),
        c1: Verdict::classify(c1_d, tols.haus),
        c2: Verdict::classify(c2_d, tols.haus),
        c_distance: c_d,
        c1_distance: c1_d,
        c2_distance: c2_d,
    };

    let usable = tails.iter().filter(|t| t.is_some()).count();
    let caveat = format!(
        "limit sets sampled along {usable} of {} sequences and {} probes; \
         'regular' is evidence at resolution (haus {:.3e}, env {:.3e}), 'irregular' is a certificate",
        specs.len(),
        probes.len(),
        tols.haus,
        tols.env
    );

    Ok(RegularityReport {
        point: a.to_vec(),
        lsc_deficit: lsc,
        usc_deficit: usc,
        envelope_lsc_gap: env_lsc,
        envelope_usc_gap: env_usc,
        c_regular,
        limit_sets,
        channels,
        limit_clouds_nonempty: clouds_nonempty,
        per_sequence,
        envelope_crosscheck: crosscheck,
        tolerances: *tols,
        caveat,
    })
}

/// Probe directions for the envelope channel: the signed canonical basis,
/// then extra directions (evenly spaced angles for `m = 2`, signed pair
/// diagonals plus seeded random unit vectors for `m >= 3`, rescalings of
/// `+-1` for `m = 1`).
pub fn default_probes(m: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut probes = Vec::new();
    for i in 0..m {
        for s in [1.0, -1.0] {
            let mut e = vec![0.0; m];
            e[i] = s;
            probes.push(e);
        }
    }
    match m {
        0 => {}
        1 => {
            for s in [0.5, 2.0, 0.25] {
                probes.push(vec![s]);
                probes.push(vec![-s]);
            }
        }
        2 => {
            for k in 0..24 {
                if k % 6 != 0 {
                    let th = k as f64 * std::f64::consts::PI / 12.0;
                    probes.push(vec![th.cos(), th.sin()]);
                }
            }
        }
        _ => {
            let h = 0.5f64.sqrt();
            for i in 0..m {
                for j in (i + 1)..m {
                    for (si, sj) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
                        let mut e = vec![0.0; m];
                        e[i] = si * h;
                        e[j] = sj * h;
                        probes.push(e);
                    }
                }
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..8 {
                let v: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let n = norm(&v);
                if n > 1e-3 {
                    probes.push(v.iter().map(|c| c / n).collect());
                }
            }
        }
    }
    probes
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FiberViolation {
    pub point: Vec<f64>,
    pub reason: String,
}

/// Outcome of checking nonemptiness and the uniform bound on a grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FiberConditions {
    pub passed: bool,
    pub points_checked: usize,
    pub bound: f64,
    pub max_norm: f64,
    pub violations: Vec<FiberViolation>,
    /// Grid points whose generators do not span the value space (pointedness
    /// of the cone is not guaranteed there). Diagnostic only.
    pub not_spanning: Vec<Vec<f64>>,
}

/// Evaluates every grid point; bound or evaluation failures are collected as
/// violations rather than returned as errors. Grid points outside the domain
/// are an error.
pub fn check_fiber_conditions(family: &FiberFamily, grid: &[Vec<f64>]) -> Result<FiberConditions> {
    let mut max_norm: f64 = 0.0;
    let mut violations = Vec::new();
    let mut not_spanning = Vec::new();
    for a in grid {
        family.check_domain(a)?;
        match family.fiber(a) {
            Ok(set) => {
                max_norm = max_norm.max(set.max_norm());
                if !set.spans_space() {
                    not_spanning.push(a.clone());
                }
            }
            Err(Error::BoundExceeded { norm, bound }) => {
                max_norm = max_norm.max(norm);
                violations.push(FiberViolation {
                    point: a.clone(),
                    reason: format!("generator norm {norm} exceeds bound {bound}"),
                });
            }
            Err(e) => violations.push(FiberViolation {
                point: a.clone(),
                reason: e.to_string(),
            }),
        }
    }
    Ok(FiberConditions {
        passed: violations.is_empty(),
        points_checked: grid.len(),
        bound: family.bound(),
        max_norm,
        violations,
        not_spanning,
    })
}

/// Tensor grid with `per_axis` points per coordinate (at least two).
pub fn uniform_grid(domain: &DomainBox, per_axis: usize) -> Vec<Vec<f64>> {
    let per_axis = per_axis.max(2);
    let d = domain.dim();
    let total = per_axis.pow(d as u32);
    (0..total)
        .map(|mut idx| {
            (0..d)
                .map(|k| {
                    let i = idx % per_axis;
                    idx /= per_axis;
                    let (l, u) = (domain.lower()[k], domain.upper()[k]);
                    if i + 1 == per_axis {
                        u
                    } else {
                        l + (u - l) * i as f64 / (per_axis - 1) as f64
                    }
                })
                .collect()
        })
        .collect()
}
