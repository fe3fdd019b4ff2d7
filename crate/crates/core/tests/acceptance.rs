//! End-to-end acceptance gate. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any criterion fails.

mod common;

use std::time::Instant;

use cone_descent::cone::{GeneratorSet, OrderTolerance};
use cone_descent::descent::{distance_to_segment, DescentProblem, LineSearchParams, DEFAULT_CRIT_TOL};
use cone_descent::envelope::{
    c_regularity_verdict, default_probes, default_specs, envelope, variational_gauge, DomainBox, FiberFamily,
    RegularityReport, RegularityTolerances, Verdict,
};
use cone_descent::harness::{catalog, load_fixture, run, Operation, Problem, RunOptions};
use cone_descent::minnorm::{min_norm_point, DEFAULT_GAP_TOL};
use cone_descent::objective::{ObjectiveFamily, ObjectiveKind, QuadraticComponent};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn nrm(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn ip(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn fixture(name: &str) -> Problem {
    load_fixture(name).unwrap_or_else(|e| panic!("fixture {name}: {e}"))
}

fn problem_of(p: &Problem) -> DescentProblem<'_> {
    DescentProblem::new(&p.family, &p.objective, &p.spec.analysis.point, &p.spec.analysis.s).unwrap()
}

fn random_in_box(rng: &mut ChaCha8Rng, dom: &DomainBox) -> Vec<f64> {
    dom.lower()
        .iter()
        .zip(dom.upper())
        .map(|(l, u)| rng.gen_range(*l..=*u))
        .collect()
}

fn unit_line() -> DomainBox {
    DomainBox::new(vec![-1.0], vec![1.0]).unwrap()
}

/// Random generator set with norms at most one.
fn random_generators(rng: &mut ChaCha8Rng, p: usize, m: usize) -> Vec<Vec<f64>> {
    (0..p)
        .map(|_| loop {
            let v: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let n = nrm(&v);
            if n > 0.05 && n <= 1.0 {
                break v;
            }
        })
        .collect()
}

fn dual_primal() -> Outcome {
    let mut rng = common::rng(2024);
    let (mut worst_m, mut worst_nu): (f64, f64) = (0.0, 0.0);
    for case in 0..100 {
        let n = rng.gen_range(1..=4);
        let m = rng.gen_range(1..=4);
        let p = rng.gen_range(1..=6);
        let gens = random_generators(&mut rng, p, m);
        let a_mat = common::random_points(&mut rng, m, n, 1.5);
        let alpha = common::random_points(&mut rng, 1, n, 1.0).remove(0);
        let fam = FiberFamily::constant(GeneratorSet::new(gens.clone()).unwrap(), unit_line(), 1.0).unwrap();
        let obj = ObjectiveFamily::new(
            n,
            m,
            0,
            ObjectiveKind::Affine {
                matrix: a_mat.clone(),
                offset: vec![],
                drift: vec![],
            },
        )
        .unwrap();
        let dp = DescentProblem::new(&fam, &obj, &[0.0], &[]).unwrap();
        let r = dp
            .steepest_descent_direction(&alpha, DEFAULT_GAP_TOL, DEFAULT_CRIT_TOL)
            .unwrap();
        // Pullbacks A^T c, computed here from the matrix itself.
        let pull: Vec<Vec<f64>> = fam
            .fiber(&[0.0])
            .unwrap()
            .points()
            .iter()
            .map(|c| (0..n).map(|j| (0..m).map(|i| a_mat[i][j] * c[i]).sum()).collect())
            .collect();
        let (m_grid, nu_grid) = common::primal_grid_descent(&pull, 16, 10);
        let dm = (r.m_value - m_grid).abs();
        let dnu = dist(&r.nu, &nu_grid);
        worst_m = worst_m.max(dm);
        worst_nu = worst_nu.max(dnu);
        if dm > 2e-3 || dnu > 5e-2 {
            return Err(format!("case {case}: |dm| = {dm:.3e}, |dnu| = {dnu:.3e}"));
        }
    }
    Ok(format!(
        "100 instances, max |dm| = {worst_m:.2e}, max |dnu| = {worst_nu:.2e}"
    ))
}

fn scalar_reduction() -> Outcome {
    let mut rng = common::rng(5);
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    for f in catalog() {
        let p = fixture(f.name);
        let fiber = p.family.fiber(&p.spec.analysis.point).unwrap();
        if p.spec.space.m != 1 || fiber.points() != [vec![1.0]] {
            continue;
        }
        let ObjectiveKind::QuadraticVector { components } = &p.spec.objective else {
            return Err(format!("{}: no gradient oracle for this objective kind", f.name));
        };
        let qc = &components[0];
        if !qc.center_drift.is_empty() {
            return Err(format!("{}: drifting center not covered by the oracle", f.name));
        }
        let n = p.spec.space.n;
        let dp = problem_of(&p);
        for _ in 0..50 {
            let alpha: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
            // grad of 0.5 (x - c)^T H (x - c) is sym(H) (x - c)
            let grad: Vec<f64> = (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| 0.5 * (qc.hessian[i][j] + qc.hessian[j][i]) * (alpha[j] - qc.center[j]))
                        .sum()
                })
                .collect();
            let r = dp
                .steepest_descent_direction(&alpha, DEFAULT_GAP_TOL, DEFAULT_CRIT_TOL)
                .unwrap();
            let err =
                r.nu.iter()
                    .zip(&grad)
                    .map(|(v, g)| (v + g) * (v + g))
                    .sum::<f64>()
                    .sqrt();
            worst = worst.max(err);
        }
        checked += 1;
    }
    if checked == 0 {
        return Err("no scalar fixture in the catalog".into());
    }
    if worst > 1e-10 {
        return Err(format!("max |nu + grad F| = {worst:.3e}"));
    }
    Ok(format!(
        "{checked} scalar fixture(s) x 50 points, max |nu + grad F| = {worst:.2e}"
    ))
}

fn random_quadratic_problem(rng: &mut ChaCha8Rng) -> (FiberFamily, ObjectiveFamily) {
    let n = rng.gen_range(1..=4);
    let m = rng.gen_range(1..=4);
    let p = rng.gen_range(1..=6);
    let gens = random_generators(rng, p, m);
    let components = (0..m)
        .map(|_| {
            let b = common::random_points(rng, n, n, 1.0);
            // B^T B + 0.1 I
            let hessian = (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| {
                            ip(
                                &b.iter().map(|r| r[i]).collect::<Vec<_>>(),
                                &b.iter().map(|r| r[j]).collect::<Vec<_>>(),
                            ) + if i == j { 0.1 } else { 0.0 }
                        })
                        .collect()
                })
                .collect();
            QuadraticComponent {
                hessian,
                center: common::random_points(rng, 1, n, 2.0).remove(0),
                center_drift: vec![],
                offset: 0.0,
            }
        })
        .collect();
    (
        FiberFamily::constant(GeneratorSet::new(gens).unwrap(), unit_line(), 1.0).unwrap(),
        ObjectiveFamily::new(n, m, 0, ObjectiveKind::QuadraticVector { components }).unwrap(),
    )
}

fn criticality_and_descent() -> Outcome {
    let mut rng = common::rng(99);
    let order = OrderTolerance::default();
    let (mut sampled, mut descents, mut max_m, mut worst_k) = (0usize, 0usize, f64::NEG_INFINITY, 0usize);
    let mut check =
        |dp: &DescentProblem, alpha: &[f64], sampled: &mut usize, descents: &mut usize| -> Result<(), String> {
            let r = dp
                .steepest_descent_direction(alpha, DEFAULT_GAP_TOL, DEFAULT_CRIT_TOL)
                .map_err(|e| e.to_string())?;
            *sampled += 1;
            max_m = max_m.max(r.m_value);
            if r.m_value > 0.0 {
                return Err(format!("m = {} > 0 at {alpha:?}", r.m_value));
            }
            if r.m_value < -1e-8 {
                let fiber = dp.fiber().unwrap();
                let f0 = dp.objective().value(dp.s(), alpha).unwrap();
                let hit = (0..40).find(|&k| {
                    let t = 0.5f64.powi(k as i32);
                    let x: Vec<f64> = alpha.iter().zip(&r.nu).map(|(a, v)| a + t * v).collect();
                    let f1 = dp.objective().value(dp.s(), &x).unwrap();
                    fiber.lt(&f1, &f0, &order).unwrap()
                });
                match hit {
                    Some(k) => {
                        worst_k = worst_k.max(k);
                        *descents += 1;
                    }
                    None => {
                        return Err(format!(
                            "no strict decrease within 40 halvings at {alpha:?} (m = {})",
                            r.m_value
                        ))
                    }
                }
            }
            Ok(())
        };
    for f in catalog() {
        let p = fixture(f.name);
        let dp = problem_of(&p);
        for _ in 0..50 {
            let alpha: Vec<f64> = (0..p.spec.space.n).map(|_| rng.gen_range(-2.0..2.0)).collect();
            check(&dp, &alpha, &mut sampled, &mut descents).map_err(|e| format!("{}: {e}", f.name))?;
        }
    }
    for case in 0..200 {
        let (fam, obj) = random_quadratic_problem(&mut rng);
        let dp = DescentProblem::new(&fam, &obj, &[0.0], &[]).unwrap();
        let alpha: Vec<f64> = (0..obj.n()).map(|_| rng.gen_range(-2.0..2.0)).collect();
        check(&dp, &alpha, &mut sampled, &mut descents).map_err(|e| format!("random case {case}: {e}"))?;
    }
    let bi = fixture("biobjective_orthant");
    let m_sym = problem_of(&bi)
        .steepest_descent_direction(&[1.0, 0.0], DEFAULT_GAP_TOL, DEFAULT_CRIT_TOL)
        .unwrap()
        .m_value;
    if m_sym.abs() > 1e-12 {
        return Err(format!("m at (1,0) = {m_sym:e}"));
    }
    Ok(format!(
        "{sampled} samples, max m = {max_m:.2e}, {descents} strict descents (worst k = {worst_k}), m(1,0) = {m_sym:e}"
    ))
}

fn solve_convergence() -> Outcome {
    let p = fixture("biobjective_orthant");
    let tr = problem_of(&p)
        .solve(
            &[1.0, 1.0],
            &LineSearchParams::default(),
            DEFAULT_CRIT_TOL,
            DEFAULT_GAP_TOL,
            200,
        )
        .map_err(|e| e.to_string())?;
    let reached = tr.rows.iter().position(|r| nrm(&r.nu) <= 1e-6);
    let last = tr.last();
    let seg = distance_to_segment(&last.alpha, &[0.0, 0.0], &[2.0, 0.0]);
    match reached {
        Some(k) if k <= 200 && seg <= 1e-4 => Ok(format!(
            "|nu| <= 1e-6 at iteration {k}, final alpha {:?}, distance to segment {seg:.1e}",
            last.alpha
        )),
        _ => Err(format!(
            "reached = {reached:?}, distance to segment = {seg:e}, status {:?}",
            tr.status
        )),
    }
}

fn envelope_identities() -> Outcome {
    let mut rng = common::rng(31);
    let fams: Vec<Problem> = catalog().iter().map(|f| fixture(f.name)).collect();
    let (mut worst_id, mut lip_pairs, mut sup_triples) = (0.0f64, 0, 0);
    for k in 0..1000 {
        let p = &fams[k % fams.len()];
        let fam = &p.family;
        let m = fam.value_dim();
        let a = random_in_box(&mut rng, fam.domain());
        let x: Vec<f64> = (0..m).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let y: Vec<f64> = (0..m).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let ix = envelope(fam, &x, &a).unwrap();
        let iy = envelope(fam, &y, &a).unwrap();
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        let id = (ix + variational_gauge(fam, &a, &neg).unwrap()).abs();
        worst_id = worst_id.max(id);
        if id > 1e-14 {
            return Err(format!("identity off by {id:e}"));
        }
        let c_a = fam.fiber(&a).unwrap().max_norm();
        let bound = c_a * dist(&x, &y);
        if (ix - iy).abs() > bound * (1.0 + 1e-12) + 1e-14 {
            return Err(format!("Lipschitz bound violated: {} > {bound}", (ix - iy).abs()));
        }
        lip_pairs += 1;
        let sum: Vec<f64> = x.iter().zip(&y).map(|(u, v)| u + v).collect();
        let isum = envelope(fam, &sum, &a).unwrap();
        if isum < ix + iy - 1e-12 * (1.0 + ix.abs() + iy.abs()) {
            return Err(format!("superadditivity violated: {isum} < {ix} + {iy}"));
        }
        sup_triples += 1;
    }
    Ok(format!(
        "max identity error {worst_id:e}, {lip_pairs} Lipschitz pairs, {sup_triples} superadditive triples"
    ))
}

fn regularity_of(name: &str) -> RegularityReport {
    let p = fixture(name);
    let fam = &p.family;
    let specs = default_specs(fam.domain(), &p.spec.analysis.sequence.to_defaults()).unwrap();
    let mut probes = default_probes(fam.value_dim(), p.spec.analysis.seed);
    probes.extend(p.spec.analysis.probes.iter().cloned());
    c_regularity_verdict(
        fam,
        &p.spec.analysis.point,
        &specs,
        &probes,
        &RegularityTolerances::for_family(fam),
    )
    .unwrap()
}

fn probe_row<'a>(r: &'a RegularityReport, x: &[f64]) -> Option<&'a cone_descent::envelope::EnvelopeProbe> {
    r.envelope_crosscheck.iter().find(|p| p.x == x)
}

fn channel_equivalence() -> Outcome {
    let mut notes = Vec::new();
    for name in ["constant_orthant", "rotation"] {
        let r = regularity_of(name);
        let worst = r
            .per_sequence
            .iter()
            .flat_map(|s| [s.lsc_deficit, s.usc_deficit])
            .flatten()
            .fold(0.0, f64::max);
        if r.c_regular != Verdict::Regular || worst > 1e-6 || !r.channels.consistent {
            return Err(format!("{name}: verdict {:?}, max deficit {worst:e}", r.c_regular));
        }
        notes.push(format!("{name} regular ({worst:.1e})"));
    }
    let half = 0.5f64.sqrt();
    let pinch = regularity_of("pinch");
    let pp = probe_row(&pinch, &[-1.0, -1.0]).ok_or("pinch: designed probe missing")?;
    if (pinch.lsc_deficit - half).abs() > 1e-6 || pp.usc_gap <= 0.1 || !pinch.channels.consistent {
        return Err(format!(
            "pinch: lsc {} usc_gap {} consistent {}",
            pinch.lsc_deficit, pp.usc_gap, pinch.channels.consistent
        ));
    }
    notes.push(format!(
        "pinch lsc {:.7} / env-usc {:.2}",
        pinch.lsc_deficit, pp.usc_gap
    ));
    let expand = regularity_of("expand");
    let ep = probe_row(&expand, &[-1.0, -1.0]).ok_or("expand: designed probe missing")?;
    // escape distance of the extra generator (1,1) from the segment [(1,0),(0,1)]
    if (expand.usc_deficit - half).abs() > 1e-6 || ep.lsc_gap <= 0.1 || !expand.channels.consistent {
        return Err(format!("expand: usc {} lsc_gap {}", expand.usc_deficit, ep.lsc_gap));
    }
    notes.push(format!(
        "expand usc {:.7} / env-lsc {:.2}",
        expand.usc_deficit, ep.lsc_gap
    ));
    let jump = regularity_of("jump");
    let ch = jump.channels;
    let all = ch.fiber_lsc_flag && ch.fiber_usc_flag && ch.envelope_lsc_flag && ch.envelope_usc_flag;
    if jump.c_regular != Verdict::Irregular || !all || !ch.consistent {
        return Err(format!("jump: verdict {:?}, channels {ch:?}", jump.c_regular));
    }
    notes.push("jump irregular on both channels".into());
    Ok(notes.join("; "))
}

fn gauge_continuity() -> Outcome {
    let mut notes = Vec::new();
    for name in ["constant_orthant", "rotation"] {
        let r = run(&fixture(name), Operation::GaugeScan, &RunOptions::default()).map_err(|e| e.to_string())?;
        if r.summary["within_lipschitz_bound"] != serde_json::Value::Bool(true) {
            return Err(format!(
                "{name}: max jump {} exceeds the grid bound",
                r.summary["max_jump"]
            ));
        }
        notes.push(format!(
            "{name} max jump {:.2e}",
            r.summary["max_jump"].as_f64().unwrap()
        ));
    }
    let r = run(&fixture("jump"), Operation::GaugeScan, &RunOptions::default()).map_err(|e| e.to_string())?;
    let step = r.summary["grid_step"].as_f64().unwrap();
    // probe e_1: max over {(1,0),(0,1)} is 1, over {(2,0),(0,1)} is 2
    let e1 = r.summary["probes"]
        .as_array()
        .unwrap()
        .iter()
        .find(|p| p["x"] == serde_json::json!([1.0, 0.0]))
        .ok_or("jump: e_1 probe missing")?;
    let jump = e1["max_jump"].as_f64().unwrap();
    let at = e1["at"].as_f64().unwrap();
    if jump < 1.0 - 1e-3 || at.abs() > step {
        return Err(format!("jump: discontinuity {jump} at {at}"));
    }
    notes.push(format!("jump discontinuity {jump:.6} at a = {at:.3}"));
    Ok(notes.join("; "))
}

fn descent_map_continuity() -> Outcome {
    let radii = [1e-2, 1e-3, 1e-4, 1e-5, 1e-6];
    let mut notes = Vec::new();
    for name in ["constant_orthant", "rotation", "biobjective_orthant", "scalar_classic"] {
        let p = fixture(name);
        let tab = problem_of(&p)
            .continuity_probe(&p.alpha0(), &radii, DEFAULT_GAP_TOL)
            .map_err(|e| e.to_string())?;
        let last = tab.rows.last().unwrap().max_dnu;
        if !tab.is_monotone() || last > 1e-4 {
            let col: Vec<f64> = tab.rows.iter().map(|r| r.max_dnu).collect();
            return Err(format!("{name}: moduli {col:?}"));
        }
        notes.push(format!("{name} {last:.1e}"));
    }
    let p = fixture("jump_descent");
    let tab = problem_of(&p)
        .continuity_probe(&p.alpha0(), &radii, DEFAULT_GAP_TOL)
        .map_err(|e| e.to_string())?;
    // min-norm of {(1,1),(-1,1)} is (0,1); of {(1,1)} it is (1,1)
    let analytic = dist(&[0.0, -1.0], &[-1.0, -1.0]);
    for r in &tab.rows {
        if (r.max_dnu - analytic).abs() > 1e-3 {
            return Err(format!("jump_descent: |dnu| = {} at delta {}", r.max_dnu, r.delta));
        }
    }
    notes.push(format!("jump_descent |dnu| = {:.6}", tab.rows.last().unwrap().max_dnu));
    Ok(notes.join("; "))
}

fn limit_set_agreement() -> Outcome {
    let mut notes = Vec::new();
    for name in [
        "constant_orthant",
        "rotation",
        "jump",
        "pinch",
        "expand",
        "scalar_classic",
        "biobjective_orthant",
    ] {
        let r = regularity_of(name);
        let ls = r.limit_sets;
        if !ls.agree() {
            return Err(format!("{name}: c {:?}, c1 {:?}, c2 {:?}", ls.c, ls.c1, ls.c2));
        }
        notes.push(format!("{name}={}", ls.c.as_str()));
    }
    Ok(notes.join(", "))
}

fn minnorm_certificates() -> Outcome {
    let mut rng = common::rng(404);
    let mut worst_gap = f64::NEG_INFINITY;
    let mut converged = 0;
    for _ in 0..500 {
        let dim = rng.gen_range(1..=6);
        let p = rng.gen_range(1..=10);
        let pts = common::random_points(&mut rng, p, dim, 2.0);
        let r = min_norm_point(&pts, DEFAULT_GAP_TOL).unwrap();
        if r.converged {
            converged += 1;
            let g = r.certificate_gap(&pts);
            worst_gap = worst_gap.max(g);
            if g > DEFAULT_GAP_TOL {
                return Err(format!("certificate gap {g:e} above tolerance"));
            }
        }
    }
    let mut worst_oracle: f64 = 0.0;
    let mut count = 0;
    for dim in 1..=3 {
        for p in 1..=4 {
            for _ in 0..10 {
                let pts = common::random_points(&mut rng, p, dim, 2.0);
                let r = min_norm_point(&pts, DEFAULT_GAP_TOL).unwrap();
                let (grid, _) = common::simplex_grid_min_sq_norm(&pts, 200, 1);
                let d = (r.sq_norm - grid).abs();
                worst_oracle = worst_oracle.max(d);
                count += 1;
                if d > 2e-3 {
                    return Err(format!("dim {dim}, p {p}: solver {} vs grid {grid}", r.sq_norm));
                }
            }
        }
    }
    Ok(format!(
        "{converged}/500 converged, worst gap {worst_gap:.1e}; {count} oracle instances, worst |diff| {worst_oracle:.1e}"
    ))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("dual-primal equivalence", dual_primal),
        ("scalar reduction", scalar_reduction),
        ("criticality and descent", criticality_and_descent),
        ("solve convergence", solve_convergence),
        ("envelope identities", envelope_identities),
        ("channel equivalence", channel_equivalence),
        ("gauge continuity vs c-regularity", gauge_continuity),
        ("continuity of the descent map", descent_map_continuity),
        ("c/c1/c2 agreement", limit_set_agreement),
        ("min-norm certificates", minnorm_certificates),
    ];
    let start = Instant::now();
    let mut failed = 0;
    for (name, f) in criteria {
        let t = Instant::now();
        let res = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        match res {
            Ok(msg) => println!("PASS  {name}: {msg} [{:.2}s]", t.elapsed().as_secs_f64()),
            Err(msg) => {
                failed += 1;
                println!("FAIL  {name}: {msg} [{:.2}s]", t.elapsed().as_secs_f64());
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed in {:.1}s",
        10 - failed,
        start.elapsed().as_secs_f64()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
