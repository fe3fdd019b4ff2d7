//! Executes one analysis over a problem and renders the results as CSV
//! tables plus a JSON summary.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use log::{debug, info};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::descent::{DescentProblem, SolveStatus};
use crate::envelope::{
    c_regularity_verdict, check_fiber_conditions, default_probes, default_specs, uniform_grid, variational_gauge,
    RegularityTolerances,
};
use crate::error::Error;
use crate::linalg::norm;

use super::problem::{to_json, HarnessError, Problem};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Operation {
    Solve,
    Regularity,
    GaugeScan,
    ProbeContinuity,
}

impl Operation {
    pub const ALL: [Operation; 4] = [
        Operation::Solve,
        Operation::Regularity,
        Operation::GaugeScan,
        Operation::ProbeContinuity,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Operation::Solve => "solve",
            Operation::Regularity => "regularity",
            Operation::GaugeScan => "gauge-scan",
            Operation::ProbeContinuity => "probe-continuity",
        }
    }

    fn file_stem(&self) -> &'static str {
        match self {
            Operation::Solve => "solve",
            Operation::Regularity => "regularity",
            Operation::GaugeScan => "gauge_scan",
            Operation::ProbeContinuity => "probe_continuity",
        }
    }
}

impl FromStr for Operation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Operation::ALL
            .into_iter()
            .find(|op| op.as_str() == s)
            .ok_or_else(|| format!("unknown operation {s:?}"))
    }
}

/// Command-line overrides of values in the problem file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunOptions {
    pub tol_crit: Option<f64>,
    pub tol_haus: Option<f64>,
    pub tol_env: Option<f64>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    Csv,
    Json,
    #[default]
    Both,
}

impl FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            "both" => Ok(OutputFormat::Both),
            _ => Err(format!("unknown format {s:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Real(f64),
    Text(String),
}

impl Cell {
    fn render(&self, out: &mut String) {
        match self {
            Cell::Int(v) => write!(out, "{v}").unwrap(),
            Cell::Real(v) => write!(out, "{v:.16e}").unwrap(),
            Cell::Text(s) if s.contains([',', '"', '\n']) => write!(out, "\"{}\"", s.replace('"', "\"\"")).unwrap(),
            Cell::Text(s) => out.push_str(s),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Real(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Int(v as i64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    /// File stem of the CSV.
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    fn new(name: &str, header: Vec<String>) -> Self {
        Self {
            name: name.to_string(),
            header,
            rows: vec![],
        }
    }
}

fn indexed(prefix: &str, k: usize) -> Vec<String> {
    (1..=k).map(|i| format!("{prefix}_{i}")).collect()
}

fn reals(v: &[f64]) -> impl Iterator<Item = Cell> + '_ {
    v.iter().map(|x| Cell::Real(*x))
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub operation: Operation,
    pub run_id: String,
    pub inputs_digest: String,
    pub tables: Vec<Table>,
    pub summary: Value,
    /// 0 on success, 2 when the analysis ran but failed (e.g. a line-search stall).
    pub exit_code: i32,
    pub wall_time_s: f64,
}

impl RunReport {
    /// CSV with the fixed leading columns `run_id, operation, inputs_digest`
    /// and trailing `wall_time_s`.
    pub fn csv(&self, table: &Table) -> String {
        let mut out = String::from("run_id,operation,inputs_digest");
        for h in &table.header {
            out.push(',');
            out.push_str(h);
        }
        out.push_str(",wall_time_s\n");
        for row in &table.rows {
            out.push_str(&self.run_id);
            out.push(',');
            out.push_str(self.operation.as_str());
            out.push(',');
            out.push_str(&self.inputs_digest);
            for c in row {
                out.push(',');
                c.render(&mut out);
            }
            out.push(',');
            Cell::Real(self.wall_time_s).render(&mut out);
            out.push('\n');
        }
        out
    }

    pub fn summary_json(&self) -> String {
        let mut doc = json!({
            "run_id": self.run_id,
            "operation": self.operation.as_str(),
            "inputs_digest": self.inputs_digest,
            "exit_code": self.exit_code,
            "wall_time_s": self.wall_time_s,
            "tables": self.tables.iter().map(|t| format!("{}.csv", t.name)).collect::<Vec<_>>(),
        });
        doc["summary"] = self.summary.clone();
        let mut s = serde_json::to_string_pretty(&doc).expect("summary serializes");
        s.push('\n');
        s
    }
}

/// `sha256` over the canonical problem JSON, the operation, the seed and the overrides.
pub fn inputs_digest(problem: &Problem, op: Operation, opts: &RunOptions) -> String {
    let mut h = Sha256::new();
    h.update(to_json(&problem.spec).as_bytes());
    h.update(b"\n");
    h.update(op.as_str().as_bytes());
    h.update(b"\n");
    h.update(format!("{opts:?}").as_bytes());
    hex::encode(h.finalize())
}

fn analysis_err(e: Error) -> HarnessError {
    HarnessError::Analysis(e.to_string())
}

fn input_err(e: Error) -> HarnessError {
    HarnessError::Invalid(e.to_string())
}

fn positive(name: &str, v: Option<f64>) -> Result<(), HarnessError> {
    match v {
        Some(x) if !(x > 0.0 && x.is_finite()) => {
            Err(HarnessError::Invalid(format!("{name} must be positive, got {x}")))
        }
        _ => Ok(()),
    }
}

pub fn run(problem: &Problem, op: Operation, opts: &RunOptions) -> Result<RunReport, HarnessError> {
    positive("tol-crit", opts.tol_crit)?;
    positive("tol-haus", opts.tol_haus)?;
    positive("tol-env", opts.tol_env)?;
    let start = Instant::now();
    let digest = inputs_digest(problem, op, opts);
    info!("{} on digest {}", op.as_str(), &digest[..12]);
    let (tables, summary, exit_code) = match op {
        Operation::Solve => solve(problem, opts)?,
        Operation::Regularity => regularity(problem, opts)?,
        Operation::GaugeScan => gauge_scan(problem)?,
        Operation::ProbeContinuity => probe_continuity(problem, opts)?,
    };
    Ok(RunReport {
        operation: op,
        run_id: format!("{}-{}", op.as_str(), &digest[..12]),
        inputs_digest: digest,
        tables,
        summary,
        exit_code,
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

type Outcome = (Vec<Table>, Value, i32);

fn descent_problem(problem: &Problem) -> Result<DescentProblem<'_>, HarnessError> {
    let an = &problem.spec.analysis;
    DescentProblem::new(&problem.family, &problem.objective, &an.point, &an.s).map_err(input_err)
}

fn solve(problem: &Problem, opts: &RunOptions) -> Result<Outcome, HarnessError> {
    let an = &problem.spec.analysis;
    let n = problem.spec.space.n;
    let crit = opts.tol_crit.unwrap_or(an.tolerances.crit);
    let params = an.line_search.to_params();
    params.validate().map_err(input_err)?;
    let dp = descent_problem(problem)?;
    let trace = dp
        .solve(&problem.alpha0(), &params, crit, an.tolerances.gap, an.max_iter)
        .map_err(analysis_err)?;

    let mut header = vec!["iter".to_string()];
    header.extend(indexed("alpha", n));
    header.extend(indexed("nu", n));
    header.extend(["m".to_string(), "t".to_string()]);
    let mut table = Table::new("solve", header);
    for r in &trace.rows {
        let mut row = vec![Cell::from(r.iter)];
        row.extend(reals(&r.alpha));
        row.extend(reals(&r.nu));
        row.extend([Cell::Real(r.m), Cell::Real(r.t)]);
        table.rows.push(row);
    }
    let last = trace.last();
    let exit = match trace.status {
        SolveStatus::Critical => 0,
        _ => 2,
    };
    let summary = json!({
        "status": trace.status,
        "iterations": trace.iterations,
        "crit_tol": crit,
        "final_alpha": last.alpha,
        "final_nu": last.nu,
        "final_nu_norm": norm(&last.nu),
        "final_m": last.m,
        "all_steps_strict_decrease": trace.rows[..trace.iterations].iter().all(|r| r.strict_decrease),
    });
    Ok((vec![table], summary, exit))
}

fn probes_for(problem: &Problem, seed: u64) -> Vec<Vec<f64>> {
    let mut probes = default_probes(problem.spec.space.m, seed);
    probes.extend(problem.spec.analysis.probes.iter().cloned());
    probes
}

fn regularity(problem: &Problem, opts: &RunOptions) -> Result<Outcome, HarnessError> {
    let an = &problem.spec.analysis;
    let fam = &problem.family;
    let seed = opts.seed.unwrap_or(an.seed);
    let base = RegularityTolerances::for_family(fam);
    let tols = RegularityTolerances {
        haus: opts.tol_haus.or(an.tolerances.haus).unwrap_or(base.haus),
        env: opts.tol_env.or(an.tolerances.env).unwrap_or(base.env),
        gap_tol: an.tolerances.gap,
    };
    let specs = default_specs(fam.domain(), &an.sequence.to_defaults()).map_err(input_err)?;
    let probes = probes_for(problem, seed);
    let report = c_regularity_verdict(fam, &an.point, &specs, &probes, &tols).map_err(analysis_err)?;
    let conditions = check_fiber_conditions(fam, &uniform_grid(fam.domain(), 11)).map_err(analysis_err)?;

    let d = fam.param_dim();
    let m = fam.value_dim();
    let opt = |v: Option<f64>| Cell::Real(v.unwrap_or(f64::NAN));
    let mut header = vec!["sequence".to_string()];
    header.extend(indexed("direction", d));
    for h in [
        "r0",
        "ratio",
        "length",
        "usable",
        "lsc_deficit",
        "usc_deficit",
        "limit_distance",
        "cluster_distance",
        "cluster_hull_distance",
    ] {
        header.push(h.to_string());
    }
    let mut seq = Table::new("regularity", header);
    for s in &report.per_sequence {
        let mut row = vec![Cell::from(s.index)];
        row.extend(reals(&s.direction));
        row.extend([
            Cell::Real(s.r0),
            Cell::Real(s.ratio),
            Cell::from(s.length),
            Cell::from(s.usable),
            opt(s.lsc_deficit),
            opt(s.usc_deficit),
            opt(s.limit_distance),
            opt(s.cluster_distance),
            opt(s.cluster_hull_distance),
        ]);
        seq.rows.push(row);
    }

    let mut header = vec!["probe".to_string()];
    header.extend(indexed("x", m));
    for h in ["liminf_est", "value", "limsup_est", "lsc_gap", "usc_gap"] {
        header.push(h.to_string());
    }
    let mut env = Table::new("regularity_probes", header);
    for (k, p) in report.envelope_crosscheck.iter().enumerate() {
        let mut row = vec![Cell::from(k)];
        row.extend(reals(&p.x));
        row.extend(reals(&[p.liminf_est, p.value, p.limsup_est, p.lsc_gap, p.usc_gap]));
        env.rows.push(row);
    }

    let summary = json!({
        "verdict": report.c_regular,
        "lsc_deficit": report.lsc_deficit,
        "usc_deficit": report.usc_deficit,
        "envelope_lsc_gap": report.envelope_lsc_gap,
        "envelope_usc_gap": report.envelope_usc_gap,
        "limit_sets": report.limit_sets,
        "limit_sets_agree": report.limit_sets.agree(),
        "limit_clouds_nonempty": report.limit_clouds_nonempty,
        "channels": report.channels,
        "tolerances": report.tolerances,
        "point": report.point,
        "seed": seed,
        "fiber_conditions": {
            "passed": conditions.passed,
            "points_checked": conditions.points_checked,
            "bound": conditions.bound,
            "max_norm": conditions.max_norm,
            "violations": conditions.violations,
            "not_spanning": conditions.not_spanning.len(),
        },
        "caveat": report.caveat,
    });
    Ok((vec![seq, env], summary, 0))
}

fn gauge_scan(problem: &Problem) -> Result<Outcome, HarnessError> {
    let an = &problem.spec.analysis;
    let fam = &problem.family;
    let sc = &an.scan;
    let dom = fam.domain();
    let lo = sc.lower.unwrap_or(dom.lower()[sc.axis]);
    let hi = sc.upper.unwrap_or(dom.upper()[sc.axis]);
    if !(lo < hi) {
        return Err(HarnessError::Invalid(format!("empty scan interval [{lo}, {hi}]")));
    }
    let m = fam.value_dim();
    let mut probes = default_probes(m, 0);
    probes.truncate(2 * m);
    probes.extend(an.probes.iter().cloned());

    let h = (hi - lo) / (sc.points - 1) as f64;
    let lip = fam.param_lipschitz();
    let mut header = vec!["index".to_string()];
    header.extend(indexed("a", fam.param_dim()));
    header.extend(indexed("gauge", probes.len()));
    let mut table = Table::new("gauge_scan", header);
    let mut prev: Option<(Vec<f64>, Vec<f64>)> = None;
    let mut jumps = vec![(0.0f64, f64::NAN); probes.len()];
    for i in 0..sc.points {
        let mut a = an.point.clone();
        a[sc.axis] = if i + 1 == sc.points { hi } else { lo + h * i as f64 };
        if !dom.contains(&a) {
            return Err(HarnessError::Invalid(format!(
                "scan point {a:?} lies outside the domain"
            )));
        }
        let g = probes
            .iter()
            .map(|x| variational_gauge(fam, &a, x))
            .collect::<Result<Vec<f64>, _>>()
            .map_err(analysis_err)?;
        if let Some((pa, pg)) = &prev {
            for (k, (v, pv)) in g.iter().zip(pg).enumerate() {
                let jump = (v - pv).abs();
                if jump > jumps[k].0 {
                    jumps[k] = (jump, 0.5 * (a[sc.axis] + pa[sc.axis]));
                }
            }
        }
        let mut row = vec![Cell::from(i)];
        row.extend(reals(&a));
        row.extend(reals(&g));
        table.rows.push(row);
        prev = Some((a, g));
    }

    let per_probe: Vec<Value> = probes
        .iter()
        .zip(&jumps)
        .map(|(x, (jump, at))| {
            let bound = lip.map(|l| l * h * norm(x));
            json!({
                "x": x,
                "max_jump": jump,
                "at": if at.is_nan() { Value::Null } else { json!(at) },
                "lipschitz_bound": bound,
                "within_bound": bound.map(|b| *jump <= b * (1.0 + 1e-9) + 1e-12),
            })
        })
        .collect();
    let max_jump = jumps.iter().map(|j| j.0).fold(0.0, f64::max);
    let continuous = lip.map(|l| {
        probes
            .iter()
            .zip(&jumps)
            .all(|(x, (j, _))| *j <= l * h * norm(x) * (1.0 + 1e-9) + 1e-12)
    });
    debug!("gauge scan: max jump {max_jump:e}");
    let summary = json!({
        "axis": sc.axis,
        "interval": [lo, hi],
        "points": sc.points,
        "grid_step": h,
        "param_lipschitz": lip,
        "max_jump": max_jump,
        "within_lipschitz_bound": continuous,
        "probes": per_probe,
    });
    Ok((vec![table], summary, 0))
}

fn probe_continuity(problem: &Problem, opts: &RunOptions) -> Result<Outcome, HarnessError> {
    let an = &problem.spec.analysis;
    let dp = descent_problem(problem)?;
    let alpha = problem.alpha0();
    let crit = opts.tol_crit.unwrap_or(an.tolerances.crit);
    let base = dp
        .steepest_descent_direction(&alpha, an.tolerances.gap, crit)
        .map_err(analysis_err)?;
    let tab = dp
        .continuity_probe(&alpha, &an.radii, an.tolerances.gap)
        .map_err(analysis_err)?;
    let header = ["delta", "max_dnu", "max_dm", "evaluated", "skipped"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let mut table = Table::new("probe_continuity", header);
    for r in &tab.rows {
        table.rows.push(vec![
            Cell::Real(r.delta),
            Cell::Real(r.max_dnu),
            Cell::Real(r.max_dm),
            Cell::from(r.evaluated),
            Cell::from(r.skipped),
        ]);
    }
    let smallest = tab
        .rows
        .iter()
        .rev()
        .find(|r| r.delta > 0.0)
        .map(|r| json!({"delta": r.delta, "max_dnu": r.max_dnu, "max_dm": r.max_dm}));
    let summary = json!({
        "alpha": alpha,
        "nu": base.nu,
        "m": base.m_value,
        "critical": base.critical,
        "fitted_slope": tab.fitted_slope,
        "monotone": tab.is_monotone(),
        "smallest_positive_radius": smallest,
    });
    Ok((vec![table], summary, 0))
}

/// Writes the CSV tables and/or the JSON summary into `out_dir`, creating it if needed.
pub fn write_report(report: &RunReport, out_dir: &Path, format: OutputFormat) -> Result<Vec<PathBuf>, HarnessError> {
    let io = |p: &Path, e: std::io::Error| HarnessError::Io {
        path: p.display().to_string(),
        message: e.to_string(),
    };
    std::fs::create_dir_all(out_dir).map_err(|e| io(out_dir, e))?;
    let mut written = Vec::new();
    if matches!(format, OutputFormat::Csv | OutputFormat::Both) {
        for t in &report.tables {
            let path = out_dir.join(format!("{}.csv", t.name));
            std::fs::write(&path, report.csv(t)).map_err(|e| io(&path, e))?;
            written.push(path);
        }
    }
    if matches!(format, OutputFormat::Json | OutputFormat::Both) {
        let path = out_dir.join(format!("{}_summary.json", report.operation.file_stem()));
        std::fs::write(&path, report.summary_json()).map_err(|e| io(&path, e))?;
        written.push(path);
    }
    Ok(written)
}
