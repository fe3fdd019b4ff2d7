//! Problem files: JSON documents with exactly four sections, `space`,
//! `cone_family`, `objective` and `analysis`.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::error::Category;
use thiserror::Error;

use crate::cone::GeneratorSet;
use crate::envelope::{DomainBox, FiberFamily, FiberKind, SequenceDefaults};
use crate::error::Error;
use crate::objective::{ObjectiveFamily, ObjectiveKind};

/// One problem with a location inside the document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub path: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

fn joined(v: &[Violation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HarnessError {
    #[error("cannot access {path}: {message}")]
    Io { path: String, message: String },

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("schema violation: {}", joined(.0))]
    Schema(Vec<Violation>),

    #[error("dimension inconsistency: {}", joined(.0))]
    Dimension(Vec<Violation>),

    #[error("invalid problem: {0}")]
    Invalid(String),

    #[error("analysis failed: {0}")]
    Analysis(String),
}

impl HarnessError {
    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            HarnessError::Io { .. } => "io",
            HarnessError::Parse { .. } => "parse",
            HarnessError::Schema(_) => "schema",
            HarnessError::Dimension(_) => "dimension",
            HarnessError::Invalid(_) => "invalid",
            HarnessError::Analysis(_) => "analysis",
        }
    }

    /// 1 for anything wrong with the inputs, 2 for failures of the analysis itself.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Analysis(_) => 2,
            _ => 1,
        }
    }

    pub fn violations(&self) -> &[Violation] {
        match self {
            HarnessError::Schema(v) | HarnessError::Dimension(v) => v,
            _ => &[],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxSpec {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceSpec {
    pub n: usize,
    pub m: usize,
    pub d: usize,
    pub q: usize,
    /// Admissible box for the objective parameter `s`; unbounded if absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s_domain: Option<BoxSpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConeKind {
    Constant,
    Rotation,
    Jump,
    Pinch,
    Expand,
    Interpolation,
    Table,
}

impl ConeKind {
    fn fields(self) -> &'static [&'static str] {
        match self {
            ConeKind::Constant => &["base"],
            ConeKind::Rotation => &["base", "rate"],
            ConeKind::Jump => &["below", "above", "breakpoint"],
            ConeKind::Pinch | ConeKind::Expand => &["center", "at_center", "elsewhere"],
            ConeKind::Interpolation => &["nodes", "sets"],
            ConeKind::Table => &["entries"],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableEntrySpec {
    pub at: Vec<f64>,
    pub generators: Vec<Vec<f64>>,
}

/// Flat description of a fiber family; which optional fields are required
/// depends on `kind`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConeFamilySpec {
    pub kind: ConeKind,
    pub domain: BoxSpec,
    pub bound: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub driver: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub below: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub above: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub breakpoint: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub at_center: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elsewhere: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nodes: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sets: Option<Vec<Vec<Vec<f64>>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub entries: Option<Vec<TableEntrySpec>>,
}

impl ConeFamilySpec {
    fn present_fields(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        let mut mark = |name: &'static str, present: bool| {
            if present {
                out.push(name);
            }
        };
        mark("base", self.base.is_some());
        mark("rate", self.rate.is_some());
        mark("below", self.below.is_some());
        mark("above", self.above.is_some());
        mark("breakpoint", self.breakpoint.is_some());
        mark("center", self.center.is_some());
        mark("at_center", self.at_center.is_some());
        mark("elsewhere", self.elsewhere.is_some());
        mark("nodes", self.nodes.is_some());
        mark("sets", self.sets.is_some());
        mark("entries", self.entries.is_some());
        out
    }
}

fn default_crit() -> f64 {
    crate::descent::DEFAULT_CRIT_TOL
}

fn default_gap() -> f64 {
    crate::minnorm::DEFAULT_GAP_TOL
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TolerancesSpec {
    #[serde(default = "default_crit")]
    pub crit: f64,
    #[serde(default = "default_gap")]
    pub gap: f64,
    /// Defaults to `1e-6 * bound`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub haus: Option<f64>,
    /// Defaults to `1e-6 * bound`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub env: Option<f64>,
}

impl Default for TolerancesSpec {
    fn default() -> Self {
        Self {
            crit: default_crit(),
            gap: default_gap(),
            haus: None,
            env: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SequenceSpecDto {
    #[serde(default = "SequenceSpecDto::directions")]
    pub directions: usize,
    #[serde(default = "SequenceSpecDto::length")]
    pub length: usize,
    #[serde(default = "SequenceSpecDto::ratio")]
    pub ratio: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r0: Option<f64>,
}

impl SequenceSpecDto {
    fn directions() -> usize {
        SequenceDefaults::default().directions
    }
    fn length() -> usize {
        SequenceDefaults::default().length
    }
    fn ratio() -> f64 {
        SequenceDefaults::default().ratio
    }

    pub fn to_defaults(&self) -> SequenceDefaults {
        SequenceDefaults {
            directions: self.directions,
            length: self.length,
            ratio: self.ratio,
            r0: self.r0,
        }
    }
}

impl Default for SequenceSpecDto {
    fn default() -> Self {
        Self {
            directions: Self::directions(),
            length: Self::length(),
            ratio: Self::ratio(),
            r0: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LineSearchSpec {
    #[serde(default = "LineSearchSpec::sigma")]
    pub sigma: f64,
    #[serde(default = "LineSearchSpec::beta")]
    pub beta: f64,
    #[serde(default = "LineSearchSpec::t0")]
    pub t0: f64,
    #[serde(default = "LineSearchSpec::max_backtracks")]
    pub max_backtracks: usize,
}

impl LineSearchSpec {
    fn sigma() -> f64 {
        crate::descent::LineSearchParams::default().sigma
    }
    fn beta() -> f64 {
        crate::descent::LineSearchParams::default().beta
    }
    fn t0() -> f64 {
        crate::descent::LineSearchParams::default().t0
    }
    fn max_backtracks() -> usize {
        crate::descent::LineSearchParams::default().max_backtracks
    }

    pub fn to_params(&self) -> crate::descent::LineSearchParams {
        crate::descent::LineSearchParams {
            sigma: self.sigma,
            beta: self.beta,
            t0: self.t0,
            max_backtracks: self.max_backtracks,
        }
    }
}

impl Default for LineSearchSpec {
    fn default() -> Self {
        Self {
            sigma: Self::sigma(),
            beta: Self::beta(),
            t0: Self::t0(),
            max_backtracks: Self::max_backtracks(),
        }
    }
}

/// Grid for `gauge-scan`: coordinate `axis` of the parameter runs over
/// `[lower, upper]` (the domain edges by default); the other coordinates
/// are taken from `analysis.point`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanSpec {
    #[serde(default)]
    pub axis: usize,
    #[serde(default = "ScanSpec::points")]
    pub points: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lower: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub upper: Option<f64>,
}

impl ScanSpec {
    fn points() -> usize {
        201
    }
}

impl Default for ScanSpec {
    fn default() -> Self {
        Self {
            axis: 0,
            points: Self::points(),
            lower: None,
            upper: None,
        }
    }
}

fn default_seed() -> u64 {
    42
}

fn default_max_iter() -> usize {
    200
}

pub fn default_radii() -> Vec<f64> {
    vec![1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 0.0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisSpec {
    /// Parameter `a` of the fiber family.
    pub point: Vec<f64>,
    /// Objective parameter.
    #[serde(default)]
    pub s: Vec<f64>,
    /// Start of `solve` and base point of `probe-continuity`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha0: Option<Vec<f64>>,
    #[serde(default)]
    pub tolerances: TolerancesSpec,
    #[serde(default)]
    pub sequence: SequenceSpecDto,
    /// Extra probe directions, appended to the defaults.
    #[serde(default)]
    pub probes: Vec<Vec<f64>>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub line_search: LineSearchSpec,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default = "default_radii")]
    pub radii: Vec<f64>,
    #[serde(default)]
    pub scan: ScanSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub space: SpaceSpec,
    pub cone_family: ConeFamilySpec,
    pub objective: ObjectiveKind,
    pub analysis: AnalysisSpec,
}

/// A validated problem with its core objects built.
#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    pub spec: ProblemSpec,
    pub family: FiberFamily,
    pub objective: ObjectiveFamily,
}

impl Problem {
    pub fn alpha0(&self) -> Vec<f64> {
        self.spec
            .analysis
            .alpha0
            .clone()
            .unwrap_or_else(|| vec![0.0; self.spec.space.n])
    }
}

/// Parses a document without semantic validation.
pub fn parse_spec(text: &str) -> Result<ProblemSpec, HarnessError> {
    let mut de = serde_json::Deserializer::from_str(text);
    let spec = serde_path_to_error::deserialize::<_, ProblemSpec>(&mut de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        match inner.classify() {
            Category::Data => HarnessError::Schema(vec![Violation {
                path,
                message: strip_position(&inner.to_string()),
            }]),
            _ => HarnessError::Parse {
                line: inner.line(),
                column: inner.column(),
                message: strip_position(&inner.to_string()),
            },
        }
    })?;
    de.end().map_err(|e| HarnessError::Parse {
        line: e.line(),
        column: e.column(),
        message: strip_position(&e.to_string()),
    })?;
    Ok(spec)
}

fn strip_position(msg: &str) -> String {
    match msg.find(" at line ") {
        Some(i) => msg[..i].to_string(),
        None => msg.to_string(),
    }
}

pub fn parse_problem(text: &str) -> Result<Problem, HarnessError> {
    build(parse_spec(text)?)
}

pub fn load_problem(path: &Path) -> Result<Problem, HarnessError> {
    let bytes = std::fs::read(path).map_err(|e| HarnessError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    let text = String::from_utf8(bytes).map_err(|e| HarnessError::Parse {
        line: 0,
        column: 0,
        message: format!("file is not valid UTF-8: {e}"),
    })?;
    parse_problem(&text)
}

pub fn to_json(spec: &ProblemSpec) -> String {
    serde_json::to_string_pretty(spec).expect("problem specs always serialize")
}

#[derive(Default)]
struct Checks {
    schema: Vec<Violation>,
    dims: Vec<Violation>,
}

impl Checks {
    fn schema(&mut self, path: impl Into<String>, message: impl Into<String>) {
        self.schema.push(Violation {
            path: path.into(),
            message: message.into(),
        });
    }

    fn dim(&mut self, path: impl Into<String>, expected: usize, found: usize) {
        if expected != found {
            self.dims.push(Violation {
                path: path.into(),
                message: format!("expected length {expected}, found {found}"),
            });
        }
    }

    fn positive(&mut self, path: &str, v: f64) {
        if !(v > 0.0 && v.is_finite()) {
            self.schema(path, format!("must be positive and finite, got {v}"));
        }
    }

    fn generators(&mut self, path: &str, pts: &[Vec<f64>], m: usize) {
        if pts.is_empty() {
            self.schema(path, "at least one generator is required");
        }
        for (i, p) in pts.iter().enumerate() {
            if p.len() != m {
                self.schema(
                    format!("{path}[{i}]"),
                    format!("generator has length {}, expected m = {m}", p.len()),
                );
            } else if p.iter().any(|v| !v.is_finite()) {
                self.schema(format!("{path}[{i}]"), "generator entries must be finite");
            }
        }
    }
}

fn domain_of(b: &BoxSpec) -> Result<DomainBox, HarnessError> {
    DomainBox::new(b.lower.clone(), b.upper.clone()).map_err(|e| HarnessError::Invalid(e.to_string()))
}

fn gens(pts: &Option<Vec<Vec<f64>>>) -> Result<GeneratorSet, HarnessError> {
    GeneratorSet::new(pts.clone().unwrap_or_default()).map_err(|e| HarnessError::Invalid(e.to_string()))
}

/// Validates a parsed document and builds the fiber and objective families.
pub fn build(spec: ProblemSpec) -> Result<Problem, HarnessError> {
    let mut ck = Checks::default();
    let sp = &spec.space;
    let cf = &spec.cone_family;
    let an = &spec.analysis;

    if sp.n == 0 || sp.m == 0 || sp.d == 0 {
        ck.schema("space", "n, m and d must be positive");
    }

    let needed = cf.kind.fields();
    for f in needed {
        if !cf.present_fields().contains(f) {
            ck.schema(
                format!("cone_family.{f}"),
                format!("required for kind {:?}", cf.kind).to_lowercase(),
            );
        }
    }
    for f in cf.present_fields() {
        if !needed.contains(&f) {
            ck.schema(
                format!("cone_family.{f}"),
                format!("not used by kind {:?}", cf.kind).to_lowercase(),
            );
        }
    }
    ck.positive("cone_family.bound", cf.bound);
    for (name, set) in [
        ("base", &cf.base),
        ("below", &cf.below),
        ("above", &cf.above),
        ("at_center", &cf.at_center),
        ("elsewhere", &cf.elsewhere),
    ] {
        if let Some(pts) = set {
            ck.generators(&format!("cone_family.{name}"), pts, sp.m);
        }
    }
    if let Some(sets) = &cf.sets {
        for (k, pts) in sets.iter().enumerate() {
            ck.generators(&format!("cone_family.sets[{k}]"), pts, sp.m);
        }
    }
    if let Some(entries) = &cf.entries {
        if entries.is_empty() {
            ck.schema("cone_family.entries", "at least one entry is required");
        }
        for (k, e) in entries.iter().enumerate() {
            ck.generators(&format!("cone_family.entries[{k}].generators"), &e.generators, sp.m);
            ck.dim(format!("cone_family.entries[{k}].at"), sp.d, e.at.len());
        }
    }

    let t = &an.tolerances;
    ck.positive("analysis.tolerances.crit", t.crit);
    ck.positive("analysis.tolerances.gap", t.gap);
    if let Some(h) = t.haus {
        ck.positive("analysis.tolerances.haus", h);
    }
    if let Some(e) = t.env {
        ck.positive("analysis.tolerances.env", e);
    }
    if an.scan.points < 2 {
        ck.schema("analysis.scan.points", "at least two points are required");
    }
    if an.radii.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
        ck.schema("analysis.radii", "radii must be finite and nonnegative");
    } else if an.radii.windows(2).any(|w| w[1] > w[0]) {
        ck.schema("analysis.radii", "radii must be nonincreasing");
    }

    ck.dim("cone_family.domain.lower", sp.d, cf.domain.lower.len());
    ck.dim("cone_family.domain.upper", sp.d, cf.domain.upper.len());
    if let Some(w) = &cf.driver {
        ck.dim("cone_family.driver", sp.d, w.len());
    }
    if let Some(b) = &sp.s_domain {
        ck.dim("space.s_domain.lower", sp.q, b.lower.len());
        ck.dim("space.s_domain.upper", sp.q, b.upper.len());
    }
    ck.dim("analysis.point", sp.d, an.point.len());
    ck.dim("analysis.s", sp.q, an.s.len());
    if let Some(a0) = &an.alpha0 {
        ck.dim("analysis.alpha0", sp.n, a0.len());
    }
    for (k, p) in an.probes.iter().enumerate() {
        ck.dim(format!("analysis.probes[{k}]"), sp.m, p.len());
    }
    if an.scan.axis >= sp.d.max(1) {
        ck.dims.push(Violation {
            path: "analysis.scan.axis".into(),
            message: format!("axis {} out of range for d = {}", an.scan.axis, sp.d),
        });
    }

    if !ck.schema.is_empty() {
        return Err(HarnessError::Schema(ck.schema));
    }
    if !ck.dims.is_empty() {
        return Err(HarnessError::Dimension(ck.dims));
    }

    let objective = ObjectiveFamily::new(sp.n, sp.m, sp.q, spec.objective.clone()).map_err(|e| match e {
        Error::DimensionMismatch { .. } => HarnessError::Dimension(vec![Violation {
            path: "objective".into(),
            message: e.to_string(),
        }]),
        other => HarnessError::Invalid(format!("objective: {other}")),
    })?;
    let objective = match &sp.s_domain {
        Some(b) => objective
            .with_param_domain(domain_of(b)?)
            .map_err(|e| HarnessError::Invalid(e.to_string()))?,
        None => objective,
    };

    let kind = match cf.kind {
        ConeKind::Constant => FiberKind::Constant { base: gens(&cf.base)? },
        ConeKind::Rotation => FiberKind::Rotation {
            base: gens(&cf.base)?,
            rate: cf.rate.unwrap_or_default(),
        },
        ConeKind::Jump => FiberKind::Jump {
            below: gens(&cf.below)?,
            above: gens(&cf.above)?,
            breakpoint: cf.breakpoint.unwrap_or_default(),
        },
        ConeKind::Pinch => FiberKind::Pinch {
            center: cf.center.unwrap_or_default(),
            at_center: gens(&cf.at_center)?,
            elsewhere: gens(&cf.elsewhere)?,
        },
        ConeKind::Expand => FiberKind::Expand {
            center: cf.center.unwrap_or_default(),
            at_center: gens(&cf.at_center)?,
            elsewhere: gens(&cf.elsewhere)?,
        },
        ConeKind::Interpolation => FiberKind::Interpolation {
            nodes: cf.nodes.clone().unwrap_or_default(),
            sets: cf.sets.clone().unwrap_or_default(),
        },
        ConeKind::Table => FiberKind::Table {
            entries: cf
                .entries
                .iter()
                .flatten()
                .map(|e| Ok((e.at.clone(), gens(&Some(e.generators.clone()))?)))
                .collect::<Result<_, HarnessError>>()?,
        },
    };
    let family = FiberFamily::new(kind, domain_of(&cf.domain)?, cf.bound, cf.driver.clone())
        .map_err(|e| HarnessError::Invalid(format!("cone_family: {e}")))?;
    if !family.domain().contains(&an.point) {
        return Err(HarnessError::Invalid(format!(
            "analysis.point {:?} lies outside the cone_family domain",
            an.point
        )));
    }
    if !objective.admits(&an.s) {
        return Err(HarnessError::Invalid(format!(
            "analysis.s {:?} lies outside space.s_domain",
            an.s
        )));
    }
    Ok(Problem {
        spec,
        family,
        objective,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "space": {"n": 2, "m": 2, "d": 1, "q": 0},
        "cone_family": {"kind": "constant", "domain": {"lower": [-1], "upper": [1]}, "bound": 1,
                        "base": [[1, 0], [0, 1]]},
        "objective": {"kind": "affine", "matrix": [[1, 0], [0, 1]]},
        "analysis": {"point": [0]}
    }"#;

    #[test]
    fn minimal_document_gets_defaults() {
        let p = parse_problem(MINIMAL).unwrap();
        assert_eq!(p.spec.analysis.seed, 42);
        assert_eq!(p.spec.analysis.max_iter, 200);
        assert_eq!(p.spec.analysis.tolerances.crit, 1e-8);
        assert_eq!(p.spec.analysis.sequence.length, 48);
        assert_eq!(p.alpha0(), vec![0.0, 0.0]);
        let again = parse_spec(&to_json(&p.spec)).unwrap();
        assert_eq!(again, p.spec);
    }

    #[test]
    fn error_codes() {
        assert_eq!(parse_spec("").unwrap_err().code(), "parse");
        assert_eq!(parse_spec("{").unwrap_err().code(), "parse");
        assert_eq!(parse_spec(&format!("{MINIMAL} x")).unwrap_err().code(), "parse");

        let extra = MINIMAL.replacen("\"analysis\"", "\"bogus\": 1, \"analysis\"", 1);
        let e = parse_spec(&extra).unwrap_err();
        assert_eq!(e.code(), "schema");

        let three = MINIMAL.replace("[[1, 0], [0, 1]]}", "[[1, 0, 0], [0, 1, 0]]}");
        let e = parse_problem(&three).unwrap_err();
        assert_eq!(e.code(), "schema");
        assert_eq!(e.violations()[0].path, "cone_family.base[0]");

        let point = MINIMAL.replace("\"point\": [0]", "\"point\": [0, 0]");
        let e = parse_problem(&point).unwrap_err();
        assert_eq!(e.code(), "dimension");
        assert_eq!(e.violations()[0].path, "analysis.point");

        let obj = MINIMAL.replace("\"matrix\": [[1, 0], [0, 1]]", "\"matrix\": [[1, 0, 0], [0, 1, 0]]");
        let e = parse_problem(&obj).unwrap_err();
        assert_eq!(e.code(), "dimension", "{e}");
    }

    #[test]
    fn nested_paths_from_serde() {
        let bad = MINIMAL.replace("\"bound\": 1", "\"bound\": \"one\"");
        let e = parse_spec(&bad).unwrap_err();
        assert_eq!(e.code(), "schema");
        assert_eq!(e.violations()[0].path, "cone_family.bound");
    }

    #[test]
    fn kind_fields_are_checked() {
        let missing = MINIMAL.replace("\"kind\": \"constant\"", "\"kind\": \"rotation\"");
        let e = parse_problem(&missing).unwrap_err();
        assert_eq!(e.violations()[0].path, "cone_family.rate");
        let stray = MINIMAL.replace("\"bound\": 1,", "\"bound\": 1, \"rate\": 2,");
        let e = parse_problem(&stray).unwrap_err();
        assert_eq!(e.violations()[0].path, "cone_family.rate");
    }

    #[test]
    fn exit_codes() {
        assert_eq!(HarnessError::Analysis("x".into()).exit_code(), 2);
        assert_eq!(HarnessError::Invalid("x".into()).exit_code(), 1);
        assert_eq!(parse_spec("").unwrap_err().exit_code(), 1);
    }
}
