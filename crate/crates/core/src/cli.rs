//! Command line front end: argument parsing and record output.

use std::fmt;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use crate::ancient::{ancient_iterate, ancient_region_scan};
use crate::einstein::{
    einstein_list, is_einstein, sp1_uniqueness_scan, uniqueness_point, CatalogFamily,
    EinsteinShape, UniquenessScan,
};
use crate::error::RicciError;
use crate::geometry::{
    positivity_check, ricci_four_param, ricci_su2, ricci_two_summand, DiagonalForm3, FamilyMetric,
    FibrationFamily, FibrationKind, FourParamForm, FourParamMetric, Su2Metric, TwoSummandMetric,
};
use crate::iteration::{
    iterate_four_param, iterate_four_param_near_round, iterate_su2, iterate_two_summand,
    FMapConfig, IterationTrace,
};
use crate::prescribed::{
    c_function, solvability_predicates, solve_four_param_homotopy, solve_su2, solve_two_summand,
    two_summand_threshold, CBranch, HomotopyOptions, Su2SolveOptions,
};

#[derive(Debug, Clone, Parser)]
#[command(
    name = "hopf-ricci",
    version,
    about = "Ricci curvature, prescribed Ricci curvature and Ricci iteration on homogeneous spheres"
)]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub params: Params,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Ricci curvature of a metric.
    Ricci { family: FamilyArg },
    /// Solve Ric g = κ T for a prescribed form T.
    Solve { family: FamilyArg },
    /// The SU(2) constant c(T1, T2, T3).
    CFunction,
    /// Forward Ricci iteration, one record per step.
    Iterate { family: FamilyArg },
    /// Backward Ricci iteration, one summary record.
    Ancient { family: FamilyArg },
    /// Einstein metrics of a family.
    Einstein { family: FamilyArg },
    /// Parameter region scans.
    Scan {
        #[command(subcommand)]
        kind: ScanKind,
    },
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum ScanKind {
    /// Solvability of the prescribed Ricci equation over a grid.
    Solvability,
    /// Lifetime of the backward iteration over a grid.
    Ancient,
    /// Search for non-Sp(1)-invariant metrics with Sp(1)-invariant Ricci curvature.
    Uniqueness,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    Su2,
    Circle,
    Sp1,
    Spin7,
    Cp,
    FourParam,
}

impl FamilyArg {
    fn fibration(self, n: u32) -> Option<Result<FibrationFamily, RicciError>> {
        let kind = match self {
            FamilyArg::Circle => FibrationKind::CircleFiberSphere,
            FamilyArg::Sp1 => FibrationKind::Sp1FiberSphere,
            FamilyArg::Spin7 => FibrationKind::Spin7FiberSphere,
            FamilyArg::Cp => FibrationKind::CP1FiberProjective,
            FamilyArg::Su2 | FamilyArg::FourParam => return None,
        };
        Some(FibrationFamily::new(kind, n))
    }

    fn label(self) -> &'static str {
        match self {
            FamilyArg::Su2 => "su2",
            FamilyArg::Circle => "circle",
            FamilyArg::Sp1 => "sp1",
            FamilyArg::Spin7 => "spin7",
            FamilyArg::Cp => "cp",
            FamilyArg::FourParam => "four-param",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    JsonLines,
    Csv,
}

/// `lo:hi:count`, inclusive of both ends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

impl GridSpec {
    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.lo];
        }
        let step = (self.hi - self.lo) / (self.count - 1) as f64;
        (0..self.count)
            .map(|k| {
                if k + 1 == self.count {
                    self.hi
                } else {
                    self.lo + step * k as f64
                }
            })
            .collect()
    }
}

impl FromStr for GridSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let [lo, hi, count] = parts[..] else {
            return Err(format!("expected lo:hi:count, got '{s}'"));
        };
        let parse = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("'{v}': {e}"));
        let (lo, hi) = (parse(lo)?, parse(hi)?);
        let count: usize = count
            .trim()
            .parse()
            .map_err(|e| format!("'{count}': {e}"))?;
        if count == 0 {
            return Err("grid count must be at least 1".into());
        }
        if !(lo.is_finite() && hi.is_finite()) || hi < lo {
            return Err(format!(
                "grid bounds must be finite with lo <= hi, got '{s}'"
            ));
        }
        Ok(Self { lo, hi, count })
    }
}

#[derive(Debug, Clone, Args)]
pub struct Params {
    /// Family for scan commands.
    #[arg(long, global = true, value_enum)]
    pub family: Option<FamilyArg>,
    #[arg(long, global = true)]
    pub n: Option<u32>,
    /// Metric entries, comma separated.
    #[arg(
        long,
        global = true,
        value_delimiter = ',',
        allow_negative_numbers = true
    )]
    pub x: Option<Vec<f64>>,
    /// Fiber scale of a two-summand metric.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub t: Option<f64>,
    /// Horizontal scale.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub s: Option<f64>,
    /// Prescribed fiber coefficients, comma separated.
    #[arg(
        long = "T",
        global = true,
        value_delimiter = ',',
        allow_negative_numbers = true
    )]
    pub target: Option<Vec<f64>>,
    /// Prescribed horizontal coefficient.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub b: Option<f64>,
    #[arg(long, global = true, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long, global = true, default_value_t = 500)]
    pub max_iter: usize,
    #[arg(long, global = true, default_value_t = 100)]
    pub max_steps: usize,
    /// Grid `lo:hi:count`; repeat to span several coordinates.
    #[arg(long, global = true)]
    pub grid: Vec<GridSpec>,
    #[arg(long, global = true, value_enum, default_value_t = Format::JsonLines)]
    pub format: Format,
    /// Output file (standard output when absent).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Seed of the ChaCha8 generator used by randomized scans.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Number of random samples in `scan uniqueness` without `--grid`.
    #[arg(long, global = true, default_value_t = 1000)]
    pub samples: usize,
}

/// One field of a record.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Int(i128),
    Float(f64),
    Bool(bool),
    Text(String),
    Null,
}

impl From<f64> for Value {
    fn from(v: f64) -> Self {
        Value::Float(v)
    }
}

impl From<usize> for Value {
    fn from(v: usize) -> Self {
        Value::Int(v as i128)
    }
}

impl From<u32> for Value {
    fn from(v: u32) -> Self {
        Value::Int(i128::from(v))
    }
}

impl From<u64> for Value {
    fn from(v: u64) -> Self {
        Value::Int(v as i128)
    }
}

impl From<bool> for Value {
    fn from(v: bool) -> Self {
        Value::Bool(v)
    }
}

impl From<&str> for Value {
    fn from(v: &str) -> Self {
        Value::Text(v.to_string())
    }
}

impl From<String> for Value {
    fn from(v: String) -> Self {
        Value::Text(v)
    }
}

impl<T: Into<Value>> From<Option<T>> for Value {
    fn from(v: Option<T>) -> Self {
        v.map_or(Value::Null, Into::into)
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(v) => write!(f, "{v}"),
            Value::Float(v) => write!(f, "{v:.16e}"),
            Value::Bool(v) => write!(f, "{v}"),
            Value::Text(v) => f.write_str(v),
            Value::Null => Ok(()),
        }
    }
}

impl Value {
    fn to_json(&self) -> String {
        match self {
            Value::Float(v) if !v.is_finite() => "null".into(),
            Value::Null => "null".into(),
            Value::Text(v) => serde_json::to_string(v).expect("string serialization"),
            other => other.to_string(),
        }
    }
}

/// Rows sharing a fixed column list.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RecordSet {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl RecordSet {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        assert_eq!(
            row.len(),
            self.columns.len(),
            "row does not match the schema"
        );
        self.rows.push(row);
    }

    pub fn get(&self, row: usize, column: &str) -> Option<&Value> {
        let idx = self.columns.iter().position(|c| c == column)?;
        self.rows.get(row).map(|r| &r[idx])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    Usage(String),
    Solver(RicciError),
    Io(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "usage error: {msg}"),
            CliError::Solver(e) => write!(f, "{}: {e}", e.name()),
            CliError::Io(msg) => write!(f, "io error: {msg}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<RicciError> for CliError {
    fn from(e: RicciError) -> Self {
        match e {
            RicciError::InvalidMetric(msg) => CliError::Usage(msg),
            other => CliError::Solver(other),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Solver(_) | CliError::Io(_) => 1,
        }
    }
}

/// Records produced by a command, plus the failure that ended it, if any.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub records: RecordSet,
    pub failure: Option<CliError>,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        self.failure.as_ref().map_or(0, CliError::exit_code)
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

impl Params {
    fn n(&self) -> Result<u32, CliError> {
        match self.n {
            Some(0) => Err(usage("--n must be positive")),
            Some(n) => Ok(n),
            None => Err(usage("--n is required")),
        }
    }

    fn n_or_one(&self) -> Result<u32, CliError> {
        match self.n {
            None => Ok(1),
            Some(_) => self.n(),
        }
    }

    fn positive(flag: &str, v: Option<f64>) -> Result<f64, CliError> {
        match v {
            Some(v) if v.is_finite() && v > 0.0 => Ok(v),
            Some(v) => Err(usage(format!("{flag} must be positive, got {v}"))),
            None => Err(usage(format!("{flag} is required"))),
        }
    }

    fn triple(flag: &str, v: &Option<Vec<f64>>) -> Result<[f64; 3], CliError> {
        let v = v
            .as_ref()
            .ok_or_else(|| usage(format!("{flag} is required")))?;
        let arr: [f64; 3] = v
            .as_slice()
            .try_into()
            .map_err(|_| usage(format!("{flag} takes three comma-separated values")))?;
        if arr.iter().any(|c| !(c.is_finite() && *c > 0.0)) {
            return Err(usage(format!(
                "{flag} entries must be positive, got {arr:?}"
            )));
        }
        Ok(arr)
    }

    fn x(&self) -> Result<[f64; 3], CliError> {
        Self::triple("--x", &self.x)
    }

    fn target(&self) -> Result<[f64; 3], CliError> {
        Self::triple("--T", &self.target)
    }

    fn single_target(&self) -> Result<f64, CliError> {
        match self.target.as_deref() {
            Some([a]) => Self::positive("--T", Some(*a)),
            Some(_) => Err(usage("--T takes a single value for two-summand families")),
            None => Err(usage("--T is required")),
        }
    }

    fn tolerances(&self) -> Result<(), CliError> {
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(usage(format!("--tol must be positive, got {}", self.tol)));
        }
        Ok(())
    }

    fn fibration(&self, family: FamilyArg) -> Result<FibrationFamily, CliError> {
        let n = if family == FamilyArg::Spin7 {
            1
        } else {
            self.n()?
        };
        family
            .fibration(n)
            .expect("two-summand family")
            .map_err(CliError::from)
    }

    fn grids(&self, max: usize) -> Result<Vec<Vec<f64>>, CliError> {
        if self.grid.is_empty() {
            return Err(usage("--grid is required"));
        }
        if self.grid.len() > max {
            return Err(usage(format!(
                "at most {max} --grid values are accepted here"
            )));
        }
        Ok(self.grid.iter().map(GridSpec::values).collect())
    }

    fn scan_family(&self) -> Result<FamilyArg, CliError> {
        self.family
            .ok_or_else(|| usage("--family is required for scans"))
    }
}

/// Cartesian product of the grids, first grid varying slowest.
fn product(grids: &[Vec<f64>]) -> Vec<Vec<f64>> {
    grids.iter().fold(vec![Vec::new()], |acc, g| {
        acc.iter()
            .flat_map(|prefix| {
                g.iter().map(move |v| {
                    let mut p = prefix.clone();
                    p.push(*v);
                    p
                })
            })
            .collect()
    })
}

fn floats(v: &[f64]) -> Vec<Value> {
    v.iter().map(|x| Value::Float(*x)).collect()
}

/// Dispatches a parsed configuration.
pub fn run_command(config: &RunConfig) -> Outcome {
    let result = config
        .params
        .tolerances()
        .and_then(|()| match &config.command {
            Command::Ricci { family } => cmd_ricci(*family, &config.params),
            Command::Solve { family } => cmd_solve(*family, &config.params),
            Command::CFunction => cmd_c_function(&config.params),
            Command::Iterate { family } => cmd_iterate(*family, &config.params),
            Command::Ancient { family } => cmd_ancient(*family, &config.params),
            Command::Einstein { family } => cmd_einstein(*family, &config.params),
            Command::Scan { kind } => match kind {
                ScanKind::Solvability => scan_solvability(&config.params),
                ScanKind::Ancient => scan_ancient(&config.params),
                ScanKind::Uniqueness => scan_uniqueness(&config.params),
            },
        });
    match result {
        Ok(outcome) => outcome,
        Err(e) => Outcome {
            records: RecordSet::default(),
            failure: Some(e),
        },
    }
}

fn done(records: RecordSet) -> Result<Outcome, CliError> {
    Ok(Outcome {
        records,
        failure: None,
    })
}

fn family_metric(family: FamilyArg, p: &Params) -> Result<FamilyMetric, CliError> {
    Ok(match family {
        FamilyArg::Su2 => FamilyMetric::Su2(Su2Metric::from_array(p.x()?)?),
        FamilyArg::FourParam => {
            let s = p.s.map_or(Ok(1.0), |s| Params::positive("--s", Some(s)))?;
            FamilyMetric::FourParam(FourParamMetric::new(p.n()?, p.x()?, s)?)
        }
        _ => {
            let fam = p.fibration(family)?;
            let t = Params::positive("--t", p.t)?;
            let s = p.s.map_or(Ok(1.0), |s| Params::positive("--s", Some(s)))?;
            FamilyMetric::TwoSummand(TwoSummandMetric::new(fam, t, s)?)
        }
    })
}

fn metric_n(g: &FamilyMetric) -> Value {
    match g {
        FamilyMetric::Su2(_) => Value::Null,
        FamilyMetric::TwoSummand(m) => m.family.n().into(),
        FamilyMetric::FourParam(m) => m.n().into(),
    }
}

fn coordinate_columns(family: FamilyArg) -> &'static [&'static str] {
    match family {
        FamilyArg::Su2 => &["x1", "x2", "x3"],
        FamilyArg::FourParam => &["x1", "x2", "x3", "s"],
        _ => &["t", "s"],
    }
}

fn columns(parts: &[&[&str]]) -> Vec<String> {
    parts
        .iter()
        .flat_map(|p| p.iter().map(|c| c.to_string()))
        .collect()
}

fn with_columns(parts: &[&[&str]]) -> RecordSet {
    RecordSet {
        columns: columns(parts),
        rows: Vec::new(),
    }
}

fn prefixed(prefix: &str, cols: &[&str]) -> Vec<String> {
    cols.iter().map(|c| format!("{prefix}{c}")).collect()
}

fn cmd_ricci(family: FamilyArg, p: &Params) -> Result<Outcome, CliError> {
    let g = family_metric(family, p)?;
    let mut rec = match g {
        FamilyMetric::Su2(_) => with_columns(&[
            &["family"],
            &["x1", "x2", "x3"],
            &["r1", "r2", "r3"],
            &["positive"],
        ]),
        FamilyMetric::TwoSummand(_) => with_columns(&[
            &["family", "n", "t", "s", "ratio"],
            &[
                "ric_vertical",
                "ric_horizontal",
                "per_unit_vertical",
                "per_unit_horizontal",
            ],
            &["positive"],
        ]),
        FamilyMetric::FourParam(_) => with_columns(&[
            &["family", "n", "x1", "x2", "x3", "s"],
            &["a1", "a2", "a3", "b"],
            &["positive"],
        ]),
    };
    let mut row: Vec<Value> = vec![family.label().into()];
    match g {
        FamilyMetric::Su2(m) => {
            let ric = ricci_su2(&m);
            row.extend(floats(&m.entries()));
            row.extend(floats(&ric.r));
            row.push(positivity_check(&ric, 0.0).into());
        }
        FamilyMetric::TwoSummand(m) => {
            let ric = ricci_two_summand(&m);
            let (u, v) = ric.per_metric_unit(&m);
            row.push(m.family.n().into());
            row.extend(floats(&[
                m.t(),
                m.s(),
                m.ratio(),
                ric.vertical,
                ric.horizontal,
                u,
                v,
            ]));
            row.push(positivity_check(&ric, 0.0).into());
        }
        FamilyMetric::FourParam(m) => {
            let ric = ricci_four_param(&m);
            row.push(m.n().into());
            row.extend(floats(&m.fiber()));
            row.push(m.s().into());
            row.extend(floats(&ric.a));
            row.push(ric.b.into());
            row.push(positivity_check(&ric, 0.0).into());
        }
    }
    rec.push(row);
    done(rec)
}

fn cmd_solve(family: FamilyArg, p: &Params) -> Result<Outcome, CliError> {
    match family {
        FamilyArg::Su2 => {
            let t = p.target()?;
            let res = solve_su2(&DiagonalForm3 { r: t }, &Su2SolveOptions::default())?;
            let mut rec = with_columns(&[
                &["family", "T1", "T2", "T3"],
                &["x1", "x2", "x3", "kappa", "residual", "iterations"],
            ]);
            let mut row = vec![family.label().into()];
            row.extend(floats(&t));
            row.extend(floats(&res.metric.entries()));
            row.extend([res.kappa.into(), res.residual.into(), res.iterations.into()]);
            rec.push(row);
            done(rec)
        }
        FamilyArg::FourParam => {
            let n = p.n()?;
            let t = p.target()?;
            let b = Params::positive("--b", p.b)?;
            let target = FourParamForm { n, a: t, b };
            let res = solve_four_param_homotopy(&target, &HomotopyOptions::default())?;
            let report = res.path_report.expect("continuation report");
            let mut rec = with_columns(&[
                &["family", "n", "T1", "T2", "T3", "b"],
                &["x1", "x2", "x3", "s", "kappa", "residual"],
                &["accepted_steps", "rejected_steps"],
            ]);
            let mut row: Vec<Value> = vec![family.label().into(), n.into()];
            row.extend(floats(&t));
            row.push(b.into());
            row.extend(floats(&res.metric.fiber()));
            row.extend([res.metric.s().into(), res.kappa.into(), res.residual.into()]);
            row.extend([report.accepted_steps.into(), report.rejected_steps.into()]);
            rec.push(row);
            done(rec)
        }
        _ => {
            let fam = p.fibration(family)?;
            let a = p.single_target()?;
            let b = Params::positive("--b", p.b)?;
            let res = solve_two_summand(fam, a, b)?;
            let mut rec = with_columns(&[
                &["family", "n", "a", "b", "solvable", "threshold"],
                &["t", "s", "kappa", "residual"],
            ]);
            let mut row: Vec<Value> = vec![
                family.label().into(),
                fam.n().into(),
                a.into(),
                b.into(),
                res.is_some().into(),
                two_summand_threshold(fam).into(),
            ];
            match res {
                Some(r) => row.extend(floats(&[r.metric.t(), r.metric.s(), r.kappa, r.residual])),
                None => row.extend([Value::Null, Value::Null, Value::Null, Value::Null]),
            }
            rec.push(row);
            done(rec)
        }
    }
}

fn branch_label(b: CBranch) -> &'static str {
    match b {
        CBranch::GenericCubic => "cubic",
        CBranch::DegenerateClosedForm => "closed-form",
        CBranch::NearPairPolished => "near-pair",
    }
}

fn cmd_c_function(p: &Params) -> Result<Outcome, CliError> {
    let t = p.target()?;
    let res = c_function(t)?;
    let mut rec = with_columns(&[&["T1", "T2", "T3", "c", "z", "branch"], &["y1", "y2", "y3"]]);
    let mut row = floats(&t);
    row.extend([res.c.into(), res.z.into(), branch_label(res.branch).into()]);
    row.extend(floats(&res.solution));
    rec.push(row);
    done(rec)
}

fn trace_records(family: FamilyArg, trace: &IterationTrace) -> RecordSet {
    let mut rec = with_columns(&[
        &["family", "n", "step", "status"],
        coordinate_columns(family),
        &["kappa", "deviation"],
    ]);
    let deviations = trace.deviations();
    for (step, g) in trace.metrics.iter().enumerate() {
        let mut row: Vec<Value> = vec![
            family.label().into(),
            metric_n(g),
            step.into(),
            trace.status.label().into(),
        ];
        row.extend(floats(&g.coordinates()));
        let kappa = step.checked_sub(1).map(|i| trace.constants[i]);
        row.extend([kappa.into(), deviations[step].into()]);
        rec.push(row);
    }
    rec
}

fn cmd_iterate(family: FamilyArg, p: &Params) -> Result<Outcome, CliError> {
    let g = family_metric(family, p)?;
    let trace = match g {
        FamilyMetric::Su2(m) => iterate_su2(&m, p.max_iter, p.tol),
        FamilyMetric::TwoSummand(m) => iterate_two_summand(m.family, &m, p.max_iter, p.tol)?,
        FamilyMetric::FourParam(m) => {
            let config = FMapConfig::new(m.n())?;
            if config.contains(&m.canonicalized().normalized_fiber()) {
                iterate_four_param_near_round(&config, &m, p.max_iter, p.tol)?
            } else {
                iterate_four_param(&m, p.max_iter, p.tol, &HomotopyOptions::default())?
            }
        }
    };
    Ok(Outcome {
        records: trace_records(family, &trace),
        failure: trace.failure.clone().map(CliError::Solver),
    })
}

fn form_len(family: FamilyArg) -> usize {
    coordinate_columns(family).len()
}

fn cmd_ancient(family: FamilyArg, p: &Params) -> Result<Outcome, CliError> {
    let g = family_metric(family, p)?;
    let trace = ancient_iterate(&g, p.max_steps);
    let cols = coordinate_columns(family);
    let mut rec = RecordSet {
        columns: columns(&[&["family", "n"], cols, &["steps_survived", "status"]]),
        rows: Vec::new(),
    };
    rec.columns.extend(prefixed("last_", cols));
    rec.columns.push("fiber_length_proxy".into());
    rec.columns.extend(prefixed("offending_", cols));
    let mut row: Vec<Value> = vec![family.label().into(), metric_n(&g)];
    row.extend(floats(&g.coordinates()));
    row.extend([trace.steps_survived.into(), trace.status.label().into()]);
    row.extend(floats(&trace.last().coordinates()));
    row.push(trace.fiber_length_proxy.last().copied().into());
    match trace.offending_coefficients() {
        Some(c) => row.extend(floats(&c)),
        None => row.extend(std::iter::repeat_n(Value::Null, form_len(family))),
    }
    rec.push(row);
    done(rec)
}

fn cmd_einstein(family: FamilyArg, p: &Params) -> Result<Outcome, CliError> {
    let catalog = match family {
        FamilyArg::Su2 => CatalogFamily::Su2,
        FamilyArg::FourParam => CatalogFamily::FourParam(p.n()?),
        _ => CatalogFamily::TwoSummand(p.fibration(family)?),
    };
    let n: Value = match catalog {
        CatalogFamily::Su2 => Value::Null,
        CatalogFamily::TwoSummand(f) => f.n().into(),
        CatalogFamily::FourParam(n) => n.into(),
    };
    let mut rec = with_columns(&[&[
        "family",
        "n",
        "shape",
        "ratio",
        "einstein_constant",
        "verified",
    ]]);
    for e in einstein_list(catalog) {
        let (shape, ratio) = match e.shape {
            EinsteinShape::Round => ("round", Value::Null),
            EinsteinShape::Ratio(r) => ("ratio", r.into()),
        };
        let verified = is_einstein(&e.metric, 1e-12).is_some();
        rec.push(vec![
            family.label().into(),
            n.clone(),
            shape.into(),
            ratio,
            e.einstein_constant.into(),
            verified.into(),
        ]);
    }
    done(rec)
}

fn scan_solvability(p: &Params) -> Result<Outcome, CliError> {
    let family = p.scan_family()?;
    match family {
        FamilyArg::Su2 => Err(usage(
            "the SU(2) equation is solvable for every positive target; choose another --family",
        )),
        FamilyArg::FourParam => {
            let n = p.n()?;
            let base = match &p.target {
                Some(_) => p.target()?,
                None => [1.0; 3],
            };
            let b = p.b.map_or(Ok(1.0), |b| Params::positive("--b", Some(b)))?;
            let grids = p.grids(3)?;
            let points: Vec<[f64; 3]> = product(&grids)
                .into_iter()
                .map(|v| {
                    let mut t = base;
                    t[..v.len()].copy_from_slice(&v);
                    t
                })
                .collect();
            if let Some(bad) = points.iter().find(|t| t.iter().any(|c| !(*c > 0.0))) {
                return Err(usage(format!(
                    "--grid produced a non-positive target {bad:?}"
                )));
            }
            let opts = HomotopyOptions::default();
            let rows: Vec<Vec<Value>> = points
                .par_iter()
                .map(|&t| {
                    let target = FourParamForm { n, a: t, b };
                    let pred = solvability_predicates(&target);
                    let solved = solve_four_param_homotopy(&target, &opts);
                    let mut row: Vec<Value> = vec![n.into()];
                    row.extend(floats(&t));
                    row.push(b.into());
                    match pred {
                        Ok(s) => row.extend([
                            s.fiber_bound.into(),
                            s.c_condition.into(),
                            s.c_value.into(),
                        ]),
                        Err(_) => row.extend([Value::Null, Value::Null, Value::Null]),
                    }
                    match solved {
                        Ok(r) => {
                            row.push(true.into());
                            row.extend(floats(&r.metric.fiber()));
                            row.extend([r.kappa.into(), r.residual.into(), Value::Null]);
                        }
                        Err(e) => {
                            row.push(false.into());
                            row.extend(std::iter::repeat_n(Value::Null, 5));
                            row.push(e.name().into());
                        }
                    }
                    row
                })
                .collect();
            let mut rec = with_columns(&[
                &["n", "T1", "T2", "T3", "b"],
                &["fiber_bound", "c_condition", "c_value"],
                &["solved", "x1", "x2", "x3", "kappa", "residual", "error"],
            ]);
            rows.into_iter().for_each(|r| rec.push(r));
            done(rec)
        }
        _ => {
            let fam = p.fibration(family)?;
            let grids = p.grids(1)?;
            let threshold = two_summand_threshold(fam);
            let mut rec = with_columns(&[
                &["family", "n", "a", "b", "solvable", "threshold"],
                &["t", "kappa"],
            ]);
            for a in &grids[0] {
                if !(*a > 0.0) {
                    return Err(usage(format!("--grid values must be positive, got {a}")));
                }
                let res = solve_two_summand(fam, *a, 1.0)?;
                let mut row: Vec<Value> = vec![
                    family.label().into(),
                    fam.n().into(),
                    (*a).into(),
                    1.0.into(),
                    res.is_some().into(),
                    threshold.into(),
                ];
                row.push(res.as_ref().map(|r| r.metric.t()).into());
                row.push(res.as_ref().map(|r| r.kappa).into());
                rec.push(row);
            }
            done(rec)
        }
    }
}

fn scan_ancient(p: &Params) -> Result<Outcome, CliError> {
    let family = p.scan_family()?;
    let grids = p.grids(3)?;
    let make = |v: &[f64]| -> Result<FamilyMetric, CliError> {
        Ok(match family {
            FamilyArg::Su2 => {
                let x = match v {
                    [nu] => [*nu, 2.0, 2.0],
                    [a, b, c] => [*a, *b, *c],
                    _ => {
                        return Err(usage(
                            "su2 ancient scans take one (ν) or three --grid values",
                        ))
                    }
                };
                FamilyMetric::Su2(Su2Metric::from_array(x)?)
            }
            FamilyArg::FourParam => {
                let x = match v {
                    [t] => [*t; 3],
                    [a, b, c] => [*a, *b, *c],
                    _ => {
                        return Err(usage(
                            "four-param ancient scans take one or three --grid values",
                        ))
                    }
                };
                FamilyMetric::FourParam(FourParamMetric::new(p.n()?, x, 1.0)?)
            }
            _ => match v {
                [r] => {
                    FamilyMetric::TwoSummand(TwoSummandMetric::new(p.fibration(family)?, *r, 1.0)?)
                }
                _ => return Err(usage("two-summand ancient scans take one --grid value")),
            },
        })
    };
    let points = product(&grids)
        .iter()
        .map(|v| make(v))
        .collect::<Result<Vec<_>, _>>()?;
    let summaries = ancient_region_scan(&points, p.max_steps);
    let mut rec = RecordSet {
        columns: columns(&[&["family", "n"], coordinate_columns(family)]),
        rows: Vec::new(),
    };
    rec.columns
        .extend(["steps_survived", "status", "survives"].map(String::from));
    for s in summaries {
        let mut row: Vec<Value> = vec![family.label().into(), metric_n(&s.point)];
        row.extend(floats(&s.point.coordinates()));
        row.extend([
            s.steps_survived.into(),
            s.status.label().into(),
            s.status.survives().into(),
        ]);
        rec.push(row);
    }
    done(rec)
}

fn scan_uniqueness(p: &Params) -> Result<Outcome, CliError> {
    let n = p.n_or_one()?;
    let mut scan = UniquenessScan::new(n, p.samples, p.seed);
    if p.grid.is_empty() {
        let report = sp1_uniqueness_scan(&scan);
        let mut rec = with_columns(&[&["n", "samples", "seed", "flagged", "max_identity_defect"]]);
        rec.push(vec![
            n.into(),
            report.samples.into(),
            p.seed.into(),
            report.flagged.len().into(),
            report.max_identity_defect.into(),
        ]);
        return done(rec);
    }
    let grids = p.grids(3)?;
    let grids = if grids.len() == 1 {
        vec![grids[0].clone(); 3]
    } else if grids.len() == 3 {
        grids
    } else {
        return Err(usage("uniqueness scans take one or three --grid values"));
    };
    let points = product(&grids);
    if points.iter().flatten().any(|v| !(*v > 0.0)) {
        return Err(usage("--grid values must be positive"));
    }
    scan.samples = points.len();
    let results: Vec<_> = points
        .par_iter()
        .map(|v| uniqueness_point(n, [v[0], v[1], v[2]], scan.a_tol, scan.x_tol))
        .collect();
    let mut rec = with_columns(&[
        &["n", "x1", "x2", "x3", "a1", "a2", "a3"],
        &["a_spread", "x_spread", "flagged", "identity_defect"],
    ]);
    for r in results {
        let mut row: Vec<Value> = vec![n.into()];
        row.extend(floats(&r.x));
        row.extend(floats(&r.a));
        row.extend([
            r.a_spread.into(),
            r.x_spread.into(),
            r.flagged.into(),
            r.identity_defect.into(),
        ]);
        rec.push(row);
    }
    done(rec)
}

/// Writes the records as CSV (with header) or as one JSON object per line.
pub fn write_records<W: Write>(records: &RecordSet, format: Format, out: W) -> io::Result<()> {
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(&records.columns)?;
            for row in &records.rows {
                w.write_record(row.iter().map(|v| v.to_string()))?;
            }
            w.flush()
        }
        Format::JsonLines => {
            let mut w = out;
            for row in &records.rows {
                let fields: Vec<String> = records
                    .columns
                    .iter()
                    .zip(row)
                    .map(|(k, v)| {
                        format!(
                            "{}:{}",
                            serde_json::to_string(k).expect("string serialization"),
                            v.to_json()
                        )
                    })
                    .collect();
                writeln!(w, "{{{}}}", fields.join(","))?;
            }
            w.flush()
        }
    }
}

/// Writes to `destination`, or to standard output when `None`.
pub fn emit_records(
    records: &RecordSet,
    format: Format,
    destination: Option<&Path>,
) -> Result<(), CliError> {
    match destination {
        Some(path) => {
            let file =
                File::create(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            write_records(records, format, BufWriter::new(file))
                .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
        }
        None => write_records(records, format, io::stdout().lock())
            .map_err(|e| CliError::Io(format!("stdout: {e}"))),
    }
}

/// Runs a configuration end to end and returns the process exit code.
pub fn execute(config: &RunConfig) -> i32 {
    let outcome = run_command(config);
    if let Err(e) = emit_records(
        &outcome.records,
        config.params.format,
        config.params.out.as_deref(),
    ) {
        eprintln!("{e}");
        return e.exit_code();
    }
    if let Some(e) = &outcome.failure {
        eprintln!("{e}");
    }
    outcome.exit_code()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(args: &[&str]) -> Outcome {
        let mut full = vec!["hopf-ricci"];
        full.extend_from_slice(args);
        run_command(&RunConfig::try_parse_from(full).unwrap())
    }

    fn float(rec: &RecordSet, row: usize, col: &str) -> f64 {
        match rec.get(row, col) {
            Some(Value::Float(v)) => *v,
            other => panic!("{col}: {other:?}"),
        }
    }

    #[test]
    fn ricci_su2_record() {
        let out = run(&["ricci", "su2", "--x", "1,2,2"]);
        assert_eq!(out.exit_code(), 0);
        let r: Vec<f64> = ["r1", "r2", "r3"]
            .iter()
            .map(|c| float(&out.records, 0, c))
            .collect();
        assert_eq!(r, vec![0.5, 3.0, 3.0]);
    }

    #[test]
    fn solve_four_param_record() {
        let out = run(&[
            "solve",
            "four-param",
            "--n",
            "1",
            "--T",
            "1,1,1",
            "--b",
            "1",
        ]);
        assert_eq!(out.exit_code(), 0);
        for c in ["x1", "x2", "x3"] {
            assert!((float(&out.records, 0, c) - 1.0).abs() < 1e-10);
        }
        assert!((float(&out.records, 0, "kappa") - 6.0).abs() < 1e-10);
        assert!(float(&out.records, 0, "residual") < 1e-10);
    }

    #[test]
    fn ancient_record() {
        let out = run(&["ancient", "su2", "--x", "1,2,3", "--max-steps", "50"]);
        assert_eq!(out.exit_code(), 0);
        assert_eq!(
            out.records.get(0, "status"),
            Some(&Value::from("LostPositivity"))
        );
        assert_eq!(out.records.get(0, "steps_survived"), Some(&Value::Int(0)));
    }

    #[test]
    fn usage_and_solver_errors() {
        assert_eq!(run(&["ricci", "su2"]).exit_code(), 2);
        assert_eq!(run(&["ricci", "su2", "--x", "1,-2,2"]).exit_code(), 2);
        assert_eq!(
            run(&["solve", "four-param", "--T", "1,1,1", "--b", "1"]).exit_code(),
            2
        );
        let out = run(&[
            "solve",
            "four-param",
            "--n",
            "1",
            "--T",
            "0.1,0.1,0.1",
            "--b",
            "1",
        ]);
        assert_eq!(out.exit_code(), 1);
        assert!(matches!(
            out.failure,
            Some(CliError::Solver(RicciError::ScalingFailure { .. }))
        ));
        assert!(RunConfig::try_parse_from(["hopf-ricci", "ricci", "bogus"]).is_err());
    }

    #[test]
    fn grid_parsing() {
        let g: GridSpec = "0.5:1.5:3".parse().unwrap();
        assert_eq!(g.values(), vec![0.5, 1.0, 1.5]);
        assert_eq!("2:3:1".parse::<GridSpec>().unwrap().values(), vec![2.0]);
        assert!("1:2:0".parse::<GridSpec>().is_err());
        assert!("1:2".parse::<GridSpec>().is_err());
    }

    #[test]
    fn csv_header_only_when_empty() {
        let rec = RecordSet::new(&["a", "b"]);
        let mut buf = Vec::new();
        write_records(&rec, Format::Csv, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "a,b\n");
    }

    #[test]
    fn float_formatting() {
        let mut rec = RecordSet::new(&["v", "w", "name"]);
        rec.push(vec![0.1.into(), Value::Null, "x\"y".into()]);
        let mut buf = Vec::new();
        write_records(&rec, Format::JsonLines, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "{\"v\":1.0000000000000001e-1,\"w\":null,\"name\":\"x\\\"y\"}\n"
        );
    }
}
