//! `casimir`: verify models, build invariant metrics, generate and certify
//! harmonic families, print reduced operators and check eigen-residuals.

mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use casimir_core::casimir::{CasimirOperator, MonomialLabel, CONVENTION};
use casimir_core::expr::ZeroVerdict;
use casimir_core::models::bianchi2::{self, Bianchi2Model};
use casimir_core::models::family::{Check, FamilyDoc, HarmonicFamily, TensorDoc};
use casimir_core::models::file::{provenance_name, LoadedModel, ModelFile};
use casimir_core::models::hypergeometric::{self, BianchiHypergeometric, HypergeometricError};
use casimir_core::models::so3::{self, So3Model};
use casimir_core::models::{recertify, ModelError};
use casimir_core::split::{compute_mu, SplitError};
use casimir_core::tensor::{Chart, FrameTag, TensorError};

use report::{write_atomic, Report};

#[derive(Parser)]
#[command(name = "casimir", version, about = "Generalized Casimir operators and tensor harmonics")]
struct Cli {
    /// Seed for numeric sampling and random tensors.
    #[arg(long, env = "CASIMIR_SEED", default_value_t = 0, global = true)]
    seed: u64,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the algebra, the realization and any supplied metric, or
    /// re-certify a family file.
    Verify {
        /// Built-in tag (so3, bianchi2, abelian) or path to a model JSON file.
        #[arg(long, required_unless_present = "family")]
        model: Option<String>,
        #[arg(long)]
        family: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Invariant metric from the Cartan inverse or the invariant frame.
    BuildMetric {
        #[arg(long)]
        model: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate and certify a harmonic family.
    Harmonics(HarmonicsArgs),
    /// Print the reduced scalar operator of one frame monomial.
    Reduce {
        #[arg(long)]
        model: String,
        /// Chart of a built-in model (so3: sphere or spherical).
        #[arg(long)]
        chart: Option<String>,
        /// 1-based frame legs of the upper indices.
        #[arg(long, value_delimiter = ',')]
        upper: Vec<usize>,
        /// 1-based frame legs of the lower indices.
        #[arg(long, value_delimiter = ',')]
        lower: Vec<usize>,
        #[arg(long, value_enum, default_value_t = OpFormat::Text)]
        format: OpFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Certify `G T = λ T` for a tensor given as JSON.
    Residual {
        #[arg(long)]
        model: String,
        #[arg(long)]
        tensor: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        lambda: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum OpFormat {
    Text,
    Json,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct HarmonicsArgs {
    /// so3 or bianchi2.
    model: String,
    /// so3 family type: scalar or 2,0.
    #[arg(long = "type", default_value = "scalar")]
    kind: String,
    #[arg(long)]
    l: Option<i64>,
    #[arg(long)]
    point_series: bool,
    #[arg(long)]
    covector: bool,
    #[arg(long)]
    hypergeometric: bool,
    #[arg(long, allow_hyphen_values = true)]
    n: Option<i64>,
    #[arg(long, allow_hyphen_values = true)]
    m: Option<i64>,
    #[arg(long, allow_hyphen_values = true)]
    mu: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    nu: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    lambda: Option<f64>,
    /// Amplitude of the even hypergeometric branch.
    #[arg(long = "amp-a", default_value_t = 1.0, allow_hyphen_values = true)]
    amp_a: f64,
    /// Amplitude of the odd hypergeometric branch.
    #[arg(long = "amp-b", default_value_t = 0.0, allow_hyphen_values = true)]
    amp_b: f64,
    /// Covector amplitudes as expressions (default: symbols a1, a2, a3).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    amplitudes: Vec<String>,
    /// `a:b:n` per chart coordinate, in chart order.
    #[arg(long, allow_hyphen_values = true)]
    grid: Vec<String>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Failure classes mapped to exit codes 1, 2 and 3.
#[derive(Debug)]
enum Failure {
    Check(String),
    Input(String),
    Solver(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Check(_) => 1,
            Failure::Input(_) => 2,
            Failure::Solver(_) => 3,
        }
    }
}

impl From<ModelError> for Failure {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::Input(m) => Failure::Input(m),
            ModelError::Tensor(TensorError::Parse(p)) => Failure::Input(p.to_string()),
            ModelError::Split(SplitError::NoClosedForm) => Failure::Solver(format!(
                "{}; supply the frame covectors in the model file's `frame` section",
                SplitError::NoClosedForm
            )),
            ModelError::Split(e @ SplitError::NotSimplyTransitive(_)) => Failure::Solver(e.to_string()),
            ModelError::Hypergeometric(e @ (HypergeometricError::NonConvergent(_) | HypergeometricError::Branch(_))) => {
                Failure::Solver(e.to_string())
            }
            other => Failure::Check(other.to_string()),
        }
    }
}

impl From<SplitError> for Failure {
    fn from(e: SplitError) -> Self {
        ModelError::from(e).into()
    }
}

impl From<casimir_core::casimir::CasimirError> for Failure {
    fn from(e: casimir_core::casimir::CasimirError) -> Self {
        ModelError::from(e).into()
    }
}

impl From<HypergeometricError> for Failure {
    fn from(e: HypergeometricError) -> Self {
        ModelError::from(e).into()
    }
}

fn io_err(path: &Path, e: std::io::Error) -> Failure {
    Failure::Input(format!("{}: {e}", path.display()))
}

/// Command-line arguments minus the program name and any `--out` target.
fn echoed_args() -> Vec<String> {
    let mut out = Vec::new();
    let mut skip = false;
    for a in std::env::args().skip(1) {
        if skip {
            skip = false;
            continue;
        }
        if a == "--out" {
            skip = true;
            continue;
        }
        if a.starts_with("--out=") {
            continue;
        }
        out.push(a);
    }
    out
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let (name, out) = match &cli.cmd {
        Command::Verify { out, .. } => ("verify", out.clone()),
        Command::BuildMetric { out, .. } => ("build-metric", out.clone()),
        Command::Harmonics(h) => ("harmonics", h.out.clone()),
        Command::Reduce { out, .. } => ("reduce", out.clone()),
        Command::Residual { out, .. } => ("residual", out.clone()),
    };
    let mut report = Report::new(name, echoed_args(), cli.seed);
    let artifact = match run(&cli, &mut report) {
        Ok(a) => a,
        Err(f) => {
            let msg = match &f {
                Failure::Check(m) | Failure::Input(m) | Failure::Solver(m) => m,
            };
            eprintln!("error: {msg}");
            return ExitCode::from(f.code());
        }
    };
    report.timings.insert("total_seconds".into(), start.elapsed().as_secs_f64());
    report.seal();
    if let Some(path) = &out {
        let bytes = artifact.unwrap_or_else(|| report.to_json().into_bytes());
        if let Err(e) = write_atomic(path, &bytes) {
            eprintln!("error: {}: {e}", path.display());
            return ExitCode::from(2);
        }
    }
    println!("{}", report.to_json());
    if report.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

/// Runs the command, filling the report; returns the artifact written to
/// `--out` when it differs from the report itself.
fn run(cli: &Cli, report: &mut Report) -> Result<Option<Vec<u8>>, Failure> {
    match &cli.cmd {
        Command::Verify { model, family, .. } => {
            if let Some(path) = family {
                verify_family(path, report)?;
            }
            if let Some(model) = model {
                let m = load_model(model)?;
                let outcome = m.verify(cli.seed)?;
                report.checks.extend(outcome.algebra.iter().cloned());
                for p in &outcome.realization.pairs {
                    report.checks.push(Check::new(format!("bracket xi_{} xi_{}", p.i, p.j), p.verdict.clone()));
                }
                report.checks.extend(outcome.killing.iter().cloned());
                report.notes.extend(outcome.notes.iter().cloned());
                report.result = json!({ "model": m.name, "validation": outcome.validation });
            }
            Ok(None)
        }
        Command::BuildMetric { model, .. } => {
            let m = load_model(model)?;
            let g = m.build_metric(cli.seed)?;
            for (j, v) in g.killing.iter().enumerate() {
                report.checks.push(Check::new(format!("killing xi_{}", j + 1), v.clone()));
            }
            let rows = |x: &casimir_core::matrix::ExprMatrix| -> Vec<Vec<String>> {
                (0..x.rows).map(|i| (0..x.cols).map(|k| x.get(i, k).to_string()).collect()).collect()
            };
            let metric = json!({
                "model": m.name,
                "provenance": provenance_name(g.provenance),
                "rank": g.rank,
                "g_inv": rows(&g.g_inv),
                "coordinate_inverse": rows(&g.coordinate_inverse(&m.xi)),
            });
            report.result = metric.clone();
            Ok(Some(pretty(&metric)))
        }
        Command::Harmonics(h) => harmonics(h, report),
        Command::Reduce { model, chart, upper, lower, format, .. } => {
            let (op, _) = operator_for(model, chart.as_deref(), true)?;
            let to0 = |v: &[usize]| -> Result<Vec<usize>, Failure> {
                v.iter().map(|&a| a.checked_sub(1).ok_or_else(|| Failure::Input("legs are 1-based".into()))).collect()
            };
            let label = MonomialLabel::new(&to0(upper)?, &to0(lower)?);
            let dim = op.chart.dim();
            if label.upper.iter().chain(&label.lower).any(|&a| a >= dim) {
                return Err(Failure::Input(format!("frame legs must lie in 1..={dim}")));
            }
            let reduced = op.reduce_to_scalar(&label)?;
            let phi: Vec<String> = op.phi(&label)?.iter().map(|e| e.to_string()).collect();
            if let Some(mu) = &op.mu {
                report.checks.push(Check::new("mu-integrability", mu.integrability.clone()));
            }
            report.result = json!({
                "chart": op.chart.name,
                "label": { "upper": upper, "lower": lower },
                "phi": phi,
                "operator": reduced.to_json(),
                "text": reduced.to_string(),
            });
            Ok(Some(match format {
                OpFormat::Text => format!("{reduced}\n").into_bytes(),
                OpFormat::Json => pretty(&reduced.to_json()),
            }))
        }
        Command::Residual { model, tensor, lambda, .. } => {
            let text = std::fs::read_to_string(tensor).map_err(|e| io_err(tensor, e))?;
            let doc: TensorDoc = serde_json::from_str(&text).map_err(|e| Failure::Input(format!("tensor schema: {e}")))?;
            let framed = matches!(doc.frame, FrameTag::Named(_));
            let (op, chart) = operator_for(model, Some(&doc.chart), framed)?;
            let t = doc.to_tensor(chart.clone())?;
            let lambda = chart.parse(lambda).map_err(|e| Failure::Input(e.to_string()))?;
            let er = op.certify_eigen(&t, &lambda, &chart.sample_box(cli.seed))?;
            report.checks.push(Check::new("casimir-eigen", er.residual.clone()));
            report.result = json!({ "lambda": er.lambda, "components": er.components, "convention": er.convention });
            Ok(None)
        }
    }
}

fn pretty(v: &Value) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(v).expect("json");
    s.push('\n');
    s.into_bytes()
}

fn load_model(spec: &str) -> Result<LoadedModel, Failure> {
    let file = match ModelFile::builtin(spec) {
        Some(f) => f,
        None => {
            let p = Path::new(spec);
            let text = std::fs::read_to_string(p).map_err(|e| io_err(p, e))?;
            ModelFile::from_json(&text)?
        }
    };
    Ok(file.load()?)
}

/// Casimir operator of a built-in model (with its frame) or of a model file
/// (frame from the file when requested).
fn operator_for(model: &str, chart: Option<&str>, framed: bool) -> Result<(CasimirOperator, Arc<Chart>), Failure> {
    match model {
        "so3" => {
            let m = So3Model::new();
            let c = m.chart(chart.unwrap_or("sphere")).ok_or_else(|| Failure::Input("so3 charts: sphere, spherical".into()))?;
            Ok((m.casimir(&c)?, c))
        }
        "bianchi2" => {
            let m = Bianchi2Model::new();
            match chart.unwrap_or("bianchi2") {
                "bianchi2" => Ok((m.casimir()?, m.chart.clone())),
                "bianchi2-xyz" => Ok((m.casimir_original()?, m.original.clone())),
                other => Err(Failure::Input(format!("bianchi2 has no chart `{other}`"))),
            }
        }
        _ => {
            let m = load_model(model)?;
            if let Some(c) = chart {
                if c != m.chart.name {
                    return Err(Failure::Input(format!("model chart is `{}`, not `{c}`", m.chart.name)));
                }
            }
            let g = m.build_metric(0)?;
            let mut op = CasimirOperator::new(m.xi.clone(), m.sc.clone(), g)?;
            if framed {
                let f = m.frame.clone().ok_or_else(|| Failure::Input("model file has no frame section".into()))?;
                let mu = compute_mu(&f, &m.xi, &m.sc, &m.chart.sample_box(0))?;
                op = op.with_frame(f, mu);
            }
            Ok((op, m.chart.clone()))
        }
    }
}

fn verify_family(path: &Path, report: &mut Report) -> Result<(), Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let doc: FamilyDoc = serde_json::from_str(&text).map_err(|e| Failure::Input(format!("family schema: {e}")))?;
    let fam = recertify(&doc)?;
    let fresh = fam.to_doc();
    let identical = fresh.checks == doc.checks && fresh.members.iter().zip(&doc.members).all(|(a, b)| a.checks == b.checks);
    let same = if identical {
        ZeroVerdict::SymbolicallyZero
    } else {
        ZeroVerdict::Nonzero { witness: vec![], value_re: f64::NAN, value_im: 0.0 }
    };
    report.checks.extend(fam.all_checks().cloned());
    report.checks.push(Check::new("verdicts-identical", same));
    report.result = json!({ "model": fam.model, "kind": fam.kind, "labels": fam.labels, "lambda": fam.lambda });
    Ok(())
}

/// `a:b:n` triples, one per coordinate.
fn parse_grid(specs: &[String], coords: &[String]) -> Result<Vec<(String, f64, f64, usize)>, Failure> {
    if specs.len() != coords.len() {
        return Err(Failure::Input(format!(
            "--grid needs one a:b:n per coordinate ({}), got {}",
            coords.join(", "),
            specs.len()
        )));
    }
    specs
        .iter()
        .zip(coords)
        .map(|(s, c)| {
            let parts: Vec<&str> = s.split(':').collect();
            let bad = || Failure::Input(format!("grid `{s}` is not a:b:n"));
            if parts.len() != 3 {
                return Err(bad());
            }
            let a = parts[0].parse().map_err(|_| bad())?;
            let b = parts[1].parse().map_err(|_| bad())?;
            let n = parts[2].parse().map_err(|_| bad())?;
            Ok((c.clone(), a, b, n))
        })
        .collect()
}

fn integer(x: Option<f64>, name: &str) -> Result<i64, Failure> {
    let v = x.ok_or_else(|| Failure::Input(format!("--{name} is required")))?;
    if v.fract() != 0.0 {
        return Err(Failure::Input(format!("--{name} must be an integer here")));
    }
    Ok(v as i64)
}

fn required<T>(x: Option<T>, name: &str) -> Result<T, Failure> {
    x.ok_or_else(|| Failure::Input(format!("--{name} is required")))
}

fn harmonics(h: &HarmonicsArgs, report: &mut Report) -> Result<Option<Vec<u8>>, Failure> {
    if h.format == Format::Csv && h.out.is_none() {
        return Err(Failure::Input("--format csv needs --out".into()));
    }
    let mut weight_classes = None;
    let (fam, csv): (HarmonicFamily, Option<String>) = match h.model.as_str() {
        "so3" => {
            let m = So3Model::new();
            let l = required(h.l, "l")?;
            let fam = match h.kind.as_str() {
                "scalar" => so3::scalar_family(&m, l)?,
                "2,0" => so3::tensor20_family(&m, l)?,
                other => return Err(Failure::Input(format!("unknown so3 type `{other}` (scalar, 2,0)"))),
            };
            weight_classes = Some(so3::weight_class_count(&m, &fam));
            let csv = grid_csv(h, &fam)?;
            (fam, csv)
        }
        "bianchi2" => {
            let m = Bianchi2Model::new();
            if h.hypergeometric {
                let p = BianchiHypergeometric {
                    mu: required(h.mu, "mu")?,
                    nu: required(h.nu, "nu")?,
                    lambda: required(h.lambda, "lambda")?,
                    a_amp: h.amp_a,
                    b_amp: h.amp_b,
                };
                let fam = hypergeometric::family(p)?;
                let csv = if h.format == Format::Csv {
                    let g = parse_grid(&h.grid, &["v".to_string()])?;
                    Some(hypergeometric::samples_csv(&p, g[0].1, g[0].2, g[0].3)?)
                } else {
                    None
                };
                (fam, csv)
            } else {
                let n = required(h.n, "n")?;
                let mm = required(h.m, "m")?;
                let nu = integer(h.nu, "nu")?;
                let fam = if h.covector {
                    let amps = if h.amplitudes.is_empty() {
                        bianchi2::symbolic_amplitudes()
                    } else if h.amplitudes.len() == 3 {
                        let p = |s: &String| m.chart.parse(s).map_err(|e| Failure::Input(e.to_string()));
                        [p(&h.amplitudes[0])?, p(&h.amplitudes[1])?, p(&h.amplitudes[2])?]
                    } else {
                        return Err(Failure::Input("--amplitudes takes three expressions".into()));
                    };
                    bianchi2::covector_family(&m, n, mm, nu, amps)?
                } else if h.point_series {
                    bianchi2::point_series_family(&m, n, mm, nu)?
                } else {
                    return Err(Failure::Input("choose --point-series, --covector or --hypergeometric".into()));
                };
                let csv = grid_csv(h, &fam)?;
                (fam, csv)
            }
        }
        other => return Err(Failure::Input(format!("no built-in harmonics for `{other}` (so3, bianchi2)"))),
    };
    let mut fam = fam;
    if report.seed != 0 {
        fam.seed = report.seed;
        casimir_core::models::certify(&mut fam)?;
    }
    report.checks.extend(fam.all_checks().cloned());
    report.notes.extend(fam.notes.iter().cloned());
    report.result = json!({
        "model": fam.model,
        "kind": fam.kind,
        "labels": fam.labels,
        "lambda": fam.lambda,
        "convention": CONVENTION,
        "members": fam.members.len(),
        "nonzero_components": fam.component_count(),
        "weight_classes": weight_classes,
    });
    Ok(Some(match csv {
        Some(c) => c.into_bytes(),
        None => pretty(&serde_json::to_value(fam.to_doc()).expect("family serializes")),
    }))
}

fn grid_csv(h: &HarmonicsArgs, fam: &HarmonicFamily) -> Result<Option<String>, Failure> {
    if h.format != Format::Csv {
        return Ok(None);
    }
    let chart = fam
        .members
        .iter()
        .find_map(|m| m.tensor.as_ref())
        .map(|t| t.chart.clone())
        .ok_or_else(|| Failure::Check("family has no tensors".into()))?;
    let grid = parse_grid(&h.grid, &chart.coords)?;
    Ok(Some(fam.samples_csv(&grid)?))
}
