//! Command-line surface: argument parsing, file loading, validation reports
//! and JSON/DOT output.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::complex::{build_complex, DualComplex, ModelDescription, MonomialPointData, Simplex, SkeletonPoint, Subcomplex};
use crate::field::{parse_rational, BaseElement, Q};
use crate::flow::{self, BasicModel, FlowExpansion, FlowTime, RigidPoint};
use crate::monoval::MultivariatePoly;
use crate::serial::Rational;
use crate::weight::{self, PluricanonicalForm, WeightValue, Weighting};

#[derive(Debug, Parser)]
#[command(name = "sncd", version, about = "Skeleta, weight functions and retraction flows of sncd models")]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
    /// Write the result to this file instead of stdout.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    /// Number of sampled points per form for `check`.
    #[arg(long, global = true, default_value_t = 500)]
    pub samples: usize,
    /// Seed for the point sampler.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate a model, forms and rigid points, reporting every violation.
    Check {
        model: Option<PathBuf>,
        #[arg(long = "form")]
        forms: Vec<PathBuf>,
        #[arg(long = "rigid")]
        rigid: Vec<PathBuf>,
    },
    /// Emit the dual complex as JSON, or as Graphviz with --dot.
    Complex {
        model: PathBuf,
        #[arg(long)]
        dot: bool,
    },
    /// Evaluate the weight function at a barycentric point.
    Weight {
        model: PathBuf,
        form: PathBuf,
        #[arg(long)]
        stratum: String,
        /// Barycentric coordinate, `COMPONENT=p/q`; repeat for each vertex.
        #[arg(long = "beta", value_parser = parse_assignment)]
        beta: Vec<(String, Q)>,
    },
    /// Kontsevich–Soibelman skeleton of one form.
    Ks { model: PathBuf, form: PathBuf },
    /// Union of the Kontsevich–Soibelman skeleta of the given forms. This is
    /// a subcomplex of the essential skeleton, equal to it only when the
    /// forms suffice.
    Essential {
        model: PathBuf,
        #[arg(required = true)]
        forms: Vec<PathBuf>,
    },
    /// Valuation of a polynomial along the retraction flow of the model
    /// T1^N1 T2^N2 = t.
    Flow {
        #[command(flatten)]
        point: PointArgs,
        /// Monomial point weights `a1,a2` instead of a rigid point.
        #[arg(long, conflicts_with_all = ["x1", "x2"])]
        alpha: Option<String>,
        /// Polynomial in T1, T2.
        #[arg(long)]
        f: String,
        /// Flow time: a nonnegative rational or `inf`.
        #[arg(long, default_value = "0")]
        s: String,
    },
    /// Image of a rigid point under the retraction to the skeleton.
    Retract {
        #[command(flatten)]
        point: PointArgs,
    },
}

#[derive(Debug, clap::Args)]
pub struct PointArgs {
    #[arg(long)]
    pub n1: i64,
    #[arg(long)]
    pub n2: i64,
    /// First coordinate; written in `u = t^(1/e)` when --ramification e > 1.
    #[arg(long)]
    pub x1: Option<String>,
    #[arg(long)]
    pub x2: Option<String>,
    #[arg(long, default_value_t = 1)]
    pub ramification: u32,
}

fn parse_assignment(s: &str) -> Result<(String, Q), String> {
    let (k, v) = s.split_once('=').ok_or("expected COMPONENT=VALUE")?;
    let v = parse_rational(v).map_err(|e| e.to_string())?;
    Ok((k.trim().to_string(), v))
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{}", .0.join("\n"))]
    Validation(Vec<String>),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Validation(_) => 1,
        }
    }

    fn validation(msg: impl ToString) -> Self {
        CliError::Validation(vec![msg.to_string()])
    }
}

/// Text to emit and the exit status to finish with.
#[derive(Debug)]
pub struct Outcome {
    pub text: String,
    pub exit: i32,
}

impl Outcome {
    fn ok(text: String) -> Self {
        Outcome { text, exit: 0 }
    }
}

/// A rigid point as stored in JSON.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RigidPointSpec {
    pub n1: i64,
    pub n2: i64,
    pub x1: String,
    pub x2: String,
    #[serde(default = "one")]
    pub ramification: u32,
}

fn one() -> u32 {
    1
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexReport {
    pub id: String,
    pub multiplicity: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComplexReport {
    pub dimension: Option<usize>,
    /// Number of simplices in each dimension.
    pub counts: Vec<usize>,
    pub vertices: Vec<VertexReport>,
    pub simplices: Vec<Simplex>,
}

impl ComplexReport {
    pub fn new(c: &DualComplex) -> Self {
        let dim = c.dimension();
        ComplexReport {
            dimension: dim,
            counts: dim.map_or(Vec::new(), |d| (0..=d).map(|k| c.count_of_dimension(k)).collect()),
            vertices: c
                .components()
                .map(|(id, n)| VertexReport {
                    id: id.to_string(),
                    multiplicity: n,
                })
                .collect(),
            simplices: c.simplices().cloned().collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SubcomplexReport {
    pub strata: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub global_weight: Option<Rational>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub global_weights: Option<Vec<Rational>>,
    pub connected: bool,
    pub components: usize,
    pub pseudomanifold: bool,
    /// Set when a convention decided a topological answer: the empty
    /// subcomplex or a single vertex.
    pub degenerate: bool,
}

impl SubcomplexReport {
    fn new(c: &DualComplex, s: &Subcomplex) -> Self {
        let conn = weight::connectivity(c, s);
        let pm = weight::pseudomanifold_report(c, s);
        SubcomplexReport {
            strata: s.strata().iter().cloned().collect(),
            global_weight: None,
            global_weights: None,
            connected: conn.is_connected(),
            components: c.connected_components(Some(s)).len(),
            pseudomanifold: pm.holds,
            degenerate: matches!(conn, weight::Connectivity::Empty) || pm.degenerate,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct WeightReport {
    /// The point after moving to the face of its nonzero coordinates.
    pub stratum: String,
    pub value: Rational,
    /// `exact`, or `strictLowerBound` on a horizontal face.
    pub bound: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlowReport {
    pub s: String,
    #[serde(flatten)]
    pub expansion: FlowExpansion,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RetractReport {
    pub monomial: MonomialPointData,
    pub skeleton_point: SkeletonPoint,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub file: String,
    /// Error name, e.g. `Incompatible` or `HorizontalVertex`.
    pub error: String,
    pub subject: String,
    pub message: String,
}

/// Variant name of an error, taken from its `Debug` form.
fn error_name(e: &impl std::fmt::Debug) -> String {
    let dbg = format!("{e:?}");
    dbg.split(|c: char| !c.is_alphanumeric()).next().unwrap_or_default().to_string()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SampleReport {
    pub form: String,
    pub samples: usize,
    pub below_global: usize,
    pub off_essential: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckReport {
    pub valid: bool,
    pub violations: Vec<Violation>,
    pub sampling: Vec<SampleReport>,
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))
}

fn load_model(path: &Path) -> Result<ModelDescription, CliError> {
    ModelDescription::from_json(&read(path)?)
        .map_err(|e| CliError::validation(format!("{}: malformed model JSON: {e}", path.display())))
}

fn load_complex(path: &Path) -> Result<DualComplex, CliError> {
    let model = load_model(path)?;
    let errs = model.violations();
    if !errs.is_empty() {
        return Err(CliError::Validation(
            errs.iter().map(|e| format!("{}: {e}", path.display())).collect(),
        ));
    }
    Ok(build_complex(&model).expect("validated"))
}

fn load_form(path: &Path, c: &DualComplex) -> Result<PluricanonicalForm, CliError> {
    let form = PluricanonicalForm::from_json(&read(path)?)
        .map_err(|e| CliError::validation(format!("{}: malformed form JSON: {e}", path.display())))?;
    let errs = form.violations(c);
    if !errs.is_empty() {
        return Err(CliError::Validation(
            errs.iter().map(|e| format!("{}: {e}", path.display())).collect(),
        ));
    }
    Ok(form)
}

fn json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn rigid_point(bm: &BasicModel, x1: &str, x2: &str, e: u32) -> Result<RigidPoint, CliError> {
    let var = if e == 1 { "t" } else { "u" };
    let parse = |s: &str| BaseElement::parse_in(s, var).map_err(|err| CliError::validation(format!("{s:?}: {err}")));
    RigidPoint::over_extension(bm, parse(x1)?, parse(x2)?, e).map_err(CliError::validation)
}

fn point_from_args(p: &PointArgs) -> Result<(BasicModel, RigidPoint), CliError> {
    let bm = BasicModel::new(p.n1, p.n2).map_err(CliError::validation)?;
    let (Some(x1), Some(x2)) = (&p.x1, &p.x2) else {
        return Err(CliError::Usage("--x1 and --x2 are required".into()));
    };
    let x = rigid_point(&bm, x1, x2, p.ramification)?;
    Ok((bm, x))
}

/// Random interior point of a simplex with barycentric denominators at most
/// `12 * dim`.
fn sample_interior(rng: &mut impl Rng, s: &Simplex) -> SkeletonPoint {
    let weights: Vec<i64> = s.vertices.iter().map(|_| rng.gen_range(1..=12)).collect();
    let total: i64 = weights.iter().sum();
    SkeletonPoint {
        stratum: s.id.clone(),
        barycentric: s
            .vertices
            .iter()
            .zip(&weights)
            .map(|(v, &w)| (v.clone(), Q::new(w.into(), total.into())))
            .collect(),
    }
}

fn sample_form(c: &DualComplex, w: &Weighting<'_>, name: &str, samples: usize, rng: &mut impl Rng) -> SampleReport {
    let simplices: Vec<&Simplex> = c.simplices().collect();
    let mut report = SampleReport {
        form: name.to_string(),
        samples,
        below_global: 0,
        off_essential: 0,
    };
    if simplices.is_empty() {
        return report;
    }
    for _ in 0..samples {
        let s = simplices[rng.gen_range(0..simplices.len())];
        let p = sample_interior(rng, s);
        let v = w.weight_at(&p).expect("sampled point is valid");
        if v.value() < w.global_weight() {
            report.below_global += 1;
        }
        if w.is_essential(&s.id) && v != WeightValue::Exact(w.global_weight().clone()) {
            report.off_essential += 1;
        }
    }
    report
}

fn check(cfg: &RunConfig, model: Option<&Path>, forms: &[PathBuf], rigid: &[PathBuf]) -> Result<Outcome, CliError> {
    let mut violations = Vec::new();
    let mut sampling = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let complex = match model {
        Some(path) => {
            let m = load_model(path)?;
            let errs = m.violations();
            for e in &errs {
                violations.push(Violation {
                    file: path.display().to_string(),
                    error: error_name(e),
                    subject: e.subject().to_string(),
                    message: e.to_string(),
                });
            }
            errs.is_empty().then(|| build_complex(&m).expect("validated"))
        }
        None if !forms.is_empty() => return Err(CliError::Usage("--form needs a model".into())),
        None => None,
    };

    if let Some(c) = &complex {
        for path in forms {
            let form = PluricanonicalForm::from_json(&read(path)?)
                .map_err(|e| CliError::validation(format!("{}: malformed form JSON: {e}", path.display())))?;
            let errs = form.violations(c);
            for e in &errs {
                violations.push(Violation {
                    file: path.display().to_string(),
                    error: error_name(e),
                    subject: e.subject(),
                    message: e.to_string(),
                });
            }
            if errs.is_empty() {
                let w = Weighting::new(c, &form).expect("validated");
                sampling.push(sample_form(c, &w, &path.display().to_string(), cfg.samples, &mut rng));
            }
        }
    }

    for path in rigid {
        let spec: RigidPointSpec = serde_json::from_str(&read(path)?)
            .map_err(|e| CliError::validation(format!("{}: malformed rigid point JSON: {e}", path.display())))?;
        let var = if spec.ramification == 1 { "t" } else { "u" };
        let outcome = BasicModel::new(spec.n1, spec.n2).map_err(|e| (error_name(&e), e.to_string())).and_then(|bm| {
            let x1 = BaseElement::parse_in(&spec.x1, var).map_err(|e| (error_name(&e), format!("x1: {e}")))?;
            let x2 = BaseElement::parse_in(&spec.x2, var).map_err(|e| (error_name(&e), format!("x2: {e}")))?;
            RigidPoint::over_extension(&bm, x1, x2, spec.ramification).map_err(|e| (error_name(&e), e.to_string()))
        });
        if let Err((error, message)) = outcome {
            violations.push(Violation {
                file: path.display().to_string(),
                error,
                subject: "rigid point".into(),
                message,
            });
        }
    }

    let failed_samples = sampling.iter().any(|s| s.below_global + s.off_essential > 0);
    let valid = violations.is_empty() && !failed_samples;
    Ok(Outcome {
        text: json(&CheckReport {
            valid,
            violations,
            sampling,
        }),
        exit: if valid { 0 } else { 1 },
    })
}

/// Execute one command.
pub fn run(cfg: &RunConfig) -> Result<Outcome, CliError> {
    match &cfg.command {
        Command::Check { model, forms, rigid } => check(cfg, model.as_deref(), forms, rigid),
        Command::Complex { model, dot } => {
            let c = load_complex(model)?;
            Ok(Outcome::ok(if *dot { c.to_dot() } else { json(&ComplexReport::new(&c)) }))
        }
        Command::Weight {
            model,
            form,
            stratum,
            beta,
        } => {
            let c = load_complex(model)?;
            let f = load_form(form, &c)?;
            let p = SkeletonPoint {
                stratum: stratum.clone(),
                barycentric: beta.iter().cloned().collect(),
            };
            let w = Weighting::new(&c, &f).expect("validated");
            let v = w.weight_at(&p).map_err(CliError::validation)?;
            let face = c.phi(&p).map_err(CliError::validation)?.stratum;
            Ok(Outcome::ok(json(&WeightReport {
                stratum: face,
                value: v.value().clone().into(),
                bound: if v.is_exact() { "exact" } else { "strictLowerBound" }.into(),
            })))
        }
        Command::Ks { model, form } => {
            let c = load_complex(model)?;
            let f = load_form(form, &c)?;
            let w = Weighting::new(&c, &f).expect("validated");
            let mut report = SubcomplexReport::new(&c, &w.ks_skeleton());
            report.global_weight = Some(w.global_weight().clone().into());
            Ok(Outcome::ok(json(&report)))
        }
        Command::Essential { model, forms } => {
            let c = load_complex(model)?;
            let forms: Vec<PluricanonicalForm> = forms.iter().map(|p| load_form(p, &c)).collect::<Result<_, _>>()?;
            let s = weight::essential_skeleton(&c, &forms).map_err(CliError::validation)?;
            let mut report = SubcomplexReport::new(&c, &s);
            report.global_weights = Some(
                forms
                    .iter()
                    .map(|f| weight::global_weight(&c, f).expect("validated").into())
                    .collect(),
            );
            Ok(Outcome::ok(json(&report)))
        }
        Command::Flow { point, alpha, f, s } => {
            let time: FlowTime = s.parse().map_err(|e| CliError::Usage(format!("--s {s:?}: {e}")))?;
            let poly = MultivariatePoly::parse(f, 2).map_err(|e| CliError::validation(format!("{f:?}: {e}")))?;
            let expansion = match alpha {
                Some(a) => {
                    let bm = BasicModel::new(point.n1, point.n2).map_err(CliError::validation)?;
                    let (a1, a2) = a
                        .split_once(',')
                        .ok_or_else(|| CliError::Usage("--alpha expects a1,a2".into()))?;
                    let parse = |x: &str| parse_rational(x).map_err(|e| CliError::Usage(e.to_string()));
                    let alpha = (parse(a1)?, parse(a2)?);
                    flow::flow_value_monomial(&bm, &alpha, &time, &poly).map_err(CliError::validation)?
                }
                None => {
                    let (bm, x) = point_from_args(point)?;
                    flow::flow_value(&bm, &x, &time, &poly).map_err(CliError::validation)?
                }
            };
            Ok(Outcome::ok(json(&FlowReport {
                s: time.to_string(),
                expansion,
            })))
        }
        Command::Retract { point } => {
            let (bm, x) = point_from_args(point)?;
            let monomial = flow::retract_point(&x);
            let c = build_complex(&bm.model_description()).expect("basic model is valid");
            let skeleton_point = c.phi_inverse(&monomial).map_err(CliError::validation)?;
            Ok(Outcome::ok(json(&RetractReport {
                monomial,
                skeleton_point,
            })))
        }
    }
}

/// Parse `args`, run, and write output. Returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cfg = match RunConfig::try_parse_from(args) {
        Ok(cfg) => cfg,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(&cfg) {
        Ok(out) => {
            let written = match &cfg.output {
                Some(path) => fs::write(path, &out.text),
                None => {
                    print!("{}", out.text);
                    Ok(())
                }
            };
            if let Err(e) = written {
                eprintln!("error: cannot write output: {e}");
                return 2;
            }
            if out.exit != 0 {
                eprintln!("validation failed");
            }
            out.exit
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
