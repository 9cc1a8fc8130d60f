//! Subcommand definitions and their execution.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use krein::angles;
use krein::c_operator::COperator;
use krein::csymmetry::{self, naboko_estimate, CsymmetryReport, EigenSystem, NabokoOptions};
use krein::extension;
use krein::linalg::{self, CMat, CVec};
use krein::models::{self, GridSpec, Orientation};
use krein::space::{KreinSpace, Subspace, SubspacePair};
use krein::transition::TransitionOperator;

use crate::config::Config;
use crate::error::CliError;
use crate::io;
use crate::report::{num, nums, opt_num, Input, Report};

#[derive(Subcommand)]
pub enum Command {
    /// Signature of a fundamental symmetry.
    Inspect(InspectArgs),
    /// Build a C operator from a transition operator, generator, subspace
    /// pair or raw matrix.
    BuildC(BuildCArgs),
    /// Decide whether a J-self-adjoint matrix has a C-symmetry.
    CheckCsym(CheckCsymArgs),
    /// Angles between the fundamental subspaces and those of a transition
    /// operator.
    Angles(AnglesArgs),
    /// Complete a J-orthogonal eigenvector family to C operators.
    Extend(ExtendArgs),
    /// Resolvent integral along horizontal lines.
    Naboko(NabokoArgs),
    /// Generate model matrices.
    #[command(subcommand)]
    Model(ModelCommand),
    /// Conditioning of C across a family of problems.
    Sweep(SweepArgs),
}

#[derive(Args)]
pub struct InspectArgs {
    #[arg(long)]
    j: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Source {
    Transition,
    Generator,
    Pair,
    Matrix,
}

#[derive(Args)]
pub struct BuildCArgs {
    #[arg(long, value_enum)]
    from: Source,
    #[arg(long)]
    j: PathBuf,
    /// Transition operator (with --from transition).
    #[arg(long)]
    t: Option<PathBuf>,
    /// Generator Q (with --from generator).
    #[arg(long)]
    q: Option<PathBuf>,
    /// Basis of L+ as columns (with --from pair).
    #[arg(long)]
    plus: Option<PathBuf>,
    /// Basis of L- as columns (with --from pair).
    #[arg(long)]
    minus: Option<PathBuf>,
    /// Candidate C (with --from matrix).
    #[arg(long)]
    c: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the bare C matrix here.
    #[arg(long)]
    c_out: Option<PathBuf>,
}

#[derive(Args)]
pub struct CheckCsymArgs {
    #[arg(long)]
    h: PathBuf,
    #[arg(long)]
    j: PathBuf,
    /// Also evaluate the resolvent integral.
    #[arg(long)]
    naboko: bool,
    /// Vector for the resolvent integral; defaults to all ones.
    #[arg(long)]
    f: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
pub struct AnglesArgs {
    #[arg(long)]
    t: PathBuf,
    #[arg(long)]
    j: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
pub struct ExtendArgs {
    /// JSON object with `j`, `eigenvectors` (columns) and optional
    /// `eigenvalues`.
    #[arg(long)]
    input: PathBuf,
    /// Number of random family members to include.
    #[arg(long)]
    samples: Option<usize>,
    /// Materialize the member for this contraction parameter.
    #[arg(long)]
    parameter: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
pub struct NabokoArgs {
    #[arg(long)]
    h: PathBuf,
    /// Defaults to all ones.
    #[arg(long)]
    f: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    epsilons: Vec<f64>,
    #[arg(long)]
    xi_window: Option<f64>,
    #[arg(long)]
    quad_points: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
pub enum ModelCommand {
    /// Finite-difference `±sgn(x) d²/dx²` on a staggered grid.
    SgnLaplacian(SgnLaplacianArgs),
    /// Random J-self-adjoint matrix with a known C-symmetry.
    RandomCsym(RandomCsymArgs),
}

#[derive(Args)]
pub struct SgnLaplacianArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    length: Option<f64>,
    /// j-nonnegative (H = −J D₂, default) or j-nonpositive (H = J D₂).
    #[arg(long)]
    orientation: Option<Orientation>,
    /// Write H here.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write J here.
    #[arg(long)]
    j_out: Option<PathBuf>,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
pub struct RandomCsymArgs {
    #[arg(long)]
    j: PathBuf,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, required = true)]
    spectrum: Vec<f64>,
    /// `‖C‖` of the planted C-symmetry.
    #[arg(long, default_value_t = 2.0)]
    conditioning: f64,
    /// Write H here.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write the planted C here.
    #[arg(long)]
    c_out: Option<PathBuf>,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    /// The sign-indefinite model on refined grids.
    Model,
    /// The definite control model.
    Control,
    /// 2×2 transition operators approaching norm 1.
    Transition,
}

#[derive(Args)]
pub struct SweepArgs {
    #[arg(long, value_enum, default_value = "model")]
    family: Family,
    #[arg(long, value_delimiter = ',', default_values_t = [50, 100, 200])]
    ns: Vec<usize>,
    #[arg(long)]
    length: Option<f64>,
    /// j-nonnegative (H = −J D₂, default) or j-nonpositive (H = J D₂).
    #[arg(long)]
    orientation: Option<Orientation>,
    #[arg(long, value_delimiter = ',', default_values_t = [1, 2, 3, 4, 5, 6])]
    ks: Vec<u32>,
    /// Also write the table as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

pub const DEFAULT_LENGTH: f64 = 10.0;

pub struct Context {
    pub tol: f64,
    pub seed: u64,
    pub config: Config,
}

pub fn run(command: Command, ctx: &Context) -> Result<(), CliError> {
    match command {
        Command::Inspect(args) => inspect(args, ctx),
        Command::BuildC(args) => build_c(args, ctx),
        Command::CheckCsym(args) => check_csym(args, ctx),
        Command::Angles(args) => angles_cmd(args, ctx),
        Command::Extend(args) => extend(args, ctx),
        Command::Naboko(args) => naboko(args, ctx),
        Command::Model(ModelCommand::SgnLaplacian(args)) => sgn_laplacian(args, ctx),
        Command::Model(ModelCommand::RandomCsym(args)) => random_csym(args, ctx),
        Command::Sweep(args) => sweep(args, ctx),
    }
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| {
        CliError::internal("write_failed", format!("cannot write {}: {e}", path.display()))
    })
}

fn emit(value: &Value, out: Option<&Path>) -> Result<(), CliError> {
    let text = io::to_pretty(value);
    match out {
        Some(path) => write_text(path, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn write_matrix(path: &Path, m: &CMat) -> Result<(), CliError> {
    write_text(path, &io::to_pretty(&io::matrix_to_value(m)))
}

fn load_matrix(role: &'static str, path: &Path, report: &mut Report) -> Result<CMat, CliError> {
    let input = Input::load(role, path)?;
    let m = input.matrix()?;
    report.input(&input, m.shape());
    Ok(m)
}

fn load_vector(role: &'static str, path: &Path, report: &mut Report) -> Result<CVec, CliError> {
    let input = Input::load(role, path)?;
    let v = input.vector()?;
    report.input(&input, (v.len(), 1));
    Ok(v)
}

fn load_space(path: &Path, report: &mut Report, tol: f64) -> Result<KreinSpace, CliError> {
    let j = load_matrix("j", path, report)?;
    Ok(KreinSpace::with_tol(j, tol)?)
}

fn required<'a>(value: &'a Option<PathBuf>, flag: &str) -> Result<&'a Path, CliError> {
    value.as_deref().ok_or_else(|| {
        CliError::validation("missing_argument", format!("--{flag} is required for this source"))
    })
}

fn inspect(args: InspectArgs, ctx: &Context) -> Result<(), CliError> {
    let mut report = Report::new("inspect", ctx.tol);
    let space = load_space(&args.j, &mut report, ctx.tol)?;
    let result = json!({
        "dim": space.dim(),
        "n_plus": space.n_plus(),
        "n_minus": space.n_minus(),
    });
    emit(&report.finish(result), args.out.as_deref())
}

fn c_summary(c: &COperator, report: &mut Report) -> Value {
    if let Some(w) = c.transition().conditioning_warning() {
        report.warn(w);
    }
    let jc = c.space().j() * c.matrix();
    json!({
        "c": io::matrix_to_value(c.matrix()),
        "generator": io::matrix_to_value(c.generator()),
        "metric": io::matrix_to_value(c.metric()),
        "transition": io::matrix_to_value(c.transition().matrix()),
        "norm": num(c.norm()),
        "metric_condition": num(c.metric_condition()),
        "boundedness_margin": num(angles::boundedness_margin(c.transition())),
        "residuals": {
            "involution": num(c.involution_residual()),
            "metric_hermitian": num(linalg::hermitian_residual(&jc)),
            "metric_min_eigenvalue": num(c.metric_min_eigenvalue()),
            "generator_anticommutator": num(c.generator_anticommutator()),
        },
    })
}

fn build_c(args: BuildCArgs, ctx: &Context) -> Result<(), CliError> {
    let mut report = Report::new("build-c", ctx.tol);
    let space = load_space(&args.j, &mut report, ctx.tol)?;
    let (source, c) = match args.from {
        Source::Transition => {
            let t = load_matrix("t", required(&args.t, "t")?, &mut report)?;
            let op = TransitionOperator::new(space, t)?;
            ("transition", COperator::from_transition(&op)?)
        }
        Source::Generator => {
            let q = load_matrix("q", required(&args.q, "q")?, &mut report)?;
            ("generator", COperator::from_generator(&space, &q)?)
        }
        Source::Pair => {
            let plus = load_matrix("plus", required(&args.plus, "plus")?, &mut report)?;
            let minus = load_matrix("minus", required(&args.minus, "minus")?, &mut report)?;
            let pair = SubspacePair::new(
                Subspace::new(space.clone(), plus)?,
                Subspace::new(space, minus)?,
            )?;
            ("pair", COperator::from_subspace_pair(&pair)?)
        }
        Source::Matrix => {
            let m = load_matrix("c", required(&args.c, "c")?, &mut report)?;
            ("matrix", COperator::validate(&space, &m)?)
        }
    };
    if let Some(path) = &args.c_out {
        write_matrix(path, c.matrix())?;
    }
    let mut result = c_summary(&c, &mut report);
    result["source"] = json!(source);
    emit(&report.finish(result), args.out.as_deref())
}

fn ones(n: usize) -> CVec {
    CVec::from_element(n, linalg::c(1.0, 0.0))
}

fn naboko_options(
    config: &Config,
    epsilons: Vec<f64>,
    xi_window: Option<f64>,
    quad_points: Option<usize>,
) -> NabokoOptions {
    let defaults = NabokoOptions::default();
    NabokoOptions {
        epsilons: if epsilons.is_empty() {
            config.epsilons.clone().unwrap_or(defaults.epsilons)
        } else {
            epsilons
        },
        xi_window: xi_window.or(config.xi_window),
        quad_points: quad_points.or(config.quad_points).unwrap_or(defaults.quad_points),
        rel_tol: defaults.rel_tol,
    }
}

fn naboko_value(est: &csymmetry::NabokoEstimate) -> Value {
    json!({
        "points": est.points.iter().map(|p| json!({
            "epsilon": num(p.epsilon),
            "value": num(p.value),
            "error": num(p.error),
            "tail": num(p.tail),
        })).collect::<Vec<_>>(),
        "sup": num(est.sup),
        "divergent": est.divergent,
        "complex_spectrum": est.complex_spectrum,
        "xi_window": num(est.xi_window),
    })
}

fn csym_value(h: &CMat, r: &CsymmetryReport) -> Value {
    let c = r.c.as_ref();
    json!({
        "verdict": r.verdict,
        "reason": r.reason,
        "eigenvalues": io::complex_list(&r.eigenvalues),
        "c": c.map_or(Value::Null, |c| io::matrix_to_value(c.matrix())),
        "similarity": r.similarity.as_ref().map_or(Value::Null, io::matrix_to_value),
        "decomposition": r.decomposition.as_ref().map_or(Value::Null, |d| json!({
            "plus": io::matrix_to_value(&d.plus),
            "minus": io::matrix_to_value(&d.minus),
            "off_block": num(d.off_block),
        })),
        "residuals": {
            "commutator": opt_num(r.commutator),
            "commutator_relative": opt_num(c.and_then(|c| csymmetry::commutation_residual(h, c).ok())),
            "involution": opt_num(c.map(|c| c.involution_residual())),
            "metric_min_eigenvalue": opt_num(c.map(|c| c.metric_min_eigenvalue())),
            "similarity_hermitian": opt_num(r.similarity_residual),
        },
        "metric_condition": opt_num(r.metric_condition),
        "split_clusters": r.split_clusters,
    })
}

fn check_csym(args: CheckCsymArgs, ctx: &Context) -> Result<(), CliError> {
    let mut report = Report::new("check-csym", ctx.tol);
    let h = load_matrix("h", &args.h, &mut report)?;
    let space = load_space(&args.j, &mut report, ctx.tol)?;
    let result = csymmetry::construct_from_spectrum(&space, &h)?;
    for w in &result.warnings {
        report.warn(w.clone());
    }
    let mut value = csym_value(&h, &result);
    if args.naboko {
        let f = match &args.f {
            Some(path) => load_vector("f", path, &mut report)?,
            None => ones(h.nrows()),
        };
        let options = naboko_options(&ctx.config, Vec::new(), None, None);
        value["naboko"] = naboko_value(&naboko_estimate(&h, &f, &options)?);
    }
    emit(&report.finish(value), args.out.as_deref())
}

fn angles_cmd(args: AnglesArgs, ctx: &Context) -> Result<(), CliError> {
    let mut report = Report::new("angles", ctx.tol);
    let t = load_matrix("t", &args.t, &mut report)?;
    let space = load_space(&args.j, &mut report, ctx.tol)?;
    let op = TransitionOperator::new(space, t)?;
    let angles = angles::krein_angles(&op);
    if let Some(w) = &angles.warning {
        report.warn(w.clone());
    }
    let value = json!({
        "theta_plus": nums(&angles.theta_plus),
        "theta_minus": nums(&angles.theta_minus),
        "norm_theta": num(angles.norm_theta),
        "bounded_margin": num(angles.bounded_margin),
        "cross_check": num(angles.cross_check),
    });
    emit(&report.finish(value), args.out.as_deref())
}

fn extend(args: ExtendArgs, ctx: &Context) -> Result<(), CliError> {
    let mut report = Report::new("extend", ctx.tol);
    let input = Input::load("system", &args.input)?;
    let j = io::matrix_from_value(input.field("j")?, &input.path)?;
    let vectors = io::matrix_from_value(input.field("eigenvectors")?, &input.path)?;
    let eigenvalues = match input.value.get("eigenvalues") {
        Some(v) => Some(io::complex_values(v, &input.path)?),
        None => None,
    };
    report.input(&input, vectors.shape());
    let space = KreinSpace::with_tol(j, ctx.tol)?;
    let system = EigenSystem::from_vectors(&space, &vectors, eigenvalues)?;
    let pair = extension::sign_separation(&system)?;
    for w in &pair.warnings {
        report.warn(w.clone());
    }
    let partial = extension::build_partial_c(&pair)?;
    let family = extension::enumerate_extensions(&partial)?;
    let canonical = family.canonical();

    let member_value = |k: &CMat| -> Result<Value, CliError> {
        let c = family.member(k)?;
        Ok(json!({
            "parameter": io::matrix_to_value(k),
            "c": io::matrix_to_value(c.matrix()),
            "agreement_residual": num(partial.agreement_residual(c.matrix())),
            "involution": num(c.involution_residual()),
            "metric_min_eigenvalue": num(c.metric_min_eigenvalue()),
        }))
    };
    let mut members = Vec::new();
    if let Some(path) = &args.parameter {
        let k = load_matrix("parameter", path, &mut report)?;
        members.push(member_value(&k)?);
    }
    let samples = args.samples.or(ctx.config.samples).unwrap_or(0);
    if samples > 0 {
        report.seed(ctx.seed);
        let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
        for _ in 0..samples {
            let k = family.random_parameter(&mut rng, 0.01);
            members.push(member_value(&k)?);
        }
    }
    let (rows, cols) = family.parameter_shape();
    let value = json!({
        "l0_plus_dim": pair.l0_plus.dim(),
        "l0_minus_dim": pair.l0_minus.dim(),
        "complement_dim": pair.complement.dim(),
        "complement_signature": [pair.complement_signature.0, pair.complement_signature.1],
        "g0_min_eigenvalue": num(partial.g0_min_eigenvalue()),
        "uniqueness": extension::uniqueness_verdict(&family),
        "parameter_dimension": family.parameter_dimension(),
        "parameter_shape": [rows, cols],
        "canonical_c": io::matrix_to_value(canonical.matrix()),
        "canonical_residuals": {
            "agreement": num(partial.agreement_residual(canonical.matrix())),
            "involution": num(canonical.involution_residual()),
            "metric_min_eigenvalue": num(canonical.metric_min_eigenvalue()),
        },
        "members": members,
    });
    emit(&report.finish(value), args.out.as_deref())
}

fn naboko(args: NabokoArgs, ctx: &Context) -> Result<(), CliError> {
    let mut report = Report::new("naboko", ctx.tol);
    let h = load_matrix("h", &args.h, &mut report)?;
    let f = match &args.f {
        Some(path) => load_vector("f", path, &mut report)?,
        None => ones(h.nrows()),
    };
    let options = naboko_options(&ctx.config, args.epsilons, args.xi_window, args.quad_points);
    let est = naboko_estimate(&h, &f, &options)?;
    if est.divergent {
        report.warn("integral grows without bound as epsilon decreases");
    }
    emit(&report.finish(naboko_value(&est)), args.out.as_deref())
}

fn grid_value(spec: &GridSpec) -> Value {
    json!({
        "n": spec.n(),
        "half_length": num(spec.half_length()),
        "spacing": num(spec.spacing()),
    })
}

fn sgn_laplacian(args: SgnLaplacianArgs, ctx: &Context) -> Result<(), CliError> {
    let report = Report::new("model sgn-laplacian", ctx.tol);
    let length = args.length.or(ctx.config.length).unwrap_or(DEFAULT_LENGTH);
    let orientation = args.orientation.or(ctx.config.orientation).unwrap_or_default();
    let spec = GridSpec::new(args.n, length)?;
    let (h, space) = models::sgn_laplacian(&spec, orientation)?;
    if let Some(path) = &args.out {
        write_matrix(path, &h)?;
    }
    if let Some(path) = &args.j_out {
        write_matrix(path, space.j())?;
    }
    let jh = space.j() * &h;
    let value = json!({
        "grid": grid_value(&spec),
        "orientation": orientation.to_string(),
        "dim": space.dim(),
        "n_plus": space.n_plus(),
        "n_minus": space.n_minus(),
        "j_selfadjoint_residual": num(space.j_selfadjoint_residual(&h)?),
        "jh_min_eigenvalue": num(linalg::hermitian_eigenvalues(&jh)[0]),
        "smallest_magnitudes": nums(&models::smallest_magnitudes(&h, 5)?),
    });
    emit(&report.finish(value), args.report.as_deref())
}

fn random_csym(args: RandomCsymArgs, ctx: &Context) -> Result<(), CliError> {
    let mut report = Report::new("model random-csym", ctx.tol);
    let space = load_space(&args.j, &mut report, ctx.tol)?;
    report.seed(ctx.seed);
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let (h, c) = models::random_csymmetric(&space, &args.spectrum, args.conditioning, &mut rng)?;
    if let Some(path) = &args.out {
        write_matrix(path, &h)?;
    }
    if let Some(path) = &args.c_out {
        write_matrix(path, &c)?;
    }
    let value = json!({
        "dim": space.dim(),
        "spectrum": nums(&args.spectrum),
        "conditioning": num(args.conditioning),
        "h": io::matrix_to_value(&h),
        "c": io::matrix_to_value(&c),
        "j_selfadjoint_residual": num(space.j_selfadjoint_residual(&h)?),
        "commutator": num(linalg::op_norm(&(&h * &c - &c * &h))),
    });
    emit(&report.finish(value), args.report.as_deref())
}

fn sweep(args: SweepArgs, ctx: &Context) -> Result<(), CliError> {
    let report = Report::new("sweep", ctx.tol);
    let length = args.length.or(ctx.config.length).unwrap_or(DEFAULT_LENGTH);
    let orientation = args.orientation.or(ctx.config.orientation).unwrap_or_default();
    let specs = || -> Result<Vec<GridSpec>, CliError> {
        args.ns
            .iter()
            .map(|&n| GridSpec::new(n, length).map_err(CliError::from))
            .collect()
    };
    let (family, rows, csv_text) = match args.family {
        Family::Model => {
            let rows = models::conditioning_sweep(&specs()?, orientation)?;
            ("model", serde_json::to_value(&rows), to_csv(&rows)?)
        }
        Family::Control => {
            let rows = models::control_sweep(&specs()?)?;
            ("control", serde_json::to_value(&rows), to_csv(&rows)?)
        }
        Family::Transition => {
            let rows = models::transition_sweep(&args.ks)?;
            ("transition", serde_json::to_value(&rows), to_csv(&rows)?)
        }
    };
    let rows = rows.map_err(|e| CliError::internal("serialization", e.to_string()))?;
    if let Some(path) = &args.csv {
        write_text(path, &csv_text)?;
    }
    let mut value = json!({ "family": family, "rows": rows });
    if matches!(args.family, Family::Model) {
        value["orientation"] = json!(orientation.to_string());
    }
    emit(&report.finish(value), args.out.as_deref())
}

fn to_csv<T: serde::Serialize>(rows: &[T]) -> Result<String, CliError> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    for row in rows {
        writer
            .serialize(row)
            .map_err(|e| CliError::internal("serialization", e.to_string()))?;
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| CliError::internal("serialization", e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::internal("serialization", e.to_string()))
}
