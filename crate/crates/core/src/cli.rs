//! Command-line front end. Results go to standard output or `--output`;
//! diagnostics go to standard error under `EXPECTATION_ATLAS_LOG`.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::boundary::{eigenset, sampled_outer_hull, sphere_directions, trace_faces, BoundaryFace};
use crate::certificates::{is_member_positivity, positivity_matrix, purity_report, PurityReport};
use crate::error::{AtlasError, Result};
use crate::flow::{
    family_at, integrate_flow, solve_marginal, Classification, FlowParams, FlowResult, Integrator,
};
use crate::gibbs::{expectation_map, BetaVector, ExpectationVector};
use crate::io::{fmt_num, load_marginals, load_operator_set, matrix_to_json, write_atomic};
use crate::linalg::{build_basis, commutator_norm, structure_tensors, OperatorSet};

/// Exit code for argument errors; distinct from every classification code.
pub const EXIT_USAGE: i32 = 64;

/// Process exit code for a library error.
pub fn error_exit_code(err: &AtlasError) -> i32 {
    match err {
        AtlasError::Validation(_) => 5,
        AtlasError::Parse { .. } => 6,
        AtlasError::Io(_) => 7,
        AtlasError::Numerical(_) => 8,
        AtlasError::Unsupported(_) => 9,
        AtlasError::Domain(_) => 10,
        AtlasError::Precondition(_) => 11,
    }
}

#[derive(Debug, Parser)]
#[command(name = "expectation-atlas", version, about = "Map the jointly attainable expectation values of Hermitian operators")]
pub struct Cli {
    /// Worker threads for direction sweeps and grid evaluation.
    #[arg(long, global = true, default_value_t = 1, value_parser = clap::value_parser!(u16).range(1..))]
    pub threads: u16,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check an operator set and report its invariants.
    Validate(InputArgs),
    /// Trace the boundary of a two-operator expectation body.
    Boundary(SweepArgs),
    /// Expectations of every eigenvector of each direction operator (two operators).
    Eigenset(SweepArgs),
    /// Sampled supporting half-spaces for any number of operators.
    Hull(HullArgs),
    /// Evaluate the expectation map on a rectangular beta grid.
    Betamap(BetamapArgs),
    /// Decide membership of a target and find its Gibbs state.
    Solve(SolveArgs),
    /// Solve, then describe every state with the same expectations.
    Family(SolveArgs),
    /// Look for a joint state with given subsystem states.
    Marginal(MarginalArgs),
    /// Positivity-matrix membership and purity residuals in the full basis.
    Certify(CertifyArgs),
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Operator-set JSON file.
    #[arg(long)]
    pub input: PathBuf,
    /// Subtract tr(O)/N from each operator and report the offsets.
    #[arg(long)]
    pub project_traceless: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Write the result here instead of standard output.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, default_value_t = 360)]
    pub dirs: usize,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct HullArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, default_value_t = 1000)]
    pub dirs: usize,
    /// Offset into the low-discrepancy direction sequence.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Also test this point against the half-spaces.
    #[arg(long, value_parser = parse_vector, allow_hyphen_values = true)]
    pub target: Option<Coords>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct BetamapArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// One per operator: "lo:hi:count" or a single value.
    #[arg(long = "grid", value_parser = parse_axis, allow_hyphen_values = true, required = true)]
    pub grid: Vec<Vec<f64>>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct FlowArgs {
    /// Flow time step [default: 0.4 for euler, 0.05 for rk4]
    #[arg(long)]
    pub dt: Option<f64>,
    /// Maximum step attempts [default: 2000 for euler, 5000 for rk4]
    #[arg(long)]
    pub max_steps: Option<usize>,
    /// Interior once delta = |E - e|^2 / 2 drops below this [default: 1e-16]
    #[arg(long)]
    pub delta_tol: Option<f64>,
    /// Divergence threshold on |beta| [default: 1e3 (1 + |beta_0|)]
    #[arg(long)]
    pub beta_cap: Option<f64>,
    /// Time integrator [default: euler]
    #[arg(long)]
    pub integrator: Option<Integrator>,
    /// Write the full trajectory (t, delta, beta) instead of (t, delta).
    #[arg(long)]
    pub full_trajectory: bool,
}

impl FlowArgs {
    pub fn params(&self) -> FlowParams {
        let mut p = match self.integrator {
            Some(Integrator::Rk4) => FlowParams::precise(),
            _ => FlowParams::default(),
        };
        if let Some(dt) = self.dt {
            p.dt = dt;
        }
        if let Some(m) = self.max_steps {
            p.max_steps = m;
        }
        if let Some(t) = self.delta_tol {
            p.delta_tol = t;
        }
        if self.beta_cap.is_some() {
            p.beta_cap = self.beta_cap;
        }
        p
    }
}

impl clap::ValueEnum for Integrator {
    fn value_variants<'a>() -> &'a [Self] {
        &[Integrator::Euler, Integrator::Rk4]
    }

    fn to_possible_value(&self) -> Option<clap::builder::PossibleValue> {
        Some(clap::builder::PossibleValue::new(self.as_str()))
    }
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Comma-separated target expectations, e.g. --target=0.5,-0.2
    #[arg(long, value_parser = parse_vector, allow_hyphen_values = true)]
    pub target: Coords,
    #[command(flatten)]
    pub flow: FlowArgs,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MarginalArgs {
    /// JSON file with "rho_a" and "rho_b" matrices.
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub flow: FlowArgs,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CertifyArgs {
    /// Hilbert-space dimension N of the generated basis.
    #[arg(long)]
    pub dim: usize,
    /// Coordinates x_a = tr(rho T_a), N^2 - 1 of them.
    #[arg(long, value_parser = parse_vector, allow_hyphen_values = true)]
    pub target: Coords,
    /// Smallest eigenvalue of M(x) still counted as non-negative.
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    /// Also classify x with the inverse flow and report disagreement.
    #[arg(long)]
    pub flow: bool,
    #[command(flatten)]
    pub flow_args: FlowArgs,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

/// A comma-separated real vector; spelled with a full path so clap parses it as one value.
pub type Coords = ::std::vec::Vec<f64>;

fn parse_vector(s: &str) -> std::result::Result<Coords, String> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("bad number '{t}': {e}")))
        .collect::<std::result::Result<Vec<_>, _>>()
        .and_then(|v| {
            if v.iter().all(|x| x.is_finite()) {
                Ok(v)
            } else {
                Err("values must be finite".into())
            }
        })
}

fn parse_axis(s: &str) -> std::result::Result<Vec<f64>, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("bad number '{t}': {e}"));
    match parts.as_slice() {
        [v] => Ok(vec![num(v)?]),
        [lo, hi, count] => {
            let (lo, hi) = (num(lo)?, num(hi)?);
            let count: usize = count.trim().parse().map_err(|e| format!("bad count '{count}': {e}"))?;
            match count {
                0 => Err("grid count must be positive".into()),
                1 => Ok(vec![lo]),
                _ => Ok((0..count).map(|k| lo + (hi - lo) * k as f64 / (count - 1) as f64).collect()),
            }
        }
        _ => Err(format!("grid axis '{s}' must be 'lo:hi:count' or a single value")),
    }
}

/// A finished command: bytes to emit and the process exit code.
struct Artifact {
    bytes: Vec<u8>,
    exit: i32,
}

impl Artifact {
    fn json(value: Value, exit: i32) -> Self {
        let mut bytes = serde_json::to_vec_pretty(&value).expect("JSON values serialize");
        bytes.push(b'\n');
        Self { bytes, exit }
    }
}

fn emit(artifact: &Artifact, output: Option<&Path>, stdout: &mut dyn Write) -> Result<()> {
    match output {
        Some(path) => write_atomic(path, &artifact.bytes),
        None => {
            stdout.write_all(&artifact.bytes)?;
            Ok(())
        }
    }
}

fn load(args: &InputArgs) -> Result<(OperatorSet, Vec<f64>)> {
    load_operator_set(&args.input, args.project_traceless)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn shifted(v: &[f64], offsets: &[f64]) -> Vec<f64> {
    v.iter().zip(offsets).map(|(x, c)| x + c).collect()
}

fn cmd_validate(args: &InputArgs) -> Result<Artifact> {
    let (set, offsets) = load(args)?;
    let ops = set.ops();
    let mut commutators = Vec::new();
    for i in 0..ops.len() {
        for j in (i + 1)..ops.len() {
            commutators.push(json!({"i": i, "j": j, "norm": commutator_norm(&ops[i], &ops[j])}));
        }
    }
    let gram = set.gram();
    let value = json!({
        "valid": true,
        "dim": set.dim(),
        "count": set.len(),
        "labels": set.labels(),
        "offsets": offsets,
        "traces": ops.iter().map(|o| o.trace()).collect::<Vec<_>>(),
        "frobenius_norms": ops.iter().map(|o| o.frobenius_norm()).collect::<Vec<_>>(),
        "gram": (0..set.len()).map(|i| (0..set.len()).map(|j| gram[(i, j)]).collect::<Vec<_>>()).collect::<Vec<_>>(),
        "gram_spectrum": set.gram_spectrum()?,
        "commutator_norms": commutators,
    });
    Ok(Artifact::json(value, 0))
}

fn csv(header: &[String], rows: impl IntoIterator<Item = Vec<String>>) -> Vec<u8> {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out.into_bytes()
}

fn sweep_header() -> Vec<String> {
    ["theta", "e1", "e2", "support", "ground_dim", "level"].iter().map(|s| s.to_string()).collect()
}

/// Boundary points of one face, counterclockwise, shifted by the affine offsets.
fn face_points(f: &BoundaryFace, offsets: &[f64]) -> Result<Vec<[f64; 2]>> {
    let raw: Vec<[f64; 2]> = match &f.point {
        Some(p) => vec![[p.as_slice()[0], p.as_slice()[1]]],
        None => {
            let e = &f.direction;
            let tangent = [-e[1], e[0]];
            let ops = f.projected_set.as_ref().expect("degenerate face carries its projected set");
            let along = crate::linalg::HermitianOperator::linear_combination(&tangent, ops).eigenvalues()?;
            [along[along.len() - 1], along[0]]
                .iter()
                .map(|lam| [f.support * e[0] + lam * tangent[0], f.support * e[1] + lam * tangent[1]])
                .collect()
        }
    };
    Ok(raw.into_iter().map(|p| [p[0] + offsets[0], p[1] + offsets[1]]).collect())
}

fn cmd_boundary(args: &SweepArgs) -> Result<Artifact> {
    let (set, offsets) = load(&args.input)?;
    if set.len() != 2 {
        return Err(AtlasError::Unsupported(format!(
            "boundary tracing needs exactly 2 operators, got {}; use the 'hull' command (sampled outer hull) for more",
            set.len()
        )));
    }
    let mut rows = Vec::new();
    for (theta, f) in trace_faces(&set, args.dirs)? {
        let support = f.support + dot(&f.direction, &offsets);
        for p in face_points(&f, &offsets)? {
            rows.push((theta, p, support, f.ground_dim, 0usize));
        }
    }
    Ok(sweep_artifact(rows, args.out.format))
}

fn sweep_artifact(rows: Vec<(f64, [f64; 2], f64, usize, usize)>, format: Option<Format>) -> Artifact {
    match format.unwrap_or(Format::Csv) {
        Format::Csv => Artifact {
            bytes: csv(
                &sweep_header(),
                rows.iter().map(|(t, p, s, m, l)| vec![fmt_num(*t), fmt_num(p[0]), fmt_num(p[1]), fmt_num(*s), m.to_string(), l.to_string()]),
            ),
            exit: 0,
        },
        Format::Json => Artifact::json(
            Value::Array(
                rows.iter()
                    .map(|(t, p, s, m, l)| json!({"theta": t, "e1": p[0], "e2": p[1], "support": s, "ground_dim": m, "level": l}))
                    .collect(),
            ),
            0,
        ),
    }
}

fn cmd_eigenset(args: &SweepArgs) -> Result<Artifact> {
    let (set, offsets) = load(&args.input)?;
    if set.len() != 2 {
        return Err(AtlasError::Unsupported(format!(
            "the eigenset sweep needs exactly 2 operators, got {}; use the 'hull' command (sampled outer hull) for more",
            set.len()
        )));
    }
    let rows = eigenset(&set, args.dirs)?
        .into_iter()
        .map(|p| {
            let shift = dot(&p.direction, &offsets);
            (p.theta, [p.point[0] + offsets[0], p.point[1] + offsets[1]], p.eigenvalue + shift, 1, p.level)
        })
        .collect();
    Ok(sweep_artifact(rows, args.out.format))
}

fn cmd_hull(args: &HullArgs) -> Result<Artifact> {
    let (set, offsets) = load(&args.input)?;
    let n = set.len();
    let dirs = sphere_directions(n, args.dirs, args.seed)?;
    let hull = sampled_outer_hull(&set, &dirs)?;
    let support = |e: &[f64], s: f64| s + dot(e, &offsets);
    let membership = match &args.target {
        Some(t) if t.len() != n => {
            return Err(AtlasError::Domain(format!("target has {} values for {n} operators", t.len())));
        }
        Some(t) => {
            let local: Vec<f64> = t.iter().zip(&offsets).map(|(x, c)| x - c).collect();
            Some((hull.contains(&local), hull.violation(&local)))
        }
        None => None,
    };
    let exit = match membership {
        Some((false, _)) => Classification::Exterior.exit_code(),
        _ => 0,
    };
    match args.out.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut header: Vec<String> = (1..=n).map(|i| format!("d{i}")).collect();
            header.push("support".into());
            let rows = hull.rows().iter().map(|(e, s)| e.iter().map(|v| fmt_num(*v)).chain([fmt_num(support(e, *s))]).collect());
            Ok(Artifact { bytes: csv(&header, rows), exit })
        }
        Format::Json => Ok(Artifact::json(
            json!({
                "directions": hull.rows().iter().map(|(e, _)| e.clone()).collect::<Vec<_>>(),
                "support": hull.rows().iter().map(|(e, s)| support(e, *s)).collect::<Vec<_>>(),
                "target_in_outer_hull": membership.map(|m| m.0),
                "max_violation": membership.map(|m| m.1),
            }),
            exit,
        )),
    }
}

fn cmd_betamap(args: &BetamapArgs) -> Result<Artifact> {
    let (set, offsets) = load(&args.input)?;
    let n = set.len();
    if args.grid.len() != n {
        return Err(AtlasError::Domain(format!("need one --grid per operator ({n}), got {}", args.grid.len())));
    }
    let total: usize = args.grid.iter().map(|a| a.len()).product();
    let points: Vec<Vec<f64>> = (0..total)
        .map(|mut idx| {
            let mut beta = vec![0.0; n];
            for axis in (0..n).rev() {
                let len = args.grid[axis].len();
                beta[axis] = args.grid[axis][idx % len];
                idx /= len;
            }
            beta
        })
        .collect();
    let values = points
        .par_iter()
        .map(|b| Ok(shifted(expectation_map(&BetaVector::new(b.clone())?, &set)?.as_slice(), &offsets)))
        .collect::<Result<Vec<_>>>()?;
    match args.out.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let header: Vec<String> = (1..=n).map(|i| format!("beta{i}")).chain((1..=n).map(|i| format!("e{i}"))).collect();
            let rows = points.iter().zip(&values).map(|(b, e)| b.iter().chain(e).map(|v| fmt_num(*v)).collect());
            Ok(Artifact { bytes: csv(&header, rows), exit: 0 })
        }
        Format::Json => Ok(Artifact::json(
            Value::Array(points.iter().zip(&values).map(|(b, e)| json!({"beta": b, "e": e})).collect()),
            0,
        )),
    }
}

fn flow_json(result: &FlowResult, target: &[f64], offsets: &[f64], full: bool) -> Value {
    let trajectory: Vec<Value> = result
        .trajectory
        .iter()
        .map(|s| if full { json!({"t": s.t, "delta": s.delta, "beta": s.beta}) } else { json!({"t": s.t, "delta": s.delta}) })
        .collect();
    json!({
        "classification": result.classification.as_str(),
        "termination": result.termination.as_str(),
        "exit_code": result.classification.exit_code(),
        "target": target,
        "achieved": shifted(result.final_expectations(), offsets),
        "residual": result.residual,
        "beta_final": result.beta_final.as_slice(),
        "attempts": result.attempts,
        "accepted_steps": result.trajectory.len() - 1,
        "trajectory": trajectory,
        "state": result.state.as_ref().map(|s| matrix_to_json(s.as_mat())),
    })
}

fn solve_common(args: &SolveArgs) -> Result<(OperatorSet, Vec<f64>, FlowResult)> {
    let (set, offsets) = load(&args.input)?;
    if args.target.len() != set.len() {
        return Err(AtlasError::Domain(format!("target has {} values for {} operators", args.target.len(), set.len())));
    }
    let local: Vec<f64> = args.target.iter().zip(&offsets).map(|(x, c)| x - c).collect();
    let result = integrate_flow(&set, &ExpectationVector::new(local)?, &BetaVector::zeros(set.len()), &args.flow.params())?;
    Ok((set, offsets, result))
}

fn cmd_solve(args: &SolveArgs) -> Result<Artifact> {
    let (_, offsets, result) = solve_common(args)?;
    let exit = result.classification.exit_code();
    Ok(Artifact::json(flow_json(&result, &args.target, &offsets, args.flow.full_trajectory), exit))
}

fn cmd_family(args: &SolveArgs) -> Result<Artifact> {
    let (set, offsets, result) = solve_common(args)?;
    let mut value = flow_json(&result, &args.target, &offsets, args.flow.full_trajectory);
    if result.classification == Classification::Interior {
        let family = family_at(&set, &result.beta_final)?;
        value["perp_dim"] = json!(family.len());
        value["intervals"] = json!(family.intervals.iter().map(|(lo, hi)| [*lo, *hi]).collect::<Vec<_>>());
        value["perp_basis"] = Value::Array(family.perp_basis.iter().map(|o| matrix_to_json(o.as_mat())).collect());
    }
    Ok(Artifact::json(value, result.classification.exit_code()))
}

fn cmd_marginal(args: &MarginalArgs) -> Result<Artifact> {
    let (rho_a, rho_b) = load_marginals(&args.input)?;
    let result = solve_marginal(&rho_a, &rho_b, &args.flow.params())?;
    let mut value = flow_json(&result, &crate::flow::marginal_target(&rho_a, &rho_b)?.into_vec(), &vec![0.0; result.beta_final.len()], args.flow.full_trajectory);
    value["dim_a"] = json!(rho_a.dim());
    value["dim_b"] = json!(rho_b.dim());
    if let Some(state) = &result.state {
        value["partial_trace_a"] = matrix_to_json(state.partial_trace_b(rho_a.dim(), rho_b.dim())?.as_mat());
        value["partial_trace_b"] = matrix_to_json(state.partial_trace_a(rho_a.dim(), rho_b.dim())?.as_mat());
    }
    Ok(Artifact::json(value, result.classification.exit_code()))
}

fn purity_json(r: &PurityReport) -> Value {
    json!({
        "r_quadratic": [r.r_quadratic.0, r.r_quadratic.1],
        "r_charpoly": r.r_charpoly,
        "r_subdet": r.r_subdet,
        "pure": r.pure,
    })
}

fn cmd_certify(args: &CertifyArgs) -> Result<Artifact> {
    let basis = build_basis(args.dim)?;
    if args.target.len() != basis.len() {
        return Err(AtlasError::Domain(format!(
            "N = {} needs {} coordinates, got {}",
            args.dim,
            basis.len(),
            args.target.len()
        )));
    }
    let tensors = structure_tensors(&basis);
    let min_eig = positivity_matrix(&args.target, &tensors)?.min_eigenvalue()?;
    let member = is_member_positivity(&args.target, &tensors, args.tol)?;
    let purity = purity_report(&args.target, &basis)?;
    let mut value = json!({
        "dim": args.dim,
        "x": args.target,
        "min_eigenvalue": min_eig,
        "member": member,
        "purity": purity_json(&purity),
    });
    if args.flow {
        let set = basis.to_operator_set();
        let result = integrate_flow(&set, &ExpectationVector::new(args.target.clone())?, &BetaVector::zeros(set.len()), &args.flow_args.params())?;
        let flow_member = result.classification.is_member();
        value["flow_classification"] = json!(result.classification.as_str());
        value["disagreement"] = json!(flow_member.is_some_and(|m| m != member));
        if flow_member.is_some_and(|m| m != member) {
            log::warn!("positivity certificate and flow disagree: member = {member}, flow = {}", result.classification.as_str());
        }
    }
    Ok(Artifact::json(value, if member { 0 } else { 2 }))
}

fn dispatch(cli: &Cli) -> Result<(Artifact, Option<&Path>)> {
    Ok(match &cli.command {
        Command::Validate(a) => (cmd_validate(a)?, None),
        Command::Boundary(a) => (cmd_boundary(a)?, a.out.output.as_deref()),
        Command::Eigenset(a) => (cmd_eigenset(a)?, a.out.output.as_deref()),
        Command::Hull(a) => (cmd_hull(a)?, a.out.output.as_deref()),
        Command::Betamap(a) => (cmd_betamap(a)?, a.out.output.as_deref()),
        Command::Solve(a) => (cmd_solve(a)?, a.output.as_deref()),
        Command::Family(a) => (cmd_family(a)?, a.output.as_deref()),
        Command::Marginal(a) => (cmd_marginal(a)?, a.output.as_deref()),
        Command::Certify(a) => (cmd_certify(a)?, a.output.as_deref()),
    })
}

/// Runs the CLI on `args` (including the program name) and returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let rendered = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(stderr, "{rendered}");
            } else {
                let _ = write!(stdout, "{rendered}");
            }
            return code;
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.threads as usize).build() {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(stderr, "error: cannot start thread pool: {e}");
            return 1;
        }
    };
    let outcome = pool
        .install(|| dispatch(&cli))
        .and_then(|(artifact, output)| emit(&artifact, output, stdout).map(|_| artifact.exit));
    match outcome {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            error_exit_code(&e)
        }
    }
}

/// Installs the `EXPECTATION_ATLAS_LOG` logger (default level: error).
pub fn init_logging() {
    let env = env_logger::Env::new().filter_or("EXPECTATION_ATLAS_LOG", "error");
    let _ = env_logger::Builder::from_env(env).try_init();
}
