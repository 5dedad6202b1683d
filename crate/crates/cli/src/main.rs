//! `horizon-pmp`: run verification suites, weight checks and horizon sweeps
//! on catalog problems.
//!
//! Exit status: 0 pass, 1 fail, 2 inconclusive, 3 configuration error.

use clap::{Args, Parser, Subcommand};
use horizon_pmp::catalog::{self, GridRequest, Params};
use horizon_pmp::exec::Exec;
use horizon_pmp::horizonlab::{self, SwitchingOptions};
use horizon_pmp::problem::CandidateProcess;
use horizon_pmp::report::{to_json, Verdict};
use horizon_pmp::spaces::{SampledFn, DEFAULT_TAIL_TOL};
use horizon_pmp::verify::{self, Subject, Tolerances, VerifyConfig};
use horizon_pmp::weights::{check_properties_p2, check_properties_star, DistributionSpec, QuadratureConfig, WeightSpec};
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const TMAX_ENV: &str = "HORIZON_PMP_TMAX";
const CONFIG_ERROR: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "horizon-pmp", version, about = "Verify optimality conditions for infinite-horizon control problems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run verification suites on a catalog problem.
    Verify(Box<VerifyArgs>),
    /// Check the weight properties of a pair (ν, ω).
    Weights(WeightsArgs),
    /// Sweep truncated problems over horizons and test convergence.
    Horizon(HorizonArgs),
    /// List catalog entries with their parameters.
    CatalogList,
}

#[derive(Args, Debug)]
struct ProblemArgs {
    /// Catalog problem, e.g. `catalog:regulator`.
    #[arg(value_name = "PROBLEM")]
    positional: Option<String>,
    /// Catalog problem (alternative to the positional argument).
    #[arg(long)]
    problem: Option<String>,
    /// Parameter override `name=value`; repeatable.
    #[arg(long = "param", value_name = "K=V")]
    params: Vec<String>,
    /// Horizon of the sampling grid.
    #[arg(long)]
    tmax: Option<f64>,
    /// Number of grid nodes.
    #[arg(long, default_value_t = catalog::DEFAULT_GRID_N)]
    grid_n: usize,
    /// Output directory for the JSON report and CSV series.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Run every data-parallel loop sequentially.
    #[arg(long)]
    sequential: bool,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    /// Candidate state CSV (`t, v_1.., dv_1..`); requires --candidate-u.
    #[arg(long)]
    candidate_x: Option<PathBuf>,
    /// Candidate control CSV; requires --candidate-x.
    #[arg(long)]
    candidate_u: Option<PathBuf>,
    /// Comma-separated suites; defaults to the entry's designated suites.
    #[arg(long)]
    suite: Option<String>,
    /// Seed of the random tube sampling.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Dynamics residual [default: 1e-6].
    #[arg(long)]
    tol_dynamics: Option<f64>,
    /// Adjoint residual [default: 1e-6].
    #[arg(long)]
    tol_adjoint: Option<f64>,
    /// Scaled maximum-condition gap [default: 1e-8].
    #[arg(long)]
    tol_gap: Option<f64>,
    /// Stationarity of H in u [default: 1e-6].
    #[arg(long)]
    tol_stationarity: Option<f64>,
    /// Tail values for transversality and Michel [default: 1e-6].
    #[arg(long)]
    tol_tail: Option<f64>,
    /// Fundamental-matrix duality ZᵀY = I [default: 1e-8].
    #[arg(long)]
    tol_duality: Option<f64>,
    /// Constraint values and control membership [default: 1e-6].
    #[arg(long)]
    tol_constraint: Option<f64>,
    /// Stray measure mass [default: 1e-8].
    #[arg(long)]
    tol_mass: Option<f64>,
    /// Agreement with reference multipliers [default: 1e-6].
    #[arg(long)]
    tol_reference: Option<f64>,
    /// Integral adjoint equation [default: 1e-5].
    #[arg(long)]
    tol_integral: Option<f64>,
    /// Sufficiency inequalities [default: 1e-8].
    #[arg(long)]
    tol_sufficiency: Option<f64>,
    /// Relative p = p(0) + q + r reconstruction [default: 1e-6].
    #[arg(long)]
    tol_decomposition: Option<f64>,
}

#[derive(Args, Debug)]
struct WeightsArgs {
    /// Weight ν: `exp:<a>` or `power:<a>`.
    #[arg(long)]
    nu: String,
    /// Distribution ω: `exp:<rho>` or `weibull:<k>`.
    #[arg(long)]
    omega: String,
    /// Sobolev exponent; selects the starred properties.
    #[arg(long)]
    p: Option<f64>,
    /// Output directory for weights.json.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct HorizonArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    /// Comma-separated, strictly increasing horizons.
    #[arg(long, default_value = "2,4,8,16,32")]
    horizons: String,
    /// Largest number of switches of the bang-bang search.
    #[arg(long, default_value_t = 2)]
    switches: usize,
    /// Switching-time grid resolution.
    #[arg(long, default_value_t = 96)]
    resolution: usize,
    /// Relative tolerance of the convergence test.
    #[arg(long, default_value_t = 1e-4)]
    tol: f64,
}

/// Configuration failure: reported and mapped to exit status 3.
#[derive(Debug)]
struct ConfigError(String);

impl<E: std::fmt::Display> From<E> for ConfigError {
    fn from(e: E) -> Self {
        ConfigError(e.to_string())
    }
}

type CliResult<T> = std::result::Result<T, ConfigError>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { CONFIG_ERROR } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Verify(a) => run_verify(&a),
        Command::Weights(a) => run_weights(&a),
        Command::Horizon(a) => run_horizon(&a),
        Command::CatalogList => run_list(),
    };
    match result {
        Ok(v) => ExitCode::from(v.exit_code() as u8),
        Err(ConfigError(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(CONFIG_ERROR)
        }
    }
}

fn parse_params(raw: &[String]) -> CliResult<Params> {
    let mut out = Params::new();
    for kv in raw {
        let (k, v) = kv.split_once('=').ok_or_else(|| ConfigError(format!("--param expects name=value, got '{kv}'")))?;
        let v: f64 = v.trim().parse().map_err(|_| ConfigError(format!("parameter '{k}' is not a number: '{v}'")))?;
        out.insert(k.trim().to_string(), v);
    }
    Ok(out)
}

fn horizon_override(flag: Option<f64>) -> CliResult<Option<f64>> {
    let t = match flag {
        Some(t) => Some(t),
        None => match std::env::var(TMAX_ENV) {
            Ok(s) => Some(s.trim().parse::<f64>().map_err(|_| ConfigError(format!("{TMAX_ENV} is not a number: '{s}'")))?),
            Err(_) => None,
        },
    };
    if let Some(t) = t {
        if t <= 0.0 || !t.is_finite() {
            return Err(ConfigError(format!("horizon must be positive and finite, got {t}")));
        }
    }
    Ok(t)
}

fn instance(a: &ProblemArgs) -> CliResult<catalog::Instance> {
    let name = match (&a.positional, &a.problem) {
        (Some(p), None) | (None, Some(p)) => p,
        (Some(_), Some(_)) => return Err(ConfigError("give the problem either positionally or with --problem".into())),
        (None, None) => return Err(ConfigError("no problem given".into())),
    };
    let params = parse_params(&a.params)?;
    let grid = GridRequest { t_max: horizon_override(a.tmax)?, n: a.grid_n };
    Ok(catalog::get_on(name, &params, &grid)?)
}

fn exec(sequential: bool) -> Exec {
    if sequential {
        Exec::Sequential
    } else {
        Exec::default()
    }
}

fn out_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| ConfigError(format!("cannot create {}: {e}", dir.display())))
}

fn write_text(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| ConfigError(format!("cannot write {}: {e}", path.display())))
}

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| ConfigError(format!("cannot write {}: {e}", path.display())))
}

fn read_sampled(path: &Path) -> CliResult<SampledFn> {
    let f = File::open(path).map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
    SampledFn::read_csv(f, DEFAULT_TAIL_TOL).map_err(|e| ConfigError(format!("{}: {e}", path.display())))
}

fn tolerances(a: &VerifyArgs) -> CliResult<Tolerances> {
    let mut t = Tolerances::default();
    let pairs: [(&mut f64, Option<f64>, &str); 12] = [
        (&mut t.dynamics, a.tol_dynamics, "dynamics"),
        (&mut t.adjoint, a.tol_adjoint, "adjoint"),
        (&mut t.gap, a.tol_gap, "gap"),
        (&mut t.stationarity, a.tol_stationarity, "stationarity"),
        (&mut t.tail, a.tol_tail, "tail"),
        (&mut t.duality, a.tol_duality, "duality"),
        (&mut t.constraint, a.tol_constraint, "constraint"),
        (&mut t.mass, a.tol_mass, "mass"),
        (&mut t.reference, a.tol_reference, "reference"),
        (&mut t.integral, a.tol_integral, "integral"),
        (&mut t.sufficiency, a.tol_sufficiency, "sufficiency"),
        (&mut t.decomposition, a.tol_decomposition, "decomposition"),
    ];
    for (slot, v, name) in pairs {
        if let Some(v) = v {
            if v <= 0.0 || !v.is_finite() {
                return Err(ConfigError(format!("--tol-{name} must be positive")));
            }
            *slot = v;
        }
    }
    Ok(t)
}

fn run_verify(a: &VerifyArgs) -> CliResult<Verdict> {
    let inst = instance(&a.problem)?;
    let suites = match &a.suite {
        Some(s) => verify::parse_suites(s)?,
        None => verify::designated_suites(&inst.meta),
    };
    let cfg = VerifyConfig { suites, tol: tolerances(a)?, seed: a.seed, exec: exec(a.problem.sequential) };
    let imported = match (&a.candidate_x, &a.candidate_u) {
        (Some(x), Some(u)) => {
            let (x, u) = (read_sampled(x)?, read_sampled(u)?);
            if x.dim() != inst.problem.n || u.dim() != inst.problem.m {
                return Err(ConfigError(format!(
                    "candidate dimensions ({}, {}) do not match the problem ({}, {})",
                    x.dim(),
                    u.dim(),
                    inst.problem.n,
                    inst.problem.m
                )));
            }
            Some(CandidateProcess::new(x, u)?)
        }
        (None, None) => None,
        _ => return Err(ConfigError("--candidate-x and --candidate-u must be given together".into())),
    };
    let subject = match &imported {
        // Reference multipliers belong to the reference process only.
        Some(c) => Subject { candidate: c, multipliers: None, ..inst.subject().ok_or_else(|| ConfigError("entry has no reference".into()))? },
        None => inst.subject().ok_or_else(|| ConfigError(format!("{} has no reference process; pass a candidate", inst.name)))?,
    };
    let outcome = verify::verify(subject, &cfg);
    let json = to_json(&outcome.report);
    match &a.problem.out {
        Some(dir) => {
            out_dir(dir)?;
            write_text(&dir.join("report.json"), &json)?;
            outcome.series.write_csv(create(&dir.join("series.csv"))?)?;
            println!("{}: {}", outcome.report.problem, outcome.report.summary);
        }
        None => print!("{json}"),
    }
    Ok(outcome.report.summary)
}

fn run_weights(a: &WeightsArgs) -> CliResult<Verdict> {
    let nu: WeightSpec = a.nu.parse()?;
    let omega: DistributionSpec = a.omega.parse()?;
    let quad = QuadratureConfig::default();
    let report = match a.p {
        Some(p) => check_properties_star(&nu, &omega, p, &quad),
        None => check_properties_p2(&nu, &omega, &quad),
    };
    let json = to_json(&report);
    match &a.out {
        Some(dir) => {
            out_dir(dir)?;
            write_text(&dir.join("weights.json"), &json)?;
            for e in &report.entries {
                println!("{:<4} {}", e.id, e.verdict);
            }
        }
        None => print!("{json}"),
    }
    Ok(report.summary())
}

fn run_horizon(a: &HorizonArgs) -> CliResult<Verdict> {
    let inst = instance(&a.problem)?;
    let horizons: Vec<f64> = a
        .horizons
        .split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|_| ConfigError(format!("bad horizon '{s}'"))))
        .collect::<CliResult<_>>()?;
    let opts = SwitchingOptions { switch_count: a.switches, resolution: a.resolution, refine: true };
    let sweep = horizonlab::truncation_sweep(&inst.problem, &horizons, &opts, exec(a.problem.sequential))?;
    let limit = inst.reference.as_ref().ok_or_else(|| ConfigError(format!("{} has no limit candidate", inst.name)))?;
    let hyp = horizonlab::hypothesis_h_check(&inst.problem, &sweep, limit, a.tol);
    let doc = serde_json::json!({ "sweep": sweep, "hypothesis": hyp });
    let json = to_json(&doc);
    match &a.problem.out {
        Some(dir) => {
            out_dir(dir)?;
            write_text(&dir.join("horizon.json"), &json)?;
            sweep.write_csv(create(&dir.join("sweep.csv"))?, Some(hyp.limit_value))?;
            println!("{}: {} (pathology: {})", inst.name, hyp.verdict, hyp.pathology);
        }
        None => print!("{json}"),
    }
    Ok(hyp.verdict)
}

fn run_list() -> CliResult<Verdict> {
    let entries: Vec<serde_json::Value> = catalog::list()
        .iter()
        .map(|e| {
            serde_json::json!({
                "name": format!("catalog:{}", e.name),
                "summary": e.summary,
                "sense": e.sense,
                "params": e.params,
                "constraints": e.predicates.iter().map(|p| p.label).collect::<Vec<_>>(),
                "suites": e.suites,
            })
        })
        .collect();
    print!("{}", to_json(&entries));
    Ok(Verdict::Pass)
}
