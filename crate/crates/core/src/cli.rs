//! Batch command-line front-end. Every verification is a subcommand with
//! machine-readable JSON/CSV output; SVG plots are write-only artifacts.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 numerical
//! failure (divergence, failed check).

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use num_bigint::BigInt;
use serde::Serialize;

use crate::classify::{
    cal_m, closure_probe, invariant_search, mn_det, pde_residual, EllVariant,
};
use crate::config::RunConfig;
use crate::continuum::{convergence_order, expansion_check};
use crate::dynamics::{trajectory, Trajectory};
use crate::error::Error;
use crate::expr::parse_expr_with_vars;
use crate::invariants::{
    conservation_report, independence_test, involution_test, numerical_rank, InvariantId,
    SetName,
};
use crate::poly::Rat;

const DRIFT_TOLERANCE: f64 = 1e-7;
const BRACKET_TOLERANCE: f64 = 1e-9;

#[derive(Parser)]
#[command(name = "h6map", version, about = "Discrete symplectic maps with a two-photon coalgebra symmetry")]
struct Cli {
    /// Override the seed from the config file
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output path; stdout when omitted
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Iterate the map and emit the trajectory as CSV
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 100)]
        steps: usize,
        /// Comma-separated invariant labels to record (default: all
        /// registered for the family)
        #[arg(long)]
        invariants: Option<String>,
    },
    /// Verify conservation of the registered invariants along an orbit
    Check {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        steps: usize,
    },
    /// Numerical rank of an invariant set's stacked Jacobian
    Rank {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        set: String,
        #[arg(long, default_value_t = 5)]
        samples: usize,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Pairwise brackets of a set's commuting chain
    Involution {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        set: String,
    },
    /// Sampling-based invariant search over the generator ansatz
    Search {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 1)]
        degree: usize,
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Classification machinery checks
    Classify {
        #[command(subcommand)]
        sub: ClassifyCmd,
    },
    /// Continuum-limit harness
    Continuum {
        #[command(subcommand)]
        sub: ContinuumCmd,
    },
}

#[derive(Subcommand)]
enum ClassifyCmd {
    /// Determinant lemma: closed form vs exact elimination
    MnDet {
        #[arg(long)]
        n: usize,
        /// rational, e.g. -3 or 5/7
        #[arg(long, allow_hyphen_values = true)]
        mu: String,
        #[arg(long, allow_hyphen_values = true)]
        nu: String,
    },
    /// Rank bounds of the coefficient matrix at random points
    CalmRank {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// PDE residuals of the configured potential at random points
    PdeCheck {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 20)]
        samples: usize,
    },
    /// Sensitivity of the advanced B+ to the advanced coordinates
    ClosureProbe {
        #[arg(long)]
        config: PathBuf,
        /// identity | quadratic:EPS | linear:C | expression in xi
        #[arg(long, default_value = "identity")]
        ell: String,
    },
}

#[derive(Subcommand)]
enum ContinuumCmd {
    /// Convergence order of the discrete map against the limiting flow
    Order {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        h_list: Vec<f64>,
        #[arg(long, default_value_t = 1.0)]
        t: f64,
    },
    /// Invariant expansion residuals over an h sweep
    Expansion {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        invariant: String,
        #[arg(long, value_delimiter = ',', required = true)]
        h_list: Vec<f64>,
    },
}

#[derive(Serialize)]
struct Tool {
    name: &'static str,
    version: &'static str,
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    tool: Tool,
    #[serde(skip_serializing_if = "Option::is_none")]
    config: Option<&'a RunConfig>,
    result: T,
}

fn envelope<T: Serialize>(config: Option<&RunConfig>, result: T) -> String {
    let env = Envelope {
        tool: Tool {
            name: "h6map",
            version: env!("CARGO_PKG_VERSION"),
        },
        config,
        result,
    };
    let mut text = serde_json::to_string_pretty(&env).expect("serializable report");
    text.push('\n');
    text
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), Error> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

/// Minimal deterministic SVG line plot on log10-log10 axes.
pub fn svg_line_plot(title: &str, xlabel: &str, ylabel: &str, points: &[(f64, f64)]) -> String {
    const W: f64 = 640.0;
    const H: f64 = 480.0;
    const M: f64 = 60.0;
    let logs: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.log10(), y.log10()))
        .collect();
    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" \
         viewBox=\"0 0 {W} {H}\">\n"
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    svg.push_str(&format!(
        "<text x=\"{:.1}\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">{title}</text>\n",
        W / 2.0
    ));
    svg.push_str(&format!(
        "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\" font-size=\"12\">{xlabel} (log10)</text>\n",
        W / 2.0,
        H - 12.0
    ));
    svg.push_str(&format!(
        "<text x=\"16\" y=\"{:.1}\" text-anchor=\"middle\" font-size=\"12\" \
         transform=\"rotate(-90 16 {:.1})\">{ylabel} (log10)</text>\n",
        H / 2.0,
        H / 2.0
    ));
    svg.push_str(&format!(
        "<rect x=\"{M}\" y=\"{M}\" width=\"{:.1}\" height=\"{:.1}\" fill=\"none\" stroke=\"black\"/>\n",
        W - 2.0 * M,
        H - 2.0 * M
    ));
    if logs.len() >= 2 {
        let (x0, x1) = logs
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), (x, _)| {
                (a.min(*x), b.max(*x))
            });
        let (y0, y1) = logs
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), (_, y)| {
                (a.min(*y), b.max(*y))
            });
        let sx = |x: f64| M + (x - x0) / (x1 - x0).max(1e-300) * (W - 2.0 * M);
        let sy = |y: f64| H - M - (y - y0) / (y1 - y0).max(1e-300) * (H - 2.0 * M);
        let path: Vec<String> = logs
            .iter()
            .map(|(x, y)| format!("{:.2},{:.2}", sx(*x), sy(*y)))
            .collect();
        svg.push_str(&format!(
            "<polyline points=\"{}\" fill=\"none\" stroke=\"steelblue\" stroke-width=\"2\"/>\n",
            path.join(" ")
        ));
        for (x, y) in &logs {
            svg.push_str(&format!(
                "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3\" fill=\"steelblue\"/>\n",
                sx(*x),
                sy(*y)
            ));
        }
        svg.push_str(&format!(
            "<text x=\"{M}\" y=\"{:.1}\" font-size=\"10\">[{x0:.3}, {x1:.3}] x [{y0:.3}, {y1:.3}]</text>\n",
            H - M + 16.0
        ));
    }
    svg.push_str("</svg>\n");
    svg
}

fn load(path: &Path, seed: Option<u64>) -> Result<RunConfig, Error> {
    let mut cfg = RunConfig::load(path)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn parse_invariants(text: &str) -> Result<Vec<InvariantId>, Error> {
    text.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| InvariantId::from_label(s.trim()))
        .collect()
}

fn parse_rat(text: &str) -> Result<Rat, Error> {
    let parse_int = |s: &str| -> Result<BigInt, Error> {
        s.trim()
            .parse::<BigInt>()
            .map_err(|_| Error::Config(format!("bad rational `{text}`")))
    };
    match text.split_once('/') {
        Some((num, den)) => {
            let d = parse_int(den)?;
            if d == BigInt::from(0) {
                return Err(Error::Config(format!("zero denominator in `{text}`")));
            }
            Ok(Rat::new(parse_int(num)?, d))
        }
        None => Ok(Rat::from_integer(parse_int(text)?)),
    }
}

fn parse_ell(text: &str) -> Result<EllVariant, Error> {
    if text == "identity" {
        return Ok(EllVariant::Identity);
    }
    if let Some(eps) = text.strip_prefix("quadratic:") {
        let eps: f64 = eps
            .parse()
            .map_err(|_| Error::Config(format!("bad quadratic coefficient in `{text}`")))?;
        return Ok(EllVariant::Quadratic { eps });
    }
    if let Some(c) = text.strip_prefix("linear:") {
        let c: f64 = c
            .parse()
            .map_err(|_| Error::Config(format!("bad linear coefficient in `{text}`")))?;
        return Ok(EllVariant::Linear { c });
    }
    Ok(EllVariant::User(parse_expr_with_vars(text, &["xi"])?))
}

fn run_trajectory(cfg: &RunConfig, steps: usize, ids: &[InvariantId]) -> Result<Trajectory, Error> {
    trajectory(
        &cfg.initial_point()?,
        &cfg.spec()?,
        &cfg.context()?,
        steps,
        ids,
        &cfg.invariant_params(),
    )
}

fn cmd_simulate(
    cfg: &RunConfig,
    steps: usize,
    invariants: Option<&str>,
    out: &Option<PathBuf>,
) -> Result<i32, Error> {
    let ids = match invariants {
        Some(text) => parse_invariants(text)?,
        None => cfg.registered_invariants(),
    };
    let traj = run_trajectory(cfg, steps, &ids)?;
    emit(out, &traj.to_csv())?;
    Ok(0)
}

#[derive(Serialize)]
struct DriftReport {
    steps: usize,
    drifts: BTreeMap<String, f64>,
    tolerance: f64,
    pass: bool,
}

fn cmd_check(cfg: &RunConfig, steps: usize, out: &Option<PathBuf>) -> Result<i32, Error> {
    let ids = cfg.registered_invariants();
    let traj = run_trajectory(cfg, steps, &ids)?;
    let drifts: BTreeMap<String, f64> = conservation_report(&traj)
        .into_iter()
        .map(|(id, d)| (id.label(), d))
        .collect();
    let pass = drifts.values().all(|d| *d < DRIFT_TOLERANCE);
    let report = DriftReport {
        steps,
        drifts,
        tolerance: DRIFT_TOLERANCE,
        pass,
    };
    emit(out, &envelope(Some(cfg), &report))?;
    Ok(if pass { 0 } else { 2 })
}

fn cmd_rank(
    cfg: &RunConfig,
    set: &str,
    samples: usize,
    tol: f64,
    out: &Option<PathBuf>,
) -> Result<i32, Error> {
    let set = SetName::parse(set)?;
    let report = independence_test(set, &cfg.context()?, &cfg.invariant_params(), samples, cfg.seed, tol)?;
    let pass = report.pass;
    emit(out, &envelope(Some(cfg), &report))?;
    Ok(if pass { 0 } else { 2 })
}

#[derive(Serialize)]
struct InvolutionReport {
    set: String,
    members: Vec<String>,
    brackets: Vec<crate::invariants::BracketEntry>,
    tolerance: f64,
    pass: bool,
}

fn cmd_involution(cfg: &RunConfig, set: &str, out: &Option<PathBuf>) -> Result<i32, Error> {
    let set = SetName::parse(set)?;
    let ctx = cfg.context()?;
    let entries = involution_test(set, &ctx, &cfg.invariant_params())?;
    let pass = entries.iter().all(|e| e.magnitude < BRACKET_TOLERANCE);
    let report = InvolutionReport {
        set: set.label().into(),
        members: set
            .commuting_members(cfg.n)
            .iter()
            .map(|id| id.label())
            .collect(),
        brackets: entries,
        tolerance: BRACKET_TOLERANCE,
        pass,
    };
    emit(out, &envelope(Some(cfg), &report))?;
    Ok(if pass { 0 } else { 2 })
}

fn cmd_search(
    cfg: &RunConfig,
    degree: usize,
    samples: Option<usize>,
    out: &Option<PathBuf>,
) -> Result<i32, Error> {
    let basis = crate::classify::ansatz_basis(degree)?;
    let samples = samples.unwrap_or(5 * basis.len());
    let result = invariant_search(&cfg.spec()?, degree, &cfg.context()?, samples, cfg.seed)?;
    emit(out, &envelope(Some(cfg), &result))?;
    Ok(0)
}

#[derive(Serialize)]
struct MnDetReport {
    n: usize,
    mu: String,
    nu: String,
    closed_form: String,
    cofactor: String,
    equal: bool,
}

fn cmd_mn_det(n: usize, mu: &str, nu: &str, out: &Option<PathBuf>) -> Result<i32, Error> {
    let mu = parse_rat(mu)?;
    let nu = parse_rat(nu)?;
    let (closed, cofactor) = mn_det(n, &mu, &nu);
    let equal = closed == cofactor;
    let report = MnDetReport {
        n,
        mu: mu.to_string(),
        nu: nu.to_string(),
        closed_form: closed.to_string(),
        cofactor: cofactor.to_string(),
        equal,
    };
    emit(out, &envelope(None, &report))?;
    Ok(if equal { 0 } else { 2 })
}

#[derive(Serialize)]
struct CalmRankReport {
    n: usize,
    samples: usize,
    tol: f64,
    min_rank: usize,
    max_rank: usize,
    bounds_hold: bool,
}

fn cmd_calm_rank(
    cfg: &RunConfig,
    samples: usize,
    tol: f64,
    out: &Option<PathBuf>,
) -> Result<i32, Error> {
    use rand::Rng;
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(cfg.seed);
    let lam = cfg.lambda_vec();
    let n = cfg.n;
    let mut min_rank = usize::MAX;
    let mut max_rank = 0;
    for _ in 0..samples {
        let q: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let m = cal_m(&q, &lam)?;
        let r = numerical_rank(&m, tol)?;
        min_rank = min_rank.min(r);
        max_rank = max_rank.max(r);
    }
    let bounds_hold = n >= 2 && min_rank + 2 >= n && max_rank <= n;
    let report = CalmRankReport {
        n,
        samples,
        tol,
        min_rank,
        max_rank,
        bounds_hold,
    };
    emit(out, &envelope(Some(cfg), &report))?;
    Ok(if bounds_hold { 0 } else { 2 })
}

#[derive(Serialize)]
struct PdeReport {
    samples: usize,
    max_relative_residual: f64,
    pass: bool,
}

fn cmd_pde_check(cfg: &RunConfig, samples: usize, out: &Option<PathBuf>) -> Result<i32, Error> {
    use rand::Rng;
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(cfg.seed);
    let spec = cfg.spec()?;
    let ctx = cfg.context()?;
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let q: Vec<f64> = (0..cfg.n).map(|_| rng.gen_range(0.2..1.0)).collect();
        let p: Vec<f64> = (0..cfg.n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let point = crate::algebra::PhasePoint::new(q, p)?;
        worst = worst.max(pde_residual(&spec, &point, &ctx)?.max_relative());
    }
    let pass = worst < 1e-10;
    let report = PdeReport {
        samples,
        max_relative_residual: worst,
        pass,
    };
    emit(out, &envelope(Some(cfg), &report))?;
    Ok(if pass { 0 } else { 2 })
}

#[derive(Serialize)]
struct ClosureReport {
    ell: String,
    sensitivity: f64,
}

fn cmd_closure_probe(cfg: &RunConfig, ell: &str, out: &Option<PathBuf>) -> Result<i32, Error> {
    let variant = parse_ell(ell)?;
    let sensitivity = closure_probe(&variant, &cfg.initial_point()?, &cfg.context()?)?;
    let report = ClosureReport {
        ell: ell.into(),
        sensitivity,
    };
    emit(out, &envelope(Some(cfg), &report))?;
    Ok(0)
}

fn svg_path_for(out: &Path) -> PathBuf {
    out.with_extension("svg")
}

fn cmd_continuum_order(
    cfg: &RunConfig,
    h_list: &[f64],
    t: f64,
    out: &Option<PathBuf>,
) -> Result<i32, Error> {
    let rule = cfg.scaling_rule()?;
    let lam = cfg.lambda_vec();
    let point = cfg.initial_point()?;
    let report = convergence_order(&rule, &lam, &point.q, &point.p, t, h_list)?;
    emit(out, &report.to_csv())?;
    if let Some(path) = out {
        let pts: Vec<(f64, f64)> = report.hs.iter().copied().zip(report.errors.iter().copied()).collect();
        std::fs::write(
            svg_path_for(path),
            svg_line_plot(
                &format!("{} convergence (slope {:.3})", report.family, report.slope),
                "h",
                "max_err",
                &pts,
            ),
        )?;
    }
    Ok(0)
}

fn cmd_continuum_expansion(
    cfg: &RunConfig,
    invariant: &str,
    h_list: &[f64],
    out: &Option<PathBuf>,
) -> Result<i32, Error> {
    let id = InvariantId::from_label(invariant)?;
    let rule = cfg.scaling_rule()?;
    let lam = cfg.lambda_vec();
    let point = cfg.initial_point()?;
    let report = expansion_check(id, &rule, &lam, &point.q, &point.p, h_list)?;
    emit(out, &report.to_csv())?;
    if let Some(path) = out {
        let pts: Vec<(f64, f64)> = report
            .hs
            .iter()
            .copied()
            .zip(report.residuals.iter().copied())
            .collect();
        std::fs::write(
            svg_path_for(path),
            svg_line_plot(
                &format!("{} expansion residual (order {:.3})", report.invariant, report.order),
                "h",
                "residual",
                &pts,
            ),
        )?;
    }
    Ok(0)
}

fn dispatch(cli: Cli) -> Result<i32, Error> {
    match &cli.cmd {
        Cmd::Simulate {
            config,
            steps,
            invariants,
        } => {
            let cfg = load(config, cli.seed)?;
            cmd_simulate(&cfg, *steps, invariants.as_deref(), &cli.out)
        }
        Cmd::Check { config, steps } => {
            let cfg = load(config, cli.seed)?;
            cmd_check(&cfg, *steps, &cli.out)
        }
        Cmd::Rank {
            config,
            set,
            samples,
            tol,
        } => {
            let cfg = load(config, cli.seed)?;
            cmd_rank(&cfg, set, *samples, *tol, &cli.out)
        }
        Cmd::Involution { config, set } => {
            let cfg = load(config, cli.seed)?;
            cmd_involution(&cfg, set, &cli.out)
        }
        Cmd::Search {
            config,
            degree,
            samples,
        } => {
            let cfg = load(config, cli.seed)?;
            cmd_search(&cfg, *degree, *samples, &cli.out)
        }
        Cmd::Classify { sub } => match sub {
            ClassifyCmd::MnDet { n, mu, nu } => cmd_mn_det(*n, mu, nu, &cli.out),
            ClassifyCmd::CalmRank {
                config,
                samples,
                tol,
            } => {
                let cfg = load(config, cli.seed)?;
                cmd_calm_rank(&cfg, *samples, *tol, &cli.out)
            }
            ClassifyCmd::PdeCheck { config, samples } => {
                let cfg = load(config, cli.seed)?;
                cmd_pde_check(&cfg, *samples, &cli.out)
            }
            ClassifyCmd::ClosureProbe { config, ell } => {
                let cfg = load(config, cli.seed)?;
                cmd_closure_probe(&cfg, ell, &cli.out)
            }
        },
        Cmd::Continuum { sub } => match sub {
            ContinuumCmd::Order { config, h_list, t } => {
                let cfg = load(config, cli.seed)?;
                cmd_continuum_order(&cfg, h_list, *t, &cli.out)
            }
            ContinuumCmd::Expansion {
                config,
                invariant,
                h_list,
            } => {
                let cfg = load(config, cli.seed)?;
                cmd_continuum_expansion(&cfg, invariant, h_list, &cli.out)
            }
        },
    }
}

fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::Diverged { .. } | Error::NonFinite(_) | Error::Domain { .. } | Error::EmptyMatrix => 2,
        _ => 1,
    }
}

/// Entry point for the binary; returns the process exit code.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}
