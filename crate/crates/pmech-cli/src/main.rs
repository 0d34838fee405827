//! `pmech` — phase-space mechanics from the command line.
//!
//! Subcommands: `bracket`, `quantize`, `evolve`, `limit-scan`, `resonance`.
//! Every command is deterministic: identical inputs produce byte-identical
//! CSV (floats printed with 17 significant digits, `.` separator, `\n`
//! line endings). Exit codes: 0 success, 2 usage/parse, 3 numeric
//! precondition, 4 model-closure failure.

mod config;
mod svg;

use clap::{Args, Parser, Subcommand, ValueEnum};
use config::Config;
use pmech::dynamics::{
    forced_flow, ho_flow, integrate_bracket_ode, resonance_amplitude, ForceProfile,
    HamiltonianModel, Trajectory,
};
use pmech::fock::{make_grid, quantize, vacuum, PhaseGrid};
use pmech::numfmt::fmt_f64;
use pmech::states::{classical_limit_scan, ScanRow};
use pmech::symbol::{hamiltonian_ho, pmechanise, PlanckParameter, Symbol};
use pmech::{parse_symbol, rat_from_f64, Error as PmechError};
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "pmech", version, about = "p-mechanics on the Heisenberg group")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the p-mechanical bracket of two symbols.
    Bracket(BracketArgs),
    /// Weyl-quantise a symbol and dump its action on the vacuum as CSV.
    Quantize(QuantizeArgs),
    /// Evolve an observable under the (forced) oscillator; trajectory CSV.
    Evolve(EvolveArgs),
    /// Scan coherent-state expectations over a list of h values.
    LimitScan(LimitScanArgs),
    /// Envelope of the forced translation vector; CSV and optional SVG.
    Resonance(ResonanceArgs),
}

#[derive(Args)]
struct BracketArgs {
    /// First symbol, e.g. "q^3".
    #[arg(allow_hyphen_values = true)]
    f: String,
    /// Second symbol, e.g. "p^3".
    #[arg(allow_hyphen_values = true)]
    g: String,
    /// Number of degrees of freedom.
    #[arg(long, default_value_t = 1)]
    n: usize,
}

#[derive(Args)]
struct QuantizeArgs {
    /// Symbol to quantise.
    #[arg(allow_hyphen_values = true)]
    symbol: String,
    #[arg(long)]
    h: Option<f64>,
    #[arg(long)]
    m: Option<f64>,
    #[arg(long)]
    omega: Option<f64>,
    /// Grid points per axis (power of two >= 64).
    #[arg(long = "grid-n")]
    grid_n: Option<usize>,
    /// Grid half-width; defaults to the documented sizing rule.
    #[arg(long = "grid-L")]
    grid_l: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum HamiltonianKind {
    Ho,
    Forced,
}

#[derive(Args)]
struct EvolveArgs {
    /// Observable to evolve.
    #[arg(allow_hyphen_values = true)]
    observable: String,
    #[arg(long, value_enum)]
    hamiltonian: Option<HamiltonianKind>,
    #[arg(long)]
    m: Option<f64>,
    #[arg(long)]
    omega: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    t0: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    t1: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    /// Use the closed-form flow instead of RK4.
    #[arg(long = "closed-form", default_value_t = false)]
    closed_form: bool,
    #[arg(long = "degree-cap")]
    degree_cap: Option<usize>,
    /// Force amplitude (forced hamiltonian only).
    #[arg(long = "Z0")]
    z0: Option<f64>,
    /// Driving frequency (forced hamiltonian only).
    #[arg(long = "Omega")]
    drive: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct LimitScanArgs {
    /// Observable (a classical polynomial).
    #[arg(allow_hyphen_values = true)]
    observable: String,
    #[arg(long, allow_negative_numbers = true)]
    q0: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    p0: Option<f64>,
    /// Comma-separated list of h values; 0 is allowed.
    #[arg(long)]
    h: Option<String>,
    #[arg(long)]
    m: Option<f64>,
    #[arg(long)]
    omega: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct ResonanceArgs {
    #[arg(long)]
    omega: Option<f64>,
    #[arg(long = "Omega")]
    drive: Option<f64>,
    #[arg(long = "Z0")]
    z0: Option<f64>,
    #[arg(long = "t-max")]
    t_max: Option<f64>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Optional SVG line plot of the envelope.
    #[arg(long = "plot-out")]
    plot_out: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

const EXIT_USAGE: u8 = 2;
const EXIT_NUMERIC: u8 = 3;
const EXIT_CLOSURE: u8 = 4;

fn exit_code_for(err: &PmechError) -> u8 {
    match err {
        PmechError::Parse { .. }
        | PmechError::DimensionMismatch(_)
        | PmechError::NotSymplectic
        | PmechError::NonPositive { .. }
        | PmechError::GridSize(_)
        | PmechError::HbarDependent
        | PmechError::NoLineage
        | PmechError::EmptyHList
        | PmechError::NotQuadratic
        | PmechError::NotCoherent
        | PmechError::EigenIndex(_) => EXIT_USAGE,
        PmechError::Containment { .. }
        | PmechError::GridMismatch
        | PmechError::Tolerance
        | PmechError::WeylDegree(..) => EXIT_NUMERIC,
        PmechError::DegreeCap { .. } => EXIT_CLOSURE,
        PmechError::Io(_) => 1,
    }
}

struct Failure {
    code: u8,
    message: String,
}

impl From<PmechError> for Failure {
    fn from(err: PmechError) -> Self {
        Failure {
            code: exit_code_for(&err),
            message: err.to_string(),
        }
    }
}

impl From<String> for Failure {
    fn from(message: String) -> Self {
        Failure {
            code: EXIT_USAGE,
            message,
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(err: std::io::Error) -> Self {
        Failure {
            code: 1,
            message: err.to_string(),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Bracket(args) => cmd_bracket(args),
        Command::Quantize(args) => cmd_quantize(args),
        Command::Evolve(args) => cmd_evolve(args),
        Command::LimitScan(args) => cmd_limit_scan(args),
        Command::Resonance(args) => cmd_resonance(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("pmech: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn load_config(path: &Option<PathBuf>) -> Result<Config, Failure> {
    match path {
        Some(p) => Config::load(p).map_err(Failure::from),
        None => Ok(Config::empty()),
    }
}

fn write_output(out: &Option<PathBuf>, bytes: &[u8]) -> Result<(), Failure> {
    match out {
        Some(path) => {
            std::fs::write(path, bytes)?;
            Ok(())
        }
        None => {
            std::io::stdout().write_all(bytes)?;
            Ok(())
        }
    }
}

fn positive(value: f64, name: &'static str) -> Result<f64, Failure> {
    if !value.is_finite() || value <= 0.0 {
        return Err(Failure {
            code: EXIT_USAGE,
            message: format!("parameter {name} must be positive (got {value})"),
        });
    }
    Ok(value)
}

fn cmd_bracket(args: BracketArgs) -> Result<(), Failure> {
    let f = parse_symbol(&args.f, args.n)?;
    let g = parse_symbol(&args.g, args.n)?;
    println!("{}", f.pbracket(&g)?);
    Ok(())
}

fn resolve_grid(
    cfg: &Config,
    grid_n: Option<usize>,
    grid_l: Option<f64>,
    planck: &PlanckParameter,
    m: f64,
    omega: f64,
) -> Result<PhaseGrid, Failure> {
    let n = cfg.resolve(grid_n, "grid-n", 256)?;
    let l = cfg.resolve_opt(grid_l, "grid-L")?;
    match l {
        Some(l) => Ok(make_grid(n, l)?),
        None => {
            let default = PhaseGrid::default_for(planck, m, omega, &[])?;
            Ok(make_grid(n, default.half_width())?)
        }
    }
}

fn cmd_quantize(args: QuantizeArgs) -> Result<(), Failure> {
    let cfg = load_config(&args.config)?;
    let h = cfg.resolve(args.h, "h", 1.0)?;
    let m = positive(cfg.resolve(args.m, "m", 1.0)?, "m")?;
    let omega = positive(cfg.resolve(args.omega, "omega", 1.0)?, "omega")?;
    let h = positive(h, "h")?; // quantisation requires h > 0
    let planck = PlanckParameter::from_h(h)?;
    let symbol = parse_symbol(&args.symbol, 1)?;
    let grid = resolve_grid(&cfg, args.grid_n, args.grid_l, &planck, m, omega)?;
    let f0 = vacuum(grid, planck, m, omega)?;
    let op = quantize(&symbol, &planck)?;
    let image = op.apply(&f0)?;
    let mut bytes = Vec::new();
    image.write_csv(&mut bytes)?;
    write_output(&args.out, &bytes)
}

fn trajectory_csv(traj: &Trajectory) -> Result<Vec<u8>, Failure> {
    // fixed column set: the union of monomials over the whole trajectory,
    // in the canonical display order (degree descending, then exponents)
    let mut keys: Vec<pmech::symbol::MonomialKey> = Vec::new();
    for s in &traj.states {
        for (k, _) in s.terms() {
            if !keys.contains(k) {
                keys.push(k.clone());
            }
        }
    }
    keys.sort_by(|a, b| {
        b.qp_degree()
            .cmp(&a.qp_degree())
            .then_with(|| b.q.cmp(&a.q))
            .then_with(|| b.p.cmp(&a.p))
            .then_with(|| a.hbar.cmp(&b.hbar))
    });
    let complex = traj.states.iter().any(|s| !s.is_real());
    let mut out = Vec::new();
    let mut header = vec!["t".to_string()];
    for k in &keys {
        let label = format!("q^{} p^{} hbar^{}", k.q[0], k.p[0], k.hbar);
        if complex {
            header.push(format!("{label} re"));
            header.push(format!("{label} im"));
        } else {
            header.push(label);
        }
    }
    writeln!(out, "{}", header.join(","))?;
    for (t, state) in traj.times.iter().zip(&traj.states) {
        let values: std::collections::HashMap<_, _> = state.terms_numeric().collect();
        let mut cells = vec![fmt_f64(*t)];
        for k in &keys {
            let c = values.get(k).copied().unwrap_or(pmech::C64::new(0.0, 0.0));
            cells.push(fmt_f64(c.re));
            if complex {
                cells.push(fmt_f64(c.im));
            }
        }
        writeln!(out, "{}", cells.join(","))?;
    }
    Ok(out)
}

fn cmd_evolve(args: EvolveArgs) -> Result<(), Failure> {
    let cfg = load_config(&args.config)?;
    let kind = match args.hamiltonian {
        Some(k) => k,
        None => match cfg.get("hamiltonian") {
            Some("ho") => HamiltonianKind::Ho,
            Some("forced") => HamiltonianKind::Forced,
            Some(other) => return Err(format!("unknown hamiltonian `{other}` in config").into()),
            None => HamiltonianKind::Ho,
        },
    };
    let m = positive(cfg.resolve(args.m, "m", 1.0)?, "m")?;
    let omega = positive(cfg.resolve(args.omega, "omega", 1.0)?, "omega")?;
    let t0 = cfg.resolve(args.t0, "t0", 0.0)?;
    let t1 = cfg.resolve(args.t1, "t1", 2.0 * std::f64::consts::PI)?;
    let dt = positive(cfg.resolve(args.dt, "dt", 1e-3)?, "dt")?;
    let degree_cap = cfg.resolve(args.degree_cap, "degree-cap", 8)?;
    let z0 = cfg.resolve(args.z0, "Z0", 0.0)?;
    let drive = cfg.resolve(args.drive, "Omega", omega)?;
    if t1 < t0 {
        return Err(format!("t1 = {t1} must be at least t0 = {t0}").into());
    }

    let observable = parse_symbol(&args.observable, 1)?;
    let profile = match kind {
        HamiltonianKind::Ho => ForceProfile::Zero,
        HamiltonianKind::Forced => ForceProfile::Periodic { z0, omega: drive },
    };
    let closed_at = |t: f64| -> Result<Symbol, PmechError> {
        match kind {
            HamiltonianKind::Ho => ho_flow(&observable, t - t0, m, omega),
            HamiltonianKind::Forced => forced_flow(&observable, t, m, omega, &profile),
        }
    };
    let closed_form_available = kind == HamiltonianKind::Ho || t0 == 0.0;

    let traj = if args.closed_form {
        if !closed_form_available {
            return Err("closed-form forced evolution starts at t0 = 0"
                .to_string()
                .into());
        }
        let mut times = Vec::new();
        let mut states = Vec::new();
        let mut t = t0;
        let eps = dt * 1e-9;
        loop {
            times.push(t);
            states.push(closed_at(t)?.round_to_f64());
            if t + eps >= t1 {
                break;
            }
            t = (t + dt).min(t1);
        }
        Trajectory { times, states }
    } else {
        let model = match kind {
            HamiltonianKind::Ho => {
                HamiltonianModel::Static(hamiltonian_ho(&rat_from_f64(m), &rat_from_f64(omega))?)
            }
            HamiltonianKind::Forced => HamiltonianModel::Forced {
                m,
                omega,
                profile: profile.clone(),
            },
        };
        integrate_bracket_ode(&observable, &model, t0, t1, dt, degree_cap)?
    };

    // summary line: RK4 against the closed form at the final time
    if !args.closed_form && closed_form_available {
        let reference = closed_at(*traj.times.last().unwrap())?;
        let diff = traj.last_state().sub(&reference)?.max_coeff_abs();
        eprintln!(
            "summary: max coefficient difference rk4 vs closed-form = {}",
            fmt_f64(diff)
        );
    }

    let bytes = trajectory_csv(&traj)?;
    write_output(&args.out, &bytes)
}

fn parse_h_list(text: &str) -> Result<Vec<f64>, Failure> {
    let mut out = Vec::new();
    for part in text.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let v: f64 = part
            .parse()
            .map_err(|_| format!("cannot parse h value `{part}`"))?;
        if v < 0.0 || !v.is_finite() {
            return Err(format!("h values must be >= 0, got {v}").into());
        }
        out.push(v);
    }
    Ok(out)
}

fn cmd_limit_scan(args: LimitScanArgs) -> Result<(), Failure> {
    let cfg = load_config(&args.config)?;
    let q0 = cfg.resolve(args.q0, "q0", 0.0)?;
    let p0 = cfg.resolve(args.p0, "p0", 0.0)?;
    let m = positive(cfg.resolve(args.m, "m", 1.0)?, "m")?;
    let omega = positive(cfg.resolve(args.omega, "omega", 1.0)?, "omega")?;
    let h_text = match args.h.or_else(|| cfg.get("h").map(str::to_string)) {
        Some(t) => t,
        None => return Err(PmechError::EmptyHList.into()),
    };
    let h_list = parse_h_list(&h_text)?;
    if h_list.is_empty() {
        return Err(PmechError::EmptyHList.into());
    }

    let symbol = parse_symbol(&args.observable, 1)?;
    let obs = pmechanise(&symbol)?;

    // entries run concurrently; rows keep the input order
    let rows: Vec<ScanRow> = {
        let obs = &obs;
        let results: Vec<Result<Vec<ScanRow>, PmechError>> = std::thread::scope(|scope| {
            let handles: Vec<_> = h_list
                .iter()
                .map(|&h| scope.spawn(move || classical_limit_scan(obs, q0, p0, m, omega, &[h])))
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("scan thread"))
                .collect()
        });
        let mut rows = Vec::with_capacity(h_list.len());
        for r in results {
            rows.extend(r?);
        }
        rows
    };

    let mut bytes = Vec::new();
    writeln!(bytes, "h,value_re,value_im,classical_value,abs_error")?;
    for r in &rows {
        writeln!(
            bytes,
            "{},{},{},{},{}",
            fmt_f64(r.h),
            fmt_f64(r.value.re),
            fmt_f64(r.value.im),
            fmt_f64(r.classical),
            fmt_f64(r.abs_error)
        )?;
    }
    write_output(&args.out, &bytes)?;

    // fitted error order in h over the positive-h, positive-error rows
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.h > 0.0 && r.abs_error > 0.0)
        .map(|r| (r.h.ln(), r.abs_error.ln()))
        .collect();
    if pts.len() >= 2 {
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        eprintln!("fitted error order in h: {:.4}", sxy / sxx);
    } else {
        eprintln!("fitted error order in h: exact (errors vanish)");
    }
    Ok(())
}

fn cmd_resonance(args: ResonanceArgs) -> Result<(), Failure> {
    let cfg = load_config(&args.config)?;
    let omega = positive(cfg.resolve(args.omega, "omega", 1.0)?, "omega")?;
    let drive = positive(cfg.resolve(args.drive, "Omega", omega)?, "Omega")?;
    let z0 = cfg.resolve(args.z0, "Z0", 0.1)?;
    let t_max = positive(
        cfg.resolve(
            args.t_max,
            "t-max",
            100.0 * 2.0 * std::f64::consts::PI / omega,
        )?,
        "t-max",
    )?;
    let samples = cfg.resolve(args.samples, "samples", 512)?;

    let rows = resonance_amplitude(drive, omega, z0, t_max, samples)?;
    let mut bytes = Vec::new();
    writeln!(bytes, "t,envelope")?;
    for &(t, e) in &rows {
        writeln!(bytes, "{},{}", fmt_f64(t), fmt_f64(e))?;
    }
    write_output(&args.out, &bytes)?;

    if let Some(plot) = &args.plot_out {
        let chart = svg::line_chart(&rows, "t", "envelope");
        std::fs::write(plot, chart)?;
    }
    Ok(())
}
