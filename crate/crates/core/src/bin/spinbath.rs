use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use spinbath::harness::{self, Execution, OutputKind, SweepConfig, SweepVariable};
use spinbath::model::{map_cpb, CpbParams};
use spinbath::optimize::trajectory;
use spinbath::units::{ghz, parse_temperature, to_ghz};
use spinbath::{
    max_purity, resonance_profile, HamiltonianParams, Spin, SpinState, System, Temperature,
};

/// `println!` that reports a closed stdout as an error instead of panicking.
macro_rules! out {
    ($($arg:tt)*) => {
        writeln!(std::io::stdout(), $($arg)*)?
    };
}

#[derive(Parser)]
#[command(
    name = "spinbath",
    version,
    about = "Spin-1/2 decoherence in a thermal oscillator bath"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Eigenvalues of the truncated Hamiltonian.
    Spectrum(PointArgs),
    /// Squared overlaps of one bare state with every eigenstate.
    Resonance {
        #[command(flatten)]
        point: PointArgs,
        #[command(flatten)]
        bare: BareArgs,
    },
    /// Purity of a fixed initial state on a time grid.
    Evolve {
        #[command(flatten)]
        point: PointArgs,
        #[command(flatten)]
        evolve: EvolveArgs,
    },
    /// Maximum purity, optimal state and phase sensitivity at one point.
    Optimize(PointArgs),
    /// Parameter sweep with CSV/JSON/SVG output.
    Sweep(SweepArgs),
    /// Map Cooper-pair-box parameters at the degeneracy point, then run an action.
    Cpb(CpbArgs),
}

#[derive(Args, Clone)]
struct PointArgs {
    /// Oscillator frequency [GHz].
    #[arg(long, default_value_t = 1.0)]
    omega: f64,
    /// Spin splitting [GHz].
    #[arg(long, default_value_t = 0.1)]
    omega0: f64,
    /// Rotating coupling [GHz].
    #[arg(long, default_value_t = 0.4)]
    g_r: f64,
    /// Counter-rotating coupling [GHz].
    #[arg(long, default_value_t = 1.0)]
    g_nr: f64,
    /// Dephasing coupling [GHz].
    #[arg(long, default_value_t = 0.5)]
    g_ph: f64,
    #[command(flatten)]
    bath: BathArgs,
}

#[derive(Args, Clone)]
struct BathArgs {
    /// Oscillator levels kept.
    #[arg(long, default_value_t = 20)]
    n_bath: usize,
    /// Bath temperature, e.g. `25mK` or `0.025K`; `0` for the ground state.
    #[arg(long, default_value = "25mK")]
    temperature: String,
    /// Evaluation time [ns].
    #[arg(long, default_value_t = 0.1)]
    time: f64,
}

#[derive(Args, Clone)]
struct BareArgs {
    /// Spin of the bare state (`+` or `-`).
    #[arg(long, default_value = "+", allow_hyphen_values = true)]
    spin: String,
    /// Oscillator level of the bare state.
    #[arg(long, default_value_t = 0)]
    level: usize,
}

#[derive(Args, Clone)]
struct EvolveArgs {
    /// |c+| of the initial state.
    #[arg(long, default_value_t = 1.0)]
    c_plus_abs: f64,
    /// Relative phase arg(c+) [rad], with c- real and non-negative.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    theta: f64,
    /// Use the optimal state at --time instead of --c-plus-abs/--theta.
    #[arg(long)]
    optimal: bool,
    /// Last time of the grid [ns]; the grid starts at 0.
    #[arg(long, default_value_t = 1.0)]
    t_max: f64,
    /// Grid points.
    #[arg(long, default_value_t = 101)]
    points: usize,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    point: PointArgs,
    /// g_r, g_nr, g_ph or g_locked (g_r = g_nr).
    #[arg(long, default_value = "g_r")]
    variable: String,
    /// Range start [GHz].
    #[arg(long, default_value_t = 0.1)]
    lo: f64,
    /// Range end [GHz].
    #[arg(long, default_value_t = 2.0)]
    hi: f64,
    /// Grid points, endpoints included.
    #[arg(long, default_value_t = 101)]
    steps: usize,
    /// Comma-separated subset of s_max,a_pm,s_diff,argmax_state.
    #[arg(long, default_value = "s_max,a_pm,s_diff,argmax_state")]
    outputs: String,
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    json: Option<PathBuf>,
    #[arg(long)]
    svg: Option<PathBuf>,
    /// JSON file whose keys override the flags.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Evaluate points one after another.
    #[arg(long)]
    serial: bool,
}

#[derive(Args)]
struct CpbArgs {
    /// Charging energy [GHz]; drops out at the degeneracy point.
    #[arg(long, default_value_t = 0.0)]
    e_c: f64,
    /// Josephson energy [GHz].
    #[arg(long, default_value_t = 0.1)]
    e_j: f64,
    /// Resonator frequency [GHz].
    #[arg(long, default_value_t = 1.0)]
    omega: f64,
    /// Coupling [GHz].
    #[arg(long, default_value_t = 0.5)]
    g: f64,
    /// Gate charge offset; only 0 is supported.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    delta_n: f64,
    #[command(flatten)]
    bath: BathArgs,
    #[command(subcommand)]
    action: CpbAction,
}

#[derive(Subcommand)]
enum CpbAction {
    Spectrum,
    Resonance(BareArgs),
    Evolve(EvolveArgs),
    Optimize,
}

type CliResult<T> = Result<T, Box<dyn std::error::Error>>;

fn temperature(s: &str) -> CliResult<Temperature> {
    let t = parse_temperature(s)?;
    Ok(if t == 0.0 {
        Temperature::Zero
    } else {
        Temperature::Kelvin(t)
    })
}

impl PointArgs {
    fn params(&self) -> CliResult<HamiltonianParams> {
        Ok(HamiltonianParams::from_ghz(
            self.omega,
            self.omega0,
            self.g_r,
            self.g_nr,
            self.g_ph,
            self.bath.n_bath,
        )?)
    }
}

fn spectrum(params: HamiltonianParams, bath: &BathArgs) -> CliResult<()> {
    let system = System::new(params, temperature(&bath.temperature)?)?;
    out!("index,energy_rad_per_ns,energy_ghz");
    for (i, e) in system.eigen.energies().iter().enumerate() {
        out!("{i},{e:.16e},{:.16e}", to_ghz(*e));
    }
    Ok(())
}

fn resonance(params: HamiltonianParams, bath: &BathArgs, bare: &BareArgs) -> CliResult<()> {
    let system = System::new(params, temperature(&bath.temperature)?)?;
    let spin: Spin = bare.spin.parse()?;
    let profile = resonance_profile(&system.table, spin, bare.level)?;
    out!("energy_rad_per_ns,energy_ghz,weight");
    for (e, w) in &profile.points {
        out!("{e:.16e},{:.16e},{w:.16e}", to_ghz(*e));
    }
    Ok(())
}

fn evolve(params: HamiltonianParams, bath: &BathArgs, args: &EvolveArgs) -> CliResult<()> {
    let system = System::new(params, temperature(&bath.temperature)?)?;
    let psi = if args.optimal {
        max_purity(&system.channel(bath.time)).state
    } else {
        SpinState::from_polar(args.c_plus_abs, args.theta)?
    };
    if args.points < 2 {
        return Err("--points must be at least 2".into());
    }
    let times: Vec<f64> = (0..args.points)
        .map(|i| args.t_max * i as f64 / (args.points - 1) as f64)
        .collect();
    out!("# c_plus = {}, c_minus = {}", psi.c_plus(), psi.c_minus());
    out!("time_ns,purity");
    for (t, s) in trajectory(&system.propagator, &psi, &times) {
        out!("{t:.16e},{s:.16e}");
    }
    Ok(())
}

fn optimize(params: HamiltonianParams, bath: &BathArgs) -> CliResult<()> {
    let system = System::new(params, temperature(&bath.temperature)?)?;
    let report = max_purity(&system.channel(bath.time));
    let metric = system.overlap_metric();
    let out = serde_json::json!({
        "time_ns": report.time,
        "s_max": report.s_max,
        "c_plus_abs": report.c_plus_abs(),
        "theta_rad": report.theta(),
        "c_plus": [report.state.c_plus().re, report.state.c_plus().im],
        "c_minus": report.state.c_minus().re,
        "s_diff": report.s_diff,
        "a_pm": metric.a_plus_minus,
        "diagnostics": report.diagnostics,
    });
    out!("{}", serde_json::to_string_pretty(&out)?);
    Ok(())
}

fn sweep(args: &SweepArgs) -> CliResult<bool> {
    let p = &args.point;
    let outputs = args
        .outputs
        .split(',')
        .map(|s| s.trim().parse::<OutputKind>())
        .collect::<Result<_, _>>()?;
    let mut config = SweepConfig {
        base: harness::BaseParams {
            omega_ghz: p.omega,
            omega0_ghz: p.omega0,
            g_r_ghz: p.g_r,
            g_nr_ghz: p.g_nr,
            g_ph_ghz: p.g_ph,
        },
        variable: args.variable.parse::<SweepVariable>()?,
        lo_ghz: args.lo,
        hi_ghz: args.hi,
        steps: args.steps,
        temperature: temperature(&p.bath.temperature)?,
        n_bath: p.bath.n_bath,
        time_ns: p.bath.time,
        outputs,
        csv: args.csv.clone(),
        json: args.json.clone(),
        svg: args.svg.clone(),
    };
    if let Some(path) = &args.config {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        let overrides: serde_json::Value = serde_json::from_str(&text)?;
        config = config.merged_with(&overrides)?;
    }

    let started_unix_ms = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis())
        .unwrap_or(0);
    let start = Instant::now();
    let execution = if args.serial {
        Execution::Serial
    } else {
        Execution::Parallel
    };
    let rows = harness::run_sweep_with(&config, execution)?;
    let meta = harness::RunMetadata {
        started_unix_ms,
        total_wall_ms: start.elapsed().as_secs_f64() * 1e3,
        parallel: !args.serial,
        threads: if args.serial {
            1
        } else {
            rayon::current_num_threads()
        },
    };

    match &config.csv {
        Some(path) => harness::write_csv(&rows, path)?,
        None => {
            out!("{}", harness::CSV_HEADER.join(","));
            for r in &rows {
                let f = |v: Option<f64>| v.map(|x| format!("{x:.16e}")).unwrap_or_default();
                out!(
                    "{:.16e},{},{},{},{},{},{:.16e}",
                    r.sweep_value_ghz,
                    f(r.s_max),
                    f(r.c_plus_abs),
                    f(r.theta_rad),
                    f(r.s_diff),
                    f(r.a_pm),
                    r.wall_ms
                );
            }
        }
    }
    if let Some(path) = &config.json {
        harness::write_sidecar(&config, &rows, &meta, path)?;
    }
    if let Some(path) = &config.svg {
        let label = serde_json::to_value(config.variable)?;
        harness::write_svg(&rows, label.as_str().unwrap_or("g"), path)?;
    }

    let failures: Vec<_> = rows.iter().filter_map(|r| r.error.as_deref()).collect();
    for f in &failures {
        eprintln!("failed point: {f}");
    }
    Ok(failures.is_empty())
}

fn cpb(args: &CpbArgs) -> CliResult<()> {
    let cpb = CpbParams {
        e_c: ghz(args.e_c),
        e_j: ghz(args.e_j),
        omega: ghz(args.omega),
        g: ghz(args.g),
        delta_n: args.delta_n,
    };
    let params = map_cpb(&cpb, args.bath.n_bath)?;
    eprintln!(
        "mapped: omega0 = {} GHz, g_r = g_nr = {} GHz, g_ph = 0",
        to_ghz(params.omega0),
        to_ghz(params.g_r)
    );
    match &args.action {
        CpbAction::Spectrum => spectrum(params, &args.bath),
        CpbAction::Resonance(bare) => resonance(params, &args.bath, bare),
        CpbAction::Evolve(e) => evolve(params, &args.bath, e),
        CpbAction::Optimize => optimize(params, &args.bath),
    }
}

fn run(cli: Cli) -> CliResult<bool> {
    match &cli.command {
        Command::Spectrum(p) => spectrum(p.params()?, &p.bath)?,
        Command::Resonance { point, bare } => resonance(point.params()?, &point.bath, bare)?,
        Command::Evolve { point, evolve: e } => evolve(point.params()?, &point.bath, e)?,
        Command::Optimize(p) => optimize(p.params()?, &p.bath)?,
        Command::Sweep(s) => return sweep(s),
        Command::Cpb(c) => cpb(c)?,
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e)
            if e.downcast_ref::<std::io::Error>()
                .is_some_and(|e| e.kind() == std::io::ErrorKind::BrokenPipe) =>
        {
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
