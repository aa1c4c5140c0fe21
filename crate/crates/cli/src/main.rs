//! `ris-sim`: seeded Monte-Carlo runs of the BMM solvers.

use clap::{Args, Parser, Subcommand, ValueEnum};
use ris_bmm::channel::{ReflectionTopology, SystemConfig};
use ris_bmm::harness::{emit_results, load_config, monte_carlo_scheme, MonteCarloReport, Scheme, SolverKind};
use ris_bmm::options::{Acceleration, ObjectiveKind, PowerMode, SolverOptions, ThetaUpdate, WUpdate};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "ris-sim", version, about = "Joint beamforming and RIS phase design by block MM")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a batch of independent channel realisations.
    Run(RunArgs),
}

#[derive(Args, Debug)]
struct RunArgs {
    /// JSON system description; omitted fields take the default profile.
    #[arg(long)]
    config: PathBuf,
    #[arg(long, value_enum)]
    solver: SolverArg,
    #[arg(long, default_value_t = 20)]
    trials: usize,
    /// Trial i uses seed + i.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = ThetaArg::Parallel)]
    theta_update: ThetaArg,
    #[arg(long, value_enum, default_value_t = WArg::Linesearch)]
    w_update: WArg,
    #[arg(long, value_enum, default_value_t = PowerArg::Total)]
    power: PowerArg,
    /// Restrict phases to a uniform 2^b-point alphabet.
    #[arg(long)]
    phase_bits: Option<u32>,
    #[arg(long, value_enum)]
    accel: Option<AccelArg>,
    /// `cascade` replaces the file's reflection paths by the full cascade.
    #[arg(long, value_enum, default_value_t = TopologyArg::Paths)]
    topology: TopologyArg,
    #[arg(long, value_enum, default_value_t = SchemeArg::Joint)]
    scheme: SchemeArg,
    /// Sum-SINR instead of sum-rate (wsr only).
    #[arg(long, value_enum, default_value_t = ObjectiveArg::Rate)]
    objective: ObjectiveArg,
    #[arg(long, default_value_t = 1000)]
    max_iters: usize,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long, default_value = "results.csv")]
    out: PathBuf,
    #[arg(long)]
    svg: Option<PathBuf>,
    /// Write 0 in the time column so output bytes depend only on the inputs.
    #[arg(long)]
    no_timing: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SolverArg {
    Wsr,
    Mr,
    Sr,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ThetaArg {
    Parallel,
    Serial,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum WArg {
    Linesearch,
    ClosedForm,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum PowerArg {
    Total,
    PerAntenna,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum AccelArg {
    Squarem,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum TopologyArg {
    Cascade,
    Paths,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SchemeArg {
    Joint,
    RandomPhase,
    NoRis,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ObjectiveArg {
    Rate,
    Sinr,
}

impl RunArgs {
    fn solver(&self) -> SolverKind {
        match self.solver {
            SolverArg::Wsr => SolverKind::Wsr,
            SolverArg::Mr => SolverKind::Mr,
            SolverArg::Sr => SolverKind::Sr,
        }
    }

    fn scheme(&self) -> Scheme {
        match self.scheme {
            SchemeArg::Joint => Scheme::Joint,
            SchemeArg::RandomPhase => Scheme::RandomPhase,
            SchemeArg::NoRis => Scheme::NoRis,
        }
    }

    fn options(&self) -> SolverOptions {
        SolverOptions {
            max_outer_iters: self.max_iters,
            rel_tol: self.tol,
            theta_update: match self.theta_update {
                ThetaArg::Parallel => ThetaUpdate::Parallel,
                ThetaArg::Serial => ThetaUpdate::Serial,
            },
            w_update: match self.w_update {
                WArg::Linesearch => WUpdate::LineSearch,
                WArg::ClosedForm => WUpdate::ClosedForm,
            },
            power_model: match self.power {
                PowerArg::Total => PowerMode::Total,
                PowerArg::PerAntenna => PowerMode::General,
            },
            objective_kind: match self.objective {
                ObjectiveArg::Rate => ObjectiveKind::Rate,
                ObjectiveArg::Sinr => ObjectiveKind::Sinr,
            },
            acceleration: match self.accel {
                Some(AccelArg::Squarem) => Acceleration::Squarem,
                None => Acceleration::Off,
            },
            ..SolverOptions::default()
        }
    }

    fn system(&self) -> Result<SystemConfig, String> {
        let mut cfg = load_config(&self.config).map_err(|e| e.to_string())?;
        if let Some(b) = self.phase_bits {
            cfg.phase_bits = Some(b);
        }
        if let TopologyArg::Cascade = self.topology {
            cfg.topology = ReflectionTopology::cascade(cfg.users, cfg.ris_elements.len());
        }
        cfg.validate().map_err(|e| e.to_string())?;
        let needs_mimo = matches!(self.solver, SolverArg::Sr);
        if needs_mimo != cfg.is_mimo() {
            let want = if needs_mimo { "mimo" } else { "miso" };
            return Err(format!("solver {} needs a {want} scenario", self.solver()));
        }
        Ok(cfg)
    }
}

fn report(report: &MonteCarloReport, solver: SolverKind) {
    let a = &report.aggregate;
    println!(
        "solver={solver} trials={} failed={} mean={:.6} std={:.6} stderr={:.6} mean_time_ms={:.3}",
        a.count,
        report.failures.len(),
        a.mean,
        a.stddev,
        a.stderr,
        a.mean_time_ms
    );
    for f in &report.failures {
        eprintln!("trial {} (seed {}) failed: {}", f.trial, f.seed, f.message);
    }
}

fn run(args: RunArgs) -> ExitCode {
    let cfg = match args.system() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let solver = args.solver();
    let mut result = match monte_carlo_scheme(&cfg, solver, args.scheme(), args.trials, args.seed, &args.options()) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    if args.no_timing {
        for s in &mut result.summaries {
            s.time_ms = 0.0;
        }
        for r in result.logs.iter_mut().flat_map(|l| l.records.iter_mut()) {
            r.time_ms = 0.0;
        }
    }
    if let Err(e) = emit_results(&result.summaries, &result.logs, &args.out, args.svg.as_deref()) {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    report(&result, solver);
    if result.failures.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match cli.command {
        Command::Run(args) => run(args),
    }
}
