use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};

use thermophase::convergence::{self, Case};
use thermophase::io::{self, RunConfig};
use thermophase::monitors::{check_trajectory, CheckLine, Windows};
use thermophase::stepper::{run_with, StepOptions};
use thermophase::Error;

#[derive(Parser)]
#[command(name = "thermophase", version, about = "Coupled phase separation, damage, heat and elasticity solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a configuration and write the trajectory archive.
    Simulate(SimulateArgs),
    /// Re-evaluate every monitor on a stored trajectory; exits 0 iff all pass.
    Check {
        #[arg(long)]
        traj: PathBuf,
        #[arg(long, value_enum, default_value_t = WindowArg::Steps)]
        window: WindowArg,
    },
    /// Manufactured-solution convergence study.
    Convergence {
        #[arg(long, value_parser = parse_case)]
        case: Case,
        #[arg(long, default_value_t = 3)]
        levels: usize,
    },
    /// List the built-in scenarios.
    Presets,
}

#[derive(Args)]
#[command(group = ArgGroup::new("source").required(true).args(["config", "preset"]))]
struct SimulateArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    preset: Option<String>,
    /// Output directory (default: the configured one, or $THERMOPHASE_OUT).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum WindowArg {
    /// Single steps and the whole run.
    Steps,
    /// Every pair of stored levels.
    All,
}

fn parse_case(s: &str) -> Result<Case, String> {
    s.parse()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(args) => simulate(args),
        Command::Check { traj, window } => check(&traj, window),
        Command::Convergence { case, levels } => convergence_study(case, levels),
        Command::Presets => {
            for (name, description) in io::PRESETS {
                println!("{name:<24} {description}");
            }
            Ok(true)
        }
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            // one line per error, so callers can grep for it
            let msg = e.to_string().replace(":\n  ", ": ").replace("\n  ", "; ");
            eprintln!("error: kind={} {msg}", e.kind());
            ExitCode::FAILURE
        }
    }
}

fn load_config(args: &SimulateArgs) -> Result<RunConfig, Error> {
    match (&args.config, &args.preset) {
        (Some(path), _) => RunConfig::parse(&std::fs::read_to_string(path)?),
        (None, Some(name)) => io::preset(name).ok_or_else(|| {
            let known: Vec<&str> = io::PRESETS.iter().map(|p| p.0).collect();
            Error::ConfigInvalid(vec![format!("unknown preset `{name}` (known: {})", known.join(", "))])
        }),
        (None, None) => unreachable!("clap enforces one source"),
    }
}

fn simulate(args: SimulateArgs) -> Result<bool, Error> {
    let cfg = load_config(&args)?;
    let setup = cfg.setup()?;
    let out = args.out.clone().unwrap_or_else(|| io::output_dir(&cfg.output.directory));
    let steps = thermophase::stepper::step_count(setup.horizon, setup.problem.params.tau);
    let cadence = cfg.output.cadence.max(1);
    let traj = run_with(&setup.problem, &setup.initial, setup.horizon, StepOptions::from_problem(&setup.problem), |s, r| {
        if s.k % cadence == 0 || s.k == steps {
            println!(
                "step {:>5}/{steps}  t={:.4}  sweeps={}  theta=[{:.4e}, {:.4e}]  energy_residual={:.3e}",
                s.k, s.t, r.sweeps, r.theta_min, r.theta_max, r.energy_residual
            );
        }
    })?;
    let manifest = io::write_archive(&out, &cfg, &setup.problem.mesh, &traj)?;
    println!("wrote {} levels to {} (config {})", manifest.steps + 1, out.display(), &manifest.config_hash[..12]);
    if !cfg.output.monitors {
        return Ok(true);
    }
    let lines = check_trajectory(&setup.problem, &traj, Windows::Steps)?;
    Ok(print_lines(&lines))
}

fn check(dir: &Path, window: WindowArg) -> Result<bool, Error> {
    let archive = io::read_archive(dir)?;
    let setup = archive.config.setup()?;
    let windows = match window {
        WindowArg::Steps => Windows::Steps,
        WindowArg::All => Windows::All,
    };
    let lines = check_trajectory(&setup.problem, &archive.trajectory, windows)?;
    Ok(print_lines(&lines))
}

fn print_lines(lines: &[CheckLine]) -> bool {
    for l in lines {
        let worst = l.worst.map(|w| format!("  worst={w:.3e}")).unwrap_or_default();
        println!("{:<4} {:<22} n={}{worst}", if l.pass { "ok" } else { "FAIL" }, l.name, l.count);
    }
    lines.iter().all(|l| l.pass)
}

fn convergence_study(case: Case, levels: usize) -> Result<bool, Error> {
    let study = convergence::study(case, levels)?;
    println!("{case}: spatial (tau ~ h^2)");
    for (j, s) in study.spatial.iter().enumerate() {
        let order = if j == 0 { String::new() } else { format!("  order={:.3}", study.spatial_orders[j - 1]) };
        println!("  cells={:<4} tau={:.3e}  error={:.4e}{order}", s.cells, s.tau, s.error);
    }
    println!("{case}: temporal (Richardson differences)");
    for (j, s) in study.temporal.iter().enumerate() {
        let order = if j == 0 { String::new() } else { format!("  order={:.3}", study.temporal_orders[j - 1]) };
        println!("  cells={:<4} tau={:.3e}  diff={:.4e}{order}", s.cells, s.tau, s.error);
    }
    Ok(true)
}
