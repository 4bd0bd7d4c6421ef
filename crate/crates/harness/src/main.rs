use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use poincare_vi_harness::convergence::convergence;
use poincare_vi_harness::symplecticity::{symplecticity, DEFAULT_SEED};
use poincare_vi_harness::table::{render, run_table, Preset};
use poincare_vi_harness::{run, HarnessError, Result, RunConfig, RunSummary};

#[derive(Parser)]
#[command(name = "poincare-vi", version, about = "Adaptive symplectic integrators via the Poincaré transformation")]
struct Cli {
    /// Log solver diagnostics and degeneracy warnings to standard error.
    #[arg(short, long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one configuration and print its summary.
    Run(RunArgs),
    /// Global error against step size with a fitted order.
    Convergence {
        #[command(flatten)]
        run: RunArgs,
        /// Comma-separated step sizes, each half the previous.
        #[arg(long, value_delimiter = ',', default_value = "0.2,0.1,0.05,0.025")]
        hs: Vec<f64>,
    },
    /// Reproduce a table preset.
    Table {
        /// `e09` or `e099`.
        preset: String,
    },
    /// Finite-difference symplecticity defects at sampled orbit states.
    Symplecticity {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, default_value_t = 20)]
        samples: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
}

#[derive(Args, Clone)]
struct RunArgs {
    /// `key = value` file; flags given here take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// kepler or harmonic.
    #[arg(long)]
    problem: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    ecc: Option<f64>,
    /// Degrees of freedom of the harmonic oscillator.
    #[arg(long)]
    dim: Option<usize>,
    /// euler-b, htvi4, euler-b-fixed or stormer-verlet.
    #[arg(long)]
    integrator: Option<String>,
    /// none, trunc, arclength, power or energy.
    #[arg(long)]
    monitor: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    tol: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    gamma: Option<f64>,
    /// Fictive step.
    #[arg(long, allow_negative_numbers = true)]
    h: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    t_end: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    g_min: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    g_max: Option<f64>,
    /// Drop the default monitor bounds.
    #[arg(long)]
    unbounded: bool,
    /// Fourth-root form of the truncation error monitor.
    #[arg(long)]
    fourth_root: bool,
    /// Trajectory output path.
    #[arg(long)]
    csv: Option<PathBuf>,
}

impl RunArgs {
    fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = RunConfig::default();
        if let Some(path) = &self.config {
            cfg.apply_file(path)?;
        }
        let text = |v: &Option<String>| v.clone();
        let num = |v: Option<f64>| v.map(|x| x.to_string());
        let pairs = [
            ("problem", text(&self.problem)),
            ("ecc", num(self.ecc)),
            ("dim", self.dim.map(|d| d.to_string())),
            ("integrator", text(&self.integrator)),
            ("monitor", text(&self.monitor)),
            ("tol", num(self.tol)),
            ("gamma", num(self.gamma)),
            ("h", num(self.h)),
            ("t_end", num(self.t_end)),
            ("g_min", num(self.g_min)),
            ("g_max", num(self.g_max)),
            ("unbounded", self.unbounded.then(|| "true".to_string())),
            ("fourth_root", self.fourth_root.then(|| "true".to_string())),
        ];
        for (key, value) in pairs {
            if let Some(v) = value {
                cfg.set(key, &v)?;
            }
        }
        if let Some(path) = &self.csv {
            cfg.csv = Some(path.clone());
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run(args) => {
            let cfg = args.resolve()?;
            let summary = run(&cfg)?;
            println!("{}\n{}", RunSummary::header(), summary.row());
        }
        Command::Convergence { run, hs } => {
            let cfg = run.resolve()?;
            print!("{}", convergence(&cfg, &hs)?.render());
        }
        Command::Table { preset } => {
            let preset: Preset = preset.parse()?;
            let outcomes = run_table(preset);
            print!("{}", render(preset.title(), &outcomes));
            if let Some(e) = outcomes.into_iter().find_map(|o| o.result.err()) {
                return Err(e);
            }
        }
        Command::Symplecticity { run, samples, seed } => {
            let mut args = run;
            let h = args.h.take();
            let mut cfg = args.resolve()?;
            if let Some(h) = h {
                cfg.h = h;
            }
            print!("{}", symplecticity(&cfg, samples, seed)?.render());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.verbose { "info" } else { "error" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if let HarnessError::Solver(inner) = &e {
                let root = inner.root_cause();
                if !std::ptr::eq(root, inner) {
                    eprintln!("cause: {root}");
                }
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
