use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use codid::commands::{BootstrapSettings, SolverSettings};
use codid::{CliError, Command, Format, RunConfig};

/// Compositional difference-in-differences for categorical outcomes.
#[derive(Parser)]
#[command(name = "codid", version)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args, Clone)]
struct Common {
    /// Write the result here instead of stdout.
    #[arg(short, long, global = true)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    format: Format,
}

#[derive(Args, Clone)]
struct PanelArgs {
    /// Panel CSV: group,time,category,count[,stratum,stratum_weight].
    panel: PathBuf,
    /// Add this pseudo-count to every category of a cell holding a zero.
    #[arg(long = "smooth")]
    smoothing: Option<f64>,
}

#[derive(Args, Clone)]
struct BootArgs {
    /// Number of bootstrap replicates; omit to skip the bootstrap.
    #[arg(long)]
    bootstrap: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.95)]
    ci_level: f64,
    /// `redraw`, `redraw:N` or `smooth:X`.
    #[arg(long, default_value = "redraw:100")]
    zero_policy: String,
}

impl BootArgs {
    fn settings(&self) -> Option<BootstrapSettings> {
        self.bootstrap.map(|replicates| BootstrapSettings {
            replicates,
            seed: self.seed,
            ci_level: self.ci_level,
            zero_policy: self.zero_policy.clone(),
        })
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Check a panel (and optional cohort sidecar) and report problems.
    Validate {
        #[command(flatten)]
        panel: PanelArgs,
        /// Sidecar `group,first_treated` (`inf` = never treated).
        cohorts: Option<PathBuf>,
    },
    /// 2×2 estimate, stratified when the panel has strata, optionally bootstrapped.
    Estimate {
        #[command(flatten)]
        panel: PanelArgs,
        /// Treated group (default: `treated`).
        #[arg(long)]
        treated: Option<String>,
        /// Baseline category for log-odds output (default: last).
        #[arg(long)]
        baseline: Option<String>,
        /// `explicit` or `treated-totals`.
        #[arg(long)]
        strata_weights: Option<String>,
        #[command(flatten)]
        boot: BootArgs,
    },
    /// Bounds under relaxed parallel growths.
    Bounds {
        #[command(flatten)]
        panel: PanelArgs,
        /// Treated group (default: `treated`).
        #[arg(long)]
        treated: Option<String>,
        /// Baseline category for log-odds output (default: last).
        #[arg(long)]
        baseline: Option<String>,
        /// `uniform`, `uniform:P`, `decay:RHO` or `explicit:T=W,...`.
        #[arg(long, default_value = "uniform")]
        weights: String,
    },
    /// Cohort-by-period effects with event-time and calendar aggregates.
    Staggered {
        #[command(flatten)]
        panel: PanelArgs,
        /// Sidecar `group,first_treated` (`inf` = never treated).
        cohorts: PathBuf,
        /// `never`, `notyet` or `pooled`.
        #[arg(long, default_value = "pooled")]
        strategy: String,
        /// Baseline category for log-odds output (default: last).
        #[arg(long)]
        baseline: Option<String>,
        #[command(flatten)]
        boot: BootArgs,
    },
    /// Synthetic reweighting of control units and pre-periods.
    Synthetic {
        #[command(flatten)]
        panel: PanelArgs,
        /// Last pre-treatment period.
        #[arg(long)]
        t0: i64,
        /// Treated group (default: `treated`).
        #[arg(long)]
        treated: Option<String>,
        /// Baseline category for log-odds output (default: last).
        #[arg(long)]
        baseline: Option<String>,
        #[arg(long, default_value_t = SolverSettings::default().max_iterations)]
        max_iterations: usize,
        #[arg(long, default_value_t = SolverSettings::default().tolerance)]
        tolerance: f64,
        #[arg(long, default_value_t = 0.0)]
        ridge: f64,
    },
    /// Generate a panel CSV from a random-utility specification.
    Simulate {
        spec: PathBuf,
        /// `population` or `sampled`.
        #[arg(long, default_value = "population")]
        mode: String,
        /// Seed for sampled mode.
        #[arg(long)]
        seed: Option<u64>,
        /// Also write the untreated population panel here.
        #[arg(long)]
        truth: Option<PathBuf>,
    },
    /// Long CSV of quantities, log-quantities, shares and log-odds.
    Plotdata {
        #[command(flatten)]
        panel: PanelArgs,
        /// Baseline category for log-odds output (default: last).
        #[arg(long)]
        baseline: Option<String>,
    },
    /// Linear parallel trends versus CoDiD on the three-category illustration.
    DemoFig1,
}

fn path(p: &std::path::Path) -> String {
    p.display().to_string()
}

fn config(cmd: Cmd, common: &Common) -> RunConfig {
    let (command, inputs) = match &cmd {
        Cmd::Validate { panel, cohorts } => (
            Command::Validate,
            std::iter::once(&panel.panel).chain(cohorts).map(|p| path(p)).collect(),
        ),
        Cmd::Estimate { panel, .. } => (Command::Estimate, vec![path(&panel.panel)]),
        Cmd::Bounds { panel, .. } => (Command::Bounds, vec![path(&panel.panel)]),
        Cmd::Staggered { panel, cohorts, .. } => (Command::Staggered, vec![path(&panel.panel), path(cohorts)]),
        Cmd::Synthetic { panel, .. } => (Command::Synthetic, vec![path(&panel.panel)]),
        Cmd::Simulate { spec, .. } => (Command::Simulate, vec![path(spec)]),
        Cmd::Plotdata { panel, .. } => (Command::Plotdata, vec![path(&panel.panel)]),
        Cmd::DemoFig1 => (Command::DemoFig1, vec![]),
    };
    let mut c = RunConfig::new(command, inputs);
    c.output = common.output.as_deref().map(path);
    c.format = common.format;
    match cmd {
        Cmd::Validate { panel, .. } => c.smoothing = panel.smoothing,
        Cmd::Estimate {
            panel,
            treated,
            baseline,
            strata_weights,
            boot,
        } => {
            c.smoothing = panel.smoothing;
            c.treated = treated;
            c.baseline = baseline;
            c.strata_weights = strata_weights;
            c.bootstrap = boot.settings();
        }
        Cmd::Bounds {
            panel,
            treated,
            baseline,
            weights,
        } => {
            c.smoothing = panel.smoothing;
            c.treated = treated;
            c.baseline = baseline;
            c.weights = Some(weights);
        }
        Cmd::Staggered {
            panel,
            strategy,
            baseline,
            boot,
            ..
        } => {
            c.smoothing = panel.smoothing;
            c.strategy = Some(strategy);
            c.baseline = baseline;
            c.bootstrap = boot.settings();
        }
        Cmd::Synthetic {
            panel,
            t0,
            treated,
            baseline,
            max_iterations,
            tolerance,
            ridge,
        } => {
            c.smoothing = panel.smoothing;
            c.t0 = Some(t0);
            c.treated = treated;
            c.baseline = baseline;
            c.solver = Some(SolverSettings {
                max_iterations,
                tolerance,
                ridge,
            });
        }
        Cmd::Simulate { mode, seed, truth, .. } => {
            c.mode = Some(mode);
            c.seed = seed;
            c.truth = truth.as_deref().map(path);
        }
        Cmd::Plotdata { panel, baseline } => {
            c.smoothing = panel.smoothing;
            c.baseline = baseline;
        }
        Cmd::DemoFig1 => {}
    }
    c
}

fn write(target: Option<&str>, text: &str) -> Result<(), CliError> {
    match target {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::io(p, e)),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::io("<stdout>", e)),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = config(cli.command, &cli.common);
    let outcome = codid::run(&cfg).and_then(|out| {
        for (p, text) in &out.files {
            write(Some(p), text)?;
        }
        write(cfg.output.as_deref(), &out.body)?;
        Ok(out)
    });
    match outcome {
        Ok(out) => {
            for m in &out.messages {
                eprintln!("{m}");
            }
            ExitCode::from(out.exit_code as u8)
        }
        Err(e) => {
            eprintln!("error[{}]: {e}", e.code());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
