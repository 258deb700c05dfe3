use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use bertrand_cli::commands;
use bertrand_cli::config::{self, ConfigSources, RunConfig};
use bertrand_cli::report;
use bertrand_cli::{CliError, EXIT_OK, EXIT_VERIFICATION_FAILED};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "bertrand", version, about = "Simulate and verify Hamiltonian dynamics on Bertrand spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one trajectory and write trajectory.csv and summary.json
    Simulate(RunArgs),
    /// Run the conservation and closure checks on one trajectory
    Verify(RunArgs),
    /// Classify and measure orbits over an (E, J2) grid
    Sweep(RunArgs),
    /// List the named example spaces
    Catalog {
        #[arg(long)]
        json: bool,
    },
}

#[derive(Args)]
struct RunArgs {
    /// JSON configuration file
    #[arg(long)]
    config: Option<PathBuf>,
    /// Catalog example supplying the space parameters
    #[arg(long)]
    example: Option<String>,
    /// Curvature parameter of the constant-curvature examples
    #[arg(long, allow_hyphen_values = true)]
    kappa: Option<f64>,
    /// Use an attractive potential (amplitude = -1)
    #[arg(long)]
    attractive: bool,
    /// Horizon in radial periods
    #[arg(long, conflicts_with = "t_end")]
    n_periods: Option<f64>,
    /// Horizon in time units
    #[arg(long)]
    t_end: Option<f64>,
    /// KEY=VALUE patch applied after the config file; dotted keys reach nested fields
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Worker threads for sweeps
    #[arg(long)]
    jobs: Option<usize>,
}

impl RunArgs {
    fn load(&self) -> Result<RunConfig, CliError> {
        let mut overrides = self.overrides.clone();
        if let Some(kappa) = self.kappa {
            overrides.insert(0, format!("kappa={kappa}"));
        }
        // a flag replaces whichever horizon the config file chose
        if let Some(p) = self.n_periods {
            overrides.extend(["t_end=null".into(), format!("n_periods={p}")]);
        }
        if let Some(t) = self.t_end {
            overrides.extend(["n_periods=null".into(), format!("t_end={t}")]);
        }
        config::load(&ConfigSources {
            file: self.config.clone(),
            example: self.example.clone(),
            attractive: self.attractive,
            overrides,
        })
    }
}

fn run(cli: Cli) -> Result<i32, CliError> {
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    // a closed stdout (`bertrand catalog | head`) ends the program quietly
    let io = |e: std::io::Error| match e.kind() {
        std::io::ErrorKind::BrokenPipe => std::process::exit(EXIT_OK),
        _ => CliError::Io(e.to_string()),
    };
    match cli.command {
        Command::Simulate(args) => {
            let cfg = args.load()?;
            let dir = commands::output_dir(&cfg, args.out_dir.as_deref())?;
            let outcome = commands::simulate(&cfg, &dir)?;
            for w in &outcome.warnings {
                eprintln!("warning: {w}");
            }
            let s = &outcome.summary;
            writeln!(out, "class            {}", s["class"].as_str().unwrap_or("?")).map_err(io)?;
            writeln!(out, "E                {}", s["E"]).map_err(io)?;
            writeln!(out, "J2               {}", s["J2"]).map_err(io)?;
            if let Some(a) = s["apsidal_angle"].get("value") {
                writeln!(out, "apsidal angle    {a} (m pi / n = {})", s["expected_apsidal_angle"]).map_err(io)?;
            }
            writeln!(out, "samples          {}", s["samples"]).map_err(io)?;
            writeln!(out, "wrote {} and {}", outcome.trajectory_path.display(), outcome.summary_path.display())
                .map_err(io)?;
            Ok(EXIT_OK)
        }
        Command::Verify(args) => {
            let cfg = args.load()?;
            let dir = commands::output_dir(&cfg, args.out_dir.as_deref())?;
            let rep = commands::verify(&cfg, Some(&dir))?;
            for w in &rep.warnings {
                eprintln!("warning: {w}");
            }
            report::print_checks(&mut out, &rep.checks).map_err(io)?;
            writeln!(out, "{}", if rep.pass { "PASS" } else { "FAIL" }).map_err(io)?;
            Ok(if rep.pass { EXIT_OK } else { EXIT_VERIFICATION_FAILED })
        }
        Command::Sweep(args) => {
            let cfg = args.load()?;
            let dir = commands::output_dir(&cfg, args.out_dir.as_deref())?;
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(args.jobs.unwrap_or(0))
                .build()
                .map_err(|e| CliError::Config(format!("--jobs: {e}")))?;
            let rep = pool.install(|| commands::sweep(&cfg))?;
            commands::write_sweep(&rep, &dir)?;
            let bounded = rep.rows.iter().filter(|r| r.pass.is_some()).count();
            let failed = rep.rows.iter().filter(|r| r.pass == Some(false)).count();
            writeln!(out, "{} cells, {bounded} bounded, {failed} failed", rep.rows.len()).map_err(io)?;
            writeln!(out, "wrote {}", dir.join("sweep.json").display()).map_err(io)?;
            Ok(if rep.pass { EXIT_OK } else { EXIT_VERIFICATION_FAILED })
        }
        Command::Catalog { json } => {
            let entries = commands::catalog();
            if json {
                let text = serde_json::to_string_pretty(&entries).map_err(|e| CliError::Io(e.to_string()))?;
                writeln!(out, "{text}").map_err(io)?;
            } else {
                for e in &entries {
                    writeln!(
                        out,
                        "{}\n  {}\n  parameters: {}\n  {}\n  see: {}\n",
                        e.name, e.description, e.parameters, e.identification, e.references
                    )
                    .map_err(io)?;
                }
            }
            Ok(EXIT_OK)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
