use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use paramlat::cli::{run_probe, run_scenario, CliError, Env, Probe, Report};
use paramlat::constructions::search::default_registry;
use paramlat::verdict::Horizon;

#[derive(Parser)]
#[command(
    name = "paramlat",
    version,
    about = "Finite-horizon experiments on parameterizations of decision problems"
)]
struct Args {
    /// Longest string length in the universe.
    #[arg(long, short = 'L', default_value_t = 8, global = true)]
    universe: usize,
    /// Parameter size horizon.
    #[arg(long, short = 'H', default_value_t = 12, global = true)]
    horizon: usize,
    /// Extended horizon for imix; defaults to twice the horizon.
    #[arg(long, global = true)]
    ext: Option<usize>,
    #[arg(long, short = 't', default_value_t = 4, global = true)]
    threshold: usize,
    /// Evaluate independent pieces of a probe, or a scenario's probes, in parallel.
    #[arg(long, global = true)]
    parallel: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Gap table between two parameterizations.
    Gap {
        p: String,
        q: String,
        #[arg(long, default_value_t = 12)]
        n_max: usize,
    },
    /// Nonuniform order in both directions, and the uniform order against bylength.
    Order { p: String, q: String },
    /// Infinite-mixture check at the horizon.
    Imix { p: String },
    /// Greatest lower and least upper bounds for every pair of a family.
    Lattice {
        #[arg(default_value = "sample")]
        family: String,
    },
    /// Filter laws for slicewise membership over a family.
    Filter {
        set: String,
        #[arg(default_value = "sample")]
        family: String,
    },
    /// Principal construction from harvested slices of a set.
    Principal { set: String },
    /// Invalidation experiment for the diagonal set.
    Diag {
        #[arg(long, default_value_t = 2)]
        c: u64,
        #[arg(long, default_value_t = 64)]
        imax: u64,
    },
    /// Dominance of universal search over a certificate registry.
    Search {
        #[arg(long, default_value = "parity")]
        set: String,
        /// Registry file; certificates are issued for harvested programs when absent.
        #[arg(long)]
        registry: Option<String>,
        /// Write the issued registry to this file before checking it.
        #[arg(long)]
        write_registry: Option<PathBuf>,
    },
    /// Instance complexity table and the derived parameterization.
    Ic {
        #[arg(long)]
        set: String,
        #[arg(long, default_value_t = 1)]
        c: u32,
        #[arg(long, default_value_t = 10)]
        m: usize,
    },
    /// Space and parameterization laws over a family.
    Laws {
        #[arg(default_value = "sample")]
        family: String,
    },
    /// Run scenario files.
    Run { scenarios: Vec<PathBuf> },
}

fn main() -> ExitCode {
    let args = Args::parse();
    match execute(&args) {
        Ok(reports) => {
            let mut code = 0;
            for r in &reports {
                print!("{}", r.render());
                eprintln!("elapsed {:.3}s", r.elapsed.as_secs_f64());
                code = match (code, r.exit_code()) {
                    (1, _) | (_, 1) => 1,
                    (a, b) => a.max(b),
                };
            }
            ExitCode::from(code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                CliError::CapExceeded(_) => 2,
                _ => 64,
            })
        }
    }
}

fn execute(args: &Args) -> Result<Vec<Report>, CliError> {
    if let Command::Run { scenarios } = &args.command {
        return scenarios.iter().map(|p| run_scenario(p, args.parallel)).collect();
    }
    let mut horizon =
        Horizon::new(args.universe, args.horizon, args.threshold.max(1)).map_err(|e| CliError::Io(e.to_string()))?;
    if let Some(ext) = args.ext {
        horizon = horizon.with_ext(ext);
    }
    let mut env = Env::new(horizon);
    env.parallel = args.parallel;
    let probe = match &args.command {
        Command::Gap { p, q, n_max } => Probe::Gap {
            p: p.clone(),
            q: q.clone(),
            n_max: *n_max,
        },
        Command::Order { p, q } => Probe::Order {
            p: p.clone(),
            q: q.clone(),
        },
        Command::Imix { p } => Probe::Imix { p: p.clone() },
        Command::Lattice { family } => Probe::Lattice { family: family.clone() },
        Command::Filter { set, family } => Probe::Filter {
            set: set.clone(),
            family: family.clone(),
        },
        Command::Principal { set } => Probe::Principal { set: set.clone() },
        Command::Diag { c, imax } => Probe::Diag { c: *c, i_max: *imax },
        Command::Search {
            set,
            registry,
            write_registry,
        } => {
            if let Some(path) = write_registry {
                let reg = default_registry(&env.set(set)?, horizon.universe, 16);
                std::fs::write(path, reg.to_text()).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            }
            Probe::Search {
                set: set.clone(),
                registry: registry.clone(),
            }
        }
        Command::Ic { set, c, m } => Probe::Ic {
            set: set.clone(),
            c: *c,
            m: *m,
        },
        Command::Laws { family } => Probe::Laws { family: family.clone() },
        Command::Run { .. } => unreachable!(),
    };
    let start = std::time::Instant::now();
    let report = run_probe(&probe, &env)?;
    Ok(vec![Report {
        horizon,
        probes: vec![report],
        elapsed: start.elapsed(),
    }])
}
