//! `resetkit`: frequency-domain analysis, simulation and tuning of reset
//! controllers from the command line.
//!
//! Exit status: 0 success, 2 configuration error, 3 infeasible design,
//! 4 closed-loop instability, 1 anything else.

mod commands;

use clap::{Args, Parser, Subcommand, ValueEnum};
use resetkit::cglp::Order;
use resetkit::config::{LeadTarget, PiCorner, Project, ProjectConfig, Sweep};
use resetkit::sim::PlantPreset;
use resetkit::tuner::Objective;
use resetkit::Error;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(
    name = "resetkit",
    version,
    about = "Reset controller (CgLp) analysis, simulation and tuning"
)]
struct Cli {
    /// More log output (repeat for debug)
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

/// Settings shared by all subcommands. Flags override the project file.
/// Frequencies given as flags are in rad/s.
#[derive(Args, Debug, Default, Clone)]
struct Common {
    /// Project file (flat TOML)
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// CgLp order (1 or 2)
    #[arg(long)]
    order: Option<u8>,
    /// Reset value gamma
    #[arg(long, allow_hyphen_values = true)]
    gamma: Option<f64>,
    /// Phase target at the crossover, degrees
    #[arg(long)]
    theta: Option<f64>,
    /// Crossover frequency, rad/s
    #[arg(long)]
    wc: Option<f64>,
    /// Taming frequency, rad/s
    #[arg(long)]
    wt: Option<f64>,
    /// PI corner, rad/s (0 disables the PI factor)
    #[arg(long)]
    wi: Option<f64>,
    /// Loop gain (default: DF crossover at wc)
    #[arg(long, allow_hyphen_values = true)]
    kp: Option<f64>,
    /// Sample time, s
    #[arg(long)]
    ts: Option<f64>,
    /// Noise seed
    #[arg(long)]
    seed: Option<u64>,
    /// Plant preset: mass or stage-eq10
    #[arg(long)]
    plant: Option<String>,
    /// Output file (default: stdout)
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Log-spaced frequency grid in rad/s.
#[derive(Args, Debug, Clone)]
struct Grid {
    /// Lowest frequency, rad/s (default wc/100)
    #[arg(long)]
    wmin: Option<f64>,
    /// Highest frequency, rad/s (default 100 wc)
    #[arg(long)]
    wmax: Option<f64>,
    /// Number of points
    #[arg(long)]
    points: Option<usize>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum SimMode {
    Track,
    Noise,
    Trajectory,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Describing function: CSV omega,magnitude,mag_db,phase_deg
    Df {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        grid: Grid,
    },
    /// Higher-order harmonics: long CSV omega,n,magnitude,mag_db,phase_deg
    Hosidf {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        grid: Grid,
        /// Harmonic orders, comma separated
        #[arg(long, value_delimiter = ',')]
        harmonics: Option<Vec<u32>>,
    },
    /// Resolve one CgLp design: JSON
    Design {
        #[command(flatten)]
        common: Common,
    },
    /// Enumerate a design group and recommend gamma: JSON report plus a text table
    Tune {
        #[command(flatten)]
        common: Common,
        /// tracking (largest w_p) or noise (smallest M_p)
        #[arg(long, default_value = "tracking")]
        objective: String,
    },
    /// Closed-loop simulation: CSV t,r,e,u,y,n plus metrics JSON
    Sim {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "track")]
        mode: SimMode,
        /// Reference frequency for track mode, rad/s
        #[arg(long)]
        omega: Option<f64>,
        /// Noise bound for noise mode
        #[arg(long)]
        noise: Option<f64>,
        /// Run length, s
        #[arg(long)]
        duration: Option<f64>,
        /// Metrics JSON file (default: stdout)
        #[arg(long)]
        metrics_out: Option<PathBuf>,
    },
    /// Pseudo-sensitivity sweep: CSV f_hz,s_inf_db
    Sensitivity {
        #[command(flatten)]
        common: Common,
        /// Frequencies in Hz, comma separated (default: 20 points over 1-40 Hz)
        #[arg(long, value_delimiter = ',')]
        freqs_hz: Option<Vec<f64>>,
    },
}

impl Common {
    /// Project file (if any) with flag overrides applied.
    fn project(&self) -> resetkit::Result<Project> {
        let mut p = match &self.config {
            Some(path) => ProjectConfig::load(path)?.resolve()?,
            None => Project::default(),
        };
        if let Some(o) = self.order {
            p.order = Some(Order::try_from(o).map_err(|e| Error::Config(e.to_string()))?);
        }
        if let Some(g) = self.gamma {
            p.gamma = Some(g);
        }
        if let Some(wc) = self.wc {
            check_positive("--wc", wc)?;
            p.omega_c = wc;
        }
        if let Some(t) = self.theta {
            if !(t > 0.0 && t < 180.0) {
                return Err(Error::Config(format!("--theta must lie in (0, 180), got {t}")));
            }
            p.lead = Some(LeadTarget::Theta(t));
        }
        if let Some(wt) = self.wt {
            check_positive("--wt", wt)?;
            p.omega_t = Some(wt);
        }
        if let Some(wi) = self.wi {
            if !(wi >= 0.0 && wi.is_finite()) {
                return Err(Error::Config(format!("--wi must be non-negative, got {wi}")));
            }
            p.pi = if wi > 0.0 { PiCorner::Fixed(wi) } else { PiCorner::Off };
        }
        if let Some(k) = self.kp {
            p.kp = Some(k);
        }
        if let Some(ts) = self.ts {
            check_positive("--ts", ts)?;
            p.ts = ts;
        }
        if let Some(s) = self.seed {
            p.seed = s;
        }
        if let Some(name) = &self.plant {
            p.plant = name
                .parse::<PlantPreset>()
                .map_err(|e| Error::Config(e.to_string()))?
                .transfer_function();
        }
        if let Some(out) = &self.out {
            p.out = Some(out.clone());
        }
        Ok(p)
    }
}

fn check_positive(flag: &str, v: f64) -> resetkit::Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!("{flag} must be positive, got {v}")))
    }
}

impl Grid {
    fn apply(&self, p: &mut Project) -> resetkit::Result<()> {
        if self.wmin.is_none() && self.wmax.is_none() && self.points.is_none() {
            if p.sweep.is_none() {
                p.sweep = Some(Sweep::Range {
                    lo: p.omega_c / 100.0,
                    hi: p.omega_c * 100.0,
                    points: 200,
                });
            }
            return Ok(());
        }
        let lo = self.wmin.unwrap_or(p.omega_c / 100.0);
        let hi = self.wmax.unwrap_or(p.omega_c * 100.0);
        if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
            return Err(Error::Config(format!("need 0 < --wmin <= --wmax, got {lo}, {hi}")));
        }
        let points = self.points.unwrap_or(200);
        if points == 0 {
            return Err(Error::Config("--points must be at least 1".into()));
        }
        p.sweep = Some(Sweep::Range { lo, hi, points });
        Ok(())
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::InvalidArgument(_) | Error::Improper { .. } => 2,
        Error::Infeasible { .. } | Error::NoFeasibleCandidate { .. } => 3,
        Error::Unstable { .. } => 4,
        _ => 1,
    }
}

fn run(cli: Cli) -> resetkit::Result<()> {
    match cli.command {
        Command::Df { common, grid } => {
            let mut p = common.project()?;
            grid.apply(&mut p)?;
            commands::df(&p)
        }
        Command::Hosidf {
            common,
            grid,
            harmonics,
        } => {
            let mut p = common.project()?;
            grid.apply(&mut p)?;
            if let Some(h) = harmonics {
                if h.contains(&0) {
                    return Err(Error::Config("--harmonics: orders start at 1".into()));
                }
                p.harmonics = h;
            }
            commands::hosidf(&p)
        }
        Command::Design { common } => commands::design(&common.project()?),
        Command::Tune { common, objective } => {
            let objective: Objective = objective.parse().map_err(|e: Error| Error::Config(e.to_string()))?;
            commands::tune(&common.project()?, objective)
        }
        Command::Sim {
            common,
            mode,
            omega,
            noise,
            duration,
            metrics_out,
        } => {
            let mut p = common.project()?;
            if let Some(w) = omega {
                check_positive("--omega", w)?;
                p.reference_omega = Some(w);
            }
            if let Some(n) = noise {
                if !(n >= 0.0 && n.is_finite()) {
                    return Err(Error::Config(format!("--noise must be non-negative, got {n}")));
                }
                p.noise = n;
            }
            if let Some(d) = duration {
                check_positive("--duration", d)?;
                p.duration = Some(d);
            }
            if let Some(m) = metrics_out {
                p.metrics_out = Some(m);
            }
            let mode = match mode {
                SimMode::Track => commands::Mode::Track,
                SimMode::Noise => commands::Mode::Noise,
                SimMode::Trajectory => commands::Mode::Trajectory,
            };
            commands::sim(&p, mode)
        }
        Command::Sensitivity { common, freqs_hz } => {
            let mut p = common.project()?;
            if let Some(f) = freqs_hz {
                if let Some(bad) = f.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
                    return Err(Error::Config(format!("--freqs-hz entries must be positive, got {bad}")));
                }
                p.sweep = Some(Sweep::List(f.iter().map(|v| 2.0 * std::f64::consts::PI * v).collect()));
            }
            commands::sensitivity(&p)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
