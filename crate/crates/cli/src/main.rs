use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use quadarm::batch::{self, Execution};
use quadarm::control::ControllerKind;
use quadarm::kinematics::{inverse_kinematics, ArmGeometry, ElbowBranch, IkTarget};
use quadarm::metrics_io::{format_sig9, read_log_csv, write_log_csv, RmsReport};
use quadarm::sim::{run_scenario, ScenarioConfig, SimError};

#[derive(Parser)]
#[command(name = "quadarm", version, about = "Quadcopter + 3-link arm mission simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Controller {
    Pid,
    Mrac,
}

impl From<Controller> for ControllerKind {
    fn from(c: Controller) -> Self {
        match c {
            Controller::Pid => ControllerKind::Pid,
            Controller::Mrac => ControllerKind::Mrac,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Switch {
    On,
    Off,
}

#[derive(Clone, Copy, ValueEnum)]
enum Branch {
    Down,
    Up,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario, write its CSV log and RMS report.
    Run {
        config: PathBuf,
        /// Output directory.
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[arg(long, value_enum)]
        controller: Option<Controller>,
        #[arg(long, value_enum)]
        payload: Option<Switch>,
    },
    /// Joint angles (degrees) placing the arm tip at (x, y, z) with link-3 azimuth psi (degrees).
    Ik {
        #[arg(allow_hyphen_values = true)]
        x: f64,
        #[arg(allow_hyphen_values = true)]
        y: f64,
        #[arg(allow_hyphen_values = true)]
        z: f64,
        #[arg(allow_hyphen_values = true)]
        psi: f64,
        #[arg(long, value_enum, default_value = "down")]
        branch: Branch,
        #[arg(long, default_value_t = ArmGeometry::default().l1)]
        l1: f64,
        #[arg(long, default_value_t = ArmGeometry::default().l2)]
        l2: f64,
        #[arg(long, default_value_t = ArmGeometry::default().l3)]
        l3: f64,
    },
    /// Run every *.toml scenario in a directory and print an RMS table.
    Sweep {
        dir: PathBuf,
        /// Also write each CSV log here.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Run each scenario with both controllers, with and without payload.
        #[arg(long)]
        matrix: bool,
        /// Disable the worker pool.
        #[arg(long)]
        sequential: bool,
    },
    /// Recompute the RMS errors of a CSV log.
    Report { log: PathBuf },
}

enum Failure {
    Config(String),
    Abort(String),
}

impl Failure {
    fn exit(self) -> ExitCode {
        match self {
            Failure::Config(msg) => {
                eprintln!("error: {msg}");
                ExitCode::from(1)
            }
            Failure::Abort(msg) => {
                eprintln!("simulation aborted: {msg}");
                ExitCode::from(2)
            }
        }
    }
}

fn sim_failure(e: SimError) -> Failure {
    match e {
        SimError::ConfigInvalid(e) => Failure::Config(e.to_string()),
        e @ SimError::NonFiniteState { .. } => Failure::Abort(e.to_string()),
    }
}

fn load(path: &Path, controller: Option<Controller>, payload: Option<Switch>) -> Result<ScenarioConfig, Failure> {
    let mut cfg = ScenarioConfig::load(path).map_err(|e| Failure::Config(e.to_string()))?;
    if let Some(c) = controller {
        cfg.controller = c.into();
    }
    if let Some(p) = payload {
        cfg.payload.enabled = matches!(p, Switch::On);
    }
    Ok(cfg)
}

fn stem(cfg: &ScenarioConfig) -> String {
    let payload = if cfg.payload.enabled { "payload" } else { "nopayload" };
    format!("{}_{}_{payload}", cfg.name, cfg.controller)
}

/// Writes the log and returns the report recomputed from the written file.
fn write_outputs(log: &quadarm::sim::SimLog, dir: &Path, stem: &str) -> Result<RmsReport, Failure> {
    std::fs::create_dir_all(dir).map_err(|e| Failure::Config(format!("{}: {e}", dir.display())))?;
    let csv = dir.join(format!("{stem}.csv"));
    write_log_csv(log, &csv).map_err(|e| Failure::Config(e.to_string()))?;
    let rows = read_log_csv(&csv).map_err(|e| Failure::Config(e.to_string()))?;
    let mut report = RmsReport::from_rows(&rows).map_err(|e| Failure::Config(e.to_string()))?;
    report.controller = Some(log.controller);
    report.payload = log.payload_enabled;
    let path = dir.join(format!("{stem}.report.txt"));
    std::fs::write(&path, format!("{report}\n")).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    Ok(report)
}

fn run(config: &Path, out: &Path, controller: Option<Controller>, payload: Option<Switch>) -> Result<(), Failure> {
    let cfg = load(config, controller, payload)?;
    let log = run_scenario(&cfg).map_err(sim_failure)?;
    let stem = stem(&cfg);
    let report = write_outputs(&log, out, &stem)?;
    println!("{report}");
    println!("log: {}", out.join(format!("{stem}.csv")).display());
    Ok(())
}

fn ik(x: f64, y: f64, z: f64, psi: f64, branch: Branch, lengths: [f64; 3]) -> Result<(), Failure> {
    let geometry = ArmGeometry::new(lengths[0], lengths[1], lengths[2], ArmGeometry::default().d1)
        .map_err(|e| Failure::Config(e.to_string()))?;
    let branch = match branch {
        Branch::Down => ElbowBranch::Down,
        Branch::Up => ElbowBranch::Up,
    };
    let sol = inverse_kinematics(&IkTarget::new(x, y, z, psi.to_radians()), &geometry, branch)
        .map_err(|e| Failure::Config(e.to_string()))?;
    let a = sol.angles.normalized();
    for (name, v) in ["theta1", "theta2", "theta3", "theta4"].iter().zip(a.theta()) {
        println!("{name} = {} deg", format_sig9(v.to_degrees()));
    }
    if sol.base_singular {
        eprintln!("warning: target on the base axis, theta1 set to 0");
    }
    Ok(())
}

fn scenario_files(dir: &Path) -> Result<Vec<PathBuf>, Failure> {
    let entries = std::fs::read_dir(dir).map_err(|e| Failure::Config(format!("{}: {e}", dir.display())))?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "toml"))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(Failure::Config(format!("no .toml scenarios in {}", dir.display())));
    }
    Ok(files)
}

fn sweep(dir: &Path, out: Option<&Path>, matrix: bool, sequential: bool) -> Result<(), Failure> {
    let mut configs = Vec::new();
    for file in scenario_files(dir)? {
        let cfg = load(&file, None, None)?;
        if matrix {
            for kind in [ControllerKind::Pid, ControllerKind::Mrac] {
                for payload in [true, false] {
                    let mut c = cfg.clone();
                    c.controller = kind;
                    c.payload.enabled = payload;
                    configs.push(c);
                }
            }
        } else {
            configs.push(cfg);
        }
    }
    configs
        .sort_by(|a, b| (&a.name, a.controller, !a.payload.enabled).cmp(&(&b.name, b.controller, !b.payload.enabled)));
    let exec = if sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    };
    let logs = batch::run_scenarios(&configs, exec);

    println!(
        "{:<24} {:<10} {:<8} {:>12} {:>12} {:>12}",
        "scenario", "controller", "payload", "rms_x", "rms_y", "rms_z"
    );
    let mut aborted = Vec::new();
    for (cfg, log) in configs.iter().zip(logs) {
        let payload = if cfg.payload.enabled { "on" } else { "off" };
        let log = match log {
            Ok(log) => log,
            Err(e @ SimError::NonFiniteState { .. }) => {
                println!(
                    "{:<24} {:<10} {:<8} {:>12} {:>12} {:>12}",
                    cfg.name, cfg.controller, payload, "-", "-", "-"
                );
                aborted.push(format!("{}: {e}", stem(cfg)));
                continue;
            }
            Err(e) => return Err(sim_failure(e)),
        };
        let report = match out {
            Some(dir) => write_outputs(&log, dir, &stem(cfg))?,
            None => RmsReport::from_log(&log).map_err(|e| Failure::Config(e.to_string()))?,
        };
        println!(
            "{:<24} {:<10} {:<8} {:>12} {:>12} {:>12}",
            cfg.name,
            cfg.controller,
            payload,
            format_sig9(report.x),
            format_sig9(report.y),
            format_sig9(report.z)
        );
    }
    if !aborted.is_empty() {
        return Err(Failure::Abort(aborted.join("; ")));
    }
    Ok(())
}

fn report(log: &Path) -> Result<(), Failure> {
    let rows = read_log_csv(log).map_err(|e| Failure::Config(e.to_string()))?;
    let report = RmsReport::from_rows(&rows).map_err(|e| Failure::Config(e.to_string()))?;
    println!("{report}");
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run {
            config,
            out,
            controller,
            payload,
        } => run(&config, &out, controller, payload),
        Command::Ik {
            x,
            y,
            z,
            psi,
            branch,
            l1,
            l2,
            l3,
        } => ik(x, y, z, psi, branch, [l1, l2, l3]),
        Command::Sweep {
            dir,
            out,
            matrix,
            sequential,
        } => sweep(&dir, out.as_deref(), matrix, sequential),
        Command::Report { log } => report(&log),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => f.exit(),
    }
}
