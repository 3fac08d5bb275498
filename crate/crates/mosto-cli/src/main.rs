//! `mosto` — compute relay chains, compare them against baselines, replay
//! transfers in the simulator, query published tables, and run the
//! measurement-driven controller.
//!
//! Exit codes: 0 on success, 1 when a runtime check fails (baseline
//! disagreement, simulation abort), 2 on input errors (unreadable or
//! malformed files, bad parameters).

use std::fs;
use std::io::BufRead as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::mpsc;
use std::time::{Duration, Instant};

use clap::{Parser, Subcommand};

use mosto::controller::{load_published_table, Controller, ControllerConfig};
use mosto::pareto::{pareto_baseline, pareto_optimized};
use mosto::report::ComparisonReport;
use mosto::sim::{run_scenario, Scenario};
use mosto::topology::{build_full_mesh, parse_topology, DistanceMatrix};
use mosto::transfer::{ChainLookupTable, TransferModel};

#[derive(Parser)]
#[command(name = "mosto", version, about = "Relay-chain planning and simulation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute per-pair chain fronts for a topology and export them.
    Compute {
        /// Topology file (`node`/`link` lines) or a full RTT matrix CSV.
        #[arg(long)]
        topology: PathBuf,
        /// Output path for the front export.
        #[arg(long)]
        out: PathBuf,
        /// Also run the unpruned reference algorithm and require equality.
        #[arg(long)]
        baseline: bool,
    },
    /// Compare selected chains against shortest-path and minimax baselines.
    Compare {
        #[arg(long)]
        topology: PathBuf,
        /// Round counts to evaluate.
        #[arg(long, value_delimiter = ',', default_value = "1,5,10")]
        rounds: Vec<u32>,
        /// Output path for the per-pair CSV; CDF samples land beside it with
        /// the extension swapped to `.cdf.csv`.
        #[arg(long)]
        out: PathBuf,
    },
    /// Replay a scenario file in the discrete-event simulator.
    Simulate {
        #[arg(long)]
        scenario: PathBuf,
        /// Output path for the trace CSV.
        #[arg(long)]
        out: PathBuf,
        /// Override the scenario's random seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Query a published chain table for a transfer.
    Lookup {
        /// A table file as published by the controller.
        #[arg(long)]
        table: PathBuf,
        #[arg(long)]
        from: usize,
        #[arg(long)]
        to: usize,
        /// Transfer size in bytes.
        #[arg(long)]
        size: u64,
    },
    /// Run the controller: ingest `rtt <i> <j> <ms>` lines on stdin and
    /// publish chain tables periodically.
    Controller {
        #[arg(long)]
        config: PathBuf,
    },
}

/// Errors carrying their intended process exit code.
enum CliError {
    /// Unreadable or malformed input: exit 2.
    Input(String),
    /// A runtime check failed: exit 1.
    Runtime(String),
}

impl CliError {
    fn input(e: impl std::fmt::Display) -> CliError {
        CliError::Input(e.to_string())
    }

    fn runtime(e: impl std::fmt::Display) -> CliError {
        CliError::Runtime(e.to_string())
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Compute {
            topology,
            out,
            baseline,
        } => cmd_compute(&topology, &out, baseline),
        Command::Compare {
            topology,
            rounds,
            out,
        } => cmd_compare(&topology, &rounds, &out),
        Command::Simulate {
            scenario,
            out,
            seed,
        } => cmd_simulate(&scenario, &out, seed),
        Command::Lookup {
            table,
            from,
            to,
            size,
        } => cmd_lookup(&table, from, to, size),
        Command::Controller { config } => cmd_controller(&config),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn read_file(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))
}

fn write_file(path: &Path, content: &str) -> Result<(), CliError> {
    fs::write(path, content)
        .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))
}

/// Loads a mesh from either a `node`/`link` topology file (closed into a
/// full mesh over shortest routes) or a raw RTT matrix CSV.
fn load_mesh(path: &Path) -> Result<DistanceMatrix, CliError> {
    let text = read_file(path)?;
    let first_word = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .find(|l| !l.is_empty())
        .unwrap_or("")
        .split_whitespace()
        .next()
        .unwrap_or("");
    if first_word == "node" || first_word == "link" {
        let graph = parse_topology(&text).map_err(CliError::input)?;
        Ok(build_full_mesh(&graph))
    } else {
        DistanceMatrix::from_csv(&text).map_err(CliError::input)
    }
}

fn cmd_compute(topology: &Path, out: &Path, baseline: bool) -> Result<(), CliError> {
    let mesh = load_mesh(topology)?;
    let front = pareto_optimized(&mesh);
    if baseline {
        let reference = pareto_baseline(&mesh);
        if reference != front {
            return Err(CliError::Runtime(
                "pruned front disagrees with the reference algorithm".into(),
            ));
        }
        println!("baseline check passed: both algorithms agree exactly");
    }
    write_file(out, &front.export())?;
    let pairs = mesh.n() * (mesh.n() - 1);
    println!(
        "front for {} nodes ({} ordered pairs) written to {}",
        mesh.n(),
        pairs,
        out.display()
    );
    Ok(())
}

fn cmd_compare(topology: &Path, rounds: &[u32], out: &Path) -> Result<(), CliError> {
    if rounds.is_empty() || rounds.contains(&0) {
        return Err(CliError::Input("rounds must be positive".into()));
    }
    let mesh = load_mesh(topology)?;
    let front = pareto_optimized(&mesh);
    let report = ComparisonReport::build(&front, rounds);
    write_file(out, &report.to_csv())?;
    let cdf_path = out.with_extension("cdf.csv");
    write_file(&cdf_path, &report.cdf_csv())?;
    print!("{}", report.summary());
    println!(
        "detail written to {}, distributions to {}",
        out.display(),
        cdf_path.display()
    );
    Ok(())
}

fn cmd_simulate(scenario: &Path, out: &Path, seed: Option<u64>) -> Result<(), CliError> {
    let text = read_file(scenario)?;
    let mut s = Scenario::parse(&text).map_err(CliError::input)?;
    if let Some(seed) = seed {
        s.seed = seed;
    }
    let report = run_scenario(&s).map_err(CliError::runtime)?;
    write_file(out, &report.trace.to_csv())?;
    println!(
        "completed in {:.3} ms, delivered {} bytes, stream intact: {}",
        report.completion_ms, report.delivered_bytes, report.stream_intact
    );
    println!(
        "retransmissions: {}, timeouts: {}, timeouts after offload: {}",
        report.retransmissions, report.rto_events, report.client_rtos_after_offload
    );
    for (hop, t) in report.ss_end_ms.iter().enumerate() {
        match t {
            Some(ms) => println!("conn {hop}: slow start ended at {ms:.3} ms"),
            None => println!("conn {hop}: slow start never ended"),
        }
    }
    if let Some(ms) = report.handoff_begin_ms {
        println!("handoff began at {ms:.3} ms");
    }
    if let Some(ms) = report.offload_ms {
        println!(
            "relay stepped out at {ms:.3} ms; segments at relay afterwards: {}",
            report.relay_segments_after_offload
        );
    }
    println!("trace written to {}", out.display());
    if !report.stream_intact {
        return Err(CliError::Runtime(
            "delivered stream does not match the source".into(),
        ));
    }
    Ok(())
}

fn cmd_lookup(table: &Path, from: usize, to: usize, size: u64) -> Result<(), CliError> {
    let text = read_file(table)?;
    let table = ChainLookupTable::parse(&text).map_err(CliError::input)?;
    let (entry, rounds) = table
        .lookup_size(from, to, size)
        .map_err(CliError::input)?
        .ok_or_else(|| {
            CliError::Input(format!(
                "no chain for {from} -> {to} in a {}-node table",
                table.n()
            ))
        })?;
    let hops: Vec<String> = entry.hops.iter().map(|h| h.to_string()).collect();
    println!(
        "{} bytes from {} to {}: {} rounds via {} ({:.3} ms modeled, generation {})",
        size,
        from,
        to,
        rounds,
        hops.join(","),
        entry.modeled_ms,
        table.generation()
    );
    Ok(())
}

/// Controller daemon configuration file: `key value` lines.
struct DaemonConfig {
    mesh: DistanceMatrix,
    out_dir: PathBuf,
    controller: ControllerConfig,
    model: TransferModel,
    /// Stop after publishing this many generations (testing hook); `None`
    /// runs until the process is terminated.
    max_cycles: Option<u64>,
}

fn parse_daemon_config(path: &Path) -> Result<DaemonConfig, CliError> {
    let text = read_file(path)?;
    let base = path.parent().unwrap_or(Path::new("."));
    let mut topology: Option<PathBuf> = None;
    let mut out_dir: Option<PathBuf> = None;
    let mut controller = ControllerConfig::default();
    let mut max_cycles = None;
    let (mut icw, mut mss, mut max_rounds) = (10u64, 1460u64, 16u32);
    for (lineno, raw) in text.lines().enumerate() {
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let fields: Vec<&str> = content.split_whitespace().collect();
        let bad = || {
            CliError::Input(format!(
                "{}:{}: bad directive `{content}`",
                path.display(),
                lineno + 1
            ))
        };
        match (fields[0], fields.len()) {
            ("topology", 2) => topology = Some(base.join(fields[1])),
            ("out_dir", 2) => out_dir = Some(base.join(fields[1])),
            ("recompute_period_s", 2) => {
                controller.recompute_period_s = fields[1].parse().map_err(|_| bad())?
            }
            ("update_threshold", 2) => {
                controller.update_threshold = fields[1].parse().map_err(|_| bad())?
            }
            ("dirty_pair_trigger", 2) => {
                controller.dirty_pair_trigger = Some(fields[1].parse().map_err(|_| bad())?)
            }
            ("max_cycles", 2) => max_cycles = Some(fields[1].parse().map_err(|_| bad())?),
            ("steer", 3) => {
                let edge = fields[1].parse().map_err(|_| bad())?;
                let node = fields[2].parse().map_err(|_| bad())?;
                controller.steering.insert(edge, node);
            }
            ("icw", 2) => icw = fields[1].parse().map_err(|_| bad())?,
            ("mss", 2) => mss = fields[1].parse().map_err(|_| bad())?,
            ("max_rounds", 2) => max_rounds = fields[1].parse().map_err(|_| bad())?,
            _ => return Err(bad()),
        }
    }
    let topology =
        topology.ok_or_else(|| CliError::Input("config is missing `topology`".into()))?;
    let out_dir = out_dir.ok_or_else(|| CliError::Input("config is missing `out_dir`".into()))?;
    let model = TransferModel::new(icw, mss, max_rounds).map_err(CliError::input)?;
    Ok(DaemonConfig {
        mesh: load_mesh(&topology)?,
        out_dir,
        controller,
        model,
        max_cycles,
    })
}

fn cmd_controller(config: &Path) -> Result<(), CliError> {
    let cfg = parse_daemon_config(config)?;
    let period = Duration::from_secs_f64(cfg.controller.recompute_period_s);
    let mut controller = Controller::new(cfg.mesh, cfg.model, cfg.controller)
        .map_err(CliError::input)?
        .with_publish_dir(&cfg.out_dir)
        .map_err(CliError::runtime)?;
    println!(
        "generation {} published to {}",
        controller.generation(),
        cfg.out_dir.display()
    );

    // Stdin lines arrive through a channel so the periodic timer keeps
    // ticking while the ingestion side is idle or finished.
    let (tx, rx) = mpsc::channel::<String>();
    std::thread::spawn(move || {
        let stdin = std::io::stdin();
        for line in stdin.lock().lines() {
            let Ok(line) = line else { break };
            if tx.send(line).is_err() {
                break;
            }
        }
    });

    let done = |c: &Controller| cfg.max_cycles.is_some_and(|m| c.generation() >= m);
    let mut next_recompute = Instant::now() + period;
    while !done(&controller) {
        let wait = next_recompute.saturating_duration_since(Instant::now());
        match rx.recv_timeout(wait) {
            Ok(line) => {
                match controller.ingest_line(&line) {
                    Ok(true) => log::info!("measurement applied: {}", line.trim()),
                    Ok(false) => log::debug!("measurement suppressed: {}", line.trim()),
                    Err(e) => log::warn!("ignoring measurement: {e}"),
                }
                if controller.needs_early_recompute() {
                    recompute_and_report(&mut controller, &cfg.out_dir)?;
                    next_recompute = Instant::now() + period;
                }
            }
            Err(mpsc::RecvTimeoutError::Timeout) => {
                recompute_and_report(&mut controller, &cfg.out_dir)?;
                next_recompute = Instant::now() + period;
            }
            Err(mpsc::RecvTimeoutError::Disconnected) => {
                // Ingestion ended; keep the periodic cycle alive.
                std::thread::sleep(next_recompute.saturating_duration_since(Instant::now()));
                recompute_and_report(&mut controller, &cfg.out_dir)?;
                next_recompute = Instant::now() + period;
            }
        }
    }
    Ok(())
}

fn recompute_and_report(controller: &mut Controller, out_dir: &Path) -> Result<(), CliError> {
    controller.recompute_cycle().map_err(CliError::runtime)?;
    println!(
        "generation {} published to {}",
        controller.generation(),
        out_dir.display()
    );
    if controller.budget_violations() > 0 {
        log::warn!(
            "{} recompute budget violations so far",
            controller.budget_violations()
        );
    }
    Ok(())
}

// Keep `load_published_table` linked for downstream tooling that consumes the
// publish directory the same way the tests do.
#[allow(dead_code)]
fn read_current_table(dir: &Path) -> Result<ChainLookupTable, CliError> {
    load_published_table(dir).map_err(CliError::input)
}
