mod config;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{CommandFactory, FromArgMatches, Parser, Subcommand};
use relaymatch::equilibrium::Assignment;
use relaymatch::format::{parse_instance, parse_matching, write_instance, write_matching};
use relaymatch::{
    dac_fixed, dac_with_reports, generate_topology, rdac_fixed, run_mechanism, run_sweep,
    summarize, verify_equilibrium, EquilibriumCertificate, ExactUtf, GuessUtf, MechanismKind,
    NetworkInstance, PreferenceLists, SuReportStrategy,
};

use config::{defaults_text, CliConfig};

/// Relay spectrum matching market simulator.
///
/// Exit codes: 0 success, 1 verification or convergence failure,
/// 2 usage or validation error.
#[derive(Parser)]
#[command(name = "relaymatch", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random instance file.
    Gen {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Number of PUs.
        #[arg(long, default_value_t = 2)]
        pus: usize,
        /// Number of SUs.
        #[arg(long, default_value_t = 3)]
        sus: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a mechanism on an instance and write the matching.
    Solve {
        #[arg(long)]
        instance: PathBuf,
        /// g-dac, g-rdac, gsg-rdac or brute-force.
        #[arg(long, default_value = "g-dac")]
        mechanism: MechanismKind,
        #[arg(long, default_value_t = 0.01)]
        epsilon: f64,
        /// Matching file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write the auction log here.
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Check a matching against the equilibrium conditions.
    Verify {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        matching: PathBuf,
        /// Use the guess-based transfer curves instead of the exact ones.
        #[arg(long)]
        guess: bool,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Run the experiment grid and write per-run and summary CSV files.
    Sweep {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Per-run CSV; the summary goes to `<stem>_summary.csv` beside it.
        #[arg(long, default_value = "sweep.csv")]
        out: PathBuf,
        /// Worker threads; defaults to the available cores.
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Print the three-PU, three-SU deferred acceptance example.
    Example1,
}

/// Error that maps to exit code 1 rather than 2.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
struct CheckFailed(String);

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<CheckFailed>().is_some() {
        return 1;
    }
    match err.downcast_ref::<relaymatch::Error>() {
        Some(relaymatch::Error::IterationCapExceeded { .. } | relaymatch::Error::NoSolution) => 1,
        _ => 2,
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn read_instance(path: &Path) -> Result<NetworkInstance> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_instance(&text).with_context(|| format!("in instance {}", path.display()))
}

fn gen(config: Option<&Path>, pus: usize, sus: usize, seed: u64, out: Option<&Path>) -> Result<()> {
    let cfg = CliConfig::load(config)?;
    let inst = generate_topology(&cfg.topology, pus, sus, seed)?;
    emit(out, &write_instance(&inst))
}

fn solve(
    instance: &Path,
    kind: MechanismKind,
    epsilon: f64,
    out: Option<&Path>,
    trace_path: Option<&Path>,
    config: Option<&Path>,
) -> Result<()> {
    let cfg = CliConfig::load(config)?;
    let inst = read_instance(instance)?;
    let trace = run_mechanism(&inst, kind, epsilon, &cfg.mechanism(trace_path.is_some()))?;
    emit(out, &write_matching(&trace.matching))?;
    if let Some(p) = trace_path {
        let mut log = String::new();
        for line in trace.log_lines() {
            log.push_str(&line);
            log.push('\n');
        }
        std::fs::write(p, log).with_context(|| format!("writing {}", p.display()))?;
    }
    eprintln!(
        "{}: {} rounds (final ε {}, {} refinements), total PU utility {:.6}",
        trace.mechanism,
        trace.total_rounds,
        trace.epsilon,
        trace.refinements,
        trace.total_pu_utility()
    );
    if !trace.converged || !trace.settled {
        return Err(CheckFailed(format!(
            "{} did not reach an exact equilibrium; the matching is an ε-equilibrium",
            trace.mechanism
        ))
        .into());
    }
    Ok(())
}

fn report(cert: &EquilibriumCertificate, assignment: &Assignment, deltas: &[f64]) {
    println!("su, pu, delta, lower, upper");
    for (n, b) in cert.bounds.iter().enumerate() {
        match (assignment.pu_of(n), b) {
            (Some(m), Some(b)) => {
                println!("{n}, {m}, {:.9}, {:.9}, {:.9}", deltas[n], b.lower, b.upper)
            }
            _ => println!("{n}, -, -, -, -"),
        }
    }
    for v in &cert.violations {
        println!("violation {v}");
    }
    println!(
        "verdict {}",
        if cert.verdict {
            "equilibrium"
        } else {
            "not an equilibrium"
        }
    );
}

fn verify(instance: &Path, matching: &Path, guess: bool, config: Option<&Path>) -> Result<()> {
    let cfg = CliConfig::load(config)?;
    let inst = read_instance(instance)?;
    let text = std::fs::read_to_string(matching)
        .with_context(|| format!("reading {}", matching.display()))?;
    let m = parse_matching(&text, inst.num_pus(), inst.num_sus())
        .with_context(|| format!("in matching {}", matching.display()))?;
    let cert = if guess {
        verify_equilibrium(&GuessUtf::new(&inst, &cfg.solver)?, &m, &cfg.equilibrium)
    } else {
        verify_equilibrium(&ExactUtf::new(&inst, &cfg.solver)?, &m, &cfg.equilibrium)
    };
    report(&cert, &m.assignment, &m.su_utilities);
    if cert.verdict {
        Ok(())
    } else {
        Err(CheckFailed(format!("{} violations", cert.violations.len())).into())
    }
}

fn write_csv<T: serde::Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w =
        csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

fn summary_path(out: &Path) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    out.with_file_name(format!("{stem}_summary.csv"))
}

fn sweep(config: Option<&Path>, out: &Path, jobs: Option<usize>) -> Result<()> {
    let cfg = CliConfig::load(config)?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(j) = jobs {
        anyhow::ensure!(j > 0, "--jobs must be at least 1");
        pool = pool.num_threads(j);
    }
    let rows = pool
        .build()?
        .install(|| run_sweep(&cfg.experiment, &cfg.topology, &cfg.mechanism(false)))?;
    let summary = summarize(&rows)?;
    write_csv(out, &rows)?;
    write_csv(&summary_path(out), &summary)?;
    let failed = rows.iter().filter(|r| r.failed()).count();
    eprintln!(
        "{} runs, {} failed, {} summary cells",
        rows.len(),
        failed,
        summary.len()
    );
    if failed > 0 {
        return Err(CheckFailed(format!("{failed} runs failed")).into());
    }
    Ok(())
}

fn show(label: &str, a: &Assignment) {
    let pairs: Vec<String> = a
        .pairs()
        .map(|(m, n)| format!("m{}-n{}", m + 1, n + 1))
        .collect();
    println!("{label:<28} {}", pairs.join(" "));
}

fn example1() -> Result<()> {
    // PU m prefers n_m, n_{m+1}, n_{m+2}; SU n prefers m_{n+1}, m_{n+2}, m_n.
    let prefs = PreferenceLists::new(
        vec![vec![0, 1, 2], vec![1, 2, 0], vec![2, 0, 1]],
        vec![vec![1, 2, 0], vec![2, 0, 1], vec![0, 1, 2]],
    )?;
    show("DAC", &dac_fixed(&prefs));
    show("RDAC", &rdac_fixed(&prefs));
    for (label, keep) in [
        ("DAC, n1 reports {m2, m3}", vec![1, 2]),
        ("DAC, n1 reports {m2}", vec![1]),
    ] {
        let mut reports = vec![SuReportStrategy::Truthful; 3];
        reports[0] = SuReportStrategy::Truncate(keep);
        show(label, &dac_with_reports(&prefs, &reports)?);
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Gen {
            config,
            pus,
            sus,
            seed,
            out,
        } => gen(config.as_deref(), pus, sus, seed, out.as_deref()),
        Command::Solve {
            instance,
            mechanism,
            epsilon,
            out,
            trace,
            config,
        } => solve(
            &instance,
            mechanism,
            epsilon,
            out.as_deref(),
            trace.as_deref(),
            config.as_deref(),
        ),
        Command::Verify {
            instance,
            matching,
            guess,
            config,
        } => verify(&instance, &matching, guess, config.as_deref()),
        Command::Sweep { config, out, jobs } => sweep(config.as_deref(), &out, jobs),
        Command::Example1 => example1(),
    }
}

fn main() -> ExitCode {
    let defaults = defaults_text();
    let mut cmd = Cli::command().after_long_help(defaults.clone());
    for name in ["gen", "solve", "verify", "sweep"] {
        cmd = cmd.mut_subcommand(name, |s| s.after_long_help(defaults.clone()));
    }
    let matches = cmd.get_matches();
    let cli = Cli::from_arg_matches(&matches).unwrap_or_else(|e| e.exit());
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
