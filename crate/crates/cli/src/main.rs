use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use metacontrol::harness::{
    base_seed, parse_runs, reason_over_snapshot, run_matrix_to_file, run_mission, run_pyramid_scenarios, summarize,
    InitialConfig, MatrixSpec, MissionOptions, Mode, TestCase,
};
use metacontrol::model::{generate_nav_model, print_model, validate_source, NavParameterSpace};
use metacontrol::navsim::Clutter;

#[derive(Parser)]
#[command(name = "metactl", version, about = "Metacontrol toolkit: models, reasoning and navigation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check an .archmodel file and print its diagnostics.
    Validate { file: PathBuf },
    /// Print the 27-design navigation model.
    GenerateNavModel {
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run one navigation mission.
    Mission {
        #[arg(long, default_value = "C4")]
        config: String,
        #[arg(long, default_value = "none")]
        clutter: Clutter,
        /// Power increase in percent.
        #[arg(long, default_value_t = 0, value_parser = clap::value_parser!(u32).range(0..=100))]
        power: u32,
        #[arg(long, default_value = "mros")]
        mode: Mode,
        /// Defaults to METACTL_SEED, or 0.
        #[arg(long)]
        seed: Option<u64>,
        /// Write the trajectory CSV here.
        #[arg(long)]
        trajectory: Option<PathBuf>,
        /// Write emitted diagnostics as JSON lines here.
        #[arg(long)]
        diagnostics: Option<PathBuf>,
    },
    /// Run the Base-vs-MROS matrix, appending missing rows to a CSV.
    Matrix {
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
        seeds: u64,
        #[arg(long, default_value = "runs.csv")]
        out: PathBuf,
        /// First seed; defaults to METACTL_SEED, or 0.
        #[arg(long)]
        base_seed: Option<u64>,
    },
    /// Aggregate a run CSV into tables and figure data files.
    Summarize {
        csv: PathBuf,
        /// Directory for the per-figure CSV files.
        #[arg(long)]
        fig_dir: Option<PathBuf>,
    },
    /// Run the pick-and-place failure scenarios.
    Pyramid,
    /// Run the reasoner over a knowledge-base snapshot and print the trace.
    Reason { snapshot: PathBuf },
}

fn fail(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(1)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match cli.command {
        Command::Validate { file } => {
            let src = match fs::read_to_string(&file) {
                Ok(s) => s,
                Err(e) => return fail(format!("{}: {e}", file.display())),
            };
            let diags = validate_source(&src);
            for d in &diags {
                println!("{}:{d}", file.display());
            }
            if diags.iter().any(|d| d.is_error()) {
                ExitCode::from(1)
            } else {
                if diags.is_empty() {
                    println!("{}: ok", file.display());
                }
                ExitCode::SUCCESS
            }
        }
        Command::GenerateNavModel { out } => {
            let text = print_model(&generate_nav_model(&NavParameterSpace::default()));
            match out {
                Some(p) => match fs::write(&p, text) {
                    Ok(()) => ExitCode::SUCCESS,
                    Err(e) => fail(format!("{}: {e}", p.display())),
                },
                None => {
                    print!("{text}");
                    ExitCode::SUCCESS
                }
            }
        }
        Command::Mission {
            config,
            clutter,
            power,
            mode,
            seed,
            trajectory,
            diagnostics,
        } => {
            let Some(cfg) = InitialConfig::by_label(&config) else {
                eprintln!("error: unknown configuration `{config}` (C1..C7)");
                return ExitCode::from(2);
            };
            let case = TestCase::new(cfg, clutter, power, mode, seed.unwrap_or_else(|| base_seed(0)));
            let options = MissionOptions {
                record_diagnostics: diagnostics.is_some(),
                record_trajectory: trajectory.is_some(),
            };
            let run = run_mission(&case, options);
            for c in &run.commands {
                println!("{}", c.to_json_line());
            }
            let m = run.metrics;
            println!(
                "{} {} clutter={} power={}% seed={} outcome={} mission_time={:.3} t_safety_viol={:.3} t_energy_viol={:.3} reconfig_count={}",
                cfg.label, mode, clutter, power, case.seed, m.outcome, m.mission_time, m.t_safety_viol, m.t_energy_viol, m.reconfig_count
            );
            if let Some(p) = trajectory {
                let written = fs::File::create(&p)
                    .map_err(|e| e.to_string())
                    .and_then(|f| run.sim.write_trajectory(f).map_err(|e| e.to_string()));
                if let Err(e) = written {
                    return fail(format!("{}: {e}", p.display()));
                }
            }
            if let Some(p) = diagnostics {
                let text: String = run.diagnostics.iter().map(|d| d.to_json_line() + "\n").collect();
                if let Err(e) = fs::write(&p, text) {
                    return fail(format!("{}: {e}", p.display()));
                }
            }
            ExitCode::SUCCESS
        }
        Command::Matrix { seeds, out, base_seed: first } => {
            let spec = MatrixSpec::with_seeds(seeds, first.unwrap_or_else(|| base_seed(0)));
            match run_matrix_to_file(&spec, &out) {
                Ok(r) => {
                    println!("{}: {} rows present, {} written", out.display(), r.existing, r.written);
                    ExitCode::SUCCESS
                }
                Err(e) => fail(e),
            }
        }
        Command::Summarize { csv, fig_dir } => {
            let text = match fs::read_to_string(&csv) {
                Ok(t) => t,
                Err(e) => return fail(format!("{}: {e}", csv.display())),
            };
            let rows = match parse_runs(&text) {
                Ok(r) => r,
                Err(e) => return fail(e),
            };
            let summary = summarize(&rows);
            print!("{}", summary.render_text());
            if let Some(dir) = fig_dir {
                if let Err(e) = fs::create_dir_all(&dir) {
                    return fail(format!("{}: {e}", dir.display()));
                }
                for (name, body) in summary.figure_csvs() {
                    if let Err(e) = fs::write(dir.join(&name), body) {
                        return fail(format!("{name}: {e}"));
                    }
                }
            }
            ExitCode::SUCCESS
        }
        Command::Pyramid => {
            let report = run_pyramid_scenarios();
            print!("{report}");
            if report.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Command::Reason { snapshot } => {
            let text = match fs::read_to_string(&snapshot) {
                Ok(t) => t,
                Err(e) => return fail(format!("{}: {e}", snapshot.display())),
            };
            match reason_over_snapshot(&text) {
                Ok((_, out)) => {
                    print!("{out}");
                    ExitCode::SUCCESS
                }
                Err(e) => fail(e),
            }
        }
    }
}
