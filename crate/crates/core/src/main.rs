use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use mdl_core::harness::gen::{generate, GenSpec};
use mdl_core::harness::verify::all_passed;
use mdl_core::harness::{execute, verify_report, RunConfig, RunReport};
use mdl_core::model::Instance;
use mdl_core::oracle::ground_truth;
use mdl_core::sampling::Mode;
use mdl_core::Error;

#[derive(Parser)]
#[command(name = "mdl", version, about = "Multi-distribution learning over finite hypothesis classes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a configured pipeline and write its report.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Report path; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        /// Per-round telemetry as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        quiet: bool,
    },
    /// Print OPT, h*, per-hypothesis max-loss and VC dimension as JSON.
    Oracle {
        #[arg(long)]
        instance: PathBuf,
    },
    /// Re-check a report against exact evaluation.
    Verify {
        #[arg(long)]
        report: PathBuf,
        /// Defaults to the instance named in the report's config.
        #[arg(long)]
        instance: Option<PathBuf>,
        #[arg(long)]
        quiet: bool,
    },
    /// Write a random desk-scale instance.
    Gen {
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 12)]
        domain_size: usize,
        #[arg(long, default_value_t = 40)]
        hypotheses: usize,
        #[arg(long, default_value_t = 3)]
        k: usize,
        #[arg(long, default_value_t = 8)]
        support: usize,
        /// Label noise around a planted hypothesis; fair-coin labels when absent.
        #[arg(long)]
        noise: Option<f64>,
    },
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum ModeArg {
    Sampled,
    Population,
}

fn error_json(e: &Error) -> String {
    let (kind, path) = match e {
        Error::Config { path, .. } => ("config", Some(path.clone())),
        Error::InvalidInstance { path, .. } => ("instance", Some(path.clone())),
        e if e.is_validation() => ("validation", None),
        _ => ("runtime", None),
    };
    json!({ "error": { "kind": kind, "path": path, "message": e.to_string() } }).to_string()
}

fn write_output(path: Option<&Path>, text: &str) -> io::Result<()> {
    match path {
        Some(p) => std::fs::write(p, text),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.write_all(b"\n")
        }
    }
}

fn fail(e: &Error, code: u8) -> ExitCode {
    eprintln!("{}", error_json(e));
    ExitCode::from(code)
}

fn cmd_run(
    config: &Path,
    out: Option<&Path>,
    seed: Option<u64>,
    mode: Option<ModeArg>,
    csv: Option<&Path>,
    quiet: bool,
) -> ExitCode {
    let mut cfg = match RunConfig::load(config) {
        Ok(c) => c,
        Err(e) => return fail(&e, 2),
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(m) = mode {
        cfg.mode = match m {
            ModeArg::Sampled => Mode::Sampled,
            ModeArg::Population => Mode::Population,
        };
    }
    let inst = match cfg.load_instance() {
        Ok(i) => i,
        Err(e) => return fail(&e, 2),
    };
    let report = match execute(&cfg, &inst) {
        Ok(r) => r,
        Err(e) if e.is_validation() => return fail(&e, 2),
        Err(e) => return fail(&e, 3),
    };
    let written = report
        .to_json()
        .and_then(|text| write_output(out, &text).map_err(Error::from))
        .and_then(|_| match csv {
            Some(p) => report.write_csv(BufWriter::new(File::create(p)?)),
            None => Ok(()),
        });
    if let Err(e) = written {
        return fail(&e, 3);
    }
    if !quiet {
        eprintln!(
            "max_output_loss {:.6}  opt {}  samples {}  rounds {}  {} ms",
            report.max_output_loss,
            report.opt.map_or("n/a".to_string(), |o| format!("{o:.6}")),
            report.budget.total,
            report.rounds.len(),
            report.wall_clock_ms
        );
    }
    ExitCode::SUCCESS
}

fn cmd_oracle(instance: &Path) -> ExitCode {
    let result = Instance::load(instance)
        .and_then(|inst| ground_truth(&inst))
        .and_then(|gt| Ok(serde_json::to_string_pretty(&gt)?));
    match result {
        Ok(text) => {
            println!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => fail(&e, 2),
    }
}

fn cmd_verify(report: &Path, instance: Option<&Path>, quiet: bool) -> ExitCode {
    let report = match RunReport::load(report) {
        Ok(r) => r,
        Err(e) => return fail(&e, 2),
    };
    let inst = match instance {
        Some(p) => Instance::load(p),
        None => report.config.load_instance(),
    };
    let inst = match inst {
        Ok(i) => i,
        Err(e) => return fail(&e, 2),
    };
    let checks = verify_report(&report, &inst);
    for c in &checks {
        if !quiet || !c.passed {
            println!("[{}] {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
        }
    }
    if all_passed(&checks) {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run {
            config,
            out,
            seed,
            mode,
            csv,
            quiet,
        } => cmd_run(&config, out.as_deref(), seed, mode, csv.as_deref(), quiet),
        Command::Oracle { instance } => cmd_oracle(&instance),
        Command::Verify { report, instance, quiet } => cmd_verify(&report, instance.as_deref(), quiet),
        Command::Gen {
            out,
            seed,
            domain_size,
            hypotheses,
            k,
            support,
            noise,
        } => {
            let spec = GenSpec {
                domain_size,
                hypotheses,
                k,
                support,
                planted_noise: noise,
                seed,
            };
            let result = generate(&spec)
                .and_then(|inst| Ok(serde_json::to_string(&inst.to_file())?))
                .and_then(|text| write_output(out.as_deref(), &text).map_err(Error::from));
            match result {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => fail(&e, 2),
            }
        }
    }
}
