use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use geist_core::check::{check_program, summary_line, Diagnostic};
use geist_core::lang::{parse_source, ModelProgram};
use geist_core::runtime::data::DirSource;
use geist_core::runtime::mutate::{run_mutations, MutateError};
use geist_core::runtime::radon::{run_demo, RadonConfig, PROGRAM_FILE, TRANSPOSED_FILE};
use geist_core::runtime::{evaluate, evaluate_unchecked, EvalError};

const OK: u8 = 0;
const TYPE_ERRORS: u8 = 1;
const SYNTAX_ERRORS: u8 = 2;
const IO_ERRORS: u8 = 3;

/// Static checker and evaluator for axis-typed hierarchical models.
#[derive(Debug, Parser)]
#[command(name = "geist", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Type-check a model without reading any data.
    Check {
        file: PathBuf,
        /// One JSON record per diagnostic.
        #[arg(long)]
        json: bool,
    },
    /// Load the data and evaluate a model.
    Eval {
        file: PathBuf,
        /// Evaluate without type checking (bounds and lengths only).
        #[arg(long)]
        unsafe_skip_check: bool,
    },
    /// Generate and run a demo model.
    Demo {
        #[command(subcommand)]
        which: Demo,
    },
    /// Inject axis-level faults and report which ones are caught.
    Mutate {
        file: PathBuf,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Debug, Subcommand)]
enum Demo {
    /// Three-level radon model with synthetic data.
    Radon {
        #[arg(long, default_value_t = 2)]
        states: usize,
        #[arg(long, default_value_t = 5)]
        counties: usize,
        #[arg(long, default_value_t = 50)]
        homes: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value = "radon-demo")]
        out: PathBuf,
    },
}

struct Output {
    file: String,
    color: bool,
    json: bool,
}

impl Output {
    fn diagnostic(&self, d: &Diagnostic) {
        if self.json {
            println!(
                "{}",
                serde_json::to_string(&d.record(&self.file)).expect("serializable")
            );
        } else {
            println!("{}", d.render(&self.file, self.color));
        }
    }

    fn diagnostics(&self, ds: &[Diagnostic]) {
        for d in ds {
            self.diagnostic(d);
        }
        if !self.json {
            println!("{}", summary_line(ds));
        }
    }
}

fn color_enabled() -> bool {
    std::env::var("GEIST_COLOR").is_ok_and(|v| v == "1")
}

fn read(path: &Path) -> Result<String, u8> {
    std::fs::read_to_string(path).map_err(|e| {
        eprintln!("error: cannot read {}: {e}", path.display());
        IO_ERRORS
    })
}

fn parse(src: &str, out: &Output) -> Result<ModelProgram, u8> {
    parse_source(src).map_err(|errs| {
        let ds: Vec<Diagnostic> = errs.iter().map(Diagnostic::from_syntax).collect();
        out.diagnostics(&ds);
        SYNTAX_ERRORS
    })
}

fn output(file: &Path, json: bool) -> Output {
    Output {
        file: file.display().to_string(),
        color: color_enabled() && !json,
        json,
    }
}

fn cmd_check(file: &Path, json: bool) -> Result<u8, u8> {
    let out = output(file, json);
    let program = parse(&read(file)?, &out)?;
    let ds = check_program(&program);
    out.diagnostics(&ds);
    Ok(if ds.iter().any(Diagnostic::is_error) {
        TYPE_ERRORS
    } else {
        OK
    })
}

fn eval_failure(e: EvalError, out: &Output) -> u8 {
    match e {
        EvalError::Syntax(errs) => {
            out.diagnostics(&errs.iter().map(Diagnostic::from_syntax).collect::<Vec<_>>());
            SYNTAX_ERRORS
        }
        EvalError::Type(ds) => {
            out.diagnostics(&ds);
            TYPE_ERRORS
        }
        EvalError::Data(d) => {
            out.diagnostic(&d);
            IO_ERRORS
        }
    }
}

fn cmd_eval(file: &Path, unchecked: bool) -> Result<u8, u8> {
    let out = output(file, false);
    let program = parse(&read(file)?, &out)?;
    let data = DirSource::for_program(file);
    let result = if unchecked {
        eprintln!("warning: type checking skipped (--unsafe-skip-check)");
        evaluate_unchecked(&program, &data)
    } else {
        evaluate(&program, &data)
    };
    match result {
        Ok(report) => {
            print!("{}", report.render());
            Ok(OK)
        }
        Err(e) => Err(eval_failure(e, &out)),
    }
}

fn cmd_demo(config: RadonConfig, dir: &Path) -> Result<u8, u8> {
    let report = run_demo(&config).map_err(|e| {
        eprintln!("error: {e}");
        IO_ERRORS
    })?;
    let mut files = vec![
        (PROGRAM_FILE.to_string(), report.files.program.clone()),
        (
            TRANSPOSED_FILE.to_string(),
            report.transposed_program.clone(),
        ),
        ("report.txt".to_string(), report.render()),
    ];
    files.extend(report.files.files.iter().cloned());
    let write = |name: &str, text: &str| -> std::io::Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join(name), text)
    };
    for (name, text) in &files {
        write(name, text).map_err(|e| {
            eprintln!("error: cannot write {}: {e}", dir.join(name).display());
            IO_ERRORS
        })?;
    }
    print!("{}", report.render());
    println!("wrote {} files to {}", files.len(), dir.display());
    Ok(OK)
}

fn cmd_mutate(file: &Path, trials: usize, seed: u64, json: bool) -> Result<u8, u8> {
    let out = output(file, json);
    let program = parse(&read(file)?, &out)?;
    let data = DirSource::for_program(file);
    match run_mutations(&program, &data, trials, seed) {
        Ok(report) => {
            if json {
                for r in &report.records {
                    println!("{}", serde_json::to_string(r).expect("serializable"));
                }
                let summary = serde_json::json!({
                    "total_mutants": report.total_mutants,
                    "statically_caught": report.statically_caught,
                    "shape_caught": report.shape_caught,
                    "unevaluable": report.unevaluable,
                    "silent": report.silent,
                    "no_change": report.no_change,
                });
                println!("{summary}");
            } else {
                print!("{}", report.render());
            }
            Ok(OK)
        }
        Err(MutateError::IllTyped(ds)) => {
            out.diagnostics(&ds);
            Err(TYPE_ERRORS)
        }
        Err(MutateError::Eval(e)) => Err(eval_failure(e, &out)),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Check { file, json } => cmd_check(&file, json),
        Command::Eval {
            file,
            unsafe_skip_check,
        } => cmd_eval(&file, unsafe_skip_check),
        Command::Demo {
            which:
                Demo::Radon {
                    states,
                    counties,
                    homes,
                    seed,
                    out,
                },
        } => cmd_demo(RadonConfig::new(states, counties, homes, seed), &out),
        Command::Mutate {
            file,
            trials,
            seed,
            json,
        } => cmd_mutate(&file, trials, seed, json),
    };
    ExitCode::from(result.unwrap_or_else(|code| code))
}
