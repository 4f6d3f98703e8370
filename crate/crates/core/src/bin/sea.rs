use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use safe_explore::data_io::{write_ltr, write_svmlight};
use safe_explore::environments::synthetic::{SyntheticClassificationSpec, SyntheticRankingSpec};
use safe_explore::experiment::{
    run_experiment, verify, ExperimentConfig, Overrides, OUTPUT_ROOT_ENV,
};
use safe_explore::Error;

#[derive(Parser)]
#[command(
    name = "sea",
    version,
    about = "Safe exploration experiments for bandits and ranking"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
#[allow(clippy::large_enum_variant)]
enum Command {
    /// Run one method over several seeds and write traces, metrics and a manifest.
    Run {
        /// TOML config, or a manifest JSON from an earlier run.
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Run oracle cross-checks and print a JSON report.
    Verify {
        /// estimators | bounds | gradients | interleaving | environments | safety | all
        #[arg(default_value = "all")]
        suite: String,
    },
    /// Write the built-in synthetic datasets as svmlight files.
    MakeSynthetic {
        #[arg(long, default_value = "classification")]
        task: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

const CONFIG_ERROR: u8 = 1;
const RUNTIME_ERROR: u8 = 2;
const VERIFY_FAILED: u8 = 3;

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::Parse { .. } => CONFIG_ERROR,
        _ => RUNTIME_ERROR,
    }
}

fn fail(e: Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(exit_code(&e))
}

fn out_dir(path: PathBuf) -> PathBuf {
    match std::env::var_os(OUTPUT_ROOT_ENV) {
        Some(root) if path.is_relative() => PathBuf::from(root).join(path),
        _ => path,
    }
}

fn make_synthetic(task: &str, seed: u64, out: PathBuf) -> Result<Vec<PathBuf>, Error> {
    let dir = out_dir(out);
    fs::create_dir_all(&dir)?;
    let (train, test) = (dir.join("train.svm"), dir.join("test.svm"));
    match task {
        "classification" => {
            let data = SyntheticClassificationSpec::default().generate(seed)?;
            let names: Vec<String> = (0..data.n_classes).map(|c| c.to_string()).collect();
            write_svmlight(&data.train, &names, fs::File::create(&train)?)?;
            write_svmlight(&data.test, &names, fs::File::create(&test)?)?;
        }
        "ranking" => {
            let data = SyntheticRankingSpec::default().generate(seed)?;
            write_ltr(&data.train, fs::File::create(&train)?)?;
            write_ltr(&data.test, fs::File::create(&test)?)?;
        }
        other => {
            return Err(Error::Config(format!(
                "unknown task '{other}' (expected classification | ranking)"
            )))
        }
    }
    Ok(vec![train, test])
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config, overrides } => {
            let mut cfg = match config {
                Some(path) => match ExperimentConfig::load(&path) {
                    Ok(c) => c,
                    Err(e) => return fail(e),
                },
                None => ExperimentConfig::default(),
            };
            if let Err(e) = cfg.apply(&overrides) {
                return fail(e);
            }
            match run_experiment(&cfg) {
                Ok(summary) => {
                    for rep in &summary.replications {
                        println!(
                            "seed {}: deployments at {:?}",
                            rep.seed, rep.deployment_rounds
                        );
                    }
                    println!("wrote {}", summary.output_dir.display());
                    ExitCode::SUCCESS
                }
                Err(e) => fail(e),
            }
        }
        Command::Verify { suite } => match verify::verify(&suite) {
            Ok(reports) => {
                match serde_json::to_string_pretty(&reports) {
                    Ok(json) => println!("{json}"),
                    Err(e) => return fail(e.into()),
                }
                if reports.iter().all(|r| r.passed) {
                    ExitCode::SUCCESS
                } else {
                    ExitCode::from(VERIFY_FAILED)
                }
            }
            Err(e) => fail(e),
        },
        Command::MakeSynthetic { task, seed, out } => match make_synthetic(&task, seed, out) {
            Ok(paths) => {
                for p in paths {
                    println!("wrote {}", p.display());
                }
                ExitCode::SUCCESS
            }
            Err(e) => fail(e),
        },
    }
}
