use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use nlpdhgm_cli::commands::{
    check_all, divergence_error, out_dir_or_default, run_and_emit, sweep, Assertions,
};
use nlpdhgm_cli::{parse_config, CliError, ConfigLayer, Result};

#[derive(Parser)]
#[command(
    name = "nlpdhgm",
    version,
    about = "Nonlinear primal-dual hybrid gradient experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write CSV, summary and manifest files.
    Run {
        #[command(flatten)]
        common: Common,
        /// File-name stem of the outputs.
        #[arg(long, default_value = "run")]
        name: String,
        #[command(flatten)]
        asserts: AssertFlags,
    },
    /// Run one experiment per Moreau–Yosida γ.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Comma-separated γ values.
        #[arg(long, value_delimiter = ',', default_value = "0.1,1")]
        gammas: Vec<f64>,
    },
    /// Run the diagnostic suites (prox, adjoint, Taylor, three-point, descent).
    Check {
        /// Random points per prox map.
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Write the JSON report here instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Common {
    /// Flat TOML config file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Start from the full-scale defaults (mesh 1000, 10⁴ iterations).
    #[arg(long)]
    full_scale: bool,
    /// Directory for the output files (default: current directory).
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[command(flatten)]
    layer: ConfigLayer,
}

#[derive(Args)]
struct AssertFlags {
    /// Fail unless the fitted log-log slope is at most this value.
    #[arg(long, allow_negative_numbers = true)]
    assert_slope: Option<f64>,
    /// Fail unless the geometric ratio is within 0.05 of the theory.
    #[arg(long)]
    assert_ratio: bool,
    /// Fail unless every step-length bound holds.
    #[arg(long)]
    assert_bounds: bool,
    /// Fail unless the descent inequality holds.
    #[arg(long)]
    assert_descent: bool,
}

fn load(common: &Common) -> Result<nlpdhgm::experiments::ExperimentConfig> {
    let source = match &common.config {
        Some(path) => std::fs::read_to_string(path).map_err(|e| CliError::Io {
            path: path.clone(),
            source: e,
        })?,
        None => String::new(),
    };
    parse_config(&source, &common.layer, common.full_scale)
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run {
            common,
            name,
            asserts,
        } => {
            let cfg = load(&common)?;
            let out = run_and_emit(&cfg, &out_dir_or_default(common.out_dir), &name)?;
            for w in &out.summary.warnings {
                eprintln!("warning: {w}");
            }
            println!("{}", out.manifest.csv_path.display());
            println!("{}", out.manifest.summary_path.display());
            if let Some(e) = divergence_error(&out) {
                return Err(e);
            }
            let asserts = Assertions {
                max_slope: asserts.assert_slope,
                ratio: asserts.assert_ratio,
                bounds: asserts.assert_bounds,
                descent: asserts.assert_descent,
            };
            let failed = asserts.failures(&out.summary);
            if failed.is_empty() {
                Ok(())
            } else {
                Err(CliError::Assertion(failed.join("; ")))
            }
        }
        Command::Sweep { common, gammas } => {
            let cfg = load(&common)?;
            let mut first_error = None;
            for (gamma, out) in sweep(&cfg, &gammas, &out_dir_or_default(common.out_dir)) {
                match out {
                    Ok(out) => {
                        println!("{}", out.manifest.summary_path.display());
                        if let Some(e) = divergence_error(&out) {
                            eprintln!("error[{}]: gamma {gamma}: {e}", e.category());
                            first_error.get_or_insert(e);
                        }
                    }
                    Err(e) => {
                        eprintln!("error[{}]: gamma {gamma}: {e}", e.category());
                        first_error.get_or_insert(e);
                    }
                }
            }
            first_error.map_or(Ok(()), Err)
        }
        Command::Check {
            samples,
            seed,
            output,
        } => {
            let report = check_all(samples, seed)?;
            let text = serde_json::to_string_pretty(&report)?;
            match output {
                Some(path) => std::fs::write(&path, text + "\n")
                    .map_err(|e| CliError::Io { path, source: e })?,
                None => println!("{text}"),
            }
            if report.passed {
                Ok(())
            } else {
                Err(CliError::Assertion("diagnostic suite failed".into()))
            }
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.category());
            ExitCode::FAILURE
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn execute_args(args: &[&str]) -> Result<()> {
        execute(
            Cli::try_parse_from(std::iter::once("nlpdhgm").chain(args.iter().copied())).unwrap(),
        )
    }

    #[test]
    fn errors_carry_a_category() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("c.toml");
        std::fs::write(&cfg, "experiment = \"complex_toy\"\nalpha = -1\n").unwrap();
        let err = execute_args(&["run", "--config", cfg.to_str().unwrap()]).unwrap_err();
        assert_eq!(err.category(), "config");
        assert!(err.to_string().contains("alpha"));

        let out = dir.path().to_str().unwrap();
        let err = execute_args(&[
            "run",
            "--experiment",
            "complex_toy",
            "--n-max",
            "50",
            "--tau",
            "10",
            "--assert-bounds",
            "--out-dir",
            out,
        ])
        .unwrap_err();
        assert_eq!(err.category(), "assertion");
        assert!(err.to_string().contains("sigma_tau_product"), "{err}");

        execute_args(&[
            "run",
            "--experiment",
            "complex_toy",
            "--n-max",
            "2000",
            "--assert-slope",
            "-1.8",
            "--out-dir",
            out,
        ])
        .unwrap();
    }

    #[test]
    fn flags_parse() {
        assert!(
            Cli::try_parse_from(["nlpdhgm", "run", "--experiment", "l1fit", "--bogus", "1"])
                .is_err()
        );
        let cli = Cli::try_parse_from([
            "nlpdhgm",
            "sweep",
            "--experiment",
            "l1fit",
            "--gammas",
            "0.1,0.5,1",
        ])
        .unwrap();
        match cli.command {
            Command::Sweep { gammas, .. } => assert_eq!(gammas, vec![0.1, 0.5, 1.0]),
            _ => panic!("expected sweep"),
        }
    }
}
