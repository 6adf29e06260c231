//! Command-line pipeline: recode raw survey files, sweep class counts, fit
//! models, profile them, and simulate synthetic datasets.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use lcca::estimate::{fit_em, EmConfig, MembershipMode, ModelDocument};
use lcca::ingest;
use lcca::model::Dataset;
use lcca::profile;
use lcca::select;
use lcca::synth;
use lcca::LccaError;

const EXIT_INPUT: u8 = 2;
const EXIT_ESTIMATION: u8 = 3;
const EXIT_SCHEMA: u8 = 4;

#[derive(Parser)]
#[command(name = "lcca", version, about = "Weighted latent class cluster analysis for categorical survey data")]
struct Cli {
    /// Worker threads for estimation (default: available parallelism).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TableFormat {
    Csv,
    Markdown,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    /// Indicator-only stage with constant class priors.
    Constant,
    /// Covariate-driven membership logit.
    Covariate,
}

impl From<Mode> for MembershipMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Constant => MembershipMode::ConstantPrior,
            Mode::Covariate => MembershipMode::Covariate,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Merge household/person/trip CSVs, filter, recode, and write a dataset.
    Recode {
        #[arg(long)]
        household: PathBuf,
        #[arg(long)]
        person: PathBuf,
        #[arg(long)]
        trip: PathBuf,
        /// Recode spec JSON; defaults to the bundled NHTS 2022 spec.
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Sweep class counts, write the fit-statistics table, report the best K.
    Select {
        /// Directory holding dataset.json + dataset.csv.
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value_t = 1)]
        kmin: usize,
        #[arg(long, default_value_t = 6)]
        kmax: usize,
        #[arg(long, value_enum, default_value_t = Mode::Constant)]
        mode: Mode,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 20)]
        restarts: usize,
        #[arg(long, value_enum, default_value_t = TableFormat::Csv)]
        format: TableFormat,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit one model and write it as JSON.
    Fit {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        k: usize,
        /// Use the covariate membership model.
        #[arg(long)]
        covariates: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 20)]
        restarts: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Profile a fitted model against a dataset.
    Profile {
        /// model.json written by `fit`.
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long, value_enum, default_value_t = TableFormat::Csv)]
        format: TableFormat,
        #[arg(long)]
        out: PathBuf,
    },
    /// Simulate a dataset from a fitted model, with a truth-labels sidecar.
    Simulate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Constant weight for every simulated row.
        #[arg(long, default_value_t = 1.0)]
        weight: f64,
        /// Dataset directory to bootstrap covariate rows from (required for
        /// covariate-membership models).
        #[arg(long)]
        covariate_pool: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Serialize)]
struct Manifest {
    command: String,
    version: String,
    seed: Option<u64>,
    args: Vec<String>,
    outputs: Vec<String>,
}

fn write_manifest(out: &Path, command: &str, seed: Option<u64>, outputs: &[&str]) -> Result<(), LccaError> {
    let manifest = Manifest {
        command: command.to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        seed,
        args: std::env::args().collect(),
        outputs: outputs.iter().map(|s| s.to_string()).collect(),
    };
    std::fs::write(
        out.join("manifest.json"),
        serde_json::to_string_pretty(&manifest)?,
    )?;
    Ok(())
}

fn load_dataset_dir(dir: &Path) -> Result<Dataset, LccaError> {
    ingest::read_dataset(&dir.join("dataset.json"), &dir.join("dataset.csv"))
}

fn exit_code_for(err: &LccaError) -> u8 {
    match err {
        LccaError::SchemaMismatch(_) => EXIT_SCHEMA,
        LccaError::Estimation(_) | LccaError::AllChainsDegenerate(_) => EXIT_ESTIMATION,
        _ => EXIT_INPUT,
    }
}

fn run(cli: Cli) -> Result<(), LccaError> {
    if let Some(threads) = cli.threads {
        // ignore failure: the global pool may already exist
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }

    match cli.command {
        Command::Recode {
            household,
            person,
            trip,
            spec,
            out,
        } => {
            let spec = match spec {
                Some(path) => ingest::RecodeSpec::from_json(&std::fs::read_to_string(&path)?)?,
                None => ingest::default_nhts_spec(),
            };
            let (raw, warnings) = ingest::load_and_merge(
                &household,
                &person,
                &trip,
                &ingest::JoinKeys::default(),
            )?;
            let (data, mut report) = ingest::recode(&raw, &spec)?;
            report.warnings.extend(warnings);
            std::fs::create_dir_all(&out)?;
            ingest::write_dataset(&data, &out.join("dataset.json"), &out.join("dataset.csv"))?;
            std::fs::write(
                out.join("drop_report.json"),
                serde_json::to_string_pretty(&report)?,
            )?;
            write_manifest(&out, "recode", None, &["dataset.json", "dataset.csv", "drop_report.json"])?;
            eprintln!(
                "recode: {} rows in, {} rows out ({} filtered, {} missing, {} unmapped)",
                report.input_rows,
                report.output_rows,
                report.filtered_out,
                report.missing_dropped,
                report.unmapped_dropped
            );
            Ok(())
        }
        Command::Select {
            data,
            kmin,
            kmax,
            mode,
            seed,
            restarts,
            format,
            out,
        } => {
            if kmin < 1 || kmax < kmin {
                return Err(LccaError::Domain(format!(
                    "invalid k range {kmin}..{kmax}"
                )));
            }
            let dataset = load_dataset_dir(&data)?;
            let config = EmConfig {
                seed,
                n_restarts: restarts,
                ..Default::default()
            };
            let (table, _) = select::sweep(&dataset, kmin..=kmax, mode.into(), &config)?;
            let best = select::select_best(&table, select::Criterion::Bic)?;
            std::fs::create_dir_all(&out)?;
            let (name, rendered) = match format {
                TableFormat::Csv => ("fit_statistics.csv", table.to_csv()),
                TableFormat::Markdown => ("fit_statistics.md", table.to_markdown()),
            };
            std::fs::write(out.join(name), rendered)?;
            std::fs::write(
                out.join("selection.json"),
                serde_json::to_string_pretty(&serde_json::json!({
                    "best_k": best,
                    "criterion": "bic",
                    "table": table,
                }))?,
            )?;
            write_manifest(&out, "select", Some(seed), &[name, "selection.json"])?;
            println!("best K by BIC: {best}");
            Ok(())
        }
        Command::Fit {
            data,
            k,
            covariates,
            seed,
            restarts,
            out,
        } => {
            let dataset = load_dataset_dir(&data)?;
            let mode = if covariates {
                MembershipMode::Covariate
            } else {
                MembershipMode::ConstantPrior
            };
            let config = EmConfig {
                seed,
                n_restarts: restarts,
                ..Default::default()
            };
            let fit = fit_em(&dataset, k, mode, &config)?;
            std::fs::create_dir_all(&out)?;
            let doc = ModelDocument::from_fit(&fit, &config);
            std::fs::write(out.join("model.json"), serde_json::to_string_pretty(&doc)?)?;
            write_manifest(&out, "fit", Some(seed), &["model.json"])?;
            eprintln!(
                "fit: k={k} loglik={:.4} aic={:.1} bic={:.1} converged={}",
                fit.loglik, fit.aic, fit.bic, fit.converged
            );
            Ok(())
        }
        Command::Profile {
            model,
            data,
            format,
            out,
        } => {
            let doc: ModelDocument = serde_json::from_str(&std::fs::read_to_string(&model)?)?;
            let dataset = load_dataset_dir(&data)?;
            let report = profile::build_report(&doc.model, &dataset, &doc.config)?;
            std::fs::create_dir_all(&out)?;

            let mut outputs: Vec<String> = Vec::new();
            let mut write = |name: &str, content: String| -> Result<(), LccaError> {
                std::fs::write(out.join(name), content)?;
                outputs.push(name.to_string());
                Ok(())
            };
            match format {
                TableFormat::Csv => {
                    write("conditional_probs.csv", report.conditional_probs.to_csv())?;
                    write("class_profiles.csv", profile::crosstabs_to_csv(&report.crosstabs))?;
                    if let Some(coefs) = &report.membership_coefs {
                        write("membership_coefs.csv", profile::membership_coefs_to_csv(coefs))?;
                    }
                }
                TableFormat::Markdown => {
                    write("conditional_probs.md", report.conditional_probs.to_markdown())?;
                    write(
                        "class_profiles.md",
                        profile::crosstabs_to_markdown(&report.crosstabs),
                    )?;
                    if let Some(coefs) = &report.membership_coefs {
                        write(
                            "membership_coefs.md",
                            profile::membership_coefs_to_markdown(coefs),
                        )?;
                    }
                }
            }
            let mut assignments = String::from("id,class\n");
            for (id, &label) in dataset.ids.iter().zip(&report.labels) {
                assignments.push_str(&format!("{id},{}\n", label + 1));
            }
            write("class_assignments.csv", assignments)?;
            write(
                "class_shares.json",
                serde_json::to_string_pretty(&report.class_shares)?,
            )?;
            let output_refs: Vec<&str> = outputs.iter().map(|s| s.as_str()).collect();
            write_manifest(&out, "profile", None, &output_refs)?;
            Ok(())
        }
        Command::Simulate {
            model,
            n,
            seed,
            weight,
            covariate_pool,
            out,
        } => {
            if n == 0 {
                return Err(LccaError::Domain("--n must be >= 1".into()));
            }
            let doc: ModelDocument = serde_json::from_str(&std::fs::read_to_string(&model)?)?;
            let pool = match &covariate_pool {
                Some(dir) => Some(load_dataset_dir(dir)?),
                None => None,
            };
            let source = match &pool {
                Some(p) => synth::CovariateSource::Bootstrap(p),
                None => synth::CovariateSource::None,
            };
            let (data, truth) = synth::simulate(
                &doc.model,
                &source,
                n,
                synth::WeightSpec::Constant { value: weight },
                seed,
            )?;
            std::fs::create_dir_all(&out)?;
            ingest::write_dataset(&data, &out.join("dataset.json"), &out.join("dataset.csv"))?;
            let mut sidecar = String::from("id,true_class\n");
            for (id, &class) in data.ids.iter().zip(&truth) {
                sidecar.push_str(&format!("{id},{}\n", class + 1));
            }
            std::fs::write(out.join("truth_labels.csv"), sidecar)?;
            write_manifest(
                &out,
                "simulate",
                Some(seed),
                &["dataset.json", "dataset.csv", "truth_labels.csv"],
            )?;
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
