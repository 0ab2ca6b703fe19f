use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use survey_ml::classifiers::Algorithm;
use survey_ml::config::{parse_config_unchecked, Overrides, PipelineConfig, Task};
use survey_ml::data_model::Schema;
use survey_ml::fixtures::{anemia_schema, malaria_schema};
use survey_ml::pipeline::{emit_report, load_schema, run_pipeline, PipelineError, Stage};
use survey_ml::synthgen::{generate_csv, planted_schema, SignalSpec};
use survey_ml::Error;

/// Exit codes. Usage errors exit with 2 (clap's convention); pipeline
/// failures get one code per stage.
fn exit_code(stage: Stage) -> u8 {
    match stage {
        Stage::Config => 10,
        Stage::Schema => 11,
        Stage::Ingest => 12,
        Stage::SparseDrop => 13,
        Stage::RowDrop => 14,
        Stage::Encode => 15,
        Stage::Label => 16,
        Stage::Correlation => 17,
        Stage::Rfe => 18,
        Stage::Pca => 19,
        Stage::Evaluate => 20,
        Stage::Report => 21,
    }
}

const OUT_DIR_ENV: &str = "SURVEY_ML_OUT_DIR";

#[derive(Parser)]
#[command(name = "survey-ml", version, about = "Survey-based binary classification pipeline")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full pipeline and write a JSON report.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_parser = parse_task)]
        task: Option<Task>,
        /// Report path (default: $SURVEY_ML_OUT_DIR/report.json, else ./report.json).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Only run these algorithms (knn, rf, svm, nb); repeatable.
        #[arg(long = "algorithm", value_parser = parse_algorithm)]
        algorithms: Vec<Algorithm>,
        #[arg(long, env = OUT_DIR_ENV, hide_env_values = true)]
        out_dir: Option<PathBuf>,
    },
    /// Generate a synthetic table as CSV.
    Synth {
        /// Schema file; otherwise the bundled schema of --task, or the
        /// planted schema with --columns.
        #[arg(long, conflicts_with_all = ["task", "columns"])]
        schema: Option<PathBuf>,
        #[arg(long, value_parser = parse_task, conflicts_with = "columns")]
        task: Option<Task>,
        #[arg(long)]
        columns: Option<usize>,
        #[arg(long)]
        rows: usize,
        #[arg(long)]
        seed: u64,
        /// Informative column, optionally weighted: `name` or `name=weight`.
        #[arg(long = "informative", required = true)]
        informative: Vec<String>,
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
        #[arg(long, default_value_t = 0.0)]
        missing: f64,
        /// Output file (default: stdout).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a config or schema file without running anything.
    Validate {
        #[arg(long, required_unless_present = "schema")]
        config: Option<PathBuf>,
        #[arg(long)]
        schema: Option<PathBuf>,
    },
    /// Write the bundled survey schemas and reproduction-profile configs.
    Fixtures {
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
}

fn parse_task(s: &str) -> Result<Task, String> {
    Task::parse(s).ok_or_else(|| format!("unknown task `{s}` (anemia, malaria, custom)"))
}

fn parse_algorithm(s: &str) -> Result<Algorithm, String> {
    Algorithm::parse(s).ok_or_else(|| format!("unknown algorithm `{s}` (knn, rf, svm, nb)"))
}

struct Failure {
    code: u8,
    message: String,
}

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Self {
        Failure {
            code: exit_code(e.stage),
            message: e.to_string(),
        }
    }
}

fn fail(stage: Stage, error: Error) -> Failure {
    PipelineError { stage, error }.into()
}

fn io_error(path: &Path, e: std::io::Error) -> Error {
    Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

fn read(path: &Path) -> Result<String, Error> {
    std::fs::read_to_string(path).map_err(|e| io_error(path, e))
}

fn write(path: &Path, text: &str) -> Result<(), Error> {
    std::fs::write(path, text).map_err(|e| io_error(path, e))
}

/// Relative schema and CSV paths are taken relative to the config file.
fn resolve_paths(config: &mut PipelineConfig, config_path: &Path) {
    let base = config_path.parent().unwrap_or(Path::new(""));
    let fix = |p: &mut Option<String>| {
        if let Some(s) = p {
            if !s.trim().is_empty() && Path::new(s.as_str()).is_relative() {
                *s = base.join(s.as_str()).display().to_string();
            }
        }
    };
    fix(&mut config.schema);
    fix(&mut config.input.csv);
}

fn load_config(path: &Path) -> Result<PipelineConfig, Failure> {
    let text = read(path).map_err(|e| fail(Stage::Config, e))?;
    let mut config = parse_config_unchecked(&text).map_err(|e| fail(Stage::Config, e))?;
    resolve_paths(&mut config, path);
    Ok(config)
}

fn run(
    config_path: &Path,
    overrides: Overrides,
    out_dir: Option<PathBuf>,
) -> Result<(), Failure> {
    let mut config = load_config(config_path)?;
    config.apply(&overrides);
    let report = run_pipeline(&config)?;
    let out = config
        .output
        .as_ref()
        .map(PathBuf::from)
        .unwrap_or_else(|| out_dir.unwrap_or_default().join("report.json"));
    emit_report(&report, &out).map_err(|e| fail(Stage::Report, e))?;

    println!("task: {}   rows: {}   features: {}", report.task, report.rows, report.features.len());
    println!("split: {}", report.split.description);
    for e in &report.algorithms {
        match (&e.accuracy_percent, &e.error) {
            (Some(acc), _) => println!("  {:<14} {acc:>8}", e.display_name),
            (None, Some(err)) => println!("  {:<14} failed: {err}", e.display_name),
            (None, None) => {}
        }
    }
    println!("report written to {}", out.display());
    Ok(())
}

fn synth_schema(schema: Option<PathBuf>, task: Option<Task>, columns: Option<usize>) -> Result<Schema, Error> {
    match (schema, task, columns) {
        (Some(path), _, _) => Schema::from_toml_validated(&read(&path)?),
        (None, _, Some(d)) => Ok(planted_schema(d)),
        (None, Some(Task::Anemia), None) => Ok(anemia_schema()),
        (None, Some(Task::Malaria), None) => Ok(malaria_schema()),
        _ => Err(Error::Config(
            "give --schema, --columns, or --task anemia|malaria".into(),
        )),
    }
}

fn parse_informative(items: &[String]) -> Result<Vec<(String, f64)>, Error> {
    items
        .iter()
        .map(|item| match item.rsplit_once('=') {
            Some((name, w)) => w
                .trim()
                .parse::<f64>()
                .map(|w| (name.to_string(), w))
                .map_err(|_| Error::Config(format!("bad weight in `{item}`"))),
            None => Ok((item.clone(), 1.0)),
        })
        .collect()
}

fn fixtures(out_dir: &Path) -> Result<(), Error> {
    std::fs::create_dir_all(out_dir).map_err(|e| io_error(out_dir, e))?;
    for (task, schema) in [(Task::Anemia, anemia_schema()), (Task::Malaria, malaria_schema())] {
        let key = task.key();
        let schema_file = format!("{key}_schema.toml");
        write(&out_dir.join(&schema_file), &schema.to_toml())?;

        let mut config = PipelineConfig::reproduction(task, 1);
        config.schema = Some(schema_file);
        config.input.csv = Some(format!("{key}.csv"));
        config.output = Some(format!("{key}_report.json"));
        write(&out_dir.join(format!("{key}_reproduction.toml")), &config.to_toml())?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run {
            config,
            task,
            out,
            seed,
            algorithms,
            out_dir,
        } => run(
            &config,
            Overrides {
                task,
                seed,
                output: out.map(|p| p.display().to_string()),
                algorithms,
            },
            out_dir,
        ),
        Command::Synth {
            schema,
            task,
            columns,
            rows,
            seed,
            informative,
            noise,
            missing,
            out,
        } => (|| {
            let schema = synth_schema(schema, task, columns)?;
            let spec = SignalSpec::new(parse_informative(&informative)?)
                .with_noise(noise)
                .with_missing(missing);
            let csv = generate_csv(&schema, rows, &spec, seed)?;
            match out {
                Some(path) => write(&path, &csv),
                None => {
                    print!("{csv}");
                    Ok(())
                }
            }
        })()
        .map_err(|e| Failure {
            code: 1,
            message: e.to_string(),
        }),
        Command::Validate { config, schema } => (|| {
            if let Some(path) = schema {
                Schema::from_toml_validated(&read(&path).map_err(|e| fail(Stage::Schema, e))?)
                    .map_err(|e| fail(Stage::Schema, e))?;
                println!("schema ok: {}", path.display());
            }
            if let Some(path) = config {
                let c = load_config(&path)?;
                c.validate().map_err(|e| fail(Stage::Config, e))?;
                load_schema(&c).map_err(|e| fail(Stage::Schema, e))?;
                println!("config ok: {}", path.display());
            }
            Ok(())
        })(),
        Command::Fixtures { out_dir } => fixtures(&out_dir).map_err(|e| Failure {
            code: 1,
            message: e.to_string(),
        }),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
