use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use ats_core::{
    compute_course_metrics, generate_streams, run_replay, verify_against_oracle, AnalyzerMode,
    CourseModel, Engine, FeedbackCatalog, FileStore, LearnerReport, ReplayReport, Scenario,
    ThresholdConfig, TutorBackend,
};
use ats_service::{HttpBackend, ServiceConfig};
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "ats", version, about = "Affective tutoring engine tools")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write synthetic clip streams for a scenario.
    Generate {
        /// Course fixture; defaults to the bundled course.
        #[arg(long)]
        fixture: Option<PathBuf>,
        /// Scenario file; defaults to the built-in demo cohort.
        #[arg(long)]
        scenario: Option<PathBuf>,
        /// Seed for the demo cohort.
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Replay clip streams through the engine or a running service.
    Replay {
        #[arg(long)]
        streams: PathBuf,
        #[arg(long)]
        fixture: Option<PathBuf>,
        /// Threshold TOML for in-process replays.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        lenient: bool,
        /// Base URL of a running service, e.g. http://127.0.0.1:8080
        #[arg(long)]
        server: Option<String>,
        #[arg(long, env = "ADMIN_TOKEN", default_value = "admin")]
        admin_token: String,
        /// Directory for report.json, report.csv, report.txt and metrics.csv.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Cross-check the aggregator and classifier against independent oracles.
    Verify {
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Analyzer reports from a service event log.
    Report {
        /// Event log written by the service (its storage_path).
        #[arg(long)]
        store: PathBuf,
        #[arg(long)]
        learner: Option<String>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Run the HTTP service.
    Serve {
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Csv,
    Json,
}

fn load_course(fixture: Option<&Path>) -> Result<CourseModel> {
    match fixture {
        Some(p) => CourseModel::load(p).with_context(|| format!("loading fixture {}", p.display())),
        None => Ok(CourseModel::canonical()),
    }
}

fn load_thresholds(config: Option<&Path>) -> Result<ThresholdConfig> {
    match config {
        Some(p) => {
            ThresholdConfig::load(p).with_context(|| format!("loading thresholds {}", p.display()))
        }
        None => Ok(ThresholdConfig::default()),
    }
}

fn write_report(report: &ReplayReport, out: &Path) -> Result<()> {
    std::fs::create_dir_all(out)?;
    std::fs::write(out.join("report.json"), report.to_json()?)?;
    std::fs::write(out.join("report.csv"), report.to_csv())?;
    std::fs::write(out.join("report.txt"), report.render_text())?;
    std::fs::write(out.join("metrics.csv"), report.metrics.to_csv())?;
    Ok(())
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Generate {
            fixture,
            scenario,
            seed,
            out,
        } => {
            let course = load_course(fixture.as_deref())?;
            let scenario = match scenario {
                Some(p) => Scenario::load(&p)?,
                None => Scenario::demo(&course, seed),
            };
            let s = generate_streams(&scenario, &course, &out)?;
            println!(
                "wrote {} clips for {} lessons of {} learners to {}",
                s.clips,
                s.lessons,
                s.learners,
                out.display()
            );
        }
        Command::Replay {
            streams,
            fixture,
            config,
            lenient,
            server,
            admin_token,
            out,
        } => {
            let course = load_course(fixture.as_deref())?;
            let backend: Box<dyn TutorBackend> = match server {
                Some(url) => {
                    if config.is_some() || lenient {
                        bail!("--config and --lenient apply to in-process replays; configure the server instead");
                    }
                    Box::new(HttpBackend::new(&url, &admin_token)?)
                }
                None => {
                    let mode = if lenient {
                        AnalyzerMode::Lenient
                    } else {
                        AnalyzerMode::Strict
                    };
                    let engine = Engine::open(
                        Arc::new(ats_core::MemoryStore::new()),
                        load_thresholds(config.as_deref())?,
                        FeedbackCatalog::default(),
                    )?;
                    Box::new(engine.with_mode(mode))
                }
            };
            let report = run_replay(&streams, &course, backend.as_ref())?;
            match out {
                Some(dir) => {
                    write_report(&report, &dir)?;
                    println!(
                        "replayed {} clips; reports in {}",
                        report.clip_count(),
                        dir.display()
                    );
                }
                None => print!("{}", report.render_text()),
            }
        }
        Command::Verify {
            trials,
            seed,
            config,
        } => {
            let cfg = load_thresholds(config.as_deref())?;
            let summary = verify_against_oracle(trials, seed, &cfg)?;
            println!("{summary}");
            return Ok(summary.passed());
        }
        Command::Report {
            store,
            learner,
            format,
        } => {
            if !store.is_file() {
                bail!("no event log at {}", store.display());
            }
            let engine = Engine::open(
                Arc::new(FileStore::open(&store)?),
                ThresholdConfig::default(),
                FeedbackCatalog::default(),
            )?;
            let ids = match learner {
                Some(id) => vec![id],
                None => engine.learner_ids()?,
            };
            let mut reports = Vec::new();
            for id in &ids {
                let rec = engine.learner(id)?;
                let course = engine.course(&rec.course_id)?;
                reports.push(LearnerReport::build(&course, &rec));
            }
            match format {
                Format::Json => println!("{}", serde_json::to_string_pretty(&reports)?),
                Format::Csv => {
                    for (i, r) in reports.iter().enumerate() {
                        let csv = r.to_csv();
                        // one header for the whole table
                        let body = if i == 0 {
                            csv.as_str()
                        } else {
                            csv.split_once('\n').map_or("", |x| x.1)
                        };
                        print!("{body}");
                    }
                }
                Format::Text => {
                    for r in &reports {
                        println!("{}", r.render_text());
                    }
                    for course_id in engine.course_ids()? {
                        let course = engine.course(&course_id)?;
                        let records: Vec<_> = engine
                            .learners()?
                            .into_iter()
                            .filter(|r| r.course_id == course_id)
                            .collect();
                        let grouping: BTreeMap<String, String> = records
                            .iter()
                            .map(|r| (r.learner_id.clone(), r.cognitive_style.to_string()))
                            .collect();
                        if records.is_empty() {
                            continue;
                        }
                        println!("Course {course_id}");
                        print!(
                            "{}",
                            compute_course_metrics(&course, &records, &grouping)?.render_text()
                        );
                    }
                }
            }
        }
        Command::Serve { config } => {
            let cfg = match config {
                Some(p) => ServiceConfig::load(&p)?,
                None => ServiceConfig::default(),
            }
            .with_env()?;
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(ats_service::serve(&cfg))?;
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::from_default_env())
        .with_writer(std::io::stderr)
        .init();
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
