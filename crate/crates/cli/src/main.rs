//! Command-line front end: train, predict, explain, evaluate, tune, ablate,
//! generate and export-af.

mod error;

use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use argcbr::aacbr::{explain_with, predict};
use argcbr::af::to_dot;
use argcbr::characterisation::AttributeVocabulary;
use argcbr::evaluate::{ablate, evaluate, random_search, SearchSpace, Toggle, DEFAULT_BUDGET};
use argcbr::io::{
    emit_scenes, generate_synthetic, load_bundle, parse_scenes, presets, save_bundle, CaseFile,
    RuleSet, DEFAULT_MAX_OBJECTS,
};
use argcbr::multiclass::{train_tournament, Opponent, TournamentConfig, TrainedTournament};
use argcbr::scene::{ClassLabel, SceneRecord};
use clap::{ArgAction, Args, Parser, Subcommand};
use serde_json::json;

use error::{Category, CliError};

#[derive(Parser)]
#[command(
    name = "argcbr",
    version,
    about = "Argumentative case-based scene classification"
)]
struct Cli {
    /// Worker threads for batch prediction and search (default: all cores).
    #[arg(long, global = true, env = "ARGCBR_THREADS")]
    threads: Option<usize>,
    /// Only print errors.
    #[arg(short, long, global = true, conflicts_with = "verbose")]
    quiet: bool,
    /// More logging; repeat for debug output.
    #[arg(short, long, global = true, action = ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct ConfigSource {
    /// Tournament configuration (JSON).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Shipped configuration: hans3 or hans7.
    #[arg(long)]
    preset: Option<String>,
}

#[derive(Args)]
struct SceneSelector {
    /// Line-delimited JSON scenes.
    #[arg(long)]
    scenes: PathBuf,
    /// Scene to use (default: the first one).
    #[arg(long)]
    image_id: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Train a tournament and write a model bundle.
    Train {
        #[command(flatten)]
        source: ConfigSource,
        /// Labelled training scenes.
        #[arg(long)]
        scenes: PathBuf,
        /// Bundle to write.
        #[arg(long)]
        out: PathBuf,
        /// Overrides every clustering seed (model i gets seed + 1000 i).
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Predict a label per scene, one JSON object per line.
    Predict {
        #[arg(long)]
        bundle: PathBuf,
        #[arg(long)]
        scenes: PathBuf,
        /// Output file (default: stdout).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Narrate how a scene, or a single casebase query, was decided.
    Explain {
        #[arg(long, required_unless_present = "case_file", requires = "scenes")]
        bundle: Option<PathBuf>,
        /// Line-delimited JSON scenes.
        #[arg(long)]
        scenes: Option<PathBuf>,
        /// Scene to explain (default: the first one).
        #[arg(long)]
        image_id: Option<String>,
        /// A raw casebase plus query instead of a bundle.
        #[arg(long, conflicts_with_all = ["bundle", "scenes", "image_id"])]
        case_file: Option<PathBuf>,
        /// Directory for one DOT file per consulted model.
        #[arg(long)]
        dot_dir: Option<PathBuf>,
    },
    /// Score a bundle on labelled scenes.
    Evaluate {
        #[arg(long)]
        bundle: PathBuf,
        #[arg(long)]
        scenes: PathBuf,
        /// Print metrics as JSON instead of a table.
        #[arg(long)]
        json: bool,
    },
    /// Random search over tournament configurations.
    Tune {
        /// Search space (JSON); default derives one from the training labels.
        #[arg(long)]
        space: Option<PathBuf>,
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        validation: PathBuf,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Add the side slot to the default vocabulary.
        #[arg(long, conflicts_with = "space")]
        side: bool,
        /// Best configuration (default: stdout).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Trial log, one JSON record per line.
        #[arg(long)]
        log: Option<PathBuf>,
    },
    /// Train and test a configuration with components switched off.
    Ablate {
        #[command(flatten)]
        source: ConfigSource,
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        test: PathBuf,
        /// Component to switch off; repeatable (default: all three).
        #[arg(long = "toggle", value_name = "TOGGLE")]
        toggles: Vec<Toggle>,
        #[arg(long, value_delimiter = ',', default_value = "0,1,2,3,4")]
        seeds: Vec<u64>,
        /// Full report as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate synthetic scenes from planted rules.
    Generate {
        /// Rule set (JSON).
        #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
        rules: Option<PathBuf>,
        /// Shipped rule set: hans3 or hans7.
        #[arg(long)]
        preset: Option<String>,
        #[arg(long, default_value_t = 100)]
        per_class: usize,
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Drop the confounder, e.g. for test splits.
        #[arg(long)]
        no_confounder: bool,
        /// Output file (default: stdout).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the framework one model mined for a scene as DOT.
    ExportAf {
        #[arg(long, required_unless_present = "case_file", requires = "scenes")]
        bundle: Option<PathBuf>,
        #[arg(long)]
        scenes: Option<PathBuf>,
        #[arg(long)]
        image_id: Option<String>,
        /// Model index in the chain.
        #[arg(long, default_value_t = 0)]
        model: usize,
        #[arg(long, conflicts_with_all = ["bundle", "scenes", "image_id"])]
        case_file: Option<PathBuf>,
        /// Output file (default: stdout).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn open(path: &Path) -> Result<BufReader<File>, CliError> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| CliError::new(Category::Io, format!("{}: {e}", path.display())))
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::new(Category::Io, format!("{}: {e}", path.display())))
}

fn sink(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(create(p)?),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn io_err(e: io::Error) -> CliError {
    CliError::new(Category::Io, e.to_string())
}

fn read_scenes(path: &Path, vocab: &AttributeVocabulary) -> Result<Vec<SceneRecord>, CliError> {
    parse_scenes(open(path)?, vocab, DEFAULT_MAX_OBJECTS)
        .map_err(|e| CliError::new(Category::Parse, format!("{}: {e}", path.display())))
}

fn pick_scene(scenes: Vec<SceneRecord>, id: Option<&str>) -> Result<SceneRecord, CliError> {
    match id {
        Some(id) => scenes
            .into_iter()
            .find(|s| s.image_id == id)
            .ok_or_else(|| {
                CliError::new(Category::Usage, format!("no scene with image_id {id:?}"))
            }),
        None => scenes
            .into_iter()
            .next()
            .ok_or_else(|| CliError::new(Category::Usage, "the scene file is empty")),
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    serde_json::from_reader(open(path)?)
        .map_err(|e| CliError::new(Category::Config, format!("{}: {e}", path.display())))
}

fn load_config(source: &ConfigSource) -> Result<TournamentConfig, CliError> {
    let config = match (&source.config, &source.preset) {
        (Some(path), _) => read_json(path)?,
        (None, Some(name)) => presets::config(name).ok_or_else(|| {
            CliError::new(
                Category::Usage,
                format!("unknown preset {name:?} (expected hans3 or hans7)"),
            )
        })?,
        (None, None) => unreachable!("clap requires one source"),
    };
    config
        .validate()
        .map_err(|e| CliError::new(Category::Config, e.to_string()))?;
    Ok(config)
}

fn read_bundle(path: &Path) -> Result<TrainedTournament, CliError> {
    load_bundle(open(path)?)
        .map_err(|e| CliError::new(Category::Bundle, format!("{}: {e}", path.display())))
}

fn read_case_file(path: &Path) -> Result<CaseFile, CliError> {
    CaseFile::read(open(path)?)
        .map_err(|e| CliError::new(Category::Parse, format!("{}: {e}", path.display())))
}

fn opponent_name(o: Opponent) -> String {
    match o {
        Opponent::Rest => "rest".into(),
        Opponent::Class(c) => format!("class {c}"),
    }
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Train {
            source,
            scenes,
            out,
            seed,
        } => {
            let mut config = load_config(&source)?;
            if let Some(seed) = seed {
                config = config.with_seed(seed);
            }
            let scenes = read_scenes(&scenes, &config.vocabulary)?;
            let trained = train_tournament(&config, &scenes)
                .map_err(|e| CliError::new(Category::Training, e.to_string()))?;
            for (i, m) in trained.models().iter().enumerate() {
                log::info!("model {i}: {} cases", m.casebase.len());
            }
            let mut w = create(&out)?;
            save_bundle(&mut w, &trained)
                .map_err(|e| CliError::new(Category::Bundle, e.to_string()))?;
            w.flush().map_err(io_err)
        }
        Command::Predict {
            bundle,
            scenes,
            out,
        } => {
            let trained = read_bundle(&bundle)?;
            let scenes = read_scenes(&scenes, &trained.config().vocabulary)?;
            let labels = trained
                .predict_batch(&scenes)
                .map_err(|e| CliError::new(Category::Prediction, e.to_string()))?;
            let mut w = sink(out.as_deref())?;
            for (s, label) in scenes.iter().zip(labels) {
                writeln!(w, "{}", json!({"image_id": s.image_id, "label": label}))
                    .map_err(io_err)?;
            }
            w.flush().map_err(io_err)
        }
        Command::Explain {
            bundle,
            scenes,
            image_id,
            case_file,
            dot_dir,
        } => {
            if let Some(dir) = &dot_dir {
                fs::create_dir_all(dir)
                    .map_err(|e| CliError::new(Category::Io, format!("{}: {e}", dir.display())))?;
            }
            let mut out = io::stdout().lock();
            if let Some(path) = case_file {
                let file = read_case_file(&path)?;
                let pred = predict(&file.casebase, &file.query, file.use_supports)
                    .map_err(|e| CliError::new(Category::Prediction, e.to_string()))?;
                let explanation = explain_with(&pred, &file.outcome_names());
                write!(out, "{}", explanation.text).map_err(io_err)?;
                if let Some(dir) = &dot_dir {
                    fs::write(
                        dir.join("casebase.dot"),
                        to_dot(pred.effective_framework(), &pred.grounded),
                    )
                    .map_err(io_err)?;
                }
                return Ok(());
            }
            let trained = read_bundle(&bundle.expect("clap requires a bundle"))?;
            let scenes = read_scenes(
                &scenes.expect("clap requires scenes"),
                &trained.config().vocabulary,
            )?;
            let scene = pick_scene(scenes, image_id.as_deref())?;
            let (label, verdicts) = trained
                .explain(&scene)
                .map_err(|e| CliError::new(Category::Prediction, e.to_string()))?;
            for v in &verdicts {
                let cfg = &trained.models()[v.model].config;
                writeln!(
                    out,
                    "Model {} (class {} vs {}): {}",
                    v.model + 1,
                    cfg.focus,
                    opponent_name(cfg.opponent),
                    cfg.side_name(v.side)
                )
                .map_err(io_err)?;
                write!(out, "{}", v.explanation.text).map_err(io_err)?;
                if let Some(dir) = &dot_dir {
                    fs::write(dir.join(format!("model{}.dot", v.model + 1)), &v.dot)
                        .map_err(io_err)?;
                }
            }
            writeln!(
                out,
                "Scene {} is predicted as class {label}.",
                scene.image_id
            )
            .map_err(io_err)
        }
        Command::Evaluate {
            bundle,
            scenes,
            json,
        } => {
            let trained = read_bundle(&bundle)?;
            let scenes = read_scenes(&scenes, &trained.config().vocabulary)?;
            let metrics = evaluate(&trained, &scenes)
                .map_err(|e| CliError::new(Category::Evaluation, e.to_string()))?;
            if json {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&metrics).expect("metrics serialise")
                );
            } else {
                print!("{}", metrics.table());
            }
            Ok(())
        }
        Command::Tune {
            space,
            train,
            validation,
            budget,
            seed,
            side,
            out,
            log,
        } => {
            let (space, train) = match space {
                Some(path) => {
                    let space: SearchSpace = read_json(&path)?;
                    let train = read_scenes(&train, &space.vocabulary)?;
                    (space, train)
                }
                None => {
                    let mut vocab = AttributeVocabulary::clevr();
                    if side {
                        vocab = vocab.with_side();
                    }
                    let train = read_scenes(&train, &vocab)?;
                    let mut classes: Vec<ClassLabel> =
                        train.iter().filter_map(|s| s.class_label).collect();
                    classes.sort();
                    classes.dedup();
                    (SearchSpace::for_classes(classes, vocab), train)
                }
            };
            let validation = read_scenes(&validation, &space.vocabulary)?;
            let outcome = random_search(&space, budget, seed, &train, &validation)
                .map_err(|e| CliError::new(Category::Evaluation, e.to_string()))?;
            if let Some(path) = log {
                let mut w = create(&path)?;
                for t in &outcome.trials {
                    writeln!(w, "{}", serde_json::to_string(t).expect("trial serialises"))
                        .map_err(io_err)?;
                }
                w.flush().map_err(io_err)?;
            }
            log::info!("best trial {}: {}", outcome.best_trial, outcome.metrics);
            let mut w = sink(out.as_deref())?;
            writeln!(
                w,
                "{}",
                serde_json::to_string_pretty(&outcome.best).expect("config serialises")
            )
            .map_err(io_err)?;
            w.flush().map_err(io_err)?;
            if out.is_some() {
                println!("best trial {}: {}", outcome.best_trial, outcome.metrics);
            }
            Ok(())
        }
        Command::Ablate {
            source,
            train,
            test,
            toggles,
            seeds,
            out,
        } => {
            let config = load_config(&source)?;
            let train = read_scenes(&train, &config.vocabulary)?;
            let test = read_scenes(&test, &config.vocabulary)?;
            let toggles = if toggles.is_empty() {
                Toggle::ALL.to_vec()
            } else {
                toggles
            };
            let report = ablate(&config, &toggles, &train, &test, &seeds)
                .map_err(|e| CliError::new(Category::Evaluation, e.to_string()))?;
            print!("{}", report.table());
            if let Some(path) = out {
                let mut w = create(&path)?;
                serde_json::to_writer_pretty(&mut w, &report).expect("report serialises");
                w.flush().map_err(io_err)?;
            }
            Ok(())
        }
        Command::Generate {
            rules,
            preset,
            per_class,
            noise,
            seed,
            no_confounder,
            out,
        } => {
            let mut rules: RuleSet = match (rules, preset) {
                (Some(path), _) => read_json(&path)?,
                (None, Some(name)) => presets::rules(&name).ok_or_else(|| {
                    CliError::new(
                        Category::Usage,
                        format!("unknown preset {name:?} (expected hans3 or hans7)"),
                    )
                })?,
                (None, None) => unreachable!("clap requires one source"),
            };
            if no_confounder {
                rules = rules.without_confounder();
            }
            let scenes = generate_synthetic(&rules, per_class, noise, seed)
                .map_err(|e| CliError::new(Category::Config, e.to_string()))?;
            let mut w = sink(out.as_deref())?;
            emit_scenes(&mut w, &scenes).map_err(io_err)
        }
        Command::ExportAf {
            bundle,
            scenes,
            image_id,
            model,
            case_file,
            out,
        } => {
            let dot = if let Some(path) = case_file {
                let file = read_case_file(&path)?;
                let pred = predict(&file.casebase, &file.query, file.use_supports)
                    .map_err(|e| CliError::new(Category::Prediction, e.to_string()))?;
                to_dot(pred.effective_framework(), &pred.grounded)
            } else {
                let trained = read_bundle(&bundle.expect("clap requires a bundle"))?;
                let scenes = read_scenes(
                    &scenes.expect("clap requires scenes"),
                    &trained.config().vocabulary,
                )?;
                let scene = pick_scene(scenes, image_id.as_deref())?;
                let m = trained.models().get(model).ok_or_else(|| {
                    CliError::new(
                        Category::Usage,
                        format!(
                            "model {model} does not exist (the chain has {})",
                            trained.models().len()
                        ),
                    )
                })?;
                let x = m
                    .characterise(&scene)
                    .map_err(|e| CliError::new(Category::Prediction, e.to_string()))?;
                let pred = predict(&m.casebase, &x, m.config.use_supports)
                    .map_err(|e| CliError::new(Category::Prediction, e.to_string()))?;
                to_dot(pred.effective_framework(), &pred.grounded)
            };
            let mut w = sink(out.as_deref())?;
            w.write_all(dot.as_bytes()).map_err(io_err)?;
            w.flush().map_err(io_err)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let first = e.to_string();
            let first = first
                .lines()
                .next()
                .unwrap_or("invalid arguments")
                .trim_start_matches("error: ");
            return CliError::new(Category::Usage, first).report();
        }
    };
    let level = match (cli.quiet, cli.verbose) {
        (true, _) => log::LevelFilter::Error,
        (false, 0) => log::LevelFilter::Warn,
        (false, 1) => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new()
        .filter_level(level)
        .format_timestamp(None)
        .init();

    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            return CliError::new(Category::Usage, format!("cannot set up {n} threads: {e}"))
                .report();
        }
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => e.report(),
    }
}
