//! `prosody`: batch annotation, model training, evaluation and contour-based
//! language identification.
//!
//! Exit status is 0 on success, 1 when an input or processing error was
//! reported and 2 on an internal failure.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, ensure, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use prosody_core::audio::load_audio;
use prosody_core::document::{read_lab, read_textgrid, write_lab, write_textgrid, AnnotationDocument, Interval};
use prosody_core::eval::{evaluate_breaks, evaluate_pitch_labels, evaluate_segmentation, pool_segmentation};
use prosody_core::langid::{build_frequency_table, classify_word, parse_word_labels, score_word, ContourFrequencyTable};
use prosody_core::phones::{Inventory, PhoneMapping};
use prosody_core::pipeline::{train_models, TrainingUtterance};
use prosody_core::{Annotator, Config, ModelSet, Transcription};
use rayon::prelude::*;

const MODELS_FILE: &str = "models.json";

#[derive(Parser)]
#[command(name = "prosody", version, about = "Prosody annotation of speech recordings")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Align and label recordings, writing TextGrid and/or lab files.
    Annotate(AnnotateArgs),
    /// Train alignment models from a corpus with a hand-labelled subset.
    Train(TrainArgs),
    /// Compare annotations against references and write a JSON report.
    Evaluate(EvaluateArgs),
    /// Contour frequency tables for language identification.
    #[command(subcommand)]
    Langid(LangidCommand),
}

#[derive(Args)]
struct AnnotateArgs {
    /// A WAV file, or a directory of them.
    #[arg(long)]
    wav: PathBuf,
    /// A transcription file, or a directory holding `<name>.txt` per WAV.
    #[arg(long)]
    text: PathBuf,
    /// Language id; defaults to the transcription's `#lang` line.
    #[arg(long)]
    lang: Option<String>,
    /// Directory containing models.json, or the model file itself.
    #[arg(long)]
    models: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    textgrid: bool,
    /// Also write the phone tier as a lab file. Without either flag only
    /// the TextGrid is written.
    #[arg(long)]
    lab: bool,
    #[arg(long)]
    config: Option<PathBuf>,
    /// Worker threads; defaults to one per core.
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Args)]
struct TrainArgs {
    /// Directory of `<name>.wav` with `<name>.txt` transcriptions.
    #[arg(long)]
    corpus: PathBuf,
    /// Directory of `<name>.lab` phone labels for the seed subset.
    #[arg(long)]
    seed_labels: PathBuf,
    #[arg(long)]
    inventory: PathBuf,
    /// Language phone to shared phone table.
    #[arg(long)]
    mapping: Option<PathBuf>,
    /// Refinement passes; overrides the config value.
    #[arg(long)]
    iterations: Option<usize>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Tier {
    Phones,
    Breaks,
    Pitch,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long, value_enum)]
    tier: Tier,
    /// Directory of hypothesis TextGrid (or, for phones, lab) files.
    #[arg(long)]
    hyp: PathBuf,
    /// Directory of reference files with matching names.
    #[arg(long = "ref")]
    reference: PathBuf,
    #[arg(long)]
    report: PathBuf,
}

#[derive(Subcommand)]
enum LangidCommand {
    /// Build a frequency table from TextGrids and word-label files.
    BuildTable {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        lang: String,
        #[arg(long)]
        out: PathBuf,
        /// Smoothing constant; defaults to the config value.
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Score each word against every table in a directory.
    Classify {
        #[arg(long)]
        tables: PathBuf,
        /// `word<TAB>label label ...` per line.
        #[arg(long)]
        word_labels: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match std::panic::catch_unwind(|| run(cli)) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(_) => ExitCode::from(2),
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Annotate(a) => annotate(a),
        Command::Train(a) => train(a),
        Command::Evaluate(a) => evaluate(a),
        Command::Langid(LangidCommand::BuildTable {
            corpus,
            lang,
            out,
            epsilon,
            config,
        }) => build_table(&corpus, &lang, &out, epsilon, config.as_deref()),
        Command::Langid(LangidCommand::Classify { tables, word_labels }) => classify(&tables, &word_labels),
    }
}

fn load_config(path: Option<&Path>) -> Result<Config> {
    Ok(match path {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    })
}

fn thread_pool(jobs: Option<usize>) -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = jobs {
        ensure!(n > 0, "--jobs must be at least 1");
        builder = builder.num_threads(n);
    }
    builder.build().context("starting worker threads")
}

fn stem(path: &Path) -> Result<String> {
    path.file_stem()
        .and_then(|s| s.to_str())
        .map(str::to_owned)
        .with_context(|| format!("{}: file name is not valid UTF-8", path.display()))
}

fn has_extension(path: &Path, ext: &str) -> bool {
    path.extension().and_then(|e| e.to_str()).is_some_and(|e| e.eq_ignore_ascii_case(ext))
}

/// Files in `dir` with extension `ext`, sorted by name.
fn list_files(dir: &Path, ext: &str) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for entry in fs::read_dir(dir).with_context(|| format!("reading {}", dir.display()))? {
        let path = entry.with_context(|| format!("reading {}", dir.display()))?.path();
        if path.is_file() && has_extension(&path, ext) {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

/// `(wav, transcription)` pairs from either two files or two directories.
fn annotation_inputs(wav: &Path, text: &Path) -> Result<Vec<(PathBuf, PathBuf)>> {
    if !wav.is_dir() {
        ensure!(!text.is_dir(), "--wav is a file, so --text must be a file too");
        return Ok(vec![(wav.to_owned(), text.to_owned())]);
    }
    ensure!(text.is_dir(), "--wav is a directory, so --text must be one too");
    let wavs = list_files(wav, "wav")?;
    ensure!(!wavs.is_empty(), "no .wav files in {}", wav.display());
    wavs.into_iter()
        .map(|w| {
            let t = text.join(format!("{}.txt", stem(&w)?));
            Ok((w, t))
        })
        .collect()
}

fn annotate(args: AnnotateArgs) -> Result<()> {
    let config = load_config(args.config.as_deref())?;
    let model_path = if args.models.is_dir() {
        args.models.join(MODELS_FILE)
    } else {
        args.models.clone()
    };
    let models = ModelSet::load(&model_path)?;
    let annotator = Annotator::new(models, config);
    let inputs = annotation_inputs(&args.wav, &args.text)?;
    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    let write_textgrid_file = args.textgrid || !args.lab;

    let one = |wav: &Path, text: &Path| -> Result<()> {
        let name = stem(wav)?;
        let transcription = Transcription::load(text)?;
        let language = args.lang.clone().or_else(|| transcription.language.clone()).unwrap_or_default();
        let audio = load_audio(wav)?;
        let audio_ref = wav.file_name().and_then(|n| n.to_str()).unwrap_or(&name);
        let doc = annotator.annotate(&audio, &transcription, &language, audio_ref)?;
        if write_textgrid_file {
            write_textgrid(&doc, args.out.join(format!("{name}.TextGrid")))?;
        }
        if args.lab {
            write_lab(&doc.phones, args.out.join(format!("{name}.lab")))?;
        }
        Ok(())
    };
    let results: Vec<Result<()>> = thread_pool(args.jobs)?.install(|| {
        inputs
            .par_iter()
            .map(|(w, t)| one(w, t).with_context(|| w.display().to_string()))
            .collect()
    });
    report_failures(results, "recordings")
}

/// Prints each failure and turns any into an error carrying the count.
fn report_failures(results: Vec<Result<()>>, what: &str) -> Result<()> {
    let total = results.len();
    let mut failed = 0;
    for e in results.into_iter().filter_map(Result::err) {
        eprintln!("error: {e:#}");
        failed += 1;
    }
    if failed > 0 {
        bail!("{failed} of {total} {what} failed");
    }
    Ok(())
}

fn train(args: TrainArgs) -> Result<()> {
    let mut config = load_config(args.config.as_deref())?;
    if let Some(n) = args.iterations {
        config.iterations = n;
    }
    let inventory = Inventory::load(&args.inventory)?;
    let mapping = args.mapping.as_deref().map(PhoneMapping::load).transpose()?;
    let wavs = list_files(&args.corpus, "wav")?;
    ensure!(!wavs.is_empty(), "no .wav files in {}", args.corpus.display());

    let load = |wav: &PathBuf| -> Result<TrainingUtterance> {
        let id = stem(wav)?;
        let transcription = Transcription::load(args.corpus.join(format!("{id}.txt")))?;
        let lab = args.seed_labels.join(format!("{id}.lab"));
        let seed_labels = lab.is_file().then(|| read_lab(&lab)).transpose()?;
        Ok(TrainingUtterance {
            audio: load_audio(wav)?,
            transcription,
            seed_labels,
            id,
        })
    };
    let pool = thread_pool(args.jobs)?;
    let utterances = pool.install(|| {
        wavs.par_iter()
            .map(|w| load(w).with_context(|| w.display().to_string()))
            .collect::<Result<Vec<_>>>()
    })?;
    let seeded = utterances.iter().filter(|u| u.seed_labels.is_some()).count();
    eprintln!("training on {} utterances, {seeded} with seed labels", utterances.len());

    let refinement = pool.install(|| train_models(&utterances, inventory, mapping, &config))?;
    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    refinement.models.save(args.out.join(MODELS_FILE))?;
    let log = serde_json::json!({
        "utterances": utterances.len(),
        "seeded": seeded,
        "iterations": config.iterations,
        "log_likelihoods": refinement.log_likelihoods,
    });
    let log_path = args.out.join("training.json");
    fs::write(&log_path, serde_json::to_string_pretty(&log)? + "\n")
        .with_context(|| format!("writing {}", log_path.display()))?;
    for (i, ll) in refinement.log_likelihoods.iter().enumerate() {
        eprintln!("pass {i}: log-likelihood {ll:.3}");
    }
    Ok(())
}

/// Reference files paired with the hypothesis file of the same name.
fn evaluation_pairs(args: &EvaluateArgs, extensions: &[&str]) -> Result<Vec<(String, PathBuf, PathBuf)>> {
    let mut pairs = Vec::new();
    for ext in extensions {
        for r in list_files(&args.reference, ext)? {
            let name = stem(&r)?;
            let h = extensions
                .iter()
                .map(|e| args.hyp.join(format!("{name}.{e}")))
                .find(|p| p.is_file())
                .with_context(|| format!("no hypothesis for reference {}", r.display()))?;
            pairs.push((name, h, r));
        }
    }
    ensure!(!pairs.is_empty(), "no reference files in {}", args.reference.display());
    pairs.sort();
    Ok(pairs)
}

fn read_phones(path: &Path) -> Result<Vec<Interval>> {
    Ok(if has_extension(path, "lab") {
        read_lab(path)?
    } else {
        read_textgrid(path)?.phones
    })
}

fn read_pair(h: &Path, r: &Path) -> Result<(AnnotationDocument, AnnotationDocument)> {
    Ok((read_textgrid(h)?, read_textgrid(r)?))
}

fn evaluate(args: EvaluateArgs) -> Result<()> {
    let (report, summary) = match args.tier {
        Tier::Phones => {
            let mut files = Vec::new();
            let mut reports = Vec::new();
            for (name, h, r) in evaluation_pairs(&args, &["TextGrid", "lab"])? {
                let report = evaluate_segmentation(&read_phones(&h)?, &read_phones(&r)?).with_context(|| name.clone())?;
                files.push(serde_json::json!({ "name": name, "report": report }));
                reports.push(report);
            }
            let overall = pool_segmentation(&reports)?;
            let summary = format!(
                "{} segments: {:.1}% / {:.1}% / {:.1}% of durations within 10 / 20 / 30 ms",
                overall.segments, overall.duration_within[&10], overall.duration_within[&20], overall.duration_within[&30]
            );
            (serde_json::json!({ "tier": "phones", "files": files, "overall": overall }), summary)
        }
        Tier::Breaks => {
            let (mut hyp, mut reference) = (Vec::new(), Vec::new());
            for (name, h, r) in evaluation_pairs(&args, &["TextGrid"])? {
                let (h, r) = read_pair(&h, &r)?;
                ensure!(
                    h.breaks.len() == r.breaks.len(),
                    "{name}: {} hypothesis breaks against {} reference breaks",
                    h.breaks.len(),
                    r.breaks.len()
                );
                hyp.extend(h.breaks.iter().map(|b| b.index));
                reference.extend(r.breaks.iter().map(|b| b.index));
            }
            let overall = evaluate_breaks(&hyp, &reference)?;
            let summary = format!("{} breaks: {:.1}% correct", overall.total, overall.accuracy);
            (serde_json::json!({ "tier": "breaks", "overall": overall }), summary)
        }
        Tier::Pitch => {
            let (mut hyp, mut reference) = (Vec::new(), Vec::new());
            for (name, h, r) in evaluation_pairs(&args, &["TextGrid"])? {
                let (h, r) = read_pair(&h, &r)?;
                ensure!(
                    h.syllables.len() == r.syllables.len(),
                    "{name}: {} hypothesis syllables against {} reference syllables",
                    h.syllables.len(),
                    r.syllables.len()
                );
                hyp.extend(h.syllables.iter().map(|s| s.label));
                reference.extend(r.syllables.iter().map(|s| s.label));
            }
            let overall = evaluate_pitch_labels(&hyp, &reference)?;
            let summary = format!("{} syllables: {:.1}% correct", overall.total, overall.accuracy);
            (serde_json::json!({ "tier": "pitch", "overall": overall }), summary)
        }
    };
    fs::write(&args.report, serde_json::to_string_pretty(&report)? + "\n")
        .with_context(|| format!("writing {}", args.report.display()))?;
    println!("{summary}");
    Ok(())
}

fn build_table(corpus: &Path, lang: &str, out: &Path, epsilon: Option<f64>, config: Option<&Path>) -> Result<()> {
    let epsilon = match epsilon {
        Some(e) => e,
        None => load_config(config)?.langid_epsilon,
    };
    ensure!(epsilon >= 0.0 && epsilon.is_finite(), "epsilon must be a non-negative number");
    let mut words = Vec::new();
    for path in list_files(corpus, "TextGrid")? {
        words.extend(read_textgrid(&path)?.word_contours().into_iter().map(|(_, l)| l));
    }
    for path in list_files(corpus, "txt")? {
        let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
        let parsed = parse_word_labels(&text).with_context(|| path.display().to_string())?;
        words.extend(parsed.into_iter().map(|(_, l)| l));
    }
    ensure!(!words.is_empty(), "no words found in {}", corpus.display());
    let table = build_frequency_table(&words, lang, epsilon);
    table.save(out)?;
    let used: usize = table.categories.values().map(|c| c.words).sum();
    eprintln!("{used} of {} words counted for '{lang}'", words.len());
    Ok(())
}

fn classify(tables_dir: &Path, word_labels: &Path) -> Result<()> {
    let tables = list_files(tables_dir, "json")?
        .iter()
        .map(ContourFrequencyTable::load)
        .collect::<prosody_core::Result<Vec<_>>>()?;
    ensure!(!tables.is_empty(), "no .json tables in {}", tables_dir.display());
    let text = fs::read_to_string(word_labels).with_context(|| format!("reading {}", word_labels.display()))?;
    let words = parse_word_labels(&text).with_context(|| word_labels.display().to_string())?;

    let header: Vec<&str> = tables.iter().map(|t| t.language.as_str()).collect();
    println!("word\tlanguage\ttie\t{}", header.join("\t"));
    let mut skipped = 0;
    for (word, labels) in &words {
        match score_word(&tables, labels) {
            Ok(scores) => {
                let best = classify_word(&scores).expect("at least one table");
                let cols: Vec<String> = scores.iter().map(|s| format!("{:.6}", s.score)).collect();
                println!("{word}\t{}\t{}\t{}", best.language, best.tie, cols.join("\t"));
            }
            Err(e) => {
                eprintln!("warning: skipping '{word}': {e}");
                skipped += 1;
            }
        }
    }
    if skipped == words.len() {
        bail!("no word could be scored");
    }
    Ok(())
}
