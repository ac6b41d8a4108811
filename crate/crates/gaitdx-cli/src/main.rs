//! `gaitdx` — plantar-pressure gait diagnosis pipeline.

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use gaitdx_core::classifier::{self, TrainConfig};
use gaitdx_core::features;
use gaitdx_core::harness::{
    self, DatasetManifest, EvalReport, ExperimentConfig, ManifestEntry,
};
use gaitdx_core::neuralnet;
use gaitdx_core::preprocess::{self, pgm, AggregationKind, CaseBundle, GrayscaleImage};
use gaitdx_core::recording::{self, Foot, GeneratorConfig, Label};
use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(name = "gaitdx", about = "Plantar-pressure gait diagnosis pipeline", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic labeled dataset of .ppr recordings.
    Synth {
        #[arg(long)]
        subjects: usize,
        #[arg(long, default_value_t = 0.5)]
        positive_fraction: f64,
        #[arg(long, default_value_t = 5)]
        walks: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Aggregate recordings into per-case grayscale PGM images.
    Preprocess {
        #[arg(long, value_name = "DIR")]
        r#in: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 64)]
        side: usize,
        /// Skip foot-progression-angle normalization.
        #[arg(long)]
        no_fpa: bool,
        #[arg(long, default_value_t = 0.05)]
        critical_fraction: f64,
    },
    /// Extract classical gait features from one recording (optionally a pair).
    Features {
        #[arg(long, value_name = "FILE.ppr")]
        r#in: PathBuf,
        /// The other foot's recording; adds the 40-entry case vector.
        #[arg(long)]
        pair: Option<PathBuf>,
        #[arg(long, default_value_t = 0.05)]
        critical_fraction: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train one CNN on preprocessed cases.
    Train {
        #[arg(long, value_name = "DIR")]
        data: PathBuf,
        #[arg(long)]
        kind: AggregationKind,
        #[arg(long, default_value_t = 30)]
        epochs: usize,
        #[arg(long, default_value_t = 0.01)]
        lr: f64,
        #[arg(long, default_value_t = 0.9)]
        momentum: f64,
        #[arg(long, default_value_t = 16)]
        batch: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, value_name = "model.gdxw")]
        out: PathBuf,
    },
    /// Diagnose one case with three trained models and majority voting.
    Diagnose {
        #[arg(long, value_name = "max.gdxw")]
        max: PathBuf,
        #[arg(long, value_name = "sum.gdxw")]
        sum: PathBuf,
        #[arg(long, value_name = "average.gdxw")]
        avg: PathBuf,
        /// Directory holding one case's six PGM images.
        #[arg(long, value_name = "DIR")]
        case: PathBuf,
    },
    /// Train the SVM baseline on classical features.
    Baseline {
        /// Directory of .ppr recordings with manifest.json.
        #[arg(long, value_name = "DIR")]
        data: PathBuf,
        #[arg(long, default_value_t = 1e-3)]
        lambda: f64,
        #[arg(long, default_value_t = 200)]
        epochs: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 0.05)]
        critical_fraction: f64,
        #[arg(long, value_name = "svm.json")]
        out: PathBuf,
    },
    /// Run a full experiment from a JSON config file.
    Run {
        #[arg(long, value_name = "experiment.json")]
        config: PathBuf,
        /// Overrides the config's output_dir.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Synth { subjects, positive_fraction, walks, seed, out } => {
            synth(subjects, positive_fraction, walks, seed, &out)
        }
        Command::Preprocess { r#in, out, side, no_fpa, critical_fraction } => {
            preprocess_dir(&r#in, &out, side, !no_fpa, critical_fraction)
        }
        Command::Features { r#in, pair, critical_fraction, out } => {
            features_cmd(&r#in, pair.as_deref(), critical_fraction, out.as_deref())
        }
        Command::Train { data, kind, epochs, lr, momentum, batch, seed, out } => {
            let config = TrainConfig {
                epochs,
                learning_rate: lr,
                momentum,
                batch_size: batch,
                seed,
            };
            train(&data, kind, &config, &out)
        }
        Command::Diagnose { max, sum, avg, case } => diagnose(&max, &sum, &avg, &case),
        Command::Baseline { data, lambda, epochs, seed, critical_fraction, out } => {
            baseline(&data, lambda, epochs, seed, critical_fraction, &out)
        }
        Command::Run { config, out } => run(&config, out.as_deref()),
    }
}

fn synth(subjects: usize, positive_fraction: f64, walks: usize, seed: u64, out: &Path) -> Result<()> {
    fs::create_dir_all(out)?;
    let config = GeneratorConfig::default();
    let mut entries: Vec<ManifestEntry> = Vec::new();
    let mut write_error: Option<anyhow::Error> = None;
    let metas = recording::generate_each(
        subjects,
        positive_fraction,
        walks,
        seed,
        &config,
        |rec, meta, walk| {
            if write_error.is_some() {
                return;
            }
            let file = format!("{}_w{}_{}.ppr", meta.subject_id, walk, rec.foot);
            if let Err(e) = recording::save_recording(&rec, out.join(&file)) {
                write_error = Some(e.into());
                return;
            }
            entries.push(ManifestEntry {
                file,
                subject_id: meta.subject_id.clone(),
                foot: rec.foot,
                label: meta.label,
                walk,
            });
        },
    )?;
    if let Some(e) = write_error {
        return Err(e);
    }
    let manifest = DatasetManifest {
        grid_width: config.grid_width,
        grid_height: config.grid_height,
        sample_rate_hz: config.sample_rate_hz,
        seed,
        recordings: entries,
        subjects: metas,
    };
    fs::write(out.join("manifest.json"), serde_json::to_string_pretty(&manifest)?)?;
    println!(
        "wrote {} recordings for {} subjects to {}",
        manifest.recordings.len(),
        manifest.subjects.len(),
        out.display()
    );
    Ok(())
}

fn load_manifest(dir: &Path) -> Result<DatasetManifest> {
    let path = dir.join("manifest.json");
    let text = fs::read_to_string(&path)
        .with_context(|| format!("reading {}", path.display()))?;
    Ok(serde_json::from_str(&text)?)
}

/// Pairs of (left, right) manifest entries grouped by subject and walk.
fn manifest_pairs(manifest: &DatasetManifest) -> Result<Vec<(ManifestEntry, ManifestEntry)>> {
    let mut pairs: BTreeMap<(String, usize), (Option<ManifestEntry>, Option<ManifestEntry>)> =
        BTreeMap::new();
    for entry in &manifest.recordings {
        let slot = pairs
            .entry((entry.subject_id.clone(), entry.walk))
            .or_insert((None, None));
        match entry.foot {
            Foot::Left => slot.0 = Some(entry.clone()),
            Foot::Right => slot.1 = Some(entry.clone()),
        }
    }
    pairs
        .into_iter()
        .map(|((subject, walk), pair)| match pair {
            (Some(l), Some(r)) => Ok((l, r)),
            _ => bail!("subject {subject} walk {walk} is missing a foot"),
        })
        .collect()
}

#[derive(serde::Serialize, serde::Deserialize)]
struct CaseRecord {
    subject_id: String,
    walk: usize,
    label: Label,
    images: BTreeMap<String, String>,
}

fn preprocess_dir(
    input: &Path,
    out: &Path,
    side: usize,
    normalize_fpa: bool,
    critical_fraction: f64,
) -> Result<()> {
    fs::create_dir_all(out)?;
    let manifest = load_manifest(input)?;
    let mut cases: Vec<CaseRecord> = Vec::new();
    for (left_entry, right_entry) in manifest_pairs(&manifest)? {
        let left = recording::load_recording(input.join(&left_entry.file))?;
        let right = recording::load_recording(input.join(&right_entry.file))?;
        let bundle =
            preprocess::build_case_with(&left, &right, side, normalize_fpa, critical_fraction)?;
        let mut images = BTreeMap::new();
        for kind in AggregationKind::ALL {
            for foot in [Foot::Left, Foot::Right] {
                let name = format!(
                    "{}_{}_{}_{}.pgm",
                    bundle.subject_id, left_entry.walk, kind, foot
                );
                let img = bundle.image(kind, foot);
                pgm::write_file(out.join(&name), &img.pixels, img.side, img.side)?;
                images.insert(format!("{kind}_{foot}"), name);
            }
        }
        cases.push(CaseRecord {
            subject_id: bundle.subject_id.clone(),
            walk: left_entry.walk,
            label: bundle.label,
            images,
        });
    }
    fs::write(out.join("cases.json"), serde_json::to_string_pretty(&cases)?)?;
    println!("wrote {} cases to {}", cases.len(), out.display());
    Ok(())
}

fn features_cmd(
    input: &Path,
    pair: Option<&Path>,
    critical_fraction: f64,
    out: Option<&Path>,
) -> Result<()> {
    let recording = recording::load_recording(input)?;
    let set = features::compute_feature_set(&recording, critical_fraction)?;
    let mut value = serde_json::to_value(&set)?;
    if let Some(pair_path) = pair {
        let other = recording::load_recording(pair_path)?;
        let (left, right) = match (recording.foot, other.foot) {
            (Foot::Left, Foot::Right) => (&recording, &other),
            (Foot::Right, Foot::Left) => (&other, &recording),
            (a, b) => bail!("need one left and one right recording, got {a} and {b}"),
        };
        let vector = features::feature_vector(left, right, critical_fraction)?;
        value["case_vector"] = serde_json::to_value(vector)?;
    }
    let text = serde_json::to_string_pretty(&value)?;
    match out {
        Some(path) => fs::write(path, text)?,
        None => println!("{text}"),
    }
    Ok(())
}

fn load_cases_dir(dir: &Path) -> Result<Vec<CaseBundle>> {
    let text = fs::read_to_string(dir.join("cases.json"))
        .with_context(|| format!("reading {}/cases.json", dir.display()))?;
    let records: Vec<CaseRecord> = serde_json::from_str(&text)?;
    let mut bundles = Vec::with_capacity(records.len());
    for record in records {
        let mut images = Vec::with_capacity(6);
        for kind in AggregationKind::ALL {
            for foot in [Foot::Left, Foot::Right] {
                let key = format!("{kind}_{foot}");
                let file = record
                    .images
                    .get(&key)
                    .with_context(|| format!("case {} missing image {key}", record.subject_id))?;
                let (pixels, width, height) = pgm::read_file(dir.join(file))?;
                if width != height {
                    bail!("{file}: expected a square image, got {width}x{height}");
                }
                images.push((kind, foot, GrayscaleImage { side: width, pixels }));
            }
        }
        let images: [(AggregationKind, Foot, GrayscaleImage); 6] =
            images.try_into().expect("exactly six images");
        bundles.push(
            CaseBundle::from_images(record.subject_id, record.label, images)
                .map_err(anyhow::Error::msg)?,
        );
    }
    Ok(bundles)
}

fn train(data: &Path, kind: AggregationKind, config: &TrainConfig, out: &Path) -> Result<()> {
    let cases = load_cases_dir(data)?;
    let trained = classifier::train_model(kind, &cases, config)?;
    neuralnet::save_weights(&trained.network, out)?;
    println!("epoch,mean_loss");
    for (epoch, loss) in trained.loss_curve.iter().enumerate() {
        println!("{epoch},{loss}");
    }
    eprintln!("saved {} model to {}", kind, out.display());
    Ok(())
}

/// Loads one case's six images from a directory by the `*_<kind>_<foot>.pgm`
/// suffix convention used by `preprocess`.
fn load_single_case(dir: &Path) -> Result<CaseBundle> {
    let mut found: BTreeMap<String, PathBuf> = BTreeMap::new();
    for entry in fs::read_dir(dir)? {
        let path = entry?.path();
        let Some(name) = path.file_name().and_then(|n| n.to_str()) else {
            continue;
        };
        if !name.ends_with(".pgm") {
            continue;
        }
        for kind in AggregationKind::ALL {
            for foot in [Foot::Left, Foot::Right] {
                if name.ends_with(&format!("_{kind}_{foot}.pgm")) {
                    found.insert(format!("{kind}_{foot}"), path.clone());
                }
            }
        }
    }
    let mut images = Vec::with_capacity(6);
    let mut subject_id = String::from("case");
    for kind in AggregationKind::ALL {
        for foot in [Foot::Left, Foot::Right] {
            let key = format!("{kind}_{foot}");
            let path = found
                .get(&key)
                .with_context(|| format!("no *_{key}.pgm image in {}", dir.display()))?;
            if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
                if let Some(prefix) = stem.strip_suffix(&format!("_{kind}_{foot}")) {
                    subject_id = prefix.to_string();
                }
            }
            let (pixels, width, height) = pgm::read_file(path)?;
            if width != height {
                bail!("{}: expected a square image", path.display());
            }
            images.push((kind, foot, GrayscaleImage { side: width, pixels }));
        }
    }
    let images: [(AggregationKind, Foot, GrayscaleImage); 6] =
        images.try_into().expect("exactly six images");
    CaseBundle::from_images(subject_id, Label::Unknown, images).map_err(anyhow::Error::msg)
}

fn diagnose(max: &Path, sum: &Path, avg: &Path, case_dir: &Path) -> Result<()> {
    let ensemble = classifier::EnsembleModel {
        max_model: neuralnet::load_weights(max)?,
        sum_model: neuralnet::load_weights(sum)?,
        average_model: neuralnet::load_weights(avg)?,
    };
    let case = load_single_case(case_dir)?;
    let outcome = classifier::vote(&ensemble, &case)?;
    let json = serde_json::json!({
        "case": case.subject_id,
        "votes": {
            "max": outcome.votes[0],
            "sum": outcome.votes[1],
            "average": outcome.votes[2],
        },
        "final": outcome.final_label,
    });
    println!("{}", serde_json::to_string_pretty(&json)?);
    Ok(())
}

fn baseline(
    data: &Path,
    lambda: f64,
    epochs: usize,
    seed: u64,
    critical_fraction: f64,
    out: &Path,
) -> Result<()> {
    let manifest = load_manifest(data)?;
    let mut vectors = Vec::new();
    let mut labels = Vec::new();
    for (left_entry, right_entry) in manifest_pairs(&manifest)? {
        let left = recording::load_recording(data.join(&left_entry.file))?;
        let right = recording::load_recording(data.join(&right_entry.file))?;
        vectors.push(features::feature_vector(&left, &right, critical_fraction)?);
        labels.push(left_entry.label);
    }
    let result = classifier::train_svm(&vectors, &labels, lambda, epochs, seed)?;
    if !result.model.dropped_features.is_empty() {
        eprintln!(
            "warning: dropped zero-variance feature dimensions {:?}",
            result.model.dropped_features
        );
    }
    let correct = vectors
        .iter()
        .zip(&labels)
        .filter(|(v, &l)| classifier::svm_predict(&result.model, v) == l)
        .count();
    fs::write(out, serde_json::to_string_pretty(&result.model)?)?;
    println!(
        "trained on {} cases, training accuracy {:.4}, saved to {}",
        vectors.len(),
        correct as f64 / vectors.len() as f64,
        out.display()
    );
    Ok(())
}

fn run(config_path: &Path, out_override: Option<&Path>) -> Result<()> {
    let text = fs::read_to_string(config_path)
        .with_context(|| format!("reading {}", config_path.display()))?;
    let config = ExperimentConfig::from_json(&text)?;
    let out_dir: PathBuf = match (out_override, &config.output_dir) {
        (Some(path), _) => path.to_path_buf(),
        (None, Some(dir)) => PathBuf::from(dir),
        (None, None) => bail!("no output directory: set output_dir in the config or pass --out"),
    };
    let report: EvalReport = harness::run_experiment(&config, &out_dir)?;
    let e = &report.evaluation;
    println!(
        "test cases: {}  train cases: {}",
        e.case_count, report.train_case_count
    );
    for (name, eval) in [
        ("svm", &e.svm),
        ("max", &e.max),
        ("sum", &e.sum),
        ("average", &e.average),
        ("voting", &e.voting),
    ] {
        println!("{name:>8}: {:.4}", eval.accuracy);
    }
    println!("report written to {}", out_dir.join("report.json").display());
    Ok(())
}
