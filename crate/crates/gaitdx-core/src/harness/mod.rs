//! Experiment harness: subject-level stratified splits, evaluation reports,
//! and the end-to-end driver from data source to report.json.

use crate::classifier::{
    self, predict, svm_predict, train_model, train_svm, EnsembleModel, SvmModel, TrainConfig,
};
use crate::features;
use crate::parallel;
use crate::preprocess::{build_case_with, AggregationKind, CaseBundle};
use crate::recording::{self, Foot, Label, Recording};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("test_fraction must lie in [0, 1], got {0}")]
    BadFraction(f64),
    #[error("need at least 2 {label} subjects to stratify, got {count}")]
    TooFewSubjects { label: Label, count: usize },
    #[error("subject {0} appears with conflicting labels")]
    MixedSubjectLabels(String),
    #[error("subject {0} is unlabeled; the harness requires labels")]
    UnlabeledSubject(String),
    #[error("evaluation needs a nonempty test set")]
    EmptyTestSet,
    #[error("stage {stage} failed: {cause}")]
    Stage { stage: &'static str, cause: String },
}

fn stage_err<E: std::fmt::Display>(stage: &'static str) -> impl Fn(E) -> HarnessError {
    move |e| HarnessError::Stage { stage, cause: e.to_string() }
}

/// One fully prepared case: the six images for the CNNs plus the
/// 40-dimensional feature vector for the baseline.
#[derive(Debug, Clone)]
pub struct PreparedCase {
    pub subject_id: String,
    pub walk: usize,
    pub label: Label,
    pub bundle: CaseBundle,
    pub features: Vec<f64>,
}

/// Builds one case from a left/right recording pair: the bundle runs through
/// orientation normalization and grayscale conversion, while the baseline
/// features are extracted from the raw recordings.
pub fn prepare_case(
    left: &Recording,
    right: &Recording,
    walk: usize,
    side: usize,
    normalize_fpa: bool,
    critical_fraction: f64,
) -> Result<PreparedCase, HarnessError> {
    let bundle = build_case_with(left, right, side, normalize_fpa, critical_fraction)
        .map_err(stage_err("preprocess"))?;
    let features = features::feature_vector(left, right, critical_fraction)
        .map_err(stage_err("preprocess"))?;
    Ok(PreparedCase {
        subject_id: left.subject_id.clone(),
        walk,
        label: left.label,
        bundle,
        features,
    })
}

/// A subject-level split: indices into the prepared case list plus the
/// disjoint subject sets backing them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
    pub train_subjects: BTreeSet<String>,
    pub test_subjects: BTreeSet<String>,
}

/// Samples subjects (not cases) into the test set, stratified by label:
/// round(count * test_fraction) subjects per class. Every case of a subject
/// follows the subject, so train/test subject overlap is impossible.
pub fn subject_split(
    cases: &[PreparedCase],
    test_fraction: f64,
    seed: u64,
) -> Result<Split, HarnessError> {
    if !(0.0..=1.0).contains(&test_fraction) {
        return Err(HarnessError::BadFraction(test_fraction));
    }
    let mut subject_labels: BTreeMap<&str, Label> = BTreeMap::new();
    for case in cases {
        match case.label {
            Label::Unknown => {
                return Err(HarnessError::UnlabeledSubject(case.subject_id.clone()))
            }
            label => {
                if *subject_labels.entry(&case.subject_id).or_insert(label) != label {
                    return Err(HarnessError::MixedSubjectLabels(case.subject_id.clone()));
                }
            }
        }
    }

    let mut test_subjects: BTreeSet<String> = BTreeSet::new();
    for (class_salt, label) in [(1u64, Label::Negative), (2u64, Label::Positive)] {
        let mut subjects: Vec<&str> = subject_labels
            .iter()
            .filter(|(_, &l)| l == label)
            .map(|(&s, _)| s)
            .collect();
        if subjects.len() < 2 {
            return Err(HarnessError::TooFewSubjects { label, count: subjects.len() });
        }
        let mut rng =
            ChaCha8Rng::seed_from_u64(recording::synth::mix_seed(seed, &[30, class_salt]));
        for i in (1..subjects.len()).rev() {
            let j = rng.gen_range(0..=i);
            subjects.swap(i, j);
        }
        let take = (subjects.len() as f64 * test_fraction).round() as usize;
        for subject in subjects.into_iter().take(take) {
            test_subjects.insert(subject.to_string());
        }
    }

    let mut split = Split {
        train: Vec::new(),
        test: Vec::new(),
        train_subjects: BTreeSet::new(),
        test_subjects,
    };
    for (index, case) in cases.iter().enumerate() {
        if split.test_subjects.contains(&case.subject_id) {
            split.test.push(index);
        } else {
            split.train.push(index);
            split.train_subjects.insert(case.subject_id.clone());
        }
    }
    debug_assert!(split.train_subjects.is_disjoint(&split.test_subjects));
    Ok(split)
}

/// 2x2 confusion counts: rows are actual (negative, positive), columns are
/// predicted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct ConfusionMatrix {
    pub counts: [[usize; 2]; 2],
}

impl ConfusionMatrix {
    pub fn record(&mut self, actual: Label, predicted: Label) {
        let a = actual.class_index().expect("labeled test case");
        let p = predicted.class_index().expect("predictions are binary");
        self.counts[a][p] += 1;
    }

    pub fn total(&self) -> usize {
        self.counts.iter().flatten().sum()
    }

    pub fn accuracy(&self) -> f64 {
        let total = self.total();
        if total == 0 {
            return 0.0;
        }
        (self.counts[0][0] + self.counts[1][1]) as f64 / total as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelEval {
    pub accuracy: f64,
    pub confusion: ConfusionMatrix,
}

/// Accuracy and confusion counts for the five reported models.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Evaluation {
    pub case_count: usize,
    pub svm: ModelEval,
    pub max: ModelEval,
    pub sum: ModelEval,
    pub average: ModelEval,
    pub voting: ModelEval,
}

/// Scores every test case with the three CNNs, the vote, and the baseline.
pub fn evaluate(
    ensemble: &EnsembleModel,
    svm: &SvmModel,
    cases: &[PreparedCase],
    split: &Split,
) -> Result<Evaluation, HarnessError> {
    if split.test.is_empty() {
        return Err(HarnessError::EmptyTestSet);
    }
    let test_cases: Vec<&PreparedCase> = split.test.iter().map(|&i| &cases[i]).collect();
    let rows = parallel::map_indexed(&test_cases, |_, case| {
        let mut kind_votes = [Label::Negative; 3];
        for (slot, kind) in AggregationKind::ALL.iter().enumerate() {
            let (label, _) = predict(ensemble.model_for(*kind), &case.bundle, *kind)
                .expect("prepared cases match the trained models");
            kind_votes[slot] = label;
        }
        let voted = classifier::majority(kind_votes);
        let svm_label = svm_predict(svm, &case.features);
        (case.label, kind_votes, voted, svm_label)
    });

    let mut max = ConfusionMatrix::default();
    let mut sum = ConfusionMatrix::default();
    let mut average = ConfusionMatrix::default();
    let mut voting = ConfusionMatrix::default();
    let mut baseline = ConfusionMatrix::default();
    for (actual, kind_votes, voted, svm_label) in rows {
        max.record(actual, kind_votes[0]);
        sum.record(actual, kind_votes[1]);
        average.record(actual, kind_votes[2]);
        voting.record(actual, voted);
        baseline.record(actual, svm_label);
    }
    let eval = |confusion: ConfusionMatrix| ModelEval { accuracy: confusion.accuracy(), confusion };
    Ok(Evaluation {
        case_count: split.test.len(),
        svm: eval(baseline),
        max: eval(max),
        sum: eval(sum),
        average: eval(average),
        voting: eval(voting),
    })
}

/// Where the experiment's recordings come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DataSource {
    /// Generate recordings in memory with the synthetic gait model.
    Synthetic { subjects: usize, positive_fraction: f64, walks: usize, seed: u64 },
    /// Load `.ppr` files listed by `manifest.json` in this directory.
    Directory { path: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitConfig {
    pub test_fraction: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SvmConfig {
    pub lambda: f64,
    pub epochs: usize,
    pub seed: u64,
}

/// Full experiment description; see `configs/` for the shipped default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub data: DataSource,
    pub side: usize,
    pub critical_fraction: f64,
    pub fpa_normalization: bool,
    pub split: SplitConfig,
    pub train: TrainConfig,
    pub svm: SvmConfig,
    /// Default artifact directory; the CLI may override it.
    #[serde(default)]
    pub output_dir: Option<String>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<ExperimentConfig, serde_json::Error> {
        serde_json::from_str(text)
    }
}

/// One entry of the dataset manifest written by `gaitdx synth`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub file: String,
    pub subject_id: String,
    pub foot: Foot,
    pub label: Label,
    pub walk: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub grid_width: usize,
    pub grid_height: usize,
    pub sample_rate_hz: f64,
    pub seed: u64,
    pub recordings: Vec<ManifestEntry>,
    pub subjects: Vec<recording::SubjectMeta>,
}

/// The complete experiment result: evaluation scores plus the configuration
/// echo that makes the run reproducible.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub evaluation: Evaluation,
    pub train_case_count: usize,
    pub config: ExperimentConfig,
}

fn write_confusion(out: &mut String, indent: &str, name: &str, m: &ConfusionMatrix, last: bool) {
    let c = m.counts;
    let _ = write!(
        out,
        "{indent}\"{name}\": [[{}, {}], [{}, {}]]{}\n",
        c[0][0],
        c[0][1],
        c[1][0],
        c[1][1],
        if last { "" } else { "," }
    );
}

impl EvalReport {
    /// Renders the report with a stable key order and fixed 6-decimal
    /// accuracy formatting, so identical runs produce identical bytes.
    pub fn to_canonical_json(&self) -> String {
        let e = &self.evaluation;
        let mut out = String::new();
        out.push_str("{\n");
        let _ = write!(out, "  \"case_count\": {},\n", e.case_count);
        let _ = write!(out, "  \"train_case_count\": {},\n", self.train_case_count);
        out.push_str("  \"accuracies\": {\n");
        let acc = [
            ("svm", e.svm.accuracy),
            ("max", e.max.accuracy),
            ("sum", e.sum.accuracy),
            ("average", e.average.accuracy),
            ("voting", e.voting.accuracy),
        ];
        for (i, (name, value)) in acc.iter().enumerate() {
            let _ = write!(
                out,
                "    \"{name}\": {value:.6}{}\n",
                if i + 1 == acc.len() { "" } else { "," }
            );
        }
        out.push_str("  },\n");
        out.push_str("  \"confusion\": {\n");
        write_confusion(&mut out, "    ", "svm", &e.svm.confusion, false);
        write_confusion(&mut out, "    ", "max", &e.max.confusion, false);
        write_confusion(&mut out, "    ", "sum", &e.sum.confusion, false);
        write_confusion(&mut out, "    ", "average", &e.average.confusion, false);
        write_confusion(&mut out, "    ", "voting", &e.voting.confusion, true);
        out.push_str("  },\n");
        // The configuration echo drops the output directory: it has no
        // bearing on the result and would break byte-level comparisons.
        let mut config = self.config.clone();
        config.output_dir = None;
        let config_json = serde_json::to_string(&config).expect("config serializes");
        let _ = write!(out, "  \"config\": {config_json}\n");
        out.push_str("}\n");
        out
    }
}

/// Loads prepared cases from the configured data source.
pub fn load_cases(
    data: &DataSource,
    side: usize,
    critical_fraction: f64,
    normalize_fpa: bool,
) -> Result<Vec<PreparedCase>, HarnessError> {
    match data {
        DataSource::Synthetic { subjects, positive_fraction, walks, seed } => {
            let config = recording::GeneratorConfig::default();
            let mut cases: Vec<PreparedCase> = Vec::new();
            let mut pending_left: Option<(Recording, usize)> = None;
            let mut first_error: Option<HarnessError> = None;
            recording::generate_each(
                *subjects,
                *positive_fraction,
                *walks,
                *seed,
                &config,
                |rec, _, walk| {
                    if first_error.is_some() {
                        return;
                    }
                    match rec.foot {
                        Foot::Left => pending_left = Some((rec, walk)),
                        Foot::Right => {
                            let (left, left_walk) =
                                pending_left.take().expect("feet interleave left then right");
                            debug_assert_eq!(left_walk, walk);
                            match prepare_case(
                                &left,
                                &rec,
                                walk,
                                side,
                                normalize_fpa,
                                critical_fraction,
                            ) {
                                Ok(case) => cases.push(case),
                                Err(e) => first_error = Some(e),
                            }
                        }
                    }
                },
            )
            .map_err(stage_err("data"))?;
            if let Some(e) = first_error {
                return Err(e);
            }
            Ok(cases)
        }
        DataSource::Directory { path } => {
            let dir = Path::new(path);
            let manifest_text = std::fs::read_to_string(dir.join("manifest.json"))
                .map_err(stage_err("data"))?;
            let manifest: DatasetManifest =
                serde_json::from_str(&manifest_text).map_err(stage_err("data"))?;

            let mut pairs: BTreeMap<(String, usize), (Option<ManifestEntry>, Option<ManifestEntry>)> =
                BTreeMap::new();
            for entry in manifest.recordings {
                let slot = pairs
                    .entry((entry.subject_id.clone(), entry.walk))
                    .or_insert((None, None));
                match entry.foot {
                    Foot::Left => slot.0 = Some(entry),
                    Foot::Right => slot.1 = Some(entry),
                }
            }
            let mut cases = Vec::with_capacity(pairs.len());
            for ((subject, walk), (left, right)) in pairs {
                let (Some(left), Some(right)) = (left, right) else {
                    return Err(HarnessError::Stage {
                        stage: "data",
                        cause: format!("subject {subject} walk {walk} is missing a foot"),
                    });
                };
                let left = recording::load_recording(dir.join(&left.file))
                    .map_err(stage_err("data"))?;
                let right = recording::load_recording(dir.join(&right.file))
                    .map_err(stage_err("data"))?;
                cases.push(prepare_case(
                    &left,
                    &right,
                    walk,
                    side,
                    normalize_fpa,
                    critical_fraction,
                )?);
            }
            Ok(cases)
        }
    }
}

/// Runs the whole experiment: data, split, three CNNs plus the SVM baseline,
/// evaluation, and artifact writing. Deterministic for a fixed config.
pub fn run_experiment(
    config: &ExperimentConfig,
    out_dir: &Path,
) -> Result<EvalReport, HarnessError> {
    let cases = load_cases(
        &config.data,
        config.side,
        config.critical_fraction,
        config.fpa_normalization,
    )?;

    let split = subject_split(&cases, config.split.test_fraction, config.split.seed)?;
    let train_cases: Vec<CaseBundle> =
        split.train.iter().map(|&i| cases[i].bundle.clone()).collect();

    let (max_model, sum_model, average_model) = parallel::join3(
        || train_model(AggregationKind::Max, &train_cases, &config.train),
        || train_model(AggregationKind::Sum, &train_cases, &config.train),
        || train_model(AggregationKind::Average, &train_cases, &config.train),
    );
    let max_model = max_model.map_err(stage_err("train"))?;
    let sum_model = sum_model.map_err(stage_err("train"))?;
    let average_model = average_model.map_err(stage_err("train"))?;

    let train_vectors: Vec<Vec<f64>> =
        split.train.iter().map(|&i| cases[i].features.clone()).collect();
    let train_labels: Vec<Label> = split.train.iter().map(|&i| cases[i].label).collect();
    let svm_result = train_svm(
        &train_vectors,
        &train_labels,
        config.svm.lambda,
        config.svm.epochs,
        config.svm.seed,
    )
    .map_err(stage_err("baseline"))?;

    let ensemble = EnsembleModel {
        max_model: max_model.network,
        sum_model: sum_model.network,
        average_model: average_model.network,
    };
    let evaluation = evaluate(&ensemble, &svm_result.model, &cases, &split)?;

    let report = EvalReport {
        evaluation,
        train_case_count: split.train.len(),
        config: config.clone(),
    };

    std::fs::create_dir_all(out_dir).map_err(stage_err("write"))?;
    std::fs::write(out_dir.join("report.json"), report.to_canonical_json())
        .map_err(stage_err("write"))?;
    for (name, model) in [
        ("max", (&ensemble.max_model, &max_model.loss_curve)),
        ("sum", (&ensemble.sum_model, &sum_model.loss_curve)),
        ("average", (&ensemble.average_model, &average_model.loss_curve)),
    ] {
        crate::neuralnet::save_weights(model.0, out_dir.join(format!("{name}.gdxw")))
            .map_err(stage_err("write"))?;
        let mut csv = String::from("epoch,mean_loss\n");
        for (epoch, loss) in model.1.iter().enumerate() {
            let _ = write!(csv, "{epoch},{loss}\n");
        }
        std::fs::write(out_dir.join(format!("loss_{name}.csv")), csv)
            .map_err(stage_err("write"))?;
    }
    let svm_json =
        serde_json::to_string_pretty(&svm_result.model).map_err(stage_err("write"))?;
    std::fs::write(out_dir.join("svm.json"), svm_json).map_err(stage_err("write"))?;

    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::preprocess::GrayscaleImage;

    fn stub_case(subject: &str, walk: usize, label: Label) -> PreparedCase {
        let img = || GrayscaleImage { side: 8, pixels: vec![0; 64] };
        let bundle = CaseBundle::from_images(
            subject.to_string(),
            label,
            [
                (AggregationKind::Max, Foot::Left, img()),
                (AggregationKind::Max, Foot::Right, img()),
                (AggregationKind::Sum, Foot::Left, img()),
                (AggregationKind::Sum, Foot::Right, img()),
                (AggregationKind::Average, Foot::Left, img()),
                (AggregationKind::Average, Foot::Right, img()),
            ],
        )
        .unwrap();
        PreparedCase {
            subject_id: subject.to_string(),
            walk,
            label,
            bundle,
            features: vec![0.0; 40],
        }
    }

    fn cohort(subjects: usize, walks: usize) -> Vec<PreparedCase> {
        let mut cases = Vec::new();
        for s in 0..subjects {
            let label = if s % 2 == 0 { Label::Positive } else { Label::Negative };
            for w in 0..walks {
                cases.push(stub_case(&format!("S{s:03}"), w, label));
            }
        }
        cases
    }

    #[test]
    fn split_keeps_subjects_disjoint_and_whole() {
        let cases = cohort(20, 5);
        let split = subject_split(&cases, 0.2, 7).unwrap();
        assert!(split.train_subjects.is_disjoint(&split.test_subjects));
        assert_eq!(split.train.len() + split.test.len(), cases.len());
        // Each subject's cases stay together.
        for &i in &split.test {
            assert!(split.test_subjects.contains(&cases[i].subject_id));
        }
        // Stratified: 2 of 10 per class.
        assert_eq!(split.test_subjects.len(), 4);
        assert_eq!(split.test.len(), 20);
    }

    #[test]
    fn paper_shaped_split_yields_145_test_cases() {
        // 129 subjects (64 positive), 5 cases each, 645 cases in total.
        let mut cases = Vec::new();
        for s in 0..129 {
            let label = if s < 64 { Label::Positive } else { Label::Negative };
            for w in 0..5 {
                cases.push(stub_case(&format!("P{s:03}"), w, label));
            }
        }
        assert_eq!(cases.len(), 645);
        let split = subject_split(&cases, 0.225, 3).unwrap();
        // round(64 * .225) = 14 patients, round(65 * .225) = 15 healthy.
        assert_eq!(split.test_subjects.len(), 29);
        assert_eq!(split.test.len(), 145);
        assert!(split.train_subjects.is_disjoint(&split.test_subjects));
    }

    #[test]
    fn zero_fraction_gives_empty_test_set() {
        let cases = cohort(6, 2);
        let split = subject_split(&cases, 0.0, 1).unwrap();
        assert!(split.test.is_empty());
        assert_eq!(split.train.len(), cases.len());
    }

    #[test]
    fn split_is_deterministic_and_varies_with_seed() {
        let cases = cohort(12, 3);
        let a = subject_split(&cases, 0.25, 5).unwrap();
        let b = subject_split(&cases, 0.25, 5).unwrap();
        assert_eq!(a, b);
        let c = subject_split(&cases, 0.25, 6).unwrap();
        assert_ne!(a.test_subjects, c.test_subjects);
    }

    #[test]
    fn split_rejects_thin_classes() {
        let cases: Vec<PreparedCase> = (0..3)
            .map(|s| stub_case(&format!("S{s}"), 0, Label::Positive))
            .chain(std::iter::once(stub_case("N0", 0, Label::Negative)))
            .collect();
        assert!(matches!(
            subject_split(&cases, 0.5, 0),
            Err(HarnessError::TooFewSubjects { label: Label::Negative, count: 1 })
        ));
    }

    #[test]
    fn confusion_accuracy_matches_counts() {
        let mut m = ConfusionMatrix::default();
        m.record(Label::Negative, Label::Negative);
        m.record(Label::Negative, Label::Positive);
        m.record(Label::Positive, Label::Positive);
        m.record(Label::Positive, Label::Positive);
        assert_eq!(m.total(), 4);
        assert!((m.accuracy() - 0.75).abs() < 1e-12);
    }

    #[test]
    fn canonical_report_is_stable_and_parseable() {
        let eval = Evaluation {
            case_count: 4,
            svm: ModelEval {
                accuracy: 0.5,
                confusion: ConfusionMatrix { counts: [[1, 1], [1, 1]] },
            },
            max: ModelEval {
                accuracy: 0.75,
                confusion: ConfusionMatrix { counts: [[2, 0], [1, 1]] },
            },
            sum: ModelEval {
                accuracy: 0.75,
                confusion: ConfusionMatrix { counts: [[1, 1], [0, 2]] },
            },
            average: ModelEval {
                accuracy: 1.0,
                confusion: ConfusionMatrix { counts: [[2, 0], [0, 2]] },
            },
            voting: ModelEval {
                accuracy: 1.0,
                confusion: ConfusionMatrix { counts: [[2, 0], [0, 2]] },
            },
        };
        let report = EvalReport {
            evaluation: eval,
            train_case_count: 16,
            config: ExperimentConfig {
                data: DataSource::Synthetic {
                    subjects: 4,
                    positive_fraction: 0.5,
                    walks: 1,
                    seed: 1,
                },
                side: 16,
                critical_fraction: 0.05,
                fpa_normalization: true,
                split: SplitConfig { test_fraction: 0.5, seed: 1 },
                train: TrainConfig::default(),
                svm: SvmConfig { lambda: 1e-3, epochs: 10, seed: 1 },
                output_dir: Some("should-not-appear".into()),
            },
        };
        let json = report.to_canonical_json();
        assert_eq!(json, report.to_canonical_json());
        assert!(json.contains("\"svm\": 0.500000"));
        assert!(!json.contains("should-not-appear"));

        let value: serde_json::Value = serde_json::from_str(&json).unwrap();
        // Accuracies recompute from the emitted confusion matrices.
        for name in ["svm", "max", "sum", "average", "voting"] {
            let m = &value["confusion"][name];
            let tn = m[0][0].as_u64().unwrap();
            let fp = m[0][1].as_u64().unwrap();
            let fn_ = m[1][0].as_u64().unwrap();
            let tp = m[1][1].as_u64().unwrap();
            let recomputed = (tn + tp) as f64 / (tn + fp + fn_ + tp) as f64;
            let reported = value["accuracies"][name].as_f64().unwrap();
            assert!((recomputed - reported).abs() < 5e-7);
        }
    }

    #[test]
    fn config_errors_name_the_missing_field() {
        let text = r#"{"data": {"synthetic": {"subjects": 4, "positive_fraction": 0.5, "walks": 1, "seed": 1}}, "critical_fraction": 0.05, "fpa_normalization": true, "split": {"test_fraction": 0.2, "seed": 1}, "train": {"epochs": 1, "learning_rate": 0.01, "momentum": 0.9, "batch_size": 4, "seed": 1}, "svm": {"lambda": 0.001, "epochs": 5, "seed": 1}}"#;
        let err = ExperimentConfig::from_json(text).unwrap_err();
        assert!(err.to_string().contains("side"), "error should name `side`: {err}");
    }
}
