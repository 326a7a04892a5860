// SPDX-License-Identifier: Apache-2.0

//! Pipeline stages behind the `notenet` binary.
//!
//! Each stage reads and writes files so it can be run and tested on its own:
//!
//! * `extract`: manifest of audio files → note-sequence file
//! * `features`: note-sequence file → feature CSV
//! * `evaluate`: feature CSV → accuracy report and confusion CSV
//! * `pipeline`: all three, plus the config sidecar

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use log::{info, warn};
use notenet_core::eval::{cross_validate, CvReport, RescaleScope};
use notenet_core::features::{self, build_matrix, minmax_rescale, FeatureMatrix, ThresholdPlan};
use notenet_core::notes::{self, track_to_sequence, NoteSequence};
use notenet_core::pitch::{decode_audio, estimate_f0, segment_clip};
use rayon::prelude::*;
use thiserror::Error;

pub mod config;
pub mod manifest;

pub use config::{ConfigArgs, RunConfig};
pub use manifest::{Manifest, ManifestEntry};

/// Threshold levels evaluated by `pipeline --threshold-sweep`.
pub const SWEEP_LEVELS: [u32; 15] = [0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 15, 20, 25, 30];

pub const SEQUENCES_FILE: &str = "sequences.txt";
pub const FEATURES_FILE: &str = "features.csv";
pub const REPORT_FILE: &str = "report.txt";
pub const CONFUSION_FILE: &str = "confusion.csv";
pub const CONFIG_FILE: &str = "config.json";

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags or configuration.
    #[error("{0}")]
    Usage(String),
    /// Unreadable or invalid input data.
    #[error("{0}")]
    Data(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
        }
    }
}

fn data<E: std::fmt::Display>(context: impl std::fmt::Display) -> impl FnOnce(E) -> CliError {
    move |e| CliError::Data(format!("{context}: {e}"))
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(data(format!("cannot create {}", path.display())))
}

fn open(path: &Path) -> Result<BufReader<File>, CliError> {
    File::open(path)
        .map(BufReader::new)
        .map_err(data(format!("cannot open {}", path.display())))
}

#[derive(Debug, Clone, Default)]
pub struct ExtractOutcome {
    /// Sorted by `(source_id, segment_index)`.
    pub sequences: Vec<NoteSequence>,
    /// `(source_id, error)` for entries that could not be processed.
    pub failures: Vec<(String, String)>,
}

/// Note sequences for one audio file.
pub fn extract_entry(entry: &ManifestEntry, config: &RunConfig) -> Result<Vec<NoteSequence>, String> {
    let clip = decode_audio(&entry.audio_path, &entry.source_id, &entry.label).map_err(|e| e.to_string())?;
    let segments = segment_clip(&clip, config.seg_len_s, config.max_segments).map_err(|e| e.to_string())?;
    if segments.is_empty() {
        return Err(format!(
            "clip of {:.2} s is shorter than one {} s segment",
            clip.duration_s(),
            config.seg_len_s
        ));
    }
    let yin = config.yin();
    segments
        .iter()
        .map(|s| {
            let track = estimate_f0(s, &yin).map_err(|e| e.to_string())?;
            Ok(track_to_sequence(&track, config.sharp(), &s.source_id, s.segment_index, &s.label))
        })
        .collect()
}

/// Decodes, segments and pitch-tracks every manifest entry. Entries that fail
/// are logged and skipped.
pub fn extract_sequences(manifest: &Manifest, config: &RunConfig) -> Result<ExtractOutcome, CliError> {
    if manifest.entries.is_empty() {
        return Err(CliError::Data("manifest has no entries".into()));
    }
    let results: Vec<(String, Result<Vec<NoteSequence>, String>)> = manifest
        .entries
        .par_iter()
        .map(|e| (e.source_id.clone(), extract_entry(e, config)))
        .collect();

    let mut outcome = ExtractOutcome::default();
    for (source, result) in results {
        match result {
            Ok(seqs) => outcome.sequences.extend(seqs),
            Err(e) => {
                warn!("skipping {source}: {e}");
                outcome.failures.push((source, e));
            }
        }
    }
    if outcome.failures.len() == manifest.entries.len() {
        return Err(CliError::Data(format!(
            "all {} manifest entries failed; first error: {}",
            outcome.failures.len(),
            outcome.failures[0].1
        )));
    }
    outcome
        .sequences
        .sort_by(|a, b| (&a.source_id, a.segment_index).cmp(&(&b.source_id, b.segment_index)));
    Ok(outcome)
}

pub fn write_sequence_file(path: &Path, seqs: &[NoteSequence]) -> Result<(), CliError> {
    let mut w = create(path)?;
    notes::write_sequences(seqs, &mut w).map_err(data(path.display()))?;
    w.flush().map_err(data(path.display()))
}

pub fn read_sequence_file(path: &Path) -> Result<Vec<NoteSequence>, CliError> {
    notes::read_sequences(open(path)?).map_err(data(path.display()))
}

pub fn cmd_extract(manifest: &Path, out: &Path, config: &RunConfig) -> Result<ExtractOutcome, CliError> {
    let manifest = Manifest::load(manifest)?;
    let outcome = extract_sequences(&manifest, config)?;
    write_sequence_file(out, &outcome.sequences)?;
    info!(
        "wrote {} sequences from {} sources to {}",
        outcome.sequences.len(),
        manifest.entries.len() - outcome.failures.len(),
        out.display()
    );
    Ok(outcome)
}

/// Unscaled matrix over levels `0..=t_max`.
pub fn raw_matrix(seqs: &[NoteSequence], config: &RunConfig) -> Result<FeatureMatrix, CliError> {
    config.validate()?;
    build_matrix(seqs, &config.traversal()?, ThresholdPlan::Fixed(config.t_max))
        .map_err(|e| CliError::Usage(e.to_string()))
}

/// The matrix as the features stage writes it: rescaled over all rows under
/// global scaling, raw when scaling is left to each training fold.
pub fn output_matrix(raw: &FeatureMatrix, config: &RunConfig) -> Result<FeatureMatrix, CliError> {
    match config.scope() {
        RescaleScope::Global => minmax_rescale(raw).map_err(|e| CliError::Data(e.to_string())),
        RescaleScope::TrainOnly => Ok(raw.clone()),
    }
}

pub fn write_feature_file(path: &Path, m: &FeatureMatrix) -> Result<(), CliError> {
    let mut w = create(path)?;
    features::write_csv(m, &mut w).map_err(data(path.display()))?;
    w.flush().map_err(data(path.display()))
}

pub fn read_feature_file(path: &Path, config: &RunConfig) -> Result<FeatureMatrix, CliError> {
    let rescaled = config.scope() == RescaleScope::Global;
    let m = features::read_csv(open(path)?, rescaled).map_err(data(path.display()))?;
    if rescaled && !features::within_unit_interval(&m) {
        return Err(CliError::Data(format!(
            "{}: values outside [0, 1]; the matrix is not rescaled (use --rescale-scope train-only)",
            path.display()
        )));
    }
    Ok(m)
}

pub fn cmd_features(sequences: &Path, out: &Path, config: &RunConfig) -> Result<FeatureMatrix, CliError> {
    config.validate()?;
    let seqs = read_sequence_file(sequences)?;
    let m = output_matrix(&raw_matrix(&seqs, config)?, config)?;
    write_feature_file(out, &m)?;
    info!("wrote {} rows x {} features to {}", m.len(), m.width(), out.display());
    Ok(m)
}

pub fn evaluate_matrix(m: &FeatureMatrix, config: &RunConfig) -> Result<CvReport, CliError> {
    cross_validate(m, &config.cv_options()).map_err(|e| CliError::Data(e.to_string()))
}

pub fn write_report(report: &CvReport, config: &RunConfig, report_path: &Path, confusion_path: &Path) -> Result<(), CliError> {
    let mut w = create(report_path)?;
    w.write_all(report.render_text(&config.cv_options()).as_bytes())
        .and_then(|_| w.flush())
        .map_err(data(report_path.display()))?;
    let mut w = create(confusion_path)?;
    report
        .write_confusion_csv(&mut w)
        .map_err(data(confusion_path.display()))?;
    w.flush().map_err(data(confusion_path.display()))
}

pub fn cmd_evaluate(features: &Path, report_path: &Path, confusion_path: &Path, config: &RunConfig) -> Result<CvReport, CliError> {
    config.validate()?;
    let m = read_feature_file(features, config)?;
    let report = evaluate_matrix(&m, config)?;
    write_report(&report, config, report_path, confusion_path)?;
    info!("mean accuracy {:.2} over {} folds", report.mean_accuracy, report.fold_accuracies.len());
    Ok(report)
}

#[derive(Debug, Clone)]
pub struct PipelineOutcome {
    pub extract: ExtractOutcome,
    /// `(T, mean accuracy)` per evaluated threshold count.
    pub accuracies: Vec<(u32, f64)>,
    pub files: Vec<PathBuf>,
}

fn sweep_name(stem: &str, ext: &str, t: u32) -> String {
    format!("{stem}_t{t}.{ext}")
}

/// Every file `cmd_pipeline` would write into `out_dir`.
pub fn pipeline_outputs(out_dir: &Path, sweep: bool) -> Vec<PathBuf> {
    let mut names = vec![
        CONFIG_FILE.to_string(),
        SEQUENCES_FILE.to_string(),
        FEATURES_FILE.to_string(),
        REPORT_FILE.to_string(),
        CONFUSION_FILE.to_string(),
    ];
    if sweep {
        for t in SWEEP_LEVELS {
            names.push(sweep_name("features", "csv", t));
            names.push(sweep_name("report", "txt", t));
            names.push(sweep_name("confusion", "csv", t));
        }
    }
    names.into_iter().map(|n| out_dir.join(n)).collect()
}

/// Runs extract, features and evaluate into `out_dir`.
///
/// With `sweep`, the matrix is built once up to the largest level and each
/// swept `T` uses its column prefix, which equals a fresh build at that `T`.
pub fn cmd_pipeline(
    manifest: &Path,
    out_dir: &Path,
    config: &RunConfig,
    force: bool,
    sweep: bool,
) -> Result<PipelineOutcome, CliError> {
    config.validate()?;
    let files = pipeline_outputs(out_dir, sweep);
    if !force {
        if let Some(existing) = files.iter().find(|p| p.exists()) {
            return Err(CliError::Usage(format!(
                "{} already exists; pass --force to overwrite",
                existing.display()
            )));
        }
    }
    std::fs::create_dir_all(out_dir).map_err(data(format!("cannot create {}", out_dir.display())))?;

    let mut sidecar = create(&out_dir.join(CONFIG_FILE))?;
    sidecar
        .write_all(config.to_json().as_bytes())
        .and_then(|_| sidecar.flush())
        .map_err(data(CONFIG_FILE))?;

    let extract = cmd_extract(manifest, &out_dir.join(SEQUENCES_FILE), config)?;

    let widest = if sweep {
        config.t_max.max(*SWEEP_LEVELS.last().unwrap())
    } else {
        config.t_max
    };
    let raw = raw_matrix(&extract.sequences, &RunConfig { t_max: widest, ..config.clone() })?;
    let width = |t: u32| (t as usize + 1) * notenet_core::topology::MEASURE_COUNT;

    let main = output_matrix(&raw.prefix(width(config.t_max)), config)?;
    write_feature_file(&out_dir.join(FEATURES_FILE), &main)?;
    let report = evaluate_matrix(&main, config)?;
    write_report(&report, config, &out_dir.join(REPORT_FILE), &out_dir.join(CONFUSION_FILE))?;
    let mut accuracies = vec![(config.t_max, report.mean_accuracy)];

    if sweep {
        for t in SWEEP_LEVELS {
            let m = output_matrix(&raw.prefix(width(t)), config)?;
            write_feature_file(&out_dir.join(sweep_name("features", "csv", t)), &m)?;
            let r = evaluate_matrix(&m, config)?;
            write_report(
                &r,
                config,
                &out_dir.join(sweep_name("report", "txt", t)),
                &out_dir.join(sweep_name("confusion", "csv", t)),
            )?;
            info!("T={t}: mean accuracy {:.2}", r.mean_accuracy);
            accuracies.push((t, r.mean_accuracy));
        }
    }
    Ok(PipelineOutcome {
        extract,
        accuracies,
        files,
    })
}
