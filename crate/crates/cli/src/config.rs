// SPDX-License-Identifier: Apache-2.0

use std::path::Path;

use notenet_core::eval::{CvOptions, FoldGrouping, RescaleScope};
use notenet_core::network::{SelfEdgePolicy, TraversalParams};
use notenet_core::notes::SharpPolicy;
use notenet_core::pitch::{self, YinConfig};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Largest accepted threshold count; the matrix has `10 · (T + 1)` columns.
pub const MAX_THRESHOLD: u32 = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SharpMode {
    Strip,
    Drop,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SelfEdgeMode {
    Skip,
    Allow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ScaleMode {
    Global,
    TrainOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum GroupMode {
    Segment,
    Source,
}

/// Every knob of a run. Written next to the outputs so a run can be repeated
/// with `--config`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub ws: usize,
    pub st: usize,
    pub t_max: u32,
    pub seg_len_s: f64,
    pub max_segments: usize,
    pub fmin_hz: f64,
    pub fmax_hz: f64,
    pub frame_len: usize,
    pub hop_len: usize,
    pub yin_threshold: f64,
    pub knn_k: usize,
    pub folds: usize,
    pub seed: u64,
    pub sharp_policy: SharpMode,
    pub self_edge_policy: SelfEdgeMode,
    pub rescale_scope: ScaleMode,
    pub fold_grouping: GroupMode,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            ws: 2,
            st: 2,
            t_max: 30,
            seg_len_s: pitch::DEFAULT_SEGMENT_SECONDS,
            max_segments: pitch::DEFAULT_MAX_SEGMENTS,
            fmin_hz: pitch::DEFAULT_FMIN_HZ,
            fmax_hz: pitch::DEFAULT_FMAX_HZ,
            frame_len: pitch::DEFAULT_FRAME_LEN,
            hop_len: pitch::DEFAULT_HOP_LEN,
            yin_threshold: pitch::DEFAULT_YIN_THRESHOLD,
            knn_k: 1,
            folds: 10,
            seed: 0,
            sharp_policy: SharpMode::Strip,
            self_edge_policy: SelfEdgeMode::Skip,
            rescale_scope: ScaleMode::Global,
            fold_grouping: GroupMode::Segment,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Usage(format!("invalid config {}: {e}", path.display())))
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("config serializes");
        s.push('\n');
        s
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.traversal()?;
        if self.t_max > MAX_THRESHOLD {
            return Err(CliError::Usage(format!(
                "t-max {} exceeds the limit of {MAX_THRESHOLD}",
                self.t_max
            )));
        }
        if !(self.seg_len_s.is_finite() && self.seg_len_s > 0.0) {
            return Err(CliError::Usage(format!("seg-len must be positive, got {}", self.seg_len_s)));
        }
        if self.knn_k == 0 {
            return Err(CliError::Usage("knn-k must be at least 1".into()));
        }
        if self.folds < 2 {
            return Err(CliError::Usage("folds must be at least 2".into()));
        }
        // the sample rate is not known yet; check against a typical one
        self.yin()
            .validate(22050)
            .map_err(|e| CliError::Usage(e.to_string()))
    }

    pub fn traversal(&self) -> Result<TraversalParams, CliError> {
        let self_edges = match self.self_edge_policy {
            SelfEdgeMode::Skip => SelfEdgePolicy::Skip,
            SelfEdgeMode::Allow => SelfEdgePolicy::Allow,
        };
        TraversalParams::new(self.ws, self.st)
            .map(|p| p.with_self_edges(self_edges))
            .map_err(|e| CliError::Usage(e.to_string()))
    }

    pub fn yin(&self) -> YinConfig {
        YinConfig {
            fmin_hz: self.fmin_hz,
            fmax_hz: self.fmax_hz,
            frame_len: self.frame_len,
            hop_len: self.hop_len,
            threshold: self.yin_threshold,
        }
    }

    pub fn sharp(&self) -> SharpPolicy {
        match self.sharp_policy {
            SharpMode::Strip => SharpPolicy::Strip,
            SharpMode::Drop => SharpPolicy::Drop,
        }
    }

    pub fn scope(&self) -> RescaleScope {
        match self.rescale_scope {
            ScaleMode::Global => RescaleScope::Global,
            ScaleMode::TrainOnly => RescaleScope::TrainOnly,
        }
    }

    pub fn cv_options(&self) -> CvOptions {
        CvOptions {
            folds: self.folds,
            knn_k: self.knn_k,
            seed: self.seed,
            scope: self.scope(),
            grouping: match self.fold_grouping {
                GroupMode::Segment => FoldGrouping::Segment,
                GroupMode::Source => FoldGrouping::Source,
            },
        }
    }
}

/// Command-line overrides; unset flags keep the base configuration's value.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct ConfigArgs {
    /// Start from a saved config sidecar instead of the defaults.
    #[arg(long, value_name = "FILE")]
    pub config: Option<std::path::PathBuf>,
    /// Word size in characters of the rendered note string.
    #[arg(long)]
    pub ws: Option<usize>,
    /// Step size in characters.
    #[arg(long)]
    pub st: Option<usize>,
    /// Highest threshold level T; features span levels 0..=T.
    #[arg(long)]
    pub t_max: Option<u32>,
    /// Segment length in seconds.
    #[arg(long)]
    pub seg_len: Option<f64>,
    /// Segments taken per audio file.
    #[arg(long)]
    pub max_segments: Option<usize>,
    #[arg(long)]
    pub fmin: Option<f64>,
    #[arg(long)]
    pub fmax: Option<f64>,
    /// Pitch-tracker frame length in samples.
    #[arg(long)]
    pub frame_len: Option<usize>,
    /// Pitch-tracker hop in samples.
    #[arg(long)]
    pub hop_len: Option<usize>,
    /// YIN absolute threshold.
    #[arg(long)]
    pub yin_threshold: Option<f64>,
    /// Neighbours consulted by the classifier.
    #[arg(long)]
    pub knn_k: Option<usize>,
    #[arg(long)]
    pub folds: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum)]
    pub sharp_policy: Option<SharpMode>,
    #[arg(long, value_enum)]
    pub self_edge_policy: Option<SelfEdgeMode>,
    #[arg(long, value_enum)]
    pub rescale_scope: Option<ScaleMode>,
    /// Assign folds per segment or keep each source's segments together.
    #[arg(long, value_enum)]
    pub fold_grouping: Option<GroupMode>,
}

impl ConfigArgs {
    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut c = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        macro_rules! set {
            ($($flag:ident => $field:ident),* $(,)?) => {
                $(if let Some(v) = self.$flag { c.$field = v; })*
            };
        }
        set!(
            ws => ws, st => st, t_max => t_max, seg_len => seg_len_s,
            max_segments => max_segments, fmin => fmin_hz, fmax => fmax_hz,
            frame_len => frame_len, hop_len => hop_len, yin_threshold => yin_threshold,
            knn_k => knn_k, folds => folds, seed => seed, sharp_policy => sharp_policy,
            self_edge_policy => self_edge_policy, rescale_scope => rescale_scope,
            fold_grouping => fold_grouping,
        );
        c.validate()?;
        Ok(c)
    }
}
