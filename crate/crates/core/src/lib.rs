// SPDX-License-Identifier: Apache-2.0

//! Genre features from note-sequence networks.
//!
//! A monophonic pitch track is quantized to natural note names, the note
//! sequence is mapped to an undirected network whose edge weights count how
//! often two notes are adjacent, and the network is described by ten
//! topological measurements taken at increasing edge-weight thresholds.
//!
//! * [`pitch`]: WAV decoding, segmentation and YIN pitch tracking
//! * [`notes`]: note quantization and the sequence text format
//! * [`network`]: sequence-to-network mapping and threshold pruning
//! * [`topology`]: the ten measurements
//! * [`features`]: threshold sweep, feature matrix, Min-Max rescaling
//! * [`eval`]: stratified cross-validation of a k-NN baseline

pub mod eval;
pub mod features;
pub mod network;
pub mod notes;
pub mod pitch;
pub mod topology;

pub use eval::{cross_validate, knn_classify, stratified_folds, CvOptions, CvReport, FoldGrouping, RescaleScope};
pub use features::{
    build_matrix, extract_features, minmax_rescale, FeatureMatrix, FeatureRow, ThresholdPlan,
};
pub use network::{build_network, prune_by_weight, SelfEdgePolicy, TraversalParams, WeightedGraph, Word};
pub use notes::{freq_to_note, track_to_sequence, NoteSequence, NoteSymbol, SharpPolicy};
pub use pitch::{decode_audio, estimate_f0, segment_clip, AudioClip, F0Track, Segment, YinConfig};
pub use topology::{measure_all, MeasurementVector, MEASURE_NAMES};
