// SPDX-License-Identifier: Apache-2.0

//! Audio decoding, fixed-length segmentation and YIN fundamental-frequency
//! tracking.
//!
//! The tracker follows the usual YIN steps on each frame:
//!
//! 1. difference function `d(τ) = Σ_j (x_j − x_{j+τ})²` over a window of
//!    `frame_len / 2` samples,
//! 2. cumulative-mean normalization `d'(τ) = d(τ) · τ / Σ_{i=1..τ} d(i)`,
//! 3. absolute threshold: the first `τ` with `d'(τ)` under the threshold,
//!    walked down to the bottom of its dip,
//! 4. parabolic interpolation around that minimum.
//!
//! The search starts at the smallest lag, not at the lag of `fmax`, so an
//! out-of-band tone is found at its true period and rejected instead of being
//! reported as a sub-harmonic that happens to land inside the band.

use std::path::Path;

use thiserror::Error;

pub const DEFAULT_FMIN_HZ: f64 = 65.0;
pub const DEFAULT_FMAX_HZ: f64 = 2093.0;
pub const DEFAULT_FRAME_LEN: usize = 2048;
pub const DEFAULT_HOP_LEN: usize = 512;
pub const DEFAULT_YIN_THRESHOLD: f64 = 0.1;
pub const DEFAULT_SEGMENT_SECONDS: f64 = 3.0;
pub const DEFAULT_MAX_SEGMENTS: usize = 10;

#[derive(Debug, Error)]
pub enum AudioError {
    #[error("cannot read audio file {path}: {source}")]
    Decode {
        path: String,
        #[source]
        source: hound::Error,
    },
    #[error("audio file {0} contains no samples")]
    Empty(String),
    #[error("invalid audio: {0}")]
    Invalid(String),
    #[error("invalid pitch-tracker configuration: {0}")]
    Config(String),
}

/// A mono clip with amplitudes in `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioClip {
    pub samples: Vec<f64>,
    pub sample_rate: u32,
    pub source_id: String,
    pub label: String,
}

impl AudioClip {
    pub fn new(
        samples: Vec<f64>,
        sample_rate: u32,
        source_id: impl Into<String>,
        label: impl Into<String>,
    ) -> Result<Self, AudioError> {
        if sample_rate == 0 {
            return Err(AudioError::Invalid("sample rate must be positive".into()));
        }
        if samples.is_empty() {
            return Err(AudioError::Invalid("clip has no samples".into()));
        }
        if samples.iter().any(|s| !s.is_finite()) {
            return Err(AudioError::Invalid("clip contains non-finite samples".into()));
        }
        Ok(AudioClip {
            samples,
            sample_rate,
            source_id: source_id.into(),
            label: label.into(),
        })
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }
}

/// One fixed-length window of a clip.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub samples: Vec<f64>,
    pub sample_rate: u32,
    pub source_id: String,
    pub label: String,
    pub segment_index: usize,
}

impl Segment {
    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }
}

/// Per-frame pitch estimates. `None` marks an unvoiced frame.
#[derive(Debug, Clone, PartialEq)]
pub struct F0Track {
    frames: Vec<(f64, Option<f64>)>,
    fmin_hz: f64,
    fmax_hz: f64,
}

impl F0Track {
    /// Builds a track from raw frames. Voiced values outside the band are
    /// demoted to unvoiced so the band invariant always holds.
    ///
    /// Panics if frame times are not strictly increasing.
    pub fn from_frames(frames: Vec<(f64, Option<f64>)>, fmin_hz: f64, fmax_hz: f64) -> Self {
        assert!(
            frames.windows(2).all(|w| w[0].0 < w[1].0),
            "frame times must be strictly increasing"
        );
        let frames = frames
            .into_iter()
            .map(|(t, f)| (t, f.filter(|&hz| hz >= fmin_hz && hz <= fmax_hz)))
            .collect();
        F0Track {
            frames,
            fmin_hz,
            fmax_hz,
        }
    }

    pub fn frames(&self) -> &[(f64, Option<f64>)] {
        &self.frames
    }

    pub fn fmin_hz(&self) -> f64 {
        self.fmin_hz
    }

    pub fn fmax_hz(&self) -> f64 {
        self.fmax_hz
    }

    /// Voiced frequencies in frame order.
    pub fn voiced(&self) -> impl Iterator<Item = f64> + '_ {
        self.frames.iter().filter_map(|&(_, f)| f)
    }

    pub fn voiced_count(&self) -> usize {
        self.voiced().count()
    }
}

/// Reads a PCM or float WAV file, downmixing to mono by channel mean.
pub fn decode_audio(
    path: impl AsRef<Path>,
    source_id: impl Into<String>,
    label: impl Into<String>,
) -> Result<AudioClip, AudioError> {
    let path = path.as_ref();
    let shown = path.display().to_string();
    let wrap = |source| AudioError::Decode {
        path: shown.clone(),
        source,
    };
    let mut reader = hound::WavReader::open(path).map_err(wrap)?;
    let spec = reader.spec();
    let channels = spec.channels as usize;
    if channels == 0 {
        return Err(AudioError::Invalid(format!("{shown}: zero channels")));
    }

    let interleaved: Vec<f64> = match spec.sample_format {
        hound::SampleFormat::Float => reader
            .samples::<f32>()
            .map(|s| s.map(|v| (v as f64).clamp(-1.0, 1.0)))
            .collect::<Result<_, _>>()
            .map_err(wrap)?,
        hound::SampleFormat::Int => {
            let scale = (1i64 << (spec.bits_per_sample - 1)) as f64;
            reader
                .samples::<i32>()
                .map(|s| s.map(|v| v as f64 / scale))
                .collect::<Result<_, _>>()
                .map_err(wrap)?
        }
    };
    if interleaved.len() < channels {
        return Err(AudioError::Empty(shown));
    }

    let samples = if channels == 1 {
        interleaved
    } else {
        interleaved
            .chunks_exact(channels)
            .map(|frame| frame.iter().sum::<f64>() / channels as f64)
            .collect()
    };
    AudioClip::new(samples, spec.sample_rate, source_id, label)
}

/// Cuts consecutive, non-overlapping windows from the start of the clip. A
/// trailing partial window is discarded, so a clip shorter than one window
/// yields no segments.
pub fn segment_clip(
    clip: &AudioClip,
    seg_len_s: f64,
    max_segments: usize,
) -> Result<Vec<Segment>, AudioError> {
    if !(seg_len_s.is_finite() && seg_len_s > 0.0) {
        return Err(AudioError::Config(format!(
            "segment length must be positive, got {seg_len_s}"
        )));
    }
    let window = (seg_len_s * clip.sample_rate as f64).round() as usize;
    if window == 0 {
        return Err(AudioError::Config(format!(
            "segment length {seg_len_s} s is shorter than one sample"
        )));
    }
    Ok(clip
        .samples
        .chunks_exact(window)
        .take(max_segments)
        .enumerate()
        .map(|(i, chunk)| Segment {
            samples: chunk.to_vec(),
            sample_rate: clip.sample_rate,
            source_id: clip.source_id.clone(),
            label: clip.label.clone(),
            segment_index: i,
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct YinConfig {
    pub fmin_hz: f64,
    pub fmax_hz: f64,
    pub frame_len: usize,
    pub hop_len: usize,
    /// Absolute threshold on the cumulative-mean-normalized difference.
    pub threshold: f64,
}

impl Default for YinConfig {
    fn default() -> Self {
        YinConfig {
            fmin_hz: DEFAULT_FMIN_HZ,
            fmax_hz: DEFAULT_FMAX_HZ,
            frame_len: DEFAULT_FRAME_LEN,
            hop_len: DEFAULT_HOP_LEN,
            threshold: DEFAULT_YIN_THRESHOLD,
        }
    }
}

impl YinConfig {
    /// Longest lag searched at the given rate, one past the period of `fmin`
    /// so the interpolation has a right neighbour.
    fn max_lag(&self, sample_rate: u32) -> usize {
        (sample_rate as f64 / self.fmin_hz).ceil() as usize + 1
    }

    pub fn validate(&self, sample_rate: u32) -> Result<(), AudioError> {
        let cfg = |m: String| Err(AudioError::Config(m));
        if !(self.fmin_hz.is_finite() && self.fmin_hz > 0.0) {
            return cfg(format!("fmin must be positive, got {}", self.fmin_hz));
        }
        if !(self.fmax_hz.is_finite() && self.fmax_hz > self.fmin_hz) {
            return cfg(format!(
                "fmax ({}) must exceed fmin ({})",
                self.fmax_hz, self.fmin_hz
            ));
        }
        if self.hop_len == 0 {
            return cfg("hop length must be at least one sample".into());
        }
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return cfg(format!("threshold must lie in (0, 1), got {}", self.threshold));
        }
        if sample_rate == 0 {
            return cfg("sample rate must be positive".into());
        }
        let lag = self.max_lag(sample_rate);
        if self.frame_len / 2 < lag {
            return cfg(format!(
                "frame length {} is too short for fmin {} Hz at {} Hz: need at least {} samples",
                self.frame_len,
                self.fmin_hz,
                sample_rate,
                2 * lag
            ));
        }
        Ok(())
    }
}

/// Tracks the fundamental frequency of a segment frame by frame.
pub fn estimate_f0(segment: &Segment, config: &YinConfig) -> Result<F0Track, AudioError> {
    estimate_f0_samples(&segment.samples, segment.sample_rate, config)
}

pub fn estimate_f0_samples(
    samples: &[f64],
    sample_rate: u32,
    config: &YinConfig,
) -> Result<F0Track, AudioError> {
    config.validate(sample_rate)?;
    let mut yin = Yin::new(config, sample_rate);
    let frame_len = config.frame_len;
    let mut frames = Vec::new();
    if samples.len() >= frame_len {
        let count = 1 + (samples.len() - frame_len) / config.hop_len;
        frames.reserve(count);
        for i in 0..count {
            let start = i * config.hop_len;
            let t = (start as f64 + frame_len as f64 / 2.0) / sample_rate as f64;
            frames.push((t, yin.frame(&samples[start..start + frame_len])));
        }
    }
    Ok(F0Track::from_frames(frames, config.fmin_hz, config.fmax_hz))
}

struct Yin {
    sample_rate: f64,
    window: usize,
    max_lag: usize,
    threshold: f64,
    fmin: f64,
    fmax: f64,
    diff: Vec<f64>,
}

impl Yin {
    fn new(config: &YinConfig, sample_rate: u32) -> Self {
        let max_lag = config.max_lag(sample_rate);
        Yin {
            sample_rate: sample_rate as f64,
            window: config.frame_len / 2,
            max_lag,
            threshold: config.threshold,
            fmin: config.fmin_hz,
            fmax: config.fmax_hz,
            diff: vec![0.0; max_lag + 1],
        }
    }

    fn frame(&mut self, frame: &[f64]) -> Option<f64> {
        let w = self.window;
        let d = &mut self.diff;

        // STEP 1: difference function
        for (tau, slot) in d.iter_mut().enumerate() {
            *slot = frame[..w]
                .iter()
                .zip(&frame[tau..tau + w])
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
        }

        // STEP 2: cumulative mean normalization, in place
        d[0] = 1.0;
        let mut running = 0.0;
        for (tau, v) in d.iter_mut().enumerate().skip(1) {
            running += *v;
            *v = if running > 0.0 { *v * tau as f64 / running } else { 1.0 };
        }

        // STEP 3: first dip under the threshold, then down to its minimum
        let last = self.max_lag - 1;
        let mut tau = 2;
        while tau <= last && d[tau] >= self.threshold {
            tau += 1;
        }
        if tau > last {
            return None;
        }
        while tau < last && d[tau + 1] < d[tau] {
            tau += 1;
        }

        // STEP 4: parabolic interpolation
        let (a, b, c) = (d[tau - 1], d[tau], d[tau + 1]);
        let denom = a - 2.0 * b + c;
        let shift = if denom.abs() > f64::EPSILON {
            (0.5 * (a - c) / denom).clamp(-1.0, 1.0)
        } else {
            0.0
        };
        let period = tau as f64 + shift;
        let f0 = self.sample_rate / period;
        (f0 >= self.fmin && f0 <= self.fmax).then_some(f0)
    }
}
