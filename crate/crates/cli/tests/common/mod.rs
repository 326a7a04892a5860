// SPDX-License-Identifier: Apache-2.0

//! Synthetic audio and manifests for the end-to-end tests.

#![allow(dead_code)]

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const SR: u32 = 8000;

/// Natural-note frequencies from C2 upwards.
pub fn natural_freqs(count: usize) -> Vec<f64> {
    const STEPS: [i32; 7] = [0, 2, 4, 5, 7, 9, 11];
    (0..count)
        .map(|i| {
            let midi = 36 + 12 * (i / 7) as i32 + STEPS[i % 7];
            440.0 * 2f64.powf((midi - 69) as f64 / 12.0)
        })
        .collect()
}

/// A random melody of natural notes; `max_step` bounds the jump between
/// consecutive notes in scale degrees.
pub fn melody(seconds: f64, hold: f64, max_step: i64, seed: u64) -> Vec<f32> {
    let scale = natural_freqs(28);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let per = (hold * SR as f64) as usize;
    let total = (seconds * SR as f64) as usize;
    let mut pos: i64 = 14;
    let mut phase = 0.0f64;
    let mut out = Vec::with_capacity(total);
    while out.len() < total {
        pos = (pos + rng.random_range(-max_step..=max_step)).clamp(0, 27);
        let f = scale[pos as usize];
        for _ in 0..per.min(total - out.len()) {
            out.push((0.5 * phase.sin()) as f32);
            phase += 2.0 * std::f64::consts::PI * f / SR as f64;
        }
    }
    out
}

pub fn write_wav(path: &Path, samples: &[f32]) {
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate: SR,
        bits_per_sample: 16,
        sample_format: hound::SampleFormat::Int,
    };
    let mut w = hound::WavWriter::create(path, spec).unwrap();
    for &s in samples {
        w.write_sample((s * i16::MAX as f32) as i16).unwrap();
    }
    w.finalize().unwrap();
}

/// `per_class` 30 s clips for each of two classes, "steps" and "leaps".
/// Returns the manifest path.
pub fn two_class_corpus(dir: &Path, per_class: usize) -> PathBuf {
    let mut manifest = String::from("path,label,source_id\n");
    for (label, max_step) in [("steps", 1), ("leaps", 9)] {
        for i in 0..per_class {
            let name = format!("{label}{i}.wav");
            write_wav(&dir.join(&name), &melody(30.0, 0.25, max_step, 100 * max_step as u64 + i as u64));
            manifest.push_str(&format!("{name},{label},{label}{i}\n"));
        }
    }
    let path = dir.join("manifest.csv");
    std::fs::write(&path, manifest).unwrap();
    path
}
