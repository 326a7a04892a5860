// SPDX-License-Identifier: Apache-2.0

//! Shared inputs for the benchmarks.

use notenet_core::notes::{Letter, NoteSequence, NoteSymbol};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const LETTERS: [Letter; 7] = [
    Letter::C,
    Letter::D,
    Letter::E,
    Letter::F,
    Letter::G,
    Letter::A,
    Letter::B,
];

/// A random walk over the natural notes of octaves 2..=6 with steps of up to
/// `max_step` scale degrees.
pub fn random_walk_sequence(len: usize, max_step: i64, seed: u64) -> NoteSequence {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let span = 5 * 7;
    let mut pos: i64 = span / 2;
    let notes = (0..len)
        .map(|_| {
            pos = (pos + rng.random_range(-max_step..=max_step)).rem_euclid(span);
            NoteSymbol::new(LETTERS[(pos % 7) as usize], 2 + (pos / 7) as u8).unwrap()
        })
        .collect();
    NoteSequence::new(format!("bench-{seed}"), 0, "bench", notes)
}

/// A sine at `freq` Hz, `seconds` long.
pub fn sine(freq: f64, seconds: f64, sample_rate: u32) -> Vec<f64> {
    let n = (seconds * sample_rate as f64).round() as usize;
    (0..n)
        .map(|i| 0.5 * (2.0 * std::f64::consts::PI * freq * i as f64 / sample_rate as f64).sin())
        .collect()
}
