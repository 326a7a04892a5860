// SPDX-License-Identifier: Apache-2.0

//! Audio-to-features path on synthesized melodies.

use notenet_core::features::{build_matrix, minmax_rescale, ThresholdPlan};
use notenet_core::network::{build_network, write_edge_list, TraversalParams};
use notenet_core::notes::{track_to_sequence, SharpPolicy};
use notenet_core::pitch::{estimate_f0, segment_clip, AudioClip, YinConfig};

const SR: u32 = 22050;

/// Each note held for `hold` seconds.
fn melody(freqs: &[f64], hold: f64) -> Vec<f64> {
    let per = (hold * SR as f64) as usize;
    let mut phase = 0.0f64;
    let mut out = Vec::with_capacity(per * freqs.len());
    for &f in freqs {
        for _ in 0..per {
            out.push(0.5 * phase.sin());
            phase += 2.0 * std::f64::consts::PI * f / SR as f64;
        }
    }
    out
}

fn collapse_runs(notes: &[String]) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for n in notes {
        if out.last() != Some(n) {
            out.push(n.clone());
        }
    }
    out
}

#[test]
fn melody_becomes_expected_notes_and_edges() {
    // G3, C2, B2, C2 as in the mapping walkthrough; the tail past 3 s is cut off
    let freqs = [196.00, 65.41, 123.47, 65.41];
    let clip = AudioClip::new(melody(&freqs, 0.8), SR, "tune", "demo").unwrap();
    let segments = segment_clip(&clip, 3.0, 10).unwrap();
    assert_eq!(segments.len(), 1);

    let track = estimate_f0(&segments[0], &YinConfig::default()).unwrap();
    let seq = track_to_sequence(&track, SharpPolicy::Strip, "tune", 0, "demo");
    let names: Vec<String> = seq.notes.iter().map(|n| n.to_string()).collect();
    // frames straddling a note change may land on either note, never elsewhere
    assert!(names.iter().all(|n| ["G3", "C2", "B2"].contains(&n.as_str())), "{names:?}");
    assert_eq!(collapse_runs(&names), vec!["G3", "C2", "B2", "C2"]);

    let g = build_network(&seq, &TraversalParams::default());
    let mut dump = Vec::new();
    write_edge_list(&g, &mut dump).unwrap();
    assert_eq!(String::from_utf8(dump).unwrap(), "B2 C2 2\nC2 G3 1\n");
}

#[test]
fn thirty_second_clip_gives_ten_rescaled_rows() {
    let freqs: Vec<f64> = (0..60).map(|i| 110.0 * 2f64.powf(((i * 5) % 24) as f64 / 12.0)).collect();
    let clip = AudioClip::new(melody(&freqs, 0.5), SR, "long", "demo").unwrap();
    assert_eq!(clip.samples.len(), 30 * SR as usize);
    let segments = segment_clip(&clip, 3.0, 10).unwrap();
    assert_eq!(segments.len(), 10);

    let cfg = YinConfig::default();
    let seqs: Vec<_> = segments
        .iter()
        .map(|s| {
            let t = estimate_f0(s, &cfg).unwrap();
            track_to_sequence(&t, SharpPolicy::Strip, &s.source_id, s.segment_index, &s.label)
        })
        .collect();
    assert!(seqs.iter().all(|s| !s.notes.is_empty()));

    let m = build_matrix(&seqs, &TraversalParams::default(), ThresholdPlan::Fixed(3)).unwrap();
    assert_eq!((m.len(), m.width()), (10, 40));
    let r = minmax_rescale(&m).unwrap();
    assert!(r.rows.iter().flat_map(|row| &row.values).all(|v| (0.0..=1.0).contains(v)));
}
