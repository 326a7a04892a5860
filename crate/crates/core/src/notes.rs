// SPDX-License-Identifier: Apache-2.0

//! Note quantization and the note-sequence text format.
//!
//! Frequencies are snapped to the nearest equal-tempered pitch (A4 = 440 Hz)
//! and rendered as a natural letter plus a single octave digit. Sharps are
//! either folded into the natural below them (`C#4` becomes `C4`) or dropped,
//! depending on [`SharpPolicy`].
//!
//! A sequence file holds one segment per line:
//!
//! ```text
//! blues.00000,0,blues: G3 C2 B2 C2
//! ```

use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use thiserror::Error;

use crate::pitch::F0Track;

/// Width in characters of a rendered [`NoteSymbol`].
pub const TOKEN_WIDTH: usize = 2;

const A4_HZ: f64 = 440.0;
const A4_MIDI: f64 = 69.0;

#[derive(Debug, Error, PartialEq)]
pub enum NoteError {
    #[error("frequency must be positive and finite, got {0}")]
    InvalidFrequency(f64),
    #[error("frequency {hz} Hz maps to octave {octave}, which has no single-digit name")]
    OctaveOutOfRange { hz: f64, octave: i64 },
    #[error("line {line}, column {column}: malformed note token {token:?}")]
    MalformedToken {
        line: usize,
        column: usize,
        token: String,
    },
    #[error("line {line}: {reason}")]
    MalformedLine { line: usize, reason: String },
    #[error("cannot serialize field {field} = {value:?}: {reason}")]
    Unserializable {
        field: &'static str,
        value: String,
        reason: &'static str,
    },
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for NoteError {
    fn from(e: std::io::Error) -> Self {
        NoteError::Io(e.to_string())
    }
}

/// Natural pitch letter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Letter {
    C,
    D,
    E,
    F,
    G,
    A,
    B,
}

impl Letter {
    pub fn as_char(self) -> char {
        match self {
            Letter::C => 'C',
            Letter::D => 'D',
            Letter::E => 'E',
            Letter::F => 'F',
            Letter::G => 'G',
            Letter::A => 'A',
            Letter::B => 'B',
        }
    }

    pub fn from_char(c: char) -> Option<Letter> {
        Some(match c {
            'C' => Letter::C,
            'D' => Letter::D,
            'E' => Letter::E,
            'F' => Letter::F,
            'G' => Letter::G,
            'A' => Letter::A,
            'B' => Letter::B,
            _ => return None,
        })
    }
}

/// What to do with frames that quantize to a sharp.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SharpPolicy {
    /// Remove the `#`, merging the sharp into the natural below it.
    #[default]
    Strip,
    /// Discard the frame.
    Drop,
}

/// A natural note with its octave, e.g. `G3`. Ordering follows pitch height.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NoteSymbol {
    // field order matters for the derived Ord: octave first, then letter
    octave: u8,
    letter: Letter,
}

impl NoteSymbol {
    pub fn new(letter: Letter, octave: u8) -> Result<Self, NoteError> {
        if octave > 9 {
            return Err(NoteError::OctaveOutOfRange {
                hz: f64::NAN,
                octave: octave as i64,
            });
        }
        Ok(NoteSymbol { octave, letter })
    }

    pub fn letter(&self) -> Letter {
        self.letter
    }

    pub fn octave(&self) -> u8 {
        self.octave
    }
}

impl fmt::Display for NoteSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.letter.as_char(), self.octave)
    }
}

impl FromStr for NoteSymbol {
    type Err = NoteError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_token(s, 1, 1)
    }
}

fn parse_token(token: &str, line: usize, column: usize) -> Result<NoteSymbol, NoteError> {
    let bad = || NoteError::MalformedToken {
        line,
        column,
        token: token.to_string(),
    };
    let mut chars = token.chars();
    let (Some(l), Some(o), None) = (chars.next(), chars.next(), chars.next()) else {
        return Err(bad());
    };
    let letter = Letter::from_char(l).ok_or_else(bad)?;
    let octave = o.to_digit(10).ok_or_else(bad)? as u8;
    Ok(NoteSymbol { octave, letter })
}

/// Nearest equal-tempered MIDI number for a frequency.
pub fn midi_number(f0_hz: f64) -> Result<i64, NoteError> {
    if !(f0_hz.is_finite() && f0_hz > 0.0) {
        return Err(NoteError::InvalidFrequency(f0_hz));
    }
    Ok((A4_MIDI + 12.0 * (f0_hz / A4_HZ).log2()).round() as i64)
}

/// Quantize a frequency under the given sharp policy. `Ok(None)` means the
/// frame landed on a sharp and the policy is [`SharpPolicy::Drop`].
pub fn quantize(f0_hz: f64, policy: SharpPolicy) -> Result<Option<NoteSymbol>, NoteError> {
    let midi = midi_number(f0_hz)?;
    let octave = midi.div_euclid(12) - 1;
    if !(0..=9).contains(&octave) {
        return Err(NoteError::OctaveOutOfRange { hz: f0_hz, octave });
    }
    let (letter, sharp) = match midi.rem_euclid(12) {
        0 => (Letter::C, false),
        1 => (Letter::C, true),
        2 => (Letter::D, false),
        3 => (Letter::D, true),
        4 => (Letter::E, false),
        5 => (Letter::F, false),
        6 => (Letter::F, true),
        7 => (Letter::G, false),
        8 => (Letter::G, true),
        9 => (Letter::A, false),
        10 => (Letter::A, true),
        _ => (Letter::B, false),
    };
    if sharp && policy == SharpPolicy::Drop {
        return Ok(None);
    }
    Ok(Some(NoteSymbol {
        octave: octave as u8,
        letter,
    }))
}

/// Nearest natural note, with any sharp folded into its natural.
pub fn freq_to_note(f0_hz: f64) -> Result<NoteSymbol, NoteError> {
    quantize(f0_hz, SharpPolicy::Strip).map(|n| n.expect("strip policy never drops"))
}

/// The notes of one segment, in frame order, plus where they came from.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct NoteSequence {
    pub source_id: String,
    pub segment_index: usize,
    pub label: String,
    pub notes: Vec<NoteSymbol>,
}

impl NoteSequence {
    pub fn new(
        source_id: impl Into<String>,
        segment_index: usize,
        label: impl Into<String>,
        notes: Vec<NoteSymbol>,
    ) -> Self {
        NoteSequence {
            source_id: source_id.into(),
            segment_index,
            label: label.into(),
            notes,
        }
    }

    /// The notes rendered back to back, two characters each.
    pub fn render(&self) -> String {
        let mut s = String::with_capacity(self.notes.len() * TOKEN_WIDTH);
        for n in &self.notes {
            s.push(n.letter.as_char());
            s.push(char::from(b'0' + n.octave));
        }
        s
    }
}

/// One note per voiced frame; unvoiced frames are skipped.
///
/// Voiced frequencies whose octave cannot be written as a single digit are
/// treated like unvoiced frames. The pitch tracker's band keeps them out in
/// practice.
pub fn track_to_sequence(
    track: &F0Track,
    policy: SharpPolicy,
    source_id: impl Into<String>,
    segment_index: usize,
    label: impl Into<String>,
) -> NoteSequence {
    let notes = track
        .voiced()
        .filter_map(|hz| quantize(hz, policy).ok().flatten())
        .collect();
    NoteSequence::new(source_id, segment_index, label, notes)
}

/// Write a single sequence line (without trailing newline handling by the caller).
pub fn write_sequence<W: Write>(seq: &NoteSequence, sink: &mut W) -> Result<(), NoteError> {
    check_field("source_id", &seq.source_id, &['\n', '\r'])?;
    check_field("label", &seq.label, &[',', ':', '\n', '\r'])?;
    if seq.label.is_empty() {
        return Err(NoteError::Unserializable {
            field: "label",
            value: String::new(),
            reason: "must not be empty",
        });
    }
    write!(sink, "{},{},{}:", seq.source_id, seq.segment_index, seq.label)?;
    for n in &seq.notes {
        write!(sink, " {n}")?;
    }
    writeln!(sink)?;
    Ok(())
}

fn check_field(field: &'static str, value: &str, forbidden: &[char]) -> Result<(), NoteError> {
    if value.contains(forbidden) {
        return Err(NoteError::Unserializable {
            field,
            value: value.to_string(),
            reason: "contains a reserved character",
        });
    }
    if value.trim() != value {
        return Err(NoteError::Unserializable {
            field,
            value: value.to_string(),
            reason: "has leading or trailing whitespace",
        });
    }
    Ok(())
}

pub fn write_sequences<'a, W, I>(seqs: I, sink: &mut W) -> Result<(), NoteError>
where
    W: Write,
    I: IntoIterator<Item = &'a NoteSequence>,
{
    for s in seqs {
        write_sequence(s, sink)?;
    }
    Ok(())
}

/// Parse one line of the sequence format. `line_no` is 1-based and only used
/// in error positions.
pub fn parse_sequence_line(line: &str, line_no: usize) -> Result<NoteSequence, NoteError> {
    let malformed = |reason: &str| NoteError::MalformedLine {
        line: line_no,
        reason: reason.to_string(),
    };
    // note tokens never contain ':', so the last one ends the header
    let colon = line.rfind(':').ok_or_else(|| malformed("missing ':' after header"))?;
    let (header, body) = (&line[..colon], &line[colon + 1..]);

    let mut fields = header.rsplitn(3, ',');
    let label = fields.next().unwrap_or_default();
    let index = fields.next().ok_or_else(|| malformed("header needs source_id,segment_index,label"))?;
    let source_id = fields.next().ok_or_else(|| malformed("header needs source_id,segment_index,label"))?;
    if label.is_empty() {
        return Err(malformed("empty label"));
    }
    let segment_index = index
        .parse::<usize>()
        .map_err(|_| malformed(&format!("segment index {index:?} is not a non-negative integer")))?;

    let mut notes = Vec::new();
    let base = colon + 1;
    let mut offset = 0;
    for token in body.split_whitespace() {
        // byte offset of this token inside `body`
        let at = offset + body[offset..].find(token).unwrap_or(0);
        offset = at + token.len();
        let column = line[..base + at].chars().count() + 1;
        notes.push(parse_token(token, line_no, column)?);
    }
    Ok(NoteSequence {
        source_id: source_id.to_string(),
        segment_index,
        label: label.to_string(),
        notes,
    })
}

/// Read the first sequence line from `source`. Blank lines are skipped.
pub fn read_sequence<R: BufRead>(source: R) -> Result<NoteSequence, NoteError> {
    read_sequences(source)?
        .into_iter()
        .next()
        .ok_or_else(|| NoteError::MalformedLine {
            line: 1,
            reason: "no sequence found".into(),
        })
}

/// Read every sequence line from `source`. Blank lines are skipped.
pub fn read_sequences<R: BufRead>(source: R) -> Result<Vec<NoteSequence>, NoteError> {
    let mut out = Vec::new();
    for (i, line) in source.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(parse_sequence_line(&line, i + 1)?);
    }
    Ok(out)
}
