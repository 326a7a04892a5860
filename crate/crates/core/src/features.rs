// SPDX-License-Identifier: Apache-2.0

//! Multi-scale feature vectors: measure a network at successive weight
//! thresholds, concatenate the per-level vectors, and Min-Max rescale the
//! resulting matrix column by column.

use std::io::{Read, Write};

use rayon::prelude::*;
use thiserror::Error;

use crate::network::{build_network, TraversalParams, WeightedGraph};
use crate::notes::NoteSequence;
use crate::topology::{measure_all, MeasurementVector, MEASURE_COUNT, MEASURE_NAMES};

/// Leading non-feature columns of the CSV format.
pub const KEY_COLUMNS: [&str; 3] = ["source_id", "segment_index", "label"];

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("matrix building needs a fixed threshold count; until-empty plans give ragged rows")]
    RaggedPlan,
    #[error("matrix is already rescaled")]
    AlreadyRescaled,
    #[error("row width {found} does not match the {expected} feature columns")]
    WidthMismatch { expected: usize, found: usize },
    #[error("feature CSV line {line}: {reason}")]
    Parse { line: u64, reason: String },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// How many threshold levels to measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThresholdPlan {
    /// Levels `0..=T`, always `T + 1` vectors.
    Fixed(u32),
    /// Levels `0, 1, ...` up to and including the first level whose pruned
    /// network has no edges.
    UntilEmpty,
}

/// Measures `g` at each threshold level of the plan. Level `t` keeps edges of
/// weight `> t`; levels whose pruned network is empty measure as all zeros.
pub fn extract_features<N: Ord + Clone>(
    g: &WeightedGraph<N>,
    plan: ThresholdPlan,
) -> Vec<MeasurementVector> {
    let mut out = Vec::new();
    let mut level = 0u32;
    loop {
        let pruned = g.prune(level);
        let empty = pruned.is_empty();
        out.push(if empty {
            MeasurementVector::ZERO
        } else {
            measure_all(&pruned)
        });
        match plan {
            ThresholdPlan::Fixed(t) => {
                if level >= t {
                    break;
                }
                if empty {
                    // nothing left to prune
                    out.resize((t + 1) as usize, MeasurementVector::ZERO);
                    break;
                }
            }
            ThresholdPlan::UntilEmpty if empty => break,
            ThresholdPlan::UntilEmpty => {}
        }
        level += 1;
    }
    out
}

/// `<MEASURE>_t<level>` names, level-major.
pub fn column_names(levels: usize) -> Vec<String> {
    (0..levels)
        .flat_map(|t| MEASURE_NAMES.iter().map(move |m| format!("{m}_t{t}")))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRow {
    pub source_id: String,
    pub segment_index: usize,
    pub label: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub column_names: Vec<String>,
    pub rows: Vec<FeatureRow>,
    pub rescaled: bool,
}

impl FeatureMatrix {
    pub fn empty(column_names: Vec<String>) -> Self {
        FeatureMatrix {
            column_names,
            rows: Vec::new(),
            rescaled: false,
        }
    }

    pub fn width(&self) -> usize {
        self.column_names.len()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn labels(&self) -> Vec<&str> {
        self.rows.iter().map(|r| r.label.as_str()).collect()
    }

    pub fn column(&self, k: usize) -> impl Iterator<Item = f64> + '_ {
        self.rows.iter().map(move |r| r.values[k])
    }

    /// The first `width` columns. Rescaling state is carried over.
    pub fn prefix(&self, width: usize) -> FeatureMatrix {
        let width = width.min(self.width());
        FeatureMatrix {
            column_names: self.column_names[..width].to_vec(),
            rows: self
                .rows
                .iter()
                .map(|r| FeatureRow {
                    values: r.values[..width].to_vec(),
                    ..r.clone()
                })
                .collect(),
            rescaled: self.rescaled,
        }
    }

    pub fn push(&mut self, row: FeatureRow) -> Result<(), FeatureError> {
        if row.values.len() != self.width() {
            return Err(FeatureError::WidthMismatch {
                expected: self.width(),
                found: row.values.len(),
            });
        }
        self.rows.push(row);
        Ok(())
    }
}

/// Feature row for one segment under a fixed plan.
pub fn segment_row(seq: &NoteSequence, params: &TraversalParams, plan: ThresholdPlan) -> FeatureRow {
    let g = build_network(seq, params);
    FeatureRow {
        source_id: seq.source_id.clone(),
        segment_index: seq.segment_index,
        label: seq.label.clone(),
        values: extract_features(&g, plan)
            .iter()
            .flat_map(|v| v.to_array())
            .collect(),
    }
}

/// One row per segment, `10 · (T + 1)` columns. Rows keep the input order.
pub fn build_matrix(
    segments: &[NoteSequence],
    params: &TraversalParams,
    plan: ThresholdPlan,
) -> Result<FeatureMatrix, FeatureError> {
    let ThresholdPlan::Fixed(t) = plan else {
        return Err(FeatureError::RaggedPlan);
    };
    let rows = segments
        .par_iter()
        .map(|s| segment_row(s, params, plan))
        .collect();
    Ok(FeatureMatrix {
        column_names: column_names(t as usize + 1),
        rows,
        rescaled: false,
    })
}

/// Per-column minimum and maximum.
#[derive(Debug, Clone, PartialEq)]
pub struct MinMaxScaler {
    mins: Vec<f64>,
    maxs: Vec<f64>,
}

impl MinMaxScaler {
    /// Column statistics over the given rows. With no rows every column is
    /// treated as constant.
    pub fn fit<'a>(width: usize, rows: impl IntoIterator<Item = &'a [f64]>) -> Self {
        let mut mins = vec![f64::INFINITY; width];
        let mut maxs = vec![f64::NEG_INFINITY; width];
        for row in rows {
            for (k, &v) in row.iter().enumerate() {
                mins[k] = mins[k].min(v);
                maxs[k] = maxs[k].max(v);
            }
        }
        for k in 0..width {
            if mins[k] > maxs[k] {
                mins[k] = 0.0;
                maxs[k] = 0.0;
            }
        }
        MinMaxScaler { mins, maxs }
    }

    /// `(v − min) / (max − min)`; constant columns map to 0. Values outside
    /// the fitted range land outside `[0, 1]`.
    pub fn transform(&self, values: &[f64]) -> Vec<f64> {
        values
            .iter()
            .enumerate()
            .map(|(k, &v)| {
                let span = self.maxs[k] - self.mins[k];
                if span > 0.0 {
                    (v - self.mins[k]) / span
                } else {
                    0.0
                }
            })
            .collect()
    }
}

/// Min-Max rescales every column using statistics over all rows.
pub fn minmax_rescale(m: &FeatureMatrix) -> Result<FeatureMatrix, FeatureError> {
    if m.rescaled {
        return Err(FeatureError::AlreadyRescaled);
    }
    let scaler = MinMaxScaler::fit(m.width(), m.rows.iter().map(|r| r.values.as_slice()));
    let rows = m
        .rows
        .iter()
        .map(|r| FeatureRow {
            values: scaler.transform(&r.values),
            ..r.clone()
        })
        .collect();
    Ok(FeatureMatrix {
        column_names: m.column_names.clone(),
        rows,
        rescaled: true,
    })
}

/// Renders a value with 9 significant digits, `%.9g` style.
pub fn format_value(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let sci = format!("{v:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..9).contains(&exp) {
        return format!("{}e{exp}", trim_zeros(mantissa));
    }
    let decimals = (8 - exp) as usize;
    trim_zeros(&format!("{v:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn write_csv<W: Write>(m: &FeatureMatrix, sink: W) -> Result<(), FeatureError> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(sink);
    w.write_record(KEY_COLUMNS.iter().copied().chain(m.column_names.iter().map(String::as_str)))?;
    for row in &m.rows {
        let mut record = vec![
            row.source_id.clone(),
            row.segment_index.to_string(),
            row.label.clone(),
        ];
        record.extend(row.values.iter().map(|&v| format_value(v)));
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

/// Parses a feature CSV. The file does not record whether it was rescaled,
/// so the caller states it.
pub fn read_csv<R: Read>(source: R, rescaled: bool) -> Result<FeatureMatrix, FeatureError> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(source);
    let header = r.headers()?.clone();
    let fields: Vec<&str> = header.iter().collect();
    if fields.len() < KEY_COLUMNS.len() || fields[..3] != KEY_COLUMNS {
        return Err(FeatureError::Parse {
            line: 1,
            reason: format!("header must start with {}", KEY_COLUMNS.join(",")),
        });
    }
    let mut m = FeatureMatrix::empty(fields[3..].iter().map(|s| s.to_string()).collect());
    m.rescaled = rescaled;
    for record in r.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let err = |reason: String| FeatureError::Parse { line, reason };
        let segment_index = record[1]
            .parse()
            .map_err(|_| err(format!("bad segment index {:?}", &record[1])))?;
        let values = record
            .iter()
            .skip(3)
            .map(|s| match s.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(err(format!("bad value {s:?}"))),
            })
            .collect::<Result<Vec<_>, _>>()?;
        m.push(FeatureRow {
            source_id: record[0].to_string(),
            segment_index,
            label: record[2].to_string(),
            values,
        })?;
    }
    Ok(m)
}

/// Sanity check used when loading a matrix that claims to be rescaled.
pub fn within_unit_interval(m: &FeatureMatrix) -> bool {
    m.rows
        .iter()
        .all(|r| r.values.iter().all(|v| (0.0..=1.0).contains(v)))
}

/// Number of threshold levels represented by a matrix width.
pub fn levels_for_width(width: usize) -> Option<usize> {
    (width % MEASURE_COUNT == 0).then_some(width / MEASURE_COUNT)
}
