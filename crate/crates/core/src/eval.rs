// SPDX-License-Identifier: Apache-2.0

//! Baseline evaluation: stratified k-fold cross-validation of a k-nearest
//! neighbour classifier over a feature matrix.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::io::Write;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::features::{FeatureMatrix, FeatureRow, MinMaxScaler};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("need at least 2 folds, got {0}")]
    TooFewFolds(usize),
    #[error("class {label:?} has {count} samples, fewer than the {folds} folds")]
    ClassTooSmall {
        label: String,
        count: usize,
        folds: usize,
    },
    #[error("no training data")]
    EmptyTraining,
    #[error("k must be at least 1")]
    ZeroK,
    #[error("query has {found} features but training rows have {expected}")]
    WidthMismatch { expected: usize, found: usize },
    #[error("feature matrix must be rescaled before evaluation with global scaling")]
    NotRescaled,
    #[error("source {0:?} carries more than one label")]
    MixedGroupLabels(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// Where Min-Max statistics come from during cross-validation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RescaleScope {
    /// The matrix was rescaled once over all rows before evaluation.
    #[default]
    Global,
    /// Each fold fits the scaler on its training rows only.
    TrainOnly,
}

/// Unit of fold assignment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FoldGrouping {
    /// Segments are assigned independently.
    #[default]
    Segment,
    /// All segments of one source land in the same fold.
    Source,
}

/// Deals the indices of each class round-robin into `k` folds after a seeded
/// shuffle. Classes are visited in label order and each one starts where the
/// previous left off, so fold sizes stay within one of each other.
pub fn stratified_folds<S: AsRef<str>>(
    labels: &[S],
    k: usize,
    seed: u64,
) -> Result<Vec<Vec<usize>>, EvalError> {
    if k < 2 {
        return Err(EvalError::TooFewFolds(k));
    }
    let mut by_class: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, l) in labels.iter().enumerate() {
        by_class.entry(l.as_ref()).or_default().push(i);
    }
    if let Some((label, members)) = by_class.iter().find(|(_, m)| m.len() < k) {
        return Err(EvalError::ClassTooSmall {
            label: label.to_string(),
            count: members.len(),
            folds: k,
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut folds = vec![Vec::new(); k];
    let mut next = 0;
    for members in by_class.values_mut() {
        members.shuffle(&mut rng);
        for &i in members.iter() {
            folds[next].push(i);
            next = (next + 1) % k;
        }
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    Ok(folds)
}

/// Stratified folds over sources instead of segments.
pub fn grouped_stratified_folds<S: AsRef<str>, G: AsRef<str>>(
    labels: &[S],
    groups: &[G],
    k: usize,
    seed: u64,
) -> Result<Vec<Vec<usize>>, EvalError> {
    assert_eq!(labels.len(), groups.len());
    let mut members: BTreeMap<&str, (Vec<usize>, &str)> = BTreeMap::new();
    for (i, (l, g)) in labels.iter().zip(groups).enumerate() {
        let entry = members.entry(g.as_ref()).or_insert((Vec::new(), l.as_ref()));
        if entry.1 != l.as_ref() {
            return Err(EvalError::MixedGroupLabels(g.as_ref().to_string()));
        }
        entry.0.push(i);
    }
    let units: Vec<&(Vec<usize>, &str)> = members.values().collect();
    let unit_labels: Vec<&str> = units.iter().map(|u| u.1).collect();
    let unit_folds = stratified_folds(&unit_labels, k, seed)?;
    Ok(unit_folds
        .into_iter()
        .map(|f| {
            let mut idx: Vec<usize> = f.into_iter().flat_map(|u| units[u].0.iter().copied()).collect();
            idx.sort_unstable();
            idx
        })
        .collect())
}

/// A training point for [`knn_classify`].
#[derive(Debug, Clone, Copy)]
pub struct LabeledPoint<'a> {
    pub values: &'a [f64],
    pub label: &'a str,
}

impl<'a> From<&'a FeatureRow> for LabeledPoint<'a> {
    fn from(r: &'a FeatureRow) -> Self {
        LabeledPoint {
            values: &r.values,
            label: &r.label,
        }
    }
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Majority label among the `k` nearest training points (Euclidean).
///
/// Neighbours at equal distance are taken in label order. A vote tie goes to
/// the label whose neighbours have the smallest summed distance, then to the
/// smaller label.
pub fn knn_classify<'a>(
    train: &[LabeledPoint<'a>],
    query: &[f64],
    k: usize,
) -> Result<&'a str, EvalError> {
    if k == 0 {
        return Err(EvalError::ZeroK);
    }
    if train.is_empty() {
        return Err(EvalError::EmptyTraining);
    }
    if let Some(bad) = train.iter().find(|p| p.values.len() != query.len()) {
        return Err(EvalError::WidthMismatch {
            expected: bad.values.len(),
            found: query.len(),
        });
    }

    let mut neighbours: Vec<(f64, &'a str, usize)> = train
        .iter()
        .enumerate()
        .map(|(i, p)| (euclidean(p.values, query), p.label, i))
        .collect();
    let k = k.min(neighbours.len());
    let order = |a: &(f64, &str, usize), b: &(f64, &str, usize)| {
        a.0.total_cmp(&b.0).then(a.1.cmp(b.1)).then(a.2.cmp(&b.2))
    };
    if k < neighbours.len() {
        neighbours.select_nth_unstable_by(k - 1, order);
        neighbours.truncate(k);
    }

    let mut votes: BTreeMap<&'a str, (usize, f64)> = BTreeMap::new();
    for &(d, label, _) in &neighbours {
        let e = votes.entry(label).or_insert((0, 0.0));
        e.0 += 1;
        e.1 += d;
    }
    // BTreeMap iteration is in label order, so min_by keeps the smaller label on full ties
    let winner = votes
        .into_iter()
        .min_by(|a, b| b.1 .0.cmp(&a.1 .0).then(a.1 .1.total_cmp(&b.1 .1)))
        .map(|(label, _)| label)
        .expect("at least one neighbour");
    Ok(winner)
}

pub fn knn_classify_rows<'a>(
    train: &'a [FeatureRow],
    query: &FeatureRow,
    k: usize,
) -> Result<&'a str, EvalError> {
    let points: Vec<LabeledPoint<'a>> = train.iter().map(LabeledPoint::from).collect();
    knn_classify(&points, &query.values, k)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CvOptions {
    pub folds: usize,
    pub knn_k: usize,
    pub seed: u64,
    pub scope: RescaleScope,
    pub grouping: FoldGrouping,
}

impl Default for CvOptions {
    fn default() -> Self {
        CvOptions {
            folds: 10,
            knn_k: 1,
            seed: 0,
            scope: RescaleScope::Global,
            grouping: FoldGrouping::Segment,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvReport {
    pub fold_accuracies: Vec<f64>,
    pub mean_accuracy: f64,
    /// Population standard deviation of the fold accuracies.
    pub std_accuracy: f64,
    /// `confusion[true][predicted]`, indexed by `label_order`.
    pub confusion: Vec<Vec<u64>>,
    pub label_order: Vec<String>,
}

impl CvReport {
    pub fn total(&self) -> u64 {
        self.confusion.iter().flatten().sum()
    }

    /// Correct predictions over all predictions.
    pub fn pooled_accuracy(&self) -> f64 {
        let trace: u64 = (0..self.confusion.len()).map(|i| self.confusion[i][i]).sum();
        match self.total() {
            0 => 0.0,
            t => trace as f64 / t as f64,
        }
    }

    /// Human-readable summary.
    pub fn render_text(&self, options: &CvOptions) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "classifier: {}-nearest neighbour (euclidean)", options.knn_k);
        let _ = writeln!(s, "folds: {}", self.fold_accuracies.len());
        let _ = writeln!(s, "seed: {}", options.seed);
        let _ = writeln!(s, "samples: {}", self.total());
        let _ = writeln!(s);
        let _ = writeln!(s, "fold  accuracy");
        for (i, a) in self.fold_accuracies.iter().enumerate() {
            let _ = writeln!(s, "{:>4}  {:.4}", i + 1, a);
        }
        let _ = writeln!(s);
        let _ = writeln!(s, "mean accuracy: {:.2}", self.mean_accuracy);
        let _ = writeln!(s, "std dev: {:.4}", self.std_accuracy);
        let _ = writeln!(s, "pooled accuracy: {:.4}", self.pooled_accuracy());
        let _ = writeln!(s);
        let _ = writeln!(s, "confusion (rows = true, columns = predicted):");
        let width = self
            .label_order
            .iter()
            .map(String::len)
            .chain(self.confusion.iter().flatten().map(|c| c.to_string().len()))
            .max()
            .unwrap_or(1);
        let _ = write!(s, "{:width$}", "");
        for l in &self.label_order {
            let _ = write!(s, " {l:>width$}");
        }
        let _ = writeln!(s);
        for (l, row) in self.label_order.iter().zip(&self.confusion) {
            let _ = write!(s, "{l:width$}");
            for c in row {
                let _ = write!(s, " {c:>width$}");
            }
            let _ = writeln!(s);
        }
        s
    }

    /// Confusion matrix as CSV: a `label` header cell followed by the label
    /// order, then one row of integer counts per true label.
    pub fn write_confusion_csv<W: Write>(&self, mut sink: W) -> Result<(), EvalError> {
        write!(sink, "label")?;
        for l in &self.label_order {
            write!(sink, ",{l}")?;
        }
        writeln!(sink)?;
        for (l, row) in self.label_order.iter().zip(&self.confusion) {
            write!(sink, "{l}")?;
            for c in row {
                write!(sink, ",{c}")?;
            }
            writeln!(sink)?;
        }
        Ok(())
    }
}

/// k-fold cross-validation of the k-NN baseline.
pub fn cross_validate(m: &FeatureMatrix, options: &CvOptions) -> Result<CvReport, EvalError> {
    if options.knn_k == 0 {
        return Err(EvalError::ZeroK);
    }
    if options.scope == RescaleScope::Global && !m.rescaled {
        return Err(EvalError::NotRescaled);
    }
    let labels = m.labels();
    let folds = match options.grouping {
        FoldGrouping::Segment => stratified_folds(&labels, options.folds, options.seed)?,
        FoldGrouping::Source => {
            let groups: Vec<&str> = m.rows.iter().map(|r| r.source_id.as_str()).collect();
            grouped_stratified_folds(&labels, &groups, options.folds, options.seed)?
        }
    };
    let label_order: Vec<String> = labels
        .iter()
        .copied()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .map(String::from)
        .collect();
    let label_index = |l: &str| label_order.binary_search_by(|x| x.as_str().cmp(l)).unwrap();

    let mut fold_of = vec![0; m.len()];
    for (f, members) in folds.iter().enumerate() {
        for &i in members {
            fold_of[i] = f;
        }
    }

    let per_fold: Vec<Vec<(usize, usize)>> = folds
        .par_iter()
        .enumerate()
        .map(|(f, test)| {
            let train_rows: Vec<&FeatureRow> =
                m.rows.iter().enumerate().filter(|(i, _)| fold_of[*i] != f).map(|(_, r)| r).collect();
            let scaled: Option<(MinMaxScaler, Vec<Vec<f64>>)> = match options.scope {
                RescaleScope::Global => None,
                RescaleScope::TrainOnly => {
                    let scaler =
                        MinMaxScaler::fit(m.width(), train_rows.iter().map(|r| r.values.as_slice()));
                    let values = train_rows.iter().map(|r| scaler.transform(&r.values)).collect();
                    Some((scaler, values))
                }
            };
            let points: Vec<LabeledPoint> = match &scaled {
                None => train_rows.iter().map(|r| LabeledPoint::from(*r)).collect(),
                Some((_, values)) => train_rows
                    .iter()
                    .zip(values)
                    .map(|(r, v)| LabeledPoint {
                        values: v,
                        label: &r.label,
                    })
                    .collect(),
            };
            test.iter()
                .map(|&i| {
                    let row = &m.rows[i];
                    let query = match &scaled {
                        None => row.values.clone(),
                        Some((scaler, _)) => scaler.transform(&row.values),
                    };
                    let predicted = knn_classify(&points, &query, options.knn_k)?;
                    Ok((label_index(&row.label), label_index(predicted)))
                })
                .collect::<Result<Vec<_>, EvalError>>()
        })
        .collect::<Result<_, _>>()?;

    let n_labels = label_order.len();
    let mut confusion = vec![vec![0u64; n_labels]; n_labels];
    let mut fold_accuracies = Vec::with_capacity(per_fold.len());
    for outcomes in &per_fold {
        let correct = outcomes.iter().filter(|(t, p)| t == p).count();
        fold_accuracies.push(correct as f64 / outcomes.len() as f64);
        for &(t, p) in outcomes {
            confusion[t][p] += 1;
        }
    }
    let mean_accuracy = fold_accuracies.iter().sum::<f64>() / fold_accuracies.len() as f64;
    let std_accuracy = (fold_accuracies
        .iter()
        .map(|a| (a - mean_accuracy).powi(2))
        .sum::<f64>()
        / fold_accuracies.len() as f64)
        .sqrt();

    Ok(CvReport {
        fold_accuracies,
        mean_accuracy,
        std_accuracy,
        confusion,
        label_order,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn row(id: usize, label: &str, values: Vec<f64>) -> FeatureRow {
        FeatureRow {
            source_id: format!("s{id}"),
            segment_index: 0,
            label: label.into(),
            values,
        }
    }

    fn matrix(rows: Vec<FeatureRow>) -> FeatureMatrix {
        let width = rows.first().map_or(0, |r| r.values.len());
        FeatureMatrix {
            column_names: (0..width).map(|k| format!("c{k}")).collect(),
            rows,
            rescaled: true,
        }
    }

    #[test]
    fn folds_balanced_classes() {
        let labels: Vec<String> = (0..100).map(|i| format!("g{}", i % 10)).collect();
        let folds = stratified_folds(&labels, 10, 7).unwrap();
        assert_eq!(folds.len(), 10);
        for f in &folds {
            let classes: BTreeSet<&str> = f.iter().map(|&i| labels[i].as_str()).collect();
            assert_eq!(f.len(), 10);
            assert_eq!(classes.len(), 10);
        }
        let mut all: Vec<usize> = folds.concat();
        all.sort_unstable();
        assert_eq!(all, (0..100).collect::<Vec<_>>());
    }

    #[test]
    fn folds_single_class_and_errors() {
        let labels = vec!["a"; 20];
        let folds = stratified_folds(&labels, 2, 1).unwrap();
        assert_eq!(folds.iter().map(Vec::len).collect::<Vec<_>>(), vec![10, 10]);

        let mut labels = vec!["big"; 30];
        labels.extend(["small"; 5]);
        match stratified_folds(&labels, 10, 1) {
            Err(EvalError::ClassTooSmall { label, count, folds }) => {
                assert_eq!((label.as_str(), count, folds), ("small", 5, 10))
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(stratified_folds(&labels, 1, 1), Err(EvalError::TooFewFolds(1))));
    }

    #[test]
    fn folds_are_seeded() {
        let labels: Vec<String> = (0..57).map(|i| format!("g{}", i % 4)).collect();
        assert_eq!(stratified_folds(&labels, 5, 3).unwrap(), stratified_folds(&labels, 5, 3).unwrap());
        assert_ne!(stratified_folds(&labels, 5, 3).unwrap(), stratified_folds(&labels, 5, 4).unwrap());
        let folds = stratified_folds(&labels, 5, 3).unwrap();
        for class in ["g0", "g1", "g2", "g3"] {
            let counts: Vec<usize> =
                folds.iter().map(|f| f.iter().filter(|&&i| labels[i] == class).count()).collect();
            assert!(counts.iter().max().unwrap() - counts.iter().min().unwrap() <= 1);
        }
    }

    #[test]
    fn grouped_folds_keep_sources_together() {
        let labels: Vec<&str> = (0..40).map(|i| if i < 20 { "a" } else { "b" }).collect();
        let groups: Vec<String> = (0..40).map(|i| format!("m{}", i / 4)).collect();
        let folds = grouped_stratified_folds(&labels, &groups, 2, 9).unwrap();
        for f in &folds {
            for &i in f {
                let same: Vec<usize> = (0..40).filter(|&j| groups[j] == groups[i]).collect();
                assert!(same.iter().all(|j| f.contains(j)));
            }
        }
        let bad_labels = vec!["a", "b"];
        let bad_groups = vec!["m", "m"];
        assert!(matches!(
            grouped_stratified_folds(&bad_labels, &bad_groups, 2, 0),
            Err(EvalError::MixedGroupLabels(_))
        ));
    }

    #[test]
    fn nearest_neighbour_rules() {
        let a = [0.0, 0.0];
        let b = [1.0, 1.0];
        let c = [0.1, 0.0];
        let train = [
            LabeledPoint { values: &b, label: "far" },
            LabeledPoint { values: &a, label: "origin" },
        ];
        assert_eq!(knn_classify(&train, &[0.0, 0.0], 1).unwrap(), "origin");
        assert_eq!(knn_classify(&train, &c, 1).unwrap(), "origin");

        // equidistant, "b" listed first
        let left = [0.0];
        let right = [2.0];
        let tie = [
            LabeledPoint { values: &right, label: "b" },
            LabeledPoint { values: &left, label: "a" },
        ];
        assert_eq!(knn_classify(&tie, &[1.0], 1).unwrap(), "a");
        assert_eq!(knn_classify(&tie, &[1.0], 2).unwrap(), "a");

        // 1 vote each at k=2: smaller summed distance wins
        let p = [0.4];
        let q = [2.0];
        let votes = [LabeledPoint { values: &q, label: "a" }, LabeledPoint { values: &p, label: "z" }];
        assert_eq!(knn_classify(&votes, &[1.0], 2).unwrap(), "z");

        assert!(matches!(knn_classify(&train, &[1.0], 1), Err(EvalError::WidthMismatch { .. })));
        assert!(matches!(knn_classify(&[], &[1.0], 1), Err(EvalError::EmptyTraining)));
        assert!(matches!(knn_classify(&train, &a, 0), Err(EvalError::ZeroK)));
    }

    #[test]
    fn majority_vote() {
        let pts: Vec<[f64; 1]> = vec![[0.0], [0.1], [0.2], [0.05]];
        let labels = ["x", "y", "y", "x"];
        let train: Vec<LabeledPoint> =
            pts.iter().zip(labels).map(|(v, l)| LabeledPoint { values: v, label: l }).collect();
        // nearest three to 0.2: 0.2 (y), 0.1 (y), 0.05 (x)
        assert_eq!(knn_classify(&train, &[0.2], 3).unwrap(), "y");
    }

    #[test]
    fn duplicated_rows_classify_perfectly() {
        let mut rows = Vec::new();
        for class in 0..3 {
            for i in 0..10 {
                rows.push(row(class * 10 + i, &format!("c{class}"), vec![class as f64 / 2.0; 4]));
            }
        }
        let report = cross_validate(&matrix(rows), &CvOptions::default()).unwrap();
        assert_eq!(report.mean_accuracy, 1.0);
        assert_eq!(report.std_accuracy, 0.0);
        assert_eq!(report.total(), 30);
        assert_eq!(report.confusion, vec![vec![10, 0, 0], vec![0, 10, 0], vec![0, 0, 10]]);
    }

    #[test]
    fn shuffled_labels_score_near_chance() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut means = Vec::new();
        for seed in 0..5 {
            let mut labels: Vec<String> = (0..300).map(|i| format!("g{}", i % 10)).collect();
            labels.shuffle(&mut rng);
            let rows = labels
                .iter()
                .enumerate()
                .map(|(i, l)| row(i, l, (0..6).map(|_| rng.random::<f64>()).collect()))
                .collect();
            let report = cross_validate(&matrix(rows), &CvOptions { seed, ..CvOptions::default() }).unwrap();
            assert!((0.05..=0.20).contains(&report.mean_accuracy), "{}", report.mean_accuracy);
            means.push(report.mean_accuracy);
        }
        assert!(means.iter().sum::<f64>() / 5.0 < 0.16);
    }

    #[test]
    fn report_consistency_and_determinism() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let rows: Vec<FeatureRow> = (0..60)
            .map(|i| {
                let class = i % 3;
                let centre = class as f64 * 0.3;
                row(i, &format!("c{class}"), (0..3).map(|_| centre + 0.25 * rng.random::<f64>()).collect())
            })
            .collect();
        let m = matrix(rows);
        let opts = CvOptions { folds: 5, seed: 42, ..CvOptions::default() };
        let a = cross_validate(&m, &opts).unwrap();
        let b = cross_validate(&m, &opts).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.total(), 60);
        for (i, r) in a.confusion.iter().enumerate() {
            assert_eq!(r.iter().sum::<u64>(), 20, "row {i}");
        }
        // equal-sized folds: pooled accuracy equals the fold mean
        assert!((a.pooled_accuracy() - a.mean_accuracy).abs() < 1e-12);
        assert_eq!(a.render_text(&opts), b.render_text(&opts));
        assert!(a.render_text(&opts).contains(&format!("mean accuracy: {:.2}", a.mean_accuracy)));

        let mut csv = Vec::new();
        a.write_confusion_csv(&mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert!(text.starts_with("label,c0,c1,c2\nc0,"));
        assert_eq!(text.lines().count(), 4);
    }

    #[test]
    fn train_only_scaling() {
        let mut raw = Vec::new();
        for i in 0..20 {
            let class = i % 2;
            raw.push(row(i, &format!("c{class}"), vec![100.0 * class as f64 + i as f64 * 0.01, 5.0]));
        }
        let mut m = matrix(raw);
        m.rescaled = false;
        let global = CvOptions { folds: 2, ..CvOptions::default() };
        assert!(matches!(cross_validate(&m, &global), Err(EvalError::NotRescaled)));
        let opts = CvOptions { folds: 2, scope: RescaleScope::TrainOnly, ..CvOptions::default() };
        assert_eq!(cross_validate(&m, &opts).unwrap().mean_accuracy, 1.0);
    }

    #[test]
    fn small_class_error_propagates() {
        let mut rows: Vec<FeatureRow> = (0..20).map(|i| row(i, "big", vec![0.0])).collect();
        rows.extend((0..3).map(|i| row(100 + i, "tiny", vec![1.0])));
        assert!(matches!(
            cross_validate(&matrix(rows), &CvOptions::default()),
            Err(EvalError::ClassTooSmall { .. })
        ));
    }
}
