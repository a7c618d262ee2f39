//! Feature ranking, selection, transformation, and evaluation metrics.
//!
//! A fitted model induces a per-modality feature ranking through the row
//! norms of its extraction matrices: a feature whose row has collapsed to
//! zero contributes nothing to the latent representation, so larger rows
//! mean more useful features. Selection keeps the top fraction of each
//! modality; transformation maps samples into the shared latent space.
//! Downstream quality is measured with a nearest-neighbor classifier and
//! the usual classification metrics.

use ndarray::{Array2, ArrayView2};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::MultiModalDataset;
use crate::error::{Error, Result};
use crate::linalg::row_norms;
use crate::model::Model;

/// One modality's features ordered from most to least useful.
#[derive(Debug, Clone, Serialize)]
pub struct ModalityRanking {
    /// Feature indices, best first. Ties break toward the smaller index.
    pub order: Vec<usize>,
    /// Row norms aligned with `order` (so `scores` is non-increasing).
    pub scores: Vec<f64>,
}

/// Rankings for every modality of a fitted model.
#[derive(Debug, Clone, Serialize)]
pub struct FeatureRanking {
    pub modalities: Vec<ModalityRanking>,
}

/// Order the rows of a matrix by descending norm, ties toward the
/// smaller index.
pub fn rank_rows_by_norm(u: ArrayView2<f64>) -> ModalityRanking {
    let norms = row_norms(u);
    let mut order: Vec<usize> = (0..u.nrows()).collect();
    order.sort_by(|&a, &b| {
        norms[b]
            .partial_cmp(&norms[a])
            .expect("row norms are finite")
            .then(a.cmp(&b))
    });
    let scores = order.iter().map(|&i| norms[i]).collect();
    ModalityRanking { order, scores }
}

/// Rank every modality's features by extraction row norm.
pub fn rank_features(model: &Model) -> FeatureRanking {
    FeatureRanking {
        modalities: model
            .extraction
            .iter()
            .map(|u| rank_rows_by_norm(u.view()))
            .collect(),
    }
}

/// How many features `keep_fraction` keeps out of `dim`: the fraction
/// rounded up, never more than `dim`.
pub fn selection_count(dim: usize, keep_fraction: f64) -> Result<usize> {
    if !(keep_fraction > 0.0 && keep_fraction <= 1.0) {
        return Err(Error::Value(format!(
            "keep fraction must be in (0, 1], got {}",
            keep_fraction
        )));
    }
    Ok(((dim as f64 * keep_fraction).ceil() as usize).min(dim))
}

/// Indices each modality keeps under the given per-modality fractions,
/// in ascending index order so selection preserves the original feature
/// layout.
pub fn select_indices(ranking: &FeatureRanking, fractions: &[f64]) -> Result<Vec<Vec<usize>>> {
    if fractions.len() != ranking.modalities.len() {
        return Err(Error::Shape(format!(
            "{} fractions for {} modalities",
            fractions.len(),
            ranking.modalities.len()
        )));
    }
    let mut kept = Vec::with_capacity(fractions.len());
    for (modality, &fraction) in ranking.modalities.iter().zip(fractions) {
        let count = selection_count(modality.order.len(), fraction)?;
        let mut indices: Vec<usize> = modality.order[..count].to_vec();
        indices.sort_unstable();
        kept.push(indices);
    }
    if kept.iter().all(|k| k.is_empty()) {
        return Err(Error::EmptySelection);
    }
    Ok(kept)
}

/// Stack the kept feature rows of every modality, in modality order, as
/// one `total_kept x N` matrix.
pub fn extract_selected(data: &MultiModalDataset, kept: &[Vec<usize>]) -> Result<Array2<f64>> {
    if kept.len() != data.n_modalities() {
        return Err(Error::Shape(format!(
            "{} index lists for {} modalities",
            kept.len(),
            data.n_modalities()
        )));
    }
    let total: usize = kept.iter().map(|k| k.len()).sum();
    if total == 0 {
        return Err(Error::EmptySelection);
    }
    let mut out = Array2::zeros((total, data.n_samples()));
    let mut row = 0;
    for (v, indices) in kept.iter().enumerate() {
        let x = data.modality(v);
        for &i in indices {
            if i >= x.nrows() {
                return Err(Error::Value(format!(
                    "feature {} out of range for modality {} ({} features)",
                    i,
                    v,
                    x.nrows()
                )));
            }
            out.row_mut(row).assign(&x.row(i));
            row += 1;
        }
    }
    Ok(out)
}

/// Map every sample into the latent space of a fitted model, samples as
/// rows (`N x m`).
pub fn transform_features(data: &MultiModalDataset, model: &Model) -> Result<Array2<f64>> {
    model.validate_against(data)?;
    Ok(model.latent(data).t().to_owned())
}

/// Deterministically split `n` sample indices into (train, test).
pub fn train_test_split(n: usize, test_fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::Value(format!(
            "test fraction must be in (0, 1), got {}",
            test_fraction
        )));
    }
    if n < 2 {
        return Err(Error::Value(format!("cannot split {} samples", n)));
    }
    let mut indices: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    indices.shuffle(&mut rng);
    let n_test = ((n as f64 * test_fraction).round() as usize).clamp(1, n - 1);
    let test = indices[..n_test].to_vec();
    let train = indices[n_test..].to_vec();
    Ok((train, test))
}

/// Class index of each sample from a one-versus-rest label matrix. With
/// several tasks, exactly one entry per row must be positive; with a
/// single task, the two classes are the negative (0) and positive (1)
/// sides.
pub fn single_label_classes(labels: ArrayView2<f64>) -> Result<Vec<usize>> {
    let mut classes = Vec::with_capacity(labels.nrows());
    if labels.ncols() == 1 {
        for row in labels.rows() {
            classes.push(if row[0] > 0.0 { 1 } else { 0 });
        }
        return Ok(classes);
    }
    for (n, row) in labels.rows().into_iter().enumerate() {
        let positives: Vec<usize> = row
            .iter()
            .enumerate()
            .filter(|(_, &y)| y > 0.0)
            .map(|(p, _)| p)
            .collect();
        match positives.as_slice() {
            [class] => classes.push(*class),
            _ => {
                return Err(Error::Value(format!(
                    "sample {} has {} positive labels, expected exactly one",
                    n,
                    positives.len()
                )))
            }
        }
    }
    Ok(classes)
}

/// Nearest-neighbor classification, samples as rows. Distance ties go to
/// the lowest training index.
pub fn knn_classify(
    train: ArrayView2<f64>,
    train_classes: &[usize],
    test: ArrayView2<f64>,
) -> Result<Vec<usize>> {
    if train.nrows() == 0 {
        return Err(Error::Value("no training samples".into()));
    }
    if train.nrows() != train_classes.len() {
        return Err(Error::Shape(format!(
            "{} training samples but {} class labels",
            train.nrows(),
            train_classes.len()
        )));
    }
    if train.ncols() != test.ncols() {
        return Err(Error::Shape(format!(
            "training samples have {} features, test samples {}",
            train.ncols(),
            test.ncols()
        )));
    }
    let predictions: Vec<usize> = test
        .rows()
        .into_iter()
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|query| {
            let mut best = 0usize;
            let mut best_dist = f64::INFINITY;
            for (i, candidate) in train.rows().into_iter().enumerate() {
                let diff = &query - &candidate;
                let dist = diff.dot(&diff);
                if dist < best_dist {
                    best_dist = dist;
                    best = i;
                }
            }
            train_classes[best]
        })
        .collect();
    Ok(predictions)
}

/// Fraction of matching predictions.
pub fn accuracy(predicted: &[usize], actual: &[usize]) -> Result<f64> {
    if predicted.len() != actual.len() || predicted.is_empty() {
        return Err(Error::Shape(format!(
            "{} predictions for {} outcomes",
            predicted.len(),
            actual.len()
        )));
    }
    let hits = predicted
        .iter()
        .zip(actual)
        .filter(|(p, a)| p == a)
        .count();
    Ok(hits as f64 / actual.len() as f64)
}

/// F1 score of each class `0..n_classes`, in class order. A class with
/// no predictions and no occurrences scores zero.
pub fn per_class_f1(predicted: &[usize], actual: &[usize], n_classes: usize) -> Result<Vec<f64>> {
    if predicted.len() != actual.len() || predicted.is_empty() {
        return Err(Error::Shape(format!(
            "{} predictions for {} outcomes",
            predicted.len(),
            actual.len()
        )));
    }
    if n_classes == 0 {
        return Err(Error::Value("need at least one class".into()));
    }
    let mut scores = Vec::with_capacity(n_classes);
    for class in 0..n_classes {
        let tp = predicted
            .iter()
            .zip(actual)
            .filter(|(&p, &a)| p == class && a == class)
            .count() as f64;
        let fp = predicted
            .iter()
            .zip(actual)
            .filter(|(&p, &a)| p == class && a != class)
            .count() as f64;
        let fn_ = predicted
            .iter()
            .zip(actual)
            .filter(|(&p, &a)| p != class && a == class)
            .count() as f64;
        let precision = if tp + fp > 0.0 { tp / (tp + fp) } else { 0.0 };
        let recall = if tp + fn_ > 0.0 { tp / (tp + fn_) } else { 0.0 };
        if precision + recall > 0.0 {
            scores.push(2.0 * precision * recall / (precision + recall));
        } else {
            scores.push(0.0);
        }
    }
    Ok(scores)
}

/// F1 averaged uniformly over the classes `0..n_classes`. A class with
/// no predictions and no occurrences contributes zero.
pub fn macro_f1(predicted: &[usize], actual: &[usize], n_classes: usize) -> Result<f64> {
    let scores = per_class_f1(predicted, actual, n_classes)?;
    Ok(scores.iter().sum::<f64>() / n_classes as f64)
}

/// Average precision of a scored ranking: the mean, over the relevant
/// items, of the precision at each relevant item's rank. Items are
/// ranked by descending score, score ties toward the smaller index.
pub fn average_precision(scores: &[f64], relevant: &[bool]) -> Result<f64> {
    if scores.len() != relevant.len() || scores.is_empty() {
        return Err(Error::Shape(format!(
            "{} scores for {} relevance flags",
            scores.len(),
            relevant.len()
        )));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| {
        scores[b]
            .partial_cmp(&scores[a])
            .expect("scores are finite")
            .then(a.cmp(&b))
    });
    let mut hits = 0usize;
    let mut precision_sum = 0.0;
    for (rank, &i) in order.iter().enumerate() {
        if relevant[i] {
            hits += 1;
            precision_sum += hits as f64 / (rank + 1) as f64;
        }
    }
    if hits == 0 {
        return Ok(0.0);
    }
    Ok(precision_sum / hits as f64)
}

/// Mean of the per-task average precisions of a score matrix (`N x P`)
/// against a one-versus-rest label matrix of the same shape.
pub fn mean_average_precision(scores: ArrayView2<f64>, labels: ArrayView2<f64>) -> Result<f64> {
    if scores.dim() != labels.dim() {
        return Err(Error::Shape(format!(
            "scores are {:?} but labels are {:?}",
            scores.dim(),
            labels.dim()
        )));
    }
    let mut total = 0.0;
    for task in 0..scores.ncols() {
        let column: Vec<f64> = scores.column(task).to_vec();
        let relevant: Vec<bool> = labels.column(task).iter().map(|&y| y > 0.0).collect();
        total += average_precision(&column, &relevant)?;
    }
    Ok(total / scores.ncols() as f64)
}

/// What a classifier produced on the test samples: bare class labels, or
/// a full score matrix (which also yields ranking metrics).
#[derive(Debug, Clone)]
pub enum Predictions {
    Labels(Vec<usize>),
    /// `N x P` decision values; the predicted class is the best-scoring
    /// task.
    Scores(Array2<f64>),
}

/// Classification quality on one evaluation split.
#[derive(Debug, Clone, Serialize)]
pub struct Metrics {
    pub accuracy: f64,
    pub macro_f1: f64,
    /// F1 of each class in class order; `macro_f1` is their mean.
    pub per_class_f1: Vec<f64>,
    /// Present only when score-based predictions were supplied.
    pub mean_average_precision: Option<f64>,
}

/// The full evaluation artifact: metrics plus the split sizes they were
/// measured on.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalReport {
    pub accuracy: f64,
    pub macro_f1: f64,
    pub per_class_f1: Vec<f64>,
    pub mean_average_precision: Option<f64>,
    pub n_train: usize,
    pub n_test: usize,
}

impl EvalReport {
    pub fn from_metrics(metrics: Metrics, n_train: usize, n_test: usize) -> Self {
        EvalReport {
            accuracy: metrics.accuracy,
            macro_f1: metrics.macro_f1,
            per_class_f1: metrics.per_class_f1,
            mean_average_precision: metrics.mean_average_precision,
            n_train,
            n_test,
        }
    }
}

/// Score predictions against the true classes. `n_classes` fixes the
/// macro-F1 denominator (classes absent from `actual` still count).
pub fn compute_metrics(
    predictions: &Predictions,
    actual: &[usize],
    n_classes: usize,
) -> Result<Metrics> {
    match predictions {
        Predictions::Labels(labels) => {
            let per_class = per_class_f1(labels, actual, n_classes)?;
            Ok(Metrics {
                accuracy: accuracy(labels, actual)?,
                macro_f1: per_class.iter().sum::<f64>() / n_classes as f64,
                per_class_f1: per_class,
                mean_average_precision: None,
            })
        }
        Predictions::Scores(scores) => {
            if scores.ncols() != n_classes {
                return Err(Error::Shape(format!(
                    "score matrix has {} tasks for {} classes",
                    scores.ncols(),
                    n_classes
                )));
            }
            let labels: Vec<usize> = scores
                .rows()
                .into_iter()
                .map(|row| {
                    row.iter()
                        .enumerate()
                        .max_by(|(i, a), (j, b)| {
                            a.partial_cmp(b)
                                .expect("scores are finite")
                                .then(j.cmp(i))
                        })
                        .map(|(i, _)| i)
                        .expect("at least one task")
                })
                .collect();
            let mut label_matrix = Array2::from_elem((actual.len(), n_classes), -1.0);
            for (n, &class) in actual.iter().enumerate() {
                if class >= n_classes {
                    return Err(Error::Value(format!(
                        "sample {} has class {} outside 0..{}",
                        n, class, n_classes
                    )));
                }
                label_matrix[(n, class)] = 1.0;
            }
            let per_class = per_class_f1(&labels, actual, n_classes)?;
            Ok(Metrics {
                accuracy: accuracy(&labels, actual)?,
                macro_f1: per_class.iter().sum::<f64>() / n_classes as f64,
                per_class_f1: per_class,
                mean_average_precision: Some(mean_average_precision(
                    scores.view(),
                    label_matrix.view(),
                )?),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array2};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn ranking_orders_by_descending_row_norm() {
        let u = array![[3.0, 4.0], [0.0, 0.0], [0.0, 3.0]];
        let r = rank_rows_by_norm(u.view());
        assert_eq!(r.order, vec![0, 2, 1]);
        assert_eq!(r.scores, vec![5.0, 3.0, 0.0]);
    }

    #[test]
    fn ranking_ties_break_toward_the_smaller_index() {
        let u = array![[0.0, 2.0], [2.0, 0.0], [1.0, 0.0]];
        let r = rank_rows_by_norm(u.view());
        assert_eq!(r.order, vec![0, 1, 2]);
    }

    #[test]
    fn selection_count_rounds_up() {
        assert_eq!(selection_count(10, 0.25).unwrap(), 3);
        assert_eq!(selection_count(10, 1.0).unwrap(), 10);
        assert_eq!(selection_count(4, 0.5).unwrap(), 2);
        assert_eq!(selection_count(7, 0.01).unwrap(), 1);
        assert!(selection_count(10, 0.0).is_err());
        assert!(selection_count(10, 1.5).is_err());
    }

    #[test]
    fn kept_indices_are_the_top_of_the_ranking_in_ascending_order() {
        let ranking = FeatureRanking {
            modalities: vec![ModalityRanking {
                order: vec![4, 0, 3, 1, 2],
                scores: vec![5.0, 4.0, 3.0, 2.0, 1.0],
            }],
        };
        let kept = select_indices(&ranking, &[0.6]).unwrap();
        assert_eq!(kept, vec![vec![0, 3, 4]]);
    }

    fn two_modality_data() -> MultiModalDataset {
        MultiModalDataset::new(
            vec![
                array![[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]],
                array![[7.0, 8.0, 9.0]],
            ],
            array![[1.0], [-1.0], [1.0]],
        )
        .unwrap()
    }

    #[test]
    fn keeping_everything_reproduces_the_concatenated_features() {
        let data = two_modality_data();
        let kept = vec![vec![0, 1], vec![0]];
        let selected = extract_selected(&data, &kept).unwrap();
        assert_eq!(selected, data.concat_features());
    }

    #[test]
    fn selected_rows_come_out_in_modality_then_index_order() {
        let data = two_modality_data();
        let selected = extract_selected(&data, &[vec![1], vec![0]]).unwrap();
        assert_eq!(selected, array![[4.0, 5.0, 6.0], [7.0, 8.0, 9.0]]);
    }

    #[test]
    fn transformation_is_the_latent_map_with_samples_as_rows() {
        let data = two_modality_data();
        let model = Model {
            extraction: vec![array![[1.0], [0.0]], array![[0.0]]],
            prediction: Array2::zeros((1, 1)),
            bias: array![0.0],
            modality_weights: array![1.0, 0.5],
        };
        let z = transform_features(&data, &model).unwrap();
        assert_eq!(z, array![[1.0], [2.0], [3.0]]);
    }

    #[test]
    fn split_is_a_deterministic_partition() {
        let (train_a, test_a) = train_test_split(20, 0.3, 7).unwrap();
        let (train_b, test_b) = train_test_split(20, 0.3, 7).unwrap();
        assert_eq!(train_a, train_b);
        assert_eq!(test_a, test_b);
        assert_eq!(test_a.len(), 6);
        let mut all: Vec<usize> = train_a.iter().chain(test_a.iter()).cloned().collect();
        all.sort_unstable();
        assert_eq!(all, (0..20).collect::<Vec<_>>());
        let (train_c, _) = train_test_split(20, 0.3, 8).unwrap();
        assert_ne!(train_a, train_c);
    }

    #[test]
    fn classes_come_from_the_positive_column() {
        let labels = array![[-1.0, 1.0, -1.0], [1.0, -1.0, -1.0], [-1.0, -1.0, 1.0]];
        assert_eq!(single_label_classes(labels.view()).unwrap(), vec![1, 0, 2]);
    }

    #[test]
    fn single_task_labels_split_by_sign() {
        let labels = array![[1.0], [-1.0], [1.0]];
        assert_eq!(single_label_classes(labels.view()).unwrap(), vec![1, 0, 1]);
    }

    #[test]
    fn multi_positive_rows_are_rejected() {
        let labels = array![[1.0, 1.0], [-1.0, 1.0]];
        let err = single_label_classes(labels.view()).unwrap_err();
        assert!(err.to_string().contains("sample 0"));
    }

    #[test]
    fn nearest_neighbor_matches_a_naive_search() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let (n_train, n_test, d) =
                (rng.gen_range(3..20), rng.gen_range(1..10), rng.gen_range(1..6));
            let train: Array2<f64> =
                Array2::from_shape_fn((n_train, d), |_| rng.gen_range(-1.0..1.0));
            let test: Array2<f64> =
                Array2::from_shape_fn((n_test, d), |_| rng.gen_range(-1.0..1.0));
            let classes: Vec<usize> = (0..n_train).map(|_| rng.gen_range(0..3)).collect();
            let fast = knn_classify(train.view(), &classes, test.view()).unwrap();
            for (q, query) in test.rows().into_iter().enumerate() {
                let mut best = 0;
                let mut best_d = f64::INFINITY;
                for (i, cand) in train.rows().into_iter().enumerate() {
                    let d: f64 = query
                        .iter()
                        .zip(cand.iter())
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum();
                    if d < best_d {
                        best_d = d;
                        best = i;
                    }
                }
                assert_eq!(fast[q], classes[best]);
            }
        }
    }

    #[test]
    fn distance_ties_go_to_the_lowest_training_index() {
        let train = array![[1.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        let classes = vec![7, 8, 9];
        let test = array![[1.0, 0.0]];
        assert_eq!(
            knn_classify(train.view(), &classes, test.view()).unwrap(),
            vec![7]
        );
    }

    #[test]
    fn perfect_predictions_score_one_everywhere() {
        let actual = vec![0, 1, 2, 1, 0];
        let m = compute_metrics(&Predictions::Labels(actual.clone()), &actual, 3).unwrap();
        assert_eq!(m.accuracy, 1.0);
        assert_eq!(m.macro_f1, 1.0);
        assert!(m.mean_average_precision.is_none());
    }

    #[test]
    fn absent_classes_drag_down_the_macro_average() {
        // Classes 0 and 1 predicted perfectly, class 2 never occurs:
        // macro F1 = (1 + 1 + 0) / 3.
        let actual = vec![0, 1, 0, 1];
        let f1 = macro_f1(&actual, &actual, 3).unwrap();
        assert!((f1 - 2.0 / 3.0).abs() < 1e-15);
        let per_class = per_class_f1(&actual, &actual, 3).unwrap();
        assert_eq!(per_class, vec![1.0, 1.0, 0.0]);
    }

    #[test]
    fn report_carries_metrics_and_split_sizes() {
        let actual = vec![0, 1, 0, 1];
        let m = compute_metrics(&Predictions::Labels(actual.clone()), &actual, 3).unwrap();
        let report = EvalReport::from_metrics(m, 12, 4);
        assert_eq!(report.accuracy, 1.0);
        assert_eq!(report.per_class_f1, vec![1.0, 1.0, 0.0]);
        assert_eq!(report.n_train, 12);
        assert_eq!(report.n_test, 4);
        let text = serde_json::to_string(&report).unwrap();
        let back: EvalReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back.macro_f1, report.macro_f1);
        assert!(back.mean_average_precision.is_none());
    }

    #[test]
    fn average_precision_hand_case() {
        let ap = average_precision(&[3.0, 2.0, 1.0], &[true, false, true]).unwrap();
        let expect = (1.0 + 2.0 / 3.0) / 2.0;
        assert_eq!(ap, expect);
    }

    #[test]
    fn average_precision_is_one_when_relevant_items_lead() {
        let ap = average_precision(&[0.9, 0.8, 0.2, 0.1], &[true, true, false, false]).unwrap();
        assert_eq!(ap, 1.0);
        let none = average_precision(&[0.9, 0.8], &[false, false]).unwrap();
        assert_eq!(none, 0.0);
    }

    #[test]
    fn score_ties_rank_the_earlier_item_first() {
        // Items 0 and 1 share a score; item 0 is ranked first, so with
        // only item 1 relevant the precision at its rank (2) is 1/2.
        let ap = average_precision(&[0.5, 0.5, 0.1], &[false, true, false]).unwrap();
        assert_eq!(ap, 0.5);
    }

    #[test]
    fn score_based_metrics_include_ranking_quality() {
        let scores = array![[0.9, 0.1], [0.2, 0.8], [0.7, 0.3]];
        let actual = vec![0, 1, 0];
        let m = compute_metrics(&Predictions::Scores(scores), &actual, 2).unwrap();
        assert_eq!(m.accuracy, 1.0);
        assert_eq!(m.macro_f1, 1.0);
        assert_eq!(m.mean_average_precision, Some(1.0));
    }

    #[test]
    fn metrics_stay_within_bounds_on_random_inputs() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let n = rng.gen_range(2..30);
            let k = rng.gen_range(2..5);
            let predicted: Vec<usize> = (0..n).map(|_| rng.gen_range(0..k)).collect();
            let actual: Vec<usize> = (0..n).map(|_| rng.gen_range(0..k)).collect();
            let acc = accuracy(&predicted, &actual).unwrap();
            let f1 = macro_f1(&predicted, &actual, k).unwrap();
            assert!((0.0..=1.0).contains(&acc));
            assert!((0.0..=1.0).contains(&f1));
        }
    }
}
