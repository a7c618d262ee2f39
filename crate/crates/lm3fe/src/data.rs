//! In-memory data model: per-modality feature matrices plus task labels.
//!
//! A dataset holds one `d_v x N` matrix per modality (features are rows,
//! samples are columns) and an `N x P` label matrix in `{-1, +1}`. The
//! per-sample max-abs norm over the *concatenated* features is precomputed
//! here because every solver divides by it; samples where it would be zero
//! are rejected up front.

use ndarray::{Array1, Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How label files encode the two classes of each task.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum LabelEncoding {
    /// Entries are `0` or `1`; zeros are mapped to `-1` at ingestion.
    #[default]
    ZeroOne,
    /// Entries are already `-1` or `+1`.
    PlusMinusOne,
}

/// Per-row feature normalization applied at ingestion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum NormalizationScheme {
    /// Affinely map each feature row onto `[0, 1]`; constant rows become
    /// all-zero.
    #[default]
    UnitRange,
    /// Center each feature row and divide by its population standard
    /// deviation; constant rows become all-zero.
    ZScore,
}

/// Normalize every feature row of `m` in place according to `scheme`.
pub fn normalize_features(m: &mut Array2<f64>, scheme: NormalizationScheme) {
    for mut row in m.rows_mut() {
        match scheme {
            NormalizationScheme::UnitRange => {
                let min = row.iter().cloned().fold(f64::INFINITY, f64::min);
                let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let span = max - min;
                if span > 0.0 {
                    row.mapv_inplace(|x| (x - min) / span);
                } else {
                    row.fill(0.0);
                }
            }
            NormalizationScheme::ZScore => {
                let n = row.len() as f64;
                let mean = row.sum() / n;
                let var = row.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
                let std = var.sqrt();
                if std > 0.0 {
                    row.mapv_inplace(|x| (x - mean) / std);
                } else {
                    row.fill(0.0);
                }
            }
        }
    }
}

/// Map raw label entries to `{-1, +1}`, validating against the encoding.
pub fn encode_labels(raw: &Array2<f64>, encoding: LabelEncoding) -> Result<Array2<f64>> {
    let mut out = raw.clone();
    for (idx, v) in out.indexed_iter_mut() {
        let mapped = match encoding {
            LabelEncoding::ZeroOne if *v == 0.0 => -1.0,
            LabelEncoding::ZeroOne if *v == 1.0 => 1.0,
            LabelEncoding::PlusMinusOne if *v == -1.0 || *v == 1.0 => *v,
            _ => {
                return Err(Error::Value(format!(
                    "label entry ({}, {}) = {} does not match encoding {:?}",
                    idx.0, idx.1, v, encoding
                )))
            }
        };
        *v = mapped;
    }
    Ok(out)
}

/// Multi-modal feature matrices with shared task labels.
#[derive(Debug, Clone)]
pub struct MultiModalDataset {
    modalities: Vec<Array2<f64>>,
    labels: Array2<f64>,
    sample_inf_norms: Array1<f64>,
}

impl MultiModalDataset {
    /// Build a dataset from per-modality matrices (`d_v x N`, samples as
    /// columns) and labels (`N x P` in `{-1, +1}`). Features are taken as
    /// already normalized; use [`crate::io::load_dataset`] for file
    /// ingestion with normalization.
    pub fn new(modalities: Vec<Array2<f64>>, labels: Array2<f64>) -> Result<Self> {
        if modalities.is_empty() {
            return Err(Error::Value("dataset needs at least one modality".into()));
        }
        let n = modalities[0].ncols();
        if n == 0 {
            return Err(Error::Value("dataset needs at least one sample".into()));
        }
        for (v, m) in modalities.iter().enumerate() {
            if m.ncols() != n {
                return Err(Error::Shape(format!(
                    "modality {} has {} samples, expected {}",
                    v,
                    m.ncols(),
                    n
                )));
            }
            if m.nrows() == 0 {
                return Err(Error::Shape(format!("modality {} has no feature rows", v)));
            }
        }
        if labels.nrows() != n {
            return Err(Error::Shape(format!(
                "label matrix has {} rows, expected one per sample ({})",
                labels.nrows(),
                n
            )));
        }
        if labels.ncols() == 0 {
            return Err(Error::Value("dataset needs at least one task".into()));
        }
        for (idx, v) in labels.indexed_iter() {
            if *v != 1.0 && *v != -1.0 {
                return Err(Error::Value(format!(
                    "label entry ({}, {}) = {} is not in {{-1, +1}}",
                    idx.0, idx.1, v
                )));
            }
        }

        let mut norms = Array1::zeros(n);
        for sample in 0..n {
            let mut inf = 0.0f64;
            for m in &modalities {
                for &x in m.column(sample) {
                    inf = inf.max(x.abs());
                }
            }
            if inf == 0.0 {
                return Err(Error::DegenerateSample(sample));
            }
            norms[sample] = inf;
        }

        Ok(Self {
            modalities,
            labels,
            sample_inf_norms: norms,
        })
    }

    pub fn n_modalities(&self) -> usize {
        self.modalities.len()
    }

    pub fn n_samples(&self) -> usize {
        self.modalities[0].ncols()
    }

    pub fn n_tasks(&self) -> usize {
        self.labels.ncols()
    }

    pub fn modality_dims(&self) -> Vec<usize> {
        self.modalities.iter().map(|m| m.nrows()).collect()
    }

    pub fn modality(&self, v: usize) -> ArrayView2<'_, f64> {
        self.modalities[v].view()
    }

    pub fn modalities(&self) -> &[Array2<f64>] {
        &self.modalities
    }

    /// Labels as an `N x P` matrix in `{-1, +1}`.
    pub fn labels(&self) -> ArrayView2<'_, f64> {
        self.labels.view()
    }

    /// Max-abs norm of each sample's concatenated feature vector.
    pub fn sample_inf_norms(&self) -> &Array1<f64> {
        &self.sample_inf_norms
    }

    /// All modalities stacked into one `sum(d_v) x N` matrix.
    pub fn concat_features(&self) -> Array2<f64> {
        let views: Vec<ArrayView2<f64>> = self.modalities.iter().map(|m| m.view()).collect();
        ndarray::concatenate(Axis(0), &views).expect("modalities share the sample axis")
    }

    /// New dataset holding the given samples (columns) in order.
    pub fn subset(&self, samples: &[usize]) -> Result<Self> {
        for &s in samples {
            if s >= self.n_samples() {
                return Err(Error::Value(format!(
                    "sample index {} out of range ({} samples)",
                    s,
                    self.n_samples()
                )));
            }
        }
        let modalities = self
            .modalities
            .iter()
            .map(|m| m.select(Axis(1), samples))
            .collect();
        let labels = self.labels.select(Axis(0), samples);
        Self::new(modalities, labels)
    }
}
