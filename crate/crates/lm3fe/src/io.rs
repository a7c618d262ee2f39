//! File formats: header-free CSV matrices, a JSON dataset manifest, and
//! JSON snapshots of models and traces.
//!
//! Matrices are written with the shortest decimal representation that
//! parses back to the identical bits, so a write/read round trip is
//! exact. All errors carry the offending path.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write as _};
use std::path::{Path, PathBuf};

use ndarray::{Array2, ArrayView2};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::data::{
    encode_labels, normalize_features, LabelEncoding, MultiModalDataset, NormalizationScheme,
};
use crate::driver::ObjectiveBreakdown;
use crate::error::{Error, Result};
use crate::eval::FeatureRanking;
use crate::model::Model;

fn annotate(path: &Path, e: std::io::Error) -> Error {
    Error::Io(std::io::Error::new(
        e.kind(),
        format!("{}: {}", path.display(), e),
    ))
}

fn open(path: &Path) -> Result<BufReader<File>> {
    Ok(BufReader::new(File::open(path).map_err(|e| annotate(path, e))?))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).map_err(|e| annotate(path, e))?,
    ))
}

/// Read a header-free numeric CSV file as a matrix.
pub fn read_matrix_csv(path: impl AsRef<Path>) -> Result<Array2<f64>> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(open(path)?);
    let mut values = Vec::new();
    let mut n_cols = None;
    let mut n_rows = 0;
    for (r, record) in reader.records().enumerate() {
        let record =
            record.map_err(|e| Error::Value(format!("{}: {}", path.display(), e)))?;
        match n_cols {
            None => n_cols = Some(record.len()),
            Some(c) if c != record.len() => {
                return Err(Error::Value(format!(
                    "{}: row {} has {} fields, expected {}",
                    path.display(),
                    r + 1,
                    record.len(),
                    c
                )))
            }
            _ => {}
        }
        for (c, field) in record.iter().enumerate() {
            let value: f64 = field.parse().map_err(|_| {
                Error::Value(format!(
                    "{}: row {}, column {}: cannot parse {:?} as a number",
                    path.display(),
                    r + 1,
                    c + 1,
                    field
                ))
            })?;
            values.push(value);
        }
        n_rows += 1;
    }
    let n_cols = n_cols.unwrap_or(0);
    if n_rows == 0 || n_cols == 0 {
        return Err(Error::Value(format!(
            "{}: empty matrix",
            path.display()
        )));
    }
    Array2::from_shape_vec((n_rows, n_cols), values)
        .map_err(|e| Error::Shape(format!("{}: {}", path.display(), e)))
}

/// Write a matrix as header-free CSV, one row per line, exact round trip.
pub fn write_matrix_csv(path: impl AsRef<Path>, matrix: ArrayView2<f64>) -> Result<()> {
    let path = path.as_ref();
    let mut writer = csv::Writer::from_writer(create(path)?);
    for row in matrix.rows() {
        let fields: Vec<String> = row.iter().map(|v| format!("{}", v)).collect();
        writer
            .write_record(&fields)
            .map_err(|e| Error::Value(format!("{}: {}", path.display(), e)))?;
    }
    writer
        .flush()
        .map_err(|e| annotate(path, e))?;
    Ok(())
}

/// Points a loader at the matrix files of one dataset and fixes how the
/// raw values are prepared. Relative paths are resolved against the
/// manifest's own directory.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DatasetManifest {
    /// One feature CSV per modality, features as rows.
    pub modalities: Vec<PathBuf>,
    /// Label CSV, samples as rows, one column per task.
    pub labels: PathBuf,
    #[serde(default)]
    pub encoding: LabelEncoding,
    #[serde(default)]
    pub normalization: NormalizationScheme,
}

/// Generic JSON reader with path-annotated errors.
pub fn read_json<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<T> {
    let path = path.as_ref();
    serde_json::from_reader(open(path)?)
        .map_err(|e| Error::Value(format!("{}: {}", path.display(), e)))
}

/// Generic pretty-printed JSON writer with path-annotated errors.
pub fn write_json<T: Serialize>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    let path = path.as_ref();
    let mut writer = create(path)?;
    serde_json::to_writer_pretty(&mut writer, value)
        .map_err(|e| Error::Value(format!("{}: {}", path.display(), e)))?;
    writer.write_all(b"\n").map_err(|e| annotate(path, e))?;
    writer.flush().map_err(|e| annotate(path, e))?;
    Ok(())
}

/// Load the dataset a manifest describes: read every matrix, normalize
/// the features, encode the labels, and validate the assembly.
pub fn load_dataset(manifest_path: impl AsRef<Path>) -> Result<MultiModalDataset> {
    let manifest_path = manifest_path.as_ref();
    let manifest: DatasetManifest = read_json(manifest_path)?;
    let base = manifest_path.parent().unwrap_or_else(|| Path::new("."));
    let resolve = |p: &PathBuf| -> PathBuf {
        if p.is_absolute() {
            p.clone()
        } else {
            base.join(p)
        }
    };
    let modality_paths: Vec<PathBuf> = manifest.modalities.iter().map(&resolve).collect();
    load_dataset_parts(
        &modality_paths,
        &resolve(&manifest.labels),
        manifest.encoding,
        manifest.normalization,
    )
}

/// Assemble a dataset from explicit file paths.
pub fn load_dataset_parts(
    modality_paths: &[PathBuf],
    labels_path: &Path,
    encoding: LabelEncoding,
    normalization: NormalizationScheme,
) -> Result<MultiModalDataset> {
    let mut modalities = Vec::with_capacity(modality_paths.len());
    for path in modality_paths {
        let mut features = read_matrix_csv(path)?;
        normalize_features(&mut features, normalization);
        modalities.push(features);
    }
    let raw_labels = read_matrix_csv(labels_path)?;
    let labels = encode_labels(&raw_labels, encoding)?;
    MultiModalDataset::new(modalities, labels)
}

pub fn write_manifest(path: impl AsRef<Path>, manifest: &DatasetManifest) -> Result<()> {
    write_json(path, manifest)
}

pub fn write_model(path: impl AsRef<Path>, model: &Model) -> Result<()> {
    write_json(path, model)
}

pub fn read_model(path: impl AsRef<Path>) -> Result<Model> {
    read_json(path)
}

/// Write the outer objective course as a JSON array, one entry per
/// completed sweep (plus the starting point).
pub fn write_objective_trace(
    path: impl AsRef<Path>,
    trace: &[ObjectiveBreakdown],
) -> Result<()> {
    write_json(path, &trace)
}

/// Write a feature ranking as CSV with a header:
/// `modality,rank,feature_index,score`.
pub fn write_ranking_csv(path: impl AsRef<Path>, ranking: &FeatureRanking) -> Result<()> {
    let path = path.as_ref();
    let mut writer = csv::Writer::from_writer(create(path)?);
    let fail = |e: csv::Error| Error::Value(format!("{}: {}", path.display(), e));
    writer
        .write_record(["modality", "rank", "feature_index", "score"])
        .map_err(fail)?;
    for (v, modality) in ranking.modalities.iter().enumerate() {
        for (rank, (&feature, &score)) in
            modality.order.iter().zip(&modality.scores).enumerate()
        {
            writer
                .write_record([
                    v.to_string(),
                    rank.to_string(),
                    feature.to_string(),
                    format!("{}", score),
                ])
                .map_err(fail)?;
        }
    }
    writer.flush().map_err(|e| annotate(path, e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn matrix_round_trip_is_bitwise_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.csv");
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut matrix: Array2<f64> =
            ndarray::Array2::from_shape_fn((7, 5), |_| rng.gen_range(-1.0..1.0) * 1e3);
        matrix[(0, 0)] = 1.0 / 3.0;
        matrix[(1, 1)] = std::f64::consts::PI;
        matrix[(2, 2)] = 1e-300;
        matrix[(3, 3)] = -7.5e17;
        matrix[(4, 4)] = 0.1 + 0.2;
        write_matrix_csv(&path, matrix.view()).unwrap();
        let back = read_matrix_csv(&path).unwrap();
        assert_eq!(matrix, back);
        for (a, b) in matrix.iter().zip(back.iter()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn ragged_rows_are_rejected_with_the_path() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ragged.csv");
        std::fs::write(&path, "1,2,3\n4,5\n").unwrap();
        let err = read_matrix_csv(&path).unwrap_err();
        assert!(err.to_string().contains("ragged.csv"), "{}", err);
    }

    #[test]
    fn bad_numbers_name_their_cell() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "1,2\n3,oops\n").unwrap();
        let err = read_matrix_csv(&path).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("row 2"), "{}", msg);
        assert!(msg.contains("column 2"), "{}", msg);
    }

    #[test]
    fn empty_files_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("empty.csv");
        std::fs::write(&path, "").unwrap();
        assert!(read_matrix_csv(&path).is_err());
    }

    #[test]
    fn missing_files_name_their_path() {
        let err = read_matrix_csv("/nonexistent/nowhere.csv").unwrap_err();
        assert!(err.to_string().contains("nowhere.csv"), "{}", err);
    }

    #[test]
    fn manifest_defaults_fill_missing_fields() {
        let json = r#"{"modalities": ["a.csv"], "labels": "y.csv"}"#;
        let manifest: DatasetManifest = serde_json::from_str(json).unwrap();
        assert_eq!(manifest.encoding, LabelEncoding::ZeroOne);
        assert_eq!(manifest.normalization, NormalizationScheme::UnitRange);
    }

    #[test]
    fn manifest_loading_prepares_features_and_labels() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("x0.csv"), "1,2,3\n5,5,5\n").unwrap();
        std::fs::write(dir.path().join("x1.csv"), "8,4,0\n").unwrap();
        std::fs::write(dir.path().join("y.csv"), "1\n0\n1\n").unwrap();
        let manifest = DatasetManifest {
            modalities: vec!["x0.csv".into(), "x1.csv".into()],
            labels: "y.csv".into(),
            encoding: LabelEncoding::ZeroOne,
            normalization: NormalizationScheme::UnitRange,
        };
        write_manifest(dir.path().join("data.json"), &manifest).unwrap();
        let data = load_dataset(dir.path().join("data.json")).unwrap();
        assert_eq!(data.modality(0), array![[0.0, 0.5, 1.0], [0.0, 0.0, 0.0]]);
        assert_eq!(data.modality(1), array![[1.0, 0.5, 0.0]]);
        assert_eq!(data.labels(), array![[1.0], [-1.0], [1.0]]);
    }

    #[test]
    fn model_round_trip_is_bitwise_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let model = Model {
            extraction: vec![
                Array2::from_shape_fn((4, 2), |_| rng.gen_range(-1.0..1.0)),
                Array2::from_shape_fn((3, 2), |_| rng.gen_range(-1.0..1.0)),
            ],
            prediction: Array2::from_shape_fn((2, 3), |_| rng.gen_range(-1.0..1.0)),
            bias: ndarray::Array1::from_shape_fn(3, |_| rng.gen_range(-1.0..1.0)),
            modality_weights: array![1.0 / 3.0, 2.0 / 3.0],
        };
        write_model(&path, &model).unwrap();
        let back = read_model(&path).unwrap();
        assert_eq!(model.extraction, back.extraction);
        assert_eq!(model.prediction, back.prediction);
        assert_eq!(model.bias, back.bias);
        assert_eq!(model.modality_weights, back.modality_weights);
    }

    #[test]
    fn objective_trace_is_valid_json() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("trace.json");
        let trace = vec![ObjectiveBreakdown {
            loss: 1.5,
            reg_prediction: 0.25,
            reg_extraction: 0.5,
            reg_weights: 0.125,
            total: 2.375,
        }];
        write_objective_trace(&path, &trace).unwrap();
        let back: Vec<ObjectiveBreakdown> = read_json(&path).unwrap();
        assert_eq!(back.len(), 1);
        assert_eq!(back[0].total, 2.375);
    }

    #[test]
    fn ranking_csv_lists_every_feature_with_a_header() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ranking.csv");
        let ranking = FeatureRanking {
            modalities: vec![crate::eval::ModalityRanking {
                order: vec![1, 0],
                scores: vec![2.5, 0.5],
            }],
        };
        write_ranking_csv(&path, &ranking).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "modality,rank,feature_index,score");
        assert_eq!(lines[1], "0,0,1,2.5");
        assert_eq!(lines[2], "0,1,0,0.5");
        assert_eq!(lines.len(), 3);
    }
}
