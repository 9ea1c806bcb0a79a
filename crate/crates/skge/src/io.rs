//! Model file format, vocabulary sidecars, and filesystem helpers.
//!
//! Model files are `SKGE0001` + a little-endian u32 length-prefixed JSON
//! header `{algorithm, d, n, m, transe_norm, seed}` + the entity matrix as
//! little-endian 32-bit floats (row-major) + the relation parameters
//! (row-major vectors, or `d x d` matrices concatenated per relation).
//! Vocabularies ride along as two sidecar files next to the model,
//! `entities.txt` and `relations.txt`, one label per line where the line
//! number is the id.
//!
//! All writes go through a temp file + rename, so readers never observe a
//! partial file.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use skge_core::kg::{parse_triples, write_triples, KnowledgeGraph};
use skge_core::linalg::Matrix;
use skge_core::model::{Algorithm, EmbeddingModel, ModelConfig, Norm, RelationParams};

pub const MAGIC: &[u8; 8] = b"SKGE0001";

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{}: bad magic, not a skge model file", path.display())]
    BadMagic { path: PathBuf },
    #[error("{}: malformed header: {detail}", path.display())]
    BadHeader { path: PathBuf, detail: String },
    #[error("{}: size mismatch: expected {expected} bytes, found {actual}", path.display())]
    SizeMismatch {
        path: PathBuf,
        expected: usize,
        actual: usize,
    },
    #[error("{}: {detail}", path.display())]
    BadModel { path: PathBuf, detail: String },
}

impl IoError {
    fn io(path: &Path, source: std::io::Error) -> Self {
        IoError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

/// On-disk header; field names are part of the format.
#[derive(Debug, Serialize, Deserialize)]
struct ModelHeader {
    algorithm: String,
    d: usize,
    n: usize,
    m: usize,
    transe_norm: String,
    seed: u64,
}

/// A model plus the vocabulary labels from its sidecars.
#[derive(Debug)]
pub struct LoadedModel {
    pub model: EmbeddingModel,
    pub entity_labels: Vec<String>,
    pub relation_labels: Vec<String>,
}

impl LoadedModel {
    pub fn entity_id(&self, label: &str) -> Option<u32> {
        self.entity_labels
            .iter()
            .position(|l| l == label)
            .map(|i| i as u32)
    }
}

/// Writes `bytes` atomically: temp file in the same directory, then rename.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<(), IoError> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, bytes).map_err(|e| IoError::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| IoError::io(path, e))?;
    Ok(())
}

pub fn sha256_hex(path: &Path) -> Result<String, IoError> {
    let bytes = fs::read(path).map_err(|e| IoError::io(path, e))?;
    let digest = Sha256::digest(&bytes);
    Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
}

/// Serializes a model to the binary format.
pub fn encode_model(model: &EmbeddingModel) -> Vec<u8> {
    let config = model.config();
    let header = ModelHeader {
        algorithm: config.algorithm.name().to_string(),
        d: config.dimension,
        n: model.entity_count(),
        m: model.relation_count(),
        transe_norm: match config.transe_norm {
            Norm::L1 => "l1".to_string(),
            Norm::L2 => "l2".to_string(),
        },
        seed: config.seed,
    };
    let header_json = serde_json::to_vec(&header).expect("header serializes");

    let float_count = model.entity_vecs().data().len() + model.relation_params().matrix().data().len();
    let mut bytes = Vec::with_capacity(12 + header_json.len() + float_count * 4);
    bytes.extend_from_slice(MAGIC);
    bytes.extend_from_slice(&(header_json.len() as u32).to_le_bytes());
    bytes.extend_from_slice(&header_json);
    for &v in model.entity_vecs().data() {
        bytes.extend_from_slice(&(v as f32).to_le_bytes());
    }
    for &v in model.relation_params().matrix().data() {
        bytes.extend_from_slice(&(v as f32).to_le_bytes());
    }
    bytes
}

/// Parses the binary format; `path` is only used in error messages.
pub fn decode_model(bytes: &[u8], path: &Path) -> Result<EmbeddingModel, IoError> {
    let bad_header = |detail: String| IoError::BadHeader {
        path: path.to_path_buf(),
        detail,
    };
    if bytes.len() < MAGIC.len() + 4 {
        return Err(IoError::SizeMismatch {
            path: path.to_path_buf(),
            expected: MAGIC.len() + 4,
            actual: bytes.len(),
        });
    }
    if &bytes[..8] != MAGIC {
        return Err(IoError::BadMagic {
            path: path.to_path_buf(),
        });
    }
    let header_len = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let body_start = 12 + header_len;
    if bytes.len() < body_start {
        return Err(IoError::SizeMismatch {
            path: path.to_path_buf(),
            expected: body_start,
            actual: bytes.len(),
        });
    }
    let header: ModelHeader = serde_json::from_slice(&bytes[12..body_start])
        .map_err(|e| bad_header(e.to_string()))?;

    let algorithm: Algorithm = header
        .algorithm
        .parse()
        .map_err(|e: String| bad_header(e))?;
    let norm: Norm = header.transe_norm.parse().map_err(|e: String| bad_header(e))?;
    let rel_width = if algorithm.has_vector_relations() {
        header.d
    } else {
        header.d * header.d
    };
    let float_count = header.n * header.d + header.m * rel_width;
    let expected = body_start + float_count * 4;
    if bytes.len() != expected {
        return Err(IoError::SizeMismatch {
            path: path.to_path_buf(),
            expected,
            actual: bytes.len(),
        });
    }

    let mut floats = bytes[body_start..]
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64);
    let entity_data: Vec<f64> = floats.by_ref().take(header.n * header.d).collect();
    let relation_data: Vec<f64> = floats.collect();

    let entity_vecs = Matrix::from_vec(header.n, header.d, entity_data);
    let relation_matrix = Matrix::from_vec(header.m, rel_width, relation_data);
    let relation_params = if algorithm.has_vector_relations() {
        RelationParams::Vector(relation_matrix)
    } else {
        RelationParams::MatrixPerRelation(relation_matrix)
    };
    let config = ModelConfig::new(algorithm, header.d, header.seed)
        .map_err(|e| bad_header(e.to_string()))?
        .with_norm(norm);
    EmbeddingModel::from_parts(config, entity_vecs, relation_params).map_err(|e| {
        IoError::BadModel {
            path: path.to_path_buf(),
            detail: e.to_string(),
        }
    })
}

/// Sidecar vocabulary files live next to the model.
pub fn sidecar_paths(model_path: &Path) -> (PathBuf, PathBuf) {
    (
        model_path.with_file_name("entities.txt"),
        model_path.with_file_name("relations.txt"),
    )
}

fn write_labels(path: &Path, labels: &[String]) -> Result<(), IoError> {
    let mut text = String::new();
    for label in labels {
        text.push_str(label);
        text.push('\n');
    }
    atomic_write(path, text.as_bytes())
}

fn read_labels(path: &Path) -> Result<Vec<String>, IoError> {
    let text = fs::read_to_string(path).map_err(|e| IoError::io(path, e))?;
    Ok(text.lines().map(str::to_string).collect())
}

/// Writes the model file and its vocabulary sidecars atomically.
pub fn save_model(
    path: &Path,
    model: &EmbeddingModel,
    entity_labels: &[String],
    relation_labels: &[String],
) -> Result<(), IoError> {
    assert_eq!(entity_labels.len(), model.entity_count());
    assert_eq!(relation_labels.len(), model.relation_count());
    atomic_write(path, &encode_model(model))?;
    let (entities_path, relations_path) = sidecar_paths(path);
    write_labels(&entities_path, entity_labels)?;
    write_labels(&relations_path, relation_labels)?;
    Ok(())
}

/// Loads a model plus its sidecar vocabularies, validating counts.
pub fn load_model(path: &Path) -> Result<LoadedModel, IoError> {
    let bytes = fs::read(path).map_err(|e| IoError::io(path, e))?;
    let model = decode_model(&bytes, path)?;
    let (entities_path, relations_path) = sidecar_paths(path);
    let entity_labels = read_labels(&entities_path)?;
    let relation_labels = read_labels(&relations_path)?;
    if entity_labels.len() != model.entity_count() {
        return Err(IoError::BadModel {
            path: entities_path,
            detail: format!(
                "sidecar lists {} entities, model has {}",
                entity_labels.len(),
                model.entity_count()
            ),
        });
    }
    if relation_labels.len() != model.relation_count() {
        return Err(IoError::BadModel {
            path: relations_path,
            detail: format!(
                "sidecar lists {} relations, model has {}",
                relation_labels.len(),
                model.relation_count()
            ),
        });
    }
    Ok(LoadedModel {
        model,
        entity_labels,
        relation_labels,
    })
}

pub fn read_kg(path: &Path) -> Result<KnowledgeGraph, IoError> {
    let text = fs::read_to_string(path).map_err(|e| IoError::io(path, e))?;
    parse_triples(&text).map_err(|e| IoError::BadModel {
        path: path.to_path_buf(),
        detail: e.to_string(),
    })
}

pub fn write_kg(path: &Path, kg: &KnowledgeGraph) -> Result<(), IoError> {
    atomic_write(path, write_triples(kg).as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use skge_core::kg::parse_triples;
    use skge_core::train::{init_model, TrainConfig};

    fn sample_model(algorithm: Algorithm) -> (EmbeddingModel, Vec<String>, Vec<String>) {
        let kg = parse_triples("a\tr\tb\nb\ts\tc\nc\tr\ta\n").unwrap();
        let mcfg = ModelConfig::new(algorithm, 3, 99).unwrap();
        let model = init_model(mcfg, &kg).unwrap();
        let _ = TrainConfig::defaults_for(algorithm);
        (
            model,
            kg.entities().labels().to_vec(),
            kg.relations().labels().to_vec(),
        )
    }

    #[test]
    fn save_load_save_is_byte_identical() {
        for algorithm in [Algorithm::TransE, Algorithm::Rescal, Algorithm::HolE] {
            let dir = tempfile::tempdir().unwrap();
            let path = dir.path().join("model.skge");
            let (model, entities, relations) = sample_model(algorithm);
            save_model(&path, &model, &entities, &relations).unwrap();
            let first_bytes = fs::read(&path).unwrap();
            let loaded = load_model(&path).unwrap();
            assert_eq!(loaded.entity_labels, entities);
            assert_eq!(loaded.relation_labels, relations);
            let second = encode_model(&loaded.model);
            assert_eq!(first_bytes, second, "{algorithm:?}");
        }
    }

    #[test]
    fn truncated_file_is_size_mismatch() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.skge");
        let (model, entities, relations) = sample_model(Algorithm::TransE);
        save_model(&path, &model, &entities, &relations).unwrap();
        let mut bytes = fs::read(&path).unwrap();
        bytes.truncate(bytes.len() - 5);
        fs::write(&path, &bytes).unwrap();
        assert!(matches!(
            load_model(&path),
            Err(IoError::SizeMismatch { .. })
        ));
    }

    #[test]
    fn wrong_magic_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.skge");
        fs::write(&path, b"NOTSKGE0rest-of-file").unwrap();
        assert!(matches!(load_model(&path), Err(IoError::BadMagic { .. })));
    }

    #[test]
    fn sidecar_line_number_is_id() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.skge");
        let (model, entities, relations) = sample_model(Algorithm::TransE);
        save_model(&path, &model, &entities, &relations).unwrap();
        let (entities_path, _) = sidecar_paths(&path);
        let text = fs::read_to_string(entities_path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines, vec!["a", "b", "c"]);
        let loaded = load_model(&path).unwrap();
        assert_eq!(loaded.entity_id("b"), Some(1));
    }

    #[test]
    fn sidecar_count_mismatch_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.skge");
        let (model, entities, relations) = sample_model(Algorithm::TransE);
        save_model(&path, &model, &entities, &relations).unwrap();
        let (entities_path, _) = sidecar_paths(&path);
        fs::write(&entities_path, "a\nb\n").unwrap();
        assert!(matches!(load_model(&path), Err(IoError::BadModel { .. })));
    }

    #[test]
    fn no_temp_files_left_behind() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.skge");
        let (model, entities, relations) = sample_model(Algorithm::HolE);
        save_model(&path, &model, &entities, &relations).unwrap();
        let leftovers: Vec<_> = fs::read_dir(dir.path())
            .unwrap()
            .map(|e| e.unwrap().file_name().into_string().unwrap())
            .filter(|name| name.ends_with(".tmp"))
            .collect();
        assert!(leftovers.is_empty(), "{leftovers:?}");
    }
}
