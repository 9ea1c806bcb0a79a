//! Embedding-space queries: nearest neighbors, most-similar scene pairs,
//! and 2D projection for visualization.

pub mod pca;
pub mod tsne;

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::kg::{EntityId, KnowledgeGraph, Vocab};
use crate::linalg::{dot, norm2, Matrix};
use crate::model::{EmbeddingModel, ModelError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AnalyticsError {
    #[error("unknown entity {0:?}")]
    UnknownEntity(String),
    #[error("k={k} must satisfy 1 <= k < entity count ({entities})")]
    BadK { k: usize, entities: usize },
    #[error("need at least {needed} scene ids, got {got}")]
    TooFewScenes { needed: usize, got: usize },
    #[error("need at least {needed} points for {method}, got {got}")]
    TooFewPoints {
        method: &'static str,
        needed: usize,
        got: usize,
    },
    #[error("perplexity {perplexity} too large for {points} points; must be < (points - 1) / 3")]
    BadPerplexity { perplexity: f64, points: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Ranked unordered scene pairs, scores non-increasing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityResult {
    pub pairs: Vec<SimilarityPair>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityPair {
    pub a: String,
    pub b: String,
    pub cosine: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProjectionMethod {
    Tsne,
    Pca,
}

impl ProjectionMethod {
    pub fn name(self) -> &'static str {
        match self {
            ProjectionMethod::Tsne => "tsne",
            ProjectionMethod::Pca => "pca",
        }
    }
}

/// t-SNE hyperparameters; PCA ignores everything but the method itself.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionParams {
    pub perplexity: f64,
    pub iterations: usize,
    pub learning_rate: f64,
    pub early_exaggeration: f64,
    pub exaggeration_iters: usize,
    pub seed: u64,
}

impl Default for ProjectionParams {
    fn default() -> Self {
        ProjectionParams {
            perplexity: 30.0,
            iterations: 1_000,
            learning_rate: 200.0,
            early_exaggeration: 12.0,
            exaggeration_iters: 250,
            seed: 42,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectedPoint {
    pub label: String,
    pub x: f64,
    pub y: f64,
    /// Lexicographically smallest class label when the entity is typed.
    pub class: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Projection2D {
    pub points: Vec<ProjectedPoint>,
    pub method: String,
    pub params: ProjectionParams,
}

/// Top-k entities by cosine similarity to `entity`, self excluded, ties
/// broken by ascending id. Exhaustive scan; the graphs here are desk-scale.
pub fn nearest_neighbors(
    model: &EmbeddingModel,
    entity: EntityId,
    k: usize,
) -> Result<Vec<(EntityId, f64)>, AnalyticsError> {
    let n = model.entity_count();
    if k == 0 || k >= n {
        return Err(AnalyticsError::BadK { k, entities: n });
    }
    let query = model.entity_vec(entity)?;
    let query_norm = norm2(query);
    let mut ranked: Vec<(f64, EntityId)> = Vec::with_capacity(n - 1);
    for id in 0..n as u32 {
        let other = EntityId(id);
        if other == entity {
            continue;
        }
        let row = model.entity_vec(other)?;
        let denom = query_norm * norm2(row);
        let cos = if denom == 0.0 {
            0.0
        } else {
            dot(query, row) / denom
        };
        ranked.push((cos, other));
    }
    ranked.sort_unstable_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    ranked.truncate(k);
    Ok(ranked.into_iter().map(|(cos, id)| (id, cos)).collect())
}

/// Scores every unordered pair of the given scene entities by cosine and
/// returns the `top_k` best. Scoring is symmetric bit-for-bit.
pub fn most_similar_scene_pairs(
    model: &EmbeddingModel,
    vocab: &Vocab,
    scene_ids: &[EntityId],
    top_k: usize,
) -> Result<SimilarityResult, AnalyticsError> {
    let mut ids: Vec<EntityId> = Vec::new();
    for &id in scene_ids {
        model.entity_vec(id)?;
        if !ids.contains(&id) {
            ids.push(id);
        }
    }
    if ids.len() < 2 {
        return Err(AnalyticsError::TooFewScenes {
            needed: 2,
            got: ids.len(),
        });
    }
    ids.sort_unstable();

    let mut scored: Vec<(f64, EntityId, EntityId)> = Vec::new();
    for (i, &a) in ids.iter().enumerate() {
        for &b in &ids[i + 1..] {
            let va = model.entity_vec(a)?;
            let vb = model.entity_vec(b)?;
            let denom = norm2(va) * norm2(vb);
            let cos = if denom == 0.0 { 0.0 } else { dot(va, vb) / denom };
            scored.push((cos, a, b));
        }
    }
    scored.sort_unstable_by(|x, y| {
        y.0.total_cmp(&x.0)
            .then(x.1.cmp(&y.1))
            .then(x.2.cmp(&y.2))
    });
    scored.truncate(top_k);
    let pairs = scored
        .into_iter()
        .map(|(cosine, a, b)| SimilarityPair {
            a: vocab.label(a.0).expect("id in range").to_string(),
            b: vocab.label(b.0).expect("id in range").to_string(),
            cosine,
        })
        .collect();
    Ok(SimilarityResult { pairs })
}

/// Projects the selected entities to 2D with exact t-SNE or PCA.
/// Deterministic given the seed. Class labels come from `kg` when provided.
pub fn project_2d(
    model: &EmbeddingModel,
    vocab: &Vocab,
    entity_ids: &[EntityId],
    method: ProjectionMethod,
    params: &ProjectionParams,
    kg: Option<&KnowledgeGraph>,
) -> Result<Projection2D, AnalyticsError> {
    let mut ids: Vec<EntityId> = Vec::new();
    for &id in entity_ids {
        model.entity_vec(id)?;
        if !ids.contains(&id) {
            ids.push(id);
        }
    }
    let n = ids.len();
    let d = model.dimension();
    let mut points = Matrix::zeros(n, d);
    for (row, &id) in ids.iter().enumerate() {
        points
            .row_mut(row)
            .copy_from_slice(model.entity_vec(id)?);
    }

    let coords = match method {
        ProjectionMethod::Pca => {
            if n < 2 {
                return Err(AnalyticsError::TooFewPoints {
                    method: "pca",
                    needed: 2,
                    got: n,
                });
            }
            pca::project(&points)
        }
        ProjectionMethod::Tsne => {
            if n < 3 {
                return Err(AnalyticsError::TooFewPoints {
                    method: "tsne",
                    needed: 3,
                    got: n,
                });
            }
            tsne::embed(&points, params)?.coords
        }
    };

    let points = ids
        .iter()
        .zip(coords)
        .map(|(&id, [x, y])| {
            let class = kg.and_then(|kg| {
                kg.types_of(id).and_then(|classes| {
                    classes
                        .iter()
                        .map(|c| kg.entities().label(c.0).expect("in range"))
                        .min()
                        .map(str::to_string)
                })
            });
            ProjectedPoint {
                label: vocab.label(id.0).expect("id in range").to_string(),
                x,
                y,
                class,
            }
        })
        .collect();

    Ok(Projection2D {
        points,
        method: method.name().to_string(),
        params: params.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::cosine;
    use crate::model::{Algorithm, ModelConfig, RelationParams};
    use alloc::vec;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn model_of(entities: Vec<Vec<f64>>) -> (EmbeddingModel, Vocab) {
        let d = entities[0].len();
        let n = entities.len();
        let mut vocab = Vocab::new();
        for i in 0..n {
            vocab.intern(&alloc::format!("e{i}")).unwrap();
        }
        let matrix = Matrix::from_vec(n, d, entities.into_iter().flatten().collect());
        let config = ModelConfig::new(Algorithm::TransE, d, 0).unwrap();
        let model =
            EmbeddingModel::from_parts(config, matrix, RelationParams::Vector(Matrix::zeros(1, d)))
                .unwrap();
        (model, vocab)
    }

    #[test]
    fn duplicate_row_ranks_first_with_unit_cosine() {
        let (model, _) = model_of(vec![
            vec![1.0, 2.0],
            vec![-1.0, 0.5],
            vec![1.0, 2.0],
            vec![0.3, -0.4],
        ]);
        let neighbors = nearest_neighbors(&model, EntityId(0), 2).unwrap();
        assert_eq!(neighbors[0].0, EntityId(2));
        assert!((neighbors[0].1 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn orthonormal_basis_ties_break_by_id() {
        let (model, _) = model_of(vec![
            vec![1.0, 0.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0, 0.0],
            vec![0.0, 0.0, 1.0, 0.0],
            vec![0.0, 0.0, 0.0, 1.0],
        ]);
        let neighbors = nearest_neighbors(&model, EntityId(2), 3).unwrap();
        let ids: Vec<u32> = neighbors.iter().map(|(e, _)| e.0).collect();
        assert_eq!(ids, vec![0, 1, 3]);
        assert!(neighbors.iter().all(|(_, c)| *c == 0.0));
    }

    #[test]
    fn neighbors_match_exhaustive_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let entities: Vec<Vec<f64>> = (0..200)
            .map(|_| (0..8).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        let (model, _) = model_of(entities.clone());
        for probe in [0u32, 57, 199] {
            let got = nearest_neighbors(&model, EntityId(probe), 10).unwrap();
            // oracle: independent full sort over label-free vectors
            let mut all: Vec<(f64, u32)> = (0..200u32)
                .filter(|&i| i != probe)
                .map(|i| {
                    (
                        cosine(&entities[probe as usize], &entities[i as usize]),
                        i,
                    )
                })
                .collect();
            all.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
            for (lhs, rhs) in got.iter().zip(all.iter().take(10)) {
                assert_eq!(lhs.0 .0, rhs.1);
                assert!((lhs.1 - rhs.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn unknown_entity_is_an_error() {
        let (model, _) = model_of(vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
        assert!(nearest_neighbors(&model, EntityId(9), 1).is_err());
        assert!(matches!(
            nearest_neighbors(&model, EntityId(0), 0),
            Err(AnalyticsError::BadK { .. })
        ));
    }

    #[test]
    fn identical_scene_vectors_rank_first() {
        let (model, vocab) = model_of(vec![
            vec![0.6, 0.8],
            vec![0.6, 0.8],
            vec![-0.8, 0.6],
        ]);
        let ids = [EntityId(0), EntityId(1), EntityId(2)];
        let result = most_similar_scene_pairs(&model, &vocab, &ids, 10).unwrap();
        assert_eq!(result.pairs.len(), 3);
        assert_eq!((result.pairs[0].a.as_str(), result.pairs[0].b.as_str()), ("e0", "e1"));
        assert!((result.pairs[0].cosine - 1.0).abs() < 1e-12);
        // non-increasing scores
        for w in result.pairs.windows(2) {
            assert!(w[0].cosine >= w[1].cosine);
        }
    }

    #[test]
    fn hand_ordered_scene_pairs() {
        let inv = 1.0 / (0.81f64 + 0.01).sqrt();
        let (model, vocab) = model_of(vec![
            vec![1.0, 0.0],
            vec![0.9 * inv, 0.1 * inv],
            vec![0.0, 1.0],
        ]);
        let ids = [EntityId(0), EntityId(1), EntityId(2)];
        let result = most_similar_scene_pairs(&model, &vocab, &ids, 1).unwrap();
        assert_eq!((result.pairs[0].a.as_str(), result.pairs[0].b.as_str()), ("e0", "e1"));
    }

    #[test]
    fn top_k_larger_than_pair_count_returns_all() {
        let (model, vocab) = model_of(vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
        let result =
            most_similar_scene_pairs(&model, &vocab, &[EntityId(0), EntityId(1)], 99).unwrap();
        assert_eq!(result.pairs.len(), 1);
    }

    #[test]
    fn scene_pair_scoring_is_bit_symmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a: Vec<f64> = (0..16).map(|_| rng.random_range(-1.0..1.0)).collect();
        let b: Vec<f64> = (0..16).map(|_| rng.random_range(-1.0..1.0)).collect();
        let ab = dot(&a, &b) / (norm2(&a) * norm2(&b));
        let ba = dot(&b, &a) / (norm2(&b) * norm2(&a));
        assert_eq!(ab.to_bits(), ba.to_bits());
    }

    #[test]
    fn too_few_scenes_is_an_error() {
        let (model, vocab) = model_of(vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
        assert!(matches!(
            most_similar_scene_pairs(&model, &vocab, &[EntityId(0)], 1),
            Err(AnalyticsError::TooFewScenes { .. })
        ));
    }

    #[test]
    fn projection_carries_labels_and_classes() {
        let kg = crate::kg::parse_triples("e0\ttype\tC\ne1\ttype\tC\ne2\ttype\tD\n").unwrap();
        // vocab orders: e0, C, e1, e2, D
        let n = kg.entity_count();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let entities: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..4).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        let matrix = Matrix::from_vec(n, 4, entities.into_iter().flatten().collect());
        let config = ModelConfig::new(Algorithm::TransE, 4, 0).unwrap();
        let model = EmbeddingModel::from_parts(
            config,
            matrix,
            RelationParams::Vector(Matrix::zeros(1, 4)),
        )
        .unwrap();
        let ids: Vec<EntityId> = (0..n as u32).map(EntityId).collect();
        let projection = project_2d(
            &model,
            kg.entities(),
            &ids,
            ProjectionMethod::Pca,
            &ProjectionParams::default(),
            Some(&kg),
        )
        .unwrap();
        assert_eq!(projection.points.len(), n);
        let e0 = projection.points.iter().find(|p| p.label == "e0").unwrap();
        assert_eq!(e0.class.as_deref(), Some("C"));
        let class_c = projection.points.iter().find(|p| p.label == "C").unwrap();
        assert_eq!(class_c.class, None);
        assert!(projection.points.iter().all(|p| p.x.is_finite() && p.y.is_finite()));
    }
}
