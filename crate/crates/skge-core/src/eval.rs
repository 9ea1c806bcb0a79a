//! Intrinsic embedding quality metrics: categorization, coherence, and
//! semantic transitional distance, reported per class / per relation with
//! unweighted macro averages.
//!
//! All three are cosine-based and therefore invariant under a global
//! positive rescaling of the embeddings. Zero vectors score 0 with a
//! warning instead of erroring, so degenerate checkpoints still produce
//! reports. Nearest-neighbor ties break by ascending entity id.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::kg::{EntityId, KnowledgeGraph};
use crate::linalg::{cosine, dot, norm2};
use crate::model::{EmbeddingModel, ModelError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("knowledge graph has no type relation")]
    NoTypeRelation,
    #[error("neighborhood size k={k} must satisfy 1 <= k < entity count ({entities})")]
    BadK { k: usize, entities: usize },
    #[error("transitional distance needs vector relation parameters; {algorithm} uses matrices")]
    UnsupportedModel { algorithm: String },
    #[error("model does not match graph: {0}")]
    VocabMismatch(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Per-key scores plus any zero-vector warnings raised while computing them.
#[derive(Debug, Clone, PartialEq)]
pub struct Metric {
    pub scores: BTreeMap<String, f64>,
    pub warnings: Vec<String>,
}

/// All three metrics plus metadata; serializes to JSON with these names.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub algorithm: String,
    #[serde(rename = "d")]
    pub dimension: usize,
    pub k: usize,
    /// RFC 3339; filled by the caller, not by the metric code.
    pub timestamp: Option<String>,
    pub per_class_categorization: BTreeMap<String, f64>,
    pub per_class_coherence: BTreeMap<String, f64>,
    pub per_relation_transitional: BTreeMap<String, f64>,
    /// Reason the transitional section is empty (matrix-relation models).
    pub transitional_unsupported: Option<String>,
    pub macro_categorization: Option<f64>,
    pub macro_coherence: Option<f64>,
    pub macro_transitional: Option<f64>,
    pub warnings: Vec<String>,
}

fn check_vocab(model: &EmbeddingModel, kg: &KnowledgeGraph) -> Result<(), EvalError> {
    if model.entity_count() != kg.entity_count() || model.relation_count() != kg.relation_count() {
        return Err(EvalError::VocabMismatch(format!(
            "model has {} entities / {} relations, graph has {} / {}",
            model.entity_count(),
            model.relation_count(),
            kg.entity_count(),
            kg.relation_count()
        )));
    }
    Ok(())
}

fn entity_label(kg: &KnowledgeGraph, e: EntityId) -> String {
    kg.entities().label(e.0).expect("id in range").to_string()
}

/// Cosine between each class's mean instance vector and the class entity's
/// own vector. Classes with no instances are omitted (classes only exist
/// through their instances, so in practice every class is scored).
pub fn categorization(model: &EmbeddingModel, kg: &KnowledgeGraph) -> Result<Metric, EvalError> {
    check_vocab(model, kg)?;
    if kg.type_relation_id().is_none() {
        return Err(EvalError::NoTypeRelation);
    }
    let d = model.dimension();
    let mut scores = BTreeMap::new();
    let mut warnings = Vec::new();
    for class in kg.classes() {
        let instances = kg.instances_of(class);
        if instances.is_empty() {
            continue;
        }
        let mut mean = alloc::vec![0.0; d];
        for &e in instances {
            for (slot, v) in mean.iter_mut().zip(model.entity_vec(e)?) {
                *slot += v;
            }
        }
        let inv = 1.0 / instances.len() as f64;
        for slot in &mut mean {
            *slot *= inv;
        }
        let class_vec = model.entity_vec(class)?;
        let label = entity_label(kg, class);
        if norm2(&mean) == 0.0 || norm2(class_vec) == 0.0 {
            warnings.push(format!("categorization: zero vector for class {label:?}"));
            scores.insert(label, 0.0);
        } else {
            scores.insert(label, cosine(&mean, class_vec));
        }
    }
    Ok(Metric { scores, warnings })
}

/// Mean fraction of each instance's `k` nearest neighbors (by cosine,
/// excluding itself and all class entities) that share its class.
pub fn coherence(
    model: &EmbeddingModel,
    kg: &KnowledgeGraph,
    k: usize,
) -> Result<Metric, EvalError> {
    check_vocab(model, kg)?;
    if kg.type_relation_id().is_none() {
        return Err(EvalError::NoTypeRelation);
    }
    if k == 0 || k >= kg.entity_count() {
        return Err(EvalError::BadK {
            k,
            entities: kg.entity_count(),
        });
    }

    let candidates: Vec<EntityId> = (0..kg.entity_count() as u32)
        .map(EntityId)
        .filter(|e| !kg.is_class(*e))
        .collect();
    let norms: Vec<f64> = (0..model.entity_count())
        .map(|i| norm2(model.entity_vecs().row(i)))
        .collect();

    let mut scores = BTreeMap::new();
    let mut ranked: Vec<(f64, EntityId)> = Vec::with_capacity(candidates.len());
    for class in kg.classes() {
        let instances = kg.instances_of(class);
        if instances.is_empty() {
            continue;
        }
        let mut fraction_sum = 0.0;
        for &e in instances {
            let query = model.entity_vec(e)?;
            let query_norm = norms[e.index()];
            ranked.clear();
            for &other in &candidates {
                if other == e {
                    continue;
                }
                let denom = query_norm * norms[other.index()];
                let cos = if denom == 0.0 {
                    0.0
                } else {
                    dot(query, model.entity_vec(other)?) / denom
                };
                ranked.push((cos, other));
            }
            ranked.sort_unstable_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
            let taken = k.min(ranked.len());
            if taken == 0 {
                continue;
            }
            let same_class = ranked[..taken]
                .iter()
                .filter(|(_, nb)| kg.types_of(*nb).is_some_and(|ts| ts.contains(&class)))
                .count();
            fraction_sum += same_class as f64 / taken as f64;
        }
        scores.insert(
            entity_label(kg, class),
            fraction_sum / instances.len() as f64,
        );
    }
    Ok(Metric {
        scores,
        warnings: Vec::new(),
    })
}

/// Per relation, the mean cosine between `h + r` and `t` over its triples.
/// Relations with no triples are omitted. Matrix-relation models (RESCAL)
/// are unsupported.
pub fn transitional_distance(
    model: &EmbeddingModel,
    kg: &KnowledgeGraph,
) -> Result<Metric, EvalError> {
    check_vocab(model, kg)?;
    if !model.algorithm().has_vector_relations() {
        return Err(EvalError::UnsupportedModel {
            algorithm: model.algorithm().name().to_string(),
        });
    }
    let d = model.dimension();
    let mut scores = BTreeMap::new();
    let mut warnings = Vec::new();
    let mut translated = alloc::vec![0.0; d];
    for rid in 0..kg.relation_count() as u32 {
        let relation = crate::kg::RelationId(rid);
        let indexes = kg.triples_of_relation(relation);
        if indexes.is_empty() {
            continue;
        }
        let r = model.relation_row(relation)?;
        let mut sum = 0.0;
        let mut saw_zero = false;
        for &idx in indexes {
            let triple = kg.triples()[idx as usize];
            let h = model.entity_vec(triple.head)?;
            let t = model.entity_vec(triple.tail)?;
            for ((slot, hv), rv) in translated.iter_mut().zip(h).zip(r) {
                *slot = hv + rv;
            }
            if norm2(&translated) == 0.0 || norm2(t) == 0.0 {
                saw_zero = true;
            }
            sum += cosine(&translated, t);
        }
        let label = kg.relations().label(rid).expect("in range").to_string();
        if saw_zero {
            warnings.push(format!(
                "transitional: zero vector among triples of relation {label:?}"
            ));
        }
        scores.insert(label, sum / indexes.len() as f64);
    }
    Ok(Metric { scores, warnings })
}

fn macro_average(scores: &BTreeMap<String, f64>) -> Option<f64> {
    if scores.is_empty() {
        None
    } else {
        Some(scores.values().sum::<f64>() / scores.len() as f64)
    }
}

/// Aggregates the three metrics into one report. For matrix-relation models
/// the transitional section stays empty with the reason recorded.
pub fn eval_report(
    model: &EmbeddingModel,
    kg: &KnowledgeGraph,
    k: usize,
) -> Result<EvalReport, EvalError> {
    let cat = categorization(model, kg)?;
    let coh = coherence(model, kg, k)?;
    let (transitional_scores, transitional_unsupported, transitional_warnings) =
        match transitional_distance(model, kg) {
            Ok(metric) => (metric.scores, None, metric.warnings),
            Err(EvalError::UnsupportedModel { algorithm }) => (
                BTreeMap::new(),
                Some(format!(
                    "transitional distance unsupported: {algorithm} encodes relations as matrices"
                )),
                Vec::new(),
            ),
            Err(other) => return Err(other),
        };

    let mut warnings = cat.warnings;
    warnings.extend(coh.warnings);
    warnings.extend(transitional_warnings);

    Ok(EvalReport {
        algorithm: model.algorithm().name().to_string(),
        dimension: model.dimension(),
        k,
        timestamp: None,
        macro_categorization: macro_average(&cat.scores),
        macro_coherence: macro_average(&coh.scores),
        macro_transitional: macro_average(&transitional_scores),
        per_class_categorization: cat.scores,
        per_class_coherence: coh.scores,
        per_relation_transitional: transitional_scores,
        transitional_unsupported,
        warnings,
    })
}
