//! Negative-sampling margin-ranking SGD.
//!
//! One loop serves all three algorithms: per positive triple, corrupt head
//! or tail uniformly ("raw" setting, no filtering against true triples),
//! take the hinge gradient, step, and optionally project touched entity
//! rows back onto the unit L2 ball. With `threads = 1` the run is fully
//! determined by the seed; the multi-threaded mode is hogwild-style and
//! explicitly nondeterministic.

use alloc::string::String;
use alloc::vec::Vec;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::kg::{EntityId, KnowledgeGraph, Triple};
use crate::linalg::{project_to_unit_ball, Matrix};
use crate::model::{
    Algorithm, EmbeddingModel, ModelConfig, ModelError, RelationParams, SparseGrad,
};
use crate::{fmath, model};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TrainError {
    #[error("cannot initialize a model over an empty knowledge graph")]
    EmptyGraph,
    #[error("model does not match graph: {0}")]
    VocabMismatch(String),
    #[error("invalid training config: {0}")]
    BadConfig(String),
    #[error("non-finite parameter detected at epoch {epoch}, batch {batch}")]
    NumericFailure { epoch: usize, batch: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Hyperparameters for [`train`]. `defaults_for` fills in the per-algorithm
/// conventions: TransE projects entities onto the unit ball after updates,
/// RESCAL uses L2 weight decay instead.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub margin: f64,
    pub negatives_per_positive: usize,
    pub normalize_entities: bool,
    pub l2_reg: f64,
    pub seed: u64,
    pub threads: usize,
    /// RESCAL relation parameters total `m * d^2`; above this budget the
    /// trainer warns (but proceeds) that the run may not scale.
    pub rescal_param_budget: usize,
}

impl TrainConfig {
    pub fn defaults_for(algorithm: Algorithm) -> Self {
        TrainConfig {
            epochs: 100,
            batch_size: 128,
            learning_rate: 0.01,
            margin: 1.0,
            negatives_per_positive: 1,
            normalize_entities: algorithm == Algorithm::TransE,
            l2_reg: if algorithm == Algorithm::Rescal {
                1e-3
            } else {
                0.0
            },
            seed: 42,
            threads: 1,
            rescal_param_budget: 10_000_000,
        }
    }

    fn validate(&self) -> Result<(), TrainError> {
        if self.epochs == 0 {
            return Err(TrainError::BadConfig(String::from("epochs must be >= 1")));
        }
        if self.batch_size == 0 {
            return Err(TrainError::BadConfig(String::from(
                "batch_size must be >= 1",
            )));
        }
        if self.negatives_per_positive == 0 {
            return Err(TrainError::BadConfig(String::from(
                "negatives_per_positive must be >= 1",
            )));
        }
        if !(self.learning_rate >= 0.0) {
            return Err(TrainError::BadConfig(String::from(
                "learning_rate must be non-negative",
            )));
        }
        if !(self.margin > 0.0) {
            return Err(TrainError::BadConfig(String::from(
                "margin must be positive",
            )));
        }
        if !(self.l2_reg >= 0.0) {
            return Err(TrainError::BadConfig(String::from(
                "l2_reg must be non-negative",
            )));
        }
        if self.threads == 0 {
            return Err(TrainError::BadConfig(String::from("threads must be >= 1")));
        }
        Ok(())
    }
}

/// Per-epoch training record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    /// Mean hinge loss over all sampled (positive, negative) pairs.
    pub mean_loss: f64,
    /// Fraction of sampled pairs with an active hinge.
    pub violation_rate: f64,
    /// Seconds; 0.0 when built without `std`.
    pub wall_time_secs: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainHistory {
    pub epochs: Vec<EpochRecord>,
}

/// Receives warnings and per-epoch records while [`train`] runs.
pub trait TrainObserver {
    fn warning(&mut self, _message: &str) {}
    fn epoch_done(&mut self, _epoch: usize, _record: &EpochRecord) {}
}

/// Observer that ignores everything.
#[derive(Debug, Default)]
pub struct NoopObserver;

impl TrainObserver for NoopObserver {}

/// Initializes a model for `kg`: entries uniform in `[-6/sqrt(d),
/// +6/sqrt(d)]`, with TransE/HolE relation vectors L2-normalized once.
/// Fully determined by `mcfg.seed`.
pub fn init_model(mcfg: ModelConfig, kg: &KnowledgeGraph) -> Result<EmbeddingModel, TrainError> {
    if kg.is_empty() {
        return Err(TrainError::EmptyGraph);
    }
    let n = kg.entity_count();
    let m = kg.relation_count();
    let d = mcfg.dimension;
    let bound = 6.0 / fmath::sqrt(d as f64);
    let mut rng = ChaCha8Rng::seed_from_u64(mcfg.seed);

    let mut entity_vecs = Matrix::zeros(n, d);
    for v in entity_vecs.data_mut() {
        *v = rng.random_range(-bound..=bound);
    }

    let rel_width = if mcfg.algorithm == Algorithm::Rescal {
        d * d
    } else {
        d
    };
    let mut rel = Matrix::zeros(m, rel_width);
    for v in rel.data_mut() {
        *v = rng.random_range(-bound..=bound);
    }
    let relation_params = if mcfg.algorithm == Algorithm::Rescal {
        RelationParams::MatrixPerRelation(rel)
    } else {
        for r in 0..m {
            let row = rel.row_mut(r);
            let norm = crate::linalg::norm2(row);
            if norm > 0.0 {
                for v in row {
                    *v /= norm;
                }
            }
        }
        RelationParams::Vector(rel)
    };
    Ok(EmbeddingModel::from_parts(mcfg, entity_vecs, relation_params)?)
}

/// Corrupts `pos` by replacing its head (probability 1/2) or tail with a
/// uniformly random different entity. Raw setting: the corrupted triple is
/// not checked against the true triple set.
pub fn sample_negative<R: Rng + ?Sized>(kg: &KnowledgeGraph, pos: Triple, rng: &mut R) -> Triple {
    let n = kg.entity_count() as u32;
    debug_assert!(n >= 2, "need at least 2 entities to corrupt");
    let corrupt_head = rng.random_bool(0.5);
    let original = if corrupt_head { pos.head } else { pos.tail };
    let replacement = loop {
        let candidate = EntityId(rng.random_range(0..n));
        if candidate != original {
            break candidate;
        }
    };
    if corrupt_head {
        Triple::new(replacement, pos.relation, pos.tail)
    } else {
        Triple::new(pos.head, pos.relation, replacement)
    }
}

#[cfg(feature = "std")]
fn now() -> Option<std::time::Instant> {
    Some(std::time::Instant::now())
}

#[cfg(not(feature = "std"))]
fn now() -> Option<()> {
    None
}

#[cfg(feature = "std")]
fn elapsed_secs(start: &Option<std::time::Instant>) -> f64 {
    start.map(|s| s.elapsed().as_secs_f64()).unwrap_or(0.0)
}

#[cfg(not(feature = "std"))]
fn elapsed_secs(_start: &Option<()>) -> f64 {
    0.0
}

fn apply_update(model: &mut EmbeddingModel, grad: &SparseGrad, lr: f64, l2_reg: f64) {
    for (eid, g) in &grad.entity_rows {
        let row = model.entity_vecs_mut().row_mut(eid.index());
        for (value, gi) in row.iter_mut().zip(g) {
            *value -= lr * (gi + l2_reg * *value);
        }
    }
    for (rid, g) in &grad.relation_rows {
        let row = model.relation_params_mut().row_mut(rid.index());
        for (value, gi) in row.iter_mut().zip(g) {
            *value -= lr * (gi + l2_reg * *value);
        }
    }
}

/// Runs SGD over `kg` and returns the trained model with its history.
///
/// Aborts with [`TrainError::NumericFailure`] as soon as any parameter goes
/// non-finite (checked per batch in deterministic mode, per epoch in
/// hogwild mode).
pub fn train(
    model: EmbeddingModel,
    kg: &KnowledgeGraph,
    tcfg: &TrainConfig,
    observer: &mut dyn TrainObserver,
) -> Result<(EmbeddingModel, TrainHistory), TrainError> {
    tcfg.validate()?;
    if kg.is_empty() {
        return Err(TrainError::EmptyGraph);
    }
    if model.entity_count() != kg.entity_count() || model.relation_count() != kg.relation_count() {
        return Err(TrainError::VocabMismatch(alloc::format!(
            "model has {}x{} vocab, graph has {}x{}",
            model.entity_count(),
            model.relation_count(),
            kg.entity_count(),
            kg.relation_count()
        )));
    }
    if kg.entity_count() < 2 {
        return Err(TrainError::BadConfig(String::from(
            "negative sampling needs at least 2 entities",
        )));
    }
    if model.algorithm() == Algorithm::Rescal {
        let rescal_params = model.relation_count() * model.dimension() * model.dimension();
        if rescal_params > tcfg.rescal_param_budget {
            observer.warning(&alloc::format!(
                "RESCAL relation parameters ({rescal_params}) exceed the budget \
                 ({}); expect poor scaling",
                tcfg.rescal_param_budget
            ));
        }
    }

    #[cfg(feature = "std")]
    if tcfg.threads > 1 {
        return hogwild::train_parallel(model, kg, tcfg, observer);
    }
    #[cfg(not(feature = "std"))]
    if tcfg.threads > 1 {
        observer.warning("built without std: threads > 1 falls back to single-threaded");
    }

    train_sequential(model, kg, tcfg, observer)
}

fn train_sequential(
    mut model: EmbeddingModel,
    kg: &KnowledgeGraph,
    tcfg: &TrainConfig,
    observer: &mut dyn TrainObserver,
) -> Result<(EmbeddingModel, TrainHistory), TrainError> {
    let mut rng = ChaCha8Rng::seed_from_u64(tcfg.seed);
    let mut order: Vec<u32> = (0..kg.triple_count() as u32).collect();
    let mut history = TrainHistory::default();

    for epoch in 0..tcfg.epochs {
        let start = now();
        shuffle(&mut order, &mut rng);
        let mut loss_sum = 0.0;
        let mut violations = 0usize;
        let mut pairs = 0usize;

        for (batch_index, batch) in order.chunks(tcfg.batch_size).enumerate() {
            for &triple_index in batch {
                let positive = kg.triples()[triple_index as usize];
                for _ in 0..tcfg.negatives_per_positive {
                    let negative = sample_negative(kg, positive, &mut rng);
                    let (loss, grad) = model::loss_and_grad(&model, positive, negative, tcfg.margin)?;
                    pairs += 1;
                    loss_sum += loss;
                    if loss > 0.0 {
                        violations += 1;
                        apply_update(&mut model, &grad, tcfg.learning_rate, tcfg.l2_reg);
                        if tcfg.normalize_entities {
                            for (eid, _) in &grad.entity_rows {
                                project_to_unit_ball(
                                    model.entity_vecs_mut().row_mut(eid.index()),
                                );
                            }
                        }
                    }
                }
            }
            if !model.all_finite() {
                return Err(TrainError::NumericFailure {
                    epoch,
                    batch: batch_index,
                });
            }
        }

        let record = EpochRecord {
            mean_loss: loss_sum / pairs.max(1) as f64,
            violation_rate: violations as f64 / pairs.max(1) as f64,
            wall_time_secs: elapsed_secs(&start),
        };
        observer.epoch_done(epoch, &record);
        history.epochs.push(record);
    }
    Ok((model, history))
}

/// Fisher-Yates; kept local so the shuffle stream is stable across `rand`
/// versions.
fn shuffle<R: Rng + ?Sized>(values: &mut [u32], rng: &mut R) {
    for i in (1..values.len()).rev() {
        let j = rng.random_range(0..=i);
        values.swap(i, j);
    }
}

#[cfg(feature = "std")]
mod hogwild {
    //! Lock-free parallel SGD. Parameter rows are updated through relaxed
    //! atomic loads/stores; concurrent writers may lose updates, which
    //! hogwild tolerates by design. Runs are NOT reproducible across
    //! invocations even with a fixed seed.

    use core::sync::atomic::{AtomicU64, Ordering};

    use super::*;
    use crate::model::{score_grad, Norm, ScoreGrad};

    /// Reinterprets a mutable f64 slice as atomic u64 words holding the
    /// float bits.
    ///
    /// Soundness: `AtomicU64` has the same size as `u64`/`f64` and its
    /// alignment equals its size; the assert refuses targets where `f64`
    /// allocations are less aligned. The exclusive borrow guarantees no
    /// non-atomic aliases exist while the view lives.
    fn as_atomic(data: &mut [f64]) -> &[AtomicU64] {
        assert!(core::mem::align_of::<f64>() >= core::mem::align_of::<AtomicU64>());
        unsafe { core::slice::from_raw_parts(data.as_mut_ptr() as *const AtomicU64, data.len()) }
    }

    struct AtomicParams<'a> {
        entities: &'a [AtomicU64],
        relations: &'a [AtomicU64],
        d: usize,
        rel_width: usize,
    }

    impl AtomicParams<'_> {
        fn load_entity(&self, id: EntityId, buf: &mut [f64]) {
            let base = id.index() * self.d;
            for (j, slot) in buf.iter_mut().enumerate() {
                *slot = f64::from_bits(self.entities[base + j].load(Ordering::Relaxed));
            }
        }

        fn load_relation(&self, id: crate::kg::RelationId, buf: &mut [f64]) {
            let base = id.index() * self.rel_width;
            for (j, slot) in buf.iter_mut().enumerate() {
                *slot = f64::from_bits(self.relations[base + j].load(Ordering::Relaxed));
            }
        }

        fn update_row(&self, words: &[AtomicU64], base: usize, grad: &[f64], lr: f64, l2: f64) {
            for (j, g) in grad.iter().enumerate() {
                let slot = &words[base + j];
                let old = f64::from_bits(slot.load(Ordering::Relaxed));
                slot.store((old - lr * (g + l2 * old)).to_bits(), Ordering::Relaxed);
            }
        }

        fn project_entity(&self, id: EntityId) {
            let base = id.index() * self.d;
            let mut sq = 0.0;
            for j in 0..self.d {
                let v = f64::from_bits(self.entities[base + j].load(Ordering::Relaxed));
                sq += v * v;
            }
            let norm = fmath::sqrt(sq);
            if norm > 1.0 {
                let inv = 1.0 / norm;
                for j in 0..self.d {
                    let slot = &self.entities[base + j];
                    let v = f64::from_bits(slot.load(Ordering::Relaxed));
                    slot.store((v * inv).to_bits(), Ordering::Relaxed);
                }
            }
        }
    }

    pub(super) fn train_parallel(
        mut model: EmbeddingModel,
        kg: &KnowledgeGraph,
        tcfg: &TrainConfig,
        observer: &mut dyn TrainObserver,
    ) -> Result<(EmbeddingModel, TrainHistory), TrainError> {
        observer.warning("threads > 1: hogwild updates make this run nondeterministic");
        let algorithm = model.algorithm();
        let norm = model.config().transe_norm;
        let d = model.dimension();
        let rel_width = if algorithm == Algorithm::Rescal { d * d } else { d };
        let n_triples = kg.triple_count();
        let threads = tcfg.threads.min(n_triples.max(1));

        let mut order: Vec<u32> = (0..n_triples as u32).collect();
        let mut order_rng = ChaCha8Rng::seed_from_u64(tcfg.seed);
        let mut history = TrainHistory::default();

        for epoch in 0..tcfg.epochs {
            let start = now();
            shuffle(&mut order, &mut order_rng);

            let (loss_sum, violations, pairs) = {
                let (entity_matrix, relation_params) = model.params_mut();
                let params = AtomicParams {
                    entities: as_atomic(entity_matrix.data_mut()),
                    relations: as_atomic(relation_params.matrix_mut().data_mut()),
                    d,
                    rel_width,
                };

                let chunk = n_triples.div_ceil(threads);
                let totals = std::sync::Mutex::new((0.0f64, 0usize, 0usize));
                std::thread::scope(|scope| {
                    for (worker, slice) in order.chunks(chunk).enumerate() {
                        let params = &params;
                        let totals = &totals;
                        let tcfg = &*tcfg;
                        let seed = tcfg
                            .seed
                            .wrapping_add(1 + epoch as u64)
                            .wrapping_mul(0x9E37_79B9_7F4A_7C15)
                            .wrapping_add(worker as u64);
                        scope.spawn(move || {
                            let mut rng = ChaCha8Rng::seed_from_u64(seed);
                            let mut h = alloc::vec![0.0; d];
                            let mut t = alloc::vec![0.0; d];
                            let mut r = alloc::vec![0.0; rel_width];
                            let mut corrupt = alloc::vec![0.0; d];
                            let mut local_loss = 0.0;
                            let mut local_violations = 0usize;
                            let mut local_pairs = 0usize;

                            for &idx in slice {
                                let positive = kg.triples()[idx as usize];
                                for _ in 0..tcfg.negatives_per_positive {
                                    let negative = sample_negative(kg, positive, &mut rng);
                                    params.load_entity(positive.head, &mut h);
                                    params.load_entity(positive.tail, &mut t);
                                    params.load_relation(positive.relation, &mut r);
                                    let pos_score = raw_score(algorithm, norm, &h, &r, &t);

                                    let (neg_h, neg_t): (&[f64], &[f64]) =
                                        if negative.head != positive.head {
                                            params.load_entity(negative.head, &mut corrupt);
                                            (&corrupt, &t)
                                        } else {
                                            params.load_entity(negative.tail, &mut corrupt);
                                            (&h, &corrupt)
                                        };
                                    let neg_score = raw_score(algorithm, norm, neg_h, &r, neg_t);

                                    let loss = tcfg.margin - pos_score + neg_score;
                                    local_pairs += 1;
                                    if loss > 0.0 {
                                        local_loss += loss;
                                        local_violations += 1;
                                        step(
                                            params, algorithm, norm, tcfg, positive, negative,
                                            &h, &r, &t, neg_h, neg_t,
                                        );
                                    }
                                }
                            }
                            let mut guard = totals.lock().unwrap();
                            guard.0 += local_loss;
                            guard.1 += local_violations;
                            guard.2 += local_pairs;
                        });
                    }
                });
                totals.into_inner().unwrap()
            };

            if !model.all_finite() {
                return Err(TrainError::NumericFailure { epoch, batch: 0 });
            }
            let record = EpochRecord {
                mean_loss: loss_sum / pairs.max(1) as f64,
                violation_rate: violations as f64 / pairs.max(1) as f64,
                wall_time_secs: elapsed_secs(&start),
            };
            observer.epoch_done(epoch, &record);
            history.epochs.push(record);
        }
        Ok((model, history))
    }

    fn raw_score(algorithm: Algorithm, norm: Norm, h: &[f64], r: &[f64], t: &[f64]) -> f64 {
        match algorithm {
            Algorithm::TransE => crate::model::transe_score(h, r, t, norm),
            Algorithm::Rescal => crate::model::rescal_score(h, r, t),
            Algorithm::HolE => crate::model::hole_score(h, r, t),
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn step(
        params: &AtomicParams<'_>,
        algorithm: Algorithm,
        norm: Norm,
        tcfg: &TrainConfig,
        positive: Triple,
        negative: Triple,
        h: &[f64],
        r: &[f64],
        t: &[f64],
        neg_h: &[f64],
        neg_t: &[f64],
    ) {
        let lr = tcfg.learning_rate;
        let l2 = tcfg.l2_reg;
        let d = params.d;
        // d(loss) = -d(score(pos)) + d(score(neg))
        let pos_grad: ScoreGrad = score_grad(algorithm, norm, h, r, t);
        let neg_grad: ScoreGrad = score_grad(algorithm, norm, neg_h, r, neg_t);

        let neg_scaled = |g: &[f64]| -> alloc::vec::Vec<f64> { g.iter().map(|x| -x).collect() };
        params.update_row(
            params.entities,
            positive.head.index() * d,
            &neg_scaled(&pos_grad.head),
            lr,
            l2,
        );
        params.update_row(
            params.entities,
            positive.tail.index() * d,
            &neg_scaled(&pos_grad.tail),
            lr,
            l2,
        );
        params.update_row(
            params.entities,
            negative.head.index() * d,
            &neg_grad.head,
            lr,
            l2,
        );
        params.update_row(
            params.entities,
            negative.tail.index() * d,
            &neg_grad.tail,
            lr,
            l2,
        );
        let mut rel_grad = neg_scaled(&pos_grad.relation);
        for (dst, g) in rel_grad.iter_mut().zip(&neg_grad.relation) {
            *dst += g;
        }
        params.update_row(
            params.relations,
            positive.relation.index() * params.rel_width,
            &rel_grad,
            lr,
            l2,
        );

        if tcfg.normalize_entities {
            params.project_entity(positive.head);
            params.project_entity(positive.tail);
            params.project_entity(negative.head);
            params.project_entity(negative.tail);
        }
    }
}
