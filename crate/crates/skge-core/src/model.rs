//! Scoring functions and analytic gradients for TransE, RESCAL, and HolE.
//!
//! All three models share one parameter representation: an `n x d` entity
//! matrix plus per-relation parameters, which are `d`-vectors for TransE and
//! HolE and `d x d` matrices for RESCAL. Scores are oriented so that higher
//! means more plausible; TransE therefore scores a triple as the negated
//! distance `-|h + r - t|`.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::kg::{EntityId, RelationId, Triple};
use crate::linalg::{dot, norm1, norm2, Matrix};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("dimension must be at least 1")]
    BadDimension,
    #[error("entity id {id} out of range (entity count {count})")]
    EntityOutOfRange { id: u32, count: usize },
    #[error("relation id {id} out of range (relation count {count})")]
    RelationOutOfRange { id: u32, count: usize },
    #[error("vector length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("parameter shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("margin must be positive, got {0}")]
    BadMargin(f64),
    #[error("non-finite value in model parameters")]
    NonFinite,
}

/// Which embedding algorithm a model was trained with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    TransE,
    Rescal,
    HolE,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::TransE => "transe",
            Algorithm::Rescal => "rescal",
            Algorithm::HolE => "hole",
        }
    }

    /// True when relation parameters are `d`-vectors rather than matrices.
    pub fn has_vector_relations(self) -> bool {
        !matches!(self, Algorithm::Rescal)
    }
}

impl core::str::FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "transe" => Ok(Algorithm::TransE),
            "rescal" => Ok(Algorithm::Rescal),
            "hole" => Ok(Algorithm::HolE),
            other => Err(alloc::format!("unknown algorithm {other:?}")),
        }
    }
}

/// Norm used inside the TransE distance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Norm {
    L1,
    L2,
}

impl core::str::FromStr for Norm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "l1" => Ok(Norm::L1),
            "l2" => Ok(Norm::L2),
            other => Err(alloc::format!("unknown norm {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub algorithm: Algorithm,
    pub dimension: usize,
    pub transe_norm: Norm,
    pub seed: u64,
}

impl ModelConfig {
    pub fn new(algorithm: Algorithm, dimension: usize, seed: u64) -> Result<Self, ModelError> {
        if dimension == 0 {
            return Err(ModelError::BadDimension);
        }
        Ok(ModelConfig {
            algorithm,
            dimension,
            transe_norm: Norm::L2,
            seed,
        })
    }

    pub fn with_norm(mut self, norm: Norm) -> Self {
        self.transe_norm = norm;
        self
    }
}

/// Per-relation parameters; `Vector` rows are `d` wide, `MatrixPerRelation`
/// rows are `d*d` wide (one row-major `d x d` matrix per relation).
#[derive(Debug, Clone, PartialEq)]
pub enum RelationParams {
    Vector(Matrix),
    MatrixPerRelation(Matrix),
}

impl RelationParams {
    pub fn count(&self) -> usize {
        match self {
            RelationParams::Vector(m) | RelationParams::MatrixPerRelation(m) => m.rows(),
        }
    }

    pub fn row(&self, r: usize) -> &[f64] {
        match self {
            RelationParams::Vector(m) | RelationParams::MatrixPerRelation(m) => m.row(r),
        }
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        match self {
            RelationParams::Vector(m) | RelationParams::MatrixPerRelation(m) => m.row_mut(r),
        }
    }

    pub fn matrix(&self) -> &Matrix {
        match self {
            RelationParams::Vector(m) | RelationParams::MatrixPerRelation(m) => m,
        }
    }

    pub fn matrix_mut(&mut self) -> &mut Matrix {
        match self {
            RelationParams::Vector(m) | RelationParams::MatrixPerRelation(m) => m,
        }
    }
}

/// Entity vectors plus relation parameters for one algorithm.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingModel {
    config: ModelConfig,
    entity_vecs: Matrix,
    relation_params: RelationParams,
}

impl EmbeddingModel {
    /// Assembles a model from raw parts, validating shapes and finiteness.
    pub fn from_parts(
        config: ModelConfig,
        entity_vecs: Matrix,
        relation_params: RelationParams,
    ) -> Result<Self, ModelError> {
        let d = config.dimension;
        if d == 0 {
            return Err(ModelError::BadDimension);
        }
        if entity_vecs.cols() != d {
            return Err(ModelError::ShapeMismatch(alloc::format!(
                "entity matrix is {}x{}, expected width {d}",
                entity_vecs.rows(),
                entity_vecs.cols()
            )));
        }
        let expected_width = match (config.algorithm, &relation_params) {
            (Algorithm::Rescal, RelationParams::MatrixPerRelation(_)) => d * d,
            (Algorithm::TransE | Algorithm::HolE, RelationParams::Vector(_)) => d,
            _ => {
                return Err(ModelError::ShapeMismatch(String::from(
                    "relation parameter kind does not match the algorithm",
                )))
            }
        };
        if relation_params.matrix().cols() != expected_width {
            return Err(ModelError::ShapeMismatch(alloc::format!(
                "relation rows are {} wide, expected {expected_width}",
                relation_params.matrix().cols()
            )));
        }
        if !entity_vecs.all_finite() || !relation_params.matrix().all_finite() {
            return Err(ModelError::NonFinite);
        }
        Ok(EmbeddingModel {
            config,
            entity_vecs,
            relation_params,
        })
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn algorithm(&self) -> Algorithm {
        self.config.algorithm
    }

    pub fn dimension(&self) -> usize {
        self.config.dimension
    }

    pub fn entity_count(&self) -> usize {
        self.entity_vecs.rows()
    }

    pub fn relation_count(&self) -> usize {
        self.relation_params.count()
    }

    pub fn entity_vecs(&self) -> &Matrix {
        &self.entity_vecs
    }

    pub fn entity_vecs_mut(&mut self) -> &mut Matrix {
        &mut self.entity_vecs
    }

    pub fn relation_params(&self) -> &RelationParams {
        &self.relation_params
    }

    pub fn relation_params_mut(&mut self) -> &mut RelationParams {
        &mut self.relation_params
    }

    /// Simultaneous mutable access to entity and relation storage.
    pub fn params_mut(&mut self) -> (&mut Matrix, &mut RelationParams) {
        (&mut self.entity_vecs, &mut self.relation_params)
    }

    pub fn entity_vec(&self, e: EntityId) -> Result<&[f64], ModelError> {
        if e.index() >= self.entity_count() {
            return Err(ModelError::EntityOutOfRange {
                id: e.0,
                count: self.entity_count(),
            });
        }
        Ok(self.entity_vecs.row(e.index()))
    }

    pub fn relation_row(&self, r: RelationId) -> Result<&[f64], ModelError> {
        if r.index() >= self.relation_count() {
            return Err(ModelError::RelationOutOfRange {
                id: r.0,
                count: self.relation_count(),
            });
        }
        Ok(self.relation_params.row(r.index()))
    }

    /// Total learnable parameter count; grows as `nd + md` for TransE/HolE
    /// and `nd + md^2` for RESCAL.
    pub fn parameter_count(&self) -> usize {
        self.entity_vecs.data().len() + self.relation_params.matrix().data().len()
    }

    pub fn all_finite(&self) -> bool {
        self.entity_vecs.all_finite() && self.relation_params.matrix().all_finite()
    }
}

/// Scores one triple; higher is more plausible for every algorithm.
pub fn score(model: &EmbeddingModel, triple: Triple) -> Result<f64, ModelError> {
    let h = model.entity_vec(triple.head)?;
    let t = model.entity_vec(triple.tail)?;
    let r = model.relation_row(triple.relation)?;
    Ok(match model.algorithm() {
        Algorithm::TransE => transe_score(h, r, t, model.config.transe_norm),
        Algorithm::Rescal => rescal_score(h, r, t),
        Algorithm::HolE => hole_score(h, r, t),
    })
}

/// TransE: `-|h + r - t|` under the configured norm; 0 iff the translation
/// is exact.
pub fn transe_score(h: &[f64], r: &[f64], t: &[f64], norm: Norm) -> f64 {
    let delta: Vec<f64> = h
        .iter()
        .zip(r)
        .zip(t)
        .map(|((h, r), t)| h + r - t)
        .collect();
    match norm {
        Norm::L1 => -norm1(&delta),
        Norm::L2 => -norm2(&delta),
    }
}

/// RESCAL bilinear form `h^T W_r t`; `w` is the row-major `d x d` relation
/// matrix.
pub fn rescal_score(h: &[f64], w: &[f64], t: &[f64]) -> f64 {
    let d = h.len();
    debug_assert_eq!(w.len(), d * d);
    let mut total = 0.0;
    for (i, hi) in h.iter().enumerate() {
        total += hi * dot(&w[i * d..(i + 1) * d], t);
    }
    total
}

/// HolE: `r . (h star t)` with `star` the circular correlation.
pub fn hole_score(h: &[f64], r: &[f64], t: &[f64]) -> f64 {
    dot(r, &circular_correlation_auto(h, t))
}

/// Circular correlation by its definition, `[a star b]_k = sum_i a_i
/// b_((k+i) mod d)`. This `O(d^2)` form is the normative reference the fast
/// path is checked against.
pub fn circular_correlation_direct(a: &[f64], b: &[f64]) -> Result<Vec<f64>, ModelError> {
    if a.len() != b.len() {
        return Err(ModelError::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    let d = a.len();
    let mut out = vec![0.0; d];
    for (k, slot) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (i, ai) in a.iter().enumerate() {
            acc += ai * b[(k + i) % d];
        }
        *slot = acc;
    }
    Ok(out)
}

/// Circular convolution `[a conv b]_k = sum_i a_i b_((k-i) mod d)`; shows up
/// in the HolE tail gradient.
fn circular_convolution_direct(a: &[f64], b: &[f64]) -> Vec<f64> {
    let d = a.len();
    debug_assert_eq!(b.len(), d);
    let mut out = vec![0.0; d];
    for (k, slot) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (i, ai) in a.iter().enumerate() {
            acc += ai * b[(k + d - i) % d];
        }
        *slot = acc;
    }
    out
}

/// Length above which the FFT path takes over when the `fft` feature is on.
#[cfg(feature = "fft")]
const FFT_THRESHOLD: usize = 64;

/// Transform-based `O(d log d)` circular correlation.
#[cfg(feature = "fft")]
pub fn circular_correlation_fft(a: &[f64], b: &[f64]) -> Result<Vec<f64>, ModelError> {
    if a.len() != b.len() {
        return Err(ModelError::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(fft::correlate(a, b))
}

#[cfg(feature = "fft")]
mod fft {
    use alloc::vec::Vec;
    use rustfft::num_complex::Complex;
    use rustfft::FftPlanner;

    /// corr(a, b) = IFFT(conj(FFT(a)) * FFT(b)), real parts.
    pub fn correlate(a: &[f64], b: &[f64]) -> Vec<f64> {
        let d = a.len();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(d);
        let inverse = planner.plan_fft_inverse(d);

        let mut fa: Vec<Complex<f64>> = a.iter().map(|&x| Complex::new(x, 0.0)).collect();
        let mut fb: Vec<Complex<f64>> = b.iter().map(|&x| Complex::new(x, 0.0)).collect();
        forward.process(&mut fa);
        forward.process(&mut fb);
        for (x, y) in fa.iter_mut().zip(&fb) {
            *x = x.conj() * y;
        }
        inverse.process(&mut fa);
        let scale = 1.0 / d as f64;
        fa.iter().map(|c| c.re * scale).collect()
    }
}

/// Dispatches between the definition and the FFT path. Both satisfy the same
/// contract to within 1e-9; training and evaluation call this.
pub fn circular_correlation(a: &[f64], b: &[f64]) -> Result<Vec<f64>, ModelError> {
    if a.len() != b.len() {
        return Err(ModelError::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(circular_correlation_auto(a, b))
}

fn circular_correlation_auto(a: &[f64], b: &[f64]) -> Vec<f64> {
    #[cfg(feature = "fft")]
    if a.len() >= FFT_THRESHOLD {
        return fft::correlate(a, b);
    }
    circular_correlation_direct(a, b).expect("equal lengths")
}

/// Sparse gradient touching only the parameter rows of the entities and
/// relations involved in one loss term. Rows are accumulated, so an id
/// appears at most once.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SparseGrad {
    pub entity_rows: Vec<(EntityId, Vec<f64>)>,
    pub relation_rows: Vec<(RelationId, Vec<f64>)>,
}

impl SparseGrad {
    pub fn is_empty(&self) -> bool {
        self.entity_rows.is_empty() && self.relation_rows.is_empty()
    }

    fn add_entity(&mut self, id: EntityId, grad: &[f64], scale: f64) {
        if let Some((_, row)) = self.entity_rows.iter_mut().find(|(e, _)| *e == id) {
            for (dst, g) in row.iter_mut().zip(grad) {
                *dst += scale * g;
            }
        } else {
            self.entity_rows
                .push((id, grad.iter().map(|g| scale * g).collect()));
        }
    }

    fn add_relation(&mut self, id: RelationId, grad: &[f64], scale: f64) {
        if let Some((_, row)) = self.relation_rows.iter_mut().find(|(r, _)| *r == id) {
            for (dst, g) in row.iter_mut().zip(grad) {
                *dst += scale * g;
            }
        } else {
            self.relation_rows
                .push((id, grad.iter().map(|g| scale * g).collect()));
        }
    }
}

/// Gradient of the score with respect to (h, r, t) for one triple, as dense
/// rows. The relation row is `d` wide for vector relations and `d*d` for
/// RESCAL.
pub struct ScoreGrad {
    pub head: Vec<f64>,
    pub relation: Vec<f64>,
    pub tail: Vec<f64>,
}

/// Analytic score gradient over raw parameter slices; shared by the
/// sequential and hogwild training paths.
pub fn score_grad(
    algorithm: Algorithm,
    norm: Norm,
    h: &[f64],
    r: &[f64],
    t: &[f64],
) -> ScoreGrad {
    let d = h.len();
    match algorithm {
        Algorithm::TransE => {
            let delta: Vec<f64> = h
                .iter()
                .zip(r)
                .zip(t)
                .map(|((h, r), t)| h + r - t)
                .collect();
            let dh: Vec<f64> = match norm {
                Norm::L2 => {
                    let n = norm2(&delta);
                    if n < 1e-300 {
                        vec![0.0; d]
                    } else {
                        delta.iter().map(|x| -x / n).collect()
                    }
                }
                Norm::L1 => delta
                    .iter()
                    .map(|&x| {
                        if x > 0.0 {
                            -1.0
                        } else if x < 0.0 {
                            1.0
                        } else {
                            0.0
                        }
                    })
                    .collect(),
            };
            let dt: Vec<f64> = dh.iter().map(|x| -x).collect();
            ScoreGrad {
                relation: dh.clone(),
                head: dh,
                tail: dt,
            }
        }
        Algorithm::Rescal => {
            debug_assert_eq!(r.len(), d * d);
            let mut dh = vec![0.0; d];
            let mut dt = vec![0.0; d];
            let mut dw = vec![0.0; d * d];
            for i in 0..d {
                let w_row = &r[i * d..(i + 1) * d];
                dh[i] = dot(w_row, t);
                for j in 0..d {
                    dt[j] += h[i] * w_row[j];
                    dw[i * d + j] = h[i] * t[j];
                }
            }
            ScoreGrad {
                head: dh,
                relation: dw,
                tail: dt,
            }
        }
        Algorithm::HolE => ScoreGrad {
            // s = r . (h star t):  ds/dh = corr(r, t), ds/dt = conv(r, h),
            // ds/dr = corr(h, t)
            head: circular_correlation_auto(r, t),
            relation: circular_correlation_auto(h, t),
            tail: circular_convolution_direct(r, h),
        },
    }
}

/// Margin ranking loss `max(0, margin - score(pos) + score(neg))` and its
/// sparse gradient. The gradient is empty whenever the hinge is inactive.
///
/// The negative must differ from the positive in exactly one of head/tail
/// and share its relation; that is the sampler's contract, asserted in
/// debug builds.
pub fn loss_and_grad(
    model: &EmbeddingModel,
    positive: Triple,
    negative: Triple,
    margin: f64,
) -> Result<(f64, SparseGrad), ModelError> {
    if !(margin > 0.0) {
        return Err(ModelError::BadMargin(margin));
    }
    debug_assert_eq!(positive.relation, negative.relation);
    debug_assert!(
        (positive.head == negative.head) != (positive.tail == negative.tail),
        "negative must differ from positive in exactly one slot"
    );
    let pos_score = score(model, positive)?;
    let neg_score = score(model, negative)?;
    let loss = margin - pos_score + neg_score;
    if loss <= 0.0 {
        return Ok((0.0, SparseGrad::default()));
    }

    let norm = model.config.transe_norm;
    let algorithm = model.algorithm();
    let mut grad = SparseGrad::default();

    // d(loss)/d(theta) = -d(pos_score) + d(neg_score)
    for (triple, scale) in [(positive, -1.0), (negative, 1.0)] {
        let h = model.entity_vec(triple.head)?;
        let t = model.entity_vec(triple.tail)?;
        let r = model.relation_row(triple.relation)?;
        let sg = score_grad(algorithm, norm, h, r, t);
        grad.add_entity(triple.head, &sg.head, scale);
        grad.add_entity(triple.tail, &sg.tail, scale);
        grad.add_relation(triple.relation, &sg.relation, scale);
    }
    Ok((loss, grad))
}
