use crate::error::{Error, Result};
use crate::manifold::{
    ball_to_lorentz_raw, lorentz_to_ball_raw, mink, norm_sq, LorentzPoint, PoincarePoint, ON_MANIFOLD_TOL,
};

/// Which model the coordinates of a measure live in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Model {
    Lorentz,
    Poincare,
}

impl Model {
    /// Number of stored coordinates per point for intrinsic dimension `d`.
    pub fn ambient_dim(self, d: usize) -> usize {
        match self {
            Model::Lorentz => d + 1,
            Model::Poincare => d,
        }
    }
}

impl std::fmt::Display for Model {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Model::Lorentz => "lorentz",
            Model::Poincare => "poincare",
        })
    }
}

const WEIGHT_TOL: f64 = 1e-12;

/// A weighted point cloud `Σ αᵢ δ_{xᵢ}` on one model of hyperbolic space.
///
/// Coordinates are stored row-major: point `i` occupies
/// `coords[i * stride .. (i + 1) * stride]` with `stride = model.ambient_dim(dim)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    model: Model,
    dim: usize,
    coords: Vec<f64>,
    weights: Vec<f64>,
    uniform: bool,
}

impl DiscreteMeasure {
    /// Uniform weights over Lorentz points.
    pub fn uniform_lorentz(points: &[LorentzPoint]) -> Result<Self> {
        let dim = common_dim(points.iter().map(|p| p.dim()))?;
        let coords = points.iter().flat_map(|p| p.coords().iter().copied()).collect();
        Ok(Self::uniform_raw(Model::Lorentz, dim, coords))
    }

    /// Uniform weights over ball points.
    pub fn uniform_poincare(points: &[PoincarePoint]) -> Result<Self> {
        let dim = common_dim(points.iter().map(|p| p.dim()))?;
        let coords = points.iter().flat_map(|p| p.coords().iter().copied()).collect();
        Ok(Self::uniform_raw(Model::Poincare, dim, coords))
    }

    pub fn weighted_lorentz(points: &[LorentzPoint], weights: Vec<f64>) -> Result<Self> {
        let mut m = Self::uniform_lorentz(points)?;
        m.set_weights(weights)?;
        Ok(m)
    }

    pub fn weighted_poincare(points: &[PoincarePoint], weights: Vec<f64>) -> Result<Self> {
        let mut m = Self::uniform_poincare(points)?;
        m.set_weights(weights)?;
        Ok(m)
    }

    /// Build from flat coordinates, validating every point against its model.
    pub fn from_flat(model: Model, dim: usize, coords: Vec<f64>, weights: Option<Vec<f64>>) -> Result<Self> {
        let stride = model.ambient_dim(dim);
        if dim == 0 || coords.is_empty() || !coords.len().is_multiple_of(stride) {
            return Err(Error::domain("coordinate buffer does not hold a whole number of points"));
        }
        for p in coords.chunks_exact(stride) {
            check_point(model, p)?;
        }
        let mut m = Self::uniform_raw(model, dim, coords);
        if let Some(w) = weights {
            m.set_weights(w)?;
        }
        Ok(m)
    }

    pub(crate) fn uniform_raw(model: Model, dim: usize, coords: Vec<f64>) -> Self {
        let n = coords.len() / model.ambient_dim(dim);
        Self { model, dim, coords, weights: vec![1.0 / n as f64; n], uniform: true }
    }

    fn set_weights(&mut self, weights: Vec<f64>) -> Result<()> {
        if weights.len() != self.len() {
            return Err(Error::Dimension { expected: self.len(), got: weights.len() });
        }
        if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(Error::domain("weights must be nonnegative and finite"));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_TOL {
            return Err(Error::domain(format!("weights must sum to 1, got {total}")));
        }
        self.uniform = false;
        self.weights = weights;
        Ok(())
    }

    pub fn model(&self) -> Model {
        self.model
    }

    /// Intrinsic dimension d.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn stride(&self) -> usize {
        self.model.ambient_dim(self.dim)
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// True when the weights were never set explicitly (all equal to 1/n).
    pub fn is_uniform(&self) -> bool {
        self.uniform
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn point(&self, i: usize) -> &[f64] {
        let s = self.stride();
        &self.coords[i * s..(i + 1) * s]
    }

    pub fn points(&self) -> std::slice::ChunksExact<'_, f64> {
        self.coords.chunks_exact(self.stride())
    }

    /// The same measure expressed in `model`.
    pub fn to_model(&self, model: Model) -> DiscreteMeasure {
        if model == self.model {
            return self.clone();
        }
        let coords = convert_coords(self.model, model, self.dim, &self.coords);
        Self { model, dim: self.dim, coords, weights: self.weights.clone(), uniform: self.uniform }
    }

    pub fn lorentz_points(&self) -> Vec<LorentzPoint> {
        self.to_model(Model::Lorentz).points().map(|p| LorentzPoint::from_raw(p.to_vec())).collect()
    }

    pub fn poincare_points(&self) -> Vec<PoincarePoint> {
        self.to_model(Model::Poincare).points().map(|p| PoincarePoint::from_raw(p.to_vec())).collect()
    }
}

fn common_dim(mut dims: impl Iterator<Item = usize>) -> Result<usize> {
    let first = dims.next().ok_or_else(|| Error::domain("measure must have at least one atom"))?;
    for d in dims {
        if d != first {
            return Err(Error::Dimension { expected: first, got: d });
        }
    }
    Ok(first)
}

fn check_point(model: Model, p: &[f64]) -> Result<()> {
    if p.iter().any(|c| !c.is_finite()) {
        return Err(Error::domain("non-finite coordinate"));
    }
    match model {
        Model::Lorentz => {
            if p[0] <= 0.0 || (mink(p, p) + 1.0).abs() > ON_MANIFOLD_TOL {
                return Err(Error::domain("point is off the hyperboloid"));
            }
        }
        Model::Poincare => {
            if norm_sq(p) >= 1.0 {
                return Err(Error::domain("point is outside the open unit ball"));
            }
        }
    }
    Ok(())
}

/// Convert a flat coordinate buffer between models.
pub(crate) fn convert_coords(from: Model, to: Model, dim: usize, coords: &[f64]) -> Vec<f64> {
    let (fs, ts) = (from.ambient_dim(dim), to.ambient_dim(dim));
    let n = coords.len() / fs;
    let mut out = vec![0.0; n * ts];
    for (src, dst) in coords.chunks_exact(fs).zip(out.chunks_exact_mut(ts)) {
        match (from, to) {
            (Model::Lorentz, Model::Poincare) => lorentz_to_ball_raw(src, dst),
            (Model::Poincare, Model::Lorentz) => ball_to_lorentz_raw(src, dst),
            _ => dst.copy_from_slice(src),
        }
    }
    out
}
