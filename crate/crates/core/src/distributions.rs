//! Wrapped normal distributions on the Lorentz model.
//!
//! `G(μ, Σ)` is the pushforward of `N(0, Σ)` on `T_{x⁰}𝕃^d` through parallel
//! transport to `T_μ𝕃^d` followed by the exponential map at `μ`.

use nalgebra::{DMatrix, DVector};
use rand::distr::{weighted::WeightedIndex, Distribution};
use rand::Rng as _;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::manifold::{
    exp_lorentz, log_lorentz, lorentz_distance, parallel_transport, sinhc, LorentzPoint, TangentVector,
};
use crate::rng::{stream_rng, streams, Rng};

/// Anything the flows can draw target batches from.
pub trait Sampler: Sync {
    /// Intrinsic dimension of the samples.
    fn dim(&self) -> usize;

    fn sample_with(&self, n: usize, rng: &mut Rng) -> Vec<LorentzPoint>;

    /// `n` samples reproducible from `seed`.
    fn sample(&self, n: usize, seed: u64) -> Vec<LorentzPoint> {
        self.sample_with(n, &mut stream_rng(seed, streams::SAMPLES))
    }
}

/// Wrapped normal distribution `G(μ, Σ)`.
#[derive(Debug, Clone)]
pub struct WrappedNormal {
    mean: LorentzPoint,
    cov: DMatrix<f64>,
    chol: DMatrix<f64>,
    log_norm: f64,
}

impl WrappedNormal {
    /// `cov` is a row-major d×d symmetric positive-definite matrix.
    pub fn new(mean: LorentzPoint, cov: &[f64]) -> Result<Self> {
        let d = mean.dim();
        if cov.len() != d * d {
            return Err(Error::Dimension { expected: d * d, got: cov.len() });
        }
        let cov = DMatrix::from_row_slice(d, d, cov);
        if (&cov - cov.transpose()).amax() > 1e-12 {
            return Err(Error::domain("covariance must be symmetric"));
        }
        let chol = cov.clone().cholesky().ok_or_else(|| Error::domain("covariance is not positive definite"))?.l();
        let log_det = 2.0 * chol.diagonal().iter().map(|x| x.ln()).sum::<f64>();
        if !log_det.is_finite() {
            return Err(Error::domain("covariance is not positive definite"));
        }
        let log_norm = -0.5 * (d as f64 * (2.0 * std::f64::consts::PI).ln() + log_det);
        Ok(Self { mean, cov, chol, log_norm })
    }

    /// `G(μ, σ² I)`.
    pub fn isotropic(mean: LorentzPoint, sigma2: f64) -> Result<Self> {
        let d = mean.dim();
        let mut cov = vec![0.0; d * d];
        for i in 0..d {
            cov[i * d + i] = sigma2;
        }
        Self::new(mean, &cov)
    }

    pub fn mean(&self) -> &LorentzPoint {
        &self.mean
    }

    /// Row-major covariance.
    pub fn cov(&self) -> Vec<f64> {
        self.cov.transpose().as_slice().to_vec()
    }

    /// Push a tangent sample `z̃ ∈ ℝ^d` at the origin through the sampling pipeline.
    pub fn push_forward(&self, z: &[f64]) -> LorentzPoint {
        let d = self.mean.dim();
        let origin = LorentzPoint::origin(d);
        let mut lifted = Vec::with_capacity(d + 1);
        lifted.push(0.0);
        lifted.extend_from_slice(z);
        let u = parallel_transport(&TangentVector::from_raw(origin, lifted), &self.mean);
        exp_lorentz(&u)
    }

    /// Log-density with respect to the Riemannian volume:
    /// `log N(z̃; 0, Σ) − (d−1) log(sinh‖u‖_L / ‖u‖_L)`.
    pub fn log_prob(&self, x: &LorentzPoint) -> f64 {
        let d = self.mean.dim();
        assert_eq!(x.dim(), d, "dimension mismatch");
        let u = log_lorentz(&self.mean, x);
        let z = parallel_transport(&u, &LorentzPoint::origin(d));
        let zt = DVector::from_column_slice(&z.vec()[1..]);
        let w = self.chol.solve_lower_triangular(&zt).expect("Cholesky factor is invertible");
        let r = lorentz_distance(&self.mean, x);
        self.log_norm - 0.5 * w.norm_squared() - (d as f64 - 1.0) * sinhc(r).ln()
    }

    fn draw_tangent(&self, rng: &mut Rng) -> Vec<f64> {
        let d = self.mean.dim();
        let eps = DVector::from_iterator(d, (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)));
        (&self.chol * eps).as_slice().to_vec()
    }
}

impl Sampler for WrappedNormal {
    fn dim(&self) -> usize {
        self.mean.dim()
    }

    fn sample_with(&self, n: usize, rng: &mut Rng) -> Vec<LorentzPoint> {
        (0..n).map(|_| self.push_forward(&self.draw_tangent(rng))).collect()
    }
}

/// Finite mixture of wrapped normals.
#[derive(Debug, Clone)]
pub struct WrappedMixture {
    components: Vec<WrappedNormal>,
    weights: Vec<f64>,
    picker: WeightedIndex<f64>,
}

impl WrappedMixture {
    pub fn new(components: Vec<WrappedNormal>, weights: Vec<f64>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::domain("mixture needs at least one component"));
        }
        if weights.len() != components.len() {
            return Err(Error::Dimension { expected: components.len(), got: weights.len() });
        }
        let d = components[0].dim();
        if let Some(c) = components.iter().find(|c| c.dim() != d) {
            return Err(Error::Dimension { expected: d, got: c.dim() });
        }
        let total: f64 = weights.iter().sum();
        if weights.iter().any(|w| !(*w >= 0.0)) || (total - 1.0).abs() > 1e-12 {
            return Err(Error::domain("mixture weights must lie on the simplex"));
        }
        let picker = WeightedIndex::new(&weights).map_err(|e| Error::domain(e.to_string()))?;
        Ok(Self { components, weights, picker })
    }

    /// Equal weights over `components`.
    pub fn uniform(components: Vec<WrappedNormal>) -> Result<Self> {
        let k = components.len().max(1);
        Self::new(components, vec![1.0 / k as f64; k])
    }

    pub fn components(&self) -> &[WrappedNormal] {
        &self.components
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Samples paired with the index of the component they came from.
    pub fn sample_labeled(&self, n: usize, seed: u64) -> Vec<(usize, LorentzPoint)> {
        let mut labels = stream_rng(seed, streams::MIXTURE_LABELS);
        let mut gauss = stream_rng(seed, streams::SAMPLES);
        self.draw(n, &mut labels, &mut gauss)
    }

    fn draw(&self, n: usize, labels: &mut Rng, gauss: &mut Rng) -> Vec<(usize, LorentzPoint)> {
        (0..n)
            .map(|_| {
                let c = self.picker.sample(labels);
                let comp = &self.components[c];
                (c, comp.push_forward(&comp.draw_tangent(gauss)))
            })
            .collect()
    }

    pub fn log_prob(&self, x: &LorentzPoint) -> f64 {
        let terms: Vec<f64> = self.components.iter().zip(&self.weights).map(|(c, w)| w.ln() + c.log_prob(x)).collect();
        let m = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        m + terms.iter().map(|t| (t - m).exp()).sum::<f64>().ln()
    }
}

impl Sampler for WrappedMixture {
    fn dim(&self) -> usize {
        self.components[0].dim()
    }

    fn sample_with(&self, n: usize, rng: &mut Rng) -> Vec<LorentzPoint> {
        // One parent stream feeds two children so labels and Gaussians stay decoupled.
        let (a, b): (u64, u64) = (rng.random(), rng.random());
        let mut labels = stream_rng(a, streams::MIXTURE_LABELS);
        let mut gauss = stream_rng(b, streams::SAMPLES);
        self.draw(n, &mut labels, &mut gauss).into_iter().map(|(_, x)| x).collect()
    }

    fn sample(&self, n: usize, seed: u64) -> Vec<LorentzPoint> {
        self.sample_labeled(n, seed).into_iter().map(|(_, x)| x).collect()
    }
}
