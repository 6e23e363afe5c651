//! Sliced-Wasserstein discrepancies on hyperbolic space.
//!
//! Every discrepancy follows the same Monte-Carlo recipe: draw `L`
//! directions, map each atom of both measures to a real coordinate along the
//! direction, and average the exact one-dimensional `W_p^p` over slices.
//! They differ only in the coordinate map:
//!
//! | method | coordinate of `x` for direction `v` | model |
//! |--------|--------------------------------------|-------|
//! | GHSW   | `arctanh(⟨x̃,ṽ⟩ / x₀)` (geodesic projection) | Lorentz |
//! | HHSW   | `−B_v(x)` (horospherical projection) | either |
//! | SWl    | `⟨x, θ⟩`, `θ ∈ S^d` | Lorentz ambient ℝ^{d+1} |
//! | SWp    | `⟨x, θ⟩`, `θ ∈ S^{d−1}` | ball ambient ℝ^d |
//!
//! All functions return the p-th power; [`sliced_distance`] takes the root.

mod measure;
mod wasserstein;

pub use measure::{DiscreteMeasure, Model};
pub use wasserstein::{solve_assignment, wasserstein_1d, wasserstein_geodesic_ref, EXACT_SOLVER_CAP};

pub(crate) use measure::convert_coords;
pub(crate) use wasserstein::{pow_abs, sorted_uniform_cost};

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::manifold::{dot, Direction};
use crate::projections::{
    busemann_ball_raw, busemann_raw, geodesic_coordinate_grad, geodesic_coordinate_raw, horo_coordinate_ball_grad,
    horo_coordinate_grad,
};
use crate::rng::{stream_rng, streams};
use wasserstein::merged_quantile_cost;

/// The four sliced discrepancies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Ghsw,
    Hhsw,
    Swl,
    Swp,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Ghsw, Method::Hhsw, Method::Swl, Method::Swp];

    pub fn name(self) -> &'static str {
        match self {
            Method::Ghsw => "GHSW",
            Method::Hhsw => "HHSW",
            Method::Swl => "SWl",
            Method::Swp => "SWp",
        }
    }

    /// The model in which the coordinate map is evaluated. HHSW has a closed
    /// form in both, so it follows `preferred`.
    pub fn evaluation_model(self, preferred: Model) -> Model {
        match self {
            Method::Ghsw | Method::Swl => Model::Lorentz,
            Method::Swp => Model::Poincare,
            Method::Hhsw => preferred,
        }
    }

    /// Dimension of the sampled directions for intrinsic dimension `d`.
    pub fn direction_dim(self, d: usize) -> usize {
        match self {
            Method::Swl => d + 1,
            _ => d,
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ghsw" => Ok(Method::Ghsw),
            "hhsw" => Ok(Method::Hhsw),
            "swl" => Ok(Method::Swl),
            "swp" => Ok(Method::Swp),
            other => Err(Error::domain(format!("unknown method '{other}'"))),
        }
    }
}

/// Monte-Carlo settings shared by every discrepancy.
#[derive(Debug, Clone, PartialEq)]
pub struct SlicedConfig {
    /// Number of projections `L`.
    pub num_projections: usize,
    /// Order `p ≥ 1`.
    pub order: f64,
    pub seed: u64,
    /// Evaluation model for HHSW; selects SWl (Lorentz) or SWp (Poincaré)
    /// in [`euclidean_sw`].
    pub model: Model,
}

impl SlicedConfig {
    pub fn new(num_projections: usize, order: f64, seed: u64) -> Self {
        Self { num_projections, order, seed, model: Model::Lorentz }
    }

    pub fn with_model(mut self, model: Model) -> Self {
        self.model = model;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_projections == 0 {
            return Err(Error::domain("number of projections must be positive"));
        }
        if !(self.order >= 1.0) || !self.order.is_finite() {
            return Err(Error::domain(format!("order p must be >= 1, got {}", self.order)));
        }
        Ok(())
    }
}

/// `count` directions drawn uniformly on S^{dim−1}, reproducible from `seed`.
pub fn sample_directions(dim: usize, count: usize, seed: u64) -> Result<Vec<Direction>> {
    if dim == 0 {
        return Err(Error::domain("directions need dimension >= 1"));
    }
    let mut rng = stream_rng(seed, streams::DIRECTIONS);
    let dirs = (0..count)
        .map(|_| loop {
            let v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
            if let Ok(d) = Direction::normalize(v) {
                break d;
            }
        })
        .collect();
    Ok(dirs)
}

/// A one-dimensional coordinate map together with its ambient gradient.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum SliceMap {
    GeodesicLorentz,
    HoroLorentz,
    HoroBall,
    Linear,
}

impl SliceMap {
    pub(crate) fn for_method(method: Method, eval_model: Model) -> Self {
        match (method, eval_model) {
            (Method::Ghsw, _) => SliceMap::GeodesicLorentz,
            (Method::Hhsw, Model::Lorentz) => SliceMap::HoroLorentz,
            (Method::Hhsw, Model::Poincare) => SliceMap::HoroBall,
            (Method::Swl | Method::Swp, _) => SliceMap::Linear,
        }
    }

    #[inline]
    pub(crate) fn coordinate(self, x: &[f64], dir: &[f64]) -> f64 {
        match self {
            SliceMap::GeodesicLorentz => geodesic_coordinate_raw(x, dir),
            SliceMap::HoroLorentz => -busemann_raw(x, dir),
            SliceMap::HoroBall => -busemann_ball_raw(x, dir),
            SliceMap::Linear => dot(x, dir),
        }
    }

    #[inline]
    pub(crate) fn gradient(self, x: &[f64], dir: &[f64], out: &mut [f64]) {
        match self {
            SliceMap::GeodesicLorentz => geodesic_coordinate_grad(x, dir, out),
            SliceMap::HoroLorentz => horo_coordinate_grad(x, dir, out),
            SliceMap::HoroBall => horo_coordinate_ball_grad(x, dir, out),
            SliceMap::Linear => out.copy_from_slice(dir),
        }
    }

    pub(crate) fn project_all(self, coords: &[f64], stride: usize, dir: &[f64], out: &mut Vec<f64>) {
        out.clear();
        out.extend(coords.chunks_exact(stride).map(|x| self.coordinate(x, dir)));
    }
}

fn check_pair(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<()> {
    if mu.model() != nu.model() {
        return Err(Error::domain(format!("model mismatch: {} vs {}", mu.model(), nu.model())));
    }
    if mu.dim() != nu.dim() {
        return Err(Error::Dimension { expected: mu.dim(), got: nu.dim() });
    }
    Ok(())
}

/// One slice: project both measures and solve the 1D problem.
fn slice_cost(
    map: SliceMap,
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    dir: &[f64],
    p: f64,
    buf: &mut (Vec<f64>, Vec<f64>),
) -> f64 {
    let (xs, ys) = buf;
    map.project_all(mu.coords(), mu.stride(), dir, xs);
    map.project_all(nu.coords(), nu.stride(), dir, ys);
    if mu.is_uniform() && nu.is_uniform() && xs.len() == ys.len() {
        xs.sort_unstable_by(f64::total_cmp);
        ys.sort_unstable_by(f64::total_cmp);
        sorted_uniform_cost(xs, ys, p)
    } else {
        let mut a: Vec<(f64, f64)> = xs.iter().copied().zip(mu.weights().iter().copied()).collect();
        let mut b: Vec<(f64, f64)> = ys.iter().copied().zip(nu.weights().iter().copied()).collect();
        a.sort_by(|x, y| x.0.total_cmp(&y.0));
        b.sort_by(|x, y| x.0.total_cmp(&y.0));
        merged_quantile_cost(&a, &b, p)
    }
}

/// Sliced `W_p^p` with caller-provided directions.
///
/// Slices are evaluated in parallel; per-slice values are collected in
/// direction order and summed sequentially, so the result does not depend
/// on the thread count.
pub fn sliced_with_directions(
    method: Method,
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    directions: &[Direction],
    order: f64,
    hhsw_model: Model,
) -> Result<f64> {
    check_pair(mu, nu)?;
    if directions.is_empty() {
        return Err(Error::domain("at least one direction is required"));
    }
    if !(order >= 1.0) {
        return Err(Error::domain(format!("order p must be >= 1, got {order}")));
    }
    let want = method.direction_dim(mu.dim());
    if let Some(bad) = directions.iter().find(|d| d.dim() != want) {
        return Err(Error::Dimension { expected: want, got: bad.dim() });
    }
    let eval = method.evaluation_model(hhsw_model);
    let map = SliceMap::for_method(method, eval);
    let (mu, nu) = (mu.to_model(eval), nu.to_model(eval));
    let values: Vec<f64> = directions
        .par_iter()
        .map_init(|| (Vec::new(), Vec::new()), |buf, dir| slice_cost(map, &mu, &nu, dir.unit(), order, buf))
        .collect();
    Ok(values.iter().sum::<f64>() / values.len() as f64)
}

/// Sliced `W_p^p` for `method`, drawing `cfg.num_projections` directions from `cfg.seed`.
pub fn sliced(method: Method, mu: &DiscreteMeasure, nu: &DiscreteMeasure, cfg: &SlicedConfig) -> Result<f64> {
    cfg.validate()?;
    check_pair(mu, nu)?;
    let dirs = sample_directions(method.direction_dim(mu.dim()), cfg.num_projections, cfg.seed)?;
    sliced_with_directions(method, mu, nu, &dirs, cfg.order, cfg.model)
}

/// `(sliced W_p^p)^{1/p}`.
pub fn sliced_distance(method: Method, mu: &DiscreteMeasure, nu: &DiscreteMeasure, cfg: &SlicedConfig) -> Result<f64> {
    Ok(sliced(method, mu, nu, cfg)?.powf(1.0 / cfg.order))
}

/// Geodesic hyperbolic sliced-Wasserstein, `GHSW_p^p`.
pub fn ghsw(mu: &DiscreteMeasure, nu: &DiscreteMeasure, cfg: &SlicedConfig) -> Result<f64> {
    sliced(Method::Ghsw, mu, nu, cfg)
}

/// Horospherical hyperbolic sliced-Wasserstein, `HHSW_p^p`, evaluated in `cfg.model`.
pub fn hhsw(mu: &DiscreteMeasure, nu: &DiscreteMeasure, cfg: &SlicedConfig) -> Result<f64> {
    sliced(Method::Hhsw, mu, nu, cfg)
}

/// Euclidean sliced-Wasserstein on the ambient coordinates of `cfg.model`
/// (SWl for Lorentz, SWp for Poincaré).
pub fn euclidean_sw(mu: &DiscreteMeasure, nu: &DiscreteMeasure, cfg: &SlicedConfig) -> Result<f64> {
    let method = match cfg.model {
        Model::Lorentz => Method::Swl,
        Model::Poincare => Method::Swp,
    };
    sliced(method, mu, nu, cfg)
}
