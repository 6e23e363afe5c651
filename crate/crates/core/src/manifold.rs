//! Hyperbolic geometry on the Lorentz (hyperboloid) model and the Poincaré ball.
//!
//! The Lorentz model is the canonical representation: a point of the
//! d-dimensional hyperbolic space is a vector `x ∈ ℝ^{d+1}` with
//! `⟨x,x⟩_L = −1` and `x₀ > 0`, where
//!
//! ```text
//! ⟨x,y⟩_L = −x₀y₀ + Σ_{i≥1} x_i y_i
//! ```
//!
//! The Poincaré ball is the open unit ball of ℝ^d with the conformal metric
//! `(2 / (1 − ‖x‖²))² ‖dx‖²`. Both are isometric through [`to_ball`] and
//! [`to_lorentz`]. Curvature is fixed at −1.

use crate::error::{Error, Result};

/// Tolerance on `|⟨x,x⟩_L + 1|` when accepting user-provided points.
pub const ON_MANIFOLD_TOL: f64 = 1e-6;

/// Below this tangent norm, `sinh(t)/t` and friends switch to a series.
const SMALL_NORM: f64 = 1e-4;

#[inline]
pub(crate) fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

#[inline]
pub(crate) fn norm_sq(x: &[f64]) -> f64 {
    dot(x, x)
}

/// Minkowski product without length checks.
#[inline]
pub(crate) fn mink(x: &[f64], y: &[f64]) -> f64 {
    -x[0] * y[0] + dot(&x[1..], &y[1..])
}

/// The Minkowski inner product `−x₀y₀ + Σ x_i y_i`.
pub fn minkowski_inner(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::Dimension { expected: x.len(), got: y.len() });
    }
    if x.len() < 2 {
        return Err(Error::Dimension { expected: 2, got: x.len() });
    }
    Ok(mink(x, y))
}

/// `sinh(t)/t`, exact at `t = 0`.
pub(crate) fn sinhc(t: f64) -> f64 {
    if t.abs() < SMALL_NORM {
        1.0 + t * t / 6.0
    } else {
        t.sinh() / t
    }
}

/// Recompute the time coordinate from the space part: `x₀ = √(1 + ‖x̃‖²)`.
#[inline]
pub(crate) fn renormalize_in_place(x: &mut [f64]) {
    x[0] = (1.0 + norm_sq(&x[1..])).sqrt();
}

/// Raw hyperboloid distance on coordinate slices.
///
/// Goes through the ball images `u = x̃/(1+x₀)`: the Minkowski chord is
/// `⟨x−y, x−y⟩_L = (1+x₀)(1+y₀)‖u−w‖² = 4 sinh²(d/2)`. Unlike the
/// arccosh of the inner product this stays accurate for nearby points far
/// from the origin, where both inner-product terms are huge and cancel.
#[inline]
pub(crate) fn lorentz_distance_raw(x: &[f64], y: &[f64]) -> f64 {
    let (sx, sy) = (1.0 + x[0], 1.0 + y[0]);
    let q: f64 = x[1..].iter().zip(&y[1..]).map(|(a, b)| (a / sx - b / sy).powi(2)).sum();
    let chord = (q * (sx * sy)).sqrt();
    2.0 * (chord / 2.0).asinh()
}

/// A point of the Lorentz model 𝕃^d.
#[derive(Debug, Clone, PartialEq)]
pub struct LorentzPoint {
    coords: Vec<f64>,
}

impl LorentzPoint {
    /// Validate and re-project `coords` onto the hyperboloid.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.len() < 2 {
            return Err(Error::Dimension { expected: 2, got: coords.len() });
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::domain("Lorentz point has non-finite coordinates"));
        }
        if coords[0] <= 0.0 {
            return Err(Error::domain("Lorentz point must have x0 > 0"));
        }
        let residual = (mink(&coords, &coords) + 1.0).abs();
        if residual > ON_MANIFOLD_TOL {
            return Err(Error::domain(format!("point is off the hyperboloid: |<x,x>_L + 1| = {residual:e}")));
        }
        Ok(Self::from_raw(coords))
    }

    /// Rescale a future-pointing timelike vector onto the hyperboloid,
    /// `x ← x / √(−⟨x,x⟩_L)`.
    pub fn normalize(coords: Vec<f64>) -> Result<Self> {
        if coords.len() < 2 {
            return Err(Error::Dimension { expected: 2, got: coords.len() });
        }
        let q = -mink(&coords, &coords);
        if !(q > 0.0) || coords[0] <= 0.0 || coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::domain("vector is not future-pointing timelike"));
        }
        let s = q.sqrt();
        Ok(Self::from_raw(coords.into_iter().map(|c| c / s).collect()))
    }

    /// Wrap coordinates produced internally, fixing round-off in `x₀`.
    pub(crate) fn from_raw(mut coords: Vec<f64>) -> Self {
        renormalize_in_place(&mut coords);
        Self { coords }
    }

    /// The origin `x⁰ = (1, 0, …, 0)` of 𝕃^d.
    pub fn origin(dim: usize) -> Self {
        let mut coords = vec![0.0; dim + 1];
        coords[0] = 1.0;
        Self { coords }
    }

    /// Intrinsic dimension d.
    pub fn dim(&self) -> usize {
        self.coords.len() - 1
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.coords
    }

    pub fn time(&self) -> f64 {
        self.coords[0]
    }

    pub fn space(&self) -> &[f64] {
        &self.coords[1..]
    }
}

/// A point of the open Poincaré ball 𝔹^d.
#[derive(Debug, Clone, PartialEq)]
pub struct PoincarePoint {
    coords: Vec<f64>,
}

impl PoincarePoint {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::Dimension { expected: 1, got: 0 });
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::domain("ball point has non-finite coordinates"));
        }
        let r2 = norm_sq(&coords);
        if r2 >= 1.0 {
            return Err(Error::domain(format!("point is not strictly inside the unit ball: |x|^2 = {r2}")));
        }
        Ok(Self { coords })
    }

    pub(crate) fn from_raw(coords: Vec<f64>) -> Self {
        debug_assert!(norm_sq(&coords) < 1.0);
        Self { coords }
    }

    pub fn origin(dim: usize) -> Self {
        Self { coords: vec![0.0; dim] }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.coords
    }

    pub fn norm_sq(&self) -> f64 {
        norm_sq(&self.coords)
    }
}

/// A tangent vector `v ∈ T_x𝕃^d`, i.e. `⟨v, x⟩_L = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector {
    base: LorentzPoint,
    vec: Vec<f64>,
}

impl TangentVector {
    /// Validate tangency of `vec` at `base`.
    pub fn new(base: LorentzPoint, vec: Vec<f64>) -> Result<Self> {
        if vec.len() != base.coords.len() {
            return Err(Error::Dimension { expected: base.coords.len(), got: vec.len() });
        }
        let scale = 1.0 + norm_sq(&vec).sqrt() * norm_sq(&base.coords).sqrt();
        let residual = mink(&vec, &base.coords).abs();
        if residual > ON_MANIFOLD_TOL * scale {
            return Err(Error::domain(format!("vector is not tangent: <v,x>_L = {residual:e}")));
        }
        Ok(Self { base, vec })
    }

    /// Orthogonal projection `z + ⟨x,z⟩_L x` of an ambient vector onto `T_x𝕃^d`.
    pub fn project(base: LorentzPoint, z: &[f64]) -> Self {
        assert_eq!(z.len(), base.coords.len(), "ambient dimension mismatch");
        let c = mink(&base.coords, z);
        let vec = z.iter().zip(&base.coords).map(|(zi, xi)| zi + c * xi).collect();
        Self { base, vec }
    }

    pub(crate) fn from_raw(base: LorentzPoint, vec: Vec<f64>) -> Self {
        Self { base, vec }
    }

    pub fn zero(base: LorentzPoint) -> Self {
        let vec = vec![0.0; base.coords.len()];
        Self { base, vec }
    }

    pub fn base(&self) -> &LorentzPoint {
        &self.base
    }

    pub fn vec(&self) -> &[f64] {
        &self.vec
    }

    /// `‖v‖_L = √⟨v,v⟩_L` (a genuine norm on tangent spaces).
    pub fn norm(&self) -> f64 {
        mink(&self.vec, &self.vec).max(0.0).sqrt()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { base: self.base.clone(), vec: self.vec.iter().map(|v| v * s).collect() }
    }
}

/// A unit vector ṽ ∈ S^{d−1}; equivalently an ideal point of the ball, or
/// the unit tangent `(0, ṽ)` at the hyperboloid origin.
#[derive(Debug, Clone, PartialEq)]
pub struct Direction {
    unit: Vec<f64>,
}

impl Direction {
    /// Accept a vector whose norm is within `ON_MANIFOLD_TOL` of 1.
    pub fn new(unit: Vec<f64>) -> Result<Self> {
        let n = norm_sq(&unit).sqrt();
        if unit.is_empty() || !((n - 1.0).abs() <= ON_MANIFOLD_TOL) {
            return Err(Error::domain(format!("direction must have unit norm, got {n}")));
        }
        Ok(Self { unit: unit.into_iter().map(|u| u / n).collect() })
    }

    /// Normalize any nonzero finite vector.
    pub fn normalize(v: Vec<f64>) -> Result<Self> {
        let n = norm_sq(&v).sqrt();
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::domain("cannot normalize a zero or non-finite vector"));
        }
        Ok(Self { unit: v.into_iter().map(|u| u / n).collect() })
    }

    pub fn dim(&self) -> usize {
        self.unit.len()
    }

    pub fn unit(&self) -> &[f64] {
        &self.unit
    }

    /// The Lorentz lift `v = (0, ṽ)`.
    pub fn lift(&self) -> Vec<f64> {
        std::iter::once(0.0).chain(self.unit.iter().copied()).collect()
    }

    pub fn neg(&self) -> Self {
        Self { unit: self.unit.iter().map(|u| -u).collect() }
    }
}

/// Geodesic distance `arccosh(−⟨x,y⟩_L)`.
pub fn lorentz_distance(x: &LorentzPoint, y: &LorentzPoint) -> f64 {
    assert_eq!(x.dim(), y.dim(), "dimension mismatch");
    lorentz_distance_raw(&x.coords, &y.coords)
}

/// Geodesic distance `arccosh(1 + 2‖x−y‖² / ((1−‖x‖²)(1−‖y‖²)))` on the ball.
pub fn poincare_distance(x: &PoincarePoint, y: &PoincarePoint) -> f64 {
    assert_eq!(x.dim(), y.dim(), "dimension mismatch");
    poincare_distance_raw(&x.coords, &y.coords)
}

pub(crate) fn poincare_distance_raw(x: &[f64], y: &[f64]) -> f64 {
    let diff: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
    let delta = 2.0 * diff / ((1.0 - norm_sq(x)) * (1.0 - norm_sq(y)));
    // arccosh(1 + δ) = 2 asinh(√(δ/2))
    2.0 * (delta / 2.0).max(0.0).sqrt().asinh()
}

/// `P_{L→B}(x) = (x₁, …, x_d) / (1 + x₀)`.
pub fn to_ball(x: &LorentzPoint) -> PoincarePoint {
    let mut out = vec![0.0; x.dim()];
    lorentz_to_ball_raw(&x.coords, &mut out);
    PoincarePoint::from_raw(out)
}

/// `P_{B→L}(b) = (1 + ‖b‖², 2b₁, …, 2b_d) / (1 − ‖b‖²)`.
pub fn to_lorentz(b: &PoincarePoint) -> LorentzPoint {
    let mut out = vec![0.0; b.dim() + 1];
    ball_to_lorentz_raw(&b.coords, &mut out);
    LorentzPoint::from_raw(out)
}

#[inline]
pub(crate) fn lorentz_to_ball_raw(x: &[f64], out: &mut [f64]) {
    let s = 1.0 / (1.0 + x[0]);
    for (o, xi) in out.iter_mut().zip(&x[1..]) {
        *o = xi * s;
    }
}

#[inline]
pub(crate) fn ball_to_lorentz_raw(b: &[f64], out: &mut [f64]) {
    let r2 = norm_sq(b);
    let s = 1.0 / (1.0 - r2);
    out[0] = (1.0 + r2) * s;
    for (o, bi) in out[1..].iter_mut().zip(b) {
        *o = 2.0 * bi * s;
    }
}

/// Point at parameter `t` of the unit-speed geodesic through the origin,
/// `γ(t) = cosh(t) x⁰ + sinh(t) v`.
pub fn geodesic_point(v: &Direction, t: f64) -> LorentzPoint {
    let sh = t.sinh();
    let mut coords = Vec::with_capacity(v.dim() + 1);
    coords.push(t.cosh());
    coords.extend(v.unit.iter().map(|u| sh * u));
    LorentzPoint::from_raw(coords)
}

/// Parallel transport along the geodesic from `v.base()` to `y`:
/// `v + ⟨y,v⟩_L / (1 − ⟨x,y⟩_L) · (x + y)`.
pub fn parallel_transport(v: &TangentVector, y: &LorentzPoint) -> TangentVector {
    let x = &v.base.coords;
    assert_eq!(x.len(), y.coords.len(), "dimension mismatch");
    let c = mink(&y.coords, &v.vec) / (1.0 - mink(x, &y.coords));
    let vec = v.vec.iter().zip(x.iter().zip(&y.coords)).map(|(vi, (xi, yi))| vi + c * (xi + yi)).collect();
    TangentVector { base: y.clone(), vec }
}

/// Exponential map `cosh(‖v‖_L) x + sinh(‖v‖_L) v / ‖v‖_L`.
pub fn exp_lorentz(v: &TangentVector) -> LorentzPoint {
    let n = v.norm();
    if n == 0.0 {
        return v.base.clone();
    }
    let (ch, shc) = (n.cosh(), sinhc(n));
    let coords = v.base.coords.iter().zip(&v.vec).map(|(xi, vi)| ch * xi + shc * vi).collect();
    LorentzPoint::from_raw(coords)
}

/// Logarithm map, the inverse of [`exp_lorentz`]:
/// `d_L(x,y) · (y + ⟨x,y⟩_L x) / ‖y + ⟨x,y⟩_L x‖_L`.
pub fn log_lorentz(x: &LorentzPoint, y: &LorentzPoint) -> TangentVector {
    assert_eq!(x.dim(), y.dim(), "dimension mismatch");
    let d = lorentz_distance(x, y);
    if d == 0.0 {
        return TangentVector::zero(x.clone());
    }
    let c = mink(&x.coords, &y.coords);
    let w: Vec<f64> = y.coords.iter().zip(&x.coords).map(|(yi, xi)| yi + c * xi).collect();
    // ‖w‖_L = sinh(d); the closed form avoids cancellation in ⟨w,w⟩_L.
    let s = d / d.sinh();
    TangentVector::from_raw(x.clone(), w.into_iter().map(|wi| wi * s).collect())
}

/// Möbius addition on the ball,
/// `x ⊕ y = ((1 + 2⟨x,y⟩ + ‖y‖²) x + (1 − ‖x‖²) y) / (1 + 2⟨x,y⟩ + ‖x‖²‖y‖²)`.
pub fn mobius_add(x: &[f64], y: &[f64]) -> Vec<f64> {
    assert_eq!(x.len(), y.len(), "dimension mismatch");
    let xy = dot(x, y);
    let (x2, y2) = (norm_sq(x), norm_sq(y));
    let den = 1.0 + 2.0 * xy + x2 * y2;
    let (a, b) = ((1.0 + 2.0 * xy + y2) / den, (1.0 - x2) / den);
    x.iter().zip(y).map(|(xi, yi)| a * xi + b * yi).collect()
}

/// Conformal factor `λ_x = 2 / (1 − ‖x‖²)`.
pub fn conformal_factor(x: &PoincarePoint) -> f64 {
    2.0 / (1.0 - x.norm_sq())
}

/// Exponential map of the Poincaré ball for a tangent vector `v` given in
/// ambient coordinates (Riemannian length `λ_x‖v‖`).
///
/// Evaluated as `x ⊕ tanh(λ_x‖v‖/2) v/‖v‖`, which is algebraically the
/// hyperbolic-function closed form but saturates instead of overflowing.
pub fn exp_poincare(x: &PoincarePoint, v: &[f64]) -> PoincarePoint {
    assert_eq!(x.dim(), v.len(), "dimension mismatch");
    let n = norm_sq(v).sqrt();
    if n == 0.0 {
        return x.clone();
    }
    let s = (conformal_factor(x) * n / 2.0).tanh() / n;
    let step: Vec<f64> = v.iter().map(|vi| vi * s).collect();
    let mut out = mobius_add(&x.coords, &step);
    clamp_into_ball(&mut out);
    PoincarePoint::from_raw(out)
}

/// Pull a vector that rounded onto or past the unit sphere back inside.
pub(crate) fn clamp_into_ball(x: &mut [f64]) {
    let r = norm_sq(x).sqrt();
    let max = 1.0 - f64::EPSILON;
    if r >= max {
        let s = max / r;
        x.iter_mut().for_each(|c| *c *= s);
    }
}
