//! Projections onto geodesics through the origin.
//!
//! A direction ṽ ∈ S^{d−1} indexes the geodesic `γ(t) = cosh(t) x⁰ + sinh(t) v`
//! with `v = (0, ṽ)`. Two projections map the space onto it:
//!
//! * the geodesic (closest-point) projection `P^v`, and
//! * the horospherical projection `P̃^v`, which moves points along the level
//!   sets of the Busemann function `B_v(x) = log(−⟨x, x⁰ + v⟩_L)`.
//!
//! The coordinate of a point of the geodesic is its signed parameter `t`.
//! Both composed coordinate maps have closed forms:
//!
//! ```text
//! t^v(P^v(x)) = arctanh(−⟨x,v⟩_L / ⟨x,x⁰⟩_L)
//! t^v(P̃^v(x)) = −B_v(x)
//! ```
//!
//! The `*_raw` functions work on coordinate slices and are the hot paths used
//! by the sliced discrepancies; they perform no validation.

use crate::error::{Error, Result};
use crate::manifold::{
    dot, geodesic_point, lorentz_distance, norm_sq, poincare_distance, Direction, LorentzPoint, PoincarePoint,
};

/// Signed unit-speed coordinate along an origin geodesic.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct GeodesicCoordinate(pub f64);

impl GeodesicCoordinate {
    pub fn value(self) -> f64 {
        self.0
    }
}

/// `sign` with `sign(0) = +1`.
#[inline]
fn sign(x: f64) -> f64 {
    if x < 0.0 {
        -1.0
    } else {
        1.0
    }
}

/// Largest admissible `|tanh t|` before `arctanh` overflows.
const MAX_TANH: f64 = 1.0 - f64::EPSILON / 2.0;

#[inline]
fn check_dims(x_dim: usize, v: &Direction) {
    assert_eq!(x_dim, v.dim(), "point and direction dimensions differ");
}

/// `arctanh(⟨x̃, ṽ⟩ / x₀)`.
#[inline]
pub(crate) fn geodesic_coordinate_raw(x: &[f64], dir: &[f64]) -> f64 {
    let s = dot(&x[1..], dir);
    (s / x[0]).clamp(-MAX_TANH, MAX_TANH).atanh()
}

/// Ambient gradient of [`geodesic_coordinate_raw`]:
/// `(−s, x₀ ṽ) / (x₀² − s²)`.
#[inline]
pub(crate) fn geodesic_coordinate_grad(x: &[f64], dir: &[f64], out: &mut [f64]) {
    let s = dot(&x[1..], dir);
    let den = x[0] * x[0] - s * s;
    out[0] = -s / den;
    let c = x[0] / den;
    for (o, d) in out[1..].iter_mut().zip(dir) {
        *o = c * d;
    }
}

/// `B_v(x) = log(x₀ − ⟨x̃, ṽ⟩)`, floored at the smallest positive double.
#[inline]
pub(crate) fn busemann_raw(x: &[f64], dir: &[f64]) -> f64 {
    (x[0] - dot(&x[1..], dir)).max(f64::MIN_POSITIVE).ln()
}

/// Ambient gradient of the horospherical coordinate `−B_v(x)`.
#[inline]
pub(crate) fn horo_coordinate_grad(x: &[f64], dir: &[f64], out: &mut [f64]) {
    let a = x[0] - dot(&x[1..], dir);
    out[0] = -1.0 / a;
    for (o, d) in out[1..].iter_mut().zip(dir) {
        *o = d / a;
    }
}

/// `B_ṽ(b) = log(‖ṽ − b‖² / (1 − ‖b‖²))`.
#[inline]
pub(crate) fn busemann_ball_raw(b: &[f64], dir: &[f64]) -> f64 {
    let diff: f64 = dir.iter().zip(b).map(|(v, x)| (v - x) * (v - x)).sum();
    (diff / (1.0 - norm_sq(b))).ln()
}

/// Gradient of `−B_ṽ(b)` with respect to the ball coordinates.
#[inline]
pub(crate) fn horo_coordinate_ball_grad(b: &[f64], dir: &[f64], out: &mut [f64]) {
    let diff: f64 = dir.iter().zip(b).map(|(v, x)| (v - x) * (v - x)).sum();
    let den = 1.0 - norm_sq(b);
    for ((o, v), x) in out.iter_mut().zip(dir).zip(b) {
        *o = 2.0 * (v - x) / diff - 2.0 * x / den;
    }
}

/// Closest-point projection onto the geodesic `span(x⁰, v) ∩ 𝕃^d`:
/// `(−⟨x,x⁰⟩_L x⁰ + ⟨x,v⟩_L v) / √(⟨x,x⁰⟩²_L − ⟨x,v⟩²_L)`.
pub fn geodesic_project(x: &LorentzPoint, v: &Direction) -> LorentzPoint {
    check_dims(x.dim(), v);
    let s = dot(x.space(), v.unit());
    // ⟨x,x⁰⟩² − ⟨x,v⟩² = 1 + ‖x̃ − s ṽ‖² on the hyperboloid.
    let resid: f64 = x.space().iter().zip(v.unit()).map(|(xi, vi)| (xi - s * vi).powi(2)).sum();
    let den = (1.0 + resid).sqrt();
    debug_assert!(den >= 1.0);
    let mut coords = Vec::with_capacity(x.dim() + 1);
    coords.push(x.time() / den);
    coords.extend(v.unit().iter().map(|vi| s * vi / den));
    LorentzPoint::from_raw(coords)
}

/// Signed distance to the origin of a point, oriented by `v`:
/// `t^v(x) = sign(⟨x,v⟩) d_L(x, x⁰)`.
pub fn geodesic_parameter(x: &LorentzPoint, v: &Direction) -> GeodesicCoordinate {
    check_dims(x.dim(), v);
    let o = LorentzPoint::origin(x.dim());
    GeodesicCoordinate(sign(dot(x.space(), v.unit())) * lorentz_distance(x, &o))
}

/// Ball counterpart `t^ṽ(x) = sign(⟨x,ṽ⟩) d_B(x, 0)`.
pub fn geodesic_parameter_ball(x: &PoincarePoint, v: &Direction) -> GeodesicCoordinate {
    check_dims(x.dim(), v);
    let o = PoincarePoint::origin(x.dim());
    GeodesicCoordinate(sign(dot(x.coords(), v.unit())) * poincare_distance(x, &o))
}

/// Coordinate of the geodesic projection, `t^v(P^v(x))`.
pub fn geodesic_coordinate(x: &LorentzPoint, v: &Direction) -> GeodesicCoordinate {
    check_dims(x.dim(), v);
    GeodesicCoordinate(geodesic_coordinate_raw(x.coords(), v.unit()))
}

/// Busemann function of the geodesic ray towards `v` on 𝕃^d.
pub fn busemann_lorentz(x: &LorentzPoint, v: &Direction) -> f64 {
    check_dims(x.dim(), v);
    busemann_raw(x.coords(), v.unit())
}

/// Busemann function of the ideal point `ṽ` on 𝔹^d.
pub fn busemann_ball(x: &PoincarePoint, v: &Direction) -> f64 {
    check_dims(x.dim(), v);
    busemann_ball_raw(x.coords(), v.unit())
}

/// Horospherical projection on 𝕃^d:
/// `(1+u²)/(1−u²) x⁰ + 2u/(1−u²) v` with `u = (1+⟨x,x⁰+v⟩_L)/(1−⟨x,x⁰+v⟩_L)`.
pub fn horo_project_lorentz(x: &LorentzPoint, v: &Direction) -> LorentzPoint {
    check_dims(x.dim(), v);
    let a = dot(x.space(), v.unit()) - x.time();
    let u = (1.0 + a) / (1.0 - a);
    assert!(u.abs() < 1.0, "horospherical projection parameter must satisfy |u| < 1");
    let den = 1.0 - u * u;
    let mut coords = Vec::with_capacity(x.dim() + 1);
    coords.push((1.0 + u * u) / den);
    coords.extend(v.unit().iter().map(|vi| 2.0 * u / den * vi));
    LorentzPoint::from_raw(coords)
}

/// Horospherical projection on 𝔹^d:
/// `((1 − ‖x‖² − ‖ṽ−x‖²) / (1 − ‖x‖² + ‖ṽ−x‖²)) ṽ`.
pub fn horo_project_ball(x: &PoincarePoint, v: &Direction) -> PoincarePoint {
    check_dims(x.dim(), v);
    let r2 = x.norm_sq();
    let diff: f64 = v.unit().iter().zip(x.coords()).map(|(a, b)| (a - b) * (a - b)).sum();
    let f = (1.0 - r2 - diff) / (1.0 - r2 + diff);
    PoincarePoint::from_raw(v.unit().iter().map(|vi| f * vi).collect())
}

/// Horospherical coordinate `t^v(P̃^v(x)) = −B_v(x)`, computed directly from
/// the Busemann function.
pub fn horo_coordinate_lorentz(x: &LorentzPoint, v: &Direction) -> GeodesicCoordinate {
    GeodesicCoordinate(-busemann_lorentz(x, v))
}

/// Ball counterpart of [`horo_coordinate_lorentz`].
pub fn horo_coordinate_ball(x: &PoincarePoint, v: &Direction) -> GeodesicCoordinate {
    GeodesicCoordinate(-busemann_ball(x, v))
}

/// Validating wrapper for user input: a ball point and direction of equal dimension.
pub fn check_direction(dim: usize, v: &Direction) -> Result<()> {
    if dim != v.dim() {
        return Err(Error::Dimension { expected: dim, got: v.dim() });
    }
    Ok(())
}

/// Point of the geodesic with the given coordinate (inverse of `t^v` on the geodesic).
pub fn point_at_coordinate(v: &Direction, t: GeodesicCoordinate) -> LorentzPoint {
    geodesic_point(v, t.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::{mink, to_ball, to_lorentz};
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn random_dir(rng: &mut ChaCha8Rng, d: usize) -> Direction {
        Direction::normalize((0..d).map(|_| rng.sample(StandardNormal)).collect()).unwrap()
    }

    fn random_point(rng: &mut ChaCha8Rng, d: usize, scale: f64) -> LorentzPoint {
        let mut c = vec![0.0];
        c.extend((0..d).map(|_| scale * rng.sample::<f64, _>(StandardNormal)));
        LorentzPoint::from_raw(c)
    }

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol * x.abs().max(1.0))
    }

    #[test]
    fn geodesic_projection_examples() {
        let v = Direction::new(vec![1.0, 0.0]).unwrap();
        let on = geodesic_point(&v, 1.3);
        assert!(close(geodesic_project(&on, &v).coords(), on.coords(), 1e-10));

        let x = LorentzPoint::new(vec![2f64.sqrt(), 0.0, 1.0]).unwrap();
        assert!(close(geodesic_project(&x, &v).coords(), LorentzPoint::origin(2).coords(), 1e-15));
    }

    #[test]
    fn geodesic_projection_minimizes_distance() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for d in [2, 5] {
            for _ in 0..200 {
                let x = random_point(&mut rng, d, 1.0);
                let v = random_dir(&mut rng, d);
                let p = geodesic_project(&x, &v);
                let best = lorentz_distance(&x, &p);
                for _ in 0..50 {
                    let t = rng.random_range(-6.0..6.0);
                    assert!(best <= lorentz_distance(&x, &geodesic_point(&v, t)) + 1e-10);
                }
                // idempotent and on the geodesic
                assert!(close(geodesic_project(&p, &v).coords(), p.coords(), 1e-9));
            }
        }
    }

    #[test]
    fn coordinate_closed_form_matches_composition() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for d in [2, 10] {
            for _ in 0..500 {
                let x = random_point(&mut rng, d, 1.5);
                let v = random_dir(&mut rng, d);
                let direct = geodesic_coordinate(&x, &v).value();
                let composed = geodesic_parameter(&geodesic_project(&x, &v), &v).value();
                assert!((direct - composed).abs() < 1e-9, "{direct} vs {composed}");
                assert!((geodesic_coordinate(&x, &v.neg()).value() + direct).abs() < 1e-14 * direct.abs().max(1.0));
            }
        }
    }

    #[test]
    fn coordinate_examples() {
        let v = Direction::new(vec![0.6, 0.8]).unwrap();
        assert_eq!(geodesic_coordinate(&LorentzPoint::origin(2), &v).value(), 0.0);
        for t in [-3.0, -1.0, 0.5, 4.0] {
            let g = geodesic_point(&v, t);
            assert_abs_diff_eq!(geodesic_coordinate(&g, &v).value(), t, epsilon = 1e-10);
            assert_abs_diff_eq!(horo_coordinate_lorentz(&g, &v).value(), t, epsilon = 1e-10);
            assert_abs_diff_eq!(busemann_lorentz(&g, &v), -t, epsilon = 1e-10);
        }
    }

    #[test]
    fn denominator_is_at_least_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..100_000 {
            let x = random_point(&mut rng, 3, 2.0);
            let v = random_dir(&mut rng, 3);
            let s = dot(x.space(), v.unit());
            assert!(x.time() * x.time() - s * s >= 1.0 - 1e-9);
        }
    }

    #[test]
    fn busemann_examples() {
        let v = Direction::new(vec![0.0, 1.0]).unwrap();
        assert_eq!(busemann_lorentz(&LorentzPoint::origin(2), &v), 0.0);
        assert_eq!(busemann_ball(&PoincarePoint::origin(2), &v), 0.0);
        for r in [-0.9, -0.3, 0.0, 0.4, 0.95] {
            let x = PoincarePoint::new(vec![0.0, r]).unwrap();
            assert_abs_diff_eq!(busemann_ball(&x, &v), ((1.0 - r) / (1.0 + r)).ln(), epsilon = 1e-12);
            assert_abs_diff_eq!(busemann_ball(&x, &v), -2.0 * f64::atanh(r), epsilon = 1e-12);
        }
    }

    #[test]
    fn busemann_models_agree_and_are_lipschitz() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        for _ in 0..1000 {
            let x = random_point(&mut rng, 3, 1.0);
            let y = random_point(&mut rng, 3, 1.0);
            let v = random_dir(&mut rng, 3);
            let b = to_ball(&x);
            assert!((busemann_ball(&b, &v) - busemann_lorentz(&x, &v)).abs() < 1e-9);
            let lip = (busemann_lorentz(&x, &v) - busemann_lorentz(&y, &v)).abs();
            assert!(lip <= lorentz_distance(&x, &y) + 1e-10);
        }
    }

    #[test]
    fn horospherical_projection_properties() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        let v2 = Direction::new(vec![1.0, 0.0]).unwrap();
        assert!(close(horo_project_lorentz(&LorentzPoint::origin(2), &v2).coords(), &[1.0, 0.0, 0.0], 1e-15));
        let g = geodesic_point(&v2, -1.2);
        assert!(close(horo_project_lorentz(&g, &v2).coords(), g.coords(), 1e-10));
        assert_eq!(horo_project_ball(&PoincarePoint::origin(2), &v2).coords(), &[0.0, 0.0]);
        let on = PoincarePoint::new(vec![-0.7, 0.0]).unwrap();
        assert!(close(horo_project_ball(&on, &v2).coords(), on.coords(), 1e-12));

        for _ in 0..1000 {
            let x = random_point(&mut rng, 4, 1.0);
            let v = random_dir(&mut rng, 4);
            let p = horo_project_lorentz(&x, &v);
            // level-set property and coordinate identity
            assert!((busemann_lorentz(&p, &v) - busemann_lorentz(&x, &v)).abs() < 1e-9);
            let t = geodesic_parameter(&p, &v).value();
            assert!((t + busemann_lorentz(&x, &v)).abs() < 1e-9);
            assert!((t - horo_coordinate_lorentz(&x, &v).value()).abs() < 1e-9);
            // lies on span(x⁰, v)
            let s = dot(p.space(), v.unit());
            assert!(p.space().iter().zip(v.unit()).all(|(a, b)| (a - s * b).abs() < 1e-9));
            // idempotent
            assert!(close(horo_project_lorentz(&p, &v).coords(), p.coords(), 1e-9));
            // commutes with the model conversion
            let b = to_ball(&x);
            let pb = horo_project_ball(&b, &v);
            assert!(close(to_lorentz(&pb).coords(), p.coords(), 1e-8));
            assert!(close(horo_project_ball(&pb, &v).coords(), pb.coords(), 1e-9));
            assert!((horo_coordinate_ball(&b, &v).value() - geodesic_parameter_ball(&pb, &v).value()).abs() < 1e-9);
        }
    }

    fn fd_grad(f: impl Fn(&[f64]) -> f64, x: &[f64]) -> Vec<f64> {
        let h = 1e-6;
        (0..x.len())
            .map(|i| {
                let mut p = x.to_vec();
                let mut m = x.to_vec();
                p[i] += h;
                m[i] -= h;
                (f(&p) - f(&m)) / (2.0 * h)
            })
            .collect()
    }

    #[test]
    fn analytic_gradients_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(16);
        for _ in 0..100 {
            let x = random_point(&mut rng, 3, 1.0);
            let v = random_dir(&mut rng, 3);
            let mut g = vec![0.0; 4];

            geodesic_coordinate_grad(x.coords(), v.unit(), &mut g);
            let fd = fd_grad(|y| geodesic_coordinate_raw(y, v.unit()), x.coords());
            assert!(close(&g, &fd, 1e-6), "{g:?} vs {fd:?}");

            horo_coordinate_grad(x.coords(), v.unit(), &mut g);
            let fd = fd_grad(|y| -busemann_raw(y, v.unit()), x.coords());
            assert!(close(&g, &fd, 1e-6));

            let b = to_ball(&x);
            let mut gb = vec![0.0; 3];
            horo_coordinate_ball_grad(b.coords(), v.unit(), &mut gb);
            let fd = fd_grad(|y| -busemann_ball_raw(y, v.unit()), b.coords());
            assert!(close(&gb, &fd, 1e-6));
        }
    }

    #[test]
    fn tangent_lift_has_unit_norm() {
        let v = Direction::new(vec![0.0, 0.0, 1.0]).unwrap();
        let l = v.lift();
        assert_eq!(mink(&l, &l), 1.0);
        assert_eq!(point_at_coordinate(&v, GeodesicCoordinate(0.0)), LorentzPoint::origin(3));
        assert!(check_direction(2, &v).is_err());
    }
}
