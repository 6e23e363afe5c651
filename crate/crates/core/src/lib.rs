//! Sliced-Wasserstein discrepancies on hyperbolic space.
//!
//! Measures on the Lorentz model or the Poincaré ball are compared by
//! projecting them onto random geodesics through the origin, either along
//! geodesics (GHSW) or along horospheres (HHSW), and averaging the
//! closed-form 1D Wasserstein costs. Euclidean sliced Wasserstein on either
//! model's ambient coordinates is provided as a baseline.
//!
//! ```
//! use hyperslice::distributions::{Sampler, WrappedNormal};
//! use hyperslice::manifold::LorentzPoint;
//! use hyperslice::sliced::{ghsw, DiscreteMeasure, SlicedConfig};
//!
//! let g = WrappedNormal::isotropic(LorentzPoint::origin(2), 1.0).unwrap();
//! let mu = DiscreteMeasure::uniform_lorentz(&g.sample(100, 1)).unwrap();
//! let nu = DiscreteMeasure::uniform_lorentz(&g.sample(100, 2)).unwrap();
//! let cfg = SlicedConfig::new(50, 2.0, 0);
//! assert!(ghsw(&mu, &nu, &cfg).unwrap() > 0.0);
//! ```

// `!(x >= 0.0)` style checks are how NaN gets rejected alongside the range.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod distributions;
pub mod error;
pub mod flows;
pub mod io;
pub mod manifold;
pub mod projections;
pub mod rng;
pub mod sliced;
pub mod trees;

pub use error::{Error, Result};
pub use manifold::{Direction, LorentzPoint, PoincarePoint, TangentVector};
pub use sliced::{DiscreteMeasure, Method, Model, SlicedConfig};
