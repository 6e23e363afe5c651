//! Particle gradient flows of the sliced discrepancies.
//!
//! A uniform particle cloud is pushed towards a target distribution by
//! Riemannian gradient descent on `D(μ_particles, ν_batch)` where `D` is one
//! of the four sliced discrepancies and `ν_batch` is a fresh target sample at
//! each iteration.
//!
//! Gradients are analytic. For one slice with uniform equal-size supports,
//! `W_p^p = Σ_i |x̂_{σ(i)} − ŷ_{τ(i)}|^p / n` over the sorted matching, so
//! `∂/∂x̂_{σ(i)} = p·sign(d_i)|d_i|^{p−1}/n` with `d_i = x̂_{σ(i)} − ŷ_{τ(i)}`;
//! the chain rule through the coordinate map (and through the model
//! conversion when the loss lives in the other model) gives the ambient
//! gradient. Ties in the sort are broken by particle index.

use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;

use crate::distributions::{Sampler, WrappedNormal};
use crate::error::{Error, Result};
use crate::io::fmt_float;
use crate::manifold::{
    exp_lorentz, exp_poincare, mink, norm_sq, Direction, LorentzPoint, PoincarePoint, TangentVector,
};
use crate::rng::{derive_seed, stream_rng, streams};
use crate::sliced::{
    convert_coords, pow_abs, sample_directions, wasserstein_geodesic_ref, DiscreteMeasure, Method, Model, SliceMap,
    SlicedConfig,
};

/// Boundary margin of the Poincaré retraction.
pub const BALL_EPS: f64 = 1e-5;

/// Directions per parallel work unit; fixed so the reduction order never
/// depends on the thread count.
const SLICE_CHUNK: usize = 16;

/// The optimized measure: uniform atoms on one model.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleCloud {
    model: Model,
    dim: usize,
    coords: Vec<f64>,
}

impl ParticleCloud {
    pub fn from_lorentz(points: &[LorentzPoint]) -> Result<Self> {
        Ok(Self::from_measure(&DiscreteMeasure::uniform_lorentz(points)?))
    }

    pub fn from_poincare(points: &[PoincarePoint]) -> Result<Self> {
        Ok(Self::from_measure(&DiscreteMeasure::uniform_poincare(points)?))
    }

    /// The atoms of a measure (weights are discarded).
    pub fn from_measure(m: &DiscreteMeasure) -> Self {
        Self { model: m.model(), dim: m.dim(), coords: m.coords().to_vec() }
    }

    /// Wrap raw coordinates without checking the manifold constraint.
    ///
    /// Losses and gradients are smooth functions of the ambient coordinates,
    /// so off-manifold perturbations (finite differences) are meaningful.
    pub fn from_flat_unchecked(model: Model, dim: usize, coords: Vec<f64>) -> Self {
        assert!(dim > 0 && !coords.is_empty() && coords.len().is_multiple_of(model.ambient_dim(dim)));
        Self { model, dim, coords }
    }

    pub fn model(&self) -> Model {
        self.model
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn stride(&self) -> usize {
        self.model.ambient_dim(self.dim)
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.stride()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn point(&self, i: usize) -> &[f64] {
        let s = self.stride();
        &self.coords[i * s..(i + 1) * s]
    }

    pub fn to_measure(&self) -> DiscreteMeasure {
        DiscreteMeasure::uniform_raw(self.model, self.dim, self.coords.clone())
    }

    pub fn to_model(&self, model: Model) -> ParticleCloud {
        let coords = convert_coords(self.model, model, self.dim, &self.coords);
        Self { model, dim: self.dim, coords }
    }

    /// Write one CSV row per particle: `iter,index,c0,c1,…`.
    pub fn write_csv_rows<W: Write + ?Sized>(&self, iter: usize, out: &mut W) -> std::io::Result<()> {
        for (i, p) in self.coords.chunks_exact(self.stride()).enumerate() {
            write!(out, "{iter},{i}")?;
            for c in p {
                write!(out, ",{}", fmt_float(*c))?;
            }
            writeln!(out)?;
        }
        Ok(())
    }

    pub fn csv_header(&self) -> String {
        let mut h = String::from("iter,index");
        for k in 0..self.stride() {
            h.push_str(&format!(",c{k}"));
        }
        h
    }
}

/// Loss value and, optionally, its gradient with respect to the particle
/// coordinates (in the particles' own model).
fn loss_and_grad(
    method: Method,
    hhsw_model: Model,
    particles: &ParticleCloud,
    target: &DiscreteMeasure,
    dirs: &[Direction],
    p: f64,
    want_grad: bool,
) -> Result<(f64, Option<Vec<f64>>)> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::domain(format!("order p must be >= 1, got {p}")));
    }
    if target.model() != particles.model {
        return Err(Error::domain("particles and target batch live in different models"));
    }
    if target.dim() != particles.dim {
        return Err(Error::Dimension { expected: particles.dim, got: target.dim() });
    }
    let n = particles.len();
    if target.len() != n || !target.is_uniform() {
        return Err(Error::domain("the target batch must be uniform with as many atoms as particles"));
    }
    if dirs.is_empty() {
        return Err(Error::domain("at least one direction is required"));
    }
    let want_dim = method.direction_dim(particles.dim);
    if let Some(d) = dirs.iter().find(|d| d.dim() != want_dim) {
        return Err(Error::Dimension { expected: want_dim, got: d.dim() });
    }

    let eval = method.evaluation_model(hhsw_model);
    let map = SliceMap::for_method(method, eval);
    let stride = eval.ambient_dim(particles.dim);
    let pe = if eval == particles.model {
        particles.coords.clone()
    } else {
        convert_coords(particles.model, eval, particles.dim, &particles.coords)
    };
    let te = target.to_model(eval);

    let partials: Vec<(f64, Vec<f64>)> = dirs
        .par_chunks(SLICE_CHUNK)
        .map(|chunk| {
            let mut grad = if want_grad { vec![0.0; n * stride] } else { Vec::new() };
            let mut loss = 0.0;
            let mut xs: Vec<(f64, usize)> = Vec::with_capacity(n);
            let mut ys: Vec<f64> = Vec::with_capacity(n);
            let mut tmp = vec![0.0; stride];
            for dir in chunk {
                let dir = dir.unit();
                xs.clear();
                xs.extend(pe.chunks_exact(stride).enumerate().map(|(i, x)| (map.coordinate(x, dir), i)));
                map.project_all(te.coords(), stride, dir, &mut ys);
                xs.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
                ys.sort_unstable_by(f64::total_cmp);
                for (&(xv, k), &yv) in xs.iter().zip(&ys) {
                    let diff = xv - yv;
                    loss += pow_abs(diff, p);
                    if want_grad && diff != 0.0 {
                        let coef = p * diff.signum() * pow_abs(diff, p - 1.0);
                        let x = &pe[k * stride..(k + 1) * stride];
                        map.gradient(x, dir, &mut tmp);
                        for (g, t) in grad[k * stride..(k + 1) * stride].iter_mut().zip(&tmp) {
                            *g += coef * t;
                        }
                    }
                }
            }
            (loss, grad)
        })
        .collect();

    let scale = 1.0 / (n as f64 * dirs.len() as f64);
    let loss = partials.iter().map(|(l, _)| l).sum::<f64>() * scale;
    if !want_grad {
        return Ok((loss, None));
    }
    let mut grad = vec![0.0; n * stride];
    for (_, g) in &partials {
        for (a, b) in grad.iter_mut().zip(g) {
            *a += b;
        }
    }
    grad.iter_mut().for_each(|g| *g *= scale);

    let grad = if eval == particles.model { grad } else { pull_back_gradient(eval, particles, &grad) };
    Ok((loss, Some(grad)))
}

/// Transpose-Jacobian of the model conversion applied to a gradient taken
/// in the other model.
fn pull_back_gradient(eval: Model, particles: &ParticleCloud, grad: &[f64]) -> Vec<f64> {
    let d = particles.dim;
    let src = particles.stride();
    let dst = eval.ambient_dim(d);
    let mut out = vec![0.0; particles.coords.len()];
    for ((x, g), o) in particles.coords.chunks_exact(src).zip(grad.chunks_exact(dst)).zip(out.chunks_exact_mut(src)) {
        match particles.model {
            // x = P_{B→L}(b)
            Model::Poincare => {
                let r = norm_sq(x);
                let s = 1.0 - r;
                let bg: f64 = x.iter().zip(&g[1..]).map(|(b, gi)| b * gi).sum();
                for i in 0..d {
                    o[i] = 4.0 * x[i] * g[0] / (s * s) + 2.0 * g[i + 1] / s + 4.0 * x[i] * bg / (s * s);
                }
            }
            // b = P_{L→B}(x)
            Model::Lorentz => {
                let s = 1.0 + x[0];
                let xg: f64 = x[1..].iter().zip(g).map(|(a, b)| a * b).sum();
                o[0] = -xg / (s * s);
                for i in 0..d {
                    o[i + 1] = g[i] / s;
                }
            }
        }
    }
    out
}

fn directions_for(method: Method, dim: usize, cfg: &SlicedConfig) -> Result<Vec<Direction>> {
    cfg.validate()?;
    sample_directions(method.direction_dim(dim), cfg.num_projections, cfg.seed)
}

/// Sliced loss `D^p(particles, target)` as a function of the raw particle
/// coordinates, with directions drawn from `cfg.seed`.
pub fn sliced_loss(
    method: Method,
    particles: &ParticleCloud,
    target: &DiscreteMeasure,
    cfg: &SlicedConfig,
) -> Result<f64> {
    let dirs = directions_for(method, particles.dim, cfg)?;
    Ok(loss_and_grad(method, cfg.model, particles, target, &dirs, cfg.order, false)?.0)
}

/// Ambient (Euclidean) gradient of [`sliced_loss`] with respect to every
/// particle's coordinates, directions held fixed.
pub fn euclidean_grad(
    method: Method,
    particles: &ParticleCloud,
    target: &DiscreteMeasure,
    cfg: &SlicedConfig,
) -> Result<Vec<Vec<f64>>> {
    let dirs = directions_for(method, particles.dim, cfg)?;
    let (_, g) = loss_and_grad(method, cfg.model, particles, target, &dirs, cfg.order, true)?;
    Ok(g.expect("gradient requested").chunks_exact(particles.stride()).map(<[f64]>::to_vec).collect())
}

/// Riemannian gradient on 𝕃^d: `Proj_x(J ∇f)` with `J = diag(−1, 1, …, 1)`
/// and `Proj_x(z) = z + ⟨x,z⟩_L x`.
pub fn riemannian_grad_lorentz(x: &LorentzPoint, g: &[f64]) -> TangentVector {
    let mut jg = g.to_vec();
    jg[0] = -jg[0];
    TangentVector::project(x.clone(), &jg)
}

/// Riemannian gradient on 𝔹^d: `((1 − ‖x‖²)² / 4) ∇f`.
pub fn riemannian_grad_poincare(x: &PoincarePoint, g: &[f64]) -> Vec<f64> {
    assert_eq!(x.dim(), g.len(), "dimension mismatch");
    let f = (1.0 - x.norm_sq()).powi(2) / 4.0;
    g.iter().map(|gi| f * gi).collect()
}

/// `exp_x(−lr · v)` for `v ∈ T_x𝕃^d`.
pub fn step_lorentz(v: &TangentVector, lr: f64) -> LorentzPoint {
    exp_lorentz(&v.scale(-lr))
}

/// How the Poincaré iterate is updated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PoincareUpdate {
    /// `proj(x − lr · grad)` where `proj` pulls points that left the ball
    /// back to radius `1 − ε`.
    Retraction,
    /// `exp_x(−lr · grad)`.
    Exp,
}

/// One descent step on the ball from the Euclidean gradient `g`.
pub fn step_poincare(x: &PoincarePoint, g: &[f64], lr: f64, update: PoincareUpdate) -> PoincarePoint {
    let rg = riemannian_grad_poincare(x, g);
    match update {
        PoincareUpdate::Retraction => {
            let mut y: Vec<f64> = x.coords().iter().zip(&rg).map(|(a, b)| a - lr * b).collect();
            project_into_ball(&mut y);
            PoincarePoint::from_raw(y)
        }
        PoincareUpdate::Exp => {
            let v: Vec<f64> = rg.iter().map(|b| -lr * b).collect();
            exp_poincare(x, &v)
        }
    }
}

/// `x / ‖x‖ · (1 − ε)` when `‖x‖ ≥ 1`.
fn project_into_ball(y: &mut [f64]) {
    let r = norm_sq(y).sqrt();
    if r >= 1.0 {
        let s = (1.0 - BALL_EPS) / r;
        y.iter_mut().for_each(|c| *c *= s);
    }
}

/// Settings of one gradient-flow run.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowConfig {
    pub loss: Method,
    pub learning_rate: f64,
    pub iterations: usize,
    pub num_projections: usize,
    /// Target samples per iteration; must equal the particle count.
    pub batch_size: usize,
    pub seed: u64,
    /// Model of the particles (and of HHSW's evaluation).
    pub model: Model,
    pub order: f64,
    /// Log the exact W₂ every this many iterations.
    pub log_every: usize,
    pub poincare_update: PoincareUpdate,
    /// Abort when `lr · ‖grad‖` (Riemannian norm) exceeds this.
    pub max_step: f64,
    pub keep_snapshots: bool,
}

impl FlowConfig {
    pub fn new(loss: Method, learning_rate: f64, iterations: usize, seed: u64) -> Self {
        Self {
            loss,
            learning_rate,
            iterations,
            num_projections: 1000,
            batch_size: 500,
            seed,
            model: Model::Lorentz,
            order: 2.0,
            log_every: 50,
            poincare_update: PoincareUpdate::Retraction,
            max_step: 50.0,
            keep_snapshots: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0) || !self.learning_rate.is_finite() {
            return Err(Error::domain("learning rate must be positive"));
        }
        if self.num_projections == 0 || self.batch_size == 0 || self.log_every == 0 {
            return Err(Error::domain("projections, batch size and log interval must be positive"));
        }
        if !(self.order >= 1.0) {
            return Err(Error::domain("order p must be >= 1"));
        }
        if !(self.max_step > 0.0) {
            return Err(Error::domain("step cap must be positive"));
        }
        Ok(())
    }
}

/// One line of the flow log.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowLogRow {
    pub iter: usize,
    pub w2_exact: f64,
    pub loss_estimate: f64,
    pub wallclock_ms: f64,
}

impl FlowLogRow {
    pub const CSV_HEADER: &'static str = "iter,w2_exact,loss_estimate,wallclock_ms";

    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{}",
            self.iter,
            fmt_float(self.w2_exact),
            fmt_float(self.loss_estimate),
            fmt_float(self.wallclock_ms)
        )
    }
}

/// Result of [`run_flow`].
#[derive(Debug, Clone)]
pub struct FlowTrajectory {
    pub log: Vec<FlowLogRow>,
    /// `(iteration, particles)` at every logged iteration when requested.
    pub snapshots: Vec<(usize, ParticleCloud)>,
    pub particles: ParticleCloud,
}

/// A gradient flow in progress.
pub struct Flow<'a> {
    target: &'a dyn Sampler,
    cfg: FlowConfig,
    particles: ParticleCloud,
    eval_sample: DiscreteMeasure,
    iteration: usize,
}

impl<'a> Flow<'a> {
    /// Start a flow. Without `init`, particles are drawn from `G(x⁰, 0.1 I)`.
    pub fn new(target: &'a dyn Sampler, cfg: FlowConfig, init: Option<ParticleCloud>) -> Result<Self> {
        cfg.validate()?;
        let d = target.dim();
        let particles = match init {
            Some(p) => {
                if p.dim() != d {
                    return Err(Error::Dimension { expected: d, got: p.dim() });
                }
                p.to_model(cfg.model)
            }
            None => {
                let init = WrappedNormal::isotropic(LorentzPoint::origin(d), 0.1)?;
                let pts = init.sample_with(cfg.batch_size, &mut stream_rng(cfg.seed, streams::FLOW_INIT));
                ParticleCloud::from_lorentz(&pts)?.to_model(cfg.model)
            }
        };
        if particles.len() != cfg.batch_size {
            return Err(Error::domain(format!(
                "batch size {} must equal the number of particles {}",
                cfg.batch_size,
                particles.len()
            )));
        }
        let eval = target.sample_with(particles.len(), &mut stream_rng(cfg.seed, streams::FLOW_EVAL));
        let eval_sample = DiscreteMeasure::uniform_lorentz(&eval)?;
        Ok(Self { target, cfg, particles, eval_sample, iteration: 0 })
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    pub fn particles(&self) -> &ParticleCloud {
        &self.particles
    }

    pub fn config(&self) -> &FlowConfig {
        &self.cfg
    }

    /// Exact W₂ between the particles and a fixed target sample of equal size.
    pub fn exact_w2(&self) -> Result<f64> {
        let m = self.particles.to_model(Model::Lorentz).to_measure();
        Ok(wasserstein_geodesic_ref(&m, &self.eval_sample, 2.0)?.sqrt())
    }

    fn batch_and_directions(&self, iteration: usize) -> Result<(DiscreteMeasure, Vec<Direction>)> {
        let it_seed = derive_seed(self.cfg.seed, iteration as u64);
        let batch = self.target.sample_with(self.cfg.batch_size, &mut stream_rng(it_seed, streams::FLOW_BATCH));
        let batch = DiscreteMeasure::uniform_lorentz(&batch)?.to_model(self.cfg.model);
        let dirs =
            sample_directions(self.cfg.loss.direction_dim(self.particles.dim()), self.cfg.num_projections, it_seed)?;
        Ok((batch, dirs))
    }

    /// Loss estimate at the current iterate, using the batch and directions
    /// the next step would use.
    pub fn current_loss(&self) -> Result<f64> {
        let (batch, dirs) = self.batch_and_directions(self.iteration)?;
        Ok(loss_and_grad(self.cfg.loss, self.cfg.model, &self.particles, &batch, &dirs, self.cfg.order, false)?.0)
    }

    /// Take one descent step; returns the loss estimate at the pre-step iterate.
    pub fn step(&mut self) -> Result<f64> {
        let (batch, dirs) = self.batch_and_directions(self.iteration)?;
        let (loss, grad) =
            loss_and_grad(self.cfg.loss, self.cfg.model, &self.particles, &batch, &dirs, self.cfg.order, true)?;
        let grad = grad.expect("gradient requested");
        let lr = self.cfg.learning_rate;
        let stride = self.particles.stride();
        let mut next = Vec::with_capacity(self.particles.coords.len());
        for (x, g) in self.particles.coords.chunks_exact(stride).zip(grad.chunks_exact(stride)) {
            if g.iter().any(|c| !c.is_finite()) {
                return Err(Error::NonFinite { iteration: self.iteration });
            }
            let (new, norm) = match self.cfg.model {
                Model::Lorentz => {
                    let xp = LorentzPoint::from_raw(x.to_vec());
                    let rg = riemannian_grad_lorentz(&xp, g);
                    let norm = rg.norm();
                    (step_lorentz(&rg, lr).into_coords(), norm)
                }
                Model::Poincare => {
                    let xp = PoincarePoint::from_raw(x.to_vec());
                    let lambda = 2.0 / (1.0 - xp.norm_sq());
                    let norm = lambda * norm_sq(&riemannian_grad_poincare(&xp, g)).sqrt();
                    (step_poincare(&xp, g, lr, self.cfg.poincare_update).into_coords(), norm)
                }
            };
            if !(lr * norm <= self.cfg.max_step) {
                if !norm.is_finite() {
                    return Err(Error::NonFinite { iteration: self.iteration });
                }
                return Err(Error::StepCap { iteration: self.iteration, norm: lr * norm, cap: self.cfg.max_step });
            }
            if new.iter().any(|c| !c.is_finite()) {
                return Err(Error::NonFinite { iteration: self.iteration });
            }
            next.extend(new);
        }
        if self.cfg.model == Model::Lorentz {
            debug_assert!(next.chunks_exact(stride).all(|x| (mink(x, x) + 1.0).abs() < 1e-7 * x[0] * x[0]));
        }
        self.particles.coords = next;
        self.iteration += 1;
        Ok(loss)
    }
}

/// Run `cfg.iterations` steps, logging the exact W₂ every `cfg.log_every`
/// iterations and after the last one. `on_log` sees every row as it is produced.
pub fn run_flow(
    target: &dyn Sampler,
    cfg: &FlowConfig,
    init: Option<ParticleCloud>,
    mut on_log: impl FnMut(&FlowLogRow),
) -> Result<FlowTrajectory> {
    let start = Instant::now();
    let mut flow = Flow::new(target, cfg.clone(), init)?;
    let mut log = Vec::new();
    let mut snapshots = Vec::new();
    let mut record = |iter: usize, w2: f64, loss: f64, particles: &ParticleCloud| {
        let row =
            FlowLogRow { iter, w2_exact: w2, loss_estimate: loss, wallclock_ms: start.elapsed().as_secs_f64() * 1e3 };
        on_log(&row);
        log.push(row);
        if cfg.keep_snapshots {
            snapshots.push((iter, particles.clone()));
        }
    };
    for k in 0..cfg.iterations {
        if k % cfg.log_every == 0 {
            let w2 = flow.exact_w2()?;
            let before = flow.particles().clone();
            let loss = flow.step()?;
            record(k, w2, loss, &before);
        } else {
            flow.step()?;
        }
    }
    let w2 = flow.exact_w2()?;
    let loss = flow.current_loss()?;
    record(cfg.iterations, w2, loss, flow.particles());
    Ok(FlowTrajectory { log, snapshots, particles: flow.particles.clone() })
}

/// Write a flow log as CSV.
pub fn write_flow_csv(rows: &[FlowLogRow], out: &mut impl Write) -> std::io::Result<()> {
    writeln!(out, "{}", FlowLogRow::CSV_HEADER)?;
    for r in rows {
        writeln!(out, "{}", r.csv_line())?;
    }
    Ok(())
}
