//! Gradient-flow presets and the flow subcommand.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use hyperslice::distributions::{Sampler, WrappedMixture, WrappedNormal};
use hyperslice::flows::{run_flow, FlowConfig, FlowLogRow, FlowTrajectory, ParticleCloud, PoincareUpdate};
use hyperslice::io::fmt_float;
use hyperslice::manifold::{to_lorentz, LorentzPoint, PoincarePoint};
use hyperslice::sliced::{DiscreteMeasure, Method, Model};

use crate::error::{usage, Result};

/// Target distribution of a flow.
#[derive(Debug, Clone, PartialEq)]
pub enum Target {
    /// Wrapped normal with a Lorentz mean (renormalized onto the hyperboloid)
    /// and a row-major covariance.
    Wnd { mean: Vec<f64>, cov: Vec<f64> },
    /// Equal-weight mixture of isotropic wrapped normals with means given in
    /// the Poincaré ball.
    Mixture { ball_means: Vec<Vec<f64>>, sigma2: f64 },
}

impl Target {
    pub fn sampler(&self) -> Result<Box<dyn Sampler>> {
        match self {
            Target::Wnd { mean, cov } => {
                let m = LorentzPoint::normalize(mean.clone())?;
                Ok(Box::new(WrappedNormal::new(m, cov)?))
            }
            Target::Mixture { ball_means, sigma2 } => {
                let comps = ball_means
                    .iter()
                    .map(|b| Ok(WrappedNormal::isotropic(to_lorentz(&PoincarePoint::new(b.clone())?), *sigma2)?))
                    .collect::<Result<Vec<_>>>()?;
                Ok(Box::new(WrappedMixture::uniform(comps)?))
            }
        }
    }
}

/// A named flow setting.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowPreset {
    pub name: &'static str,
    pub target: Target,
    pub learning_rate: f64,
    pub iterations: usize,
    pub n: usize,
    pub num_projections: usize,
    pub log_every: usize,
}

pub const PRESET_NAMES: [&str; 4] = ["wnd-near", "wnd-far", "mixture-near", "mixture-far"];

fn mixture(outer: f64) -> Target {
    Target::Mixture {
        ball_means: vec![vec![0.0, -outer], vec![0.0, outer], vec![outer, 0.0], vec![-outer, 0.0], vec![0.0, 0.1]],
        sigma2: 0.01,
    }
}

impl FlowPreset {
    pub fn by_name(name: &str) -> Result<Self> {
        let (target, lr) = match name {
            "wnd-near" => (Target::Wnd { mean: vec![1.5, 1.25, 0.0], cov: vec![0.1, 0.0, 0.0, 0.1] }, 5.0),
            "wnd-far" => (Target::Wnd { mean: vec![8.0, 63f64.sqrt(), 0.0], cov: vec![0.1, 0.0, 0.0, 0.1] }, 5.0),
            "mixture-near" => (mixture(0.5), 1.0),
            "mixture-far" => (mixture(0.9), 1.0),
            other => {
                return Err(usage(format!("unknown preset '{other}' (expected one of {})", PRESET_NAMES.join(", "))))
            }
        };
        let name = PRESET_NAMES.iter().find(|p| **p == name).expect("listed above");
        Ok(Self { name, target, learning_rate: lr, iterations: 2000, n: 500, num_projections: 1000, log_every: 50 })
    }

    /// `key=value` lines describing every parameter.
    pub fn describe(&self) -> String {
        let list = |v: &[f64]| v.iter().map(|x| fmt_float(*x)).collect::<Vec<_>>().join(" ");
        let mut s = String::new();
        writeln!(s, "preset={}", self.name).unwrap();
        match &self.target {
            Target::Wnd { mean, cov } => {
                let m = LorentzPoint::normalize(mean.clone()).expect("preset means are timelike");
                writeln!(s, "target=wrapped-normal").unwrap();
                writeln!(s, "mean_given={}", list(mean)).unwrap();
                writeln!(s, "mean={}", list(m.coords())).unwrap();
                writeln!(s, "cov={}", list(cov)).unwrap();
            }
            Target::Mixture { ball_means, sigma2 } => {
                writeln!(s, "target=wrapped-normal-mixture").unwrap();
                for (k, b) in ball_means.iter().enumerate() {
                    writeln!(s, "ball_mean_{}={}", k + 1, list(b)).unwrap();
                }
                writeln!(s, "weights=uniform").unwrap();
                writeln!(s, "cov={} * I", fmt_float(*sigma2)).unwrap();
            }
        }
        writeln!(s, "lr={}", fmt_float(self.learning_rate)).unwrap();
        writeln!(s, "iters={}", self.iterations).unwrap();
        writeln!(s, "n={}", self.n).unwrap();
        writeln!(s, "batch_size={}", self.n).unwrap();
        writeln!(s, "L={}", self.num_projections).unwrap();
        writeln!(s, "log_every={}", self.log_every).unwrap();
        writeln!(s, "init=wrapped-normal(origin, 0.1 * I)").unwrap();
        s
    }
}

/// Everything the flow subcommand needs.
#[derive(Debug, Clone)]
pub struct FlowSpec {
    pub preset: FlowPreset,
    pub method: Method,
    pub learning_rate: Option<f64>,
    pub iterations: Option<usize>,
    pub n: Option<usize>,
    pub num_projections: Option<usize>,
    pub log_every: Option<usize>,
    pub order: f64,
    pub seed: u64,
    /// Particle model; defaults to the Poincaré ball for SWp and Lorentz otherwise.
    pub model: Option<Model>,
    pub poincare_update: PoincareUpdate,
    pub init: Option<ParticleCloud>,
    pub keep_snapshots: bool,
}

impl FlowSpec {
    pub fn new(preset: FlowPreset, method: Method, seed: u64) -> Self {
        Self {
            preset,
            method,
            learning_rate: None,
            iterations: None,
            n: None,
            num_projections: None,
            log_every: None,
            order: 2.0,
            seed,
            model: None,
            poincare_update: PoincareUpdate::Retraction,
            init: None,
            keep_snapshots: false,
        }
    }

    pub fn config(&self) -> FlowConfig {
        let p = &self.preset;
        let n = self.init.as_ref().map(|c| c.len()).or(self.n).unwrap_or(p.n);
        let mut cfg = FlowConfig::new(
            self.method,
            self.learning_rate.unwrap_or(p.learning_rate),
            self.iterations.unwrap_or(p.iterations),
            self.seed,
        );
        cfg.num_projections = self.num_projections.unwrap_or(p.num_projections);
        cfg.batch_size = n;
        cfg.order = self.order;
        cfg.log_every = self.log_every.unwrap_or(p.log_every);
        cfg.model = self.model.unwrap_or(if self.method == Method::Swp { Model::Poincare } else { Model::Lorentz });
        cfg.poincare_update = self.poincare_update;
        cfg.keep_snapshots = self.keep_snapshots;
        cfg
    }
}

/// Run the flow described by `spec`, streaming log rows to `on_row`.
pub fn flow(spec: &FlowSpec, on_row: impl FnMut(&FlowLogRow)) -> Result<FlowTrajectory> {
    let target = spec.preset.target.sampler()?;
    Ok(run_flow(target.as_ref(), &spec.config(), spec.init.clone(), on_row)?)
}

/// Read an initial particle cloud: one point per line, comma-separated
/// ambient coordinates, `#` comments and a non-numeric header line allowed.
/// Rows of length d+1 are Lorentz points, rows of length d ball points.
pub fn read_cloud(reader: impl BufRead, d: usize) -> Result<ParticleCloud> {
    let mut lorentz = Vec::new();
    let mut ball = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parsed: std::result::Result<Vec<f64>, _> = line.split(',').map(|f| f.trim().parse::<f64>()).collect();
        let Ok(row) = parsed else {
            if i == 0 {
                continue;
            }
            return Err(usage(format!("line {}: not a list of numbers", i + 1)));
        };
        if row.len() == d + 1 {
            lorentz.push(LorentzPoint::new(row)?);
        } else if row.len() == d {
            ball.push(PoincarePoint::new(row)?);
        } else {
            return Err(usage(format!("line {}: expected {} or {} coordinates, got {}", i + 1, d, d + 1, row.len())));
        }
    }
    match (lorentz.is_empty(), ball.is_empty()) {
        (false, true) => Ok(ParticleCloud::from_lorentz(&lorentz)?),
        (true, false) => Ok(ParticleCloud::from_poincare(&ball)?),
        (true, true) => Err(usage("initial cloud is empty")),
        (false, false) => Err(usage("initial cloud mixes Lorentz and ball rows")),
    }
}

/// Write every snapshot of a trajectory as `iter,index,c0,…`.
pub fn write_snapshots(traj: &FlowTrajectory, out: &mut dyn Write) -> std::io::Result<()> {
    let Some((_, first)) = traj.snapshots.first() else {
        return Ok(());
    };
    writeln!(out, "{}", first.csv_header())?;
    for (iter, cloud) in &traj.snapshots {
        cloud.write_csv_rows(*iter, out)?;
    }
    Ok(())
}

/// Uniform measure over a fresh sample of the preset's target.
pub fn target_sample(preset: &FlowPreset, n: usize, seed: u64) -> Result<DiscreteMeasure> {
    Ok(DiscreteMeasure::uniform_lorentz(&preset.target.sampler()?.sample(n, seed))?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets() {
        for name in PRESET_NAMES {
            let p = FlowPreset::by_name(name).unwrap();
            assert!(p.target.sampler().is_ok());
            assert!(p.describe().starts_with(&format!("preset={name}\n")));
        }
        assert!(FlowPreset::by_name("nope").is_err());
        let near = FlowPreset::by_name("wnd-near").unwrap();
        assert_eq!(near.learning_rate, 5.0);
        let s = near.target.sampler().unwrap();
        assert_eq!(s.dim(), 2);
        assert!(near.describe().contains("lr=5.0000000000000000e0"));
        let far = FlowPreset::by_name("mixture-far").unwrap();
        assert!(far.describe().contains("ball_mean_1=0.0000000000000000e0 -9.0000000000000002e-1"));
    }

    #[test]
    fn config_defaults() {
        let spec = FlowSpec::new(FlowPreset::by_name("wnd-far").unwrap(), Method::Swp, 3);
        let cfg = spec.config();
        assert_eq!(cfg.model, Model::Poincare);
        assert_eq!((cfg.batch_size, cfg.num_projections, cfg.iterations), (500, 1000, 2000));
        let mut spec = FlowSpec::new(FlowPreset::by_name("wnd-far").unwrap(), Method::Hhsw, 3);
        spec.model = Some(Model::Poincare);
        spec.learning_rate = Some(0.1);
        let cfg = spec.config();
        assert_eq!((cfg.model, cfg.learning_rate), (Model::Poincare, 0.1));
    }

    #[test]
    fn reading_clouds() {
        let text = "x0,x1,x2\n1,0,0\n# comment\n1.5430806348152437,1.1752011936438014,0\n";
        let c = read_cloud(text.as_bytes(), 2).unwrap();
        assert_eq!((c.len(), c.model()), (2, Model::Lorentz));
        let c = read_cloud("0.1,0.2\n0,0\n".as_bytes(), 2).unwrap();
        assert_eq!(c.model(), Model::Poincare);
        assert!(read_cloud("0.1,0.2\n1,0,0\n".as_bytes(), 2).is_err());
        assert!(read_cloud("0.1,0.2\nfoo\n".as_bytes(), 2).is_err());
        assert!(read_cloud("2,0,0\n".as_bytes(), 2).is_err());
    }
}
