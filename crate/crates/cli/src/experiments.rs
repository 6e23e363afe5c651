//! Runtime, distance-curve and sample-complexity experiments.

use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use hyperslice::distributions::{Sampler, WrappedNormal};
use hyperslice::io::fmt_float;
use hyperslice::manifold::{geodesic_point, Direction, LorentzPoint};
use hyperslice::rng::derive_seed;
use hyperslice::sliced::{sliced_distance, wasserstein_geodesic_ref, DiscreteMeasure, Method, Model, SlicedConfig};
use hyperslice::trees::{balanced_tree, embedding_to_measure, sarkar_embed};

use crate::error::{usage, CliError, Result};

/// A sliced discrepancy or the exact Wasserstein distance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Estimator {
    Sliced(Method),
    Exact,
}

impl Estimator {
    pub const ALL: [Estimator; 5] = [
        Estimator::Sliced(Method::Ghsw),
        Estimator::Sliced(Method::Hhsw),
        Estimator::Sliced(Method::Swl),
        Estimator::Sliced(Method::Swp),
        Estimator::Exact,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Estimator::Sliced(m) => m.name(),
            Estimator::Exact => "W",
        }
    }

    /// Distance (p-th root) between two measures.
    pub fn distance(self, mu: &DiscreteMeasure, nu: &DiscreteMeasure, cfg: &SlicedConfig) -> Result<f64> {
        match self {
            Estimator::Sliced(m) => Ok(sliced_distance(m, mu, nu, cfg)?),
            Estimator::Exact => {
                let (a, b) = (mu.to_model(Model::Lorentz), nu.to_model(Model::Lorentz));
                Ok(wasserstein_geodesic_ref(&a, &b, cfg.order)?.powf(1.0 / cfg.order))
            }
        }
    }
}

impl fmt::Display for Estimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Estimator {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "w" | "exact" | "exact-w" | "wasserstein" => Ok(Estimator::Exact),
            other => other.parse::<Method>().map(Estimator::Sliced).map_err(|_| usage(format!("unknown method '{s}'"))),
        }
    }
}

fn origin_wnd(d: usize, sigma2: f64) -> Result<WrappedNormal> {
    Ok(WrappedNormal::isotropic(LorentzPoint::origin(d), sigma2)?)
}

fn sample_measure(g: &WrappedNormal, n: usize, seed: u64) -> Result<DiscreteMeasure> {
    Ok(DiscreteMeasure::uniform_lorentz(&g.sample(n, seed))?)
}

fn mean_and_stderr(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (m, 0.0);
    }
    let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (var / n).sqrt())
}

// ---------------------------------------------------------------- runtime

#[derive(Debug, Clone)]
pub struct BenchSpec {
    pub ns: Vec<usize>,
    pub d: usize,
    pub num_projections: usize,
    pub order: f64,
    pub repeats: usize,
    pub seed: u64,
    pub methods: Vec<Estimator>,
    /// Largest n given to the exact solver.
    pub exact_cap: usize,
}

impl Default for BenchSpec {
    fn default() -> Self {
        Self {
            ns: vec![100, 1_000, 10_000, 50_000, 100_000],
            d: 2,
            num_projections: 200,
            order: 2.0,
            repeats: 5,
            seed: 0,
            methods: Estimator::ALL.to_vec(),
            exact_cap: 1_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub method: Estimator,
    pub n: usize,
    pub seconds: f64,
}

/// Median wall-clock time of each estimator on two samples of size n, after
/// one warmup run.
pub fn bench_runtime(spec: &BenchSpec) -> Result<Vec<BenchRow>> {
    if spec.repeats == 0 || spec.ns.is_empty() {
        return Err(usage("need at least one repeat and one n"));
    }
    let g = origin_wnd(spec.d, 1.0)?;
    let mut rows = Vec::new();
    for &method in &spec.methods {
        for &n in &spec.ns {
            if method == Estimator::Exact && n > spec.exact_cap {
                continue;
            }
            let mu = sample_measure(&g, n, derive_seed(spec.seed, 2 * n as u64))?;
            let nu = sample_measure(&g, n, derive_seed(spec.seed, 2 * n as u64 + 1))?;
            let cfg = SlicedConfig::new(spec.num_projections, spec.order, spec.seed);
            method.distance(&mu, &nu, &cfg)?;
            let mut times: Vec<f64> = (0..spec.repeats)
                .map(|_| {
                    let start = Instant::now();
                    method.distance(&mu, &nu, &cfg).map(|_| start.elapsed().as_secs_f64())
                })
                .collect::<Result<_>>()?;
            times.sort_by(f64::total_cmp);
            let k = times.len();
            let median = if k % 2 == 1 { times[k / 2] } else { 0.5 * (times[k / 2 - 1] + times[k / 2]) };
            rows.push(BenchRow { method, n, seconds: median });
        }
    }
    Ok(rows)
}

pub fn write_bench_csv(rows: &[BenchRow], out: &mut dyn Write) -> std::io::Result<()> {
    writeln!(out, "method,n,seconds")?;
    for r in rows {
        writeln!(out, "{},{},{}", r.method, r.n, fmt_float(r.seconds))?;
    }
    Ok(())
}

// ---------------------------------------------------------------- curves

/// One averaged point of a distance curve.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    pub method: Estimator,
    /// Grid abscissa (t or τ).
    pub x: f64,
    pub mean: f64,
    pub stderr: f64,
}

pub fn write_curve_csv(points: &[CurvePoint], x_name: &str, out: &mut dyn Write) -> std::io::Result<()> {
    writeln!(out, "method,{x_name},value")?;
    for p in points {
        writeln!(out, "{},{},{}", p.method, fmt_float(p.x), fmt_float(p.mean))?;
    }
    Ok(())
}

/// `count` evenly spaced values on `[lo, hi]`.
pub fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..count).map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64).collect(),
    }
}

#[derive(Debug, Clone)]
pub struct CurveWndSpec {
    pub n: usize,
    pub num_projections: usize,
    pub order: f64,
    pub repeats: usize,
    pub ts: Vec<f64>,
    pub seed: u64,
    pub methods: Vec<Estimator>,
    /// Model HHSW is evaluated in.
    pub model: Model,
    /// Geodesic along which the second distribution moves.
    pub direction: Vec<f64>,
    pub sigma2: f64,
}

impl Default for CurveWndSpec {
    fn default() -> Self {
        Self {
            n: 500,
            num_projections: 200,
            order: 2.0,
            repeats: 5,
            ts: linspace(-10.0, 10.0, 21),
            seed: 0,
            methods: Estimator::ALL[..4].to_vec(),
            model: Model::Lorentz,
            direction: vec![1.0, 0.0],
            sigma2: 1.0,
        }
    }
}

/// Distances between `G(x⁰, σ²I)` and `G(γ(t), σ²I)` along one origin geodesic.
///
/// Each repeat reuses its two sample seeds across the whole t-grid, so the
/// curves are smooth in t.
pub fn curve_wnd(spec: &CurveWndSpec) -> Result<Vec<CurvePoint>> {
    if spec.repeats == 0 {
        return Err(usage("need at least one repeat"));
    }
    let dir = Direction::normalize(spec.direction.clone())?;
    let d = dir.dim();
    let base = origin_wnd(d, spec.sigma2)?;
    let mut values = vec![vec![Vec::with_capacity(spec.repeats); spec.ts.len()]; spec.methods.len()];
    for s in 0..spec.repeats as u64 {
        let rs = derive_seed(spec.seed, s);
        let mu = sample_measure(&base, spec.n, derive_seed(rs, 0))?;
        let cfg = SlicedConfig::new(spec.num_projections, spec.order, derive_seed(rs, 2)).with_model(spec.model);
        for (ti, &t) in spec.ts.iter().enumerate() {
            let moved = WrappedNormal::isotropic(geodesic_point(&dir, t), spec.sigma2)?;
            let nu = sample_measure(&moved, spec.n, derive_seed(rs, 1))?;
            for (mi, m) in spec.methods.iter().enumerate() {
                values[mi][ti].push(m.distance(&mu, &nu, &cfg)?);
            }
        }
    }
    Ok(collect_points(&spec.methods, &spec.ts, values))
}

fn collect_points(methods: &[Estimator], xs: &[f64], values: Vec<Vec<Vec<f64>>>) -> Vec<CurvePoint> {
    let mut out = Vec::new();
    for (m, per_x) in methods.iter().zip(values) {
        for (&x, v) in xs.iter().zip(per_x) {
            let (mean, stderr) = mean_and_stderr(&v);
            out.push(CurvePoint { method: *m, x, mean, stderr });
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct CurveTreesSpec {
    pub r: usize,
    pub h: usize,
    pub base_tau: f64,
    pub taus: Vec<f64>,
    pub num_projections: usize,
    pub order: f64,
    pub repeats: usize,
    pub seed: u64,
    pub methods: Vec<Estimator>,
    pub model: Model,
}

impl Default for CurveTreesSpec {
    fn default() -> Self {
        Self {
            r: 2,
            h: 5,
            base_tau: 0.05,
            taus: vec![0.05, 0.1, 0.25, 0.5, 0.6, 0.7, 0.8, 0.9],
            num_projections: 200,
            order: 2.0,
            repeats: 5,
            seed: 0,
            methods: Estimator::ALL[..4].to_vec(),
            model: Model::Poincare,
        }
    }
}

/// Distances between one tree embedded at `base_tau` and the same tree at each τ.
pub fn curve_trees(spec: &CurveTreesSpec) -> Result<Vec<CurvePoint>> {
    if spec.repeats == 0 {
        return Err(usage("need at least one repeat"));
    }
    let tree = balanced_tree(spec.r, spec.h)?;
    let base = embedding_to_measure(&sarkar_embed(&tree, spec.base_tau)?)?;
    let others: Vec<DiscreteMeasure> =
        spec.taus.iter().map(|&tau| Ok(embedding_to_measure(&sarkar_embed(&tree, tau)?)?)).collect::<Result<_>>()?;
    let mut values = vec![vec![Vec::with_capacity(spec.repeats); spec.taus.len()]; spec.methods.len()];
    for s in 0..spec.repeats as u64 {
        let cfg = SlicedConfig::new(spec.num_projections, spec.order, derive_seed(spec.seed, s)).with_model(spec.model);
        for (ti, other) in others.iter().enumerate() {
            for (mi, m) in spec.methods.iter().enumerate() {
                values[mi][ti].push(m.distance(&base, other, &cfg)?);
            }
        }
    }
    Ok(collect_points(&spec.methods, &spec.taus, values))
}

// ---------------------------------------------------------------- sample complexity

#[derive(Debug, Clone)]
pub struct SampleComplexitySpec {
    pub ns: Vec<usize>,
    pub dims: Vec<usize>,
    pub num_projections: usize,
    pub order: f64,
    pub repeats: usize,
    pub seed: u64,
    pub methods: Vec<Estimator>,
    pub exact_cap: usize,
    /// The exact distance is only computed up to this dimension.
    pub exact_max_dim: usize,
}

impl Default for SampleComplexitySpec {
    fn default() -> Self {
        Self {
            ns: vec![100, 1_000, 10_000],
            dims: vec![3, 50],
            num_projections: 1000,
            order: 2.0,
            repeats: 5,
            seed: 0,
            methods: vec![Estimator::Sliced(Method::Ghsw), Estimator::Sliced(Method::Hhsw), Estimator::Exact],
            exact_cap: 1_000,
            exact_max_dim: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexityRow {
    pub method: Estimator,
    pub d: usize,
    pub n: usize,
    pub mean: f64,
    pub stderr: f64,
}

/// Distance between two independent samples of `G(x⁰, I_d)`, averaged over repeats.
pub fn sample_complexity(spec: &SampleComplexitySpec) -> Result<Vec<ComplexityRow>> {
    if spec.repeats == 0 {
        return Err(usage("need at least one repeat"));
    }
    let mut rows = Vec::new();
    for &d in &spec.dims {
        let g = origin_wnd(d, 1.0)?;
        for &n in &spec.ns {
            let methods: Vec<Estimator> = spec
                .methods
                .iter()
                .copied()
                .filter(|m| *m != Estimator::Exact || (n <= spec.exact_cap && d <= spec.exact_max_dim))
                .collect();
            let mut values = vec![Vec::with_capacity(spec.repeats); methods.len()];
            for s in 0..spec.repeats as u64 {
                let rs = derive_seed(derive_seed(derive_seed(spec.seed, d as u64), n as u64), s);
                let mu = sample_measure(&g, n, derive_seed(rs, 0))?;
                let nu = sample_measure(&g, n, derive_seed(rs, 1))?;
                let cfg = SlicedConfig::new(spec.num_projections, spec.order, derive_seed(rs, 2));
                for (m, v) in methods.iter().zip(values.iter_mut()) {
                    v.push(m.distance(&mu, &nu, &cfg)?);
                }
            }
            for (m, v) in methods.iter().zip(values) {
                let (mean, stderr) = mean_and_stderr(&v);
                rows.push(ComplexityRow { method: *m, d, n, mean, stderr });
            }
        }
    }
    Ok(rows)
}

pub fn write_complexity_csv(rows: &[ComplexityRow], out: &mut dyn Write) -> std::io::Result<()> {
    writeln!(out, "method,d,n,value")?;
    for r in rows {
        writeln!(out, "{},{},{},{}", r.method, r.d, r.n, fmt_float(r.mean))?;
    }
    Ok(())
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let cov: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let var: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    cov / var
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_estimators() {
        assert_eq!("w".parse::<Estimator>().unwrap(), Estimator::Exact);
        assert_eq!("ghsw".parse::<Estimator>().unwrap(), Estimator::Sliced(Method::Ghsw));
        assert_eq!("SWp".parse::<Estimator>().unwrap(), Estimator::Sliced(Method::Swp));
        assert!("nope".parse::<Estimator>().is_err());
        for e in Estimator::ALL {
            assert_eq!(e.name().parse::<Estimator>().unwrap(), e);
        }
    }

    #[test]
    fn grid_and_slope() {
        assert_eq!(linspace(-1.0, 1.0, 5), vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
        assert_eq!(linspace(2.0, 3.0, 1), vec![2.0]);
        let xs = [1.0, 10.0, 100.0];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powf(-0.5)).collect();
        assert!((log_log_slope(&xs, &ys) + 0.5).abs() < 1e-12);
    }

    #[test]
    fn small_curves() {
        let spec = CurveWndSpec { n: 40, num_projections: 20, repeats: 2, ts: vec![0.0, 2.0], ..Default::default() };
        let pts = curve_wnd(&spec).unwrap();
        assert_eq!(pts.len(), 8);
        assert!(pts.iter().all(|p| p.mean.is_finite() && p.mean >= 0.0));

        let spec =
            CurveTreesSpec { h: 2, taus: vec![0.05, 0.5], repeats: 2, num_projections: 20, ..Default::default() };
        let pts = curve_trees(&spec).unwrap();
        assert!(pts.iter().filter(|p| p.x == 0.05).all(|p| p.mean == 0.0));
        assert!(pts.iter().filter(|p| p.x == 0.5).all(|p| p.mean > 0.0));
    }

    #[test]
    fn complexity_respects_exact_limits() {
        let spec = SampleComplexitySpec {
            ns: vec![20, 40],
            dims: vec![3, 5],
            num_projections: 10,
            repeats: 2,
            exact_cap: 30,
            ..Default::default()
        };
        let rows = sample_complexity(&spec).unwrap();
        let exact: Vec<_> = rows.iter().filter(|r| r.method == Estimator::Exact).collect();
        assert_eq!(exact.len(), 1);
        assert_eq!((exact[0].d, exact[0].n), (3, 20));
    }

    #[test]
    fn bench_rows() {
        let spec =
            BenchSpec { ns: vec![50, 100], repeats: 1, exact_cap: 50, num_projections: 10, ..Default::default() };
        let rows = bench_runtime(&spec).unwrap();
        assert_eq!(rows.len(), 4 * 2 + 1);
        let mut buf = Vec::new();
        write_bench_csv(&rows, &mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("method,n,seconds\nGHSW,50,"));
    }
}
