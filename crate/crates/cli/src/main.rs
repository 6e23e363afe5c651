use std::io::{BufReader, Write};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use hyperslice::flows::{FlowLogRow, PoincareUpdate};
use hyperslice::sliced::{Method, Model};
use hyperslice::trees::{balanced_tree, sarkar_embed};
use hyperslice_cli::error::CliError;
use hyperslice_cli::experiments::{
    bench_runtime, curve_trees, curve_wnd, linspace, sample_complexity, write_bench_csv, write_complexity_csv,
    write_curve_csv, BenchSpec, CurveTreesSpec, CurveWndSpec, Estimator, SampleComplexitySpec,
};
use hyperslice_cli::flow::{flow, read_cloud, write_snapshots, FlowPreset, FlowSpec};
use hyperslice_cli::{open_output, Result};

#[derive(Parser)]
#[command(name = "hyperslice", version, about = "Sliced-Wasserstein experiments on hyperbolic space")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Base seed; identical invocations give identical output.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output path, `-` for standard output.
    #[arg(long, default_value = "-")]
    out: String,
    /// Worker threads for the slicing loops (default: available parallelism).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Lorentz,
    Poincare,
}

impl From<ModelArg> for Model {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Lorentz => Model::Lorentz,
            ModelArg::Poincare => Model::Poincare,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum UpdateArg {
    Retraction,
    Exp,
}

#[derive(Subcommand)]
enum Command {
    /// Median runtime of each discrepancy against the sample size.
    BenchRuntime {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', default_value = "100,1000,10000,50000,100000")]
        n: Vec<usize>,
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long = "L", default_value_t = 200)]
        l: usize,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        /// Comma-separated subset of GHSW,HHSW,SWl,SWp,W.
        #[arg(long, value_delimiter = ',', default_value = "GHSW,HHSW,SWl,SWp,W")]
        method: Vec<String>,
        #[arg(long, default_value_t = 5)]
        repeats: usize,
        /// Largest n given to the exact solver.
        #[arg(long, default_value_t = 1000)]
        n_ref: usize,
    },
    /// Distances between G(x⁰, I) and G(γ(t), I) over a t-grid.
    CurveWnd {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 500)]
        n: usize,
        #[arg(long = "L", default_value_t = 200)]
        l: usize,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long, value_delimiter = ',', default_value = "GHSW,HHSW,SWl,SWp")]
        method: Vec<String>,
        #[arg(long, default_value_t = -10.0, allow_hyphen_values = true)]
        t_min: f64,
        #[arg(long, default_value_t = 10.0, allow_hyphen_values = true)]
        t_max: f64,
        #[arg(long, default_value_t = 21)]
        t_steps: usize,
        #[arg(long, default_value_t = 5)]
        repeats: usize,
        /// Model HHSW is evaluated in.
        #[arg(long, value_enum, default_value = "lorentz")]
        model: ModelArg,
    },
    /// Distances between a tree embedded at τ = 0.05 and the same tree at each τ.
    CurveTrees {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 2)]
        r: usize,
        #[arg(long, default_value_t = 5)]
        h: usize,
        #[arg(long, value_delimiter = ',', default_value = "0.05,0.1,0.25,0.5,0.6,0.7,0.8,0.9")]
        tau: Vec<f64>,
        #[arg(long, default_value_t = 0.05)]
        base_tau: f64,
        #[arg(long = "L", default_value_t = 200)]
        l: usize,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long, value_delimiter = ',', default_value = "GHSW,HHSW,SWl,SWp")]
        method: Vec<String>,
        #[arg(long, default_value_t = 5)]
        repeats: usize,
        #[arg(long, value_enum, default_value = "poincare")]
        model: ModelArg,
    },
    /// Riemannian gradient flow towards a preset target; writes the W₂ log.
    Flow {
        #[command(flatten)]
        common: Common,
        /// One of wnd-near, wnd-far, mixture-near, mixture-far.
        #[arg(long, default_value = "wnd-near")]
        preset: String,
        /// Print the preset's parameters and exit.
        #[arg(long)]
        show_preset: bool,
        #[arg(long, default_value = "GHSW")]
        method: String,
        #[arg(long)]
        lr: Option<f64>,
        #[arg(long)]
        iters: Option<usize>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long = "L")]
        l: Option<usize>,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long)]
        log_every: Option<usize>,
        /// Particle model (default: poincare for SWp, lorentz otherwise).
        #[arg(long, value_enum)]
        model: Option<ModelArg>,
        #[arg(long, value_enum, default_value = "retraction")]
        update: UpdateArg,
        /// Initial particles: CSV of Lorentz or ball coordinates.
        #[arg(long)]
        init: Option<String>,
        /// Also write particle snapshots at every logged iteration.
        #[arg(long)]
        snapshots: Option<String>,
    },
    /// Distance between two samples of G(x⁰, I_d) against n, in several dimensions.
    SampleComplexity {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', default_value = "100,1000,10000")]
        n: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "3,50")]
        d: Vec<usize>,
        #[arg(long = "L", default_value_t = 1000)]
        l: usize,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long, value_delimiter = ',', default_value = "GHSW,HHSW,W")]
        method: Vec<String>,
        #[arg(long, default_value_t = 5)]
        repeats: usize,
        #[arg(long, default_value_t = 1000)]
        n_ref: usize,
        /// Largest dimension the exact distance is computed in.
        #[arg(long, default_value_t = 3)]
        exact_max_dim: usize,
    },
    /// Sarkar embedding of a balanced tree.
    TreeEmbed {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 2)]
        r: usize,
        #[arg(long, default_value_t = 5)]
        h: usize,
        #[arg(long, default_value_t = 0.5)]
        tau: f64,
    },
}

fn estimators(names: &[String]) -> Result<Vec<Estimator>> {
    names.iter().map(|s| s.parse()).collect()
}

fn set_threads(threads: Option<usize>) -> Result<()> {
    if let Some(t) = threads {
        if t == 0 {
            return Err(CliError::Usage("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new().num_threads(t).build_global().map_err(|e| CliError::Usage(e.to_string()))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::BenchRuntime { common, n, d, l, p, method, repeats, n_ref } => {
            set_threads(common.threads)?;
            let spec = BenchSpec {
                ns: n,
                d,
                num_projections: l,
                order: p,
                repeats,
                seed: common.seed,
                methods: estimators(&method)?,
                exact_cap: n_ref,
            };
            let rows = bench_runtime(&spec)?;
            let mut out = open_output(&common.out)?;
            write_bench_csv(&rows, &mut out)?;
            out.flush()?;
        }
        Command::CurveWnd { common, n, l, p, method, t_min, t_max, t_steps, repeats, model } => {
            set_threads(common.threads)?;
            let spec = CurveWndSpec {
                n,
                num_projections: l,
                order: p,
                repeats,
                ts: linspace(t_min, t_max, t_steps),
                seed: common.seed,
                methods: estimators(&method)?,
                model: model.into(),
                ..Default::default()
            };
            let pts = curve_wnd(&spec)?;
            let mut out = open_output(&common.out)?;
            write_curve_csv(&pts, "t", &mut out)?;
            out.flush()?;
        }
        Command::CurveTrees { common, r, h, tau, base_tau, l, p, method, repeats, model } => {
            set_threads(common.threads)?;
            let spec = CurveTreesSpec {
                r,
                h,
                base_tau,
                taus: tau,
                num_projections: l,
                order: p,
                repeats,
                seed: common.seed,
                methods: estimators(&method)?,
                model: model.into(),
            };
            let pts = curve_trees(&spec)?;
            let mut out = open_output(&common.out)?;
            write_curve_csv(&pts, "tau", &mut out)?;
            out.flush()?;
        }
        Command::Flow {
            common,
            preset,
            show_preset,
            method,
            lr,
            iters,
            n,
            l,
            p,
            log_every,
            model,
            update,
            init,
            snapshots,
        } => {
            set_threads(common.threads)?;
            let preset = FlowPreset::by_name(&preset)?;
            if show_preset {
                let mut out = open_output(&common.out)?;
                out.write_all(preset.describe().as_bytes())?;
                out.flush()?;
                return Ok(());
            }
            let method: Method = method.parse().map_err(|_| CliError::Usage(format!("unknown method '{method}'")))?;
            let mut spec = FlowSpec::new(preset, method, common.seed);
            spec.learning_rate = lr;
            spec.iterations = iters;
            spec.n = n;
            spec.num_projections = l;
            spec.order = p;
            spec.log_every = log_every;
            spec.model = model.map(Into::into);
            spec.poincare_update = match update {
                UpdateArg::Retraction => PoincareUpdate::Retraction,
                UpdateArg::Exp => PoincareUpdate::Exp,
            };
            if let Some(path) = init {
                let f = std::fs::File::open(&path)?;
                spec.init = Some(read_cloud(BufReader::new(f), 2)?);
            }
            let mut out = open_output(&common.out)?;
            writeln!(out, "{}", FlowLogRow::CSV_HEADER)?;
            spec.keep_snapshots = snapshots.is_some();
            let mut io_err = None;
            let result = flow(&spec, |row| {
                if io_err.is_none() {
                    if let Err(e) = writeln!(out, "{}", row.csv_line()) {
                        io_err = Some(e);
                    }
                }
            });
            out.flush()?;
            if let Some(e) = io_err {
                return Err(e.into());
            }
            let traj = result?;
            if let Some(path) = snapshots {
                let mut snap = open_output(&path)?;
                write_snapshots(&traj, &mut snap)?;
                snap.flush()?;
            }
        }
        Command::SampleComplexity { common, n, d, l, p, method, repeats, n_ref, exact_max_dim } => {
            set_threads(common.threads)?;
            let spec = SampleComplexitySpec {
                ns: n,
                dims: d,
                num_projections: l,
                order: p,
                repeats,
                seed: common.seed,
                methods: estimators(&method)?,
                exact_cap: n_ref,
                exact_max_dim,
            };
            let rows = sample_complexity(&spec)?;
            let mut out = open_output(&common.out)?;
            write_complexity_csv(&rows, &mut out)?;
            out.flush()?;
        }
        Command::TreeEmbed { common, r, h, tau } => {
            set_threads(common.threads)?;
            let e = sarkar_embed(&balanced_tree(r, h)?, tau)?;
            let mut out = open_output(&common.out)?;
            e.write_csv(&mut out)?;
            out.flush()?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}: {}", e.kind(), e);
            ExitCode::FAILURE
        }
    }
}
