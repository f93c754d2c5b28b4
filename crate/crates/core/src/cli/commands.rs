use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::analytic::{run_cascade_with, CascadeOptions, PassageEngine};
use crate::fock::{coherent_coeffs, PassageState, NORM_TOL};
use crate::observables::{
    entropy_cubic, inversion, moments, reduced_rho, wigner, WignerSpec, TRUNCATION_MARGIN_LEVELS,
    TRUNCATION_MARGIN_MASS,
};
use crate::ENGINE_VERSION;

use super::config::{Observable, ScenarioConfig};
use super::CliError;

/// A local minimum of the first-passage inversion.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InversionMinimum {
    pub tau1: f64,
    pub inversion: f64,
    /// Probability of finding the first atom in `|g>` at `tau1`.
    pub probability: f64,
}

fn first_passage_engine(cfg: &ScenarioConfig) -> Result<PassageEngine, CliError> {
    let params = cfg.model_params()?;
    let alpha = Complex64::new(cfg.alpha_sq.sqrt(), 0.0);
    let field = coherent_coeffs(alpha, params.n_max, cfg.tail_tol)?;
    Ok(PassageEngine::new(&field, &params)?)
}

fn ground_probability(s: &PassageState) -> f64 {
    s.c.iter().map(|z| z.norm_sqr()).sum()
}

/// Scans the first-passage inversion on `(0, tau1_scan_max]` and polishes every
/// sampled local minimum by golden-section search within its bracket.
pub fn cmd_minima(cfg: &ScenarioConfig) -> Result<Vec<InversionMinimum>, CliError> {
    cfg.validate()?;
    let engine = first_passage_engine(cfg)?;
    let steps = (cfg.tau1_scan_max / cfg.tau1_scan_step).floor() as usize;
    let taus: Vec<f64> = (0..=steps).map(|k| k as f64 * cfg.tau1_scan_step).collect();
    let w: Vec<f64> = taus.par_iter().map(|&t| inversion(&engine.state_at(t))).collect();
    let inv = |t: f64| inversion(&engine.state_at(t));
    let mut out = Vec::new();
    for k in 1..steps {
        if !(w[k] < w[k - 1] && w[k] <= w[k + 1]) {
            continue;
        }
        let (mut lo, mut hi) = (taus[k - 1], taus[k + 1]);
        let phi = 0.5 * (5f64.sqrt() - 1.0);
        let mut x1 = hi - phi * (hi - lo);
        let mut x2 = lo + phi * (hi - lo);
        let (mut f1, mut f2) = (inv(x1), inv(x2));
        while hi - lo > 1e-10 * (1.0 + hi.abs()) {
            if f1 <= f2 {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - phi * (hi - lo);
                f1 = inv(x1);
            } else {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + phi * (hi - lo);
                f2 = inv(x2);
            }
        }
        let tau1 = 0.5 * (lo + hi);
        let s = engine.state_at(tau1);
        out.push(InversionMinimum {
            tau1,
            inversion: inversion(&s),
            probability: ground_probability(&s),
        });
    }
    Ok(out)
}

pub fn write_minima(rows: &[InversionMinimum], out: &mut impl Write) -> std::io::Result<()> {
    writeln!(out, "tau1,inversion,probability")?;
    for r in rows {
        writeln!(out, "{:.16e},{:.16e},{:.16e}", r.tau1, r.inversion, r.probability)?;
    }
    Ok(())
}

/// Scalars gathered while writing the run outputs.
#[derive(Clone, Debug, PartialEq)]
pub struct RunSummary {
    pub out_dir: PathBuf,
    pub n_max: usize,
    pub probability: f64,
    pub rows: usize,
    pub files: Vec<PathBuf>,
    pub max_entropy: Option<f64>,
    pub min_s_x1: Option<f64>,
    pub min_q: Option<f64>,
    pub wigner_min: Option<f64>,
    pub wigner_coverage_warning: bool,
}

/// One row of observables at a single `tau2`.
#[derive(Default)]
struct Sample {
    inversion: f64,
    entropy: f64,
    s1: (f64, f64),
    s2: (f64, f64),
    q: f64,
}

fn sample(state: &PassageState, cfg: &ScenarioConfig) -> Result<Sample, CliError> {
    let obs = &cfg.observables;
    let mut s = Sample::default();
    if obs.contains(&Observable::Inversion) {
        s.inversion = inversion(state);
    }
    if obs.contains(&Observable::Entropy) {
        s.entropy = entropy_cubic(&reduced_rho(state))?;
    }
    let wants_moments = [Observable::Squeezing1, Observable::Squeezing2, Observable::Mandel]
        .iter()
        .any(|o| obs.contains(o));
    if wants_moments {
        let m = moments(state)?;
        let p1 = m.squeezing_first();
        let p2 = m.squeezing_second();
        s.s1 = (p1.s_x, p1.s_p);
        s.s2 = (p2.s_x, p2.s_p);
        if obs.contains(&Observable::Mandel) {
            s.q = m.mandel_q()?;
        }
    }
    Ok(s)
}

fn create(path: &Path) -> Result<BufWriter<fs::File>, CliError> {
    let f = fs::File::create(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    Ok(BufWriter::new(f))
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> CliError + '_ {
    move |e| CliError::Io(format!("{}: {e}", path.display()))
}

fn write_series(
    path: &Path,
    header: &str,
    taus: &[f64],
    cols: impl Fn(usize) -> Vec<f64>,
) -> Result<(), CliError> {
    let mut w = create(path)?;
    let err = io_err(path);
    writeln!(w, "{header}").map_err(&err)?;
    for (k, t) in taus.iter().enumerate() {
        let mut line = format!("{t:.16e}");
        for v in cols(k) {
            line.push_str(&format!(",{v:.16e}"));
        }
        writeln!(w, "{line}").map_err(&err)?;
    }
    w.flush().map_err(&err)
}

/// Runs the two-atom sequence and writes one CSV per requested observable plus
/// `manifest.cfg` into `cfg.out_dir`.
pub fn cmd_run(cfg: &ScenarioConfig) -> Result<RunSummary, CliError> {
    cfg.validate()?;
    let tau1 = cfg
        .tau1
        .ok_or_else(|| CliError::Config("tau1 is required for `run` (see `minima`)".into()))?;
    let params = cfg.model_params()?;
    let opts = CascadeOptions {
        tail_tol: cfg.tail_tol,
        projection_floor: cfg.projection_floor,
        ..CascadeOptions::default()
    };
    let mut taus = cfg.tau2_grid();
    let rows = taus.len();
    let wants_wigner = cfg.observables.contains(&Observable::Wigner);
    if let (true, Some(t)) = (wants_wigner, cfg.wigner_tau2) {
        taus.push(t);
    }
    let alpha = Complex64::new(cfg.alpha_sq.sqrt(), 0.0);
    let cascade = run_cascade_with(&params, alpha, tau1, &taus, &opts)?;
    let (series, snapshot) = cascade.states.split_at(rows);

    let samples: Vec<Sample> = series
        .par_iter()
        .map(|s| sample(s, cfg))
        .collect::<Result<_, _>>()?;

    let dir = &cfg.out_dir;
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let taus = &taus[..rows];
    let mut files = Vec::new();
    let mut summary = RunSummary {
        out_dir: dir.clone(),
        n_max: params.n_max,
        probability: cascade.projection.probability,
        rows,
        files: Vec::new(),
        max_entropy: None,
        min_s_x1: None,
        min_q: None,
        wigner_min: None,
        wigner_coverage_warning: false,
    };
    let min = |f: &dyn Fn(&Sample) -> f64| samples.iter().map(f).fold(f64::INFINITY, f64::min);
    for obs in &cfg.observables {
        let path = dir.join(format!("{}.csv", obs.name()));
        match obs {
            Observable::Inversion => write_series(&path, "tau2,value", taus, |k| vec![samples[k].inversion])?,
            Observable::Entropy => {
                write_series(&path, "tau2,value", taus, |k| vec![samples[k].entropy])?;
                summary.max_entropy = Some(samples.iter().map(|s| s.entropy).fold(f64::NEG_INFINITY, f64::max));
            }
            Observable::Mandel => {
                write_series(&path, "tau2,value", taus, |k| vec![samples[k].q])?;
                summary.min_q = Some(min(&|s| s.q));
            }
            Observable::Squeezing1 => {
                write_series(&path, "tau2,s_x,s_p", taus, |k| vec![samples[k].s1.0, samples[k].s1.1])?;
                summary.min_s_x1 = Some(min(&|s| s.s1.0));
            }
            Observable::Squeezing2 => {
                write_series(&path, "tau2,s_x,s_p", taus, |k| vec![samples[k].s2.0, samples[k].s2.1])?
            }
            Observable::Wigner => {
                let spec = WignerSpec::new(cfg.wigner_halfwidth, cfg.wigner_resolution);
                let grid = wigner(&snapshot[0], &spec)?;
                let mut w = create(&path)?;
                let err = io_err(&path);
                writeln!(w, "re,im,w").map_err(&err)?;
                for (j, im) in grid.im_axis.iter().enumerate() {
                    for (i, re) in grid.re_axis.iter().enumerate() {
                        writeln!(w, "{re:.16e},{im:.16e},{:.16e}", grid.at(i, j)).map_err(&err)?;
                    }
                }
                w.flush().map_err(&err)?;
                summary.wigner_min = Some(grid.min());
                summary.wigner_coverage_warning = grid.coverage_warning();
            }
        }
        files.push(path);
    }
    let manifest = dir.join("manifest.cfg");
    fs::write(&manifest, render_manifest(cfg, &summary)).map_err(io_err(&manifest))?;
    files.push(manifest);
    summary.files = files;
    Ok(summary)
}

fn render_manifest(cfg: &ScenarioConfig, s: &RunSummary) -> String {
    let mut out = format!(
        "# vcascade {ENGINE_VERSION}\n\
         # n_max = {}\n\
         # projection_probability = {:.16e}\n\
         # norm_tol = {NORM_TOL:e}\n\
         # moment_margin = {TRUNCATION_MARGIN_MASS:e} over top {TRUNCATION_MARGIN_LEVELS} levels\n",
        s.n_max, s.probability
    );
    if s.wigner_coverage_warning {
        out.push_str("# warning: Wigner grid boundary exceeds 1e-6 of peak; widen wigner_halfwidth\n");
    }
    out.push_str(&cfg.render());
    out
}

/// Axes that `sweep` may vary.
pub const SWEEP_AXES: [&str; 5] = ["delta1", "delta2", "lambda1", "alpha_sq", "tau1"];

#[derive(Clone, Debug, PartialEq)]
pub struct SweepPoint {
    pub value: String,
    pub outcome: Result<RunSummary, CliError>,
}

/// Runs `cmd_run` once per value into `out_dir/<axis>_<index>` and writes
/// `out_dir/summary.csv`. Failing points are recorded, not fatal.
pub fn cmd_sweep(cfg: &ScenarioConfig, axis: &str, values: &[String]) -> Result<Vec<SweepPoint>, CliError> {
    if !SWEEP_AXES.contains(&axis) {
        return Err(CliError::Config(format!("cannot sweep `{axis}`; axes are {}", SWEEP_AXES.join(", "))));
    }
    if values.is_empty() {
        return Err(CliError::Config("sweep needs at least one value".into()));
    }
    let mut configs = Vec::with_capacity(values.len());
    for (k, v) in values.iter().enumerate() {
        let mut point = cfg.clone();
        point.set(axis, v)?;
        point.out_dir = cfg.out_dir.join(format!("{axis}_{k:03}"));
        point.validate()?;
        configs.push(point);
    }
    let points: Vec<SweepPoint> = configs
        .par_iter()
        .zip(values)
        .map(|(c, v)| SweepPoint {
            value: v.clone(),
            outcome: cmd_run(c),
        })
        .collect();
    fs::create_dir_all(&cfg.out_dir).map_err(io_err(&cfg.out_dir))?;
    let path = cfg.out_dir.join("summary.csv");
    let mut w = create(&path)?;
    let err = io_err(&path);
    writeln!(w, "{axis},status,n_max,probability,max_entropy,min_s_x1,min_q,wigner_min").map_err(&err)?;
    let opt = |v: Option<f64>| v.map(|x| format!("{x:.16e}")).unwrap_or_default();
    for p in &points {
        let line = match &p.outcome {
            Ok(s) => format!(
                "{},ok,{},{:.16e},{},{},{},{}",
                p.value,
                s.n_max,
                s.probability,
                opt(s.max_entropy),
                opt(s.min_s_x1),
                opt(s.min_q),
                opt(s.wigner_min)
            ),
            Err(e) => format!("{},error {},,,,,,", p.value, e.exit_code()),
        };
        writeln!(w, "{line}").map_err(&err)?;
    }
    w.flush().map_err(&err)?;
    Ok(points)
}
