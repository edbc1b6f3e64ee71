//! Config-driven experiments with CSV/JSON artifacts.
//!
//! A run writes one or more CSV tables, `summary.json` and `manifest.json`
//! into the output directory. Every CSV starts with a `#`-prefixed JSON line
//! describing the run and its columns. Reals are written with 17 significant
//! digits so that they round-trip exactly.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::arc::Arc;
use crate::dynamics::{ballistic_coefficient, kernel_decay, moment_boundedness_probe, shells};
use crate::error::{Error, FieldError, Result};
use crate::green::{fm_decay_scan, MIN_DISTANCES};
use crate::models::{almost_sure_spectrum, lambda0, CoinSpec, ModelSpec};
use crate::solve::CIRCLE_TOL;
use crate::spectral::{eig_finite, eigenvalues_finite, DENSE_LIMIT};
use crate::stats::{batch_stderr, mean};
use crate::transfer::gamma_scan;
use crate::{C64, TAU};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "UNILOC_OUT_DIR";

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

fn one() -> usize {
    1
}

fn two() -> f64 {
    2.0
}

fn half() -> f64 {
    0.5
}

fn ten() -> usize {
    10
}

fn tenth() -> f64 {
    0.1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Experiment {
    /// Eigenvalues of every realization, checked against the predicted
    /// almost-sure spectrum where one exists.
    Spectrum {},
    /// `⟨|X|^p⟩(n)` from the origin.
    EvolveMoments {
        #[serde(default = "two")]
        p: f64,
        n_max: usize,
    },
    /// `E[sup_n |⟨e_j, U^n P e_o⟩|]` against `dist(j, o)`. `arc` gives the
    /// endpoints `[a, b]` of the spectral window, counterclockwise.
    KernelDecay {
        distances: Vec<usize>,
        n_max: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        arc: Option<[f64; 2]>,
    },
    /// `E|G(j, o; z)|^s` against `dist(j, o)` for each `z = re + i·im`.
    FmScan {
        #[serde(default = "half")]
        s: f64,
        z_grid: Vec<[f64; 2]>,
        distances: Vec<usize>,
    },
    /// `γ(z)` on a grid.
    LyapunovScan { z_grid: Vec<[f64; 2]>, steps: usize },
    /// Eigenvalue counts and projected kernel decay in the window
    /// `[E - gamma_width, E]` below the upper band edge `E = dλ0 + β`.
    BandEdge {
        #[serde(default = "tenth")]
        gamma_width: f64,
        n_max: usize,
        #[serde(default = "ten")]
        bins: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        distances: Option<Vec<usize>>,
    },
    /// `lim ⟨X²⟩(n)/n²` of a translation-invariant walk.
    Ballistic { n_max: usize },
}

impl Experiment {
    pub fn kind(&self) -> &'static str {
        match self {
            Experiment::Spectrum {} => "spectrum",
            Experiment::EvolveMoments { .. } => "evolve-moments",
            Experiment::KernelDecay { .. } => "kernel-decay",
            Experiment::FmScan { .. } => "fm-scan",
            Experiment::LyapunovScan { .. } => "lyapunov-scan",
            Experiment::BandEdge { .. } => "band-edge",
            Experiment::Ballistic { .. } => "ballistic",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelSpec,
    pub seed: u64,
    #[serde(default = "one")]
    pub realizations: usize,
    /// Worker threads; never changes the output.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    pub experiment: Experiment,
}

fn resolve_phases(model: &mut ModelSpec, base: &Path) -> Result<()> {
    match model {
        ModelSpec::MagneticRingHalfline { phases, .. }
        | ModelSpec::Band1d { phases, .. }
        | ModelSpec::AndersonD { phases, .. }
        | ModelSpec::Cmv { phases, .. }
        | ModelSpec::QuantumWalk { coin: CoinSpec::Random { phases, .. }, .. } => {
            *phases = phases.resolved(base)?;
        }
        ModelSpec::QuantumWalk { .. } => {}
    }
    Ok(())
}

fn z_of(p: [f64; 2]) -> C64 {
    C64::new(p[0], p[1])
}

fn arc_of(p: [f64; 2]) -> Result<Arc> {
    Arc::from_endpoints(p[0], p[1])
}

impl ExperimentConfig {
    /// Parses a JSON document; schema errors carry the path of the field.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            Error::Validation(vec![FieldError::new(path, e.into_inner().to_string())])
        })
    }

    /// Reads a config file; tabulated phase densities given as CSV paths
    /// are loaded relative to the file.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut cfg = Self::from_json(&fs::read_to_string(path)?)?;
        let base = path.parent().unwrap_or(Path::new("."));
        resolve_phases(&mut cfg.model, base)?;
        Ok(cfg)
    }

    /// Schema-level range checks. Never runs a computation.
    pub fn validate(&self) -> std::result::Result<(), Vec<FieldError>> {
        let mut errs = self.model.problems("model");
        let mut push = |p: &str, m: String| errs.push(FieldError::new(p, m));
        if self.realizations == 0 {
            push("realizations", "must be at least 1".into());
        }
        if self.threads == Some(0) {
            push("threads", "must be at least 1".into());
        }
        let model_ok = self.model.problems("model").is_empty();
        let check_distances = |ds: &[usize], push: &mut dyn FnMut(&str, String)| {
            if ds.is_empty() {
                push("experiment.distances", "empty".into());
            } else if model_ok {
                if let Err(e) = shells(&self.model, ds) {
                    push("experiment.distances", e.to_string());
                }
            }
        };
        match &self.experiment {
            Experiment::Spectrum {} => {
                if self.model.dim() > DENSE_LIMIT {
                    push("model", format!("dimension {} exceeds the dense limit {DENSE_LIMIT}", self.model.dim()));
                }
            }
            Experiment::EvolveMoments { p, n_max } => {
                if !(*p > 0.0) {
                    push("experiment.p", format!("{p} must be positive"));
                }
                if *n_max == 0 {
                    push("experiment.n_max", "must be at least 1".into());
                }
            }
            Experiment::KernelDecay { distances, n_max, arc } => {
                check_distances(distances, &mut push);
                if *n_max == 0 {
                    push("experiment.n_max", "must be at least 1".into());
                }
                if let Some(a) = arc {
                    if let Err(e) = arc_of(*a) {
                        push("experiment.arc", e.to_string());
                    } else if self.model.dim() > DENSE_LIMIT {
                        push("experiment.arc", format!("projection needs dimension ≤ {DENSE_LIMIT}"));
                    }
                }
            }
            Experiment::FmScan { s, z_grid, distances } => {
                if !(*s > 0.0 && *s < 1.0) {
                    push("experiment.s", format!("{s} is not in (0, 1)"));
                }
                if z_grid.is_empty() {
                    push("experiment.z_grid", "empty".into());
                }
                for (i, p) in z_grid.iter().enumerate() {
                    let m = z_of(*p).norm();
                    if !m.is_finite() || (m - 1.0).abs() <= CIRCLE_TOL {
                        push(
                            &format!("experiment.z_grid[{i}]"),
                            format!("z = {} + {}i lies on the unit circle", p[0], p[1]),
                        );
                    }
                }
                check_distances(distances, &mut push);
                let fitted = distances.iter().filter(|&&d| d >= crate::dynamics::NEAR_FIELD).count();
                if fitted < MIN_DISTANCES {
                    push(
                        "experiment.distances",
                        format!("{fitted} distances ≥ {}; need at least {MIN_DISTANCES}", crate::dynamics::NEAR_FIELD),
                    );
                }
            }
            Experiment::LyapunovScan { z_grid, steps } => {
                match &self.model {
                    ModelSpec::Band1d { .. } | ModelSpec::MagneticRingHalfline { .. } | ModelSpec::QuantumWalk { .. } => {}
                    ModelSpec::AndersonD { d: 1, .. } => {}
                    m => push("model.family", format!("{} has no transfer recursion", m.family())),
                }
                if z_grid.is_empty() {
                    push("experiment.z_grid", "empty".into());
                }
                for (i, p) in z_grid.iter().enumerate() {
                    let m = z_of(*p).norm();
                    if !m.is_finite() || m == 0.0 {
                        push(&format!("experiment.z_grid[{i}]"), "z must be finite and nonzero".into());
                    }
                }
                if *steps < crate::stats::BATCHES {
                    push("experiment.steps", format!("{steps} is below {}", crate::stats::BATCHES));
                }
            }
            Experiment::BandEdge { gamma_width, n_max, bins, distances } => {
                match &self.model {
                    ModelSpec::Band1d { phases, .. } | ModelSpec::AndersonD { phases, .. } => {
                        if phases.beta().map_or(true, |b| b >= std::f64::consts::PI) {
                            push("model.phases", "needs phases supported in [-β, β] with β < π".into());
                        }
                    }
                    m => push("model.family", format!("{} has no band-edge prediction", m.family())),
                }
                if !(*gamma_width > 0.0) {
                    push("experiment.gamma_width", format!("{gamma_width} must be positive"));
                }
                if *n_max == 0 {
                    push("experiment.n_max", "must be at least 1".into());
                }
                if *bins == 0 {
                    push("experiment.bins", "must be at least 1".into());
                }
                if let Some(ds) = distances {
                    check_distances(ds, &mut push);
                }
                if self.model.dim() > DENSE_LIMIT {
                    push("model", format!("dimension {} exceeds the dense limit {DENSE_LIMIT}", self.model.dim()));
                }
            }
            Experiment::Ballistic { n_max } => {
                if *n_max < 100 {
                    push("experiment.n_max", format!("{n_max} is below 100"));
                }
                match &self.model {
                    ModelSpec::QuantumWalk { n, coin } => {
                        if let CoinSpec::Random { .. } = coin {
                            push("model.coin", "ballistic runs need a fixed coin".into());
                        }
                        if *n < 2 * (n_max + 1) {
                            push("model.n", format!("{n} positions let the front wrap; need at least {}", 2 * (n_max + 1)));
                        }
                    }
                    m => push("model.family", format!("ballistic runs need a quantum walk, not {}", m.family())),
                }
            }
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(errs)
        }
    }

    /// Config without the fields that must not affect the output.
    fn canonical(&self) -> Value {
        let mut c = self.clone();
        c.threads = None;
        c.output_dir = None;
        serde_json::to_value(&c).expect("config serializes")
    }

    /// SHA-256 of the canonical config.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.canonical().to_string().as_bytes()))
    }
}

/// A column value.
#[derive(Clone, Copy, Debug)]
enum Cell {
    Int(i64),
    Real(f64),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Real(v) => format!("{v:.16e}"),
        }
    }
}

struct Table {
    name: &'static str,
    columns: Vec<&'static str>,
    rows: Vec<Vec<Cell>>,
}

fn int(v: usize) -> Cell {
    Cell::Int(v as i64)
}

fn real(v: f64) -> Cell {
    Cell::Real(v)
}

/// Result of a run.
#[derive(Clone, Debug, Serialize)]
pub struct RunOutput {
    pub dir: PathBuf,
    pub files: Vec<String>,
    pub summary: Value,
}

/// Validates, computes and writes the artifacts into `out_dir`.
///
/// `threads` sets the size of the worker pool (the default pool when
/// `None`); it has no effect on the output.
pub fn run(config: &ExperimentConfig, out_dir: &Path, threads: Option<usize>) -> Result<RunOutput> {
    config.validate().map_err(Error::Validation)?;
    let threads = threads.or(config.threads);
    let (tables, summary) = match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::invalid("threads", e.to_string()))?
            .install(|| compute(config))?,
        None => compute(config)?,
    };
    fs::create_dir_all(out_dir)?;
    let hash = config.hash();
    let mut files = BTreeMap::new();
    for t in &tables {
        let meta = json!({
            "experiment": config.experiment.kind(),
            "family": config.model.family(),
            "seed": config.seed,
            "realizations": config.realizations,
            "config_sha256": hash,
            "columns": t.columns,
        });
        let mut buf = format!("# {meta}\n").into_bytes();
        {
            let mut w = csv::Writer::from_writer(&mut buf);
            w.write_record(&t.columns)?;
            for row in &t.rows {
                w.write_record(row.iter().map(Cell::render))?;
            }
            w.flush()?;
        }
        files.insert(t.name.to_string(), write_file(out_dir, t.name, &buf)?);
    }
    let summary = json!({
        "experiment": config.experiment.kind(),
        "family": config.model.family(),
        "seed": config.seed,
        "realizations": config.realizations,
        "result": summary,
    });
    let text = serde_json::to_string_pretty(&summary)? + "\n";
    files.insert("summary.json".into(), write_file(out_dir, "summary.json", text.as_bytes())?);
    let manifest = json!({
        "experiment": config.experiment.kind(),
        "config": config.canonical(),
        "config_sha256": hash,
        "seed": config.seed,
        "version": VERSION,
        "files": files,
    });
    write_file(out_dir, "manifest.json", (serde_json::to_string_pretty(&manifest)? + "\n").as_bytes())?;
    let mut names: Vec<String> = files.keys().cloned().collect();
    names.push("manifest.json".into());
    Ok(RunOutput {
        dir: out_dir.to_path_buf(),
        files: names,
        summary,
    })
}

fn write_file(dir: &Path, name: &str, bytes: &[u8]) -> Result<String> {
    fs::write(dir.join(name), bytes)?;
    Ok(hex::encode(Sha256::digest(bytes)))
}

fn decay_rows(rows: &[crate::dynamics::DecayRow]) -> Vec<Vec<Cell>> {
    rows.iter()
        .map(|r| vec![int(r.distance), real(r.mean), real(r.stderr), int(r.realizations)])
        .collect()
}

const DECAY_COLUMNS: [&str; 4] = ["distance", "mean", "stderr", "realizations"];

/// Predicted spectrum `(d, t, β)` for the Anderson families.
fn prediction(model: &ModelSpec) -> Option<(usize, f64, f64)> {
    match model {
        ModelSpec::Band1d { t, phases, .. } => Some((1, *t, phases.beta().ok()?)),
        ModelSpec::AndersonD { t, d, phases, .. } => Some((*d, *t, phases.beta().ok()?)),
        _ => None,
    }
}

fn compute(cfg: &ExperimentConfig) -> Result<(Vec<Table>, Value)> {
    let model = &cfg.model;
    let seed = cfg.seed;
    let rz = cfg.realizations;
    match &cfg.experiment {
        Experiment::Spectrum {} => {
            let spectra: Vec<Vec<C64>> = (0..rz as u64)
                .into_par_iter()
                .map(|r| {
                    let mut ev = eigenvalues_finite(&model.sample(seed, r)?)?;
                    ev.sort_by(|a, b| a.arg().total_cmp(&b.arg()).then(a.norm().total_cmp(&b.norm())));
                    Ok(ev)
                })
                .collect::<Result<_>>()?;
            let mut rows = Vec::new();
            for (r, ev) in spectra.iter().enumerate() {
                for (i, z) in ev.iter().enumerate() {
                    rows.push(vec![int(r), int(i), real(z.re), real(z.im), real(z.arg())]);
                }
            }
            let tol = TAU / model.dim() as f64;
            let mut summary = json!({ "eigenvalues": rows.len(), "margin": tol });
            if let Some((d, t, beta)) = prediction(model) {
                let s = almost_sure_spectrum(t, d, beta)?;
                let all = spectra.iter().flatten();
                let outside = all.clone().filter(|z| !s.sigma.contains(z.arg(), tol)).count();
                let in_gap = s
                    .gap
                    .map_or(0, |g| all.clone().filter(|z| g.contains_inner(z.arg(), tol)).count());
                let strictly_inside = all.filter(|z| s.sigma.contains(z.arg(), 0.0)).count();
                summary["prediction"] = json!({
                    "sigma": s.sigma,
                    "gap": s.gap,
                    "band_edges": s.band_edges,
                    "lambda0": lambda0(t)?,
                });
                summary["containment"] = json!({
                    "outside_sigma": outside,
                    "inside_gap": in_gap,
                    "strictly_inside_fraction": strictly_inside as f64 / rows.len().max(1) as f64,
                    "contained": outside == 0 && in_gap == 0,
                });
            }
            let table = Table {
                name: "eigenvalues.csv",
                columns: vec!["realization", "index", "re", "im", "arg"],
                rows,
            };
            Ok((vec![table], summary))
        }
        Experiment::EvolveMoments { p, n_max } => {
            let probes = moment_boundedness_probe(model, seed, *p, *n_max, rz)?;
            let rows = (0..=*n_max)
                .map(|n| {
                    let v: Vec<f64> = probes.iter().map(|q| q.series.values[n]).collect();
                    vec![int(n), real(mean(&v)), real(batch_stderr(&v)), int(rz)]
                })
                .collect();
            let sat: Vec<f64> = probes.iter().map(|q| q.saturation).collect();
            let peak: Vec<f64> = probes.iter().map(|q| q.running_max[*n_max]).collect();
            let summary = json!({
                "p": p,
                "n_max": n_max,
                "saturation_mean": mean(&sat),
                "saturation_min": sat.iter().cloned().fold(f64::INFINITY, f64::min),
                "running_max_mean": mean(&peak),
                "boundary_mass_max": probes.iter().map(|q| q.boundary_mass).fold(0.0, f64::max),
            });
            let table = Table {
                name: "moments.csv",
                columns: vec!["n", "mean", "stderr", "realizations"],
                rows,
            };
            Ok((vec![table], summary))
        }
        Experiment::KernelDecay { distances, n_max, arc } => {
            let arc = arc.map(arc_of).transpose()?;
            let k = kernel_decay(model, seed, distances, *n_max, rz, arc.as_ref())?;
            let summary = json!({
                "fit": k.fit,
                "converged_fraction": k.converged_fraction,
                "empty_arc": k.empty_arc,
                "n_max": n_max,
                "arc": arc,
            });
            let table = Table {
                name: "kernel_decay.csv",
                columns: DECAY_COLUMNS.to_vec(),
                rows: decay_rows(&k.rows),
            };
            Ok((vec![table], summary))
        }
        Experiment::FmScan { s, z_grid, distances } => {
            let zs: Vec<C64> = z_grid.iter().map(|p| z_of(*p)).collect();
            let fm = fm_decay_scan(model, seed, *s, &zs, distances, rz)?;
            let mut rows = Vec::new();
            for zr in &fm.per_z {
                for r in &zr.rows {
                    rows.push(vec![
                        real(*s),
                        real(zr.z.norm()),
                        real(zr.z.arg()),
                        int(r.distance),
                        real(r.mean),
                        real(r.stderr),
                        int(r.realizations),
                    ]);
                }
            }
            let window: Vec<usize> = distances.iter().copied().filter(|&d| d >= crate::dynamics::NEAR_FIELD).collect();
            let summary = json!({
                "alpha": fm.fit.alpha,
                "C": fm.fit.c,
                "r_squared": fm.fit.r_squared,
                "degenerate": fm.fit.degenerate,
                "window": [window.iter().min(), window.iter().max()],
                "s": s,
            });
            let scan = Table {
                name: "fm_scan.csv",
                columns: vec!["s", "abs_z", "arg_z", "distance", "mean", "stderr", "realizations"],
                rows,
            };
            let avg = Table {
                name: "fm_scan_average.csv",
                columns: DECAY_COLUMNS.to_vec(),
                rows: decay_rows(&fm.averaged),
            };
            Ok((vec![scan, avg], summary))
        }
        Experiment::LyapunovScan { z_grid, steps } => {
            let zs: Vec<C64> = z_grid.iter().map(|p| z_of(*p)).collect();
            let g = gamma_scan(model, seed, &zs, *steps, rz)?;
            let rows = g
                .rows
                .iter()
                .map(|e| vec![real(e.z.re), real(e.z.im), real(e.gamma), real(e.stderr), int(e.steps), int(e.realizations)])
                .collect();
            let min_sigma = g
                .rows
                .iter()
                .map(|e| if e.stderr > 0.0 { e.gamma / e.stderr } else { f64::INFINITY })
                .fold(f64::INFINITY, f64::min);
            let summary = json!({
                "max_adjacent_jump": g.max_adjacent_jump,
                "discontinuities": g.discontinuities,
                "min_gamma_over_stderr": if min_sigma.is_finite() { Some(min_sigma) } else { None },
            });
            let table = Table {
                name: "gamma.csv",
                columns: vec!["re_z", "im_z", "gamma", "stderr", "steps", "realizations"],
                rows,
            };
            Ok((vec![table], summary))
        }
        Experiment::BandEdge { gamma_width, n_max, bins, distances } => {
            let (d, t, beta) = prediction(model).expect("validated");
            let edge = d as f64 * lambda0(t)? + beta;
            let lo = edge - gamma_width;
            let arc = Arc::from_endpoints(lo, edge)?;
            let counts: Vec<Vec<f64>> = (0..rz as u64)
                .into_par_iter()
                .map(|r| {
                    let eig = eig_finite(&model.sample(seed, r)?)?;
                    let mut c = vec![0.0; *bins];
                    for z in &eig.values {
                        let a = z.arg();
                        if a >= lo && a <= edge {
                            let b = (((a - lo) / gamma_width) * *bins as f64) as usize;
                            c[b.min(bins - 1)] += 1.0;
                        }
                    }
                    Ok(c)
                })
                .collect::<Result<_>>()?;
            let width = gamma_width / *bins as f64;
            let hist = (0..*bins)
                .map(|b| {
                    let v: Vec<f64> = counts.iter().map(|c| c[b]).collect();
                    vec![real(lo + b as f64 * width), real(lo + (b + 1) as f64 * width), real(mean(&v)), real(batch_stderr(&v)), int(rz)]
                })
                .collect();
            let ds: Vec<usize> = match distances {
                Some(ds) => ds.clone(),
                None => {
                    let labels = model.basis_labels()?;
                    let dmax = labels.iter().map(|l| model.distance(l)).max().unwrap_or(0);
                    (1..=dmax).collect()
                }
            };
            let k = kernel_decay(model, seed, &ds, *n_max, rz, Some(&arc))?;
            let total: f64 = counts.iter().flatten().sum::<f64>() / rz as f64;
            let summary = json!({
                "band_edge": edge,
                "window": [lo, edge],
                "eigenvalues_in_window": total,
                "fit": k.fit,
                "converged_fraction": k.converged_fraction,
                "empty_arc": k.empty_arc,
            });
            let h = Table {
                name: "band_edge_counts.csv",
                columns: vec!["arg_lo", "arg_hi", "mean", "stderr", "realizations"],
                rows: hist,
            };
            let kt = Table {
                name: "band_edge_kernel.csv",
                columns: DECAY_COLUMNS.to_vec(),
                rows: decay_rows(&k.rows),
            };
            Ok((vec![h, kt], summary))
        }
        Experiment::Ballistic { n_max } => {
            let u = model.sample(seed, 0)?;
            let mut psi = vec![C64::new(0.0, 0.0); u.dim()];
            psi[model.origin_index()] = C64::new(1.0, 0.0);
            let b = ballistic_coefficient(&u, &psi, *n_max)?;
            let rows = b
                .series
                .times
                .iter()
                .zip(&b.series.values)
                .map(|(&n, &v)| vec![int(n as usize), real(v)])
                .collect();
            let summary = json!({
                "B": b.b,
                "intercept": b.intercept,
                "r_squared": b.r_squared,
                "running_max": b.running_max,
                "n_max": n_max,
            });
            let table = Table {
                name: "ballistic.csv",
                columns: vec!["n", "x2"],
                rows,
            };
            Ok((vec![table], summary))
        }
    }
}

/// A parsed artifact table.
#[derive(Clone, Debug, PartialEq)]
pub struct CsvTable {
    pub metadata: Value,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

/// Reads a CSV written by [`run`], including its metadata line.
pub fn read_table(path: impl AsRef<Path>) -> Result<CsvTable> {
    let text = fs::read_to_string(path)?;
    let (first, rest) = text.split_once('\n').unwrap_or((&text, ""));
    let meta = first
        .strip_prefix("# ")
        .ok_or_else(|| Error::invalid("csv", "missing metadata line"))?;
    let metadata: Value = serde_json::from_str(meta)?;
    let mut rdr = csv::Reader::from_reader(rest.as_bytes());
    let columns = rdr.headers()?.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        rows.push(
            rec.iter()
                .map(|s| s.parse::<f64>().map_err(|_| Error::invalid("csv", format!("not a number: {s}"))))
                .collect::<Result<_>>()?,
        );
    }
    Ok(CsvTable {
        metadata,
        columns,
        rows,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ColumnDiff {
    pub column: String,
    pub max_abs_deviation: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct FileDiff {
    pub file: String,
    pub byte_identical: bool,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub columns: Vec<ColumnDiff>,
    /// Largest `|Δmean| / √(stderr_a² + stderr_b²)` over the rows.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_mean_z: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CompareReport {
    pub experiment: String,
    pub byte_identical: bool,
    /// Every mean column agrees within 3 combined error bars.
    pub within_3_sigma: bool,
    pub files: Vec<FileDiff>,
}

fn manifest(dir: &Path) -> Result<Value> {
    Ok(serde_json::from_str(&fs::read_to_string(dir.join("manifest.json"))?)?)
}

/// Compares two artifact directories of the same experiment kind.
pub fn compare(a: &Path, b: &Path) -> Result<CompareReport> {
    let (ma, mb) = (manifest(a)?, manifest(b)?);
    let (ka, kb) = (&ma["experiment"], &mb["experiment"]);
    if ka != kb {
        return Err(Error::Mismatch(format!("experiment kinds differ: {ka} vs {kb}")));
    }
    let names = |m: &Value| -> BTreeSet<String> {
        m["files"].as_object().map(|o| o.keys().cloned().collect()).unwrap_or_default()
    };
    let mut all = names(&ma);
    all.extend(names(&mb));
    all.insert("manifest.json".into());
    let mut files = Vec::new();
    let mut within = true;
    for name in all {
        let (pa, pb) = (a.join(&name), b.join(&name));
        if !pa.exists() || !pb.exists() {
            return Err(Error::Mismatch(format!("{name} is missing from one side")));
        }
        let identical = fs::read(&pa)? == fs::read(&pb)?;
        let mut diff = FileDiff {
            file: name.clone(),
            byte_identical: identical,
            columns: Vec::new(),
            max_mean_z: None,
        };
        if name.ends_with(".csv") {
            let (ta, tb) = (read_table(&pa)?, read_table(&pb)?);
            if ta.columns != tb.columns || ta.rows.len() != tb.rows.len() {
                return Err(Error::Mismatch(format!("{name} has different shapes")));
            }
            for (c, col) in ta.columns.iter().enumerate() {
                let dev = ta
                    .rows
                    .iter()
                    .zip(&tb.rows)
                    .map(|(x, y)| (x[c] - y[c]).abs())
                    .fold(0.0, f64::max);
                diff.columns.push(ColumnDiff {
                    column: col.clone(),
                    max_abs_deviation: dev,
                });
            }
            let pos = |n: &str| ta.columns.iter().position(|c| c == n);
            if let (Some(m), Some(s)) = (pos("mean"), pos("stderr")) {
                let z = ta
                    .rows
                    .iter()
                    .zip(&tb.rows)
                    .map(|(x, y)| {
                        let d = (x[m] - y[m]).abs();
                        let e = x[s].hypot(y[s]);
                        if d == 0.0 {
                            0.0
                        } else if e > 0.0 {
                            d / e
                        } else {
                            f64::INFINITY
                        }
                    })
                    .fold(0.0, f64::max);
                within &= z <= 3.0;
                diff.max_mean_z = Some(z);
            }
        }
        files.push(diff);
    }
    Ok(CompareReport {
        experiment: ka.as_str().unwrap_or_default().to_string(),
        byte_identical: files.iter().all(|f| f.byte_identical),
        within_3_sigma: within,
        files,
    })
}
