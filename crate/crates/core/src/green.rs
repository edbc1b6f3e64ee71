//! Green-function samples and fractional-moment estimates.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arc::Arc;
use crate::band::ComplexBandMatrix;
use crate::disorder::sample_with;
use crate::dynamics::{kernel_decay, shells, DecayRow, KernelDecay, NEAR_FIELD};
use crate::error::{Error, Result};
use crate::models::ModelSpec;
use crate::solve::{check_off_circle, resolvent_column};
use crate::stats::{batch_stderr, exp_decay_fit, mean, DecayFit};
use crate::C64;

/// Default fractional power.
pub const DEFAULT_S: f64 = 0.5;

/// Minimum number of distances in a decay scan.
pub const MIN_DISTANCES: usize = 5;

/// `G(k, l; z) = ⟨e_k, (U - z)^{-1} e_l⟩`.
pub fn green(u: &ComplexBandMatrix, k: usize, l: usize, z: C64) -> Result<C64> {
    if k >= u.dim() {
        return Err(Error::IndexOutOfRange { index: k, dim: u.dim() });
    }
    Ok(resolvent_column(u, z, l)?[k])
}

/// Monte Carlo estimate of `E|G(k, l; z)|^s`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FmEstimate {
    pub s: f64,
    pub z: C64,
    pub k: usize,
    pub l: usize,
    pub mean: f64,
    pub stderr: f64,
    pub realizations: usize,
}

fn check_s(s: f64) -> Result<()> {
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::invalid("s", format!("{s} is not in (0, 1)")));
    }
    Ok(())
}

fn check_index(i: usize, dim: usize) -> Result<()> {
    if i >= dim {
        return Err(Error::IndexOutOfRange { index: i, dim });
    }
    Ok(())
}

fn estimate(s: f64, z: C64, k: usize, l: usize, samples: &[f64]) -> FmEstimate {
    FmEstimate {
        s,
        z,
        k,
        l,
        mean: mean(samples),
        stderr: batch_stderr(samples),
        realizations: samples.len(),
    }
}

/// `E|G(k, l; z)|^s` over realizations `0..realizations` of the ensemble.
pub fn fractional_moment_mc(
    model: &ModelSpec,
    master_seed: u64,
    s: f64,
    z: C64,
    k: usize,
    l: usize,
    realizations: usize,
) -> Result<FmEstimate> {
    check_s(s)?;
    check_off_circle(z)?;
    check_index(k, model.dim())?;
    check_index(l, model.dim())?;
    let samples: Vec<f64> = (0..realizations as u64)
        .into_par_iter()
        .map(|r| {
            let u = model.sample(master_seed, r)?;
            Ok(resolvent_column(&u, z, l)?[k].norm().powf(s))
        })
        .collect::<Result<_>>()?;
    Ok(estimate(s, z, k, l, &samples))
}

/// `∫∫ |G(k, l; z)|^s dν(θ_k) dν(θ_l)` by Monte Carlo with every other phase
/// held at `background`. Requires a family whose phases sit on the rows of
/// the operator (everything except the quantum walk).
pub fn conditional_fm_mc(
    model: &ModelSpec,
    background: &[f64],
    master_seed: u64,
    s: f64,
    z: C64,
    k: usize,
    l: usize,
    realizations: usize,
) -> Result<FmEstimate> {
    check_s(s)?;
    check_off_circle(z)?;
    let labels = model.phase_labels()?;
    if labels.len() != model.dim() {
        return Err(Error::invalid("model", "phases do not sit on the rows of this family"));
    }
    if background.len() != labels.len() {
        return Err(Error::DimensionMismatch { expected: labels.len(), got: background.len() });
    }
    check_index(k, labels.len())?;
    check_index(l, labels.len())?;
    let dist = model
        .phase_distribution()
        .ok_or_else(|| Error::invalid("model", "no random phases"))?;
    let sampler = dist.sampler()?;
    let pair = [labels[k].clone(), labels[l].clone()];
    let samples: Vec<f64> = (0..realizations as u64)
        .into_par_iter()
        .map(|r| {
            let drawn = sample_with(&sampler, master_seed, r, &pair).phases;
            let mut ph = background.to_vec();
            ph[k] = drawn[0];
            ph[l] = drawn[1];
            let u = model.build_with_phases(&ph)?;
            Ok(resolvent_column(&u, z, l)?[k].norm().powf(s))
        })
        .collect::<Result<_>>()?;
    Ok(estimate(s, z, k, l, &samples))
}

/// `E|G(k, l; z)|^s` along `|z| = 1 - 2^{-m}`, `m = 1..=m_max`, at fixed
/// `arg z`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RadialScan {
    pub rows: Vec<FmEstimate>,
    /// `max mean / min mean` over the scan.
    pub spread: f64,
    /// Means strictly increase at every step.
    pub monotone_increase: bool,
}

pub fn dyadic_radii(m_max: u32) -> Vec<f64> {
    (1..=m_max).map(|m| 1.0 - 0.5f64.powi(m as i32)).collect()
}

pub fn fm_radial_scan(
    model: &ModelSpec,
    master_seed: u64,
    s: f64,
    arg: f64,
    radii: &[f64],
    k: usize,
    l: usize,
    realizations: usize,
) -> Result<RadialScan> {
    let rows = radii
        .iter()
        .map(|&rad| fractional_moment_mc(model, master_seed, s, C64::from_polar(rad, arg), k, l, realizations))
        .collect::<Result<Vec<_>>>()?;
    let max = rows.iter().map(|r| r.mean).fold(f64::NEG_INFINITY, f64::max);
    let min = rows.iter().map(|r| r.mean).fold(f64::INFINITY, f64::min);
    Ok(RadialScan {
        spread: if min > 0.0 { max / min } else { f64::INFINITY },
        monotone_increase: rows.windows(2).all(|w| w[1].mean > w[0].mean),
        rows,
    })
}

/// Decay table of one spectral parameter.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FmDecayRow {
    pub z: C64,
    pub rows: Vec<DecayRow>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FmDecay {
    pub s: f64,
    pub per_z: Vec<FmDecayRow>,
    /// Means averaged over the `z` samples.
    pub averaged: Vec<DecayRow>,
    /// Fit of the averaged table over distances `≥ NEAR_FIELD`.
    pub fit: DecayFit,
}

/// `E|G(j, o; z)|^s` averaged over the shells `dist(j, o) = d` around the
/// origin `o`, for each `z`, with a log-linear fit of the `z`-average.
pub fn fm_decay_scan(
    model: &ModelSpec,
    master_seed: u64,
    s: f64,
    zs: &[C64],
    distances: &[usize],
    realizations: usize,
) -> Result<FmDecay> {
    check_s(s)?;
    if zs.is_empty() {
        return Err(Error::invalid("z", "no spectral parameters given"));
    }
    for &z in zs {
        check_off_circle(z)?;
    }
    let fitted = distances.iter().filter(|&&d| d >= NEAR_FIELD).count();
    if fitted < MIN_DISTANCES {
        return Err(Error::invalid(
            "distances",
            format!("{fitted} distances ≥ {NEAR_FIELD}; need at least {MIN_DISTANCES}"),
        ));
    }
    let sh = shells(model, distances)?;
    let o = model.origin_index();
    // [realization][z][distance]
    let runs: Vec<Vec<Vec<f64>>> = (0..realizations as u64)
        .into_par_iter()
        .map(|r| {
            let u = model.sample(master_seed, r)?;
            zs.iter()
                .map(|&z| {
                    let g = resolvent_column(&u, z, o)?;
                    Ok(sh
                        .iter()
                        .map(|rows| rows.iter().map(|&j| g[j].norm().powf(s)).sum::<f64>() / rows.len() as f64)
                        .collect())
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let per_z: Vec<FmDecayRow> = zs
        .iter()
        .enumerate()
        .map(|(iz, &z)| FmDecayRow {
            z,
            rows: distances
                .iter()
                .enumerate()
                .map(|(id, &d)| {
                    let v: Vec<f64> = runs.iter().map(|r| r[iz][id]).collect();
                    DecayRow {
                        distance: d,
                        mean: mean(&v),
                        stderr: batch_stderr(&v),
                        realizations,
                    }
                })
                .collect(),
        })
        .collect();
    let averaged: Vec<DecayRow> = distances
        .iter()
        .enumerate()
        .map(|(id, &d)| {
            let v: Vec<f64> = runs.iter().map(|r| mean(&r.iter().map(|x| x[id]).collect::<Vec<_>>())).collect();
            DecayRow {
                distance: d,
                mean: mean(&v),
                stderr: batch_stderr(&v),
                realizations,
            }
        })
        .collect();
    let (xs, ys): (Vec<f64>, Vec<f64>) = averaged
        .iter()
        .filter(|r| r.distance >= NEAR_FIELD)
        .map(|r| (r.distance as f64, r.mean))
        .unzip();
    Ok(FmDecay {
        s,
        fit: exp_decay_fit(&xs, &ys),
        per_z,
        averaged,
    })
}

/// Both sides of `E[(1-|z|²)|G(k,l)|²] ≤ C Σ_{|m-k| ≤ 4} E|G(m,l)|^s`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SecondMoment {
    pub s: f64,
    pub z: C64,
    pub k: usize,
    pub l: usize,
    pub lhs: f64,
    pub lhs_stderr: f64,
    pub rhs: f64,
    pub rhs_stderr: f64,
    /// `lhs / rhs`, or 0 when both vanish.
    pub ratio: f64,
    pub realizations: usize,
}

/// Rows `m` with `|m - k| ≤ 4`, wrapping on periodic operators.
fn neighbourhood(u: &ComplexBandMatrix, k: usize) -> Vec<usize> {
    let n = u.dim() as i64;
    let mut out: Vec<usize> = (k as i64 - 4..=k as i64 + 4)
        .filter_map(|m| {
            if u.is_periodic() {
                Some(m.rem_euclid(n) as usize)
            } else {
                (0..n).contains(&m).then_some(m as usize)
            }
        })
        .collect();
    out.sort_unstable();
    out.dedup();
    out
}

pub fn second_moment_check(
    model: &ModelSpec,
    master_seed: u64,
    s: f64,
    z: C64,
    k: usize,
    l: usize,
    realizations: usize,
) -> Result<SecondMoment> {
    check_s(s)?;
    if !(z.norm() < 1.0) {
        return Err(Error::invalid("z", format!("|z| = {} is not below 1", z.norm())));
    }
    check_index(k, model.dim())?;
    check_index(l, model.dim())?;
    let w = 1.0 - z.norm_sqr();
    let pairs: Vec<(f64, f64)> = (0..realizations as u64)
        .into_par_iter()
        .map(|r| {
            let u = model.sample(master_seed, r)?;
            let g = resolvent_column(&u, z, l)?;
            let rhs = neighbourhood(&u, k).iter().map(|&m| g[m].norm().powf(s)).sum();
            Ok((w * g[k].norm_sqr(), rhs))
        })
        .collect::<Result<_>>()?;
    let (lv, rv): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    let (lhs, rhs) = (mean(&lv), mean(&rv));
    Ok(SecondMoment {
        s,
        z,
        k,
        l,
        lhs,
        lhs_stderr: batch_stderr(&lv),
        rhs,
        rhs_stderr: batch_stderr(&rv),
        ratio: if rhs > 0.0 { lhs / rhs } else { 0.0 },
        realizations,
    })
}

/// Cross-check of a fractional-moment decay rate against the decay of the
/// projected dynamical kernel.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DynlocReport {
    /// False when the fractional-moment fit does not show localization, in
    /// which case no kernel run is made.
    pub applicable: bool,
    pub alpha_fm: f64,
    /// `alpha_fm / 4 - 0.05`.
    pub threshold: f64,
    pub kernel: Option<KernelDecay>,
    pub kernel_alpha: f64,
    pub consistent: bool,
}

/// Slack subtracted from `α_FM / 4`.
pub const DYNLOC_SLACK: f64 = 0.05;

pub fn dynloc_from_fm(
    model: &ModelSpec,
    master_seed: u64,
    arc: &Arc,
    fm: &DecayFit,
    distances: &[usize],
    n_max: usize,
    realizations: usize,
) -> Result<DynlocReport> {
    let threshold = fm.alpha / 4.0 - DYNLOC_SLACK;
    if fm.degenerate || fm.alpha <= 0.01 || fm.r_squared < 0.9 {
        return Ok(DynlocReport {
            applicable: false,
            alpha_fm: fm.alpha,
            threshold,
            kernel: None,
            kernel_alpha: 0.0,
            consistent: false,
        });
    }
    let k = kernel_decay(model, master_seed, distances, n_max, realizations, Some(arc))?;
    let all_empty = k.empty_arc == realizations;
    let kernel_alpha = if all_empty { 0.0 } else { k.fit.alpha };
    Ok(DynlocReport {
        applicable: true,
        alpha_fm: fm.alpha,
        threshold,
        consistent: all_empty || (!k.fit.degenerate && kernel_alpha >= threshold),
        kernel_alpha,
        kernel: Some(k),
    })
}
