//! Time evolution, position moments and kernel-decay diagnostics.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arc::Arc;
use crate::band::{ComplexBandMatrix, SiteLabel};
use crate::error::{Error, Result};
use crate::models::{ModelSpec, NormKind};
use crate::spectral::{eig_finite, projector_from_eig};
use crate::stats::{batch_stderr, exp_decay_fit, linear_fit, mean, DecayFit};
use crate::C64;

/// Boundary mass above which a moment run is rejected.
pub const BOUNDARY_MASS_TOL: f64 = 1e-8;

/// Distances below this are left out of decay fits.
pub const NEAR_FIELD: usize = 4;

/// `⟨|X|^p⟩` as a function of time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentSeries {
    pub times: Vec<u64>,
    pub values: Vec<f64>,
    pub order: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub master_seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub realization_index: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub arc: Option<Arc>,
}

fn norm(v: &[C64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

fn unit(dim: usize, k: usize) -> Vec<C64> {
    let mut e = vec![C64::new(0.0, 0.0); dim];
    e[k] = C64::new(1.0, 0.0);
    e
}

/// `U^n ψ0`; negative `n` steps with `U*`.
pub fn evolve(u: &ComplexBandMatrix, psi0: &[C64], n: i64) -> Result<Vec<C64>> {
    if psi0.len() != u.dim() {
        return Err(Error::DimensionMismatch { expected: u.dim(), got: psi0.len() });
    }
    let nr = norm(psi0);
    if (nr - 1.0).abs() > 1e-12 {
        return Err(Error::invalid("psi0", format!("norm {nr} is not 1")));
    }
    let adj;
    let op = if n < 0 {
        adj = u.adjoint();
        &adj
    } else {
        u
    };
    let mut a = psi0.to_vec();
    let mut b = vec![C64::new(0.0, 0.0); a.len()];
    for _ in 0..n.unsigned_abs() {
        op.matvec_into(&a, &mut b)?;
        std::mem::swap(&mut a, &mut b);
    }
    Ok(a)
}

/// `Σ_k |ψ_k|² |label(k)|^p`.
pub fn position_moment(psi: &[C64], labels: &[SiteLabel], p: f64, kind: NormKind) -> Result<f64> {
    if !(p > 0.0) {
        return Err(Error::invalid("p", format!("{p} must be positive")));
    }
    if labels.len() != psi.len() {
        return Err(Error::DimensionMismatch { expected: psi.len(), got: labels.len() });
    }
    Ok(psi
        .iter()
        .zip(labels)
        .map(|(x, l)| x.norm_sqr() * kind.of(l).powf(p))
        .sum())
}

fn labels_of(u: &ComplexBandMatrix) -> Result<&[SiteLabel]> {
    u.labels().ok_or_else(|| Error::invalid("matrix", "rows carry no lattice labels"))
}

/// `⟨|X|^p⟩(n)` for `n = 0..=n_max`.
pub fn moment_series(u: &ComplexBandMatrix, psi0: &[C64], p: f64, kind: NormKind, n_max: usize) -> Result<MomentSeries> {
    let labels = labels_of(u)?;
    let mut psi = evolve(u, psi0, 0)?;
    let mut next = vec![C64::new(0.0, 0.0); psi.len()];
    let mut values = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        if n > 0 {
            u.matvec_into(&psi, &mut next)?;
            std::mem::swap(&mut psi, &mut next);
        }
        values.push(position_moment(&psi, labels, p, kind)?);
    }
    Ok(MomentSeries {
        times: (0..=n_max as u64).collect(),
        values,
        order: p,
        master_seed: None,
        realization_index: None,
        arc: None,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BallisticFit {
    /// Slope of `⟨X²⟩` against `n²` over the second half of the window.
    pub b: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub rms: f64,
    /// `max_n ⟨X²⟩(n)` over the window.
    pub running_max: f64,
    pub series: MomentSeries,
}

/// Ballistic coefficient `lim ⟨X²⟩(n)/n²` of a translation-invariant walk.
///
/// The volume has to be large enough that the front never wraps; a ring of
/// `2(n_max + 1)` positions suffices at unit speed.
pub fn ballistic_coefficient(u: &ComplexBandMatrix, psi0: &[C64], n_max: usize) -> Result<BallisticFit> {
    if n_max < 100 {
        return Err(Error::invalid("n_max", format!("{n_max} is below 100")));
    }
    let series = moment_series(u, psi0, 2.0, NormKind::WalkPosition, n_max)?;
    let lo = n_max / 2;
    let x: Vec<f64> = (lo..=n_max).map(|n| (n * n) as f64).collect();
    let fit = linear_fit(&x, &series.values[lo..]).expect("window has distinct abscissae");
    Ok(BallisticFit {
        b: fit.slope,
        intercept: fit.intercept,
        r_squared: fit.r_squared,
        rms: fit.rms,
        running_max: series.values.iter().cloned().fold(0.0, f64::max),
        series,
    })
}

/// `sup_{|n| ≤ n_max} |⟨e_j, U^n φ⟩|` for every `j`, and the same over
/// `|n| ≤ n_max/2` for the convergence check.
pub fn sup_profile(u: &ComplexBandMatrix, phi: &[C64], n_max: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let dim = u.dim();
    if phi.len() != dim {
        return Err(Error::DimensionMismatch { expected: dim, got: phi.len() });
    }
    let mut sup: Vec<f64> = phi.iter().map(|x| x.norm()).collect();
    let mut half = sup.clone();
    let adj = u.adjoint();
    for op in [u, &adj] {
        let mut a = phi.to_vec();
        let mut b = vec![C64::new(0.0, 0.0); dim];
        for n in 1..=n_max {
            op.matvec_into(&a, &mut b)?;
            std::mem::swap(&mut a, &mut b);
            let in_half = 2 * n <= n_max;
            for (j, x) in a.iter().enumerate() {
                let m = x.norm();
                if m > sup[j] {
                    sup[j] = m;
                }
                if in_half && m > half[j] {
                    half[j] = m;
                }
            }
        }
    }
    Ok((sup, half))
}

/// Per-realization values with their mean and batch-means error.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KernelSup {
    pub per_realization: Vec<f64>,
    pub mean: f64,
    pub stderr: f64,
    /// Fraction of realizations whose sup moved by at most 1% over the last
    /// doubling of the time window.
    pub converged_fraction: f64,
    /// Realizations where the arc held no eigenvalue (projected runs only).
    pub empty_arc: usize,
}

/// Start vector `P e_k` (or `e_k` for the full circle) of one realization.
fn start_vector(u: &ComplexBandMatrix, k: usize, arc: Option<&Arc>) -> Result<Option<Vec<C64>>> {
    match arc {
        None => Ok(Some(unit(u.dim(), k))),
        Some(a) if a.is_full() => Ok(Some(unit(u.dim(), k))),
        Some(a) => {
            let eig = eig_finite(u)?;
            if !eig.values.iter().any(|z| a.contains(z.arg(), 0.0)) {
                return Ok(None);
            }
            Ok(Some(projector_from_eig(&eig, a).column(k)))
        }
    }
}

fn converged(full: f64, half: f64) -> bool {
    full == 0.0 || (full - half) / full <= 0.01
}

fn kernel_sup_impl(
    model: &ModelSpec,
    master_seed: u64,
    arc: Option<&Arc>,
    j: usize,
    k: usize,
    n_max: usize,
    realizations: usize,
) -> Result<KernelSup> {
    let dim = model.dim();
    for idx in [j, k] {
        if idx >= dim {
            return Err(Error::IndexOutOfRange { index: idx, dim });
        }
    }
    let runs: Vec<(f64, bool, bool)> = (0..realizations as u64)
        .into_par_iter()
        .map(|r| {
            let u = model.sample(master_seed, r)?;
            match start_vector(&u, k, arc)? {
                None => Ok((0.0, true, true)),
                Some(phi) => {
                    let (sup, half) = sup_profile(&u, &phi, n_max)?;
                    Ok((sup[j], converged(sup[j], half[j]), false))
                }
            }
        })
        .collect::<Result<_>>()?;
    let vals: Vec<f64> = runs.iter().map(|r| r.0).collect();
    Ok(KernelSup {
        mean: mean(&vals),
        stderr: batch_stderr(&vals),
        converged_fraction: runs.iter().filter(|r| r.1).count() as f64 / runs.len().max(1) as f64,
        empty_arc: runs.iter().filter(|r| r.2).count(),
        per_realization: vals,
    })
}

/// `sup_{|n| ≤ n_max} |⟨e_j, U_ω^n e_k⟩|` over `realizations` draws.
pub fn kernel_sup(model: &ModelSpec, master_seed: u64, j: usize, k: usize, n_max: usize, realizations: usize) -> Result<KernelSup> {
    kernel_sup_impl(model, master_seed, None, j, k, n_max, realizations)
}

/// As [`kernel_sup`] with the spectral projector of the arc inserted:
/// `sup_n |⟨e_j, U^n P_arc e_k⟩|`. Realizations without spectrum in the arc
/// contribute 0 and are counted in `empty_arc`.
pub fn projected_kernel_sup(
    model: &ModelSpec,
    master_seed: u64,
    arc: &Arc,
    j: usize,
    k: usize,
    n_max: usize,
    realizations: usize,
) -> Result<KernelSup> {
    kernel_sup_impl(model, master_seed, Some(arc), j, k, n_max, realizations)
}

/// One row of a decay table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayRow {
    pub distance: usize,
    pub mean: f64,
    pub stderr: f64,
    pub realizations: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KernelDecay {
    pub rows: Vec<DecayRow>,
    /// Fit over distances `≥ NEAR_FIELD`.
    pub fit: DecayFit,
    pub converged_fraction: f64,
    pub empty_arc: usize,
}

/// Rows of the basis at each requested distance from the origin.
pub fn shells(model: &ModelSpec, distances: &[usize]) -> Result<Vec<Vec<usize>>> {
    let labels = model.basis_labels()?;
    distances
        .iter()
        .map(|&d| {
            let rows: Vec<usize> = (0..labels.len()).filter(|&i| model.distance(&labels[i]) == d).collect();
            if rows.is_empty() {
                Err(Error::invalid("distances", format!("no site at distance {d} in this volume")))
            } else {
                Ok(rows)
            }
        })
        .collect()
}

/// Realization means of `sup_n |⟨e_j, U^n P e_o⟩|` averaged over each shell
/// `{j : dist(j, o) = d}` around the origin `o`, with an exponential fit.
pub fn kernel_decay(
    model: &ModelSpec,
    master_seed: u64,
    distances: &[usize],
    n_max: usize,
    realizations: usize,
    arc: Option<&Arc>,
) -> Result<KernelDecay> {
    let sh = shells(model, distances)?;
    let k = model.origin_index();
    let runs: Vec<(Vec<f64>, Vec<f64>, bool)> = (0..realizations as u64)
        .into_par_iter()
        .map(|r| {
            let u = model.sample(master_seed, r)?;
            match start_vector(&u, k, arc)? {
                None => Ok((vec![0.0; sh.len()], vec![0.0; sh.len()], true)),
                Some(phi) => {
                    let (sup, half) = sup_profile(&u, &phi, n_max)?;
                    let avg = |v: &[f64], rows: &[usize]| rows.iter().map(|&j| v[j]).sum::<f64>() / rows.len() as f64;
                    Ok((
                        sh.iter().map(|rows| avg(&sup, rows)).collect(),
                        sh.iter().map(|rows| avg(&half, rows)).collect(),
                        false,
                    ))
                }
            }
        })
        .collect::<Result<_>>()?;
    let mut rows = Vec::with_capacity(distances.len());
    let mut conv = 0usize;
    for (i, &d) in distances.iter().enumerate() {
        let vals: Vec<f64> = runs.iter().map(|r| r.0[i]).collect();
        let halfs: Vec<f64> = runs.iter().map(|r| r.1[i]).collect();
        let m = mean(&vals);
        if converged(m, mean(&halfs)) {
            conv += 1;
        }
        rows.push(DecayRow {
            distance: d,
            mean: m,
            stderr: batch_stderr(&vals),
            realizations,
        });
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = rows
        .iter()
        .filter(|r| r.distance >= NEAR_FIELD)
        .map(|r| (r.distance as f64, r.mean))
        .unzip();
    Ok(KernelDecay {
        fit: exp_decay_fit(&xs, &ys),
        converged_fraction: conv as f64 / rows.len().max(1) as f64,
        empty_arc: runs.iter().filter(|r| r.2).count(),
        rows,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MomentProbe {
    pub series: MomentSeries,
    pub running_max: Vec<f64>,
    /// Running max at `3 n_max / 4` over the running max at `n_max`.
    pub saturation: f64,
    /// Largest mass seen in the outer shell of the volume.
    pub boundary_mass: f64,
}

/// `⟨|X|^p⟩(n)` from the origin for each realization, with a saturation
/// diagnostic. Fails if the wave packet reaches the outer shell (the two
/// outermost distances) with mass above [`BOUNDARY_MASS_TOL`].
pub fn moment_boundedness_probe(
    model: &ModelSpec,
    master_seed: u64,
    p: f64,
    n_max: usize,
    realizations: usize,
) -> Result<Vec<MomentProbe>> {
    if !(p > 0.0) {
        return Err(Error::invalid("p", format!("{p} must be positive")));
    }
    let labels = model.basis_labels()?;
    let dist: Vec<usize> = labels.iter().map(|l| model.distance(l)).collect();
    let dmax = dist.iter().copied().max().unwrap_or(0);
    let outer: Vec<usize> = (0..labels.len()).filter(|&i| dist[i] + 2 > dmax).collect();
    let kind = model.norm_kind();
    let k = model.origin_index();
    (0..realizations as u64)
        .into_par_iter()
        .map(|r| {
            let u = model.sample(master_seed, r)?;
            let mut psi = unit(u.dim(), k);
            let mut next = vec![C64::new(0.0, 0.0); psi.len()];
            let mut values = Vec::with_capacity(n_max + 1);
            let mut boundary: f64 = 0.0;
            for n in 0..=n_max {
                if n > 0 {
                    u.matvec_into(&psi, &mut next)?;
                    std::mem::swap(&mut psi, &mut next);
                }
                boundary = boundary.max(outer.iter().map(|&i| psi[i].norm_sqr()).sum());
                values.push(position_moment(&psi, &labels, p, kind)?);
            }
            if boundary > BOUNDARY_MASS_TOL {
                return Err(Error::BoundaryContamination(boundary));
            }
            let mut running = Vec::with_capacity(values.len());
            let mut m: f64 = 0.0;
            for &v in &values {
                m = m.max(v);
                running.push(m);
            }
            let last = running[n_max];
            let saturation = if last > 0.0 { running[3 * n_max / 4] / last } else { 1.0 };
            Ok(MomentProbe {
                series: MomentSeries {
                    times: (0..=n_max as u64).collect(),
                    values,
                    order: p,
                    master_seed: Some(master_seed),
                    realization_index: Some(r),
                    arc: None,
                },
                running_max: running,
                saturation,
                boundary_mass: boundary,
            })
        })
        .collect()
}
