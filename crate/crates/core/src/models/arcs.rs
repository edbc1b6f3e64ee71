//! Closed-form spectral predictions for the unitary Anderson model.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::arc::{Arc, ArcSet};
use crate::error::{Error, Result};
use crate::TAU;

/// `λ0 = arccos(1 - 2t²)`.
pub fn lambda0(t: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::invalid("t", format!("{t} is not in [0, 1]")));
    }
    Ok((1.0 - 2.0 * t * t).clamp(-1.0, 1.0).acos())
}

/// `σ(S_d(t)) = {e^{iϑ} : |ϑ| ≤ dλ0}`.
pub fn sd_spectrum_arcs(t: f64, d: usize) -> Result<ArcSet> {
    Ok(ArcSet::single(Arc::symmetric(d as f64 * lambda0(t)?)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlmostSureSpectrum {
    pub sigma: ArcSet,
    /// The open arc `(dλ0 + β, 2π - dλ0 - β)` when `β + dλ0 < π`.
    pub gap: Option<Arc>,
    /// `±(dλ0 + β)` when the gap exists.
    pub band_edges: Option<[f64; 2]>,
}

/// `Σ = {e^{iα} : |α| ≤ dλ0 + β}` for phases supported on `[-β, β]`.
pub fn almost_sure_spectrum(t: f64, d: usize, beta: f64) -> Result<AlmostSureSpectrum> {
    if !(0.0..=PI).contains(&beta) {
        return Err(Error::invalid("beta", format!("{beta} is not in [0, π]")));
    }
    let h = d as f64 * lambda0(t)? + beta;
    let sigma = ArcSet::single(Arc::symmetric(h));
    if h < PI {
        Ok(AlmostSureSpectrum {
            sigma,
            gap: Some(Arc::from_endpoints(h, TAU - h)?),
            band_edges: Some([h, -h]),
        })
    } else {
        Ok(AlmostSureSpectrum {
            sigma,
            gap: None,
            band_edges: None,
        })
    }
}
