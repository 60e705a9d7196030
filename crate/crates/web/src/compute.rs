//! Plain-Rust bodies of the exported functions, testable off the browser.

use disentangle::fock::{cat_state, coherent_state, husimi_q, observables};
use disentangle::kerr_finite_t::{propagate_kerr_finite_t, KerrFiniteTParams};
use disentangle::kerr_zero_t::{propagate_kerr_zero_t, KerrZeroTParams};
use disentangle::pdc::{PdcParams, PdcPropagator, TransformedEvolution};
use disentangle::{DensityMatrix, FockSpace, C64};

/// Largest truncation the page will ask for; dense PDC transforms grow as `N⁴`.
pub const MAX_DIM: usize = 40;

fn space(dim: usize) -> Result<FockSpace, String> {
    if dim > MAX_DIM {
        return Err(format!("dim {dim} exceeds the demo limit {MAX_DIM}"));
    }
    FockSpace::new(dim).map_err(|e| e.to_string())
}

fn sample_times(t_max: f64, samples: usize) -> Result<Vec<f64>, String> {
    if !(t_max.is_finite() && t_max >= 0.0) || samples < 2 {
        return Err("need a finite t_max >= 0 and at least two samples".into());
    }
    Ok((0..samples).map(|i| t_max * i as f64 / (samples - 1) as f64).collect())
}

/// Q of an even cat `|α⟩ + |−α⟩` evolved under damped Kerr to time `t`,
/// sampled on a `points × points` square of half-width `extent`, row-major
/// with the imaginary axis outer.
pub fn cat_q_grid(
    alpha: f64,
    chi: f64,
    gamma_minus: f64,
    t: f64,
    dim: usize,
    extent: f64,
    points: usize,
) -> Result<Vec<f64>, String> {
    let s = space(dim)?;
    if points < 2 || !(extent > 0.0) {
        return Err("grid needs at least two points and a positive extent".into());
    }
    let params = KerrZeroTParams::new(chi, gamma_minus).map_err(|e| e.to_string())?;
    let rho0 = DensityMatrix::from_ket(&cat_state(s, C64::new(alpha, 0.0), 0.0));
    let rho = propagate_kerr_zero_t(&rho0, t, &params).map_err(|e| e.to_string())?;
    let step = 2.0 * extent / (points - 1) as f64;
    let axis: Vec<f64> = (0..points).map(|i| -extent + step * i as f64).collect();
    let grid: Vec<C64> = axis
        .iter()
        .flat_map(|&y| axis.iter().map(move |&x| C64::new(x, y)))
        .collect();
    Ok(husimi_q(&rho, &grid))
}

/// `[t, ⟨n⟩, purity]` triples, flattened, for a coherent state in a thermal bath.
pub fn thermal_curves(
    chi: f64,
    gamma_minus: f64,
    gamma_plus: f64,
    alpha: f64,
    dim: usize,
    t_max: f64,
    samples: usize,
) -> Result<Vec<f64>, String> {
    let s = space(dim)?;
    let params = KerrFiniteTParams::new(chi, gamma_minus, gamma_plus).map_err(|e| e.to_string())?;
    let rho0 = DensityMatrix::from_ket(&coherent_state(s, C64::new(alpha, 0.0)));
    let mut out = Vec::with_capacity(3 * samples);
    for t in sample_times(t_max, samples)? {
        let o = observables(&propagate_kerr_finite_t(&rho0, t, &params).map_err(|e| e.to_string())?);
        out.extend([t, o.mean_n, o.purity]);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PdcCurves {
    /// `[t, ⟨n⟩, purity]` triples, flattened.
    pub rows: Vec<f64>,
    pub condition_number: f64,
}

/// Vacuum pumped by a classical field `ε` with loss rate `γ`.
pub fn pdc_curves(
    epsilon_re: f64,
    epsilon_im: f64,
    gamma: f64,
    dim: usize,
    t_max: f64,
    samples: usize,
) -> Result<PdcCurves, String> {
    let s = space(dim)?;
    let params = PdcParams::new(C64::new(epsilon_re, epsilon_im), gamma, true).map_err(|e| e.to_string())?;
    let prop = PdcPropagator::new(s, params, TransformedEvolution::Conjugated).map_err(|e| e.to_string())?;
    let rho0 = DensityMatrix::vacuum(s);
    let mut rows = Vec::with_capacity(3 * samples);
    for t in sample_times(t_max, samples)? {
        let o = observables(&prop.propagate(&rho0, t).map_err(|e| e.to_string())?);
        rows.extend([t, o.mean_n, o.purity]);
    }
    Ok(PdcCurves {
        rows,
        condition_number: prop.condition_number(),
    })
}
