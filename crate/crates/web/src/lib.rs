//! wasm-bindgen exports for the static page in `www/`.

use wasm_bindgen::prelude::*;

pub mod compute;

fn js(e: String) -> JsError {
    JsError::new(&e)
}

#[wasm_bindgen]
pub fn cat_q_grid(
    alpha: f64,
    chi: f64,
    gamma_minus: f64,
    t: f64,
    dim: usize,
    extent: f64,
    points: usize,
) -> Result<Vec<f64>, JsError> {
    compute::cat_q_grid(alpha, chi, gamma_minus, t, dim, extent, points).map_err(js)
}

#[wasm_bindgen]
pub fn thermal_curves(
    chi: f64,
    gamma_minus: f64,
    gamma_plus: f64,
    alpha: f64,
    dim: usize,
    t_max: f64,
    samples: usize,
) -> Result<Vec<f64>, JsError> {
    compute::thermal_curves(chi, gamma_minus, gamma_plus, alpha, dim, t_max, samples).map_err(js)
}

/// Rows as in [`thermal_curves`], followed by one trailing value: the
/// condition number of the similarity transform.
#[wasm_bindgen]
pub fn pdc_curves(
    epsilon_re: f64,
    epsilon_im: f64,
    gamma: f64,
    dim: usize,
    t_max: f64,
    samples: usize,
) -> Result<Vec<f64>, JsError> {
    let c = compute::pdc_curves(epsilon_re, epsilon_im, gamma, dim, t_max, samples).map_err(js)?;
    let mut out = c.rows;
    out.push(c.condition_number);
    Ok(out)
}
