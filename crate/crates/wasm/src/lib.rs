//! WebAssembly bindings for a small interactive spinodal-decomposition demo:
//! advance the flow, paint droplets into it, and inspect the double-well
//! potential for different temperatures. The static page lives in `www/`.

mod session;

pub use session::{colormap, minimizer, potential_curve, Readout, Session, SessionParams};
use wasm_bindgen::prelude::*;

fn js(e: hdch::Error) -> JsError {
    JsError::new(&e.to_string())
}

#[wasm_bindgen]
pub struct Demo {
    inner: Session,
}

#[wasm_bindgen]
impl Demo {
    #[wasm_bindgen(constructor)]
    pub fn new(n: usize, theta: f64, nu2: f64, mean: f64, seed: u32) -> Result<Demo, JsError> {
        let params = SessionParams { n, theta, nu2, mean, seed: seed.into(), ..SessionParams::default() };
        Session::new(params).map(|inner| Demo { inner }).map_err(js)
    }

    pub fn size(&self) -> usize {
        self.inner.params().n
    }

    pub fn advance(&mut self, steps: usize) -> Result<(), JsError> {
        self.inner.advance(steps).map_err(js)
    }

    /// Paints a droplet at fractional coordinates `(fx, fy)`, `fy` measured
    /// from the top of the image.
    pub fn paint(&mut self, fx: f64, fy: f64, radius: f64, value: f64) -> Result<(), JsError> {
        let l = self.inner.params().length;
        self.inner.paint(fx * l, (1.0 - fy) * l, radius, value).map_err(js)
    }

    pub fn rgba(&self) -> Vec<u8> {
        self.inner.rgba()
    }

    /// `[t, mass, energy, separation, ‖u‖]`.
    pub fn readout(&self) -> Result<Vec<f64>, JsError> {
        let r = self.inner.readout().map_err(js)?;
        Ok(vec![r.t, r.mass, r.energy, r.separation, r.u_l2])
    }
}

/// Interleaved `[s0, Ψ(s0), s1, Ψ(s1), ...]`.
#[wasm_bindgen(js_name = potentialCurve)]
pub fn potential_curve_js(theta: f64, theta0: f64, samples: usize) -> Result<Vec<f64>, JsError> {
    let curve = potential_curve(theta, theta0, samples).map_err(js)?;
    Ok(curve.into_iter().flat_map(|(s, v)| [s, v]).collect())
}

#[wasm_bindgen(js_name = minimizer)]
pub fn minimizer_js(theta: f64, theta0: f64) -> Result<f64, JsError> {
    minimizer(theta, theta0).map_err(js)
}
