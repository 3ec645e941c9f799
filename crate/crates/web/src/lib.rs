//! WebAssembly bindings for the browser demo in `www/`.

pub mod demo;

use wasm_bindgen::prelude::*;

fn js(e: String) -> JsError {
    JsError::new(&e)
}

#[wasm_bindgen(js_name = maxCoupling)]
pub fn max_coupling() -> f64 {
    demo::max_coupling()
}

#[wasm_bindgen]
pub struct Convergence(demo::ConvergenceData);

#[wasm_bindgen]
impl Convergence {
    #[wasm_bindgen(getter)]
    pub fn gaps(&self) -> Vec<f64> {
        self.0.gaps.clone()
    }
    #[wasm_bindgen(getter = boundMnorm)]
    pub fn bound_mnorm(&self) -> Vec<f64> {
        self.0.bound_mnorm.clone()
    }
    #[wasm_bindgen(getter = boundL2)]
    pub fn bound_l2(&self) -> Vec<f64> {
        self.0.bound_l2.clone()
    }
    #[wasm_bindgen(getter = rateMnorm)]
    pub fn rate_mnorm(&self) -> f64 {
        self.0.rate_mnorm
    }
    #[wasm_bindgen(getter = rateL2)]
    pub fn rate_l2(&self) -> f64 {
        self.0.rate_l2
    }
    /// `NaN` when no rate could be measured.
    #[wasm_bindgen(getter = empiricalRate)]
    pub fn empirical_rate(&self) -> f64 {
        self.0.empirical_rate.unwrap_or(f64::NAN)
    }
}

/// Trace and bounds for the example with coupling scaled by `t`.
#[wasm_bindgen]
pub fn convergence(t: f64, iters: usize) -> Result<Convergence, JsError> {
    demo::convergence(t, iters).map(Convergence).map_err(js)
}

#[wasm_bindgen]
pub struct Landscape(demo::Landscape);

#[wasm_bindgen]
impl Landscape {
    #[wasm_bindgen(getter)]
    pub fn couplings(&self) -> Vec<f64> {
        self.0.couplings.clone()
    }
    #[wasm_bindgen(getter = rateMnorm)]
    pub fn rate_mnorm(&self) -> Vec<f64> {
        self.0.rate_mnorm.clone()
    }
    #[wasm_bindgen(getter = rateL2)]
    pub fn rate_l2(&self) -> Vec<f64> {
        self.0.rate_l2.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn empirical(&self) -> Vec<f64> {
        self.0.empirical.clone()
    }
}

#[wasm_bindgen(js_name = rateLandscape)]
pub fn rate_landscape(samples: usize) -> Result<Landscape, JsError> {
    demo::rate_landscape(samples).map(Landscape).map_err(js)
}

#[wasm_bindgen]
pub struct SublinearCurves(demo::SublinearCurves);

#[wasm_bindgen]
impl SublinearCurves {
    #[wasm_bindgen(getter)]
    pub fn improved(&self) -> Vec<f64> {
        self.0.improved.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn prior(&self) -> Vec<f64> {
        self.0.prior.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn nonsmooth(&self) -> Vec<f64> {
        self.0.nonsmooth.clone()
    }
    #[wasm_bindgen(getter = mStar)]
    pub fn m_star(&self) -> usize {
        self.0.m_star
    }
    #[wasm_bindgen(getter = pStar)]
    pub fn p_star(&self) -> f64 {
        self.0.p_star
    }
}

#[wasm_bindgen(js_name = sublinearCurves)]
pub fn sublinear_curves(
    l1: f64,
    l2: f64,
    r: f64,
    gap0: f64,
    k_max: usize,
) -> Result<SublinearCurves, JsError> {
    demo::sublinear_curves(l1, l2, r, gap0, k_max)
        .map(SublinearCurves)
        .map_err(js)
}
