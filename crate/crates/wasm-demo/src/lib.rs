//! Browser bindings for the cosine-rays core crate.
//!
//! Exposes three interactive operations to a static page:
//! escape-time rendering into an RGBA buffer, dynamic-ray tracing, and
//! point classification.  All heavy lifting lives in the core crate; this
//! layer only converts between JS-friendly types and core types.

use wasm_bindgen::prelude::*;

use cosine_rays::address::{parse_address, Potential};
use cosine_rays::classify::{classify_point, Budget};
use cosine_rays::dimension::{escape_time, Window};
use cosine_rays::map::{sinh_family_params, MapParams};
use cosine_rays::palette::PALETTE;
use cosine_rays::partition::{build_partition, BaseRays, PartitionModel, RayPolicy};
use cosine_rays::ray::{landing_point, trace_point, TraceConfig};
use cosine_rays::Complex64;

fn err(e: impl std::fmt::Display) -> JsValue {
    JsValue::from_str(&e.to_string())
}

/// One map of the sinh subfamily plus the lazily built itinerary partition.
#[wasm_bindgen]
pub struct Demo {
    params: MapParams,
    cfg: TraceConfig,
    partition: Option<PartitionModel>,
}

#[wasm_bindgen]
impl Demo {
    /// Creates a demo session for the map `kπ sinh(z)`.
    #[wasm_bindgen(constructor)]
    pub fn new(k: i64) -> Result<Demo, JsValue> {
        if !(1..=8).contains(&k) {
            return Err(err("k must lie in 1..=8"));
        }
        Ok(Demo {
            params: sinh_family_params(k),
            cfg: TraceConfig::default(),
            partition: None,
        })
    }

    /// Escape-time render of the square window `[-half, half]^2` as a
    /// width*height*4 RGBA buffer (row 0 at the top), ready for
    /// `ImageData`.
    pub fn render_rgba(
        &self,
        half: f64,
        width: usize,
        height: usize,
        budget: usize,
    ) -> Result<Vec<u8>, JsValue> {
        if !(16..=2048).contains(&width) || !(16..=2048).contains(&height) {
            return Err(err("resolution must lie in [16, 2048]"));
        }
        if !(half > 0.0 && half.is_finite()) {
            return Err(err("window half-width must be positive"));
        }
        let win = Window::square(half);
        let dx = win.width() / width as f64;
        let dy = win.height() / height as f64;
        let mut out = Vec::with_capacity(width * height * 4);
        for iy in 0..height {
            let im = win.im_max - (iy as f64 + 0.5) * dy;
            for ix in 0..width {
                let z = Complex64::new(win.re_min + (ix as f64 + 0.5) * dx, im);
                let rgb = match escape_time(&self.params, z, budget.clamp(1, 500)) {
                    None => [0, 0, 0],
                    Some((step, side)) => {
                        let c = PALETTE[((step * 255) / budget.max(1)).min(255)];
                        match side {
                            cosine_rays::address::Side::R => c,
                            cosine_rays::address::Side::L => [c[2], c[1], c[0]],
                        }
                    }
                };
                out.extend_from_slice(&rgb);
                out.push(255);
            }
        }
        Ok(out)
    }

    /// Traces the ray of `address` (literal syntax, e.g. `"1R (0L)*"`) over
    /// `n` potentials in `[t0, t1]` and returns JSON
    /// `{"points": [[t, re, im, residual], ...], "landing": [re, im] | null}`.
    pub fn trace_ray_json(
        &self,
        address: &str,
        t0: f64,
        t1: f64,
        n: usize,
    ) -> Result<String, JsValue> {
        let s = parse_address(address).map_err(err)?;
        if !(t0 > 0.0 && t1 > t0 && (2..=4096).contains(&n)) {
            return Err(err("need 0 < t0 < t1 and 2 <= n <= 4096"));
        }
        let mut points = Vec::with_capacity(n);
        for i in 0..n {
            let t = t0 + (t1 - t0) * i as f64 / (n - 1) as f64;
            let tp = trace_point(&self.params, &s, Potential(t), &self.cfg).map_err(err)?;
            points.push((t, tp.z.re, tp.z.im, tp.residual));
        }
        let landing = landing_point(&self.params, &s, &self.cfg)
            .ok()
            .filter(|l| l.converged)
            .map(|l| (l.z.re, l.z.im));
        serde_json::to_string(&serde_json::json!({
            "address": s.to_string(),
            "points": points,
            "landing": landing,
        }))
        .map_err(err)
    }

    /// Classifies the point `re + i im` and returns the classification
    /// record as JSON (tagged by `"kind"`).
    pub fn classify_json(&mut self, re: f64, im: f64) -> Result<String, JsValue> {
        if self.partition.is_none() {
            let part =
                build_partition(&self.params, &BaseRays::Policy(RayPolicy::Right), &self.cfg)
                    .map_err(err)?;
            self.partition = Some(part);
        }
        let part = self.partition.as_ref().unwrap();
        let c = classify_point(
            &self.params,
            part,
            Complex64::new(re, im),
            &Budget::default(),
            &self.cfg,
        );
        serde_json::to_string(&c).map_err(err)
    }
}
