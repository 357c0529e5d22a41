//! Escape-time rendering with optional ray / partition / postsingular
//! overlays, emitted as binary PPM (P6) for bit-exact testability.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::address::{ExternalAddress, Potential, Side};
use crate::dimension::{escape_time, Window};
use crate::map::{compute_postsingular, MapError, MapParams};
use crate::palette::PALETTE;
use crate::partition::{build_partition, BaseRays, PartitionError, RayPolicy};
use crate::ray::{trace_point, RayError, TraceConfig};

/// Overlay elements drawn on top of the escape-time base layer with
/// 1-pixel strokes.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub enum Overlay {
    /// A single dynamic ray.
    Ray(ExternalAddress),
    /// The partition boundary curves.
    Partition,
    /// The postsingular set (finite for preperiodic parameters).
    Postsingular,
}

/// A complete render request.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RenderJob {
    pub params: MapParams,
    pub window: Window,
    pub width: usize,
    pub height: usize,
    pub budget: usize,
    #[serde(default)]
    pub overlays: Vec<Overlay>,
    /// Named palette scheme; "default" is the only built-in.
    #[serde(default = "default_palette_name")]
    pub palette: String,
}

fn default_palette_name() -> String {
    "default".to_string()
}

#[derive(Debug, Error)]
pub enum RenderError {
    #[error("width and height must lie in [16, 16384], got {width}x{height}")]
    BadResolution { width: usize, height: usize },
    #[error("window is degenerate")]
    DegenerateWindow,
    #[error("unknown palette {0:?} (built-in: \"default\")")]
    UnknownPalette(String),
    #[error(transparent)]
    Partition(#[from] PartitionError),
    #[error(transparent)]
    Ray(#[from] RayError),
    #[error(transparent)]
    Map(#[from] MapError),
}

/// RGB row-major image buffer.
#[derive(Clone, Debug)]
pub struct Image {
    pub width: usize,
    pub height: usize,
    pub rgb: Vec<u8>,
}

impl Image {
    fn set(&mut self, x: i64, y: i64, color: [u8; 3]) {
        if x < 0 || y < 0 || x >= self.width as i64 || y >= self.height as i64 {
            return;
        }
        let i = 3 * (y as usize * self.width + x as usize);
        self.rgb[i..i + 3].copy_from_slice(&color);
    }

    /// Binary PPM: `P6\n<width> <height>\n255\n` followed by raw RGB rows.
    pub fn to_ppm(&self) -> Vec<u8> {
        let mut out = format!("P6\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.rgb);
        out
    }
}

const RAY_COLOR: [u8; 3] = [255, 255, 255];
const PARTITION_COLOR: [u8; 3] = [210, 210, 210];
const POSTSINGULAR_COLOR: [u8; 3] = [255, 40, 40];

/// Renders the escape-time classification of `job`, then draws overlays.
///
/// The base layer colors each pixel by escape step through the fixed
/// 256-entry palette; the hue family encodes the side (sign of Re) the
/// orbit escaped on, and non-escaping pixels are black.  Rows are rendered
/// in parallel; assembly order is fixed, so output is deterministic.
pub fn render_escape(job: &RenderJob, cfg: &TraceConfig) -> Result<Image, RenderError> {
    let (w, h) = (job.width, job.height);
    if !(16..=16384).contains(&w) || !(16..=16384).contains(&h) {
        return Err(RenderError::BadResolution {
            width: w,
            height: h,
        });
    }
    if !(job.window.width() > 0.0 && job.window.height() > 0.0) {
        return Err(RenderError::DegenerateWindow);
    }
    if job.palette != "default" {
        return Err(RenderError::UnknownPalette(job.palette.clone()));
    }
    let params = &job.params;
    let win = &job.window;
    let dx = win.width() / w as f64;
    let dy = win.height() / h as f64;
    let rows: Vec<Vec<u8>> = (0..h)
        .into_par_iter()
        .map(|iy| {
            let mut row = Vec::with_capacity(3 * w);
            // image rows run top-down: row 0 is the highest imaginary part
            let im = win.im_max - (iy as f64 + 0.5) * dy;
            for ix in 0..w {
                let z = Complex64::new(win.re_min + (ix as f64 + 0.5) * dx, im);
                match escape_time(params, z, job.budget) {
                    None => row.extend_from_slice(&[0, 0, 0]),
                    Some((step, side)) => {
                        let idx = (step * 255) / job.budget.max(1);
                        let c = PALETTE[idx.min(255)];
                        // the left-side family swaps the cold and warm ends
                        let c = match side {
                            Side::R => c,
                            Side::L => [c[2], c[1], c[0]],
                        };
                        row.extend_from_slice(&c);
                    }
                }
            }
            row
        })
        .collect();
    let mut img = Image {
        width: w,
        height: h,
        rgb: rows.concat(),
    };

    let to_px = |z: Complex64| -> (i64, i64) {
        (
            ((z.re - win.re_min) / dx - 0.5).round() as i64,
            ((win.im_max - z.im) / dy - 0.5).round() as i64,
        )
    };

    for overlay in &job.overlays {
        match overlay {
            Overlay::Ray(s) => {
                let t_max = win.re_max.max(-win.re_min) + 2.0;
                let mut prev: Option<(i64, i64)> = None;
                let mut t = 0.05f64;
                while t <= t_max {
                    if let Ok(tp) = trace_point(params, s, Potential(t), cfg) {
                        let px = to_px(tp.z);
                        if let Some(p) = prev {
                            draw_line(&mut img, p, px, RAY_COLOR);
                        }
                        prev = Some(px);
                    }
                    t += (dx.min(dy) * 0.8).max(1e-3);
                }
            }
            Overlay::Partition => {
                let part = build_partition(params, &BaseRays::Policy(RayPolicy::Right), cfg)?;
                let n_lo = ((win.im_min - 2.0) / crate::map::PI).floor() as i64;
                let n_hi = ((win.im_max + 2.0) / crate::map::PI).ceil() as i64;
                for n in n_lo..=n_hi {
                    let mut prev: Option<(i64, i64)> = None;
                    for ix in 0..w {
                        let re = win.re_min + (ix as f64 + 0.5) * dx;
                        let im = part.curve_im(n, re);
                        let px = to_px(Complex64::new(re, im));
                        if let Some(p) = prev {
                            draw_line(&mut img, p, px, PARTITION_COLOR);
                        }
                        prev = Some(px);
                    }
                }
            }
            Overlay::Postsingular => {
                let post = compute_postsingular(params, 32, 16)?;
                for z in &post.points {
                    let (x, y) = to_px(*z);
                    img.set(x, y, POSTSINGULAR_COLOR);
                }
            }
        }
    }
    Ok(img)
}

/// 1-pixel Bresenham stroke.
fn draw_line(img: &mut Image, a: (i64, i64), b: (i64, i64), color: [u8; 3]) {
    let (mut x0, mut y0) = a;
    let (x1, y1) = b;
    let dx = (x1 - x0).abs();
    let dy = -(y1 - y0).abs();
    // far-off-screen endpoints would make this walk astronomically long
    if dx > 4 * img.width as i64 || -dy > 4 * img.height as i64 {
        img.set(x1, y1, color);
        return;
    }
    let sx = if x0 < x1 { 1 } else { -1 };
    let sy = if y0 < y1 { 1 } else { -1 };
    let mut err = dx + dy;
    loop {
        img.set(x0, y0, color);
        if x0 == x1 && y0 == y1 {
            break;
        }
        let e2 = 2 * err;
        if e2 >= dy {
            err += dy;
            x0 += sx;
        }
        if e2 <= dx {
            err += dx;
            y0 += sy;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::address::parse_address;
    use crate::map::sinh_family_params;

    fn job(width: usize, height: usize, budget: usize) -> RenderJob {
        RenderJob {
            params: sinh_family_params(1),
            window: Window::square(5.0),
            width,
            height,
            budget,
            overlays: Vec::new(),
            palette: "default".into(),
        }
    }

    #[test]
    fn minimal_job_completes_and_every_pixel_is_colored() {
        let img = render_escape(&job(16, 16, 1), &TraceConfig::default()).unwrap();
        assert_eq!(img.rgb.len(), 16 * 16 * 3);
        let ppm = img.to_ppm();
        assert!(ppm.starts_with(b"P6\n16 16\n255\n"));
        assert_eq!(ppm.len(), 13 + 16 * 16 * 3);
    }

    #[test]
    fn identical_jobs_render_byte_identically() {
        let cfg = TraceConfig::default();
        let mut j = job(64, 64, 30);
        j.overlays = vec![
            Overlay::Partition,
            Overlay::Ray(parse_address("(0R)*").unwrap()),
            Overlay::Postsingular,
        ];
        let a = render_escape(&j, &cfg).unwrap().to_ppm();
        let b = render_escape(&j, &cfg).unwrap().to_ppm();
        assert_eq!(a, b);
    }

    #[test]
    fn bad_resolution_is_rejected() {
        assert!(matches!(
            render_escape(&job(8, 64, 10), &TraceConfig::default()),
            Err(RenderError::BadResolution { .. })
        ));
    }

    #[test]
    fn sides_get_different_hue_families() {
        // deep right and deep left pixels escape on step 0 with mirrored hues
        let img = render_escape(
            &RenderJob {
                window: Window::new(-60.0, 60.0, -1.0, 1.0),
                ..job(64, 16, 5)
            },
            &TraceConfig::default(),
        )
        .unwrap();
        let left = &img.rgb[0..3];
        let right = &img.rgb[3 * 63..3 * 64];
        assert_eq!(left[1], right[1]);
        assert_eq!(left[0], right[2]);
        assert_ne!(left, right);
    }
}
