//! Desk-scale dimension experiments: box-counting estimates for families of
//! dynamic rays (dimension ~1) and for the escaping set (dimension ~2), plus
//! Monte-Carlo escape statistics.
//!
//! Box-counting slope is the computable stand-in for Hausdorff dimension:
//! finite samples can exhibit trends toward the asymptotic values, never the
//! values themselves, so all outputs are estimates with a fit quality.

use std::collections::BTreeSet;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::address::{ExternalAddress, Potential, Side, SymbolEntry};
use crate::map::MapParams;
use crate::ray::{trace_point, TraceConfig};

/// Escape threshold on |Re z| shared by the escape kernel and the renderer.
pub const ESCAPE_RE: f64 = 50.0;

/// Axis-aligned rectangle in the plane.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Window {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl Window {
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Self {
        Window {
            re_min,
            re_max,
            im_min,
            im_max,
        }
    }

    pub fn square(half: f64) -> Self {
        Window::new(-half, half, -half, half)
    }

    pub fn width(&self) -> f64 {
        self.re_max - self.re_min
    }

    pub fn height(&self) -> f64 {
        self.im_max - self.im_min
    }

    /// Side of the coarsest box grid: the larger extent.
    pub fn diam(&self) -> f64 {
        self.width().max(self.height())
    }

    pub fn contains(&self, z: Complex64) -> bool {
        z.re >= self.re_min && z.re <= self.re_max && z.im >= self.im_min && z.im <= self.im_max
    }
}

#[derive(Debug, Error)]
pub enum DimensionError {
    #[error("box counting needs at least {required} points inside the window, found {found}")]
    TooFewPoints { found: usize, required: usize },
    #[error("box counting needs at least 4 scales, asked for {0}")]
    TooFewScales(usize),
}

/// Result of a box-counting run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BoxCountReport {
    pub window: Window,
    /// Box sizes ε_j, strictly decreasing (dyadic: diam/2^j, j = 2..).
    pub scales: Vec<f64>,
    /// Occupied-box counts N(ε_j); non-decreasing as ε shrinks.
    pub counts: Vec<u64>,
    /// Least-squares slope of log N against log(1/ε) over the middle scales
    /// (coarsest and finest dropped to avoid saturation bias).
    pub slope: f64,
    /// Coefficient of determination of that fit.
    pub fit_quality: f64,
}

/// Monte-Carlo escape statistics over a window.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EscapeStats {
    pub n_samples: usize,
    pub budget: usize,
    /// |Re| threshold certifying escape; the next image has modulus ~e^(this),
    /// so the real-part bound grows monotonically from here without needing
    /// to be represented.
    pub escape_radius_log: f64,
    pub escaped: usize,
    pub fraction: f64,
}

/// Escape kernel shared by statistics, pixel classification, and rendering.
///
/// Returns the escape step and the side (sign of Re) at which the orbit left,
/// or `None` if it survives the budget.  Works entirely inside the double
/// range: an orbit is declared escaped at |Re| > 690 (its image would
/// overflow, and the real-part bound e^|Re| grows monotonically from there)
/// or at |Re| > [`ESCAPE_RE`] backed by the growth signature.
pub fn escape_time(
    params: &MapParams,
    z: Complex64,
    budget: usize,
) -> Option<(usize, Side)> {
    let side_of = |z: Complex64| if z.re >= 0.0 { Side::R } else { Side::L };
    let mut cur = z;
    let mut prev_re = [0.0f64; 2]; // |Re| at steps k-2, k-1
    for step in 0..=budget {
        let re = cur.re.abs();
        if re > 690.0 {
            return Some((step, side_of(cur)));
        }
        if step >= 2 && re > ESCAPE_RE && re >= 4.0 * prev_re[1] && prev_re[1] >= prev_re[0] {
            return Some((step, side_of(cur)));
        }
        if step == budget {
            break;
        }
        prev_re = [prev_re[1], re];
        cur = match params.evaluate(cur) {
            Ok(next) => next,
            // out of evaluable range means astronomically far out
            Err(_) => return Some((step + 1, side_of(cur))),
        };
    }
    None
}

/// Counts occupied boxes of `points` on dyadic grids and fits the dimension
/// slope.
pub fn box_count(
    points: &[Complex64],
    window: &Window,
    n_scales: usize,
) -> Result<BoxCountReport, DimensionError> {
    if n_scales < 4 {
        return Err(DimensionError::TooFewScales(n_scales));
    }
    let inside: Vec<Complex64> = points
        .iter()
        .copied()
        .filter(|z| window.contains(*z))
        .collect();
    if inside.len() < 1000 {
        return Err(DimensionError::TooFewPoints {
            found: inside.len(),
            required: 1000,
        });
    }
    let diam = window.diam();
    let mut scales = Vec::with_capacity(n_scales);
    let mut counts = Vec::with_capacity(n_scales);
    for j in 2..(2 + n_scales) {
        let eps = diam / f64::powi(2.0, j as i32);
        let mut occupied: BTreeSet<(i64, i64)> = BTreeSet::new();
        for z in &inside {
            let ix = ((z.re - window.re_min) / eps).floor() as i64;
            let iy = ((z.im - window.im_min) / eps).floor() as i64;
            occupied.insert((ix, iy));
        }
        scales.push(eps);
        counts.push(occupied.len() as u64);
    }
    let (slope, fit_quality) = fit_middle_slope(&scales, &counts);
    Ok(BoxCountReport {
        window: *window,
        scales,
        counts,
        slope,
        fit_quality,
    })
}

/// Least-squares slope of log N vs log(1/ε), dropping the coarsest and
/// finest scale; returns (slope, R²).
fn fit_middle_slope(scales: &[f64], counts: &[u64]) -> (f64, f64) {
    let xs: Vec<f64> = scales[1..scales.len() - 1]
        .iter()
        .map(|e| (1.0 / e).ln())
        .collect();
    let ys: Vec<f64> = counts[1..counts.len() - 1]
        .iter()
        .map(|&n| (n as f64).ln())
        .collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let ss_tot: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let fit = my + slope * (x - mx);
            (y - fit) * (y - fit)
        })
        .sum();
    let r2 = if ss_tot == 0.0 {
        1.0
    } else {
        1.0 - ss_res / ss_tot
    };
    (slope, r2)
}

/// Box-count outcome for a traced family of rays.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RayFamilyOutcome {
    pub report: BoxCountReport,
    pub rays_traced: usize,
    /// Address literals of rays skipped because tracing failed, with the
    /// error (skips are reported, not fatal).
    pub skipped: Vec<(String, String)>,
}

/// Enumerates the distinct periodic-tail addresses with entries |s_k| ≤ `m`
/// and period ≤ `max_period` (period multiples deduplicated; rotations are
/// distinct addresses and distinct rays).
pub fn periodic_address_family(m: i64, max_period: usize) -> Vec<ExternalAddress> {
    let mut nodes = Vec::new();
    for idx in -m..=m {
        nodes.push(SymbolEntry::r(idx));
        nodes.push(SymbolEntry::l(idx));
    }
    let mut seen = BTreeSet::new();
    let mut family = Vec::new();
    let mut blocks: Vec<Vec<SymbolEntry>> = vec![Vec::new()];
    for _ in 0..max_period {
        let mut next_blocks = Vec::new();
        for blk in &blocks {
            for &e in &nodes {
                let mut b = blk.clone();
                b.push(e);
                let addr = ExternalAddress::periodic(b.clone()).unwrap().canonical();
                if seen.insert(addr.to_string()) {
                    family.push(addr);
                }
                next_blocks.push(b);
            }
        }
        blocks = next_blocks;
    }
    family
}

/// Traces the periodic-tail ray family and box-counts the union of the
/// sampled rays inside `window`.
pub fn ray_family_dimension(
    params: &MapParams,
    m: i64,
    tail_depth: usize,
    t_floor: f64,
    window: &Window,
    n_scales: usize,
    cfg: &TraceConfig,
) -> Result<RayFamilyOutcome, DimensionError> {
    assert!(t_floor > 0.0, "t_floor must be positive");
    let family = periodic_address_family(m, tail_depth);
    // rays run at unit speed in t; sample finely enough that consecutive
    // points land in the same or adjacent boxes at the finest scale
    let eps_min = window.diam() / f64::powi(2.0, (n_scales + 1) as i32);
    let t_max = window.re_max.max(-window.re_min) + 2.0;
    // at least ~600 samples per ray so even tiny families clear the
    // box-counting point floor
    let dt = (eps_min / 2.0).min((t_max - t_floor) / 600.0);
    let results: Vec<Result<Vec<Complex64>, (String, String)>> = family
        .par_iter()
        .map(|s| {
            let mut pts = Vec::new();
            let mut t = t_floor;
            while t <= t_max {
                match trace_point(params, s, Potential(t), cfg) {
                    Ok(tp) => pts.push(tp.z),
                    Err(e) => return Err((s.to_string(), e.to_string())),
                }
                t += dt;
            }
            Ok(pts)
        })
        .collect();
    let mut points = Vec::new();
    let mut skipped = Vec::new();
    let mut rays_traced = 0usize;
    for r in results {
        match r {
            Ok(pts) => {
                rays_traced += 1;
                points.extend(pts);
            }
            Err(sk) => skipped.push(sk),
        }
    }
    let report = box_count(&points, window, n_scales)?;
    Ok(RayFamilyOutcome {
        report,
        rays_traced,
        skipped,
    })
}

/// Draws `n_samples` uniform points from `window` with the (fixed, documented)
/// ChaCha8 generator seeded by `seed`.
fn uniform_samples(window: &Window, n_samples: usize, seed: u64) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n_samples)
        .map(|_| {
            let re = rng.gen_range(window.re_min..window.re_max);
            let im = rng.gen_range(window.im_min..window.im_max);
            Complex64::new(re, im)
        })
        .collect()
}

/// Fraction of uniformly sampled points whose orbit escapes within `budget`
/// iterations.  Deterministic for a fixed seed; monotone non-decreasing in
/// `budget` on the fixed sample set.
pub fn escape_fraction(
    params: &MapParams,
    window: &Window,
    n_samples: usize,
    budget: usize,
    seed: u64,
) -> EscapeStats {
    let samples = uniform_samples(window, n_samples, seed);
    let escaped = samples
        .par_iter()
        .map(|&z| usize::from(escape_time(params, z, budget).is_some()))
        .sum::<usize>();
    EscapeStats {
        n_samples,
        budget,
        escape_radius_log: ESCAPE_RE,
        escaped,
        fraction: escaped as f64 / n_samples as f64,
    }
}

/// Pixel-grid escape classification plus box count of the escaped centers.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PixelEscapeOutcome {
    pub report: BoxCountReport,
    pub escaped: usize,
    pub total: usize,
    pub fraction: f64,
}

/// Classifies pixel centers on a `resolution`×`resolution` grid and
/// box-counts those that escape.
pub fn escaping_set_dimension(
    params: &MapParams,
    window: &Window,
    resolution: usize,
    budget: usize,
    n_scales: usize,
) -> Result<PixelEscapeOutcome, DimensionError> {
    let dx = window.width() / resolution as f64;
    let dy = window.height() / resolution as f64;
    let escaped_points: Vec<Complex64> = (0..resolution)
        .into_par_iter()
        .flat_map_iter(|iy| {
            let params = params.clone();
            let window = *window;
            (0..resolution).filter_map(move |ix| {
                let z = Complex64::new(
                    window.re_min + (ix as f64 + 0.5) * dx,
                    window.im_min + (iy as f64 + 0.5) * dy,
                );
                escape_time(&params, z, budget).map(|_| z)
            })
        })
        .collect();
    let total = resolution * resolution;
    let escaped = escaped_points.len();
    let report = box_count(&escaped_points, window, n_scales)?;
    Ok(PixelEscapeOutcome {
        report,
        escaped,
        total,
        fraction: escaped as f64 / total as f64,
    })
}
