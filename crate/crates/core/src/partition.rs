//! The itinerary partition: the plane is cut along one chosen dynamic ray
//! landing at each critical value; the preimages of those rays are curves
//! landing at the critical points, and the components between them carry
//! half-integer labels `u`.  Orbits then get symbol sequences (itineraries)
//! by recording the component of each iterate.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::address::{ExternalAddress, Itinerary, Potential, Side};
use crate::map::{MapParams, PI, TAU};
use crate::ray::{landing_point, trace_point, RayError, TraceConfig};

/// Which ray to cut along at each critical value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RayPolicy {
    /// The ray going to the right from each critical value.
    Right,
    /// The ray going to the left.
    Left,
}

/// How the two base rays are chosen.
#[derive(Clone, Debug)]
pub enum BaseRays {
    /// Built-in addresses, known for the sinh family.
    Policy(RayPolicy),
    /// Caller-supplied addresses for the rays landing at `v` and `v'`.
    Explicit {
        at_v: ExternalAddress,
        at_v_prime: ExternalAddress,
    },
}

#[derive(Debug, Error)]
pub enum PartitionError {
    #[error("ray {address} lands at {landed} instead of the critical value {expected}")]
    RayDoesNotLandAtCriticalValue {
        address: String,
        landed: Complex64,
        expected: Complex64,
    },
    #[error("no built-in base addresses for these parameters; supply them explicitly")]
    NoDefaultAddresses,
    #[error("point is within tolerance of a partition boundary curve (orbit step {step})")]
    OnBoundary { step: usize },
    #[error("address is a partition base address or one of its preimages")]
    BoundaryRay,
    #[error(transparent)]
    Ray(#[from] RayError),
    #[error(transparent)]
    Map(#[from] crate::map::MapError),
    #[error("boundary-curve continuation failed: {0}")]
    CurveContinuation(String),
}

/// One boundary curve of the partition in the fundamental pair: a graph
/// `Im = f(Re)` over the sampling window, constant beyond it.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BoundaryCurve {
    /// The critical point this curve lands at.
    pub critical_point: Complex64,
    /// `Im` samples over the uniform x-grid of the model.
    pub im: Vec<f64>,
}

/// Distance below which a point counts as sitting on a boundary curve.
pub const BOUNDARY_TOL: f64 = 1e-9;

/// Labeled strip decomposition of the plane.
///
/// Only two curves are stored (the ones through the two critical points of
/// the fundamental π-pair); all others are exact `2πi`-translates, so label
/// lookups are translation-equivariant by construction.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PartitionModel {
    pub params: MapParams,
    /// Address of the ray landing at `v` (literal-printable, bounded tail).
    pub base_v: ExternalAddress,
    /// Address of the ray landing at `v'`.
    pub base_v_prime: ExternalAddress,
    /// Curve through the base critical point `½ Log(b/a)` (even family).
    pub curve_even: BoundaryCurve,
    /// Curve through `½ Log(b/a) - iπ` (odd family).
    pub curve_odd: BoundaryCurve,
    /// Left edge of the x-grid.
    pub x_min: f64,
    /// Grid spacing.
    pub x_step: f64,
    /// Curve-count offset fixing label 0 at the component containing 0.
    pub anchor: i64,
    /// Upper bound on the height (Im-extent) of any component.
    pub height_bound: f64,
}

/// Half the sampling window: curves are sampled for `Re ∈ [-W, W]`.
pub const DEFAULT_WINDOW: f64 = 30.0;

/// Built-in base addresses for `z -> kπ sinh(z)`, `k >= 1`.
///
/// The rays landing at the critical values `±ikπ` are the horizontal lines
/// at height `±kπ`; on them `E(x + ikπ) = (-1)^k kπ sinh(x)`, so the forward
/// orbit runs along the negative real axis for odd `k` (tail `(0_L)^∞`) and
/// the positive one for even `k` (tail `(0_R)^∞`).  The leading entry is the
/// strip index of the height `±kπ` line.
pub fn sinh_base_addresses(k: i64, policy: RayPolicy) -> Option<(ExternalAddress, ExternalAddress)> {
    if k < 1 {
        return None;
    }
    let odd = k % 2 == 1;
    let (tail_side, first_at_v, first_at_vp) = match policy {
        RayPolicy::Right => {
            if odd {
                (Side::L, (k - 1) / 2, -(k + 1) / 2)
            } else {
                (Side::R, k / 2, -k / 2)
            }
        }
        RayPolicy::Left => {
            if odd {
                (Side::R, (k - 1) / 2, -(k + 1) / 2)
            } else {
                (Side::L, k / 2, -k / 2)
            }
        }
    };
    let first_side = match policy {
        RayPolicy::Right => Side::R,
        RayPolicy::Left => Side::L,
    };
    let tail = ExternalAddress::constant(crate::address::SymbolEntry::new(0, tail_side));
    let at_v = tail
        .clone()
        .with_prefix(vec![crate::address::SymbolEntry::new(first_at_v, first_side)]);
    let at_vp = tail.with_prefix(vec![crate::address::SymbolEntry::new(first_at_vp, first_side)]);
    Some((at_v, at_vp))
}

/// Detects `z -> kπ sinh(z)` parameters and returns `k`.
fn sinh_k(params: &MapParams) -> Option<i64> {
    if params.a.im.abs() > 1e-12 || (params.a + params.b).norm() > 1e-12 {
        return None;
    }
    let k = params.a.re * 2.0 / PI;
    if (k - k.round()).abs() < 1e-9 && k.round() != 0.0 {
        Some(k.round() as i64)
    } else {
        None
    }
}

impl PartitionModel {
    /// `Im` of boundary curve number `n` at abscissa `x`.  Curve `n` lands at
    /// the critical point `½ Log(b/a) + iπn`; even and odd `n` are translates
    /// of the two stored curves.
    pub fn curve_im(&self, n: i64, x: f64) -> f64 {
        if n.rem_euclid(2) == 0 {
            self.interp(&self.curve_even.im, x) + TAU * (n / 2) as f64
        } else {
            self.interp(&self.curve_odd.im, x) + TAU * ((n + 1) / 2) as f64
        }
    }

    fn interp(&self, im: &[f64], x: f64) -> f64 {
        let pos = (x - self.x_min) / self.x_step;
        if pos <= 0.0 {
            return im[0];
        }
        let last = im.len() - 1;
        if pos >= last as f64 {
            return im[last];
        }
        let i = pos.floor() as usize;
        let frac = pos - i as f64;
        im[i] * (1.0 - frac) + im[i + 1] * frac
    }

    /// Index of the lowest boundary curve lying at or above `z`.
    fn first_curve_above(&self, z: Complex64) -> i64 {
        let mut n = ((z.im - self.interp(&self.curve_even.im, z.re)) / PI).round() as i64;
        while self.curve_im(n, z.re) >= z.im {
            n -= 1;
        }
        while self.curve_im(n, z.re) < z.im {
            n += 1;
        }
        n
    }

    /// Component label of `z`, as twice-the-value (exact half-integer).
    pub fn label_doubled(&self, z: Complex64) -> Result<i64, PartitionError> {
        let n = self.first_curve_above(z);
        let above = self.curve_im(n, z.re) - z.im;
        let below = z.im - self.curve_im(n - 1, z.re);
        // Far to the right the adjacent curves pinch together exponentially,
        // so the boundary tolerance must shrink with the local gap: a point
        // is "on the boundary" only when its distance to a curve is small
        // relative to the width of the component it sits in.
        let gap = self.curve_im(n, z.re) - self.curve_im(n - 1, z.re);
        if above.min(below) < BOUNDARY_TOL.min(0.25 * gap) {
            return Err(PartitionError::OnBoundary { step: 0 });
        }
        Ok(n - self.anchor)
    }

    /// Component label `u` of `z`, where `U_0` contains the origin.
    pub fn itinerary_entry(&self, z: Complex64) -> Result<f64, PartitionError> {
        Ok(self.label_doubled(z)? as f64 / 2.0)
    }
}

/// Builds the partition for postsingularly preperiodic parameters.
pub fn build_partition(
    params: &MapParams,
    choice: &BaseRays,
    cfg: &TraceConfig,
) -> Result<PartitionModel, PartitionError> {
    let (base_v, base_vp) = match choice {
        BaseRays::Explicit { at_v, at_v_prime } => (at_v.clone(), at_v_prime.clone()),
        BaseRays::Policy(policy) => {
            let k = sinh_k(params).ok_or(PartitionError::NoDefaultAddresses)?;
            sinh_base_addresses(k, *policy).ok_or(PartitionError::NoDefaultAddresses)?
        }
    };

    // validate that the chosen rays land where they must
    for (addr, expected) in [(&base_v, params.v), (&base_vp, params.v_prime)] {
        let land = landing_point(params, addr, cfg)?;
        if !land.converged || (land.z - expected).norm() > 1e-6 {
            return Err(PartitionError::RayDoesNotLandAtCriticalValue {
                address: addr.to_string(),
                landed: land.z,
                expected,
            });
        }
    }

    let w = DEFAULT_WINDOW;
    let x_step = 0.02;
    let n_grid = 2 * (w / x_step).round() as usize + 1;
    let x_min = -w;

    // sample both base rays densely from near the landing point outwards
    let sample_ray = |addr: &ExternalAddress,
                      land: Complex64|
     -> Result<Vec<Complex64>, PartitionError> {
        let mut pts = vec![land];
        // below t ~ 0.2 the ray is already within ~1e-5 of its landing
        // point (repelling-fixed-point tails close in exponentially in 1/t),
        // and chain values tiny enough to make the branch choice ill-posed.
        // The far end must reach |w| ~ e^(W+2.5) so the preimage curves
        // (living at Re ~ ln|w|) cover the whole window; out there tracing
        // is pure seeding, which costs nothing and is exact.
        let t1 = (w + 2.5).exp() * params.a.norm().max(1.0);
        let (t0, n) = (0.2_f64, 600usize);
        let ratio = (t1 / t0).powf(1.0 / (n - 1) as f64);
        for i in 0..n {
            let t = t0 * ratio.powi(i as i32);
            pts.push(trace_point(params, addr, Potential(t), cfg)?.z);
        }
        Ok(pts)
    };
    let ray_v = sample_ray(&base_v, params.v)?;
    let ray_vp = sample_ray(&base_vp, params.v_prime)?;

    // fundamental pair of critical points and which ray each one maps to
    let cp0 = 0.5 * (params.b / params.a).ln();
    let cp1 = cp0 - Complex64::new(0.0, PI);
    let pick = |cp: Complex64| -> Result<&Vec<Complex64>, PartitionError> {
        let ecp = params.evaluate(cp)?;
        if (ecp - params.v).norm() < (ecp - params.v_prime).norm() {
            Ok(&ray_v)
        } else {
            Ok(&ray_vp)
        }
    };
    let curve_even = continue_preimage_curve(params, cp0, pick(cp0)?, x_min, x_step, n_grid)?;
    let curve_odd = continue_preimage_curve(params, cp1, pick(cp1)?, x_min, x_step, n_grid)?;

    let mut model = PartitionModel {
        params: *params,
        base_v,
        base_v_prime: base_vp,
        curve_even,
        curve_odd,
        x_min,
        x_step,
        anchor: 0,
        height_bound: 0.0,
    };
    model.anchor = model.first_curve_above(Complex64::ZERO);
    model.height_bound = height_bound(&model);
    Ok(model)
}

/// Tracks both preimage branches of a base ray through a critical point and
/// resamples the combined curve onto the uniform x-grid.
///
/// With `u = e^z`, preimages of a ray point `w` are the roots of
/// `a u² - w u + b = 0`; at `w = v` (the landing point) they collide at the
/// critical point.  Walking outward along the ray, each root is matched to
/// its predecessor, giving one branch heading right and one heading left —
/// together a graph over `Re` through the critical point.
fn continue_preimage_curve(
    params: &MapParams,
    cp: Complex64,
    ray: &[Complex64],
    x_min: f64,
    x_step: f64,
    n_grid: usize,
) -> Result<BoundaryCurve, PartitionError> {
    let uc = cp.exp();
    let mut u_a = uc;
    let mut u_b = uc;
    let mut z_a = cp;
    let mut z_b = cp;
    let mut pts: Vec<(f64, f64)> = vec![(cp.re, cp.im)];
    let window = x_min.abs().max(x_min + x_step * (n_grid - 1) as f64);

    for &w in &ray[1..] {
        let (r1, r2) = match params.preimage_roots(w) {
            Ok(roots) => roots,
            // right at the landing point the roots collide; the next ray
            // sample resolves the split
            Err(crate::map::MapError::CriticalValueHit) => continue,
            Err(e) => return Err(e.into()),
        };
        // pair the roots with the running branches
        let straight = (r1 - u_a).norm() + (r2 - u_b).norm();
        let crossed = (r2 - u_a).norm() + (r1 - u_b).norm();
        let (na, nb) = if straight <= crossed { (r1, r2) } else { (r2, r1) };
        u_a = na;
        u_b = nb;
        // continuous logarithm branches
        let log_near = |u: Complex64, prev: Complex64| {
            let mut z = u.ln();
            let m = ((prev.im - z.im) / TAU).round();
            z.im += TAU * m;
            z
        };
        z_a = log_near(u_a, z_a);
        z_b = log_near(u_b, z_b);
        pts.push((z_a.re, z_a.im));
        pts.push((z_b.re, z_b.im));
        if z_a.re.abs() > window + 2.0 && z_b.re.abs() > window + 2.0 {
            break;
        }
    }

    pts.sort_by(|p, q| p.0.total_cmp(&q.0));
    if pts.first().unwrap().0 > x_min || pts.last().unwrap().0 < x_min + x_step * (n_grid - 1) as f64
    {
        return Err(PartitionError::CurveContinuation(format!(
            "curve through {cp} covers Re in [{:.2}, {:.2}], short of the window",
            pts.first().unwrap().0,
            pts.last().unwrap().0
        )));
    }

    // resample onto the uniform grid by linear interpolation
    let mut im = Vec::with_capacity(n_grid);
    let mut j = 0usize;
    for i in 0..n_grid {
        let x = x_min + x_step * i as f64;
        while j + 1 < pts.len() && pts[j + 1].0 < x {
            j += 1;
        }
        let (x0, y0) = pts[j];
        let (x1, y1) = pts[(j + 1).min(pts.len() - 1)];
        let y = if x1 > x0 {
            y0 + (y1 - y0) * (x - x0) / (x1 - x0)
        } else {
            y0
        };
        im.push(y);
    }
    Ok(BoundaryCurve {
        critical_point: cp,
        im,
    })
}

/// Worst-case Im-extent of a component: highest point of its upper curve
/// minus lowest point of its lower curve, over both component families.
fn height_bound(model: &PartitionModel) -> f64 {
    let max = |v: &[f64]| v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = |v: &[f64]| v.iter().cloned().fold(f64::INFINITY, f64::min);
    let even = (max(&model.curve_even.im), min(&model.curve_even.im));
    let odd = (max(&model.curve_odd.im), min(&model.curve_odd.im));
    // component between odd curve n and even curve n+1 (same 2π block), and
    // between even curve n and odd curve n+1 (next block, +2π)
    let fam1 = even.0 - odd.1;
    let fam2 = (odd.0 + TAU) - even.1;
    fam1.max(fam2)
}

/// Itinerary of a forward orbit, possibly truncated when the orbit leaves
/// the range where labels can be computed.
#[derive(Clone, Debug, PartialEq)]
pub struct PointItinerary {
    pub itinerary: Itinerary,
    /// Step at which `|Re|` exceeded the overflow range, if any; the
    /// itinerary then contains only the entries before it.
    pub escaped_at: Option<usize>,
}

/// Itinerary of the forward orbit of `z` under `E`, up to `length` entries.
pub fn itinerary_of_point(
    part: &PartitionModel,
    params: &MapParams,
    z: Complex64,
    length: usize,
) -> Result<PointItinerary, PartitionError> {
    let mut it = Itinerary::from_doubled(Vec::new());
    let mut cur = z;
    for step in 0..length {
        if cur.re.abs() > 700.0 {
            return Ok(PointItinerary {
                itinerary: it,
                escaped_at: Some(step),
            });
        }
        let d = part
            .label_doubled(cur)
            .map_err(|_| PartitionError::OnBoundary { step })?;
        it.push_doubled(d);
        if step + 1 < length {
            cur = params.evaluate(cur)?;
        }
    }
    Ok(PointItinerary {
        itinerary: it,
        escaped_at: None,
    })
}

/// Potential at which ray tails are sampled for labeling: far enough out for
/// the strip geometry to be stable, inside the curve window.
const RAY_LABEL_T: f64 = 6.0;

/// Itinerary of the ray `g_s`: entry `k` is the label of the component
/// containing the tail of the `(k-1)`-times shifted ray.
pub fn itinerary_of_address(
    part: &PartitionModel,
    params: &MapParams,
    s: &ExternalAddress,
    length: usize,
    cfg: &TraceConfig,
) -> Result<Itinerary, PartitionError> {
    let entries_equal = |a: &ExternalAddress, b: &ExternalAddress| {
        (1..=64).all(|k| a.entry(k) == b.entry(k))
    };
    let mut doubled = Vec::with_capacity(length);
    let mut cur = s.clone();
    for _ in 0..length {
        // the partition boundary consists of the base rays' preimages: any
        // address whose shift orbit passes through a base address is cut out
        if entries_equal(&cur, &part.base_v)
            || entries_equal(&cur, &part.base_v_prime)
            || entries_equal(&cur.shift(), &part.base_v)
            || entries_equal(&cur.shift(), &part.base_v_prime)
        {
            return Err(PartitionError::BoundaryRay);
        }
        let z = trace_point(params, &cur, Potential(RAY_LABEL_T), cfg)?.z;
        let d = part
            .label_doubled(z)
            .map_err(|_| PartitionError::BoundaryRay)?;
        doubled.push(d);
        cur = cur.shift();
    }
    Ok(Itinerary::from_doubled(doubled))
}
