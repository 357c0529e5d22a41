//! The map family `E(z) = a e^z + b e^{-z}`: evaluation, derivatives,
//! critical points and values, inverse branches, and parameter solving for
//! postsingularly preperiodic members.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::address::Side;

pub const TAU: f64 = std::f64::consts::TAU;
pub const PI: f64 = std::f64::consts::PI;

/// Real parts beyond this make `e^z` overflow doubles.
pub const RE_OVERFLOW: f64 = 700.0;

#[derive(Debug, Error, PartialEq)]
pub enum MapError {
    #[error("|Re z| = {0} exceeds the overflow guard {RE_OVERFLOW}")]
    OverflowRange(f64),
    #[error("target value lies at (or too close to) a critical value")]
    CriticalValueHit,
    #[error("both inverse-branch roots have equal modulus; side is ambiguous")]
    AmbiguousSide,
    #[error("Newton iteration failed to converge within {0} steps")]
    NewtonDivergence(usize),
    #[error("root found does not give repelling fixed points")]
    WrongBasin,
    #[error("critical orbit did not reach a cycle within the budget: {0}")]
    NotPreperiodic(String),
    #[error("coefficient {0} must be nonzero")]
    ZeroCoefficient(&'static str),
}

/// Coefficients of one member of the family, with derived constants.
///
/// `alpha`/`beta` are the principal logarithms of `a`/`b`; they are the
/// additive constants of the ray asymptotics on the right/left side.  The
/// critical values are `v = 2 sqrt(ab)` (principal square root) and
/// `v' = -v`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ParamsJson", into = "ParamsJson")]
pub struct MapParams {
    pub a: Complex64,
    pub b: Complex64,
    pub alpha: Complex64,
    pub beta: Complex64,
    pub v: Complex64,
    pub v_prime: Complex64,
}

/// Wire format: derived fields are recomputed on load, never stored.
#[derive(Serialize, Deserialize)]
struct ParamsJson {
    a: [f64; 2],
    b: [f64; 2],
}

impl From<MapParams> for ParamsJson {
    fn from(p: MapParams) -> Self {
        ParamsJson {
            a: [p.a.re, p.a.im],
            b: [p.b.re, p.b.im],
        }
    }
}

impl TryFrom<ParamsJson> for MapParams {
    type Error = MapError;
    fn try_from(j: ParamsJson) -> Result<Self, MapError> {
        MapParams::new(
            Complex64::new(j.a[0], j.a[1]),
            Complex64::new(j.b[0], j.b[1]),
        )
    }
}

impl MapParams {
    pub fn new(a: Complex64, b: Complex64) -> Result<Self, MapError> {
        if a == Complex64::ZERO {
            return Err(MapError::ZeroCoefficient("a"));
        }
        if b == Complex64::ZERO {
            return Err(MapError::ZeroCoefficient("b"));
        }
        let v = 2.0 * (a * b).sqrt();
        Ok(MapParams {
            a,
            b,
            alpha: a.ln(),
            beta: b.ln(),
            v,
            v_prime: -v,
        })
    }

    /// `E(z) = a e^z + b e^{-z}`.
    pub fn evaluate(&self, z: Complex64) -> Result<Complex64, MapError> {
        if !(z.re.abs() <= RE_OVERFLOW) {
            return Err(MapError::OverflowRange(z.re.abs()));
        }
        // multiply by e^{-z} instead of dividing by e^z: complex division
        // underflows via |e^z|² long before e^{-z} leaves double range
        Ok(self.a * z.exp() + self.b * (-z).exp())
    }

    /// `E'(z) = a e^z - b e^{-z}`.
    pub fn derivative(&self, z: Complex64) -> Result<Complex64, MapError> {
        if !(z.re.abs() <= RE_OVERFLOW) {
            return Err(MapError::OverflowRange(z.re.abs()));
        }
        Ok(self.a * z.exp() - self.b * (-z).exp())
    }

    /// All critical points `½ Log(b/a) + iπn` with imaginary part inside
    /// `im_range` (inclusive).
    pub fn critical_points(&self, im_range: (f64, f64)) -> Vec<Complex64> {
        let base = 0.5 * (self.b / self.a).ln();
        let (lo, hi) = im_range;
        let n_lo = ((lo - base.im) / PI).ceil() as i64;
        let n_hi = ((hi - base.im) / PI).floor() as i64;
        (n_lo..=n_hi)
            .map(|n| base + Complex64::new(0.0, PI * n as f64))
            .collect()
    }

    /// Both roots of `a u² - w u + b = 0`, i.e. the values `u = e^z` of the
    /// preimages of `w`.
    ///
    /// Beyond `|w| ~ 1e150` the discriminant `w² - 4ab` overflows doubles;
    /// there the roots are `u ~ w/a` and `u ~ b/w` to relative error
    /// `O(w^-2)`, far below double precision.  (The small root is formed via
    /// the unit vector of `w`, because plain complex division by `w` would
    /// overflow `|w|²` and flush to zero.)  In double range the roots come
    /// from the cancellation-free quadratic formula.
    pub fn preimage_roots(&self, w: Complex64) -> Result<(Complex64, Complex64), MapError> {
        let s = w.norm();
        if s > 1e150 {
            let w_unit = w / s;
            return Ok((w / self.a, (self.b / s) * w_unit.conj()));
        }
        let disc = w * w - 4.0 * self.a * self.b;
        if disc.norm() < 1e-14 * (1.0 + w.norm_sqr()) {
            return Err(MapError::CriticalValueHit);
        }
        // stable quadratic roots: form q = w ± sqrt(disc) with the sign
        // that avoids cancellation, then the other root via u1·u2 = b/a
        let mut sq = disc.sqrt();
        if (w + sq).norm() < (w - sq).norm() {
            sq = -sq;
        }
        let q = w + sq;
        Ok((q / (2.0 * self.a), 2.0 * self.b / q))
    }

    /// Solves `E(z) = w` on the chosen side, in the 2π strip nearest
    /// `target_im`.
    ///
    /// The substitution `u = e^z` turns `E(z) = w` into
    /// `a u^2 - w u + b = 0`.  The root with `|u| > sqrt|b/a|` has
    /// `Re z > ½ ln|b/a|` (side R); the other root gives side L.  The branch
    /// of the logarithm is fixed by requiring `|Im z - target_im| <= π`.
    pub fn inverse_branch(
        &self,
        w: Complex64,
        side: Side,
        target_im: f64,
    ) -> Result<Complex64, MapError> {
        let (u1, u2) = self.preimage_roots(w)?;
        let (n1, n2) = (u1.norm(), u2.norm());
        if (n1 - n2).abs() <= 1e-12 * (n1 + n2) {
            return Err(MapError::AmbiguousSide);
        }
        let u = match side {
            Side::R => {
                if n1 > n2 {
                    u1
                } else {
                    u2
                }
            }
            Side::L => {
                if n1 < n2 {
                    u1
                } else {
                    u2
                }
            }
        };
        let mut z = u.ln();
        let m = ((target_im - z.im) / TAU).round();
        z += Complex64::new(0.0, TAU * m);
        // A couple of Newton polish steps clean up roundoff; steps are only
        // accepted when they reduce the residual (near a critical point the
        // derivative degenerates and a raw step would fly off).
        let mut res = (self.evaluate(z)? - w).norm();
        for _ in 0..3 {
            if res <= 1e-13 * (1.0 + w.norm()) {
                break;
            }
            let f = self.evaluate(z)? - w;
            let d = self.derivative(z)?;
            if d.norm() < 1e-300 {
                break;
            }
            let cand = z - f / d;
            match self.evaluate(cand) {
                Ok(v) if (v - w).norm() < res => {
                    res = (v - w).norm();
                    z = cand;
                }
                _ => break,
            }
        }
        debug_assert!(
            (self.evaluate(z).unwrap() - w).norm() <= 1e-9 * (1.0 + w.norm()),
            "inverse_branch residual too large"
        );
        Ok(z)
    }
}

/// Parameters of `z -> kπ sinh(z)`, i.e. `a = kπ/2`, `b = -kπ/2`.
pub fn sinh_family_params(k: i64) -> MapParams {
    assert!(k != 0, "k must be nonzero");
    // build b with a positive-zero imaginary part: negating the complex
    // value would give -0.0 and flip the principal square root in v
    let half = k as f64 * PI / 2.0;
    MapParams::new(Complex64::new(half, 0.0), Complex64::new(-half, 0.0)).expect("k nonzero")
}

/// Solves for a member of the family `E(z) = 2a sinh(z)` (b = -a) whose two
/// critical values map to repelling fixed points.
///
/// With `v = 2ia` the requirement `E(E(v)) = E(v)` reduces (using the
/// 2πi-periodicity of E: `E(v) = v - 2πik` forces a fixed point) to the real
/// condition `a (1 - sin 2a) = πk`.  A coarse scan brackets the root, Newton
/// refines it.
pub fn solve_fixed_value_family(k: i64, seed: Option<Complex64>) -> Result<MapParams, MapError> {
    assert!(k != 0, "k must be nonzero");
    let target = PI * k as f64;
    let f = |a: Complex64| a * (1.0 - (2.0 * a).sin()) - target;
    let df = |a: Complex64| 1.0 - (2.0 * a).sin() - 2.0 * a * (2.0 * a).cos();

    let mut a = match seed {
        Some(s) => s,
        None => Complex64::new(default_fixed_value_seed(k), 0.0),
    };
    let max_iter = 200;
    let mut converged = false;
    let mut res = f(a).norm();
    for _ in 0..max_iter {
        if res < 1e-13 {
            converged = true;
            break;
        }
        let d = df(a);
        if d.norm() < 1e-300 {
            break;
        }
        let full = f(a) / d;
        // damped step: halve until the residual does not increase
        let mut lambda = 1.0;
        loop {
            let cand = a - lambda * full;
            let cand_res = f(cand).norm();
            if cand_res <= res || lambda < 1e-6 {
                a = cand;
                res = cand_res;
                break;
            }
            lambda *= 0.5;
        }
    }
    if !converged && res >= 1e-13 {
        return Err(MapError::NewtonDivergence(max_iter));
    }
    let params = MapParams::new(a, -a)?;

    // postcondition: both critical values map to fixed points, and those
    // fixed points are repelling
    for v in [params.v, params.v_prime] {
        let w = params.evaluate(v).map_err(|_| MapError::WrongBasin)?;
        let w2 = params.evaluate(w).map_err(|_| MapError::WrongBasin)?;
        if (w2 - w).norm() > 1e-10 {
            return Err(MapError::WrongBasin);
        }
        let mult = params.derivative(w).map_err(|_| MapError::WrongBasin)?;
        if mult.norm() <= 1.0 {
            return Err(MapError::WrongBasin);
        }
    }
    Ok(params)
}

/// Brackets the first sign change of `a(1 - sin 2a) - πk` on the real
/// half-axis with the sign of `k` and returns its midpoint as a Newton seed.
fn default_fixed_value_seed(k: i64) -> f64 {
    let target = PI * k as f64;
    let g = |a: f64| a * (1.0 - (2.0 * a).sin()) - target;
    let step = 0.005 * k.signum() as f64;
    let mut prev = g(0.0);
    for i in 1..200_000 {
        let xi = i as f64 * step;
        let gi = g(xi);
        if prev * gi <= 0.0 {
            return xi - 0.5 * step;
        }
        prev = gi;
    }
    PI * k as f64 / 2.0 // fallback; Newton will have to work from here
}

/// The postsingular set `P` of a postsingularly preperiodic map: the forward
/// orbits of both critical values, with cycle data.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PostsingularData {
    /// Forward-invariant finite list: orbit of `v`, then new points from the
    /// orbit of `v'`.
    pub points: Vec<Complex64>,
    pub preperiod_v: usize,
    pub preperiod_vprime: usize,
    pub period_v: usize,
    pub period_vprime: usize,
    /// One multiplier per critical value's terminal cycle.
    pub multipliers: Vec<Complex64>,
}

pub fn compute_postsingular(
    params: &MapParams,
    max_pre: usize,
    max_period: usize,
) -> Result<PostsingularData, MapError> {
    let (orbit_v, pre_v, per_v) = critical_orbit(params, params.v, max_pre, max_period)?;
    let (orbit_vp, pre_vp, per_vp) = critical_orbit(params, params.v_prime, max_pre, max_period)?;

    let mult = |orbit: &[Complex64], pre: usize, per: usize| -> Result<Complex64, MapError> {
        let mut m = Complex64::new(1.0, 0.0);
        for i in 0..per {
            m *= params.derivative(orbit[pre + i])?;
        }
        Ok(m)
    };
    let m_v = mult(&orbit_v, pre_v, per_v)?;
    let m_vp = mult(&orbit_vp, pre_vp, per_vp)?;
    if m_v.norm() <= 1.0 || m_vp.norm() <= 1.0 {
        return Err(MapError::WrongBasin);
    }

    let mut points = orbit_v.clone();
    for p in &orbit_vp {
        if !points.iter().any(|q| (q - p).norm() < 1e-8) {
            points.push(*p);
        }
    }
    Ok(PostsingularData {
        points,
        preperiod_v: pre_v,
        preperiod_vprime: pre_vp,
        period_v: per_v,
        period_vprime: per_vp,
        multipliers: vec![m_v, m_vp],
    })
}

/// Iterates a critical value until it closes up on a cycle; the cycle points
/// are then refined by Newton on `E^p(z) - z`.
fn critical_orbit(
    params: &MapParams,
    start: Complex64,
    max_pre: usize,
    max_period: usize,
) -> Result<(Vec<Complex64>, usize, usize), MapError> {
    let mut orbit = vec![start];
    for _ in 0..(max_pre + max_period + 1) {
        let last = *orbit.last().unwrap();
        if last.norm() > 1e12 {
            return Err(MapError::NotPreperiodic(
                "critical orbit escapes beyond 1e12".into(),
            ));
        }
        let next = params.evaluate(last).map_err(|_| {
            MapError::NotPreperiodic("critical orbit left the overflow-safe range".into())
        })?;
        // cycle entry: proximity to an earlier orbit point
        if let Some(j) = orbit.iter().position(|q| (q - next).norm() < 1e-9) {
            let pre = j;
            let per = orbit.len() - j;
            if pre > max_pre || per > max_period {
                return Err(MapError::NotPreperiodic(format!(
                    "cycle found with preperiod {pre}, period {per} beyond budget"
                )));
            }
            let refined = refine_cycle(params, orbit[j], per)?;
            // rebuild the cycle part of the orbit from the refined point
            orbit.truncate(j);
            let mut z = refined;
            for _ in 0..per {
                orbit.push(z);
                z = params.evaluate(z)?;
            }
            return Ok((orbit, pre, per));
        }
        orbit.push(next);
    }
    Err(MapError::NotPreperiodic(format!(
        "no cycle within preperiod {max_pre} + period {max_period}"
    )))
}

/// Newton on `E^p(z) - z` from a near-cycle point.
fn refine_cycle(params: &MapParams, guess: Complex64, period: usize) -> Result<Complex64, MapError> {
    let mut z = guess;
    for _ in 0..50 {
        let mut w = z;
        let mut dw = Complex64::new(1.0, 0.0);
        for _ in 0..period {
            dw *= params.derivative(w)?;
            w = params.evaluate(w)?;
        }
        let f = w - z;
        if f.norm() < 1e-13 {
            return Ok(z);
        }
        let d = dw - 1.0;
        if d.norm() < 1e-300 {
            break;
        }
        z -= f / d;
    }
    Ok(z)
}
