//! External addresses over the two-sided integer alphabet, the shift map,
//! the growth function `F(t) = e^t - 1`, exponential boundedness and
//! minimal potentials.
//!
//! An external address indexes a dynamic ray.  Only finitely-describable
//! addresses are supported: a finite prefix followed by either a periodic
//! block or a deterministic growth rule with an exponential-boundedness
//! certificate.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Which end of the plane the real parts of an orbit head for.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    /// Real parts tend to `-inf`.
    L,
    /// Real parts tend to `+inf`.
    R,
}

impl Side {
    pub fn flip(self) -> Side {
        match self {
            Side::L => Side::R,
            Side::R => Side::L,
        }
    }
}

/// One entry `s_k` of an external address: an integer strip index tagged
/// with a side.  Arithmetic uses only the integer part.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SymbolEntry {
    pub index: i64,
    pub side: Side,
}

impl SymbolEntry {
    pub fn new(index: i64, side: Side) -> Self {
        SymbolEntry { index, side }
    }

    pub fn r(index: i64) -> Self {
        Self::new(index, Side::R)
    }

    pub fn l(index: i64) -> Self {
        Self::new(index, Side::L)
    }

    pub fn abs_index(&self) -> u64 {
        self.index.unsigned_abs()
    }
}

impl fmt::Display for SymbolEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.side {
            Side::L => 'L',
            Side::R => 'R',
        };
        write!(f, "{}{}", self.index, tag)
    }
}

/// Tail of an address beyond the finite prefix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Tail {
    /// Repeats the block forever.  Bounded, hence exponentially bounded.
    Periodic(Vec<SymbolEntry>),
    /// Deterministic growth rule `|s_k| = round(F^(k-1)(x0))` with fixed
    /// side; `x0` doubles as the exponential-boundedness certificate.
    Growth { x0: f64, side: Side },
}

/// External address: finite prefix plus tail descriptor.
/// `entry(k)` is defined and deterministic for every `k >= 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExternalAddress {
    prefix: Vec<SymbolEntry>,
    tail: Tail,
}

#[derive(Debug, Error, PartialEq)]
pub enum AddressError {
    #[error("periodic tail block must be non-empty")]
    EmptyTail,
    #[error("address is not exponentially bounded (minimal potential is infinite)")]
    NotExponentiallyBounded,
    #[error("failed to parse address literal: {0}")]
    Parse(String),
}

impl ExternalAddress {
    pub fn new(prefix: Vec<SymbolEntry>, tail: Tail) -> Result<Self, AddressError> {
        if let Tail::Periodic(block) = &tail {
            if block.is_empty() {
                return Err(AddressError::EmptyTail);
            }
        }
        Ok(ExternalAddress { prefix, tail })
    }

    /// Purely periodic address `(block)^inf` with empty prefix.
    pub fn periodic(block: Vec<SymbolEntry>) -> Result<Self, AddressError> {
        Self::new(Vec::new(), Tail::Periodic(block))
    }

    /// The constant address `(entry)^inf`.
    pub fn constant(entry: SymbolEntry) -> Self {
        Self::periodic(vec![entry]).unwrap()
    }

    pub fn with_prefix(mut self, mut prefix: Vec<SymbolEntry>) -> Self {
        prefix.append(&mut self.prefix);
        self.prefix = prefix;
        self
    }

    pub fn prefix(&self) -> &[SymbolEntry] {
        &self.prefix
    }

    pub fn tail(&self) -> &Tail {
        &self.tail
    }

    /// The k-th entry, 1-indexed.  Growth-rule indices saturate at `i64::MAX`.
    pub fn entry(&self, k: usize) -> SymbolEntry {
        assert!(k >= 1, "entries are 1-indexed");
        if k <= self.prefix.len() {
            return self.prefix[k - 1];
        }
        let j = k - self.prefix.len(); // 1-indexed into the tail
        match &self.tail {
            Tail::Periodic(block) => block[(j - 1) % block.len()],
            Tail::Growth { x0, side } => {
                let g = growth_iterate(*x0, (j - 1) as u32);
                let idx = if g.saturated || g.value >= i64::MAX as f64 {
                    i64::MAX
                } else {
                    g.value.round() as i64
                };
                SymbolEntry::new(idx, *side)
            }
        }
    }

    /// |s_k| as a float, with a saturation flag for growth tails.
    fn entry_magnitude(&self, k: usize) -> GrowthValue {
        if k <= self.prefix.len() {
            return GrowthValue::exact(self.prefix[k - 1].abs_index() as f64);
        }
        let j = k - self.prefix.len();
        match &self.tail {
            Tail::Periodic(block) => {
                GrowthValue::exact(block[(j - 1) % block.len()].abs_index() as f64)
            }
            Tail::Growth { x0, .. } => growth_iterate(*x0, (j - 1) as u32),
        }
    }

    /// The shift `sigma`: drops the first entry, preserving the tail
    /// representation.
    pub fn shift(&self) -> ExternalAddress {
        if !self.prefix.is_empty() {
            return ExternalAddress {
                prefix: self.prefix[1..].to_vec(),
                tail: self.tail.clone(),
            };
        }
        match &self.tail {
            Tail::Periodic(block) => {
                let mut rotated = block[1..].to_vec();
                rotated.push(block[0]);
                ExternalAddress {
                    prefix: Vec::new(),
                    tail: Tail::Periodic(rotated),
                }
            }
            // round(F^(k-1)(F(x0))) = round(F^k(x0)): shifting advances the rule.
            Tail::Growth { x0, side } => ExternalAddress {
                prefix: Vec::new(),
                tail: Tail::Growth {
                    x0: growth_step(*x0),
                    side: *side,
                },
            },
        }
    }

    pub fn shifted(&self, times: usize) -> ExternalAddress {
        let mut s = self.clone();
        for _ in 0..times {
            s = s.shift();
        }
        s
    }

    /// Canonical representative: periodic blocks are reduced to their
    /// primitive period and trailing prefix entries are absorbed into the
    /// tail rotation, so equal addresses compare (and print) equal.
    pub fn canonical(&self) -> ExternalAddress {
        let Tail::Periodic(block) = &self.tail else {
            return self.clone();
        };
        // primitive period
        let mut block = block.clone();
        for p in 1..block.len() {
            if block.len() % p == 0 && (0..block.len()).all(|i| block[i] == block[i % p]) {
                block.truncate(p);
                break;
            }
        }
        // absorb prefix entries that merely repeat the tail
        let mut prefix = self.prefix.clone();
        while let Some(&last) = prefix.last() {
            if last == *block.last().unwrap() {
                prefix.pop();
                let tail_last = block.pop().unwrap();
                block.insert(0, tail_last);
            } else {
                break;
            }
        }
        ExternalAddress {
            prefix,
            tail: Tail::Periodic(block),
        }
    }

    /// Maximum |index| over prefix and periodic tail; `None` for growth tails.
    pub fn index_bound(&self) -> Option<u64> {
        match &self.tail {
            Tail::Periodic(block) => Some(
                self.prefix
                    .iter()
                    .chain(block.iter())
                    .map(|e| e.abs_index())
                    .max()
                    .unwrap_or(0),
            ),
            Tail::Growth { .. } => None,
        }
    }
}

/// The ray potential parameter `t >= 0`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct Potential(pub f64);

/// Result of iterating the growth function, with overflow saturation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GrowthValue {
    pub value: f64,
    pub saturated: bool,
}

impl GrowthValue {
    fn exact(v: f64) -> Self {
        GrowthValue {
            value: v,
            saturated: false,
        }
    }
}

/// Overflow cap for `growth_iterate`; values beyond it are reported as
/// saturated.
pub const GROWTH_CAP: f64 = 1e300;

/// One application of `F(t) = e^t - 1`.
pub fn growth_step(t: f64) -> f64 {
    t.exp_m1()
}

/// `F^(k)(t)` in floating point, saturating at [`GROWTH_CAP`].
pub fn growth_iterate(t: f64, k: u32) -> GrowthValue {
    debug_assert!(t >= 0.0);
    let mut v = t;
    for _ in 0..k {
        if v > GROWTH_CAP.ln() {
            return GrowthValue {
                value: GROWTH_CAP,
                saturated: true,
            };
        }
        v = growth_step(v);
        if v > GROWTH_CAP {
            return GrowthValue {
                value: GROWTH_CAP,
                saturated: true,
            };
        }
    }
    GrowthValue {
        value: v,
        saturated: false,
    }
}

/// Inverse growth step `F^(-1)(x) = ln(1 + x)`.
pub fn growth_step_inv(x: f64) -> f64 {
    x.ln_1p()
}

/// Default probe depth for boundedness and minimal-potential searches.
pub const DEFAULT_PROBE_DEPTH: usize = 40;

/// Checks `|s_k| <= F^(k-1)(x)` for some x on the grid `{1, 2, 4, ..., 2^20}`
/// over the probe depth.  Periodic and growth tails are exponentially bounded
/// by construction, so the certificate can only fail for pathological floats.
pub fn is_exponentially_bounded(s: &ExternalAddress, probe_depth: usize) -> bool {
    assert!(probe_depth >= 1);
    'grid: for e in 0..=20u32 {
        let x = (1u64 << e) as f64;
        for k in 1..=probe_depth {
            let bound = growth_iterate(x, (k - 1) as u32);
            if bound.saturated {
                continue; // dominated from here on
            }
            let mag = s.entry_magnitude(k);
            if mag.value > bound.value {
                continue 'grid;
            }
        }
        return true;
    }
    false
}

/// Numerical minimal potential `t_s`: the infimum of `t > 0` for which
/// `|s_k| / F^k(t) -> 0`.
///
/// Bounded-tail addresses return exactly 0.  Growth tails are resolved by
/// bisection of the decay predicate over the probe depth, accurate to `tol`.
pub fn minimal_potential(s: &ExternalAddress, tol: f64) -> Result<Potential, AddressError> {
    minimal_potential_with_depth(s, tol, DEFAULT_PROBE_DEPTH)
}

pub fn minimal_potential_with_depth(
    s: &ExternalAddress,
    tol: f64,
    probe_depth: usize,
) -> Result<Potential, AddressError> {
    if !is_exponentially_bounded(s, probe_depth) {
        return Err(AddressError::NotExponentiallyBounded);
    }
    match &s.tail {
        // |s_k| bounded while F^k(t) -> inf for every t > 0.
        Tail::Periodic(_) => Ok(Potential(0.0)),
        Tail::Growth { .. } => {
            let decays = |t: f64| ratio_decays(s, t, tol.min(1e-6), probe_depth);
            let mut hi = 1.0;
            while !decays(hi) {
                hi *= 2.0;
                if hi > 1e4 {
                    return Err(AddressError::NotExponentiallyBounded);
                }
            }
            let mut lo = 0.0;
            while hi - lo > tol {
                let mid = 0.5 * (lo + hi);
                if decays(mid) {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            Ok(Potential(0.5 * (lo + hi)))
        }
    }
}

/// True when `|s_k| / F^k(t)` is eventually decreasing below `tol` within the
/// probe depth.  Saturation of the denominator before the numerator counts as
/// decay; the reverse counts against it.
fn ratio_decays(s: &ExternalAddress, t: f64, tol: f64, probe_depth: usize) -> bool {
    if t <= 0.0 {
        return false;
    }
    let mut last_ratio = f64::INFINITY;
    let mut below = false;
    for k in 1..=probe_depth {
        let num = s.entry_magnitude(k);
        let den = growth_iterate(t, k as u32);
        match (num.saturated, den.saturated) {
            (false, true) => return true,
            (true, false) => return false,
            (true, true) => {
                // Compare one level down: both chains follow the same recursion,
                // so whichever was ahead stays ahead.
                return below || last_ratio < 1.0;
            }
            (false, false) => {
                let r = num.value / den.value;
                below = r < tol && r <= last_ratio;
                last_ratio = r;
            }
        }
    }
    below
}

// --- literal syntax ---------------------------------------------------------

/// Parses the address literal syntax, e.g. `3R 1L (0R 2R)*`: whitespace
/// separated entries, the `(...)*` block marks the periodic tail.
/// Round-trips bit-exactly with the `Display` impl.
pub fn parse_address(input: &str) -> Result<ExternalAddress, AddressError> {
    let input = input.trim();
    let (prefix_part, tail_part) = match input.find('(') {
        Some(open) => {
            let close = input
                .rfind(")*")
                .ok_or_else(|| AddressError::Parse("unterminated periodic block".into()))?;
            if close < open {
                return Err(AddressError::Parse("mismatched parentheses".into()));
            }
            let rest = input[close + 2..].trim();
            if !rest.is_empty() {
                return Err(AddressError::Parse(format!(
                    "trailing input after periodic block: {rest:?}"
                )));
            }
            (&input[..open], &input[open + 1..close])
        }
        None => {
            return Err(AddressError::Parse(
                "address needs a periodic tail block (...)* ".into(),
            ))
        }
    };
    let prefix = parse_entries(prefix_part)?;
    let block = parse_entries(tail_part)?;
    if block.is_empty() {
        return Err(AddressError::EmptyTail);
    }
    ExternalAddress::new(prefix, Tail::Periodic(block))
}

fn parse_entries(part: &str) -> Result<Vec<SymbolEntry>, AddressError> {
    part.split_whitespace().map(parse_entry).collect()
}

fn parse_entry(tok: &str) -> Result<SymbolEntry, AddressError> {
    let (num, tag) = tok.split_at(tok.len() - 1);
    let side = match tag {
        "L" => Side::L,
        "R" => Side::R,
        _ => {
            return Err(AddressError::Parse(format!(
                "entry {tok:?} must end in L or R"
            )))
        }
    };
    let index: i64 = num
        .parse()
        .map_err(|_| AddressError::Parse(format!("bad index in entry {tok:?}")))?;
    Ok(SymbolEntry { index, side })
}

impl fmt::Display for ExternalAddress {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.prefix {
            write!(f, "{e} ")?;
        }
        match &self.tail {
            Tail::Periodic(block) => {
                write!(f, "(")?;
                for (i, e) in block.iter().enumerate() {
                    if i > 0 {
                        write!(f, " ")?;
                    }
                    write!(f, "{e}")?;
                }
                write!(f, ")*")
            }
            Tail::Growth { x0, side } => write!(f, "<growth x0={x0} side={side:?}>"),
        }
    }
}

// --- itineraries ------------------------------------------------------------

/// A finite itinerary of half-integer strip labels `u in Z/2`, stored as
/// twice-the-value integers to stay exact.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Itinerary {
    doubled: Vec<i64>,
}

impl Itinerary {
    pub fn from_doubled(doubled: Vec<i64>) -> Self {
        Itinerary { doubled }
    }

    /// Itinerary of integer labels (convenience for tests).
    pub fn from_integers(labels: &[i64]) -> Self {
        Itinerary {
            doubled: labels.iter().map(|u| 2 * u).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.doubled.len()
    }

    pub fn is_empty(&self) -> bool {
        self.doubled.is_empty()
    }

    /// Twice the k-th label (0-indexed).
    pub fn doubled_entry(&self, k: usize) -> i64 {
        self.doubled[k]
    }

    pub fn doubled_entries(&self) -> &[i64] {
        &self.doubled
    }

    pub fn entry_as_f64(&self, k: usize) -> f64 {
        self.doubled[k] as f64 / 2.0
    }

    pub fn push_doubled(&mut self, d: i64) {
        self.doubled.push(d);
    }

    /// True when `self` matches `other` on all entries of the shorter one.
    pub fn agrees_with(&self, other: &Itinerary) -> bool {
        self.doubled
            .iter()
            .zip(other.doubled.iter())
            .all(|(a, b)| a == b)
    }
}

impl fmt::Display for Itinerary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, d) in self.doubled.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            if d % 2 == 0 {
                write!(f, "{}", d / 2)?;
            } else {
                write!(f, "{d}/2")?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn addr(lit: &str) -> ExternalAddress {
        parse_address(lit).unwrap()
    }

    #[test]
    fn canonical_reduces_period_and_prefix() {
        assert_eq!(addr("(0L 0L 0L)*").canonical().to_string(), "(0L)*");
        assert_eq!(addr("0L (0L)*").canonical().to_string(), "(0L)*");
        assert_eq!(
            addr("1R 0R (1L 0R)*").canonical().to_string(),
            "1R (0R 1L)*"
        );
        assert_eq!(addr("(1L 0R 1L 0R)*").canonical().to_string(), "(1L 0R)*");
        assert_eq!(addr("2R (0L)*").canonical().to_string(), "2R (0L)*");
    }

    #[test]
    fn growth_fixed_point_at_zero() {
        let g = growth_iterate(0.0, 5);
        assert_eq!(g.value, 0.0);
        assert!(!g.saturated);
    }

    #[test]
    fn growth_single_step() {
        let g = growth_iterate(1.0, 1);
        assert!((g.value - (std::f64::consts::E - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn growth_triple_step_matches_oracle() {
        // High-precision oracle: F(1) = e - 1, F^2(1) = e^(e-1) - 1, then one
        // more step, evaluated term by term.
        let f1 = std::f64::consts::E - 1.0;
        let f2 = f1.exp_m1();
        let oracle = f2.exp_m1();
        let g = growth_iterate(1.0, 3);
        assert!(!g.saturated);
        assert!((g.value - oracle).abs() <= 1e-9 * oracle.abs());
    }

    #[test]
    fn growth_saturates_and_reports() {
        let g = growth_iterate(10.0, 10);
        assert!(g.saturated);
        assert_eq!(g.value, GROWTH_CAP);
    }

    #[test]
    fn growth_strictly_increasing_in_t() {
        for k in 1..=4u32 {
            let mut prev = growth_iterate(0.0, k).value;
            for i in 1..40 {
                let t = i as f64 * 0.1;
                let v = growth_iterate(t, k);
                if v.saturated {
                    break;
                }
                assert!(v.value > prev, "F^{k} not increasing at t={t}");
                prev = v.value;
            }
        }
    }

    #[test]
    fn shift_of_constant_address_is_identity() {
        let s = addr("(0R)*");
        assert_eq!(s.shift(), s);
    }

    #[test]
    fn shift_drops_prefix_head() {
        let s = addr("3L 1R (0R)*");
        let expect = addr("1R (0R)*");
        assert_eq!(s.shift(), expect);
    }

    #[test]
    fn shift_rotates_periodic_block() {
        let s = addr("(1R 2L)*");
        let expect = addr("(2L 1R)*");
        assert_eq!(s.shift(), expect);
    }

    #[test]
    fn shift_period_p_restores_entries() {
        let s = addr("(1R -2L 0R)*");
        let shifted = s.shifted(3);
        for k in 1..=64 {
            assert_eq!(s.entry(k), shifted.entry(k));
        }
    }

    #[test]
    fn bounded_addresses_are_exponentially_bounded() {
        assert!(is_exponentially_bounded(&addr("(0R)*"), 40));
        assert!(is_exponentially_bounded(&addr("1000000R (0L)*"), 40));
    }

    #[test]
    fn growth_rule_is_exponentially_bounded_at_its_certificate() {
        let s = ExternalAddress::new(
            Vec::new(),
            Tail::Growth {
                x0: 2.0,
                side: Side::R,
            },
        )
        .unwrap();
        // direct check at x = 2 over the probe depth
        for k in 1..=20 {
            let bound = growth_iterate(2.0, (k - 1) as u32);
            let mag = s.entry_magnitude(k);
            assert!(mag.value <= bound.value + 0.5 || bound.saturated);
        }
        assert!(is_exponentially_bounded(&s, 40));
    }

    #[test]
    fn minimal_potential_of_bounded_addresses_is_zero() {
        assert_eq!(minimal_potential(&addr("(0R)*"), 1e-9).unwrap().0, 0.0);
        assert_eq!(minimal_potential(&addr("5R 5R (0R)*"), 1e-9).unwrap().0, 0.0);
    }

    #[test]
    fn minimal_potential_of_growth_rule_matches_analytic_value() {
        // |s_k| = round(F^(k-1)(3)): the ratio |s_k|/F^k(t) tends to zero
        // exactly when F(t) > 3, so t_s = ln 4.
        let s = ExternalAddress::new(
            Vec::new(),
            Tail::Growth {
                x0: 3.0,
                side: Side::R,
            },
        )
        .unwrap();
        let ts = minimal_potential(&s, 1e-9).unwrap().0;
        assert!((ts - 4f64.ln()).abs() < 1e-6, "t_s = {ts}");
        // brute-force the ratio just above and below
        assert!(ratio_decays(&s, 4f64.ln() + 0.01, 1e-6, 12));
        assert!(!ratio_decays(&s, 4f64.ln() - 0.01, 1e-6, 12));
    }

    #[test]
    fn minimal_potential_commutes_with_shift_via_growth() {
        // F(t_s) = t_{sigma(s)} for growth-rule addresses.
        for x0 in [2.0, 3.0, 5.0] {
            let s = ExternalAddress::new(
                Vec::new(),
                Tail::Growth {
                    x0,
                    side: Side::R,
                },
            )
            .unwrap();
            let ts = minimal_potential(&s, 1e-10).unwrap().0;
            let ts_shift = minimal_potential(&s.shift(), 1e-10).unwrap().0;
            assert!(
                (growth_step(ts) - ts_shift).abs() < 1e-6,
                "x0={x0}: F(t_s)={} vs {}",
                growth_step(ts),
                ts_shift
            );
        }
    }

    #[test]
    fn bounded_ratio_eventually_small() {
        // |s_k| <= 10^3 and t >= 0.1: ratio drops below 1e-6 within 30 steps.
        // (F^k(0.1) needs ~24 steps to clear 10^9, so a depth-20 probe is
        // just short for the worst case; 30 is comfortable.)
        let s = addr("1000R (999L 7R)*");
        for t in [0.1, 0.5, 2.0] {
            assert!(ratio_decays(&s, t, 1e-6, 30), "t={t}");
        }
    }

    #[test]
    fn literal_round_trip() {
        for lit in ["(0R)*", "3R 1L (0R 2R)*", "-2L (1R)*", "10R -3L (0L 0R -5L)*"] {
            let s = parse_address(lit).unwrap();
            assert_eq!(s.to_string(), lit);
            assert_eq!(parse_address(&s.to_string()).unwrap(), s);
        }
    }

    #[test]
    fn literal_rejects_garbage() {
        assert!(parse_address("").is_err());
        assert!(parse_address("3R").is_err()); // no tail
        assert!(parse_address("()*").is_err());
        assert!(parse_address("3X (0R)*").is_err());
        assert!(parse_address("(0R)* 1L").is_err());
    }

    #[test]
    fn itinerary_display_and_doubling() {
        let it = Itinerary::from_doubled(vec![0, 1, -2, 3]);
        assert_eq!(it.to_string(), "0 1/2 -1 3/2");
        assert_eq!(it.entry_as_f64(1), 0.5);
    }
}
