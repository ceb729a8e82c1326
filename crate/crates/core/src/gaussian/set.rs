//! Target sets: finite unions of intervals on the extended real line.
//!
//! A [`TargetSet`] is a nonempty, normalized, disjoint, sorted union of
//! intervals, each endpoint carrying an open/closed flag. Open/closed flags
//! matter only for lattice point-mass computations (exact small-instance laws,
//! lattice convolutions); every Gaussian quantity ignores them, as it must.
//!
//! Textual syntax: intervals like `(-inf,0]`, `[0,1]`, `(2,3)` joined by `u`
//! (or `U` / `∪`), e.g. `[0,1]u[2.5,inf)`. Parsing normalizes: intervals are
//! sorted and overlapping or touching intervals are merged (touching at a
//! point where at least one side is closed). `Display` prints the canonical
//! normalized form, and `parse ∘ display` is the identity on normalized sets.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One interval of a target set. `lo ≤ hi`; infinite endpoints are always
/// open; `lo == hi` requires both endpoints closed (a point).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub lo_open: bool,
    pub hi_open: bool,
}

impl Interval {
    fn is_valid(&self) -> bool {
        if self.lo.is_nan() || self.hi.is_nan() || self.lo > self.hi {
            return false;
        }
        if self.lo == f64::NEG_INFINITY && !self.lo_open {
            return false;
        }
        if self.hi == f64::INFINITY && !self.hi_open {
            return false;
        }
        if self.lo == self.hi && (self.lo_open || self.hi_open) {
            return false; // empty interval
        }
        if self.lo.is_infinite() && self.lo == self.hi {
            return false;
        }
        true
    }

    fn contains(&self, x: f64) -> bool {
        let above_lo = if self.lo_open { x > self.lo } else { x >= self.lo };
        let below_hi = if self.hi_open { x < self.hi } else { x <= self.hi };
        above_lo && below_hi
    }
}

/// A nonempty normalized union of intervals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetSet {
    intervals: Vec<Interval>,
}

impl TargetSet {
    /// Builds a set from raw intervals, validating and normalizing.
    pub fn new(intervals: Vec<Interval>) -> Result<Self> {
        if intervals.is_empty() {
            return Err(Error::InvalidParameter {
                name: "intervals",
                reason: "target set must be nonempty".into(),
            });
        }
        for iv in &intervals {
            if !iv.is_valid() {
                return Err(Error::InvalidParameter {
                    name: "intervals",
                    reason: format!(
                        "invalid interval [lo={}, hi={}, lo_open={}, hi_open={}]",
                        iv.lo, iv.hi, iv.lo_open, iv.hi_open
                    ),
                });
            }
        }
        Ok(Self::normalize(intervals))
    }

    /// Convenience constructor for a single interval.
    pub fn interval(lo: f64, hi: f64, lo_open: bool, hi_open: bool) -> Result<Self> {
        Self::new(vec![Interval { lo, hi, lo_open, hi_open }])
    }

    /// Closed interval `[lo, hi]`.
    pub fn closed(lo: f64, hi: f64) -> Result<Self> {
        Self::interval(lo, hi, false, false)
    }

    /// Left half-line `(−∞, hi]` (or `(−∞, hi)` if `open`).
    pub fn half_line_below(hi: f64, open: bool) -> Result<Self> {
        Self::interval(f64::NEG_INFINITY, hi, true, open)
    }

    /// Sorts and merges overlapping/touching intervals. Inputs are valid.
    fn normalize(mut intervals: Vec<Interval>) -> Self {
        // Closed endpoints sort before open ones at the same position so a
        // merge keeps the most inclusive flag.
        intervals.sort_by(|a, b| {
            a.lo.partial_cmp(&b.lo).unwrap().then(a.lo_open.cmp(&b.lo_open))
        });
        let mut merged: Vec<Interval> = Vec::with_capacity(intervals.len());
        for iv in intervals {
            match merged.last_mut() {
                Some(last) if touches_or_overlaps(last, &iv) => {
                    if iv.hi > last.hi {
                        last.hi = iv.hi;
                        last.hi_open = iv.hi_open;
                    } else if iv.hi == last.hi && !iv.hi_open {
                        last.hi_open = false;
                    }
                    if iv.lo == last.lo && !iv.lo_open {
                        last.lo_open = false;
                    }
                }
                _ => merged.push(iv),
            }
        }
        TargetSet { intervals: merged }
    }

    /// The normalized intervals, sorted and disjoint.
    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    /// Membership, honoring open/closed flags.
    pub fn contains(&self, x: f64) -> bool {
        // Sets in practice hold a handful of intervals; linear scan is fine.
        self.intervals.iter().any(|iv| iv.contains(x))
    }

    /// All finite endpoints (the topological boundary of the set).
    pub fn finite_endpoints(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for iv in &self.intervals {
            if iv.lo.is_finite() {
                out.push(iv.lo);
            }
            if iv.hi.is_finite() {
                out.push(iv.hi);
            }
        }
        out
    }

    /// Largest |finite endpoint|, or `None` for the full line.
    pub fn max_abs_endpoint(&self) -> Option<f64> {
        self.finite_endpoints()
            .into_iter()
            .map(f64::abs)
            .fold(None, |acc, v| Some(acc.map_or(v, |a: f64| a.max(v))))
    }

    /// True if some interval has positive length.
    pub fn has_interior(&self) -> bool {
        self.intervals.iter().any(|iv| iv.hi > iv.lo)
    }

    /// The translated set `A + dx`.
    pub fn translate(&self, dx: f64) -> TargetSet {
        let intervals = self
            .intervals
            .iter()
            .map(|iv| Interval { lo: iv.lo + dx, hi: iv.hi + dx, ..*iv })
            .collect();
        TargetSet { intervals }
    }

    /// The scaled set `a·A` for `a > 0`.
    pub fn scale(&self, a: f64) -> Result<TargetSet> {
        if !(a > 0.0) || !a.is_finite() {
            return Err(Error::InvalidParameter {
                name: "a",
                reason: format!("scale factor must be a positive finite real, got {a}"),
            });
        }
        let intervals = self
            .intervals
            .iter()
            .map(|iv| Interval { lo: iv.lo * a, hi: iv.hi * a, ..*iv })
            .collect();
        Ok(TargetSet { intervals })
    }

    /// ε-erosion `{x : [x−ε, x+ε] ⊆ A}`. Because a radius-ε ball is connected,
    /// erosion acts interval by interval on a normalized set. Returns `None`
    /// when the erosion is empty.
    pub fn erode(&self, eps: f64) -> Option<TargetSet> {
        let mut out = Vec::new();
        for iv in &self.intervals {
            let lo = iv.lo + eps;
            let hi = iv.hi - eps;
            let cand = Interval { lo, hi, lo_open: iv.lo_open, hi_open: iv.hi_open };
            if lo < hi || (lo == hi && !cand.lo_open && !cand.hi_open) {
                out.push(cand);
            }
        }
        if out.is_empty() {
            None
        } else {
            Some(TargetSet::normalize(out))
        }
    }

    /// ε-dilation `{x : dist(x, A) ≤ ε}`; always closed at finite endpoints.
    pub fn dilate(&self, eps: f64) -> TargetSet {
        let out = self
            .intervals
            .iter()
            .map(|iv| Interval {
                lo: iv.lo - eps,
                hi: iv.hi + eps,
                lo_open: iv.lo.is_infinite(),
                hi_open: iv.hi.is_infinite(),
            })
            .collect();
        TargetSet::normalize(out)
    }

    /// Closed ε-neighbourhood of the boundary (the finite endpoints); `None`
    /// when the set has no finite endpoint (the full line).
    pub fn boundary_dilate(&self, eps: f64) -> Option<TargetSet> {
        let eps_abs = eps.abs();
        let out: Vec<Interval> = self
            .finite_endpoints()
            .into_iter()
            .map(|e| Interval {
                lo: e - eps_abs,
                hi: e + eps_abs,
                lo_open: false,
                hi_open: false,
            })
            .collect();
        if out.is_empty() {
            None
        } else {
            Some(TargetSet::normalize(out))
        }
    }

    /// Parses the textual syntax described at module level.
    pub fn parse(input: &str) -> Result<Self> {
        let err = |reason: String| Error::SetParse { input: input.to_string(), reason };
        let cleaned: String = input.chars().filter(|c| !c.is_whitespace()).collect();
        if cleaned.is_empty() {
            return Err(err("empty expression".into()));
        }
        let mut intervals = Vec::new();
        for part in split_union(&cleaned) {
            if part.is_empty() {
                return Err(err("empty interval between union operators".into()));
            }
            let bytes = part.as_bytes();
            let lo_open = match bytes[0] {
                b'(' => true,
                b'[' => false,
                c => return Err(err(format!("interval must start with '(' or '[', got '{}'", c as char))),
            };
            let hi_open = match bytes[bytes.len() - 1] {
                b')' => true,
                b']' => false,
                c => return Err(err(format!("interval must end with ')' or ']', got '{}'", c as char))),
            };
            let inner = &part[1..part.len() - 1];
            let mut nums = inner.split(',');
            let (lo_s, hi_s) = match (nums.next(), nums.next(), nums.next()) {
                (Some(a), Some(b), None) => (a, b),
                _ => return Err(err(format!("interval `{part}` must contain exactly one comma"))),
            };
            let lo = parse_endpoint(lo_s).ok_or_else(|| err(format!("bad endpoint `{lo_s}`")))?;
            let hi = parse_endpoint(hi_s).ok_or_else(|| err(format!("bad endpoint `{hi_s}`")))?;
            let iv = Interval { lo, hi, lo_open, hi_open };
            if !iv.is_valid() {
                return Err(err(format!("invalid interval `{part}`")));
            }
            intervals.push(iv);
        }
        TargetSet::new(intervals)
    }
}

fn touches_or_overlaps(a: &Interval, b: &Interval) -> bool {
    // Pre: a.lo ≤ b.lo (sorted). Merge when they overlap, or touch at a point
    // that belongs to at least one side.
    if b.lo < a.hi {
        return true;
    }
    b.lo == a.hi && !(b.lo_open && a.hi_open)
}

fn split_union(s: &str) -> Vec<&str> {
    let mut parts = Vec::new();
    let mut start = 0;
    let mut depth = 0i32;
    for (i, c) in s.char_indices() {
        match c {
            '(' | '[' => depth += 1,
            ')' | ']' => depth -= 1,
            'u' | 'U' | '∪' if depth == 0 => {
                parts.push(&s[start..i]);
                start = i + c.len_utf8();
            }
            _ => {}
        }
    }
    parts.push(&s[start..]);
    parts
}

fn parse_endpoint(s: &str) -> Option<f64> {
    match s {
        "inf" | "+inf" | "infinity" | "+infinity" => Some(f64::INFINITY),
        "-inf" | "-infinity" => Some(f64::NEG_INFINITY),
        _ => {
            let v: f64 = s.parse().ok()?;
            v.is_finite().then_some(v)
        }
    }
}

fn fmt_endpoint(f: &mut fmt::Formatter<'_>, v: f64) -> fmt::Result {
    if v == f64::INFINITY {
        write!(f, "inf")
    } else if v == f64::NEG_INFINITY {
        write!(f, "-inf")
    } else {
        write!(f, "{v}")
    }
}

impl fmt::Display for TargetSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, iv) in self.intervals.iter().enumerate() {
            if i > 0 {
                write!(f, "u")?;
            }
            write!(f, "{}", if iv.lo_open { '(' } else { '[' })?;
            fmt_endpoint(f, iv.lo)?;
            write!(f, ",")?;
            fmt_endpoint(f, iv.hi)?;
            write!(f, "{}", if iv.hi_open { ')' } else { ']' })?;
        }
        Ok(())
    }
}

impl std::str::FromStr for TargetSet {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        TargetSet::parse(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_prints_canonically() {
        for (input, canonical) in [
            ("(-inf,0]", "(-inf,0]"),
            ("[0,1]", "[0,1]"),
            ("[0, 1] u [2, 3]", "[0,1]u[2,3]"),
            ("[2,3]U[0,1]", "[0,1]u[2,3]"),
            ("[0,1]u[1,2]", "[0,2]"),
            ("[0,1.5]u[1,2]", "[0,2]"),
            ("(0,1)u(1,2)", "(0,1)u(1,2)"),
            ("(0,1)u[1,2)", "(0,2)"),
            ("[-1,-1]", "[-1,-1]"),
            ("(-inf,inf)", "(-inf,inf)"),
            ("[0,1]u[0.5,0.75]", "[0,1]"),
        ] {
            let set = TargetSet::parse(input).unwrap();
            assert_eq!(set.to_string(), canonical, "input `{input}`");
            let reparsed = TargetSet::parse(&set.to_string()).unwrap();
            assert_eq!(reparsed, set, "round trip `{input}`");
        }
    }

    #[test]
    fn rejects_malformed_input() {
        for bad in [
            "", "[1,0]", "[inf,0]", "[-inf,0]", "(0,0)", "[0,0)", "(", "[0,1",
            "0,1]", "[a,b]", "[0;1]", "[0,1]x[2,3]", "[nan,1]", "[1,2,3]",
        ] {
            assert!(TargetSet::parse(bad).is_err(), "should reject `{bad}`");
        }
    }

    #[test]
    fn membership_honors_flags() {
        let set = TargetSet::parse("(0,1]u[2,3)").unwrap();
        assert!(!set.contains(0.0));
        assert!(set.contains(0.5));
        assert!(set.contains(1.0));
        assert!(set.contains(2.0));
        assert!(!set.contains(3.0));
        assert!(!set.contains(1.5));
        let half = TargetSet::parse("(-inf,0]").unwrap();
        assert!(half.contains(0.0));
        assert!(half.contains(-1e300));
        assert!(!half.contains(1e-12));
    }

    #[test]
    fn affine_maps_preserve_flags() {
        let set = TargetSet::parse("(0,1]").unwrap();
        let moved = set.translate(-0.5).scale(2.0).unwrap();
        assert_eq!(moved.to_string(), "(-1,1]");
    }

    #[test]
    fn erosion_and_dilation_match_interval_arithmetic() {
        let set = TargetSet::parse("[0,1]").unwrap();
        assert_eq!(set.erode(0.2).unwrap().to_string(), "[0.2,0.8]");
        assert_eq!(set.dilate(0.2).to_string(), "[-0.2,1.2]");
        let half = TargetSet::parse("(-inf,0]").unwrap();
        assert_eq!(half.erode(0.5).unwrap().to_string(), "(-inf,-0.5]");
        assert_eq!(half.dilate(0.5).to_string(), "(-inf,0.5]");
        // Erosion drops intervals that vanish and never crosses a gap.
        let pair = TargetSet::parse("[0,0.3]u[0.5,2]").unwrap();
        assert_eq!(pair.erode(0.2).unwrap().to_string(), "[0.7,1.8]");
        assert!(pair.erode(2.0).is_none());
        // Dilation merges across small gaps.
        assert_eq!(pair.dilate(0.2).to_string(), "[-0.2,2.2]");
        // Boundary neighbourhood.
        assert_eq!(
            set.boundary_dilate(0.1).unwrap().to_string(),
            "[-0.1,0.1]u[0.9,1.1]"
        );
        assert!(TargetSet::parse("(-inf,inf)").unwrap().boundary_dilate(0.1).is_none());
    }

    #[test]
    fn point_sets_and_interior() {
        let pt = TargetSet::parse("[2,2]").unwrap();
        assert!(pt.contains(2.0));
        assert!(!pt.has_interior());
        assert!(TargetSet::parse("[0,1]").unwrap().has_interior());
    }
}
