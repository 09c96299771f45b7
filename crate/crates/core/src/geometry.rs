//! Arcs, covers, partitions of unity and transition profiles on the circle.
//!
//! Everything downstream (diffeomorphism splitting, loop factorization, the
//! word calculus) consumes covers and the smooth weights built here.

use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};

/// Equality tolerance for arc arithmetic. Test fixtures use rational
/// multiples of 2*pi, whose differences cancel to well below this.
pub const ARC_EPS: f64 = 1e-12;

/// Slope headroom for transition profiles: |sigma'| <= 1 - SLOPE_MARGIN.
pub const SLOPE_MARGIN: f64 = 1e-6;

/// Wrap an angle to the canonical representative in [0, 2*pi).
pub fn wrap_angle(t: f64) -> f64 {
    let mut a = t % TAU;
    if a < 0.0 {
        a += TAU;
    }
    // t = -1e-17 wraps to TAU by rounding
    if a >= TAU {
        a = 0.0;
    }
    a
}

/// Signed angular difference in (-pi, pi].
pub fn angle_diff(a: f64, b: f64) -> f64 {
    let mut d = wrap_angle(a - b);
    if d > PI {
        d -= TAU;
    }
    d
}

/// A point on the standard circle, stored as an angle in [0, 2*pi).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CirclePoint {
    angle: f64,
}

impl CirclePoint {
    pub fn new(angle: f64) -> Self {
        CirclePoint {
            angle: wrap_angle(angle),
        }
    }

    pub fn angle(&self) -> f64 {
        self.angle
    }
}

/// A proper closed subarc of the circle: start angle plus a length in (0, 2*pi).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub start: f64,
    pub length: f64,
}

impl Interval {
    pub fn new(start: f64, length: f64) -> Result<Self> {
        if !(length > 0.0 && length < TAU) || !start.is_finite() {
            return Err(Error::MalformedInterval(length));
        }
        Ok(Interval {
            start: wrap_angle(start),
            length,
        })
    }

    /// End angle, wrapped.
    pub fn end(&self) -> f64 {
        wrap_angle(self.start + self.length)
    }

    pub fn midpoint(&self) -> f64 {
        wrap_angle(self.start + 0.5 * self.length)
    }

    /// Offset of `t` from the start, measured counterclockwise in [0, 2*pi).
    fn offset(&self, t: f64) -> f64 {
        wrap_angle(t - self.start)
    }

    /// Closed membership, consistent with wrap-around.
    pub fn contains(&self, t: f64) -> bool {
        self.offset(t) <= self.length + ARC_EPS
    }

    /// Open membership (interior).
    pub fn contains_interior(&self, t: f64) -> bool {
        let o = self.offset(t);
        o > ARC_EPS && o < self.length - ARC_EPS
    }

    /// Whether `other` is contained in `self` (as closed arcs, with slack `tol`).
    pub fn contains_interval(&self, other: &Interval, tol: f64) -> bool {
        let o = wrap_angle(other.start - self.start);
        let o = if o > TAU - tol { 0.0 } else { o };
        o <= self.length + tol && o + other.length <= self.length + tol
    }

    /// Grow the arc by `pad` on each side (capped below a full circle).
    pub fn enlarged(&self, pad: f64) -> Interval {
        let length = (self.length + 2.0 * pad).min(TAU - ARC_EPS);
        Interval {
            start: wrap_angle(self.start - pad),
            length,
        }
    }

    /// Intersection with another arc, as 0, 1 or 2 arcs.
    pub fn intersect(&self, other: &Interval) -> Vec<Interval> {
        // Work in coordinates where self starts at 0.
        let a_len = self.length;
        let b_start = wrap_angle(other.start - self.start);
        let b_len = other.length;
        let mut out = Vec::new();
        // Component beginning inside self.
        if b_start < a_len {
            let len = (a_len - b_start).min(b_len);
            if len > ARC_EPS {
                out.push(Interval {
                    start: wrap_angle(self.start + b_start),
                    length: len,
                });
            }
        }
        // Component wrapping past 2*pi back into self.
        let b_end = b_start + b_len;
        if b_end > TAU {
            let len = (b_end - TAU).min(a_len);
            if len > ARC_EPS {
                out.push(Interval {
                    start: self.start,
                    length: len,
                });
            }
        }
        out
    }

    /// Arc-length of the gap between two disjoint arcs (0 if they meet).
    pub fn distance(&self, other: &Interval) -> f64 {
        if !self.intersect(other).is_empty() {
            return 0.0;
        }
        let g1 = wrap_angle(other.start - self.start) - self.length;
        let g2 = wrap_angle(self.start - other.start) - other.length;
        g1.min(g2).max(0.0)
    }

    /// Union of two overlapping (or touching) arcs, if it is again a proper arc.
    pub fn union(&self, other: &Interval) -> Option<Interval> {
        let o = wrap_angle(other.start - self.start);
        let (start, span) = if o <= self.length + ARC_EPS {
            (self.start, self.length.max(o + other.length))
        } else {
            let o2 = wrap_angle(self.start - other.start);
            if o2 > other.length + ARC_EPS {
                return None;
            }
            (other.start, other.length.max(o2 + self.length))
        };
        if span >= TAU {
            return None;
        }
        Some(Interval {
            start: wrap_angle(start),
            length: span,
        })
    }
}

fn is_false(b: &bool) -> bool {
    !b
}

/// A cyclically ordered cover J_1..J_n of the circle with uniform overlap
/// half-width `d`: adjacent arcs meet in a single arc of length exactly 2d,
/// non-adjacent arcs are disjoint. In based mode the last/first pair meets
/// only at the base point.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Cover {
    pub intervals: Vec<Interval>,
    pub d: f64,
    #[serde(default)]
    pub based: Option<CirclePoint>,
    #[serde(default, skip_serializing_if = "is_false")]
    pub strong_separation: bool,
}

/// Per-invariant outcome of `validate_cover`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoverReport {
    pub n: usize,
    /// (j, j+1 cyclic, measured overlap length, pass)
    pub overlaps: Vec<(usize, usize, f64, bool)>,
    /// non-adjacent pairs that fail to be disjoint
    pub overlap_violations: Vec<(usize, usize)>,
    pub interiors_cover: bool,
    /// (j, j+2 cyclic, measured gap, pass) when strong separation is requested
    pub separations: Option<Vec<(usize, usize, f64, bool)>>,
    /// base point outside all interiors (based mode only)
    pub based_ok: Option<bool>,
    pub pass: bool,
}

/// Check the cover invariants and report exact overlap lengths and separations.
pub fn validate_cover(cover: &Cover) -> Result<CoverReport> {
    let n = cover.intervals.len();
    if n < 3 {
        return Err(Error::CoverTooSmall(n));
    }
    for iv in &cover.intervals {
        if !(iv.length > 0.0 && iv.length < TAU) {
            return Err(Error::MalformedInterval(iv.length));
        }
    }
    if !(cover.d > 0.0) {
        return Err(Error::InvalidCover(format!(
            "overlap half-width d = {} must be positive",
            cover.d
        )));
    }

    let ivs = &cover.intervals;
    let mut overlaps = Vec::new();
    let mut pass = true;
    for j in 0..n {
        let k = (j + 1) % n;
        let inter = ivs[j].intersect(&ivs[k]);
        let based_seam = cover.based.is_some() && k == 0;
        let (len, ok) = match (inter.len(), based_seam) {
            // Based covers close up at the base point only: J_n and J_1 may
            // meet in a single point (or not at all).
            (0, true) => {
                let p = cover.based.unwrap().angle();
                let touches = ivs[j].contains(p) && ivs[k].contains(p);
                (0.0, touches || ivs[j].distance(&ivs[k]) <= ARC_EPS)
            }
            (1, false) => {
                let len = inter[0].length;
                (len, (len - 2.0 * cover.d).abs() <= ARC_EPS)
            }
            (1, true) => (inter[0].length, inter[0].length <= ARC_EPS),
            _ => (inter.iter().map(|i| i.length).sum(), false),
        };
        pass &= ok;
        overlaps.push((j, k, len, ok));
    }

    let mut overlap_violations = Vec::new();
    for j in 0..n {
        for k in j + 1..n {
            let adjacent = k == j + 1 || (j == 0 && k == n - 1);
            if !adjacent && !ivs[j].intersect(&ivs[k]).is_empty() {
                overlap_violations.push((j, k));
                pass = false;
            }
        }
    }

    let interiors_cover = interiors_cover(cover);
    pass &= interiors_cover;

    let separations = if cover.strong_separation {
        let mut seps = Vec::new();
        for j in 0..n {
            let k = (j + 2) % n;
            if k == j || k == (j + 1) % n || (k + 1) % n == j {
                continue;
            }
            let gap = ivs[j].distance(&ivs[k]);
            let ok = gap > 6.0 * cover.d;
            pass &= ok;
            seps.push((j, k, gap, ok));
        }
        Some(seps)
    } else {
        None
    };

    let based_ok = cover.based.map(|p| {
        let ok = ivs.iter().all(|iv| !iv.contains_interior(p.angle()));
        pass &= ok;
        ok
    });

    Ok(CoverReport {
        n,
        overlaps,
        overlap_violations,
        interiors_cover,
        separations,
        based_ok,
        pass,
    })
}

fn interiors_cover(cover: &Cover) -> bool {
    // Sweep the circle: every angle (minus the base point in based mode)
    // must be interior to some interval. Probe endpoints and midpoints of
    // the arrangement; with finitely many arcs this is decisive.
    let covered = |t: f64| -> bool {
        let at_base = cover
            .based
            .map(|p| angle_diff(t, p.angle()).abs() <= ARC_EPS)
            .unwrap_or(false);
        at_base || cover.intervals.iter().any(|iv| iv.contains_interior(t))
    };
    let mut cuts: Vec<f64> = Vec::new();
    for iv in &cover.intervals {
        cuts.push(iv.start);
        cuts.push(iv.end());
    }
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let m = cuts.len();
    for i in 0..m {
        let a = cuts[i];
        let b = if i + 1 < m { cuts[i + 1] } else { cuts[0] + TAU };
        if !covered(wrap_angle(0.5 * (a + b))) || !covered(a) {
            return false;
        }
    }
    true
}

/// Build an evenly spaced cover of `n` arcs with overlap half-width `d`.
pub fn uniform_cover(n: usize, d: f64) -> Result<Cover> {
    if n < 3 {
        return Err(Error::CoverTooSmall(n));
    }
    let step = TAU / n as f64;
    let len = step + 2.0 * d;
    if len >= TAU {
        return Err(Error::InvalidCover(
            "overlap too large for this many intervals".into(),
        ));
    }
    let intervals = (0..n)
        .map(|k| Interval {
            start: wrap_angle(k as f64 * step - d),
            length: len,
        })
        .collect();
    Ok(Cover {
        intervals,
        d,
        based: None,
        strong_separation: false,
    })
}

// --- smooth profiles ------------------------------------------------------

/// Bump exp(-1/(1-x^2)) on (-1,1), identically zero outside.
pub fn bump(x: f64) -> f64 {
    if x.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - x * x)).exp()
    }
}

/// Monotone step from 0 at x<=-1 to 1 at x>=1, flat to infinite order at the
/// endpoints: (1 + tanh(x/(1-x^2)))/2. Closed form, so it can be evaluated
/// (and differentiated) anywhere without quadrature.
pub fn flat_step(x: f64) -> f64 {
    if x <= -1.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        0.5 * (1.0 + (x / (1.0 - x * x)).tanh())
    }
}

/// Derivative of `flat_step`. Its maximum over the real line is about 0.77.
pub fn flat_step_deriv(x: f64) -> f64 {
    if x.abs() >= 1.0 {
        return 0.0;
    }
    let q = 1.0 - x * x;
    let u = x / q;
    let sech = 1.0 / u.cosh();
    0.5 * sech * sech * (1.0 + x * x) / (q * q)
}

/// Smooth weights phi_i subordinate to a cover, summing to one everywhere.
///
/// Each weight is a normalized bump supported on its interval, so the sum is
/// exactly one wherever at least one bump is positive (everywhere, since the
/// interiors cover the circle).
#[derive(Debug, Clone)]
pub struct PartitionOfUnity {
    intervals: Vec<Interval>,
}

impl PartitionOfUnity {
    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn interval(&self, i: usize) -> &Interval {
        &self.intervals[i]
    }

    fn raw(&self, i: usize, t: f64) -> f64 {
        let iv = &self.intervals[i];
        let x = angle_diff(t, iv.midpoint()) / (0.5 * iv.length);
        bump(x)
    }

    /// Evaluate phi_i at angle t.
    pub fn eval(&self, i: usize, t: f64) -> f64 {
        let total: f64 = (0..self.intervals.len()).map(|j| self.raw(j, t)).sum();
        self.raw(i, t) / total
    }

    /// All weights at angle t (they sum to 1).
    pub fn eval_all(&self, t: f64) -> Vec<f64> {
        let raws: Vec<f64> = (0..self.intervals.len()).map(|j| self.raw(j, t)).collect();
        let total: f64 = raws.iter().sum();
        raws.iter().map(|r| r / total).collect()
    }
}

/// Build the partition of unity subordinate to a valid cover.
pub fn build_partition_of_unity(cover: &Cover) -> Result<PartitionOfUnity> {
    let report = validate_cover(cover)?;
    if !report.pass {
        return Err(Error::InvalidCover(format!(
            "cover fails validation: {report:?}"
        )));
    }
    Ok(PartitionOfUnity {
        intervals: cover.intervals.clone(),
    })
}

/// Orientation of a transition profile along the circle's positive direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SigmaOrientation {
    /// 0 before the arc, d after it.
    Rising,
    /// d before the arc, 0 after it.
    Falling,
}

/// Monotone profile sigma with values in [0, d]: constant on both sides of a
/// transition arc, strictly monotone across it, |sigma'| < 1.
#[derive(Debug, Clone)]
pub struct SigmaFunction {
    d: f64,
    center: f64,
    half_width: f64,
    orientation: SigmaOrientation,
}

impl SigmaFunction {
    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn transition_arc(&self) -> Interval {
        Interval {
            start: wrap_angle(self.center - self.half_width),
            length: 2.0 * self.half_width,
        }
    }

    /// Evaluate treating the argument as a real coordinate (line picture):
    /// the transition sits at `center +- half_width` on the real line.
    pub fn eval_line(&self, x: f64) -> f64 {
        let s = flat_step((x - self.center) / self.half_width);
        match self.orientation {
            SigmaOrientation::Rising => self.d * s,
            SigmaOrientation::Falling => self.d * (1.0 - s),
        }
    }

    /// Evaluate on the circle; the cut is placed at the antipode of the
    /// transition center, so "one side" and "the other" are the half-circles
    /// before and after the arc.
    pub fn eval_circle(&self, t: f64) -> f64 {
        let x = angle_diff(t, self.center) / self.half_width;
        let s = flat_step(x);
        match self.orientation {
            SigmaOrientation::Rising => self.d * s,
            SigmaOrientation::Falling => self.d * (1.0 - s),
        }
    }

    pub fn deriv_line(&self, x: f64) -> f64 {
        let s = flat_step_deriv((x - self.center) / self.half_width) / self.half_width;
        match self.orientation {
            SigmaOrientation::Rising => self.d * s,
            SigmaOrientation::Falling => -self.d * s,
        }
    }

    /// Maximum |sigma'| over a probe grid across the transition arc.
    pub fn max_slope(&self, probes: usize) -> f64 {
        let mut max = 0.0f64;
        for k in 0..=probes {
            let x = self.center - self.half_width
                + 2.0 * self.half_width * k as f64 / probes as f64;
            max = max.max(self.deriv_line(x).abs());
        }
        max
    }

    /// Internal constructor for the splitting algorithms, which transition
    /// across overlap arcs of length exactly 2d (shrunk by the slope margin
    /// so the public precondition below stays strict).
    pub(crate) fn for_overlap(d: f64, center: f64, orientation: SigmaOrientation) -> SigmaFunction {
        SigmaFunction {
            d,
            center: wrap_angle(center),
            half_width: d / (1.0 + SLOPE_MARGIN),
            orientation,
        }
    }
}

/// Build a transition profile of rise `d` across `transition_arc`.
///
/// The arc must have length at least 2d(1+margin); the returned profile is
/// verified to satisfy |sigma'| <= 1 - margin on a probe grid.
pub fn build_sigma(
    d: f64,
    transition_arc: Interval,
    orientation: SigmaOrientation,
) -> Result<SigmaFunction> {
    if !(d > 0.0) {
        return Err(Error::Precondition(format!("d = {d} must be positive")));
    }
    if transition_arc.length < 2.0 * d * (1.0 + SLOPE_MARGIN) {
        return Err(Error::TransitionTooShort {
            len: transition_arc.length,
            d,
        });
    }
    let sigma = SigmaFunction {
        d,
        center: transition_arc.midpoint(),
        half_width: 0.5 * transition_arc.length,
        orientation,
    };
    let max = sigma.max_slope(1 << 12);
    if max > 1.0 - SLOPE_MARGIN {
        return Err(Error::TransitionTooShort {
            len: transition_arc.length,
            d,
        });
    }
    Ok(sigma)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrap_and_diff() {
        assert!((wrap_angle(-0.1) - (TAU - 0.1)).abs() < 1e-15);
        assert!((angle_diff(0.1, TAU - 0.1) - 0.2).abs() < 1e-12);
        assert_eq!(wrap_angle(TAU), 0.0);
    }

    #[test]
    fn interval_membership_wraps() {
        let iv = Interval::new(TAU - 0.5, 1.0).unwrap();
        assert!(iv.contains(0.2));
        assert!(iv.contains(TAU - 0.2));
        assert!(!iv.contains(1.0));
        assert!(iv.contains_interior(0.0));
    }

    #[test]
    fn interval_intersection_components() {
        let a = Interval::new(0.0, 3.0).unwrap();
        let b = Interval::new(2.5, 4.0).unwrap();
        let inter = a.intersect(&b);
        // one overlap at [2.5, 3.0], one wrapping at [0, 2.5+4-tau]
        assert_eq!(inter.len(), 2);
        assert!((inter[0].length - 0.5).abs() < 1e-12);
        assert!((inter[1].length - (6.5 - TAU)).abs() < 1e-12);
    }

    #[test]
    fn uniform_cover_validates() {
        // 5 equal arcs of length 2*pi/5 + 0.2 with d = 0.1, evenly placed.
        let cover = uniform_cover(5, 0.1).unwrap();
        assert!((cover.intervals[0].length - (TAU / 5.0 + 0.2)).abs() < 1e-12);
        let report = validate_cover(&cover).unwrap();
        assert!(report.pass, "{report:?}");
        for (_, _, len, ok) in &report.overlaps {
            assert!(ok);
            assert!((len - 0.2).abs() < 1e-12);
        }
    }

    #[test]
    fn two_intervals_rejected() {
        let cover = Cover {
            intervals: vec![
                Interval::new(0.0, 4.0).unwrap(),
                Interval::new(3.0, 4.0).unwrap(),
            ],
            d: 0.5,
            based: None,
            strong_separation: false,
        };
        assert!(matches!(validate_cover(&cover), Err(Error::CoverTooSmall(2))));
    }

    #[test]
    fn unequal_overlaps_fail_with_report() {
        let mut cover = uniform_cover(5, 0.1).unwrap();
        // stretch one interval so one overlap becomes 0.3 and the next 0.2
        cover.intervals[1].length += 0.1;
        let report = validate_cover(&cover).unwrap();
        assert!(!report.pass);
        let bad: Vec<_> = report.overlaps.iter().filter(|o| !o.3).collect();
        assert_eq!(bad.len(), 1);
        assert_eq!((bad[0].0, bad[0].1), (1, 2));
        assert!((bad[0].2 - 0.3).abs() < 1e-12);
    }

    #[test]
    fn strong_separation_flag() {
        let mut cover = uniform_cover(5, 0.1).unwrap();
        cover.strong_separation = true;
        // gap between J_j and J_{j+2} is 2*pi/5 - 0.4 ~ 0.857 > 0.6
        let report = validate_cover(&cover).unwrap();
        assert!(report.pass, "{report:?}");
        let mut tight = uniform_cover(5, 0.2).unwrap();
        tight.strong_separation = true;
        // gap = 2*pi/5 - 0.4 ~ 0.857 < 6d = 1.2
        let report = validate_cover(&tight).unwrap();
        assert!(!report.pass);
    }

    #[test]
    fn partition_sums_to_one() {
        let cover = uniform_cover(3, 0.15).unwrap();
        let pu = build_partition_of_unity(&cover).unwrap();
        for k in 0..4096 {
            let t = TAU * k as f64 / 4096.0;
            let sum: f64 = pu.eval_all(t).iter().sum();
            assert!((sum - 1.0).abs() < 1e-12, "t={t} sum={sum}");
        }
    }

    #[test]
    fn partition_support_and_symmetry() {
        let cover = uniform_cover(3, 0.15).unwrap();
        let pu = build_partition_of_unity(&cover).unwrap();
        // deep inside J_2 only phi_2 is nonzero
        let t = cover.intervals[1].midpoint();
        let w = pu.eval_all(t);
        assert!((w[1] - 1.0).abs() < 1e-12);
        assert_eq!(w[0], 0.0);
        assert_eq!(w[2], 0.0);
        // center of the J_1/J_2 overlap: phi_1 = phi_2 = 1/2 by symmetry
        let overlap = cover.intervals[0].intersect(&cover.intervals[1]);
        let c = overlap[0].midpoint();
        let w = pu.eval_all(c);
        assert!((w[0] - 0.5).abs() < 1e-12);
        assert!((w[1] - 0.5).abs() < 1e-12);
        // supports contained in the cover intervals
        for k in 0..4096 {
            let t = TAU * k as f64 / 4096.0;
            for (i, iv) in cover.intervals.iter().enumerate() {
                if !iv.contains(t) {
                    assert_eq!(pu.eval(i, t), 0.0);
                }
            }
        }
    }

    #[test]
    fn sigma_valid_and_slope_bounded() {
        let arc = Interval::new(1.0, 0.25).unwrap();
        let sigma = build_sigma(0.1, arc, SigmaOrientation::Rising).unwrap();
        assert!(sigma.max_slope(1 << 14) <= 0.999999);
        // flat regions are exactly 0 and exactly d
        assert_eq!(sigma.eval_circle(0.5), 0.0);
        assert_eq!(sigma.eval_circle(1.6), 0.1);
    }

    #[test]
    fn sigma_too_short_arc() {
        let arc = Interval::new(0.0, 0.19).unwrap();
        assert!(matches!(
            build_sigma(0.1, arc, SigmaOrientation::Rising),
            Err(Error::TransitionTooShort { .. })
        ));
    }

    #[test]
    fn sigma_finite_difference_slope() {
        let arc = Interval::new(0.0, 0.25).unwrap();
        let sigma = build_sigma(0.1, arc, SigmaOrientation::Rising).unwrap();
        let n = 1 << 14;
        let h = 0.4 / n as f64;
        let mut max = 0.0f64;
        for k in 0..n {
            let x = -0.05 + k as f64 * h;
            let slope = (sigma.eval_line(x + h) - sigma.eval_line(x)) / h;
            max = max.max(slope.abs());
        }
        assert!(max <= 1.0 - 1e-7, "max fd slope {max}");
    }

    #[test]
    fn based_cover_point_seam() {
        // three arcs covering the circle minus a neighborhood structure at p = 0,
        // with J_3 and J_1 meeting exactly at p.
        let p = CirclePoint::new(0.0);
        let d = 0.1;
        let i1 = Interval::new(0.0, 2.3).unwrap();
        let i2 = Interval::new(2.3 - 2.0 * d, 2.3).unwrap();
        let i3 = Interval::new(4.6 - 4.0 * d, TAU - (4.6 - 4.0 * d)).unwrap();
        let cover = Cover {
            intervals: vec![i1, i2, i3],
            d,
            based: Some(p),
            strong_separation: false,
        };
        let report = validate_cover(&cover).unwrap();
        assert!(report.pass, "{report:?}");
        assert_eq!(report.based_ok, Some(true));
    }
}
