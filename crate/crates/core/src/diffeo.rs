//! Numerical circle and line diffeomorphisms: monotone interpolation of
//! sampled lifts, composition, inversion, and the displacement-splitting
//! algorithms that factor a small-displacement diffeomorphism over a cover.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::geometry::{
    angle_diff, wrap_angle, Cover, Interval, SigmaFunction, SigmaOrientation, ARC_EPS,
    SLOPE_MARGIN,
};

/// Bracket width at which the pointwise root solves terminate.
const ROOT_TOL: f64 = 1e-13;

// --- monotone piecewise-cubic interpolation -------------------------------

/// Slopes for cubic Hermite interpolation of strictly increasing samples on a
/// uniform grid: fourth-order centered estimates, clamped into [0, 3*min of
/// the adjacent secants] so the interpolant stays monotone (the clamp is
/// inactive for well-resolved smooth data).
fn monotone_slopes(sample: &dyn Fn(isize) -> f64, n: usize, h: f64) -> Vec<f64> {
    let mut slopes = Vec::with_capacity(n);
    for k in 0..n as isize {
        let est = (-sample(k + 2) + 8.0 * sample(k + 1) - 8.0 * sample(k - 1) + sample(k - 2))
            / (12.0 * h);
        let left = (sample(k) - sample(k - 1)) / h;
        let right = (sample(k + 1) - sample(k)) / h;
        let cap = 3.0 * left.min(right);
        slopes.push(est.clamp(0.0, cap));
    }
    slopes
}

fn hermite(f0: f64, f1: f64, m0: f64, m1: f64, h: f64, s: f64) -> f64 {
    let s2 = s * s;
    let s3 = s2 * s;
    f0 * (2.0 * s3 - 3.0 * s2 + 1.0)
        + h * m0 * (s3 - 2.0 * s2 + s)
        + f1 * (-2.0 * s3 + 3.0 * s2)
        + h * m1 * (s3 - s2)
}

// --- circle diffeomorphisms -----------------------------------------------

/// An orientation-preserving circle diffeomorphism, stored as samples of a
/// lift F with F(t + 2*pi) = F(t) + 2*pi (winding one, always).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CircleDiffeo {
    n: usize,
    lift: Vec<f64>,
    #[serde(skip)]
    slopes: Vec<f64>,
}

/// Witness that a diffeomorphism deviates from the identity only inside an
/// interval. `interval = None` means empty support.
#[derive(Debug, Clone)]
pub struct SupportCertificate {
    pub interval: Option<Interval>,
    pub tolerance: f64,
    pub max_deviation_outside: f64,
}

impl CircleDiffeo {
    /// Build from lift samples at t_k = 2*pi*k/n. Checks strict monotonicity
    /// (including the periodic seam) and recenters the lift by a multiple of
    /// 2*pi so the displacement is minimal.
    pub fn from_lift(lift: Vec<f64>) -> Result<Self> {
        let n = lift.len();
        if n < 16 || !n.is_power_of_two() {
            return Err(Error::BadGridSize(n));
        }
        for k in 0..n - 1 {
            if !(lift[k + 1] > lift[k]) {
                return Err(Error::NotMonotone(k + 1));
            }
        }
        if !(lift[0] + TAU > lift[n - 1]) {
            return Err(Error::NotMonotone(0));
        }
        // ties-to-even keeps a displacement of exactly pi on the side it came in
        let shift = TAU * (lift[0] / TAU).round_ties_even();
        let lift: Vec<f64> = lift.iter().map(|v| v - shift).collect();
        let mut d = CircleDiffeo {
            n,
            lift,
            slopes: Vec::new(),
        };
        d.rebuild_slopes();
        Ok(d)
    }

    /// Sample a lift function (must satisfy F(t + 2*pi) = F(t) + 2*pi).
    pub fn from_fn(n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let lift = (0..n).map(|k| f(TAU * k as f64 / n as f64)).collect();
        Self::from_lift(lift)
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, |t| t).unwrap()
    }

    pub fn rotation(n: usize, a: f64) -> Self {
        Self::from_fn(n, |t| t + a).unwrap()
    }

    fn rebuild_slopes(&mut self) {
        let n = self.n;
        let lift = self.lift.clone();
        let sample = move |i: isize| {
            let m = n as isize;
            let q = i.div_euclid(m);
            lift[i.rem_euclid(m) as usize] + TAU * q as f64
        };
        self.slopes = monotone_slopes(&sample, n, TAU / n as f64);
    }

    pub fn n_samples(&self) -> usize {
        self.n
    }

    pub fn lift(&self) -> &[f64] {
        &self.lift
    }

    fn sample(&self, i: isize) -> f64 {
        let m = self.n as isize;
        let q = i.div_euclid(m);
        self.lift[i.rem_euclid(m) as usize] + TAU * q as f64
    }

    fn slope(&self, i: isize) -> f64 {
        self.slopes[i.rem_euclid(self.n as isize) as usize]
    }

    /// Evaluate the lift at an arbitrary real argument.
    pub fn eval(&self, t: f64) -> f64 {
        let h = TAU / self.n as f64;
        let j = (t / h).floor();
        let s = t / h - j;
        let j = j as isize;
        if s == 0.0 {
            return self.sample(j);
        }
        hermite(
            self.sample(j),
            self.sample(j + 1),
            self.slope(j),
            self.slope(j + 1),
            h,
            s,
        )
    }

    /// Solve F(t) = y by bisection on the monotone interpolant.
    pub fn eval_inverse(&self, y: f64) -> f64 {
        // shift y into the fundamental range of the lift
        let base = self.lift[0];
        let q = ((y - base) / TAU).floor();
        let y0 = y - TAU * q;
        // find the bracketing cell
        let mut lo_i = 0usize;
        let mut hi_i = self.n;
        while hi_i - lo_i > 1 {
            let mid = (lo_i + hi_i) / 2;
            if self.sample(mid as isize) <= y0 {
                lo_i = mid;
            } else {
                hi_i = mid;
            }
        }
        let h = TAU / self.n as f64;
        let lo = lo_i as f64 * h;
        let hi = lo + h;
        let g = |t: f64| self.eval(t) - y0;
        let fa = g(lo);
        let fb = g(hi);
        if fa >= 0.0 {
            return lo + TAU * q;
        }
        if fb <= 0.0 {
            return hi + TAU * q;
        }
        illinois(&g, lo, hi, fa, fb) + TAU * q
    }

    /// Sup over samples of |F(t) - t|.
    pub fn displacement(&self) -> f64 {
        let h = TAU / self.n as f64;
        self.lift
            .iter()
            .enumerate()
            .map(|(k, v)| (v - k as f64 * h).abs())
            .fold(0.0, f64::max)
    }

    /// Sup over samples of the lift difference with another diffeomorphism.
    pub fn sup_distance(&self, other: &CircleDiffeo) -> f64 {
        if self.n == other.n {
            self.lift
                .iter()
                .zip(&other.lift)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
        } else {
            let n = self.n.max(other.n);
            (0..n)
                .map(|k| {
                    let t = TAU * k as f64 / n as f64;
                    (self.eval(t) - other.eval(t)).abs()
                })
                .fold(0.0, f64::max)
        }
    }

    pub fn resample(&self, n: usize) -> Result<CircleDiffeo> {
        CircleDiffeo::from_fn(n, |t| self.eval(t))
    }

    /// Smallest arc outside of which the deviation from the identity stays
    /// below `eps`. Errors if every sample deviates (support = whole circle).
    pub fn support(&self, eps: f64) -> Result<SupportCertificate> {
        let h = TAU / self.n as f64;
        let moved: Vec<bool> = self
            .lift
            .iter()
            .enumerate()
            .map(|(k, v)| (v - k as f64 * h).abs() > eps)
            .collect();
        let count = moved.iter().filter(|&&m| m).count();
        if count == 0 {
            return Ok(SupportCertificate {
                interval: None,
                tolerance: eps,
                max_deviation_outside: 0.0,
            });
        }
        if count == self.n {
            return Err(Error::FullSupport(self.displacement()));
        }
        // largest circular run of quiet samples; the support is its complement,
        // padded by one grid cell.
        let (gap_start, gap_len) = largest_quiet_run(&moved);
        let sup_start = (gap_start + gap_len) % self.n;
        let sup_cells = self.n - gap_len;
        let interval = Interval::new(
            sup_start as f64 * h - h,
            ((sup_cells as f64 + 2.0) * h).min(TAU - 2.0 * ARC_EPS),
        )?;
        let mut max_out = 0.0f64;
        for k in 0..self.n {
            let t = k as f64 * h;
            if !interval.contains(t) {
                max_out = max_out.max((self.lift[k] - t).abs());
            }
        }
        Ok(SupportCertificate {
            interval: Some(interval),
            tolerance: eps,
            max_deviation_outside: max_out,
        })
    }
}

/// Longest circular run of `false` entries; returns (start index, length).
/// At least one `true` and one `false` entry required.
pub(crate) fn largest_quiet_run(moved: &[bool]) -> (usize, usize) {
    let n = moved.len();
    let first_moved = moved.iter().position(|&m| m).unwrap();
    let mut best = (0usize, 0usize);
    let mut run_start = None;
    for off in 1..=n {
        let idx = (first_moved + off) % n;
        if !moved[idx] {
            if run_start.is_none() {
                run_start = Some(idx);
            }
            let start = run_start.unwrap();
            let len = (idx + n - start) % n + 1;
            if len > best.1 {
                best = (start, len);
            }
        } else {
            run_start = None;
        }
    }
    best
}

/// Samples of phi(psi(t)); grids are unified by resampling to the finer one.
pub fn compose(phi: &CircleDiffeo, psi: &CircleDiffeo) -> Result<CircleDiffeo> {
    let n = phi.n.max(psi.n);
    let lift = (0..n)
        .map(|k| phi.eval(psi.eval(TAU * k as f64 / n as f64)))
        .collect();
    CircleDiffeo::from_lift(lift)
}

/// Left-to-right composition of a sequence: factors[0] applied last.
pub fn compose_all(factors: &[CircleDiffeo], n: usize) -> Result<CircleDiffeo> {
    let mut acc = CircleDiffeo::identity(n);
    for f in factors.iter().rev() {
        acc = compose(f, &acc)?;
    }
    Ok(acc)
}

/// Pointwise inverse via bisection on the monotone interpolant.
pub fn invert(phi: &CircleDiffeo) -> Result<CircleDiffeo> {
    let lift = (0..phi.n)
        .map(|k| phi.eval_inverse(TAU * k as f64 / phi.n as f64))
        .collect();
    CircleDiffeo::from_lift(lift)
}

// --- line diffeomorphisms -------------------------------------------------

/// A diffeomorphism of the real line sampled on a working window, equal to
/// the identity outside it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LineDiffeo {
    pub lo: f64,
    pub hi: f64,
    n: usize,
    lift: Vec<f64>,
    #[serde(skip)]
    slopes: Vec<f64>,
}

impl LineDiffeo {
    pub fn from_samples(lo: f64, hi: f64, lift: Vec<f64>) -> Result<Self> {
        let n = lift.len();
        if n < 16 {
            return Err(Error::BadGridSize(n));
        }
        for k in 0..n - 1 {
            if !(lift[k + 1] > lift[k]) {
                return Err(Error::NotMonotone(k + 1));
            }
        }
        let mut d = LineDiffeo {
            lo,
            hi,
            n,
            lift,
            slopes: Vec::new(),
        };
        d.rebuild_slopes();
        Ok(d)
    }

    pub fn from_fn(lo: f64, hi: f64, n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let h = (hi - lo) / (n - 1) as f64;
        let lift = (0..n).map(|k| f(lo + h * k as f64)).collect();
        Self::from_samples(lo, hi, lift)
    }

    pub fn identity(lo: f64, hi: f64, n: usize) -> Self {
        Self::from_fn(lo, hi, n, |t| t).unwrap()
    }

    fn rebuild_slopes(&mut self) {
        let n = self.n;
        let lift = self.lift.clone();
        let lo = self.lo;
        let hi = self.hi;
        let h = (hi - lo) / (n - 1) as f64;
        // identity extension outside the window
        let sample = move |i: isize| {
            if i < 0 {
                lo + h * i as f64
            } else if i >= n as isize {
                lo + h * i as f64
            } else {
                lift[i as usize]
            }
        };
        self.slopes = monotone_slopes(&sample, n, h);
    }

    pub fn n_samples(&self) -> usize {
        self.n
    }

    fn grid_h(&self) -> f64 {
        (self.hi - self.lo) / (self.n - 1) as f64
    }

    pub fn eval(&self, t: f64) -> f64 {
        if t <= self.lo || t >= self.hi {
            return t;
        }
        let h = self.grid_h();
        let x = (t - self.lo) / h;
        let j = (x.floor() as usize).min(self.n - 2);
        let s = x - j as f64;
        hermite(
            self.lift[j],
            self.lift[j + 1],
            self.slopes[j],
            self.slopes[j + 1],
            h,
            s,
        )
    }

    pub fn eval_inverse(&self, y: f64) -> f64 {
        if y <= self.lift[0] || y >= self.lift[self.n - 1] {
            return y;
        }
        let mut lo_i = 0usize;
        let mut hi_i = self.n - 1;
        while hi_i - lo_i > 1 {
            let mid = (lo_i + hi_i) / 2;
            if self.lift[mid] <= y {
                lo_i = mid;
            } else {
                hi_i = mid;
            }
        }
        let h = self.grid_h();
        let lo = self.lo + lo_i as f64 * h;
        let hi = lo + h;
        let g = |t: f64| self.eval(t) - y;
        let fa = g(lo);
        let fb = g(hi);
        if fa >= 0.0 {
            return lo;
        }
        if fb <= 0.0 {
            return hi;
        }
        illinois(&g, lo, hi, fa, fb)
    }

    pub fn displacement(&self) -> f64 {
        let h = self.grid_h();
        self.lift
            .iter()
            .enumerate()
            .map(|(k, v)| (v - (self.lo + h * k as f64)).abs())
            .fold(0.0, f64::max)
    }

    pub fn sup_distance(&self, other: &LineDiffeo) -> f64 {
        let n = self.n.max(other.n);
        let lo = self.lo.min(other.lo);
        let hi = self.hi.max(other.hi);
        let h = (hi - lo) / (n - 1) as f64;
        (0..n)
            .map(|k| {
                let t = lo + h * k as f64;
                (self.eval(t) - other.eval(t)).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Measured deviation from the identity outside [a, b].
    pub fn deviation_outside(&self, a: f64, b: f64) -> f64 {
        let h = self.grid_h();
        self.lift
            .iter()
            .enumerate()
            .map(|(k, v)| (self.lo + h * k as f64, v))
            .filter(|(t, _)| *t < a || *t > b)
            .map(|(t, v)| (v - t).abs())
            .fold(0.0, f64::max)
    }
}

pub fn compose_line(phi: &LineDiffeo, psi: &LineDiffeo) -> Result<LineDiffeo> {
    let lo = phi.lo.min(psi.lo);
    let hi = phi.hi.max(psi.hi);
    let n = phi.n.max(psi.n);
    LineDiffeo::from_fn(lo, hi, n, |t| phi.eval(psi.eval(t)))
}

pub fn invert_line(phi: &LineDiffeo) -> Result<LineDiffeo> {
    let n = phi.n;
    LineDiffeo::from_fn(phi.lo, phi.hi, n, |t| phi.eval_inverse(t))
}

// --- splitting ------------------------------------------------------------

/// Root of an increasing function on [a, b] with g(a) <= 0 <= g(b), by the
/// Illinois variant of regula falsi with a bisection safeguard.
fn illinois(g: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64, mut fa: f64, mut fb: f64) -> f64 {
    let mut side = 0i32;
    for _ in 0..128 {
        if b - a < ROOT_TOL {
            break;
        }
        let denom = fb - fa;
        let mut m = if denom.abs() > 0.0 {
            a - fa * (b - a) / denom
        } else {
            0.5 * (a + b)
        };
        // keep proposals safely interior
        let margin = 1e-3 * (b - a);
        if !(m > a + margin && m < b - margin) {
            m = 0.5 * (a + b);
        }
        let fm = g(m);
        if fm <= 0.0 {
            a = m;
            fa = fm;
            if side == -1 {
                fb *= 0.5;
            }
            side = -1;
        } else {
            b = m;
            fb = fm;
            if side == 1 {
                fa *= 0.5;
            }
            side = 1;
        }
    }
    0.5 * (a + b)
}

/// Solve (y - t) * d = delta * sigma(y) for y in the bracket [t, t + delta]
/// (or its mirror). The left side grows in y at rate d while the right moves
/// at most |delta| * |sigma'| < d, so the root is unique.
fn solve_split_sample(t: f64, delta: f64, d: f64, sigma: &dyn Fn(f64) -> f64) -> Option<f64> {
    if delta == 0.0 {
        return Some(t);
    }
    let g = |y: f64| (y - t) * d - delta * sigma(y);
    let (a, b) = if delta > 0.0 { (t, t + delta) } else { (t + delta, t) };
    let fa = g(a);
    let fb = g(b);
    if fa > 0.0 || fb < 0.0 {
        // endpoint roots up to rounding
        if fa.abs() <= 1e-12 * d {
            return Some(a);
        }
        if fb.abs() <= 1e-12 * d {
            return Some(b);
        }
        return None;
    }
    Some(illinois(&g, a, b, fa, fb))
}

/// Piecewise transition weight on the circle driving the splitting solver.
enum CircleSigma {
    /// Smooth transitions between the flat levels 0 (on the I_minus-only
    /// region) and d (on the I_plus-only region).
    Transitions {
        sigmas: Vec<SigmaFunction>,
        i_minus: Interval,
        i_plus: Interval,
        d: f64,
    },
    /// Single rising transition, jumping back to 0 at a cut angle placed far
    /// from everything that moves.
    Cut(CutSigma),
}

impl CircleSigma {
    fn eval(&self, t: f64) -> f64 {
        match self {
            CircleSigma::Transitions {
                sigmas,
                i_minus,
                i_plus,
                d,
            } => {
                // On an overlap arc the profile of the nearest transition
                // applies; its length-2d arc is a hair longer than the
                // margin-shrunk transition arc, and flat_step saturates on
                // the sliver in between, keeping sigma continuous there.
                if i_minus.contains(t) && i_plus.contains(t) {
                    let s = sigmas
                        .iter()
                        .min_by(|a, b| {
                            let da = angle_diff(t, a.transition_arc().midpoint()).abs();
                            let db = angle_diff(t, b.transition_arc().midpoint()).abs();
                            da.total_cmp(&db)
                        })
                        .expect("overlap transitions are nonempty");
                    return s.eval_circle(t);
                }
                if i_plus.contains(t) && !i_minus.contains(t) {
                    *d
                } else {
                    0.0
                }
            }
            CircleSigma::Cut(c) => c.eval(t),
        }
    }

    /// Constant value of sigma on [lo, hi] (lift coordinates), provided the
    /// arc avoids every transition (and the cut). None means "not flat".
    fn flat_on(&self, lo: f64, hi: f64) -> Option<f64> {
        let len = hi - lo;
        if !(len > 0.0) || len >= TAU {
            return None;
        }
        let arc = Interval {
            start: wrap_angle(lo),
            length: len,
        };
        match self {
            CircleSigma::Transitions { sigmas, .. } => {
                for s in sigmas {
                    if !arc.intersect(&s.transition_arc()).is_empty() {
                        return None;
                    }
                }
            }
            CircleSigma::Cut(c) => {
                if arc.contains(c.cut) || !arc.intersect(&c.transition_arc()).is_empty() {
                    return None;
                }
            }
        }
        Some(self.eval(wrap_angle(lo + 0.5 * len)))
    }
}

/// Core of the circle splitting lemma. For each sample t the phi_plus value
/// is the root y of (y - t) * d = delta(t) * sigma(y), and the phi_minus
/// value comes from the dual equation: with u = phi_plus^{-1}(t), which
/// solves u + delta(u) * sigma(t) / d = t, one has phi(u) = t + delta(u) *
/// (1 - sigma(t) / d). Wherever sigma is flat both have closed forms.
fn split_circle_with(
    phi: &CircleDiffeo,
    d: f64,
    sigma: &CircleSigma,
) -> Result<(CircleDiffeo, CircleDiffeo)> {
    let disp = phi.displacement();
    if !(disp < d) {
        return Err(Error::DisplacementTooLarge { disp, bound: d });
    }
    if disp == 0.0 {
        // the identity splits into exact identities
        return Ok((CircleDiffeo::identity(phi.n), CircleDiffeo::identity(phi.n)));
    }
    let n = phi.n;
    let h = TAU / n as f64;
    let pad = 1e-9;
    // interpolation between samples can overshoot the sampled displacement
    // by at most a grid cell (the interpolant is monotone)
    let reach = disp + 2.0 * h + pad;
    let samples: Vec<(Option<f64>, Option<f64>)> = (0..n)
        .into_par_iter()
        .map(|k| {
            let t = k as f64 * h;
            let delta = phi.lift[k] - t;
            let plus = if delta == 0.0 {
                Some(t)
            } else {
                let (a, b) = if delta > 0.0 { (t, t + delta) } else { (t + delta, t) };
                match sigma.flat_on(a - pad, b + pad) {
                    Some(c) => Some(t + delta * c / d),
                    None => solve_split_sample(t, delta, d, &|y| sigma.eval(y)),
                }
            };
            let s = sigma.eval(t);
            let minus = if s <= 0.0 {
                Some(phi.lift[k])
            } else if s >= d {
                Some(t)
            } else {
                let w = s / d;
                let g = |u: f64| u + (phi.eval(u) - u) * w - t;
                let a = t - reach * w;
                let b = t + reach * w;
                let fa = g(a);
                let fb = g(b);
                if fa > 0.0 || fb < 0.0 {
                    None
                } else {
                    let u = illinois(&g, a, b, fa, fb);
                    Some(t + (phi.eval(u) - u) * (1.0 - w))
                }
            };
            (minus, plus)
        })
        .collect();
    let mut lift_minus = Vec::with_capacity(n);
    let mut lift_plus = Vec::with_capacity(n);
    for (k, (m, p)) in samples.iter().enumerate() {
        match (m, p) {
            (Some(m), Some(p)) => {
                lift_minus.push(*m);
                lift_plus.push(*p);
            }
            _ => return Err(Error::BracketFailure(k)),
        }
    }
    Ok((
        CircleDiffeo::from_lift(lift_minus)?,
        CircleDiffeo::from_lift(lift_plus)?,
    ))
}

/// Split a small-displacement line diffeomorphism into a part supported left
/// of the transition and a part supported right of it: phi = phi_minus o
/// phi_plus with supp(phi_plus) in [c - d, inf) and supp(phi_minus) in
/// (-inf, c + d], where c is the transition center of sigma.
pub fn split_line(
    phi: &LineDiffeo,
    d: f64,
    sigma: &SigmaFunction,
) -> Result<(LineDiffeo, LineDiffeo)> {
    let disp = phi.displacement();
    if !(disp < d) {
        return Err(Error::DisplacementTooLarge { disp, bound: d });
    }
    if disp == 0.0 {
        // the identity splits into exact identities
        return Ok((phi.clone(), phi.clone()));
    }
    let n = phi.n;
    let h = phi.grid_h();
    let roots: Vec<Option<f64>> = (0..n)
        .into_par_iter()
        .map(|k| {
            let t = phi.lo + k as f64 * h;
            let delta = phi.lift[k] - t;
            solve_split_sample(t, delta, d, &|y| sigma.eval_line(y))
        })
        .collect();
    let mut lift_plus = Vec::with_capacity(n);
    for (k, r) in roots.iter().enumerate() {
        match r {
            Some(y) => lift_plus.push(*y),
            None => return Err(Error::BracketFailure(k)),
        }
    }
    let phi_plus = LineDiffeo::from_samples(phi.lo, phi.hi, lift_plus)?;
    let phi_minus = compose_line(phi, &invert_line(&phi_plus)?)?;
    Ok((phi_minus, phi_plus))
}

/// The two overlap components of I_minus and I_plus, with the transition
/// orientation sigma needs across each (0 on the I_minus-only side, d on the
/// I_plus-only side).
fn overlap_transitions(
    i_minus: &Interval,
    i_plus: &Interval,
    d: f64,
) -> Result<Vec<SigmaFunction>> {
    let comps = i_minus.intersect(i_plus);
    if comps.len() != 2 {
        return Err(Error::Precondition(format!(
            "I_minus and I_plus must overlap in exactly two arcs, got {}",
            comps.len()
        )));
    }
    let mut sigmas = Vec::new();
    for c in &comps {
        if (c.length - 2.0 * d).abs() > 1e-9 {
            return Err(Error::Precondition(format!(
                "overlap component has length {}, expected {}",
                c.length,
                2.0 * d
            )));
        }
        let after = wrap_angle(c.end() + 1e-9);
        let orientation = if i_plus.contains(after) && !i_minus.contains(after) {
            SigmaOrientation::Rising
        } else if i_minus.contains(after) && !i_plus.contains(after) {
            SigmaOrientation::Falling
        } else {
            return Err(Error::Precondition(
                "could not orient overlap transition".into(),
            ));
        };
        sigmas.push(SigmaFunction::for_overlap(d, c.midpoint(), orientation));
    }
    Ok(sigmas)
}

/// Lemma-style circle split: phi = phi_minus o phi_plus with supports in
/// I_minus and I_plus, which must cover the circle and intersect in two arcs
/// of length 2d each.
pub fn split_circle(
    phi: &CircleDiffeo,
    i_minus: &Interval,
    i_plus: &Interval,
    d: f64,
) -> Result<(CircleDiffeo, CircleDiffeo)> {
    if i_minus.length + i_plus.length < TAU {
        return Err(Error::Precondition(
            "I_minus and I_plus do not cover the circle".into(),
        ));
    }
    let sigma = CircleSigma::Transitions {
        sigmas: overlap_transitions(i_minus, i_plus, d)?,
        i_minus: *i_minus,
        i_plus: *i_plus,
        d,
    };
    split_circle_with(phi, d, &sigma)
}

/// Split with a single rising transition centered at `transition_center`:
/// phi = phi_minus o phi_plus where phi_plus is supported counterclockwise of
/// the transition (up to the cut angle) and phi_minus is supported from the
/// cut up to the transition plus d of slack. The cut must be at least d away
/// from everything phi moves and from the transition arc.
pub fn split_at_cut(
    phi: &CircleDiffeo,
    transition_center: f64,
    cut: f64,
    d: f64,
) -> Result<(CircleDiffeo, CircleDiffeo)> {
    let sigma = CircleSigma::Cut(CutSigma::new(d, transition_center, cut));
    split_circle_with(phi, d, &sigma)
}

/// One-sided circle sigma used while peeling an arc-supported remainder:
/// rises across the transition arc, stays at d counterclockwise until the cut
/// angle, and is 0 from the cut to the transition. The cut must be at least
/// d away from everything that moves.
struct CutSigma {
    d: f64,
    cut: f64,
    theta_center: f64,
    half_width: f64,
}

impl CutSigma {
    fn new(d: f64, transition_center: f64, cut: f64) -> Self {
        CutSigma {
            d,
            cut,
            theta_center: wrap_angle(transition_center - cut),
            half_width: d / (1.0 + SLOPE_MARGIN),
        }
    }

    fn eval(&self, t: f64) -> f64 {
        let theta = wrap_angle(t - self.cut);
        self.d * crate::geometry::flat_step((theta - self.theta_center) / self.half_width)
    }

    fn transition_arc(&self) -> Interval {
        Interval {
            start: wrap_angle(self.cut + self.theta_center - self.half_width),
            length: 2.0 * self.half_width,
        }
    }
}

/// Factor a small-displacement circle diffeomorphism over a validated cover:
/// phi = phi_1 o ... o phi_n with supp(phi_j) in J_j and every factor of
/// displacement below d. Deterministic given phi and the cover.
pub fn factor_over_cover(phi: &CircleDiffeo, cover: &Cover) -> Result<Vec<CircleDiffeo>> {
    let report = crate::geometry::validate_cover(cover)?;
    if !report.pass {
        return Err(Error::InvalidCover(format!("{report:?}")));
    }
    let d = cover.d;
    let disp = phi.displacement();
    if !(disp < d) {
        return Err(Error::DisplacementTooLarge { disp, bound: d });
    }
    let n_iv = cover.intervals.len();

    // The factors have features on the scale of the transition width, so they
    // are returned on a finer grid than the input: composing their
    // interpolants then reproduces phi well below the 1e-8 contract.
    let phi_work;
    let phi = if phi.n < (1 << 16) {
        phi_work = phi.resample((phi.n * 2).min(1 << 16))?;
        &phi_work
    } else {
        phi
    };

    // tails[j - 1] = A_j = J_j u ... u J_{n-1}, for j >= 1 (zero-based)
    let mut tails: Vec<Interval> = vec![*cover.intervals.last().unwrap()];
    for j in (1..n_iv - 1).rev() {
        let prev = tails.last().unwrap();
        let u = cover.intervals[j].union(prev).ok_or_else(|| {
            Error::InvalidCover("cover tail union is not an arc".into())
        })?;
        tails.push(u);
    }
    tails.reverse();

    let mut factors = Vec::with_capacity(n_iv);

    // First split: J_1 against the union of the rest (two overlap arcs).
    let (phi_1, mut rest) = split_circle(phi, &cover.intervals[0], &tails[0], d)?;
    factors.push(phi_1);

    // Peel J_2 .. J_{n-1} with one-sided splits.
    for j in 1..n_iv - 1 {
        let overlap = cover.intervals[j].intersect(&cover.intervals[j + 1]);
        let overlap = overlap.first().ok_or_else(|| {
            Error::InvalidCover(format!("intervals {} and {} do not overlap", j, j + 1))
        })?;
        // cut in the middle of the complement of A_j
        let a_j = &tails[j - 1];
        let complement_len = TAU - a_j.length;
        if complement_len <= 2.0 * d + 4.0 * ARC_EPS {
            return Err(Error::Precondition(format!(
                "no room to cut the circle while peeling interval {j}"
            )));
        }
        let cut = wrap_angle(a_j.end() + 0.5 * complement_len);
        let sigma = CircleSigma::Cut(CutSigma::new(d, overlap.midpoint(), cut));
        let (phi_j, next) = split_circle_with(&rest, d, &sigma)?;
        factors.push(phi_j);
        rest = next;
    }
    factors.push(rest);
    Ok(factors)
}

/// Write phi as m factors of displacement disp(phi)/m via straight-line
/// interpolation of the lift: factor_i = F_{i/m} o F_{(i-1)/m}^{-1}.
pub fn factor_lift(phi: &CircleDiffeo, m: usize, d: f64) -> Result<Vec<CircleDiffeo>> {
    if m == 0 {
        return Err(Error::Precondition("m must be positive".into()));
    }
    let per = phi.displacement() / m as f64;
    if !(per < d) {
        return Err(Error::FactorCountTooSmall { m, per, d });
    }
    let n = phi.n;
    let stage = |s: f64| -> Result<CircleDiffeo> {
        let lift = (0..n)
            .map(|k| {
                let t = TAU * k as f64 / n as f64;
                (1.0 - s) * t + s * phi.lift[k]
            })
            .collect();
        CircleDiffeo::from_lift(lift)
    };
    let mut factors = Vec::with_capacity(m);
    let mut prev_inv = invert(&stage(0.0)?)?;
    for i in 1..=m {
        let cur = stage(i as f64 / m as f64)?;
        factors.push(compose(&cur, &prev_inv)?);
        prev_inv = invert(&cur)?;
    }
    factors.reverse(); // composition order: factors[0] o factors[1] o ... = phi
    Ok(factors)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{angle_diff, uniform_cover};

    const N: usize = 4096;

    fn bumpy(n: usize, c: f64, k: f64) -> CircleDiffeo {
        CircleDiffeo::from_fn(n, |t| t + c * (k * t).sin()).unwrap()
    }

    #[test]
    fn identity_laws() {
        let id = CircleDiffeo::identity(N);
        let psi = bumpy(N, 0.05, 3.0);
        let c = compose(&id, &psi).unwrap();
        assert!(c.sup_distance(&psi) < 1e-12);
        let c = compose(&psi, &id).unwrap();
        assert!(c.sup_distance(&psi) < 1e-12);
        assert_eq!(id.displacement(), 0.0);
        assert!(id.support(1e-9).unwrap().interval.is_none());
    }

    #[test]
    fn rotations_compose_exactly() {
        let a = CircleDiffeo::rotation(N, 0.7);
        let b = CircleDiffeo::rotation(N, 0.4);
        let c = compose(&a, &b).unwrap();
        let expect = CircleDiffeo::rotation(N, 1.1);
        assert!(c.sup_distance(&expect) < 1e-12);
        let inv = invert(&CircleDiffeo::rotation(N, 0.3)).unwrap();
        let expect = CircleDiffeo::rotation(N, -0.3);
        assert!(inv.sup_distance(&expect) < 1e-10);
    }

    #[test]
    fn inverse_law() {
        let phi = bumpy(N, 0.05, 3.0);
        let inv = invert(&phi).unwrap();
        let c = compose(&phi, &inv).unwrap();
        assert!(c.sup_distance(&CircleDiffeo::identity(N)) < 1e-9);
        // residual of the pointwise inverse itself
        let mut res = 0.0f64;
        for k in 0..N {
            let t = TAU * k as f64 / N as f64;
            res = res.max((phi.eval(inv.eval(t)) - t).abs());
        }
        assert!(res < 1e-10, "residual {res}");
    }

    #[test]
    fn rotation_support_is_everything() {
        let r = CircleDiffeo::rotation(N, 0.3);
        assert!((r.displacement() - 0.3).abs() < 1e-12);
        assert!(matches!(r.support(1e-6), Err(Error::FullSupport(_))));
    }

    #[test]
    fn bump_support_contained() {
        let arc = Interval::new(1.0, 1.2).unwrap();
        let phi = CircleDiffeo::from_fn(N, |t| {
            let x = angle_diff(t, arc.midpoint()) / (0.5 * arc.length);
            t + 0.05 * crate::geometry::bump(x) / crate::geometry::bump(0.0)
        })
        .unwrap();
        let cert = phi.support(1e-9).unwrap();
        let iv = cert.interval.unwrap();
        let padded = arc.enlarged(2.0 * TAU / N as f64);
        assert!(padded.contains_interval(&iv, 1e-9), "{iv:?}");
        assert!(cert.max_deviation_outside <= 1e-9);
    }

    #[test]
    fn split_line_identity_and_one_sided() {
        let sigma = crate::geometry::build_sigma(
            0.1,
            Interval::new(wrap_angle(-0.125), 0.25).unwrap(),
            SigmaOrientation::Rising,
        )
        .unwrap();
        let id = LineDiffeo::identity(-2.0, 2.0, 1024);
        let (m, p) = split_line(&id, 0.1, &sigma).unwrap();
        assert!(m.displacement() < 1e-12);
        assert!(p.displacement() < 1e-12);

        // support entirely right of the transition: phi_plus = phi
        let phi = LineDiffeo::from_fn(-2.0, 2.0, 1024, |t| {
            t + 0.08 * crate::geometry::bump((t - 1.0) / 0.5)
        })
        .unwrap();
        let (m, p) = split_line(&phi, 0.1, &sigma).unwrap();
        assert!(m.displacement() < 1e-10);
        assert!(p.sup_distance(&phi) < 1e-10);
    }

    #[test]
    fn split_line_contract() {
        let sigma = crate::geometry::build_sigma(
            0.1,
            Interval::new(wrap_angle(-0.125), 0.25).unwrap(),
            SigmaOrientation::Rising,
        )
        .unwrap();
        let phi = LineDiffeo::from_fn(-3.0, 3.0, 4096, |t| {
            t + 0.08 * crate::geometry::bump(t / 1.5)
        })
        .unwrap();
        let d = 0.1;
        let (m, p) = split_line(&phi, d, &sigma).unwrap();
        let recon = compose_line(&m, &p).unwrap();
        assert!(recon.sup_distance(&phi) < 1e-8);
        assert!(m.displacement() < d);
        assert!(p.displacement() < d);
        // supports: plus right of the transition start, minus left of its end
        let slack = 1e-3;
        assert!(p.deviation_outside(-0.125 - slack, f64::INFINITY) < 1e-9);
        assert!(m.deviation_outside(f64::NEG_INFINITY, 0.125 + slack) < 1e-9);
    }

    #[test]
    fn split_circle_contract() {
        // I_minus = [5.5, 5.5+3.2], I_plus covers the rest with 0.2 overlaps
        let d = 0.1;
        let i_minus = Interval::new(5.5, 3.2).unwrap();
        let i_plus = Interval::new(wrap_angle(5.5 + 3.2 - 0.2), TAU - 3.2 + 0.4).unwrap();
        let phi = bumpy(N, 0.016, 3.0); // displacement 0.048
        assert!(phi.displacement() < d);
        let (m, p) = split_circle(&phi, &i_minus, &i_plus, d).unwrap();
        let recon = compose(&m, &p).unwrap();
        assert!(recon.sup_distance(&phi) < 1e-8, "{}", recon.sup_distance(&phi));
        assert!(m.displacement() < d);
        assert!(p.displacement() < d);
        let h = TAU / N as f64;
        let cm = m.support(1e-9).unwrap().interval.unwrap();
        let cp = p.support(1e-9).unwrap().interval.unwrap();
        assert!(i_minus.enlarged(2.0 * h).contains_interval(&cm, 1e-9), "{cm:?}");
        assert!(i_plus.enlarged(2.0 * h).contains_interval(&cp, 1e-9), "{cp:?}");
    }

    #[test]
    fn split_circle_identity() {
        let d = 0.1;
        let i_minus = Interval::new(0.0, 3.2).unwrap();
        let i_plus = Interval::new(3.0, TAU - 2.8).unwrap();
        let id = CircleDiffeo::identity(1024);
        let (m, p) = split_circle(&id, &i_minus, &i_plus, d).unwrap();
        assert!(m.displacement() < 1e-12);
        assert!(p.displacement() < 1e-12);
    }

    #[test]
    fn split_rejects_large_displacement() {
        let d = 0.05;
        let i_minus = Interval::new(0.0, 3.2).unwrap();
        let i_plus = Interval::new(3.1, TAU - 3.0).unwrap();
        let phi = bumpy(1024, 0.1, 1.0);
        assert!(matches!(
            split_circle(&phi, &i_minus, &i_plus, d),
            Err(Error::DisplacementTooLarge { .. })
        ));
    }

    #[test]
    fn factor_over_cover_contract() {
        let cover = uniform_cover(5, 0.1).unwrap();
        let phi = CircleDiffeo::from_fn(N, |t| t + 0.04 * t.sin()).unwrap();
        let factors = factor_over_cover(&phi, &cover).unwrap();
        assert_eq!(factors.len(), 5);
        let recon = compose_all(&factors, N).unwrap();
        assert!(recon.sup_distance(&phi) < 1e-8, "{}", recon.sup_distance(&phi));
        let h = TAU / N as f64;
        for (j, f) in factors.iter().enumerate() {
            assert!(f.displacement() < cover.d, "factor {j}");
            let cert = f.support(1e-9).unwrap();
            if let Some(iv) = cert.interval {
                assert!(
                    cover.intervals[j].enlarged(2.0 * h).contains_interval(&iv, 1e-9),
                    "factor {j}: {iv:?} not in {:?}",
                    cover.intervals[j]
                );
            }
        }
    }

    #[test]
    fn factor_over_cover_identity_and_localized() {
        let cover = uniform_cover(5, 0.1).unwrap();
        let id = CircleDiffeo::identity(N);
        let factors = factor_over_cover(&id, &cover).unwrap();
        for f in &factors {
            assert!(f.displacement() < 1e-10);
        }
        // supported strictly inside J_3's private part: only factor 3 moves
        let j3 = &cover.intervals[2];
        let inner = Interval::new(wrap_angle(j3.start + 0.3), j3.length - 0.6).unwrap();
        let phi = CircleDiffeo::from_fn(N, |t| {
            let x = angle_diff(t, inner.midpoint()) / (0.5 * inner.length);
            t + 0.05 * crate::geometry::bump(x) / crate::geometry::bump(0.0)
        })
        .unwrap();
        let factors = factor_over_cover(&phi, &cover).unwrap();
        for (j, f) in factors.iter().enumerate() {
            if j == 2 {
                assert!(f.sup_distance(&phi) < 1e-8);
            } else {
                assert!(f.displacement() < 1e-8, "factor {j}: {}", f.displacement());
            }
        }
    }

    #[test]
    fn factor_lift_rotation() {
        let phi = CircleDiffeo::rotation(1024, std::f64::consts::PI);
        let factors = factor_lift(&phi, 32, 0.1).unwrap();
        assert_eq!(factors.len(), 32);
        let step = CircleDiffeo::rotation(1024, std::f64::consts::PI / 32.0);
        for f in &factors {
            assert!(f.sup_distance(&step) < 1e-10);
        }
    }

    #[test]
    fn factor_lift_generic() {
        let phi = CircleDiffeo::from_fn(N, |t| t + 0.7 * (0.3 + 0.2 * t.sin())).unwrap();
        let disp = phi.displacement();
        let factors = factor_lift(&phi, 16, 0.1).unwrap();
        let per = disp / 16.0;
        for f in &factors {
            assert!((f.displacement() - per).abs() < 1e-4, "{}", f.displacement());
        }
        let recon = compose_all(&factors, N).unwrap();
        assert!(recon.sup_distance(&phi) < 1e-8, "{}", recon.sup_distance(&phi));
        // m too small for the target bound
        assert!(matches!(
            factor_lift(&phi, 3, 0.1),
            Err(Error::FactorCountTooSmall { .. })
        ));
    }
}

