//! Grid-sampled loops into SU(n) and their exponential-chart factorizations:
//! the partition-of-unity splitting over a cover and the interpolation of a
//! continuous logarithm into small-chart factors.

use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::{PI, TAU};
use std::fmt;

use crate::error::{Error, Result};
use crate::geometry::{CirclePoint, Cover, Interval, PartitionOfUnity};
use crate::linalg::{
    assemble_log, det_defect, exp_anti_hermitian, eig_unitary, eye, frob, polar_unitarize,
    unitarity_defect, CMat,
};

/// Samples this close to an eigenvalue at -1 are outside the logarithm chart.
pub const CHART_EDGE: f64 = 1e-6;

/// Spectral radius bound for the chart ball used by `factor_small`.
pub const CHART_RADIUS: f64 = PI - 0.1;

const UNITARY_TOL: f64 = 1e-10;
const DRIFT_REPAIR: f64 = 1e-12;

/// Supported group descriptors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Group {
    SU(usize),
}

impl Group {
    /// Accepts "SU(2)", "su(2)", and "su2" style descriptors.
    pub fn parse(s: &str) -> Result<Group> {
        let lower = s.to_ascii_lowercase();
        let rest = lower
            .strip_prefix("su")
            .ok_or_else(|| Error::UnsupportedGroup(s.into()))?;
        let inner = rest
            .strip_prefix('(')
            .map(|r| r.strip_suffix(')').ok_or(()))
            .unwrap_or(Ok(rest))
            .map_err(|_| Error::UnsupportedGroup(s.into()))?;
        let n: usize = inner
            .parse()
            .map_err(|_| Error::UnsupportedGroup(s.into()))?;
        if n < 2 {
            return Err(Error::UnsupportedGroup(s.into()));
        }
        Ok(Group::SU(n))
    }

    pub fn matrix_size(&self) -> usize {
        match self {
            Group::SU(n) => *n,
        }
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Group::SU(n) => write!(f, "SU({n})"),
        }
    }
}

/// A single group element with verified unitarity and determinant.
#[derive(Debug, Clone)]
pub struct GroupElement {
    group: Group,
    m: CMat,
}

impl GroupElement {
    pub fn new(group: Group, m: CMat) -> Result<Self> {
        let n = group.matrix_size();
        if m.nrows() != n || m.ncols() != n {
            return Err(Error::GroupMismatch(
                group.to_string(),
                format!("{}x{} matrix", m.nrows(), m.ncols()),
            ));
        }
        let defect = unitarity_defect(&m).max(det_defect(&m));
        if defect > UNITARY_TOL {
            return Err(Error::NotUnitary(defect));
        }
        Ok(GroupElement { group, m })
    }

    pub fn identity(group: Group) -> Self {
        GroupElement {
            group,
            m: eye(group.matrix_size()),
        }
    }

    pub fn group(&self) -> Group {
        self.group
    }

    pub fn matrix(&self) -> &CMat {
        &self.m
    }
}

/// Witness that a loop is the identity outside an interval.
#[derive(Debug, Clone)]
pub struct LoopSupportCertificate {
    pub interval: Option<Interval>,
    pub tolerance: f64,
    pub max_deviation_outside: f64,
}

/// A loop into SU(n), sampled at t_k = 2*pi*k/n_samples.
#[derive(Debug, Clone)]
pub struct Loop {
    group: Group,
    values: Vec<CMat>,
}

impl Loop {
    pub fn new(group: Group, values: Vec<CMat>) -> Result<Self> {
        let n = values.len();
        if n < 16 || !n.is_power_of_two() {
            return Err(Error::BadGridSize(n));
        }
        let sz = group.matrix_size();
        for (k, v) in values.iter().enumerate() {
            if v.nrows() != sz || v.ncols() != sz {
                return Err(Error::GroupMismatch(
                    group.to_string(),
                    format!("sample {k}: {}x{} matrix", v.nrows(), v.ncols()),
                ));
            }
            let defect = unitarity_defect(v).max(det_defect(v));
            if defect > UNITARY_TOL {
                return Err(Error::NotUnitary(defect));
            }
        }
        Ok(Loop { group, values })
    }

    /// Sample a map t -> su(n) (anti-Hermitian traceless) and exponentiate.
    pub fn from_algebra_fn(group: Group, n: usize, f: impl Fn(f64) -> CMat) -> Result<Self> {
        let values = (0..n)
            .map(|k| exp_anti_hermitian(&f(TAU * k as f64 / n as f64)))
            .collect();
        Loop::new(group, values)
    }

    pub fn identity(group: Group, n: usize) -> Result<Self> {
        Loop::new(group, vec![eye(group.matrix_size()); n])
    }

    pub fn constant(g: &GroupElement, n: usize) -> Result<Self> {
        Loop::new(g.group(), vec![g.matrix().clone(); n])
    }

    pub fn group(&self) -> Group {
        self.group
    }

    pub fn n_samples(&self) -> usize {
        self.values.len()
    }

    pub fn value(&self, k: usize) -> &CMat {
        &self.values[k]
    }

    pub fn values(&self) -> &[CMat] {
        &self.values
    }

    pub fn angle(&self, k: usize) -> f64 {
        TAU * k as f64 / self.values.len() as f64
    }

    pub fn distance_to_identity(&self, k: usize) -> f64 {
        frob(&(&self.values[k] - eye(self.group.matrix_size())))
    }

    /// Sup over samples of the Frobenius distance to another loop.
    pub fn sup_distance(&self, other: &Loop) -> Result<f64> {
        check_compatible(self, other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| frob(&(a - b)))
            .fold(0.0, f64::max))
    }

    /// Max norm of the discrete second difference, scaled by 1/h^2; a proxy
    /// for the second derivative.
    pub fn smoothness_defect(&self) -> f64 {
        let n = self.values.len();
        let h = TAU / n as f64;
        (0..n)
            .map(|k| {
                let prev = &self.values[(k + n - 1) % n];
                let next = &self.values[(k + 1) % n];
                let second = next + prev - &self.values[k] * Complex64::new(2.0, 0.0);
                frob(&second) / (h * h)
            })
            .fold(0.0, f64::max)
    }

    /// Smallest arc outside of which the loop stays within `eps` of the
    /// identity. Errors if every sample deviates.
    pub fn support(&self, eps: f64) -> Result<LoopSupportCertificate> {
        let n = self.values.len();
        let h = TAU / n as f64;
        let moved: Vec<bool> = (0..n).map(|k| self.distance_to_identity(k) > eps).collect();
        let count = moved.iter().filter(|&&m| m).count();
        if count == 0 {
            return Ok(LoopSupportCertificate {
                interval: None,
                tolerance: eps,
                max_deviation_outside: 0.0,
            });
        }
        if count == n {
            return Err(Error::FullSupport(
                (0..n).map(|k| self.distance_to_identity(k)).fold(0.0, f64::max),
            ));
        }
        let (gap_start, gap_len) = crate::diffeo::largest_quiet_run(&moved);
        let sup_start = (gap_start + gap_len) % n;
        let sup_cells = n - gap_len;
        let interval = Interval::new(
            sup_start as f64 * h - h,
            ((sup_cells as f64 + 2.0) * h).min(TAU - 1e-12),
        )?;
        let mut max_out = 0.0f64;
        for k in 0..n {
            if !interval.contains(k as f64 * h) {
                max_out = max_out.max(self.distance_to_identity(k));
            }
        }
        Ok(LoopSupportCertificate {
            interval: Some(interval),
            tolerance: eps,
            max_deviation_outside: max_out,
        })
    }
}

fn check_compatible(a: &Loop, b: &Loop) -> Result<()> {
    if a.group != b.group {
        return Err(Error::GroupMismatch(a.group.to_string(), b.group.to_string()));
    }
    if a.values.len() != b.values.len() {
        return Err(Error::GridMismatch(a.values.len(), b.values.len()));
    }
    Ok(())
}

/// Pointwise product; unitarity drift beyond 1e-12 is repaired by polar
/// projection.
pub fn multiply(a: &Loop, b: &Loop) -> Result<Loop> {
    check_compatible(a, b)?;
    let values = a
        .values
        .iter()
        .zip(&b.values)
        .map(|(x, y)| {
            let p = x * y;
            if unitarity_defect(&p) > DRIFT_REPAIR {
                polar_unitarize(&p)
            } else {
                Ok(p)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Loop {
        group: a.group,
        values,
    })
}

/// Pointwise inverse (the adjoint, exact for unitary samples).
pub fn invert(a: &Loop) -> Loop {
    Loop {
        group: a.group,
        values: a.values.iter().map(|m| m.adjoint()).collect(),
    }
}

/// Product of a sequence, left to right: factors[0] * factors[1] * ...
pub fn multiply_all(factors: &[Loop]) -> Result<Loop> {
    let first = factors
        .first()
        .ok_or_else(|| Error::Precondition("empty factor list".into()))?;
    let mut acc = first.clone();
    for f in &factors[1..] {
        acc = multiply(&acc, f)?;
    }
    Ok(acc)
}

/// A sampled map into the complexified loop algebra: anti-Hermitian traceless
/// matrices per sample.
#[derive(Debug, Clone)]
pub struct LieLoop {
    group: Group,
    values: Vec<CMat>,
}

impl LieLoop {
    pub fn new(group: Group, values: Vec<CMat>) -> Result<Self> {
        let n = values.len();
        if n < 16 || !n.is_power_of_two() {
            return Err(Error::BadGridSize(n));
        }
        for (k, v) in values.iter().enumerate() {
            let defect = frob(&(v.adjoint() + v)).max(v.trace().norm());
            if defect > 1e-8 {
                return Err(Error::Precondition(format!(
                    "sample {k} is not anti-Hermitian traceless (defect {defect})"
                )));
            }
        }
        Ok(LieLoop { group, values })
    }

    pub fn group(&self) -> Group {
        self.group
    }

    pub fn n_samples(&self) -> usize {
        self.values.len()
    }

    pub fn value(&self, k: usize) -> &CMat {
        &self.values[k]
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(frob).fold(0.0, f64::max)
    }

    pub fn sup_distance(&self, other: &LieLoop) -> Result<f64> {
        if self.values.len() != other.values.len() {
            return Err(Error::GridMismatch(self.values.len(), other.values.len()));
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| frob(&(a - b)))
            .fold(0.0, f64::max))
    }

    /// Pointwise exponential.
    pub fn exp(&self) -> Result<Loop> {
        let values = self.values.iter().map(exp_anti_hermitian).collect();
        Loop::new(self.group, values)
    }

    /// Fourier modes X_m = (1/N) sum_k X(t_k) e^{-i m t_k} for |m| <= mmax,
    /// returned with index offset mmax (entry mmax + m is mode m).
    pub fn fourier_modes(&self, mmax: usize) -> Vec<CMat> {
        let n = self.values.len();
        let sz = self.group.matrix_size();
        let mut planner = rustfft::FftPlanner::new();
        let fft = planner.plan_fft_forward(n);
        let mut modes = vec![CMat::zeros(sz, sz); 2 * mmax + 1];
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        for r in 0..sz {
            for c in 0..sz {
                for k in 0..n {
                    buf[k] = self.values[k][(r, c)];
                }
                fft.process(&mut buf);
                for m in -(mmax as i64)..=mmax as i64 {
                    let idx = m.rem_euclid(n as i64) as usize;
                    modes[(m + mmax as i64) as usize][(r, c)] =
                        buf[idx] / Complex64::new(n as f64, 0.0);
                }
            }
        }
        modes
    }
}

/// Principal logarithm per sample. Every sample must stay away from the edge
/// of the chart (no eigenvalue within `CHART_EDGE` of -1).
pub fn log_chart(gamma: &Loop) -> Result<LieLoop> {
    let logs: Vec<Result<CMat>> = gamma
        .values
        .par_iter()
        .enumerate()
        .map(|(k, u)| {
            let (v, thetas) = eig_unitary(u)?;
            for &t in &thetas {
                if PI - t.abs() < CHART_EDGE {
                    return Err(Error::OutsideChart { index: k, angle: t });
                }
            }
            Ok(balance_traceless(&v, &thetas, k)?)
        })
        .collect();
    let mut values = Vec::with_capacity(logs.len());
    for l in logs {
        values.push(l?);
    }
    LieLoop::new(gamma.group, values)
}

/// Build the log from principal angles, rejecting branches whose angle sum
/// is a nonzero multiple of 2*pi (no traceless log inside the chart exists)
/// and zeroing the numerical trace residue.
fn balance_traceless(v: &CMat, thetas: &[f64], sample: usize) -> Result<CMat> {
    let sum: f64 = thetas.iter().sum();
    let winding = (sum / TAU).round();
    if winding != 0.0 {
        return Err(Error::OutsideChart {
            index: sample,
            angle: PI,
        });
    }
    let mean = sum / thetas.len() as f64;
    let adjusted: Vec<f64> = thetas.iter().map(|t| t - mean).collect();
    Ok(assemble_log(v, &adjusted))
}

/// Exponential-chart factorization over a cover: gamma_i(t) =
/// exp(phi_i(t) * log(gamma(t))). Factors commute pointwise and multiply
/// back to gamma because all exponents at a sample are parallel.
pub fn factor_over_cover(gamma: &Loop, cover: &Cover, pu: &PartitionOfUnity) -> Result<Vec<Loop>> {
    if pu.len() != cover.intervals.len() {
        return Err(Error::Precondition(
            "partition of unity does not match the cover".into(),
        ));
    }
    let logs = log_chart(gamma)?;
    let n = gamma.n_samples();
    let sz = gamma.group.matrix_size();
    let n_iv = cover.intervals.len();
    let mut factors: Vec<Vec<CMat>> = vec![Vec::with_capacity(n); n_iv];
    let samples: Vec<Vec<CMat>> = (0..n)
        .into_par_iter()
        .map(|k| {
            let t = TAU * k as f64 / n as f64;
            let weights = pu.eval_all(t);
            weights
                .iter()
                .map(|&w| {
                    if w == 0.0 {
                        eye(sz)
                    } else {
                        exp_anti_hermitian(&(logs.value(k) * Complex64::new(w, 0.0)))
                    }
                })
                .collect()
        })
        .collect();
    for row in samples {
        for (i, m) in row.into_iter().enumerate() {
            factors[i].push(m);
        }
    }
    factors
        .into_iter()
        .map(|values| Loop::new(gamma.group, values))
        .collect()
}

/// Integer branch shifts with entries summing to `target`, all in [-3, 3].
fn branch_shifts(len: usize, target: i64) -> Vec<Vec<i64>> {
    if len == 1 {
        if target.abs() <= 3 {
            return vec![vec![target]];
        }
        return Vec::new();
    }
    let mut out = Vec::new();
    for first in -3..=3i64 {
        for mut rest in branch_shifts(len - 1, target - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// A continuous pointwise logarithm of the loop: per sample, the branch of
/// the eigenvalue angles (with zero sum, so the log is traceless) closest to
/// the previous sample's log.
fn continuous_log(gamma: &Loop) -> Result<Vec<CMat>> {
    let n = gamma.n_samples();
    let sz = gamma.group.matrix_size();
    let mut logs: Vec<CMat> = Vec::with_capacity(n);
    let mut prev = CMat::zeros(sz, sz);
    for k in 0..n {
        let (v, thetas) = eig_unitary(gamma.value(k))?;
        let winding = (thetas.iter().sum::<f64>() / TAU).round() as i64;
        let mut best: Option<(f64, CMat)> = None;
        for shifts in branch_shifts(sz, -winding) {
            let angles: Vec<f64> = thetas
                .iter()
                .zip(&shifts)
                .map(|(t, s)| t + TAU * *s as f64)
                .collect();
            let mean = angles.iter().sum::<f64>() / sz as f64;
            let angles: Vec<f64> = angles.iter().map(|a| a - mean).collect();
            let cand = assemble_log(&v, &angles);
            let dist = frob(&(&cand - &prev));
            if best.as_ref().map(|(d, _)| dist < *d).unwrap_or(true) {
                best = Some((dist, cand));
            }
        }
        let (_, cand) = best.ok_or_else(|| {
            Error::Precondition(format!("no traceless logarithm branch at sample {k}"))
        })?;
        prev = cand.clone();
        logs.push(cand);
    }
    Ok(logs)
}

/// Write gamma as m equal chart-domain factors exp(L/m) of a continuous
/// pointwise logarithm L.
pub fn factor_small(gamma: &Loop, m: usize) -> Result<Vec<Loop>> {
    if m == 0 {
        return Err(Error::Precondition("m must be positive".into()));
    }
    let logs = continuous_log(gamma)?;
    // chart check on the factors: spectral radius of L/m inside the ball
    let mut radius = 0.0f64;
    for l in &logs {
        let h = l * Complex64::new(0.0, -1.0);
        let se = h.symmetric_eigen();
        radius = se
            .eigenvalues
            .iter()
            .fold(radius, |r, &e| r.max(e.abs()));
    }
    let per = radius / m as f64;
    if per >= CHART_RADIUS {
        return Err(Error::FactorCountTooSmall {
            m,
            per,
            d: CHART_RADIUS,
        });
    }
    let scale = Complex64::new(1.0 / m as f64, 0.0);
    let values: Vec<CMat> = logs.iter().map(|l| exp_anti_hermitian(&(l * scale))).collect();
    let factor = Loop::new(gamma.group, values)?;
    Ok(vec![factor; m])
}

/// True iff the loop is the identity at the sample nearest p, with first and
/// second discrete derivatives there below `deriv_tol`.
pub fn based_check(gamma: &Loop, p: CirclePoint, deriv_tol: f64) -> bool {
    let n = gamma.n_samples();
    let h = TAU / n as f64;
    let k = ((p.angle() / h).round() as usize) % n;
    if gamma.distance_to_identity(k) > 1e-10 {
        return false;
    }
    let prev = &gamma.values[(k + n - 1) % n];
    let next = &gamma.values[(k + 1) % n];
    let first = frob(&(next - prev)) / (2.0 * h);
    let second = frob(&(next + prev - &gamma.values[k] * Complex64::new(2.0, 0.0))) / (h * h);
    first <= deriv_tol && second <= deriv_tol
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_partition_of_unity, uniform_cover, wrap_angle};
    use crate::linalg::su_basis;

    const N: usize = 256;

    fn su2() -> Group {
        Group::SU(2)
    }

    fn i_sigma_z() -> CMat {
        CMat::from_row_slice(
            2,
            2,
            &[
                Complex64::new(0.0, 1.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, -1.0),
            ],
        )
    }

    fn i_sigma_x() -> CMat {
        CMat::from_row_slice(
            2,
            2,
            &[
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, 1.0),
                Complex64::new(0.0, 1.0),
                Complex64::new(0.0, 0.0),
            ],
        )
    }

    #[test]
    fn group_parsing() {
        assert_eq!(Group::parse("SU(2)").unwrap(), Group::SU(2));
        assert_eq!(Group::parse("SU(3)").unwrap(), Group::SU(3));
        assert!(Group::parse("SO(3)").is_err());
        assert!(Group::parse("SU(1)").is_err());
    }

    #[test]
    fn multiply_invert_laws() {
        let gamma =
            Loop::from_algebra_fn(su2(), N, |t| i_sigma_z() * Complex64::new(0.4 * t.sin(), 0.0))
                .unwrap();
        let prod = multiply(&gamma, &invert(&gamma)).unwrap();
        let id = Loop::identity(su2(), N).unwrap();
        assert!(prod.sup_distance(&id).unwrap() < 1e-12);
        let prod = multiply(&id, &gamma).unwrap();
        assert!(prod.sup_distance(&gamma).unwrap() < 1e-12);
    }

    #[test]
    fn disjoint_supports_commute() {
        let arc1 = Interval::new(0.5, 1.0).unwrap();
        let arc2 = Interval::new(3.5, 1.0).unwrap();
        let bump_in = |arc: &Interval, t: f64| {
            let x = crate::geometry::angle_diff(t, arc.midpoint()) / (0.5 * arc.length);
            crate::geometry::bump(x) / crate::geometry::bump(0.0)
        };
        let a = Loop::from_algebra_fn(su2(), N, |t| {
            i_sigma_z() * Complex64::new(0.4 * bump_in(&arc1, t), 0.0)
        })
        .unwrap();
        let b = Loop::from_algebra_fn(su2(), N, |t| {
            i_sigma_x() * Complex64::new(0.3 * bump_in(&arc2, t), 0.0)
        })
        .unwrap();
        let ab = multiply(&a, &b).unwrap();
        let ba = multiply(&b, &a).unwrap();
        assert!(ab.sup_distance(&ba).unwrap() < 1e-12);
        let cert = ab.support(1e-9).unwrap();
        let iv = cert.interval.unwrap();
        // support inside the arc from arc1's start to arc2's end
        let hull = Interval::new(0.5, 4.0).unwrap();
        assert!(hull.contains_interval(&iv, 0.1), "{iv:?}");
    }

    #[test]
    fn log_chart_recovers_one_parameter() {
        let gamma =
            Loop::from_algebra_fn(su2(), N, |t| i_sigma_z() * Complex64::new(0.3 * t.sin(), 0.0))
                .unwrap();
        let l = log_chart(&gamma).unwrap();
        for k in 0..N {
            let t = TAU * k as f64 / N as f64;
            let expect = i_sigma_z() * Complex64::new(0.3 * t.sin(), 0.0);
            assert!(frob(&(l.value(k) - expect)) < 1e-10);
        }
        let id = Loop::identity(su2(), N).unwrap();
        assert!(log_chart(&id).unwrap().sup_norm() < 1e-12);
    }

    #[test]
    fn log_chart_rejects_minus_one() {
        let minus = GroupElement::new(su2(), eye(2) * Complex64::new(-1.0, 0.0)).unwrap();
        let gamma = Loop::constant(&minus, N).unwrap();
        assert!(matches!(
            log_chart(&gamma),
            Err(Error::OutsideChart { index: 0, .. })
        ));
    }

    #[test]
    fn exp_log_round_trip_on_loops() {
        let basis = su_basis(3);
        let gamma = Loop::from_algebra_fn(Group::SU(3), N, |t| {
            &basis[0] * Complex64::new(0.4 * t.sin(), 0.0)
                + &basis[3] * Complex64::new(0.3 * (2.0 * t).cos(), 0.0)
                + &basis[7] * Complex64::new(0.2, 0.0)
        })
        .unwrap();
        let l = log_chart(&gamma).unwrap();
        let back = l.exp().unwrap();
        assert!(back.sup_distance(&gamma).unwrap() < 1e-10);
    }

    #[test]
    fn factor_over_cover_contract() {
        let cover = uniform_cover(3, 0.15).unwrap();
        let pu = build_partition_of_unity(&cover).unwrap();
        let gamma =
            Loop::from_algebra_fn(su2(), N, |t| i_sigma_z() * Complex64::new(0.5 * t.sin(), 0.0))
                .unwrap();
        let factors = factor_over_cover(&gamma, &cover, &pu).unwrap();
        assert_eq!(factors.len(), 3);
        let recon = multiply_all(&factors).unwrap();
        assert!(recon.sup_distance(&gamma).unwrap() < 1e-10);
        // pairwise commutators
        for i in 0..3 {
            for j in i + 1..3 {
                let ij = multiply(&factors[i], &factors[j]).unwrap();
                let ji = multiply(&factors[j], &factors[i]).unwrap();
                assert!(ij.sup_distance(&ji).unwrap() < 1e-12);
            }
        }
        // supports
        let h = TAU / N as f64;
        for (i, f) in factors.iter().enumerate() {
            let cert = f.support(1e-9).unwrap();
            if let Some(iv) = cert.interval {
                assert!(
                    cover.intervals[i].enlarged(2.0 * h).contains_interval(&iv, 1e-9),
                    "factor {i}: {iv:?}"
                );
            }
        }
    }

    #[test]
    fn factor_over_cover_localized() {
        let cover = uniform_cover(3, 0.15).unwrap();
        let pu = build_partition_of_unity(&cover).unwrap();
        let j2 = &cover.intervals[1];
        let inner = Interval::new(wrap_angle(j2.start + 0.4), j2.length - 0.8).unwrap();
        let gamma = Loop::from_algebra_fn(su2(), N, |t| {
            let x = crate::geometry::angle_diff(t, inner.midpoint()) / (0.5 * inner.length);
            i_sigma_z() * Complex64::new(0.4 * crate::geometry::bump(x) / crate::geometry::bump(0.0), 0.0)
        })
        .unwrap();
        let factors = factor_over_cover(&gamma, &cover, &pu).unwrap();
        assert!(factors[1].sup_distance(&gamma).unwrap() < 1e-10);
        let id = Loop::identity(su2(), N).unwrap();
        assert!(factors[0].sup_distance(&id).unwrap() < 1e-12);
        assert!(factors[2].sup_distance(&id).unwrap() < 1e-12);
        // identity loop factors to identities
        for f in factor_over_cover(&id, &cover, &pu).unwrap() {
            assert!(f.sup_distance(&id).unwrap() < 1e-12);
        }
    }

    #[test]
    fn factor_small_constant() {
        // constant at exp(X) with ||X|| past the chart radius
        let x = i_sigma_z() * Complex64::new(2.8, 0.0);
        let g = GroupElement::new(su2(), exp_anti_hermitian(&x)).unwrap();
        let gamma = Loop::constant(&g, N).unwrap();
        let factors = factor_small(&gamma, 8).unwrap();
        assert_eq!(factors.len(), 8);
        let eighth = exp_anti_hermitian(&(&x * Complex64::new(0.125, 0.0)));
        for f in &factors {
            for k in 0..N {
                assert!(frob(&(f.value(k) - &eighth)) < 1e-10);
            }
        }
        let recon = multiply_all(&factors).unwrap();
        assert!(recon.sup_distance(&gamma).unwrap() < 1e-9);
    }

    #[test]
    fn factor_small_m_one_in_chart() {
        let gamma =
            Loop::from_algebra_fn(su2(), N, |t| i_sigma_z() * Complex64::new(0.5 * t.sin(), 0.0))
                .unwrap();
        let factors = factor_small(&gamma, 1).unwrap();
        assert!(factors[0].sup_distance(&gamma).unwrap() < 1e-10);
    }

    #[test]
    fn factor_small_winding_loop() {
        // winding torus loop times a transverse wobble; passes through -1
        let torus = Loop::from_algebra_fn(su2(), N, |t| i_sigma_z() * Complex64::new(t, 0.0));
        let torus = match torus {
            Ok(l) => l,
            Err(e) => panic!("{e}"),
        };
        let wobble =
            Loop::from_algebra_fn(su2(), N, |t| i_sigma_x() * Complex64::new(0.2 * t.sin(), 0.0))
                .unwrap();
        let gamma = multiply(&wobble, &torus).unwrap();
        assert!(log_chart(&gamma).is_err());
        let factors = factor_small(&gamma, 16).unwrap();
        assert_eq!(factors.len(), 16);
        for f in &factors {
            // every factor is inside the chart
            assert!(log_chart(f).is_ok());
        }
        let recon = multiply_all(&factors).unwrap();
        assert!(recon.sup_distance(&gamma).unwrap() < 1e-9);
        // m too small: factors would need spectral radius ~ 2*pi / m
        assert!(matches!(
            factor_small(&gamma, 2),
            Err(Error::FactorCountTooSmall { .. })
        ));
    }

    #[test]
    fn based_checks() {
        let p = CirclePoint::new(0.0);
        let id = Loop::identity(su2(), N).unwrap();
        assert!(based_check(&id, p, 1e-9));
        let rot = Loop::from_algebra_fn(su2(), N, |_| i_sigma_z() * Complex64::new(0.3, 0.0)).unwrap();
        assert!(!based_check(&rot, p, 1e-9));
        // bump-localized away from p: flat at p
        let arc = Interval::new(2.0, 1.5).unwrap();
        let gamma = Loop::from_algebra_fn(su2(), N, |t| {
            let x = crate::geometry::angle_diff(t, arc.midpoint()) / (0.5 * arc.length);
            i_sigma_z() * Complex64::new(0.4 * crate::geometry::bump(x), 0.0)
        })
        .unwrap();
        assert!(based_check(&gamma, p, 1e-9));
    }

    #[test]
    fn fourier_modes_of_trig_algebra_loop() {
        let l = LieLoop::new(
            su2(),
            (0..N)
                .map(|k| {
                    let t = TAU * k as f64 / N as f64;
                    i_sigma_z() * Complex64::new(t.sin(), 0.0)
                })
                .collect(),
        )
        .unwrap();
        let modes = l.fourier_modes(2);
        // sin t = (e^{it} - e^{-it}) / 2i: modes +-1 are -+ (i/2) i sigma_z
        let expect = i_sigma_z() * Complex64::new(0.0, -0.5);
        assert!(frob(&(&modes[3] - &expect)) < 1e-12);
        let expect = i_sigma_z() * Complex64::new(0.0, 0.5);
        assert!(frob(&(&modes[1] - &expect)) < 1e-12);
        assert!(frob(&modes[2]) < 1e-12);
        assert!(frob(&modes[0]) < 1e-12);
        assert!(frob(&modes[4]) < 1e-12);
    }
}
