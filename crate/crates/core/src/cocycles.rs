//! Central extension 2-cocycles: the Virasoro cocycle on polynomial vector
//! fields (mode formula and contour quadrature), the affine cocycle on loop
//! algebras, coboundary comparisons, and exact verification of the
//! three-dimensional lifts sitting over PSL(2,R) covers.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rustfft::FftPlanner;
use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::linalg::CMat;
use crate::loops::LieLoop;

/// Scalar ring for mode arithmetic: floating point for quadrature
/// cross-checks, exact rationals for algebraic identities.
pub trait Scalar:
    Clone
    + PartialEq
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    fn from_ratio(num: i64, den: i64) -> Self;

    fn from_int(n: i64) -> Self {
        Self::from_ratio(n, 1)
    }
}

impl Scalar for f64 {
    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }
}

impl Scalar for Complex64 {
    fn from_ratio(num: i64, den: i64) -> Self {
        Complex64::new(num as f64 / den as f64, 0.0)
    }
}

impl Scalar for BigRational {
    fn from_ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }
}

/// Exact complex numbers with rational parts.
pub type CRational = num_complex::Complex<BigRational>;

impl Scalar for CRational {
    fn from_ratio(num: i64, den: i64) -> Self {
        CRational::new(BigRational::from_ratio(num, den), BigRational::zero())
    }
}

/// A polynomial vector field on the circle in the basis l_n = -z^{n+1} d/dz,
/// stored as its finitely many mode coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField<T> {
    modes: BTreeMap<i64, T>,
}

impl<T: Scalar> VectorField<T> {
    pub fn zero() -> Self {
        VectorField {
            modes: BTreeMap::new(),
        }
    }

    /// The basis field l_n.
    pub fn basis(n: i64) -> Self {
        VectorField {
            modes: BTreeMap::from([(n, T::one())]),
        }
    }

    pub fn from_modes(modes: impl IntoIterator<Item = (i64, T)>) -> Self {
        let mut f = VectorField::zero();
        for (n, c) in modes {
            f.add_mode(n, c);
        }
        f
    }

    pub fn add_mode(&mut self, n: i64, c: T) {
        let entry = self.modes.remove(&n).unwrap_or_else(T::zero) + c;
        if !entry.is_zero() {
            self.modes.insert(n, entry);
        }
    }

    pub fn coefficient(&self, n: i64) -> T {
        self.modes.get(&n).cloned().unwrap_or_else(T::zero)
    }

    pub fn modes(&self) -> &BTreeMap<i64, T> {
        &self.modes
    }

    pub fn max_mode(&self) -> i64 {
        self.modes.keys().map(|n| n.abs()).max().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn scale(&self, c: T) -> Self {
        VectorField::from_modes(self.modes.iter().map(|(n, v)| (*n, v.clone() * c.clone())))
    }

    pub fn plus(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (n, c) in &other.modes {
            out.add_mode(*n, c.clone());
        }
        out
    }
}

/// A vector field extended by a central component.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtendedVectorField<T> {
    pub field: VectorField<T>,
    pub central: T,
}

/// Finitely supported linear functional on the mode basis.
#[derive(Debug, Clone)]
pub struct LinearFunctional<T> {
    values: BTreeMap<i64, T>,
}

impl<T: Scalar> LinearFunctional<T> {
    pub fn zero() -> Self {
        LinearFunctional {
            values: BTreeMap::new(),
        }
    }

    pub fn from_values(values: impl IntoIterator<Item = (i64, T)>) -> Self {
        LinearFunctional {
            values: values.into_iter().collect(),
        }
    }

    pub fn eval(&self, f: &VectorField<T>) -> T {
        let mut acc = T::zero();
        for (n, l) in &self.values {
            acc = acc + l.clone() * f.coefficient(*n);
        }
        acc
    }
}

/// [l_m, l_n] = (m - n) l_{m+n}, extended bilinearly.
pub fn witt_bracket<T: Scalar>(f: &VectorField<T>, g: &VectorField<T>) -> VectorField<T> {
    let mut out = VectorField::zero();
    for (m, c) in f.modes() {
        for (n, d) in g.modes() {
            out.add_mode(m + n, c.clone() * d.clone() * T::from_int(m - n));
        }
    }
    out
}

/// The Virasoro cocycle in mode form: sum_m c_m d_{-m} (m^3 - m) / 12.
pub fn virasoro_cocycle_modes<T: Scalar>(f: &VectorField<T>, g: &VectorField<T>) -> T {
    let mut acc = T::zero();
    for (m, c) in f.modes() {
        let weight = T::from_ratio(m * m * m - m, 12);
        acc = acc + c.clone() * g.coefficient(-m) * weight;
    }
    acc
}

/// The coboundary of a linear functional: (f, g) -> lambda([f, g]).
pub fn coboundary<T: Scalar>(
    lambda: &LinearFunctional<T>,
    f: &VectorField<T>,
    g: &VectorField<T>,
) -> T {
    lambda.eval(&witt_bracket(f, g))
}

/// The Virasoro cocycle as the contour integral
/// (1/12) oint F'(z) G''(z) dz / (2 pi i), where F(z) = -sum c_n z^{n+1},
/// by trapezoidal quadrature on the unit circle (spectrally exact for
/// trigonometric polynomials when the grid resolves all modes).
pub fn virasoro_cocycle_quadrature(
    f: &VectorField<Complex64>,
    g: &VectorField<Complex64>,
    points: usize,
) -> Result<Complex64> {
    let needed = 4 * f.max_mode().max(g.max_mode()) as usize + 8;
    if points < needed {
        return Err(Error::Precondition(format!(
            "quadrature grid {points} too small, need at least {needed}"
        )));
    }
    // F'(z) = -sum c_n (n+1) z^n, G''(z) = -sum d_n (n+1) n z^{n-1}
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 0..points {
        let theta = TAU * k as f64 / points as f64;
        let z = Complex64::from_polar(1.0, theta);
        let mut fp = Complex64::new(0.0, 0.0);
        for (n, c) in f.modes() {
            fp -= c * (*n as f64 + 1.0) * z.powi(*n as i32);
        }
        let mut gpp = Complex64::new(0.0, 0.0);
        for (n, d) in g.modes() {
            gpp -= d * ((*n as f64 + 1.0) * *n as f64) * z.powi(*n as i32 - 1);
        }
        // oint h dz/(2 pi i) = mean of h(z) z over the grid
        acc += fp * gpp * z;
    }
    Ok(acc / (12.0 * points as f64))
}

/// The basic inner product of su(n), <X, Y> = -tr(XY), extended
/// complex-bilinearly.
pub fn basic_inner_product(x: &CMat, y: &CMat) -> Complex64 {
    -(x * y).trace()
}

/// Affine cocycle by quadrature: (1/2 pi i) oint <f, dg> with the derivative
/// of g taken spectrally.
pub fn affine_cocycle_quadrature(f: &LieLoop, g: &LieLoop) -> Result<Complex64> {
    if f.group() != g.group() {
        return Err(Error::GroupMismatch(
            f.group().to_string(),
            g.group().to_string(),
        ));
    }
    if f.n_samples() != g.n_samples() {
        return Err(Error::GridMismatch(f.n_samples(), g.n_samples()));
    }
    let n = f.n_samples();
    let sz = f.group().matrix_size();
    // g' per sample: differentiate each entry in frequency space
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(n);
    let ifft = planner.plan_fft_inverse(n);
    let mut deriv = vec![CMat::zeros(sz, sz); n];
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    for r in 0..sz {
        for c in 0..sz {
            for k in 0..n {
                buf[k] = g.value(k)[(r, c)];
            }
            fft.process(&mut buf);
            for (idx, v) in buf.iter_mut().enumerate() {
                let m = if idx <= n / 2 { idx as i64 } else { idx as i64 - n as i64 };
                // drop the unpaired Nyquist mode
                let m = if idx == n / 2 { 0 } else { m };
                *v *= Complex64::new(0.0, m as f64) / n as f64;
            }
            ifft.process(&mut buf);
            for k in 0..n {
                deriv[k][(r, c)] = buf[k];
            }
        }
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 0..n {
        acc += basic_inner_product(f.value(k), &deriv[k]);
    }
    // (1/2 pi i) * (2 pi / n) * sum
    Ok(acc / Complex64::new(0.0, n as f64))
}

/// Affine cocycle by Fourier-mode contraction: -sum_m m <X_m, Y_{-m}>.
pub fn affine_cocycle_modes(f: &LieLoop, g: &LieLoop) -> Result<Complex64> {
    if f.group() != g.group() {
        return Err(Error::GroupMismatch(
            f.group().to_string(),
            g.group().to_string(),
        ));
    }
    if f.n_samples() != g.n_samples() {
        return Err(Error::GridMismatch(f.n_samples(), g.n_samples()));
    }
    let mmax = f.n_samples() / 2 - 1;
    let fm = f.fourier_modes(mmax);
    let gm = g.fourier_modes(mmax);
    let mut acc = Complex64::new(0.0, 0.0);
    for m in -(mmax as i64)..=mmax as i64 {
        if m == 0 {
            continue;
        }
        let x = &fm[(m + mmax as i64) as usize];
        let y = &gm[(-m + mmax as i64) as usize];
        acc -= basic_inner_product(x, y) * m as f64;
    }
    Ok(acc)
}

fn ci(num: i64, den: i64) -> CRational {
    CRational::new(BigRational::zero(), BigRational::from_ratio(num, den))
}

/// Result of checking one extended bracket against the span of the lift
/// basis.
#[derive(Debug, Clone)]
pub struct BracketCheck {
    /// indices into the basis (0-based) of the two arguments
    pub pair: (usize, usize),
    /// real coefficients of the bracket in the basis, if it lies in the span
    pub coefficients: Option<[BigRational; 3]>,
    /// cocycle value of the bracket's central slot
    pub central: CRational,
    /// central slot demanded by the span coefficients
    pub central_expected: CRational,
    pub ok: bool,
}

/// Closure report for the three-dimensional lift over the n-fold cover of
/// PSL(2,R): basis (i l_0, i (n^2 - 1)/24), (l_n - l_{-n}, 0),
/// (i l_n + i l_{-n}, 0), brackets taken with the Virasoro cocycle in the
/// central slot. All arithmetic is exact.
#[derive(Debug, Clone)]
pub struct Psl2LiftReport {
    pub n: i64,
    pub closed: bool,
    /// central component attached to i l_0
    pub central_l0: BigRational,
    pub checks: Vec<BracketCheck>,
}

fn lift_basis(n: i64) -> [ExtendedVectorField<CRational>; 3] {
    let i = ci(1, 1);
    let e1 = ExtendedVectorField {
        field: VectorField::basis(0).scale(i.clone()),
        central: ci(n * n - 1, 24),
    };
    let e2 = ExtendedVectorField {
        field: VectorField::from_modes([(n, CRational::one()), (-n, -CRational::one())]),
        central: CRational::zero(),
    };
    let e3 = ExtendedVectorField {
        field: VectorField::from_modes([(n, i.clone()), (-n, i)]),
        central: CRational::zero(),
    };
    [e1, e2, e3]
}

/// Coefficients of `field` in the span of the lift basis field parts, if the
/// field lies in the real span.
fn span_coefficients(field: &VectorField<CRational>, n: i64) -> Option<[BigRational; 3]> {
    for m in field.modes().keys() {
        if *m != 0 && *m != n && *m != -n {
            return None;
        }
    }
    let c0 = field.coefficient(0);
    let cp = field.coefficient(n);
    let cm = field.coefficient(-n);
    // a * i = c0; b + c * i = cp; -b + c * i = cm
    let a = c0.im.clone();
    if !c0.re.is_zero() {
        return None;
    }
    let two = BigRational::from_ratio(2, 1);
    let b = (cp.re.clone() - cm.re.clone()) / two.clone();
    let c = (cp.im.clone() + cm.im.clone()) / two;
    // consistency of the remaining components
    let back_p = CRational::new(b.clone(), c.clone());
    let back_m = CRational::new(-b.clone(), c.clone());
    if back_p != cp || back_m != cm {
        return None;
    }
    Some([a, b, c])
}

/// Verify that the lift basis closes under the extended bracket, reporting
/// the span coefficients and central components of every pairwise bracket.
pub fn verify_psl2n_lift(n: i64) -> Result<Psl2LiftReport> {
    if n < 1 {
        return Err(Error::Precondition(format!("n = {n} must be at least 1")));
    }
    let basis = lift_basis(n);
    let mut checks = Vec::new();
    let mut closed = true;
    for i in 0..3 {
        for j in i + 1..3 {
            let field = witt_bracket(&basis[i].field, &basis[j].field);
            let central = virasoro_cocycle_modes(&basis[i].field, &basis[j].field);
            let coefficients = span_coefficients(&field, n);
            let (central_expected, ok) = match &coefficients {
                Some([a, b, c]) => {
                    let expected = basis[0].central.clone() * CRational::from(a.clone())
                        + basis[1].central.clone() * CRational::from(b.clone())
                        + basis[2].central.clone() * CRational::from(c.clone());
                    let ok = expected == central;
                    (expected, ok)
                }
                None => (CRational::zero(), false),
            };
            closed &= ok;
            checks.push(BracketCheck {
                pair: (i, j),
                coefficients,
                central,
                central_expected,
                ok,
            });
        }
    }
    Ok(Psl2LiftReport {
        n,
        closed,
        central_l0: BigRational::from_ratio(n * n - 1, 24),
        checks,
    })
}

/// The central components the n- and m-fold lifts attach to i l_0; the
/// sections disagree whenever n != m.
#[derive(Debug, Clone)]
pub struct SectionComparison {
    pub n: i64,
    pub m: i64,
    pub central_n: BigRational,
    pub central_m: BigRational,
    pub distinct: bool,
}

pub fn compare_sl2_sections(n: i64, m: i64) -> Result<SectionComparison> {
    if n == m {
        return Err(Error::Precondition(format!(
            "sections coincide trivially for n = m = {n}"
        )));
    }
    if n < 1 || m < 1 {
        return Err(Error::Precondition("cover indices must be at least 1".into()));
    }
    let central_n = BigRational::from_ratio(n * n - 1, 24);
    let central_m = BigRational::from_ratio(m * m - 1, 24);
    let distinct = central_n != central_m;
    Ok(SectionComparison {
        n,
        m,
        central_n,
        central_m,
        distinct,
    })
}
