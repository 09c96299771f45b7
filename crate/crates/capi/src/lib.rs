//! C ABI over the core library: opaque handles for diffeomorphisms and
//! loops, integer status codes, and a thread-local last-error message.
//!
//! Conventions:
//! - every function returns `CcStatus` (0 success) unless it cannot fail;
//! - handles created here must be released with the matching `_free`;
//! - on failure, `cc_last_error` returns a message valid until the next
//!   failing call on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use circle_colim::diffeo::{self, CircleDiffeo};
use circle_colim::geometry::{build_partition_of_unity, uniform_cover, Interval};
use circle_colim::json::VectorFieldJson;
use circle_colim::loops::{self, Group, Loop};
use circle_colim::{cocycles, selftest, weights, CMat, Error};
use num_complex::Complex64;

/// Status codes: 0 success, 1 invalid input, 2 contract violation (a
/// mathematical postcondition failed), 3 null pointer or panic.
pub type CcStatus = i32;

pub const CC_OK: CcStatus = 0;
pub const CC_INVALID: CcStatus = 1;
pub const CC_CONTRACT: CcStatus = 2;
pub const CC_NULL: CcStatus = 3;

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").unwrap());
}

fn set_error(msg: &str) {
    let msg = CString::new(msg.replace('\0', " ")).unwrap();
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &Error) -> CcStatus {
    match e {
        Error::InvalidDerivation { .. } | Error::RewriteBlocked(_) => CC_CONTRACT,
        _ => CC_INVALID,
    }
}

fn fail(e: Error) -> CcStatus {
    set_error(&e.to_string());
    status_of(&e)
}

fn guarded(body: impl FnOnce() -> CcStatus) -> CcStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(s) => s,
        Err(_) => {
            set_error("internal panic");
            CC_NULL
        }
    }
}

/// Message of the most recent failure on this thread. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn cc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Release a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn cc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

unsafe fn cstr<'a>(s: *const c_char) -> Option<&'a str> {
    if s.is_null() {
        return None;
    }
    CStr::from_ptr(s).to_str().ok()
}

// --- circle diffeomorphisms ------------------------------------------------

/// Opaque handle to an orientation-preserving circle diffeomorphism.
pub struct CcDiffeo(CircleDiffeo);

/// Build a diffeomorphism from `n` lift samples at t_k = 2 pi k / n. The
/// samples must be strictly increasing and `n` a power of two, at least 16.
#[no_mangle]
pub unsafe extern "C" fn cc_diffeo_from_lift(
    lift: *const f64,
    n: usize,
    out: *mut *mut CcDiffeo,
) -> CcStatus {
    guarded(|| {
        if lift.is_null() || out.is_null() {
            set_error("null pointer");
            return CC_NULL;
        }
        let samples = std::slice::from_raw_parts(lift, n).to_vec();
        match CircleDiffeo::from_lift(samples) {
            Ok(d) => {
                *out = Box::into_raw(Box::new(CcDiffeo(d)));
                CC_OK
            }
            Err(e) => fail(e),
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn cc_diffeo_identity(n: usize, out: *mut *mut CcDiffeo) -> CcStatus {
    guarded(|| {
        if out.is_null() {
            set_error("null pointer");
            return CC_NULL;
        }
        if n < 16 || !n.is_power_of_two() {
            return fail(Error::BadGridSize(n));
        }
        *out = Box::into_raw(Box::new(CcDiffeo(CircleDiffeo::identity(n))));
        CC_OK
    })
}

#[no_mangle]
pub unsafe extern "C" fn cc_diffeo_free(h: *mut CcDiffeo) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

#[no_mangle]
pub unsafe extern "C" fn cc_diffeo_n_samples(h: *const CcDiffeo, out: *mut usize) -> CcStatus {
    guarded(|| {
        if h.is_null() || out.is_null() {
            set_error("null pointer");
            return CC_NULL;
        }
        *out = (*h).0.n_samples();
        CC_OK
    })
}

/// Copy the lift samples into `buf`, which must hold `n_samples` doubles.
#[no_mangle]
pub unsafe extern "C" fn cc_diffeo_lift(h: *const CcDiffeo, buf: *mut f64) -> CcStatus {
    guarded(|| {
        if h.is_null() || buf.is_null() {
            set_error("null pointer");
            return CC_NULL;
        }
        let lift = (*h).0.lift();
        std::slice::from_raw_parts_mut(buf, lift.len()).copy_from_slice(lift);
        CC_OK
    })
}

#[no_mangle]
pub unsafe extern "C" fn cc_diffeo_displacement(h: *const CcDiffeo, out: *mut f64) -> CcStatus {
    guarded(|| {
        if h.is_null() || out.is_null() {
            set_error("null pointer");
            return CC_NULL;
        }
        *out = (*h).0.displacement();
        CC_OK
    })
}

/// Evaluate the lift at an arbitrary real argument.
#[no_mangle]
pub unsafe extern "C" fn cc_diffeo_eval(h: *const CcDiffeo, t: f64, out: *mut f64) -> CcStatus {
    guarded(|| {
        if h.is_null() || out.is_null() {
            set_error("null pointer");
            return CC_NULL;
        }
        *out = (*h).0.eval(t);
        CC_OK
    })
}

#[no_mangle]
pub unsafe extern "C" fn cc_diffeo_compose(
    a: *const CcDiffeo,
    b: *const CcDiffeo,
    out: *mut *mut CcDiffeo,
) -> CcStatus {
    guarded(|| {
        if a.is_null() || b.is_null() || out.is_null() {
            set_error("null pointer");
            return CC_NULL;
        }
        match diffeo::compose(&(*a).0, &(*b).0) {
            Ok(d) => {
                *out = Box::into_raw(Box::new(CcDiffeo(d)));
                CC_OK
            }
            Err(e) => fail(e),
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn cc_diffeo_invert(
    h: *const CcDiffeo,
    out: *mut *mut CcDiffeo,
) -> CcStatus {
    guarded(|| {
        if h.is_null() || out.is_null() {
            set_error("null pointer");
            return CC_NULL;
        }
        match diffeo::invert(&(*h).0) {
            Ok(d) => {
                *out = Box::into_raw(Box::new(CcDiffeo(d)));
                CC_OK
            }
            Err(e) => fail(e),
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn cc_diffeo_sup_distance(
    a: *const CcDiffeo,
    b: *const CcDiffeo,
    out: *mut f64,
) -> CcStatus {
    guarded(|| {
        if a.is_null() || b.is_null() || out.is_null() {
            set_error("null pointer");
            return CC_NULL;
        }
        *out = (*a).0.sup_distance(&(*b).0);
        CC_OK
    })
}

/// Factor a small-displacement diffeomorphism over the uniform cover with
/// `n_intervals` intervals and overlap margin `d`. `out` must hold
/// `n_intervals` handle slots; on success each slot owns one factor,
/// supported in the corresponding cover interval, and their composition
/// (left to right) reproduces the input.
#[no_mangle]
pub unsafe extern "C" fn cc_diffeo_factor_uniform(
    h: *const CcDiffeo,
    n_intervals: usize,
    d: f64,
    out: *mut *mut CcDiffeo,
) -> CcStatus {
    guarded(|| {
        if h.is_null() || out.is_null() {
            set_error("null pointer");
            return CC_NULL;
        }
        let cover = match uniform_cover(n_intervals, d) {
            Ok(c) => c,
            Err(e) => return fail(e),
        };
        match diffeo::factor_over_cover(&(*h).0, &cover) {
            Ok(factors) => {
                let slots = std::slice::from_raw_parts_mut(out, n_intervals);
                for (slot, f) in slots.iter_mut().zip(factors) {
                    *slot = Box::into_raw(Box::new(CcDiffeo(f)));
                }
                CC_OK
            }
            Err(e) => fail(e),
        }
    })
}

/// Split phi into phi_minus o phi_plus with supports in the two given arcs,
/// which must cover the circle and intersect in two arcs of length 2 d.
#[no_mangle]
pub unsafe extern "C" fn cc_diffeo_split_circle(
    h: *const CcDiffeo,
    minus_start: f64,
    minus_length: f64,
    plus_start: f64,
    plus_length: f64,
    d: f64,
    out_minus: *mut *mut CcDiffeo,
    out_plus: *mut *mut CcDiffeo,
) -> CcStatus {
    guarded(|| {
        if h.is_null() || out_minus.is_null() || out_plus.is_null() {
            set_error("null pointer");
            return CC_NULL;
        }
        let i_minus = match Interval::new(minus_start, minus_length) {
            Ok(i) => i,
            Err(e) => return fail(e),
        };
        let i_plus = match Interval::new(plus_start, plus_length) {
            Ok(i) => i,
            Err(e) => return fail(e),
        };
        match diffeo::split_circle(&(*h).0, &i_minus, &i_plus, d) {
            Ok((m, p)) => {
                *out_minus = Box::into_raw(Box::new(CcDiffeo(m)));
                *out_plus = Box::into_raw(Box::new(CcDiffeo(p)));
                CC_OK
            }
            Err(e) => fail(e),
        }
    })
}

// --- loops -----------------------------------------------------------------

/// Opaque handle to a sampled loop in SU(2) or SU(3).
pub struct CcLoop(Loop);

/// Matrix entries per sample for a group descriptor ("su2" or "su3"): the
/// sample layout is row-major, each entry an interleaved (re, im) pair, so a
/// sample takes 2 * size * size doubles.
#[no_mangle]
pub unsafe extern "C" fn cc_group_matrix_size(
    group: *const c_char,
    out: *mut usize,
) -> CcStatus {
    guarded(|| {
        let Some(g) = cstr(group) else {
            set_error("null or non-utf8 group descriptor");
            return CC_NULL;
        };
        if out.is_null() {
            set_error("null pointer");
            return CC_NULL;
        }
        match Group::parse(g) {
            Ok(g) => {
                *out = g.matrix_size();
                CC_OK
            }
            Err(e) => fail(e),
        }
    })
}

/// Build a loop from `n` unitary samples; `values` holds
/// n * 2 * size * size doubles as described at `cc_group_matrix_size`.
#[no_mangle]
pub unsafe extern "C" fn cc_loop_from_samples(
    group: *const c_char,
    n: usize,
    values: *const f64,
    out: *mut *mut CcLoop,
) -> CcStatus {
    guarded(|| {
        let Some(gs) = cstr(group) else {
            set_error("null or non-utf8 group descriptor");
            return CC_NULL;
        };
        if values.is_null() || out.is_null() {
            set_error("null pointer");
            return CC_NULL;
        }
        let g = match Group::parse(gs) {
            Ok(g) => g,
            Err(e) => return fail(e),
        };
        let sz = g.matrix_size();
        let data = std::slice::from_raw_parts(values, n * 2 * sz * sz);
        let mats: Vec<CMat> = (0..n)
            .map(|k| {
                let s = &data[k * 2 * sz * sz..(k + 1) * 2 * sz * sz];
                CMat::from_row_slice(
                    sz,
                    sz,
                    &s.chunks_exact(2)
                        .map(|p| Complex64::new(p[0], p[1]))
                        .collect::<Vec<_>>(),
                )
            })
            .collect();
        match Loop::new(g, mats) {
            Ok(l) => {
                *out = Box::into_raw(Box::new(CcLoop(l)));
                CC_OK
            }
            Err(e) => fail(e),
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn cc_loop_free(h: *mut CcLoop) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

#[no_mangle]
pub unsafe extern "C" fn cc_loop_n_samples(h: *const CcLoop, out: *mut usize) -> CcStatus {
    guarded(|| {
        if h.is_null() || out.is_null() {
            set_error("null pointer");
            return CC_NULL;
        }
        *out = (*h).0.n_samples();
        CC_OK
    })
}

/// Copy the samples into `buf` in the layout of `cc_loop_from_samples`.
#[no_mangle]
pub unsafe extern "C" fn cc_loop_samples(h: *const CcLoop, buf: *mut f64) -> CcStatus {
    guarded(|| {
        if h.is_null() || buf.is_null() {
            set_error("null pointer");
            return CC_NULL;
        }
        let l = &(*h).0;
        let sz = l.group().matrix_size();
        let out = std::slice::from_raw_parts_mut(buf, l.n_samples() * 2 * sz * sz);
        for k in 0..l.n_samples() {
            let m = l.value(k);
            for r in 0..sz {
                for c in 0..sz {
                    let base = k * 2 * sz * sz + 2 * (r * sz + c);
                    out[base] = m[(r, c)].re;
                    out[base + 1] = m[(r, c)].im;
                }
            }
        }
        CC_OK
    })
}

#[no_mangle]
pub unsafe extern "C" fn cc_loop_multiply(
    a: *const CcLoop,
    b: *const CcLoop,
    out: *mut *mut CcLoop,
) -> CcStatus {
    guarded(|| {
        if a.is_null() || b.is_null() || out.is_null() {
            set_error("null pointer");
            return CC_NULL;
        }
        match loops::multiply(&(*a).0, &(*b).0) {
            Ok(l) => {
                *out = Box::into_raw(Box::new(CcLoop(l)));
                CC_OK
            }
            Err(e) => fail(e),
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn cc_loop_invert(h: *const CcLoop, out: *mut *mut CcLoop) -> CcStatus {
    guarded(|| {
        if h.is_null() || out.is_null() {
            set_error("null pointer");
            return CC_NULL;
        }
        *out = Box::into_raw(Box::new(CcLoop(loops::invert(&(*h).0))));
        CC_OK
    })
}

#[no_mangle]
pub unsafe extern "C" fn cc_loop_sup_distance(
    a: *const CcLoop,
    b: *const CcLoop,
    out: *mut f64,
) -> CcStatus {
    guarded(|| {
        if a.is_null() || b.is_null() || out.is_null() {
            set_error("null pointer");
            return CC_NULL;
        }
        match (*a).0.sup_distance(&(*b).0) {
            Ok(v) => {
                *out = v;
                CC_OK
            }
            Err(e) => fail(e),
        }
    })
}

/// Factor a chart-domain loop over the uniform cover with `n_intervals`
/// intervals and overlap margin `d`. `out` must hold `n_intervals` handle
/// slots; the factors commute pairwise and multiply back to the input.
#[no_mangle]
pub unsafe extern "C" fn cc_loop_factor_uniform(
    h: *const CcLoop,
    n_intervals: usize,
    d: f64,
    out: *mut *mut CcLoop,
) -> CcStatus {
    guarded(|| {
        if h.is_null() || out.is_null() {
            set_error("null pointer");
            return CC_NULL;
        }
        let cover = match uniform_cover(n_intervals, d) {
            Ok(c) => c,
            Err(e) => return fail(e),
        };
        let pu = match build_partition_of_unity(&cover) {
            Ok(p) => p,
            Err(e) => return fail(e),
        };
        match loops::factor_over_cover(&(*h).0, &cover, &pu) {
            Ok(factors) => {
                let slots = std::slice::from_raw_parts_mut(out, n_intervals);
                for (slot, f) in slots.iter_mut().zip(factors) {
                    *slot = Box::into_raw(Box::new(CcLoop(f)));
                }
                CC_OK
            }
            Err(e) => fail(e),
        }
    })
}

// --- cocycles and weights --------------------------------------------------

/// Virasoro cocycle of two vector fields given as JSON mode maps
/// (`{"modes": {"-2": [re, im]}}`). `quadrature` nonzero selects contour
/// quadrature on `grid` points instead of the exact mode formula.
#[no_mangle]
pub unsafe extern "C" fn cc_virasoro_cocycle(
    f_json: *const c_char,
    g_json: *const c_char,
    quadrature: i32,
    grid: usize,
    out_re: *mut f64,
    out_im: *mut f64,
) -> CcStatus {
    guarded(|| {
        let (Some(fs), Some(gs)) = (cstr(f_json), cstr(g_json)) else {
            set_error("null or non-utf8 JSON argument");
            return CC_NULL;
        };
        if out_re.is_null() || out_im.is_null() {
            set_error("null pointer");
            return CC_NULL;
        }
        let parse = |s: &str| -> Result<_, Error> {
            let j: VectorFieldJson =
                serde_json::from_str(s).map_err(|e| Error::Precondition(e.to_string()))?;
            j.to_field()
        };
        let f = match parse(fs) {
            Ok(f) => f,
            Err(e) => return fail(e),
        };
        let g = match parse(gs) {
            Ok(g) => g,
            Err(e) => return fail(e),
        };
        let value = if quadrature != 0 {
            match cocycles::virasoro_cocycle_quadrature(&f, &g, grid) {
                Ok(v) => v,
                Err(e) => return fail(e),
            }
        } else {
            cocycles::virasoro_cocycle_modes(&f, &g)
        };
        *out_re = value.re;
        *out_im = value.im;
        CC_OK
    })
}

/// Number of level-k highest weights for "su2" or "su3".
#[no_mangle]
pub unsafe extern "C" fn cc_weight_count(
    group: *const c_char,
    level: i64,
    out: *mut usize,
) -> CcStatus {
    guarded(|| {
        let Some(g) = cstr(group) else {
            set_error("null or non-utf8 group descriptor");
            return CC_NULL;
        };
        if out.is_null() {
            set_error("null pointer");
            return CC_NULL;
        }
        match weights::enumerate_level_k_highest_weights(g, level) {
            Ok(w) => {
                *out = w.len();
                CC_OK
            }
            Err(e) => fail(e),
        }
    })
}

// --- self test -------------------------------------------------------------

/// Run one numbered acceptance criterion (1 to 11). Returns CC_OK if it
/// passes and CC_CONTRACT with the failure detail in `cc_last_error` if not.
#[no_mangle]
pub extern "C" fn cc_selftest_criterion(id: usize, seed: u64) -> CcStatus {
    guarded(|| {
        let report = selftest::run_criterion(id, seed);
        if report.pass {
            CC_OK
        } else {
            set_error(&format!("criterion {id} failed: {}", report.detail));
            CC_CONTRACT
        }
    })
}

/// Run the whole acceptance suite; on return `*out_json` owns a
/// machine-readable report (release with `cc_string_free`). Returns CC_OK
/// only if every criterion passes.
#[no_mangle]
pub unsafe extern "C" fn cc_selftest_run(seed: u64, out_json: *mut *mut c_char) -> CcStatus {
    guarded(|| {
        let report = selftest::run(seed);
        if !out_json.is_null() {
            let text = serde_json::to_string_pretty(&report).unwrap();
            *out_json = CString::new(text).unwrap().into_raw();
        }
        if report.all_pass {
            CC_OK
        } else {
            set_error("self test criteria failed");
            CC_CONTRACT
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;
    use std::ptr;

    #[test]
    fn diffeo_round_trip_through_handles() {
        let n = 256usize;
        let lift: Vec<f64> = (0..n)
            .map(|k| {
                let t = TAU * k as f64 / n as f64;
                t + 0.03 * t.sin()
            })
            .collect();
        unsafe {
            let mut h: *mut CcDiffeo = ptr::null_mut();
            assert_eq!(cc_diffeo_from_lift(lift.as_ptr(), n, &mut h), CC_OK);
            let mut disp = 0.0;
            assert_eq!(cc_diffeo_displacement(h, &mut disp), CC_OK);
            assert!(disp > 0.029 && disp < 0.031);
            let mut inv: *mut CcDiffeo = ptr::null_mut();
            assert_eq!(cc_diffeo_invert(h, &mut inv), CC_OK);
            let mut comp: *mut CcDiffeo = ptr::null_mut();
            assert_eq!(cc_diffeo_compose(h, inv, &mut comp), CC_OK);
            let mut idh: *mut CcDiffeo = ptr::null_mut();
            assert_eq!(cc_diffeo_identity(n, &mut idh), CC_OK);
            let mut dist = f64::NAN;
            assert_eq!(cc_diffeo_sup_distance(comp, idh, &mut dist), CC_OK);
            assert!(dist < 1e-9, "{dist}");
            cc_diffeo_free(h);
            cc_diffeo_free(inv);
            cc_diffeo_free(comp);
            cc_diffeo_free(idh);
        }
    }

    #[test]
    fn factor_uniform_reconstructs() {
        let n = 4096usize;
        let lift: Vec<f64> = (0..n)
            .map(|k| {
                let t = TAU * k as f64 / n as f64;
                t + 0.04 * t.sin()
            })
            .collect();
        unsafe {
            let mut h: *mut CcDiffeo = ptr::null_mut();
            assert_eq!(cc_diffeo_from_lift(lift.as_ptr(), n, &mut h), CC_OK);
            let mut factors = [ptr::null_mut::<CcDiffeo>(); 5];
            assert_eq!(
                cc_diffeo_factor_uniform(h, 5, 0.1, factors.as_mut_ptr()),
                CC_OK
            );
            let mut acc: *mut CcDiffeo = ptr::null_mut();
            let mut fn_samples = 0usize;
            assert_eq!(cc_diffeo_n_samples(factors[0], &mut fn_samples), CC_OK);
            assert_eq!(cc_diffeo_identity(fn_samples, &mut acc), CC_OK);
            for f in factors {
                let mut next: *mut CcDiffeo = ptr::null_mut();
                assert_eq!(cc_diffeo_compose(acc, f, &mut next), CC_OK);
                cc_diffeo_free(acc);
                acc = next;
            }
            let mut dist = f64::NAN;
            assert_eq!(cc_diffeo_sup_distance(acc, h, &mut dist), CC_OK);
            assert!(dist < 1e-8, "{dist}");
            for f in factors {
                cc_diffeo_free(f);
            }
            cc_diffeo_free(acc);
            cc_diffeo_free(h);
        }
    }

    #[test]
    fn error_reporting_and_codes() {
        unsafe {
            let mut h: *mut CcDiffeo = ptr::null_mut();
            // non-monotone input
            let bad = [0.0f64; 16];
            assert_eq!(cc_diffeo_from_lift(bad.as_ptr(), 16, &mut h), CC_INVALID);
            let msg = CStr::from_ptr(cc_last_error()).to_str().unwrap();
            assert!(msg.contains("increasing"), "{msg}");
            assert_eq!(cc_diffeo_from_lift(ptr::null(), 0, &mut h), CC_NULL);
        }
    }

    #[test]
    fn virasoro_value_through_ffi() {
        let f = CString::new(r#"{"modes":{"2":[1.0,0.0]}}"#).unwrap();
        let g = CString::new(r#"{"modes":{"-2":[1.0,0.0]}}"#).unwrap();
        let (mut re, mut im) = (0.0, 0.0);
        unsafe {
            assert_eq!(
                cc_virasoro_cocycle(f.as_ptr(), g.as_ptr(), 0, 0, &mut re, &mut im),
                CC_OK
            );
            assert!((re - 0.5).abs() < 1e-12 && im.abs() < 1e-12);
            assert_eq!(
                cc_virasoro_cocycle(f.as_ptr(), g.as_ptr(), 1, 256, &mut re, &mut im),
                CC_OK
            );
            assert!((re - 0.5).abs() < 1e-10 && im.abs() < 1e-10);
        }
    }

    #[test]
    fn loop_handles_and_weights() {
        let n = 64usize;
        // one-parameter SU(2) loop exp(i theta sigma_z * 0.2 sin t)
        let mut values = Vec::with_capacity(n * 8);
        for k in 0..n {
            let t = TAU * k as f64 / n as f64;
            let a = 0.2 * t.sin();
            values.extend_from_slice(&[
                a.cos(),
                a.sin(),
                0.0,
                0.0,
                0.0,
                0.0,
                a.cos(),
                -a.sin(),
            ]);
        }
        unsafe {
            let group = CString::new("su2").unwrap();
            let mut h: *mut CcLoop = ptr::null_mut();
            assert_eq!(
                cc_loop_from_samples(group.as_ptr(), n, values.as_ptr(), &mut h),
                CC_OK
            );
            let mut inv: *mut CcLoop = ptr::null_mut();
            assert_eq!(cc_loop_invert(h, &mut inv), CC_OK);
            let mut prod: *mut CcLoop = ptr::null_mut();
            assert_eq!(cc_loop_multiply(h, inv, &mut prod), CC_OK);
            let mut buf = vec![0.0f64; n * 8];
            assert_eq!(cc_loop_samples(prod, buf.as_mut_ptr()), CC_OK);
            for k in 0..n {
                assert!((buf[k * 8] - 1.0).abs() < 1e-12);
                assert!(buf[k * 8 + 1].abs() < 1e-12);
            }
            cc_loop_free(h);
            cc_loop_free(inv);
            cc_loop_free(prod);

            let mut count = 0usize;
            let su2 = CString::new("su2").unwrap();
            assert_eq!(cc_weight_count(su2.as_ptr(), 3, &mut count), CC_OK);
            assert_eq!(count, 4);
        }
    }
}
