//! C ABI over `klein_billiards`.
//!
//! Every fallible function returns a status: `KB_OK` on success, one of the
//! negative `KB_ERR_*` codes for call-site problems, or the positive exit
//! code of the library error. The message of the last failure on the calling
//! thread is available through [`kb_last_error_message`]. Handles are opaque
//! and released with their `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use klein_billiards::cayley::{cayley_condition, period_indicator_f64};
use klein_billiards::confocal::{line_caustics, to_elliptic, BoundaryQuadric, ConfocalFamily, MinkowskiEllipsoid};
use klein_billiards::dynamics::{trace_chords, Trajectory};
use klein_billiards::nalgebra::DVector;
use klein_billiards::numeric::{parse_vector, Number, Rational};
use klein_billiards::Error;

pub const KB_OK: i32 = 0;
pub const KB_ERR_NULL: i32 = -1;
pub const KB_ERR_UTF8: i32 = -2;
pub const KB_ERR_PANIC: i32 = -3;
pub const KB_ERR_RANGE: i32 = -4;

/// Confocal family `b_1 > … > b_d > 0`.
pub struct KbFamily(ConfocalFamily);

/// Boundary quadric `Σ x_i²/(b_i − c) = 1` of a family.
pub struct KbBoundary(BoundaryQuadric);

/// Traced chord billiard.
pub struct KbTrajectory(Trajectory);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior nul removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

enum Fail {
    Code(i32, String),
    Lib(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> i32 {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => KB_OK,
        Ok(Err(Fail::Code(code, msg))) => {
            set_error(msg);
            code
        }
        Ok(Err(Fail::Lib(e))) => {
            set_error(e.to_string());
            e.exit_code()
        }
        Err(_) => {
            set_error("internal panic".into());
            KB_ERR_PANIC
        }
    }
}

fn null(what: &str) -> Fail {
    Fail::Code(KB_ERR_NULL, format!("null pointer: {what}"))
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Fail::Code(KB_ERR_UTF8, format!("{what} is not UTF-8")))
}

unsafe fn rationals(p: *const c_char, what: &str) -> Result<Vec<Rational>, Fail> {
    let v = parse_vector(text(p, what)?)?;
    Ok(v.iter().map(Number::to_rational).collect::<Result<_, _>>()?)
}

unsafe fn slice<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn out_slice<'a>(p: *mut f64, len: usize, what: &str) -> Result<&'a mut [f64], Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn kb_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Creates a family from a comma-separated list such as `"5,3,1"` or
/// `"7/2,2,1/3"`.
///
/// # Safety
/// `b` must be a nul-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn kb_family_new(b: *const c_char, out: *mut *mut KbFamily) -> i32 {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let fam = ConfocalFamily::new(rationals(b, "b")?)?;
        *out = Box::into_raw(Box::new(KbFamily(fam)));
        Ok(())
    })
}

/// # Safety
/// `family` must come from [`kb_family_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn kb_family_free(family: *mut KbFamily) {
    if !family.is_null() {
        drop(Box::from_raw(family));
    }
}

/// Dimension `d`, or 0 for a null handle.
///
/// # Safety
/// `family` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn kb_family_dim(family: *const KbFamily) -> usize {
    family.as_ref().map_or(0, |f| f.0.dim())
}

/// Elliptic coordinates of `x` (length `d`) into `lambda` (length `d`).
///
/// # Safety
/// Pointers must be valid for `d` doubles, `d` the family dimension.
#[no_mangle]
pub unsafe extern "C" fn kb_to_elliptic(family: *const KbFamily, x: *const f64, lambda: *mut f64) -> i32 {
    guard(|| {
        let fam = &handle(family, "family")?.0;
        let d = fam.dim();
        let l = to_elliptic(fam, &DVector::from_column_slice(slice(x, d, "x")?))?;
        out_slice(lambda, d, "lambda")?.copy_from_slice(&l.lambda);
        Ok(())
    })
}

/// Caustic parameters of the line `x + t v` into `params` (length `d − 1`).
///
/// # Safety
/// `x`, `v` must be valid for `d` doubles and `params` for `d − 1`.
#[no_mangle]
pub unsafe extern "C" fn kb_line_caustics(
    family: *const KbFamily,
    x: *const f64,
    v: *const f64,
    params: *mut f64,
) -> i32 {
    guard(|| {
        let fam = &handle(family, "family")?.0;
        let d = fam.dim();
        let set = line_caustics(
            fam,
            &DVector::from_column_slice(slice(x, d, "x")?),
            &DVector::from_column_slice(slice(v, d, "v")?),
        )?;
        out_slice(params, d - 1, "params")?.copy_from_slice(&set.params);
        Ok(())
    })
}

/// Boundary member `c` (a number such as `"1/2"`) of `family`.
///
/// # Safety
/// `family` must be live, `c` nul-terminated and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn kb_boundary_new(family: *const KbFamily, c: *const c_char, out: *mut *mut KbBoundary) -> i32 {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let fam = handle(family, "family")?.0.clone();
        let c: Number = text(c, "c")?.parse()?;
        *out = Box::into_raw(Box::new(KbBoundary(BoundaryQuadric::new(fam, c.to_rational()?)?)));
        Ok(())
    })
}

/// # Safety
/// `boundary` must come from [`kb_boundary_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn kb_boundary_free(boundary: *mut KbBoundary) {
    if !boundary.is_null() {
        drop(Box::from_raw(boundary));
    }
}

/// Chord billiard with `bounces` reflections from `(x0, v0)`.
///
/// # Safety
/// `x0`, `v0` must be valid for `d` doubles and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn kb_trace_chords(
    boundary: *const KbBoundary,
    x0: *const f64,
    v0: *const f64,
    bounces: usize,
    out: *mut *mut KbTrajectory,
) -> i32 {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let bd = &handle(boundary, "boundary")?.0;
        let d = bd.dim();
        let t = trace_chords(
            bd,
            &DVector::from_column_slice(slice(x0, d, "x0")?),
            &DVector::from_column_slice(slice(v0, d, "v0")?),
            bounces,
        )?;
        *out = Box::into_raw(Box::new(KbTrajectory(t)));
        Ok(())
    })
}

/// # Safety
/// `traj` must come from [`kb_trace_chords`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn kb_trajectory_free(traj: *mut KbTrajectory) {
    if !traj.is_null() {
        drop(Box::from_raw(traj));
    }
}

/// Number of bounces, or 0 for a null handle.
///
/// # Safety
/// `traj` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn kb_trajectory_len(traj: *const KbTrajectory) -> usize {
    traj.as_ref().map_or(0, |t| t.0.bounces.len())
}

/// Position and unit direction after `n` bounces (`n = 0` is the launch).
///
/// # Safety
/// `x`, `p` must be valid for `d` doubles.
#[no_mangle]
pub unsafe extern "C" fn kb_trajectory_state(traj: *const KbTrajectory, n: usize, x: *mut f64, p: *mut f64) -> i32 {
    guard(|| {
        let t = &handle(traj, "traj")?.0;
        let (xs, ps) = t
            .state_after(n)
            .ok_or_else(|| Fail::Code(KB_ERR_RANGE, format!("bounce {n} out of range")))?;
        let d = xs.len();
        out_slice(x, d, "x")?.copy_from_slice(xs.as_slice());
        out_slice(p, d, "p")?.copy_from_slice(ps.as_slice());
        Ok(())
    })
}

/// `|x_n − x_0| + |p̂_n − p̂_0|` into `residual`.
///
/// # Safety
/// `residual` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn kb_trajectory_closure(traj: *const KbTrajectory, n: usize, residual: *mut f64) -> i32 {
    guard(|| {
        let t = &handle(traj, "traj")?.0;
        let r = t.closure_residual(n).ok_or_else(|| Fail::Code(KB_ERR_RANGE, format!("bounce {n} out of range")))?;
        *residual.as_mut().ok_or_else(|| null("residual"))? = r;
        Ok(())
    })
}

/// Exact periodicity verdict. `periodic` receives 1, 0, or −1 when the test
/// does not apply (degenerate caustic).
///
/// # Safety
/// `a`, `mu` must be nul-terminated and `periodic` valid.
#[no_mangle]
pub unsafe extern "C" fn kb_cayley(a: *const c_char, mu: *const c_char, n: usize, periodic: *mut i32) -> i32 {
    guard(|| {
        let out = periodic.as_mut().ok_or_else(|| null("periodic"))?;
        let e = MinkowskiEllipsoid::new(rationals(a, "a")?, rationals(mu, "mu")?)?;
        let v = cayley_condition(&e, n)?;
        *out = match v.periodic {
            Some(true) => 1,
            Some(false) => 0,
            None => -1,
        };
        Ok(())
    })
}

/// Continuous period indicator for `a` (length `d + 1`) and `mu` (length
/// `d − 1`).
///
/// # Safety
/// Pointers must be valid for the stated lengths.
#[no_mangle]
pub unsafe extern "C" fn kb_period_indicator(a: *const f64, mu: *const f64, d: usize, n: usize, value: *mut f64) -> i32 {
    guard(|| {
        if d < 2 {
            return Err(Fail::Code(KB_ERR_RANGE, "d must be at least 2".into()));
        }
        let v = period_indicator_f64(slice(a, d + 1, "a")?, slice(mu, d - 1, "mu")?, n)?;
        *value.as_mut().ok_or_else(|| null("value"))? = v;
        Ok(())
    })
}

/// Runs the command-line harness on `argc` arguments (without the program
/// name). The printed output is returned in `output` (release it with
/// [`kb_string_free`]); the return value is the harness exit status.
///
/// # Safety
/// `argv` must hold `argc` nul-terminated strings and `output` be valid.
#[no_mangle]
pub unsafe extern "C" fn kb_run(argc: usize, argv: *const *const c_char, output: *mut *mut c_char) -> i32 {
    let mut status = KB_OK;
    let code = guard(|| {
        if output.is_null() || (argc > 0 && argv.is_null()) {
            return Err(null("argv/output"));
        }
        let mut args = vec!["klein-billiards".to_string()];
        for i in 0..argc {
            args.push(text(*argv.add(i), "argv")?.to_string());
        }
        let mut buf = Vec::new();
        status = klein_billiards::cli::run(&args, &mut buf);
        let s = CString::new(buf).map_err(|_| Fail::Code(KB_ERR_UTF8, "output contains nul".into()))?;
        *output = s.into_raw();
        Ok(())
    });
    if code != KB_OK {
        code
    } else {
        status
    }
}

/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn kb_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
