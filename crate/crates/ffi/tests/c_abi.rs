use std::ffi::{CStr, CString};
use std::ptr;

use klein_billiards_ffi::*;

fn family(b: &str) -> *mut KbFamily {
    let b = CString::new(b).unwrap();
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { kb_family_new(b.as_ptr(), &mut out) }, KB_OK);
    out
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(kb_last_error_message()) }.to_string_lossy().into_owned()
}

#[test]
fn family_and_elliptic_coordinates() {
    let f = family("2,1");
    assert_eq!(unsafe { kb_family_dim(f) }, 2);
    let x = [0.5, 0.5];
    let mut lambda = [0.0; 2];
    assert_eq!(unsafe { kb_to_elliptic(f, x.as_ptr(), lambda.as_mut_ptr()) }, KB_OK);
    assert!(lambda[0] > 1.0 && lambda[0] < 2.0 && lambda[1] < 1.0);
    unsafe { kb_family_free(f) };
}

#[test]
fn errors_carry_codes_and_messages() {
    let b = CString::new("1,2").unwrap();
    let mut out = ptr::null_mut();
    let code = unsafe { kb_family_new(b.as_ptr(), &mut out) };
    assert_eq!(code, klein_billiards::Error::NonStrictFamily(String::new()).exit_code());
    assert!(out.is_null());
    assert!(last_error().contains("strictly decreasing"));
    assert_eq!(unsafe { kb_family_new(ptr::null(), &mut out) }, KB_ERR_NULL);
    assert_eq!(unsafe { kb_family_dim(ptr::null()) }, 0);
}

#[test]
fn chord_trajectory_round_trip() {
    let f = family("5,2");
    let c = CString::new("1").unwrap();
    let mut bd = ptr::null_mut();
    assert_eq!(unsafe { kb_boundary_new(f, c.as_ptr(), &mut bd) }, KB_OK);
    let (x0, v0) = ([-2.0, 0.0], [1.0, 0.0]);
    let mut tr = ptr::null_mut();
    assert_eq!(unsafe { kb_trace_chords(bd, x0.as_ptr(), v0.as_ptr(), 4, &mut tr) }, KB_OK);
    assert_eq!(unsafe { kb_trajectory_len(tr) }, 4);
    let (mut x, mut p) = ([0.0; 2], [0.0; 2]);
    assert_eq!(unsafe { kb_trajectory_state(tr, 1, x.as_mut_ptr(), p.as_mut_ptr()) }, KB_OK);
    assert_eq!(x, [2.0, 0.0]);
    assert_eq!(p, [-1.0, 0.0]);
    let mut r = 1.0;
    assert_eq!(unsafe { kb_trajectory_closure(tr, 2, &mut r) }, KB_OK);
    assert!(r < 1e-12);
    assert_eq!(unsafe { kb_trajectory_state(tr, 9, x.as_mut_ptr(), p.as_mut_ptr()) }, KB_ERR_RANGE);
    unsafe {
        kb_trajectory_free(tr);
        kb_boundary_free(bd);
        kb_family_free(f);
    }
}

#[test]
fn cayley_and_indicator() {
    let (a, mu) = (CString::new("5,3,2,1").unwrap(), CString::new("4,3/2").unwrap());
    let mut periodic = 7;
    assert_eq!(unsafe { kb_cayley(a.as_ptr(), mu.as_ptr(), 2, &mut periodic) }, KB_OK);
    assert_eq!(periodic, 0);
    let (a, mu) = ([4.0, 2.0, 1.0], [0.8]);
    let mut v = 1.0;
    assert_eq!(unsafe { kb_period_indicator(a.as_ptr(), mu.as_ptr(), 2, 4, &mut v) }, KB_OK);
    assert!(v < 1e-12, "{v}");
}

#[test]
fn harness_through_the_abi() {
    let args: Vec<CString> = ["cayley", "--n", "0"].iter().map(|s| CString::new(*s).unwrap()).collect();
    let ptrs: Vec<*const std::ffi::c_char> = args.iter().map(|a| a.as_ptr()).collect();
    let mut out = ptr::null_mut();
    let code = unsafe { kb_run(ptrs.len(), ptrs.as_ptr(), &mut out) };
    assert_eq!(code, 61);
    let text = unsafe { CStr::from_ptr(out) }.to_string_lossy().into_owned();
    assert!(text.contains("BadParameter"));
    unsafe { kb_string_free(out) };
}

#[test]
fn header_lists_every_export() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/klein_billiards.h")).unwrap();
    for name in [
        "kb_last_error_message",
        "kb_family_new",
        "kb_family_free",
        "kb_to_elliptic",
        "kb_line_caustics",
        "kb_boundary_new",
        "kb_trace_chords",
        "kb_trajectory_state",
        "kb_trajectory_closure",
        "kb_cayley",
        "kb_period_indicator",
        "kb_run",
        "kb_string_free",
        "typedef struct KbFamily KbFamily",
    ] {
        assert!(header.contains(name), "{name}");
    }
}
