//! Exercises the C ABI through the exported functions themselves.

use std::ffi::{CStr, CString};
use std::path::Path;
use std::ptr;

use latdens_ffi::*;

fn last_error() -> String {
    unsafe {
        CStr::from_ptr(latdens_last_error())
            .to_string_lossy()
            .into_owned()
    }
}

#[test]
fn version_is_a_static_string() {
    let v = unsafe { CStr::from_ptr(latdens_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn cbc_writes_the_generating_vector() {
    let mut z = [0u64; 2];
    let status = unsafe { latdens_cbc(5, 2, 2, z.as_mut_ptr()) };
    assert_eq!(status, LatdensStatus::Ok);
    assert_eq!(z, [1, 2]);
    assert!(last_error().is_empty());
}

#[test]
fn cbc_rejects_composite_modulus() {
    let mut z = [0u64; 2];
    let status = unsafe { latdens_cbc(6, 2, 2, z.as_mut_ptr()) };
    assert_eq!(status, LatdensStatus::InvalidArgument);
    assert!(last_error().contains("prime"), "message: {}", last_error());
}

#[test]
fn fit_save_load_evaluate_round_trip() {
    let (dim, count) = (2usize, 500usize);
    let mut sample = vec![0.0f64; count * dim];
    let status = unsafe { latdens_sample(dim, count, 42, sample.as_mut_ptr()) };
    assert_eq!(status, LatdensStatus::Ok);
    assert!(sample.iter().all(|v| (0.0..1.0).contains(v)));

    let mut handle: *mut LatdensEstimator = ptr::null_mut();
    let status = unsafe { latdens_fit(dim, 2, 5, 0.1, sample.as_ptr(), count, &mut handle) };
    assert_eq!(status, LatdensStatus::Ok);
    assert!(!handle.is_null());
    assert_eq!(unsafe { latdens_dimension(handle) }, 2);
    assert_eq!(unsafe { latdens_coefficient_count(handle) }, 5);

    let mut integral = 0.0f64;
    assert_eq!(
        unsafe { latdens_integral(handle, &mut integral) },
        LatdensStatus::Ok
    );
    assert!((integral - 1.0).abs() < 0.3, "integral {integral}");

    let point = [0.25f64, 0.75];
    let mut value = 0.0f64;
    assert_eq!(
        unsafe { latdens_evaluate(handle, point.as_ptr(), 2, &mut value) },
        LatdensStatus::Ok
    );
    assert!(value.is_finite());

    let dir = tempfile::tempdir().unwrap();
    let path = CString::new(dir.path().join("est.txt").to_str().unwrap()).unwrap();
    assert_eq!(
        unsafe { latdens_save(handle, path.as_ptr()) },
        LatdensStatus::Ok
    );

    let mut reloaded: *mut LatdensEstimator = ptr::null_mut();
    assert_eq!(
        unsafe { latdens_load(path.as_ptr(), &mut reloaded) },
        LatdensStatus::Ok
    );
    let mut value2 = 0.0f64;
    assert_eq!(
        unsafe { latdens_evaluate(reloaded, point.as_ptr(), 2, &mut value2) },
        LatdensStatus::Ok
    );
    assert_eq!(value.to_bits(), value2.to_bits());

    unsafe {
        latdens_free(handle);
        latdens_free(reloaded);
        latdens_free(ptr::null_mut());
    }
}

#[test]
fn fit_matches_the_core_library() {
    let (dim, count) = (1usize, 300usize);
    let mut sample = vec![0.0f64; count * dim];
    assert_eq!(
        unsafe { latdens_sample(dim, count, 9, sample.as_mut_ptr()) },
        LatdensStatus::Ok
    );

    let mut handle: *mut LatdensEstimator = ptr::null_mut();
    assert_eq!(
        unsafe { latdens_fit(dim, 2, 7, 0.05, sample.as_ptr(), count, &mut handle) },
        LatdensStatus::Ok
    );

    let weights = latdens::kernel::ProductWeights::polynomial_decay(dim, 2.0).unwrap();
    let rule = latdens::lattice::cbc_construct(7, dim, 2, &weights).unwrap();
    let kernel = latdens::kernel::KorobovKernel::new(2.0, weights).unwrap();
    let rows: Vec<Vec<f64>> = sample.chunks_exact(dim).map(|c| c.to_vec()).collect();
    let core = latdens::estimator::fit(&rule, &kernel, 0.05, &rows).unwrap();

    let mut integral = 0.0f64;
    unsafe { latdens_integral(handle, &mut integral) };
    assert_eq!(integral.to_bits(), core.integral().to_bits());

    let mut value = 0.0f64;
    unsafe { latdens_evaluate(handle, [0.6f64].as_ptr(), 1, &mut value) };
    assert_eq!(value.to_bits(), core.evaluate(&[0.6]).unwrap().to_bits());

    unsafe { latdens_free(handle) };
}

#[test]
fn error_paths_set_status_and_message() {
    let sample = [0.1f64, 0.9];
    let mut handle: *mut LatdensEstimator = ptr::null_mut();

    // Non-positive lambda is an argument error.
    let status = unsafe { latdens_fit(1, 2, 5, -1.0, sample.as_ptr(), 2, &mut handle) };
    assert_eq!(status, LatdensStatus::InvalidArgument);
    assert!(
        last_error().contains("must be positive"),
        "message: {}",
        last_error()
    );

    // Unsupported smoothness.
    let status = unsafe { latdens_fit(1, 3, 5, 0.1, sample.as_ptr(), 2, &mut handle) };
    assert_eq!(status, LatdensStatus::InvalidArgument);

    // Missing file is a runtime error carrying the path.
    let path = CString::new("/nonexistent/est.txt").unwrap();
    let status = unsafe { latdens_load(path.as_ptr(), &mut handle) };
    assert_eq!(status, LatdensStatus::RuntimeFailure);
    assert!(handle.is_null());

    // Null pointers are reported, not dereferenced.
    assert_eq!(
        unsafe { latdens_fit(1, 2, 5, 0.1, ptr::null(), 2, &mut handle) },
        LatdensStatus::NullPointer
    );
    assert_eq!(
        unsafe { latdens_evaluate(ptr::null(), sample.as_ptr(), 1, &mut 0.0) },
        LatdensStatus::NullPointer
    );
    assert_eq!(unsafe { latdens_dimension(ptr::null()) }, 0);

    // Dimension mismatch at evaluation time.
    let mut ok_handle: *mut LatdensEstimator = ptr::null_mut();
    let mut sample2 = vec![0.0f64; 100];
    unsafe { latdens_sample(1, 100, 5, sample2.as_mut_ptr()) };
    assert_eq!(
        unsafe { latdens_fit(1, 2, 5, 0.1, sample2.as_ptr(), 100, &mut ok_handle) },
        LatdensStatus::Ok
    );
    let mut out = 0.0f64;
    let status = unsafe { latdens_evaluate(ok_handle, [0.1f64, 0.2].as_ptr(), 2, &mut out) };
    assert_eq!(status, LatdensStatus::InvalidArgument);
    assert!(
        last_error().contains("dimension"),
        "message: {}",
        last_error()
    );
    unsafe { latdens_free(ok_handle) };
}

#[test]
fn generated_header_covers_every_export() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/latdens.h");
    let text = std::fs::read_to_string(&header)
        .unwrap_or_else(|e| panic!("missing header {}: {e}", header.display()));
    for symbol in [
        "latdens_version",
        "latdens_last_error",
        "latdens_cbc",
        "latdens_sample",
        "latdens_fit",
        "latdens_load",
        "latdens_save",
        "latdens_evaluate",
        "latdens_integral",
        "latdens_dimension",
        "latdens_coefficient_count",
        "latdens_free",
        "LATDENS_STATUS_OK",
        "struct LatdensEstimator",
    ] {
        assert!(text.contains(symbol), "header lacks {symbol}");
    }
}
