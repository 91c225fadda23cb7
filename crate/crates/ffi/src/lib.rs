//! C interface to the curvkit estimator.
//!
//! Objects are opaque handles created by `*_new`/`*_load`-style functions and
//! released with the matching `*_free`. Every fallible call returns a
//! [`CurvkitStatus`]; on failure [`curvkit_last_error`] describes the cause.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use curvkit::curvature::{CurvatureEstimator, CurvatureReport, ScheduleMode};
use curvkit::graph::{build_knn_graph, shortest_path_distances};
use curvkit::intrinsic::{default_bandwidth, kde_density, levina_bickel, DensityField, Kernel};
use curvkit::metric::{
    load_distance_matrix, pairwise_euclidean, CloudMetric, DistanceMatrix, EvaluationSet, MatrixFormat, Metric,
    PointCloud,
};
use curvkit::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurvkitStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Io = 3,
    Parse = 4,
    InvalidData = 5,
    Disconnected = 6,
    ZeroDensity = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurvkitKernel {
    Gaussian = 0,
    Biweight = 1,
}

impl From<CurvkitKernel> for Kernel {
    fn from(k: CurvkitKernel) -> Self {
        match k {
            CurvkitKernel::Gaussian => Kernel::Gaussian,
            CurvkitKernel::Biweight => Kernel::Biweight,
        }
    }
}

/// Radius schedule. `grid_step <= 0` selects nearest-neighbor radii.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvkitRadii {
    pub r_min: f64,
    pub r_max: f64,
    pub grid_step: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvkitReport {
    pub index: usize,
    pub n_hat: usize,
    pub c_hat: f64,
    pub s_hat: f64,
    /// Largest radius actually used.
    pub r_max: f64,
}

/// Symmetric distance matrix.
pub struct CurvkitDistances(DistanceMatrix);

/// Per-point density values.
pub struct CurvkitDensity(DensityField);

/// Curvature estimates in evaluation order.
pub struct CurvkitReports(Vec<CurvatureReport>);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> CurvkitStatus {
    match e {
        Error::Stage { source, .. } => status_of(source),
        Error::Io { .. } => CurvkitStatus::Io,
        Error::Parse { .. } | Error::Format(_) | Error::Config(_) => CurvkitStatus::Parse,
        Error::InvalidMatrix(_) | Error::InvalidCloud(_) | Error::NotEmbedded(_) => CurvkitStatus::InvalidData,
        Error::IndexOutOfRange { .. } | Error::InvalidParameter(_) => CurvkitStatus::InvalidArgument,
        Error::Disconnected { .. } => CurvkitStatus::Disconnected,
        Error::ZeroDensity { .. } => CurvkitStatus::ZeroDensity,
    }
}

enum Failure {
    Null(&'static str),
    Invalid(String),
    Core(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> CurvkitStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CurvkitStatus::Ok,
        Ok(Err(Failure::Null(what))) => {
            set_error(format!("{what} is null"));
            CurvkitStatus::NullPointer
        }
        Ok(Err(Failure::Invalid(m))) => {
            set_error(m);
            CurvkitStatus::InvalidArgument
        }
        Ok(Err(Failure::Core(e))) => {
            let status = status_of(&e);
            set_error(e.to_string());
            status
        }
        Err(panic) => {
            let m = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("internal error: {m}"));
            CurvkitStatus::Panic
        }
    }
}

unsafe fn slice<'a, T>(ptr: *const T, len: usize, what: &'static str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if ptr.is_null() {
        return Err(Failure::Null(what));
    }
    Ok(std::slice::from_raw_parts(ptr, len))
}

unsafe fn slice_mut<'a, T>(ptr: *mut T, len: usize, what: &'static str) -> Result<&'a mut [T], Failure> {
    if len == 0 {
        return Ok(&mut []);
    }
    if ptr.is_null() {
        return Err(Failure::Null(what));
    }
    Ok(std::slice::from_raw_parts_mut(ptr, len))
}

unsafe fn handle<'a, T>(ptr: *const T, what: &'static str) -> Result<&'a T, Failure> {
    ptr.as_ref().ok_or(Failure::Null(what))
}

unsafe fn emit<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::Null("out"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

fn square_len(n: usize) -> Result<usize, Failure> {
    n.checked_mul(n)
        .ok_or_else(|| Failure::Invalid(format!("{n} points overflow the matrix size")))
}

/// Message for the last failed call on this thread, or null. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn curvkit_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

#[no_mangle]
pub extern "C" fn curvkit_clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn curvkit_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Matrix from its strict lower triangle, row by row: `d(1,0), d(2,0), d(2,1), ...`.
///
/// # Safety
/// `entries` must point to `len` readable doubles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn curvkit_distances_from_lower_triangle(
    n_points: usize,
    entries: *const f64,
    len: usize,
    out: *mut *mut CurvkitDistances,
) -> CurvkitStatus {
    guard(|| {
        let entries = slice(entries, len, "entries")?;
        let m = DistanceMatrix::from_lower_triangle(n_points, entries.to_vec())?;
        emit(out, CurvkitDistances(m))
    })
}

/// Matrix from a row-major `n_points × n_points` array, which must be symmetric.
///
/// # Safety
/// `values` must point to `n_points * n_points` readable doubles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn curvkit_distances_from_square(
    n_points: usize,
    values: *const f64,
    out: *mut *mut CurvkitDistances,
) -> CurvkitStatus {
    guard(|| {
        let values = slice(values, square_len(n_points)?, "values")?;
        let rows: Vec<Vec<f64>> = values.chunks(n_points.max(1)).map(<[f64]>::to_vec).collect();
        emit(out, CurvkitDistances(DistanceMatrix::from_full(&rows)?))
    })
}

/// Matrix read from a file; `.csv` is parsed as text, anything else as binary.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn curvkit_distances_load(path: *const c_char, out: *mut *mut CurvkitDistances) -> CurvkitStatus {
    guard(|| {
        if path.is_null() {
            return Err(Failure::Null("path"));
        }
        let path = CStr::from_ptr(path)
            .to_str()
            .map_err(|_| Failure::Invalid("path is not valid UTF-8".into()))?;
        let path = Path::new(path);
        let m = load_distance_matrix(path, MatrixFormat::from_path(path))?;
        emit(out, CurvkitDistances(m))
    })
}

/// Distances between `n_points` points of dimension `ambient_dim`, stored row-major.
/// `k == 0` gives Euclidean distances; otherwise shortest paths in the k-nearest-neighbor graph.
///
/// # Safety
/// `coords` must point to `n_points * ambient_dim` readable doubles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn curvkit_distances_from_points(
    n_points: usize,
    ambient_dim: usize,
    coords: *const f64,
    k: usize,
    out: *mut *mut CurvkitDistances,
) -> CurvkitStatus {
    guard(|| {
        let len = n_points
            .checked_mul(ambient_dim)
            .ok_or_else(|| Failure::Invalid("coordinate count overflows".into()))?;
        let cloud = PointCloud::new(ambient_dim, slice(coords, len, "coords")?.to_vec())?;
        let m = if k == 0 {
            pairwise_euclidean(&cloud)?
        } else {
            shortest_path_distances(&build_knn_graph(&CloudMetric::euclidean(&cloud), k)?)?
        };
        emit(out, CurvkitDistances(m))
    })
}

/// Number of points, or 0 for a null handle.
///
/// # Safety
/// `d` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn curvkit_distances_len(d: *const CurvkitDistances) -> usize {
    d.as_ref().map_or(0, |d| d.0.len())
}

/// # Safety
/// `d` must be a live handle, `i` and `j` in range, and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn curvkit_distances_get(
    d: *const CurvkitDistances,
    i: usize,
    j: usize,
    out: *mut f64,
) -> CurvkitStatus {
    guard(|| {
        let d = handle(d, "distances")?;
        let n = d.0.len();
        if i >= n || j >= n {
            return Err(Error::IndexOutOfRange { index: i.max(j), len: n }.into());
        }
        *out.as_mut().ok_or(Failure::Null("out"))? = d.0.get(i, j);
        Ok(())
    })
}

/// # Safety
/// `d` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn curvkit_distances_free(d: *mut CurvkitDistances) {
    if !d.is_null() {
        drop(Box::from_raw(d));
    }
}

/// Levina-Bickel dimension averaged over `k1..=k2`. `raw_mean` may be null.
///
/// # Safety
/// `d` must be a live handle and `n_hat` writable.
#[no_mangle]
pub unsafe extern "C" fn curvkit_estimate_dimension(
    d: *const CurvkitDistances,
    k1: usize,
    k2: usize,
    n_hat: *mut usize,
    raw_mean: *mut f64,
) -> CurvkitStatus {
    guard(|| {
        let d = handle(d, "distances")?;
        let n_hat = n_hat.as_mut().ok_or(Failure::Null("n_hat"))?;
        let est = levina_bickel(&d.0, k1, k2)?;
        *n_hat = est.n_hat;
        if let Some(raw) = raw_mean.as_mut() {
            *raw = est.mean();
        }
        Ok(())
    })
}

/// Default kernel bandwidth: mean distance to the `⌈√N⌉`-th nearest neighbor.
///
/// # Safety
/// `d` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn curvkit_default_bandwidth(
    d: *const CurvkitDistances,
    n_hat: usize,
    out: *mut f64,
) -> CurvkitStatus {
    guard(|| {
        let d = handle(d, "distances")?;
        let out = out.as_mut().ok_or(Failure::Null("out"))?;
        *out = default_bandwidth(&d.0, n_hat)?;
        Ok(())
    })
}

/// Kernel density estimate over the given distances. `bandwidth <= 0` uses the default rule.
///
/// # Safety
/// `d` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn curvkit_density_kde(
    d: *const CurvkitDistances,
    n_hat: usize,
    kernel: CurvkitKernel,
    bandwidth: f64,
    out: *mut *mut CurvkitDensity,
) -> CurvkitStatus {
    guard(|| {
        let d = handle(d, "distances")?;
        let h = if bandwidth > 0.0 {
            bandwidth
        } else {
            default_bandwidth(&d.0, n_hat)?
        };
        emit(out, CurvkitDensity(kde_density(&d.0, n_hat, kernel.into(), h)?))
    })
}

/// Density field from known values, one per point.
///
/// # Safety
/// `values` must point to `len` readable doubles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn curvkit_density_from_values(
    values: *const f64,
    len: usize,
    n_hat: usize,
    out: *mut *mut CurvkitDensity,
) -> CurvkitStatus {
    guard(|| {
        let values = slice(values, len, "values")?;
        emit(out, CurvkitDensity(DensityField::oracle(values.to_vec(), n_hat)?))
    })
}

/// Number of values, or 0 for a null handle.
///
/// # Safety
/// `f` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn curvkit_density_len(f: *const CurvkitDensity) -> usize {
    f.as_ref().map_or(0, |f| f.0.len())
}

/// Copies the density values into `out`, which must hold exactly `len` doubles.
///
/// # Safety
/// `f` must be a live handle and `out` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn curvkit_density_values(f: *const CurvkitDensity, out: *mut f64, len: usize) -> CurvkitStatus {
    guard(|| {
        let f = handle(f, "density")?;
        if len != f.0.len() {
            return Err(Failure::Invalid(format!("buffer holds {len} values, field has {}", f.0.len())));
        }
        slice_mut(out, len, "out")?.copy_from_slice(f.0.values());
        Ok(())
    })
}

/// # Safety
/// `f` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn curvkit_density_free(f: *mut CurvkitDensity) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// Scalar curvature at `points` (all points when `points` is null), in ascending index order.
///
/// # Safety
/// Handles must be live, `points` null or pointing to `n_eval` indices, and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn curvkit_estimate(
    d: *const CurvkitDistances,
    density: *const CurvkitDensity,
    n_hat: usize,
    radii: CurvkitRadii,
    points: *const usize,
    n_eval: usize,
    out: *mut *mut CurvkitReports,
) -> CurvkitStatus {
    guard(|| {
        let d = handle(d, "distances")?;
        let field = handle(density, "density")?;
        let n = d.0.len();
        let eval = if points.is_null() {
            EvaluationSet::all(n)
        } else {
            EvaluationSet::new(slice(points, n_eval, "points")?.to_vec(), n)?
        };
        let schedule = if radii.grid_step > 0.0 {
            ScheduleMode::EqualSpacing { step: radii.grid_step }
        } else {
            ScheduleMode::NearestNeighbor
        };
        let est = CurvatureEstimator {
            r_min: radii.r_min,
            r_max: radii.r_max,
            schedule,
        };
        emit(out, CurvkitReports(est.estimate(&d.0, &field.0, &eval, n_hat)?))
    })
}

/// Number of reports, or 0 for a null handle.
///
/// # Safety
/// `r` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn curvkit_reports_len(r: *const CurvkitReports) -> usize {
    r.as_ref().map_or(0, |r| r.0.len())
}

/// # Safety
/// `r` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn curvkit_reports_get(
    r: *const CurvkitReports,
    i: usize,
    out: *mut CurvkitReport,
) -> CurvkitStatus {
    guard(|| {
        let r = handle(r, "reports")?;
        let rep = r.0.get(i).ok_or(Error::IndexOutOfRange { index: i, len: r.0.len() })?;
        *out.as_mut().ok_or(Failure::Null("out"))? = CurvkitReport {
            index: rep.index,
            n_hat: rep.n_hat,
            c_hat: rep.c_hat,
            s_hat: rep.s_hat,
            r_max: rep.r_max,
        };
        Ok(())
    })
}

/// Copies every `Ŝ` into `out`, which must hold exactly `len` doubles.
///
/// # Safety
/// `r` must be a live handle and `out` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn curvkit_reports_scalar(r: *const CurvkitReports, out: *mut f64, len: usize) -> CurvkitStatus {
    guard(|| {
        let r = handle(r, "reports")?;
        if len != r.0.len() {
            return Err(Failure::Invalid(format!("buffer holds {len} values, there are {} reports", r.0.len())));
        }
        for (o, rep) in slice_mut(out, len, "out")?.iter_mut().zip(&r.0) {
            *o = rep.s_hat;
        }
        Ok(())
    })
}

/// # Safety
/// `r` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn curvkit_reports_free(r: *mut CurvkitReports) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}
