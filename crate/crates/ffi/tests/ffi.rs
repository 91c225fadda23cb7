use std::ffi::{CStr, CString};
use std::ptr;

use curvkit::samplers::sample_sphere;
use curvkit_ffi::*;

fn last_error() -> String {
    let p = curvkit_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn sphere_coords(count: usize) -> Vec<f64> {
    sample_sphere(2, count, 11).unwrap().cloud.coords().to_vec()
}

#[test]
fn estimate_from_point_cloud() {
    let n = 800;
    let coords = sphere_coords(n);
    unsafe {
        let mut d = ptr::null_mut();
        assert_eq!(curvkit_distances_from_points(n, 3, coords.as_ptr(), 15, &mut d), CurvkitStatus::Ok);
        assert_eq!(curvkit_distances_len(d), n);

        let (mut n_hat, mut raw) = (0usize, 0.0f64);
        assert_eq!(curvkit_estimate_dimension(d, 20, 60, &mut n_hat, &mut raw), CurvkitStatus::Ok);
        assert_eq!(n_hat, 2);
        assert!((raw - 2.0).abs() < 0.3);

        let mut f = ptr::null_mut();
        assert_eq!(
            curvkit_density_kde(d, n_hat, CurvkitKernel::Gaussian, 0.0, &mut f),
            CurvkitStatus::Ok
        );
        let mut rho = vec![0.0; n];
        assert_eq!(curvkit_density_values(f, rho.as_mut_ptr(), n), CurvkitStatus::Ok);
        assert!(rho.iter().all(|v| *v > 0.0));

        let points = [0usize, 7, 100];
        let radii = CurvkitRadii {
            r_min: 0.0,
            r_max: std::f64::consts::FRAC_PI_2,
            grid_step: 0.0,
        };
        let mut r = ptr::null_mut();
        assert_eq!(
            curvkit_estimate(d, f, n_hat, radii, points.as_ptr(), points.len(), &mut r),
            CurvkitStatus::Ok
        );
        assert_eq!(curvkit_reports_len(r), 3);
        let mut rep = CurvkitReport {
            index: 0,
            n_hat: 0,
            c_hat: 0.0,
            s_hat: 0.0,
            r_max: 0.0,
        };
        assert_eq!(curvkit_reports_get(r, 1, &mut rep), CurvkitStatus::Ok);
        assert_eq!(rep.index, 7);
        assert_eq!(rep.s_hat, -6.0 * (rep.n_hat as f64 + 2.0) * rep.c_hat);
        let mut s = [0.0; 3];
        assert_eq!(curvkit_reports_scalar(r, s.as_mut_ptr(), 3), CurvkitStatus::Ok);
        assert!(s.iter().all(|v| *v > 0.0), "{s:?}");
        assert_eq!(curvkit_reports_get(r, 3, &mut rep), CurvkitStatus::InvalidArgument);

        curvkit_reports_free(r);
        curvkit_density_free(f);
        curvkit_distances_free(d);
    }
}

#[test]
fn matrix_constructors_agree() {
    let n = 5;
    let full: Vec<f64> = (0..n * n)
        .map(|k| {
            let (i, j) = (k / n, k % n);
            (i as f64 - j as f64).abs()
        })
        .collect();
    let lower: Vec<f64> = (1..n).flat_map(|i| (0..i).map(move |j| (i - j) as f64)).collect();
    unsafe {
        let (mut a, mut b) = (ptr::null_mut(), ptr::null_mut());
        assert_eq!(curvkit_distances_from_square(n, full.as_ptr(), &mut a), CurvkitStatus::Ok);
        assert_eq!(
            curvkit_distances_from_lower_triangle(n, lower.as_ptr(), lower.len(), &mut b),
            CurvkitStatus::Ok
        );
        for i in 0..n {
            for j in 0..n {
                let (mut x, mut y) = (0.0, 0.0);
                curvkit_distances_get(a, i, j, &mut x);
                curvkit_distances_get(b, i, j, &mut y);
                assert_eq!(x, y);
                assert_eq!(x, full[i * n + j]);
            }
        }
        curvkit_distances_free(a);
        curvkit_distances_free(b);
    }
}

#[test]
fn load_from_file_and_oracle_density() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.bin");
    let s = sample_sphere(2, 300, 5).unwrap();
    s.exact_distances().unwrap().unwrap().save_binary(&path).unwrap();
    let c = CString::new(path.to_str().unwrap()).unwrap();
    unsafe {
        let mut d = ptr::null_mut();
        assert_eq!(curvkit_distances_load(c.as_ptr(), &mut d), CurvkitStatus::Ok);
        assert_eq!(curvkit_distances_len(d), 300);
        let mut f = ptr::null_mut();
        assert_eq!(
            curvkit_density_from_values(s.true_density.as_ptr(), 300, 2, &mut f),
            CurvkitStatus::Ok
        );
        let radii = CurvkitRadii {
            r_min: 0.0,
            r_max: 1.0,
            grid_step: 0.1,
        };
        let mut r = ptr::null_mut();
        assert_eq!(curvkit_estimate(d, f, 2, radii, ptr::null(), 0, &mut r), CurvkitStatus::Ok);
        assert_eq!(curvkit_reports_len(r), 300);
        curvkit_reports_free(r);
        curvkit_density_free(f);
        curvkit_distances_free(d);
    }
}

#[test]
fn errors_set_codes_and_messages() {
    curvkit_clear_error();
    assert!(curvkit_last_error().is_null());
    unsafe {
        let mut d = ptr::null_mut();
        let missing = CString::new("/nonexistent/matrix.bin").unwrap();
        assert_eq!(curvkit_distances_load(missing.as_ptr(), &mut d), CurvkitStatus::Io);
        assert!(last_error().contains("/nonexistent/matrix.bin"));
        assert!(d.is_null());

        assert_eq!(
            curvkit_distances_from_lower_triangle(3, ptr::null(), 3, &mut d),
            CurvkitStatus::NullPointer
        );
        assert!(last_error().contains("entries"));

        let bad = [1.0, -2.0, 1.0];
        assert_eq!(
            curvkit_distances_from_lower_triangle(3, bad.as_ptr(), 3, &mut d),
            CurvkitStatus::InvalidData
        );

        let two_clusters = [0.0, 0.0, 0.1, 0.0, 10.0, 0.0, 10.1, 0.0];
        assert_eq!(
            curvkit_distances_from_points(4, 2, two_clusters.as_ptr(), 1, &mut d),
            CurvkitStatus::Disconnected
        );
        assert!(last_error().contains("unreachable"));

        let mut n = 0usize;
        assert_eq!(
            curvkit_estimate_dimension(ptr::null(), 2, 3, &mut n, ptr::null_mut()),
            CurvkitStatus::NullPointer
        );
        curvkit_distances_free(ptr::null_mut());
        assert_eq!(curvkit_distances_len(ptr::null()), 0);
    }
}

#[test]
fn version_matches_crate() {
    let v = unsafe { CStr::from_ptr(curvkit_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_compiles_as_c() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("probe.c");
    std::fs::write(
        &src,
        "#include \"curvkit.h\"\n\
         int main(void) {\n\
           CurvkitDistances *d = NULL;\n\
           CurvkitRadii radii = {0.0, 1.0, 0.0};\n\
           CurvkitStatus s = curvkit_distances_load(\"x\", &d);\n\
           (void)radii;\n\
           return s == CURVKIT_STATUS_OK ? 0 : 1;\n\
         }\n",
    )
    .unwrap();
    let include = concat!(env!("CARGO_MANIFEST_DIR"), "/include");
    let status = std::process::Command::new(std::env::var("CC").unwrap_or_else(|_| "cc".into()))
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I", include])
        .arg(&src)
        .status()
        .expect("a C compiler is available");
    assert!(status.success());
}
