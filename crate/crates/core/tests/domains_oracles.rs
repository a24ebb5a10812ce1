//! Stretched profiles, the triangle and the sector against closed forms,
//! tabulated Bessel zeros, domain monotonicity and the half-line pipeline.

use std::f64::consts::PI;

use proptest::prelude::*;
use specdegen::domains::*;
use specdegen::halfline::{solve, HalfLineProblem};
use specdegen::Boundary;

#[test]
fn linear_rho_stretches_to_exponentials() {
    let p = stretch_sigma(&StretchSpec::from_expression("x", 1.0).unwrap()).unwrap();
    for i in 0..=2000 {
        let s = i as f64 * 0.01;
        let e = (-2.0 * s).exp();
        assert!((p.sigma(s) - e).abs() <= 1e-12, "s = {s}");
        assert!((p.dsigma(s) + 2.0 * e).abs() <= 1e-12);
    }
    let p2 = stretch_sigma(&StretchSpec::from_expression("x", 2.0).unwrap()).unwrap();
    assert!((p2.sigma0() - 4.0).abs() < 1e-14);
    for s in [0.5f64, 3.0, 11.0] {
        let e = 4.0 * (-2.0 * s).exp();
        assert!((p2.sigma(s) - e).abs() <= 1e-12 * e);
    }
}

#[test]
fn logistic_rho_against_closed_inverse() {
    // ρ = x(1 + x): ψ(x) = ln(c/(1+c)) − ln(x/(1+x)), so ψ⁻¹(s) = q/(1 − q)
    // with q = c/(1+c)·e^{−s}.
    let c = 0.8;
    let p = stretch_sigma(&StretchSpec::from_expression("x*(1+x)", c).unwrap()).unwrap();
    for i in 0..=300 {
        let s = i as f64 * 0.1;
        let q = c / (1.0 + c) * (-s).exp();
        let x = q / (1.0 - q);
        let rho = x * (1.0 + x);
        let sigma = rho * rho;
        let dsigma = -2.0 * rho * rho * (1.0 + 2.0 * x);
        assert!((p.sigma(s) - sigma).abs() <= 1e-10 * sigma, "s = {s}");
        assert!((p.dsigma(s) - dsigma).abs() <= 1e-9 * dsigma.abs());
    }
    p.validate().unwrap();
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn sigma_starts_at_rho_c_squared(a in 0.2f64..3.0, b in 0.0f64..2.0, c in 0.1f64..2.0) {
        let spec = StretchSpec::from_expression(&format!("{a}*x + {b}*x^2"), c).unwrap();
        let p = stretch_sigma(&spec).unwrap();
        let rc = a * c + b * c * c;
        prop_assert!((p.sigma0() - rc * rc).abs() <= 1e-12 * rc * rc);
        prop_assert!(p.dsigma(1.0) < 0.0);
    }

    #[test]
    fn structured_meshes_are_valid(t in 0.05f64..1.0, per in 8usize..20) {
        let h = t / per as f64;
        let mesh = TriangleMesh::new(t, h).unwrap();
        prop_assert!(mesh.ny >= MIN_ACROSS);
        prop_assert!(mesh.min_area() > 0.0);
        prop_assert!(mesh.quasi_uniformity() <= 4.0);
        for (v, b) in mesh.vertices.iter().zip(&mesh.boundary) {
            let on_edge = v[1].abs() < 1e-14
                || (v[0] - 1.0).abs() < 1e-14
                || (v[1] - t * v[0]).abs() < 1e-14;
            prop_assert_eq!(on_edge, *b);
        }
    }
}

#[test]
fn thin_mesh_is_refused_with_required_size() {
    let e = triangle_spectrum(0.05, 3, 0.01).unwrap_err();
    assert_eq!(
        e,
        DomainError::Underresolved {
            across: 5,
            required: 8,
            h_required: 0.05 / 8.0
        }
    );
}

#[test]
fn isoceles_triangle_levels_and_multiplicity() {
    // antisymmetric square modes: π²(j² + k²), j > k ≥ 1
    let mut exact: Vec<u32> = (1..12u32)
        .flat_map(|k| (k + 1..12).map(move |j| j * j + k * k))
        .collect();
    exact.sort();
    let r = triangle_spectrum(1.0, 20, 1.0 / 64.0).unwrap();
    for (i, l) in r.lambda_extrap.iter().enumerate() {
        let e = exact[i] as f64 * PI * PI;
        assert!(
            (l - e).abs() <= 1e-3 * e,
            "{i}: {} vs {}",
            l / (PI * PI),
            exact[i]
        );
    }
    assert!((r.lambda_extrap[0] / (5.0 * PI * PI) - 1.0).abs() < 1e-5);
    // 65 = 8² + 1² = 7² + 4²
    assert_eq!(&exact[18..20], &[65, 65]);
    let pair = (r.lambda_extrap[19] - r.lambda_extrap[18]) / r.lambda_extrap[18];
    let neighbour = (r.lambda_extrap[18] - r.lambda_extrap[17]) / r.lambda_extrap[17];
    assert!(pair < 1e-3 && neighbour > 0.05, "{pair} {neighbour}");
}

#[test]
fn refinement_brackets_and_monotone_in_t() {
    let a = triangle_spectrum(0.5, 6, 0.5 / 16.0).unwrap();
    for k in 0..6 {
        assert!(a.coarse.values[k] > a.fine.values[k]);
        assert!(a.fine.values[k] > a.lambda_extrap[k]);
        assert!(a.error_estimate[k] > 0.0);
    }
    let b = triangle_spectrum(0.4, 6, 0.4 / 16.0).unwrap();
    for k in 0..6 {
        assert!(b.lambda_extrap[k] > a.lambda_extrap[k]);
    }
    assert!(a.lambda_extrap[0] > PI * PI * (1.0 + 4.0));
}

#[test]
fn generic_triangle_is_simple() {
    let r = triangle_spectrum(0.3, 10, 0.3 / 12.0).unwrap();
    for w in r.lambda_extrap.windows(2) {
        assert!((w[1] - w[0]) / w[1] > 1e-6);
    }
}

#[test]
fn bessel_zeros_match_tables() {
    let cases = [
        (20.0, 3, 33.988_702_785_235_19),
        (7.5, 5, 25.602_855_953_810_647),
        (PI / 0.1f64.atan(), 1, 37.709_109_400_515_74),
        (2.0 * PI / 0.1f64.atan(), 2, 76.745_431_508_050_46),
    ];
    for (nu, k, j) in cases {
        let z = bessel_dirichlet_zeros(nu, k).unwrap();
        assert!((z[k - 1].sqrt() - j).abs() < 1e-9 * j, "nu = {nu}");
    }
}

#[test]
fn sector_radial_branches_equal_the_stretched_half_line() {
    let profile = stretch_sigma(&StretchSpec::from_expression("x", 1.0).unwrap()).unwrap();
    for t in [0.5, 0.2, 0.1] {
        let s = sector_spectrum(t, 12).unwrap();
        for ell in [1, 2] {
            let c = sector_correspondence(t, ell);
            let ks: Vec<&SectorEntry> = s.entries.iter().filter(|e| e.ell == ell).collect();
            if ks.is_empty() {
                continue;
            }
            let p =
                HalfLineProblem::new(c.t_half, c.mu, profile.clone(), Boundary::Dirichlet).unwrap();
            let hl = solve(&p, ks.len().min(3)).unwrap();
            for (e, lh) in ks.iter().zip(&hl.eigenvalues) {
                let predicted = c.calibration * lh;
                assert!(
                    (predicted - e.renormalized).abs() <= 1e-5 * e.renormalized,
                    "t = {t}, (ℓ, k) = ({ell}, {}): {predicted} vs {}",
                    e.k,
                    e.renormalized
                );
            }
        }
    }
}

#[test]
fn sector_order_and_thresholds() {
    for t in [0.1, 0.01, 0.001] {
        let c = sector_correspondence(t, 3);
        assert!((c.nu * t / (3.0 * PI) - 1.0).abs() < t * t);
    }
    let mut prev = [f64::INFINITY; 2];
    for t in [0.2, 0.1, 0.05, 0.025] {
        let s = sector_spectrum(t, 40).unwrap();
        for ell in [1, 2] {
            let e = s.entries.iter().find(|e| e.ell == ell && e.k == 1).unwrap();
            let excess = e.renormalized - (ell as f64 * PI).powi(2);
            assert!(excess > 0.0 && excess < prev[ell - 1], "t = {t}, ℓ = {ell}");
            prev[ell - 1] = excess;
        }
    }
}

#[test]
fn triangle_lies_below_sector_and_close_to_it() {
    let mut scaled = Vec::new();
    for t in [0.2, 0.1] {
        let tri = triangle_spectrum(t, 10, t / 16.0).unwrap();
        let sec = sector_spectrum(t, 10).unwrap();
        // S_t ⊂ T_t
        for (a, b) in tri.renormalized.iter().zip(sec.renormalized()) {
            assert!(*a < b);
        }
        let c = compare_spectra(&tri.renormalized, &sec.renormalized(), 10).unwrap();
        assert!(c.hausdorff > 0.0 && c.hausdorff < t * 10.0);
        scaled.push(c.hausdorff / t);
    }
    assert!(scaled[1] < scaled[0]);
}
