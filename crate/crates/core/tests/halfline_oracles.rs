//! Half-line eigenvalues for σ = e^{−2x} against Bessel zeros.
//!
//! With r = e^{−x} the equation becomes Bessel's of order ν = √μ/t in the
//! variable √λ·r/t, so λ_k = t²·j²_{ν,k} (Dirichlet) or t²·j′²_{ν,k} (Neumann).
//! The zeros are computed here by RK4 on Bessel's equation, independently of
//! the library.

use std::f64::consts::PI;

use specdegen::halfline::*;
use specdegen::profile::WeightProfile;
use specdegen::Boundary;

/// v″ = −v′/ρ − (1 − ν²/ρ²)v
fn bessel_rhs(nu: f64, rho: f64, y: [f64; 2]) -> [f64; 2] {
    [y[1], -y[1] / rho - (1.0 - nu * nu / (rho * rho)) * y[0]]
}

fn rk4(nu: f64, rho: f64, y: [f64; 2], h: f64) -> [f64; 2] {
    let add = |a: [f64; 2], b: [f64; 2], s: f64| [a[0] + s * b[0], a[1] + s * b[1]];
    let k1 = bessel_rhs(nu, rho, y);
    let k2 = bessel_rhs(nu, rho + 0.5 * h, add(y, k1, 0.5 * h));
    let k3 = bessel_rhs(nu, rho + 0.5 * h, add(y, k2, 0.5 * h));
    let k4 = bessel_rhs(nu, rho + h, add(y, k3, h));
    [
        y[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        y[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
    ]
}

/// First `count` zeros of J_ν (component 0) or J′_ν (component 1).
fn bessel_zeros(nu: f64, count: usize, component: usize) -> Vec<f64> {
    // Frobenius start at ρ0 = ν/2, scaled by ρ0^{−ν}.
    let rho0 = 0.5 * nu;
    let (mut s, mut ds, mut c) = (1.0, 0.0, 1.0);
    for m in 1..200 {
        c *= -1.0 / (4.0 * m as f64 * (m as f64 + nu));
        let term = c * rho0.powi(2 * m as i32);
        s += term;
        ds += 2.0 * m as f64 * term / rho0;
        if term.abs() < 1e-18 * s.abs() {
            break;
        }
    }
    let mut y = [s, nu * s / rho0 + ds];
    let mut rho = rho0;
    let h = 1e-3;
    let mut zeros = Vec::new();
    while zeros.len() < count {
        let next = rk4(nu, rho, y, h);
        if y[component].signum() != next[component].signum() {
            let (mut a, mut b) = (0.0, h);
            while b - a > 1e-14 * rho {
                let m = 0.5 * (a + b);
                let v = rk4(nu, rho, y, m)[component];
                if v.signum() == y[component].signum() {
                    a = m;
                } else {
                    b = m;
                }
            }
            zeros.push(rho + 0.5 * (a + b));
        }
        y = next;
        rho += h;
    }
    zeros
}

#[test]
fn bessel_oracle_sanity() {
    // j_{0,1}, j_{1,1}, j′_{1,1} to table precision; start ρ0 = ν/2 needs ν > 0.
    let z = bessel_zeros(1.0, 2, 0);
    assert!((z[0] - 3.831_705_970_207_512).abs() < 1e-9);
    assert!((z[1] - 7.015_586_669_815_619).abs() < 1e-9);
    let d = bessel_zeros(1.0, 1, 1);
    assert!((d[0] - 1.841_183_781_340_659).abs() < 1e-9);
    let z5 = bessel_zeros(5.0, 1, 0);
    assert!((z5[0] - 8.771_483_815_959_954).abs() < 1e-9);
}

fn check_against_bessel(bc: Boundary, component: usize) {
    let mu = PI * PI;
    for t in [0.5, 0.2, 0.1] {
        let p = HalfLineProblem::new(t, mu, WeightProfile::exp2(), bc).unwrap();
        let s = solve(&p, 3).unwrap();
        assert_eq!(s.resolved_count, 3, "t = {t}: {:?}", s.warnings);
        let zeros = bessel_zeros(mu.sqrt() / t, 3, component);
        for k in 0..3 {
            let exact = (t * zeros[k]).powi(2);
            let got = s.eigenvalues[k];
            assert!(
                ((got - exact) / exact).abs() <= 1e-6,
                "{bc} t={t} k={}: {got} vs {exact}",
                k + 1
            );
        }
    }
}

#[test]
fn dirichlet_matches_bessel_zeros() {
    check_against_bessel(Boundary::Dirichlet, 0);
}

#[test]
fn neumann_matches_bessel_derivative_zeros() {
    check_against_bessel(Boundary::Neumann, 1);
}

#[test]
fn eigenvalues_increase_with_t_and_stay_above_threshold() {
    let mu = PI * PI;
    let base = HalfLineProblem::new(0.4, mu, WeightProfile::exp2(), Boundary::Dirichlet).unwrap();
    let mut prev: Option<Vec<f64>> = None;
    for t in [0.05, 0.1, 0.2, 0.4] {
        let s = solve(&base.at_t(t).unwrap(), 3).unwrap();
        assert!(s.eigenvalues.iter().all(|l| *l > mu));
        assert!(s.eigenvalues.windows(2).all(|w| w[1] > w[0]));
        assert!(s.residuals.iter().all(|r| *r <= 1e-6), "{:?}", s.residuals);
        if let Some(p) = &prev {
            assert!(p.iter().zip(&s.eigenvalues).all(|(a, b)| b > a));
        }
        prev = Some(s.eigenvalues);
    }
}

#[test]
fn kappa_equals_kinetic_energy() {
    // Multiply the equation by w and integrate: ∫(λσ − μ)w² = t²∫w′².
    let mu = PI * PI;
    let p = HalfLineProblem::new(0.2, mu, WeightProfile::exp2(), Boundary::Dirichlet).unwrap();
    let s = solve(&p, 2).unwrap();
    for pair in &s.pairs {
        let kappa = nonconcentration_kappa(pair, &p.profile, mu, pair.lambda_grid);
        let d = pair.w.first.as_ref().unwrap();
        let kinetic = p.t
            * p.t
            * specdegen::numerics::quad::simpson(
                &d.iter().map(|v| v * v).collect::<Vec<_>>(),
                pair.w.h,
            );
        assert!(kappa > 0.0);
        assert!(
            ((kappa - kinetic) / kinetic).abs() < 1e-4,
            "{kappa} vs {kinetic}"
        );
    }
}

#[test]
fn eigenfunctions_decay_past_the_level_point() {
    let mu = PI * PI;
    let p = HalfLineProblem::new(0.1, mu, WeightProfile::exp2(), Boundary::Dirichlet).unwrap();
    let s = solve(&p, 2).unwrap();
    for pair in &s.pairs {
        let r = decay_rate(pair, &p, pair.lambda, 0.5 * mu).unwrap();
        assert!(r.satisfied, "{r:?}");
        let x_s = specdegen::profile::level_point(&p.profile, mu, pair.lambda, 0.5 * mu).unwrap();
        assert!(mass_beyond(pair, x_s) < 1e-3);
        assert!(mass_beyond_weighted(pair, x_s, 2.0) < 1e-6);
    }
    let above = decay_rate(&s.pairs[1], &p, s.pairs[0].lambda, 0.5 * mu);
    assert!(matches!(above, Err(HalfLineError::OutsideWindow { .. })));
}

#[test]
fn langer_cherry_residual_shrinks_with_t() {
    let mu = PI * PI;
    let mut last = f64::INFINITY;
    for t in [0.4, 0.2, 0.1] {
        let p = HalfLineProblem::new(t, mu, WeightProfile::exp2(), Boundary::Dirichlet).unwrap();
        let s = solve(&p, 1).unwrap();
        let pair = &s.pairs[0];
        let r = lc_residual(pair, &p, pair.lambda).unwrap();
        assert!(
            r.ratio.is_finite() && r.ratio < last,
            "t={t}: {} after {last}",
            r.ratio
        );
        last = r.ratio;
    }
}

#[test]
fn phi_at_zero_sits_near_airy_zeros() {
    let mu = PI * PI;
    for bc in [Boundary::Dirichlet, Boundary::Neumann] {
        let p = HalfLineProblem::new(0.05, mu, WeightProfile::exp2(), bc).unwrap();
        for k in 1..=3 {
            let c = airy_eigenvalue_check(&p, k).unwrap();
            assert_eq!(c.nearest, k, "{c:?}");
            assert!(c.defect < 0.1 * p.t.powf(2.0 / 3.0), "{c:?}");
        }
    }
}

#[test]
fn gaps_approach_the_airy_law() {
    let mu = PI * PI;
    let p = HalfLineProblem::new(0.2, mu, WeightProfile::exp2(), Boundary::Dirichlet).unwrap();
    let r = superseparation(&p, &[0.2, 0.1, 0.05, 0.025], 1).unwrap();
    assert_eq!(r.records.len(), 4, "{:?}", r.warnings);
    let dev: Vec<f64> = r
        .records
        .iter()
        .map(|g| (g.gap / g.airy_prediction - 1.0).abs())
        .collect();
    assert!(dev.windows(2).all(|w| w[1] < w[0]), "{dev:?}");
    // The relative correction to the leading term decays like t^{2/3}.
    for (g, d) in r.records.iter().zip(&dev) {
        let scaled = d / g.t.powf(2.0 / 3.0);
        assert!(scaled > 1.5 && scaled < 3.0, "{dev:?}");
    }
    // So the fitted exponent sits between 2/3 and 1 on this range.
    let e = r.exponent.unwrap();
    assert!(e > 2.0 / 3.0 && e < 1.0, "{e}");
    assert!(matches!(
        superseparation(&p, &[0.1, 0.2], 1),
        Err(HalfLineError::BadGrid)
    ));
}

#[test]
fn sweep_rows_are_sorted() {
    let p = HalfLineProblem::new(0.3, 1.0, WeightProfile::exp(), Boundary::Dirichlet).unwrap();
    let rows = sweep(&p, &[0.3, 0.15], &[2.0, 1.0], 2).unwrap();
    assert_eq!(rows.len(), 8);
    assert!(rows
        .windows(2)
        .all(|w| (w[0].t, w[0].mu, w[0].k) <= (w[1].t, w[1].mu, w[1].k)));
}

#[test]
fn solve_below_respects_cap() {
    let mu = PI * PI;
    let p = HalfLineProblem::new(0.2, mu, WeightProfile::exp2(), Boundary::Dirichlet).unwrap();
    let all = solve(&p, 4).unwrap();
    let cap = 0.5 * (all.eigenvalues[2] + all.eigenvalues[3]);
    let s = solve_below(&p, cap).unwrap();
    assert_eq!(s.eigenvalues.len(), 3);
    for (a, b) in s.eigenvalues.iter().zip(&all.eigenvalues) {
        assert!((a - b).abs() <= 1e-9 * b);
    }
}

mod invariants {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]

        #[test]
        fn neumann_below_dirichlet(t in 0.08f64..0.6, mu in 0.5f64..20.0) {
            let a = solve(&HalfLineProblem::new(t, mu, WeightProfile::exp(), Boundary::Neumann).unwrap(), 2).unwrap();
            let b = solve(&HalfLineProblem::new(t, mu, WeightProfile::exp(), Boundary::Dirichlet).unwrap(), 2).unwrap();
            prop_assert!(a.eigenvalues[0] < b.eigenvalues[0]);
            prop_assert!(a.eigenvalues[0] > mu);
        }
    }
}
