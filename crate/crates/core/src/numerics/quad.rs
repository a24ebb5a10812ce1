//! Quadrature rules: adaptive Gauss–Kronrod, composite Simpson on uniform
//! samples and fixed Gauss–Legendre rules on the unit interval.

use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadError {
    #[error("adaptive quadrature did not converge on [{lo}, {hi}] (error estimate {error:e})")]
    NoConvergence { lo: f64, hi: f64, error: f64 },
    #[error("integrand is not finite at x = {x}")]
    NonFinite { x: f64 },
}

// Kronrod 15-point abscissae with the embedded 7-point Gauss weights.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// One G7K15 panel: (Kronrod estimate, |Kronrod − Gauss|).
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Result<(f64, f64), QuadError> {
    let c = 0.5 * (a + b);
    let r = 0.5 * (b - a);
    let fc = f(c);
    if !fc.is_finite() {
        return Err(QuadError::NonFinite { x: c });
    }
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for j in 0..7 {
        let dx = r * XGK[j];
        let (f1, f2) = (f(c - dx), f(c + dx));
        if !f1.is_finite() {
            return Err(QuadError::NonFinite { x: c - dx });
        }
        if !f2.is_finite() {
            return Err(QuadError::NonFinite { x: c + dx });
        }
        k += WGK[j] * (f1 + f2);
        if j % 2 == 1 {
            g += WG[j / 2] * (f1 + f2);
        }
    }
    Ok((k * r, ((k - g) * r).abs()))
}

/// Adaptive Gauss–Kronrod integration of `f` over `[a, b]`.
///
/// Panels are bisected, worst first, until the summed error estimate drops
/// below `max(abs_tol, rel_tol * |I|)`.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Result<f64, QuadError> {
    if a == b {
        return Ok(0.0);
    }
    if b < a {
        return integrate(f, b, a, abs_tol, rel_tol).map(|v| -v);
    }
    const MAX_PANELS: usize = 4000;
    let (v, e) = gk15(&f, a, b)?;
    let mut panels = vec![(a, b, v, e)];
    let mut total = v;
    let mut err = e;
    loop {
        let tol = abs_tol.max(rel_tol * total.abs());
        if err <= tol {
            return Ok(total);
        }
        let worst = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .map(|(i, _)| i)
            .unwrap_or(0);
        let (lo, hi, pv, pe) = panels.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        if panels.len() >= MAX_PANELS || mid <= lo || mid >= hi {
            return Err(QuadError::NoConvergence { lo, hi, error: pe });
        }
        let (v1, e1) = gk15(&f, lo, mid)?;
        let (v2, e2) = gk15(&f, mid, hi)?;
        total += v1 + v2 - pv;
        err += e1 + e2 - pe;
        panels.push((lo, mid, v1, e1));
        panels.push((mid, hi, v2, e2));
        if err < 0.0 {
            err = panels.iter().map(|p| p.3).sum();
        }
    }
}

/// Single fixed G7K15 panel, used for short smooth intervals.
pub fn kronrod15<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    let c = 0.5 * (a + b);
    let r = 0.5 * (b - a);
    let mut k = f(c) * WGK[7];
    for j in 0..7 {
        let dx = r * XGK[j];
        k += WGK[j] * (f(c - dx) + f(c + dx));
    }
    k * r
}

/// Composite Simpson rule on uniformly spaced samples.
///
/// An odd number of intervals is closed with a three-eighths panel; a single
/// interval falls back to the trapezoid rule.
pub fn simpson(values: &[f64], h: f64) -> f64 {
    let n = values.len();
    match n {
        0 | 1 => 0.0,
        2 => 0.5 * h * (values[0] + values[1]),
        _ => {
            let intervals = n - 1;
            let (even_end, tail) = if intervals % 2 == 0 {
                (n - 1, None)
            } else if intervals >= 3 {
                (n - 4, Some(n - 4))
            } else {
                unreachable!()
            };
            let mut s = 0.0;
            let mut i = 0;
            while i + 2 <= even_end {
                s += values[i] + 4.0 * values[i + 1] + values[i + 2];
                i += 2;
            }
            let mut total = s * h / 3.0;
            if let Some(j) = tail {
                total += 3.0 * h / 8.0
                    * (values[j] + 3.0 * values[j + 1] + 3.0 * values[j + 2] + values[j + 3]);
            }
            total
        }
    }
}

/// Gauss–Legendre nodes and weights mapped onto `[0, 1]`.
pub fn gauss_legendre_unit(n: usize) -> Vec<(f64, f64)> {
    let degree = NonZeroUsize::new(n.max(1)).expect("nonzero");
    GaussLegendre::new(degree)
        .as_node_weight_pairs()
        .iter()
        .map(|&(x, w)| (0.5 * (x + 1.0), 0.5 * w))
        .collect()
}
