//! Evaluation of the Airy pair A₋ = √π·Ai, A₊ = √π·Bi and derivatives.
//!
//! On [−8, 8] values come from power series re-expanded about the nodes of a
//! table with spacing 1/4.  The table is seeded at 0 by the Maclaurin data and
//! swept outward for the oscillatory and growing solutions; the decaying
//! solution on the positive side is swept inward from u = 10, seeded by its
//! asymptotic expansion (outward sweeping there amplifies errors like e^{2ζ}).
//! Outside [−8, 8] the standard asymptotic expansions are used, truncated at
//! their smallest term.

use std::f64::consts::{FRAC_PI_4, PI};
use std::sync::OnceLock;

use serde::Serialize;

use super::AiryError;

/// Argument beyond which the asymptotic expansions take over.
pub const SERIES_LIMIT: f64 = 8.0;
/// Largest |u| accepted by [`airy_eval`].
pub const MAX_ARGUMENT: f64 = 200.0;

pub(crate) const AI0: f64 = 0.355_028_053_887_817_239;
pub(crate) const AIP0: f64 = -0.258_819_403_792_806_798;
pub(crate) const BI0: f64 = 0.614_926_627_446_000_736;
pub(crate) const BIP0: f64 = 0.448_288_357_353_826_359;

const STEP: f64 = 0.25;
const NODES: usize = 65; // u = -8, -7.75, ..., 8
const SEED_POINT: f64 = 10.0;

/// Values of the pair and their derivatives at `u`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AiryPair {
    pub u: f64,
    pub a_plus: f64,
    pub a_minus: f64,
    pub d_plus: f64,
    pub d_minus: f64,
}

impl AiryPair {
    /// W = A₊A₋′ − A₊′A₋; equals −1 in this normalization.
    pub fn wronskian(&self) -> f64 {
        self.a_plus * self.d_minus - self.d_plus * self.a_minus
    }
}

/// (y, y′) of the classical functions at one table node.
#[derive(Debug, Clone, Copy)]
struct Node {
    ai: (f64, f64),
    bi: (f64, f64),
}

fn table() -> &'static [Node; NODES] {
    static TABLE: OnceLock<[Node; NODES]> = OnceLock::new();
    TABLE.get_or_init(build_table)
}

fn node_u(j: usize) -> f64 {
    -SERIES_LIMIT + j as f64 * STEP
}

/// Advances (y, y′) of a solution of y″ = u·y from `u0` to `u0 + d`.
fn taylor_step(u0: f64, y: f64, dy: f64, d: f64) -> (f64, f64) {
    // c_{n+2} = (u0·c_n + c_{n-1}) / ((n+2)(n+1))
    let mut c_nm1 = 0.0;
    let mut c_n = y;
    let mut c_np1 = dy;
    let mut val = y + dy * d;
    let mut der = dy;
    let mut pow = d; // d^{n+1}
    let mut n = 0usize;
    let mut quiet = 0;
    loop {
        let c_np2 = (u0 * c_n + c_nm1) / (((n + 2) * (n + 1)) as f64);
        let term_der = (n + 2) as f64 * c_np2 * pow;
        pow *= d;
        let term_val = c_np2 * pow;
        val += term_val;
        der += term_der;
        c_nm1 = c_n;
        c_n = c_np1;
        c_np1 = c_np2;
        n += 1;
        let scale = val.abs().max(der.abs()).max(f64::MIN_POSITIVE);
        // Every third coefficient can vanish exactly, so wait for a run.
        if term_val.abs() < 1e-18 * scale && term_der.abs() < 1e-18 * scale {
            quiet += 1;
            if quiet >= 3 {
                break;
            }
        } else {
            quiet = 0;
        }
        if n > 400 {
            break;
        }
    }
    (val, der)
}

fn build_table() -> [Node; NODES] {
    let zero = (NODES - 1) / 2;
    let mut ai = [(0.0, 0.0); NODES];
    let mut bi = [(0.0, 0.0); NODES];
    ai[zero] = (AI0, AIP0);
    bi[zero] = (BI0, BIP0);
    for j in (0..zero).rev() {
        let u0 = node_u(j + 1);
        ai[j] = taylor_step(u0, ai[j + 1].0, ai[j + 1].1, -STEP);
        bi[j] = taylor_step(u0, bi[j + 1].0, bi[j + 1].1, -STEP);
    }
    for j in zero + 1..NODES {
        let u0 = node_u(j - 1);
        bi[j] = taylor_step(u0, bi[j - 1].0, bi[j - 1].1, STEP);
    }
    let (a, da) = positive_asymptotic_ai(SEED_POINT);
    let mut cur = (a, da);
    let mut u = SEED_POINT;
    while u > SERIES_LIMIT + 1e-12 {
        cur = taylor_step(u, cur.0, cur.1, -STEP);
        u -= STEP;
    }
    ai[NODES - 1] = cur;
    for j in (zero + 1..NODES - 1).rev() {
        let u0 = node_u(j + 1);
        ai[j] = taylor_step(u0, ai[j + 1].0, ai[j + 1].1, -STEP);
    }
    let mut out = [Node {
        ai: (0.0, 0.0),
        bi: (0.0, 0.0),
    }; NODES];
    for j in 0..NODES {
        out[j] = Node {
            ai: ai[j],
            bi: bi[j],
        };
    }
    out
}

/// Coefficients u_k, v_k of the asymptotic expansions.
fn asymptotic_coefficients() -> &'static [(f64, f64)] {
    static COEF: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    COEF.get_or_init(|| {
        let mut out = vec![(1.0, 1.0)];
        let mut uk = 1.0f64;
        for k in 1..120 {
            let kf = k as f64;
            uk *= (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0)
                / ((2.0 * kf - 1.0) * 216.0 * kf);
            let vk = -(6.0 * kf + 1.0) / (6.0 * kf - 1.0) * uk;
            out.push((uk, vk));
        }
        out
    })
}

/// Sums Σ sign(k)·c_k/ζ^k over the selected indices, stopping at the smallest
/// term.
fn truncated_sum(zeta: f64, pick: impl Fn(usize) -> Option<(f64, f64)>) -> f64 {
    let mut sum = 0.0;
    let mut last = f64::INFINITY;
    let mut k = 0;
    while let Some((sign, coef)) = pick(k) {
        let term = sign * coef / zeta.powi(k as i32);
        if term.abs() > last {
            break;
        }
        sum += term;
        last = term.abs();
        if last < 1e-17 * sum.abs() {
            break;
        }
        k += 1;
    }
    sum
}

fn positive_asymptotic_ai(x: f64) -> (f64, f64) {
    let zeta = 2.0 / 3.0 * x.powf(1.5);
    let c = asymptotic_coefficients();
    let alt = |k: usize| if k % 2 == 0 { 1.0 } else { -1.0 };
    let su = truncated_sum(zeta, |k| c.get(k).map(|p| (alt(k), p.0)));
    let sv = truncated_sum(zeta, |k| c.get(k).map(|p| (alt(k), p.1)));
    let e = (-zeta).exp();
    let q = x.powf(0.25);
    let pref = 1.0 / (2.0 * PI.sqrt());
    (pref * e / q * su, -pref * q * e * sv)
}

fn positive_asymptotic_bi(x: f64) -> (f64, f64) {
    let zeta = 2.0 / 3.0 * x.powf(1.5);
    let c = asymptotic_coefficients();
    let su = truncated_sum(zeta, |k| c.get(k).map(|p| (1.0, p.0)));
    let sv = truncated_sum(zeta, |k| c.get(k).map(|p| (1.0, p.1)));
    let e = zeta.exp();
    let q = x.powf(0.25);
    let pref = 1.0 / PI.sqrt();
    (pref * e / q * su, pref * q * e * sv)
}

/// Ai, Ai′, Bi, Bi′ at −x for large x > 0.
fn negative_asymptotic(x: f64) -> [f64; 4] {
    let zeta = 2.0 / 3.0 * x.powf(1.5);
    let c = asymptotic_coefficients();
    let alt = |k: usize| if k % 2 == 0 { 1.0 } else { -1.0 };
    let p = truncated_sum(zeta * zeta, |k| c.get(2 * k).map(|q| (alt(k), q.0)));
    let q = truncated_sum(zeta * zeta, |k| c.get(2 * k + 1).map(|q| (alt(k), q.0))) / zeta;
    let r = truncated_sum(zeta * zeta, |k| c.get(2 * k).map(|q| (alt(k), q.1)));
    let s = truncated_sum(zeta * zeta, |k| c.get(2 * k + 1).map(|q| (alt(k), q.1))) / zeta;
    let (sn, cs) = (zeta - FRAC_PI_4).sin_cos();
    let q4 = x.powf(0.25);
    let rp = 1.0 / PI.sqrt();
    [
        rp / q4 * (cs * p + sn * q),
        rp * q4 * (sn * r - cs * s),
        rp / q4 * (-sn * p + cs * q),
        rp * q4 * (cs * r + sn * s),
    ]
}

/// Classical (Ai, Ai′, Bi, Bi′) at `u`.
pub(crate) fn classical(u: f64) -> [f64; 4] {
    if u > SERIES_LIMIT {
        let (a, da) = positive_asymptotic_ai(u);
        let (b, db) = positive_asymptotic_bi(u);
        return [a, da, b, db];
    }
    if u < -SERIES_LIMIT {
        return negative_asymptotic(-u);
    }
    let t = table();
    let j = (((u + SERIES_LIMIT) / STEP).round() as usize).min(NODES - 1);
    let u0 = node_u(j);
    let d = u - u0;
    let n = t[j];
    if d == 0.0 {
        return [n.ai.0, n.ai.1, n.bi.0, n.bi.1];
    }
    let (a, da) = taylor_step(u0, n.ai.0, n.ai.1, d);
    let (b, db) = taylor_step(u0, n.bi.0, n.bi.1, d);
    [a, da, b, db]
}

/// Evaluates A±(u) and A±′(u).
pub fn airy_eval(u: f64) -> Result<AiryPair, AiryError> {
    if !u.is_finite() || u.abs() > MAX_ARGUMENT {
        return Err(AiryError::ArgumentOutOfRange { u });
    }
    let [ai, dai, bi, dbi] = classical(u);
    let s = PI.sqrt();
    let pair = AiryPair {
        u,
        a_plus: s * bi,
        a_minus: s * ai,
        d_plus: s * dbi,
        d_minus: s * dai,
    };
    if !pair.a_plus.is_finite() || !pair.d_plus.is_finite() {
        return Err(AiryError::Overflow { u });
    }
    Ok(pair)
}

/// A₋(u) and A₋′(u) only; never overflows.
pub fn decaying(u: f64) -> (f64, f64) {
    let [ai, dai, _, _] = classical(u);
    let s = PI.sqrt();
    (s * ai, s * dai)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn values_at_origin() {
        let p = airy_eval(0.0).unwrap();
        assert!((p.a_minus - PI.sqrt() * AI0).abs() < 1e-16);
        assert!((p.wronskian() + 1.0).abs() < 1e-14);
    }

    #[test]
    fn decaying_sweep_returns_to_origin() {
        // The positive-side table is built inward from u = 10; its value at
        // the centre node is computed independently of the Maclaurin seed.
        let (a, da) = {
            let mut cur = positive_asymptotic_ai(SEED_POINT);
            let mut u = SEED_POINT;
            while u > 1e-12 {
                cur = taylor_step(u, cur.0, cur.1, -STEP);
                u -= STEP;
            }
            cur
        };
        assert!((a - AI0).abs() < 1e-14, "{a}");
        assert!((da - AIP0).abs() < 1e-14, "{da}");
    }

    #[test]
    fn overlap_window_agreement() {
        for k in 0..=40 {
            let u = 8.0 + k as f64 * 0.05;
            let (a_ser, da_ser) = {
                let t = table();
                taylor_step(
                    SERIES_LIMIT,
                    t[NODES - 1].ai.0,
                    t[NODES - 1].ai.1,
                    u - SERIES_LIMIT,
                )
            };
            let (a_as, da_as) = positive_asymptotic_ai(u);
            assert!(((a_ser - a_as) / a_as).abs() < 1e-10, "u={u}");
            assert!(((da_ser - da_as) / da_as).abs() < 1e-10, "u={u}");
            let ns = negative_asymptotic(u);
            let t = table();
            let (b_ser, _) = taylor_step(-SERIES_LIMIT, t[0].ai.0, t[0].ai.1, -(u - SERIES_LIMIT));
            assert!(
                (b_ser - ns[0]).abs() < 1e-10 * ns[0].abs().max(0.1),
                "u=-{u}"
            );
        }
    }

    #[test]
    fn overflow_is_signalled() {
        assert!(matches!(airy_eval(150.0), Err(AiryError::Overflow { .. })));
        assert!(matches!(
            airy_eval(250.0),
            Err(AiryError::ArgumentOutOfRange { .. })
        ));
        assert!(airy_eval(100.0).is_ok());
        assert_eq!(decaying(150.0).0, 0.0);
    }
}
