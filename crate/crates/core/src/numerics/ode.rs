//! Adaptive Dormand–Prince 5(4) integration of small first-order systems.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OdeError {
    #[error("step size underflow at x = {x}")]
    StepUnderflow { x: f64 },
    #[error("too many steps ({steps}) before reaching x = {target}")]
    TooManySteps { steps: usize, target: f64 },
}

#[derive(Debug, Clone, Copy)]
pub struct Dopri5 {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for Dopri5 {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-14,
            max_steps: 1_000_000,
        }
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

impl Dopri5 {
    pub fn new(rtol: f64, atol: f64) -> Self {
        Self {
            rtol,
            atol,
            ..Self::default()
        }
    }

    /// Integrates `y' = f(x, y)` from `x0` to `x1`.  After every accepted
    /// step `observe(x, y)` may rescale `y` in place (used to keep growing
    /// solutions representable).
    pub fn integrate<const N: usize, F, O>(
        &self,
        f: F,
        x0: f64,
        x1: f64,
        mut y: [f64; N],
        mut observe: O,
    ) -> Result<[f64; N], OdeError>
    where
        F: Fn(f64, &[f64; N]) -> [f64; N],
        O: FnMut(f64, &mut [f64; N]),
    {
        let dir = (x1 - x0).signum();
        let span = (x1 - x0).abs();
        let mut x = x0;
        let mut h = dir * span * 1e-3;
        let mut k1 = f(x, &y);
        let mut steps = 0;
        while (x1 - x) * dir > 0.0 {
            if steps >= self.max_steps {
                return Err(OdeError::TooManySteps { steps, target: x1 });
            }
            if (x + h - x1) * dir > 0.0 {
                h = x1 - x;
            }
            let stage = |coef: &[(f64, &[f64; N])]| {
                let mut out = y;
                for (c, k) in coef {
                    for i in 0..N {
                        out[i] += h * c * k[i];
                    }
                }
                out
            };
            let k2 = f(x + C2 * h, &stage(&[(A21, &k1)]));
            let k3 = f(x + C3 * h, &stage(&[(A31, &k1), (A32, &k2)]));
            let k4 = f(x + C4 * h, &stage(&[(A41, &k1), (A42, &k2), (A43, &k3)]));
            let k5 = f(
                x + C5 * h,
                &stage(&[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
            );
            let k6 = f(
                x + h,
                &stage(&[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
            );
            let y_new = stage(&[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
            let k7 = f(x + h, &y_new);
            let mut err = 0.0f64;
            for i in 0..N {
                let e = h
                    * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
                let sc = self.atol + self.rtol * y[i].abs().max(y_new[i].abs());
                err = err.max((e / sc).abs());
            }
            steps += 1;
            if err <= 1.0 {
                x += h;
                y = y_new;
                k1 = k7;
                let before = y;
                observe(x, &mut y);
                if before != y {
                    k1 = f(x, &y);
                }
                let fac = if err == 0.0 {
                    5.0
                } else {
                    (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
                };
                h *= fac;
            } else {
                h *= (0.9 * err.powf(-0.2)).clamp(0.1, 1.0);
            }
            if h.abs() < 1e-15 * x.abs().max(1.0) {
                return Err(OdeError::StepUnderflow { x });
            }
        }
        Ok(y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_period() {
        let s = Dopri5::new(1e-12, 1e-14);
        let y = s
            .integrate(
                |_, y: &[f64; 2]| [y[1], -y[0]],
                0.0,
                2.0 * std::f64::consts::PI,
                [1.0, 0.0],
                |_, _| {},
            )
            .unwrap();
        assert!((y[0] - 1.0).abs() < 1e-9);
        assert!(y[1].abs() < 1e-9);
    }

    #[test]
    fn backward_integration() {
        let s = Dopri5::new(1e-12, 1e-14);
        let y = s
            .integrate(
                |_, y: &[f64; 1]| [y[0]],
                1.0,
                0.0,
                [1.0f64.exp()],
                |_, _| {},
            )
            .unwrap();
        assert!((y[0] - 1.0).abs() < 1e-10);
    }
}
