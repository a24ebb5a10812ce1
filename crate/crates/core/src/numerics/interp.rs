//! Interpolation of uniformly sampled functions.

/// Samples `values[i] = f(x0 + i h)` with optional first and second
/// derivative samples.
#[derive(Debug, Clone, PartialEq)]
pub struct UniformSamples {
    pub x0: f64,
    pub h: f64,
    pub values: Vec<f64>,
    pub first: Option<Vec<f64>>,
    pub second: Option<Vec<f64>>,
}

impl UniformSamples {
    pub fn new(x0: f64, h: f64, values: Vec<f64>) -> Self {
        Self {
            x0,
            h,
            values,
            first: None,
            second: None,
        }
    }

    pub fn with_derivatives(mut self, first: Vec<f64>, second: Vec<f64>) -> Self {
        debug_assert_eq!(first.len(), self.values.len());
        debug_assert_eq!(second.len(), self.values.len());
        self.first = Some(first);
        self.second = Some(second);
        self
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x0 + i as f64 * self.h
    }

    pub fn x_end(&self) -> f64 {
        self.x(self.values.len().saturating_sub(1))
    }

    pub fn grid(&self) -> Vec<f64> {
        (0..self.values.len()).map(|i| self.x(i)).collect()
    }
}

/// C² interpolant of uniform samples: quintic Hermite when derivative samples
/// exist, natural cubic spline otherwise.
#[derive(Debug, Clone)]
pub struct Interpolant {
    samples: UniformSamples,
    spline_m: Option<Vec<f64>>,
}

impl Interpolant {
    pub fn new(samples: UniformSamples) -> Self {
        let spline_m = if samples.first.is_some() && samples.second.is_some() {
            None
        } else {
            Some(natural_spline_moments(&samples.values, samples.h))
        };
        Self { samples, spline_m }
    }

    pub fn samples(&self) -> &UniformSamples {
        &self.samples
    }

    fn locate(&self, x: f64) -> (usize, f64) {
        let n = self.samples.values.len();
        let s = (x - self.samples.x0) / self.samples.h;
        let i = (s.floor().max(0.0) as usize).min(n.saturating_sub(2));
        (i, s - i as f64)
    }

    pub fn eval(&self, x: f64) -> f64 {
        let s = &self.samples;
        if s.values.len() == 1 {
            return s.values[0];
        }
        let (i, u) = self.locate(x);
        let h = s.h;
        match (&self.spline_m, &s.first, &s.second) {
            (None, Some(d1), Some(d2)) => {
                let (p0, p1) = (s.values[i], s.values[i + 1]);
                let (v0, v1) = (d1[i] * h, d1[i + 1] * h);
                let (a0, a1) = (d2[i] * h * h, d2[i + 1] * h * h);
                let u2 = u * u;
                let u3 = u2 * u;
                let u4 = u3 * u;
                let u5 = u4 * u;
                let h00 = 1.0 - 10.0 * u3 + 15.0 * u4 - 6.0 * u5;
                let h10 = u - 6.0 * u3 + 8.0 * u4 - 3.0 * u5;
                let h20 = 0.5 * (u2 - 3.0 * u3 + 3.0 * u4 - u5);
                let h01 = 10.0 * u3 - 15.0 * u4 + 6.0 * u5;
                let h11 = -4.0 * u3 + 7.0 * u4 - 3.0 * u5;
                let h21 = 0.5 * (u3 - 2.0 * u4 + u5);
                h00 * p0 + h10 * v0 + h20 * a0 + h01 * p1 + h11 * v1 + h21 * a1
            }
            (Some(m), _, _) => {
                let (y0, y1) = (s.values[i], s.values[i + 1]);
                let a = 1.0 - u;
                a * y0
                    + u * y1
                    + h * h / 6.0 * ((a * a * a - a) * m[i] + (u * u * u - u) * m[i + 1])
            }
            _ => unreachable!(),
        }
    }

    /// Largest difference between the interpolant and linear interpolation at
    /// interval midpoints, relative to the sample maximum.  Large values mean
    /// the grid does not resolve the function.
    pub fn undersampling_indicator(&self) -> f64 {
        let s = &self.samples;
        let scale = s.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if scale == 0.0 || s.values.len() < 2 {
            return 0.0;
        }
        let mut worst = 0.0f64;
        for i in 0..s.values.len() - 1 {
            let mid = self.eval(s.x(i) + 0.5 * s.h);
            let lin = 0.5 * (s.values[i] + s.values[i + 1]);
            worst = worst.max((mid - lin).abs());
        }
        worst / scale
    }
}

fn natural_spline_moments(y: &[f64], h: f64) -> Vec<f64> {
    let n = y.len();
    let mut m = vec![0.0; n];
    if n < 3 {
        return m;
    }
    // Tridiagonal system (1,4,1) m = 6/h² δ²y for interior moments.
    let k = n - 2;
    let mut c = vec![0.0; k];
    let mut d = vec![0.0; k];
    for j in 0..k {
        let rhs = 6.0 * (y[j] - 2.0 * y[j + 1] + y[j + 2]) / (h * h);
        if j == 0 {
            c[j] = 1.0 / 4.0;
            d[j] = rhs / 4.0;
        } else {
            let denom = 4.0 - c[j - 1];
            c[j] = 1.0 / denom;
            d[j] = (rhs - d[j - 1]) / denom;
        }
    }
    m[k] = d[k - 1];
    for j in (0..k - 1).rev() {
        m[j + 1] = d[j] - c[j] * m[j + 2];
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quintic_hermite_reproduces_quintics() {
        let f = |x: f64| 1.0 + x - 2.0 * x.powi(3) + 0.5 * x.powi(5);
        let d1 = |x: f64| 1.0 - 6.0 * x * x + 2.5 * x.powi(4);
        let d2 = |x: f64| -12.0 * x + 10.0 * x.powi(3);
        let h = 0.3;
        let xs: Vec<f64> = (0..6).map(|i| i as f64 * h).collect();
        let s = UniformSamples::new(0.0, h, xs.iter().map(|&x| f(x)).collect()).with_derivatives(
            xs.iter().map(|&x| d1(x)).collect(),
            xs.iter().map(|&x| d2(x)).collect(),
        );
        let it = Interpolant::new(s);
        for k in 0..50 {
            let x = k as f64 * 0.03;
            assert!((it.eval(x) - f(x)).abs() < 1e-12);
        }
    }

    #[test]
    fn spline_converges_on_sine() {
        let h = 0.01;
        let n = 315;
        let s = UniformSamples::new(0.0, h, (0..n).map(|i| (i as f64 * h).sin()).collect());
        let it = Interpolant::new(s);
        for k in 1..300 {
            let x = k as f64 * 0.01037;
            assert!((it.eval(x) - x.sin()).abs() < 1e-6);
        }
        assert!(it.undersampling_indicator() < 1e-4);
    }
}
