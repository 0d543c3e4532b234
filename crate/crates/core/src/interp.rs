//! Natural cubic spline interpolation on a strictly increasing knot set.
//!
//! Used for resampling tabulated potentials and for the energy meshes of the
//! quantum-defect layer (interaction matrix, rotation angles). Natural end
//! conditions (vanishing second derivative) are adequate because every mesh
//! in this crate is generated with generous margins around the region of
//! interest.

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct CubicSpline {
    x: Vec<f64>,
    y: Vec<f64>,
    /// Second derivatives at the knots.
    m: Vec<f64>,
}

impl CubicSpline {
    /// Builds a natural cubic spline through `(x, y)`. Requires at least two
    /// knots and strictly increasing, finite abscissae.
    pub fn natural(x: &[f64], y: &[f64]) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::Size(format!(
                "spline needs matching abscissa/ordinate lengths, got {} and {}",
                x.len(),
                y.len()
            )));
        }
        if x.len() < 2 {
            return Err(Error::Size(format!(
                "spline needs at least 2 knots, got {}",
                x.len()
            )));
        }
        for (i, w) in x.windows(2).enumerate() {
            if !(w[1] > w[0]) {
                return Err(Error::Input(format!(
                    "spline knots must increase strictly: x[{}] = {} !< x[{}] = {}",
                    i,
                    w[0],
                    i + 1,
                    w[1]
                )));
            }
        }
        if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Input("spline data contains non-finite values".into()));
        }

        let n = x.len();
        let mut m = vec![0.0; n];
        if n > 2 {
            // Tridiagonal system for interior second derivatives; natural
            // conditions m[0] = m[n-1] = 0. Solved by the Thomas algorithm.
            let k = n - 2;
            let mut diag = vec![0.0; k];
            let mut upper = vec![0.0; k];
            let mut rhs = vec![0.0; k];
            for i in 0..k {
                let h0 = x[i + 1] - x[i];
                let h1 = x[i + 2] - x[i + 1];
                diag[i] = 2.0 * (h0 + h1);
                upper[i] = h1;
                rhs[i] = 6.0 * ((y[i + 2] - y[i + 1]) / h1 - (y[i + 1] - y[i]) / h0);
            }
            // Forward sweep (sub-diagonal equals the previous upper entry).
            for i in 1..k {
                let lower = upper[i - 1];
                let w = lower / diag[i - 1];
                diag[i] -= w * upper[i - 1];
                rhs[i] -= w * rhs[i - 1];
            }
            m[k] = rhs[k - 1] / diag[k - 1];
            for i in (0..k - 1).rev() {
                m[i + 1] = (rhs[i] - upper[i] * m[i + 2]) / diag[i];
            }
        }

        Ok(CubicSpline {
            x: x.to_vec(),
            y: y.to_vec(),
            m,
        })
    }

    pub fn x_first(&self) -> f64 {
        self.x[0]
    }

    pub fn x_last(&self) -> f64 {
        *self.x.last().unwrap()
    }

    /// Index of the segment containing `xq` (clamped to the end segments, so
    /// evaluation outside the knots extends the boundary cubic).
    fn segment(&self, xq: f64) -> usize {
        let n = self.x.len();
        let i = self.x.partition_point(|&xi| xi <= xq);
        i.clamp(1, n - 1) - 1
    }

    /// Spline value at `xq`. Outside the knot range the boundary polynomial
    /// is extended; callers that need controlled tails must handle
    /// extrapolation themselves.
    pub fn eval(&self, xq: f64) -> f64 {
        let i = self.segment(xq);
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - xq) / h;
        let b = (xq - self.x[i]) / h;
        a * self.y[i]
            + b * self.y[i + 1]
            + ((a * a * a - a) * self.m[i] + (b * b * b - b) * self.m[i + 1]) * h * h / 6.0
    }

    /// First derivative at `xq` (same extension rule as [`eval`](Self::eval)).
    pub fn deriv(&self, xq: f64) -> f64 {
        let i = self.segment(xq);
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - xq) / h;
        let b = (xq - self.x[i]) / h;
        (self.y[i + 1] - self.y[i]) / h
            + ((3.0 * b * b - 1.0) * self.m[i + 1] - (3.0 * a * a - 1.0) * self.m[i]) * h / 6.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn reproduces_knot_values() {
        let x: Vec<f64> = (0..20).map(|i| 0.3 * i as f64).collect();
        let y: Vec<f64> = x.iter().map(|&v| (v - 2.0).tanh()).collect();
        let s = CubicSpline::natural(&x, &y).unwrap();
        for (xi, yi) in x.iter().zip(&y) {
            assert_relative_eq!(s.eval(*xi), *yi, max_relative = 1e-14, epsilon = 1e-14);
        }
    }

    #[test]
    fn interpolates_smooth_function() {
        let n = 400;
        let x: Vec<f64> = (0..n).map(|i| 10.0 * i as f64 / (n - 1) as f64).collect();
        let y: Vec<f64> = x.iter().map(|&v| v.sin()).collect();
        let s = CubicSpline::natural(&x, &y).unwrap();
        // Stay away from the ends where natural conditions bite.
        for k in 0..1000 {
            let xq = 1.0 + 8.0 * k as f64 / 999.0;
            assert_relative_eq!(s.eval(xq), xq.sin(), epsilon = 2e-8);
            assert_relative_eq!(s.deriv(xq), xq.cos(), epsilon = 2e-6);
        }
    }

    #[test]
    fn linear_data_is_exact_everywhere() {
        let x = [0.0, 1.0, 2.5, 4.0, 7.0];
        let y: Vec<f64> = x.iter().map(|&v| 3.0 * v - 1.0).collect();
        let s = CubicSpline::natural(&x, &y).unwrap();
        for xq in [-1.0, 0.4, 3.3, 6.9, 9.0] {
            assert_relative_eq!(s.eval(xq), 3.0 * xq - 1.0, epsilon = 1e-12);
            assert_relative_eq!(s.deriv(xq), 3.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(CubicSpline::natural(&[0.0, 0.0, 1.0], &[1.0, 2.0, 3.0]).is_err());
        assert!(CubicSpline::natural(&[0.0], &[1.0]).is_err());
        assert!(CubicSpline::natural(&[0.0, 1.0], &[1.0, f64::NAN]).is_err());
    }
}
