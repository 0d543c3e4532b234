//! Dense 2x2 real matrices. The coupled problem has exactly two channels, so
//! every matrix operation in the propagation and quantum-defect layers is
//! written against this fixed-size type instead of a general linear-algebra
//! backend.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2(pub [[f64; 2]; 2]);

impl Mat2 {
    pub const ZERO: Mat2 = Mat2([[0.0, 0.0], [0.0, 0.0]]);
    pub const IDENTITY: Mat2 = Mat2([[1.0, 0.0], [0.0, 1.0]]);

    pub fn diag(a: f64, b: f64) -> Mat2 {
        Mat2([[a, 0.0], [0.0, b]])
    }

    /// Counter-clockwise rotation by `angle` acting on channel vectors.
    pub fn rotation(angle: f64) -> Mat2 {
        let (s, c) = angle.sin_cos();
        Mat2([[c, s], [-s, c]])
    }

    pub fn transpose(&self) -> Mat2 {
        Mat2([
            [self.0[0][0], self.0[1][0]],
            [self.0[0][1], self.0[1][1]],
        ])
    }

    pub fn det(&self) -> f64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    pub fn trace(&self) -> f64 {
        self.0[0][0] + self.0[1][1]
    }

    /// Largest absolute entry; used for tolerance scaling.
    pub fn max_abs(&self) -> f64 {
        self.0
            .iter()
            .flatten()
            .fold(0.0_f64, |acc, v| acc.max(v.abs()))
    }

    /// Inverse, guarding against singular input. The determinant threshold is
    /// relative to the matrix scale so well-conditioned tiny matrices invert
    /// fine while genuinely singular ones are reported.
    pub fn inverse(&self) -> Result<Mat2> {
        let d = self.det();
        let scale = self.max_abs();
        if d.abs() <= 1e-300 || d.abs() < 1e-14 * scale * scale {
            return Err(Error::Domain(format!(
                "2x2 inverse of near-singular matrix (det = {d:.3e}, scale = {scale:.3e})"
            )));
        }
        Ok(Mat2([
            [self.0[1][1] / d, -self.0[0][1] / d],
            [-self.0[1][0] / d, self.0[0][0] / d],
        ]))
    }

    /// Eigenvalues of a symmetric 2x2, ascending. Uses the stable half-angle
    /// form rather than the quadratic formula.
    pub fn sym_eigenvalues(&self) -> (f64, f64) {
        let p = self.0[0][0];
        let q = self.0[1][1];
        let c = 0.5 * (self.0[0][1] + self.0[1][0]);
        let mean = 0.5 * (p + q);
        let r = ((0.5 * (p - q)).powi(2) + c * c).sqrt();
        (mean - r, mean + r)
    }
}

impl std::ops::Add for Mat2 {
    type Output = Mat2;
    fn add(self, rhs: Mat2) -> Mat2 {
        let mut out = Mat2::ZERO;
        for i in 0..2 {
            for j in 0..2 {
                out.0[i][j] = self.0[i][j] + rhs.0[i][j];
            }
        }
        out
    }
}

impl std::ops::Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, rhs: Mat2) -> Mat2 {
        let mut out = Mat2::ZERO;
        for i in 0..2 {
            for j in 0..2 {
                out.0[i][j] = self.0[i][j] - rhs.0[i][j];
            }
        }
        out
    }
}

impl std::ops::Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, rhs: Mat2) -> Mat2 {
        let mut out = Mat2::ZERO;
        for i in 0..2 {
            for j in 0..2 {
                out.0[i][j] = self.0[i][0] * rhs.0[0][j] + self.0[i][1] * rhs.0[1][j];
            }
        }
        out
    }
}

impl std::ops::Mul<f64> for Mat2 {
    type Output = Mat2;
    fn mul(self, rhs: f64) -> Mat2 {
        let mut out = self;
        for row in out.0.iter_mut() {
            for v in row.iter_mut() {
                *v *= rhs;
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn inverse_round_trip() {
        let a = Mat2([[2.0, 1.0], [0.5, -3.0]]);
        let prod = a * a.inverse().unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert_relative_eq!(prod.0[i][j], want, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn singular_detected() {
        let a = Mat2([[1.0, 2.0], [2.0, 4.0]]);
        assert!(a.inverse().is_err());
    }

    #[test]
    fn rotation_is_orthogonal() {
        let g = Mat2::rotation(0.7);
        let prod = g * g.transpose();
        assert_relative_eq!(prod.0[0][0], 1.0, epsilon = 1e-15);
        assert_relative_eq!(prod.0[0][1], 0.0, epsilon = 1e-15);
        assert_relative_eq!(g.det(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn symmetric_eigenvalues_match_invariants() {
        let a = Mat2([[1.3, -0.4], [-0.4, -2.0]]);
        let (lo, hi) = a.sym_eigenvalues();
        assert!(lo <= hi);
        assert_relative_eq!(lo + hi, a.trace(), epsilon = 1e-14);
        assert_relative_eq!(lo * hi, a.det(), epsilon = 1e-14);
    }
}
