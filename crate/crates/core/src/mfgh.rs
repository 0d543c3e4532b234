//! Coupled-channel Hamiltonians on a mapped Fourier grid.
//!
//! The kinetic operator comes from the plane-wave (periodic) first-derivative
//! matrix sandwiched between Jacobian factors, `T = Gᵀ G / (2μ)` with
//! `G = J^{-1/2} D J^{-1/2}`, which keeps it manifestly symmetric and
//! positive semi-definite on an arbitrary monotonic coordinate map.  Adding a
//! negative-imaginary absorbing diagonal at the edge of the box turns the
//! discretized continuum into a set of complex eigenvalues whose imaginary
//! parts converge to resonance half-widths as the box grows.
//!
//! The periodic derivative matrix annihilates one alternating vector besides
//! the constant (an artifact of the even point count), so the spectrum holds
//! one spurious near-zero kinetic mode.  It sits at the potential floor, far
//! below the windows scanned for bound or quasibound levels, and never
//! survives box-size stabilization.

use faer::Mat;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::MappedGrid;
use crate::potential::ChannelPotentialMatrix;

/// Absorbing boundary placed at the outer edge of the box.
#[derive(Debug, Clone, Copy)]
pub struct OpticalPotentialParams {
    /// Strength of the absorber (hartree).  Zero disables it.
    pub amplitude: f64,
    /// Range of the absorber (bohr).
    pub length: f64,
    /// Radius where absorption switches on (bohr).
    pub r_start: f64,
    /// Dimensionless normalization of the profile.
    pub normalization: f64,
}

impl OpticalPotentialParams {
    /// Standard absorber filling the last `length` bohr of a box ending at
    /// `r_max`.
    pub fn at_edge_of(r_max: f64) -> Self {
        OpticalPotentialParams {
            amplitude: 4.0e-5,
            length: 40.0,
            r_start: r_max - 40.0,
            normalization: 13.22,
        }
    }
}

/// Magnitude of the absorbing potential at radius `r` (hartree, >= 0).
///
/// The profile `A N exp(-2L / (r - r_start))` vanishes with all derivatives
/// at `r_start` and saturates at `A N` far beyond, so it absorbs outgoing
/// flux without reflecting it.
pub fn optical_potential_value(op: &OpticalPotentialParams, r: f64) -> f64 {
    if r <= op.r_start {
        0.0
    } else {
        op.amplitude * op.normalization * (-2.0 * op.length / (r - op.r_start)).exp()
    }
}

/// Kinetic-energy matrix on a (possibly mapped) periodic Fourier grid.
pub fn kinetic_matrix(grid: &MappedGrid, reduced_mass: f64) -> Mat<f64> {
    let n = grid.len();
    let lambda = grid.envelope_length();
    let pref = std::f64::consts::PI / lambda;
    // Antisymmetric spectral first derivative in the mapped coordinate,
    // scaled into the radial one through the Jacobians.
    let inv_sqrt_j: Vec<f64> = grid.jac.iter().map(|&j| 1.0 / j.sqrt()).collect();
    let g = Mat::<f64>::from_fn(n, n, |j, k| {
        if j == k {
            0.0
        } else {
            let d = j as isize - k as isize;
            let sign = if d % 2 == 0 { 1.0 } else { -1.0 };
            let cot = 1.0 / (std::f64::consts::PI * d as f64 / n as f64).tan();
            pref * sign * cot * inv_sqrt_j[j] * inv_sqrt_j[k]
        }
    });
    let t = g.transpose() * &g;
    let half_inv_mass = 0.5 / reduced_mass;
    // Symmetrize away the last bits of roundoff from the matrix product.
    Mat::<f64>::from_fn(n, n, |j, k| half_inv_mass * 0.5 * (t[(j, k)] + t[(k, j)]))
}

/// Two-channel Hamiltonian discretized on a grid, with an optional absorbing
/// diagonal in the open channel.
pub struct CoupledHamiltonian {
    /// Symmetric real part, ordered as [open block; closed block].
    real: Mat<f64>,
    /// Negative-imaginary absorbing diagonal (stored as magnitudes).
    absorb: Vec<f64>,
    /// Number of radial points per channel.
    n: usize,
}

/// Complex spectrum of a coupled Hamiltonian, sorted by real part.
#[derive(Debug, Clone)]
pub struct ComplexSpectrum {
    /// Eigenvalues; resonances carry `Im E = -Γ/2`.
    pub energies: Vec<Complex64>,
    /// Fraction of each eigenvector's norm in the open channel.
    pub open_weight: Vec<f64>,
}

impl ComplexSpectrum {
    /// Levels whose real part falls in `[lo, hi]` (hartree).
    pub fn in_window(&self, lo: f64, hi: f64) -> Vec<(Complex64, f64)> {
        self.energies
            .iter()
            .zip(&self.open_weight)
            .filter(|(e, _)| e.re >= lo && e.re <= hi)
            .map(|(e, w)| (*e, *w))
            .collect()
    }
}

/// Builds the two-channel Hamiltonian on `grid`.
///
/// The absorber, when given, acts on the open-channel diagonal only and must
/// fit inside the box: `r_start + length <= r_max`.
pub fn assemble(
    grid: &MappedGrid,
    pot: &ChannelPotentialMatrix,
    optical: Option<&OpticalPotentialParams>,
) -> Result<CoupledHamiltonian> {
    let n = grid.len();
    if n % 2 != 0 || n < 4 {
        return Err(Error::Input(format!(
            "grid must hold an even number (>= 4) of points, got {n}"
        )));
    }
    if let Some(op) = optical {
        if op.amplitude < 0.0 || !op.amplitude.is_finite() {
            return Err(Error::Input(format!(
                "absorber amplitude must be finite and >= 0, got {}",
                op.amplitude
            )));
        }
        if op.amplitude > 0.0 {
            if !(op.length > 0.0) || !(op.normalization > 0.0) {
                return Err(Error::Input(
                    "absorber length and normalization must be positive".into(),
                ));
            }
            if op.r_start <= grid.r_min {
                return Err(Error::Input(format!(
                    "absorber start {} lies inside the inner edge {}",
                    op.r_start, grid.r_min
                )));
            }
            if op.r_start + op.length > grid.r_max * (1.0 + 1e-12) {
                return Err(Error::Input(format!(
                    "absorber spans [{}, {}] but the box ends at {}",
                    op.r_start,
                    op.r_start + op.length,
                    grid.r_max
                )));
            }
        }
    }

    let t = kinetic_matrix(grid, pot.reduced_mass());
    let dim = 2 * n;
    let mut real = Mat::<f64>::zeros(dim, dim);
    for j in 0..n {
        for k in 0..n {
            real[(j, k)] = t[(j, k)];
            real[(n + j, n + k)] = t[(j, k)];
        }
    }
    for (i, &r) in grid.r.iter().enumerate() {
        let v = pot.evaluate(r);
        real[(i, i)] += v.0[0][0];
        real[(n + i, n + i)] += v.0[1][1];
        real[(i, n + i)] = v.0[0][1];
        real[(n + i, i)] = v.0[0][1];
    }

    let mut absorb = vec![0.0; dim];
    if let Some(op) = optical {
        if op.amplitude > 0.0 {
            for (i, &r) in grid.r.iter().enumerate() {
                absorb[i] = optical_potential_value(op, r);
            }
        }
    }

    Ok(CoupledHamiltonian { real, absorb, n })
}

impl CoupledHamiltonian {
    /// Number of radial points per channel.
    pub fn points_per_channel(&self) -> usize {
        self.n
    }

    /// True when an absorbing diagonal is present.
    pub fn is_complex(&self) -> bool {
        self.absorb.iter().any(|&a| a != 0.0)
    }

    /// Maximum deviation from symmetry of the real part (diagnostic).
    pub fn symmetry_defect(&self) -> f64 {
        let dim = 2 * self.n;
        let mut worst: f64 = 0.0;
        for j in 0..dim {
            for k in j + 1..dim {
                worst = worst.max((self.real[(j, k)] - self.real[(k, j)]).abs());
            }
        }
        worst
    }

    /// Full diagonalization.
    ///
    /// Without an absorber the problem is real symmetric and the eigenvalues
    /// come out exactly real; with one, the complex eigenproblem is solved
    /// and eigenvalues are sorted by real part.
    pub fn diagonalize(&self) -> Result<ComplexSpectrum> {
        let dim = 2 * self.n;
        if !self.is_complex() {
            let evd = self
                .real
                .self_adjoint_eigen(faer::Side::Lower)
                .map_err(|e| Error::Convergence(format!("symmetric eigensolver: {e:?}")))?;
            let s = evd.S();
            let u = evd.U();
            let mut energies = Vec::with_capacity(dim);
            let mut open_weight = Vec::with_capacity(dim);
            for k in 0..dim {
                energies.push(Complex64::new(s[k], 0.0));
                let mut open = 0.0;
                let mut total = 0.0;
                for j in 0..dim {
                    let a = u[(j, k)] * u[(j, k)];
                    total += a;
                    if j < self.n {
                        open += a;
                    }
                }
                open_weight.push(open / total);
            }
            return Ok(ComplexSpectrum {
                energies,
                open_weight,
            });
        }

        let h = Mat::<Complex64>::from_fn(dim, dim, |j, k| {
            let re = self.real[(j, k)];
            let im = if j == k { -self.absorb[j] } else { 0.0 };
            Complex64::new(re, im)
        });
        let evd = h
            .eigen()
            .map_err(|e| Error::Convergence(format!("complex eigensolver: {e:?}")))?;
        let s = evd.S().column_vector().to_owned();
        let u = evd.U();
        let mut order: Vec<usize> = (0..dim).collect();
        order.sort_by(|&a, &b| {
            s[a].re
                .partial_cmp(&s[b].re)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(
                    s[a].im
                        .partial_cmp(&s[b].im)
                        .unwrap_or(std::cmp::Ordering::Equal),
                )
        });
        let mut energies = Vec::with_capacity(dim);
        let mut open_weight = Vec::with_capacity(dim);
        for &k in &order {
            energies.push(s[k]);
            let mut open = 0.0;
            let mut total = 0.0;
            for j in 0..dim {
                let a = u[(j, k)].norm_sqr();
                total += a;
                if j < self.n {
                    open += a;
                }
            }
            open_weight.push(open / total);
        }
        Ok(ComplexSpectrum {
            energies,
            open_weight,
        })
    }
}

/// Spectrum of a single-channel potential on a grid (for reference problems).
pub fn single_channel_spectrum(
    grid: &MappedGrid,
    v: impl Fn(f64) -> f64,
    reduced_mass: f64,
) -> Result<Vec<f64>> {
    let n = grid.len();
    let mut h = kinetic_matrix(grid, reduced_mass);
    for (i, &r) in grid.r.iter().enumerate() {
        h[(i, i)] += v(r);
    }
    let evd = h
        .self_adjoint_eigen(faer::Side::Lower)
        .map_err(|e| Error::Convergence(format!("symmetric eigensolver: {e:?}")))?;
    let s = evd.S();
    Ok((0..n).map(|k| s[k]).collect())
}
