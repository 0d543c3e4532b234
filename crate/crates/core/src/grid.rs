//! Adaptive radial grids for the Fourier-grid Hamiltonian.
//!
//! The grid is built from a change of variable `x -> R(x)` chosen so that a
//! fixed number of points per local de Broglie wavelength is maintained up to
//! a configurable ceiling energy.  Long-range channels with shallow tails then
//! cost points proportional to the local momentum instead of the worst-case
//! one, which is what makes box sizes of hundreds of bohr affordable.

use crate::error::{Error, Result};
use crate::potential::ChannelPotentialMatrix;

/// Parameters controlling the construction of an adaptive grid.
#[derive(Debug, Clone, Copy)]
pub struct MappedGridParams {
    /// Outer end of the radial box (bohr).
    pub r_max: f64,
    /// Ceiling energy above the lower threshold (hartree).  Kinetic energies
    /// up to this value above the open-channel asymptote are representable.
    pub e_above_open: f64,
    /// Points per half de Broglie wavelength.  1.0 is the Nyquist limit;
    /// 1.5 is a comfortable default.
    pub density_factor: f64,
    /// Hard cap on the number of grid points.
    pub max_points: usize,
}

impl Default for MappedGridParams {
    fn default() -> Self {
        MappedGridParams {
            r_max: 160.0,
            e_above_open: 0.0,
            density_factor: 1.5,
            max_points: 4096,
        }
    }
}

/// A radial grid with per-point Jacobians of the underlying coordinate map.
///
/// Points live at half-integer multiples of `h` in the mapped coordinate, so
/// the periodic box of length `n * h` has no point sitting on the boundary.
#[derive(Debug, Clone)]
pub struct MappedGrid {
    /// Radial positions (bohr), strictly increasing.
    pub r: Vec<f64>,
    /// Jacobian dR/dx at each point.
    pub jac: Vec<f64>,
    /// Step in the mapped coordinate.
    pub h: f64,
    /// Inner edge of the box (bohr).
    pub r_min: f64,
    /// Outer edge of the box (bohr).
    pub r_max: f64,
    /// Absolute ceiling energy used for the envelope (hartree).
    pub e_ceiling: f64,
    /// Density factor the grid was built with.
    pub density_factor: f64,
}

impl MappedGrid {
    /// Number of grid points.
    pub fn len(&self) -> usize {
        self.r.len()
    }

    /// True when the grid holds no points.
    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    /// Length of the periodic box in the mapped coordinate.
    pub fn envelope_length(&self) -> f64 {
        self.h * self.r.len() as f64
    }

    /// Uniform grid on `[r_min, r_max]` with unit Jacobian.
    ///
    /// This is the plain Fourier grid, useful for reference problems with
    /// closed-form spectra.  `n` must be even and at least 4.
    pub fn uniform(r_min: f64, r_max: f64, n: usize) -> Result<Self> {
        if !(r_max > r_min) || !r_min.is_finite() || !r_max.is_finite() {
            return Err(Error::Input(format!(
                "uniform grid needs r_min < r_max, got [{r_min}, {r_max}]"
            )));
        }
        if n < 4 || n % 2 != 0 {
            return Err(Error::Input(format!(
                "uniform grid size must be even and >= 4, got {n}"
            )));
        }
        let h = (r_max - r_min) / n as f64;
        let r: Vec<f64> = (0..n).map(|i| r_min + (i as f64 + 0.5) * h).collect();
        Ok(MappedGrid {
            r,
            jac: vec![1.0; n],
            h,
            r_min,
            r_max,
            e_ceiling: f64::INFINITY,
            density_factor: 1.0,
        })
    }
}

/// Local target spacing of the grid at radius `r` (bohr per point).
///
/// Inside the classically allowed region this is the half de Broglie
/// wavelength at the ceiling energy divided by the density factor; inside the
/// wall it tracks the local decay length instead.  The two regimes are
/// blended as `sqrt((E-V)² + floor²)`, which keeps the spacing finite at
/// turning points while staying smooth there — a kink in the map would
/// degrade the spectral convergence of the kinetic operator to low algebraic
/// order.
///
/// The floor itself adapts to the local slope of the envelope.  Where the
/// potential crosses the ceiling on a steep wall, `|E - V|` sweeps from large
/// to zero within a fraction of a grid step; a fixed small floor would let
/// the spacing spike inside that narrow notch and the spike would alias into
/// the Jacobian wherever a point happens to land in it.  Requiring the
/// kinetic scale to stay above a few times the potential change per step
/// (`q >= C * (pi |V'| / sqrt(2 mu))^(2/3)`, the self-consistent solution of
/// `q = s(q) |V'|` at unit density) bounds the per-step Jacobian variation
/// near every turning point by about `1 / (2 C^(3/2))` by construction.  The
/// floor deliberately ignores the density factor so that raising the density
/// scales every spacing by exactly the same ratio.
fn local_spacing(
    pot: &ChannelPotentialMatrix,
    r: f64,
    e_ceiling: f64,
    kinetic_floor: f64,
    density_factor: f64,
) -> f64 {
    let two_mu = 2.0 * pot.reduced_mass();
    let d = e_ceiling - pot.v_floor(r);
    let dv = {
        let delta = 0.01;
        (pot.v_floor(r + delta) - pot.v_floor(r - delta)).abs() / (2.0 * delta)
    };
    let slope_floor = 3.0 * (std::f64::consts::PI * dv / two_mu.sqrt()).powf(2.0 / 3.0);
    let floor = kinetic_floor.max(slope_floor);
    let q = (d * d + floor * floor).sqrt();
    std::f64::consts::PI / (density_factor * (two_mu * q).sqrt())
}

/// Builds an adaptive grid for the coupled-channel problem.
///
/// The inner edge is placed two bohr inside the classical turning point of
/// the lower adiabatic envelope at the ceiling energy (never below 4 bohr).
/// The number of points follows from integrating the inverse local spacing
/// across the box; it is rounded to an even count, as required by the
/// plane-wave kinetic operator.
pub fn build_mapped_grid(
    pot: &ChannelPotentialMatrix,
    params: &MappedGridParams,
) -> Result<MappedGrid> {
    if !params.e_above_open.is_finite() || params.e_above_open < 0.0 {
        return Err(Error::Input(format!(
            "ceiling energy above the open threshold must be finite and >= 0, got {}",
            params.e_above_open
        )));
    }
    if !(params.density_factor >= 0.5) || !params.density_factor.is_finite() {
        return Err(Error::Input(format!(
            "density factor must be finite and >= 0.5, got {}",
            params.density_factor
        )));
    }
    if params.max_points < 16 {
        return Err(Error::Input(format!(
            "max_points must be at least 16, got {}",
            params.max_points
        )));
    }
    let e_ceiling = pot.e_open() + params.e_above_open;

    // Classical turning point of the lower envelope at the ceiling energy.
    let scan_start = 3.0;
    if !(params.r_max > scan_start + 10.0) || !params.r_max.is_finite() {
        return Err(Error::Input(format!(
            "outer box edge must exceed {} bohr, got {}",
            scan_start + 10.0,
            params.r_max
        )));
    }
    let mut turning = None;
    let scan_step = 0.005;
    let n_scan = ((params.r_max - scan_start) / scan_step) as usize;
    for i in 0..=n_scan {
        let r = scan_start + i as f64 * scan_step;
        if pot.v_floor(r) < e_ceiling {
            turning = Some(r);
            break;
        }
    }
    let turning = turning.ok_or_else(|| {
        Error::Input(format!(
            "ceiling energy {e_ceiling} hartree lies below the potential floor everywhere"
        ))
    })?;
    let r_min = (turning - 2.0).max(4.0);
    if !(params.r_max > r_min + 5.0) {
        return Err(Error::Input(format!(
            "outer box edge {} leaves no room beyond the inner edge {}",
            params.r_max, r_min
        )));
    }

    // Floor on the local kinetic scale: a tenth of the ceiling interval, or a
    // fixed fraction of the full well depth when the ceiling sits at the
    // threshold itself.
    let depth_scale = {
        let mut v_min = f64::INFINITY;
        let m = 2000;
        for i in 0..=m {
            let r = r_min + (params.r_max - r_min) * i as f64 / m as f64;
            v_min = v_min.min(pot.v_floor(r));
        }
        e_ceiling - v_min
    };
    if !(depth_scale > 0.0) {
        return Err(Error::Input(
            "ceiling energy lies below the potential minimum".into(),
        ));
    }
    let kinetic_floor = (0.1 * params.e_above_open).max(1e-3 * depth_scale);

    // Total point budget: integral of the inverse local spacing (composite
    // Simpson on a fine fixed mesh; the integrand is smooth and bounded).
    let panels = 200_000usize;
    let hh = (params.r_max - r_min) / panels as f64;
    let density =
        |r: f64| 1.0 / local_spacing(pot, r, e_ceiling, kinetic_floor, params.density_factor);
    let mut x_total = density(r_min) + density(params.r_max);
    for i in 1..panels {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        x_total += w * density(r_min + i as f64 * hh);
    }
    x_total *= hh / 3.0;

    let n = (2.0 * (x_total / 2.0).round()) as usize;
    let n = n.max(16);
    if n > params.max_points {
        return Err(Error::Size(format!(
            "grid needs {n} points (cap {}); raise max_points, lower the ceiling \
             energy, or shrink the box",
            params.max_points
        )));
    }
    let h = x_total / n as f64;

    // Invert the map by integrating dR/dx = s(R) from the inner edge, placing
    // points at half-integer steps.  Classical RK4 with substeps is plenty:
    // s(R) is smooth and each step spans a fraction of a wavelength.
    let s = |r: f64| local_spacing(pot, r, e_ceiling, kinetic_floor, params.density_factor);
    let mut r_pts = Vec::with_capacity(n);
    let mut jac = Vec::with_capacity(n);
    let mut r_cur = r_min;
    let substeps = 8;
    for i in 0..n {
        // advance from x = i*h (or 0) to x = (i + 0.5)*h
        let dx_total = if i == 0 { 0.5 * h } else { h };
        let dx = dx_total / substeps as f64;
        for _ in 0..substeps {
            let k1 = s(r_cur);
            let k2 = s(r_cur + 0.5 * dx * k1);
            let k3 = s(r_cur + 0.5 * dx * k2);
            let k4 = s(r_cur + dx * k3);
            r_cur += dx * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0;
        }
        r_pts.push(r_cur);
        jac.push(s(r_cur));
    }

    Ok(MappedGrid {
        r: r_pts,
        jac,
        h,
        r_min,
        r_max: params.r_max,
        e_ceiling,
        density_factor: params.density_factor,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::{synthetic_model, SyntheticModelParams};
    use crate::units::cm_to_hartree;

    fn model() -> ChannelPotentialMatrix {
        ChannelPotentialMatrix::build(&synthetic_model(&SyntheticModelParams::default())).unwrap()
    }

    #[test]
    fn point_count_is_even_and_capped() {
        let pot = model();
        let params = MappedGridParams {
            r_max: 120.0,
            e_above_open: cm_to_hartree(240.0),
            density_factor: 1.5,
            max_points: 4096,
        };
        let grid = build_mapped_grid(&pot, &params).unwrap();
        assert_eq!(grid.len() % 2, 0);
        assert!(grid.len() >= 16);
        assert!(grid.len() <= 4096);

        let starved = MappedGridParams {
            max_points: 32,
            ..params
        };
        assert!(matches!(
            build_mapped_grid(&pot, &starved),
            Err(Error::Size(_))
        ));
    }

    #[test]
    fn spacing_follows_local_wavelength() {
        let pot = model();
        let params = MappedGridParams {
            r_max: 100.0,
            e_above_open: cm_to_hartree(237.6),
            density_factor: 1.5,
            max_points: 4096,
        };
        let grid = build_mapped_grid(&pot, &params).unwrap();
        let kinetic_floor = 0.1 * params.e_above_open;
        for i in 0..grid.len() - 1 {
            let mid = 0.5 * (grid.r[i] + grid.r[i + 1]);
            let q = grid.e_ceiling - pot.v_floor(mid);
            if q < 2.0 * kinetic_floor {
                continue; // clamp region near turning points
            }
            let target = std::f64::consts::PI
                / (params.density_factor * (2.0 * pot.reduced_mass() * q).sqrt());
            let dr = grid.r[i + 1] - grid.r[i];
            assert!(
                dr <= target * grid.h * 1.05,
                "spacing {dr} exceeds target {target} at R = {mid}"
            );
        }
    }

    #[test]
    fn point_count_grows_with_ceiling() {
        let pot = model();
        let mut last = 0;
        for frac in [0.1, 0.5, 1.0] {
            let params = MappedGridParams {
                r_max: 120.0,
                e_above_open: cm_to_hartree(237.6 * frac),
                density_factor: 1.5,
                max_points: 8192,
            };
            let n = build_mapped_grid(&pot, &params).unwrap().len();
            assert!(n > last, "N = {n} did not grow (previous {last})");
            last = n;
        }
    }

    #[test]
    fn doubling_density_doubles_points() {
        let pot = model();
        let base = MappedGridParams {
            r_max: 120.0,
            e_above_open: cm_to_hartree(237.6),
            density_factor: 1.5,
            max_points: 16384,
        };
        let n1 = build_mapped_grid(&pot, &base).unwrap().len() as i64;
        let dbl = MappedGridParams {
            density_factor: 3.0,
            ..base
        };
        let n2 = build_mapped_grid(&pot, &dbl).unwrap().len() as i64;
        assert!((n2 - 2 * n1).abs() <= 2, "N doubled {n1} -> {n2}");
    }

    #[test]
    fn inner_edge_sits_inside_the_wall() {
        let pot = model();
        let params = MappedGridParams {
            r_max: 100.0,
            e_above_open: cm_to_hartree(237.6),
            density_factor: 1.5,
            max_points: 4096,
        };
        let grid = build_mapped_grid(&pot, &params).unwrap();
        assert!(grid.r_min >= 4.0);
        // the envelope at the inner edge must be classically forbidden
        assert!(pot.v_floor(grid.r_min) > grid.e_ceiling);
        // and the turning point must lie within the 2-bohr margin
        assert!(pot.v_floor(grid.r_min + 2.01) < grid.e_ceiling);
        // points are strictly increasing and confined to the box
        for w in grid.r.windows(2) {
            assert!(w[1] > w[0]);
        }
        assert!(grid.r[0] > grid.r_min);
        assert!(*grid.r.last().unwrap() < grid.r_max + 1e-6);
    }

    #[test]
    fn uniform_grid_sanity() {
        let g = MappedGrid::uniform(0.0, 10.0, 8).unwrap();
        assert_eq!(g.len(), 8);
        assert!((g.r[0] - 0.625).abs() < 1e-15);
        assert!((g.h - 1.25).abs() < 1e-15);
        assert!((g.envelope_length() - 10.0).abs() < 1e-12);
        assert!(g.jac.iter().all(|&j| j == 1.0));
        assert!(MappedGrid::uniform(0.0, 10.0, 7).is_err());
        assert!(MappedGrid::uniform(10.0, 0.0, 8).is_err());
    }
}
