//! Two-channel potential model.
//!
//! Input is a pair of electronic curves in the molecular (Hund's case a)
//! representation, `V_A(R)` and `V_b(R)`, plus an R-dependent spin-orbit
//! function `A_so(R)`. The scattering problem is posed in the asymptotic
//! (diabatic) channel basis in which the spin-orbit operator is diagonal at
//! infinity; there the 2x2 interaction matrix reads
//!
//! ```text
//! V_oo = V_A/3 + 2 V_b/3 - A_so          (open channel, lower threshold)
//! V_cc = 2 V_A/3 + V_b/3 + A_so/2        (closed channel, upper threshold)
//! V_oc = sqrt(2/3) (V_A - V_b)           (coupling)
//! ```
//!
//! so the thresholds are `E_open = V(inf) - A_so(inf)` and
//! `E_closed = V(inf) + A_so(inf)/2`, split by `(3/2) A_so(inf)`.
//!
//! Curves may come from a text table ([`load_curves`]) or from the built-in
//! analytic model ([`synthetic_model`]): a shared Morse-plus-damped-dispersion
//! baseline with a Gaussian splitting between the two curves. The Gaussian
//! both localizes the interchannel coupling (it vanishes far from its center,
//! which the propagation layer relies on) and drags the upper curve through
//! the lower threshold region to create a curve crossing.

use crate::error::{Error, Result};
use crate::interp::CubicSpline;
use crate::mat2::Mat2;
use crate::units;

/// Sampled case-a curves plus the scalar metadata needed to pose the
/// coupled problem.
#[derive(Debug, Clone)]
pub struct HundsCaseAInput {
    /// Sample radii, bohr, strictly increasing.
    pub r: Vec<f64>,
    /// Upper electronic curve `V_A`, hartree.
    pub v_a: Vec<f64>,
    /// Lower electronic curve `V_b`, hartree.
    pub v_b: Vec<f64>,
    /// Spin-orbit function `A_so(R)`, hartree.
    pub a_so: Vec<f64>,
    /// Common electronic asymptote of both curves, hartree.
    pub asymptote: f64,
    /// Reduced mass, electron masses.
    pub reduced_mass: f64,
}

/// Parameters of the built-in analytic two-curve model. All quantities in
/// atomic units.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticModelParams {
    pub reduced_mass: f64,
    /// Common electronic asymptote, hartree.
    pub asymptote: f64,
    /// Asymptotic threshold splitting `E_closed - E_open`, hartree.
    /// The asymptotic spin-orbit constant is `(2/3)` of this.
    pub delta_e_so: f64,
    /// Morse well depth / position / inverse range of the baseline carried
    /// by each curve.
    pub depth_a: f64,
    pub re_a: f64,
    pub stiffness_a: f64,
    pub depth_b: f64,
    pub re_b: f64,
    pub stiffness_b: f64,
    /// Resonant-dipole dispersion coefficient of the `-C3/R^3` tail.
    pub c3: f64,
    /// Peak value of the Gaussian splitting `V_A - V_b`, hartree. Negative
    /// values pull `V_A` below `V_b` near the center, which is what produces
    /// a crossing between the diabatic channels.
    pub coupling_amplitude: f64,
    pub coupling_center: f64,
    pub coupling_width: f64,
    /// Dimensionless modulation of `A_so(R)` on the same Gaussian profile:
    /// `A_so = (2/3) delta_e_so (1 + so_amplitude * gaussian)`.
    pub so_amplitude: f64,
}

impl Default for SyntheticModelParams {
    fn default() -> Self {
        SyntheticModelParams {
            reduced_mass: units::DEFAULT_REDUCED_MASS,
            asymptote: 0.0,
            delta_e_so: units::cm_to_hartree(237.6),
            depth_a: units::cm_to_hartree(2000.0),
            re_a: 8.5,
            stiffness_a: 0.40,
            depth_b: units::cm_to_hartree(2000.0),
            re_b: 8.5,
            stiffness_b: 0.40,
            c3: 10.0,
            coupling_amplitude: units::cm_to_hartree(-1300.0),
            coupling_center: 9.0,
            coupling_width: 0.55,
            so_amplitude: -3.0,
        }
    }
}

/// Morse well plus a dispersion tail that switches on around `r_d`.
///
/// The eighth-power damping keeps the `-c3/r^3` term negligible against the
/// repulsive wall (so the short range stays a clean Morse barrier with no
/// secondary structure) while leaving the tail exactly `-c3/r^3` beyond
/// about `1.5 * r_d`.
fn morse_dispersion(r: f64, asym: f64, d: f64, re: f64, a: f64, c3: f64, r_d: f64) -> f64 {
    let m = 1.0 - (-a * (r - re)).exp();
    let damp = 1.0 - (-(r / r_d).powi(8)).exp();
    asym - d + d * m * m - c3 / r.powi(3) * damp
}

/// Samples the analytic model densely enough that cubic resampling is exact
/// to well below every tolerance used downstream (step 0.02 bohr through the
/// well and crossing region, coarser where the curves are pure tail).
pub fn synthetic_model(p: &SyntheticModelParams) -> HundsCaseAInput {
    let mut r = Vec::new();
    let push_range = |from: f64, to: f64, step: f64, r: &mut Vec<f64>| {
        let n = ((to - from) / step).round() as usize;
        for i in 0..n {
            r.push(from + step * i as f64);
        }
    };
    push_range(3.0, 20.0, 0.02, &mut r);
    push_range(20.0, 60.0, 0.1, &mut r);
    push_range(60.0, 120.0, 0.5, &mut r);
    r.push(120.0);

    let gauss = |x: f64| (-((x - p.coupling_center) / p.coupling_width).powi(2) / 2.0).exp();
    let a_so_inf = 2.0 / 3.0 * p.delta_e_so;

    let mut v_a = Vec::with_capacity(r.len());
    let mut v_b = Vec::with_capacity(r.len());
    let mut a_so = Vec::with_capacity(r.len());
    for &ri in &r {
        let base_a = morse_dispersion(
            ri,
            p.asymptote,
            p.depth_a,
            p.re_a,
            p.stiffness_a,
            p.c3,
            1.25 * p.re_a,
        );
        let base_b = morse_dispersion(
            ri,
            p.asymptote,
            p.depth_b,
            p.re_b,
            p.stiffness_b,
            p.c3,
            1.25 * p.re_b,
        );
        let g = gauss(ri);
        v_a.push(base_a + p.coupling_amplitude * g);
        v_b.push(base_b);
        a_so.push(a_so_inf * (1.0 + p.so_amplitude * g));
    }

    HundsCaseAInput {
        r,
        v_a,
        v_b,
        a_so,
        asymptote: p.asymptote,
        reduced_mass: p.reduced_mass,
    }
}

/// Reads case-a curves from a whitespace-separated table.
///
/// Data lines hold `R  V_A  V_b  A_so` in bohr/hartree. Lines starting with
/// `#` are comments; two comment forms carry metadata:
/// `# reduced_mass_me = <value>` and `# asymptote_hartree = <value>`
/// (defaults: the built-in reduced mass, and 0).
pub fn load_curves(text: &str) -> Result<HundsCaseAInput> {
    let mut r = Vec::new();
    let mut v_a = Vec::new();
    let mut v_b = Vec::new();
    let mut a_so = Vec::new();
    let mut reduced_mass = units::DEFAULT_REDUCED_MASS;
    let mut asymptote = 0.0;

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some((key, value)) = comment.split_once('=') {
                let key = key.trim();
                let value = value.trim();
                let parsed = || -> Result<f64> {
                    value.parse::<f64>().map_err(|_| {
                        Error::Input(format!(
                            "line {lineno}: bad numeric value {value:?} for {key}"
                        ))
                    })
                };
                match key {
                    "reduced_mass_me" => reduced_mass = parsed()?,
                    "asymptote_hartree" => asymptote = parsed()?,
                    _ => {} // ordinary comment
                }
            }
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 4 {
            return Err(Error::Input(format!(
                "line {lineno}: expected 4 columns (R V_A V_b A_so), found {}",
                fields.len()
            )));
        }
        let mut nums = [0.0; 4];
        for (k, f) in fields.iter().enumerate() {
            nums[k] = f.parse::<f64>().map_err(|_| {
                Error::Input(format!("line {lineno}: column {} is not a number: {f:?}", k + 1))
            })?;
        }
        r.push(nums[0]);
        v_a.push(nums[1]);
        v_b.push(nums[2]);
        a_so.push(nums[3]);
    }

    if r.is_empty() {
        return Err(Error::Input("potential table contains no data lines".into()));
    }
    Ok(HundsCaseAInput {
        r,
        v_a,
        v_b,
        a_so,
        asymptote,
        reduced_mass,
    })
}

/// The coupled 2x2 interaction in the asymptotic channel basis, with smooth
/// interpolation inside the tabulated range and an analytic `-C3/R^3` tail
/// beyond it. Channel 0 is open (lower threshold), channel 1 closed.
#[derive(Debug, Clone)]
pub struct ChannelPotentialMatrix {
    spline_a: CubicSpline,
    spline_b: CubicSpline,
    spline_so: CubicSpline,
    r_last: f64,
    asymptote: f64,
    /// Tail coefficients fitted so each curve is exactly continuous at the
    /// last sample: `V(R) = asymptote - c3/R^3` beyond it.
    c3_a: f64,
    c3_b: f64,
    /// Relative spread of the tail coefficient over the last samples; a
    /// diagnostic for how settled the input tail is.
    tail_spread: f64,
    a_so_inf: f64,
    reduced_mass: f64,
}

impl ChannelPotentialMatrix {
    pub fn build(input: &HundsCaseAInput) -> Result<Self> {
        let n = input.r.len();
        if n < 8 {
            return Err(Error::Size(format!(
                "potential table needs at least 8 samples, got {n}"
            )));
        }
        if !(input.reduced_mass.is_finite() && input.reduced_mass > 0.0) {
            return Err(Error::Input(format!(
                "reduced mass must be positive, got {}",
                input.reduced_mass
            )));
        }
        let spline_a = CubicSpline::natural(&input.r, &input.v_a)?;
        let spline_b = CubicSpline::natural(&input.r, &input.v_b)?;
        let spline_so = CubicSpline::natural(&input.r, &input.a_so)?;
        let r_last = *input.r.last().unwrap();
        let r_first = input.r[0];
        if r_last - r_first < 10.0 {
            return Err(Error::Input(format!(
                "potential table spans only [{r_first}, {r_last}] bohr; need at least 10 bohr"
            )));
        }

        // Tail coefficient from the last sample keeps the curve continuous;
        // the spread over the trailing samples measures tail purity.
        let tail_c3 = |v: &[f64]| -> (f64, f64) {
            let m = 5.min(n);
            let cs: Vec<f64> = (n - m..n)
                .map(|i| (input.asymptote - v[i]) * input.r[i].powi(3))
                .collect();
            let last = *cs.last().unwrap();
            let lo = cs.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = cs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let scale = last.abs().max(1e-6);
            (last, (hi - lo) / scale)
        };
        let (c3_a, spread_a) = tail_c3(&input.v_a);
        let (c3_b, spread_b) = tail_c3(&input.v_b);

        let a_so_inf = *input.a_so.last().unwrap();
        let m = 5.min(n);
        let so_spread = input.a_so[n - m..]
            .iter()
            .map(|v| (v - a_so_inf).abs())
            .fold(0.0, f64::max);
        if so_spread > 1e-2 * a_so_inf.abs().max(1e-12) {
            return Err(Error::Input(format!(
                "spin-orbit function has not settled at the end of the table \
                 (varies by {so_spread:.3e} hartree over the last {m} samples)"
            )));
        }

        Ok(ChannelPotentialMatrix {
            spline_a,
            spline_b,
            spline_so,
            r_last,
            asymptote: input.asymptote,
            c3_a,
            c3_b,
            tail_spread: spread_a.max(spread_b),
            a_so_inf,
            reduced_mass: input.reduced_mass,
        })
    }

    pub fn reduced_mass(&self) -> f64 {
        self.reduced_mass
    }

    pub fn r_last(&self) -> f64 {
        self.r_last
    }

    pub fn tail_spread(&self) -> f64 {
        self.tail_spread
    }

    /// Lower threshold (open channel), hartree.
    pub fn e_open(&self) -> f64 {
        self.asymptote - self.a_so_inf
    }

    /// Upper threshold (closed channel), hartree.
    pub fn e_closed(&self) -> f64 {
        self.asymptote + 0.5 * self.a_so_inf
    }

    /// Threshold splitting `E_closed - E_open`, hartree.
    pub fn split(&self) -> f64 {
        1.5 * self.a_so_inf
    }

    pub fn v_a(&self, r: f64) -> f64 {
        if r <= self.r_last {
            self.spline_a.eval(r)
        } else {
            self.asymptote - self.c3_a / r.powi(3)
        }
    }

    pub fn v_b(&self, r: f64) -> f64 {
        if r <= self.r_last {
            self.spline_b.eval(r)
        } else {
            self.asymptote - self.c3_b / r.powi(3)
        }
    }

    pub fn a_so(&self, r: f64) -> f64 {
        if r <= self.r_last {
            self.spline_so.eval(r)
        } else {
            self.a_so_inf
        }
    }

    /// Long-range coefficients of the diagonal channel potentials,
    /// `V_ii(R) -> threshold - c3_ii/R^3`.
    pub fn c3_open(&self) -> f64 {
        self.c3_a / 3.0 + 2.0 * self.c3_b / 3.0
    }

    pub fn c3_closed(&self) -> f64 {
        2.0 * self.c3_a / 3.0 + self.c3_b / 3.0
    }

    /// The 2x2 interaction matrix at `r` in the asymptotic basis.
    pub fn evaluate(&self, r: f64) -> Mat2 {
        let va = self.v_a(r);
        let vb = self.v_b(r);
        let so = self.a_so(r);
        let v_oo = va / 3.0 + 2.0 * vb / 3.0 - so;
        let v_cc = 2.0 * va / 3.0 + vb / 3.0 + 0.5 * so;
        let v_oc = (2.0f64 / 3.0).sqrt() * (va - vb);
        Mat2([[v_oo, v_oc], [v_oc, v_cc]])
    }

    pub fn v_oo(&self, r: f64) -> f64 {
        self.v_a(r) / 3.0 + 2.0 * self.v_b(r) / 3.0 - self.a_so(r)
    }

    pub fn v_cc(&self, r: f64) -> f64 {
        2.0 * self.v_a(r) / 3.0 + self.v_b(r) / 3.0 + 0.5 * self.a_so(r)
    }

    pub fn v_oc(&self, r: f64) -> f64 {
        (2.0f64 / 3.0).sqrt() * (self.v_a(r) - self.v_b(r))
    }

    /// Lower adiabatic eigenvalue of the potential matrix, used by the grid
    /// mapping.  Unlike the raw diagonal minimum it is smooth through the
    /// diabatic crossing, which matters for spectral accuracy of grids built
    /// on top of it.
    pub fn v_floor(&self, r: f64) -> f64 {
        let voo = self.v_oo(r);
        let vcc = self.v_cc(r);
        let voc = self.v_oc(r);
        0.5 * (voo + vcc) - (0.25 * (voo - vcc).powi(2) + voc * voc).sqrt()
    }

    /// Smallest radius beyond which `|V_oc|` stays below `tol` all the way to
    /// infinity. Scans the tabulated range from the outside in and accounts
    /// for a possible residual tail from mismatched dispersion coefficients.
    pub fn coupling_range(&self, tol: f64) -> f64 {
        // Residual analytic tail: |V_oc| = sqrt(2/3) |c3_b - c3_a| / R^3.
        let dc3 = (2.0f64 / 3.0).sqrt() * (self.c3_b - self.c3_a).abs();
        let tail_range = if dc3 > 0.0 {
            (dc3 / tol).cbrt()
        } else {
            0.0
        };

        let r_lo = self.spline_a.x_first();
        let step = 0.01;
        let n = ((self.r_last - r_lo) / step) as usize;
        let mut range = r_lo;
        for i in (0..=n).rev() {
            let r = r_lo + step * i as f64;
            if self.v_oc(r).abs() >= tol {
                // Refine within [r, r + step] by bisection.
                let (mut a, mut b) = (r, (r + step).min(self.r_last));
                for _ in 0..60 {
                    let mid = 0.5 * (a + b);
                    if self.v_oc(mid).abs() >= tol {
                        a = mid;
                    } else {
                        b = mid;
                    }
                }
                range = b;
                break;
            }
        }
        range.max(tail_range.min(1e6))
    }
}

/// Adiabatic view of the coupled problem: the two eigenvalue curves of the
/// 2x2 interaction and the rotation that diagonalizes it.
#[derive(Debug, Clone, Copy)]
pub struct AdiabaticPair<'a> {
    pot: &'a ChannelPotentialMatrix,
}

pub fn adiabatize(pot: &ChannelPotentialMatrix) -> AdiabaticPair<'_> {
    AdiabaticPair { pot }
}

impl<'a> AdiabaticPair<'a> {
    pub fn potential(&self) -> &'a ChannelPotentialMatrix {
        self.pot
    }

    /// Mixing angle of the diagonalizing rotation, continuous in `R` and
    /// vanishing at infinity (where the bases coincide). The `atan2` argument
    /// ordering is chosen so the branch cut is never crossed while the
    /// coupling is nonzero.
    pub fn mixing_angle(&self, r: f64) -> f64 {
        let v = self.pot.evaluate(r);
        0.5 * (-2.0 * v.0[0][1]).atan2(v.0[1][1] - v.0[0][0])
    }

    /// Rotation `M(R)` with `M V M^T = diag(v_lower, v_upper)`.
    pub fn m(&self, r: f64) -> Mat2 {
        Mat2::rotation(self.mixing_angle(r))
    }

    /// Both adiabatic curves at `r`, ascending.
    pub fn both_at(&self, r: f64) -> (f64, f64) {
        self.pot.evaluate(r).sym_eigenvalues()
    }

    /// Lower adiabatic curve; tends to the open-channel threshold.
    pub fn v_lower(&self, r: f64) -> f64 {
        self.both_at(r).0
    }

    /// Upper adiabatic curve; tends to the closed-channel threshold.
    pub fn v_upper(&self, r: f64) -> f64 {
        self.both_at(r).1
    }

    /// Position and value of the minimum of one adiabatic curve, found by a
    /// coarse scan refined by golden-section search.
    pub fn minimum(&self, upper: bool, r_lo: f64, r_hi: f64) -> (f64, f64) {
        let f = |r: f64| {
            let (lo, hi) = self.both_at(r);
            if upper {
                hi
            } else {
                lo
            }
        };
        let n = 400;
        let mut best = (r_lo, f(r_lo));
        for i in 0..=n {
            let r = r_lo + (r_hi - r_lo) * i as f64 / n as f64;
            let v = f(r);
            if v < best.1 {
                best = (r, v);
            }
        }
        let span = (r_hi - r_lo) / n as f64;
        let (mut a, mut b) = ((best.0 - span).max(r_lo), (best.0 + span).min(r_hi));
        let phi = 0.5 * (5.0f64.sqrt() - 1.0);
        let (mut x1, mut x2) = (b - phi * (b - a), a + phi * (b - a));
        let (mut f1, mut f2) = (f(x1), f(x2));
        for _ in 0..80 {
            if f1 < f2 {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - phi * (b - a);
                f1 = f(x1);
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + phi * (b - a);
                f2 = f(x2);
            }
        }
        let rm = 0.5 * (a + b);
        (rm, f(rm))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn default_matrix() -> ChannelPotentialMatrix {
        ChannelPotentialMatrix::build(&synthetic_model(&SyntheticModelParams::default())).unwrap()
    }

    #[test]
    fn thresholds_reproduce_configured_splitting() {
        let p = SyntheticModelParams::default();
        let pot = default_matrix();
        assert_relative_eq!(pot.split(), p.delta_e_so, max_relative = 1e-12);
        assert_relative_eq!(pot.e_open(), -2.0 / 3.0 * p.delta_e_so, max_relative = 1e-12);
        assert_relative_eq!(pot.e_closed(), p.delta_e_so / 3.0, max_relative = 1e-12);
        // Matrix elements approach the thresholds at large R once the
        // dispersion tail (still 0.03 cm^-1 at 400 bohr) is accounted for.
        let r = 400.0;
        let v = pot.evaluate(r);
        let tail = p.c3 / r.powi(3);
        assert_relative_eq!(v.0[0][0] + tail, pot.e_open(), epsilon = 1e-9 * p.delta_e_so);
        assert_relative_eq!(v.0[1][1] + tail, pot.e_closed(), epsilon = 1e-9 * p.delta_e_so);
        assert!(v.0[0][1].abs() < 1e-15);
    }

    #[test]
    fn tail_matches_analytic_dispersion() {
        let p = SyntheticModelParams::default();
        let pot = default_matrix();
        // Beyond the table the open/closed diagonals must follow
        // threshold - c3/R^3 with the configured dispersion coefficient.
        assert_relative_eq!(pot.c3_open(), p.c3, max_relative = 1e-9);
        assert_relative_eq!(pot.c3_closed(), p.c3, max_relative = 1e-9);
        let r = 150.0;
        assert_relative_eq!(
            pot.v_oo(r),
            pot.e_open() - p.c3 / r.powi(3),
            max_relative = 1e-12
        );
        assert!(pot.tail_spread() < 1e-6);
    }

    #[test]
    fn spline_tail_joint_is_continuous() {
        let pot = default_matrix();
        let r = pot.r_last();
        for f in [
            |p: &ChannelPotentialMatrix, r: f64| p.v_a(r),
            |p: &ChannelPotentialMatrix, r: f64| p.v_b(r),
            |p: &ChannelPotentialMatrix, r: f64| p.a_so(r),
        ] {
            let below = f(&pot, r - 1e-9);
            let above = f(&pot, r + 1e-9);
            assert!(
                (below - above).abs() < 1e-12,
                "jump {:.3e} at the table edge",
                below - above
            );
        }
    }

    #[test]
    fn coupling_is_localized() {
        let pot = default_matrix();
        let range = pot.coupling_range(1e-12);
        assert!(
            range > 9.0 && range < 12.9,
            "coupling range {range} bohr outside the expected window"
        );
        assert!(pot.v_oc(range + 0.1).abs() < 1e-12);
        assert!(pot.v_oc(range - 0.1).abs() > 1e-12);
        assert!(pot.v_oc(13.0).abs() < 1e-12);
    }

    #[test]
    fn diabatic_curves_cross_but_adiabatic_do_not() {
        let pot = default_matrix();
        let adia = adiabatize(&pot);
        // Sign change of V_oo - V_cc somewhere in the coupling region...
        let mut crossings = 0;
        let mut prev = pot.v_oo(6.0) - pot.v_cc(6.0);
        let mut gap_at_crossing = 0.0;
        for i in 1..=1400 {
            let r = 6.0 + 8.0 * i as f64 / 1400.0;
            let d = pot.v_oo(r) - pot.v_cc(r);
            if d.signum() != prev.signum() {
                crossings += 1;
                let (lo, hi) = adia.both_at(r);
                gap_at_crossing = hi - lo;
            }
            prev = d;
        }
        assert!(crossings >= 1, "diabatic curves never cross");
        // ...while the adiabatic gap stays at least 2|V_oc| > 0 everywhere.
        assert!(gap_at_crossing > 1e-4);
        for i in 0..=1000 {
            let r = 4.0 + 16.0 * i as f64 / 1000.0;
            let (lo, hi) = adia.both_at(r);
            assert!(hi >= lo);
        }
    }

    #[test]
    fn rotation_diagonalizes_with_ordered_branches() {
        let pot = default_matrix();
        let adia = adiabatize(&pot);
        for i in 0..=3000 {
            let r = 3.5 + 26.5 * i as f64 / 3000.0;
            let m = adia.m(r);
            let v = pot.evaluate(r);
            let d = m * v * m.transpose();
            let (lo, hi) = adia.both_at(r);
            let scale = v.max_abs().max(1e-10);
            assert!(
                d.0[0][1].abs() <= 1e-12 * scale,
                "off-diagonal {:.3e} at R = {r}",
                d.0[0][1]
            );
            assert_relative_eq!(d.0[0][0], lo, epsilon = 1e-12 * scale.max(1.0));
            assert_relative_eq!(d.0[1][1], hi, epsilon = 1e-12 * scale.max(1.0));
        }
    }

    #[test]
    fn mixing_angle_vanishes_asymptotically_and_is_continuous() {
        let pot = default_matrix();
        let adia = adiabatize(&pot);
        assert!(adia.mixing_angle(25.0).abs() < 1e-9);
        assert!(adia.mixing_angle(60.0).abs() < 1e-12);
        let mut prev = adia.mixing_angle(3.5);
        for i in 1..=5000 {
            let r = 3.5 + 24.0 * i as f64 / 5000.0;
            let phi = adia.mixing_angle(r);
            assert!(
                (phi - prev).abs() < 0.05,
                "mixing angle jumps by {:.3} near R = {r}",
                phi - prev
            );
            prev = phi;
        }
    }

    #[test]
    fn load_curves_round_trips_metadata_and_reports_line_errors() {
        let text = "\
# comment
# reduced_mass_me = 1234.5
# asymptote_hartree = 0.25
3.0 0.30 0.28 1e-3
4.0 0.26 0.25 1e-3
";
        let input = load_curves(text).unwrap();
        assert_eq!(input.r.len(), 2);
        assert_relative_eq!(input.reduced_mass, 1234.5);
        assert_relative_eq!(input.asymptote, 0.25);

        let bad = "3.0 0.1 0.2\n";
        let err = load_curves(bad).unwrap_err().to_string();
        assert!(err.contains("line 1"), "missing line number in: {err}");

        let bad2 = "3.0 0.1 0.2 abc\n";
        let err2 = load_curves(bad2).unwrap_err().to_string();
        assert!(err2.contains("line 1") && err2.contains("abc"));
    }

    #[test]
    fn build_rejects_unsettled_spin_orbit_tail() {
        let mut input = synthetic_model(&SyntheticModelParams::default());
        let n = input.a_so.len();
        input.a_so[n - 2] *= 1.5;
        let err = ChannelPotentialMatrix::build(&input).unwrap_err();
        assert!(matches!(err, Error::Input(_)));
    }

    #[test]
    fn adiabatic_minimum_is_found() {
        let pot = default_matrix();
        let adia = adiabatize(&pot);
        let (r_min, v_min) = adia.minimum(false, 4.0, 20.0);
        // The well bottom sits near the Morse minimum and below both
        // thresholds by roughly the well depth.
        assert!(r_min > 6.0 && r_min < 11.0, "minimum at {r_min}");
        assert!(v_min < pot.e_open() - units::cm_to_hartree(1000.0));
        // Local flatness at the reported minimum.
        let eps = 1e-4;
        assert!(adia.v_lower(r_min - eps) >= v_min - 1e-12);
        assert!(adia.v_lower(r_min + eps) >= v_min - 1e-12);
    }
}
