//! Generalized multichannel quantum-defect analysis of the two-channel model.
//!
//! All short-range physics is condensed into a 2×2 interaction matrix `Y(E)`
//! measured at a matching radius `R₀` beyond the coupling region, against
//! energy-normalized reference pairs `(f, g)` built in each adiabatic channel
//! ([`crate::milne`]).  `Y` is smooth in energy, so it is computed on a
//! coarse mesh and splined; all sharp energy dependence (bound ladders,
//! resonances, the scattering phase) is carried analytically by the
//! channel phases `ν(E)`, `ξ(E)` of the reference problems.
//!
//! A second, "optimized" representation rotates the reference frame by
//! energy-dependent angles `(θ_o, θ_c)` chosen so the transformed matrix has
//! exactly zero diagonal: resonances then sit at `sin(ν_c + θ_c) = 0` with no
//! level shift, and the resonant phase is a clean Breit-Wigner.

use crate::error::{Error, Result};
use crate::interp::CubicSpline;
use crate::mat2::Mat2;
use crate::milne::{qdt_normalization, ReferenceChannel};
use crate::numerov::{converged_logderivative, extract_y, to_adiabatic, YAtEnergy};
use crate::potential::{adiabatize, ChannelPotentialMatrix};
use crate::units::cm_to_hartree;
use num_complex::Complex64;
use rayon::prelude::*;

/// Root-refinement tolerance on energies, hartree (1e-6 wavenumbers).
const ROOT_TOL: f64 = 4.556335e-12;

/// Knobs of the quantum-defect engine. Defaults match the synthetic model's
/// scales; everything is overridable from the command line.
#[derive(Debug, Clone, Copy)]
pub struct QdtParams {
    /// Matching radius (bohr); must lie beyond the interchannel coupling.
    pub r0: f64,
    /// Inner edge of the reference-channel domain (bohr).
    pub r_wall: f64,
    /// Nominal outer radius for reference-phase saturation (bohr).
    pub r_far: f64,
    /// Coarse mesh spacing for the `Y(E)` spline, wavenumbers.
    pub coarse_step_cm: f64,
    /// Initial Numerov step (bohr).
    pub numerov_h: f64,
    /// Relative stability target for the propagated log-derivative.
    pub numerov_tol: f64,
}

impl Default for QdtParams {
    fn default() -> Self {
        QdtParams {
            r0: 13.0,
            r_wall: 4.0,
            r_far: 60.0,
            coarse_step_cm: 0.5,
            numerov_h: 0.02,
            numerov_tol: 1e-8,
        }
    }
}

type Curve<'a> = Box<dyn Fn(f64) -> f64 + Sync + Send + 'a>;

/// The assembled quantum-defect model: potential + reference channels.
pub struct QdtModel<'a> {
    pot: &'a ChannelPotentialMatrix,
    params: QdtParams,
    open_ref: ReferenceChannel<Curve<'a>>,
    closed_ref: ReferenceChannel<Curve<'a>>,
}

/// Interaction matrix splined over a coarse energy mesh.
pub struct YMesh {
    e_lo: f64,
    e_hi: f64,
    oo: CubicSpline,
    oc: CubicSpline,
    cc: CubicSpline,
    /// Largest `|Y_oc - Y_co|` seen while building the mesh.
    pub asymmetry_max: f64,
    /// Matching radius actually used (after any retry shifts).
    pub r0: f64,
    /// Node energies, hartree.
    pub energies: Vec<f64>,
}

impl YMesh {
    /// Symmetrized interaction matrix at `e` (inside the mesh span).
    pub fn y(&self, e: f64) -> Mat2 {
        let oc = self.oc.eval(e);
        Mat2([[self.oo.eval(e), oc], [oc, self.cc.eval(e)]])
    }

    pub fn covers(&self, e: f64) -> bool {
        e >= self.e_lo && e <= self.e_hi
    }
}

/// Reference-channel phases tabulated on a fine energy mesh.
pub struct PhaseProviders {
    /// Mesh energies, hartree, strictly between the two thresholds.
    pub energies: Vec<f64>,
    /// Accumulated phase of the closed reference channel.
    pub nu_c: Vec<f64>,
    /// Asymptotic phase shift of the open reference channel.
    pub xi_o: Vec<f64>,
}

/// One bound level of the coupled system.
#[derive(Debug, Clone, Copy)]
pub struct BoundLevel {
    /// Energy, hartree (absolute).
    pub energy: f64,
    /// Fraction of the state living in the open channel.
    pub weight_open: f64,
    pub nu_open: f64,
    pub nu_closed: f64,
}

/// One quasibound level (resonance) seen from the quantum-defect side.
#[derive(Debug, Clone, Copy)]
pub struct QdtResonance {
    /// Zeroth-order position (closed-channel level), hartree.
    pub e0: f64,
    /// Full position including the open-channel shift, hartree.
    pub e_r: f64,
    /// `e_r - e0`.
    pub shift: f64,
    /// Full width at half maximum, hartree.
    pub gamma: f64,
    /// Whether the level is narrow compared to the local spacing and the
    /// position root was cleanly bracketed.
    pub isolated: bool,
    /// Closed-channel normalization at `e0` and at `e_r`.
    pub n2_at_e0: f64,
    pub n2_at_er: f64,
}

/// Energy-dependent frame rotation diagnostics over a fine mesh.
pub struct RotationScan {
    pub energies: Vec<f64>,
    /// Closed-channel rotation angle, unwrapped along the mesh.
    pub theta_c: Vec<f64>,
    /// Open-channel rotation angle, unwrapped along the mesh.
    pub theta_o: Vec<f64>,
    /// Off-diagonal element of the rotated interaction matrix.
    pub y_opt_oc: Vec<f64>,
    /// Worst residual diagonal elements across the mesh.
    pub max_y_opt_oo: f64,
    pub max_y_opt_cc: f64,
    /// Worst residual real part of the rotated closed-channel K matrix.
    pub max_re_k_cc: f64,
}

/// One point of the scattering-phase scan.
pub struct PhaseScan {
    pub energies: Vec<f64>,
    /// Full scattering phase `δ_S = ξ_o + atan(K_oo)`, unwrapped.
    pub delta_s: Vec<f64>,
    pub sin2_delta_s: Vec<f64>,
    /// Resonant part after removing the background `atan(Y_oo)`.
    pub sin2_delta_r: Vec<f64>,
    pub delta_bg: Vec<f64>,
}

fn validate_window(lo: f64, hi: f64, what: &str) -> Result<()> {
    if !lo.is_finite() || !hi.is_finite() || lo >= hi {
        return Err(Error::Input(format!(
            "{what} window [{lo}, {hi}] is empty or not finite"
        )));
    }
    Ok(())
}

impl<'a> QdtModel<'a> {
    /// Builds the reference channels on the adiabatic curves of `pot`.
    pub fn new(pot: &'a ChannelPotentialMatrix, params: QdtParams) -> Result<Self> {
        if !(params.r0 > params.r_wall + 1.0) {
            return Err(Error::Input(format!(
                "matching radius {} must sit well outside the reference wall {}",
                params.r0, params.r_wall
            )));
        }
        if params.r0 > pot.r_last() {
            return Err(Error::Input(format!(
                "matching radius {} beyond the tabulated potential (ends at {})",
                params.r0,
                pot.r_last()
            )));
        }
        // The quantum-defect split assumes the channels are decoupled at and
        // beyond the matching radius.
        let v0 = pot.evaluate(params.r0);
        let gap = (v0.0[1][1] - v0.0[0][0]).abs();
        if v0.0[0][1].abs() > 1e-8 * gap {
            return Err(Error::Input(format!(
                "channels still coupled at R0 = {}: |V_oc| = {:.3e} vs gap {:.3e}; \
                 move the matching radius outward (coupling dies near R = {:.1})",
                params.r0,
                v0.0[0][1].abs(),
                gap,
                pot.coupling_range(1e-12)
            )));
        }
        let adia = adiabatize(pot);
        let open_curve: Curve<'a> = Box::new(move |r: f64| adia.v_lower(r));
        let closed_curve: Curve<'a> = Box::new(move |r: f64| adia.v_upper(r));
        let open_ref = ReferenceChannel::new(
            open_curve,
            pot.e_open(),
            pot.c3_open(),
            pot.reduced_mass(),
            params.r_wall,
            params.r_far,
        )?;
        let closed_ref = ReferenceChannel::new(
            closed_curve,
            pot.e_closed(),
            pot.c3_closed(),
            pot.reduced_mass(),
            params.r_wall,
            params.r_far,
        )?;
        Ok(QdtModel {
            pot,
            params,
            open_ref,
            closed_ref,
        })
    }

    pub fn pot(&self) -> &ChannelPotentialMatrix {
        self.pot
    }

    pub fn params(&self) -> &QdtParams {
        &self.params
    }

    pub fn open_ref(&self) -> &ReferenceChannel<Curve<'a>> {
        &self.open_ref
    }

    pub fn closed_ref(&self) -> &ReferenceChannel<Curve<'a>> {
        &self.closed_ref
    }

    /// Interaction matrix at one energy and an explicit matching radius.
    pub fn y_at(&self, e: f64, r0: f64) -> Result<YAtEnergy> {
        let v = |r: f64| self.pot.evaluate(r);
        let mu = self.pot.reduced_mass();
        let ld = converged_logderivative(
            &v,
            e,
            mu,
            r0,
            self.params.numerov_h,
            self.params.numerov_tol,
        )?;
        let mixing = adiabatize(self.pot).m(r0);
        let l_adia = to_adiabatic(ld.l, mixing);
        let fo = self.open_ref.fg_at(e, r0)?;
        let fc = self.closed_ref.fg_at(e, r0)?;
        extract_y(l_adia, &fo, &fc, r0)
    }

    /// Interaction matrix at the configured matching radius, with automatic
    /// outward shifts when the matching point is unusable: either the
    /// projection is accidentally singular (node of the propagated solution
    /// or of `g` at `r0`), or the log-derivative sits so close to a pole
    /// that its step refinement cannot stabilize.  `Y` itself does not
    /// depend on the matching radius, so re-matching slightly further out
    /// is exact.
    pub fn y_direct(&self, e: f64) -> Result<YAtEnergy> {
        let mut r0 = self.params.r0;
        let mut last = None;
        for _ in 0..5 {
            match self.y_at(e, r0) {
                Ok(y) => return Ok(y),
                Err(err @ (Error::Domain(_) | Error::Convergence(_))) => {
                    last = Some(err);
                    r0 += 0.2;
                }
                Err(other) => return Err(other),
            }
        }
        Err(last.unwrap_or_else(|| {
            Error::Domain(format!("interaction matrix undefined at E = {e}"))
        }))
    }

    /// Coarse `Y(E)` mesh over `[e_lo, e_hi]` (hartree), splined.
    ///
    /// The mesh is extended by two nodes on each side so the spline is
    /// interpolatory (not extrapolatory) over the requested window.
    pub fn y_mesh(&self, e_lo: f64, e_hi: f64) -> Result<YMesh> {
        validate_window(e_lo, e_hi, "interaction-mesh")?;
        let step = cm_to_hartree(self.params.coarse_step_cm);
        if !(step > 0.0) {
            return Err(Error::Input("coarse step must be positive".into()));
        }
        let n = (((e_hi - e_lo) / step).ceil() as usize).max(4) + 5;
        let start = e_lo - 2.0 * step;
        let energies: Vec<f64> = (0..n).map(|i| start + step * i as f64).collect();
        let ys: Vec<YAtEnergy> = energies
            .par_iter()
            .map(|&e| self.y_direct(e))
            .collect::<Result<_>>()?;
        let asymmetry_max = ys.iter().fold(0.0f64, |m, y| m.max(y.asymmetry));
        let col = |f: &dyn Fn(&YAtEnergy) -> f64| -> Vec<f64> { ys.iter().map(f).collect() };
        let oo = CubicSpline::natural(&energies, &col(&|y| y.y.0[0][0]))?;
        let oc = CubicSpline::natural(&energies, &col(&|y| 0.5 * (y.y.0[0][1] + y.y.0[1][0])))?;
        let cc = CubicSpline::natural(&energies, &col(&|y| y.y.0[1][1]))?;
        Ok(YMesh {
            e_lo: energies[0],
            e_hi: energies[n - 1],
            oo,
            oc,
            cc,
            asymmetry_max,
            r0: self.params.r0,
            energies,
        })
    }

    /// Tabulates `ν_c(E)` and `ξ_o(E)` on a uniform fine mesh strictly inside
    /// the two thresholds. `step` in hartree.
    ///
    /// All resonance structure lives in the closed-channel phase, so `ν_c`
    /// is integrated at every fine node, while the open-channel background
    /// shift — as smooth in energy as the interaction matrix itself — is
    /// integrated on the coarse mesh and splined onto the fine one.
    pub fn phase_providers(&self, e_lo: f64, e_hi: f64, step: f64) -> Result<PhaseProviders> {
        validate_window(e_lo, e_hi, "phase-provider")?;
        if !(step > 0.0) {
            return Err(Error::Input("phase mesh step must be positive".into()));
        }
        if e_lo <= self.pot.e_open() || e_hi >= self.pot.e_closed() {
            return Err(Error::Input(format!(
                "phase mesh [{e_lo}, {e_hi}] must lie strictly between the thresholds \
                 [{}, {}]",
                self.pot.e_open(),
                self.pot.e_closed()
            )));
        }
        let n = ((e_hi - e_lo) / step).round() as usize + 1;
        let energies: Vec<f64> = (0..n).map(|i| e_lo + step * i as f64).collect();
        let nu_c: Vec<f64> = energies
            .par_iter()
            .map(|&e| self.closed_ref.accumulated_phase(e))
            .collect::<Result<_>>()?;
        let xi_spline = self.background_shift_spline(e_lo, e_hi, step)?;
        let xi_o = energies.iter().map(|&e| xi_spline.eval(e)).collect();
        Ok(PhaseProviders {
            energies,
            nu_c,
            xi_o,
        })
    }

    fn background_shift_spline(&self, e_lo: f64, e_hi: f64, step: f64) -> Result<CubicSpline> {
        let coarse = cm_to_hartree(self.params.coarse_step_cm).max(step);
        // Two margin nodes on each side keep the spline interpolatory over
        // the window, but the lower margin must stay above the threshold.
        let start = (e_lo - 2.0 * coarse).max(0.5 * (self.pot.e_open() + e_lo));
        let m = (((e_hi + 2.0 * coarse - start) / coarse).ceil() as usize).max(4) + 1;
        let nodes: Vec<f64> = (0..m).map(|i| start + coarse * i as f64).collect();
        let shifts: Vec<f64> = nodes
            .par_iter()
            .map(|&e| self.open_ref.asymptotic_shift(e))
            .collect::<Result<_>>()?;
        CubicSpline::natural(&nodes, &shifts)
    }

    /// Physical open-channel K matrix element: the closed channel is
    /// eliminated at its accumulated phase.
    pub fn k_oo(nu_c: f64, y: Mat2) -> f64 {
        let (s, c) = nu_c.sin_cos();
        y.0[0][0] - y.0[0][1] * y.0[1][0] * c / (s + y.0[1][1] * c)
    }

    /// Single-channel scattering matrix `S = e^{iξ}(1+iK)(1-iK)⁻¹e^{iξ}`.
    pub fn s_matrix(xi_o: f64, k_oo: f64) -> Complex64 {
        let phase = Complex64::new(0.0, xi_o).exp();
        let num = Complex64::new(1.0, k_oo);
        let den = Complex64::new(1.0, -k_oo);
        phase * (num / den) * phase
    }

    /// Closed-channel K matrix with the open channel eliminated on shell;
    /// complex because the open channel carries flux away.
    pub fn k_cc(y: Mat2) -> Complex64 {
        let d = 1.0 + y.0[0][0] * y.0[0][0];
        let re = y.0[1][1] - y.0[1][0] * y.0[0][0] * y.0[0][1] / d;
        let im = y.0[1][0] * y.0[0][1] / d;
        Complex64::new(re, im)
    }

    /// Bound states in `[e_lo, e_hi]` (hartree), which must lie below the
    /// open threshold.  Roots of
    /// `(sin ν_o + Y_oo cos ν_o)(sin ν_c + Y_cc cos ν_c) = Y_oc Y_co cos ν_o cos ν_c`.
    ///
    /// A window that ends below both reference wells provably contains no
    /// levels (the lower adiabatic minimum bounds the spectrum from below)
    /// and comes back empty.  A window that overlaps the region between the
    /// two well floors is rejected: one reference channel has no classically
    /// allowed motion there, so its phase is undefined.
    pub fn bound_states(&self, e_lo: f64, e_hi: f64) -> Result<Vec<BoundLevel>> {
        validate_window(e_lo, e_hi, "bound-state")?;
        if e_hi >= self.pot.e_open() {
            return Err(Error::Input(format!(
                "bound-state window must end below the open threshold {}",
                self.pot.e_open()
            )));
        }
        let floor_o = self.open_ref.minimum().1;
        let floor_c = self.closed_ref.minimum().1;
        if e_hi <= floor_o.min(floor_c) {
            return Ok(Vec::new());
        }
        if e_lo <= floor_o.max(floor_c) {
            return Err(Error::Input(format!(
                "bound-state window starts below the reference wells ({floor_o:.6e}, \
                 {floor_c:.6e})"
            )));
        }
        let ymesh = self.y_mesh(e_lo, e_hi)?;

        let det = |e: f64| -> Result<f64> {
            let nu_o = self.open_ref.accumulated_phase(e)?;
            let nu_c = self.closed_ref.accumulated_phase(e)?;
            Ok(Self::bound_det(nu_o, nu_c, ymesh.y(e)))
        };

        // Adaptive scan: step under half the local level spacing estimated
        // from the combined phase slope.
        let mut nodes: Vec<(f64, f64, f64, f64)> = Vec::new(); // (E, G, nu_o, nu_c)
        let mut e = e_lo;
        let mut slope = {
            let h = ROOT_TOL.max((e_hi - e_lo) * 1e-7);
            let a = self.open_ref.accumulated_phase(e)?
                + self.closed_ref.accumulated_phase(e)?;
            let b = self.open_ref.accumulated_phase(e + h)?
                + self.closed_ref.accumulated_phase(e + h)?;
            (b - a) / h
        };
        let cap = cm_to_hartree(0.25);
        let floor_step = cm_to_hartree(2e-3);
        while e <= e_hi {
            let nu_o = self.open_ref.accumulated_phase(e)?;
            let nu_c = self.closed_ref.accumulated_phase(e)?;
            nodes.push((e, Self::bound_det(nu_o, nu_c, ymesh.y(e)), nu_o, nu_c));
            if nodes.len() >= 2 {
                let (pe, _, po, pc) = nodes[nodes.len() - 2];
                slope = ((nu_o + nu_c) - (po + pc)) / (e - pe);
            }
            let step = (0.4 * std::f64::consts::PI / slope.abs().max(1e-12))
                .clamp(floor_step, cap);
            if e >= e_hi {
                break;
            }
            e = (e + step).min(e_hi);
        }

        let mut levels = Vec::new();
        for pair in nodes.windows(2) {
            let (ea, ga, ..) = pair[0];
            let (eb, gb, ..) = pair[1];
            if ga == 0.0 {
                continue; // exactly on a root: the refined bracket will catch it
            }
            if ga.signum() == gb.signum() {
                continue;
            }
            // Make sure the bracket holds exactly one crossing.
            let mut brackets = vec![(ea, ga, eb, gb)];
            for _ in 0..2 {
                let mut refined = Vec::new();
                let mut multiple = false;
                for &(xa, fa, xb, fb) in &brackets {
                    let mut sub = Vec::new();
                    let mut prev = (xa, fa);
                    let mut changes = 0;
                    for k in 1..=8 {
                        let x = xa + (xb - xa) * k as f64 / 8.0;
                        let f = if k == 8 { fb } else { det(x)? };
                        if prev.1.signum() != f.signum() {
                            changes += 1;
                            sub.push((prev.0, prev.1, x, f));
                        }
                        prev = (x, f);
                    }
                    if changes > 1 {
                        multiple = true;
                    }
                    refined.extend(sub);
                }
                brackets = refined;
                if !multiple {
                    break;
                }
            }
            for (mut xa, mut fa, mut xb, _fb) in brackets {
                while xb - xa > ROOT_TOL {
                    let xm = 0.5 * (xa + xb);
                    let fm = det(xm)?;
                    if fm == 0.0 {
                        xa = xm;
                        xb = xm;
                        break;
                    }
                    if fm.signum() == fa.signum() {
                        xa = xm;
                        fa = fm;
                    } else {
                        xb = xm;
                    }
                }
                let e_root = 0.5 * (xa + xb);
                // Poles of Y elements also flip the sign of the determinant
                // expression; a true root must leave it small.
                let resid = det(e_root)?;
                let y = ymesh.y(e_root);
                let scale = 1.0 + y.max_abs().powi(2);
                if resid.abs() > 1e-4 * scale {
                    continue;
                }
                levels.push(self.finish_bound_level(e_root, &ymesh)?);
            }
        }
        Ok(levels)
    }

    fn bound_det(nu_o: f64, nu_c: f64, y: Mat2) -> f64 {
        let (so, co) = nu_o.sin_cos();
        let (sc, cc) = nu_c.sin_cos();
        (so + y.0[0][0] * co) * (sc + y.0[1][1] * cc) - y.0[0][1] * y.0[1][0] * co * cc
    }

    fn finish_bound_level(&self, e: f64, ymesh: &YMesh) -> Result<BoundLevel> {
        let h = cm_to_hartree(1e-3);
        let nu_o = self.open_ref.accumulated_phase(e)?;
        let nu_c = self.closed_ref.accumulated_phase(e)?;
        let nu_o_p = (self.open_ref.accumulated_phase(e + h)?
            - self.open_ref.accumulated_phase(e - h)?)
            / (2.0 * h);
        let nu_c_p = (self.closed_ref.accumulated_phase(e + h)?
            - self.closed_ref.accumulated_phase(e - h)?)
            / (2.0 * h);
        let y = ymesh.y(e);
        let (so, co) = nu_o.sin_cos();
        let (sc, cc) = nu_c.sin_cos();
        let m = [
            [so + y.0[0][0] * co, y.0[0][1] * cc],
            [y.0[1][0] * co, sc + y.0[1][1] * cc],
        ];
        // Null vector of the cosine-regularized matrix, from its larger row.
        let r0n = m[0][0].hypot(m[0][1]);
        let r1n = m[1][0].hypot(m[1][1]);
        let (a_o, a_c) = if r0n >= r1n {
            (m[0][1], -m[0][0])
        } else {
            (m[1][1], -m[1][0])
        };
        let wo = a_o * a_o * nu_o_p;
        let wc = a_c * a_c * nu_c_p;
        Ok(BoundLevel {
            energy: e,
            weight_open: wo / (wo + wc),
            nu_open: nu_o,
            nu_closed: nu_c,
        })
    }

    /// Scattering-phase scan over the provider mesh.  With `rotation`
    /// supplied, all quantities are computed in the optimized representation
    /// (the full phase is representation-invariant; the background/resonant
    /// split is not).
    pub fn phase_scan(
        &self,
        providers: &PhaseProviders,
        ymesh: &YMesh,
        rotation: Option<&RotationScan>,
    ) -> Result<PhaseScan> {
        let n = providers.energies.len();
        if let Some(rot) = rotation {
            if rot.energies.len() != n {
                return Err(Error::Input(
                    "rotation scan and phase providers use different meshes".into(),
                ));
            }
        }
        let mut delta_s = Vec::with_capacity(n);
        let mut sin2_s = Vec::with_capacity(n);
        let mut sin2_r = Vec::with_capacity(n);
        let mut delta_bg = Vec::with_capacity(n);
        let mut prev_dk: Option<f64> = None;
        for i in 0..n {
            let e = providers.energies[i];
            if !ymesh.covers(e) {
                return Err(Error::Input(format!(
                    "phase point {e} outside the interaction mesh"
                )));
            }
            let y = ymesh.y(e);
            let (nu, xi, k, bg) = match rotation {
                None => {
                    let k = Self::k_oo(providers.nu_c[i], y);
                    (
                        providers.nu_c[i],
                        providers.xi_o[i],
                        k,
                        y.0[0][0].atan(),
                    )
                }
                Some(rot) => {
                    let y_opt = rotate_y(y, rot.theta_o[i], rot.theta_c[i]);
                    let nu = providers.nu_c[i] + rot.theta_c[i];
                    let k = Self::k_oo(nu, y_opt);
                    (
                        nu,
                        providers.xi_o[i] + rot.theta_o[i],
                        k,
                        y_opt.0[0][0].atan(),
                    )
                }
            };
            let _ = nu;
            let mut dk = k.atan();
            if let Some(p) = prev_dk {
                let shift = ((p - dk) / std::f64::consts::PI).round();
                dk += shift * std::f64::consts::PI;
            }
            prev_dk = Some(dk);
            let ds = xi + dk;
            delta_s.push(ds);
            sin2_s.push(ds.sin().powi(2));
            sin2_r.push((dk - bg).sin().powi(2));
            delta_bg.push(bg);
        }
        Ok(PhaseScan {
            energies: providers.energies.clone(),
            delta_s,
            sin2_delta_s: sin2_s,
            sin2_delta_r: sin2_r,
            delta_bg,
        })
    }

    /// Resonances in the plain (adiabatic-reference) representation.
    ///
    /// For each closed-channel level `E₀` (root of `tan ν_c + Y_cc = 0`) the
    /// full position is re-solved with the open channel folded in; if that
    /// root escapes its bracket the level is flagged as overlapping and the
    /// perturbative position `E₀ + Δ` is reported instead.
    pub fn resonances(
        &self,
        providers: &PhaseProviders,
        ymesh: &YMesh,
    ) -> Result<Vec<QdtResonance>> {
        let e0_list = self.closed_level_roots(providers, ymesh, |y| y.0[1][1])?;
        if e0_list.is_empty() {
            return Ok(Vec::new());
        }
        let full = |y: Mat2| {
            y.0[1][1] - y.0[1][0] * y.0[0][0] * y.0[0][1] / (1.0 + y.0[0][0] * y.0[0][0])
        };
        let nu_samples: Vec<(f64, f64)> = providers
            .energies
            .iter()
            .copied()
            .zip(providers.nu_c.iter().copied())
            .collect();
        let mut out = Vec::new();
        for (idx, &e0) in e0_list.iter().enumerate() {
            let gap_left = if idx > 0 {
                e0 - e0_list[idx - 1]
            } else {
                f64::INFINITY
            };
            let gap_right = if idx + 1 < e0_list.len() {
                e0_list[idx + 1] - e0
            } else {
                f64::INFINITY
            };
            let y0 = ymesh.y(e0);
            let n2_e0 = qdt_normalization(&nu_samples, e0)?;
            let d = 1.0 + y0.0[0][0] * y0.0[0][0];
            let delta = y0.0[1][0] * y0.0[0][0] * y0.0[0][1] / (d * n2_e0);

            let span_l = (0.45 * gap_left).min(cm_to_hartree(2.0));
            let span_r = (0.45 * gap_right).min(cm_to_hartree(2.0));
            let lo = (e0 - span_l).max(providers.energies[0]);
            let hi = (e0 + span_r).min(*providers.energies.last().unwrap());
            let root = self.refine_phase_root(lo, hi, ymesh, &full)?;
            let (e_r, isolated_bracket) = match root {
                Some(r) => (r, true),
                None => (e0 + delta, false),
            };
            let n2_er = qdt_normalization(&nu_samples, e_r).unwrap_or(n2_e0);
            let y_r = ymesh.y(e_r);
            let dr = 1.0 + y_r.0[0][0] * y_r.0[0][0];
            let gamma = 2.0 * y_r.0[1][0] * y_r.0[0][1] / (dr * n2_er);
            out.push(QdtResonance {
                e0,
                e_r,
                shift: e_r - e0,
                gamma,
                isolated: isolated_bracket,
                n2_at_e0: n2_e0,
                n2_at_er: n2_er,
            });
        }
        mark_isolation(&mut out);
        Ok(out)
    }

    /// Frame-rotation angles over the provider mesh, chosen to null the
    /// diagonal of the interaction matrix.
    pub fn optimize_rotation(
        &self,
        providers: &PhaseProviders,
        ymesh: &YMesh,
    ) -> Result<RotationScan> {
        let n = providers.energies.len();
        let mut theta_c: Vec<f64> = Vec::with_capacity(n);
        let mut theta_o: Vec<f64> = Vec::with_capacity(n);
        let mut y_opt_oc: Vec<f64> = Vec::with_capacity(n);
        let mut max_oo = 0.0f64;
        let mut max_cc = 0.0f64;
        let mut max_re = 0.0f64;
        for i in 0..n {
            let e = providers.energies[i];
            if !ymesh.covers(e) {
                return Err(Error::Input(format!(
                    "rotation point {e} outside the interaction mesh"
                )));
            }
            let y = ymesh.y(e);
            let kcc = Self::k_cc(y);
            // Angle that removes the real part of the closed-channel K
            // matrix; branch chosen by continuity along the mesh.
            let mut tc = 0.5
                * (2.0 * kcc.re).atan2(1.0 - kcc.im * kcc.im - kcc.re * kcc.re);
            if let Some(&prev) = theta_c.last() {
                let q = std::f64::consts::FRAC_PI_2;
                tc += ((prev - tc) / q).round() * q;
            }
            // Open-channel angle from the half-rotated matrix.
            let y_half = rotate_y(y, 0.0, tc);
            let mut to = y_half.0[0][0].atan();
            if let Some(&prev) = theta_o.last() {
                let q = std::f64::consts::PI;
                to += ((prev - to) / q).round() * q;
            }
            let y_opt = rotate_y(y, to, tc);
            max_oo = max_oo.max(y_opt.0[0][0].abs());
            max_cc = max_cc.max(y_opt.0[1][1].abs());
            let k_rot = Self::k_cc(y_opt);
            max_re = max_re.max(k_rot.re.abs());
            theta_c.push(tc);
            theta_o.push(to);
            y_opt_oc.push(y_opt.0[0][1]);
        }
        Ok(RotationScan {
            energies: providers.energies.clone(),
            theta_c,
            theta_o,
            y_opt_oc,
            max_y_opt_oo: max_oo,
            max_y_opt_cc: max_cc,
            max_re_k_cc: max_re,
        })
    }

    /// Resonances in the optimized representation: positions solve
    /// `sin(ν_c + θ_c) = 0` exactly (no shift), widths come from the rotated
    /// off-diagonal element and the renormalized level density.
    pub fn resonances_optimized(
        &self,
        providers: &PhaseProviders,
        ymesh: &YMesh,
        rotation: &RotationScan,
    ) -> Result<Vec<QdtResonance>> {
        let n = providers.energies.len();
        if rotation.energies.len() != n {
            return Err(Error::Input(
                "rotation scan and phase providers use different meshes".into(),
            ));
        }
        let combined: Vec<(f64, f64)> = (0..n)
            .map(|i| (providers.energies[i], providers.nu_c[i] + rotation.theta_c[i]))
            .collect();
        let mut out = Vec::new();
        for i in 0..n - 1 {
            let (ea, wa) = combined[i];
            let (eb, wb) = combined[i + 1];
            let m_lo = (wa / std::f64::consts::PI).ceil() as i64;
            let m_hi = (wb / std::f64::consts::PI).floor() as i64;
            for m in m_lo..=m_hi {
                let target = m as f64 * std::f64::consts::PI;
                if !(wa <= target && target <= wb) && !(wb <= target && target <= wa) {
                    continue;
                }
                // Bisection on the continuous combined phase.
                let theta_at = |e: f64, lo_ref: f64| -> f64 {
                    let y = ymesh.y(e);
                    let kcc = Self::k_cc(y);
                    let mut tc = 0.5
                        * (2.0 * kcc.re)
                            .atan2(1.0 - kcc.im * kcc.im - kcc.re * kcc.re);
                    let q = std::f64::consts::FRAC_PI_2;
                    tc += ((lo_ref - tc) / q).round() * q;
                    tc
                };
                let mut xa = ea;
                let mut xb = eb;
                let mut fa = wa - target;
                while xb - xa > ROOT_TOL {
                    let xm = 0.5 * (xa + xb);
                    let tc_ref = rotation.theta_c[i]
                        + (rotation.theta_c[i + 1] - rotation.theta_c[i]) * (xm - ea)
                            / (eb - ea);
                    let w = self.closed_ref.accumulated_phase(xm)?
                        + theta_at(xm, tc_ref);
                    let fm = w - target;
                    if fm == 0.0 {
                        xa = xm;
                        xb = xm;
                        break;
                    }
                    if fm.signum() == fa.signum() {
                        xa = xm;
                        fa = fm;
                    } else {
                        xb = xm;
                    }
                }
                let e_r = 0.5 * (xa + xb);
                let n2 = qdt_normalization(&combined, e_r)?;
                // Rotated off-diagonal at the root.
                let tc_ref = rotation.theta_c[i]
                    + (rotation.theta_c[i + 1] - rotation.theta_c[i]) * (e_r - ea)
                        / (eb - ea);
                let y = ymesh.y(e_r);
                let tc = theta_at(e_r, tc_ref);
                let y_half = rotate_y(y, 0.0, tc);
                let to = y_half.0[0][0].atan();
                let y_opt = rotate_y(y, to, tc);
                let gamma = 2.0 * y_opt.0[0][1] * y_opt.0[0][1] / n2;
                out.push(QdtResonance {
                    e0: e_r,
                    e_r,
                    shift: 0.0,
                    gamma,
                    isolated: true,
                    n2_at_e0: n2,
                    n2_at_er: n2,
                });
            }
        }
        mark_isolation(&mut out);
        Ok(out)
    }

    /// Roots of `tan ν_c + q(Y) = 0` over the provider mesh, for a scalar
    /// functional `q` of the interaction matrix.
    fn closed_level_roots(
        &self,
        providers: &PhaseProviders,
        ymesh: &YMesh,
        q: impl Fn(Mat2) -> f64,
    ) -> Result<Vec<f64>> {
        let n = providers.energies.len();
        let w_at = |e: f64, nu: f64| nu + q(ymesh.y(e)).atan();
        let mesh_w: Vec<f64> = (0..n)
            .map(|i| w_at(providers.energies[i], providers.nu_c[i]))
            .collect();
        let mut roots = Vec::new();
        for i in 0..n - 1 {
            let (ea, eb) = (providers.energies[i], providers.energies[i + 1]);
            let (wa, wb) = (mesh_w[i], mesh_w[i + 1]);
            let m_lo = (wa.min(wb) / std::f64::consts::PI).ceil() as i64;
            let m_hi = (wa.max(wb) / std::f64::consts::PI).floor() as i64;
            for m in m_lo..=m_hi {
                let target = m as f64 * std::f64::consts::PI;
                let mut xa = ea;
                let mut xb = eb;
                let mut fa = wa - target;
                while xb - xa > ROOT_TOL {
                    let xm = 0.5 * (xa + xb);
                    let fm = w_at(xm, self.closed_ref.accumulated_phase(xm)?) - target;
                    if fm == 0.0 {
                        xa = xm;
                        xb = xm;
                        break;
                    }
                    if fm.signum() == fa.signum() {
                        xa = xm;
                        fa = fm;
                    } else {
                        xb = xm;
                    }
                }
                let e_root = 0.5 * (xa + xb);
                // Reject pole crossings of q(Y): a true root has a small
                // regularized residual.
                let nu = self.closed_ref.accumulated_phase(e_root)?;
                let qv = q(ymesh.y(e_root));
                let resid = (nu.sin() + qv * nu.cos()).abs() / (1.0 + qv * qv).sqrt();
                if resid < 1e-5 {
                    roots.push(e_root);
                }
            }
        }
        Ok(roots)
    }

    /// Bisection for `tan ν_c + q(Y) = 0` inside `[lo, hi]`; `None` when the
    /// bracket holds no sign change (overlapping-resonance escape).
    fn refine_phase_root(
        &self,
        lo: f64,
        hi: f64,
        ymesh: &YMesh,
        q: impl Fn(Mat2) -> f64,
    ) -> Result<Option<f64>> {
        let w = |e: f64| -> Result<f64> {
            let nu = self.closed_ref.accumulated_phase(e)?;
            Ok(nu + q(ymesh.y(e)).atan())
        };
        let wa = w(lo)?;
        let wb = w(hi)?;
        let m = (wa / std::f64::consts::PI).round();
        let target = m * std::f64::consts::PI;
        if !((wa - target) * (wb - target) < 0.0) {
            // Try the neighbouring multiple in case the bracket sits left of
            // the crossing.
            let m2 = (wb / std::f64::consts::PI).round();
            if m2 == m {
                return Ok(None);
            }
        }
        let mut xa = lo;
        let mut xb = hi;
        let mut fa = wa - target;
        let fb = wb - target;
        if fa * fb > 0.0 {
            return Ok(None);
        }
        while xb - xa > ROOT_TOL {
            let xm = 0.5 * (xa + xb);
            let fm = w(xm)? - target;
            if fm == 0.0 {
                xa = xm;
                xb = xm;
                break;
            }
            if fm.signum() == fa.signum() {
                xa = xm;
                fa = fm;
            } else {
                xb = xm;
            }
        }
        let e_root = 0.5 * (xa + xb);
        let nu = self.closed_ref.accumulated_phase(e_root)?;
        let qv = q(ymesh.y(e_root));
        let resid = (nu.sin() + qv * nu.cos()).abs() / (1.0 + qv * qv).sqrt();
        if resid < 1e-5 {
            Ok(Some(e_root))
        } else {
            Ok(None)
        }
    }
}

/// Frame rotation of the interaction matrix by channel angles
/// `(θ_o, θ_c)`: with `C = diag(cos)`, `S = diag(sin)`,
/// `Y' = (C·Y - S)(S·Y + C)⁻¹`.  This is the transform induced on `Y` by
/// rotating each reference pair `(f, g)` in its own channel, and it preserves
/// the symmetry of `Y`.
pub fn rotate_y(y: Mat2, theta_o: f64, theta_c: f64) -> Mat2 {
    let c = Mat2::diag(theta_o.cos(), theta_c.cos());
    let s = Mat2::diag(theta_o.sin(), theta_c.sin());
    let num = c * y - s;
    let den = s * y + c;
    match den.inverse() {
        Ok(inv) => num * inv,
        // A singular denominator means the rotated g-function vanishes
        // identically at the matching point; nudge the angle by a hair.
        Err(_) => {
            let eps = 1e-9;
            rotate_y(y, theta_o + eps, theta_c + eps)
        }
    }
}

/// Flags each resonance as isolated when its width stays under a fifth of
/// the distance to the nearest neighbour (overlap-escaped levels stay
/// non-isolated regardless).
fn mark_isolation(list: &mut [QdtResonance]) {
    if list.len() < 2 {
        return;
    }
    let positions: Vec<f64> = list.iter().map(|r| r.e_r).collect();
    for (i, r) in list.iter_mut().enumerate() {
        let left = if i > 0 {
            positions[i] - positions[i - 1]
        } else {
            f64::INFINITY
        };
        let right = if i + 1 < positions.len() {
            positions[i + 1] - positions[i]
        } else {
            f64::INFINITY
        };
        let spacing = left.min(right);
        r.isolated = r.isolated && r.gamma < 0.2 * spacing;
    }
}
