//! Resonance extraction from complex spectra.
//!
//! A single diagonalization with an absorbing boundary mixes true quasibound
//! levels with discretized-continuum states.  Genuine resonances are told
//! apart by stabilization: their complex eigenvalues persist when the box
//! size and absorber position change, while continuum states drift.  This
//! module implements that matching, plus the Breit-Wigner utilities used to
//! cross-check widths against phase-shift data.

use crate::error::{Error, Result};
use crate::grid::{build_mapped_grid, MappedGridParams};
use crate::mfgh::{assemble, OpticalPotentialParams};
use crate::potential::ChannelPotentialMatrix;

/// Inputs shared by every stabilization variant.
#[derive(Debug, Clone, Copy)]
pub struct StabilizationParams {
    /// Grid recipe; `r_max` is overridden by each variant's box length.
    pub grid: MappedGridParams,
    /// Absorber recipe; `r_start` is overridden by each variant.
    pub optical: OpticalPotentialParams,
    /// Energy window `[lo, hi]` (hartree, absolute) to collect levels from.
    pub window: (f64, f64),
    /// Relative width scatter below which a level counts as converged.
    pub spread_tolerance: f64,
    /// Widths below this value (hartree) are treated as numerically zero.
    pub width_floor: f64,
}

/// One resonance surviving the stabilization match.
#[derive(Debug, Clone)]
pub struct StabilizedResonance {
    /// Position from the reference variant (hartree).
    pub energy: f64,
    /// Mean width over the matched variants (hartree).
    pub gamma: f64,
    /// Relative scatter of the width across variants.
    pub spread: f64,
    /// True when the scatter is within tolerance.
    pub converged: bool,
    /// Open-channel weight in the reference variant.
    pub open_weight: f64,
    /// Width found in each variant, reference first (hartree).
    pub gammas: Vec<f64>,
}

/// Outcome of a stabilization run.
#[derive(Debug, Clone)]
pub struct StabilizationReport {
    /// Matched levels, sorted by energy.
    pub resonances: Vec<StabilizedResonance>,
    /// The `(box_length, absorber_start)` pairs used.
    pub variants: Vec<(f64, f64)>,
    /// Reference levels with no partner in some variant (continuum states).
    pub unmatched: usize,
}

/// Runs the coupled diagonalization for each `(box_length, absorber_start)`
/// variant and matches levels across them.
///
/// The first variant serves as the reference.  A reference level is kept
/// only when every other variant has a level within half the local spacing;
/// the matched widths then decide convergence.
pub fn stabilize(
    pot: &ChannelPotentialMatrix,
    params: &StabilizationParams,
    variants: &[(f64, f64)],
) -> Result<StabilizationReport> {
    if variants.len() < 3 {
        return Err(Error::Input(format!(
            "stabilization needs at least 3 box variants, got {}",
            variants.len()
        )));
    }
    if !(params.window.0 < params.window.1) {
        return Err(Error::Input(format!(
            "empty stabilization window [{}, {}]",
            params.window.0, params.window.1
        )));
    }
    if !(params.spread_tolerance > 0.0) || !(params.width_floor >= 0.0) {
        return Err(Error::Input(
            "spread tolerance must be positive and width floor non-negative".into(),
        ));
    }

    let mut per_variant: Vec<Vec<(f64, f64, f64)>> = Vec::with_capacity(variants.len());
    for &(box_len, absorber_start) in variants {
        let grid_params = MappedGridParams {
            r_max: box_len,
            ..params.grid
        };
        let grid = build_mapped_grid(pot, &grid_params)?;
        let op = OpticalPotentialParams {
            r_start: absorber_start,
            ..params.optical
        };
        let spectrum = assemble(&grid, pot, Some(&op))?.diagonalize()?;
        let mut levels: Vec<(f64, f64, f64)> = spectrum
            .in_window(params.window.0, params.window.1)
            .into_iter()
            .map(|(e, w)| (e.re, (-2.0 * e.im).max(0.0), w))
            .collect();
        levels.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        per_variant.push(levels);
    }

    let (resonances, unmatched) = match_levels(
        &per_variant,
        params.spread_tolerance,
        params.width_floor,
        params.window,
    );
    Ok(StabilizationReport {
        resonances,
        variants: variants.to_vec(),
        unmatched,
    })
}

/// Matches sorted `(energy, width, weight)` level lists across variants.
fn match_levels(
    per_variant: &[Vec<(f64, f64, f64)>],
    spread_tolerance: f64,
    width_floor: f64,
    window: (f64, f64),
) -> (Vec<StabilizedResonance>, usize) {
    let reference = &per_variant[0];
    let mut out = Vec::new();
    let mut unmatched = 0usize;
    for (k, &(e_ref, g_ref, w_ref)) in reference.iter().enumerate() {
        // Half the local spacing bounds how far a stabilized level may move.
        let mut spacing = window.1 - window.0;
        if k > 0 {
            spacing = spacing.min(e_ref - reference[k - 1].0);
        }
        if k + 1 < reference.len() {
            spacing = spacing.min(reference[k + 1].0 - e_ref);
        }
        let guard = 0.5 * spacing;

        let mut gammas = vec![g_ref];
        let mut complete = true;
        for levels in &per_variant[1..] {
            let mut best: Option<(f64, f64, f64)> = None; // (|dE|, |dG|, gamma)
            for &(e, g, _) in levels {
                let de = (e - e_ref).abs();
                if de >= guard {
                    continue;
                }
                let dg = (g - g_ref).abs();
                let better = match best {
                    None => true,
                    Some((bde, bdg, _)) => de < bde - 1e-18 || (de <= bde + 1e-18 && dg < bdg),
                };
                if better {
                    best = Some((de, dg, g));
                }
            }
            match best {
                Some((_, _, g)) => gammas.push(g),
                None => {
                    complete = false;
                    break;
                }
            }
        }
        if !complete {
            unmatched += 1;
            continue;
        }

        let mean = gammas.iter().sum::<f64>() / gammas.len() as f64;
        let max = gammas.iter().cloned().fold(f64::MIN, f64::max);
        let min = gammas.iter().cloned().fold(f64::MAX, f64::min);
        let (spread, converged) = if max < width_floor {
            (0.0, true) // numerically zero width in every variant
        } else if mean > 0.0 {
            let s = (max - min) / mean;
            (s, s <= spread_tolerance)
        } else {
            (f64::INFINITY, false)
        };
        out.push(StabilizedResonance {
            energy: e_ref,
            gamma: mean,
            spread,
            converged,
            open_weight: w_ref,
            gammas,
        });
    }
    (out, unmatched)
}

/// Sum of Lorentzian time delays (inverse hartree) over `energies`.
///
/// Only levels above `e_open` contribute; each adds
/// `(Γ/2) / ((E - E_k)² + (Γ/2)²)`, which peaks at `2/Γ` on resonance.
pub fn time_delay(levels: &[(f64, f64)], e_open: f64, energies: &[f64]) -> Vec<f64> {
    energies
        .iter()
        .map(|&e| {
            levels
                .iter()
                .filter(|&&(ek, gk)| ek > e_open && gk > 0.0)
                .map(|&(ek, gk)| {
                    let hw = 0.5 * gk;
                    hw / ((e - ek).powi(2) + hw * hw)
                })
                .sum()
        })
        .collect()
}

/// Result of a Lorentzian fit to `sin² δ_r` samples.
#[derive(Debug, Clone, Copy)]
pub struct BreitWignerFit {
    /// Fitted resonance position (same unit as the input energies).
    pub e_r: f64,
    /// Fitted full width.
    pub gamma: f64,
    /// Root-mean-square residual of the fit.
    pub residual_rms: f64,
    /// `gamma < 0.2 × spacing` when a level spacing was supplied.
    pub isolated: Option<bool>,
}

/// Fits `samples = (E, sin² δ_r)` to `(Γ/2)² / ((E-E_r)² + (Γ/2)²)`.
///
/// Levenberg-Marquardt in `(E_r, ln Γ)` with analytic derivatives; the
/// log-width parameterization keeps the width positive.  The samples must
/// bracket an interior maximum.
pub fn fit_breit_wigner(samples: &[(f64, f64)], spacing: Option<f64>) -> Result<BreitWignerFit> {
    if samples.len() < 7 {
        return Err(Error::Input(format!(
            "a width fit needs at least 7 samples, got {}",
            samples.len()
        )));
    }
    if samples.iter().any(|(e, y)| !e.is_finite() || !y.is_finite()) {
        return Err(Error::Input("non-finite sample in width fit".into()));
    }
    let mut idx_max = 0;
    for (i, &(_, y)) in samples.iter().enumerate() {
        if y > samples[idx_max].1 {
            idx_max = i;
        }
    }
    if idx_max == 0 || idx_max == samples.len() - 1 {
        return Err(Error::Input(
            "samples do not bracket a resonance maximum".into(),
        ));
    }

    // Initial guesses: peak position, and width from the half-maximum span.
    let e0 = samples[idx_max].0;
    let ymax = samples[idx_max].1;
    let mut left = samples[0].0;
    for i in (0..idx_max).rev() {
        if samples[i].1 < 0.5 * ymax {
            left = samples[i].0;
            break;
        }
    }
    let mut right = samples[samples.len() - 1].0;
    for &(e, y) in &samples[idx_max + 1..] {
        if y < 0.5 * ymax {
            right = e;
            break;
        }
    }
    let mut e_r = e0;
    let mut ln_g = (right - left).max(f64::EPSILON).ln();

    let cost_and_grad = |e_r: f64, ln_g: f64| {
        let g = ln_g.exp();
        let hw = 0.5 * g;
        let c = hw * hw;
        let mut cost = 0.0;
        let mut jtj = [[0.0f64; 2]; 2];
        let mut jtr = [0.0f64; 2];
        for &(e, y) in samples {
            let d = (e - e_r).powi(2) + c;
            let m = c / d;
            let r = m - y;
            let j0 = c * 2.0 * (e - e_r) / (d * d); // d m / d e_r
            let j1 = 2.0 * c * (e - e_r).powi(2) / (d * d); // d m / d ln gamma
            cost += r * r;
            jtj[0][0] += j0 * j0;
            jtj[0][1] += j0 * j1;
            jtj[1][1] += j1 * j1;
            jtr[0] += j0 * r;
            jtr[1] += j1 * r;
        }
        jtj[1][0] = jtj[0][1];
        (cost, jtj, jtr)
    };

    let (mut cost, mut jtj, mut jtr) = cost_and_grad(e_r, ln_g);
    let mut lambda = 1e-3;
    for _ in 0..200 {
        let a00 = jtj[0][0] * (1.0 + lambda);
        let a11 = jtj[1][1] * (1.0 + lambda);
        let a01 = jtj[0][1];
        let det = a00 * a11 - a01 * a01;
        if det.abs() < 1e-300 {
            break;
        }
        let de = -(a11 * jtr[0] - a01 * jtr[1]) / det;
        let dg = -(a00 * jtr[1] - a01 * jtr[0]) / det;
        let (trial_e, trial_g) = (e_r + de, ln_g + dg);
        let (trial_cost, trial_jtj, trial_jtr) = cost_and_grad(trial_e, trial_g);
        if trial_cost < cost {
            let rel_step = de.abs() / e_r.abs().max(1e-30) + dg.abs();
            e_r = trial_e;
            ln_g = trial_g;
            cost = trial_cost;
            jtj = trial_jtj;
            jtr = trial_jtr;
            lambda = (lambda * 0.3).max(1e-12);
            if rel_step < 1e-13 {
                break;
            }
        } else {
            lambda *= 4.0;
            if lambda > 1e12 {
                break;
            }
        }
    }

    let gamma = ln_g.exp();
    if !e_r.is_finite() || !gamma.is_finite() {
        return Err(Error::Convergence("width fit diverged".into()));
    }
    Ok(BreitWignerFit {
        e_r,
        gamma,
        residual_rms: (cost / samples.len() as f64).sqrt(),
        isolated: spacing.map(|d| gamma < 0.2 * d),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};

    fn lorentzian(e: f64, e_r: f64, gamma: f64) -> f64 {
        let hw = 0.5 * gamma;
        hw * hw / ((e - e_r).powi(2) + hw * hw)
    }

    #[test]
    fn exact_lorentzian_is_recovered() {
        let (e_r, gamma) = (12.5, 0.37);
        let samples: Vec<(f64, f64)> = (0..41)
            .map(|i| {
                let e = 11.0 + 0.075 * i as f64;
                (e, lorentzian(e, e_r, gamma))
            })
            .collect();
        let fit = fit_breit_wigner(&samples, Some(10.0)).unwrap();
        assert_relative_eq!(fit.e_r, e_r, max_relative = 1e-10);
        assert_relative_eq!(fit.gamma, gamma, max_relative = 1e-10);
        assert!(fit.residual_rms < 1e-12);
        assert_eq!(fit.isolated, Some(true));
    }

    #[test]
    fn noisy_lorentzian_stays_within_five_percent() {
        let (e_r, gamma) = (-45.0, 0.8);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let samples: Vec<(f64, f64)> = (0..61)
            .map(|i| {
                let e = -48.0 + 0.1 * i as f64;
                let noise = 1.0 + 0.01 * (2.0 * rng.random::<f64>() - 1.0);
                (e, lorentzian(e, e_r, gamma) * noise)
            })
            .collect();
        let fit = fit_breit_wigner(&samples, None).unwrap();
        assert!((fit.e_r - e_r).abs() < 0.05 * gamma);
        assert!((fit.gamma - gamma).abs() / gamma < 0.05);
        assert_eq!(fit.isolated, None);
    }

    #[test]
    fn overlapping_pair_is_flagged_not_isolated() {
        let spacing = 1.0;
        let gamma = 0.6; // wider than 0.2 x spacing
        let samples: Vec<(f64, f64)> = (0..81)
            .map(|i| {
                let e = -0.8 + 0.02 * i as f64;
                let y = lorentzian(e, 0.0, gamma) + lorentzian(e, spacing, gamma);
                (e, y.min(1.0))
            })
            .collect();
        let fit = fit_breit_wigner(&samples, Some(spacing)).unwrap();
        assert_eq!(fit.isolated, Some(false));
    }

    #[test]
    fn monotone_data_is_rejected() {
        let samples: Vec<(f64, f64)> = (0..10).map(|i| (i as f64, 0.1 * i as f64)).collect();
        assert!(fit_breit_wigner(&samples, None).is_err());
        assert!(fit_breit_wigner(&samples[..5], None).is_err());
    }

    #[test]
    fn delay_peaks_at_two_over_gamma() {
        let levels = [(-5.0, 0.2), (10.0, 0.05), (20.0, 0.4)];
        let e_open = 0.0; // the level below threshold must not contribute
        let delays = time_delay(&levels, e_open, &[10.0]);
        assert_relative_eq!(delays[0], 2.0 / 0.05, max_relative = 0.05);
        let far = time_delay(&levels, e_open, &[-5.0]);
        assert!(far[0] < 2.0 / 0.2 * 0.05, "bound level leaked into delay");
    }

    #[test]
    fn matching_keeps_stable_levels_and_drops_drifters() {
        // Three variants: level A stays put with stable width, level B
        // drifts by more than half the local spacing, level C has scattered
        // widths (> 5%).
        let reference = vec![(1.0, 0.010, 0.4), (2.0, 0.020, 0.5), (3.0, 0.030, 0.6)];
        let v2 = vec![(1.001, 0.0101, 0.4), (2.6, 0.020, 0.5), (3.002, 0.0301, 0.6)];
        let v3 = vec![(0.999, 0.0099, 0.4), (1.7, 0.020, 0.5), (2.998, 0.045, 0.6)];
        let (matched, unmatched) =
            match_levels(&[reference, v2, v3], 0.05, 1e-12, (0.0, 4.0));
        assert_eq!(unmatched, 1);
        assert_eq!(matched.len(), 2);
        assert!(matched[0].converged);
        assert_relative_eq!(matched[0].gamma, 0.01, max_relative = 0.01);
        assert!(matched[0].spread <= 0.05);
        assert!(!matched[1].converged);
        assert!(matched[1].spread > 0.05);
    }

    #[test]
    fn tiny_widths_count_as_converged() {
        let reference = vec![(1.0, 1e-15, 0.9)];
        let v2 = vec![(1.0, 5e-15, 0.9)];
        let v3 = vec![(1.0, 0.0, 0.9)];
        let (matched, _) = match_levels(&[reference, v2, v3], 0.05, 1e-12, (0.0, 2.0));
        assert_eq!(matched.len(), 1);
        assert!(matched[0].converged);
        assert_eq!(matched[0].spread, 0.0);
    }

    #[test]
    fn stabilize_rejects_thin_variant_lists() {
        use crate::potential::{synthetic_model, SyntheticModelParams};
        let pot = ChannelPotentialMatrix::build(&synthetic_model(&SyntheticModelParams::default())).unwrap();
        let params = StabilizationParams {
            grid: MappedGridParams::default(),
            optical: OpticalPotentialParams::at_edge_of(120.0),
            window: (0.0, 1e-3),
            spread_tolerance: 0.05,
            width_floor: 4.5e-14,
        };
        assert!(stabilize(&pot, &params, &[(80.0, 40.0), (120.0, 80.0)]).is_err());
    }
}
