//! The four workbench commands: bound, resonances, phase, compare.
//!
//! Each command builds the potential once, runs the selected engine(s), and
//! emits deterministic CSVs (plus a text report for `compare`).  Summary
//! lines go to stdout and are deterministic; progress/timing chatter is
//! avoided entirely so the whole invocation is reproducible byte for byte.

use std::path::Path;

use feshlab_core::grid::{build_mapped_grid, MappedGridParams};
use feshlab_core::mfgh::{assemble, OpticalPotentialParams};
use feshlab_core::potential::{load_curves, synthetic_model, ChannelPotentialMatrix, HundsCaseAInput};
use feshlab_core::qdt::{PhaseProviders, QdtModel, QdtResonance, YMesh};
use feshlab_core::resonance::{stabilize, StabilizationParams, StabilizedResonance};
use feshlab_core::units::{cm_to_hartree, hartree_to_cm};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::{sig12, Csv, Report};

/// Box-length / absorber-start variants used for stabilization (bohr).
/// The first entry is the reference; the spread across all three decides
/// convergence.
const STAB_VARIANTS: [(f64, f64); 3] = [(180.0, 140.0), (160.0, 120.0), (80.0, 40.0)];

/// Builds the channel matrix from the configured source.
fn build_potential(cfg: &RunConfig) -> Result<ChannelPotentialMatrix, CliError> {
    let input: HundsCaseAInput = match &cfg.potential_file {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                CliError::Config(format!("cannot read potential '{}': {e}", path.display()))
            })?;
            load_curves(&text)?
        }
        None => synthetic_model(&cfg.model),
    };
    Ok(ChannelPotentialMatrix::build(&input)?)
}

/// Grid recipe for a given ceiling above the open threshold.
fn grid_params(cfg: &RunConfig, r_max: f64, ceiling_cm: f64) -> MappedGridParams {
    MappedGridParams {
        r_max,
        e_above_open: cm_to_hartree(ceiling_cm),
        density_factor: cfg.grid_density,
        max_points: cfg.grid_max_points,
    }
}

/// Quantum-defect engine with shared meshes for one energy window.
struct QdtRun<'a> {
    model: QdtModel<'a>,
    ymesh: YMesh,
    providers: PhaseProviders,
}

/// Builds the interaction mesh and phase providers covering `[lo, hi]` (cm
/// relative to the open threshold), with padding so root refinement near the
/// window edges stays inside the spline.
fn qdt_run<'a>(
    cfg: &RunConfig,
    pot: &'a ChannelPotentialMatrix,
    lo_cm: f64,
    hi_cm: f64,
) -> Result<QdtRun<'a>, CliError> {
    let model = QdtModel::new(pot, cfg.qdt)?;
    let e_open = pot.e_open();
    let pad = cm_to_hartree(4.0 * cfg.qdt.coarse_step_cm);
    let lo = e_open + cm_to_hartree(lo_cm);
    let hi = e_open + cm_to_hartree(hi_cm);
    let ymesh = model.y_mesh(lo - pad, hi + pad)?;
    let providers = model.phase_providers(lo, hi, cm_to_hartree(cfg.phase_step_cm))?;
    Ok(QdtRun {
        model,
        ymesh,
        providers,
    })
}

// ---------------------------------------------------------------------------
// bound
// ---------------------------------------------------------------------------

/// Bound levels from the grid Hamiltonian, `(E_cm_rel_open, half_width_cm,
/// open_weight)` sorted by energy.
fn mfgh_bound_levels(
    cfg: &RunConfig,
    pot: &ChannelPotentialMatrix,
) -> Result<Vec<(f64, f64, f64)>, CliError> {
    let grid = build_mapped_grid(pot, &grid_params(cfg, cfg.grid_r_max, 0.0))?;
    let spectrum = assemble(&grid, pot, None)?.diagonalize()?;
    let (lo, hi) = cfg.bound_window_hartree(pot.e_open());
    let mut rows: Vec<(f64, f64, f64)> = spectrum
        .in_window(lo, hi)
        .into_iter()
        .map(|(e, w)| {
            (
                hartree_to_cm(e.re - pot.e_open()),
                hartree_to_cm(-e.im),
                w,
            )
        })
        .collect();
    rows.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    Ok(rows)
}

/// Bound levels from the quantum-defect engine, `(E_cm_rel_open,
/// open_weight)` sorted by energy.
fn qdt_bound_levels(
    cfg: &RunConfig,
    pot: &ChannelPotentialMatrix,
) -> Result<Vec<(f64, f64)>, CliError> {
    let model = QdtModel::new(pot, cfg.qdt)?;
    let (lo, hi) = cfg.bound_window_hartree(pot.e_open());
    let levels = model.bound_states(lo, hi)?;
    Ok(levels
        .into_iter()
        .map(|l| (hartree_to_cm(l.energy - pot.e_open()), l.weight_open))
        .collect())
}

pub fn cmd_bound(cfg: &RunConfig) -> Result<(), CliError> {
    let pot = build_potential(cfg)?;
    let resolved = cfg.resolved_pairs();
    let out: &Path = &cfg.out_dir;

    let mfgh = if cfg.method.wants_mfgh() {
        let rows = mfgh_bound_levels(cfg, &pot)?;
        let mut csv = Csv::create(
            out,
            "bound_mfgh.csv",
            "bound",
            &resolved,
            &["E_cm", "half_width_cm", "open_weight"],
        )?;
        for &(e, hw, w) in &rows {
            csv.row(&[sig12(e), sig12(hw), sig12(w)])?;
        }
        println!("bound mfgh: {} levels -> {}", rows.len(), csv.finish()?.display());
        Some(rows)
    } else {
        None
    };

    let qdt = if cfg.method.wants_qdt() {
        let rows = qdt_bound_levels(cfg, &pot)?;
        let mut csv = Csv::create(
            out,
            "bound_qdt.csv",
            "bound",
            &resolved,
            &["E_cm", "open_weight"],
        )?;
        for &(e, w) in &rows {
            csv.row(&[sig12(e), sig12(w)])?;
        }
        println!("bound qdt: {} levels -> {}", rows.len(), csv.finish()?.display());
        Some(rows)
    } else {
        None
    };

    if let (Some(m), Some(q)) = (&mfgh, &qdt) {
        let a: Vec<f64> = m.iter().map(|r| r.0).collect();
        let b: Vec<f64> = q.iter().map(|r| r.0).collect();
        let (pairs, un_a, un_b) = pair_levels(&a, &b);
        let mut csv = Csv::create(
            out,
            "bound_compare.csv",
            "bound",
            &resolved,
            &["E_mfgh_cm", "E_qdt_cm", "dE_cm"],
        )?;
        let mut max_de = 0.0f64;
        for &(i, j) in &pairs {
            let de = a[i] - b[j];
            max_de = max_de.max(de.abs());
            csv.row(&[sig12(a[i]), sig12(b[j]), sig12(de)])?;
        }
        csv.finish()?;
        println!(
            "bound compare: paired {}  unmatched_mfgh {}  unmatched_qdt {}  max|dE| = {} cm-1",
            pairs.len(),
            un_a.len(),
            un_b.len(),
            sig12(max_de)
        );
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// resonances
// ---------------------------------------------------------------------------

/// Stabilized (box-converged) resonances, sorted by energy.
fn mfgh_resonances(
    cfg: &RunConfig,
    pot: &ChannelPotentialMatrix,
) -> Result<Vec<StabilizedResonance>, CliError> {
    let params = StabilizationParams {
        grid: grid_params(cfg, STAB_VARIANTS[0].0, cfg.grid_ceiling_cm),
        optical: OpticalPotentialParams {
            amplitude: cfg.optical_amplitude,
            length: cfg.optical_length,
            ..OpticalPotentialParams::at_edge_of(STAB_VARIANTS[0].0)
        },
        window: cfg.resonance_window_hartree(pot.e_open()),
        spread_tolerance: cfg.stab_spread_tol,
        width_floor: cm_to_hartree(1.0e-4),
    };
    let report = stabilize(pot, &params, &STAB_VARIANTS)?;
    Ok(report
        .resonances
        .into_iter()
        .filter(|r| r.converged)
        .collect())
}

fn qdt_resonances(
    cfg: &RunConfig,
    pot: &ChannelPotentialMatrix,
) -> Result<Vec<QdtResonance>, CliError> {
    let run = qdt_run(
        cfg,
        pot,
        cfg.resonance_window_cm.0,
        cfg.resonance_window_cm.1,
    )?;
    let list = if cfg.rotated {
        let rot = run.model.optimize_rotation(&run.providers, &run.ymesh)?;
        run.model
            .resonances_optimized(&run.providers, &run.ymesh, &rot)?
    } else {
        run.model.resonances(&run.providers, &run.ymesh)?
    };
    Ok(list)
}

pub fn cmd_resonances(cfg: &RunConfig) -> Result<(), CliError> {
    let pot = build_potential(cfg)?;
    let resolved = cfg.resolved_pairs();
    let out: &Path = &cfg.out_dir;
    let e_open = pot.e_open();

    if cfg.method.wants_mfgh() {
        let rows = mfgh_resonances(cfg, &pot)?;
        let mut csv = Csv::create(
            out,
            "resonances_mfgh.csv",
            "resonances",
            &resolved,
            &["E_cm", "gamma_cm", "spread", "open_weight"],
        )?;
        for r in &rows {
            csv.row(&[
                sig12(hartree_to_cm(r.energy - e_open)),
                sig12(hartree_to_cm(r.gamma)),
                sig12(r.spread),
                sig12(r.open_weight),
            ])?;
        }
        println!(
            "resonances mfgh: {} box-converged -> {}",
            rows.len(),
            csv.finish()?.display()
        );
    }

    if cfg.method.wants_qdt() {
        let rows = qdt_resonances(cfg, &pot)?;
        let mut csv = Csv::create(
            out,
            "resonances_qdt.csv",
            "resonances",
            &resolved,
            &["E_cm", "E0_cm", "shift_cm", "gamma_cm", "isolated"],
        )?;
        for r in &rows {
            csv.row(&[
                sig12(hartree_to_cm(r.e_r - e_open)),
                sig12(hartree_to_cm(r.e0 - e_open)),
                sig12(hartree_to_cm(r.shift)),
                sig12(hartree_to_cm(r.gamma)),
                if r.isolated { "1".into() } else { "0".into() },
            ])?;
        }
        println!(
            "resonances qdt ({}): {} found -> {}",
            if cfg.rotated { "optimized" } else { "adiabatic" },
            rows.len(),
            csv.finish()?.display()
        );
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// phase
// ---------------------------------------------------------------------------

pub fn cmd_phase(cfg: &RunConfig) -> Result<(), CliError> {
    let pot = build_potential(cfg)?;
    let resolved = cfg.resolved_pairs();
    let out: &Path = &cfg.out_dir;
    let e_open = pot.e_open();

    let run = qdt_run(cfg, &pot, cfg.phase_window_cm.0, cfg.phase_window_cm.1)?;
    let plain = run.model.phase_scan(&run.providers, &run.ymesh, None)?;
    let rot = run.model.optimize_rotation(&run.providers, &run.ymesh)?;
    let opt = run
        .model
        .phase_scan(&run.providers, &run.ymesh, Some(&rot))?;

    for (name, scan) in [("phase_adiabatic.csv", &plain), ("phase_optimized.csv", &opt)] {
        let mut csv = Csv::create(
            out,
            name,
            "phase",
            &resolved,
            &["E_cm", "sin2_deltaS", "sin2_deltar", "delta_bg"],
        )?;
        for i in 0..scan.energies.len() {
            csv.row(&[
                sig12(hartree_to_cm(scan.energies[i] - e_open)),
                sig12(scan.sin2_delta_s[i]),
                sig12(scan.sin2_delta_r[i]),
                sig12(scan.delta_bg[i]),
            ])?;
        }
        csv.finish()?;
    }

    let mut csv = Csv::create(
        out,
        "rotation.csv",
        "phase",
        &resolved,
        &["E_cm", "theta_c", "theta_o", "Y_oc_opt"],
    )?;
    for i in 0..rot.energies.len() {
        csv.row(&[
            sig12(hartree_to_cm(rot.energies[i] - e_open)),
            sig12(rot.theta_c[i]),
            sig12(rot.theta_o[i]),
            sig12(rot.y_opt_oc[i]),
        ])?;
    }
    csv.finish()?;

    let max_dev = plain
        .sin2_delta_s
        .iter()
        .zip(opt.sin2_delta_s.iter())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);
    let rise = plain.delta_s.last().unwrap_or(&0.0) - plain.delta_s.first().unwrap_or(&0.0);
    // Resonant rise in excess of the smooth background: the total phase has
    // a steep linear trend from the energy-normalized reference (a -k R
    // term), so the Breit-Wigner pi-step only shows once the edge slope is
    // subtracted.
    let excess = {
        let n = plain.energies.len();
        if n < 8 {
            rise
        } else {
            let chunk = (n / 10).max(2);
            let slope = |lo: usize, hi: usize| -> f64 {
                (plain.delta_s[hi] - plain.delta_s[lo])
                    / (plain.energies[hi] - plain.energies[lo])
            };
            let bg = 0.5 * (slope(0, chunk - 1) + slope(n - chunk, n - 1));
            rise - bg * (plain.energies[n - 1] - plain.energies[0])
        }
    };
    println!(
        "phase: {} points  representation invariance max|d sin2_deltaS| = {}",
        plain.energies.len(),
        sig12(max_dev)
    );
    println!("phase: delta_S rise across window = {} rad", sig12(rise));
    println!(
        "phase: delta_S rise in excess of edge-slope background = {} rad",
        sig12(excess)
    );
    println!(
        "phase: rotation bounds max|Y_oo| = {}  max|Y_cc| = {}  max|Re K_cc| = {}",
        sig12(rot.max_y_opt_oo),
        sig12(rot.max_y_opt_cc),
        sig12(rot.max_re_k_cc)
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// compare
// ---------------------------------------------------------------------------

/// Injective mutual-nearest pairing of two sorted level lists.  Returns
/// `(pairs, unmatched_a, unmatched_b)` by index.
pub fn pair_levels(a: &[f64], b: &[f64]) -> (Vec<(usize, usize)>, Vec<usize>, Vec<usize>) {
    let nearest = |list: &[f64], x: f64| -> Option<usize> {
        list.iter()
            .enumerate()
            .min_by(|(_, p), (_, q)| {
                (x - **p).abs().partial_cmp(&(x - **q).abs()).unwrap()
            })
            .map(|(i, _)| i)
    };
    let mut pairs = Vec::new();
    let mut used_b = vec![false; b.len()];
    for (i, &ea) in a.iter().enumerate() {
        if let Some(j) = nearest(b, ea) {
            if nearest(a, b[j]) == Some(i) {
                pairs.push((i, j));
                used_b[j] = true;
            }
        }
    }
    let paired_a: Vec<usize> = pairs.iter().map(|&(i, _)| i).collect();
    let un_a = (0..a.len()).filter(|i| !paired_a.contains(i)).collect();
    let un_b = (0..b.len()).filter(|j| !used_b[*j]).collect();
    (pairs, un_a, un_b)
}

pub fn cmd_compare(cfg: &RunConfig) -> Result<(), CliError> {
    let pot = build_potential(cfg)?;
    let resolved = cfg.resolved_pairs();
    let out: &Path = &cfg.out_dir;
    let mut report = Report::create(out, "compare_report.txt", "compare", &resolved)?;

    // Bound levels per engine.  A single-method run compares the engine with
    // itself, which exercises the pairing path and documents zero deltas.
    let bound_m: Vec<f64>;
    let bound_q: Vec<f64>;
    match cfg.method {
        crate::config::Method::Both => {
            bound_m = mfgh_bound_levels(cfg, &pot)?.iter().map(|r| r.0).collect();
            bound_q = qdt_bound_levels(cfg, &pot)?.iter().map(|r| r.0).collect();
        }
        crate::config::Method::Mfgh => {
            bound_m = mfgh_bound_levels(cfg, &pot)?.iter().map(|r| r.0).collect();
            bound_q = bound_m.clone();
        }
        crate::config::Method::Qdt => {
            bound_q = qdt_bound_levels(cfg, &pot)?.iter().map(|r| r.0).collect();
            bound_m = bound_q.clone();
        }
    }
    let (pairs, un_m, un_q) = pair_levels(&bound_m, &bound_q);
    let mut csv = Csv::create(
        out,
        "compare_bound.csv",
        "compare",
        &resolved,
        &["E_mfgh_cm", "E_qdt_cm", "dE_cm"],
    )?;
    let mut max_de = 0.0f64;
    for &(i, j) in &pairs {
        let de = bound_m[i] - bound_q[j];
        max_de = max_de.max(de.abs());
        csv.row(&[sig12(bound_m[i]), sig12(bound_q[j]), sig12(de)])?;
    }
    csv.finish()?;
    report.line(&format!(
        "bound: mfgh {}  qdt {}  paired {}  unmatched_mfgh {}  unmatched_qdt {}",
        bound_m.len(),
        bound_q.len(),
        pairs.len(),
        un_m.len(),
        un_q.len()
    ))?;
    report.line(&format!("bound max |dE| = {} cm-1", sig12(max_de)))?;
    for i in &un_m {
        report.line(&format!("bound unmatched mfgh: E = {} cm-1", sig12(bound_m[*i])))?;
    }
    for j in &un_q {
        report.line(&format!("bound unmatched qdt: E = {} cm-1", sig12(bound_q[*j])))?;
    }
    println!(
        "compare bound: paired {}  unmatched {}+{}  max|dE| = {} cm-1",
        pairs.len(),
        un_m.len(),
        un_q.len(),
        sig12(max_de)
    );

    // Resonances per engine: (position, width) in cm relative to threshold.
    let res_m: Vec<(f64, f64)>;
    let res_q: Vec<(f64, f64)>;
    let e_open = pot.e_open();
    match cfg.method {
        crate::config::Method::Both => {
            res_m = mfgh_resonances(cfg, &pot)?
                .iter()
                .map(|r| {
                    (
                        hartree_to_cm(r.energy - e_open),
                        hartree_to_cm(r.gamma),
                    )
                })
                .collect();
            res_q = qdt_resonances(cfg, &pot)?
                .iter()
                .map(|r| (hartree_to_cm(r.e_r - e_open), hartree_to_cm(r.gamma)))
                .collect();
        }
        crate::config::Method::Mfgh => {
            res_m = mfgh_resonances(cfg, &pot)?
                .iter()
                .map(|r| {
                    (
                        hartree_to_cm(r.energy - e_open),
                        hartree_to_cm(r.gamma),
                    )
                })
                .collect();
            res_q = res_m.clone();
        }
        crate::config::Method::Qdt => {
            res_q = qdt_resonances(cfg, &pot)?
                .iter()
                .map(|r| (hartree_to_cm(r.e_r - e_open), hartree_to_cm(r.gamma)))
                .collect();
            res_m = res_q.clone();
        }
    }
    let em: Vec<f64> = res_m.iter().map(|r| r.0).collect();
    let eq: Vec<f64> = res_q.iter().map(|r| r.0).collect();
    let (pairs, un_m, un_q) = pair_levels(&em, &eq);
    let mut csv = Csv::create(
        out,
        "compare_resonances.csv",
        "compare",
        &resolved,
        &[
            "E_mfgh_cm",
            "E_qdt_cm",
            "dE_cm",
            "gamma_mfgh_cm",
            "gamma_qdt_cm",
            "dgamma_rel",
        ],
    )?;
    let mut max_de = 0.0f64;
    let mut max_dg = 0.0f64;
    for &(i, j) in &pairs {
        let de = res_m[i].0 - res_q[j].0;
        let dg = if res_q[j].1 != 0.0 {
            (res_m[i].1 - res_q[j].1) / res_q[j].1
        } else {
            0.0
        };
        max_de = max_de.max(de.abs());
        max_dg = max_dg.max(dg.abs());
        csv.row(&[
            sig12(res_m[i].0),
            sig12(res_q[j].0),
            sig12(de),
            sig12(res_m[i].1),
            sig12(res_q[j].1),
            sig12(dg),
        ])?;
    }
    csv.finish()?;
    report.line(&format!(
        "resonances: mfgh {}  qdt {}  paired {}  unmatched_mfgh {}  unmatched_qdt {}",
        res_m.len(),
        res_q.len(),
        pairs.len(),
        un_m.len(),
        un_q.len()
    ))?;
    report.line(&format!(
        "resonances max |dE_r| = {} cm-1  max |dgamma|/gamma = {}",
        sig12(max_de),
        sig12(max_dg)
    ))?;
    for i in &un_m {
        report.line(&format!(
            "resonance unmatched mfgh: E = {} cm-1  gamma = {} cm-1",
            sig12(res_m[*i].0),
            sig12(res_m[*i].1)
        ))?;
    }
    for j in &un_q {
        report.line(&format!(
            "resonance unmatched qdt: E = {} cm-1  gamma = {} cm-1",
            sig12(res_q[*j].0),
            sig12(res_q[*j].1)
        ))?;
    }
    let path = report.finish()?;
    println!(
        "compare resonances: paired {}  unmatched {}+{}  max|dE_r| = {} cm-1  max|dgamma|/gamma = {}",
        pairs.len(),
        un_m.len(),
        un_q.len(),
        sig12(max_de),
        sig12(max_dg)
    );
    println!("compare report -> {}", path.display());
    Ok(())
}
