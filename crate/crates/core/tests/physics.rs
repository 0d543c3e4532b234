//! Cross-module invariance checks on the default two-channel model: results
//! must not depend on numerical knobs (box length, grid density, energy
//! window placement), and the interaction matrix must stay smooth across the
//! open-channel threshold.

use feshlab_core::grid::{build_mapped_grid, MappedGridParams};
use feshlab_core::mfgh::assemble;
use feshlab_core::potential::{synthetic_model, ChannelPotentialMatrix, SyntheticModelParams};
use feshlab_core::qdt::{QdtModel, QdtParams};
use feshlab_core::units::{cm_to_hartree, hartree_to_cm};

fn default_potential() -> ChannelPotentialMatrix {
    ChannelPotentialMatrix::build(&synthetic_model(&SyntheticModelParams::default())).unwrap()
}

/// Grid-Hamiltonian bound levels in a window (cm^-1 relative to the open
/// threshold), for a given box length and density.
fn grid_levels(
    pot: &ChannelPotentialMatrix,
    r_max: f64,
    density: f64,
    window_cm: (f64, f64),
) -> Vec<f64> {
    let grid = build_mapped_grid(
        pot,
        &MappedGridParams {
            r_max,
            e_above_open: 0.0,
            density_factor: density,
            max_points: 4096,
        },
    )
    .unwrap();
    let spectrum = assemble(&grid, pot, None).unwrap().diagonalize().unwrap();
    let e_open = pot.e_open();
    let mut levels: Vec<f64> = spectrum
        .in_window(
            e_open + cm_to_hartree(window_cm.0),
            e_open + cm_to_hartree(window_cm.1),
        )
        .into_iter()
        .map(|(e, _)| hartree_to_cm(e.re - e_open))
        .collect();
    levels.sort_by(|a, b| a.partial_cmp(b).unwrap());
    levels
}

#[test]
fn bound_levels_do_not_depend_on_box_length() {
    let pot = default_potential();
    let window = (-21.0, -11.0);
    let a = grid_levels(&pot, 160.0, 2.5, window);
    let b = grid_levels(&pot, 190.0, 2.5, window);
    assert_eq!(a.len(), b.len(), "level count changed with box length");
    assert!(!a.is_empty());
    for (x, y) in a.iter().zip(&b) {
        // Levels this deep decay within a fraction of a bohr, so genuine box
        // truncation is immeasurably small; what remains when the box grows
        // is the interior discretization error re-sampled on slightly
        // shifted points.  The bound below is a few times that jitter and
        // far below the level spacing.
        assert!(
            (x - y).abs() <= 1.0e-4,
            "level moved from {x} to {y} cm^-1 when the box grew"
        );
    }
}

#[test]
fn bound_levels_converge_with_grid_density() {
    let pot = default_potential();
    let window = (-21.0, -11.0);
    let coarse = grid_levels(&pot, 160.0, 1.5, window);
    let fine = grid_levels(&pot, 160.0, 2.5, window);
    assert_eq!(coarse.len(), fine.len());
    assert!(!coarse.is_empty());
    for (x, y) in coarse.iter().zip(&fine) {
        assert!(
            (x - y).abs() <= 5.0e-4,
            "density sweep moved a level by {} cm^-1",
            (x - y).abs()
        );
    }
}

#[test]
fn window_placement_does_not_move_quantum_defect_levels() {
    let pot = default_potential();
    let model = QdtModel::new(&pot, QdtParams::default()).unwrap();
    let e_open = pot.e_open();
    let run = |lo_cm: f64, hi_cm: f64| -> Vec<f64> {
        model
            .bound_states(e_open + cm_to_hartree(lo_cm), e_open + cm_to_hartree(hi_cm))
            .unwrap()
            .iter()
            .map(|l| hartree_to_cm(l.energy - e_open))
            .collect()
    };
    let wide = run(-21.0, -11.0);
    let shifted = run(-16.0, -6.0);
    let overlap_wide: Vec<f64> = wide.iter().copied().filter(|e| *e >= -16.0).collect();
    let overlap_shift: Vec<f64> = shifted.iter().copied().filter(|e| *e <= -11.0).collect();
    assert!(
        overlap_wide.len() >= 5,
        "too few levels in the overlap to be meaningful"
    );
    assert_eq!(
        overlap_wide.len(),
        overlap_shift.len(),
        "window placement changed the level count in the shared range"
    );
    for (x, y) in overlap_wide.iter().zip(&overlap_shift) {
        assert!(
            (x - y).abs() <= 1.0e-6,
            "window placement moved a level from {x} to {y} cm^-1"
        );
    }
}

/// The short-range interaction matrix carries no threshold structure: its
/// energy dependence must stay as smooth across the open threshold as it is
/// anywhere else.  A kink at E = 0 would show up as a large spline-vs-direct
/// residual near the crossing node.
#[test]
fn interaction_matrix_is_smooth_across_open_threshold() {
    let pot = default_potential();
    let model = QdtModel::new(&pot, QdtParams::default()).unwrap();
    let e_open = pot.e_open();
    let mesh = model
        .y_mesh(e_open - cm_to_hartree(3.0), e_open + cm_to_hartree(3.0))
        .unwrap();
    let mut max_rel = 0.0f64;
    for de_cm in [-0.75, -0.25, 0.25, 0.75] {
        let e = e_open + cm_to_hartree(de_cm);
        let direct = model.y_direct(e).unwrap().y;
        let splined = mesh.y(e);
        for i in 0..2 {
            for j in 0..2 {
                let scale = direct.0[i][j].abs().max(0.1);
                let rel = (splined.0[i][j] - direct.0[i][j]).abs() / scale;
                max_rel = max_rel.max(rel);
            }
        }
    }
    assert!(
        max_rel <= 1.0e-5,
        "interaction spline deviates from direct evaluation near threshold by {max_rel:.3e}"
    );
}
