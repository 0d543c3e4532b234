//! Temporary survey binary: MFGH stabilization timing and width quality on
//! the default synthetic model.

use std::time::Instant;

use feshlab_core::grid::{build_mapped_grid, MappedGridParams};
use feshlab_core::mfgh::{assemble, OpticalPotentialParams};
use feshlab_core::potential::{synthetic_model, ChannelPotentialMatrix, SyntheticModelParams};
use feshlab_core::resonance::{stabilize, StabilizationParams};
use feshlab_core::units::{cm_to_hartree, hartree_to_cm};

fn main() {
    let params = SyntheticModelParams::default();
    let pot = ChannelPotentialMatrix::build(&synthetic_model(&params)).unwrap();
    let e_open = pot.e_open();

    let grid_params = MappedGridParams {
        r_max: 180.0,
        e_above_open: cm_to_hartree(120.0),
        density_factor: 1.5,
        max_points: 4096,
    };

    for l in [80.0f64, 160.0, 180.0] {
        let gp = MappedGridParams {
            r_max: l,
            ..grid_params
        };
        let t0 = Instant::now();
        let grid = build_mapped_grid(&pot, &gp).unwrap();
        let op = OpticalPotentialParams::at_edge_of(l);
        let h = assemble(&grid, &pot, Some(&op)).unwrap();
        let spec = h.diagonalize().unwrap();
        let n_in = spec
            .in_window(e_open + cm_to_hartree(2.0), e_open + cm_to_hartree(100.0))
            .len();
        println!(
            "# L = {l}: {} pts/channel, diag {:.1} s, {} levels in window",
            grid.len(),
            t0.elapsed().as_secs_f64(),
            n_in
        );
    }

    let st = StabilizationParams {
        grid: grid_params,
        optical: OpticalPotentialParams::at_edge_of(180.0),
        window: (e_open + cm_to_hartree(2.0), e_open + cm_to_hartree(100.0)),
        spread_tolerance: 0.05,
        width_floor: 4.556e-14,
    };
    let t0 = Instant::now();
    let report = stabilize(
        &pot,
        &st,
        &[(180.0, 140.0), (160.0, 120.0), (80.0, 40.0)],
    )
    .unwrap();
    println!(
        "# stabilize: {:.1} s, {} matched, {} unmatched",
        t0.elapsed().as_secs_f64(),
        report.resonances.len(),
        report.unmatched
    );
    println!("# E-E_open(cm)   gamma(cm)     spread     conv  w_open   gammas(cm)");
    for r in &report.resonances {
        let gs: Vec<String> = r
            .gammas
            .iter()
            .map(|g| format!("{:.4e}", hartree_to_cm(*g)))
            .collect();
        println!(
            "{:13.6}  {:11.4e}  {:9.3e}  {}  {:.4}   [{}]",
            hartree_to_cm(r.energy - e_open),
            hartree_to_cm(r.gamma),
            r.spread,
            r.converged as u8,
            r.open_weight,
            gs.join(", ")
        );
    }
}
