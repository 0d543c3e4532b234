//! Temporary survey binary: error-scaling battery for the mapped grid.

use feshlab_core::grid::{build_mapped_grid, MappedGrid, MappedGridParams};
use feshlab_core::mfgh::single_channel_spectrum;
use feshlab_core::potential::{
    adiabatize, synthetic_model, ChannelPotentialMatrix, SyntheticModelParams,
};
use feshlab_core::units::{cm_to_hartree, hartree_to_cm};

fn main() {
    let params = SyntheticModelParams {
        coupling_amplitude: 0.0,
        so_amplitude: 0.0,
        ..SyntheticModelParams::default()
    };
    let pot = ChannelPotentialMatrix::build(&synthetic_model(&params)).unwrap();
    let e_open = pot.e_open();
    let mu = pot.reduced_mass();
    let adia = adiabatize(&pot);
    let v = move |r: f64| adia.v_lower(r);

    let lo = e_open - cm_to_hartree(30.0);
    let hi = e_open - cm_to_hartree(10.0);

    let grid = MappedGrid::uniform(4.0, 160.0, 4096).unwrap();
    let uni: Vec<f64> = single_channel_spectrum(&grid, v, mu)
        .unwrap()
        .into_iter()
        .filter(|e| *e >= lo && *e <= hi)
        .collect();

    // Jacobian variation on the default-ish grid.
    let gp = MappedGridParams {
        r_max: 160.0,
        e_above_open: 0.0,
        density_factor: 2.0,
        max_points: 16384,
    };
    let grid = build_mapped_grid(&pot, &gp).unwrap();
    let mut worst = (0.0f64, 0.0f64);
    for i in 0..grid.len() - 1 {
        let rel = ((grid.jac[i + 1] - grid.jac[i]) / grid.jac[i]).abs();
        if rel > worst.0 {
            worst = (rel, grid.r[i]);
        }
    }
    println!(
        "# density 2: max per-step jacobian change = {:.3} at R = {:.2}",
        worst.0, worst.1
    );

    for density in [2.0f64, 4.0, 8.0] {
        let gp = MappedGridParams {
            density_factor: density,
            ..gp
        };
        let grid = build_mapped_grid(&pot, &gp).unwrap();
        let mapped: Vec<f64> = single_channel_spectrum(&grid, v, mu)
            .unwrap()
            .into_iter()
            .filter(|e| *e >= lo && *e <= hi)
            .collect();
        let d0 = hartree_to_cm(mapped[0] - uni[0]);
        let dl = hartree_to_cm(mapped[uni.len() - 1] - uni[uni.len() - 1]);
        println!(
            "# density {density}: {} pts  dE(first) = {:+.3e}  dE(last) = {:+.3e}",
            grid.len(),
            d0,
            dl
        );
    }
}
