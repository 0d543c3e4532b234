//! Temporary survey binary: raw complex MFGH spectra near known resonances.

use feshlab_core::grid::{build_mapped_grid, MappedGridParams};
use feshlab_core::mfgh::{assemble, OpticalPotentialParams};
use feshlab_core::potential::{synthetic_model, ChannelPotentialMatrix, SyntheticModelParams};
use feshlab_core::units::{cm_to_hartree, hartree_to_cm};

fn main() {
    let params = SyntheticModelParams::default();
    let pot = ChannelPotentialMatrix::build(&synthetic_model(&params)).unwrap();
    let e_open = pot.e_open();

    for l in [80.0f64, 160.0, 180.0] {
        let gp = MappedGridParams {
            r_max: l,
            e_above_open: cm_to_hartree(120.0),
            density_factor: 1.5,
            max_points: 4096,
        };
        let grid = build_mapped_grid(&pot, &gp).unwrap();
        let op = OpticalPotentialParams::at_edge_of(l);
        let spec = assemble(&grid, &pot, Some(&op))
            .unwrap()
            .diagonalize()
            .unwrap();
        println!("# L = {l} ({} pts)", grid.len());
        for center in [5.32f64, 13.12, 48.89, 95.95] {
            println!("## near E-E_open = {center}");
            let lo = e_open + cm_to_hartree(center - 1.5);
            let hi = e_open + cm_to_hartree(center + 1.5);
            for (e, w) in spec.in_window(lo, hi) {
                println!(
                    "   E-Eo = {:10.5} cm  G = {:11.4e} cm  w_open = {:.4}",
                    hartree_to_cm(e.re - e_open),
                    hartree_to_cm(-2.0 * e.im),
                    w
                );
            }
        }
    }
}
