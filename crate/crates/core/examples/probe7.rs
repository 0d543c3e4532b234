//! Temporary survey binary: map-placement consistency near the inner wall.

use feshlab_core::grid::{build_mapped_grid, MappedGridParams};
use feshlab_core::potential::{synthetic_model, ChannelPotentialMatrix, SyntheticModelParams};

fn main() {
    let params = SyntheticModelParams {
        coupling_amplitude: 0.0,
        so_amplitude: 0.0,
        ..SyntheticModelParams::default()
    };
    let pot = ChannelPotentialMatrix::build(&synthetic_model(&params)).unwrap();

    let gp = MappedGridParams {
        r_max: 160.0,
        e_above_open: 0.0,
        density_factor: 2.0,
        max_points: 16384,
    };
    let grid = build_mapped_grid(&pot, &gp).unwrap();
    println!("# r_min = {}, h = {}, n = {}", grid.r_min, grid.h, grid.len());
    println!("#    i        R          jac(stored)   jac(fd)      ratio");
    for i in 1..grid.len() - 1 {
        let fd = (grid.r[i + 1] - grid.r[i - 1]) / (2.0 * grid.h);
        let ratio = grid.jac[i] / fd;
        if i < 50 || (ratio - 1.0).abs() > 0.02 {
            println!(
                "{:6}  {:10.4}  {:12.5e}  {:12.5e}  {:8.4}",
                i, grid.r[i], grid.jac[i], fd, ratio
            );
        }
    }
}
