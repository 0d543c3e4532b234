//! Temporary survey binary: MFGH grid-convergence diagnostics.
//! Part 1: bound states below threshold vs GMQDT (no absorber).
//! Part 2: narrow quasibound eigenvalues vs grid density and ceiling.

use std::time::Instant;

use feshlab_core::grid::{build_mapped_grid, MappedGridParams};
use feshlab_core::mfgh::{assemble, OpticalPotentialParams};
use feshlab_core::potential::{synthetic_model, ChannelPotentialMatrix, SyntheticModelParams};
use feshlab_core::qdt::{QdtModel, QdtParams};
use feshlab_core::units::{cm_to_hartree, hartree_to_cm};

fn main() {
    let params = SyntheticModelParams::default();
    let pot = ChannelPotentialMatrix::build(&synthetic_model(&params)).unwrap();
    let e_open = pot.e_open();

    // Part 1: bound comparison on [e_open-30, e_open-10] (fast subwindow).
    let model = QdtModel::new(&pot, QdtParams::default()).unwrap();
    let t0 = Instant::now();
    let qdt_levels = model
        .bound_states(e_open - cm_to_hartree(30.0), e_open - cm_to_hartree(10.0))
        .unwrap();
    println!(
        "# qdt bound: {:.1} s, {} levels",
        t0.elapsed().as_secs_f64(),
        qdt_levels.len()
    );

    for density in [1.5f64, 2.0, 2.5] {
        let gp = MappedGridParams {
            r_max: 160.0,
            e_above_open: 0.0,
            density_factor: density,
            max_points: 8192,
        };
        let t0 = Instant::now();
        let grid = build_mapped_grid(&pot, &gp).unwrap();
        let spec = assemble(&grid, &pot, None).unwrap().diagonalize().unwrap();
        let mfgh: Vec<f64> = spec
            .in_window(e_open - cm_to_hartree(30.0), e_open - cm_to_hartree(10.0))
            .iter()
            .map(|(e, _)| e.re)
            .collect();
        println!(
            "# density {density}: {} pts, {:.1} s, {} levels in window",
            grid.len(),
            t0.elapsed().as_secs_f64(),
            mfgh.len()
        );
        if mfgh.len() == qdt_levels.len() {
            let mut worst = 0.0f64;
            for (m, q) in mfgh.iter().zip(&qdt_levels) {
                worst = worst.max(hartree_to_cm((m - q.energy).abs()));
            }
            println!("#   max |dE| = {worst:.3e} cm-1");
        } else {
            for q in &qdt_levels {
                println!("#   qdt  {:.6}", hartree_to_cm(q.energy - e_open));
            }
            for m in &mfgh {
                println!("#   mfgh {:.6}", hartree_to_cm(m - e_open));
            }
        }
    }

    // Part 2: quasibound near 48.89 and 95.95 at L=80 under refinement.
    for (density, ceiling) in [(1.5f64, 120.0f64), (2.5, 120.0), (1.5, 300.0), (2.5, 300.0)] {
        let gp = MappedGridParams {
            r_max: 80.0,
            e_above_open: cm_to_hartree(ceiling),
            density_factor: density,
            max_points: 8192,
        };
        let grid = build_mapped_grid(&pot, &gp).unwrap();
        let op = OpticalPotentialParams::at_edge_of(80.0);
        let t0 = Instant::now();
        let spec = assemble(&grid, &pot, Some(&op))
            .unwrap()
            .diagonalize()
            .unwrap();
        println!(
            "# L=80 density {density} ceiling {ceiling}: {} pts, diag {:.1} s",
            grid.len(),
            t0.elapsed().as_secs_f64()
        );
        for center in [13.12f64, 48.89, 95.95] {
            let lo = e_open + cm_to_hartree(center - 1.2);
            let hi = e_open + cm_to_hartree(center + 1.2);
            let mut best: Option<(f64, f64, f64)> = None;
            for (e, w) in spec.in_window(lo, hi) {
                let g = hartree_to_cm(-2.0 * e.im);
                if best.map_or(true, |(_, bg, _)| g < bg) {
                    best = Some((hartree_to_cm(e.re - e_open), g, w));
                }
            }
            if let Some((e, g, w)) = best {
                println!("   near {center}: E-Eo = {e:.5}, G = {g:.4e}, w_open = {w:.4}");
            } else {
                println!("   near {center}: nothing in window");
            }
        }
    }
}
