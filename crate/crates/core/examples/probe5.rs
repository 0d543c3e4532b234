//! Temporary survey binary: single-channel oracle comparison.
//! Decoupled model: uniform-grid FGH (dense, near-exact) vs Milne phase
//! roots vs mapped-grid FGH, for levels in [-30, -10] cm-1.

use feshlab_core::grid::{build_mapped_grid, MappedGrid, MappedGridParams};
use feshlab_core::mfgh::single_channel_spectrum;
use feshlab_core::milne::ReferenceChannel;
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

    // Uniform dense FGH oracle.
    let grid = MappedGrid::uniform(4.0, 160.0, 4096).unwrap();
    let uni: Vec<f64> = single_channel_spectrum(&grid, v, mu)
        .unwrap()
        .into_iter()
        .filter(|e| *e >= lo && *e <= hi)
        .collect();
    println!("# uniform oracle: {} levels", uni.len());

    // Milne phase roots: snap nu to multiples of pi by bisection.
    let ch = ReferenceChannel::new(v, e_open, pot.c3_open(), mu, 4.0, 60.0).unwrap();
    let mut milne = Vec::new();
    let n_lo = (ch.accumulated_phase(lo).unwrap() / std::f64::consts::PI).ceil() as i64;
    let n_hi = (ch.accumulated_phase(hi).unwrap() / std::f64::consts::PI).floor() as i64;
    for n in n_lo..=n_hi {
        let target = n as f64 * std::f64::consts::PI;
        let (mut a, mut b) = (lo, hi);
        for _ in 0..60 {
            let mid = 0.5 * (a + b);
            if ch.accumulated_phase(mid).unwrap() < target {
                a = mid;
            } else {
                b = mid;
            }
        }
        milne.push(0.5 * (a + b));
    }
    println!("# milne: {} levels", milne.len());

    // Mapped FGH at two densities, with per-level error profiles.
    for density in [2.0f64, 3.0] {
        let gp = MappedGridParams {
            r_max: 160.0,
            e_above_open: 0.0,
            density_factor: density,
            max_points: 8192,
        };
        let grid = build_mapped_grid(&pot, &gp).unwrap();
        let mapped: Vec<f64> = single_channel_spectrum(&grid, v, mu)
            .unwrap()
            .into_iter()
            .filter(|e| *e >= lo && *e <= hi)
            .collect();
        println!("# mapped density {density}: {} pts, {} levels", grid.len(), mapped.len());
        if mapped.len() == uni.len() {
            for (m, u) in mapped.iter().zip(&uni) {
                println!(
                    "    E = {:12.6} cm   dE = {:+.3e} cm",
                    hartree_to_cm(u - e_open),
                    hartree_to_cm(m - u)
                );
            }
        }
    }

    if milne.len() == uni.len() {
        let worst = milne
            .iter()
            .zip(&uni)
            .map(|(m, u)| (m - u).abs())
            .fold(0.0f64, f64::max);
        println!("# milne vs uniform: max |dE| = {:.3e} cm-1", hartree_to_cm(worst));
        for (m, u) in milne.iter().zip(&uni) {
            println!(
                "  milne {:12.6} uniform {:12.6} diff {:+.3e}",
                hartree_to_cm(m - e_open),
                hartree_to_cm(u - e_open),
                hartree_to_cm(m - u)
            );
        }
    } else {
        println!("# COUNT MISMATCH milne {} vs uniform {}", milne.len(), uni.len());
    }
}
