//! Temporary survey binary: full inter-threshold QDT scan on the default
//! synthetic model.  Prints resonance lists from both representations,
//! rotation maxima, and timings.

use std::time::Instant;

use feshlab_core::potential::{synthetic_model, ChannelPotentialMatrix, SyntheticModelParams};
use feshlab_core::qdt::{QdtModel, QdtParams};
use feshlab_core::units::{cm_to_hartree, hartree_to_cm};

fn main() {
    let params = SyntheticModelParams::default();
    let pot = ChannelPotentialMatrix::build(&synthetic_model(&params)).unwrap();
    let model = QdtModel::new(&pot, QdtParams::default()).unwrap();
    let e_open = pot.e_open();
    let e_closed = pot.e_closed();
    println!(
        "# e_open = {} cm-1, e_closed = {} cm-1, split = {}",
        hartree_to_cm(e_open),
        hartree_to_cm(e_closed),
        hartree_to_cm(pot.split())
    );

    let margin = cm_to_hartree(2.0);
    let e_lo = e_open + margin;
    let e_hi = e_closed - margin;

    let t0 = Instant::now();
    let ymesh = model.y_mesh(e_lo, e_hi).unwrap();
    println!("# y_mesh: {:.1} s", t0.elapsed().as_secs_f64());

    let t0 = Instant::now();
    let providers = model
        .phase_providers(e_lo, e_hi, cm_to_hartree(0.02))
        .unwrap();
    println!(
        "# providers (0.02 cm-1, {} pts): {:.1} s",
        providers.energies.len(),
        t0.elapsed().as_secs_f64()
    );

    let t0 = Instant::now();
    let rot = model.optimize_rotation(&providers, &ymesh).unwrap();
    println!(
        "# rotation: {:.1} s ; max|Yoo| = {:.3e}, max|Ycc| = {:.3e}, max|ReKcc| = {:.3e}",
        t0.elapsed().as_secs_f64(),
        rot.max_y_opt_oo,
        rot.max_y_opt_cc,
        rot.max_re_k_cc
    );
    let max_yoc = rot
        .y_opt_oc
        .iter()
        .cloned()
        .fold(0.0f64, |a, b| a.max(b.abs()));
    println!("# max |Y_oc^opt| over window = {:.6}", max_yoc);

    let t0 = Instant::now();
    let plain = model.resonances(&providers, &ymesh).unwrap();
    println!("# plain resonances: {:.1} s, {} found", t0.elapsed().as_secs_f64(), plain.len());
    let t0 = Instant::now();
    let opt = model
        .resonances_optimized(&providers, &ymesh, &rot)
        .unwrap();
    println!("# optimized resonances: {:.1} s, {} found", t0.elapsed().as_secs_f64(), opt.len());

    println!("#");
    println!("# idx  E_r-E_open(cm)  gamma(cm)      iso  dE_r(cm)      dG/G        shift(cm)");
    let n = plain.len().min(opt.len());
    let mut max_de = 0.0f64;
    let mut max_dgg = 0.0f64;
    for i in 0..n {
        let a = &plain[i];
        let b = &opt[i];
        let de = hartree_to_cm(a.e_r - b.e_r);
        let dgg = (a.gamma - b.gamma).abs() / a.gamma.max(1e-300);
        if a.isolated && b.isolated {
            max_de = max_de.max(de.abs());
            max_dgg = max_dgg.max(dgg);
        }
        println!(
            "{:4}  {:14.6}  {:12.5e}  {}{}  {:12.5e}  {:10.3e}  {:12.5e}",
            i,
            hartree_to_cm(a.e_r - e_open),
            hartree_to_cm(a.gamma),
            a.isolated as u8,
            b.isolated as u8,
            de,
            dgg,
            hartree_to_cm(a.shift)
        );
    }
    println!("# isolated max |dE_r| = {:.3e} cm-1, max dG/G = {:.3e}", max_de, max_dgg);
}
