use bzwalk::grid::GridSpec;
use bzwalk::numerics::tv_distance;
use bzwalk::observables::peak_width;
use bzwalk::protocol::{run_static_walk, ProtocolConfig};
use bzwalk::units::walk_geometry_for;
use std::time::Instant;

fn main() {
    let g = walk_geometry_for(20, 10).unwrap();
    let base = {
        let mut c = ProtocolConfig::walk_defaults(g);
        c.v0 = 10.0;
        c.f0 = 0.2;
        c.w_trap = 2.0 * std::f64::consts::PI * 2.5 / 1.2741e4; // 2.5 Hz
        c.grid = GridSpec { n: 2048, length: 128.0, center: 0.0 };
        c.trap_during_walk = true;
        c.use_gpe = true;
        c
    };
    // g1d = 2 hbar a_s omega_r N / (E_R d_L) = 9.825e-4 per atom at 5.3 nm, 100 Hz.
    let g_per_atom = 9.825e-4;
    let mut results = Vec::new();
    for (label, gg) in [("linear", 0.0), ("repulsive", 100.0 * g_per_atom), ("attractive", -10.0 * g_per_atom)] {
        let mut c = base.clone();
        c.g = gg;
        let t0 = Instant::now();
        let r = run_static_walk(&c).unwrap();
        let w_init = peak_width(&r.initial_profile, 0.0, 0.05);
        let w_final = peak_width(&r.final_profile, 0.0, 0.05);
        println!("{label:10} g={gg:+.5}: init peak width {w_init:.5}  central peak after walk {w_final:.5}  [{:?}]", t0.elapsed());
        results.push((label, r));
    }
    // Linear GPE (g=0) vs pure Schrödinger: TV of final site distributions.
    let mut c = base.clone();
    c.g = 0.0;
    c.use_gpe = false;
    let plain = run_static_walk(&c).unwrap();
    let tv = tv_distance(&results[0].1.sites_final.probabilities, &plain.sites_final.probabilities);
    println!("TV(linear GPE, pure Schrödinger) = {tv:.2e}");
    println!("\nfinal distributions:");
    for i in 0..20 {
        println!("{:+5.2}  {:.5}  {:.5}  {:.5}", results[0].1.sites_final.k_centers[i],
            results[0].1.sites_final.probabilities[i],
            results[1].1.sites_final.probabilities[i],
            results[2].1.sites_final.probabilities[i]);
    }
}
