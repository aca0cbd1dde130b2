use bzwalk::band::{compute_bands, peierls_phases};
use bzwalk::idealwalk::{walk_evolve, WalkOperatorSpec, WalkState};
use bzwalk::numerics::tv_distance;
use bzwalk::protocol::{run_protocol, ProtocolConfig};
use bzwalk::units::walk_geometry_for;
use std::time::Instant;

fn main() {
    let g = walk_geometry_for(20, 10).unwrap();
    let mut config = ProtocolConfig::walk_defaults(g);
    config.v0 = 2.0;
    let t0 = Instant::now();
    let result = run_protocol(&config).unwrap();
    println!("elapsed: {:?}; LZ safe: {}", t0.elapsed(), result.lz_safe);
    for r in &result.records {
        println!("{:18} t={:8.1} norm={:.9} k_rms={:.4}", r.name, r.t_end, r.norm, r.k_rms);
    }

    let base = WalkState::symmetric_at_center(g);
    let plain = walk_evolve(&base, &WalkOperatorSpec::hadamard(g), 10).unwrap();
    let tv_plain = tv_distance(&result.sites_final.probabilities, &plain.site_probabilities());

    let bands = compute_bands(2.0, 32, 640, 1).unwrap();
    let table = peierls_phases(&bands, &g, 0.2, config.tau0(), 0.0).unwrap();
    let decorated = walk_evolve(&base, &WalkOperatorSpec::hadamard(g).with_table(table), 10).unwrap();
    let tv_dyn = tv_distance(&result.sites_final.probabilities, &decorated.site_probabilities());

    println!("TV vs zero-phase reference:      {:.4}", tv_plain);
    println!("TV vs dynamical-phase reference: {:.4}", tv_dyn);
    let pd = decorated.site_probabilities();
    println!("\nsite  k       p_sim     p_dyn-ref  p_plain-ref");
    let pp = plain.site_probabilities();
    for i in 0..20 {
        println!("{:4} {:+5.2}  {:.5}   {:.5}    {:.5}", i, result.sites_final.k_centers[i],
                 result.sites_final.probabilities[i], pd[i], pp[i]);
    }
}
