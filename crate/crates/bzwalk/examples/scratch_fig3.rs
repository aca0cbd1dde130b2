use bzwalk::idealwalk::{walk_evolve, WalkOperatorSpec, WalkState};
use bzwalk::numerics::tv_distance;
use bzwalk::protocol::{run_protocol, ProtocolConfig};
use bzwalk::units::walk_geometry_for;
use std::time::Instant;

fn main() {
    let g = walk_geometry_for(20, 10).unwrap();
    let config = ProtocolConfig::walk_defaults(g);
    let t0 = Instant::now();
    let result = run_protocol(&config).unwrap();
    println!("protocol elapsed: {:?}", t0.elapsed());
    for r in &result.records {
        println!(
            "{:18} t={:8.1} norm={:.9} x_mean={:+8.3} x_rms={:7.3} k_rms={:.4}",
            r.name, r.t_end, r.norm, r.x_mean, r.x_rms, r.k_rms
        );
    }
    println!("kick used: t_expand={:.1} t_kick={:.2}", result.kick_used.0, result.kick_used.1);
    println!("LZ safe: {}", result.lz_safe);

    // Ideal reference: symmetric start, Hadamard coin, zero phases.
    let reference = walk_evolve(&WalkState::symmetric_at_center(g), &WalkOperatorSpec::hadamard(g), 10).unwrap();
    let ref_probs = reference.site_probabilities();

    let tv_final = tv_distance(&result.sites_final.probabilities, &ref_probs);
    let tv_walk = tv_distance(&result.sites_after_walk.probabilities, &ref_probs);
    println!("TV(final readout, ideal) = {:.4}", tv_final);
    println!("TV(after walk,   ideal) = {:.4}", tv_walk);
    println!("readout consistency TV   = {:.4}", result.readout_consistency_tv);
    println!("site residual (out-of-zone weight): {:.2e}", result.sites_final.residual);

    println!("\nsite  k       p_sim     p_ideal");
    for i in 0..20 {
        println!(
            "{:4} {:+5.2}  {:.5}  {:.5}",
            i,
            result.sites_final.k_centers[i],
            result.sites_final.probabilities[i],
            ref_probs[i]
        );
    }
}
