use bzwalk::observables::infidelity_curve;
use bzwalk::units::walk_geometry_for;
use std::time::Instant;

fn main() {
    let g = walk_geometry_for(20, 10).unwrap();
    let t0 = Instant::now();
    let v0s: Vec<f64> = vec![2.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0, 35.0, 40.0, 45.0, 50.0];
    let pts = infidelity_curve(&v0s, 0.2, &g, &[10, 100, 2000], 640, 32).unwrap();
    for p in &pts {
        println!("V0={:5.1} j={:5} 1-F = {:.3e}", p.v0, p.steps, p.infidelity);
    }
    println!("elapsed: {:?}", t0.elapsed());
}
