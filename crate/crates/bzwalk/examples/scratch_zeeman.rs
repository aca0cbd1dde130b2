use bzwalk::observables::zeeman_overlap;
use std::time::Instant;

fn main() {
    for f0 in [0.2, 2.0] {
        let t0 = Instant::now();
        let z = zeeman_overlap(20.0, f0).unwrap();
        println!(
            "F0={f0}: 1-|I|^2 = {:.3e} (paper ~{})  shift est {:.4e} measured {:.4e}  [{:?}]",
            1.0 - z.overlap_sq,
            if f0 < 1.0 { "4e-5" } else { "3e-3" },
            z.shift_estimate,
            z.measured_shift,
            t0.elapsed()
        );
    }
}
