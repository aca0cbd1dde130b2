//! Measurement and comparison layer: quasimomentum site distributions, walk
//! fidelity, the Zeeman-distortion overlap integral, band-population
//! projection, and spatial-freezing metrics.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::band::{compute_bands, peierls_phases};
use crate::error::{Error, Result};
use crate::grid::{GridSpec, SpinorField};
use crate::idealwalk::{walk_evolve, WalkOperatorSpec, WalkState};
use crate::numerics::tv_distance;
use crate::propagator::{ground_state_imaginary_time, run_interval, DriveSchedule, Ramp, RampShape, Segment};
use crate::units::WalkGeometry;

/// Probabilities on the walk sites.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SiteDistribution {
    /// Site centers in k_R units.
    pub k_centers: Vec<f64>,
    /// Normalized probabilities.
    pub probabilities: Vec<f64>,
    /// 1 - (captured weight)/(total norm) before normalization; how much
    /// momentum density the zone binning failed to account for.
    pub residual: f64,
}

impl SiteDistribution {
    pub fn from_walk_state(state: &WalkState) -> Self {
        let g = state.geometry;
        Self {
            k_centers: (0..g.n_sites).map(|i| g.site_k(i)).collect(),
            probabilities: state.site_probabilities(),
            residual: 1.0 - state.norm_sqr(),
        }
    }

    pub fn tv_distance(&self, other: &Self) -> f64 {
        tv_distance(&self.probabilities, &other.probabilities)
    }
}

/// Fold the momentum density into the first zone and integrate over bins of
/// width delta_k0 centered on the walk sites. Spin-summed.
pub fn site_distribution(state: &SpinorField, geometry: &WalkGeometry) -> Result<SiteDistribution> {
    let (up, down) = state.momentum_spinor();
    let weights: Vec<f64> = up
        .iter()
        .zip(&down)
        .map(|(u, d)| u.norm_sqr() + d.norm_sqr())
        .collect();
    site_distribution_from_bins(state, geometry, &weights)
}

/// Per-spin variant of [`site_distribution`].
pub fn site_distribution_spin(
    state: &SpinorField,
    geometry: &WalkGeometry,
    spin: crate::grid::Spin,
) -> Result<SiteDistribution> {
    let (up, down) = state.momentum_spinor();
    let weights: Vec<f64> = match spin {
        crate::grid::Spin::Up => up.iter().map(|u| u.norm_sqr()).collect(),
        crate::grid::Spin::Down => down.iter().map(|d| d.norm_sqr()).collect(),
    };
    site_distribution_from_bins(state, geometry, &weights)
}

fn site_distribution_from_bins(
    state: &SpinorField,
    geometry: &WalkGeometry,
    weights: &[f64],
) -> Result<SiteDistribution> {
    let n = geometry.n_sites;
    // At least four momentum-grid bins per site, or the binning is
    // meaningless.
    if state.grid.dk0() > geometry.delta_k0() / 4.0 + 1e-12 {
        return Err(Error::InvalidParameter(format!(
            "momentum grid spacing {} too coarse for site width {}",
            state.grid.dk0(),
            geometry.delta_k0()
        )));
    }
    let mut probs = vec![0.0; n];
    let mut captured = 0.0;
    let total: f64 = weights.iter().sum();
    for (r, &w) in weights.iter().enumerate() {
        let k0 = state.grid.k0_at_bin(r);
        let site = geometry.site_of(k0);
        probs[site] += w;
        captured += w;
    }
    let residual = 1.0 - captured / total;
    let norm: f64 = probs.iter().sum();
    for p in probs.iter_mut() {
        *p /= norm;
    }
    Ok(SiteDistribution {
        k_centers: (0..n).map(|i| geometry.site_k(i)).collect(),
        probabilities: probs,
        residual,
    })
}

/// Squared overlap |<a|b>|^2 over the n x 2 amplitude space.
pub fn walk_fidelity(a: &WalkState, b: &WalkState) -> Result<f64> {
    if a.geometry != b.geometry {
        return Err(Error::InvalidParameter("walk states on different geometries".into()));
    }
    Ok(a.inner(b).norm_sqr())
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct InfidelityPoint {
    pub v0: f64,
    pub steps: usize,
    pub infidelity: f64,
}

/// Infidelity 1 - F between the Peierls-decorated walk and the zero-phase
/// reference, per lattice depth and step count (x_bar = 0, periodic ring).
///
/// The reference walk drops the dynamical band-energy phases (geometric
/// phases vanish for the symmetric lattice); the fidelity is insensitive to
/// the k-independent part of the dynamical phase, so what remains measures
/// the genuine band-dispersion decoration.
pub fn infidelity_curve(
    v0_list: &[f64],
    f0: f64,
    geometry: &WalkGeometry,
    j_list: &[usize],
    n_k: usize,
    m_max: usize,
) -> Result<Vec<InfidelityPoint>> {
    let tau0 = PI * geometry.delta_k0() / f0;
    let j_max = j_list.iter().copied().max().unwrap_or(0);
    let mut out = Vec::with_capacity(v0_list.len() * j_list.len());

    for &v0 in v0_list {
        let bands = compute_bands(v0, m_max, n_k, 1)?;
        let table = peierls_phases(&bands, geometry, f0, tau0, 0.0)?;
        let decorated = WalkOperatorSpec::hadamard(*geometry).with_table(table);
        let reference = WalkOperatorSpec::hadamard(*geometry);

        let mut dec = WalkState::symmetric_at_center(*geometry);
        let mut refs = dec.clone();
        let mut j_done = 0;
        let mut js: Vec<usize> = j_list.to_vec();
        js.sort_unstable();
        for &j in &js {
            let advance = j - j_done;
            dec = walk_evolve(&dec, &decorated, advance)?;
            refs = walk_evolve(&refs, &reference, advance)?;
            j_done = j;
            let f = walk_fidelity(&refs, &dec)?;
            out.push(InfidelityPoint { v0, steps: j, infidelity: 1.0 - f });
        }
        debug_assert!(j_done <= j_max);
    }
    Ok(out)
}

/// Population of one Bloch band in a continuum state: the momentum
/// amplitudes are regrouped by zone quasimomentum and projected on the
/// band's plane-wave coefficient vectors (solved exactly per zone bin).
pub fn band_population(state: &SpinorField, v0: f64, m_max: usize, band: usize) -> Result<f64> {
    let n = state.grid.n;
    let length = state.grid.length;
    // Distinct zone quasimomenta on the momentum grid: k0 = 2 m / L folds to
    // L distinct values spaced dk0 over (-1, 1].
    let zone_bins = length.round() as usize;
    if (length - zone_bins as f64).abs() > 1e-9 {
        return Err(Error::InvalidParameter(
            "band projection needs an integer domain length in d_L".into(),
        ));
    }
    let (up, down) = state.momentum_spinor();

    // bins_by_zone[z] collects (copy index m, bin r); zone index z from
    // k_zone = -1 + 2 (z+1)/zone_bins.
    let dim = 2 * m_max + 1;
    let mut pop = 0.0;
    let mut total = 0.0;
    for z in 0..zone_bins {
        let k_zone = -1.0 + 2.0 * (z as f64 + 1.0) / zone_bins as f64;
        // Bloch solve at k_zone.
        let diag: Vec<f64> = (0..dim)
            .map(|j| {
                let m = j as f64 - m_max as f64;
                (k_zone + 2.0 * m).powi(2) + v0 / 2.0
            })
            .collect();
        let off = vec![-v0 / 4.0; dim - 1];
        let (_, vecs) = crate::numerics::eigh_tridiagonal(&diag, &off)?;
        let coeffs = &vecs[band];

        let mut amp_up = C64::new(0.0, 0.0);
        let mut amp_down = C64::new(0.0, 0.0);
        for (j, &c) in coeffs.iter().enumerate() {
            let m = j as f64 - m_max as f64;
            let k0 = k_zone + 2.0 * m;
            // Momentum bin carrying k0 = 2 mm / L.
            let mm = (k0 * length / 2.0).round();
            if (k0 - 2.0 * mm / length).abs() > 1e-9 || mm.abs() >= (n / 2) as f64 {
                continue;
            }
            let r = if mm >= 0.0 { mm as usize } else { (mm + n as f64) as usize };
            amp_up += c * up[r];
            amp_down += c * down[r];
        }
        pop += amp_up.norm_sqr() + amp_down.norm_sqr();
    }
    for a in up.iter().chain(&down) {
        total += a.norm_sqr();
    }
    Ok(pop / total)
}

/// Result of the Zeeman-distortion overlap computation.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ZeemanOverlap {
    /// Squared modulus of the overlap between the two adiabatically
    /// force-dressed well states.
    pub overlap_sq: f64,
    /// Harmonic-approximation estimate F0/(pi^2 V0) of the differential
    /// trap-minimum shift, in d_L.
    pub shift_estimate: f64,
    /// Measured <x>_+ - <x>_- of the dressed states, in d_L.
    pub measured_shift: f64,
}

/// Overlap integral between the lattice well states adiabatically dressed by
/// +F and -F.
///
/// The state is prepared in the central well (a pinning trap stands in for
/// the experiment's longitudinal confinement, strong enough to hold the well
/// against the tilt yet orders of magnitude softer than the well itself),
/// then the force is smoothly ramped to +F0 and -F0 in two separate runs;
/// the squared overlap of the two dressed states is returned.
pub fn zeeman_overlap(v0: f64, f0: f64) -> Result<ZeemanOverlap> {
    if v0 < 5.0 {
        return Err(Error::InvalidParameter(format!(
            "zeeman_overlap needs a bound lowest band (V0 >= 5), got V0 = {v0}"
        )));
    }
    let grid = GridSpec::new(1024, 16.0, 0.0)?;
    // Pinly trap: differential minimum shift 2 F0/(pi^2 w^2) kept below 1/8
    // site.
    let w_pin = (16.0 * f0).sqrt().max(1.0);
    let prep = DriveSchedule::static_drive(v0, 0.0, w_pin, 0.0, 0.0);
    let seed = ground_state_imaginary_time(grid, &prep, 0.0, 1e-12)?;

    let t_ramp = 40.0;
    let t_settle = 8.0;
    let dressed = |sign: f64| -> Result<SpinorField> {
        let mut schedule = DriveSchedule::static_drive(v0, 0.0, w_pin, 0.0, 0.0);
        schedule.force = Ramp {
            segments: vec![Segment {
                t0: 0.0,
                t1: t_ramp,
                shape: RampShape::Smoothstep,
                from: 0.0,
                to: sign * f0,
                jump: false,
            }],
        };
        let mut state = seed.clone();
        state.time = 0.0;
        let dt = 0.1 / (v0 + f0 * grid.length / 2.0 + w_pin * w_pin);
        run_interval(&mut state, &schedule, t_ramp + t_settle, dt, false)?;
        Ok(state)
    };
    let plus = dressed(1.0)?;
    let minus = dressed(-1.0)?;

    let dx = grid.dx();
    let overlap: C64 = plus
        .psi_up
        .iter()
        .zip(&minus.psi_up)
        .map(|(a, b)| a.conj() * b)
        .sum::<C64>()
        * dx;
    let (x_plus, _) = plus.position_moments();
    let (x_minus, _) = minus.position_moments();

    Ok(ZeemanOverlap {
        overlap_sq: overlap.norm_sqr(),
        shift_estimate: f0 / (PI * PI * v0),
        measured_shift: x_plus - x_minus,
    })
}

/// Rms width of a sampled density profile restricted to the window
/// `center +/- halfwidth`: the intra-peak width of one quasimomentum peak.
pub fn peak_width(profile: &[(f64, f64)], center: f64, halfwidth: f64) -> f64 {
    let pts: Vec<(f64, f64)> = profile
        .iter()
        .copied()
        .filter(|(k, _)| (k - center).abs() <= halfwidth)
        .collect();
    let total: f64 = pts.iter().map(|(_, w)| w).sum();
    if total <= 0.0 {
        return 0.0;
    }
    let mean: f64 = pts.iter().map(|(k, w)| k * w).sum::<f64>() / total;
    let var: f64 = pts.iter().map(|(k, w)| (k - mean).powi(2) * w).sum::<f64>() / total;
    var.sqrt()
}

/// Maximum total-variation distance of the position densities in a
/// trajectory against the first snapshot.
pub fn spatial_freeze_metric(snapshots: &[Vec<f64>]) -> f64 {
    assert!(snapshots.len() >= 2, "need at least two snapshots");
    let first = &snapshots[0];
    snapshots[1..]
        .iter()
        .map(|s| tv_distance(first, s))
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::band::BandData;
    use crate::units::walk_geometry_for;

    #[test]
    fn bloch_state_bins_to_single_site() {
        let g = walk_geometry_for(20, 10).unwrap();
        let grid = GridSpec::new(2048, 128.0, 0.0).unwrap();
        let bands = compute_bands(10.0, 24, 320, 1).unwrap();
        // k = 0.5 sits on both the momentum grid (2m/L with m = 32) and a
        // site center (site 14).
        let state = bands.state_on_grid(grid, 0, 0.5);
        let dist = site_distribution(&state, &g).unwrap();
        assert!((dist.probabilities[14] - 1.0).abs() < 1e-6);
        for (i, p) in dist.probabilities.iter().enumerate() {
            if i != 14 {
                assert!(*p < 1e-6, "site {i} has {p}");
            }
        }
        assert!(dist.residual.abs() < 1e-9);
    }

    #[test]
    fn uniform_weights_give_flat_distribution() {
        // A synthetic incoherent mixture: equal weight in every momentum bin
        // inside the zone.
        let g = walk_geometry_for(20, 10).unwrap();
        let grid = GridSpec::new(2048, 160.0, 0.0).unwrap();
        let state = SpinorField::zero(grid);
        let weights: Vec<f64> = (0..grid.n)
            .map(|r| {
                let k = grid.k0_at_bin(r);
                if (-1.0..1.0).contains(&k) { 1.0 } else { 0.0 }
            })
            .collect();
        let dist = site_distribution_from_bins(&state, &g, &weights).unwrap();
        // Bins sitting exactly on site boundaries may tip either way, so
        // flatness holds to one bin weight; normalization is exact.
        let one_bin = 1.0 / 160.0;
        for p in &dist.probabilities {
            assert!((p - 0.05).abs() <= one_bin + 1e-12, "p = {p}");
        }
        let total: f64 = dist.probabilities.iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn coarse_momentum_grid_rejected() {
        let g = walk_geometry_for(20, 10).unwrap();
        // length 16 -> dk0 = 0.125 > delta_k0/4 = 0.025.
        let grid = GridSpec::new(256, 16.0, 0.0).unwrap();
        let state = SpinorField::gaussian(grid, 0.0, 2.0, 0.0).unwrap();
        assert!(matches!(
            site_distribution(&state, &g),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn fidelity_basics() {
        let g = walk_geometry_for(20, 10).unwrap();
        let a = WalkState::symmetric_at_center(g);
        assert!((walk_fidelity(&a, &a).unwrap() - 1.0).abs() < 1e-15);
        let up = WalkState::single_site(g, 4, (C64::new(1.0, 0.0), C64::new(0.0, 0.0))).unwrap();
        let down = WalkState::single_site(g, 4, (C64::new(0.0, 0.0), C64::new(1.0, 0.0))).unwrap();
        assert_eq!(walk_fidelity(&up, &down).unwrap(), 0.0);
        // Symmetry and global-phase invariance.
        let mut b = a.clone();
        for amp in b.up.iter_mut().chain(&mut b.down) {
            *amp *= C64::from_polar(1.0, 1.234);
        }
        let f_ab = walk_fidelity(&a, &b).unwrap();
        let f_ba = walk_fidelity(&b, &a).unwrap();
        assert!((f_ab - 1.0).abs() < 1e-12);
        assert!((f_ab - f_ba).abs() < 1e-15);
        // Geometry mismatch errors.
        let g2 = walk_geometry_for(10, 5).unwrap();
        let c = WalkState::symmetric_at_center(g2);
        assert!(walk_fidelity(&a, &c).is_err());
    }

    #[test]
    fn flat_band_infidelity_floor() {
        // A flat synthetic band produces zero infidelity at any step count.
        let g = walk_geometry_for(20, 10).unwrap();
        let data = BandData::synthetic(240, |_| 2.0, |_| 0.0);
        let tau0 = PI * g.delta_k0() / 0.2;
        let table = peierls_phases(&data, &g, 0.2, tau0, 0.0).unwrap();
        let decorated = WalkOperatorSpec::hadamard(g).with_table(table);
        let reference = WalkOperatorSpec::hadamard(g);
        let base = WalkState::symmetric_at_center(g);
        for j in [10, 100, 500] {
            let a = walk_evolve(&base, &decorated, j).unwrap();
            let b = walk_evolve(&base, &reference, j).unwrap();
            let infid = 1.0 - walk_fidelity(&a, &b).unwrap();
            assert!(infid < 1e-12, "j={j}: {infid}");
        }
    }

    #[test]
    fn spatial_freeze_of_static_state() {
        let a = vec![0.2, 0.5, 0.3];
        assert_eq!(spatial_freeze_metric(&[a.clone(), a.clone(), a]), 0.0);
    }
}
