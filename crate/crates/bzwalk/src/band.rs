//! Bloch problem of the sin^2 lattice: band energies, Bloch states, the
//! Berry-Zak connection, Peierls phase tables for the walk, and the
//! Landau-Zener validity check.
//!
//! The single-particle Hamiltonian at quasimomentum k (in k_R units) is
//! tridiagonal in the plane-wave basis e^{i(pi k + 2 pi m)x}:
//! diagonal (k + 2m)^2 + V0/2, off-diagonal -V0/4.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::grid::{GridSpec, SpinorField};
use crate::numerics::{eigh_tridiagonal, simpson_uniform, wrap_phase, PeriodicSpline};
use crate::units::WalkGeometry;

/// Band-structure samples over the Brillouin zone (-1, 1] in k_R units.
#[derive(Debug, Clone)]
pub struct BandData {
    pub v0: f64,
    pub m_max: usize,
    /// Quasimomentum samples, k_i = -1 + 2(i+1)/n_k.
    pub k_samples: Vec<f64>,
    /// energies[band][k] in E_R (includes the mean lattice offset V0/2).
    pub energies: Vec<Vec<f64>>,
    /// bloch_states[band][k][j]: real plane-wave coefficients, j = m + m_max.
    pub bloch_states: Vec<Vec<Vec<f64>>>,
    /// Berry-Zak connection samples of the tracked band, in units of d_L.
    pub connection: Vec<f64>,
    /// Band whose connection is tracked (and whose Peierls phases are built).
    pub band_index: usize,
}

impl BandData {
    pub fn n_k(&self) -> usize {
        self.k_samples.len()
    }

    fn dk(&self) -> f64 {
        2.0 / self.n_k() as f64
    }

    /// Periodic spline of E(k) for one band.
    pub fn energy_spline(&self, band: usize) -> PeriodicSpline {
        PeriodicSpline::new(self.k_samples[0], self.dk(), &self.energies[band])
    }

    /// Periodic spline of the tracked band's connection A(k).
    pub fn connection_spline(&self) -> PeriodicSpline {
        PeriodicSpline::new(self.k_samples[0], self.dk(), &self.connection)
    }

    /// Mean of E(k) over the zone for one band.
    pub fn band_center(&self, band: usize) -> f64 {
        let e = &self.energies[band];
        e.iter().sum::<f64>() / e.len() as f64
    }

    /// Max - min of E(k) for one band.
    pub fn band_width(&self, band: usize) -> f64 {
        let e = &self.energies[band];
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for &v in e {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        hi - lo
    }

    /// Plane-wave coefficients of one Bloch state.
    pub fn state_coefficients(&self, band: usize, ik: usize) -> &[f64] {
        &self.bloch_states[band][ik]
    }

    /// Index of the sample closest to quasimomentum k0 (folded into the zone).
    pub fn nearest_k_index(&self, k0: f64) -> usize {
        let dk = self.dk();
        let t = (k0 - self.k_samples[0]).rem_euclid(2.0) / dk;
        (t.round() as usize) % self.n_k()
    }

    /// Spin-up Bloch wave of one band at quasimomentum k0 on a position
    /// grid, psi(x) = sum_m c_m e^{i(pi k0 + 2 pi m)x}, normalized. k0 is
    /// snapped to the nearest band sample.
    pub fn state_on_grid(&self, grid: GridSpec, band: usize, k0: f64) -> SpinorField {
        let ik = self.nearest_k_index(k0);
        let k = self.k_samples[ik];
        let coeffs = &self.bloch_states[band][ik];
        let mut f = SpinorField::zero(grid);
        for i in 0..grid.n {
            let x = grid.x_at(i);
            let mut amp = num_complex::Complex64::new(0.0, 0.0);
            for (j, &c) in coeffs.iter().enumerate() {
                let m = j as f64 - self.m_max as f64;
                amp += c * num_complex::Complex64::from_polar(1.0, (PI * k + 2.0 * PI * m) * x);
            }
            f.psi_up[i] = amp;
        }
        f.normalize();
        f
    }

    /// Synthetic band data for model studies and tests: E(k) and A(k) given
    /// as closures, sampled like [`compute_bands`] output. Bloch states are
    /// filled with the trivial single-plane-wave vector.
    pub fn synthetic(
        n_k: usize,
        energy: impl Fn(f64) -> f64,
        connection: impl Fn(f64) -> f64,
    ) -> Self {
        let k_samples: Vec<f64> = (0..n_k).map(|i| -1.0 + 2.0 * (i as f64 + 1.0) / n_k as f64).collect();
        let energies = vec![k_samples.iter().map(|&k| energy(k)).collect::<Vec<_>>()];
        let conn = k_samples.iter().map(|&k| connection(k)).collect();
        let mut state = vec![0.0; 3];
        state[1] = 1.0;
        let bloch_states = vec![vec![state; n_k]];
        Self {
            v0: 0.0,
            m_max: 1,
            k_samples,
            energies,
            bloch_states,
            connection: conn,
            band_index: 0,
        }
    }
}

/// Diagonalize the Bloch Hamiltonian on an n_k-point zone grid.
///
/// Energies converge exponentially in m_max; the default m_max = 32 keeps
/// the lowest bands converged far below 1e-10 E_R for V0 up to ~100.
pub fn compute_bands(v0: f64, m_max: usize, n_k: usize, n_bands: usize) -> Result<BandData> {
    if m_max < 8 {
        return Err(Error::InvalidParameter(format!("m_max must be >= 8, got {m_max}")));
    }
    if n_k < 16 {
        return Err(Error::InvalidParameter(format!("n_k must be >= 16, got {n_k}")));
    }
    if n_bands == 0 || n_bands > m_max {
        return Err(Error::InvalidParameter(format!(
            "n_bands must be in 1..=m_max, got {n_bands}"
        )));
    }
    if v0 < 0.0 {
        return Err(Error::InvalidParameter("v0 must be nonnegative".into()));
    }

    let k_samples: Vec<f64> = (0..n_k).map(|i| -1.0 + 2.0 * (i as f64 + 1.0) / n_k as f64).collect();
    let dim = 2 * m_max + 1;

    let solve_one = |&k: &f64| -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
        let diag: Vec<f64> = (0..dim)
            .map(|j| {
                let m = j as f64 - m_max as f64;
                (k + 2.0 * m).powi(2) + v0 / 2.0
            })
            .collect();
        let off = vec![-v0 / 4.0; dim - 1];
        let (vals, vecs) = eigh_tridiagonal(&diag, &off)
            .map_err(|e| Error::Numerical(format!("Bloch eigensolve at k={k}: {e}")))?;
        Ok((vals[..n_bands].to_vec(), vecs[..n_bands].to_vec()))
    };

    #[cfg(feature = "parallel")]
    let solved: Result<Vec<_>> = {
        use rayon::prelude::*;
        k_samples.par_iter().map(solve_one).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let solved: Result<Vec<_>> = k_samples.iter().map(solve_one).collect();
    let solved = solved?;

    let mut energies = vec![vec![0.0; n_k]; n_bands];
    let mut bloch_states = vec![vec![Vec::new(); n_k]; n_bands];
    for (ik, (vals, vecs)) in solved.into_iter().enumerate() {
        for b in 0..n_bands {
            energies[b][ik] = vals[b];
            bloch_states[b][ik] = vecs[b].clone();
        }
    }

    let mut data = BandData {
        v0,
        m_max,
        k_samples,
        energies,
        bloch_states,
        connection: vec![0.0; n_k],
        band_index: 0,
    };
    // At V0 = 0 the bands touch at the zone edge and the overlap chain is
    // ill-defined there; the natural plane-wave gauge has A = 0 identically.
    if v0 > 0.0 {
        let zak = zak_connection(&mut data)?;
        debug_assert!(zak.is_finite());
    }
    Ok(data)
}

/// Result of the Berry-Zak computation.
#[derive(Debug, Clone)]
pub struct ZakResult {
    /// A(k) in units of d_L at the band grid points.
    pub connection: Vec<f64>,
    /// Loop integral of A over the zone, reported mod 2 pi.
    pub zak_phase: f64,
}

/// Berry-Zak connection and phase of the tracked band, from log-overlaps of
/// adjacent Bloch states on the closed k-grid (the grid wraps through the
/// reciprocal-vector shift c_m -> c_{m+1}).
pub fn berry_zak_connection(data: &BandData) -> Result<ZakResult> {
    let states: Vec<Vec<C64>> = data.bloch_states[data.band_index]
        .iter()
        .map(|v| v.iter().map(|&x| C64::new(x, 0.0)).collect())
        .collect();
    // G-shifted closing state: coefficient at m comes from m+1.
    let mut closed: Vec<C64> = states[0][1..].to_vec();
    closed.push(C64::new(0.0, 0.0));
    let (connection, zak_phase) = berry_phase_of_loop(&states, &closed, data.dk())?;
    Ok(ZakResult { connection, zak_phase })
}

/// Fill `data.connection` in place and return the Zak phase.
fn zak_connection(data: &mut BandData) -> Result<f64> {
    let res = berry_zak_connection(data)?;
    data.connection = res.connection;
    Ok(res.zak_phase)
}

/// Discrete Berry phase of a loop of states sampled at spacing dk (in k_R
/// units), closed by `closing` (the representative of the first state after
/// one full loop: the G-shifted Bloch vector for a band, or the first state
/// itself for a plainly periodic family). Returns per-sample connection
/// values in d_L units and the loop phase mod 2 pi.
///
/// The loop phase is gauge invariant; the per-link values are reported in a
/// sign-smoothed gauge (real eigenvectors come with arbitrary signs).
pub fn berry_phase_of_loop(states: &[Vec<C64>], closing: &[C64], dk: f64) -> Result<(Vec<f64>, f64)> {
    let n = states.len();
    if n < 3 {
        return Err(Error::InvalidParameter("berry phase needs >= 3 states".into()));
    }
    let overlap = |a: &[C64], b: &[C64]| -> C64 {
        a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
    };
    let closed = closing.to_vec();

    let mut links = Vec::with_capacity(n);
    let mut sign = 1.0;
    let mut loop_product = C64::new(1.0, 0.0);
    for i in 0..n {
        let next: &[C64] = if i + 1 < n { &states[i + 1] } else { &closed };
        let mut o = overlap(&states[i], next);
        loop_product *= o;
        // Sign-smoothing: absorb diagonalizer sign flips, leaving genuine
        // smooth phases intact.
        o *= sign;
        if o.re < 0.0 {
            o = -o;
            sign = -sign;
        }
        if o.norm() < 1e-8 {
            return Err(Error::GaugeSingularity(format!(
                "adjacent Bloch overlap |<u_{i}|u_{}>| = {:.3e};  refine the k-grid",
                i + 1,
                o.norm()
            )));
        }
        links.push(-o.arg());
    }
    if loop_product.norm() < 1e-12 {
        return Err(Error::GaugeSingularity("vanishing Wilson loop".into()));
    }
    let zak = wrap_phase(-loop_product.arg());
    // Connection sample at k_i: average of the two adjacent link phases,
    // converted to d_L units (phase = pi * A_dL * dk).
    let conn: Vec<f64> = (0..n)
        .map(|i| {
            let prev = links[(i + n - 1) % n];
            0.5 * (prev + links[i]) / (PI * dk)
        })
        .collect();
    Ok((conn, zak))
}

/// Peierls phases per walk site, split into dynamical (Zeeman + band-energy)
/// and geometrical contributions. Phases are stored wrapped to (-pi, pi].
#[derive(Debug, Clone)]
pub struct PeierlsTable {
    pub geometry: WalkGeometry,
    /// Total phase on the up-link leaving site i.
    pub phi_plus: Vec<f64>,
    /// Total phase on the down-link leaving site i.
    pub phi_minus: Vec<f64>,
    /// Dynamical part (Zeeman constant + band-energy integral).
    pub dynamical_plus: Vec<f64>,
    pub dynamical_minus: Vec<f64>,
    /// Geometrical part (connection integral).
    pub geometric_plus: Vec<f64>,
    pub geometric_minus: Vec<f64>,
    /// k-independent Zeeman contribution to the up-link (minus sign for the
    /// down-link), kept separately so the twist content can be recovered.
    pub zeeman_plus: f64,
}

impl PeierlsTable {
    /// All-zero table on a geometry (the reference walk).
    pub fn zero(geometry: WalkGeometry) -> Self {
        let n = geometry.n_sites;
        Self {
            geometry,
            phi_plus: vec![0.0; n],
            phi_minus: vec![0.0; n],
            dynamical_plus: vec![0.0; n],
            dynamical_minus: vec![0.0; n],
            geometric_plus: vec![0.0; n],
            geometric_minus: vec![0.0; n],
            zeeman_plus: 0.0,
        }
    }

    /// Table with the dynamical band-energy part removed (Zeeman and
    /// geometric parts kept): the reference model used when comparing against
    /// a deep lattice.
    pub fn without_band_part(&self) -> Self {
        let n = self.geometry.n_sites;
        let mut t = Self::zero(self.geometry);
        for i in 0..n {
            t.dynamical_plus[i] = self.zeeman_plus;
            t.dynamical_minus[i] = -self.zeeman_plus;
            t.geometric_plus[i] = self.geometric_plus[i];
            t.geometric_minus[i] = self.geometric_minus[i];
            t.phi_plus[i] = wrap_phase(t.dynamical_plus[i] + t.geometric_plus[i]);
            t.phi_minus[i] = wrap_phase(t.dynamical_minus[i] + t.geometric_minus[i]);
        }
        t.zeeman_plus = self.zeeman_plus;
        t
    }

    /// Twist content of the table: the phase a zero-phase walk must carry on
    /// its wrap link to be gauge-equivalent, excluding the band-energy part
    /// (which is not a twist but a per-step dynamical profile). Equal to
    /// 2 pi x_bar - zak for the lattice tables built here.
    pub fn recovered_twist(&self) -> f64 {
        let geom_sum: f64 = self.geometric_plus.iter().sum();
        wrap_phase(-(self.geometry.n_sites as f64 * self.zeeman_plus + geom_sum))
    }
}

/// Build the Peierls table of the tracked band for a walk geometry.
///
/// Dynamical part: phi_D_+/-(k) = -/+ F0 xbar tau0 - (pi/F0) * segment
/// integral of E; geometrical part: pi * segment integral of A (A in d_L
/// units). Integrals use composite Simpson directly on the band grid when
/// the walk sites align with it, and exact integrals of a periodic cubic
/// spline otherwise. Requested segments wrap periodically around the zone.
pub fn peierls_phases(
    data: &BandData,
    geometry: &WalkGeometry,
    f0: f64,
    tau0: f64,
    x_bar: f64,
) -> Result<PeierlsTable> {
    if tau0 <= 0.0 {
        return Err(Error::InvalidParameter("tau0 must be positive".into()));
    }
    if f0 < 0.0 {
        return Err(Error::InvalidParameter("f0 must be nonnegative".into()));
    }
    // The step F0 tau0 / pi must match the geometry's site spacing, else the
    // table does not describe this ring.
    if f0 > 0.0 && (f0 * tau0 / PI - geometry.delta_k0()).abs() > 1e-9 {
        return Err(Error::InvalidParameter(format!(
            "F0 tau0/pi = {} does not match the site spacing {}",
            f0 * tau0 / PI,
            geometry.delta_k0()
        )));
    }
    let n = geometry.n_sites;
    let dk_step = geometry.delta_k0();
    let zeeman_plus = -f0 * x_bar * tau0;

    let band = data.band_index;
    let e_segment = segment_integrator(data, &data.energies[band])?;
    let a_segment = segment_integrator(data, &data.connection)?;
    let e_spline = data.energy_spline(band);

    let mut table = PeierlsTable::zero(*geometry);
    table.zeeman_plus = zeeman_plus;
    for i in 0..n {
        let k = geometry.site_k(i);
        // Band-energy phase: -(pi/F0) Int_k^{k+dk} E. For F0 -> 0 the step
        // size vanishes and the integral reduces to -E(k) tau0.
        let (band_plus, band_minus) = if f0 == 0.0 || dk_step == 0.0 {
            let e = e_spline.eval(k);
            (-e * tau0, -e * tau0)
        } else {
            (
                -(PI / f0) * e_segment(k, k + dk_step),
                -(PI / f0) * e_segment(k - dk_step, k),
            )
        };
        let geo_plus = PI * a_segment(k, k + dk_step);
        let geo_minus = -PI * a_segment(k - dk_step, k);
        table.dynamical_plus[i] = zeeman_plus + band_plus;
        table.dynamical_minus[i] = -zeeman_plus + band_minus;
        table.geometric_plus[i] = geo_plus;
        table.geometric_minus[i] = geo_minus;
        table.phi_plus[i] = wrap_phase(table.dynamical_plus[i] + geo_plus);
        table.phi_minus[i] = wrap_phase(table.dynamical_minus[i] + geo_minus);
    }
    Ok(table)
}

/// Returns a closure integrating the sampled band quantity over [a, b]
/// (k_R units, b >= a - the caller orients segments), wrapping periodically.
fn segment_integrator<'a>(
    data: &'a BandData,
    samples: &'a [f64],
) -> Result<impl Fn(f64, f64) -> f64 + 'a> {
    let n_k = data.n_k();
    let dk = data.dk();
    let k0 = data.k_samples[0];
    let spline = PeriodicSpline::new(k0, dk, samples);
    Ok(move |a: f64, b: f64| -> f64 {
        debug_assert!(b >= a);
        // Aligned fast path: both endpoints on grid points and an even
        // number of intervals in between.
        let ia = (a - k0) / dk;
        let ib = (b - k0) / dk;
        let on_grid = |t: f64| (t - t.round()).abs() < 1e-9;
        let span = (ib - ia).round() as i64;
        if on_grid(ia) && on_grid(ib) && span >= 2 && span % 2 == 0 {
            let start = ia.round() as i64;
            let vals: Vec<f64> = (0..=span)
                .map(|s| samples[((start + s).rem_euclid(n_k as i64)) as usize])
                .collect();
            simpson_uniform(&vals, dk)
        } else {
            spline.integrate(a, b)
        }
    })
}

/// Landau-Zener safety margin V0 / sqrt(32 F0 / pi^2). Ratios >= 5 are
/// flagged safe; F0 = 0 returns an infinite (always safe) margin.
#[derive(Debug, Clone, Copy)]
pub struct LandauZenerMargin {
    pub ratio: f64,
    pub safe: bool,
}

pub fn landau_zener_check(v0: f64, f0: f64) -> LandauZenerMargin {
    assert!(v0 >= 0.0 && f0 >= 0.0, "landau_zener_check: negative inputs");
    if f0 == 0.0 {
        return LandauZenerMargin { ratio: f64::INFINITY, safe: true };
    }
    let ratio = v0 / (32.0 * f0 / (PI * PI)).sqrt();
    LandauZenerMargin { ratio, safe: ratio >= 5.0 }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::walk_geometry_for;

    #[test]
    fn free_particle_band_is_folded_parabola() {
        let data = compute_bands(0.0, 8, 64, 2).unwrap();
        for (ik, &k) in data.k_samples.iter().enumerate() {
            assert!((data.energies[0][ik] - k * k).abs() < 1e-12, "k={k}");
        }
    }

    #[test]
    fn band_symmetry_and_ordering() {
        let data = compute_bands(20.0, 32, 128, 4).unwrap();
        let n_k = data.n_k();
        // E(k) = E(-k): sample i and its mirror across k=0.
        for i in 0..n_k {
            let k = data.k_samples[i];
            if k.abs() >= 1.0 - 1e-12 {
                continue;
            }
            let j = data.nearest_k_index(-k);
            let (a, b) = (data.energies[0][i], data.energies[0][j]);
            assert!((a - b).abs() / a.abs().max(1.0) < 1e-10, "k={k}");
        }
        // Ordering across bands.
        for b in 0..3 {
            for ik in 0..n_k {
                assert!(data.energies[b][ik] <= data.energies[b + 1][ik] + 1e-12);
            }
        }
        // Unit-norm Bloch coefficient vectors.
        for b in 0..4 {
            for ik in (0..n_k).step_by(17) {
                let norm: f64 = data.bloch_states[b][ik].iter().map(|c| c * c).sum();
                assert!((norm - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn basis_size_convergence() {
        let coarse = compute_bands(20.0, 16, 32, 1).unwrap();
        let fine = compute_bands(20.0, 32, 32, 1).unwrap();
        for ik in 0..32 {
            assert!((coarse.energies[0][ik] - fine.energies[0][ik]).abs() < 1e-10);
        }
    }

    #[test]
    fn deep_lattice_gap_near_harmonic() {
        // Gap between bands 0 and 1 at k=0 approaches 2 sqrt(V0).
        let v0 = 40.0;
        let data = compute_bands(v0, 32, 64, 2).unwrap();
        let ik = data.nearest_k_index(0.0);
        let gap = data.energies[1][ik] - data.energies[0][ik];
        let harmonic = 2.0 * v0.sqrt();
        assert!(
            (gap - harmonic).abs() / harmonic < 0.10,
            "gap {gap} vs harmonic {harmonic}"
        );
    }

    #[test]
    fn zak_phase_vanishes_for_sin2_lattice() {
        let data = compute_bands(20.0, 32, 256, 1).unwrap();
        let zak = berry_zak_connection(&data).unwrap();
        assert!(zak.zak_phase.abs() < 1e-6, "zak = {}", zak.zak_phase);
        // Natural-gauge connection vanishes identically at V0=0 too.
        let free = compute_bands(0.0, 16, 128, 1).unwrap();
        for &a in &free.connection {
            assert!(a.abs() < 1e-9);
        }
    }

    #[test]
    fn zak_phase_grid_convergence() {
        let coarse = berry_zak_connection(&compute_bands(20.0, 32, 128, 1).unwrap()).unwrap();
        let fine = berry_zak_connection(&compute_bands(20.0, 32, 256, 1).unwrap()).unwrap();
        assert!((wrap_phase(coarse.zak_phase - fine.zak_phase)).abs() < 1e-8);
    }

    #[test]
    fn winding_loop_carries_pi_berry_phase() {
        // Lower eigenstates of d(k).sigma with d = (cos pi k, sin pi k, 0)
        // wind once around the equator; the loop Berry phase is pi. This
        // exercises the complex path of the Wilson-loop helper with an
        // explicitly periodic closure.
        let n = 200;
        let dk = 2.0 / n as f64;
        let states: Vec<Vec<C64>> = (0..n)
            .map(|i| {
                let k = -1.0 + dk * (i as f64 + 1.0);
                vec![
                    C64::new(1.0 / 2.0_f64.sqrt(), 0.0),
                    -C64::from_polar(1.0 / 2.0_f64.sqrt(), PI * k),
                ]
            })
            .collect();
        let closing = states[0].clone();
        let (_, phase) = berry_phase_of_loop(&states, &closing, dk).unwrap();
        assert!((phase.abs() - PI).abs() < 1e-10, "phase = {phase}");
        // A constant family carries no phase.
        let flat: Vec<Vec<C64>> = (0..n).map(|_| vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)]).collect();
        let (conn, phase0) = berry_phase_of_loop(&flat, &flat[0].clone(), dk).unwrap();
        assert!(phase0.abs() < 1e-12);
        assert!(conn.iter().all(|a| a.abs() < 1e-12));
    }

    #[test]
    fn flat_band_gauge_condition_exact() {
        // Constant E, zero A: s(k) = phi_+(k) + phi_-(k + dk) must be a
        // k-independent constant.
        let data = BandData::synthetic(240, |_| 1.5, |_| 0.0);
        let geometry = walk_geometry_for(20, 10).unwrap();
        let t = peierls_phases(&data, &geometry, 0.2, PI / 2.0, 0.0).unwrap();
        let n = geometry.n_sites;
        let s: Vec<f64> = (0..n)
            .map(|i| t.phi_plus[i] + t.phi_minus[(i + 1) % n])
            .collect();
        let mean = s.iter().sum::<f64>() / n as f64;
        for v in &s {
            assert!((v - mean).abs() < 1e-12);
        }
    }

    #[test]
    fn zeeman_only_table_sums_to_twist() {
        // E = 0, A = 0, x_bar = 0.25: sum of up-link phases = -n dk x_bar
        // (= -2 pi x_bar), and the recovered twist is +2 pi x_bar.
        let data = BandData::synthetic(240, |_| 0.0, |_| 0.0);
        let geometry = walk_geometry_for(20, 10).unwrap();
        let x_bar = 0.25;
        let t = peierls_phases(&data, &geometry, 0.2, PI / 2.0, x_bar).unwrap();
        let total: f64 = t.phi_plus.iter().sum();
        let expect = -(geometry.n_sites as f64) * geometry.delta_k0() * PI * x_bar;
        assert!((wrap_phase(total) - wrap_phase(expect)).abs() < 1e-10);
        assert!((t.recovered_twist() - wrap_phase(2.0 * PI * x_bar)).abs() < 1e-10);
        // phi_Dated with x_bar = 0.5 d_L and E = 0: constant -/+ F0 0.5 tau0.
        let t2 = peierls_phases(&data, &geometry, 0.2, PI / 2.0, 0.5).unwrap();
        for i in 0..geometry.n_sites {
            assert!((t2.dynamical_plus[i] + 0.2 * 0.5 * (PI / 2.0)).abs() < 1e-12);
            assert!((t2.dynamical_minus[i] - 0.2 * 0.5 * (PI / 2.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn split_parts_sum_to_total() {
        let data = compute_bands(12.0, 32, 240, 1).unwrap();
        let geometry = walk_geometry_for(20, 10).unwrap();
        let t = peierls_phases(&data, &geometry, 0.2, PI / 2.0, 0.3).unwrap();
        for i in 0..20 {
            let total = wrap_phase(t.dynamical_plus[i] + t.geometric_plus[i]);
            assert!((wrap_phase(total - t.phi_plus[i])).abs() < 1e-10);
            let total_m = wrap_phase(t.dynamical_minus[i] + t.geometric_minus[i]);
            assert!((wrap_phase(total_m - t.phi_minus[i])).abs() < 1e-10);
        }
    }

    #[test]
    fn aligned_and_spline_integrals_agree() {
        // n_k = 240 aligns with n = 20 (12 intervals per step); n_k = 250
        // does not and takes the spline path. The tables must agree closely.
        let geometry = walk_geometry_for(20, 10).unwrap();
        let ta = peierls_phases(&compute_bands(8.0, 32, 240, 1).unwrap(), &geometry, 0.2, PI / 2.0, 0.0).unwrap();
        let tb = peierls_phases(&compute_bands(8.0, 32, 250, 1).unwrap(), &geometry, 0.2, PI / 2.0, 0.0).unwrap();
        for i in 0..20 {
            assert!((ta.phi_plus[i] - tb.phi_plus[i]).abs() < 1e-8, "site {i}");
        }
    }

    #[test]
    fn landau_zener_margins() {
        let m = landau_zener_check(20.0, 0.2);
        assert!((m.ratio - 24.84).abs() < 0.05, "ratio {}", m.ratio);
        assert!(m.safe);
        let m2 = landau_zener_check(2.0, 0.2);
        assert!((m2.ratio - 2.484).abs() < 0.01);
        assert!(!m2.safe);
        let m3 = landau_zener_check(20.0, 0.0);
        assert!(m3.ratio.is_infinite() && m3.safe);
    }
}
