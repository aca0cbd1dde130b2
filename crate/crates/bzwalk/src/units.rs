//! Physical constants, recoil-unit conversions, and validated parameter
//! containers shared by all modules.
//!
//! Internally every simulation module works in rescaled units: lengths in
//! lattice constants d_L, energies in recoil energies E_R = (hbar k_R)^2/(2M)
//! with k_R = pi/d_L, quasimomenta in k_R, and times in hbar/E_R. Conversion
//! to and from SI happens only here, at the configuration boundary.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Species constants. Only the combinations E_R and mu_B * mF * gF enter the
/// simulation, so swapping species is a matter of building another instance.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PhysicalConstants {
    /// Reduced Planck constant (J s).
    pub hbar: f64,
    /// Atomic mass (kg).
    pub mass: f64,
    /// Bohr magneton (J/T).
    pub bohr_magneton: f64,
    /// Product mF * gF of magnetic quantum number and Lande factor for the
    /// pseudo-spin pair (the two states carry +/- this value).
    pub mf_gf: f64,
}

impl PhysicalConstants {
    /// 87Rb with |F=1,mF=-1> / |F=2,mF=+1>-type pair (|mF gF| = 1/2).
    pub fn rb87() -> Self {
        Self {
            hbar: 1.054_571_817e-34,
            mass: 1.443_160_6e-25,
            bohr_magneton: 9.274_010_08e-24,
            mf_gf: 0.5,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.hbar <= 0.0 || self.mass <= 0.0 || self.bohr_magneton <= 0.0 {
            return Err(Error::InvalidParameter(
                "hbar, mass, and bohr_magneton must be strictly positive".into(),
            ));
        }
        if self.mf_gf == 0.0 || !self.mf_gf.is_finite() {
            return Err(Error::InvalidParameter(
                "mf_gf must be a nonzero finite real".into(),
            ));
        }
        Ok(())
    }

    /// Recoil momentum k_R = pi / d_L (1/m).
    pub fn recoil_momentum(&self, d_lattice: f64) -> f64 {
        PI / d_lattice
    }

    /// Recoil energy E_R = (hbar k_R)^2 / (2 M) (J).
    pub fn recoil_energy(&self, d_lattice: f64) -> f64 {
        let kr = self.recoil_momentum(d_lattice);
        (self.hbar * kr).powi(2) / (2.0 * self.mass)
    }

    /// Rescaled time unit hbar / E_R (s).
    pub fn recoil_time(&self, d_lattice: f64) -> f64 {
        self.hbar / self.recoil_energy(d_lattice)
    }
}

/// Lattice and trap parameters. Depth, force, coupling, and step duration are
/// already expressed in recoil units (V/E_R, F d_L/E_R, g/(E_R d_L), E_R
/// tau/hbar); lengths and trap frequencies are SI.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LatticeConfig {
    /// Lattice constant d_L (m).
    pub d_lattice: f64,
    /// Lattice depth V/E_R.
    pub v0: f64,
    /// State-dependent force F d_L/E_R.
    pub f0: f64,
    /// Zeeman zero point in units of d_L.
    pub x_bar: f64,
    /// Longitudinal trap frequency (rad/s).
    pub omega_x: f64,
    /// Radial trap frequency (rad/s).
    pub omega_r: f64,
    /// 1-D coupling g_1D/(E_R d_L).
    pub g1d: f64,
    /// Shift-step duration E_R tau/hbar.
    pub tau0: f64,
}

impl LatticeConfig {
    pub fn validate(&self) -> Result<()> {
        if self.d_lattice <= 0.0 {
            return Err(Error::InvalidParameter("d_lattice must be positive".into()));
        }
        if self.tau0 <= 0.0 {
            return Err(Error::InvalidParameter("tau0 must be positive".into()));
        }
        if self.v0 < 0.0 {
            return Err(Error::InvalidParameter("v0 must be nonnegative".into()));
        }
        if self.omega_x < 0.0 || self.omega_r < self.omega_x {
            return Err(Error::InvalidParameter(
                "trap frequencies must satisfy omega_r >= omega_x >= 0".into(),
            ));
        }
        Ok(())
    }

    /// 1-D coupling from scattering length, radial trap, and atom number:
    /// g_1D = 2 hbar a_s omega_r N, returned in rescaled units E_R d_L.
    pub fn g1d_rescaled(
        scattering_length: f64,
        omega_r: f64,
        atoms: f64,
        d_lattice: f64,
        constants: &PhysicalConstants,
    ) -> f64 {
        let g_si = 2.0 * constants.hbar * scattering_length * omega_r * atoms;
        g_si / (constants.recoil_energy(d_lattice) * d_lattice)
    }
}

/// Fully dimensionless parameter set used by the simulation modules.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RescaledParams {
    pub v0: f64,
    pub f0: f64,
    pub tau0: f64,
    /// Step size in the zone, delta_k0 = F0 tau0 / pi.
    pub delta_k0: f64,
    pub x_bar: f64,
    /// hbar omega_x / E_R.
    pub omega_x: f64,
    /// hbar omega_r / E_R.
    pub omega_r: f64,
    pub g1d: f64,
}

/// Convert a validated configuration to rescaled units.
pub fn to_rescaled(config: &LatticeConfig, constants: &PhysicalConstants) -> Result<RescaledParams> {
    constants.validate()?;
    config.validate()?;
    let er = constants.recoil_energy(config.d_lattice);
    Ok(RescaledParams {
        v0: config.v0,
        f0: config.f0,
        tau0: config.tau0,
        delta_k0: config.f0 * config.tau0 / PI,
        x_bar: config.x_bar,
        omega_x: constants.hbar * config.omega_x / er,
        omega_r: constants.hbar * config.omega_r / er,
        g1d: config.g1d,
    })
}

/// Inverse of [`to_rescaled`]; needs the lattice constant to restore the trap
/// frequencies.
pub fn from_rescaled(
    params: &RescaledParams,
    d_lattice: f64,
    constants: &PhysicalConstants,
) -> Result<LatticeConfig> {
    constants.validate()?;
    if d_lattice <= 0.0 {
        return Err(Error::InvalidParameter("d_lattice must be positive".into()));
    }
    let er = constants.recoil_energy(d_lattice);
    let config = LatticeConfig {
        d_lattice,
        v0: params.v0,
        f0: params.f0,
        x_bar: params.x_bar,
        omega_x: params.omega_x * er / constants.hbar,
        omega_r: params.omega_r * er / constants.hbar,
        g1d: params.g1d,
        tau0: params.tau0,
    };
    config.validate()?;
    Ok(config)
}

/// Ring geometry of the walk: n sites spanning the zone exactly once,
/// n * delta_k0 = 2 by construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WalkGeometry {
    pub n_sites: usize,
    pub steps: usize,
}

impl WalkGeometry {
    /// Step size delta_k0 = 2/n in units of k_R.
    pub fn delta_k0(&self) -> f64 {
        2.0 / self.n_sites as f64
    }

    /// Quasimomentum of site i in units of k_R; sites run over
    /// (-1, 1] as k_i = (i + 1 - n/2) * delta_k0, so k = 0 sits at
    /// i = n/2 - 1 and k = 1 (the zone edge) at i = n - 1.
    pub fn site_k(&self, i: usize) -> f64 {
        let half = (self.n_sites / 2) as f64;
        (i as f64 + 1.0 - half) * self.delta_k0()
    }

    /// Index of the site whose bin contains quasimomentum k0 (folded into
    /// the zone).
    pub fn site_of(&self, k0: f64) -> usize {
        let dk = self.delta_k0();
        // Offset so that bin boundaries sit halfway between sites.
        let t = ((k0 + 1.0 - dk / 2.0).rem_euclid(2.0)) / dk;
        (t.floor() as usize) % self.n_sites
    }

    /// True when j steps cannot carry the walker across the zone edge.
    pub fn confined_to_zone(&self, steps: usize) -> bool {
        steps * 2 <= self.n_sites
    }
}

/// Build a walk geometry with n sites and the given step budget.
pub fn walk_geometry_for(n_sites: usize, full_coverage_steps: usize) -> Result<WalkGeometry> {
    if n_sites == 0 || n_sites % 2 != 0 {
        return Err(Error::InvalidParameter(format!(
            "n_sites must be even and positive, got {n_sites}"
        )));
    }
    Ok(WalkGeometry { n_sites, steps: full_coverage_steps })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig3_config() -> LatticeConfig {
        LatticeConfig {
            d_lattice: 532e-9,
            v0: 20.0,
            f0: 0.2,
            x_bar: 0.0,
            omega_x: 2.0 * PI * 10.0,
            omega_r: 2.0 * PI * 100.0,
            g1d: 0.0,
            tau0: PI / 2.0,
        }
    }

    #[test]
    fn rescaled_depth_passthrough() {
        // d_L = 532 nm, V = 20 E_R stays V0 = 20.
        let c = PhysicalConstants::rb87();
        let r = to_rescaled(&fig3_config(), &c).unwrap();
        assert_eq!(r.v0, 20.0);
        // 532 nm 87Rb recoil frequency is close to 2 kHz.
        let er_hz = c.recoil_energy(532e-9) / (2.0 * PI * c.hbar);
        assert!((er_hz - 2030.0).abs() < 30.0, "E_R/h = {er_hz} Hz");
    }

    #[test]
    fn step_size_from_force_and_duration() {
        let c = PhysicalConstants::rb87();
        let mut cfg = fig3_config();
        cfg.f0 = 0.2;
        cfg.tau0 = PI * 0.1;
        let r = to_rescaled(&cfg, &c).unwrap();
        assert!((r.delta_k0 - 0.02).abs() < 1e-15);

        cfg.f0 = 0.0;
        let r = to_rescaled(&cfg, &c).unwrap();
        assert_eq!(r.delta_k0, 0.0);
    }

    #[test]
    fn round_trip_identity() {
        let c = PhysicalConstants::rb87();
        let cfg = LatticeConfig {
            d_lattice: 400e-9,
            v0: 7.5,
            f0: 0.37,
            x_bar: 0.21,
            omega_x: 2.0 * PI * 4.2,
            omega_r: 2.0 * PI * 310.0,
            g1d: 0.093,
            tau0: 1.3,
        };
        let r = to_rescaled(&cfg, &c).unwrap();
        let back = from_rescaled(&r, cfg.d_lattice, &c).unwrap();
        let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(1e-300);
        assert!(rel(back.omega_x, cfg.omega_x) < 1e-12);
        assert!(rel(back.omega_r, cfg.omega_r) < 1e-12);
        assert!(rel(back.tau0, cfg.tau0) < 1e-12);
        assert_eq!(back.v0, cfg.v0);
        assert_eq!(back.x_bar, cfg.x_bar);
    }

    #[test]
    fn invalid_parameters_rejected() {
        let c = PhysicalConstants::rb87();
        let mut cfg = fig3_config();
        cfg.d_lattice = -1.0;
        assert!(matches!(to_rescaled(&cfg, &c), Err(Error::InvalidParameter(_))));
        let mut cfg = fig3_config();
        cfg.tau0 = 0.0;
        assert!(to_rescaled(&cfg, &c).is_err());
    }

    #[test]
    fn geometry_covers_zone_exactly() {
        let g = walk_geometry_for(20, 10).unwrap();
        assert!((g.delta_k0() - 0.1).abs() < 1e-15);
        assert_eq!(g.n_sites as f64 * g.delta_k0(), 2.0);
        assert!((g.steps as f64 * g.delta_k0() - 1.0).abs() < 1e-15);
        // Smallest ring.
        let g2 = walk_geometry_for(2, 1).unwrap();
        assert_eq!(g2.delta_k0(), 1.0);
        // Winding geometry is legal.
        let g3 = walk_geometry_for(20, 40).unwrap();
        assert!((g3.steps as f64 * g3.delta_k0() - 4.0).abs() < 1e-12);
        assert!(!g3.confined_to_zone(g3.steps));
        // Odd or zero site counts are not.
        assert!(walk_geometry_for(7, 3).is_err());
        assert!(walk_geometry_for(0, 3).is_err());
    }

    #[test]
    fn site_k_layout() {
        let g = walk_geometry_for(20, 10).unwrap();
        assert!((g.site_k(0) + 0.9).abs() < 1e-15);
        assert!((g.site_k(9)).abs() < 1e-15);
        assert!((g.site_k(19) - 1.0).abs() < 1e-15);
        // Binning: site centers map to themselves, including the folded edge.
        for i in 0..20 {
            assert_eq!(g.site_of(g.site_k(i)), i);
        }
        assert_eq!(g.site_of(-1.0), 19); // -1 folds onto the +1 edge site
        assert_eq!(g.site_of(0.04), 9);
        assert_eq!(g.site_of(0.06), 10);
    }
}
