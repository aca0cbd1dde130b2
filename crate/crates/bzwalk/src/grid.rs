//! Position grid and the two-component continuum wavefunction.
//!
//! Positions are in units of d_L, quasimomenta in units of k_R = pi/d_L; a
//! plane wave at k0 (k_R units) reads e^{i pi k0 x}. On a periodic domain of
//! length L the discrete momentum grid is k0 = 2 m / L with integer m, so a
//! domain of integer length resolves the zone (-1, 1] with L/2 points per
//! unit of k0.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64 as C64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform periodic position grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Number of points; a power of two.
    pub n: usize,
    /// Domain length in d_L.
    pub length: f64,
    /// Domain center in d_L.
    pub center: f64,
}

impl GridSpec {
    pub fn new(n: usize, length: f64, center: f64) -> Result<Self> {
        if !n.is_power_of_two() || n < 4 {
            return Err(Error::InvalidParameter(format!(
                "grid size must be a power of two >= 4, got {n}"
            )));
        }
        if length <= 0.0 {
            return Err(Error::InvalidParameter("grid length must be positive".into()));
        }
        Ok(Self { n, length, center })
    }

    pub fn dx(&self) -> f64 {
        self.length / self.n as f64
    }

    pub fn x_at(&self, i: usize) -> f64 {
        self.center - self.length / 2.0 + i as f64 * self.dx()
    }

    /// Momentum-grid spacing in k_R units.
    pub fn dk0(&self) -> f64 {
        2.0 / self.length
    }

    /// Quasimomentum (k_R units) carried by FFT bin r.
    pub fn k0_at_bin(&self, r: usize) -> f64 {
        let m = if r < self.n.div_ceil(2) {
            r as f64
        } else {
            r as f64 - self.n as f64
        };
        2.0 * m / self.length
    }
}

fn fft_pair(n: usize) -> (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>) {
    static PLANS: OnceLock<Mutex<HashMap<usize, (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>)>>> =
        OnceLock::new();
    let mut map = PLANS.get_or_init(|| Mutex::new(HashMap::new())).lock().unwrap();
    map.entry(n)
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            (planner.plan_fft_forward(n), planner.plan_fft_inverse(n))
        })
        .clone()
}

/// Unnormalized forward DFT in place.
pub(crate) fn fft_forward(buf: &mut [C64]) {
    fft_pair(buf.len()).0.process(buf);
}

/// Inverse DFT in place, including the 1/N normalization.
pub(crate) fn fft_inverse(buf: &mut [C64]) {
    let n = buf.len();
    fft_pair(n).1.process(buf);
    let scale = 1.0 / n as f64;
    for a in buf.iter_mut() {
        *a *= scale;
    }
}

/// Two-component wavefunction on a [`GridSpec`].
#[derive(Debug, Clone)]
pub struct SpinorField {
    pub grid: GridSpec,
    pub psi_up: Vec<C64>,
    pub psi_down: Vec<C64>,
    /// Current rescaled time E_R t / hbar.
    pub time: f64,
}

impl SpinorField {
    pub fn zero(grid: GridSpec) -> Self {
        Self {
            psi_up: vec![C64::new(0.0, 0.0); grid.n],
            psi_down: vec![C64::new(0.0, 0.0); grid.n],
            grid,
            time: 0.0,
        }
    }

    /// Normalized Gaussian in the spin-up component: rms position width
    /// sigma (d_L), centered at x0, carrying plane-wave momentum k0 (k_R).
    pub fn gaussian(grid: GridSpec, x0: f64, sigma: f64, k0: f64) -> Result<Self> {
        if sigma <= 0.0 {
            return Err(Error::InvalidParameter("sigma must be positive".into()));
        }
        let mut f = Self::zero(grid);
        for i in 0..grid.n {
            let x = grid.x_at(i);
            let env = (-((x - x0) * (x - x0)) / (4.0 * sigma * sigma)).exp();
            f.psi_up[i] = C64::from_polar(env, std::f64::consts::PI * k0 * x);
        }
        f.normalize();
        Ok(f)
    }

    /// Total norm integral sum (|psi_up|^2 + |psi_down|^2) dx.
    pub fn norm(&self) -> f64 {
        let s: f64 = self
            .psi_up
            .iter()
            .chain(&self.psi_down)
            .map(|a| a.norm_sqr())
            .sum();
        s * self.grid.dx()
    }

    pub fn normalize(&mut self) {
        let n = self.norm().sqrt();
        if n > 0.0 {
            for a in self.psi_up.iter_mut().chain(&mut self.psi_down) {
                *a /= n;
            }
        }
    }

    /// Spin-summed position density, integrating to the norm with dx.
    pub fn position_density(&self) -> Vec<f64> {
        self.psi_up
            .iter()
            .zip(&self.psi_down)
            .map(|(u, d)| u.norm_sqr() + d.norm_sqr())
            .collect()
    }

    /// Per-spin momentum amplitudes in FFT bin order (unitary scaling);
    /// bin r carries quasimomentum `grid.k0_at_bin(r)`.
    pub fn momentum_spinor(&self) -> (Vec<C64>, Vec<C64>) {
        let scale = 1.0 / (self.grid.n as f64).sqrt();
        let mut up = self.psi_up.clone();
        let mut down = self.psi_down.clone();
        fft_forward(&mut up);
        fft_forward(&mut down);
        for a in up.iter_mut().chain(&mut down) {
            *a *= scale;
        }
        (up, down)
    }

    /// Spin-summed momentum density over the FFT bins, normalized so that
    /// sum rho_r * dk0 equals the norm.
    pub fn momentum_density(&self) -> Vec<f64> {
        let (up, down) = self.momentum_spinor();
        let raw: Vec<f64> = up
            .iter()
            .zip(&down)
            .map(|(u, d)| u.norm_sqr() + d.norm_sqr())
            .collect();
        // Unitary DFT preserves sum |psi|^2; convert the discrete weight to
        // a density in k0.
        let w = self.grid.dx() / self.grid.dk0();
        raw.into_iter().map(|p| p * w).collect()
    }

    /// Mean and variance of position (spin-summed).
    pub fn position_moments(&self) -> (f64, f64) {
        let rho = self.position_density();
        let dx = self.grid.dx();
        let total: f64 = rho.iter().sum::<f64>() * dx;
        let mean: f64 = rho
            .iter()
            .enumerate()
            .map(|(i, p)| self.grid.x_at(i) * p)
            .sum::<f64>()
            * dx
            / total;
        let var: f64 = rho
            .iter()
            .enumerate()
            .map(|(i, p)| (self.grid.x_at(i) - mean).powi(2) * p)
            .sum::<f64>()
            * dx
            / total;
        (mean, var)
    }

    /// Mean and variance of quasimomentum for one spin component (k_R
    /// units); `None` selects the spin-summed density.
    pub fn momentum_moments(&self, spin: Option<Spin>) -> (f64, f64) {
        let (up, down) = self.momentum_spinor();
        let density = |a: &[C64]| -> Vec<f64> { a.iter().map(|c| c.norm_sqr()).collect() };
        let rho = match spin {
            Some(Spin::Up) => density(&up),
            Some(Spin::Down) => density(&down),
            None => up
                .iter()
                .zip(&down)
                .map(|(u, d)| u.norm_sqr() + d.norm_sqr())
                .collect(),
        };
        let total: f64 = rho.iter().sum();
        let mean: f64 = rho
            .iter()
            .enumerate()
            .map(|(r, p)| self.grid.k0_at_bin(r) * p)
            .sum::<f64>()
            / total;
        let var: f64 = rho
            .iter()
            .enumerate()
            .map(|(r, p)| (self.grid.k0_at_bin(r) - mean).powi(2) * p)
            .sum::<f64>()
            / total;
        (mean, var)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spin {
    Up,
    Down,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_momentum_layout() {
        let g = GridSpec::new(8, 4.0, 0.0).unwrap();
        assert_eq!(g.dx(), 0.5);
        assert_eq!(g.dk0(), 0.5);
        assert_eq!(g.k0_at_bin(0), 0.0);
        assert_eq!(g.k0_at_bin(1), 0.5);
        assert_eq!(g.k0_at_bin(4), -2.0);
        assert_eq!(g.k0_at_bin(7), -0.5);
        assert!(GridSpec::new(5, 1.0, 0.0).is_err());
    }

    #[test]
    fn gaussian_moments_match() {
        let g = GridSpec::new(1024, 64.0, 0.0).unwrap();
        let f = SpinorField::gaussian(g, 1.5, 2.0, 0.25).unwrap();
        assert!((f.norm() - 1.0).abs() < 1e-12);
        let (xm, xv) = f.position_moments();
        assert!((xm - 1.5).abs() < 1e-9);
        assert!((xv - 4.0).abs() < 1e-6);
        let (km, kv) = f.momentum_moments(Some(Spin::Up));
        assert!((km - 0.25).abs() < 1e-9, "k mean {km}");
        // Minimum-uncertainty packet: sigma_x * sigma_k = 1/pi in (d_L, k_R)
        // units, i.e. k-variance = 1/(pi sigma_x)^2 / 4... explicitly:
        // sigma_k = 1/(2 pi sigma_x).
        let sk = 1.0 / (2.0 * std::f64::consts::PI * 2.0);
        assert!((kv.sqrt() - sk).abs() / sk < 1e-3, "sigma_k {}", kv.sqrt());
    }

    #[test]
    fn momentum_density_normalization() {
        let g = GridSpec::new(512, 32.0, -3.0).unwrap();
        let f = SpinorField::gaussian(g, -3.0, 1.2, -0.4).unwrap();
        let rho = f.momentum_density();
        let total: f64 = rho.iter().sum::<f64>() * g.dk0();
        assert!((total - 1.0).abs() < 1e-12);
    }
}
