//! Magnetic-noise decoherence analytics for the walk, plus a Monte-Carlo
//! noisy-walk engine to validate them: step-size fluctuations (spin
//! dephasing), stochastic Zeeman phases during shifts, and coin-pulse
//! process fidelity under field noise.
//!
//! Spectra are one-sided densities S(omega) with a low-frequency cutoff
//! omega_c (the inverse of the time between recalibrations); their integral
//! over [omega_c, inf) is the total variance of the fluctuating quantity.
//! The formulas are unit-agnostic: pass spectra, durations, and hbar in any
//! consistent system (SI throughout the command-line tools).

use num_complex::Complex64 as C64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::idealwalk::{walk_evolve, WalkOperatorSpec, WalkState};
use crate::numerics::trapezoid;
use crate::units::PhysicalConstants;

/// One-sided noise spectral density on an explicit (typically log-spaced)
/// frequency grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NoiseSpectrum {
    /// Angular frequencies, ascending (rad/s).
    pub omega: Vec<f64>,
    /// Spectral density values, same length as `omega`.
    pub s: Vec<f64>,
    /// Low-frequency cutoff; integrals run from here.
    pub omega_c: f64,
}

impl NoiseSpectrum {
    pub fn from_samples(omega: Vec<f64>, s: Vec<f64>, omega_c: f64) -> Result<Self> {
        if omega.len() != s.len() || omega.len() < 2 {
            return Err(Error::InvalidParameter("spectrum needs >= 2 matched samples".into()));
        }
        if omega.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter("spectrum grid must ascend".into()));
        }
        if s.iter().any(|&v| v < 0.0 || !v.is_finite()) {
            return Err(Error::InvalidParameter("spectral density must be >= 0".into()));
        }
        if omega[0] > omega_c {
            return Err(Error::InvalidParameter(format!(
                "spectrum grid starts at {} and does not cover omega_c = {omega_c}",
                omega[0]
            )));
        }
        Ok(Self { omega, s, omega_c })
    }

    /// Flat density between omega_c and omega_max carrying the given total
    /// variance, on a log grid.
    pub fn band_limited(total_variance: f64, omega_c: f64, omega_max: f64, n: usize) -> Self {
        assert!(omega_max > omega_c && omega_c > 0.0 && n >= 2);
        let level = total_variance / (omega_max - omega_c);
        let omega: Vec<f64> = (0..n)
            .map(|i| omega_c * (omega_max / omega_c).powf(i as f64 / (n - 1) as f64))
            .collect();
        let s = vec![level; n];
        Self { omega, s, omega_c }
    }

    /// Total variance by trapezoid over the stored grid from omega_c.
    pub fn variance(&self) -> f64 {
        self.integrate_weighted(|_| 1.0)
    }

    /// Trapezoid of w(omega) * S(omega) over [omega_c, grid end].
    pub fn integrate_weighted(&self, weight: impl Fn(f64) -> f64) -> f64 {
        let y: Vec<f64> = self
            .omega
            .iter()
            .zip(&self.s)
            .map(|(&om, &sv)| if om < self.omega_c { 0.0 } else { weight(om) * sv })
            .collect();
        trapezoid(&self.omega, &y)
    }

    /// Scale the density by a constant factor.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            omega: self.omega.clone(),
            s: self.s.iter().map(|v| v * factor).collect(),
            omega_c: self.omega_c,
        }
    }

    /// Fraction of the variance held in the single largest grid interval;
    /// near 1 for single-tone spectra, where the Gaussian-phase closure is
    /// unreliable.
    pub fn narrowband_fraction(&self) -> f64 {
        let total = self.variance();
        if total <= 0.0 {
            return 0.0;
        }
        self.omega
            .windows(2)
            .zip(self.s.windows(2))
            .map(|(om, sv)| 0.5 * (om[1] - om[0]) * (sv[0] + sv[1]))
            .fold(0.0_f64, f64::max)
            / total
    }
}

/// Shift-phase noise composition S_{B' xbar} = S_B0 + B'^2 S_xi + xi^2 S_B'.
/// All three spectra must share one frequency grid.
pub fn compose_shift_noise(
    s_b0: &NoiseSpectrum,
    s_xi: &NoiseSpectrum,
    s_bprime: &NoiseSpectrum,
    b_prime: f64,
    xi: f64,
) -> Result<NoiseSpectrum> {
    if s_b0.omega != s_xi.omega || s_b0.omega != s_bprime.omega {
        return Err(Error::InvalidParameter(
            "shift-noise composition needs identical frequency grids".into(),
        ));
    }
    let s = s_b0
        .s
        .iter()
        .zip(&s_xi.s)
        .zip(&s_bprime.s)
        .map(|((&a, &b), &c)| a + b_prime * b_prime * b + xi * xi * c)
        .collect();
    NoiseSpectrum::from_samples(s_b0.omega.clone(), s, s_b0.omega_c)
}

/// Spectral window of a duration-tau operation:
/// f(omega) = tau sinc^2(omega tau / 2) / pi, normalized to unit integral.
pub fn window_function(omega: f64, tau: f64) -> f64 {
    assert!(tau > 0.0, "window_function: tau must be positive");
    let x = omega * tau / 2.0;
    let sinc = if x.abs() < 1e-8 { 1.0 - x * x / 6.0 } else { x.sin() / x };
    tau * sinc * sinc / std::f64::consts::PI
}

/// Step-size variance <delta k^2> = Int pi f(omega) S_F(omega) tau / hbar^2.
/// With an SI force spectrum the result is in (1/m)^2; in rescaled units
/// (S_F in (E_R/d_L)^2 per unit rescaled frequency, hbar = 1, tau = tau0)
/// it comes out in k_R^2 directly.
pub fn step_size_variance(s_f: &NoiseSpectrum, tau: f64, hbar: f64) -> Result<f64> {
    if tau <= 0.0 || hbar <= 0.0 {
        return Err(Error::InvalidParameter("tau and hbar must be positive".into()));
    }
    let pi = std::f64::consts::PI;
    Ok(s_f.integrate_weighted(|om| pi * window_function(om, tau)) * tau / (hbar * hbar))
}

/// Quasimomentum peak width sigma_k = 2 pi/(beta n) in 1/d_L units, i.e.
/// 2/(beta n) in k_R units, for site-resolution parameter beta.
pub fn sigma_k_for(beta: f64, n_sites: usize) -> f64 {
    2.0 / (beta * n_sites as f64)
}

/// Per-step dephasing probability p = <delta k^2> / (4 sigma_k^2), clipped
/// to [0, 1].
pub fn dephasing_per_step(var_k: f64, sigma_k: f64) -> f64 {
    assert!(sigma_k > 0.0, "dephasing_per_step: sigma_k must be positive");
    (var_k / (4.0 * sigma_k * sigma_k)).clamp(0.0, 1.0)
}

/// Slow-noise upper bound p <= (beta/2)^2 <delta B'^2>/<B'>^2 in terms of
/// the relative gradient stability.
pub fn gradient_dephasing_bound(beta: f64, relative_gradient_rms: f64) -> f64 {
    ((beta / 2.0) * relative_gradient_rms).powi(2).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PhaseNoise {
    /// Variance of the per-step relative Zeeman phase (rad^2).
    pub var_phi: f64,
    /// Coherence factor C = exp(-var/2) under the Gaussian-phase closure.
    pub coherence: f64,
    /// Set when most of the spectral weight sits in one grid interval: the
    /// Gaussian closure is then unreliable.
    pub narrowband_warning: bool,
}

/// Variance of the stochastic relative phase accumulated during one shift,
/// <delta phi^2> = Int pi f S_{B' xbar} tau (2 mu_B mF gF / hbar)^2, and the
/// resulting coherence factor. The spectrum is of the effective field B'xbar
/// in T^2 per (rad/s).
pub fn shift_phase_variance(
    s_field: &NoiseSpectrum,
    tau: f64,
    constants: &PhysicalConstants,
) -> Result<PhaseNoise> {
    constants.validate()?;
    if tau <= 0.0 {
        return Err(Error::InvalidParameter("tau must be positive".into()));
    }
    let pi = std::f64::consts::PI;
    let coupling = 2.0 * constants.bohr_magneton * constants.mf_gf / constants.hbar;
    let var_phi =
        s_field.integrate_weighted(|om| pi * window_function(om, tau)) * tau * coupling * coupling;
    Ok(PhaseNoise {
        var_phi,
        coherence: (-var_phi / 2.0).exp(),
        narrowband_warning: s_field.narrowband_fraction() > 0.5,
    })
}

/// Number of coherent steps under slow (fully correlated) phase noise: the
/// accumulated phase error grows linearly, so coherence falls when
/// j sqrt(var) ~ 1, i.e. after about 1/sqrt(var) steps. Zero variance gives
/// an infinite-step sentinel.
pub fn coherent_steps(var_phi: f64) -> f64 {
    if var_phi <= 0.0 {
        f64::INFINITY
    } else {
        1.0 / var_phi.sqrt()
    }
}

/// Spectral weight g(r) of coin-pulse errors at noise frequency r = omega /
/// Omega_R: (1 + r^2 - 2 r sin(pi r / 2)) / (1 - r^2)^2, with the removable
/// singularity at r = 1 handled by series expansion.
pub fn coin_window(r: f64) -> f64 {
    let eps = r - 1.0;
    if eps.abs() < 1e-3 {
        // g(1 + eps) = (1 + 2a)/4 - eps/4 + (3/4 - a/2 - 2b)/4 eps^2 + ...
        // with a = pi^2/8, b = pi^4/384.
        let a = std::f64::consts::PI.powi(2) / 8.0;
        let b = std::f64::consts::PI.powi(4) / 384.0;
        (1.0 + 2.0 * a) / 4.0 - eps / 4.0 + (0.75 - a / 2.0 - 2.0 * b) / 4.0 * eps * eps
    } else {
        let s = (std::f64::consts::PI * r / 2.0).sin();
        (1.0 + r * r - 2.0 * r * s) / ((1.0 - r * r) * (1.0 - r * r))
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CoinFidelity {
    /// Squared process fidelity of the noisy coin against the ideal unitary.
    pub f_pro_sq: f64,
    /// Squared average fidelity (1 + 2 F_pro^2)/3 for a qubit.
    pub f_ave_sq: f64,
    /// Error-probability bound 1 - F_pro^2.
    pub p_error: f64,
}

/// Process fidelity of a coin pulse at Rabi frequency omega_r under field
/// noise S_B (T^2 per rad/s):
/// F_pro^2 = 1 - 2 (mu_B mF gF/(hbar Omega_R))^2 Int S_B(omega)
/// g(omega/Omega_R) d omega.
pub fn coin_process_fidelity(
    s_b: &NoiseSpectrum,
    omega_r: f64,
    constants: &PhysicalConstants,
) -> Result<CoinFidelity> {
    constants.validate()?;
    if omega_r <= 0.0 {
        return Err(Error::InvalidParameter("omega_r must be positive".into()));
    }
    let coupling = constants.bohr_magneton * constants.mf_gf / (constants.hbar * omega_r);
    let integral = s_b.integrate_weighted(|om| coin_window(om / omega_r));
    let f_pro_sq = (1.0 - 2.0 * coupling * coupling * integral).clamp(0.0, 1.0);
    Ok(CoinFidelity {
        f_pro_sq,
        f_ave_sq: (1.0 + 2.0 * f_pro_sq) / 3.0,
        p_error: 1.0 - f_pro_sq,
    })
}

/// Full per-configuration dephasing summary.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DephasingReport {
    /// Per-step dephasing probability from step-size noise.
    pub p_step: f64,
    /// Step-size variance (k_R^2 when rescaled inputs are used).
    pub var_k: f64,
    /// Assumed peak width sigma_k (same units as sqrt(var_k)).
    pub sigma_k: f64,
    /// Per-step Zeeman phase variance (rad^2).
    pub var_phi: f64,
    /// Single-step coherence factor.
    pub coherence: f64,
    /// Slow-noise coherent-step estimate (f64::INFINITY when noiseless).
    pub coherent_steps: f64,
    pub narrowband_warning: bool,
    pub coin: CoinFidelity,
}

impl DephasingReport {
    pub fn validate(&self) -> Result<()> {
        let ok = (0.0..=1.0).contains(&self.p_step)
            && (0.0..=1.0).contains(&self.coherence)
            && self.coherent_steps >= 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::Numerical("dephasing report outside physical ranges".into()))
        }
    }
}

/// Per-step stochastic noise applied to the ideal walk: a Gaussian relative
/// phase between the spin components and a phase-flip (sigma_z) channel.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct NoiseModel {
    /// Standard deviation of the relative phase per step (rad).
    pub phase_std: f64,
    /// Probability of a sigma_z flip per step.
    pub dephase_prob: f64,
}

impl NoiseModel {
    pub fn noiseless() -> Self {
        Self { phase_std: 0.0, dephase_prob: 0.0 }
    }
}

#[derive(Debug, Clone)]
pub struct McNoisyWalk {
    /// Ensemble-averaged site distribution after j steps.
    pub mean_distribution: Vec<f64>,
    /// Ensemble inter-spin coherence |<sum_site u* d>| per step (step 0 =
    /// initial state).
    pub coherence: Vec<f64>,
    /// Site-index variance of the ensemble distribution per step.
    pub site_variance: Vec<f64>,
    pub realizations: usize,
}

/// Ensemble of noisy walks with per-realization seeded generators; fully
/// reproducible from `seed` and independent of scheduling.
pub fn monte_carlo_noisy_walk(
    spec: &WalkOperatorSpec,
    initial: &WalkState,
    steps: usize,
    noise: &NoiseModel,
    realizations: usize,
    seed: u64,
) -> Result<McNoisyWalk> {
    if realizations == 0 {
        return Err(Error::InvalidParameter("need at least one realization".into()));
    }
    let n = initial.geometry.n_sites;

    let run_one = |r: usize| -> Result<(Vec<f64>, Vec<C64>, Vec<f64>)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(0x9e37_79b9_7f4a_7c15_u64.wrapping_mul(r as u64 + 1)));
        let normal = Normal::new(0.0, noise.phase_std.max(0.0)).map_err(|e| {
            Error::InvalidParameter(format!("bad phase_std: {e}"))
        })?;
        let mut state = initial.clone();
        let mut probs_acc = vec![0.0; n];
        let mut coh = Vec::with_capacity(steps + 1);
        let mut var = Vec::with_capacity(steps + 1);
        let coherence_of = |s: &WalkState| -> C64 {
            s.up.iter().zip(&s.down).map(|(u, d)| u.conj() * d).sum()
        };
        let site_var = |s: &WalkState| -> f64 {
            let p = s.site_probabilities();
            let mean: f64 = p.iter().enumerate().map(|(i, w)| i as f64 * w).sum();
            p.iter().enumerate().map(|(i, w)| (i as f64 - mean).powi(2) * w).sum()
        };
        coh.push(coherence_of(&state));
        var.push(site_var(&state));
        for _ in 0..steps {
            state = walk_evolve(&state, spec, 1)?;
            if noise.phase_std > 0.0 {
                let dphi = normal.sample(&mut rng);
                let up_ph = C64::from_polar(1.0, dphi / 2.0);
                let down_ph = C64::from_polar(1.0, -dphi / 2.0);
                for (u, d) in state.up.iter_mut().zip(&mut state.down) {
                    *u *= up_ph;
                    *d *= down_ph;
                }
            }
            if noise.dephase_prob > 0.0 && rng.random::<f64>() < noise.dephase_prob {
                for d in state.down.iter_mut() {
                    *d = -*d;
                }
            }
            coh.push(coherence_of(&state));
            var.push(site_var(&state));
        }
        for (acc, p) in probs_acc.iter_mut().zip(state.site_probabilities()) {
            *acc += p;
        }
        Ok((probs_acc, coh, var))
    };

    #[cfg(feature = "parallel")]
    let partials: Result<Vec<_>> = {
        use rayon::prelude::*;
        (0..realizations).into_par_iter().map(run_one).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let partials: Result<Vec<_>> = (0..realizations).map(run_one).collect();
    let partials = partials?;

    let mut mean_distribution = vec![0.0; n];
    let mut coherence_acc = vec![C64::new(0.0, 0.0); steps + 1];
    let mut variance_acc = vec![0.0; steps + 1];
    for (probs, coh, var) in &partials {
        for (m, p) in mean_distribution.iter_mut().zip(probs) {
            *m += p;
        }
        for (c, v) in coherence_acc.iter_mut().zip(coh) {
            *c += v;
        }
        for (s, v) in variance_acc.iter_mut().zip(var) {
            *s += v;
        }
    }
    let r = realizations as f64;
    Ok(McNoisyWalk {
        mean_distribution: mean_distribution.into_iter().map(|p| p / r).collect(),
        coherence: coherence_acc.into_iter().map(|c| (c / r).norm()).collect(),
        site_variance: variance_acc.into_iter().map(|v| v / r).collect(),
        realizations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::walk_geometry_for;
    use std::f64::consts::PI;

    #[test]
    fn window_function_values() {
        let tau = 1e-4;
        assert!((window_function(0.0, tau) - tau / PI).abs() < 1e-20);
        // First sinc zero at omega = 2 pi / tau.
        assert!(window_function(2.0 * PI / tau, tau) < 1e-25);
    }

    #[test]
    fn step_variance_dc_limit() {
        // All power far below 1/tau: <dk^2> -> (tau/hbar)^2 <dF^2>.
        let tau = 1e-4;
        let var_f = 2.5e-30;
        let s = NoiseSpectrum::band_limited(var_f, 1e-1, 1.0 / (100.0 * tau), 400);
        let hbar = 1.054571817e-34;
        let got = step_size_variance(&s, tau, hbar).unwrap();
        let dc = (tau / hbar).powi(2) * var_f;
        assert!(((got - dc) / dc).abs() < 0.02, "got {got}, dc {dc}");
        // Power far above 1/tau: suppressed by >= 100x.
        let fast = NoiseSpectrum::band_limited(var_f, 50.0 / tau, 5000.0 / tau, 400);
        let got_fast = step_size_variance(&fast, tau, hbar).unwrap();
        assert!(got_fast < dc / 100.0, "fast {got_fast} vs dc {dc}");
        // Zero spectrum.
        let zero = NoiseSpectrum::band_limited(0.0, 1.0, 1e6, 50);
        assert_eq!(step_size_variance(&zero, tau, hbar).unwrap(), 0.0);
    }

    #[test]
    fn variance_scales_linearly() {
        let s = NoiseSpectrum::band_limited(1e-20, 1.0, 1e5, 100);
        let v1 = step_size_variance(&s, 1e-4, 1.0).unwrap();
        let v2 = step_size_variance(&s.scaled(2.0), 1e-4, 1.0).unwrap();
        assert!((v2 - 2.0 * v1).abs() / v1 < 1e-12);
    }

    #[test]
    fn gradient_bound_reproduces_quoted_stability() {
        // p = 1e-5 at 0.4% relative gradient noise fixes beta = 1.5811.
        let beta = 2.0 * 1e-5_f64.sqrt() / 0.004;
        let p = gradient_dephasing_bound(beta, 0.004);
        assert!((p - 1e-5).abs() < 1e-12, "p = {p}");
        assert!((beta - 1.5811).abs() < 1e-3);
        assert_eq!(gradient_dephasing_bound(beta, 0.0), 0.0);
    }

    #[test]
    fn gaussian_overlap_oracle_for_p() {
        // Sampled delta-k: mean of exp(-dk^2/(4 sigma^2)) matches 1 - p to
        // O(p^2).
        let sigma_k = sigma_k_for(3.0, 20);
        let var_k = (0.05 * sigma_k).powi(2);
        let p = dephasing_per_step(var_k, sigma_k);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let normal = Normal::new(0.0, var_k.sqrt()).unwrap();
        let m = 2_000_000;
        let mean: f64 = (0..m)
            .map(|_| {
                let dk: f64 = normal.sample(&mut rng);
                (-dk * dk / (4.0 * sigma_k * sigma_k)).exp()
            })
            .sum::<f64>()
            / m as f64;
        assert!(
            ((1.0 - mean) - p).abs() < 0.05 * p + 3.0 * p * p,
            "MC 1-mean = {}, p = {p}",
            1.0 - mean
        );
        assert_eq!(dephasing_per_step(0.0, sigma_k), 0.0);
    }

    #[test]
    fn coherent_steps_order_of_magnitude() {
        // 1 uG rms slow field noise, tau = 100 us, |mF gF| = 1/2: about 1e3
        // coherent steps.
        let c = PhysicalConstants::rb87();
        let tau = 100e-6;
        let rms_t = 1e-10; // 1 uG in tesla
        let s = NoiseSpectrum::band_limited(rms_t * rms_t, 2.0 * PI * 0.1, 2.0 * PI * 50.0, 300);
        let noise = shift_phase_variance(&s, tau, &c).unwrap();
        let steps = coherent_steps(noise.var_phi);
        let analytic = c.hbar / (2.0 * c.bohr_magneton * c.mf_gf * tau * rms_t);
        assert!((analytic - 1137.0).abs() < 5.0, "analytic {analytic}");
        assert!(steps > analytic / 2.0 && steps < analytic * 2.0, "steps {steps}");
        // Zero noise: sentinel.
        assert!(coherent_steps(0.0).is_infinite());
        let z = shift_phase_variance(&s.scaled(0.0), tau, &c).unwrap();
        assert_eq!(z.coherence, 1.0);
    }

    #[test]
    fn phase_variance_tau_scaling_crossover() {
        // Noise correlation time 1/omega_corner: var grows as tau^2 below it
        // and as tau above it.
        let c = PhysicalConstants::rb87();
        let omega_corner = 2.0 * PI * 1e3;
        // Grid reaching far below 1/tau for the longest tau probed, densely
        // enough to resolve the sinc^2 oscillations where they carry weight.
        let s = NoiseSpectrum::band_limited(1e-20, 2.0 * PI * 1e-3, omega_corner, 2000);
        let slope = |tau_a: f64, tau_b: f64| -> f64 {
            let va = shift_phase_variance(&s, tau_a, &c).unwrap().var_phi;
            let vb = shift_phase_variance(&s, tau_b, &c).unwrap().var_phi;
            (vb / va).ln() / (tau_b / tau_a).ln()
        };
        let short = slope(1e-7, 1e-6); // tau << 1/omega_corner
        let long = slope(0.3, 3.0); // tau >> 1/omega_corner
        assert!((short - 2.0).abs() < 0.05, "short-tau slope {short}");
        assert!((long - 1.0).abs() < 0.05, "long-tau slope {long}");
    }

    #[test]
    fn coin_window_properties() {
        assert!((coin_window(0.0) - 1.0).abs() < 1e-15);
        // The series branch must agree with the direct formula evaluated at
        // the same point just inside the series window (the direct formula
        // is still accurate to ~1e-10 there).
        let direct = |r: f64| -> f64 {
            let s = (PI * r / 2.0).sin();
            (1.0 + r * r - 2.0 * r * s) / ((1.0 - r * r) * (1.0 - r * r))
        };
        for eps in [-9.99e-4, -5e-4, 5e-4, 9.99e-4] {
            let r = 1.0 + eps;
            assert!(
                (coin_window(r) - direct(r)).abs() < 1e-9,
                "eps {eps}: series {} vs direct {}",
                coin_window(r),
                direct(r)
            );
        }
        // Value at the singular point itself: (4 + pi^2)/16.
        assert!((coin_window(1.0) - (4.0 + PI * PI) / 16.0).abs() < 1e-12);
    }

    #[test]
    fn coin_error_vanishingly_small() {
        // 1 uG rms, Omega_R = 2 pi x 200 kHz: p < 1e-10.
        let c = PhysicalConstants::rb87();
        let omega_r = 2.0 * PI * 200e3;
        let s = NoiseSpectrum::band_limited(1e-20, 2.0 * PI * 0.1, 2.0 * PI * 5e3, 400);
        let fid = coin_process_fidelity(&s, omega_r, &c).unwrap();
        assert!(fid.p_error < 1e-10, "p_error = {:e}", fid.p_error);
        assert!((fid.f_ave_sq - (1.0 + 2.0 * fid.f_pro_sq) / 3.0).abs() < 1e-15);
    }

    #[test]
    fn mc_zero_noise_matches_noiseless() {
        let g = walk_geometry_for(16, 8).unwrap();
        let spec = WalkOperatorSpec::hadamard(g);
        let initial = WalkState::symmetric_at_center(g);
        let mc = monte_carlo_noisy_walk(&spec, &initial, 8, &NoiseModel::noiseless(), 4, 42).unwrap();
        let exact = walk_evolve(&initial, &spec, 8).unwrap().site_probabilities();
        let tv = crate::numerics::tv_distance(&mc.mean_distribution, &exact);
        assert!(tv < 1e-12, "TV {tv}");
    }

    #[test]
    fn mc_deterministic_under_seed() {
        let g = walk_geometry_for(12, 6).unwrap();
        let spec = WalkOperatorSpec::hadamard(g);
        let initial = WalkState::symmetric_at_center(g);
        let noise = NoiseModel { phase_std: 0.3, dephase_prob: 0.01 };
        let a = monte_carlo_noisy_walk(&spec, &initial, 6, &noise, 64, 5).unwrap();
        let b = monte_carlo_noisy_walk(&spec, &initial, 6, &noise, 64, 5).unwrap();
        assert_eq!(a.mean_distribution, b.mean_distribution);
        assert_eq!(a.coherence, b.coherence);
    }
}
