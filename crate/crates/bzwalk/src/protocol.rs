//! The seven-stage experimental sequence, end to end on the continuum
//! simulator: (1) ground-state preparation in a shallow trap, (2) free
//! expansion plus delta-kick collimation, (3) adiabatic ramp-up of lattice
//! and force through one full Bloch oscillation, (4) internal-state
//! preparation pulse, (5) the walk itself, (6) ramp-down through another
//! full Bloch oscillation, and (7) a quarter period in the shallow trap
//! mapping momentum onto position.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::band::landau_zener_check;
use crate::error::{Error, Result};
use crate::grid::{GridSpec, SpinorField};
use crate::numerics::tv_distance;
use crate::observables::{site_distribution, SiteDistribution};
use crate::propagator::{
    apply_coin, ground_state_imaginary_time, run_interval, DriveSchedule, Ramp, RampShape,
    Segment,
};
use crate::units::WalkGeometry;

/// Everything needed to run the full sequence.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProtocolConfig {
    pub grid: GridSpec,
    pub geometry: WalkGeometry,
    /// Lattice depth V/E_R during the walk.
    pub v0: f64,
    /// Zeeman force F d_L/E_R during the walk.
    pub f0: f64,
    /// Shallow longitudinal trap hbar omega_x/E_R (preparation and readout).
    pub w_trap: f64,
    /// Zeeman zero point (d_L).
    pub x_bar: f64,
    /// Mean-field coupling g/(E_R d_L); evolved with the GPE stepper when
    /// `use_gpe` is set.
    pub g: f64,
    pub use_gpe: bool,
    /// Walk coin.
    pub coin_alpha: f64,
    pub coin_axis_phase: f64,
    /// State-preparation pulse (stage 4); the default takes spin-up to the
    /// symmetric superposition (1,1)/sqrt(2).
    pub prep_alpha: f64,
    pub prep_axis_phase: f64,
    /// Free-expansion time; `None` picks 3 expansion times of the prepared
    /// cloud.
    pub t_expand: Option<f64>,
    /// Kick duration; `None` solves the collimation (lens) condition from
    /// the expanded state's covariance.
    pub t_kick: Option<f64>,
    /// Ramp-up/down window; `None` uses one Bloch period 2 pi / F0.
    pub ramp_window: Option<f64>,
    /// Fraction of the ramp window by which the force ramp trails the
    /// lattice ramp.
    pub force_delay_frac: f64,
    /// Keep the shallow trap on through stages 3-6 (used for the
    /// interacting runs).
    pub trap_during_walk: bool,
    /// Skip stages 2 (expansion + kick): preparation directly in the
    /// lattice-plus-trap potential.
    pub skip_delta_kick: bool,
    /// Record animation frames every this many rescaled time units.
    pub frame_interval: Option<f64>,
}

impl ProtocolConfig {
    /// The deep-lattice walk defaults: V0 = 20, F0 = 0.2, n = 20, j = 10,
    /// 10 Hz trap for a 532 nm lattice (w = 4.93e-3).
    pub fn walk_defaults(geometry: WalkGeometry) -> Self {
        Self {
            grid: GridSpec { n: 8192, length: 512.0, center: 0.0 },
            geometry,
            v0: 20.0,
            f0: 0.2,
            w_trap: 4.93e-3,
            x_bar: 0.0,
            g: 0.0,
            use_gpe: false,
            coin_alpha: PI / 2.0,
            coin_axis_phase: 0.0,
            prep_alpha: PI / 2.0,
            prep_axis_phase: -PI / 2.0,
            t_expand: None,
            t_kick: None,
            ramp_window: None,
            force_delay_frac: 0.1,
            trap_during_walk: false,
            skip_delta_kick: false,
            frame_interval: None,
        }
    }

    /// Shift-step duration tau0 = pi delta_k0 / F0.
    pub fn tau0(&self) -> f64 {
        PI * self.geometry.delta_k0() / self.f0
    }

    pub fn validate(&self) -> Result<()> {
        if self.v0 < 0.0 || self.f0 <= 0.0 {
            return Err(Error::InvalidParameter("need v0 >= 0 and f0 > 0".into()));
        }
        if self.w_trap <= 0.0 {
            return Err(Error::InvalidParameter(
                "the protocol needs a shallow trap (w_trap > 0)".into(),
            ));
        }
        if self.force_delay_frac < 0.0 || self.force_delay_frac > 0.5 {
            return Err(Error::InvalidParameter("force_delay_frac outside [0, 0.5]".into()));
        }
        Ok(())
    }
}

/// Per-stage bookkeeping.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StageRecord {
    pub name: String,
    pub t_end: f64,
    pub norm: f64,
    pub x_mean: f64,
    pub x_rms: f64,
    pub k_rms: f64,
}

/// One animation frame: decimated position density and the zone
/// neighborhood of the momentum density.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Frame {
    pub t: f64,
    pub x: Vec<f64>,
    pub position_density: Vec<f64>,
    pub k: Vec<f64>,
    pub momentum_density: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct ProtocolResult {
    pub records: Vec<StageRecord>,
    /// Landau-Zener margin of the configuration (warning when unsafe).
    pub lz_safe: bool,
    /// Site distribution read directly at the end of the walk (lattice and
    /// force still on).
    pub sites_after_walk: SiteDistribution,
    /// Site distribution at the end of the ramp-down: the readout shown in
    /// the distribution figures.
    pub sites_final: SiteDistribution,
    /// Site distribution recovered from the stage-7 position density via
    /// x = p/(M omega).
    pub sites_mapped: SiteDistribution,
    /// Momentum density over the zone at the end of stage 6: (k0, density).
    pub momentum_profile: Vec<(f64, f64)>,
    /// Position density after stage 7 with the position axis rescaled to
    /// k0 = x pi w / 2: (k0_equivalent, density).
    pub mapped_profile: Vec<(f64, f64)>,
    /// TV distance between `sites_final` and `sites_mapped` (readout
    /// consistency of the mapping chain).
    pub readout_consistency_tv: f64,
    /// Delta-kick parameters actually used (t_expand, t_kick).
    pub kick_used: (f64, f64),
    pub frames: Vec<Frame>,
    /// Final state after stage 6 (before the quarter-period map).
    pub state_after_rampdown: SpinorField,
}

fn record(name: &str, state: &SpinorField) -> StageRecord {
    let (xm, xv) = state.position_moments();
    let (_, kv) = state.momentum_moments(None);
    StageRecord {
        name: name.into(),
        t_end: state.time,
        norm: state.norm(),
        x_mean: xm,
        x_rms: xv.sqrt(),
        k_rms: kv.sqrt(),
    }
}

/// Symmetrized position-momentum covariance Re<(x - <x>)(p - <p>)> with
/// p = -i d/dx (conjugate to x in d_L, i.e. p = pi k0).
fn xp_covariance(state: &SpinorField) -> f64 {
    let n = state.grid.n;
    let (xm, _) = state.position_moments();
    let (km, _) = state.momentum_moments(None);
    let pm = PI * km;
    // p psi via FFT.
    let (mut up, mut down) = state.momentum_spinor();
    for r in 0..n {
        let p = PI * state.grid.k0_at_bin(r);
        let f = num_complex::Complex64::new(p - pm, 0.0);
        up[r] *= f;
        down[r] *= f;
    }
    crate::grid::fft_inverse(&mut up);
    crate::grid::fft_inverse(&mut down);
    let scale = (n as f64).sqrt();
    let mut acc = 0.0;
    for i in 0..n {
        let x = state.grid.x_at(i) - xm;
        acc += (state.psi_up[i].conj() * up[i] * scale + state.psi_down[i].conj() * down[i] * scale)
            .re
            * x;
    }
    acc * state.grid.dx() / state.norm()
}

/// Free expansion for `t_expand`, then the shallow trap for `t_kick`: the
/// kick cancels the position-momentum correlation built up during the
/// expansion, collimating the momentum distribution (the matter-wave lens
/// condition tan(2 theta) = 2 C / (m w sigma_x^2 - sigma_p^2/(m w)) with
/// theta = w t_kick).
pub fn delta_kick_cool(
    state: &mut SpinorField,
    w_trap: f64,
    t_expand: f64,
    t_kick: Option<f64>,
) -> Result<(f64, f64)> {
    if w_trap <= 0.0 {
        return Err(Error::InvalidParameter("delta-kick needs w_trap > 0".into()));
    }
    let free = DriveSchedule::static_drive(0.0, 0.0, 0.0, 0.0, 0.0);
    if t_expand > 0.0 {
        run_interval(state, &free, state.time + t_expand, 0.25, false)?;
    }

    let t_kick = match t_kick {
        Some(t) => t,
        None => {
            let m = PI * PI / 2.0;
            let (_, sx2) = state.position_moments();
            let (_, kv) = state.momentum_moments(None);
            let sp2 = PI * PI * kv;
            let c = xp_covariance(state);
            let theta = 0.5 * (2.0 * c / (m * w_trap * sx2 - sp2 / (m * w_trap))).atan();
            let theta = if theta < 0.0 { theta + PI / 2.0 } else { theta };
            theta / w_trap
        }
    };
    if t_kick > 0.0 {
        let trap = DriveSchedule::static_drive(0.0, 0.0, w_trap, 0.0, 0.0);
        let dt = (0.02 / (w_trap * w_trap * state.grid.length * state.grid.length / 4.0 + 0.01))
            .min(t_kick / 8.0);
        run_interval(state, &trap, state.time + t_kick, dt, false)?;
    }
    Ok((t_expand, t_kick))
}

/// Quarter period in the shallow trap: maps the momentum density onto the
/// position density via x = p/(M omega), i.e. k0 = (pi w / 2) x. Returns
/// (k0-equivalent axis, density in k0) of the final position distribution.
pub fn quarter_period_map(state: &mut SpinorField, w_trap: f64) -> Result<Vec<(f64, f64)>> {
    if w_trap <= 0.0 {
        return Err(Error::InvalidParameter("quarter-period map needs w_trap > 0".into()));
    }
    let trap = DriveSchedule::static_drive(0.0, 0.0, w_trap, 0.0, 0.0);
    let t_quarter = 0.5 * PI / w_trap;
    let dt = 0.02 / (0.25 * PI * PI * w_trap * w_trap * (state.grid.length / 2.0).powi(2) + 0.01);
    run_interval(state, &trap, state.time + t_quarter, dt.min(0.25), false)?;

    let rho = state.position_density();
    let dx = state.grid.dx();
    let scale = 0.5 * PI * w_trap; // k0 per d_L of final position
    Ok((0..state.grid.n)
        .map(|i| {
            let k_equiv = state.grid.x_at(i) * scale;
            // density per unit k0
            (k_equiv, rho[i] * dx / (scale * dx))
        })
        .collect())
}

/// Fold a (k0, density) profile into the zone and bin it on the walk sites.
fn bin_mapped_profile(profile: &[(f64, f64)], geometry: &WalkGeometry) -> SiteDistribution {
    let n = geometry.n_sites;
    let mut probs = vec![0.0; n];
    for &(k, w) in profile {
        probs[geometry.site_of(k)] += w;
    }
    let total: f64 = probs.iter().sum();
    for p in probs.iter_mut() {
        *p /= total;
    }
    SiteDistribution {
        k_centers: (0..n).map(|i| geometry.site_k(i)).collect(),
        probabilities: probs,
        residual: 0.0,
    }
}

struct FrameSink {
    interval: f64,
    next_t: f64,
    frames: Vec<Frame>,
}

impl FrameSink {
    fn capture(&mut self, state: &SpinorField) {
        let stride = (state.grid.n / 512).max(1);
        let rho = state.position_density();
        let x: Vec<f64> = (0..state.grid.n).step_by(stride).map(|i| state.grid.x_at(i)).collect();
        let pd: Vec<f64> = (0..state.grid.n).step_by(stride).map(|i| rho[i]).collect();
        let mom = state.momentum_density();
        let mut kd: Vec<(f64, f64)> = (0..state.grid.n)
            .map(|r| (state.grid.k0_at_bin(r), mom[r]))
            .filter(|(k, _)| k.abs() <= 1.3)
            .collect();
        kd.sort_by(|a, b| a.0.total_cmp(&b.0));
        self.frames.push(Frame {
            t: state.time,
            x,
            position_density: pd,
            k: kd.iter().map(|p| p.0).collect(),
            momentum_density: kd.iter().map(|p| p.1).collect(),
        });
        self.next_t = state.time + self.interval;
    }
}

/// Evolve to t_end, capturing frames at the sink's interval.
fn evolve_frames(
    state: &mut SpinorField,
    schedule: &DriveSchedule,
    t_end: f64,
    dt: f64,
    gpe: bool,
    sink: &mut Option<FrameSink>,
) -> Result<()> {
    match sink {
        None => run_interval(state, schedule, t_end, dt, gpe),
        Some(s) => {
            while state.time < t_end - 1e-9 {
                let t_next = (state.time + s.interval).min(t_end).min(s.next_t.max(state.time + dt));
                run_interval(state, schedule, t_next, dt, gpe)?;
                if state.time >= s.next_t - 1e-9 {
                    s.capture(state);
                }
            }
            Ok(())
        }
    }
}

/// Run the full seven-stage sequence.
pub fn run_protocol(config: &ProtocolConfig) -> Result<ProtocolResult> {
    config.validate()?;
    let lz = landau_zener_check(config.v0, config.f0);

    let geometry = config.geometry;
    let tau0 = config.tau0();
    let j = geometry.steps;
    let gpe = config.use_gpe;
    let w_walk = if config.trap_during_walk { config.w_trap } else { 0.0 };
    let mut sink = config.frame_interval.map(|interval| FrameSink {
        interval,
        next_t: 0.0,
        frames: Vec::new(),
    });

    let stage_err = |stage: &str, e: Error| -> Error {
        match e {
            Error::Collapse(m) => Error::Collapse(format!("[stage {stage}] {m}")),
            Error::Numerical(m) => Error::Numerical(format!("[stage {stage}] {m}")),
            other => other,
        }
    };

    let mut records = Vec::new();

    // (1) Ground state of the shallow trap (plus lattice when the delta-kick
    // stages are skipped and the walk starts straight from the lattice).
    let prep_v0 = if config.skip_delta_kick { config.v0 } else { 0.0 };
    let prep = DriveSchedule::static_drive(prep_v0, 0.0, config.w_trap, config.g, config.x_bar);
    let mut state = ground_state_imaginary_time(config.grid, &prep, 0.0, 1e-12)
        .map_err(|e| stage_err("1:prepare", e))?;
    state.time = 0.0;
    records.push(record("1:prepare", &state));
    if let Some(s) = sink.as_mut() {
        s.capture(&state);
    }

    // (2) Free expansion + delta-kick collimation.
    let mut kick_used = (0.0, 0.0);
    if !config.skip_delta_kick {
        let (_, sx2) = state.position_moments();
        let t_expand = config
            .t_expand
            .unwrap_or_else(|| 3.0 * PI * PI * sx2);
        kick_used = delta_kick_cool(&mut state, config.w_trap, t_expand, config.t_kick)
            .map_err(|e| stage_err("2:delta-kick", e))?;
        records.push(record("2:delta-kick", &state));
        if let Some(s) = sink.as_mut() {
            s.capture(&state);
        }
    }

    // Stage dt heuristic: resolve the largest potential scale seen by the
    // occupied region (lattice depth, tilt across the cloud, trap).
    let cloud = |state: &SpinorField| -> f64 {
        let (xm, xv) = state.position_moments();
        xm.abs() + 4.0 * xv.sqrt() + 10.0
    };
    let dt_for = |v0: f64, f0: f64, w: f64, reach: f64| -> f64 {
        let vscale = v0 + f0 * reach + 0.25 * PI * PI * w * w * reach * reach + 1.0;
        (0.1 / vscale).clamp(5e-4, 0.25)
    };

    // (3) Ramp-up: lattice over the window, force trailing by the delay,
    // then a hold at full force until the swept quasimomentum completes one
    // full Bloch oscillation (integral of F0 dt = 2 pi).
    let window = config.ramp_window.unwrap_or(2.0 * PI / config.f0);
    let delay = config.force_delay_frac * window;
    let t3_start = state.time;
    let mut up_schedule = DriveSchedule {
        lattice: Ramp {
            segments: vec![Segment {
                t0: t3_start,
                t1: t3_start + window,
                shape: RampShape::Smoothstep,
                from: 0.0,
                to: config.v0,
                jump: false,
            }],
        },
        force: Ramp {
            segments: vec![Segment {
                t0: t3_start + delay,
                t1: t3_start + window,
                shape: RampShape::Smoothstep,
                from: 0.0,
                to: config.f0,
                jump: false,
            }],
        },
        trap: Ramp::constant(w_walk),
        coupling: Ramp::constant(config.g),
        x_bar: config.x_bar,
        coin_pulses: Vec::new(),
    };
    let swept = up_schedule.force.integral(t3_start, t3_start + window);
    let hold = (2.0 * PI - swept).max(0.0) / config.f0;
    let t3_end = t3_start + window + hold;
    let dt3 = dt_for(config.v0, config.f0, w_walk, cloud(&state));
    evolve_frames(&mut state, &up_schedule, t3_end, dt3, gpe, &mut sink)
        .map_err(|e| stage_err("3:ramp-up", e))?;
    records.push(record("3:ramp-up", &state));

    // (4) Internal-state preparation pulse.
    apply_coin(&mut state, config.prep_alpha, config.prep_axis_phase);
    records.push(record("4:prep-pulse", &state));

    // (5) The walk: coin then shift, j times.
    let walk_schedule = DriveSchedule::static_drive(config.v0, config.f0, w_walk, config.g, config.x_bar);
    let dt5 = dt_for(config.v0, config.f0, w_walk, cloud(&state));
    for _ in 0..j {
        apply_coin(&mut state, config.coin_alpha, config.coin_axis_phase);
        let t_next = state.time + tau0;
        evolve_frames(&mut state, &walk_schedule, t_next, dt5, gpe, &mut sink)
            .map_err(|e| stage_err("5:walk", e))?;
    }
    records.push(record("5:walk", &state));
    let sites_after_walk = site_distribution(&state, &geometry)?;

    // (6) Ramp-down, mirror of stage 3: hold, then force and lattice ramp
    // off with the force leading by the delay.
    let t6_start = state.time;
    let swept_down_window = {
        // integral of the mirrored force ramp over its window
        config.f0 * (window - delay) / 2.0
    };
    let hold6 = (2.0 * PI - swept_down_window).max(0.0) / config.f0;
    let down_start = t6_start + hold6;
    let down_schedule = DriveSchedule {
        lattice: Ramp {
            segments: vec![Segment {
                t0: down_start,
                t1: down_start + window,
                shape: RampShape::Smoothstep,
                from: config.v0,
                to: 0.0,
                jump: false,
            }],
        },
        force: Ramp {
            segments: vec![Segment {
                t0: down_start,
                t1: down_start + window - delay,
                shape: RampShape::Smoothstep,
                from: config.f0,
                to: 0.0,
                jump: false,
            }],
        },
        trap: Ramp::constant(w_walk),
        coupling: Ramp::constant(config.g),
        x_bar: config.x_bar,
        coin_pulses: Vec::new(),
    };
    up_schedule.coin_pulses.clear();
    let t6_end = down_start + window;
    evolve_frames(&mut state, &down_schedule, t6_end, dt5, gpe, &mut sink)
        .map_err(|e| stage_err("6:ramp-down", e))?;
    records.push(record("6:ramp-down", &state));

    let sites_final = site_distribution(&state, &geometry)?;
    let mom = state.momentum_density();
    let mut momentum_profile: Vec<(f64, f64)> = (0..state.grid.n)
        .map(|r| (state.grid.k0_at_bin(r), mom[r]))
        .filter(|(k, _)| k.abs() <= 1.3)
        .collect();
    momentum_profile.sort_by(|a, b| a.0.total_cmp(&b.0));
    let state_after_rampdown = state.clone();

    // (7) Quarter period in the shallow trap.
    let mapped_profile = quarter_period_map(&mut state, config.w_trap)
        .map_err(|e| stage_err("7:quarter-period", e))?;
    records.push(record("7:quarter-period", &state));
    if let Some(s) = sink.as_mut() {
        s.capture(&state);
    }

    let sites_mapped = bin_mapped_profile(&mapped_profile, &geometry);
    let readout_consistency_tv = tv_distance(&sites_final.probabilities, &sites_mapped.probabilities);

    Ok(ProtocolResult {
        records,
        lz_safe: lz.safe,
        sites_after_walk,
        sites_final,
        sites_mapped,
        momentum_profile,
        mapped_profile,
        readout_consistency_tv,
        kick_used,
        frames: sink.map(|s| s.frames).unwrap_or_default(),
        state_after_rampdown,
    })
}

/// Result of a walk on a statically prepared condensate (no ramps, no
/// mapping stages): what the interacting-walk study needs.
#[derive(Debug, Clone)]
pub struct StaticWalkResult {
    /// Quasimomentum site distribution of the prepared state (before the
    /// walk).
    pub sites_initial: SiteDistribution,
    /// Site distribution after j steps, read by zone folding in the lattice.
    pub sites_final: SiteDistribution,
    /// Momentum density (k0, density) of the prepared state over the zone.
    pub initial_profile: Vec<(f64, f64)>,
    /// Momentum density after the walk.
    pub final_profile: Vec<(f64, f64)>,
    pub records: Vec<StageRecord>,
}

/// Walk on a condensate prepared directly in the lattice: imaginary-time
/// ground state of lattice + shallow trap (with the mean-field term), spin
/// preparation pulse, then j coin-plus-shift cycles with the trap kept on.
/// The force switches on with the first shift. Quasimomentum distributions
/// are read by folding the momentum density into the zone.
pub fn run_static_walk(config: &ProtocolConfig) -> Result<StaticWalkResult> {
    config.validate()?;
    let geometry = config.geometry;
    let tau0 = config.tau0();
    let gpe = config.use_gpe;

    // Seed envelope: the in-lattice ground state spreads over many wells
    // with the band effective mass, sigma^2 = sqrt(m/m*)/(pi^2 w); repulsive
    // interactions widen it further toward the Thomas-Fermi radius.
    let w = config.w_trap;
    let seed_sigma = {
        let band = crate::band::compute_bands(config.v0.max(1e-9), 16, 32, 1)?;
        let width = band.band_width(0).max(1e-12);
        let mass_ratio = (4.0 / (width * PI * PI)).max(1.0); // m*/m
        let sigma_eff = (1.0 / (PI * PI * w * mass_ratio.sqrt())).sqrt();
        if config.g > 0.0 {
            let kappa = 0.25 * PI * PI * w * w;
            let mu = (0.75 * config.g * kappa.sqrt()).powf(2.0 / 3.0);
            let r_tf = (mu / kappa).sqrt();
            sigma_eff.max(r_tf / 5.0_f64.sqrt())
        } else {
            sigma_eff
        }
    };

    let prep = DriveSchedule::static_drive(config.v0, 0.0, config.w_trap, config.g, config.x_bar);
    let mut state = crate::propagator::ground_state_relaxed(
        config.grid,
        &prep,
        0.0,
        1e-12,
        1e-5,
        Some(seed_sigma),
    )?;
    state.time = 0.0;
    let mut records = vec![record("prepare", &state)];

    let zone_profile = |state: &SpinorField| -> Vec<(f64, f64)> {
        let mom = state.momentum_density();
        let mut prof: Vec<(f64, f64)> = (0..state.grid.n)
            .map(|r| (state.grid.k0_at_bin(r), mom[r]))
            .filter(|(k, _)| k.abs() <= 1.3)
            .collect();
        prof.sort_by(|a, b| a.0.total_cmp(&b.0));
        prof
    };
    let sites_initial = site_distribution(&state, &geometry)?;
    let initial_profile = zone_profile(&state);

    apply_coin(&mut state, config.prep_alpha, config.prep_axis_phase);

    let walk = DriveSchedule::static_drive(config.v0, config.f0, config.w_trap, config.g, config.x_bar);
    let dt = (0.1 / (config.v0 + 6.0 * config.f0 + 1.0)).clamp(5e-4, 0.25);
    for _ in 0..geometry.steps {
        apply_coin(&mut state, config.coin_alpha, config.coin_axis_phase);
        let t_next = state.time + tau0;
        run_interval(&mut state, &walk, t_next, dt, gpe)?;
    }
    records.push(record("walk", &state));

    Ok(StaticWalkResult {
        sites_initial,
        sites_final: site_distribution(&state, &geometry)?,
        initial_profile,
        final_profile: zone_profile(&state),
        records,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kick_auto_lens_collimates() {
        // A pure Gaussian expanded by a known factor: the auto lens must
        // recover sigma_k reduced by sqrt(1 + (t/t_sigma)^2) within 5%.
        let grid = GridSpec::new(2048, 256.0, 0.0).unwrap();
        let w: f64 = 5e-3;
        let sigma0 = 1.0 / (PI * w.sqrt());
        let mut state = SpinorField::gaussian(grid, 0.0, sigma0, 0.0).unwrap();
        let (_, kv0) = state.momentum_moments(None);
        let t_sigma = PI * PI * sigma0 * sigma0;
        let t_expand = 3.0 * t_sigma;
        let gamma = (1.0 + (t_expand / t_sigma).powi(2)).sqrt();
        delta_kick_cool(&mut state, w, t_expand, None).unwrap();
        let (_, kv) = state.momentum_moments(None);
        let ratio = (kv0 / kv).sqrt();
        assert!(
            (ratio - gamma).abs() / gamma < 0.05,
            "reduction {ratio} vs expansion factor {gamma}"
        );
    }

    #[test]
    fn kick_degenerate_cases() {
        let grid = GridSpec::new(1024, 128.0, 0.0).unwrap();
        let w: f64 = 5e-3;
        let sigma0 = 4.0;
        // t_expand = 0 with explicit t_kick = 0: nothing happens.
        let mut state = SpinorField::gaussian(grid, 0.0, sigma0, 0.0).unwrap();
        let (_, kv0) = state.momentum_moments(None);
        delta_kick_cool(&mut state, w, 0.0, Some(0.0)).unwrap();
        let (_, kv) = state.momentum_moments(None);
        assert!((kv - kv0).abs() / kv0 < 1e-10);
        // Pure expansion (t_kick = 0) leaves the momentum rms unchanged.
        delta_kick_cool(&mut state, w, 100.0, Some(0.0)).unwrap();
        let (_, kv2) = state.momentum_moments(None);
        assert!((kv2 - kv0).abs() / kv0 < 1e-10, "{kv2} vs {kv0}");
    }

    #[test]
    fn quarter_period_maps_momentum_to_position() {
        // Two momentum peaks: after the quarter period the position density
        // must reproduce the pre-map momentum density under k = pi w x / 2.
        let grid = GridSpec::new(4096, 512.0, 0.0).unwrap();
        let w: f64 = 5e-3;
        let mut a = SpinorField::gaussian(grid, 0.0, 6.0, 0.30).unwrap();
        let b = SpinorField::gaussian(grid, 0.0, 6.0, -0.55).unwrap();
        for i in 0..grid.n {
            a.psi_up[i] = 0.8_f64.sqrt() * a.psi_up[i];
            a.psi_down[i] = 0.2_f64.sqrt() * b.psi_up[i];
        }
        let before = a.momentum_density();
        let k_bins: Vec<f64> = (0..grid.n).map(|r| grid.k0_at_bin(r)).collect();
        let mapped = quarter_period_map(&mut a, w).unwrap();

        // Interpolate the mapped profile onto the momentum bins and compare
        // as distributions (TV < 0.02).
        let mut mapped_sorted = mapped.clone();
        mapped_sorted.sort_by(|x, y| x.0.total_cmp(&y.0));
        let interp = |k: f64| -> f64 {
            let pts = &mapped_sorted;
            match pts.binary_search_by(|p| p.0.total_cmp(&k)) {
                Ok(i) => pts[i].1,
                Err(0) => 0.0,
                Err(i) if i >= pts.len() => 0.0,
                Err(i) => {
                    let (k0, v0) = pts[i - 1];
                    let (k1, v1) = pts[i];
                    v0 + (v1 - v0) * (k - k0) / (k1 - k0)
                }
            }
        };
        let mut p: Vec<f64> = Vec::new();
        let mut q: Vec<f64> = Vec::new();
        for (r, &k) in k_bins.iter().enumerate() {
            if k.abs() <= 1.0 {
                p.push(before[r]);
                q.push(interp(k));
            }
        }
        let tv = tv_distance(&p, &q);
        assert!(tv < 0.02, "mapping TV = {tv}");

        // Weights of the two peaks survive, 0.8/0.2 within 1e-3.
        let w_plus: f64 = mapped.iter().filter(|(k, _)| *k > 0.0).map(|(_, v)| v).sum();
        let w_total: f64 = mapped.iter().map(|(_, v)| v).sum();
        assert!((w_plus / w_total - 0.8).abs() < 1e-3);
    }

    #[test]
    fn half_period_is_negative_control() {
        // Evolving a half period instead mirrors the initial position
        // density rather than showing the momentum density.
        let grid = GridSpec::new(2048, 256.0, 0.0).unwrap();
        let w = 8e-3;
        let mut state = SpinorField::gaussian(grid, 20.0, 5.0, 0.0).unwrap();
        let before = state.position_density();
        let trap = DriveSchedule::static_drive(0.0, 0.0, w, 0.0, 0.0);
        let t_half = PI / w;
        run_interval(&mut state, &trap, t_half, 0.02, false).unwrap();
        let after = state.position_density();
        // Mirror: x -> -x is index i -> n - i (grid includes -L/2 but not
        // +L/2, so index 0 pairs with itself).
        let mut mirrored = after.clone();
        for i in 1..grid.n {
            mirrored[i] = after[grid.n - i];
        }
        assert!(tv_distance(&before, &mirrored) < 0.02);
        let (xm, _) = state.position_moments();
        assert!((xm + 20.0).abs() < 0.5, "mirrored center at {xm}");
    }
}
