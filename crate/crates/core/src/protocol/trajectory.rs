use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{ProtocolConfig, SteeringContext};
use crate::engine::{schmidt, KrylovOptions, PureState};
use crate::error::Result;

/// Observables sampled at one instant of a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Sample {
    /// Energy per bond.
    pub energy: f64,
    /// Ground-space fidelity.
    pub fidelity: f64,
    /// Entanglement entropy across the configured cut.
    pub entropy: f64,
}

/// One stochastic run. Index `n` of every per-period vector refers to
/// period `n + 1`, which ends at time `(n + 1)·δt`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    pub index: usize,
    pub seed: u64,
    pub dt: f64,
    pub initial: Sample,
    /// After the evolution, before the ancillas are measured.
    pub pre: Vec<Sample>,
    /// After all ancillas are reset.
    pub post: Vec<Sample>,
    /// Local outcome index of every ancilla, left to right (0 = `↑`).
    pub outcomes: Vec<Vec<u8>>,
    /// `⟨S^z⟩` of every site before measurement.
    pub magnetization_pre: Vec<Vec<f64>>,
    /// `⟨S^z⟩` of every site after reset.
    pub magnetization_post: Vec<Vec<f64>>,
    pub dephasing_events: usize,
    /// Period containing the last excited ancilla outcome (0 if none).
    pub conv_period: usize,
    pub t_conv: f64,
    pub stop_period: Option<usize>,
    pub max_norm_drift: f64,
    pub valid: bool,
    pub error: Option<String>,
}

impl TrajectoryRecord {
    pub fn periods(&self) -> usize {
        self.pre.len()
    }

    pub fn flips(&self, period: usize) -> usize {
        self.outcomes[period].iter().filter(|&&o| o != 0).count()
    }

    pub fn is_clean(&self, period: usize) -> bool {
        self.flips(period) == 0
    }
}

/// `P(ε) = 1 − e^{−ε·dt}`.
pub fn dephasing_probability(eps: f64, dt: f64) -> f64 {
    -(-eps * dt).exp_m1()
}

/// Independently on every site, with probability `P(ε)`, perform a
/// projective measurement in the local basis without reset. Returns the
/// number of measurements performed.
pub fn apply_dephasing<R: Rng + ?Sized>(state: &mut PureState, dt: f64, eps: f64, rng: &mut R) -> Result<usize> {
    if eps == 0.0 {
        return Ok(0);
    }
    let p = dephasing_probability(eps, dt);
    let mut events = 0;
    for site in 0..state.layout().n_sites() {
        if rng.random::<f64>() < p {
            state.measure_site(site, rng)?;
            events += 1;
        }
    }
    Ok(events)
}

/// Last period of the first run of `window` consecutive all-`↑` periods.
pub fn stop_scheme(record: &TrajectoryRecord, window: usize) -> Option<usize> {
    let mut run = 0;
    for n in 0..record.periods() {
        if record.is_clean(n) {
            run += 1;
            if run == window {
                return Some(n + 1);
            }
        } else {
            run = 0;
        }
    }
    None
}

fn sample(ctx: &SteeringContext, state: &PureState, bond: Option<usize>) -> Result<Sample> {
    let amps = state.amplitudes();
    Ok(Sample {
        energy: ctx.energy_per_bond(amps),
        fidelity: ctx.fidelity(amps),
        entropy: match bond {
            Some(b) => schmidt(ctx.layout(), amps, b)?.entropy(),
            None => f64::NAN,
        },
    })
}

/// Run trajectory `index` on the stream `(config.seed, index)`.
pub fn run_trajectory(ctx: &SteeringContext, config: &ProtocolConfig, index: usize) -> TrajectoryRecord {
    run_trajectory_state(ctx, config, index).0
}

/// Same as [`run_trajectory`], also returning the final state (absent when
/// the trajectory failed).
pub fn run_trajectory_state(
    ctx: &SteeringContext,
    config: &ProtocolConfig,
    index: usize,
) -> (TrajectoryRecord, Option<PureState>) {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(index as u64);
    let mut record = TrajectoryRecord {
        index,
        seed: config.seed,
        dt: config.dt,
        initial: Sample::default(),
        pre: Vec::with_capacity(config.periods),
        post: Vec::with_capacity(config.periods),
        outcomes: Vec::with_capacity(config.periods),
        magnetization_pre: Vec::with_capacity(config.periods),
        magnetization_post: Vec::with_capacity(config.periods),
        dephasing_events: 0,
        conv_period: 0,
        t_conv: 0.0,
        stop_period: None,
        max_norm_drift: 0.0,
        valid: true,
        error: None,
    };
    let state = match simulate(ctx, config, &mut rng, &mut record) {
        Ok(state) => Some(state),
        Err(e) => {
            record.valid = false;
            record.error = Some(e.to_string());
            None
        }
    };
    record.conv_period = (0..record.periods()).rev().find(|&n| !record.is_clean(n)).map_or(0, |n| n + 1);
    record.t_conv = record.conv_period as f64 * config.dt;
    if let Some(w) = config.stop_window {
        record.stop_period = stop_scheme(&record, w);
    }
    (record, state)
}

fn simulate(
    ctx: &SteeringContext,
    config: &ProtocolConfig,
    rng: &mut ChaCha8Rng,
    record: &mut TrajectoryRecord,
) -> Result<PureState> {
    config.validate()?;
    let bond = config
        .track_entropy
        .then(|| config.entropy_bond.unwrap_or(ctx.central_bond()));
    let mut state = PureState::new(ctx.layout(), &config.initial)?;
    record.initial = sample(ctx, &state, bond)?;
    let slices = config.slices();
    let slice = config.dt / slices as f64;
    let opts = KrylovOptions {
        tol: config.tol,
        ..Default::default()
    };
    let ancillas = ctx.layout().ancilla_sites().to_vec();
    for _ in 0..config.periods {
        for _ in 0..slices {
            let rep = state.evolve(ctx.hamiltonian(), slice, &opts)?;
            record.max_norm_drift = record.max_norm_drift.max(rep.norm_drift);
            record.dephasing_events += apply_dephasing(&mut state, slice, config.eps, rng)?;
        }
        let pre = sample(ctx, &state, bond)?;
        record.magnetization_pre.push(ctx.magnetizations(state.amplitudes()));
        let mut outs = Vec::with_capacity(ancillas.len());
        for &site in &ancillas {
            let o = state.measure_site(site, rng)?;
            state.reset_site(site, o)?;
            outs.push(o as u8);
        }
        let drift = state.renormalize();
        record.max_norm_drift = record.max_norm_drift.max(drift);
        let post = sample(ctx, &state, bond)?;
        record.magnetization_post.push(ctx.magnetizations(state.amplitudes()));
        for s in [&pre, &post] {
            if s.energy < -1e-10 || s.fidelity > 1.0 + 1e-9 || s.fidelity < -1e-12 {
                return Err(crate::error::SteerError::StateCorruption(format!(
                    "observable out of range: energy {}, fidelity {}",
                    s.energy, s.fidelity
                )));
            }
        }
        record.pre.push(pre);
        record.post.push(post);
        record.outcomes.push(outs);
    }
    Ok(state)
}
