use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use super::{run_ensemble, EnsembleResult, ProtocolConfig, SteeringContext};
use crate::engine::{InitialState, PureState};
use crate::error::{Result, SteerError};
use crate::linalg::unitary_exp;

/// Commuting toy model: exact channel fidelities next to the sine-law
/// predictions, plus an optional trajectory ensemble.
#[derive(Debug, Clone)]
pub struct ToyModelResult {
    pub n: usize,
    pub dt: f64,
    /// `F(nδt) = ⟨ψ₀|ρ_S|ψ₀⟩` from the exact reset channel, `n = 0..=periods`.
    pub channel_fidelity: Vec<f64>,
    /// Sine-law prediction of `F(nδt)` from `ρ_S((n−1)δt)` including
    /// simultaneous jumps on several sites (entry 0 is the initial value).
    pub recursion_full: Vec<f64>,
    /// Single-jump form `F + sin²δt·Σ_l⟨ψ₀|M_l ρ M_l†|ψ₀⟩`.
    pub recursion_single: Vec<f64>,
    pub ensemble: Option<EnsembleResult>,
}

impl ToyModelResult {
    pub fn max_recursion_error(&self) -> f64 {
        self.channel_fidelity
            .iter()
            .zip(&self.recursion_full)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn max_single_jump_error(&self) -> f64 {
        self.channel_fidelity
            .iter()
            .zip(&self.recursion_single)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// One step of the sine law for `n` qubits (site 0 most significant,
/// `|↓⟩ = 1`): `F' = Σ_S sin^{2|S|}(δt) ρ[S, S]`, where `S` runs over the
/// sets of flipped sites. With `single_jump` only `|S| ≤ 1` is kept.
pub fn sine_law_step(rho: &DMatrix<C64>, n: usize, dt: f64, single_jump: bool) -> f64 {
    let s2 = dt.sin().powi(2);
    (0..1usize << n)
        .filter(|s| !single_jump || s.count_ones() <= 1)
        .map(|s| s2.powi(s.count_ones() as i32) * rho[(s, s)].re)
        .sum()
}

fn reduce_system(ctx: &SteeringContext, chi: &DMatrix<C64>) -> DMatrix<C64> {
    let split = ctx.split();
    let sd = split.system_dim();
    let mut rho = DMatrix::zeros(sd, sd);
    for a in 0..split.ancilla_dim() {
        let idx = split.system_block(a);
        for i in 0..sd {
            for j in 0..sd {
                rho[(i, j)] += chi[(idx[i], idx[j])];
            }
        }
    }
    rho
}

fn attach_reference(ctx: &SteeringContext, rho: &DMatrix<C64>) -> DMatrix<C64> {
    let n = ctx.dim();
    let idx = ctx.split().system_block(0);
    let mut chi = DMatrix::zeros(n, n);
    for i in 0..idx.len() {
        for j in 0..idx.len() {
            chi[(idx[i], idx[j])] = rho[(i, j)];
        }
    }
    chi
}

/// Run the commuting toy model on `n ≤ 3` qubit pairs.
pub fn commuting_toy_model(
    n: usize,
    dt: f64,
    periods: usize,
    start: &InitialState,
    trajectories: usize,
    seed: u64,
) -> Result<ToyModelResult> {
    if n == 0 || n > 3 {
        return Err(SteerError::InvalidArgument(format!(
            "the exact toy model is limited to 1..=3 qubit pairs, got {n}"
        )));
    }
    let ctx = SteeringContext::commuting_toy(n)?;
    let psi = PureState::new(ctx.layout(), start)?;
    let v = DVector::from_column_slice(psi.amplitudes());
    let mut rho = reduce_system(&ctx, &(&v * v.adjoint()));
    let u = unitary_exp(&ctx.hamiltonian().to_dense(), dt);
    let mut channel = vec![rho[(0, 0)].re];
    let mut full = vec![rho[(0, 0)].re];
    let mut single = vec![rho[(0, 0)].re];
    for _ in 0..periods {
        full.push(sine_law_step(&rho, n, dt, false));
        single.push(sine_law_step(&rho, n, dt, true));
        let chi = attach_reference(&ctx, &rho);
        rho = reduce_system(&ctx, &(&u * chi * u.adjoint()));
        channel.push(rho[(0, 0)].re);
    }
    let ensemble = if trajectories > 0 {
        let config = ProtocolConfig {
            dt,
            periods,
            initial: start.clone(),
            seed,
            trajectories,
            ..Default::default()
        };
        Some(run_ensemble(&ctx, &config)?)
    } else {
        None
    };
    Ok(ToyModelResult {
        n,
        dt,
        channel_fidelity: channel,
        recursion_full: full,
        recursion_single: single,
        ensemble,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn all_down(n: usize) -> InitialState {
        let mut v = vec![C64::new(0.0, 0.0); 1 << n];
        v[(1 << n) - 1] = C64::new(1.0, 0.0);
        InitialState::System(v)
    }

    #[test]
    fn half_period_converges_in_one_step() {
        let r = commuting_toy_model(3, PI / 2.0, 3, &all_down(3), 0, 0).unwrap();
        assert!(r.channel_fidelity[0].abs() < 1e-14);
        for f in &r.channel_fidelity[1..] {
            assert!((f - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn two_pairs_quarter_period() {
        let r = commuting_toy_model(2, PI / 4.0, 1, &all_down(2), 0, 0).unwrap();
        // both sites must flip: sin⁴(π/4)
        assert!((r.channel_fidelity[1] - 0.25).abs() < 1e-12);
        assert!((r.recursion_full[1] - 0.25).abs() < 1e-12);
        assert!(r.recursion_single[1].abs() < 1e-12);
    }

    #[test]
    fn recursion_holds_for_product_starts() {
        for dt in [PI / 8.0, PI / 4.0, PI / 2.0, 0.37] {
            let r = commuting_toy_model(3, dt, 6, &InitialState::RandomProduct(5), 0, 0).unwrap();
            assert!(r.max_recursion_error() < 1e-12, "dt={dt}");
        }
    }

    #[test]
    fn trajectories_reproduce_the_channel() {
        let r = commuting_toy_model(2, PI / 3.0, 3, &InitialState::RandomProduct(2), 3000, 4).unwrap();
        let e = r.ensemble.unwrap();
        for p in 1..=3 {
            let f = 1.0 - e.infidelity_post[p].mean;
            let se = e.infidelity_post[p].se.max(1e-3);
            assert!((f - r.channel_fidelity[p]).abs() < 4.0 * se, "period {p}: {f} vs {}", r.channel_fidelity[p]);
        }
    }
}
