use std::io::Write;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use super::channel::TraceObservables;
use super::{dephasing_lindblad_evolve, ChannelTrace, DephasingGenerator, ResetChannel};
use crate::algebra::{steering_hamiltonian, ChainLayout, MappingOperatorSet};
use crate::error::{Result, SteerError};
use crate::protocol::{run_ensemble, EnsembleResult, ProtocolConfig, SteeringContext};

/// Absolute slack added to `k·se`; covers observables that are
/// deterministic across trajectories (zero standard error) up to rounding.
pub const NUMERIC_FLOOR: f64 = 1e-9;

/// One observable at one period: oracle value against the ensemble mean.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservableComparison {
    pub period: usize,
    pub observable: String,
    pub reference: f64,
    pub mean: f64,
    pub se: f64,
}

impl ObservableComparison {
    pub fn deviation(&self) -> f64 {
        (self.mean - self.reference).abs()
    }

    /// Deviation in units of the standard error (after the numeric floor).
    pub fn z(&self) -> f64 {
        let d = (self.deviation() - NUMERIC_FLOOR).max(0.0);
        if d == 0.0 {
            0.0
        } else {
            d / self.se
        }
    }

    pub fn within(&self, k: f64) -> bool {
        self.deviation() <= k * self.se + NUMERIC_FLOOR
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleComparison {
    pub rows: Vec<ObservableComparison>,
    /// Largest trace drift of the oracle states.
    pub trace_drift: f64,
}

impl OracleComparison {
    pub fn failures(&self, k: f64) -> Vec<&ObservableComparison> {
        self.rows.iter().filter(|r| !r.within(k)).collect()
    }

    pub fn passes(&self, k: f64) -> bool {
        self.failures(k).is_empty()
    }

    pub fn max_z(&self) -> f64 {
        self.rows.iter().map(|r| r.z()).fold(0.0, f64::max)
    }

    /// `period,observable,oracle,mean,se,z`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "period,observable,oracle,mean,se,z")?;
        for r in &self.rows {
            writeln!(w, "{},{},{:?},{:?},{:?},{:?}", r.period, r.observable, r.reference, r.mean, r.se, r.z())?;
        }
        Ok(())
    }
}

/// Line up ensemble statistics with an oracle trace: `E_b` and fidelity
/// at every period (0 = initial), per-site `⟨S^z⟩` before each measurement.
pub fn compare_with_trace(result: &EnsembleResult, trace: &ChannelTrace) -> Result<OracleComparison> {
    let periods = result.periods();
    if trace.energy.len() != periods + 1 || trace.magnetization_pre.len() != periods {
        return Err(SteerError::InvalidArgument(format!(
            "oracle trace covers {} periods, ensemble {periods}",
            trace.magnetization_pre.len()
        )));
    }
    let mut rows = Vec::new();
    for n in 0..=periods {
        rows.push(ObservableComparison {
            period: n,
            observable: "Eb".into(),
            reference: trace.energy[n],
            mean: result.energy_pre[n].mean,
            se: result.energy_pre[n].se,
        });
        rows.push(ObservableComparison {
            period: n,
            observable: "fidelity".into(),
            reference: trace.fidelity[n],
            mean: 1.0 - result.infidelity_pre[n].mean,
            se: result.infidelity_pre[n].se,
        });
        if n == 0 {
            continue;
        }
        for (s, m) in result.magnetization_pre[n - 1].iter().enumerate() {
            rows.push(ObservableComparison {
                period: n,
                observable: format!("Sz{s}"),
                reference: trace.magnetization_pre[n - 1][s],
                mean: m.mean,
                se: m.se,
            });
        }
    }
    Ok(OracleComparison {
        rows,
        trace_drift: trace.trace_drift,
    })
}

fn system_projector(ctx: &SteeringContext, config: &ProtocolConfig) -> Result<DMatrix<C64>> {
    let psi = crate::engine::PureState::new(ctx.layout(), &config.initial)?;
    let split = ctx.split();
    let v = nalgebra::DVector::from_column_slice(&psi.system_slice(split, 0));
    if (v.norm() - 1.0).abs() > 1e-12 {
        return Err(SteerError::InvalidArgument(
            "oracle comparison needs ancillas starting in the reference state".into(),
        ));
    }
    Ok(&v * v.adjoint())
}

/// Noiseless ensemble against the periodic-reset channel.
pub fn channel_comparison(
    ls: usize,
    set: &MappingOperatorSet,
    config: &ProtocolConfig,
) -> Result<(EnsembleResult, ChannelTrace, OracleComparison)> {
    if config.eps != 0.0 {
        return Err(SteerError::InvalidArgument("the reset channel oracle is noiseless; use eps = 0".into()));
    }
    let layout = ChainLayout::spin_one(ls)?;
    let h = steering_hamiltonian(&layout, set, 1.0)?.operator().to_dense();
    let channel = ResetChannel::new(&layout, &h, config.dt)?;
    let ctx = SteeringContext::aklt(ls, set)?;
    let rho0 = system_projector(&ctx, config)?;
    let trace = channel.trace(&rho0, config.periods)?;
    let result = run_ensemble(&ctx, config)?;
    let cmp = compare_with_trace(&result, &trace)?;
    Ok((result, trace, cmp))
}

/// Channel with dephasing at rate `eps` on every site during each period,
/// integrated with RK4 step `h`.
pub fn dephasing_trace(
    layout: &ChainLayout,
    hamiltonian: &DMatrix<C64>,
    eps: f64,
    dt: f64,
    rho0: &DMatrix<C64>,
    periods: usize,
    h: f64,
) -> Result<ChannelTrace> {
    let gen = DephasingGenerator::new(layout, hamiltonian, eps)?;
    let channel = ResetChannel::new(layout, hamiltonian, dt)?;
    let obs = TraceObservables::new(layout)?;
    let mut out = ChannelTrace::default();
    let mut rho = rho0.clone();
    obs.record(&mut out, &rho, None);
    for _ in 0..periods {
        let chi = dephasing_lindblad_evolve(&gen, &channel.attach_reference(&rho), dt, h)?;
        rho = channel.trace_ancillas(&chi);
        obs.record(&mut out, &rho, Some(&chi));
    }
    Ok(out)
}

/// Noisy ensemble against the dephasing master equation.
pub fn dephasing_comparison(
    ls: usize,
    set: &MappingOperatorSet,
    config: &ProtocolConfig,
    h: f64,
) -> Result<(EnsembleResult, ChannelTrace, OracleComparison)> {
    let layout = ChainLayout::spin_one(ls)?;
    let hd = steering_hamiltonian(&layout, set, 1.0)?.operator().to_dense();
    let ctx = SteeringContext::aklt(ls, set)?;
    let rho0 = system_projector(&ctx, config)?;
    let trace = dephasing_trace(&layout, &hd, config.eps, config.dt, &rho0, config.periods, h)?;
    let result = run_ensemble(&ctx, config)?;
    let cmp = compare_with_trace(&result, &trace)?;
    Ok((result, trace, cmp))
}
