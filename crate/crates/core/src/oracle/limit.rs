use std::io::Write;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use super::{lindblad_evolve, LindbladGenerator, LindbladOptions, ResetChannel};
use crate::algebra::{aklt_hamiltonian, steering_hamiltonian, ChainLayout, MappingOperatorSet};
use crate::error::{Result, SteerError};
use crate::fits::linear_fit;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitRow {
    pub dt: f64,
    pub periods: usize,
    /// `max_n |E_b^channel(n) − E_b^Lindblad(n·δt²)|`.
    pub max_dev: f64,
}

/// Channel-versus-Lindbladian deviations for a list of reset intervals.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitTable {
    pub ls: usize,
    /// Rescaled-time horizon `s = J·δt·t`.
    pub horizon: f64,
    pub rows: Vec<LimitRow>,
    /// Slope of `log(max_dev)` against `log(δt)`.
    pub fitted_order: f64,
    pub order_se: f64,
}

impl LimitTable {
    pub fn is_monotone(&self) -> bool {
        let mut rows = self.rows.clone();
        rows.sort_by(|a, b| b.dt.partial_cmp(&a.dt).unwrap());
        rows.windows(2).all(|w| w[1].max_dev < w[0].max_dev)
    }
}

/// Compare `n` periods of the reset channel at interval `δt` with the
/// rate-`J` effective Lindbladian at rescaled time `s = n·δt²`, for
/// `s ∈ [0, horizon]`, starting from the system state `rho0`.
pub fn lindblad_limit_check(
    dts: &[f64],
    ls: usize,
    set: &MappingOperatorSet,
    rho0: &DMatrix<C64>,
    horizon: f64,
) -> Result<LimitTable> {
    if dts.len() < 2 {
        return Err(SteerError::InvalidArgument("need at least two reset intervals".into()));
    }
    let layout = ChainLayout::spin_one(ls)?;
    let h = steering_hamiltonian(&layout, set, 1.0)?.operator().to_dense();
    let gen = LindbladGenerator::new(ls, set, 1.0)?;
    let energy = aklt_hamiltonian(ls)?.operator().to_dense();
    let bonds = (ls - 1) as f64;
    let eb = |rho: &DMatrix<C64>| (&energy * rho).trace().re / bonds;
    let mut rows = Vec::with_capacity(dts.len());
    for &dt in dts {
        if !(dt > 0.0) {
            return Err(SteerError::InvalidArgument(format!("reset interval must be positive, got {dt}")));
        }
        let channel = ResetChannel::new(&layout, &h, dt)?;
        let ds = dt * dt;
        let periods = (horizon / ds + 1e-9).floor() as usize;
        let opts = LindbladOptions {
            step: Some(1e-3f64.min(ds)),
            ..Default::default()
        };
        let mut rho_c = rho0.clone();
        let mut rho_l = rho0.clone();
        let mut max_dev: f64 = 0.0;
        for _ in 0..periods {
            rho_c = channel.step_system(&rho_c);
            rho_l = lindblad_evolve(&gen, &rho_l, ds, &opts)?.0;
            max_dev = max_dev.max((eb(&rho_c) - eb(&rho_l)).abs());
        }
        log::info!("lindblad limit: dt = {dt:.4}, {periods} periods, max deviation {max_dev:.4e}");
        rows.push(LimitRow { dt, periods, max_dev });
    }
    let x: Vec<f64> = rows.iter().map(|r| r.dt.ln()).collect();
    let y: Vec<f64> = rows.iter().map(|r| r.max_dev.max(1e-300).ln()).collect();
    let fit = linear_fit(&x, &y, None)?;
    Ok(LimitTable {
        ls,
        horizon,
        rows,
        fitted_order: fit.slope,
        order_se: fit.slope_se,
    })
}

/// CSV with columns `dt,max_dev_Eb,fitted_order`.
pub fn write_limit_csv<W: Write>(mut w: W, table: &LimitTable) -> Result<()> {
    writeln!(w, "dt,max_dev_Eb,fitted_order")?;
    for r in &table.rows {
        writeln!(w, "{:?},{:?},{:?}", r.dt, r.max_dev, table.fitted_order)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{mapping_set, MappingKind};
    use std::f64::consts::PI;

    #[test]
    fn deviation_shrinks_with_the_interval() {
        let set = mapping_set(MappingKind::M1).unwrap();
        let mut rho = DMatrix::<C64>::zeros(9, 9);
        rho[(0, 0)] = C64::new(1.0, 0.0);
        let t = lindblad_limit_check(&[0.4 * PI, 0.2 * PI, 0.1 * PI], 2, &set, &rho, 3.0).unwrap();
        assert!(t.is_monotone(), "{t:?}");
        assert!(t.fitted_order > 0.5);
    }
}
