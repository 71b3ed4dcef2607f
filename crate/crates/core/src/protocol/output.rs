use std::fmt::Write as _;
use std::io::Write;

use sha2::{Digest, Sha256};

use super::{EnsembleResult, ProtocolConfig, TrajectoryRecord};
use crate::algebra::{write_operator_set, MappingOperatorSet};
use crate::error::Result;

pub fn sha256_hex(bytes: &[u8]) -> String {
    let d = Sha256::digest(bytes);
    let mut s = String::with_capacity(64);
    for b in d.iter() {
        let _ = write!(s, "{b:02x}");
    }
    s
}

pub fn config_digest(config: &ProtocolConfig) -> String {
    sha256_hex(config.canonical().as_bytes())
}

/// Digest of the serialized operator set.
pub fn operator_digest(set: &MappingOperatorSet) -> String {
    sha256_hex(write_operator_set(set).as_bytes())
}

/// Per-period CSV: `period,time,mean_Eb,se_Eb,mean_infid,se_infid,mean_S_pre,mean_S_post,flips_mean`.
/// Energy and infidelity are sampled before the ancilla measurement.
pub fn write_ensemble_csv<W: Write>(mut w: W, result: &EnsembleResult) -> Result<()> {
    writeln!(w, "period,time,mean_Eb,se_Eb,mean_infid,se_infid,mean_S_pre,mean_S_post,flips_mean")?;
    for n in 0..result.times.len() {
        writeln!(
            w,
            "{},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?}",
            n,
            result.times[n],
            result.energy_pre[n].mean,
            result.energy_pre[n].se,
            result.infidelity_pre[n].mean,
            result.infidelity_pre[n].se,
            result.entropy_pre[n].mean,
            result.entropy_post[n].mean,
            result.flips_mean[n],
        )?;
    }
    Ok(())
}

/// One line per period with one symbol per ancilla: `u`, `0`, `d`
/// (qubit ancillas: `u`, `d`).
pub fn outcome_log(record: &TrajectoryRecord, local_dim: usize) -> String {
    let mut s = String::new();
    for period in &record.outcomes {
        for &o in period {
            s.push(match (local_dim, o) {
                (_, 0) => 'u',
                (3, 1) => '0',
                _ => 'd',
            });
        }
        s.push('\n');
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sha256_known_vector() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
