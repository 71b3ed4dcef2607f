//! Debug dumps: a text header `qutrits=L layout=s1,a1,…` followed by a
//! newline and the amplitudes as little-endian (re, im) f64 pairs.

use std::io::{BufRead, Write};

use num_complex::Complex64 as C64;

use super::PureState;
use crate::algebra::ChainLayout;
use crate::error::{Result, SteerError};

pub fn write_snapshot<W: Write>(mut w: W, state: &PureState) -> Result<()> {
    let layout = state.layout();
    writeln!(w, "qutrits={} layout={}", layout.n_sites(), layout.describe())?;
    let mut buf = Vec::with_capacity(16 * state.amplitudes().len());
    for z in state.amplitudes() {
        buf.extend_from_slice(&z.re.to_le_bytes());
        buf.extend_from_slice(&z.im.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

pub fn read_snapshot<R: BufRead>(mut r: R) -> Result<PureState> {
    let mut header = String::new();
    r.read_line(&mut header)?;
    let bad = |m: &str| SteerError::Parse { line: 1, message: m.to_string() };
    let mut qutrits = None;
    let mut desc = None;
    for field in header.split_whitespace() {
        match field.split_once('=') {
            Some(("qutrits", v)) => qutrits = v.parse::<usize>().ok(),
            Some(("layout", v)) => desc = Some(v.to_string()),
            _ => return Err(bad(&format!("unexpected header field '{field}'"))),
        }
    }
    let (qutrits, desc) = match (qutrits, desc) {
        (Some(q), Some(d)) => (q, d),
        _ => return Err(bad("header needs qutrits= and layout=")),
    };
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.len() % 16 != 0 {
        return Err(bad("payload is not a whole number of complex values"));
    }
    let n = bytes.len() / 16;
    let d = (2..=3)
        .find(|&d: &usize| d.checked_pow(qutrits as u32) == Some(n))
        .ok_or_else(|| bad("payload length does not match the site count"))?;
    let layout = ChainLayout::from_description(&desc, d)?;
    if layout.n_sites() != qutrits {
        return Err(bad("layout does not match the site count"));
    }
    let amps = bytes
        .chunks_exact(16)
        .map(|c| {
            C64::new(
                f64::from_le_bytes(c[..8].try_into().unwrap()),
                f64::from_le_bytes(c[8..].try_into().unwrap()),
            )
        })
        .collect();
    PureState::from_amplitudes(&layout, amps)
}
