//! Plain-text serialization of mapping sets.
//!
//! ```text
//! # comments start with '#'
//! kind = M1
//! waived = false
//! [operator 1]
//! |1,1> <2,2| 1 0
//! |1,0> <2,0| 0.7071067811865476 0
//! [operator 2]
//! ...
//! ```
//!
//! Values use Rust's shortest round-trip float formatting, so writing and
//! re-reading reproduces every coefficient bit for bit.

use std::fmt::Write as _;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use super::{MappingKind, MappingOperatorSet, DEST_LABELS, SOURCE_LABELS};
use crate::error::{Result, SteerError};

pub fn write_operator_set(set: &MappingOperatorSet) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "kind = {}", set.kind());
    let _ = writeln!(out, "waived = {}", set.sum_waived());
    for (a, c) in set.coefficients().iter().enumerate() {
        let _ = writeln!(out, "[operator {}]", a + 1);
        for (r, &(j, m)) in DEST_LABELS.iter().enumerate() {
            for (k, &(j2, m2)) in SOURCE_LABELS.iter().enumerate() {
                let z = c[(r, k)];
                if z != C64::new(0.0, 0.0) {
                    let _ = writeln!(out, "|{j},{m}> <{j2},{m2}| {:?} {:?}", z.re, z.im);
                }
            }
        }
    }
    out
}

fn parse_label(s: &str, open: char, close: char) -> Option<(i32, i32)> {
    let inner = s.strip_prefix(open)?.strip_suffix(close)?;
    let (j, m) = inner.split_once(',')?;
    Some((j.trim().parse().ok()?, m.trim().parse().ok()?))
}

fn parse_kind(s: &str) -> MappingKind {
    match s {
        "M1" => MappingKind::M1,
        "M3" => MappingKind::M3,
        _ => s
            .strip_prefix("M2(")
            .and_then(|r| r.strip_suffix(')'))
            .and_then(|a| a.parse().ok())
            .map(MappingKind::M2)
            .unwrap_or(MappingKind::Custom),
    }
}

/// Parse and validate. With `waive_sum`, the Hamiltonian-sum constraint is
/// skipped regardless of the file's `waived` flag.
pub fn parse_operator_set(text: &str, waive_sum: bool) -> Result<MappingOperatorSet> {
    let mut kind = MappingKind::Custom;
    let mut waived = false;
    let mut ops: Vec<DMatrix<C64>> = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        let err = |message: String| SteerError::Parse { line, message };
        let s = raw.split('#').next().unwrap().trim();
        if s.is_empty() {
            continue;
        }
        if s.starts_with('[') {
            if !s.ends_with(']') {
                return Err(err(format!("unterminated section header '{s}'")));
            }
            ops.push(DMatrix::zeros(4, 5));
            continue;
        }
        if let Some((key, value)) = s.split_once('=') {
            match key.trim() {
                "kind" => kind = parse_kind(value.trim()),
                "waived" => {
                    waived = value
                        .trim()
                        .parse()
                        .map_err(|_| err(format!("waived must be true or false, got '{}'", value.trim())))?
                }
                other => return Err(err(format!("unknown key '{other}'"))),
            }
            continue;
        }
        let fields: Vec<&str> = s.split_whitespace().collect();
        if fields.len() != 4 {
            return Err(err(format!("expected '|J,m> <2,m| re im', got '{s}'")));
        }
        let dest = parse_label(fields[0], '|', '>').ok_or_else(|| err(format!("bad ket '{}'", fields[0])))?;
        let src = parse_label(fields[1], '<', '|').ok_or_else(|| err(format!("bad bra '{}'", fields[1])))?;
        let r = DEST_LABELS
            .iter()
            .position(|&l| l == dest)
            .ok_or_else(|| err(format!("ket {dest:?} is not a spin-0/1 state")))?;
        let k = SOURCE_LABELS
            .iter()
            .position(|&l| l == src)
            .ok_or_else(|| err(format!("bra {src:?} is not a spin-2 state")))?;
        let re: f64 = fields[2].parse().map_err(|_| err(format!("bad number '{}'", fields[2])))?;
        let im: f64 = fields[3].parse().map_err(|_| err(format!("bad number '{}'", fields[3])))?;
        let c = ops
            .last_mut()
            .ok_or_else(|| err("entry before any [operator] header".into()))?;
        c[(r, k)] = C64::new(re, im);
    }
    if ops.is_empty() {
        return Err(SteerError::Parse {
            line: text.lines().count(),
            message: "no operators defined".into(),
        });
    }
    let waive = waive_sum || waived;
    let kind = if waive { MappingKind::Custom } else { kind };
    MappingOperatorSet::from_coefficients(kind, ops, waive)
}
