use std::fmt;
use std::str::FromStr;

use anyhow::{bail, Context, Result};

/// Exact rational multiple of π, so sweep grids do not accumulate drift.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PiMultiple {
    num: i64,
    den: i64,
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

impl PiMultiple {
    pub fn new(num: i64, den: i64) -> Result<Self> {
        if den == 0 {
            bail!("zero denominator");
        }
        let g = gcd(num, den).max(1);
        let s = if den < 0 { -1 } else { 1 };
        Ok(PiMultiple {
            num: s * num / g,
            den: s * den / g,
        })
    }

    pub fn value(&self) -> f64 {
        std::f64::consts::PI * self.num as f64 / self.den as f64
    }

    pub fn coefficient(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// `self + (other − self)·k/n`.
    pub fn lerp(&self, other: &Self, k: i64, n: i64) -> Result<Self> {
        let den = self.den * other.den * n;
        let num = self.num * other.den * n + (other.num * self.den - self.num * other.den) * k;
        Self::new(num, den)
    }
}

fn parse_decimal(s: &str) -> Result<(i64, i64)> {
    if let Some((a, b)) = s.split_once('/') {
        let (an, ad) = parse_decimal(a.trim())?;
        let (bn, bd) = parse_decimal(b.trim())?;
        return Ok((an * bd, ad * bn));
    }
    if s.is_empty() {
        return Ok((1, 1));
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(r) => (true, r),
        None => (false, s),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if int.is_empty() && frac.is_empty() || !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        bail!("'{s}' is not a decimal number");
    }
    if frac.len() > 12 {
        bail!("'{s}' has more than 12 decimals");
    }
    let den = 10i64.pow(frac.len() as u32);
    let num: i64 = format!("{int}{frac}").parse().unwrap_or(0);
    Ok((if neg { -num } else { num }, den))
}

impl FromStr for PiMultiple {
    type Err = anyhow::Error;

    /// `0.5pi`, `0.5`, `1/2pi`, `pi/2`, `pi` — always in units of π.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().replace('π', "pi");
        let (num, den) = if let Some(rest) = t.strip_prefix("pi") {
            match rest.strip_prefix('/') {
                Some(d) => parse_decimal(&format!("1/{d}")),
                None if rest.is_empty() => Ok((1, 1)),
                None => bail!("cannot parse '{s}'"),
            }
        } else {
            let body = t.strip_suffix("pi").unwrap_or(&t);
            let body = body.strip_suffix('*').unwrap_or(body);
            parse_decimal(body)
        }
        .with_context(|| format!("invalid multiple of pi '{s}'"))?;
        Self::new(num, den)
    }
}

impl fmt::Display for PiMultiple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}pi", self.num)
        } else {
            write!(f, "{}/{}pi", self.num, self.den)
        }
    }
}

/// `a:b:n` (inclusive, `n` points) or a comma list.
pub fn pi_grid(spec: &str) -> Result<Vec<PiMultiple>> {
    let parts: Vec<&str> = spec.split(':').collect();
    match parts.as_slice() {
        [a, b, n] => {
            let a: PiMultiple = a.parse()?;
            let b: PiMultiple = b.parse()?;
            let n: i64 = n.trim().parse().with_context(|| format!("invalid point count in '{spec}'"))?;
            if n < 1 {
                bail!("grid '{spec}' needs at least one point");
            }
            if n == 1 {
                return Ok(vec![a]);
            }
            (0..n).map(|k| a.lerp(&b, k, n - 1)).collect()
        }
        [_] => spec.split(',').map(|v| v.parse()).collect(),
        _ => bail!("grid '{spec}' must be a:b:n or a comma list"),
    }
}

/// Real grid: `a:b:n` linear, `log:a:b:n` geometric, or a comma list.
pub fn real_grid(spec: &str) -> Result<Vec<f64>> {
    let parse = |v: &str| -> Result<f64> { v.trim().parse().with_context(|| format!("invalid number '{v}'")) };
    let parts: Vec<&str> = spec.split(':').collect();
    let (log, parts) = match parts.first() {
        Some(&"log") => (true, &parts[1..]),
        _ => (false, &parts[..]),
    };
    match parts {
        [a, b, n] => {
            let (a, b) = (parse(a)?, parse(b)?);
            let n: usize = n.trim().parse().with_context(|| format!("invalid point count in '{spec}'"))?;
            if n < 1 || (log && (a <= 0.0 || b <= 0.0)) {
                bail!("invalid grid '{spec}'");
            }
            Ok((0..n)
                .map(|k| {
                    let f = if n == 1 { 0.0 } else { k as f64 / (n - 1) as f64 };
                    if log {
                        (a.ln() + (b.ln() - a.ln()) * f).exp()
                    } else {
                        a + (b - a) * f
                    }
                })
                .collect())
        }
        [_] if !log => spec.split(',').map(parse).collect(),
        _ => bail!("grid '{spec}' must be a:b:n, log:a:b:n or a comma list"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_common_spellings() {
        let half = PiMultiple::new(1, 2).unwrap();
        for s in ["0.5pi", "0.5", "1/2pi", "pi/2", "0.50π", "0.5*pi"] {
            assert_eq!(s.parse::<PiMultiple>().unwrap(), half, "{s}");
        }
        assert_eq!("pi".parse::<PiMultiple>().unwrap(), PiMultiple::new(1, 1).unwrap());
        assert!("abc".parse::<PiMultiple>().is_err());
    }

    #[test]
    fn grid_is_exact() {
        let g = pi_grid("0.1pi:0.9pi:9").unwrap();
        assert_eq!(g.len(), 9);
        assert_eq!(g[4], PiMultiple::new(1, 2).unwrap());
        assert_eq!(g[8], PiMultiple::new(9, 10).unwrap());
        assert_eq!(pi_grid("0.2,0.5").unwrap().len(), 2);
        let r = real_grid("log:1e-4:1e-2:3").unwrap();
        assert!((r[1] - 1e-3).abs() < 1e-15);
    }
}
