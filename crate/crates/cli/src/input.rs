//! Input-state specifications.
//!
//! A spec is a comma-separated list with one token per wire, top to
//! bottom. Tokens: a basis digit `0..d-1`, `chi` (the uniform
//! superposition), `psi:[amp,amp,...]` (explicit amplitudes, normalized
//! here; entries are complex literals like `0.6` or `0.48-0.64i`), or
//! `haar:<seed>` (a seeded Haar-random state). Commas inside `[...]`
//! belong to the amplitude list.

use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use num_complex::Complex64;
use qswap_core::{Dimension, StateVector};

/// Splits on commas that are not nested inside brackets.
fn split_top_level(spec: &str) -> Vec<&str> {
    let mut parts = Vec::new();
    let mut depth = 0usize;
    let mut start = 0usize;
    for (i, ch) in spec.char_indices() {
        match ch {
            '[' => depth += 1,
            ']' => depth = depth.saturating_sub(1),
            ',' if depth == 0 => {
                parts.push(&spec[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    parts.push(&spec[start..]);
    parts
}

/// Parses one per-wire token into a one-wire state.
pub fn parse_wire_token(token: &str, dim: Dimension) -> Result<StateVector> {
    let token = token.trim();
    let d = dim.get();
    if token == "chi" {
        return Ok(StateVector::chi(dim));
    }
    if let Some(rest) = token.strip_prefix("haar:") {
        let seed: u64 = rest
            .parse()
            .with_context(|| format!("invalid haar seed {rest:?}"))?;
        return Ok(StateVector::haar_seeded(dim, seed));
    }
    if let Some(rest) = token.strip_prefix("psi:") {
        let list = rest
            .strip_prefix('[')
            .and_then(|r| r.strip_suffix(']'))
            .ok_or_else(|| anyhow!("psi token needs a bracketed amplitude list, got {token:?}"))?;
        let amps: Vec<Complex64> = list
            .split(',')
            .map(|a| {
                Complex64::from_str(a.trim())
                    .map_err(|_| anyhow!("invalid amplitude {:?}", a.trim()))
            })
            .collect::<Result<_>>()?;
        if amps.len() != d {
            bail!("psi token lists {} amplitudes; dimension {d} needs exactly {d}", amps.len());
        }
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            bail!("psi amplitudes must not all vanish");
        }
        let amps = amps.into_iter().map(|a| a / norm).collect();
        return Ok(StateVector::from_amplitudes(dim, 1, amps)?);
    }
    if let Ok(digit) = token.parse::<usize>() {
        if digit >= d {
            bail!("basis digit {digit} out of range for dimension {d}");
        }
        return Ok(StateVector::basis(dim, 1, digit)?);
    }
    bail!("unrecognized wire token {token:?}; expected a digit, chi, psi:[...], or haar:<seed>")
}

/// Parses a whole input spec into an `n_wires`-wire product state.
pub fn parse_input_spec(spec: &str, dim: Dimension, n_wires: usize) -> Result<StateVector> {
    let tokens = split_top_level(spec);
    if tokens.len() != n_wires {
        bail!(
            "input spec has {} token(s); the circuit has {n_wires} wire(s)",
            tokens.len()
        );
    }
    let mut state: Option<StateVector> = None;
    for (wire, token) in tokens.iter().enumerate() {
        let factor =
            parse_wire_token(token, dim).with_context(|| format!("wire {wire} of input spec"))?;
        state = Some(match state {
            None => factor,
            Some(s) => s.tensor(&factor)?,
        });
    }
    Ok(state.expect("n_wires is at least 1"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dim(d: usize) -> Dimension {
        Dimension::new(d).unwrap()
    }

    #[test]
    fn digits_chi_and_explicit_amplitudes_parse() {
        let s = parse_input_spec("1,chi", dim(3), 2).unwrap();
        assert_eq!(s.n_wires(), 2);
        let expected = StateVector::basis(dim(3), 1, 1)
            .unwrap()
            .tensor(&StateVector::chi(dim(3)))
            .unwrap();
        assert_eq!(s.max_abs_diff(&expected).unwrap(), 0.0);

        // psi amplitudes are normalized and may be complex.
        let s = parse_wire_token("psi:[3,0-4i]", dim(2)).unwrap();
        assert!((s.amplitude(0).re - 0.6).abs() < 1e-15);
        assert!((s.amplitude(1).im + 0.8).abs() < 1e-15);
    }

    #[test]
    fn haar_tokens_are_seed_deterministic() {
        let a = parse_wire_token("haar:7", dim(5)).unwrap();
        let b = parse_wire_token("haar:7", dim(5)).unwrap();
        let c = parse_wire_token("haar:8", dim(5)).unwrap();
        assert_eq!(a.max_abs_diff(&b).unwrap(), 0.0);
        assert!(a.max_abs_diff(&c).unwrap() > 1e-3);
    }

    #[test]
    fn bracketed_commas_do_not_split_tokens() {
        let s = parse_input_spec("psi:[1,1i],0", dim(2), 2).unwrap();
        assert_eq!(s.len(), 4);
        assert!((s.amplitude(0).norm() - 1.0 / 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn malformed_tokens_are_rejected() {
        assert!(parse_wire_token("2", dim(2)).is_err());
        assert!(parse_wire_token("psii:[1,0]", dim(2)).is_err());
        assert!(parse_wire_token("psi:[1]", dim(2)).is_err());
        assert!(parse_wire_token("psi:[0,0]", dim(2)).is_err());
        assert!(parse_wire_token("haar:x", dim(2)).is_err());
        assert!(parse_input_spec("0,0", dim(2), 3).is_err());
    }
}
