//! The gate set: shift and phase gates, the Fourier pair, and their
//! controlled versions, for any wire dimension `d >= 2`.
//!
//! Conventions, fixed once here and relied on everywhere else:
//!
//! * `X|y> = |y+1 mod d>` and `Z|y> = exp(-2 pi i y / d)|y>`.
//! * `F|y> = (1/sqrt d) sum_z exp(2 pi i z y / d)|z>`.
//! * `CX|x,y> = |x, y+x mod d>` with the control listed first.
//! * `CZ|x,y> = exp(-2 pi i x y / d)|x,y>`; symmetric in its two wires.
//! * The `*D` mnemonics are the adjoints (`XD = X^-1`, and so on). At
//!   `d = 2` every adjoint collapses onto its base gate.
//!
//! The sign of the `Z`/`CZ` phase is chosen so that applying `Z^k` to the
//! target, classically controlled on an outcome `k`, reproduces `CZ`
//! exactly; the same consistency holds for `X^k` and `CX`.
//! Phase entries are always computed from the angle `2 pi z y / d`
//! directly, never by repeated multiplication of a primitive root.

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::matrix::{check_cap, DenseUnitary};

/// Identifier of a gate in the fixed gate set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GateId {
    X,
    Xd,
    Z,
    Zd,
    H,
    F,
    Fd,
    Cx,
    Cxd,
    Cz,
    Czd,
}

impl GateId {
    pub const ALL: [GateId; 11] = [
        GateId::X,
        GateId::Xd,
        GateId::Z,
        GateId::Zd,
        GateId::H,
        GateId::F,
        GateId::Fd,
        GateId::Cx,
        GateId::Cxd,
        GateId::Cz,
        GateId::Czd,
    ];

    pub fn mnemonic(self) -> &'static str {
        match self {
            GateId::X => "X",
            GateId::Xd => "XD",
            GateId::Z => "Z",
            GateId::Zd => "ZD",
            GateId::H => "H",
            GateId::F => "F",
            GateId::Fd => "FD",
            GateId::Cx => "CX",
            GateId::Cxd => "CXD",
            GateId::Cz => "CZ",
            GateId::Czd => "CZD",
        }
    }

    pub fn parse(s: &str) -> Option<GateId> {
        GateId::ALL.into_iter().find(|g| g.mnemonic() == s)
    }

    /// Number of wires the gate acts on.
    pub fn arity(self) -> usize {
        match self {
            GateId::Cx | GateId::Cxd | GateId::Cz | GateId::Czd => 2,
            _ => 1,
        }
    }

    /// The gate whose matrix is the conjugate transpose of this one's.
    /// Self-adjoint gates map to themselves.
    pub fn adjoint(self) -> GateId {
        match self {
            GateId::X => GateId::Xd,
            GateId::Xd => GateId::X,
            GateId::Z => GateId::Zd,
            GateId::Zd => GateId::Z,
            GateId::H => GateId::H,
            GateId::F => GateId::Fd,
            GateId::Fd => GateId::F,
            GateId::Cx => GateId::Cxd,
            GateId::Cxd => GateId::Cx,
            GateId::Cz => GateId::Czd,
            GateId::Czd => GateId::Cz,
        }
    }

    /// For a controlled gate, the one-wire gate applied to the target per
    /// unit of the control digit.
    pub fn controlled_root(self) -> Option<GateId> {
        match self {
            GateId::Cx => Some(GateId::X),
            GateId::Cxd => Some(GateId::Xd),
            GateId::Cz => Some(GateId::Z),
            GateId::Czd => Some(GateId::Zd),
            _ => None,
        }
    }

    /// Inverse of [`GateId::controlled_root`].
    pub fn controlled_version(self) -> Option<GateId> {
        match self {
            GateId::X => Some(GateId::Cx),
            GateId::Xd => Some(GateId::Cxd),
            GateId::Z => Some(GateId::Cz),
            GateId::Zd => Some(GateId::Czd),
            _ => None,
        }
    }

    /// Dense matrix of the gate at dimension `d`.
    pub fn matrix(self, d: usize) -> Result<DenseUnitary> {
        match self {
            GateId::X => x(d),
            GateId::Xd => xd(d),
            GateId::Z => z(d),
            GateId::Zd => zd(d),
            GateId::H => {
                if d != 2 {
                    return Err(Error::UnsupportedDimension("H", d));
                }
                Ok(hadamard())
            }
            GateId::F => fourier(d),
            GateId::Fd => fourier_adj(d),
            GateId::Cx => cx(d),
            GateId::Cxd => cxd(d),
            GateId::Cz => cz(d),
            GateId::Czd => czd(d),
        }
    }
}

impl std::fmt::Display for GateId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.mnemonic())
    }
}

fn check_d(d: usize) -> Result<()> {
    if d < 2 {
        return Err(Error::InvalidDimension(d));
    }
    Ok(())
}

fn phase(angle: f64) -> Complex64 {
    Complex64::from_polar(1.0, angle)
}

/// Cyclic shift: `X|y> = |y+1 mod d>`.
pub fn x(d: usize) -> Result<DenseUnitary> {
    check_d(d)?;
    check_cap(d)?;
    let mut m = Array2::<Complex64>::zeros((d, d));
    for y in 0..d {
        m[((y + 1) % d, y)] = Complex64::ONE;
    }
    Ok(DenseUnitary::from_unitary_unchecked(m))
}

/// Inverse shift: `XD|y> = |y-1 mod d>`.
pub fn xd(d: usize) -> Result<DenseUnitary> {
    check_d(d)?;
    check_cap(d)?;
    let mut m = Array2::<Complex64>::zeros((d, d));
    for y in 0..d {
        m[((y + d - 1) % d, y)] = Complex64::ONE;
    }
    Ok(DenseUnitary::from_unitary_unchecked(m))
}

/// Phase gate: `Z|y> = exp(-2 pi i y / d)|y>`.
pub fn z(d: usize) -> Result<DenseUnitary> {
    check_d(d)?;
    check_cap(d)?;
    let mut m = Array2::<Complex64>::zeros((d, d));
    for y in 0..d {
        m[(y, y)] = phase(-TAU * y as f64 / d as f64);
    }
    Ok(DenseUnitary::from_unitary_unchecked(m))
}

/// Adjoint phase gate: `ZD|y> = exp(2 pi i y / d)|y>`.
pub fn zd(d: usize) -> Result<DenseUnitary> {
    check_d(d)?;
    check_cap(d)?;
    let mut m = Array2::<Complex64>::zeros((d, d));
    for y in 0..d {
        m[(y, y)] = phase(TAU * y as f64 / d as f64);
    }
    Ok(DenseUnitary::from_unitary_unchecked(m))
}

/// The qubit Hadamard. Defined for `d = 2` only; coincides with `F` there.
pub fn hadamard() -> DenseUnitary {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut m = Array2::<Complex64>::zeros((2, 2));
    m[(0, 0)] = Complex64::new(s, 0.0);
    m[(0, 1)] = Complex64::new(s, 0.0);
    m[(1, 0)] = Complex64::new(s, 0.0);
    m[(1, 1)] = Complex64::new(-s, 0.0);
    DenseUnitary::from_unitary_unchecked(m)
}

/// Fourier gate: `F|y> = (1/sqrt d) sum_z exp(2 pi i z y / d)|z>`.
pub fn fourier(d: usize) -> Result<DenseUnitary> {
    check_d(d)?;
    check_cap(d)?;
    let norm = 1.0 / (d as f64).sqrt();
    let mut m = Array2::<Complex64>::zeros((d, d));
    for ycol in 0..d {
        for zrow in 0..d {
            m[(zrow, ycol)] = phase(TAU * (zrow * ycol) as f64 / d as f64) * norm;
        }
    }
    Ok(DenseUnitary::from_unitary_unchecked(m))
}

/// Adjoint Fourier gate, with the opposite phase sign.
pub fn fourier_adj(d: usize) -> Result<DenseUnitary> {
    check_d(d)?;
    check_cap(d)?;
    let norm = 1.0 / (d as f64).sqrt();
    let mut m = Array2::<Complex64>::zeros((d, d));
    for ycol in 0..d {
        for zrow in 0..d {
            m[(zrow, ycol)] = phase(-TAU * (zrow * ycol) as f64 / d as f64) * norm;
        }
    }
    Ok(DenseUnitary::from_unitary_unchecked(m))
}

/// Controlled shift: `CX|x,y> = |x, y+x mod d>`, control first.
pub fn cx(d: usize) -> Result<DenseUnitary> {
    check_d(d)?;
    check_cap(d * d)?;
    let mut m = Array2::<Complex64>::zeros((d * d, d * d));
    for xc in 0..d {
        for y in 0..d {
            m[(xc * d + (y + xc) % d, xc * d + y)] = Complex64::ONE;
        }
    }
    Ok(DenseUnitary::from_unitary_unchecked(m))
}

/// Adjoint controlled shift: `CXD|x,y> = |x, y-x mod d>`.
pub fn cxd(d: usize) -> Result<DenseUnitary> {
    check_d(d)?;
    check_cap(d * d)?;
    let mut m = Array2::<Complex64>::zeros((d * d, d * d));
    for xc in 0..d {
        for y in 0..d {
            m[(xc * d + (y + d - xc) % d, xc * d + y)] = Complex64::ONE;
        }
    }
    Ok(DenseUnitary::from_unitary_unchecked(m))
}

/// Controlled phase: `CZ|x,y> = exp(-2 pi i x y / d)|x,y>`.
///
/// Diagonal, hence acting identically whichever wire is called the control.
pub fn cz(d: usize) -> Result<DenseUnitary> {
    check_d(d)?;
    check_cap(d * d)?;
    let mut m = Array2::<Complex64>::zeros((d * d, d * d));
    for xc in 0..d {
        for y in 0..d {
            let idx = xc * d + y;
            m[(idx, idx)] = phase(-TAU * (xc * y) as f64 / d as f64);
        }
    }
    Ok(DenseUnitary::from_unitary_unchecked(m))
}

/// Adjoint controlled phase: `CZD|x,y> = exp(2 pi i x y / d)|x,y>`.
pub fn czd(d: usize) -> Result<DenseUnitary> {
    check_d(d)?;
    check_cap(d * d)?;
    let mut m = Array2::<Complex64>::zeros((d * d, d * d));
    for xc in 0..d {
        for y in 0..d {
            let idx = xc * d + y;
            m[(idx, idx)] = phase(TAU * (xc * y) as f64 / d as f64);
        }
    }
    Ok(DenseUnitary::from_unitary_unchecked(m))
}
