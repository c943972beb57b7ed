//! Dense state vectors over `n` wires of equal dimension.

use ndarray::Array1;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::basis;
use crate::error::{Error, Result};
use crate::matrix::check_cap;
use crate::types::Dimension;
use crate::DEFAULT_TOLERANCE;

/// A normalized pure state of `n_wires` qudits, stored densely.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    dim: Dimension,
    n_wires: usize,
    amps: Array1<Complex64>,
}

impl StateVector {
    /// Computational basis state with the given composite index.
    pub fn basis(dim: Dimension, n_wires: usize, index: usize) -> Result<Self> {
        let total = basis::total_dim(dim.get(), n_wires);
        check_cap(total)?;
        if index >= total {
            return Err(Error::ShapeMismatch(format!(
                "basis index {index} out of range for dimension {total}"
            )));
        }
        let mut amps = Array1::zeros(total);
        amps[index] = Complex64::ONE;
        Ok(Self {
            dim,
            n_wires,
            amps,
        })
    }

    /// Basis state from per-wire digits, wire 0 first.
    pub fn from_digits(dim: Dimension, digits: &[usize]) -> Result<Self> {
        let d = dim.get();
        for &x in digits {
            if x >= d {
                return Err(Error::LabelOutOfRange { label: x, d });
            }
        }
        Self::basis(dim, digits.len(), basis::compose(digits, d))
    }

    /// Wraps explicit amplitudes; the squared norm must be 1 within
    /// [`DEFAULT_TOLERANCE`].
    pub fn from_amplitudes(dim: Dimension, n_wires: usize, amps: Vec<Complex64>) -> Result<Self> {
        let total = basis::total_dim(dim.get(), n_wires);
        check_cap(total)?;
        if amps.len() != total {
            return Err(Error::ShapeMismatch(format!(
                "expected {total} amplitudes for {n_wires} wire(s) at d = {}, got {}",
                dim.get(),
                amps.len()
            )));
        }
        let norm_sq: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm_sq - 1.0).abs() > DEFAULT_TOLERANCE {
            return Err(Error::NotNormalized((norm_sq - 1.0).abs()));
        }
        Ok(Self {
            dim,
            n_wires,
            amps: Array1::from_vec(amps),
        })
    }

    /// The one-wire uniform superposition `(1/sqrt d) sum_z |z>`, the image
    /// of `|0>` under both `F` and `FD`.
    pub fn chi(dim: Dimension) -> Self {
        let d = dim.get();
        let amp = Complex64::new(1.0 / (d as f64).sqrt(), 0.0);
        Self {
            dim,
            n_wires: 1,
            amps: Array1::from_elem(d, amp),
        }
    }

    /// A one-wire state drawn from the Haar measure using the supplied rng.
    pub fn haar_random<R: Rng>(dim: Dimension, rng: &mut R) -> Self {
        let d = dim.get();
        // Complex-normal entries, then normalize; rotation invariant.
        let mut amps: Vec<Complex64> = (0..d)
            .map(|_| Complex64::new(gaussian(rng), gaussian(rng)))
            .collect();
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        for a in &mut amps {
            *a /= norm;
        }
        Self {
            dim,
            n_wires: 1,
            amps: Array1::from_vec(amps),
        }
    }

    /// Deterministic Haar draw from a 64-bit seed (one ChaCha8 stream).
    pub fn haar_seeded(dim: Dimension, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::haar_random(dim, &mut rng)
    }

    pub fn dim(&self) -> Dimension {
        self.dim
    }

    pub fn d(&self) -> usize {
        self.dim.get()
    }

    pub fn n_wires(&self) -> usize {
        self.n_wires
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn amplitude(&self, index: usize) -> Complex64 {
        self.amps[index]
    }

    pub fn amplitudes(&self) -> &Array1<Complex64> {
        &self.amps
    }

    pub(crate) fn from_raw(dim: Dimension, n_wires: usize, amps: Array1<Complex64>) -> Self {
        Self {
            dim,
            n_wires,
            amps,
        }
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Probability mass on basis states whose `wire` digit equals `value`.
    pub fn digit_mass(&self, wire: usize, value: usize) -> Result<f64> {
        if wire >= self.n_wires {
            return Err(Error::WireOutOfRange {
                wire,
                n_wires: self.n_wires,
            });
        }
        let d = self.d();
        Ok(self
            .amps
            .iter()
            .enumerate()
            .filter(|(i, _)| basis::digit_of(*i, d, self.n_wires, wire) == value)
            .map(|(_, a)| a.norm_sqr())
            .sum())
    }

    /// Tensor product, `self` on the upper wires.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch(format!(
                "cannot tensor d = {} with d = {}",
                self.d(),
                other.d()
            )));
        }
        check_cap(self.len() * other.len())?;
        let mut amps = Array1::zeros(self.len() * other.len());
        for (i, a) in self.amps.iter().enumerate() {
            for (j, b) in other.amps.iter().enumerate() {
                amps[i * other.len() + j] = a * b;
            }
        }
        Ok(Self {
            dim: self.dim,
            n_wires: self.n_wires + other.n_wires,
            amps,
        })
    }

    /// Largest entrywise absolute difference from `other`.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        if self.len() != other.len() {
            return Err(Error::ShapeMismatch(format!(
                "comparing states of length {} and {}",
                self.len(),
                other.len()
            )));
        }
        Ok(self
            .amps
            .iter()
            .zip(other.amps.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }
}

fn gaussian<R: Rng>(rng: &mut R) -> f64 {
    // Box-Muller; u is kept away from 0 so the log is finite.
    let u: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let v: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    (-2.0 * u.ln()).sqrt() * v.cos()
}

/// Inner product `<a|b>`, conjugate-linear in `a`.
pub fn state_overlap(a: &StateVector, b: &StateVector) -> Result<Complex64> {
    if a.dim() != b.dim() || a.n_wires() != b.n_wires() {
        return Err(Error::ShapeMismatch(format!(
            "overlap of {} wire(s) at d = {} with {} wire(s) at d = {}",
            a.n_wires(),
            a.d(),
            b.n_wires(),
            b.d()
        )));
    }
    Ok(a.amps
        .iter()
        .zip(b.amps.iter())
        .map(|(x, y)| x.conj() * y)
        .sum())
}
