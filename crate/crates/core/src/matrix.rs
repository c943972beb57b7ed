//! Dense unitary matrices and embedding of small gates into larger registers.

use ndarray::Array2;
use num_complex::Complex64;

use crate::basis;
use crate::error::{Error, Result};
use crate::{DEFAULT_TOLERANCE, MAX_TOTAL_DIM};

/// A dense square matrix validated (or constructed) to be unitary.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseUnitary {
    matrix: Array2<Complex64>,
}

impl DenseUnitary {
    /// Wraps a matrix after checking that it is square, within the size cap,
    /// and unitary to within [`DEFAULT_TOLERANCE`].
    pub fn new(matrix: Array2<Complex64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::ShapeMismatch(format!(
                "expected a square matrix, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        check_cap(matrix.nrows())?;
        let dev = unitarity_deviation(&matrix);
        if dev > DEFAULT_TOLERANCE {
            return Err(Error::NotUnitary(dev));
        }
        Ok(Self { matrix })
    }

    /// For construction sites where unitarity holds structurally
    /// (permutations, phase diagonals, products of unitaries, embeddings).
    pub(crate) fn from_unitary_unchecked(matrix: Array2<Complex64>) -> Self {
        debug_assert_eq!(matrix.nrows(), matrix.ncols());
        Self { matrix }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_unitary_unchecked(Array2::eye(dim))
    }

    /// Side length of the matrix (the full state-space dimension it acts on).
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.matrix[(row, col)]
    }

    pub fn as_array(&self) -> &Array2<Complex64> {
        &self.matrix
    }

    pub fn into_array(self) -> Array2<Complex64> {
        self.matrix
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_unitary_unchecked(adjoint_of(&self.matrix))
    }

    /// Matrix product `self * rhs` (so `rhs` acts first on states).
    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        if self.dim() != rhs.dim() {
            return Err(Error::ShapeMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.dim(),
                self.dim(),
                rhs.dim(),
                rhs.dim()
            )));
        }
        Ok(Self::from_unitary_unchecked(
            self.matrix.dot(&rhs.matrix),
        ))
    }

    /// `self` raised to a non-negative integer power.
    pub fn pow(&self, exponent: usize) -> Self {
        let mut out = Array2::eye(self.dim());
        for _ in 0..exponent {
            out = self.matrix.dot(&out);
        }
        Self::from_unitary_unchecked(out)
    }

    /// Largest entrywise absolute difference from `other`.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(Error::ShapeMismatch(format!(
                "comparing {}x{} with {}x{}",
                self.dim(),
                self.dim(),
                other.dim(),
                other.dim()
            )));
        }
        Ok(max_entry_diff(&self.matrix, &other.matrix))
    }
}

pub(crate) fn adjoint_of(m: &Array2<Complex64>) -> Array2<Complex64> {
    m.t().mapv(|z| z.conj())
}

pub(crate) fn max_entry_diff(a: &Array2<Complex64>, b: &Array2<Complex64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Max deviation of `U^dagger U` from the identity.
pub fn unitarity_deviation(m: &Array2<Complex64>) -> f64 {
    let product = adjoint_of(m).dot(m);
    let eye = Array2::<Complex64>::eye(m.nrows());
    max_entry_diff(&product, &eye)
}

pub(crate) fn check_cap(dim_total: usize) -> Result<()> {
    if dim_total > MAX_TOTAL_DIM {
        return Err(Error::DimensionCapExceeded(dim_total, MAX_TOTAL_DIM));
    }
    Ok(())
}

pub(crate) fn check_wires(wires: &[usize], n_wires: usize) -> Result<()> {
    for &w in wires {
        if w >= n_wires {
            return Err(Error::WireOutOfRange { wire: w, n_wires });
        }
    }
    for (i, &w) in wires.iter().enumerate() {
        if wires[..i].contains(&w) {
            return Err(Error::DuplicateWires);
        }
    }
    Ok(())
}

/// Embeds a gate acting on `wires` of an `n_wires`-register into the full
/// `d^n`-dimensional space, acting as the identity elsewhere.
///
/// `u` must be `d^k` on a side for `k = wires.len()`; `wires[j]` receives
/// the role of the gate's own wire `j` (for two-wire gates the control is
/// listed first).
pub fn tensor_embed(
    u: &DenseUnitary,
    wires: &[usize],
    n_wires: usize,
    d: usize,
) -> Result<DenseUnitary> {
    if d < 2 {
        return Err(Error::InvalidDimension(d));
    }
    check_wires(wires, n_wires)?;
    let k = wires.len();
    let dim_small = basis::total_dim(d, k);
    if u.dim() != dim_small {
        return Err(Error::DimensionMismatch(format!(
            "gate on {k} wire(s) at d = {d} must be {dim_small}-dimensional, got {}",
            u.dim()
        )));
    }
    let dim_total = basis::total_dim(d, n_wires);
    check_cap(dim_total)?;

    let strides: Vec<usize> = wires
        .iter()
        .map(|&w| basis::stride(d, n_wires, w))
        .collect();
    let mut out = Array2::<Complex64>::zeros((dim_total, dim_total));
    for col in 0..dim_total {
        // Split the column index into the gate's sub-index and the rest.
        let mut sub_in = 0;
        let mut rest = col;
        for &s in &strides {
            let digit = (col / s) % d;
            sub_in = sub_in * d + digit;
            rest -= digit * s;
        }
        for sub_out in 0..dim_small {
            let amp = u.get(sub_out, sub_in);
            if amp != Complex64::ZERO {
                let mut row = rest;
                let mut remaining = sub_out;
                for &s in strides.iter().rev() {
                    row += (remaining % d) * s;
                    remaining /= d;
                }
                out[(row, col)] = amp;
            }
        }
    }
    Ok(DenseUnitary::from_unitary_unchecked(out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Builds the embedding by explicit basis-state bookkeeping, as an
    /// oracle independent of the stride arithmetic in `tensor_embed`.
    fn embed_oracle(
        u: &DenseUnitary,
        wires: &[usize],
        n_wires: usize,
        d: usize,
    ) -> Array2<Complex64> {
        let dim_total = basis::total_dim(d, n_wires);
        let k = wires.len();
        let mut out = Array2::<Complex64>::zeros((dim_total, dim_total));
        for col in 0..dim_total {
            let digits = basis::decompose(col, d, n_wires);
            let sub_digits: Vec<usize> = wires.iter().map(|&w| digits[w]).collect();
            let sub_in = basis::compose(&sub_digits, d);
            for sub_out in 0..basis::total_dim(d, k) {
                let out_digits = basis::decompose(sub_out, d, k);
                let mut full = digits.clone();
                for (j, &w) in wires.iter().enumerate() {
                    full[w] = out_digits[j];
                }
                let row = basis::compose(&full, d);
                out[(row, col)] += u.get(sub_out, sub_in);
            }
        }
        out
    }

    #[test]
    fn x_on_lower_wire_of_two() {
        let embedded = tensor_embed(&gates::x(2).unwrap(), &[1], 2, 2).unwrap();
        let expected = [
            [0.0, 1.0, 0.0, 0.0],
            [1.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
            [0.0, 0.0, 1.0, 0.0],
        ];
        for r in 0..4 {
            for col in 0..4 {
                assert_eq!(embedded.get(r, col), c(expected[r][col], 0.0));
            }
        }
    }

    #[test]
    fn cx_with_control_on_lower_wire() {
        // Control on wire 1, target on wire 0: |x,y> -> |x(+)y, y>.
        // Brute force: fixes 00 and 10, swaps 01 and 11.
        let embedded = tensor_embed(&gates::cx(2).unwrap(), &[1, 0], 2, 2).unwrap();
        let mut oracle = Array2::<Complex64>::zeros((4, 4));
        for x in 0..2 {
            for y in 0..2 {
                oracle[(((x + y) % 2) * 2 + y, x * 2 + y)] = c(1.0, 0.0);
            }
        }
        assert_eq!(oracle[(0, 0)], c(1.0, 0.0));
        assert_eq!(oracle[(3, 1)], c(1.0, 0.0));
        assert_eq!(oracle[(2, 2)], c(1.0, 0.0));
        assert_eq!(oracle[(1, 3)], c(1.0, 0.0));
        assert_eq!(max_entry_diff(embedded.as_array(), &oracle), 0.0);
    }

    #[test]
    fn cz_embedding_is_wire_order_independent() {
        let d = 3;
        let a = tensor_embed(&gates::cz(d).unwrap(), &[0, 1], 2, d).unwrap();
        let b = tensor_embed(&gates::cz(d).unwrap(), &[1, 0], 2, d).unwrap();
        assert!(a.max_abs_diff(&b).unwrap() <= 1e-10);
    }

    #[test]
    fn embedding_matches_basis_oracle() {
        for d in [2usize, 3, 5] {
            let two_wire = gates::cxd(d).unwrap();
            for wires in [[0usize, 1], [1, 0], [0, 2], [2, 1]] {
                let fast = tensor_embed(&two_wire, &wires, 3, d).unwrap();
                let slow = embed_oracle(&two_wire, &wires, 3, d);
                assert_eq!(max_entry_diff(fast.as_array(), &slow), 0.0);
            }
            let one_wire = gates::fourier(d).unwrap();
            for w in 0..3 {
                let fast = tensor_embed(&one_wire, &[w], 3, d).unwrap();
                let slow = embed_oracle(&one_wire, &[w], 3, d);
                assert_eq!(max_entry_diff(fast.as_array(), &slow), 0.0);
            }
        }
    }

    #[test]
    fn disjoint_embeddings_commute_exactly() {
        for d in [2usize, 3, 5] {
            let f = tensor_embed(&gates::fourier(d).unwrap(), &[0], 3, d).unwrap();
            let cx = tensor_embed(&gates::cx(d).unwrap(), &[1, 2], 3, d).unwrap();
            let ab = f.matmul(&cx).unwrap();
            let ba = cx.matmul(&f).unwrap();
            assert_eq!(ab.max_abs_diff(&ba).unwrap(), 0.0);
        }
    }

    #[test]
    fn embedding_preserves_unitarity() {
        for d in [2usize, 3, 7] {
            let e = tensor_embed(&gates::cz(d).unwrap(), &[0, 2], 3, d).unwrap();
            assert!(unitarity_deviation(e.as_array()) <= 1e-10);
        }
    }

    #[test]
    fn rejects_bad_shapes_and_caps() {
        let u = gates::x(2).unwrap();
        assert!(matches!(
            tensor_embed(&u, &[0, 1], 2, 2),
            Err(Error::DimensionMismatch(_))
        ));
        assert!(matches!(
            tensor_embed(&u, &[3], 2, 2),
            Err(Error::WireOutOfRange { .. })
        ));
        assert!(matches!(
            tensor_embed(&gates::cx(2).unwrap(), &[1, 1], 2, 2),
            Err(Error::DuplicateWires)
        ));
        // d^n = 4096 exceeds the cap.
        assert!(matches!(
            tensor_embed(&u, &[0], 12, 2),
            Err(Error::DimensionCapExceeded(..))
        ));
    }

    #[test]
    fn rejects_non_unitary_matrices() {
        let mut m = Array2::<Complex64>::eye(2);
        m[(0, 0)] = c(2.0, 0.0);
        match DenseUnitary::new(m) {
            Err(Error::NotUnitary(dev)) => assert!(dev > 1.0),
            other => panic!("expected NotUnitary, got {other:?}"),
        }
    }

    #[test]
    fn pow_matches_repeated_product() {
        let x = gates::x(5).unwrap();
        let x3 = x.pow(3);
        let manual = x.matmul(&x).unwrap().matmul(&x).unwrap();
        assert_eq!(x3.max_abs_diff(&manual).unwrap(), 0.0);
        assert_eq!(x.pow(0).max_abs_diff(&DenseUnitary::identity(5)).unwrap(), 0.0);
    }
}
