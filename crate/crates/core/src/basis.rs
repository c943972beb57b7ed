//! Composite-index arithmetic for the wire-0-most-significant convention.

/// Index of the basis state with the given per-wire digits.
///
/// Wire 0 is the most significant digit: `|x>|y>|z>` maps to
/// `x*d^2 + y*d + z` on three wires.
pub fn compose(digits: &[usize], d: usize) -> usize {
    digits.iter().fold(0, |acc, &x| acc * d + x)
}

/// Per-wire digits of a composite basis index, most significant first.
pub fn decompose(mut index: usize, d: usize, n_wires: usize) -> Vec<usize> {
    let mut digits = vec![0; n_wires];
    for slot in digits.iter_mut().rev() {
        *slot = index % d;
        index /= d;
    }
    digits
}

/// Digit carried by `wire` inside a composite index.
pub fn digit_of(index: usize, d: usize, n_wires: usize, wire: usize) -> usize {
    (index / stride(d, n_wires, wire)) % d
}

/// Weight of `wire`'s digit in the composite index: `d^(n-1-wire)`.
pub fn stride(d: usize, n_wires: usize, wire: usize) -> usize {
    d.pow((n_wires - 1 - wire) as u32)
}

/// `d^n`, the full state-space dimension of `n` wires.
pub fn total_dim(d: usize, n_wires: usize) -> usize {
    d.pow(n_wires as u32)
}
