//! Brute-force reference computations, kept independent of the mechanisms'
//! own bookkeeping.

use crate::bitcodec::PathWord;

/// The noisy p-sums added by the textbook prefix-sum walk for query string `s`:
/// start from `[1, 2^h]`, and for each bit from the top, halve the interval;
/// on a 1 take the left half and continue right. Returns 1-based closed
/// intervals in the order they are added.
pub fn prefix_query_intervals(s: PathWord) -> Vec<(u128, u128)> {
    let h = s.width();
    let mut a: u128 = 1;
    let mut b: u128 = 1u128 << h;
    let mut out = Vec::new();
    for i in (0..h).rev() {
        let d = (a + b) / 2;
        if s.bit(i) {
            out.push((a, d));
            a = d + 1;
        } else {
            b = d;
        }
    }
    out
}

/// Lower-triangular `L` with `L·L = A`, `A` the `n × n` all-ones
/// lower-triangular matrix, by forward substitution along the diagonals.
///
/// Only lower-triangularity and unit diagonal are assumed; Toeplitz structure
/// is not.
pub fn lower_triangular_sqrt(n: usize) -> Vec<Vec<f64>> {
    let mut l = vec![vec![0.0; n]; n];
    for (i, row) in l.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    // (L·L)_{ij} = Σ_{j<=k<=i} L_ik L_kj = 1, and L_ii = L_jj = 1, so
    // 2·L_ij = 1 - Σ_{j<k<i} L_ik L_kj, which only uses closer diagonals.
    for gap in 1..n {
        for j in 0..n - gap {
            let i = j + gap;
            let inner: f64 = (j + 1..i).map(|k| l[i][k] * l[k][j]).sum();
            l[i][j] = (1.0 - inner) / 2.0;
        }
    }
    l
}
