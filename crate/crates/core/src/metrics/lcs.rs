//! Longest common subsequence: bit-parallel for short words over small
//! alphabets, dynamic programming otherwise.

use crate::symbolic::Symbol;

const BIT_ALPHABET: usize = 16;

/// Length of a longest common subsequence of `u` and `v`.
pub fn lcs_length(u: &[Symbol], v: &[Symbol]) -> usize {
    let (a, b) = if u.len() <= v.len() { (u, v) } else { (v, u) };
    if a.len() <= 128 && a.iter().all(|&s| (s as usize) < BIT_ALPHABET) {
        bit_parallel(a, b)
    } else {
        dynamic(u, v)
    }
}

/// Row-wise bit-vector recurrence; zero bits of `row` count matched
/// positions of `a`.
fn bit_parallel(a: &[Symbol], b: &[Symbol]) -> usize {
    let mut masks = [0u128; BIT_ALPHABET];
    for (i, &s) in a.iter().enumerate() {
        masks[s as usize] |= 1 << i;
    }
    let full = if a.len() == 128 {
        u128::MAX
    } else {
        (1u128 << a.len()) - 1
    };
    let mut row = full;
    for &c in b {
        let m = masks.get(c as usize).copied().unwrap_or(0);
        row = (row.wrapping_add(row & m) | (row & !m)) & full;
    }
    a.len() - row.count_ones() as usize
}

/// `O(|u|·|v|)` time, `O(|v|)` memory.
fn dynamic(u: &[Symbol], v: &[Symbol]) -> usize {
    let mut prev = vec![0usize; v.len() + 1];
    let mut cur = vec![0usize; v.len() + 1];
    for &a in u {
        for (j, &b) in v.iter().enumerate() {
            cur[j + 1] = if a == b {
                prev[j] + 1
            } else {
                cur[j].max(prev[j + 1])
            };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[v.len()]
}
