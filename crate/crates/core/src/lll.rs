//! Exact integral LLL reduction and integer-relation lattices.

use rug::ops::DivRounding;
use rug::{Complex, Float, Integer};

/// LLL parameter `delta = NUM / DEN`.
const DELTA_NUM: u32 = 99;
const DELTA_DEN: u32 = 100;

fn dot(a: &[Integer], b: &[Integer]) -> Integer {
    let mut s = Integer::new();
    for (x, y) in a.iter().zip(b) {
        s += Integer::from(x * y);
    }
    s
}

/// LLL-reduces the rows of `basis` in place with `delta = 0.99`, using only
/// integer arithmetic. Rows must be linearly independent.
///
/// Returns the unimodular transformation `H` with `reduced = H * original`.
pub fn lll_reduce(basis: &mut [Vec<Integer>]) -> Vec<Vec<Integer>> {
    let n = basis.len();
    let mut h: Vec<Vec<Integer>> = (0..n)
        .map(|i| (0..n).map(|j| Integer::from((i == j) as u32)).collect())
        .collect();
    if n == 0 {
        return h;
    }
    // d[i] is d_i in 1-based notation, d[0] = 1.
    let mut d = vec![Integer::new(); n + 1];
    let mut lam = vec![vec![Integer::new(); n]; n];
    d[0] = Integer::from(1);
    d[1] = dot(&basis[0], &basis[0]);
    assert!(d[1] != 0, "zero vector in LLL basis");
    let mut k = 1usize;
    let mut kmax = 0usize;

    while k < n {
        if k > kmax {
            kmax = k;
            for j in 0..=k {
                let mut u = dot(&basis[k], &basis[j]);
                for i in 0..j {
                    u = (Integer::from(&d[i + 1] * &u) - Integer::from(&lam[k][i] * &lam[j][i])) / &d[i];
                }
                if j < k {
                    lam[k][j] = u;
                } else {
                    assert!(u != 0, "linearly dependent rows in LLL basis");
                    d[k + 1] = u;
                }
            }
        }
        loop {
            red(basis, &mut h, &mut lam, &d, k, k - 1);
            // 100 d_k d_{k-2} < 99 d_{k-1}^2 - 100 lambda^2
            let lhs = Integer::from(&d[k + 1] * &d[k - 1]) * DELTA_DEN;
            let rhs = Integer::from(d[k].square_ref()) * DELTA_NUM
                - Integer::from(lam[k][k - 1].square_ref()) * DELTA_DEN;
            if lhs < rhs {
                swap(basis, &mut h, &mut lam, &mut d, k, kmax);
                if k > 1 {
                    k -= 1;
                }
            } else {
                break;
            }
        }
        for l in (0..k.saturating_sub(1)).rev() {
            red(basis, &mut h, &mut lam, &d, k, l);
        }
        k += 1;
    }
    h
}

fn red(
    b: &mut [Vec<Integer>],
    h: &mut [Vec<Integer>],
    lam: &mut [Vec<Integer>],
    d: &[Integer],
    k: usize,
    l: usize,
) {
    let two_lam = Integer::from(&lam[k][l] * 2u32);
    if Integer::from(two_lam.abs_ref()) <= d[l + 1] {
        return;
    }
    // q = round(lam / d) = floor((2 lam + d) / (2 d))
    let q = (two_lam + &d[l + 1]).div_floor(Integer::from(&d[l + 1] * 2u32));
    let (bl, hl) = (b[l].clone(), h[l].clone());
    for (x, y) in b[k].iter_mut().zip(&bl) {
        *x -= Integer::from(&q * y);
    }
    for (x, y) in h[k].iter_mut().zip(&hl) {
        *x -= Integer::from(&q * y);
    }
    lam[k][l] -= Integer::from(&q * &d[l + 1]);
    for i in 0..l {
        let t = Integer::from(&q * &lam[l][i]);
        lam[k][i] -= t;
    }
}

fn swap(
    b: &mut [Vec<Integer>],
    h: &mut [Vec<Integer>],
    lam: &mut [Vec<Integer>],
    d: &mut [Integer],
    k: usize,
    kmax: usize,
) {
    b.swap(k, k - 1);
    h.swap(k, k - 1);
    for j in 0..k - 1 {
        let t = lam[k][j].clone();
        lam[k][j] = lam[k - 1][j].clone();
        lam[k - 1][j] = t;
    }
    let l = lam[k][k - 1].clone();
    let big_b = (Integer::from(&d[k - 1] * &d[k + 1]) + Integer::from(l.square_ref())) / &d[k];
    for i in k + 1..=kmax {
        let t = lam[i][k].clone();
        lam[i][k] = (Integer::from(&d[k + 1] * &lam[i][k - 1]) - Integer::from(&l * &t)) / &d[k];
        lam[i][k - 1] = (Integer::from(&big_b * &t) + Integer::from(&l * &lam[i][k])) / &d[k + 1];
    }
    d[k] = big_b;
}

/// `round(x * 2^shift)` as an integer.
pub(crate) fn scaled_round(x: &Float, scale: &Float) -> Integer {
    let v = Float::with_val(x.prec().max(scale.prec()), x * scale);
    v.round().to_integer().unwrap_or_default()
}

/// Builds the rows `e_j | round(W Re x_j) | round(W Im x_j)` and LLL-reduces
/// them. The first `values.len()` entries of each returned row are the
/// coefficient vector of a candidate relation.
pub fn complex_relation_basis(values: &[Complex], weight: &Float) -> Vec<Vec<Integer>> {
    let n = values.len();
    let mut rows: Vec<Vec<Integer>> = values
        .iter()
        .enumerate()
        .map(|(j, x)| {
            let mut row: Vec<Integer> = (0..n).map(|i| Integer::from((i == j) as u32)).collect();
            row.push(scaled_round(x.real(), weight));
            row.push(scaled_round(x.imag(), weight));
            row
        })
        .collect();
    lll_reduce(&mut rows);
    rows
}

/// As [`complex_relation_basis`] for real inputs.
pub fn real_relation_basis(values: &[Float], weight: &Float) -> Vec<Vec<Integer>> {
    let n = values.len();
    let mut rows: Vec<Vec<Integer>> = values
        .iter()
        .enumerate()
        .map(|(j, x)| {
            let mut row: Vec<Integer> = (0..n).map(|i| Integer::from((i == j) as u32)).collect();
            row.push(scaled_round(x, weight));
            row
        })
        .collect();
    lll_reduce(&mut rows);
    rows
}
