//! q-expansion of the modular invariant with exact integer coefficients.

use std::sync::RwLock;

use rug::{Complex, Float, Integer};

use crate::precision::pi;

static COEFFS: RwLock<Vec<Integer>> = RwLock::new(Vec::new());

/// Coefficients `c_{-1}, c_0, c_1, ...` of `j = sum c_k q^k`, at least `count` of them.
pub(crate) fn j_coefficients(count: usize) -> Vec<Integer> {
    {
        let guard = COEFFS.read().expect("coefficient cache poisoned");
        if guard.len() >= count {
            return guard[..count].to_vec();
        }
    }
    let mut guard = COEFFS.write().expect("coefficient cache poisoned");
    if guard.len() < count {
        *guard = compute_coefficients(count.max(2 * guard.len()));
    }
    guard[..count].to_vec()
}

fn compute_coefficients(count: usize) -> Vec<Integer> {
    let n = count;
    // E4 = 1 + 240 sum sigma_3(k) q^k
    let mut e4 = vec![Integer::new(); n];
    e4[0] = Integer::from(1);
    for k in 1..n {
        let mut s = Integer::new();
        for d in 1..=k {
            if k % d == 0 {
                s += (d as u64).pow(3);
            }
        }
        e4[k] = s * 240u32;
    }
    let e4_3 = mul_trunc(&mul_trunc(&e4, &e4, n), &e4, n);
    // Delta / q = prod (1 - q^k)^24
    let mut eta = vec![Integer::new(); n];
    eta[0] = Integer::from(1);
    for k in 1..n {
        for _ in 0..24 {
            for i in (k..n).rev() {
                let t = eta[i - k].clone();
                eta[i] -= t;
            }
        }
    }
    // Inverse of the unit series Delta / q.
    let mut inv = vec![Integer::new(); n];
    inv[0] = Integer::from(1);
    for i in 1..n {
        let mut s = Integer::new();
        for k in 1..=i {
            s += Integer::from(&eta[k] * &inv[i - k]);
        }
        inv[i] = -s;
    }
    mul_trunc(&e4_3, &inv, n)
}

fn mul_trunc(a: &[Integer], b: &[Integer], n: usize) -> Vec<Integer> {
    let mut out = vec![Integer::new(); n];
    for (i, x) in a.iter().enumerate().take(n) {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate().take(n - i) {
            out[i + j] += Integer::from(x * y);
        }
    }
    out
}

/// Natural log of an upper bound for `sum_{k > terms} |c_k| |q|^k`, using
/// `|c_k| <= exp(4 pi sqrt k)`.
pub(crate) fn log_tail_bound(abs_q: f64, terms: usize) -> f64 {
    let k = (terms + 1) as f64;
    let log_first = 4.0 * std::f64::consts::PI * k.sqrt() + k * abs_q.ln();
    // Ratio of consecutive bounding terms is decreasing in k.
    let ratio = (4.0 * std::f64::consts::PI * ((k + 1.0).sqrt() - k.sqrt())).exp() * abs_q;
    if ratio >= 1.0 {
        return f64::INFINITY;
    }
    log_first - (1.0 - ratio).ln()
}

/// Sum of the first `terms` terms of the q-expansion (from `q^-1`).
pub(crate) fn j_series(tau: &Complex, terms: usize, bits: u32) -> (Complex, f64) {
    let terms = terms.max(2);
    let coeffs = j_coefficients(terms);
    let two_pi_i_tau = Complex::with_val(bits, tau * pi(bits)).mul_i(false) * 2u32;
    let q = two_pi_i_tau.exp();
    let mut acc = Complex::new(bits);
    // Horner in q, then divide by q for the polar term.
    for c in coeffs.iter().rev() {
        acc *= &q;
        acc += Float::with_val(bits, c);
    }
    let value = acc / &q;
    let abs_q = Float::with_val(53, q.abs_ref()).to_f64();
    let bound = log_tail_bound(abs_q, terms - 1).exp();
    (value, bound)
}

/// Number of terms giving truncation error below `2^-bits`.
pub(crate) fn terms_for(im_tau: f64, bits: u32) -> usize {
    let log_q = -2.0 * std::f64::consts::PI * im_tau;
    let target = -(bits as f64) * std::f64::consts::LN_2;
    let mut terms = 20usize;
    while terms < 1_000_000 && log_tail_bound(log_q.exp(), terms - 1) > target {
        terms += 10;
    }
    terms
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn leading_coefficients() {
        let c = j_coefficients(5);
        let expect: [i64; 5] = [1, 744, 196884, 21493760, 864299970];
        for (a, b) in c.iter().zip(expect) {
            assert_eq!(*a, b);
        }
    }

    #[test]
    fn cache_extends_consistently() {
        let short = j_coefficients(10);
        let long = j_coefficients(40);
        assert_eq!(&long[..10], &short[..]);
        assert_eq!(long[6], Integer::from(333202640600u64));
    }
}
