//! Exact chaos coefficients `a_q`, `b_q`, `c_q` and the hypergeometric terms
//! `H_q`, `H′_q` with their sums `S_q(k)`, `S′_q(k)`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Exact rational number with arbitrary-precision numerator and denominator.
pub type Rational = BigRational;

/// Largest chaos order handled by the exact machinery.
pub const Q_MAX: u32 = 64;

pub(crate) fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// `n!` for `n ≥ 0`.
pub fn factorial(n: u32) -> BigInt {
    (2..=n).fold(BigInt::one(), |acc, k| acc * k)
}

/// `1/n!`, zero for negative `n`.
pub fn inv_factorial(n: i64) -> Rational {
    if n < 0 {
        Rational::zero()
    } else {
        Rational::new(BigInt::one(), factorial(n as u32))
    }
}

/// `C(n, k)` for `0 ≤ k ≤ n`, zero otherwise.
pub fn binomial(n: i64, k: i64) -> BigInt {
    if k < 0 || n < 0 || k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// `a_q(l) = 1/(l!(q−l)!(2l−1))`.
pub fn a_coeff(q: u32, l: i64) -> Rational {
    inv_factorial(l) * inv_factorial(q as i64 - l) * rat(1, 2 * l - 1)
}

/// `b_q(l₁, l₂, n)`, the number of admissible pairings with `n` derivative–derivative edges.
pub fn b_coeff(q: u32, l1: i64, l2: i64, n: i64) -> Rational {
    let q = q as i64;
    let num = [2 * q - 2 * l1, 2 * l1, 2 * q - 2 * l2, 2 * l2];
    if num.iter().any(|&v| v < 0) {
        return Rational::zero();
    }
    let den = [2 * q - 2 * l1 - 2 * l2 + n, 2 * l1 - n, 2 * l2 - n, n];
    let mut acc = Rational::one();
    for v in num {
        acc *= Rational::from_integer(factorial(v as u32));
    }
    for v in den {
        acc *= inv_factorial(v);
    }
    acc
}

/// `c_q = 2^{4q}(q!)²/(2q(2q)!)`.
pub fn c_coeff(q: u32) -> Rational {
    assert!(q >= 1, "c_q is defined for q ≥ 1");
    let num = (BigInt::one() << (4 * q as usize)) * factorial(q) * factorial(q);
    Rational::new(num, BigInt::from(2 * q) * factorial(2 * q))
}

/// Right-hand side `Σ_l C(2l,l) C(2q−2l,q−l)/(2l−1)²` of the `c_q` identity.
pub fn c_identity_sum(q: u32) -> Rational {
    let q = q as i64;
    (0..=q)
        .map(|l| {
            let d = BigInt::from(2 * l - 1);
            Rational::new(binomial(2 * l, l) * binomial(2 * q - 2 * l, q - l), &d * &d)
        })
        .fold(Rational::zero(), |a, b| a + b)
}

/// Rising factorial `(z)_k` for any integer `k`, with `(z)_{−m} = 1/((z−m)…(z−1))`.
///
/// Panics only at a pole, which half-integer arguments never reach.
pub fn pochhammer(z: &Rational, k: i64) -> Rational {
    let mut acc = Rational::one();
    if k >= 0 {
        for i in 0..k {
            acc *= z + Rational::from_integer(BigInt::from(i));
        }
    } else {
        for i in 1..=(-k) {
            let f = z - Rational::from_integer(BigInt::from(i));
            assert!(!f.is_zero(), "Pochhammer pole");
            acc /= f;
        }
    }
    acc
}

/// `(−1/2)_l` for `l ≥ 0`, as `−(2l−3)!!/2^l` with `(−1)!! = 1` and the `l = 0` value 1.
fn poch_minus_half(l: i64) -> Rational {
    if l < 0 {
        return pochhammer(&rat(-1, 2), l);
    }
    if l == 0 {
        return Rational::one();
    }
    // (−1/2)(1/2)(3/2)…((2l−3)/2) = −(1·3·…·(2l−3)) / 2^l
    let mut odd = BigInt::one();
    let mut m = 1;
    while m <= 2 * l - 3 {
        odd *= m;
        m += 2;
    }
    -Rational::new(odd, BigInt::one() << (l as usize))
}

/// `(1/2)_m = (2m−1)!!/2^m` for `m ≥ 0`.
fn poch_half(m: i64) -> Rational {
    if m < 0 {
        return pochhammer(&rat(1, 2), m);
    }
    let mut odd = BigInt::one();
    let mut k = 1;
    while k <= 2 * m - 1 {
        odd *= k;
        k += 2;
    }
    Rational::new(odd, BigInt::one() << (m as usize))
}

/// `H_q(l₁, l₂, k)`, defined for all integers through the Gamma function.
pub fn h_term(q: u32, l1: i64, l2: i64, k: i64) -> Rational {
    let q = q as i64;
    let den = inv_factorial(2 * q - l1 - l2 - k) * inv_factorial(l2 - l1 + k) * inv_factorial(l1 - l2 + k) * inv_factorial(l1 + l2 - k);
    if den.is_zero() {
        return den;
    }
    let sign = if (l1 + l2).is_even() { Rational::one() } else { -Rational::one() };
    sign * poch_minus_half(l1) * poch_minus_half(l2) * poch_half(q - l1) * poch_half(q - l2) * den
}

/// `H′_q(l₁, l₂, k) = (2q − l₁ − l₂ − k) H_q(l₁, l₂, k)`.
pub fn h_prime_term(q: u32, l1: i64, l2: i64, k: i64) -> Rational {
    h_term(q, l1, l2, k) * Rational::from_integer(BigInt::from(2 * q as i64 - l1 - l2 - k))
}

/// `S_q(k)` or `S′_q(k)` in integer arithmetic.
///
/// The four Pochhammer factors always share the denominator `2^{2q}`, and the four
/// factorials have arguments summing to `2q`, so every term is an integer multiple
/// of `1/(2^{2q}(2q)!)` through a multinomial coefficient.
fn s_sum_integer(q: u32, k: i64, prime: bool) -> Rational {
    let qi = q as i64;
    let fact: Vec<BigInt> = (0..=2 * q).map(factorial).collect();
    // N(l) = 2^l (−1/2)_l and M(m) = 2^m (1/2)_m.
    let mut n_tab = vec![BigInt::one(); q as usize + 1];
    let mut m_tab = vec![BigInt::one(); q as usize + 1];
    for l in 1..=q as usize {
        n_tab[l] = if l == 1 { -BigInt::one() } else { &n_tab[l - 1] * BigInt::from(2 * l as i64 - 3) };
        m_tab[l] = &m_tab[l - 1] * BigInt::from(2 * l as i64 - 1);
    }
    let mut acc = BigInt::zero();
    for l1 in 0..=qi {
        for l2 in 0..=qi {
            let args = [2 * qi - l1 - l2 - k, l2 - l1 + k, l1 - l2 + k, l1 + l2 - k];
            if args.iter().any(|&a| a < 0) {
                continue;
            }
            let w = 2 * qi - l1 - l2 - k;
            if prime && w == 0 {
                continue;
            }
            let mut multinom = fact[2 * q as usize].clone();
            for a in args {
                multinom /= &fact[a as usize];
            }
            let mut t = &n_tab[l1 as usize] * &n_tab[l2 as usize] * &m_tab[(qi - l1) as usize] * &m_tab[(qi - l2) as usize] * multinom;
            if prime {
                t *= w;
            }
            if (l1 + l2).is_odd() {
                acc -= t;
            } else {
                acc += t;
            }
        }
    }
    Rational::new(acc, (BigInt::one() << (2 * q as usize)) * &fact[2 * q as usize])
}

/// `S_q(k) = Σ_{l₁,l₂} H_q(l₁, l₂, k)`.
pub fn s_sum(q: u32, k: i64) -> Rational {
    s_sum_integer(q, k, false)
}

/// `S′_q(k) = Σ_{l₁,l₂} H′_q(l₁, l₂, k)`.
pub fn s_prime_sum(q: u32, k: i64) -> Rational {
    s_sum_integer(q, k, true)
}

/// `S_q(k)` summed term by term from [`h_term`] over a window wider than the support.
pub fn s_sum_direct(q: u32, k: i64, prime: bool) -> Rational {
    let mut acc = Rational::zero();
    for l1 in -2..=q as i64 + 2 {
        for l2 in -2..=q as i64 + 2 {
            acc += if prime { h_prime_term(q, l1, l2, k) } else { h_term(q, l1, l2, k) };
        }
    }
    acc
}

/// Closed form of `S_q(k)`: `2^{−4q}c_q` at `k = 0`, `2^{−4q}(2q−1)c_q` at `k = 1`, zero beyond.
pub fn s_closed_form(q: u32, k: i64) -> Rational {
    let base = c_coeff(q) / Rational::from_integer(BigInt::one() << (4 * q as usize));
    match k {
        0 => base,
        1 => base * Rational::from_integer(BigInt::from(2 * q - 1)),
        _ => Rational::zero(),
    }
}

/// Closed form of `S′_q(k)`: `2^{−4q}(2q−1)c_q` at `k = 0`, `2^{−4q}(2q−1)(2q−2)c_q` at `k = 1`, zero beyond.
pub fn s_prime_closed_form(q: u32, k: i64) -> Rational {
    let base = c_coeff(q) / Rational::from_integer(BigInt::one() << (4 * q as usize)) * Rational::from_integer(BigInt::from(2 * q - 1));
    match k {
        0 => base,
        1 => base * Rational::from_integer(BigInt::from(2 * q as i64 - 2)),
        _ => Rational::zero(),
    }
}

/// Left-hand side of the three-term recurrence linking `S_q`, `S_{q+1}`, `S_{q+2}` at `k`.
/// Returns `None` at the excluded index `k = q + 2`.
pub fn recurrence_s_lhs(q: u32, k: i64) -> Option<Rational> {
    let qi = q as i64;
    let d = (2 * k - 2 * qi - 3) * (k - qi - 2);
    if d == 0 {
        return None;
    }
    let c0 = rat(qi * qi, 8 * d);
    let c1 = rat(4 * k * qi - 4 * qi * qi + 2 * k - 7 * qi - 4, 4 * d);
    Some(c0 * s_sum(q, k) + c1 * s_sum(q + 1, k) + s_sum(q + 2, k))
}

/// Left-hand side of the two-term recurrence linking `S′_q` and `S′_{q+1}` at `k`.
/// Returns `None` at the excluded index `k = 2q − 1`.
pub fn recurrence_s_prime_lhs(q: u32, k: i64) -> Option<Rational> {
    let qi = q as i64;
    let d = 2 * (2 * k - 2 * qi - 1) * (k - 2 * qi + 1);
    if d == 0 {
        return None;
    }
    Some(rat(qi * (k - 2 * qi - 1), d) * s_prime_sum(q, k) + s_prime_sum(q + 1, k))
}

/// `d_q(k) = Σ a_q(l₁)a_q(l₂)b_q(l₁,l₂,l₁+l₂−k)(−1)^{l₁+l₂}` over its admissible range.
pub fn d_coeff(q: u32, k: i64) -> Rational {
    let qi = q as i64;
    let mut acc = Rational::zero();
    for l1 in 0..=qi {
        for l2 in 0..=qi {
            let s = l1 + l2;
            if s < k || s > 2 * qi - k || (l1 - l2).abs() > k {
                continue;
            }
            let t = a_coeff(q, l1) * a_coeff(q, l2) * b_coeff(q, l1, l2, s - k);
            if s.is_even() {
                acc += t;
            } else {
                acc -= t;
            }
        }
    }
    acc
}

/// Relative size check helper: `|a − b| ≤ tol · |b|` on exact values converted to `f64`.
pub fn to_f64(r: &Rational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or_else(|| if r.is_negative() { f64::NEG_INFINITY } else { f64::INFINITY })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn a_coefficients() {
        assert_eq!(a_coeff(1, 0), rat(-1, 1));
        assert_eq!(a_coeff(1, 1), rat(1, 1));
        assert_eq!(a_coeff(2, 3), Rational::zero());
    }

    #[test]
    fn b_coefficients() {
        assert_eq!(b_coeff(1, 0, 0, 0), rat(2, 1));
        assert_eq!(b_coeff(1, 1, 1, 2), rat(2, 1));
        assert_eq!(b_coeff(3, 1, 2, 3), Rational::zero());
    }

    #[test]
    fn c_coefficients() {
        assert_eq!(c_coeff(1), rat(4, 1));
        assert_eq!(c_coeff(2), rat(32, 3));
    }

    #[test]
    fn half_integer_pochhammers_match_generic_product() {
        for l in -3..8 {
            assert_eq!(poch_minus_half(l), pochhammer(&rat(-1, 2), l), "l={l}");
            assert_eq!(poch_half(l), pochhammer(&rat(1, 2), l), "l={l}");
        }
    }

    #[test]
    fn integer_sums_match_term_by_term_sums() {
        for q in 1..7u32 {
            for k in 0..=(2 * q as i64 + 1) {
                assert_eq!(s_sum(q, k), s_sum_direct(q, k, false), "q={q} k={k}");
                assert_eq!(s_prime_sum(q, k), s_sum_direct(q, k, true), "q={q} k={k}");
            }
        }
    }

    #[test]
    fn s_base_case() {
        assert_eq!(s_sum(1, 0), rat(1, 4));
        assert_eq!(s_sum(1, 1), rat(1, 4));
        assert_eq!(s_sum(2, 2), Rational::zero());
    }

    #[test]
    fn h_support_is_the_square() {
        for q in 1..5u32 {
            for k in 0..=(2 * q as i64) {
                for l1 in -4..(q as i64 + 5) {
                    for l2 in -4..(q as i64 + 5) {
                        if !(0..=q as i64).contains(&l1) || !(0..=q as i64).contains(&l2) {
                            assert!(h_term(q, l1, l2, k).is_zero());
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn h_matches_signed_abc_product() {
        for q in 1..6u32 {
            let scale = Rational::from_integer(BigInt::one() << (4 * q as usize));
            for k in 0..=(q as i64) {
                let mut sum = Rational::zero();
                for l1 in 0..=q as i64 {
                    for l2 in 0..=q as i64 {
                        sum += h_term(q, l1, l2, k);
                    }
                }
                assert_eq!(sum * &scale, d_coeff(q, k), "q={q} k={k}");
            }
        }
    }
}
