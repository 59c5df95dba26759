//! Sparse polynomials in `(x, y, z)` with exact rational coefficients.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::coeffs::Rational;

/// Exponent triple `(i, j, k)` of `x^i y^j z^k`.
pub type Monomial = (u32, u32, u32);

/// Sparse map from monomials to nonzero rational coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TrivariatePoly {
    terms: BTreeMap<Monomial, Rational>,
}

/// Univariate polynomial in `y`, coefficients indexed by degree.
pub type PolyY = Vec<Rational>;

impl TrivariatePoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: Rational) -> Self {
        let mut p = Self::zero();
        p.add_term((0, 0, 0), c);
        p
    }

    /// Adds `c · x^i y^j z^k`, dropping the entry if it cancels.
    pub fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        let e = self.terms.entry(m).or_insert_with(Rational::zero);
        *e += c;
        if e.is_zero() {
            self.terms.remove(&m);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, m: Monomial) -> Rational {
        self.terms.get(&m).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    /// Largest total degree, `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|(i, j, k)| i + j + k).max()
    }

    /// True iff every term has total degree `d`.
    pub fn is_homogeneous(&self, d: u32) -> bool {
        self.terms.keys().all(|(i, j, k)| i + j + k == d)
    }

    /// True iff only even powers of `y` occur.
    pub fn is_even_in_y(&self) -> bool {
        self.terms.keys().all(|(_, j, _)| j % 2 == 0)
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(*m, c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(*m, -c.clone());
        }
        out
    }

    pub fn scale(&self, s: &Rational) -> Self {
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            out.add_term(*m, c * s);
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for ((a, b, c), u) in &self.terms {
            for ((d, e, f), v) in &other.terms {
                out.add_term((a + d, b + e, c + f), u * v);
            }
        }
        out
    }

    /// `(x + z)^2`.
    pub fn x_plus_z_sq() -> Self {
        let mut p = Self::zero();
        p.add_term((2, 0, 0), Rational::one());
        p.add_term((1, 0, 1), Rational::from_integer(BigInt::from(2)));
        p.add_term((0, 0, 2), Rational::one());
        p
    }

    /// `∂/∂x`.
    pub fn d_dx(&self) -> Self {
        let mut out = Self::zero();
        for (&(i, j, k), c) in &self.terms {
            if i > 0 {
                out.add_term((i - 1, j, k), c * Rational::from_integer(BigInt::from(i)));
            }
        }
        out
    }

    /// Exact value at a rational point.
    pub fn eval_rational(&self, x: &Rational, y: &Rational, z: &Rational) -> Rational {
        let mut acc = Rational::zero();
        for (&(i, j, k), c) in &self.terms {
            acc += c * num_traits::pow(x.clone(), i as usize) * num_traits::pow(y.clone(), j as usize) * num_traits::pow(z.clone(), k as usize);
        }
        acc
    }

    /// Value at a floating-point point (plain double precision).
    pub fn eval_f64(&self, x: f64, y: f64, z: f64) -> f64 {
        self.terms
            .iter()
            .map(|(&(i, j, k), c)| super::coeffs::to_f64(c) * x.powi(i as i32) * y.powi(j as i32) * z.powi(k as i32))
            .sum()
    }

    /// Restriction to `x = x0`, `z = z0` as a polynomial in `y`.
    pub fn restrict_xz(&self, x0: &Rational, z0: &Rational) -> PolyY {
        let deg = self.terms.keys().map(|m| m.1).max().unwrap_or(0) as usize;
        let mut out = vec![Rational::zero(); deg + 1];
        for (&(i, j, k), c) in &self.terms {
            out[j as usize] += c * num_traits::pow(x0.clone(), i as usize) * num_traits::pow(z0.clone(), k as usize);
        }
        trim(out)
    }

    /// Substitutes `z = −x` and returns the result as a polynomial in `(x, y)` (stored with `k = 0`).
    pub fn on_antidiagonal(&self) -> Self {
        let mut out = Self::zero();
        for (&(i, j, k), c) in &self.terms {
            let c = if k % 2 == 1 { -c.clone() } else { c.clone() };
            out.add_term((i + k, j, 0), c);
        }
        out
    }

    /// Sum of absolute coefficients, a bound on `sup |P|` over the cube `[−1, 1]³`.
    pub fn abs_coeff_sum(&self) -> Rational {
        self.terms.values().map(|c| c.abs()).fold(Rational::zero(), |a, b| a + b)
    }

    /// Groups terms by `(j, i + k)`: each group is a binary form in `(x, z)`,
    /// returned as the coefficient vector of `x^i z^{d−i}` for `i = 0..=d`.
    fn binary_forms(&self) -> BTreeMap<(u32, u32), Vec<Rational>> {
        let mut forms: BTreeMap<(u32, u32), Vec<Rational>> = BTreeMap::new();
        for (&(i, j, k), c) in &self.terms {
            let d = i + k;
            let f = forms.entry((j, d)).or_insert_with(|| vec![Rational::zero(); d as usize + 1]);
            f[i as usize] += c;
        }
        forms
    }

    /// Exact division by `(x + z)²` through the substitution `u = x + z`.
    ///
    /// Each binary form `F(x, z)` of degree `d` is rewritten as `Σ e_m u^m z^{d−m}`;
    /// the form is divisible iff `e₀ = e₁ = 0`, and the quotient is
    /// `Σ_{m≥2} e_m (x+z)^{m−2} z^{d−m}`. Returns `(quotient, remainder)` where the
    /// remainder collects the `e₀ z^d + e₁ u z^{d−1}` parts expanded back in `(x, z)`.
    pub fn divide_by_x_plus_z_sq(&self) -> (Self, Self) {
        // The work is done on integer numerators over the common denominator.
        let den = self.terms.values().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let mut forms: BTreeMap<(u32, u32), Vec<BigInt>> = BTreeMap::new();
        for (&(i, j, k), c) in &self.terms {
            let d = i + k;
            let f = forms.entry((j, d)).or_insert_with(|| vec![BigInt::zero(); d as usize + 1]);
            f[i as usize] += c.numer() * (&den / c.denom());
        }
        let max_d = forms.keys().map(|&(_, d)| d as usize).max().unwrap_or(0);
        let binom = pascal(max_d);
        let mut quo: BTreeMap<Monomial, BigInt> = BTreeMap::new();
        let mut rem: BTreeMap<Monomial, BigInt> = BTreeMap::new();
        for ((j, d), f) in forms {
            let d = d as usize;
            // F(u − z, z) = Σ_i f_i (u − z)^i z^{d−i} = Σ_m e_m u^m z^{d−m}
            let mut e = vec![BigInt::zero(); d + 1];
            for (i, fi) in f.iter().enumerate() {
                if fi.is_zero() {
                    continue;
                }
                for m in 0..=i {
                    let t = fi * &binom[i][m];
                    if (i - m) % 2 == 0 {
                        e[m] += t;
                    } else {
                        e[m] -= t;
                    }
                }
            }
            for (m, em) in e.iter().enumerate() {
                if em.is_zero() {
                    continue;
                }
                let (target, shift) = if m >= 2 { (&mut quo, m - 2) } else { (&mut rem, m) };
                // em · (x + z)^shift · z^{d − m}
                for a in 0..=shift {
                    *target.entry((a as u32, j, (shift - a + d - m) as u32)).or_default() += em * &binom[shift][a];
                }
            }
        }
        let back = |terms: BTreeMap<Monomial, BigInt>| {
            let mut p = Self::zero();
            for (m, c) in terms {
                p.add_term(m, Rational::new(c, den.clone()));
            }
            p
        };
        (back(quo), back(rem))
    }

    /// Division by `(x + z)²` by two rounds of synthetic division by `x + z`
    /// on each dehomogenised binary form. Used to cross-check the substitution route.
    pub fn long_divide_by_x_plus_z_sq(&self) -> (Self, Self) {
        let mut quo = Self::zero();
        let mut rem = Self::zero();
        for ((j, d), f) in self.binary_forms() {
            // f(x) = Σ f_i x^i with F(x, z) = z^d f(x/z); divide by (x + 1) twice.
            let (q1, r1) = synthetic_div_plus_one(&f);
            let (q2, r2) = synthetic_div_plus_one(&q1);
            // F = (x+z)² Q + r2·(x+z) z^{d−1} + r1 z^d
            for (i, c) in q2.iter().enumerate() {
                quo.add_term((i as u32, j, d - 2 - i as u32), c.clone());
            }
            if !r2.is_zero() {
                rem.add_term((1, j, d - 1), r2.clone());
                rem.add_term((0, j, d), r2);
            }
            rem.add_term((0, j, d), r1);
        }
        (quo, rem)
    }
}

/// Divides `Σ f_i x^i` by `x + 1`: returns the quotient and the remainder `f(−1)`.
fn synthetic_div_plus_one(f: &[Rational]) -> (Vec<Rational>, Rational) {
    if f.len() <= 1 {
        return (Vec::new(), f.first().cloned().unwrap_or_else(Rational::zero));
    }
    let n = f.len() - 1;
    let mut q = vec![Rational::zero(); n];
    let mut carry = Rational::zero();
    for i in (0..=n).rev() {
        let v = &f[i] - &carry;
        if i == 0 {
            return (q, v);
        }
        q[i - 1] = v.clone();
        carry = v;
    }
    unreachable!()
}

/// Rows `0..=n` of Pascal's triangle.
pub(crate) fn pascal(n: usize) -> Vec<Vec<BigInt>> {
    let mut rows: Vec<Vec<BigInt>> = Vec::with_capacity(n + 1);
    for r in 0..=n {
        let mut row = vec![BigInt::one(); r + 1];
        for k in 1..r {
            row[k] = &rows[r - 1][k - 1] + &rows[r - 1][k];
        }
        rows.push(row);
    }
    rows
}

fn trim(mut v: PolyY) -> PolyY {
    while v.last().is_some_and(|c| c.is_zero()) {
        v.pop();
    }
    v
}

impl fmt::Display for TrivariatePoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (&(i, j, k), c) in self.terms.iter().rev() {
            let neg = c.is_negative();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            first = false;
            let a = c.abs();
            let unit = a.is_one();
            if !unit || (i, j, k) == (0, 0, 0) {
                write!(f, "{a}")?;
            }
            for (v, e) in [("x", i), ("y", j), ("z", k)] {
                match e {
                    0 => {}
                    1 => write!(f, "{v}")?,
                    _ => write!(f, "{v}^{e}")?,
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64) -> Rational {
        Rational::from_integer(BigInt::from(n))
    }

    #[test]
    fn division_recovers_product() {
        let mut g = TrivariatePoly::zero();
        g.add_term((3, 2, 0), r(5));
        g.add_term((0, 0, 4), r(-2));
        g.add_term((1, 4, 1), r(7));
        g.add_term((0, 0, 0), r(3));
        let p = g.mul(&TrivariatePoly::x_plus_z_sq());
        let (q, rem) = p.divide_by_x_plus_z_sq();
        assert!(rem.is_zero());
        assert_eq!(q, g);
        let (q2, rem2) = p.long_divide_by_x_plus_z_sq();
        assert!(rem2.is_zero());
        assert_eq!(q2, g);
    }

    #[test]
    fn nonzero_remainder_detected() {
        let mut p = TrivariatePoly::x_plus_z_sq();
        p.add_term((1, 0, 1), r(1));
        let (q, rem) = p.divide_by_x_plus_z_sq();
        assert!(!rem.is_zero());
        assert_eq!(q.mul(&TrivariatePoly::x_plus_z_sq()).add(&rem), p);
        let (q2, rem2) = p.long_divide_by_x_plus_z_sq();
        assert_eq!(q2.mul(&TrivariatePoly::x_plus_z_sq()).add(&rem2), p);
    }

    #[test]
    fn display_is_readable() {
        let p = TrivariatePoly::x_plus_z_sq().scale(&r(2));
        assert_eq!(p.to_string(), "2x^2 + 4xz + 2z^2");
    }
}
