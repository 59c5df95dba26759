//! Exact verification of the polynomial and hypergeometric identities, each
//! returning a structured report with the first counterexample.

use std::time::Instant;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use super::coeffs::{
    b_coeff, binomial, c_coeff, c_identity_sum, d_coeff, rat, recurrence_s_lhs, recurrence_s_prime_lhs, s_closed_form, s_prime_closed_form, s_prime_sum, s_sum, to_f64,
    Rational,
};
use super::diagram::diagram_counts;
use super::poly::TrivariatePoly;
use super::polys::{chaos_polys, poly_p};
use crate::error::Result;

/// Outcome of one identity check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

/// First instance at which an identity failed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Failure {
    pub q: u32,
    pub detail: String,
    pub lhs: String,
    pub rhs: String,
}

/// Structured result of an identity check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityReport {
    pub identity: String,
    pub q_range: [u32; 2],
    pub status: Status,
    /// Number of individual instances checked.
    pub checked: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_failure: Option<Failure>,
    pub wall_time_ms: f64,
}

impl IdentityReport {
    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

struct Checker {
    identity: String,
    q_range: [u32; 2],
    checked: usize,
    first_failure: Option<Failure>,
    start: Instant,
}

impl Checker {
    fn new(identity: &str, q_lo: u32, q_hi: u32) -> Self {
        Checker {
            identity: identity.to_string(),
            q_range: [q_lo, q_hi],
            checked: 0,
            first_failure: None,
            start: Instant::now(),
        }
    }

    fn check(&mut self, ok: bool, q: u32, detail: impl FnOnce() -> (String, String, String)) {
        self.checked += 1;
        if !ok && self.first_failure.is_none() {
            let (detail, lhs, rhs) = detail();
            self.first_failure = Some(Failure { q, detail, lhs, rhs });
        }
    }

    fn eq(&mut self, q: u32, detail: &str, lhs: &Rational, rhs: &Rational) {
        let ok = lhs == rhs;
        self.check(ok, q, || (detail.to_string(), lhs.to_string(), rhs.to_string()));
    }

    fn finish(self) -> IdentityReport {
        IdentityReport {
            status: if self.first_failure.is_none() { Status::Pass } else { Status::Fail },
            identity: self.identity,
            q_range: self.q_range,
            checked: self.checked,
            first_failure: self.first_failure,
            wall_time_ms: self.start.elapsed().as_secs_f64() * 1e3,
        }
    }
}

fn poly_y_to_string(v: &[Rational]) -> String {
    let parts: Vec<String> = v.iter().enumerate().filter(|(_, c)| !c.is_zero()).map(|(i, c)| format!("{c}*y^{i}")).collect();
    if parts.is_empty() {
        "0".into()
    } else {
        parts.join(" + ")
    }
}

/// `(x + z)² | P_q` with zero remainder, by substitution and by long division.
pub fn verify_divisibility(q_max: u32) -> Result<IdentityReport> {
    let mut c = Checker::new("divisibility_by_(x+z)^2", 1, q_max);
    for q in 1..=q_max {
        let p = poly_p(q)?;
        let (quo, rem) = p.divide_by_x_plus_z_sq();
        c.check(rem.is_zero(), q, || ("substitution remainder".into(), rem.to_string(), "0".into()));
        let (quo2, rem2) = p.long_divide_by_x_plus_z_sq();
        c.check(rem2.is_zero(), q, || ("long-division remainder".into(), rem2.to_string(), "0".into()));
        c.check(quo == quo2, q, || ("quotients of the two routes differ".into(), quo.to_string(), quo2.to_string()));
        c.check(quo.is_homogeneous(2 * q - 2), q, || ("quotient not homogeneous of degree 2q-2".into(), quo.to_string(), String::new()));
    }
    Ok(c.finish())
}

/// `P_q(−1, y, 1) = 0` and `∂P_q/∂x(−1, y, 1) = 0` as polynomials in `y`.
pub fn verify_dehomogenised_vanishing(q_max: u32) -> Result<IdentityReport> {
    let mut c = Checker::new("P_q(-1,y,1)=0 and dP_q/dx(-1,y,1)=0", 1, q_max);
    let (m1, one) = (-Rational::one(), Rational::one());
    for q in 1..=q_max {
        let p = poly_p(q)?;
        c.check(p.is_homogeneous(2 * q) && p.is_even_in_y(), q, || ("P_q not homogeneous of degree 2q and even in y".into(), p.to_string(), String::new()));
        let v = p.restrict_xz(&m1, &one);
        c.check(v.is_empty(), q, || ("P_q(-1,y,1)".into(), poly_y_to_string(&v), "0".into()));
        let d = p.d_dx().restrict_xz(&m1, &one);
        c.check(d.is_empty(), q, || ("dP_q/dx(-1,y,1)".into(), poly_y_to_string(&d), "0".into()));
    }
    Ok(c.finish())
}

/// The `y^{2k}` coefficients of `P_q(−1,y,1)` equal `(−1)^k 2^{4q} S_q(k)` plus the
/// correction, and this reconstruction vanishes for every `k`.
pub fn verify_p_s_relation(q_max: u32) -> Result<IdentityReport> {
    let mut c = Checker::new("P_q(-1,y,1) rebuilt from d_q(k)=2^{4q}S_q(k)", 1, q_max);
    let (m1, one) = (-Rational::one(), Rational::one());
    for q in 1..=q_max {
        let scale = Rational::from_integer(BigInt::one() << (4 * q as usize));
        let pt = chaos_polys(q)?.p_tilde.restrict_xz(&m1, &one);
        let cq = c_coeff(q);
        for k in 0..=q as i64 {
            let d = d_coeff(q, k);
            c.eq(q, &format!("d_q({k}) = 2^(4q) S_q({k})"), &d, &(&scale * s_sum(q, k)));
            let signed = if k.is_even() { d.clone() } else { -d.clone() };
            let coeff = pt.get(2 * k as usize).cloned().unwrap_or_else(Rational::zero);
            c.eq(q, &format!("y^{} coefficient of P~_q(-1,y,1)", 2 * k), &coeff, &signed);
            let corr = match k {
                0 => -cq.clone(),
                1 => &cq * rat(2 * q as i64 - 1, 1),
                _ => Rational::zero(),
            };
            c.eq(q, &format!("y^{} coefficient of P_q(-1,y,1)", 2 * k), &(signed + corr), &Rational::zero());
        }
    }
    Ok(c.finish())
}

/// Closed forms of `S_q(k)`, `S′_q(k)` for all `k ≥ 0`, and `S_q(q) = 0` for `q ≥ 2`.
pub fn verify_s_closed_forms(q_max: u32) -> Result<IdentityReport> {
    let mut c = Checker::new("closed forms of S_q(k), S'_q(k) and S_q(q)=0", 1, q_max);
    for q in 1..=q_max {
        // Beyond k = q the factorial (2q − l₁ − l₂ − k)! and (l₁ + l₂ − k)! cannot both be finite.
        for k in 0..=(q as i64 + 2) {
            c.eq(q, &format!("S_{q}({k})"), &s_sum(q, k), &s_closed_form(q, k));
            c.eq(q, &format!("S'_{q}({k})"), &s_prime_sum(q, k), &s_prime_closed_form(q, k));
        }
        if q >= 2 {
            c.eq(q, &format!("S_{q}({q})"), &s_sum(q, q as i64), &Rational::zero());
        }
    }
    Ok(c.finish())
}

/// Both recurrences on `S_q(k)` and `S′_q(k)` for `1 ≤ q ≤ q_max`, `0 ≤ k ≤ 2q + 4`,
/// outside the excluded indices, plus `S_q(q) = 0` for `q ≥ 2`.
pub fn verify_recurrences(q_max: u32) -> Result<IdentityReport> {
    let mut c = Checker::new("recurrences for S_q(k) and S'_q(k)", 1, q_max);
    for q in 1..=q_max {
        for k in 0..=(2 * q as i64 + 4) {
            if let Some(lhs) = recurrence_s_lhs(q, k) {
                c.eq(q, &format!("three-term recurrence at k={k}"), &lhs, &Rational::zero());
            }
            if let Some(lhs) = recurrence_s_prime_lhs(q, k) {
                c.eq(q, &format!("two-term recurrence at k={k}"), &lhs, &Rational::zero());
            }
        }
        if q >= 2 {
            c.eq(q, &format!("S_{q}({q}) = 0"), &s_sum(q, q as i64), &Rational::zero());
        }
    }
    Ok(c.finish())
}

/// `c_q = Σ_l C(2l,l)C(2q−2l,q−l)/(2l−1)²`.
pub fn verify_c_identity(q_max: u32) -> Result<IdentityReport> {
    let mut c = Checker::new("c_q = sum C(2l,l)C(2q-2l,q-l)/(2l-1)^2", 1, q_max);
    for q in 1..=q_max {
        c.eq(q, "c_q", &c_coeff(q), &c_identity_sum(q));
    }
    Ok(c.finish())
}

/// `b_q(l₁, l₂, n)` equals the brute-force pairing count on the whole admissible domain.
pub fn verify_diagram_counts(q_max: u32) -> Result<IdentityReport> {
    let mut c = Checker::new("b_q(l1,l2,n) = diagram count", 1, q_max);
    for q in 1..=q_max {
        for l1 in 0..=q {
            for l2 in 0..=q {
                let counts = diagram_counts(q, l1, l2)?;
                for (n, &count) in counts.iter().enumerate() {
                    let b = b_coeff(q, l1 as i64, l2 as i64, n as i64);
                    // Outside max(0, 2(l₁+l₂−q)) ≤ n both sides must vanish.
                    let lo = 0.max(2 * (l1 as i64 + l2 as i64 - q as i64)) as usize;
                    let expect = if n < lo { Rational::zero() } else { b };
                    c.eq(q, &format!("(l1,l2,n)=({l1},{l2},{n})"), &Rational::from_integer(BigInt::from(count)), &expect);
                }
            }
        }
    }
    Ok(c.finish())
}

/// `R_q(x, y, −x) = 2^{2q−1}(x² + y²)^{q−1}` as polynomials.
pub fn verify_boundary_slice(q_max: u32) -> Result<IdentityReport> {
    let mut c = Checker::new("R_q(x,y,-x) = 2^{2q-1}(x^2+y^2)^{q-1}", 1, q_max);
    for q in 1..=q_max {
        let r = chaos_polys(q)?.r.on_antidiagonal();
        let mut expect = TrivariatePoly::zero();
        let n = q as i64 - 1;
        for a in 0..=n {
            let coeff = Rational::from_integer((BigInt::one() << (2 * q as usize - 1)) * binomial(n, a));
            expect.add_term((2 * a as u32, 2 * (n - a) as u32, 0), coeff);
        }
        let ok = r == expect;
        c.check(ok, q, || ("slice z = -x".into(), r.to_string(), expect.to_string()));
    }
    Ok(c.finish())
}

/// Partial sums of `Σ_l C(2l,l)x^l/(2l−1)` at `x = 1/8` converge monotonically in
/// error to `−√(1 − 4x)`. Returns the report and the final error.
pub fn verify_c_generating_function(l_max: u32) -> (IdentityReport, f64) {
    let mut c = Checker::new("sum C(2l,l) x^l/(2l-1) -> -sqrt(1-4x) at x=1/8", 0, l_max);
    let x = rat(1, 8);
    let target = -(0.5f64).sqrt();
    let mut partial = Rational::zero();
    let mut xp = Rational::one();
    let mut prev_err = f64::INFINITY;
    let mut err = f64::INFINITY;
    for l in 0..=l_max as i64 {
        partial += Rational::from_integer(binomial(2 * l, l)) * &xp / Rational::from_integer(BigInt::from(2 * l - 1));
        xp *= &x;
        err = (to_f64(&partial) - target).abs();
        // Errors shrink until they reach double-precision resolution of the target.
        let ok = err <= prev_err || err < 1e-15;
        c.check(ok, l as u32, || (format!("error did not decrease at l={l}"), err.to_string(), prev_err.to_string()));
        prev_err = err;
    }
    c.check(err < 1e-14, l_max, || ("final partial sum error".into(), err.to_string(), "1e-14".into()));
    (c.finish(), err)
}

/// `½ Σ_{q≥1} (2x)^{2q}/(q² C(2q,q))` against `arcsin²(x)`, truncated adaptively.
/// Returns `(value, terms used)`.
pub fn arcsin_sq_series(x: f64) -> (f64, usize) {
    let mut sum = 0.0;
    // t_q = (2x)^{2q}/(q² C(2q,q)); t_1 = 2x².
    let mut t = 2.0 * x * x;
    let mut q = 1usize;
    loop {
        sum += t;
        let qf = q as f64;
        t *= 4.0 * x * x * qf * qf / (2.0 * (qf + 1.0) * (2.0 * qf + 1.0));
        q += 1;
        // The ratio of consecutive terms is below x², so the tail is under t/(1 − x²).
        if t / (1.0 - x * x) < 1e-17 * sum || q > 100_000 {
            break;
        }
    }
    (0.5 * sum, q - 1)
}

/// Checks the arcsine-squared series at the given points to `tol`.
pub fn verify_arcsin_series(points: &[f64], tol: f64) -> IdentityReport {
    let mut c = Checker::new("arcsin^2 Taylor series", 0, 0);
    for &x in points {
        let (v, n) = arcsin_sq_series(x);
        let exact = x.asin().powi(2);
        c.check((v - exact).abs() <= tol, 0, || (format!("x={x}, {n} terms"), v.to_string(), exact.to_string()));
    }
    c.finish()
}

/// Bound constant `e²/√π · q^{3/2} 4^q`.
pub fn prop52_constant(q: u32) -> f64 {
    let qf = q as f64;
    std::f64::consts::E.powi(2) / std::f64::consts::PI.sqrt() * qf.powf(1.5) * 4f64.powi(q as i32)
}

/// Outcome of the pointwise bound check on `D_M = {|x|+|y| ≤ M, |y|+|z| ≤ M}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub q: u32,
    pub m: f64,
    pub samples: usize,
    pub bound: f64,
    /// Largest `|R_q|/bound` over the floating-point samples.
    pub max_ratio: f64,
    pub argmax: [f64; 3],
    /// Largest ratio over the same lattice evaluated exactly in integers.
    pub exact_max_ratio: f64,
    pub violations: usize,
    /// Exact value of `R_q(M, 0, −M)` against `2^{2q−1}M^{2q−2}`.
    pub boundary_value: f64,
    pub boundary_matches: bool,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_violation: Option<[f64; 3]>,
}

/// Integer lattice points `(X, Y, Z)` with `(x, y, z) = (M/N²)(X, Y, Z) ∈ D_M`.
///
/// A rank-1 (Korobov) lattice `i·(1, g, g²) mod N` in the unit cube is mapped into
/// `D_M` by `y = M v₁`, `x = M(1 − |v₁|)v₂`, `z = M(1 − |v₁|)v₃`, `v = (2u − 1)`.
fn lattice_points(samples: usize) -> (i64, Vec<[i64; 3]>) {
    let n = samples.max(2) as i64;
    let g = korobov_generator(n);
    let pts = (0..n)
        .map(|i| {
            let u = [i % n, (i * g) % n, (i * ((g * g) % n)) % n];
            let s = u.map(|ui| 2 * ui + 1 - n);
            let w = n - s[0].abs();
            [w * s[1], s[0] * n, w * s[2]]
        })
        .collect();
    (n, pts)
}

fn korobov_generator(n: i64) -> i64 {
    // A generator near n/φ with gcd 1 spreads the projections well.
    let mut g = ((n as f64) / 1.618_033_988_749_895).round() as i64;
    while g.gcd(&n) != 1 {
        g += 1;
    }
    g.max(1)
}

/// Exact `|R_q(X, Y, Z)| / (bound · N^{4q−4})` on integer points, in parallel chunks.
fn exact_ratios(q: u32, n: i64, pts: &[[i64; 3]]) -> Result<Vec<f64>> {
    use rayon::prelude::*;
    let r = &chaos_polys(q)?.r;
    let lcm = r.terms().fold(BigInt::one(), |acc, (_, c)| acc.lcm(c.denom()));
    let terms: Vec<(usize, usize, usize, BigInt)> = r
        .terms()
        .map(|(&(i, j, k), c)| (i as usize, j as usize, k as usize, (c * Rational::from_integer(lcm.clone())).to_integer()))
        .collect();
    let deg = 2 * q as usize - 2;
    let scale = BigInt::from(n).pow(2 * deg as u32) * &lcm;
    let bound = prop52_constant(q);
    Ok(pts
        .par_iter()
        .map(|p| {
            let pows = |v: i64| {
                let mut out = Vec::with_capacity(deg + 1);
                let mut acc = BigInt::one();
                for _ in 0..=deg {
                    out.push(acc.clone());
                    acc *= v;
                }
                out
            };
            let (px, py, pz) = (pows(p[0]), pows(p[1]), pows(p[2]));
            let mut v = BigInt::zero();
            for (i, j, k, c) in &terms {
                v += c * &px[*i] * &py[*j] * &pz[*k];
            }
            let ratio = Rational::new(v.abs(), scale.clone());
            ratio.to_f64().unwrap_or(f64::INFINITY) / bound
        })
        .collect())
}

/// Checks `|R_q| ≤ e²/√π q^{3/2} 4^q M^{2q−2}` on `samples` lattice points of `D_M`,
/// both in double-double at the rounded points and exactly on the integer lattice.
pub fn bound_check_prop52(q: u32, m: f64, samples: usize) -> Result<BoundReport> {
    use crate::error::Error;
    if !(m > 0.0 && m <= 1.0) {
        return Err(Error::ParameterOutOfRange(format!("M must lie in (0, 1], got {m}")));
    }
    let polys = chaos_polys(q)?;
    let bound = prop52_constant(q) * m.powi(2 * q as i32 - 2);
    let (n, pts) = lattice_points(samples);
    let scale = m / (n as f64 * n as f64);
    let mut max_ratio = 0.0f64;
    let mut argmax = [0.0; 3];
    let mut violations = 0;
    let mut first_violation = None;
    for p in &pts {
        let (x, y, z) = (p[0] as f64 * scale, p[1] as f64 * scale, p[2] as f64 * scale);
        let v = polys.r_eval.eval_point(x, y, z).to_f64().abs();
        let ratio = v / bound;
        if ratio > max_ratio {
            max_ratio = ratio;
            argmax = [x, y, z];
        }
        if ratio > 1.0 {
            violations += 1;
            first_violation.get_or_insert([x, y, z]);
        }
    }
    // The check is homogeneous: on the integer lattice M cancels from both sides.
    let exact = exact_ratios(q, n, &pts)?;
    let exact_max_ratio = exact.iter().copied().fold(0.0, f64::max);
    let exact_violations = exact.iter().filter(|&&r| r > 1.0).count();
    violations = violations.max(exact_violations);
    let mr = Rational::from_float(m).expect("finite M");
    let bv = polys.r.eval_rational(&mr, &Rational::zero(), &-mr.clone());
    let expect = Rational::from_integer(BigInt::one() << (2 * q as usize - 1)) * num_traits::pow(mr, 2 * q as usize - 2);
    let boundary_value = to_f64(&bv);
    let boundary_matches = bv == expect && boundary_value <= bound;
    let status = if violations == 0 && boundary_matches { Status::Pass } else { Status::Fail };
    Ok(BoundReport {
        q,
        m,
        samples: pts.len(),
        bound,
        max_ratio,
        argmax,
        exact_max_ratio,
        violations,
        boundary_value,
        boundary_matches,
        status,
        first_violation,
    })
}

/// Largest `|R_q|` found on the boundary of `D = {x² + y² ≤ 1, y² + z² ≤ 1}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExploreReport {
    pub q: u32,
    pub resolution: usize,
    pub point: [f64; 3],
    pub value: f64,
}

/// Grid search over the boundary faces of `D` followed by local pattern-search refinement.
pub fn explore_rq_max(q: u32, resolution: usize) -> Result<ExploreReport> {
    use crate::error::Error;
    if q > 12 {
        return Err(Error::SizeGuard(format!("explore_Rq_max is limited to q ≤ 12, got {q}")));
    }
    let polys = chaos_polys(q)?;
    let n = resolution.max(3);
    // Face parametrisation: (face, sign, y, s) with w = √(1 − y²); face 0 puts
    // x = ±w and z = s·w, face 1 puts z = ±w and x = s·w.
    let point = |face: usize, sign: f64, y: f64, s: f64| {
        let y = y.clamp(-1.0, 1.0);
        let s = s.clamp(-1.0, 1.0);
        let w = (1.0 - y * y).max(0.0).sqrt();
        if face == 0 {
            [sign * w, y, s * w]
        } else {
            [s * w, y, sign * w]
        }
    };
    let value = |p: [f64; 3]| polys.r_eval.eval_point(p[0], p[1], p[2]).to_f64().abs();
    let mut best = (0.0f64, (0usize, 1.0f64, 0.0f64, 0.0f64));
    for face in 0..2 {
        for &sign in &[1.0, -1.0] {
            for iy in 0..n {
                let y = -1.0 + 2.0 * iy as f64 / (n - 1) as f64;
                for is in 0..n {
                    let s = -1.0 + 2.0 * is as f64 / (n - 1) as f64;
                    let v = value(point(face, sign, y, s));
                    if v > best.0 {
                        best = (v, (face, sign, y, s));
                    }
                }
            }
        }
    }
    let (mut v, (face, sign, mut y, mut s)) = best;
    let mut step = 2.0 / (n - 1) as f64;
    while step > 1e-12 {
        let mut improved = false;
        for (dy, ds) in [(step, 0.0), (-step, 0.0), (0.0, step), (0.0, -step)] {
            let (ny, ns) = ((y + dy).clamp(-1.0, 1.0), (s + ds).clamp(-1.0, 1.0));
            let nv = value(point(face, sign, ny, ns));
            if nv > v {
                v = nv;
                y = ny;
                s = ns;
                improved = true;
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    Ok(ExploreReport {
        q,
        resolution: n,
        point: point(face, sign, y, s),
        value: v,
    })
}

/// Runs every exact identity up to `q_max` and returns one report per identity.
pub fn verify_all(q_max: u32) -> Result<Vec<IdentityReport>> {
    let mut out = vec![
        verify_divisibility(q_max)?,
        verify_dehomogenised_vanishing(q_max)?,
        verify_p_s_relation(q_max)?,
        verify_s_closed_forms(q_max)?,
        verify_recurrences(q_max)?,
        verify_c_identity(q_max)?,
        verify_diagram_counts(q_max.min(4))?,
        verify_boundary_slice(q_max)?,
        verify_c_generating_function(60).0,
        verify_arcsin_series(&[0.1, 0.5, 0.9], 1e-12),
    ];
    out.retain(|r| r.q_range[1] >= r.q_range[0]);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_range_reports_pass() {
        for r in verify_all(5).unwrap() {
            assert!(r.passed(), "{r:?}");
        }
    }

    #[test]
    fn arcsin_series_converges() {
        for x in [0.1, 0.5, 0.9] {
            let (v, _) = arcsin_sq_series(x);
            assert!((v - x.asin().powi(2)).abs() < 1e-12);
        }
    }

    #[test]
    fn lattice_stays_inside_d_m() {
        let (n, pts) = lattice_points(1000);
        let nn = (n * n) as f64;
        for p in pts {
            let (x, y, z) = (p[0] as f64 / nn, p[1] as f64 / nn, p[2] as f64 / nn);
            assert!(x.abs() + y.abs() <= 1.0 + 1e-15 && y.abs() + z.abs() <= 1.0 + 1e-15);
        }
    }
}
