//! Brute-force count of the pairings behind the diagram formula for products of
//! Hermite polynomials in `(f(t), f′(t)/σ, f(s), f′(s)/σ)`.

use super::coeffs::{b_coeff, to_f64};
use crate::error::{Error, Result};

/// Largest `2q` accepted by the enumeration.
pub const DIAGRAM_MAX_2Q: u32 = 10;

/// Vertex labels: value and derivative at the two times.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Label {
    Ft,
    Dt,
    Fs,
    Ds,
}

fn allowed(a: Label, b: Label) -> bool {
    use Label::*;
    // Edges within one time carry zero covariance (r(0) terms belong to the
    // Hermite normalisation, r′(0) = 0), so only cross-time edges survive.
    matches!((a, b), (Ft, Fs) | (Ft, Ds) | (Dt, Fs) | (Dt, Ds) | (Fs, Ft) | (Ds, Ft) | (Fs, Dt) | (Ds, Dt))
}

/// Counts perfect matchings of the labelled vertex groups of sizes
/// `(2q−2l₁, 2l₁, 2q−2l₂, 2l₂)` for `(f(t), f′(t), f(s), f′(s))`, indexed by the
/// number of `f′(t)–f′(s)` edges.
pub fn diagram_counts(q: u32, l1: u32, l2: u32) -> Result<Vec<u64>> {
    if 2 * q > DIAGRAM_MAX_2Q {
        return Err(Error::SizeGuard(format!("diagram enumeration limited to 2q ≤ {DIAGRAM_MAX_2Q}, got q={q}")));
    }
    if l1 > q || l2 > q {
        return Ok(vec![0; 2 * q.min(l1).min(l2) as usize + 1]);
    }
    let mut vertices = Vec::new();
    vertices.extend(std::iter::repeat(Label::Ft).take((2 * q - 2 * l1) as usize));
    vertices.extend(std::iter::repeat(Label::Dt).take((2 * l1) as usize));
    vertices.extend(std::iter::repeat(Label::Fs).take((2 * q - 2 * l2) as usize));
    vertices.extend(std::iter::repeat(Label::Ds).take((2 * l2) as usize));
    let mut counts = vec![0u64; 2 * l1.min(l2) as usize + 1];
    let mut used = vec![false; vertices.len()];
    enumerate(&vertices, &mut used, 0, &mut counts);
    Ok(counts)
}

fn enumerate(v: &[Label], used: &mut [bool], dd_edges: usize, counts: &mut [u64]) {
    let Some(first) = used.iter().position(|u| !u) else {
        counts[dd_edges] += 1;
        return;
    };
    used[first] = true;
    for j in first + 1..v.len() {
        if used[j] || !allowed(v[first], v[j]) {
            continue;
        }
        used[j] = true;
        let extra = usize::from(v[first] == Label::Dt && v[j] == Label::Ds);
        enumerate(v, used, dd_edges + extra, counts);
        used[j] = false;
    }
    used[first] = false;
}

/// Number of matchings with exactly `n` derivative–derivative edges.
pub fn diagram_count_oracle(q: u32, l1: u32, l2: u32, n: u32) -> Result<u64> {
    let counts = diagram_counts(q, l1, l2)?;
    Ok(counts.get(n as usize).copied().unwrap_or(0))
}

/// Closed form of `E[H_{2q−2l₁}(f(t)) H_{2l₁}(f′(t)/σ) H_{2q−2l₂}(f(s)) H_{2l₂}(f′(s)/σ)]`
/// at the normalised point `(x, y, z) = (r, r′/σ, r″/σ²)` of the lag `t − s`.
pub fn hermite_product_closed_form(q: u32, l1: u32, l2: u32, x: f64, y: f64, z: f64) -> f64 {
    let (q, l1, l2) = (q as i64, l1 as i64, l2 as i64);
    if l1 > q || l2 > q {
        return 0.0;
    }
    let lo = 0.max(2 * (l1 + l2 - q));
    let hi = (2 * l1).min(2 * l2);
    (lo..=hi)
        .map(|n| {
            to_f64(&b_coeff(q as u32, l1, l2, n)) * x.powi((2 * (q - l1 - l2) + n) as i32) * y.powi((2 * (l1 + l2 - n)) as i32) * z.powi(n as i32)
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_cases() {
        assert_eq!(diagram_count_oracle(1, 0, 0, 0).unwrap(), 2);
        assert_eq!(diagram_counts(1, 1, 1).unwrap(), vec![0, 0, 2]);
        assert!(matches!(diagram_count_oracle(6, 0, 0, 0), Err(Error::SizeGuard(_))));
    }
}
