//! Exact grid sampling by circulant embedding of the covariance matrix.

use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::spectral::Kernel;

/// Relative size below which negative embedding eigenvalues count as round-off.
const NEG_EIG_TOL: f64 = 1e-9;
/// Maximum number of embedding doublings before giving up.
const MAX_DOUBLINGS: u32 = 4;

/// Square roots of the scaled eigenvalues of a nonnegative circulant embedding.
pub struct CirculantEmbedding {
    sqrt_eig: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
    /// Grid points covered, `n_steps + 1`.
    points: usize,
    /// Bound `Σ|λ_neg|/m` on the covariance error from clipping round-off negatives.
    pub clipped: f64,
}

impl std::fmt::Debug for CirculantEmbedding {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CirculantEmbedding").field("size", &self.sqrt_eig.len()).field("points", &self.points).field("clipped", &self.clipped).finish()
    }
}

impl CirculantEmbedding {
    /// Embeds the covariance of `f(0), f(h), …, f(n_steps·h)`.
    pub fn new(kernel: &Kernel, h: f64, n_steps: usize) -> Result<Self> {
        let mut half = n_steps.max(1).next_power_of_two();
        let mut planner = FftPlanner::<f64>::new();
        let mut worst = 0.0;
        for _ in 0..=MAX_DOUBLINGS {
            let m = 2 * half;
            let mut c = vec![Complex::new(0.0, 0.0); m];
            for k in 0..=half {
                let r = kernel.try_jet(k as f64 * h)?.r;
                c[k] = Complex::new(r, 0.0);
                if k > 0 && k < half {
                    c[m - k] = Complex::new(r, 0.0);
                }
            }
            let fft = planner.plan_fft_forward(m);
            fft.process(&mut c);
            let max = c.iter().map(|z| z.re).fold(0.0, f64::max);
            let min = c.iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
            if min >= -NEG_EIG_TOL * max {
                let clipped = c.iter().map(|z| (-z.re).max(0.0)).sum::<f64>() / m as f64;
                let sqrt_eig = c.iter().map(|z| (z.re.max(0.0) / m as f64).sqrt()).collect();
                return Ok(CirculantEmbedding {
                    sqrt_eig,
                    fft,
                    points: n_steps + 1,
                    clipped,
                });
            }
            worst = min / max;
            half *= 2;
        }
        Err(Error::Embedding(format!(
            "smallest circulant eigenvalue is {worst:e} of the largest after {MAX_DOUBLINGS} doublings; refine the grid or use the spectral method"
        )))
    }

    /// Size of the complex normal vector consumed per path.
    pub fn size(&self) -> usize {
        self.sqrt_eig.len()
    }

    /// Writes one path into `out` from `2·size()` standard normals `z`.
    pub fn sample(&self, z: &[f64], out: &mut Vec<f64>) {
        let mut buf: Vec<Complex<f64>> = self.sqrt_eig.iter().enumerate().map(|(k, s)| Complex::new(s * z[2 * k], s * z[2 * k + 1])).collect();
        self.fft.process(&mut buf);
        out.clear();
        out.extend(buf[..self.points].iter().map(|c| c.re));
    }
}
