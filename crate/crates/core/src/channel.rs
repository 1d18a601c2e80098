//! Rayleigh block-fading channels for the transmitter -> RIS and RIS ->
//! receiver links.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid_config, Result};

/// One draw of `H1` (N x 1) and `H2` (N_r x N).
///
/// Polar accessors follow `h1[i] = alpha(i) e^{-j theta(i)}` and
/// `h2[m][i] = beta(i, m) e^{-j omega(i, m)}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    n_res: usize,
    n_rx: usize,
    h1: Vec<Complex64>,
    // row-major, row m = receive antenna
    h2: Vec<Complex64>,
}

impl ChannelRealization {
    pub fn from_parts(h1: Vec<Complex64>, h2: Vec<Complex64>, n_rx: usize) -> Result<Self> {
        let n_res = h1.len();
        if n_res == 0 || n_rx == 0 {
            return Err(invalid_config("channel dimensions must be non-zero"));
        }
        if h2.len() != n_res * n_rx {
            return Err(invalid_config(format!(
                "H2 has {} entries, expected {n_rx} x {n_res}",
                h2.len()
            )));
        }
        Ok(Self { n_res, n_rx, h1, h2 })
    }

    /// All-zero realization of the given size, for reuse with [`Self::redraw`].
    pub fn zeros(n_res: usize, n_rx: usize) -> Result<Self> {
        Self::from_parts(
            vec![Complex64::new(0.0, 0.0); n_res],
            vec![Complex64::new(0.0, 0.0); n_res * n_rx],
            n_rx,
        )
    }

    pub fn n_res(&self) -> usize {
        self.n_res
    }

    pub fn n_rx(&self) -> usize {
        self.n_rx
    }

    pub fn h1(&self) -> &[Complex64] {
        &self.h1
    }

    pub fn h2(&self) -> &[Complex64] {
        &self.h2
    }

    pub fn h2_row(&self, m: usize) -> &[Complex64] {
        &self.h2[m * self.n_res..(m + 1) * self.n_res]
    }

    pub fn h2_at(&self, m: usize, i: usize) -> Complex64 {
        self.h2[m * self.n_res + i]
    }

    pub fn alpha(&self, i: usize) -> f64 {
        self.h1[i].norm()
    }

    pub fn theta(&self, i: usize) -> f64 {
        wrap_phase(-self.h1[i].arg())
    }

    pub fn beta(&self, i: usize, m: usize) -> f64 {
        self.h2_at(m, i).norm()
    }

    pub fn omega(&self, i: usize, m: usize) -> f64 {
        wrap_phase(-self.h2_at(m, i).arg())
    }

    /// Overwrites every coefficient with a fresh draw: `h1` first, then `h2`
    /// row by row.
    pub fn redraw<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        for h in self.h1.iter_mut().chain(self.h2.iter_mut()) {
            *h = complex_gaussian(rng, 1.0);
        }
    }
}

/// Maps an angle into `(-pi, pi]`.
pub fn wrap_phase(phase: f64) -> f64 {
    let mut p = phase % (2.0 * PI);
    if p <= -PI {
        p += 2.0 * PI;
    } else if p > PI {
        p -= 2.0 * PI;
    }
    p
}

/// Circularly-symmetric complex Gaussian with total variance `variance`.
#[inline]
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * (variance.sqrt() * FRAC_1_SQRT_2)
}

/// i.i.d. CN(0, 1) draw of both links.
pub fn draw_channels<R: Rng + ?Sized>(
    n_res: usize,
    n_rx: usize,
    rng: &mut R,
) -> Result<ChannelRealization> {
    let mut ch = ChannelRealization::zeros(n_res, n_rx)?;
    ch.redraw(rng);
    Ok(ch)
}

/// Receiver noise vector with CN(0, n0) entries.
pub fn draw_noise<R: Rng + ?Sized>(n_rx: usize, n0: f64, rng: &mut R) -> Result<Vec<Complex64>> {
    let mut out = vec![Complex64::new(0.0, 0.0); n_rx];
    fill_noise(&mut out, n0, rng)?;
    Ok(out)
}

pub fn fill_noise<R: Rng + ?Sized>(out: &mut [Complex64], n0: f64, rng: &mut R) -> Result<()> {
    if !(n0 >= 0.0) {
        return Err(invalid_config(format!("noise power must be non-negative, got {n0}")));
    }
    if n0 == 0.0 {
        out.fill(Complex64::new(0.0, 0.0));
        return Ok(());
    }
    for v in out.iter_mut() {
        *v = complex_gaussian(rng, n0);
    }
    Ok(())
}
