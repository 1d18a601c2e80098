//! First and second moments of the per-antenna distance terms
//! `D_n = G_{r,n} x_k - G_{r^,n} x_k^` under Rayleigh fading.
//!
//! Each reflecting element contributes an independent term to every `D_n`,
//! so the moments are accumulated element by element. For an element served
//! by antenna `a` under `r` and antenna `b` under `r^`, its contribution to
//! antenna `n` is `beta_{n} alpha (x e^{j(w_a - w_n)} - y e^{j(w_b - w_n)})`
//! with independent uniform phases, `E[alpha] = E[beta] = sqrt(pi)/2` and
//! `E[alpha^2] = E[beta^2] = 1`.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::mgf::QuadraticFormStats;
use crate::error::{invalid_input, Result};
use crate::mapping::AntennaCombination;
use crate::ris::element_assignment;

const MEAN_PRODUCT: f64 = PI / 4.0;

/// Mean, covariance `E[(D-m)(D-m)^H]` and pseudo-covariance
/// `E[(D-m)(D-m)^T]` of the complex vector `D`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairMoments {
    n_rx: usize,
    mean: Vec<Complex64>,
    cov: Vec<Complex64>,
    pcov: Vec<Complex64>,
}

impl PairMoments {
    pub fn n_rx(&self) -> usize {
        self.n_rx
    }

    pub fn mean(&self) -> &[Complex64] {
        &self.mean
    }

    pub fn cov(&self, n: usize, m: usize) -> Complex64 {
        self.cov[n * self.n_rx + m]
    }

    pub fn pcov(&self, n: usize, m: usize) -> Complex64 {
        self.pcov[n * self.n_rx + m]
    }

    /// Real statistics of `q_j = sum_{n in groups[j]} D_n`, laid out as
    /// `[Re q_0, Im q_0, Re q_1, Im q_1, ...]`.
    pub fn grouped_stats(&self, groups: &[&[usize]]) -> Result<QuadraticFormStats> {
        if groups.iter().flat_map(|g| g.iter()).any(|&n| n >= self.n_rx) {
            return Err(invalid_input("antenna group exceeds the receive array"));
        }
        let g = groups.len();
        let mut mu = Vec::with_capacity(2 * g);
        for grp in groups {
            let m: Complex64 = grp.iter().map(|&n| self.mean[n]).sum();
            mu.extend([m.re, m.im]);
        }
        let f = 2 * g;
        let mut sigma = vec![0.0; f * f];
        for (j, gj) in groups.iter().enumerate() {
            for (k, gk) in groups.iter().enumerate() {
                let mut c = Complex64::new(0.0, 0.0);
                let mut p = Complex64::new(0.0, 0.0);
                for &n in gj.iter() {
                    for &m in gk.iter() {
                        c += self.cov(n, m);
                        p += self.pcov(n, m);
                    }
                }
                let (rj, ij, rk, ik) = (2 * j, 2 * j + 1, 2 * k, 2 * k + 1);
                sigma[rj * f + rk] = 0.5 * (c + p).re;
                sigma[rj * f + ik] = 0.5 * (p - c).im;
                sigma[ij * f + rk] = 0.5 * (c + p).im;
                sigma[ij * f + ik] = 0.5 * (c - p).re;
            }
        }
        QuadraticFormStats::new(mu, sigma)
    }

    /// Joint statistics of every antenna, dimension `2 N_r`.
    pub fn per_antenna_stats(&self) -> Result<QuadraticFormStats> {
        let singles: Vec<[usize; 1]> = (0..self.n_rx).map(|n| [n]).collect();
        let groups: Vec<&[usize]> = singles.iter().map(|s| s.as_slice()).collect();
        self.grouped_stats(&groups)
    }
}

/// Moments of `D` for transmitted `(ac_r, x)` against candidate `(ac_rhat, y)`.
pub fn pair_moments(
    n_res: usize,
    n_rx: usize,
    ac_r: &AntennaCombination,
    ac_rhat: &AntennaCombination,
    x: Complex64,
    y: Complex64,
    es: f64,
) -> Result<PairMoments> {
    let served = element_assignment(n_res, ac_r)?;
    let served_hat = element_assignment(n_res, ac_rhat)?;
    if served.iter().chain(&served_hat).any(|&a| a >= n_rx) {
        return Err(invalid_input("combination exceeds the receive array"));
    }
    let zero = Complex64::new(0.0, 0.0);
    let mut mean = vec![zero; n_rx];
    let mut cov = vec![zero; n_rx * n_rx];
    let mut pcov = vec![zero; n_rx * n_rx];
    let m2 = MEAN_PRODUCT * MEAN_PRODUCT;
    let at = |n: usize, m: usize| n * n_rx + m;
    for (&a, &b) in served.iter().zip(&served_hat) {
        if a == b {
            let d = x - y;
            mean[a] += d * MEAN_PRODUCT;
            for n in 0..n_rx {
                cov[at(n, n)] += d.norm_sqr();
            }
            cov[at(a, a)] -= d.norm_sqr() * m2;
            pcov[at(a, a)] += d * d * (1.0 - m2);
        } else {
            mean[a] += x * MEAN_PRODUCT;
            mean[b] -= y * MEAN_PRODUCT;
            let s = x.norm_sqr() + y.norm_sqr();
            for n in 0..n_rx {
                cov[at(n, n)] += s;
            }
            cov[at(a, a)] -= x.norm_sqr() * m2;
            cov[at(b, b)] -= y.norm_sqr() * m2;
            // E[T_a T_b^*] = -(pi/4) x y^*, minus m_a m_b^* = -(pi^2/16) x y^*
            let cab = x * y.conj() * (m2 - MEAN_PRODUCT);
            cov[at(a, b)] += cab;
            cov[at(b, a)] += cab.conj();
            pcov[at(a, a)] += x * x * (1.0 - m2);
            pcov[at(b, b)] += y * y * (1.0 - m2);
            // E[T_a T_b] = -(pi/2) x y, minus m_a m_b = -(pi^2/16) x y
            let pab = x * y * (m2 - 2.0 * MEAN_PRODUCT);
            pcov[at(a, b)] += pab;
            pcov[at(b, a)] += pab;
        }
    }
    let es2 = es * es;
    Ok(PairMoments {
        n_rx,
        mean: mean.into_iter().map(|m| m * es).collect(),
        cov: cov.into_iter().map(|c| c * es2).collect(),
        pcov: pcov.into_iter().map(|p| p * es2).collect(),
    })
}

/// Statistics of `z_1 = [Re q_1, Im q_1, Re q_2, Im q_2]` where `q_1` sums
/// `D_n` over the transmitted combination and `q_2` over the detected one.
///
/// The covariance, cross terms included, comes from the per-element
/// bookkeeping above rather than the printed diagonal formulas; see
/// [`printed_z1_variances`] for those.
pub fn z1_stats(
    n_res: usize,
    n_rx: usize,
    ac_r: &AntennaCombination,
    ac_rhat: &AntennaCombination,
    x: Complex64,
    y: Complex64,
    es: f64,
) -> Result<QuadraticFormStats> {
    let moments = pair_moments(n_res, n_rx, ac_r, ac_rhat, x, y, es)?;
    moments.grouped_stats(&[ac_r.antennas(), ac_rhat.antennas()])
}

/// Closed-form mean of `z_1`: `(N pi / 4) [Re x, Im x, -Re y, -Im y]`.
pub fn printed_z1_mean(n_res: usize, x: Complex64, y: Complex64) -> [f64; 4] {
    let s = n_res as f64 * PI / 4.0;
    [s * x.re, s * x.im, -s * y.re, -s * y.im]
}

/// Closed-form diagonal of the `z_1` covariance,
/// `N_a [(N_a - pi^2/16) N_E (x)^2 + N |y|^2 / 2]` and its three companions.
pub fn printed_z1_variances(
    n_res: usize,
    n_a: usize,
    n_e: usize,
    x: Complex64,
    y: Complex64,
) -> [f64; 4] {
    let na = n_a as f64;
    let k = (na - PI * PI / 16.0) * n_e as f64;
    let half_n = n_res as f64 / 2.0;
    [
        na * (k * x.re * x.re + half_n * y.norm_sqr()),
        na * (k * x.im * x.im + half_n * y.norm_sqr()),
        na * (k * y.re * y.re + half_n * x.norm_sqr()),
        na * (k * y.im * y.im + half_n * x.norm_sqr()),
    ]
}
