//! Gauss-Legendre rules and the two PEP integrals built on them.

use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::OnceLock;

use crate::error::{invalid_config, Error, Result};

/// Node count used when none is given.
pub const DEFAULT_NODES: usize = 64;

/// An `n`-point Gauss-Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Nodes are the roots of `P_n`, refined by Newton's method from the
    /// Tricomi initial guesses.
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(invalid_config("quadrature needs at least one node"));
        }
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Ok(Self { nodes, weights })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Abscissae and weights mapped onto `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(x, w)| (mid + half * x, half * w))
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        self.mapped(a, b).map(|(x, w)| w * f(x)).sum()
    }
}

// (P_n(x), P_n'(x)) by the three-term recurrence
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let nf = n as f64;
    (p1, nf * (x * p1 - p0) / (x * x - 1.0))
}

/// The shared 64-node rule.
pub fn default_rule() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(DEFAULT_NODES).expect("non-zero node count"))
}

fn check_n0(n0: f64) -> Result<()> {
    if n0 > 0.0 && n0.is_finite() {
        Ok(())
    } else {
        Err(invalid_config(format!("noise power must be positive, got {n0}")))
    }
}

/// `(1/pi) int_0^{pi/2} M(-1 / (4 sin^2(tau) N0)) dtau`, clamped to
/// `[0, 1/2]`.
pub fn pep_quadrature_with<F>(rule: &GaussLegendre, mgf: F, n0: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    check_n0(n0)?;
    let mut acc = 0.0;
    for (tau, w) in rule.mapped(0.0, FRAC_PI_2) {
        let s = tau.sin();
        let value = mgf(-1.0 / (4.0 * s * s * n0))?;
        if !value.is_finite() {
            return Err(Error::NonFinite { tau, value });
        }
        acc += w * value;
    }
    Ok((acc / PI).clamp(0.0, 0.5))
}

/// [`pep_quadrature_with`] on the default 64-node rule.
pub fn pep_quadrature<F>(mgf: F, n0: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    pep_quadrature_with(default_rule(), mgf, n0)
}

/// Three-term exponential Q-function bound:
/// `M(-1/N0)/6 + M(-1/(2 N0))/12 + M(-1/(4 N0))/4`.
pub fn pep_closed_bound<F>(mgf: F, n0: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    check_n0(n0)?;
    Ok(mgf(-1.0 / n0)? / 6.0 + mgf(-0.5 / n0)? / 12.0 + mgf(-0.25 / n0)? / 4.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    // adaptive Simpson, used as an independent reference
    fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, eps: f64) -> f64 {
        #[allow(clippy::too_many_arguments)]
        fn step<F: Fn(f64) -> f64>(
            f: &F,
            a: f64,
            b: f64,
            fa: f64,
            fm: f64,
            fb: f64,
            whole: f64,
            eps: f64,
            depth: u32,
        ) -> f64 {
            let m = 0.5 * (a + b);
            let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
            let (flm, frm) = (f(lm), f(rm));
            let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
            let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
            let delta = left + right - whole;
            if depth == 0 || delta.abs() <= 15.0 * eps {
                return left + right + delta / 15.0;
            }
            step(f, a, m, fa, flm, fm, left, eps / 2.0, depth - 1)
                + step(f, m, b, fm, frm, fb, right, eps / 2.0, depth - 1)
        }
        let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
        let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
        step(f, a, b, fa, fm, fb, whole, eps, 50)
    }

    #[test]
    fn rule_integrates_polynomials_exactly() {
        let rule = GaussLegendre::new(5).unwrap();
        // exact up to degree 9
        let v = rule.integrate(0.0, 2.0, |x| x.powi(9) + 3.0 * x * x);
        assert!((v - (512.0 / 10.0 * 2.0 + 8.0)).abs() < 1e-10);
        let w: f64 = rule.weights().iter().sum();
        assert!((w - 2.0).abs() < 1e-14);
        for n in [1, 2, 7, 64, 128] {
            let r = GaussLegendre::new(n).unwrap();
            assert!((r.weights().iter().sum::<f64>() - 2.0).abs() < 1e-12, "n={n}");
            assert!(r.nodes().windows(2).all(|p| p[0] < p[1]));
        }
        assert!(GaussLegendre::new(0).is_err());
    }

    #[test]
    fn degenerate_mgf_gives_one_half() {
        assert!((pep_quadrature(|_| Ok(1.0), 1.0).unwrap() - 0.5).abs() < 1e-14);
        assert!((pep_closed_bound(|_| Ok(1.0), 1.0).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn chi_square_one_matches_adaptive_reference() {
        let mgf = |t: f64| Ok((1.0 - 2.0 * t).powf(-0.5));
        let got = pep_quadrature(mgf, 1.0).unwrap();
        let f = |tau: f64| {
            let s = tau.sin();
            if s == 0.0 {
                0.0
            } else {
                (1.0 + 1.0 / (2.0 * s * s)).powf(-0.5)
            }
        };
        let want = simpson(&f, 0.0, FRAC_PI_2, 1e-13) / PI;
        assert!((got - want).abs() < 1e-8, "{got} vs {want}");
    }

    #[test]
    fn closed_bound_dominates_and_is_monotone() {
        let mgf = |t: f64| Ok((1.0 - 2.0 * t).powf(-1.5) * (t * 4.0 / (1.0 - 2.0 * t)).exp());
        let mut last = f64::INFINITY;
        for snr in -10..=20 {
            let n0 = 10f64.powf(-snr as f64 / 10.0);
            let q = pep_quadrature(mgf, n0).unwrap();
            let b = pep_closed_bound(mgf, n0).unwrap();
            assert!(b >= q, "snr {snr}: {b} < {q}");
            assert!(b <= last);
            last = b;
        }
    }

    #[test]
    fn non_finite_values_report_tau() {
        let err = pep_quadrature(|_| Ok(f64::NAN), 1.0).unwrap_err();
        assert!(matches!(err, Error::NonFinite { tau, .. } if tau > 0.0 && tau < FRAC_PI_2));
        assert!(pep_quadrature(|_| Ok(1.0), 0.0).is_err());
    }
}
