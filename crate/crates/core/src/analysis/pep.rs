//! Pairwise error probabilities and the ABER union bound.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use super::mgf::{PreparedQuadraticForm, QuadraticFormStats};
use super::moments::{pair_moments, z1_stats};
use super::quadrature::{pep_closed_bound, pep_quadrature_with, GaussLegendre, DEFAULT_NODES};
use crate::error::{invalid_config, Error, Result};
use crate::mapping::{indices_to_word, AcTable, SymbolMap};
use crate::modem::Constellation;
use crate::montecarlo::{noise_power, SystemConfig};

/// Exponent of the outside-antenna factor `[1 / (1 - t N (|x|^2 + |y|^2))]^e`
/// in the `r != r^` case.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrossExponent {
    /// `N_l / 2`, with `N_l` the number of antennas the two combinations share.
    Printed,
    /// `(D - 2) N_a`, half the degrees of freedom quoted in the text.
    DofText,
    /// One complex Gaussian per antenna outside both combinations.
    Outside,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MgfModel {
    /// `r != r^`: Gaussian `z_1` times the outside-antenna factor;
    /// `r = r^`: the two scalar factors of the same-combination case.
    CaseSplit(CrossExponent),
    /// One joint Gaussian over all `2 N_r` real components of the distance.
    PerAntenna,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PepMethod {
    Quadrature,
    ClosedBound,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AnalysisOptions {
    pub model: MgfModel,
    pub method: PepMethod,
    pub nodes: usize,
    pub keep_pep_table: bool,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        Self {
            model: MgfModel::CaseSplit(CrossExponent::Printed),
            method: PepMethod::Quadrature,
            nodes: DEFAULT_NODES,
            keep_pep_table: false,
        }
    }
}

/// `[1 / (1 - t N (|x|^2 + |y|^2))]^{N_l / 2}`.
pub fn mgf_z1_cross(t: f64, n_res: usize, x: Complex64, y: Complex64, n_l: usize) -> Result<f64> {
    mgf_z1_cross_exponent(t, n_res, x, y, n_l as f64 / 2.0)
}

pub fn mgf_z1_cross_exponent(
    t: f64,
    n_res: usize,
    x: Complex64,
    y: Complex64,
    exponent: f64,
) -> Result<f64> {
    let a = 1.0 - t * n_res as f64 * (x.norm_sqr() + y.norm_sqr());
    if !(a > 0.0) {
        return Err(Error::Domain(format!("cross-antenna MGF undefined at t = {t}")));
    }
    Ok(a.powf(-exponent))
}

/// Same-combination MGF: the aligned-antenna factor
/// `(1 - 2 s^2 t)^{-1/2} exp(t mu^2 / (1 - 2 s^2 t))` with
/// `mu = N_a N_E pi |d| / 4`, `s^2 = |d|^2 N_a N_E (32 - pi^2) / 16`, times
/// `(1 - 2 t N N_a |d|^2 / 2)^{-(N_r - N_a)}` for the other antennas.
pub fn mgf_z2(
    t: f64,
    n_res: usize,
    n_rx: usize,
    x: Complex64,
    y: Complex64,
    n_a: usize,
    n_e: usize,
) -> Result<f64> {
    Z2Factors::new(n_res, n_rx, x, y, n_a, n_e)?.mgf(t)
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Z2Factors {
    mean: f64,
    var: f64,
    tail_var: f64,
    tail_antennas: f64,
}

impl Z2Factors {
    fn new(n_res: usize, n_rx: usize, x: Complex64, y: Complex64, n_a: usize, n_e: usize) -> Result<Self> {
        if n_a == 0 || n_a > n_rx {
            return Err(invalid_config(format!("N_a = {n_a} outside [1, {n_rx}]")));
        }
        let d2 = (x - y).norm_sqr();
        let ne = (n_a * n_e) as f64;
        Ok(Self {
            mean: ne * PI * d2.sqrt() / 4.0,
            var: d2 * ne * (32.0 - PI * PI) / 16.0,
            tail_var: n_res as f64 * n_a as f64 * d2 / 2.0,
            tail_antennas: (n_rx - n_a) as f64,
        })
    }

    fn mgf(&self, t: f64) -> Result<f64> {
        let a = 1.0 - 2.0 * self.var * t;
        let b = 1.0 - 2.0 * self.tail_var * t;
        if !(a > 0.0 && b > 0.0) {
            return Err(Error::Domain(format!("same-combination MGF undefined at t = {t}")));
        }
        Ok(a.powf(-0.5) * (t * self.mean * self.mean / a).exp() * b.powf(-self.tail_antennas))
    }
}

/// Which branch of the analysis a pair falls into.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PepCase {
    /// Different antenna combinations.
    Z1,
    /// Same antenna combination, different symbols.
    Z2,
}

/// MGF of the squared distance of one ordered pair.
#[derive(Debug, Clone, PartialEq)]
pub enum PairMgf {
    Z1 {
        form: PreparedQuadraticForm,
        scale: f64,
        exponent: f64,
    },
    Z2(Z2Mgf),
    Joint(PreparedQuadraticForm),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Z2Mgf(Z2Factors);

impl PairMgf {
    pub fn eval(&self, t: f64) -> Result<f64> {
        match self {
            PairMgf::Z1 {
                form,
                scale,
                exponent,
            } => {
                let a = 1.0 - t * scale;
                if !(a > 0.0) {
                    return Err(Error::Domain(format!("cross-antenna MGF undefined at t = {t}")));
                }
                Ok(form.mgf(t)? * a.powf(-exponent))
            }
            PairMgf::Z2(z) => z.0.mgf(t),
            PairMgf::Joint(form) => form.mgf(t),
        }
    }
}

/// Builds the MGF of `{r, k} -> {r^, k^}` under `model`.
#[allow(clippy::too_many_arguments)]
pub fn pair_mgf(
    model: MgfModel,
    n_res: usize,
    table: &AcTable,
    constellation: &Constellation,
    es: f64,
    (r, k): (usize, usize),
    (r_hat, k_hat): (usize, usize),
) -> Result<PairMgf> {
    let n_rx = table.n_rx();
    let get = |i: usize| {
        table
            .get(i)
            .ok_or_else(|| invalid_config(format!("AC index {i} out of range")))
    };
    let (ac, ac_hat) = (get(r)?, get(r_hat)?);
    let x = constellation.point(k) * es;
    let y = constellation.point(k_hat) * es;
    match model {
        MgfModel::PerAntenna => {
            let m = pair_moments(n_res, n_rx, ac, ac_hat, x, y, 1.0)?;
            Ok(PairMgf::Joint(m.per_antenna_stats()?.prepare()))
        }
        MgfModel::CaseSplit(_) if r == r_hat => {
            let n_a = ac.size();
            Ok(PairMgf::Z2(Z2Mgf(Z2Factors::new(n_res, n_rx, x, y, n_a, n_res / n_a)?)))
        }
        MgfModel::CaseSplit(exp) => {
            let stats: QuadraticFormStats = z1_stats(n_res, n_rx, ac, ac_hat, x, y, 1.0)?;
            let union = ac.size() + ac_hat.size() - ac.overlap(ac_hat);
            let exponent = match exp {
                CrossExponent::Printed => ac.overlap(ac_hat) as f64 / 2.0,
                CrossExponent::DofText => (table.len().saturating_sub(2) * ac.size()) as f64,
                CrossExponent::Outside => (n_rx - union) as f64,
            };
            Ok(PairMgf::Z1 {
                form: stats.prepare(),
                scale: n_res as f64 * (x.norm_sqr() + y.norm_sqr()),
                exponent,
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PepEntry {
    pub r: usize,
    pub k: usize,
    pub r_hat: usize,
    pub k_hat: usize,
    pub case: PepCase,
    pub pep: f64,
    /// Hamming distance between the two bit words.
    pub weight: u32,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AberPoint {
    pub snr_db: f64,
    pub aber: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AberResult {
    pub points: Vec<AberPoint>,
    /// One table per SNR point when requested, otherwise empty.
    pub pep_tables: Vec<Vec<PepEntry>>,
}

#[derive(Debug, Clone)]
struct Pair {
    from: (usize, usize),
    to: (usize, usize),
    case: PepCase,
    weight: u32,
    mgf: PairMgf,
}

/// Every ordered pair's MGF, built once and evaluated at any noise level.
#[derive(Debug, Clone)]
pub struct UnionBound {
    pairs: Vec<Pair>,
    norm: f64,
    rule: GaussLegendre,
    method: PepMethod,
}

impl UnionBound {
    pub fn new(
        config: &SystemConfig,
        table: &AcTable,
        symbols: &SymbolMap,
        constellation: &Constellation,
        options: &AnalysisOptions,
    ) -> Result<Self> {
        config.validate()?;
        if symbols.order() != constellation.order() {
            return Err(invalid_config("symbol map and constellation orders differ"));
        }
        let hyps: Vec<(usize, usize)> = (0..table.len())
            .flat_map(|r| (0..constellation.order()).map(move |k| (r, k)))
            .collect();
        let mut pairs = Vec::with_capacity(hyps.len() * hyps.len());
        for &from in &hyps {
            let w = indices_to_word(from.0, from.1, table, symbols)?;
            for &to in &hyps {
                if to == from {
                    continue;
                }
                let w_hat = indices_to_word(to.0, to.1, table, symbols)?;
                pairs.push(Pair {
                    from,
                    to,
                    case: if from.0 == to.0 { PepCase::Z2 } else { PepCase::Z1 },
                    weight: (w ^ w_hat).count_ones(),
                    mgf: pair_mgf(
                        options.model,
                        config.n_res,
                        table,
                        constellation,
                        config.symbol_energy,
                        from,
                        to,
                    )?,
                });
            }
        }
        let md = hyps.len() as f64;
        Ok(Self {
            pairs,
            norm: 1.0 / (md * md.log2()),
            rule: GaussLegendre::new(options.nodes)?,
            method: options.method,
        })
    }

    pub fn pair_count(&self) -> usize {
        self.pairs.len()
    }

    fn pep(&self, mgf: &PairMgf, n0: f64) -> Result<f64> {
        match self.method {
            PepMethod::Quadrature => pep_quadrature_with(&self.rule, |t| mgf.eval(t), n0),
            PepMethod::ClosedBound => pep_closed_bound(|t| mgf.eval(t), n0),
        }
    }

    pub fn pep_table(&self, n0: f64) -> Result<Vec<PepEntry>> {
        self.pairs
            .iter()
            .map(|p| {
                Ok(PepEntry {
                    r: p.from.0,
                    k: p.from.1,
                    r_hat: p.to.0,
                    k_hat: p.to.1,
                    case: p.case,
                    pep: self.pep(&p.mgf, n0)?,
                    weight: p.weight,
                })
            })
            .collect()
    }

    /// Weighted sum over the table in pair order.
    pub fn aber_from_table(&self, table: &[PepEntry]) -> f64 {
        self.norm * table.iter().map(|e| e.pep * f64::from(e.weight)).sum::<f64>()
    }

    pub fn aber(&self, n0: f64) -> Result<f64> {
        Ok(self.aber_from_table(&self.pep_table(n0)?))
    }
}

/// Union bound over an SNR grid (`Eb/N0` in dB, `Eb = 1`).
pub fn union_bound_aber(
    config: &SystemConfig,
    table: &AcTable,
    symbols: &SymbolMap,
    constellation: &Constellation,
    snr_grid: &[f64],
    options: &AnalysisOptions,
) -> Result<AberResult> {
    let bound = UnionBound::new(config, table, symbols, constellation, options)?;
    let per_point: Vec<(AberPoint, Vec<PepEntry>)> = snr_grid
        .par_iter()
        .map(|&snr_db| {
            let peps = bound.pep_table(noise_power(snr_db))?;
            let aber = bound.aber_from_table(&peps);
            Ok((AberPoint { snr_db, aber }, peps))
        })
        .collect::<Result<_>>()?;
    let (points, tables): (Vec<_>, Vec<_>) = per_point.into_iter().unzip();
    Ok(AberResult {
        points,
        pep_tables: if options.keep_pep_table { tables } else { Vec::new() },
    })
}

/// Builds the configuration's tables and evaluates the union bound.
pub fn analyze(config: &SystemConfig, snr_grid: &[f64], options: &AnalysisOptions) -> Result<AberResult> {
    let sim = crate::montecarlo::Simulator::new(*config)?;
    union_bound_aber(
        config,
        sim.table(),
        sim.symbols(),
        sim.constellation(),
        snr_grid,
        options,
    )
}
