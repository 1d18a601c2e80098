//! Constellations, received-signal synthesis and joint ML detection of the
//! (AC, symbol) pair.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;

use crate::channel::{fill_noise, ChannelRealization};
use crate::error::{invalid_config, invalid_input, Error, Result};
use crate::mapping::{qam_axis_bits, AcTable};
use crate::ris::{effective_gain, GainBank, RisPhaseProfile, TableLayout};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModulationKind {
    Psk,
    Qam,
}

impl FromStr for ModulationKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "psk" => Ok(Self::Psk),
            "qam" => Ok(Self::Qam),
            other => Err(invalid_config(format!("unknown modulation {other:?}"))),
        }
    }
}

impl fmt::Display for ModulationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Psk => "PSK",
            Self::Qam => "QAM",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    kind: ModulationKind,
    points: Vec<Complex64>,
}

impl Constellation {
    /// Single unit pilot, used by schemes that carry no symbol bits.
    pub fn pilot() -> Self {
        Self {
            kind: ModulationKind::Psk,
            points: vec![Complex64::new(1.0, 0.0)],
        }
    }

    pub fn kind(&self) -> ModulationKind {
        self.kind
    }

    pub fn order(&self) -> usize {
        self.points.len()
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn point(&self, k: usize) -> Complex64 {
        self.points[k]
    }

    pub fn average_energy(&self) -> f64 {
        self.points.iter().map(|p| p.norm_sqr()).sum::<f64>() / self.points.len() as f64
    }
}

/// Unit-energy PSK (`x_k = e^{j 2 pi k / M}`) or square/rectangular QAM.
///
/// QAM index `k` splits as `k = q * 2^{ibits} + i` over the in-phase and
/// quadrature level grids.
pub fn make_constellation(kind: ModulationKind, order: usize) -> Result<Constellation> {
    if order < 2 || !order.is_power_of_two() {
        return Err(invalid_config("modulation order must be a power of 2"));
    }
    let points = match kind {
        ModulationKind::Psk => (0..order)
            .map(|k| Complex64::from_polar(1.0, 2.0 * PI * k as f64 / order as f64))
            .collect(),
        ModulationKind::Qam => {
            let (ibits, qbits) = qam_axis_bits(order);
            let (ni, nq) = (1usize << ibits, 1usize << qbits);
            let level = |j: usize, n: usize| 2.0 * j as f64 - (n as f64 - 1.0);
            let raw: Vec<Complex64> = (0..order)
                .map(|k| Complex64::new(level(k % ni, ni), level(k / ni, nq)))
                .collect();
            let energy = raw.iter().map(|p| p.norm_sqr()).sum::<f64>() / order as f64;
            raw.into_iter().map(|p| p / energy.sqrt()).collect()
        }
    };
    Ok(Constellation { kind, points })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReceivedSignal {
    pub y: Vec<Complex64>,
    pub true_r: usize,
    pub true_k: usize,
    pub n0: f64,
}

/// `y = G_r x_k + n` with `n ~ CN(0, n0 I)`.
#[allow(clippy::too_many_arguments)]
pub fn transmit<R: Rng + ?Sized>(
    ch: &ChannelRealization,
    profile: &RisPhaseProfile,
    r: usize,
    k: usize,
    constellation: &Constellation,
    es: f64,
    n0: f64,
    rng: &mut R,
) -> Result<ReceivedSignal> {
    if k >= constellation.order() {
        return Err(invalid_input(format!(
            "symbol index {k} out of range for M = {}",
            constellation.order()
        )));
    }
    let gain = effective_gain(ch, profile, es)?;
    let mut y = vec![Complex64::new(0.0, 0.0); ch.n_rx()];
    fill_noise(&mut y, n0, rng)?;
    let x = constellation.point(k);
    for (yn, g) in y.iter_mut().zip(gain.values()) {
        *yn += g * x;
    }
    Ok(ReceivedSignal {
        y,
        true_r: r,
        true_k: k,
        n0,
    })
}

/// Joint ML decision over every `(r, k)`, using precomputed candidate gains.
///
/// Returns `(r, k, metric)`. Ties keep the lexicographically smallest pair.
pub fn ml_detect_bank(
    y: &[Complex64],
    bank: &GainBank,
    constellation: &Constellation,
) -> (usize, usize, f64) {
    let mut best = (0, 0, f64::INFINITY);
    for r in 0..bank.len() {
        let g = bank.gain(r);
        for (k, x) in constellation.points().iter().enumerate() {
            let metric: f64 = y
                .iter()
                .zip(g)
                .map(|(yn, gn)| (yn - gn * x).norm_sqr())
                .sum();
            if metric < best.2 {
                best = (r, k, metric);
            }
        }
    }
    best
}

/// Detector with perfect CSI: rebuilds all D candidate gains from `ch`.
pub fn ml_detect(
    signal: &ReceivedSignal,
    table: &AcTable,
    ch: &ChannelRealization,
    constellation: &Constellation,
    es: f64,
) -> Result<(usize, usize)> {
    if signal.y.len() != ch.n_rx() {
        return Err(invalid_input(format!(
            "received vector has {} entries for {} antennas",
            signal.y.len(),
            ch.n_rx()
        )));
    }
    let layout = TableLayout::new(table, ch.n_res())?;
    let mut bank = GainBank::new(&layout);
    bank.update(ch, &layout, es);
    let (r, k, _) = ml_detect_bank(&signal.y, &bank, constellation);
    Ok((r, k))
}
