//! Seeded, parallel Monte Carlo BER sweeps.
//!
//! Trial `t` at a given SNR draws everything from its own ChaCha8 stream,
//! keyed by `(master_seed, snr_db)` and selected with `set_stream(t)`. Error
//! counts are integers, so the totals are identical for any schedule.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::baselines::{make_scheme_table, Scheme, SchemeSpec};
use crate::channel::{fill_noise, ChannelRealization};
use crate::error::{invalid_config, Result};
use crate::mapping::{indices_to_word, word_bits, word_to_indices, AcTable, SymbolMap};
use crate::modem::{ml_detect_bank, Constellation, ModulationKind};
use crate::ris::{GainBank, TableLayout};

/// Environment variable overriding the worker-thread count.
pub const THREADS_ENV: &str = "RASM_THREADS";

/// Trials handed to a worker at a time.
const BLOCK: u64 = 4096;

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959963984540054;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemConfig {
    /// Reflecting elements `N`.
    pub n_res: usize,
    /// Receive antennas visible to the scheme.
    pub n_rx: usize,
    pub modulation: ModulationKind,
    pub order: usize,
    pub scheme: Scheme,
    /// Seeds the per-trial streams.
    pub master_seed: u64,
    /// Seeds the random AC selection shared by both link ends.
    pub table_seed: u64,
    pub symbol_energy: f64,
}

impl SystemConfig {
    /// RASM with PSK, unit symbol energy and both seeds zero.
    pub fn rasm(n_res: usize, n_rx: usize, order: usize) -> Self {
        Self {
            n_res,
            n_rx,
            modulation: ModulationKind::Psk,
            order,
            scheme: Scheme::Rasm,
            master_seed: 0,
            table_seed: 0,
            symbol_energy: 1.0,
        }
    }

    pub fn with_scheme(mut self, scheme: Scheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn with_seeds(mut self, master_seed: u64, table_seed: u64) -> Self {
        self.master_seed = master_seed;
        self.table_seed = table_seed;
        self
    }

    pub fn scheme_spec(&self) -> SchemeSpec {
        SchemeSpec::new(self.scheme, self.n_rx, self.modulation, self.order)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_res == 0 {
            return Err(invalid_config("reflecting element count must be at least 1"));
        }
        if !(self.symbol_energy > 0.0 && self.symbol_energy.is_finite()) {
            return Err(invalid_config("symbol energy must be positive"));
        }
        let spec = self.scheme_spec();
        spec.validate()?;
        let largest = match self.scheme {
            Scheme::Rasm => self.n_rx,
            Scheme::Rsm => 1,
            Scheme::Rgsm { n_s } | Scheme::Rgssk { n_s } => n_s,
        };
        if self.n_res < largest {
            return Err(invalid_config(format!(
                "{} reflecting elements cannot serve {largest} antennas",
                self.n_res
            )));
        }
        Ok(())
    }
}

/// Bits per channel use of a configuration.
pub fn bpcu(config: &SystemConfig) -> Result<u32> {
    config.validate()?;
    config.scheme_spec().bpcu()
}

/// `N0` for a given `Eb/N0` in dB with `Eb = 1`.
pub fn noise_power(snr_db: f64) -> f64 {
    10f64.powf(-snr_db / 10.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BerPoint {
    pub snr_db: f64,
    pub trials: u64,
    pub bit_errors: u64,
    pub ber: f64,
    /// Wilson 95% half-width.
    pub ci95: f64,
}

impl BerPoint {
    pub fn new(snr_db: f64, trials: u64, bit_errors: u64, bits_per_trial: u32) -> Self {
        let n = (trials * u64::from(bits_per_trial)) as f64;
        let ber = bit_errors as f64 / n;
        Self {
            snr_db,
            trials,
            bit_errors,
            ber,
            ci95: wilson_half_width(ber, n),
        }
    }

    /// Binomial standard error `sqrt(p (1 - p) / n)` over all transmitted bits.
    pub fn standard_error(&self, bits_per_trial: u32) -> f64 {
        let n = (self.trials * u64::from(bits_per_trial)) as f64;
        (self.ber * (1.0 - self.ber) / n).sqrt()
    }
}

/// Half-width of the Wilson score interval.
pub fn wilson_half_width(p: f64, n: f64) -> f64 {
    let z2 = Z95 * Z95;
    Z95 / (1.0 + z2 / n) * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct BerCurve {
    pub bpcu: u32,
    pub points: Vec<BerPoint>,
}

/// Precomputed tables for one configuration.
#[derive(Debug, Clone)]
pub struct Simulator {
    config: SystemConfig,
    table: AcTable,
    symbols: SymbolMap,
    constellation: Constellation,
    layout: TableLayout,
    bits: u32,
}

/// Per-worker buffers reused across trials.
struct Scratch {
    ch: ChannelRealization,
    bank: GainBank,
    y: Vec<Complex64>,
}

impl Simulator {
    pub fn new(config: SystemConfig) -> Result<Self> {
        config.validate()?;
        let (table, symbols) = make_scheme_table(&config.scheme_spec(), config.table_seed)?;
        let constellation = config.scheme_spec().constellation()?;
        let layout = TableLayout::new(&table, config.n_res)?;
        let bits = word_bits(&table, &symbols);
        Ok(Self {
            config,
            table,
            symbols,
            constellation,
            layout,
            bits,
        })
    }

    pub fn config(&self) -> &SystemConfig {
        &self.config
    }

    pub fn table(&self) -> &AcTable {
        &self.table
    }

    pub fn symbols(&self) -> &SymbolMap {
        &self.symbols
    }

    pub fn constellation(&self) -> &Constellation {
        &self.constellation
    }

    pub fn bpcu(&self) -> u32 {
        self.bits
    }

    fn scratch(&self) -> Scratch {
        Scratch {
            ch: ChannelRealization::zeros(self.config.n_res, self.config.n_rx)
                .expect("validated dimensions"),
            bank: GainBank::new(&self.layout),
            y: vec![Complex64::new(0.0, 0.0); self.config.n_rx],
        }
    }

    /// The RNG stream of one trial.
    pub fn trial_rng(&self, snr_db: f64, trial_index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(mix(self.config.master_seed, snr_db.to_bits()));
        rng.set_stream(trial_index);
        rng
    }

    /// Bit errors of a single channel use.
    pub fn run_trial(&self, snr_db: f64, trial_index: u64) -> u32 {
        self.trial_with(&mut self.scratch(), snr_db, trial_index)
    }

    fn trial_with(&self, s: &mut Scratch, snr_db: f64, trial_index: u64) -> u32 {
        let mut rng = self.trial_rng(snr_db, trial_index);
        let word: u32 = rng.random_range(0..1u32 << self.bits);
        let (r, k) =
            word_to_indices(word, &self.table, &self.symbols).expect("word within b bits");
        s.ch.redraw(&mut rng);
        s.bank.update(&s.ch, &self.layout, self.config.symbol_energy);
        fill_noise(&mut s.y, noise_power(snr_db), &mut rng).expect("non-negative noise power");
        let x = self.constellation.point(k);
        for (y, g) in s.y.iter_mut().zip(s.bank.gain(r)) {
            *y += g * x;
        }
        let (r_hat, k_hat, _) = ml_detect_bank(&s.y, &s.bank, &self.constellation);
        let detected = indices_to_word(r_hat, k_hat, &self.table, &self.symbols)
            .expect("detector returns table indices");
        (word ^ detected).count_ones()
    }

    /// Sums bit errors over `trials` trials at one SNR on the current pool.
    pub fn count_errors(&self, snr_db: f64, trials: u64) -> u64 {
        let blocks = trials.div_ceil(BLOCK);
        (0..blocks)
            .into_par_iter()
            .map_init(
                || self.scratch(),
                |s, b| {
                    let end = ((b + 1) * BLOCK).min(trials);
                    (b * BLOCK..end)
                        .map(|t| u64::from(self.trial_with(s, snr_db, t)))
                        .sum::<u64>()
                },
            )
            .sum()
    }

    pub fn run_ber(&self, snr_grid: &[f64], trials: u64) -> Result<BerCurve> {
        if trials == 0 {
            return Err(invalid_config("trials per point must be at least 1"));
        }
        let points = snr_grid
            .iter()
            .map(|&snr| BerPoint::new(snr, trials, self.count_errors(snr, trials), self.bits))
            .collect();
        Ok(BerCurve {
            bpcu: self.bits,
            points,
        })
    }
}

/// Bit errors of trial `trial_index`; see [`Simulator::run_trial`].
pub fn run_trial(config: &SystemConfig, snr_db: f64, trial_index: u64) -> Result<u32> {
    Ok(Simulator::new(*config)?.run_trial(snr_db, trial_index))
}

/// BER sweep using the thread count from [`THREADS_ENV`] when set, otherwise
/// the global rayon pool.
pub fn run_ber(config: &SystemConfig, snr_grid: &[f64], trials: u64) -> Result<BerCurve> {
    match threads_from_env()? {
        Some(n) => run_ber_with_threads(config, snr_grid, trials, n),
        None => Simulator::new(*config)?.run_ber(snr_grid, trials),
    }
}

pub fn run_ber_with_threads(
    config: &SystemConfig,
    snr_grid: &[f64],
    trials: u64,
    threads: usize,
) -> Result<BerCurve> {
    let sim = Simulator::new(*config)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| invalid_config(format!("cannot build thread pool: {e}")))?;
    pool.install(|| sim.run_ber(snr_grid, trials))
}

pub fn threads_from_env() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .map(Some)
            .ok_or_else(|| invalid_config(format!("{THREADS_ENV} must be a positive integer, got {v:?}"))),
        Err(_) => Ok(None),
    }
}

// splitmix64 finalizer over the combined key
fn mix(seed: u64, salt: u64) -> u64 {
    let mut z = seed ^ salt.rotate_left(32) ^ 0x9e37_79b9_7f4a_7c15;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
