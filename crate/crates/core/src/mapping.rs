//! Antenna-combination (AC) enumeration, seeded random AC selection and the
//! bit-word <-> (AC index, symbol index) mapping.
//!
//! Indices are 0-based everywhere in the API. Receive antennas are printed
//! 1-based in the text form of an [`AcTable`], matching the usual
//! "1st, 2nd, ..." antenna labels.

use std::cmp::Ordering;
use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid_config, invalid_input, Error, Result};
use crate::modem::ModulationKind;

/// Largest receive-array size accepted by the enumerator. `2^n - 1` subsets are
/// materialised, so this keeps tables in the tens of thousands.
pub const MAX_RX_ANTENNAS: usize = 16;

/// A non-empty set of receive antennas targeted jointly by the RIS.
///
/// Stored sorted ascending. Ordering is canonical: by size, then
/// lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AntennaCombination {
    antennas: Vec<usize>,
}

impl AntennaCombination {
    pub fn new(mut antennas: Vec<usize>, n_rx: usize) -> Result<Self> {
        if antennas.is_empty() {
            return Err(invalid_input("antenna combination must not be empty"));
        }
        antennas.sort_unstable();
        if antennas.windows(2).any(|w| w[0] == w[1]) {
            return Err(invalid_input(format!(
                "duplicate antenna in combination {antennas:?}"
            )));
        }
        if let Some(&last) = antennas.last() {
            if last >= n_rx {
                return Err(invalid_input(format!(
                    "antenna index {} out of range for {n_rx} receive antennas",
                    last + 1
                )));
            }
        }
        Ok(Self { antennas })
    }

    pub fn antennas(&self) -> &[usize] {
        &self.antennas
    }

    /// `N_a`, the number of antennas in the combination.
    pub fn size(&self) -> usize {
        self.antennas.len()
    }

    pub fn contains(&self, antenna: usize) -> bool {
        self.antennas.binary_search(&antenna).is_ok()
    }

    /// Position of `antenna` inside the combination, if selected.
    pub fn position(&self, antenna: usize) -> Option<usize> {
        self.antennas.binary_search(&antenna).ok()
    }

    pub fn overlap(&self, other: &AntennaCombination) -> usize {
        self.antennas.iter().filter(|a| other.contains(**a)).count()
    }
}

impl Ord for AntennaCombination {
    fn cmp(&self, other: &Self) -> Ordering {
        self.antennas
            .len()
            .cmp(&other.antennas.len())
            .then_with(|| self.antennas.cmp(&other.antennas))
    }
}

impl PartialOrd for AntennaCombination {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for AntennaCombination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, a) in self.antennas.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{}", a + 1)?;
        }
        Ok(())
    }
}

/// All non-empty subsets of `{0..n_rx}` in canonical order.
pub fn enumerate_acs(n_rx: usize) -> Result<Vec<AntennaCombination>> {
    let mut out = Vec::new();
    for size in 1..=check_rx(n_rx)? {
        out.extend(combinations_of_size(n_rx, size));
    }
    Ok(out)
}

/// All subsets of exactly `size` antennas, lexicographic.
pub fn combinations_of_size(n_rx: usize, size: usize) -> Vec<AntennaCombination> {
    let mut out = Vec::new();
    if size == 0 || size > n_rx {
        return out;
    }
    let mut idx: Vec<usize> = (0..size).collect();
    loop {
        out.push(AntennaCombination {
            antennas: idx.clone(),
        });
        // advance to the next combination
        let mut i = size;
        while i > 0 && idx[i - 1] == n_rx - size + i - 1 {
            i -= 1;
        }
        if i == 0 {
            break;
        }
        idx[i - 1] += 1;
        for j in i..size {
            idx[j] = idx[j - 1] + 1;
        }
    }
    out
}

fn check_rx(n_rx: usize) -> Result<usize> {
    if n_rx == 0 {
        return Err(invalid_config("receive antenna count must be at least 1"));
    }
    if n_rx > MAX_RX_ANTENNAS {
        return Err(invalid_config(format!(
            "receive antenna count {n_rx} exceeds the supported maximum of {MAX_RX_ANTENNAS}"
        )));
    }
    Ok(n_rx)
}

/// `floor(log2(n))` for `n >= 1`.
pub fn floor_log2(n: u64) -> u32 {
    debug_assert!(n >= 1);
    63 - n.leading_zeros()
}

/// The D combinations agreed between transmitter and receiver, in bit-word
/// order: entry `r` is signalled by the `b1`-bit natural binary word `r`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AcTable {
    entries: Vec<AntennaCombination>,
    n_rx: usize,
    index_bits: u32,
    seed: Option<u64>,
}

impl AcTable {
    /// Builds a table from explicit entries kept in the given order.
    pub fn from_entries(n_rx: usize, entries: Vec<AntennaCombination>) -> Result<Self> {
        check_rx(n_rx)?;
        let d = entries.len();
        if d == 0 || !d.is_power_of_two() {
            return Err(invalid_config(format!(
                "an AC table needs a power-of-two number of entries, got {d}"
            )));
        }
        for (i, e) in entries.iter().enumerate() {
            if e.antennas.last().is_some_and(|&a| a >= n_rx) {
                return Err(invalid_input(format!(
                    "entry {} ({e}) exceeds {n_rx} receive antennas",
                    i + 1
                )));
            }
            if entries[..i].contains(e) {
                return Err(invalid_input(format!("duplicate AC entry ({e})")));
            }
        }
        Ok(Self {
            n_rx,
            index_bits: d.trailing_zeros(),
            entries,
            seed: None,
        })
    }

    /// Parses the text form: one AC per line, comma-separated 1-based antenna
    /// indices. Blank lines and `#` comments are skipped.
    pub fn from_text(n_rx: usize, text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let parse_err = |message: String| Error::Parse {
                line: lineno + 1,
                message,
            };
            let antennas = line
                .split(',')
                .map(|tok| {
                    let v: usize = tok
                        .trim()
                        .parse()
                        .map_err(|_| parse_err(format!("bad antenna index {:?}", tok.trim())))?;
                    if v == 0 {
                        return Err(parse_err("antenna indices are 1-based".into()));
                    }
                    Ok(v - 1)
                })
                .collect::<Result<Vec<_>>>()?;
            entries.push(
                AntennaCombination::new(antennas, n_rx)
                    .map_err(|e| parse_err(e.to_string()))?,
            );
        }
        Self::from_entries(n_rx, entries)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for e in &self.entries {
            s.push_str(&e.to_string());
            s.push('\n');
        }
        s
    }

    pub fn entries(&self) -> &[AntennaCombination] {
        &self.entries
    }

    pub fn get(&self, r: usize) -> Option<&AntennaCombination> {
        self.entries.get(r)
    }

    /// `D`.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn n_rx(&self) -> usize {
        self.n_rx
    }

    /// `b1 = log2 D`.
    pub fn index_bits(&self) -> u32 {
        self.index_bits
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }
}

/// Draws `d` of the `candidates` uniformly without replacement using a
/// ChaCha8 stream seeded by `seed`, then restores canonical order.
pub(crate) fn random_selection(
    n_rx: usize,
    candidates: Vec<AntennaCombination>,
    d: usize,
    seed: u64,
) -> Result<AcTable> {
    if d > candidates.len() {
        return Err(invalid_config(format!(
            "cannot select {d} combinations out of {}",
            candidates.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked = rand::seq::index::sample(&mut rng, candidates.len(), d).into_vec();
    picked.sort_unstable();
    let mut entries: Vec<AntennaCombination> =
        picked.into_iter().map(|i| candidates[i].clone()).collect();
    entries.sort();
    let mut table = AcTable::from_entries(n_rx, entries)?;
    table.seed = Some(seed);
    Ok(table)
}

/// Random AC selection: keeps `D = 2^floor(log2(2^n_rx - 1))` of the
/// `2^n_rx - 1` combinations.
pub fn select_acs(n_rx: usize, seed: u64) -> Result<AcTable> {
    let all = enumerate_acs(n_rx)?;
    let j = all.len() as u64;
    let d = 1usize << floor_log2(j);
    random_selection(n_rx, all, d, seed)
}

/// Labels constellation points with `b2`-bit words.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SymbolMap {
    kind: ModulationKind,
    order: usize,
    gray: bool,
}

impl SymbolMap {
    /// `order = 1` is the degenerate single-pilot map that carries no bits.
    pub fn new(kind: ModulationKind, order: usize, gray: bool) -> Result<Self> {
        if order == 0 || !order.is_power_of_two() {
            return Err(invalid_config("modulation order must be a power of 2"));
        }
        Ok(Self { kind, order, gray })
    }

    pub fn natural(kind: ModulationKind, order: usize) -> Result<Self> {
        Self::new(kind, order, false)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// `b2 = log2 M`.
    pub fn symbol_bits(&self) -> u32 {
        self.order.trailing_zeros()
    }

    pub fn is_gray(&self) -> bool {
        self.gray
    }

    /// Constellation index carrying the `b2`-bit word.
    pub fn index_of(&self, word: u32) -> usize {
        debug_assert!((word as usize) < self.order);
        if !self.gray {
            return word as usize;
        }
        match self.kind {
            ModulationKind::Psk => gray_decode(word) as usize,
            ModulationKind::Qam => {
                let (ibits, _) = qam_axis_bits(self.order);
                let i = gray_decode(word & ((1 << ibits) - 1));
                let q = gray_decode(word >> ibits);
                ((q << ibits) | i) as usize
            }
        }
    }

    /// Word carried by constellation index `k`.
    pub fn word_of(&self, k: usize) -> u32 {
        debug_assert!(k < self.order);
        let k = k as u32;
        if !self.gray {
            return k;
        }
        match self.kind {
            ModulationKind::Psk => gray_encode(k),
            ModulationKind::Qam => {
                let (ibits, _) = qam_axis_bits(self.order);
                let i = gray_encode(k & ((1 << ibits) - 1));
                let q = gray_encode(k >> ibits);
                (q << ibits) | i
            }
        }
    }
}

/// In-phase / quadrature bit split of a (square or rectangular) QAM order.
pub(crate) fn qam_axis_bits(order: usize) -> (u32, u32) {
    let m = order.trailing_zeros();
    (m.div_ceil(2), m / 2)
}

fn gray_encode(x: u32) -> u32 {
    x ^ (x >> 1)
}

fn gray_decode(mut g: u32) -> u32 {
    let mut x = g;
    while g > 1 {
        g >>= 1;
        x ^= g;
    }
    x
}

/// Total bits per channel use carried by `table` and `symbols`.
pub fn word_bits(table: &AcTable, symbols: &SymbolMap) -> u32 {
    table.index_bits() + symbols.symbol_bits()
}

/// Splits an integer bit word (first bit = most significant) into
/// `(r, k)`.
pub fn word_to_indices(word: u32, table: &AcTable, symbols: &SymbolMap) -> Result<(usize, usize)> {
    let b = word_bits(table, symbols);
    if b < 32 && word >> b != 0 {
        return Err(invalid_input(format!("word {word:#b} is wider than {b} bits")));
    }
    let b2 = symbols.symbol_bits();
    let r = (word >> b2) as usize;
    let k = symbols.index_of(word & ((1u32 << b2) - 1));
    Ok((r, k))
}

pub fn indices_to_word(r: usize, k: usize, table: &AcTable, symbols: &SymbolMap) -> Result<u32> {
    if r >= table.len() {
        return Err(invalid_input(format!(
            "AC index {r} out of range for D = {}",
            table.len()
        )));
    }
    if k >= symbols.order() {
        return Err(invalid_input(format!(
            "symbol index {k} out of range for M = {}",
            symbols.order()
        )));
    }
    Ok(((r as u32) << symbols.symbol_bits()) | symbols.word_of(k))
}

/// Bit-sequence form of [`word_to_indices`]. `bits` holds 0/1 values, first
/// the `b1` AC-index bits, then the `b2` symbol bits.
pub fn bits_to_indices(bits: &[u8], table: &AcTable, symbols: &SymbolMap) -> Result<(usize, usize)> {
    let b = word_bits(table, symbols) as usize;
    if bits.len() != b {
        return Err(invalid_input(format!(
            "expected a {b}-bit word, got {} bits",
            bits.len()
        )));
    }
    let mut word = 0u32;
    for &bit in bits {
        if bit > 1 {
            return Err(invalid_input(format!("bit value {bit} is not 0 or 1")));
        }
        word = (word << 1) | bit as u32;
    }
    word_to_indices(word, table, symbols)
}

pub fn indices_to_bits(r: usize, k: usize, table: &AcTable, symbols: &SymbolMap) -> Result<Vec<u8>> {
    let word = indices_to_word(r, k, table, symbols)?;
    let b = word_bits(table, symbols);
    Ok((0..b).rev().map(|i| ((word >> i) & 1) as u8).collect())
}
