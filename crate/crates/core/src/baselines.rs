//! RSM, RGSM and RGSSK expressed as table/symbol-map variants of the same
//! RIS-assisted receive chain.

use std::fmt;
use std::str::FromStr;

use crate::error::{invalid_config, Error, Result};
use crate::mapping::{
    combinations_of_size, floor_log2, random_selection, select_acs, AcTable, AntennaCombination,
    SymbolMap,
};
use crate::modem::{make_constellation, Constellation, ModulationKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    /// Adaptive: any non-empty antenna subset may be targeted.
    Rasm,
    /// One antenna per channel use.
    Rsm,
    /// Fixed-size subsets of `n_s` antennas, plus a constellation symbol.
    Rgsm { n_s: usize },
    /// Fixed-size subsets carrying index bits only.
    Rgssk { n_s: usize },
}

impl Scheme {
    pub fn name(&self) -> &'static str {
        match self {
            Scheme::Rasm => "RASM",
            Scheme::Rsm => "RSM",
            Scheme::Rgsm { .. } => "RGSM",
            Scheme::Rgssk { .. } => "RGSSK",
        }
    }

    pub fn n_s(&self) -> Option<usize> {
        match self {
            Scheme::Rgsm { n_s } | Scheme::Rgssk { n_s } => Some(*n_s),
            _ => None,
        }
    }

    /// Parses a scheme name, attaching `n_s` where the scheme needs it.
    pub fn parse(name: &str, n_s: Option<usize>) -> Result<Self> {
        let need = |scheme: &str| {
            n_s.ok_or_else(|| invalid_config(format!("{scheme} requires n_s")))
        };
        match name.to_ascii_uppercase().as_str() {
            "RASM" => Ok(Scheme::Rasm),
            "RSM" => Ok(Scheme::Rsm),
            "RGSM" => Ok(Scheme::Rgsm { n_s: need("RGSM")? }),
            "RGSSK" => Ok(Scheme::Rgssk { n_s: need("RGSSK")? }),
            other => Err(invalid_config(format!("unknown scheme {other:?}"))),
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scheme::Rgsm { n_s } | Scheme::Rgssk { n_s } => write!(f, "{}(Ns={n_s})", self.name()),
            _ => f.write_str(self.name()),
        }
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scheme::parse(s, None)
    }
}

/// A scheme together with its antenna count and modulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SchemeSpec {
    pub scheme: Scheme,
    pub n_rx: usize,
    pub modulation: ModulationKind,
    /// Ignored for RGSSK, which always carries a single pilot.
    pub order: usize,
}

impl SchemeSpec {
    pub fn new(scheme: Scheme, n_rx: usize, modulation: ModulationKind, order: usize) -> Self {
        Self {
            scheme,
            n_rx,
            modulation,
            order,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_rx == 0 {
            return Err(invalid_config("receive antenna count must be at least 1"));
        }
        match self.scheme {
            Scheme::Rsm if !self.n_rx.is_power_of_two() => {
                return Err(invalid_config(format!(
                    "RSM needs a power-of-2 antenna count, got {}",
                    self.n_rx
                )))
            }
            Scheme::Rgsm { n_s } | Scheme::Rgssk { n_s } if n_s == 0 || n_s > self.n_rx => {
                return Err(invalid_config(format!(
                    "n_s = {n_s} must lie in [1, {}]",
                    self.n_rx
                )))
            }
            _ => {}
        }
        if !matches!(self.scheme, Scheme::Rgssk { .. })
            && (self.order < 2 || !self.order.is_power_of_two())
        {
            return Err(invalid_config("modulation order must be a power of 2"));
        }
        Ok(())
    }

    /// `M` as actually used on air: 1 for RGSSK.
    pub fn effective_order(&self) -> usize {
        match self.scheme {
            Scheme::Rgssk { .. } => 1,
            _ => self.order,
        }
    }

    pub fn constellation(&self) -> Result<Constellation> {
        self.validate()?;
        match self.scheme {
            Scheme::Rgssk { .. } => Ok(Constellation::pilot()),
            _ => make_constellation(self.modulation, self.order),
        }
    }

    /// Index bits `b1`, derived without building the table.
    pub fn index_bits(&self) -> Result<u32> {
        self.validate()?;
        Ok(match self.scheme {
            Scheme::Rasm => floor_log2((1u64 << self.n_rx) - 1),
            Scheme::Rsm => self.n_rx.trailing_zeros(),
            Scheme::Rgsm { n_s } | Scheme::Rgssk { n_s } => floor_log2(binomial(self.n_rx, n_s)),
        })
    }

    pub fn bpcu(&self) -> Result<u32> {
        Ok(self.index_bits()? + self.effective_order().trailing_zeros())
    }
}

/// `C(n, k)` without overflow for the antenna counts in use.
pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u64 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u64 / (i + 1) as u64;
    }
    acc
}

/// Builds the AC table and symbol map of a scheme. Random selections use
/// the same seeded procedure as RASM.
pub fn make_scheme_table(spec: &SchemeSpec, seed: u64) -> Result<(AcTable, SymbolMap)> {
    spec.validate()?;
    let symbols = SymbolMap::natural(spec.modulation, spec.effective_order())?;
    let table = match spec.scheme {
        Scheme::Rasm => select_acs(spec.n_rx, seed)?,
        Scheme::Rsm => AcTable::from_entries(
            spec.n_rx,
            (0..spec.n_rx)
                .map(|a| AntennaCombination::new(vec![a], spec.n_rx))
                .collect::<Result<Vec<_>>>()?,
        )?,
        Scheme::Rgsm { n_s } | Scheme::Rgssk { n_s } => {
            let candidates = combinations_of_size(spec.n_rx, n_s);
            let d = 1usize << floor_log2(candidates.len() as u64);
            random_selection(spec.n_rx, candidates, d, seed)?
        }
    };
    Ok((table, symbols))
}
