//! Run specifications and the simulate / analyze / compare drivers behind the
//! `rasm` binary.
//!
//! A run file is TOML with top-level run settings and one `[[scheme]]` table
//! per configuration:
//!
//! ```toml
//! mode = "simulate"
//! trials = 100000
//!
//! [grid]
//! start = -10
//! stop = 10
//! step = 2
//!
//! [[scheme]]
//! scheme = "RASM"
//! n_res = 8
//! n_rx = 4
//! order = 2
//! ```

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Deserialize;
use toml::Spanned;

use crate::analysis::quadrature::DEFAULT_NODES;
use crate::analysis::{analyze, AnalysisOptions, CrossExponent, MgfModel, PepCase, PepMethod};
use crate::baselines::Scheme;
use crate::error::{invalid_config, Error, Result};
use crate::modem::ModulationKind;
use crate::montecarlo::{run_ber, BerCurve, SystemConfig};

pub const DEFAULT_TRIALS: u64 = 1_000_000;
pub const DEFAULT_SEED: u64 = 0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Simulate,
    Analyze,
    Compare,
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "simulate" => Ok(Mode::Simulate),
            "analyze" => Ok(Mode::Analyze),
            "compare" => Ok(Mode::Compare),
            other => Err(invalid_config(format!(
                "unknown mode {other:?}, expected simulate, analyze or compare"
            ))),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Simulate => "simulate",
            Mode::Analyze => "analyze",
            Mode::Compare => "compare",
        })
    }
}

/// Inclusive `start..=stop` in steps of `step` dB.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnrGrid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl SnrGrid {
    pub fn new(start: f64, stop: f64, step: f64) -> Result<Self> {
        if !(step > 0.0) || !start.is_finite() || !stop.is_finite() {
            return Err(invalid_config("SNR step must be positive and bounds finite"));
        }
        if start > stop {
            return Err(invalid_config("SNR start must not exceed stop"));
        }
        Ok(Self { start, stop, step })
    }

    pub fn points(&self) -> Vec<f64> {
        let count = ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1;
        (0..count).map(|i| self.start + i as f64 * self.step).collect()
    }
}

/// A labelled system configuration; the label names its CSV column / file.
#[derive(Debug, Clone, PartialEq)]
pub struct NamedConfig {
    pub label: String,
    pub config: SystemConfig,
}

/// Fully resolved run: every default is filled in.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub mode: Mode,
    pub configs: Vec<NamedConfig>,
    pub grid: SnrGrid,
    pub trials: u64,
    pub out: PathBuf,
    pub seed: u64,
    pub quadrature_nodes: usize,
    pub model: MgfModel,
    pub pep_method: PepMethod,
    pub pep_table: bool,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    mode: Spanned<String>,
    trials: Option<Spanned<u64>>,
    seed: Option<u64>,
    out: Option<String>,
    quadrature_nodes: Option<Spanned<usize>>,
    model: Option<Spanned<String>>,
    pep_method: Option<Spanned<String>>,
    pep_table: Option<bool>,
    grid: Spanned<RawGrid>,
    #[serde(default)]
    scheme: Vec<Spanned<RawScheme>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    start: f64,
    stop: f64,
    step: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScheme {
    label: Option<String>,
    scheme: Spanned<String>,
    n_res: usize,
    n_rx: usize,
    order: Spanned<usize>,
    modulation: Option<Spanned<String>>,
    n_s: Option<usize>,
    table_seed: Option<u64>,
    symbol_energy: Option<f64>,
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

fn at<T>(text: &str, span: &Spanned<T>, err: Error) -> Error {
    let message = match err {
        Error::InvalidConfig(m) | Error::InvalidInput(m) => m,
        other => other.to_string(),
    };
    Error::Parse {
        line: line_of(text, span.span().start),
        message,
    }
}

/// Accepts `printed` (or `case-split`), `dof-text`, `outside` and `per-antenna`.
pub fn parse_model(s: &str) -> Result<MgfModel> {
    match s {
        "case-split" | "printed" => Ok(MgfModel::CaseSplit(CrossExponent::Printed)),
        "dof-text" => Ok(MgfModel::CaseSplit(CrossExponent::DofText)),
        "outside" => Ok(MgfModel::CaseSplit(CrossExponent::Outside)),
        "per-antenna" => Ok(MgfModel::PerAntenna),
        other => Err(invalid_config(format!(
            "unknown model {other:?}, expected printed, dof-text, outside or per-antenna"
        ))),
    }
}

pub fn parse_pep_method(s: &str) -> Result<PepMethod> {
    match s {
        "quadrature" => Ok(PepMethod::Quadrature),
        "closed-bound" => Ok(PepMethod::ClosedBound),
        other => Err(invalid_config(format!(
            "unknown pep_method {other:?}, expected quadrature or closed-bound"
        ))),
    }
}

/// Parses and validates a run document.
pub fn parse_run_spec(text: &str) -> Result<RunSpec> {
    let raw: RawSpec = toml::from_str(text).map_err(|e| Error::Parse {
        line: e.span().map_or(0, |s| line_of(text, s.start)),
        message: e.message().trim().to_string(),
    })?;
    let mode = Mode::from_str(raw.mode.get_ref()).map_err(|e| at(text, &raw.mode, e))?;
    let seed = raw.seed.unwrap_or(DEFAULT_SEED);
    let trials = match &raw.trials {
        Some(t) if *t.get_ref() == 0 => {
            return Err(at(text, t, invalid_config("trials must be at least 1")))
        }
        Some(t) => *t.get_ref(),
        None => DEFAULT_TRIALS,
    };
    let quadrature_nodes = match &raw.quadrature_nodes {
        Some(n) if *n.get_ref() == 0 => {
            return Err(at(text, n, invalid_config("quadrature_nodes must be at least 1")))
        }
        Some(n) => *n.get_ref(),
        None => DEFAULT_NODES,
    };
    let model = match &raw.model {
        Some(m) => parse_model(m.get_ref()).map_err(|e| at(text, m, e))?,
        None => MgfModel::CaseSplit(CrossExponent::Printed),
    };
    let pep_method = match &raw.pep_method {
        Some(m) => parse_pep_method(m.get_ref()).map_err(|e| at(text, m, e))?,
        None => PepMethod::Quadrature,
    };
    let g = raw.grid.get_ref();
    let grid = SnrGrid::new(g.start, g.stop, g.step).map_err(|e| at(text, &raw.grid, e))?;

    if raw.scheme.is_empty() {
        return Err(Error::Parse {
            line: line_of(text, text.len()),
            message: "at least one [[scheme]] table is required".into(),
        });
    }
    let mut configs: Vec<NamedConfig> = Vec::new();
    for spanned in &raw.scheme {
        let s = spanned.get_ref();
        let scheme = Scheme::parse(s.scheme.get_ref(), s.n_s).map_err(|e| at(text, &s.scheme, e))?;
        let modulation = match &s.modulation {
            Some(m) => ModulationKind::from_str(m.get_ref()).map_err(|e| at(text, m, e))?,
            None => ModulationKind::Psk,
        };
        let order = *s.order.get_ref();
        if !matches!(scheme, Scheme::Rgssk { .. }) && (order < 2 || !order.is_power_of_two()) {
            return Err(at(
                text,
                &s.order,
                invalid_config("modulation order must be a power of 2"),
            ));
        }
        let config = SystemConfig {
            n_res: s.n_res,
            n_rx: s.n_rx,
            modulation,
            order,
            scheme,
            master_seed: seed,
            table_seed: s.table_seed.unwrap_or(seed),
            symbol_energy: s.symbol_energy.unwrap_or(1.0),
        };
        config.validate().map_err(|e| at(text, spanned, e))?;
        let label = s.label.clone().unwrap_or_else(|| scheme.name().to_string());
        if label.is_empty() || label.contains([',', '/', '\\', '"', '\n']) {
            return Err(at(text, spanned, invalid_config(format!("unusable label {label:?}"))));
        }
        if configs.iter().any(|c| c.label == label) {
            return Err(at(
                text,
                spanned,
                invalid_config(format!("duplicate label {label:?}; set distinct `label` keys")),
            ));
        }
        configs.push(NamedConfig { label, config });
    }

    Ok(RunSpec {
        mode,
        configs,
        grid,
        trials,
        out: PathBuf::from(raw.out.unwrap_or_else(|| "results".into())),
        seed,
        quadrature_nodes,
        model,
        pep_method,
        pep_table: raw.pep_table.unwrap_or(false),
    })
}

impl RunSpec {
    /// Replaces the master seed of every configuration. Table seeds that
    /// followed the old master seed follow the new one.
    pub fn set_seed(&mut self, seed: u64) {
        for c in &mut self.configs {
            if c.config.table_seed == self.seed {
                c.config.table_seed = seed;
            }
            c.config.master_seed = seed;
        }
        self.seed = seed;
    }

    fn analysis_options(&self) -> AnalysisOptions {
        AnalysisOptions {
            model: self.model,
            method: self.pep_method,
            nodes: self.quadrature_nodes,
            keep_pep_table: self.pep_table,
        }
    }
}

/// Shortest round-trip decimal form; never locale dependent.
pub fn fmt_num(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let a = v.abs();
    if (1e-4..1e6).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

/// Renders a header and rows as CSV text.
pub fn csv_string(header: &[&str], rows: &[Vec<String>]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(csv_error)?;
    for row in rows {
        w.write_record(row).map_err(csv_error)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| invalid_config(format!("CSV error: {e}")))?;
    String::from_utf8(bytes).map_err(|e| invalid_config(format!("CSV error: {e}")))
}

fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    fs::write(path, csv_string(header, rows)?)?;
    Ok(())
}

fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => invalid_config(format!("CSV error: {other:?}")),
    }
}

/// The simulate-mode CSV of one curve.
pub fn ber_csv(curve: &BerCurve) -> Result<String> {
    csv_string(&["snr_db", "ber", "ci95", "trials"], &ber_rows(curve))
}

/// BER curve as CSV rows: `snr_db,ber,ci95,trials`.
pub fn ber_rows(curve: &BerCurve) -> Vec<Vec<String>> {
    curve
        .points
        .iter()
        .map(|p| vec![fmt_num(p.snr_db), fmt_num(p.ber), fmt_num(p.ci95), p.trials.to_string()])
        .collect()
}

/// Executes a run and returns the files written, in write order.
pub fn run(spec: &RunSpec) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(&spec.out)?;
    let grid = spec.grid.points();
    let mut written = Vec::new();
    match spec.mode {
        Mode::Simulate => {
            for c in &spec.configs {
                let curve = run_ber(&c.config, &grid, spec.trials)?;
                let path = spec.out.join(format!("{}_ber.csv", c.label));
                fs::write(&path, ber_csv(&curve)?)?;
                written.push(path);
            }
        }
        Mode::Analyze => {
            let options = spec.analysis_options();
            for c in &spec.configs {
                let res = analyze(&c.config, &grid, &options)?;
                let rows: Vec<Vec<String>> = res
                    .points
                    .iter()
                    .map(|p| vec![fmt_num(p.snr_db), fmt_num(p.aber)])
                    .collect();
                let path = spec.out.join(format!("{}_aber.csv", c.label));
                write_csv(&path, &["snr_db", "aber_bound"], &rows)?;
                written.push(path);
                if spec.pep_table {
                    let mut rows = Vec::new();
                    for (p, table) in res.points.iter().zip(&res.pep_tables) {
                        for e in table {
                            rows.push(vec![
                                fmt_num(p.snr_db),
                                (e.r + 1).to_string(),
                                (e.k + 1).to_string(),
                                (e.r_hat + 1).to_string(),
                                (e.k_hat + 1).to_string(),
                                match e.case {
                                    PepCase::Z1 => "Z1".into(),
                                    PepCase::Z2 => "Z2".into(),
                                },
                                fmt_num(e.pep),
                                e.weight.to_string(),
                            ]);
                        }
                    }
                    let path = spec.out.join(format!("{}_pep.csv", c.label));
                    write_csv(
                        &path,
                        &["snr_db", "r", "k", "r_hat", "k_hat", "case", "pep", "weight"],
                        &rows,
                    )?;
                    written.push(path);
                }
            }
        }
        Mode::Compare => {
            let mut curves = Vec::with_capacity(spec.configs.len());
            for c in &spec.configs {
                curves.push(run_ber(&c.config, &grid, spec.trials)?);
            }
            let mut header = vec!["snr_db"];
            header.extend(spec.configs.iter().map(|c| c.label.as_str()));
            let rows: Vec<Vec<String>> = grid
                .iter()
                .enumerate()
                .map(|(i, &snr)| {
                    let mut row = vec![fmt_num(snr)];
                    row.extend(curves.iter().map(|c| fmt_num(c.points[i].ber)));
                    row
                })
                .collect();
            let path = spec.out.join("compare_ber.csv");
            write_csv(&path, &header, &rows)?;
            written.push(path);

            let mut header = vec!["quantity"];
            header.extend(spec.configs.iter().map(|c| c.label.as_str()));
            let mut row = vec!["bpcu".to_string()];
            row.extend(curves.iter().map(|c| c.bpcu.to_string()));
            let path = spec.out.join("bpcu.csv");
            write_csv(&path, &header, &[row])?;
            written.push(path);
        }
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
mode = "simulate"

[grid]
start = -10
stop = 10
step = 2

[[scheme]]
scheme = "RASM"
n_res = 8
n_rx = 4
order = 2
"#;

    #[test]
    fn minimal_spec_has_explicit_defaults() {
        let spec = parse_run_spec(MINIMAL).unwrap();
        assert_eq!(spec.mode, Mode::Simulate);
        assert_eq!(spec.trials, 1_000_000);
        assert_eq!(spec.seed, 0);
        assert_eq!(spec.quadrature_nodes, 64);
        assert_eq!(spec.grid.points().len(), 11);
        assert_eq!(spec.configs.len(), 1);
        assert_eq!(spec.configs[0].label, "RASM");
        assert_eq!(spec.configs[0].config, SystemConfig::rasm(8, 4, 2));
    }

    #[test]
    fn bad_order_is_reported_with_its_line() {
        let text = MINIMAL.replace("order = 2", "order = 3");
        match parse_run_spec(&text).unwrap_err() {
            Error::Parse { line, message } => {
                assert_eq!(line, 13);
                assert!(message.contains("modulation order must be a power of 2"));
            }
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn rgsm_needs_n_s() {
        let text = MINIMAL.replace("\"RASM\"", "\"RGSM\"");
        let err = parse_run_spec(&text).unwrap_err();
        assert!(err.to_string().contains("n_s"), "{err}");
        let ok = text.replace("order = 2", "order = 2\nn_s = 2");
        assert!(parse_run_spec(&ok).is_ok());
    }

    #[test]
    fn unknown_keys_and_bad_grids() {
        let text = MINIMAL.replace("n_rx = 4", "n_rx = 4\ncolour = 1");
        match parse_run_spec(&text).unwrap_err() {
            Error::Parse { line, message } => {
                assert_eq!(line, 13);
                assert!(message.contains("colour"), "{message}");
            }
            e => panic!("unexpected {e}"),
        }
        assert!(parse_run_spec(&MINIMAL.replace("step = 2", "step = 0")).is_err());
        assert!(parse_run_spec(&MINIMAL.replace("start = -10", "start = 12")).is_err());
        assert!(parse_run_spec(&MINIMAL.replace("simulate", "plot")).is_err());
        assert!(parse_run_spec("mode = \"simulate\"\n[grid]\nstart=0\nstop=1\nstep=1\n").is_err());
    }

    #[test]
    fn duplicate_labels_rejected() {
        let text = format!("{MINIMAL}\n[[scheme]]\nscheme = \"RASM\"\nn_res = 16\nn_rx = 4\norder = 2\n");
        assert!(parse_run_spec(&text).is_err());
        let text = format!(
            "{MINIMAL}\n[[scheme]]\nlabel = \"RASM16\"\nscheme = \"RASM\"\nn_res = 16\nn_rx = 4\norder = 2\n"
        );
        assert_eq!(parse_run_spec(&text).unwrap().configs.len(), 2);
    }

    #[test]
    fn seed_override_moves_default_table_seed() {
        let mut spec = parse_run_spec(MINIMAL).unwrap();
        spec.set_seed(9);
        assert_eq!(spec.configs[0].config.master_seed, 9);
        assert_eq!(spec.configs[0].config.table_seed, 9);
    }

    #[test]
    fn grid_points_are_exact() {
        let g = SnrGrid::new(-10.0, 10.0, 2.0).unwrap();
        let p = g.points();
        assert_eq!(p.first(), Some(&-10.0));
        assert_eq!(p.last(), Some(&10.0));
        assert_eq!(SnrGrid::new(0.0, 1.0, 0.3).unwrap().points().len(), 4);
    }

    #[test]
    fn number_formatting() {
        assert_eq!(fmt_num(-10.0), "-10");
        assert_eq!(fmt_num(0.0), "0");
        assert_eq!(fmt_num(0.0125), "0.0125");
        assert_eq!(fmt_num(2.5e-6), "2.5e-6");
    }
}
