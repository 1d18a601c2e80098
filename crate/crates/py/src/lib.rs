//! Python bindings: configuration, Monte Carlo BER, union-bound ABER and the
//! mapping/modem helpers behind them.

use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use rasm_core::analysis::{analyze as core_analyze, AnalysisOptions};
use rasm_core::baselines::Scheme;
use rasm_core::cli::{parse_model, parse_pep_method};
use rasm_core::mapping::{self, AcTable};
use rasm_core::modem::{self, ModulationKind};
use rasm_core::montecarlo::{self, noise_power};
use rasm_core::Error;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Io(_) | Error::NonFinite { .. } => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

/// System under test: scheme, geometry, modulation and seeds.
#[pyclass(name = "SystemConfig", module = "rasm", frozen, skip_from_py_object)]
struct PySystemConfig {
    inner: montecarlo::SystemConfig,
}

#[pymethods]
impl PySystemConfig {
    #[new]
    #[pyo3(signature = (
        n_res, n_rx, order = 2, modulation = "psk", scheme = "RASM", n_s = None,
        master_seed = 0, table_seed = None, symbol_energy = 1.0
    ))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        n_res: usize,
        n_rx: usize,
        order: usize,
        modulation: &str,
        scheme: &str,
        n_s: Option<usize>,
        master_seed: u64,
        table_seed: Option<u64>,
        symbol_energy: f64,
    ) -> PyResult<Self> {
        let inner = montecarlo::SystemConfig {
            n_res,
            n_rx,
            modulation: modulation.parse::<ModulationKind>().map_err(to_py)?,
            order,
            scheme: Scheme::parse(scheme, n_s).map_err(to_py)?,
            master_seed,
            table_seed: table_seed.unwrap_or(master_seed),
            symbol_energy,
        };
        inner.validate().map_err(to_py)?;
        Ok(Self { inner })
    }

    #[getter]
    fn n_res(&self) -> usize {
        self.inner.n_res
    }

    #[getter]
    fn n_rx(&self) -> usize {
        self.inner.n_rx
    }

    #[getter]
    fn order(&self) -> usize {
        self.inner.order
    }

    #[getter]
    fn modulation(&self) -> String {
        self.inner.modulation.to_string()
    }

    #[getter]
    fn scheme(&self) -> String {
        self.inner.scheme.to_string()
    }

    #[getter]
    fn master_seed(&self) -> u64 {
        self.inner.master_seed
    }

    #[getter]
    fn table_seed(&self) -> u64 {
        self.inner.table_seed
    }

    #[getter]
    fn symbol_energy(&self) -> f64 {
        self.inner.symbol_energy
    }

    fn bpcu(&self) -> PyResult<u32> {
        montecarlo::bpcu(&self.inner).map_err(to_py)
    }

    /// The AC table this configuration uses, one 1-based combination per line.
    fn table_text(&self) -> PyResult<String> {
        let sim = montecarlo::Simulator::new(self.inner).map_err(to_py)?;
        Ok(sim.table().to_text())
    }

    fn __repr__(&self) -> String {
        let c = &self.inner;
        format!(
            "SystemConfig(scheme={}, n_res={}, n_rx={}, {}-{}, master_seed={}, table_seed={})",
            c.scheme, c.n_res, c.n_rx, c.order, c.modulation, c.master_seed, c.table_seed
        )
    }
}

/// `(snr_db, ber, ci95, trials, bit_errors)`.
type BerRow = (f64, f64, f64, u64, u64);

/// Monte Carlo BER over `snr_db`. Returns one
/// `(snr_db, ber, ci95, trials, bit_errors)` tuple per point.
#[pyfunction]
#[pyo3(signature = (config, snr_db, trials, threads = None))]
fn run_ber(
    py: Python<'_>,
    config: &PySystemConfig,
    snr_db: Vec<f64>,
    trials: u64,
    threads: Option<usize>,
) -> PyResult<Vec<BerRow>> {
    let cfg = config.inner;
    let curve = py
        .detach(|| match threads {
            Some(n) => montecarlo::run_ber_with_threads(&cfg, &snr_db, trials, n),
            None => montecarlo::run_ber(&cfg, &snr_db, trials),
        })
        .map_err(to_py)?;
    Ok(curve
        .points
        .iter()
        .map(|p| (p.snr_db, p.ber, p.ci95, p.trials, p.bit_errors))
        .collect())
}

/// Union-bound ABER over `snr_db`, as `(snr_db, aber)` tuples.
#[pyfunction]
#[pyo3(signature = (config, snr_db, model = "printed", pep_method = "quadrature", nodes = 64))]
fn analyze(
    py: Python<'_>,
    config: &PySystemConfig,
    snr_db: Vec<f64>,
    model: &str,
    pep_method: &str,
    nodes: usize,
) -> PyResult<Vec<(f64, f64)>> {
    let options = AnalysisOptions {
        model: parse_model(model).map_err(to_py)?,
        method: parse_pep_method(pep_method).map_err(to_py)?,
        nodes,
        keep_pep_table: false,
    };
    let cfg = config.inner;
    let result = py
        .detach(|| core_analyze(&cfg, &snr_db, &options))
        .map_err(to_py)?;
    Ok(result.points.iter().map(|p| (p.snr_db, p.aber)).collect())
}

/// Seeded RASM AC selection, as 0-based antenna index lists.
#[pyfunction]
fn select_acs(n_rx: usize, seed: u64) -> PyResult<Vec<Vec<usize>>> {
    let table = mapping::select_acs(n_rx, seed).map_err(to_py)?;
    Ok(ac_lists(&table))
}

/// Parses a table in the text form (one 1-based combination per line).
#[pyfunction]
fn parse_table(n_rx: usize, text: &str) -> PyResult<Vec<Vec<usize>>> {
    let table = AcTable::from_text(n_rx, text).map_err(to_py)?;
    Ok(ac_lists(&table))
}

fn ac_lists(table: &AcTable) -> Vec<Vec<usize>> {
    table
        .entries()
        .iter()
        .map(|ac| ac.antennas().to_vec())
        .collect()
}

/// Unit-energy constellation points.
#[pyfunction]
#[pyo3(signature = (order, modulation = "psk"))]
fn make_constellation(order: usize, modulation: &str) -> PyResult<Vec<Complex64>> {
    let kind = modulation.parse::<ModulationKind>().map_err(to_py)?;
    let c = modem::make_constellation(kind, order).map_err(to_py)?;
    Ok(c.points().to_vec())
}

/// `N0 = 10^(-snr/10)` at unit symbol energy.
#[pyfunction(name = "noise_power")]
fn noise_power_py(snr_db: f64) -> f64 {
    noise_power(snr_db)
}

#[pymodule]
fn rasm(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySystemConfig>()?;
    m.add_function(wrap_pyfunction!(run_ber, m)?)?;
    m.add_function(wrap_pyfunction!(analyze, m)?)?;
    m.add_function(wrap_pyfunction!(select_acs, m)?)?;
    m.add_function(wrap_pyfunction!(parse_table, m)?)?;
    m.add_function(wrap_pyfunction!(make_constellation, m)?)?;
    m.add_function(wrap_pyfunction!(noise_power_py, m)?)?;
    Ok(())
}
