//! Python bindings: a `System` handle over the solver plus a few free functions.
//! Structured results come back as plain dicts and lists.

use std::path::PathBuf;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};
use serde::Serialize;
use serde_json::Value;

use rovib::metrology::{self, MagicSettings};
use rovib::radial::{Engine, LevelSelector, RovibLevel};
use rovib::response::{self, WidthPolicy};
use rovib::units::{self, Unit};

fn to_py_err(e: rovib::Error) -> PyErr {
    if e.is_numerical() {
        PyRuntimeError::new_err(e.to_string())
    } else {
        PyValueError::new_err(e.to_string())
    }
}

fn value_to_py<'py>(py: Python<'py>, v: &Value) -> PyResult<Bound<'py, PyAny>> {
    Ok(match v {
        Value::Null => py.None().into_bound(py),
        Value::Bool(b) => b.into_pyobject(py)?.to_owned().into_any(),
        Value::Number(n) => match n.as_i64() {
            Some(i) => i.into_pyobject(py)?.into_any(),
            None => n.as_f64().unwrap_or(f64::NAN).into_pyobject(py)?.into_any(),
        },
        Value::String(s) => s.into_pyobject(py)?.into_any(),
        Value::Array(items) => {
            let list = PyList::empty(py);
            for item in items {
                list.append(value_to_py(py, item)?)?;
            }
            list.into_any()
        }
        Value::Object(map) => {
            let dict = PyDict::new(py);
            for (k, item) in map {
                dict.set_item(k, value_to_py(py, item)?)?;
            }
            dict.into_any()
        }
    })
}

fn to_py<'py, T: Serialize>(py: Python<'py>, x: &T) -> PyResult<Bound<'py, PyAny>> {
    let v = serde_json::to_value(x).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    value_to_py(py, &v)
}

fn width_policy(name: &str) -> PyResult<WidthPolicy> {
    match name {
        "zero" => Ok(WidthPolicy::Zero),
        "decay" => Ok(WidthPolicy::FromDecay),
        other => Err(PyValueError::new_err(format!("widths must be \"zero\" or \"decay\", got {other:?}"))),
    }
}

fn selector(s: &str) -> PyResult<LevelSelector> {
    s.parse().map_err(to_py_err)
}

/// A molecular system with its cached eigenstates.
#[pyclass(name = "System", frozen)]
struct PySystem {
    engine: Engine,
}

impl PySystem {
    fn wrap(system: rovib::Result<rovib::MoleculeSystem>) -> PyResult<Self> {
        Ok(Self { engine: Engine::new(system.map_err(to_py_err)?).map_err(to_py_err)? })
    }

    fn ground_level(&self, level: &str, j: u32) -> PyResult<RovibLevel> {
        let ground = self.engine.system().ground.label.clone();
        self.engine.level(&ground, j, selector(level)?).map_err(to_py_err)
    }
}

#[pymethods]
impl PySystem {
    #[staticmethod]
    fn from_config(path: PathBuf) -> PyResult<Self> {
        Self::wrap(rovib::load_system(path))
    }

    #[staticmethod]
    fn sr2_like() -> PyResult<Self> {
        Self::wrap(rovib::models::sr2_like())
    }

    #[staticmethod]
    fn morse(reduced_mass: f64, depth: f64, a: f64, r_e: f64) -> PyResult<Self> {
        Self::wrap(rovib::models::morse_system(reduced_mass, depth, a, r_e))
    }

    /// Channel labels, ground first.
    fn channels(&self) -> Vec<String> {
        self.engine.system().channels().map(|c| c.label.clone()).collect()
    }

    #[pyo3(signature = (channel, j = 0))]
    fn bound_levels<'py>(&self, py: Python<'py>, channel: &str, j: u32) -> PyResult<Bound<'py, PyAny>> {
        let levels = py.detach(|| self.engine.bound_levels(channel, j)).map_err(to_py_err)?;
        to_py(py, &levels)
    }

    /// Complex polarizability of a ground level in MHz/(W/cm²).
    #[pyo3(signature = (level, nu_cm1, j = 0, widths = "decay"))]
    fn polarizability(&self, py: Python<'_>, level: &str, nu_cm1: f64, j: u32, widths: &str) -> PyResult<(f64, f64)> {
        let l = self.ground_level(level, j)?;
        let policy = width_policy(widths)?;
        let a = py.detach(|| response::polarizability(&self.engine, &l, nu_cm1, &policy)).map_err(to_py_err)?;
        Ok((a.re, a.im))
    }

    /// Natural linewidths of every bound level of an excited channel.
    #[pyo3(signature = (channel))]
    fn linewidths<'py>(&self, py: Python<'py>, channel: &str) -> PyResult<Bound<'py, PyAny>> {
        let reports = py.detach(|| rovib::decay::linewidth_map(&self.engine, channel)).map_err(to_py_err)?;
        to_py(py, &reports)
    }

    /// dE/dlnμ of every level in a channel, cm^-1.
    #[pyo3(signature = (channel, j = 0, rel_step = 1e-6))]
    fn sensitivities<'py>(&self, py: Python<'py>, channel: &str, j: u32, rel_step: f64) -> PyResult<Bound<'py, PyAny>> {
        let reports =
            py.detach(|| metrology::channel_sensitivities(&self.engine, channel, j, rel_step)).map_err(to_py_err)?;
        to_py(py, &reports)
    }

    /// Frequencies in `window` (cm^-1) where two ground levels shift equally.
    #[pyo3(signature = (a, b, window, j = 0, step = 0.1, exclusion = None, widths = "zero"))]
    #[allow(clippy::too_many_arguments)]
    fn magic<'py>(
        &self,
        py: Python<'py>,
        a: &str,
        b: &str,
        window: (f64, f64),
        j: u32,
        step: f64,
        exclusion: Option<f64>,
        widths: &str,
    ) -> PyResult<Bound<'py, PyAny>> {
        let (la, lb) = (self.ground_level(a, j)?, self.ground_level(b, j)?);
        let policy = width_policy(widths)?;
        let defaults = MagicSettings::default();
        let settings = MagicSettings { step, exclusion: exclusion.unwrap_or(defaults.exclusion), ..defaults };
        let points = py
            .detach(|| metrology::find_magic_levels(&self.engine, &la, &lb, window, &policy, &settings))
            .map_err(to_py_err)?;
        to_py(py, &points)
    }
}

#[pyfunction]
fn wigner3j(j1: f64, j2: f64, j3: f64, m1: f64, m2: f64, m3: f64) -> PyResult<f64> {
    rovib::angular::wigner3j(j1, j2, j3, m1, m2, m3).map_err(to_py_err)
}

/// Converts between unit symbols such as "cm^-1", "Hartree" or "Hz".
#[pyfunction]
fn convert(value: f64, from: &str, to: &str) -> PyResult<f64> {
    let parse = |s: &str| -> PyResult<Unit> {
        Unit::ALL
            .iter()
            .copied()
            .find(|u| u.symbol() == s)
            .ok_or_else(|| PyValueError::new_err(format!("unknown unit {s:?}")))
    };
    units::convert(value, parse(from)?, parse(to)?).map_err(to_py_err)
}

#[pyfunction]
fn precision_budget<'py>(py: Python<'py>, linewidth_hz: f64, snr: f64, nu_hz: f64) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &metrology::precision_budget(linewidth_hz, snr, nu_hz).map_err(to_py_err)?)
}

#[pymodule]
#[pyo3(name = "rovib")]
fn rovib_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySystem>()?;
    m.add_function(wrap_pyfunction!(wigner3j, m)?)?;
    m.add_function(wrap_pyfunction!(convert, m)?)?;
    m.add_function(wrap_pyfunction!(precision_budget, m)?)?;
    m.add("CONSTANTS_VERSION", units::CONSTANTS_VERSION)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
