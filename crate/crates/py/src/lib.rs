//! Python bindings: parse and validate block-chain models, embed them into
//! exact lifted form, and co-simulate the original against the lifted model.

use std::collections::BTreeMap;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use blocklift::embed::{
    classify, embed_chain, model_to_json, predict_blti as predict_blti_rs, reduce,
};
use blocklift::model::{parse_model as parse_model_rs, serialize_model};
use blocklift::sim::{
    compare as compare_rs, simulate_chain, simulate_piti, InputSignal, SimConfig,
};

fn to_py_err(err: blocklift::Error) -> PyErr {
    PyValueError::new_err(err.to_string())
}

fn matrix_rows(m: &nalgebra::DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

/// A parsed block-chain system description.
#[pyclass(name = "BlockChain", from_py_object)]
#[derive(Clone)]
struct PyBlockChain {
    inner: blocklift::model::BlockChain,
}

#[pymethods]
impl PyBlockChain {
    #[getter]
    fn n_u(&self) -> usize {
        self.inner.n_u
    }

    #[getter]
    fn n_y(&self) -> usize {
        self.inner.n_y
    }

    /// Check interconnection dimensions; returns the per-node report text.
    fn validate(&self) -> PyResult<String> {
        Ok(self.inner.validate().map_err(to_py_err)?.to_string())
    }

    /// Structural test for a bilinear no-feedthrough embedding.
    fn predict_blti(&self) -> bool {
        predict_blti_rs(&self.inner)
    }

    fn to_json(&self) -> String {
        serialize_model(&self.inner)
    }

    fn __repr__(&self) -> String {
        format!(
            "BlockChain(n_u={}, n_y={}, nodes={})",
            self.inner.n_u,
            self.inner.n_y,
            self.inner.seq.len()
        )
    }
}

/// An exact lifted model with constant state and output matrices.
#[pyclass(name = "LiftedModel")]
struct PyLiftedModel {
    inner: blocklift::embed::PitiModel,
}

#[pymethods]
impl PyLiftedModel {
    #[getter]
    fn n_z(&self) -> usize {
        self.inner.n_z()
    }

    #[getter]
    fn n_u(&self) -> usize {
        self.inner.n_u
    }

    #[getter]
    fn n_y(&self) -> usize {
        self.inner.n_y()
    }

    /// `"PITI"`, `"BLTI"`, `"BLTI_no_feedthrough"`, or `"LTI"`.
    #[getter]
    fn model_class(&self) -> String {
        classify(&self.inner).to_string()
    }

    fn a(&self) -> Vec<Vec<f64>> {
        matrix_rows(&self.inner.a)
    }

    fn c(&self) -> Vec<Vec<f64>> {
        matrix_rows(&self.inner.c)
    }

    /// Monomial atlas: one list of `(block, state)` factor pairs per lifted
    /// coordinate (the empty list is the constant coordinate).
    fn atlas(&self) -> Vec<Vec<(usize, usize)>> {
        self.inner
            .atlas
            .coords()
            .iter()
            .map(|m| m.factors().iter().map(|&(b, s)| (b.0, s)).collect())
            .collect()
    }

    fn to_json(&self) -> String {
        model_to_json(&self.inner)
    }

    fn __repr__(&self) -> String {
        format!(
            "LiftedModel(n_z={}, n_u={}, class={})",
            self.inner.n_z(),
            self.inner.n_u,
            self.model_class()
        )
    }
}

/// Parse a model-file string into a [`BlockChain`].
#[pyfunction]
fn parse_model(text: &str) -> PyResult<PyBlockChain> {
    Ok(PyBlockChain {
        inner: parse_model_rs(text).map_err(to_py_err)?,
    })
}

/// Embed a chain into its exact lifted model, optionally deduplicated.
#[pyfunction]
#[pyo3(signature = (chain, reduce_states = true))]
fn embed(chain: &PyBlockChain, reduce_states: bool) -> PyResult<PyLiftedModel> {
    let model = embed_chain(&chain.inner).map_err(to_py_err)?;
    let model = if reduce_states {
        reduce(&model).0
    } else {
        model
    };
    Ok(PyLiftedModel { inner: model })
}

fn input_signal(name: &str, seed: u64) -> PyResult<InputSignal> {
    match name {
        "gauss" => Ok(InputSignal::WhiteNoise { seed, scale: 1.0 }),
        "multisine" => Ok(InputSignal::standard_multisine()),
        other => Err(PyValueError::new_err(format!(
            "unknown input '{other}' (expected 'gauss' or 'multisine')"
        ))),
    }
}

/// Simulate the chain and its reduced lifted model on the same input and
/// return the discrepancy statistics along with the model dimensions.
#[pyfunction]
#[pyo3(signature = (chain, input = "gauss", seed = 42, dt = 1e-4, horizon = 1.0))]
fn compare<'py>(
    py: Python<'py>,
    chain: &PyBlockChain,
    input: &str,
    seed: u64,
    dt: f64,
    horizon: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let cfg = SimConfig::new(dt, horizon).map_err(to_py_err)?;
    let signal = input_signal(input, seed)?;
    let model = embed_chain(&chain.inner).map_err(to_py_err)?;
    let class = classify(&model).to_string();
    let n_z_full = model.n_z();
    let (reduced, _) = reduce(&model);

    let x0: BTreeMap<_, _> = chain.inner.ones_initial_state();
    let z0 = reduced.atlas.lift(&x0).map_err(to_py_err)?;
    let a = simulate_chain(&chain.inner, &x0, &signal, &cfg).map_err(to_py_err)?;
    let b = simulate_piti(&reduced, &z0, &signal, &cfg).map_err(to_py_err)?;
    let report = compare_rs(&a, &b).map_err(to_py_err)?;

    let out = PyDict::new(py);
    out.set_item("max_abs", report.max_abs)?;
    out.set_item("rms", report.rms)?;
    out.set_item("per_channel", report.per_channel)?;
    out.set_item("n_z_full", n_z_full)?;
    out.set_item("n_z_reduced", reduced.n_z())?;
    out.set_item("model_class", class)?;
    Ok(out)
}

#[pymodule]
fn blocklift_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyBlockChain>()?;
    m.add_class::<PyLiftedModel>()?;
    m.add_function(wrap_pyfunction!(parse_model, m)?)?;
    m.add_function(wrap_pyfunction!(embed, m)?)?;
    m.add_function(wrap_pyfunction!(compare, m)?)?;
    Ok(())
}
