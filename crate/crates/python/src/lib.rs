//! Python bindings: compress row lists, multiply, serialize, reorder columns.

use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyBytes;

use gramlin_core::reorder::PairCounting;
use gramlin_core::{
    build_csm, choose_best_reordering, Algorithm, BlockedMatrix, CompressedMatrix, CsmMode,
    CsrvMatrix, DenseMatrix, Error, ReorderConfig, Variant,
};

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Io(e) => PyOSError::new_err(e.to_string()),
        e => PyValueError::new_err(e.to_string()),
    }
}

fn dense(rows: Vec<Vec<f64>>) -> PyResult<DenseMatrix> {
    DenseMatrix::from_rows(&rows).map_err(py_err)
}

fn variant(name: &str) -> PyResult<Variant> {
    name.parse().map_err(py_err)
}

fn mode(prune: &str, k: usize) -> PyResult<CsmMode> {
    match prune {
        "full" => Ok(CsmMode::Full),
        "local" => Ok(CsmMode::Local(k)),
        "global" => Ok(CsmMode::Global(k)),
        _ => Err(PyValueError::new_err(format!("unknown pruning '{prune}'"))),
    }
}

/// A compressed matrix. Build one with `Matrix.compress` or `Matrix.from_bytes`.
#[pyclass(module = "gramlin", frozen)]
struct Matrix {
    inner: CompressedMatrix,
}

#[pymethods]
impl Matrix {
    #[staticmethod]
    #[pyo3(signature = (rows, variant = "reiv", blocks = 1))]
    fn compress(
        py: Python<'_>,
        rows: Vec<Vec<f64>>,
        variant: &str,
        blocks: usize,
    ) -> PyResult<Self> {
        let m = dense(rows)?;
        let v = self::variant(variant)?;
        let inner = py
            .detach(|| {
                BlockedMatrix::build(&m, blocks).and_then(|bm| CompressedMatrix::encode(&bm, v))
            })
            .map_err(py_err)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn from_bytes(data: &[u8]) -> PyResult<Self> {
        CompressedMatrix::from_bytes(data)
            .map(|inner| Self { inner })
            .map_err(py_err)
    }

    fn to_bytes<'py>(&self, py: Python<'py>) -> Bound<'py, PyBytes> {
        PyBytes::new(py, &self.inner.to_bytes())
    }

    fn to_rows(&self) -> PyResult<Vec<Vec<f64>>> {
        let m = self
            .inner
            .to_csrv()
            .and_then(|c| c.decode())
            .map_err(py_err)?;
        Ok((0..m.n_rows()).map(|r| m.row(r).to_vec()).collect())
    }

    /// `M x`.
    fn right_mult(&self, py: Python<'_>, x: Vec<f64>) -> PyResult<Vec<f64>> {
        py.detach(|| self.inner.right_mult(&x)).map_err(py_err)
    }

    /// `y^t M`.
    fn left_mult(&self, py: Python<'_>, y: Vec<f64>) -> PyResult<Vec<f64>> {
        py.detach(|| self.inner.left_mult(&y)).map_err(py_err)
    }

    #[getter]
    fn shape(&self) -> (usize, usize) {
        (self.inner.n_rows(), self.inner.n_cols())
    }

    #[getter]
    fn variant(&self) -> &'static str {
        self.inner.variant().name()
    }

    #[getter]
    fn block_count(&self) -> usize {
        self.inner.block_count()
    }

    #[getter]
    fn rule_count(&self) -> usize {
        self.inner.rule_count()
    }

    #[getter]
    fn final_len(&self) -> usize {
        self.inner.final_len()
    }

    /// `|C| + 2|R|` summed over blocks (`|S|` for csrv).
    #[getter]
    fn code_count(&self) -> usize {
        self.inner.code_count()
    }

    #[getter]
    fn nbytes(&self) -> usize {
        self.inner.to_bytes().len()
    }

    fn __repr__(&self) -> String {
        format!(
            "Matrix(shape=({}, {}), variant='{}', blocks={})",
            self.inner.n_rows(),
            self.inner.n_cols(),
            self.inner.variant(),
            self.inner.block_count()
        )
    }
}

/// Column similarity scores as `(i, j, score)` with `i < j`.
#[pyfunction]
#[pyo3(signature = (rows, prune = "full", k = 16))]
fn csm(rows: Vec<Vec<f64>>, prune: &str, k: usize) -> PyResult<Vec<(usize, usize, f64)>> {
    let s = build_csm(&dense(rows)?, mode(prune, k)?);
    Ok(s.edges().to_vec())
}

/// Compresses with the best column order per block. Returns the matrix and,
/// per block, the winning algorithm and its byte count.
#[pyfunction]
#[pyo3(signature = (rows, blocks = 1, algorithms = vec!["pathcover".to_string(), "mwm".to_string()],
                    variant = "reans", prune = "local", k = 16))]
fn reorder(
    py: Python<'_>,
    rows: Vec<Vec<f64>>,
    blocks: usize,
    algorithms: Vec<String>,
    variant: &str,
    prune: &str,
    k: usize,
) -> PyResult<(Matrix, Vec<(String, usize)>)> {
    let m = dense(rows)?;
    let cfg = ReorderConfig {
        algorithms: algorithms
            .iter()
            .map(|a| a.parse::<Algorithm>())
            .collect::<Result<_, _>>()
            .map_err(py_err)?,
        mode: mode(prune, k)?,
        variant: self::variant(variant)?,
        counting: PairCounting::Sort,
    };
    let (inner, report) = py
        .detach(|| {
            let out = choose_best_reordering(&CsrvMatrix::build(&m), blocks, &cfg)?;
            let report = out
                .blocks
                .iter()
                .map(|b| (b.winner.name().to_string(), b.winner_bytes()))
                .collect::<Vec<_>>();
            Ok((CompressedMatrix::encode(&out.matrix, cfg.variant)?, report))
        })
        .map_err(py_err)?;
    Ok((Matrix { inner }, report))
}

#[pymodule]
fn gramlin(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Matrix>()?;
    m.add_function(wrap_pyfunction!(csm, m)?)?;
    m.add_function(wrap_pyfunction!(reorder, m)?)?;
    m.add("VARIANTS", Variant::ALL.map(Variant::name).to_vec())?;
    Ok(())
}
