//! File formats: graphs, models and fit results as JSON, observations as CSV.

use std::fs::File;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use eqvar_core::{Dag, LearnResult, Matrix, SemModel, UndirectedGraph, WeightedDag};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("row {row}, column {col}: cannot parse {value:?} as a number")]
    Parse { row: usize, col: usize, value: String },
    #[error("row {row}, column {col}: value is not finite")]
    NonFinite { row: usize, col: usize },
    #[error("row {row}: expected {expected} fields, found {found}")]
    Ragged { row: usize, expected: usize, found: usize },
    #[error("no data rows")]
    Empty,
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Model(#[from] eqvar_core::Error),
}

pub type Result<T, E = FormatError> = std::result::Result<T, E>;

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|source| FormatError::Io { path: path.to_owned(), source })
}

fn create(path: &Path) -> Result<File> {
    File::create(path).map_err(|source| FormatError::Io { path: path.to_owned(), source })
}

/// `{"d": 3, "edges": [[0, 1], [1, 2]]}`. For undirected graphs each pair is `[u, v]` with `u < v`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphJson {
    pub d: usize,
    pub edges: Vec<[usize; 2]>,
}

impl From<&Dag> for GraphJson {
    fn from(g: &Dag) -> Self {
        Self { d: g.d(), edges: g.edges().into_iter().map(|(u, v)| [u, v]).collect() }
    }
}

impl From<&UndirectedGraph> for GraphJson {
    fn from(g: &UndirectedGraph) -> Self {
        Self { d: g.d(), edges: g.edges().into_iter().map(|(u, v)| [u, v]).collect() }
    }
}

impl GraphJson {
    fn pairs(&self) -> Vec<(usize, usize)> {
        self.edges.iter().map(|e| (e[0], e[1])).collect()
    }

    pub fn to_dag(&self) -> Result<Dag> {
        Ok(Dag::new(self.d, &self.pairs())?)
    }

    pub fn to_undirected(&self) -> Result<UndirectedGraph> {
        Ok(UndirectedGraph::new(self.d, &self.pairs())?)
    }
}

/// `{"d": 2, "sigma2": 1.0, "edges": [[0, 1, 0.7]]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelJson {
    pub d: usize,
    pub sigma2: f64,
    pub edges: Vec<(usize, usize, f64)>,
}

impl From<&SemModel> for ModelJson {
    fn from(m: &SemModel) -> Self {
        Self { d: m.d(), sigma2: m.sigma2(), edges: m.weighted_dag().weighted_edges() }
    }
}

impl ModelJson {
    pub fn to_model(&self) -> Result<SemModel> {
        Ok(SemModel::new(WeightedDag::from_edges(self.d, &self.edges)?, self.sigma2)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnResultJson {
    pub d: usize,
    pub order: Vec<usize>,
    pub edges: Vec<[usize; 2]>,
    pub gamma: f64,
    /// Winning conditional variance at each step of the ordering.
    pub sigma_k: Vec<f64>,
}

impl From<&LearnResult> for LearnResultJson {
    fn from(r: &LearnResult) -> Self {
        Self {
            d: r.dag.d(),
            order: r.ordering.as_slice().to_vec(),
            edges: GraphJson::from(&r.dag).edges,
            gamma: r.gamma,
            sigma_k: r.sigma.clone(),
        }
    }
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let mut s = String::new();
    open(path)?.read_to_string(&mut s).map_err(|source| FormatError::Io { path: path.to_owned(), source })?;
    Ok(serde_json::from_str(&s)?)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut f = create(path)?;
    serde_json::to_writer_pretty(&mut f, value)?;
    f.write_all(b"\n").map_err(|source| FormatError::Io { path: path.to_owned(), source })
}

/// Reads an `n × d` numeric matrix. A first row in which no cell parses as a
/// number is taken as a header. Rows are reported 1-based as they appear in
/// the file, columns 1-based.
pub fn parse_data<R: Read>(reader: R) -> Result<Matrix> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).flexible(true).from_reader(reader);
    let mut values = Vec::new();
    let mut width = None;
    let mut rows = 0;
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = i + 1;
        if i == 0 && rec.iter().all(|c| c.parse::<f64>().is_err()) {
            width = Some(rec.len());
            continue;
        }
        if rec.len() == 1 && rec[0].is_empty() {
            continue;
        }
        let w = *width.get_or_insert(rec.len());
        if rec.len() != w {
            return Err(FormatError::Ragged { row: line, expected: w, found: rec.len() });
        }
        for (j, cell) in rec.iter().enumerate() {
            let x: f64 =
                cell.parse().map_err(|_| FormatError::Parse { row: line, col: j + 1, value: cell.to_owned() })?;
            if !x.is_finite() {
                return Err(FormatError::NonFinite { row: line, col: j + 1 });
            }
            values.push(x);
        }
        rows += 1;
    }
    let w = width.unwrap_or(0);
    if rows == 0 || w == 0 {
        return Err(FormatError::Empty);
    }
    Ok(Matrix::from_vec(rows, w, values)?)
}

pub fn read_data(path: &Path) -> Result<Matrix> {
    parse_data(open(path)?)
}

/// Writes `x0,x1,...` followed by one row per observation.
pub fn write_data<W: Write>(writer: W, data: &Matrix) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record((0..data.cols()).map(|j| format!("x{j}")))?;
    for i in 0..data.rows() {
        w.write_record(data.row(i).iter().map(|x| format!("{x:e}")))?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn write_data_file(path: &Path, data: &Matrix) -> Result<()> {
    write_data(create(path)?, data)
}
