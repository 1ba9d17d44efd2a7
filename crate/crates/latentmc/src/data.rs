//! Labelled datasets: CSV reading and writing, and the synthetic logistic
//! regression generator.

use std::io;
use std::path::Path;

use latentmc_core::linalg::{cholesky, sigmoid};
use latentmc_core::{Matrix, Vector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{csv_err, io_err, Error, Result};

pub const LABEL_COLUMN: &str = "label";

/// Binary-labelled design matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub features: Matrix,
    pub labels: Vector,
    pub feature_names: Vec<String>,
}

impl Dataset {
    pub fn new(features: Matrix, labels: Vector) -> Result<Self> {
        if features.nrows() != labels.len() {
            return Err(Error::Data(format!(
                "{} feature rows but {} labels",
                features.nrows(),
                labels.len()
            )));
        }
        let feature_names = (0..features.ncols()).map(|j| format!("x{j}")).collect();
        Ok(Self {
            features,
            labels,
            feature_names,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.features.ncols()
    }
}

/// Parse a CSV with a header row, one column named `label` holding 0/1 and
/// every other column numeric.
pub fn read_dataset_from<R: io::Read>(reader: R) -> Result<Dataset, csv::Error> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let Some(label_idx) = headers.iter().position(|h| h == LABEL_COLUMN) else {
        return Err(csv::Error::from(io::Error::new(
            io::ErrorKind::InvalidData,
            "header has no `label` column",
        )));
    };
    let feature_names: Vec<String> = headers
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != label_idx)
        .map(|(_, h)| h.to_string())
        .collect();
    let mut values = Vec::new();
    let mut labels = Vec::new();
    for record in rdr.records() {
        let record = record?;
        for (i, field) in record.iter().enumerate() {
            let v: f64 = field.parse().map_err(|_| bad_field(&record, i, field))?;
            if i == label_idx {
                labels.push(v);
            } else {
                values.push(v);
            }
        }
    }
    let n = labels.len();
    let d = feature_names.len();
    Ok(Dataset {
        features: Matrix::from_row_slice(n, d, &values),
        labels: Vector::from_vec(labels),
        feature_names,
    })
}

fn bad_field(record: &csv::StringRecord, col: usize, field: &str) -> csv::Error {
    let line = record.position().map_or(0, |p| p.line());
    csv::Error::from(io::Error::new(
        io::ErrorKind::InvalidData,
        format!("line {line}, column {col}: `{field}` is not a number"),
    ))
}

pub fn read_dataset(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(io_err(path))?;
    let ds = read_dataset_from(file).map_err(csv_err(path))?;
    validate_labels(&ds).map_err(|e| Error::Data(format!("{}: {e}", path.display())))?;
    Ok(ds)
}

fn validate_labels(ds: &Dataset) -> Result<(), String> {
    match ds.labels.iter().position(|&y| y != 0.0 && y != 1.0) {
        Some(i) => Err(format!("row {i}: label {} is not 0 or 1", ds.labels[i])),
        None => Ok(()),
    }
}

pub fn write_dataset_to<W: io::Write>(writer: W, ds: &Dataset) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header: Vec<&str> = ds.feature_names.iter().map(String::as_str).collect();
    header.push(LABEL_COLUMN);
    w.write_record(&header)?;
    for (row, y) in ds.features.row_iter().zip(ds.labels.iter()) {
        let mut rec: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        rec.push(y.to_string());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_dataset(path: impl AsRef<Path>, ds: &Dataset) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(io_err(path))?;
    write_dataset_to(io::BufWriter::new(file), ds).map_err(csv_err(path))
}

/// Shape of the synthetic logistic regression problem.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub dim: usize,
    pub n_train: usize,
    pub n_test: usize,
    /// Number of leading equicorrelated feature columns.
    pub block: usize,
    /// Pairwise correlation inside the block.
    pub rho: f64,
    /// Standard deviation of the prior the true coefficients are drawn from.
    pub prior_sd: f64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            dim: 500,
            n_train: 550,
            n_test: 150,
            block: 50,
            rho: 0.85,
            prior_sd: 10.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticData {
    pub train: Dataset,
    pub test: Dataset,
    pub beta_true: Vector,
}

/// Draw `β ~ N(0, prior_sd² I)`, then `n_train + n_test` feature rows whose
/// first `block` columns are equicorrelated with correlation `rho` and the
/// rest iid standard normal, then labels `y ~ Bernoulli(sigmoid(xᵀβ))`.
/// The first `n_train` rows form the training set.
pub fn synth_logistic_data<R: Rng + ?Sized>(spec: &SynthSpec, rng: &mut R) -> Result<SyntheticData> {
    if spec.block > spec.dim {
        return Err(Error::Config(format!(
            "correlated block ({}) exceeds the dimension ({})",
            spec.block, spec.dim
        )));
    }
    if spec.block >= 2 {
        let lower = -1.0 / (spec.block as f64 - 1.0);
        if !(spec.rho > lower && spec.rho < 1.0) {
            return Err(Error::InvalidCorrelation {
                rho: spec.rho,
                block: spec.block,
                lower,
            });
        }
    }
    if !(spec.prior_sd > 0.0) {
        return Err(Error::Config("prior_sd must be positive".into()));
    }
    let b = spec.block;
    let corr = Matrix::from_fn(b, b, |i, j| if i == j { 1.0 } else { spec.rho });
    let factor = cholesky(&corr, "feature correlation")?.l();
    let normal = |rng: &mut R| -> f64 { StandardNormal.sample(rng) };

    let beta_true = Vector::from_fn(spec.dim, |_, _| spec.prior_sd * normal(rng));
    let n = spec.n_train + spec.n_test;
    let mut x = Matrix::zeros(n, spec.dim);
    for i in 0..n {
        let z = Vector::from_fn(b, |_, _| normal(rng));
        let correlated = &factor * z;
        for j in 0..spec.dim {
            x[(i, j)] = if j < b { correlated[j] } else { normal(rng) };
        }
    }
    let eta = &x * &beta_true;
    let y = Vector::from_fn(n, |i, _| {
        let u: f64 = rng.random();
        if u < sigmoid(eta[i]) {
            1.0
        } else {
            0.0
        }
    });
    let train = Dataset::new(x.rows(0, spec.n_train).into_owned(), y.rows(0, spec.n_train).into_owned())?;
    let test = Dataset::new(
        x.rows(spec.n_train, spec.n_test).into_owned(),
        y.rows(spec.n_train, spec.n_test).into_owned(),
    )?;
    Ok(SyntheticData {
        train,
        test,
        beta_true,
    })
}
