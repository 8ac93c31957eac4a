//! JSON documents exchanged with the command line: spaces, tuples, subspaces and reports.
//! Scalars are strings (`"17"`, `"3/7"`); plain JSON integers are accepted on input.

use serde::{Deserialize, Serialize};

use crate::bilinear::{split_symmetric_gram, standard_skew_gram, BilinearSpace, FormKind};
use crate::error::{Error, Result};
use crate::field::{Field, FieldSpec};
use crate::matrix::Matrix;
use crate::subspace::Subspace;

/// A scalar as written in input documents.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Text(String),
    Int(i64),
}

impl Entry {
    fn as_text(&self) -> String {
        match self {
            Entry::Text(s) => s.clone(),
            Entry::Int(i) => i.to_string(),
        }
    }
}

impl From<String> for Entry {
    fn from(s: String) -> Self {
        Entry::Text(s)
    }
}

pub type MatrixJson = Vec<Vec<Entry>>;

pub fn matrix_to_json<F: Field>(m: &Matrix<F>) -> MatrixJson {
    m.to_strings()
        .into_iter()
        .map(|r| r.into_iter().map(Entry::Text).collect())
        .collect()
}

/// Parses a matrix with `cols` columns; every row must have that length.
pub fn matrix_from_json<F: Field>(field: &F, cols: usize, rows: &MatrixJson) -> Result<Matrix<F>> {
    if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != cols) {
        return Err(Error::DimensionMismatch(format!(
            "row {i} has {} entries, expected {cols}",
            r.len()
        )));
    }
    let text: Vec<Vec<String>> = rows
        .iter()
        .map(|r| r.iter().map(Entry::as_text).collect())
        .collect();
    Matrix::from_strings(field.clone(), cols, &text)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GramJson {
    /// `"identity"`, `"standard_skew"` or `"split"`.
    Named(String),
    Explicit(MatrixJson),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpaceJson {
    pub field: FieldSpec,
    pub n: usize,
    pub form: FormKind,
    /// Defaults to `"identity"` (symmetric) or `"standard_skew"` (skew).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gram: Option<GramJson>,
}

impl SpaceJson {
    pub fn build<F: Field>(&self, field: &F) -> Result<BilinearSpace<F>> {
        if field.spec() != self.field {
            return Err(Error::InvalidField(format!(
                "document is over {}, requested {}",
                self.field,
                field.spec()
            )));
        }
        let n = self.n;
        if n == 0 {
            return Err(Error::InvalidSpace("n must be positive".into()));
        }
        let wants_skew_default = matches!(&self.gram, Some(GramJson::Named(g)) if g == "standard_skew")
            || (self.gram.is_none() && self.form == FormKind::Skew);
        if wants_skew_default && n % 2 == 1 {
            return Err(Error::InvalidSpace("gram: skew forms need even dimension".into()));
        }
        let gram = match &self.gram {
            None => match self.form {
                FormKind::Symmetric => Matrix::identity(field.clone(), n),
                FormKind::Skew => standard_skew_gram(field.clone(), n),
            },
            Some(GramJson::Named(name)) => match name.as_str() {
                "identity" => Matrix::identity(field.clone(), n),
                "standard_skew" => standard_skew_gram(field.clone(), n),
                "split" => split_symmetric_gram(field.clone(), n),
                other => return Err(Error::InvalidSpace(format!("gram: unknown name '{other}'"))),
            },
            Some(GramJson::Explicit(rows)) => {
                if rows.len() != n {
                    return Err(Error::InvalidSpace(format!(
                        "gram: {} rows for n = {n}",
                        rows.len()
                    )));
                }
                matrix_from_json(field, n, rows)?
            }
        };
        BilinearSpace::new(self.form, gram)
    }

    pub fn from_space<F: Field>(space: &BilinearSpace<F>) -> Self {
        SpaceJson {
            field: space.field().spec(),
            n: space.n(),
            form: space.kind(),
            gram: Some(GramJson::Explicit(matrix_to_json(space.gram()))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProfileJson {
    pub d: usize,
    pub l: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TupleJson {
    pub space: SpaceJson,
    pub tuple: Vec<MatrixJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w_basis: Option<MatrixJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile: Option<ProfileJson>,
}

impl TupleJson {
    pub fn matrices<F: Field>(&self, field: &F) -> Result<Vec<Matrix<F>>> {
        self.tuple
            .iter()
            .enumerate()
            .map(|(i, m)| {
                if m.len() != self.space.n {
                    return Err(Error::DimensionMismatch(format!(
                        "matrix {i} has {} rows, expected {}",
                        m.len(),
                        self.space.n
                    )));
                }
                matrix_from_json(field, self.space.n, m)
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessJson {
    pub d: usize,
    pub l: usize,
    pub basis: MatrixJson,
}

impl WitnessJson {
    pub fn from_subspace<F: Field>(space: &BilinearSpace<F>, w: &Subspace<F>) -> Result<Self> {
        let (d, l) = space.profile(w)?;
        Ok(WitnessJson {
            d,
            l,
            basis: matrix_to_json(w.basis()),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckReport {
    pub generates: bool,
    pub closure_dim: usize,
    pub witnesses: Vec<WitnessJson>,
    /// Outcome of the witness search: `"complete"`, `"not requested"`, or why it was skipped.
    pub witness_search: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReduceInput {
    pub space: SpaceJson,
    pub subspace: MatrixJson,
}

impl ReduceInput {
    pub fn subspace<F: Field>(&self, field: &F) -> Result<Subspace<F>> {
        let m = matrix_from_json(field, self.space.n, &self.subspace)?;
        Ok(Subspace::row_space(&m))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReduceOutput {
    pub basis: MatrixJson,
    pub gram: MatrixJson,
    pub d: usize,
    pub l: usize,
    pub w_indices: Vec<usize>,
    pub layout: crate::bilinear::Layout,
    /// Set when weak mode kept non-unit norms in the middle block.
    pub weak: bool,
}

/// Reads a document, naming the offending path in schema errors.
pub fn parse_json<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}
