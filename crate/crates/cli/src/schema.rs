//! On-disk JSON formats for problems and reports.

use std::fs;
use std::path::Path;

use cone_riccati::instances::{InstanceKind, InstanceRecipe};
use cone_riccati::linalg::{from_rows, to_rows};
use cone_riccati::{BlockSystem, ConeSpec};
use nalgebra::{DMatrix, DVector};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const SCHEMA_VERSION: &str = "1";

pub type Rows = Vec<Vec<f64>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum ConeJson {
    Orthant { dim: usize },
    /// Rows of the generator matrix; generators are its columns.
    Simplicial { generators: Rows },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecipeJson {
    pub kind: String,
    pub n: usize,
    pub seed: u64,
    pub shift: f64,
    pub cond_cap: f64,
}

impl From<&InstanceRecipe> for RecipeJson {
    fn from(r: &InstanceRecipe) -> Self {
        RecipeJson {
            kind: r.kind.to_string(),
            n: r.n,
            seed: r.seed,
            shift: r.shift,
            cond_cap: r.cond_cap,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub schema_version: String,
    pub n: usize,
    pub cone: ConeJson,
    #[serde(rename = "A")]
    pub a: Rows,
    #[serde(rename = "B")]
    pub b: Rows,
    #[serde(rename = "C")]
    pub c: Rows,
    #[serde(rename = "D")]
    pub d: Rows,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub recipe: Option<RecipeJson>,
}

impl ProblemFile {
    pub fn new(cone: &ConeSpec, sys: &BlockSystem, recipe: Option<&InstanceRecipe>) -> Self {
        ProblemFile {
            schema_version: SCHEMA_VERSION.into(),
            n: sys.n(),
            cone: cone_json(cone),
            a: to_rows(sys.a()),
            b: to_rows(sys.b()),
            c: to_rows(sys.c()),
            d: to_rows(sys.d()),
            recipe: recipe.map(RecipeJson::from),
        }
    }

    /// Validates shapes and values and builds the cone and block system.
    pub fn build(&self) -> Result<(ConeSpec, BlockSystem), CliError> {
        check_version(&self.schema_version)?;
        let n = self.n;
        if n == 0 {
            return Err(CliError::Schema("n must be positive".into()));
        }
        let block = |name: &str, rows: &Rows| -> Result<DMatrix<f64>, CliError> {
            square_matrix(rows, n).map_err(|e| CliError::Schema(format!("block {name}: {e}")))
        };
        let sys = BlockSystem::new(
            block("A", &self.a)?,
            block("B", &self.b)?,
            block("C", &self.c)?,
            block("D", &self.d)?,
        )?;
        let cone = match &self.cone {
            ConeJson::Orthant { dim } => {
                if *dim != n {
                    return Err(CliError::Schema(format!("cone dim {dim} differs from n = {n}")));
                }
                ConeSpec::orthant(n)?
            }
            ConeJson::Simplicial { generators } => {
                let g = square_matrix(generators, n)
                    .map_err(|e| CliError::Schema(format!("cone generators: {e}")))?;
                ConeSpec::simplicial(g)?
            }
        };
        if let Some(recipe) = &self.recipe {
            recipe
                .kind
                .parse::<InstanceKind>()
                .map_err(|e| CliError::Schema(format!("recipe: {e}")))?;
        }
        Ok((cone, sys))
    }
}

pub fn cone_json(cone: &ConeSpec) -> ConeJson {
    if cone.is_orthant() {
        ConeJson::Orthant { dim: cone.dim() }
    } else {
        ConeJson::Simplicial {
            generators: to_rows(&cone.generators()),
        }
    }
}

fn square_matrix(rows: &Rows, n: usize) -> Result<DMatrix<f64>, String> {
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(format!("expected {n} rows of {n} entries"));
    }
    if rows.iter().flatten().any(|v| !v.is_finite()) {
        return Err("non-finite entry".into());
    }
    from_rows(rows).map_err(|e| e.to_string())
}

pub fn check_version(found: &str) -> Result<(), CliError> {
    if found == SCHEMA_VERSION {
        Ok(())
    } else {
        Err(CliError::Schema(format!(
            "unsupported schema_version \"{found}\" (this build reads \"{SCHEMA_VERSION}\")"
        )))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Certificate,
    EquivalenceNegative,
    HypothesisFailure,
    NonConverged,
    InconclusiveAtMargin,
    NumericalFailure,
}

/// Complex eigenvalue as `[re, im]`.
pub type Eig = [f64; 2];

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Eigenvalues {
    #[serde(rename = "L", default, skip_serializing_if = "Option::is_none")]
    pub l: Option<Vec<Eig>>,
    #[serde(rename = "A+BX", default, skip_serializing_if = "Option::is_none")]
    pub closed_loop_a: Option<Vec<Eig>>,
    #[serde(rename = "D+XB", default, skip_serializing_if = "Option::is_none")]
    pub closed_loop_d: Option<Vec<Eig>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessJson {
    pub v1: Vec<f64>,
    pub v2: Vec<f64>,
    pub u1: Vec<f64>,
    pub u2: Vec<f64>,
    /// `v2 - D⁻¹ u2`
    pub bound_s: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceJson {
    pub len: usize,
    pub monotone: bool,
    pub bounded: bool,
    pub converged: bool,
    pub stalled: bool,
    pub cauchy_tail: f64,
    pub gaps: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub iterates: Option<Vec<Rows>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NecessityJson {
    pub l_stable_implied: bool,
    pub block_inverse_nonneg: bool,
    pub relative_mismatch: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptionsJson {
    pub tol: f64,
    pub max_iter: usize,
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub solve_seconds: f64,
    pub total_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportFile {
    pub schema_version: String,
    pub verdict: Verdict,
    pub message: String,
    pub n: usize,
    #[serde(rename = "X", default, skip_serializing_if = "Option::is_none")]
    pub x: Option<Rows>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residual: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
    pub eigenvalues: Eigenvalues,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub failing_blocks: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<WitnessJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<TraceJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub necessity: Option<NecessityJson>,
    pub options: OptionsJson,
    pub timings: Timings,
}

pub fn eig_list(values: &[nalgebra::Complex<f64>]) -> Vec<Eig> {
    values.iter().map(|z| [z.re, z.im]).collect()
}

pub fn vec_list(v: &DVector<f64>) -> Vec<f64> {
    v.iter().copied().collect()
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|e| CliError::Schema(format!("{}: {e}", path.display())))
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("report types serialize");
    text.push('\n');
    text
}

pub fn write_text(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(path) => fs::write(path, text).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
