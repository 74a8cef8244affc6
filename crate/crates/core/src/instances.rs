//! Seeded generation of hypothesis-satisfying problem instances, plus the closed-form
//! scalar oracle.
//!
//! The generator is ChaCha8 seeded from the recipe, so an instance is a pure function
//! of its recipe on every platform.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::cones::ConeSpec;
use crate::error::{Error, Result};
use crate::linalg;
use crate::riccati::BlockSystem;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InstanceKind {
    OrthantMMatrix,
    ConjugatedCone,
    Scalar,
}

impl InstanceKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            InstanceKind::OrthantMMatrix => "orthant-m-matrix",
            InstanceKind::ConjugatedCone => "conjugated-cone",
            InstanceKind::Scalar => "scalar",
        }
    }
}

impl fmt::Display for InstanceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for InstanceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "orthant-m-matrix" => Ok(InstanceKind::OrthantMMatrix),
            "conjugated-cone" => Ok(InstanceKind::ConjugatedCone),
            "scalar" => Ok(InstanceKind::Scalar),
            other => Err(Error::InvalidArgument(format!("unknown instance kind `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InstanceRecipe {
    pub seed: u64,
    pub n: usize,
    pub kind: InstanceKind,
    /// Diagonal dominance margin of `L`.
    pub shift: f64,
    /// Largest admissible condition number of the generator matrix.
    pub cond_cap: f64,
}

impl InstanceRecipe {
    pub fn new(kind: InstanceKind, n: usize, seed: u64) -> Self {
        InstanceRecipe {
            seed,
            n: if kind == InstanceKind::Scalar { 1 } else { n },
            kind,
            shift: 1.0,
            cond_cap: 10.0,
        }
    }

    pub fn with_shift(mut self, shift: f64) -> Self {
        self.shift = shift;
        self
    }

    pub fn with_cond_cap(mut self, cond_cap: f64) -> Self {
        self.cond_cap = cond_cap;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidArgument("n must be at least 1".into()));
        }
        if self.kind == InstanceKind::Scalar && self.n != 1 {
            return Err(Error::InvalidArgument("scalar instances have n = 1".into()));
        }
        if !(self.shift.is_finite() && self.shift > 0.0) {
            return Err(Error::InvalidArgument(format!("shift must be positive, got {}", self.shift)));
        }
        if !(self.cond_cap.is_finite() && self.cond_cap >= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "cond_cap must be at least 1, got {}",
                self.cond_cap
            )));
        }
        Ok(())
    }

    fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }
}

/// `L` with the given off-diagonal entries and diagonal `-(row sum of off-diagonals) - shift`.
/// Diagonal entries of `offdiag` are ignored.
pub fn mmatrix_from_offdiag(offdiag: &DMatrix<f64>, shift: f64) -> Result<BlockSystem> {
    let m = offdiag.nrows();
    let mut l = offdiag.clone();
    for i in 0..m {
        l[(i, i)] = 0.0;
        let row_sum: f64 = l.row(i).iter().sum();
        l[(i, i)] = -row_sum - shift;
    }
    BlockSystem::from_l(&l)
}

/// `-L` is a nonsingular M-matrix: off-diagonals uniform in `[0, 1)`, strict diagonal
/// dominance by `shift`.
pub fn gen_orthant_mmatrix(recipe: &InstanceRecipe) -> Result<BlockSystem> {
    recipe.validate()?;
    let mut rng = recipe.rng();
    orthant_mmatrix_from(&mut rng, recipe.n, recipe.shift)
}

fn orthant_mmatrix_from(rng: &mut ChaCha8Rng, n: usize, shift: f64) -> Result<BlockSystem> {
    let m = 2 * n;
    let mut offdiag = DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            if i != j {
                offdiag[(i, j)] = rng.random::<f64>();
            }
        }
    }
    mmatrix_from_offdiag(&offdiag, shift)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConjugatedInstance {
    pub cone: ConeSpec,
    pub sys: BlockSystem,
    /// The orthant instance the blocks were conjugated from.
    pub orthant_twin: BlockSystem,
    pub generators: DMatrix<f64>,
}

impl ConjugatedInstance {
    /// Maps an orthant-twin solution to this cone: `X ↦ G X G⁻¹`.
    pub fn lift(&self, x_twin: &DMatrix<f64>) -> DMatrix<f64> {
        &self.generators * x_twin * self.cone.inverse_generators()
    }
}

fn random_orthogonal(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    let gauss = DMatrix::<f64>::from_fn(n, n, |_, _| rng.sample(StandardNormal));
    let qr = gauss.qr();
    let mut q = qr.q();
    let r = qr.r();
    // sign fix so the factor is Haar-distributed and does not depend on QR conventions
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// Random `G = U Σ Vᵀ` with singular values log-uniform in `[1, cond_cap]`.
fn random_generators(rng: &mut ChaCha8Rng, n: usize, cond_cap: f64) -> DMatrix<f64> {
    let u = random_orthogonal(rng, n);
    let v = random_orthogonal(rng, n);
    let log_cap = cond_cap.ln();
    let sigma = DMatrix::from_diagonal(&nalgebra::DVector::from_fn(n, |_, _| {
        (rng.random::<f64>() * log_cap).exp()
    }));
    u * sigma * v.transpose()
}

/// An orthant M-matrix instance transported to `Simplicial(G)` by `M ↦ G M G⁻¹`.
pub fn gen_conjugated(recipe: &InstanceRecipe) -> Result<ConjugatedInstance> {
    recipe.validate()?;
    let mut rng = recipe.rng();
    let orthant_twin = orthant_mmatrix_from(&mut rng, recipe.n, recipe.shift)?;
    let g = random_generators(&mut rng, recipe.n, recipe.cond_cap);
    // the cap is met by construction; the slack absorbs rounding in the SVD estimate
    let cone = ConeSpec::simplicial_with_cap(g.clone(), recipe.cond_cap * (1.0 + 1e-9))?;
    let sys = orthant_twin.conjugated(&g, &cone.inverse_generators())?;
    Ok(ConjugatedInstance {
        cone,
        sys,
        orthant_twin,
        generators: g,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub recipe: InstanceRecipe,
    pub cone: ConeSpec,
    pub sys: BlockSystem,
}

pub fn generate(recipe: &InstanceRecipe) -> Result<Instance> {
    let (cone, sys) = match recipe.kind {
        InstanceKind::OrthantMMatrix | InstanceKind::Scalar => {
            (ConeSpec::orthant(recipe.n)?, gen_orthant_mmatrix(recipe)?)
        }
        InstanceKind::ConjugatedCone => {
            let inst = gen_conjugated(recipe)?;
            (inst.cone, inst.sys)
        }
    };
    Ok(Instance {
        recipe: *recipe,
        cone,
        sys,
    })
}

/// The generator used for every seeded draw in this module.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random simplicial cone with generator condition number at most `cond_cap`.
pub fn random_cone(rng: &mut ChaCha8Rng, n: usize, cond_cap: f64) -> Result<ConeSpec> {
    let g = random_generators(rng, n, cond_cap.max(1.0));
    ConeSpec::simplicial_with_cap(g, cond_cap.max(1.0) * (1.0 + 1e-9))
}

/// Matrix with off-diagonals uniform in `[0, 1)` and diagonal entries
/// `-(row sum) + δ_i`, `δ_i` uniform in `diag_offset`. With `diag_offset = (lo, hi)` the
/// spectral abscissa lies in `[lo, hi]`.
pub fn random_metzler(rng: &mut ChaCha8Rng, n: usize, diag_offset: (f64, f64)) -> DMatrix<f64> {
    let mut m = DMatrix::<f64>::from_fn(n, n, |i, j| if i == j { 0.0 } else { rng.random::<f64>() });
    let (lo, hi) = diag_offset;
    for i in 0..n {
        let row_sum: f64 = m.row(i).iter().sum();
        m[(i, i)] = -row_sum + lo + (hi - lo) * rng.random::<f64>();
    }
    m
}

/// `G N G⁻¹` for the cone's generators: maps the orthant property of `N` to `cone`.
pub fn transport(cone: &ConeSpec, n: &DMatrix<f64>) -> DMatrix<f64> {
    cone.generators() * n * cone.inverse_generators()
}

/// Cross-positive on `cone` (a transported Metzler matrix).
pub fn random_cross_positive(
    rng: &mut ChaCha8Rng,
    cone: &ConeSpec,
    diag_offset: (f64, f64),
) -> DMatrix<f64> {
    let n = random_metzler(rng, cone.dim(), diag_offset);
    transport(cone, &n)
}

/// K-nonnegative on `cone`, entries of the orthant preimage uniform in `[0, 1)`.
pub fn random_k_nonnegative(rng: &mut ChaCha8Rng, cone: &ConeSpec) -> DMatrix<f64> {
    let d = cone.dim();
    let n = DMatrix::<f64>::from_fn(d, d, |_, _| rng.random::<f64>());
    transport(cone, &n)
}

/// Not cross-positive on `cone`: a transported Metzler matrix with one off-diagonal
/// entry replaced by a value in `[-1, -0.5)`. Needs `dim >= 2`.
pub fn random_non_cross_positive(rng: &mut ChaCha8Rng, cone: &ConeSpec) -> DMatrix<f64> {
    let d = cone.dim();
    assert!(d >= 2, "cross-positivity is vacuous in dimension one");
    let mut n = random_metzler(rng, d, (-1.0, 1.0));
    let i = rng.random_range(0..d);
    let mut j = rng.random_range(0..d - 1);
    if j >= i {
        j += 1;
    }
    n[(i, j)] = -0.5 - 0.5 * rng.random::<f64>();
    transport(cone, &n)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarRoot {
    pub x_star: f64,
    pub exists: bool,
}

/// Stabilizing nonnegative root of `b x² + (a + d) x + c = 0` for `b, c ≥ 0`: the
/// smallest `x ≥ 0` with `a + b x < 0` and `d + b x < 0`. When `b = 0` the equation is
/// linear, `x = -c / (a + d)`.
pub fn scalar_oracle(a: f64, b: f64, c: f64, d: f64) -> Result<ScalarRoot> {
    if b < 0.0 || c < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "scalar oracle needs b, c >= 0 (b = {b}, c = {c})"
        )));
    }
    let none = ScalarRoot {
        x_star: f64::NAN,
        exists: false,
    };
    let stabilizing = |x: f64| x >= 0.0 && a + b * x < 0.0 && d + b * x < 0.0;
    let trace = a + d;

    if b == 0.0 {
        if trace >= 0.0 {
            return Ok(none);
        }
        let x = -c / trace;
        return Ok(if stabilizing(x) {
            ScalarRoot {
                x_star: x,
                exists: true,
            }
        } else {
            none
        });
    }

    let disc = trace * trace - 4.0 * b * c;
    if disc < 0.0 {
        return Ok(none);
    }
    // cancellation-free pair of roots
    let q = -0.5 * (trace + trace.signum() * disc.sqrt());
    let mut roots = vec![q / b];
    if q != 0.0 {
        roots.push(c / q);
    }
    Ok(roots
        .into_iter()
        .filter(|&x| stabilizing(x))
        .min_by(f64::total_cmp)
        .map_or(none, |x| ScalarRoot {
            x_star: x,
            exists: true,
        }))
}

/// Condition number helper re-exported for callers checking `cond_cap`.
pub fn generator_condition(g: &DMatrix<f64>) -> f64 {
    linalg::condition_number(g)
}
