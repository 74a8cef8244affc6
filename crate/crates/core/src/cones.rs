//! Proper cones in `R^n`, their duals and products, and the order relations they induce
//! on vectors and matrices.
//!
//! Every cone is simplicial: `K = {G λ : λ ≥ 0}` for an invertible generator matrix `G`,
//! with the nonnegative orthant as the `G = I` case. In the coordinates `λ = G⁻¹ x` all
//! questions reduce to sign checks:
//!
//! * `x ∈ K` iff `G⁻¹ x ≥ 0`,
//! * `M K ⊆ K` iff `G⁻¹ M G ≥ 0` entrywise,
//! * `M` is cross-positive on `K` iff the off-diagonal entries of `G⁻¹ M G` are
//!   nonnegative. The dual generators are the rows of `G⁻¹`, so `(G⁻¹ M G)_{ji}` is the
//!   value `h_jᵀ M g_i` on the orthogonal extreme-ray pair `(g_i, h_j)`, `i ≠ j`.
//!
//! Comparisons use a relative tolerance: a quantity `q` counts as nonnegative when
//! `q ≥ -tol · max(1, |input|)`.

use std::fmt;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{self, ensure_dim, ensure_finite, ensure_square, scale_of};
use crate::riccati::BlockSystem;

pub const DEFAULT_TOL: f64 = 1e-9;
pub const DEFAULT_COND_CAP: f64 = 1e12;

#[derive(Debug, Clone, PartialEq)]
enum Kind {
    Orthant,
    Simplicial {
        generators: DMatrix<f64>,
        inverse: DMatrix<f64>,
    },
}

/// A proper cone: the nonnegative orthant or a simplicial cone.
#[derive(Debug, Clone, PartialEq)]
pub struct ConeSpec {
    dim: usize,
    kind: Kind,
    tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    InCone,
    InInterior,
    NotInCone,
}

/// Where the smallest coordinate was found.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Location {
    Coordinate(usize),
    Entry(usize, usize),
}

/// Outcome of a membership or order query.
///
/// `margin` is the smallest cone coordinate (signed), `worst` where it occurs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConeOrder {
    pub relation: Relation,
    pub margin: f64,
    pub worst: Option<Location>,
}

impl ConeOrder {
    fn classify(margin: f64, worst: Option<Location>, threshold: f64) -> Self {
        let relation = if margin > threshold {
            Relation::InInterior
        } else if margin >= -threshold {
            Relation::InCone
        } else {
            Relation::NotInCone
        };
        ConeOrder {
            relation,
            margin,
            worst,
        }
    }

    pub fn in_cone(&self) -> bool {
        self.relation != Relation::NotInCone
    }

    pub fn in_interior(&self) -> bool {
        self.relation == Relation::InInterior
    }
}

impl fmt::Display for ConeOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} (margin {:.3e}", self.relation, self.margin)?;
        match self.worst {
            Some(Location::Coordinate(i)) => write!(f, " at coordinate {i})"),
            Some(Location::Entry(i, j)) => write!(f, " at entry ({i}, {j}))"),
            None => write!(f, ")"),
        }
    }
}

/// An orthogonal extreme-ray pair `(g_generator, h_dual)` on which `h_dualᵀ A g_generator < 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneratorPair {
    pub generator: usize,
    pub dual_generator: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrossPositivity {
    pub cross_positive: bool,
    /// Smallest orthogonal-pair value (`+inf` in dimension one).
    pub margin: f64,
    /// Violating pairs, most negative first.
    pub violations: Vec<GeneratorPair>,
}

impl ConeSpec {
    pub fn orthant(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("cone dimension must be positive".into()));
        }
        Ok(ConeSpec {
            dim,
            kind: Kind::Orthant,
            tol: DEFAULT_TOL,
        })
    }

    pub fn simplicial(generators: DMatrix<f64>) -> Result<Self> {
        Self::simplicial_with_cap(generators, DEFAULT_COND_CAP)
    }

    /// Simplicial cone spanned by the columns of `generators`; fails when the condition
    /// number is not finite or exceeds `cond_cap`.
    pub fn simplicial_with_cap(generators: DMatrix<f64>, cond_cap: f64) -> Result<Self> {
        let dim = ensure_square(&generators)?;
        if dim == 0 {
            return Err(Error::InvalidArgument("cone dimension must be positive".into()));
        }
        ensure_finite(&generators, "cone generators")?;
        let cond = linalg::condition_number(&generators);
        if !cond.is_finite() || cond > cond_cap {
            return Err(Error::IllConditionedGenerators { cond, cap: cond_cap });
        }
        let inverse = linalg::inverse(&generators, "cone generator matrix")?;
        Ok(ConeSpec {
            dim,
            kind: Kind::Simplicial {
                generators,
                inverse,
            },
            tol: DEFAULT_TOL,
        })
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol.abs();
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn is_orthant(&self) -> bool {
        matches!(self.kind, Kind::Orthant)
    }

    /// Generator matrix `G` (the identity for the orthant).
    pub fn generators(&self) -> DMatrix<f64> {
        match &self.kind {
            Kind::Orthant => DMatrix::identity(self.dim, self.dim),
            Kind::Simplicial { generators, .. } => generators.clone(),
        }
    }

    /// `G⁻¹`, whose rows are the extreme rays of the dual cone.
    pub fn inverse_generators(&self) -> DMatrix<f64> {
        match &self.kind {
            Kind::Orthant => DMatrix::identity(self.dim, self.dim),
            Kind::Simplicial { inverse, .. } => inverse.clone(),
        }
    }

    /// The same cone described with an explicit identity generator matrix.
    pub fn as_simplicial(&self) -> ConeSpec {
        match &self.kind {
            Kind::Orthant => ConeSpec {
                dim: self.dim,
                kind: Kind::Simplicial {
                    generators: DMatrix::identity(self.dim, self.dim),
                    inverse: DMatrix::identity(self.dim, self.dim),
                },
                tol: self.tol,
            },
            Kind::Simplicial { .. } => self.clone(),
        }
    }

    /// Sum of the generators, a canonical interior point.
    pub fn interior_point(&self) -> DVector<f64> {
        match &self.kind {
            Kind::Orthant => DVector::from_element(self.dim, 1.0),
            Kind::Simplicial { generators, .. } => generators.column_sum(),
        }
    }

    /// Cone coordinates `λ = G⁻¹ x`.
    pub fn coordinates(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        ensure_dim(self.dim, x.len(), "vector vs cone")?;
        Ok(match &self.kind {
            Kind::Orthant => x.clone(),
            Kind::Simplicial { inverse, .. } => inverse * x,
        })
    }

    /// `G⁻¹ M G`: the matrix of `M` acting on cone coordinates.
    pub fn conjugate(&self, m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        ensure_square(m)?;
        ensure_dim(self.dim, m.nrows(), "matrix vs cone")?;
        Ok(match &self.kind {
            Kind::Orthant => m.clone(),
            Kind::Simplicial {
                generators,
                inverse,
            } => inverse * m * generators,
        })
    }

    pub fn member(&self, x: &DVector<f64>) -> Result<ConeOrder> {
        let lambda = self.coordinates(x)?;
        let (worst, margin) = lambda
            .iter()
            .copied()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .map_or((None, f64::INFINITY), |(i, v)| {
                (Some(Location::Coordinate(i)), v)
            });
        Ok(ConeOrder::classify(
            margin,
            worst,
            self.tol * scale_of(x.iter()),
        ))
    }

    pub fn dual(&self) -> ConeSpec {
        match &self.kind {
            Kind::Orthant => self.clone(),
            Kind::Simplicial {
                generators,
                inverse,
            } => ConeSpec {
                dim: self.dim,
                kind: Kind::Simplicial {
                    generators: inverse.transpose(),
                    inverse: generators.transpose(),
                },
                tol: self.tol,
            },
        }
    }

    /// `x ⪯_K y`, i.e. `y - x ∈ K`.
    pub fn leq_vec(&self, x: &DVector<f64>, y: &DVector<f64>) -> Result<ConeOrder> {
        ensure_dim(x.len(), y.len(), "compared vectors")?;
        self.member(&(y - x))
    }

    /// K-nonnegativity `M K ⊆ K`.
    pub fn matrix_nonneg(&self, m: &DMatrix<f64>) -> Result<ConeOrder> {
        let coords = self.conjugate(m)?;
        let mut margin = f64::INFINITY;
        let mut worst = None;
        for j in 0..coords.ncols() {
            for i in 0..coords.nrows() {
                let v = coords[(i, j)];
                if v < margin {
                    margin = v;
                    worst = Some(Location::Entry(i, j));
                }
            }
        }
        Ok(ConeOrder::classify(
            margin,
            worst,
            self.tol * scale_of(m.iter()),
        ))
    }

    /// `m1 ⪯_K m2` in the order induced by `π(K)`.
    pub fn matrix_leq(&self, m1: &DMatrix<f64>, m2: &DMatrix<f64>) -> Result<ConeOrder> {
        if m1.shape() != m2.shape() {
            return Err(Error::DimensionMismatch {
                expected: m1.nrows(),
                found: m2.nrows(),
                context: "compared matrices",
            });
        }
        self.matrix_nonneg(&(m2 - m1))
    }

    pub fn cross_positive(&self, a: &DMatrix<f64>) -> Result<CrossPositivity> {
        let coords = self.conjugate(a)?;
        let threshold = self.tol * scale_of(a.iter());
        let mut margin = f64::INFINITY;
        let mut violations = Vec::new();
        for i in 0..self.dim {
            for j in 0..self.dim {
                if i == j {
                    continue;
                }
                // (G⁻¹ A G)_{ji} = h_jᵀ A g_i
                let value = coords[(j, i)];
                margin = margin.min(value);
                if value < -threshold {
                    violations.push(GeneratorPair {
                        generator: i,
                        dual_generator: j,
                        value,
                    });
                }
            }
        }
        violations.sort_by(|a, b| a.value.total_cmp(&b.value));
        Ok(CrossPositivity {
            cross_positive: violations.is_empty(),
            margin,
            violations,
        })
    }

    pub fn product(&self) -> ProductCone {
        ProductCone {
            factor: self.clone(),
        }
    }
}

/// `K × K ⊂ R^{2n}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductCone {
    pub factor: ConeSpec,
}

impl ProductCone {
    /// The product as a simplicial cone with block-diagonal generators.
    pub fn as_cone(&self) -> ConeSpec {
        let n = self.factor.dim;
        match &self.factor.kind {
            Kind::Orthant => ConeSpec {
                dim: 2 * n,
                kind: Kind::Orthant,
                tol: self.factor.tol,
            },
            Kind::Simplicial {
                generators,
                inverse,
            } => ConeSpec {
                dim: 2 * n,
                kind: Kind::Simplicial {
                    generators: linalg::block_diag(generators, generators),
                    inverse: linalg::block_diag(inverse, inverse),
                },
                tol: self.factor.tol,
            },
        }
    }

    pub fn dual(&self) -> ProductCone {
        self.factor.dual().product()
    }

    pub fn interior_point(&self) -> DVector<f64> {
        let p = self.factor.interior_point();
        linalg::stack(&p, &p)
    }
}

/// Per-block verdicts for cross-positivity of `L = [[A, B], [C, D]]` on `K × K`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockCrossPositivity {
    pub verdict: bool,
    pub a: CrossPositivity,
    pub d: CrossPositivity,
    pub b: ConeOrder,
    pub c: ConeOrder,
    /// Verdict of the direct test of `L` on the product cone.
    pub direct: bool,
}

impl BlockCrossPositivity {
    pub fn failing_blocks(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if !self.a.cross_positive {
            out.push("A (not cross-positive)");
        }
        if !self.b.in_cone() {
            out.push("B (not K-nonnegative)");
        }
        if !self.c.in_cone() {
            out.push("C (not K-nonnegative)");
        }
        if !self.d.cross_positive {
            out.push("D (not cross-positive)");
        }
        out
    }

    /// Whether the block decomposition and the direct product-cone test agree.
    pub fn consistent(&self) -> bool {
        self.verdict == self.direct
    }
}

/// Cross-positivity of `L` on `K × K` through its blocks: `A`, `D` cross-positive and
/// `B`, `C` K-nonnegative. The direct `2n`-dimensional test is evaluated alongside.
pub fn block_cross_positive(cone: &ConeSpec, sys: &BlockSystem) -> Result<BlockCrossPositivity> {
    ensure_dim(cone.dim(), sys.n(), "system vs cone")?;
    let a = cone.cross_positive(sys.a())?;
    let d = cone.cross_positive(sys.d())?;
    let b = cone.matrix_nonneg(sys.b())?;
    let c = cone.matrix_nonneg(sys.c())?;
    let verdict = a.cross_positive && d.cross_positive && b.in_cone() && c.in_cone();
    let direct = cone.product().as_cone().cross_positive(sys.l())?.cross_positive;
    Ok(BlockCrossPositivity {
        verdict,
        a,
        d,
        b,
        c,
        direct,
    })
}
