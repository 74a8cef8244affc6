use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{self, ensure_dim, ensure_finite, ensure_square};

/// Coefficients of `X B X + D X + X A + C = 0` together with `L = [[A, B], [C, D]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockSystem {
    a: DMatrix<f64>,
    b: DMatrix<f64>,
    c: DMatrix<f64>,
    d: DMatrix<f64>,
    l: DMatrix<f64>,
}

impl BlockSystem {
    pub fn new(a: DMatrix<f64>, b: DMatrix<f64>, c: DMatrix<f64>, d: DMatrix<f64>) -> Result<Self> {
        let n = ensure_square(&a)?;
        if n == 0 {
            return Err(Error::InvalidArgument("blocks must be non-empty".into()));
        }
        for (m, what) in [(&b, "B"), (&c, "C"), (&d, "D")] {
            ensure_dim(n, ensure_square(m)?, what)?;
        }
        for (m, what) in [(&a, "A"), (&b, "B"), (&c, "C"), (&d, "D")] {
            ensure_finite(m, what)?;
        }
        let l = linalg::assemble_blocks(&a, &b, &c, &d);
        Ok(BlockSystem { a, b, c, d, l })
    }

    /// Splits a `2n × 2n` matrix into its four blocks.
    pub fn from_l(l: &DMatrix<f64>) -> Result<Self> {
        let m = ensure_square(l)?;
        if m % 2 != 0 {
            return Err(Error::InvalidArgument(format!("L has odd dimension {m}")));
        }
        let n = m / 2;
        BlockSystem::new(
            l.view((0, 0), (n, n)).into_owned(),
            l.view((0, n), (n, n)).into_owned(),
            l.view((n, 0), (n, n)).into_owned(),
            l.view((n, n), (n, n)).into_owned(),
        )
    }

    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn b(&self) -> &DMatrix<f64> {
        &self.b
    }

    pub fn c(&self) -> &DMatrix<f64> {
        &self.c
    }

    pub fn d(&self) -> &DMatrix<f64> {
        &self.d
    }

    pub fn l(&self) -> &DMatrix<f64> {
        &self.l
    }

    /// The system `Z Bᵀ Z + Aᵀ Z + Z Dᵀ + Cᵀ = 0` satisfied by `Xᵀ`, i.e. blocks
    /// `(Dᵀ, Bᵀ, Cᵀ, Aᵀ)`. Its `L` is a permutation similarity of `Lᵀ`.
    pub fn transpose_dual(&self) -> BlockSystem {
        BlockSystem::new(
            self.d.transpose(),
            self.b.transpose(),
            self.c.transpose(),
            self.a.transpose(),
        )
        .expect("transposed blocks keep their shapes")
    }

    /// Blocks mapped by `M ↦ G M G⁻¹`.
    pub fn conjugated(&self, g: &DMatrix<f64>, g_inv: &DMatrix<f64>) -> Result<BlockSystem> {
        ensure_dim(self.n(), ensure_square(g)?, "conjugating matrix")?;
        let f = |m: &DMatrix<f64>| g * m * g_inv;
        BlockSystem::new(f(&self.a), f(&self.b), f(&self.c), f(&self.d))
    }

    /// `‖X B X + D X + X A + C‖_F`.
    pub fn residual(&self, x: &DMatrix<f64>) -> f64 {
        residual(self, x)
    }
}

/// Frobenius norm of the Riccati residual.
pub fn residual(sys: &BlockSystem, x: &DMatrix<f64>) -> f64 {
    (x * &sys.b * x + &sys.d * x + x * &sys.a + &sys.c).norm()
}

/// `(‖A‖ + ‖B‖‖X‖ + ‖C‖ + ‖D‖) · max(1, ‖X‖)`, the magnitude the residual is measured against.
pub fn residual_scale(sys: &BlockSystem, x: &DMatrix<f64>) -> f64 {
    let xn = x.norm();
    (sys.a.norm() + sys.b.norm() * xn + sys.c.norm() + sys.d.norm()) * xn.max(1.0)
}
