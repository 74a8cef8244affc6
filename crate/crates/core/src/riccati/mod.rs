//! The nonsymmetric algebraic Riccati equation `X B X + D X + X A + C = 0`.

mod solve;
mod system;
mod verify;

pub use solve::{
    check_hypotheses, fixed_point_step, solve, transpose_dual_solve, Certificate, ConeVerdicts,
    SolveError, SolveOptions, Solution, TransposeDuality, DEFAULT_MAX_ITER, DEFAULT_TOL,
    TRANSPOSE_TOL,
};
pub use system::{residual, residual_scale, BlockSystem};
pub use verify::{
    check_sufficiency, verify_necessity, verify_necessity_default, verify_sufficiency,
    NecessityCheck, SufficiencyReport, INVERSE_MATCH_TOL, VERIFY_TOL,
};
