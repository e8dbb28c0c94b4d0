//! Stationary finite-element solver for viscoelastic flow in two dimensions,
//! built on a log-conformation formulation of the constitutive equation.
//!
//! The conformation tensor `σ` of an Oldroyd-B or Giesekus fluid must stay
//! symmetric positive definite, but discretizations of `σ` itself lose that
//! property and blow up well before interesting Weissenberg numbers. This
//! crate instead discretizes `Ψ = log σ`, for which positivity is automatic
//! (`σ = e^Ψ`), and works the exponential map into residual, Jacobian and
//! stabilization exactly — Newton's method then converges quadratically
//! instead of being throttled by a lagged or approximate linearization.
//!
//! Module map:
//!
//! * [`tensor2`] — 2×2 tensor arithmetic and commutator identities.
//! * [`matfun`] — matrix exponential/logarithm, the scalar kernels of the
//!   closed-form coupling terms, and the series/quadrature oracles used to
//!   verify them.
//! * [`constitutive`] — fluid models, the pointwise log-state residual and
//!   its exact directional derivatives.
//! * [`mesh`] — triangular meshes (second-order, curved boundary edges),
//!   benchmark mesh generators, Gmsh import/export.
//! * [`fem`] — dof management, quadrature, stabilized assembly of residual
//!   and Jacobian.
//! * [`solver`] — sparse matrices, ILUT-preconditioned GMRES, direct LU,
//!   Newton, and continuation in Weissenberg number.
//! * [`bench`] — the confined-cylinder and channel benchmarks, self-test
//!   suites, and file output.

pub mod bench;
pub mod constitutive;
pub mod fem;
pub mod matfun;
pub mod mesh;
pub mod solver;
pub mod tensor2;
