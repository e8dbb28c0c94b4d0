//! Constitutive models and the pointwise log-state residual.
//!
//! The viscoelastic models (Oldroyd-B and Giesekus) are posed on the
//! logarithm `Ψ = log σ` of the conformation tensor. At a quadrature point
//! the steady residual is
//!
//! ```text
//! R(Ψ; u) = (u·∇)Ψ + [Ψ, Ω] + (1/λ)·S(Ψ) - C(Ψ, ε)
//! ```
//!
//! with `ε`/`Ω` the strain/spin parts of `∇u`, `S` the model's relaxation
//! term and `C` the closed-form strain coupling from [`crate::matfun`].
//! Everything here is per-point algebra; the finite element layer contracts
//! these values and derivatives against test functions.
//!
//! The directional derivatives are split by argument — log-state vs velocity
//! — because the Jacobian assembles them against different trial spaces.

use crate::matfun::{
    exp_directional, expm_sym, strain_coupling_closed, strain_coupling_dpsi, KernelError,
};
use crate::tensor2::{commutator_sym_spin, strain_and_vorticity, SymTensor2, Tensor2, Vec2};

/// Which relaxation law closes the model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Model {
    OldroydB,
    /// Quadratic relaxation with mobility `alpha ∈ [0, 1/2]`; `alpha = 0`
    /// recovers Oldroyd-B exactly.
    Giesekus { alpha: f64 },
}

/// Material parameters of the two-mode (solvent + polymer) fluid.
#[derive(Debug, Clone, Copy)]
pub struct FluidParams {
    pub model: Model,
    /// Density; zero selects creeping flow in the momentum balance.
    pub rho: f64,
    /// Solvent viscosity.
    pub mu_s: f64,
    /// Polymer viscosity.
    pub mu_p: f64,
    /// Relaxation time.
    pub lambda: f64,
}

impl FluidParams {
    /// Total shear viscosity `μ = μ_s + μ_p`.
    pub fn mu_total(&self) -> f64 {
        self.mu_s + self.mu_p
    }

    /// Solvent viscosity ratio `β = μ_s / (μ_s + μ_p)`.
    pub fn beta(&self) -> f64 {
        self.mu_s / self.mu_total()
    }
}

/// Everything the constitutive residual needs at one point: the velocity and
/// its gradient, the log-state and its spatial gradient (`grad_psi[i]` is
/// `∂_i Ψ`).
#[derive(Debug, Clone, Copy)]
pub struct PointState {
    pub u: Vec2,
    pub grad_u: Tensor2,
    pub psi: SymTensor2,
    pub grad_psi: [SymTensor2; 2],
}

/// Relaxation term `S(Ψ)` of the log-state equation.
///
/// Oldroyd-B: `S = I - e^{-Ψ}`; Giesekus: `S = (1-2α)I - (1-α)e^{-Ψ} + αe^{Ψ}`.
/// Both come from pushing the conformation-space relaxation `P(σ)·σ^{-1}`
/// through `σ = e^Ψ`.
pub fn relaxation_source(model: Model, psi: SymTensor2) -> SymTensor2 {
    match model {
        Model::OldroydB => SymTensor2::IDENTITY - expm_sym(-psi),
        Model::Giesekus { alpha } => {
            SymTensor2::IDENTITY * (1.0 - 2.0 * alpha) - expm_sym(-psi) * (1.0 - alpha)
                + expm_sym(psi) * alpha
        }
    }
}

/// Directional derivative of [`relaxation_source`] along `dpsi`.
pub fn relaxation_source_dpsi(model: Model, psi: SymTensor2, dpsi: SymTensor2) -> SymTensor2 {
    match model {
        // d(I - e^{-Ψ}) = -D exp(-Ψ)[-dΨ] = D exp(-Ψ)[dΨ].
        Model::OldroydB => exp_directional(-psi, dpsi),
        Model::Giesekus { alpha } => {
            exp_directional(-psi, dpsi) * (1.0 - alpha) + exp_directional(psi, dpsi) * alpha
        }
    }
}

/// Steady log-state residual `R(Ψ; u)` at a point.
pub fn psi_residual_steady(params: &FluidParams, state: &PointState) -> SymTensor2 {
    let (eps, omega) = strain_and_vorticity(state.grad_u);
    let advect = state.grad_psi[0] * state.u.x + state.grad_psi[1] * state.u.y;
    advect + commutator_sym_spin(state.psi, omega)
        + relaxation_source(params.model, state.psi) * (1.0 / params.lambda)
        - strain_coupling_closed(state.psi, eps)
}

/// Derivative of the residual when only the log-state moves: `Ψ → Ψ + t·dΨ`
/// with `∇Ψ → ∇Ψ + t·d∇Ψ`, velocity frozen.
pub fn psi_residual_dpsi(
    params: &FluidParams,
    state: &PointState,
    dpsi: SymTensor2,
    dgrad_psi: [SymTensor2; 2],
) -> SymTensor2 {
    let (eps, omega) = strain_and_vorticity(state.grad_u);
    let advect = dgrad_psi[0] * state.u.x + dgrad_psi[1] * state.u.y;
    advect + commutator_sym_spin(dpsi, omega)
        + relaxation_source_dpsi(params.model, state.psi, dpsi) * (1.0 / params.lambda)
        - strain_coupling_dpsi(state.psi, eps, dpsi)
}

/// Derivative of the residual when only the velocity moves: `u → u + t·du`,
/// log-state frozen. The strain coupling is linear in `ε`, so its derivative
/// is the coupling itself evaluated at `dε`.
pub fn psi_residual_du(
    params: &FluidParams,
    state: &PointState,
    du: Vec2,
    dgrad_u: Tensor2,
) -> SymTensor2 {
    let _ = params; // the velocity block of the residual is model-independent
    let (deps, domega) = strain_and_vorticity(dgrad_u);
    let advect = state.grad_psi[0] * du.x + state.grad_psi[1] * du.y;
    advect + commutator_sym_spin(state.psi, domega) - strain_coupling_closed(state.psi, deps)
}

/// Relaxation term `P(σ)` of the conformation-space equation:
/// `σ - I` for Oldroyd-B, `(σ - I) + α(σ - I)²` for Giesekus.
pub fn conformation_relaxation(model: Model, sigma: SymTensor2) -> SymTensor2 {
    let dev = sigma - SymTensor2::IDENTITY;
    match model {
        Model::OldroydB => dev,
        Model::Giesekus { alpha } => dev + dev.mul_sym(dev).sym_part() * alpha,
    }
}

/// Steady conformation-tensor residual
/// `(u·∇)σ - (∇u·σ + σ·∇uᵀ) + (1/λ)·P(σ)`, with `grad_sigma[i] = ∂_i σ`.
///
/// Rejects a non-SPD `σ` rather than evaluating the model outside its
/// physical domain.
pub fn conformation_residual_steady(
    params: &FluidParams,
    u: Vec2,
    grad_u: Tensor2,
    sigma: SymTensor2,
    grad_sigma: [SymTensor2; 2],
) -> Result<SymTensor2, KernelError> {
    if !(sigma.det() > 0.0 && sigma.trace() > 0.0) {
        return Err(KernelError::NotSpd { trace: sigma.trace(), det: sigma.det() });
    }
    let advect = grad_sigma[0] * u.x + grad_sigma[1] * u.y;
    let stretch = (grad_u * sigma.to_tensor() + sigma.to_tensor() * grad_u.transpose()).sym_part();
    Ok(advect - stretch
        + conformation_relaxation(params.model, sigma) * (1.0 / params.lambda))
}

/// Pointwise equivalence check between the log-state equation and the
/// conformation equation.
///
/// For *any* pair `(Ψ, ∇u)` — no PDE needs to hold — define the material
/// rate the log-state equation implies,
/// `DΨ = C(Ψ,ε) - [Ψ,Ω] - (1/λ)S(Ψ)`, push it through the exponential to
/// get `Dσ`, and insert into the conformation equation. The result must
/// vanish identically; its relative Frobenius norm is returned so tests can
/// sweep it over random states. This is what makes solving the log form
/// equivalent to solving the original model.
pub fn theorem_transfer_check(params: &FluidParams, psi: SymTensor2, grad_u: Tensor2) -> f64 {
    let (eps, omega) = strain_and_vorticity(grad_u);
    let dpsi_material = strain_coupling_closed(psi, eps)
        - commutator_sym_spin(psi, omega)
        - relaxation_source(params.model, psi) * (1.0 / params.lambda);
    let dsigma = exp_directional(psi, dpsi_material);

    let sigma = expm_sym(psi);
    let stretch = (grad_u * sigma.to_tensor() + sigma.to_tensor() * grad_u.transpose()).sym_part();
    let residual = dsigma - stretch
        + conformation_relaxation(params.model, sigma) * (1.0 / params.lambda);

    let scale = stretch
        .frobenius_norm()
        .max(dsigma.frobenius_norm())
        .max(sigma.frobenius_norm() / params.lambda)
        .max(1e-30);
    residual.frobenius_norm() / scale
}

/// Polymer extra stress reconstructed from the log-state,
/// `τ_p = (μ_p/λ)(e^Ψ - I)`.
pub fn polymer_stress(params: &FluidParams, psi: SymTensor2) -> SymTensor2 {
    (expm_sym(psi) - SymTensor2::IDENTITY) * (params.mu_p / params.lambda)
}

/// The log-state of a steady homogeneous shear flow with Weissenberg-scaled
/// rate `w = λ·(du_x/dy)`: the exact solution `σ = [[1+2w², w], [w, 1]]`
/// taken through the matrix logarithm. Oldroyd-B only; used by boundary
/// conditions and tests.
pub fn shear_log_state(w: f64) -> SymTensor2 {
    let sigma = SymTensor2::new(1.0 + 2.0 * w * w, w, 1.0);
    crate::matfun::log_spd(sigma).expect("shear conformation tensor is SPD for every finite rate")
}
