//! Analytic inflow data for the confined-cylinder channel: the parabolic
//! velocity profile and the log-conformation state of the corresponding
//! steady shear flow, computed two independent ways.

use crate::constitutive::shear_log_state;
use crate::tensor2::SymTensor2;

/// Parabolic inflow profile `u(y) = (3/8)·ū·(4 − y²/R²)` on the channel
/// `|y| ≤ 2R`: maximum `1.5ū` at the centerline, zero at the walls, mean
/// `ū` across the section.
pub fn inflow_velocity(y: f64, ubar: f64, r: f64) -> f64 {
    0.375 * ubar * (4.0 - y * y / (r * r))
}

/// Weissenberg-scaled shear rate of the inflow profile,
/// `w(y) = λ·∂u/∂y = −(3/4)·λ·ū·y/R²`; odd in `y`.
pub fn inflow_shear_w(y: f64, lambda: f64, ubar: f64, r: f64) -> f64 {
    -0.75 * lambda * ubar * y / (r * r)
}

/// Log-conformation of the fully developed inflow: the matrix logarithm of
/// the analytic shear conformation `σ = [[1+2w², w],[w, 1]]`, via the
/// closed-form eigendecomposition route.
pub fn inflow_psi(y: f64, lambda: f64, ubar: f64, r: f64) -> SymTensor2 {
    shear_log_state(inflow_shear_w(y, lambda, ubar, r))
}

/// `asinh(x)/x`, series-continued through the origin.
fn asinhc(x: f64) -> f64 {
    let x2 = x * x;
    if x.abs() < 1e-4 {
        1.0 - x2 / 6.0 + 0.075 * x2 * x2
    } else {
        x.asinh() / x
    }
}

/// The same log-conformation through explicit component formulas
/// (auxiliaries `o = |w|√(1+w²)`, `p = ln(1+w²)`, `q = −2·asinh|w|`, the
/// last rewritten cancellation-free from `ln(1+2(w²−o)) = 2·ln(√(1+w²}−|w|)`):
///
/// ```text
/// Ψ11 = p/2 + asinh|w|·|w|/√(1+w²)
/// Ψ12 = asinh(w)/√(1+w²)
/// Ψ22 = (p + q·w²/o)/2
/// ```
///
/// `q·w²/o` is evaluated as `−2·(asinh|w|/|w|)·w²/√(1+w²)` so the removable
/// `0/0` at the centerline never forms. Used as a cross-check of
/// [`inflow_psi`]; the two must agree to full precision.
pub fn inflow_psi_secondary(y: f64, lambda: f64, ubar: f64, r: f64) -> SymTensor2 {
    let w = inflow_shear_w(y, lambda, ubar, r);
    let root = (1.0 + w * w).sqrt();
    let p = (w * w).ln_1p();
    let psi11 = 0.5 * p + w.abs().asinh() * w.abs() / root;
    let psi12 = w.asinh() / root;
    let psi22 = 0.5 * (p - 2.0 * asinhc(w.abs()) * w * w / root);
    SymTensor2::new(psi11, psi12, psi22)
}

/// Pressure gradient of the fully developed channel solution,
/// `dp/dx = μ_eff·u″ = −(3/4)·μ_eff·ū/R²`. For the coupled viscoelastic
/// channel `μ_eff` is the total viscosity; with the log-state clamped to
/// zero only the solvent contributes.
pub fn channel_pressure_slope(mu_eff: f64, ubar: f64, r: f64) -> f64 {
    -0.75 * mu_eff * ubar / (r * r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matfun::expm_sym;

    #[test]
    fn profile_endpoints_and_mean() {
        let (ubar, r) = (1.3, 0.7);
        assert!((inflow_velocity(0.0, ubar, r) - 1.5 * ubar).abs() < 1e-14);
        assert!(inflow_velocity(2.0 * r, ubar, r).abs() < 1e-14);
        assert!(inflow_velocity(-2.0 * r, ubar, r).abs() < 1e-14);
        // Mean over the section by Simpson, exact for a parabola.
        let mean = (inflow_velocity(-2.0 * r, ubar, r)
            + 4.0 * inflow_velocity(0.0, ubar, r)
            + inflow_velocity(2.0 * r, ubar, r))
            / 6.0;
        assert!((mean - ubar).abs() < 1e-14, "mean {mean}");
    }

    #[test]
    fn centerline_state_is_equilibrium() {
        let psi = inflow_psi(0.0, 2.0, 1.0, 1.0);
        assert_eq!(psi.frobenius_norm(), 0.0);
        let psi = inflow_psi_secondary(0.0, 2.0, 1.0, 1.0);
        assert_eq!(psi.frobenius_norm(), 0.0);
    }

    #[test]
    fn unit_shear_matches_frozen_eigen_log() {
        // w(y) = -(3/4)·λ·ū·y/R² = 1 at y = -4/3 with λ = ū = R = 1;
        // reference digits from a 40-digit eigendecomposition of
        // σ = [[3, 1], [1, 1]].
        let psi = inflow_psi(-4.0 / 3.0, 1.0, 1.0, 1.0);
        assert!((psi.xx - 0.9697988304202032).abs() < 1e-12);
        assert!((psi.xy - 0.6232252401402305).abs() < 1e-12);
        assert!((psi.yy - -0.2766516498602579).abs() < 1e-12);
        // Mirrored shear flips only the off-diagonal entry.
        let m = inflow_psi(4.0 / 3.0, 1.0, 1.0, 1.0);
        assert!((m.xx - psi.xx).abs() < 1e-14);
        assert!((m.xy + psi.xy).abs() < 1e-14);
        assert!((m.yy - psi.yy).abs() < 1e-14);
    }

    #[test]
    fn primary_and_secondary_routes_agree() {
        let (ubar, r) = (1.0, 1.0);
        for lambda in [0.1, 0.9, 2.0] {
            for i in 0..=400 {
                let y = -2.0 + 4.0 * i as f64 / 400.0;
                let a = inflow_psi(y, lambda, ubar, r);
                let b = inflow_psi_secondary(y, lambda, ubar, r);
                let scale = a.frobenius_norm().max(1.0);
                let diff = (a - b).frobenius_norm();
                assert!(diff / scale < 1e-10, "y={y} λ={lambda}: diff {diff:e}");
            }
        }
        // Through the centerline at sub-rounding shears both routes stay
        // finite and equal.
        for y in [-1e-6, -1e-12, 1e-12, 1e-6] {
            let a = inflow_psi(y, 1.0, ubar, r);
            let b = inflow_psi_secondary(y, 1.0, ubar, r);
            assert!((a - b).frobenius_norm() < 1e-15);
            let w = inflow_shear_w(y, 1.0, ubar, r);
            assert!((a.xy - w).abs() < 1e-12 * w.abs().max(1e-30));
        }
    }

    #[test]
    fn exponential_reproduces_analytic_conformation() {
        let (ubar, r, lambda) = (1.5, 0.8, 1.2);
        for i in 0..=200 {
            let y = -2.0 * r + 4.0 * r * i as f64 / 200.0;
            let w = inflow_shear_w(y, lambda, ubar, r);
            let sigma = expm_sym(inflow_psi(y, lambda, ubar, r));
            let exact = SymTensor2::new(1.0 + 2.0 * w * w, w, 1.0);
            let diff = (sigma - exact).frobenius_norm() / exact.frobenius_norm();
            assert!(diff < 1e-10, "y={y}: rel diff {diff:e}");
        }
    }

    #[test]
    fn pressure_slope_balances_total_shear_stress() {
        // d/dy of the total shear stress μ_eff·u′(y) must equal the slope.
        let (mu, ubar, r) = (0.9, 1.1, 0.6);
        let slope = channel_pressure_slope(mu, ubar, r);
        let du = |y: f64| -0.75 * ubar * y / (r * r);
        let h = 1e-6;
        let d_stress = mu * (du(0.3 + h) - du(0.3 - h)) / (2.0 * h);
        assert!((d_stress - slope).abs() < 1e-8);
    }
}
