//! Kernel self-test suites: the closed-form tensor kernels checked against
//! independent series, quadrature, and finite-difference oracles over large
//! randomized sample sets. These back the `selftest` subcommand and the
//! acceptance tests alike.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::constitutive::{theorem_transfer_check, FluidParams, Model};
use crate::matfun::{
    exp_directional, expm_sym, hadamard_conjugation, series_conjugation, series_rhs_oracle,
    strain_coupling_closed, wilcox_integral_oracle,
};
use crate::tensor2::{
    iterated_commutator_bruteforce, iterated_commutator_closed, SymTensor2, Tensor2,
};

/// Outcome of one randomized suite: the worst error observed against the
/// oracle, the tolerance it must meet, and the wall time spent.
#[derive(Debug, Clone)]
pub struct SuiteResult {
    pub name: &'static str,
    pub samples: usize,
    pub worst: f64,
    pub tol: f64,
    pub seconds: f64,
}

impl SuiteResult {
    pub fn pass(&self) -> bool {
        self.worst.is_finite() && self.worst <= self.tol
    }

    pub fn line(&self) -> String {
        format!(
            "{:32} {:5} samples  worst {:9.3e}  tol {:8.1e}  {:6.2}s  {}",
            self.name,
            self.samples,
            self.worst,
            self.tol,
            self.seconds,
            if self.pass() { "PASS" } else { "FAIL" }
        )
    }
}

fn random_sym(rng: &mut ChaCha8Rng) -> SymTensor2 {
    SymTensor2::new(
        rng.gen_range(-1.0..1.0),
        rng.gen_range(-1.0..1.0),
        rng.gen_range(-1.0..1.0),
    )
}

/// Random symmetric tensor with Frobenius norm exactly `norm`.
fn random_sym_with_norm(rng: &mut ChaCha8Rng, norm: f64) -> SymTensor2 {
    loop {
        let s = random_sym(rng);
        let f = s.frobenius_norm();
        if f > 1e-3 {
            return s * (norm / f);
        }
    }
}

fn random_tensor(rng: &mut ChaCha8Rng) -> Tensor2 {
    Tensor2::new(
        rng.gen_range(-1.0..1.0),
        rng.gen_range(-1.0..1.0),
        rng.gen_range(-1.0..1.0),
        rng.gen_range(-1.0..1.0),
    )
}

/// Closed-form strain coupling against the truncated Bernoulli commutator
/// series (25 even terms), inside the series' convergence domain.
pub fn suite_closed_vs_series(samples: usize) -> SuiteResult {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5e1f_0001);
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let norm = rng.gen_range(0.0..2.5);
        let psi = random_sym_with_norm(&mut rng, norm);
        let eps = random_sym(&mut rng);
        let closed = strain_coupling_closed(psi, eps);
        let oracle = series_rhs_oracle(psi, eps, 25).expect("‖Ψ‖ ≤ 2.5 < π");
        let scale = oracle.frobenius_norm().max(2.0 * eps.frobenius_norm()).max(1e-300);
        worst = worst.max((closed - oracle).frobenius_norm() / scale);
    }
    SuiteResult {
        name: "closed coupling vs series",
        samples,
        worst,
        tol: 1e-10,
        seconds: start.elapsed().as_secs_f64(),
    }
}

/// Analytic continuation beyond the series radius: the exponential
/// derivative of the half-coupling, evaluated by Gauss–Legendre quadrature
/// of `∫ e^{(1-α)Ψ}·A·e^{αΨ} dα`, must reproduce `½(ε e^Ψ + e^Ψ ε)` even
/// where the Bernoulli series diverges.
pub fn suite_wilcox_continuation(samples: usize) -> SuiteResult {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5e1f_0002);
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let norm = rng.gen_range(std::f64::consts::PI..6.0_f64).max(std::f64::consts::PI + 1e-6);
        let psi = random_sym_with_norm(&mut rng, norm);
        let eps = random_sym(&mut rng);
        let a = strain_coupling_closed(psi, eps) * 0.5;
        let lhs = wilcox_integral_oracle(psi.to_tensor(), a.to_tensor(), 32);
        let s = expm_sym(psi).to_tensor();
        let e = eps.to_tensor();
        let rhs = (e * s + s * e) * 0.5;
        let scale = rhs.frobenius_norm().max(1e-300);
        worst = worst.max((lhs - rhs).frobenius_norm() / scale);
    }
    SuiteResult {
        name: "quadrature continuation",
        samples,
        worst,
        tol: 1e-8,
        seconds: start.elapsed().as_secs_f64(),
    }
}

/// Hadamard conjugation series against direct exponentials.
pub fn suite_hadamard(samples: usize) -> SuiteResult {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5e1f_0003);
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let norm = rng.gen_range(0.0..2.0);
        let x = random_sym_with_norm(&mut rng, norm).to_tensor();
        let y = random_tensor(&mut rng);
        let series = series_conjugation(x, y, 40);
        let direct = hadamard_conjugation(x, y);
        let scale = direct.frobenius_norm().max(1e-300);
        worst = worst.max((series - direct).frobenius_norm() / scale);
    }
    SuiteResult {
        name: "Hadamard series vs conjugation",
        samples,
        worst,
        tol: 1e-10,
        seconds: start.elapsed().as_secs_f64(),
    }
}

/// Closed even iterated commutators against brute-force nesting for
/// orders 2, 4, 6, 8.
pub fn suite_iterated_commutators(samples_per_order: usize) -> SuiteResult {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5e1f_0004);
    let mut worst = 0.0f64;
    let orders = [2usize, 4, 6, 8];
    for _ in 0..samples_per_order {
        let a = random_sym(&mut rng) * 2.0;
        let b = random_sym(&mut rng) * 2.0;
        for &n in &orders {
            let closed = iterated_commutator_closed(a, b, n);
            let brute = iterated_commutator_bruteforce(a.to_tensor(), b.to_tensor(), n);
            let scale = brute.frobenius_norm().max(1e-300);
            worst = worst.max((closed.to_tensor() - brute).frobenius_norm() / scale);
        }
    }
    SuiteResult {
        name: "closed iterated commutators",
        samples: samples_per_order * orders.len(),
        worst,
        tol: 1e-12,
        seconds: start.elapsed().as_secs_f64(),
    }
}

/// Exponential directional derivative against central finite differences
/// (absolute error; the step is chosen well above the cancellation floor).
pub fn suite_exp_derivative_fd(samples: usize) -> SuiteResult {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5e1f_0005);
    let mut worst = 0.0f64;
    let h = 1e-5;
    for _ in 0..samples {
        let norm = rng.gen_range(0.0..2.0);
        let psi = random_sym_with_norm(&mut rng, norm);
        let v = random_sym(&mut rng);
        let closed = exp_directional(psi, v);
        let fd = (expm_sym(psi + v * h) - expm_sym(psi - v * h)) * (1.0 / (2.0 * h));
        worst = worst.max((closed - fd).frobenius_norm());
    }
    SuiteResult {
        name: "exp derivative vs central FD",
        samples,
        worst,
        tol: 1e-6,
        seconds: start.elapsed().as_secs_f64(),
    }
}

/// Pointwise equivalence of the log-state equation and the conformation
/// equation, swept across both sides of the series radius and across the
/// relaxation models.
pub fn suite_theorem_transfer(samples: usize) -> SuiteResult {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5e1f_0006);
    let mut worst = 0.0f64;
    let models =
        [Model::OldroydB, Model::Giesekus { alpha: 0.2 }, Model::Giesekus { alpha: 0.5 }];
    let lambdas = [0.5, 1.0, 2.0];
    for i in 0..samples {
        // Half the states inside the Bernoulli radius, half beyond it.
        let norm = if i % 2 == 0 {
            rng.gen_range(0.05..std::f64::consts::PI - 0.05)
        } else {
            rng.gen_range(std::f64::consts::PI + 1e-3..6.0)
        };
        let psi = random_sym_with_norm(&mut rng, norm);
        let grad_u = random_tensor(&mut rng);
        let params = FluidParams {
            model: models[i % models.len()],
            rho: 0.0,
            mu_s: 0.59,
            mu_p: 0.41,
            lambda: lambdas[i % lambdas.len()],
        };
        worst = worst.max(theorem_transfer_check(&params, psi, grad_u));
    }
    SuiteResult {
        name: "log/conformation transfer",
        samples,
        worst,
        tol: 1e-7,
        seconds: start.elapsed().as_secs_f64(),
    }
}

/// Every suite at its acceptance sample count.
pub fn run_all_suites() -> Vec<SuiteResult> {
    vec![
        suite_closed_vs_series(1000),
        suite_wilcox_continuation(200),
        suite_hadamard(500),
        suite_iterated_commutators(250),
        suite_exp_derivative_fd(500),
        suite_theorem_transfer(700),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduced_suites_all_pass() {
        // Small sample counts here; the acceptance tests run the full sizes.
        let results = [
            suite_closed_vs_series(60),
            suite_wilcox_continuation(20),
            suite_hadamard(40),
            suite_iterated_commutators(20),
            suite_exp_derivative_fd(40),
            suite_theorem_transfer(60),
        ];
        for r in &results {
            assert!(r.pass(), "{}", r.line());
            assert!(r.worst > 0.0, "suspiciously exact: {}", r.line());
        }
    }
}
