//! Matrix functions and scalar kernels for the log-conformation machinery.
//!
//! The constitutive equation needs, per quadrature point: the exponential of
//! a symmetric 2×2 tensor, the closed-form coupling between the log-state and
//! the rate of strain, and the directional derivative of the exponential.
//! All of these reduce to a handful of scalar kernels of the deviatoric
//! radius `x = sqrt(γ(Ψ)² + Ψ_xy²)`:
//!
//! * `f(x) = (x + 2x/(e^{2x} - 1) - 1) / x²` — strain coupling weight,
//! * `g(x) = (sinh x - x) / x³` — exponential-derivative weight,
//!
//! plus their derivatives for the Jacobian. Each closed form suffers
//! catastrophic cancellation as `x → 0`, so below a switch radius they are
//! evaluated by their (rapidly convergent) power series instead; the series
//! coefficients come from exact Bernoulli rationals so the two branches agree
//! to machine precision at the switch.
//!
//! The module also carries the slow, independent oracles the closed forms are
//! validated against: truncated Bernoulli/Hadamard series built on brute-force
//! iterated commutators, and Gauss–Legendre quadrature of the integral
//! representation of the exponential's derivative.

use std::sync::OnceLock;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

use crate::tensor2::{
    commutator, coupling_matrix, coupling_weight, dev_radius_sq, gamma, SymTensor2, Tensor2,
};

/// Tunables for the scalar kernels and series oracles.
#[derive(Debug, Clone, Copy)]
pub struct KernelTolerances {
    /// Below this radius the ratio kernels (`sinh x / x`, `artanh t / t`)
    /// switch to their Taylor forms to avoid 0/0 at the origin.
    pub small_x_threshold: f64,
    /// Truncation order for the series oracles.
    pub series_terms: usize,
    /// Scaling-and-squaring engages once the ∞-norm exceeds this.
    pub pade_norm_cap: f64,
}

impl Default for KernelTolerances {
    fn default() -> Self {
        KernelTolerances { small_x_threshold: 1e-4, series_terms: 25, pade_norm_cap: 1.0 }
    }
}

pub const DEFAULT_TOLERANCES: KernelTolerances =
    KernelTolerances { small_x_threshold: 1e-4, series_terms: 25, pade_norm_cap: 1.0 };

/// Radius below which `f`, `g` and their derivatives use the power series.
///
/// This is an accuracy switch, not a 0/0 guard: the closed forms lose about
/// `eps / x²` absolute accuracy to cancellation, which at `x = 1e-4` would be
/// a 1e-8 jump against the series. At 0.35 both branches are accurate to
/// better than 1e-14 while the series still converges in a dozen terms
/// (its radius of convergence is π).
const SERIES_SWITCH: f64 = 0.35;

#[derive(Debug, Error)]
pub enum KernelError {
    /// A tensor that must be symmetric positive definite is not.
    #[error("matrix is not symmetric positive definite (trace {trace:.3e}, det {det:.3e})")]
    NotSpd { trace: f64, det: f64 },
    /// Input outside a series' guaranteed convergence region.
    #[error("norm {norm:.6} is outside the series domain (requires < {limit:.6})")]
    SeriesDomain { norm: f64, limit: f64 },
}

// ---------------------------------------------------------------------------
// Bernoulli numbers
// ---------------------------------------------------------------------------

/// Largest even index kept in the cache; the 25-term series oracles need
/// everything through this.
const BERNOULLI_MAX_EVEN: usize = 50;

fn factorial_big(n: usize) -> BigInt {
    let mut acc = BigInt::one();
    for k in 2..=n {
        acc *= BigInt::from(k);
    }
    acc
}

/// All Bernoulli numbers `B_0 ..= B_max` by the defining recursion
/// `Σ_{n=0}^{i} B_n / (n! (i-n+1)!) = δ_{i0}`, in exact rational arithmetic.
fn bernoulli_rationals(max: usize) -> Vec<BigRational> {
    let mut b: Vec<BigRational> = Vec::with_capacity(max + 1);
    b.push(BigRational::one());
    for i in 1..=max {
        let mut sum = BigRational::zero();
        for (n, bn) in b.iter().enumerate() {
            let denom = factorial_big(n) * factorial_big(i - n + 1);
            sum += bn / BigRational::from_integer(denom);
        }
        b.push(-sum * BigRational::from_integer(factorial_big(i)));
    }
    b
}

fn bernoulli_even_cache() -> &'static Vec<f64> {
    static CACHE: OnceLock<Vec<f64>> = OnceLock::new();
    CACHE.get_or_init(|| {
        bernoulli_rationals(BERNOULLI_MAX_EVEN)
            .iter()
            .step_by(2)
            .map(|r| r.to_f64().expect("Bernoulli ratio fits in f64"))
            .collect()
    })
}

/// Even Bernoulli number `B_{2m}` as a float, exact-rational internally and
/// cached through `B_50`.
pub fn bernoulli_even(m: usize) -> f64 {
    let cache = bernoulli_even_cache();
    assert!(
        m < cache.len(),
        "Bernoulli cache holds B_0..=B_{BERNOULLI_MAX_EVEN}; B_{} requested",
        2 * m
    );
    cache[m]
}

/// The lone nonzero odd Bernoulli number, `B_1 = -1/2`. Every other odd one
/// vanishes, which is why the series in this module step by two.
pub fn bernoulli_b1() -> f64 {
    -0.5
}

// ---------------------------------------------------------------------------
// Scalar kernels f, g and their derivatives
// ---------------------------------------------------------------------------

/// Series coefficients of `f`: `f(x) = Σ_{n≥1} B_{2n} 4ⁿ / (2n)! · x^{2n-2}`,
/// i.e. `1/3 - x²/45 + 2x⁴/945 - x⁶/4725 + …`, built from exact rationals.
fn f_series_coeffs() -> &'static Vec<f64> {
    static COEFFS: OnceLock<Vec<f64>> = OnceLock::new();
    COEFFS.get_or_init(|| {
        let b = bernoulli_rationals(2 * 13);
        (1..=13)
            .map(|n| {
                let c = &b[2 * n] * BigRational::from_integer(BigInt::from(4).pow(n as u32))
                    / BigRational::from_integer(factorial_big(2 * n));
                c.to_f64().unwrap()
            })
            .collect()
    })
}

/// Strain-coupling kernel `f(x) = (x + 2x/(e^{2x} - 1) - 1) / x²`.
///
/// Smooth and even on all of ℝ; equals `1/3` at the origin and decays like
/// `1/x` for large `x`.
pub fn f_coupling(x: f64) -> f64 {
    let x = x.abs();
    if x < SERIES_SWITCH {
        let coeffs = f_series_coeffs();
        let x2 = x * x;
        // Horner from the top.
        let mut acc = 0.0;
        for &c in coeffs.iter().rev() {
            acc = acc * x2 + c;
        }
        acc
    } else {
        (x + 2.0 * x / f64::exp_m1(2.0 * x) - 1.0) / (x * x)
    }
}

/// Derivative `f'(x)`, odd in `x`.
pub fn f_coupling_dx(x: f64) -> f64 {
    let ax = x.abs();
    let val = if ax < SERIES_SWITCH {
        let coeffs = f_series_coeffs();
        let x2 = ax * ax;
        // d/dx Σ c_n x^{2n-2} = Σ c_n (2n-2) x^{2n-3}; the n = 1 term drops.
        let mut acc = 0.0;
        for (n, &c) in coeffs.iter().enumerate().skip(1).rev() {
            let p = 2 * (n + 1) - 2; // exponent of x in the value series
            acc = acc * x2 + c * p as f64;
        }
        acc * ax
    } else {
        let e = f64::exp_m1(2.0 * ax);
        let n = ax + 2.0 * ax / e - 1.0;
        let nprime = 1.0 + 2.0 / e - 4.0 * ax * (e + 1.0) / (e * e);
        (nprime - 2.0 * n / ax) / (ax * ax)
    };
    if x < 0.0 {
        -val
    } else {
        val
    }
}

/// Exponential-derivative kernel `g(x) = (sinh x - x) / x³`.
///
/// Even, `g(0) = 1/6`, and strictly increasing on `x ≥ 0`.
pub fn g_deriv(x: f64) -> f64 {
    let x = x.abs();
    if x < SERIES_SWITCH {
        // Σ_{m≥0} x^{2m} / (2m+3)!
        let x2 = x * x;
        let mut term = 1.0 / 6.0;
        let mut acc = term;
        for m in 1..=8 {
            term *= x2 / ((2 * m + 2) as f64 * (2 * m + 3) as f64);
            acc += term;
        }
        acc
    } else {
        (x.sinh() - x) / (x * x * x)
    }
}

/// Derivative `g'(x)`, odd in `x`.
pub fn g_deriv_dx(x: f64) -> f64 {
    let ax = x.abs();
    let val = if ax < SERIES_SWITCH {
        // Σ_{m≥1} 2m x^{2m-1} / (2m+3)! = x · Σ_{m≥1} 2m x^{2(m-1)} / (2m+3)!
        let x2 = ax * ax;
        let mut c = 1.0 / 6.0; // 1/(2m+3)! at m = 0
        let mut xp = 1.0;
        let mut acc = 0.0;
        for m in 1..=8 {
            c /= (2 * m + 2) as f64 * (2 * m + 3) as f64;
            acc += (2 * m) as f64 * c * xp;
            xp *= x2;
        }
        acc * ax
    } else {
        (ax * (ax.cosh() - 1.0) - 3.0 * (ax.sinh() - ax)) / (ax * ax * ax * ax)
    };
    if x < 0.0 {
        -val
    } else {
        val
    }
}

/// `sinh(x)/x` with the obvious series once `x` is too small to divide.
fn sinhc(x: f64, tol: &KernelTolerances) -> f64 {
    let ax = x.abs();
    if ax < tol.small_x_threshold {
        let x2 = x * x;
        1.0 + x2 / 6.0 * (1.0 + x2 / 20.0)
    } else {
        x.sinh() / x
    }
}

/// `artanh(t)/t` with the series branch near the origin.
fn artanhc(t: f64, tol: &KernelTolerances) -> f64 {
    let at = t.abs();
    if at < tol.small_x_threshold {
        let t2 = t * t;
        1.0 + t2 / 3.0 * (1.0 + 3.0 * t2 / 5.0)
    } else {
        t.atanh() / t
    }
}

// ---------------------------------------------------------------------------
// Matrix exponential and logarithm
// ---------------------------------------------------------------------------

/// Exponential of a symmetric 2×2 tensor via its eigenstructure:
///
/// `exp(S) = e^m (cosh x · I + sinh(x)/x · D)` with `m = tr S / 2`,
/// `D = S - m·I` and `x` the deviatoric radius. The result is symmetric
/// positive definite for every finite input — this is the production path
/// the whole formulation leans on.
pub fn expm_sym(s: SymTensor2) -> SymTensor2 {
    expm_sym_with(s, &DEFAULT_TOLERANCES)
}

pub fn expm_sym_with(s: SymTensor2, tol: &KernelTolerances) -> SymTensor2 {
    let m = 0.5 * s.trace();
    let g = gamma(s);
    let x = dev_radius_sq(s).sqrt();
    let em = m.exp();
    let c = em * x.cosh();
    let sc = em * sinhc(x, tol);
    SymTensor2::new(c + sc * g, sc * s.xy, c - sc * g)
}

/// Logarithm of a symmetric positive definite 2×2 tensor; inverse of
/// [`expm_sym`]. Fails with [`KernelError::NotSpd`] when an eigenvalue is
/// not strictly positive.
pub fn log_spd(s: SymTensor2) -> Result<SymTensor2, KernelError> {
    let m = 0.5 * s.trace();
    let g = gamma(s);
    let x = dev_radius_sq(s).sqrt();
    let (lo, hi) = (m - x, m + x);
    if !(lo > 0.0) || !hi.is_finite() {
        return Err(KernelError::NotSpd { trace: s.trace(), det: s.det() });
    }
    let center = 0.5 * (hi.ln() + lo.ln());
    // (ln μ₊ - ln μ₋) / (2x) = artanh(x/m) / x, stable down to x = 0.
    let ratio = artanhc(x / m, &DEFAULT_TOLERANCES) / m;
    Ok(SymTensor2::new(center + ratio * g, ratio * s.xy, center - ratio * g))
}

/// Rational 6/6 Padé approximant of the exponential with scaling and
/// squaring: the argument is halved until its ∞-norm drops under the cap,
/// the approximant is evaluated, and the result squared back up.
///
/// Works on general (non-symmetric) tensors; the symmetric production path
/// is [`expm_sym`], and agreement between the two is part of the self-test
/// suite.
pub fn expm_pade(x: Tensor2) -> Tensor2 {
    expm_pade_with(x, &DEFAULT_TOLERANCES)
}

pub fn expm_pade_with(x: Tensor2, tol: &KernelTolerances) -> Tensor2 {
    // Coefficients of the degree-6 numerator; the denominator is the same
    // polynomial at -X.
    const C: [f64; 7] = [
        1.0,
        0.5,
        5.0 / 44.0,
        1.0 / 66.0,
        1.0 / 792.0,
        1.0 / 15840.0,
        1.0 / 665280.0,
    ];

    let norm = x.inf_norm();
    let mut j = 0i32;
    while !(norm < tol.pade_norm_cap * 2f64.powi(j)) {
        j += 1;
        assert!(j < 64, "exponential argument too large or not finite (inf-norm {norm:e})");
    }
    let xs = x * 2f64.powi(-j);

    let mut num = Tensor2::IDENTITY * C[0];
    let mut den = Tensor2::IDENTITY * C[0];
    let mut pow = Tensor2::IDENTITY;
    for (k, &c) in C.iter().enumerate().skip(1) {
        pow = pow * xs;
        num += pow * c;
        den += pow * (if k % 2 == 0 { c } else { -c });
    }
    let mut r = den.inverse() * num;
    for _ in 0..j {
        r = r * r;
    }
    r
}

// ---------------------------------------------------------------------------
// Derivative of the exponential
// ---------------------------------------------------------------------------

/// Closed form of the half-conjugated directional derivative of the
/// exponential at a symmetric point:
///
/// `e^{-Ψ/2} · (D exp(Ψ)[V]) · e^{-Ψ/2} = V + M(Ψ)·(γ(Ψ)V_xy - Ψ_xy γ(V))·g(x)`.
///
/// The caller wraps the result back with `e^{Ψ/2}` on both sides (see
/// [`exp_directional`]); keeping the sandwich separate is what lets the
/// constitutive Jacobian reuse it.
pub fn exp_derivative_sandwich(psi: SymTensor2, v: SymTensor2) -> SymTensor2 {
    let x = dev_radius_sq(psi).sqrt();
    v + coupling_matrix(psi) * (coupling_weight(psi, v) * g_deriv(x))
}

/// Directional derivative `d/dt exp(Ψ + t V)|_{t=0}` through the closed-form
/// sandwich.
pub fn exp_directional(psi: SymTensor2, v: SymTensor2) -> SymTensor2 {
    let half = expm_sym(psi * 0.5);
    SymTensor2::congruence(half, exp_derivative_sandwich(psi, v))
}

/// Directional derivative of [`exp_derivative_sandwich`] itself: the change
/// of the sandwich at `(Ψ, V)` when `Ψ` moves along `dΨ` and `V` along `dV`.
/// Needed for the second derivative of the exponential in the Jacobian of
/// stress-divergence terms.
pub fn exp_derivative_sandwich_dpsi(
    psi: SymTensor2,
    dpsi: SymTensor2,
    v: SymTensor2,
    dv: SymTensor2,
) -> SymTensor2 {
    let x2 = dev_radius_sq(psi);
    let x = x2.sqrt();
    let m = coupling_matrix(psi);
    let w = coupling_weight(psi, v);
    let g = g_deriv(x);

    let mut out = dv;
    out += coupling_matrix(dpsi) * (w * g);
    out += m * ((gamma(dpsi) * v.xy + gamma(psi) * dv.xy - dpsi.xy * gamma(v) - psi.xy * gamma(dv)) * g);
    // Radius variation term M·w·g'(x)·dx with dx = (γγ' + ψ_xy ψ'_xy)/x.
    // Every factor carries at least one power of x, so skipping it at
    // (numerically) zero radius is exact.
    if x2 > 1e-300 {
        let dx = (gamma(psi) * gamma(dpsi) + psi.xy * dpsi.xy) / x;
        out += m * (w * g_deriv_dx(x) * dx);
    }
    out
}

/// Second-order directional derivative of the exponential:
/// `d/dt [ D exp(Ψ + t dΨ)[A + t dA] ]` at `t = 0`.
///
/// `A` is typically a spatial derivative `∂_i Ψ` and `dA` its variation
/// `∂_i dΨ`, which is exactly what the divergence of the reconstructed
/// stress needs when linearized.
pub fn exp_directional_dpsi(
    psi: SymTensor2,
    a: SymTensor2,
    dpsi: SymTensor2,
    da: SymTensor2,
) -> SymTensor2 {
    let half = expm_sym(psi * 0.5);
    // d(e^{Ψ/2}) along dΨ.
    let dhalf = exp_directional(psi * 0.5, dpsi * 0.5);
    let s = exp_derivative_sandwich(psi, a);
    let ds = exp_derivative_sandwich_dpsi(psi, dpsi, a, da);
    let total = dhalf.mul_sym(s) * half.to_tensor()
        + half.mul_sym(s) * dhalf.to_tensor()
        + half.mul_sym(ds) * half.to_tensor();
    // Exact value is symmetric; average away the rounding skew.
    total.sym_part()
}

// ---------------------------------------------------------------------------
// Closed-form strain coupling
// ---------------------------------------------------------------------------

/// The closed form of the strain source in the log-state equation:
///
/// `C(Ψ, ε) = 2ε + 2·M(Ψ)·(γ(Ψ)ε_xy - Ψ_xy γ(ε))·f(x)`.
///
/// Pushing `C` through the derivative of the exponential reproduces
/// `ε e^Ψ + e^Ψ ε`, which is how the log-state equation stays equivalent to
/// the conformation equation; that transfer is verified numerically in the
/// self-tests rather than assumed.
pub fn strain_coupling_closed(psi: SymTensor2, eps: SymTensor2) -> SymTensor2 {
    let x = dev_radius_sq(psi).sqrt();
    eps * 2.0 + coupling_matrix(psi) * (2.0 * coupling_weight(psi, eps) * f_coupling(x))
}

/// Directional derivative of [`strain_coupling_closed`] in its first
/// argument (the log-state); the strain is held fixed.
pub fn strain_coupling_dpsi(psi: SymTensor2, eps: SymTensor2, dpsi: SymTensor2) -> SymTensor2 {
    let x2 = dev_radius_sq(psi);
    let x = x2.sqrt();
    let f = f_coupling(x);
    let w = coupling_weight(psi, eps);

    let mut out = coupling_matrix(dpsi) * (2.0 * w * f);
    out += coupling_matrix(psi) * (2.0 * (gamma(dpsi) * eps.xy - dpsi.xy * gamma(eps)) * f);
    if x2 > 1e-300 {
        let dx = (gamma(psi) * gamma(dpsi) + psi.xy * dpsi.xy) / x;
        out += coupling_matrix(psi) * (2.0 * w * f_coupling_dx(x) * dx);
    }
    out
}

/// Directional derivative of [`strain_coupling_closed`] in the strain slot.
pub fn strain_coupling_deps(psi: SymTensor2, deps: SymTensor2) -> SymTensor2 {
    // C is linear in ε, so this is just C(Ψ, dε).
    strain_coupling_closed(psi, deps)
}

// ---------------------------------------------------------------------------
// Series and quadrature oracles
// ---------------------------------------------------------------------------

/// Truncated Hadamard series `Σ_{n=0}^{terms} {X,Y}_n / n!`, equal to
/// `e^X Y e^{-X}` inside its convergence budget. Brute-force commutators —
/// an oracle, not a kernel.
pub fn series_conjugation(x: Tensor2, y: Tensor2, terms: usize) -> Tensor2 {
    let mut acc = y;
    let mut iter = y;
    let mut fact = 1.0;
    for n in 1..=terms {
        iter = commutator(x, iter);
        fact *= n as f64;
        acc += iter * (1.0 / fact);
    }
    acc
}

/// Direct conjugation `e^X · Y · e^{-X}` through the Padé exponential; the
/// counterpart the Hadamard series is checked against.
pub fn hadamard_conjugation(x: Tensor2, y: Tensor2) -> Tensor2 {
    expm_pade(x) * y * expm_pade(-x)
}

/// Truncated Bernoulli series of the strain source,
/// `Σ_{n=0}^{terms} B_{2n}/(2n)! · {Ψ, 2ε}_{2n}`, on brute-force
/// commutators. Only valid while the deviatoric radius of `Ψ` stays below
/// π; callers outside that get a domain error instead of a silently wrong
/// number. `‖Ψ‖_F < π` is a convenient sufficient bound since
/// `x ≤ ‖Ψ‖_F / √2`.
pub fn series_rhs_oracle(
    psi: SymTensor2,
    eps: SymTensor2,
    terms: usize,
) -> Result<SymTensor2, KernelError> {
    let norm = psi.frobenius_norm();
    if norm >= std::f64::consts::PI {
        return Err(KernelError::SeriesDomain { norm, limit: std::f64::consts::PI });
    }
    let x = psi.to_tensor();
    let mut acc = eps * 2.0;
    let mut iter = eps.to_tensor() * 2.0;
    for n in 1..=terms {
        // Two more commutator applications take {Ψ,2ε}_{2(n-1)} to {Ψ,2ε}_{2n}.
        iter = commutator(x, commutator(x, iter));
        let coeff = bernoulli_even(n) / factorial_f64(2 * n);
        acc += iter.sym_part() * coeff;
    }
    Ok(acc)
}

/// `∫₀¹ e^{(1-α)X} · Y · e^{αX} dα` by Gauss–Legendre quadrature — the
/// integral representation of the directional derivative `D exp(X)[Y]`.
/// Valid for any `X` (no series radius), so it doubles as the analytic
/// continuation oracle beyond the Bernoulli domain.
pub fn wilcox_integral_oracle(x: Tensor2, y: Tensor2, npts: usize) -> Tensor2 {
    let mut acc = Tensor2::ZERO;
    for &(alpha, w) in gauss_legendre_unit(npts).iter() {
        let left = expm_pade(x * (1.0 - alpha));
        let right = expm_pade(x * alpha);
        acc += (left * y * right) * w;
    }
    acc
}

/// The same integral resummed as a half-conjugated even-commutator series:
/// `e^{X/2} (Σ_n {X,Y}_{2n} / ((2n+1)! · 4ⁿ)) e^{X/2}`. Converges for every
/// `X`; used to cross-check both the quadrature and the `g`-kernel closed
/// form.
pub fn sandwich_series_oracle(x: Tensor2, y: Tensor2, terms: usize) -> Tensor2 {
    let mut sum = y;
    let mut iter = y;
    for n in 1..=terms {
        iter = commutator(x, commutator(x, iter));
        sum += iter * (1.0 / (factorial_f64(2 * n + 1) * 4f64.powi(n as i32)));
    }
    let half = expm_pade(x * 0.5);
    half * sum * half
}

fn factorial_f64(n: usize) -> f64 {
    (2..=n).map(|k| k as f64).product()
}

// ---------------------------------------------------------------------------
// Gauss–Legendre nodes
// ---------------------------------------------------------------------------

/// Gauss–Legendre nodes and weights on `[0, 1]`, by Newton iteration on the
/// Legendre recurrence. Deterministic and accurate to machine precision for
/// the modest orders used here.
pub fn gauss_legendre_unit(n: usize) -> Vec<(f64, f64)> {
    assert!(n >= 1);
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        // Chebyshev-like initial guess on [-1, 1].
        let mut t = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_and_derivative(n, t);
            let dt = p / dp;
            t -= dt;
            if dt.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_and_derivative(n, t);
        let w = 2.0 / ((1.0 - t * t) * dp * dp);
        // Map from [-1, 1] to [0, 1].
        out.push((0.5 * (1.0 - t), 0.5 * w));
    }
    out.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    out
}

fn legendre_and_derivative(n: usize, t: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = t;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * t * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (t * p1 - p0) / (t * t - 1.0);
    (p1, dp)
}
