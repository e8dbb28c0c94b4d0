//! Small fixed-size types for 2D vector/tensor arithmetic.
//!
//! Everything here is plain value types on `f64`; the solver's hot loops call
//! these kernels per quadrature point, so they stay allocation-free and
//! inlineable. The gradient convention throughout the crate is
//! `(∇u)_ij = ∂_j u_i`: row `i` holds the derivatives of velocity component
//! `i`, so `∇u · w` is the directional derivative of `u` along `w`.

use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

/// 2D vector.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    /// Rotate by +90°; handy for turning tangents into normals.
    pub fn perp(self) -> Vec2 {
        Vec2 { x: -self.y, y: self.x }
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

impl AddAssign for Vec2 {
    fn add_assign(&mut self, rhs: Vec2) {
        self.x += rhs.x;
        self.y += rhs.y;
    }
}

/// General (not necessarily symmetric) 2×2 tensor, row-major entries.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Tensor2 {
    pub xx: f64,
    pub xy: f64,
    pub yx: f64,
    pub yy: f64,
}

impl Tensor2 {
    pub const ZERO: Tensor2 = Tensor2 { xx: 0.0, xy: 0.0, yx: 0.0, yy: 0.0 };
    pub const IDENTITY: Tensor2 = Tensor2 { xx: 1.0, xy: 0.0, yx: 0.0, yy: 1.0 };

    pub fn new(xx: f64, xy: f64, yx: f64, yy: f64) -> Self {
        Tensor2 { xx, xy, yx, yy }
    }

    pub fn transpose(self) -> Tensor2 {
        Tensor2::new(self.xx, self.yx, self.xy, self.yy)
    }

    pub fn trace(self) -> f64 {
        self.xx + self.yy
    }

    pub fn det(self) -> f64 {
        self.xx * self.yy - self.xy * self.yx
    }

    /// Matrix inverse; caller is responsible for a non-vanishing determinant.
    pub fn inverse(self) -> Tensor2 {
        let d = self.det();
        Tensor2::new(self.yy / d, -self.xy / d, -self.yx / d, self.xx / d)
    }

    pub fn frobenius_norm(self) -> f64 {
        (self.xx * self.xx + self.xy * self.xy + self.yx * self.yx + self.yy * self.yy).sqrt()
    }

    /// Maximum absolute row sum (the operator ∞-norm).
    pub fn inf_norm(self) -> f64 {
        let r0 = self.xx.abs() + self.xy.abs();
        let r1 = self.yx.abs() + self.yy.abs();
        r0.max(r1)
    }

    pub fn sym_part(self) -> SymTensor2 {
        SymTensor2::new(self.xx, 0.5 * (self.xy + self.yx), self.yy)
    }

    /// Off-diagonal entry of the antisymmetric part: `(A - Aᵀ)/2 = [[0, w], [-w, 0]]`.
    pub fn antisym_part(self) -> f64 {
        0.5 * (self.xy - self.yx)
    }

    pub fn matvec(self, v: Vec2) -> Vec2 {
        Vec2::new(self.xx * v.x + self.xy * v.y, self.yx * v.x + self.yy * v.y)
    }

    /// How far the tensor is from being symmetric, `|A - Aᵀ|` in Frobenius norm.
    pub fn asymmetry(self) -> f64 {
        std::f64::consts::SQRT_2 * (self.xy - self.yx).abs()
    }
}

impl Add for Tensor2 {
    type Output = Tensor2;
    fn add(self, r: Tensor2) -> Tensor2 {
        Tensor2::new(self.xx + r.xx, self.xy + r.xy, self.yx + r.yx, self.yy + r.yy)
    }
}

impl Sub for Tensor2 {
    type Output = Tensor2;
    fn sub(self, r: Tensor2) -> Tensor2 {
        Tensor2::new(self.xx - r.xx, self.xy - r.xy, self.yx - r.yx, self.yy - r.yy)
    }
}

impl Mul<f64> for Tensor2 {
    type Output = Tensor2;
    fn mul(self, s: f64) -> Tensor2 {
        Tensor2::new(self.xx * s, self.xy * s, self.yx * s, self.yy * s)
    }
}

impl Mul for Tensor2 {
    type Output = Tensor2;
    fn mul(self, r: Tensor2) -> Tensor2 {
        Tensor2::new(
            self.xx * r.xx + self.xy * r.yx,
            self.xx * r.xy + self.xy * r.yy,
            self.yx * r.xx + self.yy * r.yx,
            self.yx * r.xy + self.yy * r.yy,
        )
    }
}

impl Neg for Tensor2 {
    type Output = Tensor2;
    fn neg(self) -> Tensor2 {
        self * -1.0
    }
}

impl AddAssign for Tensor2 {
    fn add_assign(&mut self, r: Tensor2) {
        *self = *self + r;
    }
}

/// Symmetric 2×2 tensor; only the three independent entries are stored, so
/// symmetry is structural rather than a numerical afterthought.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SymTensor2 {
    pub xx: f64,
    pub xy: f64,
    pub yy: f64,
}

impl SymTensor2 {
    pub const ZERO: SymTensor2 = SymTensor2 { xx: 0.0, xy: 0.0, yy: 0.0 };
    pub const IDENTITY: SymTensor2 = SymTensor2 { xx: 1.0, xy: 0.0, yy: 1.0 };

    pub fn new(xx: f64, xy: f64, yy: f64) -> Self {
        SymTensor2 { xx, xy, yy }
    }

    pub fn diag(xx: f64, yy: f64) -> Self {
        SymTensor2 { xx, xy: 0.0, yy }
    }

    pub fn to_tensor(self) -> Tensor2 {
        Tensor2::new(self.xx, self.xy, self.xy, self.yy)
    }

    pub fn trace(self) -> f64 {
        self.xx + self.yy
    }

    pub fn det(self) -> f64 {
        self.xx * self.yy - self.xy * self.xy
    }

    pub fn frobenius_norm(self) -> f64 {
        (self.xx * self.xx + 2.0 * self.xy * self.xy + self.yy * self.yy).sqrt()
    }

    pub fn matvec(self, v: Vec2) -> Vec2 {
        Vec2::new(self.xx * v.x + self.xy * v.y, self.xy * v.x + self.yy * v.y)
    }

    /// Double contraction `A : B` (the off-diagonal counts twice).
    pub fn ddot(self, b: SymTensor2) -> f64 {
        self.xx * b.xx + 2.0 * self.xy * b.xy + self.yy * b.yy
    }

    /// Product of two symmetric tensors; the result is general.
    pub fn mul_sym(self, b: SymTensor2) -> Tensor2 {
        self.to_tensor() * b.to_tensor()
    }

    /// Congruence `P · A · P` with symmetric `P`; symmetric by construction,
    /// with the off-diagonal averaged to kill rounding asymmetry.
    pub fn congruence(p: SymTensor2, a: SymTensor2) -> SymTensor2 {
        let full = p.to_tensor() * a.to_tensor() * p.to_tensor();
        SymTensor2::new(full.xx, 0.5 * (full.xy + full.yx), full.yy)
    }

    /// Symmetrized product `(A·B + B·A)/2`.
    pub fn sym_anticommutator_half(self, b: SymTensor2) -> SymTensor2 {
        let ab = self.mul_sym(b);
        SymTensor2::new(ab.xx, 0.5 * (ab.xy + ab.yx), ab.yy)
    }
}

impl Add for SymTensor2 {
    type Output = SymTensor2;
    fn add(self, r: SymTensor2) -> SymTensor2 {
        SymTensor2::new(self.xx + r.xx, self.xy + r.xy, self.yy + r.yy)
    }
}

impl Sub for SymTensor2 {
    type Output = SymTensor2;
    fn sub(self, r: SymTensor2) -> SymTensor2 {
        SymTensor2::new(self.xx - r.xx, self.xy - r.xy, self.yy - r.yy)
    }
}

impl Mul<f64> for SymTensor2 {
    type Output = SymTensor2;
    fn mul(self, s: f64) -> SymTensor2 {
        SymTensor2::new(self.xx * s, self.xy * s, self.yy * s)
    }
}

impl Neg for SymTensor2 {
    type Output = SymTensor2;
    fn neg(self) -> SymTensor2 {
        self * -1.0
    }
}

impl AddAssign for SymTensor2 {
    fn add_assign(&mut self, r: SymTensor2) {
        *self = *self + r;
    }
}

impl SubAssign for SymTensor2 {
    fn sub_assign(&mut self, r: SymTensor2) {
        *self = *self - r;
    }
}

/// Half the diagonal gap, `γ(C) = (C_xx - C_yy)/2`.
///
/// Together with the off-diagonal entry this measures how far a symmetric
/// tensor is from a multiple of the identity; every closed-form kernel in
/// this crate is a function of the pair `(γ(C), C_xy)`.
pub fn gamma(c: SymTensor2) -> f64 {
    0.5 * (c.xx - c.yy)
}

/// The traceless matrix `M(A) = [[-A_xy, γ(A)], [γ(A), A_xy]]` that shows up
/// in every iterated commutator of two symmetric tensors.
///
/// `M(A)` is `A`'s traceless part rotated by 90° in the (γ, xy) plane; it
/// vanishes exactly when `A` is a multiple of the identity.
pub fn coupling_matrix(a: SymTensor2) -> SymTensor2 {
    SymTensor2::new(-a.xy, gamma(a), a.xy)
}

/// The scalar weight `γ(A)·B_xy - A_xy·γ(B)` paired with [`coupling_matrix`]
/// in the closed commutator formulas: `{A,B}₂ = 4·M(A)·(γ(A)B_xy - A_xy γ(B))`.
pub fn coupling_weight(a: SymTensor2, b: SymTensor2) -> f64 {
    gamma(a) * b.xy - a.xy * gamma(b)
}

/// Squared deviatoric radius `γ(A)² + A_xy²`; its square root is the spread
/// of the eigenvalues around their mean.
pub fn dev_radius_sq(a: SymTensor2) -> f64 {
    let g = gamma(a);
    g * g + a.xy * a.xy
}

/// Split a velocity gradient into rate of strain and vorticity.
///
/// Returns `(ε, ω)` with `ε = (∇u + ∇uᵀ)/2` and the spin scalar `ω` defined
/// by `Ω = (∇u - ∇uᵀ)/2 = [[0, ω], [-ω, 0]]`, i.e. `ω = (∂_y u_x - ∂_x u_y)/2`
/// in the row-major gradient convention.
pub fn strain_and_vorticity(gradu: Tensor2) -> (SymTensor2, f64) {
    (gradu.sym_part(), gradu.antisym_part())
}

/// Reassemble `[[0, ω], [-ω, 0]]` from the spin scalar.
pub fn spin_tensor(omega: f64) -> Tensor2 {
    Tensor2::new(0.0, omega, -omega, 0.0)
}

/// Commutator `[X, Y] = X·Y - Y·X`.
pub fn commutator(x: Tensor2, y: Tensor2) -> Tensor2 {
    x * y - y * x
}

/// Commutator of a symmetric tensor with a spin tensor.
///
/// `[S, Ω]` is symmetric again and collapses to `2ω·M(S)`, which this
/// computes directly instead of round-tripping through general tensors.
pub fn commutator_sym_spin(s: SymTensor2, omega: f64) -> SymTensor2 {
    coupling_matrix(s) * (2.0 * omega)
}

/// Iterated commutator `{X,Y}_n` by literal recursion: `{X,Y}_0 = Y`,
/// `{X,Y}_n = [X, {X,Y}_{n-1}]`.
///
/// This is the oracle the closed forms are tested against; it costs `n`
/// matrix products and accumulates rounding accordingly, so use it in tests,
/// not in kernels.
pub fn iterated_commutator_bruteforce(x: Tensor2, y: Tensor2, n: usize) -> Tensor2 {
    let mut acc = y;
    for _ in 0..n {
        acc = commutator(x, acc);
    }
    acc
}

/// Closed form of the even iterated commutator of two *symmetric* tensors:
///
/// `{A,B}_n = 2ⁿ · M(A) · (γ(A)B_xy - A_xy γ(B)) · (γ(A)² + A_xy²)^(n/2 - 1)`
///
/// valid for even `n ≥ 2`. Odd iterates are antisymmetric and are not
/// representable here; asking for one (or for `n = 0`) is a programming
/// error, hence the panic rather than a `Result`.
pub fn iterated_commutator_closed(a: SymTensor2, b: SymTensor2, n: usize) -> SymTensor2 {
    assert!(n >= 2 && n % 2 == 0, "closed form covers even commutator orders >= 2, got {n}");
    let pow = (n / 2 - 1) as i32;
    coupling_matrix(a) * (2f64.powi(n as i32) * coupling_weight(a, b) * dev_radius_sq(a).powi(pow))
}
