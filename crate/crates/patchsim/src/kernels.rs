//! Exact evaluation of the free-space kernel family for the Stokes problem
//! −Δu + ∇Π = θe₂ on ℝ²: the streamfunction kernel K (ψ = K*θ), the velocity
//! kernel G = ∇⊥K (u = G*θ), their gradients, the −2-homogeneous parts H₁, H₂
//! of the second gradient ∂ᵢ∇G = (1/4π)Hᵢ/|z|², the constant delta-term tensor
//! E arising in the principal-value representation of ∇∇u, and the vorticity
//! kernel Q (ω = Q*θ).

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Plane vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// Counterclockwise quarter turn z⊥ = (−z₂, z₁).
    pub fn perp(self) -> Vec2 {
        Vec2::new(-self.y, self.x)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl std::ops::Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl std::ops::Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl std::ops::Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

impl std::ops::Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}

impl std::ops::Mul<Vec2> for f64 {
    type Output = Vec2;
    fn mul(self, v: Vec2) -> Vec2 {
        v * self
    }
}

/// 2×2 matrix as rows; for kernel gradients the layout is M[i][j] = ∂ᵢ(·)_j.
pub type Mat2 = [[f64; 2]; 2];

/// 2×2×2 tensor indexed (derivative direction, row, column).
pub type Tensor222 = [Mat2; 2];

fn check_nonzero(z: Vec2) -> Result<f64> {
    let r2 = z.norm_sq();
    if r2 == 0.0 {
        return Err(Error::KernelSingular);
    }
    Ok(r2)
}

/// Streamfunction kernel K(z) = −z₁/(4π)·(log|z| − 1/2) and velocity kernel
/// G(z) = ∇⊥K = (1/8π)·(2ẑ₁ẑ₂, 1 − 2log|z| − 2ẑ₁²) with ẑ = z/|z|.
#[allow(non_snake_case)] // kernel names K, G, Q are proper nouns here
pub fn eval_K_G(z: Vec2) -> Result<(f64, Vec2)> {
    let r2 = check_nonzero(z)?;
    let log_r = 0.5 * r2.ln();
    let k = -z.x / (4.0 * PI) * (log_r - 0.5);
    let zh1_zh2 = z.x * z.y / r2;
    let zh1_sq = z.x * z.x / r2;
    let g = Vec2::new(
        2.0 * zh1_zh2 / (8.0 * PI),
        (1.0 - 2.0 * log_r - 2.0 * zh1_sq) / (8.0 * PI),
    );
    Ok((k, g))
}

/// ∇K(z) = (1/8π)[(−2log|z|, 0) − (1/|z|²)(z₁²−z₂², 2z₁z₂)] and the velocity
/// kernel gradient with layout gradG[i][j] = ∂ᵢG_j:
/// gradG(z) = −1/(4π|z|⁴)·[[z₂(z₁²−z₂²), z₁³+3z₁z₂²],[z₁(z₂²−z₁²), z₂(z₂²−z₁²)]].
#[allow(non_snake_case)] // kernel names K, G, Q are proper nouns here
pub fn eval_gradK_gradG(z: Vec2) -> Result<(Vec2, Mat2)> {
    let r2 = check_nonzero(z)?;
    let log_r = 0.5 * r2.ln();
    let grad_k = Vec2::new(
        (-2.0 * log_r - (z.x * z.x - z.y * z.y) / r2) / (8.0 * PI),
        (-2.0 * z.x * z.y / r2) / (8.0 * PI),
    );
    let c = -1.0 / (4.0 * PI * r2 * r2);
    let (z1, z2) = (z.x, z.y);
    let grad_g = [
        [
            c * z2 * (z1 * z1 - z2 * z2),
            c * (z1 * z1 * z1 + 3.0 * z1 * z2 * z2),
        ],
        [
            c * z1 * (z2 * z2 - z1 * z1),
            c * z2 * (z2 * z2 - z1 * z1),
        ],
    ];
    Ok((grad_k, grad_g))
}

/// The −2-homogeneous parts of the second gradient: ∂ᵢ∇G(z) = (1/4π)Hᵢ(z)/|z|²
/// with Hᵢ both 0-homogeneous and mean zero on the unit circle.
pub fn eval_hess_parts(z: Vec2) -> Result<(Mat2, Mat2)> {
    let r2 = check_nonzero(z)?;
    let r4 = r2 * r2;
    let (z1, z2) = (z.x, z.y);
    let (s1, s2) = (z1 * z1, z2 * z2);
    // Mixed partials commute, so the second row of H₁ (∂₁∂₂G) coincides with
    // the first row of H₂ (∂₂∂₁G); it is computed once and shared.
    let mixed = [
        (-s1 * s1 + 6.0 * s1 * s2 - s2 * s2) / r4,
        2.0 * z1 * z2 * (3.0 * s2 - s1) / r4,
    ];
    let h1 = [
        [
            2.0 * z1 * z2 * (s1 - 3.0 * s2) / r4,
            (s1 * s1 + 6.0 * s1 * s2 - 3.0 * s2 * s2) / r4,
        ],
        mixed,
    ];
    let h2 = [
        mixed,
        [
            2.0 * z1 * z2 * (s2 - 3.0 * s1) / r4,
            (s1 * s1 - 6.0 * s1 * s2 + s2 * s2) / r4,
        ],
    ];
    Ok((h1, h2))
}

/// The constant tensor in ∇∇u(x) = θ(x)·E + (1/4π) pv∫ H(z)/|z|² θ(x−z) dz,
/// for a disc-shaped principal-value exclusion:
/// E₁ = (1/8)[[0,−3],[1,0]], E₂ = (1/8)[[1,0],[0,−1]].
pub fn e_tensor() -> Tensor222 {
    [
        [[0.0, -3.0 / 8.0], [1.0 / 8.0, 0.0]],
        [[1.0 / 8.0, 0.0], [0.0, -1.0 / 8.0]],
    ]
}

/// Vorticity kernel Q(z) = −(1/2π)·z₁/|z|² (ω = Q*θ).
#[allow(non_snake_case)] // kernel names K, G, Q are proper nouns here
pub fn eval_Q(z: Vec2) -> Result<f64> {
    let r2 = check_nonzero(z)?;
    Ok(-z.x / (2.0 * PI * r2))
}
