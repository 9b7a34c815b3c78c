//! Frequency-space solve of the stationary Stokes balance on the torus:
//! −Δu + ∇Π = θ e₂, div u = 0.
//!
//! Eliminating the pressure with the Leray projection gives the closed-form
//! symbol û(k) = k₁k⊥/|k|⁴·θ̂(k) with k⊥ = (−k₂, k₁); the k = 0 mode carries
//! the mean velocity and is set to zero (the velocity is invariant to adding
//! constants to θ, so the k = 0 mode of θ̂ is simply ignored). Vorticity and
//! streamfunction follow from −Δω = ∂₁θ and ψ = −(Δ²)⁻¹∂₁θ.

use num_complex::Complex64;

use crate::grid::{ScalarField, SpectralField, VectorField};
use crate::spectral::inverse_transform;

/// Velocity field together with its component transforms.
pub struct StokesSolution {
    /// Real-space velocity.
    pub u: VectorField,
    /// Component transforms (û₁, û₂); both have zero k = 0 coefficient and
    /// vanishing discrete divergence ι k·û(k) mode by mode.
    pub uhat: [SpectralField; 2],
}

/// Solve −Δu + ∇Π = θe₂, div u = 0 from the transform of the forcing density.
///
/// û(k) = (k₁ k⊥ / |k|⁴)·θ̂(k) for k ≠ 0 and û(0) = 0. The returned `uhat`
/// carries this raw symbol at every stored mode, so the discrete divergence
/// ι k·û and the chain identities against ω̂ and ψ̂ hold exactly. For the
/// real-space field, the û₁ symbol −k₁k₂/|k|⁴ is odd in each wavenumber
/// separately and therefore has no conjugate partner on the unpaired Nyquist
/// row/column; those modes are zeroed before inversion (the symmetrized
/// interpolant vanishes at the nodes there anyway). The û₂ symbol k₁²/|k|⁴ is
/// even in each wavenumber and inverts cleanly everywhere.
pub fn solve_velocity(theta_hat: &SpectralField) -> StokesSolution {
    let grid = theta_hat.grid();
    let n = grid.n();
    let two_pi = std::f64::consts::TAU;
    let mut u1_hat = SpectralField::zeros(grid);
    let mut u2_hat = SpectralField::zeros(grid);
    for i in 0..n {
        let k1 = two_pi * grid.mode(i) as f64;
        for j in 0..n {
            let k2 = two_pi * grid.mode(j) as f64;
            let k_sq = k1 * k1 + k2 * k2;
            if k_sq == 0.0 {
                continue;
            }
            let th = theta_hat.raw()[grid.idx(i, j)];
            let scale = k1 / (k_sq * k_sq);
            u1_hat.raw_mut()[grid.idx(i, j)] = th * (-k2 * scale);
            u2_hat.raw_mut()[grid.idx(i, j)] = th * (k1 * scale);
        }
    }
    let mut u1_real_hat = u1_hat.clone();
    let nyq = n / 2; // storage index of mode −n/2
    for a in 0..n {
        u1_real_hat.raw_mut()[grid.idx(nyq, a)] = Complex64::new(0.0, 0.0);
        u1_real_hat.raw_mut()[grid.idx(a, nyq)] = Complex64::new(0.0, 0.0);
    }
    let u1 = inverse_transform(&u1_real_hat)
        .expect("Nyquist-free odd-odd symbol preserves conjugate symmetry");
    let u2 = inverse_transform(&u2_hat).expect("even-even symbol preserves conjugate symmetry");
    let u = VectorField::from_components(grid, u1.values().to_vec(), u2.values().to_vec())
        .expect("components from the same grid");
    StokesSolution {
        u,
        uhat: [u1_hat, u2_hat],
    }
}

/// Transform of the vorticity: ω̂(k) = ι k₁ θ̂(k)/|k|² for k ≠ 0 (from −Δω = ∂₁θ).
pub fn vorticity_hat(theta_hat: &SpectralField) -> SpectralField {
    apply_i_k1_symbol(theta_hat, 2)
}

/// Transform of the streamfunction: ψ̂(k) = −ι k₁ θ̂(k)/|k|⁴ (u = ∇⊥ψ).
pub fn streamfunction_hat(theta_hat: &SpectralField) -> SpectralField {
    let mut out = apply_i_k1_symbol(theta_hat, 4);
    for c in out.raw_mut() {
        *c = -*c;
    }
    out
}

/// Real-space vorticity of the Stokes solution driven by θ̂.
pub fn vorticity_from_theta(theta_hat: &SpectralField) -> ScalarField {
    to_real_zeroing_k1_nyquist(vorticity_hat(theta_hat))
}

/// Real-space streamfunction of the Stokes solution driven by θ̂.
pub fn streamfunction_from_theta(theta_hat: &SpectralField) -> ScalarField {
    to_real_zeroing_k1_nyquist(streamfunction_hat(theta_hat))
}

/// Apply ι k₁ / |k|^pow to every nonzero mode.
fn apply_i_k1_symbol(theta_hat: &SpectralField, pow: i32) -> SpectralField {
    let grid = theta_hat.grid();
    let n = grid.n();
    let two_pi = std::f64::consts::TAU;
    let mut out = SpectralField::zeros(grid);
    for i in 0..n {
        let k1 = two_pi * grid.mode(i) as f64;
        for j in 0..n {
            let k2 = two_pi * grid.mode(j) as f64;
            let k_sq = k1 * k1 + k2 * k2;
            if k_sq == 0.0 {
                continue;
            }
            let denom = match pow {
                2 => k_sq,
                4 => k_sq * k_sq,
                _ => k_sq.powi(pow / 2),
            };
            let th = theta_hat.raw()[grid.idx(i, j)];
            out.raw_mut()[grid.idx(i, j)] = th * Complex64::new(0.0, k1 / denom);
        }
    }
    out
}

/// Invert an ι·k₁-symbol field after zeroing the m₁ = −n/2 column.
///
/// The symbol ι k₁ is odd in k₁; on the unpaired Nyquist column m₁ = −n/2 it
/// turns self-conjugate coefficients into pure-imaginary ones with no partner,
/// so that column has no real trigonometric interpolant. Zeroing it is the
/// standard odd-derivative convention and only affects the highest frequency.
fn to_real_zeroing_k1_nyquist(mut hat: SpectralField) -> ScalarField {
    let grid = hat.grid();
    let n = grid.n();
    let nyq = n / 2; // storage index of mode −n/2
    for j in 0..n {
        hat.raw_mut()[grid.idx(nyq, j)] = Complex64::new(0.0, 0.0);
    }
    inverse_transform(&hat).expect("Nyquist-free odd symbol preserves conjugate symmetry")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use crate::spectral::forward_transform;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};
    use std::f64::consts::{PI, TAU};

    fn max_err(a: &[f64], b: &[f64]) -> f64 {
        a.iter()
            .zip(b)
            .fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()))
    }

    fn random_theta(n: usize, seed: u64) -> SpectralField {
        let grid = GridSpec::new(n).unwrap();
        let mut rng = StdRng::seed_from_u64(seed);
        let mut f = ScalarField::zeros(grid);
        for v in f.values_mut() {
            *v = rng.gen_range(-1.0..1.0);
        }
        forward_transform(&f)
    }

    #[test]
    fn cosine_in_x1_recovers_exact_solution() {
        // θ = cos(2πx₁): k = (2π, 0), u = k₁k⊥/|k|⁴·cos = (0, cos(2πx₁)/(4π²)).
        let grid = GridSpec::new(64).unwrap();
        let theta = ScalarField::from_fn(grid, |x, _| (TAU * x).cos());
        let sol = solve_velocity(&forward_transform(&theta));
        let exact_u2 = ScalarField::from_fn(grid, |x, _| (TAU * x).cos() / (4.0 * PI * PI));
        assert!(sol.u.u1().iter().all(|v| v.abs() < 1e-12));
        assert!(max_err(sol.u.u2(), exact_u2.values()) < 1e-12);
    }

    #[test]
    fn x2_only_and_constant_forcings_give_zero() {
        let grid = GridSpec::new(32).unwrap();
        let theta = ScalarField::from_fn(grid, |_, y| (TAU * y).cos());
        let sol = solve_velocity(&forward_transform(&theta));
        assert!(sol.u.max_speed() < 1e-14, "k₁ factor kills x₂-only forcing");

        let theta = ScalarField::from_fn(grid, |_, _| 0.73);
        let sol = solve_velocity(&forward_transform(&theta));
        assert!(sol.u.max_speed() < 1e-14, "constant forcing has only k = 0");
    }

    #[test]
    fn single_mode_exactness_sweep() {
        // u matches k₁k⊥/|k|⁴·cos(k·x) to machine precision for random modes.
        let n = 64;
        let grid = GridSpec::new(n).unwrap();
        let mut rng = StdRng::seed_from_u64(42);
        for _ in 0..10 {
            let m1 = rng.gen_range(-31..32);
            let m2 = rng.gen_range(-31..32);
            if m1 == 0 && m2 == 0 {
                continue;
            }
            let (k1, k2) = (TAU * m1 as f64, TAU * m2 as f64);
            let theta = ScalarField::from_fn(grid, |x, y| (k1 * x + k2 * y).cos());
            let sol = solve_velocity(&forward_transform(&theta));
            let d = (k1 * k1 + k2 * k2).powi(2);
            let e1 = ScalarField::from_fn(grid, |x, y| k1 * -k2 / d * (k1 * x + k2 * y).cos());
            let e2 = ScalarField::from_fn(grid, |x, y| k1 * k1 / d * (k1 * x + k2 * y).cos());
            let err = max_err(sol.u.u1(), e1.values()).max(max_err(sol.u.u2(), e2.values()));
            assert!(err < 1e-12, "mode ({m1},{m2}) error {err}");
        }
    }

    #[test]
    fn nyquist_forcing_keeps_even_component() {
        // θ = cos(πn·x₁) lives on the unpaired Nyquist column. The even û₂
        // symbol still applies exactly; the odd-odd û₁ symbol is zeroed there.
        let n = 32;
        let grid = GridSpec::new(n).unwrap();
        let kn = PI * n as f64;
        let theta = ScalarField::from_fn(grid, |x, _| (kn * x).cos());
        let sol = solve_velocity(&forward_transform(&theta));
        let exact_u2 = ScalarField::from_fn(grid, |x, _| (kn * x).cos() / (kn * kn));
        assert!(sol.u.u1().iter().all(|v| v.abs() < 1e-14));
        assert!(max_err(sol.u.u2(), exact_u2.values()) < 1e-14);
    }

    #[test]
    fn mean_mode_is_zero_and_divergence_free() {
        let theta_hat = random_theta(64, 5);
        let sol = solve_velocity(&theta_hat);
        let grid = theta_hat.grid();
        assert_eq!(sol.uhat[0].coeff(0, 0), Complex64::new(0.0, 0.0));
        assert_eq!(sol.uhat[1].coeff(0, 0), Complex64::new(0.0, 0.0));
        let n = grid.n();
        for i in 0..n {
            let k1 = TAU * grid.mode(i) as f64;
            for j in 0..n {
                let k2 = TAU * grid.mode(j) as f64;
                let div = Complex64::new(0.0, k1) * sol.uhat[0].raw()[grid.idx(i, j)]
                    + Complex64::new(0.0, k2) * sol.uhat[1].raw()[grid.idx(i, j)];
                assert!(div.norm() < 1e-12, "divergence at mode ({i},{j})");
            }
        }
    }

    #[test]
    fn solve_is_linear_and_mean_invariant() {
        let a = random_theta(32, 1);
        let b = random_theta(32, 2);
        let grid = a.grid();
        let combo = SpectralField::from_coeff(
            grid,
            a.raw()
                .iter()
                .zip(b.raw())
                .map(|(x, y)| 2.0 * x - 0.5 * y)
                .collect(),
        )
        .unwrap();
        let sol_combo = solve_velocity(&combo);
        let sol_a = solve_velocity(&a);
        let sol_b = solve_velocity(&b);
        let expect1: Vec<f64> = sol_a
            .u
            .u1()
            .iter()
            .zip(sol_b.u.u1())
            .map(|(x, y)| 2.0 * x - 0.5 * y)
            .collect();
        let expect2: Vec<f64> = sol_a
            .u
            .u2()
            .iter()
            .zip(sol_b.u.u2())
            .map(|(x, y)| 2.0 * x - 0.5 * y)
            .collect();
        assert!(max_err(sol_combo.u.u1(), &expect1) < 1e-12);
        assert!(max_err(sol_combo.u.u2(), &expect2) < 1e-12);

        // Shifting θ̂ by a constant (k = 0) leaves the velocity untouched.
        let mut shifted = a.clone();
        shifted.set_coeff(0, 0, a.coeff(0, 0) + Complex64::new(3.0, 0.0));
        let sol_shift = solve_velocity(&shifted);
        assert_eq!(sol_shift.u, sol_a.u);
    }

    #[test]
    fn vorticity_example_and_zero_cases() {
        // θ = cos(2πx₁): −Δω = ∂₁θ gives ω = −sin(2πx₁)/(2π).
        let grid = GridSpec::new(64).unwrap();
        let theta = ScalarField::from_fn(grid, |x, _| (TAU * x).cos());
        let omega = vorticity_from_theta(&forward_transform(&theta));
        let exact = ScalarField::from_fn(grid, |x, _| -(TAU * x).sin() / TAU);
        assert!(max_err(omega.values(), exact.values()) < 1e-12);

        let theta = ScalarField::from_fn(grid, |_, y| (2.0 * TAU * y).sin());
        let omega = vorticity_from_theta(&forward_transform(&theta));
        assert!(omega.max_abs() < 1e-14, "x₂-only θ has zero vorticity");
    }

    #[test]
    fn vorticity_equals_discrete_curl_of_velocity() {
        let theta_hat = random_theta(64, 9);
        let grid = theta_hat.grid();
        let sol = solve_velocity(&theta_hat);
        let omega_hat = vorticity_hat(&theta_hat);
        let n = grid.n();
        for i in 0..n {
            let k1 = TAU * grid.mode(i) as f64;
            for j in 0..n {
                let k2 = TAU * grid.mode(j) as f64;
                // ω̂ = ι k⊥·û = −ι k₂ û₁ + ι k₁ û₂.
                let curl = Complex64::new(0.0, -k2) * sol.uhat[0].raw()[grid.idx(i, j)]
                    + Complex64::new(0.0, k1) * sol.uhat[1].raw()[grid.idx(i, j)];
                let diff = (curl - omega_hat.raw()[grid.idx(i, j)]).norm();
                assert!(diff < 1e-12, "curl identity fails at mode ({i},{j}): {diff}");
            }
        }
    }

    #[test]
    fn streamfunction_example_and_identities() {
        // θ = cos(2πx₁): ψ̂ = −ιk₁θ̂/|k|⁴ gives ψ = sin(2πx₁)/(8π³); then
        // u = ∇⊥ψ = (0, cos(2πx₁)/(4π²)) and Δψ = ω both close the chain.
        let grid = GridSpec::new(64).unwrap();
        let theta = ScalarField::from_fn(grid, |x, _| (TAU * x).cos());
        let theta_hat = forward_transform(&theta);
        let psi = streamfunction_from_theta(&theta_hat);
        let exact = ScalarField::from_fn(grid, |x, _| (TAU * x).sin() / (8.0 * PI.powi(3)));
        assert!(max_err(psi.values(), exact.values()) < 1e-12);

        let theta = ScalarField::from_fn(grid, |_, y| 0.4 * (TAU * y).cos());
        assert!(streamfunction_from_theta(&forward_transform(&theta)).max_abs() < 1e-14);
    }

    #[test]
    fn psi_u_omega_chain_closes_in_frequency_space() {
        let theta_hat = random_theta(64, 13);
        let grid = theta_hat.grid();
        let sol = solve_velocity(&theta_hat);
        let psi_hat = streamfunction_hat(&theta_hat);
        let omega_hat = vorticity_hat(&theta_hat);
        let n = grid.n();
        for i in 0..n {
            let k1 = TAU * grid.mode(i) as f64;
            for j in 0..n {
                let k2 = TAU * grid.mode(j) as f64;
                let idx = grid.idx(i, j);
                // û = ι k⊥ ψ̂ reproduces the velocity symbol at every mode.
                let v1 = Complex64::new(0.0, -k2) * psi_hat.raw()[idx];
                let v2 = Complex64::new(0.0, k1) * psi_hat.raw()[idx];
                assert!((v1 - sol.uhat[0].raw()[idx]).norm() < 1e-12);
                assert!((v2 - sol.uhat[1].raw()[idx]).norm() < 1e-12);
                // Δψ = ω: |k|²ψ̂ = −ω̂.
                let k_sq = k1 * k1 + k2 * k2;
                let lap = psi_hat.raw()[idx] * k_sq;
                assert!((lap + omega_hat.raw()[idx]).norm() < 1e-10);
            }
        }
    }
}
