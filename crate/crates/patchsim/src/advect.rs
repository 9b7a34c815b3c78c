//! Monotone first-order upwind transport of a level-set field on the periodic
//! grid, with CFL-controlled Heun (SSP-RK2) time stepping. The velocity may be
//! a fixed field or recomputed from the evolving field at every stage.

use crate::error::{Error, Result};
use crate::grid::{ScalarField, VectorField};

/// Level-set field together with simulation time and step counter.
#[derive(Debug, Clone)]
pub struct SimState {
    pub phi: ScalarField,
    pub t: f64,
    pub step_count: u64,
}

impl SimState {
    pub fn new(phi: ScalarField) -> Self {
        SimState {
            phi,
            t: 0.0,
            step_count: 0,
        }
    }
}

/// Upwind right-hand side F(φ) ≈ −u·∇φ:
/// F_ij = (u₁)⁻·D₁⁺φ − (u₁)⁺·D₁⁻φ + (u₂)⁻·D₂⁺φ − (u₂)⁺·D₂⁻φ
/// with (v)± = max(±v, 0) and D±φ the one-sided differences ±(1/h)(φ_{i±1,j} −
/// φ_ij) (resp. j±1), indices wrapping mod n.
pub fn upwind_rhs(phi: &ScalarField, u: &VectorField) -> Result<ScalarField> {
    let grid = phi.grid();
    if u.grid() != grid {
        return Err(Error::GridMismatch(format!(
            "φ on n = {}, u on n = {}",
            grid.n(),
            u.grid().n()
        )));
    }
    let n = grid.n();
    let inv_h = 1.0 / grid.h();
    let mut out = ScalarField::zeros(grid);
    for i in 0..n {
        let ip = (i + 1) % n;
        let im = (i + n - 1) % n;
        for j in 0..n {
            let jp = (j + 1) % n;
            let jm = (j + n - 1) % n;
            let c = phi.get(i, j);
            let d1p = inv_h * (phi.get(ip, j) - c);
            let d1m = inv_h * (c - phi.get(im, j));
            let d2p = inv_h * (phi.get(i, jp) - c);
            let d2m = inv_h * (c - phi.get(i, jm));
            let (v1, v2) = u.get(i, j);
            let f = v1.min(0.0).abs() * d1p - v1.max(0.0) * d1m + v2.min(0.0).abs() * d2p
                - v2.max(0.0) * d2m;
            out.set(i, j, f);
        }
    }
    Ok(out)
}

/// CFL-limited time step: dt = min(dt_max, cfl·h / max(|u₁| + |u₂|)), with
/// dt_max returned for an identically zero velocity. Requires cfl ∈ (0, 1/2]
/// and dt_max > 0.
pub fn cfl_timestep(u: &VectorField, cfl: f64, dt_max: f64) -> Result<f64> {
    if !(cfl > 0.0 && cfl <= 0.5) {
        return Err(Error::BadCfl(cfl));
    }
    if !(dt_max > 0.0) {
        return Err(Error::config(format!("dt_max must be positive, got {dt_max}")));
    }
    let speed = u.max_speed();
    if speed == 0.0 {
        return Ok(dt_max);
    }
    Ok(dt_max.min(cfl * u.grid().h() / speed))
}

/// One Heun (SSP-RK2) step of ∂φ/∂t = F(φ), with the velocity recomputed from
/// the stage field:
/// φ¹ = φⁿ + dt·F(φⁿ),  φⁿ⁺¹ = ½φⁿ + ½(φ¹ + dt·F(φ¹)).
///
/// A non-finite value in a stage velocity or in the updated field aborts with
/// a blow-up error naming the time and step count of the state the step
/// started from. (The upwind clamps max(±v, 0) would silently map NaN to zero,
/// so the velocity must be checked before it enters the scheme.)
pub fn heun_step(
    state: &SimState,
    dt: f64,
    mut velocity_of: impl FnMut(&ScalarField) -> VectorField,
) -> Result<SimState> {
    let phi_next = heun_update(&state.phi, dt, |phi| {
        let u = velocity_of(phi);
        if !u.all_finite() {
            return Err(Error::Blowup {
                t: state.t,
                step: state.step_count,
            });
        }
        upwind_rhs(phi, &u)
    })?;
    if !phi_next.all_finite() {
        return Err(Error::Blowup {
            t: state.t,
            step: state.step_count,
        });
    }
    Ok(SimState {
        phi: phi_next,
        t: state.t + dt,
        step_count: state.step_count + 1,
    })
}

/// Heun combinator on a scalar field for an arbitrary right-hand side.
fn heun_update(
    phi: &ScalarField,
    dt: f64,
    mut rhs: impl FnMut(&ScalarField) -> Result<ScalarField>,
) -> Result<ScalarField> {
    let grid = phi.grid();
    let f0 = rhs(phi)?;
    let mut stage = ScalarField::zeros(grid);
    for (s, (p, f)) in stage
        .values_mut()
        .iter_mut()
        .zip(phi.values().iter().zip(f0.values()))
    {
        *s = p + dt * f;
    }
    let f1 = rhs(&stage)?;
    let mut out = ScalarField::zeros(grid);
    for (o, ((p, s), f)) in out.values_mut().iter_mut().zip(
        phi.values()
            .iter()
            .zip(stage.values())
            .zip(f1.values().iter()),
    ) {
        *o = 0.5 * p + 0.5 * (s + dt * f);
    }
    Ok(out)
}

/// Advect φ₀ by the fixed velocity u for total time T, taking CFL-limited Heun
/// steps and shortening the final step to land exactly on T.
pub fn advect_fixed(phi0: &ScalarField, u: &VectorField, time: f64, cfl: f64) -> Result<ScalarField> {
    if !(time > 0.0) {
        return Err(Error::config(format!("advection time must be positive, got {time}")));
    }
    let mut state = SimState::new(phi0.clone());
    while state.t < time {
        let remaining = time - state.t;
        // Capping dt_max by the remaining time makes the last step land on T.
        let dt = cfl_timestep(u, cfl, remaining)?;
        let last = dt >= remaining;
        state = heun_step(&state, dt, |_| u.clone())?;
        if last {
            break;
        }
    }
    Ok(state.phi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use std::f64::consts::TAU;

    fn cellular_velocity(grid: GridSpec) -> VectorField {
        // u = ∇⊥ψ with ψ = sin(2πx₁)sin(2πx₂)/(2π): divergence-free.
        VectorField::from_fn(grid, |x, y| {
            (
                -(TAU * x).sin() * (TAU * y).cos(),
                (TAU * x).cos() * (TAU * y).sin(),
            )
        })
    }

    fn blob(grid: GridSpec) -> ScalarField {
        // Smooth bump centered at the origin, well away from the seam.
        ScalarField::from_fn(grid, |x, y| (-60.0 * (x * x + y * y)).exp())
    }

    #[test]
    fn constant_phi_has_zero_rhs() {
        let grid = GridSpec::new(16).unwrap();
        let phi = ScalarField::from_fn(grid, |_, _| 2.5);
        let u = cellular_velocity(grid);
        let f = upwind_rhs(&phi, &u).unwrap();
        assert!(f.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn positive_velocity_selects_backward_difference() {
        let grid = GridSpec::new(32).unwrap();
        let n = grid.n();
        let h = grid.h();
        let phi = ScalarField::from_fn(grid, |x, _| (TAU * x).sin());
        let u = VectorField::from_fn(grid, |_, _| (1.0, 0.0));
        let f = upwind_rhs(&phi, &u).unwrap();
        for i in 0..n {
            let im = (i + n - 1) % n;
            for j in 0..n {
                let expect = -(phi.get(i, j) - phi.get(im, j)) / h;
                assert_eq!(f.get(i, j), expect, "pure backward difference at ({i},{j})");
            }
        }

        let u = VectorField::from_fn(grid, |_, _| (-1.0, 0.0));
        let f = upwind_rhs(&phi, &u).unwrap();
        for i in 0..n {
            let ip = (i + 1) % n;
            for j in 0..n {
                let expect = (phi.get(ip, j) - phi.get(i, j)) / h;
                assert_eq!(f.get(i, j), expect, "pure forward difference at ({i},{j})");
            }
        }
    }

    #[test]
    fn rhs_rejects_grid_mismatch() {
        let a = GridSpec::new(16).unwrap();
        let b = GridSpec::new(32).unwrap();
        let phi = ScalarField::zeros(a);
        let u = VectorField::zeros(b);
        assert!(upwind_rhs(&phi, &u).is_err());
    }

    #[test]
    fn rhs_is_first_order_accurate() {
        // max|F(φ) + u·∇φ| shrinks at observed order in [0.7, 1.1].
        let mut errs = Vec::new();
        for n in [64usize, 128, 256] {
            let grid = GridSpec::new(n).unwrap();
            let phi = ScalarField::from_fn(grid, |x, y| (TAU * x).sin() * (2.0 * TAU * y).cos());
            let u = cellular_velocity(grid);
            let f = upwind_rhs(&phi, &u).unwrap();
            let mut max_err = 0.0_f64;
            for i in 0..n {
                for j in 0..n {
                    let (x, y) = grid.coord(i, j);
                    let gx = TAU * (TAU * x).cos() * (2.0 * TAU * y).cos();
                    let gy = -2.0 * TAU * (TAU * x).sin() * (2.0 * TAU * y).sin();
                    let (v1, v2) = u.get(i, j);
                    max_err = max_err.max((f.get(i, j) + v1 * gx + v2 * gy).abs());
                }
            }
            errs.push(max_err);
        }
        for w in errs.windows(2) {
            let order = (w[0] / w[1]).log2();
            assert!(
                (0.7..=1.1).contains(&order),
                "spatial order {order} outside [0.7, 1.1] (errors {errs:?})"
            );
        }
    }

    #[test]
    fn cfl_timestep_contract() {
        let grid = GridSpec::new(256).unwrap();
        let zero = VectorField::zeros(grid);
        assert_eq!(cfl_timestep(&zero, 0.5, 1e-2).unwrap(), 1e-2);

        let unit = VectorField::from_fn(grid, |_, _| (1.0, 0.0));
        let dt = cfl_timestep(&unit, 0.5, 1.0).unwrap();
        assert_eq!(dt, 1.0 / 512.0, "cfl·h/speed = (1/2)(1/256)/1");

        let double = VectorField::from_fn(grid, |_, _| (2.0, 0.0));
        assert_eq!(cfl_timestep(&double, 0.5, 1.0).unwrap(), dt / 2.0);

        assert!(cfl_timestep(&unit, 0.6, 1.0).is_err(), "cfl > 1/2 rejected");
        assert!(cfl_timestep(&unit, 0.0, 1.0).is_err(), "cfl = 0 rejected");
        assert!(cfl_timestep(&unit, -0.1, 1.0).is_err());
        assert!(cfl_timestep(&unit, 0.5, 0.0).is_err(), "dt_max = 0 rejected");
    }

    #[test]
    fn heun_update_matches_linear_ode_expansion() {
        // F(φ) = λφ → one step multiplies by 1 + λdt + (λdt)²/2.
        let grid = GridSpec::new(16).unwrap();
        let phi = ScalarField::from_fn(grid, |x, y| 1.0 + x + 2.0 * y);
        let lambda = -2.3;
        let dt = 0.01;
        let out = heun_update(&phi, dt, |p| {
            let mut f = p.clone();
            for v in f.values_mut() {
                *v *= lambda;
            }
            Ok(f)
        })
        .unwrap();
        let factor = 1.0 + lambda * dt + lambda * lambda * dt * dt / 2.0;
        for (o, p) in out.values().iter().zip(phi.values()) {
            assert!((o - factor * p).abs() <= 1e-15 * p.abs().max(1.0));
        }
    }

    #[test]
    fn zero_velocity_step_is_identity_bit_for_bit() {
        let grid = GridSpec::new(32).unwrap();
        let phi = ScalarField::from_fn(grid, |x, y| (TAU * x).cos() + 0.3 * (TAU * y).sin());
        let state = SimState::new(phi.clone());
        let zero = VectorField::zeros(grid);
        let next = heun_step(&state, 1e-2, |_| zero.clone()).unwrap();
        assert_eq!(next.phi.values(), phi.values());
        assert_eq!(next.step_count, 1);
        assert_eq!(next.t, 1e-2);
    }

    #[test]
    fn zero_dt_step_leaves_field_unchanged() {
        let grid = GridSpec::new(16).unwrap();
        let phi = blob(grid);
        let state = SimState::new(phi.clone());
        let u = cellular_velocity(grid);
        let next = heun_step(&state, 0.0, |_| u.clone()).unwrap();
        assert_eq!(next.phi.values(), phi.values());
    }

    #[test]
    fn nan_velocity_reports_blowup_with_time_and_step() {
        let grid = GridSpec::new(16).unwrap();
        let mut state = SimState::new(blob(grid));
        state.t = 1.25;
        state.step_count = 7;
        let bad = VectorField::from_fn(grid, |_, _| (f64::NAN, 0.0));
        match heun_step(&state, 1e-3, |_| bad.clone()) {
            Err(Error::Blowup { t, step }) => {
                assert_eq!(t, 1.25);
                assert_eq!(step, 7);
            }
            other => panic!("expected blow-up, got {other:?}"),
        }
    }

    #[test]
    fn heun_is_second_order_in_time() {
        // Fixed velocity, frozen grid: Richardson against a small-dt reference.
        let grid = GridSpec::new(64).unwrap();
        let phi0 = blob(grid);
        let u = cellular_velocity(grid);
        let advance = |steps: u64, dt: f64| {
            let mut state = SimState::new(phi0.clone());
            for _ in 0..steps {
                state = heun_step(&state, dt, |_| u.clone()).unwrap();
            }
            state.phi
        };
        let t_final = 0.05;
        let reference = advance(320, t_final / 320.0);
        let mut errs = Vec::new();
        for m in [10u64, 20, 40] {
            let phi = advance(m, t_final / m as f64);
            let err = phi
                .values()
                .iter()
                .zip(reference.values())
                .fold(0.0_f64, |acc, (a, b)| acc.max((a - b).abs()));
            errs.push(err);
        }
        for w in errs.windows(2) {
            let order = (w[0] / w[1]).log2();
            assert!(
                (1.8..=2.2).contains(&order),
                "time order {order} outside [1.8, 2.2] (errors {errs:?})"
            );
        }
    }

    #[test]
    fn advect_fixed_zero_velocity_is_exact_identity() {
        let grid = GridSpec::new(32).unwrap();
        let phi0 = blob(grid);
        let zero = VectorField::zeros(grid);
        let out = advect_fixed(&phi0, &zero, 0.37, 0.5).unwrap();
        assert_eq!(out.values(), phi0.values());
    }

    #[test]
    fn fixed_velocity_advection_obeys_maximum_principle() {
        let grid = GridSpec::new(64).unwrap();
        let phi0 = blob(grid);
        let (min0, max0) = phi0
            .values()
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            });
        let u = cellular_velocity(grid);
        let out = advect_fixed(&phi0, &u, 0.2, 0.5).unwrap();
        for &v in out.values() {
            assert!(v >= min0 - 1e-12 && v <= max0 + 1e-12, "value {v} escapes [{min0}, {max0}]");
        }
    }

    #[test]
    fn shear_flow_translates_rows_without_new_extrema() {
        // u = (x₂³, 0) evaluated on the fundamental cell: each row j is
        // translated at constant speed, so row-wise extrema cannot grow.
        let grid = GridSpec::new(64).unwrap();
        let n = grid.n();
        let phi0 = blob(grid);
        let u = VectorField::from_fn(grid, |_, y| (y * y * y, 0.0));
        let out = advect_fixed(&phi0, &u, 0.3, 0.5).unwrap();
        for j in 0..n {
            let row_max0 = (0..n).fold(f64::NEG_INFINITY, |m, i| m.max(phi0.get(i, j)));
            let row_max1 = (0..n).fold(f64::NEG_INFINITY, |m, i| m.max(out.get(i, j)));
            assert!(row_max1 <= row_max0 + 1e-12, "row {j} max grew");
        }
    }
}
