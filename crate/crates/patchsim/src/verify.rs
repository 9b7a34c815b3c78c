//! Self-check bundles behind the `verify` subcommand: spectral exactness,
//! upwind transport convergence, the kernel identity suite, short-time
//! coupling agreement, regularization behavior, and the Eulerian-vs-
//! Lagrangian cross-check. Each bundle prints a machine-readable table and
//! reports overall pass/fail; the same measurement functions back the
//! acceptance suite.

use std::f64::consts::{PI, TAU};
use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::advect::advect_fixed;
use crate::config::{InitialCondition, SimConfig};
use crate::error::{Error, Result};
use crate::grid::{GridSpec, ScalarField, VectorField};
use crate::io::{read_contour_csv, read_snapshot};
use crate::kernels::{e_tensor, eval_gradK_gradG, eval_hess_parts, eval_K_G, eval_Q, Mat2, Vec2};
use crate::quadrature::{
    cde_integrate, circle_contour, velocity_area_quadrature, velocity_contour_integral, DiscSpec,
    Orientation, PatchContour,
};
use crate::sim::run_simulation;
use crate::spectral::forward_transform;
use crate::stokes::solve_velocity;

/// What a measured value must satisfy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Expectation {
    /// measured ≤ bound.
    AtMost(f64),
    /// measured < bound (strict).
    Below(f64),
    /// lo ≤ measured ≤ hi.
    InBand(f64, f64),
}

impl Expectation {
    pub fn check(&self, measured: f64) -> bool {
        measured.is_finite()
            && match *self {
                Expectation::AtMost(b) => measured <= b,
                Expectation::Below(b) => measured < b,
                Expectation::InBand(lo, hi) => lo <= measured && measured <= hi,
            }
    }
}

impl std::fmt::Display for Expectation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match *self {
            Expectation::AtMost(b) => write!(f, "<={b:e}"),
            Expectation::Below(b) => write!(f, "<{b:e}"),
            Expectation::InBand(lo, hi) => write!(f, "in[{lo},{hi}]"),
        }
    }
}

/// One row of a verification table.
#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: String,
    pub measured: f64,
    pub expect: Expectation,
}

impl CheckResult {
    pub fn new(name: impl Into<String>, measured: f64, expect: Expectation) -> Self {
        CheckResult {
            name: name.into(),
            measured,
            expect,
        }
    }

    pub fn pass(&self) -> bool {
        self.expect.check(self.measured)
    }
}

/// The recognized subcommand names.
pub const SUBCOMMANDS: [&str; 7] = [
    "stokes",
    "transport",
    "kernels",
    "coupling",
    "convergence",
    "regularization",
    "cde-crosscheck",
];

/// Run one verification bundle, writing its table to `out`. `scratch` hosts
/// any simulation output the bundle needs. Returns overall pass.
pub fn run_subcommand(sub: &str, scratch: &Path, out: &mut dyn Write) -> Result<bool> {
    let checks = match sub {
        "stokes" => stokes_checks(),
        "transport" => transport_checks(),
        "kernels" => kernel_checks(),
        "coupling" => coupling_checks(scratch)?,
        "convergence" => convergence_checks(),
        "regularization" => regularization_checks(scratch)?,
        "cde-crosscheck" => cde_crosscheck_checks(scratch)?,
        other => {
            return Err(Error::config(format!(
                "unknown verify subcommand {other:?}; expected one of {SUBCOMMANDS:?}"
            )))
        }
    };
    let mut all_pass = true;
    for c in &checks {
        let pass = c.pass();
        all_pass &= pass;
        writeln!(
            out,
            "check={} measured={:e} expect={} status={}",
            c.name,
            c.measured,
            c.expect,
            if pass { "PASS" } else { "FAIL" }
        )?;
    }
    writeln!(
        out,
        "subcommand={sub} checks={} failures={} status={}",
        checks.len(),
        checks.iter().filter(|c| !c.pass()).count(),
        if all_pass { "PASS" } else { "FAIL" }
    )?;
    Ok(all_pass)
}

// ---------------------------------------------------------------------------
// stokes: single-mode spectral exactness
// ---------------------------------------------------------------------------

/// Max pointwise velocity error for θ = cos(2π m·x) against the closed-form
/// velocity k₁k⊥/|k|⁴ · cos(k·x), k = 2πm.
pub fn stokes_single_mode_error(n: usize, m1: i64, m2: i64) -> f64 {
    assert!(m1 != 0 || m2 != 0, "the mean mode forces no flow");
    let grid = GridSpec::new(n).unwrap();
    let theta = ScalarField::from_fn(grid, |x, y| (TAU * (m1 as f64 * x + m2 as f64 * y)).cos());
    let u = solve_velocity(&forward_transform(&theta)).u;
    let (k1, k2) = (TAU * m1 as f64, TAU * m2 as f64);
    let k_sq = k1 * k1 + k2 * k2;
    let amp1 = -k1 * k2 / (k_sq * k_sq);
    let amp2 = k1 * k1 / (k_sq * k_sq);
    let mut err = 0.0_f64;
    for i in 0..n {
        for j in 0..n {
            let (x, y) = grid.coord(i, j);
            let c = (k1 * x + k2 * y).cos();
            let (u1, u2) = u.get(i, j);
            err = err.max((u1 - amp1 * c).abs().max((u2 - amp2 * c).abs()));
        }
    }
    err
}

fn stokes_checks() -> Vec<CheckResult> {
    // k ∈ {(2π,0), (4π,2π), (−6π,8π)}.
    [(1_i64, 0_i64), (2, 1), (-3, 4)]
        .iter()
        .map(|&(m1, m2)| {
            CheckResult::new(
                format!("stokes_mode_{m1}_{m2}"),
                stokes_single_mode_error(64, m1, m2),
                Expectation::AtMost(1e-12),
            )
        })
        .collect()
}

// ---------------------------------------------------------------------------
// transport: upwind spatial order on shear and cellular flows
// ---------------------------------------------------------------------------

/// Smooth periodic blob used by the transport convergence studies, centered
/// on the cellular flow's elliptic point (1/4, 1/4), where the rotation is
/// closest to rigid and the refinement study reaches its asymptotic range on
/// the grids used (the same blob rides the shear flow, away from its seam).
fn blob(x: f64, y: f64) -> f64 {
    (3.0 * ((TAU * (x - 0.25)).cos() + (TAU * (y - 0.25)).cos() - 2.0)).exp()
}

fn restrict_l1_error(coarse: &ScalarField, fine: &ScalarField) -> f64 {
    let nc = coarse.grid().n();
    assert_eq!(fine.grid().n(), 2 * nc, "fine grid must halve the spacing");
    let h = coarse.grid().h();
    let mut sum = 0.0;
    for i in 0..nc {
        for j in 0..nc {
            sum += (coarse.get(i, j) - fine.get(2 * i, 2 * j)).abs();
        }
    }
    h * h * sum
}

fn l1_error_vs(f: &ScalarField, exact: impl Fn(f64, f64) -> f64) -> f64 {
    let n = f.grid().n();
    let h = f.grid().h();
    let mut sum = 0.0;
    for i in 0..n {
        for j in 0..n {
            let (x, y) = f.grid().coord(i, j);
            sum += (f.get(i, j) - exact(x, y)).abs();
        }
    }
    h * h * sum
}

/// Observed L¹ convergence order of the upwind scheme on the cellular flow
/// ψ = sin(2πx₁)sin(2πx₂) to T = 0.5, by self-comparison over
/// N ∈ {128, 256, 512}. Returns (order, [coarse error, fine error]).
pub fn cellular_transport_order() -> (f64, [f64; 2]) {
    let t = 0.5;
    let solve = |n: usize| -> ScalarField {
        let grid = GridSpec::new(n).unwrap();
        let phi0 = ScalarField::from_fn(grid, blob);
        let u = VectorField::from_fn(grid, |x, y| {
            (
                -TAU * (TAU * x).sin() * (TAU * y).cos(),
                TAU * (TAU * x).cos() * (TAU * y).sin(),
            )
        });
        advect_fixed(&phi0, &u, t, 0.4).unwrap()
    };
    let s128 = solve(128);
    let s256 = solve(256);
    let s512 = solve(512);
    let e_coarse = restrict_l1_error(&s128, &s256);
    let e_fine = restrict_l1_error(&s256, &s512);
    ((e_coarse / e_fine).log2(), [e_coarse, e_fine])
}

/// Observed L¹ orders on the shear flow u = (x₂³, 0) (chart coordinate
/// x₂ ∈ [−1/2, 1/2)), which translates each row periodically and so has the
/// exact solution φ(x, t) = φ₀(x₁ − t·x₂³, x₂). Returns the two successive
/// orders over N ∈ {128, 256, 512}.
pub fn shear_transport_orders() -> [f64; 2] {
    let t = 0.5;
    let error = |n: usize| -> f64 {
        let grid = GridSpec::new(n).unwrap();
        let phi0 = ScalarField::from_fn(grid, blob);
        let u = VectorField::from_fn(grid, |_, y| (y * y * y, 0.0));
        let sol = advect_fixed(&phi0, &u, t, 0.4).unwrap();
        l1_error_vs(&sol, |x, y| blob(x - t * y * y * y, y))
    };
    let e1 = error(128);
    let e2 = error(256);
    let e3 = error(512);
    [(e1 / e2).log2(), (e2 / e3).log2()]
}

/// Worst row-wise violation of the maximum principle under the shear flow:
/// each row only translates, so a monotone scheme must not push any row's
/// extrema outward. Returns max(new_max − old_max, old_min − new_min) over
/// rows (j indexes x₂ here, i.e. values with a common second coordinate).
pub fn shear_row_extrema_drift(n: usize) -> f64 {
    let grid = GridSpec::new(n).unwrap();
    let phi0 = ScalarField::from_fn(grid, blob);
    let u = VectorField::from_fn(grid, |_, y| (y * y * y, 0.0));
    let sol = advect_fixed(&phi0, &u, 0.5, 0.4).unwrap();
    let mut worst = f64::NEG_INFINITY;
    for j in 0..n {
        let (mut lo0, mut hi0) = (f64::INFINITY, f64::NEG_INFINITY);
        let (mut lo1, mut hi1) = (f64::INFINITY, f64::NEG_INFINITY);
        for i in 0..n {
            lo0 = lo0.min(phi0.get(i, j));
            hi0 = hi0.max(phi0.get(i, j));
            lo1 = lo1.min(sol.get(i, j));
            hi1 = hi1.max(sol.get(i, j));
        }
        worst = worst.max(hi1 - hi0).max(lo0 - lo1);
    }
    worst
}

fn transport_checks() -> Vec<CheckResult> {
    let band = Expectation::InBand(0.7, 1.1);
    let [shear_a, shear_b] = shear_transport_orders();
    let (cellular, _) = cellular_transport_order();
    vec![
        CheckResult::new("transport_shear_order_128_256", shear_a, band),
        CheckResult::new("transport_shear_order_256_512", shear_b, band),
        CheckResult::new(
            "transport_shear_row_max_principle",
            shear_row_extrema_drift(256),
            Expectation::AtMost(1e-13),
        ),
        CheckResult::new("transport_cellular_order", cellular, band),
    ]
}

// ---------------------------------------------------------------------------
// kernels: identity suite, delta tensor, disc oracle equivalence
// ---------------------------------------------------------------------------

fn fd_step(z: Vec2) -> f64 {
    5e-6 * z.norm()
}

fn fd_grad(f: impl Fn(Vec2) -> f64, z: Vec2) -> Vec2 {
    let s = fd_step(z);
    Vec2::new(
        (f(z + Vec2::new(s, 0.0)) - f(z - Vec2::new(s, 0.0))) / (2.0 * s),
        (f(z + Vec2::new(0.0, s)) - f(z - Vec2::new(0.0, s))) / (2.0 * s),
    )
}

fn fd_partial(f: impl Fn(Vec2) -> Vec2, z: Vec2, axis: usize) -> Vec2 {
    let s = fd_step(z);
    let e = if axis == 0 {
        Vec2::new(s, 0.0)
    } else {
        Vec2::new(0.0, s)
    };
    (f(z + e) - f(z - e)) * (1.0 / (2.0 * s))
}

fn mat_max_abs_diff(a: &Mat2, b: &Mat2) -> f64 {
    let mut m = 0.0_f64;
    for i in 0..2 {
        for j in 0..2 {
            m = m.max((a[i][j] - b[i][j]).abs());
        }
    }
    m
}

/// The kernel identity suite over `points` random points with |z| ∈ [0.3, 1.5]:
/// finite-difference identities at 1e-6 relative, algebraic identities at
/// 1e-12, plus the 4096-node circle means of H₁/H₂ at 1e-12.
pub fn kernel_identity_checks(points: usize, seed: u64) -> Vec<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = || -> Vec2 {
        let r = 0.3 + 1.2 * rng.gen::<f64>();
        let a = TAU * rng.gen::<f64>();
        Vec2::new(r * a.cos(), r * a.sin())
    };

    let mut grad_perp_k = 0.0_f64; // ∇⊥K vs G, relative
    let mut grad_k = 0.0_f64; // FD ∇K vs eval, relative
    let mut grad_g = 0.0_f64; // FD ∂ᵢG vs gradG rows, relative
    let mut hess = 0.0_f64; // FD ∂ᵢ∇G vs (1/4π)Hᵢ/|z|², relative
    let mut div_g = 0.0_f64; // algebraic
    let mut curl_g = 0.0_f64; // algebraic vs Q
    let mut homogeneity = 0.0_f64; // algebraic, gradG degree −1
    let mut reflection = 0.0_f64; // algebraic, Hᵢ(−z) = Hᵢ(z)

    for _ in 0..points {
        let z = draw();
        let scale = 1.0 / (1.0 + z.norm());

        let k_of = |p: Vec2| eval_K_G(p).unwrap().0;
        let g_of = |p: Vec2| eval_K_G(p).unwrap().1;
        let g = g_of(z);
        let fd_k = fd_grad(k_of, z);
        let perp = Vec2::new(-fd_k.y, fd_k.x);
        grad_perp_k = grad_perp_k.max((perp - g).norm() / g.norm().max(scale));

        let (gk, gg) = eval_gradK_gradG(z).unwrap();
        grad_k = grad_k.max((fd_k - gk).norm() / gk.norm().max(scale));

        for axis in 0..2 {
            let fd = fd_partial(g_of, z, axis);
            let row = Vec2::new(gg[axis][0], gg[axis][1]);
            grad_g = grad_g.max((fd - row).norm() / row.norm().max(scale));
        }

        let (h1, h2) = eval_hess_parts(z).unwrap();
        let r2 = z.norm_sq();
        for (axis, h) in [(0, h1), (1, h2)] {
            for col in 0..2 {
                let g_col = |p: Vec2| {
                    let m = eval_gradK_gradG(p).unwrap().1;
                    Vec2::new(m[0][col], m[1][col])
                };
                let fd = fd_partial(g_col, z, axis);
                let exact = Vec2::new(
                    h[0][col] / (4.0 * PI * r2),
                    h[1][col] / (4.0 * PI * r2),
                );
                hess = hess.max((fd - exact).norm() / exact.norm().max(scale));
            }
        }

        div_g = div_g.max((gg[0][0] + gg[1][1]).abs());
        let q = eval_Q(z).unwrap();
        curl_g = curl_g.max((gg[0][1] - gg[1][0] - q).abs() / q.abs().max(scale));

        let lambda = 1.0 + 2.0 * z.norm_sq().fract();
        let gg_scaled = eval_gradK_gradG(z * lambda).unwrap().1;
        let mut hom = 0.0_f64;
        for i in 0..2 {
            for j in 0..2 {
                hom = hom.max((gg_scaled[i][j] * lambda - gg[i][j]).abs());
            }
        }
        homogeneity = homogeneity.max(hom / (1.0 + z.norm()));

        let (h1n, h2n) = eval_hess_parts(-z).unwrap();
        reflection = reflection
            .max(mat_max_abs_diff(&h1, &h1n))
            .max(mat_max_abs_diff(&h2, &h2n));
    }

    // Circle means of the Calderón–Zygmund parts vanish.
    let nodes = 4096;
    let mut mean = [[0.0_f64; 2]; 4]; // rows of H₁ then H₂
    for k in 0..nodes {
        let a = TAU * k as f64 / nodes as f64;
        let (h1, h2) = eval_hess_parts(Vec2::new(a.cos(), a.sin())).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                mean[i][j] += h1[i][j];
                mean[2 + i][j] += h2[i][j];
            }
        }
    }
    let circle_mean = mean
        .iter()
        .flatten()
        .fold(0.0_f64, |acc, v| acc.max((v / nodes as f64).abs()));

    let fd = Expectation::AtMost(1e-6);
    let alg = Expectation::AtMost(1e-12);
    vec![
        CheckResult::new("kernel_grad_perp_K_is_G", grad_perp_k, fd),
        CheckResult::new("kernel_grad_K", grad_k, fd),
        CheckResult::new("kernel_grad_G", grad_g, fd),
        CheckResult::new("kernel_second_grad_G", hess, fd),
        CheckResult::new("kernel_div_G_zero", div_g, alg),
        CheckResult::new("kernel_curl_G_is_Q", curl_g, alg),
        CheckResult::new("kernel_gradG_homogeneity", homogeneity, alg),
        CheckResult::new("kernel_H_reflection_even", reflection, alg),
        CheckResult::new("kernel_H_circle_mean_zero", circle_mean, alg),
    ]
}

/// Entrywise error of the numeric limit (1/ε)∮_{|z|=ε} z₁·∇G dσ against E₁,
/// for each requested ε (4096-node trapezoid circle quadrature).
pub fn delta_tensor_errors(epsilons: &[f64]) -> Vec<f64> {
    let e1 = e_tensor()[0];
    let nodes = 4096;
    epsilons
        .iter()
        .map(|&eps| {
            let mut acc = [[0.0_f64; 2]; 2];
            let dsigma = TAU * eps / nodes as f64;
            for k in 0..nodes {
                let a = TAU * k as f64 / nodes as f64;
                let z = Vec2::new(eps * a.cos(), eps * a.sin());
                let gg = eval_gradK_gradG(z).unwrap().1;
                for i in 0..2 {
                    for j in 0..2 {
                        acc[i][j] += z.x * gg[i][j] * dsigma / eps;
                    }
                }
            }
            mat_max_abs_diff(&acc, &e1)
        })
        .collect()
}

/// Disc oracle equivalence: R = 1/2 disc, 20 probes — relative gaps between
/// the area quadrature (resolution 1024) and the contour integral (512
/// nodes), plus the center value against (1/16)(log 2 + 1/2).
/// Returns (max relative probe gap, center relative error).
pub fn disc_oracle_equivalence() -> (f64, f64) {
    let disc = DiscSpec::new(Vec2::ZERO, 0.5).unwrap();
    let contour = circle_contour(Vec2::ZERO, 0.5, 512, Orientation::Counterclockwise);
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut max_rel = 0.0_f64;
    let mut taken = 0;
    while taken < 20 {
        let x = Vec2::new(rng.gen::<f64>() * 2.4 - 1.2, rng.gen::<f64>() * 2.4 - 1.2);
        // Stay clear of the boundary where the indicator jump dominates the
        // midpoint rule.
        if ((x.norm() - 0.5).abs()) < 0.05 {
            continue;
        }
        taken += 1;
        let ua = velocity_area_quadrature(&disc, x, 1024);
        let uc = velocity_contour_integral(&contour, x).unwrap();
        max_rel = max_rel.max((ua - uc).norm() / ua.norm());
    }
    let center = velocity_area_quadrature(&disc, Vec2::ZERO, 1024);
    let exact = (2.0_f64.ln() + 0.5) / 16.0;
    let center_rel = ((center.y - exact).abs() / exact).max(center.x.abs() / exact);
    (max_rel, center_rel)
}

fn kernel_checks() -> Vec<CheckResult> {
    let mut checks = kernel_identity_checks(100, 17);
    for (eps, err) in [1e-1, 1e-2, 1e-3]
        .iter()
        .zip(delta_tensor_errors(&[1e-1, 1e-2, 1e-3]))
    {
        checks.push(CheckResult::new(
            format!("delta_tensor_eps_{eps:e}"),
            err,
            Expectation::AtMost(1e-8),
        ));
    }
    let (probe_rel, center_rel) = disc_oracle_equivalence();
    checks.push(CheckResult::new(
        "disc_area_vs_contour_rel",
        probe_rel,
        Expectation::AtMost(1e-3),
    ));
    checks.push(CheckResult::new(
        "disc_center_closed_form_rel",
        center_rel,
        Expectation::AtMost(1e-4),
    ));
    checks
}

// ---------------------------------------------------------------------------
// convergence: cellular transport order + CDE Heun time order
// ---------------------------------------------------------------------------

/// Node-wise max distance between equally parametrized contours.
fn node_max_distance(a: &PatchContour, b: &PatchContour) -> f64 {
    assert_eq!(a.points().len(), b.points().len());
    a.points()
        .iter()
        .zip(b.points())
        .fold(0.0_f64, |m, (&p, &q)| m.max((p - q).norm()))
}

/// Observed Heun time order of the contour-dynamics integrator on the
/// R = 1/2 circle (128 nodes, T = 0.2), by Richardson comparison against a
/// 512-step reference.
pub fn cde_heun_order() -> f64 {
    let t = 0.2;
    let c0 = circle_contour(Vec2::ZERO, 0.5, 128, Orientation::Counterclockwise);
    let reference = cde_integrate(&c0, t / 512.0, 512).unwrap();
    let coarse = cde_integrate(&c0, t / 16.0, 16).unwrap();
    let fine = cde_integrate(&c0, t / 32.0, 32).unwrap();
    let e_coarse = node_max_distance(&coarse, &reference);
    let e_fine = node_max_distance(&fine, &reference);
    (e_coarse / e_fine).log2()
}

fn convergence_checks() -> Vec<CheckResult> {
    let (cellular, errors) = cellular_transport_order();
    vec![
        CheckResult::new("convergence_cellular_order", cellular, Expectation::InBand(0.7, 1.1)),
        // The spatial error must also shrink in absolute terms.
        CheckResult::new(
            "convergence_cellular_fine_error",
            errors[1],
            Expectation::Below(errors[0]),
        ),
        CheckResult::new("convergence_cde_heun_order", cde_heun_order(), Expectation::InBand(1.8, 2.2)),
    ]
}

// ---------------------------------------------------------------------------
// coupling: short-time agreement of second-derivative monitors across N
// ---------------------------------------------------------------------------

/// Sup norm of the second centered differences of φ (all of φ₁₁, φ₁₂, φ₂₂).
pub fn ddphi_sup(phi: &ScalarField) -> f64 {
    let grid = phi.grid();
    let n = grid.n();
    let h2 = grid.h() * grid.h();
    let mut sup = 0.0_f64;
    for i in 0..n {
        let ip = (i + 1) % n;
        let im = (i + n - 1) % n;
        for j in 0..n {
            let jp = (j + 1) % n;
            let jm = (j + n - 1) % n;
            let c = phi.get(i, j);
            let fxx = (phi.get(ip, j) - 2.0 * c + phi.get(im, j)) / h2;
            let fyy = (phi.get(i, jp) - 2.0 * c + phi.get(i, jm)) / h2;
            let fxy = (phi.get(ip, jp) - phi.get(ip, jm) - phi.get(im, jp)
                + phi.get(im, jm))
                / (4.0 * h2);
            sup = sup.max(fxx.abs()).max(fyy.abs()).max(fxy.abs());
        }
    }
    sup
}

/// Second-derivative monitors of a short coupled run at t = 2 for one grid
/// size: (hess_u_sup_estimate, ‖∇∇φ‖_∞).
///
/// The initial level set is the trigonometric polynomial
/// cos(2πx₁) + cos(2πx₂) − 1, whose patch is a rounded blob around the
/// origin: a C^∞ function of the torus, so both second-derivative monitors
/// have grid-independent limits for short time. (The production distance-
/// based initial data has gradient creases on its far set, where |∇∇φ|
/// legitimately grows like 1/h and no grid study can agree.)
pub fn coupling_monitors_at_t2(n: usize, scratch: &Path) -> Result<(f64, f64)> {
    let grid = GridSpec::new(n)?;
    let phi0 = ScalarField::from_fn(grid, |x, y| (TAU * x).cos() + (TAU * y).cos() - 1.0);
    let ic_path = scratch.join(format!("coupling_phi0_{n}.bin"));
    crate::io::write_snapshot(&ic_path, &phi0, 0.0)?;
    let cfg = SimConfig {
        n,
        cfl: 0.5,
        t_final: 2.0,
        snapshot_interval: 2.0,
        epsilon: 0.0,
        initial_condition: InitialCondition::CustomFile(ic_path),
        output_dir: scratch.join(format!("coupling_{n}")),
        dt_max: 1e-2,
        area_error_abort: 0.01,
        seed: 0,
    };
    let summary = run_simulation(&cfg)?;
    let record = summary
        .records
        .last()
        .ok_or_else(|| Error::Format("coupling run produced no records".into()))?;
    let (phi, _t) = read_snapshot(&cfg.output_dir.join("snapshot_00001.bin"))?;
    Ok((record.hess_u_sup_estimate, ddphi_sup(&phi)))
}

fn coupling_checks(scratch: &Path) -> Result<Vec<CheckResult>> {
    let (hess_a, ddphi_a) = coupling_monitors_at_t2(128, scratch)?;
    let (hess_b, ddphi_b) = coupling_monitors_at_t2(256, scratch)?;
    Ok(vec![
        CheckResult::new(
            "coupling_hess_u_rel_gap_128_256",
            (hess_a - hess_b).abs() / hess_b,
            Expectation::AtMost(0.10),
        ),
        CheckResult::new(
            "coupling_ddphi_rel_gap_128_256",
            (ddphi_a - ddphi_b).abs() / ddphi_b,
            Expectation::AtMost(0.10),
        ),
    ])
}

// ---------------------------------------------------------------------------
// regularization: curvature suppression and small-ε recovery
// ---------------------------------------------------------------------------

/// Directed point-to-polyline distance, against segments (not just nodes).
fn point_to_segment(p: Vec2, a: Vec2, b: Vec2) -> f64 {
    let ab = b - a;
    let denom = ab.norm_sq();
    if denom == 0.0 {
        return (p - a).norm();
    }
    let t = ((p - a).dot(ab) / denom).clamp(0.0, 1.0);
    (p - (a + ab * t)).norm()
}

fn directed_hausdorff(from: &PatchContour, to: &PatchContour) -> f64 {
    let pts = to.points();
    let m = pts.len();
    from.points()
        .iter()
        .map(|&p| {
            (0..m)
                .map(|i| point_to_segment(p, pts[i], pts[(i + 1) % m]))
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0_f64, f64::max)
}

/// Symmetric Hausdorff distance between closed polylines, measured against
/// segments so node placement does not inflate the distance.
pub fn hausdorff_distance(a: &PatchContour, b: &PatchContour) -> f64 {
    directed_hausdorff(a, b).max(directed_hausdorff(b, a))
}

fn contour_mean(c: &PatchContour) -> Vec2 {
    let pts = c.points();
    pts.iter().fold(Vec2::ZERO, |a, &p| a + p) * (1.0 / pts.len() as f64)
}

/// Shift `b` by whole periods so its mean lands nearest `a`'s mean; two
/// continuity-unwrapped contours then compare in a common frame even if one
/// of them was unwrapped into a neighboring copy of the cell.
fn align_periods(a: &PatchContour, b: &PatchContour) -> PatchContour {
    let d = contour_mean(b) - contour_mean(a);
    b.translated(-Vec2::new(d.x.round(), d.y.round()))
}

/// The regularization comparison at N = 256: ε = 4h vs ε = 0 curvature at
/// t = 25, and the Hausdorff gap between the ε = h/16 and ε = 0 contours at
/// t = 10.
pub struct RegularizationReport {
    pub max_curvature_eps0: f64,
    pub max_curvature_eps4h: f64,
    pub recovery_hausdorff: f64,
    pub h: f64,
}

fn regularized_cfg(n: usize, epsilon: f64, t_final: f64, out: std::path::PathBuf) -> SimConfig {
    SimConfig {
        n,
        cfl: 0.5,
        t_final,
        snapshot_interval: 2.5,
        epsilon,
        initial_condition: InitialCondition::AnnulusCosine,
        output_dir: out,
        dt_max: 1e-2,
        area_error_abort: 0.01,
        seed: 0,
    }
}

pub fn regularization_report(scratch: &Path) -> Result<RegularizationReport> {
    let n = 256;
    let h = 1.0 / n as f64;
    let base = run_simulation(&regularized_cfg(n, 0.0, 25.0, scratch.join("reg_eps0")))?;
    let reg = run_simulation(&regularized_cfg(n, 4.0 * h, 25.0, scratch.join("reg_eps4h")))?;
    run_simulation(&regularized_cfg(n, h / 16.0, 10.0, scratch.join("reg_eps_small")))?;
    let last = |s: &crate::sim::RunSummary, what: &str| -> Result<f64> {
        s.records
            .last()
            .map(|r| r.max_curvature)
            .ok_or_else(|| Error::Format(format!("{what} run produced no records")))
    };
    let curv0 = last(&base, "eps0")?;
    let curv4h = last(&reg, "eps4h")?;
    // t = 10 is snapshot index 4 on the 2.5 cadence.
    let (c0, _) = read_contour_csv(&scratch.join("reg_eps0").join("contour_00004.csv"))?;
    let (cs, _) = read_contour_csv(&scratch.join("reg_eps_small").join("contour_00004.csv"))?;
    let recovery = hausdorff_distance(&c0, &align_periods(&c0, &cs));
    Ok(RegularizationReport {
        max_curvature_eps0: curv0,
        max_curvature_eps4h: curv4h,
        recovery_hausdorff: recovery,
        h,
    })
}

fn regularization_checks(scratch: &Path) -> Result<Vec<CheckResult>> {
    let report = regularization_report(scratch)?;
    Ok(vec![
        CheckResult::new(
            "regularization_curvature_ratio_4h",
            report.max_curvature_eps4h / report.max_curvature_eps0,
            Expectation::Below(1.0),
        ),
        CheckResult::new(
            "regularization_recovery_hausdorff_over_h",
            report.recovery_hausdorff / report.h,
            Expectation::AtMost(4.0),
        ),
    ])
}

// ---------------------------------------------------------------------------
// cde-crosscheck: Eulerian torus run vs Lagrangian free-space contour
// ---------------------------------------------------------------------------

/// The Eulerian-vs-Lagrangian cross-check: a disc patch evolved to t = 1 on
/// the torus (N = 512, level set) and in free space (contour dynamics, 512
/// nodes), compared by boundary Hausdorff distance.
///
/// The disc radius is 1/4, centered at the origin: the largest disc whose
/// quarter-period clearance from the seam keeps the periodic images from
/// dominating the comparison.
///
/// The two formulations fix different mean flows: the periodic solver pins
/// û(0) = 0 while the free-space kernel's frame does not, so the free
/// contour rises faster by the cell average of its own velocity field,
/// c ≈ |D| ∫_cell G₂ per unit time. The report carries the raw Hausdorff
/// distance, the centroid gap with its gauge prediction, and the Hausdorff
/// distance after removing the centroid gap (the shape comparison).
pub struct CdeCrosscheckReport {
    pub hausdorff: f64,
    /// Hausdorff distance after translating the free contour by −Δcentroid.
    pub aligned_hausdorff: f64,
    /// Centroid difference, free-space minus torus.
    pub centroid_gap: Vec2,
    /// Predicted gauge drift over the run: (0, |D| t ∫_cell G₂(z) dz).
    pub predicted_gap: Vec2,
    pub h: f64,
}

/// Midpoint quadrature of ∫_{[−1/2,1/2]²} G₂(z) dz (the log singularity at
/// the origin is integrable; the resolution-1024 midpoint grid never lands
/// on it).
fn cell_mean_g2() -> f64 {
    let res = 1024;
    let cell = 1.0 / res as f64;
    let mut sum = 0.0;
    for i in 0..res {
        for j in 0..res {
            let z = Vec2::new(
                -0.5 + (i as f64 + 0.5) * cell,
                -0.5 + (j as f64 + 0.5) * cell,
            );
            sum += eval_K_G(z).unwrap().1.y;
        }
    }
    sum * cell * cell
}

pub fn cde_crosscheck_report(scratch: &Path) -> Result<CdeCrosscheckReport> {
    let n = 512;
    let h = 1.0 / n as f64;
    let radius = 0.25;
    let t_final = 1.0;
    let cfg = SimConfig {
        n,
        cfl: 0.5,
        t_final,
        snapshot_interval: 1.0,
        epsilon: 0.0,
        initial_condition: InitialCondition::Circle {
            center: Vec2::ZERO,
            radius,
        },
        output_dir: scratch.join("cde_crosscheck"),
        dt_max: 1e-2,
        area_error_abort: 0.01,
        seed: 0,
    };
    let summary = run_simulation(&cfg)?;
    let (torus_contour, _) = read_contour_csv(&cfg.output_dir.join("contour_00001.csv"))?;

    let c0 = circle_contour(Vec2::ZERO, radius, 512, Orientation::Counterclockwise);
    let steps = 100;
    let free_contour = cde_integrate(&c0, t_final / steps as f64, steps)?;

    let gap = contour_mean(&free_contour) - contour_mean(&torus_contour);
    let aligned = free_contour.translated(-gap);
    let area0 = summary
        .records
        .first()
        .map(|r| r.area)
        .unwrap_or(PI * radius * radius);
    Ok(CdeCrosscheckReport {
        hausdorff: hausdorff_distance(&torus_contour, &free_contour),
        aligned_hausdorff: hausdorff_distance(&torus_contour, &aligned),
        centroid_gap: gap,
        predicted_gap: Vec2::new(0.0, area0 * t_final * cell_mean_g2()),
        h,
    })
}

fn cde_crosscheck_checks(scratch: &Path) -> Result<Vec<CheckResult>> {
    let report = cde_crosscheck_report(scratch)?;
    Ok(vec![
        // Raw-frame comparison. The frames differ by the mean-flow gauge, so
        // this distance is dominated by the drift below and sits above the
        // bound; it is reported unmodified.
        CheckResult::new(
            "cde_crosscheck_hausdorff_over_h",
            report.hausdorff / report.h,
            Expectation::AtMost(5.0),
        ),
        // The same comparison in a common frame: the shape agreement the
        // cross-check is after.
        CheckResult::new(
            "cde_crosscheck_aligned_hausdorff_over_h",
            report.aligned_hausdorff / report.h,
            Expectation::AtMost(5.0),
        ),
        // The frame gap itself matches the computable gauge prediction,
        // confirming the discrepancy is the mean-flow convention and not a
        // solver error.
        CheckResult::new(
            "cde_crosscheck_drift_matches_gauge",
            (report.centroid_gap - report.predicted_gap).norm() / report.predicted_gap.norm(),
            Expectation::AtMost(0.15),
        ),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expectations_evaluate_correctly() {
        assert!(Expectation::AtMost(1e-12).check(1e-12));
        assert!(!Expectation::AtMost(1e-12).check(2e-12));
        assert!(Expectation::Below(1.0).check(0.99));
        assert!(!Expectation::Below(1.0).check(1.0));
        assert!(Expectation::InBand(0.7, 1.1).check(0.9));
        assert!(!Expectation::InBand(0.7, 1.1).check(1.2));
        assert!(!Expectation::AtMost(1.0).check(f64::NAN), "NaN never passes");
    }

    #[test]
    fn stokes_bundle_is_exact() {
        for (m1, m2) in [(1_i64, 0_i64), (2, 1), (-3, 4)] {
            let err = stokes_single_mode_error(64, m1, m2);
            assert!(err <= 1e-12, "mode ({m1},{m2}): {err:e}");
        }
    }

    #[test]
    fn kernel_suite_passes() {
        for c in kernel_identity_checks(100, 17) {
            assert!(c.pass(), "{}: measured {:e} vs {}", c.name, c.measured, c.expect);
        }
    }

    #[test]
    fn delta_tensor_is_epsilon_independent() {
        let errs = delta_tensor_errors(&[1e-1, 1e-2, 1e-3]);
        for (eps, err) in [1e-1, 1e-2, 1e-3].iter().zip(&errs) {
            assert!(*err <= 1e-8, "eps {eps}: {err:e}");
        }
        assert!(
            (errs[0] - errs[1]).abs() <= 1e-12,
            "homogeneity makes the quadrature ε-independent"
        );
    }

    #[test]
    fn hausdorff_basics() {
        let a = circle_contour(Vec2::ZERO, 0.25, 256, Orientation::Counterclockwise);
        let b = circle_contour(Vec2::ZERO, 0.25, 173, Orientation::Clockwise);
        assert!(
            hausdorff_distance(&a, &b) < 2e-4,
            "same circle, different sampling"
        );
        let c = circle_contour(Vec2::new(0.01, 0.0), 0.25, 256, Orientation::Counterclockwise);
        let d = hausdorff_distance(&a, &c);
        assert!((d - 0.01).abs() < 5e-4, "offset circles: {d}");
        let e = circle_contour(Vec2::ZERO, 0.30, 256, Orientation::Counterclockwise);
        let d = hausdorff_distance(&a, &e);
        assert!((d - 0.05).abs() < 5e-4, "concentric circles: {d}");
    }

    #[test]
    fn unknown_subcommand_is_rejected() {
        let mut sink = Vec::new();
        let err = run_subcommand("everything", Path::new("/tmp"), &mut sink).unwrap_err();
        assert!(err.to_string().contains("everything"), "{err}");
    }

    #[test]
    fn stokes_subcommand_prints_a_table() {
        let mut out = Vec::new();
        let pass = run_subcommand("stokes", Path::new("/tmp"), &mut out).unwrap();
        assert!(pass);
        let text = String::from_utf8(out).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 4, "three checks plus the summary:\n{text}");
        for line in &lines[..3] {
            assert!(line.starts_with("check=stokes_mode_"), "{line}");
            assert!(line.ends_with("status=PASS"), "{line}");
        }
        assert!(lines[3].starts_with("subcommand=stokes"), "{text}");
        assert!(lines[3].ends_with("status=PASS"), "{text}");
    }
}
