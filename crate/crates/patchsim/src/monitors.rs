//! Per-snapshot diagnostics: patch area, torus center of mass, interface
//! curvature, the interface-regularity monitors (|∇φ| on the boundary band,
//! a sampled Hölder seminorm, the cutoff δ), and a free-space estimate of
//! ‖∇∇u‖_∞ probed along the interface.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::contour::{extract_contour, resample_uniform};
use crate::error::{Error, Result};
use crate::grid::ScalarField;
use crate::kernels::Vec2;
use crate::quadrature::{hessu_pv_quadrature, GriddedPatch, Orientation};
use crate::spectral::heaviside_indicator;

/// One diagnostics row, written per snapshot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub area: f64,
    /// Center of mass (q₁, q₂), unwrapped by the driver across snapshots.
    pub q: Vec2,
    pub max_speed: f64,
    pub realized_cfl: f64,
    pub max_curvature: f64,
    /// inf |∇φ| over the one-cell band around the zero level set.
    pub grad_phi_inf_on_band: f64,
    /// Sampled Hölder-μ seminorm of ∇φ.
    pub grad_phi_holder: f64,
    /// δ = (inf/seminorm)^{1/μ}, capped at 1.
    pub delta_cutoff: f64,
    pub hess_u_sup_estimate: f64,
}

impl DiagnosticsRecord {
    /// True when every field is finite (the per-snapshot health check).
    pub fn all_finite(&self) -> bool {
        [
            self.t,
            self.area,
            self.q.x,
            self.q.y,
            self.max_speed,
            self.realized_cfl,
            self.max_curvature,
            self.grad_phi_inf_on_band,
            self.grad_phi_holder,
            self.delta_cutoff,
            self.hess_u_sup_estimate,
        ]
        .iter()
        .all(|v| v.is_finite())
    }
}

/// Grid patch area h²·Σ heaviside_indicator(φ).
pub fn patch_area(phi: &ScalarField) -> f64 {
    let theta = heaviside_indicator(phi);
    let h = phi.grid().h();
    h * h * theta.values().iter().sum::<f64>()
}

/// Polygon area of an extracted contour, |shoelace|.
pub fn polygon_area(contour: &crate::quadrature::PatchContour) -> f64 {
    contour.area()
}

/// Center of mass q = Σ θ x / Σ θ of the patch on the torus.
///
/// Plain averaging of chart coordinates is wrong for a patch straddling the
/// seam, so the mean is taken in two passes: a circular (angular) mean per
/// axis locates the patch, then the exact linear mean is taken over
/// coordinates unwrapped to within half a period of that location. The
/// result is reduced to the fundamental chart [−1/2, 1/2)².
pub fn center_of_mass(phi: &ScalarField) -> Result<Vec2> {
    let theta = heaviside_indicator(phi);
    let grid = phi.grid();
    let n = grid.n();
    let mut mass = 0.0;
    let mut cx = (0.0, 0.0); // Σ θ (cos 2πx₁, sin 2πx₁)
    let mut cy = (0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            let w = theta.get(i, j);
            if w == 0.0 {
                continue;
            }
            let (x, y) = grid.coord(i, j);
            let tau = std::f64::consts::TAU;
            cx.0 += w * (tau * x).cos();
            cx.1 += w * (tau * x).sin();
            cy.0 += w * (tau * y).cos();
            cy.1 += w * (tau * y).sin();
            mass += w;
        }
    }
    if mass == 0.0 {
        return Err(Error::EmptyPatch);
    }
    let anchor_x = cx.1.atan2(cx.0) / std::f64::consts::TAU;
    let anchor_y = cy.1.atan2(cy.0) / std::f64::consts::TAU;
    let mut sx = 0.0;
    let mut sy = 0.0;
    for i in 0..n {
        for j in 0..n {
            let w = theta.get(i, j);
            if w == 0.0 {
                continue;
            }
            let (x, y) = grid.coord(i, j);
            sx += w * (x - (x - anchor_x).round());
            sy += w * (y - (y - anchor_y).round());
        }
    }
    let qx = sx / mass;
    let qy = sy / mass;
    Ok(Vec2::new(qx - qx.round(), qy - qy.round()))
}

/// ∇φ by centered differences on the periodic grid; returns the two
/// component arrays in row-major layout.
fn grad_centered(phi: &ScalarField) -> (Vec<f64>, Vec<f64>) {
    let grid = phi.grid();
    let n = grid.n();
    let inv2h = 1.0 / (2.0 * grid.h());
    let mut gx = vec![0.0; n * n];
    let mut gy = vec![0.0; n * n];
    for i in 0..n {
        let ip = (i + 1) % n;
        let im = (i + n - 1) % n;
        for j in 0..n {
            let jp = (j + 1) % n;
            let jm = (j + n - 1) % n;
            let idx = grid.idx(i, j);
            gx[idx] = (phi.get(ip, j) - phi.get(im, j)) * inv2h;
            gy[idx] = (phi.get(i, jp) - phi.get(i, jm)) * inv2h;
        }
    }
    (gx, gy)
}

/// Nodes belonging to cells crossed by the zero level set (the one-cell band
/// around ∂P): a cell is crossed when its four corners do not share the sign
/// of φ (inside means φ > 0).
fn band_nodes(phi: &ScalarField) -> Vec<usize> {
    let grid = phi.grid();
    let n = grid.n();
    let inside = |i: usize, j: usize| phi.get(i % n, j % n) > 0.0;
    let mut mask = vec![false; n * n];
    for i in 0..n {
        for j in 0..n {
            let a = inside(i, j);
            let b = inside(i + 1, j);
            let c = inside(i + 1, j + 1);
            let d = inside(i, j + 1);
            if a == b && b == c && c == d {
                continue;
            }
            mask[grid.idx(i, j)] = true;
            mask[grid.idx((i + 1) % n, j)] = true;
            mask[grid.idx((i + 1) % n, (j + 1) % n)] = true;
            mask[grid.idx(i, (j + 1) % n)] = true;
        }
    }
    (0..n * n).filter(|&k| mask[k]).collect()
}

/// δ cutoff from the two gradient quantities: (inf/seminorm)^{1/μ}, capped at
/// 1; a zero seminorm (flat gradient) reports the cap.
pub fn delta_cutoff(grad_inf: f64, holder_seminorm: f64, mu: f64) -> f64 {
    if holder_seminorm == 0.0 {
        return 1.0;
    }
    (grad_inf / holder_seminorm).powf(1.0 / mu).min(1.0)
}

/// Interface-regularity monitors: (inf |∇φ| on the band, sampled Hölder-μ
/// seminorm of ∇φ, cutoff δ).
///
/// The seminorm is the maximum of |∇φ(x) − ∇φ(x′)| / d(x,x′)^μ over
/// `sample_pairs` random node pairs with separations spanning [2h, 1/4]
/// (log-uniformly), using the torus minimum-image distance. The draw is
/// seeded, so a record is reproducible bit-for-bit.
pub fn regularity_monitors(
    phi: &ScalarField,
    mu: f64,
    sample_pairs: usize,
    seed: u64,
) -> Result<(f64, f64, f64)> {
    assert!(mu > 0.0 && mu < 1.0, "Hölder exponent must lie in (0,1)");
    let grid = phi.grid();
    let n = grid.n();
    let h = grid.h();
    let (gx, gy) = grad_centered(phi);

    let band = band_nodes(phi);
    if band.is_empty() {
        return Err(Error::EmptyContour);
    }
    let grad_inf = band
        .iter()
        .map(|&k| (gx[k] * gx[k] + gy[k] * gy[k]).sqrt())
        .fold(f64::INFINITY, f64::min);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r_min = 2.0 * h;
    let r_max = 0.25_f64;
    let log_ratio = (r_max / r_min).ln();
    let mut seminorm = 0.0_f64;
    for _ in 0..sample_pairs {
        let i = rng.gen_range(0..n);
        let j = rng.gen_range(0..n);
        let r = r_min * (log_ratio * rng.gen::<f64>()).exp();
        let alpha = rng.gen::<f64>() * std::f64::consts::TAU;
        let di = (r * alpha.cos() / h).round() as i64;
        let dj = (r * alpha.sin() / h).round() as i64;
        if di == 0 && dj == 0 {
            continue;
        }
        let i2 = (i as i64 + di).rem_euclid(n as i64) as usize;
        let j2 = (j as i64 + dj).rem_euclid(n as i64) as usize;
        let (xa, ya) = grid.coord(i, j);
        let (xb, yb) = grid.coord(i2, j2);
        let dx = (xb - xa) - (xb - xa).round();
        let dy = (yb - ya) - (yb - ya).round();
        let dist = (dx * dx + dy * dy).sqrt();
        if dist == 0.0 {
            continue;
        }
        let a = grid.idx(i, j);
        let b = grid.idx(i2, j2);
        let dgx = gx[a] - gx[b];
        let dgy = gy[a] - gy[b];
        let diff = (dgx * dgx + dgy * dgy).sqrt();
        seminorm = seminorm.max(diff / dist.powf(mu));
    }
    let delta = delta_cutoff(grad_inf, seminorm, mu);
    Ok((grad_inf, seminorm, delta))
}

/// Free-space estimate of ‖∇∇u‖_∞: the patch indicator is sampled on the
/// grid, probe points are placed 2h inside the interface along inward
/// normals of the arc-length-resampled contour, and the principal-value
/// Hessian quadrature is evaluated at each probe (exclusion 3h, quadrature
/// resolution 256). Returns the largest |entry| over probes and tensor slots.
///
/// The chart is recentered on the patch first (a whole-cell roll of the
/// field, exact on the grid) so a seam-straddling patch is presented to the
/// free-space quadrature as one connected region.
pub fn hess_u_sup_estimate(phi: &ScalarField, probes: usize) -> Result<f64> {
    assert!(probes >= 8, "need at least 8 probe points");
    let grid = phi.grid();
    let n = grid.n();
    let h = grid.h();

    let q = center_of_mass(phi)?;
    let si = (q.x / h).round() as i64;
    let sj = (q.y / h).round() as i64;

    // Roll node values so the patch center lands at the origin.
    let mut rolled = vec![0.0; n * n];
    for i in 0..n {
        let src_i = (i as i64 + si).rem_euclid(n as i64) as usize;
        for j in 0..n {
            let src_j = (j as i64 + sj).rem_euclid(n as i64) as usize;
            rolled[grid.idx(i, j)] = phi.get(src_i, src_j);
        }
    }
    let phi_centered = ScalarField::from_values(grid, rolled)?;
    let contour = extract_contour(&phi_centered)?;
    let resampled = resample_uniform(&contour, probes)?;
    let sampler = GriddedPatch::new(heaviside_indicator(&phi_centered));

    let inward_sign = match resampled.orientation() {
        Orientation::Counterclockwise => 1.0,
        Orientation::Clockwise => -1.0,
    };
    let pts = resampled.points();
    let m = pts.len();
    let mut sup = 0.0_f64;
    for k in 0..m {
        let prev = pts[(k + m - 1) % m];
        let next = pts[(k + 1) % m];
        let tangent = next - prev;
        let len = tangent.norm();
        if len == 0.0 {
            continue;
        }
        // Interior lies to the left of a counterclockwise traversal.
        let inward = tangent.perp() * (inward_sign / len);
        let probe = pts[k] + inward * (2.0 * h);
        let probe = Vec2::new(probe.x - probe.x.round(), probe.y - probe.y.round());
        let tensor = hessu_pv_quadrature(&sampler, probe, 3.0 * h, 256);
        for part in &tensor {
            for row in part {
                for &entry in row {
                    sup = sup.max(entry.abs());
                }
            }
        }
    }
    Ok(sup)
}
