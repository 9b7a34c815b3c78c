//! Free-space velocity of a density patch, evaluated two independent ways
//! (area quadrature of u = G*θ and Green's-theorem contour integral of the
//! K kernel), the Lagrangian contour-dynamics evolution of the patch
//! boundary, and the principal-value quadrature for ∇∇u.
//!
//! These operate on ℝ², not the torus; they serve as analytic oracles for the
//! periodic simulator.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::grid::ScalarField;
use crate::kernels::{e_tensor, eval_hess_parts, eval_K_G, Tensor222, Vec2};

/// Traversal direction of a closed polyline, by the sign of its shoelace area.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    Clockwise,
    Counterclockwise,
}

/// Signed (shoelace) area of a closed polygon; positive for counterclockwise
/// traversal.
pub fn polygon_signed_area(points: &[Vec2]) -> f64 {
    let m = points.len();
    let mut twice = 0.0;
    for i in 0..m {
        let a = points[i];
        let b = points[(i + 1) % m];
        twice += a.x * b.y - b.x * a.y;
    }
    0.5 * twice
}

/// Closed polyline bounding a patch, with its traversal orientation.
#[derive(Debug, Clone)]
pub struct PatchContour {
    points: Vec<Vec2>,
    orientation: Orientation,
}

impl PatchContour {
    /// Build from an ordered node list (last point connects back to the
    /// first); the orientation is inferred from the signed area. Rejects
    /// fewer than 8 nodes, repeated consecutive nodes, non-finite
    /// coordinates, and zero signed area.
    pub fn new(points: Vec<Vec2>) -> Result<Self> {
        if points.len() < 8 {
            return Err(Error::DegenerateContour(format!(
                "need at least 8 nodes, got {}",
                points.len()
            )));
        }
        if points.iter().any(|p| !p.is_finite()) {
            return Err(Error::DegenerateContour(
                "non-finite node coordinate".into(),
            ));
        }
        let m = points.len();
        for i in 0..m {
            if points[i] == points[(i + 1) % m] {
                return Err(Error::DegenerateContour(format!(
                    "repeated consecutive node at index {i}"
                )));
            }
        }
        let signed = polygon_signed_area(&points);
        if signed == 0.0 {
            return Err(Error::DegenerateContour(
                "zero signed area; orientation undefined".into(),
            ));
        }
        let orientation = if signed > 0.0 {
            Orientation::Counterclockwise
        } else {
            Orientation::Clockwise
        };
        Ok(PatchContour {
            points,
            orientation,
        })
    }

    pub fn points(&self) -> &[Vec2] {
        &self.points
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    pub fn signed_area(&self) -> f64 {
        polygon_signed_area(&self.points)
    }

    /// Enclosed area, |signed area|.
    pub fn area(&self) -> f64 {
        self.signed_area().abs()
    }

    /// Same polygon traversed the other way.
    pub fn reversed(&self) -> PatchContour {
        let mut points = self.points.clone();
        points.reverse();
        PatchContour {
            points,
            orientation: match self.orientation {
                Orientation::Clockwise => Orientation::Counterclockwise,
                Orientation::Counterclockwise => Orientation::Clockwise,
            },
        }
    }

    pub fn translated(&self, shift: Vec2) -> PatchContour {
        PatchContour {
            points: self.points.iter().map(|&p| p + shift).collect(),
            orientation: self.orientation,
        }
    }

    fn mean_spacing(&self) -> f64 {
        let m = self.points.len();
        let total: f64 = (0..m)
            .map(|i| (self.points[(i + 1) % m] - self.points[i]).norm())
            .sum();
        total / m as f64
    }

    fn min_adjacent_spacing(&self) -> f64 {
        let m = self.points.len();
        (0..m)
            .map(|i| (self.points[(i + 1) % m] - self.points[i]).norm())
            .fold(f64::INFINITY, f64::min)
    }
}

/// Uniformly sampled circle contour with the requested orientation.
pub fn circle_contour(center: Vec2, radius: f64, nodes: usize, orientation: Orientation) -> PatchContour {
    ellipse_contour(center, radius, radius, nodes, orientation)
}

/// Uniformly sampled (in parameter) axis-aligned ellipse contour.
pub fn ellipse_contour(
    center: Vec2,
    a: f64,
    b: f64,
    nodes: usize,
    orientation: Orientation,
) -> PatchContour {
    assert!(nodes >= 8 && a > 0.0 && b > 0.0);
    let points: Vec<Vec2> = (0..nodes)
        .map(|i| {
            let phi = std::f64::consts::TAU * i as f64 / nodes as f64;
            let phi = match orientation {
                Orientation::Counterclockwise => phi,
                Orientation::Clockwise => -phi,
            };
            center + Vec2::new(a * phi.cos(), b * phi.sin())
        })
        .collect();
    PatchContour::new(points).expect("analytic ellipse nodes are valid")
}

/// A patch described by its indicator function over a bounding box.
pub trait PatchSampler {
    /// Indicator value at a point (0, 1, or ½ exactly on a known boundary).
    fn indicator(&self, y: Vec2) -> f64;
    /// Axis-aligned box (lower corner, upper corner) containing the patch.
    fn bbox(&self) -> (Vec2, Vec2);
}

/// Round patch.
#[derive(Debug, Clone, Copy)]
pub struct DiscSpec {
    pub center: Vec2,
    pub radius: f64,
}

impl DiscSpec {
    pub fn new(center: Vec2, radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::DegenerateContour(format!(
                "disc radius must be positive, got {radius}"
            )));
        }
        Ok(DiscSpec { center, radius })
    }
}

impl PatchSampler for DiscSpec {
    fn indicator(&self, y: Vec2) -> f64 {
        if (y - self.center).norm_sq() <= self.radius * self.radius {
            1.0
        } else {
            0.0
        }
    }

    fn bbox(&self) -> (Vec2, Vec2) {
        let r = Vec2::new(self.radius, self.radius);
        (self.center - r, self.center + r)
    }
}

/// Axis-aligned elliptical patch with semi-axes (a, b).
#[derive(Debug, Clone, Copy)]
pub struct EllipseSpec {
    pub center: Vec2,
    pub a: f64,
    pub b: f64,
}

impl PatchSampler for EllipseSpec {
    fn indicator(&self, y: Vec2) -> f64 {
        let d = y - self.center;
        if (d.x / self.a).powi(2) + (d.y / self.b).powi(2) <= 1.0 {
            1.0
        } else {
            0.0
        }
    }

    fn bbox(&self) -> (Vec2, Vec2) {
        let r = Vec2::new(self.a, self.b);
        (self.center - r, self.center + r)
    }
}

/// Patch given by a gridded indicator field on the fundamental chart
/// [−1/2, 1/2)², sampled by nearest node with periodic wrap. Lets the
/// free-space oracles probe the simulator's own Heaviside field.
#[derive(Debug, Clone)]
pub struct GriddedPatch {
    field: ScalarField,
}

impl GriddedPatch {
    pub fn new(field: ScalarField) -> Self {
        GriddedPatch { field }
    }
}

impl PatchSampler for GriddedPatch {
    fn indicator(&self, y: Vec2) -> f64 {
        let grid = self.field.grid();
        let n = grid.n() as i64;
        let wrap = |v: f64| -> usize {
            let idx = (v / grid.h()).round() as i64 + n / 2;
            idx.rem_euclid(n) as usize
        };
        self.field.get(wrap(y.x), wrap(y.y))
    }

    fn bbox(&self) -> (Vec2, Vec2) {
        (Vec2::new(-0.5, -0.5), Vec2::new(0.5, 0.5))
    }
}

fn g_kernel(z: Vec2) -> Vec2 {
    eval_K_G(z).expect("quadrature keeps evaluation points off the singularity").1
}

fn k_kernel(z: Vec2) -> f64 {
    eval_K_G(z).expect("probe point is kept away from contour nodes").0
}

/// Distance below which a quadrature cell center counts as singular and the
/// cell is subdivided once.
const SINGULAR_CELL_TOL: f64 = 1e-12;

/// Distance below which a probe point is considered to lie on a contour node.
const CONTOUR_PROBE_TOL: f64 = 1e-9;

/// Fraction of the mean node spacing below which adjacent contour nodes count
/// as collided during time integration.
const NODE_COLLISION_FRACTION: f64 = 1e-3;

/// Free-space patch velocity u(x) = ∫ G(x−y) θ(y) dy by the midpoint rule on
/// a resolution² grid over the patch bounding box. A cell whose center lies
/// within 1e−12 of x is subdivided once and its 4 sub-centers used (the log
/// singularity of G is integrable; the O(h² log h) error this leaves is
/// within the module's 1e−3 oracle tolerance).
pub fn velocity_area_quadrature<P: PatchSampler + ?Sized>(
    patch: &P,
    x: Vec2,
    resolution: usize,
) -> Vec2 {
    assert!(resolution >= 64, "area quadrature needs resolution ≥ 64");
    let (lo, hi) = patch.bbox();
    let dx = (hi.x - lo.x) / resolution as f64;
    let dy = (hi.y - lo.y) / resolution as f64;
    let cell = dx * dy;
    let mut u = Vec2::ZERO;
    for i in 0..resolution {
        let yx = lo.x + (i as f64 + 0.5) * dx;
        for j in 0..resolution {
            let yc = Vec2::new(yx, lo.y + (j as f64 + 0.5) * dy);
            if (x - yc).norm() <= SINGULAR_CELL_TOL {
                for (sx, sy) in [(-0.25, -0.25), (-0.25, 0.25), (0.25, -0.25), (0.25, 0.25)] {
                    let ys = yc + Vec2::new(sx * dx, sy * dy);
                    let w = patch.indicator(ys);
                    if w > 0.0 {
                        u = u + w * (0.25 * cell) * g_kernel(x - ys);
                    }
                }
            } else {
                let w = patch.indicator(yc);
                if w > 0.0 {
                    u = u + w * cell * g_kernel(x - yc);
                }
            }
        }
    }
    u
}

/// Raw periodic trapezoid sum −? ∮ K(x−z) z′ dσ over the polyline before any
/// orientation convention: Σᵢ K(x−zᵢ)·(zᵢ₊₁−zᵢ₋₁)/2 (the uniform parameter
/// increment cancels against the centered-difference tangent). Rejects x
/// within 1e−9 of a node.
pub fn velocity_contour_integral_raw(contour: &PatchContour, x: Vec2) -> Result<Vec2> {
    let pts = contour.points();
    let m = pts.len();
    for &p in pts {
        let dist = (x - p).norm();
        if dist < CONTOUR_PROBE_TOL {
            return Err(Error::PointOnContour { dist });
        }
    }
    let mut sum = Vec2::ZERO;
    for i in 0..m {
        let tangent = (pts[(i + 1) % m] - pts[(i + m - 1) % m]) * 0.5;
        sum = sum + k_kernel(x - pts[i]) * tangent;
    }
    Ok(sum)
}

/// Free-space patch velocity from the boundary alone, by Green's theorem:
/// u(x) = −∮_ccw K(x−z) z′ dσ. The raw trapezoid sum is negated for a
/// counterclockwise contour and kept for a clockwise one, so both
/// orientations yield the same physical velocity.
pub fn velocity_contour_integral(contour: &PatchContour, x: Vec2) -> Result<Vec2> {
    let raw = velocity_contour_integral_raw(contour, x)?;
    Ok(match contour.orientation() {
        Orientation::Counterclockwise => -raw,
        Orientation::Clockwise => raw,
    })
}

/// Contour-dynamics right-hand side: the boundary velocity at every node,
/// ∂z/∂t(αᵢ) = −∮ K(z(αᵢ)−z(σ)) z′(σ) dσ, by the same trapezoid rule with
/// the σ = αᵢ term skipped (the integrand's log singularity is integrable and
/// one trapezoid weight vanishes in the refinement limit). Orientation is
/// corrected exactly as in [`velocity_contour_integral`].
pub fn cde_rhs(contour: &PatchContour) -> Result<Vec<Vec2>> {
    let pts = contour.points();
    let m = pts.len();
    let sign = match contour.orientation() {
        Orientation::Counterclockwise => -1.0,
        Orientation::Clockwise => 1.0,
    };
    let mut velocities = Vec::with_capacity(m);
    for i in 0..m {
        let mut sum = Vec2::ZERO;
        for j in 0..m {
            if j == i {
                continue;
            }
            let tangent = (pts[(j + 1) % m] - pts[(j + m - 1) % m]) * 0.5;
            let z = pts[i] - pts[j];
            // Distinct nodes are guaranteed unequal only consecutively; a
            // coincidence elsewhere is a degenerate contour.
            if z == Vec2::ZERO {
                return Err(Error::DegenerateContour(format!(
                    "nodes {i} and {j} coincide"
                )));
            }
            sum = sum + k_kernel(z) * tangent;
        }
        velocities.push(sign * sum);
    }
    Ok(velocities)
}

/// Integrate the contour-dynamics equation with Heun steps of `dt`. Aborts if
/// adjacent nodes approach collision (spacing under 1e−3 of the mean); no
/// node redistribution is performed, so this is a short-time oracle.
pub fn cde_integrate(contour: &PatchContour, dt: f64, steps: usize) -> Result<PatchContour> {
    let mut current = contour.clone();
    for step in 0..steps {
        let min = current.min_adjacent_spacing();
        let mean = current.mean_spacing();
        if min < NODE_COLLISION_FRACTION * mean {
            return Err(Error::DegenerateContour(format!(
                "node collision before step {step}: min spacing {min:.3e} < {NODE_COLLISION_FRACTION:e} of mean {mean:.3e}"
            )));
        }
        let v0 = cde_rhs(&current)?;
        let stage: Vec<Vec2> = current
            .points()
            .iter()
            .zip(&v0)
            .map(|(&p, &v)| p + dt * v)
            .collect();
        let stage = PatchContour::new(stage)?;
        let v1 = cde_rhs(&stage)?;
        let next: Vec<Vec2> = current
            .points()
            .iter()
            .zip(v0.iter().zip(&v1))
            .map(|(&p, (&a, &b))| p + 0.5 * dt * (a + b))
            .collect();
        current = PatchContour::new(next)?;
    }
    Ok(current)
}

/// Second gradient of the velocity at x:
/// ∇∇u(x) = θ(x)·E + (1/4π) pv∫ H(z)/|z|² θ(x−z) dz,
/// with a disc-shaped principal-value exclusion of the given radius (the E
/// tensor is tied to circular exclusion) and midpoint quadrature over the
/// patch bounding box at resolution² cells.
pub fn hessu_pv_quadrature<P: PatchSampler + ?Sized>(
    patch: &P,
    x: Vec2,
    exclusion: f64,
    resolution: usize,
) -> Tensor222 {
    assert!(exclusion > 0.0, "pv exclusion radius must be positive");
    assert!(resolution >= 64, "pv quadrature needs resolution ≥ 64");
    let theta_x = patch.indicator(x);
    let mut out = [[[0.0_f64; 2]; 2]; 2];
    let e = e_tensor();
    for i in 0..2 {
        for a in 0..2 {
            for b in 0..2 {
                out[i][a][b] = theta_x * e[i][a][b];
            }
        }
    }
    let (lo, hi) = patch.bbox();
    let dx = (hi.x - lo.x) / resolution as f64;
    let dy = (hi.y - lo.y) / resolution as f64;
    let cell = dx * dy;
    let quarter_pi_inv = 1.0 / (4.0 * PI);
    for i in 0..resolution {
        let yx = lo.x + (i as f64 + 0.5) * dx;
        for j in 0..resolution {
            let yc = Vec2::new(yx, lo.y + (j as f64 + 0.5) * dy);
            let z = x - yc;
            if z.norm() <= exclusion {
                continue;
            }
            let w = patch.indicator(yc);
            if w == 0.0 {
                continue;
            }
            let (h1, h2) = eval_hess_parts(z).expect("z outside the exclusion disc");
            let scale = w * cell * quarter_pi_inv / z.norm_sq();
            for a in 0..2 {
                for b in 0..2 {
                    out[0][a][b] += scale * h1[a][b];
                    out[1][a][b] += scale * h2[a][b];
                }
            }
        }
    }
    out
}
