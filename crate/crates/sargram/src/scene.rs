//! True and search permittivity fields.
//!
//! The search permittivity is a linear combination of Gaussian bumps on an
//! equilateral triangular lattice clipped to the imaging disk. True scenes
//! for testing are built from explicit shape primitives rasterized
//! directly, so the inversion cannot represent the truth exactly unless
//! the scene was deliberately placed on the lattice.

use crate::error::{Error, Result};
use crate::grid::{Field2, Grid2D};

/// Equilateral triangular lattice of Gaussian-bump centers inside a disk.
///
/// One node is anchored at the disk center; ordering is row-major in the
/// lattice axes, which makes coefficient vectors reproducible.
#[derive(Debug, Clone, PartialEq)]
pub struct Lattice {
    pub nodes: Vec<[f64; 2]>,
    /// Triangular cell side h.
    pub cell_side: f64,
    /// Bump width sigma.
    pub sigma: f64,
    pub center: [f64; 2],
    pub radius: f64,
}

impl Lattice {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }
}

/// All equilateral-lattice nodes within `radius` of `center`, cell side `h`.
/// Bump width defaults to h/2 unless overridden later.
pub fn build_lattice(center: [f64; 2], radius: f64, h: f64) -> Result<Lattice> {
    if !(radius > 0.0) || !(h > 0.0) {
        return Err(Error::Scene(format!(
            "lattice needs positive radius and cell side, got radius {radius}, h {h}"
        )));
    }
    let row_step = h * 3.0_f64.sqrt() / 2.0;
    let r_max = (radius / row_step).floor() as i64 + 1;
    let c_max = (radius / h).floor() as i64 + 2;
    let mut nodes = Vec::new();
    for r in -r_max..=r_max {
        let y = center[1] + r as f64 * row_step;
        let x_off = if r.rem_euclid(2) == 1 { 0.5 * h } else { 0.0 };
        for c in -c_max..=c_max {
            let x = center[0] + c as f64 * h + x_off;
            let dx = x - center[0];
            let dy = y - center[1];
            if (dx * dx + dy * dy).sqrt() <= radius * (1.0 + 1e-12) {
                nodes.push([x, y]);
            }
        }
    }
    if nodes.is_empty() {
        return Err(Error::EmptyLattice { radius, cell_side: h });
    }
    Ok(Lattice { nodes, cell_side: h, sigma: 0.5 * h, center, radius })
}

/// Gaussian bump value exp(-|x - z|^2 / (2 sigma^2)).
#[inline]
pub fn bump(x: [f64; 2], z: [f64; 2], sigma: f64) -> f64 {
    let dx = x[0] - z[0];
    let dy = x[1] - z[1];
    (-(dx * dx + dy * dy) / (2.0 * sigma * sigma)).exp()
}

/// Gradient of the Gaussian bump with respect to x.
#[inline]
pub fn bump_gradient(x: [f64; 2], z: [f64; 2], sigma: f64) -> [f64; 2] {
    let g = bump(x, z, sigma);
    let s2 = sigma * sigma;
    [-(x[0] - z[0]) / s2 * g, -(x[1] - z[1]) / s2 * g]
}

/// Pointwise permittivity eps_o + sum_q alpha_q g_q(x) at arbitrary points.
pub fn evaluate_permittivity(
    lattice: &Lattice,
    alpha: &[f64],
    eps0: f64,
    points: &[[f64; 2]],
) -> Result<Vec<f64>> {
    if alpha.len() != lattice.node_count() {
        return Err(Error::CoefficientCount { expected: lattice.node_count(), got: alpha.len() });
    }
    Ok(points
        .iter()
        .map(|&p| {
            let mut v = eps0;
            for (z, a) in lattice.nodes.iter().zip(alpha) {
                v += a * bump(p, *z, lattice.sigma);
            }
            v
        })
        .collect())
}

/// Gridded permittivity with its homogeneous background.
#[derive(Debug, Clone, PartialEq)]
pub struct PermittivityField {
    pub grid: Grid2D,
    pub values: Field2,
    pub eps0: f64,
}

impl PermittivityField {
    pub fn uniform(grid: Grid2D, eps0: f64) -> Self {
        PermittivityField { grid, values: Field2::from_fn(&grid, |_, _| eps0), eps0 }
    }

    /// Wave-speed coefficient a = 1/sqrt(mu * eps) per cell.
    pub fn speed_field(&self, mu: f64) -> Field2 {
        let mut a = self.values.clone();
        for v in &mut a.data {
            *v = 1.0 / (mu * *v).sqrt();
        }
        a
    }

    pub fn max_speed(&self, mu: f64) -> f64 {
        let mut c = 0.0_f64;
        for &eps in &self.values.data {
            c = c.max(1.0 / (mu * eps).sqrt());
        }
        c
    }

    fn check_positive(&self) -> Result<()> {
        for iy in 0..self.grid.ny {
            for ix in 0..self.grid.nx {
                let v = self.values.at(ix, iy);
                if !(v > 0.0) {
                    return Err(Error::NonPositivePermittivity { ix, iy, value: v });
                }
            }
        }
        Ok(())
    }
}

// Bump terms whose exponent is below -60 are dropped during rasterization;
// relative to eps_o they are < 1e-26, far under the test tolerances.
const BUMP_EXPONENT_CUTOFF: f64 = 60.0;

/// Rasterize the lattice parametrization onto the grid at cell centers.
pub fn rasterize(
    lattice: &Lattice,
    alpha: &[f64],
    grid: &Grid2D,
    eps0: f64,
) -> Result<PermittivityField> {
    if alpha.len() != lattice.node_count() {
        return Err(Error::CoefficientCount { expected: lattice.node_count(), got: alpha.len() });
    }
    let mut values = Field2::from_fn(grid, |_, _| eps0);
    let reach = lattice.sigma * (2.0 * BUMP_EXPONENT_CUTOFF).sqrt();
    let cells = (reach / grid.spacing).ceil() as i64 + 1;
    for (z, &a) in lattice.nodes.iter().zip(alpha) {
        if a == 0.0 {
            continue;
        }
        let (cx, cy) = match grid.locate(*z) {
            Some(c) => c,
            None => (
                // Node may sit outside the grid; clamp the box anchor.
                (((z[0] - grid.origin[0]) / grid.spacing) as i64).clamp(0, grid.nx as i64 - 1)
                    as usize,
                (((z[1] - grid.origin[1]) / grid.spacing) as i64).clamp(0, grid.ny as i64 - 1)
                    as usize,
            ),
        };
        let i0 = (cx as i64 - cells).max(0) as usize;
        let i1 = ((cx as i64 + cells) as usize).min(grid.nx - 1);
        let j0 = (cy as i64 - cells).max(0) as usize;
        let j1 = ((cy as i64 + cells) as usize).min(grid.ny - 1);
        for iy in j0..=j1 {
            for ix in i0..=i1 {
                let p = grid.center(ix, iy);
                let idx = values.idx(ix, iy);
                values.data[idx] += a * bump(p, *z, lattice.sigma);
            }
        }
    }
    let field = PermittivityField { grid: *grid, values, eps0 };
    field.check_positive()?;
    Ok(field)
}

/// Shape primitives for true test scenes, independent of the lattice.
/// Contrast is in units of eps_o; overlapping shapes add.
#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    Disk { center: [f64; 2], radius: f64, contrast: f64 },
    Rect { center: [f64; 2], size: [f64; 2], angle_deg: f64, contrast: f64 },
    Gaussian { center: [f64; 2], sigma: f64, contrast: f64 },
    Polyline { points: Vec<[f64; 2]>, thickness: f64, contrast: f64 },
}

fn dist_to_segment(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let ab = [b[0] - a[0], b[1] - a[1]];
    let ap = [p[0] - a[0], p[1] - a[1]];
    let len2 = ab[0] * ab[0] + ab[1] * ab[1];
    let t = if len2 > 0.0 { ((ap[0] * ab[0] + ap[1] * ab[1]) / len2).clamp(0.0, 1.0) } else { 0.0 };
    let q = [a[0] + t * ab[0], a[1] + t * ab[1]];
    ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt()
}

impl Shape {
    /// Additive contrast contribution at a point, in units of eps_o.
    pub fn contrast_at(&self, p: [f64; 2]) -> f64 {
        match self {
            Shape::Disk { center, radius, contrast } => {
                let dx = p[0] - center[0];
                let dy = p[1] - center[1];
                if dx * dx + dy * dy <= radius * radius {
                    *contrast
                } else {
                    0.0
                }
            }
            Shape::Rect { center, size, angle_deg, contrast } => {
                let th = angle_deg.to_radians();
                let (c, s) = (th.cos(), th.sin());
                let dx = p[0] - center[0];
                let dy = p[1] - center[1];
                let u = c * dx + s * dy;
                let v = -s * dx + c * dy;
                if u.abs() <= 0.5 * size[0] && v.abs() <= 0.5 * size[1] {
                    *contrast
                } else {
                    0.0
                }
            }
            Shape::Gaussian { center, sigma, contrast } => contrast * bump(p, *center, *sigma),
            Shape::Polyline { points, thickness, contrast } => {
                let half = 0.5 * thickness;
                for w in points.windows(2) {
                    if dist_to_segment(p, w[0], w[1]) <= half {
                        return *contrast;
                    }
                }
                if points.len() == 1 && dist_to_segment(p, points[0], points[0]) <= half {
                    return *contrast;
                }
                0.0
            }
        }
    }

    /// Rough bounding radius about a point, for support checks.
    fn bounding_radius(&self, about: [f64; 2]) -> f64 {
        let dist = |p: [f64; 2]| ((p[0] - about[0]).powi(2) + (p[1] - about[1]).powi(2)).sqrt();
        match self {
            Shape::Disk { center, radius, .. } => dist(*center) + radius,
            Shape::Rect { center, size, .. } => {
                dist(*center) + 0.5 * (size[0] * size[0] + size[1] * size[1]).sqrt()
            }
            // 6 sigma covers the bump down to ~1e-8 of its peak.
            Shape::Gaussian { center, sigma, .. } => dist(*center) + 6.0 * sigma,
            Shape::Polyline { points, thickness, .. } => {
                points.iter().map(|&p| dist(p)).fold(0.0, f64::max) + 0.5 * thickness
            }
        }
    }
}

/// Rasterize a true scene from shape primitives. All shapes must lie inside
/// the support disk of radius `support_radius` about `support_center`.
pub fn rasterize_shapes(
    shapes: &[Shape],
    grid: &Grid2D,
    eps0: f64,
    support_center: [f64; 2],
    support_radius: f64,
) -> Result<PermittivityField> {
    for (k, shape) in shapes.iter().enumerate() {
        let r = shape.bounding_radius(support_center);
        if r > support_radius {
            return Err(Error::Scene(format!(
                "shape {k} extends to radius {r:.3} outside the support disk of radius {support_radius:.3}"
            )));
        }
    }
    let values = Field2::from_fn(grid, |x, y| {
        let mut c = 0.0;
        for shape in shapes {
            c += shape.contrast_at([x, y]);
        }
        eps0 * (1.0 + c)
    });
    let field = PermittivityField { grid: *grid, values, eps0 };
    field.check_positive()?;
    Ok(field)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lattice_single_node_at_small_radius() {
        let l = build_lattice([0.0, 0.0], 0.4 * 0.3, 0.3).unwrap();
        assert_eq!(l.node_count(), 1);
        assert_eq!(l.nodes[0], [0.0, 0.0]);
    }

    #[test]
    fn lattice_count_matches_brute_force() {
        let h = 0.31;
        let radius = 5.0 * h;
        let l = build_lattice([0.2, -0.4], radius, h).unwrap();
        // Enumerate a generous bounding box of lattice points and filter.
        let row = h * 3.0_f64.sqrt() / 2.0;
        let mut count = 0;
        for r in -30i64..=30 {
            for c in -30i64..=30 {
                let x = 0.2 + c as f64 * h + if r.rem_euclid(2) == 1 { 0.5 * h } else { 0.0 };
                let y = -0.4 + r as f64 * row;
                if ((x - 0.2).powi(2) + (y + 0.4).powi(2)).sqrt() <= radius {
                    count += 1;
                }
            }
        }
        assert_eq!(l.node_count(), count);
    }

    #[test]
    fn lattice_nodes_pairwise_separated_by_h() {
        let l = build_lattice([0.0, 0.0], 1.0, 0.25).unwrap();
        for (i, a) in l.nodes.iter().enumerate() {
            for b in l.nodes.iter().skip(i + 1) {
                let d = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
                assert!(d >= 0.25 - 1e-12, "nodes too close: {d}");
            }
        }
    }

    #[test]
    fn evaluate_zero_alpha_gives_background() {
        let l = build_lattice([0.0, 0.0], 1.0, 0.4).unwrap();
        let alpha = vec![0.0; l.node_count()];
        let vals = evaluate_permittivity(&l, &alpha, 1.0, &[[0.3, 0.1], [2.0, 2.0]]).unwrap();
        assert!(vals.iter().all(|&v| v == 1.0));
    }

    #[test]
    fn evaluate_peak_at_node() {
        let l = build_lattice([0.0, 0.0], 0.1, 0.3).unwrap();
        assert_eq!(l.node_count(), 1);
        let vals = evaluate_permittivity(&l, &[0.7], 1.0, &[[0.0, 0.0]]).unwrap();
        assert!((vals[0] - 1.7).abs() < 1e-15);
    }

    #[test]
    fn evaluate_matches_brute_force_and_is_linear() {
        let l = build_lattice([0.0, 0.0], 1.2, 0.3).unwrap();
        let q = l.node_count();
        let alpha: Vec<f64> = (0..q).map(|i| ((i * 7 % 13) as f64 - 6.0) * 0.01).collect();
        let beta: Vec<f64> = (0..q).map(|i| ((i * 5 % 11) as f64 - 5.0) * 0.02).collect();
        let pts = [[0.17, -0.43], [0.9, 0.2], [-1.4, 0.6]];
        let va = evaluate_permittivity(&l, &alpha, 1.0, &pts).unwrap();
        for (k, &p) in pts.iter().enumerate() {
            let direct: f64 =
                1.0 + l.nodes.iter().zip(&alpha).map(|(z, a)| a * bump(p, *z, l.sigma)).sum::<f64>();
            assert!((va[k] - direct).abs() <= 1e-14 * direct.abs());
        }
        // Linearity of the perturbation part.
        let gamma: Vec<f64> = alpha.iter().zip(&beta).map(|(a, b)| a + b).collect();
        let vb = evaluate_permittivity(&l, &beta, 1.0, &pts).unwrap();
        let vg = evaluate_permittivity(&l, &gamma, 1.0, &pts).unwrap();
        for k in 0..pts.len() {
            let lhs = vg[k] - 1.0;
            let rhs = (va[k] - 1.0) + (vb[k] - 1.0);
            assert!((lhs - rhs).abs() < 1e-14);
        }
    }

    #[test]
    fn rasterize_single_bump_and_permutation_invariance() {
        let grid = Grid2D::centered([4.0, 4.0], 0.05, [0.0, 0.0]).unwrap();
        let l = build_lattice([0.0, 0.0], 0.9, 0.4).unwrap();
        let mut alpha = vec![0.0; l.node_count()];
        // Put the bump on the anchor node (at the disk center).
        let anchor = l.nodes.iter().position(|z| z[0] == 0.0 && z[1] == 0.0).unwrap();
        alpha[anchor] = 0.5;
        let f = rasterize(&l, &alpha, &grid, 1.0).unwrap();
        let mut best = (0usize, 0usize, 0.0_f64);
        for iy in 0..grid.ny {
            for ix in 0..grid.nx {
                if f.values.at(ix, iy) > best.2 {
                    best = (ix, iy, f.values.at(ix, iy));
                }
            }
        }
        let p = grid.center(best.0, best.1);
        assert!(p[0].abs() <= grid.spacing && p[1].abs() <= grid.spacing);
        assert!((best.2 - 1.5).abs() < 0.01);

        // Permuting nodes together with alpha leaves the field unchanged.
        let mut perm_lattice = l.clone();
        let mut perm_alpha = alpha.clone();
        perm_lattice.nodes.reverse();
        perm_alpha.reverse();
        let g = rasterize(&perm_lattice, &perm_alpha, &grid, 1.0).unwrap();
        assert_eq!(f.values.data, g.values.data);
    }

    #[test]
    fn rasterize_rejects_negative_permittivity() {
        let grid = Grid2D::centered([2.0, 2.0], 0.05, [0.0, 0.0]).unwrap();
        let l = build_lattice([0.0, 0.0], 0.1, 0.3).unwrap();
        match rasterize(&l, &[-1.1], &grid, 1.0) {
            Err(Error::NonPositivePermittivity { value, .. }) => assert!(value <= 0.0),
            other => panic!("expected non-positive permittivity, got {other:?}"),
        }
    }

    #[test]
    fn shapes_rasterize_with_support_check() {
        let grid = Grid2D::centered([6.0, 6.0], 0.05, [0.0, 0.0]).unwrap();
        let shapes = vec![
            Shape::Disk { center: [0.5, 0.0], radius: 0.4, contrast: 0.8 },
            Shape::Rect { center: [-0.6, 0.3], size: [0.5, 0.2], angle_deg: 30.0, contrast: 0.5 },
        ];
        let f = rasterize_shapes(&shapes, &grid, 1.0, [0.0, 0.0], 2.0).unwrap();
        let (cx, cy) = grid.locate([0.5, 0.0]).unwrap();
        assert!((f.values.at(cx, cy) - 1.8).abs() < 1e-12);
        let far = grid.locate([2.5, 2.5]).unwrap();
        assert_eq!(f.values.at(far.0, far.1), 1.0);

        let outside = vec![Shape::Disk { center: [3.0, 0.0], radius: 0.5, contrast: 0.5 }];
        assert!(rasterize_shapes(&outside, &grid, 1.0, [0.0, 0.0], 2.0).is_err());
    }
}
