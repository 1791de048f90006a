//! Paraxial Gaussian-beam excitation and slow-time geometry.
//!
//! The probing field is a pulsed beam synthesized as a wavenumber integral
//! of monochromatic Gaussian-beam modes weighted by the pulse envelope.
//! Evaluating that integral at the reference travel time gives the initial
//! condition for the even-wave solve; an extra -i k c_o factor under the
//! integral gives its time derivative, which is only needed to validate
//! the solver against the one-way formulation.

use crate::error::{Error, Result};
use crate::grid::{Field2, Grid2D};
use crate::units::pulse_envelope;

/// Pulsed-beam parameters.
///
/// `r0` is the initial beam radius, `q0` the initial quadratic phase,
/// `t_b` the pulse half-duration. Wavenumber and speed are carried
/// explicitly so the formulas stay unit-checked.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamParams {
    pub r0: f64,
    pub q0: f64,
    pub t_b: f64,
    pub k_o: f64,
    pub c_o: f64,
    pub amplitude: f64,
    /// Gauss-Legendre node count per conjugate branch.
    pub quad_nodes: usize,
}

/// Diagnostics from parameter validation.
#[derive(Debug, Clone, Copy)]
pub struct BeamDiagnostics {
    /// k_o / (r0^-4 + q0^2)^(1/4); paraxial scaling wants this >> 1.
    pub paraxial_ratio: f64,
    /// max |b(t) - b(-t)| / max |b| over probe points. Nonzero when q0 != 0;
    /// the raw-data front end assumes an even probing signal.
    pub evenness_defect: f64,
}

impl BeamParams {
    pub fn validated(&self) -> Result<BeamDiagnostics> {
        if !(self.r0 > 0.0) {
            return Err(Error::Beam(format!("initial radius must be positive, got {}", self.r0)));
        }
        if !(self.t_b > 0.0) {
            return Err(Error::Beam(format!("pulse half-duration must be positive, got {}", self.t_b)));
        }
        if self.quad_nodes < 9 {
            return Err(Error::Beam(format!("need at least 9 quadrature nodes, got {}", self.quad_nodes)));
        }
        let scale = (self.r0.powi(-4) + self.q0 * self.q0).powf(0.25);
        let paraxial_ratio = self.k_o / scale;
        let evenness_defect = self.signal_evenness_defect();
        Ok(BeamDiagnostics { paraxial_ratio, evenness_defect })
    }

    /// Max relative odd-in-time component of the source signal b(x_s, t),
    /// probed on a small grid of cross-range offsets and times.
    fn signal_evenness_defect(&self) -> f64 {
        let (nodes, weights) = gauss_legendre(65);
        let sigma_k = 3.0 / (self.c_o * self.t_b);
        let lo = (self.k_o - 4.0 * sigma_k).max(1e-3 * self.k_o);
        let hi = self.k_o + 4.0 * sigma_k;
        let mut max_b = 0.0_f64;
        let mut max_defect = 0.0_f64;
        for &xs in &[0.0, 0.5 * self.r0, self.r0] {
            let cross = (-xs * xs / (2.0 * self.r0 * self.r0)).exp();
            let phase0 = 0.5 * self.q0 * xs * xs;
            for &t in &[0.3 * self.t_b, 0.7 * self.t_b, self.t_b] {
                let mut bp = 0.0;
                let mut bm = 0.0;
                for (x, w) in nodes.iter().zip(&weights) {
                    let k = 0.5 * (hi + lo) + 0.5 * (hi - lo) * x;
                    let f = pulse_envelope(self.c_o * (k - self.k_o), self.t_b);
                    let amp = w * 0.5 * (hi - lo) * f * cross;
                    bp += amp * (phase0 - k * self.c_o * t).cos();
                    bm += amp * (phase0 + k * self.c_o * t).cos();
                }
                max_b = max_b.max(bp.abs()).max(bm.abs());
                max_defect = max_defect.max((bp - bm).abs());
            }
        }
        if max_b > 0.0 {
            max_defect / max_b
        } else {
            0.0
        }
    }
}

/// Beam radius r_y = r0 sqrt((1 + q0 y / k)^2 + y^2 / L_R^2), L_R = k r0^2.
pub fn beam_radius(y: f64, k: f64, r0: f64, q0: f64) -> f64 {
    assert!(r0 > 0.0 && k != 0.0);
    let lr = k * r0 * r0;
    let focus = 1.0 + q0 * y / k;
    r0 * (focus * focus + (y / lr) * (y / lr)).sqrt()
}

/// Curvature radius of the phase front; the collimated point has no
/// finite curvature and is reported distinctly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Curvature {
    Finite(f64),
    Infinite,
}

/// chi_y = (r_y / r0)^2 / (y / L_R^2 + (q0/k)(1 + q0 y / k)).
pub fn curvature_radius(y: f64, k: f64, r0: f64, q0: f64) -> Curvature {
    let inv = inverse_curvature(y, k, r0, q0);
    if inv == 0.0 {
        Curvature::Infinite
    } else {
        Curvature::Finite(1.0 / inv)
    }
}

/// 1 / chi_y; zero at a collimated point. This is the form the field
/// evaluation uses, so no curvature singularity ever appears.
#[inline]
pub fn inverse_curvature(y: f64, k: f64, r0: f64, q0: f64) -> f64 {
    let lr = k * r0 * r0;
    let focus = 1.0 + q0 * y / k;
    let bracket = y / (lr * lr) + (q0 / k) * focus;
    let ry = beam_radius(y, k, r0, q0);
    bracket * (r0 / ry) * (r0 / ry)
}

/// Focal length and waist radius for a focusing beam (q0 < 0):
/// L* = |q0| k / (q0^2 + r0^-4), r* = r0 / sqrt(1 + q0^2 r0^4).
pub fn focal_params(r0: f64, q0: f64, k: f64) -> Result<(f64, f64)> {
    if q0 >= 0.0 {
        return Err(Error::NoFiniteFocus { q0 });
    }
    let l_star = q0.abs() * k / (q0 * q0 + r0.powi(-4));
    let r_star = r0 / (1.0 + q0 * q0 * r0.powi(4)).sqrt();
    Ok((l_star, r_star))
}

/// Antenna placement and beam-axis rotation for one slow time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlowTimeGeometry {
    /// Slow-time index, 1-based.
    pub s: usize,
    pub count: usize,
    /// Beam-axis rotation from the horizontal axis, degrees.
    pub theta_deg: f64,
    /// Standoff distance from the rotation center to the antenna.
    pub range: f64,
    /// Center of the circular antenna trajectory (the imaging-disk center).
    pub center: [f64; 2],
}

impl SlowTimeGeometry {
    /// Unit vector along the beam axis (direction of propagation).
    pub fn direction(&self) -> [f64; 2] {
        let th = self.theta_deg.to_radians();
        [th.cos(), th.sin()]
    }

    pub fn antenna_position(&self) -> [f64; 2] {
        let d = self.direction();
        [self.center[0] - self.range * d[0], self.center[1] - self.range * d[1]]
    }

    /// Map a global point into beam coordinates (cross-range, range).
    #[inline]
    pub fn beam_frame(&self, p: [f64; 2]) -> (f64, f64) {
        let a = self.antenna_position();
        let d = self.direction();
        let rx = p[0] - a[0];
        let ry = p[1] - a[1];
        let ys = rx * d[0] + ry * d[1];
        let xs = -rx * d[1] + ry * d[0];
        (xs, ys)
    }

    /// Equally spaced sweep over [angle_min, angle_max] degrees.
    pub fn sweep(
        count: usize,
        angle_min_deg: f64,
        angle_max_deg: f64,
        range: f64,
        center: [f64; 2],
    ) -> Vec<SlowTimeGeometry> {
        assert!(count >= 1);
        (0..count)
            .map(|i| {
                let frac = if count == 1 { 0.5 } else { i as f64 / (count - 1) as f64 };
                SlowTimeGeometry {
                    s: i + 1,
                    count,
                    theta_deg: angle_min_deg + frac * (angle_max_deg - angle_min_deg),
                    range,
                    center,
                }
            })
            .collect()
    }
}

/// Gauss-Legendre nodes and weights on [-1, 1], by Newton iteration on the
/// Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Legendre P_n(x) and derivative by the three-term recurrence.
            let mut p0 = 1.0;
            let mut p1 = x;
            for j in 2..=n {
                let p2 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

// Evaluation cutoffs: contributions below exp(-45) cross-range or beyond
// 2.5 pulse half-durations along-range are dropped.
const CROSS_EXPONENT_CUTOFF: f64 = 45.0;
const ALONG_RANGE_CUTOFF: f64 = 2.5;

#[derive(Clone, Copy)]
struct ModeTables {
    k: f64,
    weight: f64,
}

fn quadrature_band(beam: &BeamParams) -> (f64, f64) {
    let sigma_k = 3.0 / (beam.c_o * beam.t_b);
    let lo = (beam.k_o - 4.0 * sigma_k).max(1e-3 * beam.k_o);
    let hi = beam.k_o + 4.0 * sigma_k;
    (lo, hi)
}

fn mode_tables(beam: &BeamParams, nodes: usize) -> Vec<ModeTables> {
    let (lo, hi) = quadrature_band(beam);
    let (xs, ws) = gauss_legendre(nodes);
    xs.iter()
        .zip(&ws)
        .map(|(x, w)| {
            let k = 0.5 * (hi + lo) + 0.5 * (hi - lo) * x;
            let f = pulse_envelope(beam.c_o * (k - beam.k_o), beam.t_b);
            ModeTables {
                k,
                weight: w * 0.5 * (hi - lo) * f / (2.0 * std::f64::consts::PI),
            }
        })
        .collect()
}

fn eval_point(
    beam: &BeamParams,
    modes: &[ModeTables],
    xs: f64,
    ys: f64,
    t: f64,
    time_derivative: bool,
) -> f64 {
    // Skip points visibly outside the packet.
    let ry_carrier = beam_radius(ys, beam.k_o, beam.r0, beam.q0);
    if xs * xs / (2.0 * ry_carrier * ry_carrier) > CROSS_EXPONENT_CUTOFF {
        return 0.0;
    }
    if (ys - beam.c_o * t).abs() > ALONG_RANGE_CUTOFF * beam.c_o * beam.t_b {
        return 0.0;
    }
    let mut acc = 0.0;
    for mode in modes {
        let k = mode.k;
        let ry = beam_radius(ys, k, beam.r0, beam.q0);
        let lr = k * beam.r0 * beam.r0;
        let envelope = (beam.r0 / ry).sqrt() * (-xs * xs / (2.0 * ry * ry)).exp();
        let phase = k * (ys - beam.c_o * t) + 0.5 * k * xs * xs * inverse_curvature(ys, k, beam.r0, beam.q0)
            - 0.5 * (ys / lr).atan();
        let re = mode.weight * envelope * phase.cos();
        if time_derivative {
            // d/dt of exp(-i k c t) brings down -i k c: Re(-i k c A e^{i phi})
            // = k c * amp * sin(phi).
            acc += k * beam.c_o * mode.weight * envelope * phase.sin();
        } else {
            acc += re;
        }
    }
    beam.amplitude * acc
}

/// Evaluate the beam field at time `t` on the grid, in the rotated frame of
/// the given slow time. Real-valued by construction (conjugate branch folded
/// into the real part).
pub fn beam_field(
    beam: &BeamParams,
    geom: &SlowTimeGeometry,
    grid: &Grid2D,
    t: f64,
    time_derivative: bool,
) -> Field2 {
    let modes = mode_tables(beam, beam.quad_nodes);
    Field2::from_fn(grid, |x, y| {
        let (xs, ys) = geom.beam_frame([x, y]);
        eval_point(beam, &modes, xs, ys, t, time_derivative)
    })
}

/// The even-wave initial condition u_{s,0}: the beam field evaluated at the
/// reference travel time T, checked to be supported in the homogeneous
/// region and away from the absorbing layer.
pub fn initial_condition(
    beam: &BeamParams,
    geom: &SlowTimeGeometry,
    grid: &Grid2D,
    t_travel: f64,
    support_center: [f64; 2],
    support_radius: f64,
    pml_width_cells: usize,
) -> Result<Field2> {
    check_support_clear(beam, geom, grid, t_travel, support_center, support_radius, pml_width_cells)?;
    Ok(beam_field(beam, geom, grid, t_travel, false))
}

/// Geometric support check: the box {|x_s| <= 3 r_y, |y_s - c T| <= c T_b}
/// must not touch the scene support disk or the absorbing frame.
pub fn check_support_clear(
    beam: &BeamParams,
    geom: &SlowTimeGeometry,
    grid: &Grid2D,
    t_travel: f64,
    support_center: [f64; 2],
    support_radius: f64,
    pml_width_cells: usize,
) -> Result<()> {
    let packet_center = beam.c_o * t_travel;
    let half_len = beam.c_o * beam.t_b;
    for iy in 0..grid.ny {
        for ix in 0..grid.nx {
            let p = grid.center(ix, iy);
            let (xs, ys) = geom.beam_frame(p);
            if (ys - packet_center).abs() > half_len {
                continue;
            }
            let ry = beam_radius(ys, beam.k_o, beam.r0, beam.q0);
            if xs.abs() > 3.0 * ry {
                continue;
            }
            // Cell is inside the beam support box.
            let dx = p[0] - support_center[0];
            let dy = p[1] - support_center[1];
            if (dx * dx + dy * dy).sqrt() <= support_radius {
                return Err(Error::InitialConditionSupport(format!(
                    "beam support cell ({ix}, {iy}) lies inside the scene support disk; \
                     increase the standoff range or reduce the travel time"
                )));
            }
            if pml_width_cells > 0 {
                let w = pml_width_cells;
                if ix < w || iy < w || ix >= grid.nx - w || iy >= grid.ny - w {
                    return Err(Error::InitialConditionSupport(format!(
                        "beam support cell ({ix}, {iy}) lies inside the absorbing layer; \
                         enlarge the domain or shorten the travel time"
                    )));
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::{C_O, K_O};

    fn test_beam() -> BeamParams {
        BeamParams {
            r0: 1.4,
            q0: 0.0,
            t_b: 1.68,
            k_o: K_O,
            c_o: C_O,
            amplitude: 1.0,
            quad_nodes: 129,
        }
    }

    #[test]
    fn radius_at_origin_is_r0() {
        assert!((beam_radius(0.0, 7.0, 2.0, -0.3) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn radius_at_rayleigh_length() {
        let r0 = 1.7;
        let k = 9.0;
        let lr = k * r0 * r0;
        assert!((beam_radius(lr, k, r0, 0.0) - r0 * 2.0_f64.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn radius_matches_direct_formula() {
        let (r0, q0, k, y) = (2.0, -0.1, 10.0, 20.0);
        let lr = k * r0 * r0;
        let direct = r0 * ((1.0 + q0 * y / k).powi(2) + (y / lr).powi(2)).sqrt();
        assert!((beam_radius(y, k, r0, q0) - direct).abs() < 1e-14);
    }

    #[test]
    fn curvature_at_origin() {
        // y = 0, q0 != 0: chi = k / q0.
        match curvature_radius(0.0, 5.0, 1.3, -0.4) {
            Curvature::Finite(chi) => assert!((chi - 5.0 / -0.4).abs() < 1e-10),
            Curvature::Infinite => panic!("expected finite curvature"),
        }
        assert_eq!(curvature_radius(0.0, 5.0, 1.3, 0.0), Curvature::Infinite);
    }

    #[test]
    fn curvature_matches_direct_formula() {
        let (r0, q0, k, y): (f64, f64, f64, f64) = (1.5, -0.2, 8.0, 11.0);
        let lr = k * r0 * r0;
        let ry = beam_radius(y, k, r0, q0);
        let direct = (ry / r0).powi(2) / (y / (lr * lr) + (q0 / k) * (1.0 + q0 * y / k));
        match curvature_radius(y, k, r0, q0) {
            Curvature::Finite(chi) => assert!((chi - direct).abs() < 1e-10 * direct.abs()),
            Curvature::Infinite => panic!("expected finite curvature"),
        }
    }

    #[test]
    fn focal_params_unit_case() {
        let (l, r) = focal_params(1.0, -1.0, 1.0).unwrap();
        assert!((l - 0.5).abs() < 1e-15);
        assert!((r - 1.0 / 2.0_f64.sqrt()).abs() < 1e-15);
        assert!(matches!(focal_params(1.0, 0.0, 1.0), Err(Error::NoFiniteFocus { .. })));
    }

    #[test]
    fn waist_is_the_radius_minimum() {
        for (r0, q0, k) in [(1.5, -0.4, 7.0), (2.5, -0.15, 6.0), (0.9, -1.2, 12.0)] {
            let (l_star, r_star) = focal_params(r0, q0, k).unwrap();
            assert!((beam_radius(l_star, k, r0, q0) - r_star).abs() < 1e-12);
            for dy in [-0.05, 0.05] {
                assert!(beam_radius(l_star + dy, k, r0, q0) > r_star);
            }
        }
    }

    #[test]
    fn paper_beam_parameters_on_record() {
        // r0 = 6.5, q0 = -1.1, k = k_o: the formulas give a much tighter
        // focus at much shorter range than the quoted 2.5-wavelength waist
        // at 100 wavelengths; values recorded here as computed.
        let (l_star, r_star) = focal_params(6.5, -1.1, K_O).unwrap();
        assert!((l_star - 5.709).abs() < 0.01);
        assert!((r_star - 0.1398).abs() < 0.001);
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(5);
        let integral: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(8)).sum();
        assert!((integral - 2.0 / 9.0).abs() < 1e-14);
        let total: f64 = w.iter().sum();
        assert!((total - 2.0).abs() < 1e-14);
    }

    #[test]
    fn initial_condition_is_mirror_symmetric() {
        let beam = test_beam();
        let geom = SlowTimeGeometry { s: 1, count: 1, theta_deg: 0.0, range: 6.0, center: [0.0, 0.0] };
        // Grid symmetric about y = 0 (the beam axis).
        let grid = Grid2D::centered([10.0, 8.0], 0.05, [0.0, 0.0]).unwrap();
        let u = beam_field(&beam, &geom, &grid, 2.0, false);
        let mut max = 0.0_f64;
        let mut defect = 0.0_f64;
        for iy in 0..grid.ny {
            for ix in 0..grid.nx {
                let v = u.at(ix, iy);
                let m = u.at(ix, grid.ny - 1 - iy);
                max = max.max(v.abs());
                defect = defect.max((v - m).abs());
            }
        }
        assert!(max > 0.0);
        assert!(defect <= 1e-12 * max, "defect {defect}, max {max}");
    }

    #[test]
    fn initial_condition_linear_in_amplitude() {
        let beam = test_beam();
        let mut doubled = beam;
        doubled.amplitude = 2.0;
        let geom = SlowTimeGeometry { s: 1, count: 1, theta_deg: 10.0, range: 6.0, center: [0.0, 0.0] };
        let grid = Grid2D::centered([8.0, 8.0], 0.1, [0.0, 0.0]).unwrap();
        let u1 = beam_field(&beam, &geom, &grid, 2.0, false);
        let u2 = beam_field(&doubled, &geom, &grid, 2.0, false);
        for (a, b) in u1.data.iter().zip(&u2.data) {
            assert!((2.0 * a - b).abs() <= 1e-15 + 1e-12 * b.abs());
        }
    }

    #[test]
    fn packet_peak_near_travel_distance() {
        let beam = test_beam();
        let geom = SlowTimeGeometry { s: 1, count: 1, theta_deg: 0.0, range: 8.0, center: [0.0, 0.0] };
        let grid = Grid2D::centered([14.0, 8.0], 0.02, [0.0, 0.0]).unwrap();
        let t = 4.0;
        let u = beam_field(&beam, &geom, &grid, t, false);
        // Envelope proxy: |u| maximized along the beam axis.
        let mut best = (0.0, 0.0);
        for iy in 0..grid.ny {
            for ix in 0..grid.nx {
                let v = u.at(ix, iy).abs();
                if v > best.1 {
                    let p = grid.center(ix, iy);
                    let (_, ys) = geom.beam_frame(p);
                    best = (ys, v);
                }
            }
        }
        assert!((best.0 - beam.c_o * t).abs() < 1.0, "peak at {}", best.0);
    }

    #[test]
    fn quadrature_refinement_converged() {
        let beam = test_beam();
        let geom = SlowTimeGeometry { s: 1, count: 1, theta_deg: 0.0, range: 6.0, center: [0.0, 0.0] };
        let grid = Grid2D::centered([8.0, 6.0], 0.08, [0.0, 0.0]).unwrap();
        let coarse = beam_field(&beam, &geom, &grid, 2.5, false);
        let mut fine_params = beam;
        fine_params.quad_nodes = 258;
        let fine = beam_field(&fine_params, &geom, &grid, 2.5, false);
        let mut num = 0.0;
        let mut den = 0.0;
        for (a, b) in coarse.data.iter().zip(&fine.data) {
            num += (a - b) * (a - b);
            den += b * b;
        }
        assert!(den > 0.0);
        assert!((num / den).sqrt() < 1e-8, "refinement change {}", (num / den).sqrt());
    }

    #[test]
    fn rotation_consistency_via_bilinear_resample() {
        let beam = test_beam();
        let grid = Grid2D::centered([10.0, 10.0], 0.05, [0.0, 0.0]).unwrap();
        let g0 = SlowTimeGeometry { s: 1, count: 1, theta_deg: 0.0, range: 6.0, center: [0.0, 0.0] };
        let g30 = SlowTimeGeometry { theta_deg: 30.0, ..g0 };
        let u0 = beam_field(&beam, &g0, &grid, 2.0, false);
        let u30 = beam_field(&beam, &g30, &grid, 2.0, false);
        // Sample u0 at the grid rotated by -30 degrees and compare to u30.
        let th = 30.0_f64.to_radians();
        let (c, s) = (th.cos(), th.sin());
        let bilinear = |f: &Field2, x: f64, y: f64| -> Option<f64> {
            let fx = (x - grid.origin[0]) / grid.spacing - 0.5;
            let fy = (y - grid.origin[1]) / grid.spacing - 0.5;
            let ix = fx.floor();
            let iy = fy.floor();
            if ix < 0.0 || iy < 0.0 || ix + 1.0 >= grid.nx as f64 || iy + 1.0 >= grid.ny as f64 {
                return None;
            }
            let (i, j) = (ix as usize, iy as usize);
            let (tx, ty) = (fx - ix, fy - iy);
            Some(
                f.at(i, j) * (1.0 - tx) * (1.0 - ty)
                    + f.at(i + 1, j) * tx * (1.0 - ty)
                    + f.at(i, j + 1) * (1.0 - tx) * ty
                    + f.at(i + 1, j + 1) * tx * ty,
            )
        };
        let mut num = 0.0;
        let mut den = 0.0;
        for iy in 0..grid.ny {
            for ix in 0..grid.nx {
                let p = grid.center(ix, iy);
                // Rotate the point back into the unrotated frame.
                let rx = c * p[0] + s * p[1];
                let ry = -s * p[0] + c * p[1];
                if let Some(v) = bilinear(&u0, rx, ry) {
                    let w = u30.at(ix, iy);
                    num += (v - w) * (v - w);
                    den += w * w;
                }
            }
        }
        // Bilinear interpolation of a carrier at 25 cells/wavelength is
        // accurate to a few percent in L2.
        assert!((num / den).sqrt() < 0.05, "rotation mismatch {}", (num / den).sqrt());
    }

    #[test]
    fn support_check_flags_overlap() {
        let beam = test_beam();
        let geom = SlowTimeGeometry { s: 1, count: 1, theta_deg: 0.0, range: 5.0, center: [0.0, 0.0] };
        let grid = Grid2D::centered([12.0, 12.0], 0.1, [0.0, 0.0]).unwrap();
        // Packet centered 1.2 from the disk center: overlaps a radius-2 disk.
        let err = check_support_clear(&beam, &geom, &grid, 3.8, [0.0, 0.0], 2.0, 0);
        assert!(matches!(err, Err(Error::InitialConditionSupport(_))));
        // Far enough away: fine.
        assert!(check_support_clear(&beam, &geom, &grid, 1.2, [0.0, 0.0], 1.0, 0).is_ok());
    }
}
