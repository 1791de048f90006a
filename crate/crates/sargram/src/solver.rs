//! Second-order FDTD solver for the even wave equation.
//!
//! The spatial operator is the symmetric form a(x) L [a(x) u] with
//! a = 1/sqrt(mu eps) and L the 5-point Laplacian with implicit-zero
//! (Dirichlet) boundaries. Symmetry of the operator in the plain grid
//! inner product is what makes the data-driven Gramian identities exact
//! in the discrete setting, so the discretization must not be changed
//! casually.
//!
//! Time stepping is explicit leapfrog; the even wave starts from zero
//! velocity via u^1 = u^0 - (dt^2/2) A u^0. The optional absorbing layer
//! follows the unsplit second-order damped-wave formulation of Grote &
//! Sim (2010) with a quartic decay profile and a quadratic delay
//! (coordinate-stretch) profile, both vanishing at the inner boundary.

use crate::error::{Error, Result};
use crate::grid::{stable_sum, Field2, Grid2D, Window};
use crate::linalg::Mat;
use crate::scene::PermittivityField;

/// Absorbing layer configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PmlSpec {
    pub enabled: bool,
    /// Layer width in cells; at least 8 when enabled.
    pub width: usize,
    /// Peak of the quadratic delay (stretch) profile; 1 disables stretching.
    pub kappa_max: f64,
    /// One-way amplitude attenuation target for a normally incident wave
    /// at the carrier; sets the quartic decay profile peak in closed form.
    pub target_attenuation: f64,
}

impl Default for PmlSpec {
    fn default() -> Self {
        PmlSpec { enabled: true, width: 16, kappa_max: 1.0, target_attenuation: 1e-6 }
    }
}

impl PmlSpec {
    pub fn disabled() -> Self {
        PmlSpec { enabled: false, ..Default::default() }
    }
}

struct PmlData {
    width: usize,
    sigma_x: Vec<f64>,
    sigma_y: Vec<f64>,
    inv_kappa_x: Vec<f64>,
    inv_kappa_y: Vec<f64>,
    /// 1/kappa at the i+1/2 interfaces.
    inv_kappa_x_half: Vec<f64>,
    inv_kappa_y_half: Vec<f64>,
}

fn quartic_profile(n: usize, width: usize, sigma_max: f64, spacing: f64) -> Vec<f64> {
    // Depth of each cell center into the layer, measured from the inner
    // boundary; zero outside the layer.
    let l = width as f64 * spacing;
    (0..n)
        .map(|i| {
            let depth_left = (width as f64 - i as f64 - 0.5) * spacing;
            let depth_right = (i as f64 + 0.5 - (n - width) as f64) * spacing;
            let d = depth_left.max(depth_right).max(0.0);
            sigma_max * (d / l).powi(4)
        })
        .collect()
}

fn kappa_profile(n: usize, width: usize, kappa_max: f64, spacing: f64, half: bool) -> Vec<f64> {
    let l = width as f64 * spacing;
    let count = if half { n + 1 } else { n };
    (0..count)
        .map(|i| {
            let pos = if half { i as f64 } else { i as f64 + 0.5 };
            let depth_left = (width as f64 - pos) * spacing;
            let depth_right = (pos - (n - width) as f64) * spacing;
            let d = depth_left.max(depth_right).max(0.0);
            1.0 / (1.0 + (kappa_max - 1.0) * (d / l).powi(2))
        })
        .collect()
}

/// Time-domain wave solver bound to one permittivity field.
pub struct WaveSolver {
    pub grid: Grid2D,
    /// a = 1/sqrt(mu eps) at cell centers.
    pub a: Vec<f64>,
    pub dt: f64,
    pub n_sub: usize,
    pub tau: f64,
    pub mu: f64,
    pml: Option<PmlData>,
}

impl WaveSolver {
    /// Build a solver with dt = tau / n_sub, n_sub the smallest integer
    /// satisfying the CFL bound cfl * spacing / c_max.
    pub fn new(
        eps: &PermittivityField,
        mu: f64,
        tau: f64,
        cfl: f64,
        pml: &PmlSpec,
    ) -> Result<WaveSolver> {
        if !(tau > 0.0) || !(cfl > 0.0) || cfl > 0.7 + 1e-12 {
            return Err(Error::Grid(format!("invalid tau {tau} or CFL factor {cfl}")));
        }
        let c_max = eps.max_speed(mu);
        let bound = cfl * eps.grid.spacing / c_max;
        let n_sub = (tau / bound).ceil().max(1.0) as usize;
        Self::with_time_step(eps, mu, tau, n_sub, cfl, pml)
    }

    /// Explicit substep count; errors if the resulting dt violates CFL.
    pub fn with_time_step(
        eps: &PermittivityField,
        mu: f64,
        tau: f64,
        n_sub: usize,
        cfl: f64,
        pml: &PmlSpec,
    ) -> Result<WaveSolver> {
        let grid = eps.grid;
        let dt = tau / n_sub as f64;
        let c_max = eps.max_speed(mu);
        let bound = cfl * grid.spacing / c_max;
        if dt > bound * (1.0 + 1e-12) {
            return Err(Error::CflViolation { dt, bound });
        }
        let pml_data = if pml.enabled {
            if pml.width < 8 {
                return Err(Error::Pml(format!("layer width {} < 8 cells", pml.width)));
            }
            if 2 * pml.width + 4 >= grid.nx.min(grid.ny) {
                return Err(Error::Pml("layer leaves no interior".into()));
            }
            // The layer update assumes the background speed; require the
            // medium to be homogeneous there (plus a 2-cell margin).
            let c_o = 1.0 / (mu * eps.eps0).sqrt();
            let w = pml.width + 2;
            for iy in 0..grid.ny {
                for ix in 0..grid.nx {
                    let in_margin =
                        ix < w || iy < w || ix >= grid.nx - w || iy >= grid.ny - w;
                    if in_margin && (eps.values.at(ix, iy) - eps.eps0).abs() > 1e-12 * eps.eps0 {
                        return Err(Error::Pml(format!(
                            "medium is heterogeneous at cell ({ix}, {iy}) inside the layer margin"
                        )));
                    }
                }
            }
            let l = pml.width as f64 * grid.spacing;
            let sigma_max = 5.0 * c_o * (1.0 / pml.target_attenuation).ln() / l;
            Some(PmlData {
                width: pml.width,
                sigma_x: quartic_profile(grid.nx, pml.width, sigma_max, grid.spacing),
                sigma_y: quartic_profile(grid.ny, pml.width, sigma_max, grid.spacing),
                inv_kappa_x: kappa_profile(grid.nx, pml.width, pml.kappa_max, grid.spacing, false),
                inv_kappa_y: kappa_profile(grid.ny, pml.width, pml.kappa_max, grid.spacing, false),
                inv_kappa_x_half: kappa_profile(grid.nx, pml.width, pml.kappa_max, grid.spacing, true),
                inv_kappa_y_half: kappa_profile(grid.ny, pml.width, pml.kappa_max, grid.spacing, true),
            })
        } else {
            None
        };
        Ok(WaveSolver {
            grid,
            a: eps.speed_field(mu).data,
            dt,
            n_sub,
            tau,
            mu,
            pml: pml_data,
        })
    }

    pub fn pml_enabled(&self) -> bool {
        self.pml.is_some()
    }

    pub fn pml_width(&self) -> usize {
        self.pml.as_ref().map_or(0, |p| p.width)
    }

    /// out = -A u = a L(a u) / spacing^2 with implicit-zero boundaries.
    pub fn apply_neg_operator(&self, u: &Field2, out: &mut Field2) {
        let (nx, ny) = (self.grid.nx, self.grid.ny);
        let inv_h2 = 1.0 / (self.grid.spacing * self.grid.spacing);
        let mut w = vec![0.0; nx * ny];
        for (wi, (ai, ui)) in w.iter_mut().zip(self.a.iter().zip(&u.data)) {
            *wi = ai * ui;
        }
        let at = |i: isize, j: isize| -> f64 {
            if i < 0 || j < 0 || i >= nx as isize || j >= ny as isize {
                0.0
            } else {
                w[j as usize * nx + i as usize]
            }
        };
        for j in 0..ny {
            for i in 0..nx {
                let lap = at(i as isize - 1, j as isize)
                    + at(i as isize + 1, j as isize)
                    + at(i as isize, j as isize - 1)
                    + at(i as isize, j as isize + 1)
                    - 4.0 * w[j * nx + i];
                out.data[j * nx + i] = self.a[j * nx + i] * lap * inv_h2;
            }
        }
    }

    /// Advance one fine time step: (u_prev, u_cur) -> (u_cur, u_next).
    fn advance(&self, st: &mut WaveState) {
        let (nx, ny) = (self.grid.nx, self.grid.ny);
        let inv_h2 = 1.0 / (self.grid.spacing * self.grid.spacing);
        let coeff = self.dt * self.dt * inv_h2;
        // Scratch w = a .* u_cur.
        for (wi, (ai, ui)) in st.w.iter_mut().zip(self.a.iter().zip(&st.u_cur.data)) {
            *wi = ai * ui;
        }
        let (i_lo, i_hi, j_lo, j_hi) = match &self.pml {
            Some(p) => (p.width, nx - p.width, p.width, ny - p.width),
            None => (1, nx - 1, 1, ny - 1),
        };
        // Fast interior sweep: all neighbors in range.
        {
            let w = &st.w;
            let uc = &st.u_cur.data;
            let up = &st.u_prev.data;
            let un = &mut st.u_next.data;
            for j in j_lo..j_hi {
                let row = j * nx;
                let below = row - nx;
                let above = row + nx;
                for i in i_lo..i_hi {
                    let lap = w[row + i - 1] + w[row + i + 1] + w[below + i] + w[above + i]
                        - 4.0 * w[row + i];
                    un[row + i] =
                        2.0 * uc[row + i] - up[row + i] + coeff * self.a[row + i] * lap;
                }
            }
        }
        match &self.pml {
            None => self.advance_border(st, inv_h2),
            Some(_) => self.advance_layer(st, inv_h2),
        }
        st.step += 1;
        // Rotate buffers.
        std::mem::swap(&mut st.u_prev, &mut st.u_cur);
        std::mem::swap(&mut st.u_cur, &mut st.u_next);
    }

    /// Dirichlet edges of the plain leapfrog (no absorbing layer).
    fn advance_border(&self, st: &mut WaveState, inv_h2: f64) {
        let (nx, ny) = (self.grid.nx, self.grid.ny);
        let coeff = self.dt * self.dt * inv_h2;
        let w = &st.w;
        let get = |i: isize, j: isize| -> f64 {
            if i < 0 || j < 0 || i >= nx as isize || j >= ny as isize {
                0.0
            } else {
                w[j as usize * nx + i as usize]
            }
        };
        let update = |i: usize, j: usize, st_un: &mut [f64]| {
            let lap = get(i as isize - 1, j as isize)
                + get(i as isize + 1, j as isize)
                + get(i as isize, j as isize - 1)
                + get(i as isize, j as isize + 1)
                - 4.0 * w[j * nx + i];
            st_un[j * nx + i] = 2.0 * st.u_cur.data[j * nx + i] - st.u_prev.data[j * nx + i]
                + coeff * self.a[j * nx + i] * lap;
        };
        let un = &mut st.u_next.data;
        for i in 0..nx {
            update(i, 0, un);
            update(i, ny - 1, un);
        }
        for j in 1..ny - 1 {
            update(0, j, un);
            update(nx - 1, j, un);
        }
    }

    /// Damped update inside the absorbing frame.
    fn advance_layer(&self, st: &mut WaveState, inv_h2: f64) {
        let p = self.pml.as_ref().unwrap();
        let (nx, ny) = (self.grid.nx, self.grid.ny);
        let dt = self.dt;
        let inv_2h = 0.5 / self.grid.spacing;
        let stretch = p.inv_kappa_x.iter().any(|&v| v != 1.0)
            || p.inv_kappa_y.iter().any(|&v| v != 1.0);

        let frame_cells = |mut f: Box<dyn FnMut(usize, usize) + '_>| {
            for j in 0..p.width {
                for i in 0..nx {
                    f(i, j);
                    f(i, ny - 1 - j);
                }
            }
            for j in p.width..ny - p.width {
                for i in 0..p.width {
                    f(i, j);
                    f(nx - 1 - i, j);
                }
            }
        };

        // Pass 1: auxiliary flux update phi^{n+1/2} from grad u^n.
        {
            let uc = &st.u_cur.data;
            let get_u = |i: isize, j: isize| -> f64 {
                if i < 0 || j < 0 || i >= nx as isize || j >= ny as isize {
                    0.0
                } else {
                    uc[j as usize * nx + i as usize]
                }
            };
            let phi_x = &mut st.phi_x;
            let phi_y = &mut st.phi_y;
            let a = &self.a;
            frame_cells(Box::new(move |i, j| {
                let sx = p.sigma_x[i];
                let sy = p.sigma_y[j];
                let idx = j * nx + i;
                let c2 = a[idx] * a[idx];
                let mut dudx =
                    (get_u(i as isize + 1, j as isize) - get_u(i as isize - 1, j as isize)) * inv_2h;
                let mut dudy =
                    (get_u(i as isize, j as isize + 1) - get_u(i as isize, j as isize - 1)) * inv_2h;
                if stretch {
                    dudx *= p.inv_kappa_x[i];
                    dudy *= p.inv_kappa_y[j];
                }
                phi_x[idx] = ((1.0 - 0.5 * sx * dt) * phi_x[idx] + dt * c2 * (sy - sx) * dudx)
                    / (1.0 + 0.5 * sx * dt);
                phi_y[idx] = ((1.0 - 0.5 * sy * dt) * phi_y[idx] + dt * c2 * (sx - sy) * dudy)
                    / (1.0 + 0.5 * sy * dt);
            }));
        }

        // Pass 2: damped wave update using div phi^{n+1/2}.
        {
            let w = &st.w;
            let uc = &st.u_cur.data;
            let up = &st.u_prev.data;
            let un = &mut st.u_next.data;
            let phi_x = &st.phi_x;
            let phi_y = &st.phi_y;
            let a = &self.a;
            let get_w = |i: isize, j: isize| -> f64 {
                if i < 0 || j < 0 || i >= nx as isize || j >= ny as isize {
                    0.0
                } else {
                    w[j as usize * nx + i as usize]
                }
            };
            let get_phi = |phi: &[f64], i: isize, j: isize| -> f64 {
                if i < 0 || j < 0 || i >= nx as isize || j >= ny as isize {
                    0.0
                } else {
                    phi[j as usize * nx + i as usize]
                }
            };
            let inv_dt2 = 1.0 / (dt * dt);
            frame_cells(Box::new(move |i, j| {
                let sx = p.sigma_x[i];
                let sy = p.sigma_y[j];
                let idx = j * nx + i;
                let (ii, jj) = (i as isize, j as isize);
                let base = if stretch {
                    let lx = p.inv_kappa_x[i]
                        * ((get_w(ii + 1, jj) - w[idx]) * p.inv_kappa_x_half[i + 1]
                            - (w[idx] - get_w(ii - 1, jj)) * p.inv_kappa_x_half[i]);
                    let ly = p.inv_kappa_y[j]
                        * ((get_w(ii, jj + 1) - w[idx]) * p.inv_kappa_y_half[j + 1]
                            - (w[idx] - get_w(ii, jj - 1)) * p.inv_kappa_y_half[j]);
                    a[idx] * (lx + ly) * inv_h2
                } else {
                    let lap = get_w(ii - 1, jj) + get_w(ii + 1, jj) + get_w(ii, jj - 1)
                        + get_w(ii, jj + 1)
                        - 4.0 * w[idx];
                    a[idx] * lap * inv_h2
                };
                let div_phi = (get_phi(phi_x, ii + 1, jj) - get_phi(phi_x, ii - 1, jj)) * inv_2h
                    + (get_phi(phi_y, ii, jj + 1) - get_phi(phi_y, ii, jj - 1)) * inv_2h;
                let big_a = inv_dt2;
                let big_b = 0.5 * (sx + sy) / dt;
                let big_c = sx * sy;
                un[idx] = ((2.0 * big_a - big_c) * uc[idx] - (big_a - big_b) * up[idx]
                    + base
                    + div_phi)
                    / (big_a + big_b);
            }));
        }
    }

    /// Initialize the leapfrog from displacement u0 and velocity v0
    /// (second-order Taylor start).
    fn start(&self, u0: &Field2, v0: Option<&Field2>) -> WaveState {
        let mut u1 = Field2 { nx: u0.nx, ny: u0.ny, data: vec![0.0; u0.data.len()] };
        self.apply_neg_operator(u0, &mut u1);
        let dt = self.dt;
        for (k, v) in u1.data.iter_mut().enumerate() {
            // u1 = u0 + dt v0 + dt^2/2 * (-A u0)
            let vel = v0.map_or(0.0, |f| f.data[k]);
            *v = u0.data[k] + dt * vel + 0.5 * dt * dt * *v;
        }
        WaveState {
            u_prev: u0.clone(),
            u_cur: u1,
            u_next: Field2 { nx: u0.nx, ny: u0.ny, data: vec![0.0; u0.data.len()] },
            step: 1,
            w: vec![0.0; u0.data.len()],
            phi_x: vec![0.0; if self.pml.is_some() { u0.data.len() } else { 0 }],
            phi_y: vec![0.0; if self.pml.is_some() { u0.data.len() } else { 0 }],
        }
    }

    /// Run the even wave (zero initial velocity) to snapshot index `j_last`,
    /// invoking the sink at every snapshot time j*tau, j = 0..=j_last.
    pub fn run_even(
        &self,
        u0: &Field2,
        j_last: usize,
        mut sink: impl FnMut(usize, &Field2),
    ) -> Result<()> {
        self.run_from(u0, None, j_last, |j, f| {
            sink(j, f);
            Ok(())
        })
    }

    /// Run with explicit initial velocity; same snapshot convention.
    pub fn run_from(
        &self,
        u0: &Field2,
        v0: Option<&Field2>,
        j_last: usize,
        mut sink: impl FnMut(usize, &Field2) -> Result<()>,
    ) -> Result<()> {
        if u0.nx != self.grid.nx || u0.ny != self.grid.ny {
            return Err(Error::GridMismatch(format!(
                "initial field {}x{} on {}x{} grid",
                u0.nx, u0.ny, self.grid.nx, self.grid.ny
            )));
        }
        sink(0, u0)?;
        if j_last == 0 {
            return Ok(());
        }
        let mut st = self.start(u0, v0);
        let total = j_last * self.n_sub;
        loop {
            if st.step % self.n_sub == 0 {
                let j = st.step / self.n_sub;
                if !st.u_cur.is_finite() {
                    return Err(Error::BlowUp { step: st.step });
                }
                sink(j, &st.u_cur)?;
                if st.step == total {
                    return Ok(());
                }
            }
            self.advance(&mut st);
        }
    }

    /// Run the even wave and record every fine step at the masked cells,
    /// together with p = L(a u)/h^2; used by the sensitivity pass. Also
    /// returns the predicted data series <u0, u(j tau)>.
    pub fn run_even_recording(
        &self,
        u0: &Field2,
        j_last: usize,
        mask: &[usize],
        // v-branch: zero displacement, u0 velocity-like start (v^1 = u0).
        companion: bool,
    ) -> Result<FineRecording> {
        let n_steps = j_last * self.n_sub;
        let mut rec = FineRecording {
            n_steps,
            n_sub: self.n_sub,
            mask: mask.to_vec(),
            field: vec![0.0; (n_steps + 1) * mask.len()],
            lap: vec![0.0; (n_steps + 1) * mask.len()],
            series: vec![0.0; j_last + 1],
        };
        let record = |rec: &mut FineRecording, n: usize, f: &Field2, a: &[f64], nx: usize, inv_h2: f64| {
            let base = n * rec.mask.len();
            for (k, &idx) in rec.mask.iter().enumerate() {
                let au = |i: usize| a[i] * f.data[i];
                rec.field[base + k] = f.data[idx];
                rec.lap[base + k] = (au(idx - 1) + au(idx + 1) + au(idx - nx) + au(idx + nx)
                    - 4.0 * au(idx))
                    * inv_h2;
            }
        };
        let inv_h2 = 1.0 / (self.grid.spacing * self.grid.spacing);
        let nx = self.grid.nx;

        let (init_u, init_v);
        if companion {
            // v^0 = 0, v^1 = u0: discrete sine-like branch.
            init_u = Field2 { nx: u0.nx, ny: u0.ny, data: vec![0.0; u0.data.len()] };
            init_v = Some(u0);
        } else {
            init_u = u0.clone();
            init_v = None;
        }
        if companion {
            // Custom start: v^1 = u0 exactly.
            let mut st = WaveState {
                u_prev: init_u.clone(),
                u_cur: u0.clone(),
                u_next: Field2 { nx: u0.nx, ny: u0.ny, data: vec![0.0; u0.data.len()] },
                step: 1,
                w: vec![0.0; u0.data.len()],
                phi_x: vec![0.0; if self.pml.is_some() { u0.data.len() } else { 0 }],
                phi_y: vec![0.0; if self.pml.is_some() { u0.data.len() } else { 0 }],
            };
            record(&mut rec, 0, &st.u_prev, &self.a, nx, inv_h2);
            record(&mut rec, 1, &st.u_cur, &self.a, nx, inv_h2);
            while st.step < n_steps {
                self.advance(&mut st);
                record(&mut rec, st.step, &st.u_cur, &self.a, nx, inv_h2);
            }
            if !st.u_cur.is_finite() {
                return Err(Error::BlowUp { step: st.step });
            }
            return Ok(rec);
        }
        let _ = init_v;
        let mut st = self.start(u0, None);
        record(&mut rec, 0, u0, &self.a, nx, inv_h2);
        rec.series[0] = crate::grid::inner_product(u0, u0, &self.grid)?;
        record(&mut rec, 1, &st.u_cur, &self.a, nx, inv_h2);
        if self.n_sub == 1 {
            rec.series[1] = crate::grid::inner_product(u0, &st.u_cur, &self.grid)?;
        }
        while st.step < n_steps {
            self.advance(&mut st);
            record(&mut rec, st.step, &st.u_cur, &self.a, nx, inv_h2);
            if st.step % self.n_sub == 0 {
                if !st.u_cur.is_finite() {
                    return Err(Error::BlowUp { step: st.step });
                }
                rec.series[st.step / self.n_sub] =
                    crate::grid::inner_product(u0, &st.u_cur, &self.grid)?;
            }
        }
        Ok(rec)
    }

    /// Collect snapshots restricted to a window (full grid by default).
    pub fn run_even_collect(
        &self,
        u0: &Field2,
        j_last: usize,
        window: Option<Window>,
    ) -> Result<SnapshotSet> {
        let window = window.unwrap_or_else(|| Window::full(&self.grid));
        let mut snaps = SnapshotSet {
            tau: self.tau,
            grid: self.grid,
            window,
            snapshots: Vec::with_capacity(j_last + 1),
        };
        self.run_even(u0, j_last, |_, f| {
            snaps.snapshots.push(window.extract(f));
        })?;
        Ok(snaps)
    }

    /// Predicted even-data series: d_j = <u0, u(j tau)> for j = 0..=j_last.
    pub fn run_even_series(&self, u0: &Field2, j_last: usize) -> Result<Vec<f64>> {
        let mut series = Vec::with_capacity(j_last + 1);
        let grid = self.grid;
        let mut err = None;
        self.run_even(u0, j_last, |_, f| match crate::grid::inner_product(u0, f, &grid) {
            Ok(v) => series.push(v),
            Err(e) => err = Some(e),
        })?;
        if let Some(e) = err {
            return Err(e);
        }
        Ok(series)
    }

    /// Standard leapfrog energy; valid without the absorbing layer.
    pub fn discrete_energy(&self, u_prev: &Field2, u_cur: &Field2) -> Result<f64> {
        if self.pml.is_some() {
            return Err(Error::Pml("discrete energy is defined for the undamped stencil".into()));
        }
        let mut au = Field2::zeros(&self.grid);
        self.apply_neg_operator(u_cur, &mut au);
        let area = self.grid.cell_area();
        let inv_dt = 1.0 / self.dt;
        let n = u_cur.data.len();
        let mut kin = Vec::with_capacity(n.div_ceil(4096));
        let mut pot = Vec::with_capacity(n.div_ceil(4096));
        let mut k_acc = 0.0;
        let mut p_acc = 0.0;
        for (i, ((uc, up), neg_a)) in
            u_cur.data.iter().zip(&u_prev.data).zip(&au.data).enumerate()
        {
            let v = (uc - up) * inv_dt;
            k_acc += v * v;
            p_acc += -neg_a * up;
            if i % 4096 == 4095 {
                kin.push(k_acc);
                pot.push(p_acc);
                k_acc = 0.0;
                p_acc = 0.0;
            }
        }
        kin.push(k_acc);
        pot.push(p_acc);
        Ok(0.5 * area * (stable_sum(&kin) + stable_sum(&pot)))
    }
}

/// Leapfrog state: two time levels plus scratch and absorbing-layer fluxes.
pub struct WaveState {
    pub u_prev: Field2,
    pub u_cur: Field2,
    u_next: Field2,
    pub step: usize,
    w: Vec<f64>,
    phi_x: Vec<f64>,
    phi_y: Vec<f64>,
}

/// Per-fine-step masked recording from one even-wave solve.
pub struct FineRecording {
    pub n_steps: usize,
    pub n_sub: usize,
    pub mask: Vec<usize>,
    /// Step-major field values at mask cells, (n_steps+1) x mask.len().
    pub field: Vec<f64>,
    /// Step-major L(a u)/h^2 at mask cells.
    pub lap: Vec<f64>,
    /// Predicted data at snapshot lags (empty for the companion branch).
    pub series: Vec<f64>,
}

impl FineRecording {
    #[inline]
    pub fn value(&self, step: usize, cell: usize) -> f64 {
        self.field[step * self.mask.len() + cell]
    }

    #[inline]
    pub fn lap_value(&self, step: usize, cell: usize) -> f64 {
        self.lap[step * self.mask.len() + cell]
    }
}

/// Even-wave snapshots on the tau grid, restricted to a window.
#[derive(Debug, Clone)]
pub struct SnapshotSet {
    pub tau: f64,
    pub grid: Grid2D,
    pub window: Window,
    pub snapshots: Vec<Vec<f64>>,
}

impl SnapshotSet {
    pub fn count(&self) -> usize {
        self.snapshots.len()
    }

    /// <u_m, u_l> over the window.
    pub fn inner(&self, m: usize, l: usize) -> f64 {
        let area = self.grid.cell_area();
        let mut partials = Vec::new();
        let mut acc = 0.0;
        for (i, (a, b)) in self.snapshots[m].iter().zip(&self.snapshots[l]).enumerate() {
            acc += a * b;
            if i % 4096 == 4095 {
                partials.push(acc);
                acc = 0.0;
            }
        }
        partials.push(acc);
        area * stable_sum(&partials)
    }

    /// <u_m, f> against a full-grid field.
    pub fn inner_with_field(&self, m: usize, field: &Field2) -> f64 {
        let area = self.grid.cell_area();
        let w = &self.window;
        let mut acc = 0.0;
        for jy in 0..w.ny {
            let src = &self.snapshots[m][jy * w.nx..(jy + 1) * w.nx];
            let row = (w.j0 + jy) * field.nx + w.i0;
            let dst = &field.data[row..row + w.nx];
            for (a, b) in src.iter().zip(dst) {
                acc += a * b;
            }
        }
        area * acc
    }

    /// Gramian of the stored snapshots (direct pairwise inner products).
    pub fn gramian_direct(&self) -> Mat {
        let m = self.count();
        let mut g = Mat::zeros(m, m);
        for i in 0..m {
            for j in i..m {
                let v = self.inner(i, j);
                g[(i, j)] = v;
                g[(j, i)] = v;
            }
        }
        g
    }

    /// New set with fields sum_k coeffs[k][out] * u_k.
    pub fn linear_combination(&self, coeffs: &Mat) -> SnapshotSet {
        assert_eq!(coeffs.rows, self.count());
        let len = self.window.len();
        let mut out = Vec::with_capacity(coeffs.cols);
        for col in 0..coeffs.cols {
            let mut f = vec![0.0; len];
            for k in 0..coeffs.rows {
                let c = coeffs[(k, col)];
                if c == 0.0 {
                    continue;
                }
                for (o, v) in f.iter_mut().zip(&self.snapshots[k]) {
                    *o += c * v;
                }
            }
            out.push(f);
        }
        SnapshotSet { tau: self.tau, grid: self.grid, window: self.window, snapshots: out }
    }

    /// Squared field-norm of the difference with another set.
    pub fn diff_norm_sq(&self, other: &SnapshotSet) -> f64 {
        assert_eq!(self.window, other.window);
        assert_eq!(self.count(), other.count());
        let area = self.grid.cell_area();
        let mut total = 0.0;
        for (a, b) in self.snapshots.iter().zip(&other.snapshots) {
            for (x, y) in a.iter().zip(b) {
                total += (x - y) * (x - y);
            }
        }
        area * total
    }
}

/// Window that the discrete evolution can reach from the support of u0 in
/// the given number of fine steps (one cell per step), with a safety ring.
pub fn reach_window(u0: &Field2, grid: &Grid2D, fine_steps: usize) -> Window {
    match u0.support_box(1e-13 * u0.max_abs().max(f64::MIN_POSITIVE)) {
        Some(b) => b.dilated(fine_steps + 2, grid),
        None => Window::full(grid),
    }
}
