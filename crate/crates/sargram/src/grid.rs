//! Cartesian grid and cell-centered scalar fields.
//!
//! All fields live at cell centers of a uniform grid; the grid inner
//! product carries the cell-area weight so that discrete inner products
//! approximate the continuum L2 pairing. Summation is chunked pairwise in
//! a fixed order, which keeps results independent of thread count and
//! accurate enough for the identity tests downstream.

use crate::error::{Error, Result};

/// Uniform 2D grid of cell centers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid2D {
    pub nx: usize,
    pub ny: usize,
    /// Cell side, in wavelengths.
    pub spacing: f64,
    /// Lower-left corner of cell (0, 0).
    pub origin: [f64; 2],
}

impl Grid2D {
    pub fn new(nx: usize, ny: usize, spacing: f64, origin: [f64; 2]) -> Result<Self> {
        if !(spacing > 0.0) {
            return Err(Error::Grid(format!("spacing must be positive, got {spacing}")));
        }
        if nx < 3 || ny < 3 {
            return Err(Error::Grid(format!("need at least 3x3 cells, got {nx}x{ny}")));
        }
        Ok(Grid2D { nx, ny, spacing, origin })
    }

    /// Grid of the given physical extent centered at `center`.
    pub fn centered(extent: [f64; 2], spacing: f64, center: [f64; 2]) -> Result<Self> {
        let nx = (extent[0] / spacing).round() as usize;
        let ny = (extent[1] / spacing).round() as usize;
        let origin = [
            center[0] - 0.5 * nx as f64 * spacing,
            center[1] - 0.5 * ny as f64 * spacing,
        ];
        Grid2D::new(nx, ny, spacing, origin)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn idx(&self, ix: usize, iy: usize) -> usize {
        debug_assert!(ix < self.nx && iy < self.ny);
        iy * self.nx + ix
    }

    /// Center of cell (ix, iy).
    #[inline]
    pub fn center(&self, ix: usize, iy: usize) -> [f64; 2] {
        [
            self.origin[0] + (ix as f64 + 0.5) * self.spacing,
            self.origin[1] + (iy as f64 + 0.5) * self.spacing,
        ]
    }

    #[inline]
    pub fn cell_area(&self) -> f64 {
        self.spacing * self.spacing
    }

    /// Index of the cell containing a point, if inside the grid.
    pub fn locate(&self, p: [f64; 2]) -> Option<(usize, usize)> {
        let fx = (p[0] - self.origin[0]) / self.spacing;
        let fy = (p[1] - self.origin[1]) / self.spacing;
        if fx < 0.0 || fy < 0.0 {
            return None;
        }
        let ix = fx as usize;
        let iy = fy as usize;
        if ix < self.nx && iy < self.ny {
            Some((ix, iy))
        } else {
            None
        }
    }
}

/// Scalar field on a [`Grid2D`], row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Field2 {
    pub nx: usize,
    pub ny: usize,
    pub data: Vec<f64>,
}

impl Field2 {
    pub fn zeros(grid: &Grid2D) -> Self {
        Field2 { nx: grid.nx, ny: grid.ny, data: vec![0.0; grid.len()] }
    }

    pub fn from_fn(grid: &Grid2D, mut f: impl FnMut(f64, f64) -> f64) -> Self {
        let mut data = Vec::with_capacity(grid.len());
        for iy in 0..grid.ny {
            for ix in 0..grid.nx {
                let [x, y] = grid.center(ix, iy);
                data.push(f(x, y));
            }
        }
        Field2 { nx: grid.nx, ny: grid.ny, data }
    }

    #[inline]
    pub fn idx(&self, ix: usize, iy: usize) -> usize {
        debug_assert!(ix < self.nx && iy < self.ny);
        iy * self.nx + ix
    }

    #[inline]
    pub fn at(&self, ix: usize, iy: usize) -> f64 {
        self.data[self.idx(ix, iy)]
    }

    pub fn same_shape(&self, other: &Field2) -> bool {
        self.nx == other.nx && self.ny == other.ny
    }

    pub fn scale(&mut self, c: f64) {
        for v in &mut self.data {
            *v *= c;
        }
    }

    /// self += c * other
    pub fn axpy(&mut self, c: f64, other: &Field2) {
        assert!(self.same_shape(other));
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += c * b;
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, &v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Axis-aligned bounding box of cells with |value| > threshold.
    pub fn support_box(&self, threshold: f64) -> Option<Window> {
        let (mut i0, mut i1, mut j0, mut j1) = (usize::MAX, 0usize, usize::MAX, 0usize);
        for iy in 0..self.ny {
            let row = &self.data[iy * self.nx..(iy + 1) * self.nx];
            for (ix, &v) in row.iter().enumerate() {
                if v.abs() > threshold {
                    i0 = i0.min(ix);
                    i1 = i1.max(ix);
                    j0 = j0.min(iy);
                    j1 = j1.max(iy);
                }
            }
        }
        if i0 == usize::MAX {
            None
        } else {
            Some(Window { i0, j0, nx: i1 - i0 + 1, ny: j1 - j0 + 1 })
        }
    }
}

/// Rectangular index window into a grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    pub i0: usize,
    pub j0: usize,
    pub nx: usize,
    pub ny: usize,
}

impl Window {
    pub fn full(grid: &Grid2D) -> Self {
        Window { i0: 0, j0: 0, nx: grid.nx, ny: grid.ny }
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Grow by `cells` in every direction, clipped to the grid.
    pub fn dilated(&self, cells: usize, grid: &Grid2D) -> Window {
        let i0 = self.i0.saturating_sub(cells);
        let j0 = self.j0.saturating_sub(cells);
        let i1 = (self.i0 + self.nx + cells).min(grid.nx);
        let j1 = (self.j0 + self.ny + cells).min(grid.ny);
        Window { i0, j0, nx: i1 - i0, ny: j1 - j0 }
    }

    pub fn contains(&self, ix: usize, iy: usize) -> bool {
        ix >= self.i0 && ix < self.i0 + self.nx && iy >= self.j0 && iy < self.j0 + self.ny
    }

    /// Copy the windowed part of a full-grid field.
    pub fn extract(&self, field: &Field2) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.len());
        for jy in self.j0..self.j0 + self.ny {
            let row = &field.data[jy * field.nx + self.i0..jy * field.nx + self.i0 + self.nx];
            out.extend_from_slice(row);
        }
        out
    }
}

const SUM_CHUNK: usize = 4096;

/// Deterministic chunked sum: plain sums over fixed 4096-element chunks,
/// pairwise combination of the partials.
pub fn stable_sum(xs: &[f64]) -> f64 {
    if xs.len() <= SUM_CHUNK {
        return xs.iter().sum();
    }
    let mut partials: Vec<f64> = xs.chunks(SUM_CHUNK).map(|c| c.iter().sum()).collect();
    while partials.len() > 1 {
        let mut next = Vec::with_capacity(partials.len().div_ceil(2));
        for pair in partials.chunks(2) {
            next.push(pair.iter().sum());
        }
        partials = next;
    }
    partials[0]
}

fn dot_chunked(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut partials = Vec::with_capacity(a.len().div_ceil(SUM_CHUNK));
    for (ca, cb) in a.chunks(SUM_CHUNK).zip(b.chunks(SUM_CHUNK)) {
        let mut s = 0.0;
        for (x, y) in ca.iter().zip(cb) {
            s += x * y;
        }
        partials.push(s);
    }
    stable_sum(&partials)
}

/// Grid inner product <a, b> = spacing^2 * sum(a * b).
pub fn inner_product(a: &Field2, b: &Field2, grid: &Grid2D) -> Result<f64> {
    if !a.same_shape(b) || a.nx != grid.nx || a.ny != grid.ny {
        return Err(Error::GridMismatch(format!(
            "inner product of {}x{} and {}x{} fields on {}x{} grid",
            a.nx, a.ny, b.nx, b.ny, grid.nx, grid.ny
        )));
    }
    Ok(grid.cell_area() * dot_chunked(&a.data, &b.data))
}

/// Squared grid norm of a field.
pub fn norm_sq(a: &Field2, grid: &Grid2D) -> f64 {
    grid.cell_area() * dot_chunked(&a.data, &a.data)
}
