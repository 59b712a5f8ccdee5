//! Piecewise-constant functions on uniform dyadic meshes and the shifted
//! dyadic grids used to realize suprema over cubes.
//!
//! A [`DomainBox`] is a cube of side `2^K` in dimension 1 or 2. A [`MeshFn`]
//! at level `J` stores one value per cell of side `2^{K-J}`, row-major with the
//! first axis fastest (`values[iy * m + ix]`).
//!
//! Cube geometry is done in integer *third-cell units*: one unit is a third of
//! a mesh cell, so the box is `[0, 3·2^J)` per axis and every shifted cube at a
//! level `k ≥ K-J` has integer endpoints. Grid `i` (one ternary digit per axis)
//! shifts level `k` by `(-1)^k · i · 2^k / 3`; the alternating sign keeps each
//! shifted family nested across levels.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::young::YoungFn;

/// Neumaier-compensated accumulator.
#[derive(Clone, Copy, Debug, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl std::iter::FromIterator<f64> for KahanSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = KahanSum::new();
        for x in iter {
            s.add(x);
        }
        s
    }
}

/// Compensated sum of an iterator.
pub fn ksum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<KahanSum>().value()
}

#[inline]
pub(crate) fn floor_div(a: i64, b: i64) -> i64 {
    a.div_euclid(b)
}

#[inline]
pub(crate) fn ceil_div(a: i64, b: i64) -> i64 {
    -(-a).div_euclid(b)
}

/// Cubic computational domain `origin + [0, 2^K)^n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomainBox {
    pub n: usize,
    pub origin: Vec<f64>,
    pub k: i32,
}

impl DomainBox {
    pub fn new(n: usize, origin: Vec<f64>, k: i32) -> Result<Self> {
        if n != 1 && n != 2 {
            return Err(Error::InvalidParameter(format!("dimension {n} not supported (1 or 2)")));
        }
        if origin.len() != n || origin.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter("origin must have n finite coordinates".into()));
        }
        if !(-60..=60).contains(&k) {
            return Err(Error::InvalidParameter(format!("box level {k} out of range")));
        }
        Ok(Self { n, origin, k })
    }

    /// Box `[-2^{K-1}, 2^{K-1})^n`, so the origin of `ℝⁿ` is a cell corner.
    pub fn centered(n: usize, k: i32) -> Result<Self> {
        let half = 2f64.powi(k - 1);
        Self::new(n, vec![-half; n], k)
    }

    pub fn side(&self) -> f64 {
        2f64.powi(self.k)
    }

    pub fn volume(&self) -> f64 {
        self.side().powi(self.n as i32)
    }

    /// Number of shifted grids, `3^n`.
    pub fn grid_count(&self) -> u32 {
        3u32.pow(self.n as u32)
    }
}

/// A cube of side `2^level` in shifted grid `grid_id`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DyadicCube {
    pub grid_id: u32,
    pub level: i32,
    pub coords: [i64; 2],
}

#[inline]
fn level_sign(k: i32) -> i64 {
    if k.rem_euclid(2) == 0 {
        1
    } else {
        -1
    }
}

#[inline]
fn grid_digit(grid_id: u32, axis: usize) -> i64 {
    ((grid_id / 3u32.pow(axis as u32)) % 3) as i64
}

impl DyadicCube {
    pub fn new(grid_id: u32, level: i32, coords: [i64; 2]) -> Self {
        Self {
            grid_id,
            level,
            coords,
        }
    }

    pub fn side(&self) -> f64 {
        2f64.powi(self.level)
    }

    /// The enclosing cube one level up in the same grid.
    pub fn parent(&self) -> DyadicCube {
        let s = level_sign(self.level);
        let mut coords = [0i64; 2];
        for (axis, c) in coords.iter_mut().enumerate() {
            let i = grid_digit(self.grid_id, axis);
            *c = floor_div(self.coords[axis] + s * i, 2);
        }
        DyadicCube::new(self.grid_id, self.level + 1, coords)
    }

    /// The enclosing cube at `level ≥ self.level`.
    pub fn ancestor_at(&self, level: i32) -> Option<DyadicCube> {
        if level < self.level {
            return None;
        }
        let mut q = *self;
        while q.level < level {
            q = q.parent();
        }
        Some(q)
    }

    /// The `2^n` cubes one level down whose parent is `self`.
    pub fn children(&self, n: usize) -> Vec<DyadicCube> {
        let s = level_sign(self.level - 1);
        let per_axis: Vec<[i64; 2]> = (0..n)
            .map(|axis| {
                let i = grid_digit(self.grid_id, axis);
                let base = 2 * self.coords[axis] - s * i;
                [base, base + 1]
            })
            .collect();
        let mut out = Vec::with_capacity(1 << n);
        if n == 1 {
            for &c in &per_axis[0] {
                out.push(DyadicCube::new(self.grid_id, self.level - 1, [c, 0]));
            }
        } else {
            for &cy in &per_axis[1] {
                for &cx in &per_axis[0] {
                    out.push(DyadicCube::new(self.grid_id, self.level - 1, [cx, cy]));
                }
            }
        }
        out
    }

    /// Same grid and `other ⊆ self`.
    pub fn contains(&self, other: &DyadicCube) -> bool {
        self.grid_id == other.grid_id && other.ancestor_at(self.level) == Some(*self)
    }

    /// Same grid and `other ⊊ self`.
    pub fn strictly_contains(&self, other: &DyadicCube) -> bool {
        other.level < self.level && self.contains(other)
    }
}

/// Geometry of a mesh: box, level and the third-unit frame.
#[derive(Clone, Debug, PartialEq)]
pub struct Frame {
    pub n: usize,
    pub box_level: i32,
    pub mesh_level: u32,
    /// Cells per axis, `2^J`.
    pub m: usize,
}

/// Per-axis half-open extent in third-cell units.
pub type Extent = [(i64, i64); 2];

impl Frame {
    pub fn new(domain: &DomainBox, mesh_level: u32) -> Result<Self> {
        let max_level = if domain.n == 1 { 24 } else { 13 };
        if mesh_level > max_level {
            return Err(Error::InvalidParameter(format!(
                "mesh level {mesh_level} too fine for n = {}",
                domain.n
            )));
        }
        Ok(Self {
            n: domain.n,
            box_level: domain.k,
            mesh_level,
            m: 1usize << mesh_level,
        })
    }

    /// Finest admissible cube level `K - J`.
    pub fn finest_level(&self) -> i32 {
        self.box_level - self.mesh_level as i32
    }

    pub fn cell_count(&self) -> usize {
        self.m.pow(self.n as u32)
    }

    pub fn cell_side(&self) -> f64 {
        2f64.powi(self.finest_level())
    }

    pub fn cell_volume(&self) -> f64 {
        self.cell_side().powi(self.n as i32)
    }

    /// Cube side in third units at level `k`.
    fn side_units(&self, k: i32) -> i64 {
        3i64 << (k - self.finest_level())
    }

    fn shift_units(&self, grid_id: u32, k: i32, axis: usize) -> i64 {
        level_sign(k) * grid_digit(grid_id, axis) * (1i64 << (k - self.finest_level()))
    }

    pub fn check_grid(&self, grid_id: u32) -> Result<()> {
        if grid_id >= 3u32.pow(self.n as u32) {
            return Err(Error::InvalidGrid { grid_id, n: self.n });
        }
        Ok(())
    }

    pub fn check_level(&self, k: i32) -> Result<()> {
        if k < self.finest_level() || k > self.box_level {
            return Err(Error::InvalidCube(format!(
                "level {k} outside [{}, {}]",
                self.finest_level(),
                self.box_level
            )));
        }
        Ok(())
    }

    /// Unclipped extent of a cube in third units.
    pub fn extent(&self, q: &DyadicCube) -> Result<Extent> {
        self.check_grid(q.grid_id)?;
        self.check_level(q.level)?;
        let s = self.side_units(q.level);
        let mut e = [(0i64, 1i64); 2];
        for (axis, ext) in e.iter_mut().enumerate().take(self.n) {
            let lo = q.coords[axis] * s + self.shift_units(q.grid_id, q.level, axis);
            *ext = (lo, lo + s);
        }
        Ok(e)
    }

    /// Extent clipped to the box; `None` if the intersection is empty.
    pub fn clipped(&self, q: &DyadicCube) -> Result<Option<Extent>> {
        let mut e = self.extent(q)?;
        let l = 3 * self.m as i64;
        for ext in e.iter_mut().take(self.n) {
            ext.0 = ext.0.max(0);
            ext.1 = ext.1.min(l);
            if ext.0 >= ext.1 {
                return Ok(None);
            }
        }
        Ok(Some(e))
    }

    /// `|Q ∩ box|`.
    pub fn clipped_measure(&self, q: &DyadicCube) -> Result<f64> {
        Ok(match self.clipped(q)? {
            None => 0.0,
            Some(e) => {
                let unit = self.cell_side() / 3.0;
                (0..self.n).map(|a| (e[a].1 - e[a].0) as f64 * unit).product()
            }
        })
    }

    /// Cells overlapping `q` with the overlap as a fraction of the cell.
    pub fn overlaps(&self, q: &DyadicCube) -> Result<Vec<(usize, f64)>> {
        let e = match self.clipped(q)? {
            None => return Ok(vec![]),
            Some(e) => e,
        };
        let axis_cells = |lo: i64, hi: i64| -> Vec<(usize, f64)> {
            let first = floor_div(lo, 3);
            let last = ceil_div(hi, 3) - 1;
            (first..=last)
                .filter_map(|c| {
                    let ov = hi.min(3 * c + 3) - lo.max(3 * c);
                    (ov > 0).then(|| (c as usize, ov as f64 / 3.0))
                })
                .collect()
        };
        let xs = axis_cells(e[0].0, e[0].1);
        if self.n == 1 {
            return Ok(xs);
        }
        let ys = axis_cells(e[1].0, e[1].1);
        let mut out = Vec::with_capacity(xs.len() * ys.len());
        for &(iy, fy) in &ys {
            for &(ix, fx) in &xs {
                out.push((iy * self.m + ix, fx * fy));
            }
        }
        Ok(out)
    }

    /// Per-axis index ranges (inclusive) of cells whose centers lie in `q`.
    pub fn center_ranges(&self, q: &DyadicCube) -> Result<Option<[(usize, usize); 2]>> {
        let e = self.extent(q)?;
        let mut out = [(0usize, 0usize); 2];
        for axis in 0..self.n {
            let (lo, hi) = e[axis];
            let first = ceil_div(lo - 1, 3).max(0);
            let last = floor_div(hi - 2, 3).min(self.m as i64 - 1);
            if first > last {
                return Ok(None);
            }
            out[axis] = (first as usize, last as usize);
        }
        Ok(Some(out))
    }

    /// Indices of cells whose centers lie in `q`.
    pub fn cells_with_centers(&self, q: &DyadicCube) -> Result<Vec<usize>> {
        let r = match self.center_ranges(q)? {
            None => return Ok(vec![]),
            Some(r) => r,
        };
        let mut out = Vec::new();
        if self.n == 1 {
            out.extend(r[0].0..=r[0].1);
        } else {
            for iy in r[1].0..=r[1].1 {
                for ix in r[0].0..=r[0].1 {
                    out.push(iy * self.m + ix);
                }
            }
        }
        Ok(out)
    }

    /// Per-axis cell coordinates of a flat index.
    pub fn cell_coords(&self, idx: usize) -> [usize; 2] {
        if self.n == 1 {
            [idx, 0]
        } else {
            [idx % self.m, idx / self.m]
        }
    }

    /// The cube of grid `grid_id` at level `k` containing the center of cell `idx`.
    pub fn cube_at_cell(&self, grid_id: u32, k: i32, idx: usize) -> DyadicCube {
        let cc = self.cell_coords(idx);
        let s = self.side_units(k);
        let mut coords = [0i64; 2];
        for axis in 0..self.n {
            let center = 3 * cc[axis] as i64 + 1;
            coords[axis] = floor_div(center - self.shift_units(grid_id, k, axis), s);
        }
        DyadicCube::new(grid_id, k, coords)
    }

    /// Per-axis coordinate range (inclusive) of grid cubes at level `k`
    /// meeting the box.
    pub fn coord_range(&self, grid_id: u32, k: i32) -> [(i64, i64); 2] {
        let s = self.side_units(k);
        let l = 3 * self.m as i64;
        let mut out = [(0i64, 0i64); 2];
        for (axis, r) in out.iter_mut().enumerate().take(self.n) {
            let shift = self.shift_units(grid_id, k, axis);
            *r = (floor_div(-shift, s), ceil_div(l - shift, s) - 1);
        }
        out
    }

    /// Real-coordinate center of a cell relative to the box origin.
    pub fn cell_center_offset(&self, idx: usize) -> [f64; 2] {
        let h = self.cell_side();
        let cc = self.cell_coords(idx);
        [(cc[0] as f64 + 0.5) * h, (cc[1] as f64 + 0.5) * h]
    }
}

/// All cubes of grid `grid_id` meeting the box, levels `k_min..=k_max`,
/// ordered from the top level down.
pub fn enumerate_cubes(
    domain: &DomainBox,
    mesh_level: u32,
    grid_id: u32,
    k_min: i32,
    k_max: i32,
) -> Result<Vec<DyadicCube>> {
    let frame = Frame::new(domain, mesh_level)?;
    frame.check_grid(grid_id)?;
    if k_min > k_max {
        return Ok(vec![]);
    }
    frame.check_level(k_min)?;
    frame.check_level(k_max)?;
    let mut out = Vec::new();
    for k in (k_min..=k_max).rev() {
        let r = frame.coord_range(grid_id, k);
        if domain.n == 1 {
            for c in r[0].0..=r[0].1 {
                out.push(DyadicCube::new(grid_id, k, [c, 0]));
            }
        } else {
            for cy in r[1].0..=r[1].1 {
                for cx in r[0].0..=r[0].1 {
                    out.push(DyadicCube::new(grid_id, k, [cx, cy]));
                }
            }
        }
    }
    Ok(out)
}

/// Nonnegative cell-constant function on a uniform mesh.
#[derive(Clone, Debug, PartialEq)]
pub struct MeshFn {
    domain: DomainBox,
    frame: Frame,
    values: Vec<f64>,
}

impl MeshFn {
    pub fn new(domain: DomainBox, mesh_level: u32, values: Vec<f64>) -> Result<Self> {
        let frame = Frame::new(&domain, mesh_level)?;
        if values.len() != frame.cell_count() {
            return Err(Error::MeshMismatch(format!(
                "expected {} values, got {}",
                frame.cell_count(),
                values.len()
            )));
        }
        if let Some(bad) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::Domain(format!("mesh value {bad} is not finite and nonnegative")));
        }
        Ok(Self {
            domain,
            frame,
            values,
        })
    }

    pub fn constant(domain: DomainBox, mesh_level: u32, c: f64) -> Result<Self> {
        let frame = Frame::new(&domain, mesh_level)?;
        Self::new(domain, mesh_level, vec![c; frame.cell_count()])
    }

    /// Samples `f` at cell centers given in absolute coordinates.
    pub fn from_centers<F: Fn(&[f64]) -> f64>(domain: DomainBox, mesh_level: u32, f: F) -> Result<Self> {
        let frame = Frame::new(&domain, mesh_level)?;
        let n = domain.n;
        let values = (0..frame.cell_count())
            .map(|i| {
                let off = frame.cell_center_offset(i);
                let mut x = [0.0; 2];
                for a in 0..n {
                    x[a] = domain.origin[a] + off[a];
                }
                f(&x[..n])
            })
            .collect();
        Self::new(domain, mesh_level, values)
    }

    pub fn domain(&self) -> &DomainBox {
        &self.domain
    }

    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    pub fn n(&self) -> usize {
        self.domain.n
    }

    pub fn mesh_level(&self) -> u32 {
        self.frame.mesh_level
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn cell_volume(&self) -> f64 {
        self.frame.cell_volume()
    }

    /// Absolute coordinates of the center of cell `idx`.
    pub fn center(&self, idx: usize) -> [f64; 2] {
        let off = self.frame.cell_center_offset(idx);
        let mut x = [0.0; 2];
        for a in 0..self.n() {
            x[a] = self.domain.origin[a] + off[a];
        }
        x
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn is_positive(&self) -> bool {
        self.values.iter().all(|&v| v > 0.0)
    }

    pub fn same_mesh(&self, other: &MeshFn) -> Result<()> {
        if self.domain != other.domain || self.frame != other.frame {
            return Err(Error::MeshMismatch("functions live on different meshes".into()));
        }
        Ok(())
    }

    /// Cellwise map.
    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> Result<MeshFn> {
        MeshFn::new(
            self.domain.clone(),
            self.mesh_level(),
            self.values.iter().map(|&v| f(v)).collect(),
        )
    }

    /// Cellwise combination with a function on the same mesh.
    pub fn zip<F: Fn(f64, f64) -> f64>(&self, other: &MeshFn, f: F) -> Result<MeshFn> {
        self.same_mesh(other)?;
        MeshFn::new(
            self.domain.clone(),
            self.mesh_level(),
            self.values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        )
    }

    pub fn apply_young(&self, phi: &YoungFn) -> Result<MeshFn> {
        self.map(|v| phi.value(v))
    }

    pub fn powf(&self, p: f64) -> Result<MeshFn> {
        if p == 1.0 {
            return Ok(self.clone());
        }
        self.map(|v| v.powf(p))
    }

    pub fn scale(&self, c: f64) -> Result<MeshFn> {
        self.map(|v| c * v)
    }

    pub fn mul(&self, other: &MeshFn) -> Result<MeshFn> {
        self.zip(other, |a, b| a * b)
    }

    /// Cellwise quotient; `0/0` is `0`.
    pub fn div(&self, other: &MeshFn) -> Result<MeshFn> {
        self.zip(other, |a, b| if a == 0.0 { 0.0 } else { a / b })
    }

    pub fn add(&self, other: &MeshFn) -> Result<MeshFn> {
        self.zip(other, |a, b| a + b)
    }

    /// `∫` over the whole box.
    pub fn total_integral(&self) -> f64 {
        ksum(self.values.iter().copied()) * self.cell_volume()
    }

    /// `Σ_c value(c)·|c ∩ Q|`.
    pub fn integrate(&self, q: &DyadicCube) -> Result<f64> {
        let vol = self.cell_volume();
        Ok(ksum(
            self.frame
                .overlaps(q)?
                .into_iter()
                .map(|(i, frac)| self.values[i] * frac * vol),
        ))
    }

    /// `(value, measure)` pairs of the cells meeting `q`.
    pub fn samples(&self, q: &DyadicCube) -> Result<Vec<(f64, f64)>> {
        let vol = self.cell_volume();
        Ok(self
            .frame
            .overlaps(q)?
            .into_iter()
            .map(|(i, frac)| (self.values[i], frac * vol))
            .collect())
    }

    /// `(value, measure·w)` pairs of the cells meeting `q`.
    pub fn weighted_samples(&self, q: &DyadicCube, w: &MeshFn) -> Result<Vec<(f64, f64)>> {
        self.same_mesh(w)?;
        let vol = self.cell_volume();
        Ok(self
            .frame
            .overlaps(q)?
            .into_iter()
            .map(|(i, frac)| (self.values[i], frac * vol * w.values[i]))
            .collect())
    }

    /// Average over `Q ∩ box`.
    pub fn average(&self, q: &DyadicCube) -> Result<f64> {
        let m = self.frame.clipped_measure(q)?;
        if m == 0.0 {
            return Err(Error::EmptyIntersection);
        }
        Ok(self.integrate(q)? / m)
    }

    /// Smallest value among cells with positive overlap with `q`.
    pub fn essential_inf(&self, q: &DyadicCube) -> Result<f64> {
        let ov = self.frame.overlaps(q)?;
        if ov.is_empty() {
            return Err(Error::EmptyIntersection);
        }
        Ok(ov
            .into_iter()
            .map(|(i, _)| self.values[i])
            .fold(f64::INFINITY, f64::min))
    }

    /// Largest value among cells with positive overlap with `q`.
    pub fn essential_sup(&self, q: &DyadicCube) -> Result<f64> {
        let ov = self.frame.overlaps(q)?;
        if ov.is_empty() {
            return Err(Error::EmptyIntersection);
        }
        Ok(ov.into_iter().map(|(i, _)| self.values[i]).fold(0.0, f64::max))
    }

    /// Little-endian layout: `n: u32, K: i32, J: u32, origin: n×f64, values: f64…`.
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(&(self.n() as u32).to_le_bytes())?;
        w.write_all(&self.domain.k.to_le_bytes())?;
        w.write_all(&self.mesh_level().to_le_bytes())?;
        for x in &self.domain.origin {
            w.write_all(&x.to_le_bytes())?;
        }
        for v in &self.values {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<MeshFn> {
        let mut b4 = [0u8; 4];
        let mut b8 = [0u8; 8];
        r.read_exact(&mut b4)?;
        let n = u32::from_le_bytes(b4) as usize;
        r.read_exact(&mut b4)?;
        let k = i32::from_le_bytes(b4);
        r.read_exact(&mut b4)?;
        let j = u32::from_le_bytes(b4);
        if n != 1 && n != 2 {
            return Err(Error::Format(format!("bad dimension {n} in mesh header")));
        }
        let mut origin = Vec::with_capacity(n);
        for _ in 0..n {
            r.read_exact(&mut b8)?;
            origin.push(f64::from_le_bytes(b8));
        }
        let domain = DomainBox::new(n, origin, k)?;
        let frame = Frame::new(&domain, j)?;
        let mut values = Vec::with_capacity(frame.cell_count());
        for _ in 0..frame.cell_count() {
            r.read_exact(&mut b8)?;
            values.push(f64::from_le_bytes(b8));
        }
        let mut extra = [0u8; 1];
        if r.read(&mut extra)? != 0 {
            return Err(Error::Format("trailing bytes after mesh payload".into()));
        }
        MeshFn::new(domain, j, values)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        self.write_binary(&mut out).expect("writing to a Vec cannot fail");
        out
    }

    /// CSV with one row per cell: index, center coordinates, value.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        if self.n() == 1 {
            wr.write_record(["cell", "x", "value"])?;
        } else {
            wr.write_record(["cell", "x", "y", "value"])?;
        }
        for (i, v) in self.values.iter().enumerate() {
            let c = self.center(i);
            let mut row = vec![i.to_string(), c[0].to_string()];
            if self.n() == 2 {
                row.push(c[1].to_string());
            }
            row.push(v.to_string());
            wr.write_record(&row)?;
        }
        wr.flush()?;
        Ok(())
    }
}

/// `|center(c)|^β` on every cell.
pub fn power_weight(domain: &DomainBox, mesh_level: u32, beta: f64) -> Result<MeshFn> {
    MeshFn::from_centers(domain.clone(), mesh_level, |x| {
        if beta == 0.0 {
            1.0
        } else {
            x.iter().map(|c| c * c).sum::<f64>().sqrt().powf(beta)
        }
    })
}
