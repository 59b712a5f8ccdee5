//! Maximal operators `M_{γ,Φ} f(x) = sup_{Q ∋ x} |Q|^{γ/n} ‖f‖_{Φ,Q}` realized
//! over the cubes of one or all shifted dyadic grids, plus the dyadic-control
//! and pointwise Hedberg-type checks.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::luxemburg::lux_norm_samples;
use crate::mesh::{DyadicCube, Frame, MeshFn};
use crate::young::{thm3_params, YoungFn};

/// Which grids the supremum runs over.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scope {
    Grid(u32),
    All,
}

impl Scope {
    pub fn grids(&self, n: usize) -> Vec<u32> {
        match self {
            Scope::Grid(g) => vec![*g],
            Scope::All => (0..3u32.pow(n as u32)).collect(),
        }
    }
}

impl std::str::FromStr for Scope {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all" => Ok(Scope::All),
            _ => s
                .strip_prefix("grid")
                .and_then(|d| d.parse().ok())
                .map(Scope::Grid)
                .ok_or_else(|| Error::InvalidParameter(format!("unknown scope '{s}' (gridN or all)"))),
        }
    }
}

/// One value per cube of a grid level, addressed by cube coordinates.
#[derive(Clone, Debug)]
struct LevelTable {
    level: i32,
    lo: [i64; 2],
    dims: [usize; 2],
    values: Vec<f64>,
}

impl LevelTable {
    fn index(&self, coords: &[i64; 2]) -> Option<usize> {
        let dx = coords[0] - self.lo[0];
        let dy = coords[1] - self.lo[1];
        if dx < 0 || dy < 0 || dx as usize >= self.dims[0] || dy as usize >= self.dims[1] {
            return None;
        }
        Some(dy as usize * self.dims[0] + dx as usize)
    }

    fn cube(&self, grid_id: u32, idx: usize) -> DyadicCube {
        let dx = (idx % self.dims[0]) as i64;
        let dy = (idx / self.dims[0]) as i64;
        DyadicCube::new(grid_id, self.level, [self.lo[0] + dx, self.lo[1] + dy])
    }
}

/// Per-cube values for every cube of one grid between two levels.
#[derive(Clone, Debug)]
pub struct GridTable {
    pub grid_id: u32,
    frame: Frame,
    levels: Vec<LevelTable>,
}

impl GridTable {
    /// Evaluates `value` on every cube meeting the box, in parallel.
    pub fn build<F>(frame: &Frame, grid_id: u32, k_min: i32, k_max: i32, value: F) -> Result<Self>
    where
        F: Fn(&DyadicCube) -> Result<f64> + Sync,
    {
        frame.check_grid(grid_id)?;
        let mut levels = Vec::new();
        for k in (k_min..=k_max).rev() {
            frame.check_level(k)?;
            let r = frame.coord_range(grid_id, k);
            let lo = [r[0].0, if frame.n == 2 { r[1].0 } else { 0 }];
            let dims = [
                (r[0].1 - r[0].0 + 1) as usize,
                if frame.n == 2 { (r[1].1 - r[1].0 + 1) as usize } else { 1 },
            ];
            let mut table = LevelTable {
                level: k,
                lo,
                dims,
                values: vec![],
            };
            table.values = (0..dims[0] * dims[1])
                .into_par_iter()
                .map(|i| value(&table.cube(grid_id, i)))
                .collect::<Result<Vec<f64>>>()?;
            levels.push(table);
        }
        Ok(Self {
            grid_id,
            frame: frame.clone(),
            levels,
        })
    }

    pub fn get(&self, q: &DyadicCube) -> Option<f64> {
        if q.grid_id != self.grid_id {
            return None;
        }
        let t = self.levels.iter().find(|t| t.level == q.level)?;
        t.index(&q.coords).map(|i| t.values[i])
    }

    pub fn levels(&self) -> impl Iterator<Item = i32> + '_ {
        self.levels.iter().map(|t| t.level)
    }

    /// Cubes of one level with their values.
    pub fn level_entries(&self, k: i32) -> Vec<(DyadicCube, f64)> {
        match self.levels.iter().find(|t| t.level == k) {
            None => vec![],
            Some(t) => t
                .values
                .iter()
                .enumerate()
                .map(|(i, &v)| (t.cube(self.grid_id, i), v))
                .collect(),
        }
    }

    /// Largest value over the cubes of this table containing the center of cell `idx`.
    pub fn max_at_cell(&self, idx: usize) -> f64 {
        let mut best = 0.0_f64;
        for t in &self.levels {
            let q = self.frame.cube_at_cell(self.grid_id, t.level, idx);
            if let Some(i) = t.index(&q.coords) {
                best = best.max(t.values[i]);
            }
        }
        best
    }
}

/// Validated operator descriptor.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MaximalOperator {
    pub phi: YoungFn,
    pub gamma: f64,
    pub scope: Scope,
}

/// `|Q ∩ box|^{γ/n} ‖f‖_{Φ,Q}` for every in-scope cube, one table per grid.
pub fn cube_tables(f: &MeshFn, phi: &YoungFn, gamma: f64, scope: Scope) -> Result<Vec<GridTable>> {
    let n = f.n();
    if !(0.0..n as f64).contains(&gamma) {
        return Err(Error::InvalidParameter(format!("gamma = {gamma} outside [0, n)")));
    }
    phi.validate()?;
    let frame = f.frame().clone();
    scope
        .grids(n)
        .into_iter()
        .map(|g| {
            GridTable::build(&frame, g, frame.finest_level(), frame.box_level, |q| {
                let s = f.samples(q)?;
                let norm = lux_norm_samples(&s, phi)?.norm;
                if gamma == 0.0 || norm == 0.0 {
                    return Ok(norm);
                }
                let measure: f64 = s.iter().map(|x| x.1).sum();
                Ok(measure.powf(gamma / n as f64) * norm)
            })
        })
        .collect()
}

/// Cellwise sup over the in-scope cubes containing each cell center.
pub fn maximal_field(f: &MeshFn, phi: &YoungFn, gamma: f64, scope: Scope) -> Result<MeshFn> {
    let tables = cube_tables(f, phi, gamma, scope)?;
    let values: Vec<f64> = (0..f.len())
        .into_par_iter()
        .map(|i| tables.iter().map(|t| t.max_at_cell(i)).fold(0.0, f64::max))
        .collect();
    MeshFn::new(f.domain().clone(), f.mesh_level(), values)
}

/// Sup over cells of the arbitrary-position surrogate divided by the sum of
/// the `3ⁿ` single-grid maximal functions.
///
/// The surrogate takes every cube of dyadic side whose corner sits on a mesh
/// cell corner, clipped to the box.
pub fn dyadic_control_check(f: &MeshFn, phi: &YoungFn) -> Result<f64> {
    let frame = f.frame();
    let n = f.n();
    let m = frame.m as i64;
    let mut surrogate = vec![0.0_f64; f.len()];
    for k in frame.finest_level()..=frame.box_level {
        let w = 1i64 << (k - frame.finest_level());
        let anchors: Vec<[i64; 2]> = if n == 1 {
            (1 - w..m).map(|p| [p, 0]).collect()
        } else {
            (1 - w..m).flat_map(|py| (1 - w..m).map(move |px| [px, py])).collect()
        };
        let norms: Vec<f64> = anchors
            .par_iter()
            .map(|a| {
                let vol = frame.cell_volume();
                let mut s = Vec::new();
                let xr = a[0].max(0)..(a[0] + w).min(m);
                if n == 1 {
                    for ix in xr {
                        s.push((f.values()[ix as usize], vol));
                    }
                } else {
                    for iy in a[1].max(0)..(a[1] + w).min(m) {
                        for ix in xr.clone() {
                            s.push((f.values()[(iy * m + ix) as usize], vol));
                        }
                    }
                }
                lux_norm_samples(&s, phi).map(|r| r.norm)
            })
            .collect::<Result<Vec<f64>>>()?;
        for (a, norm) in anchors.iter().zip(norms) {
            if norm == 0.0 {
                continue;
            }
            let xr = a[0].max(0)..(a[0] + w).min(m);
            if n == 1 {
                for ix in xr {
                    let c = &mut surrogate[ix as usize];
                    *c = c.max(norm);
                }
            } else {
                for iy in a[1].max(0)..(a[1] + w).min(m) {
                    for ix in xr.clone() {
                        let c = &mut surrogate[(iy * m + ix) as usize];
                        *c = c.max(norm);
                    }
                }
            }
        }
    }
    let tables = cube_tables(f, phi, 0.0, Scope::All)?;
    let mut worst = 0.0_f64;
    for (i, s) in surrogate.iter().enumerate() {
        let sum: f64 = tables.iter().map(|t| t.max_at_cell(i)).sum();
        if sum > 0.0 {
            worst = worst.max(s / sum);
        }
    }
    Ok(worst)
}

/// Parameters of the pointwise fractional check.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HedbergParams {
    pub r: f64,
    pub delta: f64,
    pub gamma: f64,
    pub p: f64,
}

/// The auxiliary function `ξ` of the pointwise estimate and the exponent `q`.
pub fn hedberg_xi(n: usize, hp: &HedbergParams) -> Result<(YoungFn, f64)> {
    let nf = n as f64;
    if !(hp.p >= 1.0 && hp.p < nf / hp.gamma) {
        return Err(Error::InvalidParameter(format!(
            "need 1 <= p < n/gamma (p = {}, gamma = {})",
            hp.p, hp.gamma
        )));
    }
    if hp.p > hp.r {
        let t = thm3_params(n, hp.r, hp.delta, hp.gamma, hp.p)?;
        Ok((t.xi, t.q))
    } else if hp.p == hp.r {
        let q = 1.0 / (1.0 / hp.r - hp.gamma / nf);
        Ok((YoungFn::llogl(q, hp.delta * q / hp.r), q))
    } else {
        Err(Error::InvalidParameter(format!("p = {} below r = {}", hp.p, hp.r)))
    }
}

/// `sup_x M_{γ,Φ}(f/w)(x) / [M_ξ(f^{p/q}/w)(x) (∫ f^p)^{γ/n}]` with
/// `Φ(t) = t^r (1 + log⁺ t)^δ`; `0/0` counts as `0`.
pub fn hedberg_check(f: &MeshFn, w: &MeshFn, hp: &HedbergParams) -> Result<f64> {
    let n = f.n();
    if !w.is_positive() {
        return Err(Error::Domain("weight must be strictly positive".into()));
    }
    let (xi, q) = hedberg_xi(n, hp)?;
    let phi = YoungFn::llogl(hp.r, hp.delta);
    let lhs = maximal_field(&f.div(w)?, &phi, hp.gamma, Scope::All)?;
    let inner = f.powf(hp.p / q)?.div(w)?;
    let mxi = maximal_field(&inner, &xi, 0.0, Scope::All)?;
    let global = f.powf(hp.p)?.total_integral().powf(hp.gamma / n as f64);
    Ok(sup_ratio(lhs.values(), mxi.values(), global))
}

/// `sup_x (M_ξ v^β)^{1/β}(x) / M_η v(x)` with the Theorem-3 `ξ, η, β`.
pub fn eta_control_check(v: &MeshFn, xi: &YoungFn, eta: &YoungFn, beta: f64) -> Result<f64> {
    let a = maximal_field(&v.powf(beta)?, xi, 0.0, Scope::All)?;
    let b = maximal_field(v, eta, 0.0, Scope::All)?;
    let lhs: Vec<f64> = a.values().iter().map(|x| x.powf(1.0 / beta)).collect();
    Ok(sup_ratio(&lhs, b.values(), 1.0))
}

fn sup_ratio(num: &[f64], den: &[f64], scale: f64) -> f64 {
    let mut worst = 0.0_f64;
    for (a, b) in num.iter().zip(den) {
        let d = b * scale;
        if *a == 0.0 {
            continue;
        }
        worst = worst.max(if d == 0.0 { f64::INFINITY } else { a / d });
    }
    worst
}
