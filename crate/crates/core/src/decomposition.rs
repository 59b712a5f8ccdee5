//! Level-set Calderón–Zygmund decomposition of `g = f·v`, its stratification
//! by averages of `v^r`, principal cubes, and numeric checks of the sparsity,
//! decay and pointwise claims used by the mixed weak-type argument.
//!
//! Everything lives on a single dyadic grid. Cubes of `Ω_k` are indexed by the
//! pair `(cube, k)`: the same dyadic cube may be maximal for several `k`.

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::luxemburg::{lux_norm, lux_norm_samples};
use crate::maximal::{maximal_field, GridTable, Scope};
use crate::mesh::{DyadicCube, Frame, MeshFn};
use crate::weights::{a1_constant, cube_family};
use crate::young::YoungFn;

pub const DEFAULT_A: f64 = 2.0;
/// Relative slack of the sandwich checks.
pub const SANDWICH_RTOL: f64 = 1e-9;

/// `a^{k r}`.
#[inline]
pub fn height(a: f64, k: i32, r: f64) -> f64 {
    a.powf(k as f64 * r)
}

fn lux_table(g: &MeshFn, phi: &YoungFn, grid_id: u32) -> Result<GridTable> {
    let frame = g.frame();
    GridTable::build(frame, grid_id, frame.finest_level(), frame.box_level, |q| {
        Ok(lux_norm_samples(&g.samples(q)?, phi)?.norm)
    })
}

fn average_table(h: &MeshFn, grid_id: u32) -> Result<GridTable> {
    let frame = h.frame();
    GridTable::build(frame, grid_id, frame.finest_level(), frame.box_level, |q| h.average(q))
}

/// Maximal cubes below `root` (exclusive) whose table value exceeds `lambda`.
fn select_below(table: &GridTable, n: usize, finest: i32, root: &DyadicCube, lambda: f64, out: &mut Vec<(DyadicCube, f64)>) {
    if root.level <= finest {
        return;
    }
    for c in root.children(n) {
        if let Some(v) = table.get(&c) {
            if v > lambda {
                out.push((c, v));
            } else {
                select_below(table, n, finest, &c, lambda, out);
            }
        }
    }
}

/// Maximal cubes of a grid table with value above `lambda`.
fn select_maximal(table: &GridTable, frame: &Frame, lambda: f64) -> Vec<(DyadicCube, f64)> {
    let mut out = Vec::new();
    for (q, v) in table.level_entries(frame.box_level) {
        if v > lambda {
            out.push((q, v));
        } else {
            select_below(table, frame.n, frame.finest_level(), &q, lambda, &mut out);
        }
    }
    out
}

/// Maximal cubes of grid `grid_id` with `‖g‖_{Φ,Q} > λ`.
pub fn cz_levelset(g: &MeshFn, phi: &YoungFn, grid_id: u32, lambda: f64) -> Result<Vec<DyadicCube>> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidParameter(format!("lambda = {lambda} must be positive")));
    }
    let table = lux_table(g, phi, grid_id)?;
    Ok(select_maximal(&table, g.frame(), lambda).into_iter().map(|x| x.0).collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubCube {
    pub cube: DyadicCube,
    pub vr_avg: f64,
    pub gamma: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StratCube {
    pub cube: DyadicCube,
    pub norm: f64,
    pub vr_avg: f64,
    /// `ℓ ≥ 0`, or `-1` when the `v^r` average is below `a^{kr}`.
    pub class: i32,
    /// Meets `{a^k < v ≤ a^{k+1}}` in positive measure; only meaningful for `class ≥ 0`.
    pub gamma: bool,
    pub subcubes: Vec<SubCube>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Level {
    pub k: i32,
    pub cubes: Vec<StratCube>,
    /// Cells of `E_k = {M g / v > 1} ∩ {a^k < v ≤ a^{k+1}}`.
    pub e_cells: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stratification {
    pub a: f64,
    pub r: f64,
    pub grid_id: u32,
    pub n: usize,
    pub phi: YoungFn,
    /// Lowest stratum actually used.
    pub lowest: i32,
    pub requested_lowest: Option<i32>,
    pub k_max: i32,
    pub levels: Vec<Level>,
    /// `u v^r`-free count of cells of `{M g / v > 1}` with `v ≤ a^{lowest}`.
    pub truncated_cells: usize,
}

/// Builds the stratification of `g = f·v` on one grid.
///
/// The lowest level is raised, if needed, to the smallest `k` with `a^k` at
/// least the minimum of `M_D g`, so that no level set covers the whole box.
pub fn stratify(
    f: &MeshFn,
    v: &MeshFn,
    r: f64,
    phi: &YoungFn,
    a: f64,
    lowest: Option<i32>,
    grid_id: u32,
) -> Result<Stratification> {
    if !v.is_positive() {
        return Err(Error::Domain("v must be strictly positive".into()));
    }
    if !(a > 1.0) || !a.is_finite() {
        return Err(Error::InvalidParameter(format!("a = {a} must exceed 1")));
    }
    if r < 1.0 {
        return Err(Error::InvalidParameter(format!("r = {r} < 1")));
    }
    let frame = f.frame().clone();
    frame.check_grid(grid_id)?;
    let n = f.n();
    let g = f.mul(v)?;
    let vr = v.powf(r)?;
    let norms = lux_table(&g, phi, grid_id)?;
    let vr_avgs = average_table(&vr, grid_id)?;
    let mg: Vec<f64> = (0..g.len()).map(|i| norms.max_at_cell(i)).collect();
    let max_m = mg.iter().copied().fold(0.0, f64::max);
    let min_m = mg.iter().copied().fold(f64::INFINITY, f64::min);

    let mut strat = Stratification {
        a,
        r,
        grid_id,
        n,
        phi: phi.clone(),
        lowest: lowest.unwrap_or(0),
        requested_lowest: lowest,
        k_max: lowest.unwrap_or(0) - 1,
        levels: vec![],
        truncated_cells: 0,
    };
    if max_m == 0.0 {
        return Ok(strat);
    }
    let floor_value = if min_m > 0.0 {
        min_m
    } else {
        // some cell sees only zero cubes; start just below the smallest positive norm
        let mut smallest = f64::INFINITY;
        for k in norms.levels().collect::<Vec<_>>() {
            for (_, x) in norms.level_entries(k) {
                if x > 0.0 {
                    smallest = smallest.min(x);
                }
            }
        }
        smallest / a
    };
    let mut auto = (floor_value.ln() / a.ln()).floor() as i32 - 1;
    while height(a, auto, 1.0) < floor_value {
        auto += 1;
    }
    let low = lowest.map_or(auto, |l| l.max(auto));
    let mut k_max = (max_m.ln() / a.ln()).ceil() as i32 + 1;
    while height(a, k_max, 1.0) >= max_m {
        k_max -= 1;
    }
    strat.lowest = low;
    strat.k_max = k_max;

    let vals = v.values();
    for k in low..=k_max {
        let lam = height(a, k, 1.0);
        let band = |x: f64| lam < x && x <= height(a, k + 1, 1.0);
        let meets_band = |q: &DyadicCube| -> Result<bool> {
            Ok(frame.overlaps(q)?.iter().any(|&(i, _)| band(vals[i])))
        };
        let mut cubes = Vec::new();
        for (q, norm) in select_maximal(&norms, &frame, lam) {
            let vr_avg = vr_avgs.get(&q).expect("selected cubes lie in the table");
            let mut class = -1;
            if vr_avg >= height(a, k, r) {
                class = 0;
                while height(a, k + class + 1, r) <= vr_avg {
                    class += 1;
                }
            }
            let mut subcubes = Vec::new();
            if class == -1 {
                let mut found = Vec::new();
                select_below(&vr_avgs, n, frame.finest_level(), &q, height(a, k, r), &mut found);
                for (c, avg) in found {
                    subcubes.push(SubCube {
                        cube: c,
                        vr_avg: avg,
                        gamma: meets_band(&c)?,
                    });
                }
            }
            cubes.push(StratCube {
                cube: q,
                norm,
                vr_avg,
                class,
                gamma: class >= 0 && meets_band(&q)?,
                subcubes,
            });
        }
        let e_cells = (0..g.len()).filter(|&i| mg[i] > vals[i] && band(vals[i])).collect();
        strat.levels.push(Level { k, cubes, e_cells });
    }
    strat.truncated_cells = (0..g.len())
        .filter(|&i| mg[i] > vals[i] && vals[i] <= height(a, low, 1.0))
        .count();
    Ok(strat)
}

/// Result of recomputing every invariant of a stratification.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StratificationCheck {
    pub cubes: usize,
    pub subcubes: usize,
    pub sandwich_violations: usize,
    pub vr_sandwich_violations: usize,
    pub class_violations: usize,
    pub cover_violations: usize,
    pub disjoint_violations: usize,
    pub nesting_violations: usize,
    /// Largest `‖g‖_Q / (2ⁿ a^k)` seen.
    pub worst_upper: f64,
    /// Smallest `‖g‖_Q / a^k` seen.
    pub worst_lower: f64,
}

impl StratificationCheck {
    pub fn ok(&self) -> bool {
        self.sandwich_violations == 0
            && self.vr_sandwich_violations == 0
            && self.class_violations == 0
            && self.cover_violations == 0
            && self.disjoint_violations == 0
            && self.nesting_violations == 0
    }
}

impl Stratification {
    /// `(cube, k)` pairs of the Γ-type family: `Ω_k` cubes of class `ℓ ≥ 0`
    /// and every CZ sub-cube.
    fn produced(&self) -> Vec<(DyadicCube, i32)> {
        let mut out = Vec::new();
        for l in &self.levels {
            for c in &l.cubes {
                if c.class >= 0 {
                    out.push((c.cube, l.k));
                }
                out.extend(c.subcubes.iter().map(|s| (s.cube, l.k)));
            }
        }
        out
    }

    /// Distinct cubes of `Γ = ⋃ Γ_{ℓ,k}` with the smallest `k` at which each occurs.
    pub fn gamma_cubes(&self) -> Vec<(DyadicCube, i32)> {
        let mut seen: BTreeMap<DyadicCube, i32> = BTreeMap::new();
        for l in &self.levels {
            for c in &l.cubes {
                if c.gamma {
                    seen.entry(c.cube).or_insert(l.k);
                }
                for s in c.subcubes.iter().filter(|s| s.gamma) {
                    seen.entry(s.cube).or_insert(l.k);
                }
            }
        }
        seen.into_iter().collect()
    }

    /// Recomputes norms, averages and level sets from scratch and checks them.
    pub fn verify(&self, f: &MeshFn, v: &MeshFn) -> Result<StratificationCheck> {
        let g = f.mul(v)?;
        let vr = v.powf(self.r)?;
        let frame = f.frame();
        let two_n = 2f64.powi(self.n as i32);
        let mut chk = StratificationCheck {
            worst_upper: 0.0,
            worst_lower: f64::INFINITY,
            ..Default::default()
        };
        let mg = maximal_field(&g, &self.phi, 0.0, Scope::Grid(self.grid_id))?;
        for l in &self.levels {
            let lam = height(self.a, l.k, 1.0);
            let lam_r = height(self.a, l.k, self.r);
            let mut covered = vec![false; f.len()];
            for c in &l.cubes {
                chk.cubes += 1;
                let norm = lux_norm(&g, &c.cube, &self.phi)?.norm;
                chk.worst_upper = chk.worst_upper.max(norm / (two_n * lam));
                chk.worst_lower = chk.worst_lower.min(norm / lam);
                if !(norm > lam * (1.0 - SANDWICH_RTOL) && norm <= two_n * lam * (1.0 + SANDWICH_RTOL)) {
                    chk.sandwich_violations += 1;
                }
                let avg = vr.average(&c.cube)?;
                let expected = if avg < lam_r {
                    -1
                } else {
                    let mut l2 = 0;
                    while height(self.a, l.k + l2 + 1, self.r) <= avg {
                        l2 += 1;
                    }
                    l2
                };
                if expected != c.class {
                    chk.class_violations += 1;
                }
                for s in &c.subcubes {
                    chk.subcubes += 1;
                    let avg = vr.average(&s.cube)?;
                    if !(avg > lam_r * (1.0 - SANDWICH_RTOL) && avg <= two_n * lam_r * (1.0 + SANDWICH_RTOL))
                        || !c.cube.strictly_contains(&s.cube)
                    {
                        chk.vr_sandwich_violations += 1;
                    }
                }
                for i in frame.cells_with_centers(&c.cube)? {
                    if covered[i] {
                        chk.disjoint_violations += 1;
                    }
                    covered[i] = true;
                }
            }
            for (i, cov) in covered.iter().enumerate() {
                if *cov != (mg.values()[i] > lam) {
                    chk.cover_violations += 1;
                }
            }
        }
        chk.nesting_violations = self.nesting_violations();
        if chk.cubes == 0 {
            chk.worst_lower = 0.0;
        }
        Ok(chk)
    }

    /// Pairs of the Γ-type family with `Q_k ⊊ Q_t` but `k ≤ t`.
    pub fn nesting_violations(&self) -> usize {
        let items = self.produced();
        let mut by_cube: HashMap<DyadicCube, Vec<i32>> = HashMap::new();
        for (q, k) in &items {
            by_cube.entry(*q).or_default().push(*k);
        }
        let top = self.levels_top();
        let mut bad = 0;
        for (q, k) in &items {
            let mut anc = *q;
            while anc.level < top {
                anc = anc.parent();
                if let Some(ts) = by_cube.get(&anc) {
                    bad += ts.iter().filter(|&&t| *k <= t).count();
                }
            }
        }
        bad
    }

    fn levels_top(&self) -> i32 {
        self.levels
            .iter()
            .flat_map(|l| l.cubes.iter().map(|c| c.cube.level))
            .max()
            .unwrap_or(i32::MIN)
    }

    /// JSON cube tree: one record per produced cube.
    pub fn export_json(&self, frame: &Frame) -> Result<serde_json::Value> {
        let mut records = Vec::new();
        let mut id = 0usize;
        for l in &self.levels {
            for c in &l.cubes {
                let parent_id = id;
                records.push(json!({
                    "id": id, "k": l.k, "grid": c.cube.grid_id, "level": c.cube.level,
                    "coords": &c.cube.coords[..self.n], "class": c.class, "gamma": c.gamma,
                    "parent": null, "norm": c.norm, "vr_avg": c.vr_avg,
                    "measure": frame.clipped_measure(&c.cube)?,
                }));
                id += 1;
                for s in &c.subcubes {
                    records.push(json!({
                        "id": id, "k": l.k, "grid": s.cube.grid_id, "level": s.cube.level,
                        "coords": &s.cube.coords[..self.n], "class": -1, "gamma": s.gamma,
                        "parent": parent_id, "vr_avg": s.vr_avg,
                        "measure": frame.clipped_measure(&s.cube)?,
                    }));
                    id += 1;
                }
            }
        }
        Ok(json!({
            "a": self.a, "r": self.r, "grid": self.grid_id, "lowest": self.lowest,
            "k_max": self.k_max, "truncated_cells": self.truncated_cells, "cubes": records,
        }))
    }
}

/// `max_{Q ∈ Γ} |⋃_{Q' ∈ Γ, Q' ⊊ Q} Q'| / |Q|`.
pub fn sparsity_check(strat: &Stratification, frame: &Frame) -> Result<f64> {
    let gamma: Vec<DyadicCube> = strat.gamma_cubes().into_iter().map(|x| x.0).collect();
    let set: HashSet<DyadicCube> = gamma.iter().copied().collect();
    let top = gamma.iter().map(|q| q.level).max().unwrap_or(i32::MIN);
    let mut inside: HashMap<DyadicCube, Vec<DyadicCube>> = HashMap::new();
    for q in &gamma {
        let mut anc = *q;
        while anc.level < top {
            anc = anc.parent();
            if set.contains(&anc) {
                inside.entry(anc).or_default().push(*q);
            }
        }
    }
    let mut worst = 0.0_f64;
    for (outer, mut subs) in inside {
        subs.sort_by_key(|q| std::cmp::Reverse(q.level));
        let mut kept: Vec<DyadicCube> = Vec::new();
        for s in subs {
            if !kept.iter().any(|k| k.contains(&s)) {
                kept.push(s);
            }
        }
        let union: f64 = kept
            .iter()
            .map(|q| frame.clipped_measure(q))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .sum();
        worst = worst.max(union / frame.clipped_measure(&outer)?);
    }
    Ok(worst)
}

/// `2ⁿ / (a - 1)`.
pub fn sparsity_bound(n: usize, a: f64) -> f64 {
    2f64.powi(n as i32) / (a - 1.0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForestNode {
    pub cube: DyadicCube,
    pub k: i32,
    /// Ω-cube containing a sub-cube (class `-1` only).
    pub outer: Option<DyadicCube>,
    pub parent: Option<usize>,
    pub principal: bool,
    /// Smallest principal node containing this one (itself if principal).
    pub principal_ancestor: usize,
    pub u_avg: f64,
    pub u_mass: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassForest {
    pub class: i32,
    pub nodes: Vec<ForestNode>,
}

impl ClassForest {
    pub fn principal(&self) -> impl Iterator<Item = &ForestNode> {
        self.nodes.iter().filter(|n| n.principal)
    }
}

#[derive(Clone, Debug)]
pub struct PrincipalForest {
    pub grid_id: u32,
    pub beta: f64,
    pub a: f64,
    pub r: f64,
    pub classes: Vec<ClassForest>,
    /// `h₁` per class `ℓ ≥ 0`.
    pub h1: BTreeMap<i32, MeshFn>,
    pub h2: MeshFn,
}

fn growth_factor(class: i32, beta: f64, a: f64, r: f64, k: i32, t: i32) -> f64 {
    if class >= 0 {
        2.0
    } else {
        a.powf((k - t) as f64 * beta * r)
    }
}

/// Builds one class forest from `(cube, k, outer)` items.
fn build_class(
    class: i32,
    mut items: Vec<(DyadicCube, i32, Option<DyadicCube>)>,
    u: &MeshFn,
    beta: f64,
    a: f64,
    r: f64,
) -> Result<ClassForest> {
    items.sort_by(|x, y| y.0.level.cmp(&x.0.level).then(x.1.cmp(&y.1)).then(x.0.cmp(&y.0)));
    items.dedup();
    let mut nodes: Vec<ForestNode> = Vec::with_capacity(items.len());
    let mut latest: HashMap<DyadicCube, usize> = HashMap::new();
    for (cube, k, outer) in items {
        // nearest earlier node whose cube contains this one
        let mut parent = latest.get(&cube).copied();
        if parent.is_none() {
            let mut anc = cube;
            while parent.is_none() && anc.level < u.frame().box_level {
                anc = anc.parent();
                parent = latest.get(&anc).copied();
            }
        }
        let u_mass = u.integrate(&cube)?;
        let u_avg = u_mass / u.frame().clipped_measure(&cube)?;
        let idx = nodes.len();
        let (principal, principal_ancestor) = match parent {
            None => (true, idx),
            Some(p) => {
                let s = nodes[p].principal_ancestor;
                let factor = growth_factor(class, beta, a, r, k, nodes[s].k);
                if u_avg > factor * nodes[s].u_avg {
                    (true, idx)
                } else {
                    (false, s)
                }
            }
        };
        nodes.push(ForestNode {
            cube,
            k,
            outer,
            parent,
            principal,
            principal_ancestor,
            u_avg,
            u_mass,
        });
        latest.insert(cube, idx);
    }
    Ok(ClassForest { class, nodes })
}

/// Principal cubes of every class; `0 < β < ε` with `ε` the fitted `A_∞`
/// exponent of `v^r`.
pub fn principal_cubes(strat: &Stratification, u: &MeshFn, beta: f64, epsilon: f64) -> Result<PrincipalForest> {
    if !(beta > 0.0 && beta < epsilon) {
        return Err(Error::InvalidParameter(format!(
            "beta = {beta} must lie in (0, epsilon = {epsilon})"
        )));
    }
    if !u.is_positive() {
        return Err(Error::Domain("u must be strictly positive".into()));
    }
    let mut by_class: BTreeMap<i32, Vec<(DyadicCube, i32, Option<DyadicCube>)>> = BTreeMap::new();
    for l in &strat.levels {
        for c in &l.cubes {
            if c.class >= 0 && c.gamma {
                by_class.entry(c.class).or_default().push((c.cube, l.k, None));
            }
            for s in c.subcubes.iter().filter(|s| s.gamma) {
                by_class.entry(-1).or_default().push((s.cube, l.k, Some(c.cube)));
            }
        }
    }
    let frame = u.frame();
    let mut classes = Vec::new();
    let mut h1 = BTreeMap::new();
    let mut h2 = vec![0.0; u.len()];
    for (class, items) in by_class {
        let forest = build_class(class, items, u, beta, strat.a, strat.r)?;
        if class >= 0 {
            let mut h = vec![0.0; u.len()];
            for node in forest.principal() {
                for i in frame.cells_with_centers(&node.cube)? {
                    h[i] += node.u_avg;
                }
            }
            h1.insert(class, MeshFn::new(u.domain().clone(), u.mesh_level(), h)?);
        } else {
            for node in forest.principal() {
                let outer = node.outer.expect("sub-cubes carry their outer cube");
                let value = node.u_mass / frame.clipped_measure(&outer)?;
                for i in frame.cells_with_centers(&outer)? {
                    h2[i] += value;
                }
            }
        }
        classes.push(forest);
    }
    Ok(PrincipalForest {
        grid_id: strat.grid_id,
        beta,
        a: strat.a,
        r: strat.r,
        classes,
        h1,
        h2: MeshFn::new(u.domain().clone(), u.mesh_level(), h2)?,
    })
}

/// Outcome of re-verifying the defining conditions of a forest.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ForestCheck {
    pub principal: usize,
    pub nodes: usize,
    pub growth_violations: usize,
    pub stopping_violations: usize,
    pub assignment_violations: usize,
    pub max_chain: usize,
    pub chain_bound: f64,
}

impl ForestCheck {
    pub fn ok(&self) -> bool {
        self.growth_violations == 0
            && self.stopping_violations == 0
            && self.assignment_violations == 0
            && (self.max_chain as f64) <= self.chain_bound
    }
}

impl PrincipalForest {
    /// Re-checks growth and stopping conditions and the chain-length bound.
    pub fn verify(&self, u: &MeshFn) -> Result<ForestCheck> {
        let mut chk = ForestCheck::default();
        let mut min_root_avg = f64::INFINITY;
        let frame = u.frame();
        let mut chain = vec![0usize; u.len()];
        for forest in &self.classes {
            let mut class_chain = vec![0usize; u.len()];
            for (idx, node) in forest.nodes.iter().enumerate() {
                chk.nodes += 1;
                let s = &forest.nodes[node.principal_ancestor];
                // the assigned principal cube is the smallest principal ancestor
                let mut walk = node.parent;
                let mut nearest = None;
                while let Some(p) = walk {
                    if forest.nodes[p].principal {
                        nearest = Some(p);
                        break;
                    }
                    walk = forest.nodes[p].parent;
                }
                if node.principal {
                    chk.principal += 1;
                    if node.principal_ancestor != idx {
                        chk.assignment_violations += 1;
                    }
                    match nearest {
                        None => min_root_avg = min_root_avg.min(node.u_avg),
                        Some(p) => {
                            let t = &forest.nodes[p];
                            let factor = growth_factor(forest.class, self.beta, self.a, self.r, node.k, t.k);
                            if !(node.u_avg > factor * t.u_avg) {
                                chk.growth_violations += 1;
                            }
                        }
                    }
                    if forest.class >= 0 {
                        for i in frame.cells_with_centers(&node.cube)? {
                            class_chain[i] += 1;
                        }
                    }
                } else {
                    if nearest != Some(node.principal_ancestor) {
                        chk.assignment_violations += 1;
                    }
                    let factor = growth_factor(forest.class, self.beta, self.a, self.r, node.k, s.k);
                    if node.u_avg > factor * s.u_avg {
                        chk.stopping_violations += 1;
                    }
                }
            }
            for (c, x) in chain.iter_mut().zip(class_chain) {
                *c = (*c).max(x);
            }
        }
        chk.max_chain = chain.into_iter().max().unwrap_or(0);
        chk.chain_bound = if min_root_avg.is_finite() {
            let cubes = cube_family(u, Scope::Grid(self.grid_id))?;
            let a1 = a1_constant(u, &cubes)?;
            (a1 * u.max() / min_root_avg).log2() + 2.0
        } else {
            0.0
        };
        Ok(chk)
    }
}

/// Log-linear fit of the decay of `u(E_k ∩ Q)/u(Q)` in `ℓ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub c1: f64,
    pub c2: f64,
    /// Largest `|log y_ℓ - log fit(ℓ)|` over the fitted points.
    pub residual: f64,
    /// `(ℓ, max ratio)` per class.
    pub points: Vec<(i32, f64)>,
    pub degraded: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClaimsReport {
    /// `max a^{kr} |Q| / ∫_Q Φ(f) v^r` over `Γ_{ℓ,k}`, `ℓ ≥ 0`.
    pub claim1: f64,
    /// `max_x h₁(x)/u(x)` over all classes.
    pub claim2: f64,
    /// Proof bound `2 [u]_{A₁}` for `h₁/u`.
    pub claim2_bound: f64,
    /// Same ratio as `claim1` over `Λ_{-1,k}`.
    pub claim3: f64,
    /// `max_x h₂(x)/u(x)`.
    pub claim4: f64,
    pub decay: DecayFit,
    pub u_a1: f64,
}

impl ClaimsReport {
    pub fn finite(&self) -> bool {
        [self.claim1, self.claim2, self.claim3, self.claim4]
            .iter()
            .all(|x| x.is_finite())
    }
}

fn fit_decay(points: &[(i32, f64)], r: f64) -> DecayFit {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.1 > 0.0)
        .map(|&(l, y)| (l as f64 * r, y.ln()))
        .collect();
    let (c1, c2, residual) = match pts.len() {
        0 => (0.0, 0.0, 0.0),
        1 => (pts[0].1.exp(), 0.0, 0.0),
        m => {
            let mf = m as f64;
            let mx = pts.iter().map(|p| p.0).sum::<f64>() / mf;
            let my = pts.iter().map(|p| p.1).sum::<f64>() / mf;
            let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
            let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
            let slope = sxy / sxx;
            let intercept = my - slope * mx;
            let res = pts
                .iter()
                .map(|p| (p.1 - intercept - slope * p.0).abs())
                .fold(0.0, f64::max);
            (intercept.exp(), -slope, res)
        }
    };
    DecayFit {
        c1,
        c2,
        residual,
        points: points.to_vec(),
        degraded: c2 < 0.0 || residual >= 1.0,
    }
}

/// Empirical constants of the four claims and the decay lemma.
pub fn claims_check(
    strat: &Stratification,
    forest: &PrincipalForest,
    u: &MeshFn,
    v: &MeshFn,
    f: &MeshFn,
) -> Result<ClaimsReport> {
    let vr = v.powf(strat.r)?;
    let phif_vr = f.apply_young(&strat.phi)?.mul(&vr)?;
    let frame = u.frame();
    let ratio = |q: &DyadicCube, k: i32| -> Result<f64> {
        let num = height(strat.a, k, strat.r) * frame.clipped_measure(q)?;
        let den = phif_vr.integrate(q)?;
        Ok(if den == 0.0 { f64::INFINITY } else { num / den })
    };
    let mut claim1 = 0.0_f64;
    let mut claim3 = 0.0_f64;
    let mut per_class: BTreeMap<i32, f64> = BTreeMap::new();
    for l in &strat.levels {
        let e: HashSet<usize> = l.e_cells.iter().copied().collect();
        for c in &l.cubes {
            if c.class >= 0 && c.gamma {
                claim1 = claim1.max(ratio(&c.cube, l.k)?);
                let ue: f64 = frame
                    .overlaps(&c.cube)?
                    .iter()
                    .filter(|(i, _)| e.contains(i))
                    .map(|&(i, fr)| u.values()[i] * fr * frame.cell_volume())
                    .sum();
                let y = ue / u.integrate(&c.cube)?;
                let slot = per_class.entry(c.class).or_insert(0.0);
                *slot = slot.max(y);
            } else if c.class == -1 {
                claim3 = claim3.max(ratio(&c.cube, l.k)?);
            }
        }
    }
    let sup_over_u = |h: &MeshFn| {
        h.values()
            .iter()
            .zip(u.values())
            .map(|(a, b)| a / b)
            .fold(0.0, f64::max)
    };
    let claim2 = forest.h1.values().map(sup_over_u).fold(0.0, f64::max);
    let claim4 = sup_over_u(&forest.h2);
    let u_a1 = a1_constant(u, &cube_family(u, Scope::Grid(strat.grid_id))?)?;
    let points: Vec<(i32, f64)> = per_class.into_iter().collect();
    Ok(ClaimsReport {
        claim1,
        claim2,
        claim2_bound: 2.0 * u_a1,
        claim3,
        claim4,
        decay: fit_decay(&points, strat.r),
        u_a1,
    })
}
