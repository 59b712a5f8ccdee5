//! Empirical Muckenhoupt, reverse Hölder and `A_∞` constants over finite
//! families of shifted dyadic cubes, and refinement-trend classification.

use std::collections::BTreeMap;

use rand::{seq::SliceRandom, Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::descriptor::WeightSpec;
use crate::error::{Error, Result};
use crate::maximal::Scope;
use crate::mesh::{enumerate_cubes, ksum, DomainBox, DyadicCube, MeshFn};

/// Exponents probed by [`classify_weight`].
pub const AP_EXPONENTS: [f64; 4] = [1.5, 2.0, 4.0, 8.0];
pub const RH_EXPONENTS: [f64; 3] = [1.5, 2.0, 4.0];
/// Relative change under refinement below which an estimate counts as stable.
pub const STABLE_CHANGE: f64 = 0.25;
/// Growth factor under refinement above which an estimate counts as divergent.
pub const DIVERGENT_GROWTH: f64 = 2.0;

/// Every cube of the in-scope grids between levels `K - J` and `K`.
pub fn cube_family(w: &MeshFn, scope: Scope) -> Result<Vec<DyadicCube>> {
    let frame = w.frame();
    let mut out = Vec::new();
    for g in scope.grids(w.n()) {
        out.extend(enumerate_cubes(
            w.domain(),
            w.mesh_level(),
            g,
            frame.finest_level(),
            frame.box_level,
        )?);
    }
    Ok(out)
}

fn check_weight(w: &MeshFn, cubes: &[DyadicCube]) -> Result<()> {
    if cubes.is_empty() {
        return Err(Error::EmptySamples);
    }
    if !w.is_positive() {
        return Err(Error::Domain("weight must be strictly positive".into()));
    }
    Ok(())
}

/// Clipped-measure average of `g(w)` over `Q`.
fn avg_of<F: Fn(f64) -> f64>(w: &MeshFn, q: &DyadicCube, g: F) -> Result<f64> {
    let s = w.samples(q)?;
    let m = ksum(s.iter().map(|x| x.1));
    if m == 0.0 {
        return Err(Error::EmptyIntersection);
    }
    Ok(ksum(s.iter().map(|&(v, mu)| g(v) * mu)) / m)
}

fn max_over<F>(cubes: &[DyadicCube], f: F) -> Result<f64>
where
    F: Fn(&DyadicCube) -> Result<f64> + Sync + Send,
{
    cubes
        .par_iter()
        .map(f)
        .try_reduce(|| 0.0, |a, b| Ok(a.max(b)))
}

/// `max_Q ⟨w⟩_Q ⟨w^{1-p'}⟩_Q^{p-1}`.
pub fn ap_constant(w: &MeshFn, p: f64, cubes: &[DyadicCube]) -> Result<f64> {
    if !(p > 1.0) {
        return Err(Error::InvalidParameter(format!("p = {p} must exceed 1")));
    }
    check_weight(w, cubes)?;
    let e = -1.0 / (p - 1.0);
    max_over(cubes, |q| {
        Ok(avg_of(w, q, |x| x)? * avg_of(w, q, |x| x.powf(e))?.powf(p - 1.0))
    })
}

/// `max_Q ⟨w⟩_Q / ess inf_Q w`.
pub fn a1_constant(w: &MeshFn, cubes: &[DyadicCube]) -> Result<f64> {
    check_weight(w, cubes)?;
    max_over(cubes, |q| Ok(avg_of(w, q, |x| x)? / w.essential_inf(q)?))
}

/// `max_Q ⟨w^s⟩_Q^{1/s} / ⟨w⟩_Q`.
pub fn rh_constant(w: &MeshFn, s: f64, cubes: &[DyadicCube]) -> Result<f64> {
    if !(s > 1.0) {
        return Err(Error::InvalidParameter(format!("s = {s} must exceed 1")));
    }
    check_weight(w, cubes)?;
    max_over(cubes, |q| {
        Ok(avg_of(w, q, |x| x.powf(s))?.powf(1.0 / s) / avg_of(w, q, |x| x)?)
    })
}

/// Fitted `(C, ε)` with `w(E)/w(Q) ≤ C (|E|/|Q|)^ε` on every sampled `E ⊆ Q`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AinfPair {
    pub c: f64,
    pub epsilon: f64,
}

/// Measure fraction and weight fraction of sampled subsets of one cube.
fn subset_samples(
    w: &MeshFn,
    q: &DyadicCube,
    subsets: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<(f64, f64)>> {
    let s = w.samples(q)?;
    let total_m = ksum(s.iter().map(|x| x.1));
    let total_w = ksum(s.iter().map(|x| x.0 * x.1));
    let mut out = vec![(1.0, 1.0)];
    if s.len() < 2 {
        return Ok(out);
    }
    let frac = |idx: &[usize]| {
        let m = ksum(idx.iter().map(|&i| s[i].1));
        let wm = ksum(idx.iter().map(|&i| s[i].0 * s[i].1));
        (m / total_m, wm / total_w)
    };

    // random unions of cells with varying density
    let random_count = subsets.saturating_sub(4).max(4);
    for t in 0..random_count {
        let density = (t as f64 + 0.5) / random_count as f64;
        let idx: Vec<usize> = (0..s.len()).filter(|_| rng.gen::<f64>() < density).collect();
        if !idx.is_empty() && idx.len() < s.len() {
            out.push(frac(&idx));
        }
    }
    // a random half by count
    let mut perm: Vec<usize> = (0..s.len()).collect();
    perm.shuffle(rng);
    out.push(frac(&perm[..s.len() / 2]));

    // dyadic sub-cubes
    let finest = w.frame().finest_level();
    if q.level > finest {
        for c in q.children(w.n()) {
            let cs = w.samples(&c)?;
            let m = ksum(cs.iter().map(|x| x.1));
            if m > 0.0 {
                let wm = ksum(cs.iter().map(|x| x.0 * x.1));
                out.push((m / total_m, wm / total_w));
            }
        }
    }

    // sublevel and superlevel sets of w
    let mut order: Vec<usize> = (0..s.len()).collect();
    order.sort_by(|&a, &b| s[a].0.total_cmp(&s[b].0));
    let cuts = [1usize, s.len() / 8, s.len() / 4, s.len() / 2, s.len() - 1];
    for &c in &cuts {
        if c == 0 || c >= s.len() {
            continue;
        }
        out.push(frac(&order[..c]));
        out.push(frac(&order[s.len() - c..]));
    }
    Ok(out)
}

fn cube_seed(seed: u64, idx: usize) -> u64 {
    seed ^ (idx as u64).wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Fits the `A_∞` pair by maximizing `ε ≤ 1` under the cap
/// `C ≤ 10 · max{w(E)/w(Q) : |E|/|Q| = 1/2}`.
pub fn ainf_pair(w: &MeshFn, cubes: &[DyadicCube], subsets_per_cube: usize, seed: u64) -> Result<AinfPair> {
    if subsets_per_cube < 8 {
        return Err(Error::InvalidParameter("need at least 8 subsets per cube".into()));
    }
    check_weight(w, cubes)?;
    let samples: Vec<(f64, f64)> = cubes
        .par_iter()
        .enumerate()
        .map(|(i, q)| {
            let mut rng = ChaCha8Rng::seed_from_u64(cube_seed(seed, i));
            subset_samples(w, q, subsets_per_cube, &mut rng)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    Ok(fit_ainf(&samples))
}

/// The fit used by [`ainf_pair`] on `(|E|/|Q|, w(E)/w(Q))` samples.
pub fn fit_ainf(samples: &[(f64, f64)]) -> AinfPair {
    let half = samples
        .iter()
        .filter(|s| (s.0 - 0.5).abs() < 1e-12)
        .map(|s| s.1)
        .fold(0.0, f64::max);
    let reference = if half > 0.0 {
        half
    } else {
        samples.iter().map(|s| s.1).fold(0.0, f64::max)
    };
    let cap = 10.0 * reference.max(0.5);
    let mut eps = 1.0_f64;
    for &(x, y) in samples {
        if x < 1.0 && x > 0.0 && y > 0.0 {
            eps = eps.min((cap / y).ln() / (1.0 / x).ln());
        }
    }
    let eps = eps.max(0.0);
    let c = samples
        .iter()
        .filter(|s| s.0 > 0.0)
        .map(|&(x, y)| y / x.powf(eps))
        .fold(1.0, f64::max);
    AinfPair { c, epsilon: eps }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Member,
    NonMember,
    Inconclusive,
}

/// Trend rule over the base estimate and its two refinements.
pub fn trend_verdict(base: f64, finer: f64, larger: f64) -> Verdict {
    let stable = |x: f64| x.is_finite() && ((x - base) / base).abs() < STABLE_CHANGE;
    if !base.is_finite() || finer > DIVERGENT_GROWTH * base || larger > DIVERGENT_GROWTH * base {
        Verdict::NonMember
    } else if stable(finer) && stable(larger) {
        Verdict::Member
    } else {
        Verdict::Inconclusive
    }
}

/// Constants at one resolution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightConstants {
    pub box_level: i32,
    pub mesh_level: u32,
    pub cube_count: usize,
    pub ap_constants: BTreeMap<String, f64>,
    pub a1_constant: f64,
    pub ainf_pair: AinfPair,
    pub rh_constants: BTreeMap<String, f64>,
}

pub fn weight_constants(w: &MeshFn, seed: u64) -> Result<WeightConstants> {
    let cubes = cube_family(w, Scope::All)?;
    let mut ap = BTreeMap::new();
    for p in AP_EXPONENTS {
        ap.insert(p.to_string(), ap_constant(w, p, &cubes)?);
    }
    let mut rh = BTreeMap::new();
    for s in RH_EXPONENTS {
        rh.insert(s.to_string(), rh_constant(w, s, &cubes)?);
    }
    Ok(WeightConstants {
        box_level: w.domain().k,
        mesh_level: w.mesh_level(),
        cube_count: cubes.len(),
        ap_constants: ap,
        a1_constant: a1_constant(w, &cubes)?,
        ainf_pair: ainf_pair(w, &cubes, 16, seed)?,
        rh_constants: rh,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightReport {
    pub weight: WeightSpec,
    pub cube_family: String,
    pub ap_constants: BTreeMap<String, f64>,
    pub a1_constant: f64,
    pub ainf_pair: AinfPair,
    pub rh_constants: BTreeMap<String, f64>,
    pub verdicts: BTreeMap<String, Verdict>,
    /// Estimates at `(K, J)`, `(K, J+1)` and `(K+2, J+2)`.
    pub resolutions: Vec<WeightConstants>,
    pub ainf_fit: String,
}

impl WeightReport {
    pub fn verdict(&self, class: &str) -> Verdict {
        self.verdicts.get(class).copied().unwrap_or(Verdict::Inconclusive)
    }
}

/// Classifies `spec` on the centered box of side `2^K` at mesh level `J`.
pub fn classify_weight(spec: &WeightSpec, n: usize, box_level: i32, mesh_level: u32, seed: u64) -> Result<WeightReport> {
    let levels = [
        (box_level, mesh_level),
        (box_level, mesh_level + 1),
        (box_level + 2, mesh_level + 2),
    ];
    let res = levels
        .iter()
        .map(|&(k, j)| weight_constants(&spec.build(&DomainBox::centered(n, k)?, j)?, seed))
        .collect::<Result<Vec<_>>>()?;
    let (b, f, l) = (&res[0], &res[1], &res[2]);
    let mut verdicts = BTreeMap::new();
    let mut ap_verdicts = Vec::new();
    for (key, &base) in &b.ap_constants {
        let v = trend_verdict(base, f.ap_constants[key], l.ap_constants[key]);
        ap_verdicts.push(v);
        verdicts.insert(format!("A_{key}"), v);
    }
    verdicts.insert("A_1".into(), trend_verdict(b.a1_constant, f.a1_constant, l.a1_constant));
    for (key, &base) in &b.rh_constants {
        verdicts.insert(
            format!("RH_{key}"),
            trend_verdict(base, f.rh_constants[key], l.rh_constants[key]),
        );
    }
    let ainf = if ap_verdicts.contains(&Verdict::Member) {
        Verdict::Member
    } else if ap_verdicts.iter().all(|v| *v == Verdict::NonMember) {
        Verdict::NonMember
    } else {
        Verdict::Inconclusive
    };
    verdicts.insert("A_inf".into(), ainf);
    Ok(WeightReport {
        weight: spec.clone(),
        cube_family: format!(
            "all {} shifted grids, levels [{}, {}], centered box of side 2^{}",
            3usize.pow(n as u32),
            box_level - mesh_level as i32,
            box_level,
            box_level
        ),
        ap_constants: b.ap_constants.clone(),
        a1_constant: b.a1_constant,
        ainf_pair: b.ainf_pair,
        rh_constants: b.rh_constants.clone(),
        verdicts,
        resolutions: res,
        ainf_fit: "maximize epsilon <= 1 subject to C <= 10 * max w(E)/w(Q) at |E|/|Q| = 1/2".into(),
    })
}
