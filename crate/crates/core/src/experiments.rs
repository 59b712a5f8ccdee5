//! End-to-end sweeps of the mixed weak-type inequalities: both sides of each
//! inequality on a geometric `t` grid, supremum ratios, and stability of the
//! ratio under mesh and box refinement.

use std::collections::BTreeMap;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::descriptor::{FnSpec, WeightSpec};
use crate::error::{Error, Result};
use crate::maximal::{maximal_field, Scope};
use crate::mesh::{ksum, DomainBox, MeshFn};
use crate::weights::{classify_weight, Verdict, WeightReport};
use crate::young::{
    certify_fr, check_equivalence, conjugate_reciprocal, thm3_params, thm4_params, FrCertificate, YoungFn,
};

/// Largest relative change of `sup_ratio` accepted under refinement.
pub const REFINEMENT_TOLERANCE: f64 = 0.25;
/// Multipliers tried for the corollary's inner constant.
pub const C2_CANDIDATES: [f64; 4] = [1.0, 2.0, 4.0, 8.0];
/// Slack of the `L^∞` contraction precheck.
pub const LINF_SLACK: f64 = 1e-8;

/// Geometric grid of thresholds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TSweep {
    pub t_min: f64,
    pub t_max: f64,
    pub count: usize,
}

impl TSweep {
    pub fn new(t_min: f64, t_max: f64, count: usize) -> Result<Self> {
        if !(t_min > 0.0 && t_min.is_finite() && t_max.is_finite()) || (count > 1 && !(t_max > t_min)) {
            return Err(Error::InvalidParameter(format!(
                "sweep needs 0 < t_min < t_max (got {t_min}, {t_max})"
            )));
        }
        Ok(Self { t_min, t_max, count })
    }

    pub fn points(&self) -> Vec<f64> {
        match self.count {
            0 => vec![],
            1 => vec![self.t_min],
            m => {
                let ratio = (self.t_max / self.t_min).ln();
                (0..m)
                    .map(|i| self.t_min * (ratio * i as f64 / (m - 1) as f64).exp())
                    .collect()
            }
        }
    }
}

/// Sweep bounds, relative to `max f` unless `relative` is false.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    #[serde(default = "default_lo")]
    pub lo: f64,
    #[serde(default = "default_hi")]
    pub hi: f64,
    #[serde(default = "default_count")]
    pub count: usize,
    #[serde(default = "default_relative")]
    pub relative: bool,
}

fn default_lo() -> f64 {
    1e-3
}
fn default_hi() -> f64 {
    1e3
}
fn default_count() -> usize {
    48
}
fn default_relative() -> bool {
    true
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            lo: default_lo(),
            hi: default_hi(),
            count: default_count(),
            relative: true,
        }
    }
}

impl SweepSpec {
    pub fn resolve(&self, f_max: f64) -> Result<TSweep> {
        let scale = if self.relative && f_max > 0.0 { f_max } else { 1.0 };
        TSweep::new(self.lo * scale, self.hi * scale, self.count)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Variant {
    Theorem1,
    StrongForm,
    Corollary { psi: YoungFn },
    /// Strong form with `Φ(t) = t`.
    Sawyer,
    /// `Φ(t) = t^r (1 + log⁺ t)^δ`.
    #[serde(rename = "theorem3")]
    Theorem3 { delta: f64, gamma: f64, p: f64 },
    #[serde(rename = "theorem4")]
    Theorem4 { delta: f64, gamma: f64 },
    /// Weak-to-restricted modular step for the quotient operator of `ψ`.
    ModularLemma { psi: YoungFn },
}

impl Variant {
    pub fn name(&self) -> &'static str {
        match self {
            Variant::Theorem1 => "theorem1",
            Variant::StrongForm => "strong_form",
            Variant::Corollary { .. } => "corollary",
            Variant::Sawyer => "sawyer",
            Variant::Theorem3 { .. } => "theorem3",
            Variant::Theorem4 { .. } => "theorem4",
            Variant::ModularLemma { .. } => "modular_lemma",
        }
    }
}

/// One experiment materialized on a mesh.
#[derive(Clone, Debug)]
pub struct MixedExperiment {
    pub u: MeshFn,
    pub v: MeshFn,
    pub f: MeshFn,
    pub r: f64,
    pub phi: YoungFn,
    pub sweep: TSweep,
    pub variant: Variant,
    pub scope: Scope,
}

impl MixedExperiment {
    pub fn new(u: MeshFn, v: MeshFn, f: MeshFn, r: f64, phi: YoungFn, sweep: TSweep, variant: Variant) -> Result<Self> {
        u.same_mesh(&v)?;
        u.same_mesh(&f)?;
        if !u.is_positive() || !v.is_positive() {
            return Err(Error::Domain("weights must be strictly positive".into()));
        }
        if r < 1.0 {
            return Err(Error::InvalidParameter(format!("r = {r} < 1")));
        }
        phi.validate()?;
        Ok(Self {
            u,
            v,
            f,
            r,
            phi,
            sweep,
            variant,
            scope: Scope::All,
        })
    }

    pub fn with_scope(mut self, scope: Scope) -> Self {
        self.scope = scope;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioRow {
    pub t: f64,
    pub lhs: f64,
    pub rhs: f64,
    /// Absent when both sides vanish.
    pub ratio: Option<f64>,
    pub clamped: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioReport {
    pub variant: String,
    pub mesh: [i64; 3],
    pub rows: Vec<RatioRow>,
    pub sup_ratio: f64,
    pub refinement_deltas: BTreeMap<String, f64>,
    pub ceiling: Option<f64>,
    pub constants: BTreeMap<String, f64>,
    pub pass: bool,
    pub notes: Vec<String>,
}

impl RatioReport {
    fn from_rows(exp: &MixedExperiment, rows: Vec<RatioRow>) -> Self {
        let sup_ratio = rows.iter().filter_map(|r| r.ratio).fold(0.0, f64::max);
        let mut notes = Vec::new();
        let lhs_mono = rows.windows(2).all(|w| w[1].lhs <= w[0].lhs);
        let rhs_mono = rows.windows(2).all(|w| w[1].rhs <= w[0].rhs);
        if !lhs_mono {
            notes.push("lhs not nonincreasing in t".into());
        }
        if !rhs_mono {
            notes.push("rhs not nonincreasing in t".into());
        }
        if rows.iter().any(|r| r.rhs == 0.0 && r.lhs > 0.0) {
            notes.push("positive lhs against zero rhs".into());
        }
        if rows.iter().any(|r| r.clamped) {
            notes.push("rhs clamped to the largest finite value on some rows".into());
        }
        let f = exp.f.frame();
        RatioReport {
            variant: exp.variant.name().into(),
            mesh: [f.n as i64, f.box_level as i64, f.mesh_level as i64],
            pass: sup_ratio.is_finite() && lhs_mono && rhs_mono,
            rows,
            sup_ratio,
            refinement_deltas: BTreeMap::new(),
            ceiling: None,
            constants: BTreeMap::new(),
            notes,
        }
    }

    /// Recomputes `pass` from the sweep, the ceiling and the refinement deltas.
    pub fn finalize(&mut self, ceiling: Option<f64>) {
        self.ceiling = ceiling;
        if let Some(c) = ceiling {
            if self.sup_ratio > c {
                self.pass = false;
                self.notes.push(format!("sup ratio {} above ceiling {c}", self.sup_ratio));
            }
        }
        for (key, d) in &self.refinement_deltas {
            if !(*d < REFINEMENT_TOLERANCE) {
                self.pass = false;
                self.notes.push(format!("refinement {key} changes the sup ratio by {d}"));
            }
        }
    }

    /// `t,lhs,rhs,ratio,clamped`; missing ratios are empty fields.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["t", "lhs", "rhs", "ratio", "clamped"])?;
        for r in &self.rows {
            out.write_record([
                r.t.to_string(),
                r.lhs.to_string(),
                r.rhs.to_string(),
                r.ratio.map(|x| x.to_string()).unwrap_or_default(),
                r.clamped.to_string(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

fn ratio_of(lhs: f64, rhs: f64) -> Option<f64> {
    if lhs == 0.0 && rhs == 0.0 {
        None
    } else if rhs == 0.0 {
        Some(f64::INFINITY)
    } else {
        Some(lhs / rhs)
    }
}

/// `Σ_{q_i > t} μ_i |cell|`.
fn superlevel_measure(quotient: &[f64], density: &[f64], cell: f64, t: f64) -> f64 {
    ksum(quotient.iter().zip(density).filter(|(q, _)| **q > t).map(|(_, d)| d * cell))
}

fn sweep_rows<L, R>(ts: &[f64], lhs: L, rhs: R) -> Vec<RatioRow>
where
    L: Fn(f64) -> f64 + Sync,
    R: Fn(f64) -> (f64, bool) + Sync,
{
    ts.par_iter()
        .map(|&t| {
            let l = lhs(t);
            let (r, clamped) = rhs(t);
            RatioRow {
                t,
                lhs: l,
                rhs: r,
                ratio: ratio_of(l, r),
                clamped,
            }
        })
        .collect()
}

fn cellwise(values: &[f64], other: &[f64], op: impl Fn(f64, f64) -> f64) -> Vec<f64> {
    values.iter().zip(other).map(|(a, b)| op(*a, *b)).collect()
}

/// `∫ Φ(c f / t) · density`.
fn modular_integral(f: &MeshFn, density: &[f64], phi: &YoungFn, c: f64, t: f64) -> f64 {
    let cell = f.cell_volume();
    ksum(f.values().iter().zip(density).map(|(x, d)| phi.value(c * x / t) * d * cell))
}

/// Quotient `M_Φ(fv) / D` for a given denominator field.
fn quotient(num: &MeshFn, den: &[f64]) -> Vec<f64> {
    cellwise(num.values(), den, |a, b| if a == 0.0 { 0.0 } else { a / b })
}

fn mixed_sweep(exp: &MixedExperiment, phi: &YoungFn, strong: bool, c2: f64) -> Result<RatioReport> {
    let fv = exp.f.mul(&exp.v)?;
    let mfv = maximal_field(&fv, phi, 0.0, exp.scope)?;
    let den = if strong {
        exp.v.values().to_vec()
    } else {
        maximal_field(&exp.v, phi, 0.0, exp.scope)?.values().to_vec()
    };
    let q = quotient(&mfv, &den);
    let density = exp.u.mul(&exp.v.powf(exp.r)?)?.values().to_vec();
    let cell = exp.f.cell_volume();
    let rows = sweep_rows(
        &exp.sweep.points(),
        |t| superlevel_measure(&q, &density, cell, t),
        |t| (modular_integral(&exp.f, &density, phi, c2, t), false),
    );
    Ok(RatioReport::from_rows(exp, rows))
}

/// `uv^r({M_Φ(fv)/M_Φv > t})` against `∫ Φ(f/t) u v^r`.
pub fn verify_theorem1(exp: &MixedExperiment) -> Result<RatioReport> {
    mixed_sweep(exp, &exp.phi, false, 1.0)
}

/// As [`verify_theorem1`] with denominator `v`.
pub fn verify_strong_form(exp: &MixedExperiment) -> Result<RatioReport> {
    mixed_sweep(exp, &exp.phi, true, 1.0)
}

/// Strong form with `Φ(t) = t`.
pub fn verify_sawyer(exp: &MixedExperiment) -> Result<RatioReport> {
    mixed_sweep(exp, &YoungFn::identity(), true, 1.0)
}

/// `sup_x M_Ψ(fv)(x)/M_Ψ v(x)` over `max f` (at most 1 for a contraction).
pub fn linf_contraction(f: &MeshFn, v: &MeshFn, psi: &YoungFn, scope: Scope) -> Result<f64> {
    let fmax = f.max();
    if fmax == 0.0 {
        return Ok(0.0);
    }
    let q = QuotientOperator::new(v, psi, scope)?.apply(f)?;
    Ok(q.max() / fmax)
}

fn corollary_with(exp: &MixedExperiment, psi: &YoungFn, c2: Option<f64>) -> Result<RatioReport> {
    let contraction = linf_contraction(&exp.f, &exp.v, psi, exp.scope)?;
    if contraction > 1.0 + LINF_SLACK {
        return Err(Error::Precondition {
            code: "linf_contraction".into(),
            detail: format!("sup M_psi(fv)/M_psi v exceeds max f by factor {contraction}"),
        });
    }
    let candidates: Vec<f64> = match c2 {
        Some(c) => vec![c],
        None => C2_CANDIDATES.to_vec(),
    };
    let mut last = None;
    for c in candidates {
        let mut rep = mixed_sweep(exp, psi, false, c)?;
        rep.constants.insert("C1".into(), rep.sup_ratio);
        rep.constants.insert("C2".into(), c);
        rep.constants.insert("linf_contraction".into(), contraction);
        rep.variant = "corollary".into();
        if rep.pass {
            return Ok(rep);
        }
        last = Some(rep);
    }
    Ok(last.expect("at least one candidate"))
}

/// `uv^r({M_Ψ(fv)/M_Ψv > t})` against `∫ Ψ(C₂ f/t) u v^r`; `C₂` is the smallest
/// candidate giving a finite supremum.
pub fn verify_corollary(exp: &MixedExperiment) -> Result<RatioReport> {
    let Variant::Corollary { psi } = &exp.variant else {
        return Err(Error::InvalidParameter("corollary variant expected".into()));
    };
    let eq = check_equivalence(&exp.phi, psi, 1.0)?;
    if !eq.is_finite() {
        return Err(Error::NotEquivalent(format!("constants {eq:?}")));
    }
    corollary_with(exp, psi, None)
}

/// Fractional sweep with `Φ(t) = t^r (1 + log⁺ t)^δ`, `p > r`.
pub fn verify_theorem3(exp: &MixedExperiment) -> Result<RatioReport> {
    let Variant::Theorem3 { delta, gamma, p } = exp.variant else {
        return Err(Error::InvalidParameter("theorem3 variant expected".into()));
    };
    let n = exp.f.n();
    let r = exp.r;
    let tp = thm3_params(n, r, delta, gamma, p)?;
    let phi = YoungFn::llogl(r, delta);
    let fv = exp.f.mul(&exp.v)?;
    let mfv = maximal_field(&fv, &phi, gamma, exp.scope)?;
    let mv = maximal_field(&exp.v, &tp.eta, 0.0, exp.scope)?;
    let q = quotient(&mfv, mv.values());
    let rc = conjugate_reciprocal(r);
    let lhs_density = exp.u.mul(&exp.v.powf(tp.q * (1.0 / p + rc))?)?;
    let rhs_density = exp.u.powf(p / tp.q)?.mul(&exp.v.powf(1.0 + p * rc)?)?;
    let cell = exp.f.cell_volume();
    let rows = sweep_rows(
        &exp.sweep.points(),
        |t| superlevel_measure(&q, lhs_density.values(), cell, t).powf(1.0 / tp.q),
        |t| {
            let s = ksum(
                exp.f
                    .values()
                    .iter()
                    .zip(rhs_density.values())
                    .map(|(x, d)| (x / t).powf(p) * d * cell),
            );
            (s.powf(1.0 / p), false)
        },
    );
    let mut rep = RatioReport::from_rows(exp, rows);
    rep.constants.insert("q".into(), tp.q);
    Ok(rep)
}

/// Endpoint fractional sweep: `uv^q(E_t)` against `φ(∫ Φ_γ(f/t) Ψ(u^{1/q} v))`.
/// Right-hand sides beyond the finite range are clamped and flagged.
pub fn verify_theorem4(exp: &MixedExperiment) -> Result<RatioReport> {
    let Variant::Theorem4 { delta, gamma } = exp.variant else {
        return Err(Error::InvalidParameter("theorem4 variant expected".into()));
    };
    let n = exp.f.n();
    let r = exp.r;
    let tp = thm4_params(n, r, delta, gamma)?;
    let phi = YoungFn::llogl(r, delta);
    let fv = exp.f.mul(&exp.v)?;
    let mfv = maximal_field(&fv, &phi, gamma, exp.scope)?;
    let mv = maximal_field(&exp.v, &tp.eta, 0.0, exp.scope)?;
    let q = quotient(&mfv, mv.values());
    let lhs_density = exp.u.mul(&exp.v.powf(tp.q)?)?;
    let psi_density = exp.u.powf(1.0 / tp.q)?.mul(&exp.v)?.apply_young(&tp.psi_w)?;
    let cell = exp.f.cell_volume();
    let rows = sweep_rows(
        &exp.sweep.points(),
        |t| superlevel_measure(&q, lhs_density.values(), cell, t),
        |t| {
            let inner = modular_integral(&exp.f, psi_density.values(), &tp.phi_gamma, 1.0, t);
            let outer = tp.phi_mod.value(inner);
            if inner.is_finite() && outer.is_finite() {
                (outer, false)
            } else {
                (f64::MAX, true)
            }
        },
    );
    let mut rep = RatioReport::from_rows(exp, rows);
    rep.constants.insert("q".into(), tp.q);
    rep.constants.insert("outer_ratio".into(), tp.outer_ratio);
    Ok(rep)
}

/// An operator on mesh functions with a known `L^∞` bound `C₀`.
pub trait SubadditiveOperator: Sync {
    fn apply(&self, f: &MeshFn) -> Result<MeshFn>;
    fn linf_bound(&self) -> f64;
}

/// `f ↦ M_Ψ(f v) / M_Ψ v`.
#[derive(Clone, Debug)]
pub struct QuotientOperator {
    v: MeshFn,
    psi: YoungFn,
    scope: Scope,
    denominator: MeshFn,
}

impl QuotientOperator {
    pub fn new(v: &MeshFn, psi: &YoungFn, scope: Scope) -> Result<Self> {
        if !v.is_positive() {
            return Err(Error::Domain("v must be strictly positive".into()));
        }
        Ok(Self {
            v: v.clone(),
            psi: psi.clone(),
            scope,
            denominator: maximal_field(v, psi, 0.0, scope)?,
        })
    }
}

impl SubadditiveOperator for QuotientOperator {
    fn apply(&self, f: &MeshFn) -> Result<MeshFn> {
        let num = maximal_field(&f.map(f64::abs)?.mul(&self.v)?, &self.psi, 0.0, self.scope)?;
        num.div(&self.denominator)
    }

    fn linf_bound(&self) -> f64 {
        1.0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModularReport {
    /// Weak modular constant measured on the truncated family at level `t/2`.
    pub c: f64,
    pub c0: f64,
    pub rows: Vec<RatioRow>,
    pub pass: bool,
}

/// Checks `μ({|Tf| > t}) ≤ C ∫_{|f| > t/(2C₀)} φ(2|f|/t) dμ` on the sweep, with
/// `C` the weak modular constant of `T` measured on the truncations
/// `f 𝟙_{|f| > t/(2C₀)}` at level `t/2`.
pub fn verify_modular_lemma<T: SubadditiveOperator>(
    op: &T,
    f: &MeshFn,
    mu: &MeshFn,
    phi: &YoungFn,
    sweep: &TSweep,
) -> Result<ModularReport> {
    f.same_mesh(mu)?;
    let c0 = op.linf_bound();
    let ts = sweep.points();
    let cell = f.cell_volume();
    let tf = op.apply(f)?;
    let absf: Vec<f64> = f.values().iter().map(|x| x.abs()).collect();
    let restricted = |t: f64| {
        let cut = t / (2.0 * c0);
        ksum(
            absf.iter()
                .zip(mu.values())
                .filter(|(x, _)| **x > cut)
                .map(|(x, m)| phi.value(2.0 * x / t) * m * cell),
        )
    };
    let measured = ts
        .par_iter()
        .map(|&t| -> Result<f64> {
            let cut = t / (2.0 * c0);
            let trunc = f.map(|x| if x.abs() > cut { x } else { 0.0 })?;
            let lhs = superlevel_measure(op.apply(&trunc)?.values(), mu.values(), cell, t / 2.0);
            Ok(ratio_of(lhs, restricted(t)).unwrap_or(0.0))
        })
        .collect::<Result<Vec<f64>>>()?;
    let c = measured.into_iter().fold(0.0, f64::max);
    let rows = sweep_rows(
        &ts,
        |t| superlevel_measure(tf.values(), mu.values(), cell, t),
        |t| (c * restricted(t), false),
    );
    let pass = c.is_finite() && rows.iter().all(|r| r.lhs <= r.rhs * (1.0 + 1e-12));
    Ok(ModularReport { c, c0, rows, pass })
}

fn modular_sweep(exp: &MixedExperiment) -> Result<RatioReport> {
    let Variant::ModularLemma { psi } = &exp.variant else {
        return Err(Error::InvalidParameter("modular_lemma variant expected".into()));
    };
    let op = QuotientOperator::new(&exp.v, psi, exp.scope)?;
    let mu = exp.u.mul(&exp.v.powf(exp.r)?)?;
    let m = verify_modular_lemma(&op, &exp.f, &mu, &exp.phi, &exp.sweep)?;
    let mut rep = RatioReport::from_rows(exp, m.rows);
    rep.constants.insert("C".into(), m.c);
    rep.constants.insert("C0".into(), m.c0);
    if !m.pass {
        rep.pass = false;
        rep.notes.push("lhs exceeds the restricted modular bound".into());
    }
    Ok(rep)
}

/// Dispatches on the variant; no preconditions are checked here.
pub fn sweep(exp: &MixedExperiment) -> Result<RatioReport> {
    match exp.variant {
        Variant::Theorem1 => verify_theorem1(exp),
        Variant::StrongForm => verify_strong_form(exp),
        Variant::Corollary { .. } => verify_corollary(exp),
        Variant::Sawyer => verify_sawyer(exp),
        Variant::Theorem3 { .. } => verify_theorem3(exp),
        Variant::Theorem4 { .. } => verify_theorem4(exp),
        Variant::ModularLemma { .. } => modular_sweep(exp),
    }
}

/// Mesh of an experiment: dimension, box level `K`, mesh level `J`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshSpec {
    pub n: usize,
    pub box_level: i32,
    pub mesh_level: u32,
}

impl MeshSpec {
    pub fn domain(&self) -> Result<DomainBox> {
        DomainBox::centered(self.n, self.box_level)
    }

    /// `(K, J+1)`.
    pub fn finer(&self) -> Self {
        Self {
            mesh_level: self.mesh_level + 1,
            ..*self
        }
    }

    /// `(K+2, J+2)`: four times the box at the same cell size.
    pub fn larger(&self) -> Self {
        Self {
            box_level: self.box_level + 2,
            mesh_level: self.mesh_level + 2,
            ..*self
        }
    }
}

/// Resolution-independent experiment description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub name: String,
    pub variant: Variant,
    pub u: WeightSpec,
    pub v: WeightSpec,
    pub f: FnSpec,
    #[serde(default = "one")]
    pub r: f64,
    #[serde(default = "YoungFn::identity")]
    pub phi: YoungFn,
    #[serde(default)]
    pub sweep: SweepSpec,
    #[serde(default = "all_grids")]
    pub scope: Scope,
    #[serde(default)]
    pub ceiling: Option<f64>,
    /// Overrides the run-wide mesh.
    #[serde(default)]
    pub mesh: Option<MeshSpec>,
}

fn one() -> f64 {
    1.0
}
fn all_grids() -> Scope {
    Scope::All
}

impl ExperimentSpec {
    /// Builds the experiment; the sweep is anchored at `max f` of the base mesh
    /// (`anchor`) so refined runs share the same thresholds.
    pub fn build(&self, mesh: &MeshSpec, anchor: Option<f64>) -> Result<MixedExperiment> {
        let d = mesh.domain()?;
        let f = self.f.build(&d, mesh.mesh_level)?;
        let sweep = self.sweep.resolve(anchor.unwrap_or_else(|| f.max()))?;
        Ok(MixedExperiment::new(
            self.u.build(&d, mesh.mesh_level)?,
            self.v.build(&d, mesh.mesh_level)?,
            f,
            self.r,
            self.phi.clone(),
            sweep,
            self.variant.clone(),
        )?
        .with_scope(self.scope))
    }

    /// The Young function the inequality is stated for, and the exponent of `v`
    /// in the left-hand measure.
    fn effective(&self, n: usize) -> Result<(YoungFn, f64)> {
        Ok(match &self.variant {
            Variant::Sawyer => (YoungFn::identity(), self.r),
            Variant::Theorem3 { delta, gamma, p } => {
                let tp = thm3_params(n, self.r, *delta, *gamma, *p)?;
                (
                    YoungFn::llogl(self.r, *delta),
                    tp.q * (1.0 / p + conjugate_reciprocal(self.r)),
                )
            }
            Variant::Theorem4 { delta, gamma } => {
                let tp = thm4_params(n, self.r, *delta, *gamma)?;
                (YoungFn::llogl(self.r, *delta), tp.q)
            }
            _ => (self.phi.clone(), self.r),
        })
    }
}

/// Outcome of the precondition checks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Preconditions {
    pub fr: Option<FrCertificate>,
    pub u_a1: f64,
    pub u_a1_verdict: Verdict,
    pub v_exponent: f64,
    pub v_ainf_verdict: Verdict,
    pub v_ainf_epsilon: f64,
}

/// `Φ ∈ 𝔉_r` (first-order variants), `u ∈ A₁` and `v^s ∈ A_∞` by trend
/// classification; failures carry the weight report.
pub fn check_preconditions(spec: &ExperimentSpec, mesh: &MeshSpec, seed: u64) -> Result<Preconditions> {
    let (phi, s) = spec.effective(mesh.n)?;
    let fr = match spec.variant {
        Variant::Theorem3 { .. } | Variant::Theorem4 { .. } => None,
        _ => Some(certify_fr(&phi, spec.r, std::f64::consts::E)?),
    };
    let u_report = classify_weight(&spec.u, mesh.n, mesh.box_level, mesh.mesh_level, seed)?;
    let u_verdict = u_report.verdict("A_1");
    if !u_report.a1_constant.is_finite() || u_verdict == Verdict::NonMember {
        return Err(Error::WeightClass {
            code: "u_not_a1".into(),
            subject: "u".into(),
            report: Box::new(u_report),
        });
    }
    let vs = WeightSpec::Powered {
        base: Box::new(spec.v.clone()),
        exponent: s,
    };
    let v_report: WeightReport = classify_weight(&vs, mesh.n, mesh.box_level, mesh.mesh_level, seed)?;
    let v_verdict = v_report.verdict("A_inf");
    if v_verdict == Verdict::NonMember {
        return Err(Error::WeightClass {
            code: "v_not_ainf".into(),
            subject: format!("v^{s}"),
            report: Box::new(v_report),
        });
    }
    Ok(Preconditions {
        fr,
        u_a1: u_report.a1_constant,
        u_a1_verdict: u_verdict,
        v_exponent: s,
        v_ainf_verdict: v_verdict,
        v_ainf_epsilon: v_report.ainf_pair.epsilon,
    })
}

fn relative_change(base: f64, other: f64) -> f64 {
    if base == other {
        0.0
    } else if base == 0.0 || !base.is_finite() || !other.is_finite() {
        f64::INFINITY
    } else {
        ((other - base) / base).abs()
    }
}

/// Runs one experiment with its preconditions and, if `refine`, the paired
/// runs at `(K, J+1)` and `(K+2, J+2)`. The experiment's own mesh, if set,
/// replaces `mesh`.
pub fn run_experiment(spec: &ExperimentSpec, mesh: &MeshSpec, seed: u64, refine: bool) -> Result<(RatioReport, Preconditions)> {
    let mesh = &spec.mesh.unwrap_or(*mesh);
    let pre = check_preconditions(spec, mesh, seed)?;
    let base = spec.build(mesh, None)?;
    let mut rep = sweep(&base)?;
    if refine {
        let anchor = Some(base.f.max());
        let c2 = rep.constants.get("C2").copied();
        for (key, m) in [("J+1", mesh.finer()), ("K+2", mesh.larger())] {
            let exp = spec.build(&m, anchor)?;
            let other = match (&exp.variant, c2) {
                (Variant::Corollary { psi }, Some(c)) => corollary_with(&exp, psi, Some(c))?,
                _ => sweep(&exp)?,
            };
            rep.refinement_deltas
                .insert(key.into(), relative_change(rep.sup_ratio, other.sup_ratio));
        }
    }
    rep.finalize(spec.ceiling);
    Ok((rep, pre))
}
