//! Acceptance suite. Prints one line per criterion and exits nonzero if any
//! criterion fails outside its recorded failure mode.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use mixmax::cli::main_with_args;
use mixmax::decomposition::{claims_check, cz_levelset, height, principal_cubes, sparsity_bound, sparsity_check, stratify};
use mixmax::descriptor::{FnSpec, WeightSpec};
use mixmax::experiments::{
    run_experiment, sweep, ExperimentSpec, MeshSpec, MixedExperiment, SweepSpec, Variant, REFINEMENT_TOLERANCE,
};
use mixmax::luxemburg::{jensen_bound, jensen_check, lux_norm};
use mixmax::maximal::{hedberg_check, maximal_field, HedbergParams, Scope};
use mixmax::mesh::{enumerate_cubes, DomainBox, DyadicCube, MeshFn};
use mixmax::weights::{ainf_pair, cube_family};
use mixmax::young::{ratio_lemma_f, YoungFn};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SANDWICH_TOL: f64 = 1e-9;
const SPARSITY_TOL: f64 = 1e-9;
const LUX_ORACLE_TOL: f64 = 1e-6;
const LUX_INVARIANT_TOL: f64 = 1e-10;
const LEMMA_TOL: f64 = 1e-12;
const DECAY_RESIDUAL_MAX: f64 = 1.0;
const DECOMPOSITION_BUDGET: Duration = Duration::from_secs(60);
const MIXED_BUDGET: Duration = Duration::from_secs(300);
const FRACTIONAL_BUDGET: Duration = Duration::from_secs(600);

enum Outcome {
    Pass(String),
    Fail(String),
    /// Fails in exactly the recorded way.
    KnownFail(String),
}

struct Instance {
    f: MeshFn,
    v: MeshFn,
    phi: YoungFn,
    r: f64,
}

fn random_instances(count: usize) -> Vec<Instance> {
    let d = DomainBox::centered(1, 2).unwrap();
    let phis = [YoungFn::identity(), YoungFn::llogl(1.0, 1.0), YoungFn::llogl(2.0, 1.0)];
    (0..count)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(1000 + i as u64);
            let f = if i % 2 == 0 {
                FnSpec::Random {
                    seed: i as u64,
                    lattice_level: -5,
                    support_level: 1,
                    max: rng.gen_range(0.5..8.0),
                }
            } else {
                FnSpec::IndicatorMix {
                    count: rng.gen_range(4..40),
                    seed: i as u64,
                    lattice_level: -6,
                    support_level: 2,
                    height: rng.gen_range(0.5..8.0),
                }
            };
            let beta = rng.gen_range(-0.6..0.9);
            let v = if i % 3 == 0 {
                WeightSpec::Product {
                    factors: vec![
                        WeightSpec::power(beta),
                        WeightSpec::Bump {
                            base: Box::new(WeightSpec::constant(1.0)),
                            center: vec![rng.gen_range(-1.5..1.5)],
                            radius: rng.gen_range(0.1..0.6),
                            factor: rng.gen_range(0.2..5.0),
                        },
                    ],
                }
            } else {
                WeightSpec::power(beta)
            };
            Instance {
                f: f.build(&d, 8).unwrap(),
                v: v.build(&d, 8).unwrap(),
                phi: phis[i % 3].clone(),
                r: if i % 4 < 2 { 1.0 } else { 2.0 },
            }
        })
        .collect()
}

fn criterion_decomposition(instances: &[Instance]) -> Outcome {
    let start = Instant::now();
    let mut cubes = 0;
    let mut bad = Vec::new();
    let mut worst_upper = 0.0_f64;
    for (i, inst) in instances.iter().enumerate() {
        let s = stratify(&inst.f, &inst.v, inst.r, &inst.phi, 2.0, None, 0).unwrap();
        let chk = s.verify(&inst.f, &inst.v).unwrap();
        cubes += chk.cubes + chk.subcubes;
        worst_upper = worst_upper.max(chk.worst_upper);
        if !chk.ok() {
            bad.push(format!("#{i}: {chk:?}"));
        }
        // the level sets agree with a direct CZ selection and sit inside the sandwich
        let g = inst.f.mul(&inst.v).unwrap();
        let vr = inst.v.powf(inst.r).unwrap();
        for level in &s.levels {
            let lam = height(2.0, level.k, 1.0);
            let direct: BTreeSet<DyadicCube> = cz_levelset(&g, &inst.phi, 0, lam).unwrap().into_iter().collect();
            let strat: BTreeSet<DyadicCube> = level.cubes.iter().map(|c| c.cube).collect();
            if direct != strat {
                bad.push(format!("#{i}: level {} differs from direct selection", level.k));
            }
            for c in &level.cubes {
                let norm = lux_norm(&g, &c.cube, &inst.phi).unwrap().norm;
                if !(norm > lam * (1.0 - SANDWICH_TOL) && norm <= 2.0 * lam * (1.0 + SANDWICH_TOL)) {
                    bad.push(format!("#{i}: norm {norm} outside ({lam}, {}]", 2.0 * lam));
                }
                let lam_r = height(2.0, level.k, inst.r);
                for sc in &c.subcubes {
                    let avg = vr.average(&sc.cube).unwrap();
                    if !(avg > lam_r * (1.0 - SANDWICH_TOL) && avg <= 2.0 * lam_r * (1.0 + SANDWICH_TOL)) {
                        bad.push(format!("#{i}: v^r average {avg} outside ({lam_r}, {}]", 2.0 * lam_r));
                    }
                }
            }
        }
    }
    let elapsed = start.elapsed();
    let detail = format!(
        "{} instances, {cubes} cubes, max norm/(2^n a^k) = {worst_upper:.6}, {:.1}s",
        instances.len(),
        elapsed.as_secs_f64()
    );
    if bad.is_empty() && elapsed < DECOMPOSITION_BUDGET {
        Outcome::Pass(detail)
    } else {
        Outcome::Fail(format!("{detail}; {}", bad.into_iter().take(3).collect::<Vec<_>>().join("; ")))
    }
}

fn criterion_sparsity(instances: &[Instance]) -> Outcome {
    let mut worst = [0.0_f64; 2];
    let mut bad = Vec::new();
    for (i, inst) in instances.iter().enumerate() {
        for (j, a) in [2.0, 4.0].into_iter().enumerate() {
            let s = stratify(&inst.f, &inst.v, inst.r, &inst.phi, a, None, 0).unwrap();
            let sp = sparsity_check(&s, inst.f.frame()).unwrap();
            worst[j] = worst[j].max(sp);
            if sp > sparsity_bound(1, a) + SPARSITY_TOL {
                bad.push(format!("#{i} a={a}: {sp}"));
            }
            if s.nesting_violations() > 0 {
                bad.push(format!("#{i} a={a}: nesting"));
            }
        }
    }
    let detail = format!(
        "max sparsity {:.4} (bound 2) at a=2, {:.4} (bound 2/3) at a=4",
        worst[0], worst[1]
    );
    if bad.is_empty() {
        Outcome::Pass(detail)
    } else {
        Outcome::Fail(format!("{detail}; {}", bad.join("; ")))
    }
}

/// Smallest `λ` on successively finer grids with `avg Φ(f/λ) ≤ 1`.
fn dense_scan_norm(samples: &[(f64, f64)], phi: &YoungFn) -> f64 {
    let total: f64 = samples.iter().map(|s| s.1).sum();
    let avg = |lam: f64| samples.iter().map(|(x, m)| phi.value(x / lam) * m).sum::<f64>() / total;
    let top = samples.iter().map(|s| s.0).fold(0.0, f64::max);
    if top == 0.0 {
        return 0.0;
    }
    let (mut lo, mut hi) = (top * 1e-12, top * (1.0 + phi.value(1.0)).max(1.0) * 4.0);
    let points = 400;
    for stage in 0..5 {
        let grid: Vec<f64> = (0..=points)
            .map(|i| {
                let s = i as f64 / points as f64;
                if stage == 0 {
                    lo * (hi / lo).powf(s)
                } else {
                    lo + (hi - lo) * s
                }
            })
            .collect();
        let first = grid.iter().position(|&l| avg(l) <= 1.0).expect("upper end admissible");
        if first == 0 {
            return grid[0];
        }
        lo = grid[first - 1];
        hi = grid[first];
    }
    hi
}

fn criterion_luxemburg() -> Outcome {
    let d = DomainBox::centered(1, 2).unwrap();
    let phis = [
        YoungFn::power(1.0),
        YoungFn::power(2.0),
        YoungFn::llogl(1.0, 1.0),
        YoungFn::llogl(2.0, 1.0),
        YoungFn::spliced(YoungFn::power(2.0), YoungFn::llogl(1.0, 1.0), 1.0).unwrap(),
    ];
    let cubes: Vec<DyadicCube> = (0..3).flat_map(|g| enumerate_cubes(&d, 7, g, -3, 2).unwrap()).collect();
    let mut worst = 0.0_f64;
    let mut invariant_bad = 0;
    for i in 0..200u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(7000 + i);
        let f = FnSpec::Random {
            seed: i,
            lattice_level: -5,
            support_level: 2,
            max: rng.gen_range(0.1..20.0),
        }
        .build(&d, 7)
        .unwrap();
        let q = cubes[rng.gen_range(0..cubes.len())];
        let phi = &phis[i as usize % phis.len()];
        let got = lux_norm(&f, &q, phi).unwrap().norm;
        let oracle = dense_scan_norm(&f.samples(&q).unwrap(), phi);
        if oracle > 0.0 {
            worst = worst.max((got - oracle).abs() / oracle);
        } else if got != 0.0 {
            worst = f64::INFINITY;
        }
        let c = rng.gen_range(0.01..100.0);
        let scaled = lux_norm(&f.scale(c).unwrap(), &q, phi).unwrap().norm;
        if (scaled - c * got).abs() > LUX_INVARIANT_TOL * c * got.max(1e-300) {
            invariant_bad += 1;
        }
        let bump: Vec<f64> = f.values().iter().map(|x| x + rng.gen_range(0.0..1.0)).collect();
        let g = MeshFn::new(d.clone(), 7, bump).unwrap();
        if lux_norm(&g, &q, phi).unwrap().norm + LUX_INVARIANT_TOL < got {
            invariant_bad += 1;
        }
    }
    let detail = format!("200 triples, max relative gap to dense scan {worst:.2e}, invariant violations {invariant_bad}");
    if worst <= LUX_ORACLE_TOL && invariant_bad == 0 {
        Outcome::Pass(detail)
    } else {
        Outcome::Fail(detail)
    }
}

fn prefix_sum_maximal(f: &[f64]) -> Vec<f64> {
    let mut prefix = vec![0.0];
    for x in f {
        prefix.push(prefix.last().unwrap() + x);
    }
    let mut best = vec![0.0_f64; f.len()];
    let mut size = 1;
    while size <= f.len() {
        for start in (0..f.len()).step_by(size) {
            let avg = (prefix[start + size] - prefix[start]) / size as f64;
            for b in &mut best[start..start + size] {
                *b = b.max(avg);
            }
        }
        size *= 2;
    }
    best
}

fn criterion_classical() -> Outcome {
    let mut mismatches = 0;
    for j in 1..=8u32 {
        for seed in 0..4u64 {
            let d = DomainBox::new(1, vec![0.0], 0).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed * 31 + j as u64);
            // dyadic rationals keep every partial sum exact
            let vals: Vec<f64> = (0..1usize << j).map(|_| rng.gen_range(0..64) as f64 / 16.0).collect();
            let f = MeshFn::new(d, j, vals.clone()).unwrap();
            let m = maximal_field(&f, &YoungFn::identity(), 0.0, Scope::Grid(0)).unwrap();
            if m.values() != prefix_sum_maximal(&vals).as_slice() {
                mismatches += 1;
            }
        }
    }
    let d = DomainBox::centered(1, 2).unwrap();
    let one = MeshFn::constant(d.clone(), 8, 1.0).unwrap();
    let f = FnSpec::IndicatorMix {
        count: 20,
        seed: 5,
        lattice_level: -5,
        support_level: 1,
        height: 4.0,
    }
    .build(&d, 8)
    .unwrap();
    let sw = SweepSpec::default().resolve(f.max()).unwrap();
    let exp = MixedExperiment::new(one.clone(), one, f, 1.0, YoungFn::identity(), sw, Variant::Theorem1)
        .unwrap()
        .with_scope(Scope::Grid(0));
    let sup = mixmax::experiments::verify_theorem1(&exp).unwrap().sup_ratio;
    let detail = format!("prefix-sum mismatches {mismatches}/32, unweighted dyadic sup ratio {sup:.6}");
    if mismatches == 0 && sup <= 1.0 {
        Outcome::Pass(detail)
    } else {
        Outcome::Fail(detail)
    }
}

fn criterion_lemma() -> Outcome {
    let top = (1.0 / std::f64::consts::E).exp();
    let (mut lo, mut hi) = (f64::INFINITY, 0.0_f64);
    let count = 100_000;
    for i in 0..count {
        let x = 10f64.powf(-8.0 + 16.0 * i as f64 / (count - 1) as f64);
        let y = ratio_lemma_f(x).unwrap();
        lo = lo.min(y);
        hi = hi.max(y);
    }
    let detail = format!("min {lo:.15}, max {hi:.15}, e^(1/e) = {top:.15}");
    if hi <= top + LEMMA_TOL && lo >= 1.0 - LEMMA_TOL && (top - hi) < 1e-8 {
        Outcome::Pass(detail)
    } else {
        Outcome::Fail(detail)
    }
}

fn criterion_jensen() -> Outcome {
    let d = DomainBox::centered(1, 2).unwrap();
    let cubes: Vec<DyadicCube> = (0..3).flat_map(|g| enumerate_cubes(&d, 7, g, -3, 2).unwrap()).collect();
    let phis = [YoungFn::llogl(1.0, 1.0), YoungFn::llogl(2.0, 1.0)];
    let mut worst = 0.0_f64;
    let mut bad = 0;
    for i in 0..200u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(9000 + i);
        let f = FnSpec::Random {
            seed: 50 + i,
            lattice_level: -5,
            support_level: 2,
            max: rng.gen_range(0.01..50.0),
        }
        .build(&d, 7)
        .unwrap();
        let q = cubes[rng.gen_range(0..cubes.len())];
        let phi = &phis[(i % 2) as usize];
        let r = if i % 4 < 2 { 1.0 } else { 2.0 };
        let c = jensen_check(&f, &q, phi, r).unwrap();
        let b = jensen_bound(phi, r);
        worst = worst.max(c / b);
        if c > b {
            bad += 1;
        }
    }
    let detail = format!("200 trials, max ratio to (Φ(1)+1)^r = {worst:.4}");
    if bad == 0 {
        Outcome::Pass(detail)
    } else {
        Outcome::Fail(format!("{detail}, {bad} violations"))
    }
}

fn catalog_f() -> FnSpec {
    FnSpec::IndicatorMix {
        count: 16,
        seed: 7,
        lattice_level: -4,
        support_level: 1,
        height: 4.0,
    }
}

fn spec(name: &str, variant: Variant, u: f64, v: f64, phi: YoungFn) -> ExperimentSpec {
    ExperimentSpec {
        name: name.into(),
        variant,
        u: WeightSpec::power(u),
        v: WeightSpec::power(v),
        f: catalog_f(),
        r: 1.0,
        phi,
        sweep: SweepSpec::default(),
        scope: Scope::All,
        ceiling: None,
        mesh: None,
    }
}

fn criterion_mixed() -> Outcome {
    let start = Instant::now();
    let mesh = MeshSpec {
        n: 1,
        box_level: 2,
        mesh_level: 8,
    };
    let phi = YoungFn::llogl(1.0, 1.0);
    let psi = YoungFn::spliced(YoungFn::power(2.0), YoungFn::llogl(1.0, 1.0), 1.0).unwrap();
    let runs = [
        spec("theorem1", Variant::Theorem1, -0.5, 1.0, phi.clone()),
        spec("strong_form", Variant::StrongForm, -0.5, 1.0, phi.clone()),
        spec("corollary", Variant::Corollary { psi }, -0.5, 1.0, phi.clone()),
        spec("sawyer", Variant::Sawyer, -0.5, 1.0, phi.clone()),
        spec("modular_lemma", Variant::ModularLemma { psi: phi.clone() }, -0.5, 1.0, phi),
    ];
    let mut parts = Vec::new();
    let mut failed = Vec::new();
    let mut recorded_mode = true;
    for s in &runs {
        let (rep, _) = run_experiment(s, &mesh, 7, true).unwrap();
        parts.push(format!(
            "{} sup {:.4} dJ {:.3} dK {:.3}",
            s.name, rep.sup_ratio, rep.refinement_deltas["J+1"], rep.refinement_deltas["K+2"]
        ));
        if rep.pass {
            continue;
        }
        failed.push(s.name.clone());
        // recorded mode: M_Φ v grows with the box for v = |x|, so only the
        // box companion moves, and it moves down
        let base = s.build(&mesh, None).unwrap();
        let larger = s.build(&mesh.larger(), Some(base.f.max())).unwrap();
        let shrinks = sweep(&larger).unwrap().sup_ratio < rep.sup_ratio;
        let denominator_is_maximal = matches!(s.variant, Variant::Theorem1 | Variant::Corollary { .. });
        recorded_mode &= denominator_is_maximal
            && rep.sup_ratio.is_finite()
            && rep.refinement_deltas["J+1"] < REFINEMENT_TOLERANCE
            && shrinks;
    }
    let elapsed = start.elapsed();
    let detail = format!("{}; {:.1}s", parts.join(", "), elapsed.as_secs_f64());
    if elapsed >= MIXED_BUDGET {
        Outcome::Fail(format!("{detail}; over budget"))
    } else if failed.is_empty() {
        Outcome::Pass(detail)
    } else if recorded_mode {
        Outcome::KnownFail(format!(
            "{detail}; {} decrease under K->K+2 because M_Φ|x| grows with the box",
            failed.join(", ")
        ))
    } else {
        Outcome::Fail(detail)
    }
}

fn criterion_fractional() -> Outcome {
    let start = Instant::now();
    let mesh = MeshSpec {
        n: 1,
        box_level: 4,
        mesh_level: 10,
    };
    let (bu, bv) = (-0.25, -0.125);
    let mut ok = true;
    let mut parts = Vec::new();
    let t3 = Variant::Theorem3 {
        delta: 0.0,
        gamma: 0.5,
        p: 4.0 / 3.0,
    };
    let t4 = Variant::Theorem4 { delta: 1.0, gamma: 0.5 };
    for (name, variant) in [("theorem3", t3), ("theorem4", t4)] {
        let t = Instant::now();
        let (rep, _) = run_experiment(&spec(name, variant, bu, bv, YoungFn::identity()), &mesh, 7, true).unwrap();
        ok &= rep.pass && t.elapsed() < FRACTIONAL_BUDGET;
        parts.push(format!(
            "{name} sup {:.4} dJ {:.3} dK {:.3}",
            rep.sup_ratio, rep.refinement_deltas["J+1"], rep.refinement_deltas["K+2"]
        ));
    }
    let hps = [
        HedbergParams {
            r: 1.0,
            delta: 0.0,
            gamma: 0.5,
            p: 4.0 / 3.0,
        },
        HedbergParams {
            r: 1.0,
            delta: 1.0,
            gamma: 0.5,
            p: 1.0,
        },
    ];
    for (i, hp) in hps.iter().enumerate() {
        let t = Instant::now();
        let vals: Vec<f64> = [mesh, mesh.finer(), mesh.larger()]
            .iter()
            .map(|m| {
                let d = m.domain().unwrap();
                let f = catalog_f().build(&d, m.mesh_level).unwrap();
                let w = WeightSpec::power(bv).build(&d, m.mesh_level).unwrap();
                hedberg_check(&f, &w, hp).unwrap()
            })
            .collect();
        let dj = ((vals[1] - vals[0]) / vals[0]).abs();
        let dk = ((vals[2] - vals[0]) / vals[0]).abs();
        ok &= vals.iter().all(|x| x.is_finite())
            && dj < REFINEMENT_TOLERANCE
            && dk < REFINEMENT_TOLERANCE
            && t.elapsed() < FRACTIONAL_BUDGET;
        parts.push(format!("hedberg set {} sup {:.4} dJ {dj:.3} dK {dk:.3}", i + 1, vals[0]));
    }
    let detail = format!("{}; {:.1}s", parts.join(", "), start.elapsed().as_secs_f64());
    if ok {
        Outcome::Pass(detail)
    } else {
        Outcome::Fail(detail)
    }
}

fn criterion_claims() -> Outcome {
    let d = DomainBox::centered(1, 2).unwrap();
    let j = 8;
    let tall = catalog_f().build(&d, j).unwrap();
    let low = FnSpec::Random {
        seed: 11,
        lattice_level: -4,
        support_level: 1,
        max: 0.5,
    }
    .build(&d, j)
    .unwrap();
    let catalog = [
        (0.0, 1.0, 1.0, &tall),
        (-0.5, 1.0, 1.0, &tall),
        (-0.5, 0.5, 1.0, &tall),
        (-0.25, -0.25, 1.0, &tall),
        (-0.25, 0.5, 2.0, &tall),
        (-0.5, 0.25, 2.0, &tall),
        (0.0, 1.0, 1.0, &low),
        (-0.5, 0.5, 1.0, &low),
        (-0.25, -0.5, 1.0, &low),
        (-0.25, 0.5, 2.0, &low),
    ];
    let mut parts = Vec::new();
    let mut ok = true;
    let mut upper_gamma = 0;
    for (bu, bv, r, f) in catalog {
        let u = WeightSpec::power(bu).build(&d, j).unwrap();
        let v = WeightSpec::power(bv).build(&d, j).unwrap();
        let vr = v.powf(r).unwrap();
        let eps = ainf_pair(&vr, &cube_family(&vr, Scope::Grid(0)).unwrap(), 16, 7).unwrap().epsilon;
        let phi = YoungFn::llogl(r, 1.0);
        let s = stratify(f, &v, r, &phi, 2.0, None, 0).unwrap();
        let gamma_up = s
            .levels
            .iter()
            .flat_map(|l| &l.cubes)
            .filter(|c| c.class >= 0 && c.gamma)
            .count();
        upper_gamma += gamma_up;
        let forest = principal_cubes(&s, &u, eps / 2.0, eps).unwrap();
        let fc = forest.verify(&u).unwrap();
        let c = claims_check(&s, &forest, &u, &v, f).unwrap();
        let h1_ok = c.claim2 <= c.claim2_bound * (1.0 + 1e-12);
        let good = c.finite() && h1_ok && c.decay.residual < DECAY_RESIDUAL_MAX && fc.ok();
        ok &= good;
        parts.push(format!(
            "(u {bu}, v {bv}, r {r}, max f {}) Γ+ {gamma_up} c1 {:.3} h1/u {:.3}<= {:.3} c3 {:.3} c4 {:.3} resid {:.3}{}",
            f.max(),
            c.claim1,
            c.claim2,
            c.claim2_bound,
            c.claim3,
            c.claim4,
            c.decay.residual,
            if good { "" } else { " !" }
        ));
    }
    let detail = format!("{}; Γ cubes with class >= 0: {upper_gamma}", parts.join("; "));
    if ok && upper_gamma > 0 {
        Outcome::Pass(detail)
    } else {
        Outcome::Fail(detail)
    }
}

fn criterion_determinism() -> Outcome {
    let config = concat!(env!("CARGO_MANIFEST_DIR"), "/configs/theorem1_sawyer.json");
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    let mut codes = Vec::new();
    for dir in &dirs {
        codes.push(main_with_args([
            "mixmax",
            "run",
            "--config",
            config,
            "--out-dir",
            dir.path().to_str().unwrap(),
        ]));
    }
    let mut same = true;
    let mut files = 0;
    for name in ["theorem1_llogl.csv", "sawyer.csv"] {
        let a = std::fs::read(dirs[0].path().join(name));
        let b = std::fs::read(dirs[1].path().join(name));
        match (a, b) {
            (Ok(a), Ok(b)) => {
                files += 1;
                same &= a == b;
            }
            _ => same = false,
        }
    }
    let detail = format!("exit codes {codes:?}, {files} CSV pairs byte-identical: {same}");
    if same && codes == [0, 0] {
        Outcome::Pass(detail)
    } else {
        Outcome::Fail(detail)
    }
}

type Criterion<'a> = Box<dyn Fn() -> Outcome + 'a>;

fn main() {
    let instances = random_instances(50);
    let criteria: Vec<(&str, Criterion)> = vec![
        ("1 decomposition sandwich", Box::new(|| criterion_decomposition(&instances))),
        ("2 sparsity bound", Box::new(|| criterion_sparsity(&instances))),
        ("3 luxemburg vs dense scan", Box::new(criterion_luxemburg)),
        ("4 classical dyadic oracle", Box::new(criterion_classical)),
        ("5 ratio lemma bounds", Box::new(criterion_lemma)),
        ("6 jensen constant", Box::new(criterion_jensen)),
        ("7 mixed inequality stability", Box::new(criterion_mixed)),
        ("8 fractional stability", Box::new(criterion_fractional)),
        ("9 claims suite", Box::new(criterion_claims)),
        ("10 determinism", Box::new(criterion_determinism)),
    ];
    let mut unexpected = 0;
    for (name, run) in &criteria {
        match run() {
            Outcome::Pass(d) => println!("PASS criterion {name}: {d}"),
            Outcome::Fail(d) => {
                unexpected += 1;
                println!("FAIL criterion {name}: {d}");
            }
            Outcome::KnownFail(d) => println!("FAIL criterion {name} (recorded): {d}"),
        }
    }
    if unexpected > 0 {
        eprintln!("{unexpected} acceptance criteria failed");
        std::process::exit(1);
    }
}
