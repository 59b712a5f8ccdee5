//! Young functions from the closed families used by the mixed inequalities:
//! powers, `t^r (1 + log⁺ t)^δ`, splices of two such functions at a point,
//! and positive powers of another Young function.
//!
//! Everything here is evaluated exactly from the closed form. Generalized
//! inverses are computed by bracketing bisection; closed-form inverses of the
//! `L log L` family are only comparable up to constants and serve as
//! cross-checks in the tests.
//!
//! The JSON descriptor is internally tagged by `kind`:
//!
//! ```json
//! {"kind": "power", "p": 2}
//! {"kind": "llogl", "r": 2, "delta": 1}
//! {"kind": "scaled_log", "r": 1, "delta": 2, "s": -1}
//! {"kind": "spliced", "low": {...}, "high": {...}, "t0": 1}
//! {"kind": "powered", "base": {...}, "exponent": 2}
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance of the generalized-inverse bisection.
pub const INVERSE_RTOL: f64 = 1e-12;

/// `max(0, ln t)`.
#[inline]
pub fn log_plus(t: f64) -> f64 {
    if t > 1.0 {
        t.ln()
    } else {
        0.0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum YoungFn {
    /// `t^p`.
    Power { p: f64 },
    /// `t^r (1 + log⁺ t)^δ`.
    #[serde(rename = "llogl")]
    LLogL { r: f64, delta: f64 },
    /// `t^r (1 + log⁺(t^s))^δ`; `s = 1` recovers [`YoungFn::LLogL`].
    ScaledLog { r: f64, delta: f64, s: f64 },
    /// `low(t)` for `t ≤ t0`, `high(t)` above.
    Spliced {
        low: Box<YoungFn>,
        high: Box<YoungFn>,
        t0: f64,
    },
    /// `base(t)^exponent`.
    Powered { base: Box<YoungFn>, exponent: f64 },
}

impl YoungFn {
    pub fn power(p: f64) -> Self {
        YoungFn::Power { p }
    }

    pub fn llogl(r: f64, delta: f64) -> Self {
        YoungFn::LLogL { r, delta }
    }

    pub fn scaled_log(r: f64, delta: f64, s: f64) -> Self {
        YoungFn::ScaledLog { r, delta, s }
    }

    pub fn spliced(low: YoungFn, high: YoungFn, t0: f64) -> Result<Self> {
        let f = YoungFn::Spliced {
            low: Box::new(low),
            high: Box::new(high),
            t0,
        };
        f.validate()?;
        Ok(f)
    }

    pub fn powered(base: YoungFn, exponent: f64) -> Self {
        YoungFn::Powered {
            base: Box::new(base),
            exponent,
        }
    }

    /// Identity `Φ(t) = t`.
    pub fn identity() -> Self {
        YoungFn::Power { p: 1.0 }
    }

    /// Checks parameter ranges and continuity of splices.
    pub fn validate(&self) -> Result<()> {
        let finite = |x: f64, name: &str| {
            if x.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("{name} must be finite")))
            }
        };
        match self {
            YoungFn::Power { p } => {
                finite(*p, "p")?;
                if *p < 1.0 {
                    return Err(Error::InvalidParameter(format!("power p = {p} < 1")));
                }
            }
            YoungFn::LLogL { r, delta } => {
                finite(*r, "r")?;
                finite(*delta, "delta")?;
                if *r < 1.0 || *delta < 0.0 {
                    return Err(Error::InvalidParameter(format!(
                        "llogl needs r >= 1, delta >= 0 (got r = {r}, delta = {delta})"
                    )));
                }
            }
            YoungFn::ScaledLog { r, delta, s } => {
                finite(*r, "r")?;
                finite(*delta, "delta")?;
                finite(*s, "s")?;
                if *r <= 0.0 || *delta < 0.0 {
                    return Err(Error::InvalidParameter(format!(
                        "scaled_log needs r > 0, delta >= 0 (got r = {r}, delta = {delta})"
                    )));
                }
            }
            YoungFn::Spliced { low, high, t0 } => {
                finite(*t0, "t0")?;
                if *t0 <= 0.0 {
                    return Err(Error::InvalidParameter("splice point must be positive".into()));
                }
                low.validate()?;
                high.validate()?;
                let (a, b) = (low.value(*t0), high.value(*t0));
                if (a - b).abs() > 1e-9 * a.abs().max(b.abs()).max(1.0) {
                    return Err(Error::InvalidParameter(format!(
                        "splice is discontinuous at t0 = {t0}: {a} vs {b}"
                    )));
                }
            }
            YoungFn::Powered { base, exponent } => {
                finite(*exponent, "exponent")?;
                if *exponent <= 0.0 {
                    return Err(Error::InvalidParameter("powered exponent must be > 0".into()));
                }
                base.validate()?;
            }
        }
        Ok(())
    }

    /// Evaluates the function at `t ≥ 0`.
    pub fn eval(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) || t.is_nan() {
            return Err(Error::Domain(format!("Young function evaluated at t = {t}")));
        }
        Ok(self.value(t))
    }

    /// Evaluation without the domain check; `t` must be nonnegative.
    #[inline]
    pub fn value(&self, t: f64) -> f64 {
        match self {
            YoungFn::Power { p } => {
                if *p == 1.0 {
                    t
                } else if *p == 2.0 {
                    t * t
                } else {
                    t.powf(*p)
                }
            }
            YoungFn::LLogL { r, delta } => {
                let base = if *r == 1.0 { t } else { t.powf(*r) };
                if *delta == 0.0 || t <= 1.0 {
                    base
                } else {
                    base * (1.0 + t.ln()).powf(*delta)
                }
            }
            YoungFn::ScaledLog { r, delta, s } => {
                let base = t.powf(*r);
                if *delta == 0.0 || t == 0.0 {
                    base
                } else {
                    // log⁺(t^s) = max(0, s ln t)
                    let l = (s * t.ln()).max(0.0);
                    base * (1.0 + l).powf(*delta)
                }
            }
            YoungFn::Spliced { low, high, t0 } => {
                if t <= *t0 {
                    low.value(t)
                } else {
                    high.value(t)
                }
            }
            YoungFn::Powered { base, exponent } => base.value(t).powf(*exponent),
        }
    }

    /// `inf{s ≥ 0 : Φ(s) ≥ t}` by bracketing bisection.
    pub fn gen_inverse(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(Error::Domain(format!("generalized inverse at t = {t}")));
        }
        if t == 0.0 {
            return Ok(0.0);
        }
        if t.is_infinite() {
            return Ok(f64::INFINITY);
        }
        let mut hi = 1.0_f64;
        while self.value(hi) < t {
            hi *= 2.0;
            if !hi.is_finite() {
                return Ok(f64::INFINITY);
            }
        }
        let mut lo = hi;
        while lo > f64::MIN_POSITIVE && self.value(lo) >= t {
            lo *= 0.5;
        }
        if self.value(lo) >= t {
            return Ok(0.0);
        }
        // value(lo) < t <= value(hi)
        for _ in 0..400 {
            if hi - lo <= INVERSE_RTOL * hi {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if self.value(mid) >= t {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(hi)
    }

    /// Sampled convexity and monotonicity check on a log-spaced grid.
    pub fn is_convex_sampled(&self, t_min: f64, t_max: f64, count: usize) -> bool {
        let mut ts = vec![0.0];
        ts.extend(log_grid(t_min, t_max, count));
        let vals: Vec<f64> = ts.iter().map(|&t| self.value(t)).collect();
        if vals[0] != 0.0 {
            return false;
        }
        for i in 1..ts.len() {
            if vals[i] < vals[i - 1] {
                return false;
            }
        }
        for i in 1..ts.len() - 1 {
            let s1 = (vals[i] - vals[i - 1]) / (ts[i] - ts[i - 1]);
            let s2 = (vals[i + 1] - vals[i]) / (ts[i + 1] - ts[i]);
            if s2 < s1 * (1.0 - 1e-9) - 1e-300 {
                return false;
            }
        }
        true
    }
}

/// `count` log-spaced points from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => vec![],
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            (0..count)
                .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp())
                .collect()
        }
    }
}

/// Cartesian product of two log grids as `(s, t)` pairs.
pub fn pair_grid(s: (f64, f64), t: (f64, f64), count: usize) -> Vec<(f64, f64)> {
    let ss = log_grid(s.0, s.1, count);
    let ts = log_grid(t.0, t.1, count);
    ss.iter()
        .flat_map(|&a| ts.iter().map(move |&b| (a, b)))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TypeSide {
    Lower,
    Upper,
}

/// Smallest empirical constant `C` with `Φ(st) ≤ C s^p Φ(t)` on the samples.
pub fn check_type(phi: &YoungFn, p: f64, side: TypeSide, samples: &[(f64, f64)]) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    let mut worst = 0.0_f64;
    for &(s, t) in samples {
        let ok = match side {
            TypeSide::Lower => s > 0.0 && s <= 1.0,
            TypeSide::Upper => s >= 1.0,
        };
        if !ok || !(t > 0.0) {
            return Err(Error::Domain(format!("sample (s={s}, t={t}) invalid for {side:?} type")));
        }
        let ratio = phi.value(s * t) / (s.powf(p) * phi.value(t));
        worst = worst.max(ratio);
    }
    Ok(worst)
}

/// Smallest empirical constant `C` with `Φ(st) ≤ C Φ(s) Φ(t)` on the samples.
pub fn check_submultiplicative(phi: &YoungFn, samples: &[(f64, f64)]) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    let mut worst = 0.0_f64;
    for &(s, t) in samples {
        if !(s > 0.0 && t > 0.0) {
            return Err(Error::Domain(format!("sample (s={s}, t={t}) must be positive")));
        }
        worst = worst.max(phi.value(s * t) / (phi.value(s) * phi.value(t)));
    }
    Ok(worst)
}

/// Empirical membership data for the family of submultiplicative Young
/// functions of lower type `r` with `Φ(t)/t^r ≤ C0 (log t)^δ` for `t ≥ t*`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrCertificate {
    pub r: f64,
    pub c0: f64,
    pub delta: f64,
    pub t_star: f64,
    pub submult_const: f64,
    pub lower_type_const: f64,
}

const FR_T_MAX: f64 = 1e6;
const FR_DELTA_STEP: f64 = 0.125;
const FR_DELTA_MAX: f64 = 8.0;

/// Fits an `F_r` certificate on a log-spaced sample of `[t_star, 10⁶]`.
///
/// δ is the smallest value on a 1/8 ladder for which `Φ(t)/(t^r (log t)^δ)`
/// stops growing across the top decade; `C0` is the sampled maximum of that
/// ratio.
pub fn certify_fr(phi: &YoungFn, r: f64, t_star: f64) -> Result<FrCertificate> {
    if r < 1.0 {
        return Err(Error::InvalidParameter(format!("r = {r} < 1")));
    }
    if !(t_star >= std::f64::consts::E) || t_star >= FR_T_MAX {
        return Err(Error::InvalidParameter(format!(
            "t_star = {t_star} must lie in [e, 1e6)"
        )));
    }
    let ts = log_grid(t_star, FR_T_MAX, 241);
    let top: Vec<f64> = ts.iter().copied().filter(|&t| t >= FR_T_MAX / 10.0).collect();
    let ratio = |t: f64, d: f64| phi.value(t) / (t.powf(r) * t.ln().powf(d));

    let mut delta = None;
    let steps = (FR_DELTA_MAX / FR_DELTA_STEP).round() as usize;
    for i in 0..=steps {
        let d = i as f64 * FR_DELTA_STEP;
        let vals: Vec<f64> = top.iter().map(|&t| ratio(t, d)).collect();
        let growing = vals.windows(2).all(|w| w[1] > w[0] * (1.0 + 1e-12));
        if !growing {
            delta = Some(d);
            break;
        }
    }
    let delta = delta.ok_or_else(|| {
        Error::NotInFr(format!(
            "Φ(t)/(t^{r} (log t)^δ) grows across the top decade for every δ ≤ {FR_DELTA_MAX}"
        ))
    })?;
    let c0 = ts.iter().map(|&t| ratio(t, delta)).fold(0.0, f64::max);
    let submult_const = check_submultiplicative(phi, &pair_grid((1e-3, 1e3), (1e-3, 1e3), 25))?;
    let lower_type_const = check_type(phi, r, TypeSide::Lower, &pair_grid((1e-3, 1.0), (1e-3, 1e3), 25))?;
    Ok(FrCertificate {
        r,
        c0,
        delta,
        t_star,
        submult_const,
        lower_type_const,
    })
}

/// Tightest sampled `(A, B)` with `A Ψ(t) ≤ Φ(t) ≤ B Ψ(t)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Equivalence {
    pub lower: f64,
    pub upper: f64,
}

impl Equivalence {
    pub fn is_finite(&self) -> bool {
        self.lower > 0.0 && self.upper.is_finite()
    }
}

/// Equivalence constants on log-spaced `t ∈ [max(t0, 10⁻⁶), max(t0, 1)·10⁶]`.
pub fn check_equivalence(phi: &YoungFn, psi: &YoungFn, t0: f64) -> Result<Equivalence> {
    check_equivalence_range(phi, psi, t0, t0.max(1.0) * 1e6)
}

/// As [`check_equivalence`] with an explicit upper end of the sample range.
pub fn check_equivalence_range(phi: &YoungFn, psi: &YoungFn, t0: f64, t_max: f64) -> Result<Equivalence> {
    if !(t0 >= 0.0) {
        return Err(Error::Domain(format!("t0 = {t0}")));
    }
    let lo = t0.max(1e-6);
    let mut lower = f64::INFINITY;
    let mut upper = 0.0_f64;
    for t in log_grid(lo, t_max.max(lo), 400) {
        let (a, b) = (phi.value(t), psi.value(t));
        if a == 0.0 && b == 0.0 {
            continue;
        }
        let q = a / b;
        lower = lower.min(q);
        upper = upper.max(q);
    }
    if lower == f64::INFINITY {
        return Err(Error::EmptySamples);
    }
    Ok(Equivalence { lower, upper })
}

/// Parameters of the fractional estimate in the range `r < p < n/γ`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Thm3Params {
    pub q: f64,
    pub sigma: f64,
    pub nu: f64,
    pub beta: f64,
    pub xi: YoungFn,
    pub eta: YoungFn,
    /// Sampled range of `ξ⁻¹(t) t^{γ/n} / Φ⁻¹(t)` over `t ≥ 1`.
    pub inverse_ratio: (f64, f64),
}

/// `1/r'` with the convention `1/r' = 0` at `r = 1`.
pub fn conjugate_reciprocal(r: f64) -> f64 {
    1.0 - 1.0 / r
}

fn check_fractional_range(n: usize, r: f64, delta: f64, gamma: f64) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParameter("dimension must be positive".into()));
    }
    if r < 1.0 || delta < 0.0 {
        return Err(Error::InvalidParameter(format!("need r >= 1, delta >= 0 (r = {r}, delta = {delta})")));
    }
    let nf = n as f64;
    if !(gamma > 0.0 && gamma < nf / r) {
        return Err(Error::InvalidParameter(format!("need 0 < gamma < n/r (gamma = {gamma})")));
    }
    Ok(())
}

pub fn thm3_params(n: usize, r: f64, delta: f64, gamma: f64, p: f64) -> Result<Thm3Params> {
    check_fractional_range(n, r, delta, gamma)?;
    let nf = n as f64;
    if !(p > r && p < nf / gamma) {
        return Err(Error::InvalidParameter(format!(
            "need r < p < n/gamma (r = {r}, p = {p}, n/gamma = {})",
            nf / gamma
        )));
    }
    let q = 1.0 / (1.0 / p - gamma / nf);
    let sigma = nf * r / (nf - r * gamma);
    let nu = nf * delta / (nf - r * gamma);
    let rc = conjugate_reciprocal(r);
    let beta = q / sigma * (1.0 / p + rc);
    if !(beta > 1.0) {
        return Err(Error::InvalidParameter(format!("beta = {beta} is not > 1")));
    }
    let xi = YoungFn::spliced(YoungFn::power(q / beta), YoungFn::llogl(sigma, nu), 1.0)?;
    let eta = YoungFn::llogl(q / p + q * rc, nu);
    let phi = YoungFn::llogl(r, delta);
    let mut lo = f64::INFINITY;
    let mut hi = 0.0_f64;
    for t in log_grid(1.0, 1e12, 121) {
        let ratio = xi.gen_inverse(t)? * t.powf(gamma / nf) / phi.gen_inverse(t)?;
        lo = lo.min(ratio);
        hi = hi.max(ratio);
    }
    if !(hi / lo <= 10.0) {
        return Err(Error::InvalidParameter(format!(
            "inverse condition not satisfied on samples: ratio range [{lo}, {hi}]"
        )));
    }
    Ok(Thm3Params {
        q,
        sigma,
        nu,
        beta,
        xi,
        eta,
        inverse_ratio: (lo, hi),
    })
}

/// Parameters of the endpoint fractional estimate `p = r`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Thm4Params {
    pub q: f64,
    pub nu: f64,
    pub xi: YoungFn,
    pub eta: YoungFn,
    pub phi_mod: YoungFn,
    pub psi_w: YoungFn,
    pub phi_gamma: YoungFn,
    /// Sampled sup of `t Φ_γ(t^{γq/(nr)}) / φ(t)`.
    pub outer_ratio: f64,
}

pub fn thm4_params(n: usize, r: f64, delta: f64, gamma: f64) -> Result<Thm4Params> {
    check_fractional_range(n, r, delta, gamma)?;
    let nf = n as f64;
    let q = 1.0 / (1.0 / r - gamma / nf);
    let nu = delta * q / r;
    let xi = YoungFn::llogl(q, nu);
    let eta = xi.clone();
    let phi_mod = YoungFn::powered(YoungFn::llogl(1.0, delta), q / r);
    let log_exp = nf * delta / (nf - r * gamma);
    let psi_w = YoungFn::scaled_log(r, log_exp, 1.0 - q / r);
    let phi_gamma = YoungFn::llogl(r, delta + delta * r * gamma / (nf - r * gamma));

    let mut outer_ratio = 0.0_f64;
    for t in log_grid(1e-6, 1e6, 241) {
        let lhs = xi.value(t.powf(r / q));
        let rhs = phi_gamma.value(t);
        if lhs > rhs * (1.0 + 1e-12) {
            return Err(Error::InvalidParameter(format!(
                "xi(t^(r/q)) <= Phi_gamma(t) fails at t = {t}: {lhs} > {rhs}"
            )));
        }
        let outer = t * phi_gamma.value(t.powf(gamma * q / (nf * r))) / phi_mod.value(t);
        outer_ratio = outer_ratio.max(outer);
    }
    Ok(Thm4Params {
        q,
        nu,
        xi,
        eta,
        phi_mod,
        psi_w,
        phi_gamma,
        outer_ratio,
    })
}

/// `(1 + 1/x)^{x/(1+x)}` for `x > 0`, `1` at `x = 0`.
pub fn ratio_lemma_f(x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::Domain(format!("x = {x} must be nonnegative")));
    }
    if x == 0.0 {
        return Ok(1.0);
    }
    if x.is_infinite() {
        return Ok(1.0);
    }
    Ok((x / (1.0 + x) * (1.0 / x).ln_1p()).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    #[test]
    fn eval_closed_forms() {
        assert_eq!(YoungFn::power(2.0).eval(3.0).unwrap(), 9.0);
        assert_eq!(YoungFn::llogl(1.0, 0.0).eval(5.0).unwrap(), 5.0);
        let v = YoungFn::llogl(1.0, 1.0).eval(E).unwrap();
        assert!((v - 2.0 * E).abs() < 1e-12);
        assert!((v - 5.43656).abs() < 1e-5);
    }

    #[test]
    fn eval_rejects_negative() {
        assert!(matches!(YoungFn::power(2.0).eval(-1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn scaled_log_matches_llogl_at_unit_scale() {
        let a = YoungFn::scaled_log(2.0, 1.5, 1.0);
        let b = YoungFn::llogl(2.0, 1.5);
        for t in log_grid(1e-3, 1e3, 31) {
            assert!((a.value(t) - b.value(t)).abs() <= 1e-12 * b.value(t));
        }
        // negative s moves the log factor below 1
        let c = YoungFn::scaled_log(1.0, 1.0, -1.0);
        assert!((c.value(0.5) - 0.5 * (1.0 + 2f64.ln())).abs() < 1e-14);
        assert_eq!(c.value(4.0), 4.0);
    }

    #[test]
    fn inverse_of_power_is_root() {
        for &r in &[1.0, 1.5, 2.0, 3.0] {
            let phi = YoungFn::power(r);
            for t in log_grid(1e-4, 1e6, 21) {
                let got = phi.gen_inverse(t).unwrap();
                assert!((got - t.powf(1.0 / r)).abs() <= 1e-10 * t.powf(1.0 / r));
            }
        }
        assert_eq!(YoungFn::llogl(1.0, 1.0).gen_inverse(0.0).unwrap(), 0.0);
    }

    #[test]
    fn inverse_of_llogl_2_1_at_10() {
        let phi = YoungFn::llogl(2.0, 1.0);
        let v = phi.gen_inverse(10.0).unwrap();
        let back = phi.value(v);
        assert!((10.0 * (1.0 - 1e-8)..=10.0 * (1.0 + 1e-8)).contains(&back));
        let closed = 10f64.sqrt() * (1.0 + 10f64.ln()).powf(-0.5);
        let ratio = v / closed;
        assert!(ratio > 0.5 && ratio < 2.0, "ratio {ratio}");
    }

    #[test]
    fn type_checks() {
        let lower = pair_grid((1e-3, 1.0), (0.1, 100.0), 20);
        assert!((check_type(&YoungFn::power(2.0), 2.0, TypeSide::Lower, &lower).unwrap() - 1.0).abs() < 1e-12);
        let c = check_type(&YoungFn::llogl(2.0, 1.0), 2.0, TypeSide::Lower, &lower).unwrap();
        assert!(c.is_finite() && c >= 1.0);

        // upper type 1 fails for L log L: the constant grows with the grid
        let phi = YoungFn::llogl(1.0, 1.0);
        let small = check_type(&phi, 1.0, TypeSide::Upper, &pair_grid((1.0, 1e3), (0.1, 10.0), 20)).unwrap();
        let large = check_type(&phi, 1.0, TypeSide::Upper, &pair_grid((1.0, 1e9), (0.1, 10.0), 20)).unwrap();
        assert!(large > 1.5 * small, "{small} vs {large}");
        // upper type 1.1 stays bounded
        let a = check_type(&phi, 1.1, TypeSide::Upper, &pair_grid((1.0, 1e3), (0.1, 10.0), 20)).unwrap();
        let b = check_type(&phi, 1.1, TypeSide::Upper, &pair_grid((1.0, 1e9), (0.1, 10.0), 20)).unwrap();
        assert!(b <= a * 1.1, "{a} vs {b}");
    }

    #[test]
    fn type_check_errors() {
        assert!(matches!(
            check_type(&YoungFn::power(2.0), 2.0, TypeSide::Lower, &[]),
            Err(Error::EmptySamples)
        ));
        assert!(check_type(&YoungFn::power(2.0), 2.0, TypeSide::Lower, &[(2.0, 1.0)]).is_err());
        assert!(check_submultiplicative(&YoungFn::power(2.0), &[]).is_err());
    }

    #[test]
    fn submultiplicativity() {
        let grid = pair_grid((1e-2, 1e2), (1e-2, 1e2), 15);
        assert!((check_submultiplicative(&YoungFn::power(3.0), &grid).unwrap() - 1.0).abs() < 1e-12);
        let c = check_submultiplicative(
            &YoungFn::llogl(1.0, 1.0),
            &pair_grid((E.powi(-2), E.powi(4)), (E.powi(-2), E.powi(4)), 30),
        )
        .unwrap();
        assert!(c >= 1.0 && c.is_finite());
        let coarse = check_submultiplicative(&YoungFn::llogl(2.0, 2.0), &pair_grid((1e-3, 1e3), (1e-3, 1e3), 20)).unwrap();
        let fine = check_submultiplicative(&YoungFn::llogl(2.0, 2.0), &pair_grid((1e-3, 1e3), (1e-3, 1e3), 80)).unwrap();
        assert!((fine - coarse).abs() <= 0.05 * coarse, "{coarse} vs {fine}");
    }

    #[test]
    fn fr_certificates() {
        let c = certify_fr(&YoungFn::llogl(1.0, 0.0), 1.0, E).unwrap();
        assert_eq!(c.delta, 0.0);
        assert!((c.c0 - 1.0).abs() < 1e-12);

        let c = certify_fr(&YoungFn::llogl(2.0, 1.0), 2.0, E).unwrap();
        assert_eq!(c.delta, 1.0);
        assert!(c.c0 >= 1.0 && c.c0 <= c.submult_const.max(2.0) + 1e-9, "{c:?}");

        assert!(matches!(
            certify_fr(&YoungFn::power(2.0), 1.0, E),
            Err(Error::NotInFr(_))
        ));
        assert!(certify_fr(&YoungFn::power(2.0), 2.0, 1.0).is_err());
    }

    #[test]
    fn equivalence() {
        let phi = YoungFn::llogl(1.0, 1.0);
        assert_eq!(check_equivalence(&phi, &phi, 0.0).unwrap(), Equivalence { lower: 1.0, upper: 1.0 });
        let spliced = YoungFn::spliced(YoungFn::power(1.0), YoungFn::llogl(1.0, 1.0), 1.0).unwrap();
        let e = check_equivalence(&phi, &spliced, 1.0).unwrap();
        assert_eq!((e.lower, e.upper), (1.0, 1.0));

        // t² against t²(1+log t): the lower constant collapses as the range grows
        let a = YoungFn::llogl(2.0, 0.0);
        let b = YoungFn::llogl(2.0, 1.0);
        let short = check_equivalence_range(&a, &b, 1.0, 1e3).unwrap();
        let long = check_equivalence_range(&a, &b, 1.0, 1e12).unwrap();
        assert!(long.lower < 0.5 * short.lower);
    }

    #[test]
    fn splice_must_be_continuous() {
        assert!(YoungFn::spliced(YoungFn::power(2.0), YoungFn::power(1.0), 2.0).is_err());
        assert!(YoungFn::spliced(YoungFn::power(2.0), YoungFn::power(1.0), 1.0).is_ok());
    }

    #[test]
    fn thm3_substitutions() {
        let p = thm3_params(1, 1.0, 0.0, 0.5, 4.0 / 3.0).unwrap();
        assert!((p.q - 4.0).abs() < 1e-12);
        assert!((p.sigma - 2.0).abs() < 1e-12);
        assert_eq!(p.nu, 0.0);
        assert!((p.beta - 1.5).abs() < 1e-12);
        assert!((p.eta.value(2.0) - 8.0).abs() < 1e-12);

        let p = thm3_params(2, 1.0, 1.0, 1.0, 4.0 / 3.0).unwrap();
        assert!((p.q - 4.0).abs() < 1e-12);
        assert!((p.sigma - 2.0).abs() < 1e-12);
        assert!((p.nu - 2.0).abs() < 1e-12);
        assert!((p.beta - 1.5).abs() < 1e-12);

        assert!(thm3_params(1, 2.0, 0.0, 0.25, 2.0).is_err());
        assert!(thm3_params(1, 1.0, 0.0, 1.5, 1.2).is_err());
    }

    #[test]
    fn thm4_substitutions() {
        let p = thm4_params(1, 1.0, 0.0, 0.5).unwrap();
        assert!((p.q - 2.0).abs() < 1e-12);
        assert!((p.xi.value(3.0) - 9.0).abs() < 1e-12);
        assert!((p.phi_mod.value(3.0) - 9.0).abs() < 1e-12);

        let p = thm4_params(2, 2.0, 1.0, 0.5).unwrap();
        assert!((p.q - 4.0).abs() < 1e-12);
        assert!((p.nu - 2.0).abs() < 1e-12);

        let p = thm4_params(1, 1.0, 1.0, 0.5).unwrap();
        assert!((p.q - 2.0).abs() < 1e-12);
        for t in log_grid(1.0, 1e6, 200) {
            assert!(p.xi.value(t.sqrt()) <= p.phi_gamma.value(t) * (1.0 + 1e-12));
        }
        assert!(p.outer_ratio.is_finite());
    }

    #[test]
    fn ratio_lemma_values() {
        assert_eq!(ratio_lemma_f(0.0).unwrap(), 1.0);
        assert!((ratio_lemma_f(1.0).unwrap() - 2f64.sqrt()).abs() < 1e-14);
        assert!(ratio_lemma_f(-1.0).is_err());
    }

    #[test]
    fn descriptor_json() {
        let f: YoungFn = serde_json::from_str(r#"{"kind":"llogl","r":2,"delta":1}"#).unwrap();
        assert_eq!(f, YoungFn::llogl(2.0, 1.0));
        assert!(serde_json::from_str::<YoungFn>(r#"{"kind":"llogl","r":2,"delta":1,"x":3}"#).is_err());
        let s = YoungFn::spliced(YoungFn::power(2.0), YoungFn::llogl(1.0, 1.0), 1.0).unwrap();
        let back: YoungFn = serde_json::from_str(&serde_json::to_string(&s).unwrap()).unwrap();
        assert_eq!(back, s);
    }
}
