//! Resolution-independent descriptors of test functions and weights.
//!
//! Descriptors are evaluated at cell centers in absolute coordinates, so the
//! same descriptor can be rebuilt on a finer mesh or a larger box. Lattice
//! based functions are constant on cubes of side `2^lattice_level` and are
//! therefore reproduced exactly by every mesh with cells at least that fine.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::{DomainBox, MeshFn};

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|c| c * c).sum::<f64>().sqrt()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum WeightSpec {
    /// `c`.
    Const { c: f64 },
    /// `|x|^β`.
    Power { beta: f64 },
    /// `base · factor` on the ball `|x - center| < radius`, `base` elsewhere.
    Bump {
        base: Box<WeightSpec>,
        center: Vec<f64>,
        radius: f64,
        factor: f64,
    },
    /// `base^exponent`.
    Powered { base: Box<WeightSpec>, exponent: f64 },
    /// Product of the factors.
    Product { factors: Vec<WeightSpec> },
}

impl WeightSpec {
    pub fn power(beta: f64) -> Self {
        WeightSpec::Power { beta }
    }

    pub fn constant(c: f64) -> Self {
        WeightSpec::Const { c }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            WeightSpec::Const { c } => *c,
            WeightSpec::Power { beta } => {
                if *beta == 0.0 {
                    1.0
                } else {
                    norm(x).powf(*beta)
                }
            }
            WeightSpec::Bump {
                base,
                center,
                radius,
                factor,
            } => {
                let d: Vec<f64> = x.iter().zip(center).map(|(a, b)| a - b).collect();
                let b = base.eval(x);
                if norm(&d) < *radius {
                    b * factor
                } else {
                    b
                }
            }
            WeightSpec::Powered { base, exponent } => base.eval(x).powf(*exponent),
            WeightSpec::Product { factors } => factors.iter().map(|f| f.eval(x)).product(),
        }
    }

    /// Cell-center discretization; fails unless every value is positive and finite.
    pub fn build(&self, domain: &DomainBox, mesh_level: u32) -> Result<MeshFn> {
        if let WeightSpec::Bump { center, .. } = self {
            if center.len() != domain.n {
                return Err(Error::Config(format!("bump center needs {} coordinates", domain.n)));
            }
        }
        let w = MeshFn::from_centers(domain.clone(), mesh_level, |x| self.eval(x))?;
        if !w.is_positive() {
            return Err(Error::Domain("weight must be strictly positive on every cell".into()));
        }
        Ok(w)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FnSpec {
    Zero,
    Const {
        c: f64,
    },
    /// `value` on the axis-aligned box `[lo, hi)`.
    Indicator {
        lo: Vec<f64>,
        hi: Vec<f64>,
        #[serde(default = "one")]
        value: f64,
    },
    /// Sum of `count` seeded lattice-cube indicators with heights in `(0, height]`
    /// inside the centered cube of side `2^support_level`.
    IndicatorMix {
        count: usize,
        seed: u64,
        lattice_level: i32,
        support_level: i32,
        #[serde(default = "one")]
        height: f64,
    },
    /// Independent uniform values in `[0, max)` on every lattice cube of the support.
    Random {
        seed: u64,
        lattice_level: i32,
        support_level: i32,
        #[serde(default = "one")]
        max: f64,
    },
    /// `|x|^β` on `|x| < radius`, zero outside.
    Power { beta: f64, radius: f64 },
}

fn one() -> f64 {
    1.0
}

/// Lattice cell index of `x` inside the centered support cube, if any.
fn lattice_index(x: &[f64], lattice_level: i32, support_level: i32) -> Option<usize> {
    let half = 2f64.powi(support_level - 1);
    let per_axis = 1usize << (support_level - lattice_level);
    let side = 2f64.powi(lattice_level);
    let mut idx = 0usize;
    let mut stride = 1usize;
    for &c in x {
        if c < -half || c >= half {
            return None;
        }
        let i = (((c + half) / side).floor() as usize).min(per_axis - 1);
        idx += i * stride;
        stride *= per_axis;
    }
    Some(idx)
}

fn lattice_cells(n: usize, lattice_level: i32, support_level: i32) -> Result<usize> {
    if lattice_level > support_level || support_level - lattice_level > 24 {
        return Err(Error::Config(format!(
            "lattice level {lattice_level} must be at most support level {support_level} (within 24)"
        )));
    }
    Ok((1usize << (support_level - lattice_level)).pow(n as u32))
}

impl FnSpec {
    /// Per-lattice-cell heights for the seeded kinds.
    fn lattice_values(&self, n: usize) -> Result<Vec<f64>> {
        match self {
            FnSpec::IndicatorMix {
                count,
                seed,
                lattice_level,
                support_level,
                height,
            } => {
                let cells = lattice_cells(n, *lattice_level, *support_level)?;
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let mut vals = vec![0.0; cells];
                for _ in 0..*count {
                    let i = rng.gen_range(0..cells);
                    vals[i] += height * (1.0 - rng.gen::<f64>());
                }
                Ok(vals)
            }
            FnSpec::Random {
                seed,
                lattice_level,
                support_level,
                max,
            } => {
                let cells = lattice_cells(n, *lattice_level, *support_level)?;
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                Ok((0..cells).map(|_| rng.gen::<f64>() * max).collect())
            }
            _ => Ok(vec![]),
        }
    }

    pub fn build(&self, domain: &DomainBox, mesh_level: u32) -> Result<MeshFn> {
        let n = domain.n;
        let lattice = self.lattice_values(n)?;
        if let FnSpec::Indicator { lo, hi, .. } = self {
            if lo.len() != n || hi.len() != n {
                return Err(Error::Config(format!("indicator bounds need {n} coordinates")));
            }
        }
        MeshFn::from_centers(domain.clone(), mesh_level, |x| match self {
            FnSpec::Zero => 0.0,
            FnSpec::Const { c } => *c,
            FnSpec::Indicator { lo, hi, value } => {
                if x.iter().zip(lo.iter().zip(hi)).all(|(c, (a, b))| *a <= *c && *c < *b) {
                    *value
                } else {
                    0.0
                }
            }
            FnSpec::IndicatorMix {
                lattice_level,
                support_level,
                ..
            }
            | FnSpec::Random {
                lattice_level,
                support_level,
                ..
            } => lattice_index(x, *lattice_level, *support_level)
                .map(|i| lattice[i])
                .unwrap_or(0.0),
            FnSpec::Power { beta, radius } => {
                let r = norm(x);
                if r < *radius {
                    r.powf(*beta)
                } else {
                    0.0
                }
            }
        })
    }
}
