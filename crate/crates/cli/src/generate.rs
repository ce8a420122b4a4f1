//! Seeded instance families.

use std::str::FromStr;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use tlbsat::formula::{MAX_ARITY, MIN_ARITY};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GenError {
    #[error("bad generator parameters: {0}")]
    BadParams(String),
    #[error("unknown family `{0}` (expected random, tight_pairs or planted)")]
    UnknownFamily(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    /// Uniform distinct-variable clauses with uniform signs.
    Random,
    /// Complete blocks over random variable sets; the polynomial is zero.
    TightPairs,
    /// Signs agree with a hidden assignment with probability `bias`.
    Planted,
}

impl Family {
    pub fn as_str(self) -> &'static str {
        match self {
            Family::Random => "random",
            Family::TightPairs => "tight_pairs",
            Family::Planted => "planted",
        }
    }
}

impl FromStr for Family {
    type Err = GenError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "random" => Ok(Family::Random),
            "tight_pairs" | "tight" => Ok(Family::TightPairs),
            "planted" => Ok(Family::Planted),
            other => Err(GenError::UnknownFamily(other.into())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenParams {
    pub family: Family,
    pub r: usize,
    pub n: u32,
    pub m: usize,
    pub seed: u64,
    pub bias: f64,
}

/// Raw clauses of the requested family, deterministic in `seed`.
pub fn generate(p: &GenParams) -> Result<Vec<Vec<i64>>, GenError> {
    let bad = |msg: String| Err(GenError::BadParams(msg));
    if !(MIN_ARITY..=MAX_ARITY).contains(&p.r) {
        return bad(format!("r must be in {MIN_ARITY}..={MAX_ARITY}, got {}", p.r));
    }
    if (p.n as usize) < p.r {
        return bad(format!("need n ≥ r, got n = {} and r = {}", p.n, p.r));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let pick_vars = |rng: &mut ChaCha8Rng| -> Vec<i64> {
        let mut vars: Vec<i64> = sample(rng, p.n as usize, p.r).into_iter().map(|i| i as i64 + 1).collect();
        vars.sort_unstable();
        vars
    };
    match p.family {
        Family::Random => Ok((0..p.m)
            .map(|_| {
                let vars = pick_vars(&mut rng);
                vars.into_iter().map(|v| if rng.gen_bool(0.5) { v } else { -v }).collect()
            })
            .collect()),
        Family::TightPairs => {
            let block = 1usize << p.r;
            if !p.m.is_multiple_of(block) {
                return bad(format!("tight_pairs needs m divisible by 2^r = {block}, got {}", p.m));
            }
            let mut out = Vec::with_capacity(p.m);
            for _ in 0..p.m / block {
                let vars = pick_vars(&mut rng);
                for pattern in 0..block {
                    out.push(
                        vars.iter()
                            .enumerate()
                            .map(|(j, &v)| if pattern >> j & 1 == 1 { -v } else { v })
                            .collect(),
                    );
                }
            }
            Ok(out)
        }
        Family::Planted => {
            if !(0.0..=1.0).contains(&p.bias) {
                return bad(format!("bias must be in [0, 1], got {}", p.bias));
            }
            let hidden: Vec<bool> = (0..p.n).map(|_| rng.gen_bool(0.5)).collect();
            Ok((0..p.m)
                .map(|_| {
                    let vars = pick_vars(&mut rng);
                    vars.into_iter()
                        .map(|v| {
                            let agree = rng.gen_bool(p.bias);
                            let positive = hidden[v as usize - 1] == agree;
                            if positive {
                                v
                            } else {
                                -v
                            }
                        })
                        .collect()
                })
                .collect())
        }
    }
}
