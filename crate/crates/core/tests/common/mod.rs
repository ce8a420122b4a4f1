#![allow(dead_code)]

//! Independent oracles and random instance generators shared by the
//! integration tests. The oracles work on raw signed-integer clause lists and
//! never call into the library's own counting code.

use rand::seq::index::sample;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

use tlbsat::{validate_instance, Assignment, CnfInstance};

pub type RawClauses = Vec<Vec<i64>>;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A uniform exact-r clause over `1..=n`.
pub fn random_clause(rng: &mut ChaCha8Rng, r: usize, n: u32) -> Vec<i64> {
    sample(rng, n as usize, r)
        .into_iter()
        .map(|i| {
            let v = i as i64 + 1;
            if rng.gen_bool(0.5) {
                v
            } else {
                -v
            }
        })
        .collect()
}

pub fn random_raw(rng: &mut ChaCha8Rng, r: usize, n: u32, m: usize) -> RawClauses {
    (0..m).map(|_| random_clause(rng, r, n)).collect()
}

/// Random instance with `r ≤ n ≤ max_n` and `1 ≤ m ≤ max_m`.
pub fn random_instance(
    rng: &mut ChaCha8Rng,
    r: usize,
    max_n: u32,
    max_m: usize,
) -> (RawClauses, CnfInstance) {
    let n = rng.gen_range(r as u32..=max_n);
    let m = rng.gen_range(1..=max_m);
    let raw = random_raw(rng, r, n, m);
    let f = validate_instance(&raw, r, n).unwrap();
    (raw, f)
}

/// 2-CNF mixing complete blocks, insignificant pairs `{xy, x̄y}` and random
/// clauses, so the reduced instance has few significant variables.
pub fn structured_2cnf(rng: &mut ChaCha8Rng, n: u32, rounds: usize) -> (RawClauses, CnfInstance) {
    let mut raw = Vec::new();
    for _ in 0..rounds {
        let c = random_clause(rng, 2, n);
        let (a, b) = (c[0].abs(), c[1].abs());
        match rng.gen_range(0..4) {
            0 => raw.extend([vec![a, b], vec![-a, b], vec![a, -b], vec![-a, -b]]),
            1 => raw.extend([vec![a, c[1]], vec![-a, c[1]]]),
            2 => {
                let d = random_clause(rng, 2, n)[0].abs();
                if d != a {
                    raw.extend([vec![a, b], vec![a, -b], vec![-a, d], vec![-a, -d]]);
                }
            }
            _ => raw.push(c),
        }
    }
    if raw.is_empty() {
        raw.push(random_clause(rng, 2, n));
    }
    let f = validate_instance(&raw, 2, n).unwrap();
    (raw, f)
}

/// `values[v − 1]` is the truth value of variable `v`.
pub fn raw_sat(raw: &[Vec<i64>], values: &[bool]) -> u64 {
    raw.iter()
        .filter(|c| c.iter().any(|&l| values[l.unsigned_abs() as usize - 1] == (l > 0)))
        .count() as u64
}

/// Truth values of mask `bits` over `n` variables: bit `v − 1` set means true.
pub fn mask_values(bits: u64, n: u32) -> Vec<bool> {
    (0..n).map(|i| bits >> i & 1 == 1).collect()
}

pub fn values_to_assignment(values: &[bool]) -> Assignment {
    Assignment::from_bools(values.iter().copied())
}

/// `max_τ sat(τ, F)` by plain enumeration.
pub fn raw_opt(raw: &[Vec<i64>], n: u32) -> u64 {
    (0..1u64 << n)
        .map(|bits| raw_sat(raw, &mask_values(bits, n)))
        .max()
        .unwrap_or(0)
}

/// `sat · 2^r ≥ (2^r − 1)·m + k`, in `i128`.
pub fn tlb_holds(sat: u64, r: usize, m: u64, k: u64) -> bool {
    let p = 1i128 << r;
    sat as i128 * p >= (p - 1) * m as i128 + k as i128
}

/// Clauses of an instance back in raw form, multiplicities expanded.
pub fn to_raw(f: &CnfInstance) -> RawClauses {
    f.clauses()
        .flat_map(|(c, mult)| {
            let lits: Vec<i64> = c.literals().iter().map(|l| l.to_dimacs()).collect();
            std::iter::repeat_n(lits, mult as usize)
        })
        .collect()
}

/// Pairwise conflict in raw form.
pub fn raw_conflict(a: &[i64], b: &[i64]) -> bool {
    a.iter().any(|&l| b.contains(&-l))
}
