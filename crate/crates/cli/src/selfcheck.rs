//! Small-instance property suites run from the command line.

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use tlbsat::fpt::{bikernel, threshold_bound};
use tlbsat::kernel2sat::{insignificant_vars_by_count, AuxGraph};
use tlbsat::sample_space::SampleSpace;
use tlbsat::{
    average_assignment, brute_force_opt, decide_tlb, derandomized_switch_assignment, find_witness,
    greedy_star_packing, insignificant_vars, instance_to_polynomial, kernelize_2sat,
    lin2_brute_force, lin2_to_cnf, meets_tlb, sat_count, semicomplete_reduce, validate_instance,
    Assignment, CnfInstance, FptConfig, Kernel2Outcome, Lin2System, LinEquation, Polynomial, Route,
};

use crate::generate::{generate, Family, GenParams};
use crate::report::CheckResult;

type Check = fn(&CnfInstance) -> Result<(), String>;

fn random_instance(seed: u64, r: usize, max_n: u32, max_m: usize) -> CnfInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(r as u32..=max_n);
    let m = rng.gen_range(1..=max_m);
    let raw = generate(&GenParams {
        family: Family::Random,
        r,
        n,
        m,
        seed: rng.gen(),
        bias: 0.5,
    })
    .expect("valid generator parameters");
    validate_instance(&raw, r, n).expect("generated instance is valid")
}

fn cube(n: u32) -> impl Iterator<Item = Assignment> {
    (0..1u64 << n).map(move |bits| Assignment::from_bools((0..n).map(|i| bits >> i & 1 == 1)))
}

fn opt(f: &CnfInstance) -> u64 {
    brute_force_opt(f, 24).expect("small instance").1
}

fn identity(f: &CnfInstance) -> Result<(), String> {
    let poly: Polynomial = instance_to_polynomial(f);
    let scale = 1i64 << f.r();
    for tau in cube(f.n()) {
        let expected = scale * sat_count(&tau, f) as i64 - (scale - 1) * f.m() as i64;
        if poly.evaluate(&tau) != BigInt::from(expected) {
            return Err(format!("X differs from 2^r·sat − (2^r−1)m at {:?}", tau.to_dimacs()));
        }
    }
    Ok(())
}

fn parseval(f: &CnfInstance) -> Result<(), String> {
    let poly: Polynomial = instance_to_polynomial(f);
    let sum: BigInt = cube(f.n()).map(|tau| poly.evaluate(&tau).pow(2)).sum();
    if sum != poly.l2_norm_sq() * BigInt::from(1u64 << f.n()) {
        return Err("mean of X² differs from Σc²".into());
    }
    Ok(())
}

fn decision(f: &CnfInstance) -> Result<(), String> {
    let config = FptConfig::default();
    let best = opt(f);
    for k in 0..=f.m() {
        let d = decide_tlb(f, k, &config).map_err(|e| e.to_string())?;
        let oracle = meets_tlb(best, f.r(), f.m(), k);
        if d.verdict.is_yes() != oracle {
            return Err(format!("k={k}: decision disagrees with brute force"));
        }
        if d.route == Route::Search && BigInt::from(d.stats.term_count) >= threshold_bound(f.r(), k) {
            return Err(format!("k={k}: search ran above the threshold"));
        }
        if oracle {
            let tau = find_witness(f, k, &d, &config).map_err(|e| e.to_string())?;
            if !meets_tlb(sat_count(&tau, f), f.r(), f.m(), k) {
                return Err(format!("k={k}: witness below the bound"));
            }
        }
    }
    Ok(())
}

fn bikernel_chain(f: &CnfInstance) -> Result<(), String> {
    let best = opt(f);
    for k in 1..=f.m() {
        let bk = bikernel(f, k).map_err(|e| e.to_string())?;
        let original = meets_tlb(best, f.r(), f.m(), k);
        let (_, sat_w) = lin2_brute_force(&bk.system, 24).map_err(|e| e.to_string())?;
        if (BigInt::from(2) * sat_w >= bk.system.total_weight() + BigInt::from(bk.k)) != original {
            return Err(format!("k={k}: Lin2 verdict differs"));
        }
        let (cnf, k2) = lin2_to_cnf(&bk.system, f.r(), bk.k).map_err(|e| e.to_string())?;
        if meets_tlb(opt(&cnf), cnf.r(), cnf.m(), k2) != original {
            return Err(format!("k={k}: gadget CNF verdict differs"));
        }
    }
    Ok(())
}

fn average(f: &CnfInstance) -> Result<(), String> {
    let tau = average_assignment(f).extended_to(f.n());
    if !meets_tlb(sat_count(&tau, f), f.r(), f.m(), 0) {
        return Err("average assignment below (1 − 2^−r)m".into());
    }
    Ok(())
}

fn reduction(f: &CnfInstance) -> Result<(), String> {
    let red = semicomplete_reduce(f).map_err(|e| e.to_string())?;
    if red.original_sat(opt(&red.reduced)) != opt(f) {
        return Err("sat(F) − sat(F^S) ≠ 3·blocks".into());
    }
    let via_graph = insignificant_vars(&red.reduced).map_err(|e| e.to_string())?;
    if via_graph != insignificant_vars_by_count(&red.reduced) {
        return Err("insignificance characterizations differ".into());
    }
    Ok(())
}

fn kernel2(f: &CnfInstance) -> Result<(), String> {
    let best = opt(f);
    for k in 1..=3u64 {
        let original = meets_tlb(best, 2, f.m(), k);
        let agrees = match kernelize_2sat(f, k as i64, 24).map_err(|e| e.to_string())? {
            Kernel2Outcome::Yes { .. } => original,
            Kernel2Outcome::Solved { verdict, .. } => verdict == original,
            Kernel2Outcome::Kernel(kernel) => {
                if kernel.instance.n() as u64 + 1 > 3 * k {
                    return Err(format!("k={k}: kernel has {} variables", kernel.instance.n()));
                }
                meets_tlb(opt(&kernel.instance), 2, kernel.instance.m(), k) == original
            }
        };
        if !agrees {
            return Err(format!("k={k}: kernel answer differs"));
        }
    }
    Ok(())
}

fn switching(f: &CnfInstance) -> Result<(), String> {
    let reduced = semicomplete_reduce(f).map_err(|e| e.to_string())?.reduced;
    let graph = AuxGraph::of(&reduced).map_err(|e| e.to_string())?;
    let packing = greedy_star_packing(&graph);
    let s = derandomized_switch_assignment(&reduced, &packing).map_err(|e| e.to_string())?;
    let sat = sat_count(&s.assignment, &reduced);
    if 4 * sat < 3 * reduced.m() + s.t as u64 {
        return Err(format!("4·sat − 3m below t = {}", s.t));
    }
    Ok(())
}

fn run_suite(name: &str, seed: u64, count: u64, r: usize, max_n: u32, max_m: usize, check: Check) -> CheckResult {
    let failure = (0..count)
        .into_par_iter()
        .map(|i| {
            let f = random_instance(seed.wrapping_add(i), r, max_n, max_m);
            check(&f).map_err(|e| format!("instance seed {}: {e}", seed.wrapping_add(i)))
        })
        .find_first(|res| res.is_err())
        .and_then(Result::err);
    CheckResult {
        name: name.into(),
        cases: count,
        passed: failure.is_none(),
        failure,
    }
}

fn gadget_shapes() -> CheckResult {
    let mut cases = 0;
    let mut failure = None;
    'outer: for r in 2..=4usize {
        let half = 1u64 << (r - 1);
        for s in 1..=r {
            for rhs in [false, true] {
                let eq = LinEquation::new((1..=s as u32).collect(), rhs, 1i64).unwrap();
                let sys = Lin2System::new(s as u32, [eq.clone()]).unwrap();
                let (cnf, _) = lin2_to_cnf(&sys, r, 1).unwrap();
                for tau in cube(cnf.n()) {
                    let z: Vec<bool> = tau.values().iter().map(|&v| v > 0).collect();
                    let expected = if eq.is_satisfied(&z) { half } else { half - 1 };
                    cases += 1;
                    if sat_count(&tau, &cnf) != expected {
                        failure = Some(format!("r={r} s={s} rhs={}: wrong clause count", rhs as u8));
                        break 'outer;
                    }
                }
            }
        }
    }
    CheckResult {
        name: "gadget".into(),
        cases,
        passed: failure.is_none(),
        failure,
    }
}

fn sample_spaces() -> CheckResult {
    let mut cases = 0;
    let mut failure = None;
    for (n, t) in [(6usize, 4usize), (8, 6), (9, 8)] {
        let space = SampleSpace::bch(n, t);
        for mask in 1u32..1 << n {
            if mask.count_ones() as usize > t {
                continue;
            }
            let subset: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
            cases += 1;
            if space.character_sum(&subset) != 0 {
                failure = Some(format!("n={n} t={t}: nonzero character sum on {subset:?}"));
            }
        }
    }
    CheckResult {
        name: "sample_space".into(),
        cases,
        passed: failure.is_none(),
        failure,
    }
}

/// Runs every suite on `count` instances each, starting at `seed`.
pub fn selfcheck(seed: u64, count: u64) -> Vec<CheckResult> {
    let mut out = vec![
        run_suite("identity", seed, count, 2, 8, 16, identity),
        run_suite("identity_r3", seed, count, 3, 8, 16, identity),
        run_suite("parseval", seed, count, 3, 8, 16, parseval),
        run_suite("decision", seed, count, 2, 6, 12, decision),
        run_suite("decision_r3", seed, count, 3, 6, 10, decision),
        run_suite("bikernel_chain", seed, count, 2, 5, 8, bikernel_chain),
        run_suite("average", seed, count, 4, 9, 20, average),
        run_suite("reduction", seed, count, 2, 6, 14, reduction),
        run_suite("kernel2", seed, count, 2, 6, 14, kernel2),
        run_suite("switching", seed, count, 2, 8, 16, switching),
    ];
    out.push(gadget_shapes());
    out.push(sample_spaces());
    out
}
