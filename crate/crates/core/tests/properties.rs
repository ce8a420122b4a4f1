mod common;

use std::collections::BTreeSet;

use num_bigint::BigInt;
use proptest::prelude::*;
use proptest::sample::subsequence;

use common::*;
use tlbsat::fpt::{average_polynomial_assignment, bikernel, threshold_bound};
use tlbsat::kernel2sat::{insignificant_vars_by_count, k_r, AuxGraph};
use tlbsat::lin2::{gadget_assignment_to_z, z_to_spins};
use tlbsat::sample_space::SampleSpace;
use tlbsat::{
    brute_force_opt, csp_instance_to_polynomial, decide_tlb, find_witness, greedy_star_packing, insignificant_vars, instance_to_polynomial, lin2_brute_force,
    lin2_excess, lin2_to_cnf, polynomial_to_lin2, sat_count, semicomplete_reduce, switch,
    validate_instance, CnfInstance, CspConstraint, FptConfig, Lin2, Lin2System,
    LinEquation, Polynomial, Route,
};

fn clause(r: usize, n: u32) -> impl Strategy<Value = Vec<i64>> {
    (subsequence((1..=n as i64).collect::<Vec<_>>(), r), prop::collection::vec(any::<bool>(), r))
        .prop_map(|(vars, signs)| vars.into_iter().zip(signs).map(|(v, s)| if s { v } else { -v }).collect())
}

/// `(r, n, raw clauses)` with `r ∈ rs`, `r ≤ n ≤ max_n`, `1 ≤ m ≤ max_m`.
fn instance(
    rs: std::ops::RangeInclusive<usize>,
    max_n: u32,
    max_m: usize,
) -> impl Strategy<Value = (usize, u32, RawClauses)> {
    rs.prop_flat_map(move |r| (Just(r), r as u32..=max_n.max(r as u32)))
        .prop_flat_map(move |(r, n)| (Just(r), Just(n), prop::collection::vec(clause(r, n), 1..=max_m)))
}

fn build((r, n, raw): &(usize, u32, RawClauses)) -> CnfInstance {
    validate_instance(raw, *r, *n).unwrap()
}

fn cube(n: u32) -> impl Iterator<Item = Vec<bool>> {
    (0..1u64 << n).map(move |bits| mask_values(bits, n))
}

fn small_system() -> impl Strategy<Value = (usize, Lin2System<i64>)> {
    (2usize..=3, 1u32..=5).prop_flat_map(|(r, n)| {
        let eq = (subsequence((1..=n).collect::<Vec<_>>(), 1..=r.min(n as usize)), any::<bool>(), 1i64..=3)
            .prop_map(|(vars, rhs, w)| LinEquation::new(vars, rhs, w).unwrap());
        (Just(r), prop::collection::vec(eq, 1..=5))
            .prop_map(move |(r, eqs)| (r, Lin2System::new(n, eqs).unwrap()))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn switching_is_an_involution_and_keeps_the_optimum(
        inst in instance(2..=3, 6, 10),
        mask in 0u32..64,
    ) {
        let f = build(&inst);
        let vars: BTreeSet<u32> = (1..=f.n()).filter(|v| mask >> (v - 1) & 1 == 1).collect();
        let g = switch(&f, &vars);
        prop_assert_eq!(switch(&g, &vars), f.clone());
        prop_assert_eq!(g.m(), f.m());
        prop_assert_eq!(raw_opt(&to_raw(&g), g.n()), raw_opt(&inst.2, f.n()));
    }

    #[test]
    fn canonical_form_ignores_clause_and_literal_order(inst in instance(2..=4, 7, 10)) {
        let f = build(&inst);
        let shuffled: RawClauses = inst.2.iter().rev().map(|c| c.iter().rev().copied().collect()).collect();
        prop_assert_eq!(validate_instance(&shuffled, inst.0, inst.1).unwrap(), f.clone());
        let rebuilt = CnfInstance::from_clauses(f.r(), f.n(), f.clauses().map(|(c, k)| (c.clone(), k))).unwrap();
        prop_assert_eq!(rebuilt, f);
    }

    #[test]
    fn brute_force_matches_plain_enumeration(inst in instance(2..=3, 8, 12)) {
        let f = build(&inst);
        let (tau, opt) = brute_force_opt(&f, 20).unwrap();
        prop_assert_eq!(opt, raw_opt(&inst.2, f.n()));
        prop_assert_eq!(sat_count(&tau, &f), opt);
    }

    #[test]
    fn polynomial_has_zero_mean_and_bounded_degree(inst in instance(2..=4, 8, 12)) {
        let f = build(&inst);
        let poly: Polynomial = instance_to_polynomial(&f);
        let total: BigInt = cube(f.n()).map(|v| poly.evaluate(&values_to_assignment(&v))).sum();
        prop_assert_eq!(total, BigInt::from(0));
        for (key, c) in poly.terms() {
            prop_assert!(key.degree() >= 1 && key.degree() <= f.r());
            prop_assert!(*c != BigInt::from(0));
        }
    }

    #[test]
    fn csp_polynomial_of_clauses_matches_cnf_polynomial(inst in instance(2..=3, 6, 8)) {
        let f = build(&inst);
        let constraints: Vec<CspConstraint> = f
            .clauses()
            .flat_map(|(c, k)| std::iter::repeat_n(CspConstraint::from_clause(c), k as usize))
            .collect();
        let csp: Polynomial = csp_instance_to_polynomial(&constraints, f.r(), f.n()).unwrap();
        prop_assert_eq!(csp, instance_to_polynomial::<BigInt>(&f));
    }

    #[test]
    fn polynomial_text_round_trip(inst in instance(2..=4, 8, 10)) {
        let f = build(&inst);
        let poly: Polynomial = instance_to_polynomial(&f);
        prop_assert_eq!(Polynomial::parse_text(&poly.to_text(), f.r(), f.n()).unwrap(), poly);
    }

    #[test]
    fn excess_equals_polynomial_value(inst in instance(2..=3, 6, 10)) {
        let f = build(&inst);
        let poly: Polynomial = instance_to_polynomial(&f);
        prop_assume!(!poly.is_zero());
        let (sys, _) = polynomial_to_lin2(&poly, 1).unwrap();
        prop_assert_eq!(sys.total_weight(), poly.weight_sum());
        for z in cube(f.n()) {
            prop_assert_eq!(lin2_excess(&z, &sys), poly.evaluate(&z_to_spins(&z)));
        }
    }

    #[test]
    fn polynomial_lin2_and_gadget_questions_agree(inst in instance(2..=3, 6, 10), k in 1u64..=12) {
        let f = build(&inst);
        let r = f.r();
        let poly: Polynomial = instance_to_polynomial(&f);
        prop_assume!(!poly.is_zero());
        let max_x = cube(f.n()).map(|v| poly.evaluate(&values_to_assignment(&v))).max().unwrap();
        let poly_yes = max_x >= BigInt::from(k);
        let (sys, _) = polynomial_to_lin2(&poly, k).unwrap();
        let (_, best) = lin2_brute_force(&sys, 20).unwrap();
        prop_assert_eq!(BigInt::from(2) * best >= sys.total_weight() + BigInt::from(k), poly_yes);
        let (cnf, k2) = lin2_to_cnf(&sys, r, k).unwrap();
        let opt = raw_opt(&to_raw(&cnf), cnf.n());
        prop_assert_eq!(tlb_holds(opt, r, cnf.m(), k2), poly_yes);
        prop_assert_eq!(tlb_holds(raw_opt(&inst.2, f.n()), r, f.m(), k), poly_yes);
    }

    #[test]
    fn gadget_preserves_unsatisfied_counts((r, sys) in small_system()) {
        let (cnf, _) = lin2_to_cnf(&sys, r, 1).unwrap();
        prop_assert_eq!(cnf.m(), sys.total_weight() as u64 * (1 << (r - 1)));
        let raw = to_raw(&cnf);
        for values in cube(cnf.n()) {
            let z = gadget_assignment_to_z(&values_to_assignment(&values));
            let violated: i64 = sys.equations().iter().filter(|e| !e.is_satisfied(&z)).map(|e| *e.weight()).sum();
            prop_assert_eq!(cnf.m() - raw_sat(&raw, &values), violated as u64);
        }
    }

    #[test]
    fn lin2_text_round_trip((_, sys) in small_system()) {
        let big: Lin2 = Lin2System::new(
            sys.n(),
            sys.equations().iter().map(|e| LinEquation::new(e.vars().to_vec(), e.rhs(), BigInt::from(*e.weight())).unwrap()),
        ).unwrap();
        let comments = vec!["k 3".to_string(), "r 2".to_string()];
        let text = big.to_text(&comments);
        let (parsed, parsed_comments) = Lin2::parse_text(&text).unwrap();
        prop_assert_eq!(&parsed, &big);
        prop_assert_eq!(parsed_comments, comments.clone());
        prop_assert_eq!(parsed.to_text(&comments), text);
    }

    #[test]
    fn lin2_brute_force_is_exact((_, sys) in small_system()) {
        let (z, best) = lin2_brute_force(&sys, 20).unwrap();
        prop_assert_eq!(sys.satisfied_weight(&z), best);
        let w = sys.total_weight();
        let max_excess = cube(sys.n()).map(|z| lin2_excess(&z, &sys)).max().unwrap();
        prop_assert_eq!(2 * best, w + max_excess);
    }

    #[test]
    fn decision_and_witness_match_oracle(inst in instance(3..=3, 6, 10), k in 0u64..=10) {
        let f = build(&inst);
        let config = FptConfig::default();
        let d = decide_tlb(&f, k, &config).unwrap();
        let oracle = tlb_holds(raw_opt(&inst.2, f.n()), 3, f.m(), k);
        prop_assert_eq!(d.verdict.is_yes(), oracle);
        if d.route == Route::Search {
            prop_assert!(BigInt::from(d.stats.term_count) < threshold_bound(3, k));
            prop_assert!(d.stats.support_size <= 3 * d.stats.term_count);
        }
        if oracle {
            let tau = find_witness(&f, k, &d, &config).unwrap();
            let values: Vec<bool> = tau.values().iter().map(|&v| v > 0).collect();
            prop_assert!(tlb_holds(raw_sat(&inst.2, &values), 3, f.m(), k));
        }
    }

    #[test]
    fn bikernel_of_search_instances_is_small(inst in instance(2..=3, 6, 12), k in 1u64..=6) {
        let f = build(&inst);
        let bk = bikernel(&f, k).unwrap();
        if bk.route == Route::Search {
            prop_assert!(BigInt::from(bk.system.len()) < threshold_bound(f.r(), k));
            prop_assert_eq!(bk.system.n() as usize, bk.var_map.len());
        }
    }

    #[test]
    fn average_assignment_is_above_average(inst in instance(2..=5, 9, 20)) {
        let f = build(&inst);
        let poly: Polynomial = instance_to_polynomial(&f);
        let tau = average_polynomial_assignment(&poly);
        prop_assert!(poly.evaluate(&tau) >= BigInt::from(0));
    }

    #[test]
    fn reduction_removes_blocks_and_shifts_the_optimum(inst in instance(2..=2, 6, 14)) {
        let f = build(&inst);
        let red = semicomplete_reduce(&f).unwrap();
        prop_assert!(tlbsat::kernel2sat::find_semicomplete_block(&red.reduced).unwrap().is_none());
        prop_assert_eq!(red.reduced.m() + red.removed_clauses(), f.m());
        let opt = raw_opt(&inst.2, f.n());
        let opt_s = raw_opt(&to_raw(&red.reduced), f.n());
        prop_assert_eq!(red.original_sat(opt_s), opt);
    }

    #[test]
    fn returned_blocks_are_semicomplete(inst in instance(2..=2, 5, 14)) {
        let f = build(&inst);
        if let Some(block) = tlbsat::kernel2sat::find_semicomplete_block(&f).unwrap() {
            let raw: RawClauses = block.clauses.iter().map(|c| c.literals().iter().map(|l| l.to_dimacs()).collect()).collect();
            for (i, a) in raw.iter().enumerate() {
                prop_assert!(f.multiplicity(&block.clauses[i]) > 0);
                for b in &raw[i + 1..] {
                    prop_assert!(raw_conflict(a, b));
                }
            }
            for values in cube(f.n()) {
                prop_assert_eq!(raw_sat(&raw, &values), 3);
            }
        }
    }

    #[test]
    fn insignificance_characterizations_agree(inst in instance(2..=2, 6, 14)) {
        let reduced = semicomplete_reduce(&build(&inst)).unwrap().reduced;
        prop_assert_eq!(insignificant_vars(&reduced).unwrap(), insignificant_vars_by_count(&reduced));
    }

    #[test]
    fn aux_graph_edges_are_clause_pairs(inst in instance(2..=2, 6, 14)) {
        let f = build(&inst);
        let g = AuxGraph::of(&f).unwrap();
        for x in 1..=f.n() {
            for y in x + 1..=f.n() {
                let occurs = inst.2.iter().any(|c| {
                    let vs: BTreeSet<u32> = c.iter().map(|l| l.unsigned_abs() as u32).collect();
                    vs == BTreeSet::from([x, y])
                });
                prop_assert_eq!(g.has_edge(x, y), occurs);
            }
        }
    }

    #[test]
    fn k_r_is_the_conditional_average(inst in instance(2..=2, 6, 14), mask in 0u32..64) {
        let f = build(&inst);
        let g = AuxGraph::of(&f).unwrap();
        let r: BTreeSet<u32> = (1..=f.n()).filter(|v| mask >> (v - 1) & 1 == 1).collect();
        let total: u64 = cube(f.n())
            .filter(|v| r.iter().all(|&x| v[x as usize - 1]))
            .map(|v| raw_sat(&inst.2, &v))
            .sum();
        let free = f.n() as usize - r.len();
        // average = total / 2^free = (3m + k_R) / 4
        prop_assert_eq!(4 * total as i64, (1i64 << free) * (3 * f.m() as i64 + k_r(&g, &r)));
    }

    #[test]
    fn star_packings_are_disjoint_induced_stars(inst in instance(2..=2, 8, 16)) {
        let reduced = semicomplete_reduce(&build(&inst)).unwrap().reduced;
        let g = AuxGraph::of(&reduced).unwrap();
        let adj = g.g0_adjacency();
        let packing = greedy_star_packing(&g);
        let mut seen = BTreeSet::new();
        for (center, leaves) in &packing.stars {
            prop_assert!(!leaves.is_empty());
            prop_assert!(seen.insert(*center));
            for (i, y) in leaves.iter().enumerate() {
                prop_assert!(seen.insert(*y));
                prop_assert!(adj[center].contains(y));
                for z in &leaves[i + 1..] {
                    prop_assert!(!adj[y].contains(z));
                }
            }
        }
    }

    #[test]
    fn switch_assignment_meets_its_guarantee(inst in instance(2..=2, 8, 16)) {
        let reduced = semicomplete_reduce(&build(&inst)).unwrap().reduced;
        let packing = greedy_star_packing(&AuxGraph::of(&reduced).unwrap());
        let s = tlbsat::derandomized_switch_assignment(&reduced, &packing).unwrap();
        let sat = sat_count(&s.assignment, &reduced);
        prop_assert!(4 * sat as i64 - 3 * reduced.m() as i64 >= s.star_weight);
        prop_assert!(s.star_weight >= s.t as i64);
        prop_assert!(sat >= s.guaranteed_sat(reduced.m()));
    }

    #[test]
    fn bch_character_sums_vanish(n in 2usize..=12, half in 1usize..=3, subset in any::<u128>()) {
        let t = 2 * half;
        let space = SampleSpace::bch(n, t);
        let mut s: Vec<usize> = (0..n).filter(|i| subset >> i & 1 == 1).take(t).collect();
        if s.is_empty() {
            s.push(0);
        }
        prop_assert_eq!(space.character_sum(&s), 0);
    }
}

#[test]
fn k_zero_is_always_yes() {
    let f = validate_instance(&[[1i64, 2], [-1, -2]], 2, 2).unwrap();
    let d = decide_tlb(&f, 0, &FptConfig::default()).unwrap();
    assert!(d.verdict.is_yes());
    let tau = find_witness(&f, 0, &d, &FptConfig::default()).unwrap();
    assert!(sat_count(&tau, &f) * 4 >= 3 * f.m());
}
