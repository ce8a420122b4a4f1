mod common;

use rayon::prelude::*;

use common::raw_conflict;
use tlbsat::kernel2sat::find_semicomplete_block;
use tlbsat::validate_instance;

/// All 24 distinct 2-clauses over four variables.
fn all_clauses() -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    for a in 1..=4i64 {
        for b in a + 1..=4 {
            for (sa, sb) in [(1, 1), (1, -1), (-1, 1), (-1, -1)] {
                out.push(vec![sa * a, sb * b]);
            }
        }
    }
    out
}

fn has_pairwise_conflicting_quadruple(raw: &[Vec<i64>]) -> bool {
    let m = raw.len();
    for a in 0..m {
        for b in a + 1..m {
            if !raw_conflict(&raw[a], &raw[b]) {
                continue;
            }
            for c in b + 1..m {
                if !raw_conflict(&raw[a], &raw[c]) || !raw_conflict(&raw[b], &raw[c]) {
                    continue;
                }
                for d in c + 1..m {
                    if [a, b, c].iter().all(|&x| raw_conflict(&raw[x], &raw[d])) {
                        return true;
                    }
                }
            }
        }
    }
    false
}

#[test]
fn detector_agrees_with_quadruple_scan_on_all_small_formulas() {
    let clauses = all_clauses();
    let masks: Vec<u32> = (0u32..1 << 24).filter(|m| m.count_ones() <= 6).collect();
    let (with_block, total) = masks
        .par_iter()
        .map(|&mask| {
            let raw: Vec<Vec<i64>> =
                (0..24).filter(|i| mask >> i & 1 == 1).map(|i| clauses[i].clone()).collect();
            let f = validate_instance(&raw, 2, 4).unwrap();
            let found = find_semicomplete_block(&f).unwrap();
            let expected = has_pairwise_conflicting_quadruple(&raw);
            assert_eq!(found.is_some(), expected, "clauses {raw:?}");
            if let Some(block) = found {
                for c in &block.clauses {
                    assert!(f.multiplicity(c) > 0, "block clause {c} not in {raw:?}");
                }
            }
            (expected as u64, 1u64)
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    assert_eq!(total, 190_051);
    assert!(with_block > 0);
}
