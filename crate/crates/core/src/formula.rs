//! Exact-r CNF instances, truth assignments and satisfaction counting.
//!
//! Instances are multisets: identical clauses are merged and carry a
//! multiplicity, and every count in this crate is multiplicity-weighted.
//! Truth values are `+1` (true) and `-1` (false) throughout.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rayon::prelude::*;
use thiserror::Error;

/// Smallest supported clause width.
pub const MIN_ARITY: usize = 2;
/// Largest supported clause width.
pub const MAX_ARITY: usize = 10;
/// Default variable ceiling for exhaustive search.
pub const DEFAULT_VAR_CAP: u32 = 28;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormulaError {
    #[error("clause {clause} has {found} distinct variables, expected {expected}")]
    ClauseSizeMismatch {
        clause: usize,
        found: usize,
        expected: usize,
    },
    #[error("clause {clause} contains variable {var} and its negation")]
    ComplementaryPair { clause: usize, var: u32 },
    #[error("clause {clause} mentions variable {var} outside 1..={n}")]
    VariableOutOfRange { clause: usize, var: i64, n: u32 },
    #[error("clause width {0} is outside the supported range {MIN_ARITY}..={MAX_ARITY}")]
    UnsupportedArity(usize),
    #[error("{n} variables exceed the exhaustive-search cap of {cap}")]
    TooLarge { n: u32, cap: u32 },
    #[error("assignment covers {got} variables, instance needs {need}")]
    AssignmentTooShort { got: usize, need: u32 },
}

/// A variable or its negation. Variables are 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    var: u32,
    negated: bool,
}

impl Literal {
    pub fn new(var: u32, positive: bool) -> Self {
        assert!(var >= 1, "variables are 1-based");
        Literal {
            var,
            negated: !positive,
        }
    }

    pub fn positive(var: u32) -> Self {
        Self::new(var, true)
    }

    pub fn negative(var: u32) -> Self {
        Self::new(var, false)
    }

    /// Decodes a DIMACS literal (`3` is x3, `-3` is its negation).
    pub fn from_dimacs(lit: i64) -> Option<Self> {
        if lit == 0 || lit.unsigned_abs() > u32::MAX as u64 {
            return None;
        }
        Some(Self::new(lit.unsigned_abs() as u32, lit > 0))
    }

    pub fn to_dimacs(self) -> i64 {
        if self.negated {
            -(self.var as i64)
        } else {
            self.var as i64
        }
    }

    pub fn var(self) -> u32 {
        self.var
    }

    pub fn is_positive(self) -> bool {
        !self.negated
    }

    /// `+1` for a positive literal, `-1` for a negated one.
    pub fn sign(self) -> i8 {
        if self.negated {
            -1
        } else {
            1
        }
    }

    pub fn complement(self) -> Self {
        Literal {
            var: self.var,
            negated: !self.negated,
        }
    }

    /// Whether the literal is made true by a variable taking `value` (±1).
    pub fn is_satisfied_by(self, value: i8) -> bool {
        value == self.sign()
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negated {
            write!(f, "-x{}", self.var)
        } else {
            write!(f, "x{}", self.var)
        }
    }
}

/// A set of literals over distinct variables, sorted by variable index.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Clause {
    literals: Vec<Literal>,
}

impl Clause {
    /// Builds a clause from arbitrary literals, removing repeats. Returns the
    /// offending variable if a complementary pair is present.
    pub fn new(literals: impl IntoIterator<Item = Literal>) -> Result<Self, u32> {
        let mut literals: Vec<Literal> = literals.into_iter().collect();
        literals.sort();
        literals.dedup();
        for pair in literals.windows(2) {
            if pair[0].var == pair[1].var {
                return Err(pair[0].var);
            }
        }
        Ok(Clause { literals })
    }

    pub fn literals(&self) -> &[Literal] {
        &self.literals
    }

    pub fn len(&self) -> usize {
        self.literals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.literals.is_empty()
    }

    pub fn vars(&self) -> impl Iterator<Item = u32> + '_ {
        self.literals.iter().map(|l| l.var)
    }

    pub fn literal_of(&self, var: u32) -> Option<Literal> {
        self.literals
            .binary_search_by_key(&var, |l| l.var)
            .ok()
            .map(|i| self.literals[i])
    }

    pub fn is_satisfied(&self, tau: &Assignment) -> bool {
        self.literals
            .iter()
            .any(|l| l.is_satisfied_by(tau.value(l.var)))
    }

    /// Two clauses conflict if one contains the complement of a literal of the other.
    pub fn conflicts_with(&self, other: &Clause) -> bool {
        self.literals
            .iter()
            .any(|l| other.literal_of(l.var) == Some(l.complement()))
    }

    fn switched(&self, vars: &BTreeSet<u32>) -> Clause {
        let literals = self
            .literals
            .iter()
            .map(|&l| if vars.contains(&l.var) { l.complement() } else { l })
            .collect();
        Clause { literals }
    }

    /// Applies a variable relabelling; the caller guarantees it keeps the
    /// variables of this clause distinct.
    pub(crate) fn renamed(&self, map: impl Fn(u32) -> u32) -> Result<Clause, u32> {
        Clause::new(
            self.literals
                .iter()
                .map(|l| Literal::new(map(l.var), l.is_positive())),
        )
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.literals.iter().map(|l| l.to_string()).collect();
        write!(f, "({})", parts.join(" v "))
    }
}

/// A total map from variables `1..=n` to `±1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Assignment {
    values: Vec<i8>,
}

impl Assignment {
    pub fn all_true(n: u32) -> Self {
        Assignment {
            values: vec![1; n as usize],
        }
    }

    /// Panics if any value is not ±1.
    pub fn from_values(values: Vec<i8>) -> Self {
        assert!(
            values.iter().all(|&v| v == 1 || v == -1),
            "assignment values must be +1 or -1"
        );
        Assignment { values }
    }

    pub fn from_bools(values: impl IntoIterator<Item = bool>) -> Self {
        Assignment {
            values: values.into_iter().map(|b| if b { 1 } else { -1 }).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Value of a variable; panics if `var` is outside `1..=len`.
    pub fn value(&self, var: u32) -> i8 {
        self.values[var as usize - 1]
    }

    pub fn set(&mut self, var: u32, value: i8) {
        debug_assert!(value == 1 || value == -1);
        self.values[var as usize - 1] = value;
    }

    pub fn flip(&mut self, var: u32) {
        self.values[var as usize - 1] *= -1;
    }

    pub fn values(&self) -> &[i8] {
        &self.values
    }

    /// Signed DIMACS-style rendering: `v` for true, `-v` for false.
    pub fn to_dimacs(&self) -> Vec<i64> {
        self.values
            .iter()
            .enumerate()
            .map(|(i, &v)| (i as i64 + 1) * v as i64)
            .collect()
    }

    /// Pads with `+1` up to `n` variables.
    pub fn extended_to(mut self, n: u32) -> Self {
        if self.values.len() < n as usize {
            self.values.resize(n as usize, 1);
        }
        self
    }
}

/// A constraint given by the set of ±1 vectors on its scope that satisfy it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CspConstraint {
    scope: Vec<u32>,
    satisfying: BTreeSet<Vec<i8>>,
}

impl CspConstraint {
    /// Returns `None` if the scope repeats a variable or mentions variable 0,
    /// or if a satisfying vector has the wrong length or a non-±1 entry.
    pub fn new(scope: Vec<u32>, satisfying: impl IntoIterator<Item = Vec<i8>>) -> Option<Self> {
        let distinct: BTreeSet<u32> = scope.iter().copied().collect();
        if distinct.len() != scope.len() || distinct.contains(&0) {
            return None;
        }
        let satisfying: BTreeSet<Vec<i8>> = satisfying.into_iter().collect();
        let well_formed = satisfying
            .iter()
            .all(|v| v.len() == scope.len() && v.iter().all(|&x| x == 1 || x == -1));
        well_formed.then_some(CspConstraint { scope, satisfying })
    }

    /// The constraint "at least one literal true" of a clause.
    pub fn from_clause(clause: &Clause) -> Self {
        let scope: Vec<u32> = clause.vars().collect();
        let width = scope.len();
        let satisfying = (0u32..1 << width)
            .map(|mask| {
                (0..width)
                    .map(|j| if mask >> j & 1 == 1 { -1 } else { 1 })
                    .collect::<Vec<i8>>()
            })
            .filter(|v| {
                clause
                    .literals()
                    .iter()
                    .zip(v)
                    .any(|(l, &x)| l.is_satisfied_by(x))
            })
            .collect();
        CspConstraint { scope, satisfying }
    }

    pub fn scope(&self) -> &[u32] {
        &self.scope
    }

    pub fn satisfying(&self) -> &BTreeSet<Vec<i8>> {
        &self.satisfying
    }

    pub fn is_satisfied(&self, tau: &Assignment) -> bool {
        let point: Vec<i8> = self.scope.iter().map(|&v| tau.value(v)).collect();
        self.satisfying.contains(&point)
    }
}

/// A multiset of clauses, each with exactly `r` literals, over variables `1..=n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CnfInstance {
    r: usize,
    n: u32,
    clauses: BTreeMap<Clause, u64>,
    m: u64,
}

impl CnfInstance {
    /// An instance with no clauses.
    pub fn empty(r: usize, n: u32) -> Result<Self, FormulaError> {
        check_arity(r)?;
        Ok(CnfInstance {
            r,
            n,
            clauses: BTreeMap::new(),
            m: 0,
        })
    }

    /// Builds an instance from already-formed clauses, checking widths and range.
    pub fn from_clauses(
        r: usize,
        n: u32,
        clauses: impl IntoIterator<Item = (Clause, u64)>,
    ) -> Result<Self, FormulaError> {
        let mut inst = Self::empty(r, n)?;
        for (idx, (clause, mult)) in clauses.into_iter().enumerate() {
            if clause.len() != r {
                return Err(FormulaError::ClauseSizeMismatch {
                    clause: idx,
                    found: clause.len(),
                    expected: r,
                });
            }
            if let Some(var) = clause.vars().find(|&v| v > n) {
                return Err(FormulaError::VariableOutOfRange {
                    clause: idx,
                    var: var as i64,
                    n,
                });
            }
            inst.add(clause, mult);
        }
        Ok(inst)
    }

    fn add(&mut self, clause: Clause, mult: u64) {
        if mult == 0 {
            return;
        }
        *self.clauses.entry(clause).or_insert(0) += mult;
        self.m += mult;
    }

    pub(crate) fn remove_one(&mut self, clause: &Clause) {
        let count = self
            .clauses
            .get_mut(clause)
            .expect("removing a clause that is not present");
        *count -= 1;
        if *count == 0 {
            self.clauses.remove(clause);
        }
        self.m -= 1;
    }

    pub fn r(&self) -> usize {
        self.r
    }

    /// Size of the variable universe.
    pub fn n(&self) -> u32 {
        self.n
    }

    /// Number of clauses counted with multiplicity.
    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn is_empty(&self) -> bool {
        self.m == 0
    }

    /// Distinct clauses with their multiplicities, in canonical order.
    pub fn clauses(&self) -> impl Iterator<Item = (&Clause, u64)> + '_ {
        self.clauses.iter().map(|(c, &k)| (c, k))
    }

    pub fn distinct_clauses(&self) -> usize {
        self.clauses.len()
    }

    pub fn multiplicity(&self, clause: &Clause) -> u64 {
        self.clauses.get(clause).copied().unwrap_or(0)
    }

    /// Variables that occur in some clause.
    pub fn occurring_vars(&self) -> BTreeSet<u32> {
        self.clauses.keys().flat_map(|c| c.vars()).collect()
    }

    /// Same clauses over a larger variable universe.
    pub fn with_universe(&self, n: u32) -> Self {
        assert!(n >= self.n, "universe can only grow");
        CnfInstance { n, ..self.clone() }
    }
}

fn check_arity(r: usize) -> Result<(), FormulaError> {
    if (MIN_ARITY..=MAX_ARITY).contains(&r) {
        Ok(())
    } else {
        Err(FormulaError::UnsupportedArity(r))
    }
}

/// Validates raw DIMACS-style clauses into a canonical instance.
///
/// Each raw clause is a list of signed variable indices. Repeated literals are
/// collapsed, so `[1, 1]` counts as a single distinct variable.
pub fn validate_instance<C: AsRef<[i64]>>(
    raw: &[C],
    r: usize,
    n: u32,
) -> Result<CnfInstance, FormulaError> {
    let mut inst = CnfInstance::empty(r, n)?;
    for (idx, lits) in raw.iter().enumerate() {
        let lits = lits.as_ref();
        let mut parsed = Vec::with_capacity(lits.len());
        for &lit in lits {
            match Literal::from_dimacs(lit) {
                Some(l) if l.var <= n => parsed.push(l),
                _ => {
                    return Err(FormulaError::VariableOutOfRange {
                        clause: idx,
                        var: lit,
                        n,
                    })
                }
            }
        }
        let clause =
            Clause::new(parsed).map_err(|var| FormulaError::ComplementaryPair { clause: idx, var })?;
        if clause.len() != r {
            return Err(FormulaError::ClauseSizeMismatch {
                clause: idx,
                found: clause.len(),
                expected: r,
            });
        }
        inst.add(clause, 1);
    }
    Ok(inst)
}

fn check_assignment(tau: &Assignment, f: &CnfInstance) {
    assert!(
        tau.len() >= f.n as usize,
        "assignment covers {} variables, instance needs {}",
        tau.len(),
        f.n
    );
}

/// Number of clauses (with multiplicity) satisfied by `tau`.
pub fn sat_count(tau: &Assignment, f: &CnfInstance) -> u64 {
    check_assignment(tau, f);
    f.clauses
        .iter()
        .filter(|(c, _)| c.is_satisfied(tau))
        .map(|(_, &k)| k)
        .sum()
}

/// Clause as a pair of bitmasks (positive variables, negated variables) where
/// variable `v` of an `n`-variable universe sits at bit `n - v`.
struct MaskedClause {
    pos: u64,
    neg: u64,
    mult: u64,
}

fn masked_clauses(f: &CnfInstance) -> Vec<MaskedClause> {
    let n = f.n;
    f.clauses
        .iter()
        .map(|(c, &mult)| {
            let (mut pos, mut neg) = (0u64, 0u64);
            for l in c.literals() {
                let bit = 1u64 << (n - l.var);
                if l.is_positive() {
                    pos |= bit;
                } else {
                    neg |= bit;
                }
            }
            MaskedClause { pos, neg, mult }
        })
        .collect()
}

/// Exact optimum by exhaustive enumeration.
///
/// Assignments are visited in lexicographic order of `(τ(1), τ(2), …)` with
/// `+1` before `-1`; the first maximizer in that order is returned.
pub fn brute_force_opt(f: &CnfInstance, var_cap: u32) -> Result<(Assignment, u64), FormulaError> {
    let n = f.n;
    if n > var_cap || n > 40 {
        return Err(FormulaError::TooLarge {
            n,
            cap: var_cap.min(40),
        });
    }
    let clauses = masked_clauses(f);
    let full = if n == 0 { 0 } else { u64::MAX >> (64 - n) };
    // Counter bit set means false; counter order is the lexicographic order.
    let score = |counter: u64| -> u64 {
        let truth = !counter & full;
        clauses
            .iter()
            .filter(|c| truth & c.pos != 0 || counter & c.neg != 0)
            .map(|c| c.mult)
            .sum()
    };
    let total = 1u64 << n;
    let block_bits = n.saturating_sub(12);
    let blocks = 1u64 << block_bits;
    let block_len = total / blocks;
    let (best_value, best_counter) = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let start = b * block_len;
            let mut best = (score(start), start);
            for counter in start + 1..start + block_len {
                let s = score(counter);
                if s > best.0 {
                    best = (s, counter);
                }
            }
            best
        })
        .reduce(
            || (0, u64::MAX),
            |a, b| {
                if a.0 > b.0 || (a.0 == b.0 && a.1 < b.1) {
                    a
                } else {
                    b
                }
            },
        );
    let tau = Assignment::from_bools((1..=n).map(|v| best_counter >> (n - v) & 1 == 0));
    Ok((tau, best_value))
}

/// Flips the polarity of every occurrence of the variables in `vars`.
pub fn switch(f: &CnfInstance, vars: &BTreeSet<u32>) -> CnfInstance {
    let mut out = CnfInstance {
        r: f.r,
        n: f.n,
        clauses: BTreeMap::new(),
        m: 0,
    };
    for (c, &k) in &f.clauses {
        out.add(c.switched(vars), k);
    }
    out
}

/// Whether `sat · 2^r ≥ (2^r − 1)·m + k`, the tight-lower-bound question.
pub fn meets_tlb(sat: u64, r: usize, m: u64, k: u64) -> bool {
    let scale = 1u128 << r;
    sat as u128 * scale >= (scale - 1) * m as u128 + k as u128
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inst(r: usize, n: u32, raw: &[&[i64]]) -> CnfInstance {
        validate_instance(raw, r, n).unwrap()
    }

    fn complete2() -> CnfInstance {
        inst(2, 2, &[&[1, 2], &[-1, 2], &[1, -2], &[-1, -2]])
    }

    #[test]
    fn merges_identical_clauses() {
        let f = inst(2, 2, &[&[1, 2], &[2, 1]]);
        assert_eq!(f.distinct_clauses(), 1);
        assert_eq!(f.m(), 2);
        let c = Clause::new([Literal::positive(1), Literal::positive(2)]).unwrap();
        assert_eq!(f.multiplicity(&c), 2);
    }

    #[test]
    fn rejects_complementary_pair() {
        let err = validate_instance(&[[1i64, -1]], 2, 2).unwrap_err();
        assert_eq!(err, FormulaError::ComplementaryPair { clause: 0, var: 1 });
    }

    #[test]
    fn rejects_short_clause() {
        let err = validate_instance(&[vec![1i64]], 2, 2).unwrap_err();
        assert!(matches!(err, FormulaError::ClauseSizeMismatch { found: 1, .. }));
        // a repeated literal is one distinct variable
        let err = validate_instance(&[[1i64, 1]], 2, 2).unwrap_err();
        assert!(matches!(err, FormulaError::ClauseSizeMismatch { found: 1, .. }));
    }

    #[test]
    fn rejects_out_of_range_and_bad_arity() {
        assert!(matches!(
            validate_instance(&[[1i64, 3]], 2, 2),
            Err(FormulaError::VariableOutOfRange { var: 3, .. })
        ));
        assert!(matches!(
            validate_instance(&[[0i64, 1]], 2, 2),
            Err(FormulaError::VariableOutOfRange { var: 0, .. })
        ));
        assert_eq!(
            validate_instance(&[[1i64]], 1, 2).unwrap_err(),
            FormulaError::UnsupportedArity(1)
        );
    }

    #[test]
    fn counts_satisfied_clauses() {
        let f = inst(2, 2, &[&[1, 2]]);
        assert_eq!(sat_count(&Assignment::from_values(vec![1, 1]), &f), 1);
        assert_eq!(sat_count(&Assignment::from_values(vec![-1, -1]), &f), 0);
        let c = complete2();
        for v in [[1, 1], [1, -1], [-1, 1], [-1, -1]] {
            assert_eq!(sat_count(&Assignment::from_values(v.to_vec()), &c), 3);
        }
    }

    #[test]
    fn brute_force_examples() {
        let f = inst(2, 2, &[&[1, 2], &[-1, -2]]);
        let (tau, best) = brute_force_opt(&f, DEFAULT_VAR_CAP).unwrap();
        assert_eq!(best, 2);
        // lexicographically first maximizer with +1 < -1
        assert_eq!(tau.values(), &[1, -1]);

        let dup = inst(2, 2, &[&[1, 2], &[1, 2]]);
        assert_eq!(brute_force_opt(&dup, DEFAULT_VAR_CAP).unwrap().1, 2);
        assert_eq!(brute_force_opt(&complete2(), DEFAULT_VAR_CAP).unwrap().1, 3);
    }

    #[test]
    fn brute_force_cap() {
        let f = CnfInstance::empty(2, 30).unwrap();
        assert_eq!(
            brute_force_opt(&f, DEFAULT_VAR_CAP).unwrap_err(),
            FormulaError::TooLarge { n: 30, cap: 28 }
        );
        let e = CnfInstance::empty(2, 0).unwrap();
        assert_eq!(brute_force_opt(&e, DEFAULT_VAR_CAP).unwrap().1, 0);
    }

    #[test]
    fn brute_force_matches_naive_scan_on_blocks() {
        // n > 12 exercises the blocked parallel path
        let raw: Vec<Vec<i64>> = (1..=13i64)
            .map(|v| vec![-v, -(v % 13 + 1)])
            .chain([vec![1, 2]])
            .collect();
        let f = validate_instance(&raw, 2, 13).unwrap();
        let (tau, best) = brute_force_opt(&f, DEFAULT_VAR_CAP).unwrap();
        assert_eq!(sat_count(&tau, &f), best);
        let mut naive = (0, None);
        for counter in 0u32..1 << 13 {
            let t = Assignment::from_bools((1..=13).map(|v| counter >> (13 - v) & 1 == 0));
            let s = sat_count(&t, &f);
            if s > naive.0 {
                naive = (s, Some(t));
            }
        }
        assert_eq!(naive.0, best);
        assert_eq!(naive.1.unwrap(), tau);
    }

    #[test]
    fn switch_examples() {
        let f = inst(2, 2, &[&[1, 2]]);
        let g = switch(&f, &BTreeSet::from([1]));
        assert_eq!(g, inst(2, 2, &[&[-1, 2]]));
        assert_eq!(switch(&f, &BTreeSet::new()), f);
    }

    #[test]
    fn conflicts() {
        let a = Clause::new([Literal::positive(1), Literal::positive(2)]).unwrap();
        let b = Clause::new([Literal::negative(1), Literal::positive(3)]).unwrap();
        let c = Clause::new([Literal::positive(1), Literal::positive(3)]).unwrap();
        assert!(a.conflicts_with(&b));
        assert!(!a.conflicts_with(&c));
        assert!(!a.conflicts_with(&a));
    }

    #[test]
    fn csp_from_clause_excludes_only_falsifier() {
        let c = Clause::new([Literal::positive(1), Literal::negative(2)]).unwrap();
        let f = CspConstraint::from_clause(&c);
        assert_eq!(f.satisfying().len(), 3);
        assert!(!f.satisfying().contains(&vec![-1, 1]));
    }

    #[test]
    fn tlb_threshold_arithmetic() {
        // (3·4 + 1) / 4 = 3.25
        assert!(!meets_tlb(3, 2, 4, 1));
        assert!(meets_tlb(3, 2, 4, 0));
        // sat({x1x2}×2) = 2 = (6+2)/4
        assert!(meets_tlb(2, 2, 2, 2));
        assert!(!meets_tlb(2, 2, 2, 3));
    }
}
