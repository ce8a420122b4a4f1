//! Combinatorial kernel for Max-2-SAT above `3m/4`.
//!
//! Pipeline: strip semicomplete blocks (every assignment satisfies exactly
//! three of their four clauses), count significant variables on the reduced
//! formula, and either answer YES outright (more than `3k − 2` of them) or
//! collapse all insignificant variables into one fresh variable, leaving at
//! most `3k − 1` variables.
//!
//! The auxiliary graph also drives a constructive bound: switching along a
//! packing of induced stars of `G⁰` followed by conditional expectations
//! yields an assignment with `4·sat − 3m ≥ Σ |leaves|`.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::formula::{
    brute_force_opt, meets_tlb, sat_count, switch, Assignment, Clause, CnfInstance, FormulaError,
    Literal,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Kernel2Error {
    #[error("expected a 2-CNF instance, got clause width {0}")]
    WrongArity(usize),
    #[error("instance still contains a semicomplete block")]
    NotReduced,
    #[error("parameter must be nonnegative, got {0}")]
    InvalidK(i64),
    #[error("two insignificant variables share clause {0}")]
    InsignificantPair(String),
    #[error(transparent)]
    Formula(#[from] FormulaError),
}

fn require_2cnf(f: &CnfInstance) -> Result<(), Kernel2Error> {
    if f.r() == 2 {
        Ok(())
    } else {
        Err(Kernel2Error::WrongArity(f.r()))
    }
}

fn clause2(a: Literal, b: Literal) -> Clause {
    Clause::new([a, b]).expect("distinct variables")
}

/// Four pairwise-conflicting clauses `{ℓa, ℓā, ℓ̄b, ℓ̄b̄}`; `a = b` is the
/// complete block on two variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SemicompleteBlock {
    pub clauses: [Clause; 4],
}

impl SemicompleteBlock {
    fn new(pivot: Literal, a: u32, b: u32) -> Self {
        let np = pivot.complement();
        SemicompleteBlock {
            clauses: [
                clause2(pivot, Literal::positive(a)),
                clause2(pivot, Literal::negative(a)),
                clause2(np, Literal::positive(b)),
                clause2(np, Literal::negative(b)),
            ],
        }
    }

    pub fn vars(&self) -> BTreeSet<u32> {
        self.clauses.iter().flat_map(|c| c.vars()).collect()
    }
}

/// Partner literals of every literal, with clause multiplicities.
fn partners(f: &CnfInstance) -> BTreeMap<Literal, BTreeMap<Literal, u64>> {
    let mut out: BTreeMap<Literal, BTreeMap<Literal, u64>> = BTreeMap::new();
    for (c, mult) in f.clauses() {
        let [a, b] = [c.literals()[0], c.literals()[1]];
        *out.entry(a).or_default().entry(b).or_insert(0) += mult;
        *out.entry(b).or_default().entry(a).or_insert(0) += mult;
    }
    out
}

/// Smallest variable `a` with both `ℓa` and `ℓā` present.
fn split_partner(partners: Option<&BTreeMap<Literal, u64>>) -> Option<u32> {
    let ps = partners?;
    ps.keys()
        .find(|l| l.is_positive() && ps.contains_key(&l.complement()))
        .map(|l| l.var())
}

/// Finds a semicomplete block of a 2-CNF instance.
///
/// Literals are scanned in canonical order; for the first pivot `ℓ` whose
/// partners include some `a, ā` while those of `ℓ̄` include some `b, b̄`,
/// the block with the smallest such `a` and `b` is returned.
pub fn find_semicomplete_block(f: &CnfInstance) -> Result<Option<SemicompleteBlock>, Kernel2Error> {
    require_2cnf(f)?;
    let partners = partners(f);
    for (&pivot, ps) in &partners {
        if !pivot.is_positive() {
            continue;
        }
        let Some(a) = split_partner(Some(ps)) else { continue };
        if let Some(b) = split_partner(partners.get(&pivot.complement())) {
            return Ok(Some(SemicompleteBlock::new(pivot, a, b)));
        }
    }
    Ok(None)
}

/// Result of deleting semicomplete blocks until none is left.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reduction {
    pub reduced: CnfInstance,
    pub blocks: u64,
}

impl Reduction {
    /// Clauses removed, `4 · blocks`.
    pub fn removed_clauses(&self) -> u64 {
        4 * self.blocks
    }

    /// `sat(F) = sat(F^S) + 3 · blocks`.
    pub fn original_sat(&self, reduced_sat: u64) -> u64 {
        reduced_sat + 3 * self.blocks
    }
}

/// Semicomplete reduction `F ↦ F^S`.
///
/// Deleting clauses never creates a block, so one pass over the pivots,
/// exhausting each before moving on, reaches the fixed point.
pub fn semicomplete_reduce(f: &CnfInstance) -> Result<Reduction, Kernel2Error> {
    require_2cnf(f)?;
    let mut reduced = f.clone();
    let mut blocks = 0;
    let pivots: Vec<u32> = f.occurring_vars().into_iter().collect();
    for var in pivots {
        let pivot = Literal::positive(var);
        loop {
            let ps = partners(&reduced);
            let a = split_partner(ps.get(&pivot));
            let b = split_partner(ps.get(&pivot.complement()));
            let (Some(a), Some(b)) = (a, b) else { break };
            for c in &SemicompleteBlock::new(pivot, a, b).clauses {
                reduced.remove_one(c);
            }
            blocks += 1;
        }
    }
    Ok(Reduction { reduced, blocks })
}

/// Weighted auxiliary graph on `var(F)`:
/// `w(x) = c(x) − c(x̄)` and `w(xy) = c(xȳ) + c(x̄y) − c(xy) − c(x̄ȳ)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuxGraph {
    vertices: BTreeMap<u32, i64>,
    edges: BTreeMap<(u32, u32), i64>,
}

impl AuxGraph {
    /// The graph of any 2-CNF instance, reduced or not.
    pub fn of(f: &CnfInstance) -> Result<Self, Kernel2Error> {
        require_2cnf(f)?;
        let mut vertices: BTreeMap<u32, i64> = BTreeMap::new();
        let mut edges: BTreeMap<(u32, u32), i64> = BTreeMap::new();
        for (c, mult) in f.clauses() {
            let mult = mult as i64;
            let [a, b] = [c.literals()[0], c.literals()[1]];
            for l in [a, b] {
                *vertices.entry(l.var()).or_insert(0) += l.sign() as i64 * mult;
            }
            *edges.entry((a.var(), b.var())).or_insert(0) -= (a.sign() * b.sign()) as i64 * mult;
        }
        Ok(AuxGraph { vertices, edges })
    }

    pub fn vertices(&self) -> impl Iterator<Item = (u32, i64)> + '_ {
        self.vertices.iter().map(|(&v, &w)| (v, w))
    }

    pub fn edges(&self) -> impl Iterator<Item = ((u32, u32), i64)> + '_ {
        self.edges.iter().map(|(&e, &w)| (e, w))
    }

    pub fn vertex_weight(&self, x: u32) -> i64 {
        self.vertices.get(&x).copied().unwrap_or(0)
    }

    /// `w(xy)`, zero when the pair is not an edge.
    pub fn edge_weight(&self, x: u32, y: u32) -> i64 {
        let key = if x < y { (x, y) } else { (y, x) };
        self.edges.get(&key).copied().unwrap_or(0)
    }

    pub fn has_edge(&self, x: u32, y: u32) -> bool {
        let key = if x < y { (x, y) } else { (y, x) };
        self.edges.contains_key(&key)
    }

    /// Adjacency of `G⁰`, the graph without zero-weight edges.
    pub fn g0_adjacency(&self) -> BTreeMap<u32, BTreeSet<u32>> {
        let mut adj: BTreeMap<u32, BTreeSet<u32>> =
            self.vertices.keys().map(|&v| (v, BTreeSet::new())).collect();
        for (&(x, y), &w) in &self.edges {
            if w != 0 {
                adj.get_mut(&x).unwrap().insert(y);
                adj.get_mut(&y).unwrap().insert(x);
            }
        }
        adj
    }

    /// `w_X(Q)` for the subgraph of `G` induced by `u` after switching `x`.
    pub fn switched_weight(&self, u: &BTreeSet<u32>, x: &BTreeSet<u32>) -> i64 {
        let sign = |v: u32| if x.contains(&v) { -1 } else { 1 };
        let vertices: i64 = u.iter().map(|&v| sign(v) * self.vertex_weight(v)).sum();
        let edges: i64 = self
            .edges
            .iter()
            .filter(|((a, b), _)| u.contains(a) && u.contains(b))
            .map(|(&(a, b), &w)| sign(a) * sign(b) * w)
            .sum();
        vertices + edges
    }
}

/// [`AuxGraph::of`] restricted to reduced instances.
pub fn build_aux_graph(f: &CnfInstance) -> Result<AuxGraph, Kernel2Error> {
    if find_semicomplete_block(f)?.is_some() {
        return Err(Kernel2Error::NotReduced);
    }
    AuxGraph::of(f)
}

/// Insignificant variables of a reduced instance: isolated in `G⁰` with
/// zero vertex weight.
pub fn insignificant_vars(f: &CnfInstance) -> Result<BTreeSet<u32>, Kernel2Error> {
    let graph = build_aux_graph(f)?;
    let adj = graph.g0_adjacency();
    let via_graph: BTreeSet<u32> = graph
        .vertices()
        .filter(|&(v, w)| w == 0 && adj[&v].is_empty())
        .map(|(v, _)| v)
        .collect();
    debug_assert_eq!(via_graph, insignificant_vars_by_count(f));
    Ok(via_graph)
}

/// Insignificance by definition: `c(xy) = c(x̄y)` for every literal `y`.
pub fn insignificant_vars_by_count(f: &CnfInstance) -> BTreeSet<u32> {
    let partners = partners(f);
    f.occurring_vars()
        .into_iter()
        .filter(|&x| {
            let pos = partners.get(&Literal::positive(x));
            let neg = partners.get(&Literal::negative(x));
            let empty = BTreeMap::new();
            pos.unwrap_or(&empty) == neg.unwrap_or(&empty)
        })
        .collect()
}

/// Occurring variables that are not insignificant.
pub fn significant_vars(f: &CnfInstance) -> Result<BTreeSet<u32>, Kernel2Error> {
    let insignificant = insignificant_vars(f)?;
    Ok(f.occurring_vars()
        .into_iter()
        .filter(|v| !insignificant.contains(v))
        .collect())
}

/// A kernel `(F″, k)` equivalent to the original `(F, k)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Kernel2 {
    pub instance: CnfInstance,
    pub k: u64,
    /// Clauses deleted by the semicomplete reduction.
    pub offset_clauses: u64,
    /// `var_map[i]` is the original variable behind kernel variable `i + 1`;
    /// `None` marks the merged variable standing for all insignificant ones.
    pub var_map: Vec<Option<u32>>,
    pub significant: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Kernel2Outcome {
    /// Answered without a kernel.
    Yes { significant: usize },
    /// The kernel had more than `8^k` clauses and was solved exactly.
    Solved {
        verdict: bool,
        kernel_optimum: u64,
        kernel: Kernel2,
    },
    Kernel(Kernel2),
}

/// Kernelizes `(F, k)` for `r = 2`.
pub fn kernelize_2sat(f: &CnfInstance, k: i64, var_cap: u32) -> Result<Kernel2Outcome, Kernel2Error> {
    require_2cnf(f)?;
    if k < 0 {
        return Err(Kernel2Error::InvalidK(k));
    }
    if k == 0 {
        return Ok(Kernel2Outcome::Yes { significant: 0 });
    }
    let k = k as u64;
    let reduction = semicomplete_reduce(f)?;
    let reduced = &reduction.reduced;
    let insignificant = insignificant_vars(reduced)?;
    let significant: Vec<u32> = reduced
        .occurring_vars()
        .into_iter()
        .filter(|v| !insignificant.contains(v))
        .collect();
    if significant.len() as u64 + 2 > 3 * k {
        return Ok(Kernel2Outcome::Yes {
            significant: significant.len(),
        });
    }

    // significant variables keep their order; the merged variable comes last
    let mut rename: BTreeMap<u32, u32> = significant
        .iter()
        .enumerate()
        .map(|(i, &v)| (v, i as u32 + 1))
        .collect();
    let mut var_map: Vec<Option<u32>> = significant.iter().map(|&v| Some(v)).collect();
    let mut n = significant.len() as u32;
    if !insignificant.is_empty() {
        n += 1;
        for &v in &insignificant {
            rename.insert(v, n);
        }
        var_map.push(None);
    }
    let mut clauses = Vec::new();
    for (c, mult) in reduced.clauses() {
        let renamed = c
            .renamed(|v| rename[&v])
            .map_err(|_| Kernel2Error::InsignificantPair(c.to_string()))?;
        if renamed.len() != 2 {
            return Err(Kernel2Error::InsignificantPair(c.to_string()));
        }
        clauses.push((renamed, mult));
    }
    let kernel = Kernel2 {
        instance: CnfInstance::from_clauses(2, n, clauses)?,
        k,
        offset_clauses: reduction.removed_clauses(),
        var_map,
        significant: significant.len(),
    };
    let exceeds_guard = match 8u64.checked_pow(k as u32) {
        Some(bound) => k <= u32::MAX as u64 && kernel.instance.m() > bound,
        None => false,
    };
    if exceeds_guard {
        let (_, opt) = brute_force_opt(&kernel.instance, var_cap)?;
        let verdict = meets_tlb(opt, 2, kernel.instance.m(), k);
        return Ok(Kernel2Outcome::Solved {
            verdict,
            kernel_optimum: opt,
            kernel,
        });
    }
    Ok(Kernel2Outcome::Kernel(kernel))
}

/// Vertex-disjoint induced stars of `G⁰`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct StarPacking {
    /// `(center, leaves)`, leaves ascending.
    pub stars: Vec<(u32, Vec<u32>)>,
}

impl StarPacking {
    /// `t = Σ |I_i|`.
    pub fn leaf_count(&self) -> usize {
        self.stars.iter().map(|(_, leaves)| leaves.len()).sum()
    }

    pub fn vertices(&self) -> BTreeSet<u32> {
        self.stars
            .iter()
            .flat_map(|(c, leaves)| std::iter::once(*c).chain(leaves.iter().copied()))
            .collect()
    }
}

/// Greedy packing: centers by descending `G⁰` degree (ties by index), each
/// taking a maximal independent set of its still-unused neighbors.
pub fn greedy_star_packing(graph: &AuxGraph) -> StarPacking {
    let adj = graph.g0_adjacency();
    let mut order: Vec<u32> = adj.keys().copied().collect();
    order.sort_by_key(|v| (std::cmp::Reverse(adj[v].len()), *v));
    let mut used = BTreeSet::new();
    let mut stars = Vec::new();
    for center in order {
        if used.contains(&center) {
            continue;
        }
        let mut leaves: Vec<u32> = Vec::new();
        for &y in &adj[&center] {
            if !used.contains(&y) && leaves.iter().all(|l| !adj[&y].contains(l)) {
                leaves.push(y);
            }
        }
        if leaves.is_empty() {
            continue;
        }
        used.insert(center);
        used.extend(leaves.iter().copied());
        stars.push((center, leaves));
    }
    StarPacking { stars }
}

/// `k_R` for fixing every variable of `R` to true.
pub fn k_r(graph: &AuxGraph, r: &BTreeSet<u32>) -> i64 {
    graph.switched_weight(r, &BTreeSet::new())
}

/// `4 · P(clause satisfied)` when the fixed variables take `tau` and the
/// rest are uniform.
fn scaled_sat_probability(c: &Clause, fixed: &[Option<i8>]) -> i64 {
    let mut unsat_quarters = 4;
    for l in c.literals() {
        match fixed[l.var() as usize] {
            Some(v) if l.is_satisfied_by(v) => return 4,
            Some(_) => {}
            None => unsat_quarters /= 2,
        }
    }
    4 - unsat_quarters
}

/// Fixes the free variables in ascending order to maximize `E[sat]`.
fn complete_by_conditional_expectation(f: &CnfInstance, mut fixed: Vec<Option<i8>>) -> Assignment {
    let mut touching: BTreeMap<u32, Vec<&Clause>> = BTreeMap::new();
    for (c, _) in f.clauses() {
        for v in c.vars() {
            touching.entry(v).or_default().push(c);
        }
    }
    for v in 1..=f.n() {
        if fixed[v as usize].is_some() {
            continue;
        }
        let score = |value: i8, fixed: &mut Vec<Option<i8>>| -> i64 {
            fixed[v as usize] = Some(value);
            let s = touching
                .get(&v)
                .map(|cs| {
                    cs.iter()
                        .map(|c| scaled_sat_probability(c, fixed) * f.multiplicity(c) as i64)
                        .sum()
                })
                .unwrap_or(0);
            fixed[v as usize] = None;
            s
        };
        let plus = score(1, &mut fixed);
        let minus = score(-1, &mut fixed);
        fixed[v as usize] = Some(if minus > plus { -1 } else { 1 });
    }
    Assignment::from_values(fixed[1..].iter().map(|x| x.unwrap()).collect())
}

/// Assignment constructed from a star packing, with its guarantee.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SwitchAssignment {
    pub assignment: Assignment,
    /// Variables switched before fixing the star vertices to true.
    pub switched: BTreeSet<u32>,
    /// `w_X(Q)` after the switches, at least `t`.
    pub star_weight: i64,
    /// `t`, the packing's leaf count.
    pub t: usize,
}

impl SwitchAssignment {
    /// `⌈(3m + t)/4⌉`.
    pub fn guaranteed_sat(&self, m: u64) -> u64 {
        (3 * m + self.t as u64).div_ceil(4)
    }
}

/// Deterministic version of the random-switch argument.
///
/// 1. Switch every leaf whose star edge has negative weight.
/// 2. Decide star by star whether to switch the whole star, maximizing the
///    conditional expectation of `w_X(Q)` given earlier stars; intra-star
///    edges keep their positive sign, so the result is at least `t`.
/// 3. In `F_X` set the star vertices to true, fix the rest by conditional
///    expectations on `sat`, and undo the switch.
pub fn derandomized_switch_assignment(
    f: &CnfInstance,
    packing: &StarPacking,
) -> Result<SwitchAssignment, Kernel2Error> {
    require_2cnf(f)?;
    let graph = AuxGraph::of(f)?;
    let mut switched: BTreeSet<u32> = BTreeSet::new();
    for (center, leaves) in &packing.stars {
        for &y in leaves {
            if graph.edge_weight(*center, y) < 0 {
                switched.insert(y);
            }
        }
    }
    let sign = |v: u32, s: &BTreeSet<u32>| if s.contains(&v) { -1i64 } else { 1 };

    let star_of: BTreeMap<u32, usize> = packing
        .stars
        .iter()
        .enumerate()
        .flat_map(|(i, (c, leaves))| std::iter::once((*c, i)).chain(leaves.iter().map(move |&l| (l, i))))
        .collect();
    let members: Vec<Vec<u32>> = packing
        .stars
        .iter()
        .map(|(c, leaves)| std::iter::once(*c).chain(leaves.iter().copied()).collect())
        .collect();

    // star_sign[i] = −1 when star i is switched in phase 2
    let mut star_sign: Vec<i64> = Vec::with_capacity(members.len());
    for (i, star) in members.iter().enumerate() {
        let mut gain: i64 = star.iter().map(|&v| sign(v, &switched) * graph.vertex_weight(v)).sum();
        for &v in star {
            for (&u, &j) in &star_of {
                if j < i {
                    let w = graph.edge_weight(v, u);
                    if w != 0 {
                        gain += star_sign[j] * sign(u, &switched) * sign(v, &switched) * w;
                    }
                }
            }
        }
        star_sign.push(if gain < 0 { -1 } else { 1 });
    }
    for (i, star) in members.iter().enumerate() {
        if star_sign[i] < 0 {
            for v in star {
                if !switched.remove(v) {
                    switched.insert(*v);
                }
            }
        }
    }
    let u = packing.vertices();
    let star_weight = graph.switched_weight(&u, &switched);

    let switched_f = switch(f, &switched);
    let mut fixed: Vec<Option<i8>> = vec![None; f.n() as usize + 1];
    for &v in &u {
        fixed[v as usize] = Some(1);
    }
    let mut tau = complete_by_conditional_expectation(&switched_f, fixed);
    for &v in &switched {
        tau.flip(v);
    }
    debug_assert!(4 * sat_count(&tau, f) as i64 - 3 * f.m() as i64 >= star_weight);
    Ok(SwitchAssignment {
        assignment: tau,
        switched,
        star_weight,
        t: packing.leaf_count(),
    })
}
