//! Max-r-SAT parameterized above the tight lower bound `(1 − 2^{−r})·m`.
//!
//! The crate decides whether an exact-r CNF instance admits an assignment
//! satisfying at least `((2^r − 1)·m + k) / 2^r` clauses, and produces the
//! accompanying reductions:
//!
//! * [`fourier`]: the integer multilinear polynomial of an instance,
//! * [`fpt`]: the moment-threshold decision, witnesses, and the
//!   bikernel/kernel pipeline,
//! * [`lin2`]: weighted GF(2) systems and the clause gadget,
//! * [`kernel2sat`]: the combinatorial Max-2-SAT kernel with at most
//!   `3k − 1` variables,
//! * [`sample_space`]: small `t`-wise independent ±1 sample spaces.
//!
//! Polynomials and Lin2 systems are generic over an exact integer
//! [`Coefficient`]; the aliases below fix it to [`BigInt`] or `i64`.

pub mod formula;
pub mod fourier;
pub mod fpt;
pub mod kernel2sat;
pub mod lin2;
pub mod sample_space;
pub mod scalar;

pub use num_bigint::BigInt;

pub use formula::{
    brute_force_opt, meets_tlb, sat_count, switch, validate_instance, Assignment, Clause,
    CnfInstance, CspConstraint, FormulaError, Literal, DEFAULT_VAR_CAP,
};
pub use fourier::{
    clause_to_polynomial, csp_constraint_to_polynomial, csp_instance_to_polynomial,
    instance_to_polynomial, FourierError, MultilinearPolynomial, TermKey,
};
pub use fpt::{
    average_assignment, decide_polynomial, decide_tlb, find_witness, Decision, FptConfig,
    FptError, Route, Verdict,
};
pub use kernel2sat::{
    derandomized_switch_assignment, greedy_star_packing, insignificant_vars, kernelize_2sat,
    semicomplete_reduce, AuxGraph, Kernel2, Kernel2Error, Kernel2Outcome, StarPacking,
};
pub use lin2::{
    lin2_brute_force, lin2_excess, lin2_to_cnf, polynomial_to_lin2, LinEquation, Lin2Error,
    Lin2System,
};
pub use sample_space::{kwise_sample_space, SampleSpace};
pub use scalar::Coefficient;

/// Arbitrary-precision polynomial.
pub type Polynomial = MultilinearPolynomial<BigInt>;
/// Polynomial with machine-word coefficients, for instances with `m < 2^63`.
pub type Polynomial64 = MultilinearPolynomial<i64>;
/// Arbitrary-precision weighted system.
pub type Lin2 = Lin2System<BigInt>;
pub type Lin2_64 = Lin2System<i64>;
