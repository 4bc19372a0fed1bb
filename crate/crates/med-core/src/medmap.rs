//! MED for average precision at a cutoff, solved as a QUBO.
//!
//! With binary relevance, the score difference between two aligned lists is
//! a quadratic polynomial in the 0/1 variables of their shared documents
//! once judged and free slots are substituted away. Maximizing it is a
//! quadratic unconstrained binary optimization problem: small instances are
//! enumerated exactly, larger ones handed to a deterministic tabu search.
//!
//! Average precision is taken at cutoff `k` with `k` itself as the recall
//! denominator, so scores stay in `[0, 1]` without knowing the number of
//! relevant documents. All coefficients are exact rationals, scaled to
//! integers over the common denominator `k * lcm(1..k)` inside the
//! solvers, so argmax decisions never hinge on float rounding.

use num::bigint::BigInt;
use num::integer::lcm;
use num::rational::{BigRational, Rational64};
use num::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::align::{AlignedPair, Slot, VariableKind};
use crate::error::MedError;
use crate::list::DocId;
use crate::med::{Direction, MedOutcome};

/// Controls for the tabu solver. The defaults follow common practice for
/// small QUBOs: short memory, a handful of restarts, and an iteration
/// budget proportional to the variable count.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TabuParams {
    seed: u64,
    tenure: usize,
    restarts: usize,
    iterations_per_var: usize,
}

impl TabuParams {
    pub fn new(seed: u64) -> Self {
        TabuParams {
            seed,
            tenure: 7,
            restarts: 5,
            iterations_per_var: 10,
        }
    }

    pub fn with_tenure(mut self, tenure: usize) -> Result<Self, MedError> {
        if tenure == 0 {
            return Err(MedError::InvalidArgument("tabu tenure must be >= 1".into()));
        }
        self.tenure = tenure;
        Ok(self)
    }

    pub fn with_restarts(mut self, restarts: usize) -> Result<Self, MedError> {
        if restarts == 0 {
            return Err(MedError::InvalidArgument("tabu restarts must be >= 1".into()));
        }
        self.restarts = restarts;
        Ok(self)
    }

    pub fn with_iterations_per_var(mut self, iterations: usize) -> Result<Self, MedError> {
        if iterations == 0 {
            return Err(MedError::InvalidArgument(
                "tabu iterations per variable must be >= 1".into(),
            ));
        }
        self.iterations_per_var = iterations;
        Ok(self)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

/// Maximize `z^T Q z + L^T z + constant` over binary `z`.
///
/// `Q` is stored upper-triangular; squared terms are folded into `L` since
/// `z^2 = z`. Variables correspond to the pair's shared documents in rank
/// order on the A side.
#[derive(Debug, Clone)]
pub struct QuboProblem {
    num_vars: usize,
    quadratic: Vec<BigRational>,
    linear: Vec<BigRational>,
    constant: BigRational,
    var_docs: Vec<DocId>,
    var_ranks: Vec<(usize, usize)>,
    denom: BigInt,
}

enum Operand {
    Fixed(Rational64),
    Var(usize),
}

fn big(r: Rational64) -> BigRational {
    BigRational::new(BigInt::from(*r.numer()), BigInt::from(*r.denom()))
}

/// Builds the QUBO for the score difference favoring side A, over a pair
/// aligned exactly at the cutoff. Requires binary grades: free slots on A
/// become 1, free slots on B become 0, judgments keep their 0/1 value.
pub fn build_qubo(pair: &AlignedPair, k: usize) -> Result<QuboProblem, MedError> {
    if k == 0 {
        return Err(MedError::InvalidArgument("cutoff must be >= 1".into()));
    }
    if pair.depth() != k {
        return Err(MedError::InvalidArgument(format!(
            "pair depth {} must equal the cutoff {k}",
            pair.depth()
        )));
    }

    let bound = pair.bound_pairs();
    let num_vars = bound.len();
    let var_docs: Vec<DocId> = bound
        .iter()
        .map(|&(a_rank, _)| {
            pair.side_a()[a_rank - 1]
                .doc
                .clone()
                .expect("bound slots always hold a document")
        })
        .collect();

    for side in [pair.side_a(), pair.side_b()] {
        for slot in side {
            if let VariableKind::Predetermined { grade } = &slot.kind {
                if !(grade.is_zero() || grade.is_one()) {
                    return Err(MedError::InvalidMeasure(format!(
                        "average precision needs binary judgments, got grade {grade}"
                    )));
                }
            }
        }
    }
    let operands = |side: &[Slot], favored: bool, by_a: bool| -> Vec<Operand> {
        side.iter()
            .enumerate()
            .map(|(i, slot)| match &slot.kind {
                VariableKind::Free => {
                    Operand::Fixed(Rational64::from_integer(i64::from(favored)))
                }
                VariableKind::Predetermined { grade } => Operand::Fixed(*grade),
                VariableKind::Bound { .. } => {
                    let rank = i + 1;
                    let idx = bound
                        .iter()
                        .position(|&(a, b)| if by_a { a == rank } else { b == rank })
                        .expect("bound rank is indexed");
                    Operand::Var(idx)
                }
            })
            .collect()
    };
    let side_a = operands(pair.side_a(), true, true);
    let side_b = operands(pair.side_b(), false, false);

    let mut quadratic = vec![BigRational::zero(); num_vars * num_vars];
    let mut linear = vec![BigRational::zero(); num_vars];
    let mut constant = BigRational::zero();

    for (side, positive) in [(&side_a, true), (&side_b, false)] {
        for i in 1..=k {
            for j in 1..=i {
                let mut coef = BigRational::new(BigInt::one(), BigInt::from((k * i) as i64));
                if !positive {
                    coef = -coef;
                }
                match (&side[i - 1], &side[j - 1]) {
                    (Operand::Fixed(u), Operand::Fixed(v)) => {
                        constant += coef * big(*u) * big(*v);
                    }
                    (Operand::Fixed(u), Operand::Var(z)) | (Operand::Var(z), Operand::Fixed(u)) => {
                        linear[*z] += coef * big(*u);
                    }
                    (Operand::Var(z1), Operand::Var(z2)) => {
                        if z1 == z2 {
                            linear[*z1] += coef;
                        } else {
                            let (lo, hi) = (*z1.min(z2), *z1.max(z2));
                            quadratic[lo * num_vars + hi] += coef;
                        }
                    }
                }
            }
        }
    }

    // Every coefficient is a signed sum of 1/(k*i) terms for i <= k, so
    // k * lcm(1..k) clears all denominators at once.
    let mut denom = BigInt::one();
    for i in 2..=k as u64 {
        denom = lcm(denom, BigInt::from(i));
    }
    denom *= BigInt::from(k as u64);

    Ok(QuboProblem {
        num_vars,
        quadratic,
        linear,
        constant,
        var_docs,
        var_ranks: bound,
        denom,
    })
}

impl QuboProblem {
    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    /// Quadratic coefficient for variables `i < j` (0-based).
    pub fn quadratic(&self, i: usize, j: usize) -> &BigRational {
        assert!(i < j && j < self.num_vars);
        &self.quadratic[i * self.num_vars + j]
    }

    pub fn linear(&self, i: usize) -> &BigRational {
        &self.linear[i]
    }

    pub fn constant(&self) -> &BigRational {
        &self.constant
    }

    pub fn var_docs(&self) -> &[DocId] {
        &self.var_docs
    }

    /// Ranks `(in A, in B)` of each variable's document.
    pub fn var_ranks(&self) -> &[(usize, usize)] {
        &self.var_ranks
    }

    /// Exact objective value for an assignment.
    pub fn objective(&self, z: &[bool]) -> BigRational {
        assert_eq!(z.len(), self.num_vars);
        let mut total = self.constant.clone();
        for (i, &zi) in z.iter().enumerate() {
            if !zi {
                continue;
            }
            total += &self.linear[i];
            for (j, &zj) in z.iter().enumerate().skip(i + 1) {
                if zj {
                    total += &self.quadratic[i * self.num_vars + j];
                }
            }
        }
        total
    }

    /// Plain-text dump for debugging: a header line with the variable count
    /// and the constant term, one line per linear coefficient, then one
    /// `i j value` line (1-based) per nonzero quadratic coefficient.
    pub fn dump(&self) -> String {
        use std::fmt::Write;
        let mut out = String::new();
        let _ = writeln!(out, "{} {}", self.num_vars, self.constant);
        for l in &self.linear {
            let _ = writeln!(out, "{l}");
        }
        for i in 0..self.num_vars {
            for j in (i + 1)..self.num_vars {
                let q = &self.quadratic[i * self.num_vars + j];
                if !q.is_zero() {
                    let _ = writeln!(out, "{} {} {q}", i + 1, j + 1);
                }
            }
        }
        out
    }

    /// Integer view over the common denominator; exact by construction.
    fn scaled(&self) -> ScaledQubo {
        let scale = |r: &BigRational| -> BigInt {
            let scaled = r * BigRational::new(self.denom.clone(), BigInt::one());
            debug_assert!(scaled.is_integer(), "coefficient does not divide the scale");
            scaled.to_integer()
        };
        ScaledQubo {
            num_vars: self.num_vars,
            quadratic: self.quadratic.iter().map(&scale).collect(),
            linear: self.linear.iter().map(&scale).collect(),
            constant: scale(&self.constant),
        }
    }

    fn value_from_scaled(&self, scaled: BigInt) -> BigRational {
        BigRational::new(scaled, self.denom.clone())
    }
}

struct ScaledQubo {
    num_vars: usize,
    quadratic: Vec<BigInt>,
    linear: Vec<BigInt>,
    constant: BigInt,
}

impl ScaledQubo {
    /// `linear[i] + sum_j Q(i, j) * z_j`: the objective change of setting
    /// `z_i` from 0 to 1 with the rest of `z` fixed.
    fn activation(&self, i: usize, z: &[bool]) -> BigInt {
        let mut d = self.linear[i].clone();
        for (j, &zj) in z.iter().enumerate() {
            if j != i && zj {
                let (lo, hi) = (i.min(j), i.max(j));
                d += &self.quadratic[lo * self.num_vars + hi];
            }
        }
        d
    }

    fn objective(&self, z: &[bool]) -> BigInt {
        let mut total = self.constant.clone();
        for (i, &zi) in z.iter().enumerate() {
            if !zi {
                continue;
            }
            total += &self.linear[i];
            for (j, &zj) in z.iter().enumerate().skip(i + 1) {
                if zj {
                    total += &self.quadratic[i * self.num_vars + j];
                }
            }
        }
        total
    }
}

/// Enumeration limit for the exact solver.
pub const EXACT_VAR_LIMIT: usize = 20;

/// Exhaustively maximizes a QUBO with at most [`EXACT_VAR_LIMIT`] variables.
/// Ties return the lexicographically smallest assignment.
pub fn solve_exact(q: &QuboProblem) -> Result<(Vec<bool>, BigRational), MedError> {
    let n = q.num_vars;
    if n > EXACT_VAR_LIMIT {
        return Err(MedError::TooLarge(format!(
            "{n} binary variables exceed the exact enumeration limit of {EXACT_VAR_LIMIT}"
        )));
    }
    let s = q.scaled();
    let mut z = vec![false; n];
    let mut val = s.constant.clone();
    let mut best = z.clone();
    let mut best_val = val.clone();
    // Gray-code walk: step t flips bit trailing_zeros(t), changing one
    // variable at a time.
    for t in 1u64..(1u64 << n) {
        let b = t.trailing_zeros() as usize;
        let d = s.activation(b, &z);
        if z[b] {
            val -= d;
        } else {
            val += d;
        }
        z[b] = !z[b];
        if val > best_val || (val == best_val && z < best) {
            best_val = val.clone();
            best = z.clone();
        }
    }
    Ok((best, q.value_from_scaled(best_val)))
}

/// Tabu search over single-bit flips: best admissible move each iteration,
/// a recency tabu of `tenure` iterations with aspiration on new incumbents,
/// seeded restarts. The first restart begins with a greedy ascent from the
/// all-zero assignment, so the result is never worse than that local
/// optimum. The trajectory is a pure function of the instance and the seed.
pub fn solve_tabu(q: &QuboProblem, params: &TabuParams) -> (Vec<bool>, BigRational) {
    let n = q.num_vars;
    if n == 0 {
        return (Vec::new(), q.constant.clone());
    }
    let s = q.scaled();
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let iterations = params.iterations_per_var * n;

    let mut best: Option<(BigInt, Vec<bool>)> = None;
    for restart in 0..params.restarts {
        let mut z: Vec<bool> = if restart == 0 {
            vec![false; n]
        } else {
            (0..n).map(|_| rng.random::<bool>()).collect()
        };
        // activations[i] tracks linear[i] + sum_j Q(i,j) z_j under the
        // current assignment; the gain of flipping i follows from z[i].
        let mut activations: Vec<BigInt> = (0..n).map(|i| s.activation(i, &z)).collect();
        let mut val = s.objective(&z);
        let gain = |acts: &[BigInt], z: &[bool], i: usize| -> BigInt {
            if z[i] {
                -acts[i].clone()
            } else {
                acts[i].clone()
            }
        };
        let flip = |z: &mut Vec<bool>, acts: &mut Vec<BigInt>, val: &mut BigInt, i: usize| {
            let g = if z[i] {
                -acts[i].clone()
            } else {
                acts[i].clone()
            };
            *val += g;
            let delta_on = !z[i];
            z[i] = !z[i];
            for (j, act) in acts.iter_mut().enumerate() {
                if j == i {
                    continue;
                }
                let (lo, hi) = (i.min(j), i.max(j));
                let coupling = &s.quadratic[lo * n + hi];
                if delta_on {
                    *act += coupling;
                } else {
                    *act -= coupling;
                }
            }
        };

        if restart == 0 {
            // Greedy ascent: take the best strictly improving flip until a
            // local optimum.
            loop {
                let mut pick: Option<(usize, BigInt)> = None;
                for i in 0..n {
                    let g = gain(&activations, &z, i);
                    if g.is_positive() && pick.as_ref().is_none_or(|(_, pg)| g > *pg) {
                        pick = Some((i, g));
                    }
                }
                match pick {
                    Some((i, _)) => flip(&mut z, &mut activations, &mut val, i),
                    None => break,
                }
            }
        }
        if best.as_ref().is_none_or(|(bv, _)| val > *bv) {
            best = Some((val.clone(), z.clone()));
        }

        let mut tabu_until = vec![0usize; n];
        for iter in 0..iterations {
            let best_val = &best.as_ref().expect("incumbent is set").0;
            let mut pick: Option<(usize, BigInt)> = None;
            for (i, &until) in tabu_until.iter().enumerate() {
                let g = gain(&activations, &z, i);
                let aspires = &val + &g > *best_val;
                if until > iter && !aspires {
                    continue;
                }
                if pick.as_ref().is_none_or(|(_, pg)| g > *pg) {
                    pick = Some((i, g));
                }
            }
            // Every move can be tabu without aspiration; take the one whose
            // tabu expires first so the walk stays deterministic.
            let (i, _) = pick.unwrap_or_else(|| {
                let i = (0..n).min_by_key(|&i| (tabu_until[i], i)).expect("n > 0");
                (i, gain(&activations, &z, i))
            });
            flip(&mut z, &mut activations, &mut val, i);
            tabu_until[i] = iter + params.tenure + 1;
            if val > best.as_ref().expect("incumbent is set").0 {
                best = Some((val.clone(), z.clone()));
            }
        }
    }

    let (val, z) = best.expect("at least one restart runs");
    (z, q.value_from_scaled(val))
}

/// Average precision at cutoff `k` of a relevance vector, with `k` as the
/// recall denominator: `(1/k) * sum_i (c_i / i) * sum_{j<=i} c_j`.
pub fn map_score(relevance: &[f64], k: usize) -> f64 {
    let mut prefix = 0.0;
    let mut total = 0.0;
    for i in 1..=k {
        let c = relevance.get(i - 1).copied().unwrap_or(0.0);
        prefix += c;
        total += c * prefix / i as f64;
    }
    total / k as f64
}

/// Reference evaluation of the A-favoring score difference for an explicit
/// assignment of the shared-document variables, computed directly from the
/// substituted relevance vectors in exact arithmetic. Exists to cross-check
/// [`build_qubo`]'s polynomial expansion.
pub fn map_diff_exact(
    pair: &AlignedPair,
    k: usize,
    z: &[bool],
) -> Result<BigRational, MedError> {
    if pair.depth() != k {
        return Err(MedError::InvalidArgument(format!(
            "pair depth {} must equal the cutoff {k}",
            pair.depth()
        )));
    }
    if z.len() != pair.bound_pairs().len() {
        return Err(MedError::InvalidArgument(format!(
            "assignment has {} entries for {} shared documents",
            z.len(),
            pair.bound_pairs().len()
        )));
    }
    let bound = pair.bound_pairs();
    let vector = |side: &[Slot], favored: bool, by_a: bool| -> Vec<BigRational> {
        side.iter()
            .enumerate()
            .map(|(i, slot)| match &slot.kind {
                VariableKind::Free => {
                    if favored {
                        BigRational::one()
                    } else {
                        BigRational::zero()
                    }
                }
                VariableKind::Predetermined { grade } => big(*grade),
                VariableKind::Bound { .. } => {
                    let rank = i + 1;
                    let idx = bound
                        .iter()
                        .position(|&(a, b)| if by_a { a == rank } else { b == rank })
                        .expect("bound rank is indexed");
                    if z[idx] {
                        BigRational::one()
                    } else {
                        BigRational::zero()
                    }
                }
            })
            .collect()
    };
    let score = |c: &[BigRational]| -> BigRational {
        let mut prefix = BigRational::zero();
        let mut total = BigRational::zero();
        for i in 1..=k {
            prefix += &c[i - 1];
            total += &c[i - 1] * &prefix / BigRational::new(BigInt::from(i as i64), BigInt::one());
        }
        total / BigRational::new(BigInt::from(k as i64), BigInt::one())
    };
    let a = vector(pair.side_a(), true, true);
    let b = vector(pair.side_b(), false, false);
    Ok(score(&a) - score(&b))
}

fn witness_vectors(pair: &AlignedPair, q: &QuboProblem, z: &[bool]) -> (Vec<f64>, Vec<f64>) {
    let side = |slots: &[Slot], favored: bool, by_a: bool| -> Vec<f64> {
        slots
            .iter()
            .enumerate()
            .map(|(i, slot)| match &slot.kind {
                VariableKind::Free => {
                    if favored {
                        1.0
                    } else {
                        0.0
                    }
                }
                VariableKind::Predetermined { grade } => crate::list::ratio_to_f64(*grade),
                VariableKind::Bound { .. } => {
                    let rank = i + 1;
                    let idx = q
                        .var_ranks
                        .iter()
                        .position(|&(a, b)| if by_a { a == rank } else { b == rank })
                        .expect("bound rank is indexed");
                    if z[idx] {
                        1.0
                    } else {
                        0.0
                    }
                }
            })
            .collect()
    };
    (
        side(pair.side_a(), true, true),
        side(pair.side_b(), false, false),
    )
}

/// MED for average precision at cutoff `k`. The pair must be aligned at
/// exactly `k` with binary judgments. Instances with at most
/// [`EXACT_VAR_LIMIT`] shared documents are solved exactly; larger ones use
/// the tabu search in `params`.
pub fn med_map(pair: &AlignedPair, k: usize, params: &TabuParams) -> Result<MedOutcome, MedError> {
    let solve = |p: &AlignedPair| -> Result<(BigRational, Vec<f64>, Vec<f64>), MedError> {
        let q = build_qubo(p, k)?;
        let (z, value) = if q.num_vars() <= EXACT_VAR_LIMIT {
            solve_exact(&q)?
        } else {
            solve_tabu(&q, params)
        };
        let (wa, wb) = witness_vectors(p, &q, &z);
        Ok((value, wa, wb))
    };
    let (forward, fwd_a, fwd_b) = solve(pair)?;
    let (backward, bwd_b, bwd_a) = solve(&pair.swapped())?;
    Ok(if backward > forward {
        MedOutcome {
            value: backward.to_f64().expect("ratio of in-range ints"),
            direction: Direction::B,
            witness_a: bwd_a,
            witness_b: bwd_b,
            epsilon: None,
        }
    } else {
        MedOutcome {
            value: forward.to_f64().expect("ratio of in-range ints"),
            direction: Direction::A,
            witness_a: fwd_a,
            witness_b: fwd_b,
            epsilon: None,
        }
    })
}
