//! Exact analysis of the Markov chains a machine induces on its state
//! space: recurrent-class decomposition, absorption probabilities,
//! stationary distributions, the time-averaged decision error, hitting
//! and return times, mixing times, and the ergodicization transform that
//! reconnects recurrent states to the initial state.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::dist::{DiscreteDistribution, PROB_SUM_TOL};
use crate::linalg::{norm1, DMat, LuFactors};
use crate::machine::{Decision, Machine};
use crate::math;
use crate::sparse::{SparseLu, SparseMat};

/// Residual tolerance for stationary and absorption solves.
pub const SOLVE_TOL: f64 = 1e-9;

/// Class sizes up to this use dense factorizations.
const DENSE_LIMIT: usize = 400;

/// Size cap for the dense matrix powers inside [`mixing_time`].
const MIXING_LIMIT: usize = 1024;

#[derive(Debug, Clone, PartialEq)]
pub enum MarkovError {
    DimensionMismatch { left: usize, right: usize },
    InvalidRow { row: usize, sum: f64 },
    StateOutOfRange { state: usize, n: usize },
    NotIrreducible,
    NotRecurrentClass,
    Periodic { period: usize },
    TooLarge { n: usize, limit: usize },
    Numerical { residual: f64 },
}

impl fmt::Display for MarkovError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MarkovError::DimensionMismatch { left, right } => {
                write!(f, "dimension mismatch: {left} vs {right}")
            }
            MarkovError::InvalidRow { row, sum } => {
                write!(f, "row {row} is not a probability vector (sum = {sum})")
            }
            MarkovError::StateOutOfRange { state, n } => {
                write!(f, "state {state} out of range (S = {n})")
            }
            MarkovError::NotIrreducible => write!(f, "chain is not irreducible"),
            MarkovError::NotRecurrentClass => write!(f, "state set is not a closed recurrent class"),
            MarkovError::Periodic { period } => write!(
                f,
                "chain is periodic with period {period}; lazify (half self-loop) before asking for a mixing time"
            ),
            MarkovError::TooLarge { n, limit } => {
                write!(f, "chain with {n} states exceeds the {limit}-state limit for this operation")
            }
            MarkovError::Numerical { residual } => {
                write!(f, "linear solve failed (residual = {residual})")
            }
        }
    }
}

impl core::error::Error for MarkovError {}

/// Row-stochastic sparse matrix. Rows are validated on construction:
/// entries nonnegative, each row summing to one within `1e-12`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    mat: SparseMat,
}

impl TransitionMatrix {
    pub fn from_rows(n: usize, rows: Vec<Vec<(usize, f64)>>) -> Result<Self, MarkovError> {
        if rows.len() != n {
            return Err(MarkovError::DimensionMismatch {
                left: rows.len(),
                right: n,
            });
        }
        for (i, row) in rows.iter().enumerate() {
            let mut sum = 0.0;
            let mut last: Option<usize> = None;
            for &(c, v) in row {
                if c >= n {
                    return Err(MarkovError::StateOutOfRange { state: c, n });
                }
                if let Some(prev) = last {
                    if c <= prev {
                        return Err(MarkovError::InvalidRow { row: i, sum: f64::NAN });
                    }
                }
                last = Some(c);
                if !(v >= 0.0) || !v.is_finite() {
                    return Err(MarkovError::InvalidRow { row: i, sum: f64::NAN });
                }
                sum += v;
            }
            if math::abs(sum - 1.0) > PROB_SUM_TOL {
                return Err(MarkovError::InvalidRow { row: i, sum });
            }
        }
        Ok(Self {
            mat: SparseMat::from_rows(n, rows),
        })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.mat.n()
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[(usize, f64)] {
        self.mat.row(r)
    }

    pub fn entry(&self, r: usize, c: usize) -> f64 {
        match self.row(r).binary_search_by_key(&c, |e| e.0) {
            Ok(i) => self.row(r)[i].1,
            Err(_) => 0.0,
        }
    }

    pub fn nnz(&self) -> usize {
        self.mat.nnz()
    }

    /// `mu^T P` for a distribution row vector `mu`.
    pub fn distribute(&self, mu: &[f64]) -> Vec<f64> {
        self.mat.vec_mul(mu)
    }

    pub fn to_dense(&self) -> DMat {
        let n = self.n();
        let mut d = DMat::zeros(n, n);
        for r in 0..n {
            for &(c, v) in self.row(r) {
                d.set(r, c, v);
            }
        }
        d
    }

    /// Restriction to a closed state set, re-indexed by position in
    /// `states` (which must be sorted). Errors when mass leaves the set.
    pub fn restrict(&self, states: &[usize]) -> Result<TransitionMatrix, MarkovError> {
        let mut index = BTreeMap::new();
        for (local, &s) in states.iter().enumerate() {
            index.insert(s, local);
        }
        let mut rows = Vec::with_capacity(states.len());
        for (local, &s) in states.iter().enumerate() {
            let mut row = Vec::new();
            for &(c, v) in self.row(s) {
                if v == 0.0 {
                    continue;
                }
                match index.get(&c) {
                    Some(&lc) => row.push((lc, v)),
                    None => return Err(MarkovError::NotRecurrentClass),
                }
            }
            let _ = local;
            rows.push(row);
        }
        TransitionMatrix::from_rows(states.len(), rows)
    }

    /// Lazy version `(P + I) / 2`, which is aperiodic whenever `P` is
    /// irreducible.
    pub fn lazify(&self) -> TransitionMatrix {
        let n = self.n();
        let mut rows = Vec::with_capacity(n);
        for r in 0..n {
            let mut acc: BTreeMap<usize, f64> = self.row(r).iter().map(|&(c, v)| (c, v / 2.0)).collect();
            *acc.entry(r).or_insert(0.0) += 0.5;
            rows.push(acc.into_iter().collect());
        }
        TransitionMatrix::from_rows(n, rows).expect("lazification preserves stochasticity")
    }
}

/// Transition matrix induced on a machine by an input distribution:
/// `P[i][j] = sum_x p(x) * kernel(i, x)(j)`.
pub fn induced_matrix(
    m: &Machine,
    p: &DiscreteDistribution,
) -> Result<TransitionMatrix, MarkovError> {
    if m.alphabet() != p.n() {
        return Err(MarkovError::DimensionMismatch {
            left: m.alphabet(),
            right: p.n(),
        });
    }
    let n = m.num_states();
    let mut rows = Vec::with_capacity(n);
    for s in 0..n {
        let row = m.row(s);
        let mut acc: BTreeMap<usize, f64> = BTreeMap::new();
        let mut add = |succ: &crate::machine::Succ, mass: f64| {
            if mass == 0.0 {
                return;
            }
            match succ {
                crate::machine::Succ::To(t) => *acc.entry(*t).or_insert(0.0) += mass,
                crate::machine::Succ::Random(pairs) => {
                    for &(t, q) in pairs {
                        if q > 0.0 {
                            *acc.entry(t).or_insert(0.0) += mass * q;
                        }
                    }
                }
            }
        };
        let mut override_mass = 0.0;
        for (symbol, succ) in &row.overrides {
            let px = p.prob(*symbol);
            override_mass += px;
            add(succ, px);
        }
        add(&row.default, 1.0 - override_mass);
        rows.push(acc.into_iter().filter(|&(_, v)| v != 0.0).collect());
    }
    TransitionMatrix::from_rows(n, rows)
}

/// Recurrent classes (closed strongly connected components of the
/// positive-entry graph) and transient states.
#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    /// Each class sorted ascending; classes ordered by smallest member.
    pub classes: Vec<Vec<usize>>,
    /// Sorted ascending.
    pub transient: Vec<usize>,
    /// `membership[s]` = `Some(class index)` or `None` for transient.
    pub membership: Vec<Option<usize>>,
}

impl Classification {
    pub fn is_irreducible(&self) -> bool {
        self.classes.len() == 1 && self.transient.is_empty()
    }
}

/// SCC decomposition over positive entries, followed by a closedness
/// check per component.
pub fn classify(p: &TransitionMatrix) -> Classification {
    let n = p.n();
    let adj: Vec<Vec<usize>> = (0..n)
        .map(|r| {
            p.row(r)
                .iter()
                .filter(|&&(_, v)| v > 0.0)
                .map(|&(c, _)| c)
                .collect()
        })
        .collect();
    let (comp_of, count) = crate::graph::tarjan_scc(&adj);
    let mut comps: Vec<Vec<usize>> = vec![Vec::new(); count];
    for s in 0..n {
        comps[comp_of[s]].push(s);
    }

    // a component is recurrent iff no positive edge leaves it
    let mut closed = vec![true; count];
    for v in 0..n {
        for &w in &adj[v] {
            if comp_of[w] != comp_of[v] {
                closed[comp_of[v]] = false;
            }
        }
    }

    let mut classes: Vec<Vec<usize>> = comps
        .iter()
        .zip(&closed)
        .filter(|(_, &c)| c)
        .map(|(comp, _)| comp.clone())
        .collect();
    classes.sort_by_key(|c| c[0]);

    let mut membership = vec![None; n];
    for (k, class) in classes.iter().enumerate() {
        for &s in class {
            membership[s] = Some(k);
        }
    }
    let transient: Vec<usize> = (0..n).filter(|&s| membership[s].is_none()).collect();

    Classification {
        classes,
        transient,
        membership,
    }
}

/// Stationary distribution of a closed recurrent class, indexed by
/// position within `class` (sorted). Solves the balance equations with
/// the normalization constraint replacing one of them.
pub fn stationary(p: &TransitionMatrix, class: &[usize]) -> Result<Vec<f64>, MarkovError> {
    let c = class.len();
    if c == 0 {
        return Err(MarkovError::NotRecurrentClass);
    }
    if c == 1 {
        return Ok(vec![1.0]);
    }
    let restricted = p.restrict(class)?;

    let (mut pi, _residual) = if c <= DENSE_LIMIT {
        let mut m = DMat::zeros(c, c);
        for j in 0..c {
            m.set(0, j, 1.0);
        }
        for r in 0..c {
            for &(col, v) in restricted.row(r) {
                if col == 0 {
                    continue;
                }
                let cur = m.get(col, r);
                m.set(col, r, cur + v);
            }
        }
        for i in 1..c {
            let cur = m.get(i, i);
            m.set(i, i, cur - 1.0);
        }
        let mut b = vec![0.0; c];
        b[0] = 1.0;
        let f = LuFactors::factor(&m).map_err(|_| MarkovError::Numerical { residual: f64::NAN })?;
        f.solve_refined(&b)
    } else {
        let mut rows: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); c];
        for j in 0..c {
            rows[0].insert(j, 1.0);
        }
        for r in 0..c {
            for &(col, v) in restricted.row(r) {
                if col == 0 {
                    continue;
                }
                *rows[col].entry(r).or_insert(0.0) += v;
            }
        }
        for (i, row) in rows.iter_mut().enumerate().skip(1) {
            *row.entry(i).or_insert(0.0) -= 1.0;
        }
        let sys = SparseMat::from_rows(c, rows.into_iter().map(|r| r.into_iter().collect()).collect());
        let mut b = vec![0.0; c];
        b[0] = 1.0;
        let f = SparseLu::factor(&sys).map_err(|_| MarkovError::Numerical { residual: f64::NAN })?;
        f.solve_refined(&b)
    };

    // clean tiny negatives, renormalize, and verify the balance residual
    for v in pi.iter_mut() {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    let sum: f64 = pi.iter().sum();
    if !(sum > 0.0) {
        return Err(MarkovError::Numerical { residual: f64::NAN });
    }
    for v in pi.iter_mut() {
        *v /= sum;
    }
    let residual = stationary_residual(&restricted, &pi);
    if residual > SOLVE_TOL {
        return Err(MarkovError::Numerical { residual });
    }
    Ok(pi)
}

/// l1 norm of `pi P - pi`.
pub fn stationary_residual(p: &TransitionMatrix, pi: &[f64]) -> f64 {
    let pip = p.distribute(pi);
    let diff: Vec<f64> = pip.iter().zip(pi).map(|(a, b)| a - b).collect();
    norm1(&diff)
}

/// Absorption probabilities of every transient state into every
/// recurrent class, solved through the transient block `(I - Q)`.
#[derive(Debug, Clone)]
pub struct AbsorptionSolve {
    /// Position of each state in `transient`, if transient.
    transient_pos: Vec<Option<usize>>,
    /// `probs[t][k]` for transient position `t` and class `k`.
    probs: Vec<Vec<f64>>,
    num_classes: usize,
    pub max_residual: f64,
}

impl AbsorptionSolve {
    /// `Pr(from -> R_k)` for every class `k`.
    pub fn from_state(&self, cls: &Classification, state: usize) -> Vec<f64> {
        match cls.membership[state] {
            Some(k) => {
                let mut v = vec![0.0; self.num_classes];
                v[k] = 1.0;
                v
            }
            None => {
                let t = self.transient_pos[state].expect("transient state has a position");
                self.probs[t].clone()
            }
        }
    }
}

pub fn absorption_all(
    p: &TransitionMatrix,
    cls: &Classification,
) -> Result<AbsorptionSolve, MarkovError> {
    let n = p.n();
    let k = cls.classes.len();
    let t = cls.transient.len();
    let mut transient_pos = vec![None; n];
    for (pos, &s) in cls.transient.iter().enumerate() {
        transient_pos[s] = Some(pos);
    }
    if t == 0 {
        return Ok(AbsorptionSolve {
            transient_pos,
            probs: Vec::new(),
            num_classes: k,
            max_residual: 0.0,
        });
    }

    // (I - Q) over the transient block, and one RHS per class
    let mut rhs = vec![vec![0.0; t]; k];
    let mut rows: Vec<Vec<(usize, f64)>> = Vec::with_capacity(t);
    for (pos, &s) in cls.transient.iter().enumerate() {
        let mut acc: BTreeMap<usize, f64> = BTreeMap::new();
        acc.insert(pos, 1.0);
        for &(c, v) in p.row(s) {
            if v == 0.0 {
                continue;
            }
            match cls.membership[c] {
                Some(class) => rhs[class][pos] += v,
                None => {
                    let cpos = transient_pos[c].expect("transient");
                    *acc.entry(cpos).or_insert(0.0) -= v;
                }
            }
        }
        rows.push(acc.into_iter().collect());
    }

    let mut probs = vec![vec![0.0; k]; t];
    let mut max_residual = 0.0f64;
    if t <= DENSE_LIMIT {
        let mut m = DMat::zeros(t, t);
        for (r, row) in rows.iter().enumerate() {
            for &(c, v) in row {
                m.set(r, c, v);
            }
        }
        let f = LuFactors::factor(&m).map_err(|_| MarkovError::Numerical { residual: f64::NAN })?;
        for (class, b) in rhs.iter().enumerate() {
            let (x, res) = f.solve_refined(b);
            max_residual = max_residual.max(res);
            for (pos, &v) in x.iter().enumerate() {
                probs[pos][class] = v.max(0.0);
            }
        }
    } else {
        let sys = SparseMat::from_rows(t, rows);
        let f = SparseLu::factor(&sys).map_err(|_| MarkovError::Numerical { residual: f64::NAN })?;
        for (class, b) in rhs.iter().enumerate() {
            let (x, res) = f.solve_refined(b);
            max_residual = max_residual.max(res);
            for (pos, &v) in x.iter().enumerate() {
                probs[pos][class] = v.max(0.0);
            }
        }
    }

    // every transient state must absorb somewhere
    for row in &probs {
        let sum: f64 = row.iter().sum();
        if math::abs(sum - 1.0) > SOLVE_TOL {
            return Err(MarkovError::Numerical {
                residual: math::abs(sum - 1.0),
            });
        }
    }
    if max_residual > SOLVE_TOL {
        return Err(MarkovError::Numerical {
            residual: max_residual,
        });
    }

    Ok(AbsorptionSolve {
        transient_pos,
        probs,
        num_classes: k,
        max_residual,
    })
}

/// `Pr(from -> R_k)` for each recurrent class.
pub fn absorption(
    p: &TransitionMatrix,
    cls: &Classification,
    from: usize,
) -> Result<Vec<f64>, MarkovError> {
    if from >= p.n() {
        return Err(MarkovError::StateOutOfRange {
            state: from,
            n: p.n(),
        });
    }
    Ok(absorption_all(p, cls)?.from_state(cls, from))
}

/// Full exact analysis of the chain a machine induces on an input
/// distribution.
#[derive(Debug, Clone)]
pub struct ChainAnalysis {
    pub classes: Vec<Vec<usize>>,
    pub transient: Vec<usize>,
    /// `Pr(init -> R_k)`.
    pub absorption_from_init: Vec<f64>,
    /// Stationary vector per class, indexed like `classes[k]`.
    pub stationary: Vec<Vec<f64>>,
    /// Cesaro limiting distribution over all states from the initial
    /// state: absorption-weighted stationary mass; transient states get
    /// zero.
    pub cesaro: Vec<f64>,
    /// Asymptotic probability of deciding H1 (the error when the source
    /// is uniform).
    pub pe_h0: f64,
    /// Asymptotic probability of deciding H0 (the error when the source
    /// is far from uniform).
    pub pe_h1: f64,
    pub max_residual: f64,
}

pub fn analyze(m: &Machine, p: &DiscreteDistribution) -> Result<ChainAnalysis, MarkovError> {
    let matrix = induced_matrix(m, p)?;
    let cls = classify(&matrix);
    let solve = absorption_all(&matrix, &cls)?;
    let absorb = solve.from_state(&cls, m.init());
    let mut stat = Vec::with_capacity(cls.classes.len());
    let mut max_residual = solve.max_residual;
    for class in &cls.classes {
        let pi = stationary(&matrix, class)?;
        let restricted = matrix.restrict(class)?;
        max_residual = max_residual.max(stationary_residual(&restricted, &pi));
        stat.push(pi);
    }

    let mut cesaro = vec![0.0; matrix.n()];
    for (k, class) in cls.classes.iter().enumerate() {
        for (local, &s) in class.iter().enumerate() {
            cesaro[s] = absorb[k] * stat[k][local];
        }
    }
    let pe_h0: f64 = cesaro
        .iter()
        .enumerate()
        .filter(|&(s, _)| m.decision(s) == Decision::H1)
        .map(|(_, &v)| v)
        .sum();
    let pe_h1: f64 = cesaro
        .iter()
        .enumerate()
        .filter(|&(s, _)| m.decision(s) == Decision::H0)
        .map(|(_, &v)| v)
        .sum();

    Ok(ChainAnalysis {
        classes: cls.classes,
        transient: cls.transient,
        absorption_from_init: absorb,
        stationary: stat,
        cesaro,
        pe_h0,
        pe_h1,
        max_residual,
    })
}

/// Asymptotic probability of deciding against `truth` (Cesaro limit of
/// the per-step wrong-decision probability).
pub fn error_probability(
    m: &Machine,
    p: &DiscreteDistribution,
    truth: Decision,
) -> Result<f64, MarkovError> {
    let a = analyze(m, p)?;
    Ok(match truth {
        Decision::H0 => a.pe_h0,
        Decision::H1 => a.pe_h1,
    })
}

/// State distribution after exactly `steps` transitions from `init`.
pub fn state_distribution_after(p: &TransitionMatrix, init: usize, steps: u64) -> Vec<f64> {
    let mut mu = vec![0.0; p.n()];
    mu[init] = 1.0;
    for _ in 0..steps {
        mu = p.distribute(&mu);
    }
    mu
}

/// Probability that the decision read at time `steps` is wrong.
pub fn horizon_error(
    m: &Machine,
    p: &DiscreteDistribution,
    truth: Decision,
    steps: u64,
) -> Result<f64, MarkovError> {
    let matrix = induced_matrix(m, p)?;
    let mu = state_distribution_after(&matrix, m.init(), steps);
    Ok(mu
        .iter()
        .enumerate()
        .filter(|&(s, _)| m.decision(s) != truth)
        .map(|(_, &v)| v)
        .sum())
}

/// Expected number of steps to reach `targets`, per state.
///
/// `None` marks states from which the quantity is undefined: states
/// that may never reach the targets (unconditioned), or that cannot
/// reach them at all (conditioned).
///
/// With `conditioned = true` the expectation is taken given the event
/// that the targets are eventually hit, via the Doob transform
/// `P~(x,y) = P(x,y) h(y) / h(x)` with `h` the hitting probability.
pub fn expected_hitting_times(
    p: &TransitionMatrix,
    targets: &[usize],
    conditioned: bool,
) -> Result<Vec<Option<f64>>, MarkovError> {
    let n = p.n();
    let mut is_target = vec![false; n];
    for &t in targets {
        if t >= n {
            return Err(MarkovError::StateOutOfRange { state: t, n });
        }
        is_target[t] = true;
    }

    // hitting probabilities h: reverse-reachable set first, then a solve
    // on the states that can reach the targets
    let mut reach = is_target.clone();
    let mut frontier: Vec<usize> = targets.to_vec();
    // reverse adjacency
    let mut rev: Vec<Vec<usize>> = vec![Vec::new(); n];
    for r in 0..n {
        for &(c, v) in p.row(r) {
            if v > 0.0 {
                rev[c].push(r);
            }
        }
    }
    while let Some(t) = frontier.pop() {
        for &r in &rev[t] {
            if !reach[r] {
                reach[r] = true;
                frontier.push(r);
            }
        }
    }

    let solve_states: Vec<usize> = (0..n).filter(|&s| reach[s] && !is_target[s]).collect();
    let mut pos = vec![None; n];
    for (i, &s) in solve_states.iter().enumerate() {
        pos[s] = Some(i);
    }
    let mut h = vec![0.0; n];
    for &t in targets {
        h[t] = 1.0;
    }
    if !solve_states.is_empty() {
        let t_len = solve_states.len();
        let mut rows: Vec<Vec<(usize, f64)>> = Vec::with_capacity(t_len);
        let mut b = vec![0.0; t_len];
        for (i, &s) in solve_states.iter().enumerate() {
            let mut acc: BTreeMap<usize, f64> = BTreeMap::new();
            acc.insert(i, 1.0);
            for &(c, v) in p.row(s) {
                if v == 0.0 {
                    continue;
                }
                if is_target[c] {
                    b[i] += v;
                } else if let Some(j) = pos[c] {
                    *acc.entry(j).or_insert(0.0) -= v;
                }
                // transitions into non-reaching states contribute nothing to h
            }
            rows.push(acc.into_iter().collect());
        }
        let hs = solve_linear(t_len, rows, &[b])?;
        for (i, &s) in solve_states.iter().enumerate() {
            h[s] = hs[0][i].max(0.0).min(1.0);
        }
    }

    // expected times
    let mut out: Vec<Option<f64>> = vec![None; n];
    for &t in targets {
        out[t] = Some(0.0);
    }

    if conditioned {
        // solve (I - Q~) t = 1 over {h > 0} \ targets
        let cond_states: Vec<usize> = (0..n).filter(|&s| !is_target[s] && h[s] > 0.0).collect();
        if cond_states.is_empty() {
            return Ok(out);
        }
        let mut cpos = vec![None; n];
        for (i, &s) in cond_states.iter().enumerate() {
            cpos[s] = Some(i);
        }
        let len = cond_states.len();
        let mut rows: Vec<Vec<(usize, f64)>> = Vec::with_capacity(len);
        for (i, &s) in cond_states.iter().enumerate() {
            let mut acc: BTreeMap<usize, f64> = BTreeMap::new();
            acc.insert(i, 1.0);
            for &(c, v) in p.row(s) {
                if v == 0.0 || is_target[c] {
                    continue;
                }
                if let Some(j) = cpos[c] {
                    let tilde = v * h[c] / h[s];
                    *acc.entry(j).or_insert(0.0) -= tilde;
                }
            }
            rows.push(acc.into_iter().collect());
        }
        let ones = vec![1.0; len];
        let ts = solve_linear(len, rows, &[ones])?;
        for (i, &s) in cond_states.iter().enumerate() {
            out[s] = Some(ts[0][i].max(0.0));
        }
    } else {
        // finite only where h = 1
        let sure: Vec<usize> = (0..n)
            .filter(|&s| !is_target[s] && h[s] >= 1.0 - SOLVE_TOL)
            .collect();
        if sure.is_empty() {
            return Ok(out);
        }
        let mut spos = vec![None; n];
        for (i, &s) in sure.iter().enumerate() {
            spos[s] = Some(i);
        }
        let len = sure.len();
        let mut rows: Vec<Vec<(usize, f64)>> = Vec::with_capacity(len);
        for (i, &s) in sure.iter().enumerate() {
            let mut acc: BTreeMap<usize, f64> = BTreeMap::new();
            acc.insert(i, 1.0);
            for &(c, v) in p.row(s) {
                if v == 0.0 || is_target[c] {
                    continue;
                }
                if let Some(j) = spos[c] {
                    *acc.entry(j).or_insert(0.0) -= v;
                }
            }
            rows.push(acc.into_iter().collect());
        }
        let ones = vec![1.0; len];
        let ts = solve_linear(len, rows, &[ones])?;
        for (i, &s) in sure.iter().enumerate() {
            out[s] = Some(ts[0][i].max(0.0));
        }
    }
    Ok(out)
}

/// Dense-or-sparse multi-RHS solve used by the hitting-time systems.
fn solve_linear(
    n: usize,
    rows: Vec<Vec<(usize, f64)>>,
    rhs: &[Vec<f64>],
) -> Result<Vec<Vec<f64>>, MarkovError> {
    let mut out = Vec::with_capacity(rhs.len());
    if n <= DENSE_LIMIT {
        let mut m = DMat::zeros(n, n);
        for (r, row) in rows.iter().enumerate() {
            for &(c, v) in row {
                m.set(r, c, v);
            }
        }
        let f = LuFactors::factor(&m).map_err(|_| MarkovError::Numerical { residual: f64::NAN })?;
        for b in rhs {
            let (x, res) = f.solve_refined(b);
            if res > SOLVE_TOL * (1.0 + norm1(b)) {
                return Err(MarkovError::Numerical { residual: res });
            }
            out.push(x);
        }
    } else {
        let sys = SparseMat::from_rows(n, rows);
        let f = SparseLu::factor(&sys).map_err(|_| MarkovError::Numerical { residual: f64::NAN })?;
        for b in rhs {
            let (x, res) = f.solve_refined(b);
            if res > SOLVE_TOL * (1.0 + norm1(b)) {
                return Err(MarkovError::Numerical { residual: res });
            }
            out.push(x);
        }
    }
    Ok(out)
}

/// Period of an irreducible chain: gcd of `level(u) + 1 - level(v)`
/// over all positive edges, with levels from a BFS tree.
pub fn period(p: &TransitionMatrix) -> Result<usize, MarkovError> {
    let n = p.n();
    let mut level = vec![usize::MAX; n];
    let mut queue = alloc::collections::VecDeque::new();
    level[0] = 0;
    queue.push_back(0usize);
    while let Some(v) = queue.pop_front() {
        for &(w, val) in p.row(v) {
            if val > 0.0 && level[w] == usize::MAX {
                level[w] = level[v] + 1;
                queue.push_back(w);
            }
        }
    }
    if level.iter().any(|&l| l == usize::MAX) {
        return Err(MarkovError::NotIrreducible);
    }
    let mut g: usize = 0;
    for v in 0..n {
        for &(w, val) in p.row(v) {
            if val > 0.0 {
                let diff = (level[v] as i64 + 1 - level[w] as i64).unsigned_abs() as usize;
                g = gcd(g, diff);
            }
        }
    }
    Ok(if g == 0 { 1 } else { g })
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Smallest `t` with `max_i tv(P^t(i, .), pi) <= 1/4`, by doubling and
/// then bisection on dense powers. Requires an irreducible aperiodic
/// chain; periodic chains error with a lazification hint.
pub fn mixing_time(p: &TransitionMatrix) -> Result<usize, MarkovError> {
    let n = p.n();
    if n > MIXING_LIMIT {
        return Err(MarkovError::TooLarge {
            n,
            limit: MIXING_LIMIT,
        });
    }
    let cls = classify(p);
    if !cls.is_irreducible() {
        return Err(MarkovError::NotIrreducible);
    }
    let d = period(p)?;
    if d > 1 {
        return Err(MarkovError::Periodic { period: d });
    }
    let pi = stationary(p, &cls.classes[0])?;

    let dist_to_pi = |m: &DMat| -> f64 {
        let mut worst = 0.0f64;
        for r in 0..n {
            let mut acc = 0.0;
            for c in 0..n {
                acc += math::abs(m.get(r, c) - pi[c]);
            }
            worst = worst.max(0.5 * acc);
        }
        worst
    };

    let base = p.to_dense();
    if dist_to_pi(&base) <= 0.25 {
        return Ok(1);
    }
    // powers[j] = P^(2^j)
    let mut powers = vec![base];
    let mut t = 1usize;
    loop {
        let last = powers.last().expect("nonempty");
        let sq = mat_mul(last, last);
        t *= 2;
        let done = dist_to_pi(&sq) <= 0.25;
        powers.push(sq);
        if done {
            break;
        }
        if t > (1 << 40) {
            return Err(MarkovError::Numerical { residual: f64::NAN });
        }
    }

    // bisect in (t/2, t]
    let mut lo = t / 2; // known > 1/4
    let mut hi = t; // known <= 1/4
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        let m = power_from_bits(&powers, mid);
        if dist_to_pi(&m) <= 0.25 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

fn mat_mul(a: &DMat, b: &DMat) -> DMat {
    let n = a.rows();
    let mut out = DMat::zeros(n, n);
    for i in 0..n {
        for k in 0..n {
            let aik = a.get(i, k);
            if aik == 0.0 {
                continue;
            }
            for j in 0..n {
                let cur = out.get(i, j);
                out.set(i, j, cur + aik * b.get(k, j));
            }
        }
    }
    out
}

fn power_from_bits(powers: &[DMat], mut t: usize) -> DMat {
    let n = powers[0].rows();
    let mut acc: Option<DMat> = None;
    let mut bit = 0;
    while t > 0 {
        if t & 1 == 1 {
            acc = Some(match acc {
                None => powers[bit].clone(),
                Some(m) => mat_mul(&m, &powers[bit]),
            });
        }
        t >>= 1;
        bit += 1;
    }
    acc.unwrap_or_else(|| DMat::identity(n))
}

/// Result of [`ergodicize`].
#[derive(Debug, Clone)]
pub enum ErgodicizeOutcome {
    /// The chain was already irreducible; nothing to do.
    AlreadyErgodic,
    Ergodicized(ErgodicizedChain),
}

/// A reducible chain made ergodic by wiring every recurrent state back
/// to the initial state with a small probability.
#[derive(Debug, Clone)]
pub struct ErgodicizedChain {
    pub matrix: TransitionMatrix,
    /// Reconnection probability `1 / (slack * t_mix_bar)`.
    pub delta_conn: f64,
    pub slack: f64,
    /// Max over reachable classes of conditional hitting time plus
    /// within-class mixing time.
    pub t_mix_bar: f64,
    /// Classification of the base chain.
    pub base_classes: Classification,
    /// `Pr(init -> R_k)` in the base chain.
    pub base_absorption: Vec<f64>,
    /// Within-class stationary vectors of the base chain.
    pub base_stationary: Vec<Vec<f64>>,
    pub init: usize,
}

pub fn ergodicize(
    p: &TransitionMatrix,
    init: usize,
    slack: f64,
) -> Result<ErgodicizeOutcome, MarkovError> {
    if init >= p.n() {
        return Err(MarkovError::StateOutOfRange {
            state: init,
            n: p.n(),
        });
    }
    if !(slack > 0.0) {
        return Err(MarkovError::Numerical { residual: f64::NAN });
    }
    let cls = classify(p);
    if cls.is_irreducible() {
        return Ok(ErgodicizeOutcome::AlreadyErgodic);
    }

    let absorb = absorption(p, &cls, init)?;
    let mut t_bar = 0.0f64;
    let mut base_stat = Vec::with_capacity(cls.classes.len());
    for (k, class) in cls.classes.iter().enumerate() {
        base_stat.push(stationary(p, class)?);
        if absorb[k] <= 0.0 {
            continue;
        }
        let hit = expected_hitting_times(p, class, true)?;
        let hit_init = hit[init].ok_or(MarkovError::Numerical { residual: f64::NAN })?;
        let restricted = p.restrict(class)?;
        let t_mix = if class.len() == 1 {
            1.0
        } else {
            match mixing_time(&restricted) {
                Ok(t) => t as f64,
                // periodic classes are lazified for the mixing
                // computation only, doubling the reported time
                Err(MarkovError::Periodic { .. }) => {
                    2.0 * mixing_time(&restricted.lazify())? as f64
                }
                Err(e) => return Err(e),
            }
        };
        t_bar = t_bar.max(hit_init + t_mix);
    }
    if t_bar <= 0.0 {
        // init cannot reach any recurrent class: not a valid chain state
        return Err(MarkovError::Numerical { residual: f64::NAN });
    }
    let delta = 1.0 / (slack * t_bar);

    let n = p.n();
    let mut rows = Vec::with_capacity(n);
    for s in 0..n {
        if cls.membership[s].is_some() {
            let mut acc: BTreeMap<usize, f64> = p
                .row(s)
                .iter()
                .map(|&(c, v)| (c, v * (1.0 - delta)))
                .collect();
            *acc.entry(init).or_insert(0.0) += delta;
            rows.push(acc.into_iter().collect());
        } else {
            rows.push(p.row(s).to_vec());
        }
    }
    let matrix = TransitionMatrix::from_rows(n, rows)?;

    Ok(ErgodicizeOutcome::Ergodicized(ErgodicizedChain {
        matrix,
        delta_conn: delta,
        slack,
        t_mix_bar: t_bar,
        base_classes: cls,
        base_absorption: absorb,
        base_stationary: base_stat,
        init,
    }))
}

/// Per-class comparison between the ergodicized chain's stationary mass
/// and the base chain's absorption probabilities.
#[derive(Debug, Clone)]
pub struct ErgodicizeClassCheck {
    pub class: usize,
    /// Stationary mass of the class in the ergodicized chain.
    pub mass: f64,
    /// `Pr(init -> R_k)` in the base chain.
    pub absorb: f64,
    /// `|mass - absorb|`, to be at most `1 / (slack + 1)`.
    pub mass_gap: f64,
    /// Worst violation of the within-class lower bound
    /// `pi~_i >= pi^inf_i - |R_k|/M (1 + 1/pi(R_k))`; nonpositive when
    /// the bound holds.
    pub within_class_violation: f64,
}

impl ErgodicizedChain {
    /// Exact stationary solve on the ergodicized chain and the Lemma-style
    /// per-class bounds derived from it.
    pub fn class_checks(&self) -> Result<Vec<ErgodicizeClassCheck>, MarkovError> {
        let cls = classify(&self.matrix);
        if !cls.is_irreducible() {
            // classes unreachable from init stay transient in the new
            // chain; they carry zero stationary mass
        }
        // stationary over the single recurrent class of the new chain
        let main_class = &cls.classes[0];
        let pi_local = stationary(&self.matrix, main_class)?;
        let mut pi = vec![0.0; self.matrix.n()];
        for (local, &s) in main_class.iter().enumerate() {
            pi[s] = pi_local[local];
        }

        let mut checks = Vec::new();
        for (k, class) in self.base_classes.classes.iter().enumerate() {
            let mass: f64 = class.iter().map(|&s| pi[s]).sum();
            let absorb = self.base_absorption[k];
            let mut violation = f64::NEG_INFINITY;
            if mass > 0.0 {
                let penalty =
                    (class.len() as f64 / self.slack) * (1.0 + 1.0 / mass);
                for (local, &s) in class.iter().enumerate() {
                    let tilde = pi[s] / mass;
                    let bound = self.base_stationary[k][local] - penalty;
                    violation = violation.max(bound - tilde);
                }
            } else {
                violation = 0.0;
            }
            checks.push(ErgodicizeClassCheck {
                class: k,
                mass,
                absorb,
                mass_gap: math::abs(mass - absorb),
                within_class_violation: violation,
            });
        }
        Ok(checks)
    }
}

/// Ergodicize the chain a machine induces on `p`.
pub fn ergodicize_machine(
    m: &Machine,
    p: &DiscreteDistribution,
    slack: f64,
) -> Result<ErgodicizeOutcome, MarkovError> {
    let matrix = induced_matrix(m, p)?;
    ergodicize(&matrix, m.init(), slack)
}

/// Kac return-time identity: returns `max_i |pi_i E[tau_i] - 1|` where
/// `tau_i` is the first return time to state `i`.
pub fn kac_check(p: &TransitionMatrix) -> Result<f64, MarkovError> {
    let cls = classify(p);
    if !cls.is_irreducible() {
        return Err(MarkovError::NotIrreducible);
    }
    let pi = stationary(p, &cls.classes[0])?;
    let n = p.n();
    let mut worst = 0.0f64;
    for i in 0..n {
        let hit = expected_hitting_times(p, &[i], false)?;
        let mut ret = 1.0;
        for &(c, v) in p.row(i) {
            if v == 0.0 {
                continue;
            }
            let t = hit[c].ok_or(MarkovError::NotIrreducible)?;
            ret += v * t;
        }
        worst = worst.max(math::abs(pi[i] * ret - 1.0));
    }
    Ok(worst)
}

/// Stationary flow across a cut: `|flow(C -> C') - flow(C' -> C)|`,
/// which is zero for any stationary chain.
pub fn flow_balance_check(p: &TransitionMatrix, cut: &[usize]) -> Result<f64, MarkovError> {
    let cls = classify(p);
    if !cls.is_irreducible() {
        return Err(MarkovError::NotIrreducible);
    }
    let pi = stationary(p, &cls.classes[0])?;
    let n = p.n();
    let mut in_cut = vec![false; n];
    for &s in cut {
        if s >= n {
            return Err(MarkovError::StateOutOfRange { state: s, n });
        }
        in_cut[s] = true;
    }
    let mut forward = 0.0;
    let mut backward = 0.0;
    for s in 0..n {
        for &(c, v) in p.row(s) {
            if in_cut[s] && !in_cut[c] {
                forward += pi[s] * v;
            } else if !in_cut[s] && in_cut[c] {
                backward += pi[s] * v;
            }
        }
    }
    Ok(math::abs(forward - backward))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::{Row, Succ};
    use std::vec::Vec as StdVec;

    fn two_state(a: f64, b: f64) -> TransitionMatrix {
        TransitionMatrix::from_rows(
            2,
            vec![vec![(0, 1.0 - a), (1, a)], vec![(0, b), (1, 1.0 - b)]],
        )
        .unwrap()
    }

    #[test]
    fn induced_identity_machine() {
        let m = Machine::identity(4, 3, 0).unwrap();
        let u = DiscreteDistribution::uniform(4);
        let p = induced_matrix(&m, &u).unwrap();
        for i in 0..3 {
            assert_eq!(p.row(i), &[(i, 1.0)]);
        }
    }

    #[test]
    fn induced_last_symbol_machine() {
        // state 1 iff last symbol was 0 (the "watched" symbol)
        let rows = vec![
            Row {
                default: Succ::To(0),
                overrides: vec![(0, Succ::To(1))],
            },
            Row {
                default: Succ::To(0),
                overrides: vec![(0, Succ::To(1))],
            },
        ];
        let m = Machine::from_rows(4, 0, vec![Decision::H0, Decision::H1], rows).unwrap();
        let u = DiscreteDistribution::uniform(4);
        let p = induced_matrix(&m, &u).unwrap();
        for i in 0..2 {
            assert!((p.entry(i, 0) - 0.75).abs() < 1e-15);
            assert!((p.entry(i, 1) - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn classify_irreducible_and_absorbing() {
        let p = two_state(0.3, 0.4);
        let cls = classify(&p);
        assert!(cls.is_irreducible());

        // gambler's ruin on 5 states
        let p = TransitionMatrix::from_rows(
            5,
            vec![
                vec![(0, 1.0)],
                vec![(0, 0.5), (2, 0.5)],
                vec![(1, 0.5), (3, 0.5)],
                vec![(2, 0.5), (4, 0.5)],
                vec![(4, 1.0)],
            ],
        )
        .unwrap();
        let cls = classify(&p);
        assert_eq!(cls.classes, vec![vec![0], vec![4]]);
        assert_eq!(cls.transient, vec![1, 2, 3]);
    }

    #[test]
    fn classify_block_diagonal() {
        let p = TransitionMatrix::from_rows(
            4,
            vec![
                vec![(0, 0.5), (1, 0.5)],
                vec![(0, 0.5), (1, 0.5)],
                vec![(2, 0.2), (3, 0.8)],
                vec![(2, 0.7), (3, 0.3)],
            ],
        )
        .unwrap();
        let cls = classify(&p);
        assert_eq!(cls.classes.len(), 2);
        assert!(cls.transient.is_empty());
    }

    #[test]
    fn stationary_two_state_closed_form() {
        let (a, b) = (0.3, 0.1);
        let p = two_state(a, b);
        let pi = stationary(&p, &[0, 1]).unwrap();
        assert!((pi[0] - b / (a + b)).abs() < 1e-12);
        assert!((pi[1] - a / (a + b)).abs() < 1e-12);
    }

    #[test]
    fn stationary_doubly_stochastic_is_uniform() {
        let p = TransitionMatrix::from_rows(
            3,
            vec![
                vec![(0, 0.2), (1, 0.3), (2, 0.5)],
                vec![(0, 0.5), (1, 0.2), (2, 0.3)],
                vec![(0, 0.3), (1, 0.5), (2, 0.2)],
            ],
        )
        .unwrap();
        let pi = stationary(&p, &[0, 1, 2]).unwrap();
        for v in pi {
            assert!((v - 1.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn absorption_symmetric_ruin() {
        let p = TransitionMatrix::from_rows(
            5,
            vec![
                vec![(0, 1.0)],
                vec![(0, 0.5), (2, 0.5)],
                vec![(1, 0.5), (3, 0.5)],
                vec![(2, 0.5), (4, 0.5)],
                vec![(4, 1.0)],
            ],
        )
        .unwrap();
        let cls = classify(&p);
        let a = absorption(&p, &cls, 2).unwrap();
        assert!((a[0] - 0.5).abs() < 1e-12);
        assert!((a[1] - 0.5).abs() < 1e-12);
        // from a recurrent state: indicator
        let a = absorption(&p, &cls, 4).unwrap();
        assert_eq!(a, vec![0.0, 1.0]);
    }

    #[test]
    fn hitting_times_cycle() {
        // deterministic 3-cycle: hitting time of state 0 from state 1 is 2
        let p = TransitionMatrix::from_rows(
            3,
            vec![vec![(1, 1.0)], vec![(2, 1.0)], vec![(0, 1.0)]],
        )
        .unwrap();
        let t = expected_hitting_times(&p, &[0], false).unwrap();
        assert_eq!(t[0], Some(0.0));
        assert!((t[1].unwrap() - 2.0).abs() < 1e-12);
        assert!((t[2].unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hitting_time_undefined_when_escape_possible() {
        // state 1 goes to target 0 or to absorbing 2 with equal chance
        let p = TransitionMatrix::from_rows(
            3,
            vec![vec![(0, 1.0)], vec![(0, 0.5), (2, 0.5)], vec![(2, 1.0)]],
        )
        .unwrap();
        let t = expected_hitting_times(&p, &[0], false).unwrap();
        assert_eq!(t[1], None);
        // conditioned on hitting, it takes exactly one step
        let t = expected_hitting_times(&p, &[0], true).unwrap();
        assert!((t[1].unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(t[2], None);
    }

    #[test]
    fn mixing_identical_rows_is_one() {
        let p = TransitionMatrix::from_rows(
            2,
            vec![vec![(0, 0.5), (1, 0.5)], vec![(0, 0.5), (1, 0.5)]],
        )
        .unwrap();
        assert_eq!(mixing_time(&p).unwrap(), 1);
    }

    #[test]
    fn mixing_rejects_periodic() {
        let p = TransitionMatrix::from_rows(2, vec![vec![(1, 1.0)], vec![(0, 1.0)]]).unwrap();
        assert!(matches!(
            mixing_time(&p),
            Err(MarkovError::Periodic { period: 2 })
        ));
        assert!(mixing_time(&p.lazify()).is_ok());
    }

    #[test]
    fn mixing_matches_brute_force() {
        // brute force: multiply out P^t directly
        let p = TransitionMatrix::from_rows(
            3,
            vec![
                vec![(0, 0.6), (1, 0.4)],
                vec![(1, 0.7), (2, 0.3)],
                vec![(0, 0.5), (2, 0.5)],
            ],
        )
        .unwrap();
        let t = mixing_time(&p).unwrap();
        let cls = classify(&p);
        let pi = stationary(&p, &cls.classes[0]).unwrap();
        let dense = p.to_dense();
        let dist = |m: &DMat| -> f64 {
            (0..3)
                .map(|r| {
                    0.5 * (0..3)
                        .map(|c| (m.get(r, c) - pi[c]).abs())
                        .sum::<f64>()
                })
                .fold(0.0, f64::max)
        };
        let mut m = DMat::identity(3);
        let mut first = None;
        for step in 1..200 {
            m = mat_mul(&m, &dense);
            if dist(&m) <= 0.25 {
                first = Some(step);
                break;
            }
        }
        assert_eq!(Some(t), first);
    }

    #[test]
    fn error_probability_constant_machine() {
        let m = Machine::identity(3, 1, 0).unwrap();
        let u = DiscreteDistribution::uniform(3);
        assert_eq!(error_probability(&m, &u, Decision::H0).unwrap(), 0.0);
        assert_eq!(error_probability(&m, &u, Decision::H1).unwrap(), 1.0);
    }

    #[test]
    fn cesaro_of_periodic_class_is_stationary() {
        // 2-cycle labeled half H1: time-averaged H1 mass is 1/2
        let rows = vec![
            Row {
                default: Succ::To(1),
                overrides: vec![],
            },
            Row {
                default: Succ::To(0),
                overrides: vec![],
            },
        ];
        let m = Machine::from_rows(2, 0, vec![Decision::H0, Decision::H1], rows).unwrap();
        let u = DiscreteDistribution::uniform(2);
        let a = analyze(&m, &u).unwrap();
        assert!((a.pe_h0 - 0.5).abs() < 1e-12);
    }

    #[test]
    fn kac_two_state_closed_form() {
        let p = two_state(0.25, 0.5);
        assert!(kac_check(&p).unwrap() < 1e-12);
    }

    #[test]
    fn kac_uniform_cycle_return_time() {
        // uniform random walk on a 6-cycle: pi uniform, E[tau_i] = 6
        let n = 6;
        let rows: StdVec<StdVec<(usize, f64)>> = (0..n)
            .map(|i| {
                let mut r = vec![((i + 1) % n, 0.5), ((i + n - 1) % n, 0.5)];
                r.sort_by_key(|e| e.0);
                r
            })
            .collect();
        let p = TransitionMatrix::from_rows(n, rows).unwrap();
        assert!(kac_check(&p).unwrap() < 1e-10);
        let hit = expected_hitting_times(&p, &[0], false).unwrap();
        let mut ret = 1.0;
        for &(c, v) in p.row(0) {
            ret += v * hit[c].unwrap();
        }
        assert!((ret - 6.0).abs() < 1e-9);
    }

    #[test]
    fn flow_balance_trivial_and_single_state() {
        let p = two_state(0.3, 0.2);
        // whole-space cut: empty complement
        assert_eq!(flow_balance_check(&p, &[0, 1]).unwrap(), 0.0);
        // single-state cut reproduces the detailed flow identity
        assert!(flow_balance_check(&p, &[0]).unwrap() < 1e-14);
    }

    #[test]
    fn ergodicize_two_absorbing_chain() {
        let p = TransitionMatrix::from_rows(
            5,
            vec![
                vec![(0, 1.0)],
                vec![(0, 0.6), (2, 0.4)],
                vec![(1, 0.5), (3, 0.5)],
                vec![(2, 0.3), (4, 0.7)],
                vec![(4, 1.0)],
            ],
        )
        .unwrap();
        let out = ergodicize(&p, 2, 100.0).unwrap();
        let erg = match out {
            ErgodicizeOutcome::Ergodicized(e) => e,
            ErgodicizeOutcome::AlreadyErgodic => panic!("chain is reducible"),
        };
        assert!(erg.delta_conn > 0.0 && erg.delta_conn < 1.0);
        let checks = erg.class_checks().unwrap();
        assert_eq!(checks.len(), 2);
        for c in &checks {
            assert!(c.mass_gap <= 1.0 / 101.0 + 1e-12, "gap {}", c.mass_gap);
            assert!(c.within_class_violation <= 1e-12);
        }
    }

    #[test]
    fn ergodicize_irreducible_is_noop() {
        let p = two_state(0.5, 0.5);
        assert!(matches!(
            ergodicize(&p, 0, 10.0).unwrap(),
            ErgodicizeOutcome::AlreadyErgodic
        ));
    }
}
