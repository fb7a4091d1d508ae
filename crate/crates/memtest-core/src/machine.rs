//! Finite-state machines over a finite alphabet.
//!
//! A machine has `S` states, an alphabet `[n]`, an initial state, a
//! per-state decision label, and a (possibly randomized) transition
//! kernel. Rows are stored as a default successor plus per-symbol
//! overrides, so the pair testers — which react to at most two symbols
//! per state — stay compact, while machines that move on every symbol
//! simply list all symbols explicitly.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand_core::RngCore;

use crate::dist::PROB_SUM_TOL;
use crate::math;
use crate::rng::unit_f64;

/// Hypothesis label attached to a state: `H0` = "uniform",
/// `H1` = "far from uniform".
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    H0,
    H1,
}

impl Decision {
    pub fn flipped(self) -> Self {
        match self {
            Decision::H0 => Decision::H1,
            Decision::H1 => Decision::H0,
        }
    }
}

/// Successor of one `(state, symbol)` pair.
#[derive(Debug, Clone, PartialEq)]
pub enum Succ {
    /// Deterministic move.
    To(usize),
    /// Randomized move: `(state, probability)` pairs, probabilities
    /// summing to one.
    Random(Vec<(usize, f64)>),
}

impl Succ {
    fn validate(&self, num_states: usize) -> Result<(), MachineError> {
        match self {
            Succ::To(t) => {
                if *t >= num_states {
                    return Err(MachineError::StateOutOfRange {
                        state: *t,
                        num_states,
                    });
                }
            }
            Succ::Random(pairs) => {
                if pairs.is_empty() {
                    return Err(MachineError::InvalidKernelRow { sum: 0.0 });
                }
                let mut sum = 0.0;
                let mut last: Option<usize> = None;
                for &(t, p) in pairs {
                    if t >= num_states {
                        return Err(MachineError::StateOutOfRange {
                            state: t,
                            num_states,
                        });
                    }
                    if let Some(prev) = last {
                        if t <= prev {
                            return Err(MachineError::UnsortedEntries);
                        }
                    }
                    last = Some(t);
                    if !(p >= 0.0) || !p.is_finite() {
                        return Err(MachineError::InvalidKernelRow { sum: f64::NAN });
                    }
                    sum += p;
                }
                if math::abs(sum - 1.0) > PROB_SUM_TOL {
                    return Err(MachineError::InvalidKernelRow { sum });
                }
            }
        }
        Ok(())
    }

    /// True when the successor is `state` with probability one.
    fn is_self_loop(&self, state: usize) -> bool {
        match self {
            Succ::To(t) => *t == state,
            Succ::Random(pairs) => pairs.len() == 1 && pairs[0].0 == state && pairs[0].1 == 1.0,
        }
    }

    fn sample<R: RngCore>(&self, rng: &mut R) -> usize {
        match self {
            Succ::To(t) => *t,
            Succ::Random(pairs) => {
                let mut u = unit_f64(rng);
                for &(t, p) in pairs {
                    if u < p {
                        return t;
                    }
                    u -= p;
                }
                pairs[pairs.len() - 1].0
            }
        }
    }
}

/// One state's transition rule: `default` applies to every symbol not
/// listed in `overrides`.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub default: Succ,
    /// Sorted by symbol, symbols unique.
    pub overrides: Vec<(usize, Succ)>,
}

impl Row {
    /// Row that self-loops on every symbol.
    pub fn self_loop(state: usize) -> Self {
        Row {
            default: Succ::To(state),
            overrides: Vec::new(),
        }
    }

    pub fn succ(&self, symbol: usize) -> &Succ {
        match self.overrides.binary_search_by_key(&symbol, |(x, _)| *x) {
            Ok(i) => &self.overrides[i].1,
            Err(_) => &self.default,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MachineError {
    NoStates,
    NoAlphabet,
    StateOutOfRange { state: usize, num_states: usize },
    SymbolOutOfRange { symbol: usize, n: usize },
    InvalidKernelRow { sum: f64 },
    UnsortedEntries,
    DecisionLengthMismatch { expected: usize, got: usize },
}

impl fmt::Display for MachineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MachineError::NoStates => write!(f, "machine must have at least one state"),
            MachineError::NoAlphabet => write!(f, "alphabet must be nonempty"),
            MachineError::StateOutOfRange { state, num_states } => {
                write!(f, "state {state} out of range (S = {num_states})")
            }
            MachineError::SymbolOutOfRange { symbol, n } => {
                write!(f, "symbol {symbol} out of range (n = {n})")
            }
            MachineError::InvalidKernelRow { sum } => {
                write!(f, "kernel row does not sum to one (sum = {sum})")
            }
            MachineError::UnsortedEntries => {
                write!(f, "kernel entries must be sorted and unique")
            }
            MachineError::DecisionLengthMismatch { expected, got } => {
                write!(f, "decision map has {got} entries, expected {expected}")
            }
        }
    }
}

impl core::error::Error for MachineError {}

/// An `S`-state machine over the alphabet `[n]`, immutable after
/// construction. Kernel stochasticity is checked on construction, so
/// invalid kernels are unrepresentable.
#[derive(Debug, Clone, PartialEq)]
pub struct Machine {
    n: usize,
    init: usize,
    decisions: Vec<Decision>,
    rows: Vec<Row>,
    absorbing: Vec<bool>,
    settled: Vec<bool>,
}

impl Machine {
    pub fn from_rows(
        n: usize,
        init: usize,
        decisions: Vec<Decision>,
        rows: Vec<Row>,
    ) -> Result<Self, MachineError> {
        let num_states = rows.len();
        if num_states == 0 {
            return Err(MachineError::NoStates);
        }
        if n == 0 {
            return Err(MachineError::NoAlphabet);
        }
        if init >= num_states {
            return Err(MachineError::StateOutOfRange {
                state: init,
                num_states,
            });
        }
        if decisions.len() != num_states {
            return Err(MachineError::DecisionLengthMismatch {
                expected: num_states,
                got: decisions.len(),
            });
        }
        for row in &rows {
            row.default.validate(num_states)?;
            let mut last: Option<usize> = None;
            for (symbol, succ) in &row.overrides {
                if *symbol >= n {
                    return Err(MachineError::SymbolOutOfRange { symbol: *symbol, n });
                }
                if let Some(prev) = last {
                    if *symbol <= prev {
                        return Err(MachineError::UnsortedEntries);
                    }
                }
                last = Some(*symbol);
                succ.validate(num_states)?;
            }
        }
        let absorbing: Vec<bool> = rows
            .iter()
            .enumerate()
            .map(|(s, row)| {
                row.default.is_self_loop(s) && row.overrides.iter().all(|(_, t)| t.is_self_loop(s))
            })
            .collect();
        let settled = compute_settled(&rows, &decisions);
        Ok(Self {
            n,
            init,
            decisions,
            rows,
            absorbing,
            settled,
        })
    }

    /// Deterministic machine from a full `S x n` successor table.
    pub fn deterministic(
        n: usize,
        init: usize,
        decisions: Vec<Decision>,
        table: Vec<Vec<usize>>,
    ) -> Result<Self, MachineError> {
        let rows = table
            .into_iter()
            .map(|succs| {
                if succs.len() != n {
                    return Err(MachineError::NoAlphabet);
                }
                Ok(Row {
                    default: Succ::To(succs[0]),
                    overrides: succs
                        .iter()
                        .enumerate()
                        .skip(1)
                        .map(|(x, &t)| (x, Succ::To(t)))
                        .collect(),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::from_rows(n, init, decisions, rows)
    }

    /// Machine whose every state self-loops on every symbol.
    pub fn identity(n: usize, num_states: usize, init: usize) -> Result<Self, MachineError> {
        let rows = (0..num_states).map(Row::self_loop).collect();
        Self::from_rows(n, init, vec![Decision::H0; num_states], rows)
    }

    #[inline]
    pub fn num_states(&self) -> usize {
        self.rows.len()
    }

    #[inline]
    pub fn alphabet(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn init(&self) -> usize {
        self.init
    }

    #[inline]
    pub fn decision(&self, state: usize) -> Decision {
        self.decisions[state]
    }

    #[inline]
    pub fn decisions(&self) -> &[Decision] {
        &self.decisions
    }

    /// A state is absorbing when every symbol keeps it in place with
    /// probability one.
    #[inline]
    pub fn is_absorbing(&self, state: usize) -> bool {
        self.absorbing[state]
    }

    /// A state is settled when every state reachable from it carries the
    /// same decision: the verdict can no longer change even if the state
    /// keeps moving (as in product constructions whose bookkeeping
    /// component cycles forever). Absorbing states are always settled.
    #[inline]
    pub fn is_settled(&self, state: usize) -> bool {
        self.settled[state]
    }

    #[inline]
    pub fn row(&self, state: usize) -> &Row {
        &self.rows[state]
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    /// Whether any kernel entry is randomized.
    pub fn is_deterministic(&self) -> bool {
        self.rows.iter().all(|row| {
            matches!(row.default, Succ::To(_))
                && row.overrides.iter().all(|(_, s)| matches!(s, Succ::To(_)))
        })
    }

    /// One evolution step from `state` on `symbol`. Deterministic
    /// machines ignore the randomness source.
    pub fn step<R: RngCore>(
        &self,
        state: usize,
        symbol: usize,
        rng: &mut R,
    ) -> Result<usize, MachineError> {
        if state >= self.num_states() {
            return Err(MachineError::StateOutOfRange {
                state,
                num_states: self.num_states(),
            });
        }
        if symbol >= self.n {
            return Err(MachineError::SymbolOutOfRange { symbol, n: self.n });
        }
        Ok(self.rows[state].succ(symbol).sample(rng))
    }

    /// Fold [`Machine::step`] over a symbol stream, recording the state
    /// after every input and the first entry into an absorbing state.
    pub fn run<R: RngCore>(&self, stream: &[usize], rng: &mut R) -> Result<RunTrace, MachineError> {
        let mut states = Vec::with_capacity(stream.len() + 1);
        let mut state = self.init;
        states.push(state);
        let mut absorbed = if self.is_absorbing(state) {
            Some((0, state))
        } else {
            None
        };
        for (i, &symbol) in stream.iter().enumerate() {
            state = self.step(state, symbol, rng)?;
            states.push(state);
            if absorbed.is_none() && self.is_absorbing(state) {
                absorbed = Some((i + 1, state));
            }
        }
        let decisions = states.iter().map(|&s| self.decisions[s]).collect();
        Ok(RunTrace {
            states,
            decisions,
            absorbed,
        })
    }
}

/// `settled[s]` = every state reachable from `s` (over any symbol, any
/// positive-probability branch) carries the same decision as `s`.
fn compute_settled(rows: &[Row], decisions: &[Decision]) -> Vec<bool> {
    let n = rows.len();
    let mut adj: Vec<Vec<usize>> = Vec::with_capacity(n);
    for row in rows {
        let mut targets = Vec::new();
        let mut push = |succ: &Succ| match succ {
            Succ::To(t) => targets.push(*t),
            Succ::Random(pairs) => {
                for &(t, p) in pairs {
                    if p > 0.0 {
                        targets.push(t);
                    }
                }
            }
        };
        push(&row.default);
        for (_, succ) in &row.overrides {
            push(succ);
        }
        targets.sort_unstable();
        targets.dedup();
        adj.push(targets);
    }
    let (comp_of, count) = crate::graph::tarjan_scc(&adj);
    // component ids come out in reverse topological order, so processing
    // them ascending sees successors before predecessors
    let mut mask = vec![0u8; count];
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); count];
    for (s, &c) in comp_of.iter().enumerate() {
        members[c].push(s);
    }
    for c in 0..count {
        let mut m = 0u8;
        for &s in &members[c] {
            m |= match decisions[s] {
                Decision::H0 => 1,
                Decision::H1 => 2,
            };
            for &t in &adj[s] {
                if comp_of[t] != c {
                    m |= mask[comp_of[t]];
                }
            }
        }
        mask[c] = m;
    }
    (0..n).map(|s| mask[comp_of[s]].count_ones() == 1).collect()
}

/// Record of one machine run: state after each input symbol (starting
/// with the initial state) and the decision at each of those times.
#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace {
    pub states: Vec<usize>,
    pub decisions: Vec<Decision>,
    /// `(step index, absorbing state)` of the first entry into an
    /// absorbing state, if any.
    pub absorbed: Option<(usize, usize)>,
}

impl RunTrace {
    pub fn final_state(&self) -> usize {
        *self.states.last().expect("trace is never empty")
    }

    pub fn final_decision(&self) -> Decision {
        *self.decisions.last().expect("trace is never empty")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;

    #[test]
    fn identity_machine_steps_in_place() {
        let m = Machine::identity(4, 6, 0).unwrap();
        let mut rng = stream_rng(0, 0);
        assert_eq!(m.step(3, 1, &mut rng).unwrap(), 3);
        assert!(m.is_absorbing(3));
    }

    #[test]
    fn rejects_invalid_kernels() {
        let bad = Machine::from_rows(
            2,
            0,
            vec![Decision::H0],
            vec![Row {
                default: Succ::Random(vec![(0, 0.6), (0, 0.6)]),
                overrides: vec![],
            }],
        );
        assert!(bad.is_err());

        let bad_sum = Machine::from_rows(
            2,
            0,
            vec![Decision::H0],
            vec![Row {
                default: Succ::Random(vec![(0, 0.6)]),
                overrides: vec![],
            }],
        );
        assert!(matches!(
            bad_sum,
            Err(MachineError::InvalidKernelRow { .. })
        ));

        let out_of_range = Machine::from_rows(
            2,
            0,
            vec![Decision::H0],
            vec![Row {
                default: Succ::To(5),
                overrides: vec![],
            }],
        );
        assert!(matches!(
            out_of_range,
            Err(MachineError::StateOutOfRange { .. })
        ));
    }

    #[test]
    fn empty_stream_trace() {
        let m = Machine::identity(3, 2, 1).unwrap();
        let mut rng = stream_rng(0, 0);
        let trace = m.run(&[], &mut rng).unwrap();
        assert_eq!(trace.states, vec![1]);
        // the identity machine is absorbing everywhere, so absorption is
        // recorded at step 0
        assert_eq!(trace.absorbed, Some((0, 1)));
    }

    #[test]
    fn run_rejects_bad_symbols() {
        let m = Machine::identity(3, 2, 0).unwrap();
        let mut rng = stream_rng(0, 0);
        assert!(m.run(&[0, 3], &mut rng).is_err());
    }

    #[test]
    fn deterministic_run_is_seed_independent() {
        // two-state machine: remember whether the last symbol was 0
        let m = Machine::deterministic(
            3,
            0,
            vec![Decision::H0, Decision::H1],
            vec![vec![1, 0, 0], vec![1, 0, 0]],
        )
        .unwrap();
        let stream = [0, 1, 0, 0, 2, 1];
        let t1 = m.run(&stream, &mut stream_rng(1, 0)).unwrap();
        let t2 = m.run(&stream, &mut stream_rng(99, 7)).unwrap();
        assert_eq!(t1, t2);
        assert_eq!(t1.states.len(), stream.len() + 1);
    }

    #[test]
    fn randomized_step_respects_distribution() {
        let m = Machine::from_rows(
            1,
            0,
            vec![Decision::H0, Decision::H0],
            vec![
                Row {
                    default: Succ::Random(vec![(0, 0.25), (1, 0.75)]),
                    overrides: vec![],
                },
                Row::self_loop(1),
            ],
        )
        .unwrap();
        let mut rng = stream_rng(5, 0);
        let mut ones = 0usize;
        let trials = 20_000;
        for _ in 0..trials {
            if m.step(0, 0, &mut rng).unwrap() == 1 {
                ones += 1;
            }
        }
        let frac = ones as f64 / trials as f64;
        assert!((frac - 0.75).abs() < 0.02, "frac = {frac}");
    }
}
