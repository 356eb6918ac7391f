//! Peephole optimizer: split a circuit into same-pair DC-NOT runs, shrink each
//! run to at most three gates, and use pass-throughs to merge runs that are
//! separated by a single DC-NOT on another pair.

use crate::circuit::{circuit_unitary, Circuit, CircuitError, DcNot, Gate};
use crate::linalg::{identity, rot, su2_to_so3, CMat, UnitVec3};
use crate::rewrite2q::{
    local_gates, reduce_2to0, reduce_2to1, reduce_3to0, reduce_3to1, reduce_3to2, reduce_4to3, RewriteError,
    RewriteOutcome,
};
use crate::rewrite3q::{pass_through_1, pass_through_2, pass_through_3, pass_through_reversed, PassThroughContext};
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum OptimizeError {
    #[error("optimizer handles at most 3 qubits, got {0}")]
    TooManyQubits(usize),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
}

/// Names accepted in [`OptimizeConfig::disabled`].
pub const RULES: [&str; 9] = ["4to3", "3to2", "3to1", "3to0", "2to1", "2to0", "pt1", "pt2", "pt3"];

#[derive(Debug, Clone)]
pub struct OptimizeConfig {
    pub max_iter: usize,
    /// End-to-end check: ‖U_in − U_out‖ ≤ verify_tol · (1 + gate count).
    pub verify_tol: f64,
    pub disabled: BTreeSet<String>,
}

impl Default for OptimizeConfig {
    fn default() -> Self {
        OptimizeConfig { max_iter: 64, verify_tol: 1e-5, disabled: BTreeSet::new() }
    }
}

impl OptimizeConfig {
    fn on(&self, rule: &str) -> bool {
        !self.disabled.contains(rule)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PassRecord {
    pub rule: String,
    /// Index of the first affected DC-NOT.
    pub position: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizeReport {
    pub initial_dcnot_count: usize,
    pub final_dcnot_count: usize,
    pub passes_applied: Vec<PassRecord>,
    pub total_residual: f64,
    /// End-to-end unitary defect.
    pub error: f64,
    pub verified: bool,
    pub iterations: usize,
    /// Breach openings that found no solution.
    pub no_solution: usize,
}

/// Maximal run of consecutive DC-NOTs on one wire pair.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub wire_pair: (usize, usize),
    pub start: usize,
    pub end: usize,
    pub gates: Vec<DcNot>,
}

pub fn segments(ds: &[DcNot]) -> Vec<Segment> {
    let mut out: Vec<Segment> = Vec::new();
    for (i, d) in ds.iter().enumerate() {
        match out.last_mut() {
            Some(s) if s.wire_pair == d.wires() => {
                s.end = i + 1;
                s.gates.push(*d);
            }
            _ => out.push(Segment { wire_pair: d.wires(), start: i, end: i + 1, gates: vec![*d] }),
        }
    }
    out
}

/// Moves every local gate to the end by conjugating the DC-NOTs it crosses.
/// Returns the DC-NOTs and the trailing locals.
pub fn push_locals_out(gates: &[Gate], nbits: usize) -> (Vec<DcNot>, Vec<Gate>) {
    let mut pending: Vec<CMat> = vec![identity(2); nbits];
    let mut phase = 0.0;
    let mut ds = Vec::new();
    for g in gates {
        match g {
            Gate::Rot(r) => pending[r.wire] = rot(&r.axis, r.theta) * &pending[r.wire],
            Gate::Phase(p) => phase += p.theta,
            Gate::DcNot(d) => {
                // d·P = P·(P† d P): the DC-NOT sees the vectors rotated by P†.
                let f = |w: usize, v: UnitVec3| {
                    if pending[w] == identity(2) {
                        v
                    } else {
                        UnitVec3::normalize_or(su2_to_so3(&pending[w].adjoint()) * v.v(), v)
                    }
                };
                ds.push(DcNot::new(d.wire_i, f(d.wire_i, d.v_i), d.wire_j, f(d.wire_j, d.v_j)));
            }
        }
    }
    let mut tail = Vec::new();
    for (w, p) in pending.iter().enumerate() {
        tail.extend(local_gates(w, p));
    }
    let phase = phase.rem_euclid(2.0 * std::f64::consts::PI);
    if phase.abs() > 1e-15 {
        tail.push(Gate::phase(phase));
    }
    (ds, tail)
}

/// Working state: DC-NOTs followed by locals.
#[derive(Debug, Clone)]
struct State {
    ds: Vec<DcNot>,
    tail: Vec<Gate>,
}

impl State {
    fn gates(&self) -> Vec<Gate> {
        let mut g: Vec<Gate> = self.ds.iter().map(|d| Gate::DcNot(*d)).collect();
        g.extend(self.tail.iter().copied());
        g
    }

    /// Replaces ds[start..end] with the outcome and renormalizes.
    fn splice(&self, start: usize, end: usize, o: &RewriteOutcome, nbits: usize) -> State {
        let mut g: Vec<Gate> = self.ds[..start].iter().map(|d| Gate::DcNot(*d)).collect();
        g.extend(o.gates());
        g.extend(self.ds[end..].iter().map(|d| Gate::DcNot(*d)));
        g.extend(self.tail.iter().copied());
        let (ds, tail) = push_locals_out(&g, nbits);
        State { ds, tail }
    }
}

struct Log {
    passes: Vec<PassRecord>,
    residual: f64,
    no_solution: usize,
}

impl Log {
    fn new() -> Self {
        Log { passes: Vec::new(), residual: 0.0, no_solution: 0 }
    }
}

/// Applies one rewrite to a whole run and renormalizes within the run.
fn apply_in_run(run: &[DcNot], start: usize, end: usize, o: &RewriteOutcome) -> (Vec<DcNot>, Vec<Gate>) {
    let mut g: Vec<Gate> = run[..start].iter().map(|d| Gate::DcNot(*d)).collect();
    g.extend(o.gates());
    g.extend(run[end..].iter().map(|d| Gate::DcNot(*d)));
    let nbits = run.iter().map(|d| d.wires().1 + 1).max().unwrap_or(2);
    push_locals_out(&g, nbits)
}

fn simplify_run_logged(run: &[DcNot], config: &OptimizeConfig, log: &mut Log, offset: usize) -> RewriteOutcome {
    let mut ds = run.to_vec();
    let mut post: Vec<Gate> = Vec::new();
    let mut residual = 0.0;
    let mut absorb = |ds: &mut Vec<DcNot>, post: &mut Vec<Gate>, start: usize, end: usize, o: &RewriteOutcome| {
        let (nds, tail) = apply_in_run(ds, start, end, o);
        *ds = nds;
        // New trailing locals act before the older ones.
        let mut t = tail;
        t.append(post);
        *post = t;
        residual += o.residual;
    };
    if config.on("4to3") {
        while ds.len() > 3 {
            match reduce_4to3(&ds[..4]) {
                Ok(o) => {
                    log.passes.push(PassRecord { rule: "4to3".into(), position: offset });
                    absorb(&mut ds, &mut post, 0, 4, &o);
                }
                Err(RewriteError::NoSolutionFound(_)) => {
                    log.no_solution += 1;
                    break;
                }
                Err(_) => break,
            }
        }
    }
    type Rule = fn(&[DcNot]) -> Result<RewriteOutcome, RewriteError>;
    let threes: [(&str, Rule); 3] = [("3to0", reduce_3to0), ("3to1", reduce_3to1), ("3to2", reduce_3to2)];
    let twos: [(&str, Rule); 2] = [("2to0", reduce_2to0), ("2to1", reduce_2to1)];
    // Any window may fire; keep going until nothing does.
    'outer: loop {
        for (len, rules) in [(3usize, &threes[..]), (2, &twos[..])] {
            if ds.len() < len {
                continue;
            }
            for start in 0..=ds.len() - len {
                for (name, f) in rules {
                    if !config.on(name) {
                        continue;
                    }
                    if let Ok(o) = f(&ds[start..start + len]) {
                        log.passes.push(PassRecord { rule: (*name).into(), position: offset + start });
                        absorb(&mut ds, &mut post, start, start + len, &o);
                        continue 'outer;
                    }
                }
            }
        }
        break;
    }
    log.residual += residual;
    RewriteOutcome { replacement: ds, pre_locals: Vec::new(), post_locals: post, residual }
}

/// Shrinks a run on one wire pair to at most min(k, 3) DC-NOTs.
pub fn simplify_run(run: &[DcNot]) -> RewriteOutcome {
    simplify_run_logged(run, &OptimizeConfig::default(), &mut Log::new(), 0)
}

/// Simplifies every segment once; returns true if anything changed.
fn simplify_all(state: &mut State, nbits: usize, config: &OptimizeConfig, log: &mut Log) -> bool {
    let mut changed = false;
    loop {
        let mut fired = false;
        for seg in segments(&state.ds) {
            if seg.gates.len() < 2 {
                continue;
            }
            let before = log.passes.len();
            let o = simplify_run_logged(&seg.gates, config, log, seg.start);
            if log.passes.len() > before {
                *state = state.splice(seg.start, seg.end, &o, nbits);
                fired = true;
                changed = true;
                break;
            }
        }
        if !fired {
            return changed;
        }
    }
}

/// A pass-through candidate: rewrite of ds[start..end].
struct Candidate {
    rule: &'static str,
    start: usize,
    end: usize,
    outcome: RewriteOutcome,
}

fn pt_candidates(ds: &[DcNot], config: &OptimizeConfig) -> Vec<Candidate> {
    let segs = segments(ds);
    let mut out = Vec::new();
    for i in 0..segs.len().saturating_sub(1) {
        let (left, stat) = (&segs[i], &segs[i + 1]);
        // Forward: the tail of `left` moves right across a one-gate static
        // segment, towards a run on the same pair.
        if stat.gates.len() == 1 && segs.get(i + 2).is_some_and(|s| s.wire_pair == left.wire_pair) {
            for n in 1..=left.gates.len().min(3) {
                let name = ["pt1", "pt2", "pt3"][n - 1];
                if !config.on(name) {
                    continue;
                }
                let mobile = left.gates[left.gates.len() - n..].to_vec();
                let Ok(ctx) = PassThroughContext::new(mobile, stat.gates[0]) else { continue };
                let res = match n {
                    1 => pass_through_1(&ctx),
                    2 => pass_through_2(&ctx),
                    _ => pass_through_3(&ctx),
                };
                if let Ok(o) = res {
                    out.push(Candidate { rule: name, start: left.end - n, end: stat.end, outcome: o });
                }
            }
        }
        // Backward: the head of the segment after a one-gate static moves left.
        if left.gates.len() == 1 && i > 0 && segs[i - 1].wire_pair == stat.wire_pair {
            let right = stat;
            for n in 1..=right.gates.len().min(3) {
                let name = ["pt1", "pt2", "pt3"][n - 1];
                if !config.on(name) {
                    continue;
                }
                let mobile = &right.gates[..n];
                if let Ok(o) = pass_through_reversed(&left.gates[0], mobile) {
                    out.push(Candidate { rule: name, start: left.start, end: right.start + n, outcome: o });
                }
            }
        }
    }
    out
}

/// Tries pass-throughs whose look-ahead simplification lowers the count.
fn try_pass_throughs(state: &mut State, nbits: usize, config: &OptimizeConfig, log: &mut Log) -> bool {
    let current = state.ds.len();
    for cand in pt_candidates(&state.ds, config) {
        let mut next = state.splice(cand.start, cand.end, &cand.outcome, nbits);
        let mut sub = Log::new();
        sub.passes.push(PassRecord { rule: cand.rule.into(), position: cand.start });
        sub.residual += cand.outcome.residual;
        simplify_all(&mut next, nbits, config, &mut sub);
        if next.ds.len() < current {
            *state = next;
            log.passes.extend(sub.passes);
            log.residual += sub.residual;
            log.no_solution += sub.no_solution;
            return true;
        }
    }
    false
}

/// Optimizes a circuit of at most three qubits.
pub fn optimize(c: &Circuit, config: &OptimizeConfig) -> Result<(Circuit, OptimizeReport), OptimizeError> {
    if c.nbits > 3 {
        return Err(OptimizeError::TooManyQubits(c.nbits));
    }
    c.validate()?;
    let nbits = c.nbits;
    let (ds, tail) = push_locals_out(&c.gates, nbits);
    let mut state = State { ds, tail };
    let mut log = Log::new();
    let mut iterations = 0;
    while iterations < config.max_iter {
        iterations += 1;
        let mut changed = simplify_all(&mut state, nbits, config, &mut log);
        if nbits == 3 && !changed {
            changed = try_pass_throughs(&mut state, nbits, config, &mut log);
        }
        if !changed {
            break;
        }
    }
    let out = Circuit { nbits, gates: state.gates() };
    let error = if nbits == 0 {
        0.0
    } else {
        (circuit_unitary(c)? - circuit_unitary(&out)?).norm()
    };
    let verified = error <= config.verify_tol * (1.0 + out.gates.len() as f64);
    let report = OptimizeReport {
        initial_dcnot_count: c.dcnot_count(),
        final_dcnot_count: out.dcnot_count(),
        passes_applied: log.passes,
        total_residual: log.residual,
        error,
        verified,
        iterations,
        no_solution: log.no_solution,
    };
    Ok((out, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::random_circuit;

    #[test]
    fn push_locals_keeps_unitary() {
        let mut c = random_circuit(3, 5, 9).unwrap();
        c.gates.insert(2, Gate::rot(1, UnitVec3::x(), 0.3));
        c.gates.insert(0, Gate::rot(0, UnitVec3::y(), -1.1));
        c.gates.push(Gate::phase(0.4));
        let (ds, tail) = push_locals_out(&c.gates, 3);
        let mut g: Vec<Gate> = ds.iter().map(|d| Gate::DcNot(*d)).collect();
        g.extend(tail);
        let out = Circuit { nbits: 3, gates: g };
        assert!((circuit_unitary(&c).unwrap() - circuit_unitary(&out).unwrap()).norm() < 1e-12);
    }

    #[test]
    fn single_dcnot_unchanged() {
        let c = random_circuit(2, 1, 3).unwrap();
        let (out, rep) = optimize(&c, &OptimizeConfig::default()).unwrap();
        assert_eq!(out.gates, c.gates);
        assert!(rep.passes_applied.is_empty() && rep.verified);
    }

    #[test]
    fn ten_gate_two_qubit() {
        let c = random_circuit(2, 10, 4).unwrap();
        let (out, rep) = optimize(&c, &OptimizeConfig::default()).unwrap();
        assert!(out.dcnot_count() <= 3, "{rep:?}");
        assert!(rep.verified, "{rep:?}");
    }

    #[test]
    fn four_qubits_rejected() {
        assert!(matches!(optimize(&Circuit::new(4), &OptimizeConfig::default()), Err(OptimizeError::TooManyQubits(4))));
    }
}
