//! Gates, circuits, DC-NOT semantics and the `QCKT 1` text format.
//!
//! A gate list is chronological: the first gate acts first, so the circuit
//! unitary is the product of gate matrices with later gates on the left. Wire 0
//! is the least significant bit of the state index.

use crate::linalg::{c, identity, kron, paulion, rot, CMat, LinalgError, RMat3, UnitVec3, Vec3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CircuitError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: wire {wire} out of range for {nbits} bits")]
    WireOutOfRange { line: usize, wire: usize, nbits: usize },
    #[error("line {line}: vector norm {norm} is not within 1e-6 of 1")]
    NonUnitVector { line: usize, norm: f64 },
    #[error("NBITS missing")]
    MissingNbits,
    #[error("invalid gate: {0}")]
    InvalidGate(String),
}

/// Dressed CNOT σ_{v_i}(wire_i)^{n_{v_j}(wire_j)}, symmetric in its two sides.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DcNot {
    pub wire_i: usize,
    pub v_i: UnitVec3,
    pub wire_j: usize,
    pub v_j: UnitVec3,
}

impl DcNot {
    pub fn new(wire_i: usize, v_i: UnitVec3, wire_j: usize, v_j: UnitVec3) -> Self {
        DcNot { wire_i, v_i, wire_j, v_j }
    }

    /// DC-NOT on wires (0, 1) with `a` on wire 0 and `a1` on wire 1.
    pub fn pair01(a: UnitVec3, a1: UnitVec3) -> Self {
        DcNot::new(0, a, 1, a1)
    }

    pub fn wires(&self) -> (usize, usize) {
        (self.wire_i.min(self.wire_j), self.wire_i.max(self.wire_j))
    }

    /// Defining vector on `wire`, if the gate touches it.
    pub fn vec_on(&self, wire: usize) -> Option<UnitVec3> {
        if wire == self.wire_i {
            Some(self.v_i)
        } else if wire == self.wire_j {
            Some(self.v_j)
        } else {
            None
        }
    }

    /// Same gate written with the lower wire first.
    pub fn canonical(&self) -> Self {
        if self.wire_i <= self.wire_j {
            *self
        } else {
            DcNot::new(self.wire_j, self.v_j, self.wire_i, self.v_i)
        }
    }

    /// U d U† for a product of single-wire rotations given as SO(3) matrices.
    pub fn conjugated(&self, rots: &[RMat3]) -> Self {
        let f = |w: usize, v: UnitVec3| UnitVec3::normalize_or(rots[w] * v.v(), v);
        DcNot::new(self.wire_i, f(self.wire_i, self.v_i), self.wire_j, f(self.wire_j, self.v_j))
    }
}

/// e^{iθσ_axis} on one wire.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalRot {
    pub wire: usize,
    pub axis: UnitVec3,
    pub theta: f64,
}

/// Global phase e^{iθ}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GlobalPhase {
    pub theta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gate {
    DcNot(DcNot),
    Rot(LocalRot),
    Phase(GlobalPhase),
}

impl Gate {
    pub fn rot(wire: usize, axis: UnitVec3, theta: f64) -> Gate {
        Gate::Rot(LocalRot { wire, axis, theta })
    }

    pub fn phase(theta: f64) -> Gate {
        Gate::Phase(GlobalPhase { theta })
    }

    pub fn as_dcnot(&self) -> Option<&DcNot> {
        match self {
            Gate::DcNot(d) => Some(d),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    pub nbits: usize,
    pub gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(nbits: usize) -> Self {
        Circuit { nbits, gates: Vec::new() }
    }

    pub fn from_dcnots(nbits: usize, ds: &[DcNot]) -> Self {
        Circuit { nbits, gates: ds.iter().map(|d| Gate::DcNot(*d)).collect() }
    }

    pub fn dcnot_count(&self) -> usize {
        self.gates.iter().filter(|g| matches!(g, Gate::DcNot(_))).count()
    }

    pub fn validate(&self) -> Result<(), CircuitError> {
        if !(1..=3).contains(&self.nbits) {
            return Err(CircuitError::InvalidGate(format!("nbits {} not in 1..=3", self.nbits)));
        }
        for g in &self.gates {
            check_gate(g, self.nbits)?;
        }
        Ok(())
    }
}

fn check_gate(g: &Gate, nbits: usize) -> Result<(), CircuitError> {
    match g {
        Gate::DcNot(d) => {
            if d.wire_i == d.wire_j || d.wire_i >= nbits || d.wire_j >= nbits {
                return Err(CircuitError::InvalidGate(format!(
                    "DC-NOT wires ({}, {}) invalid for {} bits",
                    d.wire_i, d.wire_j, nbits
                )));
            }
        }
        Gate::Rot(r) => {
            if r.wire >= nbits || !r.theta.is_finite() {
                return Err(CircuitError::InvalidGate(format!("rotation on wire {}", r.wire)));
            }
        }
        Gate::Phase(p) => {
            if !p.theta.is_finite() {
                return Err(CircuitError::InvalidGate("non-finite phase".into()));
            }
        }
    }
    Ok(())
}

/// Embeds per-wire 2×2 operators (`None` = identity) into 2^nbits dimensions.
pub fn embed(ops: &[Option<CMat>], nbits: usize) -> CMat {
    let mut out = identity(1);
    for w in (0..nbits).rev() {
        let op = ops.get(w).cloned().flatten().unwrap_or_else(|| identity(2));
        out = kron(&out, &op);
    }
    out
}

pub fn single_wire(op: &CMat, wire: usize, nbits: usize) -> CMat {
    let mut ops = vec![None; nbits];
    ops[wire] = Some(op.clone());
    embed(&ops, nbits)
}

pub fn dcnot_unitary(d: &DcNot, nbits: usize) -> Result<CMat, CircuitError> {
    check_gate(&Gate::DcNot(*d), nbits)?;
    let dim = 1 << nbits;
    let si = single_wire(&paulion(&d.v_i), d.wire_i, nbits);
    let sj = single_wire(&paulion(&d.v_j), d.wire_j, nbits);
    let sij = &si * &sj;
    Ok((identity(dim) + si + sj - sij) * c(0.5, 0.0))
}

pub fn gate_unitary(g: &Gate, nbits: usize) -> Result<CMat, CircuitError> {
    check_gate(g, nbits)?;
    Ok(match g {
        Gate::DcNot(d) => dcnot_unitary(d, nbits)?,
        Gate::Rot(r) => single_wire(&rot(&r.axis, r.theta), r.wire, nbits),
        Gate::Phase(p) => identity(1 << nbits) * c(p.theta.cos(), p.theta.sin()),
    })
}

/// Unitary of a chronological gate list.
pub fn gates_unitary(gates: &[Gate], nbits: usize) -> Result<CMat, CircuitError> {
    let mut u = identity(1 << nbits);
    for g in gates {
        u = gate_unitary(g, nbits)? * u;
    }
    Ok(u)
}

pub fn circuit_unitary(circ: &Circuit) -> Result<CMat, CircuitError> {
    gates_unitary(&circ.gates, circ.nbits)
}

pub fn dcnots_unitary(ds: &[DcNot], nbits: usize) -> CMat {
    let mut u = identity(1 << nbits);
    for d in ds {
        u = dcnot_unitary(d, nbits).expect("valid DC-NOT") * u;
    }
    u
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    I,
    J,
}

/// Negates the defining vector on `side`. Returns the new DC-NOT and the gates
/// for σ_v on the opposite wire (a rotation by π/2 and a phase of −π/2); the
/// Paulion commutes with the DC-NOT so the gates may sit on either side.
pub fn negate_vector(d: &DcNot, side: Side) -> (DcNot, Vec<Gate>) {
    let (nd, wire, v) = match side {
        Side::I => (DcNot::new(d.wire_i, -d.v_i, d.wire_j, d.v_j), d.wire_j, d.v_j),
        Side::J => (DcNot::new(d.wire_i, d.v_i, d.wire_j, -d.v_j), d.wire_i, d.v_i),
    };
    (nd, paulion_gates(wire, v))
}

/// σ_v = −i·e^{i(π/2)σ_v} as gates.
pub fn paulion_gates(wire: usize, v: UnitVec3) -> Vec<Gate> {
    vec![
        Gate::rot(wire, v, std::f64::consts::FRAC_PI_2),
        Gate::phase(-std::f64::consts::FRAC_PI_2),
    ]
}

pub fn random_unit<R: Rng>(rng: &mut R) -> UnitVec3 {
    loop {
        let v = Vec3::new(
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
        );
        if let Ok(u) = UnitVec3::normalize(v) {
            return u;
        }
    }
}

/// Seeded random circuit of DC-NOTs with Gaussian-normalized defining vectors
/// drawn from ChaCha8. Wire pairs are chosen uniformly.
pub fn random_circuit(nbits: usize, dcnots: usize, seed: u64) -> Result<Circuit, CircuitError> {
    if !(1..=3).contains(&nbits) || (nbits == 1 && dcnots > 0) {
        return Err(CircuitError::InvalidGate(format!(
            "cannot place {dcnots} DC-NOTs on {nbits} bits"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pairs: Vec<(usize, usize)> = match nbits {
        2 => vec![(0, 1)],
        3 => vec![(0, 1), (0, 2), (1, 2)],
        _ => vec![],
    };
    let mut circ = Circuit::new(nbits);
    for _ in 0..dcnots {
        let (wi, wj) = pairs[rng.random_range(0..pairs.len())];
        let vi = random_unit(&mut rng);
        let vj = random_unit(&mut rng);
        circ.gates.push(Gate::DcNot(DcNot::new(wi, vi, wj, vj)));
    }
    Ok(circ)
}

fn fmt_f(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn serialize(circ: &Circuit) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "QCKT 1");
    let _ = writeln!(s, "NBITS {}", circ.nbits);
    for g in &circ.gates {
        match g {
            Gate::DcNot(d) => {
                let _ = writeln!(
                    s,
                    "DCNOT {} {} {} {} {} {} {} {}",
                    d.wire_i,
                    d.wire_j,
                    fmt_f(d.v_i.x),
                    fmt_f(d.v_i.y),
                    fmt_f(d.v_i.z),
                    fmt_f(d.v_j.x),
                    fmt_f(d.v_j.y),
                    fmt_f(d.v_j.z)
                );
            }
            Gate::Rot(r) => {
                let _ = writeln!(
                    s,
                    "ROT {} {} {} {} {}",
                    r.wire,
                    fmt_f(r.axis.x),
                    fmt_f(r.axis.y),
                    fmt_f(r.axis.z),
                    fmt_f(r.theta)
                );
            }
            Gate::Phase(p) => {
                let _ = writeln!(s, "PHASE {}", fmt_f(p.theta));
            }
        }
    }
    s
}

fn parse_unit(line: usize, xs: &[f64]) -> Result<UnitVec3, CircuitError> {
    let v = Vec3::new(xs[0], xs[1], xs[2]);
    let n = v.norm();
    if !n.is_finite() || (n - 1.0).abs() > 1e-6 {
        return Err(CircuitError::NonUnitVector { line, norm: n });
    }
    // Vectors already unit to rounding are kept bit-exact so that a second
    // parse/serialize pass is byte-stable.
    if (n - 1.0).abs() <= 1e-14 {
        return Ok(UnitVec3::new_unchecked(v));
    }
    UnitVec3::normalize(v).map_err(|e: LinalgError| CircuitError::Syntax { line, msg: e.to_string() })
}

pub fn parse(text: &str) -> Result<Circuit, CircuitError> {
    let mut nbits: Option<usize> = None;
    let mut seen_magic = false;
    let mut gates = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = raw.split('#').next().unwrap_or("");
        let toks: Vec<&str> = body.split_whitespace().collect();
        if toks.is_empty() {
            continue;
        }
        let syn = |msg: String| CircuitError::Syntax { line, msg };
        if !seen_magic {
            if toks != ["QCKT", "1"] {
                return Err(syn(format!("expected `QCKT 1`, found `{}`", toks.join(" "))));
            }
            seen_magic = true;
            continue;
        }
        let Some(n) = nbits else {
            if toks.len() != 2 || toks[0] != "NBITS" {
                return Err(CircuitError::MissingNbits);
            }
            let n: usize = toks[1].parse().map_err(|_| syn(format!("bad NBITS `{}`", toks[1])))?;
            if !(1..=3).contains(&n) {
                return Err(syn(format!("NBITS {n} not in 1..=3")));
            }
            nbits = Some(n);
            continue;
        };
        let floats = |ts: &[&str]| -> Result<Vec<f64>, CircuitError> {
            ts.iter()
                .map(|t| {
                    t.parse::<f64>()
                        .ok()
                        .filter(|x| x.is_finite())
                        .ok_or_else(|| syn(format!("bad number `{t}`")))
                })
                .collect()
        };
        let wire = |t: &str| -> Result<usize, CircuitError> {
            let w: usize = t.parse().map_err(|_| syn(format!("bad wire `{t}`")))?;
            if w >= n {
                return Err(CircuitError::WireOutOfRange { line, wire: w, nbits: n });
            }
            Ok(w)
        };
        match toks[0] {
            "DCNOT" => {
                if toks.len() != 9 {
                    return Err(syn("DCNOT takes 8 arguments".into()));
                }
                let (wi, wj) = (wire(toks[1])?, wire(toks[2])?);
                if wi == wj {
                    return Err(syn("DCNOT wires must differ".into()));
                }
                let xs = floats(&toks[3..9])?;
                gates.push(Gate::DcNot(DcNot::new(
                    wi,
                    parse_unit(line, &xs[0..3])?,
                    wj,
                    parse_unit(line, &xs[3..6])?,
                )));
            }
            "ROT" => {
                if toks.len() != 6 {
                    return Err(syn("ROT takes 5 arguments".into()));
                }
                let w = wire(toks[1])?;
                let xs = floats(&toks[2..6])?;
                gates.push(Gate::rot(w, parse_unit(line, &xs[0..3])?, xs[3]));
            }
            "PHASE" => {
                if toks.len() != 2 {
                    return Err(syn("PHASE takes 1 argument".into()));
                }
                gates.push(Gate::phase(floats(&toks[1..2])?[0]));
            }
            other => return Err(syn(format!("unknown gate `{other}`"))),
        }
    }
    match nbits {
        Some(nbits) => Ok(Circuit { nbits, gates }),
        None => Err(CircuitError::MissingNbits),
    }
}
