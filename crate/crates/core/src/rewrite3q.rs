//! Rewrites that move DC-NOTs between wire pairs of a 3-qubit circuit.
//!
//! A pass-through context is a run of 1–3 "mobile" DC-NOTs on one pair
//! followed (in time) by a "static" DC-NOT on another pair that shares one
//! wire with it. Each pass-through returns an equivalent gate list in which
//! one mobile DC-NOT acts after the static one. Outputs are certified by
//! factoring R†L on all three wires.

use crate::circuit::{dcnots_unitary, gates_unitary, DcNot, Gate};
use crate::invariants::{closed_parts, factor_tensor_product, InvariantError, VecPair};
use crate::linalg::{complete_rhon, CMat, UnitVec3, Vec3};
use crate::rewrite2q::{
    classify_pairs, local_gates, par, perp, reduce_3to1, synthesize, RewriteError, RewriteOutcome, TClass,
};

/// Certificate tolerance for the three pass-throughs.
pub const PT_TOL: [f64; 3] = [1e-8, 1e-7, 1e-6];

#[derive(Debug, Clone, PartialEq)]
pub struct PassThroughContext {
    /// Chronological, all on one wire pair.
    pub mobile_run: Vec<DcNot>,
    /// Acts after the whole mobile run.
    pub static_gate: DcNot,
}

/// Wire roles: (shared, mobile-only, static-only).
fn roles(mobile: &DcNot, stat: &DcNot) -> Result<(usize, usize, usize), RewriteError> {
    let (m0, m1) = mobile.wires();
    let (s0, s1) = stat.wires();
    let shared: Vec<usize> = [m0, m1].into_iter().filter(|w| *w == s0 || *w == s1).collect();
    if shared.len() != 1 || m0 == m1 || s0 == s1 {
        return Err(RewriteError::Contract("mobile and static DC-NOTs must share exactly one wire".into()));
    }
    let s = shared[0];
    let m = if m0 == s { m1 } else { m0 };
    let t = if s0 == s { s1 } else { s0 };
    if s.max(m).max(t) > 2 {
        return Err(RewriteError::Contract("pass-throughs act on wires 0..3".into()));
    }
    Ok((s, m, t))
}

impl PassThroughContext {
    pub fn new(mobile_run: Vec<DcNot>, static_gate: DcNot) -> Result<Self, RewriteError> {
        if mobile_run.is_empty() || mobile_run.len() > 3 {
            return Err(RewriteError::Contract("mobile run must hold 1 to 3 DC-NOTs".into()));
        }
        let pair = mobile_run[0].wires();
        if mobile_run.iter().any(|d| d.wires() != pair) {
            return Err(RewriteError::Contract("mobile run spans more than one pair".into()));
        }
        roles(&mobile_run[0], &static_gate)?;
        Ok(PassThroughContext { mobile_run, static_gate })
    }

    fn roles(&self) -> (usize, usize, usize) {
        roles(&self.mobile_run[0], &self.static_gate).expect("validated in new")
    }

    /// Mobile run as (shared-wire vector, other vector) pairs.
    fn mobile_pairs(&self) -> Vec<VecPair> {
        let (s, m, _) = self.roles();
        self.mobile_run.iter().map(|d| (d.vec_on(s).unwrap(), d.vec_on(m).unwrap())).collect()
    }

    pub fn gates(&self) -> Vec<DcNot> {
        let mut out = self.mobile_run.clone();
        out.push(self.static_gate);
        out
    }
}

/// L = R·F with F local on three wires; returns F as gates.
pub(crate) fn certify3(l: &CMat, replacement: &[DcNot], tol: f64) -> Result<RewriteOutcome, RewriteError> {
    let rm = dcnots_unitary(replacement, 3);
    let f = rm.adjoint() * l;
    let fact = factor_tensor_product(&f, 3).map_err(|e| match e {
        InvariantError::NotFactorable(r) => RewriteError::CertificateFailed(r),
        e => e.into(),
    })?;
    let mut pre = Vec::new();
    for (w, m) in fact.factors.iter().enumerate() {
        pre.extend(local_gates(w, m));
    }
    if fact.phase.abs() > 1e-15 {
        pre.push(Gate::phase(fact.phase));
    }
    let rebuilt = &rm * gates_unitary(&pre, 3).expect("local gates on three wires");
    let residual = (l - rebuilt).norm();
    if residual > tol {
        return Err(RewriteError::CertificateFailed(residual));
    }
    Ok(RewriteOutcome { replacement: replacement.to_vec(), pre_locals: pre, post_locals: Vec::new(), residual })
}

/// Wake identity for two DC-NOTs that share a wire on which their vectors
/// are perpendicular. Returns three DC-NOTs with the same unitary; the third
/// ("wake") gate joins the two outer wires and commutes with both inputs.
pub fn wake_rewrite(first: &DcNot, second: &DcNot) -> Result<Vec<DcNot>, RewriteError> {
    let (s, a, b) = roles(first, second)?;
    let (u, v) = (first.vec_on(s).unwrap(), second.vec_on(s).unwrap());
    if !perp(&u, &v) {
        return Err(RewriteError::NotApplicable("wake needs perpendicular vectors on the shared wire".into()));
    }
    let wake = DcNot::new(a, first.vec_on(a).unwrap(), b, second.vec_on(b).unwrap());
    Ok(vec![wake.canonical(), *second, *first])
}

/// Builds a DC-NOT from a (shared, other) pair.
fn on_wires(p: &VecPair, s: usize, m: usize) -> DcNot {
    DcNot::new(s, p.0, m, p.1).canonical()
}

/// Maps a replacement computed on local wires (0 = shared, 1 = mobile-only).
fn lift_pairs(ds: &[DcNot], s: usize, m: usize) -> Vec<DcNot> {
    ds.iter()
        .map(|d| {
            let map = [s, m];
            DcNot::new(map[d.wire_i], d.v_i, map[d.wire_j], d.v_j).canonical()
        })
        .collect()
}

/// Pass-Through 1: [mobile, static] → [static, mobile′]. Possible iff the
/// two vectors on the shared wire are parallel.
pub fn pass_through_1(ctx: &PassThroughContext) -> Result<RewriteOutcome, RewriteError> {
    if ctx.mobile_run.len() != 1 {
        return Err(RewriteError::Contract("pass-through 1 takes one mobile DC-NOT".into()));
    }
    let (s, m, _) = ctx.roles();
    let (a, a1) = ctx.mobile_pairs()[0];
    let b = ctx.static_gate.vec_on(s).unwrap();
    if !par(&a, &b) {
        return Err(RewriteError::NotApplicable("pass-through 1 needs parallel shared-wire vectors".into()));
    }
    let l = dcnots_unitary(&ctx.gates(), 3);
    // With â = −b̂ the mobile gate differs from DC(b̂, â′) by a local σ_â′.
    let moved = on_wires(&(b, a1), s, m);
    certify3(&l, &[ctx.static_gate, moved], PT_TOL[0])
}

/// Candidate wedge vectors t̂′ for pass-through 2.
fn pt2_candidates(a: &VecPair, b: &VecPair, e: &UnitVec3) -> Vec<UnitVec3> {
    let b1 = b.1;
    let k3 = UnitVec3::normalize(a.1.cross(&b1)).ok();
    let mut out = vec![b1, -b1];
    if let Some(k) = k3 {
        out.extend([k, -k]);
        // T4: t̂′ in span(b̂′, â′×b̂′) with |tan angle(b̂′, t̂′)| = |tan angle(b̂, ê)|.
        let psi0 = b.0.cross(e).norm().atan2(b.0.dot(e).abs());
        for psi in [psi0, -psi0, std::f64::consts::PI - psi0, std::f64::consts::PI + psi0] {
            out.push(UnitVec3::normalize_or(b1.v() * psi.cos() + k.v() * psi.sin(), b1));
        }
    } else {
        out.push(complete_rhon(&b1).f2);
    }
    out
}

/// Pass-Through 2: [m₁, m₂, static] → F, [m₁′, static, (ê, t̂′)]. Applies
/// when some wedge (ê, t̂′) makes [m₁, m₂, (ê, t̂′)] reducible to one DC-NOT.
pub fn pass_through_2(ctx: &PassThroughContext) -> Result<RewriteOutcome, RewriteError> {
    if ctx.mobile_run.len() != 2 {
        return Err(RewriteError::Contract("pass-through 2 takes two mobile DC-NOTs".into()));
    }
    let (s, m, _) = ctx.roles();
    let p = ctx.mobile_pairs();
    let e = ctx.static_gate.vec_on(s).unwrap();
    let l = dcnots_unitary(&ctx.gates(), 3);
    let mut last = RewriteError::NotApplicable("no wedge vector makes the run 3->1 reducible".into());
    for t1 in pt2_candidates(&p[0], &p[1], &e) {
        let run = [p[0], p[1], (e, t1)];
        if classify_pairs(&run) == TClass::None {
            continue;
        }
        let local: Vec<DcNot> = run.iter().map(|x| DcNot::pair01(x.0, x.1)).collect();
        let one = match reduce_3to1(&local) {
            Ok(o) => o,
            Err(err) => {
                last = err;
                continue;
            }
        };
        let mut repl = lift_pairs(&one.replacement, s, m);
        repl.push(ctx.static_gate);
        repl.push(on_wires(&(e, t1), s, m));
        match certify3(&l, &repl, PT_TOL[1]) {
            Ok(o) => return Ok(o),
            Err(err) => last = err,
        }
    }
    Err(last)
}

/// Wedge vector d̂′ for pass-through 3: perpendicular to M_μ ê, built from a
/// fixed seed (ẑ, or x̂ when ẑ is parallel to M_μ ê).
pub fn pt3_wedge(p: &[VecPair], e: &UnitVec3) -> Result<UnitVec3, RewriteError> {
    let parts = closed_parts(p)?;
    let v = parts.gi * e.v();
    if v.norm() <= 1e-12 {
        return Ok(UnitVec3::z());
    }
    let n = v.normalize();
    for seed in [Vec3::z(), Vec3::x()] {
        let across = seed - n * n.dot(&seed);
        if let Ok(u) = UnitVec3::normalize(across) {
            if across.norm() > 1e-6 {
                return Ok(u);
            }
        }
    }
    Ok(complete_rhon(&UnitVec3::new_unchecked(n)).f2)
}

/// Pass-Through 3: [m₁, m₂, m₃, static] → F, [m₁′, m₂′, static, (ê, d̂′)].
/// Always applicable.
pub fn pass_through_3(ctx: &PassThroughContext) -> Result<RewriteOutcome, RewriteError> {
    if ctx.mobile_run.len() != 3 {
        return Err(RewriteError::Contract("pass-through 3 takes three mobile DC-NOTs".into()));
    }
    let (s, m, _) = ctx.roles();
    let p = ctx.mobile_pairs();
    let e = ctx.static_gate.vec_on(s).unwrap();
    let l = dcnots_unitary(&ctx.gates(), 3);
    let d1 = pt3_wedge(&p, &e)?;
    let mut tries = vec![d1];
    // The constraint leaves a circle of choices; walk it if the first fails.
    let v = closed_parts(&p)?.gi * e.v();
    if let Ok(w) = UnitVec3::normalize(v.cross(&d1)) {
        for j in 1..12 {
            let t = j as f64 * std::f64::consts::PI / 6.0;
            tries.push(UnitVec3::normalize_or(d1.v() * t.cos() + w.v() * t.sin(), d1));
        }
    }
    let mut last = RewriteError::NoSolutionFound("pass-through 3".into());
    for d1 in tries {
        let four = [p[0], p[1], p[2], (e, d1)];
        let l4 = dcnots_unitary(&four.iter().map(|x| DcNot::pair01(x.0, x.1)).collect::<Vec<_>>(), 2);
        let two = match synthesize(&l4, 2) {
            Ok(o) => o,
            Err(err) => {
                last = err;
                continue;
            }
        };
        let mut repl = lift_pairs(&two.replacement, s, m);
        repl.push(ctx.static_gate);
        repl.push(on_wires(&(e, d1), s, m));
        match certify3(&l, &repl, PT_TOL[2]) {
            Ok(o) => return Ok(o),
            Err(err) => last = err,
        }
    }
    Err(last)
}

/// Dispatches on the length of the mobile run.
pub fn pass_through(ctx: &PassThroughContext) -> Result<RewriteOutcome, RewriteError> {
    match ctx.mobile_run.len() {
        1 => pass_through_1(ctx),
        2 => pass_through_2(ctx),
        _ => pass_through_3(ctx),
    }
}

/// Mirror of a pass-through: static first, then the mobile run. Solved on the
/// adjoint circuit and reversed back.
pub fn pass_through_reversed(stat: &DcNot, mobile_run: &[DcNot]) -> Result<RewriteOutcome, RewriteError> {
    let rev: Vec<DcNot> = mobile_run.iter().rev().copied().collect();
    let ctx = PassThroughContext::new(rev, *stat)?;
    let o = pass_through(&ctx)?;
    // L† = R·F  ⇒  L = F†·R†, and R† is the reversed DC-NOT list.
    let f = gates_unitary(&o.pre_locals, 3).expect("local gates");
    let fact = factor_tensor_product(&f.adjoint(), 3)?;
    let mut post = Vec::new();
    for (w, m) in fact.factors.iter().enumerate() {
        post.extend(local_gates(w, m));
    }
    if fact.phase.abs() > 1e-15 {
        post.push(Gate::phase(fact.phase));
    }
    let mut repl = o.replacement.clone();
    repl.reverse();
    let mut l_gates: Vec<Gate> = vec![Gate::DcNot(*stat)];
    l_gates.extend(mobile_run.iter().map(|d| Gate::DcNot(*d)));
    let l = gates_unitary(&l_gates, 3).expect("valid gates");
    let mut r_gates: Vec<Gate> = repl.iter().map(|d| Gate::DcNot(*d)).collect();
    r_gates.extend(post.iter().copied());
    let residual = (l - gates_unitary(&r_gates, 3).expect("valid gates")).norm();
    let tol = PT_TOL[mobile_run.len().clamp(1, 3) - 1];
    if residual > tol {
        return Err(RewriteError::CertificateFailed(residual));
    }
    Ok(RewriteOutcome { replacement: repl, pre_locals: Vec::new(), post_locals: post, residual })
}
