//! Constructive rewrites of DC-NOT runs on one wire pair.
//!
//! Every reduction checks its applicability predicate, builds a candidate
//! replacement from the quadratic invariant, and then certifies it: the
//! leftover operator R†L must factor into single-qubit pieces. Those pieces
//! are returned as `pre_locals` (they act before the replacement). Locals that
//! would act after a replacement are absorbed into its defining vectors, so
//! `post_locals` is empty for every rewrite in this module.

use crate::circuit::{dcnots_unitary, gates_unitary, paulion_gates, DcNot, Gate};
use crate::invariants::{
    angles_from_products, closed_parts, diagonalize_g2_parts, diagonalize_g3_parts,
    factor_tensor_product, g2_tail, quad_invariant_unchecked, G2Products, GammaParts,
    InvariantError, PrincipalParams2, VecPair,
};
use crate::linalg::{
    c, complete_rhon, identity, kron, paulion, rank_one, rot, su2_axis_angle, su2_to_so3, xs, CMat,
    RMat3, RhonBasis, UnitVec3, Vec3,
};
use std::f64::consts::{FRAC_PI_2, PI};
use thiserror::Error;

/// Tolerance of the parallel/perpendicular predicates.
pub const PRED_TOL: f64 = 1e-9;
/// Largest accepted certificate residual.
pub const CERT_TOL: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RewriteError {
    #[error("not applicable: {0}")]
    NotApplicable(String),
    #[error("no solution found: {0}")]
    NoSolutionFound(String),
    #[error("certificate failed (residual {0:e})")]
    CertificateFailed(f64),
    #[error("contract violated: {0}")]
    Contract(String),
    #[error(transparent)]
    Invariant(#[from] InvariantError),
}

fn not_applicable<T>(msg: &str) -> Result<T, RewriteError> {
    Err(RewriteError::NotApplicable(msg.into()))
}

/// L = post · replacement · pre, all chronological.
#[derive(Debug, Clone, PartialEq)]
pub struct RewriteOutcome {
    pub replacement: Vec<DcNot>,
    pub pre_locals: Vec<Gate>,
    pub post_locals: Vec<Gate>,
    pub residual: f64,
}

impl RewriteOutcome {
    /// Chronological gate list equivalent to the rewritten run.
    pub fn gates(&self) -> Vec<Gate> {
        let mut out = self.pre_locals.clone();
        out.extend(self.replacement.iter().map(|d| Gate::DcNot(*d)));
        out.extend(self.post_locals.iter().copied());
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TClass {
    T1a,
    T1b,
    T2a,
    T2b,
    T3a,
    T3b,
    T4,
    None,
}

/// p = c_ξ ŵ₁ + s_ξ ŵ₂ and q = c_ξ ŵ₁ − s_ξ ŵ₂.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PQVectors {
    pub xi: f64,
    pub p: UnitVec3,
    pub q: UnitVec3,
}

impl PQVectors {
    /// `w1` and `w2` must be orthonormal.
    pub fn new(w1: &UnitVec3, w2: &UnitVec3, xi: f64) -> Self {
        let (c, s) = (xi.cos(), xi.sin());
        PQVectors {
            xi,
            p: UnitVec3::new_unchecked(w1.v() * c + w2.v() * s),
            q: UnitVec3::new_unchecked(w1.v() * c - w2.v() * s),
        }
    }
}

// ---------------------------------------------------------------------------
// Plumbing shared by all rewrites.

pub(crate) fn par(a: &Vec3, b: &Vec3) -> bool {
    a.cross(b).norm() <= PRED_TOL
}

pub(crate) fn perp(a: &Vec3, b: &Vec3) -> bool {
    a.dot(b).abs() <= PRED_TOL
}

/// Maps a run on one wire pair to (lo, hi, pairs) with `.0` on the lower wire.
fn localize(run: &[DcNot]) -> Result<(usize, usize, Vec<VecPair>), RewriteError> {
    let Some(first) = run.first() else {
        return Err(RewriteError::Contract("empty run".into()));
    };
    let (lo, hi) = first.wires();
    if lo == hi {
        return Err(RewriteError::Contract("DC-NOT on a single wire".into()));
    }
    let mut pairs = Vec::with_capacity(run.len());
    for d in run {
        if d.wires() != (lo, hi) {
            return Err(RewriteError::Contract("run spans more than one wire pair".into()));
        }
        let d = d.canonical();
        pairs.push((d.v_i, d.v_j));
    }
    Ok((lo, hi, pairs))
}

fn expect_len(run: &[DcNot], n: usize) -> Result<(usize, usize, Vec<VecPair>), RewriteError> {
    if run.len() != n {
        return Err(RewriteError::Contract(format!("expected {n} DC-NOTs, got {}", run.len())));
    }
    localize(run)
}

fn to_dcnots(pairs: &[VecPair]) -> Vec<DcNot> {
    pairs.iter().map(|p| DcNot::pair01(p.0, p.1)).collect()
}

pub(crate) fn pairs_unitary(pairs: &[VecPair]) -> CMat {
    dcnots_unitary(&to_dcnots(pairs), 2)
}

fn relabel_gate(g: &Gate, map: &[usize]) -> Gate {
    match g {
        Gate::DcNot(d) => Gate::DcNot(DcNot::new(map[d.wire_i], d.v_i, map[d.wire_j], d.v_j)),
        Gate::Rot(r) => Gate::rot(map[r.wire], r.axis, r.theta),
        Gate::Phase(p) => Gate::Phase(*p),
    }
}

/// Moves an outcome computed on wires (0, 1) to wires (lo, hi).
fn lift(out: RewriteOutcome, lo: usize, hi: usize) -> RewriteOutcome {
    let map = [lo, hi];
    let gate = |g: &Gate| relabel_gate(g, &map);
    RewriteOutcome {
        replacement: out
            .replacement
            .iter()
            .map(|d| DcNot::new(map[d.wire_i], d.v_i, map[d.wire_j], d.v_j))
            .collect(),
        pre_locals: out.pre_locals.iter().map(gate).collect(),
        post_locals: out.post_locals.iter().map(gate).collect(),
        residual: out.residual,
    }
}

/// Gates for an arbitrary 2×2 unitary on one wire: a rotation and a phase.
pub fn local_gates(wire: usize, m: &CMat) -> Vec<Gate> {
    let phi = 0.5 * m.determinant().arg();
    let s = m * c(phi.cos(), -phi.sin());
    let (axis, theta) = su2_axis_angle(&s);
    let mut out = Vec::new();
    if theta.abs() > 1e-15 {
        out.push(Gate::rot(wire, axis, theta));
    }
    if phi.abs() > 1e-15 {
        out.push(Gate::phase(phi));
    }
    out
}

/// SU(2) element whose rotation takes `from` to `to`.
pub fn su2_mapping(from: &UnitVec3, to: &UnitVec3) -> CMat {
    let n = from.cross(to);
    let cos = from.dot(to);
    if n.norm() <= 1e-14 {
        if cos > 0.0 {
            return identity(2);
        }
        return rot(&complete_rhon(from).f2, -FRAC_PI_2);
    }
    let psi = n.norm().atan2(cos);
    rot(&n.normalize(), -0.5 * psi)
}

/// U·DC·U† for U = u0 ⊗ u1 (u0 on wire 0).
fn conjugate_pairs(pairs: &[VecPair], u0: &CMat, u1: &CMat) -> Vec<VecPair> {
    let (r0, r1) = (su2_to_so3(u0), su2_to_so3(u1));
    rotate_pairs(pairs, &r0, &r1)
}

fn rotate_pairs(pairs: &[VecPair], r0: &RMat3, r1: &RMat3) -> Vec<VecPair> {
    pairs
        .iter()
        .map(|p| (UnitVec3::normalize_or(r0 * p.0.v(), p.0), UnitVec3::normalize_or(r1 * p.1.v(), p.1)))
        .collect()
}

/// Factors a local 4×4 operator into (u0, u1).
fn split_local(m: &CMat) -> Result<(CMat, CMat), RewriteError> {
    let f = factor_tensor_product(m, 2).map_err(|e| match e {
        InvariantError::NotFactorable(r) => RewriteError::CertificateFailed(r),
        e => e.into(),
    })?;
    Ok((f.factors[0].clone(), f.factors[1].clone()))
}

/// Certifies L = R · F with F local and returns F as gates plus the residual.
pub(crate) fn certify(l: &CMat, replacement: &[VecPair], tol: f64) -> Result<(Vec<Gate>, f64), RewriteError> {
    let rm = pairs_unitary(replacement);
    let f = rm.adjoint() * l;
    let fact = factor_tensor_product(&f, 2).map_err(|e| match e {
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
    let rebuilt = &rm * gates_unitary(&pre, 2).expect("local gates on two wires");
    let residual = (l - rebuilt).norm();
    if residual > tol {
        return Err(RewriteError::CertificateFailed(residual));
    }
    Ok((pre, residual))
}

fn outcome(l: &CMat, replacement: &[VecPair]) -> Result<RewriteOutcome, RewriteError> {
    let (pre, residual) = certify(l, replacement, CERT_TOL)?;
    Ok(RewriteOutcome { replacement: to_dcnots(replacement), pre_locals: pre, post_locals: Vec::new(), residual })
}

/// The two invariants an r-DC-NOT circuit LO-RHS equivalent to L may have.
///
/// det of r DC-NOTs is (−1)^r, so R⁽²⁾ = ±√((−1)^r / det L) · L⁽²⁾.
fn phase_targets(l: &CMat, r: usize) -> [GammaParts; 2] {
    let det = l.determinant();
    let sign = if r % 2 == 0 { 1.0 } else { -1.0 };
    let s = (c(sign, 0.0) / det).sqrt();
    let p = GammaParts::from_matrix(&(quad_invariant_unchecked(l, 2) * s));
    [p, p.scaled(-1.0)]
}

/// Single DC-NOT whose invariant is `target` (G₁ = −σ_{a′,a}).
fn g1_candidate(target: &GammaParts) -> Option<VecPair> {
    let (sigma, u, v) = rank_one(&target.gr);
    if (sigma - 1.0).abs() > 1e-6 {
        return None;
    }
    let mut a = v.normalize();
    let mut a1 = -u.normalize();
    // Both signs describe the same invariant; prefer a leading positive component.
    let lead = a.iter().copied().find(|x| x.abs() > 1e-9).unwrap_or(1.0);
    if lead < 0.0 {
        a = -a;
        a1 = -a1;
    }
    let pair = (UnitVec3::new_unchecked(a), UnitVec3::new_unchecked(a1));
    let res = closed_parts(&[pair]).ok()?.distance(target);
    (res <= 1e-6).then_some(pair)
}

/// Synthesizes r ≤ 3 DC-NOTs LO-RHS equivalent to the 4×4 unitary `l`.
pub(crate) fn synthesize(l: &CMat, r: usize) -> Result<RewriteOutcome, RewriteError> {
    if r == 0 {
        return outcome(l, &[]);
    }
    let mut last = RewriteError::NotApplicable(format!("no {r}-DC-NOT form"));
    for target in phase_targets(l, r) {
        let cand: Option<Vec<VecPair>> = match r {
            1 => g1_candidate(&target).map(|p| vec![p]),
            2 => diagonalize_g2_parts(&target).ok().map(|x| x.1.to_vec()),
            3 => diagonalize_g3_parts(&target).ok().map(|x| x.1.to_vec()),
            _ => return Err(RewriteError::Contract(format!("cannot synthesize {r} DC-NOTs"))),
        };
        if let Some(pairs) = cand {
            match outcome(l, &pairs) {
                Ok(o) => return Ok(o),
                Err(e) => last = e,
            }
        }
    }
    Err(last)
}

/// Attempts an r-DC-NOT replacement without checking any predicate. Used to
/// falsify the necessity direction of the reduction theorems.
pub fn force_reduce(run: &[DcNot], r: usize) -> Result<RewriteOutcome, RewriteError> {
    let (lo, hi, pairs) = localize(run)?;
    synthesize(&pairs_unitary(&pairs), r).map(|o| lift(o, lo, hi))
}

/// Synthesizes ≤ 3 DC-NOTs for an arbitrary 2-qubit unitary, trying the
/// smallest count first.
pub fn synthesize_unitary(u: &CMat) -> Result<RewriteOutcome, RewriteError> {
    if u.nrows() != 4 {
        return Err(RewriteError::Contract("synthesize_unitary needs a 4x4 matrix".into()));
    }
    let mut last = RewriteError::NoSolutionFound("no form with at most 3 DC-NOTs".into());
    for r in 0..=3 {
        match synthesize(u, r) {
            Ok(o) => return Ok(o),
            Err(e) => last = e,
        }
    }
    Err(last)
}

// ---------------------------------------------------------------------------
// 2 → 2, 2 → 1, 2 → 0.

/// Exchanges the inter-vector angles of the two wires.
pub fn swap_angles(run: &[DcNot]) -> Result<RewriteOutcome, RewriteError> {
    let (lo, hi, pairs) = expect_len(run, 2)?;
    let l = pairs_unitary(&pairs);
    let mut last = RewriteError::CertificateFailed(f64::INFINITY);
    let cos0 = pairs[0].0.dot(&pairs[1].0).abs();
    let cos1 = pairs[0].1.dot(&pairs[1].1).abs();
    // Either (α, α′) or (α′, α) may come back from the diagonalization, so
    // keep whichever candidate actually exchanges the input angles.
    let exchanged = |p: &[VecPair; 2]| {
        (p[0].0.dot(&p[1].0).abs() - cos1).abs() <= 1e-7 && (p[0].1.dot(&p[1].1).abs() - cos0).abs() <= 1e-7
    };
    for target in phase_targets(&l, 2) {
        let Ok((pp, _, _)) = diagonalize_g2_parts(&target) else { continue };
        let neg = |u: UnitVec3| -u;
        let swapped = PrincipalParams2 {
            alpha: pp.alpha_prime,
            alpha_prime: pp.alpha,
            f: RhonBasis { f1: pp.f.f3, f2: neg(pp.f.f2), f3: pp.f.f1 },
            f_prime: RhonBasis { f1: pp.f_prime.f3, f2: neg(pp.f_prime.f2), f3: pp.f_prime.f1 },
        };
        for cand in [swapped.pairs(), pp.pairs()] {
            if !exchanged(&cand) {
                continue;
            }
            match outcome(&l, &cand) {
                Ok(o) => return Ok(lift(o, lo, hi)),
                Err(e) => last = e,
            }
        }
    }
    Err(last)
}

pub fn reduce_2to1(run: &[DcNot]) -> Result<RewriteOutcome, RewriteError> {
    let (lo, hi, p) = expect_len(run, 2)?;
    let ((a, a1), (b, b1)) = (p[0], p[1]);
    let ok = (par(&b, &a) && perp(&b1, &a1)) || (perp(&b, &a) && par(&b1, &a1));
    if !ok {
        return not_applicable("2->1 needs a breach on one wire and a foil on the other");
    }
    synthesize(&pairs_unitary(&p), 1).map(|o| lift(o, lo, hi))
}

pub fn reduce_2to0(run: &[DcNot]) -> Result<RewriteOutcome, RewriteError> {
    let (lo, hi, p) = expect_len(run, 2)?;
    let ((a, a1), (b, b1)) = (p[0], p[1]);
    if !(par(&a, &b) && par(&a1, &b1)) {
        return not_applicable("2->0 needs breaches on both wires");
    }
    synthesize(&pairs_unitary(&p), 0).map(|o| lift(o, lo, hi))
}

// ---------------------------------------------------------------------------
// 3 → 2.

pub fn reduce_3to2(run: &[DcNot]) -> Result<RewriteOutcome, RewriteError> {
    let (lo, hi, p) = expect_len(run, 3)?;
    let ((a, a1), (b, b1), (cc, c1)) = (p[0], p[1], p[2]);
    let left = xs(&[a.v(), b.v(), b.v()]).dot(&cc);
    let right = xs(&[a1.v(), b1.v(), b1.v()]).dot(&c1);
    if left.abs() > PRED_TOL && right.abs() > PRED_TOL {
        return not_applicable("3->2 needs a spherical right angle at b on one wire");
    }
    synthesize(&pairs_unitary(&p), 2).map(|o| lift(o, lo, hi))
}

/// The two persistence constraints for the run (a, a′), (b, b′), (c, c′).
///
/// The second one is multiplied through by s_λ′² so that it stays defined
/// when â′ ∥ b̂′.
pub fn persistence_residuals(p: &[VecPair]) -> [f64; 2] {
    let ((a, a1), (b, b1), (cc, c1)) = (p[0], p[1], p[2]);
    [
        xs(&[a1.v(), b1.v(), b1.v()]).dot(&c1),
        persistence_normal(&a, &b, &a1, &b1, &c1).dot(&cc),
    ]
}

/// n with n·ĉ equal to the scaled second persistence constraint.
pub(crate) fn persistence_normal(a: &Vec3, b: &Vec3, a1: &Vec3, b1: &Vec3, c1: &Vec3) -> Vec3 {
    let k3 = a1.cross(b1);
    let s2 = k3.norm_squared();
    let c_lam = a1.dot(b1);
    // s_λ′ c_φ′ = ĉ′·(â′×b̂′) and s_φ′ = ĉ′·b̂′.
    a.cross(b) * (c1.dot(&k3) * a.dot(b)) - b * (s2 * c_lam * c1.dot(b1))
}

/// 2-DC-NOT form of `target` with b̂′_f fixed to `keep`.
fn g2_with_keep(target: &GammaParts, keep: &UnitVec3) -> Option<Vec<VecPair>> {
    let f1p = keep.v();
    let (sigma, u, v) = rank_one(&target.gr);
    let gi = target.gi;
    let proj = RMat3::identity() - f1p * f1p.transpose();
    let f2p = if sigma > 1e-10 {
        let f = -u;
        if f.dot(&f1p).abs() > 1e-6 {
            return None;
        }
        (proj * f).normalize()
    } else {
        // With s_α′s_α = 0 the projected Λ_i is s_α′c_α f̂₃′ f̂₁ᵀ.
        let (s, w, _) = rank_one(&(proj * gi));
        if s > 1e-10 {
            w.normalize().cross(&f1p)
        } else {
            complete_rhon(keep).f2.v()
        }
    };
    let f3p = f1p.cross(&f2p);
    let v1 = gi.transpose() * f3p;
    let v3 = gi.transpose() * f1p;
    let tiny = 1e-10;
    let f2_rank = (sigma > 1e-10).then(|| v.normalize());
    let (f1, f2, f3) = match (v1.norm() > tiny, v3.norm() > tiny, f2_rank) {
        (true, true, _) => {
            let f1 = v1.normalize();
            let mut f3 = v3.normalize();
            f3 -= f1 * f1.dot(&f3);
            let f3 = f3.normalize();
            let f2 = f3.cross(&f1);
            (f1, f2, f3)
        }
        (true, false, Some(f2)) => {
            let f1 = v1.normalize();
            (f1, f2, f1.cross(&f2))
        }
        (false, true, Some(f2)) => {
            let f3 = v3.normalize();
            (f2.cross(&f3), f2, f3)
        }
        (true, false, None) => {
            let b = crate::linalg::rhon_with(&UnitVec3::new_unchecked(v1.normalize()), 1);
            (b.f1.v(), b.f2.v(), b.f3.v())
        }
        (false, true, None) => {
            let b = crate::linalg::rhon_with(&UnitVec3::new_unchecked(v3.normalize()), 3);
            (b.f1.v(), b.f2.v(), b.f3.v())
        }
        (false, false, Some(f2)) => {
            let b = crate::linalg::rhon_with(&UnitVec3::new_unchecked(f2), 2);
            (b.f1.v(), b.f2.v(), b.f3.v())
        }
        (false, false, None) => {
            let b = complete_rhon(&UnitVec3::z());
            (b.f1.v(), b.f2.v(), b.f3.v())
        }
    };
    let prods = G2Products {
        cc: target.lam_r,
        ss: -f2p.dot(&(target.gr * f2)),
        sc: f3p.dot(&(gi * f1)),
        cs: f1p.dot(&(gi * f3)),
    };
    let (alpha_prime, alpha) = angles_from_products(&prods);
    let u3 = UnitVec3::new_unchecked;
    let pp = PrincipalParams2 {
        alpha,
        alpha_prime,
        f: RhonBasis { f1: u3(f1), f2: u3(f2), f3: u3(f3) },
        f_prime: RhonBasis { f1: *keep, f2: u3(f2p), f3: u3(f3p) },
    };
    let pairs = pp.pairs();
    let res = closed_parts(&pairs).ok()?.distance(target);
    (res <= 1e-7).then(|| pairs.to_vec())
}

/// 3 → 2 with b̂′_f = ĉ′ = `keep` copied into the output.
pub fn reduce_3to2_persistent(run: &[DcNot], keep: &UnitVec3) -> Result<RewriteOutcome, RewriteError> {
    let (lo, hi, p) = expect_len(run, 3)?;
    if (keep.v() - p[2].1.v()).norm() > 1e-12 {
        return Err(RewriteError::Contract("keep must be the wire-1 vector of the last DC-NOT".into()));
    }
    let [r1, r2] = persistence_residuals(&p);
    if r1.abs() > 1e-8 || r2.abs() > 1e-8 {
        return not_applicable("persistence constraints violated");
    }
    persistent_local(&p, keep).map(|o| lift(o, lo, hi))
}

fn persistent_local(p: &[VecPair], keep: &UnitVec3) -> Result<RewriteOutcome, RewriteError> {
    let l = pairs_unitary(p);
    let mut last = RewriteError::NoSolutionFound("no persistent 2-DC-NOT form".into());
    for target in phase_targets(&l, 2) {
        if let Some(pairs) = g2_with_keep(&target, keep) {
            match outcome(&l, &pairs) {
                Ok(mut o) => {
                    // Copied, not recomputed.
                    o.replacement[1].v_j = *keep;
                    return Ok(o);
                }
                Err(e) => last = e,
            }
        }
    }
    Err(last)
}

// ---------------------------------------------------------------------------
// 3 → 1 and 3 → 0.

fn span_perp(a: &Vec3, b: &Vec3, c: &Vec3) -> bool {
    perp(a, b) && perp(a, c)
}

fn t4_holds(p: &[VecPair]) -> bool {
    let ((a, a1), (b, b1), (cc, c1)) = (p[0].0.v(), p[0].1.v(), p[1].0.v(), p[1].1.v(), p[2].0.v(), p[2].1.v())
        .into_pairs();
    if xs(&[a, b, b]).dot(&cc).abs() > PRED_TOL || xs(&[a1, b1, b1]).dot(&c1).abs() > PRED_TOL {
        return false;
    }
    // Breaches and foils are handled by T1–T3.
    for (u, v) in [(a, b), (b, cc), (a1, b1), (b1, c1)] {
        if u.cross(&v).norm() <= PRED_TOL || u.dot(&v).abs() <= PRED_TOL {
            return false;
        }
    }
    let ratio_eq = |u: &Vec3, v: &Vec3, u1: &Vec3, v1: &Vec3| {
        (u.cross(v).norm() * u1.dot(v1).abs() - u1.cross(v1).norm() * u.dot(v).abs()).abs() <= PRED_TOL
    };
    if !ratio_eq(&a, &b, &a1, &b1) || !ratio_eq(&b, &cc, &b1, &c1) {
        return false;
    }
    let s = a.cross(&b).dot(&cc) * a.dot(&b) * b.dot(&cc);
    let s1 = a1.cross(&b1).dot(&c1) * a1.dot(&b1) * b1.dot(&c1);
    s * s1 < 0.0
}

trait IntoPairs {
    fn into_pairs(self) -> ((Vec3, Vec3), (Vec3, Vec3), (Vec3, Vec3));
}

impl IntoPairs for (Vec3, Vec3, Vec3, Vec3, Vec3, Vec3) {
    fn into_pairs(self) -> ((Vec3, Vec3), (Vec3, Vec3), (Vec3, Vec3)) {
        ((self.0, self.1), (self.2, self.3), (self.4, self.5))
    }
}

pub(crate) fn classify_pairs(p: &[VecPair]) -> TClass {
    let ((a, a1), (b, b1), (cc, c1)) = (p[0].0.v(), p[0].1.v(), p[1].0.v(), p[1].1.v(), p[2].0.v(), p[2].1.v())
        .into_pairs();
    let vol = a.cross(&b).dot(&cc);
    let vol1 = a1.cross(&b1).dot(&c1);
    if par(&b, &a) && par(&b1, &a1) {
        TClass::T1a
    } else if par(&cc, &b) && par(&c1, &b1) {
        TClass::T1b
    } else if par(&c1, &b1) && par(&b1, &a1) && vol.abs() <= PRED_TOL {
        TClass::T2a
    } else if par(&cc, &b) && par(&b, &a) && vol1.abs() <= PRED_TOL {
        TClass::T2b
    } else if span_perp(&a, &b, &cc) && span_perp(&a1, &b1, &c1) {
        TClass::T3a
    } else if span_perp(&cc, &a, &b) && span_perp(&c1, &a1, &b1) {
        TClass::T3b
    } else if t4_holds(p) {
        TClass::T4
    } else {
        TClass::None
    }
}

pub fn classify_3to1(run: &[DcNot]) -> Result<TClass, RewriteError> {
    let (_, _, p) = expect_len(run, 3)?;
    Ok(classify_pairs(&p))
}

pub fn reduce_3to1(run: &[DcNot]) -> Result<RewriteOutcome, RewriteError> {
    let (lo, hi, p) = expect_len(run, 3)?;
    if classify_pairs(&p) == TClass::None {
        return not_applicable("3->1: no T class applies");
    }
    synthesize(&pairs_unitary(&p), 1).map(|o| lift(o, lo, hi))
}

fn mutually_perp(a: &Vec3, b: &Vec3, c: &Vec3) -> bool {
    perp(a, b) && perp(b, c) && perp(a, c)
}

pub fn reduce_3to0(run: &[DcNot]) -> Result<RewriteOutcome, RewriteError> {
    let (lo, hi, p) = expect_len(run, 3)?;
    let ((a, a1), (b, b1), (cc, c1)) = (p[0].0.v(), p[0].1.v(), p[1].0.v(), p[1].1.v(), p[2].0.v(), p[2].1.v())
        .into_pairs();
    let ok = (mutually_perp(&c1, &b1, &a1) && par(&cc, &b) && par(&b, &a))
        || (mutually_perp(&cc, &b, &a) && par(&c1, &b1) && par(&b1, &a1));
    if !ok {
        return not_applicable("3->0 needs three parallel vectors on one wire and an orthogonal triple on the other");
    }
    synthesize(&pairs_unitary(&p), 0).map(|o| lift(o, lo, hi))
}

// ---------------------------------------------------------------------------
// Controlled-U, deflation, breaches, 4 → 3.

/// [e^{iθσ_axis}(0)]^{n_ẑ(1)} as two DC-NOTs with ẑ on the control wire.
pub fn controlled_u_to_dcnots(axis: &UnitVec3, theta: f64) -> Vec<DcNot> {
    let (b, a) = crate::linalg::pair_from_su2(&rot(axis, theta), None).expect("rotation is in SU(2)");
    // σ_b σ_a = e^{iθσ_w}: â acts first.
    vec![DcNot::pair01(a, UnitVec3::z()), DcNot::pair01(b, UnitVec3::z())]
}

/// Unitary of [e^{iθσ_axis}(0)]^{n_ẑ(1)}.
pub fn controlled_u_unitary(axis: &UnitVec3, theta: f64) -> CMat {
    let p0 = CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0)]));
    let p1 = identity(2) - &p0;
    kron(&p0, &identity(2)) + kron(&p1, &rot(axis, theta))
}

/// Gates equal to [e^{iθσ_axis}(0)]^{n_control(1)} with the roles of the wires
/// exchanged: wire 1 now carries the rotation, controlled by n_axis(0).
pub fn flip_controlled_u(axis: &UnitVec3, theta: f64, control: &UnitVec3, anchor: Option<&UnitVec3>) -> Result<Vec<Gate>, RewriteError> {
    let (x, y) = crate::linalg::pair_from_su2(&rot(control, theta), anchor)
        .map_err(|e| RewriteError::Contract(e.to_string()))?;
    Ok(vec![
        Gate::rot(0, *axis, 0.5 * theta),
        Gate::rot(1, *control, -0.5 * theta),
        Gate::DcNot(DcNot::pair01(*axis, y)),
        Gate::DcNot(DcNot::pair01(*axis, x)),
    ])
}

/// Unitary of [e^{iθ_L σ_L}(0)]^{n(1)} · A(1) · [e^{iθ_R σ_R}(0)]^{n(1)}.
pub fn deflation_input(theta_l: f64, axis_l: &UnitVec3, a_mid: &CMat, theta_r: f64, axis_r: &UnitVec3) -> CMat {
    controlled_u_unitary(axis_l, theta_l) * kron(a_mid, &identity(2)) * controlled_u_unitary(axis_r, theta_r)
}

/// Intersection direction of the rotation planes ⊥ ŵ_L and ⊥ ŵ_R.
pub fn deflation_t(axis_l: &UnitVec3, axis_r: &UnitVec3) -> UnitVec3 {
    UnitVec3::normalize(axis_l.cross(axis_r)).unwrap_or_else(|_| complete_rhon(axis_l).f2)
}

/// Two DC-NOTs equivalent to two controlled-U gates around a local A on the
/// control wire. The 2-DC-NOT invariant is read with f̂₂ = d̂ and
/// f̂₂′ ∝ â′×d̂′ taken from the wedge construction through t̂.
pub fn deflate(theta_l: f64, axis_l: &UnitVec3, a_mid: &CMat, theta_r: f64, axis_r: &UnitVec3) -> Result<RewriteOutcome, RewriteError> {
    if a_mid.nrows() != 2 || (a_mid.determinant() - c(1.0, 0.0)).norm() > 1e-9 {
        return Err(RewriteError::Contract("A_mid must be in SU(2)".into()));
    }
    let l = deflation_input(theta_l, axis_l, a_mid, theta_r, axis_r);
    if let Some(o) = deflate_wedge(&l, theta_l, axis_l, a_mid, axis_r) {
        return Ok(o);
    }
    synthesize(&l, 2)
}

/// The wedge-based part of [`deflate`] alone, without the generic fallback.
/// `l` must be [`deflation_input`] of the same arguments.
pub fn deflate_wedge(l: &CMat, theta_l: f64, axis_l: &UnitVec3, a_mid: &CMat, axis_r: &UnitVec3) -> Option<RewriteOutcome> {
    let t = deflation_t(axis_l, axis_r);
    // σ_d σ_t = U_L and σ_t σ_a = U_R.
    let (_, d) = crate::linalg::pair_from_su2(&rot(axis_l, theta_l).adjoint(), Some(&t)).ok()?;
    let a1 = UnitVec3::normalize_or(su2_to_so3(a_mid) * Vec3::z(), UnitVec3::z());
    let d1 = UnitVec3::z();
    let f2p = UnitVec3::normalize(a1.cross(&d1)).ok()?;
    for target in phase_targets(l, 2) {
        for (f2, f2p) in [(d, f2p), (d, -f2p), (-d, f2p), (-d, -f2p)] {
            let ss = -f2p.dot(&(target.gr * f2.v()));
            if ss < -1e-12 {
                continue;
            }
            let pp = g2_tail(target.lam_r, ss, &f2, &f2p, &target.gi);
            let pairs = pp.pairs();
            if closed_parts(&pairs).ok()?.distance(&target) > 1e-7 {
                continue;
            }
            if let Ok(o) = outcome(l, &pairs) {
                return Some(o);
            }
        }
    }
    None
}

/// The four breach constraints for t̂ (wire 0) and t̂′ (wire 1), given the
/// chronological run g0..g3.
pub fn breach_residuals(p: &[VecPair], t: &Vec3, t1: &Vec3) -> [f64; 4] {
    let half = |x: &VecPair, y: &VecPair| {
        let (pp, q, pp1, q1) = (x.0.v(), y.0.v(), x.1.v(), y.1.v());
        [xs(&[pp1, q1, q1]).dot(t1), persistence_normal(&pp, &q, &pp1, &q1, t1).dot(t)]
    };
    let r = half(&p[0], &p[1]);
    let l = half(&p[3], &p[2]);
    [r[0], r[1], l[0], l[1]]
}

fn sph(theta: f64, phi: f64) -> Vec3 {
    Vec3::new(theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos())
}

fn sph_angles(v: &Vec3) -> (f64, f64) {
    (v.z.clamp(-1.0, 1.0).acos(), v.y.atan2(v.x))
}

/// Point k of an n-point Fibonacci sphere.
pub fn fibonacci_point(k: usize, n: usize) -> Vec3 {
    let golden = PI * (3.0 - 5f64.sqrt());
    let z = 1.0 - (2.0 * k as f64 + 1.0) / n as f64;
    let r = (1.0 - z * z).max(0.0).sqrt();
    let phi = golden * k as f64;
    Vec3::new(r * phi.cos(), r * phi.sin(), z)
}

/// Closed-form solution: the first constraint of each half is linear in t̂′,
/// and, with t̂′ fixed, the second ones are linear in t̂.
fn breach_closed_form(p: &[VecPair]) -> Option<(Vec3, Vec3)> {
    let ur = xs(&[p[0].1.v(), p[1].1.v(), p[1].1.v()]);
    let ul = xs(&[p[3].1.v(), p[2].1.v(), p[2].1.v()]);
    let mut t1 = ur.cross(&ul);
    if t1.norm() < 1e-9 {
        let base = if ur.norm() > 1e-9 { ur } else { ul };
        t1 = match UnitVec3::normalize(base) {
            Ok(u) => complete_rhon(&u).f2.v(),
            Err(_) => Vec3::z(),
        };
    }
    let t1 = t1.normalize();
    let nr = persistence_normal(&p[0].0.v(), &p[1].0.v(), &p[0].1.v(), &p[1].1.v(), &t1);
    let nl = persistence_normal(&p[3].0.v(), &p[2].0.v(), &p[3].1.v(), &p[2].1.v(), &t1);
    let mut t = nr.cross(&nl);
    if t.norm() < 1e-9 {
        let base = if nr.norm() > 1e-9 { nr } else { nl };
        t = match UnitVec3::normalize(base) {
            Ok(u) => complete_rhon(&u).f2.v(),
            Err(_) => Vec3::z(),
        };
    }
    Some((t.normalize(), t1))
}

/// Damped least squares on the spherical angles of (t̂, t̂′).
fn breach_dls(p: &[VecPair], t0: &Vec3, t10: &Vec3) -> Option<(Vec3, Vec3, f64)> {
    let (a0, b0) = sph_angles(t0);
    let (a1, b1) = sph_angles(t10);
    let mut x = [a0, b0, a1, b1];
    let f = |x: &[f64; 4]| breach_residuals(p, &sph(x[0], x[1]), &sph(x[2], x[3]));
    let norm = |r: &[f64; 4]| r.iter().map(|v| v * v).sum::<f64>();
    let mut lambda = 1e-3;
    let mut r = f(&x);
    for _ in 0..200 {
        if r.iter().all(|v| v.abs() <= 1e-12) {
            break;
        }
        let h = 1e-7;
        let mut jac = nalgebra::Matrix4::<f64>::zeros();
        for k in 0..4 {
            let mut xp = x;
            xp[k] += h;
            let mut xm = x;
            xm[k] -= h;
            let (rp, rm) = (f(&xp), f(&xm));
            for i in 0..4 {
                jac[(i, k)] = (rp[i] - rm[i]) / (2.0 * h);
            }
        }
        let rv = nalgebra::Vector4::from_row_slice(&r);
        let jtj = jac.transpose() * jac;
        let g = jac.transpose() * rv;
        let mut improved = false;
        for _ in 0..20 {
            let m = jtj + nalgebra::Matrix4::identity() * lambda;
            let Some(step) = m.lu().solve(&(-g)) else { break };
            let mut xn = x;
            for k in 0..4 {
                xn[k] += step[k];
            }
            let rn = f(&xn);
            if norm(&rn) < norm(&r) {
                x = xn;
                r = rn;
                lambda = (lambda * 0.3).max(1e-12);
                improved = true;
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            break;
        }
    }
    let max = r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    Some((sph(x[0], x[1]), sph(x[2], x[3]), max))
}

/// Solves the four breach constraints: the closed-form point first, then 32
/// Fibonacci-sphere starts refined by damped least squares.
pub fn solve_breach(p: &[VecPair]) -> Result<(UnitVec3, UnitVec3), RewriteError> {
    let mut starts = Vec::new();
    if let Some(s) = breach_closed_form(p) {
        starts.push(s);
    }
    for k in 0..32 {
        starts.push((fibonacci_point(k, 32), fibonacci_point((k * 13 + 7) % 32, 32)));
    }
    let mut best = f64::INFINITY;
    for (t, t1) in starts {
        let direct = breach_residuals(p, &t, &t1).iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let (t, t1, res) = if direct <= 1e-12 { (t, t1, direct) } else { breach_dls(p, &t, &t1).unwrap() };
        best = best.min(res);
        if res <= 1e-9 {
            return Ok((UnitVec3::new_unchecked(t.normalize()), UnitVec3::new_unchecked(t1.normalize())));
        }
    }
    Err(RewriteError::NoSolutionFound(format!("breach constraints: best max residual {best:e}")))
}

/// Rewrites 4 DC-NOTs so that the middle two share their wire-1 vector.
pub fn open_breach(run: &[DcNot]) -> Result<RewriteOutcome, RewriteError> {
    let (lo, hi, p) = expect_len(run, 4)?;
    open_breach_local(&p).map(|o| lift(o, lo, hi))
}

fn open_breach_local(p: &[VecPair]) -> Result<RewriteOutcome, RewriteError> {
    let l = pairs_unitary(p);
    let (t, t1) = solve_breach(p)?;
    let wedge = (t, t1);
    // Right half acts first: g0, g1, wedge. The left half is handled through
    // its adjoint g3, g2, wedge.
    let right = persistent_local(&[p[0], p[1], wedge], &t1)?;
    let left_adj = persistent_local(&[p[3], p[2], wedge], &t1)?;
    let rp = pairs_of_dcnots(&right.replacement);
    let lp = pairs_of_dcnots(&left_adj.replacement);
    // left = F_l† · R_lᵀ-order, so conjugate the whole run by F_l†.
    let f_l = gates_unitary(&left_adj.pre_locals, 2).expect("local gates");
    let (u0, u1) = split_local(&f_l.adjoint())?;
    let run = conjugate_pairs(&[rp[0], rp[1], lp[1], lp[0]], &u0, &u1);
    let mut o = outcome(&l, &run)?;
    // The two middle wire-1 vectors are equal by construction; store one copy.
    o.replacement[2].v_j = o.replacement[1].v_j;
    Ok(o)
}

fn pairs_of_dcnots(ds: &[DcNot]) -> Vec<VecPair> {
    ds.iter().map(|d| (d.v_i, d.v_j)).collect()
}

/// Reduces 4 DC-NOTs to at most 3: opens a breach, merges it into a
/// controlled-U and deflates that against the following DC-NOT.
pub fn reduce_4to3(run: &[DcNot]) -> Result<RewriteOutcome, RewriteError> {
    let (lo, hi, p) = expect_len(run, 4)?;
    reduce_4to3_local(&p).map(|o| lift(o, lo, hi))
}

fn reduce_4to3_local(p: &[VecPair]) -> Result<RewriteOutcome, RewriteError> {
    let l = pairs_unitary(p);
    let ob = open_breach_local(p)?;
    let h = pairs_of_dcnots(&ob.replacement);
    let s1 = h[1].1;
    // Frame on wire 1 with the breach vector along ẑ.
    let q = su2_mapping(&s1, &UnitVec3::z());
    let rq = su2_to_so3(&q);
    let rot1 = |v: &UnitVec3| UnitVec3::normalize_or(rq * v.v(), *v);
    let (x2, y2, y1, y1r) = (h[1].0, h[2].0, h[3].0, rot1(&h[3].1));
    let (w_r, theta_r) = su2_axis_angle(&(paulion(&y2) * paulion(&x2)));
    let b = su2_mapping(&UnitVec3::z(), &y1r);
    let z_phase = CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![c(1.0, 0.0), c(0.0, -1.0)]));
    let def = deflate(FRAC_PI_2, &y1, &b.adjoint(), theta_r, &w_r)?;
    // K_rot = (B·Z)(1) · R_def · F_def; undo the frame with Q†.
    let post = q.adjoint() * b * z_phase;
    let rk = conjugate_pairs(&pairs_of_dcnots(&def.replacement), &identity(2), &post);
    let k = pairs_unitary(&h[1..]);
    let g = pairs_unitary(&rk).adjoint() * &k;
    let (g0, g1) = split_local(&g)?;
    let first = conjugate_pairs(&[h[0]], &g0, &g1);
    let run = [first[0], rk[0], rk[1]];
    outcome(&l, &run)
}

// ---------------------------------------------------------------------------
// Identity catalog. Each function returns chronological gate lists on wires
// (0, 1) whose unitaries are equal.

fn su2_gates(wire: usize, m: &CMat) -> Vec<Gate> {
    local_gates(wire, m)
}

fn dc(a: &Vec3, a1: &Vec3) -> Gate {
    Gate::DcNot(DcNot::pair01(UnitVec3::new_unchecked(a.normalize()), UnitVec3::new_unchecked(a1.normalize())))
}

/// SWAP as DC(â,b̂)·DC(b̂,â)·DC(â,b̂) for â ⊥ b̂. With `u` given, the wire-1
/// vectors are replaced by U†σU images and U, U† are emitted as locals.
pub fn swapper_expansion(a: &UnitVec3, b: &UnitVec3, u: Option<&CMat>) -> Result<Vec<Gate>, RewriteError> {
    if !perp(a, b) {
        return not_applicable("swapper needs perpendicular vectors");
    }
    let Some(u) = u else {
        return Ok(vec![dc(a, b), dc(b, a), dc(a, b)]);
    };
    // U†σ_â U = σ_{R_{U†} â}.
    let r = su2_to_so3(&u.adjoint());
    let (a1, b1) = (r * a.v(), r * b.v());
    let mut out = su2_gates(0, u);
    out.extend(su2_gates(1, &u.adjoint()));
    out.extend([dc(a, &b1), dc(b, &a1), dc(a, &b1)]);
    Ok(out)
}

/// Which right-hand side of the 2/3-Swapper identity to produce.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TwoThirdsForm {
    /// Locals first, then (â, â′), then (b̂_f, b̂′_f).
    RotateB,
    /// (â_f, â′_f), then (b̂, b̂′), then locals.
    RotateA,
}

/// 2/3-Swapper identity for a foiled run (â, â′) then (b̂, b̂′).
pub fn two_thirds_swap(run: &[DcNot], alpha: f64, alpha_p: f64, form: TwoThirdsForm) -> Result<Vec<Gate>, RewriteError> {
    let (lo, hi, p) = expect_len(run, 2)?;
    let ((a, a1), (b, b1)) = (p[0], p[1]);
    if !perp(&a, &b) || !perp(&a1, &b1) {
        return not_applicable("2/3-Swapper needs foils on both wires");
    }
    let (ab, ab1) = (a.cross(&b), a1.cross(&b1));
    let (ca, sa, cp, sp) = (alpha.cos(), alpha.sin(), alpha_p.cos(), alpha_p.sin());
    let u = rot(&a, 0.5 * alpha) * rot(&b, -0.5 * alpha_p);
    let u1 = rot(&a1, 0.5 * alpha_p) * rot(&b1, -0.5 * alpha);
    let mut out = Vec::new();
    match form {
        TwoThirdsForm::RotateB => {
            out.extend(su2_gates(0, &u));
            out.extend(su2_gates(1, &u1));
            out.push(dc(&a, &a1));
            out.push(dc(&(b.v() * ca - ab * sa), &(b1.v() * cp - ab1 * sp)));
        }
        TwoThirdsForm::RotateA => {
            // Here wire 0 takes α′ and wire 1 takes α.
            out.push(dc(&(a.v() * cp + ab * sp), &(a1.v() * ca + ab1 * sa)));
            out.push(dc(&b, &b1));
            out.extend(su2_gates(0, &u));
            out.extend(su2_gates(1, &u1));
        }
    }
    let map = [lo, hi];
    Ok(out.iter().map(|g| relabel_gate(g, &map)).collect())
}

/// 1/3-Swapper identity: (lhs, rhs).
pub fn one_third_swap(alpha: f64, alpha_p: f64) -> (Vec<Gate>, Vec<Gate>) {
    let (x, y, z) = (Vec3::x(), Vec3::y(), Vec3::z());
    let q = |t: f64| x * t.cos() - y * t.sin();
    let p = |t: f64| z * t.cos() + y * t.sin();
    let u = rot(&z, 0.5 * alpha) * rot(&x, -0.5 * alpha_p);
    let u1 = rot(&z, 0.5 * alpha_p) * rot(&x, -0.5 * alpha);
    let lhs = vec![dc(&q(alpha), &q(alpha_p)), dc(&x, &x)];
    let mut rhs = su2_gates(0, &u.adjoint());
    rhs.extend(su2_gates(1, &u1.adjoint()));
    rhs.push(dc(&p(alpha_p), &p(alpha)));
    rhs.push(dc(&z, &z));
    (lhs, rhs)
}

fn paulion_local(wire: usize, v: &Vec3) -> Vec<Gate> {
    paulion_gates(wire, UnitVec3::new_unchecked(v.normalize()))
}

/// DC-NOT similarity transformation identity: (lhs, rhs).
pub fn sim_trans_rewrite(alpha: f64, lambda: f64) -> (Vec<Gate>, Vec<Gate>) {
    let (x, y, z) = (Vec3::x(), Vec3::y(), Vec3::z());
    let (ca, sa) = (alpha.cos(), alpha.sin());
    let side = |v: Vec3| {
        let mut g = vec![dc(&v, &v)];
        g.extend(paulion_local(0, &(v * ca + z * sa)));
        g.extend(paulion_local(1, &(v * sa + z * ca)));
        g.push(dc(&v, &v));
        g
    };
    let q = x * lambda.cos() - y * lambda.sin();
    (side(x), side(q))
}

fn split_sim_parts(phi: f64, lambda: f64) -> (Vec3, Vec3, Vec3, Vec3, Vec3, CMat, CMat) {
    let (x, y, z) = (Vec3::x(), Vec3::y(), Vec3::z());
    let pzx = z * phi.cos() + x * phi.sin();
    let qzx = z * phi.cos() - x * phi.sin();
    let qxy = x * lambda.cos() - y * lambda.sin();
    let pxy = x * lambda.cos() + y * lambda.sin();
    let alpha = 0.5 * (FRAC_PI_2 - phi);
    let beta = FRAC_PI_2 - alpha;
    let u_of = |t: f64| paulion(&(x * t.cos() + z * t.sin())) * paulion(&(qxy * t.cos() + z * t.sin()));
    (pzx, qzx, qxy, pxy, y, u_of(alpha), u_of(beta))
}

/// Split similarity identity (q, q on wire 1): (lhs, rhs).
pub fn split_sim_trans(phi: f64, lambda: f64) -> (Vec<Gate>, Vec<Gate>) {
    let (pzx, qzx, qxy, _, y, u, u1) = split_sim_parts(phi, lambda);
    let (cl, sl) = (lambda.cos(), lambda.sin());
    let lhs = vec![dc(&qxy, &qxy), dc(&Vec3::x(), &Vec3::x()), dc(&pzx, &qzx)];
    let mut rhs = su2_gates(0, &u);
    rhs.extend(su2_gates(1, &u1));
    rhs.push(dc(&(pzx * cl + y * sl), &(qzx * cl + y * sl)));
    (lhs, rhs)
}

/// Split similarity identity (q, p on wire 1): (lhs, rhs).
pub fn split_sim_trans2(phi: f64, lambda: f64) -> (Vec<Gate>, Vec<Gate>) {
    let (pzx, qzx, qxy, pxy, y, u, u1) = split_sim_parts(phi, lambda);
    let (cl, sl) = (lambda.cos(), lambda.sin());
    let sz = paulion(&Vec3::z());
    let lhs = vec![dc(&qxy, &pxy), dc(&Vec3::x(), &Vec3::x()), dc(&pzx, &pzx)];
    let mut rhs = su2_gates(0, &(u1 * &sz));
    rhs.extend(su2_gates(1, &(u * paulion(&qxy) * paulion(&Vec3::x()))));
    rhs.push(dc(&(qzx * cl + y * sl), &(pzx * cl + y * sl)));
    rhs.extend(su2_gates(0, &sz));
    (lhs, rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::sigma_z;

    fn u3(x: f64, y: f64, z: f64) -> UnitVec3 {
        UnitVec3::normalize(Vec3::new(x, y, z)).unwrap()
    }

    fn check(run: &[DcNot], o: &RewriteOutcome) {
        let nb = 2;
        let l = dcnots_unitary(run, nb);
        let r = gates_unitary(&o.gates(), nb).unwrap();
        assert!((l - r).norm() < 1e-7);
    }

    #[test]
    fn su2_mapping_rotates() {
        let (a, b) = (u3(0.3, -0.2, 0.9), u3(-0.5, 0.1, 0.4));
        let r = su2_to_so3(&su2_mapping(&a, &b));
        assert!((r * a.v() - b.v()).norm() < 1e-12);
        let r = su2_to_so3(&su2_mapping(&a, &-a));
        assert!((r * a.v() + a.v()).norm() < 1e-12);
    }

    #[test]
    fn two_to_one_example() {
        let run = [DcNot::pair01(UnitVec3::y(), UnitVec3::z()), DcNot::pair01(UnitVec3::x(), UnitVec3::z())];
        let o = reduce_2to1(&run).unwrap();
        assert_eq!(o.replacement.len(), 1);
        assert!(o.replacement[0].v_i.cross(&Vec3::z()).norm() < 1e-9);
        check(&run, &o);
        let g = [DcNot::pair01(u3(1.0, 2.0, 3.0), u3(0.0, 1.0, 1.0)), DcNot::pair01(u3(-1.0, 0.5, 2.0), u3(1.0, 0.0, 1.0))];
        assert!(matches!(reduce_2to1(&g), Err(RewriteError::NotApplicable(_))));
    }

    #[test]
    fn two_to_zero_examples() {
        let d = DcNot::pair01(u3(1.0, 2.0, 3.0), u3(0.0, 1.0, 1.0));
        let o = reduce_2to0(&[d, d]).unwrap();
        assert!(o.replacement.is_empty() && o.pre_locals.is_empty());
        let n = DcNot::pair01(-d.v_i, d.v_j);
        let o = reduce_2to0(&[d, n]).unwrap();
        check(&[d, n], &o);
        let p = DcNot::pair01(UnitVec3::x(), UnitVec3::z());
        let q = DcNot::pair01(UnitVec3::y(), UnitVec3::z());
        assert!(reduce_2to0(&[p, q]).is_err());
    }

    #[test]
    fn swap_angles_example() {
        let run = [DcNot::pair01(UnitVec3::y(), UnitVec3::x()), DcNot::pair01(UnitVec3::x(), UnitVec3::x())];
        let o = swap_angles(&run).unwrap();
        check(&run, &o);
        let r = &o.replacement;
        assert!(r[0].v_i.cross(&r[1].v_i).norm() < 1e-8);
        assert!(r[0].v_j.dot(&r[1].v_j).abs() < 1e-8);
    }

    #[test]
    fn t2a_example() {
        let z = UnitVec3::z();
        let run = [
            DcNot::pair01(UnitVec3::x(), z),
            DcNot::pair01(u3(1.0, 1.0, 0.0), z),
            DcNot::pair01(UnitVec3::y(), z),
        ];
        assert_eq!(classify_3to1(&run).unwrap(), TClass::T2a);
        let o = reduce_3to1(&run).unwrap();
        check(&run, &o);
        assert!(o.replacement[0].v_i.cross(&u3(1.0, 1.0, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn three_to_zero_example() {
        let z = UnitVec3::z();
        let run = [DcNot::pair01(z, UnitVec3::x()), DcNot::pair01(z, UnitVec3::y()), DcNot::pair01(z, z)];
        let o = reduce_3to0(&run).unwrap();
        assert!(o.replacement.is_empty());
        check(&run, &o);
        let same = [DcNot::pair01(z, z); 3];
        assert!(reduce_3to0(&same).is_err());
    }

    #[test]
    fn controlled_u_examples() {
        for (axis, theta) in [(UnitVec3::z(), 0.0), (UnitVec3::z(), FRAC_PI_2), (UnitVec3::x(), PI), (u3(1.0, -2.0, 0.5), 0.77)] {
            let ds = controlled_u_to_dcnots(&axis, theta);
            let err = (dcnots_unitary(&ds, 2) - controlled_u_unitary(&axis, theta)).norm();
            assert!(err < 1e-10, "{err}");
        }
    }

    #[test]
    fn flip_examples() {
        for (a, th, b1) in [(UnitVec3::x(), PI, UnitVec3::z()), (u3(1.0, 2.0, -1.0), 0.4, u3(0.0, 1.0, 3.0))] {
            let gates = flip_controlled_u(&a, th, &b1, None).unwrap();
            let b = su2_mapping(&UnitVec3::z(), &b1);
            let bz = kron(&b, &identity(2));
            let want = &bz * controlled_u_unitary(&a, th) * bz.adjoint();
            assert!((gates_unitary(&gates, 2).unwrap() - want).norm() < 1e-10);
        }
    }

    #[test]
    fn deflate_example() {
        let a_mid = rot(&u3(0.2, 0.7, -0.1), 0.9);
        let o = deflate(0.4, &u3(1.0, 0.0, 1.0), &a_mid, 1.3, &u3(0.0, 1.0, -2.0)).unwrap();
        assert_eq!(o.replacement.len(), 2);
        let l = deflation_input(0.4, &u3(1.0, 0.0, 1.0), &a_mid, 1.3, &u3(0.0, 1.0, -2.0));
        assert!((l - gates_unitary(&o.gates(), 2).unwrap()).norm() < 1e-7);
    }

    #[test]
    fn swapper_is_swap() {
        let g = swapper_expansion(&UnitVec3::x(), &UnitVec3::z(), None).unwrap();
        let u = gates_unitary(&g, 2).unwrap();
        let mut swap = CMat::zeros(4, 4);
        for (i, j) in [(0, 0), (1, 2), (2, 1), (3, 3)] {
            swap[(i, j)] = c(1.0, 0.0);
        }
        assert!((u - swap).norm() < 1e-15);
        let _ = sigma_z();
    }
}
