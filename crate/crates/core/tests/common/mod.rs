//! Random instance generators shared by the integration tests.
#![allow(dead_code)]

use dcnot_core::circuit::{random_unit, DcNot};
use dcnot_core::linalg::{complete_rhon, UnitVec3, Vec3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Pair = (UnitVec3, UnitVec3);

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn unit(v: Vec3) -> UnitVec3 {
    UnitVec3::normalize(v).unwrap()
}

pub fn rvec(r: &mut ChaCha8Rng) -> UnitVec3 {
    random_unit(r)
}

pub fn sign(r: &mut ChaCha8Rng) -> f64 {
    if r.random::<bool>() { 1.0 } else { -1.0 }
}

pub fn angle(r: &mut ChaCha8Rng) -> f64 {
    r.random_range(-std::f64::consts::PI..std::f64::consts::PI)
}

/// Random right-handed orthonormal frame.
pub fn frame(r: &mut ChaCha8Rng) -> [Vec3; 3] {
    let b = complete_rhon(&rvec(r));
    let t = angle(r);
    let (c, s) = (t.cos(), t.sin());
    let f2 = b.f2.v() * c + b.f3.v() * s;
    let f3 = b.f1.cross(&f2);
    [b.f1.v(), f2, f3]
}

/// ±u
pub fn par_to(r: &mut ChaCha8Rng, u: &UnitVec3) -> UnitVec3 {
    unit(u.v() * sign(r))
}

/// Random unit vector ⊥ u.
pub fn perp_to(r: &mut ChaCha8Rng, u: &Vec3) -> UnitVec3 {
    let b = complete_rhon(&unit(*u));
    let t = angle(r);
    unit(b.f2.v() * t.cos() + b.f3.v() * t.sin())
}

/// Random unit vector in span(u, v).
pub fn in_span(r: &mut ChaCha8Rng, u: &Vec3, v: &Vec3) -> UnitVec3 {
    let n = u.cross(v);
    perp_to(r, &n)
}

pub fn run(p: &[Pair]) -> Vec<DcNot> {
    p.iter().map(|x| DcNot::pair01(x.0, x.1)).collect()
}

pub fn random_pairs(r: &mut ChaCha8Rng, n: usize) -> Vec<Pair> {
    (0..n).map(|_| (rvec(r), rvec(r))).collect()
}

pub fn gen_2to1(r: &mut ChaCha8Rng) -> Vec<Pair> {
    let (a, a1) = (rvec(r), rvec(r));
    if r.random::<bool>() {
        vec![(a, a1), (par_to(r, &a), perp_to(r, &a1))]
    } else {
        vec![(a, a1), (perp_to(r, &a), par_to(r, &a1))]
    }
}

pub fn gen_2to0(r: &mut ChaCha8Rng) -> Vec<Pair> {
    let (a, a1) = (rvec(r), rvec(r));
    vec![(a, a1), (par_to(r, &a), par_to(r, &a1))]
}

/// ĉ with [a b b]·ĉ = 0.
pub fn right_angle_c(r: &mut ChaCha8Rng, a: &Vec3, b: &Vec3) -> UnitVec3 {
    in_span(r, b, &a.cross(b))
}

pub fn gen_3to2(r: &mut ChaCha8Rng) -> Vec<Pair> {
    let (a, a1, b, b1) = (rvec(r), rvec(r), rvec(r), rvec(r));
    if r.random::<bool>() {
        let c = right_angle_c(r, &a, &b);
        vec![(a, a1), (b, b1), (c, rvec(r))]
    } else {
        let c1 = right_angle_c(r, &a1, &b1);
        vec![(a, a1), (b, b1), (rvec(r), c1)]
    }
}

pub fn swap_wires(p: &[Pair]) -> Vec<Pair> {
    p.iter().map(|x| (x.1, x.0)).collect()
}

pub fn reverse(p: &[Pair]) -> Vec<Pair> {
    p.iter().rev().copied().collect()
}

pub fn gen_t1a(r: &mut ChaCha8Rng) -> Vec<Pair> {
    let (a, a1) = (rvec(r), rvec(r));
    vec![(a, a1), (par_to(r, &a), par_to(r, &a1)), (rvec(r), rvec(r))]
}

pub fn gen_t2a(r: &mut ChaCha8Rng) -> Vec<Pair> {
    let (a, b, a1) = (rvec(r), rvec(r), rvec(r));
    let c = in_span(r, &a, &b);
    vec![(a, a1), (b, par_to(r, &a1)), (c, par_to(r, &a1))]
}

pub fn gen_t3a(r: &mut ChaCha8Rng) -> Vec<Pair> {
    let (a, a1) = (rvec(r), rvec(r));
    let (b, c) = (perp_to(r, &a), perp_to(r, &a));
    let (b1, c1) = (perp_to(r, &a1), perp_to(r, &a1));
    vec![(a, a1), (b, b1), (c, c1)]
}

/// T4 instance: a, b, c in frame F and a′, b′, c′ in frame F′ with the
/// mirrored angle relation.
pub fn gen_t4(r: &mut ChaCha8Rng) -> Vec<Pair> {
    loop {
        let phi = r.random_range(0.2..1.35);
        let lam = r.random_range(0.2..1.35);
        let (sp, sl) = (sign(r), sign(r));
        let (fp, fl) = (r.random::<bool>(), r.random::<bool>());
        let phi1 = if fp { std::f64::consts::PI - sp * phi } else { sp * phi };
        let lam1 = if fl { std::f64::consts::PI - sl * lam } else { sl * lam };
        let build = |f: &[Vec3; 3], phi: f64, lam: f64| {
            let c = f[2] * phi.cos() + f[0] * phi.sin();
            let b = f[0];
            let a = f[0] * lam.cos() - f[1] * lam.sin();
            (unit(a), unit(b), unit(c))
        };
        let (f, f1) = (frame(r), frame(r));
        let (a, b, c) = build(&f, phi, lam);
        let (a1, b1, c1) = build(&f1, phi1, lam1);
        let s = a.cross(&b).dot(&c) * a.dot(&b) * b.dot(&c);
        let s1 = a1.cross(&b1).dot(&c1) * a1.dot(&b1) * b1.dot(&c1);
        if s * s1 < -1e-6 {
            return vec![(a, a1), (b, b1), (c, c1)];
        }
    }
}

pub fn gen_3to0(r: &mut ChaCha8Rng) -> Vec<Pair> {
    let a = rvec(r);
    let f = frame(r);
    let p = vec![
        (a, unit(f[0] * sign(r))),
        (par_to(r, &a), unit(f[1] * sign(r))),
        (par_to(r, &a), unit(f[2] * sign(r))),
    ];
    let mut p = p;
    // Any order of the orthogonal triple works.
    if r.random::<bool>() {
        p.swap(0, 2);
    }
    if r.random::<bool>() { swap_wires(&p) } else { p }
}

/// Run satisfying both persistence constraints.
pub fn gen_persistent(r: &mut ChaCha8Rng) -> Vec<Pair> {
    let (a, a1, b, b1) = (rvec(r), rvec(r), rvec(r), rvec(r));
    let c1 = right_angle_c(r, &a1, &b1);
    let k3 = a1.cross(&b1);
    let n = a.cross(&b) * (c1.dot(&k3) * a.dot(&b)) - b.v() * (k3.norm_squared() * a1.dot(&b1) * c1.dot(&b1));
    let c = perp_to(r, &n);
    vec![(a, a1), (b, b1), (c, c1)]
}
