mod common;

use common::*;
use dcnot_core::circuit::{dcnots_unitary, gates_unitary, DcNot, Gate};
use dcnot_core::rewrite2q::RewriteOutcome;
use dcnot_core::rewrite3q::*;

fn check(l: &[DcNot], o: &RewriteOutcome, tol: f64) {
    let r = gates_unitary(&o.gates(), 3).unwrap();
    let e = (dcnots_unitary(l, 3) - r).norm();
    assert!(e <= tol, "{e:e}");
}

/// Places a (shared, other) pair on wires (s, m).
fn place(p: &Pair, s: usize, m: usize) -> DcNot {
    DcNot::new(s, p.0, m, p.1)
}

const LAYOUTS: [(usize, usize, usize); 3] = [(0, 1, 2), (1, 2, 0), (2, 0, 1)];

#[test]
fn pt3_random() {
    let mut r = rng(21);
    let mut worst = 0.0f64;
    for k in 0..150 {
        let (s, m, t) = LAYOUTS[k % 3];
        let mob: Vec<DcNot> = random_pairs(&mut r, 3).iter().map(|p| place(p, s, m)).collect();
        let stat = DcNot::new(s, rvec(&mut r), t, rvec(&mut r));
        let ctx = PassThroughContext::new(mob, stat).unwrap();
        let o = pass_through_3(&ctx).unwrap();
        assert_eq!(o.replacement.len(), 4);
        assert_eq!(o.replacement[2], stat);
        check(&ctx.gates(), &o, 1e-6);
        worst = worst.max(o.residual);
    }
    eprintln!("pt3 worst {worst:e}");
}

#[test]
fn pt2_positive() {
    let mut r = rng(22);
    for k in 0..150 {
        let (s, m, t) = LAYOUTS[k % 3];
        let p = match k % 3 {
            0 => gen_t4(&mut r),
            1 => {
                // T1b: ê ∥ b̂ and t̂′ = b̂′.
                let (a, b) = ((rvec(&mut r), rvec(&mut r)), (rvec(&mut r), rvec(&mut r)));
                vec![a, b, (par_to(&mut r, &b.0), b.1)]
            }
            _ => {
                // T3b: ê ⊥ span(â, b̂) and t̂′ ∥ â′×b̂′.
                let (a, b) = ((rvec(&mut r), rvec(&mut r)), (rvec(&mut r), rvec(&mut r)));
                vec![a, b, (unit(a.0.cross(&b.0)), unit(a.1.cross(&b.1)))]
            }
        };
        let mob = vec![place(&p[0], s, m), place(&p[1], s, m)];
        let stat = DcNot::new(s, p[2].0, t, rvec(&mut r));
        let ctx = PassThroughContext::new(mob, stat).unwrap();
        let o = pass_through_2(&ctx).unwrap_or_else(|e| panic!("case {k}: {e}"));
        assert_eq!(o.replacement.len(), 3);
        check(&ctx.gates(), &o, 1e-7);
    }
}

#[test]
fn pt2_generic_is_not_applicable() {
    let mut r = rng(23);
    let mut na = 0;
    for _ in 0..100 {
        let mob: Vec<DcNot> = random_pairs(&mut r, 2).iter().map(|p| place(p, 0, 1)).collect();
        let stat = DcNot::new(0, rvec(&mut r), 2, rvec(&mut r));
        if pass_through_2(&PassThroughContext::new(mob, stat).unwrap()).is_err() {
            na += 1;
        }
    }
    assert_eq!(na, 100);
}

#[test]
fn pt1_random_and_reversed() {
    let mut r = rng(24);
    for k in 0..100 {
        let (s, m, t) = LAYOUTS[k % 3];
        let a = rvec(&mut r);
        let mob = DcNot::new(s, a, m, rvec(&mut r));
        let stat = DcNot::new(s, par_to(&mut r, &a), t, rvec(&mut r));
        let ctx = PassThroughContext::new(vec![mob], stat).unwrap();
        let o = pass_through_1(&ctx).unwrap();
        check(&ctx.gates(), &o, 1e-8);
        // Static first, then mobile.
        let o = pass_through_reversed(&stat, &[mob]).unwrap();
        let l: Vec<Gate> = [stat, mob].iter().map(|d| Gate::DcNot(*d)).collect();
        let e = (gates_unitary(&l, 3).unwrap() - gates_unitary(&o.gates(), 3).unwrap()).norm();
        assert!(e < 1e-8);
        assert_eq!(o.replacement.last(), Some(&stat));
    }
}

#[test]
fn wake_random() {
    let mut r = rng(25);
    for _ in 0..100 {
        let b1 = rvec(&mut r);
        let a1 = perp_to(&mut r, &b1);
        let stat = DcNot::new(1, a1, 2, rvec(&mut r));
        let mob = DcNot::new(0, rvec(&mut r), 1, b1);
        let out = wake_rewrite(&stat, &mob).unwrap();
        let e = (dcnots_unitary(&[stat, mob], 3) - dcnots_unitary(&out, 3)).norm();
        assert!(e < 1e-10);
    }
}

#[test]
fn pt3_block_consistency() {
    use dcnot_core::invariants::{closed_parts, g4_blocks_from};
    let mut r = rng(26);
    for _ in 0..300 {
        let p = random_pairs(&mut r, 3);
        let e = rvec(&mut r);
        let d1 = pt3_wedge(&p, &e).unwrap();
        let g3 = closed_parts(&p).unwrap();
        let b = g4_blocks_from(-g3.lam_r, -g3.lam_i, &g3.gi, &g3.gr, &e, &d1);
        let want = b.xo * b.yo;
        assert!((b.x_prime.dot(&b.y_prime) - want).abs() < 1e-9, "{} {want}", b.x_prime.dot(&b.y_prime));
        assert!((b.x.dot(&b.y) - want).abs() < 1e-9, "{} {want}", b.x.dot(&b.y));
    }
}
