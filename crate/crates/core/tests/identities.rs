mod common;

use common::*;
use dcnot_core::circuit::{gates_unitary, Gate};
use dcnot_core::linalg::{rot, su2_to_so3, UnitVec3};
use dcnot_core::rewrite2q::*;
use rand::Rng;

fn diff(a: &[Gate], b: &[Gate]) -> f64 {
    (gates_unitary(a, 2).unwrap() - gates_unitary(b, 2).unwrap()).norm()
}

#[test]
fn swapper_with_local() {
    let mut r = rng(11);
    for _ in 0..50 {
        let a = rvec(&mut r);
        let b = perp_to(&mut r, &a);
        let u = rot(&rvec(&mut r), angle(&mut r));
        let plain = swapper_expansion(&a, &b, None).unwrap();
        let dressed = swapper_expansion(&a, &b, Some(&u)).unwrap();
        assert!(diff(&plain, &dressed) < 1e-12);
        // Conjugation check behind the dressed form.
        let r3 = su2_to_so3(&u.adjoint());
        assert!((r3 * a.v()).norm() > 0.99);
    }
}

#[test]
fn two_thirds_both_forms() {
    let mut r = rng(12);
    for _ in 0..50 {
        let (a, a1) = (rvec(&mut r), rvec(&mut r));
        let (b, b1) = (perp_to(&mut r, &a), perp_to(&mut r, &a1));
        let lhs = run(&[(a, a1), (b, b1)]);
        let lg: Vec<Gate> = lhs.iter().map(|d| Gate::DcNot(*d)).collect();
        let (al, ap) = (angle(&mut r), angle(&mut r));
        for form in [TwoThirdsForm::RotateB, TwoThirdsForm::RotateA] {
            let rhs = two_thirds_swap(&lhs, al, ap, form).unwrap();
            let e = diff(&lg, &rhs);
            assert!(e < 1e-12, "{form:?} {e}");
        }
    }
}

#[test]
fn catalog() {
    let mut r = rng(13);
    for _ in 0..50 {
        let (al, ap) = (angle(&mut r), angle(&mut r));
        let (l, rr) = one_third_swap(al, ap);
        assert!(diff(&l, &rr) < 1e-12, "1/3 {}", diff(&l, &rr));
        let (l, rr) = sim_trans_rewrite(al, ap);
        assert!(diff(&l, &rr) < 1e-12, "sim {}", diff(&l, &rr));
        let phi = r.random_range(-1.5..1.5);
        let (l, rr) = split_sim_trans(phi, al);
        assert!(diff(&l, &rr) < 1e-12, "split {}", diff(&l, &rr));
        let (l, rr) = split_sim_trans2(phi, al);
        assert!(diff(&l, &rr) < 1e-12, "split2 {}", diff(&l, &rr));
    }
    let _ = UnitVec3::x();
}
