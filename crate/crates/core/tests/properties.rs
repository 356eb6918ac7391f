use dcnot_core::circuit::{
    circuit_unitary, dcnot_unitary, dcnots_unitary, gates_unitary, parse, serialize, Circuit, DcNot, Gate,
};
use dcnot_core::invariants::{factor_tensor_product, g2_closed, lo_rhs_equivalent, quad_invariant};
use dcnot_core::linalg::{c, gamma, gamma_inv, identity, kron, paulion, rot, su2_to_so3, CMat, RMat3, UnitVec3, Vec3};
use dcnot_core::optimizer::{push_locals_out, simplify_run};
use proptest::prelude::*;

prop_compose! {
    fn unit()(z in -1.0..=1.0f64, phi in 0.0..std::f64::consts::TAU) -> UnitVec3 {
        let s = (1.0 - z * z).max(0.0).sqrt();
        UnitVec3::normalize(Vec3::new(s * phi.cos(), s * phi.sin(), z)).unwrap()
    }
}

fn theta() -> impl Strategy<Value = f64> {
    -3.2..3.2f64
}

fn dcnot(nbits: usize) -> impl Strategy<Value = DcNot> {
    let pairs: Vec<(usize, usize)> = match nbits {
        2 => vec![(0, 1)],
        _ => vec![(0, 1), (0, 2), (1, 2)],
    };
    (prop::sample::select(pairs), unit(), unit()).prop_map(|((i, j), a, b)| DcNot::new(i, a, j, b))
}

fn run(n: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = Vec<DcNot>> {
    prop::collection::vec(dcnot(2), n)
}

fn gate(nbits: usize) -> impl Strategy<Value = Gate> {
    prop_oneof![
        3 => dcnot(nbits).prop_map(Gate::DcNot),
        2 => (0..nbits, unit(), theta()).prop_map(|(w, a, t)| Gate::rot(w, a, t)),
        1 => theta().prop_map(Gate::phase),
    ]
}

fn circuit() -> impl Strategy<Value = Circuit> {
    (2..=3usize).prop_flat_map(|n| prop::collection::vec(gate(n), 0..8).prop_map(move |gates| Circuit { nbits: n, gates }))
}

fn local2() -> impl Strategy<Value = CMat> {
    (unit(), theta(), unit(), theta()).prop_map(|(a, s, b, t)| kron(&rot(&a, s), &rot(&b, t)))
}

fn pairs_of(ds: &[DcNot]) -> Vec<(UnitVec3, UnitVec3)> {
    ds.iter().map(|d| (d.v_i, d.v_j)).collect()
}

proptest! {
    #[test]
    fn dcnot_is_hermitian_involution(d in dcnot(3)) {
        let u = dcnot_unitary(&d, 3).unwrap();
        prop_assert!((&u - u.adjoint()).norm() < 1e-12);
        prop_assert!((&u * &u - identity(8)).norm() < 1e-12);
    }

    #[test]
    fn dcnot_is_controlled_sign(d in dcnot(2)) {
        // (−1)^{n_a n_b} = (I + σ_a + σ_b − σ_b⊗σ_a)/2 with wire 1 on the left.
        let (a, b) = (d.v_i.v(), d.v_j.v());
        let (pa, pb) = (paulion(&a), paulion(&b));
        let want = (kron(&identity(2), &identity(2)) + kron(&identity(2), &pa) + kron(&pb, &identity(2))
            - kron(&pb, &pa)) * c(0.5, 0.0);
        prop_assert!((dcnot_unitary(&d, 2).unwrap() - want).norm() < 1e-12);
    }

    #[test]
    fn su2_to_so3_conjugates_paulions(a in unit(), t in theta(), v in unit()) {
        let u = rot(&a, t);
        let r = su2_to_so3(&u);
        let lhs = &u * paulion(&v.v()) * u.adjoint();
        prop_assert!((lhs - paulion(&(r * v.v()))).norm() < 1e-12);
        prop_assert!((r.transpose() * r - RMat3::identity()).norm() < 1e-12);
        prop_assert!((r.determinant() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn su2_to_so3_is_a_homomorphism(a in unit(), s in theta(), b in unit(), t in theta()) {
        let (u, v) = (rot(&a, s), rot(&b, t));
        let lhs = su2_to_so3(&(&u * &v));
        prop_assert!((lhs - su2_to_so3(&u) * su2_to_so3(&v)).norm() < 1e-12);
    }

    #[test]
    fn gamma_round_trip(m in prop::array::uniform9(-2.0..2.0f64)) {
        let l = RMat3::from_row_slice(&m);
        prop_assert!((gamma(&gamma_inv(&l)) - l).norm() < 1e-12);
    }

    #[test]
    fn invariant_ignores_right_locals(ds in run(1..=5), loc in local2()) {
        let u = dcnots_unitary(&ds, 2);
        let a = quad_invariant(&u, 2).unwrap();
        let b = quad_invariant(&(&u * loc), 2).unwrap();
        prop_assert!((a - b).norm() < 1e-10);
    }

    #[test]
    fn invariant_is_covariant_under_left_locals(ds in run(1..=5), loc in local2()) {
        // (L A)⁽²⁾ = L A⁽²⁾ L†
        let u = dcnots_unitary(&ds, 2);
        let a = quad_invariant(&u, 2).unwrap();
        let b = quad_invariant(&(&loc * &u), 2).unwrap();
        prop_assert!((b - &loc * a * loc.adjoint()).norm() < 1e-10);
    }

    #[test]
    fn closed_form_matches_direct(ds in run(1..=4)) {
        let direct = quad_invariant(&dcnots_unitary(&ds, 2), 2).unwrap();
        prop_assert!((g2_closed(ds.len(), &pairs_of(&ds)).unwrap() - direct).norm() < 1e-10);
    }

    #[test]
    fn determinant_alternates(ds in run(0..=6)) {
        let want = if ds.len() % 2 == 0 { 1.0 } else { -1.0 };
        prop_assert!((dcnots_unitary(&ds, 2).determinant() - c(want, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn factoring_recovers_products(a in unit(), s in theta(), b in unit(), t in theta(), e in unit(), u in theta(), ph in theta()) {
        let m = kron(&kron(&rot(&a, s), &rot(&b, t)), &rot(&e, u)) * c(ph.cos(), ph.sin());
        let f = factor_tensor_product(&m, 3).unwrap();
        prop_assert!((f.matrix() - m).norm() < 1e-10);
    }

    #[test]
    fn lo_rhs_accepts_right_locals(ds in run(1..=4), loc in local2()) {
        let u = dcnots_unitary(&ds, 2);
        prop_assert!(lo_rhs_equivalent(&u, &(&u * loc)).unwrap().0);
    }

    #[test]
    fn serialize_parse_round_trip(circ in circuit()) {
        let text = serialize(&circ);
        let back = parse(&text).unwrap();
        prop_assert_eq!(serialize(&back), text);
        let e = (circuit_unitary(&circ).unwrap() - circuit_unitary(&back).unwrap()).norm();
        prop_assert!(e < 1e-13);
    }

    #[test]
    fn push_locals_out_preserves_unitary(circ in circuit()) {
        let (ds, tail) = push_locals_out(&circ.gates, circ.nbits);
        let mut gates: Vec<Gate> = ds.iter().map(|d| Gate::DcNot(*d)).collect();
        gates.extend(tail);
        let e = (circuit_unitary(&circ).unwrap() - gates_unitary(&gates, circ.nbits).unwrap()).norm();
        prop_assert!(e < 1e-10);
        prop_assert_eq!(ds.len(), circ.dcnot_count());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn simplify_run_is_sound(ds in run(1..=7)) {
        let o = simplify_run(&ds);
        prop_assert!(o.replacement.len() <= ds.len().min(3));
        let e = (dcnots_unitary(&ds, 2) - gates_unitary(&o.gates(), 2).unwrap()).norm();
        prop_assert!(e < 1e-6, "{}", e);
    }
}
