use algindex::hochschild::Chain;
use algindex::index::*;
use algindex::poisson::{poisson_bracket, Polyvector};
use algindex::starprod::{idempotent_lift, mat_neumann_inverse, StarProduct};
use algindex::weyl::rational::int;
use algindex::weyl::*;
use proptest::prelude::*;

fn p(m: &ModelConfig, s: &str) -> FormalSeries {
    parse_series(m, s).unwrap()
}

fn mat(m: &ModelConfig, rows: &[&[&str]]) -> MatrixSeries {
    MatrixSeries::from_rows(*m, rows.iter().map(|r| r.iter().map(|s| p(m, s)).collect()).collect()).unwrap()
}

fn plane(w: u32, h: u32) -> ModelConfig {
    ModelConfig::plane(2, w, h).unwrap().with_base_cutoff(6).with_matrix_size(2).unwrap()
}

fn torus(w: u32, h: u32) -> ModelConfig {
    ModelConfig::torus(2, w, h).unwrap().with_base_cutoff(12).with_matrix_size(2).unwrap()
}

fn frame(m: &ModelConfig, a: &str, b: &str) -> Frame {
    Frame::elementary(&p(m, a), &p(m, b), 2).unwrap()
}

fn instance(m: &ModelConfig, q: &MatrixSeries) -> IndexInstance {
    IndexInstance::new(&Polyvector::standard(*m), q).unwrap()
}

fn d(inst: &IndexInstance, a: &MatrixSeries) -> MatrixSeries {
    a.map(|e| inst.fedosov().apply_d(e))
}

fn band(m: &ModelConfig, a: &MatrixSeries) -> MatrixSeries {
    a.map(|e| e.below_weight(m.fiber_max))
}

#[test]
fn frame_projector_is_idempotent() {
    let m = torus(4, 2);
    let f = frame(&m, "u1", "u2^-1");
    assert!(f.g.mul_with(&f.g_inv, &Pointwise).is_identity());
    let q = f.projector(1).unwrap();
    assert_eq!(q, mat(&m, &[&["1 + u1*u2^-1", "-u1 - u1^2*u2^-1"], &["u2^-1", "-u1*u2^-1"]]));
    assert_eq!(q.mul_with(&q, &Pointwise), q);
    assert!(f.projector(3).is_err());
}

#[test]
fn gamma_q_examples() {
    let m = plane(4, 2);
    let e11 = mat(&m, &[&["1", "0"], &["0", "0"]]);
    assert!(gamma_q(&e11).unwrap().is_zero());
    assert!(gamma_q(&MatrixSeries::identity(m)).unwrap().is_zero());

    // g = I + x1 e12: q = [[1, −x1], [0, 0]], dq = −θ1 e12, q·dq = −θ1 e12, dq·q = 0
    let q = mat(&m, &[&["1", "-x1"], &["0", "0"]]);
    let g = gamma_q(&q).unwrap();
    assert_eq!(g, mat(&m, &[&["0", "-th1"], &["0", "0"]]));
    assert!(gamma_q_residual(&q, &g).is_zero());
    assert!(!gamma_q_residual(&q, &MatrixSeries::zero(m)).is_zero());

    let not_idem = mat(&m, &[&["1", "x1"], &["0", "1 + x2"]]);
    assert!(gamma_q(&not_idem).is_err());
}

#[test]
fn bq_on_constant_idempotent_is_zero() {
    let m = plane(4, 2);
    let inst = instance(&m, &mat(&m, &[&["1", "0"], &["0", "0"]]));
    let b = bq_iterate(&inst).unwrap();
    assert!(b.is_zero());
    let u = u_iterate(&inst, &b);
    assert!(u.is_identity());
    let f = build_q(&inst, inst.q(), &u).unwrap();
    assert_eq!(f.q_full, *inst.q());
    assert_eq!(f.q0, *inst.q());
}

#[test]
fn bq_solves_the_mc_equation() {
    let m = plane(6, 3);
    let f = frame(&m, "x1", "x2");
    let q = f.projector(1).unwrap();
    let inst = instance(&m, &q);
    let b = bq_iterate(&inst).unwrap();
    let gamma = gamma_q(&q).unwrap();
    assert_eq!(b.map(|e| e.restrict_fiber_zero()), gamma);
    assert!(b.entries().iter().any(|e| e.has_fiber()));

    let half = rational::frac(1, 2);
    let mc = &d(&inst, &b) + &b.bracket_with(&b, inst.diamond()).scale(&half);
    assert!(band(&m, &mc).is_zero());
    assert!(bq_mc_residual(&b, &inst).is_zero());

    let bumped = &b + &MatrixSeries::unit(&p(&m, "h*th1"), 0, 0);
    assert!(!bq_mc_residual(&bumped, &inst).is_zero());
}

#[test]
fn lemma_residual_vanishes() {
    let m = plane(6, 3);
    let q = frame(&m, "x1", "x2").projector(1).unwrap();
    let inst = instance(&m, &q);
    let b = bq_iterate(&inst).unwrap();
    assert!(lemma_residual(&q, &b, &inst).is_zero());
    let wrong = &d(&inst, &q) - &b.bracket_with(&q, inst.diamond());
    assert!(!band(&m, &wrong).is_zero());
}

#[test]
fn u_trivializes_bq() {
    let m = plane(6, 3);
    let q = frame(&m, "x1 + x2", "x2").projector(1).unwrap();
    let inst = instance(&m, &q);
    let b = bq_iterate(&inst).unwrap();
    let u = u_iterate(&inst, &b);
    let id = MatrixSeries::identity(m);
    assert!((&u - &id).entries().iter().all(|e| e.min_weight().is_none_or(|w| w >= 1)));
    assert!(!(&u - &id).is_zero());
    assert!(u_residual(&u, &b, &inst).is_zero());

    let inv = mat_neumann_inverse(&u, inst.diamond()).unwrap();
    assert!(inv.mul_with(&u, inst.diamond()).is_identity());
    let twisted = inv.mul_with(&d(&inst, &u), inst.diamond());
    assert_eq!(band(&m, &twisted), band(&m, &b));
    assert!(u_twist_residual(&u, &b, &inst).unwrap().is_zero());
}

#[test]
fn flat_idempotent_q() {
    let m = plane(6, 3);
    let q = frame(&m, "x1", "x2^2").projector(1).unwrap();
    let inst = instance(&m, &q);
    let b = bq_iterate(&inst).unwrap();
    let u = u_iterate(&inst, &b);
    let f = build_q(&inst, &q, &u).unwrap();
    let star = StarProduct::moyal(&Polyvector::standard(m)).unwrap();
    let q0 = &f.q0;
    assert!(q0.entries().iter().all(|e| !e.has_fiber()));
    assert_eq!(q0.mul_with(q0, &star), *q0);
    assert_eq!(q0.map(|e| e.principal_symbol()), q);
    assert_ne!(*q0, q);
    assert!(band(&m, &d(&inst, &f.q_full)).is_zero());
    assert_eq!(inst.fedosov().flat_lift_matrix(q0).unwrap(), f.q_full);
    for (_, name, r) in f.residuals(&inst).unwrap() {
        assert!(r.is_zero(), "{name}: {r}");
    }
}

#[test]
fn adapted_frame_makes_bq_block_diagonal() {
    let m = plane(6, 3);
    let f = frame(&m, "x1", "x2");
    let q = f.projector(1).unwrap();
    let inst = instance(&m, &q);
    let b = bq_iterate(&inst).unwrap();
    assert!(adapted_frame_residual(&b, &f.g, &f.g_inv, 1).unwrap().is_zero());
    // the unadapted frame leaves off-diagonal blocks
    let id = MatrixSeries::identity(m);
    assert!(!adapted_frame_residual(&b, &id, &id, 1).unwrap().is_zero());
    assert!(adapted_frame_residual(&b, &f.g, &id, 1).is_err());
}

#[test]
fn q_tilde_examples() {
    let m = plane(6, 3);
    let q = frame(&m, "x1", "x2").projector(1).unwrap();
    let inst = instance(&m, &q);
    let b = bq_iterate(&inst).unwrap();
    let qt = q_tilde(&q, &b).unwrap();
    let explicit = Chain::from_element(&q)
        .try_add(&Chain::from_tuple(&[q.clone(), b.clone()]).unwrap())
        .unwrap()
        .try_add(&-&Chain::from_tuple(&[q.clone(), b.clone(), b.clone()]).unwrap())
        .unwrap();
    assert_eq!(qt, explicit);
    assert_eq!(q_tilde_series(&q, &b).unwrap(), explicit);
    assert!(Chain::from_tuple(&[q.clone(), b.clone(), b.clone(), b.clone()]).unwrap().is_zero());
    assert_eq!(q_tilde(&q, &MatrixSeries::zero(m)).unwrap(), Chain::from_element(&q));
}

#[test]
fn psi_examples() {
    let m = plane(6, 3);
    let q = frame(&m, "x1", "x2").projector(1).unwrap();
    let inst = instance(&m, &q);
    let id = MatrixSeries::identity(m);
    let zero = MatrixSeries::zero(m);
    let psi = psi_homotopy(&q, &zero, &id, &inst).unwrap();
    assert_eq!(psi, Chain::from_suspended(&[id.clone(), q.clone()]).unwrap());

    let b = bq_iterate(&inst).unwrap();
    let u = u_iterate(&inst, &b);
    let psi = psi_homotopy(&q, &b, &u, &inst).unwrap();
    // three B factors exceed the two form directions
    let last = q.mul_with(&mat_neumann_inverse(&u, inst.diamond()).unwrap(), inst.diamond());
    assert!(Chain::from_suspended(&[u.clone(), b.clone(), b.clone(), b.clone(), last]).unwrap().is_zero());
    let chain_degrees: Vec<usize> = psi.degrees();
    assert_eq!(chain_degrees, vec![1, 2, 3]);

    let other = mat(&m, &[&["x1", "0"], &["1", "x2"]]);
    let sum = psi_homotopy(&(&q + &other), &b, &u, &inst).unwrap();
    let parts = psi.try_add(&psi_homotopy(&other, &b, &u, &inst).unwrap()).unwrap();
    assert_eq!(sum, parts);
}

#[test]
fn homotopy_on_constant_idempotent() {
    let m = plane(4, 2);
    let q = mat(&m, &[&["1", "0"], &["0", "0"]]);
    let inst = instance(&m, &q);
    let pl = run_pipeline(&inst).unwrap();
    let qt = q_tilde(&q, &pl.bq).unwrap();
    let psi = psi_homotopy(&q, &pl.bq, &pl.u, &inst).unwrap();
    assert!(homotopy_residual(&pl.flat.q_full, &qt, &psi, &inst).unwrap().is_zero());
}

#[test]
fn homotopy_on_plane() {
    let m = plane(6, 3);
    let q = frame(&m, "x1", "x2").projector(1).unwrap();
    let inst = instance(&m, &q);
    let pl = run_pipeline(&inst).unwrap();
    let qt = q_tilde(&q, &pl.bq).unwrap();
    let psi = psi_homotopy(&q, &pl.bq, &pl.u, &inst).unwrap();
    let r = homotopy_residual(&pl.flat.q_full, &qt, &psi, &inst).unwrap();
    assert!(r.is_zero(), "{r}");

    // degree zero: Q − q = b(U ⊗ q⋄U⁻¹)
    let last = q.mul_with(&pl.flat.u_inv, inst.diamond());
    let one_chain = Chain::from_suspended(&[pl.u.clone(), last]).unwrap();
    let b0 = one_chain.boundary(inst.diamond_cochain()).unwrap().component(0, 0);
    let lhs = Chain::from_element(&(&pl.flat.q_full - &q)).component(0, 0);
    assert_eq!(lhs.below_weight(m.fiber_max), b0.below_weight(m.fiber_max));
    assert!(!lhs.is_zero());

    // the displayed signs on the odd terms do not give a homotopy here
    let wrong = psi
        .try_add(&Chain::from_suspended(&[pl.u.clone(), pl.bq.clone(), q.mul_with(&pl.flat.u_inv, inst.diamond())]).unwrap().scale(&int(-2)))
        .unwrap();
    assert!(!homotopy_residual(&pl.flat.q_full, &qt, &wrong, &inst).unwrap().is_zero());
}

#[test]
fn homotopy_on_torus() {
    let m = torus(5, 2);
    let q = frame(&m, "u1", "u2^-1").projector(1).unwrap();
    let inst = instance(&m, &q);
    let pl = run_pipeline(&inst).unwrap();
    let qt = q_tilde(&q, &pl.bq).unwrap();
    let psi = psi_homotopy(&q, &pl.bq, &pl.u, &inst).unwrap();
    assert!(homotopy_residual(&pl.flat.q_full, &qt, &psi, &inst).unwrap().is_zero());
}

#[test]
fn trace_density_examples() {
    let m = torus(4, 2);
    let pi = Polyvector::standard(m);
    let trd = TraceDensity::new(&pi).unwrap();
    assert_eq!(trd.apply(&FormalSeries::one(m)).unwrap(), FormalSeries::one(m));
    let c = trd.commutator(&p(&m, "u1"), &p(&m, "u2")).unwrap();
    assert!(!c.is_zero());
    assert!(trd.apply(&c).unwrap().is_zero());
    assert_eq!(trd.apply(&p(&m, "3 + u1 + h*u2^-1 + 2*h^2")).unwrap(), p(&m, "3 + 2*h^2"));
    assert_eq!(algindex::index::trd(&p(&m, "1"), &pi).unwrap(), FormalSeries::one(m));

    // on the plane every Koszul-exact ℏ-multiple reduces to zero
    let mp = plane(4, 2);
    let pip = Polyvector::standard(mp);
    let f = p(&mp, "x1^2*x2");
    let g = p(&mp, "x1*x2^2 + x2");
    let exact = poisson_bracket(&pip, &f, &g).shift_hbar(1);
    assert!(!exact.is_zero());
    assert!(algindex::index::trd(&exact, &pip).unwrap().is_zero());
}

#[test]
fn trace_density_refuses_nonconstant_bivector() {
    let m = plane(4, 2);
    let pi = Polyvector::parse_bivector(m, &[vec!["0".into(), "x1".into()], vec!["-x1".into(), "0".into()]]).unwrap();
    assert!(TraceDensity::new(&pi).is_err());
}

#[test]
fn trace_density_kills_commutators_of_modes() {
    let m = torus(8, 4);
    let trd = TraceDensity::new(&Polyvector::standard(m)).unwrap();
    let modes = sample_modes(&m, 2);
    let mut pairs = 0;
    for a in &modes {
        for b in &modes {
            let c = trd.commutator(a, b).unwrap();
            assert!(trd.apply(&c).unwrap().is_zero(), "[{a}, {b}]");
            pairs += 1;
        }
    }
    assert!(pairs >= 500);
}

#[test]
fn quantum_index_examples() {
    let m = torus(4, 2);
    let pi = Polyvector::standard(m);
    let trd = TraceDensity::new(&pi).unwrap();
    let e11 = mat(&m, &[&["1", "0"], &["0", "0"]]);
    assert_eq!(quantum_index(&e11, &trd).unwrap(), FormalSeries::one(m));
    let m3 = ModelConfig::torus(2, 4, 2).unwrap().with_base_cutoff(12).with_matrix_size(3).unwrap();
    let trd3 = TraceDensity::new(&Polyvector::standard(m3)).unwrap();
    assert_eq!(quantum_index(&MatrixSeries::identity(m3), &trd3).unwrap(), FormalSeries::constant(m3, int(3)));
    let q = frame(&m, "u1", "u2^-1").projector(1).unwrap();
    assert!(quantum_index(&q, &trd).is_err());
}

#[test]
fn classical_index_examples() {
    let m = torus(4, 2);
    let trd = TraceDensity::new(&Polyvector::standard(m)).unwrap();
    let e11 = mat(&m, &[&["1", "0"], &["0", "0"]]);
    assert_eq!(classical_index(&instance(&m, &e11), &trd).unwrap(), FormalSeries::one(m));
    let zero = MatrixSeries::zero(m);
    assert!(classical_index(&instance(&m, &zero), &trd).unwrap().is_zero());
}

#[test]
fn index_routes_agree_on_torus() {
    let m = torus(8, 4);
    let q = frame(&m, "u1", "u2^-1").projector(1).unwrap();
    let r = index_compare(&instance(&m, &q), false).unwrap();
    for e in &r.ledger {
        assert!(e.zero, "{}: {}", e.name, e.residual);
    }
    assert_eq!(r.quantum_index, r.classical_index);
    assert_eq!(r.quantum_index, r.second_quantum_index);
    assert_ne!(r.lift, r.second_lift);
    // observed: the density is the rank at every order
    assert_eq!(r.quantum_index, FormalSeries::one(m));
}

#[test]
fn index_routes_agree_on_plane_degenerately() {
    let m = plane(6, 3);
    let q = frame(&m, "x1", "x2").projector(1).unwrap();
    let r = index_compare(&instance(&m, &q), true).unwrap();
    assert!(r.all_zero(), "{:?}", r.ledger.iter().filter(|e| !e.zero).collect::<Vec<_>>());
    assert!(r.quantum_index.is_zero());
    assert!(r.classical_index.is_zero());
    assert!(r.q_tilde.is_some() && r.psi.is_some());
}

#[test]
fn lifts_of_the_same_symbol_have_equal_index() {
    let m = torus(6, 3);
    let pi = Polyvector::standard(m);
    let star = StarProduct::moyal(&pi).unwrap();
    let trd = TraceDensity::new(&pi).unwrap();
    let q = frame(&m, "u1 + u2", "u1^-1").projector(1).unwrap();
    let a = idempotent_lift(&q, &star).unwrap();
    let b = conjugated_lift(&a, &star).unwrap();
    assert_ne!(a, b);
    assert_eq!(quantum_index(&a, &trd).unwrap(), quantum_index(&b, &trd).unwrap());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(4))]

    #[test]
    fn routes_agree_for_random_plane_frames(
        a in prop::collection::vec(-2i64..=2, 3),
        b in prop::collection::vec(-2i64..=2, 3),
    ) {
        let m = plane(3, 1);
        let lin = |c: &[i64]| {
            let x1 = FormalSeries::base_var(m, 0).scale(&int(c[1]));
            let x2 = FormalSeries::base_var(m, 1).scale(&int(c[2]));
            &(&FormalSeries::constant(m, int(c[0])) + &x1) + &x2
        };
        let f = Frame::elementary(&lin(&a), &lin(&b), 2).unwrap();
        let q = f.projector(1).unwrap();
        let inst = instance(&m, &q);
        let r = index_compare(&inst, true).unwrap();
        for e in &r.ledger {
            prop_assert!(e.zero, "{}: {}", e.name, e.residual);
        }
        prop_assert!(adapted_frame_residual(&r.pipeline.bq, &f.g, &f.g_inv, 1).unwrap().is_zero());
    }
}
