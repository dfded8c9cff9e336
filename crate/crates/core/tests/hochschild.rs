use algindex::hochschild::{Chain, Cochain, Multi, Slot, Word};
use algindex::weyl::rational::{frac, int};
use algindex::weyl::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// Large fiber cap so that no identity below ever reaches the truncation.
fn model(n: usize) -> ModelConfig {
    ModelConfig::plane(2, 12, 0).unwrap().with_matrix_size(n).unwrap()
}

fn p(m: &ModelConfig, s: &str) -> FormalSeries {
    parse_series(m, s).unwrap()
}

fn small_series(m: &ModelConfig, rng: &mut ChaCha8Rng, terms: usize, max_fiber: u8) -> FormalSeries {
    let mut s = FormalSeries::zero(*m);
    for _ in 0..terms {
        let mut mono = Monomial::one();
        for i in 0..m.dim {
            mono.base[i] = rng.gen_range(0..=1);
            mono.fiber[i] = rng.gen_range(0..=max_fiber);
            if rng.gen_bool(0.4) {
                mono.forms |= 1 << i;
            }
        }
        s.add_term(mono, frac(rng.gen_range(-4..=4), rng.gen_range(1..=2)));
    }
    s
}

fn random_matrix(m: &ModelConfig, rng: &mut ChaCha8Rng) -> MatrixSeries {
    let n = m.matrix_size;
    let mut a = MatrixSeries::zero(*m);
    for i in 0..n {
        for j in 0..n {
            if n == 1 || rng.gen_bool(0.6) {
                a.set(i, j, small_series(m, rng, 2, 2));
            }
        }
    }
    a
}

fn random_multi(rng: &mut ChaCha8Rng, allow_zero: bool) -> Multi {
    loop {
        let a: Multi = [rng.gen_range(0..=1), rng.gen_range(0..=1), 0, 0];
        if allow_zero || a != [0; 4] {
            return a;
        }
    }
}

/// A normalized cochain with a couple of words of the given arity.
fn random_cochain(m: &ModelConfig, arity: usize, rng: &mut ChaCha8Rng) -> Cochain {
    random_cochain_sized(m, m.matrix_size, arity, rng)
}

fn random_cochain_sized(m: &ModelConfig, size: usize, arity: usize, rng: &mut ChaCha8Rng) -> Cochain {
    let n = size as u8;
    let mut c = Cochain::zero(*m, size);
    for _ in 0..2 {
        let w = Word {
            out: (rng.gen_range(0..n), rng.gen_range(0..n)),
            slots: (0..arity)
                .map(|_| Slot {
                    alpha: random_multi(rng, false),
                    row: rng.gen_range(0..n),
                    col: rng.gen_range(0..n),
                })
                .collect(),
        };
        c.add_term(w, small_series(m, rng, 1, 1)).unwrap();
    }
    c
}

fn homogeneous_parts(c: &Cochain) -> Vec<(bool, Cochain)> {
    c.graded_parts()
        .into_iter()
        .map(|(m, g, part)| ((g as usize + m + 1) % 2 == 1, part))
        .collect()
}

fn sign(odd: bool) -> Rational {
    if odd {
        int(-1)
    } else {
        int(1)
    }
}

fn mu(m: &ModelConfig) -> Cochain {
    Cochain::product(*m, m.matrix_size)
}

/// The unsuspended boundary, written out term by term from its defining formula.
fn boundary_oracle(slots: &[MatrixSeries]) -> Chain {
    let m = *slots[0].model();
    let n = slots.len() - 1;
    let mut out = Chain::zero(m, slots[0].size());
    let deg = |a: &MatrixSeries| a.form_components()[0].0;
    for i in 0..n {
        let mut t = slots[..i].to_vec();
        t.push(slots[i].mul_with(&slots[i + 1], &Pointwise));
        t.extend_from_slice(&slots[i + 2..]);
        out = &out + &Chain::from_tuple(&t).unwrap().scale(&sign(i % 2 == 1));
    }
    if n > 0 {
        let before: u32 = slots[..n].iter().map(deg).sum();
        let e = n as u32 + deg(&slots[n]) * before;
        let mut t = vec![slots[n].mul_with(&slots[0], &Pointwise)];
        t.extend_from_slice(&slots[1..n]);
        out = &out + &Chain::from_tuple(&t).unwrap().scale(&sign(e % 2 == 1));
    }
    out
}

fn homogeneous_matrix(m: &ModelConfig, rng: &mut ChaCha8Rng) -> MatrixSeries {
    let a = random_matrix(m, rng);
    let comps = a.form_components();
    comps[rng.gen_range(0..comps.len())].1.clone()
}

#[test]
fn evaluate_examples() {
    let m = model(1);
    let mu = mu(&m);
    let y1 = MatrixSeries::scalar(&p(&m, "y1"));
    let y2 = MatrixSeries::scalar(&p(&m, "y2"));
    assert_eq!(mu.evaluate(&[y1.clone(), y2.clone()]).unwrap(), MatrixSeries::scalar(&p(&m, "y1*y2")));

    let one = FormalSeries::one(m);
    let d1 = [1, 0, 0, 0];
    let d2 = [0, 1, 0, 0];
    let pi = &Cochain::scalar_operator(&one, &[d1, d2]) - &Cochain::scalar_operator(&one, &[d2, d1]);
    assert_eq!(pi.evaluate(&[y1.clone(), y2.clone()]).unwrap(), MatrixSeries::identity(m));
    assert!(pi.is_normalized());
    let c = MatrixSeries::scalar(&p(&m, "3*x1 + x2^2"));
    assert!(pi.evaluate(&[c, y2]).unwrap().is_zero());
    assert!(matches!(pi.evaluate(&[y1]), Err(algindex::Error::Arity { expected: 2, got: 1 })));
}

#[test]
fn gerstenhaber_of_the_product() {
    for n in [1, 2] {
        let m = model(n);
        let mu = mu(&m);
        assert!(mu.gerstenhaber(&mu).unwrap().is_zero());
        assert!(mu.codifferential(&mu).unwrap().is_zero());
    }
}

#[test]
fn bracket_with_elements_is_the_commutator() {
    let m = model(2);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mu = mu(&m);
    for _ in 0..20 {
        let v = homogeneous_matrix(&m, &mut rng);
        let w = homogeneous_matrix(&m, &mut rng);
        let nested = mu
            .gerstenhaber(&Cochain::element(&v))
            .unwrap()
            .gerstenhaber(&Cochain::element(&w))
            .unwrap();
        let comm = v.bracket_with(&w, &Pointwise);
        let got = nested.evaluate(&[]).unwrap();
        // the suspension contributes (−1)^{|v|}
        let dv = v.form_components()[0].0;
        assert_eq!(got, comm.scale(&sign(dv % 2 == 1)), "v = {v}, w = {w}");
    }
}

#[test]
fn gerstenhaber_antisymmetry_and_jacobi() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for n in [1, 2] {
        let m = model(n);
        for round in 0..6 {
            let a = random_cochain(&m, 1 + round % 2, &mut rng);
            let b = random_cochain(&m, round % 3, &mut rng);
            let c = random_cochain(&m, 1, &mut rng);
            for (pa, a) in homogeneous_parts(&a) {
                for (pb, b) in homogeneous_parts(&b) {
                    let ab = a.gerstenhaber(&b).unwrap();
                    let ba = b.gerstenhaber(&a).unwrap();
                    assert_eq!(ab, -&ba.scale(&sign(pa && pb)));
                    for (_, c) in homogeneous_parts(&c) {
                        let lhs = a.gerstenhaber(&b.gerstenhaber(&c).unwrap()).unwrap();
                        let r1 = ab.gerstenhaber(&c).unwrap();
                        let r2 = b.gerstenhaber(&a.gerstenhaber(&c).unwrap()).unwrap();
                        assert_eq!(lhs, &r1 + &r2.scale(&sign(pa && pb)));
                    }
                }
            }
        }
    }
}

#[test]
fn codifferential_squares_to_zero_and_keeps_normalization() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for n in [1, 2] {
        let m = model(n);
        let mu = mu(&m);
        for arity in 0..3 {
            let c = random_cochain(&m, arity, &mut rng);
            let d = c.codifferential(&mu).unwrap();
            assert!(d.codifferential(&mu).unwrap().is_zero());
            // vanishing on arguments in the scalar line R·I
            for slot in 0..arity + 1 {
                let mut args: Vec<MatrixSeries> = (0..arity + 1).map(|_| random_matrix(&m, &mut rng)).collect();
                args[slot] = MatrixSeries::scalar(&p(&m, "x1*th2 + 3"));
                assert!(d.evaluate(&args).unwrap().is_zero(), "∂ of a normalized cochain: {d}");
            }
        }
    }
}

#[test]
fn boundary_examples() {
    let m = model(1);
    let mu = mu(&m);
    let a0 = MatrixSeries::scalar(&p(&m, "x1*th1 + y2"));
    let a1 = MatrixSeries::scalar(&p(&m, "y1*th2"));
    assert!(Chain::from_tuple(std::slice::from_ref(&a0)).unwrap().boundary(&mu).unwrap().is_zero());
    let b = Chain::from_tuple(&[a0.clone(), a1.clone()]).unwrap().boundary(&mu).unwrap();
    // a0 a1 − (−1)^{|a0||a1|} a1 a0
    let comm = a0.bracket_with(&a1, &Pointwise);
    assert_eq!(b, Chain::from_element(&comm));
}

#[test]
fn boundary_matches_the_unsuspended_formula() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for n in [1, 2] {
        let m = model(n);
        let mu = mu(&m);
        for len in 1..=4 {
            let slots: Vec<MatrixSeries> = (0..len).map(|_| homogeneous_matrix(&m, &mut rng)).collect();
            let c = Chain::from_tuple(&slots).unwrap();
            assert_eq!(c.boundary(&mu).unwrap(), boundary_oracle(&slots), "degree {}", len - 1);
        }
    }
}

#[test]
fn boundary_squares_to_zero() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for n in [1, 2] {
        let m = model(n);
        let mu = mu(&m);
        for len in 2..=4 {
            let slots: Vec<MatrixSeries> = (0..len).map(|_| random_matrix(&m, &mut rng)).collect();
            let c = Chain::from_tuple(&slots).unwrap();
            assert!(c.boundary(&mu).unwrap().boundary(&mu).unwrap().is_zero());
        }
    }
}

#[test]
fn action_is_a_lie_module() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for n in [1, 2] {
        let m = model(n);
        for round in 0..4 {
            let a = random_cochain(&m, round % 3, &mut rng);
            let b = random_cochain(&m, 1 + round % 2, &mut rng);
            let slots: Vec<MatrixSeries> = (0..3).map(|_| random_matrix(&m, &mut rng)).collect();
            let c = Chain::from_tuple(&slots).unwrap();
            for (pa, a) in homogeneous_parts(&a) {
                for (pb, b) in homogeneous_parts(&b) {
                    let lhs = c.act(&a.gerstenhaber(&b).unwrap()).unwrap();
                    let ab = c.act(&b).unwrap().act(&a).unwrap();
                    let ba = c.act(&a).unwrap().act(&b).unwrap();
                    assert_eq!(lhs, &ab - &ba.scale(&sign(pa && pb)));
                }
            }
        }
    }
}

#[test]
fn boundary_commutes_with_the_action() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for n in [1, 2] {
        let m = model(n);
        let mu = mu(&m);
        for arity in 0..3 {
            let a = random_cochain(&m, arity, &mut rng);
            let slots: Vec<MatrixSeries> = (0..3).map(|_| random_matrix(&m, &mut rng)).collect();
            let c = Chain::from_tuple(&slots).unwrap();
            for (pa, a) in homogeneous_parts(&a) {
                let lhs = c.act(&a.codifferential(&mu).unwrap()).unwrap();
                let b_r = c.act(&a).unwrap().boundary(&mu).unwrap();
                let r_b = c.boundary(&mu).unwrap().act(&a).unwrap();
                assert_eq!(lhs, &b_r - &r_b.scale(&sign(pa)));
            }
        }
    }
}

#[test]
fn trace_examples_and_chain_map() {
    let m = model(2);
    let a = p(&m, "y1 + x1*th1");
    let b = p(&m, "y2");
    let c = Chain::from_tuple(&[MatrixSeries::unit(&a, 0, 1), MatrixSeries::unit(&b, 1, 0)]).unwrap();
    let scalar = |s: &FormalSeries| MatrixSeries::scalar_sized(s, 1);
    assert_eq!(c.trace(), Chain::from_tuple(&[scalar(&a), scalar(&b)]).unwrap());
    let killed = Chain::from_tuple(&[MatrixSeries::unit(&a, 0, 0), MatrixSeries::unit(&b, 1, 1)]).unwrap();
    assert!(killed.trace().is_zero());
    let x = random_matrix(&m, &mut ChaCha8Rng::seed_from_u64(1));
    assert_eq!(Chain::from_element(&x).trace(), Chain::from_element(&scalar(&x.trace())));

    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mu2 = mu(&m);
    let mu1 = Cochain::product(m, 1);
    for len in 1..=4 {
        let slots: Vec<MatrixSeries> = (0..len).map(|_| random_matrix(&m, &mut rng)).collect();
        let c = Chain::from_tuple(&slots).unwrap();
        assert_eq!(c.boundary(&mu2).unwrap().trace(), c.trace().boundary(&mu1).unwrap());
    }
}

#[test]
fn cotrace_examples_and_chain_map() {
    let m = model(2);
    let mu1 = Cochain::product(m, 1);
    let mu2 = mu(&m);
    assert_eq!(mu1.cotrace(2).unwrap(), mu2);
    let one = Cochain::element(&MatrixSeries::identity_sized(m, 1));
    assert_eq!(one.cotrace(2).unwrap(), Cochain::element(&MatrixSeries::identity(m)));

    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for arity in 0..3 {
        let c = random_cochain_sized(&m, 1, arity, &mut rng);
        let lhs = c.codifferential(&mu1).unwrap().cotrace(2).unwrap();
        let rhs = c.cotrace(2).unwrap().codifferential(&mu2).unwrap();
        assert_eq!(lhs, rhs);
    }
}

#[test]
fn normalization() {
    let m = model(1);
    let a0 = MatrixSeries::scalar(&p(&m, "x1 + y1"));
    let one = MatrixSeries::identity(m);
    let c = Chain::from_tuple(&[a0.clone(), one]).unwrap();
    assert!(c.normalize().is_zero());
    let mixed = Chain::from_tuple(&[a0.clone(), MatrixSeries::scalar(&p(&m, "2 + y1"))]).unwrap();
    let expect = Chain::from_tuple(&[a0.clone(), MatrixSeries::scalar(&p(&m, "y1"))]).unwrap();
    assert_eq!(mixed.normalize(), expect);
    assert_eq!(expect.normalize(), expect);

    // the quotient is preserved by the boundary, also for matrices
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for n in [1, 2] {
        let m = model(n);
        let mu = mu(&m);
        for _ in 0..4 {
            let mut slots: Vec<MatrixSeries> = (0..3).map(|_| random_matrix(&m, &mut rng)).collect();
            slots[1] = &slots[1] + &MatrixSeries::identity(m);
            let c = Chain::from_tuple(&slots).unwrap();
            let nc = c.normalize();
            assert_eq!(nc.normalize(), nc);
            assert_eq!(c.boundary(&mu).unwrap().normalize(), nc.boundary(&mu).unwrap().normalize());
            let a = random_cochain(&m, 1, &mut rng);
            assert_eq!(c.act(&a).unwrap().normalize(), nc.act(&a).unwrap().normalize());
        }
    }
}

#[test]
fn canonical_text_form() {
    let m = model(1);
    let c = Chain::from_tuple(&[
        MatrixSeries::scalar(&p(&m, "x1")),
        MatrixSeries::scalar(&p(&m, "y1*th1")),
        MatrixSeries::scalar(&p(&m, "2*y2")),
    ])
    .unwrap();
    assert_eq!(c.to_string(), "2*x1*th1 (x) y1 (x) y2");
}

/// Pure gauge `G⁻¹ D G` for `G = [[1, y1], [y2, 1 + y1 y2]]`; flat and fiber dependent.
fn fiber_gauge(fd: &algindex::fedosov::FedosovData, m: &ModelConfig) -> MatrixSeries {
    let g = MatrixSeries::from_rows(*m, vec![vec![p(m, "1"), p(m, "y1")], vec![p(m, "y2"), p(m, "1+y1*y2")]]).unwrap();
    let gi = MatrixSeries::from_rows(*m, vec![vec![p(m, "1+y1*y2"), p(m, "-y1")], vec![p(m, "-y2"), p(m, "1")]]).unwrap();
    gi.mul_with(&g.map(|e| fd.apply_d(e)), &Pointwise)
}

fn is_flat(fd: &algindex::fedosov::FedosovData, gamma: &MatrixSeries) -> bool {
    (&gamma.map(|e| fd.apply_d(e)) + &gamma.mul_with(gamma, &Pointwise)).is_zero()
}

#[test]
fn twisted_trace_is_a_chain_map() {
    use algindex::fedosov::{base_differential, FedosovData};
    let m = ModelConfig::plane(2, 5, 0).unwrap().with_matrix_size(2).unwrap();
    let fd = FedosovData::flat(m);
    let g = MatrixSeries::from_rows(m, vec![vec![p(&m, "1+x1*x2"), p(&m, "x1")], vec![p(&m, "x2"), p(&m, "1")]]).unwrap();
    let gi = MatrixSeries::from_rows(m, vec![vec![p(&m, "1"), p(&m, "-x1")], vec![p(&m, "-x2"), p(&m, "1+x1*x2")]]).unwrap();
    let base = gi.mul_with(&g.map(base_differential), &Pointwise);
    let c = Chain::from_tuple(&[
        MatrixSeries::unit(&p(&m, "x1*y1"), 0, 1),
        MatrixSeries::unit(&p(&m, "y2 + x2*y1"), 1, 0),
        MatrixSeries::unit(&p(&m, "y1"), 0, 0),
    ])
    .unwrap();
    let scalar_mu = Cochain::product(m, 1);
    for gamma in [fd.gamma_e(&base).unwrap(), fiber_gauge(&fd, &m)] {
        assert!(is_flat(&fd, &gamma));
        let twisted_d = |a: &MatrixSeries| &a.map(|e| fd.apply_d(e)) + &gamma.bracket_with(a, &Pointwise);
        let d = |a: &MatrixSeries| a.map(|e| fd.apply_d(e));
        let lhs = (&c.differential(twisted_d) + &c.boundary(&Cochain::product(m, 2)).unwrap()).trace_twisted(&gamma).unwrap();
        let t = c.trace_twisted(&gamma).unwrap();
        let rhs = &t.differential(d) + &t.boundary(&scalar_mu).unwrap();
        assert!((&lhs - &rhs).below_weight(4).is_zero());
    }
    // no twist: plain trace
    let zero = MatrixSeries::zero(m);
    assert_eq!(c.trace_twisted(&zero).unwrap(), c.trace());
}

#[test]
fn twisted_cotrace_is_a_chain_map() {
    use algindex::fedosov::FedosovData;
    let m = ModelConfig::plane(2, 9, 0).unwrap().with_matrix_size(2).unwrap();
    let fd = FedosovData::flat(m);
    let gamma = fiber_gauge(&fd, &m);
    assert!(is_flat(&fd, &gamma));
    let d1 = [1u8, 0, 0, 0];
    let d2 = [0u8, 1, 0, 0];
    let pc = &Cochain::scalar_operator(&p(&m, "x1*y2 + th1"), &[d1])
        + &Cochain::scalar_operator(&p(&m, "x2*th2*y1"), &[d2, d1]);
    let mu2 = Cochain::product(m, 2);
    let twist = mu2.gerstenhaber(&Cochain::element(&gamma)).unwrap();
    // coefficient derivative enters with the sign of the shifted grading
    let minus_d = |c: &Cochain| -&c.map_coefficients(|s| fd.apply_d(s));
    let lhs = (&minus_d(&pc) + &pc.codifferential(&Cochain::product(m, 1)).unwrap()).cotrace_twisted(&gamma).unwrap();
    let t = pc.cotrace_twisted(&gamma).unwrap();
    assert!(!twist.gerstenhaber(&t).unwrap().is_zero());
    let rhs = &(&minus_d(&t) + &t.codifferential(&mu2).unwrap()) + &twist.gerstenhaber(&t).unwrap();
    assert!((&lhs - &rhs).map_coefficients(|s| s.below_weight(6)).is_zero());
    assert_eq!(pc.cotrace_twisted(&MatrixSeries::zero(m)).unwrap(), pc.cotrace(2).unwrap());
}
