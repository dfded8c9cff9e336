use algindex::fedosov::{spanning_monomials, ConnectionData, FedosovData};
use algindex::weyl::rational::{factorial, int};
use algindex::weyl::sample::{random_series, Shape};
use algindex::weyl::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn plane(w: u32) -> ModelConfig {
    ModelConfig::plane(2, w, 1).unwrap()
}

fn p(m: &ModelConfig, s: &str) -> FormalSeries {
    parse_series(m, s).unwrap()
}

fn christoffel(m: &ModelConfig, entries: &[((usize, usize, usize), &str)]) -> ConnectionData {
    let d = m.dim;
    let mut g = vec![vec![vec![FormalSeries::zero(*m); d]; d]; d];
    for &((k, i, j), s) in entries {
        g[k][i][j] = p(m, s);
        g[k][j][i] = p(m, s);
    }
    ConnectionData::new(*m, g).unwrap()
}

/// `f(x + y)` by binomial expansion, truncated at fiber degree `w`.
fn taylor_shift(f: &FormalSeries, w: u32) -> FormalSeries {
    let m = *f.model();
    let mut out = FormalSeries::zero(m);
    for (mono, c) in f.iter() {
        let a = mono.base;
        let mut parts: Vec<(Monomial, Rational)> = vec![(Monomial { base: [0; 4], ..*mono }, c.clone())];
        for i in 0..m.dim {
            let mut next = Vec::new();
            for (pm, pc) in &parts {
                for k in 0..=a[i] {
                    let mut q = *pm;
                    q.base[i] += a[i] - k;
                    q.fiber[i] += k as u8;
                    let binom = factorial(a[i] as u32) / (factorial(k as u32) * factorial((a[i] - k) as u32));
                    next.push((q, pc * binom));
                }
            }
            parts = next;
        }
        for (q, v) in parts {
            if q.fiber_degree() <= w {
                out.add_term(q, v);
            }
        }
    }
    out
}

#[test]
fn flat_connection_gives_zero_a() {
    let m = plane(4);
    let fd = FedosovData::build_a(ConnectionData::flat(m)).unwrap();
    assert!(fd.a_field().iter().all(|a| a.is_zero()));
}

#[test]
fn apply_d_examples() {
    let m = plane(4);
    let fd = FedosovData::flat(m);
    assert_eq!(fd.apply_d(&p(&m, "y1")), p(&m, "-th1"));
    assert!(fd.apply_d(&p(&m, "x1 + y1")).is_zero());
    assert!(fd.apply_d(&p(&m, "1")).is_zero());
}

fn assert_d_squared_zero(fd: &FedosovData) {
    let m = *fd.model();
    for r in fd.d_squared_generators() {
        assert!(r.is_zero(), "D^2 y = {r}");
    }
    let bases = [Monomial::one(), Monomial::base_var(0, 1), Monomial::base_var(1, 2)];
    for mono in spanning_monomials(&m, 3, &bases) {
        let a = FormalSeries::term(m, mono, int(1));
        let r = fd.d_squared(&a);
        assert!(r.is_zero(), "D^2({a}) = {r}");
    }
}

#[test]
fn curved_connection_is_flattened() {
    let m = plane(4);
    // a one-variable coefficient on a single direction has zero curvature
    let fd = FedosovData::build_a(christoffel(&m, &[((0, 0, 0), "x1")])).unwrap();
    assert_d_squared_zero(&fd);
    let fd = FedosovData::build_a(christoffel(&m, &[((0, 0, 0), "x2")])).unwrap();
    assert!(fd.a_field().iter().any(|a| !a.is_zero()));
    for a in fd.a_field() {
        for (mono, _) in a.iter() {
            assert_eq!(mono.form_degree(), 1);
            assert!(mono.fiber_degree() >= 2);
        }
        assert!(delta_inv(a).is_zero());
    }
    assert_d_squared_zero(&fd);
}

#[test]
fn random_quadratic_connections_are_flattened() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let m = plane(5);
    let gens = ["1", "x1", "x2", "x1^2", "x1*x2", "x2^2"];
    for _ in 0..6 {
        let mut entries = Vec::new();
        for k in 0..2 {
            for (i, j) in [(0, 0), (0, 1), (1, 1)] {
                if rng.gen_bool(0.6) {
                    let g = gens[rng.gen_range(0..gens.len())];
                    let c: i64 = rng.gen_range(-2..=2);
                    entries.push(((k, i, j), format!("{c}*{g}")));
                }
            }
        }
        let refs: Vec<_> = entries.iter().map(|(k, s)| (*k, s.as_str())).collect();
        let fd = FedosovData::build_a(christoffel(&m, &refs)).unwrap();
        assert_d_squared_zero(&fd);
    }
}

#[test]
fn torsion_and_torus_curvature_rejected() {
    let m = plane(4);
    let mut g = vec![vec![vec![FormalSeries::zero(m); 2]; 2]; 2];
    g[0][0][1] = p(&m, "x1");
    assert!(ConnectionData::new(m, g).is_err());
    let t = ModelConfig::torus(2, 4, 1).unwrap();
    let mut g = vec![vec![vec![FormalSeries::zero(t); 2]; 2]; 2];
    g[0][0][0] = parse_series(&t, "u1").unwrap();
    assert!(matches!(ConnectionData::new(t, g), Err(algindex::Error::Unsupported(_))));
}

#[test]
fn flat_lift_examples() {
    let m = plane(4);
    let fd = FedosovData::flat(m);
    assert_eq!(fd.flat_lift(&p(&m, "x1")).unwrap(), p(&m, "x1 + y1"));
    assert_eq!(fd.flat_lift(&p(&m, "1")).unwrap(), p(&m, "1"));
    assert!(fd.flat_lift(&FormalSeries::zero(m)).unwrap().is_zero());
    assert!(fd.flat_lift(&p(&m, "y1")).is_err());

    let t = ModelConfig::torus(2, 4, 1).unwrap();
    let ft = FedosovData::flat(t);
    let expected = (0..=4u32).fold(FormalSeries::zero(t), |acc, n| {
        let mut mono = Monomial::base_var(0, 1);
        mono.fiber[0] = n as u8;
        &acc + &FormalSeries::term(t, mono, int(1) / factorial(n))
    });
    assert_eq!(ft.flat_lift(&parse_series(&t, "u1").unwrap()).unwrap(), expected);
}

#[test]
fn flat_lift_is_taylor_shift_and_flat() {
    let m = plane(5);
    let fd = FedosovData::flat(m);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..100 {
        let f = random_series(&m, &Shape::base(4), &mut rng);
        let a = fd.flat_lift(&f).unwrap();
        assert_eq!(chi(&a), f);
        assert!(fd.flatness_residual(&a).is_zero());
        assert_eq!(a, taylor_shift(&f, 5));
    }
}

#[test]
fn curved_flat_lift_is_flat() {
    let m = plane(5);
    let fd = FedosovData::build_a(christoffel(&m, &[((0, 0, 0), "x1"), ((1, 0, 1), "x2")])).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let f = random_series(&m, &Shape::base(3), &mut rng);
        let a = fd.flat_lift(&f).unwrap();
        assert_eq!(chi(&a), f);
        assert!(fd.flatness_residual(&a).is_zero());
    }
}

#[test]
fn d_is_a_graded_derivation() {
    let m = plane(5);
    let fd = FedosovData::build_a(christoffel(&m, &[((0, 0, 1), "x2")])).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..30 {
        let a = random_series(&m, &Shape::full(4), &mut rng).form_part(1);
        let b = random_series(&m, &Shape::full(4), &mut rng);
        let lhs = fd.apply_d(&(&a * &b));
        let rhs = &(&fd.apply_d(&a) * &b) - &(&a * &fd.apply_d(&b));
        assert_eq!(lhs.below_weight(5), rhs.below_weight(5));
    }
}

#[test]
fn bundle_twist_squares_to_zero() {
    let m = ModelConfig::plane(2, 4, 1).unwrap().with_matrix_size(2).unwrap();
    let fd = FedosovData::flat(m);
    let gamma_base = MatrixSeries::unit(&p(&m, "x2*th1"), 0, 1);
    let twisted = fd.with_bundle_connection(&gamma_base).unwrap();
    let g = twisted.gamma().unwrap();
    assert!(!g.is_zero());
    for i in 0..2 {
        for j in 0..2 {
            for mono in spanning_monomials(&m, 2, &[Monomial::one(), Monomial::base_var(1, 1)]) {
                let a = MatrixSeries::unit(&FormalSeries::term(m, mono, int(1)), i, j);
                assert!(twisted.d_squared_matrix(&a).is_zero());
            }
        }
    }
    assert!(fd.gamma_e(&MatrixSeries::zero(m)).unwrap().is_zero());
}

#[test]
fn scalar_bundle_twist_is_linear() {
    let m = ModelConfig::plane(2, 4, 1).unwrap();
    let fd = FedosovData::flat(m);
    let gamma_base = MatrixSeries::scalar(&p(&m, "x1*x2*th1 + x1*th2"));
    let twisted = fd.with_bundle_connection(&gamma_base).unwrap();
    let g = twisted.gamma().unwrap();
    assert!(g.mul_with(g, &Pointwise).is_zero());
    for mono in spanning_monomials(&m, 2, &[Monomial::one()]) {
        let a = MatrixSeries::scalar(&FormalSeries::term(m, mono, int(1)));
        assert!(twisted.d_squared_matrix(&a).is_zero());
    }
}

#[test]
fn solver_examples() {
    let m = plane(5);
    let fd = FedosovData::flat(m);
    assert!(fd.solve_d(&FormalSeries::zero(m)).unwrap().is_zero());
    let target = fd.apply_d(&p(&m, "y1*y2"));
    let s = fd.solve_d(&target).unwrap();
    assert!((&fd.apply_d(&s) - &target).below_weight(5).is_zero());
    assert!(fd.solve_d(&p(&m, "x1")).is_err());
    assert!(fd.solve_d(&p(&m, "x2*th1")).is_err());
}

#[test]
fn twisted_solver_on_exact_inputs() {
    let m = ModelConfig::plane(2, 4, 1).unwrap().with_matrix_size(2).unwrap();
    let fd = FedosovData::flat(m)
        .with_bundle_connection(&MatrixSeries::unit(&p(&m, "x2*th1"), 0, 1))
        .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..10 {
        let mut sec = MatrixSeries::zero(m);
        for i in 0..2 {
            for j in 0..2 {
                sec.set(i, j, random_series(&m, &Shape::full(3), &mut rng).form_part(0));
            }
        }
        let target = fd.apply_d_matrix(&sec);
        let s = fd.solve_de(&target).unwrap();
        assert!(fd.solve_residual(&s, &target).is_zero());
    }
}
