use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use revivalkit::bivariate::*;
use revivalkit::combinatorics::{binomial, multinomial, triangle_points};
use revivalkit::dynamics::{eigendecompose, evolve};
use revivalkit::linalg::{expm, C64};
use revivalkit::ordered::*;
use revivalkit::orthopoly::*;
use revivalkit::spectral::*;

/// Coefficient of t^n in (1 - (1-p)/p t)^x (1 + t)^(N-x), divided by C(N, n).
fn krawtchouk_by_generating_function(n: usize, x: usize, cap: usize, p: f64) -> f64 {
    let mut poly = vec![1.0];
    let mut times = |a: f64| {
        let mut next = vec![0.0; poly.len() + 1];
        for (k, c) in poly.iter().enumerate() {
            next[k] += c;
            next[k + 1] += a * c;
        }
        poly = next;
    };
    for _ in 0..x {
        times(-(1.0 - p) / p);
    }
    for _ in 0..(cap - x) {
        times(1.0);
    }
    poly[n] / binomial(cap as u64, n as u64) as f64
}

fn dense_evolution(coeffs: &RecurrenceCoefficients, t: f64) -> DMatrix<C64> {
    let h = coeffs.jacobi_matrix().map(|v| C64::new(0.0, -t * v));
    expm(&h)
}

fn persymmetric_chain() -> impl Strategy<Value = RecurrenceCoefficients> {
    (1usize..=14).prop_flat_map(|n| {
        (prop::collection::vec(0.1f64..2.0, n.div_ceil(2)), prop::collection::vec(-1.0f64..1.0, (n + 2) / 2))
            .prop_map(move |(jh, bh)| {
                let couplings = (0..n).map(|k| jh[k.min(n - 1 - k)]).collect();
                let fields = (0..=n).map(|k| bh[k.min(n - k)]).collect();
                RecurrenceCoefficients::new(couplings, fields).unwrap()
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn krawtchouk_matches_generating_function(cap in 1usize..=14, p in 0.05f64..0.95, seed in any::<u64>()) {
        let params = KrawtchoukParams::new(cap, p).unwrap();
        let n = (seed as usize) % (cap + 1);
        let x = (seed as usize / 31) % (cap + 1);
        let got = krawtchouk_eval(n, x as f64, &params).unwrap();
        let want = krawtchouk_by_generating_function(n, x, cap, p);
        prop_assert!((got - want).abs() <= 1e-9 * want.abs().max(1.0), "{got} vs {want}");
    }

    #[test]
    fn krawtchouk_self_dual_at_half(cap in 1usize..=20) {
        let params = KrawtchoukParams::new(cap, 0.5).unwrap();
        for n in 0..=cap {
            for x in 0..=cap {
                let a = krawtchouk_eval(n, x as f64, &params).unwrap();
                let b = krawtchouk_eval(x, n as f64, &params).unwrap();
                prop_assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn chain_polynomials_are_orthonormal(n in 1usize..=16, beta in 0.2f64..3.0) {
        let c = krawtchouk_chain(n, beta).unwrap();
        let es = eigendecompose(&c);
        let w = es.weights();
        let chis: Vec<Vec<f64>> = es.values.iter().map(|&x| evaluate_chi(&c, x)).collect();
        for a in 0..=n {
            for b in 0..=n {
                let dot: f64 = (0..=n).map(|s| w[s] * chis[s][a] * chis[s][b]).sum();
                let want = if a == b { 1.0 } else { 0.0 };
                prop_assert!((dot - want).abs() < 1e-10, "({a},{b}) {dot}");
            }
        }
    }

    #[test]
    fn para_chain_is_mirror_symmetric(half in 0usize..16, beta in 0.2f64..3.0, delta in 0.01f64..1.99) {
        let n = 2 * half + 1;
        let c = para_krawtchouk_chain(&ParaKrawtchoukParams::new(n, beta, delta).unwrap()).unwrap();
        let j = c.couplings();
        for k in 0..n {
            prop_assert_eq!(j[k], j[n - 1 - k]);
        }
    }

    #[test]
    fn evolution_matches_dense_exponential(c in persymmetric_chain(), t in 0.0f64..8.0) {
        let u = dense_evolution(&c, t);
        for source in [0, c.n_sites() - 1] {
            let a = evolve(&c, t, source).unwrap();
            let norm: f64 = a.iter().map(|z| z.norm_sqr()).sum();
            prop_assert!((norm - 1.0).abs() < 1e-12);
            for (k, z) in a.iter().enumerate() {
                prop_assert!((z - u[(k, source)]).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn persymmetric_round_trip(c in persymmetric_chain()) {
        let spec = Spectrum::new(eigendecompose(&c).values).unwrap();
        let r = reconstruct_jacobi(&spec).unwrap();
        prop_assert!(mirror_symmetric(&r, 1e-8));
        for (a, b) in r.couplings().iter().zip(c.couplings()) {
            prop_assert!((a - b).abs() < 1e-7, "{a} vs {b}");
        }
        for (a, b) in r.fields().iter().zip(c.fields()) {
            prop_assert!((a - b).abs() < 1e-7, "{a} vs {b}");
        }
    }

    #[test]
    fn reconstructed_chain_has_pst_signs(c in persymmetric_chain()) {
        let es = eigendecompose(&c);
        let n = c.degree();
        for (x, sign) in es.values.iter().zip(pst_signs(n)) {
            let last = *evaluate_chi(&c, *x).last().unwrap();
            prop_assert!((last - f64::from(sign)).abs() < 1e-6, "{last} vs {sign}");
        }
    }

    #[test]
    fn fr_certificate_predicts_endpoint_amplitudes(half in 0usize..8, delta in 0.05f64..1.95, beta in 0.5f64..2.0) {
        // the bilattice revives at T = 2π/β with θ = -πδ/2
        let n = 2 * half + 1;
        let t = 2.0 * std::f64::consts::PI / beta;
        let spec = bilattice_spectrum(n, beta, delta).unwrap();
        let FrCheck::Accepted(cert) = check_fr_condition(&spec, t).unwrap() else {
            return Err(TestCaseError::fail("bilattice revival rejected"));
        };
        prop_assert!((cert.mu.norm_sqr() + cert.nu.norm_sqr() - 1.0).abs() < 1e-12);
        let chain = reconstruct_jacobi(&spec).unwrap();
        let a = evolve(&chain, t, 0).unwrap();
        prop_assert!((a[0] - cert.mu).norm() < 1e-8, "{} vs {}", a[0], cert.mu);
        prop_assert!((a[n] - cert.nu).norm() < 1e-8, "{} vs {}", a[n], cert.nu);
    }

    #[test]
    fn trinomial_weights_sum_to_one(n in 1usize..=20, p in 0.01f64..0.98, frac in 0.01f64..0.99) {
        let q = (1.0 - p) * frac;
        let params = TratnikParams::new(n, p, q).unwrap();
        let total: f64 = triangle_points(n).into_iter().map(|(x, y)| trinomial_weight(&params, x, y).unwrap()).sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tratnik_equals_griffiths_specialization(n in 1usize..=7, p in 0.1f64..0.8, frac in 0.1f64..0.9) {
        let q = (1.0 - p) * frac;
        let params = TratnikParams::new(n, p, q).unwrap();
        let g = GriffithsParams::tratnik(p, q).unwrap();
        for idx in triangle_points(n) {
            for (x, y) in triangle_points(n) {
                let pt = (x as f64, y as f64);
                let a = tratnik_eval(&params, idx, pt).unwrap();
                let b = griffiths_eval(&g, n, idx, pt).unwrap();
                prop_assert!((a - b).abs() < 1e-9 * a.abs().max(1.0), "{idx:?} {pt:?}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn tratnik_recurrences_hold(n in 1usize..=10, p in 0.1f64..0.8, frac in 0.1f64..0.9) {
        let params = TratnikParams::new(n, p, (1.0 - p) * frac).unwrap();
        let r = tratnik_recurrence_residual(&params).unwrap();
        prop_assert!(r.passed, "{r:?}");
    }

    #[test]
    fn hermitian_tratnik_is_orthonormal_for_any_weights(n in 1usize..=6, p in 0.1f64..0.8, frac in 0.1f64..0.9) {
        let params = TratnikParams::new(n, p, (1.0 - p) * frac).unwrap();
        let pts = triangle_points(n);
        for &a in &pts {
            for &b in &pts {
                let dot: f64 = pts
                    .iter()
                    .map(|&(x, y)| {
                        let pt = (x as f64, y as f64);
                        trinomial_weight(&params, x, y).unwrap()
                            * hermitian_tratnik(&params, a, pt).unwrap()
                            * hermitian_tratnik(&params, b, pt).unwrap()
                    })
                    .sum();
                let want = if a == b { 1.0 } else { 0.0 };
                prop_assert!((dot - want).abs() < 1e-9, "{a:?} {b:?} {dot}");
            }
        }
    }

    #[test]
    fn so3_weights_are_normalized(seed in any::<u64>(), n in 1usize..=12) {
        let r = Rotation3::random(&mut ChaCha8Rng::seed_from_u64(seed));
        let total: f64 = triangle_points(n).into_iter().map(|pt| so3_weight(&r, n, pt).unwrap().powi(2)).sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rotation_polynomials_are_orthonormal(seed in any::<u64>(), n in 1usize..=5) {
        let r = Rotation3::random(&mut ChaCha8Rng::seed_from_u64(seed));
        // the Griffiths series loses digits as R_33 -> 0; keep to rotations where it is well conditioned
        prop_assume!(r.m[2][2].abs() > 0.2);
        let g = GriffithsParams::from_rotation(&r).unwrap();
        let pts = triangle_points(n);
        let table: Vec<Vec<f64>> = pts
            .iter()
            .map(|&pt| pts.iter().map(|&idx| rotation_polynomial(&r, &g, n, idx, pt).unwrap()).collect())
            .collect();
        for a in 0..pts.len() {
            for b in 0..pts.len() {
                let dot: f64 = pts
                    .iter()
                    .enumerate()
                    .map(|(k, &pt)| so3_weight(&r, n, pt).unwrap().powi(2) * table[k][a] * table[k][b])
                    .sum();
                let want = if a == b { 1.0 } else { 0.0 };
                prop_assert!((dot - want).abs() < 1e-8, "{dot}");
            }
        }
    }

    #[test]
    fn seven_term_for_random_rotations(seed in any::<u64>()) {
        let r = Rotation3::random(&mut ChaCha8Rng::seed_from_u64(seed));
        let rep = verify_seven_term(&r, 6).unwrap();
        prop_assert!(rep.passed, "{rep:?}");
        if r.m[2][2].abs() > 0.2 {
            prop_assert!(rep.griffiths_deviation < 1e-10, "{rep:?}");
        }
    }

    #[test]
    fn generating_function_random_points(n in 1usize..=8, s in -1.0f64..1.0, t in -1.0f64..1.0, pick in any::<usize>()) {
        let params = TratnikParams::scheme(n).unwrap();
        let pts = triangle_points(n);
        let idx = pts[pick % pts.len()];
        let rep = generating_function_check(&params, idx, s, t).unwrap();
        prop_assert!(rep.passed, "{rep:?}");
    }

    #[test]
    fn hermitian_relation_matches_spectrum(n in 1usize..=8, alpha in -2.0f64..2.0, beta in -2.0f64..2.0) {
        let rep = hermitian_relation_residual(n, alpha, beta).unwrap();
        prop_assert!(rep.passed, "{rep:?}");
    }

    #[test]
    fn shape_counts_partition_the_space(n in 1usize..=6) {
        let mut total = 0u64;
        for (i, j) in triangle_points(n) {
            let k = column_cardinality(n, i, j).unwrap();
            prop_assert_eq!(k, multinomial(n as u64, i as u64, j as u64) << j);
            total += k;
        }
        prop_assert_eq!(total, 1u64 << (2 * n));
    }

    #[test]
    fn relations_are_symmetric(n in 1usize..=8, x in any::<usize>(), y in any::<usize>()) {
        let mask = (1usize << (2 * n)) - 1;
        let (x, y) = (OrderedWord(x & mask), OrderedWord(y & mask));
        let e = shape_of(OrderedWord(x.0 ^ y.0));
        prop_assert!(related_under(x, y, e));
        prop_assert!(related_under(y, x, e));
    }

    #[test]
    fn closed_form_is_unitary_and_matches_lattice(n in 1usize..=10, alpha in 0.1f64..3.0, beta in 0.1f64..3.0, t in 0.0f64..10.0) {
        let amps = triangle_hamiltonian(n, alpha, beta).unwrap().evolve_from_apex(t);
        let mut norm = 0.0;
        for (s, (k, l)) in triangle_points(n).into_iter().enumerate() {
            let f = closed_form_amplitude(n, alpha, beta, t, k, l).unwrap();
            norm += f.norm_sqr();
            prop_assert!((f - amps[s]).norm() < 1e-9);
        }
        prop_assert!((norm - 1.0).abs() < 1e-10);
    }

    #[test]
    fn triangle_spectrum_and_modes(n in 1usize..=8, alpha in 0.1f64..3.0, beta in 0.1f64..3.0) {
        let rep = spectral_check(&triangle_hamiltonian(n, alpha, beta).unwrap()).unwrap();
        prop_assert!(rep.passed, "{rep:?}");
    }
}

#[test]
fn orthonormal_gram_at_scheme_weights() {
    for n in 1..=6 {
        let params = TratnikParams::scheme(n).unwrap();
        let pts = triangle_points(n);
        for &a in &pts {
            for &b in &pts {
                let dot: f64 = pts
                    .iter()
                    .map(|&(x, y)| {
                        let pt = (x as f64, y as f64);
                        trinomial_weight(&params, x, y).unwrap()
                            * orthonormal_eval(n, a, pt).unwrap()
                            * orthonormal_eval(n, b, pt).unwrap()
                    })
                    .sum();
                let want = if a == b { 1.0 } else { 0.0 };
                assert!((dot - want).abs() < 1e-10, "N={n} {a:?} {b:?}: {dot}");
            }
        }
    }
}

#[test]
fn product_rotation_with_scheme_weights() {
    // R_13^2 = 1/2 and R_23^2 = 1/4: sin φ = -1/√2, sin θ cos φ = 1/2
    let phi = -std::f64::consts::FRAC_PI_4;
    let theta = std::f64::consts::FRAC_PI_4;
    let r = Rotation3::yz_xz(theta, phi);
    assert!((r.m[0][2].powi(2) - 0.5).abs() < 1e-15);
    assert!((r.m[1][2].powi(2) - 0.25).abs() < 1e-15);
    for n in 1..=8 {
        let rep = verify_seven_term(&r, n).unwrap();
        assert!(rep.passed, "{rep:?}");
    }
}
