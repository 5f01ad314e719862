//! Acceptance suite: one line per criterion, non-zero exit if any fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use revivalkit::bivariate::*;
use revivalkit::combinatorics::{binomial, triangle_index, triangle_points};
use revivalkit::dynamics::{detect_fr, detect_pst, eigendecompose, evolve, TransferKind, DEFAULT_GRID};
use revivalkit::hamming::{krawtchouk_eigenvalue_check, projection_equivalence, verify_bose_mesner};
use revivalkit::ordered::*;
use revivalkit::orthopoly::*;
use revivalkit::spectral::*;

struct Outcome {
    ok: bool,
    detail: String,
}

fn fail(detail: impl Into<String>) -> Outcome {
    Outcome { ok: false, detail: detail.into() }
}

fn pass(detail: impl Into<String>) -> Outcome {
    Outcome { ok: true, detail: detail.into() }
}

fn triangle_pst_fr() -> Outcome {
    let report = match detect_2d_transfer(7, 1.0, 2.0, PI, 1e-9) {
        Ok(r) => r,
        Err(e) => return fail(e.to_string()),
    };
    let Some(pst) = report.first(EventKind::Pst) else { return fail("no PST event") };
    let Some(fr) = report.first(EventKind::Fr) else { return fail("no FR event") };
    if (pst.time - PI / 2.0).abs() > 1e-9 || pst.site != Some((7, 0)) {
        return fail(format!("PST at t={} site {:?}", pst.time, pst.site));
    }
    let f70 = pst.profile[triangle_index(7, 7, 0)].sqrt();
    if 1.0 - f70 > 1e-9 {
        return fail(format!("PST deficit {}", 1.0 - f70));
    }
    if (fr.time - PI / 4.0).abs() > 1e-9 {
        return fail(format!("FR at t={}", fr.time));
    }
    let mut leak = 0.0;
    let mut worst = 0.0f64;
    for (s, (k, l)) in triangle_points(7).into_iter().enumerate() {
        if l > 0 {
            leak += fr.profile[s];
        } else {
            worst = worst.max((fr.profile[s] - binomial(7, k as u64) as f64 / 128.0).abs());
        }
    }
    if leak > 1e-9 || worst > 1e-9 {
        return fail(format!("FR leakage {leak:.2e}, profile error {worst:.2e}"));
    }
    pass(format!("PST t=π/2 deficit {:.1e}; FR t=π/4 leakage {leak:.1e}, profile error {worst:.1e}", 1.0 - f70))
}

fn krawtchouk_pst() -> Outcome {
    let mut worst = 0.0f64;
    let mut min_leak = f64::INFINITY;
    for n in 2..=10 {
        let c = krawtchouk_chain(n, 1.0).unwrap();
        let a = evolve(&c, PI, 0).unwrap();
        worst = worst.max(1.0 - a[n].norm());
        let r = detect_fr(&c, PI / 2.0, 1e-9).unwrap();
        if r.kind != TransferKind::None {
            return fail(format!("N={n}: half-time classified {:?}", r.kind));
        }
        min_leak = min_leak.min(r.leakage);
    }
    if worst > 1e-9 || min_leak <= 0.1 {
        return fail(format!("deficit {worst:.2e}, min leakage at π/2 {min_leak:.3}"));
    }
    pass(format!("max deficit {worst:.1e}, min leakage at π/2 {min_leak:.3}"))
}

fn para_fr() -> Outcome {
    let c = para_krawtchouk_chain(&ParaKrawtchoukParams::new(3, 1.0, 1.0 / 3.0).unwrap()).unwrap();
    let r = detect_fr(&c, PI, 1e-9).unwrap();
    let mu = r.endpoint_amplitudes.0.norm();
    if (mu - (PI / 6.0).cos()).abs() > 1e-8 || r.leakage > 1e-9 || r.kind != TransferKind::Fr {
        return fail(format!("|μ|={mu}, leakage {:.2e}, kind {:?}", r.leakage, r.kind));
    }
    let p = detect_pst(&c, 6.0 * PI + 0.1, DEFAULT_GRID, 1e-9).unwrap();
    let multiple = p.time / PI;
    if p.kind != TransferKind::Pst || (multiple - multiple.round()).abs() > 1e-8 || multiple > 6.0 + 1e-8 {
        return fail(format!("PST scan: {:?} at t/π = {multiple}", p.kind));
    }
    pass(format!("|μ(π)|={mu:.10}, leakage {:.1e}; PST at {:.0}π", r.leakage, multiple.round()))
}

fn round_trip() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let n = rng.gen_range(1..=20);
        let jh: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..2.0)).collect();
        let bh: Vec<f64> = (0..=n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let couplings: Vec<f64> = (0..n).map(|k| jh[k.min(n - 1 - k)]).collect();
        let fields: Vec<f64> = (0..=n).map(|k| bh[k.min(n - k)]).collect();
        let c = RecurrenceCoefficients::new(couplings, fields).unwrap();
        let spec = Spectrum::new(eigendecompose(&c).values).unwrap();
        let r = match reconstruct_jacobi(&spec) {
            Ok(r) => r,
            Err(e) => return fail(format!("N={n}: {e}")),
        };
        for (a, b) in r.couplings().iter().zip(c.couplings()).chain(r.fields().iter().zip(c.fields())) {
            worst = worst.max((a - b).abs());
        }
    }
    let mut worst_para = 0.0f64;
    for n in (1..=15).step_by(2) {
        for delta in [0.2, 1.0 / 3.0, 0.8] {
            let r = reconstruct_jacobi(&bilattice_spectrum(n, 1.0, delta).unwrap()).unwrap();
            let c = para_krawtchouk_chain(&ParaKrawtchoukParams::new(n, 1.0, delta).unwrap()).unwrap();
            for (a, b) in r.couplings().iter().zip(c.couplings()).chain(r.fields().iter().zip(c.fields())) {
                worst_para = worst_para.max((a - b).abs());
            }
        }
    }
    if worst > 1e-7 || worst_para > 1e-8 {
        return fail(format!("round trip {worst:.2e}, bilattice {worst_para:.2e}"));
    }
    pass(format!("round trip max error {worst:.1e}, bilattice vs closed form {worst_para:.1e}"))
}

fn hamming() -> Outcome {
    for n in 1..=8 {
        let r = verify_bose_mesner(n).unwrap();
        if !r.passed {
            return fail(format!("Bose-Mesner N={n}: {}", r.max_deviation));
        }
    }
    let mut eig = 0.0f64;
    for n in 1..=10 {
        eig = eig.max(krawtchouk_eigenvalue_check(n).unwrap().max_deviation);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut proj = 0.0f64;
    for n in 1..=12 {
        for _ in 0..10 {
            let t = rng.gen_range(0.0..2.0 * PI);
            let r = projection_equivalence(n, t).unwrap();
            proj = proj.max(r.max_deviation).max(r.off_column_norm);
        }
    }
    if eig >= 1e-8 || proj >= 1e-9 {
        return fail(format!("eigenvalue residual {eig:.2e}, projection {proj:.2e}"));
    }
    pass(format!("Bose-Mesner exact N≤8; eigenvalue residual {eig:.1e}; projection {proj:.1e}"))
}

fn ordered_scheme() -> Outcome {
    for n in 1..=4 {
        let r = verify_ordered_bose_mesner(n).unwrap();
        if !r.passed {
            return fail(format!("Bose-Mesner N={n}: {}", r.max_deviation));
        }
    }
    for n in 1..=6 {
        let mut counts = vec![0u64; (n + 1) * (n + 2) / 2];
        for x in 0..1usize << (2 * n) {
            let s = shape_of(OrderedWord(x));
            counts[triangle_index(n, s.e1, s.e2)] += 1;
        }
        for (i, j) in triangle_points(n) {
            if counts[triangle_index(n, i, j)] != column_cardinality(n, i, j).unwrap() {
                return fail(format!("cardinality N={n} ({i},{j})"));
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    for n in 1..=7 {
        for _ in 0..5 {
            let (a, b) = (rng.gen_range(0.5..2.0), rng.gen_range(0.5..2.0));
            let t = rng.gen_range(0.0..2.0 * PI);
            let r = project_ordered_walk(n, a, b, t).unwrap();
            worst = worst.max(r.max_deviation).max(r.off_column_norm);
        }
    }
    if worst >= 1e-8 {
        return fail(format!("walk projection {worst:.2e}"));
    }
    pass(format!("Bose-Mesner exact N≤4; cardinalities N≤6; walk projection {worst:.1e}"))
}

fn bivariate() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut agree = 0.0f64;
    for n in 1..=10 {
        let mut cases = vec![(0.5, 0.25)];
        let p: f64 = rng.gen_range(0.1..0.8);
        cases.push((p, (1.0 - p) * rng.gen_range(0.1..0.9)));
        for (p, q) in cases {
            let params = TratnikParams::new(n, p, q).unwrap();
            let g = GriffithsParams::tratnik(p, q).unwrap();
            for idx in triangle_points(n) {
                for (x, y) in triangle_points(n) {
                    let pt = (x as f64, y as f64);
                    let a = tratnik_eval(&params, idx, pt).unwrap();
                    let b = griffiths_eval(&g, n, idx, pt).unwrap();
                    agree = agree.max((a - b).abs() / a.abs().max(1.0));
                }
            }
        }
    }
    let mut gram = 0.0f64;
    for n in 1..=10 {
        let params = TratnikParams::scheme(n).unwrap();
        let pts = triangle_points(n);
        let table: Vec<Vec<f64>> = pts
            .iter()
            .map(|&(x, y)| {
                let w = trinomial_weight(&params, x, y).unwrap().sqrt();
                pts.iter().map(|&idx| w * orthonormal_eval(n, idx, (x as f64, y as f64)).unwrap()).collect()
            })
            .collect();
        for a in 0..pts.len() {
            for b in 0..pts.len() {
                let dot: f64 = table.iter().map(|row| row[a] * row[b]).sum();
                gram = gram.max((dot - if a == b { 1.0 } else { 0.0 }).abs());
            }
        }
    }
    let mut seven = 0.0f64;
    for _ in 0..20 {
        let r = Rotation3::random(&mut rng);
        seven = seven.max(verify_seven_term(&r, 8).unwrap().max_residual);
    }
    let mut generating = 0.0f64;
    for _ in 0..50 {
        let n = rng.gen_range(1..=8);
        let (s, t) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let params = TratnikParams::scheme(n).unwrap();
        for idx in triangle_points(n) {
            generating = generating.max(generating_function_check(&params, idx, s, t).unwrap().relative_residual);
        }
    }
    if agree > 1e-10 || gram > 1e-9 || seven >= 1e-8 || generating >= 1e-9 {
        return fail(format!(
            "Tratnik/Griffiths {agree:.2e}, Gram {gram:.2e}, 7-term {seven:.2e}, generating {generating:.2e}"
        ));
    }
    pass(format!("Tratnik/Griffiths {agree:.1e}, Gram {gram:.1e}, 7-term {seven:.1e}, generating {generating:.1e}"))
}

fn closed_form() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let (a, b, t) = (rng.gen_range(0.1..3.0), rng.gen_range(0.1..3.0), rng.gen_range(0.0..10.0));
        let amps = triangle_hamiltonian(10, a, b).unwrap().evolve_from_apex(t);
        for (s, (k, l)) in triangle_points(10).into_iter().enumerate() {
            worst = worst.max((amps[s] - closed_form_amplitude(10, a, b, t, k, l).unwrap()).norm());
        }
    }
    if worst > 1e-9 {
        return fail(format!("max deviation {worst:.2e}"));
    }
    pass(format!("max deviation {worst:.1e}"))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome, Duration); 8] = [
        ("1 triangle PST/FR at N=7, α=1, β=2", triangle_pst_fr, Duration::from_secs(5)),
        ("2 Krawtchouk chain PST", krawtchouk_pst, Duration::from_secs(1)),
        ("3 para-Krawtchouk FR", para_fr, Duration::from_secs(1)),
        ("4 inverse-problem round trip", round_trip, Duration::from_secs(10)),
        ("5 Hamming scheme identities", hamming, Duration::from_secs(30)),
        ("6 ordered scheme identities", ordered_scheme, Duration::from_secs(60)),
        ("7 bivariate polynomial suite", bivariate, Duration::from_secs(30)),
        ("8 closed form vs dynamics", closed_form, Duration::from_secs(5)),
    ];
    let mut all = true;
    for (name, run, limit) in criteria {
        let start = Instant::now();
        let out = run();
        let took = start.elapsed();
        let ok = out.ok && took < limit;
        all &= ok;
        println!(
            "criterion {name}: {} ({}; {:.2}s of {}s)",
            if ok { "PASS" } else { "FAIL" },
            out.detail,
            took.as_secs_f64(),
            limit.as_secs()
        );
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
