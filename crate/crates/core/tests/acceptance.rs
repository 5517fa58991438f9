//! Acceptance suite. Runs without the libtest harness so every criterion
//! prints a PASS/FAIL line; exits nonzero if any fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use gkpsim_core::circuit::{circuit_to_symplectic, parse_circuit, random_circuit, track_measurement_operator, track_position};
use gkpsim_core::classify::{
    class_b_check, class_b_check_circuit, gen_random_class_b, rsp_check, ClassBBounds, ModeClass, ReconstructionPolicy, ThetaClass,
};
use gkpsim_core::numtheory::{gauss_sum, qodd_between};
use gkpsim_core::oracle::{compare_form, realistic_limits, realistic_params, CompareConfig};
use gkpsim_core::par::Exec;
use gkpsim_core::sampler::{
    build_multi_pdf, build_single_pdf, position_offsets, sample_multi_batch, sample_single_batch, support_contains, CombPdf1d,
};
use gkpsim_core::symplectic::DspMode;
use gkpsim_core::{SampleConfig, SQRT_PI};
use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_integer::Integer;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(t: Duration, limit: Duration) -> Result<(), String> {
    ensure(t < limit, || format!("took {t:?}, limit {limit:?}"))
}

fn off_lattice(x: f64, step: f64) -> f64 {
    let r = x / step;
    (r - r.round()).abs() * step
}

fn single_measurement() -> Outcome {
    let t0 = Instant::now();
    let c = parse_circuit("modes 2\nF 2\nSUM 2 1\nMEASURE 1").map_err(|e| e.to_string())?;
    let f = track_measurement_operator(&c, 1).map_err(|e| e.to_string())?;
    let v = rsp_check(&f, &ReconstructionPolicy::default());
    let pdf = build_single_pdf(&f, &v).map_err(|e| e.to_string())?;
    ensure(pdf.spacings == vec![2.0 * SQRT_PI, SQRT_PI], || format!("spacings {:?}", pdf.spacings))?;
    ensure(pdf.offset == 0.0, || format!("offset {}", pdf.offset))?;
    let xs = sample_single_batch(&pdf, &SampleConfig { integer_bound: 100, seed: 2024 }, 10_000);
    let worst = xs.iter().map(|&x| off_lattice(x, SQRT_PI)).fold(0.0, f64::max);
    ensure(worst <= 1e-10, || format!("sample off the sqrt(pi) lattice by {worst:e}"))?;
    // both inclusions on a +-20 window
    let reference = CombPdf1d { spacings: vec![SQRT_PI], offset: 0.0, cases: vec![] };
    for m in -20..=20 {
        let x = [m as f64 * SQRT_PI];
        ensure(support_contains(&pdf, &x, 1e-10, 40), || format!("{m} sqrt(pi) missing from the comb"))?;
    }
    for m1 in -20i64..=20 {
        for m2 in -20i64..=20 {
            let x = m1 as f64 * pdf.spacings[0] + m2 as f64 * pdf.spacings[1] + pdf.offset;
            if x.abs() <= 20.0 * SQRT_PI + 1e-9 {
                ensure(support_contains(&reference, &[x], 1e-10, 40), || format!("comb point {x} not in sqrt(pi) Z"))?;
            }
        }
    }
    let t = t0.elapsed();
    within(t, Duration::from_secs(1))?;
    Ok(format!("spacings (2 sqrt(pi), sqrt(pi)), 10^4 samples, worst {worst:.1e}, {t:.0?}"))
}

fn joint_measurement() -> Outcome {
    let t0 = Instant::now();
    let c = parse_circuit("modes 2\nF 1\nSUM 1 2\nMEASURE 1 2").map_err(|e| e.to_string())?;
    let res = class_b_check_circuit(&c, DspMode::Permissive, &ReconstructionPolicy::default()).map_err(|e| e.to_string())?;
    let pdf = build_multi_pdf(&res, c.measured(), position_offsets(&circuit_to_symplectic(&c), c.measured()))
        .map_err(|e| e.to_string())?;
    let expect = DMatrix::from_row_slice(2, 2, &[SQRT_PI, 0.0, SQRT_PI, 2.0 * SQRT_PI]);
    ensure((&pdf.matrix - &expect).amax() <= 1e-12, || format!("G = {}", pdf.matrix))?;
    let xs = sample_multi_batch(&pdf, &SampleConfig { integer_bound: 100, seed: 77 }, 10_000);
    let mut worst: f64 = 0.0;
    for x in &xs {
        worst = worst.max(off_lattice(x[0], SQRT_PI)).max(off_lattice(x[1] - x[0], 2.0 * SQRT_PI));
    }
    ensure(worst <= 1e-10, || format!("sample off lattice by {worst:e}"))?;
    let t = t0.elapsed();
    within(t, Duration::from_secs(1))?;
    Ok(format!("G = [[sqrt(pi),0],[sqrt(pi),2 sqrt(pi)]], 10^4 samples, worst {worst:.1e}, {t:.0?}"))
}

fn gauss_magnitude() -> Outcome {
    let t0 = Instant::now();
    let mut count = 0usize;
    let mut worst: f64 = 0.0;
    for v in (1..=99i64).step_by(2) {
        for u in 0..v {
            if u.gcd(&v) != 1 {
                continue;
            }
            for np in 0..v {
                let g = gauss_sum(&BigInt::from(u), &BigInt::from(v), &BigInt::from(np)).map_err(|e| e.to_string())?;
                let err = (g.value.norm() - (v as f64).sqrt()).abs();
                worst = worst.max(err);
                ensure(err < 1e-9, || format!("u={u} v={v} n'={np}: |G| off by {err:e}"))?;
                count += 1;
            }
        }
    }
    let t = t0.elapsed();
    within(t, Duration::from_secs(5))?;
    Ok(format!("{count} sums, worst | |G| - sqrt(v) | = {worst:.1e}, {t:.0?}"))
}

fn clifford_counterexample() -> Outcome {
    let c = parse_circuit("modes 1\nF 1\nP 1 1\nP 1 1\nF 1\nMEASURE 1").map_err(|e| e.to_string())?;
    let f = track_measurement_operator(&c, 1).map_err(|e| e.to_string())?;
    let v = rsp_check(&f, &ReconstructionPolicy::default());
    ensure(!v.accepted, || "accepted".into())?;
    let reason = v.reason.unwrap_or_default();
    ensure(reason.contains("even denominator"), || format!("reason {reason:?}"))?;
    let m = circuit_to_symplectic(&c).matrix().clone();
    let expect = DMatrix::from_row_slice(2, 2, &[-1.0, 2.0, 0.0, -1.0]);
    ensure((&m - &expect).amax() <= 1e-12, || format!("M = {m}"))?;
    Ok(format!("rejected ({reason}), M = [[-1,2],[0,-1]]"))
}

fn b_subset_a() -> Outcome {
    let t0 = Instant::now();
    let recon = ReconstructionPolicy::default();
    let bounds = ClassBBounds::default();
    let mut measured = 0;
    for seed in 0..200u64 {
        let n = 1 + (seed % 4) as usize;
        let g = gen_random_class_b(n, seed, &bounds);
        let c = g.circuit();
        class_b_check_circuit(&c, DspMode::Permissive, &recon).map_err(|e| format!("seed {seed}: {e}\n{c}"))?;
        // the bare matrix, angles reconstructed from floats
        class_b_check(&g.transform(), DspMode::Permissive, &ReconstructionPolicy::permissive())
            .map_err(|e| format!("seed {seed} (float path): {e}\n{c}"))?;
        for &j in c.measured() {
            let v = rsp_check(&track_position(&c, j).map_err(|e| e.to_string())?, &recon);
            ensure(v.accepted, || format!("seed {seed} mode {j}: {:?}\n{c}", v.reason))?;
            measured += 1;
        }
    }
    let t = t0.elapsed();
    within(t, Duration::from_secs(5))?;
    Ok(format!("200 circuits, {measured} measured modes, {t:.0?}"))
}

fn oracle_agreement() -> Outcome {
    let t0 = Instant::now();
    let mut parts = vec![];
    for (u, v) in [(0i64, 1i64), (1, 1), (1, 3), (2, 3)] {
        let n = ((u * u + v * v) as f64).sqrt();
        let c = parse_circuit(&format!("modes 1\nR 1 cot {u}/{v}\nMEASURE 1")).map_err(|e| e.to_string())?;
        let form = track_measurement_operator(&c, 1).map_err(|e| e.to_string())?;
        let verdict = rsp_check(&form, &ReconstructionPolicy::default());
        ensure(verdict.accepted, || format!("({u},{v}) not accepted: {:?}", verdict.reason))?;
        ensure(verdict.per_mode[0].class == ModeClass::Theta(ThetaClass::Case1 { u: u.into(), v: v.into() }), || {
            format!("({u},{v}) classified as {:?}", verdict.per_mode[0].class)
        })?;
        let expect = SQRT_PI / n;
        let got = verdict.per_mode[0].spacing;
        ensure((got - expect).abs() <= 1e-12 * expect, || format!("({u},{v}) analytic spacing {got}"))?;
        let cfg = CompareConfig { half_width: Some(4.0 * SQRT_PI), ..CompareConfig::default() };
        let rep = compare_form(&form, &verdict, &cfg, Exec::default()).map_err(|e| format!("({u},{v}): {e}"))?;
        ensure(rep.max_relative_error < 0.02, || format!("({u},{v}): max relative gap error {}", rep.max_relative_error))?;
        parts.push(format!("({u},{v}) {} gaps err {:.1e}", rep.numeric_gaps.len(), rep.max_relative_error));
    }
    let t = t0.elapsed();
    within(t, Duration::from_secs(10))?;
    Ok(format!("{}, {t:.0?}", parts.join("; ")))
}

fn symplectic_invariant() -> Outcome {
    let mut worst: f64 = 0.0;
    for seed in 0..100u64 {
        let c = random_circuit(4, 100, seed);
        let d = circuit_to_symplectic(&c).symplectic_defect();
        worst = worst.max(d);
        ensure(d < 1e-9, || format!("seed {seed}: defect {d:e}"))?;
    }
    Ok(format!("100 circuits x 100 gates, worst defect {worst:.1e}"))
}

fn qodd_density() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut done = 0;
    while done < 1000 {
        let a: f64 = rng.random_range(-10.0..10.0);
        let b: f64 = rng.random_range(-10.0..10.0);
        let (x, y) = if a < b { (a, b) } else { (b, a) };
        if y - x <= 1e-4 {
            continue;
        }
        let q = qodd_between(x, y).map_err(|e| e.to_string())?;
        let bx = gkpsim_core::Rational::from_f64_exact(x).unwrap();
        let by = gkpsim_core::Rational::from_f64_exact(y).unwrap();
        ensure(q.is_odd_over_odd(), || format!("{q} not odd/odd"))?;
        let reduced = num_integer::Integer::gcd(q.numer(), q.denom()) == BigInt::from(1);
        ensure(reduced, || format!("{q} not reduced"))?;
        ensure(bx < q && q < by, || format!("{q} not inside ({x}, {y})"))?;
        done += 1;
    }
    Ok("1000 pairs, all odd/odd and strictly inside".into())
}

// relative error; a limit that is zero up to the rounding of cot is compared absolutely
fn rel(x: num_complex::Complex64, lim: num_complex::Complex64) -> f64 {
    let d = (x - lim).norm();
    if lim.norm() < 1e-12 {
        d
    } else {
        d / lim.norm()
    }
}

fn theta_limit() -> Outcome {
    let mut worst: f64 = 0.0;
    for theta in [PI / 4.0, PI / 2.0, 3.0f64.atan()] {
        let p = realistic_params(1e-6, 1.0, theta).map_err(|e| e.to_string())?;
        let (e, t, g) = realistic_limits(1.0, theta);
        for (name, x, lim) in [("eta", p.eta, e), ("tau", p.tau, t), ("gamma", p.gamma, g)] {
            let r = rel(x, lim);
            worst = worst.max(r);
            ensure(r < 1e-5, || format!("theta {theta}: {name} = {x}, limit {lim}, rel {r:e}"))?;
        }
    }
    Ok(format!("theta in {{pi/4, pi/2, arccot(1/3)}}, worst {worst:.1e}"))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("1 two-mode comb, single measurement", single_measurement),
        ("2 two-mode comb, joint measurement", joint_measurement),
        ("3 Gauss sum magnitude", gauss_magnitude),
        ("4 Clifford counterexample", clifford_counterexample),
        ("5 class B inside class A", b_subset_a),
        ("6 finite-squeezing peak gaps", oracle_agreement),
        ("7 symplectic invariant", symplectic_invariant),
        ("8 odd/odd density", qodd_density),
        ("9 infinite-squeezing limit", theta_limit),
    ];
    let mut failed = 0;
    println!("\nacceptance: {} criteria", criteria.len());
    for (name, run) in criteria {
        match run() {
            Ok(detail) => println!("  PASS  criterion {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("  FAIL  criterion {name}: {why}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed\n", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
