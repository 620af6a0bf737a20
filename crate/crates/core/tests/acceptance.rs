//! The repository's exit gate: ten desk-scale properties, one printed
//! pass/fail line each (visible under `--nocapture`; any failure also fails
//! the test with the collected details).

use std::sync::Arc;
use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use limitlab::baire::{unpair, Stream};
use limitlab::gallery::{
    chi_u_sierpinski, derivative_uniform, f_cantor, inversion_whitelist,
    mandelbrot_distance_lower, sample_fin_universe, semicomputable_translator, triangle_piece,
    Direction,
};
use limitlab::interval::{dyadic_eps, rat, rat_int, Expr, Interval};
use limitlab::metric::{
    cauchy_decode, index_of_rational, lim_x, metric_limit_normal_form, modulus,
    rational_of_index, reconstruct_from_modulus, shifted_identity, unique_zero, CauchyName,
    Cms, ModulusCheck,
};
use limitlab::metric::check_modulus;
use limitlab::spaces::{chain_translators, constant_family, h_name_of};
use limitlab::transforms::{
    comparators_universe, diagonal_limit, jump_inverse_stream, jump_normal_form,
    limit_inversion, limit_to_monotone, verify_inversion,
};
use limitlab::vm::{
    eq_test_code, eval_verdict, jump_exact, lim_code, limdelta_code, low_code, run_limit,
    run_monotone, write_copier_code, Asm, MachineCode, ProgramKind,
};

type Check = fn() -> Result<String, String>;

fn shipped_limit_machines() -> Vec<(&'static str, MachineCode)> {
    vec![
        ("write_copier", write_copier_code()),
        ("eq_test", eq_test_code()),
        ("lim", lim_code()),
        ("limdelta", limdelta_code()),
        ("low", low_code()),
    ]
}

fn seeded_input(seed: u64) -> Stream {
    let word: Vec<u64> = (0..4).map(|k| (seed >> (2 * k)) & 3).collect();
    Stream::word_then_const(word, seed % 3)
}

// 1. the monotone normal form of each shipped revisable machine reproduces
// the direct run on the observationally stabilized prefix
fn limit_normal_form_round_trip() -> Result<String, String> {
    let mut runs = 0u64;
    for (name, code) in shipped_limit_machines() {
        let g = limit_to_monotone(&code).map_err(|e| format!("{name}: {e}"))?;
        for seed in 0..50u64 {
            let p = seeded_input(seed);
            let direct = run_limit(&code, &p, 100_000).map_err(|e| format!("{name}: {e}"))?;
            let prefix = direct.stabilized_prefix(0.5).clamp(4, 8);
            // slow settlers need deeper probes; escalate until the diagonal
            // limit agrees everywhere (most runs pass at the smallest budget)
            let mut mismatch = None;
            for budget in [4_000_000u64, 32_000_000, 640_000_000, 1_280_000_000] {
                let out = run_monotone(&g, &p, budget)
                    .map_err(|e| format!("{name}/{seed}: {e}"))?
                    .output;
                mismatch = (0..prefix).find_map(|j| {
                    let want = direct.tape.get(&j).copied();
                    let got = diagonal_limit(&out, j, 2);
                    (want != got).then(|| {
                        format!(
                            "{name} seed {seed} cell {j}: direct {want:?} vs normal form {got:?}"
                        )
                    })
                });
                if mismatch.is_none() {
                    break;
                }
            }
            if let Some(m) = mismatch {
                return Err(m);
            }
            runs += 1;
        }
    }
    Ok(format!("{runs} runs, prefixes 4..8"))
}

// 2. inverting the comparator jump recovers the point exactly
fn jump_inversion_round_trip() -> Result<String, String> {
    let u = comparators_universe();
    for seed in 0..100u64 {
        let word: Vec<u64> = (0..6).map(|k| (seed >> k) & 3).collect();
        let p = Stream::word_then_const(word, seed % 4);
        let q = jump_exact(Arc::clone(&u), p.clone());
        let back = jump_inverse_stream(q, 64);
        for n in 0..32u64 {
            let want = p.get(n).map_err(|e| e.to_string())?;
            let got = back.get(n).map_err(|e| format!("seed {seed} cell {n}: {e}"))?;
            if want != got {
                return Err(format!("seed {seed} cell {n}: {want} vs {got}"));
            }
        }
    }
    Ok("100 points, cells 0..31".into())
}

// 3. the jump normal form of each shipped revisable machine reproduces it
// through the whitelist jump
fn jump_normal_form_reproduces() -> Result<String, String> {
    let mut runs = 0u64;
    for (name, code) in shipped_limit_machines() {
        let (g, universe) =
            jump_normal_form(&code, 300_000).map_err(|e| format!("{name}: {e}"))?;
        let universe = Arc::new(universe);
        for seed in 0..30u64 {
            let p = seeded_input(seed * 7 + 1);
            let direct = run_limit(&code, &p, 100_000).map_err(|e| e.to_string())?;
            let q = jump_exact(Arc::clone(&universe), p.clone());
            // same escalation idea as criterion 1: the inlined simulation's
            // diagonal input scan makes some machines need deep budgets
            let mut mismatch = None;
            for budget in [30_000_000u64, 1_000_000_000, 2_000_000_000] {
                let out = run_monotone(&g, &q, budget)
                    .map_err(|e| format!("{name}/{seed}: {e}"))?
                    .output;
                mismatch = (0..6u64).find_map(|j| {
                    let want = direct.tape.get(&j).copied();
                    let got = out.get(j as usize).copied();
                    (want.is_some() && want != got).then(|| {
                        format!(
                            "{name} seed {seed} cell {j}: direct {want:?} vs jump form {got:?}"
                        )
                    })
                });
                if mismatch.is_none() {
                    break;
                }
            }
            if let Some(m) = mismatch {
                return Err(m);
            }
            runs += 1;
        }
    }
    Ok(format!("{runs} runs, cells 0..5"))
}

// 4. staged limit inversion on the shipped whitelist: the family converges
// to the point at prefix 8 and the bits match the oracle at every stage
fn limit_inversion_bits_and_limit() -> Result<String, String> {
    let u = Arc::new(inversion_whitelist());
    let p = Stream::word_then_const(vec![3, 1, 4, 1, 5], 0);
    let inv = limit_inversion(&p, &u, 4).map_err(|e| e.to_string())?;
    if !verify_inversion(&inv, &u).map_err(|e| e.to_string())? {
        return Err("verification rejected the staged inversion".into());
    }
    let whole = inv.interleaved();
    for (i, &bit) in inv.bits.iter().enumerate() {
        let verdict = u.entries[&(i as u64)].verdict.as_ref().unwrap();
        let truth = eval_verdict(verdict, &whole).map_err(|e| e.to_string())?;
        if (bit == 1) != truth {
            return Err(format!("stage {i}: emitted bit {bit}, oracle says {truth}"));
        }
    }
    // both directions at prefix 8: members past stage j agree with p at j
    for j in 0..8u64 {
        let got = inv.component(j + 1).get(j).map_err(|e| e.to_string())?;
        let want = p.get(j).map_err(|e| e.to_string())?;
        if got != want {
            return Err(format!("family cell {j}: {got} vs point {want}"));
        }
    }
    Ok(format!("bits {:?}, prefix 8", inv.bits))
}

fn settling_name_machine(cells: u64) -> MachineCode {
    let third = index_of_rational(&rat(1, 3));
    let mut a = Asm::new();
    let cell = a.reg();
    let val = a.reg();
    for round in [0u64, third] {
        for c in 0..cells {
            a.set_const(cell, c);
            a.set_const(val, round);
            a.write(cell, val);
        }
    }
    a.halt();
    MachineCode::new(a.finish(), ProgramKind::Limit).unwrap()
}

// 5. every name the metric layer emits is fast-converging by exact rational
// comparison, and the limit of 2^-n decodes to balls around 0
fn metric_names_are_fast_converging() -> Result<String, String> {
    let reals = Cms::Reals;
    fn fail(tag: &'static str) -> impl Fn(limitlab::error::Error) -> String {
        move |e| format!("{tag}: {e}")
    }

    // lim_X on x_n = 2^-n (tail clipped to exact 0 to keep indices finite)
    let seq = Stream::from_fn(|c| {
        let (n, _k) = unpair(c);
        let x = if n <= 14 { dyadic_eps(n) } else { BigRational::zero() };
        Ok(index_of_rational(&x))
    });
    let lim = lim_x(reals.clone(), seq, 64);
    lim.validate(&reals, 20).map_err(fail("lim_X"))?;
    for k in 0..=10u64 {
        let ball = cauchy_decode(&reals, &lim, k).map_err(fail("lim_X decode"))?;
        let center = rational_of_index(ball.center);
        if center.abs() > ball.radius {
            return Err(format!("lim_X ball at k={k} misses 0: center {center}"));
        }
    }

    // metric limit normal form: member names of the emitted sequence
    let realizer = metric_limit_normal_form(&settling_name_machine(24), reals.clone())
        .map_err(fail("metric nf"))?;
    let out = realizer.apply(&Stream::constant(0), 1 << 16).map_err(fail("metric nf"))?;
    for i in [0u64, 5, 20] {
        CauchyName::new(out.clone().component(i))
            .validate(&reals, 20)
            .map_err(fail("metric nf member"))?;
    }

    // semicomputable translator on an increasing ramp
    let t = semicomputable_translator(Direction::Lower);
    let ramp =
        Stream::from_fn(|k| Ok(index_of_rational(&(rat_int(1) - dyadic_eps(k.min(14))))));
    let name = CauchyName::new(t.apply(&ramp, 64).map_err(fail("semicomputable"))?);
    name.validate(&reals, 20).map_err(fail("semicomputable"))?;

    // unique zero of x - 1/3 on the unit interval
    let zero = unique_zero(shifted_identity(rat(1, 3)), Interval::new(rat_int(0), rat_int(1)), 12)
        .map_err(fail("unique_zero"))?;
    zero.validate(&reals, 20).map_err(fail("unique_zero"))?;
    for k in 0..=10u64 {
        let ball = cauchy_decode(&reals, &zero, k).map_err(fail("unique_zero decode"))?;
        let center = rational_of_index(ball.center);
        if (center - rat(1, 3)).abs() > ball.radius {
            return Err(format!("unique_zero ball at k={k} misses 1/3"));
        }
    }
    Ok("4 emitters validated to k,n <= 20".into())
}

// 6. continuity moduli: acceptance, rejection with witness, and evaluation
// through a modulus
fn moduli_behave() -> Result<String, String> {
    let dom = Interval::new(rat_int(0), rat_int(1));
    let x = rat(1, 3);
    let ident = Expr::x();
    let double = Expr::x().scale(rat_int(2));
    for n in [2u64, 4, 6] {
        match check_modulus(&ident, &dom, &x, n, n, 6, 8).map_err(|e| e.to_string())? {
            ModulusCheck::Accepted => {}
            other => return Err(format!("identity at m=n={n}: {other:?}")),
        }
        match check_modulus(&double, &dom, &x, n, n, 6, 8).map_err(|e| e.to_string())? {
            ModulusCheck::Rejected { witness: (a, b) } => {
                let gap = (&b - &a).abs() * rat_int(2);
                if gap < dyadic_eps(n) {
                    return Err(format!("2x witness at n={n} is not a violation"));
                }
            }
            other => return Err(format!("2x at m=n={n}: expected rejection, got {other:?}")),
        }
        match check_modulus(&double, &dom, &x, n + 1, n, 6, 8).map_err(|e| e.to_string())? {
            ModulusCheck::Accepted => {}
            other => return Err(format!("2x at m=n+1, n={n}: {other:?}")),
        }
    }

    // a name of x good enough to feed the reconstruction
    let p = CauchyName::new(Stream::from_fn({
        let x = x.clone();
        move |k| {
            let scale = BigRational::from_integer(BigInt::from(1u64) << (k as usize + 2));
            Ok(index_of_rational(&((&x * &scale).floor() / scale)))
        }
    }));
    let funcs =
        [Expr::x().square(), triangle_piece(1, 1), derivative_uniform(&Expr::x().square(), 3)];
    for (i, f) in funcs.iter().enumerate() {
        let direct = f.eval_point(&x, 8).map_err(|e| e.to_string())?.lo;
        let f_alpha = |idx: u64| {
            Ok(index_of_rational(&f.eval_point(&rational_of_index(idx), 8)?.lo))
        };
        let m_source = |k: u64| modulus(f, &dom, &x, k, 6, 8);
        let ball = reconstruct_from_modulus(&Cms::Reals, &f_alpha, &m_source, &p, 4)
            .map_err(|e| format!("function {i}: {e}"))?;
        let got = rational_of_index(ball.center);
        if (&got - &direct).abs() > ball.radius {
            return Err(format!("function {i}: reconstructed {got}, direct {direct}"));
        }
    }
    Ok("accept/reject/reconstruct on 3 functions".into())
}

// 7. mind-change budgets of the counterexample machines
fn gallery_mind_change_bounds() -> Result<String, String> {
    let u = sample_fin_universe();
    for seed in 0..100u64 {
        let bits = Stream::from_fn(move |k| Ok((seed >> (k % 7)) & 1));
        let cantor = f_cantor(&u, &bits, 48).map_err(|e| e.to_string())?;
        if cantor.max_mind_changes() > 2 {
            return Err(format!("f_cantor changed {} times on seed {seed}", cantor.max_mind_changes()));
        }
        let chi = chi_u_sierpinski(&u, &bits, 48).map_err(|e| e.to_string())?;
        if chi.max_mind_changes() > 3 {
            return Err(format!("chi_U changed {} times on seed {seed}", chi.max_mind_changes()));
        }
        let p = seeded_input(seed);
        let eq = run_limit(&eq_test_code(), &p, 20_000).map_err(|e| e.to_string())?;
        if eq.max_mind_changes() > 1 {
            return Err(format!("eq_test changed {} times on seed {seed}", eq.max_mind_changes()));
        }
    }
    Ok("bounds 2/3/1 over 100 inputs each".into())
}

// 8. difference quotients: exact on squares, 2^-6-close on cubes
fn derivative_exactness() -> Result<String, String> {
    let sq = Expr::x().square();
    for n in 1..=12u32 {
        let d = derivative_uniform(&sq, n);
        for i in 0..=32u64 {
            let x = rat(i as i64, 32);
            let v = d.eval_point(&x, 8).map_err(|e| e.to_string())?;
            let want = rat(2 * i as i64, 32);
            if v.lo != want || v.hi != want {
                return Err(format!("d(x^2) at n={n}, x={x}: {:?} vs {want}", (v.lo, v.hi)));
            }
        }
    }
    let cube = Expr::x().square().mul(Expr::x());
    let d10 = derivative_uniform(&cube, 10);
    let mut sup = BigRational::zero();
    for i in 0..=32u64 {
        let x = rat(i as i64, 32);
        let v = d10.eval_point(&x, 8).map_err(|e| e.to_string())?;
        let want = rat(3 * (i * i) as i64, 1024);
        sup = sup.max((v.lo - &want).abs().max((v.hi - want).abs()));
    }
    if sup > dyadic_eps(6) {
        return Err(format!("d(x^3) at n=10: sup defect {sup} > 2^-6"));
    }
    Ok(format!("x^2 exact for n <= 12; x^3 defect {sup}"))
}

// 9. distance lower bounds to the Mandelbrot set at the two probe points
fn mandelbrot_bounds() -> Result<String, String> {
    let far = mandelbrot_distance_lower((rat_int(-3), rat_int(0)), 12, 5);
    let last = far.last().cloned().unwrap_or_default();
    if last <= rat(9, 10) {
        return Err(format!("bound at c=-3 stalled at {last}"));
    }
    if far.iter().any(|b| b > &(rat_int(1) + dyadic_eps(8))) {
        return Err("a bound at c=-3 exceeds the true distance 1".into());
    }
    if far.windows(2).any(|w| w[0] > w[1]) {
        return Err("bounds at c=-3 are not monotone".into());
    }
    let inside = mandelbrot_distance_lower((rat_int(0), rat_int(0)), 12, 5);
    if inside.iter().any(|b| !b.is_zero()) {
        return Err("a bound at c=0 is nonzero".into());
    }
    Ok(format!("c=-3 reaches {last}, c=0 stays 0"))
}

// 10. every shipped translator is decode-consistent, and the chain route
// from jump names agrees with direct inversion
fn translator_coherence() -> Result<String, String> {
    let chain = chain_translators().map_err(|e| e.to_string())?;
    let budget = 120_000_000u64;
    let prefix = 8u64;
    let mut checks = 0u64;
    for seed in 0..20u64 {
        let p = Stream::periodic(vec![seed % 3, (seed / 3) % 3, (seed / 9) % 3 + 1]);
        let jname = jump_exact(comparators_universe(), p.clone());
        let hname = h_name_of(p.clone(), 256);
        let dname = constant_family(p.clone());
        let lname = chain[3].translate(&dname, budget).map_err(|e| e.to_string())?;
        let sources = [&jname, &hname, &p, &dname, &lname];
        for (t, src) in chain.iter().zip(sources) {
            if !t.check_on(src, prefix, budget).map_err(|e| format!("{}: {e}", t.name))? {
                return Err(format!("{} decode-inconsistent on seed {seed}", t.name));
            }
            checks += 1;
        }
        // composition agrees with the direct inverse at the same prefix
        if seed < 4 {
            let via_h = chain[1]
                .translate(&chain[0].translate(&jname, budget).map_err(|e| e.to_string())?, budget)
                .map_err(|e| e.to_string())?;
            let direct = jump_inverse_stream(jname.clone(), 1 << 12);
            if via_h.prefix(prefix).map_err(|e| e.to_string())?
                != direct.prefix(prefix).map_err(|e| e.to_string())?
            {
                return Err(format!("chain route disagrees with direct inversion on seed {seed}"));
            }
        }
    }
    Ok(format!("{checks} translator checks at prefix {prefix}"))
}

#[test]
fn acceptance() {
    let criteria: Vec<(&str, u64, Check)> = vec![
        ("limit normal form round trip", 60, limit_normal_form_round_trip),
        ("jump inversion", 30, jump_inversion_round_trip),
        ("jump normal form", 120, jump_normal_form_reproduces),
        ("limit inversion", 60, limit_inversion_bits_and_limit),
        ("metric names", 60, metric_names_are_fast_converging),
        ("moduli", 120, moduli_behave),
        ("gallery mind changes", 60, gallery_mind_change_bounds),
        ("derivatives", 30, derivative_exactness),
        ("mandelbrot bounds", 120, mandelbrot_bounds),
        ("translator coherence", 60, translator_coherence),
    ];
    let mut failures = Vec::new();
    for (i, (name, limit, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let elapsed = start.elapsed().as_secs_f64();
        let within = elapsed < *limit as f64;
        match outcome {
            Ok(detail) if within => {
                println!("criterion {:2}: pass  {name} ({detail}) [{elapsed:.1}s]", i + 1)
            }
            Ok(detail) => {
                println!(
                    "criterion {:2}: FAIL  {name} ({detail}) [{elapsed:.1}s over {limit}s budget]",
                    i + 1
                );
                failures.push(format!("{name}: exceeded {limit}s ({elapsed:.1}s)"));
            }
            Err(msg) => {
                println!("criterion {:2}: FAIL  {name}: {msg} [{elapsed:.1}s]", i + 1);
                failures.push(format!("{name}: {msg}"));
            }
        }
    }
    assert!(failures.is_empty(), "failed criteria:\n{}", failures.join("\n"));
}
