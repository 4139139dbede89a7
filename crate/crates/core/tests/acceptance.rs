//! Acceptance run: every criterion at its stated size, one line each.

mod common;

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rcfqe::elim::{elim_chain, ElimConfig, ElimError};
use rcfqe::formula::{decide, eliminate, Formula, QfResult, RenderStyle};
use rcfqe::hermite::{signature_from_hmi, tarski_query_numeric, TraceTable};
use rcfqe::oracle::{decide_one_quantifier, isolate_roots, sample_point, sturm_tarski, verify_staged};
use rcfqe::signdet::{bit, sign_determination_numeric, thom_table_numeric};
use rcfqe::{MPoly, Sign};

use common::*;

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn bounded(rng: &mut ChaCha8Rng, f: impl Fn(&mut ChaCha8Rng) -> Vec<i64>) -> Vec<i64> {
    loop {
        let c = f(rng);
        if c.iter().all(|x| x.abs() <= 20) {
            return c;
        }
    }
}

fn c1_tarski_queries() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut nonzero = 0;
    for trial in 0..500 {
        let p = bounded(&mut rng, |r| {
            if r.gen_bool(0.5) {
                let d = r.gen_range(1..=8);
                random_coeffs(r, d, 20)
            } else {
                rooty_coeffs(r, 8)
            }
        });
        let q = bounded(&mut rng, |r| {
            if r.gen_bool(0.7) {
                let d = r.gen_range(0..=6);
                random_coeffs(r, d, 20)
            } else {
                let d = r.gen_range(0..=5);
                mul_coeffs(&[-r.gen_range(-3..=3), 1], &random_coeffs(r, d, 3))
            }
        });
        let hermite = tarski_query_numeric(&upoly(&p), &upoly(&q)).map_err(|e| e.to_string())?;
        let sturm = sturm_tarski(&qpoly(&p), &qpoly(&q)).map_err(|e| e.to_string())?;
        check(hermite == sturm, || {
            format!("trial {trial}: P={p:?} Q={q:?}: Hermite {hermite}, Sturm {sturm}")
        })?;
        nonzero += usize::from(sturm != 0);
    }
    Ok(format!("500 pairs agree ({nonzero} nonzero)"))
}

fn c2_signature() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut roots_total = 0;
    for trial in 0..500 {
        let c = mixed_coeffs(&mut rng, 8);
        let p = c.len() - 1;
        let table = TraceTable::build(ints(&c), 2 * p - 2).map_err(|e| e.to_string())?;
        let h = table.hmi(&ints(&[1])).map_err(|e| e.to_string())?;
        let lc = Sign::of_int(&BigInt::from(c[p]));
        let sig = signature_from_hmi(&h, lc).map_err(|e| e.to_string())?;
        let n = isolate_roots(&qpoly(&c)).unwrap().len() as i64;
        check(sig == n, || format!("trial {trial}: P={c:?}: signature {sig}, {n} roots"))?;
        roots_total += n;
    }
    Ok(format!("500 polynomials, {roots_total} roots in total"))
}

fn c3_sign_determination() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut queries = 0;
    for trial in 0..200 {
        let pc = mixed_coeffs(&mut rng, 6);
        let deg = pc.len() - 1;
        let s = rng.gen_range(1..=3);
        let qs: Vec<Vec<i64>> = (0..s)
            .map(|_| {
                if rng.gen_bool(0.3) {
                    vec![-rng.gen_range(-3..=3), 1]
                } else {
                    let d = rng.gen_range(0..=4);
                    random_coeffs(&mut rng, d, 5)
                }
            })
            .collect();
        let polys: Vec<MPoly> = qs.iter().map(|q| upoly(q)).collect();
        let (counts, log) = sign_determination_numeric(&upoly(&pc), &polys).map_err(|e| e.to_string())?;
        let got: BTreeMap<Vec<Sign>, u64> = counts.entries.into_iter().collect();
        let want = brute_sign_counts(&qpoly(&pc), &qs.iter().map(|q| qpoly(q)).collect::<Vec<_>>());
        check(got == want, || format!("trial {trial}: P={pc:?} Q={qs:?}: {got:?} vs {want:?}"))?;
        for e in &log {
            let support = e.iter().filter(|&&x| x > 0).count();
            check(support <= bit(deg) && e.iter().all(|&x| x <= 2), || {
                format!("trial {trial}: query {e:?} outside the product set (p = {deg})")
            })?;
        }
        queries += log.len();
    }
    Ok(format!("200 systems, {queries} queries, all in the product set"))
}

fn c4_thom_order() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut roots = 0;
    for trial in 0..200 {
        let c = mixed_coeffs(&mut rng, 8);
        let table = thom_table_numeric(&upoly(&c), &[]).map_err(|e| e.to_string())?;
        let got: Vec<Vec<Sign>> = table.roots.iter().map(|r| r.encoding.clone()).collect();
        let want = numeric_thom_encodings(&c);
        check(got == want, || format!("trial {trial}: P={c:?}: {got:?} vs {want:?}"))?;
        let mult: Vec<usize> = table.roots.iter().map(|r| r.multiplicity).collect();
        let want_mult = numeric_multiplicities(&c);
        check(mult == want_mult, || format!("trial {trial}: P={c:?}: multiplicities {mult:?} vs {want_mult:?}"))?;
        roots += got.len();
    }
    Ok(format!("200 polynomials, {roots} roots ordered"))
}

fn random_upoly_x1(rng: &mut ChaCha8Rng, deg: usize) -> MPoly {
    let c: Vec<i64> = (0..=deg).map(|_| rng.gen_range(-5..=5)).collect();
    upoly(&c)
}

fn random_param_poly(rng: &mut ChaCha8Rng, deg_y: usize) -> MPoly {
    let mut coeffs: Vec<MPoly> = (0..=deg_y).map(|_| random_upoly_x1(rng, 2)).collect();
    while coeffs[deg_y].is_zero() {
        coeffs[deg_y] = random_upoly_x1(rng, 2);
    }
    MPoly::from_coeffs(2, coeffs)
}

fn c5_scaling_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut done = 0;
    while done < 100 {
        let p = rng.gen_range(1..=3);
        let a = rng.gen_range(0..=2);
        let t = random_param_poly(&mut rng, p);
        let am = random_param_poly(&mut rng, a);
        let u = sample_point(&mut rng, 1);
        let tc = t.coeffs_in(2);
        let lc_u = tc[p].eval(&u).unwrap();
        if lc_u.is_zero() {
            continue;
        }
        let ac = am.coeffs_in(2);
        let table = TraceTable::build(tc.clone(), a + 2 * p - 2).map_err(|e| e.to_string())?;
        let h = table.hmi(&ac).map_err(|e| e.to_string())?;
        let t_u: Vec<BigRational> = tc.iter().map(|c| c.eval(&u).unwrap()).collect();
        let a_u: Vec<BigRational> = ac.iter().map(|c| c.eval(&u).unwrap()).collect();
        let unscaled = hermite_minors_unscaled(&t_u, &a_u);
        for (j, minor) in unscaled.iter().enumerate() {
            let lhs = h.minors[j].eval(&u).unwrap();
            let e = ((p - j) * (a + 2 * p - 2)) as i32;
            let rhs = num_traits::pow(lc_u.clone(), e as usize) * minor;
            check(lhs == rhs, || {
                format!("T={t} A={am} at {}: HMi_{j} = {lhs}, scaled minor = {rhs}", u[0])
            })?;
        }
        done += 1;
    }
    Ok("100 specializations, exact".into())
}

/// Families with `s <= 2`, `d <= 3`, `k <= 3` used across the test suite.
fn bound_families() -> Vec<(Vec<&'static str>, usize)> {
    vec![
        (vec!["x1"], 1),
        (vec!["x2^2 + x1"], 2),
        (vec!["x1*x2 + 1"], 2),
        (vec!["x2^2 + 1"], 2),
        (vec!["x2^3 + x1*x2 + 1"], 2),
        (vec!["x2^3 - 3*x2 + x1"], 2),
        (vec!["x1*x2^2 + x2 - 1"], 2),
        (vec!["x2^2 - x1", "x2 - 1"], 2),
        (vec!["x2 - x1", "x2 + x1"], 2),
        (vec!["x1*x2 - 1", "x1"], 2),
        (vec!["x3^2 + x1*x3 + x2"], 3),
        (vec!["x3^2 - x1*x2"], 3),
        (vec!["x1*x3 + x2"], 3),
        (vec!["x3^2 + x2 + x1"], 3),
    ]
}

fn c6_bounds() -> Outcome {
    let cfg = ElimConfig {
        max_family: 50_000_000,
        ..ElimConfig::default()
    };
    let mut levels = 0;
    let mut families = 0;
    let mut run = |f: &[MPoly], k: usize| -> Result<(), String> {
        let chain = match elim_chain(f, k, 0, &cfg) {
            Ok(c) => c,
            Err(e @ ElimError::BoundViolation { .. }) => return Err(e.to_string()),
            Err(e) => return Err(format!("{f:?}: {e}")),
        };
        for l in chain.levels() {
            let b = chain.bounds(l.level);
            check(b.size_ok(l.len()), || format!("{f:?} level {}: size {}", l.level, l.len()))?;
            check(b.degree_ok(l.max_degree()), || {
                format!("{f:?} level {}: degree {}", l.level, l.max_degree())
            })?;
            levels += 1;
        }
        families += 1;
        Ok(())
    };
    for (polys, k) in bound_families() {
        let f: Vec<MPoly> = polys.iter().map(|s| s.parse().unwrap()).collect();
        run(&f, k)?;
    }
    // random single members of degree <= 2 in two variables
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..10 {
        let mut f = MPoly::zero();
        for (e1, e2) in [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)] {
            let c = MPoly::constant(rng.gen_range(-3..=3));
            f = f + c * MPoly::var(1).pow(e1) * MPoly::var(2).pow(e2);
        }
        if f.degree_in(2).unwrap_or(0) == 0 {
            f = f + MPoly::var(2).pow(2);
        }
        run(&[f], 2)?;
    }
    Ok(format!("{families} families, {levels} levels within both bounds"))
}

fn in_tphi(r: &QfResult, pt: &[BigRational]) -> bool {
    let signs = signs_at(&r.free_family().polys(), pt);
    r.tphi().iter().any(|c| c.0 == signs)
}

fn grid(dim: usize) -> Vec<Vec<BigRational>> {
    let mut out: Vec<Vec<BigRational>> = vec![Vec::new()];
    for _ in 0..dim {
        out = out
            .into_iter()
            .flat_map(|p| {
                (-3..=3).map(move |v| {
                    let mut q = p.clone();
                    q.push(rat(v));
                    q
                })
            })
            .collect();
    }
    out
}

type Closed = fn(&[BigRational]) -> bool;

fn c7_end_to_end() -> Outcome {
    let cfg = ElimConfig::default();
    let cases: Vec<(&str, Closed)> = vec![
        ("exists x3. x3^2 + x1*x3 + x2 = 0", |u| &u[0] * &u[0] - rat(4) * &u[1] >= BigRational::zero()),
        ("exists x2. x2^2 + x1 = 0", |u| u[0] <= BigRational::zero()),
        ("forall x2. x2^2 + x1 > 0", |u| u[0] > BigRational::zero()),
        ("exists x2. x1*x2 + 1 = 0", |u| !u[0].is_zero()),
    ];
    let mut checked = 0;
    for (n, (text, closed)) in cases.iter().enumerate() {
        let phi = Formula::parse(text).unwrap();
        let r = eliminate(&phi, &cfg).map_err(|e| e.to_string())?;
        let mut rng = ChaCha8Rng::seed_from_u64(70 + n as u64);
        let mut points = grid(phi.free);
        points.extend((0..100).map(|_| sample_point(&mut rng, phi.free)));
        for pt in &points {
            let want = closed(pt);
            let got = in_tphi(&r, pt);
            let oracle = decide_one_quantifier(pt, phi.quantifiers[0], &phi.matrix);
            check(got == want && oracle == want, || {
                format!(
                    "{text} at {:?}: QE {got}, closed form {want}, oracle {oracle}; output {}",
                    pt.iter().map(|x| x.to_string()).collect::<Vec<_>>(),
                    r.render(RenderStyle::Relations)
                )
            })?;
        }
        checked += points.len();
    }
    for (text, want) in [("forall x1. x1^2 + 1 > 0", true), ("exists x1. x1^2 + 1 = 0", false)] {
        let got = decide(&Formula::parse(text).unwrap(), &cfg).map_err(|e| e.to_string())?;
        check(got == want, || format!("{text}: decided {got}"))?;
    }
    Ok(format!("4 formulas at {checked} points and 2 sentences, no mismatch"))
}

fn c8_staged() -> Outcome {
    let cfg = ElimConfig::default();
    let mut summary = Vec::new();
    for text in [
        "exists x1. forall x2. x2^2 + x1 > 0",
        "forall x1. exists x2. x1*x2 - 1 = 0 \\/ x1 = 0",
    ] {
        let r = eliminate(&Formula::parse(text).unwrap(), &cfg).map_err(|e| e.to_string())?;
        let rep = verify_staged(&r, 100, 8);
        check(rep.stages.len() == 2, || format!("{text}: {} stages", rep.stages.len()))?;
        check(rep.passed(), || format!("{text}: {rep:?}"))?;
        summary.push(
            rep.stages
                .iter()
                .map(|s| format!("{} x{}: {}/{}", s.quantifier, s.variable, s.mismatches, s.samples))
                .collect::<Vec<_>>()
                .join(", "),
        );
    }
    Ok(format!("mismatches per stage: [{}]", summary.join("; ")))
}

fn transcript(text: &str) -> String {
    let r = eliminate(&Formula::parse(text).unwrap(), &ElimConfig::default()).unwrap();
    let levels: Vec<_> = r.chain.levels().map(|l| serde_json::to_string(l).unwrap()).collect();
    let rep = if r.formula.quantifiers.is_empty() {
        String::new()
    } else {
        serde_json::to_string(&verify_staged(&r, 20, 9)).unwrap()
    };
    format!(
        "{}\n{}\n{}\n{}",
        r.render(RenderStyle::Relations),
        levels.join("\n"),
        r.tree.to_json(),
        rep
    )
}

fn c9_determinism() -> Outcome {
    let inputs = [
        "exists x3. x3^2 + x1*x3 + x2 = 0",
        "exists x1. forall x2. x2^2 + x1 > 0",
        "exists x2. x2^2 - x1 > 0 /\\ x2 - 1 < 0",
    ];
    let mut bytes = 0;
    for text in inputs {
        let a = transcript(text);
        let b = transcript(text);
        let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let c = single.install(|| transcript(text));
        check(a == b && a == c, || format!("{text}: outputs differ between runs"))?;
        bytes += a.len();
    }
    Ok(format!("3 inputs, {bytes} bytes identical across runs and thread counts"))
}

fn main() {
    type Criterion = (&'static str, fn() -> Outcome, Option<Duration>);
    let criteria: Vec<Criterion> = vec![
        ("Tarski queries: Hermite = Sturm", c1_tarski_queries, Some(Duration::from_secs(30))),
        ("signature = real-root count", c2_signature, Some(Duration::from_secs(30))),
        ("sign determination = brute force", c3_sign_determination, Some(Duration::from_secs(60))),
        ("Thom order = numeric order", c4_thom_order, None),
        ("parametric scaling identity", c5_scaling_identity, None),
        ("family size and degree bounds", c6_bounds, None),
        ("end-to-end QE on closed forms", c7_end_to_end, Some(Duration::from_secs(300))),
        ("staged verification", c8_staged, None),
        ("determinism", c9_determinism, None),
    ];
    let mut failed = 0;
    for (n, (name, run, limit)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed();
        let outcome = match (outcome, limit) {
            (Ok(_), Some(l)) if secs > l => Err(format!("took {:.1}s, limit {}s", secs.as_secs_f64(), l.as_secs())),
            (o, _) => o,
        };
        match outcome {
            Ok(detail) => println!("criterion {} {name}: PASS ({detail}; {:.2}s)", n + 1, secs.as_secs_f64()),
            Err(why) => {
                failed += 1;
                println!("criterion {} {name}: FAIL ({why}; {:.2}s)", n + 1, secs.as_secs_f64());
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
    println!("all 9 criteria passed");
}
