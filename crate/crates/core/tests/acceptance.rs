//! Acceptance criteria, one PASS/FAIL line each.
//!
//! Runs as a plain binary (`harness = false`) and exits nonzero when any
//! criterion fails. Time limits are checked per criterion.

use std::collections::BTreeSet;
use std::process::Command;
use std::time::{Duration, Instant};

use torgeo::bounds::{
    bad_configuration_scan, identity_holds, neighbor_bound, parallelogram_bound, verify_binomfact, ScanOptions,
};
use torgeo::gf::{field_for_order, FieldElement, FieldSpec};
use torgeo::ringgeo::{
    apply_agl, b_vectors, count_lines_prime_power, divisors, element_order, gl2, is_prime_power, lines_through,
    line_points, neighbors_of, AglMap, Direction, RingPoint,
};
use torgeo::search::Rng;
use torgeo::torcode::{
    build_generator, min_distance, weight_distribution, CodeReport, EnumOptions, ExponentSet, Strategy, TorusPolynomial,
};

type Outcome = Result<String, String>;

struct Gate {
    failures: usize,
    total: usize,
}

impl Gate {
    fn run(&mut self, id: u32, title: &str, limit: Duration, body: impl FnOnce() -> Outcome) {
        let start = Instant::now();
        let result = body();
        let elapsed = start.elapsed();
        let result = match result {
            Ok(detail) if elapsed > limit => Err(format!("{detail}; took {:.2?}, limit {:?}", elapsed, limit)),
            other => other,
        };
        self.total += 1;
        match result {
            Ok(detail) => println!("[PASS] {id}. {title} ({:.2?}): {detail}", elapsed),
            Err(detail) => {
                self.failures += 1;
                println!("[FAIL] {id}. {title} ({:.2?}): {detail}", elapsed);
            }
        }
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn pt(a: i64, b: i64, r: u32) -> RingPoint {
    RingPoint::xy(a, b, r).unwrap()
}

fn plane_set(q: u32, pts: &[(i64, i64)]) -> ExponentSet {
    let raw: Vec<Vec<i64>> = pts.iter().map(|&(a, b)| vec![a, b]).collect();
    ExponentSet::new(q, 2, &raw).unwrap()
}

fn code(s: &ExponentSet, field: &FieldSpec, opts: &EnumOptions, dist: bool) -> CodeReport {
    let g = build_generator(s, field).unwrap();
    if dist {
        weight_distribution(&g, field, opts).unwrap()
    } else {
        min_distance(&g, field, opts).unwrap()
    }
}

fn single_thread(strategy: Strategy) -> EnumOptions {
    let mut o = EnumOptions::with_strategy(strategy);
    o.threads = 1;
    o
}

const TRAPEZOID: &[(i64, i64)] = &[(0, 0), (3, 0), (1, 4), (2, 4)];
const SET_64_8_45: &[(i64, i64)] = &[(0, 4), (1, 1), (2, 0), (2, 3), (2, 5), (3, 7), (5, 2), (7, 4)];

fn criterion_1() -> Outcome {
    let mut parts = Vec::new();
    for (q, want) in [(7u32, [36, 4, 18]), (8, [49, 4, 36]), (9, [64, 4, 40])] {
        let field = field_for_order(q).unwrap();
        let start = Instant::now();
        let rep = code(&plane_set(q, TRAPEZOID), &field, &single_thread(Strategy::ScalarClass), false);
        let took = start.elapsed();
        let got = [rep.n, rep.k, rep.d];
        ensure(got == want, || format!("F_{q}: got {got:?}, expected {want:?}"))?;
        ensure(took < Duration::from_secs(1), || format!("F_{q} took {took:.2?}"))?;
        parts.push(format!("F_{q} {got:?} in {took:.2?}"));
    }
    Ok(parts.join(", "))
}

fn criterion_2() -> Outcome {
    let field = field_for_order(9).unwrap();
    let s = plane_set(9, SET_64_8_45);
    let expected_codewords = (9u64.pow(8) - 1) / 8;

    let start = Instant::now();
    let single = code(&s, &field, &single_thread(Strategy::ScalarClass), false);
    let t1 = start.elapsed();
    ensure(single.d == 45, || format!("single-threaded d = {}, expected 45", single.d))?;
    ensure(single.codewords == expected_codewords, || {
        format!("visited {} codewords, expected {expected_codewords}", single.codewords)
    })?;
    ensure(t1 < Duration::from_secs(600), || format!("single-threaded run took {t1:.2?}"))?;

    let mut par = EnumOptions::with_strategy(Strategy::Parallel);
    par.threads = 8;
    let start = Instant::now();
    let multi = code(&s, &field, &par, false);
    let t8 = start.elapsed();
    ensure(multi.d == 45, || format!("8-worker d = {}, expected 45", multi.d))?;
    ensure(t8 < Duration::from_secs(120), || format!("8-worker run took {t8:.2?}"))?;
    Ok(format!(
        "[{}, {}, {}], {} codewords; 1 thread {t1:.2?}, 8 workers {t8:.2?}",
        single.n, single.k, single.d, single.codewords
    ))
}

fn criterion_3() -> Outcome {
    let line = line_points(&pt(0, 0, 8), &Direction::new(pt(1, 4, 8)).unwrap()).unwrap();
    let listed: Vec<RingPoint> = [(0, 0), (1, 4), (2, 0), (3, 4), (4, 0), (5, 4), (6, 0), (7, 4)]
        .iter()
        .map(|&(a, b)| pt(a, b, 8))
        .collect();
    ensure(line.points() == listed.as_slice(), || format!("line points {:?}", line.points()))?;
    let through = lines_through(&pt(0, 0, 8), &pt(1, 4, 8)).unwrap();
    ensure(through.len() == 1 && through[0] == line, || {
        format!("{} lines through (0,0),(1,4)", through.len())
    })?;

    let nbrs: BTreeSet<RingPoint> = neighbors_of(&pt(0, 0, 8)).unwrap().into_iter().collect();
    let evens: BTreeSet<RingPoint> = (0..4)
        .flat_map(|a| (0..4).map(move |b| pt(2 * a, 2 * b, 8)))
        .collect();
    ensure(nbrs == evens, || format!("neighbors of (0,0): {nbrs:?}"))?;

    let mut counts = Vec::new();
    for (a, b, r, want) in [(4, 0, 8, 4usize), (2, 0, 8, 2), (2, 0, 6, 3)] {
        let n = lines_through(&pt(0, 0, r), &pt(a, b, r)).unwrap().len();
        ensure(n == want, || format!("(0,0),({a},{b}) mod {r}: {n} lines, expected {want}"))?;
        counts.push(format!("({a},{b}) mod {r}: {n}"));
    }
    Ok(format!("8-point line matches, 16 neighbors, line counts {}", counts.join(", ")))
}

fn criterion_4() -> Outcome {
    let mut pairs = 0usize;
    for r in (2..=9u32).filter(|&r| is_prime_power(r)) {
        let pts: Vec<RingPoint> = (0..r as i64)
            .flat_map(|a| (0..r as i64).map(move |b| pt(a, b, r)))
            .collect();
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                let formula = count_lines_prime_power(&pts[i], &pts[j]).unwrap() as usize;
                let actual = lines_through(&pts[i], &pts[j]).unwrap().len();
                ensure(formula == actual, || {
                    format!("{} {} mod {r}: formula {formula}, lines {actual}", pts[i], pts[j])
                })?;
                pairs += 1;
            }
        }
    }
    let (p, q) = (pt(0, 0, 6), pt(2, 0, 6));
    let formula = 6 / element_order(&q.sub(&p)).unwrap() as usize;
    let actual = lines_through(&p, &q).unwrap().len();
    ensure(formula != actual, || format!("Z/6 pair: formula {formula} equals line count"))?;
    ensure(count_lines_prime_power(&p, &q).is_err(), || "formula accepted r = 6".into())?;
    Ok(format!(
        "{pairs} pairs over r in {{2,3,4,5,7,8,9}} agree; (0,0),(2,0) mod 6 gives formula {formula} vs {actual} lines"
    ))
}

fn emitted_bounds(s: &ExponentSet) -> Vec<u64> {
    let scan = bad_configuration_scan(s, ScanOptions { frobenius: true }).unwrap();
    let mut all: Vec<u64> = scan.reports.iter().map(|r| r.bound).collect();
    all.extend(neighbor_bound(s).unwrap().map(|r| r.bound));
    all.extend(parallelogram_bound(s).unwrap().map(|r| r.bound));
    all
}

fn random_plane_set(rng: &mut Rng, q: u32, k: usize) -> ExponentSet {
    let r = (q - 1) as u64;
    let mut pts: Vec<(i64, i64)> = Vec::new();
    while pts.len() < k {
        let p = (rng.below(r) as i64, rng.below(r) as i64);
        if !pts.contains(&p) {
            pts.push(p);
        }
    }
    plane_set(q, &pts)
}

fn criterion_5() -> Outcome {
    let mut problems = Vec::new();
    let nb = |pts: &[(i64, i64)]| neighbor_bound(&plane_set(9, pts)).unwrap().map(|r| r.bound);
    let z8 = nb(&[(0, 0), (4, 0)]);
    if z8 != Some(32) {
        problems.push(format!("neighbor bound for (0,0),(4,0) is {z8:?}, expected 32"));
    }
    let order4 = nb(&[(0, 0), (2, 4)]);
    if order4 != Some(48) {
        problems.push(format!("neighbor bound for an order-4 difference is {order4:?}, expected 48"));
    }
    let par = parallelogram_bound(&plane_set(9, SET_64_8_45)).unwrap().map(|r| r.bound);
    if par != Some(49) {
        problems.push(format!("parallelogram bound on the [64,8,45] set is {par:?}, expected 49"));
    }

    let mut rng = Rng::new(0x5eed_0005);
    let qs = [5u32, 7, 8, 9];
    let mut checked = 0;
    for i in 0..200 {
        let q = qs[i % qs.len()];
        let k = 2 + rng.below(4) as usize;
        let s = random_plane_set(&mut rng, q, k);
        let field = field_for_order(q).unwrap();
        let d = code(&s, &field, &single_thread(Strategy::ScalarClass), false).d as u64;
        if let Some(b) = emitted_bounds(&s).into_iter().find(|&b| d > b) {
            problems.push(format!("d = {d} exceeds bound {b} for {:?} over F_{q}", s.points()));
        }
        checked += 1;
    }
    if problems.is_empty() {
        Ok(format!("32, 48, 49 emitted; {checked} random sets respect every bound"))
    } else {
        Err(format!("{}; {checked} random sets checked", problems.join("; ")))
    }
}

fn criterion_6() -> Outcome {
    let mut problems = Vec::new();
    let mut decompositions = 0;
    for q in [4u32, 5, 7, 8, 9] {
        let field = field_for_order(q).unwrap();
        let r = q - 1;
        for n in divisors(r) {
            for w in b_vectors(r) {
                let e = w.point().scale(n);
                let (a, b) = (e.coords()[0] as i64, e.coords()[1] as i64);
                decompositions += 1;
                if !verify_binomfact(a, b, n, &w, &field).unwrap() {
                    problems.push(format!("binomial factorization fails for q={q}, N={n}, w={w}"));
                }
            }
        }
    }

    let f9 = field_for_order(9).unwrap();
    let one = FieldElement::ONE;
    let zeros = |p: &TorusPolynomial| p.evaluate(2, &f9).iter().filter(|x| x.is_zero()).count();

    // distinct nonzero β with β1 + β2 + β3 = 0
    let (b1, b2) = (one, FieldElement::Pow(1));
    let b3 = f9.neg(f9.add(b1, b2));
    let e2 = f9.add(f9.add(f9.mul(b1, b2), f9.mul(b1, b3)), f9.mul(b2, b3));
    let e3 = f9.mul(f9.mul(b1, b2), b3);
    let collinear = TorusPolynomial::monomial(vec![1, 3], one).plus(vec![3, 1], e2).plus(vec![0, 0], e3);
    let factors: Vec<(TorusPolynomial, u64)> = [b1, b2, b3]
        .iter()
        .map(|&b| (TorusPolynomial::monomial(vec![3, 1], one).plus(vec![0, 0], b), 1))
        .collect();
    let collinear_ok = identity_holds(&collinear, &factors, 2, &f9);
    let collinear_zeros = zeros(&collinear);
    if !collinear_ok || collinear_zeros != 24 {
        problems.push(format!(
            "collinear product identity {collinear_ok}, {collinear_zeros} zeros (expected 24)"
        ));
    }

    // x^9 + y^9 + x^3 y^6 = (x + αy)^3 (x + α^3 y)^3 (x + α^4 y)^3
    let frob = TorusPolynomial::monomial(vec![9, 0], one).plus(vec![0, 9], one).plus(vec![3, 6], one);
    let cube = |j: u32| (TorusPolynomial::monomial(vec![1, 0], one).plus(vec![0, 1], FieldElement::Pow(j)), 3u64);
    let printed: Vec<_> = [1, 3, 4].map(cube).to_vec();
    let mismatches = (0..64)
        .filter(|&col| {
            let f = torgeo::torcode::torus_point(col, 9, 2);
            let rhs = printed
                .iter()
                .fold(one, |acc, (p, e)| f9.mul(acc, f9.pow(p.eval(&f, &f9), *e)));
            frob.eval(&f, &f9) != rhs
        })
        .count();
    if mismatches != 0 {
        problems.push(format!(
            "Frobenius identity with (x+αy)^3(x+α^3y)^3(x+α^4y)^3 fails at {mismatches} of 64 torus points"
        ));
    }

    if problems.is_empty() {
        Ok(format!(
            "{decompositions} binomial factorizations, collinear product (24 zeros) and Frobenius identity hold"
        ))
    } else {
        Err(format!("{}; {decompositions} binomial factorizations checked", problems.join("; ")))
    }
}

fn criterion_7() -> Outcome {
    let mut rng = Rng::new(0x5eed_0007);
    let mut pairs = 0;
    for q in [8u32, 9] {
        let r = q - 1;
        let field = field_for_order(q).unwrap();
        let group = gl2(r);
        for _ in 0..50 {
            let k = 1 + rng.below(4) as usize;
            let s = random_plane_set(&mut rng, q, k);
            let m = group[rng.below(group.len() as u64) as usize];
            let v = pt(rng.below(r as u64) as i64, rng.below(r as u64) as i64, r);
            let t = AglMap::plane(m, v).unwrap();
            let image = ExponentSet::from_points(q, apply_agl(&t, s.points()).unwrap()).unwrap();
            let opts = single_thread(Strategy::ScalarClass);
            let a = code(&s, &field, &opts, true).weight_distribution;
            let b = code(&image, &field, &opts, true).weight_distribution;
            ensure(a == b, || format!("F_{q}: {:?} and its image {:?} differ", s.points(), image.points()))?;
            pairs += 1;
        }
    }
    Ok(format!("{pairs} (S, T(S)) pairs over F_8 and F_9 have identical weight distributions"))
}

fn random_set(rng: &mut Rng, q: u32, m: usize, k: usize) -> ExponentSet {
    let r = (q - 1) as i64;
    let mut pts: Vec<Vec<i64>> = Vec::new();
    while pts.len() < k {
        let p: Vec<i64> = (0..m).map(|_| rng.below(r as u64) as i64).collect();
        if !pts.contains(&p) {
            pts.push(p);
        }
    }
    ExponentSet::new(q, m, &pts).unwrap()
}

fn criterion_8() -> Outcome {
    let mut rng = Rng::new(0x5eed_0008);
    let mut instances = 0;
    let mut par = EnumOptions::with_strategy(Strategy::Parallel);
    par.threads = 4;
    for q in [3u32, 4, 5, 7, 8, 9, 11, 13, 16] {
        let field = field_for_order(q).unwrap();
        let dims: &[usize] = if q <= 5 { &[1, 2, 3] } else { &[1, 2] };
        for &m in dims {
            let cells = ((q - 1) as u64).pow(m as u32);
            let kmax = (1..=cells as usize).take_while(|&k| (q as u64).pow(k as u32) <= 1_000_000).last().unwrap();
            let mut ks: Vec<usize> = vec![1, kmax.div_ceil(2), kmax];
            ks.dedup();
            for k in ks {
                let s = random_set(&mut rng, q, m, k);
                let full = code(&s, &field, &single_thread(Strategy::Full), true);
                let scalar = code(&s, &field, &single_thread(Strategy::ScalarClass), true);
                let parallel = code(&s, &field, &par, true);
                ensure(
                    full.d == scalar.d
                        && full.d == parallel.d
                        && full.weight_distribution == scalar.weight_distribution
                        && full.weight_distribution == parallel.weight_distribution,
                    || format!("strategies disagree on {:?} over F_{q}", s.points()),
                )?;
                instances += 1;
            }
        }
    }
    let mut rs = 0;
    for q in [5u32, 7, 8, 9] {
        let field = field_for_order(q).unwrap();
        for l in 1..=(q - 2) as usize {
            let raw: Vec<Vec<i64>> = (0..l as i64).map(|e| vec![e]).collect();
            let s = ExponentSet::new(q, 1, &raw).unwrap();
            let d = code(&s, &field, &single_thread(Strategy::ScalarClass), false).d;
            ensure(d == (q as usize) - l, || format!("RS q={q} l={l}: d = {d}, expected {}", q as usize - l))?;
            rs += 1;
        }
    }
    Ok(format!("{instances} instances agree across full/scalar-class/parallel; {rs} RS codes have d = q - l"))
}

fn strip_timestamp(line: &str) -> &str {
    match line.rfind(",\"timestamp\":") {
        Some(i) => &line[..i],
        None => line,
    }
}

fn criterion_9() -> Outcome {
    let dir = tempfile::TempDir::new().map_err(|e| e.to_string())?;
    let run = |name: &str| -> Result<String, String> {
        let path = dir.path().join(name);
        let status = Command::new(env!("CARGO_BIN_EXE_torgeo"))
            .args(["search", "--q", "9", "--m", "2", "--k", "5", "--seed", "20260601", "--iters", "60", "--ledger"])
            .arg(&path)
            .env_remove("TORGEO_BUDGET")
            .output()
            .map_err(|e| e.to_string())?;
        if !status.status.success() {
            return Err(format!("search exited with {:?}", status.status.code()));
        }
        std::fs::read_to_string(&path).map_err(|e| e.to_string())
    };
    let (a, b) = (run("first.jsonl")?, run("second.jsonl")?);
    let la: Vec<&str> = a.lines().map(strip_timestamp).collect();
    let lb: Vec<&str> = b.lines().map(strip_timestamp).collect();
    ensure(!la.is_empty(), || "empty ledger".into())?;
    ensure(la.iter().all(|l| !l.contains("timestamp")), || "timestamp not last field".into())?;
    ensure(la == lb, || "ledgers differ".into())?;
    Ok(format!("{} ledger records identical across two runs", la.len()))
}

fn main() {
    let mut gate = Gate { failures: 0, total: 0 };
    let secs = Duration::from_secs;
    gate.run(1, "trapezoid parameters over F_7, F_8, F_9", secs(3), criterion_1);
    gate.run(2, "[64,8,45] set over F_9", secs(600 + 120), criterion_2);
    gate.run(3, "geometry regression mod 8 and mod 6", secs(1), criterion_3);
    gate.run(4, "line-count index formula", secs(30), criterion_4);
    gate.run(5, "distance bounds", secs(300), criterion_5);
    gate.run(6, "factorization identities on the F_9 torus", secs(30), criterion_6);
    gate.run(7, "monomial equivalence preserves weight distributions", secs(120), criterion_7);
    gate.run(8, "enumeration strategies agree; Reed-Solomon distance", secs(120), criterion_8);
    gate.run(9, "search ledger determinism", secs(120), criterion_9);
    println!("acceptance: {} of {} criteria passed", gate.total - gate.failures, gate.total);
    if gate.failures > 0 {
        std::process::exit(1);
    }
}
