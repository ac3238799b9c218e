//! Acceptance criteria, one line each. Run with `--nocapture` to see them.

use std::sync::OnceLock;
use std::time::{Duration, Instant};

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};

use regmaps::algebra::{smith_normal_form, IntMatrix};
use regmaps::constructors::*;
use regmaps::families::*;
use regmaps::homology::*;
use regmaps::mapcore::*;
use regmaps::permgrp::{odd_core, odd_core_with, quotient_with, Perm, PermGroup, Sylow2Kind};
use regmaps::Error;

/// Criteria that cannot be met as stated; see the decisions ledger.
const KNOWN_UNATTAINABLE: &[u32] = &[6];

struct Outcome {
    id: u32,
    name: &'static str,
    pass: bool,
    detail: String,
    elapsed: Duration,
}

fn run(id: u32, name: &'static str, limit: Duration, f: impl FnOnce() -> (bool, String)) -> Outcome {
    let t0 = Instant::now();
    let (ok, detail) = f();
    let elapsed = t0.elapsed();
    let pass = ok && elapsed <= limit;
    let detail = if ok && !pass { format!("{detail}; over time limit {limit:?}") } else { detail };
    let o = Outcome { id, name, pass, detail, elapsed };
    println!(
        "ACCEPTANCE {:>2} {} {} ({:.2?}): {}",
        o.id,
        if o.pass { "PASS" } else { "FAIL" },
        o.name,
        o.elapsed,
        o.detail
    );
    o
}

fn big(x: u64) -> BigUint {
    BigUint::from(x)
}

fn neg_chi(order: u64, m: u64, n: u64) -> i64 {
    -euler_characteristic(&big(order), m, n).unwrap().to_i64().unwrap()
}

// 1

fn euler_tables() -> (bool, String) {
    let mut bad = Vec::new();
    let instances = table_instances();
    for t in &instances {
        let c = check_instance(t);
        if !c.pass {
            bad.push(format!("{} gave {} want {}", c.label, c.neg_chi, c.expected));
        }
    }
    for (name, got, want) in group_spot_checks() {
        if got != want {
            bad.push(format!("{name}: {got} != {want}"));
        }
    }
    // numerology of the two externally found groups
    if neg_chi(60 * 729, 3, 15) != 2187 {
        bad.push("A2 numerology".into());
    }
    if neg_chi(120 * 125, 20, 30) != 3125 {
        bad.push("B2 numerology".into());
    }
    let rows: std::collections::BTreeSet<RowId> = instances.iter().map(|t| t.row.id).collect();
    if rows.len() != RowId::ALL.len() {
        bad.push(format!("only {} of {} rows instantiated", rows.len(), RowId::ALL.len()));
    }
    (bad.is_empty(), format!("{} row instances + 6 named checks; failures: {bad:?}", instances.len()))
}

// 2

fn census_oracle() -> (bool, String) {
    let mut notes = Vec::new();
    let mut ok = true;
    let mut expect = |what: &str, got: usize, want: usize| {
        if got != want {
            ok = false;
        }
        notes.push(format!("{what}={got}"));
    };
    let psl5 = classify_maps_for_group(&pgl2(5, LinearKind::Psl).unwrap()).unwrap();
    expect("PSL2(5){5,5}", psl5.maps_up_to_duality(5, 5), 1);
    // the {3,5} configurations exist but are rejected from the -r^d
    // classification (positive characteristic)
    let c35: Vec<_> = psl5.classes.iter().filter(|c| (c.m, c.n) == (3, 5) || (c.m, c.n) == (5, 3)).collect();
    let rejected = !c35.is_empty() && c35.iter().all(|c| c.chi > 0);
    let in_hyp = psl5.hyperbolic().iter().any(|c| c.m == 3 || c.n == 3);
    expect("PSL2(5){3,5} rejected sets", usize::from(rejected && !in_hyp), 1);
    let pgl5 = classify_maps_for_group(&pgl2(5, LinearKind::Pgl).unwrap()).unwrap();
    expect("PGL2(5){4,5}", pgl5.maps_up_to_duality(4, 5), 1);
    expect("PGL2(5){4,6}", pgl5.maps_up_to_duality(4, 6), 1);
    let pgl7 = classify_maps_for_group(&pgl2(7, LinearKind::Pgl).unwrap()).unwrap();
    expect("PGL2(7){3,8}", pgl7.maps_up_to_duality(3, 8), 2);
    let psl13 = classify_maps_for_group(&pgl2(13, LinearKind::Psl).unwrap()).unwrap();
    expect("PSL2(13){3,7}", psl13.maps_up_to_duality(3, 7), 1);
    expect("PSL2(13){3,13}", psl13.maps_up_to_duality(3, 13), 1);
    for (name, c, m, n, chi) in [
        ("PSL2(5)", &psl5, 5, 5, -3),
        ("PGL2(5)", &pgl5, 4, 6, -5),
        ("PGL2(7)", &pgl7, 3, 8, -7),
        ("PSL2(13)", &psl13, 3, 13, -49),
    ] {
        if c.of_type(m, n).iter().any(|k| k.chi != chi) {
            ok = false;
            notes.push(format!("{name} chi mismatch"));
        }
    }
    (ok, notes.join(" "))
}

// 3

fn soluble() -> (bool, String) {
    let mut notes = Vec::new();
    let mut ok = true;
    let h2 = build_h2(3, 5).unwrap();
    ok &= h2.order() == 60 && h2.chi() == -7;
    notes.push(format!("H2(3,5): |G|={} chi={}", h2.order(), h2.chi()));
    let h3 = build_h3(15).unwrap();
    ok &= h3.order() == 120 && h3.chi() == -11;
    notes.push(format!("H3(15): |G|={} chi={}", h3.order(), h3.chi()));

    let d4 = dihedral_group(4).unwrap();
    let specs = search_module_actions(&d4, 3, 2).unwrap();
    let e9 = specs.iter().find_map(|s| {
        let g = build_module_extension(&d4, s).ok()?;
        let t = find_triples(&g, 6, 4, 1).ok()?.triples.into_iter().next()?;
        Some(t)
    });
    match e9 {
        Some(t) => {
            ok &= t.order() == 72 && t.chi() == -3 && (t.m(), t.n()) == (6, 4);
            notes.push(format!("E9:D4 ({} actions): |G|={} (2,6,4)* chi={}", specs.len(), t.order(), t.chi()));
        }
        None => {
            ok = false;
            notes.push("E9:D4: no (2,6,4)* triple".into());
        }
    }

    let kg = KernelGroup::new(build_heisenberg()).unwrap();
    let he = kg.actions(&d4).unwrap().iter().find_map(|imgs| {
        let g = kg.extension(&d4, imgs).ok()?;
        find_triple_either(&g, 4, 6).ok()?.filter(|t| t.chi() == -9)
    });
    match he {
        Some(t) => {
            ok &= t.order() == 216 && t.chi() == -9;
            notes.push(format!("He3:D4: |G|={} {{4,6}} chi={}", t.order(), t.chi()));
        }
        None => {
            ok = false;
            notes.push("He3:D4: no {4,6} triple with chi=-9".into());
        }
    }
    (ok, notes.join("; "))
}

// 4

fn smooth_homology() -> (bool, String) {
    let mut notes = Vec::new();
    let mut ok = true;
    for (q, m, n, rank) in [(5u64, 5u64, 4u64, 4usize), (7, 3, 8, 8)] {
        let t0 = Instant::now();
        let g = pgl2(q, LinearKind::Pgl).unwrap();
        let t = find_triples(&g, m, n, 1).unwrap().triples.remove(0);
        let k = smooth_kernel_check(&t).unwrap();
        let good = k.pass && k.torsion == vec![2] && k.free_rank == rank && t0.elapsed() < Duration::from_secs(60);
        ok &= good;
        notes.push(format!("PGL2({q}) (2,{m},{n})*: C2^{} x Z^{}", k.torsion.len(), k.free_rank));
    }
    (ok, notes.join("; "))
}

// 5

fn branched_homology() -> (bool, String) {
    let mut notes = Vec::new();
    let mut ok = true;
    for (q, m, n, r, want) in [(5u64, 5u64, 4u64, 3u64, 31u64), (7, 7, 8, 3, 85), (9, 5, 8, 3, 181), (7, 3, 8, 7, 85)] {
        let g = pgl2(q, LinearKind::Pgl).unwrap();
        let t = find_triples(&g, m, n, 1).unwrap().triples.remove(0);
        let b = branched_rank_check(&t, r).unwrap();
        ok &= b.pass && b.expected == want && b.computed as u64 == want;
        notes.push(format!("PGL2({q}) (2,{m},{n})* r={r}: expected={} computed={}", b.expected, b.computed));
    }
    (ok, notes.join("; "))
}

// 6

fn congruences() -> (bool, String) {
    let mut ok = true;
    let mut notes = Vec::new();
    for row in CONGRUENCE_ROWS {
        let c = verify_congruence_row(row, &SearchWindow::new()).unwrap();
        let long = c.window.1 - c.window.0 + 1 >= 100;
        ok &= c.pass && long;
        if c.pass {
            notes.push(format!("{row} ok [{},{}]", c.window.0, c.window.1));
        } else {
            let first_missing: Vec<_> = c.missing.iter().take(4).collect();
            let first_extra: Vec<_> = c.extra.iter().take(4).collect();
            notes.push(format!(
                "{row} MISMATCH claimed '{}': scan misses {first_missing:?}.., scan adds {first_extra:?}..",
                c.claimed
            ));
        }
    }
    (ok, notes.join("; "))
}

// 7

fn pgl_scan() -> (bool, String) {
    let small = scan_pgl_cases(121).unwrap();
    let large = scan_pgl_cases(1000).unwrap();
    let got: Vec<(u64, (u64, u64), u64)> = small.iter().map(|c| (c.q, c.type_pair, c.r)).collect();
    let want = vec![(7, (3, 8), 7), (5, (4, 6), 5), (5, (4, 5), 3)];
    let ok = got == want && small.iter().all(|c| c.d == 1) && large == small;
    (ok, format!("q<=121: {got:?}; q<=1000 adds {}", large.len() as i64 - small.len() as i64))
}

// 8

fn corollary() -> (bool, String) {
    let r = verify_corollary_table();
    let numerology_ok = r
        .rows
        .iter()
        .filter(|x| x.evidence == Evidence::Numerology)
        .all(|x| x.pass && x.formula_order == Some(x.order));
    let ok = r.rows.len() == 22 && r.constructed >= 12 && r.mismatches.is_empty() && numerology_ok;
    (ok, format!("{} rows, {} constructed, {} numerology, mismatches {:?}", r.rows.len(), r.constructed, r.numerology, r.mismatches))
}

// 9

struct PoolGroup {
    name: String,
    group: PermGroup,
    census: Census,
}

fn pool() -> &'static Vec<PoolGroup> {
    static POOL: OnceLock<Vec<PoolGroup>> = OnceLock::new();
    POOL.get_or_init(|| {
        let mut gs: Vec<(String, PermGroup)> = vec![
            ("PSL2(5)".into(), pgl2(5, LinearKind::Psl).unwrap()),
            ("PGL2(5)".into(), pgl2(5, LinearKind::Pgl).unwrap()),
            ("PSL2(7)".into(), pgl2(7, LinearKind::Psl).unwrap()),
            ("PGL2(7)".into(), pgl2(7, LinearKind::Pgl).unwrap()),
            ("PSL2(9)".into(), pgl2(9, LinearKind::Psl).unwrap()),
            ("H2(3,5)".into(), build_h2(3, 5).unwrap().group().clone()),
            ("H2(3,7)".into(), build_h2(3, 7).unwrap().group().clone()),
            ("H3(9)".into(), build_h3(9).unwrap().group().clone()),
            ("H3(15)".into(), build_h3(15).unwrap().group().clone()),
            ("H1(6)".into(), build_h1(6).unwrap().group().clone()),
            ("D12".into(), dihedral_group(12).unwrap()),
        ];
        for (j, p, k) in [(4u32, 3u64, 2u32), (2, 3, 2), (10, 3, 2), (4, 3, 3)] {
            let h = dihedral_group(j).unwrap();
            for (i, s) in search_module_actions(&h, p, k).unwrap().iter().enumerate().take(3) {
                gs.push((format!("E{}^{k}:D{j}#{i}", p), build_module_extension(&h, s).unwrap()));
            }
        }
        let kg = KernelGroup::new(build_heisenberg()).unwrap();
        for j in [2u32, 4] {
            let h = dihedral_group(j).unwrap();
            for (i, imgs) in kg.actions(&h).unwrap().iter().enumerate().take(3) {
                gs.push((format!("He3:D{j}#{i}"), kg.extension(&h, imgs).unwrap()));
            }
        }
        gs.into_iter()
            .filter(|(_, g)| g.order().unwrap() <= 500)
            .map(|(name, group)| {
                let census = classify_maps_for_group(&group).unwrap();
                PoolGroup { name, group, census }
            })
            .collect()
    })
}

fn all_classes() -> Vec<(usize, usize)> {
    pool()
        .iter()
        .enumerate()
        .flat_map(|(g, p)| (0..p.census.classes.len()).map(move |c| (g, c)))
        .collect()
}

fn bareiss_det(rows: &[Vec<i64>]) -> BigInt {
    let n = rows.len();
    let mut a: Vec<Vec<BigInt>> = rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                Some(i) => {
                    a.swap(i, k);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i][j] = (&a[i][j] * &a[k][k] - &a[i][k] * &a[k][j]) / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    sign * &a[n - 1][n - 1]
}

fn prop_line(name: &str, cases: u32, r: Result<(), String>) -> (String, bool) {
    match r {
        Ok(()) => (format!("{name}: {cases} ok"), true),
        Err(e) => (format!("{name}: FAILED {e}"), false),
    }
}

fn properties() -> (bool, String) {
    const CASES: u32 = 1000;
    let cfg = || Config { cases: CASES, failure_persistence: None, ..Config::default() };
    let mut lines = Vec::new();
    let mut ok = true;
    let classes = all_classes();
    let nclasses = classes.len();

    // duality invariance of chi, on census triples and on random types
    let r = TestRunner::new(cfg())
        .run(&(0..nclasses, 2u64..80, 2u64..80, 1u64..5000), |(ci, m, n, k)| {
            let (g, c) = classes[ci];
            let t = &pool()[g].census.classes[c].triple;
            let d = t.dual();
            prop_assert_eq!(d.chi(), t.chi());
            prop_assert_eq!((d.m(), d.n()), (t.n(), t.m()));
            let order = big(2 * m.lcm(&n) * k);
            let x = euler_characteristic(&order, m, n).ok();
            let y = euler_characteristic(&order, n, m).ok();
            prop_assert_eq!(x, y);
            Ok(())
        })
        .map_err(|e| e.to_string());
    let (l, p) = prop_line("duality", CASES, r);
    lines.push(l);
    ok &= p;

    // both Euler forms against V - E + F
    let r = TestRunner::new(cfg())
        .run(&(2u64..300, 2u64..300, 1u64..100_000), |(m, n, k)| {
            let order = 2 * m.lcm(&n) * k;
            let g = BigRational::from_integer(BigInt::from(order));
            let vef = &g / BigInt::from(2 * n) - &g / BigInt::from(4) + &g / BigInt::from(2 * m);
            match euler_characteristic(&big(order), m, n) {
                Ok(chi) => prop_assert_eq!(BigRational::from_integer(chi), vef),
                Err(_) => prop_assert!(!vef.is_integer()),
            }
            Ok(())
        })
        .map_err(|e| e.to_string());
    let (l, p) = prop_line("euler forms", CASES, r);
    lines.push(l);
    ok &= p;

    // odd core of G/O(G) is trivial
    let npool = pool().len();
    let r = TestRunner::new(cfg())
        .run(&(0..npool + 1, 1u32..120), |(gi, k)| {
            let g = if gi == npool { dihedral_group(k).unwrap() } else { pool()[gi].group.clone() };
            let table = std::sync::Arc::new(g.elements().unwrap());
            let o = odd_core_with(&g, &table).unwrap();
            prop_assert!(o.order().unwrap() % 2 == 1);
            let q = quotient_with(table.clone(), &o).unwrap();
            let oq = odd_core(&q.group).unwrap();
            prop_assert_eq!(oq.order().unwrap(), 1);
            Ok(())
        })
        .map_err(|e| e.to_string());
    let (l, p) = prop_line("odd core idempotence", CASES, r);
    lines.push(l);
    ok &= p;

    // Sylow 2-subgroup of every odd-chi triple group is Klein or dihedral
    let odd: Vec<(usize, usize)> =
        classes.iter().copied().filter(|&(g, c)| pool()[g].census.classes[c].chi % 2 != 0).collect();
    let kinds: Vec<Sylow2Kind> =
        odd.iter().map(|&(g, c)| sylow2_kind(&pool()[g].census.classes[c].triple).unwrap()).collect();
    let r = TestRunner::new(cfg())
        .run(&(0..odd.len()), |i| {
            prop_assert!(matches!(kinds[i], Sylow2Kind::Klein | Sylow2Kind::Dihedral), "{:?}", odd[i]);
            Ok(())
        })
        .map_err(|e| e.to_string());
    let (l, p) = prop_line(&format!("sylow2 klein-or-dihedral ({} odd-chi classes)", odd.len()), CASES, r);
    lines.push(l);
    ok &= p;

    // SNF: divisibility chain, rank and |det|
    let mat = (1usize..7, 1usize..7).prop_flat_map(|(r, c)| proptest::collection::vec(proptest::collection::vec(-20i64..21, c), r));
    let r = TestRunner::new(cfg())
        .run(&mat, |rows| {
            let m = IntMatrix::from_rows(&rows).unwrap();
            let s = smith_normal_form(&m);
            let f = &s.invariant_factors;
            prop_assert!(f.windows(2).all(|w| (&w[1] % &w[0]).is_zero()));
            prop_assert_eq!(s.rank() + s.free_rank, m.cols());
            if rows.len() == rows[0].len() {
                let det = bareiss_det(&rows);
                let prod: BigUint = f.iter().product();
                if det.is_zero() {
                    prop_assert!(s.rank() < rows.len());
                } else {
                    prop_assert_eq!(s.rank(), rows.len());
                    prop_assert_eq!(BigInt::from(prod), det.abs());
                }
            }
            Ok(())
        })
        .map_err(|e| e.to_string());
    let (l, p) = prop_line("snf chain and det", CASES, r);
    lines.push(l);
    ok &= p;

    // constructor search against the census
    let types: Vec<(usize, u64, u64)> = (0..npool)
        .flat_map(|g| {
            let table = pool()[g].group.elements().unwrap();
            let mut orders: Vec<u64> = (0..table.len() as u32).map(|x| table.order_of(x) as u64).collect();
            orders.sort();
            orders.dedup();
            let orders: Vec<u64> = orders.into_iter().filter(|&o| o >= 2).collect();
            orders.iter().flat_map(|&m| orders.iter().map(move |&n| (g, m, n))).collect::<Vec<_>>()
        })
        .collect();
    let r = TestRunner::new(cfg())
        .run(&(0..types.len()), |i| {
            let (g, m, n) = types[i];
            let p = &pool()[g];
            let found = find_triples(&p.group, m, n, 1).unwrap();
            prop_assert!(found.exhaustive || !found.triples.is_empty());
            let listed = p.census.of_type(m, n);
            prop_assert_eq!(found.triples.is_empty(), listed.is_empty(), "{} ({},{})", p.name, m, n);
            if let Some(t) = found.triples.first() {
                let mut hit = false;
                for c in &listed {
                    if triples_equivalent(&c.triple, t).unwrap() {
                        hit = true;
                    }
                }
                prop_assert!(hit, "{} ({},{}) triple not in census", p.name, m, n);
            }
            Ok(())
        })
        .map_err(|e| e.to_string());
    let (l, p) = prop_line(&format!("constructor/census oracle ({} groups)", npool), CASES, r);
    lines.push(l);
    ok &= p;

    (ok, lines.join("; "))
}

// 10

fn negative_controls() -> (bool, String) {
    let mut notes = Vec::new();
    let mut ok = true;

    // D_5 x C_2: the full triangle-group triple of the orientable {2,5}
    // dihedron. Find a generating triple whose rotation subgroup is proper.
    let d5 = dihedral_group(5).unwrap();
    let (s, t) = (d5.generators()[0].clone(), d5.generators()[1].clone());
    let z = Perm::from_cycles(2, &[&[0, 1]]).unwrap();
    let (e5, e2) = (Perm::identity(5), Perm::identity(2));
    let g = PermGroup::new(7, vec![s.direct_sum(&e2), t.direct_sum(&e2), e5.direct_sum(&z)]).unwrap();
    let table = g.elements().unwrap();
    let inv = table.involutions();
    let mut orientable = None;
    'outer: for &a in &inv {
        for &b in &inv {
            for &c in &inv {
                let (pa, pb, pc) = (table.perm(a), table.perm(b), table.perm(c));
                if pa.mul(pc).order() > 2 || !table.generates(&[a, b, c]) {
                    continue;
                }
                if !table.generates(&[table.mul(a, b), table.mul(b, c)]) {
                    orientable = Some((pa.clone(), pb.clone(), pc.clone()));
                    break 'outer;
                }
            }
        }
    }
    match orientable {
        Some((a, b, c)) => {
            let r = verify_star_group(&g, &a, &b, &c);
            let good = matches!(r, Err(Error::Orientable));
            ok &= good;
            notes.push(format!("D5xC2 orientable triple rejected: {good}"));
        }
        None => {
            ok = false;
            notes.push("no orientable triple found in D5xC2".into());
        }
    }

    // a PSL2(5) triple viewed inside PGL2(5) does not generate
    let psl = pgl2(5, LinearKind::Psl).unwrap();
    let pgl = pgl2(5, LinearKind::Pgl).unwrap();
    let t = find_triples(&psl, 5, 5, 1).unwrap().triples.remove(0);
    let r = verify_star_group(&pgl, t.a(), t.b(), t.c());
    let good = matches!(r, Err(Error::NotGenerating(_)));
    ok &= good;
    notes.push(format!("non-generating triple rejected: {good}"));

    let good = cover_characteristic(-3, 2).is_err() && cover_characteristic(-3, 4).is_err();
    ok &= good;
    notes.push(format!("even s rejected: {good}"));
    (ok, notes.join("; "))
}

#[test]
fn acceptance() {
    let s = Duration::from_secs;
    let outcomes = vec![
        run(1, "euler/table suite", s(1), euler_tables),
        run(2, "census oracle", s(300), census_oracle),
        run(3, "soluble constructions", s(120), soluble),
        run(4, "homology smooth", s(120), smooth_homology),
        run(5, "homology branched", s(600), branched_homology),
        run(6, "congruence rows", s(60), congruences),
        run(7, "pgl scan", s(10), pgl_scan),
        run(8, "corollary verifier", s(600), corollary),
        run(9, "property suites", s(900), properties),
        run(10, "negative controls", s(60), negative_controls),
    ];
    let failed: Vec<u32> = outcomes.iter().filter(|o| !o.pass).map(|o| o.id).collect();
    let passed = outcomes.len() - failed.len();
    println!("ACCEPTANCE summary: {passed}/{} pass; failing: {failed:?}", outcomes.len());
    let unexpected: Vec<&u32> = failed.iter().filter(|id| !KNOWN_UNATTAINABLE.contains(id)).collect();
    assert!(unexpected.is_empty(), "criteria failed: {unexpected:?}");
    for id in KNOWN_UNATTAINABLE {
        assert!(failed.contains(id), "criterion {id} now passes; update KNOWN_UNATTAINABLE");
    }
}
