//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

mod common;

use std::time::{Duration, Instant};

use num_bigint::BigInt;
use proptest::strategy::{Strategy, ValueTree};
use proptest::test_runner::TestRunner;

use common::{block_sum, smith_by_minors};
use k3mirror::diaggrp::{dual_group, full_group, subgroups_between};
use k3mirror::fixedlocus::{curve_genus, resolve_fixed_locus};
use k3mirror::invpoly::{enumerate_form_p, transpose, weights_from_matrix, InvertiblePolynomial};
use k3mirror::lattices::{check_row, classification, is_mirror_hyperbolic, make, verify_mirror_decomposition, MIRROR_EXCLUSIONS};
use k3mirror::pipeline::{bounding_groups, golden, group_from_generators, render, verify_tables, Format, VerifyReport};
use k3mirror::weights::{admissible_families, normalize, PRIMES};
use k3mirror::Error;

struct Outcome {
    ok: bool,
    detail: String,
}

fn pass(detail: impl Into<String>) -> Outcome {
    Outcome { ok: true, detail: detail.into() }
}

fn fail(detail: impl Into<String>) -> Outcome {
    Outcome { ok: false, detail: detail.into() }
}

fn timed(p: u32) -> (VerifyReport, Duration) {
    let start = Instant::now();
    let report = verify_tables(p).expect("verify_tables runs");
    (report, start.elapsed())
}

fn table_outcome(report: &VerifyReport, elapsed: Duration, limit: Duration) -> Option<String> {
    if !report.is_clean() {
        return Some(format!("p={}: {} mismatches, first {:?}", report.prime, report.mismatches.len(), report.mismatches[0]));
    }
    if report.pairs != report.golden_rows {
        return Some(format!("p={}: {} pairs vs {} golden rows", report.prime, report.pairs, report.golden_rows));
    }
    if elapsed > limit {
        return Some(format!("p={} took {elapsed:?}, limit {limit:?}", report.prime));
    }
    None
}

fn criterion_1() -> Outcome {
    let (report, elapsed) = timed(3);
    if let Some(why) = table_outcome(&report, elapsed, Duration::from_secs(60)) {
        return fail(why);
    }
    let mut pattern: Vec<(String, String)> = report
        .labelled_duals
        .iter()
        .filter(|d| d.no == "3a")
        .map(|d| (d.label.clone(), d.dual_label.clone().unwrap_or_default()))
        .collect();
    pattern.sort();
    let want: Vec<(String, String)> =
        [("g1", "g2"), ("g2", "g1"), ("g3", "g3"), ("g4", "g4")].iter().map(|(a, b)| (a.to_string(), b.to_string())).collect();
    if pattern != want {
        return fail(format!("No. 3a duality pattern {pattern:?}"));
    }
    pass(format!("{} rows, 3a pattern g1<->g2 g3 g4 self-dual, {elapsed:.2?}", report.pairs))
}

fn criterion_2() -> Outcome {
    let mut parts = Vec::new();
    for p in [5, 7, 13] {
        let (report, elapsed) = timed(p);
        if let Some(why) = table_outcome(&report, elapsed, Duration::from_secs(10)) {
            return fail(why);
        }
        parts.push(format!("p={p}: {} rows {elapsed:.2?}", report.pairs));
    }
    pass(parts.join(", "))
}

fn criterion_3() -> Outcome {
    let mut rows = 0;
    for table in &golden().tables {
        for entry in &table.entries {
            let Some(dual) = table.entries.iter().find(|e| e.no == entry.dual) else {
                return fail(format!("No. {} names missing dual {}", entry.no, entry.dual));
            };
            for row in &entry.rows {
                rows += 1;
                let want = (entry.sl_index / row.index, 20 - row.r, row.a);
                if !dual.rows.iter().any(|d| (d.index, d.r, d.a) == want) {
                    return fail(format!("No. {} row {:?} has no dual {want:?} in No. {}", entry.no, (row.index, row.r, row.a), dual.no));
                }
            }
        }
    }
    for p in PRIMES {
        let report = verify_tables(p).expect("verify_tables runs");
        if let Some(r) = report.records.iter().find(|r| !r.mirror_check) {
            return fail(format!("computed mirror check failed for {} {:?}", r.polynomial, r.group_generators));
        }
    }
    pass(format!("{rows} golden rows and all regenerated pairs"))
}

fn criterion_4() -> Outcome {
    let check = |poly: &str, order: usize, index: usize| -> Result<(), String> {
        let w: InvertiblePolynomial = poly.parse().map_err(|e: Error| e.to_string())?;
        let full = full_group(w.matrix()).map_err(|e| e.to_string())?;
        let (j, sl) = bounding_groups(&w).map_err(|e| e.to_string())?;
        let found = (full.order(), sl.index_over(&j));
        if found == (order, index) {
            Ok(())
        } else {
            Err(format!("{poly}: |G_W|, |SL/J| = {found:?}, expected {:?}", (order, index)))
        }
    };
    match check("x^2+y^3+z^8+w^24", 1152, 2).and(check("x^2+y^5+z^5+x*w^5", 250, 5)) {
        Ok(()) => pass("1152/2 and 250/5"),
        Err(e) => fail(e),
    }
}

fn criterion_5() -> Outcome {
    let cases = [((24, 12, 3, 1), 3), ((24, 12, 8, 3), 0), ((10, 5, 2, 1), 2)];
    for ((d, a, b, c), want) in cases {
        match curve_genus(d, a, b, c) {
            Ok(g) if g == want => {}
            other => return fail(format!("({d}; {a},{b},{c}) gave {other:?}, expected {want}")),
        }
    }
    pass("3, 0, 2")
}

fn criterion_6() -> Outcome {
    let mut verified = 0;
    for row in classification() {
        let check = match check_row(row) {
            Ok(c) => c,
            Err(e) => return fail(format!("({},{},{}): {e}", row.p, row.r, row.a)),
        };
        if !(check.s_ok && check.t_ok) {
            return fail(format!("({},{},{}) S ok {} T ok {}", row.p, row.r, row.a, check.s_ok, check.t_ok));
        }
        let mirror = verify_mirror_decomposition(row.p, row.r, row.a);
        if is_mirror_hyperbolic(row.p, row.r, row.a) {
            if !matches!(mirror, Ok(true)) {
                return fail(format!("({},{},{}) mirror decomposition {mirror:?}", row.p, row.r, row.a));
            }
            verified += 1;
        } else if !matches!(mirror, Err(Error::NotMirrorHyperbolic { .. })) {
            return fail(format!("excluded ({},{},{}) gave {mirror:?}", row.p, row.r, row.a));
        }
    }
    for (p, r, a) in MIRROR_EXCLUSIONS {
        if !matches!(verify_mirror_decomposition(p, r, a), Err(Error::NotMirrorHyperbolic { .. })) {
            return fail(format!("({p},{r},{a}) not rejected"));
        }
    }
    pass(format!("{} rows valid, {verified} mirrors verified, 3 excluded", classification().len()))
}

fn criterion_7() -> Outcome {
    let mut pairs = 0;
    for table in &golden().tables {
        for entry in &table.entries {
            let w: InvertiblePolynomial = entry.polynomial.parse().expect("golden polynomial");
            let a = w.matrix();
            if transpose(&transpose(&w)) != w {
                return fail(format!("transpose twice changes {w}"));
            }
            let (j, sl) = bounding_groups(&w).expect("groups");
            let groups = subgroups_between(&j, &sl).expect("subgroups");
            let duals: Vec<_> = groups.iter().map(|g| dual_group(g, a).expect("dual")).collect();
            for (g, gt) in groups.iter().zip(&duals) {
                if dual_group(gt, transpose(&w).matrix()).expect("dual") != *g {
                    return fail(format!("(G^T)^T != G on {w}"));
                }
            }
            for (g1, t1) in groups.iter().zip(&duals) {
                for (g2, t2) in groups.iter().zip(&duals) {
                    if !g1.is_subgroup_of(g2) {
                        continue;
                    }
                    pairs += 1;
                    if !t2.is_subgroup_of(t1) || g2.index_over(g1) != t1.index_over(t2) {
                        return fail(format!("inclusion reversal fails on {w}"));
                    }
                }
            }
        }
    }
    for p in PRIMES {
        for fam in admissible_families(p).expect("families") {
            for w in enumerate_form_p(&fam.weight_system, p) {
                let ws = weights_from_matrix(w.matrix()).expect("weights");
                if normalize(ws.weights, ws.degree).expect("normalize").system != fam.weight_system {
                    return fail(format!("{w} does not have weights {}", fam.weight_system));
                }
            }
        }
    }
    let mut runner = TestRunner::deterministic();
    let strategy = block_sum();
    for _ in 0..200 {
        let expr = strategy.new_tree(&mut runner).expect("strategy").current();
        let l = make(&expr).expect("lattice");
        let disc = l.discriminant();
        let oracle: Vec<BigInt> = smith_by_minors(&l.gram).into_iter().map(BigInt::from).collect();
        let det = l.determinant();
        let abs = if det < BigInt::from(0) { -det } else { det };
        if disc.invariant_factors != oracle || disc.order != abs {
            return fail(format!("{expr}: {:?} vs oracle {oracle:?}", disc.invariant_factors));
        }
    }
    pass(format!("{pairs} inclusions, 200 lattices against the minor oracle"))
}

fn criterion_8() -> Outcome {
    let mut count = 0;
    for table in &golden().tables {
        for entry in &table.entries {
            let w: InvertiblePolynomial = entry.polynomial.parse().expect("golden polynomial");
            let (j, sl) = bounding_groups(&w).expect("groups");
            for h in subgroups_between(&j, &sl).expect("subgroups") {
                count += 1;
                match resolve_fixed_locus(&w, &h, table.prime) {
                    Ok(_) => {}
                    Err(e) => return fail(format!("{w} |G/J|={}: {e}", h.index_over(&j))),
                }
            }
        }
    }
    let w: InvertiblePolynomial = "x^2+y^3+z^8+w^24".parse().expect("poly");
    let sl = group_from_generators(&w, &"0,0,1/8,7/8".parse().map(|g| vec![g]).expect("generator")).expect("group");
    let (f, l) = resolve_fixed_locus(&w, &sl, 3).expect("resolves");
    if (f.g, f.n, f.k, l.r, l.a) != (Some(2), 5, Some(3), 12, 1) {
        return fail(format!("13d SL gives {f} and ({},{})", l.r, l.a));
    }
    let report = render(&verify_tables(3).expect("verify"), Format::Markdown);
    if !report.lines().any(|line| line.contains("No. 13d") && line.contains("k=3")) {
        return fail("report has no note for the 13d k value");
    }
    pass(format!("{count} pairs resolve uniquely; 13d SL gives (2,5,3) -> (12,1), noted in report"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("tables for p=3 and the 3a subgroups", criterion_1),
        ("tables for p=5, 7, 13", criterion_2),
        ("mirror rows (20-r, a)", criterion_3),
        ("group orders and indices", criterion_4),
        ("curve genus spot checks", criterion_5),
        ("lattice suite", criterion_6),
        ("duality, weights and discriminant properties", criterion_7),
        ("unique fixed-locus resolution", criterion_8),
    ];
    let mut failed = Vec::new();
    for (i, (name, run)) in criteria.iter().enumerate() {
        let outcome = run();
        let status = if outcome.ok { "PASS" } else { "FAIL" };
        println!("{status} criterion {}: {name}: {}", i + 1, outcome.detail);
        if !outcome.ok {
            failed.push(i + 1);
        }
    }
    if failed.is_empty() {
        println!("all 8 criteria pass");
    } else {
        println!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
