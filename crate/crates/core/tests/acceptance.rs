//! Acceptance criteria. Each test writes one PASS/FAIL line to stderr
//! (bypassing output capture) and asserts the outcome. All comparisons are
//! exact: integer matrices and lattices must agree entry for entry.

use std::io::Write;
use std::sync::Arc;
use std::time::{Duration, Instant};

use coopkit::cdc::{dim1_matches_graph, verify_cdc};
use coopkit::cli::load_coalgebra;
use coopkit::compose::{check_pentagon, compare_with_closed_form, Functor};
use coopkit::cooperad::{
    check_coassociativity, check_counit, check_delta_n, check_naturality, verify_comodule, verify_cooperad,
    verify_cosimplicial, verify_paren_compat, Comodule, Cooperad, Tower,
};
use coopkit::corpus::{kan_corpus, negative_controls, seq_corpus, SeqBounds};
use coopkit::graphco::{enumerate_trees, GraphCooperad};
use coopkit::report::{Report, Status};
use coopkit::wreath::enumerate_iso_classes;

const SEED: u64 = 20240611;
const COALGEBRA: &str = include_str!("../data/coalgebra_gr.json");

fn announce(id: u32, name: &str, pass: bool, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    let _ = writeln!(std::io::stderr(), "criterion {id:>2} {verdict} {name}: {detail}");
}

fn summary(r: &Report) -> String {
    let mut checks: Vec<&str> = Vec::new();
    for e in &r.entries {
        if !checks.contains(&e.check.as_str()) {
            checks.push(&e.check);
        }
    }
    checks
        .iter()
        .map(|c| {
            let skipped = r.count(c, Status::Skip);
            let skip = if skipped > 0 { format!(", {skipped} skipped") } else { String::new() };
            format!("{c} {}/{}{skip}", r.count(c, Status::Pass), r.count(c, Status::Pass) + r.count(c, Status::Fail))
        })
        .collect::<Vec<_>>()
        .join(", ")
}

fn graph(max_arity: usize, directed: bool) -> Arc<dyn Cooperad> {
    Arc::new(GraphCooperad::new(max_arity, directed))
}

#[test]
fn criterion_01_kan_extension_matches_closed_form() {
    let start = Instant::now();
    let corpus = kan_corpus(SEED, 20, SeqBounds::default());
    let mut failures = Vec::new();
    let mut total_rank = 0;
    for (k, (a, b)) in corpus.iter().enumerate() {
        for n in 0..=4 {
            match compare_with_closed_form(a, b, n) {
                Ok(r) => total_rank += r,
                Err(w) => failures.push(format!("pair {k} arity {n}: {w}")),
            }
        }
    }
    let elapsed = start.elapsed();
    let pass = failures.is_empty() && elapsed <= Duration::from_secs(60);
    announce(
        1,
        "Kan extension vs closed form",
        pass,
        &format!(
            "20 seeded pairs, rank ≤ 2, support ≤ 3, n ≤ 4; ranks and Hermite bases equal exactly (total rank {total_rank}); {:.2} s ≤ 60 s{}",
            elapsed.as_secs_f64(),
            failures.first().map_or(String::new(), |f| format!("; first failure {f}"))
        ),
    );
    assert!(pass, "{failures:?} in {elapsed:?}");
}

#[test]
fn criterion_02_graph_coassociativity() {
    let tower = Tower::new(graph(4, false));
    let r = check_coassociativity(&tower, 4);
    let pass = r.all_pass() && r.count("coassociativity", Status::Pass) > 0;
    announce(2, "graph cooperad coassociativity", pass, &format!("all canonical 3-chains, |S₃| ≤ 4: {}", summary(&r)));
    assert!(pass, "{}", r.to_text());
}

#[test]
fn criterion_03_graph_counit() {
    let tower = Tower::new(graph(5, false));
    let r = check_counit(&tower, 5);
    let pass = r.all_pass() && r.count("counit.left", Status::Pass) == 6 && r.count("counit.right", Status::Pass) == 6;
    announce(3, "graph cooperad counit", pass, &format!("both composites are the identity for |S| ≤ 5: {}", summary(&r)));
    assert!(pass, "{}", r.to_text());
}

#[test]
fn criterion_04_cosimplicial_identities() {
    let tower = Tower::new(graph(4, false));
    let r = verify_cosimplicial(&tower, 3, 4);
    let pass = r.all_pass() && !r.entries.is_empty();
    announce(4, "cosimplicial identities", pass, &format!("max_n = 3, |S| ≤ 4: {}", summary(&r)));
    assert!(pass, "{}", r.to_text());
}

/// `Δ̃` on an oriented edge list, with `(row, coefficient)` entries sorted.
fn column(op: &GraphCooperad, edges: &[(usize, usize)], f: &[usize], t_len: usize) -> Vec<(usize, i64)> {
    let mut v = op.apply(edges, f, t_len);
    v.sort_unstable();
    v
}

#[test]
fn criterion_05_directed_graph_cooperad() {
    let op = GraphCooperad::new(4, true);
    let mut sign_checks = 0;
    let mut sign_failures = Vec::new();
    for c in enumerate_iso_classes(2, 4, 4) {
        let f = &c.maps()[0];
        let t_len = c.level(0).len();
        for t in enumerate_trees(c.top().len()) {
            let base = column(&op, &t.edges, f, t_len);
            for k in 0..t.edges.len() {
                let mut rev = t.edges.clone();
                rev[k] = (rev[k].1, rev[k].0);
                let got = column(&op, &rev, f, t_len);
                let want: Vec<(usize, i64)> = base.iter().map(|&(r, x)| (r, -x)).collect();
                sign_checks += 1;
                if got != want {
                    sign_failures.push(format!("{c} tree {:?} edge {k}", t.edges));
                }
            }
        }
    }
    let tower = Tower::new(Arc::new(op) as Arc<dyn Cooperad>);
    let mut r = check_coassociativity(&tower, 4);
    r.extend(check_counit(&tower, 4));
    let pass = sign_failures.is_empty() && sign_checks > 0 && r.all_pass();
    announce(
        5,
        "directed graph cooperad",
        pass,
        &format!(
            "edge reversal negates Δ̃ in {}/{sign_checks} cases; |S| ≤ 4: {}",
            sign_checks - sign_failures.len(),
            summary(&r)
        ),
    );
    assert!(pass, "{sign_failures:?}\n{}", r.to_text());
}

/// Spanning trees of `K_n` by testing every (n−1)-subset of edges for
/// connectivity with a union-find.
fn brute_force_spanning_trees(n: usize) -> usize {
    if n <= 1 {
        return n;
    }
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
    let mut count = 0;
    for mask in 0u32..(1 << pairs.len()) {
        if mask.count_ones() as usize != n - 1 {
            continue;
        }
        let mut parent: Vec<usize> = (0..n).collect();
        fn root(p: &mut [usize], x: usize) -> usize {
            let mut x = x;
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        let mut merges = 0;
        for (k, &(a, b)) in pairs.iter().enumerate() {
            if mask >> k & 1 == 1 {
                let (ra, rb) = (root(&mut parent, a), root(&mut parent, b));
                if ra != rb {
                    parent[ra] = rb;
                    merges += 1;
                }
            }
        }
        if merges == n - 1 {
            count += 1;
        }
    }
    count
}

#[test]
fn criterion_06_tree_counts() {
    let mut lines = Vec::new();
    let mut pass = true;
    for n in 2..=6usize {
        let got = enumerate_trees(n).len();
        let want = n.pow(n as u32 - 2);
        let brute = (n <= 4).then(|| brute_force_spanning_trees(n));
        pass &= got == want && brute.is_none_or(|b| b == got);
        lines.push(match brute {
            Some(b) => format!("{n}: {got} (brute force {b})"),
            None => format!("{n}: {got}"),
        });
    }
    pass &= enumerate_trees(6).len() == 1296;
    announce(6, "tree counts |S|^(|S|-2)", pass, &lines.join(", "));
    assert!(pass, "{lines:?}");
}

#[test]
fn criterion_07_naturality() {
    let mut r = Report::new();
    for directed in [false, true] {
        r.extend(check_naturality(&graph(4, directed), 4));
    }
    let pass = r.all_pass() && r.count("naturality", Status::Pass) > 0;
    announce(
        7,
        "naturality of Δ̃",
        pass,
        &format!("gr and directed gr, every chain isomorphism of 2-chains with |S₂| ≤ 4: {}", summary(&r)),
    );
    assert!(pass, "{}", r.to_text());
}

#[test]
fn criterion_08_parenthesization() {
    let seqs = seq_corpus(SEED, 12, SeqBounds { min_arity: 1, ..SeqBounds::default() });
    let mut r = Report::new();
    for q in 0..3 {
        let fs: [Functor; 4] = std::array::from_fn(|i| seqs[4 * q + i].clone() as Functor);
        r.extend(check_pentagon(fs, 3, &format!("quadruple {q}")));
    }
    for directed in [false, true] {
        r.extend(verify_paren_compat(&Tower::new(graph(3, directed)), 3));
    }
    let pass = r.all_pass() && r.count("paren.pentagon", Status::Pass) == 12;
    announce(
        8,
        "parenthesization",
        pass,
        &format!("pentagon on 3 seeded quadruples, arity ≤ 3; Δ-compatibility on gr and directed gr, |S| ≤ 3: {}", summary(&r)),
    );
    assert!(pass, "{}", r.to_text());
}

#[test]
fn criterion_09_iterated_coaction_path_independence() {
    let op = graph(3, false);
    let coalg: Arc<dyn Comodule> = Arc::new(load_coalgebra("coalgebra", op.as_ref(), COALGEBRA).unwrap());
    let tower = Tower::with_module(op.clone(), coalg.clone());
    let mut r = verify_comodule(op, coalg, 3);
    r.extend(check_delta_n(&tower, 3, 0));
    // Cross-check with full Kan matrices where they are small enough.
    let op2 = graph(2, false);
    let coalg2: Arc<dyn Comodule> = Arc::new(load_coalgebra("coalgebra", op2.as_ref(), COALGEBRA).unwrap());
    let tower2 = Tower::with_module(op2, coalg2);
    for n in 2..=3 {
        let paths = Tower::coface_paths(n);
        let first = tower2.iterated_coface(&paths[0], 0).unwrap();
        for p in &paths[1..] {
            let other = tower2.iterated_coface(p, 0).unwrap();
            r.record("delta_n.full_matrices", format!("N = 2, n = {n}, path {p:?}"), if other == first { Ok(()) } else { Err("matrices differ".into()) });
        }
    }
    let pass = r.all_pass() && r.count("delta_n.path_independence", Status::Pass) > 0;
    announce(
        9,
        "Δ^[n] path independence",
        pass,
        &format!("rank-2 coalgebra over gr truncated at N = 3, n ≤ 3: {}", summary(&r)),
    );
    assert!(pass, "{}", r.to_text());
}

#[test]
fn criterion_10_cdc() {
    let mut r = verify_cdc(4, 2);
    r.extend(dim1_matches_graph(4, 2));
    let pass = r.all_pass()
        && r.count("cdc.dim1.cocomp", Status::Pass) > 0
        && r.count("cdc.homology", Status::Skip) == 0;
    announce(
        10,
        "contractible Δ-complexes",
        pass,
        &format!("|S| ≤ 4, at most 2 triangles: {}", summary(&r)),
    );
    assert!(pass, "{}", r.to_text());
}

#[test]
fn criterion_11_negative_controls() {
    let mut lines = Vec::new();
    let mut pass = true;
    for (name, op) in negative_controls(SEED, 4) {
        let op: Arc<dyn Cooperad> = Arc::new(op);
        let mut r = verify_cooperad(op.clone(), 4);
        r.extend(verify_cosimplicial(&Tower::new(op), 3, 3));
        let witness = r.failures().next().map(|e| format!("{} {}: {}", e.check, e.instance, e.witness.clone().unwrap_or_default()));
        let flag = match name {
            "sign-flip" => "sign-flip",
            "dropped-zero-case" => "dropped-zero-case",
            _ => "wrong-counit",
        };
        let code = coopkit::cli::run([
            "coopkit",
            "verify",
            "graph",
            "--max-set",
            "4",
            "--corrupt",
            flag,
            "--seed",
            &SEED.to_string(),
            "--out",
            &std::env::temp_dir().join(format!("coopkit-{name}.txt")).to_string_lossy(),
        ]);
        pass &= witness.is_some() && code == 1;
        lines.push(format!("{name} exit {code}, witness {}", witness.unwrap_or_else(|| "none".into())));
    }
    announce(11, "negative controls", pass, &lines.join("; "));
    assert!(pass, "{lines:?}");
}
