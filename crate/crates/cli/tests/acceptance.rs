//! Acceptance gate. Each criterion prints one `PASS`/`FAIL` line to stderr
//! (bypassing output capture) and the test fails if any criterion fails.

use std::collections::HashSet;
use std::io::Write;
use std::path::PathBuf;
use std::process::Command;

use knotoid::code::{canonical_codes, parse_code, random_code, CyclicGaussCode, OpenGaussCode, Pass, Sign};
use knotoid::invariants::{f_polynomial, knotoid_f};
use knotoid::moves::{successors, InsertionCaps, MoveMode};
use knotoid::planar::{parse_pkd, PlanarDiagram, Route};
use knotoid::search::{
    cyclic_connected, equivalent, explore, min_genus_bound, replay, tabulate, verify_verdict, SearchBudget, Verdict,
};
use knotoid::surface::{carrier_genus, is_classical};
use knotoid::LaurentPolynomial;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 0x6b6e_6f74;

const EXHAUSTIVE_MAX_N: usize = 3;
const MOVE_RANDOM_CODES: usize = 200;
const MOVE_RANDOM_MAX_N: usize = 6;
const GENUS_RANDOM_CODES: usize = 500;
const GENUS_RANDOM_MAX_N: usize = 8;
const MIN_ROUTES: usize = 3;
const RANDOM_DIAGRAMS: usize = 20;
const RANDOM_DIAGRAM_ATTEMPTS: usize = 200_000;
const SEMIGROUP_TRIPLES: usize = 100;
const MONOTONE_CODES: usize = 50;
const DETERMINISM_N_MAX: usize = 2;

/// Right-handed trefoil, the all-positive three-crossing knot.
const TREFOIL: &str = "O1+ U2+ O3+ U1+ O2+ U3+";
const TREFOIL_F: &str = "-1:-16;1:-12;1:-4";
const TREFOIL_TYPE: &str = "O1+ U2+ U1+ O2+";
const GENUS_ONE: &str = "O1+ O2+ U1+ U2+";

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn report(name: &str, outcome: &Outcome) {
    let line = match outcome {
        Ok(detail) => format!("PASS {name}: {detail}\n"),
        Err(detail) => format!("FAIL {name}: {detail}\n"),
    };
    std::io::stderr().write_all(line.as_bytes()).unwrap();
}

fn code(s: &str) -> OpenGaussCode {
    parse_code(s).unwrap()
}

fn fixture_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/under_trefoil.pkd")
}

fn fixture() -> PlanarDiagram {
    parse_pkd(&std::fs::read_to_string(fixture_path()).unwrap()).unwrap()
}

fn exhaustive() -> Vec<OpenGaussCode> {
    (0..=EXHAUSTIVE_MAX_N).flat_map(canonical_codes).collect()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Cell-complex genus: band sides and disk corners glued by union-find, with
/// band-end directions read off compass headings at each crossing.
fn oracle_genus(code: &OpenGaussCode) -> usize {
    let e = code.entries();
    let m = e.len();
    let n = m / 2;
    let bands = m + 1;
    let mut parent: Vec<usize> = (0..2 * bands).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut x = x;
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    fn union(p: &mut [usize], a: usize, b: usize) {
        let (ra, rb) = (find(p, a), find(p, b));
        p[ra] = rb;
    }
    let left = |k: usize| 2 * k;
    let right = |k: usize| 2 * k + 1;
    union(&mut parent, left(0), right(0));
    union(&mut parent, left(bands - 1), right(bands - 1));
    let mut done = vec![false; m];
    for i in 0..m {
        if done[i] {
            continue;
        }
        let j = (i + 1..m).find(|&j| e[j].label == e[i].label).unwrap();
        done[i] = true;
        done[j] = true;
        let (o, u) = if e[i].pass == Pass::Over { (i, j) } else { (j, i) };
        // Understrand heads east; a positive overstrand heads south.
        let over_heading = if e[o].sign == Sign::Pos { 270 } else { 90 };
        let mut ends = [(u, 180, false), (u + 1, 0, true), (o, (over_heading + 180) % 360, false), (o + 1, over_heading, true)];
        ends.sort_by_key(|&(_, h, _)| h);
        for k in 0..4 {
            let (b1, _, out1) = ends[k];
            let (b2, _, out2) = ends[(k + 1) % 4];
            let side1 = if out1 { left(b1) } else { right(b1) };
            let side2 = if out2 { right(b2) } else { left(b2) };
            union(&mut parent, side1, side2);
        }
    }
    let roots: HashSet<usize> = (0..2 * bands).map(|x| find(&mut parent, x)).collect();
    let chi = (n as i64 + 2) - bands as i64;
    ((2 - chi - roots.len() as i64) / 2) as usize
}

/// State sum over explicit smoothings, loops counted by union-find on arc ends.
fn oracle_f(code: &CyclicGaussCode) -> LaurentPolynomial {
    let entries = code.entries();
    let m = entries.len();
    if m == 0 {
        return LaurentPolynomial::one();
    }
    let mut labels: Vec<u32> = entries.iter().map(|e| e.label).collect();
    labels.sort();
    labels.dedup();
    let mut total = LaurentPolynomial::zero();
    for state in 0u32..(1 << labels.len()) {
        let mut parent: Vec<usize> = (0..2 * m).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut x = x;
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        let union = |p: &mut [usize], a: usize, b: usize| {
            let (ra, rb) = (find(p, a), find(p, b));
            p[ra] = rb;
        };
        for k in 0..m {
            union(&mut parent, 2 * k, 2 * k + 1);
        }
        let mut a_count = 0i32;
        for (ci, &label) in labels.iter().enumerate() {
            let pos: Vec<usize> = (0..m).filter(|&p| entries[p].label == label).collect();
            let (over, under) = if entries[pos[0]].pass == Pass::Over { (pos[0], pos[1]) } else { (pos[1], pos[0]) };
            let over_in = 2 * ((over + m - 1) % m);
            let over_out = 2 * over + 1;
            let under_in = 2 * ((under + m - 1) % m);
            let under_out = 2 * under + 1;
            let ccw = match entries[over].sign {
                Sign::Pos => [under_in, over_out, under_out, over_in],
                Sign::Neg => [under_in, over_in, under_out, over_out],
            };
            let use_a = state >> ci & 1 == 0;
            for s in (0..4).filter(|&s| ccw[s] == over_in || ccw[s] == over_out) {
                let partner = if use_a { (s + 3) % 4 } else { (s + 1) % 4 };
                union(&mut parent, ccw[s], ccw[partner]);
            }
            a_count += if use_a { 1 } else { -1 };
        }
        let loops = (0..2 * m).map(|x| find(&mut parent, x)).collect::<HashSet<_>>().len() as u32;
        total = total + LaurentPolynomial::delta().pow(loops - 1).scale(1, a_count);
    }
    let w: i32 = entries.iter().map(|e| if e.sign == Sign::Pos { 1 } else { -1 }).sum::<i32>() / 2;
    let sign = if w % 2 == 0 { 1 } else { -1 };
    total.scale(sign, -3 * w)
}

fn move_soundness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut corpus = exhaustive();
    for _ in 0..MOVE_RANDOM_CODES {
        let n = rng.gen_range(0..=MOVE_RANDOM_MAX_N);
        corpus.push(random_code(&mut rng, n));
    }
    let mut sites = 0usize;
    for c in &corpus {
        let f = knotoid_f(c).unwrap();
        ensure(f == oracle_f(&c.virtual_closure()), || format!("{c}: knotoid_f disagrees with the state-sum oracle"))?;
        let caps = InsertionCaps::crossings(c.crossing_count() + 2);
        for (site, next) in successors(c, MoveMode::Standard, &caps).unwrap() {
            sites += 1;
            let g = knotoid_f(&next).unwrap();
            ensure(g == f, || format!("{c} --{site}--> {next}: {f} vs {g}"))?;
        }
    }
    Ok(format!("{} codes, {sites} move sites, knotoid_f exact", corpus.len()))
}

fn genus_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 1);
    let mut corpus = exhaustive();
    for _ in 0..GENUS_RANDOM_CODES {
        let n = rng.gen_range(0..=GENUS_RANDOM_MAX_N);
        corpus.push(random_code(&mut rng, n));
    }
    for c in &corpus {
        let g = carrier_genus(c).map_err(|e| format!("{c}: {e}"))?;
        let o = oracle_genus(c);
        ensure(g == o, || format!("{c}: genus {g}, oracle {o}"))?;
    }
    Ok(format!("{} codes agree", corpus.len()))
}

fn trefoil_type_closures() -> Outcome {
    let d = fixture();
    let reduced = equivalent(&d.to_open_code(), &code(TREFOIL_TYPE), &SearchBudget::new(4, 20_000, 2)).unwrap();
    ensure(matches!(reduced, Verdict::Equivalent(_)), || format!("fixture does not reduce to {TREFOIL_TYPE}: {reduced}"))?;
    let trefoil_f = oracle_f(&code(TREFOIL).virtual_closure());
    ensure(trefoil_f.to_string() == TREFOIL_F, || format!("oracle trefoil value {trefoil_f}"))?;
    let under = d.underpass_closure(&Route::Auto).unwrap();
    let over = d.overpass_closure(&Route::Auto).unwrap();
    let (fu, fo) = (f_polynomial(&under).unwrap(), f_polynomial(&over).unwrap());
    ensure(fu == trefoil_f && oracle_f(&under) == trefoil_f, || format!("underpass closure f = {fu}"))?;
    ensure(fo == LaurentPolynomial::one() && oracle_f(&over) == fo, || format!("overpass closure f = {fo}"))?;
    let virt = d.virtual_closure_routed(&Route::Auto).unwrap();
    ensure(virt == d.to_open_code().virtual_closure(), || "virtual closure differs from the open code's".into())?;
    Ok(format!("underpass f = {fu}, overpass f = {fo}"))
}

fn route_independence() -> Outcome {
    let budget = SearchBudget::default();
    let d = fixture();
    let routes = d.simple_routes(usize::MAX);
    ensure(routes.len() >= MIN_ROUTES, || format!("fixture has {} routes", routes.len()))?;
    let base = d.underpass_closure(&Route::Auto).unwrap();
    let base_f = f_polynomial(&base).unwrap();
    let mut max_moves = 0;
    for r in &routes {
        let z = d.underpass_closure(&Route::Edges(r.clone())).unwrap();
        ensure(f_polynomial(&z).unwrap() == base_f, || format!("fixture route {r:?} changes f"))?;
        let cap = z.crossing_count().max(base.crossing_count());
        let moves = cyclic_connected(&z, &base, &SearchBudget { max_crossings: cap, ..budget })
            .ok_or_else(|| format!("fixture route {r:?} not connected to the auto route"))?;
        max_moves = max_moves.max(moves);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 2);
    let mut found = 0;
    let mut attempts = 0;
    while found < RANDOM_DIAGRAMS && attempts < RANDOM_DIAGRAM_ATTEMPTS {
        attempts += 1;
        let n = rng.gen_range(2..=6);
        let c = random_code(&mut rng, n);
        if !is_classical(&c) {
            continue;
        }
        let d = PlanarDiagram::from_classical_code(&c).unwrap();
        let routes = d.simple_routes(8);
        if routes.len() < MIN_ROUTES {
            continue;
        }
        found += 1;
        let fs: HashSet<String> = routes
            .iter()
            .map(|r| f_polynomial(&d.underpass_closure(&Route::Edges(r.clone())).unwrap()).unwrap().to_string())
            .collect();
        ensure(fs.len() == 1, || format!("{c}: underpass f depends on the route: {fs:?}"))?;
    }
    ensure(found == RANDOM_DIAGRAMS, || format!("only {found} random diagrams with {MIN_ROUTES}+ routes"))?;
    Ok(format!(
        "fixture: {} routes, all within {max_moves} cyclic moves of the auto route; {found} random diagrams agree",
        routes.len()
    ))
}

fn semigroup() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 3);
    let e = OpenGaussCode::trivial();
    for _ in 0..SEMIGROUP_TRIPLES {
        let pick = |rng: &mut ChaCha8Rng| {
            let n = rng.gen_range(0..=4);
            random_code(rng, n)
        };
        let (a, b, c) = (pick(&mut rng), pick(&mut rng), pick(&mut rng));
        let ca = a.canonicalize();
        ensure(e.product(&a).canonicalize() == ca && a.product(&e).canonicalize() == ca, || format!("identity fails on {a}"))?;
        let l = a.product(&b).product(&c).canonicalize();
        let r = a.product(&b.product(&c)).canonicalize();
        ensure(l == r, || format!("({a})({b})({c}): {l} vs {r}"))?;
    }
    Ok(format!("{SEMIGROUP_TRIPLES} triples"))
}

fn classical_pairs() -> Outcome {
    let budget = SearchBudget::new(4, 2_000, 3);
    let codes: Vec<OpenGaussCode> = exhaustive().into_iter().filter(is_classical).collect();
    let fs: Vec<LaurentPolynomial> = codes.iter().map(|c| knotoid_f(c).unwrap()).collect();
    let reached: Vec<HashSet<String>> =
        codes.iter().map(|c| explore(c, &budget).unwrap().keys().into_iter().map(str::to_string).collect()).collect();
    let (mut distinct, mut meeting, mut sampled, mut classical_paths) = (0usize, 0usize, 0usize, 0usize);
    for i in 0..codes.len() {
        for j in i + 1..codes.len() {
            if fs[i] != fs[j] {
                let v = equivalent(&codes[i], &codes[j], &budget).unwrap();
                ensure(!matches!(v, Verdict::Equivalent(_)), || format!("{} ~ {} despite differing f", codes[i], codes[j]))?;
                ensure(verify_verdict(&codes[i], &codes[j], &v, MoveMode::Standard), || "unverifiable verdict".into())?;
                distinct += 1;
            } else if !reached[i].is_disjoint(&reached[j]) {
                meeting += 1;
                if sampled < 200 {
                    sampled += 1;
                    if let Verdict::Equivalent(path) = equivalent(&codes[i], &codes[j], &budget).unwrap() {
                        let mut cur = codes[i].canonicalize();
                        let mut planar = is_classical(&cur);
                        for site in &path {
                            cur = replay(&cur, std::slice::from_ref(site)).unwrap();
                            planar &= is_classical(&cur);
                        }
                        classical_paths += planar as usize;
                    }
                }
            }
        }
    }
    let trefoil_type = equivalent(&code(TREFOIL_TYPE), &OpenGaussCode::trivial(), &budget).unwrap();
    ensure(matches!(trefoil_type, Verdict::Distinct { .. }), || format!("trefoil-type vs trivial: {trefoil_type}"))?;
    Ok(format!(
        "{} classical codes, {distinct} pairs split by f, {meeting} meeting pairs share f; {classical_paths}/{sampled} sampled paths stay classical",
        codes.len()
    ))
}

fn min_genus() -> Outcome {
    let budgets = [SearchBudget::new(2, 300, 2), SearchBudget::new(3, 3_000, 3), SearchBudget::new(4, 10_000, 4)];
    for w in budgets.windows(2) {
        assert!(w[1].dominates(&w[0]));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 4);
    let mut drops = 0;
    for _ in 0..MONOTONE_CODES {
        let n = rng.gen_range(0..=4);
        let c = random_code(&mut rng, n);
        let gs: Vec<usize> = budgets.iter().map(|b| min_genus_bound(&c, b).unwrap().0).collect();
        ensure(gs.windows(2).all(|w| w[0] >= w[1]), || format!("{c}: bounds {gs:?} increase"))?;
        drops += (gs[0] > gs[2]) as usize;
    }
    let classical: Vec<OpenGaussCode> = exhaustive().into_iter().filter(is_classical).collect();
    for c in &classical {
        let (g, w) = min_genus_bound(c, &SearchBudget::default()).unwrap();
        ensure(g == 0 && carrier_genus(&w) == Ok(0), || format!("{c}: bound {g}"))?;
    }
    let (g, w) = min_genus_bound(&code(GENUS_ONE), &SearchBudget::default()).unwrap();
    ensure(g == 1 && carrier_genus(&w) == Ok(1), || format!("{GENUS_ONE}: bound {g}"))?;
    Ok(format!("{MONOTONE_CODES} codes monotone ({drops} drop), {} classical codes at 0, {GENUS_ONE} at 1", classical.len()))
}

fn run_cli(args: &[&str]) -> (Option<i32>, Vec<u8>, Vec<u8>) {
    let out = Command::new(env!("CARGO_BIN_EXE_knotoid")).args(args).output().unwrap();
    (out.status.code(), out.stdout, out.stderr)
}

fn determinism() -> Outcome {
    let budget = SearchBudget::new(4, 5_000, 4);
    let dir = tempfile::tempdir().unwrap();
    let (p1, p2) = (dir.path().join("a.tsv"), dir.path().join("b.tsv"));
    let n1 = tabulate(DETERMINISM_N_MAX, &budget, &p1).unwrap();
    let n2 = tabulate(DETERMINISM_N_MAX, &budget, &p2).unwrap();
    let (b1, b2) = (std::fs::read(&p1).unwrap(), std::fs::read(&p2).unwrap());
    ensure(n1 == n2 && b1 == b2, || "tabulation stores differ".into())?;
    let fx = fixture_path();
    let fx = fx.to_str().unwrap();
    let store = dir.path().join("cli.tsv");
    let store = store.to_str().unwrap();
    let invocations: Vec<Vec<&str>> = vec![
        vec!["validate", fx],
        vec!["canon", "U2+ O2+"],
        vec!["product", "O1+ U1+", "U1- O1-"],
        vec!["closure", "--type", "under", fx],
        vec!["closure", "--type", "over", "--route", "3,5", fx],
        vec!["closure", "--type", "virtual", fx],
        vec!["genus", GENUS_ONE],
        vec!["classical", TREFOIL_TYPE],
        vec!["bracket", TREFOIL],
        vec!["bracket", "--normalized", TREFOIL],
        vec!["f", TREFOIL_TYPE],
        vec!["moves", TREFOIL_TYPE, "--max-crossings", "3"],
        vec!["moves", TREFOIL_TYPE, "--mode", "under-closure", "--max-crossings", "2"],
        vec!["apply", "O1+ U1+", "R1-@0#0"],
        vec!["equiv", "", "O1+ U1+", "--max-depth", "2"],
        vec!["equiv", TREFOIL_TYPE, ""],
        vec!["min-genus", GENUS_ONE, "--max-nodes", "5000"],
        vec!["tabulate", "2", "--max-nodes", "2000", "--max-crossings", "3", "--max-depth", "3"],
        vec!["tabulate", "1", "--out", store, "--max-nodes", "500"],
        vec!["genus", "O1+ U2+"],
    ];
    for args in &invocations {
        let first = run_cli(args);
        let second = run_cli(args);
        ensure(first == second, || format!("`knotoid {}` output differs between runs", args.join(" ")))?;
    }
    Ok(format!("{n1} records twice, byte-identical; {} CLI invocations stable", invocations.len()))
}

#[test]
fn acceptance() {
    let criteria: [Criterion; 8] = [
        ("1 move soundness", move_soundness),
        ("2 genus oracle", genus_oracle),
        ("3 closures of the trefoil-type knotoid", trefoil_type_closures),
        ("4 closure route independence", route_independence),
        ("5 semigroup laws", semigroup),
        ("6 classical pairs", classical_pairs),
        ("7 minimal genus bound", min_genus),
        ("8 determinism", determinism),
    ];
    let mut failed = Vec::new();
    for (name, check) in criteria {
        let outcome = check();
        report(name, &outcome);
        if outcome.is_err() {
            failed.push(name);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}

