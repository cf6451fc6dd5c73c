//! Bounded breadth-first exploration of the move graph: equivalence tests,
//! genus upper bounds and tabulation.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::fs;
use std::io;
use std::path::Path;

use rayon::prelude::*;
use thiserror::Error;

use crate::code::{canonical_codes, parse_code, CyclicGaussCode, OpenGaussCode};
use crate::invariants::{f_polynomial, knotoid_f};
use crate::moves::{apply_move, inverse_site, successors, InsertionCaps, MoveError, MoveMode, MoveSite};
use crate::planar::{PlanarDiagram, Route};
use crate::poly::LaurentPolynomial;
use crate::surface::{carrier_genus, is_classical};

pub const DEFAULT_MAX_CROSSINGS: usize = 8;
pub const DEFAULT_MAX_NODES: usize = 200_000;
pub const DEFAULT_MAX_DEPTH: usize = 12;

pub const STORE_HEADER: &str = "#knotoid-tab v1";

/// Frontier codes expanded per parallel batch.
const EXPAND_CHUNK: usize = 256;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchBudget {
    /// Insertions may not exceed this many crossings; deletions and R3 are always allowed.
    pub max_crossings: usize,
    /// Cap on discovered codes, the start included.
    pub max_nodes: usize,
    pub max_depth: usize,
    pub mode: MoveMode,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget {
            max_crossings: DEFAULT_MAX_CROSSINGS,
            max_nodes: DEFAULT_MAX_NODES,
            max_depth: DEFAULT_MAX_DEPTH,
            mode: MoveMode::Standard,
        }
    }
}

impl SearchBudget {
    pub fn new(max_crossings: usize, max_nodes: usize, max_depth: usize) -> Self {
        SearchBudget { max_crossings, max_nodes, max_depth, mode: MoveMode::Standard }
    }

    pub fn with_mode(self, mode: MoveMode) -> Self {
        SearchBudget { mode, ..self }
    }

    pub fn is_valid(&self) -> bool {
        self.max_nodes > 0 && self.max_depth > 0
    }

    /// Componentwise at least `other`, in the same mode.
    pub fn dominates(&self, other: &SearchBudget) -> bool {
        self.mode == other.mode
            && self.max_crossings >= other.max_crossings
            && self.max_nodes >= other.max_nodes
            && self.max_depth >= other.max_depth
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum SearchError {
    #[error("budget caps must be positive")]
    InvalidBudget,
    #[error(transparent)]
    Move(#[from] MoveError),
}

#[derive(Clone, Debug)]
struct Node {
    code: OpenGaussCode,
    parent: Option<(usize, MoveSite)>,
    depth: usize,
}

/// Codes reached from a start code, in discovery order.
#[derive(Clone, Debug)]
pub struct Exploration {
    nodes: Vec<Node>,
    index: HashMap<String, usize>,
    /// Set when the node cap was hit, or the depth cap left unexplored successors.
    pub budget_exhausted: bool,
}

impl Exploration {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn codes(&self) -> impl Iterator<Item = &OpenGaussCode> + '_ {
        self.nodes.iter().map(|n| &n.code)
    }

    pub fn contains(&self, code: &OpenGaussCode) -> bool {
        self.index.contains_key(&code.canonical_text())
    }

    pub fn depth_of(&self, code: &OpenGaussCode) -> Option<usize> {
        self.index.get(&code.canonical_text()).map(|&i| self.nodes[i].depth)
    }

    /// Canonical texts of every reached code, sorted.
    pub fn keys(&self) -> Vec<&str> {
        let mut k: Vec<&str> = self.index.keys().map(String::as_str).collect();
        k.sort_unstable();
        k
    }

    /// Move sites leading from the start code to `code`.
    pub fn path_to(&self, code: &OpenGaussCode) -> Option<Vec<MoveSite>> {
        let mut i = *self.index.get(&code.canonical_text())?;
        let mut path = Vec::new();
        while let Some((p, site)) = self.nodes[i].parent {
            path.push(site);
            i = p;
        }
        path.reverse();
        Some(path)
    }

    /// `(parent code, site)` for each step from the start code to `code`.
    fn steps_to(&self, code: &OpenGaussCode) -> Option<Vec<(OpenGaussCode, MoveSite)>> {
        let mut i = *self.index.get(&code.canonical_text())?;
        let mut steps = Vec::new();
        while let Some((p, site)) = self.nodes[i].parent {
            steps.push((self.nodes[p].code.clone(), site));
            i = p;
        }
        steps.reverse();
        Some(steps)
    }
}

/// Breadth-first closure of the canonical form of `code`. Each level is
/// expanded in canonical-text order and successors are taken in site order,
/// so the result does not depend on thread scheduling.
pub fn explore(code: &OpenGaussCode, budget: &SearchBudget) -> Result<Exploration, SearchError> {
    if !budget.is_valid() {
        return Err(SearchError::InvalidBudget);
    }
    let start = code.canonicalize();
    if budget.mode == MoveMode::UnderClosure && !is_classical(&start) {
        return Err(MoveError::NotClassical.into());
    }
    let caps = InsertionCaps::crossings(budget.max_crossings);
    let mut ex = Exploration { nodes: Vec::new(), index: HashMap::new(), budget_exhausted: false };
    ex.index.insert(start.canonical_text(), 0);
    ex.nodes.push(Node { code: start, parent: None, depth: 0 });
    let mut frontier = vec![0usize];
    let mut depth = 0;
    'levels: while !frontier.is_empty() {
        if depth == budget.max_depth {
            ex.budget_exhausted = frontier.par_iter().any(|&i| {
                successors(&ex.nodes[i].code, budget.mode, &caps)
                    .unwrap_or_default()
                    .iter()
                    .any(|(_, c)| !ex.index.contains_key(&c.canonical_text()))
            });
            break;
        }
        let mut next = Vec::new();
        for chunk in frontier.chunks(EXPAND_CHUNK) {
            let expanded: Vec<Vec<(MoveSite, OpenGaussCode)>> = chunk
                .par_iter()
                .map(|&i| successors(&ex.nodes[i].code, budget.mode, &caps).unwrap_or_default())
                .collect();
            for (&parent, succ) in chunk.iter().zip(expanded) {
                for (site, child) in succ {
                    let key = child.canonical_text();
                    if ex.index.contains_key(&key) {
                        continue;
                    }
                    if ex.nodes.len() == budget.max_nodes {
                        ex.budget_exhausted = true;
                        break 'levels;
                    }
                    ex.index.insert(key, ex.nodes.len());
                    next.push(ex.nodes.len());
                    ex.nodes.push(Node { code: child, parent: Some((parent, site)), depth: depth + 1 });
                }
            }
        }
        next.sort_by_cached_key(|&i| ex.nodes[i].code.canonical_text());
        frontier = next;
        depth += 1;
    }
    Ok(ex)
}

/// Replays `path` from the canonical form of `code`.
pub fn replay(code: &OpenGaussCode, path: &[MoveSite]) -> Result<OpenGaussCode, MoveError> {
    path.iter().try_fold(code.canonicalize(), |c, site| apply_move(&c, site))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    /// Sites replaying the first code onto the second.
    Equivalent(Vec<MoveSite>),
    /// An invariant taking different values on the two codes.
    Distinct { invariant: &'static str, left: LaurentPolynomial, right: LaurentPolynomial },
    Unknown,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Equivalent(path) => {
                f.write_str("EQUIVALENT")?;
                for s in path {
                    write!(f, " {s}")?;
                }
                Ok(())
            }
            Verdict::Distinct { invariant, left, right } => write!(f, "DISTINCT {invariant} {left} {right}"),
            Verdict::Unknown => f.write_str("UNKNOWN"),
        }
    }
}

/// Invariant separating classes in `mode`: knotoid_f in standard mode, the
/// f-polynomial of the underpass closure in under-closure mode.
pub fn class_invariant(code: &OpenGaussCode, mode: MoveMode) -> Option<(&'static str, LaurentPolynomial)> {
    match mode {
        MoveMode::Standard => knotoid_f(code).ok().map(|p| ("knotoid_f", p)),
        MoveMode::UnderClosure => {
            let d = PlanarDiagram::from_classical_code(code).ok()?;
            let knot = d.underpass_closure(&Route::Auto).ok()?;
            f_polynomial(&knot).ok().map(|p| ("underpass_f", p))
        }
    }
}

/// Bounded equivalence test. Identical canonical forms give an empty path;
/// a differing invariant gives `Distinct`; otherwise both sides are explored
/// and a meeting code yields a replayable path.
pub fn equivalent(a: &OpenGaussCode, b: &OpenGaussCode, budget: &SearchBudget) -> Result<Verdict, SearchError> {
    let (ca, cb) = (a.canonicalize(), b.canonicalize());
    if budget.mode == MoveMode::UnderClosure && !(is_classical(&ca) && is_classical(&cb)) {
        return Err(MoveError::NotClassical.into());
    }
    if ca == cb {
        return Ok(Verdict::Equivalent(Vec::new()));
    }
    if let (Some((name, fa)), Some((_, fb))) = (class_invariant(&ca, budget.mode), class_invariant(&cb, budget.mode)) {
        if fa != fb {
            return Ok(Verdict::Distinct { invariant: name, left: fa, right: fb });
        }
    }
    let ea = explore(&ca, budget)?;
    if let Some(path) = ea.path_to(&cb) {
        return Ok(Verdict::Equivalent(path));
    }
    let eb = explore(&cb, budget)?;
    for meet in ea.codes() {
        if !eb.contains(meet) {
            continue;
        }
        let Some(mut path) = ea.path_to(meet) else { continue };
        let back = eb.steps_to(meet).expect("meet lies in both");
        let mut ok = true;
        for (parent, site) in back.iter().rev() {
            match inverse_site(parent, site) {
                Some(inv) => path.push(inv),
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if ok && replay(&ca, &path).as_ref() == Ok(&cb) {
            return Ok(Verdict::Equivalent(path));
        }
    }
    Ok(Verdict::Unknown)
}

/// Rechecks a verdict: paths must replay and cited invariants must differ.
pub fn verify_verdict(a: &OpenGaussCode, b: &OpenGaussCode, verdict: &Verdict, mode: MoveMode) -> bool {
    match verdict {
        Verdict::Equivalent(path) => replay(a, path).map(|c| c == b.canonicalize()).unwrap_or(false),
        Verdict::Distinct { left, right, .. } => {
            left != right
                && class_invariant(a, mode).map(|(_, p)| &p == left).unwrap_or(false)
                && class_invariant(b, mode).map(|(_, p)| &p == right).unwrap_or(false)
        }
        Verdict::Unknown => true,
    }
}

/// Least carrier genus seen while exploring, with the first code attaining it.
///
/// Explores once per insertion cap `0..=max_crossings` and keeps the
/// smallest value, so the bound can only drop as any budget cap grows.
pub fn min_genus_bound(code: &OpenGaussCode, budget: &SearchBudget) -> Result<(usize, OpenGaussCode), SearchError> {
    let start = code.canonicalize();
    let mut best = (carrier_genus(&start).expect("valid code"), start.clone());
    for cap in 0..=budget.max_crossings {
        if best.0 == 0 {
            break;
        }
        let ex = explore(&start, &SearchBudget { max_crossings: cap, ..*budget })?;
        for c in ex.codes() {
            let g = carrier_genus(c).expect("valid code");
            if g < best.0 {
                best = (g, c.clone());
            }
        }
    }
    Ok(best)
}

/// Canonical cyclic codes one move away: every cut of the circle is treated
/// as an open code and given the standard moves.
pub fn cyclic_successors(code: &CyclicGaussCode, max_crossings: usize) -> Vec<CyclicGaussCode> {
    let caps = InsertionCaps::crossings(max_crossings);
    let cuts = code.len().max(1);
    let mut out: BTreeMap<String, CyclicGaussCode> = BTreeMap::new();
    for at in 0..cuts {
        let open = code.cut_at(at);
        for (_, next) in successors(&open, MoveMode::Standard, &caps).expect("standard mode") {
            let z = next.virtual_closure().canonicalize();
            out.entry(z.canonical_text()).or_insert(z);
        }
    }
    out.into_values().collect()
}

/// Breadth-first search over cyclic codes from `a` looking for `b`; returns
/// the number of moves when found.
pub fn cyclic_connected(a: &CyclicGaussCode, b: &CyclicGaussCode, budget: &SearchBudget) -> Option<usize> {
    let target = b.canonicalize().canonical_text();
    let start = a.canonicalize();
    let mut seen = HashMap::from([(start.canonical_text(), 0usize)]);
    if seen.contains_key(&target) {
        return Some(0);
    }
    let mut frontier = vec![start];
    for depth in 1..=budget.max_depth {
        let expanded: Vec<Vec<CyclicGaussCode>> =
            frontier.par_iter().map(|z| cyclic_successors(z, budget.max_crossings)).collect();
        let mut next = Vec::new();
        for z in expanded.into_iter().flatten() {
            let key = z.canonical_text();
            if key == target {
                return Some(depth);
            }
            if seen.len() >= budget.max_nodes {
                return None;
            }
            if let std::collections::hash_map::Entry::Vacant(slot) = seen.entry(key) {
                slot.insert(depth);
                next.push(z);
            }
        }
        if next.is_empty() {
            return None;
        }
        next.sort_by_cached_key(|z| z.canonical_text());
        frontier = next;
    }
    None
}

/// One line of a tabulation store.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TabulationRecord {
    pub code: String,
    pub crossings: usize,
    pub carrier_genus: usize,
    pub min_genus_bound: usize,
    pub f_poly: String,
    /// Row index (header excluded) of the first record in the same class.
    pub class_rep: usize,
}

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("store i/o: {0}")]
    Io(#[from] io::Error),
    #[error("store line {0}: {1}")]
    Format(usize, String),
    #[error(transparent)]
    Search(#[from] SearchError),
}

impl fmt::Display for TabulationRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}\t{}\t{}\t{}\t{}\t{}",
            self.code, self.crossings, self.carrier_genus, self.min_genus_bound, self.f_poly, self.class_rep
        )
    }
}

impl TabulationRecord {
    /// Recomputes the fields that depend only on the code.
    pub fn is_consistent(&self) -> bool {
        let Ok(code) = parse_code(&self.code) else { return false };
        code.is_canonical()
            && code.crossing_count() == self.crossings
            && carrier_genus(&code) == Ok(self.carrier_genus)
            && self.min_genus_bound <= self.carrier_genus
            && knotoid_f(&code).map(|p| p.to_string() == self.f_poly).unwrap_or(false)
    }
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

/// Records for every canonical code with at most `n_max` crossings, ordered
/// by crossing number then text. Codes whose explorations meet share a class.
pub fn tabulation_records(n_max: usize, budget: &SearchBudget) -> Result<Vec<TabulationRecord>, SearchError> {
    let codes: Vec<OpenGaussCode> = (0..=n_max).flat_map(canonical_codes).collect();
    let explorations: Vec<Exploration> =
        codes.par_iter().map(|c| explore(c, budget)).collect::<Result<_, _>>()?;
    let mut parent: Vec<usize> = (0..codes.len()).collect();
    let mut owner: HashMap<&str, usize> = HashMap::new();
    for (i, ex) in explorations.iter().enumerate() {
        for key in ex.keys() {
            match owner.get(key) {
                Some(&j) => {
                    let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                    let (lo, hi) = (ri.min(rj), ri.max(rj));
                    parent[hi] = lo;
                }
                None => {
                    owner.insert(key, i);
                }
            }
        }
    }
    let mut class_genus: HashMap<usize, usize> = HashMap::new();
    for (i, ex) in explorations.iter().enumerate() {
        let g = ex.codes().map(|c| carrier_genus(c).expect("valid code")).min().unwrap_or(0);
        let r = find(&mut parent, i);
        let slot = class_genus.entry(r).or_insert(g);
        *slot = (*slot).min(g);
    }
    let mut records = Vec::with_capacity(codes.len());
    for (i, code) in codes.iter().enumerate() {
        let r = find(&mut parent, i);
        records.push(TabulationRecord {
            code: code.canonical_text(),
            crossings: code.crossing_count(),
            carrier_genus: carrier_genus(code).expect("valid code"),
            min_genus_bound: class_genus[&r],
            f_poly: knotoid_f(code).map(|p| p.to_string()).unwrap_or_default(),
            class_rep: r,
        });
    }
    Ok(records)
}

pub fn store_text(records: &[TabulationRecord]) -> String {
    let mut out = String::from(STORE_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&r.to_string());
        out.push('\n');
    }
    out
}

/// Tabulates and rewrites the store at `path`; returns the record count.
pub fn tabulate(n_max: usize, budget: &SearchBudget, path: &Path) -> Result<usize, StoreError> {
    let records = tabulation_records(n_max, budget)?;
    fs::write(path, store_text(&records))?;
    Ok(records.len())
}

pub fn parse_store(text: &str) -> Result<Vec<TabulationRecord>, StoreError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h == STORE_HEADER => {}
        _ => return Err(StoreError::Format(1, "missing header".into())),
    }
    lines
        .map(|(no, line)| {
            let bad = |m: &str| StoreError::Format(no + 1, m.to_string());
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 6 {
                return Err(bad("expected 6 columns"));
            }
            let num = |s: &str| s.parse::<usize>().map_err(|_| bad("bad number"));
            Ok(TabulationRecord {
                code: cols[0].to_string(),
                crossings: num(cols[1])?,
                carrier_genus: num(cols[2])?,
                min_genus_bound: num(cols[3])?,
                f_poly: cols[4].to_string(),
                class_rep: num(cols[5])?,
            })
        })
        .collect()
}

pub fn read_store(path: &Path) -> Result<Vec<TabulationRecord>, StoreError> {
    parse_store(&fs::read_to_string(path)?)
}
