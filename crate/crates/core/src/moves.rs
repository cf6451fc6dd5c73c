//! Reidemeister moves on open Gauss codes.
//!
//! Deletion sites (R1-, R2-, R3 and, in under-closure mode, the endpoint
//! slide Ω-) are found by pattern matching; insertion sites (R1+, R2+) are
//! enumerated over every gap of the code within caller-supplied caps.
//!
//! Local pass/sign patterns:
//!
//! * R1: an adjacent pair `X_a Y_a` with `X != Y`. Variant `2 * under_first + negative`.
//! * R2: adjacent pairs `P_a P_b` and, later in the code, `Q_a Q_b` or
//!   `Q_b Q_a` with `Q != P` and `sign(a) = -sign(b)`. Variant
//!   `4 * (P == U) + 2 * swapped_order + (sign(a) == -)`.
//! * R3: three disjoint adjacent blocks, pairwise sharing one label, whose
//!   pattern appears in a table generated from three straight strands at
//!   three heights (see [`r3_variants`]). The move swaps each block.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use thiserror::Error;

use crate::code::{GaussEntry, OpenGaussCode, Pass, Sign};
use crate::surface::is_classical;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MoveKind {
    R1Plus,
    R1Minus,
    R2Plus,
    R2Minus,
    R3,
    /// Pull the endpoint strand back out from under its first crossing.
    OmegaMinus,
}

impl MoveKind {
    fn arity(self) -> usize {
        match self {
            MoveKind::R1Plus | MoveKind::R1Minus | MoveKind::OmegaMinus => 1,
            MoveKind::R2Plus | MoveKind::R2Minus => 2,
            MoveKind::R3 => 3,
        }
    }

    fn name(self) -> &'static str {
        match self {
            MoveKind::R1Plus => "R1+",
            MoveKind::R1Minus => "R1-",
            MoveKind::R2Plus => "R2+",
            MoveKind::R2Minus => "R2-",
            MoveKind::R3 => "R3",
            MoveKind::OmegaMinus => "OMEGA-",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MoveMode {
    Standard,
    /// Adds Ω- and keeps to codes realisable on the sphere.
    UnderClosure,
}

impl FromStr for MoveMode {
    type Err = MoveError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "standard" => Ok(MoveMode::Standard),
            "under-closure" => Ok(MoveMode::UnderClosure),
            _ => Err(MoveError::Parse(s.to_string())),
        }
    }
}

/// Limits on insertion sites.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct InsertionCaps {
    /// Insertions may not push the crossing number above this.
    pub max_crossings: usize,
    /// Largest gap index used for insertions; `None` means every gap.
    pub max_position: Option<usize>,
}

impl InsertionCaps {
    pub fn crossings(max_crossings: usize) -> Self {
        InsertionCaps { max_crossings, max_position: None }
    }

    pub fn none() -> Self {
        InsertionCaps { max_crossings: 0, max_position: None }
    }
}

/// A concrete move instance. Locations are entry positions for deletions
/// and R3, gap indices (`0..=len`) for insertions; unused slots are zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MoveSite {
    pub kind: MoveKind,
    pub loc: [usize; 3],
    pub variant: usize,
}

impl MoveSite {
    pub fn new(kind: MoveKind, locs: &[usize], variant: usize) -> Self {
        let mut loc = [0; 3];
        loc[..locs.len()].copy_from_slice(locs);
        MoveSite { kind, loc, variant }
    }

    pub fn locations(&self) -> &[usize] {
        &self.loc[..self.kind.arity()]
    }
}

impl fmt::Display for MoveSite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@", self.kind.name())?;
        for (i, l) in self.locations().iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{l}")?;
        }
        write!(f, "#{}", self.variant)
    }
}

impl FromStr for MoveSite {
    type Err = MoveError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || MoveError::Parse(s.to_string());
        let (kind, rest) = s.split_once('@').ok_or_else(bad)?;
        let (locs, variant) = rest.split_once('#').ok_or_else(bad)?;
        let kind = [
            MoveKind::R1Plus,
            MoveKind::R1Minus,
            MoveKind::R2Plus,
            MoveKind::R2Minus,
            MoveKind::R3,
            MoveKind::OmegaMinus,
        ]
        .into_iter()
        .find(|k| k.name() == kind)
        .ok_or_else(bad)?;
        let locs: Vec<usize> = locs.split(',').map(|l| l.parse().map_err(|_| bad())).collect::<Result<_, _>>()?;
        if locs.len() != kind.arity() {
            return Err(bad());
        }
        let variant = variant.parse().map_err(|_| bad())?;
        Ok(MoveSite::new(kind, &locs, variant))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum MoveError {
    #[error("code is not realisable on the sphere; under-closure mode refuses it")]
    NotClassical,
    #[error("site {0} does not fit this code")]
    StaleSite(String),
    #[error("site {0}: pattern is not in the variant table")]
    VariantMismatch(String),
    #[error("cannot parse `{0}`")]
    Parse(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum End {
    Tail,
    Head,
}

/// True when the entry next to `end` has the given pass, i.e. the forbidden
/// endpoint slide Ω+ (over) or Ω- (under) is syntactically available.
pub fn is_forbidden_endpoint_slide(code: &OpenGaussCode, end: End, pass: Pass) -> bool {
    let entry = match end {
        End::Tail => code.entries().first(),
        End::Head => code.entries().last(),
    };
    entry.is_some_and(|e| e.pass == pass)
}

// ---------------------------------------------------------------- R1

fn r1_variant(first: &GaussEntry) -> usize {
    2 * (first.pass == Pass::Under) as usize + (first.sign == Sign::Neg) as usize
}

fn r1_pair(label: u32, variant: usize) -> [GaussEntry; 2] {
    let pass = if variant & 2 == 0 { Pass::Over } else { Pass::Under };
    let sign = if variant & 1 == 0 { Sign::Pos } else { Sign::Neg };
    [GaussEntry::new(label, pass, sign), GaussEntry::new(label, pass.flip(), sign)]
}

// ---------------------------------------------------------------- R2

/// Variant of an R2 bigon with pairs starting at `i < j`, if it is one.
fn r2_variant(e: &[GaussEntry], i: usize, j: usize) -> Option<usize> {
    let (p, q) = (&e[i..i + 2], &e[j..j + 2]);
    let (a, b) = (p[0], p[1]);
    if a.label == b.label || a.pass != b.pass || a.sign == b.sign {
        return None;
    }
    let swapped = if q[0].label == a.label && q[1].label == b.label {
        false
    } else if q[0].label == b.label && q[1].label == a.label {
        true
    } else {
        return None;
    };
    Some(4 * (a.pass == Pass::Under) as usize + 2 * swapped as usize + (a.sign == Sign::Neg) as usize)
}

fn r2_pairs(a: u32, b: u32, variant: usize) -> ([GaussEntry; 2], [GaussEntry; 2]) {
    let pass = if variant & 4 == 0 { Pass::Over } else { Pass::Under };
    let sa = if variant & 1 == 0 { Sign::Pos } else { Sign::Neg };
    let ea = GaussEntry::new(a, pass, sa);
    let eb = GaussEntry::new(b, pass, sa.flip());
    let fa = GaussEntry::new(a, pass.flip(), sa);
    let fb = GaussEntry::new(b, pass.flip(), sa.flip());
    let second = if variant & 2 == 0 { [fa, fb] } else { [fb, fa] };
    ([ea, eb], second)
}

// ---------------------------------------------------------------- R3

/// Six passages of an R3 triangle, three blocks in code order, with the
/// crossings renamed 0, 1, 2 by first occurrence.
pub type R3Pattern = [(u8, Pass, Sign); 6];

pub struct R3Table {
    patterns: Vec<R3Pattern>,
    index: HashMap<R3Pattern, usize>,
}

impl R3Table {
    pub fn patterns(&self) -> &[R3Pattern] {
        &self.patterns
    }

    pub fn lookup(&self, pattern: &R3Pattern) -> Option<usize> {
        self.index.get(pattern).copied()
    }
}

/// Normalises three strand blocks (in code order) into a pattern.
pub fn r3_pattern(blocks: [[(u32, Pass, Sign); 2]; 3]) -> Option<R3Pattern> {
    let mut names: Vec<u32> = Vec::with_capacity(3);
    let mut out = [(0u8, Pass::Over, Sign::Pos); 6];
    for (k, (label, pass, sign)) in blocks.iter().flatten().enumerate() {
        let id = match names.iter().position(|l| l == label) {
            Some(id) => id,
            None => {
                names.push(*label);
                names.len() - 1
            }
        };
        if id > 2 {
            return None;
        }
        out[k] = (id as u8, *pass, *sign);
    }
    Some(out)
}

/// Patterns realised by three straight directed strands at distinct heights
/// crossing in a triangle, over every strand direction, every height order,
/// both sides of the triple point, both mirror images and every order in
/// which the curve can visit the three strands.
fn generate_r3_table() -> R3Table {
    let s3 = 3f64.sqrt() / 2.0;
    let mut all: Vec<R3Pattern> = Vec::new();
    let perms: [[u8; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    for mirror in [1.0, -1.0] {
        for y0 in [0.0, 2.0] {
            for dirs in 0..8 {
                for heights in perms {
                    let mut lines = [((0.0, y0), (1.0, 0.0)), ((0.0, 0.0), (0.5, s3)), ((1.0, 0.0), (-0.5, s3))];
                    for (k, line) in lines.iter_mut().enumerate() {
                        line.0 .0 *= mirror;
                        line.1 .0 *= mirror;
                        if dirs >> k & 1 == 1 {
                            line.1 = (-line.1 .0, -line.1 .1);
                        }
                    }
                    let blocks = strand_blocks(&lines, &heights);
                    for order in perms {
                        let pattern = r3_pattern([blocks[order[0] as usize], blocks[order[1] as usize], blocks[order[2] as usize]])
                            .expect("three crossings");
                        all.push(pattern);
                    }
                }
            }
        }
    }
    all.sort();
    all.dedup();
    let index = all.iter().enumerate().map(|(i, p)| (*p, i)).collect();
    R3Table { patterns: all, index }
}

type Line = ((f64, f64), (f64, f64));

/// Passages along each strand, in travel order. Crossing `k` is the one
/// not on strand `k`.
pub(crate) fn strand_blocks(lines: &[Line; 3], heights: &[u8; 3]) -> [[(u32, Pass, Sign); 2]; 3] {
    let cross = |a: (f64, f64), b: (f64, f64)| a.0 * b.1 - a.1 * b.0;
    // Parameter along line i of its intersection with line j.
    let param = |i: usize, j: usize| {
        let ((pi, di), (pj, dj)) = (lines[i], lines[j]);
        let w = (pj.0 - pi.0, pj.1 - pi.1);
        cross(w, dj) / cross(di, dj)
    };
    let mut blocks = [[(0u32, Pass::Over, Sign::Pos); 2]; 3];
    for i in 0..3 {
        let mut meets: Vec<(f64, u32, Pass, Sign)> = (0..3)
            .filter(|&j| j != i)
            .map(|j| {
                let label = (3 - i - j) as u32 + 1;
                let (over, under) = if heights[i] > heights[j] { (i, j) } else { (j, i) };
                let sign = if cross(lines[over].1, lines[under].1) > 0.0 { Sign::Pos } else { Sign::Neg };
                let pass = if over == i { Pass::Over } else { Pass::Under };
                (param(i, j), label, pass, sign)
            })
            .collect();
        meets.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite"));
        blocks[i] = [(meets[0].1, meets[0].2, meets[0].3), (meets[1].1, meets[1].2, meets[1].3)];
    }
    blocks
}

pub fn r3_variants() -> &'static R3Table {
    static TABLE: OnceLock<R3Table> = OnceLock::new();
    TABLE.get_or_init(generate_r3_table)
}

fn r3_blocks(e: &[GaussEntry], i: usize, j: usize, k: usize) -> [[(u32, Pass, Sign); 2]; 3] {
    let t = |p: usize| (e[p].label, e[p].pass, e[p].sign);
    [[t(i), t(i + 1)], [t(j), t(j + 1)], [t(k), t(k + 1)]]
}

/// Label sharing shape of an R3 site: blocks pairwise share exactly one
/// label and no block repeats one.
fn r3_shape_ok(e: &[GaussEntry], i: usize, j: usize, k: usize) -> bool {
    let pair = |p: usize| (e[p].label, e[p + 1].label);
    let shares = |x: (u32, u32), y: (u32, u32)| {
        (x.0 == y.0) as u8 + (x.0 == y.1) as u8 + (x.1 == y.0) as u8 + (x.1 == y.1) as u8
    };
    let (a, b, c) = (pair(i), pair(j), pair(k));
    a.0 != a.1 && b.0 != b.1 && c.0 != c.1 && shares(a, b) == 1 && shares(a, c) == 1 && shares(b, c) == 1
}

fn r3_variant(e: &[GaussEntry], i: usize, j: usize, k: usize) -> Option<usize> {
    r3_variants().lookup(&r3_pattern(r3_blocks(e, i, j, k))?)
}

// ---------------------------------------------------------------- enumeration

fn insert_gaps(m: usize, caps: &InsertionCaps) -> usize {
    caps.max_position.map_or(m, |p| p.min(m))
}

/// Every standard-mode site, sorted by (kind, location, variant).
fn standard_sites(code: &OpenGaussCode, caps: &InsertionCaps) -> Vec<MoveSite> {
    let e = code.entries();
    let m = e.len();
    let n = code.crossing_count();
    let mut out = Vec::new();

    if n < caps.max_crossings {
        for g in 0..=insert_gaps(m, caps) {
            for v in 0..4 {
                out.push(MoveSite::new(MoveKind::R1Plus, &[g], v));
            }
        }
    }
    for i in 0..m.saturating_sub(1) {
        if e[i].label == e[i + 1].label {
            out.push(MoveSite::new(MoveKind::R1Minus, &[i], r1_variant(&e[i])));
        }
    }
    if n + 2 <= caps.max_crossings {
        let top = insert_gaps(m, caps);
        for g1 in 0..=top {
            for g2 in g1..=top {
                for v in 0..8 {
                    out.push(MoveSite::new(MoveKind::R2Plus, &[g1, g2], v));
                }
            }
        }
    }
    for i in 0..m.saturating_sub(1) {
        for j in i + 2..m.saturating_sub(1) {
            if let Some(v) = r2_variant(e, i, j) {
                out.push(MoveSite::new(MoveKind::R2Minus, &[i, j], v));
            }
        }
    }
    for i in 0..m.saturating_sub(1) {
        for j in i + 2..m.saturating_sub(1) {
            for k in j + 2..m.saturating_sub(1) {
                if r3_shape_ok(e, i, j, k) {
                    if let Some(v) = r3_variant(e, i, j, k) {
                        out.push(MoveSite::new(MoveKind::R3, &[i, j, k], v));
                    }
                }
            }
        }
    }
    out
}

fn omega_sites(code: &OpenGaussCode) -> Vec<MoveSite> {
    let m = code.len();
    let mut out = Vec::new();
    if is_forbidden_endpoint_slide(code, End::Tail, Pass::Under) {
        out.push(MoveSite::new(MoveKind::OmegaMinus, &[0], 0));
    }
    if is_forbidden_endpoint_slide(code, End::Head, Pass::Under) {
        out.push(MoveSite::new(MoveKind::OmegaMinus, &[m - 1], 0));
    }
    out
}

/// Applicable sites paired with their results.
pub fn successors(
    code: &OpenGaussCode,
    mode: MoveMode,
    caps: &InsertionCaps,
) -> Result<Vec<(MoveSite, OpenGaussCode)>, MoveError> {
    match mode {
        MoveMode::Standard => Ok(standard_sites(code, caps)
            .into_iter()
            .map(|s| {
                let r = apply_move(code, &s).expect("enumerated site applies");
                (s, r)
            })
            .collect()),
        MoveMode::UnderClosure => {
            if !is_classical(code) {
                return Err(MoveError::NotClassical);
            }
            let mut sites = standard_sites(code, caps);
            sites.extend(omega_sites(code));
            Ok(sites
                .into_iter()
                .filter_map(|s| {
                    let r = apply_move(code, &s).expect("enumerated site applies");
                    is_classical(&r).then_some((s, r))
                })
                .collect())
        }
    }
}

/// Every applicable site in deterministic (kind, location, variant) order.
/// Under-closure mode adds Ω- and keeps only sites whose result is still
/// realisable on the sphere.
pub fn enumerate_moves(code: &OpenGaussCode, mode: MoveMode, caps: &InsertionCaps) -> Result<Vec<MoveSite>, MoveError> {
    Ok(successors(code, mode, caps)?.into_iter().map(|(s, _)| s).collect())
}

// ---------------------------------------------------------------- application

/// Rewrites `code` at `site` and re-canonicalises.
pub fn apply_move(code: &OpenGaussCode, site: &MoveSite) -> Result<OpenGaussCode, MoveError> {
    let e = code.entries();
    let m = e.len();
    let stale = || MoveError::StaleSite(site.to_string());
    let mismatch = || MoveError::VariantMismatch(site.to_string());
    let l = site.loc;
    let out: Vec<GaussEntry> = match site.kind {
        MoveKind::R1Minus => {
            let i = l[0];
            if i + 1 >= m || e[i].label != e[i + 1].label {
                return Err(stale());
            }
            if r1_variant(&e[i]) != site.variant {
                return Err(mismatch());
            }
            [&e[..i], &e[i + 2..]].concat()
        }
        MoveKind::R1Plus => {
            let g = l[0];
            if g > m {
                return Err(stale());
            }
            if site.variant >= 4 {
                return Err(mismatch());
            }
            let pair = r1_pair(code.max_label() + 1, site.variant);
            [&e[..g], &pair[..], &e[g..]].concat()
        }
        MoveKind::R2Minus => {
            let (i, j) = (l[0], l[1]);
            if j < i + 2 || j + 1 >= m {
                return Err(stale());
            }
            let labels = |p: usize| {
                let mut x = [e[p].label, e[p + 1].label];
                x.sort();
                x
            };
            if e[i].label == e[i + 1].label || labels(i) != labels(j) {
                return Err(stale());
            }
            if r2_variant(e, i, j) != Some(site.variant) {
                return Err(mismatch());
            }
            [&e[..i], &e[i + 2..j], &e[j + 2..]].concat()
        }
        MoveKind::R2Plus => {
            let (g1, g2) = (l[0], l[1]);
            if g1 > g2 || g2 > m {
                return Err(stale());
            }
            if site.variant >= 8 {
                return Err(mismatch());
            }
            let a = code.max_label() + 1;
            let (p, q) = r2_pairs(a, a + 1, site.variant);
            [&e[..g1], &p[..], &e[g1..g2], &q[..], &e[g2..]].concat()
        }
        MoveKind::R3 => {
            let (i, j, k) = (l[0], l[1], l[2]);
            if j < i + 2 || k < j + 2 || k + 1 >= m || !r3_shape_ok(e, i, j, k) {
                return Err(stale());
            }
            if r3_variant(e, i, j, k) != Some(site.variant) {
                return Err(mismatch());
            }
            let mut out = e.to_vec();
            for p in [i, j, k] {
                out.swap(p, p + 1);
            }
            out
        }
        MoveKind::OmegaMinus => {
            let p = l[0];
            if m == 0 || !(p == 0 || p == m - 1) || e[p].pass != Pass::Under {
                return Err(stale());
            }
            if site.variant != 0 {
                return Err(mismatch());
            }
            let label = e[p].label;
            e.iter().filter(|x| x.label != label).copied().collect()
        }
    };
    Ok(OpenGaussCode::from_valid(out).canonicalize())
}

/// The site on the result of `site` that undoes it. Ω- has no inverse in
/// the move set.
pub fn inverse_site(before: &OpenGaussCode, site: &MoveSite) -> Option<MoveSite> {
    let l = site.loc;
    match site.kind {
        MoveKind::R1Minus => Some(MoveSite::new(MoveKind::R1Plus, &[l[0]], site.variant)),
        MoveKind::R1Plus => Some(MoveSite::new(MoveKind::R1Minus, &[l[0]], site.variant)),
        MoveKind::R2Minus => Some(MoveSite::new(MoveKind::R2Plus, &[l[0], l[1] - 2], site.variant)),
        MoveKind::R2Plus => Some(MoveSite::new(MoveKind::R2Minus, &[l[0], l[1] + 2], site.variant)),
        MoveKind::R3 => {
            let e = before.entries();
            let swap = |p: usize| [(e[p + 1].label, e[p + 1].pass, e[p + 1].sign), (e[p].label, e[p].pass, e[p].sign)];
            let pattern = r3_pattern([swap(l[0]), swap(l[1]), swap(l[2])])?;
            Some(MoveSite::new(MoveKind::R3, &l, r3_variants().lookup(&pattern)?))
        }
        MoveKind::OmegaMinus => None,
    }
}
