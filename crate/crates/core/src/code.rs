//! Open and cyclic Gauss codes.
//!
//! A knotoid diagram is recorded as the sequence of classical crossing
//! passages met while walking the curve from its tail to its head. Each
//! passage carries the crossing label, whether the walk goes over or under,
//! and the crossing sign. Virtual crossings are never recorded: the passage
//! sequence alone determines the abstract (ribbon surface) diagram, so the
//! virtual and mixed moves and the virtual endpoint move act trivially here.
//!
//! Sign convention (used by every module in the crate): a crossing is
//! positive when the overstrand crosses the understrand from left to right,
//! seen by a walker travelling along the understrand.
//!
//! ```text
//!            over-in
//!               |
//!   under-in ---|--> under-out        positive crossing
//!               v
//!            over-out
//! ```

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pass {
    Over,
    Under,
}

impl Pass {
    pub fn flip(self) -> Pass {
        match self {
            Pass::Over => Pass::Under,
            Pass::Under => Pass::Over,
        }
    }

    fn letter(self) -> char {
        match self {
            Pass::Over => 'O',
            Pass::Under => 'U',
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Pos,
    Neg,
}

impl Sign {
    pub fn value(self) -> i32 {
        match self {
            Sign::Pos => 1,
            Sign::Neg => -1,
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Pos => Sign::Neg,
            Sign::Neg => Sign::Pos,
        }
    }

    pub fn from_value(v: i32) -> Option<Sign> {
        match v {
            1 => Some(Sign::Pos),
            -1 => Some(Sign::Neg),
            _ => None,
        }
    }

    fn symbol(self) -> char {
        match self {
            Sign::Pos => '+',
            Sign::Neg => '-',
        }
    }
}

/// One passage of the curve through a classical crossing.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GaussEntry {
    pub label: u32,
    pub pass: Pass,
    pub sign: Sign,
}

impl GaussEntry {
    pub fn new(label: u32, pass: Pass, sign: Sign) -> Self {
        GaussEntry { label, pass, sign }
    }
}

impl fmt::Display for GaussEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}{}", self.pass.letter(), self.label, self.sign.symbol())
    }
}

impl FromStr for GaussEntry {
    type Err = CodeError;

    fn from_str(tok: &str) -> Result<Self, Self::Err> {
        let bad = || CodeError::Syntax(tok.to_string());
        let bytes = tok.as_bytes();
        if bytes.len() < 3 {
            return Err(bad());
        }
        let pass = match bytes[0] {
            b'O' => Pass::Over,
            b'U' => Pass::Under,
            _ => return Err(bad()),
        };
        let sign = match bytes[bytes.len() - 1] {
            b'+' => Sign::Pos,
            b'-' => Sign::Neg,
            _ => return Err(bad()),
        };
        let digits = &tok[1..tok.len() - 1];
        if !digits.bytes().all(|b| b.is_ascii_digit()) || digits.starts_with('0') {
            return Err(bad());
        }
        let label = digits.parse::<u32>().map_err(|_| bad())?;
        Ok(GaussEntry { label, pass, sign })
    }
}

/// First violated invariant of an entry sequence.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum Violation {
    #[error("label 0 is not allowed")]
    ZeroLabel,
    #[error("label {0} occurs once")]
    LabelOccursOnce(u32),
    #[error("label {0} occurs {1} times")]
    LabelOccursTooOften(u32, usize),
    #[error("label {0}: pass values equal")]
    EqualPasses(u32),
    #[error("label {0}: signs differ")]
    SignMismatch(u32),
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum CodeError {
    #[error("bad token `{0}`")]
    Syntax(String),
    #[error("more than one data line")]
    ExtraDataLine,
    #[error(transparent)]
    Invalid(#[from] Violation),
}

/// Checks the pairing, pass and sign invariants, reporting the first
/// violation in order of first occurrence.
pub fn validate(entries: &[GaussEntry]) -> Result<(), Violation> {
    let mut order: Vec<u32> = Vec::new();
    let mut seen: HashMap<u32, Vec<GaussEntry>> = HashMap::new();
    for e in entries {
        if e.label == 0 {
            return Err(Violation::ZeroLabel);
        }
        let slot = seen.entry(e.label).or_default();
        if slot.is_empty() {
            order.push(e.label);
        }
        slot.push(*e);
    }
    for label in order {
        let occ = &seen[&label];
        match occ.len() {
            1 => return Err(Violation::LabelOccursOnce(label)),
            2 => {}
            k => return Err(Violation::LabelOccursTooOften(label, k)),
        }
        if occ[0].pass == occ[1].pass {
            return Err(Violation::EqualPasses(label));
        }
        if occ[0].sign != occ[1].sign {
            return Err(Violation::SignMismatch(label));
        }
    }
    Ok(())
}

/// Renumbers labels 1, 2, ... in order of first occurrence.
fn relabel_first_occurrence(entries: &[GaussEntry]) -> Vec<GaussEntry> {
    let mut map: HashMap<u32, u32> = HashMap::with_capacity(entries.len() / 2);
    let mut next = 0;
    entries
        .iter()
        .map(|e| {
            let label = *map.entry(e.label).or_insert_with(|| {
                next += 1;
                next
            });
            GaussEntry { label, ..*e }
        })
        .collect()
}

fn write_tokens(entries: &[GaussEntry], f: &mut fmt::Formatter<'_>) -> fmt::Result {
    for (i, e) in entries.iter().enumerate() {
        if i > 0 {
            f.write_str(" ")?;
        }
        write!(f, "{e}")?;
    }
    Ok(())
}

/// Valid open Gauss code, read from tail to head.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OpenGaussCode {
    entries: Vec<GaussEntry>,
}

impl OpenGaussCode {
    pub fn new(entries: Vec<GaussEntry>) -> Result<Self, Violation> {
        validate(&entries)?;
        Ok(OpenGaussCode { entries })
    }

    /// Caller guarantees the invariants.
    pub(crate) fn from_valid(entries: Vec<GaussEntry>) -> Self {
        debug_assert_eq!(validate(&entries), Ok(()));
        OpenGaussCode { entries }
    }

    pub fn trivial() -> Self {
        OpenGaussCode::default()
    }

    pub fn entries(&self) -> &[GaussEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Number of classical crossings.
    pub fn crossing_count(&self) -> usize {
        self.entries.len() / 2
    }

    pub fn max_label(&self) -> u32 {
        self.entries.iter().map(|e| e.label).max().unwrap_or(0)
    }

    /// Positions of the two passages through `label`, in walk order.
    pub fn positions_of(&self, label: u32) -> Option<(usize, usize)> {
        let mut it = self.entries.iter().enumerate().filter(|(_, e)| e.label == label).map(|(i, _)| i);
        Some((it.next()?, it.next()?))
    }

    pub fn canonicalize(&self) -> OpenGaussCode {
        OpenGaussCode { entries: relabel_first_occurrence(&self.entries) }
    }

    pub fn is_canonical(&self) -> bool {
        let mut next = 1;
        for e in &self.entries {
            if e.label == next {
                next += 1;
            } else if e.label > next {
                return false;
            }
        }
        true
    }

    /// Applies a label bijection; labels missing from `map` are kept.
    pub fn relabel(&self, map: &HashMap<u32, u32>) -> Result<OpenGaussCode, Violation> {
        let entries = self
            .entries
            .iter()
            .map(|e| GaussEntry { label: *map.get(&e.label).unwrap_or(&e.label), ..*e })
            .collect();
        OpenGaussCode::new(entries)
    }

    /// Knotoid product: `self` followed by `other`, gluing the head of the
    /// first diagram to the tail of the second.
    pub fn product(&self, other: &OpenGaussCode) -> OpenGaussCode {
        let shift = self.max_label();
        let mut entries = self.entries.clone();
        entries.extend(other.entries.iter().map(|e| GaussEntry { label: e.label + shift, ..*e }));
        OpenGaussCode::from_valid(entries).canonicalize()
    }

    /// Joins head to tail by an arc whose intersections are all virtual.
    pub fn virtual_closure(&self) -> CyclicGaussCode {
        CyclicGaussCode { entries: self.entries.clone() }
    }

    /// Text of the canonical form; used as the search key.
    pub fn canonical_text(&self) -> String {
        self.canonicalize().to_string()
    }

    /// `.gko` file contents (canonical labels).
    pub fn to_gko(&self) -> String {
        format!("{}\n", self.canonical_text())
    }
}

impl fmt::Display for OpenGaussCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_tokens(&self.entries, f)
    }
}

impl FromStr for OpenGaussCode {
    type Err = CodeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_code(s)
    }
}

/// Parses a whitespace-separated token list.
pub fn parse_code(text: &str) -> Result<OpenGaussCode, CodeError> {
    let entries = text
        .split_whitespace()
        .map(GaussEntry::from_str)
        .collect::<Result<Vec<_>, _>>()?;
    Ok(OpenGaussCode::new(entries)?)
}

/// Parses `.gko` text: `#` comment lines and at most one data line.
pub fn parse_gko(text: &str) -> Result<OpenGaussCode, CodeError> {
    let mut data = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
    let code = match data.next() {
        Some(line) => parse_code(line)?,
        None => OpenGaussCode::trivial(),
    };
    if data.next().is_some() {
        return Err(CodeError::ExtraDataLine);
    }
    Ok(code)
}

/// Gauss code of a closed curve; equality is up to rotation.
#[derive(Clone, Debug, Default, Eq)]
pub struct CyclicGaussCode {
    entries: Vec<GaussEntry>,
}

impl CyclicGaussCode {
    pub fn new(entries: Vec<GaussEntry>) -> Result<Self, Violation> {
        validate(&entries)?;
        Ok(CyclicGaussCode { entries })
    }

    pub(crate) fn from_valid(entries: Vec<GaussEntry>) -> Self {
        debug_assert_eq!(validate(&entries), Ok(()));
        CyclicGaussCode { entries }
    }

    pub fn entries(&self) -> &[GaussEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn crossing_count(&self) -> usize {
        self.entries.len() / 2
    }

    pub fn rotated(&self, by: usize) -> CyclicGaussCode {
        let mut entries = self.entries.clone();
        if !entries.is_empty() {
            let k = by % entries.len();
            entries.rotate_left(k);
        }
        CyclicGaussCode { entries }
    }

    /// Cuts the circle before position `at`, giving an open code.
    pub fn cut_at(&self, at: usize) -> OpenGaussCode {
        OpenGaussCode::from_valid(self.rotated(at).entries)
    }

    /// Least relabelled rotation; equal for codes that agree up to rotation
    /// and label renaming.
    pub fn canonicalize(&self) -> CyclicGaussCode {
        if self.entries.is_empty() {
            return CyclicGaussCode::default();
        }
        (0..self.entries.len())
            .map(|r| {
                let mut rot = self.entries.clone();
                rot.rotate_left(r);
                relabel_first_occurrence(&rot)
            })
            .min()
            .map(|entries| CyclicGaussCode { entries })
            .expect("non-empty")
    }

    pub fn canonical_text(&self) -> String {
        self.canonicalize().to_string()
    }
}

impl PartialEq for CyclicGaussCode {
    fn eq(&self, other: &Self) -> bool {
        if self.entries.len() != other.entries.len() {
            return false;
        }
        if self.entries.is_empty() {
            return true;
        }
        (0..self.entries.len()).any(|r| {
            let n = self.entries.len();
            (0..n).all(|i| self.entries[(i + r) % n] == other.entries[i])
        })
    }
}

impl fmt::Display for CyclicGaussCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_tokens(&self.entries, f)
    }
}

/// Every canonical open code with exactly `n` crossings, in increasing
/// order of canonical text.
pub fn canonical_codes(n: usize) -> Vec<OpenGaussCode> {
    // Pairings of 2n slots, labelled by first occurrence.
    fn pairings(slots: &mut Vec<u32>, next: u32, out: &mut Vec<Vec<u32>>) {
        match slots.iter().position(|&l| l == 0) {
            None => out.push(slots.clone()),
            Some(first) => {
                slots[first] = next;
                for j in first + 1..slots.len() {
                    if slots[j] == 0 {
                        slots[j] = next;
                        pairings(slots, next + 1, out);
                        slots[j] = 0;
                    }
                }
                slots[first] = 0;
            }
        }
    }

    let mut shapes = Vec::new();
    pairings(&mut vec![0; 2 * n], 1, &mut shapes);
    let mut codes = Vec::with_capacity(shapes.len() << (2 * n));
    for shape in &shapes {
        for bits in 0u32..(1 << (2 * n)) {
            let entries = shape
                .iter()
                .scan(vec![false; n + 1], |started, &label| {
                    let l = label as usize - 1;
                    let first_over = bits >> (2 * l) & 1 == 0;
                    let sign = if bits >> (2 * l + 1) & 1 == 0 { Sign::Pos } else { Sign::Neg };
                    let first = !started[label as usize];
                    started[label as usize] = true;
                    let pass = if first == first_over { Pass::Over } else { Pass::Under };
                    Some(GaussEntry { label, pass, sign })
                })
                .collect();
            codes.push(OpenGaussCode::from_valid(entries));
        }
    }
    codes.sort_by_cached_key(|c| c.to_string());
    codes
}

/// Uniformly shuffled valid code with `n` crossings and random passes/signs.
pub fn random_code<R: Rng + ?Sized>(rng: &mut R, n: usize) -> OpenGaussCode {
    let mut slots: Vec<u32> = (1..=n as u32).flat_map(|l| [l, l]).collect();
    slots.shuffle(rng);
    let first_over: Vec<bool> = (0..=n).map(|_| rng.gen()).collect();
    let signs: Vec<Sign> = (0..=n).map(|_| if rng.gen() { Sign::Pos } else { Sign::Neg }).collect();
    let mut started = vec![false; n + 1];
    let entries = slots
        .into_iter()
        .map(|label| {
            let l = label as usize;
            let first = !started[l];
            started[l] = true;
            let pass = if first == first_over[l] { Pass::Over } else { Pass::Under };
            GaussEntry { label, pass, sign: signs[l] }
        })
        .collect();
    OpenGaussCode::from_valid(entries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn e(label: u32, pass: Pass, sign: Sign) -> GaussEntry {
        GaussEntry::new(label, pass, sign)
    }
    use Pass::*;
    use Sign::*;

    #[test]
    fn parse_examples() {
        assert_eq!(parse_code("").unwrap(), OpenGaussCode::trivial());
        assert_eq!(parse_code("O1+ U1+").unwrap().entries(), &[e(1, Over, Pos), e(1, Under, Pos)]);
        assert_eq!(parse_code("O1+ U1-"), Err(CodeError::Invalid(Violation::SignMismatch(1))));
    }

    #[test]
    fn parse_rejects_bad_tokens() {
        for bad in ["X1+", "O01+", "O+", "O1", "O1*", "o1+", "O1+U1+", "O-1+"] {
            assert!(matches!(parse_code(bad), Err(CodeError::Syntax(_))), "{bad}");
        }
    }

    #[test]
    fn validate_examples() {
        assert_eq!(validate(&[e(1, Over, Pos), e(1, Under, Pos)]), Ok(()));
        assert_eq!(validate(&[e(1, Over, Pos), e(1, Over, Pos)]), Err(Violation::EqualPasses(1)));
        assert_eq!(validate(&[e(1, Over, Pos)]), Err(Violation::LabelOccursOnce(1)));
        assert_eq!(
            validate(&[e(2, Over, Pos), e(2, Under, Pos), e(2, Over, Pos)]),
            Err(Violation::LabelOccursTooOften(2, 3))
        );
        assert_eq!(validate(&[e(0, Over, Pos), e(0, Under, Pos)]), Err(Violation::ZeroLabel));
    }

    #[test]
    fn gko_comments_and_blank() {
        assert_eq!(parse_gko("# nothing\n").unwrap(), OpenGaussCode::trivial());
        assert_eq!(parse_gko("# kink\nO1+ U1+\n\n").unwrap().len(), 2);
        assert_eq!(parse_gko("O1+ U1+\nO1+ U1+\n"), Err(CodeError::ExtraDataLine));
        assert_eq!(parse_code("O7+ U7+").unwrap().to_gko(), "O1+ U1+\n");
    }

    #[test]
    fn canonicalize_examples() {
        let c = parse_code("O7+ U7+").unwrap();
        assert_eq!(c.canonicalize().to_string(), "O1+ U1+");
        let c = parse_code("O3+ O5- U3+ U5-").unwrap();
        assert_eq!(c.canonicalize().to_string(), "O1+ O2- U1+ U2-");
        assert!(!c.is_canonical());
        assert!(c.canonicalize().is_canonical());
    }

    #[test]
    fn product_examples() {
        let a = parse_code("O1+ U1+").unwrap();
        let b = parse_code("O1- U1-").unwrap();
        assert_eq!(a.product(&b).to_string(), "O1+ U1+ O2- U2-");
        let t = OpenGaussCode::trivial();
        assert_eq!(t.product(&a), a);
        assert_eq!(a.product(&t), a);
    }

    #[test]
    fn closure_examples() {
        assert!(OpenGaussCode::trivial().virtual_closure().is_empty());
        let a = parse_code("O1+ U1+").unwrap();
        assert_eq!(a.virtual_closure().entries(), a.entries());
        let c = parse_code("O1+ O2- U1+ U2-").unwrap().virtual_closure();
        assert_eq!(c, c.rotated(3));
        assert_ne!(c, parse_code("O1+ U1+ O2- U2-").unwrap().virtual_closure());
    }

    #[test]
    fn canonical_code_counts() {
        assert_eq!(canonical_codes(0).len(), 1);
        assert_eq!(canonical_codes(1).len(), 4);
        assert_eq!(canonical_codes(2).len(), 3 * 16);
        assert_eq!(canonical_codes(3).len(), 15 * 64);
        for c in canonical_codes(2) {
            assert!(c.is_canonical());
        }
    }

    fn arb_code() -> impl Strategy<Value = OpenGaussCode> {
        (0usize..7, any::<u64>()).prop_map(|(n, seed)| random_code(&mut ChaCha8Rng::seed_from_u64(seed), n))
    }

    proptest! {
        #[test]
        fn display_parse_round_trip(c in arb_code()) {
            prop_assert_eq!(parse_code(&c.to_string()).unwrap(), c);
        }

        #[test]
        fn canonicalize_idempotent_and_permutation_invariant(c in arb_code(), seed in any::<u64>()) {
            let canon = c.canonicalize();
            prop_assert_eq!(canon.canonicalize(), canon.clone());
            let mut targets: Vec<u32> = (1..=c.max_label()).map(|l| l * 3 + 10).collect();
            targets.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
            let map: HashMap<u32, u32> = (1..=c.max_label()).zip(targets).collect();
            prop_assert_eq!(c.relabel(&map).unwrap().canonicalize(), canon);
        }

        #[test]
        fn product_associative(a in arb_code(), b in arb_code(), c in arb_code()) {
            prop_assert_eq!(a.product(&b).product(&c), a.product(&b.product(&c)));
        }

        #[test]
        fn closure_of_product_concatenates(a in arb_code(), b in arb_code()) {
            let p = a.product(&b).virtual_closure();
            let shift = a.max_label();
            let mut expected: Vec<GaussEntry> = a.virtual_closure().entries().to_vec();
            expected.extend(b.virtual_closure().entries().iter().map(|e| GaussEntry { label: e.label + shift, ..*e }));
            let expected = CyclicGaussCode::new(expected).unwrap();
            prop_assert_eq!(p.canonicalize(), expected.canonicalize());
        }

        #[test]
        fn cyclic_canonical_is_rotation_invariant(c in arb_code(), r in 0usize..20) {
            let z = c.virtual_closure();
            prop_assert_eq!(z.rotated(r).canonicalize(), z.canonicalize());
        }
    }
}
