//! Kauffman bracket state sum on Gauss codes and its writhe normalisation.
//!
//! The bracket of a virtual knot diagram is read off its cyclic Gauss code:
//! each state picks a smoothing at every classical crossing and the loops
//! are counted as cycles of a permutation on arc endpoints. Virtual
//! crossings never appear in a code and need no handling.
//!
//! For a positive crossing the A-smoothing is the orientation-respecting
//! one; for a negative crossing it is the other.

use std::collections::HashMap;

use rayon::prelude::*;
use thiserror::Error;

use crate::code::{CyclicGaussCode, GaussEntry, OpenGaussCode, Sign};
use crate::poly::LaurentPolynomial;

pub const DEFAULT_MAX_BRACKET_CROSSINGS: usize = 20;

/// States evaluated per parallel task.
const STATE_CHUNK: u64 = 1 << 12;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum InvariantError {
    #[error("{crossings} crossings exceed the bracket cap of {cap}")]
    CapExceeded { crossings: usize, cap: usize },
}

/// Sum of crossing signs, each crossing counted once.
pub fn writhe(entries: &[GaussEntry]) -> i32 {
    entries.iter().map(|e| e.sign.value()).sum::<i32>() / 2
}

struct Smoothing {
    a: [(usize, usize); 2],
    b: [(usize, usize); 2],
}

/// Endpoint numbering: passage `p` owns the incoming end `2p` and the
/// outgoing end `2p + 1`.
fn smoothings(entries: &[GaussEntry]) -> Vec<Smoothing> {
    let mut first: HashMap<u32, usize> = HashMap::new();
    let mut out = Vec::with_capacity(entries.len() / 2);
    for (j, e) in entries.iter().enumerate() {
        if let Some(&i) = first.get(&e.label) {
            let oriented = [(2 * i, 2 * j + 1), (2 * j, 2 * i + 1)];
            let unoriented = [(2 * i, 2 * j), (2 * i + 1, 2 * j + 1)];
            out.push(match e.sign {
                Sign::Pos => Smoothing { a: oriented, b: unoriented },
                Sign::Neg => Smoothing { a: unoriented, b: oriented },
            });
        } else {
            first.insert(e.label, j);
        }
    }
    out
}

fn count_loops(len: usize, crossings: &[Smoothing], state: u64, smooth: &mut [usize], seen: &mut [bool]) -> usize {
    for (c, s) in crossings.iter().enumerate() {
        let pairs = if state >> c & 1 == 0 { &s.a } else { &s.b };
        for &(x, y) in pairs {
            smooth[x] = y;
            smooth[y] = x;
        }
    }
    // Cycles of smooth∘arc; every loop contributes two.
    seen.iter_mut().for_each(|s| *s = false);
    let arc = |x: usize| if x % 2 == 1 { (x + 1) % (2 * len) } else { (x + 2 * len - 1) % (2 * len) };
    let mut cycles = 0;
    for start in 0..2 * len {
        if seen[start] {
            continue;
        }
        cycles += 1;
        let mut x = start;
        while !seen[x] {
            seen[x] = true;
            x = smooth[arc(x)];
        }
    }
    cycles / 2
}

/// Kauffman bracket of a cyclic code, refusing codes above `cap` crossings.
pub fn bracket_capped(code: &CyclicGaussCode, cap: usize) -> Result<LaurentPolynomial, InvariantError> {
    let n = code.crossing_count();
    if n > cap || n >= 63 {
        return Err(InvariantError::CapExceeded { crossings: n, cap });
    }
    if n == 0 {
        return Ok(LaurentPolynomial::one());
    }
    let len = code.len();
    let crossings = smoothings(code.entries());
    let total: u64 = 1 << n;
    let chunks: Vec<u64> = (0..total.div_ceil(STATE_CHUNK)).collect();
    let histogram = chunks
        .par_iter()
        .map(|&chunk| {
            let mut local: HashMap<(i32, usize), i64> = HashMap::new();
            let mut smooth = vec![0; 2 * len];
            let mut seen = vec![false; 2 * len];
            let lo = chunk * STATE_CHUNK;
            for state in lo..(lo + STATE_CHUNK).min(total) {
                let b = state.count_ones() as i32;
                let loops = count_loops(len, &crossings, state, &mut smooth, &mut seen);
                *local.entry((n as i32 - 2 * b, loops)).or_insert(0) += 1;
            }
            local
        })
        .reduce(HashMap::new, |mut acc, part| {
            for (k, v) in part {
                *acc.entry(k).or_insert(0) += v;
            }
            acc
        });

    let max_loops = histogram.keys().map(|&(_, l)| l).max().unwrap_or(1);
    let delta = LaurentPolynomial::delta();
    let delta_pows: Vec<LaurentPolynomial> =
        std::iter::successors(Some(LaurentPolynomial::one()), |p| Some(p * &delta)).take(max_loops).collect();
    let mut keys: Vec<_> = histogram.into_iter().collect();
    keys.sort_unstable();
    Ok(keys
        .into_iter()
        .fold(LaurentPolynomial::zero(), |acc, ((exp, loops), count)| acc + delta_pows[loops - 1].scale(count, exp)))
}

pub fn bracket(code: &CyclicGaussCode) -> Result<LaurentPolynomial, InvariantError> {
    bracket_capped(code, DEFAULT_MAX_BRACKET_CROSSINGS)
}

/// Normalises a bracket value by `(-A^3)^(-writhe)`.
pub fn normalize(bracket: &LaurentPolynomial, writhe: i32) -> LaurentPolynomial {
    let coef = if writhe % 2 == 0 { 1 } else { -1 };
    bracket.scale(coef, -3 * writhe)
}

/// Writhe-normalised bracket, invariant under all three Reidemeister moves.
pub fn f_polynomial(code: &CyclicGaussCode) -> Result<LaurentPolynomial, InvariantError> {
    Ok(normalize(&bracket(code)?, writhe(code.entries())))
}

pub fn f_polynomial_capped(code: &CyclicGaussCode, cap: usize) -> Result<LaurentPolynomial, InvariantError> {
    Ok(normalize(&bracket_capped(code, cap)?, writhe(code.entries())))
}

/// Invariant of the virtual knotoid: `f` of its virtual closure.
pub fn knotoid_f(code: &OpenGaussCode) -> Result<LaurentPolynomial, InvariantError> {
    f_polynomial(&code.virtual_closure())
}
