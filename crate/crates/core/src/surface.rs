//! Abstract (ribbon surface) diagrams and carrier genus.
//!
//! Every crossing gets a disk with four band-ends, every endpoint a disk with
//! one band-end, and consecutive disks along the curve are joined by bands.
//! The surface is a ribbon graph: darts are band-ends, the edge involution
//! pairs the two ends of a band, and the rotation lists the band-ends of a
//! disk counter-clockwise. Boundary components are orbits of
//! `rotation ∘ edge`.
//!
//! Band-ends at a crossing disk, counter-clockwise from the incoming
//! understrand:
//!
//! ```text
//!   positive:  under-in, over-out, under-out, over-in
//!   negative:  under-in, over-in,  under-out, over-out
//! ```
//!
//! For an open code with passages `0..2n` the darts are numbered
//! `0` = tail, `1` = head, `2 + 2p` = incoming end at passage `p`,
//! `3 + 2p` = outgoing end at passage `p`.

use std::collections::HashMap;

use thiserror::Error;

use crate::code::{CyclicGaussCode, GaussEntry, OpenGaussCode, Pass, Sign};

pub const TAIL_DART: usize = 0;
pub const HEAD_DART: usize = 1;

pub fn in_dart(passage: usize) -> usize {
    2 + 2 * passage
}

pub fn out_dart(passage: usize) -> usize {
    3 + 2 * passage
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum SurfaceError {
    #[error("parity check failed: 1 + {crossings} - {boundaries} is odd or negative")]
    Parity { crossings: usize, boundaries: usize },
}

/// Counter-clockwise band-ends at a crossing from the darts of its over and
/// under passages.
pub fn crossing_rotation(sign: Sign, over: (usize, usize), under: (usize, usize)) -> [usize; 4] {
    let (oi, oo) = over;
    let (ui, uo) = under;
    match sign {
        Sign::Pos => [ui, oo, uo, oi],
        Sign::Neg => [ui, oi, uo, oo],
    }
}

/// The ribbon graph of an open code.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RibbonStructure {
    /// Crossing labels in order of first occurrence.
    pub labels: Vec<u32>,
    /// Counter-clockwise darts at each crossing disk, parallel to `labels`.
    pub rotations: Vec<[usize; 4]>,
    next_ccw: Vec<usize>,
    edge: Vec<usize>,
    /// Boundary cycles; each lists darts in `rotation ∘ edge` order.
    pub boundaries: Vec<Vec<usize>>,
}

impl RibbonStructure {
    pub fn of(code: &OpenGaussCode) -> RibbonStructure {
        let entries = code.entries();
        let m = entries.len();
        let darts = 2 + 2 * m;

        let mut edge = vec![0; darts];
        let mut pair = |a: usize, b: usize| {
            edge[a] = b;
            edge[b] = a;
        };
        if m == 0 {
            pair(TAIL_DART, HEAD_DART);
        } else {
            pair(TAIL_DART, in_dart(0));
            for p in 0..m - 1 {
                pair(out_dart(p), in_dart(p + 1));
            }
            pair(out_dart(m - 1), HEAD_DART);
        }

        let (labels, rotations) = crossing_rotations(entries, in_dart, out_dart);
        let mut next_ccw: Vec<usize> = (0..darts).collect();
        for rot in &rotations {
            for k in 0..4 {
                next_ccw[rot[k]] = rot[(k + 1) % 4];
            }
        }
        let boundaries = orbits(darts, |d| next_ccw[edge[d]]);
        RibbonStructure { labels, rotations, next_ccw, edge, boundaries }
    }

    pub fn crossing_count(&self) -> usize {
        self.labels.len()
    }

    pub fn disk_count(&self) -> usize {
        self.labels.len() + 2
    }

    pub fn band_count(&self) -> usize {
        2 * self.labels.len() + 1
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.disk_count() as i64 - self.band_count() as i64
    }

    pub fn boundary_components(&self) -> usize {
        self.boundaries.len()
    }

    pub fn genus(&self) -> Result<usize, SurfaceError> {
        genus_from(self.crossing_count(), self.boundary_components())
    }

    /// The dart paired with `d` by its band.
    pub fn edge_mate(&self, d: usize) -> usize {
        self.edge[d]
    }

    /// Next dart counter-clockwise around the disk holding `d`.
    pub fn next_ccw(&self, d: usize) -> usize {
        self.next_ccw[d]
    }

    /// Index into `boundaries` for every dart.
    pub fn boundary_of_dart(&self) -> Vec<usize> {
        let mut face = vec![0; self.edge.len()];
        for (i, cycle) in self.boundaries.iter().enumerate() {
            for &d in cycle {
                face[d] = i;
            }
        }
        face
    }
}

fn genus_from(crossings: usize, boundaries: usize) -> Result<usize, SurfaceError> {
    let twice = (1 + crossings) as i64 - boundaries as i64;
    if twice < 0 || twice % 2 != 0 {
        return Err(SurfaceError::Parity { crossings, boundaries });
    }
    Ok(twice as usize / 2)
}

fn crossing_rotations(
    entries: &[GaussEntry],
    in_d: impl Fn(usize) -> usize,
    out_d: impl Fn(usize) -> usize,
) -> (Vec<u32>, Vec<[usize; 4]>) {
    let mut first: HashMap<u32, usize> = HashMap::new();
    let mut labels = Vec::new();
    let mut slots = Vec::new();
    for (j, e) in entries.iter().enumerate() {
        match first.get(&e.label) {
            None => {
                first.insert(e.label, j);
                labels.push(e.label);
                slots.push((j, j));
            }
            Some(&i) => {
                let k = labels.iter().position(|&l| l == e.label).expect("label recorded");
                slots[k] = (i, j);
            }
        }
    }
    let rotations = slots
        .iter()
        .map(|&(i, j)| {
            let (o, u) = if entries[i].pass == Pass::Over { (i, j) } else { (j, i) };
            crossing_rotation(entries[i].sign, (in_d(o), out_d(o)), (in_d(u), out_d(u)))
        })
        .collect();
    (labels, rotations)
}

/// Orbits of a permutation on `0..n`, each starting at its least element.
pub(crate) fn orbits(n: usize, step: impl Fn(usize) -> usize) -> Vec<Vec<usize>> {
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        let mut cycle = Vec::new();
        let mut d = start;
        while !seen[d] {
            seen[d] = true;
            cycle.push(d);
            d = step(d);
        }
        out.push(cycle);
    }
    out
}

pub fn boundary_components(code: &OpenGaussCode) -> usize {
    RibbonStructure::of(code).boundary_components()
}

pub fn carrier_genus(code: &OpenGaussCode) -> Result<usize, SurfaceError> {
    RibbonStructure::of(code).genus()
}

pub fn is_classical(code: &OpenGaussCode) -> bool {
    carrier_genus(code) == Ok(0)
}

/// Boundary count of the ribbon surface of a closed curve (crossing disks
/// only). A circle without crossings counts as an annulus with two.
pub fn cyclic_boundary_components(code: &CyclicGaussCode) -> usize {
    let m = code.len();
    if m == 0 {
        return 2;
    }
    let in_d = |p: usize| 2 * p;
    let out_d = |p: usize| 2 * p + 1;
    let mut edge = vec![0; 2 * m];
    for p in 0..m {
        let q = (p + 1) % m;
        edge[out_d(p)] = in_d(q);
        edge[in_d(q)] = out_d(p);
    }
    let (_, rotations) = crossing_rotations(code.entries(), in_d, out_d);
    let mut next_ccw = vec![0; 2 * m];
    for rot in &rotations {
        for k in 0..4 {
            next_ccw[rot[k]] = rot[(k + 1) % 4];
        }
    }
    orbits(2 * m, |d| next_ccw[edge[d]]).len()
}

/// Genus of the closed carrier surface of a knot diagram given by a cyclic
/// code; 0 exactly when the diagram is drawn on the sphere.
pub fn cyclic_genus(code: &CyclicGaussCode) -> Result<usize, SurfaceError> {
    let n = code.crossing_count();
    let b = cyclic_boundary_components(code);
    // chi = n - 2n + b = 2 - 2g
    let twice = 2 + n as i64 - b as i64;
    if twice < 0 || twice % 2 != 0 {
        return Err(SurfaceError::Parity { crossings: n, boundaries: b });
    }
    Ok(twice as usize / 2)
}
