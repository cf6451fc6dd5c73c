//! Knotoid diagrams in the sphere as combinatorial maps.
//!
//! Edge `k` owns darts `2k` (its `a` end) and `2k + 1` (its `b` end); the
//! edge involution flips the low bit. Each vertex lists its darts
//! counter-clockwise, crossings starting from the incoming understrand.
//! Faces are orbits of `rotation ∘ edge`; the face holding dart `d` lies to
//! the right of a walker leaving the vertex of `d` along its edge.
//!
//! `.pkd` text, one vertex per line:
//!
//! ```text
//! C <id> <sign> <d1> <d2> <d3> <d4>   classical crossing, d1 = incoming understrand
//! V <id> <d1> <d2> <d3> <d4>          virtual crossing
//! T <d>                               tail
//! H <d>                               head
//! ```
//!
//! with darts written `e<k>a` / `e<k>b`.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::code::{CyclicGaussCode, GaussEntry, OpenGaussCode, Pass, Sign};
use crate::surface::{carrier_genus, crossing_rotation, orbits};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum PlanarError {
    #[error("line {0}: {1}")]
    Syntax(usize, String),
    #[error("dart {0} used more than once")]
    DuplicateDart(String),
    #[error("dart {0} is not attached to a vertex")]
    MissingDart(String),
    #[error("diagram needs exactly one tail and one head")]
    Endpoints,
    #[error("walking from the tail does not reach the head through every edge once")]
    NotAnArc,
    #[error("crossing {0} is not met once on each strand")]
    CrossingVisits(u32),
    #[error("crossing {0}: first dart is not the incoming understrand")]
    UnderStrand(u32),
    #[error("crossing {0}: declared sign disagrees with the rotation")]
    SignMismatch(u32),
    #[error("duplicate crossing id {0}")]
    DuplicateId(u32),
    #[error("V - E + F = {0}, not 2")]
    Euler(i64),
    #[error("code has positive carrier genus")]
    NotClassical,
    #[error("closure of a diagram with virtual crossings is not defined")]
    VirtualCrossings,
    #[error("invalid route: {0}")]
    RouteInvalid(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum VertexKind {
    Crossing { id: u32, sign: Sign },
    Virtual { id: u32 },
    Tail,
    Head,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vertex {
    pub kind: VertexKind,
    /// Counter-clockwise.
    pub darts: Vec<usize>,
}

/// Dual path for a closure arc, listed as the edges it crosses from the
/// head's face to the tail's face.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Route {
    Auto,
    Edges(Vec<u32>),
}

impl FromStr for Route {
    type Err = PlanarError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s == "auto" {
            return Ok(Route::Auto);
        }
        if s.is_empty() || s == "-" {
            return Ok(Route::Edges(Vec::new()));
        }
        s.split(',')
            .map(|t| {
                let t = t.trim();
                t.strip_prefix('e')
                    .unwrap_or(t)
                    .parse::<u32>()
                    .map_err(|_| PlanarError::RouteInvalid(format!("bad edge `{t}`")))
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Route::Edges)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClosureKind {
    Under,
    Over,
    Virtual,
}

/// One curve edge met by the walk from tail to head.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Step {
    /// Dart the walk leaves from.
    forward: usize,
    /// Passage recorded on arrival, if the edge ends at a crossing.
    arrival: Option<(usize, Pass)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlanarDiagram {
    vertices: Vec<Vertex>,
    /// External id of each internal edge.
    edge_ids: Vec<u32>,
    vertex_of: Vec<usize>,
    slot_of: Vec<usize>,
    face_of: Vec<usize>,
    faces: Vec<Vec<usize>>,
    tail_dart: usize,
    head_dart: usize,
    walk: Vec<Step>,
}

fn mate(d: usize) -> usize {
    d ^ 1
}

impl PlanarDiagram {
    /// Builds and validates a map. Dart `2k`/`2k + 1` belong to the edge
    /// whose external id is `edge_ids[k]`.
    pub fn new(vertices: Vec<Vertex>, edge_ids: Vec<u32>) -> Result<Self, PlanarError> {
        let darts = 2 * edge_ids.len();
        let name = |d: usize| format!("e{}{}", edge_ids[d / 2], if d.is_multiple_of(2) { 'a' } else { 'b' });
        let mut vertex_of = vec![usize::MAX; darts];
        let mut slot_of = vec![0; darts];
        let (mut tails, mut heads) = (Vec::new(), Vec::new());
        let mut ids = BTreeSet::new();
        for (v, vx) in vertices.iter().enumerate() {
            let degree = match vx.kind {
                VertexKind::Crossing { id, .. } | VertexKind::Virtual { id } => {
                    if !ids.insert(id) {
                        return Err(PlanarError::DuplicateId(id));
                    }
                    4
                }
                VertexKind::Tail => {
                    tails.push(v);
                    1
                }
                VertexKind::Head => {
                    heads.push(v);
                    1
                }
            };
            if vx.darts.len() != degree {
                return Err(PlanarError::Syntax(0, format!("vertex {v} has {} darts", vx.darts.len())));
            }
            for (s, &d) in vx.darts.iter().enumerate() {
                if d >= darts {
                    return Err(PlanarError::MissingDart(format!("#{d}")));
                }
                if vertex_of[d] != usize::MAX {
                    return Err(PlanarError::DuplicateDart(name(d)));
                }
                vertex_of[d] = v;
                slot_of[d] = s;
            }
        }
        if let Some(d) = vertex_of.iter().position(|&v| v == usize::MAX) {
            return Err(PlanarError::MissingDart(name(d)));
        }
        if tails.len() != 1 || heads.len() != 1 {
            return Err(PlanarError::Endpoints);
        }
        let tail_dart = vertices[tails[0]].darts[0];
        let head_dart = vertices[heads[0]].darts[0];

        // Walk the curve.
        let mut walk = Vec::with_capacity(edge_ids.len());
        let mut edge_seen = vec![false; edge_ids.len()];
        let mut visits: HashMap<usize, Vec<usize>> = HashMap::new();
        let mut d = tail_dart;
        loop {
            if std::mem::replace(&mut edge_seen[d / 2], true) {
                return Err(PlanarError::NotAnArc);
            }
            let arrive = mate(d);
            let v = vertex_of[arrive];
            match vertices[v].kind {
                VertexKind::Head => {
                    walk.push(Step { forward: d, arrival: None });
                    break;
                }
                VertexKind::Tail => return Err(PlanarError::NotAnArc),
                VertexKind::Crossing { .. } | VertexKind::Virtual { .. } => {
                    let s = slot_of[arrive];
                    visits.entry(v).or_default().push(s);
                    let pass = if s.is_multiple_of(2) { Pass::Under } else { Pass::Over };
                    walk.push(Step { forward: d, arrival: Some((v, pass)) });
                    d = vertices[v].darts[(s + 2) % 4];
                }
            }
        }
        if edge_seen.iter().any(|&s| !s) {
            return Err(PlanarError::NotAnArc);
        }
        for (v, vx) in vertices.iter().enumerate() {
            let (id, sign) = match vx.kind {
                VertexKind::Crossing { id, sign } => (id, Some(sign)),
                VertexKind::Virtual { id } => (id, None),
                _ => continue,
            };
            let slots = visits.get(&v).cloned().unwrap_or_default();
            let under: Vec<usize> = slots.iter().copied().filter(|s| s % 2 == 0).collect();
            let over: Vec<usize> = slots.iter().copied().filter(|s| s % 2 == 1).collect();
            if under.len() != 1 || over.len() != 1 {
                return Err(PlanarError::CrossingVisits(id));
            }
            if let Some(sign) = sign {
                if under[0] != 0 {
                    return Err(PlanarError::UnderStrand(id));
                }
                let actual = if over[0] == 3 { Sign::Pos } else { Sign::Neg };
                if actual != sign {
                    return Err(PlanarError::SignMismatch(id));
                }
            }
        }

        let next_ccw = |d: usize| {
            let v = &vertices[vertex_of[d]];
            v.darts[(slot_of[d] + 1) % v.darts.len()]
        };
        let faces = orbits(darts, |d| next_ccw(mate(d)));
        let mut face_of = vec![0; darts];
        for (f, cycle) in faces.iter().enumerate() {
            for &d in cycle {
                face_of[d] = f;
            }
        }
        let chi = vertices.len() as i64 - edge_ids.len() as i64 + faces.len() as i64;
        if chi != 2 {
            return Err(PlanarError::Euler(chi));
        }
        Ok(PlanarDiagram { vertices, edge_ids, vertex_of, slot_of, face_of, faces, tail_dart, head_dart, walk })
    }

    /// The spherical diagram of a code with carrier genus 0, its rotation
    /// taken from the ribbon surface. Edge `k` is the `k`-th curve segment.
    pub fn from_classical_code(code: &OpenGaussCode) -> Result<Self, PlanarError> {
        if carrier_genus(code) != Ok(0) {
            return Err(PlanarError::NotClassical);
        }
        let e = code.entries();
        let m = e.len();
        let in_d = |p: usize| 2 * p + 1;
        let out_d = |p: usize| 2 * (p + 1);
        let mut vertices = Vec::with_capacity(m / 2 + 2);
        let mut done = vec![false; m];
        for i in 0..m {
            if done[i] {
                continue;
            }
            let j = (i + 1..m).find(|&j| e[j].label == e[i].label).expect("paired label");
            done[j] = true;
            let (o, u) = if e[i].pass == Pass::Over { (i, j) } else { (j, i) };
            let darts = crossing_rotation(e[i].sign, (in_d(o), out_d(o)), (in_d(u), out_d(u)));
            vertices.push(Vertex { kind: VertexKind::Crossing { id: e[i].label, sign: e[i].sign }, darts: darts.to_vec() });
        }
        vertices.push(Vertex { kind: VertexKind::Tail, darts: vec![0] });
        vertices.push(Vertex { kind: VertexKind::Head, darts: vec![2 * m + 1] });
        PlanarDiagram::new(vertices, (0..=m as u32).collect())
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_ids.len()
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.vertex_count() as i64 - self.edge_count() as i64 + self.face_count() as i64
    }

    pub fn has_virtual_crossings(&self) -> bool {
        self.vertices.iter().any(|v| matches!(v.kind, VertexKind::Virtual { .. }))
    }

    pub fn tail_face(&self) -> usize {
        self.face_of[self.tail_dart]
    }

    pub fn head_face(&self) -> usize {
        self.face_of[self.head_dart]
    }

    /// Faces on the two sides of an edge, `(side of dart a, side of dart b)`.
    pub fn edge_faces(&self, edge_id: u32) -> Option<(usize, usize)> {
        let k = self.edge_ids.iter().position(|&e| e == edge_id)?;
        Some((self.face_of[2 * k], self.face_of[2 * k + 1]))
    }

    /// Classical passages along the curve; virtual crossings are skipped.
    pub fn to_open_code(&self) -> OpenGaussCode {
        let entries = self
            .walk
            .iter()
            .filter_map(|s| s.arrival)
            .filter_map(|(v, pass)| match self.vertices[v].kind {
                VertexKind::Crossing { id, sign } => Some(GaussEntry::new(id, pass, sign)),
                _ => None,
            })
            .collect();
        OpenGaussCode::from_valid(entries)
    }

    pub fn endpoints_same_face(&self) -> bool {
        self.tail_face() == self.head_face()
    }

    /// Dual-graph neighbours of each face as `(face, edge id)`, ascending;
    /// edges with one face on both sides are left out.
    fn dual_adjacency(&self) -> Vec<Vec<(usize, u32)>> {
        let mut adj = vec![Vec::new(); self.faces.len()];
        for (k, &id) in self.edge_ids.iter().enumerate() {
            let (f, g) = (self.face_of[2 * k], self.face_of[2 * k + 1]);
            if f != g {
                adj[f].push((g, id));
                adj[g].push((f, id));
            }
        }
        for a in &mut adj {
            a.sort_unstable();
        }
        adj
    }

    /// Shortest dual path from the head's face to the tail's face; BFS with
    /// neighbours taken in increasing face id (then edge id).
    pub fn auto_route(&self) -> Vec<u32> {
        let adj = self.dual_adjacency();
        let (start, goal) = (self.head_face(), self.tail_face());
        let mut prev: Vec<Option<(usize, u32)>> = vec![None; self.faces.len()];
        let mut seen = vec![false; self.faces.len()];
        seen[start] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(f) = queue.pop_front() {
            if f == goal {
                break;
            }
            for &(g, e) in &adj[f] {
                if !seen[g] {
                    seen[g] = true;
                    prev[g] = Some((f, e));
                    queue.push_back(g);
                }
            }
        }
        let mut path = Vec::new();
        let mut f = goal;
        while let Some((p, e)) = prev[f] {
            path.push(e);
            f = p;
        }
        path.reverse();
        path
    }

    /// Every simple dual path from the head's face to the tail's face, in
    /// depth-first order, stopping after `limit`.
    pub fn simple_routes(&self, limit: usize) -> Vec<Vec<u32>> {
        fn dfs(
            adj: &[Vec<(usize, u32)>],
            f: usize,
            goal: usize,
            on_path: &mut Vec<bool>,
            path: &mut Vec<u32>,
            out: &mut Vec<Vec<u32>>,
            limit: usize,
        ) {
            if out.len() >= limit {
                return;
            }
            if f == goal {
                out.push(path.clone());
                return;
            }
            for &(g, e) in &adj[f] {
                if !on_path[g] {
                    on_path[g] = true;
                    path.push(e);
                    dfs(adj, g, goal, on_path, path, out, limit);
                    path.pop();
                    on_path[g] = false;
                }
            }
        }
        let adj = self.dual_adjacency();
        let mut on_path = vec![false; self.faces.len()];
        on_path[self.head_face()] = true;
        let mut out = Vec::new();
        dfs(&adj, self.head_face(), self.tail_face(), &mut on_path, &mut Vec::new(), &mut out, limit);
        out
    }

    /// Checks a route and returns `(internal edge, face entered)` per step.
    fn resolve_route(&self, route: &Route) -> Result<Vec<(usize, usize)>, PlanarError> {
        let edges = match route {
            Route::Auto => self.auto_route(),
            Route::Edges(e) => e.clone(),
        };
        let invalid = |msg: String| PlanarError::RouteInvalid(msg);
        let mut face = self.head_face();
        let mut visited = BTreeSet::from([face]);
        let mut steps = Vec::with_capacity(edges.len());
        for id in edges {
            let k = self
                .edge_ids
                .iter()
                .position(|&e| e == id)
                .ok_or_else(|| invalid(format!("no edge e{id}")))?;
            let (f, g) = (self.face_of[2 * k], self.face_of[2 * k + 1]);
            let next = if f == face && g != face {
                g
            } else if g == face && f != face {
                f
            } else {
                return Err(invalid(format!("e{id} does not leave face {face}")));
            };
            if !visited.insert(next) {
                return Err(invalid(format!("face {next} entered twice")));
            }
            steps.push((k, next));
            face = next;
        }
        if face != self.tail_face() {
            return Err(invalid(format!("ends in face {face}, tail lies in face {}", self.tail_face())));
        }
        Ok(steps)
    }

    /// Joins head to tail along `route` with an arc passing under (or over)
    /// everything it meets, returning the knot diagram's cyclic code.
    pub fn closure(&self, kind: ClosureKind, route: &Route) -> Result<CyclicGaussCode, PlanarError> {
        let steps = self.resolve_route(route)?;
        if kind == ClosureKind::Virtual {
            return Ok(self.to_open_code().virtual_closure());
        }
        if self.has_virtual_crossings() {
            return Err(PlanarError::VirtualCrossings);
        }
        let (curve_pass, arc_pass) = match kind {
            ClosureKind::Under => (Pass::Over, Pass::Under),
            _ => (Pass::Under, Pass::Over),
        };
        let base = self
            .vertices
            .iter()
            .filter_map(|v| match v.kind {
                VertexKind::Crossing { id, .. } => Some(id),
                _ => None,
            })
            .max()
            .unwrap_or(0);
        // Closure crossing per crossed edge: (label, sign).
        let mut on_edge: BTreeMap<usize, (u32, Sign)> = BTreeMap::new();
        let mut arc = Vec::with_capacity(steps.len());
        for (s, &(k, entered)) in steps.iter().enumerate() {
            let label = base + 1 + s as u32;
            let step = self.walk.iter().find(|w| w.forward / 2 == k).expect("every edge is walked");
            // The face of the mate dart lies left of the curve.
            let entered_left = self.face_of[mate(step.forward)] == entered;
            // Under the arc, a curve crossing from the arc's left to its right is positive.
            let sign = match (kind, entered_left) {
                (ClosureKind::Under, true) | (ClosureKind::Over, false) => Sign::Pos,
                _ => Sign::Neg,
            };
            on_edge.insert(k, (label, sign));
            arc.push(GaussEntry::new(label, arc_pass, sign));
        }
        let mut entries = Vec::with_capacity(2 * (self.edge_count() + steps.len()));
        for step in &self.walk {
            if let Some(&(label, sign)) = on_edge.get(&(step.forward / 2)) {
                entries.push(GaussEntry::new(label, curve_pass, sign));
            }
            if let Some((v, pass)) = step.arrival {
                if let VertexKind::Crossing { id, sign } = self.vertices[v].kind {
                    entries.push(GaussEntry::new(id, pass, sign));
                }
            }
        }
        entries.extend(arc);
        Ok(CyclicGaussCode::from_valid(entries))
    }

    pub fn underpass_closure(&self, route: &Route) -> Result<CyclicGaussCode, PlanarError> {
        self.closure(ClosureKind::Under, route)
    }

    pub fn overpass_closure(&self, route: &Route) -> Result<CyclicGaussCode, PlanarError> {
        self.closure(ClosureKind::Over, route)
    }

    /// Always the virtual closure of the open code; the route is checked but
    /// the crossings it adds are virtual and go unrecorded.
    pub fn virtual_closure_routed(&self, route: &Route) -> Result<CyclicGaussCode, PlanarError> {
        self.closure(ClosureKind::Virtual, route)
    }

    fn dart_name(&self, d: usize) -> String {
        format!("e{}{}", self.edge_ids[d / 2], if d.is_multiple_of(2) { 'a' } else { 'b' })
    }
}

impl fmt::Display for PlanarDiagram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.vertices {
            let darts: Vec<String> = v.darts.iter().map(|&d| self.dart_name(d)).collect();
            match v.kind {
                VertexKind::Crossing { id, sign } => {
                    let s = if sign == Sign::Pos { '+' } else { '-' };
                    writeln!(f, "C {id} {s} {}", darts.join(" "))?
                }
                VertexKind::Virtual { id } => writeln!(f, "V {id} {}", darts.join(" "))?,
                VertexKind::Tail => writeln!(f, "T {}", darts[0])?,
                VertexKind::Head => writeln!(f, "H {}", darts[0])?,
            }
        }
        Ok(())
    }
}

/// Parses `.pkd` text; `#` starts a comment line.
pub fn parse_pkd(text: &str) -> Result<PlanarDiagram, PlanarError> {
    let mut raw: Vec<(VertexKind, Vec<(u32, bool)>)> = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |msg: &str| PlanarError::Syntax(no + 1, msg.to_string());
        let toks: Vec<&str> = line.split_whitespace().collect();
        let dart = |t: &str| -> Result<(u32, bool), PlanarError> {
            let body = t.strip_prefix('e').ok_or_else(|| err(&format!("bad dart `{t}`")))?;
            let (num, end) = body.split_at(body.len().saturating_sub(1));
            let b = match end {
                "a" => false,
                "b" => true,
                _ => return Err(err(&format!("bad dart `{t}`"))),
            };
            let k = num.parse::<u32>().map_err(|_| err(&format!("bad dart `{t}`")))?;
            Ok((k, b))
        };
        let darts = |ts: &[&str]| ts.iter().map(|t| dart(t)).collect::<Result<Vec<_>, _>>();
        let id = |t: &str| t.parse::<u32>().map_err(|_| err(&format!("bad id `{t}`")));
        let (kind, ds) = match toks.as_slice() {
            ["C", i, s, rest @ ..] if rest.len() == 4 => {
                let sign = match *s {
                    "+" | "+1" | "1" => Sign::Pos,
                    "-" | "-1" => Sign::Neg,
                    _ => return Err(err(&format!("bad sign `{s}`"))),
                };
                (VertexKind::Crossing { id: id(i)?, sign }, darts(rest)?)
            }
            ["V", i, rest @ ..] if rest.len() == 4 => (VertexKind::Virtual { id: id(i)? }, darts(rest)?),
            ["T", d] => (VertexKind::Tail, darts(&[d])?),
            ["H", d] => (VertexKind::Head, darts(&[d])?),
            _ => return Err(err("unrecognised line")),
        };
        raw.push((kind, ds));
    }
    let edge_ids: Vec<u32> = raw.iter().flat_map(|(_, ds)| ds.iter().map(|&(k, _)| k)).collect::<BTreeSet<_>>().into_iter().collect();
    let index: HashMap<u32, usize> = edge_ids.iter().enumerate().map(|(i, &k)| (k, i)).collect();
    let vertices = raw
        .into_iter()
        .map(|(kind, ds)| Vertex { kind, darts: ds.into_iter().map(|(k, b)| 2 * index[&k] + b as usize).collect() })
        .collect();
    PlanarDiagram::new(vertices, edge_ids)
}

impl FromStr for PlanarDiagram {
    type Err = PlanarError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_pkd(s)
    }
}
