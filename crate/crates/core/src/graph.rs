//! Finite directed multigraphs and the combinatorics of their cycles.
//!
//! Vertices and edges are stored in document order; that order is used for
//! every tie-break downstream (special edges, cycle base points, canonical
//! orderings of paths and monomials).

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeId(pub usize);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("malformed graph document: {0}")]
    Json(String),
    #[error("duplicate identifier `{0}`")]
    DuplicateId(String),
    #[error("edge `{edge}` refers to undeclared vertex `{vertex}`")]
    DanglingEndpoint { edge: String, vertex: String },
    #[error("graph has no vertices")]
    EmptyVertexSet,
    #[error("graph has sinks: {0:?}")]
    HasSinks(Vec<String>),
    #[error("cycles ({first}) and ({second}) intersect; growth is not polynomial")]
    NotPolynomialGrowth { first: String, second: String },
    #[error("vertex set is not hereditary: edge `{0}` leaves it")]
    NotHereditary(String),
    #[error("cycle ({0}) is not a cycle without exits")]
    NotNECycle(String),
    #[error("vertex `{0}` is not a sink")]
    NotASink(String),
    #[error("unknown identifier `{0}`")]
    UnknownId(String),
    #[error("edges do not compose into a path: {0}")]
    BrokenPath(String),
    #[error("enumeration exceeded the cap of {0} items")]
    CapExceeded(usize),
}

/// On-disk graph description.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphDoc {
    pub vertices: Vec<String>,
    pub edges: Vec<EdgeDoc>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeDoc {
    pub id: String,
    pub source: String,
    pub range: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub id: String,
    pub source: VertexId,
    pub range: VertexId,
}

#[derive(Debug, Clone)]
pub struct Graph {
    vertices: Vec<String>,
    edges: Vec<Edge>,
    vertex_index: HashMap<String, VertexId>,
    edge_index: HashMap<String, EdgeId>,
    out: Vec<Vec<EdgeId>>,
    into: Vec<Vec<EdgeId>>,
}

impl PartialEq for Graph {
    fn eq(&self, other: &Self) -> bool {
        self.vertices == other.vertices && self.edges == other.edges
    }
}

impl Eq for Graph {}

/// A path `e_1 ... e_n`; the trivial path at `base` when `edges` is empty.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Path {
    pub base: VertexId,
    pub edges: Vec<EdgeId>,
}

impl Path {
    pub fn trivial(v: VertexId) -> Self {
        Path {
            base: v,
            edges: Vec::new(),
        }
    }

    /// Builds a path from composable edges; `base` is its source.
    pub fn new(g: &Graph, edges: Vec<EdgeId>) -> Result<Self, GraphError> {
        let Some(first) = edges.first() else {
            return Err(GraphError::BrokenPath("empty edge list".into()));
        };
        for w in edges.windows(2) {
            if g.edge(w[0]).range != g.edge(w[1]).source {
                return Err(GraphError::BrokenPath(format!(
                    "{} then {}",
                    g.edge(w[0]).id,
                    g.edge(w[1]).id
                )));
            }
        }
        Ok(Path {
            base: g.edge(*first).source,
            edges,
        })
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn source(&self) -> VertexId {
        self.base
    }

    pub fn range(&self, g: &Graph) -> VertexId {
        self.edges.last().map_or(self.base, |e| g.edge(*e).range)
    }

    /// Vertices visited, `s(e_1), r(e_1), ..., r(e_n)`.
    pub fn vertices(&self, g: &Graph) -> Vec<VertexId> {
        let mut vs = vec![self.base];
        vs.extend(self.edges.iter().map(|e| g.edge(*e).range));
        vs
    }

    pub fn display(&self, g: &Graph) -> String {
        if self.edges.is_empty() {
            g.vertex_name(self.base).to_string()
        } else {
            self.edges
                .iter()
                .map(|e| g.edge(*e).id.as_str())
                .collect::<Vec<_>>()
                .join(" ")
        }
    }
}

/// A cycle, rotated so that its first edge leaves the least vertex.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Cycle {
    edges: Vec<EdgeId>,
}

impl Cycle {
    /// Validates closure and distinctness of sources, then rotates to the
    /// canonical base point.
    pub fn new(g: &Graph, edges: Vec<EdgeId>) -> Result<Self, GraphError> {
        let p = Path::new(g, edges.clone())?;
        if p.range(g) != p.source() {
            return Err(GraphError::BrokenPath("path is not closed".into()));
        }
        let sources: BTreeSet<_> = edges.iter().map(|e| g.edge(*e).source).collect();
        if sources.len() != edges.len() {
            return Err(GraphError::BrokenPath("repeated vertex on cycle".into()));
        }
        let (start, _) = edges
            .iter()
            .enumerate()
            .min_by_key(|(_, e)| g.edge(**e).source)
            .expect("nonempty");
        let mut rotated = edges[start..].to_vec();
        rotated.extend_from_slice(&edges[..start]);
        Ok(Cycle { edges: rotated })
    }

    pub fn edges(&self) -> &[EdgeId] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Vertices in cycle order starting from the base (least) vertex.
    pub fn vertices(&self, g: &Graph) -> Vec<VertexId> {
        self.edges.iter().map(|e| g.edge(*e).source).collect()
    }

    pub fn base(&self, g: &Graph) -> VertexId {
        g.edge(self.edges[0]).source
    }

    pub fn contains_vertex(&self, g: &Graph, v: VertexId) -> bool {
        self.edges.iter().any(|e| g.edge(*e).source == v)
    }

    /// Identifier used in reports: the id of the edge leaving the base.
    pub fn anchor(&self, g: &Graph) -> String {
        g.edge(self.edges[0]).id.clone()
    }

    pub fn display(&self, g: &Graph) -> String {
        self.edges
            .iter()
            .map(|e| g.edge(*e).id.as_str())
            .collect::<Vec<_>>()
            .join(" ")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphAnalysis {
    pub sinks: Vec<VertexId>,
    pub cycles: Vec<Cycle>,
    pub polynomial_growth: bool,
    /// Exits of each cycle, parallel to `cycles`.
    pub exits: Vec<Vec<EdgeId>>,
    /// Indices into `cycles` of the cycles without exits.
    pub ne_cycles: Vec<usize>,
    /// `cycle_reachability[i][j]`: some vertex of cycle j is reachable from
    /// cycle i (reflexive).
    pub cycle_reachability: Vec<Vec<bool>>,
    /// Two distinct cycles sharing a vertex, when growth is not polynomial.
    pub intersecting: Option<(usize, usize)>,
    /// Cycle enumeration stopped at [`CYCLE_CAP`].
    pub truncated: bool,
}

/// Upper bound on enumerated cycles for graphs that are not of polynomial
/// growth (their cycle count can be exponential).
pub const CYCLE_CAP: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PathCount {
    Finite(u64),
    Infinite,
}

/// A cycle together with a path from it into a target.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InfiniteWitness {
    pub cycle: Cycle,
    pub path: Path,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EntryPaths {
    Finite(Vec<Path>),
    Infinite(InfiniteWitness),
}

impl Graph {
    pub fn from_doc(doc: &GraphDoc) -> Result<Self, GraphError> {
        if doc.vertices.is_empty() {
            return Err(GraphError::EmptyVertexSet);
        }
        let mut vertex_index = HashMap::new();
        for (i, v) in doc.vertices.iter().enumerate() {
            if vertex_index.insert(v.clone(), VertexId(i)).is_some() {
                return Err(GraphError::DuplicateId(v.clone()));
            }
        }
        let mut edge_index = HashMap::new();
        let mut edges = Vec::with_capacity(doc.edges.len());
        for (i, e) in doc.edges.iter().enumerate() {
            if vertex_index.contains_key(&e.id) || edge_index.insert(e.id.clone(), EdgeId(i)).is_some()
            {
                return Err(GraphError::DuplicateId(e.id.clone()));
            }
            let lookup = |name: &String| {
                vertex_index
                    .get(name)
                    .copied()
                    .ok_or_else(|| GraphError::DanglingEndpoint {
                        edge: e.id.clone(),
                        vertex: name.clone(),
                    })
            };
            edges.push(Edge {
                id: e.id.clone(),
                source: lookup(&e.source)?,
                range: lookup(&e.range)?,
            });
        }
        let n = doc.vertices.len();
        let mut out = vec![Vec::new(); n];
        let mut into = vec![Vec::new(); n];
        for (i, e) in edges.iter().enumerate() {
            out[e.source.0].push(EdgeId(i));
            into[e.range.0].push(EdgeId(i));
        }
        Ok(Graph {
            vertices: doc.vertices.clone(),
            edges,
            vertex_index,
            edge_index,
            out,
            into,
        })
    }

    pub fn from_json(text: &str) -> Result<Self, GraphError> {
        let doc: GraphDoc = serde_json::from_str(text).map_err(|e| GraphError::Json(e.to_string()))?;
        Graph::from_doc(&doc)
    }

    /// Convenience constructor: `edges` are `(id, source, range)`.
    pub fn build(vertices: &[&str], edges: &[(&str, &str, &str)]) -> Result<Self, GraphError> {
        Graph::from_doc(&GraphDoc {
            vertices: vertices.iter().map(|s| s.to_string()).collect(),
            edges: edges
                .iter()
                .map(|(id, s, r)| EdgeDoc {
                    id: id.to_string(),
                    source: s.to_string(),
                    range: r.to_string(),
                })
                .collect(),
        })
    }

    pub fn to_doc(&self) -> GraphDoc {
        GraphDoc {
            vertices: self.vertices.clone(),
            edges: self
                .edges
                .iter()
                .map(|e| EdgeDoc {
                    id: e.id.clone(),
                    source: self.vertices[e.source.0].clone(),
                    range: self.vertices[e.range.0].clone(),
                })
                .collect(),
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertex_ids(&self) -> impl Iterator<Item = VertexId> {
        (0..self.vertices.len()).map(VertexId)
    }

    pub fn edge_ids(&self) -> impl Iterator<Item = EdgeId> {
        (0..self.edges.len()).map(EdgeId)
    }

    pub fn vertex_name(&self, v: VertexId) -> &str {
        &self.vertices[v.0]
    }

    pub fn edge(&self, e: EdgeId) -> &Edge {
        &self.edges[e.0]
    }

    pub fn find_vertex(&self, name: &str) -> Option<VertexId> {
        self.vertex_index.get(name).copied()
    }

    pub fn find_edge(&self, name: &str) -> Option<EdgeId> {
        self.edge_index.get(name).copied()
    }

    pub fn vertex(&self, name: &str) -> Result<VertexId, GraphError> {
        self.find_vertex(name)
            .ok_or_else(|| GraphError::UnknownId(name.to_string()))
    }

    pub fn edge_named(&self, name: &str) -> Result<EdgeId, GraphError> {
        self.find_edge(name)
            .ok_or_else(|| GraphError::UnknownId(name.to_string()))
    }

    /// Path from space-separated edge ids, or a vertex id for a trivial path.
    pub fn path(&self, text: &str) -> Result<Path, GraphError> {
        let words: Vec<&str> = text.split_whitespace().collect();
        if let [single] = words.as_slice() {
            if let Some(v) = self.find_vertex(single) {
                return Ok(Path::trivial(v));
            }
        }
        let edges = words
            .iter()
            .map(|w| self.edge_named(w))
            .collect::<Result<Vec<_>, _>>()?;
        Path::new(self, edges)
    }

    pub fn out_edges(&self, v: VertexId) -> &[EdgeId] {
        &self.out[v.0]
    }

    pub fn in_edges(&self, v: VertexId) -> &[EdgeId] {
        &self.into[v.0]
    }

    pub fn is_sink(&self, v: VertexId) -> bool {
        self.out[v.0].is_empty()
    }

    pub fn sinks(&self) -> Vec<VertexId> {
        self.vertex_ids().filter(|v| self.is_sink(*v)).collect()
    }

    /// The out-edge of `v` that comes first in document order.
    pub fn special_edge(&self, v: VertexId) -> Option<EdgeId> {
        self.out[v.0].first().copied()
    }

    pub fn is_special(&self, e: EdgeId) -> bool {
        self.special_edge(self.edge(e).source) == Some(e)
    }

    /// `reach[v][w]`: a path (possibly trivial) runs from v to w.
    pub fn reachability(&self) -> Vec<Vec<bool>> {
        let n = self.vertex_count();
        (0..n)
            .map(|s| {
                let mut seen = vec![false; n];
                let mut stack = vec![s];
                seen[s] = true;
                while let Some(v) = stack.pop() {
                    for e in &self.out[v] {
                        let r = self.edges[e.0].range.0;
                        if !seen[r] {
                            seen[r] = true;
                            stack.push(r);
                        }
                    }
                }
                seen
            })
            .collect()
    }

    /// Longest finite shortest-path distance between two vertices.
    pub fn diameter(&self) -> usize {
        let n = self.vertex_count();
        let mut best = 0;
        for s in 0..n {
            let mut dist = vec![usize::MAX; n];
            dist[s] = 0;
            let mut queue = VecDeque::from([s]);
            while let Some(v) = queue.pop_front() {
                for e in &self.out[v] {
                    let r = self.edges[e.0].range.0;
                    if dist[r] == usize::MAX {
                        dist[r] = dist[v] + 1;
                        best = best.max(dist[r]);
                        queue.push_back(r);
                    }
                }
            }
        }
        best
    }

    /// Strongly connected components (Tarjan), each sorted, listed in
    /// order of their least vertex.
    pub fn strongly_connected_components(&self) -> Vec<Vec<VertexId>> {
        struct State<'a> {
            g: &'a Graph,
            index: Vec<Option<usize>>,
            low: Vec<usize>,
            on_stack: Vec<bool>,
            stack: Vec<usize>,
            next: usize,
            out: Vec<Vec<VertexId>>,
        }
        fn visit(st: &mut State, v: usize) {
            st.index[v] = Some(st.next);
            st.low[v] = st.next;
            st.next += 1;
            st.stack.push(v);
            st.on_stack[v] = true;
            for i in 0..st.g.out[v].len() {
                let w = st.g.edges[st.g.out[v][i].0].range.0;
                match st.index[w] {
                    None => {
                        visit(st, w);
                        st.low[v] = st.low[v].min(st.low[w]);
                    }
                    Some(iw) if st.on_stack[w] => st.low[v] = st.low[v].min(iw),
                    _ => {}
                }
            }
            if Some(st.low[v]) == st.index[v] {
                let mut comp = Vec::new();
                loop {
                    let w = st.stack.pop().expect("stack holds v");
                    st.on_stack[w] = false;
                    comp.push(VertexId(w));
                    if w == v {
                        break;
                    }
                }
                comp.sort();
                st.out.push(comp);
            }
        }
        let n = self.vertex_count();
        let mut st = State {
            g: self,
            index: vec![None; n],
            low: vec![0; n],
            on_stack: vec![false; n],
            stack: Vec::new(),
            next: 0,
            out: Vec::new(),
        };
        for v in 0..n {
            if st.index[v].is_none() {
                visit(&mut st, v);
            }
        }
        st.out.sort();
        st.out
    }

    /// Simple cycles of one strongly connected component, each found once
    /// from its least vertex.
    fn component_cycles(&self, comp: &[VertexId], cap: usize, out: &mut Vec<Cycle>) -> bool {
        let member: BTreeSet<VertexId> = comp.iter().copied().collect();
        for &start in comp {
            let mut on_path = BTreeSet::from([start]);
            let mut path: Vec<EdgeId> = Vec::new();
            // DFS over (vertex, next out-edge position).
            let mut frames: Vec<(VertexId, usize)> = vec![(start, 0)];
            while let Some(frame) = frames.last_mut() {
                let (v, pos) = *frame;
                if pos >= self.out[v.0].len() {
                    frames.pop();
                    if let Some(e) = path.pop() {
                        on_path.remove(&self.edge(e).range);
                    }
                    continue;
                }
                frame.1 += 1;
                let e = self.out[v.0][pos];
                let r = self.edge(e).range;
                if !member.contains(&r) || r < start {
                    continue;
                }
                if r == start {
                    let mut edges = path.clone();
                    edges.push(e);
                    out.push(Cycle { edges });
                    if out.len() >= cap {
                        return false;
                    }
                } else if !on_path.contains(&r) {
                    on_path.insert(r);
                    path.push(e);
                    frames.push((r, 0));
                }
            }
        }
        true
    }

    pub fn analyze(&self) -> GraphAnalysis {
        let mut cycles = Vec::new();
        let mut truncated = false;
        let mut single_cycle_sccs = true;
        for comp in self.strongly_connected_components() {
            let internal = comp
                .iter()
                .flat_map(|v| self.out[v.0].iter())
                .filter(|e| comp.contains(&self.edge(**e).range))
                .count();
            if internal == 0 {
                continue;
            }
            // A strongly connected component is a single cycle iff it has
            // as many internal edges as vertices.
            if internal != comp.len() {
                single_cycle_sccs = false;
            }
            if !self.component_cycles(&comp, CYCLE_CAP.saturating_sub(cycles.len()), &mut cycles) {
                truncated = true;
                break;
            }
        }
        cycles.sort_by_key(|c: &Cycle| (c.base(self), c.edges.clone()));

        let vertex_sets: Vec<BTreeSet<VertexId>> =
            cycles.iter().map(|c| c.vertices(self).into_iter().collect()).collect();
        let mut intersecting = None;
        'outer: for i in 0..cycles.len() {
            for j in i + 1..cycles.len() {
                if !vertex_sets[i].is_disjoint(&vertex_sets[j]) {
                    intersecting = Some((i, j));
                    break 'outer;
                }
            }
        }
        let polynomial_growth = intersecting.is_none() && single_cycle_sccs;
        debug_assert!(
            polynomial_growth || truncated || intersecting.is_some(),
            "a non-cycle strongly connected component contains intersecting cycles"
        );
        let exits: Vec<Vec<EdgeId>> = cycles
            .iter()
            .zip(&vertex_sets)
            .map(|(c, vs)| {
                self.edge_ids()
                    .filter(|e| vs.contains(&self.edge(*e).source) && !c.edges.contains(e))
                    .collect()
            })
            .collect();
        let ne_cycles = exits
            .iter()
            .enumerate()
            .filter(|(_, x)| x.is_empty())
            .map(|(i, _)| i)
            .collect();
        let reach = self.reachability();
        let cycle_reachability = vertex_sets
            .iter()
            .map(|from| {
                vertex_sets
                    .iter()
                    .map(|to| from.iter().any(|a| to.iter().any(|b| reach[a.0][b.0])))
                    .collect()
            })
            .collect();
        GraphAnalysis {
            sinks: self.sinks(),
            cycles,
            polynomial_growth,
            exits,
            ne_cycles,
            cycle_reachability,
            intersecting,
            truncated,
        }
    }

    fn require_polynomial_growth(&self, a: &GraphAnalysis) -> Result<(), GraphError> {
        if a.polynomial_growth {
            return Ok(());
        }
        let (i, j) = a.intersecting.unwrap_or((0, 0));
        Err(GraphError::NotPolynomialGrowth {
            first: a.cycles.get(i).map(|c| c.display(self)).unwrap_or_default(),
            second: a.cycles.get(j).map(|c| c.display(self)).unwrap_or_default(),
        })
    }

    /// Vertices from which no cycle vertex is reachable.
    pub fn compute_v0(&self) -> BTreeSet<VertexId> {
        let a = self.analyze();
        let on_cycle: BTreeSet<VertexId> = a.cycles.iter().flat_map(|c| c.vertices(self)).collect();
        let reach = self.reachability();
        self.vertex_ids()
            .filter(|v| !on_cycle.iter().any(|c| reach[v.0][c.0]))
            .collect()
    }

    /// Vertices all of whose reachable cycles have no exits. Requires a
    /// sink-free graph of polynomial growth.
    pub fn compute_v1(&self) -> Result<BTreeSet<VertexId>, GraphError> {
        let sinks = self.sinks();
        if !sinks.is_empty() {
            return Err(GraphError::HasSinks(
                sinks.iter().map(|v| self.vertex_name(*v).to_string()).collect(),
            ));
        }
        let a = self.analyze();
        self.require_polynomial_growth(&a)?;
        let reach = self.reachability();
        Ok(self
            .vertex_ids()
            .filter(|v| {
                a.cycles.iter().enumerate().all(|(i, c)| {
                    a.exits[i].is_empty() || !c.vertices(self).iter().any(|w| reach[v.0][w.0])
                })
            })
            .collect())
    }

    pub fn is_hereditary(&self, h: &BTreeSet<VertexId>) -> bool {
        self.edges
            .iter()
            .all(|e| !h.contains(&e.source) || h.contains(&e.range))
    }

    pub fn is_saturated(&self, h: &BTreeSet<VertexId>) -> bool {
        self.vertex_ids().all(|v| {
            h.contains(&v)
                || self.is_sink(v)
                || !self.out[v.0].iter().all(|e| h.contains(&self.edge(*e).range))
        })
    }

    /// The graph on `V \ h` without the edges ranging in `h`.
    pub fn quotient_graph(&self, h: &BTreeSet<VertexId>) -> Result<Graph, GraphError> {
        if let Some(e) = self
            .edges
            .iter()
            .find(|e| h.contains(&e.source) && !h.contains(&e.range))
        {
            return Err(GraphError::NotHereditary(e.id.clone()));
        }
        let vertices: Vec<String> = self
            .vertex_ids()
            .filter(|v| !h.contains(v))
            .map(|v| self.vertex_name(v).to_string())
            .collect();
        let edges = self
            .edges
            .iter()
            .filter(|e| !h.contains(&e.range))
            .map(|e| EdgeDoc {
                id: e.id.clone(),
                source: self.vertex_name(e.source).to_string(),
                range: self.vertex_name(e.range).to_string(),
            })
            .collect();
        if vertices.is_empty() {
            return Ok(Graph::empty());
        }
        Graph::from_doc(&GraphDoc { vertices, edges })
    }

    /// The graph with no vertices (end of a quotient chain).
    pub fn empty() -> Graph {
        Graph {
            vertices: Vec::new(),
            edges: Vec::new(),
            vertex_index: HashMap::new(),
            edge_index: HashMap::new(),
            out: Vec::new(),
            into: Vec::new(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Shortest path from some vertex of `from` into `targets`.
    fn connecting_path(&self, from: &Cycle, targets: &BTreeSet<VertexId>) -> Option<Path> {
        let n = self.vertex_count();
        let mut pred: Vec<Option<Option<EdgeId>>> = vec![None; n];
        let mut queue = VecDeque::new();
        for v in from.vertices(self) {
            pred[v.0] = Some(None);
            queue.push_back(v);
        }
        while let Some(v) = queue.pop_front() {
            if targets.contains(&v) {
                let mut edges = Vec::new();
                let mut cur = v;
                while let Some(Some(e)) = pred[cur.0] {
                    edges.push(e);
                    cur = self.edge(e).source;
                }
                edges.reverse();
                return Some(if edges.is_empty() {
                    Path::trivial(v)
                } else {
                    Path { base: cur, edges }
                });
            }
            for e in &self.out[v.0] {
                let r = self.edge(*e).range;
                if pred[r.0].is_none() {
                    pred[r.0] = Some(Some(*e));
                    queue.push_back(r);
                }
            }
        }
        None
    }

    /// Paths ending on `cycle` and meeting it only at their range, or a
    /// witness that another cycle reaches it.
    pub fn entry_paths(&self, cycle: &Cycle, cap: usize) -> Result<EntryPaths, GraphError> {
        let a = self.analyze();
        self.require_polynomial_growth(&a)?;
        let idx = a
            .cycles
            .iter()
            .position(|c| c == cycle)
            .filter(|i| a.exits[*i].is_empty())
            .ok_or_else(|| GraphError::NotNECycle(cycle.display(self)))?;
        let on_cycle: BTreeSet<VertexId> = cycle.vertices(self).into_iter().collect();
        if let Some(other) = (0..a.cycles.len()).find(|j| *j != idx && a.cycle_reachability[*j][idx]) {
            let path = self
                .connecting_path(&a.cycles[other], &on_cycle)
                .expect("reachability implies a path");
            return Ok(EntryPaths::Infinite(InfiniteWitness {
                cycle: a.cycles[other].clone(),
                path,
            }));
        }
        let mut found: Vec<Path> = cycle.vertices(self).into_iter().map(Path::trivial).collect();
        let mut frontier = found.clone();
        while !frontier.is_empty() {
            let mut next = Vec::new();
            for p in &frontier {
                for e in &self.into[p.source().0] {
                    let s = self.edge(*e).source;
                    if on_cycle.contains(&s) {
                        continue;
                    }
                    let mut edges = vec![*e];
                    edges.extend_from_slice(&p.edges);
                    next.push(Path { base: s, edges });
                }
            }
            if found.len() + next.len() > cap {
                return Err(GraphError::CapExceeded(cap));
            }
            found.extend(next.iter().cloned());
            frontier = next;
        }
        found.sort_by(|x, y| (x.len(), &x.edges, x.base).cmp(&(y.len(), &y.edges, y.base)));
        Ok(EntryPaths::Finite(found))
    }

    /// Number of paths (the trivial one included) ending at the sink `v`.
    pub fn count_paths_to_sink(&self, v: VertexId) -> Result<PathCount, GraphError> {
        if !self.is_sink(v) {
            return Err(GraphError::NotASink(self.vertex_name(v).to_string()));
        }
        if self.cycle_reaching(v).is_some() {
            return Ok(PathCount::Infinite);
        }
        // ending[w] = number of paths from w to v; the ancestors of v form
        // a DAG, so memoised recursion terminates.
        let n = self.vertex_count();
        let mut memo: Vec<Option<u64>> = vec![None; n];
        fn count(g: &Graph, w: usize, v: usize, memo: &mut Vec<Option<u64>>) -> u64 {
            if let Some(c) = memo[w] {
                return c;
            }
            let c = if w == v {
                1
            } else {
                g.out[w]
                    .iter()
                    .map(|e| count(g, g.edges[e.0].range.0, v, memo))
                    .fold(0u64, |a, b| a.saturating_add(b))
            };
            memo[w] = Some(c);
            c
        }
        let total = (0..n)
            .map(|w| count(self, w, v.0, &mut memo))
            .fold(0u64, |a, b| a.saturating_add(b));
        Ok(PathCount::Finite(total))
    }

    /// First cycle (in analysis order) from which `v` is reachable.
    pub fn cycle_reaching(&self, v: VertexId) -> Option<InfiniteWitness> {
        let a = self.analyze();
        let target = BTreeSet::from([v]);
        a.cycles.iter().find_map(|c| {
            self.connecting_path(c, &target).map(|path| InfiniteWitness {
                cycle: c.clone(),
                path,
            })
        })
    }

    /// All paths ending at `v`, shortest first. Errors past `cap` paths.
    pub fn paths_ending_at(&self, v: VertexId, max_len: usize, cap: usize) -> Result<Vec<Path>, GraphError> {
        let mut found = vec![Path::trivial(v)];
        let mut frontier = found.clone();
        for _ in 0..max_len {
            let mut next = Vec::new();
            for p in &frontier {
                for e in &self.into[p.source().0] {
                    let mut edges = vec![*e];
                    edges.extend_from_slice(&p.edges);
                    next.push(Path {
                        base: self.edge(*e).source,
                        edges,
                    });
                }
            }
            if found.len() + next.len() > cap {
                return Err(GraphError::CapExceeded(cap));
            }
            if next.is_empty() {
                break;
            }
            found.extend(next.iter().cloned());
            frontier = next;
        }
        Ok(found)
    }

    /// Every path of length at most `max_len`, grouped by nothing in
    /// particular: trivial paths first, then by increasing length.
    pub fn all_paths(&self, max_len: usize) -> Vec<Path> {
        let mut found: Vec<Path> = self.vertex_ids().map(Path::trivial).collect();
        let mut frontier: Vec<Path> = found.clone();
        for _ in 0..max_len {
            let mut next = Vec::new();
            for p in &frontier {
                for e in &self.out[p.range(self).0] {
                    let mut q = p.clone();
                    q.edges.push(*e);
                    next.push(q);
                }
            }
            found.extend(next.iter().cloned());
            frontier = next;
        }
        found
    }
}

impl fmt::Display for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "vertices [{}]", self.vertices.join(", "))?;
        let edges: Vec<String> = self
            .edges
            .iter()
            .map(|e| format!("{}: {} -> {}", e.id, self.vertex_name(e.source), self.vertex_name(e.range)))
            .collect();
        write!(f, "; edges [{}]", edges.join(", "))
    }
}

/// Small named graphs used in tests, examples and documentation.
pub mod corpus {
    use super::Graph;

    /// Loop `c` at `v1` plus `f: v1 -> v2`; its algebra is the algebraic
    /// Toeplitz algebra.
    pub fn toeplitz() -> Graph {
        Graph::build(&["v1", "v2"], &[("c", "v1", "v1"), ("f", "v1", "v2")]).unwrap()
    }

    /// Line `u -> v -> w`.
    pub fn a3() -> Graph {
        Graph::build(&["u", "v", "w"], &[("e1", "u", "v"), ("e2", "v", "w")]).unwrap()
    }

    /// A single loop.
    pub fn r1() -> Graph {
        Graph::build(&["v"], &[("c", "v", "v")]).unwrap()
    }

    /// Loop `b` at `u`, `g: u -> v`, loop `c` at `v`.
    pub fn tt() -> Graph {
        Graph::build(
            &["u", "v"],
            &[("b", "u", "u"), ("g", "u", "v"), ("c", "v", "v")],
        )
        .unwrap()
    }

    /// Isolated cycle on `d` vertices `w1 -> w2 -> ... -> w1`, edges `a1..ad`.
    pub fn cycle(d: usize) -> Graph {
        let names: Vec<String> = (1..=d).map(|i| format!("w{i}")).collect();
        let edges: Vec<(String, String, String)> = (1..=d)
            .map(|i| (format!("a{i}"), format!("w{i}"), format!("w{}", i % d + 1)))
            .collect();
        let vs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
        let es: Vec<(&str, &str, &str)> = edges
            .iter()
            .map(|(a, b, c)| (a.as_str(), b.as_str(), c.as_str()))
            .collect();
        Graph::build(&vs, &es).unwrap()
    }

    /// Three-cycle `a -> b -> c -> a` with a tail `t: a -> z` to a sink.
    pub fn cycle3_with_tail() -> Graph {
        Graph::build(
            &["a", "b", "c", "z"],
            &[("x1", "a", "b"), ("x2", "b", "c"), ("x3", "c", "a"), ("t", "a", "z")],
        )
        .unwrap()
    }

    /// Root `r` with two children, each with one leaf: two sinks.
    pub fn two_sink_tree() -> Graph {
        Graph::build(
            &["r", "p", "q", "s1", "s2"],
            &[("l", "r", "p"), ("m", "r", "q"), ("n1", "p", "s1"), ("n2", "q", "s2")],
        )
        .unwrap()
    }

    /// Source `u` feeding the 2-cycle `w1 <-> w2` through a single edge.
    pub fn two_cycle_with_entry() -> Graph {
        Graph::build(
            &["u", "w1", "w2"],
            &[("h", "u", "w1"), ("a1", "w1", "w2"), ("a2", "w2", "w1")],
        )
        .unwrap()
    }

    /// Two loops at one vertex: exponential growth.
    pub fn rose2() -> Graph {
        Graph::build(&["v"], &[("c1", "v", "v"), ("c2", "v", "v")]).unwrap()
    }

    /// A single vertex and no edges.
    pub fn point() -> Graph {
        Graph::build(&["v"], &[]).unwrap()
    }

    /// Two disjoint components, each a single edge into a sink.
    pub fn two_arrows() -> Graph {
        Graph::build(&["a", "x", "b", "y"], &[("e", "a", "x"), ("f", "b", "y")]).unwrap()
    }

    /// Named graphs of polynomial growth.
    pub fn all() -> Vec<(&'static str, Graph)> {
        vec![
            ("A3", a3()),
            ("R1", r1()),
            ("T", toeplitz()),
            ("TT", tt()),
            ("C2", cycle(2)),
            ("C3-tail", cycle3_with_tail()),
            ("two-sink-tree", two_sink_tree()),
            ("C2-entry", two_cycle_with_entry()),
            ("point", point()),
            ("two-arrows", two_arrows()),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::corpus::*;
    use super::*;

    fn names(g: &Graph, vs: &BTreeSet<VertexId>) -> Vec<String> {
        vs.iter().map(|v| g.vertex_name(*v).to_string()).collect()
    }

    #[test]
    fn load_errors() {
        let g = Graph::from_json(r#"{"vertices":["v"],"edges":[]}"#).unwrap();
        assert_eq!(g.sinks(), vec![VertexId(0)]);
        let dangling = Graph::from_json(
            r#"{"vertices":["v"],"edges":[{"id":"e","source":"v","range":"w"}]}"#,
        );
        assert!(matches!(dangling, Err(GraphError::DanglingEndpoint { .. })));
        let dup = Graph::build(&["v", "v"], &[]);
        assert_eq!(dup, Err(GraphError::DuplicateId("v".into())));
        let clash = Graph::build(&["v"], &[("v", "v", "v")]);
        assert_eq!(clash, Err(GraphError::DuplicateId("v".into())));
        assert_eq!(Graph::build(&[], &[]), Err(GraphError::EmptyVertexSet));
        assert!(matches!(Graph::from_json("{"), Err(GraphError::Json(_))));
        let t = toeplitz();
        assert_eq!((t.vertex_count(), t.edge_count()), (2, 2));
        assert_eq!(Graph::from_doc(&t.to_doc()).unwrap(), t);
    }

    #[test]
    fn analyze_toeplitz() {
        let g = toeplitz();
        let a = g.analyze();
        assert_eq!(a.cycles.len(), 1);
        assert_eq!(a.cycles[0].display(&g), "c");
        assert_eq!(a.exits[0], vec![g.find_edge("f").unwrap()]);
        assert!(a.ne_cycles.is_empty());
        assert_eq!(a.sinks, vec![g.find_vertex("v2").unwrap()]);
        assert!(a.polynomial_growth);
    }

    #[test]
    fn analyze_rose_and_line() {
        let g = rose2();
        let a = g.analyze();
        assert_eq!(a.cycles.len(), 2);
        assert!(!a.polynomial_growth);
        assert_eq!(a.intersecting, Some((0, 1)));
        let g = a3();
        let a = g.analyze();
        assert!(a.cycles.is_empty());
        assert!(a.polynomial_growth);
        assert_eq!(a.sinks, vec![g.find_vertex("w").unwrap()]);
    }

    #[test]
    fn nontrivial_scc_cycles() {
        // Figure eight on two vertices: three simple cycles.
        let g = Graph::build(
            &["a", "b"],
            &[("p", "a", "b"), ("q", "b", "a"), ("r", "a", "a"), ("s", "b", "a")],
        )
        .unwrap();
        let a = g.analyze();
        assert_eq!(a.cycles.len(), 3);
        assert!(!a.polynomial_growth);
        let c = cycle(4);
        let a = c.analyze();
        assert_eq!(a.cycles.len(), 1);
        assert_eq!(a.cycles[0].display(&c), "a1 a2 a3 a4");
        assert_eq!(a.ne_cycles, vec![0]);
    }

    #[test]
    fn cycle_rotation_is_canonical() {
        let g = cycle(3);
        let e = |s: &str| g.find_edge(s).unwrap();
        let c = Cycle::new(&g, vec![e("a2"), e("a3"), e("a1")]).unwrap();
        assert_eq!(c.display(&g), "a1 a2 a3");
        assert!(Cycle::new(&g, vec![e("a1"), e("a2")]).is_err());
    }

    #[test]
    fn v0_examples() {
        let g = a3();
        assert_eq!(names(&g, &g.compute_v0()), ["u", "v", "w"]);
        let g = toeplitz();
        assert_eq!(names(&g, &g.compute_v0()), ["v2"]);
        let g = tt();
        assert!(g.compute_v0().is_empty());
    }

    #[test]
    fn v0_is_hereditary_and_saturated() {
        for (name, g) in all() {
            let v0 = g.compute_v0();
            assert!(g.is_hereditary(&v0), "{name}");
            assert!(g.is_saturated(&v0), "{name}");
            let q = g.quotient_graph(&v0).unwrap();
            assert!(q.sinks().is_empty(), "{name}: quotient has sinks");
        }
    }

    #[test]
    fn v1_examples() {
        let g = tt();
        assert_eq!(names(&g, &g.compute_v1().unwrap()), ["v"]);
        let g = r1();
        assert_eq!(names(&g, &g.compute_v1().unwrap()), ["v"]);
        assert!(matches!(toeplitz().compute_v1(), Err(GraphError::HasSinks(_))));
        assert!(matches!(
            rose2().compute_v1(),
            Err(GraphError::NotPolynomialGrowth { .. })
        ));
    }

    #[test]
    fn quotient_examples() {
        let g = toeplitz();
        let q = g.quotient_graph(&BTreeSet::from([g.vertex("v2").unwrap()])).unwrap();
        assert_eq!(q, Graph::build(&["v1"], &[("c", "v1", "v1")]).unwrap());
        assert_eq!(g.quotient_graph(&BTreeSet::new()).unwrap(), g);
        let g = tt();
        let q = g.quotient_graph(&BTreeSet::from([g.vertex("v").unwrap()])).unwrap();
        assert_eq!(q, Graph::build(&["u"], &[("b", "u", "u")]).unwrap());
        let err = g.quotient_graph(&BTreeSet::from([g.vertex("u").unwrap()]));
        assert!(matches!(err, Err(GraphError::NotHereditary(_))));
    }

    #[test]
    fn entry_path_examples() {
        let g = r1();
        let c = g.analyze().cycles[0].clone();
        assert_eq!(
            g.entry_paths(&c, 100).unwrap(),
            EntryPaths::Finite(vec![Path::trivial(VertexId(0))])
        );
        for d in 1..=6 {
            let g = cycle(d);
            let c = g.analyze().cycles[0].clone();
            let EntryPaths::Finite(ps) = g.entry_paths(&c, 100).unwrap() else {
                panic!("finite");
            };
            assert_eq!(ps.len(), d);
        }
        let g = tt();
        let a = g.analyze();
        let c = a.cycles.iter().find(|c| c.display(&g) == "c").unwrap();
        let EntryPaths::Infinite(w) = g.entry_paths(c, 100).unwrap() else {
            panic!("infinite");
        };
        assert_eq!(w.cycle.display(&g), "b");
        assert_eq!(w.path.display(&g), "g");
        let b = a.cycles.iter().find(|c| c.display(&g) == "b").unwrap();
        assert!(matches!(g.entry_paths(b, 100), Err(GraphError::NotNECycle(_))));
        let g = two_cycle_with_entry();
        let c = g.analyze().cycles[0].clone();
        let EntryPaths::Finite(ps) = g.entry_paths(&c, 100).unwrap() else {
            panic!("finite");
        };
        let shown: Vec<String> = ps.iter().map(|p| p.display(&g)).collect();
        assert_eq!(shown, ["w1", "w2", "h"]);
        assert_eq!(g.entry_paths(&c, 2), Err(GraphError::CapExceeded(2)));
    }

    #[test]
    fn path_counts() {
        let g = a3();
        assert_eq!(
            g.count_paths_to_sink(g.vertex("w").unwrap()).unwrap(),
            PathCount::Finite(3)
        );
        assert!(matches!(
            g.count_paths_to_sink(g.vertex("u").unwrap()),
            Err(GraphError::NotASink(_))
        ));
        let g = toeplitz();
        assert_eq!(
            g.count_paths_to_sink(g.vertex("v2").unwrap()).unwrap(),
            PathCount::Infinite
        );
        let g = point();
        assert_eq!(g.count_paths_to_sink(VertexId(0)).unwrap(), PathCount::Finite(1));
        // Brute-force enumeration agrees.
        let g = two_sink_tree();
        for s in g.sinks() {
            let PathCount::Finite(k) = g.count_paths_to_sink(s).unwrap() else {
                panic!()
            };
            assert_eq!(g.paths_ending_at(s, 10, 1000).unwrap().len() as u64, k);
        }
    }

    #[test]
    fn distinct_cycles_are_disjoint_under_polynomial_growth() {
        for (name, g) in all() {
            let a = g.analyze();
            assert!(a.polynomial_growth, "{name}");
            for i in 0..a.cycles.len() {
                for j in i + 1..a.cycles.len() {
                    let vi: BTreeSet<_> = a.cycles[i].vertices(&g).into_iter().collect();
                    let vj: BTreeSet<_> = a.cycles[j].vertices(&g).into_iter().collect();
                    assert!(vi.is_disjoint(&vj));
                }
            }
        }
    }

    #[test]
    fn path_parsing() {
        let g = a3();
        assert_eq!(g.path("e1 e2").unwrap().range(&g), g.vertex("w").unwrap());
        assert!(g.path("e2 e1").is_err());
        assert_eq!(g.path("v").unwrap(), Path::trivial(g.vertex("v").unwrap()));
        assert_eq!(g.diameter(), 2);
    }
}
