//! The ideal chain `(0) ≤ I_0 < I_1 < ... < I_s = L(G)` of a graph of
//! polynomial growth, computed on graphs.
//!
//! Layer 0 is the socle: one matrix factor over F per sink, indexed by the
//! paths ending there. The remaining layers come from repeatedly deleting
//! the hereditary set `V_0` (once) and then `V_1` (vertices that only reach
//! cycles without exits), recording one Laurent matrix factor per cycle
//! without exits at each stage, indexed by its entry paths.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{EntryPaths, Graph, GraphDoc, GraphError, InfiniteWitness, PathCount, VertexId};
use crate::linalg::EchelonBasis;
use crate::rewrite::{AlgebraElement, LeavittAlgebra, Monomial, RewriteError};

/// Largest index set materialized in a finite factor descriptor.
pub const INDEX_SET_CAP: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StructureError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Rewrite(#[from] RewriteError),
    #[error("element is not an idempotent")]
    NotIdempotent,
    #[error("graph without sinks has no cycle without exits")]
    NoNECycle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FactorKind {
    MatOverF,
    MatInfOverF,
    MatOverLaurent,
    MatInfOverLaurent,
}

impl FactorKind {
    pub fn is_laurent(self) -> bool {
        matches!(self, FactorKind::MatOverLaurent | FactorKind::MatInfOverLaurent)
    }

    pub fn is_finite(self) -> bool {
        matches!(self, FactorKind::MatOverF | FactorKind::MatOverLaurent)
    }
}

/// A cycle and a path from it, both as space-separated edge ids.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessDoc {
    pub cycle: String,
    pub path: String,
}

impl WitnessDoc {
    fn new(g: &Graph, w: &InfiniteWitness) -> Self {
        WitnessDoc {
            cycle: w.cycle.display(g),
            path: w.path.display(g),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactorDescriptor {
    pub kind: FactorKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub size: Option<usize>,
    /// Sink id or the anchor edge id of a cycle.
    pub anchor: String,
    #[serde(rename = "indexSet", default, skip_serializing_if = "Option::is_none")]
    pub index_set: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<WitnessDoc>,
}

impl FactorDescriptor {
    fn finite(kind: FactorKind, anchor: String, index_set: Vec<String>) -> Self {
        FactorDescriptor {
            kind,
            size: Some(index_set.len()),
            anchor,
            index_set: Some(index_set),
            witness: None,
        }
    }

    fn infinite(kind: FactorKind, anchor: String, witness: WitnessDoc) -> Self {
        FactorDescriptor {
            kind,
            size: None,
            anchor,
            index_set: None,
            witness: Some(witness),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructureReport {
    pub layers: Vec<Vec<FactorDescriptor>>,
    pub s: usize,
    /// `stages[i]` is the graph layer `i` was read from; the last entry is
    /// the empty graph.
    pub stages: Vec<GraphDoc>,
}

fn require_growth(g: &Graph) -> Result<(), StructureError> {
    let a = g.analyze();
    if a.polynomial_growth {
        return Ok(());
    }
    let (i, j) = a.intersecting.unwrap_or((0, 0));
    let show = |k: usize| a.cycles.get(k).map(|c| c.display(g)).unwrap_or_default();
    Err(GraphError::NotPolynomialGrowth {
        first: show(i),
        second: show(j),
    }
    .into())
}

/// One factor per sink, in document order.
pub fn socle_layer(g: &Graph) -> Result<Vec<FactorDescriptor>, StructureError> {
    require_growth(g)?;
    let mut out = Vec::new();
    for v in g.sinks() {
        let anchor = g.vertex_name(v).to_string();
        match g.count_paths_to_sink(v)? {
            PathCount::Finite(k) => {
                if k as usize > INDEX_SET_CAP {
                    return Err(GraphError::CapExceeded(INDEX_SET_CAP).into());
                }
                let paths = g.paths_ending_at(v, g.vertex_count(), INDEX_SET_CAP)?;
                debug_assert_eq!(paths.len() as u64, k);
                out.push(FactorDescriptor::finite(
                    FactorKind::MatOverF,
                    anchor,
                    paths.iter().map(|p| p.display(g)).collect(),
                ));
            }
            PathCount::Infinite => {
                let w = g.cycle_reaching(v).expect("infinite count has a witness");
                out.push(FactorDescriptor::infinite(
                    FactorKind::MatInfOverF,
                    anchor,
                    WitnessDoc::new(g, &w),
                ));
            }
        }
    }
    Ok(out)
}

/// One factor per cycle without exits of a sink-free graph.
pub fn ne_layer(g: &Graph) -> Result<Vec<FactorDescriptor>, StructureError> {
    let sinks = g.sinks();
    if !sinks.is_empty() {
        return Err(GraphError::HasSinks(
            sinks.iter().map(|v| g.vertex_name(*v).to_string()).collect(),
        )
        .into());
    }
    require_growth(g)?;
    let a = g.analyze();
    if a.ne_cycles.is_empty() {
        return Err(StructureError::NoNECycle);
    }
    let mut out = Vec::new();
    for &i in &a.ne_cycles {
        let c = &a.cycles[i];
        let anchor = c.anchor(g);
        out.push(match g.entry_paths(c, INDEX_SET_CAP)? {
            EntryPaths::Finite(paths) => FactorDescriptor::finite(
                FactorKind::MatOverLaurent,
                anchor,
                paths.iter().map(|p| p.display(g)).collect(),
            ),
            EntryPaths::Infinite(w) => FactorDescriptor::infinite(
                FactorKind::MatInfOverLaurent,
                anchor,
                WitnessDoc::new(g, &w),
            ),
        });
    }
    Ok(out)
}

pub fn ideal_chain(g: &Graph) -> Result<StructureReport, StructureError> {
    require_growth(g)?;
    let mut layers = vec![socle_layer(g)?];
    let mut stages = vec![g.to_doc()];
    let mut cur = g.quotient_graph(&g.compute_v0())?;
    while !cur.is_empty() {
        layers.push(ne_layer(&cur)?);
        stages.push(cur.to_doc());
        let v1 = cur.compute_v1()?;
        debug_assert!(!v1.is_empty());
        cur = cur.quotient_graph(&v1)?;
    }
    stages.push(cur.to_doc());
    Ok(StructureReport {
        s: layers.len() - 1,
        layers,
        stages,
    })
}

/// A basis of `e L(G) f` truncated at a degree.
#[derive(Debug, Clone)]
pub struct CornerBasis {
    pub basis: Vec<AlgebraElement>,
    /// `dims[d]`: dimension of the span of `e m f` over normal monomials of
    /// degree at most `d`.
    pub dims: Vec<usize>,
    /// The dimension did not change over the last two degrees.
    pub stabilized: bool,
}

impl CornerBasis {
    pub fn dimension(&self) -> usize {
        self.basis.len()
    }
}

pub fn corner_basis(
    alg: &LeavittAlgebra,
    e: &AlgebraElement,
    f: &AlgebraElement,
    maxdeg: usize,
) -> Result<CornerBasis, StructureError> {
    if e.algebra() != alg || f.algebra() != alg {
        return Err(RewriteError::Mismatch.into());
    }
    if !e.is_idempotent() || !f.is_idempotent() {
        return Err(StructureError::NotIdempotent);
    }
    let mut echelon: EchelonBasis<Monomial> = EchelonBasis::new(alg.field());
    let mut basis = Vec::new();
    let mut dims = vec![0; maxdeg + 1];
    for m in alg.enumerate_basis(maxdeg) {
        let x = e.mul(&alg.monomial(m.clone())).mul(f);
        if !x.is_zero() && echelon.insert(x.coordinates()) {
            basis.push(x);
        }
        for d in dims.iter_mut().skip(m.degree()) {
            *d = basis.len();
        }
    }
    let stabilized = dims[maxdeg] == dims[maxdeg.saturating_sub(2)];
    Ok(CornerBasis {
        basis,
        dims,
        stabilized,
    })
}

/// The idempotents `p p*` for paths `p` of length at most `max_len` ending
/// at `v`, shortest first.
pub fn path_idempotents(
    alg: &LeavittAlgebra,
    v: VertexId,
    max_len: usize,
) -> Result<Vec<AlgebraElement>, StructureError> {
    let g = alg.graph();
    Ok(g.paths_ending_at(v, max_len, INDEX_SET_CAP)?
        .iter()
        .map(|p| alg.path_idempotent(p))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GrowthVerdict {
    Linear,
    SuperLinear,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GrowthProbe {
    /// `dims[n - 1] = dim a G^n a` for `n = 1..=n_max`.
    pub dims: Vec<usize>,
    /// `max(1, max_n ⌈d_n / n⌉)` over the whole range.
    pub k: usize,
    pub verdict: GrowthVerdict,
}

/// Measures `d_n = dim a G^n a` where `G` is the span of all generators.
/// The verdict is `Linear` when the ratio bound `⌈d_n / n⌉` reached over
/// the first half of the range is not exceeded in the second half.
pub fn lemma7_growth_probe(
    alg: &LeavittAlgebra,
    a: &AlgebraElement,
    n_max: usize,
) -> Result<GrowthProbe, StructureError> {
    if a.algebra() != alg {
        return Err(RewriteError::Mismatch.into());
    }
    let levels = alg.generator_filtration(n_max);
    let mut echelon: EchelonBasis<Monomial> = EchelonBasis::new(alg.field());
    let mut done = 0;
    let mut dims = Vec::with_capacity(n_max);
    for level in levels.iter().skip(1) {
        for b in &level[done..] {
            let x = a.mul(b).mul(a);
            if !x.is_zero() {
                echelon.insert(x.coordinates());
            }
        }
        done = level.len();
        dims.push(echelon.rank());
    }
    let ratio = |n: usize| dims[n - 1].div_ceil(n);
    let half = (n_max / 2).max(1);
    let k_first = (1..=half).map(ratio).max().unwrap_or(0).max(1);
    let k = (1..=n_max).map(ratio).max().unwrap_or(0).max(1);
    Ok(GrowthProbe {
        dims,
        k,
        verdict: if k <= k_first {
            GrowthVerdict::Linear
        } else {
            GrowthVerdict::SuperLinear
        },
    })
}
