//! Isomorphism of signed trees with real edge weights, up to a tolerance.

use std::collections::HashMap;

use petgraph::unionfind::UnionFind;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::surface_poisson::{write_dot, ClassifierReport, SignedWeightedGraph, SurfaceKind};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TreeError {
    #[error("a tree needs at least one vertex")]
    Empty,
    #[error("edge {0} references a missing vertex")]
    BadVertex(usize),
    #[error("edge weight {0} is not positive")]
    BadWeight(f64),
    #[error("graph with {vertices} vertices and {edges} edges is not a tree")]
    NotATree { vertices: usize, edges: usize },
    #[error("signs do not alternate along edge {0}")]
    SignsNotAlternating(usize),
    #[error("Morita decision needs sphere reports")]
    NotSphere,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedTree {
    signs: Vec<i8>,
    edges: Vec<(usize, usize, f64)>,
    adj: Vec<Vec<(usize, f64)>>,
}

#[derive(Serialize)]
struct VertexOut {
    id: usize,
    sign: i8,
}

#[derive(Serialize)]
struct EdgeOut {
    a: usize,
    b: usize,
    period: f64,
}

#[derive(Serialize)]
struct TreeOut {
    vertices: Vec<VertexOut>,
    edges: Vec<EdgeOut>,
}

impl Serialize for WeightedTree {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        TreeOut {
            vertices: self.signs.iter().enumerate().map(|(id, &sign)| VertexOut { id, sign }).collect(),
            edges: self.edges.iter().map(|&(a, b, period)| EdgeOut { a, b, period }).collect(),
        }
        .serialize(s)
    }
}

impl WeightedTree {
    pub fn new(signs: Vec<i8>, edges: Vec<(usize, usize, f64)>) -> Result<Self, TreeError> {
        let n = signs.len();
        if n == 0 {
            return Err(TreeError::Empty);
        }
        if edges.len() + 1 != n {
            return Err(TreeError::NotATree {
                vertices: n,
                edges: edges.len(),
            });
        }
        let mut uf = UnionFind::<usize>::new(n);
        let mut adj = vec![Vec::new(); n];
        for (i, &(a, b, w)) in edges.iter().enumerate() {
            if a >= n || b >= n {
                return Err(TreeError::BadVertex(i));
            }
            if !(w > 0.0 && w.is_finite()) {
                return Err(TreeError::BadWeight(w));
            }
            if !uf.union(a, b) {
                return Err(TreeError::NotATree {
                    vertices: n,
                    edges: edges.len(),
                });
            }
            if signs[a] == signs[b] {
                return Err(TreeError::SignsNotAlternating(i));
            }
            adj[a].push((b, w));
            adj[b].push((a, w));
        }
        Ok(WeightedTree { signs, edges, adj })
    }

    pub fn from_graph(g: &SignedWeightedGraph) -> Result<Self, TreeError> {
        WeightedTree::new(
            g.vertices.iter().map(|v| v.sign).collect(),
            g.edges.iter().map(|e| (e.a, e.b, e.period)).collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.signs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.signs.is_empty()
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    pub fn to_dot(&self) -> String {
        write_dot(self.signs.iter().copied().enumerate(), self.edges.iter().copied())
    }

    /// The same tree with every sign reversed.
    pub fn flip_signs(&self) -> WeightedTree {
        WeightedTree {
            signs: self.signs.iter().map(|s| -s).collect(),
            edges: self.edges.clone(),
            adj: self.adj.clone(),
        }
    }

    /// Relabels vertex `v` as `perm[v]`.
    pub fn permute(&self, perm: &[usize]) -> WeightedTree {
        let mut signs = vec![0; self.len()];
        for (v, &p) in perm.iter().enumerate() {
            signs[p] = self.signs[v];
        }
        let edges = self.edges.iter().map(|&(a, b, w)| (perm[a], perm[b], w)).collect();
        WeightedTree::new(signs, edges).expect("relabeling preserves tree structure")
    }

    /// Replaces the weights, keeping the order of `edges()`.
    pub fn with_weights(&self, weights: &[f64]) -> Result<WeightedTree, TreeError> {
        let edges = self.edges.iter().zip(weights).map(|(&(a, b, _), &w)| (a, b, w)).collect();
        WeightedTree::new(self.signs.clone(), edges)
    }

    /// One or two vertices minimizing the largest remaining component, in index order.
    pub fn centroids(&self) -> Vec<usize> {
        let n = self.len();
        let order = self.dfs_order(0);
        let mut size = vec![1usize; n];
        for &(v, parent) in order.iter().rev() {
            if let Some(p) = parent {
                size[p] += size[v];
            }
        }
        let mut parent_of = vec![None; n];
        for &(v, p) in &order {
            parent_of[v] = p;
        }
        let worst: Vec<usize> = (0..n)
            .map(|v| {
                let below = self.adj[v]
                    .iter()
                    .filter(|(u, _)| parent_of[*u] == Some(v))
                    .map(|(u, _)| size[*u])
                    .max()
                    .unwrap_or(0);
                below.max(n - size[v])
            })
            .collect();
        let best = *worst.iter().min().expect("nonempty");
        (0..n).filter(|&v| worst[v] == best).collect()
    }

    /// Preorder of `(vertex, parent)` from `root`.
    fn dfs_order(&self, root: usize) -> Vec<(usize, Option<usize>)> {
        let mut order = Vec::with_capacity(self.len());
        let mut stack = vec![(root, None)];
        while let Some((v, p)) = stack.pop() {
            order.push((v, p));
            for &(u, _) in self.adj[v].iter().rev() {
                if Some(u) != p {
                    stack.push((u, Some(v)));
                }
            }
        }
        order
    }

    fn rooted_code(&self, v: usize, parent: Option<usize>, tol: f64) -> String {
        let mut children: Vec<String> = self.adj[v]
            .iter()
            .filter(|(u, _)| Some(*u) != parent)
            .map(|&(u, w)| format!("{}:{}", (w / tol).round() as i64, self.rooted_code(u, Some(v), tol)))
            .collect();
        children.sort();
        format!("({})", children.join(","))
    }

    fn children(&self, v: usize, parent: Option<usize>) -> Vec<(usize, f64)> {
        self.adj[v].iter().copied().filter(|(u, _)| Some(*u) != parent).collect()
    }
}

/// Centroid-rooted AHU code with weights quantized to multiples of `tol`; signs are ignored.
pub fn canonical_code(t: &WeightedTree, tol: f64) -> String {
    t.centroids()
        .into_iter()
        .map(|c| t.rooted_code(c, None, tol))
        .min()
        .expect("a tree has a centroid")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SignRelation {
    Preserved,
    GloballyFlipped,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TreeIsomorphism {
    /// Vertex `v` of the first tree maps to `mapping[v]` of the second.
    pub mapping: Vec<usize>,
    pub signs: SignRelation,
}

struct Matcher<'a> {
    t1: &'a WeightedTree,
    t2: &'a WeightedTree,
    tol: f64,
    parent1: Vec<Option<usize>>,
    parent2: Vec<Option<usize>>,
    memo: HashMap<(usize, usize), Option<Vec<(usize, usize)>>>,
}

impl Matcher<'_> {
    /// Child pairing under which the subtrees at `u` and `v` match, if any.
    fn compat(&mut self, u: usize, v: usize) -> Option<Vec<(usize, usize)>> {
        if let Some(hit) = self.memo.get(&(u, v)) {
            return hit.clone();
        }
        let cu = self.t1.children(u, self.parent1[u]);
        let cv = self.t2.children(v, self.parent2[v]);
        let result = if cu.len() != cv.len() {
            None
        } else {
            let mut ok = vec![vec![false; cv.len()]; cu.len()];
            for (i, &(a, wa)) in cu.iter().enumerate() {
                for (j, &(b, wb)) in cv.iter().enumerate() {
                    ok[i][j] = (wa - wb).abs() <= self.tol && self.compat(a, b).is_some();
                }
            }
            perfect_matching(&ok).map(|m| m.into_iter().enumerate().map(|(i, j)| (cu[i].0, cv[j].0)).collect())
        };
        self.memo.insert((u, v), result.clone());
        result
    }

    fn collect(&mut self, u: usize, v: usize, mapping: &mut [usize]) {
        mapping[u] = v;
        let pairs = self.compat(u, v).expect("called on a compatible pair");
        for (a, b) in pairs {
            self.collect(a, b, mapping);
        }
    }
}

/// Kuhn's augmenting paths; `ok[i][j]` allows left `i` to take right `j`.
fn perfect_matching(ok: &[Vec<bool>]) -> Option<Vec<usize>> {
    let n = ok.len();
    let mut right_of = vec![usize::MAX; n];
    fn augment(i: usize, ok: &[Vec<bool>], seen: &mut [bool], right_of: &mut [usize]) -> bool {
        for j in 0..ok.len() {
            if ok[i][j] && !seen[j] {
                seen[j] = true;
                if right_of[j] == usize::MAX || augment(right_of[j], ok, seen, right_of) {
                    right_of[j] = i;
                    return true;
                }
            }
        }
        false
    }
    for i in 0..n {
        let mut seen = vec![false; n];
        if !augment(i, ok, &mut seen, &mut right_of) {
            return None;
        }
    }
    let mut left = vec![0; n];
    for (j, &i) in right_of.iter().enumerate() {
        left[i] = j;
    }
    Some(left)
}

fn parents(t: &WeightedTree, root: usize) -> Vec<Option<usize>> {
    let mut p = vec![None; t.len()];
    for (v, parent) in t.dfs_order(root) {
        p[v] = parent;
    }
    p
}

fn weights_close(t1: &WeightedTree, t2: &WeightedTree, slack: f64) -> bool {
    let sorted = |t: &WeightedTree| {
        let mut w: Vec<f64> = t.edges.iter().map(|e| e.2).collect();
        w.sort_by(f64::total_cmp);
        w
    };
    sorted(t1).iter().zip(sorted(t2)).all(|(a, b)| (a - b).abs() <= slack)
}

/// Exact tolerance-aware search, trying the second tree's centroids in index order.
fn search(t1: &WeightedTree, t2: &WeightedTree, tol: f64) -> Option<Vec<usize>> {
    let c1 = t1.centroids()[0];
    let parent1 = parents(t1, c1);
    for c2 in t2.centroids() {
        let mut m = Matcher {
            t1,
            t2,
            tol,
            parent1: parent1.clone(),
            parent2: parents(t2, c2),
            memo: HashMap::new(),
        };
        if m.compat(c1, c2).is_some() {
            let mut mapping = vec![0; t1.len()];
            m.collect(c1, c2, &mut mapping);
            return Some(mapping);
        }
    }
    None
}

/// Checks that `mapping` is a bijection carrying edges to edges with weights within `tol`.
pub fn verify_mapping(t1: &WeightedTree, t2: &WeightedTree, mapping: &[usize], tol: f64) -> bool {
    if t1.len() != t2.len() || mapping.len() != t1.len() {
        return false;
    }
    let mut hit = vec![false; t2.len()];
    for &v in mapping {
        if v >= t2.len() || std::mem::replace(&mut hit[v], true) {
            return false;
        }
    }
    let mut edges2: HashMap<(usize, usize), f64> = HashMap::new();
    for &(a, b, w) in &t2.edges {
        edges2.insert((a.min(b), a.max(b)), w);
    }
    t1.edges.iter().all(|&(a, b, w)| {
        let (x, y) = (mapping[a], mapping[b]);
        edges2.get(&(x.min(y), x.max(y))).is_some_and(|w2| (w - w2).abs() <= tol)
    })
}

/// An isomorphism with `|w1 - w2| <= tol` on every edge, ignoring signs.
pub fn isomorphic(t1: &WeightedTree, t2: &WeightedTree, tol: f64) -> Option<TreeIsomorphism> {
    if t1.len() != t2.len() {
        return None;
    }
    let same_code = canonical_code(t1, tol) == canonical_code(t2, tol);
    if !same_code && !weights_close(t1, t2, 2.0 * tol) {
        return None;
    }
    let mapping = search(t1, t2, tol)?;
    if !verify_mapping(t1, t2, &mapping, tol) {
        return None;
    }
    let preserved = (0..t1.len()).all(|v| t1.signs[v] == t2.signs[mapping[v]]);
    Some(TreeIsomorphism {
        mapping,
        signs: if preserved {
            SignRelation::Preserved
        } else {
            SignRelation::GloballyFlipped
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Discriminator {
    TreeShape,
    ModularPeriod,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum MoritaVerdict {
    MoritaEquivalent { isomorphism: TreeIsomorphism },
    NotEquivalent { discriminator: Discriminator },
}

/// Compares the period-weighted region trees of two sphere reports. The
/// tolerance is relative to the largest period in either report.
pub fn decide_morita_sphere(
    r1: &ClassifierReport,
    r2: &ClassifierReport,
    rel_tol: f64,
) -> Result<MoritaVerdict, TreeError> {
    if r1.surface.kind != SurfaceKind::Sphere || r2.surface.kind != SurfaceKind::Sphere {
        return Err(TreeError::NotSphere);
    }
    let t1 = WeightedTree::from_graph(&r1.graph)?;
    let t2 = WeightedTree::from_graph(&r2.graph)?;
    let scale = r1.periods.iter().chain(&r2.periods).fold(0.0f64, |m, p| m.max(p.abs()));
    let tol = rel_tol * scale.max(f64::MIN_POSITIVE);
    if let Some(isomorphism) = isomorphic(&t1, &t2, tol) {
        return Ok(MoritaVerdict::MoritaEquivalent { isomorphism });
    }
    // Same shape with unit weights means only the periods disagree.
    let unit = |t: &WeightedTree| t.with_weights(&vec![1.0; t.edges.len()]).expect("unit weights");
    let discriminator = if isomorphic(&unit(&t1), &unit(&t2), 0.5).is_some() {
        Discriminator::ModularPeriod
    } else {
        Discriminator::TreeShape
    };
    Ok(MoritaVerdict::NotEquivalent { discriminator })
}
