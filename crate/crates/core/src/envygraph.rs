//! Generalized envy graph over a partition and an association function:
//! construction, sources, cycle elimination, chains, and subchain shifting.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::model::{Bundle, Instance};

/// Ordered list of pairwise-disjoint bundles covering all goods. Empty
/// bundles are allowed.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Partition {
    bundles: Vec<Bundle>,
}

impl Partition {
    pub fn new(num_goods: usize, bundles: Vec<Bundle>) -> Result<Partition> {
        if bundles.is_empty() {
            return Err(Error::InvalidInput("partition needs at least one bundle".into()));
        }
        let mut seen = Bundle::EMPTY;
        for &b in &bundles {
            if !seen.is_disjoint(b) {
                return Err(Error::InvalidInput("partition bundles overlap".into()));
            }
            seen = seen.union(b);
        }
        if seen != Bundle::full(num_goods) {
            return Err(Error::InvalidInput(
                "partition bundles do not cover all goods".into(),
            ));
        }
        Ok(Partition { bundles })
    }

    /// The one-bundle partition holding all goods.
    pub fn grand(num_goods: usize) -> Partition {
        Partition {
            bundles: vec![Bundle::full(num_goods)],
        }
    }

    pub fn len(&self) -> usize {
        self.bundles.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn bundle(&self, idx: usize) -> Bundle {
        self.bundles[idx]
    }

    pub fn bundles(&self) -> &[Bundle] {
        &self.bundles
    }

    pub(crate) fn push_empty(&mut self) {
        self.bundles.push(Bundle::EMPTY);
    }

    /// Move one good between bundles; the good must be in `from`.
    pub(crate) fn move_good(&mut self, good: crate::model::GoodId, from: usize, to: usize) {
        debug_assert!(self.bundles[from].contains(good));
        self.bundles[from] = self.bundles[from].without(good);
        self.bundles[to] = self.bundles[to].with(good);
    }
}

/// Map from bundle indices to agents, injective on its support. `None`
/// marks a free bundle (the paper's `f(ℓ) = 0`).
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct AssociationFunction {
    assoc: Vec<Option<usize>>,
}

impl AssociationFunction {
    pub fn new(assoc: Vec<Option<usize>>) -> Result<AssociationFunction> {
        let mut seen = std::collections::BTreeSet::new();
        for a in assoc.iter().flatten() {
            if !seen.insert(*a) {
                return Err(Error::InvalidInput(format!(
                    "agent {a} is associated with two bundles"
                )));
            }
        }
        Ok(AssociationFunction { assoc })
    }

    pub fn all_free(k: usize) -> AssociationFunction {
        AssociationFunction {
            assoc: vec![None; k],
        }
    }

    pub fn len(&self) -> usize {
        self.assoc.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assoc.is_empty()
    }

    pub fn get(&self, bundle: usize) -> Option<usize> {
        self.assoc[bundle]
    }

    pub fn set(&mut self, bundle: usize, agent: Option<usize>) {
        self.assoc[bundle] = agent;
        debug_assert!(self.is_injective());
    }

    fn is_injective(&self) -> bool {
        let mut seen = std::collections::BTreeSet::new();
        self.assoc.iter().flatten().all(|a| seen.insert(*a))
    }

    /// Support `D(f)`: indices of associated bundles, ascending.
    pub fn support(&self) -> Vec<usize> {
        (0..self.assoc.len())
            .filter(|&l| self.assoc[l].is_some())
            .collect()
    }

    /// Image `I(f)`: associated agents, ascending.
    pub fn image(&self) -> Vec<usize> {
        let mut agents: Vec<usize> = self.assoc.iter().flatten().copied().collect();
        agents.sort_unstable();
        agents
    }

    pub fn is_full(&self) -> bool {
        self.assoc.iter().all(Option::is_some)
    }

    /// The bundle associated with `agent`, if any.
    pub fn bundle_of(&self, agent: usize) -> Option<usize> {
        self.assoc.iter().position(|&a| a == Some(agent))
    }

    pub fn as_slice(&self) -> &[Option<usize>] {
        &self.assoc
    }

    pub(crate) fn push_free(&mut self) {
        self.assoc.push(None);
    }
}

/// Directed graph on bundle indices: edge `(ℓ, z)` iff bundle `ℓ` is
/// associated with an agent who envies bundle `z`.
#[derive(Clone, Debug)]
pub struct EnvyGraph {
    out: Vec<Vec<usize>>,
    in_degree: Vec<usize>,
}

impl EnvyGraph {
    pub fn num_vertices(&self) -> usize {
        self.out.len()
    }

    /// Out-neighbors of `l`, ascending.
    pub fn neighbors(&self, l: usize) -> &[usize] {
        &self.out[l]
    }

    pub fn has_edge(&self, l: usize, z: usize) -> bool {
        self.out[l].binary_search(&z).is_ok()
    }

    pub fn in_degree(&self, l: usize) -> usize {
        self.in_degree[l]
    }

    pub fn is_acyclic(&self) -> bool {
        self.find_cycle().is_none()
    }

    /// First cycle found by DFS in increasing vertex order, as a vertex list
    /// `[c_0, ..., c_{t-1}]` with edges `c_a -> c_{a+1}` and `c_{t-1} -> c_0`.
    /// Deterministic.
    pub fn find_cycle(&self) -> Option<Vec<usize>> {
        let n = self.out.len();
        let mut state = vec![0u8; n]; // 0 unvisited, 1 on stack, 2 done
        let mut path: Vec<usize> = Vec::new();

        fn dfs(
            g: &EnvyGraph,
            v: usize,
            state: &mut [u8],
            path: &mut Vec<usize>,
        ) -> Option<Vec<usize>> {
            state[v] = 1;
            path.push(v);
            for &w in &g.out[v] {
                match state[w] {
                    0 => {
                        if let Some(c) = dfs(g, w, state, path) {
                            return Some(c);
                        }
                    }
                    1 => {
                        let start = path.iter().position(|&x| x == w).unwrap();
                        return Some(path[start..].to_vec());
                    }
                    _ => {}
                }
            }
            path.pop();
            state[v] = 2;
            None
        }

        for v in 0..n {
            if state[v] == 0 {
                if let Some(c) = dfs(self, v, &mut state, &mut path) {
                    return Some(c);
                }
            }
        }
        None
    }

    /// One edge per line, `ℓ -> z`, for inspection.
    pub fn dump_edges(&self) -> String {
        let mut s = String::new();
        for (l, outs) in self.out.iter().enumerate() {
            for &z in outs {
                let _ = writeln!(s, "{l} -> {z}");
            }
        }
        s
    }
}

/// Simple path `(q_s, ..., q_1, q_0)` in an envy graph; the list is stored
/// first-to-last, so `indices[0]` is the first bundle and the last entry is
/// the target. Length (number of edges) may be zero.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Subchain {
    indices: Vec<usize>,
}

impl Subchain {
    pub fn new(indices: Vec<usize>) -> Result<Subchain> {
        if indices.is_empty() {
            return Err(Error::EmptyCollection);
        }
        let mut sorted = indices.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != indices.len() {
            return Err(Error::InvalidInput("subchain repeats a vertex".into()));
        }
        Ok(Subchain { indices })
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    /// First bundle `q_s` (the source end for chains).
    pub fn first(&self) -> usize {
        self.indices[0]
    }

    /// Target bundle `q_0`.
    pub fn target(&self) -> usize {
        *self.indices.last().unwrap()
    }

    /// Number of edges.
    pub fn edge_len(&self) -> usize {
        self.indices.len() - 1
    }
}

/// Exact edge set per the definition; free bundles have out-degree 0.
pub fn build_envy_graph(
    inst: &Instance,
    x: &Partition,
    f: &AssociationFunction,
) -> Result<EnvyGraph> {
    let k = x.len();
    if f.len() != k {
        return Err(Error::DimensionMismatch(format!(
            "association function covers {} bundles, partition has {k}",
            f.len()
        )));
    }
    let mut out = vec![Vec::new(); k];
    let mut in_degree = vec![0usize; k];
    for l in 0..k {
        let Some(agent) = f.get(l) else { continue };
        let own = inst.value(agent, x.bundle(l));
        for z in 0..k {
            if z != l && own < inst.value(agent, x.bundle(z)) {
                out[l].push(z);
                in_degree[z] += 1;
            }
        }
    }
    Ok(EnvyGraph { out, in_degree })
}

/// True iff no associated agent envies bundle `l` (in-degree zero).
pub fn is_source(g: &EnvyGraph, l: usize) -> bool {
    g.in_degree(l) == 0
}

/// Repeatedly rotates associations along envy cycles until the graph is
/// acyclic. Support, image, and MXS+EFL-ness of `f` are preserved, and no
/// associated agent ends up with a less valuable bundle.
pub fn eliminate_cycles(
    inst: &Instance,
    x: &Partition,
    f: &AssociationFunction,
) -> Result<AssociationFunction> {
    eliminate_cycles_logged(inst, x, f).map(|(f, _)| f)
}

/// As [`eliminate_cycles`], also returning the rotated cycles in order.
pub fn eliminate_cycles_logged(
    inst: &Instance,
    x: &Partition,
    f: &AssociationFunction,
) -> Result<(AssociationFunction, Vec<Vec<usize>>)> {
    let mut f = f.clone();
    let mut rotations = Vec::new();
    // Each rotation strictly improves some agent and degrades none, so the
    // count is bounded by the number of distinct (agent, bundle) value pairs.
    let cap = inst.num_agents() * x.len() * x.len() + 1;
    loop {
        let g = build_envy_graph(inst, x, &f)?;
        let Some(cycle) = g.find_cycle() else {
            return Ok((f, rotations));
        };
        if rotations.len() >= cap {
            return Err(Error::InvariantViolation(
                "cycle elimination exceeded its rotation bound".into(),
            ));
        }
        // Edge c_a -> c_{a+1}: the agent at c_a envies c_{a+1} and moves there.
        let mut assoc = f.as_slice().to_vec();
        let t = cycle.len();
        for a in 0..t {
            assoc[cycle[(a + 1) % t]] = f.get(cycle[a]);
        }
        f = AssociationFunction::new(assoc)?;
        rotations.push(cycle);
    }
}

/// All chains (source-anchored simple paths) ending at `target`.
/// Intended for tests and debug checks; the solver uses [`any_chain_to`].
pub fn chains_to(
    inst: &Instance,
    x: &Partition,
    f: &AssociationFunction,
    target: usize,
) -> Result<Vec<Subchain>> {
    let g = build_envy_graph(inst, x, f)?;
    if !g.is_acyclic() {
        return Err(Error::CyclicGraph);
    }
    // Extend backwards from the target through incoming edges.
    let k = g.num_vertices();
    let mut incoming: Vec<Vec<usize>> = vec![Vec::new(); k];
    for l in 0..k {
        for &z in g.neighbors(l) {
            incoming[z].push(l);
        }
    }
    let mut chains = Vec::new();
    let mut path = vec![target];
    fn extend(
        g: &EnvyGraph,
        incoming: &[Vec<usize>],
        path: &mut Vec<usize>,
        chains: &mut Vec<Subchain>,
    ) {
        let head = *path.last().unwrap();
        if is_source(g, head) {
            let mut indices: Vec<usize> = path.clone();
            indices.reverse();
            chains.push(Subchain { indices });
        }
        for &w in &incoming[head] {
            if !path.contains(&w) {
                path.push(w);
                extend(g, incoming, path, chains);
                path.pop();
            }
        }
    }
    extend(&g, &incoming, &mut path, &mut chains);
    Ok(chains)
}

/// Deterministic chain choice: shortest chain to `target`, ties broken by the
/// lexicographically smallest index sequence.
pub fn any_chain_to(
    inst: &Instance,
    x: &Partition,
    f: &AssociationFunction,
    target: usize,
) -> Result<Subchain> {
    let g = build_envy_graph(inst, x, f)?;
    if !g.is_acyclic() {
        return Err(Error::CyclicGraph);
    }
    let k = g.num_vertices();
    // dist_to_target[v]: fewest edges from v to the target along envy edges.
    let mut dist = vec![usize::MAX; k];
    dist[target] = 0;
    // Repeated relaxation; graphs here are tiny and acyclic.
    let mut changed = true;
    while changed {
        changed = false;
        for v in 0..k {
            for &w in g.neighbors(v) {
                if dist[w] != usize::MAX && dist[w] + 1 < dist[v] {
                    dist[v] = dist[w] + 1;
                    changed = true;
                }
            }
        }
    }
    let best_len = (0..k)
        .filter(|&v| is_source(&g, v) && dist[v] != usize::MAX)
        .map(|v| dist[v])
        .min()
        .ok_or(Error::CyclicGraph)?;
    // Greedy lexicographic reconstruction along the shortest-distance layers.
    let mut cur = (0..k)
        .find(|&v| is_source(&g, v) && dist[v] == best_len)
        .unwrap();
    let mut indices = vec![cur];
    while cur != target {
        let next = g
            .neighbors(cur)
            .iter()
            .copied()
            .find(|&w| dist[w] != usize::MAX && dist[w] + 1 == dist[cur])
            .unwrap();
        indices.push(next);
        cur = next;
    }
    Ok(Subchain { indices })
}

/// Shifts associations one step along the subchain `(q_s, ..., q_0)`: each
/// non-final vertex's agent moves to the next vertex, `q_s` becomes free, and
/// the agent previously at `q_0` (if any) is dropped.
pub fn shift_subchain(f: &AssociationFunction, c: &Subchain) -> Result<AssociationFunction> {
    let idx = c.indices();
    for &v in &idx[..idx.len() - 1] {
        if f.get(v).is_none() {
            return Err(Error::FreeInteriorVertex(v));
        }
    }
    let mut assoc: Vec<Option<usize>> = f.as_slice().to_vec();
    for pos in (1..idx.len()).rev() {
        assoc[idx[pos]] = f.get(idx[pos - 1]);
    }
    assoc[idx[0]] = None;
    AssociationFunction::new(assoc)
}
