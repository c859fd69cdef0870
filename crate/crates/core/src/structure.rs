//! Chain connectivity, covers, decomposability, and the norm verdict.

use std::collections::VecDeque;

use crate::cellfn::CellFn;
use crate::error::{Error, Result};
use crate::family::Family;
use crate::measure;
use crate::space::{CellSet, Partition, Space};

/// Union-find with path halving and union by size.
struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
    }
}

/// Connected components of the generator intersection graph.
#[derive(Clone, Debug)]
pub struct Components {
    pub count: usize,
    /// Dense labels in order of first appearance by generator index.
    pub label_of_gen: Vec<usize>,
}

/// Components via a sweep over the sorted runs of all members.
///
/// A run starting inside the running merged block always shares its
/// first cell with the run holding the current maximum end, so every
/// union joins a genuinely intersecting pair and no intersecting pair
/// ends up separated. Cost is sorting the runs.
pub fn connected_components(family: &Family) -> Components {
    let mut runs: Vec<(u32, u32, usize)> = Vec::new();
    for g in 0..family.len() {
        for &(lo, hi) in family.member(g).runs() {
            runs.push((lo, hi, g));
        }
    }
    runs.sort_unstable();
    let mut uf = UnionFind::new(family.len());
    let mut block_end = 0u32;
    let mut block_rep = usize::MAX;
    for (lo, hi, g) in runs {
        if block_rep != usize::MAX && lo < block_end {
            uf.union(g, block_rep);
            if hi > block_end {
                block_end = hi;
                block_rep = g;
            }
        } else {
            block_end = hi;
            block_rep = g;
        }
    }
    let mut label_of_gen = vec![0usize; family.len()];
    let mut label_of_root = vec![usize::MAX; family.len()];
    let mut count = 0;
    for (g, label) in label_of_gen.iter_mut().enumerate() {
        let root = uf.find(g);
        if label_of_root[root] == usize::MAX {
            label_of_root[root] = count;
            count += 1;
        }
        *label = label_of_root[root];
    }
    Components { count, label_of_gen }
}

/// True when any two generators are linked by a chain of pairwise
/// intersecting generators.
pub fn chain_connected(family: &Family) -> bool {
    connected_components(family).count <= 1
}

/// Explicit intersection graph with adjacency lists.
///
/// Quadratic in the family size; intended for small models and chain
/// inspection, not for bulk scans.
#[derive(Clone, Debug)]
pub struct IntersectionGraph {
    pub adjacency: Vec<Vec<usize>>,
    pub components: usize,
    pub label_of_gen: Vec<usize>,
}

pub fn intersection_graph(family: &Family) -> IntersectionGraph {
    let n = family.len();
    let mut adjacency = vec![Vec::new(); n];
    for a in 0..n {
        for b in a + 1..n {
            if family.member(a).intersects(family.member(b)) {
                adjacency[a].push(b);
                adjacency[b].push(a);
            }
        }
    }
    let mut label_of_gen = vec![usize::MAX; n];
    let mut components = 0;
    for s in 0..n {
        if label_of_gen[s] != usize::MAX {
            continue;
        }
        let mut queue = VecDeque::from([s]);
        label_of_gen[s] = components;
        while let Some(v) = queue.pop_front() {
            for &w in &adjacency[v] {
                if label_of_gen[w] == usize::MAX {
                    label_of_gen[w] = components;
                    queue.push_back(w);
                }
            }
        }
        components += 1;
    }
    IntersectionGraph {
        adjacency,
        components,
        label_of_gen,
    }
}

/// Shortest chain of pairwise intersecting generators from one
/// generator to another, by breadth-first search with neighbors
/// visited in ascending index order.
pub fn finite_chain(family: &Family, from: usize, to: usize) -> Result<Option<Vec<usize>>> {
    let n = family.len();
    if from >= n {
        return Err(Error::UnknownGenerator(format!("#{from}")));
    }
    if to >= n {
        return Err(Error::UnknownGenerator(format!("#{to}")));
    }
    if from == to {
        return Ok(Some(vec![from]));
    }
    let mut parent = vec![usize::MAX; n];
    let mut queue = VecDeque::from([from]);
    parent[from] = from;
    while let Some(v) = queue.pop_front() {
        for w in 0..n {
            if parent[w] == usize::MAX && family.member(v).intersects(family.member(w)) {
                parent[w] = v;
                if w == to {
                    let mut chain = vec![to];
                    let mut cur = to;
                    while cur != from {
                        cur = parent[cur];
                        chain.push(cur);
                    }
                    chain.reverse();
                    return Ok(Some(chain));
                }
                queue.push_back(w);
            }
        }
    }
    Ok(None)
}

/// Longest shortest chain between any two generators, counted in edges.
/// None when the family is disconnected or empty.
pub fn chain_diameter(family: &Family) -> Option<usize> {
    let n = family.len();
    if n == 0 {
        return None;
    }
    let graph = intersection_graph(family);
    if graph.components != 1 {
        return None;
    }
    let mut diameter = 0;
    let mut dist = vec![usize::MAX; n];
    for s in 0..n {
        dist.iter_mut().for_each(|d| *d = usize::MAX);
        dist[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(v) = queue.pop_front() {
            for &w in &graph.adjacency[v] {
                if dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    diameter = diameter.max(dist[w]);
                    queue.push_back(w);
                }
            }
        }
    }
    Some(diameter)
}

/// Result of a coverage check against a target set.
#[derive(Clone, Debug)]
pub struct CoverReport {
    pub covered: bool,
    pub uncovered: CellSet,
    pub uncovered_mass: f64,
    /// Generators meeting the target, ascending.
    pub used: Vec<usize>,
}

/// Checks whether the family covers the target set.
///
/// All cells carry positive weight, so coverage up to null sets and
/// plain coverage coincide here.
pub fn essential_cover_check(
    family: &Family,
    target: &CellSet,
    space: &Space,
) -> Result<CoverReport> {
    if target.is_empty() {
        return Err(Error::EmptyTarget);
    }
    space.check_set(target)?;
    let used: Vec<usize> = (0..family.len())
        .filter(|&g| family.member(g).intersects(target))
        .collect();
    let union = CellSet::union_all(used.iter().map(|&g| family.member(g)));
    let uncovered = target.difference(&union);
    Ok(CoverReport {
        covered: uncovered.is_empty(),
        uncovered_mass: space.measure(&uncovered),
        uncovered,
        used,
    })
}

/// Coverage of one partition part.
#[derive(Clone, Debug)]
pub struct PartCover {
    pub label: String,
    pub covered: bool,
    pub uncovered_mass: f64,
}

/// Partition-wise coverage report.
#[derive(Clone, Debug)]
pub struct DecompReport {
    pub decomposable: bool,
    pub parts: Vec<PartCover>,
}

/// Checks that every part of the partition is covered by the family.
///
/// On finite spaces this holds for one partition exactly when it holds
/// for all of them, since both are equivalent to full coverage.
pub fn partition_decomposable(
    family: &Family,
    partition: &Partition,
    space: &Space,
) -> Result<DecompReport> {
    let union = family.union();
    let mut parts = Vec::with_capacity(partition.len());
    let mut decomposable = true;
    for (label, part) in partition.labels().iter().zip(partition.parts()) {
        let uncovered = part.difference(&union);
        let covered = uncovered.is_empty();
        decomposable &= covered;
        parts.push(PartCover {
            label: label.clone(),
            covered,
            uncovered_mass: space.measure(&uncovered),
        });
    }
    Ok(DecompReport { decomposable, parts })
}

/// A nonconstant function with zero seminorm, when one exists.
///
/// Prefers the indicator of the uncovered cells; with full coverage and
/// several components, falls back to the indicator of the cells touched
/// by the component of generator 0.
pub fn kernel_witness(family: &Family, space: &Space) -> Option<CellFn> {
    if space.len() < 2 {
        return None;
    }
    if family.is_empty() {
        return Some(CellFn::indicator(&CellSet::single_run(0, 1), space.len()));
    }
    let uncovered = space.full_set().difference(&family.union());
    if !uncovered.is_empty() {
        return Some(CellFn::indicator(&uncovered, space.len()));
    }
    let comps = connected_components(family);
    if comps.count >= 2 {
        let keep: Vec<&CellSet> = (0..family.len())
            .filter(|&g| comps.label_of_gen[g] == comps.label_of_gen[0])
            .map(|g| family.member(g))
            .collect();
        let cells = CellSet::union_all(keep);
        return Some(CellFn::indicator(&cells, space.len()));
    }
    None
}

/// Verdict on whether the seminorm is a norm on the quotient space.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Banach,
    NotNorm,
}

/// Full verdict with its two ingredients and an optional witness.
#[derive(Clone, Debug)]
pub struct BanachVerdict {
    pub chain_connected: bool,
    pub decomposable: bool,
    pub verdict: Verdict,
    pub components: usize,
    /// Populated for connected families of at most 512 generators.
    pub chain_diameter: Option<usize>,
    pub witness: Option<CellFn>,
}

/// Combines connectivity and decomposability into the norm verdict.
///
/// The seminorm is a norm modulo constants exactly when the family is
/// chain connected and the space decomposes into covered parts.
pub fn banach_verdict(
    family: &Family,
    partition: &Partition,
    space: &Space,
) -> Result<BanachVerdict> {
    let comps = connected_components(family);
    let connected = family.is_empty() || comps.count <= 1;
    let decomp = partition_decomposable(family, partition, space)?;
    let verdict = if connected && decomp.decomposable && !family.is_empty() {
        Verdict::Banach
    } else {
        Verdict::NotNorm
    };
    let witness = if verdict == Verdict::NotNorm {
        kernel_witness(family, space)
    } else {
        None
    };
    #[cfg(debug_assertions)]
    if let Some(w) = &witness {
        let distinct = {
            let mut vs: Vec<u64> = w.values().iter().map(|v| v.to_bits()).collect();
            vs.sort_unstable();
            vs.dedup();
            vs.len()
        };
        debug_assert!(distinct >= 2, "witness must be nonconstant");
        if !family.is_empty() {
            let s = measure::bmo_seminorm(w, family, 1.0, space)?;
            debug_assert!(s.value < 1e-12, "witness must sit in the kernel");
        }
    }
    let chain_diameter = if connected && !family.is_empty() && family.len() <= 512 {
        chain_diameter(family)
    } else {
        None
    };
    Ok(BanachVerdict {
        chain_connected: connected,
        decomposable: decomp.decomposable,
        verdict,
        components: comps.count,
        chain_diameter,
        witness,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space(n: usize) -> Space {
        Space::new((0..n).map(|i| format!("c{i}")).collect(), vec![1.0; n]).unwrap()
    }

    fn family(members: &[&[u32]]) -> Family {
        Family::new(
            (0..members.len()).map(|g| format!("g{g}")).collect(),
            members
                .iter()
                .map(|m| CellSet::from_indices(m.to_vec()))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn sweep_components_match_graph_components() {
        let f = family(&[&[0, 1], &[1, 2], &[4, 5], &[5, 6], &[8]]);
        let comps = connected_components(&f);
        assert_eq!(comps.count, 3);
        assert_eq!(comps.label_of_gen, vec![0, 0, 1, 1, 2]);
        let graph = intersection_graph(&f);
        assert_eq!(graph.components, 3);
        assert_eq!(graph.label_of_gen, comps.label_of_gen);
        assert!(!chain_connected(&f));
    }

    #[test]
    fn containment_without_run_overlap_connects() {
        // g1 sits inside g0 but shares no endpoint ordering with g2.
        let f = family(&[&[0, 1, 2, 3, 4, 5], &[4], &[2, 7]]);
        assert!(chain_connected(&f));
    }

    #[test]
    fn chains_are_shortest_and_lowest_index() {
        let f = family(&[&[0, 1], &[1, 2], &[2, 3], &[3, 4], &[1, 2, 3]]);
        // 0 to 3: through generator 4 in one hop less than through 1, 2.
        let chain = finite_chain(&f, 0, 3).unwrap().unwrap();
        assert_eq!(chain, vec![0, 4, 3]);
        let chain = finite_chain(&f, 0, 4).unwrap().unwrap();
        assert_eq!(chain, vec![0, 4]);
        assert_eq!(finite_chain(&f, 0, 0).unwrap().unwrap(), vec![0]);
        assert!(finite_chain(&f, 0, 9).is_err());

        // Two shortest routes 0 to 3, middles 1 and 2: lower index wins.
        let tie = family(&[&[0, 1], &[1, 2], &[1, 2], &[2, 3]]);
        assert_eq!(finite_chain(&tie, 0, 3).unwrap().unwrap(), vec![0, 1, 3]);
    }

    #[test]
    fn disconnected_pairs_have_no_chain() {
        let f = family(&[&[0], &[1]]);
        assert_eq!(finite_chain(&f, 0, 1).unwrap(), None);
        assert_eq!(chain_diameter(&f), None);
    }

    #[test]
    fn diameter_of_a_path() {
        let f = family(&[&[0, 1], &[1, 2], &[2, 3], &[3, 4]]);
        assert_eq!(chain_diameter(&f), Some(3));
    }

    #[test]
    fn cover_check_reports_gap() {
        let sp = space(5);
        let f = family(&[&[0, 1], &[3]]);
        let r = essential_cover_check(&f, &sp.full_set(), &sp).unwrap();
        assert!(!r.covered);
        assert_eq!(r.uncovered, CellSet::from_indices(vec![2, 4]));
        assert_eq!(r.uncovered_mass, 2.0);
        assert_eq!(r.used, vec![0, 1]);
        let r = essential_cover_check(&f, &CellSet::from_indices(vec![0, 3]), &sp).unwrap();
        assert!(r.covered);
        assert!(matches!(
            essential_cover_check(&f, &CellSet::empty(), &sp),
            Err(Error::EmptyTarget)
        ));
    }

    #[test]
    fn verdict_banach_when_connected_and_covered() {
        let sp = space(4);
        let f = family(&[&[0, 1], &[1, 2], &[2, 3]]);
        let v = banach_verdict(&f, &Partition::whole(&sp), &sp).unwrap();
        assert_eq!(v.verdict, Verdict::Banach);
        assert!(v.chain_connected && v.decomposable);
        assert_eq!(v.components, 1);
        assert_eq!(v.chain_diameter, Some(2));
        assert!(v.witness.is_none());
    }

    #[test]
    fn verdict_not_norm_with_uncovered_cell() {
        let sp = space(4);
        let f = family(&[&[0, 1], &[1, 2]]);
        let v = banach_verdict(&f, &Partition::whole(&sp), &sp).unwrap();
        assert_eq!(v.verdict, Verdict::NotNorm);
        assert!(v.chain_connected);
        assert!(!v.decomposable);
        let w = v.witness.unwrap();
        assert_eq!(w.values(), &[0.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn verdict_not_norm_with_split_components() {
        let sp = space(4);
        let f = family(&[&[0, 1], &[2, 3]]);
        let v = banach_verdict(&f, &Partition::whole(&sp), &sp).unwrap();
        assert_eq!(v.verdict, Verdict::NotNorm);
        assert!(!v.chain_connected);
        assert!(v.decomposable);
        assert_eq!(v.components, 2);
        // Indicator of the component of generator 0.
        let w = v.witness.unwrap();
        assert_eq!(w.values(), &[1.0, 1.0, 0.0, 0.0]);
    }
}
