//! Finite weighted cell spaces, run-encoded cell sets, and partitions.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::numeric::Accumulator;

/// Set of cell indices stored as sorted disjoint half-open runs.
///
/// Runs are canonical: sorted by start, non-overlapping, non-adjacent,
/// and nonempty. Equality of the run vectors is therefore set equality.
/// Geometric families compress to a handful of runs per member, which
/// keeps set algebra proportional to run counts instead of cell counts.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CellSet {
    runs: Vec<(u32, u32)>,
}

impl CellSet {
    pub fn empty() -> Self {
        Self { runs: Vec::new() }
    }

    /// Single half-open run [lo, hi); empty when lo >= hi.
    pub fn single_run(lo: u32, hi: u32) -> Self {
        if lo >= hi {
            Self::empty()
        } else {
            Self { runs: vec![(lo, hi)] }
        }
    }

    /// Builds from arbitrary indices, deduplicating and coalescing.
    pub fn from_indices(mut idx: Vec<u32>) -> Self {
        idx.sort_unstable();
        idx.dedup();
        let mut runs: Vec<(u32, u32)> = Vec::new();
        for i in idx {
            match runs.last_mut() {
                Some((_, hi)) if *hi == i => *hi += 1,
                _ => runs.push((i, i + 1)),
            }
        }
        Self { runs }
    }

    /// Builds from half-open runs, normalizing order and overlap.
    pub fn from_runs(mut runs: Vec<(u32, u32)>) -> Result<Self> {
        for &(lo, hi) in &runs {
            if lo >= hi {
                return Err(Error::Model(format!("empty or reversed run [{lo}, {hi})")));
            }
        }
        runs.sort_unstable();
        let mut out: Vec<(u32, u32)> = Vec::new();
        for (lo, hi) in runs {
            match out.last_mut() {
                Some((_, phi)) if lo <= *phi => *phi = (*phi).max(hi),
                _ => out.push((lo, hi)),
            }
        }
        Ok(Self { runs: out })
    }

    pub fn runs(&self) -> &[(u32, u32)] {
        &self.runs
    }

    /// Number of cells in the set.
    pub fn len(&self) -> usize {
        self.runs.iter().map(|&(lo, hi)| (hi - lo) as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.runs.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = u32> + Clone + '_ {
        self.runs.iter().flat_map(|&(lo, hi)| lo..hi)
    }

    pub fn contains(&self, i: u32) -> bool {
        let pos = self.runs.partition_point(|&(lo, _)| lo <= i);
        pos > 0 && i < self.runs[pos - 1].1
    }

    pub fn max_index(&self) -> Option<u32> {
        self.runs.last().map(|&(_, hi)| hi - 1)
    }

    /// True when the two sets share at least one cell.
    pub fn intersects(&self, other: &CellSet) -> bool {
        let (mut i, mut j) = (0, 0);
        while i < self.runs.len() && j < other.runs.len() {
            let (alo, ahi) = self.runs[i];
            let (blo, bhi) = other.runs[j];
            if alo < bhi && blo < ahi {
                return true;
            }
            if ahi <= bhi {
                i += 1;
            } else {
                j += 1;
            }
        }
        false
    }

    pub fn intersection(&self, other: &CellSet) -> CellSet {
        let mut out = Vec::new();
        let (mut i, mut j) = (0, 0);
        while i < self.runs.len() && j < other.runs.len() {
            let (alo, ahi) = self.runs[i];
            let (blo, bhi) = other.runs[j];
            let lo = alo.max(blo);
            let hi = ahi.min(bhi);
            if lo < hi {
                out.push((lo, hi));
            }
            if ahi <= bhi {
                i += 1;
            } else {
                j += 1;
            }
        }
        CellSet { runs: out }
    }

    pub fn union(&self, other: &CellSet) -> CellSet {
        Self::union_all([self, other])
    }

    /// Union of many sets via a sort-and-merge over all runs.
    pub fn union_all<'a, I>(sets: I) -> CellSet
    where
        I: IntoIterator<Item = &'a CellSet>,
    {
        let mut runs: Vec<(u32, u32)> = Vec::new();
        for s in sets {
            runs.extend_from_slice(&s.runs);
        }
        runs.sort_unstable();
        let mut out: Vec<(u32, u32)> = Vec::new();
        for (lo, hi) in runs {
            match out.last_mut() {
                Some((_, phi)) if lo <= *phi => *phi = (*phi).max(hi),
                _ => out.push((lo, hi)),
            }
        }
        CellSet { runs: out }
    }

    /// Cells of self not contained in other.
    pub fn difference(&self, other: &CellSet) -> CellSet {
        let mut out: Vec<(u32, u32)> = Vec::new();
        let mut j = 0;
        for &(lo, hi) in &self.runs {
            let mut cur = lo;
            while j < other.runs.len() && other.runs[j].1 <= cur {
                j += 1;
            }
            let mut k = j;
            while cur < hi {
                if k >= other.runs.len() || other.runs[k].0 >= hi {
                    out.push((cur, hi));
                    cur = hi;
                } else {
                    let (blo, bhi) = other.runs[k];
                    if blo > cur {
                        out.push((cur, blo));
                    }
                    cur = cur.max(bhi.min(hi));
                    if bhi <= hi {
                        k += 1;
                    }
                }
            }
        }
        CellSet { runs: out }
    }

    pub fn is_subset_of(&self, other: &CellSet) -> bool {
        let mut j = 0;
        for &(lo, hi) in &self.runs {
            while j < other.runs.len() && other.runs[j].1 < hi {
                j += 1;
            }
            match other.runs.get(j) {
                Some(&(blo, bhi)) if blo <= lo && hi <= bhi => {}
                _ => return false,
            }
        }
        true
    }
}

/// Finite measure space: cells with ids and strictly positive weights.
#[derive(Clone, Debug)]
pub struct Space {
    ids: Vec<String>,
    weights: Vec<f64>,
    total: f64,
}

impl Space {
    /// Validates ids for uniqueness and weights for positivity.
    pub fn new(ids: Vec<String>, weights: Vec<f64>) -> Result<Self> {
        if ids.len() != weights.len() {
            return Err(Error::Model(format!(
                "{} ids but {} weights",
                ids.len(),
                weights.len()
            )));
        }
        if ids.is_empty() {
            return Err(Error::Model("space has no cells".into()));
        }
        if ids.len() > u32::MAX as usize {
            return Err(Error::SizeLimit("more than u32::MAX cells".into()));
        }
        let mut seen = HashSet::with_capacity(ids.len());
        for id in &ids {
            if !seen.insert(id.as_str()) {
                return Err(Error::Model(format!("duplicate cell id {id:?}")));
            }
        }
        let mut acc = Accumulator::new();
        for (i, &w) in weights.iter().enumerate() {
            if !w.is_finite() || w <= 0.0 {
                return Err(Error::NonpositiveWeight(i));
            }
            acc.add(w);
        }
        let total = acc.value();
        if !total.is_finite() {
            return Err(Error::Model("total weight overflows f64".into()));
        }
        Ok(Self { ids, weights, total })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn id(&self, i: u32) -> &str {
        &self.ids[i as usize]
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    #[inline]
    pub fn weight(&self, i: u32) -> f64 {
        self.weights[i as usize]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Total weight of all cells.
    pub fn total(&self) -> f64 {
        self.total
    }

    /// Weight sum over a cell set, compensated.
    pub fn measure(&self, cells: &CellSet) -> f64 {
        let mut acc = Accumulator::new();
        for &(lo, hi) in cells.runs() {
            for &w in &self.weights[lo as usize..hi as usize] {
                acc.add(w);
            }
        }
        acc.value()
    }

    /// The set of all cell indices as one run.
    pub fn full_set(&self) -> CellSet {
        CellSet::single_run(0, self.len() as u32)
    }

    /// Confirms every index of the set is a cell of this space.
    pub fn check_set(&self, s: &CellSet) -> Result<()> {
        match s.max_index() {
            Some(m) if (m as usize) >= self.len() => Err(Error::Model(format!(
                "cell index {m} outside space of {} cells",
                self.len()
            ))),
            _ => Ok(()),
        }
    }
}

/// Disjoint cover of the space by labeled cell sets.
#[derive(Clone, Debug)]
pub struct Partition {
    labels: Vec<String>,
    parts: Vec<CellSet>,
}

impl Partition {
    /// Validates that the parts are nonempty, disjoint, and cover the space.
    pub fn new(labels: Vec<String>, parts: Vec<CellSet>, space: &Space) -> Result<Self> {
        if labels.len() != parts.len() {
            return Err(Error::InvalidPartition(format!(
                "{} labels but {} parts",
                labels.len(),
                parts.len()
            )));
        }
        let mut cell_count = 0usize;
        for (label, part) in labels.iter().zip(&parts) {
            if part.is_empty() {
                return Err(Error::InvalidPartition(format!("part {label:?} is empty")));
            }
            space
                .check_set(part)
                .map_err(|_| Error::InvalidPartition(format!("part {label:?} leaves the space")))?;
            cell_count += part.len();
        }
        // Disjoint cover iff the union is everything and counts add up.
        let union = CellSet::union_all(parts.iter());
        if union != space.full_set() {
            return Err(Error::InvalidPartition("parts do not cover the space".into()));
        }
        if cell_count != space.len() {
            return Err(Error::InvalidPartition("parts overlap".into()));
        }
        Ok(Self { labels, parts })
    }

    /// One part holding the whole space.
    pub fn whole(space: &Space) -> Self {
        Self {
            labels: vec!["all".into()],
            parts: vec![space.full_set()],
        }
    }

    /// One part per cell.
    pub fn singletons(space: &Space) -> Self {
        Self {
            labels: space.ids().to_vec(),
            parts: (0..space.len() as u32)
                .map(|i| CellSet::single_run(i, i + 1))
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn parts(&self) -> &[CellSet] {
        &self.parts
    }
}
