//! Generator families: named collections of cell sets.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::space::{CellSet, Space};

/// An ordered family of named generators.
///
/// Order is significant: every tie in the crate breaks toward the lowest
/// generator index, so a family determines its analyses completely.
#[derive(Clone, Debug)]
pub struct Family {
    ids: Vec<String>,
    members: Vec<CellSet>,
}

impl Family {
    /// Validates unique ids and nonempty members.
    pub fn new(ids: Vec<String>, members: Vec<CellSet>) -> Result<Self> {
        if ids.len() != members.len() {
            return Err(Error::Model(format!(
                "{} generator ids but {} members",
                ids.len(),
                members.len()
            )));
        }
        let mut seen = HashSet::with_capacity(ids.len());
        for (id, member) in ids.iter().zip(&members) {
            if !seen.insert(id.as_str()) {
                return Err(Error::Model(format!("duplicate generator id {id:?}")));
            }
            if member.is_empty() {
                return Err(Error::Model(format!("generator {id:?} is empty")));
            }
        }
        Ok(Self { ids, members })
    }

    /// Confirms all members stay inside the space.
    pub fn check(&self, space: &Space) -> Result<()> {
        for (id, member) in self.ids.iter().zip(&self.members) {
            space.check_set(member).map_err(|_| {
                Error::Model(format!(
                    "generator {id:?} references cells outside the space"
                ))
            })?;
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn id(&self, g: usize) -> &str {
        &self.ids[g]
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn member(&self, g: usize) -> &CellSet {
        &self.members[g]
    }

    pub fn members(&self) -> &[CellSet] {
        &self.members
    }

    /// First generator with the given id.
    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.ids.iter().position(|x| x == id)
    }

    /// Union of all members.
    pub fn union(&self) -> CellSet {
        CellSet::union_all(self.members.iter())
    }

    /// Member measures, in family order.
    pub fn measures(&self, space: &Space) -> Vec<f64> {
        self.members.iter().map(|m| space.measure(m)).collect()
    }

    /// New family keeping the listed indices, in the given order.
    pub fn subfamily(&self, keep: &[usize]) -> Family {
        Family {
            ids: keep.iter().map(|&g| self.ids[g].clone()).collect(),
            members: keep.iter().map(|&g| self.members[g].clone()).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_duplicates_and_empty_members() {
        let s = CellSet::from_indices(vec![0]);
        assert!(Family::new(vec!["g".into(), "g".into()], vec![s.clone(), s.clone()]).is_err());
        assert!(Family::new(vec!["g".into()], vec![CellSet::empty()]).is_err());
    }

    #[test]
    fn union_and_lookup() {
        let f = Family::new(
            vec!["a".into(), "b".into()],
            vec![
                CellSet::from_indices(vec![0, 1]),
                CellSet::from_indices(vec![1, 2]),
            ],
        )
        .unwrap();
        assert_eq!(f.union(), CellSet::from_indices(vec![0, 1, 2]));
        assert_eq!(f.index_of("b"), Some(1));
        assert_eq!(f.index_of("z"), None);
        let sub = f.subfamily(&[1]);
        assert_eq!(sub.id(0), "b");
    }
}
