//! Model documents: JSON load, validation, and exact round-trips.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cellfn::CellFn;
use crate::error::{Error, Result};
use crate::family::Family;
use crate::numeric::decompose;
use crate::space::{CellSet, Partition, Space};

/// A complete analysis instance: space, family, named functions, an
/// optional decomposition, and the coverage policy.
#[derive(Clone, Debug)]
pub struct Model {
    pub space: Space,
    pub family: Family,
    pub functions: BTreeMap<String, CellFn>,
    pub decomposition: Option<Partition>,
    /// Allows uncovered cells; their mass is reported instead of
    /// rejected at load time.
    pub essential_cover_only: bool,
}

impl Model {
    /// Validates cross-references and coverage.
    pub fn new(
        space: Space,
        family: Family,
        functions: BTreeMap<String, CellFn>,
        decomposition: Option<Partition>,
        essential_cover_only: bool,
    ) -> Result<Self> {
        family.check(&space)?;
        for (name, f) in &functions {
            if f.len() != space.len() {
                return Err(Error::Model(format!(
                    "function {name:?} has {} values for {} cells",
                    f.len(),
                    space.len()
                )));
            }
        }
        let model = Self {
            space,
            family,
            functions,
            decomposition,
            essential_cover_only,
        };
        if !model.essential_cover_only && !model.uncovered().is_empty() {
            return Err(Error::Model(format!(
                "{} cells lie outside every generator; set essential_cover_only to load anyway",
                model.uncovered().len()
            )));
        }
        Ok(model)
    }

    /// Cells outside every generator.
    pub fn uncovered(&self) -> CellSet {
        self.space.full_set().difference(&self.family.union())
    }

    pub fn function(&self, name: &str) -> Result<&CellFn> {
        self.functions
            .get(name)
            .ok_or_else(|| Error::UnknownFunction(name.to_string()))
    }

    /// The stored decomposition, or the whole space as one part.
    pub fn default_partition(&self) -> Partition {
        self.decomposition
            .clone()
            .unwrap_or_else(|| Partition::whole(&self.space))
    }

    pub fn from_json_str(doc: &str) -> Result<Self> {
        let raw: RawModel =
            serde_json::from_str(doc).map_err(|e| Error::Parse(e.to_string()))?;
        raw.into_model()
    }

    pub fn to_json_string(&self) -> String {
        let raw = RawModel::from_model(self);
        let mut out = serde_json::to_string_pretty(&raw).expect("models serialize");
        out.push('\n');
        out
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let doc = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_json_str(&doc)
    }

    pub fn write_to_path(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json_string())
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))
    }
}

#[derive(Serialize, Deserialize)]
struct RawModel {
    cells: Vec<RawCell>,
    generators: Vec<RawGen>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    functions: BTreeMap<String, Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    decomposition: Option<Vec<Vec<u32>>>,
    #[serde(default, skip_serializing_if = "is_false")]
    essential_cover_only: bool,
}

fn is_false(b: &bool) -> bool {
    !*b
}

#[derive(Serialize, Deserialize)]
struct RawCell {
    id: String,
    w: RawWeight,
}

/// Weights load from plain numbers or from exact strings, either an
/// integer ratio "m/n" or a decimal literal.
#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum RawWeight {
    Num(f64),
    Text(String),
}

/// Members load from an explicit cell list or from half-open index
/// runs, whichever the document provides.
#[derive(Serialize, Deserialize)]
struct RawGen {
    id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    cells: Option<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    runs: Option<Vec<(u32, u32)>>,
}

fn parse_weight(raw: &RawWeight, cell: usize) -> Result<f64> {
    match raw {
        RawWeight::Num(x) => Ok(*x),
        RawWeight::Text(s) => {
            let s = s.trim();
            if let Some((num, den)) = s.split_once('/') {
                let n: u128 = num.trim().parse().map_err(|_| {
                    Error::Parse(format!("cell {cell}: bad ratio numerator {num:?}"))
                })?;
                let d: u128 = den.trim().parse().map_err(|_| {
                    Error::Parse(format!("cell {cell}: bad ratio denominator {den:?}"))
                })?;
                if d == 0 {
                    return Err(Error::Parse(format!("cell {cell}: zero denominator")));
                }
                Ok(n as f64 / d as f64)
            } else {
                s.parse::<f64>()
                    .map_err(|_| Error::Parse(format!("cell {cell}: bad weight {s:?}")))
            }
        }
    }
}

/// Exact string form of a positive weight: an integer, a dyadic ratio,
/// or the shortest decimal that parses back to the same bits.
fn weight_to_raw(w: f64) -> RawWeight {
    let (mut m, mut e) = decompose(w);
    if m > 0 {
        while m & 1 == 0 {
            m >>= 1;
            e += 1;
        }
        if (0..=63).contains(&e) {
            let v = (m as u128) << e;
            if v <= u64::MAX as u128 {
                return RawWeight::Text(v.to_string());
            }
        } else if (-100..0).contains(&e) {
            return RawWeight::Text(format!("{m}/{}", 1u128 << (-e as u32)));
        }
    }
    RawWeight::Text(format!("{w}"))
}

impl RawModel {
    fn into_model(self) -> Result<Model> {
        let mut ids = Vec::with_capacity(self.cells.len());
        let mut weights = Vec::with_capacity(self.cells.len());
        for (i, cell) in self.cells.iter().enumerate() {
            ids.push(cell.id.clone());
            weights.push(parse_weight(&cell.w, i)?);
        }
        let space = Space::new(ids, weights)?;
        let mut gen_ids = Vec::with_capacity(self.generators.len());
        let mut members = Vec::with_capacity(self.generators.len());
        for gen in &self.generators {
            let member = match (&gen.cells, &gen.runs) {
                (Some(cells), None) => CellSet::from_indices(cells.clone()),
                (None, Some(runs)) => CellSet::from_runs(runs.clone())?,
                _ => {
                    return Err(Error::Model(format!(
                        "generator {:?} needs exactly one of cells or runs",
                        gen.id
                    )))
                }
            };
            gen_ids.push(gen.id.clone());
            members.push(member);
        }
        let family = Family::new(gen_ids, members)?;
        let mut functions = BTreeMap::new();
        for (name, values) in self.functions {
            functions.insert(name, CellFn::new(values)?);
        }
        let decomposition = match self.decomposition {
            None => None,
            Some(parts) => {
                let labels = (0..parts.len()).map(|i| format!("part{i}")).collect();
                let sets = parts.into_iter().map(CellSet::from_indices).collect();
                Some(Partition::new(labels, sets, &space)?)
            }
        };
        Model::new(
            space,
            family,
            functions,
            decomposition,
            self.essential_cover_only,
        )
    }

    fn from_model(model: &Model) -> Self {
        let cells = model
            .space
            .ids()
            .iter()
            .enumerate()
            .map(|(i, id)| RawCell {
                id: id.clone(),
                w: weight_to_raw(model.space.weight(i as u32)),
            })
            .collect();
        let generators = (0..model.family.len())
            .map(|g| {
                let member = model.family.member(g);
                let id = model.family.id(g).to_string();
                // Runs only when they compress clearly; small members
                // stay as explicit lists for readability.
                if member.len() > 16 && member.runs().len() * 4 <= member.len() {
                    RawGen {
                        id,
                        cells: None,
                        runs: Some(member.runs().to_vec()),
                    }
                } else {
                    RawGen {
                        id,
                        cells: Some(member.iter().collect()),
                        runs: None,
                    }
                }
            })
            .collect();
        let functions = model
            .functions
            .iter()
            .map(|(name, f)| (name.clone(), f.values().to_vec()))
            .collect();
        let decomposition = model
            .decomposition
            .as_ref()
            .map(|p| p.parts().iter().map(|part| part.iter().collect()).collect());
        RawModel {
            cells,
            generators,
            functions,
            decomposition,
            essential_cover_only: model.essential_cover_only,
        }
    }
}
