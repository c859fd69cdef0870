//! Finite weighted cell spaces carrying generator families: mean
//! oscillation seminorms, norm verdicts from family structure, weight
//! brackets, covering decompositions with audited constants, and
//! deterministic example models behind a single JSON document format.

pub mod cellfn;
pub mod denjoy;
pub mod error;
pub mod family;
pub mod library;
pub mod measure;
pub mod model;
pub mod numeric;
pub mod profile;
pub mod space;
pub mod structure;
pub mod suite;
pub mod weights;

pub use cellfn::CellFn;
pub use denjoy::{CzPair, CzResult, DenjoyAudit, DenjoyParams, JnConstants, LocalAudit};
pub use error::{Error, Result};
pub use family::Family;
pub use library::{HedgehogVariant, ModelSpec};
pub use measure::{Seminorm, StepDist};
pub use model::Model;
pub use space::{CellSet, Partition, Space};
pub use structure::{BanachVerdict, CoverReport, IntersectionGraph, Verdict};
pub use suite::CriterionReport;
pub use weights::{BracketReport, JnParams, JnReport};
