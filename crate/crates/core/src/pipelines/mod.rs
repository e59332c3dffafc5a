//! Ramsey-type extraction pipelines over pair colorings, brute-force
//! P-largeness oracles, small Ramsey numbers and the published bound table.

mod bounds;
mod coloring;
mod extract;
mod oracle;
mod stabilize;

use std::fmt;
use std::str::FromStr;

pub use bounds::{paper_bound, paper_bounds, rt22_polynomial_exponent, BoundIndex};
pub use coloring::{is_homogeneous, is_transitive, pair_colors, restrict_coloring, Coloring, MAX_TABLE};
pub use extract::{ads_extract, em_extract, rt22_extract, star_exponent};
pub use oracle::{check_p_large, check_p_large_with, ramsey_counterexample, ramsey_number, P_LARGE_CAP};
pub use stabilize::{stabilize_blocks, Homogenize, Stabilized};

use crate::error::{Error, Result};
use crate::largeness::{validate_trace, FinSet, OrdIndex, SparsityPolicy, Variant, Witness};
use crate::milliken::{Limits, PartitionMode};

/// An RT-like statement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Statement {
    /// Colorings of n-subsets with k colors.
    Rt { n: u32, k: u64 },
    /// One-dimensional colorings with any k ≤ min F colors.
    Rt1,
    Em,
    Ads,
}

impl fmt::Display for Statement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Statement::Rt { n, k } => write!(f, "rt{n}_{k}"),
            Statement::Rt1 => f.write_str("rt1"),
            Statement::Em => f.write_str("em"),
            Statement::Ads => f.write_str("ads"),
        }
    }
}

impl FromStr for Statement {
    type Err = Error;

    /// `rt{n}_{k}`, `rt1`, `em` or `ads`.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_lowercase();
        let bad = || Error::Parse { pos: 0, msg: format!("unknown statement `{s}`") };
        match t.as_str() {
            "rt1" => Ok(Statement::Rt1),
            "em" => Ok(Statement::Em),
            "ads" => Ok(Statement::Ads),
            _ => {
                let rest = t.strip_prefix("rt").ok_or_else(bad)?;
                let (n, k) = rest.split_once('_').ok_or_else(bad)?;
                let n: u32 = n.parse().map_err(|_| bad())?;
                let k: u64 = k.parse().map_err(|_| bad())?;
                if n == 0 || k == 0 {
                    return Err(bad());
                }
                Ok(Statement::Rt { n, k })
            }
        }
    }
}

/// What an extraction claims about its result.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Property {
    /// Every pair has `color`; `None` when there are no pairs.
    Homogeneous { color: Option<u64> },
    Transitive,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtractionReport {
    pub result: FinSet,
    pub witness: Witness,
    pub index: OrdIndex,
    pub property: Property,
    pub trace: Vec<String>,
}

impl ExtractionReport {
    pub(crate) fn homogeneous(result: FinSet, witness: Witness, index: OrdIndex, f: &Coloring, trace: Vec<String>) -> Self {
        let color = pair_colors(f, &result).into_iter().next();
        ExtractionReport { result, witness, index, property: Property::Homogeneous { color }, trace }
    }

    /// Re-checks the witness and the claimed property from scratch.
    pub fn verify(&self, f: &Coloring, v: &Variant) -> Result<()> {
        validate_trace(&self.witness, &self.result, &self.index, v)
            .map_err(|e| Error::Invariant(format!("result witness: {e}")))?;
        if !self.result.is_subset(f.carrier()) {
            return Err(Error::Invariant("result leaves the carrier".into()));
        }
        let ok = match self.property {
            Property::Transitive => is_transitive(f, &self.result),
            Property::Homogeneous { color } => {
                let cs = pair_colors(f, &self.result);
                cs.len() <= 1 && cs.iter().next().copied() == color
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Invariant(format!("result does not have the claimed property {:?}", self.property)))
        }
    }
}

/// Which exponents the pipelines insist on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    /// Inputs at the published index; each step consumes the exponents its
    /// lemma consumes.
    Paper,
    /// Any input index; unary steps use the exact decider and every output
    /// is still verified.
    BestEffort,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PipelineConfig {
    pub strategy: Strategy,
    pub partition: PartitionMode,
    pub policy: SparsityPolicy,
    pub limits: Limits,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            strategy: Strategy::BestEffort,
            partition: PartitionMode::Direct,
            policy: SparsityPolicy::Lazy,
            limits: Limits::default(),
        }
    }
}
