use std::fmt;
use std::sync::Arc;

use crate::error::KernelError;
use crate::ids::ModelId;
use crate::time::SimTime;

type SelectFn = dyn Fn(&[ModelId]) -> ModelId + Send + Sync;

/// Tie-breaking rule for simultaneous imminent components.
#[derive(Clone, Default)]
pub enum Select {
    /// Smallest id wins.
    #[default]
    LowestId,
    /// Arbitrary rule over the (ascending) set of tied ids. Must return a member.
    Custom(Arc<SelectFn>),
}

impl Select {
    pub fn custom(f: impl Fn(&[ModelId]) -> ModelId + Send + Sync + 'static) -> Self {
        Select::Custom(Arc::new(f))
    }

    /// Applies the rule to a non-empty, ascending set of ids.
    pub fn choose(&self, tied: &[ModelId]) -> Result<ModelId, KernelError> {
        let first = *tied.first().ok_or(KernelError::EmptyInput("select"))?;
        match self {
            Select::LowestId => Ok(first),
            Select::Custom(f) => {
                let chosen = f(tied);
                if tied.binary_search(&chosen).is_ok() {
                    Ok(chosen)
                } else {
                    Err(KernelError::SelectNotMember { chosen })
                }
            }
        }
    }

    pub fn is_lowest_id(&self) -> bool {
        matches!(self, Select::LowestId)
    }
}

impl fmt::Debug for Select {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Select::LowestId => f.write_str("LowestId"),
            Select::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

/// Id of the entry with the least time, ties broken by `select`.
pub fn compare_then_tiebreak(
    entries: &[(ModelId, SimTime)],
    select: &Select,
) -> Result<ModelId, KernelError> {
    let min = entries
        .iter()
        .map(|&(_, t)| t)
        .min()
        .ok_or(KernelError::EmptyInput("compare_then_tiebreak"))?;
    let mut tied: Vec<ModelId> = entries
        .iter()
        .filter(|&&(_, t)| t == min)
        .map(|&(id, _)| id)
        .collect();
    tied.sort_unstable();
    tied.dedup();
    select.choose(&tied)
}
