//! File formats: instance and allocation JSON schemas, plus conversions to
//! and from the in-memory types. Rationals serialize as bare integers or
//! "p/q" strings; no floats ever appear in files.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::envygraph::{AssociationFunction, Partition};
use crate::error::{Error, Result};
use crate::model::{Bundle, GoodId, Instance, Valuation, ValuationKind};
use crate::rational::Rat;
use crate::solver::Allocation;

pub const FORMAT_VERSION: u32 = 1;

/// One row of an explicit table valuation: a subset of goods and its value.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableRow {
    pub goods: Vec<usize>,
    pub value: Rat,
}

/// One agent's valuation as stored on disk. `type` is one of `additive`,
/// `budget`, `unit`, `mult`, `table`; `budget` only for `budget`; `table`
/// rows only for `table` (where `values` is empty).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValuationEntry {
    #[serde(rename = "type")]
    pub kind: String,
    pub values: Vec<Rat>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<Rat>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<Vec<TableRow>>,
}

/// On-disk instance: `{version: 1, n, m, valuations: [...]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceFile {
    pub version: u32,
    pub n: usize,
    pub m: usize,
    pub valuations: Vec<ValuationEntry>,
}

/// On-disk allocation: `{version: 1, bundles: [[goodIds]], assoc: [agentId-or-null]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AllocationFile {
    pub version: u32,
    pub bundles: Vec<Vec<usize>>,
    pub assoc: Vec<Option<usize>>,
}

fn kind_name(kind: ValuationKind) -> &'static str {
    match kind {
        ValuationKind::Additive => "additive",
        ValuationKind::BudgetAdditive => "budget",
        ValuationKind::UnitDemand => "unit",
        ValuationKind::Multiplicative => "mult",
        ValuationKind::Table => "table",
    }
}

/// Parses a CLI/file kind name.
pub fn parse_kind(name: &str) -> Result<ValuationKind> {
    Ok(match name {
        "additive" => ValuationKind::Additive,
        "budget" => ValuationKind::BudgetAdditive,
        "unit" => ValuationKind::UnitDemand,
        "mult" => ValuationKind::Multiplicative,
        "table" => ValuationKind::Table,
        other => {
            return Err(Error::InvalidInput(format!("unknown valuation kind {other:?}")));
        }
    })
}

impl InstanceFile {
    pub fn from_instance(inst: &Instance) -> InstanceFile {
        let valuations = inst
            .valuations()
            .iter()
            .map(|v| match v {
                Valuation::Additive { values }
                | Valuation::UnitDemand { values }
                | Valuation::Multiplicative { values } => ValuationEntry {
                    kind: kind_name(v.kind()).into(),
                    values: values.clone(),
                    budget: None,
                    table: None,
                },
                Valuation::BudgetAdditive { values, budget } => ValuationEntry {
                    kind: "budget".into(),
                    values: values.clone(),
                    budget: Some(*budget),
                    table: None,
                },
                Valuation::Table { table, .. } => ValuationEntry {
                    kind: "table".into(),
                    values: Vec::new(),
                    budget: None,
                    table: Some(
                        table
                            .iter()
                            .map(|(&s, &value)| TableRow {
                                goods: s.to_indices(),
                                value,
                            })
                            .collect(),
                    ),
                },
            })
            .collect();
        InstanceFile {
            version: FORMAT_VERSION,
            n: inst.num_agents(),
            m: inst.num_goods(),
            valuations,
        }
    }

    pub fn to_instance(&self) -> Result<Instance> {
        if self.version != FORMAT_VERSION {
            return Err(Error::InvalidInput(format!(
                "unsupported file version {}",
                self.version
            )));
        }
        if self.valuations.len() != self.n {
            return Err(Error::InvalidInput(format!(
                "n = {} but {} valuations",
                self.n,
                self.valuations.len()
            )));
        }
        let valuations = self
            .valuations
            .iter()
            .map(|e| {
                Ok(match parse_kind(&e.kind)? {
                    ValuationKind::Additive => Valuation::additive(e.values.clone())?,
                    ValuationKind::UnitDemand => Valuation::unit_demand(e.values.clone())?,
                    ValuationKind::Multiplicative => {
                        Valuation::multiplicative(e.values.clone())?
                    }
                    ValuationKind::BudgetAdditive => {
                        let budget = e.budget.ok_or_else(|| {
                            Error::InvalidInput("budget valuation without budget".into())
                        })?;
                        Valuation::budget_additive(e.values.clone(), budget)?
                    }
                    ValuationKind::Table => {
                        let rows = e.table.as_ref().ok_or_else(|| {
                            Error::InvalidInput("table valuation without table rows".into())
                        })?;
                        let mut table = BTreeMap::new();
                        for row in rows {
                            let b: Bundle = row.goods.iter().map(|&g| GoodId(g)).collect();
                            if table.insert(b, row.value).is_some() {
                                return Err(Error::InvalidInput(format!(
                                    "duplicate table row for goods {:?}",
                                    row.goods
                                )));
                            }
                        }
                        Valuation::table(self.m, table)?
                    }
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Instance::new(self.m, valuations)
    }
}

impl AllocationFile {
    pub fn from_allocation(alloc: &Allocation) -> AllocationFile {
        AllocationFile {
            version: FORMAT_VERSION,
            bundles: alloc
                .partition
                .bundles()
                .iter()
                .map(|b| b.to_indices())
                .collect(),
            assoc: alloc.assoc.as_slice().to_vec(),
        }
    }

    /// Validates against the instance's good set and agent count.
    pub fn to_allocation(&self, inst: &Instance) -> Result<Allocation> {
        if self.version != FORMAT_VERSION {
            return Err(Error::InvalidInput(format!(
                "unsupported file version {}",
                self.version
            )));
        }
        let bundles = self
            .bundles
            .iter()
            .map(|goods| {
                for &g in goods {
                    if g >= inst.num_goods() {
                        return Err(Error::InvalidInput(format!("good {g} out of range")));
                    }
                }
                Ok(goods.iter().map(|&g| GoodId(g)).collect())
            })
            .collect::<Result<Vec<Bundle>>>()?;
        for a in self.assoc.iter().flatten() {
            if *a >= inst.num_agents() {
                return Err(Error::InvalidInput(format!("agent {a} out of range")));
            }
        }
        Allocation::new(
            Partition::new(inst.num_goods(), bundles)?,
            AssociationFunction::new(self.assoc.clone())?,
        )
    }
}
