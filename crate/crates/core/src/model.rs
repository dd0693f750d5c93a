//! Domain model: goods, bundles, valuations, instances, and the preference
//! utilities (best/next-best/worst bundle, minimum-marginal good) that the
//! rest of the library is built on.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::Rat;

/// Index of a good, in `[0, m)` for the owning instance.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GoodId(pub usize);

/// A set of goods, bitmask over indices `[0, 64)`.
///
/// Subset, union, and difference are single word operations; iteration is in
/// increasing index order, which is the canonical ordering everywhere.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Bundle(u64);

pub const MAX_GOODS: usize = 64;

impl Bundle {
    pub const EMPTY: Bundle = Bundle(0);

    /// Bundle holding all goods of an instance with `m` goods.
    pub fn full(m: usize) -> Bundle {
        assert!(m <= MAX_GOODS);
        if m == MAX_GOODS {
            Bundle(u64::MAX)
        } else {
            Bundle((1u64 << m) - 1)
        }
    }

    pub fn singleton(g: GoodId) -> Bundle {
        Bundle(1u64 << g.0)
    }

    pub fn from_mask(mask: u64) -> Bundle {
        Bundle(mask)
    }

    pub fn mask(self) -> u64 {
        self.0
    }

    pub fn contains(self, g: GoodId) -> bool {
        self.0 & (1u64 << g.0) != 0
    }

    pub fn with(self, g: GoodId) -> Bundle {
        Bundle(self.0 | (1u64 << g.0))
    }

    pub fn without(self, g: GoodId) -> Bundle {
        Bundle(self.0 & !(1u64 << g.0))
    }

    pub fn union(self, other: Bundle) -> Bundle {
        Bundle(self.0 | other.0)
    }

    pub fn difference(self, other: Bundle) -> Bundle {
        Bundle(self.0 & !other.0)
    }

    pub fn intersection(self, other: Bundle) -> Bundle {
        Bundle(self.0 & other.0)
    }

    pub fn is_subset_of(self, other: Bundle) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_disjoint(self, other: Bundle) -> bool {
        self.0 & other.0 == 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    /// Goods in increasing index order.
    pub fn iter(self) -> impl Iterator<Item = GoodId> {
        let mut rest = self.0;
        std::iter::from_fn(move || {
            if rest == 0 {
                None
            } else {
                let g = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(GoodId(g))
            }
        })
    }

    /// All subsets of `self`, in increasing mask order (starts with the empty
    /// bundle, ends with `self`).
    pub fn subsets(self) -> impl Iterator<Item = Bundle> {
        let full = self.0;
        let mut next = Some(0u64);
        std::iter::from_fn(move || {
            let cur = next?;
            next = if cur == full {
                None
            } else {
                Some(cur.wrapping_sub(full) & full)
            };
            Some(Bundle(cur))
        })
    }

    pub fn to_indices(self) -> Vec<usize> {
        self.iter().map(|g| g.0).collect()
    }
}

impl FromIterator<GoodId> for Bundle {
    fn from_iter<I: IntoIterator<Item = GoodId>>(iter: I) -> Bundle {
        iter.into_iter()
            .fold(Bundle::EMPTY, |b, g| b.with(g))
    }
}

impl fmt::Debug for Bundle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter().map(|g| g.0)).finish()
    }
}

/// A valuation function `v : 2^M -> Q≥0`, one of the supported families.
///
/// Every constructed valuation is monotone: additive, budget-additive, and
/// unit-demand valuations require nonnegative per-good values; multiplicative
/// valuations require per-good values >= 1; explicit tables are checked for
/// monotonicity entry by entry.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Valuation {
    Additive {
        values: Vec<Rat>,
    },
    BudgetAdditive {
        values: Vec<Rat>,
        budget: Rat,
    },
    UnitDemand {
        values: Vec<Rat>,
    },
    Multiplicative {
        values: Vec<Rat>,
    },
    Table {
        num_goods: usize,
        table: BTreeMap<Bundle, Rat>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub enum ValuationKind {
    Additive,
    BudgetAdditive,
    UnitDemand,
    Multiplicative,
    Table,
}

fn check_nonnegative(values: &[Rat]) -> Result<()> {
    if let Some(v) = values.iter().find(|v| v.is_negative()) {
        return Err(Error::InvalidValuation(format!("negative good value {v}")));
    }
    Ok(())
}

impl Valuation {
    pub fn additive(values: Vec<Rat>) -> Result<Valuation> {
        check_nonnegative(&values)?;
        Ok(Valuation::Additive { values })
    }

    pub fn budget_additive(values: Vec<Rat>, budget: Rat) -> Result<Valuation> {
        check_nonnegative(&values)?;
        if budget <= Rat::zero() {
            return Err(Error::InvalidValuation(format!(
                "budget must be positive, got {budget}"
            )));
        }
        Ok(Valuation::BudgetAdditive { values, budget })
    }

    pub fn unit_demand(values: Vec<Rat>) -> Result<Valuation> {
        check_nonnegative(&values)?;
        Ok(Valuation::UnitDemand { values })
    }

    /// Per-good values must be >= 1 so the product is monotone.
    pub fn multiplicative(values: Vec<Rat>) -> Result<Valuation> {
        if let Some(v) = values.iter().find(|&&v| v < Rat::one()) {
            return Err(Error::InvalidValuation(format!(
                "multiplicative good value {v} < 1 would break monotonicity"
            )));
        }
        Ok(Valuation::Multiplicative { values })
    }

    /// Explicit table over all `2^m` bundles. Requires an entry for every
    /// subset of `[0, m)`, a nonnegative value for the empty bundle, and
    /// monotonicity (`v(S \ g) <= v(S)` for every `S` and `g in S`).
    pub fn table(num_goods: usize, table: BTreeMap<Bundle, Rat>) -> Result<Valuation> {
        let full = Bundle::full(num_goods);
        for s in full.subsets() {
            let vs = *table
                .get(&s)
                .ok_or_else(|| Error::MissingTableEntry(format!("{s:?}")))?;
            if vs.is_negative() {
                return Err(Error::InvalidValuation(format!(
                    "table value {vs} for {s:?} is negative"
                )));
            }
            for g in s.iter() {
                let sub = *table
                    .get(&s.without(g))
                    .ok_or_else(|| Error::MissingTableEntry(format!("{:?}", s.without(g))))?;
                if sub > vs {
                    return Err(Error::InvalidValuation(format!(
                        "table is not monotone: v({:?})={sub} > v({s:?})={vs}",
                        s.without(g)
                    )));
                }
            }
        }
        Ok(Valuation::Table { num_goods, table })
    }

    pub fn kind(&self) -> ValuationKind {
        match self {
            Valuation::Additive { .. } => ValuationKind::Additive,
            Valuation::BudgetAdditive { .. } => ValuationKind::BudgetAdditive,
            Valuation::UnitDemand { .. } => ValuationKind::UnitDemand,
            Valuation::Multiplicative { .. } => ValuationKind::Multiplicative,
            Valuation::Table { .. } => ValuationKind::Table,
        }
    }

    pub fn num_goods(&self) -> usize {
        match self {
            Valuation::Additive { values }
            | Valuation::BudgetAdditive { values, .. }
            | Valuation::UnitDemand { values }
            | Valuation::Multiplicative { values } => values.len(),
            Valuation::Table { num_goods, .. } => *num_goods,
        }
    }

    /// Exact value of a bundle. The empty bundle evaluates to 0 for the sum-
    /// and max-based families and to 1 (the empty product) for multiplicative.
    pub fn value(&self, s: Bundle) -> Rat {
        debug_assert!(s.is_subset_of(Bundle::full(self.num_goods())));
        match self {
            Valuation::Additive { values } => s.iter().map(|g| values[g.0]).sum(),
            Valuation::BudgetAdditive { values, budget } => {
                let sum: Rat = s.iter().map(|g| values[g.0]).sum();
                sum.min(*budget)
            }
            Valuation::UnitDemand { values } => s
                .iter()
                .map(|g| values[g.0])
                .max()
                .unwrap_or_else(Rat::zero),
            Valuation::Multiplicative { values } => s.iter().map(|g| values[g.0]).product(),
            Valuation::Table { table, .. } => *table
                .get(&s)
                .expect("table valuations are total by construction"),
        }
    }

    /// `max_{g in s} v(s \ g)`, the value left after removing the good of
    /// smallest marginal value; `v(∅)` for the empty bundle.
    pub fn removal_value(&self, s: Bundle) -> Rat {
        s.iter()
            .map(|g| self.value(s.without(g)))
            .max()
            .unwrap_or_else(|| self.value(Bundle::EMPTY))
    }

    /// Most valuable bundle in `ys`; ties in favor of more goods, then the
    /// lowest list index. Returns the index into `ys` and the bundle.
    pub fn best_bundle(&self, ys: &[Bundle]) -> Result<(usize, Bundle)> {
        let mut best: Option<(usize, Rat)> = None;
        for (idx, &y) in ys.iter().enumerate() {
            let v = self.value(y);
            let better = match best {
                None => true,
                Some((bi, bv)) => v > bv || (v == bv && y.len() > ys[bi].len()),
            };
            if better {
                best = Some((idx, v));
            }
        }
        let (idx, _) = best.ok_or(Error::EmptyCollection)?;
        Ok((idx, ys[idx]))
    }

    /// Second most valuable bundle in `ys` under the same tie-break rule.
    pub fn next_best_bundle(&self, ys: &[Bundle]) -> Result<(usize, Bundle)> {
        if ys.len() < 2 {
            return Err(Error::EmptyCollection);
        }
        let (winner, _) = self.best_bundle(ys)?;
        let rest: Vec<Bundle> = ys
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != winner)
            .map(|(_, &y)| y)
            .collect();
        let (ri, b) = self.best_bundle(&rest)?;
        let orig = if ri < winner { ri } else { ri + 1 };
        Ok((orig, b))
    }

    /// Least valuable bundle in `ys`; ties again in favor of more goods, then
    /// the lowest list index.
    pub fn worst_bundle(&self, ys: &[Bundle]) -> Result<(usize, Bundle)> {
        let mut worst: Option<(usize, Rat)> = None;
        for (idx, &y) in ys.iter().enumerate() {
            let v = self.value(y);
            let better = match worst {
                None => true,
                Some((wi, wv)) => v < wv || (v == wv && y.len() > ys[wi].len()),
            };
            if better {
                worst = Some((idx, v));
            }
        }
        let (idx, _) = worst.ok_or(Error::EmptyCollection)?;
        Ok((idx, ys[idx]))
    }

    /// A good `g in p` maximizing `v(p \ g)` (smallest marginal value), ties
    /// broken by lowest good index.
    pub fn min_marginal_good(&self, p: Bundle) -> Result<GoodId> {
        let mut best: Option<(GoodId, Rat)> = None;
        for g in p.iter() {
            let v = self.value(p.without(g));
            if best.map_or(true, |(_, bv)| v > bv) {
                best = Some((g, v));
            }
        }
        best.map(|(g, _)| g).ok_or(Error::EmptyBundle)
    }
}

/// A fair-division instance: `n` agents, `m` goods, one valuation per agent.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Instance {
    num_goods: usize,
    valuations: Vec<Valuation>,
}

impl Instance {
    pub fn new(num_goods: usize, valuations: Vec<Valuation>) -> Result<Instance> {
        if valuations.is_empty() {
            return Err(Error::InvalidInput("instance needs at least one agent".into()));
        }
        if num_goods > MAX_GOODS {
            return Err(Error::InvalidInput(format!(
                "at most {MAX_GOODS} goods are supported, got {num_goods}"
            )));
        }
        for (i, v) in valuations.iter().enumerate() {
            if v.num_goods() != num_goods {
                return Err(Error::DimensionMismatch(format!(
                    "valuation of agent {i} covers {} goods, instance has {num_goods}",
                    v.num_goods()
                )));
            }
        }
        Ok(Instance {
            num_goods,
            valuations,
        })
    }

    pub fn num_agents(&self) -> usize {
        self.valuations.len()
    }

    pub fn num_goods(&self) -> usize {
        self.num_goods
    }

    pub fn all_goods(&self) -> Bundle {
        Bundle::full(self.num_goods)
    }

    pub fn valuation(&self, agent: usize) -> &Valuation {
        &self.valuations[agent]
    }

    pub fn valuations(&self) -> &[Valuation] {
        &self.valuations
    }

    pub fn value(&self, agent: usize, s: Bundle) -> Rat {
        self.valuations[agent].value(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn additive(vals: &[i64]) -> Valuation {
        Valuation::additive(vals.iter().map(|&v| Rat::int(v)).collect()).unwrap()
    }

    fn bundle(goods: &[usize]) -> Bundle {
        goods.iter().map(|&g| GoodId(g)).collect()
    }

    #[test]
    fn value_additive() {
        let v = additive(&[4, 3, 1]);
        assert_eq!(v.value(bundle(&[0, 2])), Rat::int(5));
        assert_eq!(v.value(Bundle::EMPTY), Rat::zero());
    }

    #[test]
    fn value_empty_bundle_per_kind() {
        let vals = vec![Rat::int(2), Rat::int(3)];
        assert_eq!(
            Valuation::budget_additive(vals.clone(), Rat::int(4))
                .unwrap()
                .value(Bundle::EMPTY),
            Rat::zero()
        );
        assert_eq!(
            Valuation::unit_demand(vals.clone()).unwrap().value(Bundle::EMPTY),
            Rat::zero()
        );
        assert_eq!(
            Valuation::multiplicative(vals).unwrap().value(Bundle::EMPTY),
            Rat::one()
        );
    }

    #[test]
    fn value_budget_additive_caps() {
        let v = Valuation::budget_additive(
            vec![Rat::int(4), Rat::int(3), Rat::int(1)],
            Rat::int(6),
        )
        .unwrap();
        assert_eq!(v.value(bundle(&[0, 1])), Rat::int(6));
        assert_eq!(v.value(bundle(&[1, 2])), Rat::int(4));
    }

    #[test]
    fn value_unit_demand_and_multiplicative() {
        let u = Valuation::unit_demand(vec![Rat::int(4), Rat::int(7)]).unwrap();
        assert_eq!(u.value(bundle(&[0, 1])), Rat::int(7));
        let m = Valuation::multiplicative(vec![Rat::int(2), Rat::int(3)]).unwrap();
        assert_eq!(m.value(bundle(&[0, 1])), Rat::int(6));
    }

    #[test]
    fn construction_invariants() {
        assert!(Valuation::additive(vec![Rat::int(-1)]).is_err());
        assert!(Valuation::budget_additive(vec![Rat::int(1)], Rat::zero()).is_err());
        assert!(Valuation::multiplicative(vec![Rat::new(1, 2)]).is_err());
    }

    #[test]
    fn table_must_be_total_and_monotone() {
        let mut t = BTreeMap::new();
        t.insert(Bundle::EMPTY, Rat::zero());
        t.insert(bundle(&[0]), Rat::int(2));
        // missing entry for good 1 and {0,1}
        assert!(matches!(
            Valuation::table(2, t.clone()),
            Err(Error::MissingTableEntry(_))
        ));
        t.insert(bundle(&[1]), Rat::int(3));
        t.insert(bundle(&[0, 1]), Rat::int(1)); // below v({1}): not monotone
        assert!(matches!(
            Valuation::table(2, t.clone()),
            Err(Error::InvalidValuation(_))
        ));
        t.insert(bundle(&[0, 1]), Rat::int(4));
        let v = Valuation::table(2, t).unwrap();
        assert_eq!(v.value(bundle(&[0, 1])), Rat::int(4));
    }

    #[test]
    fn best_bundle_tie_breaks() {
        let v = additive(&[1, 1]);
        // equal value, equal size: lowest index wins
        assert_eq!(v.best_bundle(&[bundle(&[0]), bundle(&[1])]).unwrap().0, 0);

        // equal value, more goods wins
        let v = additive(&[4, 0]);
        let ys = [bundle(&[0]), bundle(&[0, 1])];
        // can't build overlapping bundles from a partition, but Best is defined
        // on arbitrary bundle lists
        assert_eq!(v.best_bundle(&ys).unwrap().1, bundle(&[0, 1]));

        // 4 vs 4: size tie-break selects {1,2}
        let v = additive(&[4, 3, 1]);
        assert_eq!(
            v.best_bundle(&[bundle(&[0]), bundle(&[1, 2])]).unwrap().0,
            1
        );
    }

    #[test]
    fn next_best_bundle_cases() {
        let v = additive(&[4, 3, 1]);
        let ys = [bundle(&[0]), bundle(&[1]), bundle(&[2])];
        assert_eq!(v.next_best_bundle(&ys).unwrap().1, bundle(&[1]));

        // identical singletons of equal value: second-lowest index
        let v = additive(&[2, 2, 2]);
        assert_eq!(v.next_best_bundle(&ys).unwrap().0, 1);

        let v = additive(&[4, 3, 1]);
        assert_eq!(
            v.next_best_bundle(&[bundle(&[0, 1]), bundle(&[2])]).unwrap().1,
            bundle(&[2])
        );

        assert_eq!(
            v.next_best_bundle(&[bundle(&[0])]).unwrap_err(),
            Error::EmptyCollection
        );
    }

    #[test]
    fn worst_bundle_cases() {
        let v = additive(&[4, 3, 1]);
        let ys = [bundle(&[0]), Bundle::EMPTY];
        assert_eq!(v.worst_bundle(&ys).unwrap().1, Bundle::EMPTY);
        assert_eq!(v.worst_bundle(&[bundle(&[2])]).unwrap().0, 0);
    }

    #[test]
    fn worst_bundle_value_tie() {
        // 4 vs 4: ties favor more goods under the shared tie-break rule.
        let v = additive(&[4, 3, 1]);
        let ys = [bundle(&[0]), bundle(&[1, 2])];
        assert_eq!(v.worst_bundle(&ys).unwrap().1, bundle(&[1, 2]));
    }

    #[test]
    fn min_marginal_good_cases() {
        let v = additive(&[2, 5]);
        assert_eq!(v.min_marginal_good(bundle(&[0, 1])).unwrap(), GoodId(0));
        assert_eq!(v.min_marginal_good(bundle(&[3])).unwrap(), GoodId(3));
        let v = additive(&[1, 1, 7]);
        assert_eq!(v.min_marginal_good(bundle(&[0, 1, 2])).unwrap(), GoodId(0));
        assert_eq!(v.min_marginal_good(Bundle::EMPTY).unwrap_err(), Error::EmptyBundle);
    }

    #[test]
    fn subsets_enumeration() {
        let b = bundle(&[0, 2]);
        let subs: Vec<Bundle> = b.subsets().collect();
        assert_eq!(subs.len(), 4);
        assert_eq!(subs[0], Bundle::EMPTY);
        assert_eq!(subs[3], b);
    }
}
