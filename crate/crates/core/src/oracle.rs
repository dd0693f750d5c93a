//! Definition-level verification: exhaustive enumerators and an allocation
//! auditor. Everything here is recomputed from the quantified definitions,
//! independent of the solver's feasibility logic, so it can serve as an
//! oracle against it. The duplication with the fairness module is deliberate.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::envygraph::Partition;
use crate::error::{Error, Result};
use crate::fairness::{self, FairnessCtx};
use crate::model::{Bundle, Instance, Valuation};
use crate::rational::Rat;
use crate::solver::Allocation;

/// Iterates the `k^|s|` labeled assignments of the goods of `s` to `k`
/// bundles, each exactly once, in a fixed order.
pub fn enumerate_labeled_partitions(
    s: Bundle,
    k: usize,
    budget: u64,
) -> Result<impl Iterator<Item = Vec<Bundle>>> {
    let goods = s.to_indices();
    let needed = (k as u128).pow(goods.len() as u32);
    if needed > budget as u128 {
        return Err(Error::InstanceTooLarge { needed, budget });
    }
    let total = needed as u64;
    Ok((0..total).map(move |mut code| {
        let mut bundles = vec![Bundle::EMPTY; k];
        for &g in &goods {
            let slot = (code % k as u64) as usize;
            code /= k as u64;
            bundles[slot] = bundles[slot].with(crate::model::GoodId(g));
        }
        bundles
    }))
}

/// Per-instance memo for the oracle's own share computations.
struct ShareOracle<'a> {
    inst: &'a Instance,
    budget: u64,
    mms: BTreeMap<(usize, usize, Bundle), Rat>,
    mxs: BTreeMap<(usize, usize), (Rat, Vec<Bundle>)>,
}

impl<'a> ShareOracle<'a> {
    fn new(inst: &'a Instance, budget: u64) -> ShareOracle<'a> {
        ShareOracle {
            inst,
            budget,
            mms: BTreeMap::new(),
            mxs: BTreeMap::new(),
        }
    }

    fn mms(&mut self, i: usize, k: usize, s: Bundle) -> Result<Rat> {
        if let Some(&v) = self.mms.get(&(i, k, s)) {
            return Ok(v);
        }
        let val = self.inst.valuation(i);
        let best = enumerate_labeled_partitions(s, k, self.budget)?
            .map(|bundles| bundles.iter().map(|&b| val.value(b)).min().unwrap())
            .max()
            .unwrap();
        self.mms.insert((i, k, s), best);
        Ok(best)
    }

    /// MXS share of `i` at size `k`, with a minimizing partition as witness.
    fn mxs(&mut self, i: usize, k: usize) -> Result<(Rat, Vec<Bundle>)> {
        if let Some(v) = self.mxs.get(&(i, k)) {
            return Ok(v.clone());
        }
        let val = self.inst.valuation(i);
        let mut best: Option<(Rat, Vec<Bundle>)> = None;
        for bundles in enumerate_labeled_partitions(self.inst.all_goods(), k, self.budget)? {
            let worst_feasible = (0..k)
                .filter(|&l| is_efx_feasible(val, l, &bundles))
                .map(|l| val.value(bundles[l]))
                .min()
                .unwrap();
            if best.as_ref().map_or(true, |(b, _)| worst_feasible < *b) {
                best = Some((worst_feasible, bundles));
            }
        }
        let best = best.unwrap();
        self.mxs.insert((i, k), best.clone());
        Ok(best)
    }
}

fn is_efx_feasible(v: &Valuation, l: usize, bundles: &[Bundle]) -> bool {
    let own = v.value(bundles[l]);
    bundles
        .iter()
        .enumerate()
        .all(|(z, &t)| z == l || t.iter().all(|g| own >= v.value(t.without(g))))
}

/// Auditor knobs: the share-enumeration budget and a separate budget for the
/// exponential GMMS sweep.
#[derive(Clone, Debug)]
pub struct AuditOptions {
    pub enumeration_budget: u64,
    pub gmms_budget: u64,
}

impl Default for AuditOptions {
    fn default() -> AuditOptions {
        AuditOptions {
            enumeration_budget: fairness::DEFAULT_ENUMERATION_BUDGET,
            gmms_budget: fairness::DEFAULT_ENUMERATION_BUDGET,
        }
    }
}

/// One agent's audit row. `gmms_alpha` is None when the sweep exceeded its
/// budget; that is reported as "not evaluated", never as a pass.
#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct AgentAudit {
    pub efl: bool,
    pub mxs: bool,
    pub mxs_share: Rat,
    pub ef1: bool,
    pub alpha_efx: Rat,
    pub alpha_mms: Rat,
    pub pmms_alpha: Rat,
    pub gmms_alpha: Option<Rat>,
    pub proportional: bool,
    pub witnesses: Vec<String>,
}

/// Full audit of an allocation: per-agent fairness verdicts plus the global
/// MXS∧EFL verdict.
#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct AuditReport {
    pub agents: Vec<AgentAudit>,
    pub verdict: bool,
}

/// Recomputes every fairness notion for `alloc` from first principles.
/// Requires a full association.
pub fn audit_allocation(
    inst: &Instance,
    alloc: &Allocation,
    opts: &AuditOptions,
) -> Result<AuditReport> {
    if !alloc.assoc.is_full() {
        return Err(Error::InvalidInput("audit requires a full association".into()));
    }
    let n = inst.num_agents();
    let k = alloc.partition.len();
    let mut shares = ShareOracle::new(inst, opts.enumeration_budget);
    let mut agents = Vec::with_capacity(n);
    let mut verdict = true;
    for i in 0..n {
        let v = inst.valuation(i);
        let own_idx = alloc.assoc.bundle_of(i);
        let own = own_idx.map_or(Bundle::EMPTY, |l| alloc.partition.bundle(l));
        let own_value = v.value(own);
        let mut witnesses = Vec::new();

        // EFL: for every bundle T with |T| > 1, some g in T has
        // v(own) >= v(T \ g) or v(own) >= v({g}).
        let mut efl = true;
        for (l, &t) in alloc.partition.bundles().iter().enumerate() {
            if Some(l) == own_idx || t.len() <= 1 {
                continue;
            }
            let ok = t.iter().any(|g| {
                own_value >= v.value(t.without(g))
                    || own_value >= v.value(Bundle::singleton(g))
            });
            if !ok {
                efl = false;
                witnesses.push(format!("EFL: agent {i} EFL-envies bundle {l}"));
            }
        }

        // MXS against the enumerated share.
        let (share, worst_partition) = shares.mxs(i, k)?;
        let mxs = own_value >= share;
        if !mxs {
            let lists: Vec<Vec<usize>> =
                worst_partition.iter().map(|b| b.to_indices()).collect();
            witnesses.push(format!(
                "MXS: v_{i}(own) = {own_value} < share {share}; minimizing partition {lists:?}"
            ));
        }

        // EF1: some single removal from each rival bundle kills the envy.
        let mut ef1 = true;
        for (l, &t) in alloc.partition.bundles().iter().enumerate() {
            if Some(l) == own_idx {
                continue;
            }
            let ok = if t.is_empty() {
                own_value >= v.value(t)
            } else {
                t.iter().any(|g| own_value >= v.value(t.without(g)))
            };
            if !ok {
                ef1 = false;
                witnesses.push(format!("EF1: agent {i} envies bundle {l} beyond one good"));
            }
        }

        // α-EFX: min over rival bundles of own / max_g v(T \ g).
        let mut alpha_efx = Rat::one();
        for (l, &t) in alloc.partition.bundles().iter().enumerate() {
            if Some(l) == own_idx || t.is_empty() {
                continue;
            }
            let denom = t.iter().map(|g| v.value(t.without(g))).max().unwrap();
            let ratio = if denom.is_zero() {
                Rat::one()
            } else {
                own_value / denom
            };
            if ratio < alpha_efx {
                alpha_efx = ratio;
                witnesses.push(format!("alphaEFX: ratio {ratio} against bundle {l}"));
            }
        }

        // α-MMS against μ_i(n, M).
        let mu = shares.mms(i, n, inst.all_goods())?;
        let alpha_mms = if mu.is_zero() {
            Rat::one()
        } else {
            own_value / mu
        };
        if alpha_mms < Rat::one() {
            witnesses.push(format!("alphaMMS: {alpha_mms} with mu = {mu}"));
        }

        // PMMS: pairwise maximin over own ∪ rival.
        let mut pmms_alpha = Rat::one();
        for j in 0..n {
            if j == i {
                continue;
            }
            let other = alloc
                .assoc
                .bundle_of(j)
                .map_or(Bundle::EMPTY, |l| alloc.partition.bundle(l));
            let mu2 = shares.mms(i, 2, own.union(other))?;
            let ratio = if mu2.is_zero() {
                Rat::one()
            } else {
                own_value / mu2
            };
            if ratio < pmms_alpha {
                pmms_alpha = ratio;
                witnesses.push(format!("PMMS: ratio {ratio} against agent {j}"));
            }
        }

        // GMMS: every agent subset containing i, swept in increasing size;
        // abandoned (not passed) if any μ exceeds the budget.
        let gmms_alpha = gmms_alpha(inst, alloc, i, own, &mut shares, opts.gmms_budget)?;
        if gmms_alpha.is_none() {
            witnesses.push("GMMS: not evaluated within budget".into());
        } else if gmms_alpha.unwrap() < Rat::one() {
            witnesses.push(format!("GMMS: alpha {}", gmms_alpha.unwrap()));
        }

        let proportional = own_value * Rat::int(n as i64) >= v.value(inst.all_goods());
        if !proportional {
            witnesses.push(format!(
                "proportionality: {own_value} < v_{i}(M)/{n}"
            ));
        }

        verdict = verdict && efl && mxs;
        agents.push(AgentAudit {
            efl,
            mxs,
            mxs_share: share,
            ef1,
            alpha_efx,
            alpha_mms,
            pmms_alpha,
            gmms_alpha,
            proportional,
            witnesses,
        });
    }
    Ok(AuditReport { agents, verdict })
}

fn gmms_alpha(
    inst: &Instance,
    alloc: &Allocation,
    i: usize,
    own: Bundle,
    shares: &mut ShareOracle<'_>,
    gmms_budget: u64,
) -> Result<Option<Rat>> {
    let n = inst.num_agents();
    let own_value = inst.value(i, own);
    let mut alpha = Rat::one();
    // Subsets of agents containing i, by increasing size.
    let mut subsets: Vec<Vec<usize>> = (0u32..1 << n)
        .filter(|m| m & (1 << i) != 0)
        .map(|m| (0..n).filter(|a| m & (1 << a) != 0).collect())
        .collect();
    subsets.sort_by_key(|s| s.len());
    for subset in subsets {
        let pool = subset.iter().fold(Bundle::EMPTY, |acc, &a| {
            acc.union(
                alloc
                    .assoc
                    .bundle_of(a)
                    .map_or(Bundle::EMPTY, |l| alloc.partition.bundle(l)),
            )
        });
        let saved = shares.budget;
        shares.budget = gmms_budget;
        let mu = shares.mms(i, subset.len(), pool);
        shares.budget = saved;
        let mu = match mu {
            Ok(mu) => mu,
            Err(Error::InstanceTooLarge { .. }) => return Ok(None),
            Err(e) => return Err(e),
        };
        if !mu.is_zero() {
            alpha = alpha.min(own_value / mu);
        }
    }
    Ok(Some(alpha))
}

/// Exhaustive search over all injective bundle-to-agent assignments; true iff
/// one makes every bundle MXS+EFL-feasible for its agent. Validation uses the
/// fairness-module predicates; only the search strategy differs from the
/// solver's matching.
pub fn brute_force_fair_association_exists(
    ctx: &FairnessCtx,
    x: &Partition,
) -> Result<bool> {
    let n = ctx.instance().num_agents();
    let k = x.len();
    if k > n {
        return Ok(false);
    }
    let needed: u128 = (0..k).map(|t| (n - t) as u128).product();
    if needed > ctx.budget() as u128 {
        return Err(Error::InstanceTooLarge {
            needed,
            budget: ctx.budget(),
        });
    }
    fn search(
        ctx: &FairnessCtx,
        x: &Partition,
        l: usize,
        used: &mut Vec<bool>,
    ) -> Result<bool> {
        if l == x.len() {
            return Ok(true);
        }
        for i in 0..used.len() {
            if !used[i] && ctx.mxs_efl_feasible(i, l, x)? {
                used[i] = true;
                if search(ctx, x, l + 1, used)? {
                    return Ok(true);
                }
                used[i] = false;
            }
        }
        Ok(false)
    }
    search(ctx, x, 0, &mut vec![false; n])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envygraph::AssociationFunction;
    use crate::model::GoodId;

    fn additive(vals: &[i64]) -> Valuation {
        Valuation::additive(vals.iter().map(|&v| Rat::int(v)).collect()).unwrap()
    }

    fn bundle(goods: &[usize]) -> Bundle {
        goods.iter().map(|&g| GoodId(g)).collect()
    }

    #[test]
    fn enumeration_counts() {
        let count = |s: Bundle, k: usize| {
            enumerate_labeled_partitions(s, k, 1 << 20).unwrap().count()
        };
        assert_eq!(count(Bundle::EMPTY, 3), 1);
        assert_eq!(count(bundle(&[0]), 2), 2);
        assert_eq!(count(bundle(&[0, 1, 2]), 2), 8);
        assert!(matches!(
            enumerate_labeled_partitions(Bundle::full(10), 4, 16).map(|_| ()),
            Err(Error::InstanceTooLarge { .. })
        ));
    }

    #[test]
    fn enumeration_yields_each_once() {
        let all: Vec<Vec<Bundle>> =
            enumerate_labeled_partitions(bundle(&[0, 1, 2]), 2, 1 << 20)
                .unwrap()
                .collect();
        let mut dedup = all.clone();
        dedup.sort();
        dedup.dedup();
        assert_eq!(dedup.len(), all.len());
        for p in &all {
            assert_eq!(p[0].union(p[1]), bundle(&[0, 1, 2]));
            assert!(p[0].is_disjoint(p[1]));
        }
    }

    fn alloc(inst: &Instance, bundles: Vec<Bundle>, assoc: Vec<Option<usize>>) -> Allocation {
        Allocation::new(
            Partition::new(inst.num_goods(), bundles).unwrap(),
            AssociationFunction::new(assoc).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn audit_single_agent() {
        let inst = Instance::new(2, vec![additive(&[1, 2])]).unwrap();
        let a = alloc(&inst, vec![bundle(&[0, 1])], vec![Some(0)]);
        let r = audit_allocation(&inst, &a, &AuditOptions::default()).unwrap();
        assert!(r.verdict);
        let row = &r.agents[0];
        assert!(row.efl && row.mxs && row.ef1 && row.proportional);
        assert_eq!(row.alpha_efx, Rat::one());
        assert_eq!(row.alpha_mms, Rat::one());
        assert_eq!(row.pmms_alpha, Rat::one());
        assert_eq!(row.gmms_alpha, Some(Rat::one()));
    }

    #[test]
    fn audit_unfair_allocation() {
        let inst = Instance::new(2, vec![additive(&[1, 1]); 2]).unwrap();
        let a = alloc(&inst, vec![bundle(&[0, 1]), Bundle::EMPTY], vec![Some(0), Some(1)]);
        let r = audit_allocation(&inst, &a, &AuditOptions::default()).unwrap();
        assert!(!r.verdict);
        let row = &r.agents[1];
        assert!(!row.mxs);
        assert!(row.witnesses.iter().any(|w| w.starts_with("MXS:")));
        assert!(!row.proportional);
    }

    #[test]
    fn audit_fair_split() {
        let inst =
            Instance::new(4, vec![additive(&[3, 1, 2, 2]), additive(&[1, 3, 2, 2])]).unwrap();
        let a = alloc(
            &inst,
            vec![bundle(&[0, 2]), bundle(&[1, 3])],
            vec![Some(0), Some(1)],
        );
        let r = audit_allocation(&inst, &a, &AuditOptions::default()).unwrap();
        assert!(r.verdict);
        for row in &r.agents {
            assert!(row.ef1);
            assert!(row.alpha_efx >= Rat::one());
            assert!(row.proportional);
        }
    }

    #[test]
    fn audit_report_serializes_stably() {
        let inst = Instance::new(1, vec![additive(&[1])]).unwrap();
        let a = alloc(&inst, vec![bundle(&[0])], vec![Some(0)]);
        let r = audit_allocation(&inst, &a, &AuditOptions::default()).unwrap();
        let json = serde_json::to_string(&r).unwrap();
        let efl = json.find("\"efl\"").unwrap();
        let mxs = json.find("\"mxs\"").unwrap();
        let verdict = json.find("\"verdict\"").unwrap();
        assert!(efl < mxs && mxs < verdict);
    }

    #[test]
    fn brute_force_matches_matching_on_samples() {
        let inst =
            Instance::new(3, vec![additive(&[2, 2, 1]), additive(&[1, 2, 3])]).unwrap();
        let ctx = FairnessCtx::new(&inst, fairness::DEFAULT_ENUMERATION_BUDGET);
        for bundles in enumerate_labeled_partitions(inst.all_goods(), 2, 1 << 12).unwrap() {
            let x = Partition::new(3, bundles).unwrap();
            assert_eq!(
                brute_force_fair_association_exists(&ctx, &x).unwrap(),
                crate::solver::has_fair_association(&ctx, &x).unwrap()
            );
        }
    }

    #[test]
    fn brute_force_trivial_cases() {
        let inst = Instance::new(2, vec![additive(&[1, 1])]).unwrap();
        let ctx = FairnessCtx::new(&inst, fairness::DEFAULT_ENUMERATION_BUDGET);
        // k = 1: the grand bundle is always MXS+EFL-feasible for someone
        assert!(brute_force_fair_association_exists(&ctx, &Partition::grand(2)).unwrap());
        // k > n: pigeonhole
        let x = Partition::new(2, vec![bundle(&[0]), bundle(&[1]), Bundle::EMPTY]).unwrap();
        assert!(!brute_force_fair_association_exists(&ctx, &x).unwrap());
    }
}
