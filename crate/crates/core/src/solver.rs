//! The constructive MXS+EFL algorithm: FindMins, fair-association matching,
//! the two-phase ReBalance procedure, and the outer loop that grows the
//! partition one empty bundle at a time. Every run is deterministic and emits
//! a replayable trace.

use serde::{Deserialize, Serialize};

use crate::envygraph::{
    any_chain_to, eliminate_cycles_logged, shift_subchain, AssociationFunction, Partition,
    Subchain,
};
use crate::error::{Error, Result};
use crate::fairness::{self, FairnessCtx, DEFAULT_ENUMERATION_BUDGET};
use crate::model::{Bundle, GoodId, Instance};

/// A partition together with its association function.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Allocation {
    pub partition: Partition,
    pub assoc: AssociationFunction,
}

impl Allocation {
    pub fn new(partition: Partition, assoc: AssociationFunction) -> Result<Allocation> {
        if partition.len() != assoc.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} bundles but association over {}",
                partition.len(),
                assoc.len()
            )));
        }
        Ok(Allocation { partition, assoc })
    }

    /// The bundle held by `agent`, if any.
    pub fn bundle_of(&self, agent: usize) -> Option<Bundle> {
        self.assoc
            .bundle_of(agent)
            .map(|l| self.partition.bundle(l))
    }
}

/// Solver knobs. The algorithm itself is deterministic; there is no seed.
#[derive(Clone, Debug)]
pub struct SolverConfig {
    /// Cap on enumerated assignments for share computations.
    pub enumeration_budget: u64,
    /// Tripwire per loop; termination is guaranteed, so hitting this signals
    /// an implementation bug.
    pub iteration_cap: u64,
    /// Run the invariant checks at phase loop heads/ends.
    pub debug_assertions: bool,
}

impl Default for SolverConfig {
    fn default() -> SolverConfig {
        SolverConfig {
            enumeration_budget: DEFAULT_ENUMERATION_BUDGET,
            iteration_cap: 10_000_000,
            debug_assertions: false,
        }
    }
}

/// One trace entry. `Init`, `AppendEmptyBundle`, `CycleRotation`, `AssocSet`,
/// `MoveGood`, `Shift`, and `FinalAssoc` are state transitions; the rest are
/// informational markers that replay ignores.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "camelCase", rename_all_fields = "camelCase")]
pub enum TraceEvent {
    Init {
        num_goods: usize,
        bundles: Vec<Vec<usize>>,
        assoc: Vec<Option<usize>>,
    },
    OuterRound {
        k: usize,
    },
    AppendEmptyBundle,
    CycleRotation {
        cycle: Vec<usize>,
    },
    Phase1Head,
    /// A fair-association query on the listed bundles and its outcome.
    MatchingChecked {
        bundles: Vec<Vec<usize>>,
        fair: bool,
    },
    AssocSet {
        bundle: usize,
        agent: Option<usize>,
    },
    MoveGood {
        good: usize,
        from: usize,
        to: usize,
    },
    Shift {
        chain: Vec<usize>,
    },
    Phase2Start {
        p: usize,
        q: usize,
        i: usize,
        j: usize,
        e: Vec<usize>,
    },
    Phase2IterEnd {
        p: usize,
        q: usize,
        e: Vec<usize>,
    },
    FinalAssoc {
        assoc: Vec<Option<usize>>,
    },
}

/// Ordered event log of a solver run. Replaying the state-transition events
/// from the `Init` state reproduces every intermediate and the final
/// allocation.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolverTrace {
    pub events: Vec<TraceEvent>,
    pub phase1_iterations: u64,
    pub phase2_iterations: u64,
}

impl SolverTrace {
    fn push(&mut self, e: TraceEvent) {
        self.events.push(e);
    }

    /// One JSON object per line, in event order.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for e in &self.events {
            out.push_str(&serde_json::to_string(e).expect("trace events serialize"));
            out.push('\n');
        }
        out
    }

    /// Replays all events; returns the final (partition, association).
    pub fn replay(&self) -> Result<(Partition, AssociationFunction)> {
        self.replay_prefix(self.events.len())
    }

    /// Replays the first `n` events.
    pub fn replay_prefix(&self, n: usize) -> Result<(Partition, AssociationFunction)> {
        let Some(TraceEvent::Init {
            num_goods,
            bundles,
            assoc,
        }) = self.events.first()
        else {
            return Err(Error::InvalidInput("trace does not start with init".into()));
        };
        let mut x = Partition::new(
            *num_goods,
            bundles
                .iter()
                .map(|b| b.iter().map(|&g| GoodId(g)).collect())
                .collect(),
        )?;
        let mut f = AssociationFunction::new(assoc.clone())?;
        for e in &self.events[1..n.min(self.events.len())] {
            match e {
                TraceEvent::Init { .. } => {
                    return Err(Error::InvalidInput("duplicate init event".into()));
                }
                TraceEvent::AppendEmptyBundle => {
                    x.push_empty();
                    f.push_free();
                }
                TraceEvent::CycleRotation { cycle } => {
                    let mut assoc = f.as_slice().to_vec();
                    let t = cycle.len();
                    for a in 0..t {
                        assoc[cycle[(a + 1) % t]] = f.get(cycle[a]);
                    }
                    f = AssociationFunction::new(assoc)?;
                }
                TraceEvent::AssocSet { bundle, agent } => f.set(*bundle, *agent),
                TraceEvent::MoveGood { good, from, to } => {
                    x.move_good(GoodId(*good), *from, *to);
                }
                TraceEvent::Shift { chain } => {
                    f = shift_subchain(&f, &Subchain::new(chain.clone())?)?;
                }
                TraceEvent::FinalAssoc { assoc } => {
                    f = AssociationFunction::new(assoc.clone())?;
                }
                TraceEvent::OuterRound { .. }
                | TraceEvent::Phase1Head
                | TraceEvent::MatchingChecked { .. }
                | TraceEvent::Phase2Start { .. }
                | TraceEvent::Phase2IterEnd { .. } => {}
            }
        }
        Ok((x, f))
    }
}

fn bundle_lists(x: &Partition) -> Vec<Vec<usize>> {
    x.bundles().iter().map(|b| b.to_indices()).collect()
}

/// The pair `(x_p^i, x_p^j)` of minimum-marginal-value goods of `p`. When the
/// agents' argmax sets intersect, both take the lowest-index shared good;
/// otherwise each takes the lowest-index member of its own set.
pub fn find_mins(inst: &Instance, p: Bundle, i: usize, j: usize) -> Result<(GoodId, GoodId)> {
    if p.is_empty() {
        return Err(Error::EmptyBundle);
    }
    let argmax = |u: usize| -> Vec<GoodId> {
        let v = inst.valuation(u);
        let best = p.iter().map(|g| v.value(p.without(g))).max().unwrap();
        p.iter().filter(|&g| v.value(p.without(g)) == best).collect()
    };
    let mins_i = argmax(i);
    let mins_j = argmax(j);
    if let Some(&shared) = mins_i.iter().find(|g| mins_j.contains(g)) {
        return Ok((shared, shared));
    }
    Ok((mins_i[0], mins_j[0]))
}

/// Maximum matching between bundles and agents where bundle `l` may go to
/// agent `i` iff `l` is MXS+EFL-feasible for `i`. Bundles are matched in
/// index order, agents tried in index order, so the result is deterministic.
fn fair_matching(ctx: &FairnessCtx, x: &Partition) -> Result<Option<AssociationFunction>> {
    let n = ctx.instance().num_agents();
    let k = x.len();
    if k > n {
        return Ok(None);
    }
    let mut feas = vec![vec![false; n]; k];
    for (l, row) in feas.iter_mut().enumerate() {
        for (i, cell) in row.iter_mut().enumerate() {
            *cell = ctx.mxs_efl_feasible(i, l, x)?;
        }
    }
    fn augment(
        l: usize,
        feas: &[Vec<bool>],
        seen: &mut [bool],
        agent_of: &mut [Option<usize>],
        bundle_of: &mut [Option<usize>],
    ) -> bool {
        // Prefer free agents so symmetric instances match identity-ordered.
        for i in 0..seen.len() {
            if feas[l][i] && !seen[i] && bundle_of[i].is_none() {
                seen[i] = true;
                agent_of[l] = Some(i);
                bundle_of[i] = Some(l);
                return true;
            }
        }
        for i in 0..seen.len() {
            if feas[l][i] && !seen[i] {
                seen[i] = true;
                if augment(bundle_of[i].unwrap(), feas, seen, agent_of, bundle_of) {
                    agent_of[l] = Some(i);
                    bundle_of[i] = Some(l);
                    return true;
                }
            }
        }
        false
    }
    let mut agent_of: Vec<Option<usize>> = vec![None; k];
    let mut bundle_of: Vec<Option<usize>> = vec![None; n];
    for l in 0..k {
        let mut seen = vec![false; n];
        if !augment(l, &feas, &mut seen, &mut agent_of, &mut bundle_of) {
            return Ok(None);
        }
    }
    Ok(Some(AssociationFunction::new(agent_of)?))
}

/// True iff some full association assigns every bundle of `x` to a distinct
/// agent for whom it is MXS+EFL-feasible.
pub fn has_fair_association(ctx: &FairnessCtx, x: &Partition) -> Result<bool> {
    Ok(fair_matching(ctx, x)?.is_some())
}

/// The deterministic full MXS+EFL association for `x`.
pub fn fair_association(ctx: &FairnessCtx, x: &Partition) -> Result<AssociationFunction> {
    fair_matching(ctx, x)?.ok_or(Error::NoFairAssociation)
}

/// ReBalance: restores a full MXS+EFL association after an empty bundle has
/// been appended. On entry `f` is MXS+EFL for `x` with support `[0, k-1)` and
/// the envy graph is acyclic.
pub fn rebalance(
    inst: &Instance,
    x: &Partition,
    f: &AssociationFunction,
    cfg: &SolverConfig,
) -> Result<(Partition, AssociationFunction, SolverTrace)> {
    let ctx = FairnessCtx::new(inst, cfg.enumeration_budget);
    let mut trace = SolverTrace::default();
    trace.push(TraceEvent::Init {
        num_goods: inst.num_goods(),
        bundles: bundle_lists(x),
        assoc: f.as_slice().to_vec(),
    });
    let mut x = x.clone();
    let mut f = f.clone();
    rebalance_inner(&ctx, &mut x, &mut f, cfg, &mut trace)?;
    Ok((x, f, trace))
}

fn log_cycle_elimination(
    inst: &Instance,
    x: &Partition,
    f: &mut AssociationFunction,
    trace: &mut SolverTrace,
) -> Result<()> {
    let (nf, rotations) = eliminate_cycles_logged(inst, x, f)?;
    for cycle in rotations {
        trace.push(TraceEvent::CycleRotation { cycle });
    }
    *f = nf;
    Ok(())
}

fn rebalance_inner(
    ctx: &FairnessCtx,
    x: &mut Partition,
    f: &mut AssociationFunction,
    cfg: &SolverConfig,
    trace: &mut SolverTrace,
) -> Result<()> {
    let inst = ctx.instance();
    let k = x.len();
    let free_bundle = k - 1;

    // Phase 1: hand the free agent an EFX-best bundle, trickling its goods of
    // minimum marginal value toward the chain source while the donor keeps
    // weakly preferring the shrunken bundle.
    let mut iters = 0u64;
    let (mut p, mut q, i, j, mut x_p_j) = loop {
        if iters >= cfg.iteration_cap {
            return Err(Error::IterationCapExceeded("rebalance phase 1"));
        }
        iters += 1;
        trace.phase1_iterations += 1;
        trace.push(TraceEvent::Phase1Head);
        if cfg.debug_assertions {
            if let Some(w) = ctx.phase1_invariant_check(x, f)? {
                return Err(Error::InvariantViolation(format!("phase 1 head: {w}")));
            }
        }
        let fair = has_fair_association(ctx, x)?;
        trace.push(TraceEvent::MatchingChecked {
            bundles: bundle_lists(x),
            fair,
        });
        if fair {
            let fa = fair_association(ctx, x)?;
            trace.push(TraceEvent::FinalAssoc {
                assoc: fa.as_slice().to_vec(),
            });
            *f = fa;
            return Ok(());
        }
        let i = (0..inst.num_agents())
            .find(|&a| f.bundle_of(a).is_none())
            .ok_or_else(|| {
                Error::InvariantViolation("no free agent despite failed matching".into())
            })?;
        let p = fairness::efx_best(inst, i, x)[0];
        let Some(j) = f.get(p) else {
            // Unreachable when the phase invariant holds: assigning the free
            // bundle to i would itself complete a fair association.
            return Err(Error::InvariantViolation(
                "EFX-best bundle of the free agent is itself free".into(),
            ));
        };
        if !fairness::efx_best(inst, j, x).contains(&p) {
            f.set(p, Some(i));
            trace.push(TraceEvent::AssocSet {
                bundle: p,
                agent: Some(i),
            });
            // Reassociation can introduce envy cycles; clear them so the
            // next chain computation sees an acyclic graph.
            log_cycle_elimination(inst, x, f, trace)?;
            continue;
        }
        let (x_p_i, x_p_j) = find_mins(inst, x.bundle(p), i, j)?;
        let c = any_chain_to(inst, x, f, free_bundle)?;
        let q = c.first();
        let mut moved = false;
        for (u, xu) in [(i, x_p_i), (j, x_p_j)] {
            let gained = inst.value(u, x.bundle(q).with(xu));
            let kept = inst.value(u, x.bundle(p).without(xu));
            if gained <= kept {
                x.move_good(xu, p, q);
                trace.push(TraceEvent::MoveGood {
                    good: xu.0,
                    from: p,
                    to: q,
                });
                f.set(p, Some(u));
                trace.push(TraceEvent::AssocSet {
                    bundle: p,
                    agent: Some(u),
                });
                log_cycle_elimination(inst, x, f, trace)?;
                moved = true;
                break;
            }
        }
        if moved {
            continue;
        }
        // Transition to Phase 2.
        *f = shift_subchain(f, &c)?;
        trace.push(TraceEvent::Shift {
            chain: c.indices().to_vec(),
        });
        f.set(p, None);
        trace.push(TraceEvent::AssocSet {
            bundle: p,
            agent: None,
        });
        break (p, q, i, j, x_p_j);
    };

    let val_j = inst.valuation(j);
    let mut e = x.bundle(p).without(x_p_j);
    trace.push(TraceEvent::Phase2Start {
        p,
        q,
        i,
        j,
        e: e.to_indices(),
    });

    // Phase 2: walk the hole toward a chain source until either candidate
    // move admits a fair association.
    let mut iters = 0u64;
    loop {
        if iters >= cfg.iteration_cap {
            return Err(Error::IterationCapExceeded("rebalance phase 2"));
        }
        iters += 1;
        trace.phase2_iterations += 1;
        log_cycle_elimination(inst, x, f, trace)?;
        let c = any_chain_to(inst, x, f, q)?;
        let r = c.first();
        let (x_p_i, x_p_j_new) = find_mins(inst, x.bundle(p), i, j)?;
        x_p_j = x_p_j_new;

        let mut x1 = x.clone();
        x1.move_good(x_p_j, p, r);
        let fair1 = has_fair_association(ctx, &x1)?;
        trace.push(TraceEvent::MatchingChecked {
            bundles: bundle_lists(&x1),
            fair: fair1,
        });
        if fair1 {
            let fa = fair_association(ctx, &x1)?;
            trace.push(TraceEvent::MoveGood {
                good: x_p_j.0,
                from: p,
                to: r,
            });
            trace.push(TraceEvent::FinalAssoc {
                assoc: fa.as_slice().to_vec(),
            });
            *x = x1;
            *f = fa;
            return Ok(());
        }
        let mut x2 = x.clone();
        x2.move_good(x_p_i, p, r);
        let fair2 = has_fair_association(ctx, &x2)?;
        trace.push(TraceEvent::MatchingChecked {
            bundles: bundle_lists(&x2),
            fair: fair2,
        });
        if fair2 {
            let fa = fair_association(ctx, &x2)?;
            trace.push(TraceEvent::MoveGood {
                good: x_p_i.0,
                from: p,
                to: r,
            });
            trace.push(TraceEvent::FinalAssoc {
                assoc: fa.as_slice().to_vec(),
            });
            *x = x2;
            *f = fa;
            return Ok(());
        }

        // Repeated identical bundles in the triple count as distinct entries.
        let (_, next_e) = val_j.next_best_bundle(&[e, x1.bundle(p), x1.bundle(r)])?;
        e = next_e;
        let old_p = p;
        if val_j.value(x1.bundle(r)) > val_j.value(x1.bundle(p)) {
            *f = shift_subchain(f, &c)?;
            trace.push(TraceEvent::Shift {
                chain: c.indices().to_vec(),
            });
            q = p;
            p = r;
        } else if inst.value(i, x1.bundle(r)) >= inst.value(i, x.bundle(q)) {
            *f = shift_subchain(f, &c)?;
            trace.push(TraceEvent::Shift {
                chain: c.indices().to_vec(),
            });
            q = r;
        }
        *x = x1;
        trace.push(TraceEvent::MoveGood {
            good: x_p_j.0,
            from: old_p,
            to: r,
        });
        trace.push(TraceEvent::Phase2IterEnd {
            p,
            q,
            e: e.to_indices(),
        });
        if cfg.debug_assertions {
            if let Some(w) = ctx.phase2_invariant_a_check(x, e, j, p)? {
                return Err(Error::InvariantViolation(format!("phase 2 end: {w}")));
            }
        }
    }
}

/// Computes an allocation that is MXS+EFL for every agent: start from the
/// grand bundle held by agent 0, then for each further agent append an empty
/// bundle and rebalance.
pub fn mxs_efl_allocate(inst: &Instance, cfg: &SolverConfig) -> Result<(Allocation, SolverTrace)> {
    let n = inst.num_agents();
    let ctx = FairnessCtx::new(inst, cfg.enumeration_budget);
    let mut trace = SolverTrace::default();
    let mut x = Partition::grand(inst.num_goods());
    let mut f = AssociationFunction::new(vec![Some(0)])?;
    trace.push(TraceEvent::Init {
        num_goods: inst.num_goods(),
        bundles: bundle_lists(&x),
        assoc: f.as_slice().to_vec(),
    });
    for k in 2..=n {
        trace.push(TraceEvent::OuterRound { k });
        log_cycle_elimination(inst, &x, &mut f, &mut trace)?;
        x.push_empty();
        f.push_free();
        trace.push(TraceEvent::AppendEmptyBundle);
        rebalance_inner(&ctx, &mut x, &mut f, cfg, &mut trace)?;
    }
    if n == 1 {
        trace.push(TraceEvent::FinalAssoc {
            assoc: f.as_slice().to_vec(),
        });
    }
    let alloc = Allocation::new(x, f)?;
    Ok((alloc, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Valuation;
    use crate::rational::Rat;

    fn additive(vals: &[i64]) -> Valuation {
        Valuation::additive(vals.iter().map(|&v| Rat::int(v)).collect()).unwrap()
    }

    fn bundle(goods: &[usize]) -> Bundle {
        goods.iter().map(|&g| GoodId(g)).collect()
    }

    #[test]
    fn find_mins_disjoint_argmax() {
        let inst =
            Instance::new(2, vec![additive(&[2, 5]), additive(&[3, 1])]).unwrap();
        // dropping good 0 leaves 5 for i; dropping good 1 leaves 3 for j
        assert_eq!(
            find_mins(&inst, bundle(&[0, 1]), 0, 1).unwrap(),
            (GoodId(0), GoodId(1))
        );
    }

    #[test]
    fn find_mins_shared_minimum() {
        let inst =
            Instance::new(2, vec![additive(&[1, 5]), additive(&[2, 9])]).unwrap();
        assert_eq!(
            find_mins(&inst, bundle(&[0, 1]), 0, 1).unwrap(),
            (GoodId(0), GoodId(0))
        );
    }

    #[test]
    fn find_mins_singleton_and_empty() {
        let inst = Instance::new(3, vec![additive(&[1, 1, 1]); 2]).unwrap();
        assert_eq!(
            find_mins(&inst, bundle(&[2]), 0, 1).unwrap(),
            (GoodId(2), GoodId(2))
        );
        assert!(matches!(
            find_mins(&inst, Bundle::EMPTY, 0, 1),
            Err(Error::EmptyBundle)
        ));
    }

    #[test]
    fn fair_association_single_bundle() {
        let inst = Instance::new(2, vec![additive(&[1, 2])]).unwrap();
        let ctx = FairnessCtx::new(&inst, DEFAULT_ENUMERATION_BUDGET);
        let x = Partition::grand(2);
        assert!(has_fair_association(&ctx, &x).unwrap());
        let f = fair_association(&ctx, &x).unwrap();
        assert_eq!(f.as_slice(), &[Some(0)]);
    }

    #[test]
    fn fair_association_identical_agents() {
        let inst = Instance::new(2, vec![additive(&[1, 1]); 2]).unwrap();
        let ctx = FairnessCtx::new(&inst, DEFAULT_ENUMERATION_BUDGET);
        let x = Partition::new(2, vec![bundle(&[0]), bundle(&[1])]).unwrap();
        assert!(has_fair_association(&ctx, &x).unwrap());
        // both bundles feasible for both agents: identity matching
        let f = fair_association(&ctx, &x).unwrap();
        assert_eq!(f.as_slice(), &[Some(0), Some(1)]);
    }

    #[test]
    fn fair_association_empty_bundle_fails_mxs() {
        let inst = Instance::new(2, vec![additive(&[1, 1]); 2]).unwrap();
        let ctx = FairnessCtx::new(&inst, DEFAULT_ENUMERATION_BUDGET);
        let x = Partition::new(2, vec![bundle(&[0, 1]), Bundle::EMPTY]).unwrap();
        assert!(!has_fair_association(&ctx, &x).unwrap());
        assert!(matches!(
            fair_association(&ctx, &x),
            Err(Error::NoFairAssociation)
        ));
    }

    #[test]
    fn fair_association_more_bundles_than_agents() {
        let inst = Instance::new(1, vec![additive(&[1])]).unwrap();
        let ctx = FairnessCtx::new(&inst, DEFAULT_ENUMERATION_BUDGET);
        let x = Partition::new(1, vec![bundle(&[0]), Bundle::EMPTY]).unwrap();
        assert!(!has_fair_association(&ctx, &x).unwrap());
    }

    fn check_mxs_efl(inst: &Instance, alloc: &Allocation) {
        let ctx = FairnessCtx::new(inst, DEFAULT_ENUMERATION_BUDGET);
        assert!(alloc.assoc.is_full());
        for l in 0..alloc.partition.len() {
            let agent = alloc.assoc.get(l).unwrap();
            assert!(
                ctx.mxs_efl_feasible(agent, l, &alloc.partition).unwrap(),
                "bundle {l} not MXS+EFL for agent {agent}"
            );
        }
    }

    #[test]
    fn allocate_single_agent() {
        let inst = Instance::new(3, vec![additive(&[1, 2, 3])]).unwrap();
        let (alloc, trace) = mxs_efl_allocate(&inst, &SolverConfig::default()).unwrap();
        assert_eq!(alloc.partition.bundles(), &[bundle(&[0, 1, 2])]);
        assert_eq!(alloc.assoc.as_slice(), &[Some(0)]);
        let (x, f) = trace.replay().unwrap();
        assert_eq!((x, f), (alloc.partition, alloc.assoc));
    }

    #[test]
    fn allocate_two_agents() {
        let inst =
            Instance::new(3, vec![additive(&[4, 3, 1]), additive(&[1, 2, 5])]).unwrap();
        let cfg = SolverConfig {
            debug_assertions: true,
            ..SolverConfig::default()
        };
        let (alloc, trace) = mxs_efl_allocate(&inst, &cfg).unwrap();
        check_mxs_efl(&inst, &alloc);
        let (x, f) = trace.replay().unwrap();
        assert_eq!(x, alloc.partition);
        assert_eq!(f, alloc.assoc);
    }

    #[test]
    fn allocate_three_identical_agents() {
        let inst = Instance::new(6, vec![additive(&[3, 3, 2, 2, 1, 1]); 3]).unwrap();
        let cfg = SolverConfig {
            debug_assertions: true,
            ..SolverConfig::default()
        };
        let (alloc, _) = mxs_efl_allocate(&inst, &cfg).unwrap();
        check_mxs_efl(&inst, &alloc);
        let ctx = FairnessCtx::new(&inst, DEFAULT_ENUMERATION_BUDGET);
        let share = ctx.mxs_share(0, 3).unwrap();
        for agent in 0..3 {
            assert!(inst.value(agent, alloc.bundle_of(agent).unwrap()) >= share);
        }
    }

    #[test]
    fn rebalance_already_fair_input() {
        let inst = Instance::new(2, vec![additive(&[1, 1]); 2]).unwrap();
        let x = Partition::new(2, vec![bundle(&[0]), bundle(&[1])]).unwrap();
        let f = AssociationFunction::new(vec![Some(0), None]).unwrap();
        let (x2, f2, trace) =
            rebalance(&inst, &x, &f, &SolverConfig::default()).unwrap();
        assert_eq!(x2.bundles(), x.bundles());
        assert!(f2.is_full());
        assert!(!trace
            .events
            .iter()
            .any(|e| matches!(e, TraceEvent::MoveGood { .. })));
    }

    #[test]
    fn rebalance_splits_grand_bundle() {
        let inst = Instance::new(4, vec![additive(&[2, 1, 1, 2]); 2]).unwrap();
        let x = Partition::new(4, vec![bundle(&[0, 1, 2, 3]), Bundle::EMPTY]).unwrap();
        let f = AssociationFunction::new(vec![Some(0), None]).unwrap();
        let cfg = SolverConfig {
            debug_assertions: true,
            ..SolverConfig::default()
        };
        let (x2, f2, _) = rebalance(&inst, &x, &f, &cfg).unwrap();
        let alloc = Allocation::new(x2, f2).unwrap();
        check_mxs_efl(&inst, &alloc);
    }

    #[test]
    fn determinism_bitwise() {
        let inst = Instance::new(5, vec![
            additive(&[4, 1, 3, 2, 2]),
            additive(&[2, 5, 1, 1, 3]),
            additive(&[3, 3, 3, 1, 0]),
        ])
        .unwrap();
        let cfg = SolverConfig::default();
        let (a1, t1) = mxs_efl_allocate(&inst, &cfg).unwrap();
        let (a2, t2) = mxs_efl_allocate(&inst, &cfg).unwrap();
        assert_eq!(a1, a2);
        assert_eq!(t1, t2);
        assert_eq!(t1.to_jsonl(), t2.to_jsonl());
    }

    #[test]
    fn trace_marks_outer_rounds() {
        let inst = Instance::new(4, vec![additive(&[1, 2, 3, 4]); 3]).unwrap();
        let (_, trace) = mxs_efl_allocate(&inst, &SolverConfig::default()).unwrap();
        let rounds: Vec<usize> = trace
            .events
            .iter()
            .filter_map(|e| match e {
                TraceEvent::OuterRound { k } => Some(*k),
                _ => None,
            })
            .collect();
        assert_eq!(rounds, vec![2, 3]);
        let appends = trace
            .events
            .iter()
            .filter(|e| matches!(e, TraceEvent::AppendEmptyBundle))
            .count();
        assert_eq!(appends, 2);
    }

    #[test]
    fn trace_replay_tracks_every_prefix() {
        let inst =
            Instance::new(4, vec![additive(&[4, 3, 1, 1]), additive(&[1, 2, 5, 1])]).unwrap();
        let (alloc, trace) = mxs_efl_allocate(&inst, &SolverConfig::default()).unwrap();
        for n in 1..=trace.events.len() {
            trace.replay_prefix(n).unwrap();
        }
        let (x, f) = trace.replay().unwrap();
        assert_eq!((x, f), (alloc.partition, alloc.assoc));
    }

    #[test]
    fn trace_jsonl_round_trip() {
        let inst = Instance::new(3, vec![additive(&[1, 2, 3]); 2]).unwrap();
        let (_, trace) = mxs_efl_allocate(&inst, &SolverConfig::default()).unwrap();
        for line in trace.to_jsonl().lines() {
            let e: TraceEvent = serde_json::from_str(line).unwrap();
            assert!(trace.events.contains(&e));
        }
    }
}
