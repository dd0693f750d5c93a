//! Instance generation: seeded random instances and a fixed adversarial
//! corpus for oracle cross-checks.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::{Error, Result};
use crate::model::{Bundle, Instance, Valuation, ValuationKind};
use crate::rational::Rat;

/// Parameters for random instance generation. Integer values keep share
/// enumeration exact and fast.
#[derive(Clone, Debug)]
pub struct GeneratorSpec {
    pub n: usize,
    pub m: usize,
    pub kind: ValuationKind,
    /// Inclusive bounds for good values.
    pub value_lo: i64,
    pub value_hi: i64,
    /// Inclusive bounds for the budget (budget-additive only).
    pub budget_lo: i64,
    pub budget_hi: i64,
    pub seed: u64,
}

impl GeneratorSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n < 1 {
            return Err(Error::InvalidSpec("need at least one agent".into()));
        }
        if self.value_lo < 0 || self.value_lo > self.value_hi {
            return Err(Error::InvalidSpec(format!(
                "bad value range [{}, {}]",
                self.value_lo, self.value_hi
            )));
        }
        if self.kind == ValuationKind::Multiplicative && self.value_lo < 1 {
            return Err(Error::InvalidSpec(
                "multiplicative values need a lower bound of at least 1".into(),
            ));
        }
        if self.kind == ValuationKind::BudgetAdditive
            && (self.budget_lo < 1 || self.budget_lo > self.budget_hi)
        {
            return Err(Error::InvalidSpec(format!(
                "bad budget range [{}, {}]",
                self.budget_lo, self.budget_hi
            )));
        }
        Ok(())
    }
}

/// Uniform draw from `[lo, hi]` by modulo reduction of the next 64-bit
/// output. The slight modulo bias is irrelevant at these range sizes; what
/// matters is that the mapping is fixed, so seeds reproduce exactly.
fn draw(rng: &mut ChaCha8Rng, lo: i64, hi: i64) -> i64 {
    lo + (rng.next_u64() % (hi - lo + 1) as u64) as i64
}

/// Deterministic function of the spec (ChaCha8 stream keyed by the seed;
/// values drawn agent-major, good-minor, budget after each agent's values).
pub fn generate(spec: &GeneratorSpec) -> Result<Instance> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut valuations = Vec::with_capacity(spec.n);
    for _ in 0..spec.n {
        let values: Vec<Rat> = (0..spec.m)
            .map(|_| Rat::int(draw(&mut rng, spec.value_lo, spec.value_hi)))
            .collect();
        let v = match spec.kind {
            ValuationKind::Additive => Valuation::additive(values)?,
            ValuationKind::UnitDemand => Valuation::unit_demand(values)?,
            ValuationKind::Multiplicative => Valuation::multiplicative(values)?,
            ValuationKind::BudgetAdditive => {
                let budget = Rat::int(draw(&mut rng, spec.budget_lo, spec.budget_hi));
                Valuation::budget_additive(values, budget)?
            }
            ValuationKind::Table => random_monotone_table(&mut rng, spec)?,
        };
        valuations.push(v);
    }
    Instance::new(spec.m, valuations)
}

/// Monotone table built bottom-up: each subset's value is the maximum over
/// its one-good-removed subsets plus a random increment from the value range.
fn random_monotone_table(rng: &mut ChaCha8Rng, spec: &GeneratorSpec) -> Result<Valuation> {
    let mut table = std::collections::BTreeMap::new();
    table.insert(Bundle::EMPTY, Rat::zero());
    let mut by_size: Vec<Vec<Bundle>> = vec![Vec::new(); spec.m + 1];
    for s in Bundle::full(spec.m).subsets() {
        by_size[s.len()].push(s);
    }
    for size in 1..=spec.m {
        for &s in &by_size[size] {
            let base = s
                .iter()
                .map(|g| table[&s.without(g)])
                .max()
                .unwrap_or_else(Rat::zero);
            let inc = Rat::int(draw(rng, spec.value_lo, spec.value_hi));
            table.insert(s, base + inc);
        }
    }
    Valuation::table(spec.m, table)
}

/// A hand-built instance with its intent.
#[derive(Clone, Debug)]
pub struct CorpusEntry {
    pub name: &'static str,
    pub note: &'static str,
    pub instance: Instance,
}

fn add(vals: &[i64]) -> Valuation {
    Valuation::additive(vals.iter().map(|&v| Rat::int(v)).collect()).unwrap()
}

/// Fixed corpus of adversarial instances. Contents are versioned: tests pin
/// the serialized form, so edits here must be deliberate.
pub fn adversarial_corpus() -> Vec<CorpusEntry> {
    let entry = |name, note, m, vals: Vec<Valuation>| CorpusEntry {
        name,
        note,
        instance: Instance::new(m, vals).unwrap(),
    };
    vec![
        entry(
            "shared-minimum",
            "FindMins argmax sets intersect; both agents shed good 0",
            2,
            vec![add(&[1, 5]), add(&[2, 9])],
        ),
        entry(
            "disjoint-minima",
            "FindMins argmax sets are disjoint",
            2,
            vec![add(&[2, 5]), add(&[3, 1])],
        ),
        entry(
            "all-zero",
            "degenerate: every bundle worth 0 to everyone",
            3,
            vec![add(&[0, 0, 0]), add(&[0, 0, 0])],
        ),
        entry(
            "no-goods",
            "m = 0; all bundles empty",
            0,
            vec![add(&[]), add(&[])],
        ),
        entry(
            "single-good-three-agents",
            "one good, three agents; two agents end empty-handed",
            1,
            vec![add(&[1]), add(&[2]), add(&[3])],
        ),
        entry(
            "identical-triple",
            "three identical additive agents",
            6,
            vec![add(&[3, 3, 2, 2, 1, 1]); 3],
        ),
        entry(
            "zero-valued-goods",
            "goods worth 0 to one agent but not the other",
            3,
            vec![add(&[0, 3, 2]), add(&[4, 0, 1])],
        ),
        entry(
            "flat-ties",
            "every good identical; ties in every tie-break rule",
            4,
            vec![add(&[2, 2, 2, 2]), add(&[2, 2, 2, 2])],
        ),
        entry(
            "one-big-good",
            "a single good dominates the whole endowment",
            5,
            vec![add(&[8, 1, 1, 1, 1]), add(&[8, 1, 1, 1, 1])],
        ),
        entry(
            "opposed-preferences",
            "agents want opposite halves of the goods",
            4,
            vec![add(&[5, 4, 1, 0]), add(&[0, 1, 4, 5])],
        ),
        entry(
            "phase2-entry",
            "three agents driving ReBalance into Phase 2 (trace-confirmed)",
            5,
            vec![
                add(&[5, 0, 3, 4, 6]),
                add(&[6, 5, 2, 1, 6]),
                add(&[5, 6, 3, 3, 2]),
            ],
        ),
        entry(
            "four-agents-mixed",
            "largest supported agent count with mixed preferences",
            5,
            vec![
                add(&[4, 1, 3, 2, 2]),
                add(&[2, 5, 1, 1, 3]),
                add(&[3, 3, 3, 1, 0]),
                add(&[1, 1, 1, 6, 1]),
            ],
        ),
        entry(
            "unit-demand-pair",
            "unit demand [1,2]: restricted-MMS-feasible but not good cancelable",
            2,
            vec![
                Valuation::unit_demand(vec![Rat::int(1), Rat::int(2)]).unwrap(),
                Valuation::unit_demand(vec![Rat::int(1), Rat::int(2)]).unwrap(),
            ],
        ),
        entry(
            "unit-demand-flat",
            "unit demand with identical good values",
            3,
            vec![Valuation::unit_demand(vec![Rat::int(3); 3]).unwrap(); 2],
        ),
        entry(
            "budget-binds",
            "budget-additive where the cap binds for one agent only",
            3,
            vec![
                Valuation::budget_additive(
                    vec![Rat::int(4), Rat::int(3), Rat::int(2)],
                    Rat::int(5),
                )
                .unwrap(),
                Valuation::budget_additive(
                    vec![Rat::int(4), Rat::int(3), Rat::int(2)],
                    Rat::int(20),
                )
                .unwrap(),
            ],
        ),
        entry(
            "budget-tight",
            "budget equal to the largest single good",
            3,
            vec![
                Valuation::budget_additive(
                    vec![Rat::int(5), Rat::int(2), Rat::int(1)],
                    Rat::int(5),
                )
                .unwrap();
                2
            ],
        ),
        entry(
            "multiplicative-pair",
            "multiplicative agents; empty bundle worth 1",
            3,
            vec![
                Valuation::multiplicative(vec![Rat::int(2), Rat::int(3), Rat::int(1)]).unwrap(),
                Valuation::multiplicative(vec![Rat::int(3), Rat::int(2), Rat::int(2)]).unwrap(),
            ],
        ),
        entry(
            "multiplicative-neutral-goods",
            "multiplicative with value-1 goods that change nothing",
            4,
            vec![Valuation::multiplicative(vec![
                Rat::int(1),
                Rat::int(1),
                Rat::int(2),
                Rat::int(1),
            ])
            .unwrap(); 2],
        ),
        entry(
            "table-additive-twin",
            "table valuation equal to additive [2,1]; exercises the table path",
            2,
            {
                let mut t = std::collections::BTreeMap::new();
                t.insert(Bundle::EMPTY, Rat::zero());
                t.insert(Bundle::from_mask(0b01), Rat::int(2));
                t.insert(Bundle::from_mask(0b10), Rat::int(1));
                t.insert(Bundle::from_mask(0b11), Rat::int(3));
                vec![Valuation::table(2, t).unwrap(), add(&[2, 1])]
            },
        ),
        entry(
            "many-goods-two-agents",
            "m = 7 stress case at the acceptance-scale limit",
            7,
            vec![
                add(&[7, 6, 5, 4, 3, 2, 1]),
                add(&[1, 2, 3, 4, 5, 6, 7]),
            ],
        ),
        entry(
            "three-agent-skew",
            "one agent concentrates all value on a single good",
            4,
            vec![add(&[0, 0, 0, 7]), add(&[2, 2, 2, 1]), add(&[1, 2, 3, 4])],
        ),
        entry(
            "mixed-kinds",
            "different valuation classes in one instance",
            3,
            vec![
                add(&[3, 2, 1]),
                Valuation::unit_demand(vec![Rat::int(2), Rat::int(3), Rat::int(1)]).unwrap(),
                Valuation::budget_additive(
                    vec![Rat::int(2), Rat::int(2), Rat::int(2)],
                    Rat::int(4),
                )
                .unwrap(),
            ],
        ),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(kind: ValuationKind, seed: u64) -> GeneratorSpec {
        GeneratorSpec {
            n: 2,
            m: 4,
            kind,
            value_lo: 0,
            value_hi: 5,
            budget_lo: 1,
            budget_hi: 8,
            seed,
        }
    }

    #[test]
    fn same_seed_same_instance() {
        for kind in [
            ValuationKind::Additive,
            ValuationKind::BudgetAdditive,
            ValuationKind::UnitDemand,
            ValuationKind::Multiplicative,
            ValuationKind::Table,
        ] {
            let mut s = spec(kind, 99);
            if kind == ValuationKind::Multiplicative {
                s.value_lo = 1;
            }
            assert_eq!(generate(&s).unwrap(), generate(&s).unwrap());
            let mut s2 = s.clone();
            s2.seed = 100;
            assert_ne!(generate(&s).unwrap(), generate(&s2).unwrap());
        }
    }

    #[test]
    fn values_in_range() {
        let inst = generate(&spec(ValuationKind::Additive, 7)).unwrap();
        assert_eq!(inst.num_agents(), 2);
        assert_eq!(inst.num_goods(), 4);
        for i in 0..2 {
            for g in 0..4 {
                let v = inst.value(i, Bundle::singleton(crate::model::GoodId(g)));
                assert!(v >= Rat::zero() && v <= Rat::int(5));
            }
        }
    }

    #[test]
    fn invalid_specs_rejected() {
        let mut s = spec(ValuationKind::Multiplicative, 1);
        assert!(matches!(generate(&s), Err(Error::InvalidSpec(_))));
        s = spec(ValuationKind::Additive, 1);
        s.n = 0;
        assert!(matches!(generate(&s), Err(Error::InvalidSpec(_))));
        s = spec(ValuationKind::BudgetAdditive, 1);
        s.budget_lo = 0;
        assert!(matches!(generate(&s), Err(Error::InvalidSpec(_))));
        s = spec(ValuationKind::Additive, 1);
        s.value_lo = 6;
        assert!(matches!(generate(&s), Err(Error::InvalidSpec(_))));
    }

    #[test]
    fn generated_tables_are_monotone() {
        let mut s = spec(ValuationKind::Table, 3);
        s.m = 3;
        // construction would fail if the table were not monotone or total
        generate(&s).unwrap();
    }

    #[test]
    fn corpus_shape() {
        let corpus = adversarial_corpus();
        assert!(corpus.len() >= 20, "corpus has {} entries", corpus.len());
        let mut names: Vec<&str> = corpus.iter().map(|e| e.name).collect();
        names.sort_unstable();
        names.dedup();
        assert_eq!(names.len(), corpus.len());
        for e in &corpus {
            assert!(!e.note.is_empty());
        }
    }
}
