//! Instance complexity by brute force: the length of the shortest program
//! that is an approximation for the set on the universe at a polynomial
//! budget and decides the given string.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::machines::{
    domain, is_approximation_for, restrict, Approximation, Outcome, PartialDecider, Program, RunOutcome,
};
use crate::order::mu;
use crate::params::{from_function, Parameterization};
use crate::slices::DecidedSet;
use crate::spaces::{NatSpace, Param};
use crate::universe::{BitString, StringSet, Universe};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum IcValue {
    Value(usize),
    /// No program of length at most the table's limit qualifies.
    AboveM,
}

impl IcValue {
    pub fn value(self) -> Option<usize> {
        match self {
            IcValue::Value(v) => Some(v),
            IcValue::AboveM => None,
        }
    }
}

impl fmt::Display for IcValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IcValue::Value(v) => write!(f, "{v}"),
            IcValue::AboveM => f.write_str(">m"),
        }
    }
}

/// Every qualifying program of length at most `m`, with its domain.
#[derive(Debug, Clone)]
pub struct IcTable {
    pub set: DecidedSet,
    pub exponent: u32,
    pub max_len: usize,
    pub universe: Universe,
    /// In enumeration order, so shorter programs come first.
    pub qualifying: Vec<(Approximation, StringSet)>,
    values: Vec<IcValue>,
}

impl IcTable {
    pub fn new(set: &DecidedSet, c: u32, m: usize, u: Universe) -> Self {
        let programs: Vec<Program> = Program::all_up_to_len(m).collect();
        let qualifying: Vec<(Approximation, StringSet)> = programs
            .into_par_iter()
            .filter_map(|p| {
                let a = restrict(p, c);
                is_approximation_for(&a, set, u).is_holds().then(|| {
                    let d = domain(&a, u);
                    (a, d)
                })
            })
            .collect();
        let values = u
            .iter()
            .map(|x| {
                qualifying
                    .iter()
                    .find(|(_, d)| d.contains(&x))
                    .map_or(IcValue::AboveM, |(a, _)| IcValue::Value(a.program.code_len()))
            })
            .collect();
        IcTable {
            set: set.clone(),
            exponent: c,
            max_len: m,
            universe: u,
            qualifying,
            values,
        }
    }

    pub fn get(&self, x: &BitString) -> IcValue {
        self.universe.index_of(x).map_or(IcValue::AboveM, |i| self.values[i])
    }

    pub fn values(&self) -> &[IcValue] {
        &self.values
    }

    /// Runs every qualifying program of length at most `k` and returns the
    /// first answer.
    pub fn dispatcher(self: &Arc<Self>, k: usize) -> IcDispatcher {
        IcDispatcher { table: self.clone(), k }
    }
}

pub fn instance_complexity(x: &BitString, set: &DecidedSet, c: u32, m: usize, u: Universe) -> IcValue {
    IcTable::new(set, c, m, u).get(x)
}

/// `(x, k)` iff the instance complexity of `x` is at most `k`.
pub fn ic_parameterization(table: Arc<IcTable>) -> Parameterization {
    let name = format!("ic({},{},{})", table.set.name(), table.exponent, table.max_len);
    from_function(name, Arc::new(NatSpace), move |x| {
        table.get(x).value().map(|v| Param::Nat(v as u64))
    })
}

/// The combined approximation for one slice of the ic parameterization.
#[derive(Clone)]
pub struct IcDispatcher {
    table: Arc<IcTable>,
    k: usize,
}

impl PartialDecider for IcDispatcher {
    fn name(&self) -> String {
        format!("dispatch(ic<={})", self.k)
    }

    fn decide(&self, x: &BitString) -> RunOutcome {
        let (mut steps, mut work) = (0u64, 0u64);
        for (a, _) in self
            .table
            .qualifying
            .iter()
            .take_while(|(a, _)| a.program.code_len() <= self.k)
        {
            let r = a.decide(x);
            steps = steps.saturating_add(r.steps_used);
            work += r.work;
            if let Some(bit) = r.decision() {
                return RunOutcome::from_decision(bit, steps, work);
            }
        }
        RunOutcome::new(Outcome::Other, steps, work)
    }
}

/// `max(ic(x) - mu_e(x))` over strings `e` resolves within `h`. Where the
/// table has no program, the shortest of `witnesses` that is an
/// approximation for the set and decides `x` bounds `ic(x)` from above.
/// `None` if some such string has neither.
pub fn converse_constant(table: &IcTable, e: &Parameterization, h: usize, witnesses: &[Approximation]) -> Option<i64> {
    let u = table.universe;
    let sound: Vec<(&Approximation, StringSet)> = witnesses
        .iter()
        .filter(|a| is_approximation_for(*a, &table.set, u).is_holds())
        .map(|a| (a, domain(a, u)))
        .collect();
    let mut worst = i64::MIN;
    for x in u.iter() {
        let Some(m) = mu(e, &x, h).value() else {
            continue;
        };
        let ic = match table.get(&x).value() {
            Some(v) => v,
            None => sound
                .iter()
                .filter(|(_, d)| d.contains(&x))
                .map(|(a, _)| a.program.code_len())
                .min()?,
        };
        worst = worst.max(ic as i64 - m as i64);
    }
    Some(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machines::library;
    use crate::params::{by_length, full};

    #[test]
    fn empty_set_needs_the_reject_program() {
        let u = Universe::new(4).unwrap();
        let t = IcTable::new(&DecidedSet::empty(), 1, 6, u);
        assert_eq!(library::reject_all().code_len(), 2);
        assert!(t.values().iter().all(|&v| v == IcValue::Value(2)));
    }

    #[test]
    fn more_budget_never_hurts() {
        let u = Universe::new(4).unwrap();
        for set in [DecidedSet::parity(), DecidedSet::prefix1()] {
            let lo = IcTable::new(&set, 1, 8, u);
            let hi = IcTable::new(&set, 2, 8, u);
            for x in u.iter() {
                assert!(hi.get(&x) <= lo.get(&x), "{x}");
            }
        }
    }

    #[test]
    fn slices_are_nested_and_dispatched() {
        let u = Universe::new(4).unwrap();
        let t = Arc::new(IcTable::new(&DecidedSet::prefix1(), 1, 8, u));
        let e = ic_parameterization(t.clone());
        for k in 0..10u64 {
            let here = e.slice(&Param::Nat(k), u);
            assert!(here.is_subset(&e.slice(&Param::Nat(k + 1), u)));
            let d = t.dispatcher(k as usize);
            assert!(is_approximation_for(&d, &t.set, u).is_holds());
            assert!(here.is_subset(&domain(&d, u)));
        }
    }

    #[test]
    fn converse_constant_for_trivial_sets() {
        let u = Universe::new(4).unwrap();
        let t = IcTable::new(&DecidedSet::empty(), 1, 4, u);
        // full has mu 1 everywhere; ic is 2.
        assert_eq!(converse_constant(&t, &full(Arc::new(NatSpace)), 8, &[]), Some(1));
        assert!(converse_constant(&t, &by_length(), 8, &[]).is_some());
    }

    #[test]
    fn witnesses_bound_what_the_table_misses() {
        let u = Universe::new(4).unwrap();
        let t = IcTable::new(&DecidedSet::parity(), 1, 4, u);
        let e = full(Arc::new(NatSpace));
        assert_eq!(converse_constant(&t, &e, 8, &[]), None);
        let wrong = restrict(library::first_bit(), 1);
        assert_eq!(converse_constant(&t, &e, 8, std::slice::from_ref(&wrong)), None);
        let p = restrict(library::parity(), 1);
        let len = p.program.code_len() as i64;
        assert_eq!(converse_constant(&t, &e, 8, &[wrong, p]), Some(len - 1));
    }
}
