//! Randomized invariants across modules.

use std::sync::Arc;

use proptest::prelude::*;

use paramlat::constructions::accel::{simulation_count, IndexedFamily};
use paramlat::constructions::diag::DiagonalSet;
use paramlat::constructions::search::{default_registry, universal_search_decide};
use paramlat::machines::{domain, library, restrict, run, Approximation, PartialDecider, Program};
use paramlat::order::{gap_from_profiles, GapValue, MuProfile};
use paramlat::params::sample_family;
use paramlat::slices::{is_core_for, transform_symdiff, DecidedSet, SliceFamily};
use paramlat::universe::{cantor_unpair, code_to_string, BitString, PairCode, StringSet, Universe};

fn u(l: usize) -> Universe {
    Universe::new(l).unwrap()
}

fn string(len: usize, bits: u64) -> BitString {
    BitString::from_bits(len, bits & ((1u64 << len) - 1)).unwrap()
}

fn set_by_index(i: usize) -> DecidedSet {
    match i % 4 {
        0 => DecidedSet::empty(),
        1 => DecidedSet::parity(),
        2 => DecidedSet::majority(),
        _ => DecidedSet::prefix1(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn runs_are_deterministic(i in 1u64..5000, len in 1usize..10, bits: u64, budget in 0u64..2000) {
        let p = Program::from_index(i);
        let x = string(len, bits);
        prop_assert_eq!(run(&p, &x, budget), run(&p, &x, budget));
    }

    #[test]
    fn larger_exponents_decide_more(i in 1u64..2000, c in 1u32..4, extra in 0u32..3) {
        let u = u(5);
        let lo = domain(&restrict(Program::from_index(i), c), u);
        let hi = domain(&restrict(Program::from_index(i), c + extra), u);
        prop_assert!(lo.is_subset(&hi));
    }

    #[test]
    fn gap_is_monotone(a in 0usize..20, b in 0usize..20, n in 0usize..12) {
        let fam = sample_family();
        let (u, h) = (u(6), 12);
        let (p1, p2) = (MuProfile::new(&fam[a], u, h), MuProfile::new(&fam[b], u, h));
        if let (GapValue::Finite(g0), GapValue::Finite(g1)) =
            (gap_from_profiles(&p1, &p2, n), gap_from_profiles(&p1, &p2, n + 1))
        {
            prop_assert!(g0 <= g1);
        }
    }

    #[test]
    fn subsets_of_cores_are_cores(which in 0usize..4, keep: u64) {
        let u = u(5);
        let fam = SliceFamily::harvest(set_by_index(which), u, 2, 128, 8);
        let core = fam.union_of_domains().complement();
        prop_assume!(is_core_for(&core, &fam, 2).is_holds());
        let mut sub = StringSet::empty(u);
        for (i, x) in core.iter().enumerate() {
            if keep >> (i % 64) & 1 == 1 {
                sub.insert(&x);
            }
        }
        prop_assert!(is_core_for(&sub, &fam, 2).is_holds());
    }

    #[test]
    fn symmetric_difference_is_an_involution(which in 0usize..4, member in 0usize..8, first_bit: bool) {
        let u = u(6);
        let fam = SliceFamily::harvest(set_by_index(which), u, 2, 128, 8);
        prop_assume!(member < fam.len());
        let a = fam.members()[member].clone();
        let x = Approximation::new(if first_bit { library::first_bit() } else { library::parity() }, 2, 16);
        let once = transform_symdiff(a.clone(), x.clone(), u).unwrap();
        let twice = transform_symdiff(Arc::new(once), x, u).unwrap();
        for s in u.iter() {
            prop_assert_eq!(twice.decide(&s).decision(), a.decide(&s).decision());
        }
    }

    #[test]
    fn diagonal_values_do_not_depend_on_history(z in 0u64..2046, warm in 0u64..2046) {
        let fresh = DiagonalSet::default();
        let warmed = DiagonalSet::default();
        warmed.decide_code(PairCode(warm)).unwrap();
        prop_assert_eq!(fresh.decide_code(PairCode(z)).unwrap(), warmed.decide_code(PairCode(z)).unwrap());
    }

    #[test]
    fn first_stage_removes_exactly_the_disagreeing(z in 1u64..2046) {
        let d = DiagonalSet::default();
        let t = d.trace(PairCode(z)).unwrap();
        let (c, _) = cantor_unpair(PairCode(z));
        prop_assume!(c > 0);
        let n = code_to_string(PairCode(z)).unwrap().len() as u64;
        // Points checked before the candidate set can run empty.
        let tested: Vec<u64> = (1..=c)
            .flat_map(|dd| (1..=n).map(move |y| (dd + y) * (dd + y + 1) / 2 + y))
            .filter(|&w| w < z)
            .collect();
        for i in 1..=n {
            let disagrees = tested.iter().any(|&w| {
                let s = code_to_string(PairCode(w)).unwrap();
                let budget = (s.len() as u64).saturating_pow(2 * c as u32);
                run(&Program::from_index(i), &s, budget)
                    .decision()
                    .is_some_and(|b| b != d.decide_code(PairCode(w)).unwrap())
            });
            let removed = t.removed.iter().any(|&(j, _)| j == i);
            prop_assert_eq!(removed, disagrees, "index {} at code {}", i, z);
        }
    }

    #[test]
    fn search_decides_past_each_entry(which in 0usize..4, entry in 0usize..8, bits: u64, len in 1usize..6, extra in 0usize..4) {
        let u = u(5);
        let set = set_by_index(which);
        let reg = default_registry(&set, u, 8);
        prop_assume!(entry < reg.entries.len());
        let e = &reg.entries[entry];
        let x = string(len, bits);
        prop_assume!(e.approximation().decide(&x).decided());
        let k = e.program.code_len() + e.len() + extra;
        let r = universal_search_decide(&x, k, &reg).unwrap();
        prop_assert_eq!(r.decision(), Some(set.decide(&x)));
    }

    #[test]
    fn accelerator_count_grows_with_length(k in 1u64..10, len in 1usize..8, a: u64, b: u64) {
        let fam = IndexedFamily::doubling_parity();
        let short = simulation_count(&fam, &string(len, a), k);
        let long = simulation_count(&fam, &string(len + 1, b), k);
        prop_assert!(short <= long);
    }
}
