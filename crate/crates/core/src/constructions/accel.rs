//! The accelerator: given approximations `psi_1, psi_2, ...` for a set, each
//! clocked at `scale * n^c`, parameter `k` buys `k * n^(c+2)` total steps for
//! simulating them in index order until one answers.
//!
//! Every `psi_j` is self-clocked, so running them one after another completes
//! exactly the machines a fair interleaving would complete within the same
//! total. A run costs its steps plus one for setting it up.

use std::sync::Arc;

use crate::machines::{library, run, Approximation, Outcome};
use crate::params::{doubling_index, from_function, Parameterization};
use crate::spaces::{NatSpace, Param};
use crate::universe::BitString;

/// Exponent of the witness family's per-call budget.
pub const WITNESS_EXPONENT: u32 = 2;
/// Scale of the witness family's per-call budget; large enough that every
/// member decides its whole slice from length 1 on.
pub const WITNESS_SCALE: u64 = 64;

type Member = Arc<dyn Fn(u64) -> Option<(Option<u64>, Approximation)> + Send + Sync>;

/// `j -> (omega_j, psi_j)` for `j >= 1`; `None` ends the family. `omega_j` is
/// the witness parameter whose slice `psi_j` covers, when it is representable.
#[derive(Clone)]
pub struct IndexedFamily {
    name: String,
    exponent: u32,
    scale: u64,
    member: Member,
}

impl IndexedFamily {
    pub fn new(
        name: impl Into<String>,
        exponent: u32,
        scale: u64,
        member: impl Fn(u64) -> Option<(Option<u64>, Approximation)> + Send + Sync + 'static,
    ) -> Self {
        IndexedFamily {
            name: name.into(),
            exponent,
            scale,
            member: Arc::new(member),
        }
    }

    /// Approximations for parity matching the doubling witness: `psi_j`
    /// decides strings of length at most `j`, and its slice index is
    /// `doubling_index(j)`. Past the longest bounded program the members
    /// decide parity outright.
    pub fn doubling_parity() -> Self {
        IndexedFamily::new("doubling-parity", WITNESS_EXPONENT, WITNESS_SCALE, |j| {
            let len = usize::try_from(j).ok()?;
            let p = if len <= library::MAX_BOUNDED_PARITY {
                library::bounded_parity(len)
            } else {
                library::parity()
            };
            Some((
                doubling_index(len),
                Approximation::new(p, WITNESS_EXPONENT, WITNESS_SCALE),
            ))
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn exponent(&self) -> u32 {
        self.exponent
    }

    pub fn scale(&self) -> u64 {
        self.scale
    }

    pub fn member(&self, j: u64) -> Option<(Option<u64>, Approximation)> {
        if j == 0 {
            return None;
        }
        (self.member)(j)
    }
}

/// What a bounded simulation did on one input.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AccelRun {
    pub answer: Option<bool>,
    /// Members run to completion.
    pub completed: u64,
    pub spent: u64,
}

/// Simulates members in order within `total` steps, stopping at the first
/// answer when `stop_at_answer` is set and after `limit` members in any case.
pub fn simulate(family: &IndexedFamily, x: &BitString, total: u64, stop_at_answer: bool, limit: u64) -> AccelRun {
    let mut out = AccelRun {
        answer: None,
        completed: 0,
        spent: 0,
    };
    for j in 1..=limit {
        let Some((_, psi)) = family.member(j) else {
            break;
        };
        let left = total - out.spent;
        if left == 0 {
            break;
        }
        // One step of setup, then its own clock or whatever is left.
        let clock = psi.budget(x.len());
        let r = run(&psi.program, x, clock.min(left - 1));
        if clock > left - 1 && r.tag == Outcome::OutOfBudget {
            out.spent = total;
            break;
        }
        out.spent += r.steps_used + 1;
        out.completed += 1;
        if let Some(bit) = r.decision() {
            out.answer.get_or_insert(bit);
            if stop_at_answer {
                break;
            }
        }
    }
    out
}

/// `k * n^(c+2)`, saturating.
pub fn total_budget(k: u64, n: usize, c: u32) -> u64 {
    (n as u64)
        .checked_pow(c + 2)
        .and_then(|p| p.checked_mul(k))
        .unwrap_or(u64::MAX)
}

/// Members tried before the simulation gives up on an input.
pub const MEMBER_LIMIT: u64 = 1 << 16;

/// Cost of the simulation up to and including the first answer.
pub fn cost_to_answer(family: &IndexedFamily, x: &BitString) -> Option<u64> {
    let r = simulate(family, x, u64::MAX, true, MEMBER_LIMIT);
    r.answer.map(|_| r.spent)
}

/// The accelerated parameterization over the naturals: `(x, k)` iff the
/// simulation within `k * |x|^(c+2)` steps obtains an answer.
pub fn accelerate(family: &IndexedFamily) -> Parameterization {
    let c = family.exponent();
    let f = family.clone();
    from_function(format!("accel({})", family.name()), Arc::new(NatSpace), move |x| {
        let s = cost_to_answer(&f, x)?;
        let per = total_budget(1, x.len(), c);
        if per == 0 {
            return None;
        }
        Some(Param::Nat(s.div_ceil(per)))
    })
}

/// Members completed on `x` within `k * |x|^(c+2)`, ignoring answers.
pub fn simulation_count(family: &IndexedFamily, x: &BitString, k: u64) -> u64 {
    let total = total_budget(k, x.len(), family.exponent());
    simulate(family, x, total, false, MEMBER_LIMIT).completed
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machines::PartialDecider;
    use crate::universe::Universe;

    fn s(x: &str) -> BitString {
        x.parse().unwrap()
    }

    #[test]
    fn zero_budget_is_empty() {
        let e = accelerate(&IndexedFamily::doubling_parity());
        let u = Universe::new(5).unwrap();
        assert!(e.slice(&Param::Nat(0), u).is_empty());
    }

    #[test]
    fn members_cover_their_slices() {
        let fam = IndexedFamily::doubling_parity();
        let u = Universe::new(8).unwrap();
        for j in 1..=30 {
            let (_, psi) = fam.member(j).unwrap();
            for x in u.iter().filter(|x| x.len() as u64 <= j) {
                assert_eq!(
                    psi.decide(&x).decision(),
                    Some(x.count_ones() % 2 == 1),
                    "psi_{j} on {x}"
                );
            }
        }
    }

    #[test]
    fn literal_simulation_matches_threshold() {
        let fam = IndexedFamily::doubling_parity();
        let e = accelerate(&fam);
        let u = Universe::new(5).unwrap();
        for x in u.iter() {
            for k in 0..40 {
                let t = total_budget(k, x.len(), fam.exponent());
                let lit = simulate(&fam, &x, t, true, MEMBER_LIMIT).answer.is_some();
                assert_eq!(lit, e.contains(&x, &Param::Nat(k)), "{x} at {k}");
            }
        }
    }

    #[test]
    fn answers_are_correct() {
        let fam = IndexedFamily::doubling_parity();
        for x in ["1", "0110", "1011011"] {
            let r = simulate(&fam, &s(x), u64::MAX, true, MEMBER_LIMIT);
            assert_eq!(r.answer, Some(s(x).count_ones() % 2 == 1));
        }
    }

    #[test]
    fn count_meets_lower_bound() {
        let fam = IndexedFamily::doubling_parity();
        let u = Universe::new(8).unwrap();
        for k in [1u64, 2, 5] {
            for x in u.iter() {
                let n = x.len();
                let per_call = fam.scale() * (n as u64).pow(fam.exponent()) + 1;
                let bound = total_budget(k, n, fam.exponent()) / per_call;
                assert!(simulation_count(&fam, &x, k) >= bound, "{x} at {k}");
            }
        }
    }

    #[test]
    fn escapes_the_doubling_witness() {
        use crate::order::{gap_from_profiles, GapValue, MuProfile};
        use crate::params::doubling_witness;
        let u = Universe::new(8).unwrap();
        let fam = IndexedFamily::doubling_parity();
        let w = MuProfile::new(&doubling_witness(u), u, 12);
        let a = MuProfile::new(&accelerate(&fam), u, 12);
        for n in 1..=12 {
            assert!(
                matches!(gap_from_profiles(&w, &a, n), GapValue::InfinityWitness(_)),
                "n = {n}"
            );
        }
        for k in 1..=4 {
            let counts: Vec<u64> = (1..=8)
                .map(|n| simulation_count(&fam, &BitString::from_bits(n, 0).unwrap(), k))
                .collect();
            assert!(counts.windows(2).all(|p| p[0] <= p[1]), "{counts:?}");
        }
    }
}
