//! Parameterizations: relations between strings and parameter values whose
//! fibers are up-sets.
//!
//! A parameterization is given by a pure `contains(x, k)` predicate over a
//! space. Constructors that know their fiber structure also supply a direct
//! way to compute `mu` at a horizon; the order module cross-checks it against
//! enumeration.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::machines::{run, Program};
use crate::spaces::{pair_encode_len, NatSpace, Param, ParamSpace, ProductSpace};
use crate::universe::{binary_len, BitString, StringSet, Universe};
use crate::verdict::{HorizonVerdict, Witness};

pub type ContainsFn = Arc<dyn Fn(&BitString, &Param) -> bool + Send + Sync>;
/// `(x, h)` to the least `|k|` over fiber elements within horizon `h`.
pub type MuHint = Arc<dyn Fn(&BitString, usize) -> Option<usize> + Send + Sync>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParamError {
    #[error("program does not decide {0} within the step cap")]
    NotTotalOnUniverse(BitString),
    #[error("slice {requested} requested but only {given} slice sets were given")]
    SliceUnspecified { requested: u64, given: u64 },
    #[error("slice set {index} is over a different universe")]
    ForeignSlice { index: usize },
}

#[derive(Clone)]
pub struct Parameterization {
    name: String,
    space: Arc<dyn ParamSpace>,
    contains: ContainsFn,
    mu_hint: Option<MuHint>,
}

impl fmt::Debug for Parameterization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Parameterization({} over {})", self.name, self.space.name())
    }
}

/// `eta_k` restricted to a universe.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Slice {
    pub k: Param,
    pub members: StringSet,
}

impl Parameterization {
    /// A parameterization with no known shortcut for `mu`.
    pub fn custom(
        name: impl Into<String>,
        space: Arc<dyn ParamSpace>,
        contains: impl Fn(&BitString, &Param) -> bool + Send + Sync + 'static,
    ) -> Self {
        Parameterization {
            name: name.into(),
            space,
            contains: Arc::new(contains),
            mu_hint: None,
        }
    }

    pub fn with_mu_hint(mut self, hint: MuHint) -> Self {
        self.mu_hint = Some(hint);
        self
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn space(&self) -> &Arc<dyn ParamSpace> {
        &self.space
    }

    pub fn contains(&self, x: &BitString, k: &Param) -> bool {
        (self.contains)(x, k)
    }

    pub fn has_mu_hint(&self) -> bool {
        self.mu_hint.is_some()
    }

    /// The direct computation of `mu`, when the constructor supplied one.
    pub fn mu_hint(&self, x: &BitString, h: usize) -> Option<Option<usize>> {
        self.mu_hint.as_ref().map(|f| f(x, h))
    }

    /// `mu` by walking encoding lengths upward and testing the length-maximal
    /// elements; exact because fibers are up-sets.
    pub fn mu_by_enumeration(&self, x: &BitString, h: usize) -> Option<usize> {
        let s = &self.space;
        (s.min_len()..=s.max_len_at(h)).find(|&len| s.maximal_of_len(len, h).iter().any(|k| self.contains(x, k)))
    }

    /// `mu` by testing every element of the horizon. Only for small horizons.
    pub fn mu_exhaustive(&self, x: &BitString, h: usize) -> Option<usize> {
        self.space
            .horizon(h)
            .filter(|k| self.contains(x, k))
            .map(|k| self.space.encode_len(&k))
            .min()
    }

    /// Whether some parameter within horizon `h` converges `x`.
    pub fn resolved(&self, x: &BitString, h: usize) -> bool {
        match self.space.horizon_top(h) {
            Some(top) => self.contains(x, &top),
            None => self.mu_by_enumeration(x, h).is_some(),
        }
    }

    pub fn slice(&self, k: &Param, u: Universe) -> StringSet {
        StringSet::from_predicate(u, |x| self.contains(x, k))
    }

    pub fn slice_at(&self, k: &Param, u: Universe) -> Slice {
        Slice {
            k: k.clone(),
            members: self.slice(k, u),
        }
    }

    /// Strings of `u` converged by some parameter within horizon `h`.
    pub fn resolved_set(&self, u: Universe, h: usize) -> StringSet {
        StringSet::from_predicate(u, |x| self.resolved(x, h))
    }
}

/// Every string converges at every parameter.
pub fn full(space: Arc<dyn ParamSpace>) -> Parameterization {
    let min = space.min_len();
    Parameterization {
        name: format!("full({})", space.name()),
        space,
        contains: Arc::new(|_, _| true),
        mu_hint: Some(Arc::new(move |_, h| (h >= 1).then_some(min))),
    }
}

/// `(x, n)` with `|x| <= n`.
pub fn by_length() -> Parameterization {
    from_function("bylength", Arc::new(NatSpace), |x| Some(Param::Nat(x.len() as u64)))
}

/// `(x, k)` with `f(x)` before `k`. `f` returning `None` means the fiber lies
/// beyond every representable parameter.
pub fn from_function(
    name: impl Into<String>,
    space: Arc<dyn ParamSpace>,
    f: impl Fn(&BitString) -> Option<Param> + Send + Sync + 'static,
) -> Parameterization {
    let f = Arc::new(f);
    let (f1, s1) = (f.clone(), space.clone());
    let (f2, s2) = (f, space.clone());
    Parameterization {
        name: name.into(),
        space,
        contains: Arc::new(move |x, k| f1(x).is_some_and(|lo| s1.before(&lo, k))),
        mu_hint: Some(Arc::new(move |x, h| s2.min_len_above(&f2(x)?, h))),
    }
}

/// Converges wherever either side converges at its component.
pub fn meet(e1: &Parameterization, e2: &Parameterization) -> Parameterization {
    combine(e1, e2, "meet", false)
}

/// Converges where both sides converge at their components.
pub fn join(e1: &Parameterization, e2: &Parameterization) -> Parameterization {
    combine(e1, e2, "join", true)
}

fn combine(e1: &Parameterization, e2: &Parameterization, op: &str, both: bool) -> Parameterization {
    let space = Arc::new(ProductSpace::new(e1.space.clone(), e2.space.clone()));
    let (a, b) = (e1.clone(), e2.clone());
    let contains: ContainsFn = Arc::new(move |x, k| {
        let Some((k1, k2)) = k.as_pair() else {
            return false;
        };
        if both {
            a.contains(x, k1) && b.contains(x, k2)
        } else {
            a.contains(x, k1) || b.contains(x, k2)
        }
    });
    let mu_hint: Option<MuHint> = match (&e1.mu_hint, &e2.mu_hint) {
        (Some(h1), Some(h2)) => {
            let (h1, h2) = (h1.clone(), h2.clone());
            let (m1, m2) = (e1.space.min_len(), e2.space.min_len());
            Some(if both {
                Arc::new(move |x: &BitString, h: usize| Some(pair_encode_len(h1(x, h)?, h2(x, h)?)))
            } else {
                Arc::new(move |x: &BitString, h: usize| {
                    let left = h1(x, h).map(|l| pair_encode_len(l, m2));
                    let right = h2(x, h).map(|r| pair_encode_len(m1, r));
                    match (left, right) {
                        (Some(l), Some(r)) => Some(l.min(r)),
                        (l, r) => l.or(r),
                    }
                })
            })
        }
        _ => None,
    };
    Parameterization {
        name: format!("{op}({},{})", e1.name, e2.name),
        space,
        contains,
        mu_hint,
    }
}

/// A prefix `S_1, ..., S_m` of slice sets, read as `eta_k = S_1 u ... u S_k`.
/// Stored sparsely: indices without an entry hold the empty set.
#[derive(Debug, Clone)]
pub struct SliceSets {
    universe: Universe,
    declared: u64,
    entries: Vec<(u64, StringSet)>,
    first: HashMap<BitString, u64>,
}

impl SliceSets {
    pub fn new(u: Universe, sets: Vec<StringSet>) -> Result<Self, ParamError> {
        let declared = sets.len() as u64;
        let entries = sets.into_iter().enumerate().map(|(i, s)| (i as u64 + 1, s)).collect();
        SliceSets::sparse(u, declared, entries)
    }

    /// `S_i` for the listed `(i, S_i)`, empty for other `i <= declared`.
    pub fn sparse(u: Universe, declared: u64, mut entries: Vec<(u64, StringSet)>) -> Result<Self, ParamError> {
        entries.sort_by_key(|(i, _)| *i);
        let mut first = HashMap::new();
        for (i, s) in &entries {
            if s.universe() != u || *i == 0 || *i > declared {
                return Err(ParamError::ForeignSlice { index: *i as usize });
            }
            for x in s.iter() {
                first.entry(x).or_insert(*i);
            }
        }
        Ok(SliceSets {
            universe: u,
            declared,
            entries,
            first,
        })
    }

    /// Number of specified slice sets.
    pub fn len(&self) -> u64 {
        self.declared
    }

    pub fn is_empty(&self) -> bool {
        self.declared == 0
    }

    pub fn universe(&self) -> Universe {
        self.universe
    }

    /// Least `i` with `x` in `S_i`.
    pub fn first_index(&self, x: &BitString) -> Option<u64> {
        self.first.get(x).copied()
    }

    /// `eta_k`, refusing indices past the given prefix.
    pub fn slice_checked(&self, k: u64) -> Result<StringSet, ParamError> {
        if k > self.declared {
            return Err(ParamError::SliceUnspecified {
                requested: k,
                given: self.declared,
            });
        }
        let mut out = StringSet::empty(self.universe);
        for (_, s) in self.entries.iter().take_while(|(i, _)| *i <= k) {
            out = out.union(s);
        }
        Ok(out)
    }
}

/// The slice-enumeration construction over the naturals. Past the given
/// prefix every further `S_i` is taken to be empty.
pub fn from_slices(name: impl Into<String>, sets: SliceSets) -> Parameterization {
    let sets = Arc::new(sets);
    from_function(name, Arc::new(NatSpace), move |x| sets.first_index(x).map(Param::Nat))
}

/// Slice index at which strings of length `len` first appear in the doubling
/// witness: `2^(2^len - 1)`, when it fits in 64 bits.
pub fn doubling_index(len: usize) -> Option<u64> {
    let e = (1u64 << len.min(63)) - 1;
    (e < 64).then(|| 1u64 << e)
}

/// Slice sets whose `k`-th slice is every string of length `<= j`, where `j`
/// is the largest length with `doubling_index(j) <= k`. Between the indices
/// where a new length appears the slices stay fixed, so the gaps double.
pub fn doubling_witness(u: Universe) -> Parameterization {
    let entries = (1..=u.max_len())
        .filter_map(|len| {
            let i = doubling_index(len)?;
            let set = StringSet::from_predicate(u, |x| x.len() == len);
            Some((i, set))
        })
        .collect();
    let sets = SliceSets::sparse(u, u64::MAX, entries).expect("indices are distinct and positive");
    from_slices("doubling", sets)
}

/// Parameterizes by the exact step count of a program that decides every
/// string of `u` within `cap` steps.
pub fn from_runtime(program: &Program, u: Universe, cap: u64) -> Result<Parameterization, ParamError> {
    let mut steps = HashMap::new();
    for x in u.iter() {
        let r = run(program, &x, cap);
        if !r.decided() {
            return Err(ParamError::NotTotalOnUniverse(x));
        }
        steps.insert(x, r.steps_used);
    }
    let steps = Arc::new(steps);
    let p = program.clone();
    Ok(from_function(
        format!("runtime({})", program.to_hex()),
        Arc::new(NatSpace),
        move |x| {
            let s = match steps.get(x) {
                Some(&s) => s,
                None => {
                    let r = run(&p, x, cap);
                    r.decided().then_some(r.steps_used)?
                }
            };
            Some(Param::Nat(s))
        },
    ))
}

/// Names accepted by [`builtin_function`].
pub const BUILTIN_FUNCTIONS: &[&str] = &[
    "len", "ones", "zeros", "zero", "half", "first", "log", "square", "exp", "runs", "lead", "value", "quartic",
    "exp2x", "doubling",
];

/// Parameterizes over the naturals by a named function of the input.
pub fn builtin_function(name: &str) -> Option<Parameterization> {
    let f: fn(&BitString) -> Option<u64> = match name {
        "len" => |x| Some(x.len() as u64),
        "ones" => |x| Some(x.count_ones() as u64),
        "zeros" => |x| Some((x.len() - x.count_ones()) as u64),
        "zero" => |_| Some(0),
        "half" => |x| Some(x.len() as u64 / 2),
        "first" => |x| Some(x.bit(0) as u64),
        "log" => |x| Some(binary_len(x.len() as u64) as u64),
        "square" => |x| Some((x.len() * x.len()) as u64),
        "exp" => |x| Some(1u64 << x.len()),
        "runs" => |x| Some(1 + (1..x.len()).filter(|&i| x.bit(i) != x.bit(i - 1)).count() as u64),
        "lead" => |x| Some(x.bits().take_while(|b| !b).count() as u64),
        "value" => |x| Some(x.value()),
        "quartic" => |x| (x.len() as u64).checked_pow(4),
        "exp2x" => |x| 1u64.checked_shl(2 * x.len() as u32),
        "doubling" => |x| doubling_index(x.len()),
        _ => return None,
    };
    Some(from_function(format!("fn({name})"), Arc::new(NatSpace), move |x| {
        f(x).map(Param::Nat)
    }))
}

/// Twenty parameterizations used as the default sample: the two bounds of
/// the lattice, the built-in functions whose values stay small on short
/// strings, and meets and joins of them.
pub fn sample_family() -> Vec<Parameterization> {
    let f = |n: &str| builtin_function(n).expect("built-in name");
    let mut out = vec![full(Arc::new(NatSpace)), by_length()];
    out.extend(
        [
            "ones", "zeros", "zero", "half", "first", "log", "square", "exp", "runs", "lead", "value",
        ]
        .into_iter()
        .map(f),
    );
    out.push(meet(&f("ones"), &f("zeros")));
    out.push(join(&f("half"), &f("log")));
    out.push(meet(&by_length(), &f("first")));
    out.push(join(&f("runs"), &f("lead")));
    out.push(meet(&f("exp"), &f("value")));
    out.push(join(&f("first"), &f("zeros")));
    out.push(meet(&f("square"), &f("runs")));
    out
}

/// Up-set law on sampled `(x, k, k')`, plus agreement of the `mu` shortcut
/// with enumeration at horizon `h`.
pub fn check_param_laws(e: &Parameterization, u: Universe, h: usize, sample: usize) -> HorizonVerdict {
    let s = e.space();
    let ks = s.sample(sample);
    for x in u.iter() {
        for k in &ks {
            if !e.contains(&x, k) {
                continue;
            }
            for k2 in ks.iter().filter(|k2| s.before(k, k2)) {
                if !e.contains(&x, k2) {
                    return HorizonVerdict::fails(Witness::at(
                        x,
                        format!("fiber of {} contains {k} but not {k2}", e.name()),
                    ));
                }
            }
        }
        if let Some(hint) = e.mu_hint(&x, h) {
            let enumerated = e.mu_by_enumeration(&x, h);
            if hint != enumerated {
                return HorizonVerdict::fails(Witness::at(
                    x,
                    format!("mu shortcut {hint:?} but enumeration gives {enumerated:?}"),
                ));
            }
        }
    }
    HorizonVerdict::holds()
}
