//! Slices, cores and the transformations between slices of related sets.
//!
//! A slice for a set `A` is the domain of an approximation: a partial decider
//! whose every 0/1 answer agrees with `A`. A core is a set that meets every
//! slice of a family in fewer than `threshold` points.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::machines::{domain, is_approximation_for, library, Approximation, PartialDecider, Program, RunOutcome};
use crate::params::{from_slices, Parameterization, SliceSets};
use crate::universe::{BitString, StringSet, Universe, MAX_LEN};
use crate::verdict::{HorizonVerdict, Witness};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SliceError {
    #[error("{member} is not an approximation: {detail}")]
    NotAnApproximation { member: String, detail: String },
    #[error("{0} is not decided within budget")]
    NotTotalOnUniverse(BitString),
    #[error("deciders disagree on whether {0} is decided")]
    DomainMismatch(BitString),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("unknown set {0:?}")]
    UnknownSet(String),
    #[error("reduction does not preserve membership at {0}")]
    NotAReduction(BitString),
}

/// A set given by a trusted total decision procedure.
#[derive(Clone)]
pub struct DecidedSet {
    name: String,
    decide: Arc<dyn Fn(&BitString) -> bool + Send + Sync>,
}

impl fmt::Debug for DecidedSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DecidedSet({})", self.name)
    }
}

impl DecidedSet {
    pub fn new(name: impl Into<String>, decide: impl Fn(&BitString) -> bool + Send + Sync + 'static) -> Self {
        DecidedSet {
            name: name.into(),
            decide: Arc::new(decide),
        }
    }

    /// Membership in an explicit set; strings outside its universe are out.
    pub fn from_set(name: impl Into<String>, set: StringSet) -> Self {
        DecidedSet::new(name, move |x| set.contains(x))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn decide(&self, x: &BitString) -> bool {
        (self.decide)(x)
    }

    pub fn members(&self, u: Universe) -> StringSet {
        StringSet::from_predicate(u, |x| self.decide(x))
    }

    pub fn empty() -> Self {
        DecidedSet::new("empty", |_| false)
    }

    pub fn all() -> Self {
        DecidedSet::new("all", |_| true)
    }

    /// Odd number of ones.
    pub fn parity() -> Self {
        DecidedSet::new("parity", |x| x.count_ones() % 2 == 1)
    }

    /// More ones than zeros.
    pub fn majority() -> Self {
        DecidedSet::new("majority", |x| 2 * x.count_ones() > x.len())
    }

    /// First bit is 1.
    pub fn prefix1() -> Self {
        DecidedSet::new("prefix1", |x| x.bit(0))
    }

    /// Symmetric difference with another set.
    pub fn symdiff(&self, other: &DecidedSet) -> Self {
        let (a, b) = (self.clone(), other.clone());
        DecidedSet::new(format!("{}^{}", self.name, other.name), move |x| {
            a.decide(x) != b.decide(x)
        })
    }
}

/// Resolves `empty`, `all`, `parity`, `majority`, `prefix1` and
/// `cylinder(<name>)`. The diagonal set lives with the constructions.
pub fn builtin_set(name: &str) -> Result<DecidedSet, SliceError> {
    let name = name.trim();
    match name {
        "empty" => Ok(DecidedSet::empty()),
        "all" => Ok(DecidedSet::all()),
        "parity" => Ok(DecidedSet::parity()),
        "majority" => Ok(DecidedSet::majority()),
        "prefix1" => Ok(DecidedSet::prefix1()),
        _ => match name.strip_prefix("cylinder(").and_then(|r| r.strip_suffix(')')) {
            Some(inner) => Ok(lli_cylinder(&builtin_set(inner)?).0),
            None => Err(SliceError::UnknownSet(name.to_string())),
        },
    }
}

/// Approximations for one set, each checked on a universe; domains cached.
#[derive(Clone)]
pub struct SliceFamily {
    set: DecidedSet,
    universe: Universe,
    members: Vec<Arc<dyn PartialDecider>>,
    domains: Vec<StringSet>,
}

impl fmt::Debug for SliceFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SliceFamily({}, {} members)", self.set.name(), self.members.len())
    }
}

impl SliceFamily {
    pub fn new(set: DecidedSet, u: Universe, members: Vec<Arc<dyn PartialDecider>>) -> Result<Self, SliceError> {
        let mut domains = Vec::with_capacity(members.len());
        for m in &members {
            let v = is_approximation_for(m.as_ref(), &set, u);
            if let Some(w) = v.witness() {
                return Err(SliceError::NotAnApproximation {
                    member: m.name(),
                    detail: w.to_string(),
                });
            }
            domains.push(domain(m.as_ref(), u));
        }
        Ok(SliceFamily {
            set,
            universe: u,
            members,
            domains,
        })
    }

    /// Collects up to `count` approximations for `set` with pairwise distinct
    /// domains on `u`; see [`harvest_approximations`].
    pub fn harvest(set: DecidedSet, u: Universe, c: u32, programs: u64, count: usize) -> Self {
        let (members, domains) = harvest_approximations(&set, u, c, programs, count)
            .into_iter()
            .map(|(a, d)| (Arc::new(a) as Arc<dyn PartialDecider>, d))
            .unzip();
        SliceFamily {
            set,
            universe: u,
            members,
            domains,
        }
    }

    /// `eta_k = D_1 u ... u D_k` over the member domains, listed cyclically
    /// from member `r`. `r = 0` is the principal construction; the others are
    /// parameterizations whose every slice is a finite union of family slices.
    pub fn slice_parameterization(&self, r: usize) -> Parameterization {
        let n = self.domains.len().max(1);
        let sets: Vec<StringSet> = (0..self.domains.len())
            .map(|i| self.domains[(i + r) % n].clone())
            .collect();
        let name = format!("slices({},{r})", self.set.name());
        from_slices(
            name,
            SliceSets::new(self.universe, sets).expect("domains share the universe"),
        )
    }

    pub fn set(&self) -> &DecidedSet {
        &self.set
    }

    pub fn universe(&self) -> Universe {
        self.universe
    }

    pub fn members(&self) -> &[Arc<dyn PartialDecider>] {
        &self.members
    }

    pub fn domains(&self) -> &[StringSet] {
        &self.domains
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn union_of_domains(&self) -> StringSet {
        self.domains
            .iter()
            .fold(StringSet::empty(self.universe), |acc, d| acc.union(d))
    }
}

/// Whether `a` is an approximation for `set` on `u`, with its slice.
pub fn is_slice_for(a: &dyn PartialDecider, set: &DecidedSet, u: Universe) -> (HorizonVerdict, StringSet) {
    (is_approximation_for(a, set, u), domain(a, u))
}

/// Up to `count` approximations for `set` at exponent `c` with pairwise
/// distinct nonempty domains on `u`: first a fixed library of hand-built
/// deciders, then the enumerated programs `1..=programs`.
pub fn harvest_approximations(
    set: &DecidedSet,
    u: Universe,
    c: u32,
    programs: u64,
    count: usize,
) -> Vec<(Approximation, StringSet)> {
    use library::Body;
    let mut candidates = Vec::new();
    for body in [Body::Reject, Body::Accept, Body::Parity, Body::FirstBit] {
        for first in [None, Some(false), Some(true)] {
            candidates.push(library::gated(first, None, body));
            for j in (1..u.max_len()).rev() {
                candidates.push(library::gated(first, Some(j), body));
            }
        }
    }
    candidates.extend(Program::enumerate(programs));
    let mut out: Vec<(Approximation, StringSet)> = Vec::new();
    for p in candidates {
        if out.len() >= count {
            break;
        }
        let a = crate::machines::restrict(p, c);
        if is_approximation_for(&a, set, u).is_fails() {
            continue;
        }
        let d = domain(&a, u);
        if d.is_empty() || out.iter().any(|(_, e)| *e == d) {
            continue;
        }
        out.push((a, d));
    }
    out
}

/// Holds iff `core` meets every family domain in fewer than `threshold` points.
pub fn is_core_for(core: &StringSet, fam: &SliceFamily, threshold: usize) -> HorizonVerdict {
    for (m, d) in fam.members.iter().zip(&fam.domains) {
        let meet = core.intersection(d);
        if meet.len() >= threshold {
            return HorizonVerdict::fails(Witness::at(
                meet.first().expect("nonempty"),
                format!("{} decides {} points of the candidate core", m.name(), meet.len()),
            ));
        }
    }
    HorizonVerdict::holds()
}

/// Fails iff some family member decides at least `threshold` points outside
/// the slice of `a`.
pub fn maximal_slice_probe(
    a: &dyn PartialDecider,
    fam: &SliceFamily,
    threshold: usize,
) -> Result<HorizonVerdict, SliceError> {
    let u = fam.universe;
    let (v, slice) = is_slice_for(a, &fam.set, u);
    if let Some(w) = v.witness() {
        return Err(SliceError::Precondition(format!("{} is not a slice: {w}", a.name())));
    }
    Ok(maximal_against(&slice, fam, threshold))
}

fn maximal_against(slice: &StringSet, fam: &SliceFamily, threshold: usize) -> HorizonVerdict {
    for (m, d) in fam.members.iter().zip(&fam.domains) {
        let extra = d.difference(slice);
        if extra.len() >= threshold {
            return HorizonVerdict::fails(Witness::at(
                extra.first().expect("nonempty"),
                format!("{} extends the slice by {} points", m.name(), extra.len()),
            ));
        }
    }
    HorizonVerdict::holds()
}

/// The complement of a slice that is maximal at the horizon is a core.
/// Refuses when the slice is not maximal.
pub fn core_complement_duality(
    a: &dyn PartialDecider,
    fam: &SliceFamily,
    threshold: usize,
) -> Result<HorizonVerdict, SliceError> {
    let probe = maximal_slice_probe(a, fam, threshold)?;
    if !probe.is_holds() {
        return Err(SliceError::Precondition(format!("slice is not maximal: {probe}")));
    }
    let slice = domain(a, fam.universe);
    Ok(is_core_for(&slice.complement(), fam, threshold))
}

/// A decider for `A xor X` built from one for `A` and a total one for `X`.
#[derive(Clone)]
pub struct SymDiff {
    inner: Arc<dyn PartialDecider>,
    x: Approximation,
}

impl PartialDecider for SymDiff {
    fn name(&self) -> String {
        format!("symdiff({},{})", self.inner.name(), self.x.name())
    }

    fn decide(&self, x: &BitString) -> RunOutcome {
        let r = self.inner.decide(x);
        let Some(bit) = r.decision() else {
            return r;
        };
        let s = self.x.decide(x);
        match s.decision() {
            Some(b) => RunOutcome::from_decision(bit != b, r.steps_used.saturating_add(s.steps_used), r.work + s.work),
            None => RunOutcome::other(r.work + s.work),
        }
    }
}

/// Turns an approximation for `A` into one for `A xor X` with the same
/// domain. `x` must decide every string of `u`.
pub fn transform_symdiff(a: Arc<dyn PartialDecider>, x: Approximation, u: Universe) -> Result<SymDiff, SliceError> {
    if let Some(bad) = u.iter().find(|s| !x.decide(s).decided()) {
        return Err(SliceError::NotTotalOnUniverse(bad));
    }
    Ok(SymDiff { inner: a, x })
}

/// Exclusive or of two deciders with the same domain.
#[derive(Clone)]
pub struct XorCombine {
    a: Arc<dyn PartialDecider>,
    b: Arc<dyn PartialDecider>,
}

impl PartialDecider for XorCombine {
    fn name(&self) -> String {
        format!("xor({},{})", self.a.name(), self.b.name())
    }

    fn decide(&self, x: &BitString) -> RunOutcome {
        let ra = self.a.decide(x);
        let rb = self.b.decide(x);
        let work = ra.work + rb.work;
        match (ra.decision(), rb.decision()) {
            (Some(p), Some(q)) => RunOutcome::from_decision(p != q, ra.steps_used.saturating_add(rb.steps_used), work),
            _ => RunOutcome::other(work),
        }
    }
}

pub fn xor_combine(
    a: Arc<dyn PartialDecider>,
    b: Arc<dyn PartialDecider>,
    u: Universe,
) -> Result<XorCombine, SliceError> {
    for x in u.iter() {
        if a.decide(&x).decided() != b.decide(&x).decided() {
            return Err(SliceError::DomainMismatch(x));
        }
    }
    Ok(XorCombine { a, b })
}

/// `<x, y>` for `y >= 1`: the bits of `x` doubled, then `01`, then `y` in
/// binary. `None` when the result exceeds the longest string.
pub fn pair_strings(x: &BitString, y: u64) -> Option<BitString> {
    assert!(y >= 1, "second pair component must be positive");
    let ylen = 64 - y.leading_zeros() as usize;
    let len = 2 * x.len() + 2 + ylen;
    if len > MAX_LEN {
        return None;
    }
    let mut bits = Vec::with_capacity(len);
    for b in x.bits() {
        bits.extend([b, b]);
    }
    bits.extend([false, true]);
    bits.extend((0..ylen).rev().map(|i| (y >> i) & 1 == 1));
    BitString::from_bools(&bits).ok()
}

/// Inverse of [`pair_strings`]; `None` for strings that are not pairs.
pub fn unpair_string(z: &BitString) -> Option<(BitString, u64)> {
    let n = z.len();
    let mut i = 0;
    let mut x = Vec::new();
    loop {
        if i + 1 >= n {
            return None;
        }
        match (z.bit(i), z.bit(i + 1)) {
            (false, true) => break,
            (a, b) if a == b => x.push(a),
            _ => return None,
        }
        i += 2;
    }
    i += 2;
    if x.is_empty() || i >= n || !z.bit(i) {
        return None;
    }
    let y = (i..n).fold(0u64, |acc, j| (acc << 1) | z.bit(j) as u64);
    Some((BitString::from_bools(&x).ok()?, y))
}

type StringMap = Arc<dyn Fn(&BitString) -> Option<BitString> + Send + Sync>;

/// A length-increasing, membership-preserving map between strings.
#[derive(Clone)]
pub struct Reduction {
    pub name: String,
    apply: StringMap,
    /// Constant `c` with `|f(z)| <= c |z|`.
    pub stretch: usize,
}

impl fmt::Debug for Reduction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Reduction({}, stretch {})", self.name, self.stretch)
    }
}

impl Reduction {
    /// `None` once the image would exceed the longest representable string.
    pub fn apply(&self, z: &BitString) -> Option<BitString> {
        (self.apply)(z)
    }
}

/// The cylinder `{<x, y> : x in X}` and the map `<x, y> -> <x, 2y>`; strings
/// that are not pairs go to `10` followed by themselves, which is again not a
/// pair.
pub fn lli_cylinder(x: &DecidedSet) -> (DecidedSet, Reduction) {
    let inner = x.clone();
    let set = DecidedSet::new(format!("cylinder({})", x.name()), move |z| {
        unpair_string(z).is_some_and(|(a, _)| inner.decide(&a))
    });
    let f = Reduction {
        name: "double-second".into(),
        apply: Arc::new(|z| match unpair_string(z) {
            Some((a, y)) => pair_strings(&a, y.checked_mul(2)?),
            None => BitString::from_bits(2, 0b10).ok()?.concat(z).ok(),
        }),
        stretch: 3,
    };
    (set, f)
}

/// The points outside a slice that the reduction carries into it.
#[derive(Clone)]
pub struct ExtendedSlice {
    inner: Arc<dyn PartialDecider>,
    f: Reduction,
}

impl PartialDecider for ExtendedSlice {
    fn name(&self) -> String {
        format!("extend({},{})", self.inner.name(), self.f.name)
    }

    fn decide(&self, x: &BitString) -> RunOutcome {
        let r = self.inner.decide(x);
        if r.decided() {
            return RunOutcome::other(r.work);
        }
        let Some(y) = self.f.apply(x) else {
            return RunOutcome::other(r.work);
        };
        let s = self.inner.decide(&y);
        match s.decision() {
            Some(b) => RunOutcome::from_decision(b, r.steps_used.saturating_add(s.steps_used), r.work + s.work),
            None => RunOutcome::other(r.work + s.work),
        }
    }
}

impl ExtendedSlice {
    /// `x, f(x), f(f(x)), ...` while inside `u`.
    pub fn orbit(&self, x: &BitString, u: Universe) -> Vec<BitString> {
        let mut out = Vec::new();
        let mut cur = Some(*x);
        while let Some(z) = cur.filter(|z| u.contains(z)) {
            cur = self.f.apply(&z);
            out.push(z);
        }
        out
    }
}

/// `S' = {x not in S : f(x) in S}` as a decider, after spot-checking that
/// `f` preserves membership in `set` on `u`.
pub fn extend_slice_via_reduction(
    s: Arc<dyn PartialDecider>,
    f: &Reduction,
    set: &DecidedSet,
    u: Universe,
) -> Result<ExtendedSlice, SliceError> {
    for z in u.iter() {
        if let Some(fz) = f.apply(&z) {
            if set.decide(&z) != set.decide(&fz) {
                return Err(SliceError::NotAReduction(z));
            }
        }
    }
    Ok(ExtendedSlice { inner: s, f: f.clone() })
}
