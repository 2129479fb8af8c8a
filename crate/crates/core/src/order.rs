//! Minimization and gap functions, the two orders, imix, and the lattice and
//! filter laws, all evaluated at a horizon.
//!
//! `mu` at horizon `H` is the least `|k|` over fiber elements inside
//! `horizon(H)` of the parameter space. The gap between `e1` and `e2` is
//! evaluated for every `n` up to the longest encoding inside `horizon(H)` of
//! `e2`'s space, so `e1` below `e2` holds exactly when every string `e2`
//! resolves at the horizon is also resolved by `e1`.

use std::fmt;

use crate::params::{join, meet, Parameterization};
use crate::slices::SliceFamily;
use crate::universe::{BitString, StringSet, Universe};
use crate::verdict::{Horizon, HorizonVerdict, Witness};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MuValue {
    Resolved(usize),
    Unresolved,
}

impl MuValue {
    pub fn value(self) -> Option<usize> {
        match self {
            MuValue::Resolved(v) => Some(v),
            MuValue::Unresolved => None,
        }
    }
}

impl From<Option<usize>> for MuValue {
    fn from(v: Option<usize>) -> Self {
        v.map_or(MuValue::Unresolved, MuValue::Resolved)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum GapValue {
    Finite(usize),
    /// A string cheap for the second parameterization that the first does
    /// not resolve at the horizon.
    InfinityWitness(BitString),
    /// Strings the horizon cannot classify may or may not count.
    Unresolved,
}

impl fmt::Display for GapValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GapValue::Finite(v) => write!(f, "{v}"),
            GapValue::InfinityWitness(x) => write!(f, "inf@{x}"),
            GapValue::Unresolved => f.write_str("unresolved"),
        }
    }
}

pub fn mu(e: &Parameterization, x: &BitString, h: usize) -> MuValue {
    match e.mu_hint(x, h) {
        Some(v) => v.into(),
        None => e.mu_by_enumeration(x, h).into(),
    }
}

/// `mu` of every string of a universe, indexed like the universe.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MuProfile {
    pub universe: Universe,
    pub horizon: usize,
    /// Longest encoding inside the horizon of the parameter space.
    pub max_len: usize,
    pub values: Vec<Option<usize>>,
}

impl MuProfile {
    pub fn new(e: &Parameterization, u: Universe, h: usize) -> Self {
        MuProfile {
            universe: u,
            horizon: h,
            max_len: e.space().max_len_at(h),
            values: u.iter().map(|x| mu(e, &x, h).value()).collect(),
        }
    }

    pub fn resolved(&self) -> StringSet {
        StringSet::from_predicate(self.universe, |x| {
            self.values[self.universe.index_of(x).expect("in universe")].is_some()
        })
    }

    fn entries(&self) -> impl Iterator<Item = (BitString, Option<usize>)> + '_ {
        self.universe.iter().zip(self.values.iter().copied())
    }
}

/// `max{mu1(x) : mu2(x) <= n}` from precomputed profiles; 0 on no such x.
pub fn gap_from_profiles(p1: &MuProfile, p2: &MuProfile, n: usize) -> GapValue {
    let mut best = 0;
    let mut witness = None;
    let mut unclassified = false;
    for ((x, m1), (_, m2)) in p1.entries().zip(p2.entries()) {
        match m2 {
            Some(v) if v <= n => match m1 {
                Some(m) => best = best.max(m),
                None => {
                    witness.get_or_insert(x);
                }
            },
            Some(_) => {}
            None => unclassified |= n > p2.max_len,
        }
    }
    match witness {
        Some(x) => GapValue::InfinityWitness(x),
        None if unclassified => GapValue::Unresolved,
        None => GapValue::Finite(best),
    }
}

pub fn gap(e1: &Parameterization, e2: &Parameterization, n: usize, u: Universe, h: usize) -> GapValue {
    gap_from_profiles(&MuProfile::new(e1, u, h), &MuProfile::new(e2, u, h), n)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GapRow {
    pub n: usize,
    pub gap: GapValue,
}

pub fn gap_table(e1: &Parameterization, e2: &Parameterization, n_max: usize, u: Universe, h: usize) -> Vec<GapRow> {
    let (p1, p2) = (MuProfile::new(e1, u, h), MuProfile::new(e2, u, h));
    (0..=n_max)
        .map(|n| GapRow {
            n,
            gap: gap_from_profiles(&p1, &p2, n),
        })
        .collect()
}

/// CSV with columns `n,gap,witness_x`.
pub fn gap_csv(rows: &[GapRow]) -> String {
    let mut out = String::from("n,gap,witness_x\n");
    for r in rows {
        match &r.gap {
            GapValue::Finite(v) => out.push_str(&format!("{},{v},\n", r.n)),
            GapValue::InfinityWitness(x) => out.push_str(&format!("{},inf,{x}\n", r.n)),
            GapValue::Unresolved => out.push_str(&format!("{},unresolved,\n", r.n)),
        }
    }
    out
}

/// Nonuniform order from profiles: every `n` up to `p2.max_len` has a finite gap.
pub fn below_nu_profiles(p1: &MuProfile, p2: &MuProfile) -> HorizonVerdict {
    let mut worst: Option<(usize, BitString)> = None;
    for ((x, m1), (_, m2)) in p1.entries().zip(p2.entries()) {
        if let (None, Some(n)) = (m1, m2) {
            if worst.as_ref().is_none_or(|(w, _)| n < *w) {
                worst = Some((n, x));
            }
        }
    }
    match worst {
        None => HorizonVerdict::holds(),
        Some((n, x)) => HorizonVerdict::fails(Witness::at(x, format!("gap infinite from n={n}"))),
    }
}

pub fn below_nu(e1: &Parameterization, e2: &Parameterization, hz: &Horizon) -> HorizonVerdict {
    let (u, h) = (hz.universe, hz.mu);
    below_nu_profiles(&MuProfile::new(e1, u, h), &MuProfile::new(e2, u, h)).at(*hz)
}

/// Uniform order against a supplied bound; a bound of `None` at some `n`
/// leaves the verdict unresolved.
pub fn below_uniform(
    e1: &Parameterization,
    e2: &Parameterization,
    bound: &dyn Fn(usize) -> Option<usize>,
    hz: &Horizon,
) -> HorizonVerdict {
    let (u, h) = (hz.universe, hz.mu);
    let (p1, p2) = (MuProfile::new(e1, u, h), MuProfile::new(e2, u, h));
    for n in 0..=p2.max_len {
        let g = gap_from_profiles(&p1, &p2, n);
        let v = match (&g, bound(n)) {
            (GapValue::InfinityWitness(x), _) => {
                HorizonVerdict::fails(Witness::at(*x, format!("gap infinite at n={n}")))
            }
            (GapValue::Unresolved, _) => HorizonVerdict::unresolved(format!("gap at n={n} unresolved")),
            (GapValue::Finite(_), None) => HorizonVerdict::unresolved(format!("no bound at n={n}")),
            (GapValue::Finite(v), Some(b)) if *v > b => {
                HorizonVerdict::fails(Witness::note(format!("gap({n}) = {v} exceeds bound {b}")))
            }
            _ => continue,
        };
        return v.at(*hz);
    }
    HorizonVerdict::holds().at(*hz)
}

/// A bound on `gap(e, bylength, n)` obtained by counting: the least `|k|`
/// whose slice of `e` contains as many strings of length at most `2^n - 1`
/// as there are. Strings past the universe are not counted.
pub fn cardinality_bound(e: &Parameterization, u: Universe, h: usize) -> impl Fn(usize) -> Option<usize> + '_ {
    move |n| {
        let m = if n >= 6 {
            u.max_len()
        } else {
            ((1usize << n) - 1).min(u.max_len())
        };
        if m == 0 {
            return Some(0);
        }
        let target = (1usize << (m + 1)) - 2;
        let s = e.space();
        (s.min_len()..=s.max_len_at(h)).find(|&len| {
            s.maximal_of_len(len, h).iter().any(|k| {
                let count = u.iter().filter(|x| x.len() <= m && e.contains(x, k)).count();
                count == target
            })
        })
    }
}

/// Imix at the horizon: every `k` inside `horizon(H)` has some `k'` inside
/// `horizon(ext)` whose slice adds at least `threshold` strings. Decided via
/// the top elements of both horizons.
pub fn has_imix(e: &Parameterization, hz: &Horizon) -> HorizonVerdict {
    assert!(hz.threshold >= 1);
    let s = e.space();
    let (Some(top), Some(top_ext)) = (s.horizon_top(hz.mu), s.horizon_top(hz.ext)) else {
        return has_imix_exhaustive(e, hz.universe, hz.mu, hz.ext, hz.threshold).at(*hz);
    };
    let base = e.slice(&top, hz.universe);
    let added = e.slice(&top_ext, hz.universe).difference(&base);
    if added.len() >= hz.threshold {
        HorizonVerdict::holds().at(*hz)
    } else {
        HorizonVerdict::fails(Witness::note(format!(
            "k={top}: no k' within ext adds {} strings (best adds {})",
            hz.threshold,
            added.len()
        )))
        .at(*hz)
    }
}

/// The same quantity by enumerating both horizons. Only for small horizons.
pub fn has_imix_exhaustive(
    e: &Parameterization,
    u: Universe,
    h: usize,
    ext: usize,
    threshold: usize,
) -> HorizonVerdict {
    let s = e.space();
    let outer: Vec<StringSet> = s.horizon(ext).map(|k| e.slice(&k, u)).collect();
    for k in s.horizon(h) {
        let base = e.slice(&k, u);
        if !outer.iter().any(|sl| sl.difference_len(&base) >= threshold) {
            return HorizonVerdict::fails(Witness::note(format!("k={k} has no extension of size {threshold}")));
        }
    }
    HorizonVerdict::holds()
}

fn profiles(family: &[Parameterization], hz: &Horizon) -> Vec<MuProfile> {
    family.iter().map(|e| MuProfile::new(e, hz.universe, hz.mu)).collect()
}

/// `meet(e1, e2)` is below both, and every family member below both is
/// below it.
pub fn check_glb(
    e1: &Parameterization,
    e2: &Parameterization,
    family: &[Parameterization],
    hz: &Horizon,
) -> HorizonVerdict {
    bound_check(e1, e2, &meet(e1, e2), family, hz, true)
}

/// `join(e1, e2)` is above both, and it is below every family member above both.
pub fn check_lub(
    e1: &Parameterization,
    e2: &Parameterization,
    family: &[Parameterization],
    hz: &Horizon,
) -> HorizonVerdict {
    bound_check(e1, e2, &join(e1, e2), family, hz, false)
}

fn bound_check(
    e1: &Parameterization,
    e2: &Parameterization,
    b: &Parameterization,
    family: &[Parameterization],
    hz: &Horizon,
    lower: bool,
) -> HorizonVerdict {
    let (u, h) = (hz.universe, hz.mu);
    let (p1, p2, pb) = (
        MuProfile::new(e1, u, h),
        MuProfile::new(e2, u, h),
        MuProfile::new(b, u, h),
    );
    // below(x, y) with x, y ordered so that `lower` reads "b below e".
    let le = |x: &MuProfile, y: &MuProfile| below_nu_profiles(x, y);
    let tag = |v: HorizonVerdict, what: String| match v.witness() {
        Some(w) => HorizonVerdict::fails(Witness {
            x: w.x,
            detail: format!("{what}: {}", w.detail),
        }),
        None => v,
    };
    for (p, e) in [(&p1, e1), (&p2, e2)] {
        let v = if lower { le(&pb, p) } else { le(p, &pb) };
        if !v.is_holds() {
            return tag(v, format!("{} is not a bound of {}", b.name(), e.name())).at(*hz);
        }
    }
    for (pf, f) in profiles(family, hz).iter().zip(family) {
        let is_bound = if lower {
            le(pf, &p1).is_holds() && le(pf, &p2).is_holds()
        } else {
            le(&p1, pf).is_holds() && le(&p2, pf).is_holds()
        };
        if !is_bound {
            continue;
        }
        let v = if lower { le(pf, &pb) } else { le(&pb, pf) };
        if !v.is_holds() {
            return tag(v, format!("{} is a better bound than {}", f.name(), b.name())).at(*hz);
        }
    }
    HorizonVerdict::holds().at(*hz)
}

/// Filter laws for `F = {e in lattice : member(e)}`: nonempty, closed upward
/// within the lattice, closed under meets.
pub fn check_filter(
    lattice: &[Parameterization],
    member: &dyn Fn(&Parameterization) -> bool,
    hz: &Horizon,
) -> HorizonVerdict {
    let inside: Vec<bool> = lattice.iter().map(member).collect();
    if !inside.iter().any(|&b| b) {
        return HorizonVerdict::fails(Witness::note("no lattice element is in the filter")).at(*hz);
    }
    let ps = profiles(lattice, hz);
    for (i, e) in lattice.iter().enumerate().filter(|(i, _)| inside[*i]) {
        for (j, f) in lattice.iter().enumerate() {
            if !inside[j] && below_nu_profiles(&ps[i], &ps[j]).is_holds() {
                return HorizonVerdict::fails(Witness::note(format!(
                    "{} is in the filter and below {}, which is not",
                    e.name(),
                    f.name()
                )))
                .at(*hz);
            }
        }
    }
    for (i, e) in lattice.iter().enumerate().filter(|(i, _)| inside[*i]) {
        for (j, f) in lattice.iter().enumerate().skip(i).filter(|(j, _)| inside[*j]) {
            let _ = j;
            let m = meet(e, f);
            if !member(&m) {
                return HorizonVerdict::fails(Witness::note(format!("{} is not in the filter", m.name()))).at(*hz);
            }
        }
    }
    HorizonVerdict::holds().at(*hz)
}

/// Membership in the slicewise class at the horizon: everything `e` resolves
/// within the horizon is decided by some member of the family.
pub fn slicewise_member(fam: &SliceFamily, h: usize) -> impl Fn(&Parameterization) -> bool + '_ {
    let covered = fam.union_of_domains();
    move |e| e.resolved_set(fam.universe(), h).is_subset(&covered)
}
