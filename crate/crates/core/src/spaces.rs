//! Parameter spaces: directed, encodable quasiorders.
//!
//! A space is only ever explored up to a horizon `h`. For the natural numbers
//! that means every `k` with `|k| <= h`; for a product it means every pair
//! whose components are both within `h`. Each built-in space has a greatest
//! element inside every horizon (`horizon_top`), which the order probes use
//! as a shortcut.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::universe::binary_len;
use crate::verdict::{HorizonVerdict, Witness};

/// A parameter value.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Param {
    Nat(u64),
    Pair(Box<Param>, Box<Param>),
}

impl Param {
    pub fn pair(a: Param, b: Param) -> Param {
        Param::Pair(Box::new(a), Box::new(b))
    }

    pub fn as_nat(&self) -> Option<u64> {
        match self {
            Param::Nat(k) => Some(*k),
            Param::Pair(..) => None,
        }
    }

    pub fn as_pair(&self) -> Option<(&Param, &Param)> {
        match self {
            Param::Pair(a, b) => Some((a, b)),
            Param::Nat(_) => None,
        }
    }
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Param::Nat(k) => write!(f, "{k}"),
            Param::Pair(a, b) => write!(f, "({a},{b})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpaceError {
    #[error("bad space descriptor {0:?}")]
    BadDescriptor(String),
    #[error("finite space table: {0}")]
    BadTable(String),
}

pub trait ParamSpace: Send + Sync + fmt::Debug {
    fn name(&self) -> String;
    fn is_element(&self, k: &Param) -> bool;
    /// The quasiorder: `before(a, b)` reads "a comes before b".
    fn before(&self, a: &Param, b: &Param) -> bool;
    fn encode(&self, k: &Param) -> Vec<bool>;
    fn encode_len(&self, k: &Param) -> usize {
        self.encode(k).len()
    }
    /// Some `c` with `a` and `b` before it; `None` means the space is not directed.
    fn join_hint(&self, a: &Param, b: &Param) -> Option<Param>;
    /// All elements within horizon `h`.
    fn horizon(&self, h: usize) -> Box<dyn Iterator<Item = Param> + '_>;
    /// A greatest element of `horizon(h)`, if one exists.
    fn horizon_top(&self, h: usize) -> Option<Param>;
    /// Smallest encoding length in the whole space.
    fn min_len(&self) -> usize;
    /// Smallest `|k|` over `k` in `horizon(h)` with `lower` before `k`.
    fn min_len_above(&self, lower: &Param, h: usize) -> Option<usize> {
        self.horizon(h)
            .filter(|k| self.before(lower, k))
            .map(|k| self.encode_len(&k))
            .min()
    }
    /// Up to `count` elements in nondecreasing encoding length.
    fn sample(&self, count: usize) -> Vec<Param>;
    /// Elements of `horizon(h)` with encoding length `len` such that every
    /// element of that length within the horizon comes before one of them.
    fn maximal_of_len(&self, len: usize, h: usize) -> Vec<Param>;
    /// Longest encoding inside `horizon(h)`.
    fn max_len_at(&self, h: usize) -> usize;
}

/// The natural numbers under `<=`, in binary.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct NatSpace;

fn nat_horizon_max(h: usize) -> u64 {
    if h >= 64 {
        u64::MAX
    } else {
        (1u64 << h.max(1)) - 1
    }
}

impl ParamSpace for NatSpace {
    fn name(&self) -> String {
        "nat".into()
    }

    fn is_element(&self, k: &Param) -> bool {
        matches!(k, Param::Nat(_))
    }

    fn before(&self, a: &Param, b: &Param) -> bool {
        match (a, b) {
            (Param::Nat(a), Param::Nat(b)) => a <= b,
            _ => false,
        }
    }

    fn encode(&self, k: &Param) -> Vec<bool> {
        let k = k.as_nat().expect("NatSpace element");
        let len = binary_len(k);
        (0..len).rev().map(|i| (k >> i) & 1 == 1).collect()
    }

    fn encode_len(&self, k: &Param) -> usize {
        binary_len(k.as_nat().expect("NatSpace element"))
    }

    fn join_hint(&self, a: &Param, b: &Param) -> Option<Param> {
        Some(Param::Nat(a.as_nat()?.max(b.as_nat()?)))
    }

    fn horizon(&self, h: usize) -> Box<dyn Iterator<Item = Param> + '_> {
        if h == 0 {
            return Box::new(std::iter::empty());
        }
        Box::new((0..=nat_horizon_max(h)).map(Param::Nat))
    }

    fn horizon_top(&self, h: usize) -> Option<Param> {
        (h > 0).then(|| Param::Nat(nat_horizon_max(h)))
    }

    fn min_len(&self) -> usize {
        1
    }

    fn min_len_above(&self, lower: &Param, h: usize) -> Option<usize> {
        let len = binary_len(lower.as_nat()?);
        (len <= h).then_some(len)
    }

    fn sample(&self, count: usize) -> Vec<Param> {
        (0..count as u64).map(Param::Nat).collect()
    }

    fn maximal_of_len(&self, len: usize, h: usize) -> Vec<Param> {
        if len == 0 || len > h || len > 64 {
            return Vec::new();
        }
        vec![Param::Nat(nat_horizon_max(len))]
    }

    fn max_len_at(&self, h: usize) -> usize {
        h.min(64)
    }
}

/// Length of a product encoding given the component lengths.
///
/// The left length is written in binary with every bit doubled, closed by
/// `01`, then the two component encodings follow.
pub fn pair_encode_len(left: usize, right: usize) -> usize {
    2 * binary_len(left as u64) + 2 + left + right
}

/// Componentwise product of two spaces.
#[derive(Debug, Clone)]
pub struct ProductSpace {
    pub left: Arc<dyn ParamSpace>,
    pub right: Arc<dyn ParamSpace>,
}

impl ProductSpace {
    pub fn new(left: Arc<dyn ParamSpace>, right: Arc<dyn ParamSpace>) -> Self {
        ProductSpace { left, right }
    }
}

impl ParamSpace for ProductSpace {
    fn name(&self) -> String {
        format!("product({},{})", self.left.name(), self.right.name())
    }

    fn is_element(&self, k: &Param) -> bool {
        k.as_pair()
            .is_some_and(|(a, b)| self.left.is_element(a) && self.right.is_element(b))
    }

    fn before(&self, a: &Param, b: &Param) -> bool {
        match (a.as_pair(), b.as_pair()) {
            (Some((a1, a2)), Some((b1, b2))) => self.left.before(a1, b1) && self.right.before(a2, b2),
            _ => false,
        }
    }

    fn encode(&self, k: &Param) -> Vec<bool> {
        let (a, b) = k.as_pair().expect("ProductSpace element");
        let ea = self.left.encode(a);
        let eb = self.right.encode(b);
        let n = ea.len() as u64;
        let mut out = Vec::with_capacity(pair_encode_len(ea.len(), eb.len()));
        for i in (0..binary_len(n)).rev() {
            let bit = (n >> i) & 1 == 1;
            out.push(bit);
            out.push(bit);
        }
        out.extend([false, true]);
        out.extend(ea);
        out.extend(eb);
        out
    }

    fn encode_len(&self, k: &Param) -> usize {
        let (a, b) = k.as_pair().expect("ProductSpace element");
        pair_encode_len(self.left.encode_len(a), self.right.encode_len(b))
    }

    fn join_hint(&self, a: &Param, b: &Param) -> Option<Param> {
        let (a1, a2) = a.as_pair()?;
        let (b1, b2) = b.as_pair()?;
        Some(Param::pair(self.left.join_hint(a1, b1)?, self.right.join_hint(a2, b2)?))
    }

    fn horizon(&self, h: usize) -> Box<dyn Iterator<Item = Param> + '_> {
        let rights: Vec<Param> = self.right.horizon(h).collect();
        Box::new(
            self.left
                .horizon(h)
                .flat_map(move |a| rights.clone().into_iter().map(move |b| Param::pair(a.clone(), b))),
        )
    }

    fn horizon_top(&self, h: usize) -> Option<Param> {
        Some(Param::pair(self.left.horizon_top(h)?, self.right.horizon_top(h)?))
    }

    fn min_len(&self) -> usize {
        pair_encode_len(self.left.min_len(), self.right.min_len())
    }

    fn min_len_above(&self, lower: &Param, h: usize) -> Option<usize> {
        let (a, b) = lower.as_pair()?;
        Some(pair_encode_len(
            self.left.min_len_above(a, h)?,
            self.right.min_len_above(b, h)?,
        ))
    }

    fn sample(&self, count: usize) -> Vec<Param> {
        let side = (count as f64).sqrt().ceil() as usize + 1;
        let ls = self.left.sample(side);
        let rs = self.right.sample(side);
        let mut all: Vec<Param> = ls
            .iter()
            .flat_map(|a| rs.iter().map(move |b| Param::pair(a.clone(), b.clone())))
            .collect();
        all.sort_by_key(|k| self.encode_len(k));
        all.truncate(count);
        all
    }

    fn maximal_of_len(&self, len: usize, h: usize) -> Vec<Param> {
        let mut out = Vec::new();
        for l1 in 1..len {
            let overhead = 2 * binary_len(l1 as u64) + 2 + l1;
            if overhead >= len {
                break;
            }
            let rights = self.right.maximal_of_len(len - overhead, h);
            if rights.is_empty() {
                continue;
            }
            for a in self.left.maximal_of_len(l1, h) {
                for b in &rights {
                    out.push(Param::pair(a.clone(), b.clone()));
                }
            }
        }
        out
    }

    fn max_len_at(&self, h: usize) -> usize {
        pair_encode_len(self.left.max_len_at(h), self.right.max_len_at(h))
    }
}

/// A finite space given by an explicit relation matrix. Element `i` is
/// `Param::Nat(i)` and encodes as `i` in binary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteSpace {
    size: usize,
    le: Vec<Vec<bool>>,
}

impl FiniteSpace {
    /// Uses the matrix as given, without closing it.
    pub fn from_matrix(le: Vec<Vec<bool>>) -> Result<Self, SpaceError> {
        let size = le.len();
        if size == 0 || le.iter().any(|row| row.len() != size) {
            return Err(SpaceError::BadTable("matrix must be square and nonempty".into()));
        }
        Ok(FiniteSpace { size, le })
    }

    /// Reflexive-transitive closure of the given pairs `a < b`.
    pub fn from_relations(size: usize, pairs: &[(usize, usize)]) -> Result<Self, SpaceError> {
        if size == 0 {
            return Err(SpaceError::BadTable("empty space".into()));
        }
        let mut le = vec![vec![false; size]; size];
        for (i, row) in le.iter_mut().enumerate() {
            row[i] = true;
        }
        for &(a, b) in pairs {
            if a >= size || b >= size {
                return Err(SpaceError::BadTable(format!("element out of range in {a}<{b}")));
            }
            le[a][b] = true;
        }
        for m in 0..size {
            let via = le[m].clone();
            for row in le.iter_mut().filter(|row| row[m]) {
                for (cell, &v) in row.iter_mut().zip(&via) {
                    *cell |= v;
                }
            }
        }
        Ok(FiniteSpace { size, le })
    }

    /// Parses `N: a<b a<b ...`, e.g. `4: 0<1 0<2 1<3 2<3`.
    pub fn parse(table: &str) -> Result<Self, SpaceError> {
        let bad = |m: &str| SpaceError::BadTable(format!("{m} in {table:?}"));
        let (size, rels) = table.split_once(':').unwrap_or((table, ""));
        let size: usize = size.trim().parse().map_err(|_| bad("bad size"))?;
        let mut pairs = Vec::new();
        for tok in rels.split([' ', ',']).filter(|t| !t.is_empty()) {
            let (a, b) = tok.split_once('<').ok_or_else(|| bad("expected a<b"))?;
            let a = a.trim().parse().map_err(|_| bad("bad element"))?;
            let b = b.trim().parse().map_err(|_| bad("bad element"))?;
            pairs.push((a, b));
        }
        FiniteSpace::from_relations(size, &pairs)
    }

    /// A one-element space whose relation is empty; violates reflexivity.
    pub fn broken() -> Self {
        FiniteSpace {
            size: 1,
            le: vec![vec![false]],
        }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    fn idx(&self, k: &Param) -> Option<usize> {
        let i = k.as_nat()? as usize;
        (i < self.size).then_some(i)
    }
}

impl ParamSpace for FiniteSpace {
    fn name(&self) -> String {
        format!("finite({})", self.size)
    }

    fn is_element(&self, k: &Param) -> bool {
        self.idx(k).is_some()
    }

    fn before(&self, a: &Param, b: &Param) -> bool {
        match (self.idx(a), self.idx(b)) {
            (Some(a), Some(b)) => self.le[a][b],
            _ => false,
        }
    }

    fn encode(&self, k: &Param) -> Vec<bool> {
        NatSpace.encode(k)
    }

    fn encode_len(&self, k: &Param) -> usize {
        NatSpace.encode_len(k)
    }

    fn join_hint(&self, a: &Param, b: &Param) -> Option<Param> {
        let (a, b) = (self.idx(a)?, self.idx(b)?);
        (0..self.size)
            .find(|&c| self.le[a][c] && self.le[b][c])
            .map(|c| Param::Nat(c as u64))
    }

    fn horizon(&self, h: usize) -> Box<dyn Iterator<Item = Param> + '_> {
        Box::new(
            (0..self.size as u64)
                .filter(move |&k| binary_len(k) <= h)
                .map(Param::Nat),
        )
    }

    fn horizon_top(&self, h: usize) -> Option<Param> {
        let members: Vec<Param> = self.horizon(h).collect();
        members
            .iter()
            .find(|t| members.iter().all(|k| self.before(k, t)))
            .cloned()
    }

    fn min_len(&self) -> usize {
        1
    }

    fn sample(&self, count: usize) -> Vec<Param> {
        (0..self.size.min(count) as u64).map(Param::Nat).collect()
    }

    fn maximal_of_len(&self, len: usize, h: usize) -> Vec<Param> {
        self.horizon(h).filter(|k| self.encode_len(k) == len).collect()
    }

    fn max_len_at(&self, h: usize) -> usize {
        self.horizon(h).map(|k| self.encode_len(&k)).max().unwrap_or(0)
    }
}

/// Parses `nat`, `product(<space>,<space>)` or `finite(<table>)`.
pub fn parse_space(desc: &str) -> Result<Arc<dyn ParamSpace>, SpaceError> {
    let d = desc.trim();
    if d == "nat" {
        return Ok(Arc::new(NatSpace));
    }
    if let Some(inner) = d.strip_prefix("finite(").and_then(|r| r.strip_suffix(')')) {
        return Ok(Arc::new(FiniteSpace::parse(inner)?));
    }
    if let Some(inner) = d.strip_prefix("product(").and_then(|r| r.strip_suffix(')')) {
        let (l, r) = split_top_comma(inner).ok_or_else(|| SpaceError::BadDescriptor(desc.into()))?;
        return Ok(Arc::new(ProductSpace::new(parse_space(l)?, parse_space(r)?)));
    }
    Err(SpaceError::BadDescriptor(desc.into()))
}

/// Splits at the single comma not nested in parentheses.
pub fn split_top_comma(s: &str) -> Option<(&str, &str)> {
    let mut depth = 0i32;
    for (i, ch) in s.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => return Some((s[..i].trim(), s[i + 1..].trim())),
            _ => {}
        }
    }
    None
}

/// Reflexivity, transitivity, directedness and injective encoding on the
/// first `sample` elements.
pub fn check_space_laws(s: &dyn ParamSpace, sample: usize) -> HorizonVerdict {
    assert!(sample >= 3, "law check needs at least 3 sample elements");
    let elems = s.sample(sample);
    for a in &elems {
        if !s.before(a, a) {
            return HorizonVerdict::fails(Witness::note(format!("reflexivity fails at {a}")));
        }
    }
    // Transitivity over all triples, restricted to a cube that stays cheap.
    let tri = &elems[..elems.len().min(40)];
    for a in tri {
        for b in tri.iter().filter(|b| s.before(a, b)) {
            for c in tri.iter().filter(|c| s.before(b, c)) {
                if !s.before(a, c) {
                    return HorizonVerdict::fails(Witness::note(format!("transitivity fails at {a} <= {b} <= {c}")));
                }
            }
        }
    }
    for a in &elems {
        for b in &elems {
            match s.join_hint(a, b) {
                Some(c) if s.before(a, &c) && s.before(b, &c) => {}
                Some(c) => {
                    return HorizonVerdict::fails(Witness::note(format!("join hint {c} is not above {a} and {b}")))
                }
                None => return HorizonVerdict::fails(Witness::note(format!("no common successor of {a} and {b}"))),
            }
        }
    }
    let mut seen = std::collections::HashMap::new();
    for a in &elems {
        if let Some(prev) = seen.insert(s.encode(a), a.clone()) {
            return HorizonVerdict::fails(Witness::note(format!("{prev} and {a} share an encoding")));
        }
    }
    HorizonVerdict::holds()
}
