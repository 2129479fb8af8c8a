//! Binary strings, the dyadic string/number bijection, Cantor pairing and
//! finite truncations of the set of nonempty binary strings.

use std::fmt;
use std::str::FromStr;

use fixedbitset::FixedBitSet;
use num_integer::Roots;
use thiserror::Error;

/// Longest string representable by [`BitString`].
pub const MAX_LEN: usize = 63;

/// Largest truncation length accepted by [`Universe::new`].
pub const MAX_UNIVERSE_LEN: usize = 24;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum UniverseError {
    #[error("empty bit string")]
    Empty,
    #[error("bit string longer than {MAX_LEN} bits")]
    TooLong,
    #[error("invalid character {0:?} in bit string")]
    BadChar(char),
    #[error("natural {0} has no string image (must be >= 1 and fit in {MAX_LEN} bits)")]
    OutOfRange(u64),
    #[error("universe length must be within 1..={MAX_UNIVERSE_LEN}, got {0}")]
    BadUniverse(usize),
}

/// A nonempty binary word of at most [`MAX_LEN`] bits.
///
/// Bits are stored most-significant first, so the derived ordering (length,
/// then value) is exactly length-lexicographic order.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitString {
    len: u8,
    bits: u64,
}

impl BitString {
    pub fn from_bits(len: usize, bits: u64) -> Result<Self, UniverseError> {
        if len == 0 {
            return Err(UniverseError::Empty);
        }
        if len > MAX_LEN {
            return Err(UniverseError::TooLong);
        }
        let mask = (1u64 << len) - 1;
        Ok(BitString {
            len: len as u8,
            bits: bits & mask,
        })
    }

    pub fn from_bools(bits: &[bool]) -> Result<Self, UniverseError> {
        if bits.len() > MAX_LEN {
            return Err(UniverseError::TooLong);
        }
        let value = bits.iter().fold(0u64, |acc, &b| (acc << 1) | b as u64);
        Self::from_bits(bits.len(), value)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len as usize
    }

    /// Always false; present for clippy's `len_without_is_empty`.
    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Bit `i`, counted from the left.
    #[inline]
    pub fn bit(&self, i: usize) -> bool {
        debug_assert!(i < self.len());
        (self.bits >> (self.len() - 1 - i)) & 1 == 1
    }

    /// The packed value, most significant bit first.
    #[inline]
    pub fn value(&self) -> u64 {
        self.bits
    }

    pub fn bits(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len()).map(move |i| self.bit(i))
    }

    pub fn count_ones(&self) -> usize {
        self.bits.count_ones() as usize
    }

    /// Appends another string; fails when the result exceeds [`MAX_LEN`].
    pub fn concat(&self, other: &BitString) -> Result<BitString, UniverseError> {
        let len = self.len() + other.len();
        if len > MAX_LEN {
            return Err(UniverseError::TooLong);
        }
        Self::from_bits(len, (self.bits << other.len()) | other.bits)
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.bits() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "\"{self}\"")
    }
}

impl FromStr for BitString {
    type Err = UniverseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut bits = Vec::with_capacity(s.len());
        for ch in s.chars() {
            match ch {
                '0' => bits.push(false),
                '1' => bits.push(true),
                other => return Err(UniverseError::BadChar(other)),
            }
        }
        if bits.is_empty() {
            return Err(UniverseError::Empty);
        }
        Self::from_bools(&bits)
    }
}

/// Position of `x` in length-lexicographic order, starting at 1.
///
/// Reading `x` as a binary numeral with an implicit leading one and
/// subtracting one gives the same number.
pub fn str_to_nat(x: &BitString) -> u64 {
    ((1u64 << x.len()) - 1) + x.value()
}

/// Inverse of [`str_to_nat`].
pub fn nat_to_str(n: u64) -> Result<BitString, UniverseError> {
    if n == 0 {
        return Err(UniverseError::OutOfRange(n));
    }
    let m = n as u128 + 1;
    let len = 127 - m.leading_zeros() as usize;
    if len > MAX_LEN {
        return Err(UniverseError::OutOfRange(n));
    }
    BitString::from_bits(len, (m - (1u128 << len)) as u64)
}

/// Binary numeral without leading zeros; `0` encodes as `"0"`.
pub fn binary_len(k: u64) -> usize {
    if k == 0 {
        1
    } else {
        64 - k.leading_zeros() as usize
    }
}

/// A value produced by Cantor pairing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PairCode(pub u64);

/// `(a+b)(a+b+1)/2 + b`, or `None` on overflow.
pub fn checked_cantor_pair(a: u64, b: u64) -> Option<PairCode> {
    let s = a as u128 + b as u128;
    let v = s * (s + 1) / 2 + b as u128;
    u64::try_from(v).ok().map(PairCode)
}

/// Cantor pairing. Panics when the code does not fit in 64 bits.
pub fn cantor_pair(a: u64, b: u64) -> PairCode {
    checked_cantor_pair(a, b).expect("cantor pair overflows u64")
}

pub fn cantor_unpair(z: PairCode) -> (u64, u64) {
    let z = z.0 as u128;
    let w = ((8 * z + 1).sqrt() - 1) / 2;
    let t = w * (w + 1) / 2;
    let b = z - t;
    let a = w - b;
    (a as u64, b as u64)
}

/// The string carrying pair code `z`: the `(z+1)`-th string in length-lex order.
pub fn code_to_string(z: PairCode) -> Result<BitString, UniverseError> {
    nat_to_str(z.0.checked_add(1).ok_or(UniverseError::OutOfRange(z.0))?)
}

pub fn string_to_code(x: &BitString) -> PairCode {
    PairCode(str_to_nat(x) - 1)
}

/// All strings of length `1..=max_len`, in length-lex order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Universe {
    max_len: usize,
}

impl Universe {
    pub fn new(max_len: usize) -> Result<Self, UniverseError> {
        if max_len == 0 || max_len > MAX_UNIVERSE_LEN {
            return Err(UniverseError::BadUniverse(max_len));
        }
        Ok(Universe { max_len })
    }

    pub fn max_len(&self) -> usize {
        self.max_len
    }

    /// `2^(L+1) - 2`.
    pub fn size(&self) -> usize {
        (1usize << (self.max_len + 1)) - 2
    }

    pub fn contains(&self, x: &BitString) -> bool {
        x.len() <= self.max_len
    }

    pub fn index_of(&self, x: &BitString) -> Option<usize> {
        self.contains(x).then(|| (str_to_nat(x) - 1) as usize)
    }

    pub fn get(&self, index: usize) -> BitString {
        assert!(index < self.size(), "index {index} outside universe");
        nat_to_str(index as u64 + 1).expect("universe strings are representable")
    }

    pub fn iter(&self) -> impl Iterator<Item = BitString> + Clone + '_ {
        (0..self.size()).map(move |i| self.get(i))
    }

    /// Strings of exactly the given length.
    pub fn of_len(&self, len: usize) -> impl Iterator<Item = BitString> {
        let count = if len == 0 || len > self.max_len { 0 } else { 1u64 << len };
        (0..count).map(move |v| BitString::from_bits(len, v).unwrap())
    }
}

/// A subset of a [`Universe`], stored as a bit set over universe indices.
#[derive(Clone, PartialEq, Eq)]
pub struct StringSet {
    universe: Universe,
    bits: FixedBitSet,
}

impl StringSet {
    pub fn empty(universe: Universe) -> Self {
        StringSet {
            universe,
            bits: FixedBitSet::with_capacity(universe.size()),
        }
    }

    pub fn full(universe: Universe) -> Self {
        let mut s = Self::empty(universe);
        s.bits.insert_range(..);
        s
    }

    /// `{x in u : pred(x)}`.
    pub fn from_predicate(universe: Universe, mut pred: impl FnMut(&BitString) -> bool) -> Self {
        let mut s = Self::empty(universe);
        for (i, x) in universe.iter().enumerate() {
            if pred(&x) {
                s.bits.insert(i);
            }
        }
        s
    }

    /// Collects the strings that lie inside the universe; the rest are dropped.
    pub fn from_strings<'a>(universe: Universe, xs: impl IntoIterator<Item = &'a BitString>) -> Self {
        let mut s = Self::empty(universe);
        for x in xs {
            s.insert(x);
        }
        s
    }

    pub fn universe(&self) -> Universe {
        self.universe
    }

    /// Returns false when `x` lies outside the universe.
    pub fn insert(&mut self, x: &BitString) -> bool {
        match self.universe.index_of(x) {
            Some(i) => {
                self.bits.insert(i);
                true
            }
            None => false,
        }
    }

    pub fn contains(&self, x: &BitString) -> bool {
        self.universe.index_of(x).is_some_and(|i| self.bits.contains(i))
    }

    pub fn len(&self) -> usize {
        self.bits.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_clear()
    }

    pub fn iter(&self) -> impl Iterator<Item = BitString> + '_ {
        self.bits.ones().map(move |i| self.universe.get(i))
    }

    pub fn first(&self) -> Option<BitString> {
        self.bits.ones().next().map(|i| self.universe.get(i))
    }

    pub fn union(&self, other: &StringSet) -> StringSet {
        self.check_same(other);
        let mut bits = self.bits.clone();
        bits.union_with(&other.bits);
        StringSet {
            universe: self.universe,
            bits,
        }
    }

    pub fn intersection(&self, other: &StringSet) -> StringSet {
        self.check_same(other);
        let mut bits = self.bits.clone();
        bits.intersect_with(&other.bits);
        StringSet {
            universe: self.universe,
            bits,
        }
    }

    pub fn difference(&self, other: &StringSet) -> StringSet {
        self.check_same(other);
        let mut bits = self.bits.clone();
        bits.difference_with(&other.bits);
        StringSet {
            universe: self.universe,
            bits,
        }
    }

    pub fn complement(&self) -> StringSet {
        let mut bits = self.bits.clone();
        bits.toggle_range(..);
        StringSet {
            universe: self.universe,
            bits,
        }
    }

    pub fn difference_len(&self, other: &StringSet) -> usize {
        self.check_same(other);
        self.bits.difference(&other.bits).count()
    }

    pub fn is_subset(&self, other: &StringSet) -> bool {
        self.check_same(other);
        self.bits.is_subset(&other.bits)
    }

    fn check_same(&self, other: &StringSet) {
        assert_eq!(self.universe, other.universe, "string sets over different universes");
    }
}

impl std::fmt::Debug for StringSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}
