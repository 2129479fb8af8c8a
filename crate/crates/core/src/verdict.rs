//! Horizon-bounded answers.
//!
//! Every check in the workbench runs against a finite horizon and says so:
//! a verdict either holds at the horizon, fails with a concrete witness, or
//! is unresolved because the horizon was too small to tell.

use std::fmt;

use crate::universe::{BitString, Universe, UniverseError, MAX_LEN};

/// Finite bounds for a check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Horizon {
    pub universe: Universe,
    /// Parameters are considered up to size `mu`.
    pub mu: usize,
    /// Larger parameter bound used when a check needs to look past `mu`.
    pub ext: usize,
    pub threshold: usize,
}

impl Horizon {
    pub fn new(universe_len: usize, mu: usize, threshold: usize) -> Result<Self, UniverseError> {
        Ok(Horizon {
            universe: Universe::new(universe_len)?,
            mu,
            ext: (2 * mu).min(MAX_LEN),
            threshold,
        })
    }

    pub fn with_ext(mut self, ext: usize) -> Self {
        self.ext = ext.max(self.mu);
        self
    }

    /// The horizon every acceptance criterion runs at: universe of strings up
    /// to length 8, parameters up to size 12, threshold 4.
    pub fn standard() -> Self {
        Horizon::new(8, 12, 4).expect("standard horizon is valid")
    }
}

impl fmt::Display for Horizon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "L={} H={} ext={} t={}",
            self.universe.max_len(),
            self.mu,
            self.ext,
            self.threshold
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    pub x: Option<BitString>,
    pub detail: String,
}

impl Witness {
    pub fn at(x: BitString, detail: impl Into<String>) -> Self {
        Witness {
            x: Some(x),
            detail: detail.into(),
        }
    }

    pub fn note(detail: impl Into<String>) -> Self {
        Witness {
            x: None,
            detail: detail.into(),
        }
    }
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.x {
            Some(x) => write!(f, "x={x}: {}", self.detail),
            None => f.write_str(&self.detail),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Holds,
    Fails(Witness),
    Unresolved(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HorizonVerdict {
    pub verdict: Verdict,
    pub horizon: Option<Horizon>,
}

impl HorizonVerdict {
    pub fn holds() -> Self {
        HorizonVerdict {
            verdict: Verdict::Holds,
            horizon: None,
        }
    }

    pub fn fails(w: Witness) -> Self {
        HorizonVerdict {
            verdict: Verdict::Fails(w),
            horizon: None,
        }
    }

    pub fn unresolved(reason: impl Into<String>) -> Self {
        HorizonVerdict {
            verdict: Verdict::Unresolved(reason.into()),
            horizon: None,
        }
    }

    pub fn from_bool(ok: bool, on_fail: impl FnOnce() -> Witness) -> Self {
        if ok {
            Self::holds()
        } else {
            Self::fails(on_fail())
        }
    }

    pub fn at(mut self, h: Horizon) -> Self {
        self.horizon = Some(h);
        self
    }

    pub fn is_holds(&self) -> bool {
        self.verdict == Verdict::Holds
    }

    pub fn is_fails(&self) -> bool {
        matches!(self.verdict, Verdict::Fails(_))
    }

    pub fn is_unresolved(&self) -> bool {
        matches!(self.verdict, Verdict::Unresolved(_))
    }

    pub fn witness(&self) -> Option<&Witness> {
        match &self.verdict {
            Verdict::Fails(w) => Some(w),
            _ => None,
        }
    }

    /// First failing or unresolved verdict, else holds.
    pub fn all(items: impl IntoIterator<Item = HorizonVerdict>) -> Self {
        let mut unresolved = None;
        for v in items {
            match v.verdict {
                Verdict::Holds => {}
                Verdict::Fails(_) => return v,
                Verdict::Unresolved(_) => {
                    unresolved.get_or_insert(v);
                }
            }
        }
        unresolved.unwrap_or_else(Self::holds)
    }

    pub fn label(&self) -> &'static str {
        match self.verdict {
            Verdict::Holds => "holds",
            Verdict::Fails(_) => "fails",
            Verdict::Unresolved(_) => "unresolved",
        }
    }
}

impl fmt::Display for HorizonVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())?;
        match &self.verdict {
            Verdict::Holds => {}
            Verdict::Fails(w) => write!(f, " [{w}]")?,
            Verdict::Unresolved(r) => write!(f, " [{r}]")?,
        }
        if let Some(h) = &self.horizon {
            write!(f, " ({h})")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn combine_prefers_failure() {
        let f = HorizonVerdict::fails(Witness::note("bad"));
        let u = HorizonVerdict::unresolved("small");
        assert!(HorizonVerdict::all([HorizonVerdict::holds(), u.clone(), f.clone()]).is_fails());
        assert!(HorizonVerdict::all([u, HorizonVerdict::holds()]).is_unresolved());
        assert!(HorizonVerdict::all(Vec::new()).is_holds());
    }

    #[test]
    fn display_echoes_horizon() {
        let v = HorizonVerdict::holds().at(Horizon::standard());
        assert_eq!(v.to_string(), "holds (L=8 H=12 ext=24 t=4)");
    }
}
