//! Universal search over certified approximations.
//!
//! A certificate stands in for a proof that a program is an approximation
//! for a set: it records the program's answers on the first `N` strings in
//! length-lex order and is verified by replaying them against the set's
//! reference decider. On parameter `k` the search runs, in registry order,
//! every verified entry whose program and certificate both have length at
//! most `k`, and returns the first 0/1 answer.

use std::fmt;

use thiserror::Error;

use crate::machines::{poly_budget, run, Approximation, MachineError, Outcome, PartialDecider, Program, RunOutcome};
use crate::slices::{harvest_approximations, DecidedSet};
use crate::universe::{binary_len, nat_to_str, BitString, StringSet, Universe};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SearchError {
    #[error("certificate for {0} has not been verified")]
    UnverifiedCertificate(String),
    #[error("certificate for {program} fails at {x}: {detail}")]
    Rejected {
        program: String,
        x: BitString,
        detail: String,
    },
    #[error("registry line {line}: {detail}")]
    Parse { line: usize, detail: String },
    #[error(transparent)]
    Machine(#[from] MachineError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Certificate {
    pub program: Program,
    pub exponent: u32,
    pub scale: u64,
    /// `0`, `1` or `-` (no answer) for each of the first strings.
    pub transcript: String,
    verified: bool,
}

impl Certificate {
    /// Records the program's answers on the first `count` strings.
    pub fn record(program: Program, exponent: u32, scale: u64, count: u64) -> Self {
        let transcript = (1..=count)
            .map(|i| {
                let x = nat_to_str(i).expect("transcript index fits");
                match run(&program, &x, poly_budget(scale, x.len(), exponent)).decision() {
                    Some(true) => '1',
                    Some(false) => '0',
                    None => '-',
                }
            })
            .collect();
        Certificate {
            program,
            exponent,
            scale,
            transcript,
            verified: false,
        }
    }

    /// Records and verifies in one go.
    pub fn issue(
        program: Program,
        exponent: u32,
        scale: u64,
        count: u64,
        set: &DecidedSet,
    ) -> Result<Self, SearchError> {
        let mut c = Certificate::record(program, exponent, scale, count);
        c.verify(set)?;
        Ok(c)
    }

    pub fn is_verified(&self) -> bool {
        self.verified
    }

    pub fn approximation(&self) -> Approximation {
        Approximation::new(self.program.clone(), self.exponent, self.scale)
    }

    /// Encoded length: two bits per transcript entry plus a self-delimiting
    /// length header.
    pub fn len(&self) -> usize {
        let n = self.transcript.len();
        2 * n + 2 * (binary_len(n as u64) + 1)
    }

    pub fn is_empty(&self) -> bool {
        self.transcript.is_empty()
    }

    /// Replays every entry: the program must give exactly the recorded
    /// answer, and every recorded 0/1 must agree with the set.
    pub fn verify(&mut self, set: &DecidedSet) -> Result<(), SearchError> {
        self.verified = false;
        let approx = self.approximation();
        for (i, ch) in self.transcript.chars().enumerate() {
            let x = nat_to_str(i as u64 + 1).expect("transcript index fits");
            let got = approx.decide(&x).decision();
            let recorded = match ch {
                '1' => Some(true),
                '0' => Some(false),
                '-' => None,
                _ => return Err(self.reject(x, format!("bad transcript symbol {ch:?}"))),
            };
            if got != recorded {
                return Err(self.reject(x, format!("recorded {recorded:?}, replay gives {got:?}")));
            }
            if let Some(bit) = got {
                if bit != set.decide(&x) {
                    return Err(self.reject(x, format!("answers {} against the set", bit as u8)));
                }
            }
        }
        self.verified = true;
        Ok(())
    }

    fn reject(&self, x: BitString, detail: String) -> SearchError {
        SearchError::Rejected {
            program: self.program.to_hex(),
            x,
            detail,
        }
    }

    /// `cert <bitlen>:<hex> <exponent> <scale> <transcript>`
    pub fn to_line(&self) -> String {
        format!(
            "cert {} {} {} {}",
            self.program.to_hex(),
            self.exponent,
            self.scale,
            self.transcript
        )
    }
}

impl fmt::Display for Certificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_line())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Registry {
    pub entries: Vec<Certificate>,
}

impl Registry {
    pub fn parse(text: &str) -> Result<Self, SearchError> {
        let mut entries = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |detail: &str| SearchError::Parse {
                line: n + 1,
                detail: detail.to_string(),
            };
            let parts: Vec<&str> = line.split_whitespace().collect();
            let [tag, prog, exponent, scale, rest @ ..] = parts.as_slice() else {
                return Err(bad("expected: cert <program> <exponent> <scale> <transcript>"));
            };
            if *tag != "cert" || rest.len() > 1 {
                return Err(bad("expected: cert <program> <exponent> <scale> <transcript>"));
            }
            entries.push(Certificate {
                program: Program::from_hex(prog).map_err(|e| bad(&e.to_string()))?,
                exponent: exponent.parse().map_err(|_| bad("bad exponent"))?,
                scale: scale.parse().map_err(|_| bad("bad scale"))?,
                transcript: rest.first().unwrap_or(&"").to_string(),
                verified: false,
            });
        }
        Ok(Registry { entries })
    }

    pub fn to_text(&self) -> String {
        self.entries.iter().map(|c| c.to_line() + "\n").collect()
    }

    pub fn verify_all(&mut self, set: &DecidedSet) -> Result<(), SearchError> {
        self.entries.iter_mut().try_for_each(|c| c.verify(set))
    }

    /// Certificates covering all of `u` for each program that is an
    /// approximation for `set` there.
    pub fn issue_for(set: &DecidedSet, u: Universe, programs: &[(Program, u32)], scale: u64) -> Self {
        let count = u.size() as u64;
        let entries = programs
            .iter()
            .filter_map(|(p, c)| Certificate::issue(p.clone(), *c, scale, count, set).ok())
            .collect();
        Registry { entries }
    }
}

/// Runs the registry entries admitted at parameter `k`; the first 0/1 answer
/// wins.
pub fn universal_search_decide(x: &BitString, k: usize, registry: &Registry) -> Result<RunOutcome, SearchError> {
    if let Some(c) = registry.entries.iter().find(|c| !c.is_verified()) {
        return Err(SearchError::UnverifiedCertificate(c.program.to_hex()));
    }
    let mut steps = 0u64;
    let mut work = 0u64;
    for c in registry
        .entries
        .iter()
        .filter(|c| c.program.code_len() <= k && c.len() <= k)
    {
        let r = c.approximation().decide(x);
        steps = steps.saturating_add(r.steps_used);
        work += r.work;
        if let Some(bit) = r.decision() {
            return Ok(RunOutcome::from_decision(bit, steps, work));
        }
    }
    Ok(RunOutcome::new(Outcome::Other, steps, work))
}

/// Slice of the search at parameter `k`.
pub fn search_slice(k: usize, registry: &Registry, u: Universe) -> Result<StringSet, SearchError> {
    let mut out = StringSet::empty(u);
    for x in u.iter() {
        if universal_search_decide(&x, k, registry)?.decided() {
            out.insert(&x);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DominanceRow {
    pub program: String,
    /// `|program| + |certificate|`.
    pub entry_len: usize,
    /// Least `k` whose search slice contains the entry's domain.
    pub first_k: usize,
    /// `first_k - entry_len`.
    pub constant: i64,
    /// The inclusion still holds for every `k` from `first_k` to `entry_len`.
    pub stable: bool,
}

/// Least `k` at which an entry is admitted to the search.
fn admission(c: &Certificate) -> usize {
    c.program.code_len().max(c.len())
}

/// For each entry, the least `k` at which the search slice contains the
/// entry's own domain on `u`. The slice only changes where some entry is
/// admitted, so it is computed at those points alone.
pub fn dominance_check(registry: &Registry, u: Universe) -> Result<Vec<DominanceRow>, SearchError> {
    let mut ks: Vec<usize> = registry.entries.iter().map(admission).collect();
    ks.push(0);
    ks.sort_unstable();
    ks.dedup();
    let mut slices = Vec::with_capacity(ks.len());
    for &k in &ks {
        slices.push(search_slice(k, registry, u)?);
    }
    // The slice in force at `k`.
    let at = |k: usize| &slices[ks.partition_point(|&t| t <= k) - 1];
    let mut rows = Vec::new();
    for c in &registry.entries {
        let dom = crate::machines::domain(&c.approximation(), u);
        let entry_len = c.program.code_len() + c.len();
        let first_k = ks.iter().copied().find(|&k| dom.is_subset(at(k))).unwrap_or(usize::MAX);
        let stable = first_k <= entry_len
            && ks
                .iter()
                .filter(|&&k| k >= first_k && k <= entry_len)
                .all(|&k| dom.is_subset(at(k)));
        rows.push(DominanceRow {
            program: c.program.to_hex(),
            entry_len,
            first_k,
            constant: first_k as i64 - entry_len as i64,
            stable,
        });
    }
    Ok(rows)
}

/// CSV with columns `program,entry_len,first_k,constant,stable`.
pub fn dominance_csv(rows: &[DominanceRow]) -> String {
    let mut out = String::from("program,entry_len,first_k,constant,stable\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.program, r.entry_len, r.first_k, r.constant, r.stable
        ));
    }
    out
}

/// Certificates over all of `u` for harvested approximations of `set` at
/// exponent 2.
pub fn default_registry(set: &DecidedSet, u: Universe, count: usize) -> Registry {
    let entries = harvest_approximations(set, u, 2, 256, count)
        .into_iter()
        .filter_map(|(a, _)| Certificate::issue((*a.program).clone(), a.exponent, a.scale, u.size() as u64, set).ok())
        .collect();
    Registry { entries }
}
