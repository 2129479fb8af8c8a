//! Enumerable step-budgeted machines.
//!
//! A program is a bit string over a complete prefix code of nine
//! instructions (see `docs/machine.md`). The machine owns a single binary tape
//! holding the input, plus a read-only blank cell just past the right end.
//! The head starts on the leftmost cell and never leaves `0..=n`.
//!
//! Every bit string decodes: a trailing partial instruction makes the whole
//! code invalid, and invalid codes diverge on every input.
//!
//! The configuration space on an input of length `n` is finite, so the
//! interpreter detects repeated configurations (Brent's algorithm) and reports
//! such runs as [`Outcome::OutOfBudget`] without burning the whole budget. The
//! reported outcome and `steps_used` are identical to a full-length run.

use std::fmt;
use std::sync::{Arc, OnceLock};

use thiserror::Error;

use crate::slices::DecidedSet;
use crate::universe::{nat_to_str, str_to_nat, BitString, StringSet, Universe, MAX_LEN};
use crate::verdict::{HorizonVerdict, Witness};

/// Width of jump targets in bits.
pub const TARGET_BITS: usize = 6;
/// Longest addressable program, in instructions.
pub const MAX_INSTRUCTIONS: usize = 1 << TARGET_BITS;
/// Default multiplier `a` in the budget `a * n^c`.
pub const DEFAULT_SCALE: u64 = 16;
/// Default cap on simulated steps per top-level operation.
pub const DEFAULT_STEP_CAP: u64 = 1_000_000;
pub const STEP_CAP_ENV: &str = "PARAMLAT_STEP_CAP";

/// The step cap, overridable through `PARAMLAT_STEP_CAP`.
pub fn global_step_cap() -> u64 {
    static CAP: OnceLock<u64> = OnceLock::new();
    *CAP.get_or_init(|| {
        std::env::var(STEP_CAP_ENV)
            .ok()
            .and_then(|v| v.trim().parse().ok())
            .unwrap_or(DEFAULT_STEP_CAP)
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MachineError {
    #[error("malformed program hex {0:?}")]
    BadHex(String),
    #[error("program has {0} instructions, at most {MAX_INSTRUCTIONS} are addressable")]
    TooLong(usize),
    #[error("jump target {0} out of range")]
    BadTarget(usize),
    #[error("step cap of {cap} exhausted after {used} simulated steps")]
    BudgetExhausted { used: u64, cap: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Instr {
    /// Halt with output 0.
    Reject,
    /// Halt with output 1.
    Accept,
    Right,
    Left,
    /// Halt, outputting the symbol under the head (blank gives no 0/1 output).
    Out,
    /// Complement the cell under the head; no effect on the blank cell.
    Flip,
    JumpBlank(u8),
    JumpOne(u8),
    Jump(u8),
}

impl Instr {
    fn encode_into(&self, out: &mut Vec<bool>) {
        let (prefix, target): (&[bool], Option<u8>) = match *self {
            Instr::Reject => (&[false, false], None),
            Instr::Accept => (&[false, true], None),
            Instr::Right => (&[true, false, false], None),
            Instr::Left => (&[true, false, true], None),
            Instr::Out => (&[true, true, false, false], None),
            Instr::Flip => (&[true, true, false, true, false], None),
            Instr::JumpBlank(t) => (&[true, true, false, true, true], Some(t)),
            Instr::JumpOne(t) => (&[true, true, true, false], Some(t)),
            Instr::Jump(t) => (&[true, true, true, true], Some(t)),
        };
        out.extend_from_slice(prefix);
        if let Some(t) = target {
            for i in (0..TARGET_BITS).rev() {
                out.push((t >> i) & 1 == 1);
            }
        }
    }
}

impl fmt::Display for Instr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Instr::Reject => f.write_str("REJ"),
            Instr::Accept => f.write_str("ACC"),
            Instr::Right => f.write_str("RIGHT"),
            Instr::Left => f.write_str("LEFT"),
            Instr::Out => f.write_str("OUT"),
            Instr::Flip => f.write_str("FLIP"),
            Instr::JumpBlank(t) => write!(f, "JB {t}"),
            Instr::JumpOne(t) => write!(f, "J1 {t}"),
            Instr::Jump(t) => write!(f, "JMP {t}"),
        }
    }
}

/// Parses a code; `None` when the code ends inside an instruction.
fn decode_instrs(code: &[bool]) -> Option<Vec<Instr>> {
    let mut out = Vec::new();
    let mut i = 0;
    let take = |i: &mut usize| -> Option<bool> {
        let b = code.get(*i).copied();
        *i += 1;
        b
    };
    let target = |i: &mut usize| -> Option<u8> {
        let mut t = 0u8;
        for _ in 0..TARGET_BITS {
            t = (t << 1) | take(i)? as u8;
        }
        Some(t)
    };
    while i < code.len() {
        let instr = match (take(&mut i)?, take(&mut i)?) {
            (false, false) => Instr::Reject,
            (false, true) => Instr::Accept,
            (true, false) => {
                if take(&mut i)? {
                    Instr::Left
                } else {
                    Instr::Right
                }
            }
            (true, true) => match (take(&mut i)?, take(&mut i)?) {
                (false, false) => Instr::Out,
                (false, true) => {
                    if take(&mut i)? {
                        Instr::JumpBlank(target(&mut i)?)
                    } else {
                        Instr::Flip
                    }
                }
                (true, false) => Instr::JumpOne(target(&mut i)?),
                (true, true) => Instr::Jump(target(&mut i)?),
            },
        };
        out.push(instr);
    }
    Some(out)
}

/// An encoded machine. Any bit sequence is a program.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Program {
    code: Vec<bool>,
    body: Option<Vec<Instr>>,
}

impl Program {
    pub fn decode(code: Vec<bool>) -> Program {
        let body = decode_instrs(&code);
        Program { code, body }
    }

    pub fn from_bitstring(x: &BitString) -> Program {
        Program::decode(x.bits().collect())
    }

    /// The `index`-th program of the enumeration (`index >= 1`); its code is
    /// the `index`-th string in length-lex order.
    pub fn from_index(index: u64) -> Program {
        let code = nat_to_str(index).expect("program index must be >= 1 and fit in 63 bits");
        Program::from_bitstring(&code)
    }

    /// Programs `1..=count` in enumeration order.
    pub fn enumerate(count: u64) -> impl Iterator<Item = Program> {
        (1..=count).map(Program::from_index)
    }

    /// Every program whose code has length at most `max_len`.
    pub fn all_up_to_len(max_len: usize) -> impl Iterator<Item = Program> {
        let count = (1u64 << (max_len + 1)) - 2;
        Program::enumerate(count)
    }

    pub fn assemble(instrs: &[Instr]) -> Result<Program, MachineError> {
        if instrs.len() > MAX_INSTRUCTIONS {
            return Err(MachineError::TooLong(instrs.len()));
        }
        let mut code = Vec::new();
        for ins in instrs {
            ins.encode_into(&mut code);
        }
        Ok(Program::decode(code))
    }

    pub fn code(&self) -> &[bool] {
        &self.code
    }

    pub fn code_len(&self) -> usize {
        self.code.len()
    }

    /// Position in the enumeration, when the code fits in a [`BitString`].
    pub fn index(&self) -> Option<u64> {
        if self.code.is_empty() || self.code.len() > MAX_LEN {
            return None;
        }
        BitString::from_bools(&self.code).ok().map(|x| str_to_nat(&x))
    }

    pub fn instructions(&self) -> Option<&[Instr]> {
        self.body.as_deref()
    }

    pub fn is_valid(&self) -> bool {
        self.body.is_some()
    }

    /// `<bit length>:<hex>`, bits left-aligned and zero-padded to a nibble.
    pub fn to_hex(&self) -> String {
        let mut hex = String::new();
        for chunk in self.code.chunks(4) {
            let mut v = 0u8;
            for i in 0..4 {
                v = (v << 1) | chunk.get(i).copied().unwrap_or(false) as u8;
            }
            hex.push(char::from_digit(v as u32, 16).unwrap());
        }
        format!("{}:{}", self.code.len(), hex)
    }

    pub fn from_hex(text: &str) -> Result<Program, MachineError> {
        let bad = || MachineError::BadHex(text.to_string());
        let (len, hex) = text.trim().split_once(':').ok_or_else(bad)?;
        let len: usize = len.parse().map_err(|_| bad())?;
        if hex.len() != len.div_ceil(4) {
            return Err(bad());
        }
        let mut code = Vec::with_capacity(hex.len() * 4);
        for ch in hex.chars() {
            let v = ch.to_digit(16).ok_or_else(bad)?;
            for i in (0..4).rev() {
                code.push((v >> i) & 1 == 1);
            }
        }
        if code[len..].iter().any(|&b| b) {
            return Err(bad());
        }
        code.truncate(len);
        Ok(Program::decode(code))
    }
}

impl fmt::Debug for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.body {
            Some(body) => {
                let listing: Vec<String> = body.iter().map(|i| i.to_string()).collect();
                write!(f, "Program[{}]({})", self.to_hex(), listing.join("; "))
            }
            None => write!(f, "Program[{}](invalid)", self.to_hex()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Outcome {
    Accept,
    Reject,
    /// Halted without a 0/1 output.
    Other,
    OutOfBudget,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RunOutcome {
    pub tag: Outcome,
    /// Steps charged against the budget; a divergent run is charged the full budget.
    pub steps_used: u64,
    /// Steps actually simulated; below `steps_used` when a cycle was detected.
    pub work: u64,
}

impl RunOutcome {
    pub fn new(tag: Outcome, steps_used: u64, work: u64) -> Self {
        RunOutcome { tag, steps_used, work }
    }

    pub fn other(work: u64) -> Self {
        RunOutcome::new(Outcome::Other, work, work)
    }

    /// `Some(bit)` when the run decided its input.
    pub fn decision(&self) -> Option<bool> {
        match self.tag {
            Outcome::Accept => Some(true),
            Outcome::Reject => Some(false),
            _ => None,
        }
    }

    pub fn decided(&self) -> bool {
        self.decision().is_some()
    }

    pub fn from_decision(bit: bool, steps: u64, work: u64) -> Self {
        let tag = if bit { Outcome::Accept } else { Outcome::Reject };
        RunOutcome::new(tag, steps, work)
    }
}

/// Runs `p` on `x` for at most `budget` steps. Deterministic.
pub fn run(p: &Program, x: &BitString, budget: u64) -> RunOutcome {
    let Some(body) = p.body.as_deref() else {
        return RunOutcome::new(Outcome::OutOfBudget, budget, 0);
    };
    let n = x.len();
    // Cell i is bit (n - 1 - i) of `tape`; head == n is the blank cell.
    let mut tape = x.value();
    let mut head = 0usize;
    let mut pc = 0usize;
    let mut steps = 0u64;
    let mut saved = (pc, head, tape);
    let mut power = 1u64;
    let mut lam = 0u64;
    loop {
        if pc >= body.len() {
            return RunOutcome::other(steps);
        }
        if steps >= budget {
            return RunOutcome::new(Outcome::OutOfBudget, budget, steps);
        }
        steps += 1;
        let read = (head < n).then(|| (tape >> (n - 1 - head)) & 1 == 1);
        pc = match body[pc] {
            Instr::Reject => return RunOutcome::new(Outcome::Reject, steps, steps),
            Instr::Accept => return RunOutcome::new(Outcome::Accept, steps, steps),
            Instr::Out => {
                let tag = match read {
                    Some(true) => Outcome::Accept,
                    Some(false) => Outcome::Reject,
                    None => Outcome::Other,
                };
                return RunOutcome::new(tag, steps, steps);
            }
            Instr::Right => {
                head = (head + 1).min(n);
                pc + 1
            }
            Instr::Left => {
                head = head.saturating_sub(1);
                pc + 1
            }
            Instr::Flip => {
                if head < n {
                    tape ^= 1 << (n - 1 - head);
                }
                pc + 1
            }
            Instr::JumpBlank(t) => {
                if read.is_none() {
                    t as usize
                } else {
                    pc + 1
                }
            }
            Instr::JumpOne(t) => {
                if read == Some(true) {
                    t as usize
                } else {
                    pc + 1
                }
            }
            Instr::Jump(t) => t as usize,
        };
        let config = (pc, head, tape);
        if config == saved {
            return RunOutcome::new(Outcome::OutOfBudget, budget, steps);
        }
        lam += 1;
        if lam == power {
            saved = config;
            power = power.saturating_mul(2);
            lam = 0;
        }
    }
}

/// Anything that answers 0, 1, or nothing on each input within its own bound.
pub trait PartialDecider: Send + Sync {
    fn name(&self) -> String;
    fn decide(&self, x: &BitString) -> RunOutcome;
}

impl<T: PartialDecider + ?Sized> PartialDecider for Arc<T> {
    fn name(&self) -> String {
        (**self).name()
    }
    fn decide(&self, x: &BitString) -> RunOutcome {
        (**self).decide(x)
    }
}

impl<T: PartialDecider + ?Sized> PartialDecider for &T {
    fn name(&self) -> String {
        (**self).name()
    }
    fn decide(&self, x: &BitString) -> RunOutcome {
        (**self).decide(x)
    }
}

/// A program with a polynomial step budget `scale * n^exponent`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Approximation {
    pub program: Arc<Program>,
    pub exponent: u32,
    pub scale: u64,
}

impl Approximation {
    pub fn new(program: Program, exponent: u32, scale: u64) -> Self {
        Approximation {
            program: Arc::new(program),
            exponent,
            scale,
        }
    }

    /// Budget on inputs of length `n`, saturating at `u64::MAX`.
    pub fn budget(&self, n: usize) -> u64 {
        poly_budget(self.scale, n, self.exponent)
    }
}

/// `scale * n^exponent`, saturating.
pub fn poly_budget(scale: u64, n: usize, exponent: u32) -> u64 {
    (n as u64)
        .checked_pow(exponent)
        .and_then(|p| p.checked_mul(scale))
        .unwrap_or(u64::MAX)
}

/// Restricts `p` to `DEFAULT_SCALE * n^c` steps.
pub fn restrict(p: Program, c: u32) -> Approximation {
    assert!(c >= 1, "restriction exponent must be >= 1");
    Approximation::new(p, c, DEFAULT_SCALE)
}

impl PartialDecider for Approximation {
    fn name(&self) -> String {
        format!("{}@n^{}x{}", self.program.to_hex(), self.exponent, self.scale)
    }

    fn decide(&self, x: &BitString) -> RunOutcome {
        run(&self.program, x, self.budget(x.len()))
    }
}

/// `{x in u : d decides x}`.
pub fn domain(d: &dyn PartialDecider, u: Universe) -> StringSet {
    StringSet::from_predicate(u, |x| d.decide(x).decided())
}

/// Holds iff every 0/1 answer of `d` on `u` agrees with `set`; fails on the
/// first disagreement in length-lex order.
pub fn is_approximation_for(d: &dyn PartialDecider, set: &DecidedSet, u: Universe) -> HorizonVerdict {
    for x in u.iter() {
        if let Some(bit) = d.decide(&x).decision() {
            if bit != set.decide(&x) {
                return HorizonVerdict::fails(Witness::at(
                    x,
                    format!(
                        "{} answers {} but {} says {}",
                        d.name(),
                        bit as u8,
                        set.name(),
                        !bit as u8
                    ),
                ));
            }
        }
    }
    HorizonVerdict::holds()
}

/// Counts simulated work against a cap.
#[derive(Debug, Clone, Copy)]
pub struct StepMeter {
    used: u64,
    cap: u64,
}

impl StepMeter {
    pub fn new(cap: u64) -> Self {
        StepMeter { used: 0, cap }
    }

    pub fn with_global_cap() -> Self {
        StepMeter::new(global_step_cap())
    }

    pub fn charge(&mut self, work: u64) -> Result<(), MachineError> {
        self.used = self.used.saturating_add(work);
        if self.used > self.cap {
            Err(MachineError::BudgetExhausted {
                used: self.used,
                cap: self.cap,
            })
        } else {
            Ok(())
        }
    }

    pub fn used(&self) -> u64 {
        self.used
    }

    pub fn cap(&self) -> u64 {
        self.cap
    }
}

/// Hand-assembled programs used throughout the workbench.
pub mod library {
    use super::{Instr, Program};
    use Instr::*;

    fn asm(instrs: &[Instr]) -> Program {
        Program::assemble(instrs).expect("library programs fit the address space")
    }

    pub fn reject_all() -> Program {
        asm(&[Reject])
    }

    pub fn accept_all() -> Program {
        asm(&[Accept])
    }

    /// `JMP 0`.
    pub fn diverger() -> Program {
        asm(&[Jump(0)])
    }

    /// Halts without an answer.
    pub fn silent() -> Program {
        asm(&[Jump(63)])
    }

    /// Accepts iff the first bit is 1.
    pub fn first_bit() -> Program {
        asm(&[Out])
    }

    fn parity_body(base: u8) -> Vec<Instr> {
        let b = base;
        vec![
            JumpBlank(b + 9),
            JumpOne(b + 4),
            Right,
            Jump(b),
            Right,
            JumpBlank(b + 10),
            JumpOne(b + 2),
            Right,
            Jump(b + 5),
            Reject,
            Accept,
        ]
    }

    /// Accepts iff the input has an odd number of ones.
    pub fn parity() -> Program {
        asm(&parity_body(0))
    }

    /// What a gated program runs once its gates pass, head on cell 0.
    #[derive(Debug, Clone, Copy, PartialEq, Eq)]
    pub enum Body {
        Reject,
        Accept,
        Parity,
        FirstBit,
    }

    /// Runs `body` on inputs whose first bit equals `first` (when given) and
    /// whose length is at most `max_len` (when given); halts without an
    /// answer on every other input.
    pub fn gated(first: Option<bool>, max_len: Option<usize>, body: Body) -> Program {
        let mut v = Vec::new();
        match first {
            Some(false) => v.push(JumpOne(63)),
            Some(true) => v.extend([JumpOne(2), Jump(63)]),
            None => {}
        }
        if let Some(j) = max_len {
            let base = v.len();
            v.extend(std::iter::repeat_n(Right, j));
            v.push(JumpBlank((base + j + 2) as u8));
            v.push(Jump(63));
            v.extend(std::iter::repeat_n(Left, j));
        }
        let base = v.len() as u8;
        match body {
            Body::Reject => v.push(Reject),
            Body::Accept => v.push(Accept),
            Body::FirstBit => v.push(Out),
            Body::Parity => v.extend(parity_body(base)),
        }
        assert!(v.len() < 64, "gated program too long; jump 63 must fall off");
        asm(&v)
    }

    /// Rejects inputs of length at most `j`; no answer otherwise.
    pub fn bounded_reject(j: usize) -> Program {
        gated(None, Some(j), Body::Reject)
    }

    /// Decides parity on inputs of length at most `j`; no answer otherwise.
    pub fn bounded_parity(j: usize) -> Program {
        gated(None, Some(j), Body::Parity)
    }

    /// Outputs the first bit on inputs of length at most `j`.
    pub fn bounded_first_bit(j: usize) -> Program {
        gated(None, Some(j), Body::FirstBit)
    }

    /// Largest `j` accepted by [`bounded_parity`].
    pub const MAX_BOUNDED_PARITY: usize = 25;
}

#[cfg(test)]
mod tests {
    use super::library::*;
    use super::*;

    fn s(x: &str) -> BitString {
        x.parse().unwrap()
    }

    #[test]
    fn constant_machines() {
        let r = run(&reject_all(), &s("0110"), 100);
        assert_eq!(r.tag, Outcome::Reject);
        assert_eq!(r.steps_used, 1);
        assert_eq!(run(&accept_all(), &s("1"), 100).tag, Outcome::Accept);
        let d = run(&diverger(), &s("1"), 100);
        assert_eq!(d.tag, Outcome::OutOfBudget);
        assert_eq!(d.steps_used, 100);
        assert!(d.work < 100);
    }

    #[test]
    fn invalid_codes_diverge() {
        // "1" stops inside an instruction.
        let p = Program::from_index(2);
        assert!(!p.is_valid());
        assert_eq!(run(&p, &s("0"), 50).tag, Outcome::OutOfBudget);
        assert_eq!(Program::from_index(3).instructions(), Some(&[Instr::Reject][..]));
    }

    #[test]
    fn parity_hand_traced() {
        // "101": JB, J1->4, RIGHT, JB, J1 no, RIGHT, JMP 5, JB, J1->2,
        // RIGHT, JMP 0, JB -> 9, REJ = 13 steps.
        let r = run(&parity(), &s("101"), 10_000);
        assert_eq!(r.tag, Outcome::Reject);
        assert_eq!(r.steps_used, 13);
        assert_eq!(run(&parity(), &s("100"), 10_000).tag, Outcome::Accept);
        for x in Universe::new(8).unwrap().iter() {
            let want = x.count_ones() % 2 == 1;
            assert_eq!(run(&parity(), &x, 10_000).decision(), Some(want), "{x}");
        }
    }

    #[test]
    fn bounded_deciders() {
        let u = Universe::new(7).unwrap();
        for j in 1..=6 {
            let p = bounded_parity(j);
            let r = bounded_reject(j);
            for x in u.iter() {
                let want = (x.len() <= j).then(|| x.count_ones() % 2 == 1);
                assert_eq!(run(&p, &x, 100_000).decision(), want, "j={j} x={x}");
                let want = (x.len() <= j).then_some(false);
                assert_eq!(run(&r, &x, 100_000).decision(), want);
            }
        }
        assert!(Program::assemble(&[Instr::Right; MAX_INSTRUCTIONS + 1]).is_err());
        for first in [None, Some(false), Some(true)] {
            let p = gated(first, Some(3), Body::Accept);
            for x in u.iter() {
                let pass = x.len() <= 3 && first.is_none_or(|b| x.bit(0) == b);
                assert_eq!(run(&p, &x, 100_000).decision(), pass.then_some(true), "{x}");
            }
        }
        let _ = bounded_parity(MAX_BOUNDED_PARITY);
    }

    #[test]
    fn budget_is_respected() {
        let p = parity();
        let r = run(&p, &s("10101010"), 5);
        assert_eq!(r.tag, Outcome::OutOfBudget);
        assert_eq!(r.steps_used, 5);
        assert_eq!(run(&reject_all(), &s("0"), 0).tag, Outcome::OutOfBudget);
    }

    #[test]
    fn restrict_budget_formula() {
        let a = restrict(parity(), 1);
        assert_eq!(a.budget(8), DEFAULT_SCALE * 8);
        assert_eq!(poly_budget(16, 10, 40), u64::MAX);
        let u = Universe::new(6).unwrap();
        assert!(domain(&restrict(diverger(), 5), u).is_empty());
        assert_eq!(domain(&restrict(reject_all(), 1), u).len(), u.size());
    }

    #[test]
    fn restriction_domains_are_monotone() {
        let u = Universe::new(8).unwrap();
        for p in Program::enumerate(64) {
            let d2 = domain(&restrict(p.clone(), 2), u);
            let d3 = domain(&restrict(p, 3), u);
            assert!(d2.is_subset(&d3));
        }
    }

    #[test]
    fn parity_domain_at_small_budget() {
        // The parity machine needs at most 4n + 2 steps, within 8 n^2.
        let u = Universe::new(4).unwrap();
        let a = Approximation::new(parity(), 2, 8);
        assert_eq!(domain(&a, u).len(), u.size());
        // Every run takes at least 5 steps.
        let tight = Approximation::new(parity(), 1, 1);
        assert!(domain(&tight, u).is_empty());
    }

    #[test]
    fn enumeration_round_trip() {
        for i in 1..=(1u64 << 12) {
            assert_eq!(Program::from_index(i).index(), Some(i));
        }
    }

    #[test]
    fn documented_examples() {
        assert!(!Program::from_index(1).is_valid());
        assert_eq!(Program::from_index(4).instructions(), Some(&[Instr::Accept][..]));
        assert_eq!(accept_all().to_hex(), "2:4");
        assert_eq!(parity().code_len(), 75);
        assert_eq!(Program::all_up_to_len(3).count(), 14);
    }

    #[test]
    fn hex_round_trip() {
        for p in [parity(), reject_all(), Program::from_index(77), bounded_parity(5)] {
            let back = Program::from_hex(&p.to_hex()).unwrap();
            assert_eq!(back, p);
        }
        assert!(Program::from_hex("3:f").is_err());
        assert!(Program::from_hex("nonsense").is_err());
    }

    #[test]
    fn determinism_over_enumeration() {
        let u = Universe::new(5).unwrap();
        for p in Program::enumerate(300) {
            for x in u.iter() {
                assert_eq!(run(&p, &x, 500), run(&p, &x, 500));
            }
        }
    }

    #[test]
    fn cycle_detection_matches_full_run() {
        // Reference interpreter without cycle detection; compare outcomes.
        fn slow(p: &Program, x: &BitString, budget: u64) -> (Outcome, u64) {
            let Some(body) = p.instructions() else {
                return (Outcome::OutOfBudget, budget);
            };
            let n = x.len();
            let mut tape: Vec<bool> = x.bits().collect();
            let (mut pc, mut head, mut steps) = (0usize, 0usize, 0u64);
            loop {
                if pc >= body.len() {
                    return (Outcome::Other, steps);
                }
                if steps >= budget {
                    return (Outcome::OutOfBudget, budget);
                }
                steps += 1;
                let read = tape.get(head).copied();
                pc = match body[pc] {
                    Instr::Reject => return (Outcome::Reject, steps),
                    Instr::Accept => return (Outcome::Accept, steps),
                    Instr::Out => {
                        return match read {
                            Some(true) => (Outcome::Accept, steps),
                            Some(false) => (Outcome::Reject, steps),
                            None => (Outcome::Other, steps),
                        }
                    }
                    Instr::Right => {
                        head = (head + 1).min(n);
                        pc + 1
                    }
                    Instr::Left => {
                        head = head.saturating_sub(1);
                        pc + 1
                    }
                    Instr::Flip => {
                        if head < n {
                            tape[head] = !tape[head];
                        }
                        pc + 1
                    }
                    Instr::JumpBlank(t) if read.is_none() => t as usize,
                    Instr::JumpOne(t) if read == Some(true) => t as usize,
                    Instr::Jump(t) => t as usize,
                    _ => pc + 1,
                };
            }
        }
        let u = Universe::new(4).unwrap();
        let mut programs: Vec<Program> = (1000..1400).map(Program::from_index).collect();
        programs.extend([parity(), bounded_parity(2), diverger()]);
        for p in &programs {
            for x in u.iter() {
                let fast = run(p, &x, 3000);
                assert_eq!((fast.tag, fast.steps_used), slow(p, &x, 3000), "{p:?} on {x}");
            }
        }
    }
}
