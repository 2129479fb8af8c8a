//! A set that diagonalizes against polynomial-time machines in polynomial
//! time.
//!
//! On the string `s` with code `z = <c, x>` the decider keeps the candidate
//! indices `I = {1, ..., |s|}`, drops every `i` whose run at budget `n^(2c)`
//! answers against the set on some `<d, y>` with `d <= c` and `y <= |s|`,
//! and then returns the inverted answer of the first remaining index that
//! answers on `s` itself; 0 if none does. Inputs with `c = 0` are out.
//!
//! A checked point `<d, y>` is skipped unless its code is below `z`; this
//! keeps the recursion well-founded for small `x`. A run that gives no 0/1
//! answer on a checked point does not remove its index.

use std::collections::{BTreeSet, HashMap};
use std::sync::Mutex;

use crate::machines::{global_step_cap, poly_budget, run, MachineError, Outcome, Program, RunOutcome, StepMeter};
use crate::slices::DecidedSet;
use crate::universe::{
    cantor_unpair, checked_cantor_pair, code_to_string, string_to_code, BitString, PairCode, Universe,
};

/// Default multiplier for the diagonal budget `scale * n^(2c)`.
pub const DIAG_SCALE: u64 = 1;

/// What happened while deciding one input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiagTrace {
    pub code: u64,
    pub c: u64,
    /// Size of the initial candidate set.
    pub initial: u64,
    /// `(index, checked code)` for each index dropped in the first stage.
    pub removed: Vec<(u64, u64)>,
    /// The index whose answer the second stage inverted, with that answer.
    pub inverted: Option<(u64, bool)>,
    pub value: bool,
}

struct State {
    memo: HashMap<u64, bool>,
    runs: HashMap<(u64, u64), RunOutcome>,
    programs: HashMap<u64, Program>,
    meter: StepMeter,
}

pub struct DiagonalSet {
    scale: u64,
    state: Mutex<State>,
}

impl Default for DiagonalSet {
    fn default() -> Self {
        DiagonalSet::new(DIAG_SCALE, global_step_cap())
    }
}

impl DiagonalSet {
    pub fn new(scale: u64, cap: u64) -> Self {
        DiagonalSet {
            scale,
            state: Mutex::new(State {
                memo: HashMap::new(),
                runs: HashMap::new(),
                programs: HashMap::new(),
                meter: StepMeter::new(cap),
            }),
        }
    }

    pub fn scale(&self) -> u64 {
        self.scale
    }

    /// Steps simulated so far, across all calls.
    pub fn steps_used(&self) -> u64 {
        self.state.lock().unwrap().meter.used()
    }

    pub fn decide(&self, s: &BitString) -> Result<bool, MachineError> {
        self.decide_code(string_to_code(s))
    }

    pub fn decide_code(&self, z: PairCode) -> Result<bool, MachineError> {
        let mut st = self.state.lock().unwrap();
        self.value(&mut st, z.0)
    }

    /// Decides `z` and reports both stages. Shares the memo with `decide`.
    pub fn trace(&self, z: PairCode) -> Result<DiagTrace, MachineError> {
        let mut st = self.state.lock().unwrap();
        self.evaluate(&mut st, z.0)
    }

    /// Answer of `phi_i` on the string with code `w` at exponent `e`, using
    /// and filling the run cache.
    pub fn machine_answer(&self, i: u64, w: u64, exponent: u32) -> Result<Option<bool>, MachineError> {
        let mut st = self.state.lock().unwrap();
        self.answer(&mut st, i, w, exponent).map(|r| r.decision())
    }

    /// The set as a table over `u`, failing if the step cap runs out.
    pub fn table(&self, u: Universe) -> Result<DecidedSet, MachineError> {
        let mut values = HashMap::new();
        for s in u.iter() {
            values.insert(s, self.decide(&s)?);
        }
        Ok(DecidedSet::new("diagonal", move |x| {
            values.get(x).copied().unwrap_or(false)
        }))
    }

    fn value(&self, st: &mut State, z: u64) -> Result<bool, MachineError> {
        if let Some(&v) = st.memo.get(&z) {
            return Ok(v);
        }
        Ok(self.evaluate(st, z)?.value)
    }

    fn evaluate(&self, st: &mut State, z: u64) -> Result<DiagTrace, MachineError> {
        let (c, _) = cantor_unpair(PairCode(z));
        let n = code_to_string(PairCode(z)).expect("code fits").len() as u64;
        let mut trace = DiagTrace {
            code: z,
            c,
            initial: n,
            removed: Vec::new(),
            inverted: None,
            value: false,
        };
        if c == 0 {
            st.memo.insert(z, false);
            return Ok(trace);
        }
        let exponent = u32::try_from(2 * c).unwrap_or(u32::MAX);
        let mut alive: BTreeSet<u64> = (1..=n).collect();
        'points: for d in 1..=c {
            for y in 1..=n {
                let Some(w) = checked_cantor_pair(d, y).map(|p| p.0) else {
                    continue;
                };
                if w >= z {
                    // Codes grow with y, so the rest of this row is skipped too.
                    continue 'points;
                }
                if alive.is_empty() {
                    break 'points;
                }
                let target = self.value(st, w)?;
                let mut dropped = Vec::new();
                for &i in &alive {
                    if let Some(bit) = self.answer(st, i, w, exponent)?.decision() {
                        if bit != target {
                            dropped.push(i);
                        }
                    }
                }
                for i in dropped {
                    alive.remove(&i);
                    trace.removed.push((i, w));
                }
            }
        }
        for &i in &alive {
            if let Some(bit) = self.answer(st, i, z, exponent)?.decision() {
                trace.inverted = Some((i, bit));
                trace.value = !bit;
                break;
            }
        }
        st.memo.insert(z, trace.value);
        Ok(trace)
    }

    fn answer(&self, st: &mut State, i: u64, w: u64, exponent: u32) -> Result<RunOutcome, MachineError> {
        let s = code_to_string(PairCode(w)).expect("code fits");
        let budget = poly_budget(self.scale, s.len(), exponent);
        if let Some(prev) = st.runs.get(&(i, w)) {
            if let Some(r) = restrict_outcome(prev, budget) {
                return Ok(r);
            }
        }
        let p = st.programs.entry(i).or_insert_with(|| Program::from_index(i)).clone();
        let r = run(&p, &s, budget);
        st.meter.charge(r.work)?;
        st.runs.insert((i, w), r);
        Ok(RunOutcome::new(r.tag, r.steps_used, 0))
    }
}

/// The outcome at a smaller budget, derived from a run at a larger one;
/// `None` when the stored run is too short to tell.
fn restrict_outcome(prev: &RunOutcome, budget: u64) -> Option<RunOutcome> {
    match prev.tag {
        Outcome::Accept | Outcome::Reject | Outcome::Other => {
            if prev.steps_used <= budget {
                Some(RunOutcome::new(prev.tag, prev.steps_used, 0))
            } else {
                Some(RunOutcome::new(Outcome::OutOfBudget, budget, 0))
            }
        }
        Outcome::OutOfBudget => {
            // A detected cycle never ends; an exhausted budget may.
            let cycled = prev.work < prev.steps_used;
            (cycled || budget <= prev.steps_used).then(|| RunOutcome::new(Outcome::OutOfBudget, budget, 0))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EventKind {
    /// The second stage inverted this machine's own answer.
    Inversion,
    /// The first stage dropped this machine for disagreeing with the set.
    SelfRemoval,
    /// A smaller index was dropped or inverted instead.
    Cascade { smaller: u64 },
    /// Nothing happened to this machine or any smaller index.
    Pending,
}

impl EventKind {
    pub fn label(&self) -> String {
        match self {
            EventKind::Inversion => "inversion".into(),
            EventKind::SelfRemoval => "self-removal".into(),
            EventKind::Cascade { smaller } => format!("cascade:{smaller}"),
            EventKind::Pending => "pending".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiagEvent {
    pub index: u64,
    pub kind: EventKind,
    pub input_code: u64,
    /// Steps the machine used on that input at exponent `2c + 2`.
    pub steps: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MachineFate {
    /// Inverted or dropped: not an approximation for the set.
    Invalidated,
    /// Only smaller indices were hit, at most `index - 1` distinct ones.
    Cascade,
    /// Some qualifying input left this machine and every smaller index untouched.
    Unresolved,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MachineReport {
    pub index: u64,
    pub qualifying: usize,
    pub events: Vec<DiagEvent>,
    pub fate: MachineFate,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiagReport {
    pub c: u64,
    pub i_max: u64,
    pub threshold: usize,
    pub machines: Vec<MachineReport>,
    pub steps: u64,
}

impl DiagReport {
    /// CSV with columns `index,event,input_code,steps`.
    pub fn csv(&self) -> String {
        let mut out = String::from("index,event,input_code,steps\n");
        for m in &self.machines {
            for e in &m.events {
                out.push_str(&format!(
                    "{},{},{},{}\n",
                    e.index,
                    e.kind.label(),
                    e.input_code,
                    e.steps
                ));
            }
        }
        out
    }

    pub fn all_resolved(&self) -> bool {
        self.machines.iter().all(|m| m.fate != MachineFate::Unresolved)
    }
}

/// For each machine `i <= i_max` deciding at least `threshold` inputs
/// `<d, x>` with `d > c` at exponent `2c + 2`, classifies what the decider
/// did at each of those inputs.
pub fn diag_invalidation_experiment(
    diag: &DiagonalSet,
    c: u64,
    i_max: u64,
    u: Universe,
    threshold: usize,
) -> Result<DiagReport, MachineError> {
    let exponent = u32::try_from(2 * c + 2).unwrap_or(u32::MAX);
    let above: Vec<u64> = u
        .iter()
        .map(|s| string_to_code(&s).0)
        .filter(|&z| cantor_unpair(PairCode(z)).0 > c)
        .collect();
    let mut machines = Vec::new();
    for i in 1..=i_max {
        let mut qualifying = Vec::new();
        for &z in &above {
            let s = code_to_string(PairCode(z)).expect("code fits");
            let p = Program::from_index(i);
            let r = run(&p, &s, poly_budget(diag.scale(), s.len(), exponent));
            if r.decided() {
                qualifying.push((z, r.steps_used));
            }
        }
        if qualifying.len() < threshold {
            continue;
        }
        let mut events = Vec::new();
        for &(z, steps) in &qualifying {
            let t = diag.trace(PairCode(z))?;
            let mut kinds = Vec::new();
            if t.removed.iter().any(|&(j, _)| j == i) {
                kinds.push(EventKind::SelfRemoval);
            } else if t.inverted.is_some_and(|(j, _)| j == i) {
                kinds.push(EventKind::Inversion);
            } else {
                let mut smaller: BTreeSet<u64> = t.removed.iter().map(|&(j, _)| j).filter(|&j| j < i).collect();
                if let Some((j, _)) = t.inverted.filter(|&(j, _)| j < i) {
                    smaller.insert(j);
                }
                kinds.extend(smaller.into_iter().map(|j| EventKind::Cascade { smaller: j }));
                if kinds.is_empty() {
                    kinds.push(EventKind::Pending);
                }
            }
            for kind in kinds {
                events.push(DiagEvent {
                    index: i,
                    kind,
                    input_code: z,
                    steps,
                });
            }
        }
        let invalidated = events
            .iter()
            .any(|e| matches!(e.kind, EventKind::Inversion | EventKind::SelfRemoval));
        let pending = events.iter().any(|e| e.kind == EventKind::Pending);
        let distinct: BTreeSet<u64> = events
            .iter()
            .filter_map(|e| match e.kind {
                EventKind::Cascade { smaller } => Some(smaller),
                _ => None,
            })
            .collect();
        let fate = if invalidated {
            MachineFate::Invalidated
        } else if !pending && (distinct.len() as u64) < i {
            MachineFate::Cascade
        } else {
            MachineFate::Unresolved
        };
        machines.push(MachineReport {
            index: i,
            qualifying: qualifying.len(),
            events,
            fate,
        });
    }
    Ok(DiagReport {
        c,
        i_max,
        threshold,
        machines,
        steps: diag.steps_used(),
    })
}
