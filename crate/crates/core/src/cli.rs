//! Scenario files and the probes behind every subcommand.
//!
//! A scenario is a plain-text file of `key = value` settings, named
//! definitions and probe lines, executed in order. See `docs/formats.md`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use thiserror::Error;

use crate::constructions::accel::{accelerate, IndexedFamily};
use crate::constructions::diag::{diag_invalidation_experiment, DiagonalSet};
use crate::constructions::ic::{converse_constant, ic_parameterization, IcTable};
use crate::constructions::search::{default_registry, dominance_check, dominance_csv, Registry};
use crate::machines::{domain, is_approximation_for, MachineError, Program};
use crate::order::{
    below_nu, below_uniform, cardinality_bound, check_filter, check_glb, check_lub, gap_csv, gap_table, has_imix,
    slicewise_member, GapValue,
};
use crate::params::{
    builtin_function, by_length, check_param_laws, doubling_witness, from_runtime, from_slices, full, join, meet,
    sample_family, Parameterization, SliceSets,
};
use crate::slices::{builtin_set, harvest_approximations, DecidedSet, SliceFamily};
use crate::spaces::{check_space_laws, parse_space, split_top_comma, NatSpace, ParamSpace, ProductSpace};
use crate::universe::{BitString, StringSet, Universe};
use crate::verdict::{Horizon, HorizonVerdict, Verdict};

/// Largest universe a scenario may ask for.
pub const MAX_UNIVERSE: usize = 16;
/// Largest program length for instance complexity.
pub const MAX_IC_LEN: usize = 14;
/// Largest machine index for the diagonal experiment.
pub const MAX_DIAG_INDEX: u64 = 4096;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CliError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("unknown name: {0}")]
    UnknownName(String),
    #[error("probe `{0}` exceeded the step cap")]
    CapExceeded(String),
    #[error("{0}")]
    Io(String),
}

fn parse_err(line: usize, msg: impl Into<String>) -> CliError {
    CliError::Parse { line, msg: msg.into() }
}

/// Named objects a probe may refer to, plus the horizon it runs at.
#[derive(Clone)]
pub struct Env {
    pub horizon: Horizon,
    pub parallel: bool,
    /// Directory that relative file names are resolved against.
    pub base: PathBuf,
    spaces: BTreeMap<String, Arc<dyn ParamSpace>>,
    params: BTreeMap<String, Parameterization>,
    sets: BTreeMap<String, DecidedSet>,
    families: BTreeMap<String, Vec<Parameterization>>,
    registries: BTreeMap<String, Registry>,
}

impl Env {
    pub fn new(horizon: Horizon) -> Self {
        Env {
            horizon,
            parallel: false,
            base: PathBuf::from("."),
            spaces: BTreeMap::new(),
            params: BTreeMap::new(),
            sets: BTreeMap::new(),
            families: BTreeMap::new(),
            registries: BTreeMap::new(),
        }
    }

    pub fn universe(&self) -> Universe {
        self.horizon.universe
    }

    fn path(&self, file: &str) -> PathBuf {
        let p = Path::new(file);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base.join(p)
        }
    }

    fn read(&self, file: &str) -> Result<String, CliError> {
        let p = self.path(file);
        std::fs::read_to_string(&p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))
    }

    pub fn space(&self, desc: &str) -> Result<Arc<dyn ParamSpace>, CliError> {
        let d = desc.trim();
        if let Some(s) = self.spaces.get(d) {
            return Ok(s.clone());
        }
        if let Some(inner) = d.strip_prefix("product(").and_then(|r| r.strip_suffix(')')) {
            if let Some((a, b)) = split_top_comma(inner) {
                return Ok(Arc::new(ProductSpace::new(self.space(a)?, self.space(b)?)));
            }
        }
        parse_space(d).map_err(|_| CliError::UnknownName(d.to_string()))
    }

    /// Resolves a defined name or a descriptor: `full`, `full(<space>)`,
    /// `bylength`, `fn(<name>)`, `meet(p,q)`, `join(p,q)`, `slices(<file>)`,
    /// `runtime(<program>)`, `doubling`, `accel`, `ic(<set>,<c>,<m>)`.
    pub fn param(&self, desc: &str) -> Result<Parameterization, CliError> {
        let d = desc.trim();
        if let Some(p) = self.params.get(d) {
            return Ok(p.clone());
        }
        let unknown = || CliError::UnknownName(d.to_string());
        match d {
            "full" => return Ok(full(Arc::new(NatSpace))),
            "bylength" => return Ok(by_length()),
            "doubling" => return Ok(doubling_witness(self.universe())),
            "accel" => return Ok(accelerate(&IndexedFamily::doubling_parity())),
            _ => {}
        }
        let (head, inner) = d
            .split_once('(')
            .and_then(|(h, r)| Some((h, r.strip_suffix(')')?)))
            .ok_or_else(unknown)?;
        match head {
            "full" => Ok(full(self.space(inner)?)),
            "fn" => builtin_function(inner.trim()).ok_or_else(unknown),
            "meet" | "join" => {
                let (a, b) = split_top_comma(inner).ok_or_else(unknown)?;
                let (a, b) = (self.param(a)?, self.param(b)?);
                Ok(if head == "meet" { meet(&a, &b) } else { join(&a, &b) })
            }
            "slices" => {
                let text = self.read(inner.trim())?;
                let sets = parse_slice_file(&text, self.universe())?;
                Ok(from_slices(format!("slices({})", inner.trim()), sets))
            }
            "runtime" => {
                let p = Program::from_hex(inner.trim()).map_err(|_| unknown())?;
                from_runtime(&p, self.universe(), crate::machines::global_step_cap())
                    .map_err(|e| CliError::Io(e.to_string()))
            }
            "ic" => {
                let parts: Vec<&str> = inner.split(',').map(str::trim).collect();
                let [set, c, m] = parts.as_slice() else {
                    return Err(unknown());
                };
                let set = self.set(set)?;
                let (c, m) = (c.parse().map_err(|_| unknown())?, m.parse().map_err(|_| unknown())?);
                Ok(ic_parameterization(Arc::new(IcTable::new(&set, c, m, self.universe()))))
            }
            _ => Err(unknown()),
        }
    }

    /// A defined name, a built-in set, or `diagonal`.
    pub fn set(&self, desc: &str) -> Result<DecidedSet, CliError> {
        let d = desc.trim();
        if let Some(s) = self.sets.get(d) {
            return Ok(s.clone());
        }
        if d == "diagonal" {
            return DiagonalSet::default()
                .table(self.universe())
                .map_err(|_| CliError::CapExceeded("diagonal".into()));
        }
        builtin_set(d).map_err(|_| CliError::UnknownName(d.to_string()))
    }

    /// A defined name, `sample`, or a comma-separated list of parameterizations.
    pub fn family(&self, desc: &str) -> Result<Vec<Parameterization>, CliError> {
        let d = desc.trim();
        if let Some(f) = self.families.get(d) {
            return Ok(f.clone());
        }
        if d == "sample" {
            return Ok(sample_family());
        }
        let mut out = Vec::new();
        let mut rest = d;
        while let Some((a, b)) = split_top_comma(rest) {
            out.push(self.param(a)?);
            rest = b;
        }
        out.push(self.param(rest)?);
        Ok(out)
    }

    pub fn registry(&self, name: &str) -> Result<Registry, CliError> {
        if let Some(r) = self.registries.get(name) {
            return Ok(r.clone());
        }
        let text = self.read(name)?;
        Registry::parse(&text).map_err(|e| CliError::Io(e.to_string()))
    }
}

/// One slice set per line, strings separated by whitespace; `-` is the
/// empty set. Blank lines and `#` comments are skipped.
pub fn parse_slice_file(text: &str, u: Universe) -> Result<SliceSets, CliError> {
    let mut sets = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut strings = Vec::new();
        for tok in line.split_whitespace().filter(|t| *t != "-") {
            let x: BitString = tok.parse().map_err(|_| parse_err(n + 1, format!("bad string {tok}")))?;
            if !u.contains(&x) {
                return Err(parse_err(n + 1, format!("{tok} is outside the universe")));
            }
            strings.push(x);
        }
        sets.push(StringSet::from_strings(u, strings.iter()));
    }
    SliceSets::new(u, sets).map_err(|e| CliError::Io(e.to_string()))
}

/// A probe and its arguments, named the same as the subcommands.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Probe {
    Gap { p: String, q: String, n_max: usize },
    Order { p: String, q: String },
    Imix { p: String },
    Lattice { family: String },
    Filter { set: String, family: String },
    Principal { set: String },
    Diag { c: u64, i_max: u64 },
    Search { set: String, registry: Option<String> },
    Ic { set: String, c: u32, m: usize },
    Laws { family: String },
}

impl Probe {
    pub fn parse(tokens: &[&str]) -> Result<Self, String> {
        let num = |s: &str| s.parse::<u64>().map_err(|_| format!("expected a number, got {s}"));
        let owned = |s: &&str| s.to_string();
        Ok(match tokens {
            ["gap", p, q] => Probe::Gap {
                p: owned(p),
                q: owned(q),
                n_max: 12,
            },
            ["gap", p, q, n] => Probe::Gap {
                p: owned(p),
                q: owned(q),
                n_max: num(n)? as usize,
            },
            ["order", p, q] => Probe::Order {
                p: owned(p),
                q: owned(q),
            },
            ["imix", p] => Probe::Imix { p: owned(p) },
            ["lattice", f] => Probe::Lattice { family: owned(f) },
            ["filter", s, f] => Probe::Filter {
                set: owned(s),
                family: owned(f),
            },
            ["principal", s] => Probe::Principal { set: owned(s) },
            ["diag", c, i] => Probe::Diag {
                c: num(c)?,
                i_max: num(i)?,
            },
            ["search", s] => Probe::Search {
                set: owned(s),
                registry: None,
            },
            ["search", s, r] => Probe::Search {
                set: owned(s),
                registry: Some(owned(r)),
            },
            ["ic", s, c, m] => Probe::Ic {
                set: owned(s),
                c: num(c)? as u32,
                m: num(m)? as usize,
            },
            ["laws", f] => Probe::Laws { family: owned(f) },
            _ => return Err(format!("unrecognized probe: {}", tokens.join(" "))),
        })
    }

    pub fn title(&self) -> String {
        match self {
            Probe::Gap { p, q, n_max } => format!("gap {p} {q} {n_max}"),
            Probe::Order { p, q } => format!("order {p} {q}"),
            Probe::Imix { p } => format!("imix {p}"),
            Probe::Lattice { family } => format!("lattice {family}"),
            Probe::Filter { set, family } => format!("filter {set} {family}"),
            Probe::Principal { set } => format!("principal {set}"),
            Probe::Diag { c, i_max } => format!("diag {c} {i_max}"),
            Probe::Search { set, registry } => match registry {
                Some(r) => format!("search {set} {r}"),
                None => format!("search {set}"),
            },
            Probe::Ic { set, c, m } => format!("ic {set} {c} {m}"),
            Probe::Laws { family } => format!("laws {family}"),
        }
    }

    fn check_caps(&self) -> Result<(), String> {
        match self {
            Probe::Ic { m, c, .. } if *m > MAX_IC_LEN || *c == 0 => {
                Err(format!("ic needs 1 <= c and m <= {MAX_IC_LEN}"))
            }
            Probe::Diag { i_max, .. } if *i_max > MAX_DIAG_INDEX => Err(format!("diag needs imax <= {MAX_DIAG_INDEX}")),
            _ => Ok(()),
        }
    }

    /// Resolves every name the probe refers to, without running it.
    fn validate(&self, env: &Env) -> Result<(), CliError> {
        match self {
            Probe::Gap { p, q, .. } | Probe::Order { p, q } => env.param(p).and(env.param(q)).map(drop),
            Probe::Imix { p } => env.param(p).map(drop),
            Probe::Lattice { family } | Probe::Laws { family } => env.family(family).map(drop),
            Probe::Filter { set, family } => env.set(set).and(env.family(family)).map(drop),
            Probe::Diag { .. } => Ok(()),
            Probe::Search { set, registry } => {
                env.set(set)?;
                registry.as_deref().map_or(Ok(()), |r| env.registry(r).map(drop))
            }
            Probe::Ic { set, .. } | Probe::Principal { set } => env.set(set).map(drop),
        }
    }
}

/// Verdicts and tables produced by one probe.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProbeReport {
    pub title: String,
    pub verdicts: Vec<(String, HorizonVerdict)>,
    pub tables: Vec<(String, String)>,
    pub notes: Vec<String>,
    /// Expected labels, one per verdict or a single one for all.
    pub expect: Vec<String>,
}

impl ProbeReport {
    fn new(title: String) -> Self {
        ProbeReport {
            title,
            verdicts: Vec::new(),
            tables: Vec::new(),
            notes: Vec::new(),
            expect: Vec::new(),
        }
    }

    fn verdict(&mut self, check: impl Into<String>, v: HorizonVerdict) {
        self.verdicts.push((check.into(), v));
    }

    fn expected(&self, i: usize) -> &str {
        match self.expect.len() {
            0 => "holds",
            1 => &self.expect[0],
            _ => self.expect.get(i).map_or("holds", String::as_str),
        }
    }

    /// Verdicts whose label differs from the expectation.
    pub fn surprises(&self) -> impl Iterator<Item = &HorizonVerdict> + '_ {
        self.verdicts
            .iter()
            .enumerate()
            .filter(|(i, (_, v))| v.label() != self.expected(*i))
            .map(|(_, (_, v))| v)
    }
}

#[derive(Debug, Clone)]
pub struct Report {
    pub horizon: Horizon,
    pub probes: Vec<ProbeReport>,
    pub elapsed: Duration,
}

impl Report {
    /// 0 when every verdict matched its expectation, 1 when some unexpected
    /// verdict fails, 2 when the only surprises are unresolved.
    pub fn exit_code(&self) -> i32 {
        let mut code = 0;
        for v in self.probes.iter().flat_map(|p| p.surprises()) {
            if v.is_unresolved() {
                code = 2;
            } else {
                return 1;
            }
        }
        code
    }

    /// Deterministic text: no timings.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# horizon {}", self.horizon);
        for p in &self.probes {
            let _ = writeln!(out, "## {}", p.title);
            for (check, v) in &p.verdicts {
                let _ = writeln!(out, "{}", verdict_record(&p.title, check, v, &self.horizon));
            }
            for note in &p.notes {
                let _ = writeln!(out, "note: {note}");
            }
            for (name, csv) in &p.tables {
                let _ = writeln!(out, "### {name}");
                out.push_str(csv);
            }
        }
        out
    }
}

/// `{probe: "...", check: "...", verdict: "...", witness: "...", L: 8, H: 12, ext: 24, t: 4}`
pub fn verdict_record(probe: &str, check: &str, v: &HorizonVerdict, fallback: &Horizon) -> String {
    let h = v.horizon.unwrap_or(*fallback);
    let detail = match &v.verdict {
        Verdict::Holds => String::new(),
        Verdict::Fails(w) => w.to_string(),
        Verdict::Unresolved(r) => r.clone(),
    };
    format!(
        "{{probe: {:?}, check: {:?}, verdict: {:?}, witness: {:?}, L: {}, H: {}, ext: {}, t: {}}}",
        probe,
        check,
        v.label(),
        detail,
        h.universe.max_len(),
        h.mu,
        h.ext,
        h.threshold
    )
}

fn cap(title: &str) -> impl Fn(MachineError) -> CliError + '_ {
    move |_| CliError::CapExceeded(title.to_string())
}

/// Runs one probe against the environment.
pub fn run_probe(probe: &Probe, env: &Env) -> Result<ProbeReport, CliError> {
    let hz = env.horizon;
    let u = hz.universe;
    let title = probe.title();
    let mut r = ProbeReport::new(title.clone());
    match probe {
        Probe::Gap { p, q, n_max } => {
            let (e1, e2) = (env.param(p)?, env.param(q)?);
            let rows = gap_table(&e1, &e2, *n_max, u, hz.mu);
            let v = HorizonVerdict::all(rows.iter().map(|row| match &row.gap {
                GapValue::Finite(_) => HorizonVerdict::holds(),
                GapValue::InfinityWitness(x) => {
                    HorizonVerdict::fails(crate::verdict::Witness::at(*x, format!("gap infinite at n={}", row.n)))
                }
                GapValue::Unresolved => HorizonVerdict::unresolved(format!("gap at n={} unresolved", row.n)),
            }));
            r.verdict(format!("gap({},{}) finite", e1.name(), e2.name()), v.at(hz));
            r.tables.push(("gap".into(), gap_csv(&rows)));
        }
        Probe::Order { p, q } => {
            let (e1, e2) = (env.param(p)?, env.param(q)?);
            r.verdict(
                format!("below_nu({},{})", e1.name(), e2.name()),
                below_nu(&e1, &e2, &hz),
            );
            r.verdict(
                format!("below_nu({},{})", e2.name(), e1.name()),
                below_nu(&e2, &e1, &hz),
            );
            if e2.name() == "bylength" {
                let bound = cardinality_bound(&e1, u, hz.mu);
                r.verdict(
                    format!("below_uniform({},bylength) by counting", e1.name()),
                    below_uniform(&e1, &e2, &bound, &hz),
                );
            }
        }
        Probe::Imix { p } => {
            let e = env.param(p)?;
            r.verdict(format!("imix({})", e.name()), has_imix(&e, &hz));
        }
        Probe::Lattice { family } => {
            let fam = env.family(family)?;
            let pairs: Vec<(usize, usize)> = (0..fam.len())
                .flat_map(|i| (i + 1..fam.len()).map(move |j| (i, j)))
                .collect();
            let check = |&(i, j): &(usize, usize)| {
                (
                    check_glb(&fam[i], &fam[j], &fam, &hz),
                    check_lub(&fam[i], &fam[j], &fam, &hz),
                )
            };
            let results: Vec<(HorizonVerdict, HorizonVerdict)> = if env.parallel {
                pairs.par_iter().map(check).collect()
            } else {
                pairs.iter().map(check).collect()
            };
            let mut csv = String::from("e1,e2,glb,lub\n");
            for (&(i, j), (g, l)) in pairs.iter().zip(&results) {
                let _ = writeln!(csv, "{},{},{},{}", fam[i].name(), fam[j].name(), g.label(), l.label());
            }
            let n = pairs.len();
            r.verdict(
                format!("glb over {n} pairs"),
                HorizonVerdict::all(results.iter().map(|p| p.0.clone())).at(hz),
            );
            r.verdict(
                format!("lub over {n} pairs"),
                HorizonVerdict::all(results.iter().map(|p| p.1.clone())).at(hz),
            );
            r.tables.push(("pairs".into(), csv));
        }
        Probe::Filter { set, family } => {
            let (a, fam) = (env.set(set)?, env.family(family)?);
            let slices = SliceFamily::harvest(a.clone(), u, 2, 256, 16);
            let member = slicewise_member(&slices, hz.mu);
            let mut csv = String::from("param,member\n");
            for e in &fam {
                let _ = writeln!(csv, "{},{}", e.name(), member(e));
            }
            r.notes
                .push(format!("{} approximations for {} harvested", slices.len(), a.name()));
            r.verdict(format!("filter({})", a.name()), check_filter(&fam, &member, &hz));
            r.tables.push(("membership".into(), csv));
        }
        Probe::Principal { set } => {
            let a = env.set(set)?;
            let fam = SliceFamily::harvest(a.clone(), u, 2, 256, 16);
            let principal = fam.slice_parameterization(0);
            let v =
                HorizonVerdict::all((1..fam.len()).map(|r| below_nu(&principal, &fam.slice_parameterization(r), &hz)));
            r.notes
                .push(format!("{} approximations for {} harvested", fam.len(), a.name()));
            r.verdict(format!("{} below every reordering", principal.name()), v.at(hz));
            let missed = fam.union_of_domains().complement();
            let cover = match missed.first() {
                None => HorizonVerdict::holds(),
                Some(x) => HorizonVerdict::unresolved(format!(
                    "{} strings, first {x}, lie outside every harvested slice",
                    missed.len()
                )),
            };
            r.verdict("harvest covers the universe", cover.at(hz));
        }
        Probe::Diag { c, i_max } => {
            let diag = DiagonalSet::default();
            let rep = diag_invalidation_experiment(&diag, *c, *i_max, u, hz.threshold).map_err(cap(&title))?;
            let unresolved: Vec<String> = rep
                .machines
                .iter()
                .filter(|m| m.fate == crate::constructions::diag::MachineFate::Unresolved)
                .map(|m| m.index.to_string())
                .collect();
            let v = if unresolved.is_empty() {
                HorizonVerdict::holds()
            } else {
                HorizonVerdict::unresolved(format!("machines {} have pending points", unresolved.join(" ")))
            };
            r.notes.push(format!(
                "{} qualifying machines, {} steps",
                rep.machines.len(),
                rep.steps
            ));
            r.verdict(format!("invalidation c={c} imax={i_max}"), v.at(hz));
            r.tables.push(("events".into(), rep.csv()));
        }
        Probe::Search { set, registry } => {
            let a = env.set(set)?;
            let mut reg = match registry {
                Some(name) => env.registry(name)?,
                None => default_registry(&a, u, 16),
            };
            if let Err(e) = reg.verify_all(&a) {
                r.verdict(
                    "certificates",
                    HorizonVerdict::fails(crate::verdict::Witness::note(e.to_string())).at(hz),
                );
                return Ok(r);
            }
            let rows = dominance_check(&reg, u).map_err(|e| CliError::Io(e.to_string()))?;
            let worst = rows.iter().map(|row| row.constant).max();
            r.notes.push(format!(
                "{} entries, measured constant {}",
                rows.len(),
                worst.map_or("none".into(), |c| c.to_string())
            ));
            let v = HorizonVerdict::all(rows.iter().map(|row| {
                HorizonVerdict::from_bool(row.stable, || {
                    crate::verdict::Witness::note(format!("{} not covered by its own length", row.program))
                })
            }));
            r.verdict("dominance", v.at(hz));
            r.tables.push(("dominance".into(), dominance_csv(&rows)));
        }
        Probe::Ic { set, c, m } => {
            let a = env.set(set)?;
            let table = Arc::new(IcTable::new(&a, *c, *m, u));
            let e = ic_parameterization(table.clone());
            let mut csv = String::from("x,ic\n");
            for (x, v) in u.iter().zip(table.values()) {
                let _ = writeln!(csv, "{x},{v}");
            }
            let slices = HorizonVerdict::all((0..=*m).map(|k| {
                let d = table.dispatcher(k);
                let slice = e.slice(&crate::spaces::Param::Nat(k as u64), u);
                let sound = is_approximation_for(&d, &a, u);
                let covered = HorizonVerdict::from_bool(slice.is_subset(&domain(&d, u)), || {
                    crate::verdict::Witness::note(format!("slice {k} not decided by its dispatcher"))
                });
                HorizonVerdict::all([sound, covered])
            }));
            r.verdict("slices decided by dispatchers", slices.at(hz));
            let fallback: Vec<_> = harvest_approximations(&a, u, *c, 256, 16)
                .into_iter()
                .map(|(a, _)| a)
                .collect();
            for witness in [full(Arc::new(NatSpace)), by_length()] {
                let c = converse_constant(&table, &witness, hz.mu, &fallback);
                let v = match c {
                    Some(c) => {
                        r.notes.push(format!("ic <= mu_{} + {c}", witness.name()));
                        HorizonVerdict::holds()
                    }
                    None => {
                        HorizonVerdict::unresolved(format!("some string has ic above {m} and no harvested witness"))
                    }
                };
                r.verdict(format!("converse bound against {}", witness.name()), v.at(hz));
            }
            r.tables.push(("ic".into(), csv));
        }
        Probe::Laws { family } => {
            let fam = env.family(family)?;
            let laws = |e: &Parameterization| {
                let s = check_space_laws(e.space().as_ref(), 8);
                let p = check_param_laws(e, u, hz.mu, 8);
                (e.name().to_string(), s, p)
            };
            let rows: Vec<(String, HorizonVerdict, HorizonVerdict)> = if env.parallel {
                fam.par_iter().map(laws).collect()
            } else {
                fam.iter().map(laws).collect()
            };
            let mut csv = String::from("param,space_laws,param_laws\n");
            for (name, s, p) in &rows {
                let _ = writeln!(csv, "{name},{},{}", s.label(), p.label());
            }
            r.verdict(
                "space laws",
                HorizonVerdict::all(rows.iter().map(|x| x.1.clone())).at(hz),
            );
            r.verdict(
                "parameterization laws",
                HorizonVerdict::all(rows.iter().map(|x| x.2.clone())).at(hz),
            );
            r.tables.push(("laws".into(), csv));
        }
    }
    Ok(r)
}

#[derive(Clone)]
pub struct Scenario {
    pub env: Env,
    /// Probes with their expectations, in file order.
    pub probes: Vec<(Probe, Vec<String>)>,
}

impl Scenario {
    /// Settings (`universe`, `horizon`, `ext`, `threshold`) are read first;
    /// definitions and probes are then resolved in file order.
    pub fn parse(text: &str, base: &Path) -> Result<Self, CliError> {
        let (mut l, mut h, mut t, mut ext) = (8usize, 12usize, 4usize, None);
        let lines: Vec<(usize, &str)> = text
            .lines()
            .enumerate()
            .map(|(i, s)| (i + 1, s.split('#').next().unwrap_or("").trim()))
            .filter(|(_, s)| !s.is_empty())
            .collect();
        for &(n, line) in &lines {
            let Some((key, value)) = line.split_once('=') else {
                continue;
            };
            let key = key.trim();
            if key.contains(' ') {
                continue;
            }
            let v: usize = value
                .trim()
                .parse()
                .map_err(|_| parse_err(n, format!("{key} needs a number")))?;
            match key {
                "universe" if v <= MAX_UNIVERSE => l = v,
                "universe" => return Err(parse_err(n, format!("universe must be at most {MAX_UNIVERSE}"))),
                "horizon" if v <= 63 => h = v,
                "horizon" => return Err(parse_err(n, "horizon must be at most 63")),
                "threshold" if v >= 1 => t = v,
                "threshold" => return Err(parse_err(n, "threshold must be at least 1")),
                "ext" if v <= 63 => ext = Some(v),
                "ext" => return Err(parse_err(n, "ext must be at most 63")),
                _ => return Err(parse_err(n, format!("unknown setting {key}"))),
            }
        }
        let mut horizon = Horizon::new(l, h, t).map_err(|e| parse_err(0, e.to_string()))?;
        if let Some(e) = ext {
            horizon = horizon.with_ext(e);
        }
        let mut env = Env::new(horizon);
        env.base = base.to_path_buf();
        let mut probes = Vec::new();
        for &(n, line) in &lines {
            let (word, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
            match word {
                "probe" => {
                    let tokens: Vec<&str> = rest.split_whitespace().collect();
                    let (tokens, expect) = match tokens.iter().position(|&t| t == "expect") {
                        Some(i) => (
                            &tokens[..i],
                            tokens[i + 1..].join("").split(',').map(str::to_string).collect(),
                        ),
                        None => (&tokens[..], Vec::new()),
                    };
                    for e in &expect {
                        if !["holds", "fails", "unresolved"].contains(&e.as_str()) {
                            return Err(parse_err(n, format!("bad expectation {e}")));
                        }
                    }
                    let probe = Probe::parse(tokens).map_err(|m| parse_err(n, m))?;
                    probe.check_caps().map_err(|m| parse_err(n, m))?;
                    probe.validate(&env)?;
                    probes.push((probe, expect));
                }
                "space" | "param" | "set" | "family" | "registry" => {
                    let (name, desc) = rest
                        .split_once('=')
                        .map(|(a, b)| (a.trim(), b.trim()))
                        .ok_or_else(|| parse_err(n, format!("expected: {word} <name> = <descriptor>")))?;
                    if name.is_empty() || name.contains(char::is_whitespace) {
                        return Err(parse_err(n, format!("bad name {name:?}")));
                    }
                    let name = name.to_string();
                    match word {
                        "space" => {
                            let s = env.space(desc)?;
                            env.spaces.insert(name, s);
                        }
                        "param" => {
                            let p = env.param(desc)?.renamed(name.clone());
                            env.params.insert(name, p);
                        }
                        "set" => {
                            let s = env.set(desc)?;
                            env.sets.insert(name, s);
                        }
                        "family" => {
                            let f = env.family(desc)?;
                            env.families.insert(name, f);
                        }
                        _ => {
                            let r = env.registry(desc)?;
                            env.registries.insert(name, r);
                        }
                    }
                }
                _ if line.contains('=') => {}
                _ => return Err(parse_err(n, format!("unrecognized line: {line}"))),
            }
        }
        Ok(Scenario { env, probes })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Scenario::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn run(&self) -> Result<Report, CliError> {
        let start = Instant::now();
        let one = |(p, expect): &(Probe, Vec<String>)| {
            run_probe(p, &self.env).map(|mut r| {
                r.expect = expect.clone();
                r
            })
        };
        let probes: Result<Vec<ProbeReport>, CliError> = if self.env.parallel {
            self.probes.par_iter().map(one).collect()
        } else {
            self.probes.iter().map(one).collect()
        };
        Ok(Report {
            horizon: self.env.horizon,
            probes: probes?,
            elapsed: start.elapsed(),
        })
    }
}

pub fn run_scenario(path: &Path, parallel: bool) -> Result<Report, CliError> {
    let mut s = Scenario::load(path)?;
    s.env.parallel = parallel;
    s.run()
}
