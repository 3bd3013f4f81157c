//! Measurement sequences, their parallel (∨) and series (·) combination, and
//! the amplitude assignment that turns them into pairs.
//!
//! A set-up is a chain of measurement slots, each with a set of atomic labels,
//! and one amplitude table per adjacent pair of slots. A sequence occupies a
//! contiguous run of slots starting at `start`; its first and last outcomes are
//! atomic.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::born_solver::{h_eval, HFunction};
use crate::error::{Error, Result};
use crate::pair_algebra::{complex_mul, pair_add, Pair};
use crate::rng::stream;

/// Residual allowed for conservation and homomorphism checks.
pub const EXACT_TOL: f64 = 1e-12;

fn seq_err(msg: impl Into<String>) -> Error {
    Error::Sequence(msg.into())
}

/// A measurement outcome: a nonempty set of positive atomic labels.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "OutcomeRepr", into = "OutcomeRepr")]
pub struct Outcome(BTreeSet<u32>);

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum OutcomeRepr {
    Atom(u32),
    Set(Vec<u32>),
}

impl TryFrom<OutcomeRepr> for Outcome {
    type Error = Error;
    fn try_from(r: OutcomeRepr) -> Result<Self> {
        match r {
            OutcomeRepr::Atom(l) => Outcome::new([l]),
            OutcomeRepr::Set(v) => Outcome::new(v),
        }
    }
}

impl From<Outcome> for OutcomeRepr {
    fn from(o: Outcome) -> Self {
        match o.atomic_label() {
            Some(l) => OutcomeRepr::Atom(l),
            None => OutcomeRepr::Set(o.0.into_iter().collect()),
        }
    }
}

impl Outcome {
    pub fn new(labels: impl IntoIterator<Item = u32>) -> Result<Self> {
        let set: BTreeSet<u32> = labels.into_iter().collect();
        if set.is_empty() {
            return Err(seq_err("outcome has no labels"));
        }
        if set.contains(&0) {
            return Err(seq_err("outcome labels must be positive"));
        }
        Ok(Outcome(set))
    }

    pub fn atom(label: u32) -> Result<Self> {
        Outcome::new([label])
    }

    pub fn labels(&self) -> &BTreeSet<u32> {
        &self.0
    }

    pub fn is_atomic(&self) -> bool {
        self.0.len() == 1
    }

    pub fn atomic_label(&self) -> Option<u32> {
        if self.is_atomic() {
            self.0.first().copied()
        } else {
            None
        }
    }

    pub fn is_disjoint(&self, other: &Outcome) -> bool {
        self.0.is_disjoint(&other.0)
    }

    pub fn union(&self, other: &Outcome) -> Outcome {
        Outcome(self.0.union(&other.0).copied().collect())
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(l) = self.atomic_label() {
            return write!(f, "{l}");
        }
        let parts: Vec<String> = self.0.iter().map(|l| l.to_string()).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

/// An ordered run of outcomes in one set-up, beginning at slot `start`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Sequence {
    setup_id: String,
    start: usize,
    outcomes: Vec<Outcome>,
}

impl Sequence {
    pub fn new(setup_id: impl Into<String>, start: usize, outcomes: Vec<Outcome>) -> Result<Self> {
        if outcomes.len() < 2 {
            return Err(seq_err("a sequence needs at least two outcomes"));
        }
        if !outcomes[0].is_atomic() || !outcomes[outcomes.len() - 1].is_atomic() {
            return Err(seq_err("first and last outcomes must be atomic"));
        }
        Ok(Sequence { setup_id: setup_id.into(), start, outcomes })
    }

    /// Sequence of atomic outcomes; `from_labels("s", 0, &[1, 2, 3])`.
    pub fn from_labels(setup_id: impl Into<String>, start: usize, labels: &[u32]) -> Result<Self> {
        let outcomes = labels.iter().map(|&l| Outcome::atom(l)).collect::<Result<Vec<_>>>()?;
        Sequence::new(setup_id, start, outcomes)
    }

    pub fn setup_id(&self) -> &str {
        &self.setup_id
    }

    pub fn start(&self) -> usize {
        self.start
    }

    /// Slot of the last outcome.
    pub fn end(&self) -> usize {
        self.start + self.outcomes.len() - 1
    }

    pub fn outcomes(&self) -> &[Outcome] {
        &self.outcomes
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    fn first_label(&self) -> u32 {
        self.outcomes[0].atomic_label().expect("endpoints are atomic")
    }

    fn last_label(&self) -> u32 {
        self.outcomes[self.outcomes.len() - 1].atomic_label().expect("endpoints are atomic")
    }
}

impl fmt::Display for Sequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.outcomes.iter().map(|o| o.to_string()).collect();
        write!(f, "[{}]", parts.join("; "))
    }
}

/// `A ∨ B`: the sequences must agree everywhere except one interior slot,
/// where their outcomes are disjoint.
pub fn parallel(a: &Sequence, b: &Sequence) -> Result<Sequence> {
    if a.setup_id != b.setup_id {
        return Err(seq_err(format!("different set-ups {:?} and {:?}", a.setup_id, b.setup_id)));
    }
    if a.start != b.start || a.len() != b.len() {
        return Err(seq_err("sequences cover different slots"));
    }
    let diff: Vec<usize> = (0..a.len()).filter(|&i| a.outcomes[i] != b.outcomes[i]).collect();
    let &[k] = diff.as_slice() else {
        return Err(seq_err(format!("sequences differ at {} slots, need exactly one", diff.len())));
    };
    if k == 0 || k == a.len() - 1 {
        return Err(seq_err("sequences differ at an end slot"));
    }
    if !a.outcomes[k].is_disjoint(&b.outcomes[k]) {
        return Err(seq_err(format!("outcomes {} and {} overlap", a.outcomes[k], b.outcomes[k])));
    }
    let mut out = a.clone();
    out.outcomes[k] = a.outcomes[k].union(&b.outcomes[k]);
    Ok(out)
}

/// `A · B`: `B` starts at the slot where `A` ends, with the same outcome.
pub fn series(a: &Sequence, b: &Sequence) -> Result<Sequence> {
    if a.setup_id != b.setup_id {
        return Err(seq_err(format!("different set-ups {:?} and {:?}", a.setup_id, b.setup_id)));
    }
    if a.last_label() != b.first_label() {
        return Err(seq_err(format!("junction mismatch: {} then {}", a.last_label(), b.first_label())));
    }
    if a.end() != b.start {
        return Err(seq_err(format!("junction slot mismatch: {} then {}", a.end(), b.start)));
    }
    let mut outcomes = a.outcomes.clone();
    outcomes.extend_from_slice(&b.outcomes[1..]);
    Ok(Sequence { setup_id: a.setup_id.clone(), start: a.start, outcomes })
}

/// One table per interval; interval `k` joins slot `k` to slot `k + 1`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AmplitudeAssignment {
    tables: Vec<BTreeMap<(u32, u32), Pair>>,
}

impl AmplitudeAssignment {
    pub fn new(tables: Vec<BTreeMap<(u32, u32), Pair>>) -> Self {
        AmplitudeAssignment { tables }
    }

    /// Identity tables over `labels` for `intervals` intervals, zeros included.
    pub fn identity(labels: &BTreeSet<u32>, intervals: usize) -> Self {
        let table: BTreeMap<(u32, u32), Pair> = labels
            .iter()
            .flat_map(|&i| labels.iter().map(move |&j| ((i, j), if i == j { Pair::ONE } else { Pair::ZERO })))
            .collect();
        AmplitudeAssignment { tables: vec![table; intervals] }
    }

    pub fn tables(&self) -> &[BTreeMap<(u32, u32), Pair>] {
        &self.tables
    }

    pub fn get(&self, interval: usize, from: u32, to: u32) -> Result<Pair> {
        self.tables
            .get(interval)
            .and_then(|t| t.get(&(from, to)))
            .copied()
            .ok_or(Error::MissingAmplitude { interval, from, to })
    }
}

/// Sum over atomic refinements of the product of transition amplitudes.
pub fn amplitude(s: &Sequence, asg: &AmplitudeAssignment) -> Result<Pair> {
    let mut front: BTreeMap<u32, Pair> = BTreeMap::from([(s.first_label(), Pair::ONE)]);
    for (i, next) in s.outcomes.iter().enumerate().skip(1) {
        let interval = s.start + i - 1;
        let mut out = BTreeMap::new();
        for &to in next.labels() {
            let mut acc = Pair::ZERO;
            for (&from, &amp) in &front {
                acc = pair_add(acc, complex_mul(amp, asg.get(interval, from, to)?));
            }
            out.insert(to, acc);
        }
        front = out;
    }
    Ok(front.into_values().fold(Pair::ZERO, pair_add))
}

pub fn probability(s: &Sequence, asg: &AmplitudeAssignment) -> Result<f64> {
    h_eval(&HFunction::born(), amplitude(s, asg)?)
}

/// Slots, their atomic labels, and the interval tables.
#[derive(Debug, Clone, PartialEq)]
pub struct Setup {
    pub setup_id: String,
    pub slots: Vec<BTreeSet<u32>>,
    pub assignment: AmplitudeAssignment,
}

#[derive(Serialize, Deserialize)]
struct SetupFile {
    setup_id: String,
    slots: Vec<Vec<u32>>,
    intervals: Vec<Vec<(u32, u32, f64, f64)>>,
}

impl Setup {
    pub fn new(setup_id: impl Into<String>, slots: Vec<BTreeSet<u32>>, assignment: AmplitudeAssignment) -> Result<Self> {
        if slots.len() < 2 {
            return Err(Error::Setup("a set-up needs at least two slots".into()));
        }
        for (k, s) in slots.iter().enumerate() {
            if s.is_empty() || s.contains(&0) {
                return Err(Error::Setup(format!("slot {k} must have positive labels")));
            }
        }
        if assignment.tables.len() != slots.len() - 1 {
            return Err(Error::Setup(format!(
                "{} slots need {} interval tables, got {}",
                slots.len(),
                slots.len() - 1,
                assignment.tables.len()
            )));
        }
        for (k, t) in assignment.tables.iter().enumerate() {
            for &(from, to) in t.keys() {
                if !slots[k].contains(&from) || !slots[k + 1].contains(&to) {
                    return Err(Error::Setup(format!("interval {k} entry {from} -> {to} uses an undeclared label")));
                }
            }
        }
        Ok(Setup { setup_id: setup_id.into(), slots, assignment })
    }

    /// Same labels in every slot with identity tables.
    pub fn identity(setup_id: impl Into<String>, labels: &[u32], slots: usize) -> Result<Self> {
        let set: BTreeSet<u32> = labels.iter().copied().collect();
        Setup::new(setup_id, vec![set.clone(); slots], AmplitudeAssignment::identity(&set, slots.saturating_sub(1)))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: SetupFile = serde_json::from_str(text).map_err(|e| Error::Setup(e.to_string()))?;
        let mut tables = Vec::with_capacity(raw.intervals.len());
        for (k, rows) in raw.intervals.iter().enumerate() {
            let mut t = BTreeMap::new();
            for &(from, to, c1, c2) in rows {
                let p = Pair::new(c1, c2)?;
                if t.insert((from, to), p).is_some() {
                    return Err(Error::Setup(format!("interval {k} lists {from} -> {to} twice")));
                }
            }
            tables.push(t);
        }
        let slots = raw.slots.into_iter().map(|s| s.into_iter().collect()).collect();
        Setup::new(raw.setup_id, slots, AmplitudeAssignment::new(tables))
    }

    pub fn to_json(&self) -> String {
        let raw = SetupFile {
            setup_id: self.setup_id.clone(),
            slots: self.slots.iter().map(|s| s.iter().copied().collect()).collect(),
            intervals: self
                .assignment
                .tables
                .iter()
                .map(|t| t.iter().map(|(&(f, to), p)| (f, to, p.c1(), p.c2())).collect())
                .collect(),
        };
        serde_json::to_string(&raw).expect("set-up serializes")
    }

    /// Checks that `s` belongs to this set-up and refines only declared atoms.
    pub fn validate(&self, s: &Sequence) -> Result<()> {
        if s.setup_id != self.setup_id {
            return Err(seq_err(format!("sequence belongs to {:?}, not {:?}", s.setup_id, self.setup_id)));
        }
        if s.end() >= self.slots.len() {
            return Err(seq_err(format!("sequence {s} runs past slot {}", self.slots.len() - 1)));
        }
        for (i, o) in s.outcomes.iter().enumerate() {
            let slot = &self.slots[s.start + i];
            if !o.labels().is_subset(slot) {
                return Err(seq_err(format!("outcome {o} is not a subset of the labels of slot {}", s.start + i)));
            }
        }
        Ok(())
    }

    pub fn amplitude(&self, s: &Sequence) -> Result<Pair> {
        self.validate(s)?;
        amplitude(s, &self.assignment)
    }

    pub fn probability(&self, s: &Sequence) -> Result<f64> {
        self.validate(s)?;
        probability(s, &self.assignment)
    }

    /// Every sequence of atomic outcomes running from the first to the last slot.
    pub fn atomic_paths(&self) -> Vec<Sequence> {
        let mut paths: Vec<Vec<u32>> = vec![Vec::new()];
        for slot in &self.slots {
            paths = paths
                .into_iter()
                .flat_map(|p| {
                    slot.iter().map(move |&l| {
                        let mut q = p.clone();
                        q.push(l);
                        q
                    })
                })
                .collect();
        }
        paths
            .into_iter()
            .map(|p| Sequence::from_labels(self.setup_id.clone(), 0, &p).expect("atomic path"))
            .collect()
    }

    /// Inserts a trivial measurement (one outcome covering every label) after
    /// slot `k`, reached from slot `k` by the identity table.
    pub fn interleave_trivial(&self, k: usize) -> Result<Setup> {
        if k + 1 >= self.slots.len() {
            return Err(Error::Setup(format!("no interval after slot {k}")));
        }
        let mut slots = self.slots.clone();
        slots.insert(k + 1, self.slots[k].clone());
        let mut tables = self.assignment.tables.clone();
        let id = AmplitudeAssignment::identity(&self.slots[k], 1).tables.remove(0);
        tables.insert(k, id);
        Setup::new(self.setup_id.clone(), slots, AmplitudeAssignment::new(tables))
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum SequenceRepr {
    Plain(Vec<Outcome>),
    Placed { start: usize, outcomes: Vec<Outcome> },
}

#[derive(Deserialize)]
struct SequencesFile {
    setup_id: String,
    sequences: Vec<SequenceRepr>,
}

/// Parses `{"setup_id": ..., "sequences": [[1, [1, 2], 1], {"start": 1, "outcomes": [2, 3]}]}`.
pub fn sequences_from_json(text: &str) -> Result<Vec<Sequence>> {
    let raw: SequencesFile = serde_json::from_str(text).map_err(|e| seq_err(e.to_string()))?;
    raw.sequences
        .into_iter()
        .map(|r| match r {
            SequenceRepr::Plain(o) => Sequence::new(raw.setup_id.clone(), 0, o),
            SequenceRepr::Placed { start, outcomes } => Sequence::new(raw.setup_id.clone(), start, outcomes),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InitialTotal {
    pub initial: u32,
    /// Σ_j p([i; all; …; all; j]).
    pub coarse_total: f64,
    /// Σ of p over every atomic path starting at `i`.
    pub atomic_total: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormalizationReport {
    /// Per interval: whether the table preserves the sum of modulus squares.
    pub preserving: Vec<bool>,
    pub qualifies: bool,
    pub totals: Vec<InitialTotal>,
    /// max |total − 1| over `totals`; meaningful when `qualifies`.
    pub max_deviation: f64,
    /// Largest probability change caused by interleaving a trivial
    /// measurement with identity interval, over every interval and path.
    pub interleave_max_change: f64,
}

fn unitary_defect(table: &BTreeMap<(u32, u32), Pair>, labels: &BTreeSet<u32>) -> f64 {
    let mut worst = 0.0_f64;
    for &a in labels {
        for &b in labels {
            let mut s = Pair::ZERO;
            for &to in labels {
                let x = table[&(a, to)];
                let y = table[&(b, to)];
                s = pair_add(s, complex_mul(Pair::raw(x.c1(), -x.c2()), y));
            }
            let want = if a == b { Pair::ONE } else { Pair::ZERO };
            worst = worst.max((s - want).max_abs());
        }
    }
    worst
}

/// Total-probability and trivial-measurement checks for a square set-up.
pub fn normalization_check(setup: &Setup) -> Result<NormalizationReport> {
    let labels = &setup.slots[0];
    if setup.slots.iter().any(|s| s != labels) {
        return Err(Error::Setup("interval tables are not square: slots carry different labels".into()));
    }
    for (k, t) in setup.assignment.tables.iter().enumerate() {
        if t.len() != labels.len() * labels.len() {
            return Err(Error::Setup(format!("interval {k} table is incomplete")));
        }
    }
    let preserving: Vec<bool> = setup
        .assignment
        .tables
        .iter()
        .map(|t| unitary_defect(t, labels) <= EXACT_TOL)
        .collect();
    let qualifies = preserving.iter().all(|&p| p);

    let n = setup.slots.len();
    let all = Outcome(labels.clone());
    let paths = setup.atomic_paths();
    let mut totals = Vec::new();
    for &i in labels {
        let mut coarse_total = 0.0;
        for &j in labels {
            let mut outcomes = vec![Outcome(BTreeSet::from([i]))];
            outcomes.extend(std::iter::repeat_n(all.clone(), n - 2));
            outcomes.push(Outcome(BTreeSet::from([j])));
            coarse_total += setup.probability(&Sequence::new(setup.setup_id.clone(), 0, outcomes)?)?;
        }
        let mut atomic_total = 0.0;
        for p in paths.iter().filter(|p| p.first_label() == i) {
            atomic_total += setup.probability(p)?;
        }
        totals.push(InitialTotal { initial: i, coarse_total, atomic_total });
    }
    let max_deviation = totals
        .iter()
        .flat_map(|t| [t.coarse_total, t.atomic_total])
        .fold(0.0_f64, |m, v| m.max((v - 1.0).abs()));

    let mut interleave_max_change = 0.0_f64;
    for k in 0..n - 1 {
        let wide = setup.interleave_trivial(k)?;
        for p in &paths {
            let mut outcomes = p.outcomes.clone();
            outcomes.insert(k + 1, Outcome(labels.clone()));
            let q = Sequence::new(setup.setup_id.clone(), 0, outcomes)?;
            let change = (wide.probability(&q)? - setup.probability(p)?).abs();
            interleave_max_change = interleave_max_change.max(change);
        }
    }
    Ok(NormalizationReport { preserving, qualifies, totals, max_deviation, interleave_max_change })
}

/// Generator settings for the symmetry property suite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SymmetryConfig {
    pub seed: u64,
    /// Instances attempted per law.
    pub cases: usize,
    /// Longest sequence (and number of set-up slots).
    pub max_len: usize,
    /// Atomic labels per slot.
    pub labels: u32,
}

impl Default for SymmetryConfig {
    fn default() -> Self {
        SymmetryConfig { seed: 0, cases: 1000, max_len: 6, labels: 4 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LawReport {
    pub law: &'static str,
    pub statement: &'static str,
    pub instances: usize,
    pub failures: usize,
    /// "pass", "fail" or "no instances".
    pub status: &'static str,
    pub witness: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SymmetryReport {
    pub config: SymmetryConfig,
    pub laws: Vec<LawReport>,
    pub parallel_instances: usize,
    pub series_instances: usize,
    /// Relative residuals of amplitude(A∨B) vs amplitude(A) ⊕ amplitude(B),
    /// and amplitude(A·B) vs amplitude(A) ⊙ amplitude(B).
    pub parallel_residual: f64,
    pub series_residual: f64,
    pub passed: bool,
}

const LAWS: [(&str, &str); 5] = [
    ("S1", "A ∨ B = B ∨ A"),
    ("S2", "(A ∨ B) ∨ C = A ∨ (B ∨ C)"),
    ("S3", "(A · B) · C = A · (B · C)"),
    ("S4", "(A ∨ B) · C = (A · C) ∨ (B · C)"),
    ("S5", "C · (A ∨ B) = (C · A) ∨ (C · B)"),
];

const SYM_SETUP: &str = "symmetry";

struct Gen {
    rng: ChaCha8Rng,
    labels: Vec<u32>,
}

impl Gen {
    fn atom(&mut self) -> Outcome {
        Outcome::atom(*self.labels.choose(&mut self.rng).expect("labels")).expect("positive")
    }

    fn subset(&mut self) -> Outcome {
        loop {
            let s: BTreeSet<u32> = self.labels.iter().copied().filter(|_| self.rng.gen_bool(0.5)).collect();
            if !s.is_empty() {
                return Outcome(s);
            }
        }
    }

    /// `parts` pairwise disjoint nonempty subsets.
    fn disjoint(&mut self, parts: usize) -> Vec<Outcome> {
        let mut l = self.labels.clone();
        l.shuffle(&mut self.rng);
        let mut cuts: Vec<usize> = (1..l.len()).collect();
        cuts.shuffle(&mut self.rng);
        let mut cuts: Vec<usize> = cuts.into_iter().take(parts - 1).collect();
        cuts.sort();
        let end = self.rng.gen_range(cuts.last().copied().unwrap_or(0) + 1..=l.len());
        let mut bounds = vec![0];
        bounds.extend(cuts);
        bounds.push(end);
        bounds.windows(2).map(|w| Outcome(l[w[0]..w[1]].iter().copied().collect())).collect()
    }

    fn sequence(&mut self, start: usize, len: usize, first: Option<u32>) -> Sequence {
        let mut o = Vec::with_capacity(len);
        o.push(match first {
            Some(l) => Outcome::atom(l).expect("positive"),
            None => self.atom(),
        });
        for _ in 1..len - 1 {
            o.push(self.subset());
        }
        o.push(self.atom());
        Sequence::new(SYM_SETUP, start, o).expect("generated sequence")
    }

    /// Sequences equal to a random base except at one interior slot, where
    /// they hold disjoint outcomes.
    fn siblings(&mut self, start: usize, len: usize, first: Option<u32>, count: usize) -> Vec<Sequence> {
        let base = self.sequence(start, len, first);
        let k = self.rng.gen_range(1..len - 1);
        self.disjoint(count)
            .into_iter()
            .map(|o| {
                let mut s = base.clone();
                s.outcomes[k] = o;
                s
            })
            .collect()
    }

    fn assignment(&mut self, slots: usize) -> AmplitudeAssignment {
        let tables = (0..slots - 1)
            .map(|_| {
                let mut t = BTreeMap::new();
                for &i in &self.labels {
                    for &j in &self.labels {
                        t.insert((i, j), Pair::raw(self.rng.gen_range(-1.0..1.0), self.rng.gen_range(-1.0..1.0)));
                    }
                }
                t
            })
            .collect();
        AmplitudeAssignment::new(tables)
    }
}

fn rel_residual(x: Pair, y: Pair) -> f64 {
    (x - y).max_abs() / (1.0 + x.max_abs().max(y.max_abs()))
}

struct Tally {
    instances: usize,
    failures: usize,
    witness: Option<String>,
}

impl Tally {
    fn new() -> Self {
        Tally { instances: 0, failures: 0, witness: None }
    }

    fn record(&mut self, ok: bool, describe: impl FnOnce() -> String) {
        self.instances += 1;
        if !ok {
            self.failures += 1;
            if self.witness.is_none() {
                self.witness = Some(describe());
            }
        }
    }
}

/// Draws random combinable families and checks S1–S5 exactly, plus the
/// amplitude homomorphism for both combinations.
pub fn check_symmetries(cfg: &SymmetryConfig) -> SymmetryReport {
    let n = cfg.max_len.max(2);
    let labels: Vec<u32> = (1..=cfg.labels.max(1)).collect();
    let mut par = (0usize, 0.0_f64);
    let mut ser = (0usize, 0.0_f64);
    let mut laws = Vec::new();

    for (li, (law, statement)) in LAWS.iter().enumerate() {
        let mut g = Gen { rng: stream(cfg.seed, &[0x5e9, li as u64]), labels: labels.clone() };
        let mut tally = Tally::new();
        let asg = g.assignment(n);
        let amp = |s: &Sequence| amplitude(s, &asg).expect("complete tables");
        let mut check_par = |a: &Sequence, b: &Sequence, ab: &Sequence| {
            par.0 += 1;
            par.1 = par.1.max(rel_residual(amp(ab), pair_add(amp(a), amp(b))));
        };
        let mut check_ser = |a: &Sequence, b: &Sequence, ab: &Sequence| {
            ser.0 += 1;
            ser.1 = ser.1.max(rel_residual(amp(ab), complex_mul(amp(a), amp(b))));
        };
        for _ in 0..cfg.cases {
            match li {
                0 if n >= 3 && labels.len() >= 2 => {
                    let len = g.rng.gen_range(3..=n);
                    let start = g.rng.gen_range(0..=n - len);
                    let s = g.siblings(start, len, None, 2);
                    let ab = parallel(&s[0], &s[1]).expect("combinable");
                    let ba = parallel(&s[1], &s[0]).expect("combinable");
                    check_par(&s[0], &s[1], &ab);
                    tally.record(ab == ba, || format!("{} ∨ {}", s[0], s[1]));
                }
                1 if n >= 3 && labels.len() >= 3 => {
                    let len = g.rng.gen_range(3..=n);
                    let start = g.rng.gen_range(0..=n - len);
                    let s = g.siblings(start, len, None, 3);
                    let ab = parallel(&s[0], &s[1]).expect("combinable");
                    let bc = parallel(&s[1], &s[2]).expect("combinable");
                    let left = parallel(&ab, &s[2]).expect("combinable");
                    let right = parallel(&s[0], &bc).expect("combinable");
                    check_par(&ab, &s[2], &left);
                    tally.record(left == right, || format!("{}, {}, {}", s[0], s[1], s[2]));
                }
                2 if n >= 4 => {
                    let total = g.rng.gen_range(4..=n);
                    let start = g.rng.gen_range(0..=n - total);
                    let l1 = g.rng.gen_range(2..=total - 2);
                    let l2 = g.rng.gen_range(2..=total - l1);
                    let l3 = total - l1 - l2 + 2;
                    let a = g.sequence(start, l1, None);
                    let b = g.sequence(a.end(), l2, Some(a.last_label()));
                    let c = g.sequence(b.end(), l3, Some(b.last_label()));
                    let ab = series(&a, &b).expect("chained");
                    let bc = series(&b, &c).expect("chained");
                    let left = series(&ab, &c).expect("chained");
                    let right = series(&a, &bc).expect("chained");
                    check_ser(&a, &b, &ab);
                    check_ser(&ab, &c, &left);
                    tally.record(left == right, || format!("{a}, {b}, {c}"));
                }
                3 | 4 if n >= 4 && labels.len() >= 2 => {
                    let total = g.rng.gen_range(4..=n);
                    let start = g.rng.gen_range(0..=n - total);
                    let (ok, describe) = if li == 3 {
                        let l1 = g.rng.gen_range(3..=total - 1);
                        let s = g.siblings(start, l1, None, 2);
                        let ab = parallel(&s[0], &s[1]).expect("combinable");
                        let c = g.sequence(ab.end(), total - l1 + 1, Some(ab.last_label()));
                        let left = series(&ab, &c).expect("chained");
                        let ac = series(&s[0], &c).expect("chained");
                        let bc = series(&s[1], &c).expect("chained");
                        let right = parallel(&ac, &bc).expect("combinable");
                        check_ser(&ab, &c, &left);
                        check_par(&ac, &bc, &right);
                        (left == right, format!("{}, {}, {c}", s[0], s[1]))
                    } else {
                        let l1 = g.rng.gen_range(2..=total - 2);
                        let c = g.sequence(start, l1, None);
                        let s = g.siblings(c.end(), total - l1 + 1, Some(c.last_label()), 2);
                        let ab = parallel(&s[0], &s[1]).expect("combinable");
                        let left = series(&c, &ab).expect("chained");
                        let ca = series(&c, &s[0]).expect("chained");
                        let cb = series(&c, &s[1]).expect("chained");
                        let right = parallel(&ca, &cb).expect("combinable");
                        check_ser(&c, &ab, &left);
                        check_par(&ca, &cb, &right);
                        (left == right, format!("{c}, {}, {}", s[0], s[1]))
                    };
                    tally.record(ok, || describe);
                }
                _ => break,
            }
        }
        let status = match (tally.instances, tally.failures) {
            (0, _) => "no instances",
            (_, 0) => "pass",
            _ => "fail",
        };
        laws.push(LawReport {
            law,
            statement,
            instances: tally.instances,
            failures: tally.failures,
            status,
            witness: tally.witness,
        });
    }
    let passed = laws.iter().all(|l| l.failures == 0) && par.1 < EXACT_TOL && ser.1 < EXACT_TOL;
    SymmetryReport {
        config: *cfg,
        laws,
        parallel_instances: par.0,
        series_instances: ser.0,
        parallel_residual: par.1,
        series_residual: ser.1,
        passed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(start: usize, o: &[&[u32]]) -> Sequence {
        Sequence::new("s", start, o.iter().map(|l| Outcome::new(l.iter().copied()).unwrap()).collect()).unwrap()
    }

    #[test]
    fn parallel_examples() {
        let c = parallel(&seq(0, &[&[1], &[1], &[2]]), &seq(0, &[&[1], &[2], &[2]])).unwrap();
        assert_eq!(c, seq(0, &[&[1], &[1, 2], &[2]]));
        assert_eq!(c.to_string(), "[1; {1,2}; 2]");
        let (a, b, d) = (seq(0, &[&[1], &[1], &[3]]), seq(0, &[&[1], &[2], &[3]]), seq(0, &[&[1], &[4], &[3]]));
        let left = parallel(&parallel(&a, &b).unwrap(), &d).unwrap();
        let right = parallel(&a, &parallel(&b, &d).unwrap()).unwrap();
        assert_eq!(left, right);
        assert_eq!(left, seq(0, &[&[1], &[1, 2, 4], &[3]]));
    }

    #[test]
    fn parallel_errors() {
        let a = seq(0, &[&[1], &[1], &[2]]);
        assert!(parallel(&a, &a).is_err());
        assert!(parallel(&a, &seq(0, &[&[1], &[2], &[3]])).is_err());
        assert!(parallel(&a, &seq(0, &[&[2], &[1], &[2]])).is_err());
        assert!(parallel(&a, &seq(0, &[&[1], &[1, 2], &[2]])).is_err());
        let other = Sequence::new("t", 0, a.outcomes().to_vec()).unwrap();
        assert!(parallel(&a, &other).is_err());
    }

    #[test]
    fn series_examples() {
        let ab = series(&seq(0, &[&[1], &[2]]), &seq(1, &[&[2], &[3]])).unwrap();
        assert_eq!(ab, seq(0, &[&[1], &[2], &[3]]));
        let c = seq(2, &[&[3], &[4]]);
        let b = seq(1, &[&[2], &[3]]);
        let left = series(&ab, &c).unwrap();
        let right = series(&seq(0, &[&[1], &[2]]), &series(&b, &c).unwrap()).unwrap();
        assert_eq!(left, right);
        assert_eq!(left, seq(0, &[&[1], &[2], &[3], &[4]]));
        assert!(series(&seq(0, &[&[1], &[2]]), &seq(1, &[&[3], &[4]])).is_err());
    }

    #[test]
    fn sequence_invariants() {
        assert!(Sequence::new("s", 0, vec![Outcome::atom(1).unwrap()]).is_err());
        assert!(Sequence::new("s", 0, vec![Outcome::new([1, 2]).unwrap(), Outcome::atom(1).unwrap()]).is_err());
        assert!(Outcome::new([]).is_err());
        assert!(Outcome::new([0]).is_err());
        assert_eq!(Outcome::new([2, 1]).unwrap(), Outcome::new([1, 2, 2]).unwrap());
    }

    #[test]
    fn amplitude_examples() {
        let mut t = BTreeMap::new();
        t.insert((1, 2), Pair::raw(0.6, 0.8));
        let asg = AmplitudeAssignment::new(vec![t]);
        let s = Sequence::from_labels("s", 0, &[1, 2]).unwrap();
        assert_eq!(amplitude(&s, &asg).unwrap(), Pair::raw(0.6, 0.8));
        assert!((probability(&s, &asg).unwrap() - 1.0).abs() < 1e-15);
        let missing = Sequence::from_labels("s", 0, &[2, 2]).unwrap();
        assert_eq!(amplitude(&missing, &asg), Err(Error::MissingAmplitude { interval: 0, from: 2, to: 2 }));

        let (p, q, p2, q2) = (Pair::raw(0.5, 0.1), Pair::raw(-0.3, 0.7), Pair::raw(0.2, -0.4), Pair::raw(1.1, 0.3));
        let asg = AmplitudeAssignment::new(vec![
            BTreeMap::from([((1, 1), p), ((1, 2), q)]),
            BTreeMap::from([((1, 1), p2), ((2, 1), q2)]),
        ]);
        let s = seq(0, &[&[1], &[1, 2], &[1]]);
        let want = pair_add(complex_mul(p, p2), complex_mul(q, q2));
        assert!(amplitude(&s, &asg).unwrap().approx_eq(&want, 1e-15));
    }

    #[test]
    fn interference_cancels() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let asg = AmplitudeAssignment::new(vec![
            BTreeMap::from([((1, 1), Pair::raw(s, 0.0)), ((1, 2), Pair::raw(s, 0.0))]),
            BTreeMap::from([((1, 1), Pair::ONE), ((2, 1), Pair::raw(-1.0, 0.0))]),
        ]);
        let one = probability(&seq(0, &[&[1], &[1], &[1]]), &asg).unwrap();
        let both = probability(&seq(0, &[&[1], &[1, 2], &[1]]), &asg).unwrap();
        assert!((one - 0.5).abs() < 1e-15);
        assert!(both < 1e-30);
    }

    #[test]
    fn identity_setup_normalizes() {
        let setup = Setup::identity("id", &[1, 2], 3).unwrap();
        let r = normalization_check(&setup).unwrap();
        assert!(r.qualifies);
        assert_eq!(r.max_deviation, 0.0);
        assert_eq!(r.interleave_max_change, 0.0);
        let s = seq(0, &[&[1], &[1, 2], &[1]]);
        let s = Sequence::new("id", 0, s.outcomes().to_vec()).unwrap();
        assert_eq!(setup.probability(&s).unwrap(), 1.0);
    }

    #[test]
    fn rotation_table_conserves_probability() {
        let (c, s) = (0.6, 0.8);
        let t = BTreeMap::from([
            ((1, 1), Pair::raw(c, 0.0)),
            ((1, 2), Pair::raw(s, 0.0)),
            ((2, 1), Pair::raw(-s, 0.0)),
            ((2, 2), Pair::raw(c, 0.0)),
        ]);
        let labels = BTreeSet::from([1, 2]);
        let setup = Setup::new("rot", vec![labels.clone(), labels], AmplitudeAssignment::new(vec![t])).unwrap();
        let r = normalization_check(&setup).unwrap();
        assert!(r.qualifies);
        assert!(r.max_deviation < EXACT_TOL);
    }

    #[test]
    fn non_square_is_rejected() {
        let slots = vec![BTreeSet::from([1]), BTreeSet::from([1, 2])];
        let asg = AmplitudeAssignment::new(vec![BTreeMap::from([((1, 1), Pair::ONE), ((1, 2), Pair::ZERO)])]);
        let setup = Setup::new("ns", slots, asg).unwrap();
        assert!(matches!(normalization_check(&setup), Err(Error::Setup(_))));
    }

    #[test]
    fn setup_json_round_trip() {
        let text = r#"{"setup_id":"x","slots":[[1,2],[1,2]],"intervals":[[[1,1,1,0],[2,2,0,1]]]}"#;
        let setup = Setup::from_json(text).unwrap();
        assert_eq!(setup.assignment.get(0, 2, 2).unwrap(), Pair::I);
        assert_eq!(Setup::from_json(&setup.to_json()).unwrap(), setup);
        assert!(Setup::from_json(r#"{"setup_id":"x","slots":[[1]],"intervals":[]}"#).is_err());
        assert!(Setup::from_json(r#"{"setup_id":"x","slots":[[1],[1]],"intervals":[[[1,3,1,0]]]}"#).is_err());
        let seqs = sequences_from_json(r#"{"setup_id":"x","sequences":[[1,[1,2],2],{"start":1,"outcomes":[2,1]}]}"#)
            .unwrap();
        assert_eq!(seqs[0].to_string(), "[1; {1,2}; 2]");
        assert_eq!(seqs[1].start(), 1);
        assert!(setup.validate(&seqs[0]).is_err());
    }

    #[test]
    fn symmetry_suite_passes() {
        let r = check_symmetries(&SymmetryConfig { cases: 200, ..SymmetryConfig::default() });
        assert!(r.passed, "{r:?}");
        assert!(r.laws.iter().all(|l| l.status == "pass"));
    }

    #[test]
    fn short_sequences_have_no_instances() {
        let r = check_symmetries(&SymmetryConfig { max_len: 2, ..SymmetryConfig::default() });
        assert!(r.passed);
        assert!(r.laws.iter().all(|l| l.status == "no instances" && l.instances == 0));
    }
}
