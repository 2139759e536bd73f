//! Constructive realization by degree-lowering reduction and sheet insertion.
//!
//! A datum with `k >= min r_i + 2` is reduced one degree at a time: pick
//! `pi_k` of minimal length; if it has no fixed points (case A) shrink its
//! largest part and the smallest non-unit part of `pi_1`, otherwise (case B)
//! shrink the smallest non-unit parts of `pi_1` and `pi_2`. Every other
//! partition gives up one fixed point and partitions that become `[1, ..., 1]`
//! disappear. The chain ends at `{[2], [2]}`.
//!
//! Lifting a realization back up adds one sheet `n = d`: the two shrunk
//! cycles are regrown by splicing `n` into them, at points chosen so the two
//! inserted transpositions cancel through the product of the members between
//! them. The remaining members just gain `n` as a fixed point.

use std::collections::{HashSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::certificate::{Method, RealizationCertificate};
use crate::oracle::{self, OracleOptions, Outcome, SearchBudget};
use crate::partition::{theorem2_applies, BranchDatum, Partition};
use crate::perm::{Permutation, Tuple};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FootballError {
    #[error("datum {0} does not satisfy k >= min length + 2 as a sphere candidate; use the oracle")]
    NotEligible(String),
    #[error("datum {0} is not a base case")]
    NotBaseCase(String),
    #[error("override rejected: {0}")]
    BadOverride(String),
    #[error("reduction invariant violated at {datum}: {reason}")]
    Invariant { datum: String, reason: String },
    #[error("oracle fallback could not decide {0} within its budget")]
    FallbackExhausted(String),
}

/// Which reduction lemma a step follows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Case {
    /// `pi_k` has no fixed points: shrink `pi_1` and `pi_k`.
    A,
    /// `pi_k` has a fixed point: shrink `pi_1` and `pi_2`.
    B,
}

/// One degree-lowering step. Indices refer to the parent datum; the child
/// lists the surviving partitions in parent order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ReductionStep {
    #[serde(rename = "case")]
    pub case_tag: Case,
    pub pk_index: usize,
    pub first_index: usize,
    pub second_index: usize,
    pub decremented_entry_first: u32,
    pub decremented_entry_second: u32,
    pub ones_dropped: Vec<usize>,
    pub dropped_trivial: Vec<usize>,
}

impl ReductionStep {
    /// Position of parent partition `i` in the child datum.
    pub fn child_index(&self, i: usize) -> Option<usize> {
        if self.dropped_trivial.contains(&i) {
            return None;
        }
        Some(i - self.dropped_trivial.iter().filter(|&&j| j < i).count())
    }
}

/// Explicit choices for one step, used to replay hand-made chains.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StepOverride {
    pub pk_index: Option<usize>,
    pub first_index: Option<usize>,
    pub second_index: Option<usize>,
    pub first_entry: Option<u32>,
    pub second_entry: Option<u32>,
}

/// The `pi_k` choice and the order of the remaining partitions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Normalized {
    pub pk_index: usize,
    /// `pi_1, pi_2, ...` as datum indices.
    pub rest: Vec<usize>,
}

impl Normalized {
    /// The datum reordered as `pi_1, ..., pi_{k-1}, pi_k`.
    pub fn ordered(&self, datum: &BranchDatum) -> BranchDatum {
        let mut order = self.rest.clone();
        order.push(self.pk_index);
        datum.permuted(&order)
    }
}

/// Chooses `pi_k` (minimal length; then no fixed points; then larger first
/// part; then lexicographically larger) and orders the others by `q`
/// descending, then first part descending, then lexicographically.
pub fn normalize(datum: &BranchDatum) -> Result<Normalized, FootballError> {
    if !theorem2_applies(datum) {
        return Err(FootballError::NotEligible(datum.to_string()));
    }
    Ok(normalize_unchecked(datum))
}

fn normalize_unchecked(datum: &BranchDatum) -> Normalized {
    let parts = datum.partitions();
    let pk_index = (0..parts.len())
        .min_by(|&a, &b| {
            let (pa, pb) = (&parts[a], &parts[b]);
            pa.len()
                .cmp(&pb.len())
                .then((pa.e() > 0).cmp(&(pb.e() > 0)))
                .then(pb.largest().cmp(&pa.largest()))
                .then(pb.cmp(pa))
                .then(a.cmp(&b))
        })
        .expect("non-empty datum");
    let mut rest: Vec<usize> = (0..parts.len()).filter(|&i| i != pk_index).collect();
    rest.sort_by(|&a, &b| {
        let (pa, pb) = (&parts[a], &parts[b]);
        pb.q()
            .cmp(&pa.q())
            .then(pb.largest().cmp(&pa.largest()))
            .then(pb.cmp(pa))
            .then(a.cmp(&b))
    });
    Normalized { pk_index, rest }
}

fn is_two_two(datum: &BranchDatum) -> bool {
    datum.degree() == 2 && datum.k() == 2
}

/// The data with a fixed realization: `{[2],[2]}`, `{[2,1],[2,1],[3]}` and
/// `{[2,1] x 4}`.
pub fn is_base_case(datum: &BranchDatum) -> bool {
    let sorted = datum.sorted_partitions();
    let t = Partition::new(vec![2, 1]).unwrap();
    match datum.degree() {
        2 => is_two_two(datum),
        3 => sorted == vec![Partition::single(3), t.clone(), t.clone()] || sorted == vec![t; 4],
        _ => false,
    }
}

/// Reduces the degree by one, following the default policy unless `choice`
/// pins some of the decisions.
pub fn reduce_step(
    datum: &BranchDatum,
    choice: Option<&StepOverride>,
) -> Result<(BranchDatum, ReductionStep), FootballError> {
    if !theorem2_applies(datum) {
        return Err(FootballError::NotEligible(datum.to_string()));
    }
    let parts = datum.partitions();
    let k = parts.len();
    let default = StepOverride::default();
    let choice = choice.unwrap_or(&default);
    let bad = |msg: String| FootballError::BadOverride(msg);
    let check_index = |i: usize, what: &str| {
        if i < k {
            Ok(i)
        } else {
            Err(bad(format!("{what} index {i} out of range for {k} partitions")))
        }
    };

    let normalized = normalize_unchecked(datum);
    let pk_index = check_index(choice.pk_index.unwrap_or(normalized.pk_index), "pi_k")?;
    let pk = &parts[pk_index];
    let case_tag = if pk.e() == 0 { Case::A } else { Case::B };

    // Default order of the others, recomputed when pi_k is overridden.
    let mut rest: Vec<usize> = normalized.rest.clone();
    if pk_index != normalized.pk_index {
        rest.push(normalized.pk_index);
        rest.retain(|&i| i != pk_index);
        let sorter = normalize_unchecked_with_pk(datum, pk_index);
        rest = sorter;
    }

    let first_index = check_index(choice.first_index.unwrap_or(rest[0]), "first")?;
    if first_index == pk_index {
        return Err(bad("first partition coincides with pi_k".into()));
    }
    let second_index = match case_tag {
        Case::A => {
            if choice.second_index.is_some_and(|s| s != pk_index) {
                return Err(bad("in case A the second partition is pi_k".into()));
            }
            pk_index
        }
        Case::B => {
            let fallback = rest.iter().copied().find(|&i| i != first_index && i != pk_index);
            let s = choice
                .second_index
                .or(fallback)
                .ok_or_else(|| bad("no partition available for pi_2".into()))?;
            let s = check_index(s, "second")?;
            if s == first_index || s == pk_index {
                return Err(bad("second partition must differ from first and pi_k".into()));
            }
            s
        }
    };

    let entry = |idx: usize, requested: Option<u32>, default: Option<u32>, who: &str| {
        let value = requested.or(default).ok_or_else(|| bad(format!("{who} has no part >= 2")))?;
        if value < 2 {
            return Err(bad(format!("{who}: cannot decrement a part of size {value}")));
        }
        if !parts[idx].parts().contains(&value) {
            return Err(bad(format!("{who}: [{}] has no part {value}", parts[idx])));
        }
        Ok(value)
    };
    let first_entry = entry(
        first_index,
        choice.first_entry,
        parts[first_index].smallest_nontrivial(),
        "first",
    )?;
    let second_default = match case_tag {
        Case::A => Some(parts[second_index].largest()),
        Case::B => parts[second_index].smallest_nontrivial(),
    };
    let second_entry = entry(second_index, choice.second_entry, second_default, "second")?;

    let mut children = Vec::with_capacity(k);
    let mut ones_dropped = Vec::new();
    let mut dropped_trivial = Vec::new();
    for (i, p) in parts.iter().enumerate() {
        let next = if i == first_index {
            p.decrement(first_entry)
        } else if i == second_index {
            p.decrement(second_entry)
        } else {
            if p.e() == 0 {
                return Err(FootballError::Invariant {
                    datum: datum.to_string(),
                    reason: format!("partition {i} = [{p}] has no fixed point to give up"),
                });
            }
            ones_dropped.push(i);
            p.decrement(1)
        }
        .expect("part present");
        if next.is_trivial() {
            dropped_trivial.push(i);
        } else {
            children.push(next);
        }
    }
    let child = BranchDatum::new(datum.degree() - 1, children).map_err(|e| FootballError::Invariant {
        datum: datum.to_string(),
        reason: e.to_string(),
    })?;
    let step = ReductionStep {
        case_tag,
        pk_index,
        first_index,
        second_index,
        decremented_entry_first: first_entry,
        decremented_entry_second: second_entry,
        ones_dropped,
        dropped_trivial,
    };
    Ok((child, step))
}

fn normalize_unchecked_with_pk(datum: &BranchDatum, pk_index: usize) -> Vec<usize> {
    let parts = datum.partitions();
    let mut rest: Vec<usize> = (0..parts.len()).filter(|&i| i != pk_index).collect();
    rest.sort_by(|&a, &b| {
        let (pa, pb) = (&parts[a], &parts[b]);
        pb.q()
            .cmp(&pa.q())
            .then(pb.largest().cmp(&pa.largest()))
            .then(pb.cmp(pa))
            .then(a.cmp(&b))
    });
    rest
}

/// Checks the conclusions of the reduction lemmas for one step: the child is
/// a sphere candidate made of nontrivial partitions of `d - 1`, the length
/// inequalities hold, the structural claims of the degenerate sub-cases hold,
/// and, when the ordering hypothesis is met, every middle partition had a
/// fixed point to give up.
pub fn check_lemmas(parent: &BranchDatum, step: &ReductionStep, child: &BranchDatum) -> Result<(), String> {
    let d = parent.degree() as usize;
    let parts = parent.partitions();
    let k = parts.len();
    let r = |i: usize| parts[i].len();
    let q = |i: usize| parts[i].q();
    let e = |i: usize| parts[i].e();
    let (pk, first, second) = (step.pk_index, step.first_index, step.second_index);

    if child.degree() as usize + 1 != d {
        return Err(format!("child degree {} is not {}", child.degree(), d - 1));
    }
    if child.partitions().iter().any(Partition::is_trivial) {
        return Err("child contains a trivial partition".into());
    }
    if !child.is_candidate_sphere() {
        return Err(format!("child {child} violates Riemann-Hurwitz"));
    }
    if child.degree() >= 3 && !theorem2_applies(child) {
        return Err(format!("child {child} no longer satisfies k >= min length + 2"));
    }

    let middle: Vec<usize> = (0..k).filter(|&i| i != pk && i != first).collect();
    let ordered = middle.iter().all(|&i| q(first) >= q(i));
    if ordered {
        if let Some(&bad) = middle.iter().find(|&&i| e(i) == 0) {
            return Err(format!("middle partition {bad} = [{}] has no fixed point", parts[bad]));
        }
    }
    let is_transposition = |i: usize| parts[i].parts()[0] == 2 && q(i) == 1;
    let first_dropped = step.dropped_trivial.contains(&first);
    let second_dropped = step.dropped_trivial.contains(&second);

    match step.case_tag {
        Case::A => {
            if e(pk) != 0 {
                return Err("case A requires pi_k without fixed points".into());
            }
            if !first_dropped {
                if let Some(i) = (0..k).filter(|&i| i != pk).find(|&i| q(pk) > q(i) + e(i)) {
                    return Err(format!("q_k <= q_i + e_i fails at {i}"));
                }
            } else {
                if let Some(i) = (0..k).filter(|&i| i != pk).find(|&i| !is_transposition(i)) {
                    return Err(format!("degenerate case A: partition {i} is not a transposition"));
                }
                if k != d + q(pk) - 1 {
                    return Err(format!("degenerate case A: k = {k} but d + q_k - 1 = {}", d + q(pk) - 1));
                }
                if let Some(i) = middle.iter().find(|&&i| q(pk) > q(i) + e(i)) {
                    return Err(format!("q_k <= q_i + e_i fails at {i}"));
                }
            }
        }
        Case::B => {
            if e(pk) == 0 {
                return Err("case B requires pi_k with a fixed point".into());
            }
            let rk = r(pk);
            let others: Vec<usize> = (0..k).filter(|&i| i != pk && i != first && i != second).collect();
            if !first_dropped && !second_dropped {
                if rk - 1 > r(first) || rk - 1 > r(second) - 1 {
                    return Err("length inequality fails for pi_1 or pi_2".into());
                }
                if let Some(i) = others.iter().find(|&&i| rk > r(i)) {
                    return Err(format!("length inequality fails at {i}"));
                }
            } else if !first_dropped {
                if let Some(i) = (0..k).filter(|&i| i != pk && i != first).find(|&i| !is_transposition(i)) {
                    return Err(format!("degenerate case B: partition {i} is not a transposition"));
                }
                if k != rk + r(first) {
                    return Err(format!("degenerate case B: k = {k} but r_k + r_1 = {}", rk + r(first)));
                }
                if rk - 1 > r(first) || others.iter().any(|&i| rk - 1 > r(i)) {
                    return Err("length inequality fails".into());
                }
            } else {
                if let Some(i) = (0..k).filter(|&i| i != pk).find(|&i| !is_transposition(i)) {
                    return Err(format!("fully degenerate case B: partition {i} is not a transposition"));
                }
                if k != d + rk - 1 {
                    return Err(format!("fully degenerate case B: k = {k} but d + r_k - 1 = {}", d + rk - 1));
                }
                if (0..k).filter(|&i| i != pk && i != first).any(|i| rk > r(i)) {
                    return Err("length inequality fails".into());
                }
            }
        }
    }
    Ok(())
}

/// The data from the input down to the base case and the steps between them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReductionChain {
    pub data: Vec<BranchDatum>,
    pub steps: Vec<ReductionStep>,
}

impl ReductionChain {
    pub fn last(&self) -> &BranchDatum {
        self.data.last().expect("chain has at least the input")
    }
}

impl fmt::Display for ReductionChain {
    /// One line per datum: `D = {...}`, `D1 = {...}`, ...
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, datum) in self.data.iter().enumerate() {
            if i == 0 {
                writeln!(f, "D = {}", datum.bracketed())?;
            } else {
                writeln!(f, "D{i} = {}", datum.bracketed())?;
            }
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
pub(crate) enum ChainEntry {
    Datum(BranchDatum),
    Step(ReductionStep),
}

impl Serialize for ReductionChain {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut entries = Vec::with_capacity(self.data.len() + self.steps.len());
        for (i, datum) in self.data.iter().enumerate() {
            entries.push(ChainEntry::Datum(datum.clone()));
            if let Some(step) = self.steps.get(i) {
                entries.push(ChainEntry::Step(step.clone()));
            }
        }
        entries.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ReductionChain {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let entries = Vec::<ChainEntry>::deserialize(deserializer)?;
        let mut chain = ReductionChain { data: Vec::new(), steps: Vec::new() };
        for (i, entry) in entries.into_iter().enumerate() {
            match (i % 2, entry) {
                (0, ChainEntry::Datum(d)) => chain.data.push(d),
                (1, ChainEntry::Step(s)) => chain.steps.push(s),
                _ => return Err(serde::de::Error::custom("chain must alternate datum and step")),
            }
        }
        if chain.data.len() != chain.steps.len() + 1 {
            return Err(serde::de::Error::custom("chain must start and end with a datum"));
        }
        Ok(chain)
    }
}

/// Reduces until `{[2], [2]}`. A datum that is itself a base case yields a
/// chain without steps. `overrides[i]` pins the choices of step `i`.
pub fn reduce_chain(datum: &BranchDatum, overrides: &[Option<StepOverride>]) -> Result<ReductionChain, FootballError> {
    if !theorem2_applies(datum) {
        return Err(FootballError::NotEligible(datum.to_string()));
    }
    let mut chain = ReductionChain { data: vec![datum.clone()], steps: Vec::new() };
    if is_base_case(datum) {
        return Ok(chain);
    }
    loop {
        let current = chain.last().clone();
        let choice = overrides.get(chain.steps.len()).and_then(Option::as_ref);
        let (child, step) = reduce_step(&current, choice)?;
        if choice.is_none() {
            check_lemmas(&current, &step, &child).map_err(|reason| FootballError::Invariant {
                datum: current.to_string(),
                reason,
            })?;
        }
        let done = child.degree() == 2;
        if done && !is_two_two(&child) {
            return Err(FootballError::Invariant {
                datum: current.to_string(),
                reason: format!("reduction ended at {child}"),
            });
        }
        if !done && !theorem2_applies(&child) {
            return Err(FootballError::Invariant {
                datum: child.to_string(),
                reason: "intermediate datum fails k >= min length + 2".into(),
            });
        }
        chain.data.push(child);
        chain.steps.push(step);
        if done {
            return Ok(chain);
        }
    }
}

/// Fixed realizations of the three base data.
pub fn base_realize(datum: &BranchDatum) -> Result<RealizationCertificate, FootballError> {
    if !is_base_case(datum) {
        return Err(FootballError::NotBaseCase(datum.to_string()));
    }
    let d = datum.degree() as usize;
    let table: &[&str] = match (d, datum.k()) {
        (2, _) => &["(1 2)", "(1 2)"],
        (3, 3) => &["(1 2)", "(1 3)", "(1 3 2)"],
        _ => &["(1 2)", "(1 2)", "(1 3)", "(1 3)"],
    };
    let perms: Vec<Permutation> = table
        .iter()
        .map(|s| Permutation::parse_cycles(s, d).expect("table entry"))
        .collect();
    // Assign each datum partition a table slot of the same cycle type.
    let mut taken = vec![false; perms.len()];
    let mut index_map = Vec::with_capacity(perms.len());
    for pi in datum.partitions() {
        let slot = (0..perms.len())
            .find(|&j| !taken[j] && perms[j].cycle_type() == *pi)
            .expect("base table matches the datum");
        taken[slot] = true;
        index_map.push(slot);
    }
    let tuple = Tuple::new(d, perms).expect("uniform degree");
    RealizationCertificate::checked(datum.clone(), tuple, index_map, Method::Constructive, None)
        .ok_or_else(|| FootballError::NotBaseCase(datum.to_string()))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RealizeOptions {
    pub overrides: Vec<Option<StepOverride>>,
    /// Longest braid-move sequence tried when the shared-sheet condition fails.
    pub repair_depth: usize,
    pub fallback: OracleOptions,
}

impl Default for RealizeOptions {
    fn default() -> Self {
        RealizeOptions {
            overrides: Vec::new(),
            repair_depth: 4,
            fallback: OracleOptions { budget: SearchBudget::unlimited(), ..OracleOptions::default() },
        }
    }
}

/// A lifted tuple before surgery, with the parent index map and the two
/// positions whose cycles must grow.
#[derive(Clone)]
struct Staged {
    perms: Vec<Permutation>,
    index_map: Vec<usize>,
}

/// Tries to grow a `len_p`-cycle of `perms[p]` and a `len_q`-cycle of
/// `perms[q]` by the new point `n` while keeping the product.
///
/// With `M` the product of the members strictly between `p` and `q` (read
/// cyclically), splicing `n` after `x` in `perms[p]` and after
/// `y = M(perms[p](x))` in `perms[q]` leaves the product unchanged.
fn attach(perms: &[Permutation], p: usize, len_p: usize, q: usize, len_q: usize, n: usize) -> Option<Vec<Permutation>> {
    let k = perms.len();
    let d = perms[p].degree();
    let mut between = Permutation::identity(d);
    let mut j = (p + 1) % k;
    while j != q {
        between = between.then(&perms[j]);
        j = (j + 1) % k;
    }
    let beta_p = &perms[p];
    let beta_q = &perms[q];
    let q_cycle_len = cycle_lengths(beta_q);
    for cycle in beta_p.cycles() {
        if cycle.len() != len_p || cycle.contains(&n) {
            continue;
        }
        for &x in &cycle {
            let y = between.apply(beta_p.apply(x));
            if y != n && q_cycle_len[y - 1] == len_q {
                let mut out = perms.to_vec();
                out[p] = beta_p.insert_sheet(x, n).ok()?;
                out[q] = beta_q.insert_sheet(y, n).ok()?;
                return Some(out);
            }
        }
    }
    None
}

/// Length of the cycle through each (0-based) point.
fn cycle_lengths(p: &Permutation) -> Vec<usize> {
    let mut out = vec![0; p.degree()];
    for cycle in p.cycles() {
        for &x in &cycle {
            out[x - 1] = cycle.len();
        }
    }
    out
}

/// How one lifting step succeeded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum LiftKind {
    Direct,
    Repaired,
    Fallback,
}

impl LiftKind {
    fn method(self) -> Method {
        match self {
            LiftKind::Direct => Method::Constructive,
            LiftKind::Repaired => Method::ConstructiveWithRepair,
            LiftKind::Fallback => Method::OracleFallback,
        }
    }
}

/// Lifts a verified realization of the child datum of `step` to `parent`.
pub fn extend(
    cert: &RealizationCertificate,
    step: &ReductionStep,
    parent: &BranchDatum,
    options: &RealizeOptions,
) -> Result<(RealizationCertificate, LiftKind), FootballError> {
    let d = parent.degree() as usize;
    let n = d;
    let k = parent.k();

    let mut perms: Vec<Permutation> = cert.tuple.perms().iter().map(|p| p.lift(1)).collect();
    let mut index_map = vec![usize::MAX; k];
    for i in 0..k {
        match step.child_index(i) {
            Some(c) => index_map[i] = cert.index_map[c],
            None => {
                index_map[i] = perms.len();
                perms.push(Permutation::identity(d));
            }
        }
    }
    let staged = Staged { perms, index_map };
    let len_first = step.decremented_entry_first as usize - 1;
    let len_second = step.decremented_entry_second as usize - 1;

    let finish = |perms: Vec<Permutation>, index_map: Vec<usize>, kind: LiftKind| {
        let tuple = Tuple::new(d, perms).expect("uniform degree");
        RealizationCertificate::checked(parent.clone(), tuple, index_map, kind.method(), None).map(|c| (c, kind))
    };

    if let Some((perms, map)) = try_designations(&staged, parent, step, len_first, len_second, n) {
        if let Some(done) = finish(perms, map, LiftKind::Direct) {
            return Ok(done);
        }
    }

    // Reposition by Hurwitz moves; each move swaps two positions and
    // conjugates one member, which keeps classes, product and orbits.
    if options.repair_depth > 0 && staged.perms.len() >= 2 {
        let mut seen: HashSet<Vec<Permutation>> = HashSet::new();
        let mut queue: VecDeque<(Staged, usize)> = VecDeque::new();
        seen.insert(staged.perms.clone());
        queue.push_back((staged.clone(), 0));
        while let Some((state, depth)) = queue.pop_front() {
            if depth == options.repair_depth {
                continue;
            }
            let tuple = Tuple::new(d, state.perms.clone()).expect("uniform degree");
            for i in 0..tuple.len() - 1 {
                for inverse in [false, true] {
                    let moved = if inverse { tuple.braid_move_inverse(i) } else { tuple.braid_move(i) }
                        .expect("index in range");
                    let perms = moved.into_perms();
                    if !seen.insert(perms.clone()) {
                        continue;
                    }
                    let mut map = state.index_map.clone();
                    for slot in map.iter_mut() {
                        if *slot == i {
                            *slot = i + 1;
                        } else if *slot == i + 1 {
                            *slot = i;
                        }
                    }
                    let next = Staged { perms, index_map: map };
                    if let Some((perms, map)) = try_designations(&next, parent, step, len_first, len_second, n) {
                        if let Some(done) = finish(perms, map, LiftKind::Repaired) {
                            return Ok(done);
                        }
                    }
                    queue.push_back((next, depth + 1));
                }
            }
        }
    }

    let decision = oracle::decide_with(parent, &options.fallback)
        .map_err(|_| FootballError::FallbackExhausted(parent.to_string()))?;
    match decision.outcome {
        Outcome::Realizable(c) => Ok((
            RealizationCertificate { method: Method::OracleFallback, ..*c },
            LiftKind::Fallback,
        )),
        _ => Err(FootballError::FallbackExhausted(parent.to_string())),
    }
}

/// Tries the recorded designations, then any swap of a designated partition
/// with an undesignated one of the same child type, each in both cyclic
/// orientations.
fn try_designations(
    staged: &Staged,
    parent: &BranchDatum,
    step: &ReductionStep,
    len_first: usize,
    len_second: usize,
    n: usize,
) -> Option<(Vec<Permutation>, Vec<usize>)> {
    let k = parent.k();
    let (first, second) = (step.first_index, step.second_index);
    let child_type = |i: usize| staged.perms[staged.index_map[i]].cycle_type();
    let alternatives = |designated: usize| {
        let ty = child_type(designated);
        let mut alts = vec![designated];
        alts.extend((0..k).filter(|&i| {
            i != first && i != second && step.child_index(designated).is_some() && child_type(i) == ty
        }));
        alts
    };
    for &a in &alternatives(first) {
        for &b in &alternatives(second) {
            let mut map = staged.index_map.clone();
            map.swap(first, a);
            map.swap(second, b);
            let (pf, ps) = (map[first], map[second]);
            let found = attach(&staged.perms, pf, len_first, ps, len_second, n)
                .or_else(|| attach(&staged.perms, ps, len_second, pf, len_first, n));
            if let Some(perms) = found {
                return Some((perms, map));
            }
        }
    }
    None
}

/// Realizes a datum with `k >= min length + 2` by reduction and lifting.
pub fn realize(datum: &BranchDatum) -> Result<RealizationCertificate, FootballError> {
    realize_with(datum, &RealizeOptions::default())
}

pub fn realize_with(datum: &BranchDatum, options: &RealizeOptions) -> Result<RealizationCertificate, FootballError> {
    let chain = reduce_chain(datum, &options.overrides)?;
    let mut cert = base_realize(chain.last())?;
    let mut worst = LiftKind::Direct;
    for (i, step) in chain.steps.iter().enumerate().rev() {
        let (next, kind) = extend(&cert, step, &chain.data[i], options)?;
        worst = worst.max(kind);
        cert = next;
    }
    let tuple = cert.tuple;
    let index_map = cert.index_map;
    RealizationCertificate::checked(datum.clone(), tuple, index_map, worst.method(), Some(chain))
        .ok_or_else(|| FootballError::Invariant {
            datum: datum.to_string(),
            reason: "lifted tuple failed verification".into(),
        })
}

/// A worked example with the step overrides that reproduce its published
/// chain. Examples 1-3 need none.
pub fn worked_example(number: u32) -> Option<(BranchDatum, Vec<Option<StepOverride>>)> {
    let text = match number {
        1 => "5: 5; 2,2,1; 2,2,1",
        2 => "6: 3,2,1; 3,2,1; 2,2,1^2; 2,1^4; 2,1^4",
        3 => "6: 4,1,1; 3,2,1; 2,2,1^2; 2,1^4; 2,1^4",
        4 => "8: 4,2,2; 4,2,2; 2,2,1^4; 2,1^6; 2,1^6",
        _ => return None,
    };
    let datum: BranchDatum = text.parse().expect("example text");
    let overrides = if number == 4 {
        // At degree 5 the published chain keeps [2,2,1] as the fixed-point
        // donor and shrinks [4,1] and one [2,1^3].
        vec![
            None,
            None,
            None,
            Some(StepOverride {
                pk_index: Some(0),
                first_index: Some(1),
                second_index: Some(2),
                first_entry: Some(4),
                second_entry: Some(2),
            }),
        ]
    } else {
        Vec::new()
    };
    Some((datum, overrides))
}
