//! Exact realizability decision by search over permutation tuples.
//!
//! A datum `{pi_1, ..., pi_k}` of degree `d` is realizable iff there are
//! `alpha_i` of cycle type `pi_i` with `alpha_1 * ... * alpha_k = 1`
//! generating a transitive group. The search
//!
//! * orders the partitions by ascending class size,
//! * fixes `alpha_1` to the canonical class representative (simultaneous
//!   conjugation preserves all three conditions),
//! * enumerates positions `2..k-1` depth first while carrying the running
//!   product and the orbit partition,
//! * forces `alpha_k` to be the inverse of the running product,
//! * fixes `alpha_2` up to conjugation by the centralizer of `alpha_1`,
//! * prunes a prefix with product `P` and `m` orbits unless the remaining
//!   positions carry total branching at least `b(P) + 2(m - 1)`, where
//!   `b(P) = d - #cycles(P)`. The remaining members together with `P` form a
//!   product-one tuple; Riemann-Hurwitz on each of its `h` orbits gives
//!   `b(P) + rest >= 2d - 2h`, and joining the `m` prefix orbits with those
//!   `h` orbits into one needs `m + h - 1` distinct intersections, each of
//!   which contains a cycle of `P`, so `m + h - 1 <= d - b(P)`,
//! * remembers dead `(depth, product, orbits)` states.

use std::collections::HashSet;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use thiserror::Error;

use crate::certificate::{identity_map, Method, RealizationCertificate};
use crate::partition::{BranchDatum, Partition};
use crate::perm::{class_iterate, Permutation, Tuple};

/// Largest degree the oracle accepts. Conjugacy classes are materialised in
/// memory, and `S_10` is the last group where that stays cheap.
pub const MAX_ORACLE_DEGREE: u32 = 10;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("datum is not genus-consistent (nu = {nu}, degree {degree})")]
    NotGenusConsistent { nu: u64, degree: u32 },
    #[error("degree {0} exceeds the oracle limit {MAX_ORACLE_DEGREE}")]
    DegreeTooLarge(u32),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SearchBudget {
    pub max_nodes: Option<u64>,
    pub max_time: Option<Duration>,
}

impl SearchBudget {
    pub fn unlimited() -> Self {
        SearchBudget::default()
    }

    pub fn nodes(max_nodes: u64) -> Self {
        SearchBudget { max_nodes: Some(max_nodes), max_time: None }
    }

    pub fn is_exhaustive(&self) -> bool {
        self.max_nodes.is_none() && self.max_time.is_none()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleOptions {
    pub budget: SearchBudget,
    /// Worker count for the top search level; 1 keeps certificates deterministic.
    pub jobs: usize,
    /// Maximum number of remembered dead states per worker.
    pub memo_limit: usize,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions { budget: SearchBudget::unlimited(), jobs: 1, memo_limit: 1 << 22 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Realizable(Box<RealizationCertificate>),
    Exceptional,
    Unknown,
}

impl Outcome {
    pub fn label(&self) -> &'static str {
        match self {
            Outcome::Realizable(_) => "realizable",
            Outcome::Exceptional => "exceptional",
            Outcome::Unknown => "unknown",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Decision {
    pub outcome: Outcome,
    pub nodes_explored: u64,
    pub wall_time: Duration,
    /// Set when several workers raced; the certificate is then whichever
    /// worker finished first.
    pub parallel: bool,
}

impl Decision {
    pub fn is_realizable(&self) -> bool {
        matches!(self.outcome, Outcome::Realizable(_))
    }

    pub fn is_exceptional(&self) -> bool {
        matches!(self.outcome, Outcome::Exceptional)
    }

    pub fn certificate(&self) -> Option<&RealizationCertificate> {
        match &self.outcome {
            Outcome::Realizable(c) => Some(c),
            _ => None,
        }
    }
}

pub fn decide(datum: &BranchDatum, budget: SearchBudget) -> Result<Decision, OracleError> {
    decide_with(datum, &OracleOptions { budget, ..OracleOptions::default() })
}

pub fn decide_with(datum: &BranchDatum, options: &OracleOptions) -> Result<Decision, OracleError> {
    let start = Instant::now();
    if !datum.is_genus_consistent() {
        return Err(OracleError::NotGenusConsistent { nu: datum.nu(), degree: datum.degree() });
    }
    if datum.degree() > MAX_ORACLE_DEGREE {
        return Err(OracleError::DegreeTooLarge(datum.degree()));
    }
    let d = datum.degree() as usize;
    let k = datum.k();

    let finish = |outcome, nodes, parallel| Decision {
        outcome,
        nodes_explored: nodes,
        wall_time: start.elapsed(),
        parallel,
    };

    if k == 0 {
        // Only d = 1 passes the genus check with no branch points.
        let tuple = Tuple::new(d, Vec::new()).expect("empty tuple");
        let cert = RealizationCertificate::checked(datum.clone(), tuple, Vec::new(), Method::OracleSearch, None)
            .expect("empty tuple realizes the trivial datum");
        return Ok(finish(Outcome::Realizable(Box::new(cert)), 0, false));
    }

    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by_key(|&i| (datum.partitions()[i].class_size(), i));
    let problem = Problem::new(datum, &order);

    let (found, nodes, aborted, parallel) = if options.jobs > 1 && k >= 3 {
        problem.run_parallel(options, start)
    } else {
        let mut searcher = Searcher::new(&problem, options, start, None);
        let found = searcher.run_from_root();
        (found, searcher.nodes, searcher.aborted, false)
    };

    let outcome = match found {
        Some(images) => {
            let cert = problem.certificate(datum, &order, images);
            Outcome::Realizable(Box::new(cert))
        }
        None if aborted => Outcome::Unknown,
        None => Outcome::Exceptional,
    };
    Ok(finish(outcome, nodes, parallel))
}

/// Flattened search data in search order.
struct Problem {
    d: usize,
    k: usize,
    first: Vec<u8>,
    /// Members of the classes at positions `1..k-1`, each `d` bytes.
    classes: Vec<Vec<u8>>,
    /// Sorted cycle lengths of the last position.
    last_type: Vec<u8>,
    /// `capacity[j]`: total branching of positions `j..k`.
    capacity: Vec<usize>,
}

fn to_bytes(p: &Permutation) -> Vec<u8> {
    p.images0().iter().map(|&x| x as u8).collect()
}

impl Problem {
    fn new(datum: &BranchDatum, order: &[usize]) -> Self {
        let d = datum.degree() as usize;
        let k = order.len();
        let parts: Vec<&Partition> = order.iter().map(|&i| &datum.partitions()[i]).collect();
        let first = to_bytes(&class_iterate(parts[0]).next().expect("non-empty class"));
        let classes = (0..k)
            .map(|j| {
                if j == 0 || j + 1 == k {
                    Vec::new()
                } else if j == 1 {
                    orbit_representatives(&first, parts[1])
                } else {
                    class_iterate(parts[j]).flat_map(|p| to_bytes(&p)).collect()
                }
            })
            .collect();
        let mut last_type: Vec<u8> = parts[k - 1].parts().iter().map(|&x| x as u8).collect();
        last_type.sort_unstable();
        let mut capacity = vec![0usize; k + 1];
        for j in (0..k).rev() {
            capacity[j] = capacity[j + 1] + parts[j].branching() as usize;
        }
        Problem { d, k, first, classes, last_type, capacity }
    }

    /// Turns a found search-order tuple into a verified certificate listed in
    /// datum order. Hurwitz moves carry each member to its datum position
    /// without changing any cycle type or the product.
    fn certificate(&self, datum: &BranchDatum, order: &[usize], images: Vec<Vec<u8>>) -> RealizationCertificate {
        let perms: Vec<Permutation> = images
            .into_iter()
            .map(|img| Permutation::from_zero_based(img.into_iter().map(usize::from).collect()))
            .collect();
        let mut tuple = Tuple::new(self.d, perms).expect("uniform degree");
        let mut labels: Vec<usize> = order.to_vec();
        for target in 0..self.k {
            let mut j = labels.iter().position(|&l| l == target).expect("label present");
            while j > target {
                tuple = tuple.braid_move(j - 1).expect("index in range");
                labels.swap(j - 1, j);
                j -= 1;
            }
        }
        RealizationCertificate::checked(datum.clone(), tuple, identity_map(self.k), Method::OracleSearch, None)
            .expect("search result satisfies the criterion")
    }

    fn run_parallel(&self, options: &OracleOptions, start: Instant) -> (Option<Vec<Vec<u8>>>, u64, bool, bool) {
        let stop = AtomicBool::new(false);
        let shared_nodes = AtomicU64::new(0);
        let aborted = AtomicBool::new(false);
        let members = if self.k >= 3 { self.classes[1].len() / self.d.max(1) } else { 0 };
        let chunks = (options.jobs * 4).max(1);
        let chunk_len = members.div_ceil(chunks).max(1);
        let ranges: Vec<(usize, usize)> = (0..members)
            .step_by(chunk_len)
            .map(|s| (s, (s + chunk_len).min(members)))
            .collect();
        let run = || {
            ranges.par_iter().find_map_any(|&(lo, hi)| {
                let shared = Shared { stop: &stop, nodes: &shared_nodes };
                let mut searcher = Searcher::new(self, options, start, Some(shared));
                let found = searcher.run_range(lo, hi);
                if searcher.aborted {
                    aborted.store(true, Ordering::Relaxed);
                }
                if found.is_some() {
                    stop.store(true, Ordering::Relaxed);
                }
                found
            })
        };
        let found = match rayon::ThreadPoolBuilder::new().num_threads(options.jobs).build() {
            Ok(pool) => pool.install(run),
            Err(_) => run(),
        };
        let aborted = found.is_none() && aborted.load(Ordering::Relaxed);
        (found, shared_nodes.load(Ordering::Relaxed), aborted, true)
    }
}

/// Generators of the centralizer of `p`: the rotation of each cycle and the
/// aligned swap of each pair of consecutive cycles of equal length.
fn centralizer_generators(p: &[u8]) -> Vec<Vec<u8>> {
    let d = p.len();
    let mut seen = vec![false; d];
    let mut cycles: Vec<Vec<u8>> = Vec::new();
    for s in 0..d {
        if seen[s] {
            continue;
        }
        let mut c = Vec::new();
        let mut x = s;
        while !seen[x] {
            seen[x] = true;
            c.push(x as u8);
            x = p[x] as usize;
        }
        cycles.push(c);
    }
    cycles.sort_by_key(Vec::len);
    let identity: Vec<u8> = (0..d as u8).collect();
    let mut gens = Vec::new();
    for c in cycles.iter().filter(|c| c.len() > 1) {
        let mut g = identity.clone();
        for (i, &x) in c.iter().enumerate() {
            g[x as usize] = c[(i + 1) % c.len()];
        }
        gens.push(g);
    }
    for pair in cycles.windows(2) {
        if pair[0].len() == pair[1].len() {
            let mut g = identity.clone();
            for (&a, &b) in pair[0].iter().zip(&pair[1]) {
                g[a as usize] = b;
                g[b as usize] = a;
            }
            gens.push(g);
        }
    }
    gens
}

/// One member per orbit of the class of `pi` under conjugation by the
/// centralizer of `first`, flattened. Conjugating a whole solution by such
/// an element keeps `first` in place, so the second position only needs
/// these representatives.
fn orbit_representatives(first: &[u8], pi: &Partition) -> Vec<u8> {
    let d = first.len();
    let members: Vec<Vec<u8>> = class_iterate(pi).map(|p| to_bytes(&p)).collect();
    let gens = centralizer_generators(first);
    let index: std::collections::HashMap<&[u8], usize> =
        members.iter().enumerate().map(|(i, m)| (m.as_slice(), i)).collect();
    let mut visited = vec![false; members.len()];
    let mut out = Vec::new();
    let mut stack = Vec::new();
    let mut image = vec![0u8; d];
    for start in 0..members.len() {
        if visited[start] {
            continue;
        }
        visited[start] = true;
        out.extend_from_slice(&members[start]);
        stack.push(start);
        while let Some(m) = stack.pop() {
            let q = &members[m];
            for g in &gens {
                // relabel every point x as g(x)
                for x in 0..d {
                    image[g[x] as usize] = g[q[x] as usize];
                }
                let j = index[image.as_slice()];
                if !visited[j] {
                    visited[j] = true;
                    stack.push(j);
                }
            }
        }
    }
    out
}

struct Shared<'a> {
    stop: &'a AtomicBool,
    nodes: &'a AtomicU64,
}

struct Searcher<'a> {
    problem: &'a Problem,
    budget: SearchBudget,
    start: Instant,
    memo: HashSet<Vec<u8>>,
    memo_limit: usize,
    nodes: u64,
    aborted: bool,
    shared: Option<Shared<'a>>,
    /// Per-depth running products and orbit labels.
    prod: Vec<Vec<u8>>,
    label: Vec<Vec<u8>>,
    orbits: Vec<usize>,
    chosen: Vec<usize>,
    key: Vec<u8>,
}

impl<'a> Searcher<'a> {
    fn new(problem: &'a Problem, options: &OracleOptions, start: Instant, shared: Option<Shared<'a>>) -> Self {
        let (d, k) = (problem.d, problem.k);
        let mut s = Searcher {
            problem,
            budget: options.budget,
            start,
            memo: HashSet::new(),
            memo_limit: options.memo_limit,
            nodes: 0,
            aborted: false,
            shared,
            prod: vec![vec![0; d]; k],
            label: vec![vec![0; d]; k],
            orbits: vec![d; k],
            chosen: vec![0; k],
            key: Vec::with_capacity(2 * d + 1),
        };
        s.prod[0].copy_from_slice(&problem.first);
        let mut lab: Vec<u8> = (0..d as u8).collect();
        s.orbits[0] = merge(&mut lab, d, &problem.first);
        s.label[0] = lab;
        s
    }

    fn run_from_root(&mut self) -> Option<Vec<Vec<u8>>> {
        if self.problem.k == 1 {
            // A single nontrivial permutation is never the identity.
            return None;
        }
        let members = if self.problem.k >= 3 { self.problem.classes[1].len() / self.problem.d } else { 0 };
        self.run_range(0, members)
    }

    fn run_range(&mut self, lo: usize, hi: usize) -> Option<Vec<Vec<u8>>> {
        if self.problem.k == 2 {
            return self.check_last(0).then(|| self.collect());
        }
        if self.prune(0) {
            return None;
        }
        if self.extend(1, lo, hi) {
            Some(self.collect())
        } else {
            None
        }
    }

    fn collect(&self) -> Vec<Vec<u8>> {
        let p = self.problem;
        let d = p.d;
        let mut out = vec![p.first.clone()];
        for j in 1..p.k - 1 {
            let m = self.chosen[j];
            out.push(p.classes[j][m * d..(m + 1) * d].to_vec());
        }
        let last = &self.prod[p.k - 2];
        let mut inv = vec![0u8; d];
        for (i, &y) in last.iter().enumerate() {
            inv[y as usize] = i as u8;
        }
        out.push(inv);
        out
    }

    fn out_of_budget(&mut self) -> bool {
        if self.aborted {
            return true;
        }
        let total = match &self.shared {
            Some(s) => {
                if s.stop.load(Ordering::Relaxed) {
                    self.aborted = true;
                    return true;
                }
                s.nodes.fetch_add(1, Ordering::Relaxed) + 1
            }
            None => self.nodes,
        };
        if self.budget.max_nodes.is_some_and(|m| total > m) {
            self.aborted = true;
        } else if let Some(limit) = self.budget.max_time {
            if self.nodes % 1024 == 0 && self.start.elapsed() > limit {
                self.aborted = true;
            }
        }
        self.aborted
    }

    /// Branching bound for the state after position `depth`.
    fn prune(&self, depth: usize) -> bool {
        let d = self.problem.d;
        let prod = &self.prod[depth];
        let mut seen = [false; 16];
        let mut cycles = 0;
        for s in 0..d {
            if !seen[s] {
                cycles += 1;
                let mut x = s;
                while !seen[x] {
                    seen[x] = true;
                    x = prod[x] as usize;
                }
            }
        }
        (d - cycles) + 2 * (self.orbits[depth] - 1) > self.problem.capacity[depth + 1]
    }

    /// Whether `alpha_k = (running product)^-1` has the required type and
    /// closes the orbits.
    fn check_last(&self, depth: usize) -> bool {
        let p = self.problem;
        let d = p.d;
        let prod = &self.prod[depth];
        let mut seen = [false; 16];
        let mut lengths: Vec<u8> = Vec::with_capacity(d);
        let mut lab = self.label[depth].clone();
        for s in 0..d {
            if seen[s] {
                continue;
            }
            let mut len = 0u8;
            let mut x = s;
            while !seen[x] {
                seen[x] = true;
                len += 1;
                x = prod[x] as usize;
            }
            lengths.push(len);
        }
        lengths.sort_unstable();
        if lengths != p.last_type {
            return false;
        }
        merge(&mut lab, d, prod) == 1
    }

    /// Fills position `pos` with class members `lo..hi` and recurses.
    fn extend(&mut self, pos: usize, lo: usize, hi: usize) -> bool {
        let p = self.problem;
        let d = p.d;
        let last_search = pos + 2 == p.k;
        for m in lo..hi {
            self.nodes += 1;
            if self.out_of_budget() {
                return false;
            }
            let member = &p.classes[pos][m * d..(m + 1) * d];
            let (before, after) = self.prod.split_at_mut(pos);
            let prev = &before[pos - 1];
            let cur = &mut after[0];
            for i in 0..d {
                cur[i] = member[prev[i] as usize];
            }
            let (lb, la) = self.label.split_at_mut(pos);
            la[0].copy_from_slice(&lb[pos - 1]);
            self.orbits[pos] = merge(&mut la[0], d, member);
            self.chosen[pos] = m;
            if self.prune(pos) {
                continue;
            }
            if last_search {
                if self.check_last(pos) {
                    return true;
                }
                continue;
            }
            self.key.clear();
            self.key.push(pos as u8);
            self.key.extend_from_slice(&self.prod[pos]);
            self.key.extend_from_slice(&self.label[pos]);
            if self.memo.contains(&self.key) {
                continue;
            }
            let members = p.classes[pos + 1].len() / d;
            if self.extend(pos + 1, 0, members) {
                return true;
            }
            if self.aborted {
                return false;
            }
            if self.memo.len() < self.memo_limit {
                let key = {
                    let mut k = Vec::with_capacity(2 * d + 1);
                    k.push(pos as u8);
                    k.extend_from_slice(&self.prod[pos]);
                    k.extend_from_slice(&self.label[pos]);
                    k
                };
                self.memo.insert(key);
            }
        }
        false
    }
}

/// Merges the cycles of `perm` into the orbit labelling `lab` (each point
/// labelled by the smallest point of its orbit). Returns the orbit count.
fn merge(lab: &mut [u8], d: usize, perm: &[u8]) -> usize {
    // Relabelling whole classes never separates pairs already merged, so a
    // single pass suffices.
    for i in 0..d {
        let j = perm[i] as usize;
        let (a, b) = (lab[i], lab[j]);
        if a != b {
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            for l in lab.iter_mut() {
                if *l == hi {
                    *l = lo;
                }
            }
        }
    }
    let mut distinct = [false; 16];
    lab.iter().filter(|&&l| !std::mem::replace(&mut distinct[l as usize], true)).count()
}
