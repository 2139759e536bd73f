//! Permutations of `{1, ..., d}` and tuples of them.
//!
//! Products are read left to right: `(a * b)(x) = b(a(x))`, i.e. the left
//! factor is applied first. Points are 1-based in every public signature and
//! in the cycle notation `"(1 2 3)(4 5)"`; storage is 0-based.

use std::fmt;

use thiserror::Error;

use crate::partition::Partition;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PermError {
    #[error("degree mismatch: {0} vs {1}")]
    DegreeMismatch(usize, usize),
    #[error("images do not form a bijection of 1..={0}")]
    NotBijection(usize),
    #[error("point {point} outside 1..={degree}")]
    PointOutOfRange { point: usize, degree: usize },
    #[error("point {0} is moved, expected a fixed point")]
    NotFixed(usize),
    #[error("insertion point and new point coincide ({0})")]
    SamePoint(usize),
    #[error("braid index {index} out of range for a tuple of length {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("malformed cycle notation: {0}")]
    Syntax(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    pub fn identity(degree: usize) -> Self {
        Permutation { images: (0..degree).collect() }
    }

    /// `images[i]` is the (1-based) image of point `i + 1`.
    pub fn from_images(images: &[usize]) -> Result<Self, PermError> {
        let d = images.len();
        let mut seen = vec![false; d];
        let mut zero_based = Vec::with_capacity(d);
        for &y in images {
            if y == 0 || y > d || seen[y - 1] {
                return Err(PermError::NotBijection(d));
            }
            seen[y - 1] = true;
            zero_based.push(y - 1);
        }
        Ok(Permutation { images: zero_based })
    }

    pub(crate) fn from_zero_based(images: Vec<usize>) -> Self {
        debug_assert!({
            let mut s = images.clone();
            s.sort_unstable();
            s.iter().enumerate().all(|(i, &v)| i == v)
        });
        Permutation { images }
    }

    /// Builds a permutation from disjoint cycles given with 1-based points.
    pub fn from_cycles(degree: usize, cycles: &[&[usize]]) -> Result<Self, PermError> {
        let mut images: Vec<usize> = (0..degree).collect();
        let mut touched = vec![false; degree];
        for cycle in cycles {
            for (i, &x) in cycle.iter().enumerate() {
                if x == 0 || x > degree {
                    return Err(PermError::PointOutOfRange { point: x, degree });
                }
                if touched[x - 1] {
                    return Err(PermError::NotBijection(degree));
                }
                touched[x - 1] = true;
                images[x - 1] = cycle[(i + 1) % cycle.len()] - 1;
            }
        }
        Ok(Permutation { images })
    }

    /// Parses cycle notation such as `"(1 3 2)(4 5)"` or `"()"`. The degree
    /// is always supplied by the caller.
    pub fn parse_cycles(text: &str, degree: usize) -> Result<Self, PermError> {
        let text = text.trim();
        let mut cycles: Vec<Vec<usize>> = Vec::new();
        let mut rest = text;
        while !rest.is_empty() {
            let open = rest
                .strip_prefix('(')
                .ok_or_else(|| PermError::Syntax(text.to_string()))?;
            let close = open.find(')').ok_or_else(|| PermError::Syntax(text.to_string()))?;
            let body = &open[..close];
            let cycle = body
                .split(|c: char| c.is_whitespace() || c == ',')
                .filter(|t| !t.is_empty())
                .map(|t| t.parse::<usize>().map_err(|_| PermError::Syntax(text.to_string())))
                .collect::<Result<Vec<_>, _>>()?;
            if !cycle.is_empty() {
                cycles.push(cycle);
            }
            rest = open[close + 1..].trim_start();
        }
        let refs: Vec<&[usize]> = cycles.iter().map(Vec::as_slice).collect();
        Permutation::from_cycles(degree, &refs)
    }

    pub fn degree(&self) -> usize {
        self.images.len()
    }

    /// Image of the 1-based point `x`.
    pub fn apply(&self, x: usize) -> usize {
        self.images[x - 1] + 1
    }

    pub(crate) fn images0(&self) -> &[usize] {
        &self.images
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &v)| i == v)
    }

    pub fn fixes(&self, x: usize) -> bool {
        self.images[x - 1] == x - 1
    }

    /// `self * other`: apply `self` first, then `other`.
    pub fn compose(&self, other: &Permutation) -> Result<Permutation, PermError> {
        if self.degree() != other.degree() {
            return Err(PermError::DegreeMismatch(self.degree(), other.degree()));
        }
        Ok(self.then(other))
    }

    pub(crate) fn then(&self, other: &Permutation) -> Permutation {
        Permutation { images: self.images.iter().map(|&y| other.images[y]).collect() }
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.degree()];
        for (i, &y) in self.images.iter().enumerate() {
            inv[y] = i;
        }
        Permutation { images: inv }
    }

    /// `sigma^-1 * self * sigma`, i.e. relabel every point `x` as `sigma(x)`.
    pub fn conjugate_by(&self, sigma: &Permutation) -> Permutation {
        sigma.inverse().then(self).then(sigma)
    }

    /// All cycles including fixed points, each starting at its smallest point,
    /// ordered by that point. Points are 1-based.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let d = self.degree();
        let mut seen = vec![false; d];
        let mut out = Vec::new();
        for start in 0..d {
            if seen[start] {
                continue;
            }
            let mut cycle = Vec::new();
            let mut x = start;
            while !seen[x] {
                seen[x] = true;
                cycle.push(x + 1);
                x = self.images[x];
            }
            out.push(cycle);
        }
        out
    }

    /// The cycle containing the 1-based point `x`, starting at `x`.
    pub fn cycle_of(&self, x: usize) -> Vec<usize> {
        let mut cycle = vec![x];
        let mut y = self.apply(x);
        while y != x {
            cycle.push(y);
            y = self.apply(y);
        }
        cycle
    }

    pub fn cycle_type(&self) -> Partition {
        if self.degree() == 0 {
            return Partition::new(vec![]).unwrap_or_else(|| Partition::trivial(0));
        }
        Partition::new(self.cycles().iter().map(|c| c.len() as u32).collect())
            .expect("cycle lengths are positive")
    }

    /// The same permutation on `{1, ..., degree + extra}` with the new points fixed.
    pub fn lift(&self, extra: usize) -> Permutation {
        let d = self.degree();
        let mut images = self.images.clone();
        images.extend(d..d + extra);
        Permutation { images }
    }

    /// Splices the fixed point `n` into the cycle of `x`, right after `x`:
    /// `x -> n -> p(x)`. Equals `(x n) * p` under left-first products.
    pub fn insert_sheet(&self, x: usize, n: usize) -> Result<Permutation, PermError> {
        let d = self.degree();
        for &pt in &[x, n] {
            if pt == 0 || pt > d {
                return Err(PermError::PointOutOfRange { point: pt, degree: d });
            }
        }
        if x == n {
            return Err(PermError::SamePoint(x));
        }
        if !self.fixes(n) {
            return Err(PermError::NotFixed(n));
        }
        let mut images = self.images.clone();
        images[n - 1] = images[x - 1];
        images[x - 1] = n - 1;
        Ok(Permutation { images })
    }

    /// Removes `n` from its cycle (its predecessor now maps to its image) and
    /// makes it a fixed point. Inverse of [`Permutation::insert_sheet`].
    pub fn contract(&self, n: usize) -> Permutation {
        let mut images = self.images.clone();
        let target = images[n - 1];
        if target != n - 1 {
            let pred = images.iter().position(|&y| y == n - 1).expect("bijection");
            images[pred] = target;
            images[n - 1] = n - 1;
        }
        Permutation { images }
    }

    /// Transposition `(a b)` of the given degree, 1-based.
    pub fn transposition(degree: usize, a: usize, b: usize) -> Permutation {
        let mut images: Vec<usize> = (0..degree).collect();
        images.swap(a - 1, b - 1);
        Permutation { images }
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut any = false;
        for cycle in self.cycles() {
            if cycle.len() < 2 {
                continue;
            }
            any = true;
            f.write_str("(")?;
            for (i, x) in cycle.iter().enumerate() {
                if i > 0 {
                    f.write_str(" ")?;
                }
                write!(f, "{x}")?;
            }
            f.write_str(")")?;
        }
        if !any {
            f.write_str("()")?;
        }
        Ok(())
    }
}

/// `a * b` under the left-first convention.
pub fn compose(a: &Permutation, b: &Permutation) -> Result<Permutation, PermError> {
    a.compose(b)
}

pub fn cycle_type(p: &Permutation) -> Partition {
    p.cycle_type()
}

/// Disjoint-set forest over `0..n`, used to track orbits.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<usize>,
    components: usize,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect(), components: n }
    }

    pub fn root(&mut self, mut i: usize) -> usize {
        while self.parent[i] != i {
            self.parent[i] = self.parent[self.parent[i]];
            i = self.parent[i];
        }
        i
    }

    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.root(a), self.root(b));
        if ra == rb {
            return false;
        }
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.parent[hi] = lo;
        self.components -= 1;
        true
    }

    pub fn components(&self) -> usize {
        self.components
    }
}

/// An ordered list of permutations of a common degree.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Tuple {
    degree: usize,
    perms: Vec<Permutation>,
}

impl Tuple {
    pub fn new(degree: usize, perms: Vec<Permutation>) -> Result<Self, PermError> {
        if let Some(p) = perms.iter().find(|p| p.degree() != degree) {
            return Err(PermError::DegreeMismatch(degree, p.degree()));
        }
        Ok(Tuple { degree, perms })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn perms(&self) -> &[Permutation] {
        &self.perms
    }

    pub fn len(&self) -> usize {
        self.perms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perms.is_empty()
    }

    pub fn into_perms(self) -> Vec<Permutation> {
        self.perms
    }

    /// `perms[0] * perms[1] * ... `, left factor applied first.
    pub fn product(&self) -> Permutation {
        self.perms
            .iter()
            .fold(Permutation::identity(self.degree), |acc, p| acc.then(p))
    }

    /// Whether the generated group has one orbit on `{1, ..., d}`. Only the
    /// cycles of the generators are needed, not the group itself.
    pub fn is_transitive(&self) -> bool {
        if self.degree <= 1 {
            return true;
        }
        let mut uf = UnionFind::new(self.degree);
        for p in &self.perms {
            for (i, &y) in p.images0().iter().enumerate() {
                uf.union(i, y);
            }
        }
        uf.components() == 1
    }

    /// Hurwitz move at positions `i, i + 1` (0-based):
    /// `(a, b) -> (b, b^-1 * a * b)`.
    pub fn braid_move(&self, i: usize) -> Result<Tuple, PermError> {
        if i + 1 >= self.perms.len() {
            return Err(PermError::IndexOutOfRange { index: i, len: self.perms.len() });
        }
        let mut perms = self.perms.clone();
        let a = &self.perms[i];
        let b = &self.perms[i + 1];
        perms[i] = b.clone();
        perms[i + 1] = a.conjugate_by(b);
        Ok(Tuple { degree: self.degree, perms })
    }

    /// Inverse Hurwitz move: `(a, b) -> (a * b * a^-1, a)`.
    pub fn braid_move_inverse(&self, i: usize) -> Result<Tuple, PermError> {
        if i + 1 >= self.perms.len() {
            return Err(PermError::IndexOutOfRange { index: i, len: self.perms.len() });
        }
        let mut perms = self.perms.clone();
        let a = &self.perms[i];
        let b = &self.perms[i + 1];
        perms[i] = b.conjugate_by(&a.inverse());
        perms[i + 1] = a.clone();
        Ok(Tuple { degree: self.degree, perms })
    }

    /// Simultaneous conjugation of every member.
    pub fn conjugate_by(&self, sigma: &Permutation) -> Tuple {
        Tuple {
            degree: self.degree,
            perms: self.perms.iter().map(|p| p.conjugate_by(sigma)).collect(),
        }
    }
}

pub fn is_transitive(t: &Tuple) -> bool {
    t.is_transitive()
}

#[derive(Debug, Clone, Copy)]
enum Decision {
    /// A new cycle led by `leader` with `len` points.
    Length { leader: usize, len: usize },
    /// `point` follows `prev` in the open cycle; `left` points still to place.
    Member { leader: usize, prev: usize, point: usize, left: usize },
}

/// Streams every permutation of a given cycle type exactly once.
///
/// Order: the smallest unused point leads the next cycle; its length is tried
/// from the longest available down, and the remaining members of the cycle are
/// chosen in increasing order. The first permutation produced is the canonical
/// representative, e.g. `(1 2 3)(4 5)` for `[3, 2, 1]`.
pub struct ClassIter {
    degree: usize,
    mult: Vec<usize>,
    used: Vec<bool>,
    images: Vec<usize>,
    stack: Vec<Decision>,
    started: bool,
    done: bool,
}

pub fn class_iterate(pi: &Partition) -> ClassIter {
    let degree = pi.degree() as usize;
    let mut mult = vec![0usize; degree + 1];
    for &p in pi.parts() {
        mult[p as usize] += 1;
    }
    ClassIter {
        degree,
        mult,
        used: vec![false; degree],
        images: (0..degree).collect(),
        stack: Vec::with_capacity(2 * degree),
        started: false,
        done: false,
    }
}

impl ClassIter {
    fn next_unused_after(&self, after: Option<usize>) -> Option<usize> {
        let start = after.map_or(0, |a| a + 1);
        (start..self.degree).find(|&i| !self.used[i])
    }

    fn longest_available(&self, below: usize) -> Option<usize> {
        (1..below.min(self.degree + 1)).rev().find(|&l| self.mult[l] > 0)
    }

    fn push_length(&mut self, leader: usize, len: usize) {
        self.used[leader] = true;
        self.mult[len] -= 1;
        if len == 1 {
            self.images[leader] = leader;
        }
        self.stack.push(Decision::Length { leader, len });
    }

    fn push_member(&mut self, leader: usize, prev: usize, point: usize, left: usize) {
        self.used[point] = true;
        self.images[prev] = point;
        if left == 0 {
            self.images[point] = leader;
        }
        self.stack.push(Decision::Member { leader, prev, point, left });
    }

    /// Extends the current prefix with first choices until it is complete.
    fn descend(&mut self) {
        loop {
            match self.stack.last().copied() {
                Some(Decision::Length { leader, len }) if len > 1 => {
                    let point = self.next_unused_after(None).expect("enough points");
                    self.push_member(leader, leader, point, len - 2);
                }
                Some(Decision::Member { leader, point, left, .. }) if left > 0 => {
                    let next = self.next_unused_after(None).expect("enough points");
                    self.push_member(leader, point, next, left - 1);
                }
                _ => match self.next_unused_after(None) {
                    None => return,
                    Some(leader) => {
                        let len = self.longest_available(usize::MAX).expect("lengths remain");
                        self.push_length(leader, len);
                    }
                },
            }
        }
    }

    /// Pops decisions until one can take its next option. Returns false when
    /// the enumeration is exhausted.
    fn advance(&mut self) -> bool {
        while let Some(top) = self.stack.pop() {
            match top {
                Decision::Length { leader, len } => {
                    self.used[leader] = false;
                    self.mult[len] += 1;
                    if let Some(shorter) = self.longest_available(len) {
                        self.push_length(leader, shorter);
                        return true;
                    }
                }
                Decision::Member { leader, prev, point, left } => {
                    self.used[point] = false;
                    if let Some(next) = self.next_unused_after(Some(point)) {
                        self.push_member(leader, prev, next, left);
                        return true;
                    }
                }
            }
        }
        false
    }
}

impl Iterator for ClassIter {
    type Item = Permutation;

    fn next(&mut self) -> Option<Permutation> {
        if self.done {
            return None;
        }
        if !self.started {
            self.started = true;
        } else if !self.advance() {
            self.done = true;
            return None;
        }
        self.descend();
        Some(Permutation::from_zero_based(self.images.clone()))
    }
}

/// First element of [`class_iterate`].
pub fn canonical_representative(pi: &Partition) -> Permutation {
    class_iterate(pi).next().expect("every class is non-empty")
}
