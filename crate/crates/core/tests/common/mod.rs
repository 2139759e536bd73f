//! Reference implementations used as test oracles. Nothing here calls into
//! the search or construction code of the library.
#![allow(dead_code)]

use std::collections::HashSet;

/// All permutations of `0..d` as image vectors.
pub fn all_perms(d: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current: Vec<usize> = (0..d).collect();
    heap(d, &mut current, &mut out);
    out
}

fn heap(k: usize, a: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if k <= 1 {
        out.push(a.clone());
        return;
    }
    heap(k - 1, a, out);
    for i in 0..k - 1 {
        if k % 2 == 0 {
            a.swap(i, k - 1);
        } else {
            a.swap(0, k - 1);
        }
        heap(k - 1, a, out);
    }
}

/// Cycle lengths in non-increasing order, fixed points included.
pub fn cycle_type(p: &[usize]) -> Vec<u32> {
    let mut seen = vec![false; p.len()];
    let mut lens = Vec::new();
    for s in 0..p.len() {
        if seen[s] {
            continue;
        }
        let mut len = 0;
        let mut x = s;
        while !seen[x] {
            seen[x] = true;
            x = p[x];
            len += 1;
        }
        lens.push(len);
    }
    lens.sort_unstable_by(|a, b| b.cmp(a));
    lens
}

/// `a` then `b`.
pub fn then(a: &[usize], b: &[usize]) -> Vec<usize> {
    a.iter().map(|&x| b[x]).collect()
}

/// `d! / z(pi)` with `z = prod m_j! j^m_j`.
pub fn class_size(parts: &[u32]) -> u128 {
    let d: u32 = parts.iter().sum();
    let mut z: u128 = 1;
    let mut mult = std::collections::BTreeMap::new();
    for &p in parts {
        *mult.entry(p).or_insert(0u32) += 1;
    }
    for (&j, &m) in &mult {
        for i in 1..=m as u128 {
            z *= i * j as u128;
        }
    }
    (1..=d as u128).product::<u128>() / z
}

/// Canonical relabelling of a set partition given as labels.
fn canon(labels: &[usize]) -> Vec<usize> {
    let mut map = vec![usize::MAX; labels.len()];
    let mut next = 0;
    labels
        .iter()
        .map(|&l| {
            if map[l] == usize::MAX {
                map[l] = next;
                next += 1;
            }
            map[l]
        })
        .collect()
}

fn join(labels: &[usize], p: &[usize]) -> Vec<usize> {
    let mut lab = labels.to_vec();
    loop {
        let mut changed = false;
        for i in 0..p.len() {
            let (a, b) = (lab[i], lab[p[i]]);
            if a != b {
                let lo = a.min(b);
                for l in lab.iter_mut() {
                    if *l == a || *l == b {
                        *l = lo;
                    }
                }
                changed = true;
            }
        }
        if !changed {
            return canon(&lab);
        }
    }
}

/// Exhaustive decision over full conjugacy classes: a forward pass over the
/// set of reachable `(product, orbit partition)` states.
pub fn brute_realizable(d: usize, partitions: &[Vec<u32>]) -> bool {
    if partitions.is_empty() {
        return d == 1;
    }
    let perms = all_perms(d);
    let identity: Vec<usize> = (0..d).collect();
    let mut states: HashSet<(Vec<usize>, Vec<usize>)> = HashSet::new();
    states.insert((identity.clone(), identity.clone()));
    for pi in partitions {
        let class: Vec<&Vec<usize>> = perms.iter().filter(|p| cycle_type(p) == *pi).collect();
        let mut next = HashSet::new();
        for (prod, orbits) in &states {
            for p in &class {
                next.insert((then(prod, p), join(orbits, p)));
            }
        }
        states = next;
    }
    let single = vec![0; d];
    states.contains(&(identity, single))
}

/// Partitions of `d` (non-increasing), including `[1^d]`.
pub fn partitions_of(d: u32) -> Vec<Vec<u32>> {
    fn go(rest: u32, cap: u32, acc: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if rest == 0 {
            out.push(acc.clone());
            return;
        }
        for p in 1..=cap.min(rest) {
            acc.push(p);
            go(rest - p, p, acc, out);
            acc.pop();
        }
    }
    let mut out = Vec::new();
    go(d, d, &mut Vec::new(), &mut out);
    out
}

/// Every multiset of nontrivial partitions of `d` with total branching `nu`
/// (sorted lists of sorted partitions).
pub fn multisets_with_branching(d: u32, nu: u32) -> Vec<Vec<Vec<u32>>> {
    let parts: Vec<Vec<u32>> = partitions_of(d).into_iter().filter(|p| p.len() < d as usize).collect();
    let mut out = Vec::new();
    fn go(parts: &[Vec<u32>], from: usize, left: u32, d: u32, acc: &mut Vec<Vec<u32>>, out: &mut Vec<Vec<Vec<u32>>>) {
        if left == 0 {
            out.push(acc.clone());
            return;
        }
        for i in from..parts.len() {
            let b = d - parts[i].len() as u32;
            if b <= left {
                acc.push(parts[i].clone());
                go(parts, i, left - b, d, acc, out);
                acc.pop();
            }
        }
    }
    go(&parts, 0, nu, d, &mut Vec::new(), &mut out);
    out
}

pub fn datum_text(d: u32, partitions: &[Vec<u32>]) -> String {
    let body: Vec<String> = partitions
        .iter()
        .map(|p| p.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","))
        .collect();
    format!("{d}: {}", body.join("; "))
}

/// Transitivity by building the whole generated group and reading off the
/// orbit of the first point.
pub fn transitive_by_closure(d: usize, gens: &[Vec<usize>]) -> bool {
    let identity: Vec<usize> = (0..d).collect();
    let mut group: HashSet<Vec<usize>> = HashSet::new();
    group.insert(identity.clone());
    let mut frontier = vec![identity];
    while let Some(g) = frontier.pop() {
        for h in gens {
            let next = then(&g, h);
            if group.insert(next.clone()) {
                frontier.push(next);
            }
        }
    }
    let orbit: HashSet<usize> = group.iter().map(|g| g[0]).collect();
    orbit.len() == d
}

/// Transitivity by a search over points reached from the first one.
pub fn reaches_every_point(d: usize, gens: &[Vec<usize>]) -> bool {
    let mut reached = vec![false; d];
    let mut stack = vec![0];
    if d > 0 {
        reached[0] = true;
    }
    while let Some(x) = stack.pop() {
        for g in gens {
            if !reached[g[x]] {
                reached[g[x]] = true;
                stack.push(g[x]);
            }
        }
    }
    reached.iter().all(|&r| r)
}
