//! Integer partitions and branch data.
//!
//! A [`Partition`] of `d` records the local multiplicities over one branch
//! point; a [`BranchDatum`] is the multiset of nontrivial partitions over all
//! branch points. Text format follows the bracket/exponent notation:
//! `"2,2,1^4"` for a partition and `"8: 4,2,2; 4,2,2; 2,2,1^4"` for a datum.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("empty input")]
    Empty,
    #[error("invalid entry `{0}`")]
    BadEntry(String),
    #[error("entries must be positive, got `{0}`")]
    NonPositive(String),
    #[error("malformed exponent in `{0}`")]
    BadExponent(String),
    #[error("invalid degree prefix `{0}`")]
    BadDegree(String),
    #[error(transparent)]
    Datum(#[from] DatumError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DatumError {
    #[error("degree must be positive")]
    ZeroDegree,
    #[error("trivial partitions at indices {trivial:?}, wrong degree at indices {wrong_degree:?}")]
    Invalid {
        trivial: Vec<usize>,
        wrong_degree: Vec<usize>,
    },
    #[error("invalid family parameters d'={d_prime}, d''={d_dblprime}: {reason}")]
    FamilyParameters {
        d_prime: u32,
        d_dblprime: u32,
        reason: &'static str,
    },
}

/// A partition of a positive integer, stored with parts in non-increasing order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Partition {
    parts: Vec<u32>,
}

impl Partition {
    /// Builds a partition from parts in any order. Returns `None` for an empty
    /// list or a zero part.
    pub fn new(mut parts: Vec<u32>) -> Option<Self> {
        if parts.is_empty() || parts.contains(&0) {
            return None;
        }
        parts.sort_unstable_by(|a, b| b.cmp(a));
        Some(Partition { parts })
    }

    /// `[1, ..., 1]` of the given degree.
    pub fn trivial(degree: u32) -> Self {
        Partition { parts: vec![1; degree as usize] }
    }

    /// A single cycle `[d]`.
    pub fn single(degree: u32) -> Self {
        Partition { parts: vec![degree] }
    }

    pub fn parts(&self) -> &[u32] {
        &self.parts
    }

    pub fn degree(&self) -> u32 {
        self.parts.iter().sum()
    }

    /// Number of parts `r = q + e`.
    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    /// Number of parts `>= 2`.
    pub fn q(&self) -> usize {
        self.parts.iter().take_while(|&&p| p >= 2).count()
    }

    /// Number of parts equal to 1.
    pub fn e(&self) -> usize {
        self.parts.len() - self.q()
    }

    pub fn is_trivial(&self) -> bool {
        self.parts[0] == 1
    }

    pub fn largest(&self) -> u32 {
        self.parts[0]
    }

    /// Smallest part that is at least 2.
    pub fn smallest_nontrivial(&self) -> Option<u32> {
        self.parts.iter().copied().filter(|&p| p >= 2).last()
    }

    /// Contribution `d - r` to the total branching.
    pub fn branching(&self) -> u32 {
        self.degree() - self.parts.len() as u32
    }

    /// Replaces one part equal to `value` by `value - 1`, dropping it when it
    /// reaches zero.
    pub fn decrement(&self, value: u32) -> Option<Partition> {
        let pos = self.parts.iter().position(|&p| p == value)?;
        let mut parts = self.parts.clone();
        if value == 1 {
            parts.remove(pos);
            if parts.is_empty() {
                return None;
            }
        } else {
            parts[pos] -= 1;
        }
        Partition::new(parts)
    }

    /// Replaces one part equal to `value` by `value + 1`.
    pub fn increment(&self, value: u32) -> Option<Partition> {
        let pos = self.parts.iter().position(|&p| p == value)?;
        let mut parts = self.parts.clone();
        parts[pos] += 1;
        Partition::new(parts)
    }

    /// Multiplicity of each part size `j` in `1..=degree`, indexed by `j`.
    pub fn multiplicities(&self) -> Vec<u32> {
        let mut m = vec![0u32; self.degree() as usize + 1];
        for &p in &self.parts {
            m[p as usize] += 1;
        }
        m
    }

    /// Size of the conjugacy class of this cycle type, `d! / z(pi)`.
    pub fn class_size(&self) -> u128 {
        let d = self.degree() as u128;
        let mut size: u128 = (1..=d).product();
        for (j, &m) in self.multiplicities().iter().enumerate().skip(1) {
            let fact: u128 = (1..=m as u128).product();
            size /= fact * (j as u128).pow(m);
        }
        size
    }
}

impl fmt::Display for Partition {
    /// Runs of ones with two or more members are written with an exponent.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let q = self.q();
        let e = self.e();
        let mut first = true;
        for p in &self.parts[..q] {
            if !first {
                f.write_str(",")?;
            }
            write!(f, "{p}")?;
            first = false;
        }
        if e > 0 {
            if !first {
                f.write_str(",")?;
            }
            if e == 1 {
                f.write_str("1")?;
            } else {
                write!(f, "1^{e}")?;
            }
        }
        Ok(())
    }
}

fn parse_entry(token: &str) -> Result<(u32, u32), ParseError> {
    let token = token.trim();
    let (base, exp) = match token.split_once('^') {
        Some((b, e)) => (b.trim(), Some(e.trim())),
        None => (token, None),
    };
    let value: i64 = base
        .parse()
        .map_err(|_| ParseError::BadEntry(token.to_string()))?;
    if value <= 0 {
        return Err(ParseError::NonPositive(token.to_string()));
    }
    let value = u32::try_from(value).map_err(|_| ParseError::BadEntry(token.to_string()))?;
    let count = match exp {
        None => 1,
        Some(e) => match e.parse::<u32>() {
            Ok(n) if n > 0 => n,
            _ => return Err(ParseError::BadExponent(token.to_string())),
        },
    };
    Ok((value, count))
}

/// Parses `"2,1^6"`, `"[4,2,2]"` and similar.
pub fn parse_partition(text: &str) -> Result<Partition, ParseError> {
    let inner = text.trim().trim_start_matches('[').trim_end_matches(']').trim();
    if inner.is_empty() {
        return Err(ParseError::Empty);
    }
    let mut parts = Vec::new();
    for token in inner.split(',') {
        if token.trim().is_empty() {
            return Err(ParseError::BadEntry(token.to_string()));
        }
        let (value, count) = parse_entry(token)?;
        parts.extend(std::iter::repeat(value).take(count as usize));
    }
    Ok(Partition::new(parts).expect("entries checked positive"))
}

impl FromStr for Partition {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_partition(s)
    }
}

/// Candidate branch data: a degree and a list of nontrivial partitions of it.
///
/// The list order is kept so certificates can refer to partitions by index,
/// but equality of data as branch data is multiset equality
/// ([`BranchDatum::same_multiset`]).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BranchDatum {
    degree: u32,
    partitions: Vec<Partition>,
}

impl BranchDatum {
    pub fn new(degree: u32, partitions: Vec<Partition>) -> Result<Self, DatumError> {
        if degree == 0 {
            return Err(DatumError::ZeroDegree);
        }
        let mut trivial = Vec::new();
        let mut wrong_degree = Vec::new();
        for (i, p) in partitions.iter().enumerate() {
            if p.degree() != degree {
                wrong_degree.push(i);
            } else if p.is_trivial() {
                trivial.push(i);
            }
        }
        if !trivial.is_empty() || !wrong_degree.is_empty() {
            return Err(DatumError::Invalid { trivial, wrong_degree });
        }
        Ok(BranchDatum { degree, partitions })
    }

    /// Convenience constructor from raw part lists; the degree is taken from
    /// the first list.
    pub fn from_parts(lists: &[&[u32]]) -> Result<Self, DatumError> {
        let partitions: Vec<Partition> = lists
            .iter()
            .map(|l| Partition::new(l.to_vec()).ok_or(DatumError::ZeroDegree))
            .collect::<Result<_, _>>()?;
        let degree = partitions.first().map_or(1, |p| p.degree());
        BranchDatum::new(degree, partitions)
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn partitions(&self) -> &[Partition] {
        &self.partitions
    }

    /// Number of branch points `k`.
    pub fn k(&self) -> usize {
        self.partitions.len()
    }

    /// Total branching `nu = sum (d - r_i)`.
    pub fn nu(&self) -> u64 {
        self.partitions.iter().map(|p| p.branching() as u64).sum()
    }

    /// Euler characteristic of the source implied by the Riemann-Hurwitz
    /// formula over the sphere: `chi(M) = 2d - nu`.
    pub fn source_chi(&self) -> i64 {
        2 * self.degree as i64 - self.nu() as i64
    }

    /// Genus of the source, when it is a non-negative integer.
    pub fn genus(&self) -> Option<u64> {
        let twice = 2 - self.source_chi();
        (twice >= 0 && twice % 2 == 0).then(|| (twice / 2) as u64)
    }

    pub fn is_candidate_sphere(&self) -> bool {
        self.nu() + 2 == 2 * self.degree as u64
    }

    pub fn is_genus_consistent(&self) -> bool {
        let nu = self.nu();
        nu % 2 == 0 && nu + 2 >= 2 * self.degree as u64
    }

    pub fn min_length(&self) -> Option<usize> {
        self.partitions.iter().map(Partition::len).min()
    }

    /// Partitions sorted, for multiset comparison.
    pub fn sorted_partitions(&self) -> Vec<Partition> {
        let mut v = self.partitions.clone();
        v.sort_unstable_by(|a, b| b.cmp(a));
        v
    }

    pub fn same_multiset(&self, other: &BranchDatum) -> bool {
        self.degree == other.degree && self.sorted_partitions() == other.sorted_partitions()
    }

    /// The same datum with partitions in canonical (descending) order.
    pub fn canonical(&self) -> BranchDatum {
        BranchDatum {
            degree: self.degree,
            partitions: self.sorted_partitions(),
        }
    }

    /// Reorders partitions: `order[j]` is the index of the partition placed at `j`.
    pub fn permuted(&self, order: &[usize]) -> BranchDatum {
        BranchDatum {
            degree: self.degree,
            partitions: order.iter().map(|&i| self.partitions[i].clone()).collect(),
        }
    }

    /// Formats with braces, e.g. `{[5], [2,2,1], [2,2,1]}`.
    pub fn bracketed(&self) -> String {
        let inner: Vec<String> = self.partitions.iter().map(|p| format!("[{p}]")).collect();
        format!("{{{}}}", inner.join(", "))
    }
}

impl fmt::Display for BranchDatum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:", self.degree)?;
        for (i, p) in self.partitions.iter().enumerate() {
            if i > 0 {
                f.write_str(";")?;
            }
            write!(f, " {p}")?;
        }
        Ok(())
    }
}

/// Parses `[degree ":"] partition (";" partition)*`.
pub fn parse_datum(text: &str) -> Result<BranchDatum, ParseError> {
    let text = text.trim();
    if text.is_empty() {
        return Err(ParseError::Empty);
    }
    let (degree, body) = match text.split_once(':') {
        Some((deg, rest)) => {
            let deg = deg.trim();
            let value: u32 = deg
                .parse()
                .ok()
                .filter(|&v| v > 0)
                .ok_or_else(|| ParseError::BadDegree(deg.to_string()))?;
            (Some(value), rest)
        }
        None => (None, text),
    };
    let partitions = if body.trim().is_empty() {
        Vec::new()
    } else {
        body.split(';').map(parse_partition).collect::<Result<Vec<_>, _>>()?
    };
    let degree = match (degree, partitions.first()) {
        (Some(d), _) => d,
        (None, Some(p)) => p.degree(),
        (None, None) => return Err(ParseError::Empty),
    };
    Ok(BranchDatum::new(degree, partitions)?)
}

impl FromStr for BranchDatum {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_datum(s)
    }
}

#[derive(Serialize, Deserialize)]
struct DatumJson {
    degree: u32,
    partitions: Vec<Vec<u32>>,
}

impl Serialize for BranchDatum {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        DatumJson {
            degree: self.degree,
            partitions: self.partitions.iter().map(|p| p.parts.clone()).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for BranchDatum {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = DatumJson::deserialize(deserializer)?;
        let partitions = raw
            .partitions
            .into_iter()
            .map(|parts| Partition::new(parts).ok_or_else(|| serde::de::Error::custom("empty or zero part")))
            .collect::<Result<Vec<_>, _>>()?;
        BranchDatum::new(raw.degree, partitions).map_err(serde::de::Error::custom)
    }
}

/// Summary flags of a datum.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatumReport {
    pub degree: u32,
    pub k: usize,
    pub nu: u64,
    pub candidate_sphere: bool,
    pub genus_consistent: bool,
    pub genus: Option<u64>,
    pub theorem2_eligible: bool,
    pub zheng_family: Option<(u32, u32)>,
}

pub fn validate(datum: &BranchDatum) -> DatumReport {
    DatumReport {
        degree: datum.degree(),
        k: datum.k(),
        nu: datum.nu(),
        candidate_sphere: datum.is_candidate_sphere(),
        genus_consistent: datum.is_genus_consistent(),
        genus: datum.genus(),
        theorem2_eligible: theorem2_applies(datum),
        zheng_family: is_zheng_exceptional(datum),
    }
}

/// Sphere candidate with `k >= 3`, `d >= 3` and `k >= min r_i + 2`.
pub fn theorem2_applies(datum: &BranchDatum) -> bool {
    let k = datum.k();
    datum.is_candidate_sphere()
        && k >= 3
        && datum.degree() >= 3
        && datum.min_length().is_some_and(|r| k >= r + 2)
}

pub(crate) fn smallest_prime_factor(n: u32) -> Option<u32> {
    if n < 2 {
        return None;
    }
    (2..).take_while(|p| p * p <= n).find(|p| n % p == 0).or(Some(n))
}

/// The sharp exceptional datum for degree `d = d' * d''`:
/// `{[d',...,d'], [d',...,d'], [d''+1, 1, ...], [2, 1, ...] x (d''-2)}`.
pub fn zheng_family(d_prime: u32, d_dblprime: u32) -> Result<BranchDatum, DatumError> {
    let err = |reason| DatumError::FamilyParameters { d_prime, d_dblprime, reason };
    if d_dblprime <= 2 {
        return Err(err("d'' must exceed 2"));
    }
    let d = d_prime
        .checked_mul(d_dblprime)
        .ok_or_else(|| err("degree overflows"))?;
    if smallest_prime_factor(d) != Some(d_prime) {
        return Err(err("d' must be the smallest prime factor of d'd''"));
    }
    let balanced = Partition::new(vec![d_prime; d_dblprime as usize]).unwrap();
    let mut big = vec![d_dblprime + 1];
    big.extend(std::iter::repeat(1).take((d - d_dblprime - 1) as usize));
    let mut transposition = vec![2];
    transposition.extend(std::iter::repeat(1).take((d - 2) as usize));

    let mut partitions = vec![balanced.clone(), balanced, Partition::new(big).unwrap()];
    for _ in 0..d_dblprime - 2 {
        partitions.push(Partition::new(transposition.clone()).unwrap());
    }
    let datum = BranchDatum::new(d, partitions)?;
    assert!(datum.is_candidate_sphere(), "family datum must satisfy Riemann-Hurwitz");
    assert_eq!(datum.k(), d_dblprime as usize + 1);
    Ok(datum)
}

/// Recognises a member of [`zheng_family`] up to reordering.
pub fn is_zheng_exceptional(datum: &BranchDatum) -> Option<(u32, u32)> {
    let k = datum.k();
    if k < 4 {
        return None;
    }
    let d_dblprime = (k - 1) as u32;
    let d = datum.degree();
    if d % d_dblprime != 0 {
        return None;
    }
    let d_prime = d / d_dblprime;
    let family = zheng_family(d_prime, d_dblprime).ok()?;
    family.same_multiset(datum).then_some((d_prime, d_dblprime))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(parts: &[u32]) -> Partition {
        Partition::new(parts.to_vec()).unwrap()
    }

    #[test]
    fn parse_examples() {
        let a = parse_partition("2,1^6").unwrap();
        assert_eq!(a.parts(), &[2, 1, 1, 1, 1, 1, 1]);
        assert_eq!(a.degree(), 8);
        assert_eq!(parse_partition("[5]").unwrap(), p(&[5]));
        assert_eq!(parse_partition("1,4,1").unwrap().parts(), &[4, 1, 1]);
        assert_eq!(parse_partition(" [ 2 , 2^2 ] ").unwrap(), p(&[2, 2, 2]));
    }

    #[test]
    fn parse_errors_name_token() {
        assert_eq!(parse_partition(""), Err(ParseError::Empty));
        assert_eq!(parse_partition("[]"), Err(ParseError::Empty));
        assert_eq!(parse_partition("2,0"), Err(ParseError::NonPositive("0".into())));
        assert_eq!(parse_partition("2,-1"), Err(ParseError::NonPositive("-1".into())));
        assert_eq!(parse_partition("2,1^"), Err(ParseError::BadExponent("1^".into())));
        assert_eq!(parse_partition("2,1^0"), Err(ParseError::BadExponent("1^0".into())));
        assert_eq!(parse_partition("2,x"), Err(ParseError::BadEntry("x".into())));
        assert!(matches!(parse_partition("2,,1"), Err(ParseError::BadEntry(_))));
    }

    #[test]
    fn derived_counts() {
        let a = p(&[4, 2, 2, 1, 1]);
        assert_eq!((a.q(), a.e(), a.len()), (3, 2, 5));
        assert_eq!(a.smallest_nontrivial(), Some(2));
        assert!(!a.is_trivial());
        assert!(Partition::trivial(4).is_trivial());
        assert_eq!(a.to_string(), "4,2,2,1^2");
        assert_eq!(p(&[3, 1]).to_string(), "3,1");
        assert_eq!(p(&[1, 1]).to_string(), "1^2");
    }

    #[test]
    fn class_sizes() {
        assert_eq!(p(&[2, 1]).class_size(), 3);
        assert_eq!(p(&[3]).class_size(), 2);
        assert_eq!(p(&[2, 2]).class_size(), 3);
        assert_eq!(p(&[2, 2, 2, 2]).class_size(), 105);
    }

    #[test]
    fn validate_examples() {
        let ex1: BranchDatum = "5: 5; 2,2,1; 2,2,1".parse().unwrap();
        let r = validate(&ex1);
        assert_eq!(r.nu, 8);
        assert!(r.candidate_sphere && r.theorem2_eligible);
        assert_eq!(r.genus, Some(0));

        let d4: BranchDatum = "4: 3,1; 2,2; 2,2".parse().unwrap();
        let r = validate(&d4);
        assert_eq!(r.nu, 6);
        assert!(r.candidate_sphere && !r.theorem2_eligible);

        let small: BranchDatum = "4: 2,2; 2,2".parse().unwrap();
        let r = validate(&small);
        assert_eq!(r.nu, 4);
        assert!(!r.candidate_sphere && !r.genus_consistent);
        assert_eq!(r.genus, None);
    }

    #[test]
    fn datum_errors_list_indices() {
        let err = BranchDatum::new(4, vec![p(&[2, 2]), p(&[1, 1, 1, 1]), p(&[3]), p(&[2, 2])]).unwrap_err();
        assert_eq!(err, DatumError::Invalid { trivial: vec![1], wrong_degree: vec![2] });
        assert!(matches!(parse_datum("4: 2,2; 3"), Err(ParseError::Datum(_))));
        assert!(matches!(parse_datum("x: 2,2"), Err(ParseError::BadDegree(_))));
        // Degree is inferred from the first partition when omitted.
        assert_eq!(parse_datum("2;2").unwrap().degree(), 2);
    }

    #[test]
    fn theorem2_examples() {
        let ex4: BranchDatum = "8: 4,2,2; 4,2,2; 2,2,1^4; 2,1^6; 2,1^6".parse().unwrap();
        assert!(theorem2_applies(&ex4));
        let d4: BranchDatum = "3,1; 2,2; 2,2".parse().unwrap();
        assert!(!theorem2_applies(&d4));
    }

    #[test]
    fn zheng_examples() {
        let z = zheng_family(2, 3).unwrap();
        assert!(z.same_multiset(&"6: 2,2,2; 2,2,2; 4,1,1; 2,1^4".parse().unwrap()));
        assert_eq!((z.k(), z.nu()), (4, 10));

        let z = zheng_family(2, 4).unwrap();
        assert!(z.same_multiset(&"8: 2,2,2,2; 2,2,2,2; 5,1,1,1; 2,1^6; 2,1^6".parse().unwrap()));
        assert_eq!((z.k(), z.nu()), (5, 14));

        let z = zheng_family(3, 3).unwrap();
        assert!(z.same_multiset(&"9: 3,3,3; 3,3,3; 4,1^5; 2,1^7".parse().unwrap()));
        assert_eq!((z.k(), z.nu()), (4, 16));

        assert!(zheng_family(2, 2).is_err());
        assert!(zheng_family(3, 4).is_err());
        assert!(zheng_family(4, 3).is_err());
    }

    #[test]
    fn zheng_recognition() {
        assert_eq!(is_zheng_exceptional(&zheng_family(2, 3).unwrap()), Some((2, 3)));
        assert_eq!(is_zheng_exceptional(&"3,1; 2,2; 2,2".parse().unwrap()), None);
        let z = zheng_family(2, 4).unwrap();
        let reordered = z.permuted(&[4, 2, 0, 3, 1]);
        assert_eq!(is_zheng_exceptional(&reordered), Some((2, 4)));
    }

    #[test]
    fn json_shape() {
        let d: BranchDatum = "3: 1,2; 2,1; 3".parse().unwrap();
        let json = serde_json::to_string(&d).unwrap();
        assert_eq!(json, r#"{"degree":3,"partitions":[[2,1],[2,1],[3]]}"#);
        let back: BranchDatum = serde_json::from_str(&json).unwrap();
        assert_eq!(back, d);
    }
}
