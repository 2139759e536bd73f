//! Realization certificates and their verification.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::football::ReductionChain;
use crate::partition::BranchDatum;
use crate::perm::{Permutation, Tuple};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VerifyError {
    #[error("tuple degree {tuple} differs from datum degree {datum}")]
    DegreeMismatch { tuple: usize, datum: u32 },
    #[error("tuple has {tuple} members but the datum has {datum} partitions")]
    LengthMismatch { tuple: usize, datum: usize },
    #[error("index map is not a bijection onto tuple positions")]
    BadIndexMap,
}

/// How a certificate was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Football induction with the shared-sheet condition met at every step.
    Constructive,
    /// Football induction that needed braid-move repositioning at some step.
    ConstructiveWithRepair,
    /// Some lifting step fell back to exhaustive search.
    OracleFallback,
    /// Direct search by the permutation oracle.
    OracleSearch,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Constructive => "constructive",
            Method::ConstructiveWithRepair => "constructive-with-repair",
            Method::OracleFallback => "oracle-fallback",
            Method::OracleSearch => "oracle-search",
        })
    }
}

/// A permutation tuple witnessing realizability of a datum.
///
/// `index_map[i]` is the tuple position holding the permutation for the
/// datum's `i`-th partition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RealizationCertificate {
    pub datum: BranchDatum,
    pub tuple: Tuple,
    pub index_map: Vec<usize>,
    pub method: Method,
    pub chain: Option<ReductionChain>,
    pub verified: bool,
}

impl RealizationCertificate {
    /// Builds a certificate and runs [`verify`] on it. Returns `None` if the
    /// tuple does not realize the datum.
    pub fn checked(
        datum: BranchDatum,
        tuple: Tuple,
        index_map: Vec<usize>,
        method: Method,
        chain: Option<ReductionChain>,
    ) -> Option<Self> {
        match verify(&tuple, &datum, &index_map) {
            Ok(true) => Some(RealizationCertificate {
                datum,
                tuple,
                index_map,
                method,
                chain,
                verified: true,
            }),
            _ => None,
        }
    }

    /// Re-runs verification from scratch.
    pub fn reverify(&self) -> bool {
        matches!(verify(&self.tuple, &self.datum, &self.index_map), Ok(true))
    }

    /// Permutations listed in datum order.
    pub fn in_datum_order(&self) -> Vec<&Permutation> {
        self.index_map.iter().map(|&j| &self.tuple.perms()[j]).collect()
    }
}

/// Checks the three conditions of Hurwitz's criterion: the permutation at
/// `index_map[i]` has cycle type `partitions[i]`, the ordered product is the
/// identity, and the generated group is transitive.
pub fn verify(tuple: &Tuple, datum: &BranchDatum, index_map: &[usize]) -> Result<bool, VerifyError> {
    if tuple.degree() != datum.degree() as usize {
        return Err(VerifyError::DegreeMismatch { tuple: tuple.degree(), datum: datum.degree() });
    }
    if tuple.len() != datum.k() {
        return Err(VerifyError::LengthMismatch { tuple: tuple.len(), datum: datum.k() });
    }
    if index_map.len() != datum.k() {
        return Err(VerifyError::BadIndexMap);
    }
    let mut hit = vec![false; tuple.len()];
    for &j in index_map {
        if j >= tuple.len() || hit[j] {
            return Err(VerifyError::BadIndexMap);
        }
        hit[j] = true;
    }
    let types_match = datum
        .partitions()
        .iter()
        .zip(index_map)
        .all(|(pi, &j)| tuple.perms()[j].cycle_type() == *pi);
    Ok(types_match && tuple.product().is_identity() && tuple.is_transitive())
}

/// Wire form: permutations are written in cycle notation.
#[derive(Serialize, Deserialize)]
struct CertificateRecord {
    datum: BranchDatum,
    tuple: Vec<String>,
    index_map: Vec<usize>,
    method: Method,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    chain: Option<ReductionChain>,
    verified: bool,
}

impl Serialize for RealizationCertificate {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        CertificateRecord {
            datum: self.datum.clone(),
            tuple: self.tuple.perms().iter().map(|p| p.to_string()).collect(),
            index_map: self.index_map.clone(),
            method: self.method,
            chain: self.chain.clone(),
            verified: self.verified,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for RealizationCertificate {
    /// Parses the stored fields as given; `verified` is taken on trust, so
    /// call [`RealizationCertificate::reverify`] on untrusted input.
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let record = CertificateRecord::deserialize(deserializer)?;
        let d = record.datum.degree() as usize;
        let perms = record
            .tuple
            .iter()
            .map(|s| Permutation::parse_cycles(s, d))
            .collect::<Result<Vec<_>, _>>()
            .map_err(D::Error::custom)?;
        let tuple = Tuple::new(d, perms).map_err(D::Error::custom)?;
        Ok(RealizationCertificate {
            datum: record.datum,
            tuple,
            index_map: record.index_map,
            method: record.method,
            chain: record.chain,
            verified: record.verified,
        })
    }
}

/// Identity index map of length `k`.
pub fn identity_map(k: usize) -> Vec<usize> {
    (0..k).collect()
}
