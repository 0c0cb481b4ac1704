//! On-disk formats: parameters, shares and the bulletin.
//!
//! All files are pretty-printed JSON with a trailing newline. Field
//! elements are decimal strings and coefficient arrays are ascending by
//! power, so a file parses and re-serializes to the same bytes.

use std::fs;
use std::path::Path;

use dhss_core::{
    bulletin_index_set, AccessStructure, Bulletin, HashBackend, ParamsError, Poly, PrimeField,
    PublicParams, Share,
};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum FileError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {source}")]
    Json { path: String, source: serde_json::Error },
    #[error("{0}")]
    Format(String),
    #[error(transparent)]
    Params(#[from] ParamsError),
}

fn format_err(msg: impl Into<String>) -> FileError {
    FileError::Format(msg.into())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamFile {
    pub format_version: u32,
    pub p: String,
    pub d0: usize,
    pub level_sizes: Vec<usize>,
    pub thresholds: Vec<usize>,
    pub moduli: Vec<Vec<String>>,
    pub hash_backend: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table_seed: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShareFile {
    pub format_version: u32,
    pub participant: usize,
    pub level: usize,
    pub coeffs: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BulletinEntry {
    pub level: usize,
    pub participant: usize,
    pub coeffs: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BulletinFile {
    pub format_version: u32,
    pub entries: Vec<BulletinEntry>,
}

fn decimal(values: &[u64]) -> Vec<String> {
    values.iter().map(u64::to_string).collect()
}

fn parse_u64(s: &str, what: &str) -> Result<u64, FileError> {
    // reject signs, whitespace and leading zeros so parsing stays canonical
    let canonical = !s.is_empty()
        && s.bytes().all(|b| b.is_ascii_digit())
        && (s == "0" || !s.starts_with('0'));
    if !canonical {
        return Err(format_err(format!("{what}: {s:?} is not a canonical decimal integer")));
    }
    s.parse().map_err(|_| format_err(format!("{what}: {s} does not fit in 64 bits")))
}

fn parse_coeffs(values: &[String], field: PrimeField, what: &str) -> Result<Vec<u64>, FileError> {
    values
        .iter()
        .map(|s| {
            let v = parse_u64(s, what)?;
            field
                .element(v)
                .map_err(|_| format_err(format!("{what}: {v} is not below p = {}", field.modulus())))
        })
        .collect()
}

fn check_version(version: u32, what: &str) -> Result<(), FileError> {
    if version == FORMAT_VERSION {
        Ok(())
    } else {
        Err(format_err(format!("{what}: unsupported format_version {version}")))
    }
}

impl ParamFile {
    pub fn from_params(structure: &AccessStructure, params: &PublicParams) -> Self {
        let table_seed = match params.hash {
            HashBackend::Crypto => None,
            HashBackend::Table { seed } => Some(seed.to_string()),
        };
        Self {
            format_version: FORMAT_VERSION,
            p: params.field.modulus().to_string(),
            d0: params.d0,
            level_sizes: structure.level_sizes().to_vec(),
            thresholds: structure.thresholds().to_vec(),
            moduli: params.moduli.iter().map(|m| decimal(m.coeffs())).collect(),
            hash_backend: params.hash.name().to_string(),
            table_seed,
        }
    }

    /// Builds the structure and parameters; validation is left to the caller.
    pub fn to_params(&self) -> Result<(AccessStructure, PublicParams), FileError> {
        check_version(self.format_version, "params")?;
        let p = parse_u64(&self.p, "params.p")?;
        let field = PrimeField::new(p).map_err(|e| format_err(format!("params.p: {e}")))?;
        let structure = AccessStructure::new(self.level_sizes.clone(), self.thresholds.clone())?;
        let moduli = self
            .moduli
            .iter()
            .enumerate()
            .map(|(k, c)| {
                let what = format!("params.moduli[{k}]");
                let coeffs = parse_coeffs(c, field, &what)?;
                if coeffs.last() == Some(&0) {
                    return Err(format_err(format!("{what}: leading coefficient is zero")));
                }
                Ok(Poly::new(field, coeffs))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let hash = match (self.hash_backend.as_str(), &self.table_seed) {
            ("crypto", None) => HashBackend::Crypto,
            ("table", Some(seed)) => HashBackend::Table { seed: parse_u64(seed, "params.table_seed")? },
            ("crypto", Some(_)) => return Err(format_err("params: table_seed given for crypto backend")),
            ("table", None) => return Err(format_err("params: table backend needs table_seed")),
            (other, _) => return Err(format_err(format!("params: unknown hash_backend {other:?}"))),
        };
        Ok((structure, PublicParams::new(field, self.d0, moduli, hash)))
    }
}

impl ShareFile {
    pub fn from_share(share: &Share) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            participant: share.participant,
            level: share.level,
            coeffs: decimal(&share.coeffs),
        }
    }

    pub fn to_share(&self, params: &PublicParams) -> Result<Share, FileError> {
        check_version(self.format_version, "share")?;
        let i = self.participant;
        if !(1..=params.moduli.len()).contains(&i) {
            return Err(format_err(format!("share: participant {i} outside 1..={}", params.moduli.len())));
        }
        if self.coeffs.len() != params.degree(i) {
            return Err(format_err(format!(
                "share {i}: {} coefficients, modulus degree is {}",
                self.coeffs.len(),
                params.degree(i)
            )));
        }
        let coeffs = parse_coeffs(&self.coeffs, params.field, &format!("share {i}"))?;
        Ok(Share { participant: i, level: self.level, coeffs })
    }
}

impl BulletinFile {
    pub fn from_bulletin(bulletin: &Bulletin, params: &PublicParams) -> Self {
        let entries = bulletin
            .iter()
            .map(|(level, participant, w)| BulletinEntry {
                level,
                participant,
                coeffs: decimal(&w.to_fixed(params.degree(participant))),
            })
            .collect();
        Self { format_version: FORMAT_VERSION, entries }
    }

    /// Parses entries; `expected` is the exact index set the file must cover,
    /// in order.
    pub fn to_bulletin(
        &self,
        params: &PublicParams,
        expected: &[(usize, usize)],
    ) -> Result<Bulletin, FileError> {
        check_version(self.format_version, "bulletin")?;
        let found: Vec<(usize, usize)> = self.entries.iter().map(|e| (e.level, e.participant)).collect();
        if found != expected {
            return Err(format_err(format!(
                "bulletin: entries {found:?} do not match the expected index set {expected:?}"
            )));
        }
        let mut bulletin = Bulletin::new();
        for e in &self.entries {
            let what = format!("bulletin ({}, {})", e.level, e.participant);
            if e.coeffs.len() != params.degree(e.participant) {
                return Err(format_err(format!("{what}: expected {} coefficients", params.degree(e.participant))));
            }
            let coeffs = parse_coeffs(&e.coeffs, params.field, &what)?;
            bulletin.insert(e.level, e.participant, Poly::new(params.field, coeffs));
        }
        Ok(bulletin)
    }
}

/// Index set of a DHSS bulletin, in file order.
pub fn dhss_index_set(structure: &AccessStructure) -> Vec<(usize, usize)> {
    bulletin_index_set(structure)
}

/// Index set of Yang masks: `(2, i)` for every level-1 participant.
pub fn yang_index_set(structure: &AccessStructure) -> Vec<(usize, usize)> {
    (1..=structure.prefix(1)).map(|i| (2, i)).collect()
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, FileError> {
    let text = fs::read_to_string(path)
        .map_err(|source| FileError::Io { path: path.display().to_string(), source })?;
    serde_json::from_str(&text)
        .map_err(|source| FileError::Json { path: path.display().to_string(), source })
}

pub fn write_text(path: &Path, text: &str) -> Result<(), FileError> {
    fs::write(path, text).map_err(|source| FileError::Io { path: path.display().to_string(), source })
}
