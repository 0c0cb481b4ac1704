//! The level hash functions `h_1..h_m` and their coefficient-wise lift `H_ℓ`.
//!
//! Two backends are provided. [`HashBackend::Crypto`] derives every `h_ℓ`
//! from SHA-256 by domain separation. [`HashBackend::Table`] is a seeded
//! random function table, used by the security oracle so that preimages can
//! be enumerated exactly. Both produce `floor(log2 p)`-bit outputs, which
//! are always valid field elements.

use rand::RngCore;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::field::{FieldElement, PrimeField};
use crate::poly::Poly;

const DOMAIN: &[u8] = b"dhss/level-hash/v1";

/// Fields up to this size get their tables materialized up front.
const TABLE_MATERIALIZE_LIMIT: u64 = 1 << 16;

/// How many candidate streams to try when a level's table collides with an
/// earlier one.
const MAX_STREAM_ATTEMPTS: u64 = 256;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HashError {
    #[error("level {level} outside 1..={levels}")]
    LevelOutOfRange { level: usize, levels: usize },
    #[error("cannot hash an empty coefficient vector")]
    EmptyInput,
    #[error("{value} is not a canonical element of F_{p}")]
    NotCanonical { value: u64, p: u64 },
    #[error("could not find {levels} distinct tables for F_{p}")]
    IndistinctTables { levels: usize, p: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HashBackend {
    Crypto,
    Table { seed: u64 },
}

impl HashBackend {
    pub fn name(&self) -> &'static str {
        match self {
            HashBackend::Crypto => "crypto",
            HashBackend::Table { .. } => "table",
        }
    }
}

#[derive(Debug, Clone)]
enum Backend {
    Crypto,
    /// One stream id per level; `tables` is filled for small fields.
    Table { seed: u64, streams: Vec<u64>, tables: Option<Vec<Vec<u64>>> },
}

/// The `m` level functions over one field.
#[derive(Debug, Clone)]
pub struct HashFamily {
    field: PrimeField,
    levels: usize,
    kind: HashBackend,
    backend: Backend,
}

impl HashFamily {
    pub fn new(kind: HashBackend, field: PrimeField, levels: usize) -> Result<Self, HashError> {
        let backend = match kind {
            HashBackend::Crypto => Backend::Crypto,
            HashBackend::Table { seed } => Self::build_table(seed, field, levels)?,
        };
        Ok(Self { field, levels, kind, backend })
    }

    fn build_table(seed: u64, field: PrimeField, levels: usize) -> Result<Backend, HashError> {
        let p = field.modulus();
        if p > TABLE_MATERIALIZE_LIMIT {
            let streams = (1..=levels as u64).collect();
            return Ok(Backend::Table { seed, streams, tables: None });
        }
        let bits = field.floor_log2();
        let mut streams = Vec::with_capacity(levels);
        let mut tables: Vec<Vec<u64>> = Vec::with_capacity(levels);
        let mut next_stream = 1u64;
        for _ in 0..levels {
            let limit = next_stream + MAX_STREAM_ATTEMPTS;
            loop {
                if next_stream >= limit {
                    return Err(HashError::IndistinctTables { levels, p });
                }
                let stream = next_stream;
                next_stream += 1;
                let table: Vec<u64> = (0..p).map(|x| table_entry(seed, stream, x, bits)).collect();
                if !tables.contains(&table) {
                    streams.push(stream);
                    tables.push(table);
                    break;
                }
            }
        }
        Ok(Backend::Table { seed, streams, tables: Some(tables) })
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn backend(&self) -> HashBackend {
        self.kind
    }

    /// Output width `floor(log2 p)` in bits.
    pub fn output_bits(&self) -> u32 {
        self.field.floor_log2()
    }

    fn check_level(&self, level: usize) -> Result<(), HashError> {
        if (1..=self.levels).contains(&level) {
            Ok(())
        } else {
            Err(HashError::LevelOutOfRange { level, levels: self.levels })
        }
    }

    /// `h_ℓ(x)`, a value in `[0, 2^{floor(log2 p)})`.
    pub fn h(&self, level: usize, x: FieldElement) -> Result<FieldElement, HashError> {
        self.check_level(level)?;
        let p = self.field.modulus();
        if x >= p {
            return Err(HashError::NotCanonical { value: x, p });
        }
        let bits = self.output_bits();
        Ok(match &self.backend {
            Backend::Crypto => crypto_entry(self.field, level, x, bits),
            Backend::Table { tables: Some(t), .. } => t[level - 1][x as usize],
            Backend::Table { seed, streams, tables: None } => {
                table_entry(*seed, streams[level - 1], x, bits)
            }
        })
    }

    /// `H_ℓ(c) = Σ_j h_ℓ(c_j) x^j` over all `d_i` positions of the share vector.
    pub fn hash_poly(&self, level: usize, coeffs: &[FieldElement]) -> Result<Poly, HashError> {
        if coeffs.is_empty() {
            return Err(HashError::EmptyInput);
        }
        let hashed = coeffs.iter().map(|&c| self.h(level, c)).collect::<Result<Vec<_>, _>>()?;
        Ok(Poly::new(self.field, hashed))
    }
}

fn crypto_entry(field: PrimeField, level: usize, x: u64, bits: u32) -> u64 {
    let width = field.bit_len().div_ceil(8) as usize;
    let mut hasher = Sha256::new();
    hasher.update(DOMAIN);
    hasher.update((level as u32).to_be_bytes());
    hasher.update(&x.to_be_bytes()[8 - width..]);
    let digest = hasher.finalize();
    let mut head = [0u8; 8];
    head.copy_from_slice(&digest[..8]);
    u64::from_be_bytes(head) >> (64 - bits)
}

fn table_entry(seed: u64, stream: u64, x: u64, bits: u32) -> u64 {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng.set_word_pos(2 * x as u128);
    rng.next_u64() >> (64 - bits)
}
