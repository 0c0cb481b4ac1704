//! The hierarchical scheme: dealing shares plus the public bulletin, and
//! reconstruction by any authorized coalition.
//!
//! The dealer picks level polynomials `f_ℓ = s + α_ℓ x^{d0}` with
//! `deg f_ℓ < Σ_{i≤t_ℓ} d_i`. Participants in levels `1..m-1` receive
//! uniformly random share vectors `c_i`; last-level participants receive
//! `f_m mod m_i`. For every level `ℓ` and every non-last-level participant
//! `i ≤ N_ℓ` the dealer publishes `w_i^(ℓ) = (f_ℓ - H_ℓ(c_i)) mod m_i`, which
//! lets `i` contribute the residue `f_ℓ mod m_i` at any level it belongs to.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use thiserror::Error;

use crate::field::FieldElement;
use crate::hashing::{HashError, HashFamily};
use crate::params::{validate_params, AccessStructure, ParamsError, PublicParams};
use crate::poly::{crt_combine, Poly, PolyError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SchemeError {
    #[error(transparent)]
    Params(#[from] ParamsError),
    #[error(transparent)]
    Hash(#[from] HashError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error("secret has {found} coefficients, expected d0 = {expected}")]
    SecretLength { expected: usize, found: usize },
    #[error("coefficient {value} is not an element of F_{p}")]
    NotCanonical { value: u64, p: u64 },
    #[error("participants {0:?} do not form an authorized subset")]
    Unauthorized(Vec<usize>),
    #[error("shares are inconsistent: reconstructed f_{level} has degree {degree}, bound is {bound}")]
    InconsistentShares { level: usize, degree: isize, bound: usize },
    #[error("bulletin has no entry for level {level}, participant {participant}")]
    MissingBulletinEntry { level: usize, participant: usize },
    #[error("share of participant {participant}: {reason}")]
    InvalidShare { participant: usize, reason: String },
    #[error("participant {0} supplied more than one share")]
    DuplicateShare(usize),
}

/// A secret `s(x)` with `deg s < d0`, held as exactly `d0` coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Secret(Vec<FieldElement>);

impl Secret {
    pub fn new(coeffs: Vec<FieldElement>) -> Self {
        Self(coeffs)
    }

    pub fn coeffs(&self) -> &[FieldElement] {
        &self.0
    }

    pub fn into_coeffs(self) -> Vec<FieldElement> {
        self.0
    }
}

/// One participant's share: a fixed-length vector of `d_i` coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Share {
    pub participant: usize,
    pub level: usize,
    pub coeffs: Vec<FieldElement>,
}

/// Published mask polynomials `w_i^(ℓ)`, keyed by `(level, participant)`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Bulletin {
    entries: BTreeMap<(usize, usize), Poly>,
}

impl Bulletin {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, level: usize, participant: usize, mask: Poly) {
        self.entries.insert((level, participant), mask);
    }

    pub fn get(&self, level: usize, participant: usize) -> Option<&Poly> {
        self.entries.get(&(level, participant))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries in `(level, participant)` order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, &Poly)> {
        self.entries.iter().map(|(&(l, i), w)| (l, i, w))
    }

    pub fn keys(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.entries.keys().copied()
    }
}

/// The `(level, participant)` pairs the dealer publishes: `i ∈ [1, N_ℓ]` for
/// `ℓ < m`, and `i ∈ [1, N_{m-1}]` for `ℓ = m`.
pub fn bulletin_index_set(structure: &AccessStructure) -> Vec<(usize, usize)> {
    let m = structure.levels();
    let cap = structure.prefix(m - 1);
    (1..=m)
        .flat_map(|l| (1..=structure.prefix(l).min(cap)).map(move |i| (l, i)))
        .collect()
}

/// Dealer randomness in draw order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct DealerRandomness {
    /// `α_ℓ` coefficients, `Σ_{i≤t_ℓ} d_i - d0` per level.
    pub alphas: Vec<Vec<FieldElement>>,
    /// `c_i` for `i ∈ [1, N_{m-1}]`, `d_i` coefficients each.
    pub random_shares: Vec<Vec<FieldElement>>,
}

/// Everything the dealer computes; the level polynomials never leave the crate.
#[derive(Debug, Clone)]
pub(crate) struct Dealing {
    pub shares: Vec<Share>,
    pub bulletin: Bulletin,
    #[cfg_attr(not(test), allow(dead_code))]
    pub masters: Vec<Poly>,
}

/// Validated structure, parameters and hash family.
#[derive(Debug, Clone)]
pub struct Scheme {
    structure: AccessStructure,
    params: PublicParams,
    family: HashFamily,
}

impl Scheme {
    pub fn new(structure: AccessStructure, params: PublicParams) -> Result<Self, SchemeError> {
        validate_params(&structure, &params).into_result()?;
        let family = HashFamily::new(params.hash, params.field, structure.levels())?;
        Ok(Self { structure, params, family })
    }

    pub fn structure(&self) -> &AccessStructure {
        &self.structure
    }

    pub fn params(&self) -> &PublicParams {
        &self.params
    }

    pub fn family(&self) -> &HashFamily {
        &self.family
    }

    /// `Σ_{i≤t_ℓ} d_i`, the strict degree bound on `f_ℓ`.
    pub fn level_bound(&self, level: usize) -> usize {
        self.params.leading_degree_sum(self.structure.threshold(level))
    }

    pub(crate) fn check_secret(&self, secret: &Secret) -> Result<(), SchemeError> {
        let d0 = self.params.d0;
        if secret.0.len() != d0 {
            return Err(SchemeError::SecretLength { expected: d0, found: secret.0.len() });
        }
        let p = self.params.field.modulus();
        match secret.0.iter().find(|&&c| c >= p) {
            Some(&value) => Err(SchemeError::NotCanonical { value, p }),
            None => Ok(()),
        }
    }

    pub(crate) fn draw_randomness<R: Rng + ?Sized>(&self, rng: &mut R) -> DealerRandomness {
        let p = self.params.field.modulus();
        let d0 = self.params.d0;
        let alphas = (1..=self.structure.levels())
            .map(|l| (0..self.level_bound(l) - d0).map(|_| rng.gen_range(0..p)).collect())
            .collect();
        let last = self.structure.levels();
        let random_shares = (1..=self.structure.prefix(last - 1))
            .map(|i| (0..self.params.degree(i)).map(|_| rng.gen_range(0..p)).collect())
            .collect();
        DealerRandomness { alphas, random_shares }
    }

    /// `f_ℓ = s + α_ℓ x^{d0}` as a coefficient concatenation.
    pub(crate) fn level_poly(&self, secret: &Secret, alpha: &[FieldElement]) -> Poly {
        let mut coeffs = secret.0.clone();
        coeffs.extend_from_slice(alpha);
        Poly::new(self.params.field, coeffs)
    }

    pub(crate) fn deal_with(
        &self,
        secret: &Secret,
        randomness: &DealerRandomness,
    ) -> Result<Dealing, SchemeError> {
        self.check_secret(secret)?;
        let m = self.structure.levels();
        let masters: Vec<Poly> =
            randomness.alphas.iter().map(|a| self.level_poly(secret, a)).collect();
        let hidden = self.structure.prefix(m - 1);

        let mut shares = Vec::with_capacity(self.structure.participants());
        for i in 1..=self.structure.participants() {
            let coeffs = if i <= hidden {
                randomness.random_shares[i - 1].clone()
            } else {
                masters[m - 1].rem(self.params.modulus(i))?.to_fixed(self.params.degree(i))
            };
            shares.push(Share { participant: i, level: self.structure.level_of(i)?, coeffs });
        }

        let mut bulletin = Bulletin::new();
        for (l, i) in bulletin_index_set(&self.structure) {
            let hashed = self.family.hash_poly(l, &shares[i - 1].coeffs)?;
            let w = (&masters[l - 1] - &hashed).rem(self.params.modulus(i))?;
            bulletin.insert(l, i, w);
        }
        Ok(Dealing { shares, bulletin, masters })
    }

    /// Deals `secret`, drawing `α_1..α_m` then `c_1..c_{N_{m-1}}` from `rng`.
    pub fn deal<R: Rng + ?Sized>(
        &self,
        secret: &Secret,
        rng: &mut R,
    ) -> Result<(Vec<Share>, Bulletin), SchemeError> {
        self.check_secret(secret)?;
        let randomness = self.draw_randomness(rng);
        let Dealing { shares, bulletin, .. } = self.deal_with(secret, &randomness)?;
        Ok((shares, bulletin))
    }

    pub(crate) fn check_share(&self, share: &Share) -> Result<(), SchemeError> {
        let i = share.participant;
        let invalid = |reason: String| SchemeError::InvalidShare { participant: i, reason };
        let level = self.structure.level_of(i)?;
        if share.level != level {
            return Err(invalid(format!("claims level {}, belongs to level {level}", share.level)));
        }
        let d = self.params.degree(i);
        if share.coeffs.len() != d {
            return Err(invalid(format!("{} coefficients, expected {d}", share.coeffs.len())));
        }
        let p = self.params.field.modulus();
        if let Some(&c) = share.coeffs.iter().find(|&&c| c >= p) {
            return Err(invalid(format!("coefficient {c} is not below p = {p}")));
        }
        Ok(())
    }

    /// Residue `s_i^(ℓ)` of `f_ℓ` modulo `m_i` contributed by a share.
    ///
    /// A last-level share used at level `m` is returned as is; every other
    /// combination is unmasked as `H_ℓ(s_i) + w_i^(ℓ)`.
    pub fn unmask_share(
        &self,
        bulletin: &Bulletin,
        share: &Share,
        level: usize,
    ) -> Result<Poly, SchemeError> {
        self.check_share(share)?;
        let m = self.structure.levels();
        if level == m && share.level == m {
            return Ok(Poly::new(self.params.field, share.coeffs.clone()));
        }
        let w = bulletin.get(level, share.participant).ok_or(
            SchemeError::MissingBulletinEntry { level, participant: share.participant },
        )?;
        Ok(&self.family.hash_poly(level, &share.coeffs)? + w)
    }

    /// Recovers the secret from an authorized set of shares.
    ///
    /// Uses the smallest authorized level `ℓ` and every supplied share in
    /// `[1, N_ℓ]`. Surplus shares beyond `t_ℓ` are used as a consistency check
    /// on the degree of the recombined `f_ℓ`.
    pub fn reconstruct(&self, bulletin: &Bulletin, shares: &[Share]) -> Result<Secret, SchemeError> {
        let mut owners = BTreeSet::new();
        for share in shares {
            self.check_share(share)?;
            if !owners.insert(share.participant) {
                return Err(SchemeError::DuplicateShare(share.participant));
            }
        }
        let owner_list: Vec<usize> = owners.iter().copied().collect();
        let level = self
            .structure
            .min_authorized_level(&owner_list)?
            .ok_or_else(|| SchemeError::Unauthorized(owner_list.clone()))?;

        let mut used: Vec<&Share> =
            shares.iter().filter(|s| s.participant <= self.structure.prefix(level)).collect();
        used.sort_by_key(|s| s.participant);
        let residues = used
            .iter()
            .map(|s| self.unmask_share(bulletin, s, level))
            .collect::<Result<Vec<_>, _>>()?;
        let moduli: Vec<Poly> =
            used.iter().map(|s| self.params.modulus(s.participant).clone()).collect();
        let f = crt_combine(&residues, &moduli)?;

        let bound = self.level_bound(level);
        if used.len() > self.structure.threshold(level) && f.degree() >= bound as isize {
            return Err(SchemeError::InconsistentShares { level, degree: f.degree(), bound });
        }
        let d0 = self.params.d0;
        Ok(Secret(f.truncate(d0).to_fixed(d0)))
    }
}
