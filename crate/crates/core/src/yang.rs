//! The two-level CRT scheme of Yang et al. and the attack that breaks it.
//!
//! Level-1 shares are `f_1 mod m_i`, level-2 shares are `f_2 mod m_i`, and
//! level-1 participants get masks `w_i = (f_2 - c_i) mod m_i`. Since
//! `c_i = f_1 mod m_i`, the masks are residues of `f_2 - f_1`, so anyone can
//! rebuild `f_2 - f_1` once `n_1 ≥ t_2`. Any `t_1` level-2 participants then
//! shift their residues of `f_2` to residues of `f_1`.

use std::collections::BTreeSet;

use rand::Rng;
use thiserror::Error;

use crate::dhss::{Bulletin, Scheme, SchemeError, Secret, Share};
use crate::params::{AccessStructure, PublicParams};
use crate::poly::{crt_combine, Poly};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum YangError {
    #[error(transparent)]
    Scheme(#[from] SchemeError),
    #[error("the Yang scheme is defined for exactly two levels, got {0}")]
    NotTwoLevels(usize),
    #[error("attack not applicable: {0}")]
    AttackNotApplicable(Inapplicable),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Inapplicable {
    #[error("n1 = {n1} < t2 = {t2}, the masks do not determine f2 - f1")]
    TooFewMasks { n1: usize, t2: usize },
    #[error("participant {0} is not in level 2")]
    OutsideLevelTwo(usize),
    #[error("coalition degree sum {have} is below {need}, f1 is not determined")]
    DegreeSum { have: usize, need: usize },
    #[error("empty coalition")]
    EmptyCoalition,
}

impl From<Inapplicable> for YangError {
    fn from(e: Inapplicable) -> Self {
        YangError::AttackNotApplicable(e)
    }
}

/// Public data of a Yang dealing: the parameters and the level-1 masks,
/// stored in a [`Bulletin`] under level 2.
#[derive(Debug, Clone)]
pub struct YangPublic {
    scheme: Scheme,
    masks: Bulletin,
}

/// Intermediate values of a successful attack.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttackTranscript {
    /// Whether the honest access structure admits the coalition.
    pub coalition_authorized: bool,
    /// `f_2 - f_1`, rebuilt from the masks alone.
    pub delta: Poly,
    pub f1: Poly,
    pub secret: Secret,
}

fn two_level(structure: AccessStructure, params: PublicParams) -> Result<Scheme, YangError> {
    if structure.levels() != 2 {
        return Err(YangError::NotTwoLevels(structure.levels()));
    }
    Ok(Scheme::new(structure, params)?)
}

/// Deals `secret`, drawing `α_1` then `α_2` from `rng`.
pub fn yang_deal<R: Rng + ?Sized>(
    structure: AccessStructure,
    params: PublicParams,
    secret: &Secret,
    rng: &mut R,
) -> Result<(Vec<Share>, YangPublic), YangError> {
    let scheme = two_level(structure, params)?;
    scheme.check_secret(secret)?;
    let s = &scheme;
    let p = s.params().field.modulus();
    let d0 = s.params().d0;
    let f: Vec<Poly> = (1..=2)
        .map(|l| {
            let alpha: Vec<u64> = (0..s.level_bound(l) - d0).map(|_| rng.gen_range(0..p)).collect();
            s.level_poly(secret, &alpha)
        })
        .collect();

    let n1 = s.structure().prefix(1);
    let mut shares = Vec::with_capacity(s.structure().participants());
    let mut masks = Bulletin::new();
    for i in 1..=s.structure().participants() {
        let level = if i <= n1 { 1 } else { 2 };
        let m_i = s.params().modulus(i);
        let c = f[level - 1].rem(m_i).map_err(SchemeError::from)?;
        if i <= n1 {
            masks.insert(2, i, (&f[1] - &c).rem(m_i).map_err(SchemeError::from)?);
        }
        shares.push(Share { participant: i, level, coeffs: c.to_fixed(s.params().degree(i)) });
    }
    Ok((shares, YangPublic { scheme, masks }))
}

impl YangPublic {
    /// Rebuilds the public data from stored parameters and masks.
    pub fn new(
        structure: AccessStructure,
        params: PublicParams,
        masks: Bulletin,
    ) -> Result<Self, YangError> {
        let scheme = two_level(structure, params)?;
        let n1 = scheme.structure().prefix(1);
        for i in 1..=n1 {
            let w = masks
                .get(2, i)
                .ok_or(SchemeError::MissingBulletinEntry { level: 2, participant: i })?;
            if w.degree() >= scheme.params().degree(i) as isize {
                return Err(SchemeError::InvalidShare {
                    participant: i,
                    reason: format!("mask degree {} too large", w.degree()),
                }
                .into());
            }
        }
        if masks.len() != n1 {
            let extra = masks.keys().find(|&(l, i)| l != 2 || i > n1).expect("extra entry");
            return Err(SchemeError::InvalidShare {
                participant: extra.1,
                reason: format!("unexpected mask at level {}", extra.0),
            }
            .into());
        }
        Ok(Self { scheme, masks })
    }

    pub fn structure(&self) -> &AccessStructure {
        self.scheme.structure()
    }

    pub fn params(&self) -> &PublicParams {
        self.scheme.params()
    }

    pub fn masks(&self) -> &Bulletin {
        &self.masks
    }

    fn mask(&self, i: usize) -> &Poly {
        self.masks.get(2, i).expect("mask present for every level-1 participant")
    }

    fn checked_owners(&self, shares: &[Share]) -> Result<Vec<usize>, YangError> {
        let mut owners = BTreeSet::new();
        for share in shares {
            self.scheme.check_share(share)?;
            if !owners.insert(share.participant) {
                return Err(SchemeError::DuplicateShare(share.participant).into());
            }
        }
        Ok(owners.into_iter().collect())
    }

    /// Honest reconstruction at the smallest authorized level.
    pub fn reconstruct(&self, shares: &[Share]) -> Result<Secret, YangError> {
        let owners = self.checked_owners(shares)?;
        let structure = self.structure();
        let level = structure
            .min_authorized_level(&owners)
            .map_err(SchemeError::from)?
            .ok_or_else(|| SchemeError::Unauthorized(owners.clone()))?;
        let field = self.params().field;
        let mut used: Vec<&Share> =
            shares.iter().filter(|s| s.participant <= structure.prefix(level)).collect();
        used.sort_by_key(|s| s.participant);

        let residues: Vec<Poly> = used
            .iter()
            .map(|s| {
                let c = Poly::new(field, s.coeffs.clone());
                if level == 2 && s.level == 1 {
                    &c + self.mask(s.participant)
                } else {
                    c
                }
            })
            .collect();
        let moduli: Vec<Poly> =
            used.iter().map(|s| self.params().modulus(s.participant).clone()).collect();
        let f = crt_combine(&residues, &moduli).map_err(SchemeError::from)?;
        let bound = self.scheme.level_bound(level);
        if used.len() > structure.threshold(level) && f.degree() >= bound as isize {
            return Err(
                SchemeError::InconsistentShares { level, degree: f.degree(), bound }.into()
            );
        }
        let d0 = self.params().d0;
        Ok(Secret::new(f.truncate(d0).to_fixed(d0)))
    }

    /// Recovers the secret from public data and level-2 shares only.
    pub fn attack(&self, coalition: &[Share]) -> Result<AttackTranscript, YangError> {
        let structure = self.structure();
        let params = self.params();
        let (n1, t2) = (structure.prefix(1), structure.threshold(2));
        if n1 < t2 {
            return Err(Inapplicable::TooFewMasks { n1, t2 }.into());
        }
        if coalition.is_empty() {
            return Err(Inapplicable::EmptyCoalition.into());
        }
        let owners = self.checked_owners(coalition)?;
        if let Some(&i) = owners.iter().find(|&&i| i <= n1) {
            return Err(Inapplicable::OutsideLevelTwo(i).into());
        }
        let have: usize = owners.iter().map(|&i| params.degree(i)).sum();
        let need = self.scheme.level_bound(1);
        if have < need {
            return Err(Inapplicable::DegreeSum { have, need }.into());
        }
        let coalition_authorized = structure.is_authorized(&owners).map_err(SchemeError::from)?;

        let masks: Vec<Poly> = (1..=n1).map(|i| self.mask(i).clone()).collect();
        let mask_moduli: Vec<Poly> = (1..=n1).map(|i| params.modulus(i).clone()).collect();
        let delta = crt_combine(&masks, &mask_moduli).map_err(SchemeError::from)?;

        let field = params.field;
        let mut members: Vec<&Share> = coalition.iter().collect();
        members.sort_by_key(|s| s.participant);
        let mut shifted = Vec::with_capacity(members.len());
        let mut moduli = Vec::with_capacity(members.len());
        for s in members {
            let m_i = params.modulus(s.participant);
            let u = delta.rem(m_i).map_err(SchemeError::from)?;
            shifted.push(&Poly::new(field, s.coeffs.clone()) - &u);
            moduli.push(m_i.clone());
        }
        let f1 = crt_combine(&shifted, &moduli).map_err(SchemeError::from)?;
        let d0 = params.d0;
        let secret = Secret::new(f1.truncate(d0).to_fixed(d0));
        Ok(AttackTranscript { coalition_authorized, delta, f1, secret })
    }
}
