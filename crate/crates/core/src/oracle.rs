//! Exhaustive security checks for tiny parameters.
//!
//! Two independent counts are available for an unauthorized coalition `B`:
//!
//! * [`enumerate_consistent`] walks every dealer state `(s, α_1..α_m, c_i)`
//!   and keeps those that reproduce what `B` observed.
//! * [`count_preimage`] and [`count_f`] walk candidate level polynomials
//!   `g_ℓ = s + a x^{d0}` and keep those meeting the residue constraints
//!   fixed by `B`'s shares and masks.
//!
//! In the shares-and-own-masks view the first count equals the second
//! times the number of free random shares outside `B`, which is how the two
//! cross-check each other.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_rational::Ratio;
use rayon::prelude::*;
use thiserror::Error;

use crate::dhss::{bulletin_index_set, Bulletin, Scheme, SchemeError, Secret, Share};
use crate::field::{FieldElement, PrimeField};
use crate::hashing::HashBackend;
use crate::params::{AccessStructure, ParamsError, PublicParams};
use crate::poly::{Poly, PolyError};

pub const DEFAULT_MAX_STATES: u128 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error(transparent)]
    Scheme(#[from] SchemeError),
    #[error(transparent)]
    Params(#[from] ParamsError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error("coalition {0:?} is authorized")]
    AuthorizedCoalition(Vec<usize>),
    #[error("the full-bulletin view needs the table hash backend")]
    FullViewNeedsTable,
    #[error("enumeration needs {} states, budget is {budget}", StateCount(*.states))]
    BudgetExceeded { states: u128, budget: u128 },
    #[error("budget must be positive")]
    ZeroBudget,
    #[error("bulletin entry (level {level}, participant {participant}) is malformed")]
    MalformedBulletin { level: usize, participant: usize },
    #[error("no dealer state is consistent with the view")]
    NoConsistentState,
    #[error("negative θ contribution at level {0}; parameters violate condition (iii)")]
    NegativeTheta(usize),
    #[error("no polynomial satisfies the congruences")]
    NoSolution,
    #[error("{0} polynomials satisfy the congruences")]
    MultipleSolutions(u128),
}

struct StateCount(u128);

impl fmt::Display for StateCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 == u128::MAX {
            write!(f, "at least 2^128")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

/// Upper bound on the number of states any single enumeration may visit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnumerationBudget {
    max_states: u128,
}

impl EnumerationBudget {
    pub fn new(max_states: u128) -> Result<Self, OracleError> {
        if max_states == 0 {
            return Err(OracleError::ZeroBudget);
        }
        Ok(Self { max_states })
    }

    pub fn max_states(&self) -> u128 {
        self.max_states
    }

    fn admit(&self, states: u128) -> Result<u128, OracleError> {
        if states > self.max_states {
            Err(OracleError::BudgetExceeded { states, budget: self.max_states })
        } else {
            Ok(states)
        }
    }
}

impl Default for EnumerationBudget {
    fn default() -> Self {
        Self { max_states: DEFAULT_MAX_STATES }
    }
}

fn pow_sat(p: u64, e: usize) -> u128 {
    u32::try_from(e)
        .ok()
        .and_then(|e| (p as u128).checked_pow(e))
        .unwrap_or(u128::MAX)
}

/// What the coalition is taken to observe.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ViewMode {
    /// Own shares plus the bulletin entries indexed by coalition members:
    /// conditions (i)-(iv).
    OwnEntries,
    /// Own shares plus the whole bulletin: conditions (i)-(v).
    FullBulletin,
}

impl ViewMode {
    pub fn name(&self) -> &'static str {
        match self {
            ViewMode::OwnEntries => "i-iv",
            ViewMode::FullBulletin => "i-v",
        }
    }
}

/// `θ = Σ_ℓ (Σ_{i≤t_ℓ} d_i - Σ_{i∈B, i≤N_ℓ} d_i - d0)` for unauthorized `B`.
pub fn compute_theta(
    structure: &AccessStructure,
    params: &PublicParams,
    coalition: &[usize],
) -> Result<u64, OracleError> {
    if structure.is_authorized(coalition)? {
        return Err(OracleError::AuthorizedCoalition(coalition.to_vec()));
    }
    let members: BTreeSet<usize> = coalition.iter().copied().collect();
    let mut theta = 0u64;
    for l in 1..=structure.levels() {
        let held: usize = members.range(..=structure.prefix(l)).map(|&i| params.degree(i)).sum();
        let term = params.leading_degree_sum(structure.threshold(l)) as i64
            - held as i64
            - params.d0 as i64;
        if term < 0 {
            return Err(OracleError::NegativeTheta(l));
        }
        theta += term as u64;
    }
    Ok(theta)
}

/// An unauthorized coalition's shares together with the public bulletin.
#[derive(Debug, Clone)]
pub struct CoalitionView {
    scheme: Scheme,
    coalition: Vec<usize>,
    shares: BTreeMap<usize, Share>,
    bulletin: Bulletin,
    mode: ViewMode,
}

impl CoalitionView {
    pub fn new(
        scheme: Scheme,
        shares: Vec<Share>,
        bulletin: Bulletin,
        mode: ViewMode,
    ) -> Result<Self, OracleError> {
        let mut by_owner = BTreeMap::new();
        for share in shares {
            scheme.check_share(&share)?;
            let i = share.participant;
            if by_owner.insert(i, share).is_some() {
                return Err(SchemeError::DuplicateShare(i).into());
            }
        }
        let coalition: Vec<usize> = by_owner.keys().copied().collect();
        if scheme.structure().is_authorized(&coalition)? {
            return Err(OracleError::AuthorizedCoalition(coalition));
        }
        if mode == ViewMode::FullBulletin && !matches!(scheme.params().hash, HashBackend::Table { .. })
        {
            return Err(OracleError::FullViewNeedsTable);
        }
        for (level, participant) in bulletin_index_set(scheme.structure()) {
            if mode == ViewMode::OwnEntries && !by_owner.contains_key(&participant) {
                continue;
            }
            let w = bulletin
                .get(level, participant)
                .ok_or(SchemeError::MissingBulletinEntry { level, participant })?;
            if w.field() != scheme.params().field
                || w.degree() >= scheme.params().degree(participant) as isize
            {
                return Err(OracleError::MalformedBulletin { level, participant });
            }
        }
        Ok(Self { scheme, coalition, shares: by_owner, bulletin, mode })
    }

    pub fn scheme(&self) -> &Scheme {
        &self.scheme
    }

    pub fn coalition(&self) -> &[usize] {
        &self.coalition
    }

    pub fn mode(&self) -> ViewMode {
        self.mode
    }

    pub fn theta(&self) -> Result<u64, OracleError> {
        compute_theta(self.scheme.structure(), self.scheme.params(), &self.coalition)
    }

    /// Number of dealer states: `p^{d0 + Σ_ℓ (T_ℓ - d0) + Σ_{i≤N_{m-1}} d_i}`.
    pub fn state_count(&self) -> u128 {
        pow_sat(self.scheme.params().field.modulus(), Compiled::new(self).dims)
    }

    /// Random shares outside the coalition: `p^{Σ_{i∉B, i≤N_{m-1}} d_i}`.
    pub fn free_share_factor(&self) -> u128 {
        let s = &self.scheme;
        let hidden = s.structure().prefix(s.structure().levels() - 1);
        let free: usize = (1..=hidden)
            .filter(|i| !self.shares.contains_key(i))
            .map(|i| s.params().degree(i))
            .sum();
        pow_sat(s.params().field.modulus(), free)
    }
}

/// Consistent-state counts indexed by secret.
///
/// Secret index `k` has coefficients given by the base-`p` digits of `k`,
/// constant term least significant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Histogram {
    p: u64,
    d0: usize,
    counts: Vec<u128>,
}

impl Histogram {
    pub fn counts(&self) -> &[u128] {
        &self.counts
    }

    pub fn total(&self) -> u128 {
        self.counts.iter().sum()
    }

    pub fn is_uniform(&self) -> bool {
        self.counts.windows(2).all(|w| w[0] == w[1])
    }

    pub fn secret(&self, index: usize) -> Secret {
        secret_from_index(self.p, self.d0, index as u128)
    }

    pub fn count(&self, secret: &Secret) -> Option<u128> {
        secret_index(self.p, secret).and_then(|k| self.counts.get(k as usize).copied())
    }

    pub fn iter(&self) -> impl Iterator<Item = (Secret, u128)> + '_ {
        self.counts.iter().enumerate().map(|(k, &c)| (self.secret(k), c))
    }
}

fn secret_from_index(p: u64, d0: usize, mut index: u128) -> Secret {
    let mut coeffs = Vec::with_capacity(d0);
    for _ in 0..d0 {
        coeffs.push((index % p as u128) as u64);
        index /= p as u128;
    }
    Secret::new(coeffs)
}

fn secret_index(p: u64, secret: &Secret) -> Option<u128> {
    secret.coeffs().iter().rev().try_fold(0u128, |acc, &c| {
        (c < p).then(|| acc * p as u128 + c as u128)
    })
}

/// `x^j mod m_i` for `j < len`, each as `d_i` coefficients.
fn reduction_rows(m: &Poly, len: usize) -> Vec<Vec<FieldElement>> {
    let field = m.field();
    let d = m.degree() as usize;
    (0..len)
        .map(|j| Poly::monomial(field, 1, j).rem(m).expect("nonzero modulus").to_fixed(d))
        .collect()
}

#[derive(Debug, Clone)]
enum Check {
    /// A random share in `B`: its digits are fixed.
    Digits { offset: usize, expected: Vec<FieldElement> },
    /// `f_ℓ mod m_i` is known outright.
    Residue { level: usize, rows: Vec<Vec<FieldElement>>, target: Vec<FieldElement> },
    /// `f_ℓ mod m_i = w + H_ℓ(c_i)` for a random share outside `B`.
    Masked { level: usize, rows: Vec<Vec<FieldElement>>, offset: usize, mask: Vec<FieldElement> },
}

/// Flattened dealer state layout and the constraints a view imposes on it.
///
/// A state is `[s | α_1 | .. | α_m | c_1 | .. | c_{N_{m-1}}]`, digit 0 first.
struct Compiled<'a> {
    view: &'a CoalitionView,
    field: PrimeField,
    d0: usize,
    bounds: Vec<usize>,
    alpha_offsets: Vec<usize>,
    dims: usize,
    checks: Vec<Check>,
}

impl<'a> Compiled<'a> {
    fn new(view: &'a CoalitionView) -> Self {
        let s = &view.scheme;
        let (structure, params) = (s.structure(), s.params());
        let m = structure.levels();
        let d0 = params.d0;
        let bounds: Vec<usize> = (1..=m).map(|l| s.level_bound(l)).collect();
        let mut alpha_offsets = Vec::with_capacity(m);
        let mut dims = d0;
        for &t in &bounds {
            alpha_offsets.push(dims);
            dims += t - d0;
        }
        let hidden = structure.prefix(m - 1);
        let mut share_offsets = Vec::with_capacity(hidden);
        for i in 1..=hidden {
            share_offsets.push(dims);
            dims += params.degree(i);
        }

        let mut checks = Vec::new();
        let mut masked = Vec::new();
        for (i, share) in &view.shares {
            if *i <= hidden {
                checks.push(Check::Digits {
                    offset: share_offsets[i - 1],
                    expected: share.coeffs.clone(),
                });
            } else {
                checks.push(Check::Residue {
                    level: m,
                    rows: reduction_rows(params.modulus(*i), bounds[m - 1]),
                    target: share.coeffs.clone(),
                });
            }
        }
        for (l, i) in bulletin_index_set(structure) {
            let own = view.shares.get(&i);
            if own.is_none() && view.mode == ViewMode::OwnEntries {
                continue;
            }
            let d = params.degree(i);
            let rows = reduction_rows(params.modulus(i), bounds[l - 1]);
            let mask = view.bulletin.get(l, i).expect("checked on construction").to_fixed(d);
            match own {
                Some(share) => {
                    let hashed = s.family().hash_poly(l, &share.coeffs).expect("valid share");
                    let target = (&hashed + &Poly::new(params.field, mask)).to_fixed(d);
                    checks.push(Check::Residue { level: l, rows, target });
                }
                None => masked.push(Check::Masked { level: l, rows, offset: share_offsets[i - 1], mask }),
            }
        }
        checks.extend(masked);
        Self { view, field: params.field, d0, bounds, alpha_offsets, dims, checks }
    }

    /// Whether `Σ_j coeff(j) rows[j] = target(k)` in every position `k`.
    fn residue_is(
        &self,
        rows: &[Vec<FieldElement>],
        coeff: impl Fn(usize) -> FieldElement,
        target: impl Fn(usize) -> FieldElement,
    ) -> bool {
        let p = self.field.modulus();
        let width = rows.first().map_or(0, Vec::len);
        (0..width).all(|k| dot_mod(p, rows.iter().enumerate().map(|(j, r)| (coeff(j), r[k]))) == target(k))
    }

    fn state_matches(&self, st: &[FieldElement]) -> bool {
        let d0 = self.d0;
        let level_coeff = |l: usize| {
            let off = self.alpha_offsets[l - 1];
            move |j: usize| if j < d0 { st[j] } else { st[off + j - d0] }
        };
        let family = self.view.scheme.family();
        self.checks.iter().all(|check| match check {
            Check::Digits { offset, expected } => &st[*offset..*offset + expected.len()] == expected,
            Check::Residue { level, rows, target } => {
                self.residue_is(rows, level_coeff(*level), |k| target[k])
            }
            Check::Masked { level, rows, offset, mask } => {
                let c = &st[*offset..*offset + mask.len()];
                self.residue_is(rows, level_coeff(*level), |k| {
                    let h = family.h(*level, c[k]).expect("canonical digit");
                    self.field.add(mask[k], h)
                })
            }
        })
    }

    /// Candidates `a` with `g_ℓ = s + a x^{d0}` meeting the level's known residues.
    fn level_solutions(&self, level: usize, secret: &[FieldElement]) -> u128 {
        let p = self.field.modulus();
        let free = self.bounds[level - 1] - self.d0;
        let checks: Vec<(&Vec<Vec<FieldElement>>, &Vec<FieldElement>)> = self
            .checks
            .iter()
            .filter_map(|c| match c {
                Check::Residue { level: l, rows, target } if *l == level => Some((rows, target)),
                _ => None,
            })
            .collect();
        let mut a = vec![0u64; free];
        let mut count = 0u128;
        loop {
            let coeff = |j: usize| if j < self.d0 { secret[j] } else { a[j - self.d0] };
            if checks.iter().all(|(rows, target)| self.residue_is(rows, coeff, |k| target[k])) {
                count += 1;
            }
            if !odometer(&mut a, p) {
                return count;
            }
        }
    }

    fn preimage_states(&self) -> u128 {
        let p = self.field.modulus();
        self.bounds.iter().fold(0u128, |acc, &t| acc.saturating_add(pow_sat(p, t - self.d0)))
    }
}

/// `Σ a_j b_j mod p` over canonical elements. Stays in `u64` while the
/// running sum cannot overflow, which covers every enumerable field.
fn dot_mod(p: u64, terms: impl Iterator<Item = (FieldElement, FieldElement)>) -> FieldElement {
    if p < 1 << 28 {
        // each product is below 2^56, so 255 of them fit before reducing
        let mut acc = 0u64;
        for (n, (a, b)) in terms.enumerate() {
            acc += a * b;
            if n % 255 == 254 {
                acc %= p;
            }
        }
        acc % p
    } else {
        let p = p as u128;
        terms.fold(0u128, |acc, (a, b)| (acc + a as u128 * b as u128 % p) % p) as u64
    }
}

/// Advances a base-`p` counter; false once it wraps to all zeros.
fn odometer(digits: &mut [FieldElement], p: u64) -> bool {
    for d in digits.iter_mut() {
        *d += 1;
        if *d < p {
            return true;
        }
        *d = 0;
    }
    false
}

fn digits_of(mut index: u128, p: u64, len: usize) -> Vec<FieldElement> {
    (0..len)
        .map(|_| {
            let d = (index % p as u128) as u64;
            index /= p as u128;
            d
        })
        .collect()
}

/// Counts consistent dealer states per secret over the whole state space.
pub fn enumerate_consistent(
    view: &CoalitionView,
    budget: EnumerationBudget,
) -> Result<Histogram, OracleError> {
    let compiled = Compiled::new(view);
    let p = compiled.field.modulus();
    let total = budget.admit(pow_sat(p, compiled.dims))?;
    let d0 = compiled.d0;
    let secrets = pow_sat(p, d0) as usize;

    let chunks = (rayon::current_num_threads() as u128 * 16).min(total).max(1);
    let per_chunk = total.div_ceil(chunks);
    let counts = (0..chunks as u64)
        .into_par_iter()
        .map(|c| {
            let start = c as u128 * per_chunk;
            let end = (start + per_chunk).min(total);
            let mut local = vec![0u128; secrets];
            if start >= end {
                return local;
            }
            let mut st = digits_of(start, p, compiled.dims);
            for _ in start..end {
                if compiled.state_matches(&st) {
                    let k = st[..d0].iter().rev().fold(0usize, |acc, &c| acc * p as usize + c as usize);
                    local[k] += 1;
                }
                odometer(&mut st, p);
            }
            local
        })
        .reduce(
            || vec![0u128; secrets],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    Ok(Histogram { p, d0, counts })
}

/// `|Φ^{-1}(s)|`: tuples `(g_1..g_m)` with secret part `s` satisfying the
/// coalition's residue constraints.
pub fn count_preimage(
    view: &CoalitionView,
    secret: &Secret,
    budget: EnumerationBudget,
) -> Result<u128, OracleError> {
    view.scheme.check_secret(secret)?;
    let compiled = Compiled::new(view);
    budget.admit(compiled.preimage_states())?;
    Ok(preimage(&compiled, secret.coeffs()))
}

fn preimage(compiled: &Compiled, secret: &[FieldElement]) -> u128 {
    (1..=compiled.bounds.len()).map(|l| compiled.level_solutions(l, secret)).product()
}

/// `|Φ^{-1}(s)|` for every secret, in histogram order.
pub fn preimage_counts(
    view: &CoalitionView,
    budget: EnumerationBudget,
) -> Result<Vec<u128>, OracleError> {
    let compiled = Compiled::new(view);
    let p = compiled.field.modulus();
    let secrets = pow_sat(p, compiled.d0);
    budget.admit(secrets.saturating_mul(compiled.preimage_states()))?;
    Ok((0..secrets as u64)
        .into_par_iter()
        .map(|k| preimage(&compiled, secret_from_index(p, compiled.d0, k as u128).coeffs()))
        .collect())
}

/// `|F|`, the number of tuples satisfying conditions (i)-(iv).
pub fn count_f(view: &CoalitionView, budget: EnumerationBudget) -> Result<u128, OracleError> {
    Ok(preimage_counts(view, budget)?.into_iter().sum())
}

/// `H(S) - H(S | view)` in bits, with `S` uniform over `p^{d0}` secrets.
pub fn loss_entropy(view: &CoalitionView, budget: EnumerationBudget) -> Result<f64, OracleError> {
    entropy_loss(&enumerate_consistent(view, budget)?)
}

/// Loss entropy of a histogram. Exactly `0.0` for a uniform histogram.
pub fn entropy_loss(histogram: &Histogram) -> Result<f64, OracleError> {
    let total = histogram.total();
    if total == 0 {
        return Err(OracleError::NoConsistentState);
    }
    let mut groups: BTreeMap<u128, u128> = BTreeMap::new();
    for &c in histogram.counts.iter().filter(|&&c| c > 0) {
        *groups.entry(c).or_default() += 1;
    }
    let log_ratio = |c: u128| {
        if total.is_multiple_of(c) {
            ((total / c) as f64).log2()
        } else {
            (total as f64).log2() - (c as f64).log2()
        }
    };
    let conditional: f64 = groups
        .iter()
        .map(|(&c, &k)| {
            let weight = Ratio::new(k * c, total);
            (*weight.numer() as f64 / *weight.denom() as f64) * log_ratio(c)
        })
        .sum();
    let prior = (histogram.counts.len() as f64).log2();
    Ok(prior - conditional)
}

/// Finds the unique `y` with `deg y < Σ deg m_i` and `y ≡ r_i (mod m_i)` by
/// trying every candidate.
pub fn crt_bruteforce(
    residues: &[Poly],
    moduli: &[Poly],
    budget: EnumerationBudget,
) -> Result<Poly, OracleError> {
    if residues.len() != moduli.len() {
        return Err(PolyError::LengthMismatch { residues: residues.len(), moduli: moduli.len() }.into());
    }
    let field = moduli.first().ok_or(PolyError::NoModuli)?.field();
    for (i, m) in moduli.iter().enumerate() {
        if m.field() != field || residues[i].field() != field {
            return Err(PolyError::FieldMismatch { left: field, right: m.field() }.into());
        }
        if m.degree() < 1 {
            return Err(PolyError::DegenerateModulus(i).into());
        }
    }
    let len: usize = moduli.iter().map(|m| m.degree() as usize).sum();
    let p = field.modulus();
    budget.admit(pow_sat(p, len))?;

    let targets: Vec<Vec<FieldElement>> = residues
        .iter()
        .zip(moduli)
        .map(|(r, m)| Ok(r.rem(m)?.to_fixed(m.degree() as usize)))
        .collect::<Result<_, PolyError>>()?;
    let rows: Vec<Vec<Vec<FieldElement>>> = moduli.iter().map(|m| reduction_rows(m, len)).collect();

    let mut y = vec![0u64; len];
    let mut found = None;
    let mut solutions = 0u128;
    loop {
        let hit = rows.iter().zip(&targets).all(|(rows, target)| {
            (0..target.len()).all(|k| {
                dot_mod(p, rows.iter().zip(&y).map(|(r, &c)| (c, r[k]))) == target[k]
            })
        });
        if hit {
            solutions += 1;
            found.get_or_insert_with(|| y.clone());
        }
        if !odometer(&mut y, p) {
            break;
        }
    }
    match (solutions, found) {
        (1, Some(y)) => Ok(Poly::new(field, y)),
        (0, _) => Err(OracleError::NoSolution),
        (k, _) => Err(OracleError::MultipleSolutions(k)),
    }
}

/// Everything the oracle can say about one coalition view.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub coalition: Vec<usize>,
    pub mode: ViewMode,
    pub theta: u64,
    pub states: u128,
    pub histogram: Histogram,
    pub uniform: bool,
    pub loss_entropy: f64,
    /// `|Φ^{-1}(s)|` per secret, in histogram order.
    pub preimage_counts: Vec<u128>,
    /// `p^θ`.
    pub expected_preimage: u128,
    pub count_f: u128,
    /// `p^{θ+d0}`.
    pub expected_count_f: u128,
    pub free_share_factor: u128,
    pub notes: Vec<String>,
}

impl Analysis {
    /// Every secret has exactly `p^θ` preimages.
    pub fn preimages_hold(&self) -> bool {
        self.preimage_counts.iter().all(|&c| c == self.expected_preimage)
    }

    pub fn count_f_holds(&self) -> bool {
        self.count_f == self.expected_count_f
    }

    pub fn partition_holds(&self) -> bool {
        self.preimage_counts.iter().sum::<u128>() == self.count_f
    }

    /// In the own-entries view, the state histogram is the preimage count
    /// scaled by the free random shares. `None` for the full view.
    pub fn histogram_matches_preimages(&self) -> Option<bool> {
        (self.mode == ViewMode::OwnEntries).then(|| {
            self.histogram
                .counts()
                .iter()
                .zip(&self.preimage_counts)
                .all(|(&h, &c)| h == c * self.free_share_factor)
        })
    }
}

fn structure_notes(structure: &AccessStructure) -> Vec<String> {
    let mut notes = Vec::new();
    if structure.levels() == 2 {
        let (n1, t1, t2) = (structure.prefix(1), structure.threshold(1), structure.threshold(2));
        if n1 >= t2 {
            notes.push(format!(
                "the Yang scheme on this structure is broken: n1 = {n1} >= t2 = {t2}, \
                 so any {t1} level-2 participants recover the secret"
            ));
        } else if t1 <= n1 {
            notes.push(format!(
                "the Yang scheme on this structure is not perfect (t1 = {t1} <= n1 = {n1} < t2 = {t2})"
            ));
        }
    }
    notes
}

/// Runs every check. The state enumeration runs first, so an oversized
/// space reports the dealer state count.
pub fn analyze(view: &CoalitionView, budget: EnumerationBudget) -> Result<Analysis, OracleError> {
    let histogram = enumerate_consistent(view, budget)?;
    let loss = entropy_loss(&histogram)?;
    let theta = view.theta()?;
    let preimage_counts = preimage_counts(view, budget)?;
    let p = view.scheme.params().field.modulus();
    let d0 = view.scheme.params().d0;
    Ok(Analysis {
        coalition: view.coalition.clone(),
        mode: view.mode,
        theta,
        states: view.state_count(),
        uniform: histogram.is_uniform(),
        histogram,
        loss_entropy: loss,
        count_f: preimage_counts.iter().sum(),
        preimage_counts,
        expected_preimage: pow_sat(p, theta as usize),
        expected_count_f: pow_sat(p, theta as usize + d0),
        free_share_factor: view.free_share_factor(),
        notes: structure_notes(view.scheme.structure()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moduli::generate_moduli;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn scheme(p: u64, sizes: &[usize], t: &[usize], degrees: &[usize], d0: usize, seed: u64) -> Scheme {
        let field = PrimeField::new(p).unwrap();
        let moduli = generate_moduli(field, degrees, &mut ChaCha20Rng::seed_from_u64(seed)).unwrap();
        let params = PublicParams::new(field, d0, moduli, HashBackend::Table { seed });
        Scheme::new(AccessStructure::new(sizes.to_vec(), t.to_vec()).unwrap(), params).unwrap()
    }

    fn view(s: &Scheme, coalition: &[usize], mode: ViewMode, seed: u64) -> CoalitionView {
        let secret = Secret::new(vec![1; s.params().d0]);
        let (shares, bulletin) = s.deal(&secret, &mut ChaCha20Rng::seed_from_u64(seed)).unwrap();
        let mine = coalition.iter().map(|&i| shares[i - 1].clone()).collect();
        CoalitionView::new(s.clone(), mine, bulletin, mode).unwrap()
    }

    #[test]
    fn theta_examples() {
        let s = scheme(11, &[3, 4], &[2, 3], &[1; 7], 1, 0);
        assert_eq!(compute_theta(s.structure(), s.params(), &[4, 5]), Ok(1));
        assert_eq!(compute_theta(s.structure(), s.params(), &[]), Ok(1 + 2));
        assert_eq!(
            compute_theta(s.structure(), s.params(), &[1, 2]),
            Err(OracleError::AuthorizedCoalition(vec![1, 2]))
        );
    }

    #[test]
    fn view_preconditions() {
        let s = scheme(3, &[2, 2], &[1, 2], &[1, 2, 2, 2], 1, 4);
        let (shares, bulletin) = s.deal(&Secret::new(vec![0]), &mut ChaCha20Rng::seed_from_u64(0)).unwrap();
        assert_eq!(
            CoalitionView::new(s.clone(), vec![shares[0].clone()], bulletin.clone(), ViewMode::OwnEntries)
                .unwrap_err(),
            OracleError::AuthorizedCoalition(vec![1])
        );

        let field = PrimeField::new(3).unwrap();
        let crypto = Scheme::new(
            s.structure().clone(),
            PublicParams::new(field, 1, s.params().moduli.clone(), HashBackend::Crypto),
        )
        .unwrap();
        let (shares, bulletin) = crypto.deal(&Secret::new(vec![0]), &mut ChaCha20Rng::seed_from_u64(0)).unwrap();
        assert_eq!(
            CoalitionView::new(crypto, vec![shares[2].clone()], bulletin, ViewMode::FullBulletin).unwrap_err(),
            OracleError::FullViewNeedsTable
        );
    }

    #[test]
    fn uniform_small_instance() {
        let s = scheme(3, &[2, 2], &[1, 2], &[1, 2, 2, 2], 1, 1);
        let v = view(&s, &[3], ViewMode::OwnEntries, 7);
        assert_eq!(v.state_count(), 729);
        let h = enumerate_consistent(&v, EnumerationBudget::default()).unwrap();
        assert!(h.is_uniform(), "{h:?}");
        assert_eq!(entropy_loss(&h).unwrap(), 0.0);
    }

    #[test]
    fn budget_is_reported_exactly() {
        let s = scheme(3, &[1, 2], &[1, 2], &[1, 2, 2], 1, 2);
        let v = view(&s, &[2], ViewMode::OwnEntries, 0);
        assert_eq!(
            enumerate_consistent(&v, EnumerationBudget::new(10).unwrap()),
            Err(OracleError::BudgetExceeded { states: 81, budget: 10 })
        );
        assert_eq!(EnumerationBudget::new(0), Err(OracleError::ZeroBudget));
    }

    #[test]
    fn counts_match_theta_on_the_attack_configuration() {
        let s = scheme(3, &[3, 4], &[2, 3], &[3; 7], 1, 3);
        let v = view(&s, &[4, 5], ViewMode::OwnEntries, 1);
        let theta = v.theta().unwrap();
        let budget = EnumerationBudget::default();
        for k in 0..3 {
            assert_eq!(count_preimage(&v, &Secret::new(vec![k]), budget).unwrap(), 3u128.pow(theta as u32));
        }
        assert_eq!(count_f(&v, budget).unwrap(), 3u128.pow(theta as u32 + 1));
    }

    #[test]
    fn empty_coalition_single_level() {
        let s = scheme(5, &[2], &[1], &[1, 1], 1, 0);
        let v = view(&s, &[], ViewMode::OwnEntries, 0);
        assert_eq!(v.theta(), Ok(0));
        assert_eq!(count_f(&v, EnumerationBudget::default()), Ok(5));
    }

    #[test]
    fn entropy_of_skewed_histograms() {
        let point = Histogram { p: 2, d0: 1, counts: vec![4, 0] };
        assert!((entropy_loss(&point).unwrap() - 1.0).abs() < 1e-12);
        let skew = Histogram { p: 3, d0: 1, counts: vec![1, 1, 2] };
        let h = 0.25 * 2.0 * 2.0 + 0.5 * 1.0;
        assert!((entropy_loss(&skew).unwrap() - (3f64.log2() - h)).abs() < 1e-12);
        let empty = Histogram { p: 3, d0: 1, counts: vec![0, 0, 0] };
        assert_eq!(entropy_loss(&empty), Err(OracleError::NoConsistentState));
    }

    #[test]
    fn crt_bruteforce_basics() {
        let f = PrimeField::new(5).unwrap();
        let m = Poly::new(f, vec![1, 0, 1]);
        let r = Poly::new(f, vec![3, 2]);
        let budget = EnumerationBudget::default();
        assert_eq!(crt_bruteforce(std::slice::from_ref(&r), std::slice::from_ref(&m), budget), Ok(r));
        // x + 1 divides x^2 + x
        let a = Poly::new(f, vec![1, 1]);
        let b = Poly::new(f, vec![0, 1, 1]);
        let moduli = [a, b];
        assert_eq!(
            crt_bruteforce(&[Poly::zero(f), Poly::one(f)], &moduli, budget),
            Err(OracleError::NoSolution)
        );
        assert_eq!(
            crt_bruteforce(&[Poly::zero(f), Poly::zero(f)], &moduli, budget),
            Err(OracleError::MultipleSolutions(5))
        );
        assert_eq!(
            crt_bruteforce(&[Poly::zero(f), Poly::zero(f)], &moduli, EnumerationBudget::new(100).unwrap()),
            Err(OracleError::BudgetExceeded { states: 125, budget: 100 })
        );
    }

    /// Oracle: re-deal every dealer state through the real dealer and compare
    /// the resulting view field by field.
    fn histogram_by_redealing(v: &CoalitionView) -> Vec<u128> {
        use crate::dhss::DealerRandomness;
        let s = &v.scheme;
        let p = s.params().field.modulus();
        let d0 = s.params().d0;
        let m = s.structure().levels();
        let alpha_lens: Vec<usize> = (1..=m).map(|l| s.level_bound(l) - d0).collect();
        let share_lens: Vec<usize> =
            (1..=s.structure().prefix(m - 1)).map(|i| s.params().degree(i)).collect();
        let dims = d0 + alpha_lens.iter().sum::<usize>() + share_lens.iter().sum::<usize>();
        let mut counts = vec![0u128; p.pow(d0 as u32) as usize];
        let mut st = vec![0u64; dims];
        loop {
            let mut rest = &st[d0..];
            let mut take = |n: usize| {
                let (a, b) = rest.split_at(n);
                rest = b;
                a.to_vec()
            };
            let alphas = alpha_lens.iter().map(|&n| take(n)).collect();
            let random_shares = share_lens.iter().map(|&n| take(n)).collect();
            let secret = Secret::new(st[..d0].to_vec());
            let dealt = s.deal_with(&secret, &DealerRandomness { alphas, random_shares }).unwrap();
            let shares_match = v.shares.values().all(|sh| dealt.shares[sh.participant - 1] == *sh);
            let bulletin_match = dealt.bulletin.iter().all(|(l, i, w)| {
                let seen = v.mode == ViewMode::FullBulletin || v.shares.contains_key(&i);
                !seen || v.bulletin.get(l, i) == Some(w)
            });
            if shares_match && bulletin_match {
                counts[secret_index(p, &secret).unwrap() as usize] += 1;
            }
            if !odometer(&mut st, p) {
                return counts;
            }
        }
    }

    #[test]
    fn enumeration_matches_redealing() {
        let cases: [(u64, &[usize], &[usize], &[usize], &[usize]); 4] = [
            (3, &[2, 2], &[1, 2], &[1, 2, 2, 2], &[3]),
            (3, &[2, 2], &[1, 2], &[1, 2, 2, 2], &[4]),
            (3, &[1, 2], &[1, 2], &[1, 2, 2], &[2]),
            (5, &[2, 2], &[1, 2], &[1, 1, 1, 1], &[]),
        ];
        for (seed, (p, sizes, t, degrees, coalition)) in cases.into_iter().enumerate() {
            let s = scheme(p, sizes, t, degrees, 1, seed as u64);
            for mode in [ViewMode::OwnEntries, ViewMode::FullBulletin] {
                let v = view(&s, coalition, mode, seed as u64 + 10);
                let fast = enumerate_consistent(&v, EnumerationBudget::default()).unwrap();
                assert_eq!(fast.counts(), histogram_by_redealing(&v), "case {seed} {mode:?}");
            }
        }
    }

    #[test]
    fn secret_indexing_round_trips() {
        for k in 0..125u128 {
            let s = secret_from_index(5, 3, k);
            assert_eq!(secret_index(5, &s), Some(k));
        }
    }
}
