//! Irreducibility testing and generation of participant moduli.
//!
//! Moduli are drawn as distinct monic irreducible polynomials other than `x`,
//! which makes them pairwise coprime and coprime to `x^{d0}` at once.

use rand::seq::index::sample;
use rand::Rng;

use crate::field::PrimeField;
use crate::params::ParamsError;
use crate::poly::{gcd, Poly};

/// Below this many candidates a degree class is listed exhaustively.
const ENUMERATION_LIMIT: u128 = 1 << 16;

/// Rabin's test: `f` of degree `d` is irreducible iff `x^{p^d} ≡ x (mod f)`
/// and `gcd(x^{p^{d/q}} - x, f) = 1` for every prime `q | d`.
pub fn is_irreducible(f: &Poly) -> bool {
    let d = f.degree();
    if d < 1 {
        return false;
    }
    let d = d as usize;
    if d == 1 {
        return true;
    }
    let field = f.field();
    let p = field.modulus() as u128;
    let x = Poly::x(field).rem(f).expect("nonzero modulus");
    // frobenius[k] = x^{p^k} mod f
    let mut frobenius = Vec::with_capacity(d + 1);
    frobenius.push(x.clone());
    for k in 1..=d {
        let next = frobenius[k - 1].pow_mod(p, f).expect("nonzero modulus");
        frobenius.push(next);
    }
    if frobenius[d] != x {
        return false;
    }
    prime_factors(d).into_iter().all(|q| {
        let h = &frobenius[d / q] - &x;
        !h.is_zero() && gcd(&h, f).map(|g| g.is_one()).unwrap_or(false)
    })
}

fn prime_factors(mut n: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut q = 2;
    while q * q <= n {
        if n.is_multiple_of(q) {
            out.push(q);
            while n.is_multiple_of(q) {
                n /= q;
            }
        }
        q += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

fn mobius(n: usize) -> i128 {
    let mut n = n;
    let mut sign = 1;
    let mut q = 2;
    while q * q <= n {
        if n.is_multiple_of(q) {
            n /= q;
            if n.is_multiple_of(q) {
                return 0;
            }
            sign = -sign;
        }
        q += 1;
    }
    if n > 1 {
        sign = -sign;
    }
    sign
}

/// Number of monic irreducible polynomials of degree `d` over F_p,
/// `(1/d) Σ_{k | d} μ(k) p^{d/k}`. `None` on overflow.
pub fn count_monic_irreducibles(p: u64, d: usize) -> Option<u128> {
    if d == 0 {
        return Some(0);
    }
    let mut total: i128 = 0;
    for k in (1..=d).filter(|k| d.is_multiple_of(*k)) {
        let term = (p as i128).checked_pow((d / k) as u32)?;
        total = total.checked_add(mobius(k) * term)?;
    }
    Some((total / d as i128) as u128)
}

fn usable_irreducibles(p: u64, d: usize) -> Option<u128> {
    // x itself is the only irreducible excluded by condition (i)
    count_monic_irreducibles(p, d).map(|c| if d == 1 { c - 1 } else { c })
}

fn monic_from_index(field: PrimeField, d: usize, mut idx: u128) -> Poly {
    let p = field.modulus() as u128;
    let mut coeffs = Vec::with_capacity(d + 1);
    for _ in 0..d {
        coeffs.push((idx % p) as u64);
        idx /= p;
    }
    coeffs.push(1);
    Poly::new(field, coeffs)
}

fn draw_class<R: Rng + ?Sized>(
    field: PrimeField,
    degree: usize,
    count: usize,
    rng: &mut R,
) -> Result<Vec<Poly>, ParamsError> {
    let p = field.modulus();
    let available = usable_irreducibles(p, degree).unwrap_or(u128::MAX);
    if count as u128 > available {
        return Err(ParamsError::InsufficientIrreducibles {
            degree,
            requested: count as u128,
            available,
        });
    }
    let space = (p as u128).checked_pow(degree as u32);
    match space {
        Some(space) if space <= ENUMERATION_LIMIT => {
            let pool: Vec<Poly> = (0..space)
                .map(|idx| monic_from_index(field, degree, idx))
                .filter(|f| f.coeff(0) != 0 && is_irreducible(f))
                .collect();
            Ok(sample(rng, pool.len(), count).into_iter().map(|k| pool[k].clone()).collect())
        }
        _ => {
            let mut out: Vec<Poly> = Vec::with_capacity(count);
            while out.len() < count {
                let mut coeffs: Vec<u64> = (0..degree).map(|_| rng.gen_range(0..p)).collect();
                coeffs.push(1);
                let f = Poly::new(field, coeffs);
                if f.coeff(0) != 0 && !out.contains(&f) && is_irreducible(&f) {
                    out.push(f);
                }
            }
            Ok(out)
        }
    }
}

/// Draws one distinct monic irreducible modulus per entry of the
/// non-decreasing degree `profile`, none equal to `x`.
pub fn generate_moduli<R: Rng + ?Sized>(
    field: PrimeField,
    profile: &[usize],
    rng: &mut R,
) -> Result<Vec<Poly>, ParamsError> {
    if profile.is_empty() || profile[0] == 0 || profile.windows(2).any(|w| w[0] > w[1]) {
        return Err(ParamsError::BadProfile);
    }
    let mut out = Vec::with_capacity(profile.len());
    let mut start = 0;
    while start < profile.len() {
        let degree = profile[start];
        let end = start + profile[start..].iter().take_while(|&&d| d == degree).count();
        out.extend(draw_class(field, degree, end - start, rng)?);
        start = end;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hashing::HashBackend;
    use crate::params::{validate_params, AccessStructure, PublicParams};
    use crate::poly::is_pairwise_coprime;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    /// Oracle: no monic factor of degree 1..=d/2 divides f.
    fn irreducible_by_trial_division(f: &Poly) -> bool {
        let d = f.degree() as usize;
        let field = f.field();
        let p = field.modulus() as u128;
        (1..=d / 2).all(|k| {
            (0..p.pow(k as u32)).all(|idx| {
                let g = monic_from_index(field, k, idx);
                !f.rem(&g).unwrap().is_zero()
            })
        })
    }

    #[test]
    fn rabin_agrees_with_trial_division() {
        for p in [2u64, 3, 5] {
            let field = PrimeField::new(p).unwrap();
            for d in 1..=4usize {
                let mut found = 0u128;
                for idx in 0..(p as u128).pow(d as u32) {
                    let f = monic_from_index(field, d, idx);
                    let rabin = is_irreducible(&f);
                    assert_eq!(rabin, irreducible_by_trial_division(&f), "{f:?}");
                    found += rabin as u128;
                }
                assert_eq!(Some(found), count_monic_irreducibles(p, d), "p={p} d={d}");
            }
        }
    }

    #[test]
    fn known_counts() {
        assert_eq!(count_monic_irreducibles(5, 2), Some(10));
        assert_eq!(count_monic_irreducibles(3, 2), Some(3));
        assert_eq!(count_monic_irreducibles(2, 4), Some(3));
        assert_eq!(usable_irreducibles(3, 1), Some(2));
    }

    #[test]
    fn linear_moduli_are_distinct_and_nonzero_rooted() {
        let field = PrimeField::new(11).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(7);
        let moduli = generate_moduli(field, &[1, 1, 1], &mut rng).unwrap();
        assert_eq!(moduli.len(), 3);
        assert!(moduli.iter().all(|m| m.degree() == 1 && m.is_monic() && m.coeff(0) != 0));
        assert_eq!(is_pairwise_coprime(&moduli), Ok(true));
    }

    #[test]
    fn exhausted_degree_class_is_an_error() {
        let field = PrimeField::new(3).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(0);
        assert_eq!(
            generate_moduli(field, &[1; 8], &mut rng),
            Err(ParamsError::InsufficientIrreducibles { degree: 1, requested: 8, available: 2 })
        );
        let field = PrimeField::new(5).unwrap();
        assert!(matches!(
            generate_moduli(field, &[1; 7], &mut rng),
            Err(ParamsError::InsufficientIrreducibles { available: 4, .. })
        ));
    }

    #[test]
    fn quadratic_moduli_validate() {
        let field = PrimeField::new(5).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let moduli = generate_moduli(field, &[2, 2], &mut rng).unwrap();
        assert!(moduli.iter().all(|m| m.degree() == 2 && irreducible_by_trial_division(m)));
        let structure = AccessStructure::new(vec![2], vec![1]).unwrap();
        let params = PublicParams::new(field, 2, moduli, HashBackend::Crypto);
        assert!(validate_params(&structure, &params).is_valid());
    }

    #[test]
    fn large_field_uses_rejection_sampling() {
        let field = PrimeField::new(2_147_483_647).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let moduli = generate_moduli(field, &[1, 2, 3, 3], &mut rng).unwrap();
        assert_eq!(moduli.iter().map(Poly::degree).collect::<Vec<_>>(), vec![1, 2, 3, 3]);
        assert!(moduli.iter().all(is_irreducible));
        assert_eq!(is_pairwise_coprime(&moduli), Ok(true));
    }

    #[test]
    fn profile_must_be_sorted_and_positive() {
        let field = PrimeField::new(11).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(0);
        assert_eq!(generate_moduli(field, &[2, 1], &mut rng), Err(ParamsError::BadProfile));
        assert_eq!(generate_moduli(field, &[0, 1], &mut rng), Err(ParamsError::BadProfile));
        assert_eq!(generate_moduli(field, &[], &mut rng), Err(ParamsError::BadProfile));
    }

    #[test]
    fn generation_is_seed_deterministic() {
        let field = PrimeField::new(101).unwrap();
        let a = generate_moduli(field, &[1, 1, 2], &mut ChaCha20Rng::seed_from_u64(9)).unwrap();
        let b = generate_moduli(field, &[1, 1, 2], &mut ChaCha20Rng::seed_from_u64(9)).unwrap();
        assert_eq!(a, b);
    }
}
