//! Dense univariate polynomials over F_p.
//!
//! Coefficients are stored ascending by power (`coeffs[j]` multiplies `x^j`)
//! and kept normalized: the highest stored coefficient is nonzero and the
//! zero polynomial has no coefficients at all. Its degree is `-1`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use thiserror::Error;

use crate::field::{FieldElement, PrimeField};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error("operands live in different fields ({left:?} vs {right:?})")]
    FieldMismatch { left: PrimeField, right: PrimeField },
    #[error("division by the zero polynomial")]
    DivisionByZero,
    #[error("gcd(0, 0) is undefined")]
    BothZero,
    #[error("polynomial is not invertible modulo the given modulus")]
    NotCoprime,
    #[error("moduli {0} and {1} share a common factor")]
    NotPairwiseCoprime(usize, usize),
    #[error("{residues} residues supplied for {moduli} moduli")]
    LengthMismatch { residues: usize, moduli: usize },
    #[error("at least one modulus is required")]
    NoModuli,
    #[error("modulus {0} has degree < 1")]
    DegenerateModulus(usize),
    #[error("polynomial {0} is zero")]
    ZeroPolynomial(usize),
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Poly {
    field: PrimeField,
    coeffs: Vec<FieldElement>,
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Poly[{:?}]{:?}", self.field, self.coeffs)
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut first = true;
        for (j, &c) in self.coeffs.iter().enumerate().rev() {
            if c == 0 {
                continue;
            }
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            match (j, c) {
                (0, _) => write!(f, "{c}")?,
                (1, 1) => f.write_str("x")?,
                (1, _) => write!(f, "{c}x")?,
                (_, 1) => write!(f, "x^{j}")?,
                _ => write!(f, "{c}x^{j}")?,
            }
        }
        Ok(())
    }
}

impl Poly {
    /// Builds a polynomial from ascending coefficients, reducing each mod p.
    pub fn new(field: PrimeField, coeffs: impl Into<Vec<u64>>) -> Self {
        let mut coeffs = coeffs.into();
        for c in coeffs.iter_mut() {
            *c = field.reduce(*c);
        }
        let mut poly = Self { field, coeffs };
        poly.normalize();
        poly
    }

    pub fn zero(field: PrimeField) -> Self {
        Self { field, coeffs: Vec::new() }
    }

    pub fn one(field: PrimeField) -> Self {
        Self::constant(field, 1)
    }

    pub fn constant(field: PrimeField, c: u64) -> Self {
        Self::new(field, vec![c])
    }

    /// `c * x^k`.
    pub fn monomial(field: PrimeField, c: u64, k: usize) -> Self {
        let mut coeffs = vec![0; k + 1];
        coeffs[k] = c;
        Self::new(field, coeffs)
    }

    pub fn x(field: PrimeField) -> Self {
        Self::monomial(field, 1, 1)
    }

    fn normalize(&mut self) {
        while self.coeffs.last() == Some(&0) {
            self.coeffs.pop();
        }
    }

    #[inline]
    pub fn field(&self) -> PrimeField {
        self.field
    }

    #[inline]
    pub fn coeffs(&self) -> &[FieldElement] {
        &self.coeffs
    }

    /// Coefficient of `x^j`, zero past the degree.
    #[inline]
    pub fn coeff(&self, j: usize) -> FieldElement {
        self.coeffs.get(j).copied().unwrap_or(0)
    }

    /// Degree, with `-1` for the zero polynomial.
    #[inline]
    pub fn degree(&self) -> isize {
        self.coeffs.len() as isize - 1
    }

    /// Number of stored coefficients, i.e. `degree + 1`.
    #[inline]
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    #[inline]
    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.coeffs == [1]
    }

    pub fn leading_coeff(&self) -> FieldElement {
        self.coeffs.last().copied().unwrap_or(0)
    }

    pub fn is_monic(&self) -> bool {
        self.leading_coeff() == 1
    }

    /// Scales to leading coefficient one. Zero stays zero.
    pub fn monic(&self) -> Self {
        match self.field.inv(self.leading_coeff()) {
            Some(inv) => self.scale(inv),
            None => self.clone(),
        }
    }

    /// Fixed-length coefficient vector of exactly `len` entries.
    ///
    /// Panics if the polynomial does not fit; callers only use this on
    /// values already reduced below the target length.
    pub fn to_fixed(&self, len: usize) -> Vec<FieldElement> {
        assert!(
            self.coeffs.len() <= len,
            "degree {} does not fit in {len} coefficients",
            self.degree()
        );
        let mut out = self.coeffs.clone();
        out.resize(len, 0);
        out
    }

    pub fn eval(&self, x: FieldElement) -> FieldElement {
        let f = self.field;
        self.coeffs.iter().rev().fold(0, |acc, &c| f.add(f.mul(acc, x), c))
    }

    pub fn scale(&self, c: FieldElement) -> Self {
        let f = self.field;
        Self::from_raw(f, self.coeffs.iter().map(|&a| f.mul(a, c)).collect())
    }

    /// Multiplies by `x^k`.
    pub fn shift(&self, k: usize) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let mut coeffs = vec![0; k];
        coeffs.extend_from_slice(&self.coeffs);
        Self { field: self.field, coeffs }
    }

    /// Reduction modulo `x^k`.
    pub fn truncate(&self, k: usize) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs.truncate(k);
        Self::from_raw(self.field, coeffs)
    }

    fn from_raw(field: PrimeField, coeffs: Vec<FieldElement>) -> Self {
        let mut poly = Self { field, coeffs };
        poly.normalize();
        poly
    }

    fn check_field(&self, other: &Self) -> Result<(), PolyError> {
        if self.field == other.field {
            Ok(())
        } else {
            Err(PolyError::FieldMismatch { left: self.field, right: other.field })
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self, PolyError> {
        self.check_field(other)?;
        let f = self.field;
        let n = self.len().max(other.len());
        let coeffs = (0..n).map(|j| f.add(self.coeff(j), other.coeff(j))).collect();
        Ok(Self::from_raw(f, coeffs))
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self, PolyError> {
        self.check_field(other)?;
        let f = self.field;
        let n = self.len().max(other.len());
        let coeffs = (0..n).map(|j| f.sub(self.coeff(j), other.coeff(j))).collect();
        Ok(Self::from_raw(f, coeffs))
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self, PolyError> {
        self.check_field(other)?;
        let f = self.field;
        if self.is_zero() || other.is_zero() {
            return Ok(Self::zero(f));
        }
        let mut out = vec![0; self.len() + other.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] = f.add(out[i + j], f.mul(a, b));
            }
        }
        // Leading product is nonzero in a field, so this is already normal.
        Ok(Self { field: f, coeffs: out })
    }

    /// Euclidean division: `self = q * divisor + r` with `deg r < deg divisor`.
    pub fn divmod(&self, divisor: &Self) -> Result<(Self, Self), PolyError> {
        self.check_field(divisor)?;
        let f = self.field;
        if divisor.is_zero() {
            return Err(PolyError::DivisionByZero);
        }
        if self.len() < divisor.len() {
            return Ok((Self::zero(f), self.clone()));
        }
        let lead_inv = f.inv(divisor.leading_coeff()).expect("nonzero leading coefficient");
        let dlen = divisor.len();
        let mut rem = self.coeffs.clone();
        let mut quot = vec![0; self.len() - dlen + 1];
        for k in (0..quot.len()).rev() {
            let c = f.mul(rem[k + dlen - 1], lead_inv);
            quot[k] = c;
            if c == 0 {
                continue;
            }
            for (j, &d) in divisor.coeffs.iter().enumerate() {
                rem[k + j] = f.sub(rem[k + j], f.mul(c, d));
            }
        }
        rem.truncate(dlen - 1);
        Ok((Self::from_raw(f, quot), Self::from_raw(f, rem)))
    }

    pub fn rem(&self, modulus: &Self) -> Result<Self, PolyError> {
        self.divmod(modulus).map(|(_, r)| r)
    }

    /// `self^exp mod modulus` by square and multiply.
    pub fn pow_mod(&self, mut exp: u128, modulus: &Self) -> Result<Self, PolyError> {
        let mut base = self.rem(modulus)?;
        let mut acc = Self::one(self.field).rem(modulus)?;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = (&acc * &base).rem(modulus)?;
            }
            base = (&base * &base).rem(modulus)?;
            exp >>= 1;
        }
        Ok(acc)
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident, $checked:ident) => {
        impl $trait<&Poly> for &Poly {
            type Output = Poly;
            fn $method(self, rhs: &Poly) -> Poly {
                self.$checked(rhs).expect("polynomials from different fields")
            }
        }

        impl $trait<Poly> for Poly {
            type Output = Poly;
            fn $method(self, rhs: Poly) -> Poly {
                (&self).$method(&rhs)
            }
        }
    };
}

forward_binop!(Add, add, try_add);
forward_binop!(Sub, sub, try_sub);
forward_binop!(Mul, mul, try_mul);

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        let f = self.field;
        Poly { field: f, coeffs: self.coeffs.iter().map(|&c| f.neg(c)).collect() }
    }
}

/// Result of the extended Euclidean algorithm: `u*a + v*b = g`, `g` monic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Xgcd {
    pub g: Poly,
    pub u: Poly,
    pub v: Poly,
}

pub fn xgcd(a: &Poly, b: &Poly) -> Result<Xgcd, PolyError> {
    a.check_field(b)?;
    let field = a.field;
    if a.is_zero() && b.is_zero() {
        return Err(PolyError::BothZero);
    }
    let (mut r0, mut r1) = (a.clone(), b.clone());
    let (mut u0, mut u1) = (Poly::one(field), Poly::zero(field));
    let (mut v0, mut v1) = (Poly::zero(field), Poly::one(field));
    while !r1.is_zero() {
        let (q, r) = r0.divmod(&r1)?;
        let u2 = &u0 - &(&q * &u1);
        let v2 = &v0 - &(&q * &v1);
        r0 = std::mem::replace(&mut r1, r);
        u0 = std::mem::replace(&mut u1, u2);
        v0 = std::mem::replace(&mut v1, v2);
    }
    let inv = field.inv(r0.leading_coeff()).expect("nonzero gcd");
    Ok(Xgcd { g: r0.scale(inv), u: u0.scale(inv), v: v0.scale(inv) })
}

pub fn gcd(a: &Poly, b: &Poly) -> Result<Poly, PolyError> {
    xgcd(a, b).map(|x| x.g)
}

/// Inverse of `a` modulo `m`, returned with degree below `deg m`.
pub fn inverse_mod(a: &Poly, m: &Poly) -> Result<Poly, PolyError> {
    if m.degree() < 1 {
        return Err(PolyError::DegenerateModulus(0));
    }
    let reduced = a.rem(m)?;
    if reduced.is_zero() {
        return Err(PolyError::NotCoprime);
    }
    let Xgcd { g, u, .. } = xgcd(&reduced, m)?;
    if !g.is_one() {
        return Err(PolyError::NotCoprime);
    }
    u.rem(m)
}

/// True iff every pair of inputs has a unit gcd.
pub fn is_pairwise_coprime(polys: &[Poly]) -> Result<bool, PolyError> {
    if let Some(i) = polys.iter().position(Poly::is_zero) {
        return Err(PolyError::ZeroPolynomial(i));
    }
    Ok(first_common_factor(polys)?.is_none())
}

fn first_common_factor(polys: &[Poly]) -> Result<Option<(usize, usize)>, PolyError> {
    for i in 0..polys.len() {
        for j in i + 1..polys.len() {
            if !gcd(&polys[i], &polys[j])?.is_one() {
                return Ok(Some((i, j)));
            }
        }
    }
    Ok(None)
}

/// Solves `y ≡ residues[i] (mod moduli[i])` for pairwise coprime moduli.
///
/// Returns the unique solution with `deg y < Σ deg moduli[i]`, computed as
/// `Σ λ_i M_i y_i mod M` where `M_i = M / m_i` and `λ_i = M_i^{-1} mod m_i`.
pub fn crt_combine(residues: &[Poly], moduli: &[Poly]) -> Result<Poly, PolyError> {
    if residues.len() != moduli.len() {
        return Err(PolyError::LengthMismatch { residues: residues.len(), moduli: moduli.len() });
    }
    let Some(first) = moduli.first() else {
        return Err(PolyError::NoModuli);
    };
    let field = first.field;
    for (i, m) in moduli.iter().enumerate() {
        first.check_field(m)?;
        if m.degree() < 1 {
            return Err(PolyError::DegenerateModulus(i));
        }
    }
    let product = moduli.iter().fold(Poly::one(field), |acc, m| &acc * m);
    let mut acc = Poly::zero(field);
    for (i, (y, m)) in residues.iter().zip(moduli).enumerate() {
        let (cofactor, _) = product.divmod(m)?;
        let lambda = match inverse_mod(&cofactor, m) {
            Ok(l) => l,
            Err(PolyError::NotCoprime) => {
                let (a, b) = first_common_factor(moduli)?.unwrap_or((i, i));
                return Err(PolyError::NotPairwiseCoprime(a, b));
            }
            Err(e) => return Err(e),
        };
        let term = (&lambda * &y.rem(m)?).rem(m)?;
        acc = &acc + &(&term * &cofactor);
    }
    acc.rem(&product)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f5() -> PrimeField {
        PrimeField::new(5).unwrap()
    }

    fn p5(c: &[u64]) -> Poly {
        Poly::new(f5(), c.to_vec())
    }

    /// Every polynomial over F_p with fewer than `len` coefficients.
    fn all_polys(field: PrimeField, len: usize) -> impl Iterator<Item = Poly> {
        let p = field.modulus();
        let total = p.pow(len as u32);
        (0..total).map(move |mut idx| {
            let mut c = Vec::with_capacity(len);
            for _ in 0..len {
                c.push(idx % p);
                idx /= p;
            }
            Poly::new(field, c)
        })
    }

    #[test]
    fn zero_has_degree_minus_one() {
        let z = Poly::zero(f5());
        assert_eq!(z.degree(), -1);
        assert!(p5(&[0, 0, 0]).is_zero());
        assert_eq!(p5(&[1, 2, 0]).degree(), 1);
    }

    #[test]
    fn add_examples() {
        let f = p5(&[3, 1, 4]);
        assert_eq!(&Poly::zero(f5()) + &f, f);
        assert_eq!(&p5(&[4, 1]) + &p5(&[1, 1]), p5(&[0, 2]));
        assert!((&f + &f.scale(4)).is_zero());
    }

    #[test]
    fn mul_examples() {
        let f = p5(&[3, 1, 4]);
        assert_eq!(&f * &Poly::one(f5()), f);
        assert_eq!(&p5(&[1, 1]) * &p5(&[2, 1]), p5(&[2, 3, 1]));
        assert!((&f * &Poly::zero(f5())).is_zero());
    }

    #[test]
    fn mismatched_fields_are_rejected() {
        let a = p5(&[1, 1]);
        let b = Poly::new(PrimeField::new(7).unwrap(), vec![1u64, 1]);
        assert!(matches!(a.try_add(&b), Err(PolyError::FieldMismatch { .. })));
        assert!(matches!(a.try_mul(&b), Err(PolyError::FieldMismatch { .. })));
        assert!(matches!(a.divmod(&b), Err(PolyError::FieldMismatch { .. })));
    }

    #[test]
    fn divmod_examples() {
        let a = p5(&[2, 3, 1]);
        assert_eq!(a.divmod(&a).unwrap(), (Poly::one(f5()), Poly::zero(f5())));
        assert_eq!(a.divmod(&p5(&[1, 1])).unwrap(), (p5(&[2, 1]), Poly::zero(f5())));
        let small = p5(&[4]);
        assert_eq!(small.divmod(&a).unwrap(), (Poly::zero(f5()), small.clone()));
        assert_eq!(a.divmod(&Poly::zero(f5())), Err(PolyError::DivisionByZero));
    }

    #[test]
    fn divmod_identity_exhaustive_small() {
        for p in [2u64, 3, 5] {
            let field = PrimeField::new(p).unwrap();
            let polys: Vec<_> = all_polys(field, 4).collect();
            for a in &polys {
                for b in polys.iter().filter(|b| !b.is_zero()) {
                    let (q, r) = a.divmod(b).unwrap();
                    assert!(r.degree() < b.degree());
                    assert_eq!(&(&q * b) + &r, *a);
                }
            }
        }
    }

    #[test]
    fn xgcd_examples() {
        let f = p5(&[3, 1, 4]);
        let one = Poly::one(f5());
        assert_eq!(
            xgcd(&f, &one).unwrap(),
            Xgcd { g: one.clone(), u: Poly::zero(f5()), v: one.clone() }
        );

        let (a, b) = (p5(&[1, 1]), p5(&[2, 1]));
        let Xgcd { g, u, v } = xgcd(&a, &b).unwrap();
        assert!(g.is_one());
        assert_eq!(&(&u * &a) + &(&v * &b), g);

        let Xgcd { g, u, v } = xgcd(&f, &f).unwrap();
        assert_eq!(g, f.monic());
        assert_eq!(&(&u * &f) + &(&v * &f), g);

        let z = Poly::zero(f5());
        assert_eq!(xgcd(&z, &z), Err(PolyError::BothZero));
    }

    #[test]
    fn inverse_examples() {
        let m = p5(&[2, 1]);
        assert_eq!(inverse_mod(&p5(&[3, 1]), &m).unwrap(), Poly::one(f5()));
        assert_eq!(inverse_mod(&p5(&[1, 1]), &m).unwrap(), p5(&[4]));
        assert_eq!(inverse_mod(&m, &m), Err(PolyError::NotCoprime));
    }

    #[test]
    fn inverse_round_trip_exhaustive() {
        let field = f5();
        let m = p5(&[2, 0, 1, 1]); // x^3 + x^2 + 2, reducible or not, doesn't matter
        for a in all_polys(field, 3) {
            match inverse_mod(&a, &m) {
                Ok(b) => {
                    assert!(b.degree() < m.degree());
                    assert!((&a * &b).rem(&m).unwrap().is_one());
                }
                Err(PolyError::NotCoprime) => assert!(!gcd(&a, &m).unwrap().is_one()),
                Err(e) => panic!("{e}"),
            }
        }
    }

    #[test]
    fn crt_examples() {
        let r = p5(&[3, 4, 1]);
        let m = p5(&[1, 1]);
        assert_eq!(crt_combine(std::slice::from_ref(&r), std::slice::from_ref(&m)).unwrap(), r.rem(&m).unwrap());

        let y = crt_combine(&[p5(&[2]), p5(&[3])], &[p5(&[1, 1]), p5(&[2, 1])]).unwrap();
        assert_eq!(y, p5(&[1, 4]));

        let g = p5(&[1, 2, 3]);
        let moduli = [p5(&[1, 1]), p5(&[2, 1]), p5(&[3, 1])];
        let residues: Vec<_> = moduli.iter().map(|m| g.rem(m).unwrap()).collect();
        assert_eq!(crt_combine(&residues, &moduli).unwrap(), g);
    }

    #[test]
    fn crt_errors() {
        let m = p5(&[1, 1]);
        assert_eq!(
            crt_combine(&[p5(&[1]), p5(&[2])], &[m.clone(), m.clone()]),
            Err(PolyError::NotPairwiseCoprime(0, 1))
        );
        assert_eq!(
            crt_combine(&[p5(&[1])], &[m.clone(), p5(&[2, 1])]),
            Err(PolyError::LengthMismatch { residues: 1, moduli: 2 })
        );
        assert_eq!(crt_combine(&[], &[]), Err(PolyError::NoModuli));
        assert_eq!(crt_combine(&[p5(&[1])], &[p5(&[3])]), Err(PolyError::DegenerateModulus(0)));
    }

    #[test]
    fn coprimality_examples() {
        assert_eq!(is_pairwise_coprime(&[p5(&[1, 1]), p5(&[2, 1])]), Ok(true));
        let f = p5(&[1, 0, 1]);
        assert_eq!(is_pairwise_coprime(&[f.clone(), f.clone()]), Ok(false));
        assert_eq!(is_pairwise_coprime(&[f]), Ok(true));
        assert_eq!(
            is_pairwise_coprime(&[p5(&[1]), Poly::zero(f5())]),
            Err(PolyError::ZeroPolynomial(1))
        );
    }

    #[test]
    fn display_is_readable() {
        assert_eq!(p5(&[2, 1, 0, 3]).to_string(), "3x^3 + x + 2");
        assert_eq!(Poly::zero(f5()).to_string(), "0");
    }
}
