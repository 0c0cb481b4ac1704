use dhss_core::oracle::{
    count_f, count_preimage, crt_bruteforce, enumerate_consistent, preimage_counts,
};
use dhss_core::{
    crt_combine, generate_moduli, validate_params, yang_deal, AccessStructure, CoalitionView,
    EnumerationBudget, HashBackend, Poly, PrimeField, PublicParams, Scheme, SchemeError, Secret,
    Share, ViewMode,
};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

fn poly_strategy(p: u64, max_len: usize) -> impl Strategy<Value = Vec<u64>> {
    prop::collection::vec(0..p, 0..=max_len)
}

proptest! {
    #[test]
    fn ring_axioms(a in poly_strategy(7, 5), b in poly_strategy(7, 5), c in poly_strategy(7, 5)) {
        let f = PrimeField::new(7).unwrap();
        let (a, b, c) = (Poly::new(f, a), Poly::new(f, b), Poly::new(f, c));
        prop_assert_eq!(&a + &b, &b + &a);
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert_eq!(&(&a - &b) + &b, a.clone());
        prop_assert_eq!(&a * &Poly::one(f), a);
    }

    #[test]
    fn division_identity(a in poly_strategy(13, 8), b in poly_strategy(13, 4)) {
        let f = PrimeField::new(13).unwrap();
        let (a, b) = (Poly::new(f, a), Poly::new(f, b));
        prop_assume!(!b.is_zero());
        let (q, r) = a.divmod(&b).unwrap();
        prop_assert_eq!(&(&q * &b) + &r, a);
        prop_assert!(r.degree() < b.degree());
    }

    #[test]
    fn crt_matches_bruteforce(seed in any::<u64>(), split in 0usize..4) {
        let f = PrimeField::new(5).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let profile: &[usize] = [&[1, 1, 1][..], &[1, 2], &[1, 1, 2], &[2, 2]][split];
        let moduli = generate_moduli(f, profile, &mut rng).unwrap();
        let residues: Vec<Poly> = moduli
            .iter()
            .map(|m| Poly::new(f, (0..m.degree()).map(|_| rng.gen_range(0..5)).collect::<Vec<_>>()))
            .collect();
        let fast = crt_combine(&residues, &moduli).unwrap();
        let slow = crt_bruteforce(&residues, &moduli, EnumerationBudget::default()).unwrap();
        prop_assert_eq!(fast, slow);
    }
}

/// A random valid configuration: levels, thresholds and a degree profile
/// that passes validation.
fn random_scheme(rng: &mut ChaCha20Rng, p: u64, max_n: usize, max_degree: usize) -> Scheme {
    let field = PrimeField::new(p).unwrap();
    loop {
        let m = rng.gen_range(1..=3);
        let mut sizes = Vec::new();
        let mut thresholds = Vec::new();
        let mut prev_t = 0;
        for _ in 0..m {
            let t = prev_t + rng.gen_range(1..=2);
            sizes.push(t + rng.gen_range(0..=1));
            thresholds.push(t);
            prev_t = t;
        }
        let n: usize = sizes.iter().sum();
        if n > max_n {
            continue;
        }
        let mut degrees: Vec<usize> = (0..=n).map(|_| rng.gen_range(1..=max_degree)).collect();
        degrees.sort();
        let d0 = degrees[0];
        let Ok(moduli) = generate_moduli(field, &degrees[1..], rng) else { continue };
        let params = PublicParams::new(field, d0, moduli, HashBackend::Crypto);
        let structure = AccessStructure::new(sizes, thresholds).unwrap();
        if validate_params(&structure, &params).is_valid() {
            return Scheme::new(structure, params).unwrap();
        }
    }
}

fn random_secret(rng: &mut ChaCha20Rng, s: &Scheme) -> Secret {
    let p = s.params().field.modulus();
    Secret::new((0..s.params().d0).map(|_| rng.gen_range(0..p)).collect())
}

fn pick(shares: &[Share], idx: &[usize]) -> Vec<Share> {
    idx.iter().map(|&i| shares[i - 1].clone()).collect()
}

#[test]
fn random_round_trips_with_shuffled_and_surplus_shares() {
    let mut rng = ChaCha20Rng::seed_from_u64(2024);
    for _ in 0..60 {
        let s = random_scheme(&mut rng, 101, 8, 3);
        let secret = random_secret(&mut rng, &s);
        let (shares, bulletin) = s.deal(&secret, &mut rng).unwrap();
        let n = s.structure().participants();
        for mask in 1u32..1 << n {
            let mut subset: Vec<usize> = (1..=n).filter(|i| mask >> (i - 1) & 1 == 1).collect();
            subset.shuffle(&mut rng);
            let got = s.reconstruct(&bulletin, &pick(&shares, &subset));
            if s.structure().is_authorized(&subset).unwrap() {
                assert_eq!(got.unwrap(), secret);
            } else {
                assert!(matches!(got, Err(SchemeError::Unauthorized(_))));
            }
        }
    }
}

#[test]
fn yang_attack_exhaustive_small_fields() {
    for p in [3u64, 5] {
        let field = PrimeField::new(p).unwrap();
        // n1 = 3 >= t2 = 3, cubic moduli leave room for seven of them at p = 3
        let moduli = generate_moduli(field, &[3; 7], &mut ChaCha20Rng::seed_from_u64(p)).unwrap();
        let structure = AccessStructure::new(vec![3, 4], vec![2, 3]).unwrap();
        let params = PublicParams::new(field, 1, moduli, HashBackend::Crypto);
        for s in 0..p {
            let secret = Secret::new(vec![s]);
            let mut rng = ChaCha20Rng::seed_from_u64(s);
            let (shares, public) =
                yang_deal(structure.clone(), params.clone(), &secret, &mut rng).unwrap();
            for coalition in [[4, 5], [4, 7], [6, 7]] {
                assert!(!structure.is_authorized(&coalition).unwrap());
                let t = public.attack(&pick(&shares, &coalition)).unwrap();
                assert!(!t.coalition_authorized);
                assert_eq!(t.secret, secret);
                assert!(t.delta.degree() < 9);
            }
        }
    }
}

#[test]
fn yang_round_trips() {
    let mut rng = ChaCha20Rng::seed_from_u64(5);
    let field = PrimeField::new(101).unwrap();
    let moduli = generate_moduli(field, &[1; 7], &mut rng).unwrap();
    let structure = AccessStructure::new(vec![3, 4], vec![2, 3]).unwrap();
    let params = PublicParams::new(field, 1, moduli, HashBackend::Crypto);
    for _ in 0..50 {
        let secret = Secret::new(vec![rng.gen_range(0..101)]);
        let (shares, public) = yang_deal(structure.clone(), params.clone(), &secret, &mut rng).unwrap();
        for subset in [&[1, 2][..], &[2, 3], &[1, 4, 5], &[5, 6, 7], &[3, 6, 7]] {
            assert_eq!(public.reconstruct(&pick(&shares, subset)).unwrap(), secret);
        }
    }
}

fn table_scheme(p: u64, sizes: &[usize], t: &[usize], degrees: &[usize], seed: u64) -> Scheme {
    let field = PrimeField::new(p).unwrap();
    let moduli = generate_moduli(field, degrees, &mut ChaCha20Rng::seed_from_u64(seed)).unwrap();
    let params = PublicParams::new(field, degrees[0], moduli, HashBackend::Table { seed });
    Scheme::new(AccessStructure::new(sizes.to_vec(), t.to_vec()).unwrap(), params).unwrap()
}

#[test]
fn state_enumeration_agrees_with_preimage_counts() {
    let budget = EnumerationBudget::default();
    let cases: [(u64, &[usize], &[usize], &[usize], &[usize]); 4] = [
        (3, &[2, 2], &[1, 2], &[1, 2, 2, 2], &[3]),
        (3, &[2, 2], &[1, 2], &[1, 2, 2, 2], &[]),
        (5, &[2, 2], &[1, 2], &[1, 1, 1, 1], &[4]),
        (3, &[1, 2], &[1, 2], &[1, 2, 2], &[3]),
    ];
    for (seed, (p, sizes, t, degrees, coalition)) in cases.into_iter().enumerate() {
        let s = table_scheme(p, sizes, t, degrees, seed as u64);
        let secret = Secret::new(vec![1]);
        let (shares, bulletin) = s.deal(&secret, &mut ChaCha20Rng::seed_from_u64(9)).unwrap();
        let view = CoalitionView::new(
            s.clone(),
            pick(&shares, coalition),
            bulletin.clone(),
            ViewMode::OwnEntries,
        )
        .unwrap();
        let hist = enumerate_consistent(&view, budget).unwrap();
        let counts = preimage_counts(&view, budget).unwrap();
        let theta = view.theta().unwrap() as u32;
        for (k, (&h, &c)) in hist.counts().iter().zip(&counts).enumerate() {
            assert_eq!(c, (p as u128).pow(theta));
            assert_eq!(h, c * view.free_share_factor(), "secret {k}");
            assert_eq!(count_preimage(&view, &hist.secret(k), budget).unwrap(), c);
        }
        assert_eq!(count_f(&view, budget).unwrap(), (p as u128).pow(theta + 1));
        assert!(hist.count(&secret).unwrap() > 0);

        let full = CoalitionView::new(s, pick(&shares, coalition), bulletin, ViewMode::FullBulletin)
            .unwrap();
        let full_hist = enumerate_consistent(&full, budget).unwrap();
        assert!(full_hist.count(&secret).unwrap() > 0);
        assert!(full_hist.total() <= hist.total());
    }
}
