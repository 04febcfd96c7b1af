use proptest::prelude::*;

use super::*;

fn fp(p: usize, q: usize) -> FreeProduct {
    FreeProduct::new(FiniteGroupTable::cyclic(p).unwrap(), FiniteGroupTable::cyclic(q).unwrap()).unwrap()
}

fn w(fp: &FreeProduct, text: &str) -> Word {
    Word::parse(fp.sig(), text).unwrap()
}

#[test]
fn generator_images() {
    let f = fp(2, 3);
    let tau = f.generator(&Gen::Tau);
    assert_eq!(tau.apply(&w(&f, "s1")), w(&f, "s1^-1"));
    assert_eq!(tau.apply(&w(&f, "A2:1")), w(&f, "A2:1"));
    let tt = f.generator(&Gen::ThetaTilde);
    assert_eq!(tt.apply(&w(&f, "A2:1")), w(&f, "s1 A2:1 s1^-1"));
    assert_eq!(tt.apply(&w(&f, "s1")), w(&f, "s1^-1"));
    assert_eq!(tt.apply(&w(&f, "A1:1")), w(&f, "A1:1"));
    let id = f.identity();
    let x = w(&f, "A1:1 s1 A2:2 s1^-1");
    assert_eq!(id.apply(&x), x);
    for g in [
        Gen::Alpha { i: 0, gamma: 1 },
        Gen::AlphaT { i: 1 },
        Gen::Rho { i: 1, gamma: 2 },
        Gen::Lambda { i: 0, gamma: 1 },
        Gen::Phi { i: 1, aut: vec![0, 2, 1] },
        Gen::ThetaTilde,
    ] {
        assert!(f.generator(&g).is_consistent(), "{g}");
    }
}

#[test]
fn inner_detection() {
    let f = fp(2, 3);
    let s = f.sig();
    let g = w(&f, "s1 A1:1");
    let gi = g.inverse(s);
    let mut conj = f.identity();
    conj.fwd.t = g.mul(s, &t_word()).mul(s, &gi);
    for e in 1..3 {
        conj.fwd.factors[1][e] = g.mul(s, &elem(1, e)).mul(s, &gi);
    }
    conj.fwd.factors[0][1] = g.mul(s, &elem(0, 1)).mul(s, &gi);
    conj.inv = Images::identity(s);
    conj.inv.t = gi.mul(s, &t_word()).mul(s, &g);
    for e in 1..3 {
        conj.inv.factors[1][e] = gi.mul(s, &elem(1, e)).mul(s, &g);
    }
    conj.inv.factors[0][1] = gi.mul(s, &elem(0, 1)).mul(s, &g);
    assert!(conj.is_consistent());
    assert_eq!(conj.inner_conjugator(), Some(g));
    assert!(conj.equal_in_out(&f.identity()).unwrap());
    assert!(!conj.equal_in_aut(&f.identity()));
    assert!(!f.generator(&Gen::Tau).is_inner());
    assert!(!f.generator(&Gen::Rho { i: 0, gamma: 1 }).is_inner());
}

#[test]
fn relation_zero() {
    for f in [fp(2, 2), fp(2, 3), fp(3, 3)] {
        for r in catalog(&f).iter().filter(|r| r.item == "0") {
            r.check(&f).unwrap();
        }
    }
}

/// Reduced words of length at most `len`, by brute force.
fn all_words(f: &FreeProduct, len: usize) -> Vec<Word> {
    let s = f.sig();
    let mut letters = vec![Letter::free(0), Letter::free_inv(0)];
    for i in 0..2 {
        letters.extend((1..s.factor(i).order()).map(|e| Letter::factor(i, e)));
    }
    let mut out = vec![Word::identity()];
    let mut layer = vec![Word::identity()];
    for _ in 0..len {
        let mut next = Vec::new();
        for x in &layer {
            for l in &letters {
                let y = x.mul(s, &Word::letter(*l));
                if y.len() == x.len() + 1 {
                    next.push(y);
                }
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

fn brute_inner(f: &FreeProduct, a: &FPAutomorphism, pool: &[Word]) -> bool {
    let s = f.sig();
    pool.iter().any(|g| {
        let gi = g.inverse(s);
        a.generators().iter().all(|x| a.apply(x) == g.mul(s, x).mul(s, &gi))
    })
}

fn gens(f: &FreeProduct) -> Vec<Gen> {
    let mut out = vec![Gen::Tau, Gen::ThetaTilde, Gen::AlphaT { i: 0 }, Gen::AlphaT { i: 1 }];
    for i in 0..2 {
        for c in 1..f.table(i).order() {
            out.push(Gen::Alpha { i, gamma: c });
            out.push(Gen::Rho { i, gamma: c });
            out.push(Gen::Lambda { i, gamma: c });
        }
        for a in f.table(i).automorphisms() {
            out.push(Gen::Phi { i, aut: a });
        }
    }
    out
}

#[test]
fn inner_matches_brute_force_on_short_composites() {
    let f = fp(2, 3);
    let pool = all_words(&f, 5);
    let gs = gens(&f);
    let mut inner = 0;
    for a in &gs {
        for b in &gs {
            for c in &gs {
                let word = [(a.clone(), false), (b.clone(), true), (c.clone(), false)];
                let x = f.eval(&word);
                // Every conjugator for these composites is short.
                let fast = x.is_inner();
                assert_eq!(fast, brute_inner(&f, &x, &pool), "{}", show(&word));
                inner += fast as usize;
            }
        }
    }
    assert!(inner > 0);
}

fn arb_word(max: usize) -> impl Strategy<Value = Vec<(usize, bool)>> {
    prop::collection::vec((0usize..64, any::<bool>()), 0..max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn apply_is_a_homomorphism(gw in arb_word(5), xs in prop::collection::vec(0usize..5, 0..8), ys in prop::collection::vec(0usize..5, 0..8)) {
        let f = fp(2, 3);
        let gs = gens(&f);
        let word: Vec<(Gen, bool)> = gw.iter().map(|&(k, inv)| (gs[k % gs.len()].clone(), inv)).collect();
        let a = f.eval(&word);
        prop_assert!(a.is_consistent());
        let s = f.sig();
        let letters = [Letter::free(0), Letter::free_inv(0), Letter::factor(0, 1), Letter::factor(1, 1), Letter::factor(1, 2)];
        let x = Word::from_letters(s, &xs.iter().map(|&i| letters[i]).collect::<Vec<_>>());
        let y = Word::from_letters(s, &ys.iter().map(|&i| letters[i]).collect::<Vec<_>>());
        prop_assert_eq!(a.apply(&x.mul(s, &y)), a.apply(&x).mul(s, &a.apply(&y)));
        prop_assert_eq!(a.inverse().apply(&a.apply(&x)), x);
    }

    #[test]
    fn equal_in_out_is_an_equivalence(p in arb_word(4), q in arb_word(4)) {
        let f = fp(3, 2);
        let gs = gens(&f);
        let to = |v: &Vec<(usize, bool)>| -> Vec<(Gen, bool)> { v.iter().map(|&(k, inv)| (gs[k % gs.len()].clone(), inv)).collect() };
        let a = f.eval(&to(&p));
        let b = f.eval(&to(&q));
        // c differs from a by an inner automorphism built from item 0.
        let zero = catalog(&f).into_iter().find(|r| r.item == "0" && !r.lhs.is_empty()).unwrap();
        let c = f.eval(&zero.lhs).compose(&a).unwrap();
        prop_assert!(a.equal_in_out(&a).unwrap());
        prop_assert!(a.equal_in_out(&c).unwrap() && c.equal_in_out(&a).unwrap());
        prop_assert_eq!(a.equal_in_out(&b).unwrap(), b.equal_in_out(&a).unwrap());
        prop_assert_eq!(b.equal_in_out(&a).unwrap(), b.equal_in_out(&c).unwrap());
    }
}

#[test]
fn catalog_holds_for_cyclic_pairs() {
    for (p, q) in [(2, 2), (2, 3), (3, 3), (4, 2)] {
        let (a, b) = (FiniteGroupTable::cyclic(p).unwrap(), FiniteGroupTable::cyclic(q).unwrap());
        let r = verify_catalog(&a, &b).unwrap();
        assert!(r.all_pass());
        let keys: Vec<&str> = r.items.iter().map(|i| i.item.as_str()).collect();
        assert_eq!(keys, ["0", "1", "2", "3", "4", "5", "12", "13", "14", "15", "16", "19", "20", "21", "22", "23"]);
        assert!(r.negative_control.instances > 0);
    }
}

#[test]
fn conjugation_convention_matters_when_nonabelian() {
    let s3 = FiniteGroupTable::dihedral(3).unwrap();
    let r = catalog_report(&s3, &FiniteGroupTable::cyclic(2).unwrap()).unwrap();
    let failing: Vec<&str> = r.failures().map(|f| f.item.as_str()).collect();
    assert_eq!(failing, ["22"]);
    let bad = r.items.iter().find(|i| i.item == "22").unwrap();
    // Exactly the two rotations, the only non-central elements with γ² ≠ 1.
    assert_eq!(bad.instances - bad.passed, 2);
    assert!(r.checks.iter().all(ItemResult::ok));
    match verify_catalog(&s3, &FiniteGroupTable::cyclic(2).unwrap()) {
        Err(PresentationError::RelationFailed { item, trace, .. }) => {
            assert_eq!(item, "22");
            assert!(trace.contains("lhs∘rhs^-1"));
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn corrupted_relation_is_reported() {
    let f = fp(2, 3);
    let bad = corrupted_catalog(&f);
    assert!(!bad.is_empty());
    for r in &bad {
        let err = r.check(&f).unwrap_err();
        assert!(matches!(err, PresentationError::RelationFailed { .. }));
    }
}
