use std::sync::OnceLock;

use brandt_core::arith::is_prime;
use brandt_core::brandt::permutation_equivalent;
use brandt_core::classes::reduce_form;
use brandt_core::isometry::is_isometric;
use brandt_core::{
    char_poly, class_set, ramanujan_verdict, BrandtContext, BrandtMatrix, ClassOptions, ClassSet, HermitianForm,
    MaximalOrder, OMatrix, Rational,
};
use num_bigint::BigInt;
use proptest::prelude::*;

fn rank_two(p: i64) -> &'static ClassSet {
    static SETS: OnceLock<Vec<(i64, ClassSet)>> = OnceLock::new();
    let sets = SETS.get_or_init(|| {
        [7, 11, 13].into_iter().map(|p| (p, class_set(2, p, &ClassOptions::default()).unwrap())).collect()
    });
    &sets.iter().find(|(q, _)| *q == p).expect("fixture prime").1
}

fn genus_one(p: i64) -> BrandtContext {
    BrandtContext::new(class_set(1, p, &ClassOptions::default()).unwrap()).unwrap()
}

/// Class number of a maximal order in the quaternion algebra ramified at p,
/// from the classical closed form (p - 1)/12 plus the elliptic corrections.
fn eichler_class_number(p: i64) -> usize {
    if p == 2 || p == 3 {
        return 1;
    }
    let base = (p - 1) / 12;
    let extra = match p % 12 {
        1 => 0,
        5 | 7 => 1,
        11 => 2,
        _ => unreachable!(),
    };
    (base + extra) as usize
}

fn permute(a: &[Vec<i64>], s: &[usize]) -> Vec<Vec<i64>> {
    (0..a.len()).map(|i| (0..a.len()).map(|j| a[s[i]][s[j]]).collect()).collect()
}

fn elementary(order: &MaximalOrder, x: [i64; 4], unit: usize, swap: bool) -> OMatrix {
    let mut m = OMatrix::identity(2, order);
    m.entries[1] = x;
    let units = order.units();
    m.entries[0] = units[unit % units.len()];
    if swap {
        m.entries.swap(0, 1);
        m.entries.swap(2, 3);
    }
    m
}

fn prime() -> impl Strategy<Value = i64> {
    (2i64..160).prop_filter("prime", |&p| is_prime(p as u64))
}

fn permutation(n: usize) -> impl Strategy<Value = Vec<usize>> {
    Just((0..n).collect::<Vec<_>>()).prop_shuffle()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn genus_one_class_number_and_mass(p in prime()) {
        let set = class_set(1, p, &ClassOptions::default()).unwrap();
        prop_assert_eq!(set.h(), eichler_class_number(p));
        prop_assert_eq!(set.weight_sum(), Rational::new(p as i128 - 1, 24));
        prop_assert!(set.mass_certified());
    }

    #[test]
    fn genus_one_hecke_algebra(p in prime(), m in 1i64..6, n in 1i64..6) {
        prop_assume!(m % p != 0 && n % p != 0);
        let ctx = genus_one(p);
        let bm = ctx.brandt(m).unwrap();
        let bn = ctx.brandt(n).unwrap();
        let mn = brandt_core::brandt::mat_mul(&bm.entries, &bn.entries);
        prop_assert_eq!(&mn, &brandt_core::brandt::mat_mul(&bn.entries, &bm.entries));
        if num_integer::gcd(m, n) == 1 {
            prop_assert_eq!(mn, ctx.brandt(m * n).unwrap().entries);
        }
        prop_assert!(bm.weighted_symmetry_violation().is_none());
    }

    #[test]
    fn reduction_stays_in_class(
        p in prop::sample::select(vec![7i64, 11, 13]),
        class in 0usize..5,
        steps in prop::collection::vec((prop::array::uniform4(-2i64..=2), 0usize..24, any::<bool>()), 1..4),
    ) {
        let set = rank_two(p);
        let forms = set.forms().unwrap();
        let h = &forms[class % forms.len()];
        let mut m = OMatrix::identity(2, &set.order);
        for (x, unit, swap) in steps {
            m = m.mul(&elementary(&set.order, x, unit, swap), &set.order);
        }
        let moved = h.transform(&m, &set.order);
        prop_assert_eq!(moved.haupt_norm(&set.order).unwrap(), 1);
        let reduced = reduce_form(&moved, &set.order);
        prop_assert!(is_isometric(&set.order, &reduced, h));
        let trace = |f: &HermitianForm| (0..2).map(|a| f.diag(a, &set.order)).sum::<i64>();
        prop_assert!(trace(&reduced) <= trace(&moved));
    }

    #[test]
    fn charpoly_is_a_similarity_invariant(
        entries in prop::collection::vec(-20i64..20, 25),
        s in permutation(5),
    ) {
        let a: Vec<Vec<i64>> = entries.chunks(5).map(|r| r.to_vec()).collect();
        let c = char_poly(&a);
        prop_assert_eq!(&c, &char_poly(&permute(&a, &s)));
        prop_assert_eq!(c.len(), 6);
        prop_assert_eq!(&c[0], &BigInt::from(1));
        let trace: i64 = (0..5).map(|i| a[i][i]).sum();
        prop_assert_eq!(&c[1], &BigInt::from(-trace));
        // constant term is (-1)^5 det
        let mut q: Vec<Vec<Rational>> =
            a.iter().map(|r| r.iter().map(|&x| Rational::from_integer(x as i128)).collect()).collect();
        let mut det = Rational::from_integer(1);
        for k in 0..5 {
            let Some(piv) = (k..5).find(|&r| q[r][k] != Rational::from_integer(0)) else {
                det = Rational::from_integer(0);
                break;
            };
            if piv != k {
                q.swap(piv, k);
                det = -det;
            }
            det *= q[k][k];
            for r in k + 1..5 {
                let f = q[r][k] / q[k][k];
                let pivot_row = q[k].clone();
                for (dst, src) in q[r].iter_mut().zip(&pivot_row).skip(k) {
                    *dst -= f * src;
                }
            }
        }
        prop_assert_eq!(&c[5], &BigInt::from(-*det.numer()));
    }

    #[test]
    fn permutation_search_recovers_relabelling(
        entries in prop::collection::vec(0i64..4, 16),
        s in permutation(4),
    ) {
        let a: Vec<Vec<i64>> = entries.chunks(4).map(|r| r.to_vec()).collect();
        let b = permute(&a, &s);
        let found = permutation_equivalent(&a, &b).expect("a relabelling exists");
        prop_assert_eq!(permute(&a, &found), b);
    }

    #[test]
    fn brandt_json_round_trips(
        h in 1usize..5,
        entries in prop::collection::vec(0i64..1000, 16),
        weights in prop::collection::vec(1u64..100, 4),
        n in 1i64..50,
    ) {
        let m = BrandtMatrix {
            g: 2,
            p: 7,
            n,
            h,
            entries: (0..h).map(|i| entries[i * 4..i * 4 + h].to_vec()).collect(),
            weights: weights[..h].to_vec(),
        };
        prop_assert_eq!(BrandtMatrix::from_json(&m.to_json()).unwrap(), m);
    }

    #[test]
    fn genus_one_graphs_are_ramanujan(p in prime(), l in prop::sample::select(vec![2i64, 3, 5])) {
        prop_assume!(p != l);
        let b = genus_one(p).brandt(l).unwrap();
        let r = ramanujan_verdict(&b).unwrap();
        // supersingular isogeny graphs are always Ramanujan
        prop_assert!(r.ramanujan);
        prop_assert_eq!(r.k, l + 1);
        prop_assert_eq!(r.trivial_multiplicity, 1);
    }
}

#[test]
fn class_set_json_round_trips() {
    for p in [7, 11, 13] {
        let set = rank_two(p);
        let back = ClassSet::from_json(&set.to_json()).unwrap();
        assert_eq!(&back, set);
        assert_eq!(back.to_json(), set.to_json());
    }
    let set = class_set(1, 23, &ClassOptions::default()).unwrap();
    assert_eq!(ClassSet::from_json(&set.to_json()).unwrap(), set);
}

#[test]
fn tampered_class_set_json_is_rejected() {
    let json = rank_two(11).to_json();
    let mut v: serde_json::Value = serde_json::from_str(&json).unwrap();
    v["aut_counts"][0] = serde_json::json!(31);
    assert!(ClassSet::from_json(&v.to_string()).is_err());
    let mut v: serde_json::Value = serde_json::from_str(&json).unwrap();
    v["format_version"] = serde_json::json!(99);
    assert!(ClassSet::from_json(&v.to_string()).is_err());
}

#[test]
fn outputs_do_not_depend_on_thread_count() {
    let run = |threads| {
        rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(|| {
            let set = class_set(2, 13, &ClassOptions::default()).unwrap();
            let ctx = BrandtContext::new(set.clone()).unwrap();
            (set.to_json(), ctx.brandt(3).unwrap().to_json(), brandt_core::little_graph(&ctx, 2).unwrap().to_json())
        })
    };
    assert_eq!(run(1), run(4));
}
