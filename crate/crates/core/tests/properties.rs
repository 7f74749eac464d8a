use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use pcf_forcing::dense::{meet, member};
use pcf_forcing::gen;
use pcf_forcing::kernel::amalgamate;
use pcf_forcing::ordinal::{self, Ordinal};

fn any_ordinal() -> impl Strategy<Value = Ordinal> {
    proptest::collection::btree_map(0u32..8, 1u64..50, 0..5)
        .prop_map(|m| Ordinal::from_terms(m.into_iter().rev()).expect("distinct exponents"))
}

proptest! {
    #[test]
    fn display_parse_round_trip(x in any_ordinal()) {
        let s = x.to_string();
        prop_assert_eq!(ordinal::parse(&s).unwrap(), x);
    }

    #[test]
    fn order_is_total_and_consistent(a in any_ordinal(), b in any_ordinal()) {
        let ab = ordinal::compare(&a, &b);
        prop_assert_eq!(ab, ordinal::compare(&b, &a).reverse());
        prop_assert_eq!(ab.is_eq(), a == b);
        prop_assert_eq!(ab, a.cmp(&b));
    }

    #[test]
    fn addition_is_monotone_in_the_right_argument(a in any_ordinal(), b in any_ordinal(), c in any_ordinal()) {
        prop_assert!(a.add(&b) >= a);
        if b < c {
            prop_assert!(a.add(&b) < a.add(&c));
        }
        prop_assert_eq!(a.add(&Ordinal::from(1)), a.successor());
        prop_assert_eq!(a.add(&b).add(&c), a.add(&b.add(&c)));
    }

    #[test]
    fn fund_seq_increases_below_the_limit(x in any_ordinal(), n in 0u64..40) {
        prop_assume!(x.is_limit());
        let lo = x.fund_seq(n).unwrap();
        let hi = x.fund_seq(n + 1).unwrap();
        prop_assert!(lo < hi && hi < x);
    }

    #[test]
    fn amalgamation_laws(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (p, q, eta) = gen::amalgamation_instance(&mut rng, 6);
        let r = amalgamate(&p, &q, &eta).unwrap();
        prop_assert!(r.is_valid());
        prop_assert!(r.is_stronger_than(&p) && r.is_stronger_than(&q));
        prop_assert_eq!(r.restrict(&eta), q);
    }

    #[test]
    fn meets_land_in_the_dense_set(seed in any::<u64>(), k in 0usize..3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let spec = gen::dense_spec(&mut rng, ["add", "raise_u", "separate"][k]);
        let p = gen::random_condition(&mut rng, 6);
        let m = meet(&spec, &p).unwrap();
        prop_assert!(m.result.is_valid() && m.result.is_stronger_than(&p));
        prop_assert!(member(&spec, &m.result));
    }
}
