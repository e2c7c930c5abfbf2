use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;

use cordcat::dsl;
use cordcat::gen::Gen;
use cordcat::int_cat::{int_compose, int_identity, int_tensor, Strategy};
use cordcat::proc_cat::{compose, identity, tensor};
use cordcat::protocols::{self, resolve, resolve_in_order};
use cordcat::terms::{term_equal, Subst, Var};

fn config() -> ProptestConfig {
    ProptestConfig { cases: 64, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn substitutions_compose(seed in any::<u64>()) {
        let mut g = Gen::new(seed);
        let scope: Vec<Var> = ["a", "b", "c"].iter().map(|n| Var::data(*n)).collect();
        let t = g.term(&scope, 3);
        let sigma = Subst::from_pairs([(scope[0].clone(), g.term(&scope, 2)), (scope[1].clone(), g.term(&scope, 2))]).unwrap();
        let tau = Subst::from_pairs([(scope[1].clone(), g.term(&scope, 2)), (scope[2].clone(), g.term(&scope, 2))]).unwrap();
        prop_assert_eq!(tau.apply(&sigma.apply(&t)), sigma.then(&tau).apply(&t));
    }

    #[test]
    fn alpha_canonical_is_idempotent(seed in any::<u64>()) {
        let p = Gen::new(seed).any_process();
        let c = p.alpha_canonical();
        prop_assert_eq!(c.alpha_canonical(), c.clone());
        prop_assert!(p.alpha_eq(&c));
    }

    #[test]
    fn category_laws(seed in any::<u64>()) {
        let mut g = Gen::new(seed);
        let (a, b, c, d) = (g.arity(2), g.arity(2), g.arity(2), g.arity(2));
        let p = g.process(&a, &b);
        let q = g.process(&b, &c);
        let r = g.process(&c, &d);
        let left = compose(&compose(&p, &q).unwrap(), &r).unwrap();
        let right = compose(&p, &compose(&q, &r).unwrap()).unwrap();
        prop_assert!(left.alpha_eq(&right));
        prop_assert!(compose(&identity(&a), &p).unwrap().alpha_eq(&p));
        prop_assert!(compose(&p, &identity(&b)).unwrap().alpha_eq(&p));
    }

    #[test]
    fn interchange(seed in any::<u64>()) {
        let mut g = Gen::new(seed);
        let (a, b, c) = (g.arity(1), g.arity(1), g.arity(1));
        let (x, y, z) = (g.arity(1), g.arity(1), g.arity(1));
        let p = g.process(&a, &b);
        let r = g.process(&b, &c);
        let q = g.process(&x, &y);
        let s = g.process(&y, &z);
        let left = compose(&tensor(&p, &q), &tensor(&r, &s)).unwrap();
        let right = tensor(&compose(&p, &r).unwrap(), &compose(&q, &s).unwrap());
        prop_assert!(left.alpha_eq(&right));
    }

    #[test]
    fn int_category_laws(seed in any::<u64>()) {
        let mut g = Gen::new(seed);
        let (a, b, c, d) = (g.int_object(1), g.int_object(1), g.int_object(1), g.int_object(1));
        let p = g.interaction(&a, &b);
        let q = g.interaction(&b, &c);
        let r = g.interaction(&c, &d);
        let s = Strategy::default();
        let left = int_compose(&int_compose(&p, &q, s).unwrap(), &r, s).unwrap();
        let right = int_compose(&p, &int_compose(&q, &r, s).unwrap(), s).unwrap();
        prop_assert!(left.alpha_eq(&right));
        prop_assert!(int_compose(&int_identity(&a), &p, s).unwrap().alpha_eq(&p));
        prop_assert!(int_compose(&p, &int_identity(&b), s).unwrap().alpha_eq(&p));
        let t = int_tensor(&p, &q);
        prop_assert_eq!(t.dom, a.tensor(&b));
    }

    #[test]
    fn printed_processes_reparse(seed in any::<u64>()) {
        let p = Gen::new(seed).any_process();
        let text = format!("process P =\n{};\n", dsl::print_process(&p, true));
        let back = dsl::parse(&text).unwrap().process("P").unwrap();
        prop_assert!(back.alpha_eq(&p));
        let again = format!("process P =\n{};\n", dsl::print_process(&back, true));
        prop_assert_eq!(again, text);
    }

    #[test]
    fn resolution_is_order_independent(seed in any::<u64>()) {
        let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
        for proto in [protocols::nspk(), protocols::attack_protocol()] {
            let run = &proto.desired_runs[0];
            let reference = resolve(&proto.process, run, &proto.bindings).unwrap();
            let ext = proto.process.space().with_run(run);
            let mut placed: Vec<String> = Vec::new();
            let mut left: BTreeSet<String> = ext.labels();
            while !left.is_empty() {
                let ready: Vec<&String> = left
                    .iter()
                    .filter(|l| ext.generators().iter().all(|(a, b)| b != *l || a == *l || placed.contains(a)))
                    .collect();
                let pick = (*ready.choose(&mut rng).unwrap()).clone();
                left.remove(&pick);
                placed.push(pick);
            }
            let other = resolve_in_order(&proto.process, run, &proto.bindings, &placed).unwrap();
            for (x, y) in reference.outputs.iter().zip(&other.outputs) {
                prop_assert!(term_equal(x, y));
            }
        }
    }
}
