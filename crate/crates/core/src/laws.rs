//! Trace axioms of the process category, checked on random instances up to
//! α-equivalence. Traces always act on the last wires.

use std::fmt;

use crate::gen::Gen;
use crate::proc_cat::{compose, identity, swap, tensor, trace, Arity, CordProcess, ProcError};

#[derive(Clone, Debug)]
pub struct LawResult {
    pub name: &'static str,
    pub instances: usize,
    pub failures: usize,
    pub counterexample: Option<String>,
}

impl fmt::Display for LawResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.counterexample {
            None => write!(f, "{}: PASS ({} instances)", self.name, self.instances),
            Some(c) => write!(f, "{}: FAIL ({} of {} instances) {}", self.name, self.failures, self.instances, c),
        }
    }
}

pub const LAWS: [&str; 7] =
    ["tightening", "sliding", "vanishing-0", "vanishing-2", "superposing", "yanking", "normality"];

type Sides = (CordProcess, CordProcess);

fn sides(g: &mut Gen, law: &str) -> Result<Sides, ProcError> {
    let a = g.arity(2);
    let b = g.arity(2);
    let u = Arity::data(g.rng_range(1, 2));
    match law {
        "tightening" => {
            let a0 = g.arity(2);
            let b0 = g.arity(2);
            let pre = g.process(&a0, &a);
            let f = g.process(&a.concat(&u), &b.concat(&u));
            let post = g.process(&b, &b0);
            let id = identity(&u);
            let lhs = trace(&compose(&compose(&tensor(&pre, &id), &f)?, &tensor(&post, &id))?, u.len())?;
            let rhs = compose(&compose(&pre, &trace(&f, u.len())?)?, &post)?;
            Ok((lhs, rhs))
        }
        "sliding" => {
            let v = Arity::data(g.rng_range(1, 2));
            let f = g.process(&a.concat(&u), &b.concat(&v));
            let k = g.process(&v, &u);
            let lhs = trace(&compose(&f, &tensor(&identity(&b), &k))?, u.len())?;
            let rhs = trace(&compose(&tensor(&identity(&a), &k), &f)?, v.len())?;
            Ok((lhs, rhs))
        }
        "vanishing-0" => {
            let f = g.process(&a, &b);
            Ok((trace(&f, 0)?, f))
        }
        "vanishing-2" => {
            let v = Arity::data(g.rng_range(1, 2));
            let uv = u.concat(&v);
            let f = g.process(&a.concat(&uv), &b.concat(&uv));
            let lhs = trace(&f, uv.len())?;
            let rhs = trace(&trace(&f, v.len())?, u.len())?;
            Ok((lhs, rhs))
        }
        "superposing" => {
            let c = g.arity(1);
            let d = g.arity(1);
            let side = g.process(&c, &d);
            let f = g.process(&a.concat(&u), &b.concat(&u));
            let lhs = tensor(&side, &trace(&f, u.len())?);
            let rhs = trace(&tensor(&side, &f), u.len())?;
            Ok((lhs, rhs))
        }
        "yanking" => {
            let w = Arity(vec![g.sort(); g.rng_range(1, 2)]);
            Ok((trace(&swap(&w, &w), w.len())?, identity(&w)))
        }
        "normality" => {
            let f = g.process(&a, &b);
            Ok((trace(&tensor(&f, &identity(&u)), u.len())?, f))
        }
        other => panic!("unknown law {other}"),
    }
}

impl Gen {
    fn rng_range(&mut self, lo: usize, hi: usize) -> usize {
        use rand::Rng;
        self.rng().gen_range(lo..=hi)
    }
}

/// Checks `law` on `n` random instances.
pub fn check_law(g: &mut Gen, law: &'static str, n: usize) -> LawResult {
    let mut res = LawResult { name: law, instances: n, failures: 0, counterexample: None };
    for _ in 0..n {
        let verdict = match sides(g, law) {
            Ok((l, r)) if l.alpha_eq(&r) => continue,
            Ok((l, r)) => {
                format!("lhs {} vs rhs {}", crate::dsl::print_process(&l, true), crate::dsl::print_process(&r, true))
            }
            Err(e) => format!("error {e}"),
        };
        res.failures += 1;
        res.counterexample.get_or_insert(verdict);
    }
    res
}

pub fn check_all(seed: u64, n: usize) -> Vec<LawResult> {
    let mut g = Gen::new(seed);
    LAWS.iter().map(|l| check_law(&mut g, l, n)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn laws_hold_on_small_samples() {
        for r in check_all(11, 60) {
            assert!(r.counterexample.is_none(), "{r}");
        }
    }
}
