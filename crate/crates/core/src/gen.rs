//! Seeded random generators for terms, processes, equation systems,
//! interactions and runs. Labels are unique across everything one `Gen`
//! produces, so composites never need relabelling.

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

use crate::cords::{Action, CordSpace, Event, Run, RunVerdict};
use crate::int_cat::{IntObject, Interaction};
use crate::proc_cat::{Arity, CordProcess};
use crate::terms::{Equation, GuardedSystem, Sort, Term, Var};

/// Size limits for generated processes.
#[derive(Clone, Copy, Debug)]
pub struct Limits {
    pub wires: usize,
    pub depth: usize,
    pub events: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits { wires: 4, depth: 3, events: 5 }
    }
}

pub struct Gen {
    rng: StdRng,
    labels: usize,
    names: usize,
    pub limits: Limits,
}

impl Gen {
    pub fn new(seed: u64) -> Self {
        Gen { rng: StdRng::seed_from_u64(seed), labels: 0, names: 0, limits: Limits::default() }
    }

    pub fn rng(&mut self) -> &mut StdRng {
        &mut self.rng
    }

    fn label(&mut self) -> String {
        self.labels += 1;
        format!("e{}", self.labels)
    }

    fn fresh(&mut self, sort: Sort) -> Var {
        self.names += 1;
        Var { name: format!("v{}", self.names), sort }
    }

    pub fn agent_term(&mut self, scope: &[Var]) -> Term {
        let agents: Vec<&Var> = scope.iter().filter(|v| v.sort == Sort::Agent).collect();
        if !agents.is_empty() && self.rng.gen_bool(0.7) {
            Term::var(agents.choose(&mut self.rng).unwrap())
        } else {
            Term::agent(["A", "B"].choose(&mut self.rng).unwrap())
        }
    }

    /// A data term of depth at most `depth` over `scope`.
    pub fn term(&mut self, scope: &[Var], depth: usize) -> Term {
        if depth <= 1 || self.rng.gen_bool(0.3) {
            let data: Vec<&Var> = scope.iter().filter(|v| v.sort == Sort::Data).collect();
            return match self.rng.gen_range(0..10) {
                0..=6 if !data.is_empty() => Term::var(data.choose(&mut self.rng).unwrap()),
                7 if depth > 1 => {
                    let a = self.agent_term(scope);
                    Term::app("f", vec![a])
                }
                _ => Term::constant(["c", "d"].choose(&mut self.rng).unwrap()),
            };
        }
        let d = depth - 1;
        match self.rng.gen_range(0..6) {
            0 => Term::app("f", vec![self.term(scope, d)]),
            1 => Term::app("g", vec![self.term(scope, d), self.term(scope, d)]),
            2 => Term::pair(self.term(scope, d), self.term(scope, d)),
            3 | 4 if depth >= 3 => {
                let a = self.agent_term(scope);
                Term::enc(Term::pk(a), self.term(scope, d))
            }
            _ if depth >= 3 => {
                let a = self.agent_term(scope);
                Term::dec(Term::sk(a), self.term(scope, d))
            }
            _ => Term::app("f", vec![self.term(scope, d)]),
        }
    }

    /// A μ-free term biased towards decryption redexes, some nested and overlapping.
    pub fn decr_term(&mut self, depth: usize) -> Term {
        let agents = ["A", "B"];
        if depth <= 1 {
            return match self.rng.gen_range(0..3) {
                0 => Term::constant("c"),
                1 => Term::data_var(["x", "y"].choose(&mut self.rng).unwrap()),
                _ => Term::agent(agents.choose(&mut self.rng).unwrap()),
            };
        }
        let d = depth - 1;
        let w = Term::agent(agents.choose(&mut self.rng).unwrap());
        match self.rng.gen_range(0..8) {
            0 | 1 if depth >= 3 => Term::dec(Term::sk(w.clone()), Term::enc(Term::pk(w), self.decr_term(depth - 2))),
            2 => Term::dec(Term::sk(w), self.decr_term(d)),
            3 => Term::enc(Term::pk(w), self.decr_term(d)),
            4 => Term::pair(self.decr_term(d), self.decr_term(d)),
            5 => Term::app("f", vec![self.decr_term(d)]),
            _ => self.decr_term(d),
        }
    }

    pub fn sort(&mut self) -> Sort {
        if self.rng.gen_bool(0.25) {
            Sort::Agent
        } else {
            Sort::Data
        }
    }

    pub fn arity(&mut self, max: usize) -> Arity {
        let n = self.rng.gen_range(0..=max);
        Arity((0..n).map(|_| self.sort()).collect())
    }

    fn action(&mut self, scope: &mut Vec<Var>, allow_recv: bool) -> Action {
        let depth = self.limits.depth;
        match self.rng.gen_range(0..8) {
            0..=2 => Action::send(self.term(scope, depth)),
            3 | 4 if allow_recv => {
                let k = self.rng.gen_range(1..=2);
                let bs: Vec<Var> = (0..k).map(|_| self.fresh(Sort::Data)).collect();
                scope.extend(bs.iter().cloned());
                Action::recv(bs)
            }
            5 => {
                let v = self.fresh(Sort::Data);
                scope.push(v.clone());
                Action::New(v)
            }
            6 => {
                let t = self.term(scope, depth);
                let v = self.fresh(Sort::Data);
                scope.push(v.clone());
                Action::matching(vec![Term::var(&v)], vec![t])
            }
            _ => Action::send(self.term(scope, depth)),
        }
    }

    /// A process `dom -> cod`. When `runnable`, every receive has an earlier
    /// send and the order only points forward, so a total run exists.
    pub fn process_between(&mut self, dom: &Arity, cod: &Arity, runnable: bool) -> CordProcess {
        let inputs: Vec<Var> = dom.0.iter().map(|s| self.fresh(*s)).collect();
        let mut scope = inputs.clone();
        let n = self.rng.gen_range(0..=self.limits.events);
        let mut events: Vec<Event> = Vec::new();
        let mut has_send = false;
        for _ in 0..n {
            let agent = self.agent_term(&scope);
            let action = self.action(&mut scope, !runnable || has_send);
            has_send |= action.is_send();
            let label = self.label();
            events.push(Event::new(label, agent, action));
        }
        let mut order = Vec::new();
        for i in 0..events.len() {
            for j in 0..events.len() {
                let p = if i < j { 0.35 } else { 0.05 };
                if i != j && (i < j || !runnable) && self.rng.gen_bool(p) {
                    order.push((events[i].label.clone(), events[j].label.clone()));
                }
            }
        }
        let space = CordSpace::from_parts(events, order).expect("labels are fresh");
        let outputs = cod
            .0
            .iter()
            .map(|s| match s {
                Sort::Agent => self.agent_term(&scope),
                Sort::Data => {
                    let d = self.rng.gen_range(1..=self.limits.depth);
                    self.term(&scope, d)
                }
            })
            .collect();
        CordProcess::new(inputs, space, outputs).expect("generated process is well formed")
    }

    pub fn process(&mut self, dom: &Arity, cod: &Arity) -> CordProcess {
        self.process_between(dom, cod, false)
    }

    /// A process whose interfaces together use at most `limits.wires` wires.
    pub fn any_process(&mut self) -> CordProcess {
        let w = self.limits.wires;
        let dom = self.arity(w);
        let cod = self.arity(w - dom.len());
        self.process(&dom, &cod)
    }

    pub fn data_arity(&mut self, max: usize) -> Arity {
        Arity::data(self.rng.gen_range(0..=max))
    }

    /// `k <= 3` guarded equations of depth at most 3 over parameters `x*`.
    pub fn guarded_system(&mut self) -> (Vec<Var>, GuardedSystem) {
        let params: Vec<Var> = (0..self.rng.gen_range(0..=2)).map(|i| Var::data(format!("x{i}"))).collect();
        let k = self.rng.gen_range(1..=3);
        let ys: Vec<Var> = (0..k).map(|i| Var::data(format!("y{i}"))).collect();
        let scope: Vec<Var> = params.iter().chain(&ys).cloned().collect();
        let eqs = ys
            .iter()
            .map(|y| loop {
                let d = self.rng.gen_range(2..=3);
                let t = match self.rng.gen_range(0..3) {
                    0 => Term::app("f", vec![self.term(&scope, d - 1)]),
                    1 => Term::pair(self.term(&scope, d - 1), self.term(&scope, d - 1)),
                    _ => self.term(&scope, d),
                };
                if !matches!(&t, Term::Var(v) if ys.contains(v)) {
                    break Equation::new(y.clone(), t);
                }
            })
            .collect();
        (params, GuardedSystem::new(eqs))
    }

    pub fn int_object(&mut self, max: usize) -> IntObject {
        IntObject::new(self.arity(max), self.arity(max))
    }

    pub fn interaction(&mut self, dom: &IntObject, cod: &IntObject) -> Interaction {
        let body = self.process(&dom.plus.concat(&cod.minus), &dom.minus.concat(&cod.plus));
        Interaction::new(dom.clone(), cod.clone(), body).expect("body fits")
    }

    /// A total run of `p`: random assignments first, then earlier sends.
    pub fn run_for(&mut self, p: &CordProcess) -> Option<Run> {
        let space = p.space();
        let sends: Vec<String> = space.sends().into_iter().collect();
        let recvs: Vec<String> = space.recvs().into_iter().collect();
        if recvs.is_empty() {
            return Some(Run::new());
        }
        if sends.is_empty() {
            return None;
        }
        for _ in 0..20 {
            let mut run = Run::new();
            for r in &recvs {
                run.insert(r.clone(), sends.choose(&mut self.rng).unwrap().clone());
            }
            if space.validate_run(&run) == Ok(RunVerdict::Ok) {
                return Some(run);
            }
        }
        let lin = space.linearization();
        let mut run = Run::new();
        for r in &recvs {
            let at = lin.iter().position(|l| l == r)?;
            let earlier: Vec<&String> = lin[..at].iter().filter(|l| sends.contains(l)).collect();
            run.insert(r.clone(), (*earlier.choose(&mut self.rng)?).clone());
        }
        (space.validate_run(&run) == Ok(RunVerdict::Ok)).then_some(run)
    }

    /// `p: A -> B`, `q: B -> C` with valid total runs of each.
    pub fn composable_pair(&mut self) -> (CordProcess, Run, CordProcess, Run) {
        let a = self.arity(2);
        let b = self.arity(2);
        let c = self.arity(2);
        loop {
            let p = self.process_between(&a, &b, true);
            let q = self.process_between(&b, &c, true);
            if let (Some(rp), Some(rq)) = (self.run_for(&p), self.run_for(&q)) {
                return (p, rp, q, rq);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn processes_respect_limits() {
        let mut g = Gen::new(7);
        for _ in 0..200 {
            let p = g.any_process();
            assert!(p.dom().len() + p.cod().len() <= 4);
            assert!(p.space().len() <= 5);
            assert!(p.outputs().iter().all(|t| t.depth() <= 3));
        }
    }

    #[test]
    fn labels_are_unique_across_processes() {
        let mut g = Gen::new(1);
        let p = g.any_process();
        let q = g.any_process();
        assert!(p.space().labels().is_disjoint(&q.space().labels()));
    }

    #[test]
    fn runs_validate() {
        let mut g = Gen::new(3);
        for _ in 0..50 {
            let (p, rp, q, rq) = g.composable_pair();
            assert_eq!(p.space().validate_run(&rp), Ok(RunVerdict::Ok));
            assert_eq!(q.space().validate_run(&rq), Ok(RunVerdict::Ok));
        }
    }

    #[test]
    fn systems_are_guarded() {
        let mut g = Gen::new(5);
        for _ in 0..100 {
            let (_, sys) = g.guarded_system();
            assert!(sys.equations.len() <= 3);
            for e in &sys.equations {
                assert!(e.rhs.depth() <= 3);
                assert!(!matches!(&e.rhs, Term::Var(v) if sys.traced().contains(v)));
            }
        }
    }
}
