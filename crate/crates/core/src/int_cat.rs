//! Interactions: the Int construction over cord processes.
//!
//! An object is a pair of arities `⟨A₊, A₋⟩`; a morphism `A -> B` is a
//! process `A₊⊗B₋ -> A₋⊗B₊`. Composition closes the loop through `B`
//! with the trace.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::proc_cat::{self, Arity, CordProcess, ProcError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IntError {
    #[error("type error: {0}")]
    Type(String),
    #[error(transparent)]
    Proc(#[from] ProcError),
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct IntObject {
    pub plus: Arity,
    pub minus: Arity,
}

impl IntObject {
    pub fn new(plus: Arity, minus: Arity) -> Self {
        IntObject { plus, minus }
    }

    pub fn unit() -> Self {
        IntObject::default()
    }

    pub fn dual(&self) -> IntObject {
        IntObject { plus: self.minus.clone(), minus: self.plus.clone() }
    }

    pub fn tensor(&self, other: &IntObject) -> IntObject {
        IntObject { plus: self.plus.concat(&other.plus), minus: self.minus.concat(&other.minus) }
    }
}

impl fmt::Display for IntObject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}; {}>", self.plus, self.minus)
    }
}

pub fn dual(a: &IntObject) -> IntObject {
    a.dual()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interaction {
    pub dom: IntObject,
    pub cod: IntObject,
    pub body: CordProcess,
}

impl Interaction {
    pub fn new(dom: IntObject, cod: IntObject, body: CordProcess) -> Result<Self, IntError> {
        let want_in = dom.plus.concat(&cod.minus);
        let want_out = dom.minus.concat(&cod.plus);
        if body.dom() != want_in || body.cod() != want_out {
            return Err(IntError::Type(format!(
                "body {} -> {} does not fit {} -> {}",
                body.dom(),
                body.cod(),
                want_in,
                want_out
            )));
        }
        Ok(Interaction { dom, cod, body })
    }

    pub fn alpha_eq(&self, other: &Interaction) -> bool {
        self.dom == other.dom && self.cod == other.cod && self.body.alpha_eq(&other.body)
    }

    pub fn alpha_canonical(&self) -> Interaction {
        Interaction { body: self.body.alpha_canonical(), ..self.clone() }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Strategy {
    TraceMinus,
    #[default]
    TraceBoth,
    TracePlus,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [Strategy::TraceMinus, Strategy::TraceBoth, Strategy::TracePlus];
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::TraceMinus => "minus",
            Strategy::TraceBoth => "both",
            Strategy::TracePlus => "plus",
        })
    }
}

impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "minus" | "traceMinus" => Ok(Strategy::TraceMinus),
            "both" | "traceBoth" => Ok(Strategy::TraceBoth),
            "plus" | "tracePlus" => Ok(Strategy::TracePlus),
            _ => Err(format!("unknown strategy {s}; expected minus, both or plus")),
        }
    }
}

/// Index permutation listing the blocks of `sizes` in the order `order`.
fn blocks(sizes: &[usize], order: &[usize]) -> Vec<usize> {
    let mut starts = vec![0];
    for s in sizes {
        starts.push(starts.last().unwrap() + s);
    }
    order.iter().flat_map(|&b| starts[b]..starts[b] + sizes[b]).collect()
}

fn id(a: &Arity) -> CordProcess {
    proc_cat::identity(a)
}

pub fn int_compose(p: &Interaction, q: &Interaction, strategy: Strategy) -> Result<Interaction, IntError> {
    if p.cod != q.dom {
        return Err(IntError::Type(format!("codomain {} does not match domain {}", p.cod, q.dom)));
    }
    let (a, b, c) = (&p.dom, &p.cod, &q.cod);
    // fix the event labels once so every strategy names events alike
    let qb = q.body.labels_apart_from(&p.body);
    let (ap, am, bp, bm, cp, cm) =
        (a.plus.len(), a.minus.len(), b.plus.len(), b.minus.len(), c.plus.len(), c.minus.len());
    let body = match strategy {
        Strategy::TraceBoth => {
            // p⊗q : A₊ B₋ | B₊ C₋ -> A₋ B₊ | B₋ C₊
            let pq = proc_cat::tensor(&p.body, &qb);
            let ins = blocks(&[ap, bm, bp, cm], &[0, 3, 1, 2]);
            let outs = blocks(&[am, bp, bm, cp], &[0, 3, 2, 1]);
            proc_cat::trace(&pq.permuted(&ins, &outs), bm + bp)?
        }
        Strategy::TraceMinus => {
            // (p⊗C₋) ; (A₋⊗q) : A₊ B₋ C₋ -> A₋ B₋ C₊
            let left = proc_cat::tensor(&p.body, &id(&c.minus));
            let right = proc_cat::tensor(&id(&a.minus), &qb);
            let body = proc_cat::compose(&left, &right)?;
            let ins = blocks(&[ap, bm, cm], &[0, 2, 1]);
            let outs = blocks(&[am, bm, cp], &[0, 2, 1]);
            proc_cat::trace(&body.permuted(&ins, &outs), bm)?
        }
        Strategy::TracePlus => {
            // (A₊⊗q) ; (p⊗C₊) : A₊ B₊ C₋ -> A₋ B₊ C₊
            let left = proc_cat::tensor(&id(&a.plus), &qb);
            let right = proc_cat::tensor(&p.body, &id(&c.plus));
            let body = proc_cat::compose(&left, &right)?;
            let ins = blocks(&[ap, bp, cm], &[0, 2, 1]);
            let outs = blocks(&[am, bp, cp], &[0, 2, 1]);
            proc_cat::trace(&body.permuted(&ins, &outs), bp)?
        }
    };
    Interaction::new(a.clone(), c.clone(), body)
}

/// The buffer `A -> A`.
pub fn int_identity(a: &IntObject) -> Interaction {
    let body = proc_cat::swap(&a.plus, &a.minus);
    Interaction::new(a.clone(), a.clone(), body).expect("buffer has the identity type")
}

pub fn int_tensor(p: &Interaction, q: &Interaction) -> Interaction {
    let (a, b, c, d) = (&p.dom, &p.cod, &q.dom, &q.cod);
    // p⊗q : A₊ B₋ C₊ D₋ -> A₋ B₊ C₋ D₊
    let pq = proc_cat::tensor(&p.body, &q.body);
    let ins = blocks(&[a.plus.len(), b.minus.len(), c.plus.len(), d.minus.len()], &[0, 2, 1, 3]);
    let outs = blocks(&[a.minus.len(), b.plus.len(), c.minus.len(), d.plus.len()], &[0, 2, 1, 3]);
    Interaction::new(a.tensor(c), b.tensor(d), pq.permuted(&ins, &outs)).expect("tensor keeps polarity bookkeeping")
}

/// `η : 0 -> A*⊗A`.
pub fn eta(a: &IntObject) -> Interaction {
    let body = proc_cat::swap(&a.plus, &a.minus);
    Interaction::new(IntObject::unit(), a.dual().tensor(a), body).expect("unit is a buffer")
}

/// `ε : A⊗A* -> 0`.
pub fn epsilon(a: &IntObject) -> Interaction {
    let body = proc_cat::swap(&a.plus, &a.minus);
    Interaction::new(a.tensor(&a.dual()), IntObject::unit(), body).expect("counit is a buffer")
}

/// `n ↦ ⟨n, 0⟩`.
pub fn embed_init(p: &CordProcess) -> Interaction {
    let dom = IntObject::new(p.dom(), Arity::default());
    let cod = IntObject::new(p.cod(), Arity::default());
    Interaction::new(dom, cod, p.clone()).expect("initiator embedding")
}

/// `n ↦ ⟨0, n⟩`, reversing direction.
pub fn embed_resp(p: &CordProcess) -> Interaction {
    let dom = IntObject::new(Arity::default(), p.cod());
    let cod = IntObject::new(Arity::default(), p.dom());
    Interaction::new(dom, cod, p.clone()).expect("responder embedding")
}

/// Both triangle identities for `a`.
pub fn triangles_hold(a: &IntObject) -> Result<bool, IntError> {
    let left = int_compose(
        &int_tensor(&int_identity(a), &eta(a)),
        &int_tensor(&epsilon(a), &int_identity(a)),
        Strategy::default(),
    )?;
    let ad = a.dual();
    let right = int_compose(
        &int_tensor(&eta(a), &int_identity(&ad)),
        &int_tensor(&int_identity(&ad), &epsilon(a)),
        Strategy::default(),
    )?;
    Ok(left.alpha_eq(&int_identity(a)) && right.alpha_eq(&int_identity(&ad)))
}

/// Every object whose two arities have at most `n` entries each.
pub fn small_objects(n: usize) -> Vec<IntObject> {
    use crate::terms::Sort;
    fn arities(n: usize) -> Vec<Arity> {
        let mut out = vec![Arity::default()];
        let mut layer = vec![Arity::default()];
        for _ in 0..n {
            layer = layer
                .iter()
                .flat_map(|a| [Sort::Data, Sort::Agent].map(|s| a.concat(&Arity(vec![s]))))
                .collect();
            out.extend(layer.iter().cloned());
        }
        out
    }
    let all = arities(n);
    let mut objs = Vec::new();
    for p in &all {
        for m in &all {
            objs.push(IntObject::new(p.clone(), m.clone()));
        }
    }
    objs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cords::{Action, CordSpace, Event};
    use crate::terms::{Term, Var};

    fn d(n: &str) -> Var {
        Var::data(n)
    }

    fn v(n: &str) -> Term {
        Term::data_var(n)
    }

    fn one() -> IntObject {
        IntObject::new(Arity::data(1), Arity::data(1))
    }

    /// `⟨1,1⟩ -> ⟨1,1⟩` echoing with a send.
    fn echo(agent: &str, fun: &str) -> Interaction {
        let s = CordSpace::chain(vec![Event::new("s", Term::agent(agent), Action::send(v("a")))]).unwrap();
        let body = CordProcess::new(vec![d("a"), d("b")], s, vec![Term::app(fun, vec![v("b")]), v("a")]).unwrap();
        Interaction::new(one(), one(), body).unwrap()
    }

    #[test]
    fn typing() {
        let body = proc_cat::identity(&Arity::data(1));
        assert!(matches!(Interaction::new(one(), one(), body), Err(IntError::Type(_))));
        let p = echo("A", "f");
        let q = int_identity(&IntObject::new(Arity::data(2), Arity::default()));
        assert!(int_compose(&p, &q, Strategy::TraceBoth).is_err());
    }

    #[test]
    fn units() {
        let p = echo("A", "f");
        for s in Strategy::ALL {
            assert!(int_compose(&p, &int_identity(&one()), s).unwrap().alpha_eq(&p), "{s}");
            assert!(int_compose(&int_identity(&one()), &p, s).unwrap().alpha_eq(&p), "{s}");
        }
    }

    #[test]
    fn strategies_agree_on_a_feedback_loop() {
        let p = echo("A", "f");
        let q = echo("B", "g");
        let both = int_compose(&p, &q, Strategy::TraceBoth).unwrap();
        for s in Strategy::ALL {
            assert!(int_compose(&p, &q, s).unwrap().alpha_eq(&both), "{s}");
        }
    }

    #[test]
    fn duals_and_triangles() {
        for a in small_objects(1) {
            assert_eq!(a.dual().dual(), a);
            assert!(triangles_hold(&a).unwrap(), "{a}");
        }
    }

    #[test]
    fn scalars_compose_as_tensor() {
        let scalar = |l: &str| {
            let s = CordSpace::chain(vec![Event::new(l, Term::agent("A"), Action::New(d("m")))]).unwrap();
            let body = CordProcess::new(vec![], s, vec![]).unwrap();
            Interaction::new(IntObject::unit(), IntObject::unit(), body).unwrap()
        };
        let (s, t) = (scalar("a"), scalar("b"));
        let st = int_compose(&s, &t, Strategy::TraceBoth).unwrap();
        assert!(st.alpha_eq(&int_tensor(&s, &t)));
        assert!(st.alpha_eq(&int_compose(&t, &s, Strategy::TraceBoth).unwrap()));
    }

    #[test]
    fn embeddings() {
        let f = CordProcess::new(vec![d("x")], CordSpace::new(), vec![Term::app("f", vec![v("x")])]).unwrap();
        let g = CordProcess::new(vec![d("y")], CordSpace::new(), vec![Term::app("g", vec![v("y")])]).unwrap();
        let fg = proc_cat::compose(&f, &g).unwrap();
        let init = int_compose(&embed_init(&f), &embed_init(&g), Strategy::TraceBoth).unwrap();
        assert!(init.alpha_eq(&embed_init(&fg)));
        let resp = int_compose(&embed_resp(&g), &embed_resp(&f), Strategy::TraceBoth).unwrap();
        assert!(resp.alpha_eq(&embed_resp(&fg)));
        let n = Arity::data(2);
        assert!(embed_init(&proc_cat::identity(&n)).alpha_eq(&int_identity(&IntObject::new(n, Arity::default()))));
    }
}
