//! Cord processes `(x⃗)[P]⟨s⃗⟩` and their category: composition through ⊘,
//! tensor, identities and projections, and the trace computed by solving
//! the feedback equations.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::cords::{CordError, CordSpace, Event, Label};
use crate::loop_model::FinFun;
use crate::terms::{
    canonical_term, free_vars, fresh_var, partition_system, solve_iterative, Equation, GuardedSystem, Sort, Subst,
    Term, TermError, Var,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProcError {
    #[error("arity mismatch: expected {expected}, found {found}")]
    Arity { expected: String, found: String },
    #[error("duplicate input variable {0}")]
    DuplicateInput(String),
    #[error("variable {0} is bound by an action but is also an input or context variable")]
    Rebound(String),
    #[error("unbound variable {0}")]
    Unbound(String),
    #[error("locality {0} is not an agent term")]
    Locality(String),
    #[error(transparent)]
    Cord(#[from] CordError),
    #[error(transparent)]
    Term(#[from] TermError),
}

/// A sequence of sorts; agent and data counts are derived.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Arity(pub Vec<Sort>);

impl Arity {
    pub fn data(n: usize) -> Self {
        Arity(vec![Sort::Data; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn agents(&self) -> usize {
        self.0.iter().filter(|s| **s == Sort::Agent).count()
    }

    pub fn data_count(&self) -> usize {
        self.0.iter().filter(|s| **s == Sort::Data).count()
    }

    pub fn concat(&self, other: &Arity) -> Arity {
        Arity(self.0.iter().chain(other.0.iter()).copied().collect())
    }

    pub fn slice(&self, from: usize, to: usize) -> Arity {
        Arity(self.0[from..to].to_vec())
    }
}

impl fmt::Display for Arity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("<")?;
        for (i, s) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            f.write_str(match s {
                Sort::Agent => "A",
                Sort::Data => "d",
            })?;
        }
        f.write_str(">")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CordProcess {
    inputs: Vec<Var>,
    space: CordSpace,
    outputs: Vec<Term>,
    /// Declared free variables of the ambient context.
    context: BTreeSet<Var>,
    /// Loose variables left behind by unguarded feedback.
    freed: BTreeSet<Var>,
}

fn ordered_free_vars(t: &Term, bound: &mut Vec<Var>, out: &mut Vec<Var>) {
    match t {
        Term::Var(v) => {
            if !bound.contains(v) && !out.contains(v) {
                out.push(v.clone());
            }
        }
        Term::App(_, args) => args.iter().for_each(|a| ordered_free_vars(a, bound, out)),
        Term::Mu(y, b) => {
            bound.push(y.clone());
            ordered_free_vars(b, bound, out);
            bound.pop();
        }
        _ => {}
    }
}

impl CordProcess {
    pub fn new(inputs: Vec<Var>, space: CordSpace, outputs: Vec<Term>) -> Result<Self, ProcError> {
        Self::build(inputs, space, outputs, BTreeSet::new(), BTreeSet::new())
    }

    pub fn build(
        inputs: Vec<Var>,
        space: CordSpace,
        outputs: Vec<Term>,
        context: BTreeSet<Var>,
        freed: BTreeSet<Var>,
    ) -> Result<Self, ProcError> {
        let p = CordProcess { inputs, space, outputs, context, freed };
        p.validate()?;
        Ok(p)
    }

    pub fn with_context(mut self, vars: impl IntoIterator<Item = Var>) -> Result<Self, ProcError> {
        self.context.extend(vars);
        self.validate()?;
        Ok(self)
    }

    pub fn with_freed(mut self, vars: impl IntoIterator<Item = Var>) -> Result<Self, ProcError> {
        self.freed.extend(vars);
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<(), ProcError> {
        let mut seen = BTreeSet::new();
        for v in &self.inputs {
            if !seen.insert(v) {
                return Err(ProcError::DuplicateInput(v.name.clone()));
            }
        }
        let bound = self.bound_vars();
        for v in &bound {
            if seen.contains(v) || self.context.contains(v) || self.freed.contains(v) {
                return Err(ProcError::Rebound(v.name.clone()));
            }
        }
        for e in self.space.events() {
            if e.agent.sort() != Sort::Agent {
                return Err(ProcError::Locality(e.agent.to_string()));
            }
        }
        for v in self.used_vars() {
            if !(seen.contains(&v) || bound.contains(&v) || self.context.contains(&v) || self.freed.contains(&v)) {
                return Err(ProcError::Unbound(v.name));
            }
        }
        Ok(())
    }

    pub fn inputs(&self) -> &[Var] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[Term] {
        &self.outputs
    }

    pub fn space(&self) -> &CordSpace {
        &self.space
    }

    pub fn context(&self) -> &BTreeSet<Var> {
        &self.context
    }

    pub fn freed(&self) -> &BTreeSet<Var> {
        &self.freed
    }

    pub fn dom(&self) -> Arity {
        Arity(self.inputs.iter().map(|v| v.sort).collect())
    }

    pub fn cod(&self) -> Arity {
        Arity(self.outputs.iter().map(Term::sort).collect())
    }

    pub fn bound_vars(&self) -> BTreeSet<Var> {
        self.space.events().flat_map(|e| e.action.bv()).collect()
    }

    /// Variables occurring free in localities, actions and outputs.
    fn used_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        for e in self.space.events() {
            out.extend(free_vars(&e.agent));
            out.extend(e.action.fv());
        }
        for t in &self.outputs {
            out.extend(free_vars(t));
        }
        out
    }

    /// Free variables of the process: used, but neither inputs nor bound.
    pub fn free_vars(&self) -> BTreeSet<Var> {
        let bound = self.bound_vars();
        self.used_vars()
            .into_iter()
            .filter(|v| !self.inputs.contains(v) && !bound.contains(v))
            .collect()
    }

    /// Membership in the subcategory of processes over the given context.
    pub fn restrict_context(&self, vars: &[Var]) -> bool {
        self.free_vars().iter().all(|v| vars.contains(v))
    }

    pub fn is_nonfinite(&self) -> bool {
        self.outputs.iter().any(Term::contains_mu)
            || self
                .space
                .events()
                .any(|e| e.agent.contains_mu() || e.action.terms().iter().any(|t| t.contains_mu()))
    }

    /// Every variable name mentioned, context included.
    pub fn names(&self) -> BTreeSet<String> {
        let mut out: BTreeSet<String> = self.inputs.iter().map(|v| v.name.clone()).collect();
        out.extend(self.bound_vars().into_iter().map(|v| v.name));
        out.extend(self.used_vars().into_iter().map(|v| v.name));
        out.extend(self.context.iter().map(|v| v.name.clone()));
        out.extend(self.freed.iter().map(|v| v.name.clone()));
        out
    }

    /// Simultaneous renaming of variables (not of context variables).
    pub fn rename_vars(&self, ren: &BTreeMap<Var, Var>) -> CordProcess {
        if ren.is_empty() {
            return self.clone();
        }
        let sigma = Subst::from_pairs(ren.iter().map(|(a, b)| (a.clone(), Term::Var(b.clone()))))
            .expect("renaming preserves sorts");
        let r = |v: &Var| ren.get(v).cloned().unwrap_or_else(|| v.clone());
        CordProcess {
            inputs: self.inputs.iter().map(r).collect(),
            space: self.space.map_events(|e| Event {
                label: e.label.clone(),
                agent: sigma.apply(&e.agent),
                action: e.action.map(&|t| sigma.apply(t), &r),
            }),
            outputs: self.outputs.iter().map(|t| sigma.apply(t)).collect(),
            context: self.context.clone(),
            freed: self.freed.iter().map(r).collect(),
        }
    }

    /// Renames the non-context variables whose names occur in `avoid`.
    pub fn apart_from(&self, avoid: &BTreeSet<String>) -> CordProcess {
        let mut taken: BTreeSet<String> = avoid.clone();
        taken.extend(self.names());
        let mut ren = BTreeMap::new();
        let mut own: BTreeSet<Var> = self.inputs.iter().cloned().collect();
        own.extend(self.bound_vars());
        own.extend(self.freed.iter().cloned());
        for v in own {
            if avoid.contains(&v.name) {
                let w = fresh_var(&v, &taken);
                taken.insert(w.name.clone());
                ren.insert(v, w);
            }
        }
        self.rename_vars(&ren)
    }

    /// Deterministic representative of the α-class: inputs `_0, _1, ...`
    /// by position, then bound variables along the canonical linearization
    /// of the events, then loose variables by first occurrence. Context
    /// variables keep their names.
    pub fn alpha_canonical(&self) -> CordProcess {
        let lin = self.space.linearization();
        let mut ren: BTreeMap<Var, Var> = BTreeMap::new();
        let mut next = 0;
        let mut assign = |v: &Var, ren: &mut BTreeMap<Var, Var>| {
            if !ren.contains_key(v) {
                ren.insert(v.clone(), v.with_name(format!("_{next}")));
                next += 1;
            }
        };
        for v in &self.inputs {
            assign(v, &mut ren);
        }
        for l in &lin {
            for b in self.space.event(l).unwrap().action.binders() {
                assign(&b, &mut ren);
            }
        }
        let mut occurring = Vec::new();
        for l in &lin {
            let e = self.space.event(l).unwrap();
            ordered_free_vars(&e.agent, &mut vec![], &mut occurring);
            for t in e.action.terms() {
                ordered_free_vars(t, &mut vec![], &mut occurring);
            }
        }
        for t in &self.outputs {
            ordered_free_vars(t, &mut vec![], &mut occurring);
        }
        let mut freed = BTreeSet::new();
        for v in occurring.iter().filter(|v| self.freed.contains(v)) {
            assign(v, &mut ren);
            freed.insert(ren[v].clone());
        }
        let context: BTreeSet<Var> = occurring.iter().filter(|v| self.context.contains(v)).cloned().collect();
        // context names must not be captured by the numbering
        for v in &context {
            ren.remove(v);
        }
        let renamed = CordProcess { freed: BTreeSet::new(), ..self.rename_vars(&ren) };
        CordProcess {
            inputs: renamed.inputs,
            space: renamed
                .space
                .map_events(|e| Event {
                    label: e.label.clone(),
                    agent: canonical_term(&e.agent),
                    action: e.action.map(&canonical_term, &|v| v.clone()),
                })
                .canonicalized(),
            outputs: renamed.outputs.iter().map(canonical_term).collect(),
            context,
            freed,
        }
    }

    pub fn alpha_eq(&self, other: &CordProcess) -> bool {
        self.alpha_canonical() == other.alpha_canonical()
    }

    pub fn relabel(&self, map: &BTreeMap<Label, Label>) -> CordProcess {
        CordProcess { space: self.space.relabel(map), ..self.clone() }
    }

    /// Renames the event labels that clash with `other`'s, as tensoring
    /// after `other` would.
    pub fn labels_apart_from(&self, other: &CordProcess) -> CordProcess {
        let (_, map) = other.space.par_with_renaming(&self.space);
        self.relabel(&map)
    }

    /// Reorders the interface: input `i` of the result is input `ins[i]`,
    /// output `j` is output `outs[j]`. Agrees with composing with `pi` on
    /// both sides, but keeps variable names.
    pub fn permuted(&self, ins: &[usize], outs: &[usize]) -> CordProcess {
        assert_eq!(ins.len(), self.inputs.len(), "input permutation size");
        assert_eq!(outs.len(), self.outputs.len(), "output permutation size");
        CordProcess {
            inputs: ins.iter().map(|&i| self.inputs[i].clone()).collect(),
            outputs: outs.iter().map(|&j| self.outputs[j].clone()).collect(),
            ..self.clone()
        }
    }

    /// Refined typing lint: a data output mentioning an agent variable that
    /// is itself an output entry must come after that entry.
    pub fn check_refined_typing(&self) -> Result<(), String> {
        for (i, t) in self.outputs.iter().enumerate() {
            if t.sort() != Sort::Data {
                continue;
            }
            for v in free_vars(t).into_iter().filter(|v| v.sort == Sort::Agent) {
                if let Some(j) = self.outputs.iter().position(|o| o.as_var() == Some(&v)) {
                    if j > i {
                        return Err(format!("output {i} mentions agent {} declared at {j}", v.name));
                    }
                }
            }
        }
        Ok(())
    }
}

/// `(x⃗)[]⟨x⃗⟩`, the buffer on the given arity.
pub fn identity(arity: &Arity) -> CordProcess {
    let xs: Vec<Var> = arity.0.iter().enumerate().map(|(i, s)| Var { name: format!("x{i}"), sort: *s }).collect();
    let outs = xs.iter().map(Term::var).collect();
    CordProcess::new(xs, CordSpace::new(), outs).expect("identity is well formed")
}

/// The rearrangement induced (contravariantly) by `f: n -> m`; `sorts`
/// gives the sorts of the `m` inputs.
pub fn pi(f: &FinFun, sorts: &Arity) -> Result<CordProcess, ProcError> {
    if sorts.len() != f.cod {
        return Err(ProcError::Arity { expected: format!("{} input sorts", f.cod), found: sorts.len().to_string() });
    }
    let xs: Vec<Var> = sorts.0.iter().enumerate().map(|(i, s)| Var { name: format!("x{i}"), sort: *s }).collect();
    let outs = f.table.iter().map(|&j| Term::var(&xs[j])).collect();
    CordProcess::new(xs, CordSpace::new(), outs)
}

pub fn pi_data(f: &FinFun) -> CordProcess {
    pi(f, &Arity::data(f.cod)).expect("sizes agree")
}

/// Block swap `U ⊗ V -> V ⊗ U` as a process.
pub fn swap(u: &Arity, v: &Arity) -> CordProcess {
    let sorts = u.concat(v);
    let (a, b) = (u.len(), v.len());
    let table = (0..b).map(|i| a + i).chain(0..a).collect();
    pi(&FinFun::new(a + b, table).unwrap(), &sorts).expect("sizes agree")
}

fn check_types(expected: &Arity, found: &Arity) -> Result<(), ProcError> {
    if expected != found {
        return Err(ProcError::Arity { expected: expected.to_string(), found: found.to_string() });
    }
    Ok(())
}

/// Diagrammatic composition: `p` then `q`.
pub fn compose(p: &CordProcess, q: &CordProcess) -> Result<CordProcess, ProcError> {
    compose_with_labels(p, q).map(|(r, _)| r)
}

/// Composition, also returning the relabelling applied to `q`'s events.
pub fn compose_with_labels(
    p: &CordProcess,
    q: &CordProcess,
) -> Result<(CordProcess, BTreeMap<Label, Label>), ProcError> {
    check_types(&p.cod(), &q.dom())?;
    let qctx: BTreeSet<String> = q.context.iter().map(|v| v.name.clone()).collect();
    let p = p.apart_from(&qctx);
    let q = q.apart_from(&p.names());
    let sigma = Subst::from_pairs(q.inputs.iter().cloned().zip(p.outputs.iter().cloned()))?;
    let (space, labels) = p.space.oslash_with_renaming(&q.space, &sigma);
    let outputs = q.outputs.iter().map(|t| sigma.apply(t)).collect();
    let r = CordProcess::build(
        p.inputs.clone(),
        space,
        outputs,
        p.context.union(&q.context).cloned().collect(),
        p.freed.union(&q.freed).cloned().collect(),
    )?;
    Ok((r, labels))
}

pub fn tensor(p: &CordProcess, q: &CordProcess) -> CordProcess {
    tensor_with_labels(p, q).0
}

pub fn tensor_with_labels(p: &CordProcess, q: &CordProcess) -> (CordProcess, BTreeMap<Label, Label>) {
    let qctx: BTreeSet<String> = q.context.iter().map(|v| v.name.clone()).collect();
    let p = p.apart_from(&qctx);
    let q = q.apart_from(&p.names());
    let (space, labels) = p.space.par_with_renaming(&q.space);
    let r = CordProcess::build(
        p.inputs.iter().chain(q.inputs.iter()).cloned().collect(),
        space,
        p.outputs.iter().chain(q.outputs.iter()).cloned().collect(),
        p.context.union(&q.context).cloned().collect(),
        p.freed.union(&q.freed).cloned().collect(),
    )
    .expect("tensor of well-formed processes is well formed");
    (r, labels)
}

/// Feeds the last `l` outputs back into the last `l` inputs.
pub fn trace(p: &CordProcess, l: usize) -> Result<CordProcess, ProcError> {
    let (n_in, n_out) = (p.inputs.len(), p.outputs.len());
    if l > n_in || l > n_out {
        return Err(ProcError::Arity {
            expected: format!("at least {l} inputs and outputs"),
            found: format!("{n_in} -> {n_out}"),
        });
    }
    if l == 0 {
        return Ok(p.clone());
    }
    let ys = &p.inputs[n_in - l..];
    let ts = &p.outputs[n_out - l..];
    let sys = GuardedSystem::new(ys.iter().cloned().zip(ts.iter().cloned()).map(|(y, t)| Equation::new(y, t)).collect());
    let ps = partition_system(&sys)?;
    let sigma = solve_iterative(&ps)?;

    let mut space = p.space.substitute(&sigma);
    let introduced = |e: &Event| -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        for y in e.action.fv().iter().filter(|y| sigma.contains(y)) {
            out.extend(free_vars(sigma.get(y).unwrap()));
        }
        out
    };
    let events: Vec<&Event> = p.space.events().collect();
    for b in &events {
        let intro = introduced(b);
        if intro.is_empty() {
            continue;
        }
        for a in &events {
            if a.label != b.label && !a.action.bv().is_disjoint(&intro) {
                space.add_order(a.label.clone(), b.label.clone())?;
            }
        }
    }
    let mut freed = p.freed.clone();
    freed.extend(ps.freed.iter().cloned());
    CordProcess::build(
        p.inputs[..n_in - l].to_vec(),
        space,
        p.outputs[..n_out - l].iter().map(|t| sigma.apply(t)).collect(),
        p.context.clone(),
        freed,
    )
}
