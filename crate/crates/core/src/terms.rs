//! Two-sorted message terms with μ-binders, substitution, the decryption
//! rewrite, and the solver for guarded equation systems.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TermError {
    #[error("sort error: {var} cannot be bound to {term}")]
    Sort { var: String, term: String },
    #[error("arity error: expected {expected}, found {found}")]
    Arity { expected: usize, found: usize },
    #[error("state error: {0}")]
    State(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sort {
    Agent,
    Data,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var {
    pub name: String,
    pub sort: Sort,
}

impl Var {
    pub fn data(name: impl Into<String>) -> Self {
        Var { name: name.into(), sort: Sort::Data }
    }

    pub fn agent(name: impl Into<String>) -> Self {
        Var { name: name.into(), sort: Sort::Agent }
    }

    pub fn with_name(&self, name: impl Into<String>) -> Self {
        Var { name: name.into(), sort: self.sort }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OpSym {
    pub name: String,
    pub arity: usize,
}

impl OpSym {
    pub fn new(name: impl Into<String>, arity: usize) -> Self {
        OpSym { name: name.into(), arity }
    }
}

pub const PAIR: &str = "pair";
pub const ENC: &str = "E";
pub const DEC: &str = "D";
pub const PK: &str = "k";
pub const SK: &str = "kbar";

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(Var),
    /// Agent identifier constant.
    Agent(String),
    App(OpSym, Vec<Term>),
    Mu(Var, Box<Term>),
    /// Cut-off marker produced by `unfold`.
    Bottom,
}

impl Term {
    pub fn var(v: &Var) -> Term {
        Term::Var(v.clone())
    }

    pub fn data_var(name: &str) -> Term {
        Term::Var(Var::data(name))
    }

    pub fn agent_var(name: &str) -> Term {
        Term::Var(Var::agent(name))
    }

    pub fn agent(name: &str) -> Term {
        Term::Agent(name.to_string())
    }

    pub fn app(name: &str, args: Vec<Term>) -> Term {
        Term::App(OpSym::new(name, args.len()), args)
    }

    pub fn constant(name: &str) -> Term {
        Term::app(name, vec![])
    }

    pub fn pair(a: Term, b: Term) -> Term {
        Term::app(PAIR, vec![a, b])
    }

    /// Right-nested tuple; a single element is returned as is.
    pub fn tuple(mut items: Vec<Term>) -> Term {
        assert!(!items.is_empty(), "empty tuple");
        let mut acc = items.pop().unwrap();
        while let Some(t) = items.pop() {
            acc = Term::pair(t, acc);
        }
        acc
    }

    pub fn enc(key: Term, body: Term) -> Term {
        Term::app(ENC, vec![key, body])
    }

    pub fn dec(key: Term, body: Term) -> Term {
        Term::app(DEC, vec![key, body])
    }

    pub fn pk(w: Term) -> Term {
        Term::app(PK, vec![w])
    }

    pub fn sk(w: Term) -> Term {
        Term::app(SK, vec![w])
    }

    pub fn mu(y: Var, body: Term) -> Term {
        Term::Mu(y, Box::new(body))
    }

    pub fn sort(&self) -> Sort {
        match self {
            Term::Var(v) => v.sort,
            Term::Agent(_) => Sort::Agent,
            _ => Sort::Data,
        }
    }

    pub fn as_var(&self) -> Option<&Var> {
        match self {
            Term::Var(v) => Some(v),
            _ => None,
        }
    }

    pub fn is_op(&self, name: &str) -> bool {
        matches!(self, Term::App(op, _) if op.name == name)
    }

    /// Split a right-nested tuple into exactly `k` components.
    pub fn untuple(&self, k: usize) -> Option<Vec<Term>> {
        if k == 0 {
            return None;
        }
        let mut out = Vec::with_capacity(k);
        let mut cur = self;
        for _ in 1..k {
            match cur {
                Term::App(op, args) if op.name == PAIR && args.len() == 2 => {
                    out.push(args[0].clone());
                    cur = &args[1];
                }
                _ => return None,
            }
        }
        out.push(cur.clone());
        Some(out)
    }

    pub fn contains_mu(&self) -> bool {
        match self {
            Term::Mu(..) => true,
            Term::App(_, args) => args.iter().any(Term::contains_mu),
            _ => false,
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Term::App(_, args) => 1 + args.iter().map(Term::size).sum::<usize>(),
            Term::Mu(_, b) => 1 + b.size(),
            _ => 1,
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Term::App(_, args) => 1 + args.iter().map(Term::depth).max().unwrap_or(0),
            Term::Mu(_, b) => b.depth(),
            _ => 0,
        }
    }

    /// Visit every subterm (pre-order), including μ bodies.
    pub fn for_each_subterm<'a>(&'a self, f: &mut impl FnMut(&'a Term)) {
        f(self);
        match self {
            Term::App(_, args) => args.iter().for_each(|a| a.for_each_subterm(f)),
            Term::Mu(_, b) => b.for_each_subterm(f),
            _ => {}
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => f.write_str(&v.name),
            Term::Agent(a) => write!(f, "#{a}"),
            Term::App(op, args) if op.name == PAIR && args.len() == 2 => {
                write!(f, "({}, {})", args[0], args[1])
            }
            Term::App(op, args) => {
                write!(f, "{}(", op.name)?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
            Term::Mu(y, b) => write!(f, "mu {} . {}", y.name, b),
            Term::Bottom => f.write_str("⊥"),
        }
    }
}

pub fn free_vars(t: &Term) -> BTreeSet<Var> {
    let mut out = BTreeSet::new();
    collect_free(t, &mut Vec::new(), &mut out);
    out
}

fn collect_free(t: &Term, bound: &mut Vec<Var>, out: &mut BTreeSet<Var>) {
    match t {
        Term::Var(v) => {
            if !bound.contains(v) {
                out.insert(v.clone());
            }
        }
        Term::App(_, args) => args.iter().for_each(|a| collect_free(a, bound, out)),
        Term::Mu(y, b) => {
            bound.push(y.clone());
            collect_free(b, bound, out);
            bound.pop();
        }
        Term::Agent(_) | Term::Bottom => {}
    }
}

pub fn occurs_free(v: &Var, t: &Term) -> bool {
    free_vars(t).contains(v)
}

/// A finite, sort-preserving map from variables to terms.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Subst {
    map: BTreeMap<Var, Term>,
}

impl Subst {
    pub fn new() -> Self {
        Subst::default()
    }

    pub fn singleton(v: Var, t: Term) -> Result<Self, TermError> {
        let mut s = Subst::new();
        s.insert(v, t)?;
        Ok(s)
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (Var, Term)>) -> Result<Self, TermError> {
        let mut s = Subst::new();
        for (v, t) in pairs {
            s.insert(v, t)?;
        }
        Ok(s)
    }

    pub fn insert(&mut self, v: Var, t: Term) -> Result<(), TermError> {
        if v.sort != t.sort() {
            return Err(TermError::Sort { var: v.name.clone(), term: t.to_string() });
        }
        self.map.insert(v, t);
        Ok(())
    }

    pub fn get(&self, v: &Var) -> Option<&Term> {
        self.map.get(v)
    }

    pub fn contains(&self, v: &Var) -> bool {
        self.map.contains_key(v)
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Var, &Term)> {
        self.map.iter()
    }

    pub fn domain(&self) -> impl Iterator<Item = &Var> {
        self.map.keys()
    }

    pub fn apply(&self, t: &Term) -> Term {
        if self.map.is_empty() {
            return t.clone();
        }
        subst_in(t, &self.map)
    }

    /// `self` followed by `then`: applying the result equals applying `self`
    /// and then `then`.
    pub fn then(&self, then: &Subst) -> Subst {
        let mut map: BTreeMap<Var, Term> =
            self.map.iter().map(|(v, t)| (v.clone(), then.apply(t))).collect();
        for (v, t) in &then.map {
            map.entry(v.clone()).or_insert_with(|| t.clone());
        }
        Subst { map }
    }
}

/// Simultaneous, capture-avoiding substitution.
pub fn substitute(t: &Term, sigma: &Subst) -> Term {
    sigma.apply(t)
}

fn subst_in(t: &Term, map: &BTreeMap<Var, Term>) -> Term {
    match t {
        Term::Var(v) => map.get(v).cloned().unwrap_or_else(|| t.clone()),
        Term::App(op, args) => Term::App(op.clone(), args.iter().map(|a| subst_in(a, map)).collect()),
        Term::Mu(y, body) => {
            let fv = free_vars(body);
            let relevant: BTreeMap<Var, Term> = map
                .iter()
                .filter(|(v, _)| *v != y && fv.contains(*v))
                .map(|(v, t)| (v.clone(), t.clone()))
                .collect();
            if relevant.is_empty() {
                return t.clone();
            }
            let captures = relevant.values().any(|r| occurs_free(y, r));
            if captures {
                let mut avoid: BTreeSet<String> = fv.iter().map(|v| v.name.clone()).collect();
                for (v, r) in &relevant {
                    avoid.insert(v.name.clone());
                    avoid.extend(free_vars(r).into_iter().map(|v| v.name));
                }
                let y2 = fresh_var(y, &avoid);
                let mut ren = BTreeMap::new();
                ren.insert(y.clone(), Term::Var(y2.clone()));
                let body2 = subst_in(body, &ren);
                Term::Mu(y2, Box::new(subst_in(&body2, &relevant)))
            } else {
                Term::Mu(y.clone(), Box::new(subst_in(body, &relevant)))
            }
        }
        Term::Agent(_) | Term::Bottom => t.clone(),
    }
}

/// A variable of the same sort whose name is not in `avoid`.
pub fn fresh_var(base: &Var, avoid: &BTreeSet<String>) -> Var {
    if !avoid.contains(&base.name) {
        return base.clone();
    }
    (1..)
        .map(|i| base.with_name(format!("{}_{}", base.name, i)))
        .find(|v| !avoid.contains(&v.name))
        .unwrap()
}

fn is_redex(t: &Term) -> Option<&Term> {
    if let Term::App(d, dargs) = t {
        if d.name == DEC && dargs.len() == 2 {
            if let (Term::App(sk, ka), Term::App(e, eargs)) = (&dargs[0], &dargs[1]) {
                if sk.name == SK && ka.len() == 1 && e.name == ENC && eargs.len() == 2 {
                    if let Term::App(pk, pa) = &eargs[0] {
                        if pk.name == PK && pa.len() == 1 && pa[0] == ka[0] {
                            return Some(&eargs[1]);
                        }
                    }
                }
            }
        }
    }
    None
}

/// Rewrites `D(kbar(w), E(k(w), s)) -> s` outermost-first until no redex remains.
pub fn normalize_decr(t: &Term) -> Term {
    let mut cur = t;
    while let Some(s) = is_redex(cur) {
        cur = s;
    }
    let out = match cur {
        Term::App(op, args) => Term::App(op.clone(), args.iter().map(normalize_decr).collect()),
        Term::Mu(y, body) => match normalize_decr(body) {
            Term::Var(v) if &v == y => Term::Bottom,
            b => Term::Mu(y.clone(), Box::new(b)),
        },
        other => other.clone(),
    };
    if is_redex(&out).is_some() {
        normalize_decr(&out)
    } else {
        out
    }
}

/// Paths (argument indices from the root) of every decryption redex in a μ-free term.
pub fn redex_positions(t: &Term) -> Vec<Vec<usize>> {
    fn walk(t: &Term, path: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if is_redex(t).is_some() {
            out.push(path.clone());
        }
        if let Term::App(_, args) = t {
            for (i, a) in args.iter().enumerate() {
                path.push(i);
                walk(a, path, out);
                path.pop();
            }
        }
    }
    let mut out = Vec::new();
    walk(t, &mut Vec::new(), &mut out);
    out
}

/// Contracts the redex at `path`; `None` if there is none there.
pub fn rewrite_at(t: &Term, path: &[usize]) -> Option<Term> {
    match path.split_first() {
        None => is_redex(t).cloned(),
        Some((&i, rest)) => match t {
            Term::App(op, args) if i < args.len() => {
                let mut args = args.clone();
                args[i] = rewrite_at(&args[i], rest)?;
                Some(Term::App(op.clone(), args))
            }
            _ => None,
        },
    }
}

/// Rewrites until normal, letting `choose(n)` pick one of the `n` current redexes.
pub fn normalize_decr_with(t: &Term, mut choose: impl FnMut(usize) -> usize) -> Term {
    let mut cur = t.clone();
    loop {
        let redexes = redex_positions(&cur);
        if redexes.is_empty() {
            return cur;
        }
        let k = choose(redexes.len()) % redexes.len();
        cur = rewrite_at(&cur, &redexes[k]).expect("position holds a redex");
    }
}

pub fn is_decr_normal(t: &Term) -> bool {
    let mut normal = true;
    t.for_each_subterm(&mut |s| {
        if is_redex(s).is_some() {
            normal = false;
        }
    });
    normal
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Equation {
    pub lhs: Var,
    pub rhs: Term,
}

impl Equation {
    pub fn new(lhs: Var, rhs: Term) -> Self {
        Equation { lhs, rhs }
    }
}

/// Equations `y_i = t_i`; the traced variables are the left-hand sides in order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GuardedSystem {
    pub equations: Vec<Equation>,
}

impl GuardedSystem {
    pub fn new(equations: Vec<Equation>) -> Self {
        GuardedSystem { equations }
    }

    pub fn traced(&self) -> Vec<Var> {
        self.equations.iter().map(|e| e.lhs.clone()).collect()
    }

    pub fn rhs(&self, y: &Var) -> Option<&Term> {
        self.equations.iter().find(|e| &e.lhs == y).map(|e| &e.rhs)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VarClass {
    pub rep: Var,
    /// All members in traced order, including the representative.
    pub members: Vec<Var>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartitionedSystem {
    pub guarded: GuardedSystem,
    pub classes: Vec<VarClass>,
    /// Representatives of classes without a guarded root; they stay free.
    pub freed: Vec<Var>,
}

/// Splits off the unguarded (bare traced variable) equations into classes.
pub fn partition_system(sys: &GuardedSystem) -> Result<PartitionedSystem, TermError> {
    let traced = sys.traced();
    let pos: HashMap<&Var, usize> = traced.iter().enumerate().map(|(i, v)| (v, i)).collect();
    if pos.len() != traced.len() {
        return Err(TermError::State("duplicate traced variable".into()));
    }
    for e in &sys.equations {
        if e.lhs.sort != e.rhs.sort() {
            return Err(TermError::Sort { var: e.lhs.name.clone(), term: e.rhs.to_string() });
        }
    }
    let n = traced.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while p[r] != r {
            r = p[r];
        }
        let mut j = i;
        while p[j] != r {
            let next = p[j];
            p[j] = r;
            j = next;
        }
        r
    }
    let mut unguarded = vec![false; n];
    for (i, e) in sys.equations.iter().enumerate() {
        if let Term::Var(z) = &e.rhs {
            if let Some(&j) = pos.get(z) {
                unguarded[i] = true;
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                // keep the least position as root
                if a < b {
                    parent[b] = a;
                } else {
                    parent[a] = b;
                }
            }
        }
    }
    let mut members: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        members.entry(r).or_default().push(i);
    }
    let rep_of: Vec<usize> = (0..n).map(|i| find(&mut parent, i)).collect();
    let rename: BTreeMap<Var, Term> = (0..n)
        .filter(|&i| rep_of[i] != i)
        .map(|i| (traced[i].clone(), Term::Var(traced[rep_of[i]].clone())))
        .collect();

    let mut classes = Vec::new();
    let mut freed = Vec::new();
    let mut guarded = Vec::new();
    for (&r, ms) in &members {
        let root = ms.iter().copied().find(|&i| !unguarded[i]);
        if ms.len() > 1 || root.is_none() {
            classes.push(VarClass {
                rep: traced[r].clone(),
                members: ms.iter().map(|&i| traced[i].clone()).collect(),
            });
        }
        match root {
            Some(i) => guarded.push(Equation::new(traced[r].clone(), subst_in(&sys.equations[i].rhs, &rename))),
            None => freed.push(traced[r].clone()),
        }
    }
    Ok(PartitionedSystem { guarded: GuardedSystem::new(guarded), classes, freed })
}

/// Solves a partitioned system by Gaussian elimination in equation order.
pub fn solve_iterative(ps: &PartitionedSystem) -> Result<Subst, TermError> {
    let order: Vec<usize> = (0..ps.guarded.equations.len()).collect();
    solve_with_order(ps, &order)
}

/// As [`solve_iterative`], eliminating the guarded equations in the given order.
pub fn solve_with_order(ps: &PartitionedSystem, order: &[usize]) -> Result<Subst, TermError> {
    let eqs = &ps.guarded.equations;
    let lhs: BTreeSet<&Var> = eqs.iter().map(|e| &e.lhs).collect();
    if lhs.len() != eqs.len() {
        return Err(TermError::State("duplicate guarded variable".into()));
    }
    for e in eqs {
        if let Term::Var(z) = &e.rhs {
            if lhs.contains(z) {
                return Err(TermError::State(format!("unguarded equation {} = {}", e.lhs, z)));
            }
        }
    }
    let mut seen = vec![false; eqs.len()];
    if order.len() != eqs.len() || order.iter().any(|&i| i >= eqs.len() || std::mem::replace(&mut seen[i], true)) {
        return Err(TermError::State("elimination order is not a permutation".into()));
    }
    let mut rhs: Vec<Term> = eqs.iter().map(|e| e.rhs.clone()).collect();
    for &i in order {
        let y = &eqs[i].lhs;
        if occurs_free(y, &rhs[i]) {
            rhs[i] = Term::mu(y.clone(), rhs[i].clone());
        }
        let mut one = BTreeMap::new();
        one.insert(y.clone(), rhs[i].clone());
        for j in 0..rhs.len() {
            if j != i {
                rhs[j] = subst_in(&rhs[j], &one);
            }
        }
    }
    let solved: BTreeMap<&Var, &Term> = eqs.iter().map(|e| &e.lhs).zip(rhs.iter()).collect();
    let mut out = Subst::new();
    for e in eqs {
        out.insert(e.lhs.clone(), solved[&e.lhs].clone())?;
    }
    for c in &ps.classes {
        let value = match solved.get(&c.rep) {
            Some(t) => (*t).clone(),
            None => Term::Var(c.rep.clone()),
        };
        for m in &c.members {
            if m != &c.rep || !solved.contains_key(m) {
                out.insert(m.clone(), value.clone())?;
            }
        }
    }
    Ok(out)
}

/// Unrolls every μ-binder `depth` times and cuts the rest off with ⊥.
pub fn unfold(t: &Term, depth: usize) -> Term {
    match t {
        Term::Mu(y, body) => {
            if depth == 0 {
                return Term::Bottom;
            }
            let inner = unfold(body, depth);
            let mut one = BTreeMap::new();
            one.insert(y.clone(), unfold(t, depth - 1));
            subst_in(&inner, &one)
        }
        Term::App(op, args) => Term::App(op.clone(), args.iter().map(|a| unfold(a, depth)).collect()),
        _ => t.clone(),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum NodeLabel {
    Var(Var),
    Agent(String),
    Op(OpSym),
    Bottom,
}

#[derive(Clone, Debug)]
enum Slot {
    Real(NodeLabel, Vec<usize>),
    Alias(usize),
    Pending,
}

/// The finite graph of a μ-term: one node per application/leaf, μ-binders
/// resolved to back edges.
struct TermGraph {
    nodes: Vec<(NodeLabel, Vec<usize>)>,
    root: usize,
}

impl TermGraph {
    fn build(t: &Term) -> TermGraph {
        let mut slots = Vec::new();
        let root = Self::add(t, &mut Vec::new(), &mut slots);
        let n = slots.len();
        let mut resolved: Vec<Option<usize>> = vec![None; n];
        let mut bottom = None;
        let mut nodes: Vec<(NodeLabel, Vec<usize>)> = Vec::new();
        let mut index = vec![usize::MAX; n];
        // resolve aliases; an alias cycle denotes an unguarded binder
        for i in 0..n {
            let mut j = i;
            let mut steps = 0;
            loop {
                match &slots[j] {
                    Slot::Alias(k) if steps <= n => {
                        j = *k;
                        steps += 1;
                    }
                    Slot::Real(..) => {
                        resolved[i] = Some(j);
                        break;
                    }
                    _ => break,
                }
            }
        }
        for i in 0..n {
            if let Slot::Real(..) = slots[i] {
                index[i] = nodes.len();
                nodes.push((NodeLabel::Bottom, vec![]));
            }
        }
        let mut target = |i: usize, nodes: &mut Vec<(NodeLabel, Vec<usize>)>| -> usize {
            match resolved[i] {
                Some(j) => index[j],
                None => *bottom.get_or_insert_with(|| {
                    nodes.push((NodeLabel::Bottom, vec![]));
                    nodes.len() - 1
                }),
            }
        };
        for i in 0..n {
            if let Slot::Real(label, children) = &slots[i] {
                let cs: Vec<usize> = children.iter().map(|&c| target(c, &mut nodes)).collect();
                nodes[index[i]] = (label.clone(), cs);
            }
        }
        let root = target(root, &mut nodes);
        TermGraph { nodes, root }
    }

    fn add(t: &Term, env: &mut Vec<(Var, usize)>, slots: &mut Vec<Slot>) -> usize {
        match t {
            Term::Var(v) => {
                if let Some((_, id)) = env.iter().rev().find(|(w, _)| w == v) {
                    return *id;
                }
                slots.push(Slot::Real(NodeLabel::Var(v.clone()), vec![]));
                slots.len() - 1
            }
            Term::Agent(a) => {
                slots.push(Slot::Real(NodeLabel::Agent(a.clone()), vec![]));
                slots.len() - 1
            }
            Term::Bottom => {
                slots.push(Slot::Real(NodeLabel::Bottom, vec![]));
                slots.len() - 1
            }
            Term::App(op, args) => {
                let id = slots.len();
                slots.push(Slot::Pending);
                let cs = args.iter().map(|a| Self::add(a, env, slots)).collect();
                slots[id] = Slot::Real(NodeLabel::Op(op.clone()), cs);
                id
            }
            Term::Mu(y, body) => {
                let id = slots.len();
                slots.push(Slot::Pending);
                env.push((y.clone(), id));
                let b = Self::add(body, env, slots);
                env.pop();
                slots[id] = if b == id { Slot::Pending } else { Slot::Alias(b) };
                id
            }
        }
    }

    /// Coarsest bisimulation partition: class id per node.
    fn minimize(&self) -> Vec<usize> {
        let mut ids: HashMap<&NodeLabel, usize> = HashMap::new();
        let mut class: Vec<usize> = self
            .nodes
            .iter()
            .map(|(l, _)| {
                let k = ids.len();
                *ids.entry(l).or_insert(k)
            })
            .collect();
        let mut count = ids.len();
        loop {
            let mut sig: HashMap<(usize, Vec<usize>), usize> = HashMap::new();
            let next: Vec<usize> = self
                .nodes
                .iter()
                .enumerate()
                .map(|(i, (_, cs))| {
                    let key = (class[i], cs.iter().map(|&c| class[c]).collect());
                    let k = sig.len();
                    *sig.entry(key).or_insert(k)
                })
                .collect();
            let new_count = sig.len();
            class = next;
            if new_count == count {
                return class;
            }
            count = new_count;
        }
    }
}

/// Decides equality of the rational trees denoted by two terms.
pub fn term_equal(t1: &Term, t2: &Term) -> bool {
    if t1 == t2 {
        return true;
    }
    let g1 = TermGraph::build(t1);
    let g2 = TermGraph::build(t2);
    let off = g1.nodes.len();
    let node = |i: usize| if i < off { &g1.nodes[i] } else { &g2.nodes[i - off] };
    let mut parent: Vec<usize> = (0..off + g2.nodes.len()).collect();
    fn find(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    let mut work = vec![(g1.root, g2.root + off)];
    while let Some((a, b)) = work.pop() {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra == rb {
            continue;
        }
        let (la, ca) = node(a);
        let (lb, cb) = node(b);
        if la != lb || ca.len() != cb.len() {
            return false;
        }
        parent[ra] = rb;
        let shift = |c: usize, base: usize| if base < off { c } else { c + off };
        for (x, y) in ca.iter().zip(cb) {
            work.push((shift(*x, a), shift(*y, b)));
        }
    }
    true
}

/// Canonical representative of a rational tree: minimal graph re-emitted
/// depth-first, binders named `_m0, _m1, ...` in pre-order.
pub fn canonical_term(t: &Term) -> Term {
    if !t.contains_mu() {
        return t.clone();
    }
    let g = TermGraph::build(t);
    let class = g.minimize();
    let mut rep: BTreeMap<usize, usize> = BTreeMap::new();
    for (i, c) in class.iter().enumerate() {
        rep.entry(*c).or_insert(i);
    }
    let mut stack = Vec::new();
    let mut referenced = BTreeSet::new();
    let raw = emit(&g, &class, &rep, class[g.root], &mut stack, &mut referenced);
    let mut counter = 0;
    rename_binders(&raw, &mut counter)
}

fn placeholder(c: usize) -> Var {
    Var::data(format!("#c{c}"))
}

fn emit(
    g: &TermGraph,
    class: &[usize],
    rep: &BTreeMap<usize, usize>,
    c: usize,
    stack: &mut Vec<usize>,
    referenced: &mut BTreeSet<usize>,
) -> Term {
    let (label, children) = &g.nodes[rep[&c]];
    stack.push(c);
    let body = match label {
        NodeLabel::Var(v) => Term::Var(v.clone()),
        NodeLabel::Agent(a) => Term::Agent(a.clone()),
        NodeLabel::Bottom => Term::Bottom,
        NodeLabel::Op(op) => Term::App(
            op.clone(),
            children
                .iter()
                .map(|&ch| {
                    let cc = class[ch];
                    if stack.contains(&cc) {
                        referenced.insert(cc);
                        Term::Var(placeholder(cc))
                    } else {
                        emit(g, class, rep, cc, stack, referenced)
                    }
                })
                .collect(),
        ),
    };
    stack.pop();
    if referenced.remove(&c) {
        Term::mu(placeholder(c), body)
    } else {
        body
    }
}

fn rename_binders(t: &Term, counter: &mut usize) -> Term {
    match t {
        Term::Mu(y, body) => {
            let y2 = y.with_name(format!("_m{}", *counter));
            *counter += 1;
            let mut one = BTreeMap::new();
            one.insert(y.clone(), Term::Var(y2.clone()));
            let body = subst_in(body, &one);
            Term::mu(y2, rename_binders(&body, counter))
        }
        Term::App(op, args) => Term::App(op.clone(), args.iter().map(|a| rename_binders(a, counter)).collect()),
        _ => t.clone(),
    }
}

/// A tuple of terms over the positional variables `x1..x_arity`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CloneTuple {
    pub arity: usize,
    pub terms: Vec<Term>,
}

/// The i-th (1-based) positional variable of a clone tuple.
pub fn clone_var(i: usize) -> Var {
    Var::data(format!("x{i}"))
}

impl CloneTuple {
    pub fn new(arity: usize, terms: Vec<Term>) -> Self {
        CloneTuple { arity, terms }
    }

    pub fn identity(n: usize) -> Self {
        CloneTuple { arity: n, terms: (1..=n).map(|i| Term::Var(clone_var(i))).collect() }
    }
}

/// Substitutes `psi` for `x1..x_n` in every component of `phi`.
pub fn clone_compose(phi: &CloneTuple, psi: &CloneTuple) -> Result<CloneTuple, TermError> {
    if psi.terms.len() != phi.arity {
        return Err(TermError::Arity { expected: phi.arity, found: psi.terms.len() });
    }
    let sigma = Subst::from_pairs((1..=phi.arity).map(clone_var).zip(psi.terms.iter().cloned()))?;
    Ok(CloneTuple { arity: psi.arity, terms: phi.terms.iter().map(|t| sigma.apply(t)).collect() })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(n: &str) -> Term {
        Term::data_var(n)
    }
    fn f(a: Term) -> Term {
        Term::app("f", vec![a])
    }

    #[test]
    fn substitution_examples() {
        let t = Term::enc(Term::pk(Term::agent_var("Y")), Term::pair(Term::agent_var("X"), x("m")));
        let s = Subst::singleton(Var::agent("Y"), Term::agent("B")).unwrap();
        assert_eq!(
            s.apply(&t),
            Term::enc(Term::pk(Term::agent("B")), Term::pair(Term::agent_var("X"), x("m")))
        );
        assert_eq!(Subst::new().apply(&x("y")), x("y"));
        let s = Subst::singleton(Var::data("y"), f(x("x"))).unwrap();
        assert_eq!(s.apply(&Term::pair(x("y"), x("y"))), Term::pair(f(x("x")), f(x("x"))));
    }

    #[test]
    fn sort_mismatch_rejected() {
        assert!(matches!(Subst::singleton(Var::agent("Y"), x("m")), Err(TermError::Sort { .. })));
    }

    #[test]
    fn substitution_avoids_capture() {
        // mu y. g(y, x) with x := y must not capture
        let t = Term::mu(Var::data("y"), Term::app("g", vec![x("y"), x("x")]));
        let s = Subst::singleton(Var::data("x"), x("y")).unwrap();
        let r = s.apply(&t);
        assert!(free_vars(&r).contains(&Var::data("y")));
        let expected = Term::mu(Var::data("z"), Term::app("g", vec![x("z"), x("y")]));
        assert!(term_equal(&r, &expected));
    }

    #[test]
    fn free_vars_examples() {
        let t = Term::enc(Term::pk(Term::agent_var("X")), x("y"));
        assert_eq!(free_vars(&t), [Var::agent("X"), Var::data("y")].into_iter().collect());
        let t = Term::mu(Var::data("y"), Term::app("f", vec![x("y"), x("x")]));
        assert_eq!(free_vars(&t), [Var::data("x")].into_iter().collect());
    }

    #[test]
    fn decryption_examples() {
        let a = Term::agent("A");
        let b = Term::agent("B");
        let t = Term::dec(Term::sk(a.clone()), Term::enc(Term::pk(a.clone()), x("m")));
        assert_eq!(normalize_decr(&t), x("m"));
        let t = Term::dec(Term::sk(a.clone()), Term::enc(Term::pk(b), x("m")));
        assert_eq!(normalize_decr(&t), t);
        let t = Term::pair(
            Term::dec(Term::sk(a.clone()), Term::enc(Term::pk(a.clone()), x("m"))),
            Term::dec(Term::sk(a.clone()), Term::enc(Term::pk(a.clone()), x("n"))),
        );
        assert_eq!(normalize_decr(&t), Term::pair(x("m"), x("n")));
        // redex created by an inner step
        let inner = Term::dec(Term::sk(b_()), Term::enc(Term::pk(b_()), Term::enc(Term::pk(a.clone()), x("s"))));
        let t = Term::dec(Term::sk(a), inner);
        assert_eq!(normalize_decr(&t), x("s"));
    }

    fn b_() -> Term {
        Term::agent("B")
    }

    #[test]
    fn partition_examples() {
        let (y1, y2) = (Var::data("y1"), Var::data("y2"));
        let sys = GuardedSystem::new(vec![
            Equation::new(y1.clone(), Term::var(&y2)),
            Equation::new(y2.clone(), Term::var(&y1)),
        ]);
        let ps = partition_system(&sys).unwrap();
        assert!(ps.guarded.equations.is_empty());
        assert_eq!(ps.classes, vec![VarClass { rep: y1.clone(), members: vec![y1.clone(), y2.clone()] }]);
        assert_eq!(ps.freed, vec![y1.clone()]);

        let sys = GuardedSystem::new(vec![Equation::new(y1.clone(), Term::app("g", vec![x("x")]))]);
        let ps = partition_system(&sys).unwrap();
        assert_eq!(ps.guarded, sys);
        assert!(ps.classes.is_empty());

        let sys = GuardedSystem::new(vec![
            Equation::new(y1.clone(), Term::var(&y2)),
            Equation::new(y2.clone(), f(Term::var(&y1))),
        ]);
        let ps = partition_system(&sys).unwrap();
        assert_eq!(ps.guarded.equations, vec![Equation::new(y1.clone(), f(Term::var(&y1)))]);
        assert_eq!(ps.classes.len(), 1);
        let sol = solve_iterative(&ps).unwrap();
        for e in &sys.equations {
            assert!(term_equal(&sol.apply(&e.rhs), sol.get(&e.lhs).unwrap()));
        }
    }

    #[test]
    fn solver_examples() {
        let y = Var::data("y");
        let ps = partition_system(&GuardedSystem::new(vec![Equation::new(y.clone(), Term::app("g", vec![x("x")]))])).unwrap();
        assert_eq!(solve_iterative(&ps).unwrap().get(&y), Some(&Term::app("g", vec![x("x")])));

        let ps = partition_system(&GuardedSystem::new(vec![Equation::new(y.clone(), f(x("y")))])).unwrap();
        assert_eq!(solve_iterative(&ps).unwrap().get(&y), Some(&Term::mu(y.clone(), f(x("y")))));

        let (y1, y2) = (Var::data("y1"), Var::data("y2"));
        let a = Term::agent("A");
        let sys = GuardedSystem::new(vec![
            Equation::new(y1.clone(), Term::pair(x("y2"), x("x"))),
            Equation::new(y2.clone(), Term::enc(Term::pk(a.clone()), x("y1"))),
        ]);
        let sol = solve_iterative(&partition_system(&sys).unwrap()).unwrap();
        let m = Term::mu(y1.clone(), Term::pair(Term::enc(Term::pk(a.clone()), x("y1")), x("x")));
        assert!(term_equal(sol.get(&y1).unwrap(), &m));
        assert!(term_equal(sol.get(&y2).unwrap(), &Term::enc(Term::pk(a), m)));
        for e in &sys.equations {
            let lhs = unfold(sol.get(&e.lhs).unwrap(), 10);
            let rhs = unfold(&sol.apply(&e.rhs), 10);
            assert_eq!(prefix(&lhs, 8), prefix(&rhs, 8));
        }
    }

    #[test]
    fn unpartitioned_input_is_a_state_error() {
        let (y1, y2) = (Var::data("y1"), Var::data("y2"));
        let ps = PartitionedSystem {
            guarded: GuardedSystem::new(vec![
                Equation::new(y1.clone(), Term::var(&y2)),
                Equation::new(y2, f(Term::var(&y1))),
            ]),
            classes: vec![],
            freed: vec![],
        };
        assert!(matches!(solve_iterative(&ps), Err(TermError::State(_))));
    }

    /// Cut a μ-free tree at the given depth.
    fn prefix(t: &Term, d: usize) -> Term {
        match t {
            _ if d == 0 => Term::Bottom,
            Term::App(op, args) => Term::App(op.clone(), args.iter().map(|a| prefix(a, d - 1)).collect()),
            other => other.clone(),
        }
    }

    #[test]
    fn unfold_examples() {
        let y = Var::data("y");
        assert_eq!(unfold(&Term::mu(y.clone(), f(x("y"))), 2), f(f(Term::Bottom)));
        let g = Term::app("g", vec![x("x")]);
        assert_eq!(unfold(&g, 5), g);
        let a = Term::constant("a");
        let t = Term::mu(y.clone(), Term::pair(a.clone(), x("y")));
        assert_eq!(
            unfold(&t, 3),
            Term::pair(a.clone(), Term::pair(a.clone(), Term::pair(a, Term::Bottom)))
        );
    }

    #[test]
    fn term_equal_examples() {
        let y = Var::data("y");
        let m = Term::mu(y.clone(), f(x("y")));
        assert!(term_equal(&m, &f(m.clone())));
        assert!(term_equal(&m, &Term::mu(Var::data("z"), f(x("z")))));
        let m2 = Term::mu(y.clone(), f(f(x("y"))));
        assert!(term_equal(&m2, &m));
        assert_eq!(prefix(&unfold(&m2, 12), 12), prefix(&unfold(&m, 12), 12));
        assert!(!term_equal(&m, &Term::mu(y, Term::app("g", vec![x("y")]))));
        assert!(!term_equal(&x("a"), &x("b")));
    }

    #[test]
    fn canonical_form_is_shared_by_equal_trees() {
        let y = Var::data("y");
        let a = canonical_term(&Term::mu(y.clone(), f(f(x("y")))));
        let b = canonical_term(&f(Term::mu(Var::data("q"), f(x("q")))));
        assert_eq!(a, b);
        assert_eq!(a, Term::mu(Var::data("_m0"), f(x("_m0"))));
        assert_eq!(canonical_term(&a), a);
    }

    #[test]
    fn clone_composition_examples() {
        let g = Term::app("g", vec![Term::Var(clone_var(1))]);
        let r = clone_compose(&CloneTuple::identity(1), &CloneTuple::new(1, vec![g.clone()])).unwrap();
        assert_eq!(r.terms, vec![g]);
        let phi = CloneTuple::new(2, vec![Term::app("f", vec![Term::Var(clone_var(1)), Term::Var(clone_var(2))])]);
        let (a, b) = (Term::constant("a"), Term::constant("b"));
        let r = clone_compose(&phi, &CloneTuple::new(0, vec![a.clone(), b.clone()])).unwrap();
        assert_eq!(r.terms, vec![Term::app("f", vec![a, b])]);
        let swap = CloneTuple::new(2, vec![Term::Var(clone_var(2)), Term::Var(clone_var(1))]);
        let (s, t) = (x("s"), x("t"));
        let r = clone_compose(&swap, &CloneTuple::new(2, vec![s.clone(), t.clone()])).unwrap();
        assert_eq!(r.terms, vec![t, s]);
        assert!(matches!(clone_compose(&swap, &CloneTuple::identity(1)), Err(TermError::Arity { .. })));
    }
}
