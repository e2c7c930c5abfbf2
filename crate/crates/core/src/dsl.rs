//! The `.cord` source format: processes, interactions, protocols and goals.
//!
//! ```text
//! process ID = free { Y:agent } (x, A:agent) [ s @ A : send(E(k(A), x)) ] <x>;
//! interaction P = int <A:agent; x> -> <; > = (A:agent, x) [] <x, A>;
//! protocol S = P run { r <- s } bind { Y := X };
//! goal G = agree x ~ y secret m from A, B;
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use thiserror::Error;

use crate::cords::{Action, CordSpace, Event, Run};
use crate::int_cat::{int_compose, IntObject, Interaction, Strategy};
use crate::proc_cat::{Arity, CordProcess};
use crate::protocols::{Protocol, SecurityGoal};
use crate::terms::{Sort, Subst, Term, Var};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DslError {
    #[error("{line}:{col}: {message}")]
    Syntax { line: usize, col: usize, message: String },
    #[error("in {decl}: {message}")]
    Invalid { decl: String, message: String },
    #[error("no declaration named {0}")]
    Missing(String),
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    AgentConst(String),
    Sym(&'static str),
    Bottom,
    Eof,
}

#[derive(Clone, Debug)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '\''
}

const SYMBOLS: [&str; 19] =
    ["->", "<-", ":=", "(", ")", "[", "]", "<", ">", "{", "}", ",", ";", ":", "=", "@", ".", "~", "-"];

fn lex(text: &str) -> Result<Vec<Spanned>, DslError> {
    let chars: Vec<char> = text.chars().collect();
    let (mut i, mut line, mut col) = (0, 1, 1);
    let mut out = Vec::new();
    let advance = |i: &mut usize, line: &mut usize, col: &mut usize, n: usize| {
        for k in 0..n {
            if chars[*i + k] == '\n' {
                *line += 1;
                *col = 1;
            } else {
                *col += 1;
            }
        }
        *i += n;
    };
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            advance(&mut i, &mut line, &mut col, 1);
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                advance(&mut i, &mut line, &mut col, 1);
            }
            continue;
        }
        let (l0, c0) = (line, col);
        if is_ident_start(c) {
            let start = i;
            let mut j = i;
            while j < chars.len() && is_ident_char(chars[j]) {
                j += 1;
            }
            let s: String = chars[start..j].iter().collect();
            advance(&mut i, &mut line, &mut col, j - start);
            out.push(Spanned { tok: Tok::Ident(s), line: l0, col: c0 });
            continue;
        }
        if c == '#' {
            let mut j = i + 1;
            while j < chars.len() && is_ident_char(chars[j]) {
                j += 1;
            }
            if j == i + 1 {
                return Err(DslError::Syntax { line, col, message: "expected an agent name after #".into() });
            }
            let s: String = chars[i + 1..j].iter().collect();
            let n = j - i;
            advance(&mut i, &mut line, &mut col, n);
            out.push(Spanned { tok: Tok::AgentConst(s), line: l0, col: c0 });
            continue;
        }
        if c == '⊥' {
            advance(&mut i, &mut line, &mut col, 1);
            out.push(Spanned { tok: Tok::Bottom, line: l0, col: c0 });
            continue;
        }
        let rest: String = chars[i..(i + 2).min(chars.len())].iter().collect();
        match SYMBOLS.iter().find(|s| rest.starts_with(**s)) {
            Some(s) => {
                advance(&mut i, &mut line, &mut col, s.chars().count());
                out.push(Spanned { tok: Tok::Sym(s), line: l0, col: c0 });
            }
            None => return Err(DslError::Syntax { line, col, message: format!("unexpected character {c:?}") }),
        }
    }
    out.push(Spanned { tok: Tok::Eof, line, col });
    Ok(out)
}

/// How a protocol's process is obtained.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Source {
    Named(String),
    IntCompose(String, String, Strategy),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Decl {
    Process { name: String, process: CordProcess },
    Interaction { name: String, interaction: Interaction },
    Protocol { name: String, source: Source, runs: Vec<Run>, bindings: Vec<(String, Term)> },
    Goal { name: String, goal: SecurityGoal },
}

impl Decl {
    pub fn name(&self) -> &str {
        match self {
            Decl::Process { name, .. }
            | Decl::Interaction { name, .. }
            | Decl::Protocol { name, .. }
            | Decl::Goal { name, .. } => name,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SourceFile {
    pub decls: Vec<Decl>,
}

impl SourceFile {
    pub fn get(&self, name: &str) -> Result<&Decl, DslError> {
        self.decls.iter().find(|d| d.name() == name).ok_or_else(|| DslError::Missing(name.to_string()))
    }

    pub fn process(&self, name: &str) -> Result<CordProcess, DslError> {
        match self.get(name)? {
            Decl::Process { process, .. } => Ok(process.clone()),
            Decl::Interaction { interaction, .. } => Ok(interaction.body.clone()),
            Decl::Protocol { .. } => self.protocol(name).map(|p| p.process),
            Decl::Goal { .. } => Err(invalid(name, "a goal is not a process")),
        }
    }

    pub fn interaction(&self, name: &str) -> Result<Interaction, DslError> {
        match self.get(name)? {
            Decl::Interaction { interaction, .. } => Ok(interaction.clone()),
            _ => Err(invalid(name, "not an interaction")),
        }
    }

    pub fn goal(&self, name: &str) -> Result<SecurityGoal, DslError> {
        match self.get(name)? {
            Decl::Goal { goal, .. } => Ok(goal.clone()),
            _ => Err(invalid(name, "not a goal")),
        }
    }

    pub fn protocol(&self, name: &str) -> Result<Protocol, DslError> {
        let Decl::Protocol { source, runs, bindings, .. } = self.get(name)? else {
            return Err(invalid(name, "not a protocol"));
        };
        let process = match source {
            Source::Named(n) => self.process(n)?,
            Source::IntCompose(p, q, s) => {
                int_compose(&self.interaction(p)?, &self.interaction(q)?, *s)
                    .map_err(|e| invalid(name, e.to_string()))?
                    .body
            }
        };
        let table = process_sorts(&process);
        let mut sigma = Subst::new();
        for (v, t) in bindings {
            let sort = *table.get(v.as_str()).ok_or_else(|| invalid(name, format!("{v} is not a variable of the process")))?;
            let t = fix_sorts(t, &table, &mut Vec::new()).map_err(|m| invalid(name, m))?;
            sigma.insert(Var { name: v.clone(), sort }, t).map_err(|e| invalid(name, e.to_string()))?;
        }
        Protocol::new(process, runs.clone(), sigma).map_err(|e| invalid(name, e.to_string()))
    }
}

fn invalid(decl: &str, message: impl Into<String>) -> DslError {
    DslError::Invalid { decl: decl.to_string(), message: message.into() }
}

fn process_sorts(p: &CordProcess) -> BTreeMap<String, Sort> {
    let mut t = BTreeMap::new();
    let mut add = |v: &Var| {
        t.insert(v.name.clone(), v.sort);
    };
    p.inputs().iter().for_each(&mut add);
    p.context().iter().for_each(&mut add);
    p.freed().iter().for_each(&mut add);
    p.bound_vars().iter().for_each(&mut add);
    p.free_vars().iter().for_each(&mut add);
    t
}

/// Gives every variable the sort declared for its name; μ-binders shadow.
fn fix_sorts(t: &Term, table: &BTreeMap<String, Sort>, bound: &mut Vec<Var>) -> Result<Term, String> {
    Ok(match t {
        Term::Var(v) => {
            if let Some(b) = bound.iter().rev().find(|b| b.name == v.name) {
                Term::Var(b.clone())
            } else {
                let sort = table.get(&v.name).ok_or_else(|| format!("unbound variable {}", v.name))?;
                Term::Var(Var { name: v.name.clone(), sort: *sort })
            }
        }
        Term::App(op, args) => {
            Term::App(op.clone(), args.iter().map(|a| fix_sorts(a, table, bound)).collect::<Result<_, _>>()?)
        }
        Term::Mu(y, b) => {
            bound.push(y.clone());
            let body = fix_sorts(b, table, bound);
            bound.pop();
            Term::Mu(y.clone(), Box::new(body?))
        }
        other => other.clone(),
    })
}

struct RawEvent {
    label: String,
    agent: Term,
    action: Action,
    after: Vec<String>,
    line: usize,
    col: usize,
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    /// Sorts declared by annotations in the process being parsed.
    declared: BTreeMap<String, Sort>,
}

type PResult<T> = Result<T, DslError>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn here(&self) -> (usize, usize) {
        let s = &self.toks[self.pos];
        (s.line, s.col)
    }

    fn err<T>(&self, message: impl Into<String>) -> PResult<T> {
        let (line, col) = self.here();
        Err(DslError::Syntax { line, col, message: message.into() })
    }

    fn next(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(x) if *x == s)
    }

    fn is_kw(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Ident(x) if x == s)
    }

    fn eat(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.next();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, s: &str) -> PResult<()> {
        if self.eat(s) {
            Ok(())
        } else {
            self.err(format!("expected `{s}`, found {}", describe(self.peek())))
        }
    }

    fn expect_kw(&mut self, s: &str) -> PResult<()> {
        if self.is_kw(s) {
            self.next();
            Ok(())
        } else {
            self.err(format!("expected `{s}`, found {}", describe(self.peek())))
        }
    }

    fn ident(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.next();
                Ok(s)
            }
            other => self.err(format!("expected an identifier, found {}", describe(&other))),
        }
    }

    /// A declaration name: identifiers joined by hyphens.
    fn decl_name(&mut self) -> PResult<String> {
        let mut name = self.ident()?;
        while self.is_sym("-") && matches!(self.peek_at(1), Tok::Ident(_)) {
            self.next();
            name.push('-');
            name.push_str(&self.ident()?);
        }
        Ok(name)
    }

    fn annotated(&mut self) -> PResult<Var> {
        let name = self.ident()?;
        let sort = if self.is_sym(":") && matches!(self.peek_at(1), Tok::Ident(s) if s == "agent") {
            self.next();
            self.next();
            self.declared.insert(name.clone(), Sort::Agent);
            Sort::Agent
        } else {
            Sort::Data
        };
        Ok(Var { name, sort })
    }

    fn entries(&mut self, stop: &[&str]) -> PResult<Vec<Var>> {
        let mut out = Vec::new();
        if stop.iter().any(|s| self.is_sym(s)) {
            return Ok(out);
        }
        loop {
            out.push(self.annotated()?);
            if !self.eat(",") {
                return Ok(out);
            }
        }
    }

    fn term(&mut self) -> PResult<Term> {
        match self.peek().clone() {
            Tok::AgentConst(a) => {
                self.next();
                Ok(Term::Agent(a))
            }
            Tok::Bottom => {
                self.next();
                Ok(Term::Bottom)
            }
            Tok::Sym("(") => {
                self.next();
                let mut items = vec![self.term()?];
                while self.eat(",") {
                    items.push(self.term()?);
                }
                self.expect(")")?;
                Ok(Term::tuple(items))
            }
            Tok::Ident(s) if s == "mu" && matches!(self.peek_at(1), Tok::Ident(_)) => {
                self.next();
                let y = self.ident()?;
                let sort = if self.eat(":") {
                    self.expect_kw("agent")?;
                    Sort::Agent
                } else {
                    Sort::Data
                };
                self.expect(".")?;
                let body = self.term()?;
                Ok(Term::mu(Var { name: y, sort }, body))
            }
            Tok::Ident(s) => {
                self.next();
                if self.eat("(") {
                    let args = if self.is_sym(")") { vec![] } else { self.terms()? };
                    self.expect(")")?;
                    Ok(Term::app(&s, args))
                } else {
                    Ok(Term::data_var(&s))
                }
            }
            other => self.err(format!("expected a term, found {}", describe(&other))),
        }
    }

    fn terms(&mut self) -> PResult<Vec<Term>> {
        let mut out = vec![self.term()?];
        while self.eat(",") {
            out.push(self.term()?);
        }
        Ok(out)
    }

    /// Optional `src -> dst :` prefix of sends and receives.
    fn route(&mut self) -> PResult<(Option<Term>, Option<Term>, Option<Term>)> {
        let src = if self.is_sym("->") { None } else { Some(self.term()?) };
        if !self.eat("->") {
            return Ok((None, None, src));
        }
        let dst = if self.is_sym(":") { None } else { Some(self.term()?) };
        self.expect(":")?;
        Ok((src, dst, None))
    }

    fn action(&mut self) -> PResult<Action> {
        let kw = self.ident()?;
        self.expect("(")?;
        let act = match kw.as_str() {
            "send" => {
                let (src, dst, first) = self.route()?;
                let payload = match first {
                    Some(t) => t,
                    None => self.term()?,
                };
                Action::Send { src, dst, payload }
            }
            "recv" => {
                let mut binders = Vec::new();
                let (mut src, mut dst) = (None, None);
                if !self.is_sym(")") {
                    let (s, d, first) = self.route()?;
                    match first {
                        Some(Term::Var(v)) => {
                            let sort = if self.is_sym(":") {
                                self.next();
                                self.expect_kw("agent")?;
                                self.declared.insert(v.name.clone(), Sort::Agent);
                                Sort::Agent
                            } else {
                                Sort::Data
                            };
                            binders.push(Var { name: v.name, sort });
                        }
                        Some(_) => return self.err("receive binders must be variables"),
                        None => {
                            src = s;
                            dst = d;
                        }
                    }
                }
                while !self.is_sym(")") {
                    binders.push(self.annotated()?);
                }
                Action::Recv { src, dst, binders }
            }
            "new" => Action::New(self.annotated()?),
            "match" => {
                let mut left = Vec::new();
                loop {
                    let t = if matches!(self.peek(), Tok::Ident(_)) && !matches!(self.peek_at(1), Tok::Sym("(")) {
                        Term::Var(self.annotated()?)
                    } else {
                        self.term()?
                    };
                    left.push(t);
                    if !self.eat(",") {
                        break;
                    }
                }
                self.expect("=")?;
                Action::Match { left, right: self.terms()? }
            }
            other => return self.err(format!("unknown action {other}")),
        };
        self.expect(")")?;
        Ok(act)
    }

    fn event(&mut self) -> PResult<RawEvent> {
        let (line, col) = self.here();
        let label = self.ident()?;
        self.expect("@")?;
        let agent = self.term()?;
        self.expect(":")?;
        let action = self.action()?;
        let mut after = Vec::new();
        if self.is_kw("after") {
            self.next();
            while let Tok::Ident(_) = self.peek() {
                after.push(self.ident()?);
            }
            if after.is_empty() {
                return self.err("expected labels after `after`");
            }
        }
        Ok(RawEvent { label, agent, action, after, line, col })
    }

    fn process(&mut self, decl: &str) -> PResult<CordProcess> {
        self.declared.clear();
        let mut context = Vec::new();
        let mut freed = Vec::new();
        if self.is_kw("free") {
            self.next();
            self.expect("{")?;
            context = self.entries(&["}"])?;
            self.expect("}")?;
        }
        if self.is_kw("freed") {
            self.next();
            self.expect("{")?;
            freed = self.entries(&["}"])?;
            self.expect("}")?;
        }
        self.expect("(")?;
        let mut inputs = self.entries(&[")", ";"])?;
        if self.eat(";") {
            inputs.extend(self.entries(&[")"])?);
        }
        self.expect(")")?;
        self.expect("[")?;
        let mut events = Vec::new();
        if !self.is_sym("]") {
            loop {
                events.push(self.event()?);
                if !self.eat(",") {
                    break;
                }
            }
        }
        self.expect("]")?;
        self.expect("<")?;
        let outputs = if self.is_sym(">") { vec![] } else { self.terms()? };
        let mut outputs = outputs;
        if self.eat(";") && !self.is_sym(">") {
            outputs.extend(self.terms()?);
        }
        self.expect(">")?;
        self.assemble(decl, inputs, context, freed, events, outputs)
    }

    fn assemble(
        &self,
        decl: &str,
        inputs: Vec<Var>,
        context: Vec<Var>,
        freed: Vec<Var>,
        events: Vec<RawEvent>,
        outputs: Vec<Term>,
    ) -> PResult<CordProcess> {
        let mut table: BTreeMap<String, Sort> = BTreeMap::new();
        for v in inputs.iter().chain(&context).chain(&freed) {
            table.insert(v.name.clone(), v.sort);
        }
        for e in &events {
            for b in e.action.binders() {
                table.entry(b.name.clone()).or_insert(b.sort);
            }
        }
        for (n, s) in &self.declared {
            table.insert(n.clone(), *s);
        }
        let fix = |t: &Term| fix_sorts(t, &table, &mut Vec::new()).map_err(|m| invalid(decl, m));
        let var = |v: &Var| Var { name: v.name.clone(), sort: table[&v.name] };
        let mut space = CordSpace::new();
        for e in &events {
            let action = match &e.action {
                Action::Send { src, dst, payload } => Action::Send {
                    src: src.as_ref().map(&fix).transpose()?,
                    dst: dst.as_ref().map(&fix).transpose()?,
                    payload: fix(payload)?,
                },
                Action::Recv { src, dst, binders } => Action::Recv {
                    src: src.as_ref().map(&fix).transpose()?,
                    dst: dst.as_ref().map(&fix).transpose()?,
                    binders: binders.iter().map(var).collect(),
                },
                Action::New(v) => Action::New(var(v)),
                Action::Match { left, right } => Action::Match {
                    left: left.iter().map(&fix).collect::<Result<_, _>>()?,
                    right: right.iter().map(&fix).collect::<Result<_, _>>()?,
                },
            };
            let ev = Event::new(e.label.clone(), fix(&e.agent)?, action);
            space.add_event(ev).map_err(|_| DslError::Syntax {
                line: e.line,
                col: e.col,
                message: format!("duplicate label {}", e.label),
            })?;
        }
        for e in &events {
            for a in &e.after {
                space.add_order(a.clone(), e.label.clone()).map_err(|_| DslError::Syntax {
                    line: e.line,
                    col: e.col,
                    message: format!("unknown label {a}"),
                })?;
            }
        }
        let inputs = inputs.iter().map(var).collect();
        let context = context.iter().map(var).collect();
        let freed = freed.iter().map(var).collect();
        let outputs = outputs.iter().map(&fix).collect::<Result<Vec<_>, _>>()?;
        CordProcess::build(inputs, space, outputs, context, freed).map_err(|e| invalid(decl, e.to_string()))
    }

    fn arity(&mut self, stop: &[&str]) -> PResult<Arity> {
        Ok(Arity(self.entries(stop)?.iter().map(|v| v.sort).collect()))
    }

    fn int_object(&mut self) -> PResult<IntObject> {
        self.expect("<")?;
        let plus = self.arity(&[";"])?;
        self.expect(";")?;
        let minus = self.arity(&[">"])?;
        self.expect(">")?;
        Ok(IntObject::new(plus, minus))
    }

    fn run(&mut self) -> PResult<Run> {
        self.expect("{")?;
        let mut run = Run::new();
        if !self.is_sym("}") {
            loop {
                let r = self.ident()?;
                self.expect("<-")?;
                let s = self.ident()?;
                run.insert(r, s);
                if !self.eat(",") {
                    break;
                }
            }
        }
        self.expect("}")?;
        Ok(run)
    }

    fn decl(&mut self) -> PResult<Decl> {
        let kw = self.ident()?;
        let name = self.decl_name()?;
        self.expect("=")?;
        let d = match kw.as_str() {
            "process" => Decl::Process { process: self.process(&name)?, name },
            "interaction" => {
                self.expect_kw("int")?;
                let dom = self.int_object()?;
                self.expect("->")?;
                let cod = self.int_object()?;
                self.expect("=")?;
                let body = self.process(&name)?;
                let interaction = Interaction::new(dom, cod, body).map_err(|e| invalid(&name, e.to_string()))?;
                Decl::Interaction { name, interaction }
            }
            "protocol" => {
                let source = if self.is_kw("int") && self.peek_at(1) == &Tok::Sym("-") {
                    self.next();
                    self.next();
                    self.expect_kw("compose")?;
                    self.expect("(")?;
                    let p = self.decl_name()?;
                    self.expect(",")?;
                    let q = self.decl_name()?;
                    let strategy = if self.eat(",") {
                        let s = self.ident()?;
                        match s.parse() {
                            Ok(s) => s,
                            Err(m) => return self.err(m),
                        }
                    } else {
                        Strategy::default()
                    };
                    self.expect(")")?;
                    Source::IntCompose(p, q, strategy)
                } else {
                    Source::Named(self.decl_name()?)
                };
                let mut runs = Vec::new();
                while self.is_kw("run") {
                    self.next();
                    runs.push(self.run()?);
                }
                let mut bindings = Vec::new();
                if self.is_kw("bind") {
                    self.next();
                    self.expect("{")?;
                    if !self.is_sym("}") {
                        loop {
                            let v = self.ident()?;
                            self.expect(":=")?;
                            bindings.push((v, self.term()?));
                            if !self.eat(",") {
                                break;
                            }
                        }
                    }
                    self.expect("}")?;
                }
                Decl::Protocol { name, source, runs, bindings }
            }
            "goal" => {
                let mut goal = SecurityGoal::default();
                loop {
                    if self.is_kw("agree") {
                        self.next();
                        loop {
                            let a = self.ident()?;
                            self.expect("~")?;
                            let b = self.ident()?;
                            goal.agreement.push((a, b));
                            if !self.eat(",") {
                                break;
                            }
                        }
                    } else if self.is_kw("secret") {
                        self.next();
                        let v = self.ident()?;
                        self.expect_kw("from")?;
                        let mut allowed = vec![self.ident()?];
                        while self.eat(",") {
                            allowed.push(self.ident()?);
                        }
                        goal.secrets.push((v, allowed));
                    } else {
                        break;
                    }
                }
                Decl::Goal { name, goal }
            }
            other => return self.err(format!("unknown declaration kind {other}")),
        };
        self.expect(";")?;
        Ok(d)
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(s) => format!("`{s}`"),
        Tok::AgentConst(s) => format!("`#{s}`"),
        Tok::Sym(s) => format!("`{s}`"),
        Tok::Bottom => "`⊥`".into(),
        Tok::Eof => "end of input".into(),
    }
}

pub fn parse(text: &str) -> Result<SourceFile, DslError> {
    let mut p = Parser { toks: lex(text)?, pos: 0, declared: BTreeMap::new() };
    let mut decls: Vec<Decl> = Vec::new();
    let mut names = BTreeSet::new();
    while p.peek() != &Tok::Eof {
        let (line, col) = p.here();
        let d = p.decl()?;
        if !names.insert(d.name().to_string()) {
            return Err(DslError::Syntax { line, col, message: format!("duplicate declaration {}", d.name()) });
        }
        decls.push(d);
    }
    Ok(SourceFile { decls })
}

/// Parses a bare process `(..) [..] <..>`.
pub fn parse_process(text: &str) -> Result<CordProcess, DslError> {
    let mut p = Parser { toks: lex(text)?, pos: 0, declared: BTreeMap::new() };
    let proc_ = p.process("process")?;
    if p.peek() != &Tok::Eof {
        return p.err("trailing input");
    }
    Ok(proc_)
}

fn entry(v: &Var) -> String {
    match v.sort {
        Sort::Agent => format!("{}:agent", v.name),
        Sort::Data => v.name.clone(),
    }
}

fn join<T>(items: impl IntoIterator<Item = T>, f: impl Fn(T) -> String, sep: &str) -> String {
    items.into_iter().map(f).collect::<Vec<_>>().join(sep)
}

/// Prints a process as it is; `canonical` first takes the α-canonical
/// representative, so that α-equal processes print identically.
pub fn print_process(p: &CordProcess, canonical: bool) -> String {
    let p = if canonical { p.alpha_canonical() } else { p.clone() };
    let mut out = String::new();
    if !p.context().is_empty() {
        let _ = writeln!(out, "  free {{ {} }}", join(p.context(), entry, ", "));
    }
    if !p.freed().is_empty() {
        let _ = writeln!(out, "  freed {{ {} }}", join(p.freed(), entry, ", "));
    }
    let _ = writeln!(out, "  ({})", join(p.inputs(), entry, ", "));
    let order = if canonical { p.space().canonical_order() } else { p.space().generators().clone() };
    let mut preds: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for (a, b) in &order {
        preds.entry(b.as_str()).or_default().push(a.as_str());
    }
    if p.space().is_empty() {
        out.push_str("  []\n");
    } else {
        out.push_str("  [\n");
        let events: Vec<&Event> = p.space().events().collect();
        for (i, e) in events.iter().enumerate() {
            let _ = write!(out, "    {} @ {} : {}", e.label, e.agent, e.action);
            if let Some(ps) = preds.get(e.label.as_str()) {
                let _ = write!(out, " after {}", ps.join(" "));
            }
            out.push_str(if i + 1 < events.len() { ",\n" } else { "\n" });
        }
        out.push_str("  ]\n");
    }
    let _ = write!(out, "  <{}>", join(p.outputs(), |t| t.to_string(), ", "));
    out
}

fn print_object(a: &IntObject, plus_names: &[String], minus_names: &[String]) -> String {
    let side = |ar: &Arity, names: &[String]| {
        join(
            ar.0.iter().enumerate(),
            |(i, s)| {
                let n = names.get(i).cloned().unwrap_or_else(|| "_".into());
                match s {
                    Sort::Agent => format!("{n}:agent"),
                    Sort::Data => n,
                }
            },
            ", ",
        )
    };
    format!("<{}; {}>", side(&a.plus, plus_names), side(&a.minus, minus_names))
}

pub fn print_interaction(name: &str, i: &Interaction, canonical: bool) -> String {
    let i = if canonical { i.alpha_canonical() } else { i.clone() };
    let ins: Vec<String> = i.body.inputs().iter().map(|v| v.name.clone()).collect();
    let outs: Vec<String> =
        i.body.outputs().iter().map(|t| t.as_var().map(|v| v.name.clone()).unwrap_or_else(|| "_".into())).collect();
    let (ap, am) = (i.dom.plus.len(), i.dom.minus.len());
    format!(
        "interaction {name} = int {} -> {} =\n{};\n",
        print_object(&i.dom, &ins[..ap], &outs[..am]),
        print_object(&i.cod, &outs[am..], &ins[ap..]),
        print_process(&i.body, canonical)
    )
}

fn print_decl(d: &Decl, canonical: bool) -> String {
    match d {
        Decl::Process { name, process } => format!("process {name} =\n{};\n", print_process(process, canonical)),
        Decl::Interaction { name, interaction } => print_interaction(name, interaction, canonical),
        Decl::Protocol { name, source, runs, bindings } => {
            let mut out = format!("protocol {name} = ");
            match source {
                Source::Named(n) => out.push_str(n),
                Source::IntCompose(p, q, s) => {
                    let _ = write!(out, "int-compose({p}, {q}");
                    if *s != Strategy::default() {
                        let _ = write!(out, ", {s}");
                    }
                    out.push(')');
                }
            }
            for r in runs {
                if r.is_empty() {
                    out.push_str("\n  run { }");
                } else {
                    let _ = write!(out, "\n  run {{ {} }}", join(&r.map, |(a, b)| format!("{a} <- {b}"), ", "));
                }
            }
            if !bindings.is_empty() {
                let _ = write!(out, "\n  bind {{ {} }}", join(bindings, |(v, t)| format!("{v} := {t}"), ", "));
            }
            out.push_str(";\n");
            out
        }
        Decl::Goal { name, goal } => {
            let mut out = format!("goal {name} =");
            if !goal.agreement.is_empty() {
                let _ = write!(out, "\n  agree {}", join(&goal.agreement, |(a, b)| format!("{a} ~ {b}"), ", "));
            }
            for (v, allowed) in &goal.secrets {
                let _ = write!(out, "\n  secret {v} from {}", allowed.join(", "));
            }
            out.push_str(";\n");
            out
        }
    }
}

/// Prints every declaration, separated by blank lines.
pub fn print(file: &SourceFile, canonical: bool) -> String {
    join(&file.decls, |d| print_decl(d, canonical), "\n")
}

pub fn print_canonical(file: &SourceFile) -> String {
    print(file, true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::proc_cat::identity;

    #[test]
    fn identity_parses() {
        let p = parse_process("(x)[]<x>").unwrap();
        assert!(p.alpha_eq(&identity(&Arity::data(1))));
    }

    #[test]
    fn errors_carry_positions() {
        match parse("process P = (x) [ a @ #A : send(x) ] <y>;") {
            Err(DslError::Invalid { message, .. }) => assert!(message.contains("unbound variable y"), "{message}"),
            other => panic!("{other:?}"),
        }
        match parse("process P = (x)\n [ a @ #A : sned(x) ] <x>;") {
            Err(DslError::Syntax { line: 2, .. }) => {}
            other => panic!("{other:?}"),
        }
        match parse("process P = (x) [ a @ #A : send(x), a @ #A : send(x) ] <x>;") {
            Err(DslError::Syntax { message, .. }) => assert!(message.contains("duplicate label")),
            other => panic!("{other:?}"),
        }
        assert!(parse("process P = (x) [] <x>; process P = (x) [] <x>;").is_err());
    }

    #[test]
    fn free_variables_need_declaring() {
        let src = "process P = free { K:agent } (x) [ a @ K : send(E(k(K), x)) ] <x>;";
        let f = parse(src).unwrap();
        let p = f.process("P").unwrap();
        assert_eq!(p.context().iter().next().unwrap().sort, Sort::Agent);
        assert!(parse("process P = (x) [ a @ K : send(x) ] <x>;").is_err());
    }

    #[test]
    fn round_trip() {
        let src = "process P = (x, A:agent) [ s @ A : send(A -> #B : (x, mu y . f(y))), \
                   r @ #B : recv(u v:agent) after s, m @ #B : match(v:agent, w = u, A) after r ] <w, v, c()>;";
        let f = parse(src).unwrap();
        let once = print_canonical(&f);
        let twice = print_canonical(&parse(&once).unwrap());
        assert_eq!(once, twice);
        assert!(parse(&print(&f, false)).unwrap().process("P").unwrap().alpha_eq(&f.process("P").unwrap()));
    }
}
