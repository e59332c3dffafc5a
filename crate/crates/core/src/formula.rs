//! Bounded-quantifier arithmetic formulas over the free variables `x`, `y`, `z`.
//!
//! Grammar (ASCII):
//!
//! ```text
//! formula := quant | impl
//! quant   := ("forall" | "exists") ident "<" term "." formula
//! impl    := disj ["->" impl]
//! disj    := conj {"or" conj}
//! conj    := neg {"and" neg}
//! neg     := ["not"] atom
//! atom    := term rel term | "(" formula ")"
//! rel     := "=" | "!=" | "<" | "<=" | ">" | ">="
//! term    := factor {"+" factor}
//! factor  := prim {"*" prim}
//! prim    := ident | number | "(" term ")"
//! ```

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Mutex;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::largeness::FinSet;

/// Default number of evaluation steps allowed in one apartness check.
pub const DEFAULT_EVAL_CAP: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Var(String),
    Num(BigUint),
    Add(Box<Term>, Box<Term>),
    Mul(Box<Term>, Box<Term>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Rel {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl Rel {
    fn symbol(self) -> &'static str {
        match self {
            Rel::Eq => "=",
            Rel::Ne => "!=",
            Rel::Lt => "<",
            Rel::Le => "<=",
            Rel::Gt => ">",
            Rel::Ge => ">=",
        }
    }

    fn holds<T: Ord>(self, a: &T, b: &T) -> bool {
        match self {
            Rel::Eq => a == b,
            Rel::Ne => a != b,
            Rel::Lt => a < b,
            Rel::Le => a <= b,
            Rel::Gt => a > b,
            Rel::Ge => a >= b,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Quant {
    Forall,
    Exists,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    Atom(Term, Rel, Term),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Bounded(Quant, String, Term, Box<Formula>),
}

/// A parsed, scope-checked formula θ(x, y, z).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Delta0Formula {
    root: Formula,
}

/// Variable assignment for evaluation.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Env {
    pub x: BigUint,
    pub y: BigUint,
    pub z: BigUint,
    pub locals: BTreeMap<String, BigUint>,
}

impl Env {
    pub fn new(x: u64, y: u64, z: u64) -> Self {
        Env { x: x.into(), y: y.into(), z: z.into(), locals: BTreeMap::new() }
    }

    fn get(&self, name: &str) -> BigUint {
        if let Some(v) = self.locals.get(name) {
            return v.clone();
        }
        match name {
            "x" => self.x.clone(),
            "y" => self.y.clone(),
            "z" => self.z.clone(),
            _ => BigUint::zero(),
        }
    }
}

// =========================================================================
// Lexer
// =========================================================================

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Num(BigUint),
    Forall,
    Exists,
    Not,
    And,
    Or,
    Arrow,
    Dot,
    LParen,
    RParen,
    Plus,
    Star,
    Rel(Rel),
    End,
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        if c.is_ascii_digit() {
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let n: BigUint = text[start..i].parse().map_err(|_| Error::Parse { pos: start, msg: "bad number".into() })?;
            out.push((Tok::Num(n), start));
            continue;
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            let tok = match &text[start..i] {
                "forall" => Tok::Forall,
                "exists" => Tok::Exists,
                "not" => Tok::Not,
                "and" => Tok::And,
                "or" => Tok::Or,
                w => Tok::Ident(w.to_string()),
            };
            out.push((tok, start));
            continue;
        }
        let two = if i + 1 < bytes.len() { &text[i..i + 2] } else { "" };
        let (tok, len) = match two {
            "->" => (Tok::Arrow, 2),
            "!=" => (Tok::Rel(Rel::Ne), 2),
            "<=" => (Tok::Rel(Rel::Le), 2),
            ">=" => (Tok::Rel(Rel::Ge), 2),
            _ => match c {
                b'<' => (Tok::Rel(Rel::Lt), 1),
                b'>' => (Tok::Rel(Rel::Gt), 1),
                b'=' => (Tok::Rel(Rel::Eq), 1),
                b'.' => (Tok::Dot, 1),
                b'(' => (Tok::LParen, 1),
                b')' => (Tok::RParen, 1),
                b'+' => (Tok::Plus, 1),
                b'*' => (Tok::Star, 1),
                _ => {
                    return Err(Error::Parse { pos: start, msg: format!("unexpected character `{}`", c as char) })
                }
            },
        };
        out.push((tok, start));
        i += len;
    }
    out.push((Tok::End, text.len()));
    Ok(out)
}

// =========================================================================
// Parser
// =========================================================================

struct Parser {
    toks: Vec<(Tok, usize)>,
    at: usize,
}

type PResult<T> = std::result::Result<T, (usize, String)>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> usize {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> PResult<()> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            Err((self.pos(), format!("expected {what}")))
        }
    }

    fn formula(&mut self) -> PResult<Formula> {
        match self.peek() {
            Tok::Forall | Tok::Exists => {
                let q = if self.bump() == Tok::Forall { Quant::Forall } else { Quant::Exists };
                let var = match self.bump() {
                    Tok::Ident(v) => v,
                    _ => return Err((self.toks[self.at.saturating_sub(1)].1, "expected variable".into())),
                };
                self.expect(Tok::Rel(Rel::Lt), "`<` after quantified variable")?;
                let bound = self.term()?;
                self.expect(Tok::Dot, "`.` after quantifier bound")?;
                let body = self.formula()?;
                Ok(Formula::Bounded(q, var, bound, Box::new(body)))
            }
            _ => self.implication(),
        }
    }

    fn implication(&mut self) -> PResult<Formula> {
        let lhs = self.disjunction()?;
        if *self.peek() == Tok::Arrow {
            self.bump();
            let rhs = self.implication()?;
            return Ok(Formula::Implies(Box::new(lhs), Box::new(rhs)));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> PResult<Formula> {
        let mut f = self.conjunction()?;
        while *self.peek() == Tok::Or {
            self.bump();
            let r = self.conjunction()?;
            f = Formula::Or(Box::new(f), Box::new(r));
        }
        Ok(f)
    }

    fn conjunction(&mut self) -> PResult<Formula> {
        let mut f = self.negation()?;
        while *self.peek() == Tok::And {
            self.bump();
            let r = self.negation()?;
            f = Formula::And(Box::new(f), Box::new(r));
        }
        Ok(f)
    }

    fn negation(&mut self) -> PResult<Formula> {
        if *self.peek() == Tok::Not {
            self.bump();
            let a = self.atom()?;
            return Ok(Formula::Not(Box::new(a)));
        }
        self.atom()
    }

    fn atom(&mut self) -> PResult<Formula> {
        let save = self.at;
        let first = self.comparison();
        if first.is_ok() || self.toks[save].0 != Tok::LParen {
            return first;
        }
        let err1 = first.unwrap_err();
        self.at = save;
        self.bump();
        let inner = self.formula().and_then(|f| {
            self.expect(Tok::RParen, "`)`")?;
            Ok(f)
        });
        match inner {
            Ok(f) => Ok(f),
            Err(err2) => Err(if err2.0 >= err1.0 { err2 } else { err1 }),
        }
    }

    fn comparison(&mut self) -> PResult<Formula> {
        let a = self.term()?;
        let rel = match self.peek() {
            Tok::Rel(r) => *r,
            _ => return Err((self.pos(), "expected relation".into())),
        };
        self.bump();
        let b = self.term()?;
        Ok(Formula::Atom(a, rel, b))
    }

    fn term(&mut self) -> PResult<Term> {
        let mut t = self.factor()?;
        while *self.peek() == Tok::Plus {
            self.bump();
            let r = self.factor()?;
            t = Term::Add(Box::new(t), Box::new(r));
        }
        Ok(t)
    }

    fn factor(&mut self) -> PResult<Term> {
        let mut t = self.prim()?;
        while *self.peek() == Tok::Star {
            self.bump();
            let r = self.prim()?;
            t = Term::Mul(Box::new(t), Box::new(r));
        }
        Ok(t)
    }

    fn prim(&mut self) -> PResult<Term> {
        let pos = self.pos();
        match self.bump() {
            Tok::Ident(v) => Ok(Term::Var(v)),
            Tok::Num(n) => Ok(Term::Num(n)),
            Tok::LParen => {
                let t = self.term()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(t)
            }
            _ => Err((pos, "expected term".into())),
        }
    }
}

fn check_term_scope(t: &Term, scope: &[String]) -> Result<()> {
    match t {
        Term::Var(v) => {
            if scope.iter().any(|s| s == v) || matches!(v.as_str(), "x" | "y" | "z") {
                Ok(())
            } else {
                Err(Error::FreeVariable(v.clone()))
            }
        }
        Term::Num(_) => Ok(()),
        Term::Add(a, b) | Term::Mul(a, b) => {
            check_term_scope(a, scope)?;
            check_term_scope(b, scope)
        }
    }
}

fn check_scope(f: &Formula, scope: &mut Vec<String>) -> Result<()> {
    match f {
        Formula::Atom(a, _, b) => {
            check_term_scope(a, scope)?;
            check_term_scope(b, scope)
        }
        Formula::Not(g) => check_scope(g, scope),
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
            check_scope(a, scope)?;
            check_scope(b, scope)
        }
        Formula::Bounded(_, v, bound, body) => {
            check_term_scope(bound, scope)?;
            scope.push(v.clone());
            let r = check_scope(body, scope);
            scope.pop();
            r
        }
    }
}

/// Parses and scope-checks a formula.
pub fn parse_formula(text: &str) -> Result<Delta0Formula> {
    let toks = lex(text)?;
    let mut p = Parser { toks, at: 0 };
    let root = p.formula().map_err(|(pos, msg)| Error::Parse { pos, msg })?;
    if *p.peek() != Tok::End {
        return Err(Error::Parse { pos: p.pos(), msg: "trailing input".into() });
    }
    check_scope(&root, &mut Vec::new())?;
    Ok(Delta0Formula { root })
}

impl std::str::FromStr for Delta0Formula {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_formula(s)
    }
}

// =========================================================================
// Printer
// =========================================================================

fn write_term(t: &Term, prec: u8, out: &mut String) {
    // 0: sum, 1: product, 2: primary
    match t {
        Term::Var(v) => out.push_str(v),
        Term::Num(n) => out.push_str(&n.to_string()),
        Term::Add(a, b) => {
            let paren = prec > 0;
            if paren {
                out.push('(');
            }
            write_term(a, 0, out);
            out.push_str(" + ");
            write_term(b, 1, out);
            if paren {
                out.push(')');
            }
        }
        Term::Mul(a, b) => {
            let paren = prec > 1;
            if paren {
                out.push('(');
            }
            write_term(a, 1, out);
            out.push_str(" * ");
            write_term(b, 2, out);
            if paren {
                out.push(')');
            }
        }
    }
}

fn formula_prec(f: &Formula) -> u8 {
    match f {
        Formula::Bounded(..) => 0,
        Formula::Implies(..) => 1,
        Formula::Or(..) => 2,
        Formula::And(..) => 3,
        Formula::Not(_) => 4,
        Formula::Atom(..) => 5,
    }
}

fn write_formula(f: &Formula, need: u8, out: &mut String) {
    let paren = formula_prec(f) < need;
    if paren {
        out.push('(');
    }
    match f {
        Formula::Atom(a, r, b) => {
            write_term(a, 0, out);
            out.push(' ');
            out.push_str(r.symbol());
            out.push(' ');
            write_term(b, 0, out);
        }
        Formula::Not(g) => {
            out.push_str("not ");
            write_formula(g, 5, out);
        }
        Formula::And(a, b) => {
            write_formula(a, 3, out);
            out.push_str(" and ");
            write_formula(b, 4, out);
        }
        Formula::Or(a, b) => {
            write_formula(a, 2, out);
            out.push_str(" or ");
            write_formula(b, 3, out);
        }
        Formula::Implies(a, b) => {
            write_formula(a, 2, out);
            out.push_str(" -> ");
            write_formula(b, 1, out);
        }
        Formula::Bounded(q, v, bound, body) => {
            out.push_str(match q {
                Quant::Forall => "forall ",
                Quant::Exists => "exists ",
            });
            out.push_str(v);
            out.push_str(" < ");
            write_term(bound, 0, out);
            out.push_str(" . ");
            write_formula(body, 0, out);
        }
    }
    if paren {
        out.push(')');
    }
}

impl fmt::Display for Delta0Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        write_formula(&self.root, 0, &mut s);
        f.write_str(&s)
    }
}

// =========================================================================
// Reference evaluator (arbitrary precision)
// =========================================================================

fn eval_term_big(t: &Term, env: &Env) -> BigUint {
    match t {
        Term::Var(v) => env.get(v),
        Term::Num(n) => n.clone(),
        Term::Add(a, b) => eval_term_big(a, env) + eval_term_big(b, env),
        Term::Mul(a, b) => eval_term_big(a, env) * eval_term_big(b, env),
    }
}

fn eval_big(f: &Formula, env: &mut Env) -> bool {
    match f {
        Formula::Atom(a, r, b) => r.holds(&eval_term_big(a, env), &eval_term_big(b, env)),
        Formula::Not(g) => !eval_big(g, env),
        Formula::And(a, b) => eval_big(a, env) && eval_big(b, env),
        Formula::Or(a, b) => eval_big(a, env) || eval_big(b, env),
        Formula::Implies(a, b) => !eval_big(a, env) || eval_big(b, env),
        Formula::Bounded(q, v, bound, body) => {
            let n = eval_term_big(bound, env);
            let saved = env.locals.remove(v);
            let mut i = BigUint::zero();
            let want = matches!(q, Quant::Exists);
            let mut result = !want;
            while i < n {
                env.locals.insert(v.clone(), i.clone());
                if eval_big(body, env) == want {
                    result = want;
                    break;
                }
                i += 1u32;
            }
            env.locals.remove(v);
            if let Some(s) = saved {
                env.locals.insert(v.clone(), s);
            }
            result
        }
    }
}

/// Evaluates `f` under `env`. Total: quantifier ranges are finite.
pub fn eval_formula(f: &Delta0Formula, env: &Env) -> bool {
    let mut env = env.clone();
    eval_big(&f.root, &mut env)
}

// =========================================================================
// Compiled evaluator with a step budget
// =========================================================================

#[derive(Debug, Clone)]
enum CTerm {
    Slot(usize),
    Const(u128),
    BigConst,
    Add(Box<CTerm>, Box<CTerm>),
    Mul(Box<CTerm>, Box<CTerm>),
}

#[derive(Debug, Clone)]
enum CFormula {
    Atom(CTerm, Rel, CTerm),
    Not(Box<CFormula>),
    And(Box<CFormula>, Box<CFormula>),
    Or(Box<CFormula>, Box<CFormula>),
    Implies(Box<CFormula>, Box<CFormula>),
    Bounded(Quant, usize, CTerm, Box<CFormula>),
}

struct Overflow;

enum Stop {
    Overflow,
    Budget,
}

fn compile_term(t: &Term, scope: &[String]) -> CTerm {
    match t {
        Term::Var(v) => {
            if let Some(i) = scope.iter().rposition(|s| s == v) {
                CTerm::Slot(3 + i)
            } else {
                CTerm::Slot(match v.as_str() {
                    "x" => 0,
                    "y" => 1,
                    _ => 2,
                })
            }
        }
        Term::Num(n) => match n.to_u128() {
            Some(v) => CTerm::Const(v),
            None => CTerm::BigConst,
        },
        Term::Add(a, b) => CTerm::Add(Box::new(compile_term(a, scope)), Box::new(compile_term(b, scope))),
        Term::Mul(a, b) => CTerm::Mul(Box::new(compile_term(a, scope)), Box::new(compile_term(b, scope))),
    }
}

fn compile(f: &Formula, scope: &mut Vec<String>) -> CFormula {
    match f {
        Formula::Atom(a, r, b) => CFormula::Atom(compile_term(a, scope), *r, compile_term(b, scope)),
        Formula::Not(g) => CFormula::Not(Box::new(compile(g, scope))),
        Formula::And(a, b) => CFormula::And(Box::new(compile(a, scope)), Box::new(compile(b, scope))),
        Formula::Or(a, b) => CFormula::Or(Box::new(compile(a, scope)), Box::new(compile(b, scope))),
        Formula::Implies(a, b) => CFormula::Implies(Box::new(compile(a, scope)), Box::new(compile(b, scope))),
        Formula::Bounded(q, v, bound, body) => {
            let cb = compile_term(bound, scope);
            let slot = 3 + scope.len();
            scope.push(v.clone());
            let body = compile(body, scope);
            scope.pop();
            CFormula::Bounded(*q, slot, cb, Box::new(body))
        }
    }
}

fn eval_cterm(t: &CTerm, vals: &[u128]) -> std::result::Result<u128, Overflow> {
    match t {
        CTerm::Slot(i) => Ok(vals[*i]),
        CTerm::Const(c) => Ok(*c),
        CTerm::BigConst => Err(Overflow),
        CTerm::Add(a, b) => eval_cterm(a, vals)?.checked_add(eval_cterm(b, vals)?).ok_or(Overflow),
        CTerm::Mul(a, b) => eval_cterm(a, vals)?.checked_mul(eval_cterm(b, vals)?).ok_or(Overflow),
    }
}

fn eval_compiled(f: &CFormula, vals: &mut Vec<u128>, budget: &mut u64) -> std::result::Result<bool, Stop> {
    match f {
        CFormula::Atom(a, r, b) => {
            let x = eval_cterm(a, vals).map_err(|_| Stop::Overflow)?;
            let y = eval_cterm(b, vals).map_err(|_| Stop::Overflow)?;
            Ok(r.holds(&x, &y))
        }
        CFormula::Not(g) => Ok(!eval_compiled(g, vals, budget)?),
        CFormula::And(a, b) => Ok(eval_compiled(a, vals, budget)? && eval_compiled(b, vals, budget)?),
        CFormula::Or(a, b) => Ok(eval_compiled(a, vals, budget)? || eval_compiled(b, vals, budget)?),
        CFormula::Implies(a, b) => Ok(!eval_compiled(a, vals, budget)? || eval_compiled(b, vals, budget)?),
        CFormula::Bounded(q, slot, bound, body) => {
            let n = eval_cterm(bound, vals).map_err(|_| Stop::Overflow)?;
            if vals.len() <= *slot {
                vals.resize(*slot + 1, 0);
            }
            let want = matches!(q, Quant::Exists);
            let mut i = 0u128;
            while i < n {
                if *budget == 0 {
                    return Err(Stop::Budget);
                }
                *budget -= 1;
                vals[*slot] = i;
                if eval_compiled(body, vals, budget)? == want {
                    return Ok(want);
                }
                i += 1;
            }
            Ok(!want)
        }
    }
}

fn mentions(t: &Term, name: &str, bound: &[String]) -> bool {
    match t {
        Term::Var(v) => v == name && !bound.iter().any(|b| b == name),
        Term::Num(_) => false,
        Term::Add(a, b) | Term::Mul(a, b) => mentions(a, name, bound) || mentions(b, name, bound),
    }
}

fn formula_mentions(f: &Formula, name: &str, bound: &mut Vec<String>) -> bool {
    match f {
        Formula::Atom(a, _, b) => mentions(a, name, bound) || mentions(b, name, bound),
        Formula::Not(g) => formula_mentions(g, name, bound),
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
            formula_mentions(a, name, bound) || formula_mentions(b, name, bound)
        }
        Formula::Bounded(_, v, t, body) => {
            if mentions(t, name, bound) {
                return true;
            }
            bound.push(v.clone());
            let r = formula_mentions(body, name, bound);
            bound.pop();
            r
        }
    }
}

impl Delta0Formula {
    pub fn root(&self) -> &Formula {
        &self.root
    }

    /// Whether the free variable `name` occurs.
    pub fn mentions(&self, name: &str) -> bool {
        formula_mentions(&self.root, name, &mut Vec::new())
    }

    /// The formula `0 = 0`.
    pub fn trivial() -> Self {
        parse_formula("0 = 0").expect("constant formula")
    }
}

// =========================================================================
// Apartness
// =========================================================================

/// A formula prepared for repeated apartness checks: compiled, with an
/// evaluation cap and a memo keyed on the three numbers the check reads.
pub struct Theta {
    formula: Delta0Formula,
    compiled: CFormula,
    uses: [bool; 3],
    cap: u64,
    cache: Mutex<HashMap<(u64, u64, u64), bool>>,
}

impl fmt::Debug for Theta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Theta({})", self.formula)
    }
}

impl PartialEq for Theta {
    fn eq(&self, other: &Self) -> bool {
        self.formula == other.formula
    }
}

impl Eq for Theta {}

impl Clone for Theta {
    fn clone(&self) -> Self {
        Theta::with_cap(self.formula.clone(), self.cap)
    }
}

impl Theta {
    pub fn new(formula: Delta0Formula) -> Self {
        Self::with_cap(formula, DEFAULT_EVAL_CAP)
    }

    pub fn with_cap(formula: Delta0Formula, cap: u64) -> Self {
        let compiled = compile(&formula.root, &mut Vec::new());
        let uses = [formula.mentions("x"), formula.mentions("y"), formula.mentions("z")];
        Theta { formula, compiled, uses, cap, cache: Mutex::new(HashMap::new()) }
    }

    pub fn parse(text: &str) -> Result<Self> {
        Ok(Self::new(parse_formula(text)?))
    }

    /// θ = "0 = 0".
    pub fn trivial() -> Self {
        Self::new(Delta0Formula::trivial())
    }

    pub fn formula(&self) -> &Delta0Formula {
        &self.formula
    }

    pub fn cap(&self) -> u64 {
        self.cap
    }

    /// ∀x < max_e ∃y < min_f ∀z < max_f θ(x, y, z).
    pub fn apart_bounds(&self, max_e: u64, min_f: u64, max_f: u64) -> Result<bool> {
        let key = (max_e, min_f, max_f);
        if let Some(v) = self.cache.lock().expect("theta cache").get(&key) {
            return Ok(*v);
        }
        let mut budget = self.cap;
        let r = match self.triple_loop(max_e, min_f, max_f, &mut budget, false) {
            Ok(v) => v,
            Err(Stop::Budget) => return Err(self.limit_error(key)),
            Err(Stop::Overflow) => {
                let mut budget = self.cap;
                match self.triple_loop(max_e, min_f, max_f, &mut budget, true) {
                    Ok(v) => v,
                    Err(_) => return Err(self.limit_error(key)),
                }
            }
        };
        self.cache.lock().expect("theta cache").insert(key, r);
        Ok(r)
    }

    fn limit_error(&self, key: (u64, u64, u64)) -> Error {
        Error::limit(format!(
            "apartness of `{}` at (max E, min F, max F) = {:?} exceeds {} steps",
            self.formula, key, self.cap
        ))
    }

    fn eval_at(&self, x: u64, y: u64, z: u64, budget: &mut u64, big: bool) -> std::result::Result<bool, Stop> {
        if *budget == 0 {
            return Err(Stop::Budget);
        }
        *budget -= 1;
        if big {
            return Ok(eval_big(&self.formula.root, &mut Env::new(x, y, z)));
        }
        let mut vals = vec![x as u128, y as u128, z as u128];
        eval_compiled(&self.compiled, &mut vals, budget)
    }

    fn triple_loop(&self, max_e: u64, min_f: u64, max_f: u64, budget: &mut u64, big: bool) -> std::result::Result<bool, Stop> {
        // A loop over a variable θ never reads runs once: its value is irrelevant.
        let xs = if self.uses[0] { max_e } else { max_e.min(1) };
        let ys = if self.uses[1] { min_f } else { min_f.min(1) };
        let zs = if self.uses[2] { max_f } else { max_f.min(1) };
        for x in 0..xs {
            let mut found = false;
            for y in 0..ys {
                let mut all = true;
                for z in 0..zs {
                    if !self.eval_at(x, y, z, budget, big)? {
                        all = false;
                        break;
                    }
                }
                if all {
                    found = true;
                    break;
                }
            }
            if !found {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Whether E < F are θ-apart.
pub fn theta_apart(e: &FinSet, f: &FinSet, theta: &Theta) -> Result<bool> {
    let (Some(max_e), Some(min_f), Some(max_f)) = (e.max(), f.min(), f.max()) else {
        return Err(Error::pre("apartness needs nonempty sets"));
    };
    if max_e >= min_f {
        return Err(Error::pre(format!("apartness needs E < F, got max E = {max_e}, min F = {min_f}")));
    }
    theta.apart_bounds(max_e, min_f, max_f)
}
