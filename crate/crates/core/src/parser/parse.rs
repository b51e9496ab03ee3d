use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::model::rational::parse_rational;
use crate::model::{CmpOp, Expr, Formula, Term, Vocabulary};
use crate::parser::lexer::{tokenize, Tok, Token};

/// Which side of a belief computation a formula belongs to. Knowledge-base
/// formulas may not use equality or relations.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Kb,
    Query,
}

/// A formula together with where it started in the source.
#[derive(Clone, Debug)]
pub struct Statement {
    pub formula: Formula,
    pub line: usize,
    pub col: usize,
}

impl PartialEq for Statement {
    fn eq(&self, other: &Self) -> bool {
        self.formula == other.formula
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SourceFile {
    pub vocab: Vocabulary,
    pub kb: Vec<Statement>,
    pub queries: Vec<Statement>,
    /// Non-fatal diagnostics, such as a tolerance index used by two comparisons.
    pub warnings: Vec<String>,
}

impl SourceFile {
    /// The knowledge base as a single conjunction.
    pub fn kb_formula(&self) -> Formula {
        Formula::conj(self.kb.iter().map(|s| s.formula.clone()))
    }
}

/// Parses a complete `.rwkb` file.
pub fn parse(text: &str) -> Result<SourceFile> {
    let toks = tokenize(text)?;
    let mut p = Parser { toks, pos: 0, vocab: None, bound: Vec::new() };
    p.file()
}

/// Parses a single formula against a vocabulary.
pub fn parse_formula(text: &str, vocab: &Vocabulary, side: Side) -> Result<Formula> {
    let toks = tokenize(text)?;
    let mut p = Parser { toks, pos: 0, vocab: Some(vocab.clone()), bound: Vec::new() };
    let start = p.here();
    let f = p.formula()?;
    p.expect(&Tok::Eof)?;
    check_side(&f, side, vocab, start.0, start.1)?;
    Ok(f)
}

fn check_side(f: &Formula, side: Side, vocab: &Vocabulary, line: usize, col: usize) -> Result<()> {
    if side == Side::Query {
        return Ok(());
    }
    let restrict = |msg: String| Error::Parse { line, col, msg: Error::Restriction(msg).to_string() };
    if f.has_equality() {
        return Err(restrict("term equality".into()));
    }
    if let Some(r) = f.relation_symbols().into_iter().next() {
        let arity = vocab.arity(&r).unwrap_or(0);
        return Err(restrict(format!("relation `{r}` of arity {arity}")));
    }
    Ok(())
}

/// Tolerance indices used by more than one approximate comparison.
pub fn duplicate_tolerance_warnings(formulas: &[&Formula]) -> Vec<String> {
    let mut counts: BTreeMap<u32, usize> = BTreeMap::new();
    for f in formulas {
        for i in f.tolerance_indices() {
            *counts.entry(i).or_default() += 1;
        }
    }
    counts
        .into_iter()
        .filter(|(_, n)| *n > 1)
        .map(|(i, n)| format!("tolerance index {i} is shared by {n} comparisons"))
        .collect()
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    vocab: Option<Vocabulary>,
    bound: Vec<String>,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn here(&self) -> (usize, usize) {
        let t = &self.toks[self.pos];
        (t.line, t.col)
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos < self.toks.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, msg: impl Into<String>) -> Result<T> {
        let (line, col) = self.here();
        Err(Error::Parse { line, col, msg: msg.into() })
    }

    fn expect(&mut self, t: &Tok) -> Result<()> {
        if self.peek() == t {
            self.bump();
            Ok(())
        } else {
            self.error(format!("expected {}, found {}", t.describe(), self.peek().describe()))
        }
    }

    fn ident(&mut self) -> Result<String> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            other => self.error(format!("expected an identifier, found {}", other.describe())),
        }
    }

    fn vocab(&self) -> &Vocabulary {
        self.vocab.as_ref().expect("vocabulary is set before formulas are parsed")
    }

    fn file(&mut self) -> Result<SourceFile> {
        let mut kb = Vec::new();
        let mut queries = Vec::new();
        loop {
            match self.peek().clone() {
                Tok::Eof => break,
                Tok::Ident(w) if w == "vocab" => {
                    if self.vocab.is_some() {
                        return self.error("second `vocab` block");
                    }
                    self.bump();
                    self.vocab_block()?;
                }
                Tok::Ident(w) if w == "kb" || w == "query" => {
                    if self.vocab.is_none() {
                        return self.error(format!("`{w}` block before the `vocab` block"));
                    }
                    self.bump();
                    let side = if w == "kb" { Side::Kb } else { Side::Query };
                    let stmts = self.statements(side)?;
                    if side == Side::Kb {
                        kb.extend(stmts);
                    } else {
                        queries.extend(stmts);
                    }
                }
                other => return self.error(format!("expected `vocab`, `kb` or `query`, found {}", other.describe())),
            }
        }
        let Some(vocab) = self.vocab.take() else {
            return self.error("missing `vocab` block");
        };
        let warnings = duplicate_tolerance_warnings(&kb.iter().map(|s: &Statement| &s.formula).collect::<Vec<_>>());
        Ok(SourceFile { vocab, kb, queries, warnings })
    }

    fn vocab_block(&mut self) -> Result<()> {
        self.expect(&Tok::LBrace)?;
        let (mut preds, mut consts, mut rels) = (Vec::new(), Vec::new(), Vec::new());
        while self.peek() != &Tok::RBrace {
            let (line, col) = self.here();
            let kind = self.ident()?;
            loop {
                let name = self.ident()?;
                check_name(&name, line, col)?;
                match kind.as_str() {
                    "predicates" => preds.push(name),
                    "constants" => consts.push(name),
                    "relations" => {
                        self.expect(&Tok::Slash)?;
                        let arity = match self.bump() {
                            Tok::Number(n) => n.parse::<usize>().ok(),
                            _ => None,
                        };
                        let Some(arity) = arity else { return self.error("expected a relation arity") };
                        rels.push((name, arity));
                    }
                    _ => {
                        return Err(Error::Parse {
                            line,
                            col,
                            msg: format!("expected `predicates`, `constants` or `relations`, found `{kind}`"),
                        })
                    }
                }
                if self.peek() == &Tok::Comma {
                    self.bump();
                } else {
                    break;
                }
            }
            self.expect(&Tok::Semi)?;
        }
        self.expect(&Tok::RBrace)?;
        let (line, col) = self.here();
        let vocab = Vocabulary::new(preds, consts, rels)
            .map_err(|e| Error::Parse { line, col, msg: e.to_string() })?;
        self.vocab = Some(vocab);
        Ok(())
    }

    fn statements(&mut self, side: Side) -> Result<Vec<Statement>> {
        self.expect(&Tok::LBrace)?;
        let mut out = Vec::new();
        while self.peek() != &Tok::RBrace {
            let (line, col) = self.here();
            let formula = self.formula()?;
            check_side(&formula, side, self.vocab(), line, col)?;
            out.push(Statement { formula, line, col });
            if self.peek() == &Tok::Semi {
                self.bump();
            } else if self.peek() != &Tok::RBrace {
                return self.error(format!("expected `;`, found {}", self.peek().describe()));
            }
        }
        self.expect(&Tok::RBrace)?;
        Ok(out)
    }

    pub fn formula(&mut self) -> Result<Formula> {
        let lhs = self.disjunction()?;
        if self.peek() == &Tok::Arrow {
            self.bump();
            let rhs = self.formula()?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<Formula> {
        let mut f = self.conjunction()?;
        while self.peek() == &Tok::Bar {
            self.bump();
            f = Formula::or(f, self.conjunction()?);
        }
        Ok(f)
    }

    fn conjunction(&mut self) -> Result<Formula> {
        let mut f = self.unary()?;
        while self.peek() == &Tok::Amp {
            self.bump();
            f = Formula::and(f, self.unary()?);
        }
        Ok(f)
    }

    fn unary(&mut self) -> Result<Formula> {
        match self.peek().clone() {
            Tok::Bang => {
                self.bump();
                Ok(Formula::not(self.unary()?))
            }
            Tok::Ident(w) if w == "exists" || w == "forall" => {
                self.bump();
                let v = self.ident()?;
                self.check_var_name(&v)?;
                self.bound.push(v.clone());
                let body = self.unary();
                self.bound.pop();
                let body = body?;
                Ok(if w == "exists" { Formula::exists(&v, body) } else { Formula::forall(&v, body) })
            }
            _ => self.atomic(),
        }
    }

    fn check_var_name(&self, v: &str) -> Result<()> {
        if is_keyword(v) {
            return self.error(format!("`{v}` is a keyword"));
        }
        if self.vocab().arity(v).is_some() {
            return self.error(format!("`{v}` is a predicate and cannot be bound"));
        }
        Ok(())
    }

    fn atomic(&mut self) -> Result<Formula> {
        match self.peek().clone() {
            Tok::Ident(w) if w == "true" => {
                self.bump();
                Ok(Formula::True)
            }
            Tok::Ident(w) if w == "false" => {
                self.bump();
                Ok(Formula::False)
            }
            Tok::Ident(_) => {
                if self.peek_at(1) == &Tok::LParen {
                    self.application()
                } else {
                    let a = self.term()?;
                    let neg = match self.bump() {
                        Tok::Eq => false,
                        Tok::Neq => true,
                        other => {
                            self.pos -= 1;
                            return self.error(format!("expected `=` or `!=` after a term, found {}", other.describe()));
                        }
                    };
                    let b = self.term()?;
                    let eq = Formula::Eq(a, b);
                    Ok(if neg { Formula::not(eq) } else { eq })
                }
            }
            Tok::LParen if !self.paren_starts_expression() => {
                self.bump();
                let f = self.formula()?;
                self.expect(&Tok::RParen)?;
                Ok(f)
            }
            Tok::LParen | Tok::Number(_) | Tok::Minus | Tok::DoubleBar | Tok::Tol(_) => self.comparison(),
            other => self.error(format!("expected a formula, found {}", other.describe())),
        }
    }

    /// At a `(`, decides whether the group is an arithmetic operand by looking
    /// at the token after the matching `)`.
    fn paren_starts_expression(&self) -> bool {
        let mut depth = 0usize;
        let mut k = 0;
        loop {
            match self.peek_at(k) {
                Tok::LParen => depth += 1,
                Tok::RParen => {
                    depth -= 1;
                    if depth == 0 {
                        return matches!(
                            self.peek_at(k + 1),
                            Tok::Plus
                                | Tok::Minus
                                | Tok::Star
                                | Tok::Eq
                                | Tok::Le
                                | Tok::Ge
                                | Tok::Lt
                                | Tok::Gt
                                | Tok::ApproxEq(_)
                                | Tok::ApproxLe(_)
                                | Tok::ApproxGe(_)
                        );
                    }
                }
                Tok::Eof => return false,
                _ => {}
            }
            k += 1;
        }
    }

    fn application(&mut self) -> Result<Formula> {
        let (line, col) = self.here();
        let name = self.ident()?;
        let Some(arity) = self.vocab().arity(&name) else {
            return Err(Error::Parse { line, col, msg: format!("undeclared predicate `{name}`") });
        };
        self.expect(&Tok::LParen)?;
        let mut args = vec![self.term()?];
        while self.peek() == &Tok::Comma {
            self.bump();
            args.push(self.term()?);
        }
        self.expect(&Tok::RParen)?;
        if args.len() != arity {
            return Err(Error::Parse {
                line,
                col,
                msg: format!("`{name}` takes {arity} argument(s), {} given", args.len()),
            });
        }
        Ok(Formula::pred(&name, args))
    }

    fn term(&mut self) -> Result<Term> {
        let (line, col) = self.here();
        let name = self.ident()?;
        if self.bound.contains(&name) {
            Ok(Term::Var(name))
        } else if self.vocab().is_constant(&name) {
            Ok(Term::Const(name))
        } else {
            Err(Error::Parse { line, col, msg: format!("undeclared symbol `{name}`") })
        }
    }

    fn comparison(&mut self) -> Result<Formula> {
        let lhs = self.expr()?;
        let op = self.bump();
        let rhs = self.expr()?;
        Ok(match op {
            Tok::ApproxEq(i) => Formula::compare(lhs, CmpOp::Approx(i), rhs),
            Tok::ApproxLe(i) => Formula::compare(lhs, CmpOp::ApproxLeq(i), rhs),
            Tok::ApproxGe(i) => Formula::compare(rhs, CmpOp::ApproxLeq(i), lhs),
            Tok::Eq => Formula::compare(lhs, CmpOp::Eq, rhs),
            Tok::Le => Formula::compare(lhs, CmpOp::Leq, rhs),
            Tok::Ge => Formula::compare(rhs, CmpOp::Leq, lhs),
            Tok::Lt => Formula::not(Formula::compare(rhs, CmpOp::Leq, lhs)),
            Tok::Gt => Formula::not(Formula::compare(lhs, CmpOp::Leq, rhs)),
            other => {
                self.pos -= 1;
                // Rewind over the right operand is not needed: report at the operator.
                return self.error(format!("expected a comparison operator, found {}", other.describe()));
            }
        })
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut e = self.product()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    e = Expr::add(e, self.product()?);
                }
                Tok::Minus => {
                    self.bump();
                    e = Expr::sub(e, self.product()?);
                }
                _ => return Ok(e),
            }
        }
    }

    fn product(&mut self) -> Result<Expr> {
        let mut e = self.factor()?;
        while self.peek() == &Tok::Star {
            self.bump();
            e = Expr::mul(e, self.factor()?);
        }
        Ok(e)
    }

    fn factor(&mut self) -> Result<Expr> {
        let (line, col) = self.here();
        match self.bump() {
            Tok::Number(n) => Ok(Expr::Num(parse_rational(&n).map_err(|e| Error::Parse { line, col, msg: e.to_string() })?)),
            Tok::Minus => match self.bump() {
                Tok::Number(n) => {
                    let r = parse_rational(&n).map_err(|e| Error::Parse { line, col, msg: e.to_string() })?;
                    Ok(Expr::Num(-r))
                }
                _ => Err(Error::Parse { line, col, msg: "unary minus applies only to numbers".into() }),
            },
            Tok::Tol(i) => Ok(Expr::Tol(i)),
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(&Tok::RParen)?;
                Ok(e)
            }
            Tok::DoubleBar => self.proportion(),
            other => Err(Error::Parse { line, col, msg: format!("expected a proportion expression, found {}", other.describe()) }),
        }
    }

    /// After the opening `||`. Bound variables are only known once the
    /// subscript is read, so the body is parsed twice: once to find the
    /// subscript, then again with the variables in scope.
    fn proportion(&mut self) -> Result<Expr> {
        let start = self.pos;
        let close = self.find_proportion_close()?;
        self.pos = close + 1;
        self.expect(&Tok::SubOpen)?;
        let mut vars = vec![self.ident()?];
        while self.peek() == &Tok::Comma {
            self.bump();
            vars.push(self.ident()?);
        }
        self.expect(&Tok::RBrace)?;
        let end = self.pos;
        for (k, v) in vars.iter().enumerate() {
            self.check_var_name(v)?;
            if vars[..k].contains(v) {
                return self.error(format!("variable `{v}` listed twice in a proportion subscript"));
            }
        }
        self.pos = start;
        let n = self.bound.len();
        self.bound.extend(vars.iter().cloned());
        let res = (|| {
            let body = self.conjunction()?;
            let given = if self.peek() == &Tok::Bar {
                self.bump();
                Some(self.conjunction()?)
            } else {
                None
            };
            if self.pos != close {
                return self.error(format!("expected `||` or `|`, found {}", self.peek().describe()));
            }
            Ok((body, given))
        })();
        self.bound.truncate(n);
        let (body, given) = res?;
        self.pos = end;
        Ok(match given {
            None => Expr::Prop { body: Box::new(body), vars },
            Some(g) => Expr::Cond { body: Box::new(body), given: Box::new(g), vars },
        })
    }

    /// Index of the `||` that closes the proportion term opened just before
    /// `self.pos`. A `||` preceded by an operand closes a term; one preceded by
    /// an operator opens a nested term.
    fn find_proportion_close(&self) -> Result<usize> {
        let mut depth = 1usize;
        let mut k = self.pos;
        while k < self.toks.len() {
            match &self.toks[k].tok {
                Tok::DoubleBar => {
                    let prev = if k == 0 { None } else { Some(&self.toks[k - 1].tok) };
                    let closes = matches!(prev, Some(Tok::RParen | Tok::Ident(_) | Tok::RBrace | Tok::Number(_) | Tok::Tol(_)));
                    if closes {
                        depth -= 1;
                        if depth == 0 {
                            return Ok(k);
                        }
                    } else {
                        depth += 1;
                    }
                }
                Tok::Eof => break,
                _ => {}
            }
            k += 1;
        }
        self.error("unterminated proportion term")
    }
}

fn is_keyword(w: &str) -> bool {
    matches!(w, "exists" | "forall" | "true" | "false" | "vocab" | "kb" | "query" | "eps")
}

fn check_name(name: &str, line: usize, col: usize) -> Result<()> {
    if is_keyword(name) {
        Err(Error::Parse { line, col, msg: format!("`{name}` is a keyword") })
    } else {
        Ok(())
    }
}
