//! Rule files for default reasoning: `Bird -> Fly;` is a default and
//! `Penguin => Bird;` a strict rule. Both sides are propositional formulas over
//! bare proposition names.

use crate::error::{Error, Result};
use crate::model::PropFormula;
use crate::parser::lexer::{tokenize, Tok, Token};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Arrow {
    Default,
    Strict,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RawRule {
    pub antecedent: PropFormula,
    pub arrow: Arrow,
    pub consequent: PropFormula,
}

pub fn parse_rules(text: &str) -> Result<Vec<RawRule>> {
    let mut p = RuleParser { toks: tokenize(text)?, pos: 0 };
    let mut out = Vec::new();
    while p.peek() != &Tok::Eof {
        out.push(p.rule()?);
        if p.peek() == &Tok::Semi {
            p.pos += 1;
        } else if p.peek() != &Tok::Eof {
            return p.error("expected `;`");
        }
    }
    Ok(out)
}

/// Parses a single rule such as `Penguin -> !Fly`.
pub fn parse_rule(text: &str) -> Result<RawRule> {
    let mut p = RuleParser { toks: tokenize(text)?, pos: 0 };
    let r = p.rule()?;
    if p.peek() == &Tok::Semi {
        p.pos += 1;
    }
    if p.peek() != &Tok::Eof {
        return p.error("trailing input after rule");
    }
    Ok(r)
}

pub fn parse_prop(text: &str) -> Result<PropFormula> {
    let mut p = RuleParser { toks: tokenize(text)?, pos: 0 };
    let f = p.disj()?;
    if p.peek() != &Tok::Eof {
        return p.error("trailing input after formula");
    }
    Ok(f)
}

struct RuleParser {
    toks: Vec<Token>,
    pos: usize,
}

impl RuleParser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, msg: &str) -> Result<T> {
        let t = &self.toks[self.pos];
        Err(Error::Parse { line: t.line, col: t.col, msg: format!("{msg}, found {}", t.tok.describe()) })
    }

    fn rule(&mut self) -> Result<RawRule> {
        let antecedent = self.disj()?;
        let arrow = match self.peek() {
            Tok::Arrow => Arrow::Default,
            Tok::FatArrow => Arrow::Strict,
            _ => return self.error("expected `->` or `=>`"),
        };
        self.bump();
        let consequent = self.disj()?;
        Ok(RawRule { antecedent, arrow, consequent })
    }

    fn disj(&mut self) -> Result<PropFormula> {
        let mut f = self.conj()?;
        while self.peek() == &Tok::Bar {
            self.bump();
            f = PropFormula::or(f, self.conj()?);
        }
        Ok(f)
    }

    fn conj(&mut self) -> Result<PropFormula> {
        let mut f = self.unary()?;
        while self.peek() == &Tok::Amp {
            self.bump();
            f = PropFormula::and(f, self.unary()?);
        }
        Ok(f)
    }

    fn unary(&mut self) -> Result<PropFormula> {
        match self.peek().clone() {
            Tok::Bang => {
                self.bump();
                Ok(PropFormula::not(self.unary()?))
            }
            Tok::LParen => {
                self.bump();
                let f = self.disj()?;
                if self.bump() != Tok::RParen {
                    self.pos -= 1;
                    return self.error("expected `)`");
                }
                Ok(f)
            }
            Tok::Ident(w) => {
                self.bump();
                Ok(match w.as_str() {
                    "true" => PropFormula::True,
                    "false" => PropFormula::False,
                    _ => PropFormula::Var(w),
                })
            }
            _ => self.error("expected a proposition"),
        }
    }
}
