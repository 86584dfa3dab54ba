//! Recursive-descent parser producing [`Program`]s.
//!
//! Operator binding, loosest to tightest: `||`, `;`, prefix `.`.
//! Restriction `|{..}` attaches to the preceding atom; choices bind a whole
//! branch body and extend until the next `[]` or a closing delimiter.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::quantum::Registry;
use crate::syntax::ast::*;
use crate::syntax::lexer::{lex, Tok, Token};

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn peek_at(&self, off: usize) -> Option<&Tok> {
        self.toks.get(self.pos + off).map(|t| &t.tok)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|t| t.tok.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn here(&self) -> (usize, usize) {
        match self.toks.get(self.pos).or_else(|| self.toks.last()) {
            Some(t) => (t.line, t.col),
            None => (1, 1),
        }
    }

    fn err<T>(&self, message: String) -> Result<T> {
        let (line, col) = self.here();
        Err(Error::Syntax { line, col, message })
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<()> {
        match self.peek() {
            Some(t) if *t == want => {
                self.bump();
                Ok(())
            }
            Some(t) => self.err(format!("expected {what}, found {t:?}")),
            None => self.err(format!("expected {what}, found end of input")),
        }
    }

    fn ident(&mut self, what: &str) -> Result<String> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.bump();
                Ok(s)
            }
            Some(t) => self.err(format!("expected {what}, found {t:?}")),
            None => self.err(format!("expected {what}, found end of input")),
        }
    }

    fn program(&mut self) -> Result<Program> {
        let mut defs = BTreeMap::new();
        while self.peek().is_some() {
            let (line, col) = self.here();
            let name = self.ident("definition name")?;
            self.expect(Tok::Equals, "'='")?;
            let body = self.process()?;
            if defs.insert(name.clone(), Def::from_body(body)).is_some() {
                return Err(Error::Syntax {
                    line,
                    col,
                    message: format!("duplicate definition of `{name}`"),
                });
            }
        }
        Ok(Program {
            defs,
            registry: Registry::builtin(),
            fresh_base: 0,
        })
    }

    fn process(&mut self) -> Result<ProcessTerm> {
        if self.peek() == Some(&Tok::ChoiceMark) {
            self.choice()
        } else {
            self.par()
        }
    }

    fn choice(&mut self) -> Result<ProcessTerm> {
        let mut branches = Vec::new();
        while self.peek() == Some(&Tok::ChoiceMark) {
            self.bump();
            let cond = self.cond()?;
            self.expect(Tok::Arrow, "'->'")?;
            branches.push((cond, self.par()?));
        }
        Ok(ProcessTerm::Choice(branches))
    }

    fn cond(&mut self) -> Result<Cond> {
        let lhs = self.cond_arg()?;
        let op = match self.peek() {
            Some(Tok::Equals) => CompOp::Eq,
            Some(Tok::Ne) => CompOp::Ne,
            Some(Tok::Le) => CompOp::Le,
            Some(Tok::Ge) => CompOp::Ge,
            Some(Tok::Lt) => CompOp::Lt,
            Some(Tok::Gt) => CompOp::Gt,
            _ => return self.err("expected comparison operator".into()),
        };
        self.bump();
        let rhs = self.cond_arg()?;
        Ok(Cond { lhs, op, rhs })
    }

    fn cond_arg(&mut self) -> Result<CondArg> {
        match self.peek() {
            Some(Tok::Num(n)) => {
                let n = *n;
                self.bump();
                Ok(CondArg::Num(n))
            }
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.bump();
                Ok(CondArg::Var(s))
            }
            _ => self.err("expected variable or number in condition".into()),
        }
    }

    fn par(&mut self) -> Result<ProcessTerm> {
        let mut t = self.seq()?;
        while self.peek() == Some(&Tok::ParOp) {
            self.bump();
            t = ProcessTerm::Par(Box::new(t), Box::new(self.seq()?));
        }
        Ok(t)
    }

    fn seq(&mut self) -> Result<ProcessTerm> {
        let mut t = self.pfx()?;
        while self.peek() == Some(&Tok::Semi) {
            self.bump();
            t = ProcessTerm::Seq(Box::new(t), Box::new(self.pfx()?));
        }
        Ok(t)
    }

    fn pfx(&mut self) -> Result<ProcessTerm> {
        if let Some(Tok::Ident(_)) = self.peek() {
            match self.peek_at(1) {
                Some(Tok::Bang) => {
                    let gate = self.ident("gate")?;
                    self.bump();
                    let act = match self.peek() {
                        Some(Tok::Num(n)) => {
                            let n = *n;
                            self.bump();
                            Action::EmitValue(gate, n)
                        }
                        Some(Tok::Ident(_)) => {
                            let name = self.ident("value")?;
                            if self.peek() == Some(&Tok::LBracket) {
                                Action::EmitMeasure(gate, name, self.bracket_idents()?)
                            } else {
                                Action::EmitVar(gate, name)
                            }
                        }
                        _ => return self.err("expected value after '!'".into()),
                    };
                    self.expect(Tok::Dot, "'.'")?;
                    return Ok(ProcessTerm::Prefix(act, Box::new(self.pfx()?)));
                }
                Some(Tok::Query) => {
                    let gate = self.ident("gate")?;
                    self.bump();
                    let var = self.ident("variable after '?'")?;
                    self.expect(Tok::Dot, "'.'")?;
                    let act = Action::Receive(gate, var);
                    return Ok(ProcessTerm::Prefix(act, Box::new(self.pfx()?)));
                }
                Some(Tok::LBracket) => {
                    let name = self.ident("name")?;
                    let args = self.bracket_idents()?;
                    if self.peek() == Some(&Tok::Dot) {
                        self.bump();
                        let act = Action::ApplyUnitary(name, args);
                        return Ok(ProcessTerm::Prefix(act, Box::new(self.pfx()?)));
                    }
                    return self.postfix(ProcessTerm::Invoke(name, args));
                }
                _ => {}
            }
        }
        let t = self.atom()?;
        self.postfix(t)
    }

    fn postfix(&mut self, mut t: ProcessTerm) -> Result<ProcessTerm> {
        while self.peek() == Some(&Tok::RestrictOpen) {
            self.bump();
            let mut gates = BTreeSet::new();
            gates.insert(self.ident("gate name")?);
            while self.peek() == Some(&Tok::Comma) {
                self.bump();
                gates.insert(self.ident("gate name")?);
            }
            self.expect(Tok::RBrace, "'}'")?;
            t = ProcessTerm::Restrict(Box::new(t), gates);
        }
        Ok(t)
    }

    fn atom(&mut self) -> Result<ProcessTerm> {
        match self.peek() {
            Some(Tok::KwNil) => {
                self.bump();
                Ok(ProcessTerm::Nil)
            }
            Some(Tok::KwEnd) => {
                self.bump();
                Ok(ProcessTerm::End)
            }
            Some(Tok::LParen) => {
                self.bump();
                let t = self.process()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(t)
            }
            Some(Tok::LBracket) => {
                self.bump();
                self.scope()
            }
            Some(Tok::Ident(_)) => {
                let name = self.ident("name")?;
                let args = if self.peek() == Some(&Tok::LBracket) {
                    self.bracket_idents()?
                } else {
                    Vec::new()
                };
                Ok(ProcessTerm::Invoke(name, args))
            }
            Some(t) => self.err(format!("expected process, found {t:?}")),
            None => self.err("expected process, found end of input".into()),
        }
    }

    fn scope(&mut self) -> Result<ProcessTerm> {
        let mut classical = Vec::new();
        let mut quantum = Vec::new();
        loop {
            match self.peek() {
                Some(Tok::KwNat) => {
                    self.bump();
                    classical.extend(self.bracket_idents()?);
                }
                Some(Tok::KwQubit) => {
                    self.bump();
                    quantum.extend(self.bracket_idents()?);
                }
                _ if classical.is_empty() && quantum.is_empty() => {
                    return self.err("expected 'nat' or 'qubit' declaration".into())
                }
                _ => break,
            }
        }
        self.expect(Tok::Colon, "':'")?;
        let body = self.process()?;
        self.expect(Tok::RBracket, "']'")?;
        Ok(ProcessTerm::Scope {
            classical,
            quantum,
            body: Box::new(body),
        })
    }

    fn bracket_idents(&mut self) -> Result<Vec<String>> {
        self.expect(Tok::LBracket, "'['")?;
        let mut out = vec![self.ident("name")?];
        while self.peek() == Some(&Tok::Comma) {
            self.bump();
            out.push(self.ident("name")?);
        }
        self.expect(Tok::RBracket, "']'")?;
        Ok(out)
    }
}

/// Parse a source file: a sequence of `Name = process` definitions.
pub fn parse_program(src: &str) -> Result<Program> {
    let mut p = Parser { toks: lex(src)?, pos: 0 };
    p.program()
}

/// Parse a single process term (used by tests and diagnostics).
pub fn parse_process(src: &str) -> Result<ProcessTerm> {
    let mut p = Parser { toks: lex(src)?, pos: 0 };
    let t = p.process()?;
    if p.peek().is_some() {
        return p.err("trailing input after process".into());
    }
    Ok(t)
}
