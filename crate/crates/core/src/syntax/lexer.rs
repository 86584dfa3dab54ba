//! Tokenizer for the concrete process syntax.

use std::iter::Peekable;
use std::str::Chars;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    Ident(String),
    Num(i64),
    KwNil,
    KwEnd,
    KwNat,
    KwQubit,
    Dot,
    Semi,
    Comma,
    Colon,
    Bang,
    Query,
    Equals,
    Arrow,
    /// `||`
    ParOp,
    /// `[]`
    ChoiceMark,
    /// `|{`
    RestrictOpen,
    LParen,
    RParen,
    LBracket,
    RBracket,
    RBrace,
    Ne,
    Le,
    Ge,
    Lt,
    Gt,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

struct Cursor<'a> {
    chars: Peekable<Chars<'a>>,
    line: usize,
    col: usize,
}

impl Cursor<'_> {
    fn peek(&mut self) -> Option<char> {
        self.chars.peek().copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn err<T>(&self, line: usize, col: usize, message: String) -> Result<T> {
        Err(Error::Syntax { line, col, message })
    }
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_continue(c: char) -> bool {
    // '#' keeps elaboration-renamed identifiers lexable, so printed terms
    // round-trip.
    c.is_ascii_alphanumeric() || c == '_' || c == '#'
}

/// Tokenize `src`. `--` starts a comment running to end of line.
pub fn lex(src: &str) -> Result<Vec<Token>> {
    let mut cur = Cursor {
        chars: src.chars().peekable(),
        line: 1,
        col: 1,
    };
    let mut toks = Vec::new();

    while let Some(c) = cur.peek() {
        let (tline, tcol) = (cur.line, cur.col);
        if c.is_whitespace() {
            cur.bump();
            continue;
        }
        if c == '-' {
            cur.bump();
            match cur.peek() {
                Some('-') => {
                    while let Some(c) = cur.peek() {
                        if c == '\n' {
                            break;
                        }
                        cur.bump();
                    }
                    continue;
                }
                Some('>') => {
                    cur.bump();
                    toks.push(Token { tok: Tok::Arrow, line: tline, col: tcol });
                    continue;
                }
                _ => return cur.err(tline, tcol, "expected '--' or '->' after '-'".into()),
            }
        }
        if is_ident_start(c) {
            let mut s = String::new();
            while let Some(c) = cur.peek() {
                if !is_ident_continue(c) {
                    break;
                }
                s.push(c);
                cur.bump();
            }
            let tok = match s.as_str() {
                "nil" => Tok::KwNil,
                "end" => Tok::KwEnd,
                "nat" => Tok::KwNat,
                "qubit" => Tok::KwQubit,
                _ => Tok::Ident(s),
            };
            toks.push(Token { tok, line: tline, col: tcol });
            continue;
        }
        if c.is_ascii_digit() {
            let mut n: i64 = 0;
            while let Some(c) = cur.peek() {
                if !c.is_ascii_digit() {
                    break;
                }
                cur.bump();
                n = match n
                    .checked_mul(10)
                    .and_then(|n| n.checked_add(c as i64 - '0' as i64))
                {
                    Some(n) => n,
                    None => return cur.err(tline, tcol, "numeric literal out of range".into()),
                };
            }
            toks.push(Token { tok: Tok::Num(n), line: tline, col: tcol });
            continue;
        }
        cur.bump();
        let tok = match c {
            '.' => Tok::Dot,
            ';' => Tok::Semi,
            ',' => Tok::Comma,
            ':' => Tok::Colon,
            '!' => Tok::Bang,
            '?' => Tok::Query,
            '=' => Tok::Equals,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            ']' => Tok::RBracket,
            '}' => Tok::RBrace,
            '[' => match cur.peek() {
                Some(']') => {
                    cur.bump();
                    Tok::ChoiceMark
                }
                _ => Tok::LBracket,
            },
            '|' => match cur.peek() {
                Some('|') => {
                    cur.bump();
                    Tok::ParOp
                }
                Some('{') => {
                    cur.bump();
                    Tok::RestrictOpen
                }
                _ => return cur.err(tline, tcol, "expected '||' or '|{' after '|'".into()),
            },
            '/' => match cur.peek() {
                Some('=') => {
                    cur.bump();
                    Tok::Ne
                }
                _ => return cur.err(tline, tcol, "expected '/=' after '/'".into()),
            },
            '<' => match cur.peek() {
                Some('=') => {
                    cur.bump();
                    Tok::Le
                }
                _ => Tok::Lt,
            },
            '>' => match cur.peek() {
                Some('=') => {
                    cur.bump();
                    Tok::Ge
                }
                _ => Tok::Gt,
            },
            _ => return cur.err(tline, tcol, format!("unexpected character {c:?}")),
        };
        toks.push(Token { tok, line: tline, col: tcol });
    }
    Ok(toks)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(src: &str) -> Vec<Tok> {
        lex(src).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn punctuation_and_compounds() {
        assert_eq!(
            kinds("|| |{ [] [ ] -> /= <= >= < > ="),
            vec![
                Tok::ParOp,
                Tok::RestrictOpen,
                Tok::ChoiceMark,
                Tok::LBracket,
                Tok::RBracket,
                Tok::Arrow,
                Tok::Ne,
                Tok::Le,
                Tok::Ge,
                Tok::Lt,
                Tok::Gt,
                Tok::Equals,
            ]
        );
    }

    #[test]
    fn keywords_and_idents() {
        assert_eq!(
            kinds("nil end nat qubit M_std x#1"),
            vec![
                Tok::KwNil,
                Tok::KwEnd,
                Tok::KwNat,
                Tok::KwQubit,
                Tok::Ident("M_std".into()),
                Tok::Ident("x#1".into()),
            ]
        );
    }

    #[test]
    fn comments_are_skipped() {
        assert_eq!(
            kinds("g!0 -- send a zero\n. end"),
            vec![
                Tok::Ident("g".into()),
                Tok::Bang,
                Tok::Num(0),
                Tok::Dot,
                Tok::KwEnd
            ]
        );
    }

    #[test]
    fn positions_track_lines() {
        let toks = lex("a\n  b").unwrap();
        assert_eq!((toks[0].line, toks[0].col), (1, 1));
        assert_eq!((toks[1].line, toks[1].col), (2, 3));
    }

    #[test]
    fn bare_pipe_is_an_error() {
        let err = lex("a | b").unwrap_err();
        assert!(matches!(err, Error::Syntax { col: 3, .. }));
    }
}
