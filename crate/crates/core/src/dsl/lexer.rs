// SPDX-License-Identifier: Apache-2.0

use super::{Diagnostic, Span};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Number(u32),
    LBrace,
    RBrace,
    LParen,
    RParen,
    Lt,
    Gt,
    Comma,
    Semi,
    Bang,
    Hash,
    Arrow,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Number(n) => format!("`{n}`"),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Lt => "`<`".into(),
            Tok::Gt => "`>`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Semi => "`;`".into(),
            Tok::Bang => "`!`".into(),
            Tok::Hash => "`#`".into(),
            Tok::Arrow => "`->`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

/// Splits `text` into tokens. `//` starts a line comment.
pub fn lex(text: &str) -> Result<Vec<Token>, Diagnostic> {
    let mut out = vec![];
    let mut chars = text.char_indices().peekable();
    let (mut line, mut col) = (1u32, 1u32);
    while let Some(&(_, c)) = chars.peek() {
        let span = Span { line, col };
        let mut bump = |chars: &mut std::iter::Peekable<std::str::CharIndices>| {
            let (_, c) = chars.next().expect("peeked");
            if c == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            c
        };
        if c.is_whitespace() {
            bump(&mut chars);
            continue;
        }
        if c == '/' {
            bump(&mut chars);
            if chars.peek().map(|&(_, c)| c) != Some('/') {
                return Err(Diagnostic::error("E001", span, "unexpected character `/`"));
            }
            while chars.peek().is_some_and(|&(_, c)| c != '\n') {
                bump(&mut chars);
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let mut s = String::new();
            while chars
                .peek()
                .is_some_and(|&(_, c)| c.is_ascii_alphanumeric() || c == '_' || c == '\'')
            {
                s.push(bump(&mut chars));
            }
            out.push(Token {
                tok: Tok::Ident(s),
                span,
            });
            continue;
        }
        if c.is_ascii_digit() {
            let mut s = String::new();
            while chars
                .peek()
                .is_some_and(|&(_, c)| c.is_ascii_alphanumeric() || c == '_')
            {
                s.push(bump(&mut chars));
            }
            let tok = match s.parse() {
                Ok(n) => Tok::Number(n),
                Err(_) if s.chars().all(|c| c.is_ascii_digit()) => {
                    return Err(Diagnostic::error("E001", span, format!("number `{s}` is too large")))
                }
                // State and action names may start with a digit.
                Err(_) => Tok::Ident(s),
            };
            out.push(Token { tok, span });
            continue;
        }
        bump(&mut chars);
        let tok = match c {
            '{' => Tok::LBrace,
            '}' => Tok::RBrace,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '<' => Tok::Lt,
            '>' => Tok::Gt,
            ',' => Tok::Comma,
            ';' => Tok::Semi,
            '!' => Tok::Bang,
            '#' => Tok::Hash,
            '-' if chars.peek().map(|&(_, c)| c) == Some('>') => {
                bump(&mut chars);
                Tok::Arrow
            }
            other => {
                return Err(Diagnostic::error(
                    "E001",
                    span,
                    format!("unexpected character `{other}`"),
                ))
            }
        };
        out.push(Token { tok, span });
    }
    out.push(Token {
        tok: Tok::Eof,
        span: Span { line, col },
    });
    Ok(out)
}
