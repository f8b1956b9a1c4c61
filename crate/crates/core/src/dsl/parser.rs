// SPDX-License-Identifier: Apache-2.0

//! Recursive-descent parser for system files.

use super::ast::*;
use super::lexer::{lex, Tok, Token};
use super::{Diagnostic, Span};

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

type PResult<T> = Result<T, Diagnostic>;

pub fn parse(text: &str) -> Result<SystemFile, Diagnostic> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0 };
    let file = p.system()?;
    p.expect(Tok::Eof)?;
    Ok(file)
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn next(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if t.tok != Tok::Eof {
            self.pos += 1;
        }
        t
    }

    fn err<T>(&self, expected: &str) -> PResult<T> {
        let t = self.peek();
        Err(Diagnostic::error(
            "E001",
            t.span,
            format!("expected {expected}, found {}", t.tok.describe()),
        ))
    }

    fn eat(&mut self, tok: Tok) -> bool {
        if self.peek().tok == tok {
            self.next();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: Tok) -> PResult<Span> {
        if self.peek().tok == tok {
            Ok(self.next().span)
        } else {
            self.err(&tok.describe())
        }
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(&self.peek().tok, Tok::Ident(s) if s == kw)
    }

    fn keyword(&mut self, kw: &str) -> PResult<Span> {
        if self.is_kw(kw) {
            Ok(self.next().span)
        } else {
            self.err(&format!("`{kw}`"))
        }
    }

    fn ident(&mut self, what: &str) -> PResult<Ident> {
        match &self.peek().tok {
            Tok::Ident(s) => {
                let name = s.clone();
                let span = self.next().span;
                Ok(Ident { name, span })
            }
            Tok::Number(n) => {
                let name = n.to_string();
                let span = self.next().span;
                Ok(Ident { name, span })
            }
            _ => self.err(what),
        }
    }

    /// `{ a, b, ... }`, possibly empty.
    fn ident_set(&mut self, what: &str) -> PResult<Vec<Ident>> {
        self.expect(Tok::LBrace)?;
        let mut out = vec![];
        if self.eat(Tok::RBrace) {
            return Ok(out);
        }
        loop {
            out.push(self.ident(what)?);
            if self.eat(Tok::RBrace) {
                return Ok(out);
            }
            self.expect(Tok::Comma)?;
        }
    }

    fn system(&mut self) -> PResult<SystemFile> {
        self.keyword("system")?;
        let name = self.ident("system name")?;
        self.expect(Tok::LBrace)?;
        let mut file = SystemFile {
            name,
            alphabet: None,
            sync: vec![],
            mutex: vec![],
            parties: vec![],
            contracts: vec![],
            conjoin: None,
        };
        loop {
            if self.eat(Tok::RBrace) {
                return Ok(file);
            }
            let Tok::Ident(kw) = self.peek().tok.clone() else {
                return self.err("a declaration or `}`");
            };
            match kw.as_str() {
                "alphabet" => {
                    let span = self.next().span;
                    if file.alphabet.is_some() {
                        return Err(Diagnostic::error("E004", span, "duplicate `alphabet` block"));
                    }
                    file.alphabet = Some(self.ident_set("action name")?);
                }
                "sync" => {
                    self.next();
                    file.sync.extend(self.ident_set("action name")?);
                }
                "mutex" => {
                    self.next();
                    file.mutex.extend(self.mutex_block()?);
                }
                "party" => {
                    self.next();
                    file.parties.push(self.party()?);
                }
                "contract" => {
                    self.next();
                    file.contracts.push(self.contract()?);
                }
                "conjoin" => {
                    let span = self.next().span;
                    if file.conjoin.is_some() {
                        return Err(Diagnostic::error("E004", span, "duplicate `conjoin` directive"));
                    }
                    let mut names = vec![];
                    while !self.eat(Tok::Semi) {
                        names.push(self.ident("contract name")?);
                    }
                    file.conjoin = Some(names);
                }
                _ => return self.err("`alphabet`, `sync`, `mutex`, `party`, `contract` or `conjoin`"),
            }
        }
    }

    fn mutex_block(&mut self) -> PResult<Vec<(Ident, Ident)>> {
        self.expect(Tok::LBrace)?;
        let mut out = vec![];
        if self.eat(Tok::RBrace) {
            return Ok(out);
        }
        loop {
            let a = self.ident("action name")?;
            self.expect(Tok::Hash)?;
            let b = self.ident("action name")?;
            out.push((a, b));
            if self.eat(Tok::RBrace) {
                return Ok(out);
            }
            self.expect(Tok::Comma)?;
        }
    }

    fn party(&mut self) -> PResult<PartyDecl> {
        let name = self.ident("party name")?;
        self.expect(Tok::LBrace)?;
        let mut decl = PartyDecl {
            name,
            inits: vec![],
            states: vec![],
        };
        loop {
            if self.eat(Tok::RBrace) {
                return Ok(decl);
            }
            if self.is_kw("init") {
                self.next();
                decl.inits.push(self.ident("state name")?);
                self.expect(Tok::Semi)?;
            } else if self.is_kw("state") {
                self.next();
                let name = self.ident("state name")?;
                self.expect(Tok::LBrace)?;
                let mut edges = vec![];
                while !self.eat(Tok::RBrace) {
                    self.keyword("on")?;
                    let label_span = self.peek().span;
                    let label = self.ident_set("action name")?;
                    self.expect(Tok::Arrow)?;
                    let target = self.ident("state name")?;
                    self.expect(Tok::Semi)?;
                    edges.push(PartyEdge {
                        label,
                        label_span,
                        target,
                    });
                }
                decl.states.push(PartyState { name, edges });
            } else {
                return self.err("`init`, `state` or `}`");
            }
        }
    }

    fn contract(&mut self) -> PResult<ContractDecl> {
        let name = self.ident("contract name")?;
        self.expect(Tok::LBrace)?;
        let mut decl = ContractDecl {
            name,
            inits: vec![],
            states: vec![],
        };
        loop {
            if self.eat(Tok::RBrace) {
                return Ok(decl);
            }
            if self.is_kw("init") {
                self.next();
                decl.inits.push(self.ident("state name")?);
                self.expect(Tok::Semi)?;
            } else if self.is_kw("state") {
                self.next();
                decl.states.push(self.contract_state()?);
            } else {
                return self.err("`init`, `state` or `}`");
            }
        }
    }

    fn contract_state(&mut self) -> PResult<ContractState> {
        let name = self.ident("state name")?;
        self.expect(Tok::LBrace)?;
        let mut st = ContractState {
            name,
            clauses: vec![],
            arms: vec![],
        };
        loop {
            if self.eat(Tok::RBrace) {
                return Ok(st);
            }
            if self.is_kw("clauses") {
                self.next();
                self.expect(Tok::LBrace)?;
                if !self.eat(Tok::RBrace) {
                    loop {
                        st.clauses.push(self.clause()?);
                        if self.eat(Tok::RBrace) {
                            break;
                        }
                        self.expect(Tok::Comma)?;
                    }
                }
            } else if self.is_kw("on") {
                self.next();
                let guard = self.guard_or()?;
                self.expect(Tok::Arrow)?;
                let target = self.ident("state name")?;
                self.expect(Tok::Semi)?;
                st.arms.push(ArmAst {
                    guard: Some(guard),
                    target,
                });
            } else if self.is_kw("else") {
                self.next();
                self.expect(Tok::Arrow)?;
                let target = self.ident("state name")?;
                self.expect(Tok::Semi)?;
                st.arms.push(ArmAst { guard: None, target });
            } else {
                return self.err("`clauses`, `on`, `else` or `}`");
            }
        }
    }

    fn clause(&mut self) -> PResult<ClauseAst> {
        let kind = self.ident("`O`, `P` or `F`")?;
        let (modality, flip) = match kind.name.as_str() {
            "O" => (ModalityAst::Obligation, false),
            "P" => (ModalityAst::Permission, false),
            // F<p>(x) is O<p>(!x).
            "F" => (ModalityAst::Obligation, true),
            _ => {
                return Err(Diagnostic::error(
                    "E001",
                    kind.span,
                    format!("expected `O`, `P` or `F`, found `{}`", kind.name),
                ))
            }
        };
        self.expect(Tok::Lt)?;
        let party_span = self.peek().span;
        let party = match self.next().tok {
            Tok::Number(n) => PartyRef::Index(n),
            Tok::Ident(s) => PartyRef::Name(s),
            other => {
                return Err(Diagnostic::error(
                    "E001",
                    party_span,
                    format!("expected party, found {}", other.describe()),
                ))
            }
        };
        self.expect(Tok::Gt)?;
        self.expect(Tok::LParen)?;
        let negated = self.eat(Tok::Bang);
        let action = self.ident("action name")?;
        self.expect(Tok::RParen)?;
        Ok(ClauseAst {
            modality,
            party,
            party_span,
            negated: negated != flip,
            action,
        })
    }

    fn guard_or(&mut self) -> PResult<GuardAst> {
        let mut g = self.guard_and()?;
        while self.is_kw("or") {
            self.next();
            g = GuardAst::Or(Box::new(g), Box::new(self.guard_and()?));
        }
        Ok(g)
    }

    fn guard_and(&mut self) -> PResult<GuardAst> {
        let mut g = self.guard_unary()?;
        while self.is_kw("and") {
            self.next();
            g = GuardAst::And(Box::new(g), Box::new(self.guard_unary()?));
        }
        Ok(g)
    }

    fn guard_unary(&mut self) -> PResult<GuardAst> {
        if self.eat(Tok::LParen) {
            let g = self.guard_or()?;
            self.expect(Tok::RParen)?;
            return Ok(g);
        }
        let Tok::Ident(kw) = self.peek().tok.clone() else {
            return self.err("a guard");
        };
        match kw.as_str() {
            "not" => {
                self.next();
                Ok(GuardAst::Not(Box::new(self.guard_unary()?)))
            }
            "true" => {
                self.next();
                Ok(GuardAst::Const(true))
            }
            "false" => {
                self.next();
                Ok(GuardAst::Const(false))
            }
            "contains" => {
                self.next();
                self.expect(Tok::LParen)?;
                let a = self.ident("action name")?;
                self.expect(Tok::RParen)?;
                Ok(GuardAst::Contains(a))
            }
            _ => self.err("`contains`, `not`, `true`, `false` or `(`"),
        }
    }
}
