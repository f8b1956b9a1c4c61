// SPDX-License-Identifier: Apache-2.0

//! Syntax tree of a system file. Spans never take part in equality, so
//! trees compare structurally.

use super::Span;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ident {
    pub name: String,
    pub span: Span,
}

impl Ident {
    pub fn new(name: impl Into<String>) -> Self {
        Ident {
            name: name.into(),
            span: Span::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SystemFile {
    pub name: Ident,
    /// `None` when the block is absent; an empty list when written as `{}`.
    pub alphabet: Option<Vec<Ident>>,
    pub sync: Vec<Ident>,
    pub mutex: Vec<(Ident, Ident)>,
    pub parties: Vec<PartyDecl>,
    pub contracts: Vec<ContractDecl>,
    pub conjoin: Option<Vec<Ident>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartyDecl {
    pub name: Ident,
    pub inits: Vec<Ident>,
    pub states: Vec<PartyState>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartyState {
    pub name: Ident,
    pub edges: Vec<PartyEdge>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartyEdge {
    pub label: Vec<Ident>,
    pub label_span: Span,
    pub target: Ident,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContractDecl {
    pub name: Ident,
    pub inits: Vec<Ident>,
    pub states: Vec<ContractState>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContractState {
    pub name: Ident,
    pub clauses: Vec<ClauseAst>,
    pub arms: Vec<ArmAst>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModalityAst {
    Obligation,
    Permission,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PartyRef {
    Index(u32),
    Name(String),
}

/// A clause after prohibition desugaring.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClauseAst {
    pub modality: ModalityAst,
    pub party: PartyRef,
    pub party_span: Span,
    pub negated: bool,
    pub action: Ident,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ArmAst {
    /// `None` for `else`.
    pub guard: Option<GuardAst>,
    pub target: Ident,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GuardAst {
    Const(bool),
    Contains(Ident),
    Not(Box<GuardAst>),
    And(Box<GuardAst>, Box<GuardAst>),
    Or(Box<GuardAst>, Box<GuardAst>),
}
