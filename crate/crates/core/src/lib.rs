// SPDX-License-Identifier: Apache-2.0

//! Verification engine for two-party contract automata.

pub mod automata;
pub mod composition;
pub mod conflicts;
pub mod contract;
pub mod dot;
pub mod dsl;
pub mod error;
pub mod oracle;
pub mod par;
pub mod satisfaction;
pub mod strictness;

pub use automata::{ActionId, ActionLiteral, ActionSet, Alphabet, MultiActionAutomaton, MutexRelation, StateId};
pub use composition::{
    build_regulated_system, check_well_formed, sync_compose, ComposedAutomaton, Participation, RegulatedSystem, SyncSet,
};
pub use contract::{CaStateId, Clause, ContractAutomaton, Duties, Guard, Modality, Party};
pub use error::{ModelError, OracleError};
pub use par::Parallelism;
