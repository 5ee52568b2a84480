//! The three-message key agreement.
//!
//! ```text
//!   Initiator (A)                          Responder (B)
//!   (c, d) = commit(ID_A || g^a || N_A)
//!            ------------- c ------------->
//!            <------ ID_B || g^b || N_B ---
//!            ------------- d ------------->
//!                                          m_A = open(c, d)
//!   S_A = N_A ^ N_B                        S_B = N_A ^ N_B
//! ```
//!
//! Both operators compare the SAS out of band. The session key `g^(ab)` is
//! computed only after the local operator confirms.

use std::time::Duration;

use thiserror::Error;

use crate::commitment::CommitError;
use crate::group::GroupError;
use crate::params::ParamSetId;

mod sas;
mod session;
pub mod wire;

pub use sas::{check_k, compute_sas, format_sas, octet_len, AuthNonce, Sas, DEFAULT_K, MAX_K};
pub use session::{Confirmation, Initiator, Phase, Responder, Role};
pub use wire::{Identity, PairingMessage, PairingPayload};

/// How long a peer waits for each message before aborting.
pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(30);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProtocolError {
    #[error("malformed message: {0}")]
    Malformed(String),
    #[error("commitment does not open: message was tampered with")]
    OpenFailed,
    #[error("peer share is not an element of the order-q subgroup")]
    SubgroupCheckFailed,
    #[error("operation not allowed in phase {0:?}")]
    WrongPhase(Phase),
    #[error("nonce lengths differ: local k = {local}, remote k = {remote}")]
    LengthMismatch { local: u8, remote: u8 },
    #[error("peer uses k = {remote}, expected {local}")]
    KMismatch { local: u8, remote: u8 },
    #[error("peer uses parameter set {remote}, expected {local}")]
    ParamSetMismatch {
        local: ParamSetId,
        remote: ParamSetId,
    },
    #[error("k = {0} outside [1, 64]")]
    InvalidK(u8),
    #[error("identity must be 1 to 64 octets, got {0}")]
    InvalidIdentity(usize),
    #[error("random source failed: {0}")]
    RngFailure(String),
    #[error(transparent)]
    Group(GroupError),
}

impl From<GroupError> for ProtocolError {
    fn from(e: GroupError) -> Self {
        match e {
            GroupError::SubgroupCheckFailed => ProtocolError::SubgroupCheckFailed,
            GroupError::RngFailure(msg) => ProtocolError::RngFailure(msg),
            other => ProtocolError::Group(other),
        }
    }
}

impl From<CommitError> for ProtocolError {
    fn from(e: CommitError) -> Self {
        match e {
            CommitError::OpenFailed => ProtocolError::OpenFailed,
            CommitError::RngFailure(msg) => ProtocolError::RngFailure(msg),
            CommitError::EmptyMessage => {
                ProtocolError::Malformed("empty commitment message".into())
            }
        }
    }
}
