//! Diffie-Hellman key agreement authenticated by a short string that two
//! operators compare out of band, plus a man-in-the-middle simulator.
//!
//! Arithmetic is generic over [`int::GroupInt`]; the aliases below cover the
//! usual choices.

pub mod commitment;
pub mod group;
pub mod int;
pub mod pairing;
pub mod params;
pub mod protocol;
pub mod sim;
pub mod transport;

pub use num_bigint::BigUint;

pub use commitment::{commit, open, Commitment, Decommitment};
pub use group::{
    derive_key, mod_exp, pub_share, DhParams, GroupError, PrivateShare, PublicShare, SessionKey,
};
pub use int::GroupInt;
pub use params::{BuiltinSet, NamedParams, ParamSetId};
pub use protocol::{
    compute_sas, format_sas, AuthNonce, Identity, PairingMessage, ProtocolError, Sas,
};

/// Small groups for tests and simulation.
pub type ToyParams = DhParams<u64>;
pub type ToyNamedParams = NamedParams<u64>;
pub type ToyInitiator = protocol::Initiator<u64>;
pub type ToyResponder = protocol::Responder<u64>;

/// Arbitrary-precision groups.
pub type BigParams = DhParams<BigUint>;
pub type BigNamedParams = NamedParams<BigUint>;
pub type BigInitiator = protocol::Initiator<BigUint>;
pub type BigResponder = protocol::Responder<BigUint>;
pub type BigSessionKey = SessionKey<BigUint>;
