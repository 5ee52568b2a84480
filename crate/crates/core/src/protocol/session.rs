use rand::RngCore;

use crate::commitment::{self, Commitment, Decommitment};
use crate::group::{derive_key, PrivateShare, PublicShare, SessionKey};
use crate::int::GroupInt;
use crate::params::NamedParams;

use super::sas::{check_k, compute_sas, AuthNonce, Sas};
use super::wire::{Identity, PairingMessage, PairingPayload};
use super::ProtocolError;

/// Session progress. Phases only move forward; `Aborted` is terminal.
///
/// The initiator passes through `Created, CommitSent, PayloadReceived,
/// DecommitSent, SasReady`, the responder through `Created, CommitReceived,
/// PayloadSent, DecommitReceived, SasReady`. Both end in `Confirmed` or `Aborted`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Phase {
    Created,
    CommitSent,
    CommitReceived,
    PayloadSent,
    PayloadReceived,
    DecommitSent,
    DecommitReceived,
    SasReady,
    Confirmed,
    Aborted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    Initiator,
    Responder,
}

/// Result of the operator's SAS comparison.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Confirmation<T> {
    Accepted(SessionKey<T>),
    Rejected,
}

impl<T> Confirmation<T> {
    pub fn key(&self) -> Option<&SessionKey<T>> {
        match self {
            Confirmation::Accepted(key) => Some(key),
            Confirmation::Rejected => None,
        }
    }
}

#[derive(Debug, Clone)]
struct Core<T> {
    params: NamedParams<T>,
    identity: Identity,
    private: PrivateShare<T>,
    public: PublicShare<T>,
    nonce: AuthNonce,
    remote: Option<PairingPayload<T>>,
    sas: Option<Sas>,
    phase: Phase,
    log: Vec<Phase>,
    key_derived: bool,
}

impl<T: GroupInt> Core<T> {
    fn new(
        params: &NamedParams<T>,
        identity: Identity,
        private: PrivateShare<T>,
        nonce: AuthNonce,
    ) -> Result<Self, ProtocolError> {
        check_k(nonce.k())?;
        let public = private.public_share(&params.params);
        Ok(Core {
            params: params.clone(),
            identity,
            private,
            public,
            nonce,
            remote: None,
            sas: None,
            phase: Phase::Created,
            log: vec![Phase::Created],
            key_derived: false,
        })
    }

    fn own_payload(&self) -> PairingPayload<T> {
        PairingPayload {
            identity: self.identity.clone(),
            public_share: self.public.value().clone(),
            auth_nonce: self.nonce,
        }
    }

    fn advance(&mut self, next: Phase) {
        assert!(
            next > self.phase,
            "phase {next:?} does not follow {:?}",
            self.phase
        );
        self.phase = next;
        self.log.push(next);
    }

    fn abort(&mut self) {
        if self.phase != Phase::Aborted {
            self.advance(Phase::Aborted);
        }
    }

    fn expect(&self, phase: Phase) -> Result<(), ProtocolError> {
        if self.phase == phase {
            Ok(())
        } else {
            Err(ProtocolError::WrongPhase(self.phase))
        }
    }

    /// Runs a step; any error aborts the session.
    fn step<R>(
        &mut self,
        f: impl FnOnce(&mut Self) -> Result<R, ProtocolError>,
    ) -> Result<R, ProtocolError> {
        if self.phase == Phase::Aborted {
            return Err(ProtocolError::WrongPhase(Phase::Aborted));
        }
        let out = f(self);
        if out.is_err() {
            self.abort();
        }
        out
    }

    /// Checks the remote share, stores the remote payload and computes the SAS.
    fn accept_remote(&mut self, payload: PairingPayload<T>) -> Result<Sas, ProtocolError> {
        PublicShare::from_untrusted(&self.params.params, payload.public_share.clone())?;
        let sas = compute_sas(&self.nonce, &payload.auth_nonce)?;
        self.remote = Some(payload);
        self.sas = Some(sas);
        Ok(sas)
    }

    fn confirm(&mut self, accept: bool) -> Result<Confirmation<T>, ProtocolError> {
        self.expect(Phase::SasReady)?;
        if !accept {
            self.abort();
            return Ok(Confirmation::Rejected);
        }
        self.step(|core| {
            core.advance(Phase::Confirmed);
            let remote = core
                .remote
                .as_ref()
                .expect("remote payload stored before SasReady");
            let key = derive_key(&core.params.params, &remote.public_share, &core.private)?;
            core.key_derived = true;
            Ok(Confirmation::Accepted(key))
        })
    }
}

macro_rules! session_accessors {
    () => {
        pub fn phase(&self) -> Phase {
            self.core.phase
        }

        /// Every phase entered, in order.
        pub fn phase_log(&self) -> &[Phase] {
            &self.core.log
        }

        pub fn sas(&self) -> Option<Sas> {
            self.core.sas
        }

        pub fn identity(&self) -> &Identity {
            &self.core.identity
        }

        /// Identity claimed by the peer; shown next to the SAS.
        pub fn remote_identity(&self) -> Option<&Identity> {
            self.core.remote.as_ref().map(|p| &p.identity)
        }

        pub fn remote_payload(&self) -> Option<&PairingPayload<T>> {
            self.core.remote.as_ref()
        }

        pub fn auth_nonce(&self) -> AuthNonce {
            self.core.nonce
        }

        pub fn public_share(&self) -> &PublicShare<T> {
            &self.core.public
        }

        pub fn params(&self) -> &NamedParams<T> {
            &self.core.params
        }

        /// Whether `derive_key` ever ran for this session.
        pub fn key_was_derived(&self) -> bool {
            self.core.key_derived
        }

        /// Moves the session to `Aborted`, e.g. on a transport failure.
        pub fn abort(&mut self) {
            self.core.abort();
        }

        /// Completes the session after the operator compared the SAS. Rejection
        /// aborts without deriving any key material.
        pub fn confirm(&mut self, accept: bool) -> Result<Confirmation<T>, ProtocolError> {
            self.core.confirm(accept)
        }
    };
}

/// The committing side (A).
#[derive(Debug, Clone)]
pub struct Initiator<T> {
    core: Core<T>,
    decommitment: Decommitment,
}

impl<T: GroupInt> Initiator<T> {
    pub const ROLE: Role = Role::Initiator;

    /// Draws `a` and `N_A`, commits to `ID_A || g^a || N_A` and returns the
    /// commitment message.
    pub fn start<R: RngCore + ?Sized>(
        params: &NamedParams<T>,
        identity: Identity,
        k: u8,
        rng: &mut R,
    ) -> Result<(Self, PairingMessage<T>), ProtocolError> {
        check_k(k)?;
        let private = PrivateShare::generate(&params.params, rng)?;
        let nonce = AuthNonce::generate(k, rng)?;
        Self::start_with(params, identity, private, nonce, rng)
    }

    /// As [`Initiator::start`] with caller-chosen secrets; `rng` only supplies
    /// the commitment nonce.
    pub fn start_with<R: RngCore + ?Sized>(
        params: &NamedParams<T>,
        identity: Identity,
        private: PrivateShare<T>,
        nonce: AuthNonce,
        rng: &mut R,
    ) -> Result<(Self, PairingMessage<T>), ProtocolError> {
        let mut core = Core::new(params, identity, private, nonce)?;
        let encoded = core.own_payload().encode_fields()?;
        let (c, decommitment) = commitment::commit(&encoded, rng)?;
        core.advance(Phase::CommitSent);
        Ok((Initiator { core, decommitment }, PairingMessage::Commit(c)))
    }

    /// Handles `m_B`: checks parameter set, k and the share, then releases the
    /// decommitment. Nothing is released if any check fails.
    pub fn on_payload(
        &mut self,
        msg: &PairingMessage<T>,
    ) -> Result<(PairingMessage<T>, Sas), ProtocolError> {
        self.core.expect(Phase::CommitSent)?;
        let decommitment = &self.decommitment;
        self.core.step(|core| {
            let PairingMessage::Payload { param_set, payload } = msg else {
                return Err(ProtocolError::Malformed("expected payload message".into()));
            };
            if *param_set != core.params.id {
                return Err(ProtocolError::ParamSetMismatch {
                    local: core.params.id,
                    remote: *param_set,
                });
            }
            if payload.auth_nonce.k() != core.nonce.k() {
                return Err(ProtocolError::KMismatch {
                    local: core.nonce.k(),
                    remote: payload.auth_nonce.k(),
                });
            }
            let sas = core.accept_remote(payload.clone())?;
            core.advance(Phase::PayloadReceived);
            core.advance(Phase::DecommitSent);
            core.advance(Phase::SasReady);
            Ok((PairingMessage::Decommit(decommitment.clone()), sas))
        })
    }

    session_accessors!();
}

/// The answering side (B).
#[derive(Debug, Clone)]
pub struct Responder<T> {
    core: Core<T>,
    commitment: Commitment,
}

impl<T: GroupInt> Responder<T> {
    pub const ROLE: Role = Role::Responder;

    /// Stores the received commitment and answers with `ID_B || g^b || N_B`.
    pub fn on_commit<R: RngCore + ?Sized>(
        params: &NamedParams<T>,
        identity: Identity,
        k: u8,
        rng: &mut R,
        msg: &PairingMessage<T>,
    ) -> Result<(Self, PairingMessage<T>), ProtocolError> {
        check_k(k)?;
        let private = PrivateShare::generate(&params.params, rng)?;
        let nonce = AuthNonce::generate(k, rng)?;
        Self::on_commit_with(params, identity, private, nonce, msg)
    }

    pub fn on_commit_with(
        params: &NamedParams<T>,
        identity: Identity,
        private: PrivateShare<T>,
        nonce: AuthNonce,
        msg: &PairingMessage<T>,
    ) -> Result<(Self, PairingMessage<T>), ProtocolError> {
        let PairingMessage::Commit(c) = msg else {
            return Err(ProtocolError::Malformed(
                "expected commitment message".into(),
            ));
        };
        let mut core = Core::new(params, identity, private, nonce)?;
        core.advance(Phase::CommitReceived);
        let reply = PairingMessage::Payload {
            param_set: core.params.id,
            payload: core.own_payload(),
        };
        core.advance(Phase::PayloadSent);
        Ok((
            Responder {
                core,
                commitment: *c,
            },
            reply,
        ))
    }

    /// Opens the commitment, decodes and checks `m_A`, and computes the SAS.
    pub fn on_decommit(&mut self, msg: &PairingMessage<T>) -> Result<Sas, ProtocolError> {
        self.core.expect(Phase::PayloadSent)?;
        let c = self.commitment;
        self.core.step(|core| {
            let PairingMessage::Decommit(d) = msg else {
                return Err(ProtocolError::Malformed(
                    "expected decommitment message".into(),
                ));
            };
            let opened = commitment::open(&c, d)?;
            let payload = PairingPayload::decode_fields(opened, core.nonce.k())?;
            let sas = core.accept_remote(payload)?;
            core.advance(Phase::DecommitReceived);
            core.advance(Phase::SasReady);
            Ok(sas)
        })
    }

    pub fn commitment(&self) -> &Commitment {
        &self.commitment
    }

    session_accessors!();
}
