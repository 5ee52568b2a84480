//! Runs one protocol role to completion over a [`Channel`].

use rand::RngCore;
use thiserror::Error;

use crate::group::SessionKey;
use crate::int::GroupInt;
use crate::params::NamedParams;
use crate::protocol::{
    Confirmation, Identity, Initiator, PairingMessage, Phase, ProtocolError, Responder, Sas,
};
use crate::transport::{Channel, TransportError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PairingError {
    #[error(transparent)]
    Transport(#[from] TransportError),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error("operator rejected the authentication string")]
    Rejected,
}

/// A confirmed pairing.
#[derive(Debug, Clone)]
pub struct Paired<T> {
    pub remote_identity: Identity,
    pub sas: Sas,
    pub key: SessionKey<T>,
    pub phase_log: Vec<Phase>,
}

fn recv<T: GroupInt, C: Channel + ?Sized>(ch: &mut C) -> Result<PairingMessage<T>, PairingError> {
    let frame = ch.recv_frame()?;
    Ok(PairingMessage::decode(&frame)?)
}

fn send<T: GroupInt, C: Channel + ?Sized>(
    ch: &mut C,
    msg: &PairingMessage<T>,
) -> Result<(), PairingError> {
    ch.send_frame(&msg.encode()?)?;
    Ok(())
}

/// Connecting side. `confirm` is shown the remote identity and SAS and
/// returns the operator's decision.
pub fn run_initiator<T, C, R, F>(
    channel: &mut C,
    params: &NamedParams<T>,
    identity: Identity,
    k: u8,
    rng: &mut R,
    confirm: F,
) -> Result<Paired<T>, PairingError>
where
    T: GroupInt,
    C: Channel + ?Sized,
    R: RngCore + ?Sized,
    F: FnOnce(&Identity, &Sas) -> bool,
{
    let (mut session, m1) = Initiator::start(params, identity, k, rng)?;
    let run = |session: &mut Initiator<T>, channel: &mut C| -> Result<Sas, PairingError> {
        send(channel, &m1)?;
        let m2 = recv(channel)?;
        let (m3, sas) = session.on_payload(&m2)?;
        send(channel, &m3)?;
        Ok(sas)
    };
    let sas = run(&mut session, channel).inspect_err(|_| session.abort())?;
    let remote = session
        .remote_identity()
        .cloned()
        .expect("known once SAS is ready");
    let accept = confirm(&remote, &sas);
    match session.confirm(accept)? {
        Confirmation::Accepted(key) => Ok(Paired {
            remote_identity: remote,
            sas,
            key,
            phase_log: session.phase_log().to_vec(),
        }),
        Confirmation::Rejected => Err(PairingError::Rejected),
    }
}

/// Listening side.
pub fn run_responder<T, C, R, F>(
    channel: &mut C,
    params: &NamedParams<T>,
    identity: Identity,
    k: u8,
    rng: &mut R,
    confirm: F,
) -> Result<Paired<T>, PairingError>
where
    T: GroupInt,
    C: Channel + ?Sized,
    R: RngCore + ?Sized,
    F: FnOnce(&Identity, &Sas) -> bool,
{
    let m1 = recv(channel)?;
    let (mut session, m2) = Responder::on_commit(params, identity, k, rng, &m1)?;
    let run = |session: &mut Responder<T>, channel: &mut C| -> Result<Sas, PairingError> {
        send(channel, &m2)?;
        let m3 = recv(channel)?;
        Ok(session.on_decommit(&m3)?)
    };
    let sas = run(&mut session, channel).inspect_err(|_| session.abort())?;
    let remote = session
        .remote_identity()
        .cloned()
        .expect("known once SAS is ready");
    let accept = confirm(&remote, &sas);
    match session.confirm(accept)? {
        Confirmation::Accepted(key) => Ok(Paired {
            remote_identity: remote,
            sas,
            key,
            phase_log: session.phase_log().to_vec(),
        }),
        Confirmation::Rejected => Err(PairingError::Rejected),
    }
}
