//! Single-threaded execution of one initiator/responder pair over an
//! interposed channel.

use rand::RngCore;

use crate::group::{PrivateShare, SessionKey};
use crate::int::GroupInt;
use crate::params::NamedParams;
use crate::protocol::{
    AuthNonce, Confirmation, Identity, Initiator, PairingMessage, Phase, ProtocolError, Responder,
    Sas,
};
use crate::transport::{make_interposed_pair, Adversary, Channel, TranscriptEvent};

pub const INITIATOR_ID: &str = "alice";
pub const RESPONDER_ID: &str = "bob";

/// Secrets and identities for the two honest parties.
#[derive(Debug, Clone)]
pub struct SessionSetup<T> {
    pub params: NamedParams<T>,
    pub initiator_id: Identity,
    pub responder_id: Identity,
    pub initiator_private: PrivateShare<T>,
    pub responder_private: PrivateShare<T>,
    pub initiator_nonce: AuthNonce,
    pub responder_nonce: AuthNonce,
}

impl<T: GroupInt> SessionSetup<T> {
    /// Draws both parties' secrets from `rng`.
    pub fn generate<R: RngCore + ?Sized>(
        params: &NamedParams<T>,
        k: u8,
        rng: &mut R,
    ) -> Result<Self, ProtocolError> {
        Ok(SessionSetup {
            params: params.clone(),
            initiator_id: Identity::new(INITIATOR_ID)?,
            responder_id: Identity::new(RESPONDER_ID)?,
            initiator_private: PrivateShare::generate(&params.params, rng)?,
            responder_private: PrivateShare::generate(&params.params, rng)?,
            initiator_nonce: AuthNonce::generate(k, rng)?,
            responder_nonce: AuthNonce::generate(k, rng)?,
        })
    }
}

/// Everything observable after a run.
#[derive(Debug, Clone)]
pub struct SessionRun<T> {
    pub initiator_sas: Option<Sas>,
    pub responder_sas: Option<Sas>,
    pub initiator_error: Option<ProtocolError>,
    pub responder_error: Option<ProtocolError>,
    pub initiator_key: Option<SessionKey<T>>,
    pub responder_key: Option<SessionKey<T>>,
    /// The share each victim accepted from "the other side".
    pub initiator_saw_share: Option<T>,
    pub responder_saw_share: Option<T>,
    pub initiator_phases: Vec<Phase>,
    pub responder_phases: Vec<Phase>,
    pub transcript: Vec<TranscriptEvent>,
}

impl<T> SessionRun<T> {
    /// Both SAS values exist and are equal.
    pub fn sas_match(&self) -> bool {
        matches!((self.initiator_sas, self.responder_sas), (Some(a), Some(b)) if a == b)
    }
}

fn note(slot: &mut Option<ProtocolError>, e: ProtocolError) {
    slot.get_or_insert(e);
}

/// Runs the exchange to quiescence with `adversary` on the wire, then lets
/// each operator confirm iff the two SAS strings are equal.
///
/// A party that never reaches `SasReady` is aborted, which is what a timeout
/// would do on a real channel.
pub fn run_session<T, A, R>(
    setup: &SessionSetup<T>,
    adversary: A,
    commit_rng: &mut R,
) -> SessionRun<T>
where
    T: GroupInt,
    A: Adversary + 'static,
    R: RngCore + ?Sized,
{
    let (mut ep_a, mut ep_b, transcript) = make_interposed_pair(adversary);
    let mut a_err = None;
    let mut b_err = None;

    let (mut initiator, m1) = Initiator::start_with(
        &setup.params,
        setup.initiator_id.clone(),
        setup.initiator_private.clone(),
        setup.initiator_nonce,
        commit_rng,
    )
    .expect("honest initiator setup is valid");
    ep_a.send_frame(&m1.encode().expect("honest frame encodes"))
        .expect("wire accepts frame");

    let mut responder: Option<Responder<T>> = None;
    loop {
        let mut progressed = false;
        while let Some(frame) = ep_b.try_recv_frame() {
            progressed = true;
            let msg = match PairingMessage::<T>::decode(&frame) {
                Ok(msg) => msg,
                Err(e) => {
                    if let Some(r) = responder.as_mut() {
                        r.abort();
                    }
                    note(&mut b_err, e);
                    continue;
                }
            };
            match responder.as_mut() {
                None => match Responder::on_commit_with(
                    &setup.params,
                    setup.responder_id.clone(),
                    setup.responder_private.clone(),
                    setup.responder_nonce,
                    &msg,
                ) {
                    Ok((r, m2)) => {
                        responder = Some(r);
                        let _ = ep_b.send_frame(&m2.encode().expect("honest frame encodes"));
                    }
                    Err(e) => note(&mut b_err, e),
                },
                Some(r) => {
                    if let Err(e) = r.on_decommit(&msg) {
                        note(&mut b_err, e);
                    }
                }
            }
        }
        while let Some(frame) = ep_a.try_recv_frame() {
            progressed = true;
            let result = PairingMessage::<T>::decode(&frame)
                .inspect_err(|_| initiator.abort())
                .and_then(|msg| initiator.on_payload(&msg));
            match result {
                Ok((m3, _)) => {
                    let _ = ep_a.send_frame(&m3.encode().expect("honest frame encodes"));
                }
                Err(e) => note(&mut a_err, e),
            }
        }
        if !progressed {
            break;
        }
    }

    let initiator_sas = initiator
        .sas()
        .filter(|_| initiator.phase() == Phase::SasReady);
    let responder_sas = responder
        .as_ref()
        .and_then(|r| r.sas().filter(|_| r.phase() == Phase::SasReady));
    let accept = matches!((initiator_sas, responder_sas), (Some(x), Some(y)) if x == y);

    let mut initiator_key = None;
    if initiator.phase() == Phase::SasReady {
        if let Ok(Confirmation::Accepted(k)) = initiator.confirm(accept) {
            initiator_key = Some(k);
        }
    } else {
        initiator.abort();
    }
    let mut responder_key = None;
    if let Some(r) = responder.as_mut() {
        if r.phase() == Phase::SasReady {
            if let Ok(Confirmation::Accepted(k)) = r.confirm(accept) {
                responder_key = Some(k);
            }
        } else {
            r.abort();
        }
    }

    SessionRun {
        initiator_sas,
        responder_sas,
        initiator_error: a_err,
        responder_error: b_err,
        initiator_key,
        responder_key,
        initiator_saw_share: initiator.remote_payload().map(|p| p.public_share.clone()),
        responder_saw_share: responder
            .as_ref()
            .and_then(|r| r.remote_payload().map(|p| p.public_share.clone())),
        initiator_phases: initiator.phase_log().to_vec(),
        responder_phases: responder
            .map(|r| r.phase_log().to_vec())
            .unwrap_or_default(),
        transcript: transcript.events(),
    }
}
