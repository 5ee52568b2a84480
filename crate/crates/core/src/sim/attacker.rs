use rand::RngCore;
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};

use crate::commitment::{self, Decommitment};
use crate::group::{derive_key, PrivateShare, SessionKey};
use crate::int::GroupInt;
use crate::params::NamedParams;
use crate::protocol::{AuthNonce, Identity, PairingMessage, PairingPayload};
use crate::transport::{Adversary, Direction, Verdict};

use super::{GuessRule, StrategyKind};

fn mask(k: u8) -> u64 {
    if k >= 64 {
        u64::MAX
    } else {
        (1u64 << k) - 1
    }
}

/// A Dolev-Yao attacker acting only through frame verdicts.
///
/// Whatever value the attacker must match is fixed inside a frame it emits
/// before the honest nonce it is matching against is revealed; the
/// `guess_emitted_at` / `target_revealed_at` sequence numbers record this.
pub struct Attacker<T> {
    kind: StrategyKind,
    rule: GuessRule,
    params: NamedParams<T>,
    k: u8,
    rng: ChaCha20Rng,
    /// Identities the attacker claims, copied from the victims.
    as_initiator: Identity,
    as_responder: Identity,
    toward_a: PrivateShare<T>,
    toward_b: PrivateShare<T>,
    observed: Vec<Vec<u8>>,
    /// Nonce in the attacker's own commitment, and its opening.
    committed_nonce: Option<AuthNonce>,
    opening: Option<Decommitment>,
    /// Nonce the attacker sent to A in its payload.
    sent_to_a: Option<AuthNonce>,
    seen_initiator: Option<PairingPayload<T>>,
    seen_responder: Option<PairingPayload<T>>,
    guess: Option<u64>,
    guess_emitted_at: Option<usize>,
    target_revealed_at: Option<usize>,
    equivocated: bool,
}

impl<T: GroupInt> Attacker<T> {
    pub fn new(
        kind: StrategyKind,
        rule: GuessRule,
        params: &NamedParams<T>,
        k: u8,
        victims: (&Identity, &Identity),
        mut rng: ChaCha20Rng,
    ) -> Self {
        let toward_a =
            PrivateShare::generate(&params.params, &mut rng).expect("chacha never fails");
        let toward_b = match kind {
            StrategyKind::FullMitm | StrategyKind::Equivocate => {
                PrivateShare::generate(&params.params, &mut rng).expect("chacha never fails")
            }
            _ => toward_a.clone(),
        };
        Attacker {
            kind,
            rule,
            params: params.clone(),
            k,
            rng,
            as_initiator: victims.0.clone(),
            as_responder: victims.1.clone(),
            toward_a,
            toward_b,
            observed: Vec::new(),
            committed_nonce: None,
            opening: None,
            sent_to_a: None,
            seen_initiator: None,
            seen_responder: None,
            guess: None,
            guess_emitted_at: None,
            target_revealed_at: None,
            equivocated: false,
        }
    }

    pub fn guess(&self) -> Option<u64> {
        self.guess
    }

    pub fn guess_emitted_at(&self) -> Option<usize> {
        self.guess_emitted_at
    }

    pub fn target_revealed_at(&self) -> Option<usize> {
        self.target_revealed_at
    }

    pub fn equivocated(&self) -> bool {
        self.equivocated
    }

    /// The honest nonce this strategy has to guess, once observed.
    pub fn target(&self) -> Option<u64> {
        let seen = match self.kind.target() {
            super::TargetSide::Initiator => &self.seen_initiator,
            super::TargetSide::Responder => &self.seen_responder,
        };
        seen.as_ref().map(|p| p.auth_nonce.bits())
    }

    /// Keys the attacker can compute with A and with B.
    pub fn keys(&self) -> (Option<SessionKey<T>>, Option<SessionKey<T>>) {
        let with = |seen: &Option<PairingPayload<T>>, own: &PrivateShare<T>| {
            seen.as_ref()
                .and_then(|p| derive_key(&self.params.params, &p.public_share, own).ok())
        };
        (
            with(&self.seen_initiator, &self.toward_a),
            with(&self.seen_responder, &self.toward_b),
        )
    }

    fn draw_guess(&mut self, seq: usize) -> u64 {
        let g = match self.rule {
            GuessRule::Fixed(v) => v,
            GuessRule::Uniform => self.rng.next_u64(),
            GuessRule::Adaptive => {
                let mut h = Sha256::new();
                for f in &self.observed {
                    h.update(f);
                }
                let d = h.finalize();
                u64::from_be_bytes(d[..8].try_into().unwrap())
            }
        } & mask(self.k);
        self.guess = Some(g);
        self.guess_emitted_at = Some(seq);
        g
    }

    fn nonce(&self, bits: u64) -> AuthNonce {
        AuthNonce::new(bits & mask(self.k), self.k).expect("masked to k bits")
    }

    fn random_nonce(&mut self) -> AuthNonce {
        let bits = self.rng.next_u64();
        self.nonce(bits)
    }

    fn payload(
        &self,
        identity: &Identity,
        own: &PrivateShare<T>,
        nonce: AuthNonce,
    ) -> PairingPayload<T> {
        PairingPayload {
            identity: identity.clone(),
            public_share: own.public_share(&self.params.params).into_value(),
            auth_nonce: nonce,
        }
    }

    /// Commits towards B as "A" with the given nonce.
    fn commit_towards_b(&mut self, nonce: AuthNonce) -> Verdict {
        let m = self.payload(&self.as_initiator.clone(), &self.toward_b.clone(), nonce);
        let encoded = m.encode_fields().expect("attacker payload encodes");
        let (c, d) = commitment::commit(&encoded, &mut self.rng).expect("chacha never fails");
        self.committed_nonce = Some(nonce);
        self.opening = Some(d);
        Verdict::Replace(encode(&PairingMessage::<T>::Commit(c)))
    }

    /// Payload towards A as "B".
    fn payload_to_a(&mut self, nonce: AuthNonce) -> PairingMessage<T> {
        self.sent_to_a = Some(nonce);
        PairingMessage::Payload {
            param_set: self.params.id,
            payload: self.payload(&self.as_responder.clone(), &self.toward_a.clone(), nonce),
        }
    }

    fn learn_initiator(&mut self, seq: usize, d: &Decommitment) -> bool {
        match PairingPayload::<T>::decode_fields(d.message(), self.k) {
            Ok(p) => {
                self.seen_initiator = Some(p);
                if self.kind.target() == super::TargetSide::Initiator {
                    self.target_revealed_at = Some(seq);
                }
                true
            }
            Err(_) => false,
        }
    }

    fn learn_responder(&mut self, seq: usize, p: &PairingPayload<T>) {
        self.seen_responder = Some(p.clone());
        if self.kind.target() == super::TargetSide::Responder {
            self.target_revealed_at = Some(seq);
        }
    }

    fn opening_frame(&self) -> Vec<u8> {
        let d = self
            .opening
            .clone()
            .expect("commitment made before opening");
        encode(&PairingMessage::<T>::Decommit(d))
    }
}

fn encode<T: GroupInt>(msg: &PairingMessage<T>) -> Vec<u8> {
    msg.encode().expect("attacker frame encodes")
}

impl<T: GroupInt> Adversary for Attacker<T> {
    fn intercept(&mut self, seq: usize, direction: Direction, frame: &[u8]) -> Verdict {
        self.observed.push(frame.to_vec());
        if self.kind == StrategyKind::Honest {
            return Verdict::Deliver;
        }
        let Ok(msg) = PairingMessage::<T>::decode(frame) else {
            return Verdict::Drop;
        };
        use Direction::*;
        use PairingMessage::*;
        match (self.kind, direction, &msg) {
            // A commits; E commits to B with N_E = guess of N_A.
            (StrategyKind::ImpersonateInitiator, AToB, Commit(_)) => {
                let g = self.draw_guess(seq);
                let n = self.nonce(g);
                self.commit_towards_b(n)
            }
            // B's payload goes to A with E's share but B's nonce.
            (StrategyKind::ImpersonateInitiator, BToA, Payload { payload, .. }) => {
                self.learn_responder(seq, payload);
                let reply = self.payload_to_a(payload.auth_nonce);
                Verdict::Replace(encode(&reply))
            }
            (StrategyKind::ImpersonateInitiator, AToB, Decommit(d)) => {
                self.learn_initiator(seq, d);
                Verdict::Replace(self.opening_frame())
            }

            // E answers A itself, finishes with A, then starts over with B.
            (StrategyKind::ImpersonateResponder, AToB, Commit(_)) => {
                let n = self.random_nonce();
                let reply = self.payload_to_a(n);
                Verdict::Inject(encode(&reply), BToA)
            }
            (StrategyKind::ImpersonateResponder, AToB, Decommit(d)) => {
                if !self.learn_initiator(seq, d) {
                    return Verdict::Drop;
                }
                let n_a = self.seen_initiator.as_ref().unwrap().auth_nonce.bits();
                let n_e = self.sent_to_a.unwrap().bits();
                let g = self.draw_guess(seq);
                let n = self.nonce(n_a ^ n_e ^ g);
                self.commit_towards_b(n)
            }
            (StrategyKind::ImpersonateResponder, BToA, Payload { payload, .. }) => {
                self.learn_responder(seq, payload);
                Verdict::Inject(self.opening_frame(), AToB)
            }

            // Two concurrent sessions bridged frame by frame.
            (StrategyKind::FullMitm | StrategyKind::Equivocate, AToB, Commit(_)) => {
                let n = self.random_nonce();
                self.commit_towards_b(n)
            }
            (StrategyKind::FullMitm | StrategyKind::Equivocate, BToA, Payload { payload, .. }) => {
                self.learn_responder(seq, payload);
                let n_e = self.committed_nonce.unwrap().bits();
                let g = self.draw_guess(seq);
                let n = self.nonce(n_e ^ payload.auth_nonce.bits() ^ g);
                let reply = self.payload_to_a(n);
                Verdict::Replace(encode(&reply))
            }
            (StrategyKind::FullMitm, AToB, Decommit(d)) => {
                self.learn_initiator(seq, d);
                Verdict::Replace(self.opening_frame())
            }
            // Having seen N_A, try to open c_E to the nonce that would have won.
            (StrategyKind::Equivocate, AToB, Decommit(d)) => {
                if !self.learn_initiator(seq, d) {
                    return Verdict::Drop;
                }
                let n_a = self.seen_initiator.as_ref().unwrap().auth_nonce.bits();
                let n_b = self.seen_responder.as_ref().unwrap().auth_nonce.bits();
                let winning = self.nonce(n_a ^ n_b ^ self.sent_to_a.unwrap().bits());
                if Some(winning) == self.committed_nonce {
                    return Verdict::Replace(self.opening_frame());
                }
                self.equivocated = true;
                let forged =
                    self.payload(&self.as_initiator.clone(), &self.toward_b.clone(), winning);
                let nonce = *self.opening.as_ref().unwrap().nonce();
                let d = Decommitment::new(nonce, forged.encode_fields().expect("encodes"));
                Verdict::Replace(encode(&PairingMessage::<T>::Decommit(d)))
            }
            _ => Verdict::Drop,
        }
    }
}
