#![allow(dead_code)]

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use sasdh_core::group::PrivateShare;
use sasdh_core::int::GroupInt;
use sasdh_core::params::NamedParams;
use sasdh_core::protocol::{AuthNonce, Identity, Initiator, PairingMessage, Responder};

/// Everything the two honest parties draw, so a session can be replayed with
/// one frame altered.
pub struct Secrets<T> {
    pub params: NamedParams<T>,
    pub k: u8,
    pub a: PrivateShare<T>,
    pub b: PrivateShare<T>,
    pub n_a: AuthNonce,
    pub n_b: AuthNonce,
    pub seed: u64,
}

impl<T: GroupInt> Secrets<T> {
    pub fn draw(params: &NamedParams<T>, k: u8, seed: u64) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        Secrets {
            params: params.clone(),
            k,
            a: PrivateShare::generate(&params.params, &mut rng).unwrap(),
            b: PrivateShare::generate(&params.params, &mut rng).unwrap(),
            n_a: AuthNonce::generate(k, &mut rng).unwrap(),
            n_b: AuthNonce::generate(k, &mut rng).unwrap(),
            seed,
        }
    }

    pub fn initiator(&self) -> (Initiator<T>, PairingMessage<T>) {
        let mut rng = ChaCha20Rng::seed_from_u64(self.seed ^ 0x5eed);
        Initiator::start_with(
            &self.params,
            Identity::new("alice").unwrap(),
            self.a.clone(),
            self.n_a,
            &mut rng,
        )
        .unwrap()
    }

    pub fn responder(
        &self,
        m1: &PairingMessage<T>,
    ) -> Result<(Responder<T>, PairingMessage<T>), sasdh_core::ProtocolError> {
        Responder::on_commit_with(
            &self.params,
            Identity::new("bob").unwrap(),
            self.b.clone(),
            self.n_b,
            m1,
        )
    }
}

pub fn flip(frame: &[u8], bit: usize) -> Vec<u8> {
    let mut out = frame.to_vec();
    out[bit / 8] ^= 0x80 >> (bit % 8);
    out
}
