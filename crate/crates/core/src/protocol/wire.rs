//! Bit-exact message encoding.
//!
//! Every message is `[tag: u8][body length: u32 BE][body]`.
//!
//! | tag  | body |
//! |------|------|
//! | 0x01 | commitment (32 octets) |
//! | 0x02 | parameter-set id (u32 BE), k (u16 BE), payload fields |
//! | 0x03 | commitment nonce (32 octets), payload fields |
//!
//! Payload fields are identity, public share, auth nonce, each prefixed by a
//! u16 BE length. The share is its minimal big-endian magnitude.

use std::fmt;

use crate::commitment::{Commitment, Decommitment, COMMITMENT_LEN, NONCE_LEN};
use crate::int::GroupInt;
use crate::params::ParamSetId;

use super::sas::{check_k, AuthNonce};
use super::ProtocolError;

pub const TAG_COMMIT: u8 = 0x01;
pub const TAG_PAYLOAD: u8 = 0x02;
pub const TAG_DECOMMIT: u8 = 0x03;
pub const FRAME_HEADER_LEN: usize = 5;
pub const MAX_BODY_LEN: usize = 65535;
pub const MAX_IDENTITY_LEN: usize = 64;

fn malformed(msg: impl Into<String>) -> ProtocolError {
    ProtocolError::Malformed(msg.into())
}

/// Human-readable peer label, 1 to 64 octets of UTF-8.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Identity(String);

impl Identity {
    pub fn new(label: impl Into<String>) -> Result<Self, ProtocolError> {
        let label = label.into();
        if label.is_empty() || label.len() > MAX_IDENTITY_LEN {
            return Err(ProtocolError::InvalidIdentity(label.len()));
        }
        Ok(Identity(label))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Identity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// `ID || g^x || N`, the plaintext each side contributes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairingPayload<T> {
    pub identity: Identity,
    /// Claimed group element; untrusted until subgroup-checked.
    pub public_share: T,
    pub auth_nonce: AuthNonce,
}

/// The three protocol messages.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PairingMessage<T> {
    /// Initiator's commitment to its payload.
    Commit(Commitment),
    /// Responder's plaintext payload.
    Payload {
        param_set: ParamSetId,
        payload: PairingPayload<T>,
    },
    /// Initiator's opening of the commitment.
    Decommit(Decommitment),
}

fn put_field(out: &mut Vec<u8>, field: &[u8]) -> Result<(), ProtocolError> {
    let len = u16::try_from(field.len()).map_err(|_| malformed("field longer than 65535"))?;
    out.extend_from_slice(&len.to_be_bytes());
    out.extend_from_slice(field);
    Ok(())
}

struct Reader<'a> {
    buf: &'a [u8],
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], ProtocolError> {
        if self.buf.len() < n {
            return Err(malformed("truncated message"));
        }
        let (head, tail) = self.buf.split_at(n);
        self.buf = tail;
        Ok(head)
    }

    fn array<const N: usize>(&mut self) -> Result<[u8; N], ProtocolError> {
        Ok(self.take(N)?.try_into().unwrap())
    }

    fn field(&mut self) -> Result<&'a [u8], ProtocolError> {
        let len = u16::from_be_bytes(self.array()?);
        self.take(len as usize)
    }

    fn finish(self) -> Result<(), ProtocolError> {
        if self.buf.is_empty() {
            Ok(())
        } else {
            Err(malformed("trailing octets"))
        }
    }
}

impl<T: GroupInt> PairingPayload<T> {
    /// Length-prefixed `identity, share, nonce`. This is also the committed message.
    pub fn encode_fields(&self) -> Result<Vec<u8>, ProtocolError> {
        let mut out = Vec::new();
        self.write_fields(&mut out)?;
        Ok(out)
    }

    fn write_fields(&self, out: &mut Vec<u8>) -> Result<(), ProtocolError> {
        put_field(out, self.identity.as_str().as_bytes())?;
        put_field(out, &self.public_share.to_be_bytes_min())?;
        put_field(out, &self.auth_nonce.to_octets())
    }

    pub fn decode_fields(bytes: &[u8], k: u8) -> Result<Self, ProtocolError> {
        let mut r = Reader { buf: bytes };
        let payload = Self::read_fields(&mut r, k)?;
        r.finish()?;
        Ok(payload)
    }

    fn read_fields(r: &mut Reader<'_>, k: u8) -> Result<Self, ProtocolError> {
        let id = r.field()?;
        let label = std::str::from_utf8(id).map_err(|_| malformed("identity is not UTF-8"))?;
        let identity =
            Identity::new(label).map_err(|_| malformed("identity length out of range"))?;
        let share = r.field()?;
        if share.first().is_none_or(|&b| b == 0) {
            return Err(malformed("public share is not a minimal magnitude"));
        }
        let public_share =
            T::from_be_bytes(share).ok_or_else(|| malformed("public share too large"))?;
        let auth_nonce = AuthNonce::from_octets(r.field()?, k)?;
        Ok(PairingPayload {
            identity,
            public_share,
            auth_nonce,
        })
    }
}

/// Wraps a body in the `[tag][length]` header.
pub fn frame(tag: u8, body: &[u8]) -> Result<Vec<u8>, ProtocolError> {
    if body.len() > MAX_BODY_LEN {
        return Err(malformed(format!(
            "body of {} octets exceeds {MAX_BODY_LEN}",
            body.len()
        )));
    }
    let mut out = Vec::with_capacity(FRAME_HEADER_LEN + body.len());
    out.push(tag);
    out.extend_from_slice(&(body.len() as u32).to_be_bytes());
    out.extend_from_slice(body);
    Ok(out)
}

/// Parses a frame header, returning `(tag, body length)`.
pub fn parse_header(header: &[u8; FRAME_HEADER_LEN]) -> Result<(u8, usize), ProtocolError> {
    let len = u32::from_be_bytes(header[1..].try_into().unwrap()) as usize;
    if len > MAX_BODY_LEN {
        return Err(malformed(format!(
            "declared body of {len} octets exceeds {MAX_BODY_LEN}"
        )));
    }
    Ok((header[0], len))
}

impl<T: GroupInt> PairingMessage<T> {
    pub fn tag(&self) -> u8 {
        match self {
            PairingMessage::Commit(_) => TAG_COMMIT,
            PairingMessage::Payload { .. } => TAG_PAYLOAD,
            PairingMessage::Decommit(_) => TAG_DECOMMIT,
        }
    }

    pub fn encode(&self) -> Result<Vec<u8>, ProtocolError> {
        let mut body = Vec::new();
        match self {
            PairingMessage::Commit(c) => body.extend_from_slice(c.as_bytes()),
            PairingMessage::Payload { param_set, payload } => {
                body.extend_from_slice(&param_set.0.to_be_bytes());
                body.extend_from_slice(&(payload.auth_nonce.k() as u16).to_be_bytes());
                payload.write_fields(&mut body)?;
            }
            PairingMessage::Decommit(d) => {
                body.extend_from_slice(d.nonce());
                body.extend_from_slice(d.message());
            }
        }
        frame(self.tag(), &body)
    }

    pub fn decode(frame: &[u8]) -> Result<Self, ProtocolError> {
        let header: &[u8; FRAME_HEADER_LEN] = frame
            .get(..FRAME_HEADER_LEN)
            .and_then(|h| h.try_into().ok())
            .ok_or_else(|| malformed("truncated header"))?;
        let (tag, len) = parse_header(header)?;
        let body = &frame[FRAME_HEADER_LEN..];
        if body.len() != len {
            return Err(malformed(format!(
                "body is {} octets, header says {len}",
                body.len()
            )));
        }
        let mut r = Reader { buf: body };
        let msg = match tag {
            TAG_COMMIT => {
                PairingMessage::Commit(Commitment::from_bytes(r.array::<COMMITMENT_LEN>()?))
            }
            TAG_PAYLOAD => {
                let param_set = ParamSetId(u32::from_be_bytes(r.array()?));
                let k = u16::from_be_bytes(r.array()?);
                let k = u8::try_from(k).map_err(|_| malformed("k out of range"))?;
                check_k(k).map_err(|_| malformed("k out of range"))?;
                let payload = PairingPayload::read_fields(&mut r, k)?;
                PairingMessage::Payload { param_set, payload }
            }
            TAG_DECOMMIT => {
                let nonce = r.array::<NONCE_LEN>()?;
                let message = std::mem::take(&mut r.buf).to_vec();
                PairingMessage::Decommit(Decommitment::new(nonce, message))
            }
            other => return Err(malformed(format!("unknown message tag {other:#04x}"))),
        };
        r.finish()?;
        Ok(msg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigUint;
    use proptest::prelude::*;

    fn payload(share: u64) -> PairingPayload<u64> {
        PairingPayload {
            identity: Identity::new("bob").unwrap(),
            public_share: share,
            auth_nonce: AuthNonce::new(0xBEEF, 20).unwrap(),
        }
    }

    #[test]
    fn payload_bytes_exact() {
        let msg = PairingMessage::Payload {
            param_set: ParamSetId(1),
            payload: payload(16),
        };
        let bytes = msg.encode().unwrap();
        let expected: Vec<u8> = [
            &[0x02, 0, 0, 0, 19][..],
            &[0, 0, 0, 1],
            &[0, 20],
            &[0, 3, b'b', b'o', b'b'],
            &[0, 1, 16],
            &[0, 3, 0x00, 0xBE, 0xEF],
        ]
        .concat();
        assert_eq!(bytes, expected);
        assert_eq!(PairingMessage::<u64>::decode(&bytes).unwrap(), msg);
    }

    #[test]
    fn commit_frame_layout() {
        let msg = PairingMessage::<u64>::Commit(Commitment::from_bytes([7; 32]));
        let bytes = msg.encode().unwrap();
        assert_eq!(&bytes[..5], &[0x01, 0, 0, 0, 32]);
        assert_eq!(bytes.len(), 37);
    }

    #[test]
    fn truncated_commit_rejected() {
        let bytes = PairingMessage::<u64>::Commit(Commitment::from_bytes([7; 32]))
            .encode()
            .unwrap();
        for cut in 0..bytes.len() {
            assert!(matches!(
                PairingMessage::<u64>::decode(&bytes[..cut]),
                Err(ProtocolError::Malformed(_))
            ));
        }
        // consistent header, short body
        let mut short = frame(TAG_COMMIT, &[0; 31]).unwrap();
        assert!(PairingMessage::<u64>::decode(&short).is_err());
        short = frame(TAG_COMMIT, &[0; 33]).unwrap();
        assert!(PairingMessage::<u64>::decode(&short).is_err());
    }

    #[test]
    fn rejects_unknown_tag_and_oversize() {
        assert!(PairingMessage::<u64>::decode(&frame(0x09, &[]).unwrap()).is_err());
        assert!(frame(TAG_DECOMMIT, &vec![0; MAX_BODY_LEN + 1]).is_err());
        assert!(frame(TAG_DECOMMIT, &vec![0; MAX_BODY_LEN]).is_ok());
        assert!(parse_header(&[1, 0, 1, 0, 0]).is_err());
        assert_eq!(parse_header(&[1, 0, 0, 0xff, 0xff]).unwrap(), (1, 65535));
    }

    #[test]
    fn rejects_non_canonical_fields() {
        let good = payload(16).encode_fields().unwrap();
        assert_eq!(
            PairingPayload::<u64>::decode_fields(&good, 20).unwrap(),
            payload(16)
        );
        // leading zero in the share
        let padded = [
            &[0, 3, b'b', b'o', b'b'][..],
            &[0, 2, 0, 16],
            &[0, 3, 0, 0xBE, 0xEF],
        ]
        .concat();
        assert!(PairingPayload::<u64>::decode_fields(&padded, 20).is_err());
        // wrong k for the nonce length
        assert!(PairingPayload::<u64>::decode_fields(&good, 8).is_err());
        // empty identity
        let anon = [&[0, 0][..], &[0, 1, 16], &[0, 3, 0, 0xBE, 0xEF]].concat();
        assert!(PairingPayload::<u64>::decode_fields(&anon, 20).is_err());
        // invalid UTF-8
        let bad_utf8 = [&[0, 1, 0xff][..], &[0, 1, 16], &[0, 3, 0, 0xBE, 0xEF]].concat();
        assert!(PairingPayload::<u64>::decode_fields(&bad_utf8, 20).is_err());
        // trailing junk
        let mut trailing = good.clone();
        trailing.push(0);
        assert!(PairingPayload::<u64>::decode_fields(&trailing, 20).is_err());
        // share that overflows the backend
        let huge = [
            &[0, 1, b'x'][..],
            &[0, 9, 1, 0, 0, 0, 0, 0, 0, 0, 0],
            &[0, 3, 0, 0, 1],
        ]
        .concat();
        assert!(PairingPayload::<u64>::decode_fields(&huge, 20).is_err());
        assert!(PairingPayload::<BigUint>::decode_fields(&huge, 20).is_ok());
    }

    #[test]
    fn payload_k_bounds_on_wire() {
        let mut bytes = PairingMessage::Payload {
            param_set: ParamSetId(1),
            payload: payload(16),
        }
        .encode()
        .unwrap();
        bytes[9..11].copy_from_slice(&65u16.to_be_bytes());
        assert!(PairingMessage::<u64>::decode(&bytes).is_err());
        bytes[9..11].copy_from_slice(&0u16.to_be_bytes());
        assert!(PairingMessage::<u64>::decode(&bytes).is_err());
    }

    #[test]
    fn identity_bounds() {
        assert!(Identity::new("").is_err());
        assert!(Identity::new("x".repeat(64)).is_ok());
        assert!(Identity::new("x".repeat(65)).is_err());
        // 16 four-octet characters is exactly 64 octets
        assert!(Identity::new("\u{1F600}".repeat(16)).is_ok());
        assert!(Identity::new("\u{1F600}".repeat(17)).is_err());
    }

    fn arb_message() -> impl Strategy<Value = PairingMessage<BigUint>> {
        let ident = "[a-zA-Z0-9 @.]{1,64}";
        let share = proptest::collection::vec(any::<u8>(), 1..300)
            .prop_map(|b| BigUint::from_bytes_be(&b) + 1u32);
        prop_oneof![
            any::<[u8; 32]>().prop_map(|c| PairingMessage::Commit(Commitment::from_bytes(c))),
            (ident, share, 1u8..=64, any::<u64>(), any::<u32>()).prop_map(|(id, s, k, n, pid)| {
                let bits = if k == 64 { n } else { n & ((1 << k) - 1) };
                PairingMessage::Payload {
                    param_set: ParamSetId(pid),
                    payload: PairingPayload {
                        identity: Identity::new(id).unwrap(),
                        public_share: s,
                        auth_nonce: AuthNonce::new(bits, k).unwrap(),
                    },
                }
            }),
            (
                any::<[u8; 32]>(),
                proptest::collection::vec(any::<u8>(), 0..512)
            )
                .prop_map(|(n, m)| PairingMessage::Decommit(Decommitment::new(n, m))),
        ]
    }

    proptest! {
        #[test]
        fn wire_round_trip(msg in arb_message()) {
            let bytes = msg.encode().unwrap();
            prop_assert_eq!(PairingMessage::decode(&bytes).unwrap(), msg);
        }
    }
}
