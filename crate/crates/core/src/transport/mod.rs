//! Reliable, ordered, frame-preserving duplex channels.
//!
//! Frames use the `[tag][u32 length][body]` layout from
//! [`crate::protocol::wire`]; channels validate the header on both send and
//! receive but never look at the body.

use std::time::Duration;

use thiserror::Error;

use crate::protocol::wire::{parse_header, FRAME_HEADER_LEN};
use crate::protocol::DEFAULT_TIMEOUT;

mod interpose;
mod memory;
mod stream;

pub use interpose::{
    make_interposed_pair, Adversary, Direction, InterposedEndpoint, TranscriptEvent,
    TranscriptHandle, Verdict,
};
pub use memory::{memory_pair, MemoryChannel};
pub use stream::{connect_stream, StreamChannel, StreamListener};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TransportError {
    #[error("connection refused")]
    ConnectionRefused,
    #[error("timed out")]
    Timeout,
    #[error("channel closed by peer")]
    ChannelClosed,
    #[error("framing violation: {0}")]
    Malformed(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for TransportError {
    fn from(e: std::io::Error) -> Self {
        use std::io::ErrorKind::*;
        match e.kind() {
            ConnectionRefused => TransportError::ConnectionRefused,
            TimedOut | WouldBlock => TransportError::Timeout,
            UnexpectedEof | ConnectionReset | ConnectionAborted | BrokenPipe => {
                TransportError::ChannelClosed
            }
            _ => TransportError::Io(e.to_string()),
        }
    }
}

/// One endpoint of a duplex frame channel.
pub trait Channel {
    fn send_frame(&mut self, frame: &[u8]) -> Result<(), TransportError>;

    /// Blocks for at most [`Channel::timeout`].
    fn recv_frame(&mut self) -> Result<Vec<u8>, TransportError>;

    fn timeout(&self) -> Duration;

    fn set_timeout(&mut self, timeout: Duration);
}

/// Checks that `frame` is exactly one well-formed frame.
pub fn check_frame(frame: &[u8]) -> Result<(), TransportError> {
    let header: &[u8; FRAME_HEADER_LEN] = frame
        .get(..FRAME_HEADER_LEN)
        .and_then(|h| h.try_into().ok())
        .ok_or_else(|| TransportError::Malformed("frame shorter than its header".into()))?;
    let (_, len) = parse_header(header).map_err(|e| TransportError::Malformed(e.to_string()))?;
    if frame.len() != FRAME_HEADER_LEN + len {
        return Err(TransportError::Malformed(format!(
            "frame is {} octets, header declares {}",
            frame.len(),
            FRAME_HEADER_LEN + len
        )));
    }
    Ok(())
}

pub(crate) const fn default_timeout() -> Duration {
    DEFAULT_TIMEOUT
}
