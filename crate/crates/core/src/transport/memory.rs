use std::sync::mpsc::{channel, Receiver, RecvTimeoutError, Sender};
use std::time::Duration;

use super::{check_frame, default_timeout, Channel, TransportError};

/// In-process channel endpoint backed by `std::sync::mpsc`.
#[derive(Debug)]
pub struct MemoryChannel {
    tx: Sender<Vec<u8>>,
    rx: Receiver<Vec<u8>>,
    timeout: Duration,
}

/// Two connected endpoints.
pub fn memory_pair() -> (MemoryChannel, MemoryChannel) {
    let (tx_ab, rx_ab) = channel();
    let (tx_ba, rx_ba) = channel();
    (
        MemoryChannel {
            tx: tx_ab,
            rx: rx_ba,
            timeout: default_timeout(),
        },
        MemoryChannel {
            tx: tx_ba,
            rx: rx_ab,
            timeout: default_timeout(),
        },
    )
}

pub(super) fn recv_with_timeout(
    rx: &Receiver<Vec<u8>>,
    timeout: Duration,
) -> Result<Vec<u8>, TransportError> {
    match rx.recv_timeout(timeout) {
        Ok(frame) => Ok(frame),
        Err(RecvTimeoutError::Timeout) => Err(TransportError::Timeout),
        Err(RecvTimeoutError::Disconnected) => Err(TransportError::ChannelClosed),
    }
}

impl Channel for MemoryChannel {
    fn send_frame(&mut self, frame: &[u8]) -> Result<(), TransportError> {
        check_frame(frame)?;
        self.tx
            .send(frame.to_vec())
            .map_err(|_| TransportError::ChannelClosed)
    }

    fn recv_frame(&mut self) -> Result<Vec<u8>, TransportError> {
        recv_with_timeout(&self.rx, self.timeout)
    }

    fn timeout(&self) -> Duration {
        self.timeout
    }

    fn set_timeout(&mut self, timeout: Duration) {
        self.timeout = timeout;
    }
}
