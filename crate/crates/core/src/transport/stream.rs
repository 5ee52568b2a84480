use std::io::{Read, Write};
use std::net::{SocketAddr, TcpListener, TcpStream, ToSocketAddrs};
use std::time::Duration;

use crate::protocol::wire::{parse_header, FRAME_HEADER_LEN};

use super::{check_frame, default_timeout, Channel, TransportError};

/// Frames over a TCP stream, no extra headers.
#[derive(Debug)]
pub struct StreamChannel {
    stream: TcpStream,
    timeout: Duration,
}

impl StreamChannel {
    pub fn new(stream: TcpStream) -> Result<Self, TransportError> {
        stream.set_nodelay(true)?;
        let mut ch = StreamChannel {
            stream,
            timeout: default_timeout(),
        };
        ch.set_timeout(default_timeout());
        Ok(ch)
    }

    pub fn peer_addr(&self) -> Result<SocketAddr, TransportError> {
        Ok(self.stream.peer_addr()?)
    }
}

/// Connects to `address`, trying each resolved address in turn.
pub fn connect_stream(address: &str, timeout: Duration) -> Result<StreamChannel, TransportError> {
    let addrs = address
        .to_socket_addrs()
        .map_err(|e| TransportError::Io(format!("resolving {address}: {e}")))?;
    let mut last = TransportError::Io(format!("{address} resolved to no addresses"));
    for addr in addrs {
        match TcpStream::connect_timeout(&addr, timeout) {
            Ok(stream) => return StreamChannel::new(stream),
            Err(e) => last = e.into(),
        }
    }
    Err(last)
}

impl Channel for StreamChannel {
    fn send_frame(&mut self, frame: &[u8]) -> Result<(), TransportError> {
        check_frame(frame)?;
        self.stream.write_all(frame)?;
        self.stream.flush()?;
        Ok(())
    }

    fn recv_frame(&mut self) -> Result<Vec<u8>, TransportError> {
        let mut header = [0u8; FRAME_HEADER_LEN];
        self.stream.read_exact(&mut header)?;
        let (_, len) =
            parse_header(&header).map_err(|e| TransportError::Malformed(e.to_string()))?;
        let mut frame = vec![0u8; FRAME_HEADER_LEN + len];
        frame[..FRAME_HEADER_LEN].copy_from_slice(&header);
        self.stream.read_exact(&mut frame[FRAME_HEADER_LEN..])?;
        Ok(frame)
    }

    fn timeout(&self) -> Duration {
        self.timeout
    }

    fn set_timeout(&mut self, timeout: Duration) {
        self.timeout = timeout;
        // a zero duration would mean "block forever" to the OS
        let t = Some(timeout.max(Duration::from_millis(1)));
        let _ = self.stream.set_read_timeout(t);
        let _ = self.stream.set_write_timeout(t);
    }
}

/// Listening socket for the responder.
#[derive(Debug)]
pub struct StreamListener {
    listener: TcpListener,
}

impl StreamListener {
    pub fn bind(address: &str) -> Result<Self, TransportError> {
        Ok(StreamListener {
            listener: TcpListener::bind(address)?,
        })
    }

    pub fn local_addr(&self) -> Result<SocketAddr, TransportError> {
        Ok(self.listener.local_addr()?)
    }

    /// Waits for one peer.
    pub fn accept(&self) -> Result<StreamChannel, TransportError> {
        let (stream, _) = self.listener.accept()?;
        StreamChannel::new(stream)
    }
}
