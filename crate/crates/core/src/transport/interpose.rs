//! A channel pair with a frame-level adversary on the wire.
//!
//! Every frame sent by either endpoint is handed to the [`Adversary`] at send
//! time, under one lock, so verdicts are made in global send order and the
//! adversary can never see a frame before it has been transmitted.

use std::sync::mpsc::{channel, Receiver, Sender};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use super::memory::recv_with_timeout;
use super::{check_frame, default_timeout, Channel, TransportError};

/// Direction of travel. `A` is the first endpoint returned by
/// [`make_interposed_pair`], conventionally the initiator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    AToB,
    BToA,
}

impl Direction {
    pub fn reverse(self) -> Self {
        match self {
            Direction::AToB => Direction::BToA,
            Direction::BToA => Direction::AToB,
        }
    }
}

/// What the adversary does with an in-flight frame.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Deliver,
    Replace(Vec<u8>),
    Drop,
    /// Swallow the in-flight frame and send `frame` in `direction` instead.
    Inject(Vec<u8>, Direction),
}

pub trait Adversary: Send {
    /// Called once per sent frame. `seq` counts frames from both endpoints.
    fn intercept(&mut self, seq: usize, direction: Direction, frame: &[u8]) -> Verdict;
}

impl<F> Adversary for F
where
    F: FnMut(usize, Direction, &[u8]) -> Verdict + Send,
{
    fn intercept(&mut self, seq: usize, direction: Direction, frame: &[u8]) -> Verdict {
        self(seq, direction, frame)
    }
}

/// Lets the caller keep a handle on a stateful adversary after the run.
impl<A: Adversary> Adversary for Arc<Mutex<A>> {
    fn intercept(&mut self, seq: usize, direction: Direction, frame: &[u8]) -> Verdict {
        self.lock().unwrap().intercept(seq, direction, frame)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TranscriptEvent {
    pub seq: usize,
    pub direction: Direction,
    pub sent: Vec<u8>,
    pub verdict: Verdict,
}

impl TranscriptEvent {
    /// The frame that actually went onto the wire, and where it went.
    pub fn delivered(&self) -> Option<(Direction, &[u8])> {
        match &self.verdict {
            Verdict::Deliver => Some((self.direction, &self.sent)),
            Verdict::Replace(f) => Some((self.direction, f)),
            Verdict::Drop => None,
            Verdict::Inject(f, d) => Some((*d, f)),
        }
    }
}

/// Shared, append-only record of every interception.
#[derive(Debug, Clone, Default)]
pub struct TranscriptHandle {
    events: Arc<Mutex<Vec<TranscriptEvent>>>,
}

impl TranscriptHandle {
    pub fn events(&self) -> Vec<TranscriptEvent> {
        self.events.lock().unwrap().clone()
    }

    pub fn len(&self) -> usize {
        self.events.lock().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Feeds the recorded frames, in order, to a fresh adversary and checks it
    /// reproduces each verdict. Since the replayed adversary at step `n` has only
    /// seen frames `1..=n`, agreement shows the recorded verdicts used no
    /// lookahead. Returns the first diverging `seq` on mismatch.
    pub fn replay_against<A: Adversary + ?Sized>(&self, adversary: &mut A) -> Result<(), usize> {
        for ev in self.events() {
            if adversary.intercept(ev.seq, ev.direction, &ev.sent) != ev.verdict {
                return Err(ev.seq);
            }
        }
        Ok(())
    }
}

struct Wire {
    adversary: Box<dyn Adversary>,
    to_a: Sender<Vec<u8>>,
    to_b: Sender<Vec<u8>>,
    next_seq: usize,
    transcript: TranscriptHandle,
}

impl Wire {
    fn carry(&mut self, direction: Direction, frame: &[u8]) -> Result<(), TransportError> {
        let seq = self.next_seq;
        self.next_seq += 1;
        let verdict = self.adversary.intercept(seq, direction, frame);
        let event = TranscriptEvent {
            seq,
            direction,
            sent: frame.to_vec(),
            verdict,
        };
        let delivered = event.delivered().map(|(d, f)| (d, f.to_vec()));
        self.transcript.events.lock().unwrap().push(event);
        if let Some((dir, f)) = delivered {
            let tx = match dir {
                Direction::AToB => &self.to_b,
                Direction::BToA => &self.to_a,
            };
            // A vanished receiver looks like loss on the wire, not a send error.
            let _ = tx.send(f);
        }
        Ok(())
    }
}

/// One side of an interposed pair.
pub struct InterposedEndpoint {
    outbound: Direction,
    wire: Arc<Mutex<Wire>>,
    rx: Receiver<Vec<u8>>,
    timeout: Duration,
}

impl std::fmt::Debug for InterposedEndpoint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("InterposedEndpoint")
            .field("outbound", &self.outbound)
            .finish()
    }
}

/// Builds endpoints `A` and `B` whose traffic passes through `adversary`.
pub fn make_interposed_pair<A: Adversary + 'static>(
    adversary: A,
) -> (InterposedEndpoint, InterposedEndpoint, TranscriptHandle) {
    let (to_a, rx_a) = channel();
    let (to_b, rx_b) = channel();
    let transcript = TranscriptHandle::default();
    let wire = Arc::new(Mutex::new(Wire {
        adversary: Box::new(adversary),
        to_a,
        to_b,
        next_seq: 0,
        transcript: transcript.clone(),
    }));
    let a = InterposedEndpoint {
        outbound: Direction::AToB,
        wire: Arc::clone(&wire),
        rx: rx_a,
        timeout: default_timeout(),
    };
    let b = InterposedEndpoint {
        outbound: Direction::BToA,
        wire,
        rx: rx_b,
        timeout: default_timeout(),
    };
    (a, b, transcript)
}

impl InterposedEndpoint {
    /// Non-blocking receive, for single-threaded drivers.
    pub fn try_recv_frame(&mut self) -> Option<Vec<u8>> {
        self.rx.try_recv().ok()
    }
}

impl Channel for InterposedEndpoint {
    fn send_frame(&mut self, frame: &[u8]) -> Result<(), TransportError> {
        check_frame(frame)?;
        self.wire.lock().unwrap().carry(self.outbound, frame)
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
