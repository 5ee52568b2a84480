//! Man-in-the-middle experiments against the key agreement.
//!
//! Every strategy acts only through [`crate::transport::Verdict`]s on an
//! interposed channel, so it sees frames strictly in send order. Success
//! means both honest operators see the same SAS while the attacker holds a
//! key with at least one of them.

use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, Mutex};

use rand::{RngCore, SeedableRng};
use rand_chacha::{ChaCha20Rng, ChaCha8Rng};
use rayon::prelude::*;
use thiserror::Error;

use crate::int::GroupInt;
use crate::params::NamedParams;
use crate::protocol::{check_k, Identity, ProtocolError};

mod attacker;
mod driver;
mod report;
mod stats;

pub use attacker::Attacker;
pub use driver::{run_session, SessionRun, SessionSetup, INITIATOR_ID, RESPONDER_ID};
pub use report::{Mode, SimReport};
pub use stats::{clopper_pearson, RateEstimate, CONFIDENCE};

/// Largest k for which exhaustive enumeration is allowed.
pub const MAX_EXHAUSTIVE_K: u8 = 16;
/// Smallest Monte Carlo run for an attack strategy.
pub const MIN_TRIALS: u64 = 1000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("exhaustive enumeration needs k <= {MAX_EXHAUSTIVE_K}, got {0}")]
    KTooLarge(u8),
    #[error("need at least {min} trials, got {got}")]
    TooFewTrials { min: u64, got: u64 },
    #[error("unknown strategy `{0}`")]
    UnknownStrategy(String),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StrategyKind {
    /// Pass-through; measures completeness.
    Honest,
    /// E commits to B as A before A's nonce is known, forwards B's nonce to A.
    ImpersonateInitiator,
    /// E answers A as B, then runs a fresh session with B as A.
    ImpersonateResponder,
    /// E bridges two concurrent sessions, choosing its nonce to A adaptively.
    FullMitm,
    /// Like `FullMitm`, but tries to open its commitment to a different nonce.
    Equivocate,
}

/// Which honest nonce a strategy must guess.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TargetSide {
    Initiator,
    Responder,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 5] = [
        StrategyKind::Honest,
        StrategyKind::ImpersonateInitiator,
        StrategyKind::ImpersonateResponder,
        StrategyKind::FullMitm,
        StrategyKind::Equivocate,
    ];

    pub fn name(self) -> &'static str {
        match self {
            StrategyKind::Honest => "honest",
            StrategyKind::ImpersonateInitiator => "impersonate-initiator",
            StrategyKind::ImpersonateResponder => "impersonate-responder",
            StrategyKind::FullMitm => "full-mitm",
            StrategyKind::Equivocate => "full-mitm-equivocate",
        }
    }

    pub fn target(self) -> TargetSide {
        match self {
            StrategyKind::ImpersonateResponder => TargetSide::Responder,
            _ => TargetSide::Initiator,
        }
    }

    pub fn is_attack(self) -> bool {
        self != StrategyKind::Honest
    }
}

impl FromStr for StrategyKind {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| SimError::UnknownStrategy(s.to_owned()))
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// How the attacker picks the value it must match.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GuessRule {
    Fixed(u64),
    Uniform,
    /// Hash of every frame observed so far.
    Adaptive,
}

impl FromStr for GuessRule {
    type Err = SimError;

    /// `fixed`, `fixed:<n>`, `uniform` or `adaptive`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "fixed" => Ok(GuessRule::Fixed(0)),
            "uniform" => Ok(GuessRule::Uniform),
            "adaptive" => Ok(GuessRule::Adaptive),
            _ => s
                .strip_prefix("fixed:")
                .and_then(|v| v.parse().ok())
                .map(GuessRule::Fixed)
                .ok_or_else(|| SimError::UnknownStrategy(s.to_owned())),
        }
    }
}

impl fmt::Display for GuessRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GuessRule::Fixed(v) => write!(f, "fixed:{v}"),
            GuessRule::Uniform => f.write_str("uniform"),
            GuessRule::Adaptive => f.write_str("adaptive"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct AttackStrategy {
    pub kind: StrategyKind,
    pub guess: GuessRule,
}

impl AttackStrategy {
    pub const HONEST: AttackStrategy = AttackStrategy {
        kind: StrategyKind::Honest,
        guess: GuessRule::Fixed(0),
    };

    pub fn new(kind: StrategyKind, guess: GuessRule) -> Self {
        AttackStrategy { kind, guess }
    }
}

impl fmt::Display for AttackStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.kind.is_attack() {
            write!(f, "{}/{}", self.kind, self.guess)
        } else {
            write!(f, "{}", self.kind)
        }
    }
}

/// Result of one trial.
#[derive(Debug, Clone)]
pub struct AttackOutcome<T> {
    pub success: bool,
    pub sas_match: bool,
    /// Attacker can compute the session key of at least one victim.
    pub attacker_keyed: bool,
    pub guess: Option<u64>,
    pub target: Option<u64>,
    pub guess_emitted_at: Option<usize>,
    pub target_revealed_at: Option<usize>,
    pub equivocated: bool,
    pub run: SessionRun<T>,
}

/// Overrides applied on top of seeded randomness.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Forced {
    pub initiator_nonce: Option<u64>,
    pub responder_nonce: Option<u64>,
}

/// Per-trial seed for trial `index` of an experiment seeded with `seed`.
pub fn trial_seed(seed: u64, index: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng.next_u64()
}

/// Independent streams for one trial, all derived from its seed.
struct TrialRngs {
    setup: ChaCha20Rng,
    commit: ChaCha20Rng,
    attacker: ChaCha20Rng,
}

impl TrialRngs {
    fn new(seed: u64) -> Self {
        let mut master = ChaCha20Rng::seed_from_u64(seed);
        let mut next = || ChaCha20Rng::from_rng(&mut master).expect("chacha never fails");
        TrialRngs {
            setup: next(),
            commit: next(),
            attacker: next(),
        }
    }
}

/// The attacker `run_mitm_trial` would build for `seed`, in its initial state.
/// Replaying a trial's transcript against it checks the recorded verdicts.
pub fn attacker_for_trial<T: GroupInt>(
    strategy: AttackStrategy,
    params: &NamedParams<T>,
    k: u8,
    seed: u64,
) -> Result<Attacker<T>, SimError> {
    check_k(k)?;
    let (a, b) = (Identity::new(INITIATOR_ID)?, Identity::new(RESPONDER_ID)?);
    Ok(Attacker::new(
        strategy.kind,
        strategy.guess,
        params,
        k,
        (&a, &b),
        TrialRngs::new(seed).attacker,
    ))
}

/// Runs one trial with the attacker interposed. Fully determined by `seed`.
pub fn run_mitm_trial<T: GroupInt>(
    strategy: AttackStrategy,
    params: &NamedParams<T>,
    k: u8,
    seed: u64,
) -> Result<AttackOutcome<T>, SimError> {
    run_trial_forced(strategy, params, k, seed, Forced::default())
}

pub fn run_honest_session<T: GroupInt>(
    params: &NamedParams<T>,
    k: u8,
    seed: u64,
) -> Result<AttackOutcome<T>, SimError> {
    run_mitm_trial(AttackStrategy::HONEST, params, k, seed)
}

pub fn run_trial_forced<T: GroupInt>(
    strategy: AttackStrategy,
    params: &NamedParams<T>,
    k: u8,
    seed: u64,
    forced: Forced,
) -> Result<AttackOutcome<T>, SimError> {
    check_k(k)?;
    let mut rngs = TrialRngs::new(seed);
    let mut setup = SessionSetup::generate(params, k, &mut rngs.setup)?;
    if let Some(bits) = forced.initiator_nonce {
        setup.initiator_nonce = crate::protocol::AuthNonce::new(bits, k)?;
    }
    if let Some(bits) = forced.responder_nonce {
        setup.responder_nonce = crate::protocol::AuthNonce::new(bits, k)?;
    }

    let attacker = Arc::new(Mutex::new(Attacker::new(
        strategy.kind,
        strategy.guess,
        params,
        k,
        (&setup.initiator_id, &setup.responder_id),
        rngs.attacker,
    )));
    let mut commit_rng = rngs.commit;
    let run = run_session(&setup, Arc::clone(&attacker), &mut commit_rng);
    let attacker = attacker.lock().unwrap();

    let sas_match = run.sas_match();
    let (with_a, with_b) = attacker.keys();
    let attacker_keyed = match (&with_a, &run.initiator_key) {
        (Some(x), Some(y)) => x == y,
        _ => false,
    } || match (&with_b, &run.responder_key) {
        (Some(x), Some(y)) => x == y,
        _ => false,
    };
    let both_keyed = run.initiator_key.is_some() && run.responder_key.is_some();
    let success = if strategy.kind.is_attack() {
        sas_match && both_keyed && attacker_keyed
    } else {
        sas_match && both_keyed && run.initiator_key == run.responder_key
    };
    Ok(AttackOutcome {
        success,
        sas_match,
        attacker_keyed,
        guess: attacker.guess(),
        target: attacker.target(),
        guess_emitted_at: attacker.guess_emitted_at(),
        target_revealed_at: attacker.target_revealed_at(),
        equivocated: attacker.equivocated(),
        run,
    })
}

/// Exact success count over all `2^k` values of the honest nonce the strategy
/// must guess. All other randomness comes from one fixed seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExactFraction {
    pub successes: u64,
    pub total: u64,
}

impl ExactFraction {
    pub fn as_f64(&self) -> f64 {
        self.successes as f64 / self.total as f64
    }

    /// `successes / total <= 2^-k`, compared exactly.
    pub fn within_bound(&self, k: u8) -> bool {
        (self.successes as u128) << k <= self.total as u128
    }
}

pub fn exhaustive_attack_success<T: GroupInt>(
    strategy: AttackStrategy,
    params: &NamedParams<T>,
    k: u8,
) -> Result<ExactFraction, SimError> {
    check_k(k)?;
    if k > MAX_EXHAUSTIVE_K {
        return Err(SimError::KTooLarge(k));
    }
    let total = 1u64 << k;
    let successes = (0..total)
        .into_par_iter()
        .map(|value| {
            let forced = match strategy.kind.target() {
                TargetSide::Initiator => Forced {
                    initiator_nonce: Some(value),
                    ..Forced::default()
                },
                TargetSide::Responder => Forced {
                    responder_nonce: Some(value),
                    ..Forced::default()
                },
            };
            run_trial_forced(strategy, params, k, 0, forced).map(|o| o.success as u64)
        })
        .sum::<Result<u64, SimError>>()?;
    Ok(ExactFraction { successes, total })
}

/// Monte Carlo estimate over `trials` independent seeded trials.
pub fn estimate_attack_success<T: GroupInt>(
    strategy: AttackStrategy,
    params: &NamedParams<T>,
    k: u8,
    trials: u64,
    seed: u64,
) -> Result<RateEstimate, SimError> {
    let min = if strategy.kind.is_attack() {
        MIN_TRIALS
    } else {
        1
    };
    if trials < min {
        return Err(SimError::TooFewTrials { min, got: trials });
    }
    check_k(k)?;
    let successes = (0..trials)
        .into_par_iter()
        .map(|i| run_mitm_trial(strategy, params, k, trial_seed(seed, i)).map(|o| o.success as u64))
        .sum::<Result<u64, SimError>>()?;
    Ok(RateEstimate::from_counts(successes, trials))
}
