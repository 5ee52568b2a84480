//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so every line is printed, and exits
//! nonzero if any criterion fails.

use std::io::{BufRead, BufReader, Write};
use std::path::PathBuf;
use std::process::{Command, ExitCode, Stdio};
use std::time::{Duration, Instant};

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use sasdh_core::group::{derive_key, mod_exp, pub_share, DhParams, PrivateShare};
use sasdh_core::params::{BuiltinSet, NamedParams};
use sasdh_core::protocol::{
    wire::FRAME_HEADER_LEN, AuthNonce, Identity, Initiator, PairingMessage, Phase, Responder,
};
use sasdh_core::sim::{
    estimate_attack_success, exhaustive_attack_success, run_honest_session, run_session,
    AttackStrategy, ExactFraction, GuessRule, SessionSetup, StrategyKind,
};
use sasdh_core::transport::{Direction, Verdict};
use sasdh_core::{BigUint, ProtocolError};

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn toy() -> NamedParams<u64> {
    BuiltinSet::Toy23.load().unwrap()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn security_bound() -> Check {
    let start = Instant::now();
    let s = AttackStrategy::new(StrategyKind::ImpersonateResponder, GuessRule::Fixed(0));
    for k in [1u8, 2, 3, 8, 12] {
        let exact = exhaustive_attack_success(s, &toy(), k).map_err(|e| e.to_string())?;
        ensure(
            exact
                == ExactFraction {
                    successes: 1,
                    total: 1 << k,
                },
            || format!("k={k}: {}/{}", exact.successes, exact.total),
        )?;
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(10), || {
        format!("took {elapsed:?}")
    })?;
    Ok(format!(
        "exactly 2^-k for k in {{1,2,3,8,12}} in {elapsed:.2?}"
    ))
}

fn monte_carlo() -> Check {
    let start = Instant::now();
    let s = AttackStrategy::new(StrategyKind::ImpersonateResponder, GuessRule::Uniform);
    let est = estimate_attack_success(s, &toy(), 8, 100_000, 1).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    ensure((300..=480).contains(&est.successes), || {
        format!("{} successes", est.successes)
    })?;
    ensure(elapsed < Duration::from_secs(60), || {
        format!("took {elapsed:?}")
    })?;
    Ok(format!(
        "{} / 100000 successes, 99% CI [{:.6}, {:.6}], in {elapsed:.2?}",
        est.successes, est.ci_low, est.ci_high
    ))
}

fn completeness() -> Check {
    for seed in 0..1000 {
        let o = run_honest_session(&toy(), 20, seed).map_err(|e| e.to_string())?;
        ensure(
            o.success && o.sas_match && o.run.initiator_key == o.run.responder_key,
            || format!("p=23 seed {seed} failed"),
        )?;
    }
    let big: NamedParams<BigUint> = BuiltinSet::Digits40.load().unwrap();
    for seed in 0..10 {
        let o = run_honest_session(&big, 20, seed).map_err(|e| e.to_string())?;
        let (ka, kb) = (o.run.initiator_key.as_ref(), o.run.responder_key.as_ref());
        ensure(
            o.success && ka.is_some() && ka.map(|k| k.octets()) == kb.map(|k| k.octets()),
            || format!("40-digit seed {seed} failed"),
        )?;
    }
    Ok("1000 sessions with p=23 and 10 with the 40-digit set, zero failures".into())
}

fn flip(frame: &[u8], bit: usize) -> Vec<u8> {
    let mut out = frame.to_vec();
    out[bit / 8] ^= 0x80 >> (bit % 8);
    out
}

fn tamper_suite() -> Check {
    let params = toy();
    let (alice, bob) = (
        Identity::new("alice").unwrap(),
        Identity::new("bob").unwrap(),
    );
    let (mut open_failures, mut substitutions) = (0usize, 0usize);
    for seed in 0..100u64 {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let a_priv = PrivateShare::generate(&params.params, &mut rng).unwrap();
        let b_priv = PrivateShare::generate(&params.params, &mut rng).unwrap();
        let n_a = AuthNonce::generate(20, &mut rng).unwrap();
        let n_b = AuthNonce::generate(20, &mut rng).unwrap();
        let commit_seed = rng.next_u64();
        let initiator = || {
            let mut r = ChaCha20Rng::seed_from_u64(commit_seed);
            Initiator::start_with(&params, alice.clone(), a_priv.clone(), n_a, &mut r).unwrap()
        };
        let responder = |m1: &PairingMessage<u64>| {
            Responder::on_commit_with(&params, bob.clone(), b_priv.clone(), n_b, m1)
        };

        let (mut a, m1) = initiator();
        let (_, m2) = responder(&m1).map_err(|e| e.to_string())?;
        let (m3, _) = a.on_payload(&m2).map_err(|e| e.to_string())?;
        let (m1, m3) = (m1.encode().unwrap(), m3.encode().unwrap());

        let mut check_open_failed = |m1: &[u8], m3: &[u8], what: &str| -> Result<(), String> {
            let result = PairingMessage::decode(m1)
                .and_then(|m| responder(&m))
                .and_then(|(mut b, _)| {
                    let r = PairingMessage::decode(m3).and_then(|m| b.on_decommit(&m));
                    ensure(b.phase() == Phase::Aborted && b.sas().is_none(), || {
                        "not aborted".into()
                    })
                    .map_err(ProtocolError::Malformed)?;
                    r
                });
            open_failures += 1;
            ensure(result == Err(ProtocolError::OpenFailed), || {
                format!("seed {seed} {what}: {result:?}")
            })
        };
        for bit in FRAME_HEADER_LEN * 8..m1.len() * 8 {
            check_open_failed(&flip(&m1, bit), &m3, &format!("Msg1 bit {bit}"))?;
        }
        for bit in FRAME_HEADER_LEN * 8..m3.len() * 8 {
            check_open_failed(&m1, &flip(&m3, bit), &format!("Msg3 bit {bit}"))?;
        }

        // every k-bit nonce N_E != N_B, substituted into Msg2 for this session
        // would be too many at k = 20; take all single-bit flips plus 64 random values
        let mut replacements: Vec<u64> = (0..20).map(|b| n_b.bits() ^ (1 << b)).collect();
        replacements.extend(
            (0..64)
                .map(|_| rng.next_u64() & 0xFFFFF)
                .filter(|&v| v != n_b.bits()),
        );
        for n_e in replacements {
            let (mut a, m1) = initiator();
            let (mut b, m2) = responder(&m1).map_err(|e| e.to_string())?;
            let PairingMessage::Payload {
                param_set,
                mut payload,
            } = m2
            else {
                unreachable!()
            };
            payload.auth_nonce = AuthNonce::new(n_e, 20).unwrap();
            let (m3, s_a) = a
                .on_payload(&PairingMessage::Payload { param_set, payload })
                .map_err(|e| e.to_string())?;
            let s_b = b.on_decommit(&m3).map_err(|e| e.to_string())?;
            substitutions += 1;
            ensure(s_a != s_b, || {
                format!("seed {seed}: substituted nonce {n_e:05x} left SAS equal")
            })?;
            // operators comparing unequal strings reject: no key on either side
            let (ca, cb) = (
                a.confirm(s_a == s_b).unwrap(),
                b.confirm(s_a == s_b).unwrap(),
            );
            ensure(ca.key().is_none() && cb.key().is_none(), || {
                "key derived after mismatch".into()
            })?;
        }
    }
    Ok(format!("{open_failures} commitment bit flips all OpenFailed, {substitutions} Msg2 nonce substitutions all mismatched"))
}

fn dh_oracle() -> Check {
    let naive = |base: u64, exp: u64| (0..exp).fold(1u64, |acc, _| acc * base % 23);
    let params = DhParams::validate(23u64, 11, 2).map_err(|e| e.to_string())?;
    for a in 1..=10u64 {
        for b in 1..=10u64 {
            let pa = PrivateShare::from_exponent(&params, a).unwrap();
            let pb = PrivateShare::from_exponent(&params, b).unwrap();
            let (ga, gb) = (pub_share(&params, &pa), pub_share(&params, &pb));
            ensure(
                mod_exp(&2, &a, &23) == naive(2, a) && *ga.value() == naive(2, a),
                || format!("g^{a}"),
            )?;
            ensure(*gb.value() == naive(2, b), || format!("g^{b}"))?;
            let ka = derive_key(&params, gb.value(), &pa).map_err(|e| e.to_string())?;
            let kb = derive_key(&params, ga.value(), &pb).map_err(|e| e.to_string())?;
            let want = naive(naive(2, b), a);
            ensure(*ka.value() == want && *kb.value() == want, || {
                format!("a={a} b={b}")
            })?;
        }
    }
    Ok("mod_exp, pub_share and derive_key match the oracle on all 100 (a, b)".into())
}

struct Peer {
    sas_line: String,
    fingerprint: Option<String>,
    success: bool,
}

fn finish(child: std::process::Child) -> Result<Peer, String> {
    let out = child.wait_with_output().map_err(|e| e.to_string())?;
    let stdout = String::from_utf8_lossy(&out.stdout);
    let sas_line = stdout
        .lines()
        .find(|l| l.contains(" : "))
        .unwrap_or_default()
        .to_owned();
    let fingerprint = stdout
        .lines()
        .find_map(|l| l.strip_prefix("key fingerprint: "))
        .map(str::to_owned);
    Ok(Peer {
        sas_line,
        fingerprint,
        success: out.status.success(),
    })
}

fn cli_loopback() -> Check {
    let exe = env!("CARGO_BIN_EXE_sasdh");
    let start = Instant::now();
    let mut listener = Command::new(exe)
        .args([
            "--listen",
            "0",
            "--bind",
            "127.0.0.1",
            "--id",
            "bob",
            "--timeout",
            "5",
        ])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn()
        .map_err(|e| e.to_string())?;
    listener
        .stdin
        .as_mut()
        .unwrap()
        .write_all(b"y\n")
        .map_err(|e| e.to_string())?;
    let mut first = String::new();
    let mut reader = BufReader::new(listener.stdout.take().unwrap());
    reader.read_line(&mut first).map_err(|e| e.to_string())?;
    let addr = first
        .trim()
        .strip_prefix("listening on ")
        .ok_or(format!("unexpected `{first}`"))?
        .to_owned();

    let mut connector = Command::new(exe)
        .args(["--connect", &addr, "--id", "alice", "--timeout", "5"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn()
        .map_err(|e| e.to_string())?;
    connector
        .stdin
        .as_mut()
        .unwrap()
        .write_all(b"y\n")
        .map_err(|e| e.to_string())?;
    let a = finish(connector)?;
    let status = listener.wait().map_err(|e| e.to_string())?;
    let rest: Vec<String> = reader.lines().map_while(Result::ok).collect();
    let elapsed = start.elapsed();

    let b_sas = rest
        .iter()
        .find(|l| l.contains(" : "))
        .cloned()
        .unwrap_or_default();
    let b_fp = rest
        .iter()
        .find_map(|l| l.strip_prefix("key fingerprint: "))
        .map(str::to_owned);
    ensure(a.success && status.success(), || {
        format!("exit statuses {} / {status}", a.success)
    })?;
    let sas_a = a.sas_line.strip_prefix("bob : ").unwrap_or("");
    let sas_b = b_sas.strip_prefix("alice : ").unwrap_or("");
    ensure(
        sas_a == sas_b && sas_a.len() == 5 && sas_a.chars().all(|c| c.is_ascii_hexdigit()),
        || format!("SAS lines `{}` / `{b_sas}`", a.sas_line),
    )?;
    ensure(a.fingerprint.is_some() && a.fingerprint == b_fp, || {
        format!("fingerprints {:?} / {b_fp:?}", a.fingerprint)
    })?;
    ensure(elapsed < Duration::from_secs(1), || {
        format!("took {elapsed:?}")
    })?;
    Ok(format!(
        "SAS {sas_a}, fingerprint {}, in {elapsed:.2?}",
        a.fingerprint.unwrap()
    ))
}

fn wire_stability() -> Check {
    let session = || {
        let params = BuiltinSet::Digits40.load::<BigUint>().unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(2024);
        let setup = SessionSetup::generate(&params, 20, &mut rng).unwrap();
        let run = run_session(
            &setup,
            |_: usize, _: Direction, _: &[u8]| Verdict::Deliver,
            &mut rng,
        );
        run.transcript
            .into_iter()
            .map(|e| e.sent)
            .collect::<Vec<_>>()
    };
    let frames = session();
    ensure(frames == session(), || "two runs differ".into())?;
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/tests/golden");
    for (name, frame) in ["msg1_commit.hex", "msg2_payload.hex", "msg3_decommit.hex"]
        .iter()
        .zip(&frames)
    {
        let want = std::fs::read_to_string(dir.join(name)).map_err(|e| format!("{name}: {e}"))?;
        let got: String = frame.iter().map(|b| format!("{b:02x}")).collect();
        ensure(got == want.trim(), || format!("{name} differs"))?;
    }
    Ok("three frames byte-identical to the golden files".into())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 7] = [
        ("security bound", security_bound),
        ("monte carlo consistency", monte_carlo),
        ("completeness", completeness),
        ("tamper suite", tamper_suite),
        ("dh oracle equivalence", dh_oracle),
        ("end-to-end cli", cli_loopback),
        ("wire stability", wire_stability),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS {}. {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {}. {name}: {detail}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
