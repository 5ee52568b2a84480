//! `sasdh`: pair two peers over TCP, or run the attack simulator.

use std::io::{self, BufRead, Write};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use rand::rngs::OsRng;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use sasdh_core::pairing::{run_initiator, run_responder, Paired, PairingError};
use sasdh_core::params::{resolve, ParamsError};
use sasdh_core::protocol::{check_k, Identity, ProtocolError, Sas, DEFAULT_K};
use sasdh_core::sim::{
    estimate_attack_success, exhaustive_attack_success, AttackStrategy, GuessRule, SimError,
    SimReport, StrategyKind,
};
use sasdh_core::transport::{connect_stream, Channel, StreamListener, TransportError};
use sasdh_core::{BigUint, GroupInt, NamedParams};

const EXIT_FAIL: u8 = 1;
const EXIT_TRANSPORT: u8 = 2;
const EXIT_TAMPER: u8 = 3;
const EXIT_REJECTED: u8 = 4;
const EXIT_TIMEOUT: u8 = 5;
/// sysexits EX_USAGE; clap's default of 2 would collide with the transport code.
const EXIT_USAGE: u8 = 64;

#[derive(Parser, Debug)]
#[command(
    name = "sasdh",
    version,
    about = "SAS-authenticated Diffie-Hellman pairing"
)]
#[command(args_conflicts_with_subcommands = true)]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,

    #[command(flatten)]
    peer: PeerArgs,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Measure man-in-the-middle success rates against the 2^-k bound.
    Sim(SimArgs),
}

#[derive(Args, Debug)]
struct PeerArgs {
    /// Wait for the initiator on this TCP port (0 picks a free one).
    #[arg(long, value_name = "PORT", conflicts_with = "connect")]
    listen: Option<u16>,

    /// Connect to a listening peer and act as initiator.
    #[arg(long, value_name = "HOST:PORT")]
    connect: Option<String>,

    /// Address the listener binds to.
    #[arg(long, value_name = "ADDR", default_value = "0.0.0.0")]
    bind: String,

    /// Identity shown to the remote operator.
    #[arg(long, value_name = "LABEL")]
    id: Option<String>,

    /// Authentication string length in bits.
    #[arg(long, value_name = "BITS", default_value_t = DEFAULT_K)]
    k: u8,

    /// Built-in parameter set name or path to a parameter file.
    #[arg(
        long,
        value_name = "NAME|FILE",
        env = "SASDH_PARAMS",
        default_value = "digits40"
    )]
    params: String,

    /// Seconds to wait for each message.
    #[arg(long, value_name = "SECS", default_value_t = 30.0)]
    timeout: f64,

    /// Derive all randomness from this seed. For testing only.
    #[arg(long, value_name = "N", hide = true)]
    seed: Option<u64>,
}

#[derive(Args, Debug)]
struct SimArgs {
    /// honest, impersonate-initiator, impersonate-responder, full-mitm or full-mitm-equivocate.
    #[arg(long, default_value = "impersonate-responder")]
    strategy: String,

    /// How the attacker picks its guess: fixed, fixed:<n>, uniform or adaptive.
    #[arg(long, default_value = "uniform")]
    guess: String,

    #[arg(long, value_name = "BITS", default_value_t = DEFAULT_K)]
    k: u8,

    /// Monte Carlo trials; runs by default unless only --exhaustive is given.
    #[arg(long, value_name = "N")]
    trials: Option<u64>,

    #[arg(long, value_name = "N", default_value_t = 1)]
    seed: u64,

    /// Enumerate every value of the nonce the attacker must guess (k <= 16).
    #[arg(long)]
    exhaustive: bool,

    /// Built-in parameter set name or path to a parameter file.
    #[arg(long, value_name = "NAME|FILE", default_value = "toy23")]
    params: String,
}

const DEFAULT_SIM_TRIALS: u64 = 10_000;

/// Error with the exit code it maps to.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }

    fn usage(message: impl Into<String>) -> Self {
        Failure::new(EXIT_USAGE, message)
    }
}

impl From<TransportError> for Failure {
    fn from(e: TransportError) -> Self {
        let code = match e {
            TransportError::Timeout => EXIT_TIMEOUT,
            TransportError::Malformed(_) => EXIT_TAMPER,
            _ => EXIT_TRANSPORT,
        };
        Failure::new(code, e.to_string())
    }
}

impl From<PairingError> for Failure {
    fn from(e: PairingError) -> Self {
        match e {
            PairingError::Transport(t) => t.into(),
            PairingError::Protocol(ProtocolError::RngFailure(m)) => Failure::new(EXIT_FAIL, m),
            PairingError::Protocol(p) => Failure::new(EXIT_TAMPER, p.to_string()),
            PairingError::Rejected => Failure::new(EXIT_REJECTED, e.to_string()),
        }
    }
}

impl From<ParamsError> for Failure {
    fn from(e: ParamsError) -> Self {
        Failure::usage(e.to_string())
    }
}

impl From<SimError> for Failure {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Protocol(ProtocolError::RngFailure(m)) => Failure::new(EXIT_FAIL, m),
            other => Failure::usage(other.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Some(Command::Sim(args)) => run_sim(&args),
        None => run_peer(&cli.peer),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run_peer(args: &PeerArgs) -> Result<u8, Failure> {
    if args.listen.is_none() && args.connect.is_none() {
        return Err(Failure::usage(
            "one of --listen, --connect or the sim subcommand is required",
        ));
    }
    let label = args
        .id
        .as_deref()
        .ok_or_else(|| Failure::usage("--id is required"))?;
    let identity = Identity::new(label).map_err(|e| Failure::usage(e.to_string()))?;
    check_k(args.k).map_err(|e| Failure::usage(e.to_string()))?;
    if !(args.timeout.is_finite() && args.timeout > 0.0) {
        return Err(Failure::usage(
            "--timeout must be a positive number of seconds",
        ));
    }
    let timeout = Duration::from_secs_f64(args.timeout);
    let params: NamedParams<BigUint> = resolve(&args.params)?;

    let mut rng: Box<dyn RngCore> = match args.seed {
        Some(seed) => Box::new(ChaCha20Rng::seed_from_u64(seed)),
        None => Box::new(OsRng),
    };

    let paired = if let Some(address) = &args.connect {
        let mut channel = connect_stream(address, timeout)?;
        channel.set_timeout(timeout);
        run_initiator(
            &mut channel,
            &params,
            identity,
            args.k,
            &mut rng,
            ask_operator,
        )?
    } else {
        let port = args.listen.expect("checked above");
        let listener = StreamListener::bind(&format!("{}:{port}", args.bind))?;
        println!("listening on {}", listener.local_addr()?);
        flush();
        let mut channel = listener.accept()?;
        channel.set_timeout(timeout);
        run_responder(
            &mut channel,
            &params,
            identity,
            args.k,
            &mut rng,
            ask_operator,
        )?
    };
    report_pairing(&paired);
    Ok(0)
}

fn flush() {
    let _ = io::stdout().flush();
}

/// Shows `<remote identity> : <SAS>` and reads y/n from stdin. Anything but
/// an explicit yes, including end of input, rejects.
fn ask_operator(remote: &Identity, sas: &Sas) -> bool {
    println!("{remote} : {sas}");
    eprint!("do both screens show the same string? [y/n] ");
    flush();
    let mut line = String::new();
    match io::stdin().lock().read_line(&mut line) {
        Ok(_) => matches!(line.trim().to_ascii_lowercase().as_str(), "y" | "yes"),
        Err(_) => false,
    }
}

fn report_pairing<T: GroupInt>(paired: &Paired<T>) {
    println!("key fingerprint: {}", paired.key.fingerprint());
    flush();
}

fn run_sim(args: &SimArgs) -> Result<u8, Failure> {
    let kind: StrategyKind = args.strategy.parse()?;
    let guess: GuessRule = args
        .guess
        .parse()
        .map_err(|_| Failure::usage(format!("unknown guess rule `{}`", args.guess)))?;
    check_k(args.k).map_err(|e| Failure::usage(e.to_string()))?;
    let strategy = AttackStrategy::new(kind, guess);

    // small groups run on machine words, anything larger on big integers
    match resolve::<u64>(&args.params) {
        Ok(params) => simulate(strategy, &params, args),
        Err(_) => {
            let params: NamedParams<BigUint> = resolve(&args.params)?;
            simulate(strategy, &params, args)
        }
    }
}

fn simulate<T: GroupInt>(
    strategy: AttackStrategy,
    params: &NamedParams<T>,
    args: &SimArgs,
) -> Result<u8, Failure> {
    let mut reports = Vec::new();
    if args.exhaustive {
        let exact = exhaustive_attack_success(strategy, params, args.k)?;
        reports.push(SimReport::exhaustive(strategy, args.k, exact));
    }
    if args.trials.is_some() || !args.exhaustive {
        let trials = args.trials.unwrap_or(DEFAULT_SIM_TRIALS);
        let est = estimate_attack_success(strategy, params, args.k, trials, args.seed)?;
        reports.push(SimReport::monte_carlo(strategy, args.k, est));
    }

    println!("params={} seed={}", params.name, args.seed);
    println!("{}", SimReport::table_header());
    for r in &reports {
        println!("{}", r.table_row());
    }
    for r in &reports {
        println!();
        print!("{}", r.key_values());
    }
    flush();
    Ok(if reports.iter().all(|r| r.pass) {
        0
    } else {
        EXIT_FAIL
    })
}
