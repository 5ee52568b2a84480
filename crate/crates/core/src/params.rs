//! Named parameter sets and the plain-text parameter file format.
//!
//! A parameter file holds three decimal integers `p`, `q`, `g`, one per line.
//! Blank lines are ignored and `#` starts a comment that runs to end of line.

use std::fmt;
use std::path::Path;

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::group::{DhParams, GroupError};
use crate::int::GroupInt;

/// 32-bit identifier carried in the payload message so peers can detect a
/// parameter mismatch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ParamSetId(pub u32);

impl fmt::Display for ParamSetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:08x}", self.0)
    }
}

#[derive(Debug, Error)]
pub enum ParamsError {
    #[error("unknown parameter set `{0}`")]
    UnknownSet(String),
    #[error("parameter file line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("parameter file must contain exactly three integers, found {0}")]
    Count(usize),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error("reading parameter file: {0}")]
    Io(#[from] std::io::Error),
}

/// Built-in parameter sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BuiltinSet {
    /// `p = 23, q = 11, g = 2`. For tests and simulation only.
    Toy23,
    /// 40-decimal-digit safe prime `p = 10^39 + 2083`, `q = (p - 1) / 2`, `g = 4`.
    Digits40,
    /// RFC 3526 group 14 (2048-bit MODP), `q = (p - 1) / 2`, `g = 2`.
    Modp2048,
}

const DIGITS40_P: &str = "1000000000000000000000000000000000002083";
const DIGITS40_Q: &str = "500000000000000000000000000000000001041";

const MODP2048_P_HEX: &str = "\
FFFFFFFFFFFFFFFFC90FDAA22168C234C4C6628B80DC1CD129024E088A67CC74\
020BBEA63B139B22514A08798E3404DDEF9519B3CD3A431B302B0A6DF25F1437\
4FE1356D6D51C245E485B576625E7EC6F44C42E9A637ED6B0BFF5CB6F406B7ED\
EE386BFB5A899FA5AE9F24117C4B1FE649286651ECE45B3DC2007CB8A163BF05\
98DA48361C55D39A69163FA8FD24CF5F83655D23DCA3AD961C62F356208552BB\
9ED529077096966D670C354E4ABC9804F1746C08CA18217C32905E462E36CE3B\
E39E772C180E86039B2783A2EC07A28FB5C55DF06F4C52C9DE2BCBF695581718\
3995497CEA956AE515D2261898FA051015728E5A8AACAA68FFFFFFFFFFFFFFFF";

impl BuiltinSet {
    pub const ALL: [BuiltinSet; 3] = [
        BuiltinSet::Toy23,
        BuiltinSet::Digits40,
        BuiltinSet::Modp2048,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BuiltinSet::Toy23 => "toy23",
            BuiltinSet::Digits40 => "digits40",
            BuiltinSet::Modp2048 => "modp2048",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|s| s.name() == name)
    }

    pub fn id(self) -> ParamSetId {
        match self {
            BuiltinSet::Toy23 => ParamSetId(1),
            BuiltinSet::Digits40 => ParamSetId(2),
            BuiltinSet::Modp2048 => ParamSetId(3),
        }
    }

    /// Loads the constants into backend `T`; fails with `Overflow` if they do not fit.
    pub fn params<T: GroupInt>(self) -> Result<DhParams<T>, GroupError> {
        let dec = |s: &str| T::parse_decimal(s).ok_or(GroupError::Overflow);
        let small = |v: u8| T::from_u8(v).ok_or(GroupError::Overflow);
        Ok(match self {
            BuiltinSet::Toy23 => DhParams::new_unchecked(small(23)?, small(11)?, small(2)?),
            BuiltinSet::Digits40 => {
                DhParams::new_unchecked(dec(DIGITS40_P)?, dec(DIGITS40_Q)?, small(4)?)
            }
            BuiltinSet::Modp2048 => {
                let p = T::from_str_radix(MODP2048_P_HEX, 16).map_err(|_| GroupError::Overflow)?;
                let q = (p.clone() - T::one()) / small(2)?;
                DhParams::new_unchecked(p, q, small(2)?)
            }
        })
    }

    pub fn load<T: GroupInt>(self) -> Result<NamedParams<T>, GroupError> {
        Ok(NamedParams {
            name: self.name().to_owned(),
            id: self.id(),
            params: self.params()?,
        })
    }
}

/// Parameters together with the name and identifier both peers agree on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NamedParams<T> {
    pub name: String,
    pub id: ParamSetId,
    pub params: DhParams<T>,
}

impl<T: GroupInt> NamedParams<T> {
    /// Wraps user-supplied parameters. The identifier is the first four octets of
    /// SHA-256 over the decimal `p\nq\ng`, so peers loading the same file agree.
    pub fn custom(name: impl Into<String>, params: DhParams<T>) -> Self {
        let canonical = format!("{}\n{}\n{}", params.p(), params.q(), params.g());
        let digest = Sha256::digest(canonical.as_bytes());
        let id = ParamSetId(u32::from_be_bytes([
            digest[0], digest[1], digest[2], digest[3],
        ]));
        NamedParams {
            name: name.into(),
            id,
            params,
        }
    }
}

/// Parses and validates the contents of a parameter file.
pub fn parse_params<T: GroupInt>(text: &str) -> Result<DhParams<T>, ParamsError> {
    let mut values = Vec::with_capacity(3);
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let value = T::parse_decimal(line).ok_or_else(|| ParamsError::Parse {
            line: idx + 1,
            msg: format!("expected a decimal integer, got `{line}`"),
        })?;
        values.push(value);
    }
    if values.len() != 3 {
        return Err(ParamsError::Count(values.len()));
    }
    let g = values.pop().unwrap();
    let q = values.pop().unwrap();
    let p = values.pop().unwrap();
    Ok(DhParams::validate(p, q, g)?)
}

pub fn load_params_file<T: GroupInt>(path: &Path) -> Result<NamedParams<T>, ParamsError> {
    let text = std::fs::read_to_string(path)?;
    let params = parse_params(&text)?;
    Ok(NamedParams::custom(path.display().to_string(), params))
}

/// Resolves a built-in set name, or failing that, a parameter file path.
pub fn resolve<T: GroupInt>(name_or_path: &str) -> Result<NamedParams<T>, ParamsError> {
    if let Some(set) = BuiltinSet::from_name(name_or_path) {
        return Ok(set.load()?);
    }
    let path = Path::new(name_or_path);
    if path.exists() {
        load_params_file(path)
    } else {
        Err(ParamsError::UnknownSet(name_or_path.to_owned()))
    }
}
