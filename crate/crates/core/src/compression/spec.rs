use std::fmt;
use std::str::FromStr;

use crate::error::{domain, Error, Result};

pub const MAX_COMPOSE_DEPTH: usize = 4;
pub const MAX_QUANT_BITS: u32 = 32;

/// Clamp range of the fixed-level quantizer, in units of `step`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ClampLevel {
    Finite(u32),
    Unbounded,
}

/// One compression operator and its parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum CompressorSpec {
    Identity,
    /// `b`-bit infinity-norm quantizer; with `stochastic_norm` the norm is
    /// randomly rounded to an integer before transmission.
    InfNormQuant { b: u32, stochastic_norm: bool },
    TopK { k: usize },
    FixedLevelQuant { step: f64, clamp_level: ClampLevel },
    Compose {
        outer: Box<CompressorSpec>,
        inner: Box<CompressorSpec>,
    },
}

impl CompressorSpec {
    /// The quantizer `Qn` with `b = 2`.
    pub fn qn() -> Self {
        CompressorSpec::InfNormQuant {
            b: 2,
            stochastic_norm: true,
        }
    }

    /// `Qn` applied to the Top-k sparsification of the input.
    pub fn qtn(k: usize) -> Self {
        CompressorSpec::compose(Self::qn(), CompressorSpec::TopK { k })
    }

    /// Levels `{-1, 0, 1}` at unit step.
    pub fn unit_levels() -> Self {
        CompressorSpec::FixedLevelQuant {
            step: 1.0,
            clamp_level: ClampLevel::Finite(1),
        }
    }

    pub fn compose(outer: CompressorSpec, inner: CompressorSpec) -> Self {
        CompressorSpec::Compose {
            outer: Box::new(outer),
            inner: Box::new(inner),
        }
    }

    /// Number of nested `Compose` nodes on the deepest path.
    pub fn compose_depth(&self) -> usize {
        match self {
            CompressorSpec::Compose { outer, inner } => {
                1 + outer.compose_depth().max(inner.compose_depth())
            }
            _ => 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            CompressorSpec::Identity => Ok(()),
            CompressorSpec::InfNormQuant { b, .. } => {
                if (1..=MAX_QUANT_BITS).contains(b) {
                    Ok(())
                } else {
                    Err(domain(format!("quantizer bits b = {b} outside 1..={MAX_QUANT_BITS}")))
                }
            }
            CompressorSpec::TopK { k } => {
                if *k >= 1 {
                    Ok(())
                } else {
                    Err(domain("top-k needs k >= 1"))
                }
            }
            CompressorSpec::FixedLevelQuant { step, clamp_level } => {
                if !(step.is_finite() && *step > 0.0) {
                    return Err(domain(format!("quantizer step {step} must be positive")));
                }
                if *clamp_level == ClampLevel::Finite(0) {
                    return Err(domain("clamp level must be positive"));
                }
                Ok(())
            }
            CompressorSpec::Compose { outer, inner } => {
                if self.compose_depth() > MAX_COMPOSE_DEPTH {
                    return Err(domain(format!(
                        "composition depth {} exceeds {MAX_COMPOSE_DEPTH}",
                        self.compose_depth()
                    )));
                }
                outer.validate()?;
                inner.validate()
            }
        }
    }
}

impl fmt::Display for CompressorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CompressorSpec::Identity => write!(f, "identity"),
            CompressorSpec::InfNormQuant { b, stochastic_norm } => {
                let norm = if *stochastic_norm { "stochastic" } else { "raw" };
                write!(f, "infnorm(b={b},norm={norm})")
            }
            CompressorSpec::TopK { k } => write!(f, "topk(k={k})"),
            CompressorSpec::FixedLevelQuant { step, clamp_level } => match clamp_level {
                ClampLevel::Finite(c) => write!(f, "fixed(step={step},clamp={c})"),
                ClampLevel::Unbounded => write!(f, "fixed(step={step},clamp=inf)"),
            },
            CompressorSpec::Compose { outer, inner } => write!(f, "compose({outer},{inner})"),
        }
    }
}

impl FromStr for CompressorSpec {
    type Err = Error;

    /// Parses `identity`, `infnorm(b=2,norm=stochastic|raw)`, `topk(k=10)`,
    /// `fixed(step=1,clamp=1|inf)`, `compose(OUTER,INNER)` and the shorthands
    /// `qn`, `qn(b=..)`, `qtn`, `qtn(b=..,k=..)`, `levels`.
    fn from_str(s: &str) -> Result<Self> {
        let spec = parse(s.trim())?;
        spec.validate()?;
        Ok(spec)
    }
}

fn parse_err(s: &str, msg: &str) -> Error {
    domain(format!("cannot parse compressor `{s}`: {msg}"))
}

fn parse(s: &str) -> Result<CompressorSpec> {
    let (name, args) = match s.find('(') {
        Some(open) => {
            if !s.ends_with(')') {
                return Err(parse_err(s, "missing closing parenthesis"));
            }
            (&s[..open], split_top_level(&s[open + 1..s.len() - 1]))
        }
        None => (s, Vec::new()),
    };
    let name = name.trim().to_ascii_lowercase();
    let kv = |key: &str| -> Option<&str> {
        args.iter().find_map(|a| {
            let (k, v) = a.split_once('=')?;
            (k.trim() == key).then(|| v.trim())
        })
    };
    let check_keys = |allowed: &[&str]| -> Result<()> {
        for a in &args {
            let key = a.split_once('=').map(|(k, _)| k.trim()).unwrap_or(a.as_str());
            if !allowed.contains(&key) {
                return Err(parse_err(s, &format!("unknown argument `{a}`")));
            }
        }
        Ok(())
    };
    let num = |key: &str, default: Option<&str>| -> Result<String> {
        kv(key)
            .or(default)
            .map(str::to_string)
            .ok_or_else(|| parse_err(s, &format!("missing `{key}`")))
    };
    let int = |key: &str, default: Option<&str>| -> Result<u64> {
        num(key, default)?
            .parse()
            .map_err(|_| parse_err(s, &format!("`{key}` is not a non-negative integer")))
    };
    let norm_kind = || -> Result<bool> {
        match kv("norm").unwrap_or("stochastic") {
            "stochastic" => Ok(true),
            "raw" => Ok(false),
            other => Err(parse_err(s, &format!("unknown norm mode `{other}`"))),
        }
    };
    match name.as_str() {
        "identity" | "none" => {
            check_keys(&[])?;
            Ok(CompressorSpec::Identity)
        }
        "infnorm" | "qn" => {
            check_keys(&["b", "norm"])?;
            let default_b = if name == "qn" { Some("2") } else { None };
            Ok(CompressorSpec::InfNormQuant {
                b: int("b", default_b)? as u32,
                stochastic_norm: norm_kind()?,
            })
        }
        "topk" => {
            check_keys(&["k"])?;
            Ok(CompressorSpec::TopK {
                k: int("k", None)? as usize,
            })
        }
        "qtn" => {
            check_keys(&["b", "k", "norm"])?;
            Ok(CompressorSpec::compose(
                CompressorSpec::InfNormQuant {
                    b: int("b", Some("2"))? as u32,
                    stochastic_norm: norm_kind()?,
                },
                CompressorSpec::TopK {
                    k: int("k", Some("10"))? as usize,
                },
            ))
        }
        "fixed" | "levels" => {
            check_keys(&["step", "clamp"])?;
            let step: f64 = num("step", Some("1"))?
                .parse()
                .map_err(|_| parse_err(s, "`step` is not a number"))?;
            let clamp_level = match num("clamp", Some("1"))?.as_str() {
                "inf" | "unbounded" => ClampLevel::Unbounded,
                c => ClampLevel::Finite(
                    c.parse()
                        .map_err(|_| parse_err(s, "`clamp` is not an integer or `inf`"))?,
                ),
            };
            Ok(CompressorSpec::FixedLevelQuant { step, clamp_level })
        }
        "compose" => {
            if args.len() != 2 {
                return Err(parse_err(s, "compose takes exactly two compressors"));
            }
            Ok(CompressorSpec::compose(parse(&args[0])?, parse(&args[1])?))
        }
        _ => Err(parse_err(s, "unknown compressor")),
    }
}

fn split_top_level(s: &str) -> Vec<String> {
    let mut parts = Vec::new();
    let mut depth = 0usize;
    let mut cur = String::new();
    for ch in s.chars() {
        match ch {
            '(' => {
                depth += 1;
                cur.push(ch);
            }
            ')' => {
                depth = depth.saturating_sub(1);
                cur.push(ch);
            }
            ',' if depth == 0 => parts.push(std::mem::take(&mut cur).trim().to_string()),
            _ => cur.push(ch),
        }
    }
    if !cur.trim().is_empty() {
        parts.push(cur.trim().to_string());
    }
    parts
}

impl serde::Serialize for CompressorSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> serde::Deserialize<'de> for CompressorSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
