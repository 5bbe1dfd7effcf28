//! File-level operations behind the command-line subcommands.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use qicost::classical::{classical_ic, worst_case_error, ClassicalProtocol, ClassicalProtocolFile};
use qicost::embeddings::{
    classical_embed, quantum_embed_averaged, sink_embedding_spec, EmbeddingSpec,
};
use qicost::functions::FunctionRef;
use qicost::quantum::{
    quantum_costs, quantum_worst_case_error, QuantumProtocol, QuantumProtocolFile,
};
use qicost::InputDistribution;
use serde::Deserialize;

use crate::error::{HarnessError, Result};

/// A protocol file together with the function it declares, if any.
pub enum LoadedProtocol {
    Classical(ClassicalProtocol, Option<FunctionRef>),
    Quantum(QuantumProtocol, Option<FunctionRef>),
}

impl LoadedProtocol {
    /// Parses a protocol file, dispatching on its `kind` field.
    pub fn from_json(s: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Kind {
            kind: String,
        }
        let k: Kind = serde_json::from_str(s)?;
        match k.kind.as_str() {
            "classical" => {
                let f = ClassicalProtocolFile::from_json(s)?;
                Ok(Self::Classical(f.to_protocol()?, f.function))
            }
            "quantum" => {
                let f = QuantumProtocolFile::from_json(s)?;
                Ok(Self::Quantum(f.to_protocol()?, f.function))
            }
            other => Err(HarnessError::Config(format!(
                "unknown protocol kind `{other}`"
            ))),
        }
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn function(&self) -> Option<FunctionRef> {
        match self {
            Self::Classical(_, f) | Self::Quantum(_, f) => *f,
        }
    }

    /// Input domain sizes.
    pub fn domain(&self) -> (u64, u64) {
        match self {
            Self::Classical(p, _) => (p.x_size(), p.y_size()),
            Self::Quantum(p, _) => (1 << p.x_bits(), 1 << p.y_bits()),
        }
    }
}

/// `uniform` or a distribution file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DistArg {
    Uniform,
    File(PathBuf),
}

impl FromStr for DistArg {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(if s == "uniform" {
            Self::Uniform
        } else {
            Self::File(s.into())
        })
    }
}

impl DistArg {
    pub fn load(&self, x_size: u64, y_size: u64) -> Result<InputDistribution> {
        match self {
            Self::Uniform => Ok(InputDistribution::uniform(x_size, y_size)),
            Self::File(path) => {
                let mu: InputDistribution = serde_json::from_str(&std::fs::read_to_string(path)?)?;
                mu.validate()?;
                if mu.x_size() != x_size || mu.y_size() != y_size {
                    return Err(HarnessError::Config(format!(
                        "distribution on {}x{}, protocol on {x_size}x{y_size}",
                        mu.x_size(),
                        mu.y_size()
                    )));
                }
                Ok(mu)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Quantity {
    Ic,
    Qic,
    Hqic,
    Sqic,
    Err,
    Cc,
    Qcc,
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::Ic => "ic",
            Self::Qic => "qic",
            Self::Hqic => "hqic",
            Self::Sqic => "sqic",
            Self::Err => "err",
            Self::Cc => "cc",
            Self::Qcc => "qcc",
        };
        f.write_str(s)
    }
}

pub fn measure(p: &LoadedProtocol, mu: &InputDistribution, q: Quantity) -> Result<f64> {
    let function = || {
        p.function()
            .ok_or_else(|| {
                HarnessError::Config("err needs a `function` field in the protocol file".into())
            })?
            .build()
            .map_err(HarnessError::from)
    };
    let wrong = |kind: &str| {
        Err(HarnessError::Config(format!(
            "{q} is not defined for {kind} protocols"
        )))
    };
    match p {
        LoadedProtocol::Classical(c, _) => match q {
            Quantity::Ic => Ok(classical_ic(c, mu)?),
            Quantity::Err => Ok(worst_case_error(c, &function()?)?),
            Quantity::Cc => Ok(c.cc() as f64),
            _ => wrong("classical"),
        },
        LoadedProtocol::Quantum(qp, _) => match q {
            Quantity::Qic | Quantity::Hqic | Quantity::Qcc => {
                let c = quantum_costs(qp, mu)?;
                Ok(match q {
                    Quantity::Qic => c.qic,
                    Quantity::Hqic => c.hqic,
                    _ => c.qcc as f64,
                })
            }
            Quantity::Sqic => Ok(qicost::quantum::sqic(qp, mu)?),
            Quantity::Err => Ok(quantum_worst_case_error(qp, &function()?)?),
            _ => wrong("quantum"),
        },
    }
}

/// `sink:m` or a spec file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SpecArg {
    Sink(usize),
    File(PathBuf),
}

impl FromStr for SpecArg {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.strip_prefix("sink:") {
            Some(m) => m
                .parse()
                .map(Self::Sink)
                .map_err(|e| format!("bad vertex count `{m}`: {e}")),
            None => Ok(Self::File(s.into())),
        }
    }
}

impl SpecArg {
    pub fn load(&self) -> Result<EmbeddingSpec> {
        match self {
            Self::Sink(m) => Ok(sink_embedding_spec(*m)?),
            Self::File(path) => Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?),
        }
    }

    /// Function solved by the embedded protocol, when known.
    fn function(&self) -> Option<FunctionRef> {
        match self {
            Self::Sink(m) => Some(FunctionRef::Eq(m - 1)),
            Self::File(_) => None,
        }
    }
}

/// Embeds `p` along `spec` with coordinates drawn from `mu1` and returns the
/// protocol file of the result.
pub fn embed(p: &LoadedProtocol, spec: &SpecArg, mu1: &InputDistribution) -> Result<String> {
    let s = spec.load()?;
    match p {
        LoadedProtocol::Classical(c, _) => {
            let e = classical_embed(c, &s, mu1)?;
            Ok(ClassicalProtocolFile::from_protocol(&e, spec.function())?.to_json()?)
        }
        LoadedProtocol::Quantum(q, _) => {
            let e = quantum_embed_averaged(q, &s, mu1)?;
            Ok(QuantumProtocolFile::from_protocol(&e, spec.function()).to_json()?)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use qicost::functions::sink_xor;
    use qicost::quantum::alice_sends_input;

    fn quantum_file() -> String {
        let p = alice_sends_input(&sink_xor(3).unwrap()).unwrap();
        QuantumProtocolFile::from_protocol(&p, Some(FunctionRef::SinkXor(3)))
            .to_json()
            .unwrap()
    }

    #[test]
    fn arguments_parse() {
        assert_eq!("uniform".parse::<DistArg>().unwrap(), DistArg::Uniform);
        assert_eq!("sink:4".parse::<SpecArg>().unwrap(), SpecArg::Sink(4));
        assert!("sink:x".parse::<SpecArg>().is_err());
    }

    #[test]
    fn measures_a_quantum_file() {
        let p = LoadedProtocol::from_json(&quantum_file()).unwrap();
        let (xs, ys) = p.domain();
        let mu = DistArg::Uniform.load(xs, ys).unwrap();
        assert!((measure(&p, &mu, Quantity::Qic).unwrap() - 3.0).abs() < 1e-9);
        assert_eq!(measure(&p, &mu, Quantity::Err).unwrap(), 0.0);
        assert!(measure(&p, &mu, Quantity::Cc).is_err());
    }

    #[test]
    fn unknown_kind_is_rejected() {
        assert!(LoadedProtocol::from_json(r#"{"kind":"analog"}"#).is_err());
    }
}
