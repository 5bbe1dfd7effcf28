use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ClassicalProtocol, MessageFn, OutputFn, Randomness, Round};
use crate::error::{Error, Result};
use crate::functions::FunctionRef;

fn default_randomness() -> Vec<f64> {
    vec![1.0]
}

/// JSON form of a classical protocol. See the README for the table layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassicalProtocolFile {
    pub kind: String,
    pub x_size: u64,
    pub y_size: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub function: Option<FunctionRef>,
    #[serde(default = "default_randomness")]
    pub public_randomness: Vec<f64>,
    #[serde(default = "default_randomness")]
    pub alice_randomness: Vec<f64>,
    #[serde(default = "default_randomness")]
    pub bob_randomness: Vec<f64>,
    pub rounds: Vec<RoundFile>,
    /// Output bit for each transcript value.
    pub output: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoundFile {
    pub width: usize,
    pub table: Vec<u64>,
}

impl ClassicalProtocolFile {
    pub const KIND: &'static str = "classical";

    pub fn from_protocol(p: &ClassicalProtocol, function: Option<FunctionRef>) -> Result<Self> {
        let m = p.materialize()?;
        let rounds = m
            .rounds()
            .iter()
            .map(|r| match &r.message {
                MessageFn::Table(t) => RoundFile {
                    width: r.width,
                    table: t.clone(),
                },
                MessageFn::Func(_) => unreachable!("materialized"),
            })
            .collect();
        let output = match m.output_fn() {
            OutputFn::Table(t) => t.iter().map(|&b| b as u8).collect(),
            OutputFn::Func(_) => unreachable!("materialized"),
        };
        Ok(Self {
            kind: Self::KIND.into(),
            x_size: m.x_size(),
            y_size: m.y_size(),
            function,
            public_randomness: m.public().probs().to_vec(),
            alice_randomness: m.alice_private().probs().to_vec(),
            bob_randomness: m.bob_private().probs().to_vec(),
            rounds,
            output,
        })
    }

    pub fn to_protocol(&self) -> Result<ClassicalProtocol> {
        if self.kind != Self::KIND {
            return Err(Error::Parse(format!(
                "expected kind `classical`, got `{}`",
                self.kind
            )));
        }
        if let Some(b) = self.output.iter().find(|&&b| b > 1) {
            return Err(Error::Parse(format!("output entry {b} is not a bit")));
        }
        ClassicalProtocol::new(
            self.x_size,
            self.y_size,
            Randomness::new(self.public_randomness.clone())?,
            Randomness::new(self.alice_randomness.clone())?,
            Randomness::new(self.bob_randomness.clone())?,
            self.rounds
                .iter()
                .map(|r| Round {
                    width: r.width,
                    message: MessageFn::Table(r.table.clone()),
                })
                .collect(),
            OutputFn::Table(self.output.iter().map(|&b| b == 1).collect()),
        )
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical::{public_hash_eq, worst_case_error};
    use crate::functions::eq;

    #[test]
    fn round_trip_preserves_behaviour() {
        let p = public_hash_eq(1, 2).unwrap();
        let file = ClassicalProtocolFile::from_protocol(&p, Some(FunctionRef::Eq(1))).unwrap();
        let json = file.to_json().unwrap();
        let back = ClassicalProtocolFile::from_json(&json).unwrap();
        assert_eq!(back, file);
        let q = back.to_protocol().unwrap();
        let f = eq(1).unwrap();
        assert_eq!(
            worst_case_error(&p, &f).unwrap(),
            worst_case_error(&q, &f).unwrap()
        );
    }

    #[test]
    fn rejects_malformed_files() {
        let bad_kind = r#"{"kind":"quantum","x_size":2,"y_size":2,"rounds":[],"output":[1]}"#;
        assert!(ClassicalProtocolFile::from_json(bad_kind)
            .unwrap()
            .to_protocol()
            .is_err());
        let bad_bit = r#"{"kind":"classical","x_size":2,"y_size":2,"rounds":[],"output":[2]}"#;
        assert!(ClassicalProtocolFile::from_json(bad_bit)
            .unwrap()
            .to_protocol()
            .is_err());
        let minimal = r#"{"kind":"classical","x_size":2,"y_size":2,"rounds":[{"width":1,"table":[0,1]}],"output":[0,1]}"#;
        let p = ClassicalProtocolFile::from_json(minimal)
            .unwrap()
            .to_protocol()
            .unwrap();
        assert_eq!(p.transcript(1, 0, 0, 0, 0).unwrap(), 1);
    }
}
