use std::collections::HashMap;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::ops::{Block, Effect, Measurement, Op, QubitRef};
use super::{InitialAmplitudes, InitialState, QuantumProtocol, QuantumRound};
use crate::error::{Error, Result};
use crate::functions::FunctionRef;
use crate::qkernel::{CMatrix, Register};

/// Row-major complex matrix, entries as `[re, im]`.
pub type MatrixFile = Vec<Vec<[f64; 2]>>;

fn matrix_from_file(rows: &MatrixFile) -> Result<CMatrix> {
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(Error::Parse("matrix must be square".into()));
    }
    Ok(CMatrix::from_fn(n, n, |i, j| {
        Complex64::new(rows[i][j][0], rows[i][j][1])
    }))
}

fn matrix_to_file(m: &CMatrix) -> MatrixFile {
    (0..m.nrows())
        .map(|i| {
            (0..m.ncols())
                .map(|j| [m[(i, j)].re, m[(i, j)].im])
                .collect()
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BlockFile {
    Identity,
    Permutation { perm: Vec<u32> },
    Dense { matrix: MatrixFile },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EffectFile {
    Diagonal { values: Vec<f64> },
    Dense { matrix: MatrixFile },
}

/// One operation. Register lists accept whole registers (`"A"`) or single qubits (`"A[1]"`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "gate", rename_all = "snake_case", deny_unknown_fields)]
pub enum OpFile {
    H {
        target: QubitRef,
    },
    X {
        target: QubitRef,
    },
    Z {
        target: QubitRef,
    },
    Cnot {
        control: QubitRef,
        target: QubitRef,
    },
    Unitary {
        targets: Vec<String>,
        matrix: MatrixFile,
    },
    /// One block per control value.
    Controlled {
        controls: Vec<String>,
        targets: Vec<String>,
        blocks: Vec<MatrixFile>,
    },
    /// `target ⊕= f(value of x, value of y)`.
    Compute {
        function: FunctionRef,
        x: Vec<String>,
        y: Vec<String>,
        target: QubitRef,
    },
    Multiplexed {
        controls: Vec<QubitRef>,
        targets: Vec<QubitRef>,
        table: Vec<u32>,
        blocks: Vec<BlockFile>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MeasurementFile {
    /// Accept iff the value of `qubits` is listed.
    Projector {
        qubits: Vec<String>,
        accept: Vec<u64>,
    },
    /// Accept iff `f(value of x, value of y) = 1`.
    Compute {
        function: FunctionRef,
        x: Vec<String>,
        y: Vec<String>,
    },
    /// One effect per control value.
    Dense {
        controls: Vec<String>,
        targets: Vec<String>,
        effects: Vec<MatrixFile>,
    },
    Multiplexed {
        controls: Vec<QubitRef>,
        targets: Vec<QubitRef>,
        table: Vec<u32>,
        effects: Vec<EffectFile>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AmplitudesFile {
    pub registers: Vec<String>,
    pub values: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitudes: Option<AmplitudesFile>,
    #[serde(default)]
    pub ops: Vec<OpFile>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoundSpecFile {
    #[serde(default)]
    pub ops: Vec<OpFile>,
    pub message: Vec<String>,
}

/// JSON form of a quantum protocol. See the README for the gate list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuantumProtocolFile {
    pub kind: String,
    pub x_bits: usize,
    pub y_bits: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub function: Option<FunctionRef>,
    #[serde(default)]
    pub alice_registers: Vec<Register>,
    #[serde(default)]
    pub bob_registers: Vec<Register>,
    #[serde(default)]
    pub initial: InitialFile,
    pub rounds: Vec<RoundSpecFile>,
    pub measurement: MeasurementFile,
}

struct Expander {
    widths: HashMap<String, usize>,
}

impl Expander {
    fn qubits(&self, items: &[String]) -> Result<Vec<QubitRef>> {
        let mut out = Vec::new();
        for s in items {
            if s.contains('[') {
                out.push(s.parse()?);
            } else {
                let w = *self
                    .widths
                    .get(s.trim())
                    .ok_or_else(|| Error::UnknownLabel(s.clone()))?;
                out.extend(super::qubits(s.trim(), w));
            }
        }
        Ok(out)
    }

    fn op(&self, f: &OpFile) -> Result<Op> {
        Ok(match f {
            OpFile::H { target } => Op::h(target.clone()),
            OpFile::X { target } => Op::x(target.clone()),
            OpFile::Z { target } => Op::z(target.clone()),
            OpFile::Cnot { control, target } => Op::cnot(control.clone(), target.clone())?,
            OpFile::Unitary { targets, matrix } => {
                Op::unitary(self.qubits(targets)?, matrix_from_file(matrix)?)?
            }
            OpFile::Controlled {
                controls,
                targets,
                blocks,
            } => Op::controlled(
                self.qubits(controls)?,
                self.qubits(targets)?,
                blocks
                    .iter()
                    .map(|b| Ok(Block::Dense(matrix_from_file(b)?)))
                    .collect::<Result<_>>()?,
            )?,
            OpFile::Compute {
                function,
                x,
                y,
                target,
            } => {
                let (xq, yq) = self.function_args(function, x, y)?;
                let l = yq.len();
                let f = *function;
                let mut controls = xq;
                controls.extend(yq);
                Op::compute(controls, target.clone(), move |v| {
                    f.eval(v >> l, v & ((1 << l) - 1))
                })?
            }
            OpFile::Multiplexed {
                controls,
                targets,
                table,
                blocks,
            } => Op::new(
                controls.clone(),
                targets.clone(),
                table.clone(),
                blocks
                    .iter()
                    .map(|b| {
                        Ok(match b {
                            BlockFile::Identity => Block::Identity,
                            BlockFile::Permutation { perm } => Block::Permutation(perm.clone()),
                            BlockFile::Dense { matrix } => Block::Dense(matrix_from_file(matrix)?),
                        })
                    })
                    .collect::<Result<_>>()?,
            )?,
        })
    }

    fn function_args(
        &self,
        f: &FunctionRef,
        x: &[String],
        y: &[String],
    ) -> Result<(Vec<QubitRef>, Vec<QubitRef>)> {
        let xq = self.qubits(x)?;
        let yq = self.qubits(y)?;
        if xq.len() != f.x_bits() || yq.len() != f.y_bits() {
            return Err(Error::DimensionMismatch {
                expected: f.x_bits() + f.y_bits(),
                got: xq.len() + yq.len(),
            });
        }
        Ok((xq, yq))
    }

    fn measurement(&self, f: &MeasurementFile) -> Result<Measurement> {
        match f {
            MeasurementFile::Projector { qubits, accept } => {
                let accept = accept.clone();
                Measurement::projective(self.qubits(qubits)?, move |v| accept.contains(&v))
            }
            MeasurementFile::Compute { function, x, y } => {
                let (xq, yq) = self.function_args(function, x, y)?;
                let l = yq.len();
                let f = *function;
                let mut controls = xq;
                controls.extend(yq);
                Measurement::projective(controls, move |v| f.eval(v >> l, v & ((1 << l) - 1)))
            }
            MeasurementFile::Dense {
                controls,
                targets,
                effects,
            } => {
                let effects: Vec<Effect> = effects
                    .iter()
                    .map(|m| Ok(Effect::Dense(matrix_from_file(m)?)))
                    .collect::<Result<_>>()?;
                let table = (0..effects.len() as u32).collect();
                Measurement::new(
                    self.qubits(controls)?,
                    self.qubits(targets)?,
                    table,
                    effects,
                )
            }
            MeasurementFile::Multiplexed {
                controls,
                targets,
                table,
                effects,
            } => Measurement::new(
                controls.clone(),
                targets.clone(),
                table.clone(),
                effects
                    .iter()
                    .map(|e| {
                        Ok(match e {
                            EffectFile::Diagonal { values } => Effect::Diagonal(values.clone()),
                            EffectFile::Dense { matrix } => {
                                Effect::Dense(matrix_from_file(matrix)?)
                            }
                        })
                    })
                    .collect::<Result<_>>()?,
            ),
        }
    }
}

fn op_to_file(op: &Op) -> OpFile {
    OpFile::Multiplexed {
        controls: op.controls().to_vec(),
        targets: op.targets().to_vec(),
        table: op.table().to_vec(),
        blocks: op
            .blocks()
            .iter()
            .map(|b| match b {
                Block::Identity => BlockFile::Identity,
                Block::Permutation(p) => BlockFile::Permutation { perm: p.clone() },
                Block::Dense(m) => BlockFile::Dense {
                    matrix: matrix_to_file(m),
                },
            })
            .collect(),
    }
}

impl QuantumProtocolFile {
    pub const KIND: &'static str = "quantum";

    /// Lossless export; every operation is written in multiplexed form.
    pub fn from_protocol(p: &QuantumProtocol, function: Option<FunctionRef>) -> Self {
        let m = p.measurement();
        Self {
            kind: Self::KIND.into(),
            x_bits: p.x_bits(),
            y_bits: p.y_bits(),
            function,
            alice_registers: p.alice_registers().to_vec(),
            bob_registers: p.bob_registers().to_vec(),
            initial: InitialFile {
                amplitudes: p.initial().amplitudes.as_ref().map(|a| AmplitudesFile {
                    registers: a.registers.clone(),
                    values: a.values.iter().map(|c| [c.re, c.im]).collect(),
                }),
                ops: p.initial().ops.iter().map(op_to_file).collect(),
            },
            rounds: p
                .rounds()
                .iter()
                .map(|r| RoundSpecFile {
                    ops: r.ops.iter().map(op_to_file).collect(),
                    message: r.message.clone(),
                })
                .collect(),
            measurement: MeasurementFile::Multiplexed {
                controls: m.controls().to_vec(),
                targets: m.targets().to_vec(),
                table: m.table().to_vec(),
                effects: m
                    .effects()
                    .iter()
                    .map(|e| match e {
                        Effect::Diagonal(v) => EffectFile::Diagonal { values: v.clone() },
                        Effect::Dense(m) => EffectFile::Dense {
                            matrix: matrix_to_file(m),
                        },
                    })
                    .collect(),
            },
        }
    }

    pub fn to_protocol(&self) -> Result<QuantumProtocol> {
        if self.kind != Self::KIND {
            return Err(Error::Parse(format!(
                "expected kind `quantum`, got `{}`",
                self.kind
            )));
        }
        let mut widths: HashMap<String, usize> = self
            .alice_registers
            .iter()
            .chain(&self.bob_registers)
            .map(|r| (r.label.clone(), r.width))
            .collect();
        widths.insert("X".into(), self.x_bits);
        widths.insert("Y".into(), self.y_bits);
        let ex = Expander { widths };
        let ops = |v: &[OpFile]| v.iter().map(|o| ex.op(o)).collect::<Result<Vec<_>>>();
        let initial = InitialState {
            amplitudes: self.initial.amplitudes.as_ref().map(|a| InitialAmplitudes {
                registers: a.registers.clone(),
                values: a
                    .values
                    .iter()
                    .map(|v| Complex64::new(v[0], v[1]))
                    .collect(),
            }),
            ops: ops(&self.initial.ops)?,
        };
        let rounds = self
            .rounds
            .iter()
            .map(|r| {
                Ok(QuantumRound {
                    ops: ops(&r.ops)?,
                    message: r.message.clone(),
                })
            })
            .collect::<Result<_>>()?;
        QuantumProtocol::new(
            self.x_bits,
            self.y_bits,
            self.alice_registers.clone(),
            self.bob_registers.clone(),
            initial,
            rounds,
            ex.measurement(&self.measurement)?,
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
    use crate::functions::eq;
    use crate::inputs::InputDistribution;
    use crate::quantum::{
        quantum_costs, quantum_worst_case_error, random_protocol, RandomProtocolConfig,
    };

    const EPR_EQ: &str = r#"{
        "kind": "quantum",
        "x_bits": 1,
        "y_bits": 1,
        "function": "eq:1",
        "alice_registers": [{"label": "A", "width": 1}, {"label": "C1", "width": 1}],
        "bob_registers": [{"label": "B", "width": 1}],
        "initial": {"ops": [{"gate": "h", "target": "A"}, {"gate": "cnot", "control": "A", "target": "B"}]},
        "rounds": [
            {"ops": [{"gate": "cnot", "control": "X", "target": "C1"}], "message": ["C1"]}
        ],
        "measurement": {"kind": "compute", "function": "eq:1", "x": ["C1"], "y": ["Y"]}
    }"#;

    #[test]
    fn parses_gate_list() {
        let f = QuantumProtocolFile::from_json(EPR_EQ).unwrap();
        let p = f.to_protocol().unwrap();
        assert_eq!(p.num_rounds(), 1);
        assert_eq!(quantum_worst_case_error(&p, &eq(1).unwrap()).unwrap(), 0.0);
        let c = quantum_costs(&p, &InputDistribution::uniform(2, 2)).unwrap();
        assert!((c.qic - 1.0).abs() < 1e-9);
    }

    #[test]
    fn export_round_trips() {
        let mut rng = crate::random::rng(5, 1);
        let p = random_protocol(&RandomProtocolConfig::default(), &mut rng).unwrap();
        let json = QuantumProtocolFile::from_protocol(&p, None)
            .to_json()
            .unwrap();
        let q = QuantumProtocolFile::from_json(&json)
            .unwrap()
            .to_protocol()
            .unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn rejects_illegal_access() {
        let bad = EPR_EQ.replace(
            r#""target": "C1"}], "message""#,
            r#""target": "B"}], "message""#,
        );
        let err = QuantumProtocolFile::from_json(&bad).unwrap().to_protocol();
        assert!(matches!(err, Err(Error::InvalidProtocol(_))), "{err:?}");
        let unknown = EPR_EQ.replace("\"rounds\"", "\"extra\": 1, \"rounds\"");
        assert!(QuantumProtocolFile::from_json(&unknown).is_err());
    }
}
