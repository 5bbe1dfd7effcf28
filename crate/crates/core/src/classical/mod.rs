//! Randomized two-party classical protocols, simulated by exhaustive enumeration.
//!
//! Rounds alternate between the parties, Alice first. Round `i` sends a
//! message of fixed width computed from the sender's input, the sender's
//! private randomness, the public randomness and the transcript so far. The
//! transcript is the concatenation of all messages, first message in the most
//! significant bits. The output is a function of the transcript.

mod analysis;
mod format;

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::qkernel::linalg::neumaier_sum;

pub use analysis::{
    acceptance_probability, classical_ic, enumerate_joint, transcript_distribution,
    worst_case_error, TranscriptTable, ENUMERATION_CAP,
};
pub use format::ClassicalProtocolFile;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Party {
    Alice,
    Bob,
}

impl Party {
    /// Sender of round `index` (0-based).
    pub fn of_round(index: usize) -> Party {
        if index.is_multiple_of(2) {
            Party::Alice
        } else {
            Party::Bob
        }
    }

    pub fn other(self) -> Party {
        match self {
            Party::Alice => Party::Bob,
            Party::Bob => Party::Alice,
        }
    }
}

/// Arguments of a message function.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MessageArgs {
    pub input: u64,
    pub private: u64,
    pub public: u64,
    pub prefix: u64,
}

pub type MessageClosure = Arc<dyn Fn(MessageArgs) -> u64 + Send + Sync>;
pub type OutputClosure = Arc<dyn Fn(u64) -> bool + Send + Sync>;

/// Message function of one round.
#[derive(Clone)]
pub enum MessageFn {
    /// Lookup table indexed `((input * private_size + private) * public_size + public) * 2^prefix_bits + prefix`.
    Table(Vec<u64>),
    Func(MessageClosure),
}

impl fmt::Debug for MessageFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MessageFn::Table(t) => write!(f, "Table({} entries)", t.len()),
            MessageFn::Func(_) => write!(f, "Func"),
        }
    }
}

/// Output as a function of the full transcript.
#[derive(Clone)]
pub enum OutputFn {
    /// Indexed by transcript value.
    Table(Vec<bool>),
    Func(OutputClosure),
}

impl fmt::Debug for OutputFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OutputFn::Table(t) => write!(f, "Table({} entries)", t.len()),
            OutputFn::Func(_) => write!(f, "Func"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Round {
    pub width: usize,
    pub message: MessageFn,
}

/// Randomness source: a distribution over `0..probs.len()`.
#[derive(Debug, Clone, PartialEq)]
pub struct Randomness {
    probs: Vec<f64>,
}

impl Randomness {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidDistribution("empty randomness domain".into()));
        }
        if let Some(p) = probs.iter().find(|p| !(**p >= 0.0) || !p.is_finite()) {
            return Err(Error::InvalidDistribution(format!("probability {p}")));
        }
        let total = neumaier_sum(probs.iter().copied());
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidDistribution(format!(
                "randomness sums to {total}"
            )));
        }
        Ok(Self { probs })
    }

    pub fn none() -> Self {
        Self { probs: vec![1.0] }
    }

    pub fn uniform(n: u64) -> Self {
        Self {
            probs: vec![1.0 / n as f64; n as usize],
        }
    }

    pub fn size(&self) -> u64 {
        self.probs.len() as u64
    }

    pub fn prob(&self, v: u64) -> f64 {
        self.probs[v as usize]
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Product of two independent sources, first one most significant.
    pub fn product(&self, other: &Randomness) -> Randomness {
        Randomness {
            probs: self
                .probs
                .iter()
                .flat_map(|a| other.probs.iter().map(move |b| a * b))
                .collect(),
        }
    }
}

/// A randomized protocol over finite input and randomness domains.
#[derive(Debug, Clone)]
pub struct ClassicalProtocol {
    x_size: u64,
    y_size: u64,
    public: Randomness,
    alice_private: Randomness,
    bob_private: Randomness,
    rounds: Vec<Round>,
    output: OutputFn,
}

impl ClassicalProtocol {
    pub fn new(
        x_size: u64,
        y_size: u64,
        public: Randomness,
        alice_private: Randomness,
        bob_private: Randomness,
        rounds: Vec<Round>,
        output: OutputFn,
    ) -> Result<Self> {
        let p = Self {
            x_size,
            y_size,
            public,
            alice_private,
            bob_private,
            rounds,
            output,
        };
        p.validate()?;
        Ok(p)
    }

    fn validate(&self) -> Result<()> {
        if self.x_size == 0 || self.y_size == 0 {
            return Err(Error::InvalidProtocol("empty input domain".into()));
        }
        if self.cc() > 62 {
            return Err(Error::CapExceeded(format!("{}-bit transcript", self.cc())));
        }
        let mut prefix_bits = 0;
        for (i, r) in self.rounds.iter().enumerate() {
            if r.width == 0 {
                return Err(Error::InvalidProtocol(format!(
                    "round {} has width 0",
                    i + 1
                )));
            }
            if let MessageFn::Table(t) = &r.message {
                let expected = self.table_len(i, prefix_bits)?;
                if t.len() != expected {
                    return Err(Error::InvalidProtocol(format!(
                        "round {} table has {} entries, expected {expected}",
                        i + 1,
                        t.len()
                    )));
                }
                if let Some(v) = t.iter().find(|&&v| v >> r.width != 0) {
                    return Err(Error::InvalidProtocol(format!(
                        "round {} message {v} exceeds width {}",
                        i + 1,
                        r.width
                    )));
                }
            }
            prefix_bits += r.width;
        }
        if let OutputFn::Table(t) = &self.output {
            if t.len() != 1 << self.cc() {
                return Err(Error::InvalidProtocol(format!(
                    "output table has {} entries, expected {}",
                    t.len(),
                    1u64 << self.cc()
                )));
            }
        }
        Ok(())
    }

    fn table_len(&self, round: usize, prefix_bits: usize) -> Result<usize> {
        let (own, private) = match Party::of_round(round) {
            Party::Alice => (self.x_size, self.alice_private.size()),
            Party::Bob => (self.y_size, self.bob_private.size()),
        };
        own.checked_mul(private)
            .and_then(|v| v.checked_mul(self.public.size()))
            .and_then(|v| v.checked_mul(1u64 << prefix_bits))
            .filter(|&v| v <= 1 << 26)
            .map(|v| v as usize)
            .ok_or_else(|| Error::CapExceeded(format!("round {} lookup table", round + 1)))
    }

    pub fn x_size(&self) -> u64 {
        self.x_size
    }

    pub fn y_size(&self) -> u64 {
        self.y_size
    }

    pub fn public(&self) -> &Randomness {
        &self.public
    }

    pub fn alice_private(&self) -> &Randomness {
        &self.alice_private
    }

    pub fn bob_private(&self) -> &Randomness {
        &self.bob_private
    }

    pub fn rounds(&self) -> &[Round] {
        &self.rounds
    }

    pub fn output_fn(&self) -> &OutputFn {
        &self.output
    }

    /// Communication cost: total message width in bits.
    pub fn cc(&self) -> usize {
        self.rounds.iter().map(|r| r.width).sum()
    }

    /// Message of round `round` (0-based); `args.prefix` is the transcript so far.
    pub fn message(&self, round: usize, args: MessageArgs) -> Result<u64> {
        let r = self
            .rounds
            .get(round)
            .ok_or_else(|| Error::OutOfRange(format!("round {}", round + 1)))?;
        let msg = match &r.message {
            MessageFn::Table(tab) => {
                let private_size = match Party::of_round(round) {
                    Party::Alice => self.alice_private.size(),
                    Party::Bob => self.bob_private.size(),
                };
                let bits: usize = self.rounds[..round].iter().map(|r| r.width).sum();
                let idx = ((args.input * private_size + args.private) * self.public.size()
                    + args.public)
                    << bits
                    | args.prefix;
                tab[idx as usize]
            }
            MessageFn::Func(f) => f(args),
        };
        if msg >> r.width != 0 {
            return Err(Error::InvalidProtocol(format!(
                "round {} message {msg} exceeds width {}",
                round + 1,
                r.width
            )));
        }
        Ok(msg)
    }

    /// Transcript produced on inputs and randomness values.
    pub fn transcript(&self, x: u64, y: u64, r: u64, ra: u64, rb: u64) -> Result<u64> {
        if x >= self.x_size || y >= self.y_size {
            return Err(Error::OutOfRange(format!("input ({x}, {y})")));
        }
        let mut t = 0u64;
        for (i, round) in self.rounds.iter().enumerate() {
            let (input, private) = match Party::of_round(i) {
                Party::Alice => (x, ra),
                Party::Bob => (y, rb),
            };
            let msg = self.message(
                i,
                MessageArgs {
                    input,
                    private,
                    public: r,
                    prefix: t,
                },
            )?;
            t = (t << round.width) | msg;
        }
        Ok(t)
    }

    pub fn output(&self, transcript: u64) -> bool {
        match &self.output {
            OutputFn::Table(t) => t[transcript as usize],
            OutputFn::Func(f) => f(transcript),
        }
    }

    /// Replaces closures by lookup tables.
    pub fn materialize(&self) -> Result<ClassicalProtocol> {
        let mut rounds = Vec::with_capacity(self.rounds.len());
        let mut prefix_bits = 0;
        for (i, round) in self.rounds.iter().enumerate() {
            let message = match &round.message {
                MessageFn::Table(t) => MessageFn::Table(t.clone()),
                MessageFn::Func(f) => {
                    let len = self.table_len(i, prefix_bits)?;
                    let (private_size, public_size) = (
                        match Party::of_round(i) {
                            Party::Alice => self.alice_private.size(),
                            Party::Bob => self.bob_private.size(),
                        },
                        self.public.size(),
                    );
                    let prefix_size = 1u64 << prefix_bits;
                    let table = (0..len as u64)
                        .map(|idx| {
                            let prefix = idx % prefix_size;
                            let rest = idx / prefix_size;
                            let public = rest % public_size;
                            let rest = rest / public_size;
                            f(MessageArgs {
                                input: rest / private_size,
                                private: rest % private_size,
                                public,
                                prefix,
                            })
                        })
                        .collect();
                    MessageFn::Table(table)
                }
            };
            rounds.push(Round {
                width: round.width,
                message,
            });
            prefix_bits += round.width;
        }
        let output = match &self.output {
            OutputFn::Table(t) => OutputFn::Table(t.clone()),
            OutputFn::Func(f) => {
                if self.cc() > 26 {
                    return Err(Error::CapExceeded("output lookup table".into()));
                }
                OutputFn::Table((0..1u64 << self.cc()).map(|t| f(t)).collect())
            }
        };
        ClassicalProtocol::new(
            self.x_size,
            self.y_size,
            self.public.clone(),
            self.alice_private.clone(),
            self.bob_private.clone(),
            rounds,
            output,
        )
    }
}

/// Protocol that sends nothing and outputs `value`.
pub fn constant_protocol(x_size: u64, y_size: u64, value: bool) -> ClassicalProtocol {
    ClassicalProtocol::new(
        x_size,
        y_size,
        Randomness::none(),
        Randomness::none(),
        Randomness::none(),
        Vec::new(),
        OutputFn::Table(vec![value]),
    )
    .expect("constant protocol is valid")
}

/// Alice sends her `x_bits`-bit input; the output is `out(x)`.
pub fn alice_sends_input<F>(x_bits: usize, y_size: u64, out: F) -> Result<ClassicalProtocol>
where
    F: Fn(u64) -> bool + Send + Sync + 'static,
{
    ClassicalProtocol::new(
        1 << x_bits,
        y_size,
        Randomness::none(),
        Randomness::none(),
        Randomness::none(),
        vec![Round {
            width: x_bits,
            message: MessageFn::Func(Arc::new(|a: MessageArgs| a.input)),
        }],
        OutputFn::Func(Arc::new(out)),
    )
}

/// Both parties send their inputs; the output is `f(x, y)`.
pub fn both_send_inputs<F>(x_bits: usize, y_bits: usize, f: F) -> Result<ClassicalProtocol>
where
    F: Fn(u64, u64) -> bool + Send + Sync + 'static,
{
    let mask = (1u64 << y_bits) - 1;
    ClassicalProtocol::new(
        1 << x_bits,
        1 << y_bits,
        Randomness::none(),
        Randomness::none(),
        Randomness::none(),
        vec![
            Round {
                width: x_bits,
                message: MessageFn::Func(Arc::new(|a: MessageArgs| a.input)),
            },
            Round {
                width: y_bits,
                message: MessageFn::Func(Arc::new(|a: MessageArgs| a.input)),
            },
        ],
        OutputFn::Func(Arc::new(move |t| f(t >> y_bits, t & mask))),
    )
}

/// Public-coin equality test on `k` bits: `reps` rounds pairs, each sending the
/// inner products `⟨r_j, x⟩` and `⟨r_j, y⟩`; accepts iff all pairs agree.
pub fn public_hash_eq(k: usize, reps: usize) -> Result<ClassicalProtocol> {
    if k * reps > 16 {
        return Err(Error::CapExceeded(format!("{reps} hashes on {k} bits")));
    }
    let mut rounds = Vec::new();
    for j in 0..reps {
        let parity = move |a: MessageArgs| {
            let rj = (a.public >> (k * (reps - 1 - j))) & ((1 << k) - 1);
            ((rj & a.input).count_ones() & 1) as u64
        };
        rounds.push(Round {
            width: 1,
            message: MessageFn::Func(Arc::new(parity)),
        });
        rounds.push(Round {
            width: 1,
            message: MessageFn::Func(Arc::new(parity)),
        });
    }
    let n = 2 * reps;
    ClassicalProtocol::new(
        1 << k,
        1 << k,
        Randomness::uniform(1 << (k * reps)),
        Randomness::none(),
        Randomness::none(),
        rounds,
        OutputFn::Func(Arc::new(move |t| {
            (0..reps).all(|j| {
                let pair = (t >> (n - 2 - 2 * j)) & 0b11;
                pair == 0b00 || pair == 0b11
            })
        })),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn transcript_concatenates_messages() {
        let p = both_send_inputs(2, 1, |x, y| x == y).unwrap();
        assert_eq!(p.transcript(0b10, 1, 0, 0, 0).unwrap(), 0b101);
        assert_eq!(p.cc(), 3);
        assert!(!p.output(0b101));
        assert!(p.output(0b011));
    }

    #[test]
    fn materialize_preserves_transcripts() {
        let p = public_hash_eq(2, 2).unwrap();
        let q = p.materialize().unwrap();
        for x in 0..4 {
            for y in 0..4 {
                for r in 0..16 {
                    let t = p.transcript(x, y, r, 0, 0).unwrap();
                    assert_eq!(t, q.transcript(x, y, r, 0, 0).unwrap());
                    assert_eq!(p.output(t), q.output(t));
                }
            }
        }
    }

    #[test]
    fn table_validation() {
        let bad = ClassicalProtocol::new(
            2,
            2,
            Randomness::none(),
            Randomness::none(),
            Randomness::none(),
            vec![Round {
                width: 1,
                message: MessageFn::Table(vec![0, 2]),
            }],
            OutputFn::Table(vec![false, true]),
        );
        assert!(bad.is_err());
        let short = ClassicalProtocol::new(
            2,
            2,
            Randomness::none(),
            Randomness::none(),
            Randomness::none(),
            vec![Round {
                width: 1,
                message: MessageFn::Table(vec![0]),
            }],
            OutputFn::Table(vec![false, true]),
        );
        assert!(short.is_err());
    }

    #[test]
    fn randomness_must_normalize() {
        assert!(Randomness::new(vec![0.5, 0.6]).is_err());
        assert_eq!(
            Randomness::uniform(3)
                .product(&Randomness::uniform(2))
                .size(),
            6
        );
    }
}
