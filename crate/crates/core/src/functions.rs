//! Boolean functions on two-party inputs: Sink, its XOR lift, and Equality.
//!
//! Bit strings are packed into `u64` with coordinate 0 in the most significant
//! position of the given width. Vertices are numbered `1..=m`. Edge `(i, j)`,
//! `i < j`, is oriented `v_i → v_j` iff its coordinate is 1; coordinates are
//! ordered lexicographically by `(i, j)`.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Coordinate of bit `j` in a `width`-bit packed string.
#[inline]
pub fn bit(w: u64, width: usize, j: usize) -> u64 {
    (w >> (width - 1 - j)) & 1
}

/// Number of vertex pairs, `C(m, 2)`.
pub fn num_edges(m: usize) -> usize {
    m * (m - 1) / 2
}

/// Lexicographic positions of the edges of the complete graph on `m` vertices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeIndexing {
    m: usize,
}

impl EdgeIndexing {
    pub fn new(m: usize) -> Result<Self> {
        if m < 3 {
            return Err(Error::OutOfRange(format!("m = {m}, need at least 3")));
        }
        if num_edges(m) > 64 {
            return Err(Error::OutOfRange(format!(
                "m = {m} needs more than 64 edges"
            )));
        }
        Ok(Self { m })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn len(&self) -> usize {
        num_edges(self.m)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Position of edge `{i, j}` (either order).
    pub fn index(&self, i: usize, j: usize) -> Result<usize> {
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        if a == b || a < 1 || b > self.m {
            return Err(Error::OutOfRange(format!(
                "edge ({i}, {j}) with m = {}",
                self.m
            )));
        }
        // Edges (a', *) with a' < a come first.
        let before: usize = (1..a).map(|r| self.m - r).sum();
        Ok(before + (b - a - 1))
    }

    pub fn edge(&self, pos: usize) -> Result<(usize, usize)> {
        let mut p = pos;
        for a in 1..self.m {
            let row = self.m - a;
            if p < row {
                return Ok((a, a + 1 + p));
            }
            p -= row;
        }
        Err(Error::OutOfRange(format!(
            "edge position {pos} with m = {}",
            self.m
        )))
    }

    /// Positions of `E_{v_i}` in increasing (lexicographic) order.
    pub fn incident(&self, i: usize) -> Result<Vec<usize>> {
        self.check_vertex(i)?;
        let mut out: Vec<usize> = (1..=self.m)
            .filter(|&j| j != i)
            .map(|j| self.index(i, j))
            .collect::<Result<_>>()?;
        out.sort_unstable();
        Ok(out)
    }

    fn check_vertex(&self, i: usize) -> Result<()> {
        if i < 1 || i > self.m {
            return Err(Error::OutOfRange(format!("vertex {i} with m = {}", self.m)));
        }
        Ok(())
    }
}

/// The pattern on `E_{v_i}` that makes `v_i` a sink.
pub fn z_string(m: usize, i: usize) -> Result<u64> {
    let e = EdgeIndexing::new(m)?;
    e.check_vertex(i)?;
    // Edges to lower vertices come first in E_{v_i} and must point into v_i (bit 1);
    // edges to higher vertices must also point into v_i (bit 0).
    let lower = i - 1;
    let higher = m - i;
    Ok(((1u64 << lower) - 1) << higher)
}

/// `w` restricted to `E_{v_i}`, packed in lexicographic edge order.
pub fn project(m: usize, w: u64, i: usize) -> Result<u64> {
    let e = EdgeIndexing::new(m)?;
    let n = e.len();
    check_width(w, n)?;
    Ok(e.incident(i)?
        .iter()
        .fold(0u64, |acc, &p| (acc << 1) | bit(w, n, p)))
}

fn check_width(w: u64, n: usize) -> Result<()> {
    if n < 64 && w >> n != 0 {
        return Err(Error::OutOfRange(format!("{w:#b} is wider than {n} bits")));
    }
    Ok(())
}

/// 1 iff the tournament `w` on `m` vertices has a sink.
pub fn sink(m: usize, w: u64) -> Result<bool> {
    Ok(sink_vertex(m, w)?.is_some())
}

/// The unique sink of `w`, if any.
pub fn sink_vertex(m: usize, w: u64) -> Result<Option<usize>> {
    for i in 1..=m {
        if project(m, w, i)? == z_string(m, i)? {
            return Ok(Some(i));
        }
    }
    Ok(None)
}

/// `⋁_i Eq(x_{v_i}, y_{v_i} ⊕ z_{v_i})`.
pub fn sink_xor_by_equalities(m: usize, x: u64, y: u64) -> Result<bool> {
    for i in 1..=m {
        if project(m, x, i)? == project(m, y, i)? ^ z_string(m, i)? {
            return Ok(true);
        }
    }
    Ok(false)
}

/// A total Boolean function on `x_bits + y_bits` input bits.
#[derive(Clone)]
pub struct BooleanFunction {
    name: String,
    x_bits: usize,
    y_bits: usize,
    eval: Arc<dyn Fn(u64, u64) -> bool + Send + Sync>,
}

impl fmt::Debug for BooleanFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BooleanFunction")
            .field("name", &self.name)
            .field("x_bits", &self.x_bits)
            .field("y_bits", &self.y_bits)
            .finish()
    }
}

impl BooleanFunction {
    pub fn new<F>(name: impl Into<String>, x_bits: usize, y_bits: usize, eval: F) -> Self
    where
        F: Fn(u64, u64) -> bool + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            x_bits,
            y_bits,
            eval: Arc::new(eval),
        }
    }

    /// Function given by its truth table, indexed `x * 2^y_bits + y`.
    pub fn from_table(
        name: impl Into<String>,
        x_bits: usize,
        y_bits: usize,
        table: Vec<bool>,
    ) -> Result<Self> {
        if table.len() != 1 << (x_bits + y_bits) {
            return Err(Error::DimensionMismatch {
                expected: 1 << (x_bits + y_bits),
                got: table.len(),
            });
        }
        Ok(Self::new(name, x_bits, y_bits, move |x, y| {
            table[((x << y_bits) | y) as usize]
        }))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn x_bits(&self) -> usize {
        self.x_bits
    }

    pub fn y_bits(&self) -> usize {
        self.y_bits
    }

    pub fn x_size(&self) -> u64 {
        1 << self.x_bits
    }

    pub fn y_size(&self) -> u64 {
        1 << self.y_bits
    }

    pub fn evaluate(&self, x: u64, y: u64) -> Result<bool> {
        if x >= self.x_size() || y >= self.y_size() {
            return Err(Error::OutOfRange(format!(
                "({x}, {y}) for {} on {}+{} bits",
                self.name, self.x_bits, self.y_bits
            )));
        }
        Ok((self.eval)(x, y))
    }

    /// Truth matrix, rows indexed by `x`. Debug view for small inputs.
    pub fn matrix(&self) -> Result<Vec<Vec<bool>>> {
        if self.x_bits + self.y_bits > 12 {
            return Err(Error::CapExceeded(format!("{} truth matrix", self.name)));
        }
        (0..self.x_size())
            .map(|x| (0..self.y_size()).map(|y| self.evaluate(x, y)).collect())
            .collect()
    }

    pub fn is_constant(&self) -> bool {
        let first = (self.eval)(0, 0);
        (0..self.x_size()).all(|x| (0..self.y_size()).all(|y| (self.eval)(x, y) == first))
    }
}

/// `Sink(x ⊕ y)` on `C(m, 2) + C(m, 2)` bits.
pub fn sink_xor(m: usize) -> Result<BooleanFunction> {
    EdgeIndexing::new(m)?;
    let n = num_edges(m);
    Ok(BooleanFunction::new(
        format!("sink_xor:{m}"),
        n,
        n,
        move |x, y| sink(m, x ^ y).expect("inputs are range-checked"),
    ))
}

/// Equality on `k + k` bits.
pub fn eq(k: usize) -> Result<BooleanFunction> {
    if k == 0 || k > 32 {
        return Err(Error::OutOfRange(format!("eq:{k}")));
    }
    Ok(BooleanFunction::new(format!("eq:{k}"), k, k, |x, y| x == y))
}

/// Named reference to a function in the built-in family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum FunctionRef {
    SinkXor(usize),
    Eq(usize),
}

impl FunctionRef {
    pub fn build(&self) -> Result<BooleanFunction> {
        match *self {
            FunctionRef::SinkXor(m) => sink_xor(m),
            FunctionRef::Eq(k) => eq(k),
        }
    }

    pub fn x_bits(&self) -> usize {
        match *self {
            FunctionRef::SinkXor(m) => num_edges(m),
            FunctionRef::Eq(k) => k,
        }
    }

    pub fn y_bits(&self) -> usize {
        self.x_bits()
    }

    /// Value on packed inputs, without range checks beyond the width.
    pub fn eval(&self, x: u64, y: u64) -> bool {
        match *self {
            FunctionRef::SinkXor(m) => sink(m, x ^ y).unwrap_or(false),
            FunctionRef::Eq(_) => x == y,
        }
    }
}

impl fmt::Display for FunctionRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FunctionRef::SinkXor(m) => write!(f, "sink_xor:{m}"),
            FunctionRef::Eq(k) => write!(f, "eq:{k}"),
        }
    }
}

impl FromStr for FunctionRef {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, arg) = s
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("function `{s}`, expected name:param")))?;
        let n: usize = arg
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("function parameter `{arg}`")))?;
        let r = match name.trim() {
            "sink_xor" => FunctionRef::SinkXor(n),
            "eq" => FunctionRef::Eq(n),
            other => return Err(Error::Parse(format!("unknown function `{other}`"))),
        };
        r.build()?;
        Ok(r)
    }
}

impl TryFrom<String> for FunctionRef {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<FunctionRef> for String {
    fn from(r: FunctionRef) -> String {
        r.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edge_positions_are_lexicographic() {
        let e = EdgeIndexing::new(4).unwrap();
        let order: Vec<(usize, usize)> = (0..6).map(|p| e.edge(p).unwrap()).collect();
        assert_eq!(order, vec![(1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)]);
        for (p, &(i, j)) in order.iter().enumerate() {
            assert_eq!(e.index(i, j).unwrap(), p);
            assert_eq!(e.index(j, i).unwrap(), p);
        }
        assert_eq!(e.incident(3).unwrap(), vec![1, 3, 5]);
    }

    #[test]
    fn z_strings_for_three_vertices() {
        assert_eq!(z_string(3, 1).unwrap(), 0b00);
        assert_eq!(z_string(3, 2).unwrap(), 0b10);
        assert_eq!(z_string(3, 3).unwrap(), 0b11);
        assert!(z_string(3, 4).is_err());
    }

    #[test]
    fn projections_for_three_vertices() {
        // w = (a, b, c) = (1, 0, 1)
        let w = 0b101;
        assert_eq!(project(3, w, 1).unwrap(), 0b10);
        assert_eq!(project(3, w, 2).unwrap(), 0b11);
        assert_eq!(project(3, w, 3).unwrap(), 0b01);
    }

    #[test]
    fn sink_examples() {
        assert!(!sink(3, 0b101).unwrap());
        assert_eq!(sink_vertex(3, 0b111).unwrap(), Some(3));
        assert_eq!((0..8).filter(|&w| sink(3, w).unwrap()).count(), 6);
        assert!(sink(3, 0b1000).is_err());
    }

    #[test]
    fn sink_count_matches_formula() {
        for m in 3..=5 {
            let n = num_edges(m);
            let count = (0..1u64 << n).filter(|&w| sink(m, w).unwrap()).count();
            assert_eq!(count, m << (n - (m - 1)));
        }
    }

    #[test]
    fn equal_inputs_have_sink_v1() {
        let f = sink_xor(4).unwrap();
        for x in 0..64 {
            assert!(f.evaluate(x, x).unwrap());
        }
    }

    #[test]
    fn eq_examples() {
        let f = eq(2).unwrap();
        assert!(f.evaluate(0b01, 0b01).unwrap());
        assert!(!f.evaluate(0b01, 0b10).unwrap());
    }

    #[test]
    fn function_refs_round_trip() {
        let r: FunctionRef = "sink_xor:3".parse().unwrap();
        assert_eq!(r, FunctionRef::SinkXor(3));
        assert_eq!(r.to_string(), "sink_xor:3");
        assert!("sink_xor:2".parse::<FunctionRef>().is_err());
        assert!("parity:3".parse::<FunctionRef>().is_err());
        let json = serde_json::to_string(&FunctionRef::Eq(2)).unwrap();
        assert_eq!(json, "\"eq:2\"");
    }
}
