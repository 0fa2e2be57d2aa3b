//! Pauli operators in binary symplectic form.
//!
//! An operator is `i^phase * P_0 ⊗ ... ⊗ P_{n-1}` where each factor is
//! encoded by an (x, z) bit pair and (1, 1) stands for the Hermitian `Y`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli1 {
    I,
    X,
    Y,
    Z,
}

impl Pauli1 {
    pub const ALL: [Pauli1; 4] = [Pauli1::I, Pauli1::X, Pauli1::Y, Pauli1::Z];

    pub fn bits(self) -> (bool, bool) {
        match self {
            Pauli1::I => (false, false),
            Pauli1::X => (true, false),
            Pauli1::Y => (true, true),
            Pauli1::Z => (false, true),
        }
    }

    pub fn from_bits(x: bool, z: bool) -> Pauli1 {
        match (x, z) {
            (false, false) => Pauli1::I,
            (true, false) => Pauli1::X,
            (true, true) => Pauli1::Y,
            (false, true) => Pauli1::Z,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Pauli1::I => 'I',
            Pauli1::X => 'X',
            Pauli1::Y => 'Y',
            Pauli1::Z => 'Z',
        }
    }
}

/// Exponent `g` with `σ(x1,z1) σ(x2,z2) = i^g σ(x1^x2, z1^z2)`.
pub(crate) fn phase_exponent(x1: bool, z1: bool, x2: bool, z2: bool) -> i32 {
    let (x2i, z2i) = (x2 as i32, z2 as i32);
    match (x1, z1) {
        (false, false) => 0,
        (true, true) => z2i - x2i,
        (true, false) => z2i * (2 * x2i - 1),
        (false, true) => x2i * (1 - 2 * z2i),
    }
}

pub(crate) fn words_for(n: usize) -> usize {
    n.div_ceil(64)
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PauliOperator {
    n: usize,
    x: Vec<u64>,
    z: Vec<u64>,
    phase: u8,
}

impl PauliOperator {
    pub fn identity(n: usize) -> Self {
        let w = words_for(n);
        PauliOperator {
            n,
            x: vec![0; w],
            z: vec![0; w],
            phase: 0,
        }
    }

    pub fn single(n: usize, qubit: usize, p: Pauli1) -> Result<Self> {
        let mut op = Self::identity(n);
        op.set(qubit, p)?;
        Ok(op)
    }

    /// Builds an operator acting with `p` on every listed qubit.
    pub fn on(n: usize, qubits: &[usize], p: Pauli1) -> Result<Self> {
        let mut op = Self::identity(n);
        for &q in qubits {
            op.set(q, p)?;
        }
        Ok(op)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Power of `i` in front of the tensor product.
    pub fn phase(&self) -> u8 {
        self.phase
    }

    pub fn negate(&mut self) {
        self.phase = (self.phase + 2) % 4;
    }

    pub fn x(&self, q: usize) -> bool {
        self.x[q / 64] >> (q % 64) & 1 == 1
    }

    pub fn z(&self, q: usize) -> bool {
        self.z[q / 64] >> (q % 64) & 1 == 1
    }

    pub fn get(&self, q: usize) -> Pauli1 {
        Pauli1::from_bits(self.x(q), self.z(q))
    }

    pub fn set(&mut self, q: usize, p: Pauli1) -> Result<()> {
        if q >= self.n {
            return Err(Error::QubitOutOfRange {
                index: q,
                n: self.n,
            });
        }
        let (xb, zb) = p.bits();
        let mask = 1u64 << (q % 64);
        if xb {
            self.x[q / 64] |= mask;
        } else {
            self.x[q / 64] &= !mask;
        }
        if zb {
            self.z[q / 64] |= mask;
        } else {
            self.z[q / 64] &= !mask;
        }
        Ok(())
    }

    pub fn weight(&self) -> usize {
        self.x
            .iter()
            .zip(&self.z)
            .map(|(a, b)| (a | b).count_ones() as usize)
            .sum()
    }

    pub fn is_identity(&self) -> bool {
        self.weight() == 0 && self.phase == 0
    }

    /// Qubits carrying an X or Y factor.
    pub fn x_support(&self) -> Vec<usize> {
        (0..self.n).filter(|&q| self.x(q)).collect()
    }

    pub fn commutes_with(&self, other: &PauliOperator) -> bool {
        let mut parity = 0u32;
        for w in 0..self.x.len() {
            parity ^= ((self.x[w] & other.z[w]) ^ (self.z[w] & other.x[w])).count_ones() & 1;
        }
        parity == 0
    }

    /// Operator product `self * other`.
    pub fn mul(&self, other: &PauliOperator) -> Result<PauliOperator> {
        if self.n != other.n {
            return Err(Error::SizeMismatch {
                expected: self.n,
                got: other.n,
            });
        }
        let mut g = self.phase as i32 + other.phase as i32;
        for q in 0..self.n {
            g += phase_exponent(self.x(q), self.z(q), other.x(q), other.z(q));
        }
        let x = self.x.iter().zip(&other.x).map(|(a, b)| a ^ b).collect();
        let z = self.z.iter().zip(&other.z).map(|(a, b)| a ^ b).collect();
        Ok(PauliOperator {
            n: self.n,
            x,
            z,
            phase: g.rem_euclid(4) as u8,
        })
    }

    pub(crate) fn x_words(&self) -> &[u64] {
        &self.x
    }

    pub(crate) fn z_words(&self) -> &[u64] {
        &self.z
    }
}

impl fmt::Display for PauliOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = match self.phase {
            0 => "+",
            1 => "+i",
            2 => "-",
            _ => "-i",
        };
        write!(f, "{sign}")?;
        for q in 0..self.n {
            write!(f, "{}", self.get(q).symbol())?;
        }
        Ok(())
    }
}

impl FromStr for PauliOperator {
    type Err = Error;

    /// Parses strings such as `XIZ`, `-ZZ` or `+iY`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (phase, body) = if let Some(rest) = s.strip_prefix("+i") {
            (1, rest)
        } else if let Some(rest) = s.strip_prefix("-i") {
            (3, rest)
        } else if let Some(rest) = s.strip_prefix('-') {
            (2, rest)
        } else if let Some(rest) = s.strip_prefix('+') {
            (0, rest)
        } else {
            (0, s)
        };
        let n = body.chars().count();
        if n == 0 {
            return Err(Error::NoQubits);
        }
        let mut op = PauliOperator::identity(n);
        for (q, c) in body.chars().enumerate() {
            let p = match c {
                'I' | '_' => Pauli1::I,
                'X' => Pauli1::X,
                'Y' => Pauli1::Y,
                'Z' => Pauli1::Z,
                other => return Err(Error::Invalid(format!("bad Pauli symbol `{other}`"))),
            };
            op.set(q, p)?;
        }
        op.phase = phase;
        Ok(op)
    }
}
