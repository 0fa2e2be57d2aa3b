//! Stabilizer states as Aaronson–Gottesman tableaux with destabilizers.
//!
//! Rows `0..n` are destabilizers, rows `n..2n` stabilizers and row `2n` is
//! scratch space for deterministic measurements.

use crate::error::{Error, Result};
use crate::pauli::{phase_exponent, words_for, Pauli1, PauliOperator};

/// Source of fair coins for non-deterministic measurements.
pub trait CoinSource {
    fn flip(&mut self) -> bool;
}

impl<R: rand::RngCore> CoinSource for R {
    fn flip(&mut self) -> bool {
        self.next_u32() & 1 == 1
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Basis {
    Z,
    X,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StabilizerState {
    n: usize,
    words: usize,
    x: Vec<u64>,
    z: Vec<u64>,
    r: Vec<bool>,
}

impl StabilizerState {
    /// The all-zero computational basis state.
    pub fn new_zero_state(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::NoQubits);
        }
        let words = words_for(n);
        let rows = 2 * n + 1;
        let mut s = StabilizerState {
            n,
            words,
            x: vec![0; rows * words],
            z: vec![0; rows * words],
            r: vec![false; rows],
        };
        for q in 0..n {
            s.set_x(q, q, true);
            s.set_z(n + q, q, true);
        }
        Ok(s)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    fn xb(&self, row: usize, q: usize) -> bool {
        self.x[row * self.words + q / 64] >> (q % 64) & 1 == 1
    }

    #[inline]
    fn zb(&self, row: usize, q: usize) -> bool {
        self.z[row * self.words + q / 64] >> (q % 64) & 1 == 1
    }

    #[inline]
    fn set_x(&mut self, row: usize, q: usize, v: bool) {
        let i = row * self.words + q / 64;
        let m = 1u64 << (q % 64);
        if v {
            self.x[i] |= m
        } else {
            self.x[i] &= !m
        }
    }

    #[inline]
    fn set_z(&mut self, row: usize, q: usize, v: bool) {
        let i = row * self.words + q / 64;
        let m = 1u64 << (q % 64);
        if v {
            self.z[i] |= m
        } else {
            self.z[i] &= !m
        }
    }

    fn check(&self, q: usize) -> Result<()> {
        if q >= self.n {
            Err(Error::QubitOutOfRange {
                index: q,
                n: self.n,
            })
        } else {
            Ok(())
        }
    }

    pub fn h(&mut self, a: usize) -> Result<()> {
        self.check(a)?;
        for i in 0..2 * self.n {
            let (xa, za) = (self.xb(i, a), self.zb(i, a));
            self.r[i] ^= xa & za;
            self.set_x(i, a, za);
            self.set_z(i, a, xa);
        }
        Ok(())
    }

    pub fn s(&mut self, a: usize) -> Result<()> {
        self.check(a)?;
        for i in 0..2 * self.n {
            let (xa, za) = (self.xb(i, a), self.zb(i, a));
            self.r[i] ^= xa & za;
            self.set_z(i, a, za ^ xa);
        }
        Ok(())
    }

    pub fn cnot(&mut self, c: usize, t: usize) -> Result<()> {
        self.check(c)?;
        self.check(t)?;
        if c == t {
            return Err(Error::RepeatedTarget(c));
        }
        for i in 0..2 * self.n {
            let (xc, zc, xt, zt) = (self.xb(i, c), self.zb(i, c), self.xb(i, t), self.zb(i, t));
            self.r[i] ^= xc & zt & !(xt ^ zc);
            self.set_x(i, t, xt ^ xc);
            self.set_z(i, c, zc ^ zt);
        }
        Ok(())
    }

    /// Applies a single-qubit Pauli gate (sign updates only).
    pub fn pauli1(&mut self, a: usize, p: Pauli1) -> Result<()> {
        self.check(a)?;
        let (px, pz) = p.bits();
        for i in 0..2 * self.n {
            // anticommutes iff x_i·pz + z_i·px is odd
            let anti = (self.xb(i, a) & pz) ^ (self.zb(i, a) & px);
            self.r[i] ^= anti;
        }
        Ok(())
    }

    /// Conjugates the state by a Pauli operator: signs of anticommuting rows flip.
    pub fn apply_pauli(&mut self, p: &PauliOperator) -> Result<()> {
        if p.n() != self.n {
            return Err(Error::SizeMismatch {
                expected: self.n,
                got: p.n(),
            });
        }
        let (px, pz) = (p.x_words(), p.z_words());
        for i in 0..2 * self.n {
            let mut parity = 0u32;
            for w in 0..self.words {
                let xi = self.x[i * self.words + w];
                let zi = self.z[i * self.words + w];
                parity ^= ((xi & pz[w]) ^ (zi & px[w])).count_ones() & 1;
            }
            self.r[i] ^= parity == 1;
        }
        Ok(())
    }

    /// Row `h` becomes row `i` times row `h`.
    fn rowsum(&mut self, h: usize, i: usize) {
        let mut g: i32 = 2 * self.r[h] as i32 + 2 * self.r[i] as i32;
        for q in 0..self.n {
            g += phase_exponent(self.xb(i, q), self.zb(i, q), self.xb(h, q), self.zb(h, q));
        }
        self.r[h] = g.rem_euclid(4) == 2;
        for w in 0..self.words {
            self.x[h * self.words + w] ^= self.x[i * self.words + w];
            self.z[h * self.words + w] ^= self.z[i * self.words + w];
        }
    }

    fn copy_row(&mut self, dst: usize, src: usize) {
        for w in 0..self.words {
            self.x[dst * self.words + w] = self.x[src * self.words + w];
            self.z[dst * self.words + w] = self.z[src * self.words + w];
        }
        self.r[dst] = self.r[src];
    }

    fn clear_row(&mut self, row: usize) {
        for w in 0..self.words {
            self.x[row * self.words + w] = 0;
            self.z[row * self.words + w] = 0;
        }
        self.r[row] = false;
    }

    fn measure_z<C: CoinSource + ?Sized>(&mut self, a: usize, coins: &mut C) -> (bool, bool) {
        let n = self.n;
        if let Some(p) = (n..2 * n).find(|&p| self.xb(p, a)) {
            for i in 0..2 * n {
                if i != p && self.xb(i, a) {
                    self.rowsum(i, p);
                }
            }
            self.copy_row(p - n, p);
            self.clear_row(p);
            let outcome = coins.flip();
            self.r[p] = outcome;
            self.set_z(p, a, true);
            (outcome, false)
        } else {
            let scratch = 2 * n;
            self.clear_row(scratch);
            for i in 0..n {
                if self.xb(i, a) {
                    self.rowsum(scratch, i + n);
                }
            }
            (self.r[scratch], true)
        }
    }

    /// Projective measurement; returns `(outcome, deterministic)` where
    /// outcome `true` means eigenvalue −1.
    pub fn measure<C: CoinSource + ?Sized>(
        &mut self,
        qubit: usize,
        basis: Basis,
        coins: &mut C,
    ) -> Result<(bool, bool)> {
        self.check(qubit)?;
        Ok(match basis {
            Basis::Z => self.measure_z(qubit, coins),
            Basis::X => {
                self.h(qubit)?;
                let res = self.measure_z(qubit, coins);
                self.h(qubit)?;
                res
            }
        })
    }

    /// Resets a qubit to the +1 eigenstate of the basis operator.
    pub fn reset<C: CoinSource + ?Sized>(
        &mut self,
        qubit: usize,
        basis: Basis,
        coins: &mut C,
    ) -> Result<()> {
        let (outcome, _) = self.measure(qubit, Basis::Z, coins)?;
        if outcome {
            self.pauli1(qubit, Pauli1::X)?;
        }
        if basis == Basis::X {
            self.h(qubit)?;
        }
        Ok(())
    }

    /// True iff `p` belongs to the stabilizer group with exactly its sign.
    pub fn is_stabilized_by(&self, p: &PauliOperator) -> bool {
        if p.n() != self.n || p.phase() % 2 == 1 {
            return false;
        }
        if (0..self.n).any(|i| !p.commutes_with(&self.row(self.n + i))) {
            return false;
        }
        let mut acc = self.clone();
        let scratch = 2 * self.n;
        acc.clear_row(scratch);
        for i in 0..self.n {
            if !p.commutes_with(&self.row(i)) {
                acc.rowsum(scratch, i + self.n);
            }
        }
        let prod = acc.row(scratch);
        prod == *p
    }

    /// Row `i` of the tableau as an operator (sign included).
    pub fn row(&self, i: usize) -> PauliOperator {
        let mut op = PauliOperator::identity(self.n);
        for q in 0..self.n {
            op.set(q, Pauli1::from_bits(self.xb(i, q), self.zb(i, q)))
                .expect("index in range");
        }
        if self.r[i] {
            op.negate();
        }
        op
    }

    pub fn stabilizers(&self) -> Vec<PauliOperator> {
        (self.n..2 * self.n).map(|i| self.row(i)).collect()
    }

    pub fn destabilizers(&self) -> Vec<PauliOperator> {
        (0..self.n).map(|i| self.row(i)).collect()
    }

    /// Rank of the stabilizer rows over GF(2) in the symplectic representation.
    pub fn stabilizer_rank(&self) -> usize {
        let mut rows: Vec<Vec<bool>> = (self.n..2 * self.n)
            .map(|i| {
                (0..self.n)
                    .map(|q| self.xb(i, q))
                    .chain((0..self.n).map(|q| self.zb(i, q)))
                    .collect()
            })
            .collect();
        let mut rank = 0;
        for col in 0..2 * self.n {
            if let Some(piv) = (rank..rows.len()).find(|&r| rows[r][col]) {
                rows.swap(rank, piv);
                for r in 0..rows.len() {
                    if r != rank && rows[r][col] {
                        let src = rows[rank].clone();
                        for (a, b) in rows[r].iter_mut().zip(src) {
                            *a ^= b;
                        }
                    }
                }
                rank += 1;
            }
        }
        rank
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn p(s: &str) -> PauliOperator {
        s.parse().unwrap()
    }

    struct Never;
    impl CoinSource for Never {
        fn flip(&mut self) -> bool {
            panic!("unexpected random outcome")
        }
    }

    #[test]
    fn zero_state() {
        assert_eq!(StabilizerState::new_zero_state(0), Err(Error::NoQubits));
        let mut s = StabilizerState::new_zero_state(7).unwrap();
        for q in 0..7 {
            assert!(s.is_stabilized_by(&PauliOperator::single(7, q, Pauli1::Z).unwrap()));
        }
        assert!(!s.is_stabilized_by(&PauliOperator::single(7, 0, Pauli1::X).unwrap()));
        assert_eq!(s.measure(3, Basis::Z, &mut Never).unwrap(), (false, true));
    }

    #[test]
    fn hadamard_then_x_measurement_is_deterministic() {
        let mut s = StabilizerState::new_zero_state(1).unwrap();
        s.h(0).unwrap();
        assert_eq!(s.measure(0, Basis::X, &mut Never).unwrap(), (false, true));
    }

    #[test]
    fn ghz_ladder_stabilizers() {
        let mut s = StabilizerState::new_zero_state(4).unwrap();
        s.h(0).unwrap();
        s.cnot(0, 1).unwrap();
        s.cnot(1, 2).unwrap();
        s.cnot(2, 3).unwrap();
        for g in ["XXXX", "ZZII", "IZZI", "IIZZ"] {
            assert!(s.is_stabilized_by(&p(g)), "{g}");
        }
        assert!(!s.is_stabilized_by(&p("-XXXX")));
    }

    #[test]
    fn pauli_fault_flips_outcome() {
        let mut s = StabilizerState::new_zero_state(3).unwrap();
        s.apply_pauli(&p("XII")).unwrap();
        assert_eq!(s.measure(0, Basis::Z, &mut Never).unwrap(), (true, true));
        s.apply_pauli(&p("III")).unwrap();
        assert_eq!(s.measure(0, Basis::Z, &mut Never).unwrap(), (true, true));
        assert!(s
            .apply_pauli(&p("XX"))
            .is_err_and(|e| matches!(e, Error::SizeMismatch { .. })));
    }

    #[test]
    fn random_measurement_projects() {
        for seed in 0..20 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut s = StabilizerState::new_zero_state(2).unwrap();
            s.h(0).unwrap();
            let (m, det) = s.measure(0, Basis::Z, &mut rng).unwrap();
            assert!(!det);
            let z = if m { p("-ZI") } else { p("ZI") };
            assert!(s.is_stabilized_by(&z));
            assert_eq!(s.measure(0, Basis::Z, &mut rng).unwrap(), (m, true));
        }
    }

    #[test]
    fn reset_returns_to_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut s = StabilizerState::new_zero_state(2).unwrap();
        s.h(1).unwrap();
        s.reset(1, Basis::Z, &mut rng).unwrap();
        assert!(s.is_stabilized_by(&p("IZ")));
        s.reset(0, Basis::X, &mut rng).unwrap();
        assert!(s.is_stabilized_by(&p("XI")));
    }

    #[test]
    fn cnot_rejects_repeated_target() {
        let mut s = StabilizerState::new_zero_state(2).unwrap();
        assert_eq!(s.cnot(1, 1), Err(Error::RepeatedTarget(1)));
        assert!(s.cnot(0, 2).is_err());
    }
}
