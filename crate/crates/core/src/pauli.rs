//! Pauli strings over the binary symplectic representation.
//!
//! A Pauli operator on n qubits is labeled by x = (a, b) in F_2^{2n} via
//! sigma_x = i^{a.b} X^{a_1}Z^{b_1} x ... x X^{a_n}Z^{b_n}, which makes every
//! sigma_x Hermitian. Bit i of `a`/`b` belongs to qubit i, and qubit i is bit
//! i of the computational basis index, so that
//! sigma_x |c> = i^{|a&b|} (-1)^{|b&c|} |c xor a>.

use crate::error::{Error, Result};
use std::fmt;
use std::str::FromStr;

/// Maximum qubit count representable by the packed (a, b) words.
pub const MAX_QUBITS: u32 = 32;

/// A point of F_2^{2n} labeling the Weyl operator sigma_(a,b).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PauliString {
    n: u32,
    a: u64,
    b: u64,
}

#[inline]
fn parity(word: u64) -> u8 {
    (word.count_ones() & 1) as u8
}

impl PauliString {
    /// Build from packed X bits `a` and Z bits `b`.
    pub fn new(n: u32, a: u64, b: u64) -> Result<Self> {
        if n == 0 || n > MAX_QUBITS {
            return Err(Error::parameter(format!(
                "qubit count must be in 1..={MAX_QUBITS}, got {n}"
            )));
        }
        let mask = Self::mask(n);
        if a & !mask != 0 || b & !mask != 0 {
            return Err(Error::parameter(format!(
                "bits set beyond qubit count {n}: a={a:#x} b={b:#x}"
            )));
        }
        Ok(PauliString { n, a, b })
    }

    #[inline]
    fn mask(n: u32) -> u64 {
        if n == 64 {
            u64::MAX
        } else {
            (1u64 << n) - 1
        }
    }

    pub fn identity(n: u32) -> Self {
        PauliString { n, a: 0, b: 0 }
    }

    /// Single-qubit X/Y/Z embedded at `qubit`.
    pub fn single(n: u32, qubit: u32, which: char) -> Result<Self> {
        if qubit >= n {
            return Err(Error::parameter(format!("qubit {qubit} out of range for n = {n}")));
        }
        let bit = 1u64 << qubit;
        let (a, b) = match which {
            'X' | 'x' => (bit, 0),
            'Y' | 'y' => (bit, bit),
            'Z' | 'z' => (0, bit),
            'I' | 'i' => (0, 0),
            _ => return Err(Error::parameter(format!("unknown Pauli letter '{which}'"))),
        };
        PauliString::new(n, a, b)
    }

    #[inline]
    pub fn n(&self) -> u32 {
        self.n
    }

    #[inline]
    pub fn x_bits(&self) -> u64 {
        self.a
    }

    #[inline]
    pub fn z_bits(&self) -> u64 {
        self.b
    }

    #[inline]
    pub fn is_identity(&self) -> bool {
        self.a == 0 && self.b == 0
    }

    /// Number of non-identity tensor factors.
    #[inline]
    pub fn weight(&self) -> u32 {
        (self.a | self.b).count_ones()
    }

    /// Qubits on which the string acts non-trivially, as a bitmask.
    #[inline]
    pub fn support_mask(&self) -> u64 {
        self.a | self.b
    }

    /// Packed 2n-bit form (a << n) | b, used to index dense 4^n arrays.
    #[inline]
    pub fn packed(&self) -> u64 {
        (self.a << self.n) | self.b
    }

    pub fn from_packed(n: u32, packed: u64) -> Result<Self> {
        let mask = Self::mask(n);
        PauliString::new(n, (packed >> n) & mask, packed & mask)
    }

    /// Dense-array index; requires 2n <= 52 in practice (checked by callers
    /// through the dense cap).
    #[inline]
    pub fn index(&self) -> usize {
        self.packed() as usize
    }

    pub fn from_index(n: u32, idx: usize) -> Result<Self> {
        Self::from_packed(n, idx as u64)
    }

    /// XOR of the underlying F_2^{2n} points (the group operation, phases
    /// aside; use [`pauli_product`] when phases matter).
    pub fn xor(&self, other: &PauliString) -> Result<PauliString> {
        self.check_n(other)?;
        Ok(PauliString {
            n: self.n,
            a: self.a ^ other.a,
            b: self.b ^ other.b,
        })
    }

    #[inline]
    pub(crate) fn check_n(&self, other: &PauliString) -> Result<()> {
        if self.n != other.n {
            Err(Error::DimensionMismatch {
                expected: self.n,
                got: other.n,
            })
        } else {
            Ok(())
        }
    }

    /// Ordering key matching the lexicographic order of the I/X/Y/Z label,
    /// qubit 0 most significant. Linear over F_2 in the (a, b) bits.
    pub fn label_key(&self) -> u64 {
        let mut key = 0u64;
        for i in 0..self.n {
            let ai = (self.a >> i) & 1;
            let bi = (self.b >> i) & 1;
            // I=0, X=1, Y=2, Z=3 in label order: hi bit = b, lo bit = a xor b.
            let digit = (bi << 1) | (ai ^ bi);
            key |= digit << (2 * (self.n - 1 - i));
        }
        key
    }

    pub fn from_label_key(n: u32, key: u64) -> Result<Self> {
        let mut a = 0u64;
        let mut b = 0u64;
        for i in 0..n {
            let digit = (key >> (2 * (n - 1 - i))) & 0b11;
            let hi = (digit >> 1) & 1;
            let lo = digit & 1;
            b |= hi << i;
            a |= (lo ^ hi) << i;
        }
        PauliString::new(n, a, b)
    }

    /// Hex serialization "a:b" of the packed words.
    pub fn to_hex(&self) -> String {
        format!("{:x}:{:x}", self.a, self.b)
    }

    pub fn from_hex(n: u32, s: &str) -> Result<Self> {
        let (a_str, b_str) = s
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("hex Pauli must be 'a:b', got '{s}'")))?;
        let a = u64::from_str_radix(a_str.trim(), 16)
            .map_err(|e| Error::Parse(format!("bad hex '{a_str}': {e}")))?;
        let b = u64::from_str_radix(b_str.trim(), 16)
            .map_err(|e| Error::Parse(format!("bad hex '{b_str}': {e}")))?;
        PauliString::new(n, a, b)
    }
}

impl PartialOrd for PauliString {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for PauliString {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.n, self.label_key()).cmp(&(other.n, other.label_key()))
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.n {
            let ai = (self.a >> i) & 1;
            let bi = (self.b >> i) & 1;
            let c = match (ai, bi) {
                (0, 0) => 'I',
                (1, 0) => 'X',
                (1, 1) => 'Y',
                (0, 1) => 'Z',
                _ => unreachable!(),
            };
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Err(Error::Parse("empty Pauli label".into()));
        }
        let n = s.chars().count() as u32;
        if n > MAX_QUBITS {
            return Err(Error::Parse(format!("label longer than {MAX_QUBITS} qubits")));
        }
        let mut a = 0u64;
        let mut b = 0u64;
        for (i, c) in s.chars().enumerate() {
            let (ai, bi) = match c {
                'I' | 'i' => (0u64, 0u64),
                'X' | 'x' => (1, 0),
                'Y' | 'y' => (1, 1),
                'Z' | 'z' => (0, 1),
                _ => return Err(Error::Parse(format!("unknown Pauli letter '{c}' in '{s}'"))),
            };
            a |= ai << i;
            b |= bi << i;
        }
        PauliString::new(n, a, b)
    }
}

/// Symplectic inner product [x, y] = <x_a, y_b> + <x_b, y_a> mod 2.
/// Zero exactly when sigma_x and sigma_y commute.
pub fn symplectic_inner(x: &PauliString, y: &PauliString) -> Result<u8> {
    x.check_n(y)?;
    Ok(parity(x.a & y.b) ^ parity(x.b & y.a))
}

/// A Pauli with an explicit power-of-i phase: i^{phase_exp} sigma_string.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PhasedPauli {
    pub phase_exp: u8,
    pub string: PauliString,
}

impl PhasedPauli {
    pub fn phase(&self) -> num_complex::Complex64 {
        match self.phase_exp & 3 {
            0 => num_complex::Complex64::new(1.0, 0.0),
            1 => num_complex::Complex64::new(0.0, 1.0),
            2 => num_complex::Complex64::new(-1.0, 0.0),
            _ => num_complex::Complex64::new(0.0, -1.0),
        }
    }
}

/// Matrix product sigma_x . sigma_y = i^{phase_exp} sigma_{x xor y}.
pub fn pauli_product(x: &PauliString, y: &PauliString) -> Result<PhasedPauli> {
    x.check_n(y)?;
    // sigma_x sigma_y = i^{x.a & x.b} i^{y.a & y.b} (-1)^{x.b & y.a}
    //                   i^{-(z.a & z.b)} sigma_z   with z = x xor y.
    let z = x.xor(y)?;
    let exp = (x.a & x.b).count_ones() as i64
        + (y.a & y.b).count_ones() as i64
        + 2 * (x.b & y.a).count_ones() as i64
        - (z.a & z.b).count_ones() as i64;
    Ok(PhasedPauli {
        phase_exp: (exp.rem_euclid(4)) as u8,
        string: z,
    })
}

/// All 4^n strings on n qubits in packed-index order.
pub fn all_strings(n: u32) -> impl Iterator<Item = PauliString> {
    let total = 1u64 << (2 * n);
    (0..total).map(move |p| PauliString::from_packed(n, p).expect("in range"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    #[test]
    fn weight_and_support() {
        assert_eq!(p("IXYZ").weight(), 3);
        assert_eq!(p("IIII").weight(), 0);
        assert_eq!(p("X").weight(), 1);
        assert_eq!(p("IXYZ").support_mask(), 0b1110);
    }

    #[test]
    fn symplectic_inner_basics() {
        // X and Z anticommute on one qubit.
        assert_eq!(symplectic_inner(&p("X"), &p("Z")).unwrap(), 1);
        // identity commutes with everything
        for x in all_strings(2) {
            assert_eq!(symplectic_inner(&x, &PauliString::identity(2)).unwrap(), 0);
        }
        // XX vs ZZ commute
        assert_eq!(symplectic_inner(&p("XX"), &p("ZZ")).unwrap(), 0);
        // dimension mismatch
        assert!(symplectic_inner(&p("X"), &p("XX")).is_err());
    }

    #[test]
    fn product_single_qubit_table() {
        // X . Z = -i Y
        let r = pauli_product(&p("X"), &p("Z")).unwrap();
        assert_eq!(r.string, p("Y"));
        assert_eq!(r.phase_exp, 3);
        // involution: x . x = identity with no phase
        for x in all_strings(1) {
            let r = pauli_product(&x, &x).unwrap();
            assert_eq!(r.phase_exp, 0);
            assert!(r.string.is_identity());
        }
        // X . Y = i Z, Y . Z = i X, Z . X = i Y
        for (a, b, c) in [("X", "Y", "Z"), ("Y", "Z", "X"), ("Z", "X", "Y")] {
            let r = pauli_product(&p(a), &p(b)).unwrap();
            assert_eq!(r.string, p(c));
            assert_eq!(r.phase_exp, 1);
        }
    }

    #[test]
    fn label_round_trip_and_order() {
        for x in all_strings(3) {
            let s = x.to_string();
            assert_eq!(s.parse::<PauliString>().unwrap(), x);
            assert_eq!(PauliString::from_hex(3, &x.to_hex()).unwrap(), x);
            assert_eq!(PauliString::from_label_key(3, x.label_key()).unwrap(), x);
        }
        // label order agrees with string order
        let mut v: Vec<PauliString> = all_strings(2).collect();
        v.sort();
        let labels: Vec<String> = v.iter().map(|x| x.to_string()).collect();
        let mut sorted = labels.clone();
        sorted.sort();
        assert_eq!(labels, sorted);
    }

    #[test]
    fn label_key_is_linear() {
        for x in all_strings(2) {
            for y in all_strings(2) {
                let z = x.xor(&y).unwrap();
                assert_eq!(z.label_key(), x.label_key() ^ y.label_key());
            }
        }
    }
}
