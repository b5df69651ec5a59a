//! Random symplectic subgroups and the bucket (coset) structure they induce.
//!
//! A subgroup is held as t independent generators g_1..g_t. Hashing sends a
//! string x to the bit vector b with b_j = [x, g_j]; the fiber C(b) over b is
//! a coset of the centralizer C(V), so the 2^t buckets partition F_2^{2n}.

use crate::error::{Error, Result};
use crate::pauli::{symplectic_inner, PauliString};
use rand::Rng;

/// Row-reduce packed 2n-bit vectors over F_2; returns the rank.
fn f2_rank(rows: &mut Vec<u64>) -> usize {
    let mut rank = 0;
    let mut pivots: Vec<u64> = Vec::new();
    for i in 0..rows.len() {
        let mut r = rows[i];
        for &pv in &pivots {
            let lead = 63 - pv.leading_zeros();
            if (r >> lead) & 1 == 1 {
                r ^= pv;
            }
        }
        if r != 0 {
            pivots.push(r);
            rank += 1;
        }
    }
    *rows = pivots;
    rank
}

/// Reduced row echelon form: every pivot bit occurs in exactly one row.
fn f2_rref(rows: &[u64]) -> Vec<u64> {
    let mut basis: Vec<u64> = Vec::new();
    for &row in rows {
        let mut r = row;
        for &b in &basis {
            let lead = 63 - b.leading_zeros();
            if (r >> lead) & 1 == 1 {
                r ^= b;
            }
        }
        if r != 0 {
            let lead = 63 - r.leading_zeros();
            for b in basis.iter_mut() {
                if (*b >> lead) & 1 == 1 {
                    *b ^= r;
                }
            }
            basis.push(r);
        }
    }
    basis.sort_unstable_by(|x, y| y.cmp(x));
    basis
}

/// Minimum of the affine space `point + span(basis)` in integer order.
fn f2_affine_min(point: u64, basis: &[u64]) -> u64 {
    let rref = f2_rref(basis);
    let mut c = point;
    for &v in &rref {
        let lead = 63 - v.leading_zeros();
        if (c >> lead) & 1 == 1 {
            c ^= v;
        }
    }
    c
}

/// Subgroup of F_2^{2n} given by linearly independent generators.
#[derive(Debug, Clone)]
pub struct SymplecticSubgroup {
    n: u32,
    generators: Vec<PauliString>,
}

impl SymplecticSubgroup {
    pub fn new(n: u32, generators: Vec<PauliString>) -> Result<Self> {
        for g in &generators {
            if g.n() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: g.n(),
                });
            }
        }
        if generators.len() as u32 > 2 * n {
            return Err(Error::parameter(format!(
                "subgroup dimension {} exceeds 2n = {}",
                generators.len(),
                2 * n
            )));
        }
        let mut rows: Vec<u64> = generators.iter().map(|g| g.packed()).collect();
        let rank = f2_rank(&mut rows);
        if rank != generators.len() {
            return Err(Error::parameter(format!(
                "generators are linearly dependent: rank {rank} < {}",
                generators.len()
            )));
        }
        Ok(SymplecticSubgroup { n, generators })
    }

    pub fn trivial(n: u32) -> Self {
        SymplecticSubgroup {
            n,
            generators: Vec::new(),
        }
    }

    /// t uniformly random strings, resampled until linearly independent.
    pub fn random(n: u32, t: u32, rng: &mut impl Rng) -> Result<Self> {
        if t > 2 * n {
            return Err(Error::parameter(format!("t = {t} exceeds 2n = {}", 2 * n)));
        }
        let mask = if 2 * n == 64 { u64::MAX } else { (1u64 << (2 * n)) - 1 };
        loop {
            let gens: Vec<PauliString> = (0..t)
                .map(|_| PauliString::from_packed(n, rng.random::<u64>() & mask).unwrap())
                .collect();
            let mut rows: Vec<u64> = gens.iter().map(|g| g.packed()).collect();
            if f2_rank(&mut rows) == t as usize {
                return Ok(SymplecticSubgroup { n, generators: gens });
            }
        }
    }

    #[inline]
    pub fn n(&self) -> u32 {
        self.n
    }

    /// Subgroup dimension t.
    #[inline]
    pub fn dim(&self) -> u32 {
        self.generators.len() as u32
    }

    pub fn generators(&self) -> &[PauliString] {
        &self.generators
    }

    pub fn num_buckets(&self) -> usize {
        1usize << self.dim()
    }

    /// All 2^t members, ordered by the generator-subset index.
    pub fn elements(&self) -> Vec<PauliString> {
        let t = self.generators.len();
        assert!(t <= 26, "subgroup too large to enumerate");
        let mut out = Vec::with_capacity(1 << t);
        for mask in 0u64..(1 << t) {
            let mut acc = PauliString::identity(self.n);
            for (j, g) in self.generators.iter().enumerate() {
                if (mask >> j) & 1 == 1 {
                    acc = acc.xor(g).unwrap();
                }
            }
            out.push(acc);
        }
        out
    }

    /// Bucket index of x: bit j is the symplectic form against generator j.
    pub fn bucket_index(&self, x: &PauliString) -> Result<u32> {
        let mut b = 0u32;
        for (j, g) in self.generators.iter().enumerate() {
            b |= (symplectic_inner(x, g)? as u32) << j;
        }
        Ok(b)
    }

    /// Basis of the centralizer C(V) = kernel of the commutation map,
    /// dimension 2n - t.
    pub fn centralizer_basis(&self) -> Vec<PauliString> {
        // [x, g] = packed(x) . swapped(g) over F_2, so the centralizer is the
        // kernel of the t x 2n matrix whose rows are the swapped generators.
        let bits = 2 * self.n as usize;
        let rows: Vec<u64> = self
            .generators
            .iter()
            .map(|g| (g.z_bits() << self.n) | g.x_bits())
            .collect();
        // Gaussian elimination, tracking pivot columns.
        let mut echelon: Vec<(usize, u64)> = Vec::new(); // (pivot bit, row)
        for &row in &rows {
            let mut r = row;
            for &(pv, rv) in &echelon {
                if (r >> pv) & 1 == 1 {
                    r ^= rv;
                }
            }
            if r != 0 {
                let pv = (63 - r.leading_zeros()) as usize;
                echelon.push((pv, r));
            }
        }
        let pivot_cols: Vec<usize> = echelon.iter().map(|&(pv, _)| pv).collect();
        let mut kernel = Vec::new();
        for free in 0..bits {
            if pivot_cols.contains(&free) {
                continue;
            }
            // Back-substitute a kernel vector with a 1 in the free column.
            let mut v = 1u64 << free;
            for &(pv, rv) in echelon.iter().rev() {
                if (rv & v).count_ones() & 1 == 1 {
                    v ^= 1u64 << pv;
                }
            }
            kernel.push(PauliString::from_packed(self.n, v).unwrap());
        }
        debug_assert_eq!(kernel.len(), bits - self.generators.len());
        kernel
    }

    /// Lexicographically smallest member of bucket b (in I<X<Y<Z label
    /// order): one solution of [a, g_j] = b_j, minimized over the
    /// centralizer in label-key space.
    pub fn bucket_representative(&self, b: u32) -> Result<PauliString> {
        if (b as u64) >= (1u64 << self.dim()) {
            return Err(Error::parameter(format!(
                "bucket index {b} out of range for dimension {}",
                self.dim()
            )));
        }
        // Solve the linear system by Gaussian elimination on swapped rows,
        // carrying the right-hand side.
        let rows: Vec<u64> = self
            .generators
            .iter()
            .map(|g| (g.z_bits() << self.n) | g.x_bits())
            .collect();
        let mut echelon: Vec<(usize, u64, u8)> = Vec::new();
        for (j, &row) in rows.iter().enumerate() {
            let mut r = row;
            let mut rhs = ((b >> j) & 1) as u8;
            for &(pv, rv, rb) in &echelon {
                if (r >> pv) & 1 == 1 {
                    r ^= rv;
                    rhs ^= rb;
                }
            }
            debug_assert!(r != 0, "generators independent by construction");
            let pv = (63 - r.leading_zeros()) as usize;
            echelon.push((pv, r, rhs));
        }
        let mut sol = 0u64;
        for &(pv, rv, rb) in echelon.iter().rev() {
            let cur = ((rv & sol).count_ones() & 1) as u8;
            if cur != rb {
                sol ^= 1u64 << pv;
            }
        }
        let particular = PauliString::from_packed(self.n, sol).unwrap();
        debug_assert_eq!(self.bucket_index(&particular)?, b);
        // Minimize over the centralizer in label-key coordinates (a linear
        // bijection of the bits, so affine minimization applies).
        let kb: Vec<u64> = self
            .centralizer_basis()
            .iter()
            .map(|v| v.label_key())
            .collect();
        let min_key = f2_affine_min(particular.label_key(), &kb);
        PauliString::from_label_key(self.n, min_key)
    }

    /// Members of bucket b; exponential in 2n - t, intended for verifiers at
    /// small n.
    pub fn bucket_members(&self, b: u32) -> Result<Vec<PauliString>> {
        let rep = self.bucket_representative(b)?;
        let cent = self.centralizer_basis();
        assert!(cent.len() <= 26, "bucket too large to enumerate");
        let mut out = Vec::with_capacity(1 << cent.len());
        for mask in 0u64..(1 << cent.len()) {
            let mut acc = rep;
            for (j, v) in cent.iter().enumerate() {
                if (mask >> j) & 1 == 1 {
                    acc = acc.xor(v).unwrap();
                }
            }
            out.push(acc);
        }
        Ok(out)
    }

    pub fn generators_hex(&self) -> Vec<String> {
        self.generators.iter().map(|g| g.to_hex()).collect()
    }
}
