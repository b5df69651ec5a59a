//! Mutually unbiased bases from a symplectic spread of F_2^{2n}.
//!
//! The N+1 = 2^n + 1 subspaces are the Z-type space {(0, b)} together with
//! {(u, alpha u)}_{alpha in GF(2^n)}, where the second block is written in
//! the trace-dual of the polynomial basis so that the binary dot product of
//! coordinates realizes the field trace form. Each subspace is maximal
//! self-centralizing, the subspaces meet only in 0, and the joint
//! eigenbases they induce form a complete set of MUBs.

use crate::error::{Error, Result};
use crate::pauli::PauliString;
use crate::subgroup::SymplecticSubgroup;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Low-weight irreducible polynomials over F_2; entry n-1 has degree n and
/// includes the x^n term.
const IRREDUCIBLE: [u64; 16] = [
    0b11,                // x + 1
    0b111,               // x^2 + x + 1
    0b1011,              // x^3 + x + 1
    0b10011,             // x^4 + x + 1
    0b100101,            // x^5 + x^2 + 1
    0b1000011,           // x^6 + x + 1
    0b10000011,          // x^7 + x + 1
    0b100011011,         // x^8 + x^4 + x^3 + x + 1
    0b1000010001,        // x^9 + x^4 + 1
    0b10000001001,       // x^10 + x^3 + 1
    0b100000000101,      // x^11 + x^2 + 1
    0b1000001010011,     // x^12 + x^6 + x^4 + x + 1
    0b10000000011011,    // x^13 + x^4 + x^3 + x + 1
    0b100010001000011,   // x^14 + x^10 + x^6 + x + 1
    0b1000000000000011,  // x^15 + x + 1
    0b10001000000001011, // x^16 + x^12 + x^3 + x + 1
];

/// GF(2^n) in the polynomial basis {1, x, ..., x^{n-1}} plus its trace-dual.
#[derive(Debug, Clone)]
struct Gf2n {
    n: u32,
    poly: u64,
    /// dual[j] = field element f_j with Tr(x^i f_j) = [i == j].
    dual: Vec<u64>,
}

impl Gf2n {
    fn new(n: u32) -> Result<Self> {
        if n == 0 || n as usize > IRREDUCIBLE.len() {
            return Err(Error::parameter(format!(
                "field GF(2^{n}) unsupported (max degree {})",
                IRREDUCIBLE.len()
            )));
        }
        let poly = IRREDUCIBLE[(n - 1) as usize];
        let mut field = Gf2n {
            n,
            poly,
            dual: Vec::new(),
        };
        // Gram matrix of the trace form in the polynomial basis, as bit rows.
        let mut gram: Vec<u64> = (0..n)
            .map(|i| {
                let mut row = 0u64;
                for j in 0..n {
                    row |= field.trace(field.mul(1 << i, 1 << j)) << j;
                }
                row
            })
            .collect();
        // Gauss-Jordan inversion over F_2.
        let mut inv: Vec<u64> = (0..n).map(|i| 1u64 << i).collect();
        for col in 0..n as usize {
            let pivot = (col..n as usize)
                .find(|&r| (gram[r] >> col) & 1 == 1)
                .ok_or_else(|| {
                    Error::Internal(format!("trace form degenerate for GF(2^{n})"))
                })?;
            gram.swap(col, pivot);
            inv.swap(col, pivot);
            for r in 0..n as usize {
                if r != col && (gram[r] >> col) & 1 == 1 {
                    gram[r] ^= gram[col];
                    inv[r] ^= inv[col];
                }
            }
        }
        // Row j of the inverse Gram, read as a polynomial, is f_j.
        field.dual = inv;
        Ok(field)
    }

    #[inline]
    fn mul(&self, mut a: u64, mut b: u64) -> u64 {
        let mut r = 0u64;
        while b != 0 {
            if b & 1 == 1 {
                r ^= a;
            }
            b >>= 1;
            a <<= 1;
            if (a >> self.n) & 1 == 1 {
                a ^= self.poly;
            }
        }
        r
    }

    /// Field trace down to F_2, returned as 0 or 1.
    #[inline]
    fn trace(&self, x: u64) -> u64 {
        let mut acc = 0u64;
        let mut cur = x;
        for _ in 0..self.n {
            acc ^= cur;
            cur = self.mul(cur, cur);
        }
        debug_assert!(acc <= 1);
        acc
    }

    /// Field element with the given coordinates in the dual basis.
    #[inline]
    fn from_dual_coords(&self, bits: u64) -> u64 {
        let mut w = 0u64;
        for k in 0..self.n {
            if (bits >> k) & 1 == 1 {
                w ^= self.dual[k as usize];
            }
        }
        w
    }

    /// Coordinates of a field element in the dual basis: bit k = Tr(x^k w).
    #[inline]
    fn to_dual_coords(&self, w: u64) -> u64 {
        let mut bits = 0u64;
        for k in 0..self.n {
            bits |= self.trace(self.mul(1 << k, w)) << k;
        }
        bits
    }
}

/// The complete family of N+1 mutually unbiased bases on n qubits, realized
/// as maximal self-centralizing subspaces with fixed coset representatives.
#[derive(Debug, Clone)]
pub struct MubFamily {
    n: u32,
    field: Gf2n,
    /// subspaces[i] holds the n basis vectors of G_i; i = 0 is the Z-type
    /// subspace, i >= 1 corresponds to the field element i - 1.
    subspaces: Vec<Vec<PauliString>>,
}

impl MubFamily {
    pub fn new(n: u32, dense_cap: u32) -> Result<Self> {
        if n > dense_cap {
            return Err(Error::CapacityExceeded { n, cap: dense_cap });
        }
        let field = Gf2n::new(n)?;
        let count = (1usize << n) + 1;
        let mut subspaces = Vec::with_capacity(count);
        // G_0 = {(0, b)}.
        subspaces.push(
            (0..n)
                .map(|k| PauliString::new(n, 0, 1 << k))
                .collect::<Result<Vec<_>>>()?,
        );
        for alpha in 0..(1u64 << n) {
            let mut basis = Vec::with_capacity(n as usize);
            for m in 0..n {
                let w = field.mul(alpha, 1 << m);
                basis.push(PauliString::new(n, 1 << m, field.to_dual_coords(w))?);
            }
            subspaces.push(basis);
        }
        let fam = MubFamily {
            n,
            field,
            subspaces,
        };
        fam.check_isotropy()?;
        Ok(fam)
    }

    fn check_isotropy(&self) -> Result<()> {
        for (i, basis) in self.subspaces.iter().enumerate() {
            for a in 0..basis.len() {
                for b in a..basis.len() {
                    if crate::pauli::symplectic_inner(&basis[a], &basis[b])? != 0 {
                        return Err(Error::Internal(format!(
                            "subspace {i} is not isotropic"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    #[inline]
    pub fn n(&self) -> u32 {
        self.n
    }

    /// N = 2^n, the basis size; the family has N + 1 bases.
    #[inline]
    pub fn basis_size(&self) -> usize {
        1 << self.n
    }

    #[inline]
    pub fn num_bases(&self) -> usize {
        self.subspaces.len()
    }

    pub fn subspace(&self, i: usize) -> Result<SymplecticSubgroup> {
        let basis = self
            .subspaces
            .get(i)
            .ok_or_else(|| Error::parameter(format!("basis index {i} out of range")))?;
        SymplecticSubgroup::new(self.n, basis.clone())
    }

    /// All 2^n members of subspace i, indexed by the basis-subset mask.
    pub fn subspace_elements(&self, i: usize) -> Result<Vec<PauliString>> {
        Ok(self
            .subspace_signed_elements(i)?
            .into_iter()
            .map(|(x, _)| x)
            .collect())
    }

    /// Members of subspace i together with the stabilizer signs eps(x): the
    /// ordered products of the commuting Hermitian generators form an honest
    /// group {W_x = eps(x) sigma_x}, and the joint eigenprojectors are
    /// (1/N) sum_x chi(x) W_x. The signs are not identically +1 because the
    /// Hermitian phase convention may give sigma_x sigma_y = -sigma_{x+y}
    /// even on commuting pairs.
    pub fn subspace_signed_elements(&self, i: usize) -> Result<Vec<(PauliString, f64)>> {
        let basis = self
            .subspaces
            .get(i)
            .ok_or_else(|| Error::parameter(format!("basis index {i} out of range")))?;
        let mut out = Vec::with_capacity(1 << basis.len());
        for mask in 0u64..(1 << basis.len()) {
            let mut acc = crate::pauli::PhasedPauli {
                phase_exp: 0,
                string: PauliString::identity(self.n),
            };
            for (j, g) in basis.iter().enumerate() {
                if (mask >> j) & 1 == 1 {
                    let prod = crate::pauli::pauli_product(&acc.string, g).unwrap();
                    acc = crate::pauli::PhasedPauli {
                        phase_exp: (acc.phase_exp + prod.phase_exp) & 3,
                        string: prod.string,
                    };
                }
            }
            debug_assert!(acc.phase_exp % 2 == 0, "commuting Hermitian products are real");
            let sign = if acc.phase_exp == 2 { -1.0 } else { 1.0 };
            out.push((acc.string, sign));
        }
        Ok(out)
    }

    /// Coset representative r_j of basis i.
    pub fn representative(&self, i: usize, j: usize) -> Result<PauliString> {
        let nmax = self.basis_size();
        if i >= self.num_bases() || j >= nmax {
            return Err(Error::parameter(format!("(i, j) = ({i}, {j}) out of range")));
        }
        if i == 0 {
            PauliString::new(self.n, j as u64, 0)
        } else {
            PauliString::new(self.n, 0, j as u64)
        }
    }

    /// The unique l with sigma_x |phi_{i,j}><phi_{i,j}| sigma_x =
    /// |phi_{i,l}><phi_{i,l}|, i.e. r_l ~ r_j + x modulo G_i.
    pub fn shift_index(&self, i: usize, j: usize, x: &PauliString) -> Result<usize> {
        if x.n() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: x.n(),
            });
        }
        if i >= self.num_bases() || j >= self.basis_size() {
            return Err(Error::parameter(format!("(i, j) = ({i}, {j}) out of range")));
        }
        if i == 0 {
            // Cosets of the Z-type subspace are labeled by the X bits.
            Ok(j ^ x.x_bits() as usize)
        } else {
            let alpha = (i - 1) as u64;
            // Coset invariant of (a, b) is w(b) + alpha u(a) in the field.
            let w = self.field.from_dual_coords(j as u64 ^ x.z_bits());
            let phi = w ^ self.field.mul(alpha, x.x_bits());
            Ok(self.field.to_dual_coords(phi) as usize)
        }
    }

    /// State |phi_{i,j}> as a dense vector. The global phase is fixed by the
    /// projector column convention.
    pub fn state(&self, i: usize, j: usize) -> Result<DVector<Complex64>> {
        let nn = self.basis_size();
        if i >= self.num_bases() || j >= nn {
            return Err(Error::parameter(format!("(i, j) = ({i}, {j}) out of range")));
        }
        let mut v = DVector::<Complex64>::zeros(nn);
        if i == 0 {
            v[j] = Complex64::new(1.0, 0.0);
            return Ok(v);
        }
        let r = self.representative(i, j)?;
        let norm = 1.0 / (nn as f64).sqrt();
        for (x, eps) in self.subspace_signed_elements(i)? {
            // [r, x] with r = (0, j) reduces to parity(j & x.a).
            let sign = if (r.z_bits() & x.x_bits()).count_ones() & 1 == 1 {
                -eps
            } else {
                eps
            };
            let phase = match (x.x_bits() & x.z_bits()).count_ones() & 3 {
                0 => Complex64::new(1.0, 0.0),
                1 => Complex64::new(0.0, 1.0),
                2 => Complex64::new(-1.0, 0.0),
                _ => Complex64::new(0.0, -1.0),
            };
            v[x.x_bits() as usize] += phase * sign * norm;
        }
        Ok(v)
    }

    /// Matrix whose column j is |phi_{i,j}>.
    pub fn dense_basis(&self, i: usize) -> Result<DMatrix<Complex64>> {
        let nn = self.basis_size();
        let mut m = DMatrix::<Complex64>::zeros(nn, nn);
        for j in 0..nn {
            m.set_column(j, &self.state(i, j)?);
        }
        Ok(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense;
    use crate::pauli::all_strings;

    #[test]
    fn irreducible_table_is_irreducible() {
        // Brute-force trial division in F_2[x].
        fn degree(p: u64) -> u32 {
            63 - p.leading_zeros()
        }
        fn rem(mut a: u64, m: u64) -> u64 {
            while a != 0 && degree(a) >= degree(m) {
                a ^= m << (degree(a) - degree(m));
            }
            a
        }
        for (idx, &p) in IRREDUCIBLE.iter().enumerate() {
            let n = (idx + 1) as u32;
            assert_eq!(degree(p), n);
            for d in 2u64..(1u64 << (n / 2 + 1)) {
                if degree(d) >= 1 && rem(p, d) == 0 {
                    panic!("polynomial for n = {n} divisible by {d:#b}");
                }
            }
        }
    }

    #[test]
    fn field_axioms_small() {
        for n in 1..=6 {
            let f = Gf2n::new(n).unwrap();
            let size = 1u64 << n;
            // spot-check associativity and distributivity on a grid
            for a in 0..size.min(8) {
                for b in 0..size.min(8) {
                    for c in 0..size.min(8) {
                        assert_eq!(f.mul(a, f.mul(b, c)), f.mul(f.mul(a, b), c));
                        assert_eq!(f.mul(a, b ^ c), f.mul(a, b) ^ f.mul(a, c));
                    }
                }
            }
            // dual basis property
            for i in 0..n {
                for j in 0..n {
                    let t = f.trace(f.mul(1 << i, f.dual[j as usize]));
                    assert_eq!(t, u64::from(i == j));
                }
            }
            // coordinate round trip
            for w in 0..size {
                assert_eq!(f.from_dual_coords(f.to_dual_coords(w)), w);
            }
        }
    }

    #[test]
    fn single_qubit_family_is_z_x_y() {
        let fam = MubFamily::new(1, 12).unwrap();
        assert_eq!(fam.num_bases(), 3);
        let labels: Vec<Vec<String>> = (0..3)
            .map(|i| {
                fam.subspace_elements(i)
                    .unwrap()
                    .iter()
                    .map(|x| x.to_string())
                    .collect()
            })
            .collect();
        assert_eq!(labels[0], vec!["I", "Z"]);
        assert_eq!(labels[1], vec!["I", "X"]);
        assert_eq!(labels[2], vec!["I", "Y"]);
    }

    #[test]
    fn subspaces_self_centralizing_and_disjoint() {
        for n in 1..=3u32 {
            let fam = MubFamily::new(n, 12).unwrap();
            let size = 1usize << n;
            for i in 0..fam.num_bases() {
                let elems = fam.subspace_elements(i).unwrap();
                assert_eq!(elems.len(), size);
                // G_i = {x : [x, y] = 0 for all y in G_i}: isotropic, and by
                // dimension counting maximal, so compare against the
                // exhaustive commutant.
                let mut commutant: Vec<_> = all_strings(n)
                    .filter(|x| {
                        elems
                            .iter()
                            .all(|y| crate::pauli::symplectic_inner(x, y).unwrap() == 0)
                    })
                    .collect();
                commutant.sort();
                let mut sorted_elems = elems.clone();
                sorted_elems.sort();
                assert_eq!(commutant, sorted_elems);
            }
            for i in 0..fam.num_bases() {
                for j in (i + 1)..fam.num_bases() {
                    let a = fam.subspace_elements(i).unwrap();
                    let b: std::collections::HashSet<_> =
                        fam.subspace_elements(j).unwrap().into_iter().collect();
                    let common: Vec<_> = a.iter().filter(|x| b.contains(x)).collect();
                    assert_eq!(common.len(), 1, "G_{i} and G_{j} overlap");
                    assert!(common[0].is_identity());
                }
            }
        }
    }

    #[test]
    fn states_match_projector_formula() {
        // |phi><phi| = (1/N) sum_x (-1)^{[r,x]} W_x with the signed lift,
        // checked densely; the diagonal (j-dependent) part of the character
        // is exactly (-1)^{[r_j, x]}.
        for n in 1..=2u32 {
            let fam = MubFamily::new(n, 12).unwrap();
            let size = 1usize << n;
            for i in 0..fam.num_bases() {
                for j in 0..size {
                    let v = fam.state(i, j).unwrap();
                    let proj = &v * v.adjoint();
                    let r = fam.representative(i, j).unwrap();
                    let mut expect = DMatrix::<Complex64>::zeros(size, size);
                    for (x, eps) in fam.subspace_signed_elements(i).unwrap() {
                        let sign = if crate::pauli::symplectic_inner(&r, &x).unwrap() == 1 {
                            -eps
                        } else {
                            eps
                        };
                        expect += dense::pauli_matrix(&x) * Complex64::new(sign / size as f64, 0.0);
                    }
                    assert!((proj - expect).norm() < 1e-12, "i={i} j={j}");
                }
            }
        }
    }

    #[test]
    fn states_are_joint_eigenvectors() {
        // Every |phi_{i,j}> is a +-1 eigenvector of each sigma_x, x in G_i,
        // and the eigenvalue pattern over j is a full character table.
        for n in 1..=2u32 {
            let fam = MubFamily::new(n, 12).unwrap();
            let size = 1usize << n;
            for i in 0..fam.num_bases() {
                for x in fam.subspace_elements(i).unwrap() {
                    let mx = dense::pauli_matrix(&x);
                    for j in 0..size {
                        let v = fam.state(i, j).unwrap();
                        let mv = &mx * &v;
                        let lambda: Complex64 = v.dotc(&mv);
                        assert!(lambda.im.abs() < 1e-12);
                        assert!((lambda.re.abs() - 1.0).abs() < 1e-10);
                        assert!((mv - v * lambda).norm() < 1e-10);
                    }
                }
            }
        }
    }

    #[test]
    fn bases_are_orthonormal_and_unbiased() {
        for n in 1..=3u32 {
            let fam = MubFamily::new(n, 12).unwrap();
            let size = 1usize << n;
            let bases: Vec<_> = (0..fam.num_bases())
                .map(|i| fam.dense_basis(i).unwrap())
                .collect();
            for (i, bi) in bases.iter().enumerate() {
                let gram = bi.adjoint() * bi;
                assert!(
                    (gram - DMatrix::<Complex64>::identity(size, size)).norm() < 1e-10,
                    "basis {i} not orthonormal"
                );
            }
            for i in 0..bases.len() {
                for j in (i + 1)..bases.len() {
                    let overlap = bases[i].adjoint() * &bases[j];
                    for v in overlap.iter() {
                        assert!(
                            (v.norm_sqr() - 1.0 / size as f64).abs() < 1e-10,
                            "bases {i},{j} not unbiased"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn shift_index_matches_sigma_action() {
        for n in 1..=2u32 {
            let fam = MubFamily::new(n, 12).unwrap();
            let size = 1usize << n;
            for i in 0..fam.num_bases() {
                for j in 0..size {
                    let v = fam.state(i, j).unwrap();
                    for x in all_strings(n) {
                        let l = fam.shift_index(i, j, &x).unwrap();
                        if x.is_identity() {
                            assert_eq!(l, j);
                        }
                        let moved = dense::pauli_matrix(&x) * &v;
                        let target = fam.state(i, l).unwrap();
                        let overlap: Complex64 = target.dotc(&moved);
                        assert!(
                            (overlap.norm() - 1.0).abs() < 1e-10,
                            "n={n} i={i} j={j} x={x}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn z_basis_shift_is_bit_flip() {
        let fam = MubFamily::new(1, 12).unwrap();
        let x: PauliString = "X".parse().unwrap();
        assert_eq!(fam.shift_index(0, 0, &x).unwrap(), 1);
        assert_eq!(fam.shift_index(0, 1, &x).unwrap(), 0);
    }
}
