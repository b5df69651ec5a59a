//! Hamiltonians as sparse real Pauli-coefficient maps, with the norms and
//! structure distances the testers and learners are measured against.

use crate::dense::{self, CMatrix, HermitianEigen};
use crate::error::{Error, Result};
use crate::pauli::PauliString;
use num_complex::Complex64;
use std::collections::BTreeMap;

/// H = sum_x lambda_x sigma_x with real coefficients; zero entries are never
/// stored. Keys iterate in I<X<Y<Z label order, so reports are deterministic.
#[derive(Debug, Clone, PartialEq)]
pub struct Hamiltonian {
    n: u32,
    coefficients: BTreeMap<PauliString, f64>,
}

impl Hamiltonian {
    pub fn zero(n: u32) -> Self {
        Hamiltonian {
            n,
            coefficients: BTreeMap::new(),
        }
    }

    pub fn from_terms(n: u32, terms: impl IntoIterator<Item = (PauliString, f64)>) -> Result<Self> {
        let mut h = Hamiltonian::zero(n);
        for (x, c) in terms {
            h.add_term(x, c)?;
        }
        Ok(h)
    }

    pub fn add_term(&mut self, x: PauliString, coeff: f64) -> Result<()> {
        if x.n() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: x.n(),
            });
        }
        if !coeff.is_finite() {
            return Err(Error::validation(format!("non-finite coefficient for {x}")));
        }
        let entry = self.coefficients.entry(x).or_insert(0.0);
        *entry += coeff;
        if *entry == 0.0 {
            self.coefficients.remove(&x);
        }
        Ok(())
    }

    #[inline]
    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn coefficient(&self, x: &PauliString) -> f64 {
        self.coefficients.get(x).copied().unwrap_or(0.0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&PauliString, f64)> {
        self.coefficients.iter().map(|(x, &c)| (x, c))
    }

    pub fn support(&self) -> impl Iterator<Item = &PauliString> {
        self.coefficients.keys()
    }

    pub fn support_size(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_traceless(&self) -> bool {
        self.coefficient(&PauliString::identity(self.n)) == 0.0
    }

    /// 2-norm of the Pauli spectrum = normalized Frobenius norm.
    pub fn two_norm(&self) -> f64 {
        self.coefficients
            .values()
            .map(|c| c * c)
            .sum::<f64>()
            .max(0.0)
            .sqrt()
    }

    pub fn scale(&self, factor: f64) -> Hamiltonian {
        Hamiltonian {
            n: self.n,
            coefficients: self
                .coefficients
                .iter()
                .filter(|(_, &c)| c * factor != 0.0)
                .map(|(x, &c)| (*x, c * factor))
                .collect(),
        }
    }

    /// Dense 2^n x 2^n matrix form.
    pub fn to_matrix(&self, dense_cap: u32) -> Result<CMatrix> {
        if self.n > dense_cap {
            return Err(Error::CapacityExceeded {
                n: self.n,
                cap: dense_cap,
            });
        }
        let dim = 1usize << self.n;
        let mut m = CMatrix::zeros(dim, dim);
        for (x, c) in self.terms() {
            m += dense::pauli_matrix(x) * Complex64::new(c, 0.0);
        }
        Ok(m)
    }

    /// Hermitian eigendecomposition of the dense form.
    pub fn eigen(&self, dense_cap: u32) -> Result<HermitianEigen> {
        HermitianEigen::new(&self.to_matrix(dense_cap)?)
    }

    /// Largest absolute eigenvalue.
    pub fn operator_norm(&self, dense_cap: u32) -> Result<f64> {
        Ok(self.eigen(dense_cap)?.spectral_radius())
    }

    /// Coefficient magnitudes sorted descending, ties broken by label order.
    pub fn sorted_magnitudes(&self) -> Vec<(PauliString, f64)> {
        let mut v: Vec<(PauliString, f64)> = self
            .coefficients
            .iter()
            .map(|(x, &c)| (*x, c.abs()))
            .collect();
        v.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then_with(|| a.0.cmp(&b.0)));
        v
    }

    /// || H_{>k} ||_2, the exact distance to the k-local Hamiltonians.
    pub fn distance_to_local(&self, k: u32) -> f64 {
        self.coefficients
            .iter()
            .filter(|(x, _)| x.weight() > k)
            .map(|(_, c)| c * c)
            .sum::<f64>()
            .max(0.0)
            .sqrt()
    }

    /// Exact distance to the s-sparse Hamiltonians: 2-norm of everything
    /// past the s largest magnitudes.
    pub fn distance_to_sparse(&self, s: usize) -> f64 {
        let mags = self.sorted_magnitudes();
        mags.iter()
            .skip(s)
            .map(|(_, m)| m * m)
            .sum::<f64>()
            .max(0.0)
            .sqrt()
    }

    /// 2-norm of the part of the spectrum outside the support set S.
    pub fn distance_to_support(&self, allowed: &std::collections::HashSet<PauliString>) -> f64 {
        self.coefficients
            .iter()
            .filter(|(x, _)| !allowed.contains(x))
            .map(|(_, c)| c * c)
            .sum::<f64>()
            .max(0.0)
            .sqrt()
    }

    pub fn structure_report(&self, k: u32, s: usize) -> StructureDistanceReport {
        StructureDistanceReport {
            distance_to_k_local: self.distance_to_local(k),
            distance_to_s_sparse: self.distance_to_sparse(s),
            sorted_magnitudes: self.sorted_magnitudes().into_iter().map(|(_, m)| m).collect(),
        }
    }
}

/// Exact structure distances of one Hamiltonian, used to certify promise
/// instances.
#[derive(Debug, Clone)]
pub struct StructureDistanceReport {
    pub distance_to_k_local: f64,
    pub distance_to_s_sparse: f64,
    pub sorted_magnitudes: Vec<f64>,
}

/// Frobenius (2-norm) distance between spectra.
pub fn frobenius_distance(a: &Hamiltonian, b: &Hamiltonian) -> Result<f64> {
    if a.n() != b.n() {
        return Err(Error::DimensionMismatch {
            expected: a.n(),
            got: b.n(),
        });
    }
    let mut sum = 0.0;
    for (x, c) in a.terms() {
        let d = c - b.coefficient(x);
        sum += d * d;
    }
    for (x, c) in b.terms() {
        if a.coefficient(x) == 0.0 {
            sum += c * c;
        }
    }
    Ok(sum.max(0.0).sqrt())
}

/// Recover the sparse coefficient map of a dense Hermitian matrix via
/// lambda_x = Tr(M sigma_x) / 2^n. Coefficients below `tol` are dropped.
pub fn pauli_decompose(m: &CMatrix, dense_cap: u32, tol: f64) -> Result<Hamiltonian> {
    let dim = m.nrows();
    if dim == 0 || !dim.is_power_of_two() || m.ncols() != dim {
        return Err(Error::validation(format!(
            "matrix must be square with power-of-two size, got {}x{}",
            dim,
            m.ncols()
        )));
    }
    let n = dim.trailing_zeros();
    if n > dense_cap {
        return Err(Error::CapacityExceeded { n, cap: dense_cap });
    }
    if !dense::is_hermitian(m, 1e-9) {
        return Err(Error::validation("matrix is not Hermitian within 1e-9"));
    }
    let mut h = Hamiltonian::zero(n);
    for x in crate::pauli::all_strings(n) {
        // Tr(M sigma_x) via the single non-zero of sigma_x per column:
        // sigma_x[c ^ a, c] = i^{|a&b|} (-1)^{|b&c|}.
        let a = x.x_bits() as usize;
        let b = x.z_bits() as usize;
        let phase = match (x.x_bits() & x.z_bits()).count_ones() & 3 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
        let mut tr = Complex64::new(0.0, 0.0);
        for c in 0..dim {
            let sign = if ((b & c).count_ones() & 1) == 1 { -1.0 } else { 1.0 };
            tr += m[(c, c ^ a)] * phase * sign;
        }
        let lambda = tr / dim as f64;
        if lambda.im.abs() > 1e-9 {
            return Err(Error::validation(format!(
                "imaginary Pauli coefficient {:.2e} at {x}; matrix not Hermitian",
                lambda.im
            )));
        }
        if lambda.re.abs() > tol {
            h.add_term(x, lambda.re)?;
        }
    }
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    fn p(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    fn ham(n: u32, terms: &[(&str, f64)]) -> Hamiltonian {
        Hamiltonian::from_terms(n, terms.iter().map(|(s, c)| (p(s), *c))).unwrap()
    }

    #[test]
    fn decompose_diag_z() {
        let mut m = CMatrix::zeros(2, 2);
        m[(0, 0)] = Complex64::new(1.0, 0.0);
        m[(1, 1)] = Complex64::new(-1.0, 0.0);
        let h = pauli_decompose(&m, 12, 1e-12).unwrap();
        assert_eq!(h.support_size(), 1);
        assert!((h.coefficient(&p("Z")) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn decompose_zero_matrix_is_empty() {
        let h = pauli_decompose(&CMatrix::zeros(4, 4), 12, 1e-12).unwrap();
        assert_eq!(h.support_size(), 0);
    }

    #[test]
    fn decompose_round_trip_and_parseval() {
        let mut rng = ChaCha12Rng::seed_from_u64(21);
        for _ in 0..5 {
            let dim = 8;
            let mut m = CMatrix::zeros(dim, dim);
            for i in 0..dim {
                for j in 0..=i {
                    let re: f64 = rng.random_range(-1.0..1.0);
                    let im: f64 = if i == j { 0.0 } else { rng.random_range(-1.0..1.0) };
                    m[(i, j)] = Complex64::new(re, im);
                    m[(j, i)] = Complex64::new(re, -im);
                }
            }
            let h = pauli_decompose(&m, 12, 0.0).unwrap();
            let back = h.to_matrix(12).unwrap();
            let max_entry = (&back - &m).iter().map(|c| c.norm()).fold(0.0, f64::max);
            assert!(max_entry < 1e-9);
            // Parseval: sum lambda^2 = Tr[M^2] / 2^n
            let m2 = &m * &m;
            let tr: f64 = (0..dim).map(|i| m2[(i, i)].re).sum();
            assert!((h.two_norm().powi(2) - tr / dim as f64).abs() < 1e-9);
        }
    }

    #[test]
    fn rejects_non_hermitian() {
        let mut m = CMatrix::zeros(2, 2);
        m[(0, 1)] = Complex64::new(1.0, 0.0);
        assert!(pauli_decompose(&m, 12, 0.0).is_err());
    }

    #[test]
    fn frobenius_distance_cases() {
        let h1 = ham(1, &[("Z", 1.0)]);
        assert_eq!(frobenius_distance(&h1, &h1).unwrap(), 0.0);
        assert_eq!(frobenius_distance(&h1, &Hamiltonian::zero(1)).unwrap(), 1.0);
        let a = ham(2, &[("XI", 0.8), ("ZZ", 0.6)]);
        let b = ham(2, &[("XI", 0.8)]);
        assert!((frobenius_distance(&a, &b).unwrap() - 0.6).abs() < 1e-12);
        // agrees with the dense normalized Frobenius norm
        let d = frobenius_distance(&a, &b).unwrap();
        let diff = a.to_matrix(12).unwrap() - b.to_matrix(12).unwrap();
        let dense_d = ((&diff * &diff).trace().re / 4.0).sqrt();
        assert!((d - dense_d).abs() < 1e-9);
    }

    #[test]
    fn distance_to_local_cases() {
        let h = ham(3, &[("ZII", 1.0)]);
        assert_eq!(h.distance_to_local(1), 0.0);
        let h = ham(3, &[("XXX", 1.0)]);
        assert_eq!(h.distance_to_local(2), 1.0);
        let h = ham(3, &[("ZII", 0.6), ("XXX", 0.8)]);
        assert!((h.distance_to_local(2) - 0.8).abs() < 1e-12);
        assert_eq!(h.distance_to_local(3), 0.0);
    }

    #[test]
    fn distance_to_sparse_cases() {
        let h = ham(2, &[("XI", 0.8), ("ZZ", 0.6)]);
        assert_eq!(h.distance_to_sparse(2), 0.0);
        assert!((h.distance_to_sparse(1) - 0.6).abs() < 1e-12);
        assert!((h.distance_to_sparse(0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn distance_to_sparse_matches_brute_force() {
        // best s-subset of the support, by exhaustive minimization
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        let all: Vec<PauliString> = crate::pauli::all_strings(3).skip(1).collect();
        let mut h = Hamiltonian::zero(3);
        for i in 0..10 {
            h.add_term(all[i * 3], rng.random_range(-1.0..1.0)).unwrap();
        }
        let support: Vec<PauliString> = h.support().copied().collect();
        let s = 4;
        let mut best = f64::INFINITY;
        // iterate all 4-subsets
        let m = support.len();
        for mask in 0u32..(1 << m) {
            if mask.count_ones() as usize != s {
                continue;
            }
            let residual: f64 = support
                .iter()
                .enumerate()
                .filter(|(i, _)| (mask >> i) & 1 == 0)
                .map(|(_, x)| h.coefficient(x).powi(2))
                .sum();
            best = best.min(residual.sqrt());
        }
        assert!((h.distance_to_sparse(s) - best).abs() < 1e-12);
    }

    #[test]
    fn distances_monotone() {
        let mut rng = ChaCha12Rng::seed_from_u64(9);
        let all: Vec<PauliString> = crate::pauli::all_strings(3).skip(1).collect();
        let mut h = Hamiltonian::zero(3);
        for i in 0..12 {
            h.add_term(all[i * 5 % all.len()], rng.random_range(-1.0..1.0))
                .unwrap();
        }
        for k in 0..3 {
            assert!(h.distance_to_local(k) >= h.distance_to_local(k + 1) - 1e-15);
        }
        for s in 0..h.support_size() {
            assert!(h.distance_to_sparse(s) >= h.distance_to_sparse(s + 1) - 1e-15);
        }
        assert_eq!(h.distance_to_local(3), 0.0);
        assert_eq!(h.distance_to_sparse(64), 0.0);
    }

    #[test]
    fn operator_norm_cases() {
        let h = ham(1, &[("Z", 1.0)]);
        assert!((h.operator_norm(12).unwrap() - 1.0).abs() < 1e-10);
        let h = ham(1, &[("X", 0.5), ("Z", 0.5)]);
        assert!((h.operator_norm(12).unwrap() - 0.5f64.hypot(0.5)).abs() < 1e-10);
    }

    #[test]
    fn two_norm_below_operator_norm() {
        let mut rng = ChaCha12Rng::seed_from_u64(13);
        let all: Vec<PauliString> = crate::pauli::all_strings(2).skip(1).collect();
        for _ in 0..10 {
            let mut h = Hamiltonian::zero(2);
            for x in &all {
                if rng.random_bool(0.4) {
                    h.add_term(*x, rng.random_range(-1.0..1.0)).unwrap();
                }
            }
            assert!(h.two_norm() <= h.operator_norm(12).unwrap() + 1e-9);
        }
    }

    #[test]
    fn capacity_error_over_cap() {
        let h = ham(3, &[("ZII", 1.0)]);
        assert!(matches!(
            h.operator_norm(2),
            Err(Error::CapacityExceeded { .. })
        ));
    }

    #[test]
    fn zero_coefficients_absent() {
        let mut h = ham(1, &[("Z", 1.0)]);
        h.add_term(p("Z"), -1.0).unwrap();
        assert_eq!(h.support_size(), 0);
    }
}
