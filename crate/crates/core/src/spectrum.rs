//! Pauli spectra of unitaries: U = sum_x Uhat_x sigma_x, with
//! {|Uhat_x|^2}_x a probability distribution by Parseval.

use crate::dense::CMatrix;
use crate::error::{Error, Result};
use crate::pauli::PauliString;
use num_complex::Complex64;
use rand::Rng;

/// In-place Walsh-Hadamard transform (unnormalized).
fn wht(v: &mut [Complex64]) {
    let n = v.len();
    let mut h = 1;
    while h < n {
        for block in (0..n).step_by(2 * h) {
            for i in block..block + h {
                let a = v[i];
                let b = v[i + h];
                v[i] = a + b;
                v[i + h] = a - b;
            }
        }
        h *= 2;
    }
}

/// Dense Pauli spectrum of a 2^n x 2^n operator, indexed by the packed
/// (a << n) | b 2n-bit label.
#[derive(Debug, Clone)]
pub struct UnitarySpectrum {
    n: u32,
    coeffs: Vec<Complex64>,
    probs: Vec<f64>,
    cumulative: Vec<f64>,
}

impl UnitarySpectrum {
    /// Uhat_x = Tr(U sigma_x) / 2^n for all 4^n strings, via one length-2^n
    /// Walsh-Hadamard transform per X-mask.
    pub fn of_matrix(u: &CMatrix) -> Result<Self> {
        let dim = u.nrows();
        if dim == 0 || !dim.is_power_of_two() || u.ncols() != dim {
            return Err(Error::validation(format!(
                "spectrum needs a square power-of-two matrix, got {}x{}",
                dim,
                u.ncols()
            )));
        }
        let n = dim.trailing_zeros();
        let mut coeffs = vec![Complex64::new(0.0, 0.0); dim * dim];
        let norm = 1.0 / dim as f64;
        let mut col = vec![Complex64::new(0.0, 0.0); dim];
        for a in 0..dim {
            // Tr(U sigma_(a,b)) = i^{|a&b|} sum_c (-1)^{|b&c|} U[c, c^a]
            for (c, slot) in col.iter_mut().enumerate() {
                *slot = u[(c, c ^ a)];
            }
            wht(&mut col);
            for b in 0..dim {
                let phase = match (a & b).count_ones() & 3 {
                    0 => Complex64::new(1.0, 0.0),
                    1 => Complex64::new(0.0, 1.0),
                    2 => Complex64::new(-1.0, 0.0),
                    _ => Complex64::new(0.0, -1.0),
                };
                coeffs[(a << n) | b] = phase * col[b] * norm;
            }
        }
        let probs: Vec<f64> = coeffs.iter().map(|c| c.norm_sqr()).collect();
        let mut cumulative = Vec::with_capacity(probs.len());
        let mut acc = 0.0;
        for &p in &probs {
            acc += p;
            cumulative.push(acc);
        }
        Ok(UnitarySpectrum {
            n,
            coeffs,
            probs,
            cumulative,
        })
    }

    #[inline]
    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn get(&self, x: &PauliString) -> Complex64 {
        self.coeffs[x.index()]
    }

    pub fn prob(&self, x: &PauliString) -> f64 {
        self.probs[x.index()]
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Parseval defect |sum |Uhat_x|^2 - 1|.
    pub fn parseval_defect(&self) -> f64 {
        (self.probs.iter().sum::<f64>() - 1.0).abs()
    }

    /// Total probability mass on strings of weight > k.
    pub fn mass_above_weight(&self, k: u32) -> f64 {
        self.probs
            .iter()
            .enumerate()
            .filter(|(idx, _)| {
                PauliString::from_index(self.n, *idx).unwrap().weight() > k
            })
            .map(|(_, p)| p)
            .sum()
    }

    /// Total probability mass outside the allowed index mask.
    pub fn mass_outside(&self, allowed: &[bool]) -> f64 {
        self.probs
            .iter()
            .zip(allowed.iter())
            .filter(|(_, &ok)| !ok)
            .map(|(p, _)| p)
            .sum()
    }

    /// Indices sorted by probability descending, ties broken by label order.
    pub fn sorted_indices(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.probs.len()).collect();
        idx.sort_by(|&a, &b| {
            self.probs[b]
                .partial_cmp(&self.probs[a])
                .unwrap()
                .then_with(|| {
                    let ka = PauliString::from_index(self.n, a).unwrap().label_key();
                    let kb = PauliString::from_index(self.n, b).unwrap().label_key();
                    ka.cmp(&kb)
                })
        });
        idx
    }

    /// One draw from {|Uhat_x|^2}.
    pub fn sample(&self, rng: &mut impl Rng) -> PauliString {
        let r: f64 = rng.random::<f64>() * self.cumulative.last().copied().unwrap_or(1.0);
        let idx = match self
            .cumulative
            .binary_search_by(|c| c.partial_cmp(&r).unwrap())
        {
            Ok(i) => (i + 1).min(self.cumulative.len() - 1),
            Err(i) => i.min(self.cumulative.len() - 1),
        };
        PauliString::from_index(self.n, idx).unwrap()
    }

    /// Counts of `shots` i.i.d. draws, one entry per packed index.
    pub fn sample_counts(&self, rng: &mut impl Rng, shots: u64) -> Vec<u64> {
        crate::sampling::multinomial(rng, shots, &self.probs)
    }

    /// CSV rows (pauli_label, re, im, prob).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("pauli_label,re,im,prob\n");
        for (idx, c) in self.coeffs.iter().enumerate() {
            let x = PauliString::from_index(self.n, idx).unwrap();
            out.push_str(&format!("{x},{:.17e},{:.17e},{:.17e}\n", c.re, c.im, c.norm_sqr()));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense;
    use crate::pauli::all_strings;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    #[test]
    fn identity_spectrum() {
        let s = UnitarySpectrum::of_matrix(&dense::identity(4)).unwrap();
        assert!((s.prob(&PauliString::identity(2)) - 1.0).abs() < 1e-12);
        assert!(s.parseval_defect() < 1e-12);
    }

    #[test]
    fn matches_trace_definition() {
        // compare against the naive Tr(U sigma_x)/2^n on a random unitary
        let mut rng = ChaCha12Rng::seed_from_u64(2);
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
        let eig = crate::dense::HermitianEigen::new(&m).unwrap();
        let u = eig.apply(|v| (Complex64::new(0.0, -1.0) * v).exp());
        let s = UnitarySpectrum::of_matrix(&u).unwrap();
        for x in all_strings(3) {
            let prod = &u * dense::pauli_matrix(&x);
            let tr: Complex64 = (0..dim).map(|i| prod[(i, i)]).sum();
            assert!((s.get(&x) - tr / dim as f64).norm() < 1e-10, "{x}");
        }
        assert!(s.parseval_defect() < 1e-10);
    }

    #[test]
    fn sampling_tracks_distribution() {
        let z: PauliString = "Z".parse().unwrap();
        let h = crate::hamiltonian::Hamiltonian::from_terms(1, [(z, 1.0)]).unwrap();
        let eig = h.eigen(12).unwrap();
        let t = std::f64::consts::FRAC_PI_4;
        let u = eig.apply(|v| (Complex64::new(0.0, -t) * v).exp());
        let s = UnitarySpectrum::of_matrix(&u).unwrap();
        // closed form: Uhat_I = cos t, Uhat_Z = -i sin t
        assert!((s.get(&PauliString::identity(1)) - Complex64::new(t.cos(), 0.0)).norm() < 1e-12);
        assert!((s.get(&z) - Complex64::new(0.0, -t.sin())).norm() < 1e-12);
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        let counts = s.sample_counts(&mut rng, 1_000_000);
        let freq_z = counts[z.index()] as f64 / 1e6;
        assert!((freq_z - 0.5) < 2e-3);
    }
}
