//! Budgeted, seeded oracle access to U(t) = exp(-iHt).
//!
//! Every physical access the protocols use is simulated here: Bell sampling
//! of the Pauli spectrum, swap-test style coefficient estimation, and the
//! memory-less MUB subroutines. Shot noise is always derived from exactly
//! computed probabilities; in exact mode the subroutines return the true
//! values while still charging the ledger, so threshold logic can be
//! validated independently of sample noise.

use crate::config::Config;
use crate::dense::{self, CMatrix, HermitianEigen};
use crate::error::{Error, Result};
use crate::hamiltonian::Hamiltonian;
use crate::ledger::Ledger;
use crate::mub::MubFamily;
use crate::pauli::{pauli_product, PauliString};
use crate::sampling;
use crate::spectrum::UnitarySpectrum;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use std::collections::HashMap;
use std::sync::Arc;

/// Whether probabilistic subroutines sample or return their exact means.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum OracleMode {
    Exact,
    Shots,
}

impl std::str::FromStr for OracleMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "exact" => Ok(OracleMode::Exact),
            "shots" | "shot" | "shot_noise" => Ok(OracleMode::Shots),
            other => Err(Error::parameter(format!("unknown mode '{other}'"))),
        }
    }
}

/// U(t) by Hermitian eigendecomposition: H = V D V^dagger gives
/// U = V exp(-iDt) V^dagger.
pub fn evolution_unitary(h: &Hamiltonian, t: f64, dense_cap: u32) -> Result<CMatrix> {
    if !t.is_finite() {
        return Err(Error::parameter(format!("evolution time must be finite, got {t}")));
    }
    let eig = h.eigen(dense_cap)?;
    Ok(eig.apply(|v| (Complex64::new(0.0, -v * t)).exp()))
}

/// Cached per-t artifacts of one hidden Hamiltonian.
pub struct SpectrumEntry {
    pub unitary: CMatrix,
    pub spectrum: UnitarySpectrum,
}

/// Per-basis outcome tables of the memory-less MUB measurement for a fixed
/// unitary: table[i] is the column-major matrix of
/// P(outcome l | basis i, input j) = |<phi_{i,l}| U |phi_{i,j}>|^2.
pub struct MubSampler {
    fam: Arc<MubFamily>,
    tables: Vec<Vec<Vec<f64>>>,
    elements: Vec<Vec<PauliString>>,
}

impl MubSampler {
    pub fn new(fam: Arc<MubFamily>, u: &CMatrix) -> Result<Self> {
        let nn = fam.basis_size();
        let mut tables = Vec::with_capacity(fam.num_bases());
        let mut elements = Vec::with_capacity(fam.num_bases());
        for i in 0..fam.num_bases() {
            let basis = fam.dense_basis(i)?;
            let amps = basis.adjoint() * u * &basis;
            let mut cols = Vec::with_capacity(nn);
            for j in 0..nn {
                let mut col = Vec::with_capacity(nn);
                for l in 0..nn {
                    col.push(amps[(l, j)].norm_sqr());
                }
                cols.push(col);
            }
            tables.push(cols);
            elements.push(fam.subspace_elements(i)?);
        }
        Ok(MubSampler {
            fam,
            tables,
            elements,
        })
    }

    /// E[|alpha_x|^2]: the probability over uniform (i, j) and the Born rule
    /// that the outcome equals l(i, j, x).
    pub fn exact_hit_probability(&self, x: &PauliString) -> Result<f64> {
        let nn = self.fam.basis_size();
        let mut acc = 0.0;
        for i in 0..self.fam.num_bases() {
            for j in 0..nn {
                let l = self.fam.shift_index(i, j, x)?;
                acc += self.tables[i][j][l];
            }
        }
        Ok(acc / (self.fam.num_bases() * nn) as f64)
    }

    /// Simulate `rounds` iterations and accumulate hit frequencies for every
    /// string (dense, indexed by packed label). A round with basis i, input
    /// j and outcome l credits exactly the coset (r_l + r_j) + G_i.
    pub fn sample_frequencies(&self, rng: &mut impl Rng, rounds: u64) -> Result<Vec<f64>> {
        let nn = self.fam.basis_size();
        let bases = self.fam.num_bases();
        let cells = bases * nn;
        let cell_probs = vec![1.0 / cells as f64; cells];
        let cell_counts = sampling::multinomial(rng, rounds, &cell_probs);
        let n = self.fam.n();
        let mut freq = vec![0.0f64; 1 << (2 * n)];
        for (cell, &count) in cell_counts.iter().enumerate() {
            if count == 0 {
                continue;
            }
            let i = cell / nn;
            let j = cell % nn;
            let outcome_counts = sampling::multinomial(rng, count, &self.tables[i][j]);
            let rj = self.fam.representative(i, j)?;
            for (l, &oc) in outcome_counts.iter().enumerate() {
                if oc == 0 {
                    continue;
                }
                let base = self.fam.representative(i, l)?.xor(&rj)?;
                let w = oc as f64;
                for g in &self.elements[i] {
                    freq[base.xor(g)?.index()] += w;
                }
            }
        }
        let inv = 1.0 / rounds as f64;
        for f in freq.iter_mut() {
            *f *= inv;
        }
        Ok(freq)
    }

    pub fn family(&self) -> &MubFamily {
        &self.fam
    }
}

/// Debias a raw hit frequency into an estimate of |Uhat_x|^2.
#[inline]
pub fn debias_hit_frequency(freq: f64, basis_size: usize) -> f64 {
    let nf = basis_size as f64;
    (nf + 1.0) / nf * freq - 1.0 / nf
}

/// The canonical anticommuting factorization sigma_{x'} sigma_{x''} = i
/// sigma_x used by the memory-less coefficient estimator: x' is the
/// single-qubit factor at the first support qubit of x.
pub fn anticommuting_factors(x: &PauliString) -> Result<(PauliString, PauliString)> {
    if x.is_identity() {
        return Err(Error::parameter(
            "identity has no anticommuting factorization",
        ));
    }
    let q = x.support_mask().trailing_zeros();
    let a_bit = (x.x_bits() >> q) & 1;
    let b_bit = (x.z_bits() >> q) & 1;
    // (P', P'') with sigma_P' sigma_P'' = +i sigma_P at qubit q.
    let (p1, p2) = match (a_bit, b_bit) {
        (1, 0) => ('Y', 'Z'), // YZ = iX
        (1, 1) => ('Z', 'X'), // ZX = iY
        (0, 1) => ('X', 'Y'), // XY = iZ
        _ => unreachable!(),
    };
    let xp = PauliString::single(x.n(), q, p1)?;
    let rest = PauliString::new(x.n(), x.x_bits() & !(1 << q), x.z_bits() & !(1 << q))?;
    let second = PauliString::single(x.n(), q, p2)?.xor(&rest)?;
    let check = pauli_product(&xp, &second)?;
    debug_assert_eq!(check.string, *x);
    debug_assert_eq!(check.phase_exp, 1);
    debug_assert_eq!(crate::pauli::symplectic_inner(&xp, &second)?, 1);
    Ok((xp, second))
}

/// Seeded, budgeted access to the evolution of a hidden Hamiltonian.
pub struct EvolutionOracle {
    hamiltonian: Hamiltonian,
    eigen: HermitianEigen,
    cfg: Config,
    mode: OracleMode,
    rng: ChaCha12Rng,
    seed: u64,
    ledger: Ledger,
    entries: HashMap<u64, Arc<SpectrumEntry>>,
    mub: Option<Arc<MubFamily>>,
    samplers: HashMap<u64, Arc<MubSampler>>,
}

impl EvolutionOracle {
    /// Validates the standing assumptions: traceless and ||H||_inf <= 1.
    pub fn new(hamiltonian: Hamiltonian, seed: u64, mode: OracleMode, cfg: &Config) -> Result<Self> {
        if !hamiltonian.is_traceless() {
            return Err(Error::validation("oracle target must be traceless"));
        }
        let eigen = hamiltonian.eigen(cfg.dense_cap)?;
        let norm = eigen.spectral_radius();
        if norm > 1.0 + 1e-9 {
            return Err(Error::validation(format!(
                "oracle target has operator norm {norm:.6} > 1"
            )));
        }
        Ok(EvolutionOracle {
            hamiltonian,
            eigen,
            cfg: cfg.clone(),
            mode,
            rng: ChaCha12Rng::seed_from_u64(seed),
            seed,
            ledger: Ledger::default(),
            entries: HashMap::new(),
            mub: None,
            samplers: HashMap::new(),
        })
    }

    #[inline]
    pub fn n(&self) -> u32 {
        self.hamiltonian.n()
    }

    #[inline]
    pub fn mode(&self) -> OracleMode {
        self.mode
    }

    #[inline]
    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn ledger(&self) -> Ledger {
        self.ledger
    }

    pub fn config(&self) -> &Config {
        &self.cfg
    }

    /// Ground-truth access for verifiers; protocols must not use this.
    pub fn hidden_hamiltonian(&self) -> &Hamiltonian {
        &self.hamiltonian
    }

    /// Explicit ledger charge, used by exact-mode protocols to keep budgets
    /// comparable across modes.
    pub fn charge(&mut self, queries: u64, duration_each: f64) {
        self.ledger.charge(queries, duration_each);
    }

    pub fn entry(&mut self, t: f64) -> Result<Arc<SpectrumEntry>> {
        if !t.is_finite() {
            return Err(Error::parameter(format!("evolution time must be finite, got {t}")));
        }
        if let Some(e) = self.entries.get(&t.to_bits()) {
            return Ok(e.clone());
        }
        let unitary = self
            .eigen
            .apply(|v| (Complex64::new(0.0, -v * t)).exp());
        let spectrum = UnitarySpectrum::of_matrix(&unitary)?;
        let entry = Arc::new(SpectrumEntry { unitary, spectrum });
        self.entries.insert(t.to_bits(), entry.clone());
        Ok(entry)
    }

    /// Exact Pauli spectrum of U(t); not a query, so never charged.
    pub fn spectrum(&mut self, t: f64) -> Result<Arc<SpectrumEntry>> {
        self.entry(t)
    }

    pub fn mub(&mut self) -> Result<Arc<MubFamily>> {
        if self.mub.is_none() {
            self.mub = Some(Arc::new(MubFamily::new(self.n(), self.cfg.dense_cap)?));
        }
        Ok(self.mub.as_ref().unwrap().clone())
    }

    pub fn sampler(&mut self, t: f64) -> Result<Arc<MubSampler>> {
        if let Some(s) = self.samplers.get(&t.to_bits()) {
            return Ok(s.clone());
        }
        let fam = self.mub()?;
        let entry = self.entry(t)?;
        let sampler = Arc::new(MubSampler::new(fam, &entry.unitary)?);
        self.samplers.insert(t.to_bits(), sampler.clone());
        Ok(sampler)
    }

    /// `shots` i.i.d. draws from {|Uhat_x(t)|^2}; charges shots queries of
    /// duration |t|.
    pub fn bell_sample(&mut self, t: f64, shots: u64) -> Result<Vec<PauliString>> {
        if shots == 0 {
            return Err(Error::parameter("bell_sample needs at least one shot"));
        }
        let entry = self.entry(t)?;
        self.ledger.charge(shots, t);
        Ok((0..shots).map(|_| entry.spectrum.sample(&mut self.rng)).collect())
    }

    /// Dense per-index counts of `shots` Bell samples (multinomial batch;
    /// same distribution as `bell_sample`).
    pub fn bell_counts(&mut self, t: f64, shots: u64) -> Result<Vec<u64>> {
        let entry = self.entry(t)?;
        self.ledger.charge(shots, t);
        Ok(entry.spectrum.sample_counts(&mut self.rng, shots))
    }

    /// Estimate Uhat_x(t) to additive error eps with confidence 1 - delta,
    /// via one +-1 Bernoulli batch per quadrature. Returns the estimate and
    /// whether the budget was clamped.
    pub fn estimate_coefficient(
        &mut self,
        t: f64,
        x: &PauliString,
        eps: f64,
        delta: f64,
    ) -> Result<(Complex64, bool)> {
        check_eps_delta(eps, delta)?;
        let exact = self.entry(t)?.spectrum.get(x);
        let (m, clamped) = self
            .cfg
            .sample_budget(4.0 * (4.0 / delta).ln() / (eps * eps));
        self.ledger.charge(2 * m, t);
        let value = match self.mode {
            OracleMode::Exact => exact,
            OracleMode::Shots => {
                let re = sampling::pm_one_mean(&mut self.rng, m, exact.re);
                let im = sampling::pm_one_mean(&mut self.rng, m, exact.im);
                Complex64::new(re, im)
            }
        };
        Ok((value, clamped))
    }

    /// Memory-less estimation of |Uhat_x(t)|^2 for every x in `set`:
    /// T = O(log(|set|/delta)/eps^2) rounds of (uniform MUB state, evolve,
    /// measure in that basis), debiased. In exact mode the debiased
    /// expectation collapses to |Uhat_x|^2 and is returned in closed form.
    pub fn memoryless_pauli_sampling(
        &mut self,
        t: f64,
        set: &[PauliString],
        eps: f64,
        delta: f64,
    ) -> Result<(Vec<f64>, bool)> {
        check_eps_delta(eps, delta)?;
        let size = set.len().max(2) as f64;
        let (rounds, clamped) = self
            .cfg
            .sample_budget((size / delta).ln() / (eps * eps));
        self.ledger.charge(rounds, t);
        match self.mode {
            OracleMode::Exact => {
                let entry = self.entry(t)?;
                Ok((set.iter().map(|x| entry.spectrum.prob(x)).collect(), clamped))
            }
            OracleMode::Shots => {
                let sampler = self.sampler(t)?;
                let freq = sampler.sample_frequencies(&mut self.rng, rounds)?;
                let nn = sampler.family().basis_size();
                let est = set
                    .iter()
                    .map(|x| debias_hit_frequency(freq[x.index()], nn))
                    .collect();
                Ok((est, clamped))
            }
        }
    }

    /// Memory-less estimate of the Hamiltonian coefficient lambda_x to
    /// additive error eps, by evolving for time eps, preparing
    /// (Id - sigma_{x'})/2^n and measuring sigma_{x''}. The exact-mode value
    /// carries the estimator's inherent O(eps) Taylor bias.
    pub fn memoryless_estimate_coefficient(
        &mut self,
        x: &PauliString,
        eps: f64,
        delta: f64,
    ) -> Result<(f64, bool)> {
        check_eps_delta(eps, delta)?;
        if x.is_identity() {
            return Err(Error::parameter(
                "memory-less coefficient estimation needs x != identity",
            ));
        }
        let (xp, xpp) = anticommuting_factors(x)?;
        let entry = self.entry(eps)?;
        // exact outcome mean Tr[sigma_{x''} U rho U^dagger],
        // rho = (Id - sigma_{x'}) / 2^n
        let dim = 1usize << self.n();
        let rho0 = (dense::identity(dim) - dense::pauli_matrix(&xp))
            * Complex64::new(1.0 / dim as f64, 0.0);
        let rho = &entry.unitary * rho0 * entry.unitary.adjoint();
        let mean = (dense::pauli_matrix(&xpp) * rho).trace();
        debug_assert!(mean.im.abs() < 1e-9);
        let (rounds, clamped) = self
            .cfg
            .sample_budget((2.0 / delta).ln() / eps.powi(4));
        self.ledger.charge(rounds, eps);
        let alpha = match self.mode {
            OracleMode::Exact => mean.re,
            OracleMode::Shots => sampling::pm_one_mean(&mut self.rng, rounds, mean.re),
        };
        // output alpha / (2 i eps a) with a = +i for the canonical factors
        Ok((-alpha / (2.0 * eps), clamped))
    }

    pub fn rng(&mut self) -> &mut ChaCha12Rng {
        &mut self.rng
    }
}

/// Query access to a fixed unitary (a raw one, or frozen Hamiltonian
/// evolution), as the junta tester consumes.
pub struct UnitaryOracle {
    unitary: CMatrix,
    spectrum: UnitarySpectrum,
    duration: f64,
    cfg: Config,
    mode: OracleMode,
    rng: ChaCha12Rng,
    seed: u64,
    ledger: Ledger,
    sampler: Option<Arc<MubSampler>>,
}

impl UnitaryOracle {
    pub fn from_unitary(u: CMatrix, seed: u64, mode: OracleMode, cfg: &Config) -> Result<Self> {
        let dim = u.nrows();
        if dim == 0 || !dim.is_power_of_two() || u.ncols() != dim {
            return Err(Error::validation("unitary must be square with power-of-two size"));
        }
        let n = dim.trailing_zeros();
        cfg.check_dense(n)?;
        if dense::unitarity_defect(&u) > 1e-9 {
            return Err(Error::validation("matrix is not unitary within 1e-9"));
        }
        let spectrum = UnitarySpectrum::of_matrix(&u)?;
        Ok(UnitaryOracle {
            unitary: u,
            spectrum,
            duration: 0.0,
            cfg: cfg.clone(),
            mode,
            rng: ChaCha12Rng::seed_from_u64(seed),
            seed,
            ledger: Ledger::default(),
            sampler: None,
        })
    }

    pub fn from_evolution(
        h: &Hamiltonian,
        t: f64,
        seed: u64,
        mode: OracleMode,
        cfg: &Config,
    ) -> Result<Self> {
        let u = evolution_unitary(h, t, cfg.dense_cap)?;
        let mut oracle = Self::from_unitary(u, seed, mode, cfg)?;
        oracle.duration = t.abs();
        Ok(oracle)
    }

    #[inline]
    pub fn n(&self) -> u32 {
        self.spectrum.n()
    }

    #[inline]
    pub fn mode(&self) -> OracleMode {
        self.mode
    }

    #[inline]
    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn ledger(&self) -> Ledger {
        self.ledger
    }

    pub fn spectrum(&self) -> &UnitarySpectrum {
        &self.spectrum
    }

    pub fn config_junta_delta(&self) -> f64 {
        self.cfg.junta_delta
    }

    pub fn config_budget(&self, formula: f64) -> (u64, bool) {
        self.cfg.sample_budget(formula)
    }

    pub fn charge(&mut self, queries: u64) {
        self.ledger.charge(queries, self.duration);
    }

    pub fn bell_counts(&mut self, shots: u64) -> Result<Vec<u64>> {
        self.ledger.charge(shots, self.duration);
        Ok(self.spectrum.sample_counts(&mut self.rng, shots))
    }

    fn sampler(&mut self) -> Result<Arc<MubSampler>> {
        if self.sampler.is_none() {
            let fam = Arc::new(MubFamily::new(self.n(), self.cfg.dense_cap)?);
            self.sampler = Some(Arc::new(MubSampler::new(fam, &self.unitary)?));
        }
        Ok(self.sampler.as_ref().unwrap().clone())
    }

    /// Memory-less estimates of |Uhat_x|^2 over `set`; see
    /// [`EvolutionOracle::memoryless_pauli_sampling`].
    pub fn memoryless_pauli_sampling(
        &mut self,
        set: &[PauliString],
        eps: f64,
        delta: f64,
    ) -> Result<(Vec<f64>, bool)> {
        check_eps_delta(eps, delta)?;
        let size = set.len().max(2) as f64;
        let (rounds, clamped) = self
            .cfg
            .sample_budget((size / delta).ln() / (eps * eps));
        self.ledger.charge(rounds, self.duration);
        match self.mode {
            OracleMode::Exact => Ok((set.iter().map(|x| self.spectrum.prob(x)).collect(), clamped)),
            OracleMode::Shots => {
                let sampler = self.sampler()?;
                let freq = sampler.sample_frequencies(&mut self.rng, rounds)?;
                let nn = sampler.family().basis_size();
                let est = set
                    .iter()
                    .map(|x| debias_hit_frequency(freq[x.index()], nn))
                    .collect();
                Ok((est, clamped))
            }
        }
    }
}

fn check_eps_delta(eps: f64, delta: f64) -> Result<()> {
    if !(eps > 0.0 && eps < 1.0) || !(delta > 0.0 && delta < 1.0) {
        return Err(Error::parameter(format!(
            "eps and delta must lie in (0, 1), got eps = {eps}, delta = {delta}"
        )));
    }
    Ok(())
}
