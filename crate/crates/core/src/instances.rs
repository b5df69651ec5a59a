//! Seeded Hamiltonian instance generators for experiments.
//!
//! Close/far promise instances are planted on a pairwise anticommuting
//! family of Pauli strings. For such a family H^2 = (sum lambda^2) Id, so
//! the operator norm equals the coefficient 2-norm exactly and both the
//! normalization and the structure distance can be dialed in closed form,
//! with no rejection loops on random matrices.

use crate::error::{Error, Result};
use crate::hamiltonian::Hamiltonian;
use crate::pauli::PauliString;
use rand::Rng;

/// Requested structural regime of a generated instance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InstanceKind {
    KLocal { k: u32 },
    SSparse { s: usize },
    KLocalSSparse { k: u32, s: usize },
    CloseToKLocal { k: u32, eps1: f64 },
    FarFromKLocal { k: u32, eps2: f64 },
    CloseToSSparse { s: usize, eps1: f64 },
    FarFromSSparse { s: usize, eps2: f64 },
}

#[derive(Debug, Clone)]
pub struct InstanceParams {
    /// Coefficient magnitude range before normalization.
    pub coeff_min: f64,
    pub coeff_max: f64,
    /// Term count for the unconstrained kinds (default scales with n).
    pub terms: Option<usize>,
    pub dense_cap: u32,
}

impl Default for InstanceParams {
    fn default() -> Self {
        InstanceParams {
            coeff_min: 0.4,
            coeff_max: 1.0,
            terms: None,
            dense_cap: crate::config::DEFAULT_DENSE_CAP,
        }
    }
}

/// The 2n + 1 pairwise anticommuting strings
/// X_1, Y_1, Z_1 X_2, Z_1 Y_2, ..., Z_1..Z_{n-1} X_n, Z_1..Z_{n-1} Y_n,
/// Z_1..Z_n, listed in non-decreasing weight order.
pub fn anticommuting_family(n: u32) -> Vec<PauliString> {
    let mut out = Vec::with_capacity(2 * n as usize + 1);
    let mut z_prefix = 0u64;
    for i in 0..n {
        let bit = 1u64 << i;
        out.push(PauliString::new(n, bit, z_prefix).unwrap());
        out.push(PauliString::new(n, bit, z_prefix | bit).unwrap());
        z_prefix |= bit;
    }
    out.push(PauliString::new(n, 0, z_prefix).unwrap());
    out
}

fn random_magnitudes(count: usize, params: &InstanceParams, rng: &mut impl Rng) -> Vec<f64> {
    (0..count)
        .map(|_| {
            let m = rng.random_range(params.coeff_min..=params.coeff_max);
            if rng.random_bool(0.5) {
                m
            } else {
                -m
            }
        })
        .collect()
}

fn random_string_with_weight(n: u32, max_weight: u32, rng: &mut impl Rng) -> PauliString {
    loop {
        let w = rng.random_range(1..=max_weight.min(n));
        let mut qubits: Vec<u32> = (0..n).collect();
        // partial Fisher-Yates for the support
        for i in 0..w as usize {
            let j = rng.random_range(i..qubits.len());
            qubits.swap(i, j);
        }
        let mut a = 0u64;
        let mut b = 0u64;
        for &q in &qubits[..w as usize] {
            match rng.random_range(0..3) {
                0 => a |= 1 << q,
                1 => {
                    a |= 1 << q;
                    b |= 1 << q;
                }
                _ => b |= 1 << q,
            }
        }
        let s = PauliString::new(n, a, b).unwrap();
        if !s.is_identity() {
            return s;
        }
    }
}

/// Scale coefficients so the planted block carries 2-norm sqrt(1 - d^2) and
/// the residual block carries exactly d.
fn split_mass(planted: &mut [f64], residual: &mut [f64], d: f64) {
    let pn: f64 = planted.iter().map(|c| c * c).sum::<f64>().sqrt();
    let target_p = (1.0 - d * d).max(0.0).sqrt();
    if pn > 0.0 {
        for c in planted.iter_mut() {
            *c *= target_p / pn;
        }
    }
    let rn: f64 = residual.iter().map(|c| c * c).sum::<f64>().sqrt();
    if rn > 0.0 {
        for c in residual.iter_mut() {
            *c *= d / rn;
        }
    }
}

fn build_from(
    n: u32,
    strings: &[PauliString],
    coeffs: &[f64],
) -> Result<Hamiltonian> {
    Hamiltonian::from_terms(
        n,
        strings
            .iter()
            .zip(coeffs.iter())
            .filter(|(_, &c)| c != 0.0)
            .map(|(x, &c)| (*x, c)),
    )
}

/// Random Hamiltonian on distinct supplied strings, rescaled so the exact
/// operator norm is 1.
fn random_on_strings(
    n: u32,
    strings: Vec<PauliString>,
    params: &InstanceParams,
    rng: &mut impl Rng,
) -> Result<Hamiltonian> {
    let coeffs = random_magnitudes(strings.len(), params, rng);
    let h = build_from(n, &strings, &coeffs)?;
    let norm = h.operator_norm(params.dense_cap)?;
    if norm == 0.0 {
        return Err(Error::Generation("degenerate zero instance".into()));
    }
    Ok(h.scale(1.0 / norm))
}

fn distinct_random_strings(
    n: u32,
    count: usize,
    max_weight: u32,
    rng: &mut impl Rng,
) -> Result<Vec<PauliString>> {
    let capacity = crate::pauli::all_strings(n)
        .filter(|x| !x.is_identity() && x.weight() <= max_weight)
        .count();
    if count > capacity {
        return Err(Error::Generation(format!(
            "requested {count} terms but only {capacity} strings of weight <= {max_weight} exist"
        )));
    }
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let s = random_string_with_weight(n, max_weight, rng);
        if seen.insert(s) {
            out.push(s);
        }
    }
    Ok(out)
}

/// Anticommuting close/far instance: `planted` strings carry the structured
/// mass, `residual` strings carry exactly `d` of 2-norm, and the overall
/// operator norm is exactly 1.
fn planted_instance(
    n: u32,
    planted: Vec<PauliString>,
    residual: Vec<PauliString>,
    d: f64,
    params: &InstanceParams,
    rng: &mut impl Rng,
) -> Result<Hamiltonian> {
    let mut pc = random_magnitudes(planted.len(), params, rng);
    // Equal residual magnitudes keep every residual term strictly below the
    // planted floor, which pins the sorted order.
    let mut rc = vec![1.0; residual.len()];
    for c in rc.iter_mut() {
        if rng.random_bool(0.5) {
            *c = -*c;
        }
    }
    split_mass(&mut pc, &mut rc, d);
    let strings: Vec<PauliString> = planted.iter().chain(residual.iter()).copied().collect();
    let coeffs: Vec<f64> = pc.iter().chain(rc.iter()).copied().collect();
    build_from(n, &strings, &coeffs)
}

/// Sparse close/far instance where the top-s set is exactly the planted set:
/// all residual magnitudes are equal at tau = d / sqrt(residuals) and must
/// stay strictly below the smallest planted coefficient. Progressively
/// flattens the planted draw toward equal magnitudes before declaring the
/// request infeasible (or, when `shrink` is set, lowering d instead).
fn planted_sparse_instance(
    n: u32,
    planted: Vec<PauliString>,
    residual: Vec<PauliString>,
    mut d: f64,
    params: &InstanceParams,
    shrink_allowed: bool,
    rng: &mut impl Rng,
) -> Result<Hamiltonian> {
    if residual.is_empty() || d == 0.0 {
        return planted_instance(n, planted, residual, 0.0, params, rng);
    }
    loop {
        let tau = d / (residual.len() as f64).sqrt();
        for attempt in 0..4 {
            let lo = params.coeff_min
                + (params.coeff_max - params.coeff_min) * attempt as f64 / 3.0;
            let mut flat = params.clone();
            flat.coeff_min = lo;
            let mut pc = random_magnitudes(planted.len(), &flat, rng);
            let mut rc = random_magnitudes(residual.len(), params, rng)
                .iter()
                .map(|c| c.signum())
                .collect::<Vec<f64>>();
            split_mass(&mut pc, &mut rc, d);
            let min_planted = pc.iter().fold(f64::INFINITY, |m, c| m.min(c.abs()));
            if tau < 0.95 * min_planted {
                let strings: Vec<PauliString> =
                    planted.iter().chain(residual.iter()).copied().collect();
                let coeffs: Vec<f64> = pc.iter().chain(rc.iter()).copied().collect();
                return build_from(n, &strings, &coeffs);
            }
        }
        if !shrink_allowed {
            return Err(Error::Generation(format!(
                "residual mass {d:.3} over {} slots would overtake the planted \
                 coefficients even at equal magnitudes (need d^2 s < 0.9 p (1 - d^2)); \
                 lower eps2 or s",
                residual.len()
            )));
        }
        d *= 0.8;
        if d < 1e-6 {
            return planted_instance(n, planted, residual, 0.0, params, rng);
        }
    }
}

/// Generate a traceless Hamiltonian with ||H||_inf <= 1 whose exact
/// structure distance certifies the requested kind; deterministic under the
/// rng seed. The returned instance is always post-verified.
pub fn generate_instance(
    kind: InstanceKind,
    n: u32,
    params: &InstanceParams,
    rng: &mut impl Rng,
) -> Result<Hamiltonian> {
    if n == 0 {
        return Err(Error::parameter("n must be positive"));
    }
    let family = anticommuting_family(n);
    let slots = family.len();
    let h = match kind {
        InstanceKind::KLocal { k } => {
            if k == 0 || k > n {
                return Err(Error::Generation(format!("k = {k} out of range 1..={n}")));
            }
            let count = params.terms.unwrap_or((2 * n as usize).min(6));
            let strings = distinct_random_strings(n, count, k, rng)?;
            random_on_strings(n, strings, params, rng)?
        }
        InstanceKind::SSparse { s } => {
            if s == 0 {
                return Err(Error::Generation("s must be positive".into()));
            }
            let count = s.min(params.terms.unwrap_or(s));
            let strings = distinct_random_strings(n, count, n, rng)?;
            random_on_strings(n, strings, params, rng)?
        }
        InstanceKind::KLocalSSparse { k, s } => {
            if k == 0 || k > n || s == 0 {
                return Err(Error::Generation(format!("bad (k, s) = ({k}, {s})")));
            }
            let strings = distinct_random_strings(n, s, k, rng)?;
            random_on_strings(n, strings, params, rng)?
        }
        InstanceKind::CloseToKLocal { k, eps1 } => {
            if !(0.0..=1.0).contains(&eps1) {
                return Err(Error::Generation(format!("eps1 = {eps1} outside [0, 1]")));
            }
            let planted: Vec<_> = family.iter().filter(|x| x.weight() <= k).copied().collect();
            let residual: Vec<_> = family.iter().filter(|x| x.weight() > k).copied().collect();
            if planted.is_empty() {
                return Err(Error::Generation(format!("no weight-<={k} slots at n = {n}")));
            }
            let d = if residual.is_empty() || eps1 == 0.0 {
                0.0
            } else {
                eps1 * rng.random_range(0.3..0.9)
            };
            planted_instance(n, planted, residual, d, params, rng)?
        }
        InstanceKind::FarFromKLocal { k, eps2 } => {
            if !(0.0..=1.0).contains(&eps2) || eps2 == 0.0 {
                return Err(Error::Generation(format!("eps2 = {eps2} outside (0, 1]")));
            }
            if k >= n {
                return Err(Error::Generation(format!(
                    "far-from-{k}-local infeasible at n = {n}: every instance is {k}-local"
                )));
            }
            let planted: Vec<_> = family.iter().filter(|x| x.weight() <= k).copied().collect();
            let residual: Vec<_> = family.iter().filter(|x| x.weight() > k).copied().collect();
            let headroom = 1.0 - eps2;
            let d = (eps2 + headroom * rng.random_range(0.05..0.3)).min(1.0);
            planted_instance(n, planted, residual, d, params, rng)?
        }
        InstanceKind::CloseToSSparse { s, eps1 } => {
            if s == 0 || !(0.0..=1.0).contains(&eps1) {
                return Err(Error::Generation(format!("bad (s, eps1) = ({s}, {eps1})")));
            }
            let planted_count = s.min(slots);
            let residual_count = (slots - planted_count).min(4);
            let d0 = if eps1 == 0.0 || residual_count == 0 {
                0.0
            } else {
                eps1 * rng.random_range(0.3..0.9)
            };
            let planted = family[..planted_count].to_vec();
            let residual = family[planted_count..planted_count + residual_count].to_vec();
            planted_sparse_instance(n, planted, residual, d0, params, true, rng)?
        }
        InstanceKind::FarFromSSparse { s, eps2 } => {
            if s == 0 || !(0.0..=1.0).contains(&eps2) || eps2 == 0.0 {
                return Err(Error::Generation(format!("bad (s, eps2) = ({s}, {eps2})")));
            }
            if s + 1 > slots {
                return Err(Error::Generation(format!(
                    "far-from-{s}-sparse needs at least {} anticommuting slots, have {slots}",
                    s + 1
                )));
            }
            let headroom = 1.0 - eps2;
            let d0 = (eps2 + headroom * rng.random_range(0.02..0.15)).min(0.999);
            let planted = family[..s].to_vec();
            let residual = family[s..].to_vec();
            planted_sparse_instance(n, planted, residual, d0, params, false, rng)?
        }
    };
    verify_instance(&h, kind, params)?;
    Ok(h)
}

/// Post-check: traceless, normalized, and the exact distance lands in the
/// requested regime.
fn verify_instance(h: &Hamiltonian, kind: InstanceKind, params: &InstanceParams) -> Result<()> {
    if !h.is_traceless() {
        return Err(Error::Internal("generated instance has a trace".into()));
    }
    let norm = h.operator_norm(params.dense_cap)?;
    if norm > 1.0 + 1e-9 {
        return Err(Error::Internal(format!(
            "generated instance has operator norm {norm} > 1"
        )));
    }
    let ok = match kind {
        InstanceKind::KLocal { k } | InstanceKind::KLocalSSparse { k, .. } => {
            h.distance_to_local(k) == 0.0
        }
        InstanceKind::SSparse { s } => h.support_size() <= s,
        InstanceKind::CloseToKLocal { k, eps1 } => h.distance_to_local(k) <= eps1 + 1e-12,
        InstanceKind::FarFromKLocal { k, eps2 } => h.distance_to_local(k) >= eps2 - 1e-12,
        InstanceKind::CloseToSSparse { s, eps1 } => h.distance_to_sparse(s) <= eps1 + 1e-12,
        InstanceKind::FarFromSSparse { s, eps2 } => h.distance_to_sparse(s) >= eps2 - 1e-12,
    };
    if ok {
        if let InstanceKind::KLocalSSparse { s, .. } = kind {
            if h.support_size() > s {
                return Err(Error::Internal("instance exceeds requested sparsity".into()));
            }
        }
        Ok(())
    } else {
        Err(Error::Internal(format!(
            "generated instance misses the requested regime for {kind:?}"
        )))
    }
}
