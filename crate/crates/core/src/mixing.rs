//! Periodic mixing functions and the modulated generators they induce.
//!
//! A `T`-periodic mixer `p(t) = Σ_k b_k e^{j2πkt/T}` turns `x` into a signal
//! of the same shift-invariant form with generators
//! `γ̂_n(ω) = Σ_k b_k φ̂_n(ω - 2kπ/T)`. Mixers are stored as a finite,
//! sorted list of Fourier coefficients, so every sum here is exact.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::generators::{Generator, GeneratorSet};
use crate::grammian::FrequencyGrid;
use crate::hadamard::hadamard;
use crate::linalg::CMatrix;
use crate::recoverability::{phi_matrix, StackOrder};
use crate::{Error, Result};

pub const DEFAULT_KMAX: usize = 4096;
pub const DEFAULT_RETRIES: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct Mixer {
    period: f64,
    coefficients: Vec<(i64, Complex64)>,
    pattern: Option<Vec<i8>>,
}

impl Mixer {
    pub fn period(&self) -> f64 {
        self.period
    }

    /// `(k, b_k)` sorted by `k`.
    pub fn coefficients(&self) -> &[(i64, Complex64)] {
        &self.coefficients
    }

    pub fn coefficient(&self, k: i64) -> Complex64 {
        match self.coefficients.binary_search_by_key(&k, |c| c.0) {
            Ok(i) => self.coefficients[i].1,
            Err(_) => Complex64::new(0.0, 0.0),
        }
    }

    /// The `±1` pattern this mixer was built from, if any.
    pub fn pattern(&self) -> Option<&[i8]> {
        self.pattern.as_deref()
    }

    /// Largest `|k|` with a stored coefficient.
    pub fn kmax(&self) -> i64 {
        self.coefficients.iter().map(|c| c.0.abs()).max().unwrap_or(0)
    }

    /// `Σ_k |b_k|²`.
    pub fn energy(&self) -> f64 {
        self.coefficients.iter().map(|c| c.1.norm_sqr()).sum()
    }

    /// Coefficients with `lo ≤ k ≤ hi`.
    fn window(&self, lo: i64, hi: i64) -> &[(i64, Complex64)] {
        let a = self.coefficients.partition_point(|c| c.0 < lo);
        let b = self.coefficients.partition_point(|c| c.0 <= hi);
        &self.coefficients[a..b.max(a)]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixerBank {
    mixers: Vec<Mixer>,
}

impl MixerBank {
    pub fn new(mixers: Vec<Mixer>) -> Result<Self> {
        let first = mixers.first().ok_or_else(|| Error::invalid("a mixer bank needs at least one mixer"))?;
        if mixers.iter().any(|m| m.period != first.period) {
            return Err(Error::invalid("mixers in a bank must share the period"));
        }
        Ok(MixerBank { mixers })
    }

    pub fn mixers(&self) -> &[Mixer] {
        &self.mixers
    }

    pub fn len(&self) -> usize {
        self.mixers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mixers.is_empty()
    }

    pub fn period(&self) -> f64 {
        self.mixers[0].period
    }

    /// Explains why a bank cannot reach full column rank for `n` generators.
    pub fn rank_warning(&self, n: usize) -> Option<String> {
        (self.len() < n).then(|| format!("bank has {} channels for {n} generators; the system cannot reach rank {n}", self.len()))
    }
}

/// Preprocessing applied before the lowpass filter.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum Mixing {
    #[default]
    None,
    Single(Mixer),
    Bank(MixerBank),
}

impl Mixing {
    pub fn period(&self) -> Option<f64> {
        match self {
            Mixing::None => None,
            Mixing::Single(m) => Some(m.period()),
            Mixing::Bank(b) => Some(b.period()),
        }
    }
}

fn check_period(period: f64) -> Result<()> {
    if !(period > 0.0 && period.is_finite()) {
        return Err(Error::invalid(format!("mixer period must be positive, got {period}")));
    }
    Ok(())
}

/// Mixer with exactly the given Fourier coefficients.
pub fn mixer_from_fourier(coeffs: &[(i64, Complex64)], period: f64) -> Result<Mixer> {
    check_period(period)?;
    let mut c = coeffs.to_vec();
    c.sort_by_key(|x| x.0);
    if c.windows(2).any(|w| w[0].0 == w[1].0) {
        return Err(Error::invalid("duplicate Fourier index in mixer"));
    }
    if c.iter().any(|x| !x.1.re.is_finite() || !x.1.im.is_finite()) {
        return Err(Error::invalid("mixer coefficients must be finite"));
    }
    Ok(Mixer {
        period,
        coefficients: c,
        pattern: None,
    })
}

/// `p ≡ 1`.
pub fn trivial_mixer(period: f64) -> Result<Mixer> {
    mixer_from_fourier(&[(0, Complex64::new(1.0, 0.0))], period)
}

/// `α̂_k = Σ_n α_n e^{-j2πnk/M}`.
fn pattern_dft(pattern: &[i8], k: i64) -> Complex64 {
    let m = pattern.len() as i64;
    let r = k.rem_euclid(m);
    pattern
        .iter()
        .enumerate()
        .map(|(n, &a)| {
            let phase = -2.0 * PI * ((n as i64 * r) % m) as f64 / m as f64;
            Complex64::from_polar(a as f64, phase)
        })
        .sum()
}

/// Weight `w_k` with `b_k = w_k α̂_k`: `1/M` at `k = 0`, otherwise
/// `(1 - e^{-j2πk/M})/(j2πk)`, exactly zero when `M | k`.
fn binary_weight(m: usize, k: i64) -> Complex64 {
    if k == 0 {
        return Complex64::new(1.0 / m as f64, 0.0);
    }
    let r = k.rem_euclid(m as i64);
    if r == 0 {
        return Complex64::new(0.0, 0.0);
    }
    let e = Complex64::from_polar(1.0, -2.0 * PI * r as f64 / m as f64);
    (Complex64::new(1.0, 0.0) - e) / Complex64::new(0.0, 2.0 * PI * k as f64)
}

/// Mixer taking the value `α_n` on the `n`-th of `M` equal intervals of
/// each period.
pub fn binary_mixer(pattern: &[i8], period: f64, kmax: usize) -> Result<Mixer> {
    check_period(period)?;
    let m = pattern.len();
    if m == 0 {
        return Err(Error::invalid("binary pattern is empty"));
    }
    if let Some(bad) = pattern.iter().find(|&&a| a != 1 && a != -1) {
        return Err(Error::invalid(format!("binary pattern entries must be ±1, got {bad}")));
    }
    if kmax < m {
        return Err(Error::invalid(format!("Kmax = {kmax} must be at least M = {m}")));
    }
    let alpha: Vec<Complex64> = (0..m as i64).map(|r| pattern_dft(pattern, r)).collect();
    let k = kmax as i64;
    let coefficients = (-k..=k)
        .filter_map(|kk| {
            let w = binary_weight(m, kk);
            (w != Complex64::new(0.0, 0.0)).then(|| (kk, w * alpha[kk.rem_euclid(m as i64) as usize]))
        })
        .collect();
    Ok(Mixer {
        period,
        coefficients,
        pattern: Some(pattern.to_vec()),
    })
}

/// `γ̂_n(ω) = Σ_k b_k φ̂_n(ω - 2kπ/T)`. Exact: the sum runs over the stored
/// coefficients, restricted to those that can meet the support of `φ̂_n`.
pub fn gamma_ft(gens: &GeneratorSet, mixer: &Mixer, n: usize, omega: f64) -> Complex64 {
    gamma_of(gens.get(n), gens.spectral_period(), mixer, omega)
}

fn gamma_of(gen: &Generator, step: f64, mixer: &Mixer, omega: f64) -> Complex64 {
    let coeffs = match gen.band_support() {
        Some((lo, hi)) => {
            let kmin = ((omega - hi) / step).floor() as i64 - 1;
            let kmax = ((omega - lo) / step).ceil() as i64 + 1;
            mixer.window(kmin, kmax)
        }
        None => mixer.coefficients(),
    };
    let mut acc = Complex64::new(0.0, 0.0);
    for &(k, b) in coeffs {
        acc += b * gen.eval(omega - k as f64 * step);
    }
    acc
}

/// System matrix for mixed observations.
///
/// * no mixing: `Φ_L(ω)`;
/// * single mixer: rows `γ̂_n(ω + m_r·π/T)` stacked like `Φ_L`;
/// * bank: one row per channel, entry `(ℓ, n) = γ̂^ℓ_n(ω)`; `order` is
///   ignored because each channel is lowpassed to `π/T`.
pub fn gamma_matrix(gens: &GeneratorSet, mixing: &Mixing, omega: f64, order: StackOrder) -> CMatrix {
    let step = gens.spectral_period();
    match mixing {
        Mixing::None => phi_matrix(gens, omega, order),
        Mixing::Single(mixer) => {
            let unit = PI / gens.period();
            let rows = order.row_multiples();
            CMatrix::from_fn(rows.len(), gens.len(), |r, n| gamma_of(gens.get(n), step, mixer, omega + rows[r] as f64 * unit))
        }
        Mixing::Bank(bank) => CMatrix::from_fn(bank.len(), gens.len(), |l, n| gamma_of(gens.get(n), step, &bank.mixers[l], omega)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DesignStrategy {
    Hadamard,
    Random { seed: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignCertificate {
    pub strategy: DesignStrategy,
    /// Rows of `Q`, one `±1` pattern per channel.
    pub q: Vec<Vec<i8>>,
    /// `|det Q|`, or `√det(QQᵀ)` when `Q` is not square.
    pub det_q: f64,
    /// Number of random draws used (1 for Hadamard).
    pub draws: usize,
    /// `max_ℓ (1 - Σ_k |b^ℓ_k|²)`: energy left out by the finite `Kmax`.
    pub tail_energy: f64,
}

fn gram_det(q: &[Vec<i8>]) -> f64 {
    let l = q.len();
    let m = q[0].len();
    let a = DMatrix::from_fn(l, m, |i, j| q[i][j] as f64);
    if l == m {
        a.determinant().abs()
    } else {
        (&a * a.transpose()).determinant().abs().sqrt()
    }
}

/// `N` binary mixers of `M` intervals whose pattern matrix `Q` has full row
/// rank.
pub fn design_binary_bank(n: usize, m: usize, strategy: DesignStrategy, period: f64, kmax: usize) -> Result<(MixerBank, DesignCertificate)> {
    design_binary_bank_with_retries(n, m, strategy, period, kmax, DEFAULT_RETRIES)
}

pub fn design_binary_bank_with_retries(
    n: usize,
    m: usize,
    strategy: DesignStrategy,
    period: f64,
    kmax: usize,
    retries: usize,
) -> Result<(MixerBank, DesignCertificate)> {
    if n == 0 || m < n {
        return Err(Error::invalid(format!("need 1 ≤ N ≤ M, got N = {n}, M = {m}")));
    }
    let (q, det_q, draws) = match strategy {
        DesignStrategy::Hadamard => {
            let h = hadamard(m)?;
            let q: Vec<Vec<i8>> = h.into_iter().take(n).collect();
            let det = gram_det(&q);
            (q, det, 1)
        }
        DesignStrategy::Random { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut found = None;
            for draw in 1..=retries {
                let q: Vec<Vec<i8>> = (0..n)
                    .map(|_| (0..m).map(|_| if rng.random_bool(0.5) { 1 } else { -1 }).collect())
                    .collect();
                let det = gram_det(&q);
                if det >= 0.5 {
                    found = Some((q, det, draw));
                    break;
                }
            }
            found.ok_or(Error::RetriesExhausted(retries))?
        }
    };
    let mixers = q.iter().map(|row| binary_mixer(row, period, kmax)).collect::<Result<Vec<_>>>()?;
    let tail_energy = mixers.iter().map(|mx| 1.0 - mx.energy()).fold(0.0, f64::max);
    Ok((
        MixerBank::new(mixers)?,
        DesignCertificate {
            strategy,
            q,
            det_q,
            draws,
            tail_energy,
        },
    ))
}

/// Coefficient operator `Q·F*·W` restricted to the columns `ks`:
/// `(F*)_{n,k} = e^{-j2πnk/M}` and `W = diag(w_k)`.
pub fn qfw_matrix(q: &[Vec<i8>], ks: &[i64]) -> CMatrix {
    let l = q.len();
    let m = q[0].len();
    let qm = CMatrix::from_fn(l, m, |i, j| Complex64::new(q[i][j] as f64, 0.0));
    let f = CMatrix::from_fn(m, ks.len(), |nn, c| {
        let r = (nn as i64 * ks[c]).rem_euclid(m as i64);
        Complex64::from_polar(1.0, -2.0 * PI * r as f64 / m as f64)
    });
    let w = CMatrix::from_fn(ks.len(), ks.len(), |a, b| if a == b { binary_weight(m, ks[a]) } else { Complex64::new(0.0, 0.0) });
    qm * f * w
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShiftMixer {
    pub k0: i64,
    /// `min |φ̂(ω - 2k0π/T)|` over the grid and the band edges.
    pub min_magnitude: f64,
}

/// Searches for a pure shift `e^{j2πk0t/T}` after which `φ̂` has no zero on
/// the base band. Returns `None` when no shift in the search window keeps
/// the minimum above `threshold`.
pub fn design_shift_mixer(gen: &Generator, period: f64, grid: &FrequencyGrid, threshold: f64) -> Option<ShiftMixer> {
    let step = 2.0 * PI / period;
    let edge = PI / period;
    let window = if let Some(d) = gen.box_half_width() {
        (4.0 * d / period).ceil() as i64 + 2
    } else if let Some((lo, hi)) = gen.band_support() {
        let a = ((-edge - hi) / step).floor().abs();
        let b = ((edge - lo) / step).ceil().abs();
        a.max(b) as i64 + 1
    } else {
        8
    };
    let mut probes = grid.points();
    probes.push(-edge);
    probes.push(edge);
    let mut best: Option<ShiftMixer> = None;
    let mut candidates: Vec<i64> = (-window..=window).collect();
    candidates.sort_by_key(|k| (k.abs(), *k < 0));
    for k0 in candidates {
        let min = probes
            .iter()
            .map(|&w| gen.eval(w - k0 as f64 * step).norm())
            .fold(f64::INFINITY, f64::min);
        if best.is_none_or(|b| min > b.min_magnitude) {
            best = Some(ShiftMixer { k0, min_magnitude: min });
        }
    }
    best.filter(|b| b.min_magnitude > threshold)
}

impl ShiftMixer {
    pub fn mixer(&self, period: f64) -> Result<Mixer> {
        mixer_from_fourier(&[(self.k0, Complex64::new(1.0, 0.0))], period)
    }
}
