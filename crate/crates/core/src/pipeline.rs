//! Forward simulation and recovery of expansion coefficients.
//!
//! Observations are represented by their spectra `ŷ` evaluated where the
//! stacked system needs them, so nothing is ever discretized in time. The
//! forward model evaluates `x̂` directly at every shifted frequency and is
//! therefore an independent check of the stacked matrices used for
//! recovery.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::FftPlanner;

use crate::generators::GeneratorSet;
use crate::grammian::{riesz_bounds, sweep_extrema, Bounds, FrequencyGrid, TruncationPolicy};
use crate::linalg::{eigen_extremes, gram, least_squares, CMatrix, CVector};
use crate::mixing::{gamma_matrix, Mixer, Mixing};
use crate::recoverability::{phi_matrix, psi_matrix, psi_shifts, ratio_is_integer, snapped_ratio, stack_order, tc_from_cutoff, Parity};
use crate::{par, Error, Result};

/// Finitely supported sequences `a_n[k]`, `k ∈ [k_min, k_max]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientSequences {
    kmin: i64,
    values: Vec<Vec<Complex64>>,
}

impl CoefficientSequences {
    /// `values[n][i]` is `a_n[kmin + i]`.
    pub fn new(kmin: i64, values: Vec<Vec<Complex64>>) -> Result<Self> {
        let len = values.first().map(Vec::len).ok_or_else(|| Error::invalid("need at least one sequence"))?;
        if len == 0 || values.iter().any(|v| v.len() != len) {
            return Err(Error::invalid("sequences must share a nonempty support"));
        }
        if values.iter().flatten().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::invalid("coefficients must be finite"));
        }
        Ok(CoefficientSequences { kmin, values })
    }

    pub fn zeros(n: usize, kmin: i64, kmax: i64) -> Result<Self> {
        if kmax < kmin {
            return Err(Error::invalid("empty coefficient support"));
        }
        Self::new(kmin, vec![vec![Complex64::new(0.0, 0.0); (kmax - kmin + 1) as usize]; n])
    }

    /// Independent standard normal real and imaginary parts, drawn in
    /// sequence-major order from a ChaCha8 stream.
    pub fn random(n: usize, kmin: i64, kmax: i64, seed: u64) -> Result<Self> {
        let mut s = Self::zeros(n, kmin, kmax)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for seq in &mut s.values {
            for z in seq.iter_mut() {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                *z = Complex64::new(re, im);
            }
        }
        Ok(s)
    }

    pub fn count(&self) -> usize {
        self.values.len()
    }

    pub fn kmin(&self) -> i64 {
        self.kmin
    }

    pub fn kmax(&self) -> i64 {
        self.kmin + self.support_len() as i64 - 1
    }

    pub fn support_len(&self) -> usize {
        self.values[0].len()
    }

    pub fn sequence(&self, n: usize) -> &[Complex64] {
        &self.values[n]
    }

    pub fn get(&self, n: usize, k: i64) -> Complex64 {
        if k < self.kmin || k > self.kmax() {
            Complex64::new(0.0, 0.0)
        } else {
            self.values[n][(k - self.kmin) as usize]
        }
    }

    pub fn set(&mut self, n: usize, k: i64, v: Complex64) {
        assert!(k >= self.kmin && k <= self.kmax(), "index outside support");
        self.values[n][(k - self.kmin) as usize] = v;
    }

    /// `Σ_n Σ_k |a_n[k]|²`.
    pub fn energy(&self) -> f64 {
        self.values.iter().flatten().map(|z| z.norm_sqr()).sum()
    }

    /// `â_n(e^{jωT}) = Σ_k a_n[k] e^{-jωkT}`.
    pub fn dtft(&self, n: usize, omega: f64, period: f64) -> Complex64 {
        self.values[n]
            .iter()
            .enumerate()
            .map(|(i, &a)| a * Complex64::from_polar(1.0, -omega * (self.kmin + i as i64) as f64 * period))
            .sum()
    }

    /// `‖self - reference‖ / ‖reference‖` over the union of supports, 0 when
    /// both vanish.
    pub fn relative_error(&self, reference: &CoefficientSequences) -> Result<f64> {
        if self.count() != reference.count() {
            return Err(Error::invalid("sequence counts differ"));
        }
        let lo = self.kmin.min(reference.kmin);
        let hi = self.kmax().max(reference.kmax());
        let mut diff = 0.0;
        for n in 0..self.count() {
            for k in lo..=hi {
                diff += (self.get(n, k) - reference.get(n, k)).norm_sqr();
            }
        }
        let norm = reference.energy();
        if norm == 0.0 {
            return Ok(if diff == 0.0 { 0.0 } else { f64::INFINITY });
        }
        Ok((diff / norm).sqrt())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Relative singular value cut for the pointwise pseudoinverse.
    pub pinv: f64,
    /// Allowed energy outside the declared support, relative to the total.
    pub leakage: f64,
    /// Pass threshold on normalized eigenvalue minima.
    pub threshold: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            pinv: 1e-10,
            leakage: 1e-8,
            threshold: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub generators: GeneratorSet,
    /// Lowpass cutoff `π/T_c` in rad/s.
    pub cutoff: f64,
    pub mixing: Mixing,
    pub coefficients: CoefficientSequences,
    pub grid: usize,
    pub tolerances: Tolerances,
    pub policy: TruncationPolicy,
    /// Skip the recoverability pre-check and per-frequency rank failures.
    pub force: bool,
}

impl Scenario {
    pub fn new(generators: GeneratorSet, cutoff: f64, mixing: Mixing, coefficients: CoefficientSequences, grid: usize) -> Result<Self> {
        let s = Scenario {
            generators,
            cutoff,
            mixing,
            coefficients,
            grid,
            tolerances: Tolerances::default(),
            policy: TruncationPolicy::default(),
            force: false,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn period(&self) -> f64 {
        self.generators.period()
    }

    pub fn frequency_grid(&self) -> Result<FrequencyGrid> {
        FrequencyGrid::new(self.period(), self.grid)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.cutoff > 0.0 && self.cutoff.is_finite()) {
            return Err(Error::invalid("cutoff must be positive"));
        }
        if !self.grid.is_power_of_two() || self.grid < 2 {
            return Err(Error::invalid(format!("grid size {} is not a power of two", self.grid)));
        }
        let need = 4 * self.coefficients.support_len();
        if self.grid < need {
            return Err(Error::invalid(format!("grid size {} is below 4 × support length = {need}", self.grid)));
        }
        if self.coefficients.count() != self.generators.len() {
            return Err(Error::invalid(format!(
                "{} coefficient sequences for {} generators",
                self.coefficients.count(),
                self.generators.len()
            )));
        }
        if let Some(p) = self.mixing.period() {
            if (p - self.period()).abs() > 1e-12 * self.period() {
                return Err(Error::invalid("mixer period must equal the shift period T"));
            }
        }
        let t = self.tolerances;
        if !(t.pinv > 0.0 && t.leakage > 0.0 && t.threshold > 0.0) {
            return Err(Error::invalid("tolerances must be positive"));
        }
        self.policy.validate()
    }
}

/// `x̂(ω) = Σ_n â_n(e^{jωT}) φ̂_n(ω)`.
pub fn synthesize_spectrum(gens: &GeneratorSet, coeffs: &CoefficientSequences, omega: f64) -> Complex64 {
    (0..gens.len())
        .map(|n| {
            let phi = gens.get(n).eval(omega);
            if phi == Complex64::new(0.0, 0.0) {
                phi
            } else {
                coeffs.dtft(n, omega, gens.period()) * phi
            }
        })
        .sum()
}

fn mixed_spectrum(gens: &GeneratorSet, coeffs: &CoefficientSequences, mixer: &Mixer, omega: f64) -> Complex64 {
    let step = gens.spectral_period();
    let mut acc = Complex64::new(0.0, 0.0);
    let window = gens.support_hull().map(|(lo, hi)| (((omega - hi) / step).floor() as i64 - 1, ((omega - lo) / step).ceil() as i64 + 1));
    for &(k, b) in mixer.coefficients() {
        if let Some((lo, hi)) = window {
            if k < lo || k > hi {
                continue;
            }
        }
        acc += b * synthesize_spectrum(gens, coeffs, omega - k as f64 * step);
    }
    acc
}

/// `ŷ_ℓ(ω)` for every channel: the lowpassed, possibly mixed signal.
/// Each channel of a bank is lowpassed to `π/T`.
pub fn channel_outputs(gens: &GeneratorSet, coeffs: &CoefficientSequences, mixing: &Mixing, cutoff: f64, omega: f64) -> Vec<Complex64> {
    let zero = Complex64::new(0.0, 0.0);
    match mixing {
        Mixing::None => vec![if omega.abs() > cutoff { zero } else { synthesize_spectrum(gens, coeffs, omega) }],
        Mixing::Single(m) => vec![if omega.abs() > cutoff { zero } else { mixed_spectrum(gens, coeffs, m, omega) }],
        Mixing::Bank(bank) => {
            let band = PI / gens.period();
            bank.mixers()
                .iter()
                .map(|m| if omega.abs() > band { zero } else { mixed_spectrum(gens, coeffs, m, omega) })
                .collect()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SystemKind {
    /// `Φ_L` rows at `ω + m·π/T`.
    Phi,
    /// Extended matrix of lowpassed generators, for non-integer `T/T_c`.
    Psi,
    /// Single mixer, rows stacked like `Φ_L`.
    Gamma,
    /// One row per channel of a bank.
    Bank,
}

/// `A(ω)` together with where each row's measurement lives.
#[derive(Debug, Clone, PartialEq)]
pub struct StackedSystem {
    pub kind: SystemKind,
    pub matrix: CMatrix,
    /// `(channel, frequency)` per row.
    pub measurements: Vec<(usize, f64)>,
    /// The unknown is `â(e^{j(ω - π/T)T})` rather than `â(e^{jωT})`.
    pub half_shift: bool,
}

pub fn stacked_system(gens: &GeneratorSet, mixing: &Mixing, cutoff: f64, omega: f64) -> Result<StackedSystem> {
    let t = gens.period();
    if let Mixing::Bank(bank) = mixing {
        if (cutoff - PI / t).abs() > 1e-12 * PI / t {
            return Err(Error::invalid("a mixer bank requires the per-channel cutoff π/T"));
        }
        return Ok(StackedSystem {
            kind: SystemKind::Bank,
            matrix: gamma_matrix(gens, mixing, omega, stack_order(1.0, 1.0)?),
            measurements: (0..bank.len()).map(|l| (l, omega)).collect(),
            half_shift: false,
        });
    }
    let tc = tc_from_cutoff(cutoff);
    let order = stack_order(t, tc)?;
    let unit = PI / t;
    if matches!(mixing, Mixing::None) && !ratio_is_integer(t, tc) {
        let step = gens.spectral_period();
        return Ok(StackedSystem {
            kind: SystemKind::Psi,
            matrix: psi_matrix(gens, omega, cutoff),
            measurements: psi_shifts(t, cutoff).into_iter().map(|k| (0, omega + k as f64 * step)).collect(),
            half_shift: false,
        });
    }
    let (kind, matrix) = match mixing {
        Mixing::None => (SystemKind::Phi, phi_matrix(gens, omega, order)),
        _ => (SystemKind::Gamma, gamma_matrix(gens, mixing, omega, order)),
    };
    Ok(StackedSystem {
        kind,
        matrix,
        measurements: order.row_multiples().into_iter().map(|m| (0, omega + m as f64 * unit)).collect(),
        half_shift: order.parity == Parity::Even,
    })
}

/// Measurement vectors, one per grid point, aligned with the rows of
/// [`stacked_system`].
#[derive(Debug, Clone, PartialEq)]
pub struct Observations {
    pub values: Vec<CVector>,
}

impl Observations {
    pub fn scaled_add(&self, c: Complex64, other: &Observations) -> Result<Observations> {
        if self.values.len() != other.values.len() || self.values.iter().zip(&other.values).any(|(a, b)| a.len() != b.len()) {
            return Err(Error::invalid("observation shapes differ"));
        }
        Ok(Observations {
            values: self.values.iter().zip(&other.values).map(|(a, b)| a * c + b).collect(),
        })
    }

    pub fn zeros_like(&self) -> Observations {
        Observations {
            values: self.values.iter().map(|v| CVector::zeros(v.len())).collect(),
        }
    }
}

/// One measurement in flat form, as written to CSV.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementRow {
    pub m: usize,
    pub omega: f64,
    pub row: usize,
    pub channel: usize,
    pub frequency: f64,
    pub value: Complex64,
}

fn systems(s: &Scenario) -> Result<Vec<StackedSystem>> {
    let grid = s.frequency_grid()?;
    par::try_map_range(grid.len(), |m| stacked_system(&s.generators, &s.mixing, s.cutoff, grid.point(m)))
}

/// Noiseless observations of the scenario's coefficients.
pub fn simulate(s: &Scenario) -> Result<Observations> {
    s.validate()?;
    let grid = s.frequency_grid()?;
    let values = par::try_map_range(grid.len(), |m| {
        let sys = stacked_system(&s.generators, &s.mixing, s.cutoff, grid.point(m))?;
        let mut v = CVector::zeros(sys.measurements.len());
        for (r, &(ch, f)) in sys.measurements.iter().enumerate() {
            v[r] = channel_outputs(&s.generators, &s.coefficients, &s.mixing, s.cutoff, f)[ch];
        }
        Ok(v)
    })?;
    Ok(Observations { values })
}

pub fn measurement_rows(s: &Scenario, obs: &Observations) -> Result<Vec<MeasurementRow>> {
    let grid = s.frequency_grid()?;
    let sys = systems(s)?;
    check_shape(&sys, obs)?;
    let mut rows = Vec::new();
    for (m, (st, v)) in sys.iter().zip(&obs.values).enumerate() {
        for (r, &(channel, frequency)) in st.measurements.iter().enumerate() {
            rows.push(MeasurementRow {
                m,
                omega: grid.point(m),
                row: r,
                channel,
                frequency,
                value: v[r],
            });
        }
    }
    Ok(rows)
}

/// Rebuilds [`Observations`] from flat rows; every `(m, row)` slot must be
/// present exactly once.
pub fn observations_from_rows(s: &Scenario, rows: &[MeasurementRow]) -> Result<Observations> {
    let sys = systems(s)?;
    let mut values: Vec<CVector> = sys.iter().map(|st| CVector::zeros(st.measurements.len())).collect();
    let mut seen: Vec<Vec<bool>> = sys.iter().map(|st| vec![false; st.measurements.len()]).collect();
    for r in rows {
        let slot = seen
            .get_mut(r.m)
            .and_then(|v| v.get_mut(r.row))
            .ok_or_else(|| Error::Schema(format!("observation (m = {}, row = {}) does not match the scenario", r.m, r.row)))?;
        if *slot {
            return Err(Error::Schema(format!("duplicate observation (m = {}, row = {})", r.m, r.row)));
        }
        *slot = true;
        values[r.m][r.row] = r.value;
    }
    if seen.iter().flatten().any(|s| !s) {
        return Err(Error::Schema("observations are incomplete for this scenario".into()));
    }
    Ok(Observations { values })
}

fn check_shape(sys: &[StackedSystem], obs: &Observations) -> Result<()> {
    if sys.len() != obs.values.len() || sys.iter().zip(&obs.values).any(|(s, v)| s.measurements.len() != v.len()) {
        return Err(Error::invalid("observations do not match the stacked systems of this scenario"));
    }
    Ok(())
}

/// Extremal eigenvalues of `A*A` over the base band, refined.
pub fn system_bounds(s: &Scenario) -> Result<Bounds> {
    let grid = s.frequency_grid()?;
    sweep_extrema(&grid, |w| {
        let sys = stacked_system(&s.generators, &s.mixing, s.cutoff, w)?;
        Ok(eigen_extremes(&gram(&sys.matrix)))
    })
}

/// Per-frequency diagnostics of a recovery.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointDiagnostics {
    pub omega: f64,
    pub rank: usize,
    pub condition: f64,
    pub residual: f64,
    /// `residual / ‖ŷ(ω)‖`, 0 when `ŷ(ω) = 0`.
    pub relative_residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryResult {
    pub coefficients: CoefficientSequences,
    pub diagnostics: Vec<PointDiagnostics>,
    pub max_residual: f64,
    pub max_relative_residual: f64,
    pub max_condition: f64,
    /// Energy outside the declared support relative to the total.
    pub leakage: f64,
    /// Grid frequencies where rank was lost (only nonempty when forced).
    pub rank_deficient: Vec<f64>,
    /// `‖â - a‖/‖a‖`, present when ground truth was compared.
    pub relative_error: Option<f64>,
    /// Refined minimum of `λ_min(A*A)` divided by `β̂`, when computed.
    pub system_alpha: Option<f64>,
}

pub fn recover_coefficients(s: &Scenario, obs: &Observations) -> Result<RecoveryResult> {
    recover_with(s, obs, true)
}

/// [`recover_coefficients`] with the even-order `(-1)^k` compensation
/// optionally disabled.
pub fn recover_with(s: &Scenario, obs: &Observations, compensate: bool) -> Result<RecoveryResult> {
    s.validate()?;
    let grid = s.frequency_grid()?;
    let g = grid.len();
    let n = s.generators.len();

    let mut system_alpha = None;
    if !s.force {
        let scale = riesz_bounds(&s.generators, &grid, &s.policy)?.beta;
        let scale = if scale > 0.0 { scale } else { 1.0 };
        let b = system_bounds(s)?;
        system_alpha = Some(b.alpha / scale);
        if b.alpha / scale <= s.tolerances.threshold {
            return Err(Error::RankDeficient { omegas: vec![b.alpha_omega] });
        }
    }

    let sys = systems(s)?;
    check_shape(&sys, obs)?;
    let tol = s.tolerances.pinv;
    let solved: Vec<(CVector, PointDiagnostics)> = par::map_range(g, |m| {
        let a = &sys[m].matrix;
        let y = &obs.values[m];
        let sol = least_squares(a, y, tol);
        let residual = (a * &sol.solution - y).norm();
        let ynorm = y.norm();
        (
            sol.solution,
            PointDiagnostics {
                omega: grid.point(m),
                rank: sol.rank,
                condition: sol.condition,
                residual,
                relative_residual: if ynorm > 0.0 { residual / ynorm } else { 0.0 },
            },
        )
    });
    let failing: Vec<f64> = solved.iter().filter(|(_, d)| d.rank < n).map(|(_, d)| d.omega).collect();
    if !failing.is_empty() && !s.force {
        return Err(Error::RankDeficient { omegas: failing });
    }
    let half_shift = sys.first().is_some_and(|st| st.half_shift) && compensate;

    // â(ω_m) = Σ_k c[k] e^{-j2πmk/G} with c[k] = a[k](-1)^k e^{-jπk/G}.
    let mut planner = FftPlanner::<f64>::new();
    let ifft = planner.plan_fft_inverse(g);
    let half = (g / 2) as i64;
    let kmin = s.coefficients.kmin();
    let kmax = s.coefficients.kmax();
    let mut out = CoefficientSequences::zeros(n, kmin, kmax)?;
    let mut inside = 0.0;
    let mut outside = 0.0;
    for nn in 0..n {
        let mut buf: Vec<Complex64> = solved.iter().map(|(x, _)| x[nn]).collect();
        ifft.process(&mut buf);
        for k in (-half + 1)..half {
            let c = buf[k.rem_euclid(g as i64) as usize] / g as f64;
            let mut a = c * Complex64::from_polar(1.0, PI * k as f64 / g as f64);
            if k % 2 != 0 {
                a = -a;
            }
            if half_shift && k % 2 != 0 {
                a = -a;
            }
            if k >= kmin && k <= kmax {
                inside += a.norm_sqr();
                out.set(nn, k, a);
            } else {
                outside += a.norm_sqr();
            }
        }
    }
    let total = inside + outside;
    let leakage = if total > 0.0 { outside / total } else { 0.0 };
    if leakage > s.tolerances.leakage {
        return Err(Error::SupportTooSmall {
            leaked: leakage,
            allowed: s.tolerances.leakage,
        });
    }
    let diagnostics: Vec<PointDiagnostics> = solved.into_iter().map(|(_, d)| d).collect();
    Ok(RecoveryResult {
        coefficients: out,
        max_residual: diagnostics.iter().map(|d| d.residual).fold(0.0, f64::max),
        max_relative_residual: diagnostics.iter().map(|d| d.relative_residual).fold(0.0, f64::max),
        max_condition: diagnostics.iter().map(|d| d.condition).fold(0.0, f64::max),
        diagnostics,
        leakage,
        rank_deficient: failing,
        relative_error: None,
        system_alpha,
    })
}

/// Simulates, recovers and compares against the scenario's coefficients.
pub fn roundtrip(s: &Scenario) -> Result<RecoveryResult> {
    roundtrip_with(s, true)
}

pub fn roundtrip_with(s: &Scenario, compensate: bool) -> Result<RecoveryResult> {
    let obs = simulate(s)?;
    let mut r = recover_with(s, &obs, compensate)?;
    r.relative_error = Some(r.coefficients.relative_error(&s.coefficients)?);
    Ok(r)
}

/// Relative `ℓ²` error of a simulate-and-recover round trip.
pub fn roundtrip_error(s: &Scenario) -> Result<f64> {
    Ok(roundtrip(s)?.relative_error.unwrap_or(0.0))
}

/// Ratio `T/T_c` used by the scenario, after integer snapping.
pub fn scenario_ratio(s: &Scenario) -> f64 {
    snapped_ratio(s.period(), tc_from_cutoff(s.cutoff))
}
