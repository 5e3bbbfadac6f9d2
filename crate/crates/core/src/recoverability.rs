//! Recoverability tests for lowpass observations of a shift-invariant
//! signal.
//!
//! Three tests of increasing generality are available:
//!
//! * [`check_necessary`]: the lowpass band must hold at least `N` copies of
//!   the base band;
//! * [`check_sufficient`]: the stacked matrix `Φ_L(ω)` has full column rank
//!   uniformly in `ω`;
//! * [`check_lowpass_riesz`]: the lowpassed generators still form a Riesz
//!   basis, which is the actual recoverability criterion.
//!
//! Eigenvalue thresholds are applied after dividing by `β̂` of the
//! unprojected generators, so they are insensitive to the overall scale of
//! the generators.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::generators::GeneratorSet;
use crate::grammian::{grammian_matrix, riesz_bounds, sweep_extrema, Bounds, FrequencyGrid, Offset, TruncationPolicy};
use crate::linalg::{eigen_extremes, gram, singular_values, CMatrix};
use crate::{Error, Result};

/// Default pass threshold on normalized eigenvalue minima.
pub const DEFAULT_THRESHOLD: f64 = 1e-8;

const INTEGER_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Odd,
    Even,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StackOrder {
    pub l: usize,
    pub l0: usize,
    pub parity: Parity,
}

impl StackOrder {
    pub fn new(l: usize) -> Result<Self> {
        if l == 0 {
            return Err(Error::invalid("stack order must be at least 1"));
        }
        let (l0, parity) = if l % 2 == 1 { ((l - 1) / 2, Parity::Odd) } else { (l / 2, Parity::Even) };
        Ok(StackOrder { l, l0, parity })
    }

    /// Frequency offsets of the rows of `Φ_L`, top to bottom, in units of
    /// `π/T`.
    pub fn row_multiples(&self) -> Vec<i64> {
        let l0 = self.l0 as i64;
        match self.parity {
            Parity::Odd => (-l0..=l0).rev().map(|l| 2 * l).collect(),
            Parity::Even => (-l0..l0).rev().map(|l| 2 * l + 1).collect(),
        }
    }

    /// Offset at which `M_ψ` matches `Φ_L*Φ_L` for this parity.
    pub fn grammian_offset(&self) -> Offset {
        match self.parity {
            Parity::Odd => Offset::Zero,
            Parity::Even => Offset::HalfPeriod,
        }
    }
}

/// `T/T_c` snapped to the nearest integer when within `1e-12` of it.
pub fn snapped_ratio(t: f64, tc: f64) -> f64 {
    let r = t / tc;
    if (r - r.round()).abs() <= INTEGER_SLACK * r.abs().max(1.0) {
        r.round()
    } else {
        r
    }
}

pub fn ratio_is_integer(t: f64, tc: f64) -> bool {
    let r = snapped_ratio(t, tc);
    r == r.round()
}

/// `T_c` for a lowpass cutoff `π/T_c`.
pub fn tc_from_cutoff(cutoff: f64) -> f64 {
    PI / cutoff
}

/// Largest `L` with `L ≤ T/T_c`.
pub fn stack_order(t: f64, tc: f64) -> Result<StackOrder> {
    if !(t > 0.0 && tc > 0.0) {
        return Err(Error::invalid("T and Tc must be positive"));
    }
    let r = snapped_ratio(t, tc);
    if r < 1.0 {
        return Err(Error::CutoffBelowBand { ratio: r });
    }
    StackOrder::new(r.floor() as usize)
}

/// `Φ_L(ω)`: row `r` holds `φ̂_n(ω + m_r·π/T)` with `m_r` from
/// [`StackOrder::row_multiples`].
pub fn phi_matrix(gens: &GeneratorSet, omega: f64, order: StackOrder) -> CMatrix {
    let unit = PI / gens.period();
    let rows = order.row_multiples();
    CMatrix::from_fn(rows.len(), gens.len(), |r, n| gens.get(n).eval(omega + rows[r] as f64 * unit))
}

/// Shifts `k` (descending) whose copy of the base band, `ω + 2kπ/T`, meets
/// `(-cutoff, cutoff)`.
pub fn psi_shifts(period: f64, cutoff: f64) -> Vec<i64> {
    let x = cutoff * period / PI;
    // (2|k| - 1) < x
    let kmax = ((x + 1.0) / 2.0).ceil() as i64;
    (-kmax..=kmax).rev().filter(|&k| ((2 * k.abs() - 1) as f64) < x).collect()
}

/// Rows `ψ̂_n(ω + 2kπ/T)` for every shift of [`psi_shifts`]; edge rows are
/// partially zero. `Ψ*Ψ = M_ψ` at every `ω` in the base band.
pub fn psi_matrix(gens: &GeneratorSet, omega: f64, cutoff: f64) -> CMatrix {
    let psi = gens.lowpassed(cutoff);
    let step = gens.spectral_period();
    let shifts = psi_shifts(gens.period(), cutoff);
    CMatrix::from_fn(shifts.len(), gens.len(), |r, n| psi.get(n).eval(omega + shifts[r] as f64 * step))
}

/// `T/T_c ≥ N`.
pub fn check_necessary(n: usize, t: f64, tc: f64) -> bool {
    snapped_ratio(t, tc) >= n as f64
}

/// Extremal eigenvalues of `M_L = Φ_L*Φ_L` over the base band, or `None`
/// when the necessary condition fails and the test does not apply.
pub fn check_sufficient(gens: &GeneratorSet, tc: f64, grid: &FrequencyGrid) -> Result<Option<Bounds>> {
    let t = gens.period();
    if !check_necessary(gens.len(), t, tc) {
        return Ok(None);
    }
    let order = stack_order(t, tc)?;
    sweep_extrema(grid, |w| Ok(eigen_extremes(&gram(&phi_matrix(gens, w, order))))).map(Some)
}

/// Riesz bounds of the lowpassed generators `ψ_n`.
pub fn check_lowpass_riesz(gens: &GeneratorSet, tc: f64, grid: &FrequencyGrid, policy: &TruncationPolicy) -> Result<Bounds> {
    riesz_bounds(&gens.lowpassed(PI / tc), grid, policy)
}

/// Singular values `(σ1, σ2)` of the matrix with rows `ĝ_ℓ(ω)·φ̂(ω)ᵀ`.
pub fn filterbank_rank_demo(gens: &GeneratorSet, filters: &[&dyn Fn(f64) -> Complex64], omega: f64) -> Result<(f64, f64)> {
    if filters.is_empty() {
        return Err(Error::invalid("filter bank needs at least one filter"));
    }
    let phi = gens.eval_all(omega);
    let resp: Vec<Complex64> = filters.iter().map(|f| f(omega)).collect();
    let m = CMatrix::from_fn(filters.len(), gens.len(), |l, n| resp[l] * phi[n]);
    let s = singular_values(&m);
    Ok((s[0], s.get(1).copied().unwrap_or(0.0)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Recoverable,
    SufficientTestInconclusive,
    NotRecoverable,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Recoverable => "Recoverable",
            Verdict::SufficientTestInconclusive => "SufficientTestInconclusive",
            Verdict::NotRecoverable => "NotRecoverable",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecoverabilityReport {
    /// `T/T_c` after integer snapping.
    pub ratio: f64,
    pub order: Option<StackOrder>,
    pub necessary_ok: bool,
    /// Bounds of `M_L`, absent when the necessary condition fails.
    pub sufficient: Option<Bounds>,
    pub psi: Bounds,
    /// `β̂` of the unprojected generators; thresholds apply to values
    /// divided by it.
    pub scale: f64,
    pub threshold: f64,
    pub verdict: Verdict,
}

impl RecoverabilityReport {
    pub fn sufficient_ok(&self) -> bool {
        self.sufficient.is_some_and(|b| b.alpha / self.scale > self.threshold)
    }

    pub fn psi_ok(&self) -> bool {
        self.psi.alpha / self.scale > self.threshold
    }

    /// Frequencies achieving the reported minima: `ψ` first, then `M_L`.
    pub fn witnesses(&self) -> Vec<f64> {
        let mut w = vec![self.psi.alpha_omega];
        if let Some(s) = self.sufficient {
            w.push(s.alpha_omega);
        }
        w
    }
}

pub fn analyze(
    gens: &GeneratorSet,
    tc: f64,
    grid: &FrequencyGrid,
    policy: &TruncationPolicy,
    threshold: f64,
) -> Result<RecoverabilityReport> {
    let t = gens.period();
    if !(tc > 0.0) {
        return Err(Error::invalid("Tc must be positive"));
    }
    let scale = riesz_bounds(gens, grid, policy)?.beta;
    let scale = if scale > 0.0 { scale } else { 1.0 };
    let order = stack_order(t, tc).ok();
    let necessary_ok = check_necessary(gens.len(), t, tc);
    let sufficient = check_sufficient(gens, tc, grid)?;
    let psi = check_lowpass_riesz(gens, tc, grid, policy)?;
    let mut report = RecoverabilityReport {
        ratio: snapped_ratio(t, tc),
        order,
        necessary_ok,
        sufficient,
        psi,
        scale,
        threshold,
        verdict: Verdict::NotRecoverable,
    };
    report.verdict = match (report.psi_ok(), report.sufficient_ok()) {
        (false, _) => Verdict::NotRecoverable,
        (true, true) => Verdict::Recoverable,
        (true, false) => Verdict::SufficientTestInconclusive,
    };
    Ok(report)
}

/// `(cutoff, α̂ of M_ψ)` for each requested cutoff.
pub fn sweep_cutoff(gens: &GeneratorSet, cutoffs: &[f64], grid: &FrequencyGrid, policy: &TruncationPolicy) -> Result<Vec<(f64, f64)>> {
    cutoffs
        .iter()
        .map(|&c| check_lowpass_riesz(gens, PI / c, grid, policy).map(|b| (c, b.alpha)))
        .collect()
}

/// Bisection for the smallest cutoff in `[lo, hi]` at which the normalized
/// `α̂` of `M_ψ` exceeds `threshold`. Assumes the pass/fail pattern is
/// monotone in the cutoff; the result is an empirical estimate, not a
/// certified optimum.
pub fn cutoff_threshold(
    gens: &GeneratorSet,
    lo: f64,
    hi: f64,
    grid: &FrequencyGrid,
    policy: &TruncationPolicy,
    threshold: f64,
    rel_tol: f64,
) -> Result<f64> {
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::invalid("cutoff bracket must satisfy 0 < lo < hi"));
    }
    let scale = riesz_bounds(gens, grid, policy)?.beta;
    let passes = |c: f64| check_lowpass_riesz(gens, PI / c, grid, policy).map(|b| b.alpha / scale > threshold);
    if !passes(hi)? {
        return Err(Error::invalid(format!("recoverability fails even at cutoff {hi}")));
    }
    if passes(lo)? {
        return Ok(lo);
    }
    let (mut a, mut b) = (lo, hi);
    while b - a > rel_tol * b {
        let mid = 0.5 * (a + b);
        if passes(mid)? {
            b = mid;
        } else {
            a = mid;
        }
    }
    Ok(b)
}

/// `M_ψ` evaluated with the offset matching `order`, for comparison with
/// `Φ_L*Φ_L`.
pub fn psi_grammian(gens: &GeneratorSet, omega: f64, tc: f64, order: StackOrder, policy: &TruncationPolicy) -> Result<CMatrix> {
    Ok(grammian_matrix(&gens.lowpassed(PI / tc), omega, order.grammian_offset(), policy)?.matrix)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{bandlimited_generator, box_generator, Generator};
    use crate::linalg::hermitian_eigenvalues;
    use proptest::prelude::*;

    fn one() -> Complex64 {
        Complex64::new(1.0, 0.0)
    }

    fn boxes(ds: &[f64]) -> GeneratorSet {
        GeneratorSet::new(1.0, ds.iter().map(|&d| box_generator(d, 1.0).unwrap()).collect()).unwrap()
    }

    fn unit_band() -> GeneratorSet {
        GeneratorSet::new(1.0, vec![bandlimited_generator(1, 1.0, vec![(0.0, one())]).unwrap()]).unwrap()
    }

    fn grid() -> FrequencyGrid {
        FrequencyGrid::new(1.0, 1024).unwrap()
    }

    fn pol() -> TruncationPolicy {
        TruncationPolicy::default()
    }

    #[test]
    fn stack_order_examples() {
        let s = stack_order(3.2, 1.0).unwrap();
        assert_eq!((s.l, s.l0, s.parity), (3, 1, Parity::Odd));
        let s = stack_order(4.0, 1.0).unwrap();
        assert_eq!((s.l, s.l0, s.parity), (4, 2, Parity::Even));
        assert!(matches!(stack_order(0.5, 1.0), Err(Error::CutoffBelowBand { .. })));
        // 3 - 1e-14 rounds to 3
        assert_eq!(stack_order(3.0 - 1e-14, 1.0).unwrap().l, 3);
        assert_eq!(stack_order(1.0, 1.0 / 3.0).unwrap().l, 3);
    }

    #[test]
    fn row_multiples_follow_the_stacking_pattern() {
        assert_eq!(StackOrder::new(1).unwrap().row_multiples(), vec![0]);
        assert_eq!(StackOrder::new(3).unwrap().row_multiples(), vec![2, 0, -2]);
        assert_eq!(StackOrder::new(2).unwrap().row_multiples(), vec![1, -1]);
        assert_eq!(StackOrder::new(4).unwrap().row_multiples(), vec![3, 1, -1, -3]);
    }

    #[test]
    fn phi_matrix_examples() {
        let g = boxes(&[0.8, 1.1]);
        let p = phi_matrix(&g, 0.3, StackOrder::new(1).unwrap());
        assert_eq!(p.shape(), (1, 2));
        assert_eq!(p[(0, 1)], g.get(1).eval(0.3));

        let w = 0.5 * PI;
        let p = phi_matrix(&unit_band(), w, StackOrder::new(3).unwrap());
        assert_eq!(p[(0, 0)], Complex64::new(0.0, 0.0));
        assert_eq!(p[(1, 0)], one());
        assert_eq!(p[(2, 0)], Complex64::new(0.0, 0.0));

        let g = boxes(&[0.6, 1.4]);
        let p = phi_matrix(&g, 0.0, StackOrder::new(2).unwrap());
        for n in 0..2 {
            let d: f64 = [0.6, 1.4][n];
            let expected = (PI * d).sin() / (PI * d);
            assert!((p[(0, n)].re - expected).abs() < 1e-15);
            assert!((p[(1, n)].re - expected).abs() < 1e-15);
        }
    }

    #[test]
    fn necessary_condition_examples() {
        assert!(check_necessary(2, 3.0, 1.0));
        assert!(!check_necessary(2, 1.5, 1.0));
        assert!(check_necessary(1, 1.0, 1.0));
    }

    #[test]
    fn sufficient_example_one_fails() {
        let b = check_sufficient(&boxes(&[1.2]), 1.0, &grid()).unwrap().unwrap();
        assert!(b.alpha <= 1e-8, "{b:?}");
        assert!((b.alpha_omega.abs() - PI / 1.2).abs() < 1e-6);
    }

    #[test]
    fn sufficient_example_two_grid_positive_but_singular_at_zero() {
        // φ̂ is even, so both rows of Φ_2(0) coincide; D1 + D2 = 2T also
        // makes Φ_2(±π/(2T)) singular. None of these is a grid point.
        let g = boxes(&[0.6, 1.4]);
        let b = check_sufficient(&g, 0.5, &grid()).unwrap().unwrap();
        assert!(b.grid_alpha > 0.0);
        assert!(b.alpha < 1e-12);
        let order = StackOrder::new(2).unwrap();
        for w in [0.0, PI / 2.0, -PI / 2.0] {
            assert!(singular_values(&phi_matrix(&g, w, order))[1] < 1e-15);
        }
    }

    #[test]
    fn sufficient_unit_band() {
        let b = check_sufficient(&unit_band(), 1.0, &grid()).unwrap().unwrap();
        assert_eq!(b.alpha, 1.0);
        assert!(check_sufficient(&boxes(&[0.6, 1.4]), 1.0, &grid()).unwrap().is_none());
    }

    #[test]
    fn lowpass_riesz_example_one() {
        let g = boxes(&[1.2]);
        let fail = check_lowpass_riesz(&g, 1.0, &grid(), &pol()).unwrap();
        assert!(fail.alpha <= 1e-8);
        let cut = 2.0 * PI - PI / 1.2 + 0.01 * PI;
        let pass = check_lowpass_riesz(&g, PI / cut, &grid(), &pol()).unwrap();
        assert!(pass.alpha > 1e-4, "{pass:?}");
        let full = riesz_bounds(&g, &grid(), &pol()).unwrap();
        assert!(pass.beta <= full.beta + 1e-10);
    }

    #[test]
    fn sufficiency_gap_witness() {
        let g = boxes(&[1.2]);
        let tc = 1.0 / 1.9;
        let r = analyze(&g, tc, &grid(), &pol(), DEFAULT_THRESHOLD).unwrap();
        assert!(!r.sufficient_ok());
        assert!(r.psi_ok());
        assert_eq!(r.verdict, Verdict::SufficientTestInconclusive);
    }

    #[test]
    fn analyze_verdicts() {
        let r = analyze(&boxes(&[1.2]), 1.0, &grid(), &pol(), DEFAULT_THRESHOLD).unwrap();
        assert_eq!(r.verdict, Verdict::NotRecoverable);
        let r = analyze(&unit_band(), 1.0, &grid(), &pol(), DEFAULT_THRESHOLD).unwrap();
        assert_eq!(r.verdict, Verdict::Recoverable);
        assert_eq!(r.witnesses().len(), 2);
        let r = analyze(&boxes(&[0.6, 1.4]), 1.0, &grid(), &pol(), DEFAULT_THRESHOLD).unwrap();
        assert!(!r.necessary_ok);
        assert_eq!(r.verdict, Verdict::NotRecoverable);
        let r = analyze(&boxes(&[0.8]), 2.0, &grid(), &pol(), DEFAULT_THRESHOLD).unwrap();
        assert!(r.order.is_none());
    }

    #[test]
    fn psi_shift_sets() {
        assert_eq!(psi_shifts(1.0, PI), vec![0]);
        assert_eq!(psi_shifts(1.0, 1.9 * PI), vec![1, 0, -1]);
        assert_eq!(psi_shifts(1.0, 3.0 * PI), vec![1, 0, -1]);
        assert_eq!(psi_shifts(1.0, 3.5 * PI), vec![2, 1, 0, -1, -2]);
    }

    #[test]
    fn extended_matrix_for_fractional_ratio() {
        let g = boxes(&[1.2]);
        let cut = 1.9 * PI;
        let w = -0.95 * PI;
        let a = psi_matrix(&g, w, cut);
        assert_eq!(a.nrows(), 3);
        // top row: ω + 2π = 1.05π ≤ 1.9π; bottom row: ω - 2π = -2.95π is cut
        assert_ne!(a[(0, 0)], Complex64::new(0.0, 0.0));
        assert_eq!(a[(2, 0)], Complex64::new(0.0, 0.0));
        let psi = g.lowpassed(cut);
        for w in grid().points().into_iter().step_by(37) {
            let a = psi_matrix(&g, w, cut);
            let m = grammian_matrix(&psi, w, Offset::Zero, &pol()).unwrap().matrix;
            assert!((gram(&a) - m).norm() < 1e-14);
        }
    }

    #[test]
    fn filterbank_examples() {
        let g = boxes(&[0.6, 1.4]);
        let zero = |_: f64| Complex64::new(0.0, 0.0);
        let (s1, _) = filterbank_rank_demo(&g, &[&zero, &zero], 0.3).unwrap();
        assert_eq!(s1, 0.0);
        let unit = |_: f64| one();
        let (s1, s2) = filterbank_rank_demo(&g, &[&unit], 0.3).unwrap();
        let norm = g.eval_all(0.3).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        assert!((s1 - norm).abs() < 1e-14);
        assert_eq!(s2, 0.0);
    }

    #[test]
    fn cutoff_bisection_near_prediction() {
        let g = boxes(&[1.2]);
        let coarse = FrequencyGrid::new(1.0, 256).unwrap();
        let c = cutoff_threshold(&g, PI, 2.0 * PI, &coarse, &pol(), DEFAULT_THRESHOLD, 1e-4).unwrap();
        let predicted = 2.0 * PI - PI / 1.2;
        assert!((c - predicted).abs() <= 0.01 * predicted, "{c} vs {predicted}");
        let sweep = sweep_cutoff(&g, &[PI, 1.9 * PI], &coarse, &pol()).unwrap();
        assert!(sweep[0].1 < sweep[1].1);
    }

    fn arb_set(n: usize) -> impl Strategy<Value = GeneratorSet> {
        let g = prop_oneof![
            (0.15f64..2.6).prop_map(|d| box_generator(d, 1.0).unwrap()),
            (1u32..4, -1.0f64..1.0).prop_map(|(k0, a)| {
                let e = k0 as f64 * PI;
                bandlimited_generator(k0, 1.0, vec![(-e, Complex64::new(1.0, a)), (e, Complex64::new(a, 0.7))]).unwrap()
            }),
        ];
        proptest::collection::vec(g, n).prop_map(|v: Vec<Generator>| GeneratorSet::new(1.0, v).unwrap())
    }

    fn min_eig(m: &CMatrix) -> f64 {
        hermitian_eigenvalues(m)[0]
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn prop_monotone_in_l(gens in arb_set(2), l in 1usize..5, w in -PI..PI) {
            let a = StackOrder::new(l).unwrap();
            let b = StackOrder::new(l + 2).unwrap();
            let ma = gram(&phi_matrix(&gens, w, a));
            let mb = gram(&phi_matrix(&gens, w, b));
            prop_assert!(min_eig(&mb) >= min_eig(&ma) - 1e-12);
        }

        #[test]
        fn prop_integer_ratio_identity(gens in arb_set(2), l in 1usize..6, w in -3.1f64..3.1) {
            let order = StackOrder::new(l).unwrap();
            let tc = 1.0 / l as f64;
            let mpsi = psi_grammian(&gens, w, tc, order, &pol()).unwrap();
            let ml = gram(&phi_matrix(&gens, w, order));
            prop_assert!((mpsi - ml).iter().all(|z| z.norm() <= 1e-10));
        }

        #[test]
        fn prop_domination(gens in arb_set(2), ratio in 1.0f64..5.5, w in -3.1f64..3.1) {
            let tc = 1.0 / ratio;
            let order = stack_order(1.0, tc).unwrap();
            let mpsi = psi_grammian(&gens, w, tc, order, &pol()).unwrap();
            let ml = gram(&phi_matrix(&gens, w, order));
            prop_assert!(min_eig(&(mpsi - ml)) >= -1e-10);
        }

        #[test]
        fn prop_filterbank_rank_one(gens in arb_set(3), coefs in proptest::collection::vec((-2.0f64..2.0, -2.0f64..2.0, -3.0f64..3.0), 3)) {
            let fs: Vec<Box<dyn Fn(f64) -> Complex64>> = coefs
                .iter()
                .map(|&(a, b, c)| Box::new(move |w: f64| Complex64::new(a, b) * Complex64::from_polar(1.0, c * w)) as Box<dyn Fn(f64) -> Complex64>)
                .collect();
            let refs: Vec<&dyn Fn(f64) -> Complex64> = fs.iter().map(|f| f.as_ref()).collect();
            let (s1, s2) = filterbank_rank_demo(&gens, &refs, 0.3 * PI).unwrap();
            prop_assert!(s2 <= 1e-12 * s1.max(f64::MIN_POSITIVE));
        }

        #[test]
        fn prop_report_consistency(gens in arb_set(1), ratio in prop_oneof![0.6f64..0.95, 1.0f64..3.5]) {
            let g = FrequencyGrid::new(1.0, 64).unwrap();
            let r = analyze(&gens, 1.0 / ratio, &g, &pol(), DEFAULT_THRESHOLD).unwrap();
            prop_assert_eq!(r.verdict != Verdict::NotRecoverable, r.psi_ok());
            if let Some(s) = r.sufficient {
                if s.grid_alpha / r.scale > r.threshold {
                    prop_assert!(r.psi.grid_alpha >= s.grid_alpha - 1e-10);
                }
            }
            if !r.necessary_ok {
                prop_assert!(!r.psi_ok());
            }
        }
    }
}
