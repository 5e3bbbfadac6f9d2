//! Generators of shift-invariant spaces, represented by their Fourier
//! transforms.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use crate::{Error, Result};

const BOX_SERIES_THRESHOLD: f64 = 1e-6;

/// `|φ̂(ω)| ≤ constant / |ω|^order` for large `|ω|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayBound {
    pub order: f64,
    pub constant: f64,
}

/// Piecewise-linear complex table. Breakpoints are strictly increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    omegas: Vec<f64>,
    values: Vec<Complex64>,
}

impl Table {
    pub fn new(points: Vec<(f64, Complex64)>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::invalid("generator table is empty"));
        }
        let mut points = points;
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        if points.iter().any(|(w, v)| !w.is_finite() || !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::invalid("generator table contains non-finite entries"));
        }
        if points.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::invalid("generator table has duplicate breakpoints"));
        }
        let (omegas, values) = points.into_iter().unzip();
        Ok(Table { omegas, values })
    }

    /// Samples `f` at `count` equispaced breakpoints on `[lo, hi]`.
    pub fn sample(lo: f64, hi: f64, count: usize, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        if count < 2 || !(hi > lo) {
            return Err(Error::invalid("table sampling needs count ≥ 2 and hi > lo"));
        }
        let step = (hi - lo) / (count - 1) as f64;
        Table::new(
            (0..count)
                .map(|i| {
                    let w = if i + 1 == count { hi } else { lo + step * i as f64 };
                    (w, f(w))
                })
                .collect(),
        )
    }

    pub fn first(&self) -> f64 {
        self.omegas[0]
    }

    pub fn last(&self) -> f64 {
        self.omegas[self.omegas.len() - 1]
    }

    pub fn points(&self) -> impl Iterator<Item = (f64, Complex64)> + '_ {
        self.omegas.iter().copied().zip(self.values.iter().copied())
    }

    /// Linear interpolation, clamped to the end values outside the table.
    fn interpolate_clamped(&self, omega: f64) -> Complex64 {
        let n = self.omegas.len();
        if omega <= self.omegas[0] {
            return self.values[0];
        }
        if omega >= self.omegas[n - 1] {
            return self.values[n - 1];
        }
        let hi = self.omegas.partition_point(|&w| w <= omega);
        let lo = hi - 1;
        let t = (omega - self.omegas[lo]) / (self.omegas[hi] - self.omegas[lo]);
        self.values[lo] * (1.0 - t) + self.values[hi] * t
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GeneratorKind {
    /// `φ(t) = 1/(2D)` on `[-D, D]`, so `φ̂(ω) = sin(ωD)/(ωD)`.
    Box { half_width: f64 },
    /// Table on `[-band_edge, band_edge]`, end values held up to the band
    /// edge, exactly zero outside.
    Bandlimited { band_edge: f64, table: Table },
    /// Table interpolated between its first and last breakpoints, zero outside.
    Tabulated { table: Table },
    /// `φ̂(ω) · 1{|ω| ≤ cutoff}`.
    Lowpassed { inner: Arc<Generator>, cutoff: f64 },
}

/// A generator `φ_n`, known through `φ̂_n`, times a complex gain.
#[derive(Debug, Clone, PartialEq)]
pub struct Generator {
    kind: GeneratorKind,
    gain: Complex64,
}

impl Generator {
    pub fn kind(&self) -> &GeneratorKind {
        &self.kind
    }

    pub fn gain(&self) -> Complex64 {
        self.gain
    }

    /// The same generator multiplied by `factor`.
    pub fn scaled(&self, factor: Complex64) -> Generator {
        Generator {
            kind: self.kind.clone(),
            gain: self.gain * factor,
        }
    }

    /// Half-width `D` when this is an unfiltered box.
    pub fn box_half_width(&self) -> Option<f64> {
        match self.kind {
            GeneratorKind::Box { half_width } => Some(half_width),
            _ => None,
        }
    }

    /// Interval outside which `φ̂` vanishes identically.
    pub fn band_support(&self) -> Option<(f64, f64)> {
        match &self.kind {
            GeneratorKind::Box { .. } => None,
            GeneratorKind::Bandlimited { band_edge, .. } => Some((-band_edge, *band_edge)),
            GeneratorKind::Tabulated { table } => Some((table.first(), table.last())),
            GeneratorKind::Lowpassed { inner, cutoff } => match inner.band_support() {
                Some((lo, hi)) => Some((lo.max(-cutoff), hi.min(*cutoff))),
                None => Some((-cutoff, *cutoff)),
            },
        }
    }

    pub fn decay(&self) -> Option<DecayBound> {
        match &self.kind {
            GeneratorKind::Box { half_width } => Some(DecayBound {
                order: 1.0,
                constant: self.gain.norm() / half_width,
            }),
            _ => None,
        }
    }

    /// `φ̂(ω)`. Total on ℝ, pure, and exactly zero outside the band support.
    pub fn eval(&self, omega: f64) -> Complex64 {
        self.gain * self.eval_unit(omega)
    }

    fn eval_unit(&self, omega: f64) -> Complex64 {
        match &self.kind {
            GeneratorKind::Box { half_width } => Complex64::new(sinc(omega * half_width), 0.0),
            GeneratorKind::Bandlimited { band_edge, table } => {
                if omega.abs() > *band_edge {
                    Complex64::new(0.0, 0.0)
                } else {
                    table.interpolate_clamped(omega)
                }
            }
            GeneratorKind::Tabulated { table } => {
                if omega < table.first() || omega > table.last() {
                    Complex64::new(0.0, 0.0)
                } else {
                    table.interpolate_clamped(omega)
                }
            }
            GeneratorKind::Lowpassed { inner, cutoff } => {
                if omega.abs() > *cutoff {
                    Complex64::new(0.0, 0.0)
                } else {
                    inner.eval(omega)
                }
            }
        }
    }
}

/// `sin(x)/x` with the removable singularity handled by its series.
fn sinc(x: f64) -> f64 {
    if x.abs() < BOX_SERIES_THRESHOLD {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// Box generator of half-width `d` in a space with shift period `period`.
pub fn box_generator(d: f64, period: f64) -> Result<Generator> {
    if !(d > 0.0 && d.is_finite()) {
        return Err(Error::invalid(format!("box half-width must be positive, got {d}")));
    }
    check_period(period)?;
    Ok(Generator {
        kind: GeneratorKind::Box { half_width: d },
        gain: Complex64::new(1.0, 0.0),
    })
}

/// Generator bandlimited to `[-k0·π/T, k0·π/T]` with values from `table`.
pub fn bandlimited_generator(k0: u32, period: f64, table: Vec<(f64, Complex64)>) -> Result<Generator> {
    if k0 == 0 {
        return Err(Error::invalid("bandlimited generator needs K0 ≥ 1"));
    }
    check_period(period)?;
    let table = Table::new(table)?;
    Ok(Generator {
        kind: GeneratorKind::Bandlimited {
            band_edge: k0 as f64 * PI / period,
            table,
        },
        gain: Complex64::new(1.0, 0.0),
    })
}

pub fn tabulated_generator(table: Vec<(f64, Complex64)>) -> Result<Generator> {
    Ok(Generator {
        kind: GeneratorKind::Tabulated {
            table: Table::new(table)?,
        },
        gain: Complex64::new(1.0, 0.0),
    })
}

/// Uniform evaluator facade.
pub fn eval_ft(gen: &Generator, omega: f64) -> Complex64 {
    gen.eval(omega)
}

/// `ψ̂ = φ̂ · 1{|ω| ≤ cutoff}`.
///
/// Projecting an already projected generator keeps the tighter cutoff, and
/// a cutoff that covers the whole band support returns the generator as is.
pub fn lowpass_project(gen: &Generator, cutoff: f64) -> Generator {
    assert!(cutoff > 0.0, "lowpass cutoff must be positive");
    if let Some((lo, hi)) = gen.band_support() {
        if lo >= -cutoff && hi <= cutoff {
            return gen.clone();
        }
    }
    match &gen.kind {
        GeneratorKind::Lowpassed { inner, cutoff: old } => Generator {
            kind: GeneratorKind::Lowpassed {
                inner: inner.clone(),
                cutoff: old.min(cutoff),
            },
            gain: gen.gain,
        },
        _ => Generator {
            kind: GeneratorKind::Lowpassed {
                inner: Arc::new(Generator {
                    kind: gen.kind.clone(),
                    gain: Complex64::new(1.0, 0.0),
                }),
                cutoff,
            },
            gain: gen.gain,
        },
    }
}

fn check_period(period: f64) -> Result<()> {
    if !(period > 0.0 && period.is_finite()) {
        return Err(Error::invalid(format!("shift period must be positive, got {period}")));
    }
    Ok(())
}

/// Shift period `T` plus the ordered generators `φ_1 … φ_N`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorSet {
    period: f64,
    generators: Vec<Generator>,
}

impl GeneratorSet {
    pub fn new(period: f64, generators: Vec<Generator>) -> Result<Self> {
        check_period(period)?;
        if generators.is_empty() {
            return Err(Error::invalid("a generator set needs at least one generator"));
        }
        Ok(GeneratorSet { period, generators })
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    pub fn generators(&self) -> &[Generator] {
        &self.generators
    }

    pub fn get(&self, n: usize) -> &Generator {
        &self.generators[n]
    }

    /// `2π/T`.
    pub fn spectral_period(&self) -> f64 {
        2.0 * PI / self.period
    }

    /// `[φ̂_1(ω), …, φ̂_N(ω)]`.
    pub fn eval_all(&self, omega: f64) -> Vec<Complex64> {
        self.generators.iter().map(|g| g.eval(omega)).collect()
    }

    /// Every generator passed through a lowpass of the given cutoff.
    pub fn lowpassed(&self, cutoff: f64) -> GeneratorSet {
        GeneratorSet {
            period: self.period,
            generators: self.generators.iter().map(|g| lowpass_project(g, cutoff)).collect(),
        }
    }

    /// Smallest interval containing every band support, if all are bounded.
    pub fn support_hull(&self) -> Option<(f64, f64)> {
        self.generators.iter().try_fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), g| {
            g.band_support().map(|(a, b)| (lo.min(a), hi.max(b)))
        })
    }

    /// Integer shifts `k` for which `ω - 2kπ/T` can meet the support hull
    /// when `ω` ranges over `[lo, hi]`; `None` when some generator has
    /// unbounded support.
    pub fn shift_range(&self, lo: f64, hi: f64) -> Option<(i64, i64)> {
        let (slo, shi) = self.support_hull()?;
        let step = self.spectral_period();
        // ω - 2kπ/T ∈ [slo, shi]  ⇔  (ω - shi)/step ≤ k ≤ (ω - slo)/step
        let kmin = ((lo - shi) / step).floor() as i64 - 1;
        let kmax = ((hi - slo) / step).ceil() as i64 + 1;
        Some((kmin, kmax))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one() -> Complex64 {
        Complex64::new(1.0, 0.0)
    }

    #[test]
    fn box_values() {
        let g = box_generator(1.0, 1.0).unwrap();
        assert_eq!(g.eval(0.0), one());
        assert!(g.eval(PI).norm() < 1e-15);
        assert!((g.eval(PI / 2.0).re - 2.0 / PI).abs() < 1e-15);
        let g2 = box_generator(2.0, 1.0).unwrap();
        assert!((eval_ft(&g2, PI / 4.0).re - 2.0 / PI).abs() < 1e-15);
    }

    #[test]
    fn box_zero_set() {
        for d in [0.3, 1.0, 1.2, 2.5] {
            let g = box_generator(d, 1.0).unwrap();
            for k in 1..=20 {
                for s in [-1.0, 1.0] {
                    assert!(g.eval(s * k as f64 * PI / d).norm() <= 1e-14, "D={d} k={k}");
                }
            }
        }
    }

    #[test]
    fn box_series_branch_is_continuous() {
        let g = box_generator(1.0, 1.0).unwrap();
        for x in [1e-9f64, 5e-7, 9.99e-7, 1.0001e-6, 3e-6] {
            let direct = x.sin() / x;
            assert!((g.eval(x).re - direct).abs() < 1e-15);
        }
    }

    #[test]
    fn box_decay_certificate() {
        for (d, t) in [(0.8, 1.0), (1.2, 1.0), (0.1, 1.0), (3.0, 2.0)] {
            let g = box_generator(d, t).unwrap();
            let bound = g.decay().unwrap();
            assert_eq!(bound.order, 1.0);
            for i in 0..2000 {
                let w = 10.0 * PI / t + 0.37 * i as f64;
                for w in [w, -w] {
                    assert!(g.eval(w).norm() <= bound.constant / w.abs() + 1e-15);
                }
            }
            for i in 0..2000 {
                let w = PI / (2.0 * d) + 0.05 * i as f64;
                assert!(g.eval(w).norm_sqr() <= 1.0 / (w * d).powi(2) + 1e-15);
            }
        }
    }

    #[test]
    fn box_rejects_bad_parameters() {
        assert!(box_generator(0.0, 1.0).is_err());
        assert!(box_generator(1.0, -1.0).is_err());
        assert!(box_generator(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn bandlimited_indicator() {
        let t = 1.0;
        let g = bandlimited_generator(1, t, vec![(0.0, one())]).unwrap();
        assert_eq!(g.eval(0.5 * PI / t), one());
        assert_eq!(g.eval(1.5 * PI / t), Complex64::new(0.0, 0.0));
        assert_eq!(g.band_support(), Some((-PI, PI)));
    }

    #[test]
    fn bandlimited_triangle_boundary() {
        let t = 1.0;
        let tri = vec![
            (-2.0 * PI, Complex64::new(0.0, 0.0)),
            (0.0, one()),
            (2.0 * PI, Complex64::new(0.0, 0.0)),
        ];
        let g = bandlimited_generator(2, t, tri).unwrap();
        assert_eq!(g.eval(2.0 * PI / t), Complex64::new(0.0, 0.0));
        assert!((g.eval(PI).re - 0.5).abs() < 1e-15);
    }

    #[test]
    fn empty_table_rejected() {
        assert!(bandlimited_generator(1, 1.0, vec![]).is_err());
        assert!(tabulated_generator(vec![]).is_err());
        assert!(bandlimited_generator(0, 1.0, vec![(0.0, one())]).is_err());
    }

    #[test]
    fn tabulated_is_zero_outside() {
        let g = tabulated_generator(vec![(-1.0, one()), (2.0, Complex64::new(0.0, 3.0))]).unwrap();
        assert_eq!(g.eval(-1.0000001), Complex64::new(0.0, 0.0));
        assert_eq!(g.eval(2.0000001), Complex64::new(0.0, 0.0));
        assert!((g.eval(0.5) - Complex64::new(0.5, 1.5)).norm() < 1e-15);
    }

    #[test]
    fn lowpass_examples() {
        let b = box_generator(1.0, 1.0).unwrap();
        let p = lowpass_project(&b, PI);
        assert_eq!(p.eval(2.0 * PI), Complex64::new(0.0, 0.0));
        assert!((p.eval(1.0).re - 1f64.sin()).abs() < 1e-15);
        let lp1 = lowpass_project(&b, 1.0);
        assert_eq!(eval_ft(&lp1, 2.0), Complex64::new(0.0, 0.0));

        let bl = bandlimited_generator(1, 1.0, vec![(0.0, one())]).unwrap();
        assert_eq!(lowpass_project(&bl, 2.0 * PI), bl);
    }

    #[test]
    fn lowpass_idempotent_and_exact() {
        let b = box_generator(1.3, 1.0).unwrap().scaled(Complex64::new(0.5, -2.0));
        let once = lowpass_project(&b, 2.2);
        let twice = lowpass_project(&once, 2.2);
        for i in 0..4001 {
            let w = -10.0 + 0.005 * i as f64;
            assert_eq!(once.eval(w), twice.eval(w));
            if w.abs() > 2.2 {
                assert_eq!(once.eval(w), Complex64::new(0.0, 0.0));
            } else {
                assert_eq!(once.eval(w), b.eval(w));
            }
        }
        assert_eq!(once.band_support(), Some((-2.2, 2.2)));
    }

    #[test]
    fn lowpass_support_is_intersection() {
        let g = tabulated_generator(vec![(-1.0, one()), (5.0, one())]).unwrap();
        assert_eq!(lowpass_project(&g, 3.0).band_support(), Some((-1.0, 3.0)));
    }

    #[test]
    fn generator_set_basics() {
        assert!(GeneratorSet::new(1.0, vec![]).is_err());
        let g = box_generator(1.0, 1.0).unwrap();
        assert!(GeneratorSet::new(0.0, vec![g.clone()]).is_err());
        let set = GeneratorSet::new(1.0, vec![g]).unwrap();
        assert_eq!(set.len(), 1);
        assert_eq!(set.support_hull(), None);
        assert!(set.lowpassed(PI).support_hull().is_some());
    }

    #[test]
    fn shift_range_covers_support() {
        let g = bandlimited_generator(3, 1.0, vec![(0.0, one())]).unwrap();
        let set = GeneratorSet::new(1.0, vec![g]).unwrap();
        let (kmin, kmax) = set.shift_range(-PI, PI).unwrap();
        assert!(kmin <= -1 && kmax >= 1);
        for k in [kmin - 1, kmax + 1] {
            for w in [-PI, 0.0, PI] {
                assert_eq!(set.get(0).eval(w - 2.0 * PI * k as f64), Complex64::new(0.0, 0.0));
            }
        }
    }
}
