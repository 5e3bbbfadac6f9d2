//! JSON descriptors for generators, mixers and scenarios.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::generators::{bandlimited_generator, box_generator, tabulated_generator, Generator, GeneratorSet};
use crate::grammian::TruncationPolicy;
use crate::mixing::{binary_mixer, mixer_from_fourier, Mixer, MixerBank, Mixing, DEFAULT_KMAX};
use crate::pipeline::{CoefficientSequences, Scenario, Tolerances};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum GeneratorSpec {
    Box {
        #[serde(rename = "D")]
        d: f64,
    },
    Bandlimited {
        #[serde(rename = "K0")]
        k0: u32,
        table: Vec<[f64; 3]>,
    },
    Tabulated {
        table: Vec<[f64; 3]>,
    },
}

fn table(rows: &[[f64; 3]]) -> Vec<(f64, Complex64)> {
    rows.iter().map(|r| (r[0], Complex64::new(r[1], r[2]))).collect()
}

impl GeneratorSpec {
    pub fn build(&self, period: f64) -> Result<Generator> {
        match self {
            GeneratorSpec::Box { d } => box_generator(*d, period),
            GeneratorSpec::Bandlimited { k0, table: t } => bandlimited_generator(*k0, period, table(t)),
            GeneratorSpec::Tabulated { table: t } => tabulated_generator(table(t)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FourierTerm {
    pub k: i64,
    #[serde(default)]
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BinarySpec {
    pub pattern: Vec<i8>,
    #[serde(rename = "M", default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(rename = "Kmax", default, skip_serializing_if = "Option::is_none")]
    pub kmax: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum MixerSpec {
    Fourier(Vec<FourierTerm>),
    Binary(BinarySpec),
}

impl MixerSpec {
    pub fn build(&self, period: f64) -> Result<Mixer> {
        match self {
            MixerSpec::Fourier(terms) => {
                let c: Vec<(i64, Complex64)> = terms.iter().map(|t| (t.k, Complex64::new(t.re, t.im))).collect();
                mixer_from_fourier(&c, period)
            }
            MixerSpec::Binary(b) => {
                if let Some(m) = b.m {
                    if m != b.pattern.len() {
                        return Err(Error::Schema(format!("binary mixer M = {m} but pattern has {} entries", b.pattern.len())));
                    }
                }
                binary_mixer(&b.pattern, period, b.kmax.unwrap_or(DEFAULT_KMAX))
            }
        }
    }

    /// Descriptor for an existing mixer; binary mixers keep their pattern.
    pub fn from_mixer(m: &Mixer) -> MixerSpec {
        match m.pattern() {
            Some(p) => MixerSpec::Binary(BinarySpec {
                pattern: p.to_vec(),
                m: Some(p.len()),
                kmax: Some(m.kmax().max(p.len() as i64) as usize),
            }),
            None => MixerSpec::Fourier(
                m.coefficients()
                    .iter()
                    .map(|&(k, b)| FourierTerm { k, re: b.re, im: b.im })
                    .collect(),
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MixersSpec {
    Bank(Vec<MixerSpec>),
    Single(MixerSpec),
}

impl MixersSpec {
    pub fn build(&self, period: f64) -> Result<Mixing> {
        match self {
            MixersSpec::Single(m) => Ok(Mixing::Single(m.build(period)?)),
            MixersSpec::Bank(ms) => Ok(Mixing::Bank(MixerBank::new(
                ms.iter().map(|m| m.build(period)).collect::<Result<Vec<_>>>()?,
            )?)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientSpec {
    pub support: [i64; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// `values[n][i] = [re, im]` of `a_n[support[0] + i]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<Vec<[f64; 2]>>>,
}

impl CoefficientSpec {
    pub fn build(&self, n: usize, seed_override: Option<u64>) -> Result<CoefficientSequences> {
        let [lo, hi] = self.support;
        if hi < lo {
            return Err(Error::Schema(format!("coefficient support [{lo}, {hi}] is empty")));
        }
        match (&self.values, self.seed) {
            (Some(_), Some(_)) => Err(Error::Schema("give either coefficient values or a seed, not both".into())),
            (Some(v), None) => {
                if v.len() != n {
                    return Err(Error::Schema(format!("{} coefficient sequences for {n} generators", v.len())));
                }
                let len = (hi - lo + 1) as usize;
                if v.iter().any(|s| s.len() != len) {
                    return Err(Error::Schema(format!("each coefficient sequence needs {len} values")));
                }
                CoefficientSequences::new(lo, v.iter().map(|s| s.iter().map(|z| Complex64::new(z[0], z[1])).collect()).collect())
            }
            (None, seed) => CoefficientSequences::random(n, lo, hi, seed_override.or(seed).unwrap_or(0)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TolerancesSpec {
    pub pinv: f64,
    pub leakage: f64,
    pub threshold: f64,
}

impl Default for TolerancesSpec {
    fn default() -> Self {
        let t = Tolerances::default();
        TolerancesSpec {
            pinv: t.pinv,
            leakage: t.leakage,
            threshold: t.threshold,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TruncationSpec {
    pub relative_tail_tolerance: f64,
    pub max_terms: usize,
    pub closed_form: bool,
}

impl Default for TruncationSpec {
    fn default() -> Self {
        let p = TruncationPolicy::default();
        TruncationSpec {
            relative_tail_tolerance: p.relative_tail_tolerance,
            max_terms: p.max_terms,
            closed_form: p.closed_form,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    #[serde(rename = "T")]
    pub t: f64,
    pub generators: Vec<GeneratorSpec>,
    /// Lowpass cutoff `π/T_c` in rad/s.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cutoff: Option<f64>,
    #[serde(rename = "Tc", default, skip_serializing_if = "Option::is_none")]
    pub tc: Option<f64>,
    #[serde(default)]
    pub mixers: Option<MixersSpec>,
    #[serde(default = "default_coefficients")]
    pub coefficients: CoefficientSpec,
    #[serde(default = "default_grid")]
    pub grid: usize,
    #[serde(default)]
    pub tolerances: TolerancesSpec,
    #[serde(default)]
    pub truncation: TruncationSpec,
    #[serde(default)]
    pub force: bool,
}

fn default_coefficients() -> CoefficientSpec {
    CoefficientSpec {
        support: [-8, 8],
        seed: Some(0),
        values: None,
    }
}

fn default_grid() -> usize {
    1024
}

/// Command-line adjustments applied on top of a scenario file.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Overrides {
    pub grid: Option<usize>,
    pub seed: Option<u64>,
    pub pinv: Option<f64>,
}

impl ScenarioSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))
    }

    pub fn generator_set(&self) -> Result<GeneratorSet> {
        if self.generators.is_empty() {
            return Err(Error::Schema("scenario lists no generators".into()));
        }
        GeneratorSet::new(self.t, self.generators.iter().map(|g| g.build(self.t)).collect::<Result<Vec<_>>>()?)
    }

    /// Cutoff in rad/s from whichever of `cutoff` / `Tc` is present.
    pub fn cutoff(&self) -> Result<f64> {
        match (self.cutoff, self.tc) {
            (Some(c), None) => Ok(c),
            (None, Some(tc)) if tc > 0.0 => Ok(std::f64::consts::PI / tc),
            (None, Some(tc)) => Err(Error::Schema(format!("Tc must be positive, got {tc}"))),
            _ => Err(Error::Schema("give exactly one of \"cutoff\" and \"Tc\"".into())),
        }
    }

    pub fn mixing(&self) -> Result<Mixing> {
        match &self.mixers {
            None => Ok(Mixing::None),
            Some(m) => m.build(self.t),
        }
    }

    pub fn policy(&self) -> TruncationPolicy {
        TruncationPolicy {
            relative_tail_tolerance: self.truncation.relative_tail_tolerance,
            max_terms: self.truncation.max_terms,
            closed_form: self.truncation.closed_form,
        }
    }

    pub fn build(&self, ov: Overrides) -> Result<Scenario> {
        let gens = self.generator_set()?;
        let coefficients = self.coefficients.build(gens.len(), ov.seed)?;
        let mut s = Scenario {
            generators: gens,
            cutoff: self.cutoff()?,
            mixing: self.mixing()?,
            coefficients,
            grid: ov.grid.unwrap_or(self.grid),
            tolerances: Tolerances {
                pinv: ov.pinv.unwrap_or(self.tolerances.pinv),
                leakage: self.tolerances.leakage,
                threshold: self.tolerances.threshold,
            },
            policy: self.policy(),
            force: self.force,
        };
        s.validate()?;
        s.force = self.force;
        Ok(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    const EXAMPLE_TWO: &str = r#"{
        "T": 1.0,
        "generators": [{"kind": "box", "D": 0.6}, {"kind": "box", "D": 1.4}],
        "cutoff": 6.283185307179586,
        "coefficients": {"support": [-8, 8], "seed": 0},
        "grid": 1024,
        "force": true
    }"#;

    #[test]
    fn parses_example_scenario() {
        let spec = ScenarioSpec::from_json(EXAMPLE_TWO).unwrap();
        let s = spec.build(Overrides::default()).unwrap();
        assert_eq!(s.generators.len(), 2);
        assert_eq!(s.coefficients.support_len(), 17);
        assert!(s.force);
        assert_eq!(s.mixing, Mixing::None);
    }

    #[test]
    fn cutoff_or_tc() {
        let mut spec = ScenarioSpec::from_json(EXAMPLE_TWO).unwrap();
        spec.cutoff = None;
        spec.tc = Some(0.5);
        assert!((spec.cutoff().unwrap() - 2.0 * PI).abs() < 1e-15);
        spec.cutoff = Some(1.0);
        assert!(matches!(spec.cutoff(), Err(Error::Schema(_))));
    }

    #[test]
    fn mixer_descriptors() {
        let single: MixersSpec = serde_json::from_str(r#"{"fourier": [{"k": -1, "im": -1}, {"k": 0, "re": 1}, {"k": 1, "im": 1}]}"#).unwrap();
        match single.build(1.0).unwrap() {
            Mixing::Single(m) => assert_eq!(m.coefficient(1), Complex64::new(0.0, 1.0)),
            other => panic!("{other:?}"),
        }
        let bank: MixersSpec = serde_json::from_str(
            r#"[{"binary": {"pattern": [1, -1, 1], "M": 3, "Kmax": 16}}, {"binary": {"pattern": [1, 1, -1]}}]"#,
        )
        .unwrap();
        match bank.build(1.0).unwrap() {
            Mixing::Bank(b) => assert_eq!(b.len(), 2),
            other => panic!("{other:?}"),
        }
        let bad: MixersSpec = serde_json::from_str(r#"{"binary": {"pattern": [1, -1], "M": 3}}"#).unwrap();
        assert!(matches!(bad.build(1.0), Err(Error::Schema(_))));
    }

    #[test]
    fn mixer_spec_round_trip() {
        let m = binary_mixer(&[1, -1, -1], 1.0, 32).unwrap();
        let spec = MixerSpec::from_mixer(&m);
        assert_eq!(spec.build(1.0).unwrap(), m);
        let f = mixer_from_fourier(&[(2, Complex64::new(0.5, -1.0))], 1.0).unwrap();
        assert_eq!(MixerSpec::from_mixer(&f).build(1.0).unwrap(), f);
    }

    #[test]
    fn generator_descriptors() {
        let g: GeneratorSpec = serde_json::from_str(r#"{"kind": "bandlimited", "K0": 1, "table": [[0, 1, 0]]}"#).unwrap();
        assert_eq!(g.build(1.0).unwrap().eval(0.5), Complex64::new(1.0, 0.0));
        let t: GeneratorSpec = serde_json::from_str(r#"{"kind": "tabulated", "table": [[-1, 1, 0], [1, 0, 1]]}"#).unwrap();
        assert_eq!(t.build(1.0).unwrap().eval(2.0), Complex64::new(0.0, 0.0));
        assert!(serde_json::from_str::<GeneratorSpec>(r#"{"kind": "box", "D": 1, "extra": 2}"#).is_err());
        assert!(serde_json::from_str::<GeneratorSpec>(r#"{"kind": "gauss"}"#).is_err());
    }

    #[test]
    fn explicit_coefficients_and_overrides() {
        let spec = CoefficientSpec {
            support: [0, 1],
            seed: None,
            values: Some(vec![vec![[1.0, 0.0], [0.0, 2.0]]]),
        };
        let c = spec.build(1, None).unwrap();
        assert_eq!(c.get(0, 1), Complex64::new(0.0, 2.0));
        assert!(spec.build(2, None).is_err());
        let seeded = CoefficientSpec { support: [-2, 2], seed: Some(3), values: None };
        assert_eq!(seeded.build(1, Some(4)).unwrap(), CoefficientSequences::random(1, -2, 2, 4).unwrap());

        let spec = ScenarioSpec::from_json(EXAMPLE_TWO).unwrap();
        let s = spec.build(Overrides { grid: Some(128), seed: Some(9), pinv: Some(1e-9) }).unwrap();
        assert_eq!(s.grid, 128);
        assert_eq!(s.tolerances.pinv, 1e-9);
        assert!(spec.build(Overrides { grid: Some(100), ..Overrides::default() }).is_err());
    }

    #[test]
    fn malformed_json_is_schema_error() {
        assert!(matches!(ScenarioSpec::from_json("{\"T\": 1,"), Err(Error::Schema(_))));
        assert!(matches!(ScenarioSpec::from_json("{\"T\": 1, \"generators\": [], \"cutoff\": 1}").unwrap().generator_set(), Err(Error::Schema(_))));
    }
}
