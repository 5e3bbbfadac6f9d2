use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::Deserialize;
use serde_json::{json, Value};

use siband_core::config::{GeneratorSpec, MixerSpec, Overrides, ScenarioSpec};
use siband_core::grammian::{eigen_profile, Bounds, FrequencyGrid};
use siband_core::mixing::{design_binary_bank, design_shift_mixer, DesignStrategy, DEFAULT_KMAX};
use siband_core::pipeline::{
    measurement_rows, observations_from_rows, recover_coefficients, simulate as simulate_obs, stacked_system, system_bounds, MeasurementRow,
    RecoveryResult, Scenario,
};
use siband_core::recoverability::{analyze as analyze_report, cutoff_threshold, sweep_cutoff as sweep, tc_from_cutoff, Parity};
use siband_core::Error as CoreError;

use crate::error::CliError;
use crate::output::{csv_string, emit, fmt_f64, num, to_json_string};
use crate::Format;

pub struct Options {
    pub input: PathBuf,
    pub out: Option<PathBuf>,
    pub grid: Option<usize>,
    pub seed: Option<u64>,
    pub tol: Option<f64>,
    pub format: Option<Format>,
    pub diagnostics: Option<PathBuf>,
}

impl Options {
    fn format_or(&self, default: Format) -> Format {
        self.format.unwrap_or(default)
    }

    fn emit_json(&self, v: &Value) -> Result<(), CliError> {
        let mut s = to_json_string(v);
        s.push('\n');
        emit(self.out.as_deref(), &s)
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn load(o: &Options, pinv: Option<f64>) -> Result<(ScenarioSpec, Scenario), CliError> {
    let spec = ScenarioSpec::from_json(&read(&o.input)?)?;
    let s = spec.build(Overrides {
        grid: o.grid,
        seed: o.seed,
        pinv,
    })?;
    Ok((spec, s))
}

fn bounds_json(b: &Bounds) -> Value {
    json!({
        "alpha": num(b.alpha),
        "alpha_omega": num(b.alpha_omega),
        "beta": num(b.beta),
        "beta_omega": num(b.beta_omega),
        "grid_alpha": num(b.grid_alpha),
        "grid_alpha_omega": num(b.grid_alpha_omega),
        "grid_beta": num(b.grid_beta),
        "grid_beta_omega": num(b.grid_beta_omega),
    })
}

fn system_name(s: &Scenario) -> Result<String, CliError> {
    Ok(format!("{:?}", stacked_system(&s.generators, &s.mixing, s.cutoff, 0.0)?.kind))
}

pub fn analyze(o: &Options) -> Result<(), CliError> {
    let (_, s) = load(o, None)?;
    let grid = s.frequency_grid()?;
    let tc = tc_from_cutoff(s.cutoff);

    let profile_csv = || -> Result<String, CliError> {
        let plain = eigen_profile(&s.generators, &grid, &s.policy)?;
        let lowpassed = eigen_profile(&s.generators.lowpassed(s.cutoff), &grid, &s.policy)?;
        let rows = plain
            .iter()
            .zip(&lowpassed)
            .map(|(&(w, lo, hi), &(_, plo, phi))| vec![fmt_f64(w), fmt_f64(lo), fmt_f64(hi), fmt_f64(plo), fmt_f64(phi)]);
        csv_string(&["omega", "lambda_min", "lambda_max", "psi_lambda_min", "psi_lambda_max"], rows)
    };

    if o.format_or(Format::Json) == Format::Csv {
        return emit(o.out.as_deref(), &profile_csv()?);
    }

    let threshold = o.tol.unwrap_or(s.tolerances.threshold);
    let r = analyze_report(&s.generators, tc, &grid, &s.policy, threshold)?;
    let sys = system_bounds(&s)?;
    let report = json!({
        "verdict": r.verdict.as_str(),
        "ratio": num(r.ratio),
        "L": r.order.map(|o| o.l),
        "parity": r.order.map(|o| match o.parity {
            Parity::Odd => "odd",
            Parity::Even => "even",
        }),
        "necessary_ok": r.necessary_ok,
        "sufficient_ok": r.sufficient_ok(),
        "psi_ok": r.psi_ok(),
        "threshold": num(r.threshold),
        "scale": num(r.scale),
        "sufficient": r.sufficient.as_ref().map(bounds_json),
        "psi": bounds_json(&r.psi),
        "witnesses": r.witnesses().into_iter().map(num).collect::<Vec<_>>(),
        "system": {
            "kind": system_name(&s)?,
            "bounds": bounds_json(&sys),
            "ok": sys.alpha / r.scale > threshold,
        },
    });
    if let Some(p) = &o.diagnostics {
        emit(Some(p), &profile_csv()?)?;
    }
    o.emit_json(&report)
}

#[derive(Debug, Deserialize)]
#[serde(tag = "strategy", rename_all = "lowercase")]
enum DesignSpec {
    Hadamard {
        #[serde(rename = "T")]
        t: f64,
        #[serde(rename = "N")]
        n: usize,
        #[serde(rename = "M")]
        m: Option<usize>,
        #[serde(rename = "Kmax")]
        kmax: Option<usize>,
    },
    Random {
        #[serde(rename = "T")]
        t: f64,
        #[serde(rename = "N")]
        n: usize,
        #[serde(rename = "M")]
        m: Option<usize>,
        #[serde(rename = "Kmax")]
        kmax: Option<usize>,
        #[serde(default)]
        seed: u64,
    },
    Shift {
        #[serde(rename = "T")]
        t: f64,
        generator: GeneratorSpec,
        grid: Option<usize>,
        threshold: Option<f64>,
    },
}

pub fn design_mixers(o: &Options) -> Result<(), CliError> {
    let spec: DesignSpec = serde_json::from_str(&read(&o.input)?).map_err(|e| CoreError::Schema(e.to_string()))?;
    let (t, n, m, kmax, strategy) = match spec {
        DesignSpec::Shift {
            t,
            generator,
            grid,
            threshold,
        } => {
            let g = generator.build(t)?;
            let grid = FrequencyGrid::new(t, o.grid.or(grid).unwrap_or(FrequencyGrid::DEFAULT_COUNT))?;
            let threshold = o.tol.or(threshold).unwrap_or(0.01);
            let found = design_shift_mixer(&g, t, &grid, threshold).ok_or(CliError::NoShiftFound)?;
            let mixer = found.mixer(t)?;
            return o.emit_json(&json!({
                "strategy": "shift",
                "k0": found.k0,
                "min_magnitude": num(found.min_magnitude),
                "mixers": serde_json::to_value(MixerSpec::from_mixer(&mixer)).expect("mixer specs serialize"),
            }));
        }
        DesignSpec::Hadamard { t, n, m, kmax } => (t, n, m, kmax, DesignStrategy::Hadamard),
        DesignSpec::Random { t, n, m, kmax, seed } => (t, n, m, kmax, DesignStrategy::Random { seed: o.seed.unwrap_or(seed) }),
    };
    let (bank, cert) = design_binary_bank(n, m.unwrap_or(n), strategy, t, kmax.unwrap_or(DEFAULT_KMAX))?;
    let mixers: Vec<Value> = bank
        .mixers()
        .iter()
        .map(|mx| serde_json::to_value(MixerSpec::from_mixer(mx)).expect("mixer specs serialize"))
        .collect();
    let (name, seed) = match cert.strategy {
        DesignStrategy::Hadamard => ("hadamard", None),
        DesignStrategy::Random { seed } => ("random", Some(seed)),
    };
    o.emit_json(&json!({
        "strategy": name,
        "seed": seed,
        "mixers": mixers,
        "certificate": {
            "Q": cert.q,
            "det_Q": num(cert.det_q),
            "draws": cert.draws,
            "tail_energy": num(cert.tail_energy),
        },
        "warning": bank.rank_warning(n),
    }))
}

const MEASUREMENT_HEADER: [&str; 7] = ["m", "omega", "row", "channel", "frequency", "re", "im"];

pub fn simulate(o: &Options) -> Result<(), CliError> {
    let (_, s) = load(o, None)?;
    let obs = simulate_obs(&s)?;
    let rows = measurement_rows(&s, &obs)?;
    match o.format_or(Format::Csv) {
        Format::Csv => {
            let text = csv_string(
                &MEASUREMENT_HEADER,
                rows.iter().map(|r| {
                    vec![
                        r.m.to_string(),
                        fmt_f64(r.omega),
                        r.row.to_string(),
                        r.channel.to_string(),
                        fmt_f64(r.frequency),
                        fmt_f64(r.value.re),
                        fmt_f64(r.value.im),
                    ]
                }),
            )?;
            emit(o.out.as_deref(), &text)
        }
        Format::Json => o.emit_json(&json!({
            "rows": rows.iter().map(|r| json!({
                "m": r.m,
                "omega": num(r.omega),
                "row": r.row,
                "channel": r.channel,
                "frequency": num(r.frequency),
                "value": [num(r.value.re), num(r.value.im)],
            })).collect::<Vec<_>>(),
        })),
    }
}

fn parse_measurements(text: &str) -> Result<Vec<MeasurementRow>, CliError> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let header = rdr.headers().map_err(|e| CliError::Csv(e.to_string()))?.clone();
    if header.iter().collect::<Vec<_>>() != MEASUREMENT_HEADER {
        return Err(CliError::Csv(format!("expected header {}", MEASUREMENT_HEADER.join(","))));
    }
    let mut rows = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| CliError::Csv(e.to_string()))?;
        let bad = |col: &str| CliError::Csv(format!("record {}: bad {col}", line + 1));
        let int = |i: usize| rec[i].trim().parse::<usize>().map_err(|_| bad(MEASUREMENT_HEADER[i]));
        let float = |i: usize| rec[i].trim().parse::<f64>().map_err(|_| bad(MEASUREMENT_HEADER[i]));
        rows.push(MeasurementRow {
            m: int(0)?,
            omega: float(1)?,
            row: int(2)?,
            channel: int(3)?,
            frequency: float(4)?,
            value: Complex64::new(float(5)?, float(6)?),
        });
    }
    Ok(rows)
}

fn result_json(s: &Scenario, r: &RecoveryResult) -> Result<Value, CliError> {
    let c = &r.coefficients;
    let values: Vec<Value> = (0..c.count())
        .map(|n| Value::Array(c.sequence(n).iter().map(|z| json!([num(z.re), num(z.im)])).collect()))
        .collect();
    Ok(json!({
        "system": system_name(s)?,
        "grid": s.grid,
        "relative_error": r.relative_error.map(num),
        "max_residual": num(r.max_residual),
        "max_relative_residual": num(r.max_relative_residual),
        "max_condition": num(r.max_condition),
        "leakage": num(r.leakage),
        "system_alpha": r.system_alpha.map(num),
        "rank_deficient": r.rank_deficient.iter().copied().map(num).collect::<Vec<_>>(),
        "coefficients": {
            "support": [c.kmin(), c.kmax()],
            "values": values,
        },
    }))
}

fn emit_result(o: &Options, s: &Scenario, r: &RecoveryResult) -> Result<(), CliError> {
    if let Some(p) = &o.diagnostics {
        let text = csv_string(
            &["omega", "rank", "condition", "residual", "relative_residual"],
            r.diagnostics.iter().map(|d| {
                vec![
                    fmt_f64(d.omega),
                    d.rank.to_string(),
                    fmt_f64(d.condition),
                    fmt_f64(d.residual),
                    fmt_f64(d.relative_residual),
                ]
            }),
        )?;
        emit(Some(p), &text)?;
    }
    match o.format_or(Format::Json) {
        Format::Json => o.emit_json(&result_json(s, r)?),
        Format::Csv => {
            let c = &r.coefficients;
            let rows = (0..c.count()).flat_map(|n| {
                (c.kmin()..=c.kmax()).map(move |k| {
                    let z = c.get(n, k);
                    vec![n.to_string(), k.to_string(), fmt_f64(z.re), fmt_f64(z.im)]
                })
            });
            emit(o.out.as_deref(), &csv_string(&["n", "k", "re", "im"], rows)?)
        }
    }
}

pub fn recover(o: &Options, obs_path: &Path) -> Result<(), CliError> {
    let (_, s) = load(o, o.tol)?;
    let rows = parse_measurements(&read(obs_path)?)?;
    let obs = observations_from_rows(&s, &rows)?;
    let r = recover_coefficients(&s, &obs)?;
    emit_result(o, &s, &r)
}

pub fn roundtrip(o: &Options) -> Result<(), CliError> {
    let (_, s) = load(o, o.tol)?;
    let r = siband_core::pipeline::roundtrip(&s)?;
    emit_result(o, &s, &r)
}

pub fn sweep_cutoff(o: &Options, from: f64, to: f64, steps: usize) -> Result<(), CliError> {
    if !(from > 0.0 && to > from && steps >= 2) {
        return Err(CliError::Usage("sweep needs 0 < --from < --to and --steps >= 2".into()));
    }
    let (_, s) = load(o, None)?;
    let t = s.period();
    let grid = s.frequency_grid()?;
    let band = PI / t;
    let cutoffs: Vec<f64> = (0..steps)
        .map(|i| band * (from + (to - from) * i as f64 / (steps - 1) as f64))
        .collect();
    let samples = sweep(&s.generators, &cutoffs, &grid, &s.policy)?;

    if o.format_or(Format::Csv) == Format::Csv {
        let rows = samples.iter().map(|&(c, a)| vec![fmt_f64(c), fmt_f64(c / band), fmt_f64(a)]);
        return emit(o.out.as_deref(), &csv_string(&["cutoff", "cutoff_over_band", "alpha"], rows)?);
    }

    let threshold = o.tol.unwrap_or(s.tolerances.threshold);
    let found = match cutoff_threshold(&s.generators, from * band, to * band, &grid, &s.policy, threshold, 1e-4) {
        Ok(c) => Some(c),
        Err(CoreError::InvalidParameter(_)) => None,
        Err(e) => return Err(e.into()),
    };
    // single box: analytic transition 2π/T - π/D
    let reference = match s.generators.generators() {
        [g] => g.box_half_width().filter(|&d| d > 0.5 * t).map(|d| 2.0 * PI / t - PI / d),
        _ => None,
    };
    o.emit_json(&json!({
        "threshold": found.map(num),
        "threshold_over_band": found.map(|c| num(c / band)),
        "reference": reference.map(num),
        "relative_gap": found.zip(reference).map(|(c, r)| num((c - r).abs() / r)),
        "samples": samples.iter().map(|&(c, a)| json!({"cutoff": num(c), "alpha": num(a)})).collect::<Vec<_>>(),
    }))
}
