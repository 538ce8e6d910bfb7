//! Monte Carlo driver: sweep SNR and sub-array counts, run all training
//! methods on shared channel realizations, and emit success-rate and
//! rate tables.
//!
//! Within a trial every (method, m, snr) cell observes the same channel
//! realization, so differences between methods are paired comparisons.
//! Trials use independent ChaCha substreams keyed by trial index; results
//! are bit-reproducible for a fixed config and seed.

use std::fmt;
use std::io::Write as IoWrite;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{
    draw_random_azimuths, equally_spaced_azimuths, realize_channels, ScenarioConfig, UserChannel,
};
use crate::codebook::{single_beam_codeword, Codebook, CodebookGeometry};
use crate::error::{Error, Result};
use crate::sweep_plan::{build_rh_plan, build_sweep_plan, SweepPlan};
use crate::training::{
    identify_multi_beam, log_from_amplitudes, observe_power, receive_amplitude,
    single_beam_amplitudes, single_beam_decide, rh_vote, sweep_amplitudes,
};

/// Training method selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Exhaustive single-beam search over all directions.
    Single,
    /// Proposed sub-array multi-beam sweep with threshold identification.
    Multi,
    /// Random-hashing sweep with voting, at the multi-beam symbol budget.
    Rh,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::Single => write!(f, "single"),
            Method::Multi => write!(f, "multi"),
            Method::Rh => write!(f, "rh"),
        }
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "single" => Ok(Method::Single),
            "multi" => Ok(Method::Multi),
            "rh" => Ok(Method::Rh),
            other => Err(Error::InvalidConfig(format!(
                "unknown method {other:?} (expected single, multi or rh)"
            ))),
        }
    }
}

/// How user azimuths are chosen each trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UserPlacement {
    /// Redrawn uniformly over the semicircle every trial.
    #[default]
    Random,
    /// Fixed equally spaced layout, identical across trials.
    Fixed,
}

/// Full experiment description, mirrored one-to-one by the JSON config
/// file (lower_snake_case keys, unknown keys rejected).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: ScenarioConfig,
    pub snr_grid_db: Vec<f64>,
    pub m_values: Vec<usize>,
    pub methods: Vec<Method>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub user_placement: UserPlacement,
    #[serde(default)]
    pub noiseless: bool,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
}

fn default_trials() -> usize {
    1500
}

impl ExperimentConfig {
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let cfg: ExperimentConfig = serde_json::from_str(&text)
            .map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.scenario.validate()?;
        if self.trials == 0 {
            return Err(Error::InvalidConfig("trials must be at least 1".into()));
        }
        if self.snr_grid_db.is_empty() {
            return Err(Error::InvalidConfig("snr_grid_db must not be empty".into()));
        }
        if self.snr_grid_db.iter().any(|s| !s.is_finite()) {
            return Err(Error::InvalidConfig("snr_grid_db entries must be finite".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::InvalidConfig("methods must not be empty".into()));
        }
        let needs_m = self
            .methods
            .iter()
            .any(|m| matches!(m, Method::Multi | Method::Rh));
        if needs_m && self.m_values.is_empty() {
            return Err(Error::InvalidConfig(
                "m_values must not be empty when multi or rh methods are selected".into(),
            ));
        }
        for &m in &self.m_values {
            CodebookGeometry::new(self.scenario.n_x, m)
                .map_err(|e| Error::InvalidConfig(format!("m = {m}: {e}")))?;
        }
        Ok(())
    }
}

/// Transmit power (Watts) that achieves the given average SNR under the
/// scenario's link budget:
/// `p_a = 10^(snr/10) sigma^2 / (xi_ai xi_iu n_x^2 n_a)`.
pub fn power_for_snr(snr_db: f64, cfg: &ScenarioConfig) -> Result<f64> {
    let denom = link_budget(cfg)?;
    Ok(10f64.powf(snr_db / 10.0) * cfg.noise_power_w() / denom)
}

/// Inverse of [`power_for_snr`].
pub fn snr_for_power(p_a: f64, cfg: &ScenarioConfig) -> Result<f64> {
    let denom = link_budget(cfg)?;
    Ok(10.0 * (p_a * denom / cfg.noise_power_w()).log10())
}

fn link_budget(cfg: &ScenarioConfig) -> Result<f64> {
    let ai = crate::channel::path_gain(cfg.xi0_db, cfg.ap_irs_distance(), cfg.gamma_ai)?;
    let iu = crate::channel::path_gain(cfg.xi0_db, cfg.user_ring_radius, cfg.gamma_iu)?;
    Ok(ai * iu * (cfg.n_x as f64).powi(2) * cfg.n_a as f64)
}

/// Achievable rate for one user transmitting with the full-array beam of
/// the identified direction:
/// `log2(1 + p_a |f^H w(identified)|^2 / (Gamma sigma^2))`.
pub fn achievable_rate(
    identified_index: usize,
    user: &UserChannel,
    p_a: f64,
    cfg: &ScenarioConfig,
) -> Result<f64> {
    let w = single_beam_codeword(identified_index, cfg.n_x)?;
    let amp = receive_amplitude(&w, user);
    Ok(rate_from_amplitude(amp.norm_sqr(), p_a, cfg))
}

fn rate_from_amplitude(amp_sqr: f64, p_a: f64, cfg: &ScenarioConfig) -> f64 {
    let gamma_gap = 10f64.powf(cfg.gamma_gap_db / 10.0);
    (1.0 + p_a * amp_sqr / (gamma_gap * cfg.noise_power_w())).log2()
}

/// One result row of the metrics table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsRow {
    pub method: Method,
    pub m: usize,
    pub snr_db: f64,
    pub training_symbols: usize,
    pub success_rate: f64,
    pub success_stderr: f64,
    pub avg_rate: f64,
    pub rate_stderr: f64,
    pub trials: usize,
}

/// Result table, one row per (method, m, snr) cell in config order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsTable {
    pub rows: Vec<MetricsRow>,
}

impl MetricsTable {
    pub fn row(&self, method: Method, m: usize, snr_db: f64) -> Option<&MetricsRow> {
        self.rows
            .iter()
            .find(|r| r.method == method && r.m == m && r.snr_db == snr_db)
    }

    /// The exact CSV serialization written by [`emit_results`].
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "method,m,snr_db,training_symbols,success_rate,success_stderr,avg_rate,rate_stderr,trials\n",
        );
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{}\n",
                r.method,
                r.m,
                r.snr_db,
                r.training_symbols,
                r.success_rate,
                r.success_stderr,
                r.avg_rate,
                r.rate_stderr,
                r.trials
            ));
        }
        out
    }
}

/// Per-trial tallies of one cell: successes over users and summed rate.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct TrialStat {
    pub successes: u32,
    pub rate_sum: f64,
}

/// Table plus the per-trial tallies behind every row (same index order),
/// for paired statistical comparisons between rows.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub table: MetricsTable,
    pub per_trial: Vec<Vec<TrialStat>>,
    pub num_users: usize,
}

impl RunOutput {
    pub fn row_index(&self, method: Method, m: usize, snr_db: f64) -> Option<usize> {
        self.table
            .rows
            .iter()
            .position(|r| r.method == method && r.m == m && r.snr_db == snr_db)
    }

    /// Per-trial success fractions of one row.
    pub fn trial_success_rates(&self, row: usize) -> Vec<f64> {
        self.per_trial[row]
            .iter()
            .map(|s| s.successes as f64 / self.num_users as f64)
            .collect()
    }

    /// Per-trial mean rates of one row.
    pub fn trial_rates(&self, row: usize) -> Vec<f64> {
        self.per_trial[row]
            .iter()
            .map(|s| s.rate_sum / self.num_users as f64)
            .collect()
    }
}

/// Run the configured experiment.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunOutput> {
    run_inner(cfg, None)
}

/// Run the experiment while streaming a per-trial outcome log
/// (`trial,method,m,snr_db,user,true_index,identified,success,rate`).
pub fn run_experiment_traced(
    cfg: &ExperimentConfig,
    trace: &mut dyn IoWrite,
) -> Result<RunOutput> {
    run_inner(cfg, Some(trace))
}

/// A (method, m) family shares one sweep schedule across the SNR grid.
struct Family {
    method: Method,
    m: usize,
    training_symbols: usize,
    geometry: Option<CodebookGeometry>,
    multi_plan: Option<SweepPlan>,
}

fn build_families(cfg: &ExperimentConfig) -> Result<Vec<Family>> {
    let mut families = Vec::new();
    for &method in &cfg.methods {
        match method {
            Method::Single => families.push(Family {
                method,
                m: 1,
                training_symbols: cfg.scenario.n_x,
                geometry: None,
                multi_plan: None,
            }),
            Method::Multi | Method::Rh => {
                for &m in &cfg.m_values {
                    let geometry = CodebookGeometry::new(cfg.scenario.n_x, m)?;
                    let plan = build_sweep_plan(&geometry)?;
                    families.push(Family {
                        method,
                        m,
                        training_symbols: plan.total_symbols(),
                        geometry: Some(geometry),
                        multi_plan: Some(plan),
                    });
                }
            }
        }
    }
    Ok(families)
}

fn trace_io_error(source: std::io::Error) -> Error {
    Error::Io {
        path: PathBuf::from("(trace output)"),
        source,
    }
}

fn run_inner(cfg: &ExperimentConfig, mut trace: Option<&mut dyn IoWrite>) -> Result<RunOutput> {
    cfg.validate()?;
    let scenario = &cfg.scenario;
    let codebook = Codebook::new(scenario.n_x)?;
    let families = build_families(cfg)?;
    let snr_count = cfg.snr_grid_db.len();
    let powers: Vec<f64> = cfg
        .snr_grid_db
        .iter()
        .map(|&snr| power_for_snr(snr, scenario))
        .collect::<Result<_>>()?;
    let gamma_gap = 10f64.powf(scenario.gamma_gap_db / 10.0);
    let sigma2 = scenario.noise_power_w();
    let num_rows = families.len() * snr_count;
    let mut per_trial = vec![vec![TrialStat::default(); cfg.trials]; num_rows];

    if let Some(w) = trace.as_deref_mut() {
        writeln!(
            w,
            "trial,method,m,snr_db,user,true_index,identified,success,rate"
        )
        .map_err(trace_io_error)?;
    }

    let fixed_azimuths = equally_spaced_azimuths(scenario.k_users);
    for trial in 0..cfg.trials {
        let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed);
        rng.set_stream(trial as u64 + 1);

        let azimuths = match cfg.user_placement {
            UserPlacement::Random => draw_random_azimuths(scenario.k_users, &mut rng),
            UserPlacement::Fixed => fixed_azimuths.clone(),
        };
        let realization = realize_channels(scenario, &azimuths, &mut rng)?;
        let true_indices: Vec<usize> = realization
            .users()
            .iter()
            .map(|u| u.optimal_index)
            .collect();
        // Receive amplitudes of every full-array codeword; shared by the
        // single-beam sweep and by the rate of every identified beam.
        let single_amps = single_beam_amplitudes(&codebook, &realization)?;

        for (fam_idx, family) in families.iter().enumerate() {
            // Amplitudes of this family's sweep, reused across the grid.
            // Random-hashing rebuilds its schedule every trial from a
            // trial-derived seed.
            let mut rh_plan = None;
            let (plan, amps) = match family.method {
                Method::Single => (None, None),
                Method::Multi => {
                    let p = family.multi_plan.as_ref().expect("multi plan built");
                    (Some(p), Some(sweep_amplitudes(p, &codebook, &realization)?))
                }
                Method::Rh => {
                    let geo = family.geometry.as_ref().expect("geometry built");
                    rh_plan = Some(build_rh_plan(geo, rng.gen(), family.training_symbols)?);
                    let p = rh_plan.as_ref().expect("just built");
                    (Some(p), Some(sweep_amplitudes(p, &codebook, &realization)?))
                }
            };

            for (snr_idx, (&snr_db, &p_a)) in
                cfg.snr_grid_db.iter().zip(&powers).enumerate()
            {
                let identified: Vec<usize> = match family.method {
                    Method::Single => {
                        let noisy: Vec<Vec<f64>> = single_amps
                            .iter()
                            .map(|row| {
                                row.iter()
                                    .map(|&a| {
                                        observe_power(a, p_a, sigma2, &mut rng, cfg.noiseless)
                                    })
                                    .collect()
                            })
                            .collect();
                        single_beam_decide(&noisy, realization.num_users())
                    }
                    Method::Multi => {
                        let log = log_from_amplitudes(
                            amps.as_ref().expect("multi amplitudes"),
                            p_a,
                            sigma2,
                            &mut rng,
                            cfg.noiseless,
                        );
                        identify_multi_beam(&log, plan.expect("multi plan"))?
                            .into_iter()
                            .map(|ident| ident.identified)
                            .collect()
                    }
                    Method::Rh => {
                        let log = log_from_amplitudes(
                            amps.as_ref().expect("rh amplitudes"),
                            p_a,
                            sigma2,
                            &mut rng,
                            cfg.noiseless,
                        );
                        rh_vote(&log, plan.expect("rh plan"))?
                    }
                };

                let row = fam_idx * snr_count + snr_idx;
                let stat = &mut per_trial[row][trial];
                for (k, &found) in identified.iter().enumerate() {
                    let success = found == true_indices[k];
                    if success {
                        stat.successes += 1;
                    }
                    let amp_sqr = single_amps[found - 1][k].norm_sqr();
                    let rate = (1.0 + p_a * amp_sqr / (gamma_gap * sigma2)).log2();
                    stat.rate_sum += rate;
                    if let Some(w) = trace.as_deref_mut() {
                        writeln!(
                            w,
                            "{trial},{},{},{snr_db},{k},{},{found},{},{rate}",
                            family.method,
                            family.m,
                            true_indices[k],
                            u8::from(success)
                        )
                        .map_err(trace_io_error)?;
                    }
                }
            }
        }
    }

    // Aggregate in fixed trial order.
    let k_users = scenario.k_users as f64;
    let mut rows = Vec::with_capacity(num_rows);
    for (fam_idx, family) in families.iter().enumerate() {
        for (snr_idx, &snr_db) in cfg.snr_grid_db.iter().enumerate() {
            let row = fam_idx * snr_count + snr_idx;
            let stats = &per_trial[row];
            let success: Vec<f64> = stats
                .iter()
                .map(|s| s.successes as f64 / k_users)
                .collect();
            let rates: Vec<f64> = stats.iter().map(|s| s.rate_sum / k_users).collect();
            rows.push(MetricsRow {
                method: family.method,
                m: family.m,
                snr_db,
                training_symbols: family.training_symbols,
                success_rate: mean(&success),
                success_stderr: stderr_of_mean(&success),
                avg_rate: mean(&rates),
                rate_stderr: stderr_of_mean(&rates),
                trials: cfg.trials,
            });
        }
    }

    Ok(RunOutput {
        table: MetricsTable { rows },
        per_trial,
        num_users: scenario.k_users,
    })
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn stderr_of_mean(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 2 {
        return 0.0;
    }
    let m = mean(xs);
    let var = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1) as f64;
    (var / n as f64).sqrt()
}

/// Paths produced by [`emit_results`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmittedPaths {
    pub csv: PathBuf,
    pub json: PathBuf,
}

/// Write `results.csv` and `results.json` (config echo, seed, version)
/// into `out_dir`. Byte-identical for identical inputs.
pub fn emit_results(
    table: &MetricsTable,
    cfg: &ExperimentConfig,
    out_dir: &Path,
) -> Result<EmittedPaths> {
    if table.rows.is_empty() {
        return Err(Error::InvalidConfig(
            "refusing to emit an empty results table".into(),
        ));
    }
    std::fs::create_dir_all(out_dir).map_err(|source| Error::Io {
        path: out_dir.to_path_buf(),
        source,
    })?;
    let csv_path = out_dir.join("results.csv");
    let json_path = out_dir.join("results.json");

    let csv = table.to_csv();
    std::fs::write(&csv_path, csv).map_err(|source| Error::Io {
        path: csv_path.clone(),
        source,
    })?;

    #[derive(Serialize)]
    struct ResultsJson<'a> {
        version: &'a str,
        seed: u64,
        config: &'a ExperimentConfig,
        rows: &'a [MetricsRow],
    }
    let doc = ResultsJson {
        version: env!("CARGO_PKG_VERSION"),
        seed: cfg.scenario.seed,
        config: cfg,
        rows: &table.rows,
    };
    let json = serde_json::to_string_pretty(&doc)
        .map_err(|e| Error::InvalidConfig(format!("serializing results: {e}")))?;
    std::fs::write(&json_path, json).map_err(|source| Error::Io {
        path: json_path.clone(),
        source,
    })?;
    Ok(EmittedPaths {
        csv: csv_path,
        json: json_path,
    })
}
