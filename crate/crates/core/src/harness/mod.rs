//! Replicate campaigns: generate, count, normalize, summarize.

mod config;
mod output;
mod verify;

use std::path::PathBuf;
use std::time::Instant;

use rand::SeedableRng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use config::{Budgets, CampaignConfig, Toggles, CONFIG_SCHEMA, SCHEMA_VERSION};
pub use output::{emit_outputs, read_replicates_csv, write_replicates_csv, Manifest, ManifestEntry, CSV_HEADER};
pub use verify::{verify_all, verify_all_with, VerificationReport};

use crate::combinatorics::h_f_exact;
use crate::graph_core::{generate_supergraph, max_layer_overflow, write_dump};
use crate::layer_model::{check_normal_conditions, check_stable_conditions, ConditionReport, LayerTypeLaw};
use crate::limits::{
    default_hill_k, expected_polychromatic, hill_estimator, ks_one_sample_normal, ks_two_sample, mean_n_f_star,
    n_f_star, qq_points_normal, qq_points_two_sample, sigma_f_squared_truncated, Regime, VarianceEstimate,
    VarianceMethod,
};
use crate::motif::{clustering_coefficient, count_report_with_budget, Motif, MotifError};
use crate::special::{derive_seed, pairwise_sum};

/// Draws used by the automatic Monte Carlo variance pre-pass.
const DEFAULT_SIGMA_DRAWS: usize = 100_000;
/// Stream index reserved for auxiliary seeds.
const AUX_STREAM: u64 = u64::MAX;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),
    #[error("i/o failure: {0}")]
    IoFailure(#[from] std::io::Error),
    #[error("count invariant violated in replicate {replicate}: {detail}")]
    InvariantViolation { replicate: u64, detail: String },
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("thread pool: {0}")]
    ThreadPool(String),
}

/// One replicate's row of `replicates.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateRecord {
    pub replicate: u64,
    pub seed: u64,
    pub n_f: u64,
    pub mono: u64,
    pub poly: u64,
    pub poly_star: u64,
    pub s_tilde: u64,
    /// Sum of `N_F*` over the drawn layer types.
    pub s_f_star: f64,
    pub normalized: Option<f64>,
    /// Layers whose drawn size exceeded `n`.
    pub overflow: u64,
    pub runtime_ms: Option<u64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MomentSummary {
    pub mean: f64,
    pub variance: f64,
    pub std_error: f64,
}

impl MomentSummary {
    pub fn of(xs: &[f64]) -> Self {
        let n = xs.len() as f64;
        if xs.is_empty() {
            return MomentSummary { mean: f64::NAN, variance: f64::NAN, std_error: f64::NAN };
        }
        let mean = pairwise_sum(xs) / n;
        let dev: Vec<f64> = xs.iter().map(|x| (x - mean).powi(2)).collect();
        let variance = if xs.len() > 1 { pairwise_sum(&dev) / (n - 1.0) } else { 0.0 };
        MomentSummary { mean, variance, std_error: (variance / n).sqrt() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HillSummary {
    pub estimate: Option<f64>,
    pub k: usize,
    pub sample_size: usize,
}

/// Distributional diagnostics of the normalized statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub regime: Regime,
    pub alpha: Option<f64>,
    pub sigma_f: Option<f64>,
    pub b_m: Option<f64>,
    pub scale: Option<f64>,
    /// Normal: one-sample distance to `N(0, 1)` with sample-mean centering.
    /// Stable: two-sample distance to the independent `S_F*` batch.
    pub ks: Option<f64>,
    /// Normal regime with the a priori centering `m E N_F*`.
    pub ks_a_priori: Option<f64>,
    pub ks_s_tilde: Option<f64>,
    pub ks_s_f_star: Option<f64>,
    /// Tail index of the pooled per-layer `N_F*` values.
    pub hill: Option<HillSummary>,
    pub qq: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverlapSummary {
    pub h_f: Option<f64>,
    pub predicted_poly_star: Option<f64>,
    pub empirical_poly_star: MomentSummary,
    /// `(empirical - predicted) / std_error`.
    pub z_score: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusteringSummary {
    pub mean: f64,
    pub defined_replicates: usize,
    pub values: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregates {
    pub n_f: MomentSummary,
    pub s_tilde: MomentSummary,
    pub s_f_star: MomentSummary,
    pub mono: MomentSummary,
    pub poly: MomentSummary,
    pub poly_star: MomentSummary,
    pub overflow_total: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub schema_version: u32,
    pub config: serde_json::Value,
    pub layers: u64,
    pub motif: crate::motif::MotifSummary,
    pub replicates_requested: u64,
    pub replicates_completed: u64,
    pub truncated: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub truncation_reason: Option<String>,
    pub conditions: Option<ConditionReport>,
    pub conditions_hold: bool,
    pub warnings: Vec<String>,
    /// `E N_F*` for layers on `min(X, n)` vertices.
    pub mean_n_f_star: Option<f64>,
    /// `m E N_F*`.
    pub expected_s_f_star: Option<f64>,
    pub sigma: Option<VarianceEstimate>,
    pub aggregates: Aggregates,
    pub diagnostics: Diagnostics,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub overlap: Option<OverlapSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub clustering: Option<ClusteringSummary>,
}

#[derive(Debug, Clone)]
pub struct CampaignResult {
    pub config: CampaignConfig,
    pub records: Vec<ReplicateRecord>,
    pub summary: Summary,
    /// Per-layer `N_F*` values of every replicate, in replicate order.
    pub pooled_n_f_star: Vec<f64>,
    /// Independent `S_F*` batch (stable regime only).
    pub reference_s_f_star: Vec<f64>,
    /// `(replicate, dump)` when graph dumps are enabled.
    pub graph_dumps: Vec<(u64, String)>,
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Worker threads; `None` uses the global pool.
    pub threads: Option<usize>,
    /// Rows are appended to this CSV as replicates finish.
    pub incremental_csv: Option<PathBuf>,
}

/// Runs a campaign without writing files.
pub fn run_campaign(config: &CampaignConfig) -> Result<CampaignResult, HarnessError> {
    run_campaign_with(config, &RunOptions::default())
}

pub fn run_campaign_with(config: &CampaignConfig, options: &RunOptions) -> Result<CampaignResult, HarnessError> {
    config.validate()?;
    match options.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| HarnessError::ThreadPool(e.to_string()))?
            .install(|| Campaign::new(config)?.run(options)),
        None => Campaign::new(config)?.run(options),
    }
}

/// Conditions for the configured regime, as reported in `summary.json`.
pub fn condition_report(config: &CampaignConfig) -> Result<Option<ConditionReport>, String> {
    let motif = config.motif().map_err(|e| e.to_string())?;
    match config.regime {
        Regime::Normal => check_normal_conditions(&config.law, &motif).map(Some).map_err(|e| e.to_string()),
        Regime::Stable => check_stable_conditions(&config.law, &motif, config.alpha.unwrap_or(f64::NAN))
            .map(Some)
            .map_err(|e| e.to_string()),
        Regime::None => Ok(None),
    }
}

/// The configured variance method, or an automatic choice.
pub fn sigma_method(config: &CampaignConfig, motif: &Motif) -> VarianceMethod {
    if let Some(method) = config.sigma {
        return method;
    }
    let exact_ok = motif.vertex_count() <= 7
        && config
            .law
            .finite_support()
            .is_some_and(|s| s.iter().all(|&(x, _, _)| x.min(config.n) <= 30));
    if exact_ok {
        VarianceMethod::ExactSmall
    } else {
        VarianceMethod::MonteCarlo { draws: DEFAULT_SIGMA_DRAWS, seed: derive_seed(config.seed, AUX_STREAM) }
    }
}

struct Campaign<'a> {
    config: &'a CampaignConfig,
    motif: Motif,
    layers: u64,
    mean_star: Option<f64>,
    sigma: Option<VarianceEstimate>,
    /// `(b_m, scale)` of the a priori normalization.
    norm: Option<(f64, f64)>,
    warnings: Vec<String>,
}

struct ReplicateOutput {
    record: ReplicateRecord,
    stars: Vec<f64>,
    clustering: Option<f64>,
    dump: Option<String>,
    elapsed_ms: u64,
}

impl<'a> Campaign<'a> {
    fn new(config: &'a CampaignConfig) -> Result<Self, HarnessError> {
        let motif = config.motif().map_err(|e| HarnessError::ConfigInvalid(e.to_string()))?;
        let layers = config.layers();
        let mut warnings = Vec::new();
        let mean_star = match mean_n_f_star(&motif, &config.law, Some(config.n)) {
            Ok(v) => Some(v),
            Err(e) => {
                warnings.push(format!("E N_F* unavailable: {e}"));
                None
            }
        };
        let mut sigma = None;
        let norm = match config.regime {
            Regime::Normal => {
                match sigma_f_squared_truncated(&motif, &config.law, config.n, sigma_method(config, &motif)) {
                    Ok(est) => {
                        if est.degenerate {
                            warnings.push("layer count variance is zero; normal limit does not apply".into());
                        }
                        sigma = Some(est);
                    }
                    Err(e) => warnings.push(format!("sigma_F unavailable: {e}")),
                }
                match (sigma, mean_star) {
                    (Some(s), Some(mu)) if !s.degenerate && s.value.is_finite() => {
                        Some((layers as f64 * mu, s.value.sqrt() * (layers as f64).sqrt()))
                    }
                    _ => None,
                }
            }
            Regime::Stable => {
                let alpha = config.alpha.expect("validated");
                let b_m = if alpha > 1.0 { mean_star.map(|mu| layers as f64 * mu) } else { Some(0.0) };
                b_m.map(|b| (b, (layers as f64).powf(1.0 / alpha)))
            }
            Regime::None => None,
        };
        Ok(Campaign { config, motif, layers, mean_star, sigma, norm, warnings })
    }

    fn replicate(&self, index: u64) -> Result<ReplicateOutput, HarnessError> {
        let start = Instant::now();
        let seed = derive_seed(self.config.seed, index);
        let mut rng = crate::Rng::seed_from_u64(seed);
        let g = generate_supergraph(self.config.n as usize, self.layers as usize, &self.config.law, &mut rng);
        let report = count_report_with_budget(&self.motif, &g, self.config.count_budget()).map_err(|e| match e {
            MotifError::HostTooLarge { .. } => HarnessError::BudgetExceeded(e.to_string()),
            other => HarnessError::ConfigInvalid(other.to_string()),
        })?;
        report
            .check_invariants()
            .map_err(|detail| HarnessError::InvariantViolation { replicate: index, detail })?;
        let stars: Vec<f64> =
            g.layers().iter().map(|l| n_f_star(&self.motif, l.vertices.len() as u64, l.q_drawn)).collect();
        let s_f_star = pairwise_sum(&stars);
        let clustering = self.config.toggles.clustering.then(|| clustering_coefficient(g.flat()).value);
        let dump = self.config.toggles.dump_graphs.then(|| write_dump(&g, seed));
        let elapsed = start.elapsed().as_millis() as u64;
        Ok(ReplicateOutput {
            record: ReplicateRecord {
                replicate: index,
                seed,
                n_f: report.n_f,
                mono: report.mono,
                poly: report.poly,
                poly_star: report.poly_star,
                s_tilde: report.s_tilde,
                s_f_star,
                normalized: self.norm.map(|(b, s)| (report.n_f as f64 - b) / s),
                overflow: max_layer_overflow(&g) as u64,
                runtime_ms: self.config.toggles.timings.then_some(elapsed),
            },
            stars,
            clustering,
            dump,
            elapsed_ms: elapsed,
        })
    }

    fn run(mut self, options: &RunOptions) -> Result<CampaignResult, HarnessError> {
        let total = self.config.replicates;
        let batch = (rayon::current_num_threads() as u64 * 4).max(1);
        let mut sink = match &options.incremental_csv {
            Some(path) => Some(output::CsvSink::create(path)?),
            None => None,
        };
        let mut records = Vec::with_capacity(total as usize);
        let mut pooled = Vec::new();
        let mut clustering = Vec::new();
        let mut dumps = Vec::new();
        let mut truncation = None;
        let mut next = 0u64;
        while next < total && truncation.is_none() {
            let end = (next + batch).min(total);
            let outputs: Vec<Result<ReplicateOutput, HarnessError>> =
                (next..end).into_par_iter().map(|i| self.replicate(i)).collect();
            for out in outputs {
                let out = match out {
                    Ok(o) => o,
                    Err(HarnessError::BudgetExceeded(msg)) => {
                        truncation = Some(format!("budget exceeded: {msg}"));
                        break;
                    }
                    Err(e) => return Err(e),
                };
                if let Some(sink) = sink.as_mut() {
                    sink.write(&out.record)?;
                }
                if let Some(limit) = self.config.budgets.replicate_wall_ms {
                    let ms = out.elapsed_ms;
                    if ms > limit {
                        truncation = Some(format!("replicate {} took {ms} ms, above {limit} ms", out.record.replicate));
                    }
                }
                pooled.extend(out.stars);
                clustering.push(out.clustering);
                if let Some(d) = out.dump {
                    dumps.push((out.record.replicate, d));
                }
                records.push(out.record);
                if truncation.is_some() {
                    break;
                }
            }
            if let Some(sink) = sink.as_mut() {
                sink.flush()?;
            }
            next = end;
        }
        if let Some(reason) = &truncation {
            self.warnings.push(format!("campaign truncated: {reason}"));
        }
        let reference = self.reference_batch();
        let summary = self.summarize(&records, &pooled, &reference, &clustering, truncation);
        Ok(CampaignResult {
            config: self.config.clone(),
            records,
            summary,
            pooled_n_f_star: pooled,
            reference_s_f_star: reference,
            graph_dumps: dumps,
        })
    }

    /// Independent draws of `S_F* = sum_i N*_{F,i}` for the stable comparison.
    fn reference_batch(&self) -> Vec<f64> {
        if self.config.regime != Regime::Stable {
            return Vec::new();
        }
        let count = self.config.reference_replicates.unwrap_or(self.config.replicates);
        let base = derive_seed(self.config.seed, AUX_STREAM - 1);
        (0..count)
            .into_par_iter()
            .map(|i| reference_s_f_star(&self.motif, &self.config.law, self.config.n, self.layers, derive_seed(base, i)))
            .collect()
    }

    fn summarize(
        &self,
        records: &[ReplicateRecord],
        pooled: &[f64],
        reference: &[f64],
        clustering: &[Option<f64>],
        truncation: Option<String>,
    ) -> Summary {
        let col = |f: fn(&ReplicateRecord) -> f64| records.iter().map(f).collect::<Vec<f64>>();
        let n_f = col(|r| r.n_f as f64);
        let s_tilde = col(|r| r.s_tilde as f64);
        let s_f_star = col(|r| r.s_f_star);
        let poly_star = col(|r| r.poly_star as f64);
        let aggregates = Aggregates {
            n_f: MomentSummary::of(&n_f),
            s_tilde: MomentSummary::of(&s_tilde),
            s_f_star: MomentSummary::of(&s_f_star),
            mono: MomentSummary::of(&col(|r| r.mono as f64)),
            poly: MomentSummary::of(&col(|r| r.poly as f64)),
            poly_star: MomentSummary::of(&poly_star),
            overflow_total: records.iter().map(|r| r.overflow).sum(),
        };
        let mut warnings = self.warnings.clone();
        let diagnostics = self.diagnostics(&n_f, &s_tilde, &s_f_star, pooled, reference, &mut warnings);

        let (conditions, conditions_hold) = match condition_report(self.config) {
            Ok(Some(report)) => {
                let hold = report.all_hold();
                if !hold {
                    warnings.push("limit theorem conditions fail for this law".into());
                }
                (Some(report), hold)
            }
            Ok(None) => (None, true),
            Err(e) => {
                warnings.push(format!("condition check: {e}"));
                (None, false)
            }
        };

        let overlap = self.config.toggles.h_f.then(|| {
            let empirical = MomentSummary::of(&poly_star);
            match h_f_exact(&self.motif, self.config.n, self.layers, &self.config.law) {
                Ok(h) => {
                    let predicted = expected_polychromatic(&self.motif, self.config.n, h);
                    let z = (empirical.mean - predicted) / empirical.std_error;
                    OverlapSummary {
                        h_f: Some(h),
                        predicted_poly_star: Some(predicted),
                        empirical_poly_star: empirical,
                        z_score: z.is_finite().then_some(z),
                        error: None,
                    }
                }
                Err(e) => OverlapSummary {
                    h_f: None,
                    predicted_poly_star: None,
                    empirical_poly_star: empirical,
                    z_score: None,
                    error: Some(e.to_string()),
                },
            }
        });

        let clustering = self.config.toggles.clustering.then(|| {
            let defined: Vec<f64> = clustering.iter().flatten().copied().filter(|v| v.is_finite()).collect();
            ClusteringSummary {
                mean: if defined.is_empty() { f64::NAN } else { pairwise_sum(&defined) / defined.len() as f64 },
                defined_replicates: defined.len(),
                values: clustering.iter().map(|v| v.filter(|x| x.is_finite())).collect(),
            }
        });

        Summary {
            schema_version: SCHEMA_VERSION,
            config: serde_json::to_value(self.config).expect("config serializes"),
            layers: self.layers,
            motif: self.motif.summary(),
            replicates_requested: self.config.replicates,
            replicates_completed: records.len() as u64,
            truncated: truncation.is_some(),
            truncation_reason: truncation,
            conditions,
            conditions_hold,
            warnings,
            mean_n_f_star: self.mean_star,
            expected_s_f_star: self.mean_star.map(|mu| mu * self.layers as f64),
            sigma: self.sigma,
            aggregates,
            diagnostics,
            overlap,
            clustering,
        }
    }

    fn diagnostics(
        &self,
        n_f: &[f64],
        s_tilde: &[f64],
        s_f_star: &[f64],
        pooled: &[f64],
        reference: &[f64],
        warnings: &mut Vec<String>,
    ) -> Diagnostics {
        let regime = self.config.regime;
        let mut d = Diagnostics {
            regime,
            alpha: self.config.alpha.filter(|_| regime == Regime::Stable),
            sigma_f: self.sigma.map(|s| s.value.sqrt()),
            b_m: self.norm.map(|n| n.0),
            scale: self.norm.map(|n| n.1),
            ks: None,
            ks_a_priori: None,
            ks_s_tilde: None,
            ks_s_f_star: None,
            hill: None,
            qq: Vec::new(),
        };
        if n_f.is_empty() {
            return d;
        }
        if regime != Regime::Normal {
            let k = self.config.hill_k.unwrap_or_else(|| default_hill_k(pooled.len()));
            let estimate = match hill_estimator(pooled, k) {
                Ok(a) => Some(a),
                Err(e) => {
                    warnings.push(format!("Hill estimate unavailable: {e}"));
                    None
                }
            };
            d.hill = Some(HillSummary { estimate, k, sample_size: pooled.len() });
        }
        let Some((b_m, scale)) = self.norm else {
            return d;
        };
        match regime {
            Regime::Normal => {
                let centered = |xs: &[f64]| {
                    let mean = pairwise_sum(xs) / xs.len() as f64;
                    xs.iter().map(|x| (x - mean) / scale).collect::<Vec<f64>>()
                };
                let z = centered(n_f);
                d.ks = ks_one_sample_normal(&z).ok();
                let a_priori: Vec<f64> = n_f.iter().map(|x| (x - b_m) / scale).collect();
                d.ks_a_priori = ks_one_sample_normal(&a_priori).ok();
                d.ks_s_tilde = ks_one_sample_normal(&centered(s_tilde)).ok();
                d.ks_s_f_star = ks_one_sample_normal(&centered(s_f_star)).ok();
                d.qq = qq_points_normal(&z);
            }
            Regime::Stable => {
                let norm = |xs: &[f64]| xs.iter().map(|x| (x - b_m) / scale).collect::<Vec<f64>>();
                let reference = norm(reference);
                let z = norm(n_f);
                d.ks = ks_two_sample(&z, &reference).ok();
                d.ks_s_tilde = ks_two_sample(&norm(s_tilde), &reference).ok();
                d.ks_s_f_star = ks_two_sample(&norm(s_f_star), &reference).ok();
                d.qq = qq_points_two_sample(&z, &reference, 99);
            }
            Regime::None => {}
        }
        d
    }
}

/// One draw of `S_F*` from `m` fresh layer types.
pub fn reference_s_f_star(motif: &Motif, law: &LayerTypeLaw, n: u64, m: u64, seed: u64) -> f64 {
    let mut rng = crate::Rng::seed_from_u64(seed);
    let stars: Vec<f64> = (0..m)
        .map(|_| {
            let (x, q) = law.sample(&mut rng);
            n_f_star(motif, x.min(n), q)
        })
        .collect();
    pairwise_sum(&stars)
}
