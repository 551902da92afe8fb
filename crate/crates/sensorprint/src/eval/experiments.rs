//! The identification experiments.
//!
//! Every experiment runs over a [`Bench`]: the configured models are
//! instantiated `instances_per_model` times with seeded process variation
//! and bootstrapped into full fingerprints. Field measurements then draw a
//! per-session ambient temperature (the bootstrap and field sessions never
//! share the exact ambient), probe the instance single-shot per frequency,
//! and match the resulting partial fingerprint.
//!
//! Probe subsets here are uniform random grid subsets, not the hash-derived
//! sets of the live protocol: the experiments characterize matching quality
//! over arbitrary probe choices.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use sensorprint_core::fingerprint::{
    bootstrap, extract_partial, match_partial, FullFingerprint, PartialFingerprint,
};
use sensorprint_core::seed::derive_seed;
use sensorprint_core::sensor::{
    instantiate, CaptureSpec, ChallengeTemplate, Environment, SensorInstance, SensorModel,
};

use crate::error::{Error, Result};
use crate::eval::{ConfusionCounts, ExperimentConfig};
use crate::modelfile;

/// One simulated, bootstrapped device.
pub struct BenchDevice {
    pub model_idx: usize,
    pub instance_idx: u32,
    pub device_id: String,
    pub instance: SensorInstance,
    pub template: ChallengeTemplate,
    pub full: FullFingerprint,
}

/// All devices of an experiment run.
pub struct Bench {
    pub devices: Vec<BenchDevice>,
    /// Model index -> indices into `devices`.
    pub by_model: Vec<Vec<usize>>,
    pub model_names: Vec<String>,
    pub capture: CaptureSpec,
}

/// Resolve the configured model pool: builtin presets plus model files.
fn resolve_models(config: &ExperimentConfig) -> Result<Vec<SensorModel>> {
    let mut models = Vec::new();
    for name in &config.models {
        let model = SensorModel::preset(name).ok_or_else(|| Error::Config {
            reason: format!("unknown model preset '{name}'"),
        })?;
        models.push(model);
    }
    for path in &config.model_files {
        models.push(modelfile::read_model(path)?);
    }
    Ok(models)
}

/// Instantiate and bootstrap every device of the configured pool.
pub fn build_bench(config: &ExperimentConfig) -> Result<Bench> {
    config.validate()?;
    let models = resolve_models(config)?;
    let capture = CaptureSpec::default();
    let env = config.environment();
    let mut devices = Vec::new();
    let mut by_model = Vec::new();
    let mut model_names = Vec::new();

    for (model_idx, model) in models.iter().enumerate() {
        let mut indices = Vec::new();
        for instance_idx in 0..config.instances_per_model {
            let device_seed = derive_seed(
                config.base_seed,
                "instance",
                &[model_idx as u64, instance_idx as u64],
            );
            let instance = instantiate(model, device_seed)?;
            let device_id = format!("{}-{instance_idx}", model.name);
            let template = model.default_challenge();
            let full = bootstrap(
                &device_id,
                &config.grid,
                config.n_repeats,
                template,
                &env,
                |challenge, env, repeat| {
                    let seed = derive_seed(
                        device_seed,
                        "bootstrap",
                        &[challenge.frequency_hz.to_bits(), repeat as u64],
                    );
                    instance.respond(challenge, env, &capture, seed)
                },
            )?;
            indices.push(devices.len());
            devices.push(BenchDevice {
                model_idx,
                instance_idx,
                device_id,
                instance,
                template,
                full,
            });
        }
        by_model.push(indices);
        model_names.push(model.name.clone());
    }
    Ok(Bench {
        devices,
        by_model,
        model_names,
        capture,
    })
}

impl Bench {
    fn require_siblings(&self) -> Result<()> {
        if self.by_model.iter().any(|ids| ids.len() < 2) {
            return Err(Error::Config {
                reason: "intra-device experiments need instances_per_model >= 2".into(),
            });
        }
        Ok(())
    }

    /// Draw a field session for one matching: ambient drift, a uniform
    /// random probe subset of size `p`, and the probe readings.
    pub fn probe_session(
        &self,
        config: &ExperimentConfig,
        device: &BenchDevice,
        p: usize,
        rng: &mut ChaCha8Rng,
    ) -> Result<PartialFingerprint> {
        let drift: f64 = StandardNormal.sample(rng);
        let env = Environment::new(
            config.temperature_c + drift * config.session_drift_std_c,
            config.temp_jitter_std_c,
        );
        let frequencies = random_subset(rng, &config.grid, p);
        let partial = extract_partial(
            &device.device_id,
            &frequencies,
            device.template,
            &env,
            0,
            |challenge, env| {
                let seed: u64 = rng.random();
                device.instance.respond(challenge, env, &self.capture, seed)
            },
        )?;
        Ok(partial)
    }

    /// A sibling of `device` (same model, different instance).
    fn pick_sibling(&self, device_idx: usize, rng: &mut ChaCha8Rng) -> usize {
        let device = &self.devices[device_idx];
        let siblings = &self.by_model[device.model_idx];
        loop {
            let candidate = siblings[rng.random_range(0..siblings.len())];
            if candidate != device_idx {
                return candidate;
            }
        }
    }

    /// A device of a different model than `device`.
    fn pick_foreign(&self, device_idx: usize, rng: &mut ChaCha8Rng) -> usize {
        let device = &self.devices[device_idx];
        loop {
            let candidate = rng.random_range(0..self.devices.len());
            if self.devices[candidate].model_idx != device.model_idx {
                return candidate;
            }
        }
    }
}

/// Uniform random subset of `p` distinct grid frequencies (partial
/// Fisher-Yates), in draw order.
fn random_subset(rng: &mut ChaCha8Rng, grid: &sensorprint_core::fingerprint::FrequencyGrid, p: usize) -> Vec<f64> {
    let n = grid.len();
    let mut indices: Vec<usize> = (0..n).collect();
    let mut out = Vec::with_capacity(p);
    for i in 0..p {
        let j = rng.random_range(i..n);
        indices.swap(i, j);
        out.push(grid.frequency(indices[i]));
    }
    out
}

fn mean_and_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// One row of the partial-fingerprint-size study.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PSweepRow {
    pub p: usize,
    pub mean_rmse_target: f64,
    pub std_rmse_target: f64,
    pub mean_rmse_intra: f64,
    pub std_rmse_intra: f64,
}

/// RMSE against the own (target) and sibling (intra) fingerprints for each
/// partial-fingerprint size. `n_matchings` sessions per device and size;
/// each session's partial is matched against both fingerprints.
pub fn compute_p_sweep(config: &ExperimentConfig, bench: &Bench) -> Result<Vec<PSweepRow>> {
    bench.require_siblings()?;
    let mut rows = Vec::with_capacity(config.p_values.len());
    for &p in &config.p_values {
        let mut target = Vec::new();
        let mut intra = Vec::new();
        for (device_idx, device) in bench.devices.iter().enumerate() {
            for m in 0..config.n_matchings {
                let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(
                    config.base_seed,
                    "p-sweep",
                    &[p as u64, device_idx as u64, m as u64],
                ));
                let partial = bench.probe_session(config, device, p, &mut rng)?;
                let own = match_partial(&device.full, &partial, 1.0)?;
                target.push(own.epsilon);
                let sibling_idx = bench.pick_sibling(device_idx, &mut rng);
                let sibling = match_partial(&bench.devices[sibling_idx].full, &partial, 1.0)?;
                intra.push(sibling.epsilon);
            }
        }
        let (mean_rmse_target, std_rmse_target) = mean_and_std(&target);
        let (mean_rmse_intra, std_rmse_intra) = mean_and_std(&intra);
        rows.push(PSweepRow {
            p,
            mean_rmse_target,
            std_rmse_target,
            mean_rmse_intra,
            std_rmse_intra,
        });
    }
    Ok(rows)
}

/// One row of the threshold study.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaRow {
    pub theta: f64,
    pub counts: ConfusionCounts,
}

/// Classify a fixed pool of genuine and impostor attempts under every
/// configured threshold. The pool holds `n_matchings` genuine attempts
/// (devices round-robin) and `n_matchings` impostors, alternating between
/// inter-model and intra-model sources.
pub fn compute_theta_sweep(
    config: &ExperimentConfig,
    bench: &Bench,
    p: usize,
) -> Result<Vec<ThetaRow>> {
    bench.require_siblings()?;
    let n = config.n_matchings;

    let mut genuine = Vec::with_capacity(n as usize);
    for m in 0..n {
        let device_idx = m as usize % bench.devices.len();
        let device = &bench.devices[device_idx];
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(
            config.base_seed,
            "theta-genuine",
            &[p as u64, m as u64],
        ));
        let partial = bench.probe_session(config, device, p, &mut rng)?;
        genuine.push(match_partial(&device.full, &partial, 1.0)?.epsilon);
    }

    let mut impostor_inter = Vec::new();
    let mut impostor_intra = Vec::new();
    for m in 0..n {
        let target_idx = m as usize % bench.devices.len();
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(
            config.base_seed,
            "theta-impostor",
            &[p as u64, m as u64],
        ));
        let source_idx = if m % 2 == 0 {
            bench.pick_foreign(target_idx, &mut rng)
        } else {
            bench.pick_sibling(target_idx, &mut rng)
        };
        let source = &bench.devices[source_idx];
        let partial = bench.probe_session(config, source, p, &mut rng)?;
        let epsilon = match_partial(&bench.devices[target_idx].full, &partial, 1.0)?.epsilon;
        if m % 2 == 0 {
            impostor_inter.push(epsilon);
        } else {
            impostor_intra.push(epsilon);
        }
    }

    let mut rows = Vec::with_capacity(config.theta_values.len());
    for &theta in &config.theta_values {
        let tp = genuine.iter().filter(|e| **e <= theta).count() as u64;
        let false_neg = genuine.len() as u64 - tp;
        let fp_inter = impostor_inter.iter().filter(|e| **e <= theta).count() as u64;
        let fp_intra = impostor_intra.iter().filter(|e| **e <= theta).count() as u64;
        let true_neg =
            (impostor_inter.len() + impostor_intra.len()) as u64 - fp_inter - fp_intra;
        rows.push(ThetaRow {
            theta,
            counts: ConfusionCounts::from_counts(tp, fp_inter, fp_intra, false_neg, true_neg),
        });
    }
    Ok(rows)
}

/// Identification accuracy of one model at a fixed operating point.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfusion {
    pub model: String,
    pub n_matchings: u32,
    pub counts: ConfusionCounts,
}

impl ModelConfusion {
    pub fn fn_rate(&self) -> f64 {
        self.counts.false_neg as f64 / self.n_matchings as f64
    }

    pub fn fp_inter_rate(&self) -> f64 {
        self.counts.fp_inter as f64 / self.n_matchings as f64
    }

    pub fn fp_intra_rate(&self) -> f64 {
        self.counts.fp_intra as f64 / self.n_matchings as f64
    }
}

/// Per-model confusion at `(p, theta)`: `n_matchings` genuine attempts,
/// `n_matchings` inter-model impostors, and `n_matchings` intra-model
/// impostors per model.
pub fn compute_confusion(
    config: &ExperimentConfig,
    bench: &Bench,
    p: usize,
    theta: f64,
) -> Result<Vec<ModelConfusion>> {
    bench.require_siblings()?;
    let n = config.n_matchings;
    let mut out = Vec::with_capacity(bench.model_names.len());
    for (model_idx, name) in bench.model_names.iter().enumerate() {
        let members = &bench.by_model[model_idx];
        let mut true_pos = 0u64;
        let mut false_neg = 0u64;
        let mut fp_inter = 0u64;
        let mut fp_intra = 0u64;
        let mut true_neg = 0u64;

        for m in 0..n {
            let target_idx = members[m as usize % members.len()];
            let target = &bench.devices[target_idx];

            // Genuine attempt by the target itself.
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(
                config.base_seed,
                "confusion-genuine",
                &[model_idx as u64, m as u64],
            ));
            let partial = bench.probe_session(config, target, p, &mut rng)?;
            if match_partial(&target.full, &partial, theta)?.accepted {
                true_pos += 1;
            } else {
                false_neg += 1;
            }

            // Impostor from another model.
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(
                config.base_seed,
                "confusion-inter",
                &[model_idx as u64, m as u64],
            ));
            let source_idx = bench.pick_foreign(target_idx, &mut rng);
            let partial =
                bench.probe_session(config, &bench.devices[source_idx], p, &mut rng)?;
            if match_partial(&target.full, &partial, theta)?.accepted {
                fp_inter += 1;
            } else {
                true_neg += 1;
            }

            // Impostor sibling of the same model.
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(
                config.base_seed,
                "confusion-intra",
                &[model_idx as u64, m as u64],
            ));
            let source_idx = bench.pick_sibling(target_idx, &mut rng);
            let partial =
                bench.probe_session(config, &bench.devices[source_idx], p, &mut rng)?;
            if match_partial(&target.full, &partial, theta)?.accepted {
                fp_intra += 1;
            } else {
                true_neg += 1;
            }
        }
        out.push(ModelConfusion {
            model: name.clone(),
            n_matchings: n,
            counts: ConfusionCounts::from_counts(true_pos, fp_inter, fp_intra, false_neg, true_neg),
        });
    }
    Ok(out)
}

fn ensure_output_dir(config: &ExperimentConfig) -> Result<()> {
    fs::create_dir_all(&config.output_dir).map_err(|e| Error::io(&config.output_dir, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Sweep every device and emit one CSV per device plus a gnuplot script.
///
/// CSV columns: `frequency_hz,mean_rms,std_rms,mean_var`, one row per grid
/// frequency, preceded by a `#` header line.
pub fn run_sweep(config: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    let bench = build_bench(config)?;
    ensure_output_dir(config)?;
    let mut paths = Vec::new();
    for device in &bench.devices {
        let mut csv = String::from("# frequency_hz,mean_rms,std_rms,mean_var\n");
        for e in &device.full.entries {
            let _ = writeln!(
                csv,
                "{},{},{},{}",
                e.frequency_hz, e.mean_rms_v, e.std_rms_v, e.mean_variance_v2
            );
        }
        let path = config
            .output_dir
            .join(format!("sweep_{}.csv", device.device_id));
        write_text(&path, &csv)?;
        paths.push(path);
    }

    let mut gp = String::from(
        "set datafile separator ','\nset logscale x\nset xlabel 'frequency [Hz]'\n\
         set ylabel 'RMS [V]'\nset key outside\nplot \\\n",
    );
    for (i, device) in bench.devices.iter().enumerate() {
        let sep = if i + 1 == bench.devices.len() { "" } else { ", \\" };
        let _ = writeln!(
            gp,
            "  'sweep_{id}.csv' using 1:2 with lines title '{id}'{sep}",
            id = device.device_id
        );
    }
    write_text(&config.output_dir.join("sweep.gp"), &gp)?;
    Ok(paths)
}

/// Run the partial-fingerprint-size study and emit `p_sweep.csv`.
pub fn run_p_sweep(config: &ExperimentConfig) -> Result<PathBuf> {
    let bench = build_bench(config)?;
    let rows = compute_p_sweep(config, &bench)?;
    ensure_output_dir(config)?;
    let mut csv =
        String::from("# p,mean_rmse_target,std_rmse_target,mean_rmse_intra,std_rmse_intra\n");
    for r in &rows {
        let _ = writeln!(
            csv,
            "{},{},{},{},{}",
            r.p, r.mean_rmse_target, r.std_rmse_target, r.mean_rmse_intra, r.std_rmse_intra
        );
    }
    let path = config.output_dir.join("p_sweep.csv");
    write_text(&path, &csv)?;
    let gp = concat!(
        "set datafile separator ','\n",
        "set xlabel 'points per partial fingerprint'\n",
        "set ylabel 'RMSE [V]'\n",
        "set key left top\n",
        "plot 'p_sweep.csv' using 1:2:3 with yerrorlines title 'target device', \\\n",
        "     'p_sweep.csv' using 1:4:5 with yerrorlines title 'intra device'\n",
    );
    write_text(&config.output_dir.join("p_sweep.gp"), gp)?;
    Ok(path)
}

/// Run the threshold study and emit `theta_sweep.csv`.
pub fn run_theta_sweep(config: &ExperimentConfig, p: usize) -> Result<PathBuf> {
    let bench = build_bench(config)?;
    let rows = compute_theta_sweep(config, &bench, p)?;
    ensure_output_dir(config)?;
    let mut csv = String::from("# theta,precision,recall,f1\n");
    for r in &rows {
        let _ = writeln!(
            csv,
            "{},{},{},{}",
            r.theta, r.counts.precision, r.counts.recall, r.counts.f1
        );
    }
    let path = config.output_dir.join("theta_sweep.csv");
    write_text(&path, &csv)?;
    write_text(
        &config.output_dir.join("theta_sweep.gp"),
        "set datafile separator ','\nset xlabel 'threshold'\nset ylabel 'score'\n\
         set key right bottom\nset yrange [0:1.05]\n\
         plot 'theta_sweep.csv' using 1:2 with linespoints title 'precision', \\\n\
              'theta_sweep.csv' using 1:3 with linespoints title 'recall', \\\n\
              'theta_sweep.csv' using 1:4 with linespoints title 'F1'\n",
    )?;
    Ok(path)
}

/// Run the confusion study and emit `confusion.csv`.
pub fn run_confusion(
    config: &ExperimentConfig,
    p: usize,
    theta: f64,
) -> Result<(Vec<ModelConfusion>, PathBuf)> {
    let bench = build_bench(config)?;
    let rows = compute_confusion(config, &bench, p, theta)?;
    ensure_output_dir(config)?;
    let mut csv = String::from("# model,fn_rate,fp_inter_rate,fp_intra_rate\n");
    for r in &rows {
        let _ = writeln!(
            csv,
            "{},{},{},{}",
            r.model,
            r.fn_rate(),
            r.fp_inter_rate(),
            r.fp_intra_rate()
        );
    }
    let path = config.output_dir.join("confusion.csv");
    write_text(&path, &csv)?;
    Ok((rows, path))
}

/// Render the confusion rows as an aligned table.
pub fn confusion_table(rows: &[ModelConfusion]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{:<12} {:>8} {:>12} {:>12}", "model", "FN", "FP(inter)", "FP(intra)");
    for r in rows {
        let _ = writeln!(
            out,
            "{:<12} {:>7.1}% {:>11.1}% {:>11.1}%",
            r.model,
            100.0 * r.fn_rate(),
            100.0 * r.fp_inter_rate(),
            100.0 * r.fp_intra_rate()
        );
    }
    out
}

