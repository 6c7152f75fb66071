//! Reconstruction quality metrics and trial statistics.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::linops::norm2;

/// Value reported when a reconstruction (or a noise vector) is exact.
pub const EXACT_RECOVERY_DB: f64 = 300.0;

/// `20 log10(|x| / |x - x_hat|)`, capped at [`EXACT_RECOVERY_DB`].
pub fn snr(x: &[f64], x_hat: &[f64]) -> Result<f64> {
    if x.len() != x_hat.len() {
        return Err(invalid(format!("snr: lengths {} and {} differ", x.len(), x_hat.len())));
    }
    let signal = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if signal == 0.0 {
        return Err(invalid("snr: reference signal is zero"));
    }
    let err = x.iter().zip(x_hat).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    Ok(ratio_db(signal, err))
}

fn ratio_db(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        return EXACT_RECOVERY_DB;
    }
    (20.0 * (num / den).log10()).min(EXACT_RECOVERY_DB)
}

/// `20 log10(|y0| / |n|)` for a realized noise vector.
pub fn realized_isnr(y0: &[Complex64], noise: &[Complex64]) -> f64 {
    ratio_db(norm2(y0), norm2(noise))
}

/// One reconstruction trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial_seed: u64,
    pub snr_db: f64,
    pub realized_isnr_db: f64,
    pub iterations_total: usize,
    pub wall_time_s: f64,
    pub config_digest: String,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub mean: f64,
    /// Sample standard deviation (n - 1 denominator); 0 for a single value.
    pub std: f64,
    pub count: usize,
}

pub fn summarize(values: &[f64]) -> Result<Summary> {
    if values.is_empty() {
        return Err(invalid("cannot summarize an empty set"));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let std = if values.len() < 2 {
        0.0
    } else {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    };
    Ok(Summary {
        mean,
        std,
        count: values.len(),
    })
}

/// Mean and sample standard deviation of the SNR over trials.
pub fn aggregate(records: &[TrialRecord]) -> Result<Summary> {
    let snrs: Vec<f64> = records.iter().map(|r| r.snr_db).collect();
    summarize(&snrs)
}
