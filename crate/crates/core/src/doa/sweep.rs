use rayon::prelude::*;

use super::scenario::Scenario;
use super::tracking::run_tracking;
use crate::error::{Error, Result};
use crate::rank::CostSchedule;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub rate: f64,
    pub mm_mean: f64,
    pub mm_sd: f64,
    pub kn_mean: f64,
    pub kn_sd: f64,
}

/// Seed for replicate `replicate` at rate index `rate_index`, mixed from
/// the scenario seed with SplitMix64 so nearby indices decorrelate.
pub fn replicate_seed(base: u64, rate_index: usize, replicate: usize) -> u64 {
    let mut z = base ^ ((rate_index as u64) << 32) ^ replicate as u64;
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mean and sample standard deviation (zero for a single value).
pub fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Time-averaged rank error of both estimators at each sampling rate, over
/// independent replicates with equal unit costs.
///
/// Replicates run in parallel; results are reduced in replicate order, so
/// the table does not depend on scheduling.
pub fn sweep_sampling_rate(scenario: &Scenario, rates: &[f64], replicates: usize, kn_false_alarm: f64) -> Result<Vec<SweepRow>> {
    if replicates == 0 {
        return Err(Error::InvalidParameter("need at least one replicate".into()));
    }
    if rates.is_empty() || rates.iter().any(|&r| !(r > 0.0 && r.is_finite())) {
        return Err(Error::InvalidParameter("rates must be positive".into()));
    }
    let costs = CostSchedule::equal(scenario.n, 1.0)?;
    let jobs: Vec<(usize, usize)> = (0..rates.len()).flat_map(|i| (0..replicates).map(move |r| (i, r))).collect();
    let errors: Vec<(f64, f64)> = jobs
        .par_iter()
        .map(|&(i, rep)| {
            let s = scenario.with_sampling_rate(rates[i]).with_seed(replicate_seed(scenario.seed, i, rep));
            let trace = run_tracking(&s, &costs, kn_false_alarm)?;
            Ok((trace.rank_error_mm(), trace.rank_error_kn()))
        })
        .collect::<Result<_>>()?;

    Ok(rates
        .iter()
        .enumerate()
        .map(|(i, &rate)| {
            let chunk = &errors[i * replicates..(i + 1) * replicates];
            let (mm_mean, mm_sd) = mean_sd(&chunk.iter().map(|e| e.0).collect::<Vec<_>>());
            let (kn_mean, kn_sd) = mean_sd(&chunk.iter().map(|e| e.1).collect::<Vec<_>>());
            SweepRow { rate, mm_mean, mm_sd, kn_mean, kn_sd }
        })
        .collect())
}
