//! Replicates fanned out over rayon's pool.

use codid_core::bootstrap::{summarize, BootstrapConfig, EffectEstimate, Resampler, Target};
use codid_core::panel::PanelDataset;
use codid_core::Result;
use rayon::prelude::*;

/// Same output as `codid_core::bootstrap::bootstrap`, bit for bit: every
/// replicate owns its random streams, so scheduling cannot change the draws.
pub fn bootstrap(panel: &PanelDataset, target: &Target, config: BootstrapConfig) -> Result<EffectEstimate> {
    let point = target.scalars(panel)?;
    let resampler = Resampler::new(panel, config)?;
    let estimate = |p: &PanelDataset| target.scalars(p);
    let rows: Vec<Result<Vec<f64>>> = (0..config.replicates)
        .into_par_iter()
        .map(|b| resampler.replicate_scalars(b, &estimate))
        .collect();
    // first failure in replicate order, independent of thread timing
    let replicates = rows.into_iter().collect::<Result<Vec<_>>>()?;
    summarize(target, target.names(panel), point, replicates, &resampler)
}
