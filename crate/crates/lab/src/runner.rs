//! Parallel sweep execution with deterministic output order.

use rayon::prelude::*;

use hrisk_core::sweep::{assemble, prepare_points, simulate_seed, sweep_context, SweepOutput, SweepSpec};

use crate::error::Result;

/// Same result as [`hrisk_core::sweep::run_sweep`], with the (point, seed)
/// simulations spread over the rayon pool.
pub fn run_sweep_parallel(spec: &SweepSpec) -> Result<SweepOutput> {
    let ctx = sweep_context(spec)?;
    let points = prepare_points(spec, &ctx)?;
    let jobs: Vec<_> = points.iter().flat_map(|p| spec.seeds.iter().map(move |&s| (p, s))).collect();
    let outcomes = jobs
        .par_iter()
        .map(|(p, seed)| simulate_seed(spec, p, *seed))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let outcomes: Vec<_> = outcomes.into_iter().flatten().collect();
    Ok(assemble(spec, ctx, &points, &outcomes)?)
}
