//! Replication fan-out. Results come back in replication order, so every
//! reduction downstream is identical for any worker count.

use aloha_core::dynamic::{delays_along_axis, DelayRecord};
use aloha_core::estimators::{
    self, nn_diverges, opportunistic_diverges, ConnectTimeEstimate, DegreeStats, EstimatorError,
};
use aloha_core::percolation::giant_component;
use aloha_core::{replication_stream, NetworkConfig, PointSet, PointSetError};
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, Default)]
pub struct Runner {
    /// Worker threads; `None` uses the rayon default, `Some(1)` runs inline.
    pub jobs: Option<usize>,
}

impl Runner {
    pub fn serial() -> Self {
        Self { jobs: Some(1) }
    }

    pub fn with_jobs(jobs: usize) -> Self {
        Self { jobs: Some(jobs.max(1)) }
    }

    /// `(0..n).map(f)` evaluated on the worker pool, in index order.
    pub fn map<T, F>(&self, n: u64, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(u64) -> T + Sync + Send,
    {
        match self.jobs {
            Some(1) => (0..n).map(f).collect(),
            Some(k) => rayon::ThreadPoolBuilder::new()
                .num_threads(k)
                .build()
                .expect("thread pool")
                .install(|| (0..n).into_par_iter().map(&f).collect()),
            None => (0..n).into_par_iter().map(f).collect(),
        }
    }

    pub fn degrees(
        &self,
        config: &NetworkConfig,
        sweep: u64,
        replications: u64,
    ) -> Result<DegreeStats, EstimatorError> {
        let samples = self
            .map(replications, |r| estimators::sample_degrees(config, &mut replication_stream(config.seed, sweep, r)))
            .into_iter()
            .collect::<Result<Vec<_>, _>>()?;
        Ok(DegreeStats::from_samples(&samples, config.p))
    }

    pub fn nn_times(
        &self,
        config: &NetworkConfig,
        sweep: u64,
        replications: u64,
    ) -> Result<Vec<Option<u64>>, EstimatorError> {
        self.map(replications, |r| {
            estimators::sample_nn_connect_time(config, &mut replication_stream(config.seed, sweep, r))
        })
        .into_iter()
        .collect()
    }

    pub fn opportunistic_times(
        &self,
        config: &NetworkConfig,
        sweep: u64,
        replications: u64,
    ) -> Result<Vec<Option<u64>>, EstimatorError> {
        self.map(replications, |r| {
            estimators::sample_opportunistic_time(config, &mut replication_stream(config.seed, sweep, r))
        })
        .into_iter()
        .collect()
    }

    pub fn nn_connect_time(
        &self,
        config: &NetworkConfig,
        sweep: u64,
        replications: u64,
    ) -> Result<ConnectTimeEstimate, EstimatorError> {
        let samples = self.nn_times(config, sweep, replications)?;
        ConnectTimeEstimate::from_samples(&samples, config.max_slots, nn_diverges(config)?).check_horizon()
    }

    pub fn opportunistic_time(
        &self,
        config: &NetworkConfig,
        sweep: u64,
        replications: u64,
    ) -> Result<ConnectTimeEstimate, EstimatorError> {
        let samples = self.opportunistic_times(config, sweep, replications)?;
        ConnectTimeEstimate::from_samples(&samples, config.max_slots, opportunistic_diverges(config)?).check_horizon()
    }

    /// Delay records along +x for every replication. Replication `r` draws the
    /// network and then the slot marks from one stream. With `giant_only`,
    /// source, relays and destinations are restricted to the giant component.
    pub fn delays(
        &self,
        config: &NetworkConfig,
        sweep: u64,
        replications: u64,
        offsets: &[f64],
        giant_only: bool,
    ) -> Result<Vec<DelayRecord>, (u64, EstimatorError)> {
        let per_rep = self.map(replications, |r| -> Result<Vec<DelayRecord>, EstimatorError> {
            let mut rng = replication_stream(config.seed, sweep, r);
            let ps = PointSet::sample(config, &mut rng)?;
            let giant = giant_only.then(|| giant_component(&ps, config.eta, config.lambda));
            let mask = giant.as_ref().map(|g| g.members.as_slice());
            delays_along_axis(&ps, offsets, config, &mut rng, mask, r)
                .ok_or_else(|| PointSetError::TooFewPoints(0).into())
        });
        let mut out = Vec::new();
        for (r, recs) in per_rep.into_iter().enumerate() {
            out.extend(recs.map_err(|e| (r as u64, e))?);
        }
        Ok(out)
    }

    /// Giant-component fraction and component count per replication.
    pub fn giant_fractions(
        &self,
        config: &NetworkConfig,
        sweep: u64,
        replications: u64,
    ) -> Result<Vec<(f64, usize, usize)>, EstimatorError> {
        self.map(replications, |r| {
            let ps = PointSet::sample(config, &mut replication_stream(config.seed, sweep, r))?;
            let g = giant_component(&ps, config.eta, config.lambda);
            Ok((g.fraction, g.n_components, ps.len()))
        })
        .into_iter()
        .collect()
    }
}
