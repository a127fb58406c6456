//! A [`NetDbSource`] backed by a generated model.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::network::NetworkModel;
use crate::hash::RouterHash;
use crate::protocol::{NetDbSource, SourceError};
use crate::record::RouterInfo;

/// Local NetDB and console view over a [`NetworkModel`].
///
/// The console starts with whatever is in the local view; each successful
/// probe adds the probed floodfill's stored records to it.
#[derive(Debug, Clone)]
pub struct SimulatedSource<'m> {
    model: &'m NetworkModel,
    local: HashSet<RouterHash>,
    console: HashSet<RouterHash>,
    failure_rate: f64,
    rng: ChaCha8Rng,
    probes: usize,
}

impl<'m> SimulatedSource<'m> {
    /// Empty local and console views; probes never fail.
    pub fn new(model: &'m NetworkModel) -> Self {
        Self {
            model,
            local: HashSet::new(),
            console: HashSet::new(),
            failure_rate: 0.0,
            rng: ChaCha8Rng::seed_from_u64(0),
            probes: 0,
        }
    }

    /// Records the local router already holds. Unpublished hashes are ignored.
    pub fn with_local(mut self, hashes: impl IntoIterator<Item = RouterHash>) -> Self {
        for h in hashes {
            if self.model.record(&h).is_some() {
                self.local.insert(h);
                self.console.insert(h);
            }
        }
        self
    }

    /// Each probe fails independently with probability `rate`.
    pub fn with_failure_rate(mut self, rate: f64, seed: u64) -> Self {
        self.failure_rate = rate.clamp(0.0, 1.0);
        self.rng = ChaCha8Rng::seed_from_u64(seed);
        self
    }

    pub fn probes_issued(&self) -> usize {
        self.probes
    }

    pub fn console_view(&self) -> &HashSet<RouterHash> {
        &self.console
    }
}

impl NetDbSource for SimulatedSource<'_> {
    fn lookup_local(&self, hash: &RouterHash) -> Option<RouterInfo> {
        self.local
            .contains(hash)
            .then(|| self.model.record(hash).cloned())
            .flatten()
    }

    fn lookup_console(&mut self, hash: &RouterHash) -> Result<Option<RouterInfo>, SourceError> {
        Ok(self
            .console
            .contains(hash)
            .then(|| self.model.record(hash).cloned())
            .flatten())
    }

    fn probe_floodfill(&mut self, floodfill: &RouterHash) -> Result<(), SourceError> {
        self.probes += 1;
        if self.failure_rate > 0.0 && self.rng.gen_bool(self.failure_rate) {
            return Err(SourceError::Transport(format!(
                "probe of {} timed out",
                floodfill.short()
            )));
        }
        let stored = self.model.knowledge.get(floodfill).ok_or_else(|| {
            SourceError::Transport(format!("{} is not a floodfill", floodfill.short()))
        })?;
        self.console.extend(stored.iter().copied());
        Ok(())
    }
}
