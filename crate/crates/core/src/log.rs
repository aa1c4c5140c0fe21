//! Per-iteration solver traces.

#[derive(Clone, Debug, PartialEq)]
pub struct IterRecord {
    pub iter: usize,
    pub objective: f64,
    /// Wall time since the solver started.
    pub time_ms: f64,
    /// True objective after each block update within this iteration.
    pub blocks: Vec<f64>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct IterationLog {
    /// Record 0 is the initial point.
    pub records: Vec<IterRecord>,
    pub converged: bool,
    /// Number of one-iteration BMM map evaluations spent.
    pub map_evaluations: usize,
    /// Extrapolated candidates accepted / rejected by the acceleration safeguard.
    pub accepted: usize,
    pub rejected: usize,
}

impl IterationLog {
    pub fn push(&mut self, objective: f64, time_ms: f64, blocks: Vec<f64>) {
        let iter = self.records.len();
        self.records.push(IterRecord { iter, objective, time_ms, blocks });
    }

    pub fn iterations(&self) -> usize {
        self.records.len().saturating_sub(1)
    }

    pub fn objectives(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.objective).collect()
    }

    pub fn final_objective(&self) -> f64 {
        self.records.last().map_or(f64::NAN, |r| r.objective)
    }

    /// Initial objective followed by every block snapshot in order.
    pub fn block_trace(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for (i, r) in self.records.iter().enumerate() {
            if i == 0 || r.blocks.is_empty() {
                out.push(r.objective);
            } else {
                out.extend(&r.blocks);
            }
        }
        out
    }

    /// Largest drop between consecutive block snapshots, relative to
    /// `max(1,|f|)` when `relative` is set.
    pub fn worst_decrease(&self, relative: bool) -> f64 {
        let t = self.block_trace();
        t.windows(2)
            .map(|w| {
                let drop = w[0] - w[1];
                if relative {
                    drop / w[0].abs().max(1.0)
                } else {
                    drop
                }
            })
            .fold(0.0, f64::max)
    }

    /// Mean wall time per outer iteration.
    pub fn mean_iteration_ms(&self) -> f64 {
        match (self.records.first(), self.records.last()) {
            (Some(a), Some(b)) if self.records.len() > 1 => (b.time_ms - a.time_ms) / (self.records.len() - 1) as f64,
            _ => 0.0,
        }
    }
}
