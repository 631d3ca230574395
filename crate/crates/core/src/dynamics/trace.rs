use crate::error::{domain, Result};
use crate::io::{format_f64, CsvTable};
use crate::lattice::{collective_shift_from_displacements, LatticeEnsemble};
use crate::params::CavityParams;

/// Time series recorded by [`ring_up`](super::ring_up).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TransientTrace {
    pub time: Vec<f64>,
    /// Collective cavity shift (rad/s).
    pub delta_n: Vec<f64>,
    pub nbar: Vec<f64>,
    pub probe_on: Vec<bool>,
    /// Per-site displacement series, `displacements[site][sample]`; empty
    /// unless requested.
    pub displacements: Vec<Vec<f64>>,
    /// Per-site velocity series, recorded alongside the displacements.
    pub velocities: Vec<Vec<f64>>,
    /// Instant at which the probe is switched on.
    pub switch_on_time: f64,
}

impl TransientTrace {
    pub fn len(&self) -> usize {
        self.time.len()
    }

    pub fn is_empty(&self) -> bool {
        self.time.is_empty()
    }

    /// Uniform sample spacing, if the trace has at least two samples.
    pub fn sample_interval(&self) -> Option<f64> {
        (self.time.len() >= 2).then(|| (self.time[self.time.len() - 1] - self.time[0]) / (self.time.len() - 1) as f64)
    }

    /// Index of the first sample at or after `t`.
    pub fn index_at(&self, t: f64) -> usize {
        self.time.partition_point(|&x| x < t)
    }

    pub fn check_lengths(&self) -> Result<()> {
        let n = self.time.len();
        let ok = self.delta_n.len() == n
            && self.nbar.len() == n
            && self.probe_on.len() == n
            && self.displacements.iter().all(|d| d.len() == n)
            && self.velocities.iter().all(|d| d.len() == n);
        if ok {
            Ok(())
        } else {
            Err(domain("trace series have different lengths"))
        }
    }

    /// Largest relative mismatch between the recorded collective shift and the
    /// shift recomputed from the recorded displacements, over every `stride`th
    /// sample.
    pub fn shift_consistency(
        &self,
        ensemble: &LatticeEnsemble,
        cavity: &CavityParams,
        stride: usize,
    ) -> Result<f64> {
        if self.displacements.len() != ensemble.len() {
            return Err(domain("trace has no per-site displacements for this ensemble"));
        }
        let mut worst: f64 = 0.0;
        for i in (0..self.len()).step_by(stride.max(1)) {
            let d: Vec<f64> = self.displacements.iter().map(|s| s[i]).collect();
            let s = collective_shift_from_displacements(ensemble, &d, cavity)?;
            let scale = s.abs().max(f64::MIN_POSITIVE);
            worst = worst.max((s - self.delta_n[i]).abs() / scale);
        }
        Ok(worst)
    }

    /// `time,delta_n,nbar,probe_on` plus `z<j>` columns for recorded sites.
    pub fn to_table(&self) -> CsvTable {
        let mut columns: Vec<String> = ["time", "delta_n", "nbar", "probe_on"]
            .map(String::from)
            .to_vec();
        columns.extend((0..self.displacements.len()).map(|j| format!("z{j}")));
        let mut t = CsvTable::new(columns);
        for i in 0..self.len() {
            let mut row = vec![
                format_f64(self.time[i]),
                format_f64(self.delta_n[i]),
                format_f64(self.nbar[i]),
                u8::from(self.probe_on[i]).to_string(),
            ];
            row.extend(self.displacements.iter().map(|d| format_f64(d[i])));
            t.push_row(row);
        }
        t
    }
}
