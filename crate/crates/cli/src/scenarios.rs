use std::path::{Path, PathBuf};

use cavkerr::config::{ConfigFile, DirectionChoice, Scenario};
use cavkerr::dynamics::{quasi_static_sweep, summarize_ring_up, RingUpConfig, SweepConfig};
use cavkerr::io::{format_f64, CsvTable};
use cavkerr::lattice::{LatticeBuilder, LatticeEnsemble};
use cavkerr::measure::{
    expected_trigger_time, repetition_seed, ringdown_pipeline, trigger_sequence, CountSettings,
    RingdownConfig, TriggerConfig, TriggerOutcome, TriggerRun,
};
use cavkerr::params::{angular, atoms_for_shift, cyclic};
use cavkerr::steady_state::{
    bistability_threshold, cusp_point, fold_points, lineshape_scan, ResponseProfile, SweepDirection,
};
use cavkerr::{Error, Result, SystemParams};

/// Stream reserved for the trigger phase's counts.
const TRIGGER_STREAM: u64 = 1 << 40;

/// A validated configuration with the model parameters built from it.
pub struct Resolved {
    pub file: ConfigFile,
    pub params: SystemParams,
    pub profile: ResponseProfile,
    pub out: Option<PathBuf>,
}

fn as_config_error(key: &str, e: Error) -> Error {
    match e {
        Error::Config { .. } => e,
        other => Error::Config {
            key: key.into(),
            message: other.to_string(),
        },
    }
}

impl Resolved {
    pub fn new(file: ConfigFile, out: Option<PathBuf>) -> Result<Self> {
        file.validate()?;
        let params = file.system_params().map_err(|e| as_config_error("cavity", e))?;
        let profile = file.profile().map_err(|e| as_config_error("cavity.profile", e))?;
        let needs_dir = matches!(file.scenario, Scenario::Ringdown | Scenario::Trigger);
        if needs_dir && out.is_none() {
            return Err(Error::Config {
                key: "--out".into(),
                message: "this scenario writes several files; give an output directory".into(),
            });
        }
        Ok(Self {
            file,
            params,
            profile,
            out,
        })
    }

    fn header(&self) -> String {
        let name = self.file.scenario.name();
        format!(
            "cavkerr {} scenario={name} seed={}\nresolved configuration:\n{}",
            env!("CARGO_PKG_VERSION"),
            self.file.seed,
            self.file.to_toml()
        )
    }

    fn emit(&self, mut table: CsvTable, extra: &[String]) -> Result<()> {
        let mut comments = CsvTable::default();
        comments.comment(&self.header());
        for line in extra {
            comments.comment(line);
        }
        comments.comments.append(&mut table.comments);
        table.comments = comments.comments;
        match &self.out {
            Some(path) => table.write_file(path),
            None => {
                table.write_to(std::io::stdout().lock())?;
                Ok(())
            }
        }
    }

    fn emit_in(&self, dir: &Path, name: &str, mut table: CsvTable) -> Result<()> {
        let mut comments = CsvTable::default();
        comments.comment(&self.header());
        comments.comments.append(&mut table.comments);
        table.comments = comments.comments;
        table.write_file(&dir.join(name))
    }
}

pub fn run(cfg: &Resolved) -> Result<()> {
    match cfg.file.scenario {
        Scenario::Derived => derived(cfg),
        Scenario::Lineshape => lineshape(cfg),
        Scenario::BistabilityThreshold => threshold(cfg),
        Scenario::Sweep => sweep(cfg),
        Scenario::Ringdown => ringdown(cfg),
        Scenario::Trigger => trigger(cfg),
    }
}

fn quantity_row(t: &mut CsvTable, name: &str, value: f64, unit: &str) {
    t.push_row(vec![name.into(), format_f64(value), unit.into()]);
}

fn derived(cfg: &Resolved) -> Result<()> {
    let d = cfg.params.derived()?;
    let mut t = CsvTable::new(["quantity", "value", "unit"]);
    quantity_row(&mut t, "atom_number", cfg.params.drive.atom_number, "");
    quantity_row(&mut t, "collective_shift", cyclic(d.collective_shift), "Hz");
    quantity_row(&mut t, "recoil_frequency", cyclic(d.recoil_frequency), "Hz");
    quantity_row(&mut t, "kerr_coefficient", d.kerr_coefficient, "");
    quantity_row(&mut t, "kerr_coefficient_single_well", d.kerr_coefficient_single_well, "");
    quantity_row(&mut t, "n_max", cfg.params.drive.n_max, "");
    quantity_row(&mut t, "beta", d.beta, "");
    quantity_row(&mut t, "bistability_threshold", bistability_threshold(&cfg.profile), "");
    match d.nonlinear_photon_threshold {
        Some(n) => quantity_row(&mut t, "nonlinear_photon_threshold", n, ""),
        None => t.push_row(vec!["nonlinear_photon_threshold".into(), "undefined".into(), "".into()]),
    }
    quantity_row(&mut t, "critical_atom_number", d.critical.atom, "");
    quantity_row(&mut t, "critical_photon_number", d.critical.photon, "");
    cfg.emit(t, &[])
}

fn grid(start: f64, end: f64, points: usize) -> Vec<f64> {
    (0..points)
        .map(|i| start + (i as f64 / (points - 1) as f64) * (end - start))
        .collect()
}

fn lineshape(cfg: &Resolved) -> Result<()> {
    let l = &cfg.file.lineshape;
    let kappa = cfg.params.cavity.kappa;
    let shift = cfg.params.collective_shift()?;
    let detunings = grid(l.delta_pc_start.rad(), l.delta_pc_end.rad(), l.points);
    let reduced: Vec<f64> = detunings.iter().map(|d| (d - shift) / kappa).collect();
    let direction = match l.direction {
        DirectionChoice::Up => SweepDirection::Up,
        DirectionChoice::Down => SweepDirection::Down,
    };
    let mut t = CsvTable::new(["trace_id", "n_max", "beta", "delta_pc_hz", "nbar", "jumped"]);
    for (id, &n_max) in l.n_max.iter().enumerate() {
        let mut params = cfg.params;
        params.drive.n_max = n_max;
        let beta = params.beta()?;
        let scan = lineshape_scan(&cfg.profile, beta, &reduced, direction)?;
        for p in scan {
            t.push_row(vec![
                id.to_string(),
                format_f64(n_max),
                format_f64(beta),
                format_f64(cyclic(shift + kappa * p.delta0)),
                format_f64(n_max * p.u),
                u8::from(p.jumped).to_string(),
            ]);
        }
    }
    cfg.emit(t, &[])
}

/// `(up_jump, down_jump)` detunings in Hz for the configured beta.
fn fold_report(cfg: &Resolved, beta: f64) -> Result<Vec<(&'static str, f64, f64)>> {
    let kappa = cfg.params.cavity.kappa;
    let shift = cfg.params.collective_shift()?;
    let folds = fold_points(&cfg.profile, beta);
    // An upward scan leaves its branch at the higher fold, a downward scan at
    // the lower one, whichever side of resonance the bistable region is on.
    Ok(match folds.as_slice() {
        [low, high] => vec![
            ("down_jump", low.delta0, low.u),
            ("up_jump", high.delta0, high.u),
        ],
        _ => Vec::new(),
    }
    .into_iter()
    .map(|(name, d0, u)| (name, cyclic(shift + kappa * d0), u))
    .collect())
}

fn threshold(cfg: &Resolved) -> Result<()> {
    let kappa = cfg.params.cavity.kappa;
    let shift = cfg.params.collective_shift()?;
    let n_max = cfg.params.drive.n_max;
    let beta = match cfg.file.threshold.beta {
        Some(b) => b,
        None => cfg.params.beta()?,
    };
    let threshold = bistability_threshold(&cfg.profile);
    let mut t = CsvTable::new(["point", "beta", "delta0", "delta_pc_hz", "u", "nbar"]);
    let cusp = cusp_point(&cfg.profile);
    let sign = if beta < 0.0 { -1.0 } else { 1.0 };
    let cusp_delta0 = sign * cusp.delta0;
    t.push_row(vec![
        "cusp".into(),
        format_f64(sign * threshold),
        format_f64(cusp_delta0),
        format_f64(cyclic(shift + kappa * cusp_delta0)),
        format_f64(cusp.u),
        format_f64(n_max * cusp.u),
    ]);
    for (name, hz, u) in fold_report(cfg, beta)? {
        t.push_row(vec![
            name.into(),
            format_f64(beta),
            format_f64((angular(hz) - shift) / kappa),
            format_f64(hz),
            format_f64(u),
            format_f64(n_max * u),
        ]);
    }
    let note = format!(
        "beta = {beta:?}, threshold = {threshold:?}, bistable = {}",
        beta.abs() > threshold
    );
    cfg.emit(t, &[note])
}

fn sweep(cfg: &Resolved) -> Result<()> {
    let s = &cfg.file.sweep;
    let beta = cfg.params.beta()?;
    let up = SweepConfig {
        chirp_rate: s.chirp.0,
        delta_pc_start: s.delta_pc_start.rad(),
        delta_pc_end: s.delta_pc_end.rad(),
        n_max: cfg.params.drive.n_max,
        collective_shift: cfg.params.collective_shift()?,
        points: s.points,
    };
    let mut t = CsvTable::new(["direction", "time", "delta_pc_hz", "nbar", "jumped"]);
    for (name, config) in [("up", up), ("down", up.reversed())] {
        for p in quasi_static_sweep(&config, &cfg.profile, beta)? {
            t.push_row(vec![
                name.into(),
                format_f64(p.time),
                format_f64(cyclic(p.delta_pc)),
                format_f64(p.nbar),
                u8::from(p.jumped).to_string(),
            ]);
        }
    }
    let mut notes = vec![format!("beta = {beta:?}")];
    for (name, hz, _) in fold_report(cfg, beta)? {
        notes.push(format!("{name} fold at delta_pc_hz = {hz:?}"));
    }
    cfg.emit(t, &notes)
}

fn counts(cfg: &Resolved) -> CountSettings {
    let c = &cfg.file.counts;
    CountSettings {
        efficiency: c.efficiency,
        bin_width: c.bin_width.0,
        dark_rate: c.dark_rate,
    }
}

fn out_dir(cfg: &Resolved) -> Result<&Path> {
    let dir = cfg.out.as_deref().expect("checked when resolving");
    std::fs::create_dir_all(dir)?;
    Ok(dir)
}

fn atoms(shift: f64, cfg: &Resolved) -> Result<f64> {
    atoms_for_shift(shift, cfg.params.cavity.g0, cfg.params.cavity.delta_ca)
}

fn trigger_config(cfg: &Resolved, detection_level: f64) -> Result<TriggerConfig> {
    let t = &cfg.file.trigger;
    Ok(TriggerConfig {
        initial_atoms: atoms(t.initial_shift.rad(), cfg)?,
        loss_rate: t.loss_rate,
        delta_pc: cfg.file.ringup.delta_pc.rad(),
        probe_level: t.probe_level,
        threshold_rate: t.threshold_rate,
        smoothing: t.smoothing.0,
        horizon: t.horizon.0,
        delay: t.delay.0,
        detection_level,
        counts: counts(cfg),
    })
}

fn run_trigger(cfg: &Resolved, detection_level: f64) -> Result<(TriggerConfig, TriggerRun)> {
    let tc = trigger_config(cfg, detection_level)?;
    let seed = repetition_seed(cfg.file.seed, TRIGGER_STREAM);
    let run = trigger_sequence(&tc, &cfg.params.cavity, &cfg.profile, seed)?;
    Ok((tc, run))
}

fn trigger(cfg: &Resolved) -> Result<()> {
    let dir = out_dir(cfg)?;
    let (tc, run) = run_trigger(cfg, resonant_level(cfg, cfg.file.ringup.collective_shift.rad()))?;
    let mut record = CsvTable::new(["time", "counts", "smoothed_rate"]);
    for (i, (c, r)) in run.record.counts.iter().zip(&run.smoothed_rate).enumerate() {
        record.push_row(vec![format_f64(run.record.bin_start(i)), c.to_string(), format_f64(*r)]);
    }
    let mut summary = CsvTable::new(["quantity", "value", "unit"]);
    quantity_row(&mut summary, "initial_atoms", tc.initial_atoms, "");
    quantity_row(&mut summary, "threshold_rate", tc.threshold_rate, "1/s");
    if let Some(t) = expected_trigger_time(&tc, &cfg.params.cavity, &cfg.profile)? {
        quantity_row(&mut summary, "expected_trigger_time", t, "s");
    }
    match run.outcome {
        TriggerOutcome::Triggered(ev) => {
            quantity_row(&mut summary, "triggered", 1.0, "");
            quantity_row(&mut summary, "trigger_time", ev.trigger_time, "s");
            quantity_row(&mut summary, "conditioned_shift", cyclic(ev.conditioned_shift), "Hz");
            quantity_row(&mut summary, "probe_off_time", ev.probe_off_time, "s");
            quantity_row(&mut summary, "probe_on_time", ev.probe_on_time, "s");
            quantity_row(&mut summary, "detection_level", ev.detection_level, "");
        }
        TriggerOutcome::NoTrigger { horizon } => {
            quantity_row(&mut summary, "triggered", 0.0, "");
            quantity_row(&mut summary, "horizon", horizon, "s");
        }
    }
    cfg.emit_in(dir, "trigger_record.csv", record)?;
    cfg.emit_in(dir, "summary.csv", summary)
}

/// Resonant photon number that gives `ringup.switch_on_nbar` at the given
/// shift, unless `ringup.n_max` is set.
fn resonant_level(cfg: &Resolved, shift: f64) -> f64 {
    let r = &cfg.file.ringup;
    match r.n_max {
        Some(n) => n,
        None => {
            let v = cfg.profile.value(r.delta_pc.rad() - shift);
            if v > 0.0 {
                r.switch_on_nbar / v
            } else {
                0.0
            }
        }
    }
}

fn lattice(cfg: &Resolved, shift: f64) -> Result<LatticeEnsemble> {
    let l = &cfg.file.lattice;
    let cavity = &cfg.params.cavity;
    let base = match &l.table {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::Config {
                key: "lattice.table".into(),
                message: format!("{path}: {e}"),
            })?;
            LatticeEnsemble::parse(&text).map_err(|e| as_config_error("lattice.table", e))?
        }
        None => {
            let mut b = LatticeBuilder::new(
                cfg.params.trap.num_sites,
                atoms(shift, cfg)?,
                cfg.params.trap.omega_z,
                cavity,
            );
            b.omega_z_spread = l.omega_z_spread.rad();
            b.sub_ensembles = l.sub_ensembles;
            b.spread_sampling = cfg.file.spread_sampling();
            b.phases = cfg.file.phase_model();
            b.populations = cfg.file.population_model();
            b.seed = l.seed;
            b.build()?
        }
    };
    base.with_collective_shift(shift, cavity)
}

fn ringdown(cfg: &Resolved) -> Result<()> {
    let dir = out_dir(cfg)?;
    let r = &cfg.file.ringup;
    let a = &cfg.file.analysis;
    let cavity = &cfg.params.cavity;
    let mut summary = CsvTable::new(["quantity", "value", "unit"]);

    let mut shift = r.collective_shift.rad();
    if cfg.file.trigger.enabled {
        let (_, run) = run_trigger(cfg, resonant_level(cfg, shift))?;
        match run.outcome {
            TriggerOutcome::Triggered(ev) => {
                shift = ev.conditioned_shift;
                quantity_row(&mut summary, "trigger_time", ev.trigger_time, "s");
                quantity_row(&mut summary, "conditioned_shift", cyclic(shift), "Hz");
            }
            TriggerOutcome::NoTrigger { horizon } => {
                return Err(Error::Numeric(format!(
                    "trigger threshold not reached within {horizon} s"
                )))
            }
        }
    }
    let ensemble = lattice(cfg, shift)?;
    let n_max = resonant_level(cfg, shift);
    let ring_up = RingUpConfig {
        delta_pc: r.delta_pc.rad(),
        n_max,
        field: cfg.file.field_model(),
        force: cfg.file.force_model(),
        viscous_rate: r.viscous_rate,
        switch_on: cfg.file.switch_on(),
        probe_delay: 0.0,
        duration: r.duration.0,
        dt: r.dt.map(|d| d.0),
        record_every: r.record_every,
        record_sites: false,
    };
    let config = RingdownConfig {
        ring_up,
        counts: counts(cfg),
        repetitions: a.repetitions,
        window_length: a.window.0,
        frequency: a.frequency.map(|f| f.0),
        search_band: (a.band_low.0, a.band_high.0),
        averaging: cfg.file.averaging_order(),
        envelope: cfg.file.envelope(),
    };
    let result = ringdown_pipeline(
        &ensemble,
        cavity,
        &cfg.params.constants,
        &cfg.profile,
        &config,
        cfg.file.seed,
    )?;
    let s = summarize_ring_up(&result.trace, cavity, cfg.params.trap.omega_z, r.ramp.0)?;

    quantity_row(&mut summary, "n_max", n_max, "");
    quantity_row(&mut summary, "initial_shift", cyclic(s.initial_shift), "Hz");
    quantity_row(&mut summary, "switch_on_nbar", s.switch_on_nbar, "");
    quantity_row(&mut summary, "excursion", s.excursion, "kappa");
    quantity_row(&mut summary, "photon_variation", s.photon_variation, "");
    quantity_row(&mut summary, "representative_displacement", s.representative_displacement, "m");
    quantity_row(&mut summary, "peak_frequency", result.peak.frequency, "Hz");
    quantity_row(&mut summary, "frequency_bin", result.peak.bin_width, "Hz");
    quantity_row(&mut summary, "analysis_frequency", result.decay.frequency, "Hz");
    quantity_row(&mut summary, "gaussian_time", result.fit.gaussian_time, "s");
    quantity_row(&mut summary, "exponential_time", result.fit.exponential_time, "s");
    quantity_row(&mut summary, "crossing_time", result.fit.crossing.unwrap_or(f64::NAN), "s");
    quantity_row(&mut summary, "decay_time", result.fit.time(), "s");
    quantity_row(&mut summary, "fit_reliable", f64::from(u8::from(result.fit.reliable)), "");
    quantity_row(&mut summary, "total_counts", result.counts.total() as f64, "");

    cfg.emit_in(dir, "lattice.csv", ensemble.to_table())?;
    cfg.emit_in(dir, "trace.csv", result.trace.to_table())?;
    cfg.emit_in(dir, "counts.csv", result.counts.to_table())?;
    cfg.emit_in(dir, "windows.csv", result.decay.to_table())?;
    cfg.emit_in(dir, "summary.csv", summary)
}
