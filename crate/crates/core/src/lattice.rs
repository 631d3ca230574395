//! The atomic medium spread over many wells of the intracavity lattice.
//!
//! Each lattice site sits at a different phase `theta = k_p z mod pi` of the
//! probe standing wave, so the probe couples to it with strength
//! `g0^2 sin^2(theta)` and pushes it with a force proportional to
//! `sin(2 theta)`. A site may be split into several sub-ensembles with
//! different axial trap frequencies; every entry of the ensemble is one
//! collective coordinate.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use statrs::distribution::ContinuousCDF;

use crate::error::{domain, Error, Result};
use crate::io::{format_f64, CsvTable};
use crate::params::{CavityParams, PhysicalConstants};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeSite {
    /// Probe phase at the site's trap minimum, in `[0, pi)`.
    pub theta: f64,
    /// Atoms in this sub-ensemble.
    pub population: f64,
    /// Axial trap frequency of this sub-ensemble.
    pub omega_z: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LatticeEnsemble {
    sites: Vec<LatticeSite>,
    total_atoms: f64,
}

impl LatticeEnsemble {
    pub fn new(sites: Vec<LatticeSite>) -> Result<Self> {
        if sites.is_empty() {
            return Err(domain("ensemble needs at least one site"));
        }
        for (i, s) in sites.iter().enumerate() {
            if !(s.theta >= 0.0 && s.theta < PI) {
                return Err(domain(format!("site {i}: theta {} outside [0, pi)", s.theta)));
            }
            if !(s.population >= 0.0 && s.population.is_finite()) {
                return Err(domain(format!("site {i}: population must be non-negative")));
            }
            if !(s.omega_z > 0.0 && s.omega_z.is_finite()) {
                return Err(domain(format!("site {i}: omega_z must be positive")));
            }
        }
        let total_atoms = sites.iter().map(|s| s.population).sum();
        Ok(Self { sites, total_atoms })
    }

    /// All atoms in one well at probe phase `theta`.
    pub fn single_well(theta: f64, atoms: f64, omega_z: f64) -> Result<Self> {
        Self::new(vec![LatticeSite {
            theta: theta.rem_euclid(PI),
            population: atoms,
            omega_z,
        }])
    }

    pub fn sites(&self) -> &[LatticeSite] {
        &self.sites
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn total_atoms(&self) -> f64 {
        self.total_atoms
    }

    /// Population-weighted mean of `sin^2(theta)`.
    pub fn mean_coupling(&self) -> f64 {
        if self.total_atoms == 0.0 {
            return 0.0;
        }
        self.sites
            .iter()
            .map(|s| s.population * s.theta.sin().powi(2))
            .sum::<f64>()
            / self.total_atoms
    }

    /// Rescales all populations so that the total is `atoms`.
    pub fn with_total_atoms(&self, atoms: f64) -> Result<Self> {
        if !(atoms >= 0.0 && atoms.is_finite()) {
            return Err(domain("atom number must be non-negative"));
        }
        if self.total_atoms == 0.0 {
            return Err(domain("cannot rescale an empty ensemble"));
        }
        let f = atoms / self.total_atoms;
        Self::new(
            self.sites
                .iter()
                .map(|s| LatticeSite {
                    population: s.population * f,
                    ..*s
                })
                .collect(),
        )
    }

    /// Rescales populations so the undisplaced collective shift equals `shift`.
    pub fn with_collective_shift(&self, shift: f64, cavity: &CavityParams) -> Result<Self> {
        let current = collective_shift_from_displacements(self, &vec![0.0; self.len()], cavity)?;
        if current == 0.0 || shift / current < 0.0 {
            return Err(domain("target shift unreachable for this ensemble"));
        }
        self.with_total_atoms(self.total_atoms * shift / current)
    }

    /// One row per entry: `theta,population,omega_z`.
    pub fn to_table(&self) -> CsvTable {
        let mut t = CsvTable::new(["theta", "population", "omega_z"]);
        for s in &self.sites {
            t.push_row(vec![
                format_f64(s.theta),
                format_f64(s.population),
                format_f64(s.omega_z),
            ]);
        }
        t
    }

    pub fn from_table(table: &CsvTable) -> Result<Self> {
        let theta = table.column_f64("theta")?;
        let population = table.column_f64("population")?;
        let omega_z = table.column_f64("omega_z")?;
        let sites = theta
            .into_iter()
            .zip(population)
            .zip(omega_z)
            .map(|((theta, population), omega_z)| LatticeSite {
                theta,
                population,
                omega_z,
            })
            .collect();
        Self::new(sites)
    }

    /// Parses the tabular text format written by [`to_table`](Self::to_table).
    pub fn parse(text: &str) -> Result<Self> {
        Self::from_table(&CsvTable::parse(text)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PhaseModel {
    /// `theta_j = j pi k_p / k_t mod pi`: the probe phase walks across the
    /// lattice because the two wavelengths are incommensurate.
    Walk,
    /// Independent uniform phases in `[0, pi)`.
    UniformRandom,
    /// Every site at the same phase.
    Fixed(f64),
}

/// How sub-ensemble trap frequencies sample the Gaussian spread.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SpreadSampling {
    /// Independent normal draws.
    #[default]
    Random,
    /// Deterministic Gaussian quantiles: sub-ensemble `k` of site `j` sits at
    /// quantile `(k + frac(j / phi)) / sub_ensembles`, so all entries together
    /// cover the distribution evenly, tails included.
    Quantiles,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PopulationModel {
    Uniform,
    /// Gaussian density profile centred on the middle site, rms in sites.
    Gaussian { rms_sites: f64 },
}

/// Recipe for a [`LatticeEnsemble`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeBuilder {
    pub num_sites: usize,
    pub total_atoms: f64,
    pub omega_z_mean: f64,
    /// rms spread of the axial trap frequency across sub-ensembles.
    pub omega_z_spread: f64,
    pub spread_sampling: SpreadSampling,
    /// Sub-ensembles per site, each with its own trap frequency.
    pub sub_ensembles: usize,
    /// `k_p / k_t`.
    pub wavenumber_ratio: f64,
    pub phases: PhaseModel,
    pub populations: PopulationModel,
    pub seed: u64,
}

impl LatticeBuilder {
    pub fn new(num_sites: usize, total_atoms: f64, omega_z: f64, cavity: &CavityParams) -> Self {
        Self {
            num_sites,
            total_atoms,
            omega_z_mean: omega_z,
            omega_z_spread: 0.0,
            spread_sampling: SpreadSampling::Random,
            sub_ensembles: 1,
            wavenumber_ratio: cavity.k_probe / cavity.k_trap,
            phases: PhaseModel::Walk,
            populations: PopulationModel::Uniform,
            seed: 0,
        }
    }

    pub fn build(&self) -> Result<LatticeEnsemble> {
        build_lattice(self)
    }
}

/// Builds the multi-well ensemble, reproducibly from `builder.seed`.
pub fn build_lattice(builder: &LatticeBuilder) -> Result<LatticeEnsemble> {
    if builder.num_sites == 0 {
        return Err(domain("num_sites must be at least 1"));
    }
    if builder.sub_ensembles == 0 {
        return Err(domain("sub_ensembles must be at least 1"));
    }
    if !(builder.omega_z_spread >= 0.0 && builder.omega_z_spread.is_finite()) {
        return Err(domain("omega_z spread must be finite and non-negative"));
    }
    if !(builder.omega_z_mean > 0.0 && builder.omega_z_mean.is_finite()) {
        return Err(domain("omega_z must be positive"));
    }
    if !(builder.total_atoms >= 0.0 && builder.total_atoms.is_finite()) {
        return Err(domain("total_atoms must be non-negative"));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(builder.seed);
    let n = builder.num_sites;

    let thetas: Vec<f64> = (0..n)
        .map(|j| match builder.phases {
            PhaseModel::Walk => wrap_phase(j as f64 * PI * builder.wavenumber_ratio),
            PhaseModel::UniformRandom => wrap_phase(rng.gen::<f64>() * PI),
            PhaseModel::Fixed(theta) => wrap_phase(theta),
        })
        .collect();

    let weights: Vec<f64> = match builder.populations {
        PopulationModel::Uniform => vec![1.0; n],
        PopulationModel::Gaussian { rms_sites } => {
            if !(rms_sites > 0.0) {
                return Err(domain("Gaussian population rms must be positive"));
            }
            let centre = (n as f64 - 1.0) / 2.0;
            (0..n)
                .map(|j| (-(j as f64 - centre).powi(2) / (2.0 * rms_sites * rms_sites)).exp())
                .collect()
        }
    };
    let norm: f64 = weights.iter().sum();

    let spread = if builder.omega_z_spread > 0.0 {
        Some(
            Normal::new(builder.omega_z_mean, builder.omega_z_spread)
                .map_err(|e| Error::Domain(e.to_string()))?,
        )
    } else {
        None
    };
    let per_sub = builder.sub_ensembles as f64;
    let mut sites = Vec::with_capacity(n * builder.sub_ensembles);
    for (site, (theta, w)) in thetas.into_iter().zip(weights).enumerate() {
        let population = builder.total_atoms * w / norm / per_sub;
        for k in 0..builder.sub_ensembles {
            let omega_z = match (&spread, builder.spread_sampling) {
                (None, _) => builder.omega_z_mean,
                (Some(dist), SpreadSampling::Random) => draw_positive(dist, &mut rng)?,
                (Some(_), SpreadSampling::Quantiles) => {
                    let offset = (site as f64 * GOLDEN_FRACTION + 0.5).fract();
                    let q = (k as f64 + offset) / per_sub;
                    let w = builder.omega_z_mean
                        + builder.omega_z_spread * standard_normal().inverse_cdf(q.clamp(1e-300, 1.0 - 1e-16));
                    if !(w > 0.0 && w.is_finite()) {
                        return Err(domain(
                            "omega_z spread too large: cannot draw positive trap frequencies",
                        ));
                    }
                    w
                }
            };
            sites.push(LatticeSite {
                theta,
                population,
                omega_z,
            });
        }
    }
    LatticeEnsemble::new(sites)
}

/// `1 / phi`, the golden ratio's fractional part.
const GOLDEN_FRACTION: f64 = 0.618_033_988_749_894_9;

fn standard_normal() -> statrs::distribution::Normal {
    statrs::distribution::Normal::standard()
}

fn wrap_phase(theta: f64) -> f64 {
    let t = theta.rem_euclid(PI);
    if t >= PI {
        0.0
    } else {
        t
    }
}

fn draw_positive(dist: &Normal<f64>, rng: &mut ChaCha8Rng) -> Result<f64> {
    for _ in 0..1000 {
        let x = dist.sample(rng);
        if x > 0.0 {
            return Ok(x);
        }
    }
    Err(domain("omega_z spread too large: cannot draw positive trap frequencies"))
}

/// Collective cavity shift `sum_j N_j g0^2 sin^2(theta_j + k_p delta_j) / delta_ca`.
pub fn collective_shift_from_displacements(
    ensemble: &LatticeEnsemble,
    displacements: &[f64],
    cavity: &CavityParams,
) -> Result<f64> {
    if displacements.len() != ensemble.len() {
        return Err(domain(format!(
            "expected {} displacements, got {}",
            ensemble.len(),
            displacements.len()
        )));
    }
    let delta_ca = cavity.dispersive_detuning()?;
    let sum: f64 = ensemble
        .sites
        .iter()
        .zip(displacements)
        .map(|(s, d)| s.population * (s.theta + cavity.k_probe * d).sin().powi(2))
        .sum();
    Ok(sum * cavity.g0 * cavity.g0 / delta_ca)
}

/// Probe light force on one atom, `-hbar g0^2 k_p sin(2(theta + k_p delta)) nbar / delta_ca`.
pub fn per_site_force(
    theta: f64,
    displacement: f64,
    nbar: f64,
    cavity: &CavityParams,
    constants: &PhysicalConstants,
) -> f64 {
    let phase = theta + cavity.k_probe * displacement;
    -constants.hbar * cavity.g0 * cavity.g0 * cavity.k_probe * (2.0 * phase).sin() * nbar
        / cavity.delta_ca
}

/// Probe light potential of one atom, `hbar g0^2 sin^2(theta + k_p delta) nbar / delta_ca`.
pub fn probe_potential(
    theta: f64,
    displacement: f64,
    nbar: f64,
    cavity: &CavityParams,
    constants: &PhysicalConstants,
) -> f64 {
    let phase = theta + cavity.k_probe * displacement;
    constants.hbar * cavity.g0 * cavity.g0 * phase.sin().powi(2) * nbar / cavity.delta_ca
}

/// Per-photon fractional change of the collective shift, measured by
/// displacing every site to its light-shifted equilibrium.
///
/// Each site moves by `f_j nbar / (m omega_j^2)` with the force taken at the
/// undisplaced position; the shift is recomputed exactly and
/// `-(dDelta_N / Delta_N) / nbar` is extrapolated to `nbar -> 0` by
/// Richardson from `nbar = 1e-3` and `5e-4`.
pub fn effective_kerr_numeric(
    ensemble: &LatticeEnsemble,
    cavity: &CavityParams,
    constants: &PhysicalConstants,
) -> Result<f64> {
    let zero = vec![0.0; ensemble.len()];
    let base = collective_shift_from_displacements(ensemble, &zero, cavity)?;
    if base == 0.0 {
        return Err(domain("ensemble has no coupling to the probe (all atoms at nodes)"));
    }
    let per_photon: Vec<f64> = ensemble
        .sites
        .iter()
        .map(|s| {
            per_site_force(s.theta, 0.0, 1.0, cavity, constants)
                / (constants.mass * s.omega_z * s.omega_z)
        })
        .collect();
    let at = |nbar: f64| -> Result<f64> {
        let disp: Vec<f64> = per_photon.iter().map(|d| d * nbar).collect();
        let shifted = collective_shift_from_displacements(ensemble, &disp, cavity)?;
        Ok(-((shifted - base) / base) / nbar)
    };
    let coarse = at(1e-3)?;
    let fine = at(5e-4)?;
    Ok(2.0 * fine - coarse)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{kerr_coefficient, CouplingAverage, TrapParams};
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    fn cavity() -> CavityParams {
        CavityParams::default()
    }

    #[test]
    fn incommensurate_walk_is_equidistributed() {
        let cav = cavity();
        let b = LatticeBuilder::new(300, 1e5, TrapParams::default().omega_z, &cav);
        assert!((b.wavenumber_ratio - 850.0 / 780.0).abs() < 1e-12);
        let e = b.build().unwrap();
        let mut phases: Vec<f64> = e.sites().iter().map(|s| s.theta / PI).collect();
        phases.sort_by(f64::total_cmp);
        let n = phases.len() as f64;
        let ks = phases
            .iter()
            .enumerate()
            .map(|(i, p)| ((i as f64 + 1.0) / n - p).abs().max((p - i as f64 / n).abs()))
            .fold(0.0, f64::max);
        assert!(ks < 0.05, "{ks}");
    }

    #[test]
    fn same_seed_same_ensemble() {
        let cav = cavity();
        let mut b = LatticeBuilder::new(50, 1e4, 1e5, &cav);
        b.omega_z_spread = 1e3;
        b.sub_ensembles = 4;
        b.phases = PhaseModel::UniformRandom;
        b.seed = 11;
        assert_eq!(b.build().unwrap(), b.build().unwrap());
        b.seed = 12;
        let other = b.build().unwrap();
        b.seed = 11;
        assert_ne!(b.build().unwrap(), other);
    }

    #[test]
    fn populations_sum_to_total() {
        let cav = cavity();
        let mut b = LatticeBuilder::new(301, 7e4, 1e5, &cav);
        b.populations = PopulationModel::Gaussian { rms_sites: 60.0 };
        b.sub_ensembles = 3;
        let e = b.build().unwrap();
        assert!((e.total_atoms() - 7e4).abs() < 1e-6);
        let mid = &e.sites()[150 * 3];
        assert!(mid.population > e.sites()[0].population);
    }

    #[test]
    fn quantile_spread_has_requested_moments() {
        let cav = cavity();
        let mut b = LatticeBuilder::new(200, 1e4, 3e5, &cav);
        b.omega_z_spread = 2e3;
        b.sub_ensembles = 20;
        b.spread_sampling = SpreadSampling::Quantiles;
        let e = b.build().unwrap();
        let w: Vec<f64> = e.sites().iter().map(|s| s.omega_z).collect();
        let n = w.len() as f64;
        let mean = w.iter().sum::<f64>() / n;
        let sd = (w.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n).sqrt();
        assert!((mean / 3e5 - 1.0).abs() < 1e-4);
        assert!((sd / 2e3 - 1.0).abs() < 0.02, "{sd}");
    }

    #[test]
    fn negative_spread_rejected() {
        let cav = cavity();
        let mut b = LatticeBuilder::new(10, 1.0, 1.0, &cav);
        b.omega_z_spread = -1.0;
        assert!(b.build().is_err());
    }

    #[test]
    fn shift_limits() {
        let cav = cavity();
        let n = 1e4;
        let anti = LatticeEnsemble::single_well(FRAC_PI_2, n, 1e5).unwrap();
        let s = collective_shift_from_displacements(&anti, &[0.0], &cav).unwrap();
        let expect = n * cav.g0 * cav.g0 / cav.delta_ca;
        assert!(((s - expect) / expect).abs() < 1e-14);
        let node = LatticeEnsemble::single_well(0.0, n, 1e5).unwrap();
        assert_eq!(collective_shift_from_displacements(&node, &[0.0], &cav).unwrap(), 0.0);
        assert!(collective_shift_from_displacements(&node, &[0.0, 1.0], &cav).is_err());
        assert!(effective_kerr_numeric(&node, &cav, &PhysicalConstants::RB87).is_err());
    }

    #[test]
    fn walk_average_is_half_coupling() {
        let cav = cavity();
        let e = LatticeBuilder::new(3000, 1e5, 1e5, &cav).build().unwrap();
        let s = collective_shift_from_displacements(&e, &vec![0.0; e.len()], &cav).unwrap();
        let avg = crate::params::collective_shift(1e5, cav.g0, cav.delta_ca).unwrap();
        assert!(((s - avg) / avg).abs() < 0.01);
    }

    #[test]
    fn force_signs_and_zeros() {
        let cav = cavity();
        let c = PhysicalConstants::RB87;
        let f = per_site_force(FRAC_PI_4, 0.0, 1.0, &cav, &c);
        let mag = c.hbar * cav.g0 * cav.g0 * cav.k_probe / cav.delta_ca.abs();
        assert!(((f.abs() - mag) / mag).abs() < 1e-14);
        // Red detuning pulls atoms toward the antinode at pi/2, i.e. +z here.
        assert!(f > 0.0);
        assert_eq!(per_site_force(FRAC_PI_4, 0.0, 0.0, &cav, &c), 0.0);
        assert!(per_site_force(FRAC_PI_2, 0.0, 1.0, &cav, &c).abs() < 1e-12 * mag);
    }

    #[test]
    fn single_well_kerr_matches_closed_form() {
        let cav = cavity();
        let c = PhysicalConstants::RB87;
        let trap = TrapParams::default();
        let e = LatticeEnsemble::single_well(FRAC_PI_4, 1e4, trap.omega_z).unwrap();
        let numeric = effective_kerr_numeric(&e, &cav, &c).unwrap();
        let closed = kerr_coefficient(&c, &cav, &trap, CouplingAverage::SingleWell).unwrap();
        assert!(((numeric - closed) / closed).abs() < 1e-3, "{numeric} vs {closed}");
        let stiff = LatticeEnsemble::single_well(FRAC_PI_4, 1e4, 2.0 * trap.omega_z).unwrap();
        let ratio = effective_kerr_numeric(&stiff, &cav, &c).unwrap() / numeric;
        assert!((ratio - 0.25).abs() < 1e-4);
    }

    #[test]
    fn table_round_trip() {
        let cav = cavity();
        let mut b = LatticeBuilder::new(20, 1e4, 1e5, &cav);
        b.omega_z_spread = 500.0;
        b.sub_ensembles = 2;
        let e = b.build().unwrap();
        let back = LatticeEnsemble::parse(&e.to_table().render()).unwrap();
        assert_eq!(back, e);
        assert!(LatticeEnsemble::parse("theta,population,omega_z\n4.0,1,1\n").is_err());
        assert!(LatticeEnsemble::parse("theta,population\n0.1,1\n").is_err());
    }
}
