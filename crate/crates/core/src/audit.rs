//! Seeded random-trial audits of the sandwich and stability bounds.
//!
//! Every trial draws from its own ChaCha stream (`seed`, trial index), so a
//! report does not depend on how trials are scheduled across threads.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::filtration::{verify_vr_lemma, Containment, VrWitness};
use crate::geometry::{PointCloud, Region};
use crate::io::format_float;
use crate::metrics::{
    entry_sup_distance, point_perturbation_bound, radius_perturbation_bound, stability_bound,
    verify_diagram_stability, DimensionCheck, Relation, StabilityBound, DEFAULT_INTERVAL_GRID,
    DEFAULT_REGION_GRID,
};

fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

fn random_points(rng: &mut ChaCha8Rng, n: usize, dim: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| (0..dim).map(|_| rng.gen::<f64>()).collect())
        .collect()
}

fn check_trials(trials: usize) -> Result<()> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VrAuditConfig {
    pub trials: usize,
    pub seed: u64,
    /// Ambient dimension; drawn from {2, 3} per trial when `None`.
    pub dim: Option<usize>,
    pub max_points: usize,
}

impl Default for VrAuditConfig {
    fn default() -> Self {
        VrAuditConfig {
            trials: 200,
            seed: 7,
            dim: None,
            max_points: 8,
        }
    }
}

#[derive(Debug, Clone)]
pub struct VrTrial {
    pub trial: usize,
    pub cloud: PointCloud,
    pub t: f64,
    pub t_prime: f64,
    pub simplices_checked: usize,
    pub near_boundary: usize,
    pub violations: Vec<VrWitness>,
}

impl VrTrial {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct VrAudit {
    pub config: VrAuditConfig,
    pub trials: Vec<VrTrial>,
}

impl VrAudit {
    pub fn holds(&self) -> bool {
        self.trials.iter().all(VrTrial::holds)
    }

    pub fn violations(&self) -> usize {
        self.trials.iter().filter(|t| !t.holds()).count()
    }

    /// One line per trial, then a summary and every violating witness.
    pub fn report(&self) -> String {
        let mut out = String::from("trial\tn\tdim\tt\tt_prime\tsimplices\tnear_boundary\tholds\n");
        for t in &self.trials {
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
                t.trial,
                t.cloud.len(),
                t.cloud.dim(),
                format_float(t.t),
                format_float(t.t_prime),
                t.simplices_checked,
                t.near_boundary,
                t.holds()
            );
        }
        let _ = writeln!(
            out,
            "# vr-lemma trials={} seed={} violations={} result={}",
            self.trials.len(),
            self.config.seed,
            self.violations(),
            if self.holds() { "PASS" } else { "FAIL" }
        );
        for t in self.trials.iter().filter(|t| !t.holds()) {
            for w in &t.violations {
                let which = match w.containment {
                    Containment::RipsInCech => "VR(t'r) in Cech(tr)",
                    Containment::CechInRips => "Cech(tr) in VR(tr)",
                };
                let _ = writeln!(
                    out,
                    "# violation trial={} simplex={} rips={} cech={} containment={which}",
                    t.trial,
                    w.simplex,
                    format_float(w.rips_scale),
                    format_float(w.cech_scale)
                );
            }
            let _ = writeln!(out, "# cloud trial={}", t.trial);
            for (p, w) in t.cloud.points().iter().zip(t.cloud.weights()) {
                let coords: Vec<String> = p.iter().map(|&c| format_float(c)).collect();
                let _ = writeln!(out, "#   {} w={}", coords.join(","), format_float(*w));
            }
        }
        out
    }
}

/// Random clouds of 2..=`max_points` points in the unit cube with weights in
/// `[0.2, 5]` and `t` in `[0.1, 3]`; every vertex subset is checked.
pub fn run_vr_audit(config: &VrAuditConfig) -> Result<VrAudit> {
    check_trials(config.trials)?;
    if let Some(d) = config.dim {
        if d == 0 {
            return Err(Error::InvalidParameter("dim must be at least 1".into()));
        }
    }
    if config.max_points < 2 || config.max_points > 12 {
        return Err(Error::InvalidParameter(format!(
            "max_points must lie in 2..=12, got {}",
            config.max_points
        )));
    }
    let trials = (0..config.trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = trial_rng(config.seed, trial);
            let dim = config.dim.unwrap_or_else(|| rng.gen_range(2..=3));
            let n = rng.gen_range(2..=config.max_points);
            let points = random_points(&mut rng, n, dim);
            let weights = (0..n).map(|_| rng.gen_range(0.2..=5.0)).collect();
            let t = rng.gen_range(0.1..=3.0);
            let cloud = PointCloud::new(points, weights)?;
            let report = verify_vr_lemma(&cloud, t, n - 1)?;
            Ok(VrTrial {
                trial,
                cloud,
                t,
                t_prime: report.t_prime,
                simplices_checked: report.simplices_checked,
                near_boundary: report.near_boundary.len(),
                violations: report.violations,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(VrAudit {
        config: *config,
        trials,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityAuditConfig {
    pub trials: usize,
    pub seed: u64,
    /// Grid points per axis of `K = [0, 1]^2`.
    pub grid: usize,
    pub max_points: usize,
    pub jitter: f64,
    pub weight_jitter: f64,
}

impl Default for StabilityAuditConfig {
    fn default() -> Self {
        StabilityAuditConfig {
            trials: 100,
            seed: 7,
            grid: DEFAULT_REGION_GRID,
            max_points: 8,
            jitter: 0.1,
            weight_jitter: 0.1,
        }
    }
}

/// What a stability trial perturbs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Perturbation {
    Both,
    /// Radii travel with their points, so `D = 0`.
    Points,
    /// Points stay put under the identity relation, so `|η| = 0`.
    Radii,
}

impl Perturbation {
    pub fn name(&self) -> &'static str {
        match self {
            Perturbation::Both => "both",
            Perturbation::Points => "points",
            Perturbation::Radii => "radii",
        }
    }
}

#[derive(Debug, Clone)]
pub struct StabilityTrial {
    pub trial: usize,
    pub kind: Perturbation,
    pub x: PointCloud,
    pub y: PointCloud,
    pub bound: StabilityBound,
    pub grid_sup: f64,
    /// The tighter bound for the special cases, when one applies.
    pub special_bound: Option<f64>,
    /// The bound has the shape the special case predicts.
    pub special_ok: bool,
    pub dims: Vec<DimensionCheck>,
}

impl StabilityTrial {
    pub fn entry_holds(&self) -> bool {
        let tight = self.special_bound.unwrap_or(self.bound.total);
        self.grid_sup <= self.bound.total && self.grid_sup <= tight + 1e-12
    }

    pub fn diagrams_hold(&self) -> bool {
        self.dims.iter().all(|c| c.holds)
    }

    pub fn holds(&self) -> bool {
        self.entry_holds() && self.diagrams_hold() && self.special_ok
    }
}

#[derive(Debug, Clone)]
pub struct StabilityAudit {
    pub config: StabilityAuditConfig,
    pub trials: Vec<StabilityTrial>,
}

impl StabilityAudit {
    pub fn holds(&self) -> bool {
        self.trials.iter().all(StabilityTrial::holds)
    }

    pub fn entry_holds(&self) -> bool {
        self.trials.iter().all(StabilityTrial::entry_holds)
    }

    pub fn diagrams_hold(&self) -> bool {
        self.trials.iter().all(StabilityTrial::diagrams_hold)
    }

    pub fn specializations_hold(&self) -> bool {
        self.trials.iter().all(|t| t.special_ok)
    }

    /// Machine-readable rows: the entry-function check has dim `sup`.
    pub fn tsv(&self) -> String {
        let mut out = String::from("trial\tkind\tdim\td_B\tbound\tholds\n");
        for t in &self.trials {
            let _ = writeln!(
                out,
                "{}\t{}\tsup\t{}\t{}\t{}",
                t.trial,
                t.kind.name(),
                format_float(t.grid_sup),
                format_float(t.bound.total),
                t.entry_holds()
            );
            for c in &t.dims {
                let _ = writeln!(
                    out,
                    "{}\t{}\t{}\t{}\t{}\t{}",
                    t.trial,
                    t.kind.name(),
                    c.dim,
                    format_float(c.bottleneck),
                    format_float(c.bound),
                    c.holds
                );
            }
        }
        out
    }

    pub fn report(&self) -> String {
        let mut out = self.tsv();
        let count = |f: fn(&StabilityTrial) -> bool| self.trials.iter().filter(|t| !f(t)).count();
        let _ = writeln!(
            out,
            "# stability trials={} seed={} grid={} entry_violations={} diagram_violations={} specialization_violations={} result={}",
            self.trials.len(),
            self.config.seed,
            self.config.grid,
            count(StabilityTrial::entry_holds),
            count(StabilityTrial::diagrams_hold),
            self.trials.iter().filter(|t| !t.special_ok).count(),
            if self.holds() { "PASS" } else { "FAIL" }
        );
        for t in self.trials.iter().filter(|t| !t.holds()) {
            let _ = writeln!(
                out,
                "# violation trial={} kind={} D={} eta={} S={} total={} grid_sup={}",
                t.trial,
                t.kind.name(),
                format_float(t.bound.radius_distance),
                format_float(t.bound.eta_norm),
                format_float(t.bound.s_r.max(t.bound.s_s)),
                format_float(t.bound.total),
                format_float(t.grid_sup)
            );
            for (label, c) in [("x", &t.x), ("y", &t.y)] {
                for (p, w) in c.points().iter().zip(c.weights()) {
                    let coords: Vec<String> = p.iter().map(|&v| format_float(v)).collect();
                    let _ = writeln!(
                        out,
                        "#   {label} {} w={}",
                        coords.join(","),
                        format_float(*w)
                    );
                }
            }
        }
        out
    }
}

fn stability_trial(
    config: &StabilityAuditConfig,
    region: &Region,
    trial: usize,
) -> Result<StabilityTrial> {
    let mut rng = trial_rng(config.seed, trial);
    let kind = match trial % 3 {
        0 => Perturbation::Both,
        1 => Perturbation::Points,
        _ => Perturbation::Radii,
    };
    let n = rng.gen_range(2..=config.max_points);
    let points = random_points(&mut rng, n, 2);
    let weights: Vec<f64> = (0..n).map(|_| rng.gen_range(0.5..=2.0)).collect();
    let moved: Vec<Vec<f64>> = points
        .iter()
        .map(|p| {
            if kind == Perturbation::Radii {
                return p.clone();
            }
            // uniform direction, radius at most `jitter`, kept inside K
            let angle = rng.gen_range(0.0..std::f64::consts::TAU);
            let len = rng.gen_range(0.0..=config.jitter);
            vec![
                (p[0] + len * angle.cos()).clamp(0.0, 1.0),
                (p[1] + len * angle.sin()).clamp(0.0, 1.0),
            ]
        })
        .collect();
    let reweighted: Vec<f64> = weights
        .iter()
        .map(|&w| {
            if kind == Perturbation::Points {
                w
            } else {
                w * (1.0 + rng.gen_range(-config.weight_jitter..=config.weight_jitter))
            }
        })
        .collect();
    let x = PointCloud::new(points, weights)?;
    let y = PointCloud::new(moved, reweighted)?;
    let eta = Relation::identity(n);
    let (r, s) = (x.linear_radii(), y.linear_radii());
    let bound = stability_bound(&x, &r, &y, &s, &eta, region)?;
    let grid_sup = entry_sup_distance(&x, &r, &y, &s, region)?;
    let (special_bound, special_ok) = match kind {
        Perturbation::Both => (None, true),
        Perturbation::Points => {
            let per_point = point_perturbation_bound(&x, &y, &r, region)?;
            let expected = if bound.eta_norm == 0.0 {
                0.0
            } else {
                bound.eta_norm * bound.s_r.max(bound.s_s)
            };
            let ok =
                bound.radius_distance == 0.0 && bound.total == expected && per_point <= bound.total;
            (Some(per_point), ok)
        }
        Perturbation::Radii => {
            let radii_only = radius_perturbation_bound(&x, &r, &s, region, DEFAULT_INTERVAL_GRID)?;
            let ok = bound.eta_norm == 0.0 && bound.total == radii_only;
            (Some(radii_only), ok)
        }
    };
    let dims = verify_diagram_stability(&x, &y, &eta, region, 1)?.dims;
    Ok(StabilityTrial {
        trial,
        kind,
        x,
        y,
        bound,
        grid_sup,
        special_bound,
        special_ok,
        dims,
    })
}

/// Random clouds in `[0, 1]^2` with a jittered copy. Trials cycle through
/// moving both points and weights, only points, and only weights.
pub fn run_stability_audit(config: &StabilityAuditConfig) -> Result<StabilityAudit> {
    check_trials(config.trials)?;
    if config.grid < 2 {
        return Err(Error::InvalidParameter(
            "grid needs at least 2 points per axis".into(),
        ));
    }
    if config.max_points < 2 || config.max_points > 10 {
        return Err(Error::InvalidParameter(format!(
            "max_points must lie in 2..=10, got {}",
            config.max_points
        )));
    }
    if !(config.jitter >= 0.0) || !(0.0..1.0).contains(&config.weight_jitter) {
        return Err(Error::InvalidParameter(
            "jitter must be nonnegative and weight jitter in [0, 1)".into(),
        ));
    }
    let region = Region::new(
        vec![0.0, 0.0],
        vec![1.0, 1.0],
        vec![config.grid, config.grid],
    )?;
    let trials = (0..config.trials)
        .into_par_iter()
        .map(|trial| stability_trial(config, &region, trial))
        .collect::<Result<Vec<_>>>()?;
    Ok(StabilityAudit {
        config: *config,
        trials,
    })
}
