//! Probe experiments and hit curves.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::network::{NetworkModel, SimError};
use super::source::SimulatedSource;
use crate::classify::ShadeReport;
use crate::hash::RouterHash;
use crate::protocol::{classify_remote, ProbePlan, ProbeRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub cumulative_probes: usize,
    pub hits: u32,
}

/// Hits for one target, sampled at every batch boundary of the plan.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HitCurve {
    pub target: RouterHash,
    pub points: Vec<CurvePoint>,
}

impl HitCurve {
    pub fn is_monotone(&self) -> bool {
        self.points
            .windows(2)
            .all(|w| w[0].hits <= w[1].hits && w[0].cumulative_probes < w[1].cumulative_probes)
    }

    pub fn is_flat_zero(&self) -> bool {
        self.points.iter().all(|p| p.hits == 0)
    }

    pub fn final_hits(&self) -> u32 {
        self.points.last().map_or(0, |p| p.hits)
    }
}

/// Full outcome of one target's run.
#[derive(Debug, Clone)]
pub struct ProbeRun {
    pub curve: HitCurve,
    pub report: ShadeReport,
    pub log: Vec<ProbeRecord>,
}

impl ProbeRun {
    /// Probes issued before the record turned up; 0 for local or console hits.
    pub fn probes_to_first_hit(&self) -> Option<usize> {
        self.report.any_hit().then_some(self.report.probes_used)
    }
}

/// Options for [`run_probe_runs`].
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ExperimentOptions {
    pub failure_rate: f64,
    pub failure_seed: u64,
}

fn curve_from(target: RouterHash, plan: &ProbePlan, report: &ShadeReport) -> HitCurve {
    let found_at = report.any_hit().then_some(report.probes_used);
    HitCurve {
        target,
        points: plan
            .checkpoints()
            .into_iter()
            .map(|c| CurvePoint {
                cumulative_probes: c,
                hits: u32::from(found_at.is_some_and(|at| at <= c)),
            })
            .collect(),
    }
}

fn check_inputs(
    model: &NetworkModel,
    targets: &[RouterHash],
    plan: &ProbePlan,
) -> Result<(), SimError> {
    if let Some(t) = targets.iter().find(|t| !model.contains(t)) {
        return Err(SimError::UnknownTarget(*t));
    }
    if let Some(f) = plan.floodfills().iter().find(|f| !model.is_floodfill(f)) {
        return Err(SimError::UnknownFloodfill(*f));
    }
    Ok(())
}

/// Classify each target against a fresh simulated source with empty local
/// and console views.
pub fn run_probe_runs(
    model: &NetworkModel,
    targets: &[RouterHash],
    plan: &ProbePlan,
    options: ExperimentOptions,
) -> Result<Vec<ProbeRun>, SimError> {
    check_inputs(model, targets, plan)?;
    Ok(targets
        .iter()
        .enumerate()
        .map(|(i, target)| {
            let mut source = SimulatedSource::new(model).with_failure_rate(
                options.failure_rate,
                options.failure_seed.wrapping_add(i as u64),
            );
            let (report, log) = classify_remote(target, &mut source, plan);
            ProbeRun {
                curve: curve_from(*target, plan, &report),
                report,
                log,
            }
        })
        .collect())
}

/// One hit curve per target.
pub fn run_probe_experiment(
    model: &NetworkModel,
    targets: &[RouterHash],
    plan: &ProbePlan,
) -> Result<Vec<HitCurve>, SimError> {
    Ok(
        run_probe_runs(model, targets, plan, ExperimentOptions::default())?
            .into_iter()
            .map(|r| r.curve)
            .collect(),
    )
}

#[derive(Debug, Serialize, Deserialize)]
struct CurveRow {
    target: RouterHash,
    cumulative_probes: usize,
    hits: u32,
}

/// CSV `target,cumulative_probes,hits`, ordered by target then probes.
pub fn write_curves<W: Write>(curves: &[HitCurve], out: W) -> Result<(), SimError> {
    let mut sorted: Vec<&HitCurve> = curves.iter().collect();
    sorted.sort_by_key(|c| c.target);
    let mut w = csv::Writer::from_writer(out);
    for c in sorted {
        let mut points = c.points.clone();
        points.sort_by_key(|p| p.cumulative_probes);
        for p in points {
            w.serialize(CurveRow {
                target: c.target,
                cumulative_probes: p.cumulative_probes,
                hits: p.hits,
            })?;
        }
    }
    w.flush().map_err(|source| SimError::Write {
        path: "<curve output>".into(),
        source,
    })?;
    Ok(())
}

pub fn export_curves(curves: &[HitCurve], path: impl AsRef<Path>) -> Result<(), SimError> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|source| SimError::Write {
        path: path.display().to_string(),
        source,
    })?;
    write_curves(curves, file)
}

pub fn read_curves<R: Read>(input: R) -> Result<Vec<HitCurve>, SimError> {
    let mut curves: Vec<HitCurve> = Vec::new();
    for row in csv::Reader::from_reader(input).deserialize() {
        let row: CurveRow = row?;
        let point = CurvePoint {
            cumulative_probes: row.cumulative_probes,
            hits: row.hits,
        };
        match curves.last_mut() {
            Some(c) if c.target == row.target => c.points.push(point),
            _ => curves.push(HitCurve {
                target: row.target,
                points: vec![point],
            }),
        }
    }
    Ok(curves)
}

pub fn import_curves(path: impl AsRef<Path>) -> Result<Vec<HitCurve>, SimError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| SimError::Read {
        path: path.display().to_string(),
        source,
    })?;
    read_curves(file)
}
