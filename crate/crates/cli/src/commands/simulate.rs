use std::fmt::Write as _;

use anyhow::{bail, Context, Result};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use shadescope::sim::{
    completeness_metrics, generate_network, run_probe_runs, write_curves, ExperimentOptions,
    NetworkModel, NetworkSpec, ProbeRun,
};
use shadescope::{ProbePlan, RouterHash, Shade};

use super::router_hash;
use crate::args::{Format, GlobalArgs, SimulateArgs};
use crate::output::{emit, json, write_file};
use crate::{EXIT_INCONCLUSIVE, EXIT_OK};

fn targets(model: &NetworkModel, spec: &str) -> Result<Vec<RouterHash>> {
    let hashes: Vec<RouterHash> = match spec {
        "per-shade" => Shade::ALL
            .iter()
            .filter_map(|&s| model.routers_with_shade(s).next().map(|r| r.hash))
            .collect(),
        "exclusive" => model.exclusive.iter().copied().collect(),
        "published" => model.published.iter().copied().collect(),
        other => match other.strip_prefix("random:") {
            Some(n) => {
                let n: usize = n.parse().with_context(|| format!("--targets {other}"))?;
                let mut rng = ChaCha8Rng::seed_from_u64(model.seed);
                model
                    .routers
                    .choose_multiple(&mut rng, n)
                    .map(|r| r.hash)
                    .collect()
            }
            None => other.split(',').map(router_hash).collect::<Result<_>>()?,
        },
    };
    if hashes.is_empty() {
        bail!("--targets {spec} selects no routers");
    }
    Ok(hashes)
}

fn curves_csv(runs: &[ProbeRun]) -> Result<String> {
    let curves: Vec<_> = runs.iter().map(|r| r.curve.clone()).collect();
    let mut buf = Vec::new();
    write_curves(&curves, &mut buf)?;
    Ok(String::from_utf8(buf)?)
}

pub fn simulate(global: &GlobalArgs, args: &SimulateArgs) -> Result<u8> {
    let spec = NetworkSpec::load(&args.spec_file)?;
    let model =
        generate_network(&spec).with_context(|| format!("spec {}", args.spec_file.display()))?;
    let metrics = completeness_metrics(&model);
    if let Some(dir) = &args.write_netdb {
        let n = model.write_netdb(dir)?;
        eprintln!("wrote {n} records to {}", dir.display());
    }

    let targets = targets(&model, &args.targets)?;
    let mut plan = ProbePlan::new(model.floodfills.clone(), global.batch)?;
    if let Some(seed) = global.seed {
        plan = plan.shuffled(seed);
    }
    if let Some(max) = global.max_probes {
        plan = plan.with_max_probes(max);
    }
    let options = ExperimentOptions {
        failure_rate: args.failure_rate,
        failure_seed: global.seed.unwrap_or(spec.seed),
    };
    let runs = run_probe_runs(&model, &targets, &plan, options)?;
    let csv_text = curves_csv(&runs)?;
    if let Some(out) = &global.out {
        write_file(out, &csv_text)?;
    }

    let assigned = |h: &RouterHash| model.router(h).map(|r| r.shade);
    let text = match global.format {
        Format::Csv => csv_text,
        Format::Json => json(&json!({
            "model": {
                "routers": model.routers.len(),
                "published": model.published.len(),
                "floodfills": model.floodfills.len(),
                "exclusive": model.exclusive.len(),
                "k": model.k,
                "seed": model.seed,
                "date": spec.date,
            },
            "metrics": metrics,
            "plan": {
                "batch_size": plan.batch_size(),
                "planned_probes": plan.planned_probes(),
            },
            "targets": runs.iter().map(|r| json!({
                "target": r.curve.target,
                "assigned_shade": assigned(&r.curve.target),
                "report": r.report,
                "probes_to_first_hit": r.probes_to_first_hit(),
                "flat_zero": r.curve.is_flat_zero(),
            })).collect::<Vec<_>>(),
            "curves_file": global.out,
        }))?,
        Format::Table => {
            let mut out = String::new();
            writeln!(out, "Network           {model}")?;
            writeln!(out, "ρ = {:.3}", metrics.rho)?;
            writeln!(out, "ξ = {:.3}", metrics.xi)?;
            writeln!(
                out,
                "Probe plan        {} of {} floodfills, batch {}",
                plan.planned_probes(),
                plan.floodfills().len(),
                plan.batch_size()
            )?;
            for r in &runs {
                let truth = assigned(&r.curve.target).map_or("-".into(), |s| s.level().to_string());
                let verdict = r
                    .report
                    .shade()
                    .map_or("inconclusive".into(), |s| s.to_string());
                let found = r
                    .probes_to_first_hit()
                    .map_or("never".into(), |p| format!("after {p} probes"));
                writeln!(
                    out,
                    "  {} true {truth}  {verdict:<22} found {found}",
                    r.curve.target.short()
                )?;
            }
            match &global.out {
                Some(p) => writeln!(out, "Curves written to {}", p.display())?,
                None => writeln!(out, "Pass --out <file> to save the hit curves as CSV.")?,
            }
            out
        }
    };
    emit(&text, None)?;
    let inconclusive = runs.iter().any(|r| r.report.is_inconclusive());
    Ok(if inconclusive {
        EXIT_INCONCLUSIVE
    } else {
        EXIT_OK
    })
}
