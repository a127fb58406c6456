use std::fmt::Write as _;

use anyhow::{bail, Context, Result};
use serde_json::json;

use shadescope::classify::EvidenceSource;
use shadescope::protocol::probe_log_csv;
use shadescope::sim::{generate_network, NetworkModel, NetworkSpec, SimulatedSource};
use shadescope::snapshot::RecordSummary;
use shadescope::{
    classify_remote, gateway_scan, shade8_certificate, GatewayMatch, GatewayTarget, NetDbSnapshot,
    NetDbSource, ProbePlan, RouterHash, RouterInfo, ShadeReport, SourceError,
};

use super::{leasesets, router_hash, snapshot};
use crate::args::{Format, GlobalArgs, LookupArgs, SourceKind};
use crate::output::{csv, emit, json, write_file};
use crate::{EXIT_INCONCLUSIVE, EXIT_OK};

/// Local lookups from a snapshot (when given), everything else from the
/// simulated overlay (when given).
struct Sources<'a> {
    snapshot: Option<&'a NetDbSnapshot>,
    sim: Option<SimulatedSource<'a>>,
}

impl NetDbSource for Sources<'_> {
    fn lookup_local(&self, hash: &RouterHash) -> Option<RouterInfo> {
        match self.snapshot {
            Some(s) => s.get(hash).cloned(),
            None => self.sim.as_ref()?.lookup_local(hash),
        }
    }

    fn lookup_console(&mut self, hash: &RouterHash) -> Result<Option<RouterInfo>, SourceError> {
        match &mut self.sim {
            Some(sim) => sim.lookup_console(hash),
            None => Err(SourceError::Unsupported("console lookups")),
        }
    }

    fn probe_floodfill(&mut self, floodfill: &RouterHash) -> Result<(), SourceError> {
        match &mut self.sim {
            Some(sim) => sim.probe_floodfill(floodfill),
            None => Err(SourceError::Unsupported("floodfill probes")),
        }
    }
}

pub fn lookup(global: &GlobalArgs, args: &LookupArgs) -> Result<u8> {
    let hash = router_hash(&args.hash)?;
    let snap = global.netdb.as_deref().map(snapshot).transpose()?;
    let model: Option<NetworkModel> = match args.source {
        SourceKind::Snapshot => None,
        SourceKind::Sim => {
            let Some(path) = &args.sim_spec else {
                bail!("--source sim needs --sim-spec <spec.json>");
            };
            let spec = NetworkSpec::load(path)?;
            Some(generate_network(&spec).with_context(|| format!("{}", path.display()))?)
        }
    };
    if snap.is_none() && model.is_none() {
        bail!("no source: pass --netdb, or --source sim with --sim-spec");
    }

    let floodfills = match (&model, &snap) {
        (Some(m), _) => m.floodfills.clone(),
        (None, Some(s)) => s.floodfills(),
        (None, None) => unreachable!(),
    };
    let mut plan = ProbePlan::new(floodfills, global.batch)?;
    if let Some(seed) = global.seed {
        plan = plan.shuffled(seed);
    }
    if let Some(max) = global.max_probes {
        plan = plan.with_max_probes(max);
    }

    let mut sources = Sources {
        snapshot: snap.as_ref(),
        sim: model.as_ref().map(|m| {
            SimulatedSource::new(m).with_failure_rate(args.failure_rate, global.seed.unwrap_or(0))
        }),
    };
    let (report, log) = classify_remote(&hash, &mut sources, &plan);
    let certificate = shade8_certificate(&report);

    let gateway = match &global.leasesets {
        Some(path) => {
            let file = leasesets(path)?;
            Some((
                file.leasesets.len(),
                gateway_scan(&GatewayTarget::Exact(hash), &file.leasesets),
            ))
        }
        None => None,
    };

    if let Some(out) = &global.out {
        write_file(out, &probe_log_csv(&log))?;
    }
    let text = match global.format {
        Format::Json => json(&json!({
            "report": report,
            "record": report.record.as_ref().map(RecordSummary::from),
            "shade8_certificate": certificate,
            "planned_probes": report.planned_probes,
            "batch_size": plan.batch_size(),
            "floodfill_pool": plan.floodfills().len(),
            "gateway_scan": gateway.as_ref().map(|(n, m)| json!({
                "leasesets": n,
                "matches": m,
                "interpretation": GatewayMatch::INTERPRETATION,
            })),
        }))?,
        Format::Csv => csv(
            &["probe_index", "floodfill_b64", "result"],
            log.iter().map(|p| {
                [
                    p.probe_index.to_string(),
                    p.floodfill.to_base64(),
                    p.result.to_string(),
                ]
            }),
        )?,
        Format::Table => table(&report, &plan, certificate, gateway.as_ref())?,
    };
    emit(&text, None)?;
    Ok(if report.is_inconclusive() {
        EXIT_INCONCLUSIVE
    } else {
        EXIT_OK
    })
}

fn stage(report: &ShadeReport, source: EvidenceSource) -> &'static str {
    match report.evidence.iter().find(|e| e.source == source) {
        Some(e) if e.hit => "hit",
        Some(e) if e.failures > 0 => "failed",
        Some(_) => "miss",
        None => "not queried",
    }
}

fn table(
    report: &ShadeReport,
    plan: &ProbePlan,
    certificate: bool,
    gateway: Option<&(usize, Vec<GatewayMatch>)>,
) -> Result<String> {
    let mut out = String::new();
    writeln!(out, "Router            {}", report.subject)?;
    writeln!(
        out,
        "Local NetDB       {}",
        stage(report, EvidenceSource::LocalNetDb)
    )?;
    writeln!(
        out,
        "Console           {}",
        stage(report, EvidenceSource::ConsoleCache)
    )?;
    let probe_hits = report
        .evidence
        .iter()
        .filter(|e| e.source == EvidenceSource::FloodfillProbe && e.hit)
        .count();
    writeln!(
        out,
        "Floodfill probes  {} of {} planned (pool {}, batch {}), {} failed, {} hits",
        report.probes_used,
        report.planned_probes,
        plan.floodfills().len(),
        plan.batch_size(),
        report.failed_probes,
        probe_hits
    )?;
    if let Some(r) = &report.record {
        writeln!(out, "Caps              {}", r.caps())?;
        writeln!(out, "Version           {}", r.version().unwrap_or("-"))?;
        let n = |v: Option<u64>| v.map_or("-".to_string(), |n| n.to_string());
        writeln!(out, "Known routers     {}", n(r.known_routers()))?;
        writeln!(out, "Known LeaseSets   {}", n(r.known_leasesets()))?;
        for a in &r.addresses {
            match (a.host(), a.port()) {
                (Some(h), Some(p)) => writeln!(out, "Address           {} {h}:{p}", a.style)?,
                _ => writeln!(out, "Address           {} (no direct host)", a.style)?,
            }
        }
        let yn = |b: bool| if b { "yes" } else { "no" };
        writeln!(out, "Direct IP         {}", yn(r.has_direct_address()))?;
        writeln!(out, "Introducers       {}", yn(r.has_introducers()))?;
    }
    match report.shade() {
        Some(shade) => writeln!(out, "Verdict           {shade} (Layer {})", shade.layer())?,
        None => writeln!(
            out,
            "Verdict           inconclusive: absence not established"
        )?,
    }
    if certificate {
        writeln!(
            out,
            "Shade 8 criterion satisfied: local miss, console miss, all {} probed floodfills missed",
            report.probes_used
        )?;
    }
    for d in &report.diagnostics {
        writeln!(out, "note: {d}")?;
    }
    if let Some((n, matches)) = gateway {
        writeln!(
            out,
            "Gateway scan      {n} LeaseSets, {} matches ({})",
            matches.len(),
            GatewayMatch::INTERPRETATION
        )?;
        for m in matches {
            let name = m
                .b32
                .clone()
                .unwrap_or_else(|| m.destination_hash.to_base64());
            writeln!(
                out,
                "  {name} lease {} tunnel {}",
                m.lease_index, m.tunnel_id
            )?;
        }
    }
    Ok(out)
}
