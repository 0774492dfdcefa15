//! End-to-end check with the built-in and sample trackers.

use std::path::Path;

use anyhow::Result;

use omnitrack::controllers::PatternConfig;
use omnitrack::evaluator::{ReferenceKind, TrackerSpec, ADDR_PLACEHOLDER, TRACE_FILE};
use omnitrack::measures::ReportParams;
use omnitrack::synthetic::SyntheticSpec;

use crate::config::BenchConfig;
use crate::evaluate::{cmd_evaluate, run_dir};
use crate::report::cmd_report;

#[derive(Debug, Clone)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &str, passed: bool, detail: impl Into<String>) -> Check {
    Check {
        name: name.to_string(),
        passed,
        detail: detail.into(),
    }
}

/// Evaluates echo and static in process and, when `exe` is given, the
/// static sample tracker as a child process over pipes and over TCP.
/// Everything is written under `output`.
pub fn cmd_selftest(
    output: &Path,
    exe: Option<&Path>,
    frames: usize,
    face: usize,
    workers: usize,
) -> Result<Vec<Check>> {
    let base = BenchConfig {
        synthetic: SyntheticSpec::stock(frames, face),
        patterns: vec![PatternConfig::variant("Eb"), PatternConfig::variant("Em_f")],
        width: 320,
        height: 240,
        output: output.to_path_buf(),
        workers,
        ..Default::default()
    };
    let mut trackers = vec![
        TrackerSpec::reference(ReferenceKind::Echo),
        TrackerSpec::reference(ReferenceKind::Static),
    ];
    if let Some(exe) = exe {
        let exe = exe.display().to_string();
        trackers.push(TrackerSpec::Command {
            name: "sample_static".into(),
            command: vec![exe.clone(), "sample-tracker".into(), "static".into()],
        });
        trackers.push(TrackerSpec::Tcp {
            name: "sample_static_tcp".into(),
            listen: "127.0.0.1:0".into(),
            command: vec![
                exe,
                "sample-tracker".into(),
                "static".into(),
                "--connect".into(),
                ADDR_PLACEHOLDER.into(),
            ],
        });
    }
    let mut checks = Vec::new();
    let mut seqs = Vec::new();
    for spec in &trackers {
        let cfg = BenchConfig {
            tracker: Some(spec.clone()),
            ..base.clone()
        };
        let resolved = cfg.resolve(&[])?;
        if seqs.is_empty() {
            seqs = resolved
                .sources
                .iter()
                .map(|s| s.sequence.id().to_string())
                .collect();
        }
        let s = cmd_evaluate(&resolved)?;
        checks.push(check(
            &format!("{} completes", spec.name()),
            s.infrastructure_failures == 0,
            format!(
                "{} runs, {} infrastructure failures",
                s.runs.len(),
                s.infrastructure_failures
            ),
        ));
    }

    let report = cmd_report(
        &output.join("runs"),
        &output.join("report"),
        ReportParams::default(),
    )?;
    let echo_ok = ["Eb", "Em_f"].iter().all(|p| {
        report
            .get("echo", p)
            .is_some_and(|e| e.failures == 0.0 && e.eao == Some(1.0) && e.accuracy == Some(1.0))
    });
    checks.push(check(
        "echo scores A = EAO = 1 without failures",
        echo_ok,
        "",
    ));
    let static_failures = report
        .get("static", "Em_f")
        .map(|e| e.failures)
        .unwrap_or(0.0);
    checks.push(check(
        "static fails on Em_f",
        static_failures >= 1.0,
        format!("{static_failures} failures"),
    ));

    for other in trackers.iter().skip(2) {
        let mut same = true;
        for p in ["Eb", "Em_f"] {
            for s in &seqs {
                let read =
                    |t: &str| std::fs::read(run_dir(output, t, p, s, 0).join(TRACE_FILE)).ok();
                same &= read("static").is_some() && read("static") == read(other.name());
            }
        }
        checks.push(check(
            &format!("{} traces equal in-process static", other.name()),
            same,
            "",
        ));
    }
    Ok(checks)
}
