//! `verify`: runs the whole property suite and prints one line per
//! property (tab-separated: outcome, id, detail). Exit code 0 when all
//! pass, 3 when a run aborted on detected instability, 4 on failure.

use super::{create_run_dir, write_manifest, CmdError, Invocation};
use abcdlab::verify::{exit_code, run_all, Mutation, Outcome, VerifyOptions};

pub fn run(inv: &Invocation, write_out: bool) -> Result<(), CmdError> {
    let cfg = &inv.config;
    let quick = cfg.get_bool("verify", "quick")?.unwrap_or(false);
    let dt_scale = cfg.get_f64("verify", "dt_scale")?.unwrap_or(1.0);
    let mutation = match cfg.get_str("verify", "mutate").as_deref().unwrap_or("none") {
        "none" => None,
        "a3-sign" => Some(Mutation::FlipA3Sign),
        other => {
            return Err(CmdError::Config(format!(
                "verify.mutate must be none | a3-sign, got `{other}`"
            )))
        }
    };
    cfg.finish()?;

    if write_out {
        create_run_dir(&inv.out)?;
        write_manifest(
            inv,
            "verify",
            &[
                ("quick".into(), quick.to_string()),
                ("dt_scale".into(), dt_scale.to_string()),
                ("mutate".into(), format!("{mutation:?}")),
            ],
        )?;
    }

    let opts = VerifyOptions { seed: inv.seed, quick, dt_scale, mutation };
    let results = run_all(&opts);

    let mut report = String::new();
    for r in &results {
        let line = format!("{}\t{}\t{}", r.outcome.as_str(), r.id, r.detail);
        println!("{line}");
        report.push_str(&line);
        report.push('\n');
    }
    let failures = results.iter().filter(|r| r.outcome == Outcome::Fail).count();
    let inconclusive = results.iter().filter(|r| r.outcome == Outcome::Inconclusive).count();
    let summary = format!(
        "summary: {} properties, {failures} failed, {inconclusive} inconclusive",
        results.len()
    );
    println!("{summary}");
    report.push_str(&summary);
    report.push('\n');
    if write_out {
        std::fs::write(inv.out.join("report.txt"), report)?;
    }

    match exit_code(&results) {
        0 => Ok(()),
        3 => Err(CmdError::Inconclusive),
        _ => Err(CmdError::PropertyFailure),
    }
}
