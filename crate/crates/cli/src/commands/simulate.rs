//! `simulate`: one run of the normalized system into a self-describing
//! run directory: manifest, config copy, streamed diagnostics CSV, the
//! final-state dump and validity flags. On instability the partial CSV is
//! kept and the exit code is 3.

use super::{create_run_dir, resolve_params, write_manifest, CmdError, Invocation};
use abcdlab::diagnostics::{WeightMode, CSV_HEADER};
use abcdlab::sim::{self, DealiasMode, InitialData, SimError, SimulationConfig};
use abcdlab::spectral::Grid;
use abcdlab::AlphaBeta;
use std::io::Write;

pub fn run(inv: &Invocation) -> Result<(), CmdError> {
    let cfg = &inv.config;
    let params = resolve_params(cfg)?;

    let n = cfg.get_usize("grid", "n")?.unwrap_or(1024);
    let half_length = cfg.get_f64("grid", "l")?.unwrap_or(100.0);
    let dt = cfg.get_f64("time", "dt")?;
    let t_end = cfg.get_f64("time", "t_end")?.unwrap_or(20.0);
    let cadence = cfg.get_u64("time", "cadence")?.unwrap_or(10);

    let initial = match cfg.get_str("initial", "kind").as_deref().unwrap_or("gaussian") {
        "zero" => InitialData::Zero,
        "solitary" => InitialData::Solitary,
        "gaussian" => InitialData::Gaussian {
            amp_u: cfg.get_f64("initial", "amp_u")?.unwrap_or(0.01),
            amp_eta: cfg.get_f64("initial", "amp_eta")?.unwrap_or(0.01),
            width: cfg.get_f64("initial", "width")?.unwrap_or(5.0),
            center: cfg.get_f64("initial", "center")?.unwrap_or(0.0),
        },
        other => {
            return Err(CmdError::Config(format!(
                "initial.kind must be zero | solitary | gaussian, got `{other}`"
            )))
        }
    };

    let lambda = cfg.get_f64("diagnostics", "lambda")?.unwrap_or(20.0);
    let weight_mode = match cfg
        .get_str("diagnostics", "lambda_mode")
        .as_deref()
        .unwrap_or("fixed")
    {
        "fixed" => WeightMode::Fixed { lambda },
        "growing" => WeightMode::Growing {
            c0: cfg.get_f64("diagnostics", "c0")?.unwrap_or(4.0),
        },
        other => {
            return Err(CmdError::Config(format!(
                "diagnostics.lambda_mode must be fixed | growing, got `{other}`"
            )))
        }
    };
    let alpha = cfg.get_f64("diagnostics", "alpha")?;
    let beta = cfg.get_f64("diagnostics", "beta")?;
    let alpha_beta = match (alpha, beta) {
        (Some(alpha), Some(beta)) => Some(AlphaBeta { alpha, beta }),
        (None, None) => None,
        _ => {
            return Err(CmdError::Config(
                "diagnostics.alpha and diagnostics.beta must be given together".into(),
            ))
        }
    };
    let dealias = match cfg.get_str("diagnostics", "dealias").as_deref().unwrap_or("auto") {
        "auto" => DealiasMode::Auto,
        "on" => DealiasMode::On,
        "off" => DealiasMode::Off,
        other => {
            return Err(CmdError::Config(format!(
                "diagnostics.dealias must be auto | on | off, got `{other}`"
            )))
        }
    };
    let linear_only = cfg.get_bool("diagnostics", "linear_only")?.unwrap_or(false);
    cfg.finish()?;

    let run_cfg = SimulationConfig {
        params: params.normalized,
        n,
        half_length,
        dt,
        t_end,
        cadence,
        initial: initial.clone(),
        weight_mode,
        alpha_beta,
        dealias,
        linear_only,
    };
    run_cfg.validate().map_err(|e| CmdError::Config(e.to_string()))?;
    let resolved_ab = run_cfg.resolve_alpha_beta();

    create_run_dir(&inv.out)?;
    write_manifest(
        inv,
        "simulate",
        &[
            ("parameters".into(), params.source.clone()),
            ("a".into(), params.normalized.a.to_string()),
            ("c".into(), params.normalized.c.to_string()),
            ("b_origin".into(), params.normalized.b_origin.to_string()),
            ("n".into(), n.to_string()),
            ("l".into(), half_length.to_string()),
            ("dt".into(), dt.map(|v| v.to_string()).unwrap_or_else(|| "auto".into())),
            ("t_end".into(), t_end.to_string()),
            ("cadence".into(), cadence.to_string()),
            ("initial".into(), format!("{initial:?}")),
            ("weight_mode".into(), format!("{weight_mode:?}")),
            ("alpha".into(), resolved_ab.alpha.to_string()),
            ("beta".into(), resolved_ab.beta.to_string()),
            ("dealias".into(), format!("{dealias:?}")),
            ("linear_only".into(), linear_only.to_string()),
        ],
    )?;

    let csv_path = inv.out.join("diagnostics.csv");
    let mut csv = std::fs::File::create(&csv_path)?;
    writeln!(csv, "{CSV_HEADER}")?;
    let mut max_boundary = 0.0f64;
    let mut rows = 0u64;
    let result = sim::run(&run_cfg, |rec, _t, _s| {
        // each row is flushed so an aborted run keeps its partial CSV
        let _ = writeln!(csv, "{}", rec.csv_row());
        let _ = csv.flush();
        max_boundary = max_boundary.max(rec.boundary_flag);
        rows += 1;
    });

    let mut flags = String::new();
    match result {
        Ok(out) => {
            let grid = Grid::new(n, half_length).map_err(|e| CmdError::Config(e.to_string()))?;
            sim::write_state(&inv.out.join("final_state.bin"), &grid, out.final_time, &out.final_state)
                .map_err(|e| CmdError::Io(e.to_string()))?;
            flags.push_str("completed = true\nabort = none\n");
            flags.push_str(&format!("final_time = {}\n", out.final_time));
            flags.push_str(&format!("steps = {}\n", out.steps));
            flags.push_str(&format!("dt = {}\n", out.dt));
            flags.push_str(&format!("csv_rows = {rows}\n"));
            flags.push_str(&format!("max_boundary_amplitude = {max_boundary:e}\n"));
            std::fs::write(inv.out.join("flags.txt"), flags)?;
            println!(
                "simulate: T={} in {} steps -> {} ({} diagnostic rows, outer-domain max {max_boundary:.3e})",
                out.final_time,
                out.steps,
                inv.out.display(),
                rows
            );
            Ok(())
        }
        Err(err @ (SimError::Unstable { .. } | SimError::NonFinite { .. })) => {
            flags.push_str("completed = false\n");
            flags.push_str(&format!("abort = {err}\n"));
            flags.push_str(&format!("csv_rows = {rows}\n"));
            flags.push_str(&format!("max_boundary_amplitude = {max_boundary:e}\n"));
            std::fs::write(inv.out.join("flags.txt"), flags)?;
            Err(CmdError::Instability(err.to_string()))
        }
        Err(other) => Err(CmdError::Config(other.to_string())),
    }
}
