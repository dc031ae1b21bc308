//! `dispersion`: omega(k) and |w'(k)| tables plus the analytic report on
//! the group-velocity cubic and its critical points.

use super::{create_run_dir, g17, resolve_params, write_manifest, CmdError, Invocation};
use abcdlab::atlas::{dispersion_omega, group_velocity, group_velocity_cubic};
use std::io::Write;

pub fn run(inv: &Invocation) -> Result<(), CmdError> {
    let cfg = &inv.config;
    let params = resolve_params(cfg)?;
    let k_max = cfg.get_f64("dispersion", "k_max")?.unwrap_or(100.0);
    let k_points = cfg.get_usize("dispersion", "k_points")?.unwrap_or(2001);
    if k_points < 2 || !(k_max > 0.0) {
        return Err(CmdError::Config("dispersion: need k_max > 0 and k_points >= 2".into()));
    }
    cfg.finish()?;

    create_run_dir(&inv.out)?;
    write_manifest(
        inv,
        "dispersion",
        &[
            ("parameters".into(), params.source.clone()),
            ("a".into(), params.normalized.a.to_string()),
            ("c".into(), params.normalized.c.to_string()),
            ("b".into(), params.b.to_string()),
            ("k_max".into(), k_max.to_string()),
            ("k_points".into(), k_points.to_string()),
        ],
    )?;

    let n = &params.normalized;
    let mut table = String::from("k,omega,group_velocity\n");
    let mut min_gv = f64::INFINITY;
    let mut argmin = 0.0;
    for j in 0..k_points {
        let k = j as f64 * k_max / (k_points - 1) as f64;
        let omega = dispersion_omega(k, n);
        let gv = group_velocity(k, n);
        if gv < min_gv {
            min_gv = gv;
            argmin = k;
        }
        table.push_str(&format!("{},{},{}\n", g17(k), g17(omega), g17(gv)));
    }
    std::fs::write(inv.out.join("dispersion.csv"), table)?;

    let cubic = group_velocity_cubic(params.b, n);
    let mut report = String::new();
    report.push_str(&format!("a = {}\nc = {}\nb = {}\n", n.a, n.c, params.b));
    report.push_str(&format!("cubic_linear_coefficient = {}\n", cubic.linear_coeff));
    report.push_str(&format!("critical_point_radicand = {}\n", cubic.radicand));
    match cubic.mu_plus {
        Some(mu) if mu > 0.0 => {
            report.push_str(&format!("positive_critical_point = {mu}\n"));
            report.push_str(&format!(
                "p_at_minimum = {}\n",
                cubic.p_at_min.expect("minimum exists with a positive critical point")
            ));
        }
        _ => report.push_str("no positive critical point: p(mu) >= 1 for all mu >= 0\n"),
    }
    report.push_str(&format!("group_velocity_everywhere_positive = {}\n", cubic.everywhere_positive));
    report.push_str(&format!("group_velocity_at_zero = {}\n", group_velocity(0.0, n)));
    report.push_str(&format!("table_minimum = {min_gv}\ntable_argmin = {argmin}\n"));
    std::fs::write(inv.out.join("cubic_report.txt"), report)?;

    let mut plot = std::fs::File::create(inv.out.join("dispersion.gp"))?;
    writeln!(
        plot,
        "set datafile separator ','\n\
         set key autotitle columnhead\n\
         set xlabel 'k'\n\
         plot 'dispersion.csv' using 1:2 with lines title 'omega(k)', \\\n\
         \x20    'dispersion.csv' using 1:3 with lines title '|w''(k)|'"
    )?;

    println!(
        "dispersion: {} k-values, min |w'| = {min_gv:.6e} at k = {argmin:.3} -> {}",
        k_points,
        inv.out.display()
    );
    Ok(())
}
