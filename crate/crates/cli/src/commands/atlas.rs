//! `atlas`: region grids, the gamma boundary curve, and the band tables
//! behind the parameter-space figures, as CSVs plus gnuplot scripts.

use super::{create_run_dir, g17, write_manifest, CmdError, Invocation};
use abcdlab::atlas::{
    admissible_nu_interval, alpha_beta_bands, dispersive_nu_interval, from_nu_b, gamma_boundary,
    is_dispersion_like, normalize, NuB,
};
use rayon::prelude::*;
use std::io::Write;

struct AtlasGrid {
    nu_points: usize,
    b_points: usize,
    b_min: f64,
    b_max: f64,
    gamma_samples: usize,
}

impl AtlasGrid {
    fn b_values(&self) -> Vec<f64> {
        let step = (self.b_max - self.b_min) / self.b_points as f64;
        (0..self.b_points).map(|i| self.b_min + (i + 1) as f64 * step).collect()
    }

    fn nu_values(&self) -> Vec<f64> {
        if self.nu_points == 1 {
            return vec![0.0];
        }
        (0..self.nu_points)
            .map(|j| j as f64 / (self.nu_points - 1) as f64)
            .collect()
    }
}

pub fn run(inv: &Invocation) -> Result<(), CmdError> {
    let cfg = &inv.config;
    let grid = AtlasGrid {
        nu_points: cfg.get_usize("atlas", "nu_points")?.unwrap_or(200),
        b_points: cfg.get_usize("atlas", "b_points")?.unwrap_or(200),
        b_min: cfg.get_f64("atlas", "b_min")?.unwrap_or(1.0 / 6.0),
        b_max: cfg.get_f64("atlas", "b_max")?.unwrap_or(1.0),
        gamma_samples: cfg.get_usize("atlas", "gamma_samples")?.unwrap_or(64),
    };
    if grid.nu_points == 0 || grid.b_points == 0 {
        return Err(CmdError::Config("atlas grid must have at least one point per axis".into()));
    }
    if !(grid.b_min <= grid.b_max) {
        return Err(CmdError::Config("atlas: b_min must not exceed b_max".into()));
    }
    cfg.finish()?;

    create_run_dir(&inv.out)?;
    write_manifest(
        inv,
        "atlas",
        &[
            ("nu_points".into(), grid.nu_points.to_string()),
            ("b_points".into(), grid.b_points.to_string()),
            ("b_min".into(), grid.b_min.to_string()),
            ("b_max".into(), grid.b_max.to_string()),
            ("gamma_samples".into(), grid.gamma_samples.to_string()),
        ],
    )?;

    // rows only exist where the chart does (b > 1/6); a request entirely at
    // or below 1/6 yields header-only files
    let b_values: Vec<f64> = grid.b_values().into_iter().filter(|&b| b > 1.0 / 6.0).collect();
    let nu_values = grid.nu_values();

    let region_rows: Vec<String> = b_values
        .par_iter()
        .map(|&b| {
            let mut chunk = String::new();
            for &nu in &nu_values {
                let p = from_nu_b(NuB { nu, b });
                let admissible = admissible_nu_interval(b).contains(nu);
                let dispersion_like = admissible
                    && normalize(&p).map(|n| is_dispersion_like(&n)).unwrap_or(false);
                chunk.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    g17(nu),
                    g17(b),
                    g17(p.a),
                    g17(p.c),
                    admissible as u8,
                    dispersion_like as u8
                ));
            }
            chunk
        })
        .collect();
    let mut region = String::from("nu,b,a,c,admissible,dispersion_like\n");
    region.extend(region_rows);
    std::fs::write(inv.out.join("region.csv"), region)?;

    let mut islice = String::from("b,adm_lo,adm_hi,disp_lo,disp_hi\n");
    for &b in &b_values {
        let adm = admissible_nu_interval(b);
        let disp = dispersive_nu_interval(b);
        let pair = |i: &abcdlab::atlas::Interval| {
            if i.is_empty() {
                (f64::NAN, f64::NAN)
            } else {
                (i.lo, i.hi)
            }
        };
        let (alo, ahi) = pair(&adm);
        let (dlo, dhi) = pair(&disp);
        islice.push_str(&format!(
            "{},{},{},{},{}\n",
            g17(b),
            g17(alo),
            g17(ahi),
            g17(dlo),
            g17(dhi)
        ));
    }
    std::fs::write(inv.out.join("islice.csv"), islice)?;

    let mut gamma = String::from("b,a,c\n");
    for &b in &b_values {
        let a_lo = -b - 1.0 / 6.0;
        for s in 0..grid.gamma_samples {
            let a = if grid.gamma_samples == 1 {
                a_lo
            } else {
                a_lo + s as f64 * (0.0 - a_lo) / (grid.gamma_samples - 1) as f64
            };
            match gamma_boundary(b, a) {
                Ok(c) => gamma.push_str(&format!("{},{},{}\n", g17(b), g17(a), g17(c))),
                Err(_) => continue,
            }
        }
    }
    std::fs::write(inv.out.join("gamma.csv"), gamma)?;

    let band_rows: Vec<String> = b_values
        .par_iter()
        .map(|&b| {
            let mut chunk = String::new();
            for &nu in &nu_values {
                if !admissible_nu_interval(b).contains(nu) {
                    continue;
                }
                let n = match normalize(&from_nu_b(NuB { nu, b })) {
                    Ok(n) => n,
                    Err(_) => continue,
                };
                let (a2, a3, a4) = alpha_beta_bands(&n);
                let i = a2.intersect(&a3).intersect(&a4);
                chunk.push_str(&format!(
                    "{},{},{},{},{},{},{},{}\n",
                    g17(n.a),
                    g17(n.c),
                    g17(a2.lower),
                    g17(a2.upper),
                    g17(a3.lower),
                    g17(a3.upper),
                    g17(i.lower),
                    g17(i.upper)
                ));
            }
            chunk
        })
        .collect();
    let mut bands =
        String::from("a,c,A2_lo,A2_hi,A3_lo,A3_hi,intersect_lo,intersect_hi\n");
    bands.extend(band_rows);
    std::fs::write(inv.out.join("bands.csv"), bands)?;

    write_plot_scripts(inv)?;
    println!(
        "atlas: {} b-values x {} nu-values -> {}",
        b_values.len(),
        nu_values.len(),
        inv.out.display()
    );
    Ok(())
}

fn write_plot_scripts(inv: &Invocation) -> Result<(), CmdError> {
    let mut region = std::fs::File::create(inv.out.join("region.gp"))?;
    writeln!(
        region,
        "set datafile separator ','\n\
         set key autotitle columnhead\n\
         set xlabel 'nu'\n\
         set ylabel 'b'\n\
         set title 'admissible chart and dispersion-like region'\n\
         plot 'region.csv' using ($5==1 && $6==0 ? $1 : 1/0):2 with points pt 5 ps 0.4 lc rgb 'gray' title 'admissible', \\\n\
         \x20    'region.csv' using ($6==1 ? $1 : 1/0):2 with points pt 5 ps 0.4 lc rgb 'dark-blue' title 'dispersion-like'"
    )?;
    let mut bands = std::fs::File::create(inv.out.join("bands.gp"))?;
    writeln!(
        bands,
        "set datafile separator ','\n\
         set key autotitle columnhead\n\
         set xlabel 'a'\n\
         set ylabel 'band offset'\n\
         set title 'offset bands and their intersection'\n\
         plot 'bands.csv' using 1:3 with points ps 0.2 title 'A2 lo', \\\n\
         \x20    'bands.csv' using 1:4 with points ps 0.2 title 'A2 hi', \\\n\
         \x20    'bands.csv' using 1:7 with points ps 0.2 title 'intersect lo', \\\n\
         \x20    'bands.csv' using 1:8 with points ps 0.2 title 'intersect hi'"
    )?;
    Ok(())
}
