//! One function per subcommand. Each returns the files it wrote; cells
//! that failed are written empty, listed in the file header, and turned
//! into a numerical error once the file is on disk.

use std::path::PathBuf;

use hotcbs::cold::{asymptotic_contrast, full_contrast, ColdParams};
use hotcbs::geometry::{geometry_map, write_map_csv, CellRatios, GridSpec, MapCell, MapParams};
use hotcbs::mc::run;
use hotcbs::sweeps::{angular_profile, peak_vs_temperature, Cell, SweepMc};
use hotcbs::vector::{gamma_b_vector, gamma_c_vector, gamma_single};
use hotcbs::{McConfig, ScalarCbsQuery};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::{cell, num, Output};

type Written = Result<Vec<PathBuf>, CliError>;

fn need<T: Clone>(v: &Option<T>, key: &str) -> Result<T, CliError> {
    RunConfig::need(v, key)
}

fn sweep_mc(c: &RunConfig) -> Result<SweepMc, CliError> {
    Ok(SweepMc {
        samples: need(&c.samples, "samples")?,
        seed: need(&c.seed, "seed")?,
        threads: need(&c.threads, "threads")?,
        chunk_size: need(&c.chunk_size, "chunk_size")?,
        estimator: need(&c.estimator, "estimator")?,
    })
}

/// Validates the transport settings against one representative point.
fn check_transport(kv: f64, detuning: f64, k_ell: f64, mc: &SweepMc) -> Result<(), CliError> {
    ScalarCbsQuery::new(0.0, kv, k_ell)?;
    let mut config = McConfig::scalar_semi_infinite(kv, detuning, k_ell);
    config.samples = mc.samples;
    config.chunk_size = mc.chunk_size;
    config.validate()?;
    Ok(())
}

fn finish(paths: Vec<PathBuf>, failures: &[String]) -> Written {
    if failures.is_empty() {
        Ok(paths)
    } else {
        Err(CliError::Numerical(format!(
            "{} cell(s) failed, see the header of {}",
            failures.len(),
            paths[0].display()
        )))
    }
}

fn record(failures: &mut Vec<String>, row: usize, column: &str, c: &Cell) {
    if let Cell::Missing(reason) = c {
        failures.push(format!("row {row} {column}: {reason}"));
    }
}

pub fn fig2(c: &RunConfig, out: &Output) -> Written {
    let grid = c.kv_grid()?;
    let spec = c.quadrature()?;
    let mc = sweep_mc(c)?;
    let (detuning, k_ell) = (need(&c.detuning, "detuning")?, need(&c.k_ell, "k_ell")?);
    check_transport(grid[0], detuning, k_ell, &mc)?;
    let rows = peak_vs_temperature(&grid, detuning, k_ell, &mc, &spec);
    let mut failures = Vec::new();
    let table: Vec<Vec<String>> = rows
        .iter()
        .enumerate()
        .map(|(i, r)| {
            record(&mut failures, i, "C0_quadrature", &r.quadrature);
            record(&mut failures, i, "C0_mc", &r.monte_carlo);
            vec![
                num(r.kv_over_gamma),
                cell(r.quadrature.value()),
                num(r.asymptote),
                cell(r.monte_carlo.value()),
                cell(r.monte_carlo.error()),
            ]
        })
        .collect();
    let columns = ["kv_over_gamma", "C0_quadrature", "C0_asymptote", "C0_mc", "C0_mc_err"];
    let paths = vec![
        out.csv("fig2.csv", &columns, &table, &failures)?,
        out.json("fig2.json", &rows)?,
    ];
    finish(paths, &failures)
}

pub fn fig3(c: &RunConfig, out: &Output) -> Written {
    let dtheta = c.dtheta_grid()?;
    let spec = c.quadrature()?;
    let mc = sweep_mc(c)?;
    let kv = need(&c.kv_over_gamma, "kv_over_gamma")?;
    let (detuning, k_ell) = (need(&c.detuning, "detuning")?, need(&c.k_ell, "k_ell")?);
    check_transport(kv, detuning, k_ell, &mc)?;
    let rows = angular_profile(&dtheta, kv, detuning, k_ell, &mc, &spec)?;
    let mut failures = Vec::new();
    let table: Vec<Vec<String>> = rows
        .iter()
        .enumerate()
        .map(|(i, r)| {
            record(&mut failures, i, "C_quadrature", &r.quadrature);
            vec![
                num(r.dtheta),
                cell(r.quadrature.value()),
                cell(r.double.value()),
                cell(r.double.error()),
                cell(r.triple.value()),
                cell(r.triple.error()),
                cell(r.triple_own.value()),
                cell(r.triple_own.error()),
            ]
        })
        .collect();
    let columns = [
        "dtheta",
        "C_quadrature",
        "C_mc_double",
        "C_mc_double_err",
        "C_mc_triple",
        "C_mc_triple_err",
        "C_mc_triple_own",
        "C_mc_triple_own_err",
    ];
    finish(vec![out.csv("fig3.csv", &columns, &table, &failures)?], &failures)
}

/// Evaluates the geometry map on the configured worker count.
fn map(c: &RunConfig) -> Result<(Vec<f64>, Vec<MapCell>), CliError> {
    let axis = c.map_axis()?;
    let spec = c.quadrature()?;
    let transition = c.transition()?;
    let channel = c.channel()?;
    let kv_over_gamma = need(&c.kv_over_gamma, "kv_over_gamma")?;
    let grid = GridSpec {
        radii: axis.clone(),
        thicknesses: axis.clone(),
    };
    let params = MapParams {
        kv_over_gamma,
        weights: &transition.weights,
        channel: &channel,
        kernel: c.kernel.unwrap_or_default(),
        spec: &spec,
    };
    let threads = need(&c.threads, "threads")?;
    let cells = if threads == 0 {
        geometry_map(&grid, &params)?
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| CliError::Validation(format!("threads: {e}")))?;
        pool.install(|| geometry_map(&grid, &params))?
    };
    Ok((axis, cells))
}

fn map_failures(cells: &[MapCell]) -> Vec<String> {
    cells
        .iter()
        .filter_map(|m| {
            m.error
                .as_ref()
                .map(|e| format!("R_over_ell={} L_over_ell={}: {e}", num(m.radius), num(m.thickness)))
        })
        .collect()
}

/// Three matrices, rows indexed by ℛ/ℓ and columns by ℒ/ℓ.
pub fn fig4(c: &RunConfig, out: &Output) -> Written {
    let (axis, cells) = map(c)?;
    let failures = map_failures(&cells);
    let mut columns = vec!["R_over_ell\\L_over_ell".to_owned()];
    columns.extend(axis.iter().map(|&l| num(l)));
    let columns: Vec<&str> = columns.iter().map(String::as_str).collect();
    type Pick = fn(&CellRatios) -> f64;
    let panels: [(&str, Pick); 3] = [
        ("fig4_gammaB_ratio.csv", |r| r.gamma_b_ratio),
        ("fig4_gammaC_ratio.csv", |r| r.gamma_c_ratio),
        ("fig4_amplification.csv", |r| r.amplification),
    ];
    let mut paths = Vec::new();
    for (name, pick) in panels {
        let table: Vec<Vec<String>> = cells
            .chunks(axis.len())
            .map(|row| {
                let mut line = vec![num(row[0].radius)];
                line.extend(row.iter().map(|m| cell(m.ratios.as_ref().map(pick))));
                line
            })
            .collect();
        paths.push(out.csv(name, &columns, &table, &failures)?);
    }
    finish(paths, &failures)
}

/// Long format: one line per (ℛ, ℒ) cell.
pub fn geometry_map_cmd(c: &RunConfig, out: &Output) -> Written {
    let (_, cells) = map(c)?;
    let failures = map_failures(&cells);
    let mut body = Vec::new();
    write_map_csv(&cells, &mut body)?;
    let body = String::from_utf8(body).expect("the map writer emits UTF-8");
    finish(vec![out.csv_raw("geometry_map.csv", &body, &failures)?], &failures)
}

pub fn cold(c: &RunConfig, out: &Output) -> Written {
    let max_order = need(&c.cold_max_order, "cold_max_order")?;
    let values = c.kv_tau_values()?;
    let params = values
        .iter()
        .map(|&x| ColdParams::with_max_order(x, max_order))
        .collect::<Result<Vec<_>, _>>()?;
    let mut failures = Vec::new();
    let table: Vec<Vec<String>> = params
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let full = full_contrast(p)
                .map_err(|e| failures.push(format!("row {i} C_full: {e}")))
                .ok();
            vec![num(p.kv_tau), cell(full), num(asymptotic_contrast(p.kv_tau))]
        })
        .collect();
    let columns = ["kv_tau", "C_full", "C_asymptote"];
    finish(vec![out.csv("cold.csv", &columns, &table, &failures)?], &failures)
}

pub fn contrast(c: &RunConfig, out: &Output) -> Written {
    let spec = c.quadrature()?;
    let transition = c.transition()?;
    let channel = c.channel()?;
    let (kv, k_ell) = (need(&c.kv_over_gamma, "kv_over_gamma")?, need(&c.k_ell, "k_ell")?);
    let angles = need(&c.dtheta, "dtheta")?;
    let queries = angles
        .iter()
        .map(|&dt| ScalarCbsQuery::new(dt, kv, k_ell))
        .collect::<Result<Vec<_>, _>>()?;
    let w = &transition.weights;
    let gamma_b = gamma_b_vector(&channel, w, &spec)?;
    let gamma_s = gamma_single(&channel, w);
    let name = need(&c.transition, "transition")?;
    let mut table = Vec::new();
    for q in &queries {
        let gamma_c = gamma_c_vector(q, &channel, w, &spec)?;
        table.push(vec![
            name.clone(),
            channel.preset.name().to_owned(),
            num(kv),
            num(q.delta_theta),
            num(gamma_c),
            num(gamma_b),
            num(gamma_s),
            num(gamma_c / gamma_b),
            num(gamma_c / (gamma_b + gamma_s)),
        ]);
    }
    let columns = [
        "transition",
        "channel",
        "kv_over_gamma",
        "dtheta",
        "gamma_C",
        "gamma_B",
        "gamma_S",
        "contrast",
        "contrast_with_single",
    ];
    Ok(vec![out.csv("contrast.csv", &columns, &table, &[])?])
}

pub fn mc(c: &RunConfig, out: &Output) -> Written {
    let kv = need(&c.kv_over_gamma, "kv_over_gamma")?;
    let mut config = McConfig::scalar_semi_infinite(kv, need(&c.detuning, "detuning")?, need(&c.k_ell, "k_ell")?);
    config.geometry = c.geometry()?;
    config.dtheta = need(&c.dtheta, "dtheta")?;
    config.max_order = need(&c.max_order, "max_order")?;
    config.samples = need(&c.samples, "samples")?;
    config.seed = need(&c.seed, "seed")?;
    config.threads = need(&c.threads, "threads")?;
    config.chunk_size = need(&c.chunk_size, "chunk_size")?;
    config.estimator = need(&c.estimator, "estimator")?;
    config.validate()?;
    let result = run(&config)?;
    Ok(vec![out.json("mc.json", &result)?])
}
