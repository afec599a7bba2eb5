//! CSV export of result rows.
//!
//! Empty cells mark quantities that do not apply to a row. Histogram cells
//! hold the fractions of users given `1..=M` streams, separated by `;`.

use std::io::Write;

use crate::runner::ResultRow;
use crate::CliError;

pub const HEADER: [&str; 25] = [
    "scenario_id",
    "scenario_hash",
    "seed",
    "experiment",
    "strategy",
    "csi",
    "scheduler",
    "snr_db",
    "rho",
    "correlation",
    "k",
    "n",
    "m",
    "trials",
    "mean_sum_rate",
    "ci95_halfwidth",
    "mean_scheduled",
    "mean_streams",
    "hist_center",
    "hist_edge",
    "bits_bd",
    "bits_zfc",
    "bit_constant",
    "psi_bd",
    "psi_zfc",
];

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn hist(v: &Option<Vec<f64>>) -> String {
    v.as_ref()
        .map(|f| f.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";"))
        .unwrap_or_default()
}

pub fn record(r: &ResultRow) -> Vec<String> {
    vec![
        r.scenario_id.clone(),
        r.scenario_hash.clone(),
        r.seed.to_string(),
        r.experiment.to_string(),
        r.strategy.clone(),
        r.csi.to_string(),
        r.scheduler.to_string(),
        opt(r.snr_db),
        r.rho.to_string(),
        r.correlation.to_string(),
        r.k.to_string(),
        r.n.to_string(),
        r.m.to_string(),
        r.trials.to_string(),
        r.mean_sum_rate.to_string(),
        opt(r.ci95_halfwidth),
        opt(r.mean_scheduled),
        opt(r.mean_streams),
        hist(&r.hist_center),
        hist(&r.hist_edge),
        opt(r.bits_bd),
        opt(r.bits_zfc),
        opt(r.bit_constant),
        opt(r.psi_bd),
        opt(r.psi_zfc),
    ]
}

pub fn write_rows<W: Write>(rows: &[ResultRow], out: W) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(HEADER)?;
    for r in rows {
        w.write_record(record(r))?;
    }
    w.flush()?;
    Ok(())
}
