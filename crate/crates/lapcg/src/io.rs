//! CSV formats: grids (a line holding `n`, then `n` rows of `n` values)
//! and solver traces (`iter,res2,relres,alpha,beta`).

use std::io::{Read, Write};

use lapcg_core::laplacian::Grid;
use lapcg_core::solvers::IterationTrace;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iter: usize,
    pub res2: f64,
    pub relres: f64,
    pub alpha: f64,
    pub beta: f64,
}

pub fn trace_rows(t: &IterationTrace) -> Vec<TraceRow> {
    t.records
        .iter()
        .map(|r| TraceRow {
            iter: r.iter,
            res2: r.res2,
            relres: r.relres,
            alpha: r.alpha,
            beta: r.beta,
        })
        .collect()
}

pub fn write_trace_csv<W: Write>(w: W, t: &IterationTrace) -> Result<(), CliError> {
    let mut out = csv::Writer::from_writer(w);
    // An empty trace still gets its header line.
    if t.records.is_empty() {
        out.write_record(["iter", "res2", "relres", "alpha", "beta"])?;
    }
    for row in trace_rows(t) {
        out.serialize(row)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_trace_csv<R: Read>(r: R) -> Result<Vec<TraceRow>, CliError> {
    csv::Reader::from_reader(r)
        .deserialize()
        .collect::<Result<_, _>>()
        .map_err(CliError::from)
}

pub fn write_grid_csv<W: Write>(w: W, g: &Grid<f64>) -> Result<(), CliError> {
    let mut out = csv::WriterBuilder::new().flexible(true).from_writer(w);
    out.write_record([g.n().to_string()])?;
    for row in g.data().chunks(g.n()) {
        out.write_record(row.iter().map(|v| v.to_string()))?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_grid_csv<R: Read>(r: R) -> Result<Grid<f64>, CliError> {
    let mut records = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(r)
        .into_records();
    let head = records
        .next()
        .ok_or_else(|| CliError::Format("empty grid file".into()))??;
    let n: usize = match (head.len(), head.get(0).map(str::parse)) {
        (1, Some(Ok(n))) => n,
        _ => {
            return Err(CliError::Format(
                "first line must hold the grid side n".into(),
            ))
        }
    };
    let mut data = Vec::with_capacity(n * n);
    for (i, rec) in records.enumerate() {
        let rec = rec?;
        if rec.len() != n {
            return Err(CliError::Format(format!(
                "row {i} has {} values, expected {n}",
                rec.len()
            )));
        }
        for field in rec.iter() {
            let v: f64 = field
                .parse()
                .map_err(|_| CliError::Format(format!("row {i}: `{field}` is not a number")))?;
            data.push(v);
        }
    }
    if data.len() != n * n {
        return Err(CliError::Format(format!(
            "expected {n} rows, got {}",
            data.len() / n.max(1)
        )));
    }
    Grid::from_vec(n, data, ()).map_err(|e| CliError::Format(e.to_string()))
}
