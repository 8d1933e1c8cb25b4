//! Per-step run log:
//! `step,t,dt,eta,newton_iters,residual,mass,mom1,mom2,mom3,energy,min_rho,retries,entropy_ok`.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::snapshot::fmt_f64;
use crate::stab::StepDiagnostics;

pub const RUN_LOG_HEADER: [&str; 14] = [
    "step", "t", "dt", "eta", "newton_iters", "residual", "mass", "mom1", "mom2", "mom3", "energy", "min_rho",
    "retries", "entropy_ok",
];

pub struct RunLogWriter<W: Write> {
    inner: csv::Writer<W>,
}

impl<W: Write> RunLogWriter<W> {
    pub fn new(out: W) -> Result<Self> {
        let mut inner = csv::Writer::from_writer(out);
        inner.write_record(RUN_LOG_HEADER)?;
        Ok(RunLogWriter { inner })
    }

    pub fn write(&mut self, step: usize, d: &StepDiagnostics) -> Result<()> {
        let mut rec = vec![step.to_string()];
        rec.extend([d.time, d.dt, d.eta].map(fmt_f64));
        rec.push(d.newton_iterations.to_string());
        rec.extend([d.newton_residual, d.mass, d.momentum[0], d.momentum[1], d.momentum[2], d.energy, d.min_rho].map(fmt_f64));
        rec.push(d.dt_retries.to_string());
        rec.push(d.entropy_conditions_ok.to_string());
        self.inner.write_record(&rec)?;
        Ok(())
    }

    pub fn flush(&mut self) -> Result<()> {
        self.inner.flush()?;
        Ok(())
    }
}

/// Parses a run log back into `(step, diagnostics)` rows.
pub fn read_run_log<R: Read>(input: R) -> Result<Vec<(usize, StepDiagnostics)>> {
    let mut rd = csv::Reader::from_reader(input);
    let header = rd.headers()?.clone();
    if header.iter().ne(RUN_LOG_HEADER) {
        return Err(Error::RunLog(format!("unexpected run log header: {header:?}")));
    }
    let mut rows = Vec::new();
    for rec in rd.records() {
        let rec = rec?;
        let num = |i: usize| -> Result<f64> {
            rec[i].parse().map_err(|_| Error::RunLog(format!("bad number '{}' in column {}", &rec[i], RUN_LOG_HEADER[i])))
        };
        let int = |i: usize| -> Result<usize> {
            rec[i].parse().map_err(|_| Error::RunLog(format!("bad integer '{}' in column {}", &rec[i], RUN_LOG_HEADER[i])))
        };
        let flag: bool = rec[13].parse().map_err(|_| Error::RunLog(format!("bad flag '{}'", &rec[13])))?;
        rows.push((
            int(0)?,
            StepDiagnostics {
                time: num(1)?,
                dt: num(2)?,
                eta: num(3)?,
                newton_iterations: int(4)?,
                newton_residual: num(5)?,
                mass: num(6)?,
                momentum: [num(7)?, num(8)?, num(9)?],
                energy: num(10)?,
                min_rho: num(11)?,
                entropy_conditions_ok: flag,
                dt_retries: int(12)?,
            },
        ));
    }
    Ok(rows)
}
