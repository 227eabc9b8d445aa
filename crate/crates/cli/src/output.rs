//! Artifact writer. Everything it writes is a pure function of the config
//! and seed; the wall-clock time only goes into `run.log`.

use std::fs;
use std::path::PathBuf;
use std::time::{SystemTime, UNIX_EPOCH};

use fluxqed::export::{gnuplot_matrix, gnuplot_series, json_document, Header, Table};
use serde::Serialize;

use crate::CliError;

pub struct Output {
    pub dir: PathBuf,
    pub header: Header,
    pub emit_plots: bool,
    written: Vec<String>,
}

impl Output {
    pub fn new(dir: PathBuf, header: Header, emit_plots: bool) -> Result<Self, CliError> {
        fs::create_dir_all(&dir).map_err(|e| CliError::Config(format!("out {}: {e}", dir.display())))?;
        Ok(Self { dir, header, emit_plots, written: Vec::new() })
    }

    pub fn text(&mut self, name: &str, body: &str) -> Result<(), CliError> {
        fs::write(self.dir.join(name), body)?;
        self.written.push(name.to_string());
        Ok(())
    }

    pub fn table(&mut self, name: &str, t: &Table) -> Result<(), CliError> {
        let s = t.to_csv_string(&self.header)?;
        self.text(name, &s)
    }

    pub fn json<S: Serialize>(&mut self, name: &str, data: &S) -> Result<(), CliError> {
        let s = json_document(&self.header, data)?;
        self.text(name, &s)
    }

    pub fn series_plot(&mut self, csv: &str, t: &Table, x: &str, ys: &[&str]) -> Result<(), CliError> {
        if self.emit_plots {
            let s = gnuplot_series(csv, t, x, ys)?;
            self.text(&plot_name(csv), &s)?;
        }
        Ok(())
    }

    pub fn matrix_plot(&mut self, csv: &str, xlabel: &str, ylabel: &str) -> Result<(), CliError> {
        if self.emit_plots {
            self.text(&plot_name(csv), &gnuplot_matrix(csv, xlabel, ylabel))?;
        }
        Ok(())
    }

    pub fn finish(self, command: &str, status: &str) -> Result<(), CliError> {
        let t = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        let mut log = format!("unix_time: {t}\ncommand: {command}\nstatus: {status}\n");
        log.push_str(&self.header.comment_block());
        for f in &self.written {
            log.push_str(&format!("wrote: {f}\n"));
        }
        fs::write(self.dir.join("run.log"), log)?;
        Ok(())
    }
}

fn plot_name(csv: &str) -> String {
    format!("{}.gp", csv.trim_end_matches(".csv"))
}
