//! CSV tables, gnuplot scripts and the run manifest.

use std::fs;
use std::path::{Path, PathBuf};

use serde_json::json;

use super::config::ExperimentConfig;
use super::experiments::ExperimentOutput;
use crate::error::{Error, Result};

/// A named CSV table with a fixed column order.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str], rows: Vec<Vec<String>>) -> Self {
        debug_assert!(rows.iter().all(|r| r.len() == columns.len()));
        Self {
            name: name.to_owned(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows,
        }
    }

    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let to_err = |e: csv::Error| Error::Config(format!("csv encoding of {}: {e}", self.name));
        w.write_record(&self.columns).map_err(to_err)?;
        for row in &self.rows {
            w.write_record(row).map_err(to_err)?;
        }
        w.into_inner()
            .map_err(|e| Error::Config(format!("csv encoding of {}: {e}", self.name)))
    }
}

/// gnuplot commands for one figure.
#[derive(Debug, Clone, PartialEq)]
pub struct PlotScript {
    pub name: String,
    title: String,
    xlabel: String,
    ylabel: String,
    logy: bool,
    logx: bool,
    series: Vec<String>,
}

impl PlotScript {
    pub fn new(name: &str, title: &str, xlabel: &str, ylabel: &str, logy: bool, series: Vec<String>) -> Self {
        Self {
            name: name.to_owned(),
            title: title.to_owned(),
            xlabel: xlabel.to_owned(),
            ylabel: ylabel.to_owned(),
            logy,
            logx: false,
            series,
        }
    }

    pub fn with_logx(mut self) -> Self {
        self.logx = true;
        self
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        s.push_str("set datafile separator ','\n");
        s.push_str("set key outside right\n");
        s.push_str("set grid\n");
        s.push_str(&format!("set terminal pngcairo size 1000,700\nset output '{}.png'\n", self.name));
        s.push_str(&format!("set title '{}'\n", self.title));
        s.push_str(&format!("set xlabel '{}'\nset ylabel '{}'\n", self.xlabel, self.ylabel));
        if self.logy {
            s.push_str("set logscale y\n");
        }
        if self.logx {
            s.push_str("set logscale x\n");
        }
        s.push_str("plot \\\n  ");
        s.push_str(&self.series.join(", \\\n  "));
        s.push('\n');
        s
    }
}

fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::io(format!("writing {}", path.display()), e))
}

/// Writes every table as `<name>.csv`, every figure as `<name>.gp` and a
/// `manifest.json`; returns the written paths in that order.
pub fn emit_outputs(output: &ExperimentOutput, cfg: &ExperimentConfig, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(format!("creating {}", dir.display()), e))?;
    let mut written = Vec::new();
    for table in output.tables() {
        let path = dir.join(format!("{}.csv", table.name));
        write(&path, &table.to_csv()?)?;
        written.push(path);
    }
    for plot in output.plots() {
        let path = dir.join(format!("{}.gp", plot.name));
        write(&path, plot.render().as_bytes())?;
        written.push(path);
    }
    let files: Vec<String> = written
        .iter()
        .filter_map(|p| p.file_name().map(|f| f.to_string_lossy().into_owned()))
        .collect();
    let manifest = json!({
        "tool": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "experiment": cfg.experiment.tag(),
        "seed": cfg.seed,
        "config_sha256": cfg.hash(),
        "config": cfg,
        "files": files,
    });
    let path = dir.join("manifest.json");
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    write(&path, text.as_bytes())?;
    written.push(path);
    Ok(written)
}
