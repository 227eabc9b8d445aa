//! Plain-text artifacts: CSV tables and matrices with a `#` header block,
//! JSON documents with the same header, and gnuplot sidecar scripts.
//!
//! Numbers are written in Rust's shortest round-trip form, so identical
//! inputs give identical bytes.

use std::io::Write;

use serde::Serialize;

use crate::control::PhaseSpaceGrid;
use crate::design::FixedChiPoint;
use crate::dressed::FluxSweepResult;
use crate::error::{invalid, Result};
use crate::scalar::{to_f64, Real};

/// Unit conventions written into every artifact.
pub const UNITS: &str = "frequency GHz (linear, H/h), time ns, loss rates 1/us, flux Phi0";

/// Ordered key/value metadata written ahead of the data.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Header {
    pub entries: Vec<(String, String)>,
}

impl Header {
    pub fn new(tool_version: &str, config_hash: &str, seed: u64) -> Self {
        Self::default()
            .with("tool", tool_version)
            .with("config_sha256", config_hash)
            .with("seed", &seed.to_string())
            .with("units", UNITS)
    }

    pub fn with(mut self, key: &str, value: &str) -> Self {
        self.entries.push((key.to_string(), value.to_string()));
        self
    }

    /// `# key: value` lines.
    pub fn comment_block(&self) -> String {
        self.entries.iter().map(|(k, v)| format!("# {k}: {v}\n")).collect()
    }

    fn json(&self) -> serde_json::Map<String, serde_json::Value> {
        self.entries.iter().map(|(k, v)| (k.clone(), serde_json::Value::String(v.clone()))).collect()
    }
}

/// Formats a number the way every artifact does.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else {
        format!("{x}")
    }
}

/// Column-oriented numeric table.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new<S: AsRef<str>>(columns: &[S]) -> Self {
        Self { columns: columns.iter().map(|c| c.as_ref().to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) -> Result<()> {
        if row.len() != self.columns.len() {
            return Err(invalid("row", format!("{} values for {} columns", row.len(), self.columns.len())));
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn write_csv<W: Write>(&self, header: &Header, mut w: W) -> Result<()> {
        w.write_all(header.comment_block().as_bytes())?;
        let mut out = csv::Writer::from_writer(w);
        out.write_record(&self.columns)?;
        for r in &self.rows {
            out.write_record(r.iter().map(|x| num(*x)))?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self, header: &Header) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(header, &mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }
}

/// Phase-space grid as a matrix: the first row holds `Re β`, the first
/// column `Im β`.
pub fn grid_csv<T: Real>(grid: &PhaseSpaceGrid<T>, header: &Header) -> Result<String> {
    let mut buf = Vec::new();
    buf.extend_from_slice(header.comment_block().as_bytes());
    {
        let mut out = csv::Writer::from_writer(&mut buf);
        let mut first = vec!["im\\re".to_string()];
        first.extend(grid.re_axis().iter().map(|x| num(to_f64(*x))));
        out.write_record(&first)?;
        for (im, row) in grid.im_axis().iter().zip(&grid.values) {
            let mut rec = vec![num(to_f64(*im))];
            rec.extend(row.iter().map(|v| num(to_f64(*v))));
            out.write_record(&rec)?;
        }
        out.flush()?;
    }
    Ok(String::from_utf8(buf).expect("csv output is utf-8"))
}

/// Matrix indexed by two labelled axes; `values[i][j]` sits at
/// `rows[i]`, `cols[j]`.
pub fn matrix_csv(corner: &str, rows: &[f64], cols: &[f64], values: &[Vec<f64>], header: &Header) -> Result<String> {
    if values.len() != rows.len() || values.iter().any(|r| r.len() != cols.len()) {
        return Err(invalid("values", "matrix shape does not match the axes"));
    }
    let mut buf = Vec::new();
    buf.extend_from_slice(header.comment_block().as_bytes());
    {
        let mut out = csv::Writer::from_writer(&mut buf);
        let mut first = vec![corner.to_string()];
        first.extend(cols.iter().map(|x| num(*x)));
        out.write_record(&first)?;
        for (r, row) in rows.iter().zip(values) {
            let mut rec = vec![num(*r)];
            rec.extend(row.iter().map(|v| num(*v)));
            out.write_record(&rec)?;
        }
        out.flush()?;
    }
    Ok(String::from_utf8(buf).expect("csv output is utf-8"))
}

/// `{"header": {...}, "data": ...}`, pretty-printed with a trailing newline.
pub fn json_document<S: Serialize>(header: &Header, data: &S) -> Result<String> {
    let doc = serde_json::json!({ "header": header.json(), "data": data });
    let mut s = serde_json::to_string_pretty(&doc)?;
    s.push('\n');
    Ok(s)
}

/// gnuplot script plotting columns `ys` against `x` from a CSV artifact.
pub fn gnuplot_series(csv_file: &str, table: &Table, x: &str, ys: &[&str]) -> Result<String> {
    let idx = |name: &str| {
        table.columns.iter().position(|c| c == name).map(|i| i + 1).ok_or_else(|| invalid("column", format!("no column `{name}`")))
    };
    let xi = idx(x)?;
    let mut plots = Vec::new();
    for y in ys {
        plots.push(format!("'{csv_file}' using {xi}:{} with linespoints title '{y}'", idx(y)?));
    }
    Ok(format!(
        "set datafile separator ','\nset datafile commentschars '#'\nset key autotitle columnhead\nset xlabel '{x}'\nplot {}\n",
        plots.join(", \\\n     ")
    ))
}

/// gnuplot script drawing a matrix CSV (as written by [`grid_csv`] or
/// [`matrix_csv`]) as a heat map.
pub fn gnuplot_matrix(csv_file: &str, xlabel: &str, ylabel: &str) -> String {
    format!(
        "set datafile separator ','\nset datafile commentschars '#'\nset xlabel '{xlabel}'\nset ylabel '{ylabel}'\nset view map\n\
         plot '{csv_file}' matrix nonuniform with image notitle\n"
    )
}

/// One row per flux point: flux, Ω, ω, χ, K, K₃…K_p, overlap, and the
/// doubled-truncation changes of χ and K (nan when not computed).
pub fn flux_sweep_table<T: Real>(sweep: &FluxSweepResult<T>) -> Table {
    let max_p = sweep.points.first().map(|p| p.params.kerr_higher.len() + 1).unwrap_or(2);
    let mut cols: Vec<String> = ["flux_phi0", "omega_qubit_ghz", "omega_storage_ghz", "chi_ghz", "kerr_ghz"].map(String::from).to_vec();
    cols.extend((3..=max_p).map(|p| format!("k{p}_ghz")));
    cols.extend(["overlap", "conv_chi_ghz", "conv_kerr_ghz"].map(String::from));
    let mut t = Table::new(&cols);
    for p in &sweep.points {
        let e = &p.params;
        let mut row = vec![to_f64(p.flux), to_f64(e.omega_qubit), to_f64(e.omega_storage), to_f64(e.chi), to_f64(e.kerr)];
        row.extend(e.kerr_higher.iter().skip(1).map(|(_, k)| to_f64(*k)));
        row.push(to_f64(e.hybridization_overlap));
        let (dc, dk) = p.convergence.map(|(a, b)| (to_f64(a), to_f64(b))).unwrap_or((f64::NAN, f64::NAN));
        row.extend([dc, dk]);
        t.push(row).expect("row width matches header");
    }
    t
}

/// Bare-cavity qubit transitions `|g⟩ → |e⟩, |f⟩, |h⟩` per flux point.
pub fn spectrum_table<T: Real>(sweep: &FluxSweepResult<T>) -> Table {
    let mut t = Table::new(&["flux_phi0", "f_ge_ghz", "f_gf_ghz", "f_gh_ghz"]);
    for p in &sweep.points {
        let mut row = vec![to_f64(p.flux)];
        row.extend((0..3).map(|k| p.transitions.get(k).map(|x| to_f64(*x)).unwrap_or(f64::NAN)));
        t.push(row).expect("row width matches header");
    }
    t
}

/// Fixed-χ sweep rows; failed points carry `nan`.
pub fn fixed_chi_table<T: Real>(points: &[FixedChiPoint<T>]) -> Table {
    let mut t = Table::new(&["delta_ghz", "g_ghz", "chi_ghz", "kerr_ghz", "overlap", "k3_ghz", "k4_ghz", "k5_ghz"]);
    for p in points {
        let k = |q: usize| p.kerr_higher.iter().find(|(x, _)| *x == q).map(|(_, v)| to_f64(*v)).unwrap_or(f64::NAN);
        t.push(vec![
            to_f64(p.delta),
            p.g.map(to_f64).unwrap_or(f64::NAN),
            to_f64(p.chi),
            to_f64(p.kerr),
            to_f64(p.overlap),
            k(3),
            k(4),
            k(5),
        ])
        .expect("row width matches header");
    }
    t
}
