use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

use super::config::{Format, Method};
use super::run::ResultRow;

pub const CSV_HEADER: &str = "method,n,m,s,eps,L_used,grad_f_calls,grad_gk_calls,wall_time_s,final_gap,converged,seed";

pub fn rows_to_csv(rows: &[ResultRow]) -> Result<String> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .quote_style(csv::QuoteStyle::Necessary)
        .from_writer(Vec::new());
    if rows.is_empty() {
        w.write_record(CSV_HEADER.split(','))?;
    }
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn rows_to_json(rows: &[ResultRow]) -> Result<String> {
    let mut s = serde_json::to_string_pretty(rows)?;
    s.push('\n');
    Ok(s)
}

pub fn rows_from_csv(text: &str) -> Result<Vec<ResultRow>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let mut out = Vec::new();
    for rec in r.deserialize() {
        out.push(rec?);
    }
    Ok(out)
}

pub fn rows_from_json(text: &str) -> Result<Vec<ResultRow>> {
    Ok(serde_json::from_str(text)?)
}

/// Writes `rows` to `path`.
pub fn emit_results(rows: &[ResultRow], format: Format, path: &Path) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::InvalidParameter("no rows to emit".into()));
    }
    let text = match format {
        Format::Csv => rows_to_csv(rows)?,
        Format::Json => rows_to_json(rows)?,
    };
    write_file(path, text.as_bytes())
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut f = fs::File::create(path)?;
    f.write_all(bytes)?;
    Ok(())
}

/// Writes one whitespace-separated data file per method plus a gnuplot
/// script plotting gradient counts against `m` on log-log axes.
pub fn write_plot_data(rows: &[ResultRow], dir: &Path) -> Result<Vec<String>> {
    if rows.is_empty() {
        return Err(Error::InvalidParameter("no rows to plot".into()));
    }
    fs::create_dir_all(dir)?;
    let mut methods: Vec<Method> = rows.iter().map(|r| r.method).collect();
    methods.sort_by_key(|m| m.as_str());
    methods.dedup();
    let mut files = Vec::new();
    for method in &methods {
        let mut sel: Vec<&ResultRow> = rows.iter().filter(|r| r.method == *method).collect();
        sel.sort_by(|a, b| a.m.cmp(&b.m).then(a.n.cmp(&b.n)).then(a.seed.cmp(&b.seed)));
        let mut text = String::from("# m n s eps grad_f_calls grad_gk_calls final_gap seed\n");
        for r in sel {
            text.push_str(&format!(
                "{} {} {} {:e} {} {} {:e} {}\n",
                r.m, r.n, r.s, r.eps, r.grad_f_calls, r.grad_gk_calls, r.final_gap, r.seed
            ));
        }
        let name = format!("{}.dat", method.as_str().to_lowercase());
        write_file(&dir.join(&name), text.as_bytes())?;
        files.push(name);
    }
    let mut script = String::from(
        "set logscale xy\nset xlabel 'm'\nset ylabel 'oracle calls'\nset key left top\nplot \\\n",
    );
    let parts: Vec<String> = files
        .iter()
        .flat_map(|f| {
            let stem = f.trim_end_matches(".dat");
            [
                format!("  '{f}' using 1:6 with points title '{stem} grad_gk'"),
                format!("  '{f}' using 1:5 with points title '{stem} grad_f'"),
            ]
        })
        .collect();
    script.push_str(&parts.join(", \\\n"));
    script.push('\n');
    write_file(&dir.join("plot.gp"), script.as_bytes())?;
    files.push("plot.gp".into());
    Ok(files)
}
