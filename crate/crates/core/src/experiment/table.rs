use std::fmt::Write as _;
use std::path::Path;

use crate::{Error, Result};

use super::OutputFormat;

/// Fixed CSV column order.
pub const CSV_COLUMNS: [&str; 20] = [
    "n",
    "m",
    "s",
    "p",
    "beta",
    "sweep_value",
    "variant",
    "iter_mean",
    "time_total",
    "time_algo",
    "time_factor",
    "time_eig",
    "time_qn",
    "conv_rate",
    "obj_mean",
    "kkt_mean",
    "iter_median",
    "iter_std",
    "cert_rate",
    "iters",
];

/// Columns holding wall-clock measurements.
pub const TIMING_COLUMNS: [&str; 5] = ["time_total", "time_algo", "time_factor", "time_eig", "time_qn"];

/// Aggregates of one `(problem, sweep value, variant)` cell over all seeds.
/// Times are in seconds.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub n: usize,
    pub m: usize,
    pub s: f64,
    pub p: f64,
    pub beta: f64,
    pub sweep_value: String,
    pub variant: String,
    pub iter_mean: f64,
    pub time_total: f64,
    pub time_algo: f64,
    pub time_factor: f64,
    pub time_eig: f64,
    pub time_qn: f64,
    pub conv_rate: f64,
    pub obj_mean: f64,
    pub kkt_mean: f64,
    pub iter_median: f64,
    pub iter_std: f64,
    /// Fraction of traced runs passing the Condition-1 certificate.
    pub cert_rate: Option<f64>,
    /// Per-seed iteration counts, in seed order.
    pub iters: Vec<usize>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ResultTable {
    pub rows: Vec<ResultRow>,
    /// One diagnostic per aborted problem row.
    pub failures: Vec<String>,
}

impl ResultTable {
    pub fn find(&self, variant: &str, sweep_value: &str) -> impl Iterator<Item = &ResultRow> {
        let (variant, sweep_value) = (variant.to_string(), sweep_value.to_string());
        self.rows
            .iter()
            .filter(move |r| r.variant == variant && r.sweep_value == sweep_value)
    }
}

fn csv_line(r: &ResultRow) -> String {
    let iters: Vec<String> = r.iters.iter().map(ToString::to_string).collect();
    let fields = [
        r.n.to_string(),
        r.m.to_string(),
        r.s.to_string(),
        r.p.to_string(),
        r.beta.to_string(),
        r.sweep_value.clone(),
        r.variant.clone(),
        r.iter_mean.to_string(),
        r.time_total.to_string(),
        r.time_algo.to_string(),
        r.time_factor.to_string(),
        r.time_eig.to_string(),
        r.time_qn.to_string(),
        r.conv_rate.to_string(),
        r.obj_mean.to_string(),
        r.kkt_mean.to_string(),
        r.iter_median.to_string(),
        r.iter_std.to_string(),
        r.cert_rate.map_or_else(|| "-".to_string(), |c| c.to_string()),
        iters.join(";"),
    ];
    fields.join(",")
}

/// CSV text: header row, then one line per table row. Floats use the
/// shortest representation that parses back to the same value.
pub fn write_csv(table: &ResultTable) -> String {
    let mut out = CSV_COLUMNS.join(",");
    out.push('\n');
    for r in &table.rows {
        out.push_str(&csv_line(r));
        out.push('\n');
    }
    out
}

pub fn parse_csv(text: &str) -> Result<ResultTable> {
    let origin = Path::new("<csv>");
    let perr = |line: usize, msg: String| Error::Parse {
        path: origin.to_path_buf(),
        line,
        msg,
    };
    let mut lines = text.lines().enumerate();
    let header = lines.next().map(|(_, h)| h).unwrap_or_default();
    if header != CSV_COLUMNS.join(",") {
        return Err(perr(1, format!("unexpected header '{header}'")));
    }
    let mut table = ResultTable::default();
    for (i, line) in lines {
        if line.is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != CSV_COLUMNS.len() {
            return Err(perr(i + 1, format!("expected {} fields, got {}", CSV_COLUMNS.len(), f.len())));
        }
        let num = |j: usize| -> Result<f64> {
            f[j].parse()
                .map_err(|_| perr(i + 1, format!("bad {} '{}'", CSV_COLUMNS[j], f[j])))
        };
        let int = |j: usize| -> Result<usize> {
            f[j].parse()
                .map_err(|_| perr(i + 1, format!("bad {} '{}'", CSV_COLUMNS[j], f[j])))
        };
        let iters = if f[19].is_empty() {
            Vec::new()
        } else {
            f[19]
                .split(';')
                .map(|s| s.parse().map_err(|_| perr(i + 1, format!("bad iteration count '{s}'"))))
                .collect::<Result<_>>()?
        };
        table.rows.push(ResultRow {
            n: int(0)?,
            m: int(1)?,
            s: num(2)?,
            p: num(3)?,
            beta: num(4)?,
            sweep_value: f[5].to_string(),
            variant: f[6].to_string(),
            iter_mean: num(7)?,
            time_total: num(8)?,
            time_algo: num(9)?,
            time_factor: num(10)?,
            time_eig: num(11)?,
            time_qn: num(12)?,
            conv_rate: num(13)?,
            obj_mean: num(14)?,
            kkt_mean: num(15)?,
            iter_median: num(16)?,
            iter_std: num(17)?,
            cert_rate: if f[18] == "-" { None } else { Some(num(18)?) },
            iters,
        });
    }
    Ok(table)
}

/// Markdown with one line per `(problem, sweep value)` and the variants as
/// column groups of `Iter.`, `Time`, `T-A`, `T-S` (setup: factorization plus
/// eigenvalue estimation).
pub fn write_markdown(table: &ResultTable) -> String {
    const GROUP: [&str; 4] = ["Iter.", "Time", "T-A", "T-S"];
    let mut variants: Vec<&str> = Vec::new();
    let mut keys: Vec<(usize, usize, String, String, String, String)> = Vec::new();
    for r in &table.rows {
        if !variants.contains(&r.variant.as_str()) {
            variants.push(&r.variant);
        }
    }
    for r in &table.rows {
        let key = (r.n, r.m, r.s.to_string(), r.p.to_string(), r.beta.to_string(), r.sweep_value.clone());
        if !keys.contains(&key) {
            keys.push(key);
        }
    }

    let mut out = String::new();
    let mut header = vec!["(n, m, s, p, β, sweep)".to_string()];
    for v in &variants {
        header.extend(GROUP.iter().map(|g| format!("{v} {g}")));
    }
    let _ = writeln!(out, "| {} |", header.join(" | "));
    let _ = writeln!(out, "|{}", "---|".repeat(header.len()));
    for key in &keys {
        let mut cells = vec![format!("({}, {}, {}, {}, {}, {})", key.0, key.1, key.2, key.3, key.4, key.5)];
        for v in &variants {
            let hit = table.rows.iter().find(|r| {
                r.variant == *v
                    && (r.n, r.m, r.s.to_string(), r.p.to_string(), r.beta.to_string()) == (key.0, key.1, key.2.clone(), key.3.clone(), key.4.clone())
                    && (r.sweep_value == key.5 || r.sweep_value == "-")
            });
            match hit {
                Some(r) => cells.extend([
                    format!("{:.1}", r.iter_mean),
                    format!("{:.3}", r.time_total),
                    format!("{:.3}", r.time_algo),
                    format!("{:.3}", r.time_factor + r.time_eig),
                ]),
                None => cells.extend(std::iter::repeat_n("-".to_string(), GROUP.len())),
            }
        }
        let _ = writeln!(out, "| {} |", cells.join(" | "));
    }
    out
}

/// Writes the table to `path` in the requested format.
pub fn emit_table(table: &ResultTable, format: OutputFormat, path: &Path) -> Result<()> {
    let text = match format {
        OutputFormat::Csv => write_csv(table),
        OutputFormat::Markdown => write_markdown(table),
    };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// CSV with the timing columns blanked, for byte comparisons across runs.
pub fn strip_timing(csv: &str) -> String {
    let idx: Vec<usize> = CSV_COLUMNS
        .iter()
        .enumerate()
        .filter(|(_, c)| TIMING_COLUMNS.contains(c))
        .map(|(i, _)| i)
        .collect();
    let mut out = String::new();
    for (i, line) in csv.lines().enumerate() {
        if i == 0 {
            out.push_str(line);
        } else {
            let f: Vec<&str> = line
                .split(',')
                .enumerate()
                .map(|(j, v)| if idx.contains(&j) { "" } else { v })
                .collect();
            out.push_str(&f.join(","));
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(variant: &str, sweep: &str, n: usize) -> ResultRow {
        ResultRow {
            n,
            m: n / 2,
            s: 0.1,
            p: 0.5,
            beta: 10.0,
            sweep_value: sweep.into(),
            variant: variant.into(),
            iter_mean: 12.5,
            time_total: 0.1 + 0.2,
            time_algo: 1e-7,
            time_factor: 0.0,
            time_eig: 3.25e-3,
            time_qn: 0.0,
            conv_rate: 1.0,
            obj_mean: 123.456_789_012_345_68,
            kkt_mean: 1.0 / 3.0,
            iter_median: 12.0,
            iter_std: 0.5,
            cert_rate: if variant == "A" { Some(0.5) } else { None },
            iters: vec![12, 13],
        }
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let table = ResultTable {
            rows: vec![row("A", "-", 20), row("B", "0.5:100", 20)],
            failures: vec![],
        };
        let csv = write_csv(&table);
        assert_eq!(parse_csv(&csv).unwrap(), table);
        assert!(csv.lines().nth(1).unwrap().contains(",-,A,"));
    }

    #[test]
    fn markdown_shape() {
        let mut rows = Vec::new();
        for n in [10, 20, 30] {
            for v in ["A", "B", "C", "D"] {
                rows.push(row(v, "-", n));
            }
        }
        let md = write_markdown(&ResultTable { rows, failures: vec![] });
        let lines: Vec<&str> = md.lines().collect();
        assert_eq!(lines.len(), 2 + 3);
        let header_cells = lines[0].trim_matches('|').split('|').count();
        assert_eq!(header_cells, 1 + 4 * 4);
    }

    #[test]
    fn timing_columns_are_blanked() {
        let a = write_csv(&ResultTable {
            rows: vec![row("A", "-", 20)],
            failures: vec![],
        });
        let mut r = row("A", "-", 20);
        r.time_total = 99.0;
        let b = write_csv(&ResultTable {
            rows: vec![r],
            failures: vec![],
        });
        assert_ne!(a, b);
        assert_eq!(strip_timing(&a), strip_timing(&b));
    }
}
