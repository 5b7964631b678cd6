use serde::Serialize;

use super::{CoherencyReport, EvalError};

/// Methods as rows, one `(L2, PCC)` column pair per guidance label.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoherencyTable {
    /// Column labels in first-seen order; `None` renders as `n/a`.
    pub cfg_labels: Vec<Option<f64>>,
    pub rows: Vec<TableRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableRow {
    pub method: String,
    /// One entry per label; `None` where the method has no report.
    pub cells: Vec<Option<Cell>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Cell {
    pub l2: f64,
    pub pcc: f64,
}

fn same_label(a: Option<f64>, b: Option<f64>) -> bool {
    match (a, b) {
        (Some(x), Some(y)) => x.to_bits() == y.to_bits(),
        (None, None) => true,
        _ => false,
    }
}

/// Groups reports by method and label. A later report for the same
/// `(label, method)` replaces an earlier one.
pub fn report_table(
    reports: &[(Option<f64>, String, CoherencyReport)],
) -> Result<CoherencyTable, EvalError> {
    if reports.is_empty() {
        return Err(EvalError::NoReports);
    }
    let mut cfg_labels: Vec<Option<f64>> = Vec::new();
    let mut methods: Vec<&str> = Vec::new();
    for (label, method, _) in reports {
        if !cfg_labels.iter().any(|l| same_label(*l, *label)) {
            cfg_labels.push(*label);
        }
        if !methods.contains(&method.as_str()) {
            methods.push(method);
        }
    }
    let mut rows: Vec<TableRow> = methods
        .iter()
        .map(|m| TableRow {
            method: m.to_string(),
            cells: vec![None; cfg_labels.len()],
        })
        .collect();
    for (label, method, report) in reports {
        let r = methods.iter().position(|m| m == method).unwrap();
        let c = cfg_labels
            .iter()
            .position(|l| same_label(*l, *label))
            .unwrap();
        rows[r].cells[c] = Some(Cell {
            l2: report.l2,
            pcc: report.pcc,
        });
    }
    Ok(CoherencyTable { cfg_labels, rows })
}

impl CoherencyTable {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("table serializes")
    }

    /// Plain-text table with values to three decimals and `-` for gaps.
    pub fn render_text(&self) -> String {
        let mut header = vec!["method".to_string()];
        let mut sub = vec![String::new()];
        for label in &self.cfg_labels {
            let name = label.map_or("n/a".to_string(), |l| l.to_string());
            header.push(name);
            header.push(String::new());
            sub.push("L2".into());
            sub.push("PCC".into());
        }
        let mut lines = vec![header, sub];
        for row in &self.rows {
            let mut line = vec![row.method.clone()];
            for cell in &row.cells {
                match cell {
                    Some(c) => {
                        line.push(format!("{:.3}", c.l2));
                        line.push(format!("{:.3}", c.pcc));
                    }
                    None => {
                        line.push("-".into());
                        line.push("-".into());
                    }
                }
            }
            lines.push(line);
        }
        let cols = lines[0].len();
        let widths: Vec<usize> = (0..cols)
            .map(|c| lines.iter().map(|l| l[c].len()).max().unwrap_or(0))
            .collect();
        let mut out = String::new();
        for line in &lines {
            let cells: Vec<String> = line
                .iter()
                .enumerate()
                .map(|(c, s)| {
                    if c == 0 {
                        format!("{s:<w$}", w = widths[c])
                    } else {
                        format!("{s:>w$}", w = widths[c])
                    }
                })
                .collect();
            out.push_str(cells.join("  ").trim_end());
            out.push('\n');
        }
        out
    }
}
