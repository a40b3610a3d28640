//! Small rectangular tables rendered as CSV and as aligned text.

use std::fmt::Write as _;

pub const MISSING: &str = "NA";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Entry {
    pub value: f64,
    pub std: Option<f64>,
}

impl Entry {
    pub fn value(value: f64) -> Self {
        Entry { value, std: None }
    }

    pub fn with_std(value: f64, std: f64) -> Self {
        Entry { value, std: Some(std) }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub label: String,
    pub cells: Vec<Option<Entry>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub title: String,
    pub corner: String,
    pub columns: Vec<String>,
    pub rows: Vec<Row>,
    /// Print an explicit `+` on positive values.
    pub signed: bool,
    /// Decimals in the text rendering; CSV always uses six.
    pub decimals: usize,
}

impl Table {
    pub fn new(title: impl Into<String>, corner: impl Into<String>, columns: Vec<String>) -> Self {
        Table { title: title.into(), corner: corner.into(), columns, rows: Vec::new(), signed: false, decimals: 2 }
    }

    pub fn push_row(&mut self, label: impl Into<String>, cells: Vec<Option<Entry>>) {
        assert_eq!(cells.len(), self.columns.len(), "row width");
        self.rows.push(Row { label: label.into(), cells });
    }

    pub fn missing_cells(&self) -> usize {
        self.rows.iter().map(|r| r.cells.iter().filter(|c| c.is_none()).count()).sum()
    }

    fn has_std(&self) -> bool {
        self.rows.iter().flat_map(|r| &r.cells).any(|c| matches!(c, Some(Entry { std: Some(_), .. })))
    }

    /// Each column other than `base` minus column `base`, row by row. Stds
    /// are dropped.
    pub fn delta_vs(&self, base: usize, title: impl Into<String>) -> Table {
        let keep: Vec<usize> = (0..self.columns.len()).filter(|&c| c != base).collect();
        let columns = keep.iter().map(|&c| format!("{} - {}", self.columns[c], self.columns[base])).collect();
        let mut out = Table::new(title, self.corner.clone(), columns);
        out.signed = true;
        out.decimals = self.decimals;
        for row in &self.rows {
            let cells = keep
                .iter()
                .map(|&c| match (row.cells[c], row.cells[base]) {
                    (Some(a), Some(b)) => Some(Entry::value(a.value - b.value)),
                    _ => None,
                })
                .collect();
            out.push_row(row.label.clone(), cells);
        }
        out
    }

    fn number(&self, x: f64, decimals: usize) -> String {
        let x = if x == 0.0 { 0.0 } else { x };
        if self.signed && x > 0.0 {
            format!("+{x:.decimals$}")
        } else {
            format!("{x:.decimals$}")
        }
    }

    pub fn to_csv(&self) -> String {
        let with_std = self.has_std();
        let mut header = vec![slug(&self.corner)];
        for c in &self.columns {
            header.push(slug(c));
            if with_std {
                header.push(format!("{}_std", slug(c)));
            }
        }
        let mut out = header.join(",");
        out.push('\n');
        for row in &self.rows {
            let mut fields = vec![row.label.clone()];
            for cell in &row.cells {
                match cell {
                    Some(e) => {
                        fields.push(self.number(e.value, 6));
                        if with_std {
                            fields.push(e.std.map_or_else(|| MISSING.to_string(), |s| format!("{s:.6}")));
                        }
                    }
                    None => {
                        fields.push(MISSING.into());
                        if with_std {
                            fields.push(MISSING.into());
                        }
                    }
                }
            }
            out.push_str(&fields.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_text(&self) -> String {
        let render = |cell: &Option<Entry>| match cell {
            Some(Entry { value, std: Some(s) }) => format!("{} ± {s:.prec$}", self.number(*value, self.decimals), prec = self.decimals),
            Some(Entry { value, std: None }) => self.number(*value, self.decimals),
            None => MISSING.to_string(),
        };
        let body: Vec<Vec<String>> = self.rows.iter().map(|r| r.cells.iter().map(render).collect()).collect();
        let label_w = self.rows.iter().map(|r| r.label.chars().count()).chain([self.corner.chars().count()]).max().unwrap_or(0);
        let widths: Vec<usize> =
            (0..self.columns.len()).map(|c| body.iter().map(|r| r[c].chars().count()).chain([self.columns[c].chars().count()]).max().unwrap_or(0)).collect();

        let mut out = String::new();
        writeln!(out, "{}", self.title).unwrap();
        let mut line = format!("{:<label_w$}", self.corner);
        for (c, w) in self.columns.iter().zip(&widths) {
            write!(line, "  {c:>w$}").unwrap();
        }
        writeln!(out, "{line}").unwrap();
        writeln!(out, "{}", "-".repeat(line.chars().count())).unwrap();
        for (row, cells) in self.rows.iter().zip(&body) {
            let mut line = format!("{:<label_w$}", row.label);
            for (cell, w) in cells.iter().zip(&widths) {
                write!(line, "  {cell:>w$}").unwrap();
            }
            writeln!(out, "{line}").unwrap();
        }
        out
    }
}

/// Lowercase, with runs of non-alphanumerics collapsed to `_`.
pub fn slug(s: &str) -> String {
    let mut out = String::new();
    for ch in s.chars() {
        if ch.is_ascii_alphanumeric() {
            out.push(ch.to_ascii_lowercase());
        } else if !out.ends_with('_') && !out.is_empty() {
            out.push('_');
        }
    }
    out.trim_end_matches('_').to_string()
}
