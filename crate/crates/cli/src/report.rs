//! Line-oriented `key=value` output followed by an aligned table.

use std::fmt::Display;

#[derive(Default)]
pub struct Report {
    pairs: Vec<(String, String)>,
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Report {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn kv(&mut self, key: impl Into<String>, value: impl Display) {
        self.pairs.push((key.into(), value.to_string()));
    }

    pub fn header(&mut self, cols: &[&str]) {
        self.header = cols.iter().map(|c| c.to_string()).collect();
    }

    pub fn row(&mut self, cells: Vec<String>) {
        self.rows.push(cells);
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.pairs {
            out.push_str(&format!("{k}={v}\n"));
        }
        if self.header.is_empty() {
            return out;
        }
        let mut widths: Vec<usize> = self.header.iter().map(|h| h.len()).collect();
        for r in &self.rows {
            for (w, c) in widths.iter_mut().zip(r) {
                *w = (*w).max(c.chars().count());
            }
        }
        out.push('\n');
        let line = |cells: &[String]| {
            cells.iter().zip(&widths).map(|(c, &w)| format!("{c:>w$}")).collect::<Vec<_>>().join("  ").trim_end().to_string()
        };
        out.push_str(&line(&self.header));
        out.push('\n');
        out.push_str(&widths.iter().map(|&w| "-".repeat(w)).collect::<Vec<_>>().join("  "));
        out.push('\n');
        for r in &self.rows {
            out.push_str(&line(r));
            out.push('\n');
        }
        out
    }

    pub fn print(&self) {
        print!("{}", self.render());
    }
}

pub fn sci(x: f64) -> String {
    format!("{x:.3e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_pairs_then_aligned_rows() {
        let mut r = Report::new();
        r.kv("degree", 8);
        r.header(&["n", "time"]);
        r.row(vec!["64".into(), "1.0".into()]);
        r.row(vec!["1024".into(), "12.5".into()]);
        let s = r.render();
        assert!(s.starts_with("degree=8\n\n"));
        assert!(s.contains("   n  time\n"));
        assert!(s.contains("1024  12.5\n"));
    }
}
