use std::fmt::Write as _;

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    /// cells per axis
    pub n: usize,
    pub h: f64,
    pub errors: Vec<f64>,
}

/// Errors on a refinement sequence with observed rates
/// `log(e_k / e_{k+1}) / log(h_k / h_{k+1})`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTable {
    pub columns: Vec<String>,
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceTable {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Rates between successive rows for column `col`; empty errors give NaN.
    pub fn rates(&self, col: usize) -> Vec<f64> {
        self.rows
            .windows(2)
            .map(|w| (w[0].errors[col] / w[1].errors[col]).ln() / (w[0].h / w[1].h).ln())
            .collect()
    }

    /// Smallest observed rate of a column, `None` with fewer than two rows.
    pub fn min_rate(&self, col: usize) -> Option<f64> {
        let r = self.rates(col);
        if r.is_empty() {
            None
        } else {
            Some(r.into_iter().fold(f64::INFINITY, f64::min))
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{:>6} {:>12}", "n", "h");
        for c in &self.columns {
            let _ = write!(out, " {:>12} {:>6}", c, "rate");
        }
        out.push('\n');
        let rates: Vec<Vec<f64>> = (0..self.columns.len()).map(|c| self.rates(c)).collect();
        for (k, row) in self.rows.iter().enumerate() {
            let _ = write!(out, "{:>6} {:>12.4e}", row.n, row.h);
            for (c, e) in row.errors.iter().enumerate() {
                match k.checked_sub(1).map(|j| rates[c][j]) {
                    Some(r) => {
                        let _ = write!(out, " {:>12.4e} {:>6.2}", e, r);
                    }
                    None => {
                        let _ = write!(out, " {:>12.4e} {:>6}", e, "-");
                    }
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,h");
        for c in &self.columns {
            let _ = write!(out, ",{c},rate_{c}");
        }
        out.push('\n');
        let rates: Vec<Vec<f64>> = (0..self.columns.len()).map(|c| self.rates(c)).collect();
        for (k, row) in self.rows.iter().enumerate() {
            let _ = write!(out, "{},{:.17e}", row.n, row.h);
            for (c, e) in row.errors.iter().enumerate() {
                let rate = k.checked_sub(1).map(|j| format!("{:.6}", rates[c][j])).unwrap_or_default();
                let _ = write!(out, ",{e:.17e},{rate}");
            }
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn second_order_rates() {
        let mut t = ConvergenceTable::new(&["L2"]);
        for n in [8usize, 16, 32] {
            let h = 1.0 / n as f64;
            t.rows.push(ConvergenceRow { n, h, errors: vec![3.0 * h * h] });
        }
        for r in t.rates(0) {
            assert!((r - 2.0).abs() < 1e-12);
        }
        assert!(t.to_text().lines().count() == 4);
        assert!(t.to_csv().starts_with("n,h,L2,rate_L2\n"));
    }
}
