//! Trajectory CSV: header `t,u,y[,x1..xn][,i_a,e_g,p_out,p_in]`, values at
//! nine significant digits, `\n` line endings.

use std::fmt::Write as _;

use super::CliError;
use crate::numfmt::format_g;
use crate::sim::{ElectricalTrace, TimeSeries};

pub const SIGNIFICANT_DIGITS: usize = 9;

/// Column-oriented numeric table.
#[derive(Clone, Debug, PartialEq)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub columns: Vec<Vec<f64>>,
}

impl CsvTable {
    pub fn from_series(ts: &TimeSeries, electrical: Option<&ElectricalTrace>) -> Self {
        let mut header = vec!["t".to_string(), "u".to_string(), "y".to_string()];
        let mut columns = vec![ts.times.clone(), ts.inputs.clone(), ts.outputs.clone()];
        if let Some(states) = &ts.states {
            let n = states.first().map_or(0, Vec::len);
            for j in 0..n {
                header.push(format!("x{}", j + 1));
                columns.push(states.iter().map(|x| x[j]).collect());
            }
        }
        if let Some(e) = electrical {
            for (name, col) in [
                ("i_a", &e.i_a),
                ("e_g", &e.e_g),
                ("p_out", &e.p_out),
                ("p_in", &e.p_in),
            ] {
                header.push(name.to_string());
                columns.push(col[..ts.len().min(col.len())].to_vec());
            }
        }
        CsvTable { header, columns }
    }

    pub fn rows(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.header
            .iter()
            .position(|h| h == name)
            .map(|i| self.columns[i].as_slice())
    }

    pub fn render(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for r in 0..self.rows() {
            for (j, col) in self.columns.iter().enumerate() {
                if j > 0 {
                    s.push(',');
                }
                let _ = write!(s, "{}", format_g(col[r], SIGNIFICANT_DIGITS));
            }
            s.push('\n');
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header: Vec<String> = lines
            .next()
            .ok_or_else(|| CliError::validation("CSV is empty"))?
            .split(',')
            .map(|h| h.trim().to_string())
            .collect();
        let mut columns = vec![Vec::new(); header.len()];
        for (i, line) in lines.enumerate() {
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != header.len() {
                return Err(CliError::validation(format!(
                    "CSV row {}: expected {} fields, got {}",
                    i + 2,
                    header.len(),
                    fields.len()
                )));
            }
            for (col, f) in columns.iter_mut().zip(fields) {
                let v = f.trim().parse::<f64>().map_err(|_| {
                    CliError::validation(format!("CSV row {}: `{f}` is not a number", i + 2))
                })?;
                col.push(v);
            }
        }
        Ok(CsvTable { header, columns })
    }

    /// Rebuilds the `t,u,y` part (and states, when present) of a series.
    pub fn to_series(&self) -> Result<TimeSeries, CliError> {
        let need = |name: &str| {
            self.column(name)
                .map(<[f64]>::to_vec)
                .ok_or_else(|| CliError::validation(format!("CSV has no `{name}` column")))
        };
        let times = need("t")?;
        let inputs = need("u")?;
        let outputs = need("y")?;
        if times.len() < 2 {
            return Err(CliError::validation("CSV needs at least two samples"));
        }
        let dt = times[1] - times[0];
        if !(dt > 0.0) {
            return Err(CliError::validation("CSV time column must be increasing"));
        }
        let state_cols: Vec<&[f64]> = (1..).map_while(|j| self.column(&format!("x{j}"))).collect();
        let states = (!state_cols.is_empty()).then(|| {
            (0..times.len())
                .map(|r| state_cols.iter().map(|c| c[r]).collect())
                .collect()
        });
        Ok(TimeSeries {
            dt,
            times,
            inputs,
            outputs,
            states,
            diverged: false,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> TimeSeries {
        TimeSeries {
            dt: 0.5,
            times: vec![0.0, 0.5, 1.0],
            inputs: vec![1.0, 1.0, 1.0],
            outputs: vec![0.0, 1.0 / 3.0, -2.5e-7],
            states: Some(vec![vec![0.0, 0.0], vec![0.1, 2.0], vec![0.2, 4.0]]),
            diverged: false,
        }
    }

    #[test]
    fn header_and_format() {
        let text = CsvTable::from_series(&sample(), None).render();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("t,u,y,x1,x2"));
        assert_eq!(lines.next(), Some("0,1,0,0,0"));
        assert_eq!(lines.next(), Some("0.5,1,0.333333333,0.1,2"));
        assert_eq!(lines.next(), Some("1,1,-2.5e-07,0.2,4"));
        assert!(text.ends_with('\n') && !text.contains('\r'));
    }

    #[test]
    fn round_trip_is_textually_stable() {
        let text = CsvTable::from_series(&sample(), None).render();
        let table = CsvTable::parse(&text).unwrap();
        assert_eq!(table.render(), text);
        let ts = table.to_series().unwrap();
        assert_eq!(ts.states.as_ref().unwrap()[2], vec![0.2, 4.0]);
        assert_eq!(CsvTable::from_series(&ts, None).render(), text);
    }

    #[test]
    fn rejects_ragged_rows() {
        assert!(CsvTable::parse("t,u,y\n0,1\n").is_err());
        assert!(CsvTable::parse("t,u,y\n0,1,x\n").is_err());
        assert!(CsvTable::parse("a,b\n0,1\n1,2\n")
            .unwrap()
            .to_series()
            .is_err());
    }
}
