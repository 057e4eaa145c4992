//! Delimited survival tables with optional missing feature cells.

use std::fs;
use std::path::Path;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::survival::SurvivalResponse;

/// Observed time, status and a feature block where `None` marks a missing cell.
#[derive(Debug, Clone, PartialEq)]
pub struct RawTable {
    pub time_col: String,
    pub status_col: String,
    pub feature_names: Vec<String>,
    pub time: Vec<f64>,
    pub status: Vec<u8>,
    /// `n x p`, row per observation.
    pub features: Array2<Option<f64>>,
}

impl RawTable {
    pub fn n_rows(&self) -> usize {
        self.time.len()
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn missing_count(&self) -> usize {
        self.features.iter().filter(|c| c.is_none()).count()
    }

    pub fn response(&self) -> Result<SurvivalResponse> {
        SurvivalResponse::from_indicators(self.time.clone(), &self.status)
    }

    /// Feature matrix, failing if any cell is missing.
    pub fn complete_features(&self) -> Result<Array2<f64>> {
        if let Some(((i, k), _)) = self.features.indexed_iter().find(|(_, c)| c.is_none()) {
            return Err(Error::Data(format!(
                "missing value at row {i}, feature {:?}; impute first",
                self.feature_names[k]
            )));
        }
        Ok(self.features.mapv(|c| c.unwrap_or(f64::NAN)))
    }
}

fn is_missing(cell: &str) -> bool {
    cell.is_empty() || cell == "NA"
}

/// Tab if the header has tabs and no commas, else comma.
pub fn detect_delimiter(text: &str) -> u8 {
    let header = text.lines().next().unwrap_or("");
    if header.contains('\t') && !header.contains(',') {
        b'\t'
    } else {
        b','
    }
}

pub fn load_survival_csv(
    path: impl AsRef<Path>,
    time_col: &str,
    status_col: &str,
) -> Result<RawTable> {
    let text = fs::read_to_string(path.as_ref())?;
    parse_survival_table(&text, time_col, status_col)
}

pub fn parse_survival_table(text: &str, time_col: &str, status_col: &str) -> Result<RawTable> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(detect_delimiter(text))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
    let find = |name: &str| {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Data(format!("column {name:?} not found in header")))
    };
    let ti = find(time_col)?;
    let si = find(status_col)?;
    if ti == si {
        return Err(Error::Data(
            "time and status must be different columns".into(),
        ));
    }
    let feature_idx: Vec<usize> = (0..header.len()).filter(|&c| c != ti && c != si).collect();
    if feature_idx.is_empty() {
        return Err(Error::Data("no feature columns".into()));
    }

    let mut time = Vec::new();
    let mut status = Vec::new();
    let mut cells = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = row + 2;
        let field = |c: usize| rec.get(c).unwrap_or("");
        let t: f64 = field(ti).parse().map_err(|_| {
            Error::Data(format!("line {line}: time {:?} is not numeric", field(ti)))
        })?;
        if !(t.is_finite() && t > 0.0) {
            return Err(Error::Data(format!(
                "line {line}: time must be positive, got {t}"
            )));
        }
        let s = match field(si) {
            "0" => 0,
            "1" => 1,
            other => {
                return Err(Error::Data(format!(
                    "line {line}: status must be 0/1, got {other:?}"
                )))
            }
        };
        time.push(t);
        status.push(s);
        for &c in &feature_idx {
            let raw = field(c);
            if is_missing(raw) {
                cells.push(None);
                continue;
            }
            let v: f64 = raw.parse().map_err(|_| {
                Error::Data(format!(
                    "line {line}: column {:?} value {raw:?} is not numeric",
                    header[c]
                ))
            })?;
            if !v.is_finite() {
                return Err(Error::Data(format!(
                    "line {line}: column {:?} is not finite",
                    header[c]
                )));
            }
            cells.push(Some(v));
        }
    }
    if time.is_empty() {
        return Err(Error::Data("table has no rows".into()));
    }
    let n = time.len();
    let features = Array2::from_shape_vec((n, feature_idx.len()), cells)
        .map_err(|e| Error::Data(e.to_string()))?;
    Ok(RawTable {
        time_col: time_col.to_owned(),
        status_col: status_col.to_owned(),
        feature_names: feature_idx.iter().map(|&c| header[c].clone()).collect(),
        time,
        status,
        features,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complete_table() {
        let t = parse_survival_table(
            "time,status,a,b\n1.5,1,0.1,2\n2,0,0.2,3\n3,1,0.3,4\n",
            "time",
            "status",
        )
        .unwrap();
        assert_eq!(t.n_rows(), 3);
        assert_eq!(t.feature_names, vec!["a", "b"]);
        assert_eq!(t.missing_count(), 0);
        assert_eq!(t.complete_features().unwrap()[[2, 1]], 4.0);
    }

    #[test]
    fn missing_markers() {
        let t =
            parse_survival_table("a,time,status\nNA,1,1\n,2,1\n3,3,0\n", "time", "status").unwrap();
        assert_eq!(t.features[[0, 0]], None);
        assert_eq!(t.features[[1, 0]], None);
        assert_eq!(t.features[[2, 0]], Some(3.0));
        assert_eq!(t.missing_count(), 2);
        assert!(t.complete_features().is_err());
    }

    #[test]
    fn tab_delimited() {
        let t =
            parse_survival_table("time\tstatus\tg\n1\t1\t5\n2\t0\t6\n", "time", "status").unwrap();
        assert_eq!(t.features[[1, 0]], Some(6.0));
    }

    #[test]
    fn rejects_bad_input() {
        let err = parse_survival_table("time,status,a\n1,2,0\n", "time", "status").unwrap_err();
        assert!(err.to_string().contains("status must be 0/1"));
        assert!(parse_survival_table("time,status,a\n0,1,0\n", "time", "status").is_err());
        assert!(parse_survival_table("time,status,a\n1,1,x\n", "time", "status").is_err());
        assert!(parse_survival_table("t,status,a\n1,1,0\n", "time", "status").is_err());
        assert!(parse_survival_table("time,status\n1,1\n", "time", "status").is_err());
    }
}
