//! CSV and JSON output for screening results and experiment reports.
//!
//! Floats are written as `{:.16e}` (17 significant digits), which parses back
//! to the same `f64`.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiment::ReportRow;
use crate::screening::ScreeningResult;

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn parse_f64(s: &str, what: &str) -> Result<f64> {
    s.trim()
        .parse()
        .map_err(|_| Error::Data(format!("{what}: {s:?} is not a number")))
}

fn parse_usize(s: &str, what: &str) -> Result<usize> {
    s.trim()
        .parse()
        .map_err(|_| Error::Data(format!("{what}: {s:?} is not a nonnegative integer")))
}

/// One line of a screening CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScreeningRow {
    pub rank: usize,
    pub feature: usize,
    pub name: String,
    pub omega: f64,
    pub selected: bool,
}

/// Rows in rank order; `names[k]` labels feature `k` (defaults to `x{k+1}`).
pub fn screening_rows(result: &ScreeningResult, names: Option<&[String]>) -> Vec<ScreeningRow> {
    let mut selected = vec![false; result.omega.len()];
    for &k in &result.selected {
        selected[k] = true;
    }
    result
        .order
        .iter()
        .enumerate()
        .map(|(r, &k)| ScreeningRow {
            rank: r + 1,
            feature: k,
            name: names
                .and_then(|n| n.get(k).cloned())
                .unwrap_or_else(|| format!("x{}", k + 1)),
            omega: result.omega[k],
            selected: selected[k],
        })
        .collect()
}

pub fn write_screening_csv<W: Write>(out: W, rows: &[ScreeningRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["rank", "feature", "name", "omega", "selected"])?;
    for r in rows {
        w.write_record([
            r.rank.to_string(),
            r.feature.to_string(),
            r.name.clone(),
            fmt_f64(r.omega),
            (r.selected as u8).to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_screening_csv<R: Read>(input: R) -> Result<Vec<ScreeningRow>> {
    let mut rdr = csv::Reader::from_reader(input);
    rdr.records()
        .map(|rec| {
            let rec = rec?;
            if rec.len() != 5 {
                return Err(Error::Data(format!(
                    "screening row has {} fields",
                    rec.len()
                )));
            }
            Ok(ScreeningRow {
                rank: parse_usize(&rec[0], "rank")?,
                feature: parse_usize(&rec[1], "feature")?,
                name: rec[2].to_owned(),
                omega: parse_f64(&rec[3], "omega")?,
                selected: match &rec[4] {
                    "0" => false,
                    "1" => true,
                    other => return Err(Error::Data(format!("selected: {other:?} is not 0/1"))),
                },
            })
        })
        .collect()
}

const QUANTILE_COLUMNS: [&str; 5] = ["s_q05", "s_q25", "s_q50", "s_q75", "s_q95"];

/// Writes report rows. Per-feature proportions go in columns `p_X<j>` with the
/// one-based feature index; rows with different active sets are rejected.
pub fn write_report_csv<W: Write>(out: W, rows: &[ReportRow]) -> Result<()> {
    let active = rows
        .first()
        .map(|r| r.active_set.clone())
        .unwrap_or_default();
    if rows
        .iter()
        .any(|r| r.active_set != active || r.p_j.len() != active.len())
    {
        return Err(Error::Data("report rows disagree on the active set".into()));
    }
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = ["variant", "m", "d"].map(String::from).to_vec();
    header.extend(QUANTILE_COLUMNS.map(String::from));
    header.push("iqr".into());
    header.extend(active.iter().map(|j| format!("p_X{}", j + 1)));
    header.extend(["p_a", "realized_cr", "seconds_per_rep"].map(String::from));
    w.write_record(&header)?;
    for r in rows {
        let mut rec = vec![r.variant.clone(), r.m.to_string(), r.d.to_string()];
        rec.extend(r.s_quantiles.iter().map(|&q| fmt_f64(q)));
        rec.push(fmt_f64(r.iqr));
        rec.extend(r.p_j.iter().map(|&p| fmt_f64(p)));
        rec.extend([
            fmt_f64(r.p_a),
            fmt_f64(r.realized_cr),
            fmt_f64(r.seconds_per_rep),
        ]);
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_report_csv<R: Read>(input: R) -> Result<Vec<ReportRow>> {
    let mut rdr = csv::Reader::from_reader(input);
    let header = rdr.headers()?.clone();
    let fixed = 3 + QUANTILE_COLUMNS.len() + 1;
    if header.len() < fixed + 3 {
        return Err(Error::Data("report header is too short".into()));
    }
    let active: Vec<usize> = header
        .iter()
        .skip(fixed)
        .take(header.len() - fixed - 3)
        .map(|h| {
            h.strip_prefix("p_X")
                .and_then(|j| j.parse::<usize>().ok())
                .filter(|&j| j >= 1)
                .map(|j| j - 1)
                .ok_or_else(|| Error::Data(format!("unexpected report column {h:?}")))
        })
        .collect::<Result<_>>()?;
    let s = active.len();
    rdr.records()
        .map(|rec| {
            let rec = rec?;
            if rec.len() != header.len() {
                return Err(Error::Data(format!("report row has {} fields", rec.len())));
            }
            let mut s_quantiles = [0.0; 5];
            for (i, q) in s_quantiles.iter_mut().enumerate() {
                *q = parse_f64(&rec[3 + i], QUANTILE_COLUMNS[i])?;
            }
            Ok(ReportRow {
                variant: rec[0].to_owned(),
                m: parse_usize(&rec[1], "m")?,
                d: parse_usize(&rec[2], "d")?,
                s_quantiles,
                iqr: parse_f64(&rec[8], "iqr")?,
                active_set: active.clone(),
                p_j: (0..s)
                    .map(|j| parse_f64(&rec[fixed + j], "p_j"))
                    .collect::<Result<_>>()?,
                p_a: parse_f64(&rec[fixed + s], "p_a")?,
                realized_cr: parse_f64(&rec[fixed + s + 1], "realized_cr")?,
                seconds_per_rep: parse_f64(&rec[fixed + s + 2], "seconds_per_rep")?,
            })
        })
        .collect()
}

pub fn write_json<W: Write, T: Serialize>(out: W, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(out, value)?;
    Ok(())
}

pub fn read_json<R: Read, T: for<'de> Deserialize<'de>>(input: R) -> Result<T> {
    Ok(serde_json::from_reader(input)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_has_seventeen_digits() {
        assert_eq!(fmt_f64(8.0 / 11.0), "7.2727272727272729e-1");
        assert_eq!(fmt_f64(0.1).parse::<f64>().unwrap(), 0.1);
    }

    #[test]
    fn screening_rows_follow_rank_order() {
        let res = ScreeningResult {
            omega: vec![0.1, 0.5, 0.3],
            order: vec![1, 2, 0],
            selected: vec![1, 2],
            m_used: 1,
            degenerate: vec![],
        };
        let rows = screening_rows(&res, None);
        assert_eq!(rows[0].name, "x2");
        assert!(rows[1].selected && !rows[2].selected);
        let mut buf = Vec::new();
        write_screening_csv(&mut buf, &rows).unwrap();
        assert_eq!(read_screening_csv(buf.as_slice()).unwrap(), rows);
    }

    #[test]
    fn report_header_layout() {
        let row = ReportRow {
            variant: "XIM-SIS1".into(),
            m: 13,
            d: 38,
            s_quantiles: [5.0, 5.0, 6.0, 8.0, 20.0],
            iqr: 3.0,
            active_set: vec![0, 6],
            p_j: vec![1.0, 0.5],
            p_a: 0.5,
            realized_cr: 0.3,
            seconds_per_rep: 0.01,
        };
        let mut buf = Vec::new();
        write_report_csv(&mut buf, std::slice::from_ref(&row)).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with(
            "variant,m,d,s_q05,s_q25,s_q50,s_q75,s_q95,iqr,p_X1,p_X7,p_a,realized_cr,seconds_per_rep\n"
        ));
        assert_eq!(read_report_csv(buf.as_slice()).unwrap(), vec![row]);
    }
}
