//! Plain-text and binary artifacts: heatmaps as PGM or CSV, result tables as CSV.

use std::fmt::Write as _;

use crate::bounds::ScanRow;
use crate::grid::PhaseSpaceField;
use crate::report::{ParamValue, SweepEntry};

/// Grey level reserved for samples with negative real part.
pub const NEGATIVE_MARKER: u8 = 0;

/// Samples above `-NEGATIVE_FLOOR · max|v|` count as nonnegative, so rounding noise
/// in the tails of a positive field is not marked.
pub const NEGATIVE_FLOOR: f64 = 1e-10;

/// Real part of a field, decimated to at most `max_side` samples per axis.
#[derive(Clone, Debug)]
pub struct Heatmap {
    pub xs: Vec<f64>,
    pub xis: Vec<f64>,
    /// Row-major, one row per `x`.
    pub values: Vec<f64>,
}

impl Heatmap {
    pub fn from_field(field: &PhaseSpaceField, max_side: usize) -> Self {
        let stride = |n: usize| n.div_ceil(max_side.max(1)).max(1);
        let (sr, sc) = (stride(field.rows()), stride(field.cols()));
        let rows: Vec<usize> = (0..field.rows()).step_by(sr).collect();
        let cols: Vec<usize> = (0..field.cols()).step_by(sc).collect();
        let values = rows
            .iter()
            .flat_map(|&m| cols.iter().map(move |&k| field.get(m, k).re))
            .collect();
        Heatmap {
            xs: rows.iter().map(|&m| field.xgrid.point(m)).collect(),
            xis: cols.iter().map(|&k| field.xigrid.point(k)).collect(),
            values,
        }
    }

    pub fn width(&self) -> usize {
        self.xis.len()
    }

    pub fn height(&self) -> usize {
        self.xs.len()
    }

    fn threshold(&self) -> f64 {
        -NEGATIVE_FLOOR * self.values.iter().fold(0.0f64, |a, v| a.max(v.abs()))
    }

    pub fn negative_count(&self) -> usize {
        let t = self.threshold();
        self.values.iter().filter(|&&v| v < t).count()
    }

    /// Binary 8-bit PGM, `ξ` along the width. Nonnegative values map linearly onto
    /// `1..=255`; negative ones get [`NEGATIVE_MARKER`].
    pub fn to_pgm(&self) -> Vec<u8> {
        let peak = self.values.iter().fold(0.0f64, |a, &v| a.max(v));
        let t = self.threshold();
        let mut out = format!("P5\n{} {}\n255\n", self.width(), self.height()).into_bytes();
        out.extend(self.values.iter().map(|&v| {
            if v < t {
                NEGATIVE_MARKER
            } else if peak > 0.0 {
                1 + (254.0 * v.max(0.0) / peak).round() as u8
            } else {
                1
            }
        }));
        out
    }

    /// Matrix CSV: the header holds the `ξ` values, each row starts with its `x`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x\\xi");
        for xi in &self.xis {
            let _ = write!(out, ",{xi}");
        }
        out.push('\n');
        for (row, x) in self.values.chunks(self.width()).zip(&self.xs) {
            let _ = write!(out, "{x}");
            for v in row {
                let _ = write!(out, ",{v}");
            }
            out.push('\n');
        }
        out
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

fn quote(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// One line per sweep entry; parameters are joined as `key=value` pairs.
pub fn sweep_csv(entries: &[SweepEntry]) -> String {
    let mut out = String::from("case,status,ratio,log_lhs,log_rhs,log_constant,params\n");
    for e in entries {
        let (case, status, ratio, logs, params) = match e {
            SweepEntry::Verdict(v) => (
                &v.case_id,
                if v.pass { "pass" } else { "fail" },
                opt(v.ratio),
                format!("{},{},{}", v.log_lhs, v.log_rhs, v.log_constant),
                &v.params,
            ),
            SweepEntry::Error(r) => (&r.case_id, r.kind.as_str(), String::new(), ",,".to_string(), &r.params),
        };
        let params: Vec<String> = params
            .iter()
            .map(|(k, v)| match v {
                ParamValue::Num(x) => format!("{k}={x}"),
                ParamValue::Text(t) => format!("{k}={t}"),
            })
            .collect();
        let _ = writeln!(out, "{},{status},{ratio},{logs},{}", quote(case), quote(&params.join(";")));
    }
    out
}

/// The counterexample table; `F` is the unweighted concentration.
pub fn scan_csv(rows: &[ScanRow]) -> String {
    let mut out = String::from("s,valid,F,unweighted_ratio,weighted_ratio,note\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.s,
            r.valid,
            opt(r.concentration),
            opt(r.unweighted_ratio),
            opt(r.weighted_ratio),
            quote(r.note.as_deref().unwrap_or(""))
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use num_complex::Complex64;

    #[test]
    fn pgm_marks_negative_samples() {
        let g = GridSpec::symmetric(4.0, 16).unwrap();
        let field = PhaseSpaceField::from_fn(g, g.dual(), |x, _| Complex64::new(x, 0.0));
        let map = Heatmap::from_field(&field, 8);
        assert_eq!((map.width(), map.height()), (8, 8));
        let pgm = map.to_pgm();
        let header = b"P5\n8 8\n255\n";
        assert_eq!(&pgm[..header.len()], header);
        let pixels = &pgm[header.len()..];
        assert_eq!(pixels.len(), 64);
        assert_eq!(pixels.iter().filter(|&&p| p == NEGATIVE_MARKER).count(), map.negative_count());
        assert_eq!(*pixels.last().unwrap(), 255);
    }

    #[test]
    fn rounding_noise_is_not_negative() {
        let g = GridSpec::symmetric(12.0, 256).unwrap();
        let f = crate::grid::make_signal(&crate::grid::SignalKind::unit_gaussian(), g).unwrap();
        let map = Heatmap::from_field(&crate::tfr::wigner(&f).unwrap(), 256);
        assert_eq!(map.negative_count(), 0);
        assert!(!map.to_pgm()[15..].contains(&NEGATIVE_MARKER));
    }

    #[test]
    fn csv_quotes_fields_with_commas() {
        assert_eq!(quote("a,b"), "\"a,b\"");
        assert_eq!(quote("plain"), "plain");
        let g = GridSpec::symmetric(4.0, 8).unwrap();
        let csv = Heatmap::from_field(&PhaseSpaceField::zeros(g, g.dual()), 8).to_csv();
        assert_eq!(csv.lines().count(), 9);
    }
}
