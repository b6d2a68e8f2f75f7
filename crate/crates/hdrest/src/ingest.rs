//! Case-data ingestion: CSV rows to jittered weekly point batches.

use std::collections::BTreeMap;
use std::io::Read;

use chrono::NaiveDate;
use hdrest_core::seed;
use hdrest_core::Point;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::AppError;

/// Column names of the case file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schema {
    pub longitude: String,
    pub latitude: String,
    pub date: String,
    /// Without a count column every row is one case.
    pub count: Option<String>,
    pub date_format: String,
}

impl Default for Schema {
    fn default() -> Self {
        Schema {
            longitude: "longitude".into(),
            latitude: "latitude".into(),
            date: "date".into(),
            count: Some("count".into()),
            date_format: "%Y-%m-%d".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngestConfig {
    pub schema: Schema,
    /// Standard deviation of the isotropic Gaussian jitter, in degrees.
    pub jitter_sigma: f64,
    pub seed: u64,
    /// Counts are running totals per location; new cases are their first differences.
    pub cumulative: bool,
    /// First day of week 0. Defaults to the earliest valid record.
    pub start: Option<NaiveDate>,
    /// Weeks with fewer points are flagged unreliable.
    pub n_min: usize,
    /// Multiply longitudes by the cosine of the mean latitude.
    pub equirectangular: bool,
}

impl Default for IngestConfig {
    fn default() -> Self {
        IngestConfig {
            schema: Schema::default(),
            jitter_sigma: 0.01,
            seed: 0,
            cumulative: false,
            start: None,
            n_min: 50,
            equirectangular: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CaseRecord {
    pub longitude: f64,
    pub latitude: f64,
    pub date: NaiveDate,
    pub count: u64,
    /// 1-based data row the record came from (the header is not counted).
    pub row: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowError {
    pub row: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeeklyBatch {
    pub week: usize,
    pub start: NaiveDate,
    /// Last day of the week, inclusive.
    pub end: NaiveDate,
    pub records: usize,
    pub cases: u64,
    #[serde(skip)]
    pub points: Vec<Point>,
    pub unreliable: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngestReport {
    pub batches: Vec<WeeklyBatch>,
    pub errors: Vec<RowError>,
    pub start: Option<NaiveDate>,
    /// Factor applied to longitudes (1 unless the equirectangular switch is on).
    pub x_scale: f64,
    pub jitter_sigma: f64,
}

impl IngestReport {
    pub fn total_cases(&self) -> u64 {
        self.batches.iter().map(|b| b.cases).sum()
    }
}

fn column(headers: &csv::StringRecord, name: &str) -> Result<usize, AppError> {
    headers
        .iter()
        .position(|h| h.trim() == name)
        .ok_or_else(|| AppError::MalformedHeader(format!("missing column `{name}`")))
}

fn parse_row(
    rec: &csv::StringRecord,
    cols: (usize, usize, usize, Option<usize>),
    cfg: &IngestConfig,
    row: usize,
) -> Result<CaseRecord, String> {
    let field = |i: usize| rec.get(i).map(str::trim).ok_or_else(|| format!("missing field {}", i + 1));
    let lon: f64 = field(cols.0)?.parse().map_err(|_| format!("bad longitude `{}`", field(cols.0).unwrap_or("")))?;
    let lat: f64 = field(cols.1)?.parse().map_err(|_| format!("bad latitude `{}`", field(cols.1).unwrap_or("")))?;
    if !(-180.0..=180.0).contains(&lon) {
        return Err(format!("longitude {lon} outside [-180, 180]"));
    }
    if !(-90.0..=90.0).contains(&lat) {
        return Err(format!("latitude {lat} outside [-90, 90]"));
    }
    let raw = field(cols.2)?;
    let date = NaiveDate::parse_from_str(raw, &cfg.schema.date_format).map_err(|e| format!("bad date `{raw}`: {e}"))?;
    let count = match cols.3 {
        None => 1,
        Some(i) => {
            let raw = field(i)?;
            raw.parse::<u64>().map_err(|_| format!("bad count `{raw}`"))?
        }
    };
    if count == 0 && !cfg.cumulative {
        return Err("count must be at least 1".into());
    }
    Ok(CaseRecord {
        longitude: lon,
        latitude: lat,
        date,
        count,
        row,
    })
}

/// First differences of running totals, per location in date order.
///
/// A decrease is reported as a row error and contributes no cases.
pub fn difference_cumulative(records: &[CaseRecord], errors: &mut Vec<RowError>) -> Vec<CaseRecord> {
    let mut by_place: BTreeMap<(u64, u64), Vec<CaseRecord>> = BTreeMap::new();
    for r in records {
        by_place.entry((r.longitude.to_bits(), r.latitude.to_bits())).or_default().push(*r);
    }
    let mut out = Vec::new();
    for series in by_place.values_mut() {
        series.sort_by_key(|r| (r.date, r.row));
        let mut prev = 0u64;
        for r in series.iter() {
            if r.count < prev {
                errors.push(RowError {
                    row: r.row,
                    message: format!("cumulative count decreases from {prev} to {}", r.count),
                });
                continue;
            }
            let new = r.count - prev;
            prev = r.count;
            if new > 0 {
                out.push(CaseRecord { count: new, ..*r });
            }
        }
    }
    out.sort_by_key(|r| r.row);
    out
}

/// Reads a case CSV and groups the expanded, jittered cases into consecutive
/// 7-day batches.
///
/// Rows that fail validation are skipped and listed in the report. Each record
/// draws its jitter from a stream derived from the seed and its row number, so
/// the output does not depend on anything but the file and the configuration.
pub fn ingest_csv<R: Read>(stream: R, cfg: &IngestConfig) -> Result<IngestReport, AppError> {
    if !(cfg.jitter_sigma >= 0.0 && cfg.jitter_sigma.is_finite()) {
        return Err(AppError::Validation("jitter sigma must be finite and non-negative".into()));
    }
    let mut reader = csv::ReaderBuilder::new().has_headers(true).flexible(true).from_reader(stream);
    let headers = reader.headers().map_err(|e| AppError::MalformedHeader(e.to_string()))?.clone();
    if headers.is_empty() {
        return Err(AppError::MalformedHeader("empty header".into()));
    }
    let s = &cfg.schema;
    let cols = (
        column(&headers, &s.longitude)?,
        column(&headers, &s.latitude)?,
        column(&headers, &s.date)?,
        s.count.as_deref().map(|c| column(&headers, c)).transpose()?,
    );

    let mut records = Vec::new();
    let mut errors = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let row = i + 1;
        match rec.map_err(|e| e.to_string()).and_then(|r| parse_row(&r, cols, cfg, row)) {
            Ok(r) => records.push(r),
            Err(message) => errors.push(RowError { row, message }),
        }
    }
    if cfg.cumulative {
        records = difference_cumulative(&records, &mut errors);
    }
    records.retain(|r| r.count > 0);

    let start = cfg.start.or_else(|| records.iter().map(|r| r.date).min());
    let x_scale = if cfg.equirectangular && !records.is_empty() {
        let total: f64 = records.iter().map(|r| r.count as f64).sum();
        let mean_lat = records.iter().map(|r| r.latitude * r.count as f64).sum::<f64>() / total;
        mean_lat.to_radians().cos()
    } else {
        1.0
    };

    let mut batches: Vec<WeeklyBatch> = Vec::new();
    if let Some(start) = start {
        let week_of = |d: NaiveDate| (d - start).num_days().div_euclid(7);
        let last = records.iter().map(|r| week_of(r.date)).max().unwrap_or(-1);
        for w in 0..=last {
            let first = start + chrono::Days::new(7 * w as u64);
            batches.push(WeeklyBatch {
                week: w as usize,
                start: first,
                end: first + chrono::Days::new(6),
                records: 0,
                cases: 0,
                points: Vec::new(),
                unreliable: false,
            });
        }
        for r in &records {
            let w = week_of(r.date);
            if w < 0 {
                errors.push(RowError {
                    row: r.row,
                    message: format!("date {} before the start date {start}", r.date),
                });
                continue;
            }
            let b = &mut batches[w as usize];
            b.records += 1;
            b.cases += r.count;
            let mut rng = seed::rng(seed::derive(cfg.seed, r.row as u64));
            for _ in 0..r.count {
                let (mut x, mut y) = (r.longitude, r.latitude);
                if cfg.jitter_sigma > 0.0 {
                    x += cfg.jitter_sigma * rng.sample::<f64, _>(StandardNormal);
                    y += cfg.jitter_sigma * rng.sample::<f64, _>(StandardNormal);
                }
                b.points.push(Point::new(x * x_scale, y));
            }
        }
        for b in &mut batches {
            b.unreliable = b.points.len() < cfg.n_min;
        }
    }
    errors.sort_by_key(|e| e.row);
    Ok(IngestReport {
        batches,
        errors,
        start,
        x_scale,
        jitter_sigma: cfg.jitter_sigma,
    })
}

/// Reads a plain point sample: a CSV with a header naming the two coordinate
/// columns. Any unparsable row is an error.
pub fn read_points_csv<R: Read>(stream: R, x: &str, y: &str) -> Result<Vec<Point>, AppError> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(stream);
    let headers = reader.headers().map_err(|e| AppError::MalformedHeader(e.to_string()))?.clone();
    let (cx, cy) = (column(&headers, x)?, column(&headers, y)?);
    let mut out = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec?;
        let get = |c: usize| -> Result<f64, AppError> {
            rec.get(c)
                .and_then(|v| v.trim().parse::<f64>().ok())
                .filter(|v| v.is_finite())
                .ok_or_else(|| AppError::Validation(format!("row {}: bad coordinate", i + 1)))
        };
        out.push(Point::new(get(cx)?, get(cy)?));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> IngestConfig {
        IngestConfig {
            jitter_sigma: 0.0,
            ..IngestConfig::default()
        }
    }

    #[test]
    fn one_record_expands_count_fold() {
        let csv = "longitude,latitude,date,count\n-3.7,40.4,2020-03-02,3\n";
        let rep = ingest_csv(csv.as_bytes(), &cfg()).unwrap();
        assert_eq!(rep.batches.len(), 1);
        let b = &rep.batches[0];
        assert_eq!(b.points, vec![Point::new(-3.7, 40.4); 3]);
        assert!(b.unreliable);
        assert!(rep.errors.is_empty());
    }

    #[test]
    fn invalid_rows_are_listed() {
        let csv = "longitude,latitude,date,count\n1,91,2020-03-02,1\n1,2,2020-03-02,1\n1,2,not-a-date,1\n1,2,2020-03-03,0\n";
        let rep = ingest_csv(csv.as_bytes(), &cfg()).unwrap();
        let rows: Vec<usize> = rep.errors.iter().map(|e| e.row).collect();
        assert_eq!(rows, vec![1, 3, 4]);
        assert!(rep.errors[0].message.contains("latitude"));
        assert_eq!(rep.total_cases(), 1);
    }

    #[test]
    fn missing_column_is_a_header_error() {
        let csv = "lon,lat,date\n1,2,2020-01-01\n";
        assert!(matches!(ingest_csv(csv.as_bytes(), &cfg()), Err(AppError::MalformedHeader(_))));
    }

    #[test]
    fn cumulative_series_is_differenced() {
        let csv = "longitude,latitude,date,count\n0,0,2020-03-01,5\n0,0,2020-03-02,8\n0,0,2020-03-03,8\n0,0,2020-03-04,20\n";
        let c = IngestConfig {
            cumulative: true,
            ..cfg()
        };
        let mut errors = Vec::new();
        let mut reader = csv::Reader::from_reader(csv.as_bytes());
        let records: Vec<CaseRecord> = reader
            .records()
            .enumerate()
            .map(|(i, r)| parse_row(&r.unwrap(), (0, 1, 2, Some(3)), &c, i + 1).unwrap())
            .collect();
        let diffs: Vec<u64> = difference_cumulative(&records, &mut errors).iter().map(|r| r.count).collect();
        assert_eq!(diffs, vec![5, 3, 12]);
        let rep = ingest_csv(csv.as_bytes(), &c).unwrap();
        assert_eq!(rep.total_cases(), 20);
    }

    #[test]
    fn weeks_start_at_the_first_record() {
        let csv = "longitude,latitude,date\n0,0,2020-03-01\n0,0,2020-03-07\n0,0,2020-03-08\n0,0,2020-03-22\n";
        let c = IngestConfig {
            schema: Schema {
                count: None,
                ..Schema::default()
            },
            ..cfg()
        };
        let rep = ingest_csv(csv.as_bytes(), &c).unwrap();
        let sizes: Vec<u64> = rep.batches.iter().map(|b| b.cases).collect();
        assert_eq!(sizes, vec![2, 1, 0, 1]);
        assert_eq!(rep.batches[1].start, NaiveDate::from_ymd_opt(2020, 3, 8).unwrap());
    }

    #[test]
    fn jitter_is_deterministic() {
        let csv = "longitude,latitude,date,count\n1,2,2020-03-02,4\n";
        let c = IngestConfig {
            seed: 9,
            ..IngestConfig::default()
        };
        let a = ingest_csv(csv.as_bytes(), &c).unwrap();
        let b = ingest_csv(csv.as_bytes(), &c).unwrap();
        assert_eq!(a.batches[0].points, b.batches[0].points);
        assert_ne!(a.batches[0].points[0], a.batches[0].points[1]);
    }
}
