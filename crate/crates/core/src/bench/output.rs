//! CSV emission and parsing, atomic file writes.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use super::{BenchError, Metric, ProfileCurve, RunRecord, SummaryStats};

pub const RECORDS_CSV_HEADER: &str = "problem,seed,algorithm,converged,iterations,elapsed_s,final_grad_norm,restarts";
pub const STATS_CSV_HEADER: &str = "algorithm,metric,mean,std,min,median,max";
pub const PROFILE_CSV_HEADER: &str = "algorithm,tau,p";

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> BenchError + '_ {
    move |source| BenchError::Io { path: path.to_path_buf(), source }
}

/// Write `contents` to a sibling temp file, then rename it over `path`.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), BenchError> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let name = path.file_name().ok_or_else(|| BenchError::Io {
        path: path.to_path_buf(),
        source: std::io::Error::new(std::io::ErrorKind::InvalidInput, "not a file path"),
    })?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result.map_err(io_err(path))
}

pub fn records_csv(records: &[RunRecord]) -> String {
    let mut s = String::from(RECORDS_CSV_HEADER);
    s.push('\n');
    for r in records {
        s.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.problem,
            r.seed,
            r.algorithm,
            r.converged,
            r.iterations,
            r.elapsed_s,
            r.final_grad_norm,
            r.restarts
        ));
    }
    s
}

pub fn stats_csv(stats: &[SummaryStats]) -> String {
    let mut s = String::from(STATS_CSV_HEADER);
    s.push('\n');
    for st in stats {
        s.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            st.algorithm, st.metric, st.mean, st.std, st.min, st.median, st.max
        ));
    }
    s
}

pub fn profile_csv(curves: &[ProfileCurve]) -> String {
    let mut s = String::from(PROFILE_CSV_HEADER);
    s.push('\n');
    for c in curves {
        for (tau, p) in &c.points {
            s.push_str(&format!("{},{},{}\n", c.algorithm, tau, p));
        }
    }
    s
}

fn rows<'a>(text: &'a str, header: &str) -> Result<Vec<(usize, Vec<&'a str>)>, BenchError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim_end() == header => {}
        _ => return Err(BenchError::Csv { line: 1, reason: format!("expected header `{header}`") }),
    }
    let width = header.split(',').count();
    lines
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            let cells: Vec<&str> = l.trim_end().split(',').collect();
            if cells.len() != width {
                return Err(BenchError::Csv {
                    line: i + 1,
                    reason: format!("expected {width} fields, found {}", cells.len()),
                });
            }
            Ok((i + 1, cells))
        })
        .collect()
}

fn field<T: std::str::FromStr>(line: usize, cells: &[&str], i: usize, name: &str) -> Result<T, BenchError> {
    let raw = cells[i];
    raw.parse().map_err(|_| BenchError::Csv { line, reason: format!("bad {name} `{raw}`") })
}

pub fn parse_records_csv(text: &str) -> Result<Vec<RunRecord>, BenchError> {
    rows(text, RECORDS_CSV_HEADER)?
        .into_iter()
        .map(|(line, c)| {
            Ok(RunRecord {
                problem: field(line, &c, 0, "problem")?,
                seed: field(line, &c, 1, "seed")?,
                algorithm: field(line, &c, 2, "algorithm")?,
                converged: field(line, &c, 3, "converged")?,
                iterations: field(line, &c, 4, "iterations")?,
                elapsed_s: field(line, &c, 5, "elapsed_s")?,
                final_grad_norm: field(line, &c, 6, "final_grad_norm")?,
                restarts: field(line, &c, 7, "restarts")?,
            })
        })
        .collect()
}

/// Stats rows carry no count column; parsed rows report `count = 0`.
pub fn parse_stats_csv(text: &str) -> Result<Vec<SummaryStats>, BenchError> {
    rows(text, STATS_CSV_HEADER)?
        .into_iter()
        .map(|(line, c)| {
            Ok(SummaryStats {
                algorithm: field(line, &c, 0, "algorithm")?,
                metric: field::<Metric>(line, &c, 1, "metric")?,
                count: 0,
                mean: field(line, &c, 2, "mean")?,
                std: field(line, &c, 3, "std")?,
                min: field(line, &c, 4, "min")?,
                median: field(line, &c, 5, "median")?,
                max: field(line, &c, 6, "max")?,
            })
        })
        .collect()
}

pub fn parse_profile_csv(text: &str) -> Result<Vec<ProfileCurve>, BenchError> {
    let mut curves: Vec<ProfileCurve> = Vec::new();
    for (line, c) in rows(text, PROFILE_CSV_HEADER)? {
        let alg: String = field(line, &c, 0, "algorithm")?;
        let point = (field(line, &c, 1, "tau")?, field(line, &c, 2, "p")?);
        match curves.last_mut() {
            Some(cur) if cur.algorithm == alg => cur.points.push(point),
            _ => curves.push(ProfileCurve { algorithm: alg, points: vec![point] }),
        }
    }
    Ok(curves)
}
