//! Input discovery and grid construction shared by the subcommands.

use std::path::{Path, PathBuf};

use nvtrack::error::{Error, Result};
use nvtrack::io::csvio;
use nvtrack::TimeSeries;

/// Expands the `--in` arguments: files are taken as-is, directories
/// contribute every `*.csv` inside (sorted by name for stable ordering).
pub fn collect_csv_paths(inputs: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut paths = Vec::new();
    for input in inputs {
        if input.is_dir() {
            let mut found: Vec<PathBuf> = std::fs::read_dir(input)?
                .filter_map(|e| e.ok())
                .map(|e| e.path())
                .filter(|p| p.extension().is_some_and(|x| x == "csv"))
                .collect();
            found.sort();
            paths.extend(found);
        } else {
            paths.push(input.clone());
        }
    }
    if paths.is_empty() {
        return Err(Error::EmptyResult);
    }
    Ok(paths)
}

/// True when the file's header line declares one of the scan schemas.
/// Directory scans skip such files so that a dataset directory holding a
/// resonance scan next to its series files still loads cleanly.
fn is_scan_file(path: &Path) -> bool {
    let Ok(text) = std::fs::read_to_string(path) else {
        return false;
    };
    let header = text.lines().next().unwrap_or("").trim();
    header == "frequency_ghz,contrast_percent" || header == "time_s,signal"
}

/// Loads every series from the given inputs; variable names must be unique
/// across all files. Scan-shaped CSVs found inside a directory are skipped;
/// an explicitly named scan file is still an error.
pub fn load_series(inputs: &[PathBuf]) -> Result<Vec<TimeSeries>> {
    let mut all: Vec<TimeSeries> = Vec::new();
    for path in collect_csv_paths(inputs)? {
        let from_dir = !inputs.iter().any(|i| i == &path);
        if from_dir && is_scan_file(&path) {
            continue;
        }
        for series in csvio::read_series_path(&path)? {
            if all.iter().any(|s| s.name() == series.name()) {
                return Err(Error::DuplicateVariable { name: series.name().to_string() });
            }
            all.push(series);
        }
    }
    Ok(all)
}

pub fn find<'a>(series: &'a [TimeSeries], name: &str) -> Result<&'a TimeSeries> {
    series
        .iter()
        .find(|s| s.name() == name)
        .ok_or_else(|| Error::MissingColumn { name: name.to_string() })
}

/// Union of the sources' sample instants inside their common span. With a
/// gap threshold, instants that fall strictly inside a sampling gap larger
/// than the threshold (for any source) are dropped instead of bridged by
/// interpolation; a source's own sample instants always survive its gaps.
pub fn union_grid(series: &[&TimeSeries], gap_split: Option<f64>) -> Result<Vec<f64>> {
    let start = series
        .iter()
        .map(|s| s.span().0)
        .fold(f64::NEG_INFINITY, f64::max);
    let end = series
        .iter()
        .map(|s| s.span().1)
        .fold(f64::INFINITY, f64::min);
    if !(end > start) {
        return Err(Error::NoOverlap);
    }
    let mut grid: Vec<f64> = series
        .iter()
        .flat_map(|s| s.times().iter().copied())
        .filter(|&t| t >= start && t <= end)
        .collect();
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    if let Some(max_gap) = gap_split {
        if !(max_gap > 0.0) {
            return Err(Error::NonPositive { quantity: "gap threshold" });
        }
        grid.retain(|&t| {
            series.iter().all(|s| {
                let times = s.times();
                // Index of the first sample strictly after t.
                let hi = times.partition_point(|&u| u <= t);
                if hi == 0 || hi == times.len() {
                    return true; // at or outside the source's ends
                }
                if times[hi - 1] == t {
                    return true; // exact sample of this source
                }
                times[hi] - times[hi - 1] <= max_gap
            })
        });
        if grid.is_empty() {
            return Err(Error::EmptyResult);
        }
    }
    Ok(grid)
}

/// Grid restricted to the targets' own sample instants (so no target value
/// is ever interpolated), still honouring the common span of all sources
/// and the gap rule.
pub fn target_grid(
    targets: &[&TimeSeries],
    others: &[&TimeSeries],
    gap_split: Option<f64>,
) -> Result<Vec<f64>> {
    let mut sources: Vec<&TimeSeries> = targets.to_vec();
    sources.extend_from_slice(others);
    let grid = union_grid(&sources, gap_split)?;
    let own: Vec<f64> = grid
        .into_iter()
        .filter(|t| {
            targets
                .iter()
                .any(|s| s.times().binary_search_by(|u| u.total_cmp(t)).is_ok())
        })
        .collect();
    if own.is_empty() {
        return Err(Error::EmptyResult);
    }
    Ok(own)
}

/// A two-column scan file: `frequency_ghz,contrast_percent` for resonance
/// scans or `time_s,signal` for driven-oscillation traces.
#[derive(Debug, Clone, Copy)]
pub enum ScanKind {
    Lorentzian,
    Sine,
}

pub fn read_scan(path: &Path) -> Result<(ScanKind, Vec<f64>, Vec<f64>)> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(Error::EmptyResult)?;
    let kind = match header.trim() {
        "frequency_ghz,contrast_percent" => ScanKind::Lorentzian,
        "time_s,signal" => ScanKind::Sine,
        other => {
            return Err(Error::Parse {
                line: 1,
                message: format!(
                    "expected header 'frequency_ghz,contrast_percent' or 'time_s,signal', got '{other}'"
                ),
            })
        }
    };
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (idx, line) in lines {
        let lineno = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let Some((a, b)) = line.split_once(',') else {
            return Err(Error::Parse { line: lineno, message: "expected two fields".into() });
        };
        let parse = |field: &str| -> Result<f64> {
            field.trim().parse().map_err(|_| Error::Parse {
                line: lineno,
                message: format!("'{}' is not a number", field.trim()),
            })
        };
        xs.push(parse(a)?);
        ys.push(parse(b)?);
    }
    if xs.is_empty() {
        return Err(Error::EmptyResult);
    }
    Ok((kind, xs, ys))
}

pub fn render_scan_csv(freq_ghz: &[f64], contrast: &[f64]) -> String {
    let mut out = String::from("frequency_ghz,contrast_percent\n");
    for (f, c) in freq_ghz.iter().zip(contrast) {
        out.push_str(&format!("{f},{c}\n"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(name: &str, times: &[f64]) -> TimeSeries {
        let values: Vec<f64> = times.iter().map(|t| t * 0.5).collect();
        TimeSeries::new(name, times.to_vec(), values).unwrap()
    }

    #[test]
    fn union_grid_merges_instants_inside_common_span() {
        let a = series("a", &[0.0, 10.0, 20.0, 30.0]);
        let b = series("b", &[5.0, 15.0, 25.0]);
        let grid = union_grid(&[&a, &b], None).unwrap();
        assert_eq!(grid, vec![5.0, 10.0, 15.0, 20.0, 25.0]);
    }

    #[test]
    fn union_grid_rejects_disjoint_spans() {
        let a = series("a", &[0.0, 1.0]);
        let b = series("b", &[5.0, 6.0]);
        assert!(matches!(union_grid(&[&a, &b], None), Err(Error::NoOverlap)));
    }

    #[test]
    fn gap_rule_drops_foreign_instants_inside_a_large_gap() {
        // b has a 100 s hole between 10 and 110; a keeps sampling through it.
        let a = series("a", &[0.0, 10.0, 50.0, 110.0, 120.0]);
        let b = series("b", &[0.0, 10.0, 110.0, 120.0]);
        let bridged = union_grid(&[&a, &b], None).unwrap();
        assert!(bridged.contains(&50.0));
        let split = union_grid(&[&a, &b], Some(60.0)).unwrap();
        assert!(!split.contains(&50.0));
        // Instants at the gap's edges belong to b itself and survive.
        assert_eq!(split, vec![0.0, 10.0, 110.0, 120.0]);
    }

    #[test]
    fn gap_rule_requires_positive_threshold() {
        let a = series("a", &[0.0, 1.0]);
        assert!(matches!(
            union_grid(&[&a], Some(0.0)),
            Err(Error::NonPositive { .. })
        ));
    }

    #[test]
    fn target_grid_never_interpolates_the_targets() {
        let x = series("x", &[0.0, 100.0, 200.0, 300.0]);
        let t = series("t", &[0.0, 50.0, 100.0, 150.0, 200.0, 250.0, 300.0]);
        let grid = target_grid(&[&x], &[&t], None).unwrap();
        assert_eq!(grid, vec![0.0, 100.0, 200.0, 300.0]);
    }

    #[test]
    fn target_grid_unions_multiple_targets() {
        let x = series("x", &[0.0, 100.0, 200.0]);
        let y = series("y", &[0.0, 60.0, 120.0, 180.0]);
        let t = series("t", &[0.0, 30.0, 90.0, 150.0, 210.0]);
        let grid = target_grid(&[&x, &y], &[&t], None).unwrap();
        assert_eq!(grid, vec![0.0, 60.0, 100.0, 120.0, 180.0]);
    }

    #[test]
    fn read_scan_dispatches_on_header() {
        let dir = tempfile::tempdir().unwrap();
        let lorentz = dir.path().join("scan.csv");
        std::fs::write(&lorentz, "frequency_ghz,contrast_percent\n1.458,30\n").unwrap();
        assert!(matches!(read_scan(&lorentz).unwrap().0, ScanKind::Lorentzian));
        let sine = dir.path().join("trace.csv");
        std::fs::write(&sine, "time_s,signal\n0,1\n0.1,0.5\n").unwrap();
        let (kind, xs, ys) = read_scan(&sine).unwrap();
        assert!(matches!(kind, ScanKind::Sine));
        assert_eq!(xs, vec![0.0, 0.1]);
        assert_eq!(ys, vec![1.0, 0.5]);
    }

    #[test]
    fn read_scan_reports_the_offending_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("scan.csv");
        std::fs::write(&path, "time_s,signal\n0,1\nnot-a-number,2\n").unwrap();
        match read_scan(&path) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn directory_scan_skips_scan_shaped_csvs() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("T1.csv"), "timestamp,value\n0,13.1\n20,13.2\n").unwrap();
        std::fs::write(
            dir.path().join("rabi_scan.csv"),
            "frequency_ghz,contrast_percent\n1.458,30\n",
        )
        .unwrap();
        let loaded = load_series(&[dir.path().to_path_buf()]).unwrap();
        assert_eq!(loaded.len(), 1);
        assert_eq!(loaded[0].name(), "T1");
        // Explicitly naming the scan file is still an error.
        assert!(load_series(&[dir.path().join("rabi_scan.csv")]).is_err());
    }
}
