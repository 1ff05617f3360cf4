//! File output: atomic writes and plot-ready pivots.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use crate::error::CliResult;

/// Writes through a temporary file in the target directory and renames it,
/// so an interrupted run leaves no partial file behind.
pub fn write_atomic(path: &Path, contents: &str) -> CliResult<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

/// Reshapes long rows into a wide table: one row per distinct `index`
/// tuple, one column per distinct `column` value, in first-seen order.
pub fn pivot(index_names: &[&str], rows: &[(Vec<String>, String, f64)]) -> String {
    let mut columns: Vec<&str> = Vec::new();
    let mut order: Vec<&Vec<String>> = Vec::new();
    let mut cells: BTreeMap<(&Vec<String>, &str), f64> = BTreeMap::new();
    for (idx, col, v) in rows {
        if !columns.contains(&col.as_str()) {
            columns.push(col);
        }
        if !order.contains(&idx) {
            order.push(idx);
        }
        cells.insert((idx, col), *v);
    }
    let mut out = index_names.join(",");
    for c in &columns {
        out.push(',');
        out.push_str(c);
    }
    out.push('\n');
    for idx in order {
        out.push_str(&idx.join(","));
        for c in &columns {
            out.push(',');
            if let Some(v) = cells.get(&(idx, *c)) {
                out.push_str(&v.to_string());
            }
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pivot_layout() {
        let rows = vec![
            (vec!["0".into()], "VR".into(), 0.05),
            (vec!["0".into()], "ADF".into(), 0.05),
            (vec!["-3".into()], "VR".into(), 0.1),
        ];
        assert_eq!(pivot(&["c"], &rows), "c,VR,ADF\n0,0.05,0.05\n-3,0.1,\n");
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("out.csv");
        write_atomic(&p, "a\n").unwrap();
        write_atomic(&p, "b\n").unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "b\n");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
