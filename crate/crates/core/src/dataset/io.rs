use std::fs;
use std::path::{Path, PathBuf};

use super::{AngleUnit, Dataset, Repetition};
use crate::error::{Error, Result};

/// Reads one repetition file. Returns the joint labels (header minus the
/// leading `time` column) and the repetition.
pub fn read_repetition_csv(path: &Path) -> Result<(Vec<String>, Repetition)> {
    let schema = |message: String| Error::Schema {
        file: path.to_path_buf(),
        message,
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(path, io),
            other => schema(format!("{other:?}")),
        })?;

    let header: Vec<String> = reader
        .headers()
        .map_err(|e| schema(e.to_string()))?
        .iter()
        .map(str::to_owned)
        .collect();
    if header.first().map(String::as_str) != Some("time") {
        return Err(schema("first column must be 'time'".into()));
    }
    if header.len() < 2 {
        return Err(schema("no joint columns after 'time'".into()));
    }
    let joints = header[1..].to_vec();

    let mut time = Vec::new();
    let mut series = vec![Vec::new(); joints.len()];
    for (row, record) in reader.records().enumerate() {
        // header is line 1
        let line = row + 2;
        let record = record.map_err(|e| schema(format!("line {line}: {e}")))?;
        if record.len() != header.len() {
            return Err(schema(format!(
                "line {line}: expected {} fields, found {}",
                header.len(),
                record.len()
            )));
        }
        let mut values = record.iter().enumerate().map(|(c, field)| {
            field.parse::<f64>().map_err(|_| {
                schema(format!(
                    "line {line}, column '{}': cannot parse '{field}'",
                    header[c]
                ))
            })
        });
        let t = values.next().expect("record has at least two fields")?;
        let validation =
            |what: String| Error::Validation(format!("{}: line {line}: {what}", path.display()));
        if !t.is_finite() {
            return Err(validation("non-finite time".into()));
        }
        if let Some(prev) = time.last() {
            if t <= *prev {
                return Err(validation(format!(
                    "time {t} is not greater than previous {prev}"
                )));
            }
        }
        time.push(t);
        for (j, v) in values.enumerate() {
            let v = v?;
            if !v.is_finite() {
                return Err(validation(format!("non-finite value for '{}'", joints[j])));
            }
            series[j].push(v);
        }
    }

    let rep = Repetition::new(time, series).map_err(|e| match e {
        Error::Validation(msg) => Error::Validation(format!("{}: {msg}", path.display())),
        other => other,
    })?;
    Ok((joints, rep))
}

/// Loads every `*.csv` file of `root` (non-recursive, lexicographic order) as
/// one repetition. The dataset is named after the directory.
pub fn load_dataset(root: &Path, unit: AngleUnit) -> Result<Dataset> {
    let mut files: Vec<PathBuf> = fs::read_dir(root)
        .map_err(|e| Error::io(root, e))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| {
            p.is_file()
                && p.extension()
                    .is_some_and(|ext| ext.eq_ignore_ascii_case("csv"))
        })
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(Error::Validation(format!(
            "no repetitions found in {}",
            root.display()
        )));
    }

    let mut joints: Option<Vec<String>> = None;
    let mut reps = Vec::with_capacity(files.len());
    for file in &files {
        let (header, rep) = read_repetition_csv(file)?;
        match &joints {
            None => joints = Some(header),
            Some(expected) if *expected != header => {
                return Err(Error::Schema {
                    file: file.clone(),
                    message: format!(
                        "header {header:?} does not match {expected:?} from {}",
                        files[0].display()
                    ),
                })
            }
            Some(_) => {}
        }
        reps.push(rep);
    }

    let name = root
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| root.display().to_string());
    Dataset::new(name, joints.expect("at least one file"), reps, unit)
}

/// Writes one `rep_NNN.csv` per repetition into `dir` (created if needed).
/// Values use the shortest representation that round-trips.
pub fn write_dataset(ds: &Dataset, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let width = ds.n_reps().to_string().len().max(3);
    ds.reps()
        .iter()
        .enumerate()
        .map(|(r, rep)| {
            let path = dir.join(format!("rep_{:0width$}.csv", r + 1));
            let mut out = String::new();
            out.push_str("time");
            for j in ds.joints() {
                out.push(',');
                out.push_str(j);
            }
            out.push('\n');
            for t in 0..rep.len() {
                out.push_str(&rep.time()[t].to_string());
                for j in 0..rep.n_joints() {
                    out.push(',');
                    out.push_str(&rep.series(j)[t].to_string());
                }
                out.push('\n');
            }
            fs::write(&path, out).map_err(|e| Error::io(&path, e))?;
            Ok(path)
        })
        .collect()
}
