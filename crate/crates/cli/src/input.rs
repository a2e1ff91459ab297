use std::path::Path;

use crate::CliError;

/// Reads lifetimes from a one-column CSV with an optional header row.
pub fn read_lifetimes(path: &Path) -> Result<Vec<f64>, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let mut values = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        let Some(field) = record.get(0).filter(|f| !f.is_empty()) else {
            continue;
        };
        match field.parse::<f64>() {
            Ok(v) if v > 0.0 && v.is_finite() => values.push(v),
            Ok(v) => {
                return Err(CliError::Input(format!(
                    "{}: row {}: lifetime {v} is not positive and finite",
                    path.display(),
                    i + 1
                )))
            }
            Err(_) if i == 0 => {}
            Err(_) => {
                return Err(CliError::Input(format!(
                    "{}: row {}: cannot parse {field:?} as a number",
                    path.display(),
                    i + 1
                )))
            }
        }
    }
    if values.len() < 2 {
        return Err(CliError::Input(format!("{}: need at least 2 lifetimes", path.display())));
    }
    Ok(values)
}

/// Lifetimes from `--data FILE` or a bundled `--dataset NAME`.
pub fn load(data: Option<&Path>, dataset: Option<&str>) -> Result<Vec<f64>, CliError> {
    match (data, dataset) {
        (Some(p), None) => read_lifetimes(p),
        (None, Some(name)) => gwchart::datasets::by_name(name)
            .ok_or_else(|| CliError::Input(format!("unknown dataset {name:?} (try bladder or bladder128)"))),
        (None, None) => Err(CliError::Input("give --data FILE or --dataset NAME".into())),
        (Some(_), Some(_)) => Err(CliError::Input("--data and --dataset are exclusive".into())),
    }
}

pub fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}
