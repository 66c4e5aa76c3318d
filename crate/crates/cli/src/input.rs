use std::path::Path;

use sandwichpost::working_model::RegressionObs;

use crate::CliError;

/// Reads a `y,x` CSV into observations with an intercept.
pub fn read_dataset(path: &Path) -> Result<Vec<RegressionObs>, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::parse(format!("cannot read {}: {e}", path.display())))?;
    let headers = reader
        .headers()
        .map_err(|e| CliError::parse(format!("{}: line 1: {e}", path.display())))?;
    if headers.iter().collect::<Vec<_>>() != ["y", "x"] {
        return Err(CliError::parse(format!(
            "{}: line 1: expected header `y,x`, found `{}`",
            path.display(),
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }

    let mut data = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e
                .position()
                .map_or(String::new(), |p| format!("line {}: ", p.line()));
            CliError::parse(format!("{}: {line}{e}", path.display()))
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let field = |i: usize, name: &str| -> Result<f64, CliError> {
            let raw = &record[i];
            raw.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| {
                    CliError::parse(format!(
                        "{}: line {line}: `{name}` is not a finite number: `{raw}`",
                        path.display()
                    ))
                })
        };
        let y = field(0, "y")?;
        let x = field(1, "x")?;
        data.push(RegressionObs::with_intercept(y, &[x]));
    }
    if data.is_empty() {
        return Err(CliError::parse(format!("{}: no data rows", path.display())));
    }
    Ok(data)
}
