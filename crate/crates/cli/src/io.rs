use std::path::Path;

use nalgebra::DMatrix;
use serde::de::DeserializeOwned;
use serde_json::Value;

use freespec::{MatPoly, Pencil, SymTuple};

use crate::CliError;

pub fn read_json<T: DeserializeOwned>(path: &Path, what: &str) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("cannot read {what} {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Input(format!("malformed {what} {}: {e}", path.display())))
}

pub fn pencil(path: &Option<std::path::PathBuf>, what: &str) -> Result<Pencil, CliError> {
    read_json(path.as_deref().ok_or_else(|| CliError::Usage(format!("missing {what}")))?, what)
}

pub fn tuple(path: &Option<std::path::PathBuf>, what: &str) -> Result<SymTuple, CliError> {
    read_json(path.as_deref().ok_or_else(|| CliError::Usage(format!("missing {what}")))?, what)
}

pub fn poly(path: &Option<std::path::PathBuf>) -> Result<MatPoly, CliError> {
    read_json(path.as_deref().ok_or_else(|| CliError::Usage("missing polynomial".into()))?, "polynomial")
}

/// `zero` means the origin at level 1.
pub fn point(spec: &str, g: usize) -> Result<SymTuple, CliError> {
    if spec == "zero" {
        return Ok(SymTuple::zeros(g, 1));
    }
    read_json(Path::new(spec), "point")
}

pub fn rows(m: &DMatrix<f64>) -> Value {
    Value::from(freespec::linalg::matrix_to_rows(m))
}

pub fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("model types serialize")
}

pub fn from_value<T: DeserializeOwned>(v: &Value, what: &str) -> Result<T, CliError> {
    serde_json::from_value(v.clone()).map_err(|e| CliError::Input(format!("malformed {what}: {e}")))
}

pub fn matrix(v: &Value, what: &str) -> Result<DMatrix<f64>, CliError> {
    let r: Vec<Vec<f64>> = from_value(v, what)?;
    freespec::linalg::rows_to_matrix(&r, None).map_err(|e| CliError::Input(format!("malformed {what}: {e}")))
}

pub fn dump_sdp(path: &Option<std::path::PathBuf>, p: &freespec_sdp::SdpProblem) -> Result<(), CliError> {
    if let Some(path) = path {
        std::fs::write(path, freespec_sdp::to_sdpa(p)).map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_point_is_level_one() {
        let z = point("zero", 3).unwrap();
        assert_eq!((z.g(), z.n()), (3, 1));
    }

    #[test]
    fn malformed_file_is_input_error() {
        let dir = std::env::temp_dir().join(format!("freespec-io-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let p = dir.join("bad.json");
        std::fs::write(&p, "{\"d\": 2, \"A0\": ").unwrap();
        match pencil(&Some(p), "pencil") {
            Err(CliError::Input(m)) => assert!(m.contains("malformed")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn matrix_roundtrip() {
        let m = DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        assert_eq!(matrix(&rows(&m), "m").unwrap(), m);
    }
}
