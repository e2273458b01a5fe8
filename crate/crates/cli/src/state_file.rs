//! Quantum states stored as TOML.
//!
//! A pure state lists `[re, im]` amplitude pairs, a mixed state lists rows of
//! `[re, im]` density-matrix entries:
//!
//! ```toml
//! amplitudes = [[0.6, 0.0], [0.0, 0.8]]
//! ```
//!
//! ```toml
//! density = [[[0.5, 0.0], [0.0, -0.1]], [[0.0, 0.1], [0.5, 0.0]]]
//! ```

use std::path::Path;

use qwgan::qcore::{Complex, ComplexMatrix, DensityMatrix, PureState};
use serde::Deserialize;

use crate::error::CliError;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct StateFile {
    amplitudes: Option<Vec<[f64; 2]>>,
    density: Option<Vec<Vec<[f64; 2]>>>,
}

/// A state read from disk, remembering whether it was given as a vector.
#[derive(Clone, Debug)]
pub enum LoadedState {
    Pure(PureState),
    Mixed(DensityMatrix),
}

impl LoadedState {
    pub fn density(&self) -> DensityMatrix {
        match self {
            LoadedState::Pure(v) => v.to_density(),
            LoadedState::Mixed(rho) => rho.clone(),
        }
    }

    pub fn as_pure(&self) -> Option<&PureState> {
        match self {
            LoadedState::Pure(v) => Some(v),
            LoadedState::Mixed(_) => None,
        }
    }
}

fn complex(pair: &[f64; 2]) -> Complex {
    Complex::new(pair[0], pair[1])
}

pub fn parse_state(text: &str) -> Result<LoadedState, CliError> {
    let file: StateFile =
        toml::from_str(text).map_err(|e| CliError::Usage(format!("state file: {e}")))?;
    match (file.amplitudes, file.density) {
        (Some(a), None) => Ok(LoadedState::Pure(PureState::new(
            a.iter().map(complex).collect(),
        )?)),
        (None, Some(rows)) => {
            let rows: Vec<Vec<Complex>> = rows
                .iter()
                .map(|r| r.iter().map(complex).collect())
                .collect();
            Ok(LoadedState::Mixed(DensityMatrix::new(
                ComplexMatrix::from_rows(&rows)?,
            )?))
        }
        _ => Err(CliError::Usage(
            "state file: exactly one of `amplitudes` or `density` is required".into(),
        )),
    }
}

pub fn load_state(path: &Path) -> Result<LoadedState, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_state(&text)
}
