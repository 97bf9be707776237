//! JSON state files.
//!
//! ```json
//! { "dims": [2, 2], "amplitudes": [[0.7071067811865476, 0], [0, 0], [0, 0], [0.7071067811865476, 0]] }
//! { "dims": [2], "matrix": [[[0.5, 0], [0, 0]], [[0, 0], [0.5, 0]]] }
//! ```
//!
//! Complex numbers are `[re, im]` pairs. Floats are written in shortest
//! round-trip form, so a read after a write reproduces every bit.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::states::{Ensemble, PureState, State};
use crate::tensor::{CMatrix, DensityMatrix, RegisterShape, C64};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateFile {
    pub dims: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitudes: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<[f64; 2]>>>,
}

fn pair(z: C64) -> [f64; 2] {
    [z.re, z.im]
}

impl From<&State> for StateFile {
    fn from(state: &State) -> Self {
        match state {
            State::Pure(p) => StateFile {
                dims: p.shape().dims().to_vec(),
                amplitudes: Some(p.amplitudes().iter().copied().map(pair).collect()),
                matrix: None,
            },
            State::Mixed(m) => {
                let d = m.dim();
                let rows = (0..d)
                    .map(|r| (0..d).map(|c| pair(m.matrix()[(r, c)])).collect())
                    .collect();
                StateFile {
                    dims: m.shape().dims().to_vec(),
                    amplitudes: None,
                    matrix: Some(rows),
                }
            }
        }
    }
}

impl TryFrom<StateFile> for State {
    type Error = Error;

    fn try_from(file: StateFile) -> Result<State> {
        let shape = RegisterShape::new(file.dims)?;
        let d = shape.total_dim();
        match (file.amplitudes, file.matrix) {
            (Some(amps), None) => {
                let amps = amps.into_iter().map(|[re, im]| C64::new(re, im)).collect();
                Ok(State::Pure(PureState::new(shape, amps)?))
            }
            (None, Some(rows)) => {
                if rows.len() != d || rows.iter().any(|r| r.len() != d) {
                    return Err(Error::Format(format!("matrix must be {d}x{d}")));
                }
                let m = CMatrix::from_fn(d, d, |r, c| {
                    let [re, im] = rows[r][c];
                    C64::new(re, im)
                });
                Ok(State::Mixed(DensityMatrix::new(shape, m)?))
            }
            (Some(_), Some(_)) => Err(Error::Format(
                "state file has both `amplitudes` and `matrix`".into(),
            )),
            (None, None) => Err(Error::Format(
                "state file needs `amplitudes` or `matrix`".into(),
            )),
        }
    }
}

pub fn state_from_json(text: &str) -> Result<State> {
    let file: StateFile = serde_json::from_str(text)?;
    file.try_into()
}

pub fn state_to_json(state: &State) -> Result<String> {
    Ok(serde_json::to_string(&StateFile::from(state))?)
}

pub fn read_state(path: impl AsRef<Path>) -> Result<State> {
    state_from_json(&std::fs::read_to_string(path)?)
}

pub fn write_state(path: impl AsRef<Path>, state: &State) -> Result<()> {
    std::fs::write(path, state_to_json(state)?)?;
    Ok(())
}

/// Serialized decomposition: weights plus one state file per member.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnsembleFile {
    pub weights: Vec<f64>,
    pub states: Vec<StateFile>,
}

impl From<&Ensemble> for EnsembleFile {
    fn from(e: &Ensemble) -> Self {
        EnsembleFile {
            weights: e.weights().to_vec(),
            states: e.members().iter().map(StateFile::from).collect(),
        }
    }
}
