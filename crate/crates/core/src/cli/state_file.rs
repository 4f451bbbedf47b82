//! JSON state files: `{"dims": [a, b], "matrix": [[re, im], ...]}` with the
//! `(a·b)²` entries in row-major order.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{ComplexMatrix, C64};
use crate::states::{BipartiteDensity, DENSITY_TOL};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateFile {
    pub dims: [usize; 2],
    pub matrix: Vec<[f64; 2]>,
}

impl StateFile {
    pub fn from_density(rho: &BipartiteDensity) -> Self {
        Self {
            dims: [rho.dim_a(), rho.dim_b()],
            matrix: rho
                .matrix()
                .entries()
                .iter()
                .map(|z| [z.re, z.im])
                .collect(),
        }
    }

    /// Validates as a density matrix with [`DENSITY_TOL`].
    pub fn to_density(&self) -> Result<BipartiteDensity> {
        let [a, b] = self.dims;
        if a == 0 || b == 0 {
            return Err(Error::Dimension(format!(
                "dims must be positive, got [{a}, {b}]"
            )));
        }
        let n = a * b;
        let entries = self
            .matrix
            .iter()
            .map(|&[re, im]| C64::new(re, im))
            .collect();
        let matrix = ComplexMatrix::new(n, n, entries)?;
        BipartiteDensity::with_tolerance(a, b, matrix, DENSITY_TOL)
    }

    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text)
            .map_err(|e| Error::InvalidState(format!("malformed state file: {e}")))
    }

    /// Full-precision JSON; floats round-trip exactly.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("state file serializes")
    }
}
