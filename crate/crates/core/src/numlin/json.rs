use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::ComplexMatrix;

/// Wire form of a matrix: `{"rows": R, "cols": C, "data": [[re, im], ...]}`, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<[f64; 2]>,
}

impl From<&ComplexMatrix> for MatrixJson {
    fn from(m: &ComplexMatrix) -> Self {
        Self {
            rows: m.rows(),
            cols: m.cols(),
            data: m.to_row_major().into_iter().map(|z| [z.re, z.im]).collect(),
        }
    }
}

impl TryFrom<MatrixJson> for ComplexMatrix {
    type Error = super::NumlinError;

    fn try_from(raw: MatrixJson) -> Result<Self, Self::Error> {
        let data = raw.data.into_iter().map(|[re, im]| Complex64::new(re, im)).collect();
        ComplexMatrix::new(raw.rows, raw.cols, data)
    }
}

impl Serialize for ComplexMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        MatrixJson::from(self).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = MatrixJson::deserialize(deserializer)?;
        ComplexMatrix::try_from(raw).map_err(serde::de::Error::custom)
    }
}
