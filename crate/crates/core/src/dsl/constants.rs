use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::state::CMatrix;

/// Named matrices referenced by `mat(...)`.
pub type Constants = BTreeMap<String, CMatrix>;

/// Reads a constants file: a JSON object mapping names to row-major complex
/// matrices whose entries are `[re, im]` pairs.
///
/// ```json
/// { "U": [[[0, 0], [1, 0]], [[1, 0], [0, 0]]] }
/// ```
pub fn parse_constants(json: &str) -> Result<Constants> {
    let raw: BTreeMap<String, Vec<Vec<[f64; 2]>>> =
        serde_json::from_str(json).map_err(|e| Error::InvalidArgument(format!("constants file: {e}")))?;
    raw.into_iter()
        .map(|(name, rows)| {
            let nrows = rows.len();
            let ncols = rows.first().map_or(0, Vec::len);
            if nrows == 0 || rows.iter().any(|r| r.len() != ncols) {
                return Err(Error::InvalidArgument(format!("constants file: matrix `{name}` is empty or ragged")));
            }
            let entries: Vec<Complex64> = rows.iter().flatten().map(|&[re, im]| Complex64::new(re, im)).collect();
            if !entries.iter().all(|c| c.re.is_finite() && c.im.is_finite()) {
                return Err(Error::InvalidArgument(format!("constants file: matrix `{name}` has non-finite entries")));
            }
            Ok((name, CMatrix::from_row_slice(nrows, ncols, &entries)))
        })
        .collect()
}
