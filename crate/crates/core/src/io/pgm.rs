//! Binary 8-bit PGM (`P5`) export. Field row `i` becomes image row `i`.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::Field;

/// Default display window for `u`.
pub const U_WINDOW: (f64, f64) = (0.0, 1.0);
/// Default display window for `v`.
pub const V_WINDOW: (f64, f64) = (0.0, 0.5);

pub fn encode_pgm(f: &Field, lo: f64, hi: f64) -> Result<Vec<u8>> {
    if !(lo < hi) {
        return Err(Error::Parameter(format!("image window needs lo < hi, got [{lo}, {hi}]")));
    }
    let mut out = format!("P5\n{} {}\n255\n", f.ny(), f.nx()).into_bytes();
    out.reserve(f.len());
    let span = hi - lo;
    out.extend(f.data().iter().map(|&x| {
        let t = ((x - lo) / span).clamp(0.0, 1.0);
        (255.0 * t).round() as u8
    }));
    Ok(out)
}

pub fn export_image(f: &Field, path: impl AsRef<Path>, lo: f64, hi: f64) -> Result<()> {
    let path = path.as_ref();
    let bytes = encode_pgm(f, lo, hi)?;
    fs::write(path, bytes).map_err(|e| Error::io("writing image", path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pixels(bytes: &[u8], n: usize) -> &[u8] {
        &bytes[bytes.len() - n..]
    }

    #[test]
    fn window_endpoints() {
        let lo = Field::constant(3, 5, -0.2).unwrap();
        let b = encode_pgm(&lo, -0.2, 0.7).unwrap();
        assert!(b.starts_with(b"P5\n5 3\n255\n"));
        assert_eq!(b.len(), "P5\n5 3\n255\n".len() + 15);
        assert!(pixels(&b, 15).iter().all(|&p| p == 0));

        let hi = Field::constant(3, 5, 0.7).unwrap();
        let b = encode_pgm(&hi, -0.2, 0.7).unwrap();
        assert!(pixels(&b, 15).iter().all(|&p| p == 255));
    }

    #[test]
    fn ramp_is_monotone_along_rows() {
        let ramp = Field::from_fn(4, 50, |_, j| -0.1 + 0.6 * j as f64 / 49.0).unwrap();
        let b = encode_pgm(&ramp, 0.0, 0.5).unwrap();
        let px = pixels(&b, 200);
        for row in px.chunks(50) {
            assert!(row.windows(2).all(|w| w[0] <= w[1]));
            assert_eq!(row[0], 0);
            assert_eq!(row[49], 255);
        }
    }

    #[test]
    fn rounding_and_orientation() {
        let mut f = Field::zeros(2, 3).unwrap();
        f[(0, 2)] = 0.5;
        f[(1, 0)] = 1.0;
        let b = encode_pgm(&f, 0.0, 1.0).unwrap();
        assert_eq!(pixels(&b, 6), &[0, 0, 128, 255, 0, 0]);
    }

    #[test]
    fn inverted_window_rejected() {
        let f = Field::zeros(2, 2).unwrap();
        assert!(matches!(encode_pgm(&f, 1.0, 1.0), Err(Error::Parameter(_))));
        assert!(matches!(encode_pgm(&f, 2.0, 1.0), Err(Error::Parameter(_))));
    }
}
