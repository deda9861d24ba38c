//! Binary PGM (P5) spectrogram images and range-profile CSV.

use std::io::Write;

use crate::error::{Error, Result};
use crate::tf::Spectrogram;

/// Displayed dynamic range below the brightest pixel.
pub const DYNAMIC_RANGE_DB: f64 = 80.0;

/// Gray levels of `20 log10 |S|` clamped to `[max - 80 dB, max]`; one image
/// row per frequency row (negative frequencies on top), one column per frame.
pub fn spectrogram_gray(spec: &Spectrogram) -> Vec<u8> {
    let db: Vec<f64> = spec.data().iter().map(|v| 20.0 * v.norm().log10()).collect();
    let max = db.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return vec![0; db.len()];
    }
    let lo = max - DYNAMIC_RANGE_DB;
    db.iter()
        .map(|d| {
            let t = ((d - lo) / DYNAMIC_RANGE_DB).clamp(0.0, 1.0);
            (t * 255.0).round() as u8
        })
        .collect()
}

pub fn write_pgm<W: Write>(mut w: W, width: usize, height: usize, pixels: &[u8]) -> Result<()> {
    if pixels.len() != width * height {
        return Err(Error::ShapeMismatch(format!("{} pixels for {}x{}", pixels.len(), width, height)));
    }
    write!(w, "P5\n{width} {height}\n255\n")?;
    w.write_all(pixels)?;
    Ok(())
}

pub fn render_spectrogram<W: Write>(w: W, spec: &Spectrogram) -> Result<()> {
    write_pgm(w, spec.cols(), spec.rows(), &spectrogram_gray(spec))
}

/// Parses a P5 image with maxval 255: `(width, height, pixels)`.
pub fn read_pgm(data: &[u8]) -> Result<(usize, usize, Vec<u8>)> {
    let mut fields = Vec::new();
    let mut pos = 0;
    while fields.len() < 4 {
        while pos < data.len() && data[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if pos < data.len() && data[pos] == b'#' {
            while pos < data.len() && data[pos] != b'\n' {
                pos += 1;
            }
            continue;
        }
        let start = pos;
        while pos < data.len() && !data[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(Error::Format("truncated PGM header".into()));
        }
        fields.push(String::from_utf8_lossy(&data[start..pos]).into_owned());
    }
    pos += 1;
    if fields[0] != "P5" {
        return Err(Error::Format(format!("expected P5, found {}", fields[0])));
    }
    let num = |s: &str| s.parse::<usize>().map_err(|_| Error::Format(format!("bad PGM number {s:?}")));
    let (w, h, maxval) = (num(&fields[1])?, num(&fields[2])?, num(&fields[3])?);
    if maxval != 255 {
        return Err(Error::Format(format!("maxval {maxval} unsupported")));
    }
    let pixels = data.get(pos..pos + w * h).ok_or_else(|| Error::Format("truncated PGM raster".into()))?;
    Ok((w, h, pixels.to_vec()))
}

/// Two columns: frequency of each fft-shifted bin and its level in dB.
pub fn write_range_profile_csv<W: Write>(mut w: W, profile_db: &[f64], sampling_frequency_hz: f64) -> Result<()> {
    let n = profile_db.len();
    writeln!(w, "frequency_hz,level_db")?;
    for (i, db) in profile_db.iter().enumerate() {
        let f = (i as f64 - (n / 2) as f64) * sampling_frequency_hz / n as f64;
        writeln!(w, "{f},{db}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tf::StftConfig;
    use num_complex::Complex64;

    #[test]
    fn zero_map_renders_uniform() {
        let spec = Spectrogram::zeros(StftConfig::desk_64(), 10, 100);
        let mut out = Vec::new();
        render_spectrogram(&mut out, &spec).unwrap();
        let (w, h, px) = read_pgm(&out).unwrap();
        assert_eq!((w, h), (10, 64));
        assert!(px.iter().all(|&p| p == px[0]));
    }

    #[test]
    fn levels_span_eighty_db() {
        let mut spec = Spectrogram::zeros(StftConfig::desk_64(), 3, 100);
        spec.set(0, 0, Complex64::new(1e4, 0.0));
        spec.set(1, 1, Complex64::new(1.0, 0.0));
        spec.set(2, 2, Complex64::new(1e2, 0.0));
        let g = spectrogram_gray(&spec);
        assert_eq!(g[0], 255);
        assert_eq!(g[4], 0);
        assert_eq!(g[8], 128);
    }

    #[test]
    fn header_with_comment_parses() {
        let (w, h, px) = read_pgm(b"P5\n# note\n2 1\n255\n\x01\x02").unwrap();
        assert_eq!((w, h, px), (2, 1, vec![1, 2]));
        assert!(read_pgm(b"P2\n2 1\n255\n12").is_err());
    }

    #[test]
    fn range_profile_columns() {
        let mut out = Vec::new();
        write_range_profile_csv(&mut out, &[-200.0, 0.0, 3.5, -1.0], 4.0).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text, "frequency_hz,level_db\n-2,-200\n-1,0\n0,3.5\n1,-1\n");
    }
}
