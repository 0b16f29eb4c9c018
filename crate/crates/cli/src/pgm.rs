//! Binary 16-bit PGM (P5, big-endian samples) with a linear intensity map.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::CliError;

/// `value = min + (max − min) · sample / 65535`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scaling {
    pub file: String,
    pub min: f64,
    pub max: f64,
}

/// Writes a column-major `n_v × n_h` frame with the vertical index as image rows.
pub fn write_frame(path: &Path, frame: &[f64], n_v: usize, n_h: usize) -> Result<Scaling, CliError> {
    assert_eq!(frame.len(), n_v * n_h, "frame size");
    let (min, max) = frame
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| (l.min(*v), h.max(*v)));
    let span = max - min;
    let mut bytes = format!("P5\n{n_h} {n_v}\n65535\n").into_bytes();
    bytes.reserve(2 * frame.len());
    for i in 0..n_v {
        for j in 0..n_h {
            let v = frame[i + n_v * j];
            let sample = if span > 0.0 { ((v - min) / span * 65535.0).round() as u16 } else { 0 };
            bytes.extend_from_slice(&sample.to_be_bytes());
        }
    }
    let mut file = fs::File::create(path)?;
    file.write_all(&bytes)?;
    Ok(Scaling {
        file: path.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default(),
        min,
        max,
    })
}

/// Reads a frame written by [`write_frame`], returning column-major values and `(n_v, n_h)`.
pub fn read_frame(path: &Path, scaling: &Scaling) -> Result<(Vec<f64>, usize, usize), CliError> {
    let bytes = fs::read(path)?;
    let bad = || CliError::Format(format!("{} is not a 16-bit P5 image", path.display()));
    // header: magic, width, height, maxval separated by single whitespace
    let mut fields = Vec::new();
    let mut pos = 0;
    while fields.len() < 4 {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(bad());
        }
        fields.push(std::str::from_utf8(&bytes[start..pos]).map_err(|_| bad())?.to_string());
    }
    pos += 1;
    if fields[0] != "P5" || fields[3] != "65535" {
        return Err(bad());
    }
    let n_h: usize = fields[1].parse().map_err(|_| bad())?;
    let n_v: usize = fields[2].parse().map_err(|_| bad())?;
    let data = bytes.get(pos..).ok_or_else(bad)?;
    if data.len() != 2 * n_v * n_h {
        return Err(bad());
    }
    let mut frame = vec![0.0; n_v * n_h];
    for (k, pair) in data.chunks_exact(2).enumerate() {
        let sample = u16::from_be_bytes([pair[0], pair[1]]) as f64;
        let (i, j) = (k / n_h, k % n_h);
        frame[i + n_v * j] = scaling.min + (scaling.max - scaling.min) * sample / 65535.0;
    }
    Ok((frame, n_v, n_h))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_within_quantization() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.pgm");
        let (n_v, n_h) = (5, 3);
        let frame: Vec<f64> = (0..15).map(|k| (k as f64 * 0.37).sin()).collect();
        let scaling = write_frame(&path, &frame, n_v, n_h).unwrap();
        assert_eq!(scaling.file, "f.pgm");
        let (back, v, h) = read_frame(&path, &scaling).unwrap();
        assert_eq!((v, h), (n_v, n_h));
        let step = (scaling.max - scaling.min) / 65535.0;
        for (a, b) in frame.iter().zip(&back) {
            assert!((a - b).abs() <= 0.5 * step + 1e-15);
        }
        let bytes = fs::read(&path).unwrap();
        assert!(bytes.starts_with(b"P5\n3 5\n65535\n"));
        assert_eq!(bytes.len(), "P5\n3 5\n65535\n".len() + 30);
    }

    #[test]
    fn constant_frame_maps_to_zero_samples() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.pgm");
        let scaling = write_frame(&path, &[0.25; 4], 2, 2).unwrap();
        let (back, _, _) = read_frame(&path, &scaling).unwrap();
        assert_eq!(back, vec![0.25; 4]);
    }
}
