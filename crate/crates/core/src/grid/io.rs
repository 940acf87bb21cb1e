//! QVG1 grid files.
//!
//! Little-endian layout:
//!
//! ```text
//! offset  size  field
//! 0       4     magic "QVG1"
//! 4       4     u32 version (= 1)
//! 8       12    u32 nx, ny, nz
//! 20      24    f64 origin[3]
//! 44      24    f64 spacing[3]
//! 68      1     u8 dtype (0 = interleaved complex f64)
//! 69      ...   nx*ny*nz (re, im) f64 pairs, x fastest
//! ```

use std::fs;
use std::io::Write;
use std::path::Path;

use num_complex::Complex64;

use super::{ComplexGrid3, GridSpec};
use crate::{Error, Result};

pub const QVG_MAGIC: &[u8; 4] = b"QVG1";
pub const QVG_VERSION: u32 = 1;
const DTYPE_COMPLEX_F64: u8 = 0;
const HEADER_LEN: usize = 69;

pub fn write_grid(g: &ComplexGrid3, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let bytes = encode(g)?;
    let mut file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(&bytes).map_err(|e| Error::io(path, e))?;
    Ok(())
}

pub fn read_grid(path: impl AsRef<Path>) -> Result<ComplexGrid3> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode(&bytes)
}

pub(crate) fn encode(g: &ComplexGrid3) -> Result<Vec<u8>> {
    let spec = g.spec();
    let dims: Vec<u32> = spec
        .dims
        .iter()
        .map(|&d| u32::try_from(d).map_err(|_| Error::DimsOverflow))
        .collect::<Result<_>>()?;
    let mut out = Vec::with_capacity(HEADER_LEN + 16 * g.values().len());
    out.extend_from_slice(QVG_MAGIC);
    out.extend_from_slice(&QVG_VERSION.to_le_bytes());
    for d in dims {
        out.extend_from_slice(&d.to_le_bytes());
    }
    for v in spec.origin.iter().chain(&spec.spacing) {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out.push(DTYPE_COMPLEX_F64);
    for v in g.values() {
        out.extend_from_slice(&v.re.to_le_bytes());
        out.extend_from_slice(&v.im.to_le_bytes());
    }
    Ok(out)
}

pub(crate) fn decode(bytes: &[u8]) -> Result<ComplexGrid3> {
    if bytes.len() < 4 || &bytes[..4] != QVG_MAGIC {
        return Err(Error::BadMagic);
    }
    if bytes.len() < HEADER_LEN {
        return Err(Error::TruncatedPayload {
            expected: HEADER_LEN as u64,
            found: bytes.len() as u64,
        });
    }
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
    let f64_at = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());

    let version = u32_at(4);
    if version != QVG_VERSION {
        return Err(Error::UnsupportedVersion(version));
    }
    let dims = [u32_at(8) as usize, u32_at(12) as usize, u32_at(16) as usize];
    let origin = [f64_at(20), f64_at(28), f64_at(36)];
    let spacing = [f64_at(44), f64_at(52), f64_at(60)];
    let dtype = bytes[68];
    if dtype != DTYPE_COMPLEX_F64 {
        return Err(Error::UnsupportedDtype(dtype));
    }

    let expected = dims
        .iter()
        .try_fold(16u64, |acc, &d| acc.checked_mul(d as u64))
        .filter(|&n| usize::try_from(n).is_ok())
        .ok_or(Error::DimsOverflow)?;
    let found = (bytes.len() - HEADER_LEN) as u64;
    if found < expected {
        return Err(Error::TruncatedPayload { expected, found });
    }
    if found > expected {
        return Err(Error::TrailingData { expected, found });
    }

    let spec = GridSpec::new(dims, origin, spacing)?;
    let values = bytes[HEADER_LEN..]
        .chunks_exact(16)
        .map(|c| {
            Complex64::new(
                f64::from_le_bytes(c[..8].try_into().unwrap()),
                f64::from_le_bytes(c[8..].try_into().unwrap()),
            )
        })
        .collect();
    ComplexGrid3::from_values(spec, values)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ComplexGrid3 {
        let spec = GridSpec::new([4, 5, 6], [-1.0, 0.5, 2.0], [0.25, 0.5, 0.125]).unwrap();
        let values = (0..spec.len())
            .map(|i| Complex64::new((i as f64).sin(), -(i as f64) * 1e-3))
            .collect();
        ComplexGrid3::from_values(spec, values).unwrap()
    }

    #[test]
    fn header_layout() {
        let bytes = encode(&sample()).unwrap();
        assert_eq!(&bytes[..4], b"QVG1");
        assert_eq!(u32::from_le_bytes(bytes[4..8].try_into().unwrap()), 1);
        assert_eq!(u32::from_le_bytes(bytes[8..12].try_into().unwrap()), 4);
        assert_eq!(u32::from_le_bytes(bytes[16..20].try_into().unwrap()), 6);
        assert_eq!(f64::from_le_bytes(bytes[20..28].try_into().unwrap()), -1.0);
        assert_eq!(f64::from_le_bytes(bytes[60..68].try_into().unwrap()), 0.125);
        assert_eq!(bytes[68], 0);
        assert_eq!(bytes.len(), 69 + 16 * 120);
        // first payload pair is value 0 = (sin 0, -0)
        assert_eq!(f64::from_le_bytes(bytes[77..85].try_into().unwrap()), -0.0);
    }

    #[test]
    fn corrupt_magic() {
        let mut bytes = encode(&sample()).unwrap();
        bytes[0] = b'X';
        assert!(matches!(decode(&bytes), Err(Error::BadMagic)));
        assert!(matches!(decode(b"QV"), Err(Error::BadMagic)));
    }

    #[test]
    fn dims_disagreeing_with_payload() {
        let mut bytes = encode(&sample()).unwrap();
        bytes[16..20].copy_from_slice(&7u32.to_le_bytes());
        assert!(matches!(
            decode(&bytes),
            Err(Error::TruncatedPayload { .. })
        ));
        let mut bytes = encode(&sample()).unwrap();
        bytes.truncate(bytes.len() - 3);
        assert!(matches!(
            decode(&bytes),
            Err(Error::TruncatedPayload { .. })
        ));
        let mut bytes = encode(&sample()).unwrap();
        bytes.extend_from_slice(&[0; 16]);
        assert!(matches!(decode(&bytes), Err(Error::TrailingData { .. })));
    }

    #[test]
    fn dims_overflow() {
        let mut bytes = encode(&sample()).unwrap();
        for o in [8, 12, 16] {
            bytes[o..o + 4].copy_from_slice(&u32::MAX.to_le_bytes());
        }
        assert!(matches!(decode(&bytes), Err(Error::DimsOverflow)));
    }

    #[test]
    fn wrong_version_and_dtype() {
        let mut bytes = encode(&sample()).unwrap();
        bytes[4] = 2;
        assert!(matches!(decode(&bytes), Err(Error::UnsupportedVersion(2))));
        let mut bytes = encode(&sample()).unwrap();
        bytes[68] = 1;
        assert!(matches!(decode(&bytes), Err(Error::UnsupportedDtype(1))));
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.qvg");
        let g = sample();
        write_grid(&g, &path).unwrap();
        let back = read_grid(&path).unwrap();
        assert_eq!(back.spec(), g.spec());
        for (a, b) in back.values().iter().zip(g.values()) {
            assert_eq!(a.re.to_bits(), b.re.to_bits());
            assert_eq!(a.im.to_bits(), b.im.to_bits());
        }
    }
}
