use crate::error::{QmoError, Result};

pub const DEFAULT_FINGERPRINT_WIDTH: usize = 2048;

/// Fixed-width bit fingerprint.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Fingerprint {
    width: usize,
    words: Vec<u64>,
}

impl Fingerprint {
    pub fn new(width: usize) -> Result<Self> {
        if width == 0 {
            return Err(QmoError::Domain("fingerprint width must be positive".into()));
        }
        Ok(Fingerprint {
            width,
            words: vec![0; width.div_ceil(64)],
        })
    }

    pub fn from_bits(width: usize, bits: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut fp = Fingerprint::new(width)?;
        for b in bits {
            fp.set(b)?;
        }
        Ok(fp)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn set(&mut self, bit: usize) -> Result<()> {
        if bit >= self.width {
            return Err(QmoError::Domain(format!(
                "bit {bit} out of range for width {}",
                self.width
            )));
        }
        self.words[bit / 64] |= 1 << (bit % 64);
        Ok(())
    }

    pub fn get(&self, bit: usize) -> bool {
        bit < self.width && self.words[bit / 64] & (1 << (bit % 64)) != 0
    }

    pub fn count_ones(&self) -> u32 {
        self.words.iter().map(|w| w.count_ones()).sum()
    }
}

/// `|a ∧ b| / |a ∨ b|`. Two all-zero fingerprints give 0.
pub fn tanimoto(a: &Fingerprint, b: &Fingerprint) -> Result<f64> {
    if a.width != b.width {
        return Err(QmoError::Domain(format!(
            "fingerprint width mismatch: {} vs {}",
            a.width, b.width
        )));
    }
    let (mut inter, mut union) = (0u32, 0u32);
    for (x, y) in a.words.iter().zip(&b.words) {
        inter += (x & y).count_ones();
        union += (x | y).count_ones();
    }
    if union == 0 {
        return Ok(0.0);
    }
    Ok(f64::from(inter) / f64::from(union))
}
