//! Substitution matrices in the plain-text table format: `#` comments, a
//! header row of residue letters, then one row per letter. Rows are either
//! full (one value per header letter) or upper-triangular (row `i` lists
//! columns `i..n`).

use crate::error::{QmoError, Result};

pub const BLOSUM62_TEXT: &str = include_str!("../../data/blosum62.txt");

/// SHA-256 of `data/blosum62.txt`.
pub const BLOSUM62_SHA256: &str =
    "2b78344351b348c0adcee78454e7310d6081b6714c08daa99a28e8fff5d622ae";

const ABSENT: u8 = u8::MAX;

#[derive(Debug, Clone, PartialEq)]
pub struct SubstitutionMatrix {
    letters: Vec<u8>,
    index: [u8; 256],
    scores: Vec<i32>,
}

impl SubstitutionMatrix {
    pub fn blosum62() -> Self {
        Self::parse(BLOSUM62_TEXT).expect("bundled BLOSUM62 table is well formed")
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(n, l)| (n + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

        let (hline, header) = lines
            .next()
            .ok_or_else(|| QmoError::Config("substitution matrix: missing header row".into()))?;
        let letters = parse_letters(header, hline)?;
        let n = letters.len();
        let mut index = [ABSENT; 256];
        for (i, &c) in letters.iter().enumerate() {
            if index[c as usize] != ABSENT {
                return Err(bad(hline, format!("duplicate residue {:?}", c as char)));
            }
            index[c as usize] = i as u8;
        }

        let mut scores = vec![None; n * n];
        let mut rows = 0;
        for (lineno, line) in lines {
            let mut tokens = line.split_whitespace();
            let row_letter = single_letter(tokens.next().unwrap_or_default(), lineno)?;
            let r = match index[row_letter as usize] {
                ABSENT => return Err(bad(lineno, format!("row {:?} not in header", row_letter as char))),
                r => r as usize,
            };
            let values = tokens
                .map(|t| t.parse::<i32>().map_err(|_| bad(lineno, format!("bad score {t:?}"))))
                .collect::<Result<Vec<_>>>()?;
            let first_col = if values.len() == n {
                0
            } else if values.len() == n - r {
                r
            } else {
                return Err(bad(
                    lineno,
                    format!("expected {n} or {} values, found {}", n - r, values.len()),
                ));
            };
            for (k, v) in values.into_iter().enumerate() {
                let c = first_col + k;
                if scores[r * n + c].is_some() {
                    return Err(bad(lineno, "duplicate row".into()));
                }
                scores[r * n + c] = Some(v);
            }
            rows += 1;
        }
        if rows != n {
            return Err(QmoError::Config(format!(
                "substitution matrix: expected {n} rows, found {rows}"
            )));
        }

        // Mirror upper-triangular entries; reject asymmetric full tables.
        for r in 0..n {
            for c in 0..n {
                match (scores[r * n + c], scores[c * n + r]) {
                    (Some(a), Some(b)) if a != b => {
                        return Err(QmoError::Config(format!(
                            "substitution matrix is asymmetric at ({}, {}): {a} vs {b}",
                            letters[r] as char, letters[c] as char
                        )))
                    }
                    (None, Some(b)) => scores[r * n + c] = Some(b),
                    (None, None) => {
                        return Err(QmoError::Config(format!(
                            "substitution matrix: missing entry ({}, {})",
                            letters[r] as char, letters[c] as char
                        )))
                    }
                    _ => {}
                }
            }
        }

        Ok(SubstitutionMatrix {
            letters,
            index,
            scores: scores.into_iter().map(|s| s.unwrap()).collect(),
        })
    }

    pub fn letters(&self) -> &[u8] {
        &self.letters
    }

    pub fn contains(&self, residue: u8) -> bool {
        self.index[residue as usize] != ABSENT
    }

    pub fn score(&self, a: u8, b: u8) -> Result<i32> {
        let (i, j) = (self.index[a as usize], self.index[b as usize]);
        if i == ABSENT || j == ABSENT {
            let missing = if i == ABSENT { a } else { b };
            return Err(QmoError::Domain(format!(
                "residue {:?} is not in the substitution matrix",
                missing as char
            )));
        }
        Ok(self.scores[i as usize * self.letters.len() + j as usize])
    }

    pub(crate) fn index_of(&self, residue: u8) -> Option<usize> {
        match self.index[residue as usize] {
            ABSENT => None,
            i => Some(i as usize),
        }
    }

    pub(crate) fn score_at(&self, i: usize, j: usize) -> i32 {
        self.scores[i * self.letters.len() + j]
    }
}

fn bad(line: usize, msg: String) -> QmoError {
    QmoError::Config(format!("substitution matrix line {line}: {msg}"))
}

fn single_letter(token: &str, line: usize) -> Result<u8> {
    match token.as_bytes() {
        [c] => Ok(*c),
        _ => Err(bad(line, format!("expected a residue letter, found {token:?}"))),
    }
}

fn parse_letters(header: &str, line: usize) -> Result<Vec<u8>> {
    header
        .split_whitespace()
        .map(|t| single_letter(t, line))
        .collect()
}
