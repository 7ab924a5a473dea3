//! Binary linear codes defined by a bipartite graph.
//!
//! Parity node `j` holds the XOR of the message bits in its neighbour set
//! `R(j)`. Indices are 0-based in memory and 1-based in the text format:
//!
//! ```text
//! k m
//! f(1) i_1 i_2 ... i_f(1)
//! ...
//! f(m) i_1 i_2 ... i_f(m)
//! ```

use std::fmt::Write as _;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result};

/// Code with `k` message nodes and one neighbour set per parity node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BipartiteCode {
    k: usize,
    parity_neighbors: Vec<Vec<usize>>,
    message_neighbors: Vec<Vec<usize>>,
}

/// Degree statistics of a code.
#[derive(Debug, Clone, PartialEq)]
pub struct Degrees {
    /// `d(i)`: number of parity nodes touching message node `i`.
    pub message: Vec<usize>,
    /// `f(j)`: number of message nodes in `R(j)`.
    pub parity: Vec<usize>,
    pub average_message: f64,
    /// Zero when the code has no parity nodes.
    pub average_parity: f64,
}

impl Degrees {
    pub fn edge_count(&self) -> usize {
        self.parity.iter().sum()
    }

    pub fn max_message(&self) -> usize {
        self.message.iter().copied().max().unwrap_or(0)
    }
}

/// Message bits followed by the parity bits they generate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Codeword {
    pub message: Vec<bool>,
    pub parity: Vec<bool>,
}

impl Codeword {
    /// Transmission order: message, then parity.
    pub fn bits(&self) -> Vec<bool> {
        let mut bits = Vec::with_capacity(self.message.len() + self.parity.len());
        bits.extend_from_slice(&self.message);
        bits.extend_from_slice(&self.parity);
        bits
    }
}

impl BipartiteCode {
    /// Builds a code from 0-based parity neighbour sets. Sets are sorted;
    /// empty sets, repeated indices and indices `>= k` are rejected.
    pub fn new(k: usize, parity_neighbors: Vec<Vec<usize>>) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidCode("k must be at least 1".into()));
        }
        let mut message_neighbors = vec![Vec::new(); k];
        let mut sets = Vec::with_capacity(parity_neighbors.len());
        for (j, mut set) in parity_neighbors.into_iter().enumerate() {
            if set.is_empty() {
                return Err(Error::InvalidCode(format!(
                    "parity node {} is empty",
                    j + 1
                )));
            }
            set.sort_unstable();
            if let Some(w) = set.windows(2).find(|w| w[0] == w[1]) {
                return Err(Error::InvalidCode(format!(
                    "parity node {} repeats message node {}",
                    j + 1,
                    w[0] + 1
                )));
            }
            if let Some(&i) = set.last().filter(|&&i| i >= k) {
                return Err(Error::InvalidCode(format!(
                    "parity node {} references message node {} > k = {k}",
                    j + 1,
                    i + 1
                )));
            }
            for &i in &set {
                message_neighbors[i].push(j);
            }
            sets.push(set);
        }
        Ok(Self {
            k,
            parity_neighbors: sets,
            message_neighbors,
        })
    }

    /// Each message bit repeated `r` times: parity node `i * r + j` copies
    /// message bit `i`.
    pub fn repetition(k: usize, r: usize) -> Result<Self> {
        if r == 0 {
            return Err(Error::InvalidCode(
                "repetition factor must be at least 1".into(),
            ));
        }
        Self::new(k, (0..k * r).map(|j| vec![j / r]).collect())
    }

    /// `m` parity nodes, each over an independent uniform `c`-subset of the
    /// message nodes.
    pub fn random_regular(k: usize, m: usize, c: usize, seed: u64) -> Result<Self> {
        if c == 0 || c > k {
            return Err(Error::InvalidCode(format!(
                "parity degree {c} must lie in 1..={k}"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sets = (0..m)
            .map(|_| index::sample(&mut rng, k, c).into_vec())
            .collect();
        Self::new(k, sets)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn m(&self) -> usize {
        self.parity_neighbors.len()
    }

    /// Codeword length `k + m`.
    pub fn len(&self) -> usize {
        self.k + self.m()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `R(j)`, sorted, 0-based.
    pub fn parity_neighbors(&self, j: usize) -> &[usize] {
        &self.parity_neighbors[j]
    }

    /// `T(i)`: parity nodes adjacent to message node `i`, ascending.
    pub fn message_neighbors(&self, i: usize) -> &[usize] {
        &self.message_neighbors[i]
    }

    pub fn degrees(&self) -> Degrees {
        let message: Vec<usize> = self.message_neighbors.iter().map(Vec::len).collect();
        let parity: Vec<usize> = self.parity_neighbors.iter().map(Vec::len).collect();
        let mean = |v: &[usize]| {
            if v.is_empty() {
                0.0
            } else {
                v.iter().sum::<usize>() as f64 / v.len() as f64
            }
        };
        Degrees {
            average_message: mean(&message),
            average_parity: mean(&parity),
            message,
            parity,
        }
    }

    /// `k / (k + m)`.
    pub fn encoded_rate(&self) -> f64 {
        self.k as f64 / self.len() as f64
    }

    /// Returns `r` if the code has exactly the layout of
    /// [`BipartiteCode::repetition`]`(k, r)`.
    pub fn repetition_factor(&self) -> Option<usize> {
        let m = self.m();
        if m == 0 || !m.is_multiple_of(self.k) {
            return None;
        }
        let r = m / self.k;
        let matches = self
            .parity_neighbors
            .iter()
            .enumerate()
            .all(|(j, set)| set.len() == 1 && set[0] == j / r);
        matches.then_some(r)
    }

    pub fn encode(&self, message: &[bool]) -> Result<Codeword> {
        if message.len() != self.k {
            return Err(Error::LengthMismatch {
                what: "message",
                expected: self.k,
                actual: message.len(),
            });
        }
        let parity = self
            .parity_neighbors
            .iter()
            .map(|set| set.iter().fold(false, |acc, &i| acc ^ message[i]))
            .collect();
        Ok(Codeword {
            message: message.to_vec(),
            parity,
        })
    }

    /// Writes the code in the text format, 1-based, with a trailing newline.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{} {}", self.k, self.m()).unwrap();
        for set in &self.parity_neighbors {
            write!(out, "{}", set.len()).unwrap();
            for i in set {
                write!(out, " {}", i + 1).unwrap();
            }
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().map(|(n, l)| (n + 1, l));
        let parse_err = |line, message: String| Error::Parse { line, message };
        if let Some(pos) = text.find('\r') {
            let line = text[..pos].matches('\n').count() + 1;
            return Err(parse_err(
                line,
                "carriage return; lines must end in a bare newline".into(),
            ));
        }

        let (line_no, header) = lines
            .next()
            .ok_or_else(|| parse_err(1, "missing header \"k m\"".into()))?;
        let fields = parse_fields(line_no, header)?;
        let [k, m] = fields[..] else {
            return Err(parse_err(
                line_no,
                format!("header needs 2 fields, found {}", fields.len()),
            ));
        };
        if k == 0 {
            return Err(parse_err(line_no, "k must be at least 1".into()));
        }

        let mut sets = Vec::with_capacity(m);
        for j in 0..m {
            let (line_no, line) = lines.next().ok_or_else(|| {
                parse_err(
                    line_no + j + 1,
                    format!("expected {m} parity lines, found {j}"),
                )
            })?;
            let fields = parse_fields(line_no, line)?;
            let Some((&degree, indices)) = fields.split_first() else {
                return Err(parse_err(line_no, "empty parity line".into()));
            };
            if degree == 0 {
                return Err(parse_err(
                    line_no,
                    "parity degree must be at least 1".into(),
                ));
            }
            if indices.len() != degree {
                return Err(parse_err(
                    line_no,
                    format!(
                        "declared degree {degree} but listed {} indices",
                        indices.len()
                    ),
                ));
            }
            let mut set: Vec<usize> = Vec::with_capacity(degree);
            for &i in indices {
                if i == 0 || i > k {
                    return Err(parse_err(line_no, format!("index {i} outside 1..={k}")));
                }
                match set.last() {
                    Some(&prev) if prev + 1 == i => {
                        return Err(parse_err(line_no, format!("duplicate index {i}")));
                    }
                    Some(&prev) if prev + 1 > i => {
                        return Err(parse_err(
                            line_no,
                            format!("index {i} breaks increasing order"),
                        ));
                    }
                    _ => set.push(i - 1),
                }
            }
            sets.push(set);
        }
        if let Some((line_no, extra)) = lines.next() {
            return Err(parse_err(
                line_no,
                format!("unexpected trailing content {extra:?}"),
            ));
        }
        if !text.ends_with('\n') {
            return Err(parse_err(
                text.lines().count(),
                "missing trailing newline".into(),
            ));
        }
        Self::new(k, sets)
    }
}

fn parse_fields(line_no: usize, line: &str) -> Result<Vec<usize>> {
    line.split(' ')
        .map(|tok| {
            if tok.is_empty() {
                return Err(Error::Parse {
                    line: line_no,
                    message: "fields must be separated by single spaces".into(),
                });
            }
            tok.parse().map_err(|_| Error::Parse {
                line: line_no,
                message: format!("expected a nonnegative integer, found {tok:?}"),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bits(v: &[u8]) -> Vec<bool> {
        v.iter().map(|&b| b == 1).collect()
    }

    #[test]
    fn encode_repetition() {
        let code = BipartiteCode::repetition(2, 2).unwrap();
        let cw = code.encode(&bits(&[1, 0])).unwrap();
        assert_eq!(cw.bits(), bits(&[1, 0, 1, 1, 0, 0]));
    }

    #[test]
    fn encode_single_parity() {
        let code = BipartiteCode::new(2, vec![vec![0, 1]]).unwrap();
        assert_eq!(code.encode(&bits(&[1, 1])).unwrap().parity, bits(&[0]));
    }

    #[test]
    fn encode_rejects_wrong_length() {
        let code = BipartiteCode::repetition(3, 1).unwrap();
        assert!(matches!(
            code.encode(&bits(&[1, 0])),
            Err(Error::LengthMismatch {
                expected: 3,
                actual: 2,
                ..
            })
        ));
    }

    #[test]
    fn construction_rejects_bad_sets() {
        assert!(BipartiteCode::new(3, vec![vec![]]).is_err());
        assert!(BipartiteCode::new(3, vec![vec![1, 1]]).is_err());
        assert!(BipartiteCode::new(3, vec![vec![3]]).is_err());
        assert!(BipartiteCode::new(0, vec![]).is_err());
    }

    #[test]
    fn repetition_degrees() {
        let deg = BipartiteCode::repetition(3, 4).unwrap().degrees();
        assert_eq!(deg.message, vec![4; 3]);
        assert_eq!(deg.parity, vec![1; 12]);
        assert_eq!((deg.average_message, deg.average_parity), (4.0, 1.0));
    }

    #[test]
    fn single_parity_over_everything() {
        let k = 7;
        let deg = BipartiteCode::new(k, vec![(0..k).collect()])
            .unwrap()
            .degrees();
        assert_eq!(deg.message, vec![1; k]);
        assert_eq!(deg.parity, vec![k]);
    }

    #[test]
    fn random_regular_edge_count() {
        let code = BipartiteCode::random_regular(100, 100, 3, 11).unwrap();
        let deg = code.degrees();
        assert!(deg.parity.iter().all(|&f| f == 3));
        assert_eq!(deg.message.iter().sum::<usize>(), 300);
        assert_eq!(deg.edge_count(), 300);

        let small = BipartiteCode::random_regular(10, 10, 3, 5)
            .unwrap()
            .degrees();
        assert_eq!(small.message.iter().sum::<usize>(), 30);
    }

    #[test]
    fn random_regular_full_subset_and_determinism() {
        let code = BipartiteCode::random_regular(4, 2, 4, 99).unwrap();
        assert_eq!(code.parity_neighbors(0), &[0, 1, 2, 3]);
        assert_eq!(code.parity_neighbors(1), &[0, 1, 2, 3]);
        assert_eq!(
            BipartiteCode::random_regular(50, 20, 3, 8).unwrap(),
            BipartiteCode::random_regular(50, 20, 3, 8).unwrap()
        );
        assert!(BipartiteCode::random_regular(3, 2, 4, 0).is_err());
    }

    #[test]
    fn rates() {
        let k4m12 = BipartiteCode::new(4, vec![vec![0]; 12]).unwrap();
        assert_eq!(k4m12.encoded_rate(), 0.25);
        assert_eq!(BipartiteCode::new(5, vec![]).unwrap().encoded_rate(), 1.0);
        assert_eq!(BipartiteCode::repetition(5, 4).unwrap().encoded_rate(), 0.2);
        // r = ceil(2 log2 256) = 16
        let rate = BipartiteCode::repetition(256, 16).unwrap().encoded_rate();
        assert!((rate - 1.0 / 17.0).abs() < 1e-15);
    }

    #[test]
    fn repetition_layout() {
        let code = BipartiteCode::repetition(1, 3).unwrap();
        assert_eq!(code.m(), 3);
        assert!((0..3).all(|j| code.parity_neighbors(j) == [0]));
        let code = BipartiteCode::repetition(2, 1).unwrap();
        assert_eq!(code.parity_neighbors(0), &[0]);
        assert_eq!(code.parity_neighbors(1), &[1]);
        assert_eq!(
            BipartiteCode::repetition(5, 3).unwrap().repetition_factor(),
            Some(3)
        );
        assert_eq!(
            BipartiteCode::new(2, vec![vec![1], vec![0]])
                .unwrap()
                .repetition_factor(),
            None
        );
        assert_eq!(
            BipartiteCode::new(2, vec![]).unwrap().repetition_factor(),
            None
        );
    }

    #[test]
    fn text_format() {
        let code = BipartiteCode::parse("2 1\n2 1 2\n").unwrap();
        assert_eq!((code.k(), code.m()), (2, 1));
        assert_eq!(code.parity_neighbors(0), &[0, 1]);
        assert_eq!(
            BipartiteCode::repetition(2, 1).unwrap().serialize(),
            "2 2\n1 1\n1 2\n"
        );
    }

    #[test]
    fn parse_errors_name_the_line() {
        let err = BipartiteCode::parse("2 1\n2 1 3\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        let err = BipartiteCode::parse("3 2\n1 1\n2 2 2\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
        for bad in [
            "",
            "2\n",
            "x 1\n",
            "2 1\n",
            "2 1\n3 1 2\n",
            "2 1\n0\n",
            "2 1\n1 1\n1 2\n",
        ] {
            assert!(BipartiteCode::parse(bad).is_err(), "{bad:?} should fail");
        }
    }

    #[test]
    fn parse_is_strict_about_layout() {
        for bad in [
            "3 1\n2 2 1\n",
            "2 1\n2  1 2\n",
            "2 1\n2 1 2 \n",
            " 2 1\n2 1 2\n",
            "2\t1\n2 1 2\n",
            "2 1\r\n2 1 2\r\n",
            "2 1\n2 1 2",
            "2 1\n2 1 2\n\n",
        ] {
            assert!(BipartiteCode::parse(bad).is_err(), "{bad:?} should fail");
        }
        let err = BipartiteCode::parse("3 1\n2 3 1\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
    }
}
