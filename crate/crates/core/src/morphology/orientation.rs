//! The 24 axis-aligned rotations, applied exactly to lattice sets.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::lattice::LatticeSet;
use crate::error::{Error, Result};

/// Signed permutation with determinant +1.
///
/// Written as three signed source axes, one per target axis: `"+z+y-x"` maps
/// a point `(x, y, z)` to `(z, y, -x)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Orientation {
    src: [usize; 3],
    neg: [bool; 3],
}

impl Default for Orientation {
    fn default() -> Self {
        Orientation::IDENTITY
    }
}

impl Orientation {
    pub const IDENTITY: Orientation = Orientation { src: [0, 1, 2], neg: [false; 3] };

    fn det(src: [usize; 3], neg: [bool; 3]) -> i32 {
        // parity of the permutation times the product of signs
        let inversions = (0..3).flat_map(|i| (i + 1..3).map(move |j| (i, j))).filter(|&(i, j)| src[i] > src[j]).count();
        let sign = if inversions % 2 == 0 { 1 } else { -1 };
        sign * neg.iter().map(|&n| if n { -1 } else { 1 }).product::<i32>()
    }

    pub fn new(src: [usize; 3], neg: [bool; 3]) -> Result<Self> {
        let mut seen = [false; 3];
        for &s in &src {
            if s > 2 || seen[s] {
                return Err(Error::Parse(format!("{src:?} is not a permutation of the axes")));
            }
            seen[s] = true;
        }
        if Self::det(src, neg) != 1 {
            return Err(Error::Parse("orientation must be a proper rotation (determinant +1)".into()));
        }
        Ok(Orientation { src, neg })
    }

    /// All 24 proper rotations, identity first.
    pub fn all() -> Vec<Orientation> {
        let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
        let mut out = Vec::with_capacity(24);
        for src in perms {
            for bits in 0..8u8 {
                let neg = [bits & 1 != 0, bits & 2 != 0, bits & 4 != 0];
                if let Ok(o) = Orientation::new(src, neg) {
                    out.push(o);
                }
            }
        }
        out
    }

    pub fn apply(&self, p: [i64; 3]) -> [i64; 3] {
        [0, 1, 2].map(|a| if self.neg[a] { -p[self.src[a]] } else { p[self.src[a]] })
    }

    pub fn rotate(&self, s: &LatticeSet) -> LatticeSet {
        if *self == Self::IDENTITY {
            return s.clone();
        }
        LatticeSet::from_points(s.points().map(|p| self.apply(p)))
    }
}

impl fmt::Display for Orientation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for a in 0..3 {
            write!(f, "{}{}", if self.neg[a] { '-' } else { '+' }, ['x', 'y', 'z'][self.src[a]])?;
        }
        Ok(())
    }
}

impl FromStr for Orientation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let chars: Vec<char> = s.trim().chars().collect();
        if chars.len() != 6 {
            return Err(Error::Parse(format!("orientation {s:?} must look like \"+x+y+z\"")));
        }
        let mut src = [0; 3];
        let mut neg = [false; 3];
        for a in 0..3 {
            neg[a] = match chars[2 * a] {
                '+' => false,
                '-' => true,
                c => return Err(Error::Parse(format!("bad sign {c:?} in orientation {s:?}"))),
            };
            src[a] = match chars[2 * a + 1] {
                'x' => 0,
                'y' => 1,
                'z' => 2,
                c => return Err(Error::Parse(format!("bad axis {c:?} in orientation {s:?}"))),
            };
        }
        Orientation::new(src, neg)
    }
}

impl TryFrom<String> for Orientation {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Orientation> for String {
    fn from(o: Orientation) -> String {
        o.to_string()
    }
}
