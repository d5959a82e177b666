//! 3-profile vectors: counts of induced empty, single-edge, wedge and triangle
//! triples.

use serde::Serialize;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ProfileVector<T> {
    pub n0: T,
    pub n1: T,
    pub n2: T,
    pub n3: T,
}

/// Exact counts. Global sums reach `C(|V|, 3)`, so 128 bits.
pub type ExactProfile = ProfileVector<u128>;

/// Signed real estimates; entries may be negative.
pub type EstimatedProfile = ProfileVector<f64>;

impl<T: Copy> ProfileVector<T> {
    pub fn from_array([n0, n1, n2, n3]: [T; 4]) -> Self {
        ProfileVector { n0, n1, n2, n3 }
    }

    pub fn to_array(self) -> [T; 4] {
        [self.n0, self.n1, self.n2, self.n3]
    }

    pub fn map<U>(self, f: impl Fn(T) -> U) -> ProfileVector<U> {
        ProfileVector {
            n0: f(self.n0),
            n1: f(self.n1),
            n2: f(self.n2),
            n3: f(self.n3),
        }
    }
}

impl ExactProfile {
    pub fn total(&self) -> u128 {
        self.n0 + self.n1 + self.n2 + self.n3
    }

    pub fn to_f64(self) -> EstimatedProfile {
        self.map(|x| x as f64)
    }
}

impl EstimatedProfile {
    pub fn total(&self) -> f64 {
        self.n0 + self.n1 + self.n2 + self.n3
    }
}

#[inline]
pub fn choose2(n: u64) -> u64 {
    if n < 2 {
        0
    } else {
        n * (n - 1) / 2
    }
}

#[inline]
pub fn choose3(n: u64) -> u128 {
    if n < 3 {
        0
    } else {
        let n = n as u128;
        n * (n - 1) * (n - 2) / 6
    }
}
