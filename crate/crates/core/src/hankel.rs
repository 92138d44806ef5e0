//! Hankel lifting of array snapshots.
//!
//! A length-M snapshot maps to an `n1 × n2` matrix with `n1 + n2 = M + 1`
//! and `H[i, j] = x[i + j]` (0-based). Element `k` of the snapshot lives on
//! anti-diagonal `i + j = k`, so an observed array element turns into a full
//! observed anti-diagonal of the matrix.
//!
//! Matrix indices in this module are 0-based; "element k" in docs that talk
//! about the physical array is 1-based, matching the virtual-array indices.

use std::collections::BTreeSet;

use faer::Mat;
use num_complex::Complex64;
use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::array::{Snapshot, TargetScene};
use crate::linalg;
use crate::{CMat, Error, Result};

/// Relative singular-value cutoff for numerical rank.
pub const RANK_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HankelDims {
    pub n1: usize,
    pub n2: usize,
}

impl HankelDims {
    pub fn new(n1: usize, n2: usize) -> Result<Self> {
        if n1 == 0 || n2 == 0 {
            return Err(Error::domain("Hankel dimensions must be positive"));
        }
        Ok(Self { n1, n2 })
    }

    /// Length of the vector this matrix lifts, `n1 + n2 − 1`.
    pub fn vector_len(&self) -> usize {
        self.n1 + self.n2 - 1
    }

    pub fn entries(&self) -> usize {
        self.n1 * self.n2
    }

    /// Number of matrix entries on anti-diagonal `k` (1-based element index).
    pub fn anti_diagonal_len(&self, k: usize) -> usize {
        if k == 0 || k > self.vector_len() {
            return 0;
        }
        k.min(self.n1).min(self.n2).min(self.n1 + self.n2 - k)
    }
}

/// Near-square split: `(M+1)/2` square when M is odd, `M/2 × (M/2 + 1)` when
/// M is even.
pub fn hankel_dims(m: usize) -> HankelDims {
    if m % 2 == 1 {
        HankelDims {
            n1: m.div_ceil(2),
            n2: m.div_ceil(2),
        }
    } else {
        HankelDims {
            n1: (m / 2).max(1),
            n2: m / 2 + 1,
        }
    }
}

/// Square split `n × n` with `n = ⌈M/2⌉`; for even M the last array
/// element is dropped.
pub fn hankel_dims_square(m: usize) -> HankelDims {
    let n = m.div_ceil(2).max(1);
    HankelDims { n1: n, n2: n }
}

/// Dense complex matrix lifted from (or completing) a snapshot.
#[derive(Debug, Clone, PartialEq)]
pub struct HankelMatrix {
    mat: CMat,
}

impl HankelMatrix {
    pub fn from_matrix(mat: CMat) -> Result<Self> {
        HankelDims::new(mat.nrows(), mat.ncols())?;
        Ok(Self { mat })
    }

    pub fn dims(&self) -> HankelDims {
        HankelDims {
            n1: self.mat.nrows(),
            n2: self.mat.ncols(),
        }
    }

    pub fn matrix(&self) -> &CMat {
        &self.mat
    }

    pub fn into_matrix(self) -> CMat {
        self.mat
    }

    /// Maximum deviation from constant anti-diagonals.
    pub fn hankel_defect(&self) -> f64 {
        let x = dehankel(&self.mat);
        let mut worst = 0.0f64;
        for j in 0..self.mat.ncols() {
            for i in 0..self.mat.nrows() {
                worst = worst.max((self.mat[(i, j)] - x[i + j]).norm());
            }
        }
        worst
    }
}

/// Set Ω of observed matrix entries, stored in row-major order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObservationSet {
    dims: HankelDims,
    entries: Vec<(usize, usize)>,
}

impl ObservationSet {
    /// Validates bounds and rejects duplicates; input order is irrelevant.
    pub fn from_entries(
        dims: HankelDims,
        entries: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self> {
        let mut set = BTreeSet::new();
        for (i, j) in entries {
            if i >= dims.n1 || j >= dims.n2 {
                return Err(Error::domain(format!(
                    "entry ({i}, {j}) outside {}×{}",
                    dims.n1, dims.n2
                )));
            }
            if !set.insert((i, j)) {
                return Err(Error::domain(format!("duplicate entry ({i}, {j})")));
            }
        }
        Ok(Self {
            dims,
            entries: set.into_iter().collect(),
        })
    }

    pub fn full(dims: HankelDims) -> Self {
        let entries = (0..dims.n1)
            .flat_map(|i| (0..dims.n2).map(move |j| (i, j)))
            .collect();
        Self { dims, entries }
    }

    /// Every entry on the anti-diagonals of the observed array elements.
    pub fn from_array_mask(dims: HankelDims, mask: &[bool]) -> Result<Self> {
        if mask.len() < dims.vector_len() {
            return Err(Error::DimensionMismatch {
                expected: dims.vector_len(),
                actual: mask.len(),
            });
        }
        let entries = (0..dims.n1)
            .flat_map(|i| (0..dims.n2).map(move |j| (i, j)))
            .filter(|&(i, j)| mask[i + j])
            .collect();
        Ok(Self { dims, entries })
    }

    /// `count` distinct entries drawn uniformly without replacement.
    pub fn uniform_random<R: Rng + ?Sized>(
        dims: HankelDims,
        count: usize,
        rng: &mut R,
    ) -> Result<Self> {
        if count > dims.entries() {
            return Err(Error::domain(format!(
                "cannot sample {count} of {} entries",
                dims.entries()
            )));
        }
        let mut flat = index::sample(rng, dims.entries(), count).into_vec();
        flat.sort_unstable();
        let entries = flat
            .into_iter()
            .map(|f| (f / dims.n2, f % dims.n2))
            .collect();
        Ok(Self { dims, entries })
    }

    pub fn dims(&self) -> HankelDims {
        self.dims
    }

    /// Cardinality m′.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[(usize, usize)] {
        &self.entries
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.entries.binary_search(&(i, j)).is_ok()
    }

    /// Indicator matrix of Ω.
    pub fn indicator(&self) -> Vec<bool> {
        let mut m = vec![false; self.dims.entries()];
        for &(i, j) in &self.entries {
            m[i * self.dims.n2 + j] = true;
        }
        m
    }

    /// `P_Ω(m)`: zero every entry outside Ω.
    pub fn project(&self, m: &CMat) -> CMat {
        let mut out = CMat::zeros(m.nrows(), m.ncols());
        for &(i, j) in &self.entries {
            out[(i, j)] = m[(i, j)];
        }
        out
    }
}

/// Lifts a snapshot with the default near-square split.
pub fn build_hankel(x: &Snapshot) -> Result<(HankelMatrix, ObservationSet)> {
    build_hankel_with_dims(x, hankel_dims(x.len()))
}

/// Lifts a snapshot into an `n1 × n2` Hankel matrix; elements beyond
/// `n1 + n2 − 1` are ignored.
pub fn build_hankel_with_dims(
    x: &Snapshot,
    dims: HankelDims,
) -> Result<(HankelMatrix, ObservationSet)> {
    if x.is_empty() {
        return Err(Error::domain("cannot lift an empty snapshot"));
    }
    if dims.vector_len() > x.len() {
        return Err(Error::DimensionMismatch {
            expected: dims.vector_len(),
            actual: x.len(),
        });
    }
    let v = x.values();
    let mat = Mat::from_fn(dims.n1, dims.n2, |i, j| v[i + j]);
    let omega = ObservationSet::from_array_mask(dims, x.mask())?;
    Ok((HankelMatrix { mat }, omega))
}

/// Averages each anti-diagonal, giving a vector of length `n1 + n2 − 1`.
pub fn dehankel(h: &CMat) -> Vec<Complex64> {
    let (n1, n2) = (h.nrows(), h.ncols());
    if n1 == 0 || n2 == 0 {
        return Vec::new();
    }
    let mut sums = vec![Complex64::new(0.0, 0.0); n1 + n2 - 1];
    let mut counts = vec![0usize; n1 + n2 - 1];
    for j in 0..n2 {
        for i in 0..n1 {
            sums[i + j] += h[(i, j)];
            counts[i + j] += 1;
        }
    }
    sums.iter()
        .zip(&counts)
        .map(|(s, &c)| s / c as f64)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankCheck {
    pub rank: usize,
    pub singular_values: Vec<f64>,
}

impl RankCheck {
    /// `σ_{k+1} / σ_1` (0 when fewer than `k + 1` values exist).
    pub fn tail_ratio(&self, k: usize) -> f64 {
        match (self.singular_values.first(), self.singular_values.get(k)) {
            (Some(&s1), Some(&sk)) if s1 > 0.0 => sk / s1,
            _ => 0.0,
        }
    }
}

/// Singular values of the noiseless Hankel matrix of a scene on an
/// `m`-element ULA, with the numerical rank at [`RANK_TOLERANCE`].
pub fn verify_vandermonde_rank(scene: &TargetScene, m: usize) -> Result<RankCheck> {
    let dims = hankel_dims(m);
    if scene.len() > dims.n1.min(dims.n2) {
        return Err(Error::domain(format!(
            "{} targets exceed min(n1, n2) = {}",
            scene.len(),
            dims.n1.min(dims.n2)
        )));
    }
    let x = Snapshot::full(scene.response(m)?);
    let (h, _) = build_hankel_with_dims(&x, dims)?;
    let mut sv = linalg::singular_values(h.matrix())?;
    sv.sort_by(|a, b| b.total_cmp(a));
    Ok(RankCheck {
        rank: numerical_rank(&sv, RANK_TOLERANCE),
        singular_values: sv,
    })
}

/// Count of singular values above `tol · σ_1`.
pub fn numerical_rank(singular_values: &[f64], tol: f64) -> usize {
    let top = singular_values.iter().copied().fold(0.0f64, f64::max);
    if top == 0.0 {
        return 0;
    }
    singular_values.iter().filter(|&&s| s > tol * top).count()
}
