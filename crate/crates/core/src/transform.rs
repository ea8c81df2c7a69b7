//! GF(2) machinery: binary matrices, Kronecker powers, bit reversal, the
//! polar butterfly, and the compound transform over `l` sub-channels.
//!
//! Bits are plain `u8` values in `{0, 1}`. Vectors multiply matrices from the
//! left (`x = u · M`), matching the usual row-vector convention for polar
//! generator matrices.
//!
//! # Compound transform layout
//!
//! For a kernel `g0` of size `l` and depth `n` the block length is
//! `N = l · 2^n` and `M = 2^n`. The input `u` is split into `l` chunks of `M`
//! bits; chunk `c` is polar-encoded at depth `n` into lane `c`. Coded position
//! `k · l + j` then carries bit `j` of `(lane_0[k], …, lane_{l-1}[k]) · g0`,
//! and the default assignment routes it to channel `j`, slot `k`.
//!
//! With `g0` the `l × l` Arikan matrix `R_l G^{⊗m}` the whole transform is
//! exactly the length-`2^(n+m)` polar transform, so one deep butterfly both
//! encodes and decodes it.

use std::fmt;
use std::str::FromStr;

use crate::{Error, Result};

/// Largest kernel size supported anywhere in the crate.
pub const MAX_KERNEL: usize = 8;

/// Dense binary matrix, row-major.
#[derive(Clone, PartialEq, Eq)]
pub struct BinMatrix {
    rows: usize,
    cols: usize,
    data: Vec<u8>,
}

impl fmt::Debug for BinMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = (0..self.rows).map(|r| self.row_string(r)).collect();
        write!(f, "BinMatrix[{}]", rows.join(" "))
    }
}

impl BinMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<u8>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Parameter("matrix dimensions must be positive".into()));
        }
        if data.len() != rows * cols {
            return Err(Error::Length {
                expected: rows * cols,
                actual: data.len(),
            });
        }
        check_bits(&data)?;
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[&[u8]]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::Parameter("ragged matrix rows".into()));
        }
        Self::new(rows.len(), cols, rows.concat())
    }

    pub fn identity(size: usize) -> Self {
        let mut data = vec![0; size * size];
        for i in 0..size {
            data[i * size + i] = 1;
        }
        Self {
            rows: size,
            cols: size,
            data,
        }
    }

    /// The 2×2 polarization kernel `[[1, 0], [1, 1]]`.
    pub fn polar_kernel() -> Self {
        Self {
            rows: 2,
            cols: 2,
            data: vec![1, 0, 1, 1],
        }
    }

    /// `R_l G^{⊗m}` for `l = 2^m`: the Arikan transform matrix of size `l`.
    pub fn arikan(m: u32) -> Self {
        let g = kronecker_power(&Self::polar_kernel(), m).expect("kernel is square");
        let size = g.rows;
        let rev = bit_reversal(m);
        let mut data = vec![0; size * size];
        for (r, &src) in rev.iter().enumerate() {
            data[r * size..(r + 1) * size].copy_from_slice(g.row(src));
        }
        Self {
            rows: size,
            cols: size,
            data,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> u8 {
        self.data[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> &[u8] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    fn row_string(&self, r: usize) -> String {
        self.row(r).iter().map(|b| if *b == 1 { '1' } else { '0' }).collect()
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kronecker(&self, other: &Self) -> Self {
        let rows = self.rows * other.rows;
        let cols = self.cols * other.cols;
        let mut data = vec![0; rows * cols];
        for r1 in 0..self.rows {
            for c1 in 0..self.cols {
                if self.get(r1, c1) == 0 {
                    continue;
                }
                for r2 in 0..other.rows {
                    let r = r1 * other.rows + r2;
                    for c2 in 0..other.cols {
                        data[r * cols + c1 * other.cols + c2] = other.get(r2, c2);
                    }
                }
            }
        }
        Self { rows, cols, data }
    }

    /// Matrix product over GF(2).
    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::Length {
                expected: self.cols,
                actual: other.rows,
            });
        }
        let mut data = vec![0; self.rows * other.cols];
        for r in 0..self.rows {
            for k in 0..self.cols {
                if self.get(r, k) == 1 {
                    for c in 0..other.cols {
                        data[r * other.cols + c] ^= other.get(k, c);
                    }
                }
            }
        }
        Ok(Self {
            rows: self.rows,
            cols: other.cols,
            data,
        })
    }

    /// Row vector times matrix, `u · self`.
    pub fn left_mul(&self, u: &[u8]) -> Result<Vec<u8>> {
        if u.len() != self.rows {
            return Err(Error::Length {
                expected: self.rows,
                actual: u.len(),
            });
        }
        let mut x = vec![0u8; self.cols];
        for (r, _) in u.iter().enumerate().filter(|(_, b)| **b == 1) {
            for (xc, m) in x.iter_mut().zip(self.row(r)) {
                *xc ^= m;
            }
        }
        Ok(x)
    }

    pub fn is_upper_triangular(&self) -> bool {
        (0..self.rows).all(|r| (0..r.min(self.cols)).all(|c| self.get(r, c) == 0))
    }

    /// Gaussian elimination over GF(2).
    pub fn is_invertible(&self) -> bool {
        if !self.is_square() {
            return false;
        }
        let n = self.rows;
        let mut m: Vec<Vec<u8>> = (0..n).map(|r| self.row(r).to_vec()).collect();
        for col in 0..n {
            let Some(pivot) = (col..n).find(|&r| m[r][col] == 1) else {
                return false;
            };
            m.swap(col, pivot);
            for r in 0..n {
                if r != col && m[r][col] == 1 {
                    for c in 0..n {
                        m[r][c] ^= m[col][c];
                    }
                }
            }
        }
        true
    }

    /// Each row packed into the low `cols` bits of a byte, column `j` at bit `j`.
    pub(crate) fn row_masks(&self) -> Vec<u8> {
        debug_assert!(self.cols <= 8);
        (0..self.rows)
            .map(|r| {
                self.row(r)
                    .iter()
                    .enumerate()
                    .fold(0u8, |acc, (j, b)| acc | (b << j))
            })
            .collect()
    }
}

impl fmt::Display for BinMatrix {
    /// Rows as bit strings separated by spaces, e.g. `10 11`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = (0..self.rows).map(|r| self.row_string(r)).collect();
        f.write_str(&rows.join(" "))
    }
}

impl FromStr for BinMatrix {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let rows = s
            .split_whitespace()
            .map(|row| {
                row.chars()
                    .map(|ch| match ch {
                        '0' => Ok(0u8),
                        '1' => Ok(1u8),
                        other => Err(Error::Parse(format!("bad matrix digit {other:?}"))),
                    })
                    .collect::<Result<Vec<u8>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        if rows.is_empty() {
            return Err(Error::Parse("empty matrix".into()));
        }
        let refs: Vec<&[u8]> = rows.iter().map(Vec::as_slice).collect();
        Self::from_rows(&refs)
    }
}

fn check_bits(bits: &[u8]) -> Result<()> {
    match bits.iter().position(|b| *b > 1) {
        Some(i) => Err(Error::InvalidInput(format!(
            "entry {i} is {}, not a bit",
            bits[i]
        ))),
        None => Ok(()),
    }
}

/// `g^{⊗n}`, with `g^{⊗0}` the 1×1 identity.
pub fn kronecker_power(g: &BinMatrix, n: u32) -> Result<BinMatrix> {
    if !g.is_square() {
        return Err(Error::Parameter(format!(
            "kronecker power of a non-square {}x{} matrix",
            g.rows, g.cols
        )));
    }
    let mut acc = BinMatrix::identity(1);
    for _ in 0..n {
        acc = acc.kronecker(g);
    }
    Ok(acc)
}

fn bit_reversal(depth: u32) -> Vec<usize> {
    let size = 1usize << depth;
    (0..size)
        .map(|i| if depth == 0 { 0 } else { i.reverse_bits() >> (usize::BITS - depth) })
        .collect()
}

/// Bit-reversal permutation of `[N]`, `perm[i]` = `i` with its `log2 N` bits reversed.
pub fn bit_reversal_perm(block_length: usize) -> Result<Vec<usize>> {
    if !block_length.is_power_of_two() {
        return Err(Error::Parameter(format!(
            "{block_length} is not a power of two"
        )));
    }
    Ok(bit_reversal(block_length.trailing_zeros()))
}

/// In-place `v ← v · G^{⊗d}` on `v.len() / stride` interleaved lanes.
fn butterfly(v: &mut [u8], stride: usize) {
    let blocks = v.len() / stride;
    let mut half = 1;
    while half < blocks {
        for base in (0..blocks).step_by(2 * half) {
            for t in base..base + half {
                for lane in 0..stride {
                    v[t * stride + lane] ^= v[(t + half) * stride + lane];
                }
            }
        }
        half *= 2;
    }
}

/// `u · R_N G^{⊗n}` in `O(N log N)`.
pub fn polar_encode(u: &[u8], n: u32) -> Result<Vec<u8>> {
    let size = 1usize << n;
    if u.len() != size {
        return Err(Error::Length {
            expected: size,
            actual: u.len(),
        });
    }
    check_bits(u)?;
    let rev = bit_reversal(n);
    let mut x: Vec<u8> = rev.iter().map(|&r| u[r]).collect();
    butterfly(&mut x, 1);
    Ok(x)
}

/// `default_assignment[j]` for coded position `j = k·l + c` is the stream
/// position `c·(N/l) + k`: channel `c`, slot `k`.
pub fn default_assignment(block_length: usize, l: usize) -> Result<Vec<usize>> {
    if l == 0 || block_length % l != 0 {
        return Err(Error::Parameter(format!(
            "{l} channels do not divide block length {block_length}"
        )));
    }
    let per_channel = block_length / l;
    Ok((0..block_length)
        .map(|j| (j % l) * per_channel + j / l)
        .collect())
}

/// `g0` is usable as a compound kernel: invertible and not upper triangular,
/// or the trivial 1×1 kernel.
pub fn validate_g0(g0: &BinMatrix) -> bool {
    if !g0.is_square() {
        return false;
    }
    if g0.rows == 1 {
        return g0.get(0, 0) == 1;
    }
    g0.is_invertible() && !g0.is_upper_triangular()
}

/// Geometry of a compound polar code.
#[derive(Debug, Clone, PartialEq)]
pub struct CompoundSpec {
    g0: BinMatrix,
    depth: u32,
    assignment: Vec<usize>,
    frozen: Vec<bool>,
}

impl CompoundSpec {
    /// Spec with an explicit assignment and frozen set (sorted or not).
    pub fn new(g0: BinMatrix, depth: u32, assignment: Vec<usize>, frozen: &[usize]) -> Result<Self> {
        if !validate_g0(&g0) {
            return Err(Error::InvalidSpec(format!(
                "kernel {g0} is singular or upper triangular"
            )));
        }
        if g0.rows > MAX_KERNEL {
            return Err(Error::Unsupported(format!(
                "kernel size {} exceeds {MAX_KERNEL}",
                g0.rows
            )));
        }
        let block_length = g0.rows << depth;
        if assignment.len() != block_length {
            return Err(Error::InvalidSpec(format!(
                "assignment has {} entries for block length {block_length}",
                assignment.len()
            )));
        }
        let mut seen = vec![false; block_length];
        for &a in &assignment {
            if a >= block_length || std::mem::replace(&mut seen[a], true) {
                return Err(Error::InvalidSpec("assignment is not a permutation".into()));
            }
        }
        let mut mask = vec![false; block_length];
        for &f in frozen {
            if f >= block_length {
                return Err(Error::InvalidSpec(format!(
                    "frozen index {f} out of range"
                )));
            }
            mask[f] = true;
        }
        Ok(Self {
            g0,
            depth,
            assignment,
            frozen: mask,
        })
    }

    /// Compound code with the default assignment and nothing frozen.
    pub fn with_kernel(g0: BinMatrix, depth: u32) -> Result<Self> {
        let assignment = default_assignment(g0.rows() << depth, g0.rows())?;
        Self::new(g0, depth, assignment, &[])
    }

    /// Plain length-`2^depth` polar code.
    pub fn polar(depth: u32) -> Self {
        Self::with_kernel(BinMatrix::identity(1), depth).expect("trivial kernel is valid")
    }

    /// `l = 2^m` sub-channels with the Arikan kernel.
    pub fn power_of_two(m: u32, depth: u32) -> Result<Self> {
        Self::with_kernel(BinMatrix::arikan(m), depth)
    }

    /// Replaces the frozen set.
    pub fn with_frozen(mut self, frozen: &[usize]) -> Result<Self> {
        let mut mask = vec![false; self.block_length()];
        for &f in frozen {
            if f >= mask.len() {
                return Err(Error::InvalidSpec(format!("frozen index {f} out of range")));
            }
            mask[f] = true;
        }
        self.frozen = mask;
        Ok(self)
    }

    /// Freezes the complement of `info`.
    pub fn with_information_set(self, info: &[usize]) -> Result<Self> {
        let n = self.block_length();
        let mut is_info = vec![false; n];
        for &i in info {
            if i >= n {
                return Err(Error::InvalidSpec(format!("information index {i} out of range")));
            }
            is_info[i] = true;
        }
        let frozen: Vec<usize> = (0..n).filter(|&i| !is_info[i]).collect();
        self.with_frozen(&frozen)
    }

    pub fn num_channels(&self) -> usize {
        self.g0.rows()
    }

    pub fn kernel(&self) -> &BinMatrix {
        &self.g0
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn block_length(&self) -> usize {
        self.g0.rows() << self.depth
    }

    /// Bits per sub-channel, `N / l`.
    pub fn channel_length(&self) -> usize {
        1 << self.depth
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    /// `(channel, slot)` carrying coded position `j`.
    pub fn route(&self, j: usize) -> (usize, usize) {
        let m = self.channel_length();
        (self.assignment[j] / m, self.assignment[j] % m)
    }

    pub fn frozen_mask(&self) -> &[bool] {
        &self.frozen
    }

    pub fn is_frozen(&self, i: usize) -> bool {
        self.frozen[i]
    }

    pub fn frozen_set(&self) -> Vec<usize> {
        (0..self.frozen.len()).filter(|&i| self.frozen[i]).collect()
    }

    pub fn information_set(&self) -> Vec<usize> {
        (0..self.frozen.len()).filter(|&i| !self.frozen[i]).collect()
    }

    pub fn dimension(&self) -> usize {
        self.frozen.iter().filter(|f| !**f).count()
    }

    /// Depth of the single butterfly equivalent to this transform, when there is one.
    pub fn butterfly_depth(&self) -> Option<u32> {
        let l = self.num_channels();
        if l == 1 {
            return Some(self.depth);
        }
        if !l.is_power_of_two() {
            return None;
        }
        let m = l.trailing_zeros();
        (self.g0 == BinMatrix::arikan(m)).then_some(self.depth + m)
    }

    /// Expands a per-channel list into one entry per coded position.
    pub fn per_position<T: Clone>(&self, per_channel: &[T]) -> Result<Vec<T>> {
        if per_channel.len() != self.num_channels() {
            return Err(Error::Length {
                expected: self.num_channels(),
                actual: per_channel.len(),
            });
        }
        Ok((0..self.block_length())
            .map(|j| per_channel[self.route(j).0].clone())
            .collect())
    }

    /// Places `message` on the information set, zeros elsewhere.
    pub fn embed(&self, message: &[u8]) -> Result<Vec<u8>> {
        let info = self.information_set();
        if message.len() != info.len() {
            return Err(Error::Length {
                expected: info.len(),
                actual: message.len(),
            });
        }
        let mut u = vec![0u8; self.block_length()];
        for (&i, &b) in info.iter().zip(message) {
            u[i] = b;
        }
        Ok(u)
    }

    /// Plain-text form read back by [`CompoundSpec::from_text`].
    pub fn to_text(&self) -> String {
        let join = |v: Vec<usize>| {
            v.iter().map(usize::to_string).collect::<Vec<_>>().join(" ")
        };
        format!(
            "l {}\nn {}\ng0 {}\nfrozen {}\nassignment {}\n",
            self.num_channels(),
            self.depth,
            self.g0,
            join(self.frozen_set()),
            join(self.assignment.clone()),
        )
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut l = None;
        let mut depth = None;
        let mut g0 = None;
        let mut frozen = None;
        let mut assignment = None;
        let indices = |rest: &str| -> Result<Vec<usize>> {
            rest.split_whitespace()
                .map(|t| t.parse().map_err(|e| Error::Parse(format!("index {t:?}: {e}"))))
                .collect()
        };
        for line in text.lines().map(str::trim) {
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
            match key {
                "l" => l = Some(rest.trim().parse::<usize>().map_err(|e| Error::Parse(format!("l: {e}")))?),
                "n" => depth = Some(rest.trim().parse::<u32>().map_err(|e| Error::Parse(format!("n: {e}")))?),
                "g0" => g0 = Some(rest.parse::<BinMatrix>()?),
                "frozen" => frozen = Some(indices(rest)?),
                "assignment" => assignment = Some(indices(rest)?),
                other => return Err(Error::Parse(format!("unknown key {other:?}"))),
            }
        }
        let missing = |k: &str| Error::Parse(format!("missing {k}"));
        let g0 = g0.ok_or_else(|| missing("g0"))?;
        if let Some(l) = l {
            if l != g0.rows() {
                return Err(Error::Parse(format!("l = {l} but g0 has {} rows", g0.rows())));
            }
        }
        Self::new(
            g0,
            depth.ok_or_else(|| missing("n"))?,
            assignment.ok_or_else(|| missing("assignment"))?,
            &frozen.unwrap_or_default(),
        )
    }
}

/// The compound transform in coded-position order (see the module docs).
pub fn compound_transform(u: &[u8], spec: &CompoundSpec) -> Result<Vec<u8>> {
    let n = spec.block_length();
    if u.len() != n {
        return Err(Error::Length {
            expected: n,
            actual: u.len(),
        });
    }
    check_bits(u)?;
    let l = spec.num_channels();
    let m = spec.channel_length();
    let rev = bit_reversal(spec.depth());
    let mut lanes = vec![0u8; n];
    for c in 0..l {
        for r in 0..m {
            lanes[rev[r] * l + c] = u[c * m + r];
        }
    }
    butterfly(&mut lanes, l);
    if l == 1 {
        return Ok(lanes);
    }
    let masks = spec.kernel().row_masks();
    let mut x = vec![0u8; n];
    for k in 0..m {
        let block = &lanes[k * l..(k + 1) * l];
        let mixed = block
            .iter()
            .zip(&masks)
            .filter(|(b, _)| **b == 1)
            .fold(0u8, |acc, (_, mask)| acc ^ mask);
        for j in 0..l {
            x[k * l + j] = (mixed >> j) & 1;
        }
    }
    Ok(x)
}

/// Encodes and routes: one stream of `N / l` bits per sub-channel.
pub fn compound_encode(u: &[u8], spec: &CompoundSpec) -> Result<Vec<Vec<u8>>> {
    let x = compound_transform(u, spec)?;
    Ok(route_to_streams(&x, spec))
}

/// Splits coded-position values into per-channel streams.
pub fn route_to_streams<T: Copy + Default>(coded: &[T], spec: &CompoundSpec) -> Vec<Vec<T>> {
    let m = spec.channel_length();
    let mut streams = vec![vec![T::default(); m]; spec.num_channels()];
    for (j, &v) in coded.iter().enumerate() {
        let (ch, slot) = spec.route(j);
        streams[ch][slot] = v;
    }
    streams
}

/// Inverse of [`route_to_streams`].
pub fn streams_to_coded<T: Copy + Default>(streams: &[Vec<T>], spec: &CompoundSpec) -> Vec<T> {
    (0..spec.block_length())
        .map(|j| {
            let (ch, slot) = spec.route(j);
            streams[ch][slot]
        })
        .collect()
}
