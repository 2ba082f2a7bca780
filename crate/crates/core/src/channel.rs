//! Sneak-path read channel of a resistive crossbar.
//!
//! A cell `(i, j)` storing bit `b` is read as `ρ(b, α) = (1/R(b) + 1/(α R(1)))⁻¹`
//! plus Gaussian noise, where `α R(1)` is the equivalent resistance of its
//! sneak-path network (or no parallel path at all). The network is formed by
//! the "active" cells `(l, c)` (low resistance and failed selector) at the
//! intersections of the low-resistance cells `(l, j)` of column `j` and
//! `(i, c)` of row `i`.
//!
//! Sneak-path configurations are summarized by their type `(L; k_l, k_c)`:
//! `L` active cells spanning `k_l` rows and `k_c` columns. The type
//! distribution is obtained by exact counting, and each type is split into
//! classes of equal equivalent resistance because for `L ≥ 4` the type does
//! not determine the network.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::special::{binomial, binomial_pmf, normal_pdf};
use crate::{Bit, Error, Result};

/// Largest sneak-path count whose configurations are enumerated.
pub const MAX_PATHS: usize = 6;

const MAX_DIM: usize = 4096;

/// Physical and statistical parameters of the crossbar read channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ChannelParams {
    /// Row count.
    pub m: usize,
    /// Column count.
    pub n: usize,
    /// High-resistance state (bit 0), in ohms.
    #[serde(rename = "r0_ohm")]
    pub r0: f64,
    /// Low-resistance state (bit 1), in ohms.
    #[serde(rename = "r1_ohm")]
    pub r1: f64,
    /// Selector failure probability.
    pub p_f: f64,
    /// Probability that a cell stores 1.
    pub q1: f64,
    /// Read-noise standard deviation, in ohms.
    #[serde(rename = "sigma_eta_ohm")]
    pub sigma_eta: f64,
    /// Sneak-path counts above this are dropped and the rest renormalized.
    pub l_max: usize,
}

impl Default for ChannelParams {
    fn default() -> Self {
        ChannelParams { m: 16, n: 16, r0: 1000.0, r1: 100.0, p_f: 0.001, q1: 0.5, sigma_eta: 80.0, l_max: 4 }
    }
}

impl ChannelParams {
    pub fn with_sigma(self, sigma_eta: f64) -> Self {
        ChannelParams { sigma_eta, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if self.m < 2 || self.n < 2 {
            return Err(Error::InvalidParams("array must have at least 2 rows and 2 columns"));
        }
        if self.m > MAX_DIM || self.n > MAX_DIM {
            return Err(Error::InvalidParams("array dimension exceeds 4096"));
        }
        if !(self.r1 > 0.0 && self.r1 < self.r0 && self.r0.is_finite()) {
            return Err(Error::InvalidParams("resistances must satisfy 0 < r1 < r0"));
        }
        if !(self.sigma_eta > 0.0 && self.sigma_eta.is_finite()) {
            return Err(Error::InvalidParams("sigma_eta must be positive and finite"));
        }
        if !(0.0..=1.0).contains(&self.p_f) {
            return Err(Error::InvalidParams("p_f must lie in [0, 1]"));
        }
        if !(0.0..=1.0).contains(&self.q1) {
            return Err(Error::InvalidParams("q1 must lie in [0, 1]"));
        }
        if self.l_max > MAX_PATHS {
            return Err(Error::InvalidParams("l_max above 6 is not supported"));
        }
        Ok(())
    }

    /// Cell resistance for a stored bit.
    pub fn resistance(&self, bit: Bit) -> f64 {
        if bit == 0 {
            self.r0
        } else {
            self.r1
        }
    }
}

/// Summary `(L; k_l, k_c)` of a sneak-path configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PathTypeKey {
    /// Number of active intersection cells `L`.
    pub paths: usize,
    /// Distinct rows `k_l`.
    pub rows: usize,
    /// Distinct columns `k_c`.
    pub cols: usize,
}

impl PathTypeKey {
    pub const NONE: PathTypeKey = PathTypeKey { paths: 0, rows: 0, cols: 0 };

    pub fn new(paths: usize, rows: usize, cols: usize) -> Self {
        PathTypeKey { paths, rows, cols }
    }

    fn is_consistent(&self) -> bool {
        self.rows <= self.paths && self.cols <= self.paths && self.paths <= self.rows * self.cols
    }
}

/// Exact placement of the active intersection cells for one target cell.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PathConfig {
    cells: Vec<(usize, usize)>,
}

impl PathConfig {
    /// Builds a configuration from `(row, column)` pairs; duplicates are rejected.
    pub fn new(mut cells: Vec<(usize, usize)>) -> Result<Self> {
        cells.sort_unstable();
        if cells.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidArgument("duplicate cell in path configuration"));
        }
        Ok(PathConfig { cells })
    }

    pub fn empty() -> Self {
        PathConfig::default()
    }

    pub fn cells(&self) -> &[(usize, usize)] {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn key(&self) -> PathTypeKey {
        let (rows, cols) = self.distinct_rows_cols();
        PathTypeKey { paths: self.cells.len(), rows: rows.len(), cols: cols.len() }
    }

    fn distinct_rows_cols(&self) -> (Vec<usize>, Vec<usize>) {
        let mut rows: Vec<usize> = self.cells.iter().map(|c| c.0).collect();
        let mut cols: Vec<usize> = self.cells.iter().map(|c| c.1).collect();
        rows.sort_unstable();
        rows.dedup();
        cols.sort_unstable();
        cols.dedup();
        (rows, cols)
    }
}

/// One sneak-path type together with one equivalent-resistance class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SneakPathType {
    pub paths: usize,
    pub rows: usize,
    pub cols: usize,
    /// Equivalent sneak resistance in units of `r1`.
    pub alpha: f64,
    /// Probability mass after tail renormalization.
    pub prob: f64,
}

impl SneakPathType {
    pub fn key(&self) -> PathTypeKey {
        PathTypeKey { paths: self.paths, rows: self.rows, cols: self.cols }
    }
}

/// Measured resistance of a cell storing `bit` with sneak ratio `alpha`
/// (`None` when the cell has no sneak path).
pub fn rho(bit: Bit, alpha: Option<f64>, params: &ChannelParams) -> Result<f64> {
    let own = params.resistance(bit);
    match alpha {
        None => Ok(own),
        Some(a) if a > 0.0 && a.is_finite() => Ok(1.0 / (1.0 / own + 1.0 / (a * params.r1))),
        Some(_) => Err(Error::InvalidArgument("alpha must be positive and finite")),
    }
}

/// Equivalent resistance, in units of `r1`, of the sneak-path network of a
/// configuration.
///
/// The network has a source node, one node per distinct column and row of
/// the configuration, and a sink. Each distinct column `c` hangs off the source
/// through cell `(i, c)`, each active cell `(l, c)` joins column `c` to row
/// `l`, and each distinct row `l` reaches the sink through cell `(l, j)`. All
/// resistors are unit. Solved by nodal analysis with the sink grounded and a
/// unit current injected at the source.
pub fn solve_alpha(config: &PathConfig) -> Result<f64> {
    if config.is_empty() {
        return Err(Error::InvalidArgument("empty configuration has no sneak path"));
    }
    let (rows, cols) = config.distinct_rows_cols();
    let size = 1 + cols.len() + rows.len();
    let col_node = |c: usize| 1 + cols.binary_search(&c).unwrap();
    let row_node = |l: usize| 1 + cols.len() + rows.binary_search(&l).unwrap();

    let mut g = vec![0.0; size * size];
    let mut stamp = |a: usize, b: Option<usize>| {
        g[a * size + a] += 1.0;
        if let Some(b) = b {
            g[b * size + b] += 1.0;
            g[a * size + b] -= 1.0;
            g[b * size + a] -= 1.0;
        }
    };
    for &c in &cols {
        stamp(0, Some(col_node(c)));
    }
    for &(l, c) in config.cells() {
        stamp(col_node(c), Some(row_node(l)));
    }
    for &l in &rows {
        stamp(row_node(l), None);
    }

    let mut rhs = vec![0.0; size];
    rhs[0] = 1.0;
    solve_dense(&mut g, &mut rhs, size)?;
    Ok(rhs[0])
}

/// Gaussian elimination with partial pivoting; the solution replaces `rhs`.
fn solve_dense(a: &mut [f64], rhs: &mut [f64], n: usize) -> Result<()> {
    for col in 0..n {
        let pivot = (col..n).max_by(|&x, &y| a[x * n + col].abs().total_cmp(&a[y * n + col].abs())).unwrap();
        if a[pivot * n + col].abs() < 1e-12 {
            return Err(Error::SingularNetwork);
        }
        if pivot != col {
            for k in 0..n {
                a.swap(pivot * n + k, col * n + k);
            }
            rhs.swap(pivot, col);
        }
        for row in col + 1..n {
            let f = a[row * n + col] / a[col * n + col];
            if f == 0.0 {
                continue;
            }
            for k in col..n {
                a[row * n + k] -= f * a[col * n + k];
            }
            rhs[row] -= f * rhs[col];
        }
    }
    for row in (0..n).rev() {
        let tail: f64 = (row + 1..n).map(|k| a[row * n + k] * rhs[k]).sum();
        rhs[row] = (rhs[row] - tail) / a[row * n + row];
    }
    Ok(())
}

fn choose_u128(n: u128, k: u128) -> Result<u128> {
    if k > n {
        return Ok(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul(n - i).ok_or(Error::Overflow)? / (i + 1);
    }
    Ok(acc)
}

/// Number of `L`-subsets of a `k_l × k_c` grid that touch every row and
/// every column (inclusion–exclusion over uncovered rows and columns).
pub fn grid_cover_count(paths: usize, rows: usize, cols: usize) -> Result<u128> {
    let (mut pos, mut neg) = (0u128, 0u128);
    for a in 0..=rows {
        for b in 0..=cols {
            let cells = ((rows - a) * (cols - b)) as u128;
            let term = choose_u128(rows as u128, a as u128)?
                .checked_mul(choose_u128(cols as u128, b as u128)?)
                .and_then(|t| t.checked_mul(choose_u128(cells, paths as u128).ok()?))
                .ok_or(Error::Overflow)?;
            if (a + b) % 2 == 0 {
                pos = pos.checked_add(term).ok_or(Error::Overflow)?;
            } else {
                neg = neg.checked_add(term).ok_or(Error::Overflow)?;
            }
        }
    }
    Ok(pos - neg)
}

/// Number of placements of `L` active cells in a `u × v` candidate grid that
/// use exactly `k_l` rows and `k_c` columns.
pub fn count_arrangements(u: usize, v: usize, paths: usize, rows: usize, cols: usize) -> Result<u128> {
    let key = PathTypeKey { paths, rows, cols };
    if rows > u || cols > v || !key.is_consistent() {
        return Err(Error::InvalidArgument("inconsistent sneak-path type for candidate grid"));
    }
    choose_u128(u as u128, rows as u128)?
        .checked_mul(choose_u128(v as u128, cols as u128)?)
        .and_then(|c| c.checked_mul(grid_cover_count(paths, rows, cols).ok()?))
        .ok_or(Error::Overflow)
}

/// Untruncated probability that a cell has sneak-path type `key`.
///
/// Sums over the number `u` of low-resistance cells in the target's column
/// and `v` in its row, each binomial, and over placements of the active cells
/// in the resulting `u × v` grid (each intersection active with probability
/// `p_f q1`).
pub fn type_probability(params: &ChannelParams, key: PathTypeKey) -> Result<f64> {
    params.validate()?;
    if !key.is_consistent() || (key.paths > 0 && key.rows == 0) {
        return Err(Error::InvalidArgument("inconsistent sneak-path type"));
    }
    let (mu, nv) = ((params.m - 1) as u64, (params.n - 1) as u64);
    if key.rows as u64 > mu || key.cols as u64 > nv {
        return Ok(0.0);
    }
    let cover = grid_cover_count(key.paths, key.rows, key.cols)? as f64;
    let active = params.p_f * params.q1;
    let mut total = 0.0;
    for u in key.rows as u64..=mu {
        let pu = binomial_pmf(u, mu, params.q1);
        if pu == 0.0 {
            continue;
        }
        for v in key.cols as u64..=nv {
            let grid = u * v;
            if grid < key.paths as u64 {
                continue;
            }
            let pv = binomial_pmf(v, nv, params.q1);
            let placements = binomial(u, key.rows as u64) * binomial(v, key.cols as u64) * cover;
            let p_l = libm::pow(active, key.paths as f64) * libm::pow(1.0 - active, (grid - key.paths as u64) as f64);
            total += placements * pu * pv * p_l;
        }
    }
    Ok(total)
}

/// Distinct equivalent resistances among the configurations of one type on a
/// `k_l × k_c` grid, with the number of configurations realizing each.
pub fn alpha_classes(key: PathTypeKey) -> Result<Vec<(f64, u128)>> {
    if key.paths == 0 || !key.is_consistent() {
        return Err(Error::InvalidArgument("alpha classes need a non-empty consistent type"));
    }
    if key.paths > MAX_PATHS {
        return Err(Error::InvalidArgument("too many sneak paths to enumerate"));
    }
    let cells = key.rows * key.cols;
    let full_rows = (1u64 << key.rows) - 1;
    let full_cols = (1u64 << key.cols) - 1;
    let limit = 1u64 << cells;
    let mut alphas = Vec::new();
    let mut x: u64 = (1u64 << key.paths) - 1;
    while x < limit {
        let (mut rmask, mut cmask) = (0u64, 0u64);
        let mut members = Vec::with_capacity(key.paths);
        let mut bits = x;
        while bits != 0 {
            let idx = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            let (r, c) = (idx / key.cols, idx % key.cols);
            rmask |= 1 << r;
            cmask |= 1 << c;
            members.push((r, c));
        }
        if rmask == full_rows && cmask == full_cols {
            alphas.push(solve_alpha(&PathConfig { cells: members })?);
        }
        // next subset of equal popcount (Gosper's hack)
        let low = x & x.wrapping_neg();
        let ripple = x + low;
        x = (((ripple ^ x) >> 2) / low) | ripple;
    }
    alphas.sort_by(f64::total_cmp);
    let mut classes: Vec<(f64, u128)> = Vec::new();
    for a in alphas {
        match classes.last_mut() {
            Some((rep, count)) if (a - *rep).abs() <= 1e-9 * *rep => *count += 1,
            _ => classes.push((a, 1)),
        }
    }
    Ok(classes)
}

/// One Gaussian component of the read density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixtureComponent {
    /// Sneak ratio, `None` for the no-path component.
    pub alpha: Option<f64>,
    pub weight: f64,
    pub ln_weight: f64,
    /// Noise-free reads `[ρ(0, α), ρ(1, α)]`.
    pub means: [f64; 2],
}

impl MixtureComponent {
    pub fn mean(&self, bit: Bit) -> f64 {
        self.means[usize::from(bit != 0)]
    }
}

/// Channel parameters together with the enumerated sneak-path mixture.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelModel {
    params: ChannelParams,
    no_path_prob: f64,
    tail_mass: f64,
    types: Vec<SneakPathType>,
    components: Vec<MixtureComponent>,
    cumulative: Vec<f64>,
}

impl ChannelModel {
    pub fn new(params: ChannelParams) -> Result<Self> {
        params.validate()?;
        let mut raw = Vec::new();
        for paths in 1..=params.l_max {
            for rows in 1..=paths.min(params.m - 1) {
                for cols in 1..=paths.min(params.n - 1) {
                    let key = PathTypeKey { paths, rows, cols };
                    if !key.is_consistent() {
                        continue;
                    }
                    let p = type_probability(&params, key)?;
                    if p == 0.0 {
                        continue;
                    }
                    let classes = alpha_classes(key)?;
                    let total: u128 = classes.iter().map(|c| c.1).sum();
                    for (alpha, count) in classes {
                        raw.push((key, alpha, p * count as f64 / total as f64));
                    }
                }
            }
        }
        let p0 = type_probability(&params, PathTypeKey::NONE)?;
        let kept = p0 + raw.iter().map(|r| r.2).sum::<f64>();
        if kept <= 0.0 {
            return Err(Error::InvalidParams("all sneak-path mass lies beyond l_max"));
        }
        let types: Vec<SneakPathType> = raw
            .into_iter()
            .map(|(key, alpha, p)| SneakPathType {
                paths: key.paths,
                rows: key.rows,
                cols: key.cols,
                alpha,
                prob: p / kept,
            })
            .collect();
        let mut model = ChannelModel {
            params,
            no_path_prob: p0 / kept,
            tail_mass: (1.0 - kept).max(0.0),
            types,
            components: Vec::new(),
            cumulative: Vec::new(),
        };
        model.rebuild_components();
        Ok(model)
    }

    fn rebuild_components(&mut self) {
        let params = self.params;
        let mean = |alpha: Option<f64>| [rho(0, alpha, &params).unwrap(), rho(1, alpha, &params).unwrap()];
        let mut components = Vec::with_capacity(self.types.len() + 1);
        if self.no_path_prob > 0.0 {
            components.push(MixtureComponent {
                alpha: None,
                weight: self.no_path_prob,
                ln_weight: libm::log(self.no_path_prob),
                means: mean(None),
            });
        }
        components.extend(self.types.iter().map(|t| MixtureComponent {
            alpha: Some(t.alpha),
            weight: t.prob,
            ln_weight: libm::log(t.prob),
            means: mean(Some(t.alpha)),
        }));
        let mut acc = 0.0;
        self.cumulative = components
            .iter()
            .map(|c| {
                acc += c.weight;
                acc
            })
            .collect();
        self.components = components;
    }

    /// Same mixture with a different noise level.
    pub fn with_sigma(&self, sigma_eta: f64) -> Result<Self> {
        let params = self.params.with_sigma(sigma_eta);
        params.validate()?;
        Ok(ChannelModel { params, ..self.clone() })
    }

    pub fn params(&self) -> &ChannelParams {
        &self.params
    }

    pub fn sigma(&self) -> f64 {
        self.params.sigma_eta
    }

    /// Renormalized probability of no sneak path.
    pub fn no_path_prob(&self) -> f64 {
        self.no_path_prob
    }

    /// Probability mass dropped by the `l_max` truncation.
    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    pub fn types(&self) -> &[SneakPathType] {
        &self.types
    }

    pub fn components(&self) -> &[MixtureComponent] {
        &self.components
    }

    /// Renormalized type distribution with α classes merged, including the
    /// no-path type `(0; 0, 0)`.
    pub fn type_distribution(&self) -> BTreeMap<PathTypeKey, f64> {
        let mut dist = BTreeMap::new();
        dist.insert(PathTypeKey::NONE, self.no_path_prob);
        for t in &self.types {
            *dist.entry(t.key()).or_insert(0.0) += t.prob;
        }
        dist
    }

    /// Smallest and largest noise-free read over components with positive weight.
    pub fn mean_range(&self, bit: Bit) -> (f64, f64) {
        self.components
            .iter()
            .filter(|c| c.weight > 0.0)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), c| (lo.min(c.mean(bit)), hi.max(c.mean(bit))))
    }

    /// Read density `Pr(r | A = bit)` for a single read.
    pub fn transition_pdf(&self, r: f64, bit: Bit) -> f64 {
        let sigma = self.sigma();
        self.components.iter().map(|c| c.weight * normal_pdf((r - c.mean(bit)) / sigma) / sigma).sum()
    }

    /// Draws a mixture component according to its weight.
    pub fn sample_component<R: Rng + ?Sized>(&self, rng: &mut R) -> &MixtureComponent {
        let u = rng.random::<f64>() * self.cumulative.last().copied().unwrap_or(1.0);
        let idx = self.cumulative.partition_point(|&c| c <= u);
        &self.components[idx.min(self.components.len() - 1)]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cfg(cells: &[(usize, usize)]) -> PathConfig {
        PathConfig::new(cells.to_vec()).unwrap()
    }

    #[test]
    fn rho_examples() {
        let p = ChannelParams::default();
        assert_eq!(rho(1, None, &p).unwrap(), 100.0);
        assert_eq!(rho(0, None, &p).unwrap(), 1000.0);
        assert!((rho(0, Some(3.0), &p).unwrap() - 3000.0 / 13.0).abs() < 1e-12);
        assert!(rho(0, Some(0.0), &p).is_err());
        assert!(rho(0, Some(-1.0), &p).is_err());
    }

    #[test]
    fn alpha_examples() {
        assert!((solve_alpha(&cfg(&[(1, 1)])).unwrap() - 3.0).abs() < 1e-14);
        assert!((solve_alpha(&cfg(&[(1, 1), (2, 2)])).unwrap() - 1.5).abs() < 1e-14);
        assert!((solve_alpha(&cfg(&[(1, 1), (1, 2)])).unwrap() - 2.0).abs() < 1e-14);
        assert!((solve_alpha(&cfg(&[(1, 1), (2, 1)])).unwrap() - 2.0).abs() < 1e-14);
        assert!(solve_alpha(&PathConfig::empty()).is_err());
    }

    #[test]
    fn alpha_of_full_two_by_two_grid() {
        // source -> {c1, c2} -> complete bipartite -> {r1, r2} -> sink:
        // 1/2 + 1/4 + 1/2 by symmetry
        let a = solve_alpha(&cfg(&[(0, 0), (0, 1), (1, 0), (1, 1)])).unwrap();
        assert!((a - 1.25).abs() < 1e-14);
    }

    #[test]
    fn disjoint_cells_are_parallel_paths() {
        for l in 1..=6 {
            let cells: Vec<_> = (0..l).map(|k| (k, k + 10)).collect();
            let a = solve_alpha(&cfg(&cells)).unwrap();
            assert!((a - 3.0 / l as f64).abs() < 1e-12, "L={l}: {a}");
        }
    }

    #[test]
    fn duplicate_cells_rejected() {
        assert!(PathConfig::new(vec![(1, 2), (1, 2)]).is_err());
    }

    fn brute_force_counts(u: usize, v: usize, paths: usize) -> BTreeMap<(usize, usize), u128> {
        let mut out = BTreeMap::new();
        let cells = u * v;
        for mask in 0u32..(1 << cells) {
            if mask.count_ones() as usize != paths {
                continue;
            }
            let (mut rows, mut cols) = (0u32, 0u32);
            for idx in 0..cells {
                if mask >> idx & 1 == 1 {
                    rows |= 1 << (idx / v);
                    cols |= 1 << (idx % v);
                }
            }
            *out.entry((rows.count_ones() as usize, cols.count_ones() as usize)).or_insert(0) += 1;
        }
        out
    }

    #[test]
    fn count_arrangements_examples() {
        assert_eq!(count_arrangements(4, 5, 1, 1, 1).unwrap(), 20);
        assert_eq!(count_arrangements(2, 2, 2, 2, 2).unwrap(), 2);
        assert_eq!(count_arrangements(3, 3, 2, 1, 2).unwrap(), 9);
        assert!(count_arrangements(2, 2, 5, 2, 2).is_err());
        assert!(count_arrangements(1, 3, 2, 2, 1).is_err());
    }

    #[test]
    fn count_arrangements_matches_brute_force() {
        for u in 1..=4 {
            for v in 1..=4 {
                for paths in 0..=6.min(u * v) {
                    let brute = brute_force_counts(u, v, paths);
                    for rows in 0..=u {
                        for cols in 0..=v {
                            let expect = brute.get(&(rows, cols)).copied().unwrap_or(0);
                            let got = count_arrangements(u, v, paths, rows, cols).unwrap_or(0);
                            assert_eq!(got, expect, "u={u} v={v} L={paths} kl={rows} kc={cols}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn alpha_classes_partition_cover_count() {
        for paths in 1..=5 {
            for rows in 1..=paths {
                for cols in 1..=paths {
                    let key = PathTypeKey::new(paths, rows, cols);
                    if !key.is_consistent() {
                        continue;
                    }
                    let total: u128 = alpha_classes(key).unwrap().iter().map(|c| c.1).sum();
                    assert_eq!(total, grid_cover_count(paths, rows, cols).unwrap(), "{key:?}");
                }
            }
        }
        // (4; 2, 3): a row with three cells plus one, or two plus two
        assert!(alpha_classes(PathTypeKey::new(4, 2, 3)).unwrap().len() >= 2);
        assert_eq!(alpha_classes(PathTypeKey::new(1, 1, 1)).unwrap(), vec![(3.0, 1)]);
    }

    #[test]
    fn type_probability_edge_cases() {
        let p = ChannelParams { p_f: 0.0, ..ChannelParams::default() };
        assert!((type_probability(&p, PathTypeKey::NONE).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(type_probability(&p, PathTypeKey::new(1, 1, 1)).unwrap(), 0.0);

        let tiny = ChannelParams { m: 2, n: 2, q1: 1.0, p_f: 1.0, ..ChannelParams::default() };
        assert!((type_probability(&tiny, PathTypeKey::new(1, 1, 1)).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(type_probability(&tiny, PathTypeKey::NONE).unwrap(), 0.0);
    }

    #[test]
    fn no_path_mass_formula() {
        let p = ChannelParams::default();
        let mut expect = 0.0;
        for u in 0..=15u64 {
            for v in 0..=15u64 {
                expect += binomial_pmf(u, 15, 0.5) * binomial_pmf(v, 15, 0.5) * libm::pow(1.0 - 0.0005, (u * v) as f64);
            }
        }
        let got = type_probability(&p, PathTypeKey::NONE).unwrap();
        assert!((got - expect).abs() < 1e-14);
    }

    #[test]
    fn untruncated_types_sum_to_one() {
        // m = n = 3 has at most 4 intersection cells, so l_max = 4 is exhaustive.
        let p = ChannelParams { m: 3, n: 3, p_f: 0.7, q1: 0.6, ..ChannelParams::default() };
        let model = ChannelModel::new(p).unwrap();
        assert!(model.tail_mass() < 1e-12);
        let sum: f64 = model.type_distribution().values().sum();
        assert!((sum - 1.0).abs() < 1e-12);
    }

    #[test]
    fn model_mass_is_normalized() {
        for p_f in [0.0, 0.001, 0.05, 0.5] {
            let model = ChannelModel::new(ChannelParams { p_f, ..ChannelParams::default() }).unwrap();
            let sum: f64 = model.components().iter().map(|c| c.weight).sum();
            assert!((sum - 1.0).abs() < 1e-9, "p_f={p_f}");
        }
        let default = ChannelModel::new(ChannelParams::default()).unwrap();
        assert!(default.tail_mass() < 1e-9);
    }

    #[test]
    fn transition_pdf_without_failures_is_single_gaussian() {
        let model = ChannelModel::new(ChannelParams { p_f: 0.0, ..ChannelParams::default() }).unwrap();
        let s = model.sigma();
        for r in [0.0, 100.0, 180.0, 550.0] {
            let expect = normal_pdf((r - 100.0) / s) / s;
            assert!((model.transition_pdf(r, 1) - expect).abs() < 1e-18);
        }
    }

    #[test]
    fn transition_pdf_term_by_term() {
        let model = ChannelModel::new(ChannelParams::default().with_sigma(50.0)).unwrap();
        let p = model.params();
        let sigma = 50.0;
        let gauss = |x: f64, mu: f64| {
            libm::exp(-(x - mu) * (x - mu) / (2.0 * sigma * sigma)) / (sigma * libm::sqrt(2.0 * core::f64::consts::PI))
        };
        let mut expect = model.no_path_prob() * gauss(1000.0, 1000.0);
        for t in model.types() {
            let mean = 1.0 / (1.0 / p.r0 + 1.0 / (t.alpha * p.r1));
            expect += t.prob * gauss(1000.0, mean);
        }
        let got = model.transition_pdf(1000.0, 0);
        assert!((got / expect - 1.0).abs() < 1e-3);
    }

    fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
        let c = 0.5 * (a + b);
        let (fa, fb, fc) = (f(a), f(b), f(c));
        let whole = (b - a) / 6.0 * (fa + 4.0 * fc + fb);
        #[allow(clippy::too_many_arguments)]
        fn rec(
            f: &dyn Fn(f64) -> f64,
            a: f64,
            b: f64,
            fa: f64,
            fb: f64,
            fc: f64,
            whole: f64,
            tol: f64,
            depth: u32,
        ) -> f64 {
            let c = 0.5 * (a + b);
            let (d, e) = (0.5 * (a + c), 0.5 * (c + b));
            let (fd, fe) = (f(d), f(e));
            let left = (c - a) / 6.0 * (fa + 4.0 * fd + fc);
            let right = (b - c) / 6.0 * (fc + 4.0 * fe + fb);
            if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
                left + right + (left + right - whole) / 15.0
            } else {
                rec(f, a, c, fa, fc, fd, left, tol / 2.0, depth - 1)
                    + rec(f, c, b, fc, fb, fe, right, tol / 2.0, depth - 1)
            }
        }
        rec(f, a, b, fa, fb, fc, whole, tol, depth)
    }

    #[test]
    fn transition_pdf_integrates_to_one() {
        for sigma in [20.0, 80.0] {
            let model =
                ChannelModel::new(ChannelParams { p_f: 0.01, ..ChannelParams::default() }.with_sigma(sigma)).unwrap();
            for bit in [0, 1] {
                let (lo, _) = model.mean_range(bit);
                let (_, hi) = model.mean_range(bit);
                let f = |r: f64| model.transition_pdf(r, bit);
                let total = adaptive_simpson(&f, lo - 10.0 * sigma, hi + 10.0 * sigma, 1e-10, 40);
                assert!((total - 1.0).abs() < 1e-6, "sigma={sigma} bit={bit}: {total}");
            }
        }
    }

    #[test]
    fn params_validation() {
        let ok = ChannelParams::default();
        assert!(ok.validate().is_ok());
        assert!(ChannelParams { m: 1, ..ok }.validate().is_err());
        assert!(ChannelParams { r1: 2000.0, ..ok }.validate().is_err());
        assert!(ChannelParams { sigma_eta: 0.0, ..ok }.validate().is_err());
        assert!(ChannelParams { p_f: 1.5, ..ok }.validate().is_err());
        assert!(ChannelParams { l_max: 7, ..ok }.validate().is_err());
        let saturated = ChannelParams { q1: 1.0, p_f: 1.0, ..ok };
        assert!(ChannelModel::new(saturated).is_err());
    }

    #[test]
    fn params_json_keys() {
        let json = serde_json::to_value(ChannelParams::default()).unwrap();
        for key in ["m", "n", "r0_ohm", "r1_ohm", "p_f", "q1", "sigma_eta_ohm", "l_max"] {
            assert!(json.get(key).is_some(), "{key}");
        }
        let partial: ChannelParams = serde_json::from_str(r#"{"m": 8, "sigma_eta_ohm": 40}"#).unwrap();
        assert_eq!(partial.m, 8);
        assert_eq!(partial.n, 16);
        assert_eq!(partial.sigma_eta, 40.0);
    }

    proptest! {
        #[test]
        fn alpha_invariant_under_relabeling(
            cells in proptest::collection::btree_set((0usize..5, 0usize..5), 1..8),
            row_shift in 0usize..5,
            col_perm in Just([3usize, 0, 4, 1, 2]),
        ) {
            let base: Vec<_> = cells.iter().copied().collect();
            let relabeled: Vec<_> = base
                .iter()
                .map(|&(r, c)| ((r + row_shift) % 5 + 7, col_perm[c]))
                .collect();
            let a = solve_alpha(&PathConfig::new(base).unwrap()).unwrap();
            let b = solve_alpha(&PathConfig::new(relabeled).unwrap()).unwrap();
            prop_assert!((a - b).abs() < 1e-12 * a);
        }

        #[test]
        fn alpha_bounded_by_series_and_parallel(
            cells in proptest::collection::btree_set((0usize..4, 0usize..4), 1..10),
        ) {
            let config = PathConfig::new(cells.into_iter().collect()).unwrap();
            let a = solve_alpha(&config).unwrap();
            // at least one unit resistor on each side; at most three in series
            prop_assert!(a > 0.0 && a <= 3.0 + 1e-12);
        }
    }
}
