//! Tables of ordered expectation values of the ladder operators, the closed
//! forms for the state catalogue, conversion between the two orderings, and
//! the moment-domain overlap/purity functionals.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::{binomial, factorial};
use crate::states::StateSpec;

/// Operator ordering carried by a [`MomentTable`].
///
/// `Normal` tables hold `<(a^dag)^n a^m>` keyed by `(n, m)`; `Antinormal`
/// tables hold `<a^k (a^dag)^l>` keyed by `(k, l)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Ordering {
    Normal,
    Antinormal,
}

impl Ordering {
    pub fn name(self) -> &'static str {
        match self {
            Ordering::Normal => "normal",
            Ordering::Antinormal => "antinormal",
        }
    }

    pub fn other(self) -> Ordering {
        match self {
            Ordering::Normal => Ordering::Antinormal,
            Ordering::Antinormal => Ordering::Normal,
        }
    }
}

/// Number of index pairs with `i + j <= r`.
pub fn lattice_dim(r: usize) -> usize {
    (r + 1) * (r + 2) / 2
}

/// Flat position of the pair `(i, j)` in degree-major order, first index
/// descending within a degree: (d,0), (d-1,1), ..., (0,d).
///
/// This layout is a crate-wide contract: the evolution generator acts on
/// exactly this flattening, where its degree-triangular structure is literal
/// block lower triangularity.
pub fn lattice_index(i: usize, j: usize) -> usize {
    let d = i + j;
    d * (d + 1) / 2 + j
}

/// Triangular table of ordered moments up to a total degree.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentTable {
    ordering: Ordering,
    max_degree: usize,
    entries: Vec<Complex64>,
}

impl MomentTable {
    /// An all-zero table except for the normalization entry (0,0) = 1.
    pub fn normalized_zero(ordering: Ordering, max_degree: usize) -> Self {
        let mut entries = vec![Complex64::new(0.0, 0.0); lattice_dim(max_degree)];
        entries[0] = Complex64::new(1.0, 0.0);
        MomentTable {
            ordering,
            max_degree,
            entries,
        }
    }

    pub fn from_flat(ordering: Ordering, max_degree: usize, entries: Vec<Complex64>) -> Self {
        assert_eq!(entries.len(), lattice_dim(max_degree));
        MomentTable {
            ordering,
            max_degree,
            entries,
        }
    }

    pub fn ordering(&self) -> Ordering {
        self.ordering
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    /// `<(a^dag)^i a^j>` (normal) or `<a^i (a^dag)^j>` (antinormal).
    /// Pairs beyond the stored degree read as zero.
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        if i + j > self.max_degree {
            Complex64::new(0.0, 0.0)
        } else {
            self.entries[lattice_index(i, j)]
        }
    }

    pub fn set(&mut self, i: usize, j: usize, value: Complex64) {
        assert!(
            i + j <= self.max_degree,
            "index ({i},{j}) beyond max degree {}",
            self.max_degree
        );
        self.entries[lattice_index(i, j)] = value;
    }

    /// All stored `(i, j, value)` triples in flat order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        index_pairs(self.max_degree)
            .zip(self.entries.iter())
            .map(|((i, j), &v)| (i, j, v))
    }

    /// The flattened entry vector (see [`lattice_index`] for the layout).
    pub fn as_flat(&self) -> &[Complex64] {
        &self.entries
    }

    /// Restriction to a smaller max degree.
    pub fn truncated(&self, max_degree: usize) -> MomentTable {
        assert!(max_degree <= self.max_degree);
        MomentTable {
            ordering: self.ordering,
            max_degree,
            entries: self.entries[..lattice_dim(max_degree)].to_vec(),
        }
    }

    /// Largest entrywise absolute difference against another table
    /// (missing entries read as zero).
    pub fn max_abs_diff(&self, other: &MomentTable) -> f64 {
        let r = self.max_degree.max(other.max_degree);
        index_pairs(r)
            .map(|(i, j)| (self.get(i, j) - other.get(i, j)).norm())
            .fold(0.0, f64::max)
    }

    /// Verify the table invariants: normalization, Hermitian symmetry, and
    /// (for normal tables) real nonnegative diagonal.
    pub fn check_invariants(&self, tol: f64) -> Result<()> {
        let unit = (self.get(0, 0) - Complex64::new(1.0, 0.0)).norm();
        if unit > tol {
            return Err(Error::InvalidParameter(format!(
                "normalization entry (0,0) off by {unit:.3e}"
            )));
        }
        for (i, j, v) in self.iter() {
            let sym = (v - self.get(j, i).conj()).norm();
            if sym > tol {
                return Err(Error::InvalidParameter(format!(
                    "entry ({i},{j}) breaks Hermitian symmetry by {sym:.3e}"
                )));
            }
        }
        if self.ordering == Ordering::Normal {
            for d in (0..=self.max_degree / 2).map(|n| 2 * n) {
                let v = self.get(d / 2, d / 2);
                if v.im.abs() > tol || v.re < -1e-12 {
                    return Err(Error::InvalidParameter(format!(
                        "normal diagonal entry ({},{}) = {v} not real nonnegative",
                        d / 2,
                        d / 2
                    )));
                }
            }
        }
        Ok(())
    }

    fn expect_ordering(&self, expected: Ordering) -> Result<()> {
        if self.ordering != expected {
            return Err(Error::OrderingMismatch {
                expected: expected.name(),
                got: self.ordering.name(),
            });
        }
        Ok(())
    }
}

/// Iterate `(i, j)` pairs in the flat layout order up to degree `r`.
pub fn index_pairs(r: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..=r).flat_map(move |d| (0..=d).map(move |j| (d - j, j)))
}

// --- JSON form -------------------------------------------------------------
//
// {"ordering":"normal","max_degree":R,"entries":[{"i":n,"j":m,"re":x,"im":y},..]}
// Entries with |value| < 1e-15 are omitted on write; readers default missing
// entries to zero.

#[derive(Serialize, Deserialize)]
struct EntryJson {
    i: usize,
    j: usize,
    re: f64,
    #[serde(default)]
    im: f64,
}

#[derive(Serialize, Deserialize)]
struct TableJson {
    ordering: Ordering,
    max_degree: usize,
    entries: Vec<EntryJson>,
}

impl Serialize for MomentTable {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let entries = self
            .iter()
            .filter(|(_, _, v)| v.norm() >= 1e-15)
            .map(|(i, j, v)| EntryJson {
                i,
                j,
                re: v.re,
                im: v.im,
            })
            .collect();
        TableJson {
            ordering: self.ordering,
            max_degree: self.max_degree,
            entries,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for MomentTable {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = TableJson::deserialize(deserializer)?;
        let mut table = MomentTable {
            ordering: raw.ordering,
            max_degree: raw.max_degree,
            entries: vec![Complex64::new(0.0, 0.0); lattice_dim(raw.max_degree)],
        };
        for e in raw.entries {
            if e.i + e.j > raw.max_degree {
                return Err(serde::de::Error::custom(format!(
                    "entry ({},{}) beyond max_degree {}",
                    e.i, e.j, raw.max_degree
                )));
            }
            table.entries[lattice_index(e.i, e.j)] = Complex64::new(e.re, e.im);
        }
        Ok(table)
    }
}

// --- closed forms ----------------------------------------------------------

/// Mean photon number of a thermal state at unitless temperature `T`.
pub fn thermal_occupation(t: f64) -> f64 {
    1.0 / (1.0 / t).exp_m1()
}

/// Closed-form ordered moments for the state catalogue.
pub fn closed_form_moments(spec: &StateSpec, ordering: Ordering, r: usize) -> Result<MomentTable> {
    spec.validate()?;
    let mut table = MomentTable::normalized_zero(ordering, r);
    match (*spec, ordering) {
        (StateSpec::Fock { n: nn }, Ordering::Normal) => {
            let nn = nn as usize;
            for (n, m) in index_pairs(r) {
                if n == m && n <= nn {
                    table.set(n, m, (factorial(nn) / factorial(nn - n)).into());
                }
            }
        }
        (StateSpec::Fock { n: nn }, Ordering::Antinormal) => {
            let nn = nn as usize;
            for (k, l) in index_pairs(r) {
                if k == l {
                    table.set(k, l, (factorial(nn + k) / factorial(nn)).into());
                }
            }
        }
        (StateSpec::Thermal { t }, Ordering::Normal) => {
            let nbar = thermal_occupation(t);
            for (n, m) in index_pairs(r) {
                if n == m {
                    table.set(n, m, (factorial(n) * nbar.powi(n as i32)).into());
                }
            }
        }
        (StateSpec::Thermal { t }, Ordering::Antinormal) => {
            let nbar_plus = thermal_occupation(t) + 1.0; // 1/(1 - e^{-1/T})
            for (k, l) in index_pairs(r) {
                if k == l {
                    table.set(k, l, (factorial(k) * nbar_plus.powi(k as i32)).into());
                }
            }
        }
        (StateSpec::Coherent { re, im }, Ordering::Normal) => {
            let alpha = Complex64::new(re, im);
            for (n, m) in index_pairs(r) {
                table.set(n, m, alpha.conj().powu(n as u32) * alpha.powu(m as u32));
            }
        }
        (StateSpec::Coherent { re, im }, Ordering::Antinormal) => {
            let alpha = Complex64::new(re, im);
            for (k, l) in index_pairs(r) {
                table.set(k, l, antinormal_coherent_sum(alpha, k, l, |_| 1.0));
            }
        }
        (StateSpec::EvenCoherent { re, im }, Ordering::Normal)
        | (StateSpec::OddCoherent { re, im }, Ordering::Normal) => {
            let alpha = Complex64::new(re, im);
            let sign = if matches!(spec, StateSpec::EvenCoherent { .. }) {
                1.0
            } else {
                -1.0
            };
            let damp = (-2.0 * alpha.norm_sqr()).exp();
            let norm2 = cat_norm_sqr(alpha, sign);
            for (n, m) in index_pairs(r) {
                let parity = 1.0 + neg_pow(n + m) + sign * damp * (neg_pow(n) + neg_pow(m));
                let value = alpha.conj().powu(n as u32) * alpha.powu(m as u32) * norm2 * parity;
                table.set(n, m, value);
            }
        }
        (StateSpec::EvenCoherent { re, im }, Ordering::Antinormal)
        | (StateSpec::OddCoherent { re, im }, Ordering::Antinormal) => {
            let alpha = Complex64::new(re, im);
            let sign = if matches!(spec, StateSpec::EvenCoherent { .. }) {
                1.0
            } else {
                -1.0
            };
            let damp = (-2.0 * alpha.norm_sqr()).exp();
            let norm2 = cat_norm_sqr(alpha, sign);
            for (k, l) in index_pairs(r) {
                let bracket = |p: usize| {
                    1.0 + neg_pow(k + l) + sign * damp * neg_pow(p) * (neg_pow(k) + neg_pow(l))
                };
                table.set(k, l, antinormal_coherent_sum(alpha, k, l, bracket) * norm2);
            }
        }
    }
    Ok(table)
}

/// `sum_p C(k,p) C(l,p) p! alpha^{k-p} conj(alpha)^{l-p} bracket(p)`, the
/// common kernel of the coherent and cat antinormal moments.
fn antinormal_coherent_sum<F: Fn(usize) -> f64>(
    alpha: Complex64,
    k: usize,
    l: usize,
    bracket: F,
) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for p in 0..=k.min(l) {
        let coeff = binomial(k, p) * binomial(l, p) * factorial(p);
        acc += alpha.powu((k - p) as u32) * alpha.conj().powu((l - p) as u32)
            * coeff
            * bracket(p);
    }
    acc
}

/// Squared normalization of `N (|alpha> + sign |-alpha>)`, without the
/// cat-state bracket. Uses expm1 so small alpha stays accurate.
fn cat_norm_sqr(alpha: Complex64, sign: f64) -> f64 {
    let x = -2.0 * alpha.norm_sqr();
    if sign > 0.0 {
        1.0 / (2.0 * (1.0 + x.exp()))
    } else {
        1.0 / (-2.0 * x.exp_m1())
    }
}

fn neg_pow(n: usize) -> f64 {
    if n % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

// --- ordering conversion ---------------------------------------------------

/// Rewrite a table in the opposite ordering.
///
/// Uses `a^k (a^dag)^l = sum_p C(k,p) C(l,p) p! (a^dag)^{l-p} a^{k-p}` and its
/// inverse with alternating signs; both are exact and involutive, and no
/// entries outside the stored degree are needed.
pub fn convert_ordering(table: &MomentTable) -> MomentTable {
    let r = table.max_degree();
    let mut out = MomentTable::normalized_zero(table.ordering().other(), r);
    for (i, j) in index_pairs(r) {
        let mut acc = Complex64::new(0.0, 0.0);
        for p in 0..=i.min(j) {
            let mut coeff = binomial(i, p) * binomial(j, p) * factorial(p);
            if table.ordering() == Ordering::Antinormal {
                // normal from antinormal carries (-1)^p
                coeff *= neg_pow(p);
            }
            acc += coeff * table.get(j - p, i - p);
        }
        out.set(i, j, acc);
    }
    out
}

// --- overlap, purity, effective temperature --------------------------------

/// Result of the overlap/purity series with its convergence diagnostics.
///
/// `shell_contributions[s]` is the summed contribution of all terms with
/// `n + k = s`; `partial_sums[s]` the cumulative value through shell `s`.
/// `converged` holds when the last two shell contributions are both below
/// 1e-9 in magnitude.
#[derive(Debug, Clone, Serialize)]
pub struct OverlapSeries {
    pub value: f64,
    pub shell_contributions: Vec<f64>,
    pub partial_sums: Vec<f64>,
    pub converged: bool,
}

/// `Tr[rho_1 rho_2]` from two normal-ordered moment tables:
/// `sum (-1)^{m+k} (n+k)!/(n!m!k!l!) delta_{n+k,m+l} <.>_1 <.>_2`.
pub fn overlap(t1: &MomentTable, t2: &MomentTable) -> Result<OverlapSeries> {
    t1.expect_ordering(Ordering::Normal)?;
    t2.expect_ordering(Ordering::Normal)?;
    let (r1, r2) = (t1.max_degree(), t2.max_degree());
    // The shell index s = n + k obeys 2s = (n+m) + (k+l) <= r1 + r2.
    let mut shells = vec![0.0f64; (r1 + r2) / 2 + 1];
    for (n, m) in index_pairs(r1) {
        let v1 = t1.get(n, m);
        if v1.norm() == 0.0 {
            continue;
        }
        for (k, l) in index_pairs(r2) {
            if n + k != m + l {
                continue;
            }
            let v2 = t2.get(k, l);
            if v2.norm() == 0.0 {
                continue;
            }
            let coeff = neg_pow(m + k) * factorial(n + k)
                / (factorial(n) * factorial(m) * factorial(k) * factorial(l));
            shells[n + k] += (v1 * v2 * coeff).re;
        }
    }
    let mut partial_sums = Vec::with_capacity(shells.len());
    let mut acc = 0.0;
    for &s in &shells {
        acc += s;
        partial_sums.push(acc);
    }
    let len = shells.len();
    let converged = if len >= 2 {
        shells[len - 1].abs() <= 1e-9 && shells[len - 2].abs() <= 1e-9
    } else {
        true
    };
    Ok(OverlapSeries {
        value: acc,
        shell_contributions: shells,
        partial_sums,
        converged,
    })
}

/// State purity `Tr[rho^2]` as the self-overlap of a normal table.
pub fn purity(table: &MomentTable) -> Result<OverlapSeries> {
    overlap(table, table)
}

/// Overlap with the vacuum, `<0|rho|0> = sum_k (-1)^k <(a^dag)^k a^k> / k!`.
pub fn vacuum_fidelity(table: &MomentTable) -> Result<f64> {
    table.expect_ordering(Ordering::Normal)?;
    let mut acc = 0.0;
    for k in 0..=table.max_degree() / 2 {
        acc += neg_pow(k) * table.get(k, k).re / factorial(k);
    }
    Ok(acc)
}

/// Temperature of the thermal state with the given purity,
/// `T_eff = 1 / (2 artanh(purity))`.
pub fn effective_temperature(purity: f64) -> Result<f64> {
    if purity <= 0.0 || purity >= 1.0 {
        return Err(Error::OutOfDomain(purity));
    }
    Ok(1.0 / (2.0 * purity.atanh()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn lattice_layout_is_degree_major() {
        // (0,0), (1,0), (0,1), (2,0), (1,1), (0,2), (3,0), ...
        assert_eq!(lattice_index(0, 0), 0);
        assert_eq!(lattice_index(1, 0), 1);
        assert_eq!(lattice_index(0, 1), 2);
        assert_eq!(lattice_index(2, 0), 3);
        assert_eq!(lattice_index(1, 1), 4);
        assert_eq!(lattice_index(0, 2), 5);
        assert_eq!(lattice_index(3, 0), 6);
        let pairs: Vec<_> = index_pairs(2).collect();
        assert_eq!(pairs, vec![(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]);
    }

    #[test]
    fn fock_normal_moments() {
        let t = closed_form_moments(&StateSpec::fock(2), Ordering::Normal, 4).unwrap();
        assert_eq!(t.get(1, 1), c(2.0, 0.0));
        assert_eq!(t.get(2, 2), c(2.0, 0.0));
        assert_eq!(t.get(1, 0), c(0.0, 0.0));
        assert_eq!(t.get(3, 3), c(0.0, 0.0)); // beyond degree -> 0 (and n > N anyway)
        t.check_invariants(1e-12).unwrap();
    }

    #[test]
    fn fock_antinormal_moments() {
        let t = closed_form_moments(&StateSpec::fock(1), Ordering::Antinormal, 4).unwrap();
        assert_eq!(t.get(1, 1), c(2.0, 0.0));
        assert_eq!(t.get(2, 2), c(6.0, 0.0)); // 3!/1!
        let t2 = closed_form_moments(&StateSpec::fock(2), Ordering::Antinormal, 4).unwrap();
        assert_eq!(t2.get(2, 2), c(12.0, 0.0)); // (2+2)!/2!
    }

    #[test]
    fn thermal_moments() {
        let t = closed_form_moments(&StateSpec::thermal(1.0), Ordering::Normal, 4).unwrap();
        let nbar = 1.0 / (1f64.exp() - 1.0);
        assert_abs_diff_eq!(t.get(1, 1).re, nbar, epsilon = 1e-15);
        assert_abs_diff_eq!(t.get(1, 1).re, 0.5819767068693265, epsilon = 1e-12);
        assert_abs_diff_eq!(t.get(2, 2).re, 2.0 * nbar * nbar, epsilon = 1e-15);
        // antinormal <a a^dag> = nbar + 1
        let ta = closed_form_moments(&StateSpec::thermal(1.0), Ordering::Antinormal, 2).unwrap();
        assert_abs_diff_eq!(ta.get(1, 1).re, nbar + 1.0, epsilon = 1e-15);
    }

    #[test]
    fn coherent_moments() {
        let alpha = c(0.5, 0.0);
        let t = closed_form_moments(&StateSpec::coherent(alpha), Ordering::Normal, 4).unwrap();
        assert_abs_diff_eq!(t.get(2, 1).re, 0.125, epsilon = 1e-15);
        let alpha = c(0.3, 0.4);
        let ta =
            closed_form_moments(&StateSpec::coherent(alpha), Ordering::Antinormal, 4).unwrap();
        // <a a^dag> = |alpha|^2 + 1
        assert_abs_diff_eq!(ta.get(1, 1).re, 1.25, epsilon = 1e-15);
        assert_abs_diff_eq!(ta.get(1, 1).im, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn even_cat_first_moment_vanishes() {
        let t = closed_form_moments(
            &StateSpec::even_coherent(c(0.7, 0.2)),
            Ordering::Normal,
            4,
        )
        .unwrap();
        assert_eq!(t.get(1, 0), c(0.0, 0.0));
        assert_eq!(t.get(0, 1), c(0.0, 0.0));
        t.check_invariants(1e-12).unwrap();
    }

    #[test]
    fn odd_cat_photon_number() {
        // <a^dag a> of the odd cat: |alpha|^2 coth(|alpha|^2)
        let a: f64 = 0.5;
        let t = closed_form_moments(
            &StateSpec::odd_coherent(c(a, 0.0)),
            Ordering::Normal,
            2,
        )
        .unwrap();
        let a2 = a * a;
        let expected = a2 * (a2.cosh() / a2.sinh());
        assert_abs_diff_eq!(t.get(1, 1).re, expected, epsilon = 1e-12);
    }

    #[test]
    fn conversion_vacuum_gives_k_factorial() {
        let vac = closed_form_moments(&StateSpec::fock(0), Ordering::Normal, 6).unwrap();
        let anti = convert_ordering(&vac);
        assert_eq!(anti.ordering(), Ordering::Antinormal);
        for k in 0..=3 {
            assert_abs_diff_eq!(anti.get(k, k).re, factorial(k), epsilon = 1e-12);
        }
        // off-diagonals stay zero
        assert_eq!(anti.get(2, 1), c(0.0, 0.0));
    }

    #[test]
    fn conversion_shifts_number_by_one() {
        let t = closed_form_moments(&StateSpec::thermal(0.5), Ordering::Normal, 2).unwrap();
        let anti = convert_ordering(&t);
        assert_abs_diff_eq!(anti.get(1, 1).re, t.get(1, 1).re + 1.0, epsilon = 1e-15);
    }

    #[test]
    fn conversion_matches_fock_closed_form() {
        for n in 0..=3u32 {
            let normal = closed_form_moments(&StateSpec::fock(n), Ordering::Normal, 6).unwrap();
            let anti = closed_form_moments(&StateSpec::fock(n), Ordering::Antinormal, 6).unwrap();
            assert!(convert_ordering(&normal).max_abs_diff(&anti) < 1e-9);
            assert!(convert_ordering(&anti).max_abs_diff(&normal) < 1e-9);
        }
    }

    #[test]
    fn conversion_is_involutive() {
        let t = closed_form_moments(
            &StateSpec::coherent(c(0.3, -0.6)),
            Ordering::Normal,
            8,
        )
        .unwrap();
        let back = convert_ordering(&convert_ordering(&t));
        assert!(back.max_abs_diff(&t) < 1e-12);
    }

    #[test]
    fn overlap_vacuum_examples() {
        let vac = closed_form_moments(&StateSpec::fock(0), Ordering::Normal, 6).unwrap();
        let one = closed_form_moments(&StateSpec::fock(1), Ordering::Normal, 6).unwrap();
        assert_abs_diff_eq!(overlap(&vac, &vac).unwrap().value, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(overlap(&one, &one).unwrap().value, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(overlap(&one, &vac).unwrap().value, 0.0, epsilon = 1e-12);
        // the four nonzero terms of <1|rho|1> self-overlap: 1 - 1 - 1 + 2
        let series = overlap(&one, &one).unwrap();
        assert_abs_diff_eq!(series.shell_contributions[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(series.shell_contributions[1], -2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(series.shell_contributions[2], 2.0, epsilon = 1e-12);
    }

    #[test]
    fn purity_of_fock_states_is_one() {
        for n in 0..=3u32 {
            let t = closed_form_moments(&StateSpec::fock(n), Ordering::Normal, 12).unwrap();
            let p = purity(&t).unwrap();
            assert_abs_diff_eq!(p.value, 1.0, epsilon = 1e-10);
            assert!(p.converged);
        }
    }

    #[test]
    fn thermal_purity_series() {
        // Purity of a thermal state is tanh(1/2T). A table of max total
        // degree 24 carries the diagonal out to (12,12), which completes the
        // series through shell 12; the geometric tail is ~2e-7 there and
        // ~8e-12 with everything the table stores.
        let t = closed_form_moments(&StateSpec::thermal(0.5), Ordering::Normal, 24).unwrap();
        let p = purity(&t).unwrap();
        let expected = 1f64.tanh();
        assert_abs_diff_eq!(p.value, expected, epsilon = 1e-9);
        assert_abs_diff_eq!(p.partial_sums[12], expected, epsilon = 1e-6);
        assert!(p.converged);
        // The degree-12 table alone leaves a ~1.3e-6 deficit and the
        // convergence flag reports it.
        let t12 = closed_form_moments(&StateSpec::thermal(0.5), Ordering::Normal, 12).unwrap();
        let p12 = purity(&t12).unwrap();
        assert!((p12.value - expected).abs() < 3e-6);
        assert!((p12.value - expected).abs() > 1e-6);
        assert!(!p12.converged);
    }

    #[test]
    fn coherent_purity_is_one() {
        let t = closed_form_moments(
            &StateSpec::coherent(c(0.5, 0.0)),
            Ordering::Normal,
            12,
        )
        .unwrap();
        let p = purity(&t).unwrap();
        assert_abs_diff_eq!(p.value, 1.0, epsilon = 1e-6);
    }

    #[test]
    fn vacuum_fidelity_examples() {
        let one = closed_form_moments(&StateSpec::fock(1), Ordering::Normal, 6).unwrap();
        assert_abs_diff_eq!(vacuum_fidelity(&one).unwrap(), 0.0, epsilon = 1e-12);
        let vac = closed_form_moments(&StateSpec::fock(0), Ordering::Normal, 6).unwrap();
        assert_abs_diff_eq!(vacuum_fidelity(&vac).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn effective_temperature_inverts_tanh() {
        assert_abs_diff_eq!(effective_temperature(1f64.tanh()).unwrap(), 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(
            effective_temperature(0.2).unwrap(),
            1.0 / (2.0 * 0.2f64.atanh()),
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(effective_temperature(0.2).unwrap(), 2.4663034623764317,
            epsilon = 1e-12);
        assert!(effective_temperature(1.0).is_err());
        assert!(effective_temperature(0.0).is_err());
        // purity -> 1 means temperature -> 0
        assert!(effective_temperature(1.0 - 1e-12).unwrap() < 0.04);
    }

    #[test]
    fn ordering_mismatch_is_reported() {
        let anti = closed_form_moments(&StateSpec::fock(0), Ordering::Antinormal, 4).unwrap();
        assert!(matches!(
            purity(&anti),
            Err(Error::OrderingMismatch { .. })
        ));
    }

    #[test]
    fn json_round_trip_drops_tiny_entries() {
        let t = closed_form_moments(
            &StateSpec::coherent(c(0.3, 0.4)),
            Ordering::Antinormal,
            5,
        )
        .unwrap();
        let json = serde_json::to_string(&t).unwrap();
        assert!(json.contains("\"ordering\":\"antinormal\""));
        let back: MomentTable = serde_json::from_str(&json).unwrap();
        assert!(back.max_abs_diff(&t) < 1e-14);
        // a sparse table serializes only its nonzero entries
        let fock = closed_form_moments(&StateSpec::fock(1), Ordering::Normal, 6).unwrap();
        let json = serde_json::to_string(&fock).unwrap();
        let parsed: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(parsed["entries"].as_array().unwrap().len(), 2);
        let back: MomentTable = serde_json::from_str(&json).unwrap();
        assert_eq!(back.get(3, 3), c(0.0, 0.0));
        assert_eq!(back.get(1, 1), c(1.0, 0.0));
    }
}
