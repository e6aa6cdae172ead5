//! Exact checks of the Schur-type averaging identities on finite groups.
//!
//! For a finite group the Haar average over the group is the finite sum
//! `(1/|G|) Σ_g`, so every identity checked here holds to rounding error.

use crate::error::{Error, Result};
use crate::rng;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::TAU;

/// Tolerance for unitarity and homomorphism checks on representation matrices.
pub const MATRIX_TOL: f64 = 1e-12;

/// A finite group given by its multiplication table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteGroup {
    name: String,
    cayley: Vec<Vec<usize>>,
    inverse: Vec<usize>,
    identity: usize,
}

impl FiniteGroup {
    /// Builds a group from a Cayley table with `cayley[a][b] = a∘b`.
    ///
    /// The table must be a Latin square with a two-sided identity; associativity
    /// is checked exhaustively for groups of order at most 32.
    pub fn from_cayley(name: impl Into<String>, cayley: Vec<Vec<usize>>) -> Result<Self> {
        let n = cayley.len();
        if n == 0 {
            return Err(Error::InvalidGroup("empty table".into()));
        }
        for (a, row) in cayley.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidGroup(format!("row {a} has length {}", row.len())));
            }
            let mut seen = vec![false; n];
            for &c in row {
                if c >= n || std::mem::replace(&mut seen[c], true) {
                    return Err(Error::InvalidGroup(format!("row {a} is not a permutation")));
                }
            }
        }
        for b in 0..n {
            let mut seen = vec![false; n];
            for row in &cayley {
                if std::mem::replace(&mut seen[row[b]], true) {
                    return Err(Error::InvalidGroup(format!("column {b} is not a permutation")));
                }
            }
        }
        let identity = (0..n)
            .find(|&e| (0..n).all(|g| cayley[e][g] == g && cayley[g][e] == g))
            .ok_or_else(|| Error::InvalidGroup("no identity element".into()))?;
        let inverse: Vec<usize> = (0..n)
            .map(|g| (0..n).find(|&h| cayley[g][h] == identity).unwrap_or(identity))
            .collect();
        if (0..n).any(|g| cayley[inverse[g]][g] != identity) {
            return Err(Error::InvalidGroup("missing two-sided inverses".into()));
        }
        if n <= 32 {
            for a in 0..n {
                for b in 0..n {
                    for c in 0..n {
                        if cayley[cayley[a][b]][c] != cayley[a][cayley[b][c]] {
                            return Err(Error::InvalidGroup(format!(
                                "associativity fails for ({a}, {b}, {c})"
                            )));
                        }
                    }
                }
            }
        }
        Ok(Self { name: name.into(), cayley, inverse, identity })
    }

    /// The cyclic group Z/m, element `k` standing for `k mod m`.
    pub fn cyclic(m: usize) -> Self {
        let cayley = (0..m).map(|a| (0..m).map(|b| (a + b) % m).collect()).collect();
        Self::from_cayley(format!("Z{m}"), cayley).expect("cyclic table is a group")
    }

    /// The dihedral group of the square. Element `k + 4e` stands for `r^k s^e`
    /// with `r` the quarter turn and `s` a reflection (`s r = r^-1 s`).
    pub fn dihedral4() -> Self {
        let cayley = (0..8)
            .map(|x| {
                let (a, e) = (x % 4, x / 4);
                (0..8)
                    .map(|y| {
                        let (b, f) = (y % 4, y / 4);
                        let k = if e == 0 { a + b } else { a + 4 - b } % 4;
                        k + 4 * ((e + f) % 2)
                    })
                    .collect()
            })
            .collect();
        Self::from_cayley("D4", cayley).expect("dihedral table is a group")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn order(&self) -> usize {
        self.cayley.len()
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn inverse(&self, g: usize) -> usize {
        self.inverse[g]
    }

    pub fn compose(&self, a: usize, b: usize) -> usize {
        self.cayley[a][b]
    }
}

/// Catalog tag for an irreducible representation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct IrrepLabel(pub usize);

/// A unitary representation: one `dim × dim` unitary matrix per group element.
#[derive(Debug, Clone)]
pub struct UnitaryRep {
    group: FiniteGroup,
    dim: usize,
    matrices: Vec<DMatrix<Complex64>>,
}

impl UnitaryRep {
    /// Validates unitarity, `ρ(e) = I` and `ρ(ab) = ρ(a)ρ(b)` to [`MATRIX_TOL`].
    pub fn new(group: FiniteGroup, matrices: Vec<DMatrix<Complex64>>) -> Result<Self> {
        if matrices.len() != group.order() {
            return Err(Error::InvalidRepresentation(format!(
                "{} matrices for a group of order {}",
                matrices.len(),
                group.order()
            )));
        }
        let dim = matrices[0].nrows();
        if dim == 0 || matrices.iter().any(|m| m.nrows() != dim || m.ncols() != dim) {
            return Err(Error::InvalidRepresentation("matrices must be square of one size".into()));
        }
        let id = DMatrix::<Complex64>::identity(dim, dim);
        for (g, m) in matrices.iter().enumerate() {
            if max_abs(&(m.adjoint() * m - &id)) > MATRIX_TOL {
                return Err(Error::InvalidRepresentation(format!("element {g} is not unitary")));
            }
        }
        if max_abs(&(&matrices[group.identity()] - &id)) > MATRIX_TOL {
            return Err(Error::InvalidRepresentation("identity is not mapped to I".into()));
        }
        for a in 0..group.order() {
            for b in 0..group.order() {
                let lhs = &matrices[group.compose(a, b)];
                if max_abs(&(lhs - &matrices[a] * &matrices[b])) > MATRIX_TOL {
                    return Err(Error::InvalidRepresentation(format!(
                        "homomorphism fails for ({a}, {b})"
                    )));
                }
            }
        }
        Ok(Self { group, dim, matrices })
    }

    /// One-dimensional representation from a character table row.
    pub fn from_character(group: FiniteGroup, values: &[Complex64]) -> Result<Self> {
        let matrices = values.iter().map(|&v| DMatrix::from_element(1, 1, v)).collect();
        Self::new(group, matrices)
    }

    pub fn trivial(group: FiniteGroup) -> Self {
        let values = vec![Complex64::new(1.0, 0.0); group.order()];
        Self::from_character(group, &values).expect("trivial representation is valid")
    }

    pub fn direct_sum(a: &Self, b: &Self) -> Result<Self> {
        if a.group != b.group {
            return Err(Error::GroupMismatch);
        }
        let n = a.dim + b.dim;
        let matrices = a
            .matrices
            .iter()
            .zip(&b.matrices)
            .map(|(ma, mb)| {
                let mut m = DMatrix::zeros(n, n);
                m.view_mut((0, 0), (a.dim, a.dim)).copy_from(ma);
                m.view_mut((a.dim, a.dim), (b.dim, b.dim)).copy_from(mb);
                m
            })
            .collect();
        Self::new(a.group.clone(), matrices)
    }

    pub fn group(&self) -> &FiniteGroup {
        &self.group
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self, g: usize) -> &DMatrix<Complex64> {
        &self.matrices[g]
    }

    /// `γ(x) = ρ(γ) x`.
    pub fn act(&self, g: usize, x: &[Complex64]) -> Vec<Complex64> {
        (&self.matrices[g] * DVector::from_column_slice(x)).data.into()
    }

    fn check_len(&self, v: &[Complex64]) -> Result<()> {
        if v.len() == self.dim {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { expected: self.dim, actual: v.len() })
        }
    }
}

fn max_abs(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `⟨a, b⟩ = Σ a_i conj(b_i)`.
pub fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x * y.conj()).sum()
}

/// `(1/|G|) Σ_γ ⟨γ(x), y⟩ · conj(⟨γ(v), w⟩)`.
///
/// On an irreducible representation this equals `⟨x, v⟩ conj(⟨y, w⟩) / dim`.
pub fn schur_bilinear_average(
    rep: &UnitaryRep,
    x: &[Complex64],
    y: &[Complex64],
    v: &[Complex64],
    w: &[Complex64],
) -> Result<Complex64> {
    for vec in [x, y, v, w] {
        rep.check_len(vec)?;
    }
    let order = rep.group.order();
    let sum: Complex64 = (0..order)
        .map(|g| inner(&rep.act(g, x), y) * inner(&rep.act(g, v), w).conj())
        .sum();
    Ok(sum / order as f64)
}

/// `(1/|G|) Σ_γ ⟨γ(v1), w1⟩ · conj(⟨γ(v2), w2⟩)` across two representations of
/// one group. Vanishes when the two are irreducible and non-isomorphic.
pub fn cross_rep_average(
    rep1: &UnitaryRep,
    rep2: &UnitaryRep,
    v1: &[Complex64],
    w1: &[Complex64],
    v2: &[Complex64],
    w2: &[Complex64],
) -> Result<Complex64> {
    if rep1.group != rep2.group {
        return Err(Error::GroupMismatch);
    }
    rep1.check_len(v1)?;
    rep1.check_len(w1)?;
    rep2.check_len(v2)?;
    rep2.check_len(w2)?;
    let order = rep1.group.order();
    let sum: Complex64 = (0..order)
        .map(|g| inner(&rep1.act(g, v1), w1) * inner(&rep2.act(g, v2), w2).conj())
        .sum();
    Ok(sum / order as f64)
}

/// `Σ_γ |Tr ρ(γ)|²`; equals `|G|` exactly when the representation is irreducible.
pub fn character_norm(rep: &UnitaryRep) -> f64 {
    rep.matrices.iter().map(|m| m.trace().norm_sqr()).sum()
}

/// Matrix with entries `Σ_γ ⟨γ(v), b_i⟩ conj(⟨γ(v), b_j⟩)` in the standard
/// basis; on an irreducible representation it is `(|G|/dim) ‖v‖² I`.
pub fn corollary_coefficient_orthogonality(
    rep: &UnitaryRep,
    v: &[Complex64],
) -> Result<DMatrix<Complex64>> {
    rep.check_len(v)?;
    let mut out = DMatrix::zeros(rep.dim, rep.dim);
    for g in 0..rep.group.order() {
        let gv = DVector::from_vec(rep.act(g, v));
        out += &gv * gv.adjoint();
    }
    Ok(out)
}

/// Character-norm irreducibility test, relative tolerance `1e-6`.
pub fn check_irreducible(rep: &UnitaryRep) -> bool {
    let order = rep.group.order() as f64;
    ((character_norm(rep) - order) / order).abs() <= 1e-6
}

/// A catalog group and its complete set of irreducible representations.
#[derive(Debug, Clone)]
pub struct CatalogEntry {
    pub group: FiniteGroup,
    pub irreps: Vec<CatalogIrrep>,
}

#[derive(Debug, Clone)]
pub struct CatalogIrrep {
    pub label: IrrepLabel,
    pub name: String,
    pub rep: UnitaryRep,
}

/// Z/2, Z/3, Z/4, Z/8 with all their characters and D4 with its five irreps.
pub fn builtin_group_catalog() -> Vec<CatalogEntry> {
    let mut catalog: Vec<CatalogEntry> = [2, 3, 4, 8].into_iter().map(cyclic_entry).collect();
    catalog.push(dihedral4_entry());
    catalog
}

/// Looks a catalog entry up by group name (`Z2`, `Z3`, `Z4`, `Z8`, `D4`),
/// ignoring case.
pub fn catalog_entry(name: &str) -> Result<CatalogEntry> {
    builtin_group_catalog()
        .into_iter()
        .find(|e| e.group.name().eq_ignore_ascii_case(name))
        .ok_or_else(|| Error::UnknownGroup(name.to_string()))
}

/// Character `k ↦ exp(2πi jk/m)` of Z/m.
pub fn cyclic_character(group: &FiniteGroup, j: usize) -> UnitaryRep {
    let m = group.order();
    let values: Vec<Complex64> = (0..m)
        .map(|k| Complex64::from_polar(1.0, TAU * ((j * k) % m) as f64 / m as f64))
        .collect();
    UnitaryRep::from_character(group.clone(), &values).expect("cyclic character is valid")
}

fn cyclic_entry(m: usize) -> CatalogEntry {
    let group = FiniteGroup::cyclic(m);
    let irreps = (0..m)
        .map(|j| CatalogIrrep {
            label: IrrepLabel(j),
            name: format!("chi{j}"),
            rep: cyclic_character(&group, j),
        })
        .collect();
    CatalogEntry { group, irreps }
}

fn dihedral4_entry() -> CatalogEntry {
    let group = FiniteGroup::dihedral4();
    let mut irreps = Vec::new();
    let signs = [(1.0, 1.0, "trivial"), (1.0, -1.0, "A2"), (-1.0, 1.0, "B1"), (-1.0, -1.0, "B2")];
    for (idx, (rot, refl, name)) in signs.into_iter().enumerate() {
        let values: Vec<Complex64> = (0..8)
            .map(|x| {
                let (k, e) = (x % 4, x / 4);
                let v = f64::powi(rot, k as i32) * f64::powi(refl, e as i32);
                Complex64::new(v, 0.0)
            })
            .collect();
        irreps.push(CatalogIrrep {
            label: IrrepLabel(idx),
            name: name.to_string(),
            rep: UnitaryRep::from_character(group.clone(), &values).expect("valid character"),
        });
    }
    let c = |re: f64| Complex64::new(re, 0.0);
    let quarter = DMatrix::from_row_slice(2, 2, &[c(0.0), c(-1.0), c(1.0), c(0.0)]);
    let reflect = DMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(-1.0)]);
    let matrices = (0..8)
        .map(|x| {
            let (k, e) = (x % 4, x / 4);
            let mut m = DMatrix::identity(2, 2);
            for _ in 0..k {
                m = &m * &quarter;
            }
            if e == 1 {
                m = &m * &reflect;
            }
            m
        })
        .collect();
    irreps.push(CatalogIrrep {
        label: IrrepLabel(4),
        name: "E".into(),
        rep: UnitaryRep::new(group.clone(), matrices).expect("standard representation is valid"),
    });
    CatalogEntry { group, irreps }
}

/// Which identity a [`IdentityCheck`] row exercises.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Identity {
    SchurAverage,
    CrossAverage,
    CharacterNorm,
    CoefficientOrthogonality,
}

impl std::fmt::Display for Identity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Identity::SchurAverage => "schur-average",
            Identity::CrossAverage => "cross-average",
            Identity::CharacterNorm => "character-norm",
            Identity::CoefficientOrthogonality => "coefficient-orthogonality",
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct IdentityCheck {
    pub group: String,
    pub irrep: String,
    pub identity: Identity,
    pub max_error: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Random vector with real and imaginary parts uniform in `[-1, 1)`.
pub fn random_vector(dim: usize, seed: u64, trial: u64, which: u64) -> Vec<Complex64> {
    let mut rng = rng::stream(seed, trial, which);
    (0..dim)
        .map(|_| Complex64::new(2.0 * rng::unit(&mut rng) - 1.0, 2.0 * rng::unit(&mut rng) - 1.0))
        .collect()
}

/// Runs all four identity families on every irrep of `entry`.
///
/// Schur, cross and corollary errors are absolute; the character-norm error is
/// relative to `|G|`. The cross-average row of an irrep reports the largest
/// magnitude over all of its non-isomorphic partners.
pub fn verify_entry(entry: &CatalogEntry, tolerance: f64, trials: u64, seed: u64) -> Vec<IdentityCheck> {
    let order = entry.group.order() as f64;
    let mut rows = Vec::new();
    for (i, a) in entry.irreps.iter().enumerate() {
        let dim = a.rep.dim();
        let mut schur = 0.0f64;
        let mut cross = 0.0f64;
        let mut coeff = 0.0f64;
        for t in 0..trials {
            let [x, y, v, w] = [0, 1, 2, 3].map(|k| random_vector(dim, seed, t, k));
            let lhs = schur_bilinear_average(&a.rep, &x, &y, &v, &w).expect("dimensions agree");
            let rhs = inner(&x, &v) * inner(&y, &w).conj() / dim as f64;
            schur = schur.max((lhs - rhs).norm());

            let m = corollary_coefficient_orthogonality(&a.rep, &v).expect("dimensions agree");
            let scale = order / dim as f64 * inner(&v, &v).re;
            let expected = DMatrix::<Complex64>::identity(dim, dim) * Complex64::new(scale, 0.0);
            coeff = coeff.max(max_abs(&(m - expected)));

            for (j, b) in entry.irreps.iter().enumerate() {
                if i == j {
                    continue;
                }
                let [v2, w2] = [4, 5].map(|k| random_vector(b.rep.dim(), seed, t, k));
                let val = cross_rep_average(&a.rep, &b.rep, &x, &y, &v2, &w2).expect("same group");
                cross = cross.max(val.norm());
            }
        }
        let character = ((character_norm(&a.rep) - order) / order).abs();
        let row = |identity, max_error: f64| IdentityCheck {
            group: entry.group.name().to_string(),
            irrep: a.name.clone(),
            identity,
            max_error,
            tolerance,
            pass: max_error <= tolerance,
        };
        rows.push(row(Identity::SchurAverage, schur));
        rows.push(row(Identity::CrossAverage, cross));
        rows.push(row(Identity::CharacterNorm, character));
        rows.push(row(Identity::CoefficientOrthogonality, coeff));
    }
    rows
}
