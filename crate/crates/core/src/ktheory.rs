//! Symbolic K-theory of the coefficient fields, of Roe algebras of `Z^d`,
//! and of the group algebra of `Z^d`, together with the Kitaev table.
//!
//! Groups are formal lists of cyclic summands and maps are recorded by the
//! generators they kill or preserve. Nothing here touches operators.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    Real,
    Complex,
}

impl Field {
    /// Bott period of the field's K-theory.
    pub fn period(self) -> i64 {
        match self {
            Field::Real => 8,
            Field::Complex => 2,
        }
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Field::Real => "real",
            Field::Complex => "complex",
        })
    }
}

impl FromStr for Field {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "real" | "r" => Ok(Field::Real),
            "complex" | "c" => Ok(Field::Complex),
            _ => Err(Error::invalid(format!("unknown field `{s}`, expected `real` or `complex`"))),
        }
    }
}

/// Nonzero cyclic summand.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Cyclic {
    Z,
    Z2,
}

impl fmt::Display for Cyclic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Cyclic::Z => "Z",
            Cyclic::Z2 => "Z/2",
        })
    }
}

/// Direct sum of cyclic groups, kept sorted; empty means the zero group.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize)]
pub struct Group(Vec<Cyclic>);

impl Group {
    pub fn zero() -> Self {
        Group(vec![])
    }

    pub fn from_summands(mut summands: Vec<Cyclic>) -> Self {
        summands.sort();
        Group(summands)
    }

    pub fn summands(&self) -> &[Cyclic] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// Number of `Z` summands.
    pub fn rank(&self) -> usize {
        self.0.iter().filter(|&&c| c == Cyclic::Z).count()
    }

    pub fn direct_sum(&self, other: &Group) -> Group {
        Group::from_summands(self.0.iter().chain(&other.0).copied().collect())
    }

    pub fn repeat(&self, times: usize) -> Group {
        Group::from_summands(self.0.iter().copied().cycle().take(self.0.len() * times).collect())
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("0");
        }
        let mut i = 0;
        let mut first = true;
        while i < self.0.len() {
            let c = self.0[i];
            let n = self.0[i..].iter().take_while(|&&x| x == c).count();
            if !first {
                f.write_str("+")?;
            }
            if n == 1 {
                write!(f, "{c}")?;
            } else {
                write!(f, "{c}^{n}")?;
            }
            first = false;
            i += n;
        }
        Ok(())
    }
}

/// Periodic sequence of groups indexed by degree.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GradedGroup {
    pub field: Field,
    /// Groups in degrees `0..period`.
    pub degrees: Vec<Group>,
}

impl GradedGroup {
    pub fn period(&self) -> i64 {
        self.field.period()
    }

    pub fn degree(&self, i: i64) -> &Group {
        &self.degrees[i.rem_euclid(self.period()) as usize]
    }

    /// `G'_i = G_{i - s}`.
    pub fn shift(&self, s: i64) -> GradedGroup {
        let p = self.period();
        GradedGroup { field: self.field, degrees: (0..p).map(|i| self.degree(i - s).clone()).collect() }
    }
}

/// `K_i(F)` for `i` modulo the Bott period.
pub fn k_of_field(field: Field) -> GradedGroup {
    use Cyclic::*;
    let degrees = match field {
        Field::Complex => vec![vec![Z], vec![]],
        Field::Real => vec![vec![Z], vec![Z2], vec![Z2], vec![], vec![Z], vec![], vec![], vec![]],
    };
    GradedGroup { field, degrees: degrees.into_iter().map(Group::from_summands).collect() }
}

/// `K_j` of the Roe algebra of `Z^d`, isomorphic to `K_{j-d}(F)`.
pub fn roe_k(d: usize, field: Field) -> GradedGroup {
    k_of_field(field).shift(d as i64)
}

/// Free graded `K_*(F)`-module given by generator degrees and multiplicities.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct KModule {
    pub field: Field,
    /// `(degree, multiplicity)` with positive multiplicities.
    pub generators: Vec<(i64, usize)>,
}

impl KModule {
    pub fn rank(&self) -> usize {
        self.generators.iter().map(|g| g.1).sum()
    }

    /// Underlying graded group. A generator of degree `-j` contributes
    /// `K_{i-j}(F)` in degree `i`.
    pub fn expand(&self) -> GradedGroup {
        let base = k_of_field(self.field);
        let p = self.field.period();
        let degrees = (0..p)
            .map(|i| {
                self.generators
                    .iter()
                    .fold(Group::zero(), |acc, &(deg, m)| acc.direct_sum(&base.degree(i + deg).repeat(m)))
            })
            .collect();
        GradedGroup { field: self.field, degrees }
    }
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// K-theory of the group algebra of `Z^d` (continuous functions on the
/// torus): free of rank `2^d` with `binom(d, j)` generators in degree `-j`.
pub fn torus_k(d: usize, field: Field) -> KModule {
    KModule { field, generators: (0..=d).map(|j| (-(j as i64), binomial(d, j))).collect() }
}

/// Map from the torus module to Roe-algebra K-theory.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ComparisonMap {
    pub dim: usize,
    pub domain: KModule,
    /// Generators of the lower-dimensional (weak) summands, which die.
    pub kernel: Vec<(i64, usize)>,
    /// The top generator, mapped isomorphically onto the target.
    pub image: (i64, usize),
    pub target: GradedGroup,
}

impl ComparisonMap {
    pub fn kernel_rank(&self) -> usize {
        self.kernel.iter().map(|g| g.1).sum()
    }

    pub fn image_rank(&self) -> usize {
        self.image.1
    }

    /// Image of the top generator, expanded as a graded group.
    pub fn image_group(&self) -> GradedGroup {
        KModule { field: self.domain.field, generators: vec![self.image] }.expand()
    }
}

pub fn comparison_map(d: usize, field: Field) -> Result<ComparisonMap> {
    if d == 0 {
        return Err(Error::invalid("the comparison map needs d >= 1"));
    }
    let domain = torus_k(d, field);
    let kernel = domain.generators.iter().copied().filter(|&(deg, _)| deg > -(d as i64)).collect();
    let image = *domain.generators.last().expect("torus module has a top generator");
    Ok(ComparisonMap { dim: d, domain, kernel, image, target: roe_k(d, field) })
}

/// One coarse Mayer–Vietoris boundary `K_j(Roe Z^d) -> K_{j-1}(Roe Z^{d-1})`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MvBoundary {
    pub field: Field,
    pub dim: usize,
    pub degree: i64,
    pub source: Group,
    pub target: Group,
    pub sign: i8,
    pub isomorphism: bool,
    pub reason: &'static str,
}

pub const MV_AXIOM: &str = "the K-theory of the Roe algebra of a half-space vanishes (flasque), so the Mayer-Vietoris boundary is an isomorphism";

pub fn mv_boundary(d: usize, field: Field, j: i64) -> Result<MvBoundary> {
    if d == 0 {
        return Err(Error::invalid("the Mayer-Vietoris boundary needs d >= 1"));
    }
    let source = roe_k(d, field).degree(j).clone();
    let target = roe_k(d - 1, field).degree(j - 1).clone();
    Ok(MvBoundary {
        field,
        dim: d,
        degree: j,
        isomorphism: source == target,
        source,
        target,
        sign: 1,
        reason: MV_AXIOM,
    })
}

/// The `d` boundaries from `(d, j)` down to `(0, j - d)`.
pub fn mv_composite(d: usize, field: Field, j: i64) -> Result<Vec<MvBoundary>> {
    (0..d).map(|k| mv_boundary(d - k, field, j - k as i64)).collect()
}

/// Altland–Zirnbauer label of the class with Clifford shift `s`.
pub fn class_label(field: Field, s: i64) -> &'static str {
    const REAL: [&str; 8] = ["AI", "BDI", "D", "DIII", "AII", "CII", "C", "CI"];
    const COMPLEX: [&str; 2] = ["A", "AIII"];
    match field {
        Field::Real => REAL[s.rem_euclid(8) as usize],
        Field::Complex => COMPLEX[s.rem_euclid(2) as usize],
    }
}

/// Group classifying class `s` in dimension `d`: `K_{s-d}(F)`.
pub fn kitaev_entry(field: Field, s: i64, d: i64) -> Group {
    k_of_field(field).degree(s - d).clone()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct KitaevRow {
    pub field: Field,
    pub shift: i64,
    pub label: &'static str,
    pub entries: Vec<Group>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct KitaevTable {
    pub dims: Vec<i64>,
    pub rows: Vec<KitaevRow>,
}

/// Complex rows then real rows (or only those of `field`) for `d` in `dims`.
pub fn kitaev_table(dims: std::ops::RangeInclusive<i64>, field: Option<Field>) -> KitaevTable {
    let dims: Vec<i64> = dims.collect();
    let rows = [Field::Complex, Field::Real]
        .into_iter()
        .filter(|f| field.is_none_or(|g| g == *f))
        .flat_map(|f| (0..f.period()).map(move |s| (f, s)))
        .map(|(f, s)| KitaevRow {
            field: f,
            shift: s,
            label: class_label(f, s),
            entries: dims.iter().map(|&d| kitaev_entry(f, s, d)).collect(),
        })
        .collect();
    KitaevTable { dims, rows }
}

impl KitaevTable {
    pub fn to_text(&self) -> String {
        let mut header = vec!["class".to_string(), "field".to_string(), "s".to_string()];
        header.extend(self.dims.iter().map(|d| format!("d={d}")));
        let mut lines = vec![header];
        for r in &self.rows {
            let mut line = vec![r.label.to_string(), r.field.to_string(), r.shift.to_string()];
            line.extend(r.entries.iter().map(|g| g.to_string()));
            lines.push(line);
        }
        let widths: Vec<usize> =
            (0..lines[0].len()).map(|c| lines.iter().map(|l| l[c].len()).max().unwrap_or(0)).collect();
        let mut out = String::new();
        for l in &lines {
            let cells: Vec<String> = l.iter().zip(&widths).map(|(s, w)| format!("{s:<w$}")).collect();
            out.push_str(cells.join("  ").trim_end());
            out.push('\n');
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("class,field,s");
        for d in &self.dims {
            out.push_str(&format!(",d{d}"));
        }
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!("{},{},{}", r.label, r.field, r.shift));
            for g in &r.entries {
                out.push_str(&format!(",{g}"));
            }
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use Cyclic::*;

    fn g(s: &[Cyclic]) -> Group {
        Group::from_summands(s.to_vec())
    }

    #[test]
    fn field_groups() {
        let c = k_of_field(Field::Complex);
        assert_eq!(c.degree(0), &g(&[Z]));
        assert_eq!(c.degree(-3), &Group::zero());
        let r = k_of_field(Field::Real);
        assert_eq!(r.degree(2), &g(&[Z2]));
        assert_eq!(r.degree(5), &Group::zero());
        assert_eq!(r.degree(-4), &g(&[Z]));
    }

    #[test]
    fn roe_examples() {
        assert_eq!(roe_k(2, Field::Complex).degree(0), &g(&[Z]));
        assert_eq!(roe_k(1, Field::Real).degree(1), &g(&[Z]));
        assert_eq!(roe_k(3, Field::Real).degree(4), &g(&[Z2]));
    }

    #[test]
    fn torus_examples() {
        assert_eq!(torus_k(0, Field::Complex).generators, vec![(0, 1)]);
        let t = torus_k(2, Field::Complex);
        assert_eq!(t.generators, vec![(0, 1), (-1, 2), (-2, 1)]);
        let e = t.expand();
        assert_eq!(e.degree(0), &g(&[Z, Z]));
        assert_eq!(e.degree(1), &g(&[Z, Z]));
        // K_i(C(T)) = K_i(R) + K_{i-1}(R)
        let circle = torus_k(1, Field::Real).expand();
        let r = k_of_field(Field::Real);
        for i in 0..8 {
            assert_eq!(circle.degree(i), &r.degree(i).direct_sum(r.degree(i - 1)));
        }
    }

    #[test]
    fn comparison_examples() {
        let c1 = comparison_map(1, Field::Complex).unwrap();
        assert_eq!((c1.kernel_rank(), c1.kernel[0].0), (1, 0));
        assert_eq!(c1.image_group().degree(1), &g(&[Z]));
        assert_eq!(c1.target.degree(1), &g(&[Z]));
        let c2 = comparison_map(2, Field::Complex).unwrap();
        assert_eq!(c2.kernel_rank(), 3);
        assert_eq!(c2.target.degree(0), &g(&[Z]));
        let r1 = comparison_map(1, Field::Real).unwrap();
        assert_eq!(r1.target.degree(1), &g(&[Z]));
        assert!(comparison_map(0, Field::Real).is_err());
    }

    #[test]
    fn boundary_examples() {
        let b = mv_boundary(1, Field::Complex, 1).unwrap();
        assert_eq!((&b.source, &b.target, b.isomorphism, b.sign), (&g(&[Z]), &g(&[Z]), true, 1));
        let r = mv_boundary(1, Field::Real, 2).unwrap();
        assert_eq!((&r.source, &r.target), (&g(&[Z2]), &g(&[Z2])));
        let chain = mv_composite(2, Field::Complex, 0).unwrap();
        assert_eq!(chain.len(), 2);
        assert_eq!(&chain[1].target, k_of_field(Field::Complex).degree(-2));
    }

    #[test]
    fn kitaev_examples() {
        assert_eq!(kitaev_entry(Field::Complex, 0, 2), g(&[Z]));
        assert_eq!(kitaev_entry(Field::Real, 4, 0), g(&[Z]));
        // class D in two dimensions and DIII in two dimensions
        assert_eq!(kitaev_entry(Field::Real, 2, 2), g(&[Z]));
        assert_eq!(kitaev_entry(Field::Real, 3, 2), g(&[Z2]));
        let t = kitaev_table(0..=3, None);
        assert_eq!(t.rows.len(), 10);
        assert_eq!(t.rows[0].label, "A");
        assert_eq!(t.rows[2].label, "AI");
    }

    #[test]
    fn group_display() {
        assert_eq!(g(&[Z2, Z, Z]).to_string(), "Z^2+Z/2");
        assert_eq!(Group::zero().to_string(), "0");
        assert_eq!("Complex".parse::<Field>().unwrap(), Field::Complex);
        assert!("quaternion".parse::<Field>().is_err());
    }
}
