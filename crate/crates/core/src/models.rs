//! Tight-binding Hamiltonians on finite windows: disordered Laplacians,
//! Hofstadter models, stacked SSH chains and Delone-set Laplacians, plus the
//! Neumann-series resolvent.
//!
//! Hopping convention: `<x|H|y>` is the amplitude for hopping from `y` to
//! `x`. The Laplacian is `2 d t - t A + V` with `A` the adjacency operator.
//! A Hofstadter model with flux `p/q` picks up the phase `exp(2 pi i p/q)`
//! around every counterclockwise plaquette.

use std::collections::BTreeSet;
use std::f64::consts::TAU;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{delone_perturb, Geometry, Site, Window};
use crate::rng::CounterRng;
use crate::roe_ops::{apply_gauge, magnetic_cocycle, spectral_norm, untwist, Block, BlockOperator, GaugeFunction};

pub const MAX_FLUX_DENOMINATOR: i64 = 64;

/// Distance cutoff for Delone-set hopping.
pub const DELONE_CUTOFF: f64 = 1.6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    Open,
    Periodic,
}

/// How the magnetic twist is gauged away.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "gauge")]
pub enum GaugeChoice {
    /// Untwisting of the magnetic cocycle at the origin. Open windows only.
    Symmetric,
    /// Landau gauge, translation invariant along `axis`.
    Landau { axis: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum ModelKind {
    LaplacianPotential,
    Hofstadter {
        p: i64,
        q: i64,
        /// `None` picks the symmetric gauge on open windows and the axis-0
        /// Landau gauge otherwise.
        gauge: Option<GaugeChoice>,
    },
    SshStack {
        t1: f64,
        t2: f64,
        /// Axis along which chains are stacked (ignored for `dim = 1`).
        stack_axis: usize,
        interlayer: f64,
    },
    DeloneLaplacian,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub half_widths: Vec<i64>,
    pub periodic: Vec<bool>,
    pub internal_dim: usize,
    pub hopping: f64,
}

impl ModelSpec {
    fn cube(kind: ModelKind, dim: usize, half_width: i64, boundary: Boundary, internal_dim: usize) -> Self {
        ModelSpec {
            kind,
            half_widths: vec![half_width; dim],
            periodic: vec![boundary == Boundary::Periodic; dim],
            internal_dim,
            hopping: 1.0,
        }
    }

    pub fn laplacian(dim: usize, half_width: i64, boundary: Boundary) -> Self {
        Self::cube(ModelKind::LaplacianPotential, dim, half_width, boundary, 1)
    }

    pub fn hofstadter(half_width: i64, p: i64, q: i64, boundary: Boundary) -> Self {
        Self::cube(ModelKind::Hofstadter { p, q, gauge: None }, 2, half_width, boundary, 1)
    }

    /// SSH chains with `t1 = 0.5`, `t2 = 1`, stacked along axis 0 with
    /// coupling 0.1. For `dim = 1` this is a single chain.
    pub fn ssh_stack(dim: usize, half_width: i64, boundary: Boundary) -> Self {
        let kind = ModelKind::SshStack { t1: 0.5, t2: 1.0, stack_axis: 0, interlayer: 0.1 };
        Self::cube(kind, dim, half_width, boundary, 2)
    }

    pub fn delone(dim: usize, half_width: i64, boundary: Boundary) -> Self {
        Self::cube(ModelKind::DeloneLaplacian, dim, half_width, boundary, 1)
    }

    pub fn with_internal_dim(mut self, n: usize) -> Self {
        self.internal_dim = n;
        self
    }

    pub fn with_gauge(mut self, g: GaugeChoice) -> Self {
        if let ModelKind::Hofstadter { gauge, .. } = &mut self.kind {
            *gauge = Some(g);
        }
        self
    }

    pub fn with_half_width(mut self, l: i64) -> Self {
        self.half_widths = vec![l; self.dim()];
        self
    }

    pub fn dim(&self) -> usize {
        self.half_widths.len()
    }

    pub fn window(&self) -> Result<Window> {
        Window::boxed(self.half_widths.clone())
    }

    /// Flux quantum `p/q` of a Hofstadter model.
    pub fn flux(&self) -> Option<(i64, i64)> {
        match self.kind {
            ModelKind::Hofstadter { p, q, .. } => Some((p, q)),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.dim();
        if d == 0 {
            return Err(Error::invalid("model dimension must be at least 1"));
        }
        if self.periodic.len() != d {
            return Err(Error::invalid("one boundary flag per axis is required"));
        }
        if self.internal_dim == 0 {
            return Err(Error::invalid("internal dimension must be positive"));
        }
        if !(self.hopping.is_finite() && self.hopping > 0.0) {
            return Err(Error::invalid("hopping must be positive"));
        }
        self.window()?;
        match &self.kind {
            ModelKind::LaplacianPotential | ModelKind::DeloneLaplacian => Ok(()),
            ModelKind::Hofstadter { q, gauge, .. } => {
                if d != 2 {
                    return Err(Error::invalid("hofstadter models are two-dimensional"));
                }
                if !(1..=MAX_FLUX_DENOMINATOR).contains(q) {
                    return Err(Error::invalid(format!("flux denominator must lie in 1..=64, got {q}")));
                }
                match gauge {
                    Some(GaugeChoice::Landau { axis }) if *axis > 1 => {
                        Err(Error::invalid(format!("landau axis {axis} out of range")))
                    }
                    _ => Ok(()),
                }
            }
            ModelKind::SshStack { t1, t2, stack_axis, interlayer } => {
                if self.internal_dim != 2 {
                    return Err(Error::invalid("ssh_stack requires internal dimension 2"));
                }
                if d > 2 {
                    return Err(Error::invalid("ssh_stack supports d = 1 or 2"));
                }
                if d == 2 && *stack_axis > 1 {
                    return Err(Error::invalid(format!("stack axis {stack_axis} out of range")));
                }
                if ![t1, t2, interlayer].iter().all(|v| v.is_finite()) {
                    return Err(Error::invalid("ssh hoppings must be finite"));
                }
                Ok(())
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct DisorderSpec {
    /// Width `W` of the uniform on-site distribution on `[-W/2, W/2]`.
    pub potential: f64,
    /// Bonds are scaled by `1 + delta`, `delta` uniform on `[-h/2, h/2]`.
    pub hopping: f64,
    /// Delone displacement amplitude (delone_laplacian only).
    pub positional: f64,
    pub seed: u64,
}

impl DisorderSpec {
    pub fn clean() -> Self {
        Self::default()
    }

    pub fn anderson(w: f64, seed: u64) -> Self {
        DisorderSpec { potential: w, seed, ..Self::default() }
    }

    pub fn is_clean(&self) -> bool {
        self.potential == 0.0 && self.hopping == 0.0 && self.positional == 0.0
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.potential >= 0.0 && self.potential.is_finite()) {
            return Err(Error::invalid("potential disorder must be finite and nonnegative"));
        }
        if !(0.0..2.0).contains(&self.hopping) {
            return Err(Error::invalid("hopping disorder must lie in [0, 2)"));
        }
        if !(0.0..0.5).contains(&self.positional) {
            return Err(Error::invalid("positional disorder must lie in [0, 0.5)"));
        }
        Ok(())
    }
}

/// A Hamiltonian split as `H = kinetic + potential` with `potential`
/// site-diagonal.
#[derive(Clone, Debug)]
pub struct ModelParts {
    pub kinetic: BlockOperator,
    pub potential: BlockOperator,
}

impl ModelParts {
    pub fn hamiltonian(&self) -> Result<BlockOperator> {
        let mut h = self.kinetic.add(&self.potential)?;
        h.mark_hermitian()
            .map_err(|e| Error::precondition("hermitian", format!("assembled hamiltonian: {e}")))?;
        Ok(h)
    }
}

fn unit_step(dim: usize, axis: usize) -> Vec<i64> {
    let mut s = vec![0; dim];
    s[axis] = 1;
    s
}

fn scalar(n: usize, v: f64) -> Block {
    Block::identity(n, n) * Complex64::new(v, 0.0)
}

struct BondDisorder {
    rng: CounterRng,
    amplitude: f64,
}

impl BondDisorder {
    fn factor(&self, key: u64) -> f64 {
        if self.amplitude == 0.0 {
            1.0
        } else {
            1.0 + self.rng.stream(key).range(-0.5 * self.amplitude, 0.5 * self.amplitude)
        }
    }
}

/// Adds the bond `y -> x` with block `b` and its adjoint.
fn add_bond(op: &mut BlockOperator, x: usize, y: usize, b: &Block) -> Result<()> {
    op.add_block(x, y, b)?;
    op.add_block(y, x, &b.adjoint())
}

fn laplacian_kinetic(geom: &Arc<Geometry>, n: usize, t: f64, bonds: &BondDisorder) -> Result<BlockOperator> {
    let d = geom.dim();
    let mut op = BlockOperator::zero(geom.clone(), n);
    for x in 0..geom.len() {
        op.add_block(x, x, &scalar(n, 2.0 * d as f64 * t))?;
        for axis in 0..d {
            if let Some(y) = geom.neighbor(x, &unit_step(d, axis)) {
                if y == x {
                    continue;
                }
                let f = bonds.factor((x * d + axis) as u64);
                add_bond(&mut op, y, x, &scalar(n, -t * f))?;
            }
        }
    }
    Ok(op)
}

fn ssh_kinetic(
    geom: &Arc<Geometry>,
    t1: f64,
    t2: f64,
    stack_axis: usize,
    interlayer: f64,
    bonds: &BondDisorder,
) -> Result<BlockOperator> {
    let d = geom.dim();
    let chain_axis = if d == 1 { 0 } else { 1 - stack_axis };
    let c = |v: f64| Complex64::new(v, 0.0);
    let zero = c(0.0);
    let mut op = BlockOperator::zero(geom.clone(), 2);
    for x in 0..geom.len() {
        let f = bonds.factor((x * 3) as u64);
        add_bond(&mut op, x, x, &(Block::from_row_slice(2, 2, &[zero, c(t1 * f), zero, zero])))?;
        if let Some(y) = geom.neighbor(x, &unit_step(d, chain_axis)) {
            let f = bonds.factor((x * 3 + 1) as u64);
            add_bond(&mut op, y, x, &Block::from_row_slice(2, 2, &[zero, c(t2 * f), zero, zero]))?;
        }
        if d == 2 && interlayer != 0.0 {
            if let Some(y) = geom.neighbor(x, &unit_step(d, stack_axis)) {
                if y != x {
                    let f = bonds.factor((x * 3 + 2) as u64);
                    add_bond(&mut op, y, x, &scalar(2, interlayer * f))?;
                }
            }
        }
    }
    Ok(op)
}

fn delone_kinetic(geom: &Arc<Geometry>, n: usize, t: f64, bonds: &BondDisorder) -> Result<BlockOperator> {
    let d = geom.dim();
    let reach = DELONE_CUTOFF.ceil() as i64;
    let mut steps = vec![vec![]];
    for _ in 0..d {
        steps = steps
            .into_iter()
            .flat_map(|s: Vec<i64>| {
                (-reach..=reach).map(move |k| {
                    let mut s = s.clone();
                    s.push(k);
                    s
                })
            })
            .collect();
    }
    let mut op = BlockOperator::zero(geom.clone(), n);
    for x in 0..geom.len() {
        let neighbours: BTreeSet<usize> = steps.iter().filter_map(|s| geom.neighbor(x, s)).filter(|&y| y > x).collect();
        for y in neighbours {
            let dist = geom.distance(x, y);
            if dist <= DELONE_CUTOFF {
                let w = t * (-(dist - 1.0)).exp() * bonds.factor((x * geom.len() + y) as u64);
                add_bond(&mut op, x, y, &scalar(n, -w))?;
                op.add_block(x, x, &scalar(n, w))?;
                op.add_block(y, y, &scalar(n, w))?;
            }
        }
    }
    Ok(op)
}

/// Landau gauge translation invariant along `axis` for field `b = 2 pi p/q`.
pub fn landau_gauge(b: f64, axis: usize) -> GaugeFunction {
    GaugeFunction::new(format!("landau(axis {axis})"), move |x, y| {
        let phase = if axis == 0 {
            -b * (x[0] - y[0]) * (x[1] + y[1]) / 2.0
        } else {
            b * (x[1] - y[1]) * (x[0] + y[0]) / 2.0
        };
        Complex64::from_polar(1.0, phase)
    })
}

/// Gauge used for a Hofstadter model on `geom`, derived from the magnetic
/// cocycle with flux `-2 pi p/q` per unit area.
pub fn hofstadter_gauge(spec: &ModelSpec, geom: &Geometry) -> Result<GaugeFunction> {
    let ModelKind::Hofstadter { p, q, gauge } = spec.kind else {
        return Err(Error::invalid("not a hofstadter model"));
    };
    let b = TAU * p as f64 / q as f64;
    let any_periodic = geom.periodic().iter().any(|&f| f);
    let choice = gauge.unwrap_or(if any_periodic { GaugeChoice::Landau { axis: 0 } } else { GaugeChoice::Symmetric });
    match choice {
        GaugeChoice::Symmetric => {
            if any_periodic {
                return Err(Error::invalid("the symmetric gauge needs open boundaries; use a landau gauge"));
            }
            let w = magnetic_cocycle(-b, 2)?;
            untwist(&w, &Site(vec![0, 0]), geom.window())
        }
        GaugeChoice::Landau { axis } => {
            let other = 1 - axis;
            if geom.is_periodic(other) {
                let m = geom.window().extent(other) as i64;
                if (p * m) % q != 0 {
                    return Err(Error::precondition(
                        "flux periodicity",
                        format!("window too small for q periods: extent {m} along axis {other} is not a multiple of q = {q}"),
                    ));
                }
            }
            Ok(landau_gauge(b, axis))
        }
    }
}

fn geometry_for(spec: &ModelSpec, dis: &DisorderSpec) -> Result<Arc<Geometry>> {
    let window = spec.window()?;
    let geom = if let ModelKind::DeloneLaplacian = spec.kind {
        let points = delone_perturb(&window, dis.positional, dis.seed)?;
        Geometry::from_point_set(window, &points, spec.periodic.clone())?
    } else {
        if dis.positional != 0.0 {
            return Err(Error::invalid("positional disorder applies to delone_laplacian only"));
        }
        Geometry::lattice(window, spec.periodic.clone())?
    };
    Ok(Arc::new(geom))
}

/// Builds `H = kinetic + potential` without assembling the sum.
pub fn build_parts(spec: &ModelSpec, dis: &DisorderSpec) -> Result<ModelParts> {
    spec.validate()?;
    dis.validate()?;
    let geom = geometry_for(spec, dis)?;
    let n = spec.internal_dim;
    let t = spec.hopping;
    let bonds = BondDisorder { rng: CounterRng::new(dis.seed, CounterRng::HOPPING), amplitude: dis.hopping };
    let kinetic = match &spec.kind {
        ModelKind::LaplacianPotential => laplacian_kinetic(&geom, n, t, &bonds)?,
        ModelKind::Hofstadter { .. } => {
            let v = hofstadter_gauge(spec, &geom)?;
            apply_gauge(&laplacian_kinetic(&geom, n, t, &bonds)?, &v)
        }
        ModelKind::SshStack { t1, t2, stack_axis, interlayer } => {
            ssh_kinetic(&geom, *t1, *t2, *stack_axis, *interlayer, &bonds)?
        }
        ModelKind::DeloneLaplacian => delone_kinetic(&geom, n, t, &bonds)?,
    };
    let rng = CounterRng::new(dis.seed, CounterRng::POTENTIAL);
    let w = dis.potential;
    let diag = (0..geom.len())
        .map(|x| {
            Block::from_fn(n, n, |a, b| {
                if a == b && w != 0.0 {
                    Complex64::new(rng.stream((x * n + a) as u64).range(-0.5 * w, 0.5 * w), 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
        })
        .collect();
    let potential = BlockOperator::diagonal(geom, n, diag)?;
    Ok(ModelParts { kinetic, potential })
}

/// The hermitian Hamiltonian of `spec` under disorder `dis`.
pub fn build_hamiltonian(spec: &ModelSpec, dis: &DisorderSpec) -> Result<BlockOperator> {
    build_parts(spec, dis)?.hamiltonian()
}

/// Partial Neumann sums for `(ic + Delta + V)^{-1}` and their residuals.
#[derive(Clone, Debug)]
pub struct NeumannResult {
    /// `sum_{n <= order} (-(ic + Delta)^{-1} V)^n (ic + Delta)^{-1}`.
    pub resolvent: BlockOperator,
    /// Measured `||(ic + Delta)^{-1} V||`.
    pub contraction: f64,
    /// `||(ic + Delta + V) S_m - 1||` for `m = 0..=order`.
    pub residuals: Vec<f64>,
    /// `q^{m+1} / (1 - q)` for `m = 0..=order`.
    pub bounds: Vec<f64>,
}

/// Floor below which residuals are dominated by double-precision roundoff.
pub const NEUMANN_ROUNDOFF: f64 = 1e-13;

impl NeumannResult {
    /// True when every residual is within its bound, up to roundoff.
    pub fn bound_met(&self) -> bool {
        self.residuals.iter().zip(&self.bounds).all(|(r, b)| *r <= b + NEUMANN_ROUNDOFF)
    }
}

pub fn neumann_resolvent(delta: &BlockOperator, v: &BlockOperator, c: f64, order: usize) -> Result<NeumannResult> {
    if !(c > 0.0) {
        return Err(Error::invalid(format!("c must be positive, got {c}")));
    }
    delta.add(v)?;
    if v.blocks().any(|(&(x, y), _)| x != y) {
        return Err(Error::precondition("diagonal potential", "V has off-diagonal blocks"));
    }
    let dim = delta.dim();
    let ic = DMatrix::<Complex64>::identity(dim, dim) * Complex64::new(0.0, c);
    let a = &ic + delta.to_dense();
    let g0 = a
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::precondition("invertible", "ic + Delta is singular"))?;
    let vd = v.to_dense();
    let gv = &g0 * &vd;
    let q = spectral_norm(&gv);
    if q >= 1.0 {
        return Err(Error::precondition("contraction", format!("||(ic+Delta)^-1 V|| = {q:.6} >= 1")));
    }
    let k = -gv;
    let full = &a + &vd;
    let id = DMatrix::<Complex64>::identity(dim, dim);
    let mut term = g0.clone();
    let mut sum = g0;
    let mut residuals = Vec::with_capacity(order + 1);
    let mut bounds = Vec::with_capacity(order + 1);
    for m in 0..=order {
        if m > 0 {
            term = &k * &term;
            sum += &term;
        }
        residuals.push(spectral_norm(&(&full * &sum - &id)));
        bounds.push(q.powi(m as i32 + 1) / (1.0 - q));
    }
    let resolvent = BlockOperator::from_dense(delta.geometry().clone(), delta.internal_dim(), &sum)?;
    Ok(NeumannResult { resolvent, contraction: q, residuals, bounds })
}

fn cfg_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

fn get_f64(t: &toml::Table, key: &str) -> Result<Option<f64>> {
    match t.get(key) {
        None => Ok(None),
        Some(toml::Value::Float(f)) => Ok(Some(*f)),
        Some(toml::Value::Integer(i)) => Ok(Some(*i as f64)),
        Some(other) => Err(cfg_err(format!("`{key}` must be a number, got {other}"))),
    }
}

fn get_i64(t: &toml::Table, key: &str) -> Result<Option<i64>> {
    match t.get(key) {
        None => Ok(None),
        Some(toml::Value::Integer(i)) => Ok(Some(*i)),
        Some(other) => Err(cfg_err(format!("`{key}` must be an integer, got {other}"))),
    }
}

fn get_str<'a>(t: &'a toml::Table, key: &str) -> Result<Option<&'a str>> {
    match t.get(key) {
        None => Ok(None),
        Some(toml::Value::String(s)) => Ok(Some(s)),
        Some(other) => Err(cfg_err(format!("`{key}` must be a string, got {other}"))),
    }
}

fn require<T>(v: Option<T>, key: &str, section: &str) -> Result<T> {
    v.ok_or_else(|| cfg_err(format!("[{section}] is missing `{key}`")))
}

/// Rejects keys of `t` outside `allowed`.
pub fn check_keys(t: &toml::Table, section: &str, allowed: &[&str]) -> Result<()> {
    for k in t.keys() {
        if !allowed.contains(&k.as_str()) {
            return Err(cfg_err(format!("unknown key `{k}` in [{section}]")));
        }
    }
    Ok(())
}

fn nonneg_usize(v: i64, key: &str) -> Result<usize> {
    usize::try_from(v).map_err(|_| cfg_err(format!("`{key}` must be nonnegative")))
}

impl ModelSpec {
    /// Parses a `[model]` table.
    ///
    /// Common keys: `kind`, `dim`, `half_width`, `boundary` (`open` or
    /// `periodic`), `internal_dim`, `hopping`. Hofstadter adds `flux_p`,
    /// `flux_q`, `gauge` (`symmetric` or `landau`) and `landau_axis`;
    /// ssh_stack adds `t1`, `t2`, `stack_axis`, `interlayer`.
    pub fn from_toml(t: &toml::Table) -> Result<Self> {
        const COMMON: [&str; 6] = ["kind", "dim", "half_width", "boundary", "internal_dim", "hopping"];
        let kind = require(get_str(t, "kind")?, "kind", "model")?;
        let extra: &[&str] = match kind {
            "laplacian_potential" | "delone_laplacian" => &[],
            "hofstadter" => &["flux_p", "flux_q", "gauge", "landau_axis"],
            "ssh_stack" => &["t1", "t2", "stack_axis", "interlayer"],
            other => return Err(cfg_err(format!("unknown model kind `{other}`"))),
        };
        let allowed: Vec<&str> = COMMON.iter().chain(extra).copied().collect();
        check_keys(t, "model", &allowed)?;

        let default_dim = if kind == "hofstadter" { 2 } else { 1 };
        let dim = nonneg_usize(get_i64(t, "dim")?.unwrap_or(default_dim), "dim")?;
        let half_width = require(get_i64(t, "half_width")?, "half_width", "model")?;
        let boundary = match get_str(t, "boundary")?.unwrap_or("open") {
            "open" => Boundary::Open,
            "periodic" => Boundary::Periodic,
            other => return Err(cfg_err(format!("boundary must be `open` or `periodic`, got `{other}`"))),
        };
        let model_kind = match kind {
            "laplacian_potential" => ModelKind::LaplacianPotential,
            "delone_laplacian" => ModelKind::DeloneLaplacian,
            "hofstadter" => {
                let p = require(get_i64(t, "flux_p")?, "flux_p", "model")?;
                let q = require(get_i64(t, "flux_q")?, "flux_q", "model")?;
                let axis = get_i64(t, "landau_axis")?;
                let gauge = match get_str(t, "gauge")? {
                    None if axis.is_some() => return Err(cfg_err("`landau_axis` requires gauge = \"landau\"")),
                    None => None,
                    Some("symmetric") if axis.is_some() => {
                        return Err(cfg_err("`landau_axis` requires gauge = \"landau\""))
                    }
                    Some("symmetric") => Some(GaugeChoice::Symmetric),
                    Some("landau") => Some(GaugeChoice::Landau { axis: nonneg_usize(axis.unwrap_or(0), "landau_axis")? }),
                    Some(other) => return Err(cfg_err(format!("unknown gauge `{other}`"))),
                };
                ModelKind::Hofstadter { p, q, gauge }
            }
            _ => ModelKind::SshStack {
                t1: get_f64(t, "t1")?.unwrap_or(0.5),
                t2: get_f64(t, "t2")?.unwrap_or(1.0),
                stack_axis: nonneg_usize(get_i64(t, "stack_axis")?.unwrap_or(0), "stack_axis")?,
                interlayer: get_f64(t, "interlayer")?.unwrap_or(0.1),
            },
        };
        let default_n = if kind == "ssh_stack" { 2 } else { 1 };
        let internal_dim = nonneg_usize(get_i64(t, "internal_dim")?.unwrap_or(default_n), "internal_dim")?;
        let mut spec = ModelSpec::cube(model_kind, dim, half_width, boundary, internal_dim);
        spec.hopping = get_f64(t, "hopping")?.unwrap_or(1.0);
        spec.validate().map_err(|e| cfg_err(e.to_string()))?;
        Ok(spec)
    }
}

impl DisorderSpec {
    /// Parses an optional `[disorder]` table with keys `potential`,
    /// `hopping`, `positional`, `seed`. A missing table means no disorder.
    pub fn from_toml(t: Option<&toml::Table>) -> Result<Self> {
        let Some(t) = t else { return Ok(Self::clean()) };
        check_keys(t, "disorder", &["potential", "hopping", "positional", "seed"])?;
        let dis = DisorderSpec {
            potential: get_f64(t, "potential")?.unwrap_or(0.0),
            hopping: get_f64(t, "hopping")?.unwrap_or(0.0),
            positional: get_f64(t, "positional")?.unwrap_or(0.0),
            seed: get_i64(t, "seed")?.map(|s| s as u64).unwrap_or(0),
        };
        dis.validate().map_err(|e| cfg_err(e.to_string()))?;
        Ok(dis)
    }
}
