//! Patch tests, error measures and convergence studies.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{
    admissible_poly_field, fd_step, relative_divergence_residual, AnalyticField, BeamField, BeamVariant,
    HoleProblem, PolyProblem, ADMISSIBILITY_LIMIT,
};
use crate::blending::ShapeValue;
use crate::elasticity::{
    assemble, constrain_vertex, element_stress_default, impose_field_on_boundary, interpolate_field,
    solve_constrained, strain_energy, traction_load, FeSpace, LinearSystem, Material,
};
use crate::error::{Error, Result};
use crate::mesh::builtin::{self, CANTILEVER_CORNERS, L_CORNER};
use crate::mesh::{
    bilinear_jacobian, refine_y_region, uniform_refine, Discretization, Mesh, RefineParams, Region, Space,
};
use crate::polybasis::{BasisFamily, NodeDistribution};
use crate::quadrature::{composite_rule_2d, MAX_POINTS};

/// Families of the x- and y-region, in that order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pairing {
    LaLa,
    LaLe,
    LeLa,
    LeLe,
}

impl Pairing {
    pub const ALL: [Pairing; 4] = [Pairing::LaLa, Pairing::LaLe, Pairing::LeLa, Pairing::LeLe];

    pub fn families(self, dist: NodeDistribution) -> (BasisFamily, BasisFamily) {
        let la = BasisFamily::Lagrange(dist);
        let le = BasisFamily::Hierarchic;
        match self {
            Pairing::LaLa => (la, la),
            Pairing::LaLe => (la, le),
            Pairing::LeLa => (le, la),
            Pairing::LeLe => (le, le),
        }
    }

    pub fn discretization(self, dist: NodeDistribution, p_x: usize, p_y: usize) -> Result<Discretization> {
        let (fx, fy) = self.families(dist);
        Ok(Discretization::new(Space::new(fx, p_x)?, Space::new(fy, p_y)?))
    }
}

/// Patch test protocol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PatchVersion {
    /// Every DOF prescribed; checks the residual `K u − f`.
    A,
    /// Whole boundary prescribed, interior solved.
    B,
    /// Rigid-body constraints plus boundary tractions (beam fields only).
    C,
}

/// Exact field of a patch test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PatchField {
    Linear,
    QuadraticBeam,
    CubicBeam,
    HighOrder { order: usize },
}

enum Exact {
    Poly(PolyProblem),
    Beam(BeamField),
}

impl Exact {
    fn field(&self) -> &dyn AnalyticField {
        match self {
            Exact::Poly(p) => p,
            Exact::Beam(b) => b,
        }
    }
}

impl PatchField {
    fn resolve(self, m: &Material) -> Result<Exact> {
        Ok(match self {
            PatchField::Linear => Exact::Poly(PolyProblem { field: admissible_poly_field(1, m.nu)?, material: *m }),
            PatchField::HighOrder { order } => {
                Exact::Poly(PolyProblem { field: admissible_poly_field(order, m.nu)?, material: *m })
            }
            PatchField::QuadraticBeam => Exact::Beam(BeamField::standard(BeamVariant::QuadraticBending, *m)),
            PatchField::CubicBeam => Exact::Beam(BeamField::standard(BeamVariant::CubicBending, *m)),
        })
    }
}

/// One patch test run.
#[derive(Debug, Clone, PartialEq)]
pub struct PatchConfig {
    pub mesh: Mesh,
    pub refine: RefineParams,
    pub p_x: usize,
    pub p_y: usize,
    pub pairing: Pairing,
    pub distribution: NodeDistribution,
    pub version: PatchVersion,
    pub field: PatchField,
    pub material: Material,
}

/// Outcome of a patch test.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PatchReport {
    pub version: PatchVersion,
    pub n_dof: usize,
    /// Mean relative stress error over all recovery points and components.
    pub e_rel: f64,
    /// The same mean per stress component (σx, σy, τxy).
    pub component_errors: [f64; 3],
    /// Relative L2 displacement error.
    pub displacement_error: f64,
    /// `‖K u_pre − f‖∞ / (‖K‖∞ ‖u_pre‖∞)`, Version A only.
    pub residual: Option<f64>,
}

impl PatchReport {
    /// Residual for Version A, stress error otherwise.
    pub fn error(&self) -> f64 {
        self.residual.unwrap_or(self.e_rel)
    }
}

fn sample_points(bbox: [f64; 4], n: usize, seed: u64) -> Vec<[f64; 2]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| [rng.random_range(bbox[0]..bbox[2]), rng.random_range(bbox[1]..bbox[3])])
        .collect()
}

/// Boundary traction `σ n` of `field`.
fn traction_of<'a>(field: &'a dyn AnalyticField) -> impl Fn([f64; 2], [f64; 2]) -> [f64; 2] + 'a {
    move |p, n| {
        let s = field.stress(p).unwrap_or([0.0; 3]);
        [s[0] * n[0] + s[2] * n[1], s[2] * n[0] + s[1] * n[1]]
    }
}

fn near(a: f64, b: f64) -> bool {
    (a - b).abs() < 1e-9 * (1.0 + b.abs())
}

/// Runs a patch test.
pub fn run_patch_test(cfg: &PatchConfig) -> Result<PatchReport> {
    cfg.material.validate()?;
    let exact = cfg.field.resolve(&cfg.material)?;
    let field = exact.field();
    let bbox = cfg.mesh.bbox();
    if field.stress([bbox[0], bbox[1]]).is_none() {
        return Err(Error::Config("patch tests need a field with closed-form stresses".into()));
    }
    let stress = |p: [f64; 2]| field.stress(p).unwrap_or([0.0; 3]);
    let size = (bbox[2] - bbox[0]).max(bbox[3] - bbox[1]);
    let res = relative_divergence_residual(&stress, &sample_points(bbox, 100, 1), fd_step(size));
    if res > ADMISSIBILITY_LIMIT {
        return Err(Error::Config(format!("exact field is not equilibrated (relative residual {res:e})")));
    }

    let mesh = if cfg.refine.n_y > 1 || !cfg.refine.focus.is_empty() {
        refine_y_region(&cfg.mesh, &cfg.refine)?
    } else {
        cfg.mesh.clone()
    };
    let disc = cfg.pairing.discretization(cfg.distribution, cfg.p_x, cfg.p_y)?;
    let space = FeSpace::new(mesh, disc)?;
    let m = &cfg.material;
    let u_field = |p: [f64; 2]| field.displacement(p);
    let mut sys = assemble(&space, m)?;

    let (u, residual) = match cfg.version {
        PatchVersion::A => {
            let u_pre = interpolate_field(&space, &u_field)?;
            let f = traction_load(&space, &|_, _| true, &traction_of(field))?;
            let ku = sys.k.mul_vec(&u_pre);
            let r = ku.iter().zip(&f).fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
            let un = u_pre.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            let scale = sys.k.norm_inf() * un;
            (u_pre, Some(if scale > 0.0 { r / scale } else { r }))
        }
        PatchVersion::B => {
            sys.constraints = impose_field_on_boundary(&space, &u_field, &|_, _| true, [true, true])?;
            (solve_constrained(&sys)?.0, None)
        }
        PatchVersion::C => {
            let Exact::Beam(beam) = &exact else {
                return Err(Error::Config("version C is available for the beam fields only".into()));
            };
            let mut c = Vec::new();
            match beam.variant {
                BeamVariant::QuadraticBending => {
                    let left = |a: [f64; 2], b: [f64; 2]| near(a[0], 0.0) && near(b[0], 0.0);
                    c.extend(impose_field_on_boundary(&space, &u_field, &left, [true, false])?);
                    c.extend(constrain_vertex(&space, [0.0, 0.0], u_field([0.0, 0.0]), [false, true])?);
                }
                BeamVariant::CubicBending => {
                    c.extend(constrain_vertex(&space, [0.0, 0.0], u_field([0.0, 0.0]), [true, true])?);
                    let top = [0.0, beam.c];
                    c.extend(constrain_vertex(&space, top, u_field(top), [true, false])?);
                }
            }
            sys.constraints = c;
            sys.f = traction_load(&space, &|_, _| true, &traction_of(field))?;
            (solve_constrained(&sys)?.0, None)
        }
    };

    let (e_rel, component_errors) = mean_relative_stress_error(&space, &u, m, &stress)?;
    let displacement_error = l2_error(&space, &u, &u_field)?;
    Ok(PatchReport { version: cfg.version, n_dof: space.n_dof(), e_rel, component_errors, displacement_error, residual })
}

/// Mean over recovery points and components of `|σ_ref − σ_h| / max(|σ_ref|, 1e-3 max|σ_ref|)`,
/// overall and per component.
pub fn mean_relative_stress_error(
    space: &FeSpace,
    u: &[f64],
    m: &Material,
    exact: &(dyn Fn([f64; 2]) -> [f64; 3] + Sync),
) -> Result<(f64, [f64; 3])> {
    let per_element = (0..space.mesh().len())
        .into_par_iter()
        .map(|e| element_stress_default(space, e, u, m))
        .collect::<Result<Vec<_>>>()?;
    let pairs: Vec<([f64; 3], [f64; 3])> = per_element.into_iter().flatten().map(|(p, s)| (exact(p), s)).collect();
    if pairs.is_empty() {
        return Err(Error::Study("no stress recovery points".into()));
    }
    let smax = pairs.iter().flat_map(|(r, _)| *r).fold(0.0f64, |a, v| a.max(v.abs()));
    let floor = if smax > 0.0 { 1e-3 * smax } else { 1.0 };
    let mut comp = [0.0; 3];
    for (r, s) in &pairs {
        for c in 0..3 {
            comp[c] += (r[c] - s[c]).abs() / r[c].abs().max(floor);
        }
    }
    let n = pairs.len() as f64;
    let comp = comp.map(|v| v / n);
    Ok(((comp[0] + comp[1] + comp[2]) / 3.0, comp))
}

/// Relative L2 displacement error `‖u_ex − u_h‖ / ‖u_ex‖`, integrated with
/// `p + 3` Gauss points per direction on each integration cell.
pub fn l2_error(space: &FeSpace, u: &[f64], exact: &(dyn Fn([f64; 2]) -> [f64; 2] + Sync)) -> Result<f64> {
    let parts = (0..space.mesh().len())
        .into_par_iter()
        .map(|e| {
            let set = space.shape_set(e);
            let x = space.mesh().element_coords(e);
            let rule = composite_rule_2d(&set.subdomain_grid(), (set.max_order() + 3).min(MAX_POINTS))?;
            let coeffs = space.element_coefficients(e, u);
            let mut buf = vec![ShapeValue::zero(); set.len()];
            let (mut num, mut den) = (0.0, 0.0);
            for q in &rule.points {
                set.eval_all(q.xi, q.eta, &mut buf);
                let mut uh = [0.0; 2];
                for (s, c) in buf.iter().zip(&coeffs) {
                    uh[0] += s.value * c[0];
                    uh[1] += s.value * c[1];
                }
                let j = bilinear_jacobian(&x, q.xi, q.eta);
                let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
                let ue = exact(crate::mesh::bilinear_point(&x, q.xi, q.eta));
                let w = q.w * det;
                num += w * ((ue[0] - uh[0]).powi(2) + (ue[1] - uh[1]).powi(2));
                den += w * (ue[0] * ue[0] + ue[1] * ue[1]);
            }
            Ok((num, den))
        })
        .collect::<Result<Vec<_>>>()?;
    let (num, den) = parts.iter().fold((0.0, 0.0), |(a, b), (n, d)| (a + n, b + d));
    if den <= 0.0 {
        return Err(Error::Study("exact field has zero L2 norm".into()));
    }
    Ok((num / den).sqrt())
}

/// `sqrt((U_ref − U) / U_ref)` from total strain energies.
pub fn energy_error_from(energy: f64, reference: f64) -> Result<f64> {
    if !(reference > 0.0) {
        return Err(Error::Study(format!("reference energy {reference:e} is not positive")));
    }
    let r = (reference - energy) / reference;
    if r < -1e-12 {
        return Err(Error::Study(format!(
            "numerical energy exceeds the reference by {:e} (relative); reference not converged",
            -r
        )));
    }
    Ok(r.max(0.0).sqrt())
}

/// Relative energy-norm error of `u` on `k` against `u_ref` on `k_ref`.
pub fn energy_error(
    k: &crate::elasticity::CscMatrix,
    u: &[f64],
    k_ref: &crate::elasticity::CscMatrix,
    u_ref: &[f64],
) -> Result<f64> {
    energy_error_from(strain_energy(k, u), strain_energy(k_ref, u_ref))
}

/// One row of a study: DOF count, error and the discretization that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StudyRow {
    pub n_dof: usize,
    pub error: f64,
    pub p_x: usize,
    pub p_y: usize,
    pub level: usize,
}

/// Convergence rates of one refinement series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    /// `log(E₂/E₁) / log(N₂/N₁)` for consecutive rows.
    pub two_point: Vec<f64>,
    /// Least-squares slope over the fitting window.
    pub slope: f64,
    /// Rows that entered the fit.
    pub used: usize,
}

/// Errors below this are treated as round-off and left out of rate fits.
pub const ROUND_OFF_FLOOR: f64 = 1e-11;

/// Two-point rates and a least-squares slope over the last `window` rows
/// whose error is above [`ROUND_OFF_FLOOR`].
pub fn convergence_rate(rows: &[StudyRow], window: usize) -> Result<RateFit> {
    if rows.len() < 2 {
        return Err(Error::Study(format!("need at least 2 rows, got {}", rows.len())));
    }
    let two_point = rows
        .windows(2)
        .map(|w| (w[1].error / w[0].error).log10() / (w[1].n_dof as f64 / w[0].n_dof as f64).log10())
        .collect();
    let usable: Vec<&StudyRow> = rows.iter().filter(|r| r.error >= ROUND_OFF_FLOOR).collect();
    let tail = &usable[usable.len().saturating_sub(window.max(2))..];
    if tail.len() < 2 {
        return Err(Error::Study("fewer than 2 rows above the round-off floor".into()));
    }
    let xs: Vec<f64> = tail.iter().map(|r| (r.n_dof as f64).log10()).collect();
    let ys: Vec<f64> = tail.iter().map(|r| r.error.log10()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Study("all fitted rows have the same DOF count".into()));
    }
    Ok(RateFit { two_point, slope: sxy / sxx, used: tail.len() })
}

/// Optimal rate of the L2 error with respect to the DOF count.
pub fn theoretical_rate(p_min: usize) -> f64 {
    -((p_min + 1) as f64) / 2.0
}

/// A refinement series with its fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesResult {
    pub p_x: usize,
    pub p_y: usize,
    pub rows: Vec<StudyRow>,
    pub fit: Option<RateFit>,
    pub theoretical: f64,
}

/// Smooth exact solution of an h-convergence study.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ConvField {
    /// Admissible polynomial of the given order on the two-quad mesh.
    Poly { order: usize },
    /// Plate with a hole of radius `a` under remote stress `sigma0`.
    Hole { a: f64, sigma0: f64 },
}

/// h-refinement study with full-boundary displacement data.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceStudy {
    pub field: ConvField,
    pub base: Mesh,
    pub p_x: usize,
    pub p_y: Vec<usize>,
    pub pairing: Pairing,
    pub distribution: NodeDistribution,
    pub n_y: usize,
    pub n_s: usize,
    /// Uniform refinements `0..levels` of the base mesh.
    pub levels: usize,
    pub material: Material,
    /// Number of trailing rows in the slope fit.
    pub window: usize,
}

impl ConvergenceStudy {
    /// Polynomial field of order 8 on the two-quad mesh, Lagrange/hierarchic coupling.
    pub fn poly(p_y: Vec<usize>, levels: usize) -> Self {
        Self {
            field: ConvField::Poly { order: 8 },
            base: builtin::two_quad(),
            p_x: 8,
            p_y,
            pairing: Pairing::LaLe,
            distribution: NodeDistribution::Gll,
            n_y: 2,
            n_s: 1,
            levels,
            material: Material::aluminum(),
            window: 3,
        }
    }

    /// Plate with a hole, `a = 1`, on the 2a × 4a quadrant strip.
    pub fn hole(p_y: Vec<usize>, levels: usize) -> Self {
        Self {
            field: ConvField::Hole { a: 1.0, sigma0: 1.0 },
            base: builtin::hole_quadrant(1.0),
            ..Self::poly(p_y, levels)
        }
    }

    fn exact(&self) -> Result<Box<dyn AnalyticField>> {
        Ok(match self.field {
            ConvField::Poly { order } => Box::new(PolyProblem {
                field: admissible_poly_field(order, self.material.nu)?,
                material: self.material,
            }),
            ConvField::Hole { a, sigma0 } => Box::new(HoleProblem::new(sigma0, a, self.material)?),
        })
    }

    /// Meshes of all levels.
    pub fn meshes(&self) -> Result<Vec<Mesh>> {
        let params = RefineParams::new(self.n_y, self.n_s)?;
        let mut base = self.base.clone();
        let mut out = Vec::with_capacity(self.levels);
        for k in 0..self.levels {
            if k > 0 {
                base = uniform_refine(&base)?;
            }
            out.push(if self.n_y > 1 { refine_y_region(&base, &params)? } else { base.clone() });
        }
        Ok(out)
    }

    pub fn run(&self) -> Result<Vec<SeriesResult>> {
        if self.levels < 1 {
            return Err(Error::Config("a convergence study needs at least one level".into()));
        }
        let exact = self.exact()?;
        let meshes = self.meshes()?;
        self.p_y
            .par_iter()
            .map(|&p_y| {
                let disc = self.pairing.discretization(self.distribution, self.p_x, p_y)?;
                let rows = meshes
                    .iter()
                    .enumerate()
                    .map(|(level, mesh)| {
                        let space = FeSpace::new(mesh.clone(), disc)?;
                        let uf = |p: [f64; 2]| exact.displacement(p);
                        let mut sys = assemble(&space, &self.material)?;
                        sys.constraints = impose_field_on_boundary(&space, &uf, &|_, _| true, [true, true])?;
                        let (u, _) = solve_constrained(&sys)?;
                        Ok(StudyRow { n_dof: space.n_dof(), error: l2_error(&space, &u, &uf)?, p_x: self.p_x, p_y, level })
                    })
                    .collect::<Result<Vec<_>>>()?;
                let fit = convergence_rate(&rows, self.window).ok();
                Ok(SeriesResult {
                    p_x: self.p_x,
                    p_y,
                    rows,
                    fit,
                    theoretical: theoretical_rate(self.p_x.min(p_y)),
                })
            })
            .collect()
    }
}

/// p-sweep of the high-order patch test (Version B) on `[0, 2] × [0, 1]`
/// with two refinement passes; error is the relative L2 displacement error.
pub fn high_order_sweep(
    order: usize,
    ps: &[usize],
    pairing: Pairing,
    distribution: NodeDistribution,
    material: Material,
) -> Result<Vec<StudyRow>> {
    ps.par_iter()
        .map(|&p| {
            let cfg = PatchConfig {
                mesh: builtin::rect_pair(2.0, 1.0),
                refine: RefineParams::new(2, 2)?,
                p_x: p,
                p_y: p,
                pairing,
                distribution,
                version: PatchVersion::B,
                field: PatchField::HighOrder { order },
                material,
            };
            let r = run_patch_test(&cfg)?;
            Ok(StudyRow { n_dof: r.n_dof, error: r.displacement_error, p_x: p, p_y: p, level: 2 })
        })
        .collect()
}

/// One point of the patch-test parameter space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Combination {
    pub pairing: Pairing,
    pub distribution: NodeDistribution,
    pub n_y: usize,
    pub n_s: usize,
    pub p_x: usize,
    pub p_y: usize,
}

impl Combination {
    pub fn patch_config(&self, mesh: Mesh, field: PatchField, version: PatchVersion, material: Material) -> Result<PatchConfig> {
        Ok(PatchConfig {
            mesh,
            refine: RefineParams::new(self.n_y, self.n_s)?,
            p_x: self.p_x,
            p_y: self.p_y,
            pairing: self.pairing,
            distribution: self.distribution,
            version,
            field,
            material,
        })
    }
}

const DISTRIBUTIONS: [NodeDistribution; 2] = [NodeDistribution::Gll, NodeDistribution::Glc];

/// All 4 · 2 · 4 · 4 · 7 · 7 = 6272 combinations with `n_y, n_s ∈ 1..=4`, `p ∈ 2..=8`.
pub fn exhaustive_combinations() -> Vec<Combination> {
    let mut out = Vec::with_capacity(6272);
    for pairing in Pairing::ALL {
        for distribution in DISTRIBUTIONS {
            for n_y in 1..=4 {
                for n_s in 1..=4 {
                    for p_x in 2..=8 {
                        for p_y in 2..=8 {
                            out.push(Combination { pairing, distribution, n_y, n_s, p_x, p_y });
                        }
                    }
                }
            }
        }
    }
    out
}

/// 64 combinations: two per (pairing, distribution, n_y, n_s) stratum with
/// `n_y, n_s ∈ {1, 2}`, the `(p_x, p_y)` pairs from `{2, 4, 6, 8}²` cycling
/// so that each of the 16 pairs occurs four times.
pub fn stratified_sample() -> Vec<Combination> {
    const P: [usize; 4] = [2, 4, 6, 8];
    let mut out = Vec::with_capacity(64);
    let mut k = 0usize;
    for pairing in Pairing::ALL {
        for distribution in DISTRIBUTIONS {
            for n_y in 1..=2 {
                for n_s in 1..=2 {
                    for _ in 0..2 {
                        out.push(Combination { pairing, distribution, n_y, n_s, p_x: P[k % 4], p_y: P[(k / 4) % 4] });
                        k += 1;
                    }
                }
            }
        }
    }
    out
}

/// Runs a patch test for every combination.
pub fn patch_sweep(
    combos: &[Combination],
    mesh: &Mesh,
    field: PatchField,
    version: PatchVersion,
    material: Material,
) -> Result<Vec<(Combination, PatchReport)>> {
    combos
        .par_iter()
        .map(|c| Ok((*c, run_patch_test(&c.patch_config(mesh.clone(), field, version, material)?)?)))
        .collect()
}

/// Benchmarks with a singular point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SingularProblem {
    /// L-domain `[0, 20]² \ (10, 20]²` pulled upward at the top of its left leg.
    LDomain,
    /// Cantilever `[0, 10] × [0, 2]` clamped on the left, shear load at the tip.
    Cantilever,
}

impl SingularProblem {
    pub fn base_mesh(self) -> Mesh {
        match self {
            SingularProblem::LDomain => builtin::l_domain(),
            SingularProblem::Cantilever => builtin::cantilever(builtin::CANTILEVER_SEED),
        }
    }

    /// Singular points around which the y-region is refined.
    pub fn focus(self) -> Vec<[f64; 2]> {
        match self {
            SingularProblem::LDomain => vec![L_CORNER],
            SingularProblem::Cantilever => CANTILEVER_CORNERS.to_vec(),
        }
    }

    /// Assembled system with this problem's supports and loads.
    pub fn system(self, space: &FeSpace, m: &Material) -> Result<LinearSystem> {
        let mut sys = assemble(space, m)?;
        let zero = |_: [f64; 2]| [0.0; 2];
        match self {
            SingularProblem::LDomain => {
                let bottom = |a: [f64; 2], b: [f64; 2]| near(a[1], 0.0) && near(b[1], 0.0);
                sys.constraints = impose_field_on_boundary(space, &zero, &bottom, [false, true])?;
                sys.constraints.extend(constrain_vertex(space, [0.0, 0.0], [0.0; 2], [true, false])?);
                let top = |a: [f64; 2], b: [f64; 2]| near(a[1], 20.0) && near(b[1], 20.0);
                sys.f = traction_load(space, &top, &|_, _| [0.0, 1.0])?;
            }
            SingularProblem::Cantilever => {
                let left = |a: [f64; 2], b: [f64; 2]| near(a[0], 0.0) && near(b[0], 0.0);
                sys.constraints = impose_field_on_boundary(space, &zero, &left, [true, true])?;
                let tip = |a: [f64; 2], b: [f64; 2]| near(a[0], 10.0) && near(b[0], 10.0);
                sys.f = traction_load(space, &tip, &|_, _| [0.0, -1.0])?;
            }
        }
        Ok(sys)
    }

    /// Base mesh refined `uniform` times, then `n_s` focus passes with `n_y`
    /// children (none when `n_s == 0`). `all_x` drops the y-region tags.
    pub fn mesh(self, uniform: usize, n_y: usize, n_s: usize, all_x: bool) -> Result<Mesh> {
        let mut m = self.base_mesh();
        if all_x {
            m = m.with_regions(vec![Region::X; m.len()])?;
        }
        for _ in 0..uniform {
            m = uniform_refine(&m)?;
        }
        if n_s > 0 && !all_x {
            m = refine_y_region(&m, &RefineParams::new(n_y, n_s)?.with_focus(self.focus()))?;
        }
        Ok(m)
    }

    /// Solves on `mesh` with uniform spectral GLL elements of order `p`;
    /// returns `(n_dof, strain energy)`.
    pub fn energy(self, mesh: Mesh, p: usize, m: &Material) -> Result<(usize, f64)> {
        let disc = Discretization::uniform(Space::new(BasisFamily::Lagrange(NodeDistribution::Gll), p)?);
        let space = FeSpace::new(mesh, disc)?;
        let sys = self.system(&space, m)?;
        let (u, _) = solve_constrained(&sys)?;
        Ok((space.n_dof(), strain_energy(&sys.k, &u)))
    }
}

/// Overkill solution parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReferenceSpec {
    pub uniform: usize,
    pub n_y: usize,
    pub n_s: usize,
    pub p: usize,
}

impl Default for ReferenceSpec {
    /// Three uniform refinements and six focus passes at p = 6.
    fn default() -> Self {
        Self { uniform: 3, n_y: 2, n_s: 6, p: 6 }
    }
}

/// Local refinement against uniform spectral meshes at equal `p`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SingularComparison {
    pub p: usize,
    pub local: StudyRow,
    /// Smallest uniform mesh with at least as many DOFs as `local`.
    pub uniform: StudyRow,
}

impl SingularComparison {
    pub fn ratio(&self) -> f64 {
        self.local.error / self.uniform.error
    }
}

/// Energy errors of the `(n_y, n_s)` focus-refined mesh and of the
/// coarsest uniform all-x mesh with no fewer DOFs, for each `p`.
pub fn singular_comparison(
    problem: SingularProblem,
    ps: &[usize],
    n_y: usize,
    n_s: usize,
    reference: ReferenceSpec,
    m: &Material,
) -> Result<(f64, Vec<SingularComparison>)> {
    let ref_mesh = problem.mesh(reference.uniform, reference.n_y, reference.n_s, false)?;
    let (_, u_ref) = problem.energy(ref_mesh, reference.p, m)?;
    let rows = ps
        .par_iter()
        .map(|&p| {
            let (nd, en) = problem.energy(problem.mesh(0, n_y, n_s, false)?, p, m)?;
            let local = StudyRow { n_dof: nd, error: energy_error_from(en, u_ref)?, p_x: p, p_y: p, level: n_s };
            let mut level = 0;
            loop {
                let (ud, ue) = problem.energy(problem.mesh(level, 0, 0, true)?, p, m)?;
                if ud >= nd || level >= 6 {
                    let uniform = StudyRow { n_dof: ud, error: energy_error_from(ue, u_ref)?, p_x: p, p_y: p, level };
                    return Ok(SingularComparison { p, local, uniform });
                }
                level += 1;
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((u_ref, rows))
}

/// p-refinement curves: uniform spectral mesh (`sem_uniform` refinements,
/// rows with level 0) and focus-refined meshes for each `n_s` (level = n_s).
pub fn singular_p_study(
    problem: SingularProblem,
    ps: &[usize],
    sem_uniform: usize,
    n_y: usize,
    n_s_values: &[usize],
    reference: ReferenceSpec,
    m: &Material,
) -> Result<(f64, Vec<StudyRow>)> {
    let ref_mesh = problem.mesh(reference.uniform, reference.n_y, reference.n_s, false)?;
    let (_, u_ref) = problem.energy(ref_mesh, reference.p, m)?;
    let mut variants = vec![(0usize, problem.mesh(sem_uniform, 0, 0, true)?)];
    for &n_s in n_s_values {
        variants.push((n_s, problem.mesh(0, n_y, n_s, false)?));
    }
    let jobs: Vec<(usize, &Mesh, usize)> = variants
        .iter()
        .flat_map(|(lvl, mesh)| ps.iter().map(move |&p| (*lvl, mesh, p)))
        .collect();
    let rows = jobs
        .par_iter()
        .map(|&(level, mesh, p)| {
            let (nd, en) = problem.energy(mesh.clone(), p, m)?;
            Ok(StudyRow { n_dof: nd, error: energy_error_from(en, u_ref)?, p_x: p, p_y: p, level })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((u_ref, rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rate_arithmetic() {
        let rows = [
            StudyRow { n_dof: 100, error: 1e-2, p_x: 1, p_y: 1, level: 0 },
            StudyRow { n_dof: 1000, error: 1e-3, p_x: 1, p_y: 1, level: 1 },
        ];
        let fit = convergence_rate(&rows, 3).unwrap();
        assert!((fit.two_point[0] + 1.0).abs() < 1e-12);
        assert!((fit.slope + 1.0).abs() < 1e-12);
        assert_eq!(theoretical_rate(3), -2.0);
        assert_eq!(theoretical_rate(8), -4.5);
        assert!(convergence_rate(&rows[..1], 3).is_err());
    }

    #[test]
    fn energy_error_limits() {
        assert_eq!(energy_error_from(2.0, 2.0).unwrap(), 0.0);
        assert_eq!(energy_error_from(0.0, 2.0).unwrap(), 1.0);
        assert!(energy_error_from(2.1, 2.0).is_err());
    }

    #[test]
    fn sample_sizes() {
        assert_eq!(exhaustive_combinations().len(), 6272);
        let s = stratified_sample();
        assert_eq!(s.len(), 64);
        for px in [2, 4, 6, 8] {
            for py in [2, 4, 6, 8] {
                assert_eq!(s.iter().filter(|c| c.p_x == px && c.p_y == py).count(), 4);
            }
        }
    }
}
