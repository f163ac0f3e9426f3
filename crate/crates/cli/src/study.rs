//! Study dispatch.

use std::collections::BTreeMap;

use serde::Serialize;
use xnyfem::analytic::{admissible_poly_field, AnalyticField, BeamField, BeamVariant, HoleProblem, PolyProblem};
use xnyfem::blending::{EdgeSpec, ShapeValue, TransitionShapeSet};
use xnyfem::elasticity::{assemble, impose_field_on_boundary, FeSpace, LinearSystem};
use xnyfem::mesh::{refine_y_region, Discretization, Mesh, RefineParams, Space};
use xnyfem::verify::*;
use xnyfem::{BasisFamily, NodeDistribution};

use crate::config::{Config, Sample, StudyKind};
use crate::CliError;

/// Fitted rate of one refinement series.
#[derive(Debug, Clone, Serialize)]
pub struct SeriesFit {
    pub p_x: usize,
    pub p_y: usize,
    pub slope: Option<f64>,
    pub two_point: Vec<f64>,
    pub theoretical: f64,
}

/// What a study produced besides its rows.
#[derive(Default)]
pub struct StudyOutput {
    pub rows: Vec<StudyRow>,
    pub fits: Vec<SeriesFit>,
    pub extra: BTreeMap<String, serde_json::Value>,
    /// Space and system used for matrix and field dumps.
    pub primary: Option<(FeSpace, LinearSystem)>,
    /// Shape sets for `--dump-shapes`.
    pub shapes: Vec<TransitionShapeSet<f64>>,
    pub exact: Option<Box<dyn AnalyticField>>,
}

pub struct Options {
    pub exhaustive: bool,
    pub want_primary: bool,
}

fn exact_field(cfg: &Config) -> Result<Option<Box<dyn AnalyticField>>, CliError> {
    let m = cfg.material;
    let poly = |order| -> Result<Box<dyn AnalyticField>, CliError> {
        Ok(Box::new(PolyProblem { field: admissible_poly_field(order, m.nu)?, material: m }))
    };
    Ok(Some(match cfg.study {
        StudyKind::PatchLinear => poly(1)?,
        StudyKind::PatchHighorder | StudyKind::ConvPoly => poly(cfg.order)?,
        StudyKind::PatchQuadratic => Box::new(BeamField::standard(BeamVariant::QuadraticBending, m)),
        StudyKind::PatchCubic => Box::new(BeamField::standard(BeamVariant::CubicBending, m)),
        StudyKind::ConvHole => Box::new(HoleProblem::new(1.0, 1.0, m)?),
        _ => return Ok(None),
    }))
}

fn patch_field(cfg: &Config) -> PatchField {
    match cfg.study {
        StudyKind::PatchQuadratic => PatchField::QuadraticBeam,
        StudyKind::PatchCubic => PatchField::CubicBeam,
        StudyKind::PatchHighorder => PatchField::HighOrder { order: cfg.order },
        _ => PatchField::Linear,
    }
}

/// Space with full-boundary displacement data from `exact`.
fn dirichlet_primary(space: FeSpace, cfg: &Config, exact: &dyn AnalyticField) -> Result<(FeSpace, LinearSystem), CliError> {
    let mut sys = assemble(&space, &cfg.material)?;
    let uf = |p: [f64; 2]| exact.displacement(p);
    sys.constraints = impose_field_on_boundary(&space, &uf, &|_, _| true, [true, true])?;
    Ok((space, sys))
}

fn combinations(cfg: &Config, opts: &Options) -> Vec<Combination> {
    let sample = if opts.exhaustive { Sample::Exhaustive } else { cfg.sample };
    match sample {
        Sample::Exhaustive => exhaustive_combinations(),
        Sample::Stratified => stratified_sample(),
        Sample::Grid => {
            let mut out = Vec::new();
            for &n_s in &cfg.n_s {
                for &p_x in &cfg.p_x {
                    for &p_y in &cfg.p_y {
                        out.push(Combination {
                            pairing: cfg.pairing,
                            distribution: cfg.distribution,
                            n_y: cfg.n_y,
                            n_s,
                            p_x,
                            p_y,
                        });
                    }
                }
            }
            out
        }
    }
}

fn patch(cfg: &Config, mesh: &Mesh, opts: &Options) -> Result<StudyOutput, CliError> {
    let field = patch_field(cfg);
    let mut combos = combinations(cfg, opts);
    if cfg.study == StudyKind::PatchHighorder && !opts.exhaustive && cfg.sample == Sample::Grid {
        // the sweep runs p_x = p_y
        combos.retain(|c| c.p_x == c.p_y);
        if combos.is_empty() {
            return Err(CliError::Config("patch-highorder needs at least one p_x = p_y pair".into()));
        }
    }
    let runs = patch_sweep(&combos, mesh, field, cfg.version, cfg.material)?;
    let mut out = StudyOutput::default();
    for (c, r) in &runs {
        let error = if cfg.study == StudyKind::PatchHighorder { r.displacement_error } else { r.error() };
        out.rows.push(StudyRow { n_dof: r.n_dof, error, p_x: c.p_x, p_y: c.p_y, level: c.n_s });
    }
    let worst = out.rows.iter().map(|r| r.error).fold(0.0, f64::max);
    out.extra.insert("combinations".into(), runs.len().into());
    out.extra.insert("max_error".into(), worst.into());
    if opts.want_primary {
        let c = combos[0];
        let refined = refine_y_region(mesh, &RefineParams::new(c.n_y, c.n_s)?)?;
        let space = FeSpace::new(refined, c.pairing.discretization(c.distribution, c.p_x, c.p_y)?)?;
        out.shapes = distinct_shapes(&space)?;
        if let Some(ex) = exact_field(cfg)? {
            out.primary = Some(dirichlet_primary(space, cfg, ex.as_ref())?);
            out.exact = Some(ex);
        }
    }
    Ok(out)
}

fn convergence(cfg: &Config, mesh: Mesh, opts: &Options) -> Result<StudyOutput, CliError> {
    let field = match cfg.study {
        StudyKind::ConvHole => ConvField::Hole { a: 1.0, sigma0: 1.0 },
        _ => ConvField::Poly { order: cfg.order },
    };
    if cfg.p_x.len() != 1 || cfg.n_s.len() != 1 {
        return Err(CliError::Config("convergence studies take a single p_x and n_s".into()));
    }
    let study = ConvergenceStudy {
        field,
        base: mesh,
        p_x: cfg.p_x[0],
        p_y: cfg.p_y.clone(),
        pairing: cfg.pairing,
        distribution: cfg.distribution,
        n_y: cfg.n_y,
        n_s: cfg.n_s[0],
        levels: cfg.levels,
        material: cfg.material,
        window: cfg.window,
    };
    let series = study.run()?;
    let mut out = StudyOutput::default();
    for s in series {
        out.fits.push(SeriesFit {
            p_x: s.p_x,
            p_y: s.p_y,
            slope: s.fit.as_ref().map(|f| f.slope),
            two_point: s.fit.map(|f| f.two_point).unwrap_or_default(),
            theoretical: s.theoretical,
        });
        out.rows.extend(s.rows);
    }
    if opts.want_primary {
        let mesh = study.meshes()?.swap_remove(0);
        let space = FeSpace::new(mesh, cfg.pairing.discretization(cfg.distribution, cfg.p_x[0], cfg.p_y[0])?)?;
        out.shapes = distinct_shapes(&space)?;
        let ex = exact_field(cfg)?.expect("convergence studies have an exact field");
        out.primary = Some(dirichlet_primary(space, cfg, ex.as_ref())?);
        out.exact = Some(ex);
    }
    Ok(out)
}

fn singular(cfg: &Config, opts: &Options) -> Result<StudyOutput, CliError> {
    let problem = match cfg.study {
        StudyKind::SingularL => SingularProblem::LDomain,
        _ => SingularProblem::Cantilever,
    };
    if cfg.mesh != cfg_default_mesh(cfg.study) {
        return Err(CliError::Config("singular studies use their built-in geometry; omit 'mesh'".into()));
    }
    if cfg.p_x != cfg.p_y {
        return Err(CliError::Config("singular studies use equal orders; give p_y only".into()));
    }
    let (u_ref, rows) =
        singular_p_study(problem, &cfg.p_y, cfg.levels, cfg.n_y, &cfg.n_s, cfg.reference, &cfg.material)?;
    let mut out = StudyOutput { rows, ..Default::default() };
    out.extra.insert("reference_energy".into(), u_ref.into());
    if opts.want_primary {
        let mesh = problem.mesh(0, cfg.n_y, cfg.n_s[0], false)?;
        let space = FeSpace::new(mesh, uniform_gll(cfg.p_y[0])?)?;
        out.shapes = distinct_shapes(&space)?;
        let sys = problem.system(&space, &cfg.material)?;
        out.primary = Some((space, sys));
    }
    Ok(out)
}

fn uniform_gll(p: usize) -> Result<Discretization, CliError> {
    Ok(Discretization::uniform(Space::new(BasisFamily::Lagrange(NodeDistribution::Gll), p)?))
}

fn cfg_default_mesh(kind: StudyKind) -> &'static str {
    match kind {
        StudyKind::SingularL => "l-domain",
        _ => "cantilever",
    }
}

/// One transition element per `(p_x, p_y)`: edges E1 and E2 split into `n_y`
/// pieces of the y-family, E3 and E4 and the interior of the x-family.
fn basis_dump(cfg: &Config) -> Result<StudyOutput, CliError> {
    let (fx, fy) = cfg.pairing.families(cfg.distribution);
    let mut out = StudyOutput::default();
    let n = cfg.n_y;
    let breaks: Vec<f64> = (0..=n).map(|i| -1.0 + 2.0 * i as f64 / n as f64).collect();
    for &p_x in &cfg.p_x {
        for &p_y in &cfg.p_y {
            let split = EdgeSpec::uniform(&breaks, fy, p_y)?;
            let whole = EdgeSpec::uniform(&[-1.0, 1.0], fx, p_x)?;
            let set = TransitionShapeSet::new([split.clone(), split, whole.clone(), whole], fx, p_x)?;
            out.rows.push(StudyRow { n_dof: set.len(), error: constant_defect(&set), p_x, p_y, level: n });
            out.shapes.push(set);
        }
    }
    Ok(out)
}

/// Largest deviation from 1 of the interpolant of the constant function:
/// corners, junctions and Lagrange edge functions carry 1, hierarchic modes
/// and bubbles 0.
fn constant_defect(set: &TransitionShapeSet<f64>) -> f64 {
    let mut c = vec![0.0; set.len()];
    c[..4].fill(1.0);
    for (e, spec) in set.edges().iter().enumerate() {
        if spec.segments()[0].basis.family().is_lagrange() {
            c[set.edge_range(e)].fill(1.0);
        } else {
            // junction hats between segments are nodal
            for k in 1..spec.segments().len() {
                c[set.edge_function_index(e, spec.segment_offset(k))] = 1.0;
            }
        }
    }
    let mut buf = vec![ShapeValue::zero(); set.len()];
    let mut worst = 0.0f64;
    for j in 0..21 {
        for i in 0..21 {
            set.eval_all(-1.0 + i as f64 / 10.0, -1.0 + j as f64 / 10.0, &mut buf);
            let s: f64 = buf.iter().zip(&c).map(|(v, c)| v.value * c).sum();
            worst = worst.max((s - 1.0).abs());
        }
    }
    worst
}

fn distinct_shapes(space: &FeSpace) -> Result<Vec<TransitionShapeSet<f64>>, CliError> {
    space.dofs().shape_keys().iter().map(|k| Ok(k.build()?)).collect()
}

pub fn run(cfg: &Config, base: &std::path::Path, opts: &Options) -> Result<StudyOutput, CliError> {
    match cfg.study {
        StudyKind::SingularCantilever | StudyKind::SingularL => singular(cfg, opts),
        StudyKind::BasisDump => basis_dump(cfg),
        StudyKind::ConvPoly | StudyKind::ConvHole => convergence(cfg, cfg.load_mesh(base)?, opts),
        _ => patch(cfg, &cfg.load_mesh(base)?, opts),
    }
}
