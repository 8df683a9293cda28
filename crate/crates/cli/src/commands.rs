//! Subcommand definitions and dispatch.

use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use frontal_core::devfold::{curved_folding, ist, write_obj, write_profiles_csv, MeshGrid, Split};
use frontal_core::geom::Isometry;
use frontal_core::germ::{GermKind, Rect, SurfaceGerm};
use frontal_core::isomer::{detect_predicates, isomer_report, IsomerSet, SignConvention};
use frontal_core::matching::{connecting_map_on, properness_probe, Frontal, PlaneCurve, ProbeOptions};
use frontal_core::normalform::{from_normal_form, to_normal_form, EdgeNormalForm};
use frontal_core::numkit::Interval;
use frontal_core::symmetry::{detect_symmetries, self_intersections, test_isometry, verify_c2};
use frontal_core::{MapDef64, SurfaceGerm64};

use crate::scene::{builtin_curve, explicit_normal_form, load_scene, resolve_germ, split_top_level, Scene};

#[derive(Debug, Parser)]
#[command(name = "frontal-forge", version, about = "Singular surface germs, edge normal forms, isomers and symmetries")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Common {
    /// Scene file (JSON) declaring curves, germs and normal forms.
    #[arg(long, global = true)]
    pub scene: Option<PathBuf>,
    /// Numerical tolerance; defaults to the subcommand's own default.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Directory for output files.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize)]
pub struct GermArgs {
    /// Scene or catalog germ, or `sw_example(b,c)` / `ms_edge(a0,b0,b2,b3)`.
    #[arg(long, conflicts_with = "map")]
    pub germ: Option<String>,
    /// Comma-separated component expressions in `u, v`.
    #[arg(long)]
    pub map: Option<String>,
    /// Singularity type of a `--map` germ at its base point.
    #[arg(long)]
    pub kind: Option<String>,
    /// Base point `u,v` (default: the germ's own).
    #[arg(long, value_parser = parse_pair)]
    pub at: Option<[f64; 2]>,
}

#[derive(Debug, Clone, Default, Args, Serialize)]
pub struct NfArgs {
    /// Normal form declared in the scene.
    #[arg(long)]
    pub nf: Option<String>,
    /// Extract the normal form from this germ instead.
    #[arg(long, conflicts_with = "nf")]
    pub from_germ: Option<String>,
    /// Inline crease: `circle(r)`, `helix(a,b)` or `segment`.
    #[arg(long, conflicts_with_all = ["nf", "from_germ"], requires = "theta")]
    pub crease: Option<String>,
    /// Crease domain `lo,hi` for an inline crease.
    #[arg(long, value_parser = parse_pair, default_value = "-1,1")]
    pub crease_domain: [f64; 2],
    /// Cuspidal angle θ(u) for an inline crease.
    #[arg(long)]
    pub theta: Option<String>,
    #[arg(long)]
    pub a: Option<String>,
    #[arg(long)]
    pub b: Option<String>,
    #[arg(long, default_value_t = 0.15)]
    pub halfwidth: f64,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Convention {
    Proper,
    Improper,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitArg {
    U,
    V,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    /// Singular curve and its invariants.
    Analyze {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        germ: GermArgs,
    },
    /// Edge normal form of a cuspidal edge.
    Normalform {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        nf: NfArgs,
        #[arg(long, default_value_t = 129)]
        stations: usize,
    },
    /// Dual, inverse and inverse-dual edges with congruence counts.
    Isomers {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        nf: NfArgs,
        #[arg(long, default_value_t = 129)]
        stations: usize,
        #[arg(long, value_enum, default_value_t = Convention::Proper)]
        convention: Convention,
    },
    /// Osculating developable strip along the crease.
    Strip {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        nf: NfArgs,
        #[arg(long, default_value_t = 65)]
        nu: usize,
        #[arg(long, default_value_t = 9)]
        nv: usize,
    },
    /// Curved folding of the strip with its dual.
    Fold {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        nf: NfArgs,
        #[arg(long, value_enum, default_value_t = SplitArg::V)]
        split: SplitArg,
        #[arg(long, default_value_t = 65)]
        nu: usize,
        #[arg(long, default_value_t = 9)]
        nv: usize,
    },
    /// Isometric self-symmetries at a singular point.
    Symmetry {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        germ: GermArgs,
        /// Expected case labels, e.g. `i,ii,iv`; a mismatch is a validation failure.
        #[arg(long)]
        expect: Option<String>,
        /// Test this isometry (12 reals, row-major Q then b) instead of the frame candidates.
        #[arg(long)]
        isometry: Option<String>,
    },
    /// Connecting map ψ with f1 = f2 ∘ ψ.
    Match {
        #[command(flatten)]
        common: Common,
        /// Germ name, or 2 (plane curve in t) or 3 (surface in u, v) expressions.
        #[arg(long)]
        f1: String,
        #[arg(long)]
        f2: String,
        #[arg(long, value_parser = parse_pair, default_value = "-0.5,0.5")]
        domain1: [f64; 2],
        #[arg(long, value_parser = parse_pair, default_value = "-1,1")]
        domain2: [f64; 2],
    },
    /// Pointwise properness probe.
    Proper {
        #[command(flatten)]
        common: Common,
        /// Comma-separated component expressions.
        #[arg(long)]
        map: String,
        /// Point, comma-separated.
        #[arg(long, allow_hyphen_values = true)]
        at: String,
        /// Variable names (default `x` for one variable, `u,v` for two).
        #[arg(long)]
        vars: Option<String>,
        #[arg(long, default_value_t = 0.5)]
        r0: f64,
        #[arg(long, default_value_t = 8)]
        levels: usize,
        #[arg(long, default_value_t = 4096)]
        grid: usize,
    },
    /// Meshes as Wavefront OBJ.
    Export {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        germ: GermArgs,
        #[command(flatten)]
        nf: NfArgs,
        #[arg(long, default_value_t = 65)]
        nu: usize,
        #[arg(long, default_value_t = 33)]
        nv: usize,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Analyze { .. } => "analyze",
            Command::Normalform { .. } => "normalform",
            Command::Isomers { .. } => "isomers",
            Command::Strip { .. } => "strip",
            Command::Fold { .. } => "fold",
            Command::Symmetry { .. } => "symmetry",
            Command::Match { .. } => "match",
            Command::Proper { .. } => "proper",
            Command::Export { .. } => "export",
        }
    }

    fn common(&self) -> &Common {
        match self {
            Command::Analyze { common, .. }
            | Command::Normalform { common, .. }
            | Command::Isomers { common, .. }
            | Command::Strip { common, .. }
            | Command::Fold { common, .. }
            | Command::Symmetry { common, .. }
            | Command::Match { common, .. }
            | Command::Proper { common, .. }
            | Command::Export { common, .. } => common,
        }
    }

    /// The module default tolerance for this subcommand.
    pub fn default_tol(&self) -> f64 {
        match self {
            Command::Analyze { .. } | Command::Normalform { .. } => 1e-10,
            Command::Isomers { .. } | Command::Strip { .. } | Command::Fold { .. } => 1e-8,
            Command::Symmetry { .. } | Command::Match { .. } => 1e-6,
            Command::Proper { .. } | Command::Export { .. } => 1e-3,
        }
    }
}

fn parse_pair(s: &str) -> Result<[f64; 2], String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|e| format!("`{x}`: {e}")))
        .collect::<Result<_, _>>()?;
    <[f64; 2]>::try_from(v).map_err(|_| "expected two comma-separated numbers".to_string())
}

/// Error in how the tool was invoked (exit code 1).
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct UsageError(pub String);

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    /// A structural consistency check failed (exit code 3).
    ValidationFailed,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::ValidationFailed => 3,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub subcommand: &'static str,
    pub inputs: Value,
    pub tol: f64,
    pub status: Status,
    pub results: Value,
    pub warnings: Vec<String>,
    pub files: Vec<String>,
    /// Where files were written.
    #[serde(skip)]
    pub out_dir: Option<PathBuf>,
}

struct Ctx {
    scene: Scene,
    out: Option<PathBuf>,
    files: Vec<String>,
    warnings: Vec<String>,
    status: Status,
}

impl Ctx {
    fn write(&mut self, name: &str, f: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<()> {
        let Some(dir) = &self.out else {
            return Ok(());
        };
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let mut buf = Vec::new();
        f(&mut buf)?;
        let path = dir.join(name);
        std::fs::write(&path, buf).with_context(|| format!("writing {}", path.display()))?;
        self.files.push(name.to_string());
        Ok(())
    }

    fn fail_validation(&mut self, msg: String) {
        self.warnings.push(msg);
        self.status = Status::ValidationFailed;
    }
}

fn to_value<S: Serialize>(s: &S) -> Result<Value> {
    Ok(serde_json::to_value(s)?)
}

/// Runs one subcommand. Errors are computation failures unless they wrap
/// a [`UsageError`].
pub fn dispatch(cmd: &Command) -> Result<Report> {
    let common = cmd.common();
    let scene = match &common.scene {
        Some(p) => load_scene(p).map_err(|e| usage(format!("{e:#}")))?,
        None => Scene::default(),
    };
    let tol = common
        .tol
        .or_else(|| scene.tolerances.get(cmd.name()).copied())
        .unwrap_or_else(|| cmd.default_tol());
    if !(tol > 0.0) {
        return Err(usage("--tol must be positive"));
    }
    let out = common.out.clone().or_else(|| scene.output.clone());
    let mut ctx = Ctx {
        scene,
        out,
        files: Vec::new(),
        warnings: Vec::new(),
        status: Status::Ok,
    };
    let results = match cmd {
        Command::Analyze { germ, .. } => analyze(&mut ctx, germ, tol)?,
        Command::Normalform { nf, stations, .. } => normalform(&mut ctx, nf, *stations, tol)?,
        Command::Isomers {
            nf, stations, convention, ..
        } => isomers(&mut ctx, nf, *stations, *convention, tol)?,
        Command::Strip { nf, nu, nv, .. } => strip(&mut ctx, nf, *nu, *nv, tol)?,
        Command::Fold { nf, split, nu, nv, .. } => fold(&mut ctx, nf, *split, *nu, *nv)?,
        Command::Symmetry {
            germ, expect, isometry, ..
        } => symmetry(&mut ctx, germ, expect.as_deref(), isometry.as_deref(), tol)?,
        Command::Match {
            f1, f2, domain1, domain2, ..
        } => matching(&mut ctx, f1, f2, *domain1, *domain2, tol)?,
        Command::Proper {
            map,
            at,
            vars,
            r0,
            levels,
            grid,
            ..
        } => proper(map, at, vars.as_deref(), ProbeOptions { r0: *r0, levels: *levels, grid: *grid })?,
        Command::Export { germ, nf, nu, nv, .. } => export(&mut ctx, germ, nf, *nu, *nv)?,
    };
    Ok(Report {
        subcommand: cmd.name(),
        inputs: to_value(cmd)?,
        tol,
        status: ctx.status,
        results,
        warnings: ctx.warnings,
        files: ctx.files,
        out_dir: ctx.out,
    })
}

fn kind_from(s: &str) -> Result<GermKind> {
    serde_json::from_value(Value::String(s.to_string())).map_err(|_| {
        usage(format!(
            "unknown kind `{s}` (cuspidal_edge, swallowtail, cuspidal_cross_cap, cross_cap, regular, unspecified)"
        ))
    })
}

fn germ_of(ctx: &Ctx, a: &GermArgs) -> Result<SurfaceGerm64> {
    let mut g = match (&a.germ, &a.map) {
        (Some(name), _) => resolve_germ(&ctx.scene, name).map_err(|e| usage(format!("{e:#}")))?,
        (None, Some(map)) => {
            let comps = split_top_level(map);
            let [x, y, z] = <[String; 3]>::try_from(comps).map_err(|_| usage("--map needs three components in u, v"))?;
            SurfaceGerm::parse("map", [&x, &y, &z], &[], Rect::square(1.0)).map_err(|e| usage(e.to_string()))?
        }
        (None, None) => return Err(usage("give --germ or --map")),
    };
    if let Some(k) = &a.kind {
        g = g.with_kind(kind_from(k)?);
    }
    if let Some(p) = a.at {
        g = g.with_base(p)?;
    }
    Ok(g)
}

fn nf_of(ctx: &Ctx, a: &NfArgs, tol: f64) -> Result<EdgeNormalForm<f64>> {
    if let Some(name) = &a.nf {
        return ctx
            .scene
            .normal_forms
            .get(name)
            .cloned()
            .ok_or_else(|| usage(format!("unresolved reference: normal form `{name}`")));
    }
    if let Some(g) = &a.from_germ {
        let germ = resolve_germ(&ctx.scene, g).map_err(|e| usage(format!("{e:#}")))?;
        return Ok(to_normal_form(&germ, a.halfwidth, tol.max(1e-12))?);
    }
    let Some(crease) = &a.crease else {
        return Err(usage("give --nf, --from-germ, or --crease with --theta"));
    };
    let (name, args) = match crease.split_once('(') {
        Some((h, rest)) => {
            let inner = rest.strip_suffix(')').ok_or_else(|| usage("unbalanced parentheses in --crease"))?;
            let args: Vec<f64> = split_top_level(inner)
                .iter()
                .map(|x| x.parse::<f64>().map_err(|e| usage(format!("--crease argument `{x}`: {e}"))))
                .collect::<Result<_>>()?;
            (h.trim().to_string(), args)
        }
        None => (crease.trim().to_string(), Vec::new()),
    };
    let dom = Interval::new(a.crease_domain[0], a.crease_domain[1]);
    let c = match ctx.scene.curves.get(&name) {
        Some(c) if args.is_empty() => c.clone(),
        _ => builtin_curve(&name, &args, dom).map_err(|e| usage(format!("{e:#}")))?,
    };
    let theta = a.theta.as_deref().ok_or_else(|| usage("--crease needs --theta"))?;
    explicit_normal_form(c, theta, a.a.as_deref(), a.b.as_deref(), a.halfwidth).map_err(|e| usage(format!("{e:#}")))
}

fn analyze(ctx: &mut Ctx, a: &GermArgs, tol: f64) -> Result<Value> {
    let g = germ_of(ctx, a)?;
    let curve = g.singular_curve(tol)?;
    let mut rows = Vec::new();
    let (mut type1, mut type2) = (0usize, 0usize);
    for (bi, branch) in curve.branches.iter().enumerate() {
        for s in branch {
            let kn = match s.kind {
                frontal_core::germ::SingularType::I => {
                    type1 += 1;
                    g.limiting_normal_curvature(s.point[0], s.point[1]).ok()
                }
                frontal_core::germ::SingularType::II => {
                    type2 += 1;
                    None
                }
            };
            rows.push((bi, s.point, s.kind, s.nondegenerate, kn));
        }
    }
    ctx.write("singular_curve.csv", |buf| {
        let mut w = csv::Writer::from_writer(buf);
        w.write_record(["branch", "u", "v", "type", "nondegenerate", "kappa_nu"])?;
        for (b, p, k, nd, kn) in &rows {
            w.write_record([
                b.to_string(),
                p[0].to_string(),
                p[1].to_string(),
                format!("{k:?}"),
                nd.to_string(),
                kn.map_or_else(|| "nan".to_string(), |x| x.to_string()),
            ])?;
        }
        w.flush()?;
        Ok(())
    })?;
    let base = g.base();
    let base_kind = g.singular_sample(base[0], base[1], tol).ok();
    let base_kappa_nu = g.limiting_normal_curvature(base[0], base[1]).ok();
    Ok(json!({
        "germ": g.name(),
        "declared_kind": g.kind(),
        "base": base,
        "base_sample": base_kind,
        "base_kappa_nu": base_kappa_nu,
        "branches": curve.branches.len(),
        "samples": rows.len(),
        "type_i": type1,
        "type_ii": type2,
    }))
}

fn normalform(ctx: &mut Ctx, a: &NfArgs, stations: usize, tol: f64) -> Result<Value> {
    let nf = nf_of(ctx, a, tol)?;
    let rep = nf.report(stations)?;
    let vs = Interval::new(-nf.halfwidth, nf.halfwidth).linspace(9);
    let grid = |f: &Option<frontal_core::normalform::ScalarFn<f64>>| -> Result<Option<Vec<Vec<f64>>>> {
        let Some(f) = f else { return Ok(None) };
        let mut rows = Vec::new();
        for &u in &rep.stations {
            rows.push(vs.iter().map(|&v| f.value(u, v)).collect::<Result<Vec<_>, _>>()?);
        }
        Ok(Some(rows))
    };
    let value = json!({
        "report": rep,
        "v": vs,
        "a_grid": grid(&nf.a)?,
        "b_grid": grid(&nf.b)?,
    });
    ctx.write("normalform.json", |buf| Ok(serde_json::to_writer_pretty(buf, &value)?))?;
    Ok(value)
}

fn isomers(ctx: &mut Ctx, a: &NfArgs, stations: usize, conv: Convention, tol: f64) -> Result<Value> {
    let nf = nf_of(ctx, a, tol)?;
    let set = IsomerSet::new(&nf)?;
    let convention = match conv {
        Convention::Proper => SignConvention::ProperIsPositive,
        Convention::Improper => SignConvention::ImproperIsPositive,
    };
    let preds = detect_predicates(&nf, convention, tol)?;
    let rep = isomer_report(&set, preds, stations, tol)?;
    let value = to_value(&rep)?;
    ctx.write("isomers.json", |buf| Ok(serde_json::to_writer_pretty(buf, &value)?))?;
    Ok(value)
}

fn strip(ctx: &mut Ctx, a: &NfArgs, nu: usize, nv: usize, tol: f64) -> Result<Value> {
    let nf = nf_of(ctx, a, tol)?;
    let s = ist(&nf)?;
    ctx.warnings.extend(s.warnings.iter().cloned());
    let check = s.check(33)?;
    let mut max_k = 0.0f64;
    for u in s.stations(33) {
        for v in Interval::new(-s.halfwidth, s.halfwidth).linspace(9) {
            max_k = max_k.max(s.gaussian_curvature(u, v)?.abs());
        }
    }
    let profiles = s.profiles(129)?;
    let mesh = s.mesh(nu, nv)?;
    ctx.write("strip_profiles.csv", |buf| Ok(write_profiles_csv(buf, &profiles)?))?;
    ctx.write("strip.obj", |buf| Ok(write_obj(buf, &[("strip", &mesh)])?))?;
    Ok(json!({
        "halfwidth": s.halfwidth,
        "check": check,
        "check_ok": check.ok(tol),
        "max_abs_gaussian_curvature": max_k,
    }))
}

fn fold(ctx: &mut Ctx, a: &NfArgs, split: SplitArg, nu: usize, nv: usize) -> Result<Value> {
    let nf = nf_of(ctx, a, 1e-8)?;
    let s = ist(&nf)?;
    ctx.warnings.extend(s.warnings.iter().cloned());
    let split = match split {
        SplitArg::U => Split::U,
        SplitArg::V => Split::V,
    };
    let f = curved_folding(&s, split)?;
    ctx.warnings.extend(f.dual.warnings.iter().cloned());
    let mut crease_gap = 0.0f64;
    for u in s.stations(65) {
        crease_gap = crease_gap.max((f.strip.point(u, 0.0)? - f.dual.point(u, 0.0)?).norm());
    }
    let [m1, m2] = f.meshes(nu, nv)?;
    ctx.write("fold.obj", |buf| Ok(write_obj(buf, &[("F", &m1), ("F_dual", &m2)])?))?;
    Ok(json!({
        "split": split,
        "halfwidth": [f.strip.halfwidth, f.dual.halfwidth],
        "crease_gap": crease_gap,
    }))
}

fn parse_labels(s: &str) -> Vec<String> {
    let mut v: Vec<String> = s.split(',').map(|x| x.trim().to_string()).filter(|x| !x.is_empty()).collect();
    v.sort();
    v
}

fn symmetry(ctx: &mut Ctx, a: &GermArgs, expect: Option<&str>, isometry: Option<&str>, tol: f64) -> Result<Value> {
    let g = germ_of(ctx, a)?;
    let p = g.base();
    if let Some(spec) = isometry {
        let vals: Vec<f64> = split_top_level(spec)
            .iter()
            .map(|x| x.parse::<f64>().map_err(|e| usage(format!("--isometry entry `{x}`: {e}"))))
            .collect::<Result<_>>()?;
        let arr = <[f64; 12]>::try_from(vals).map_err(|_| usage("--isometry needs 12 numbers"))?;
        let t = Isometry::from_array(arr);
        let found = test_isometry(&g, p, &t, tol)?;
        return Ok(json!({ "germ": g.name(), "point": p, "finding": found }));
    }
    let rep = detect_symmetries(&g, p, tol)?;
    for v in rep.validation.iter().filter(|v| !v.passed) {
        ctx.fail_validation(format!("{}: {}", v.rule, v.detail));
    }
    let mut c2 = Vec::new();
    if matches!(g.kind(), GermKind::Swallowtail | GermKind::CuspidalCrossCap) {
        let locus = self_intersections(&g, &g.domain(), 1e-12)?;
        for f in &rep.findings {
            let r = verify_c2(&g, p, f, &locus, 1e-8)?;
            for c in r.checks.iter().filter(|c| !c.passed) {
                ctx.fail_validation(format!("c2 {:?} {}: {:e}", f.label, c.name, c.value));
            }
            c2.push(json!({ "label": f.label, "report": r }));
        }
        ctx.write("self_intersections.json", |buf| Ok(serde_json::to_writer_pretty(buf, &locus)?))?;
    }
    let cases: Vec<String> = rep.cases().iter().map(|s| s.to_string()).collect();
    if let Some(e) = expect {
        let want = parse_labels(e);
        let mut got = cases.clone();
        got.sort();
        if want != got {
            ctx.fail_validation(format!("expected cases {{{}}}, found {{{}}}", want.join(","), got.join(",")));
        }
    }
    let findings = rep.findings.clone();
    for f in &findings {
        if let (Some(inv), Some(case)) = (&f.psi, f.case) {
            ctx.write(&format!("psi_{case}.csv"), |buf| Ok(inv.map.write_csv(buf)?))?;
        }
    }
    Ok(json!({ "cases": cases, "report": rep, "c2": c2 }))
}

/// A frontal from a germ name or an expression list.
enum Side {
    Curve(PlaneCurve<f64>),
    Germ(SurfaceGerm64),
}

impl Side {
    fn frontal(&self) -> &dyn Frontal<f64> {
        match self {
            Side::Curve(c) => c,
            Side::Germ(g) => g,
        }
    }
}

fn side(ctx: &Ctx, name: &str, spec: &str, dom: [f64; 2]) -> Result<Side> {
    let parts = split_top_level(spec);
    let iv = Interval::new(dom[0], dom[1]);
    match parts.len() {
        2 => Ok(Side::Curve(
            PlaneCurve::parse(name, [&parts[0], &parts[1]], iv).map_err(|e| usage(format!("--{name}: {e}")))?,
        )),
        3 => Ok(Side::Germ(
            SurfaceGerm::parse(name, [&parts[0], &parts[1], &parts[2]], &[], Rect::new(iv, iv))
                .map_err(|e| usage(format!("--{name}: {e}")))?,
        )),
        1 => {
            let g = resolve_germ(&ctx.scene, spec).map_err(|e| usage(format!("--{name}: {e:#}")))?;
            Ok(Side::Germ(g.with_domain(Rect::new(iv, iv))?))
        }
        n => Err(usage(format!("--{name}: expected a germ name or 2 or 3 expressions, got {n}"))),
    }
}

fn matching(ctx: &mut Ctx, f1: &str, f2: &str, d1: [f64; 2], d2: [f64; 2], tol: f64) -> Result<Value> {
    let s1 = side(ctx, "f1", f1, d1)?;
    let s2 = side(ctx, "f2", f2, d2)?;
    let (a, b) = (s1.frontal(), s2.frontal());
    let map = connecting_map_on(a, &a.domain(), b, &b.domain(), tol)?;
    ctx.write("psi.csv", |buf| Ok(map.write_csv(buf)?))?;
    Ok(to_value(&map)?)
}

fn proper(map: &str, at: &str, vars: Option<&str>, opts: ProbeOptions) -> Result<Value> {
    let comps = split_top_level(map);
    let p: Vec<f64> = split_top_level(at)
        .iter()
        .map(|x| x.parse::<f64>().map_err(|e| usage(format!("--at entry `{x}`: {e}"))))
        .collect::<Result<_>>()?;
    let names: Vec<String> = match vars {
        Some(v) => split_top_level(v),
        None => match p.len() {
            1 => vec!["x".into()],
            2 => vec!["u".into(), "v".into()],
            3 => vec!["x".into(), "y".into(), "z".into()],
            n => return Err(usage(format!("give --vars for a {n}-dimensional point"))),
        },
    };
    if names.len() != p.len() {
        return Err(usage("--vars and --at disagree in length"));
    }
    let vs: Vec<&str> = names.iter().map(String::as_str).collect();
    let cs: Vec<&str> = comps.iter().map(String::as_str).collect();
    let m = MapDef64::parse("map", &vs, &cs, &[]).map_err(|e| usage(e.to_string()))?;
    if frontal_core::numkit::Evaluable::arity(&m) > 2 {
        return Err(usage("the probe handles maps of one or two variables"));
    }
    let rep = properness_probe(&m, &p, opts)?;
    Ok(to_value(&rep)?)
}

fn germ_mesh(g: &SurfaceGerm64, nu: usize, nv: usize) -> Result<MeshGrid> {
    let d = g.domain();
    Ok(MeshGrid::build(&d.u.linspace(nu), &d.v.linspace(nv), |u, v| g.point(u, v))?)
}

fn export(ctx: &mut Ctx, ga: &GermArgs, na: &NfArgs, nu: usize, nv: usize) -> Result<Value> {
    if ctx.out.is_none() {
        ctx.out = Some(PathBuf::from("."));
    }
    let has_nf = na.nf.is_some() || na.from_germ.is_some() || na.crease.is_some();
    let mut meshes: Vec<(String, MeshGrid)> = Vec::new();
    if ga.germ.is_some() || ga.map.is_some() {
        let g = germ_of(ctx, ga)?;
        meshes.push((g.name().to_string(), germ_mesh(&g, nu, nv)?));
    }
    if has_nf {
        let nf = nf_of(ctx, na, 1e-10)?;
        if nf.a.is_some() && nf.b.is_some() {
            meshes.push(("normal_form".into(), germ_mesh(&from_normal_form(&nf)?, nu, nv)?));
        }
        match ist(&nf) {
            Ok(s) => {
                ctx.warnings.extend(s.warnings.iter().cloned());
                meshes.push(("strip".into(), s.mesh(nu, nv)?));
            }
            Err(e) => ctx.warnings.push(format!("no strip: {e}")),
        }
    }
    if meshes.is_empty() {
        return Err(usage("export needs --germ/--map or a normal form"));
    }
    let named: Vec<(&str, &MeshGrid)> = meshes.iter().map(|(n, m)| (n.as_str(), m)).collect();
    ctx.write("export.obj", |buf| Ok(write_obj(buf, &named)?))?;
    Ok(json!({
        "meshes": meshes.iter().map(|(n, m)| json!({"name": n, "nu": m.nu, "nv": m.nv})).collect::<Vec<_>>(),
    }))
}

/// Writes the report next to the other outputs, if an output directory is set.
pub fn save_report(report: &Report) -> Result<()> {
    if let Some(dir) = &report.out_dir {
        std::fs::create_dir_all(dir)?;
        let path = dir.join(format!("{}_report.json", report.subcommand));
        std::fs::write(&path, serde_json::to_vec_pretty(report)?).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

/// Maps an error to the process exit code.
pub fn error_code(e: &anyhow::Error) -> i32 {
    if e.downcast_ref::<UsageError>().is_some() {
        1
    } else {
        2
    }
}

