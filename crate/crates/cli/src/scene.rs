//! Scene files: named curves, germs and normal forms in JSON.

use std::collections::BTreeMap;
use std::fmt;
use std::marker::PhantomData;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use serde::de::{MapAccess, Visitor};
use serde::{Deserialize, Deserializer};

use frontal_core::curve::SpaceCurve;
use frontal_core::exprlang::MapDef;
use frontal_core::germ::{by_name, catalog_names, ms_edge, sw_example, GermKind, Rect, SurfaceGerm};
use frontal_core::normalform::{from_normal_form, to_normal_form, EdgeNormalForm, ScalarFn};
use frontal_core::numkit::Interval;

/// Tolerance for accepting a reparametrized curve as unit speed.
const ARCLENGTH_TOL: f64 = 1e-10;

/// A JSON object whose keys must be distinct.
#[derive(Debug, Clone)]
pub struct UniqueMap<V>(pub BTreeMap<String, V>);

impl<V> Default for UniqueMap<V> {
    fn default() -> Self {
        UniqueMap(BTreeMap::new())
    }
}

impl<'de, V: Deserialize<'de>> Deserialize<'de> for UniqueMap<V> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct Vis<V>(PhantomData<V>);
        impl<'de, V: Deserialize<'de>> Visitor<'de> for Vis<V> {
            type Value = UniqueMap<V>;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("an object with unique keys")
            }
            fn visit_map<A: MapAccess<'de>>(self, mut m: A) -> Result<Self::Value, A::Error> {
                let mut out = BTreeMap::new();
                while let Some((k, v)) = m.next_entry::<String, V>()? {
                    if out.contains_key(&k) {
                        return Err(serde::de::Error::custom(format!("duplicate name `{k}`")));
                    }
                    out.insert(k, v);
                }
                Ok(UniqueMap(out))
            }
        }
        d.deserialize_map(Vis(PhantomData))
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum CurveSpec {
    /// `circle` (args `[r]`), `helix` (args `[a, b]`) or `segment`, by arc length.
    Builtin {
        name: String,
        #[serde(default)]
        args: Vec<f64>,
        domain: [f64; 2],
    },
    /// Three expressions in `param`, reparametrized by arc length.
    Map {
        components: [String; 3],
        #[serde(default = "default_param")]
        param: String,
        #[serde(default)]
        params: BTreeMap<String, f64>,
        domain: [f64; 2],
    },
    /// Constant-slope curve with turning angle `phi(s)` and slope `a`.
    ConstantSlope { phi: String, a: f64, domain: [f64; 2] },
}

fn default_param() -> String {
    "t".into()
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum GermSpec {
    Catalog {
        name: String,
        #[serde(default)]
        params: BTreeMap<String, f64>,
    },
    MsEdge { a0: String, b0: String, b2: String, b3: String },
    Map {
        components: [String; 3],
        #[serde(default)]
        normal: Option<[String; 3]>,
        #[serde(default)]
        kind: Option<GermKind>,
        #[serde(default)]
        domain: Option<[[f64; 2]; 2]>,
        #[serde(default)]
        base: Option<[f64; 2]>,
        #[serde(default)]
        params: BTreeMap<String, f64>,
    },
    /// The germ realized by a named normal form.
    NormalForm { name: String },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum NormalFormSpec {
    /// Explicit data along a named arc-length crease.
    Explicit {
        crease: String,
        theta: String,
        #[serde(default)]
        a: Option<String>,
        #[serde(default)]
        b: Option<String>,
        #[serde(default = "default_halfwidth")]
        halfwidth: f64,
    },
    /// Extracted from a named germ singular along `v = 0`.
    FromGerm {
        germ: String,
        #[serde(default = "default_halfwidth")]
        halfwidth: f64,
    },
}

fn default_halfwidth() -> f64 {
    0.15
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScene {
    #[serde(default)]
    curves: UniqueMap<CurveSpec>,
    #[serde(default)]
    germs: UniqueMap<GermSpec>,
    #[serde(default)]
    normal_forms: UniqueMap<NormalFormSpec>,
    #[serde(default)]
    tolerances: UniqueMap<f64>,
    #[serde(default)]
    output: Option<PathBuf>,
}

/// A loaded scene with every expression compiled.
#[derive(Debug, Clone, Default)]
pub struct Scene {
    pub curves: BTreeMap<String, SpaceCurve<f64>>,
    pub germs: BTreeMap<String, SurfaceGerm<f64>>,
    pub normal_forms: BTreeMap<String, EdgeNormalForm<f64>>,
    pub tolerances: BTreeMap<String, f64>,
    pub output: Option<PathBuf>,
}

pub fn load_scene(path: &Path) -> Result<Scene> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading scene {}", path.display()))?;
    parse_scene(&text).with_context(|| format!("in scene {}", path.display()))
}

pub fn parse_scene(text: &str) -> Result<Scene> {
    let raw: RawScene = serde_json::from_str(text).map_err(|e| anyhow!("line {}, column {}: {e}", e.line(), e.column()))?;
    let mut scene = Scene {
        tolerances: raw.tolerances.0.clone(),
        output: raw.output.clone(),
        ..Scene::default()
    };
    let mut seen = std::collections::BTreeSet::new();
    for name in raw.curves.0.keys().chain(raw.germs.0.keys()).chain(raw.normal_forms.0.keys()) {
        if !seen.insert(name.clone()) {
            bail!("name `{name}` is declared more than once");
        }
    }
    for (name, spec) in &raw.curves.0 {
        let c = build_curve(name, spec).with_context(|| format!("curve `{name}`"))?;
        scene.curves.insert(name.clone(), c);
    }
    // Normal forms may come from germs and germs from normal forms, so
    // resolve on demand with cycle detection.
    let mut r = Resolver {
        raw: &raw,
        scene: &mut scene,
        stack: Vec::new(),
    };
    for name in raw.normal_forms.0.keys() {
        r.normal_form(name)?;
    }
    for name in raw.germs.0.keys() {
        r.germ(name)?;
    }
    Ok(scene)
}

struct Resolver<'a> {
    raw: &'a RawScene,
    scene: &'a mut Scene,
    stack: Vec<String>,
}

impl Resolver<'_> {
    fn enter(&mut self, name: &str) -> Result<()> {
        if self.stack.iter().any(|n| n == name) {
            bail!("circular reference through `{name}`");
        }
        self.stack.push(name.to_string());
        Ok(())
    }

    fn germ(&mut self, name: &str) -> Result<SurfaceGerm<f64>> {
        if let Some(g) = self.scene.germs.get(name) {
            return Ok(g.clone());
        }
        let spec = self
            .raw
            .germs
            .0
            .get(name)
            .ok_or_else(|| anyhow!("unresolved reference: germ `{name}`"))?;
        self.enter(name)?;
        let g = match spec {
            GermSpec::NormalForm { name: nf } => {
                let nf = self.normal_form(nf)?;
                from_normal_form(&nf)?
            }
            other => build_germ(other)?,
        }
        .renamed(name);
        self.stack.pop();
        self.scene.germs.insert(name.to_string(), g.clone());
        Ok(g)
    }

    fn normal_form(&mut self, name: &str) -> Result<EdgeNormalForm<f64>> {
        if let Some(nf) = self.scene.normal_forms.get(name) {
            return Ok(nf.clone());
        }
        let spec = self
            .raw
            .normal_forms
            .0
            .get(name)
            .ok_or_else(|| anyhow!("unresolved reference: normal form `{name}`"))?;
        self.enter(name)?;
        let nf = match spec {
            NormalFormSpec::Explicit {
                crease,
                theta,
                a,
                b,
                halfwidth,
            } => {
                let c = self
                    .scene
                    .curves
                    .get(crease)
                    .ok_or_else(|| anyhow!("unresolved reference: curve `{crease}` in normal form `{name}`"))?
                    .clone();
                explicit_normal_form(c, theta, a.as_deref(), b.as_deref(), *halfwidth)
                    .with_context(|| format!("normal form `{name}`"))?
            }
            NormalFormSpec::FromGerm { germ, halfwidth } => {
                let g = self.germ(germ)?;
                to_normal_form(&g, *halfwidth, 1e-10).with_context(|| format!("normal form `{name}` from germ `{germ}`"))?
            }
        };
        self.stack.pop();
        self.scene.normal_forms.insert(name.to_string(), nf.clone());
        Ok(nf)
    }
}

pub fn explicit_normal_form(
    crease: SpaceCurve<f64>,
    theta: &str,
    a: Option<&str>,
    b: Option<&str>,
    halfwidth: f64,
) -> Result<EdgeNormalForm<f64>> {
    let uv = ["u", "v"];
    Ok(EdgeNormalForm::new(
        crease,
        ScalarFn::expr(theta, &["u"], &[]).context("theta")?,
        a.map(|s| ScalarFn::expr(s, &uv, &[])).transpose().context("a")?,
        b.map(|s| ScalarFn::expr(s, &uv, &[])).transpose().context("b")?,
        halfwidth,
    )?)
}

fn interval(d: [f64; 2]) -> Result<Interval<f64>> {
    if !(d[0] < d[1]) {
        bail!("empty domain [{}, {}]", d[0], d[1]);
    }
    Ok(Interval::new(d[0], d[1]))
}

pub fn build_curve(name: &str, spec: &CurveSpec) -> Result<SpaceCurve<f64>> {
    Ok(match spec {
        CurveSpec::Builtin { name: b, args, domain } => builtin_curve(b, args, interval(*domain)?)?,
        CurveSpec::Map {
            components,
            param,
            params,
            domain,
        } => {
            let ps: Vec<(&str, f64)> = params.iter().map(|(k, v)| (k.as_str(), *v)).collect();
            let comps: Vec<&str> = components.iter().map(String::as_str).collect();
            let map = MapDef::parse(name, &[param.as_str()], &comps, &ps)?;
            SpaceCurve::from_mapdef(map, interval(*domain)?)?.arclength_param(ARCLENGTH_TOL)?
        }
        CurveSpec::ConstantSlope { phi, a, domain } => SpaceCurve::constant_slope(name, phi, *a, interval(*domain)?)?,
    })
}

pub fn builtin_curve(name: &str, args: &[f64], domain: Interval<f64>) -> Result<SpaceCurve<f64>> {
    let want = |n: usize| -> Result<()> {
        if args.len() != n {
            bail!("builtin curve `{name}` takes {n} argument(s), got {}", args.len());
        }
        Ok(())
    };
    Ok(match name {
        "circle" => {
            want(1)?;
            SpaceCurve::circle_arclength(args[0], domain)
        }
        "helix" => {
            want(2)?;
            SpaceCurve::helix_arclength(args[0], args[1], domain)
        }
        "segment" => {
            want(0)?;
            SpaceCurve::segment(domain).assume_arclength(ARCLENGTH_TOL)?
        }
        other => bail!("unknown builtin curve `{other}` (circle, helix, segment)"),
    })
}

pub fn build_germ(spec: &GermSpec) -> Result<SurfaceGerm<f64>> {
    Ok(match spec {
        GermSpec::Catalog { name, params } => catalog_germ(name, params)?,
        GermSpec::MsEdge { a0, b0, b2, b3 } => ms_edge(a0, b0, b2, b3)?,
        GermSpec::Map {
            components,
            normal,
            kind,
            domain,
            base,
            params,
        } => {
            let ps: Vec<(&str, f64)> = params.iter().map(|(k, v)| (k.as_str(), *v)).collect();
            let dom = match domain {
                Some([u, v]) => Rect::new(interval(*u)?, interval(*v)?),
                None => Rect::square(1.0),
            };
            let comps = [components[0].as_str(), components[1].as_str(), components[2].as_str()];
            let mut g = SurfaceGerm::parse("map", comps, &ps, dom)?;
            if let Some(n) = normal {
                g = g.with_normal_exprs([n[0].as_str(), n[1].as_str(), n[2].as_str()], &ps)?;
            }
            if let Some(b) = base {
                g = g.with_base(*b)?;
            }
            g.with_kind(kind.unwrap_or(GermKind::Unspecified))
        }
        GermSpec::NormalForm { name } => bail!("normal form `{name}` must be resolved through a scene"),
    })
}

fn catalog_germ(name: &str, params: &BTreeMap<String, f64>) -> Result<SurfaceGerm<f64>> {
    if name == "sw_example" {
        let get = |k: &str| params.get(k).copied().unwrap_or(1.0);
        return Ok(sw_example(get("b"), get("c"))?);
    }
    if !params.is_empty() {
        bail!("catalog germ `{name}` takes no parameters");
    }
    by_name(name).map_err(|_| anyhow!("unresolved reference: unknown germ `{name}` (known: {})", catalog_names().join(", ")))
}

/// Splits at commas outside parentheses.
pub fn split_top_level(s: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut cur = String::new();
    for ch in s.chars() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                out.push(cur.trim().to_string());
                cur.clear();
                continue;
            }
            _ => {}
        }
        cur.push(ch);
    }
    if !cur.trim().is_empty() || !out.is_empty() {
        out.push(cur.trim().to_string());
    }
    out
}

/// Resolves a germ reference: a scene name, a catalog name, or a call
/// such as `sw_example(1, 2)` or `ms_edge(u^2, 1, u, 1)`.
pub fn resolve_germ(scene: &Scene, name: &str) -> Result<SurfaceGerm<f64>> {
    if let Some(g) = scene.germs.get(name) {
        return Ok(g.clone());
    }
    if let Some((head, rest)) = name.split_once('(') {
        let args = rest
            .strip_suffix(')')
            .ok_or_else(|| anyhow!("unbalanced parentheses in `{name}`"))?;
        let args = split_top_level(args);
        return match head.trim() {
            "sw_example" => {
                let v: Vec<f64> = args
                    .iter()
                    .map(|a| a.parse::<f64>().with_context(|| format!("sw_example argument `{a}`")))
                    .collect::<Result<_>>()?;
                if v.len() != 2 {
                    bail!("sw_example takes (b, c)");
                }
                Ok(sw_example(v[0], v[1])?)
            }
            "ms_edge" => {
                if args.len() != 4 {
                    bail!("ms_edge takes (a0, b0, b2, b3)");
                }
                Ok(ms_edge(&args[0], &args[1], &args[2], &args[3])?)
            }
            other => bail!("unresolved reference: unknown germ family `{other}`"),
        };
    }
    catalog_germ(name, &BTreeMap::new())
}
