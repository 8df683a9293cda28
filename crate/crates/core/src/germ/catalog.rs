use super::{GermError, GermKind, Rect, SurfaceGerm};
use crate::exprlang::parse;
use crate::scalar::Real;

fn build<T: Real>(
    name: &str,
    comps: [&str; 3],
    normal: Option<[&str; 3]>,
    params: &[(&str, T)],
    kind: GermKind,
) -> Result<SurfaceGerm<T>, GermError> {
    let g = SurfaceGerm::parse(name, comps, params, Rect::square(T::one()))?.with_kind(kind);
    match normal {
        Some(n) => g.with_normal_exprs(n, params),
        None => Ok(g),
    }
}

/// Names accepted by [`by_name`].
pub fn catalog_names() -> &'static [&'static str] {
    &[
        "cuspidal_edge",
        "swallowtail",
        "cuspidal_cross_cap",
        "cross_cap",
        "ccr_example",
        "sw_example",
        "plane",
    ]
}

/// Looks up a catalog germ. Accepts the short aliases `f_C`, `f_S`, `f_CW`.
pub fn by_name<T: Real>(name: &str) -> Result<SurfaceGerm<T>, GermError> {
    match name {
        "cuspidal_edge" | "f_C" => build(
            "cuspidal_edge",
            ["v^2", "v^3", "u"],
            Some(["-3*v", "2", "0"]),
            &[],
            GermKind::CuspidalEdge,
        ),
        "swallowtail" | "f_S" => build(
            "swallowtail",
            ["3*v^4 + u*v^2", "4*v^3 + 2*u*v", "u"],
            Some(["1", "-v", "v^2"]),
            &[],
            GermKind::Swallowtail,
        ),
        "cuspidal_cross_cap" | "f_CW" => build(
            "cuspidal_cross_cap",
            ["v^2", "u*v^3", "u"],
            Some(["-3*u*v", "2", "-2*v^3"]),
            &[],
            GermKind::CuspidalCrossCap,
        ),
        "cross_cap" => build("cross_cap", ["u*v", "v^2", "u"], None, &[], GermKind::CrossCap),
        "ccr_example" => build(
            "ccr_example",
            ["u", "v^2", "u^2 + u*v^3"],
            Some(["-4*u - 2*v^3", "-3*u*v", "2"]),
            &[],
            GermKind::CuspidalCrossCap,
        ),
        "sw_example" => sw_example(T::one(), T::one()),
        "plane" => build("plane", ["u", "v", "0"], Some(["0", "0", "1"]), &[], GermKind::Regular),
        other => Err(GermError::Unknown(other.to_string())),
    }
}

/// The swallowtail `(u + v²/2 − b²uv²/2 − b²v⁴/8, bv³/3 + buv, cu²/2)`,
/// singular along `u = 0`.
pub fn sw_example<T: Real>(b: T, c: T) -> Result<SurfaceGerm<T>, GermError> {
    build(
        "sw_example",
        ["u + v^2/2 - b^2*u*v^2/2 - b^2*v^4/8", "b*v^3/3 + b*u*v", "c*u^2/2"],
        Some(["-b*c*(v^2 + u)", "c*v*(1 - b^2*u - b^2*v^2/2)", "b*(1 + b^2*v^2/2)"]),
        &[("b", b), ("c", c)],
        GermKind::Swallowtail,
    )
}

fn check_vars(what: &str, src: &str, allowed: &[&str]) -> Result<(), GermError> {
    let e = parse(src)?;
    for id in e.identifiers() {
        if !allowed.contains(&id.as_str()) {
            return Err(GermError::Invalid(format!("{what} may only use {allowed:?}, found `{id}`")));
        }
    }
    Ok(())
}

/// The cuspidal edge `(u, a₀(u) + v², b₀(u)u² + b₂(u)uv² + b₃(u,v)v³)`.
pub fn ms_edge<T: Real>(a0: &str, b0: &str, b2: &str, b3: &str) -> Result<SurfaceGerm<T>, GermError> {
    check_vars("a0", a0, &["u"])?;
    check_vars("b0", b0, &["u"])?;
    check_vars("b2", b2, &["u"])?;
    check_vars("b3", b3, &["u", "v"])?;
    let y = format!("({a0}) + v^2");
    let z = format!("({b0})*u^2 + ({b2})*u*v^2 + ({b3})*v^3");
    Ok(SurfaceGerm::parse("ms_edge", ["u", &y, &z], &[], Rect::square(T::one()))?
        .with_vfactor_normal()
        .with_kind(GermKind::CuspidalEdge))
}
