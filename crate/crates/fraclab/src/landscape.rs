//! Landscape registry: `quadratic`, `styblinski_tang`, `embedded_saddle`,
//! `bistable`.

use anyhow::Result;
use fraclab_core::linalg::DenseMatrix;
use fraclab_core::objectives::{bistable, make_embedded_saddle, quadratic, BiStable, BiStableParams, Objective, StyblinskiTang};
use fraclab_core::SeedStream;

use crate::config::{config_error, parse_list, LandscapeSpec};

pub const NAMES: [&str; 4] = ["quadratic", "styblinski_tang", "embedded_saddle", "bistable"];

/// Stream index reserved for randomly generated landscapes; optimizer runs
/// use stream 0.
pub const LANDSCAPE_STREAM: u64 = 1;

pub type DynObjective = Box<dyn Objective + Send + Sync>;

pub fn dimension(spec: &LandscapeSpec) -> usize {
    match spec.name.as_str() {
        "bistable" => 1,
        "quadratic" if !spec.diag.is_empty() => spec.diag.len(),
        _ => spec.dim,
    }
}

pub fn bistable_params(spec: &LandscapeSpec) -> Result<BiStableParams> {
    let base = match spec.bistable.as_str() {
        "shallow_deep" => BiStableParams::shallow_deep(),
        "sharp_flat" => BiStableParams::sharp_flat(),
        other => {
            let v: Vec<f64> = parse_list("bistable", other)?;
            if v.len() != 6 {
                return Err(config_error("`bistable` takes a preset name or six numbers v0,v1,v2,a,c,m"));
            }
            BiStableParams::new(v[0], v[1], v[2], v[3], v[4], v[5])
        }
    };
    Ok(base.with_k0(spec.k0))
}

pub fn build_bistable(spec: &LandscapeSpec) -> Result<BiStable> {
    bistable(bistable_params(spec)?).map_err(|e| config_error(format!("bistable landscape: {e}")))
}

pub fn build(spec: &LandscapeSpec, master_seed: u64) -> Result<DynObjective> {
    let dim = dimension(spec);
    if dim == 0 {
        return Err(config_error("landscape dimension must be at least 1"));
    }
    let invalid = |e: fraclab_core::Error| config_error(format!("landscape `{}`: {e}", spec.name));
    Ok(match spec.name.as_str() {
        "quadratic" => {
            let diag = if spec.diag.is_empty() { vec![1.0; dim] } else { spec.diag.clone() };
            Box::new(quadratic(DenseMatrix::from_diagonal(&diag)).map_err(invalid)?)
        }
        "styblinski_tang" => Box::new(StyblinskiTang::new(dim)),
        "embedded_saddle" => Box::new(
            make_embedded_saddle(dim, spec.negative_directions, spec.lambda, SeedStream::new(master_seed, LANDSCAPE_STREAM))
                .map_err(invalid)?,
        ),
        "bistable" => Box::new(build_bistable(spec)?),
        other => {
            return Err(config_error(format!("unknown landscape `{other}` (known: {})", NAMES.join(", "))));
        }
    })
}
