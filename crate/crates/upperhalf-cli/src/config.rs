//! Configuration file model and validation.
//!
//! The check configuration is a single JSON object with keys
//! `dimension`, `kind`, `lambda`, `rho` (optional, default 0), exactly one
//! of `field` / `potential`, `G` (optional, default unit), `grid`, and
//! `tolerance`. Unknown keys are rejected so typos fail loudly.

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};

use upperhalf::expr::parse;
use upperhalf::fields::{
    derived_conformal_factor, ConformalFactorSpec, PotentialParams, VectorFieldSpec,
};
use upperhalf::soliton::{AxisSpec, GridSpec, SolitonProblem};

/// Largest number of grid nodes a single check may sweep.
pub const MAX_GRID_NODES: usize = 10_000_000;

const MAX_DIMENSION: usize = 16;

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub dimension: usize,
    pub kind: RawKind,
    pub lambda: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field: Option<RawField>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub potential: Option<RawPotential>,
    #[serde(default, rename = "G", skip_serializing_if = "Option::is_none")]
    pub conformal: Option<RawG>,
    pub grid: Vec<RawAxis>,
    pub tolerance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RawKind {
    Ricci,
    RicciBourguignon,
    GRicciBourguignon,
    GradientGRicciBourguignon,
}

impl RawKind {
    pub fn as_str(self) -> &'static str {
        match self {
            RawKind::Ricci => "ricci",
            RawKind::RicciBourguignon => "ricci-bourguignon",
            RawKind::GRicciBourguignon => "g-ricci-bourguignon",
            RawKind::GradientGRicciBourguignon => "gradient-g-ricci-bourguignon",
        }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(tag = "family", rename_all = "lowercase", deny_unknown_fields)]
pub enum RawField {
    Killing2d {
        a: f64,
        b: f64,
        c: f64,
    },
    Killingnd {
        a: Vec<f64>,
        b: f64,
        c: Vec<f64>,
    },
    Constant {
        components: Vec<f64>,
    },
    Gradient {
        a: f64,
        b: Vec<f64>,
        c: f64,
        #[serde(default)]
        e: f64,
    },
    Custom {
        components: Vec<String>,
    },
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RawPotential {
    pub a: f64,
    pub b: Vec<f64>,
    pub c: f64,
    #[serde(default)]
    pub e: f64,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum RawG {
    Unit,
    DerivedFromPotential,
    Custom { expr: String },
}

#[derive(Debug, Clone, Copy, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RawAxis {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

/// A validated configuration: the executable problem plus the canonical
/// config echo (defaults filled in) that `--print-config` re-emits.
pub struct Validated {
    pub problem: SolitonProblem,
    pub grid: GridSpec,
    pub tolerance: f64,
    pub canonical: RawConfig,
}

pub fn parse_config(text: &str) -> Result<RawConfig> {
    serde_json::from_str(text).context("configuration does not match the expected schema")
}

/// Applies `--tol` and `--grid AXIS=min:max:count` overrides onto the raw
/// config before validation.
pub fn apply_overrides(raw: &mut RawConfig, tol: Option<f64>, grid: &[String]) -> Result<()> {
    if let Some(t) = tol {
        raw.tolerance = t;
    }
    for spec in grid {
        let (axis_part, rest) = spec
            .split_once('=')
            .ok_or_else(|| anyhow!("grid override '{spec}' is not AXIS=MIN:MAX:COUNT"))?;
        let axis_txt = axis_part.strip_prefix('x').unwrap_or(axis_part);
        let axis: usize = axis_txt
            .parse()
            .map_err(|_| anyhow!("grid override '{spec}' has a malformed axis '{axis_part}'"))?;
        if axis == 0 || axis > raw.grid.len() {
            bail!(
                "grid override '{spec}' names axis {axis}, but the grid has {} axes",
                raw.grid.len()
            );
        }
        let parts: Vec<&str> = rest.split(':').collect();
        if parts.len() != 3 {
            bail!("grid override '{spec}' is not AXIS=MIN:MAX:COUNT");
        }
        let min: f64 = parts[0]
            .parse()
            .map_err(|_| anyhow!("grid override '{spec}': bad min '{}'", parts[0]))?;
        let max: f64 = parts[1]
            .parse()
            .map_err(|_| anyhow!("grid override '{spec}': bad max '{}'", parts[1]))?;
        let count: usize = parts[2]
            .parse()
            .map_err(|_| anyhow!("grid override '{spec}': bad count '{}'", parts[2]))?;
        raw.grid[axis - 1] = RawAxis { min, max, count };
    }
    Ok(())
}

/// Builds the executable field spec for a raw family at dimension `n`.
pub fn build_field_spec(raw: &RawField, n: usize) -> Result<VectorFieldSpec> {
    match raw {
        RawField::Killing2d { a, b, c } => {
            if n != 2 {
                bail!("field family killing2d requires dimension 2, got {n}");
            }
            Ok(VectorFieldSpec::killing_2d(*a, *b, *c)?)
        }
        RawField::Killingnd { a, b, c } => {
            Ok(VectorFieldSpec::killing_nd(n, a.clone(), *b, c.clone())?)
        }
        RawField::Constant { components } => {
            if components.len() != n {
                bail!(
                    "constant field needs {n} components, got {}",
                    components.len()
                );
            }
            Ok(VectorFieldSpec::constant(components.clone())?)
        }
        RawField::Gradient { a, b, c, e } => {
            let params = build_potential_params(*a, b, *c, *e, n)?;
            Ok(VectorFieldSpec::gradient_of(params))
        }
        RawField::Custom { components } => {
            if components.len() != n {
                bail!(
                    "custom field needs {n} expression components, got {}",
                    components.len()
                );
            }
            let mut exprs = Vec::with_capacity(n);
            for (i, src) in components.iter().enumerate() {
                let e = parse(src, n)
                    .map_err(|err| anyhow!("field component {}: {err}", i + 1))?;
                exprs.push(e);
            }
            Ok(VectorFieldSpec::custom(exprs)?)
        }
    }
}

fn build_potential_params(a: f64, b: &[f64], c: f64, e: f64, n: usize) -> Result<PotentialParams> {
    if b.len() != n - 1 {
        bail!(
            "potential coefficient array b needs {} entries for dimension {n}, got {}",
            n - 1,
            b.len()
        );
    }
    Ok(PotentialParams::new(a, b.to_vec(), c, e)?)
}

pub fn validate(raw: &RawConfig) -> Result<Validated> {
    let n = raw.dimension;
    if !(2..=MAX_DIMENSION).contains(&n) {
        bail!("dimension must be between 2 and {MAX_DIMENSION}, got {n}");
    }
    let rho = raw.rho.unwrap_or(0.0);
    if !rho.is_finite() {
        bail!("rho must be finite");
    }
    if !raw.lambda.is_finite() {
        bail!("lambda must be finite");
    }
    if raw.kind == RawKind::Ricci && rho != 0.0 {
        bail!(
            "kind \"ricci\" requires rho = 0, got rho = {rho}; \
             use kind \"ricci-bourguignon\" for a nonzero rho"
        );
    }

    let gradient_kind = raw.kind == RawKind::GradientGRicciBourguignon;
    if gradient_kind {
        if raw.field.is_some() {
            bail!("kind \"gradient-g-ricci-bourguignon\" takes \"potential\", not \"field\"");
        }
        if raw.potential.is_none() {
            bail!("kind \"gradient-g-ricci-bourguignon\" requires a \"potential\"");
        }
    } else {
        if raw.potential.is_some() {
            bail!(
                "kind \"{}\" takes \"field\", not \"potential\"",
                raw.kind.as_str()
            );
        }
        if raw.field.is_none() {
            bail!("kind \"{}\" requires a \"field\"", raw.kind.as_str());
        }
    }

    let g_raw = raw.conformal.clone().unwrap_or(RawG::Unit);
    match raw.kind {
        RawKind::Ricci | RawKind::RicciBourguignon => {
            if !matches!(g_raw, RawG::Unit) {
                bail!(
                    "kind \"{}\" does not admit a conformal factor G; \
                     use a g-ricci-bourguignon kind",
                    raw.kind.as_str()
                );
            }
        }
        RawKind::GRicciBourguignon => {
            if matches!(g_raw, RawG::DerivedFromPotential) {
                bail!(
                    "G type \"derived-from-potential\" requires kind \
                     \"gradient-g-ricci-bourguignon\""
                );
            }
        }
        RawKind::GradientGRicciBourguignon => {}
    }

    let conformal = match &g_raw {
        RawG::Unit => ConformalFactorSpec::Unit,
        RawG::DerivedFromPotential => {
            let p = raw.potential.as_ref().expect("checked above");
            let params = build_potential_params(p.a, &p.b, p.c, p.e, n)?;
            derived_conformal_factor(params, raw.lambda, rho)?
        }
        RawG::Custom { expr } => {
            let e = parse(expr, n).map_err(|err| anyhow!("G expression: {err}"))?;
            ConformalFactorSpec::Custom(e)
        }
    };

    let problem = match raw.kind {
        RawKind::Ricci => {
            let field = build_field_spec(raw.field.as_ref().unwrap(), n)?;
            SolitonProblem::ricci(field, raw.lambda)?
        }
        RawKind::RicciBourguignon => {
            let field = build_field_spec(raw.field.as_ref().unwrap(), n)?;
            SolitonProblem::ricci_bourguignon(field, raw.lambda, rho)?
        }
        RawKind::GRicciBourguignon => {
            let field = build_field_spec(raw.field.as_ref().unwrap(), n)?;
            SolitonProblem::g_ricci_bourguignon(field, raw.lambda, rho, conformal)?
        }
        RawKind::GradientGRicciBourguignon => {
            let p = raw.potential.as_ref().unwrap();
            let params = build_potential_params(p.a, &p.b, p.c, p.e, n)?;
            SolitonProblem::gradient_grb(params, raw.lambda, rho, conformal)?
        }
    };

    if raw.grid.len() != n {
        bail!(
            "grid needs one axis per coordinate ({n}), got {}",
            raw.grid.len()
        );
    }
    let axes: Vec<AxisSpec> = raw
        .grid
        .iter()
        .map(|ax| AxisSpec {
            min: ax.min,
            max: ax.max,
            count: ax.count,
        })
        .collect();
    let grid = GridSpec::new(axes)?;
    if grid.node_count() > MAX_GRID_NODES {
        bail!(
            "grid has {} nodes, limit is {MAX_GRID_NODES}",
            grid.node_count()
        );
    }

    if !(raw.tolerance.is_finite() && raw.tolerance > 0.0) {
        bail!("tolerance must be positive and finite, got {}", raw.tolerance);
    }

    let canonical = RawConfig {
        dimension: n,
        kind: raw.kind,
        lambda: raw.lambda,
        rho: Some(rho),
        field: raw.field.clone(),
        potential: raw.potential.clone().map(|p| RawPotential {
            a: p.a,
            b: p.b,
            c: p.c,
            e: p.e,
        }),
        conformal: Some(g_raw),
        grid: raw.grid.clone(),
        tolerance: raw.tolerance,
    };

    Ok(Validated {
        problem,
        grid,
        tolerance: raw.tolerance,
        canonical,
    })
}
