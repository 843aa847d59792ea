//! `surf` subcommands: zero curves, periods, region trees and gauge comparison.

use std::path::Path;

use clap::{Args, ValueEnum};
use dirackit::surface_expr::{parse, Expr};
use dirackit::surface_poisson::{
    classify, gauge_forward, gauge_witness, ClassifierReport, SurfaceFunction, SurfaceKind, SurfaceSpec, ZeroCurve,
};
use dirackit::tree_invariant::{decide_morita_sphere, MoritaVerdict, SignRelation};
use serde_json::{json, Value};

use crate::error::CliError;
use crate::schema::round_f64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Surface {
    Sphere,
    Torus,
}

#[derive(Debug, Clone, Args)]
pub struct SurfaceArgs {
    #[arg(long, value_enum, default_value = "sphere")]
    pub surface: Surface,
    /// Grid cells along each chart axis.
    #[arg(long, default_value_t = 512)]
    pub grid: usize,
}

impl SurfaceArgs {
    pub fn spec(&self) -> SurfaceSpec {
        match self.surface {
            Surface::Sphere => SurfaceSpec::sphere(self.grid),
            Surface::Torus => SurfaceSpec::torus(self.grid),
        }
    }
}

fn expr(src: &str) -> Result<Expr, CliError> {
    Ok(parse(src)?)
}

fn report(src: &str, s: &SurfaceSpec) -> Result<ClassifierReport, CliError> {
    Ok(classify(&SurfaceFunction::new(expr(src)?), s)?)
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

pub fn classify_cmd(
    f: &str,
    args: &SurfaceArgs,
    curves_csv: Option<&Path>,
    dot: Option<&Path>,
) -> Result<Value, CliError> {
    let r = report(f, &args.spec())?;
    if let Some(path) = curves_csv {
        write_curves_csv(path, &r.curves)?;
    }
    if let Some(path) = dot {
        write_file(path, &r.graph.to_dot())?;
    }
    Ok(to_value(&r))
}

pub fn compare_cmd(f1: &str, f2: &str, tol: f64, args: &SurfaceArgs) -> Result<Value, CliError> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(CliError::Input(format!("--tol must be positive, got {tol}")));
    }
    let s = args.spec();
    let r1 = report(f1, &s)?;
    let r2 = report(f2, &s)?;
    let witness = gauge_witness(
        &SurfaceFunction::new(expr(f1)?),
        &SurfaceFunction::new(expr(f2)?),
        &s,
    )?;
    let mut notes = Vec::new();
    let (morita, trees) = if s.kind == SurfaceKind::Sphere {
        let v = decide_morita_sphere(&r1, &r2, tol)?;
        if let MoritaVerdict::MoritaEquivalent { isomorphism } = &v {
            if isomorphism.signs == SignRelation::GloballyFlipped {
                notes.push("signs globally flipped".to_string());
            }
        }
        (to_value(&v), json!([r1.graph, r2.graph]))
    } else {
        notes.push("Morita decision is only made on the sphere".to_string());
        (Value::Null, Value::Null)
    };
    let finite = |x: f64| if x.is_finite() { json!(x) } else { Value::Null };
    Ok(json!({
        "gauge_verdict": witness.verdict,
        "morita_verdict": morita,
        "details": {
            "periods_1": r1.periods,
            "periods_2": r2.periods,
            "matching": witness.matching,
            "orientations_agree": witness.orientations_agree,
            "coefficient_max": finite(witness.coefficient_max),
            "collar_max": witness.collar_max.map(finite),
            "bounded": witness.bounded,
            "trees": trees,
            "notes": notes,
        },
    }))
}

pub fn gauge_cmd(f: &str, b: &str, args: &SurfaceArgs) -> Result<Value, CliError> {
    let s = args.spec();
    s.validate()?;
    Ok(to_value(&gauge_forward(&expr(f)?, &expr(b)?, &s)))
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

fn write_curves_csv(path: &Path, curves: &[ZeroCurve]) -> Result<(), CliError> {
    let io = |e: csv::Error| CliError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    };
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    w.write_record(["curve_id", "point_index", "z", "theta", "grad_norm"]).map_err(io)?;
    for (id, c) in curves.iter().enumerate() {
        for (i, (p, g)) in c.points.iter().zip(&c.grad_norm).enumerate() {
            w.serialize((id, i, round_f64(p.z), round_f64(p.theta), round_f64(*g))).map_err(io)?;
        }
    }
    w.flush().map_err(|e| CliError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}
