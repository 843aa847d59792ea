//! `lin` and `groupoid` subcommands: exact linear Dirac calculus on JSON documents.

use clap::ValueEnum;
use dirackit::dirac_linear::{
    backward, check_dual_pair, compose, dirac_from_bivector, dirac_from_form, forward, gauge, gauge_bivector,
    gauge_dual_pair, leaf_form, quotient_bivector, reduce_predual, LinearDualPairData, PairMode, Verdict,
};
use dirackit::pair_groupoid::{make_pair_groupoid, GroupoidError};
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::{json, Value};

use crate::encode::{
    bivector, form, rows, DiracJson, MapJson, PairJson, RelationJson, Rows, SubspaceJson,
};
use crate::error::CliError;
use crate::schema;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LinOp {
    FromForm,
    FromBivector,
    Forward,
    Backward,
    Gauge,
    GaugeBivector,
    LeafForm,
    QuotientBivector,
    CheckDualPair,
    GaugeDualPair,
    Reduce,
    Compose,
}

impl LinOp {
    pub fn name(self) -> String {
        self.to_possible_value().expect("no skipped variants").get_name().to_string()
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FormReq {
    omega: Rows,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BivectorReq {
    pi: Rows,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MapReq {
    map: MapJson,
    dirac: DiracJson,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GaugeReq {
    b: Rows,
    dirac: DiracJson,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GaugeBivectorReq {
    b: Rows,
    pi: Rows,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DiracReq {
    dirac: DiracJson,
}

#[derive(Deserialize, Default, Clone, Copy)]
#[serde(rename_all = "lowercase")]
enum Mode {
    #[default]
    Dual,
    Predual,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CheckReq {
    pair: PairJson,
    #[serde(default)]
    mode: Mode,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GaugePairReq {
    pair: PairJson,
    b1: Rows,
    b2: Rows,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PairReq {
    pair: PairJson,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ComposeReq {
    r1: RelationJson,
    r2: RelationJson,
}

fn decode<T: DeserializeOwned>(doc: Value) -> Result<T, CliError> {
    serde_json::from_value(doc).map_err(|e| CliError::Input(e.to_string()))
}

fn verdict_json(v: &Verdict) -> Value {
    json!({"holds": v.holds(), "checks": v.checks})
}

pub fn run(op: LinOp, doc: Value) -> Result<Value, CliError> {
    schema::validate(&format!("request/lin-{}", op.name()), &doc)?;
    let out = match op {
        LinOp::FromForm => {
            let r: FormReq = decode(doc)?;
            json!({"dirac": DiracJson::encode(&dirac_from_form(&form(&r.omega, "omega")?))})
        }
        LinOp::FromBivector => {
            let r: BivectorReq = decode(doc)?;
            json!({"dirac": DiracJson::encode(&dirac_from_bivector(&bivector(&r.pi, "pi")?))})
        }
        LinOp::Forward | LinOp::Backward => {
            let r: MapReq = decode(doc)?;
            let phi = r.map.decode("map")?;
            let l = r.dirac.decode("dirac")?;
            let image = if op == LinOp::Forward { forward(&phi, &l)? } else { backward(&phi, &l)? };
            json!({"dirac": DiracJson::encode(&image)})
        }
        LinOp::Gauge => {
            let r: GaugeReq = decode(doc)?;
            let l = gauge(&form(&r.b, "b")?, &r.dirac.decode("dirac")?)?;
            json!({"dirac": DiracJson::encode(&l)})
        }
        LinOp::GaugeBivector => {
            let r: GaugeBivectorReq = decode(doc)?;
            let g = gauge_bivector(&form(&r.b, "b")?, &bivector(&r.pi, "pi")?)?;
            json!({"bivector": g.map(|p| rows(p.matrix()))})
        }
        LinOp::LeafForm => {
            let r: DiracReq = decode(doc)?;
            let (range, omega) = leaf_form(&r.dirac.decode("dirac")?);
            json!({"range": SubspaceJson::encode(&range), "form": rows(omega.matrix())})
        }
        LinOp::QuotientBivector => {
            let r: DiracReq = decode(doc)?;
            let (kernel, pi) = quotient_bivector(&r.dirac.decode("dirac")?);
            json!({"kernel": SubspaceJson::encode(&kernel), "bivector": rows(pi.matrix())})
        }
        LinOp::CheckDualPair => {
            let r: CheckReq = decode(doc)?;
            let mode = match r.mode {
                Mode::Dual => PairMode::Dual,
                Mode::Predual => PairMode::Predual,
            };
            verdict_json(&check_dual_pair(&r.pair.decode()?, mode)?)
        }
        LinOp::GaugeDualPair => {
            let r: GaugePairReq = decode(doc)?;
            let g = gauge_dual_pair(&r.pair.decode()?, &form(&r.b1, "b1")?, &form(&r.b2, "b2")?)?;
            let mut out = verdict_json(&g.verdict);
            out["omega_hat"] = json!(rows(g.omega_hat.matrix()));
            out["omega_hat_nondegenerate"] = json!(g.omega_hat_nondegenerate);
            out["gauged_poisson"] = json!(g.gauged_poisson);
            out["l1"] = json!(DiracJson::encode(&g.l1));
            out["l2"] = json!(DiracJson::encode(&g.l2));
            out
        }
        LinOp::Reduce => {
            let r: PairReq = decode(doc)?;
            json!({"pair": PairJson::encode(&reduce_predual(&r.pair.decode()?)?)})
        }
        LinOp::Compose => {
            let r: ComposeReq = decode(doc)?;
            let c = compose(&r.r1.decode("r1")?, &r.r2.decode("r2")?)?;
            json!({"relation": RelationJson::encode(&c)})
        }
    };
    Ok(out)
}

/// Multiplicativity, nondegeneracy and the dual pair property for the gauged
/// groupoid form `Omega_B` and the bimodule form `Omega^`.
pub fn groupoid_check(omega: Value, b: Value) -> Result<Value, CliError> {
    schema::validate("request/matrix", &omega)?;
    schema::validate("request/matrix", &b)?;
    let omega = form(&decode(omega)?, "omega")?;
    let b = form(&decode(b)?, "b")?;
    let g = make_pair_groupoid(&omega)?;
    let pi = omega.inverse_bivector().expect("nondegenerate after make_pair_groupoid");
    let present = gauge_bivector(&b, &pi)?.is_some();

    let omega_b = g.gauge_form(&b)?;
    let base = gauge(&b, &dirac_from_form(&omega))?;
    let legs = LinearDualPairData {
        omega: omega_b.clone(),
        j1: g.alpha.clone(),
        j2: g.beta.clone(),
        l1: base.clone(),
        l2: base.negate(),
        full: true,
    };
    let gauged = json!({
        "multiplicative": g.check_multiplicative(&omega_b),
        "nondegenerate": omega_b.is_nondegenerate(),
        "dual_pair": check_dual_pair(&legs, PairMode::Dual)?.holds(),
    });

    let omega_hat = g.bimodule_form(&b)?;
    let dual = match g.morita_bimodule_form(&b) {
        Ok((_, v)) => v.holds(),
        Err(GroupoidError::GaugeNotPoisson) => false,
        Err(e) => return Err(e.into()),
    };
    let bimodule = json!({
        "multiplicative": g.check_multiplicative(&omega_hat),
        "nondegenerate": omega_hat.is_nondegenerate(),
        "dual_pair": dual,
    });
    Ok(json!({"omega_b": gauged, "omega_hat": bimodule, "gauge_bivector_present": present}))
}
