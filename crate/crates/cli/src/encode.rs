//! JSON encodings of exact matrices, maps, subspaces and Dirac structures.

use dirackit::dirac_linear::{Bivector, LinearDirac, LinearDualPairData, LinearMap, LinearRelation, SkewForm};
use dirackit::exact_linalg::{Mat, Rat, Subspace};
use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

use crate::error::CliError;

/// A rational written as `"p/q"`, or an integer.
#[derive(Debug, Clone, PartialEq)]
pub struct Q(pub Rat);

impl Serialize for Q {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for Q {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = Q;

            fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
                f.write_str("a rational \"p/q\" or an integer")
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<Q, E> {
                v.parse::<Rat>()
                    .map(Q)
                    .map_err(|_| E::custom(format!("bad rational {v:?}")))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Q, E> {
                Ok(Q(Rat::from_integer(v.into())))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Q, E> {
                Ok(Q(Rat::from_integer(v.into())))
            }
        }
        d.deserialize_any(V)
    }
}

pub type Rows = Vec<Vec<Q>>;

pub fn rows(m: &Mat) -> Rows {
    m.row_vecs()
        .into_iter()
        .map(|r| r.into_iter().map(Q).collect())
        .collect()
}

pub fn matrix(rows: &Rows, cols: usize, what: &str) -> Result<Mat, CliError> {
    if let Some(i) = rows.iter().position(|r| r.len() != cols) {
        return Err(CliError::Input(format!(
            "{what}: row {i} has {} entries, expected {cols}",
            rows[i].len()
        )));
    }
    let data = rows.iter().map(|r| r.iter().map(|q| q.0.clone()).collect()).collect();
    Ok(Mat::from_rows(data, cols)?)
}

fn square(rows: &Rows, what: &str) -> Result<Mat, CliError> {
    matrix(rows, rows.len(), what)
}

pub fn form(rows: &Rows, what: &str) -> Result<SkewForm, CliError> {
    Ok(SkewForm::new(square(rows, what)?)?)
}

pub fn bivector(rows: &Rows, what: &str) -> Result<Bivector, CliError> {
    Ok(Bivector::new(square(rows, what)?)?)
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapJson {
    pub matrix: Rows,
    pub source_dim: usize,
}

impl MapJson {
    pub fn decode(&self, what: &str) -> Result<LinearMap, CliError> {
        Ok(LinearMap::new(matrix(&self.matrix, self.source_dim, what)?))
    }

    pub fn encode(m: &LinearMap) -> Self {
        MapJson {
            matrix: rows(m.matrix()),
            source_dim: m.source_dim(),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubspaceJson {
    pub ambient_dim: usize,
    pub basis: Rows,
}

impl SubspaceJson {
    pub fn encode(s: &Subspace) -> Self {
        SubspaceJson {
            ambient_dim: s.ambient_dim(),
            basis: rows(s.basis()),
        }
    }
}

/// Basis rows `(x, xi)` of `L` inside `V (+) V*`.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiracJson {
    pub dim: usize,
    pub basis: Rows,
}

impl DiracJson {
    pub fn decode(&self, what: &str) -> Result<LinearDirac, CliError> {
        let m = matrix(&self.basis, 2 * self.dim, what)?;
        Ok(LinearDirac::new(self.dim, Subspace::span(&m))?)
    }

    pub fn encode(l: &LinearDirac) -> Self {
        DiracJson {
            dim: l.dim_v(),
            basis: rows(l.space().basis()),
        }
    }
}

/// Basis rows `(w, eta, v, xi)` with `(w, eta)` in the target and `(v, xi)` in the source.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelationJson {
    pub target_dim: usize,
    pub source_dim: usize,
    pub basis: Rows,
}

impl RelationJson {
    pub fn decode(&self, what: &str) -> Result<LinearRelation, CliError> {
        let m = matrix(&self.basis, 2 * (self.target_dim + self.source_dim), what)?;
        Ok(LinearRelation::new(self.target_dim, self.source_dim, Subspace::span(&m))?)
    }

    pub fn encode(r: &LinearRelation) -> Self {
        RelationJson {
            target_dim: r.target_dim(),
            source_dim: r.source_dim(),
            basis: rows(r.space().basis()),
        }
    }
}

fn yes() -> bool {
    true
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairJson {
    pub omega: Rows,
    pub j1: MapJson,
    pub j2: MapJson,
    pub l1: DiracJson,
    pub l2: DiracJson,
    #[serde(default = "yes")]
    pub full: bool,
}

impl PairJson {
    pub fn decode(&self) -> Result<LinearDualPairData, CliError> {
        Ok(LinearDualPairData {
            omega: form(&self.omega, "omega")?,
            j1: self.j1.decode("j1")?,
            j2: self.j2.decode("j2")?,
            l1: self.l1.decode("l1")?,
            l2: self.l2.decode("l2")?,
            full: self.full,
        })
    }

    pub fn encode(d: &LinearDualPairData) -> Self {
        PairJson {
            omega: rows(d.omega.matrix()),
            j1: MapJson::encode(&d.j1),
            j2: MapJson::encode(&d.j2),
            l1: DiracJson::encode(&d.l1),
            l2: DiracJson::encode(&d.l2),
            full: d.full,
        }
    }
}
