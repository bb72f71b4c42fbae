//! Seed-file ingestion: a versioned JSON schema that parses into validated
//! initial data (unknown fields are rejected).

use serde::Deserialize;
use warpgeo::pseudo_linear::{Space, Subspace, Vector};
use warpgeo::validation::BuiltSeed;
use warpgeo::warp::{InitialData, WarpedDecomposition};

use crate::CliError;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeedDocument {
    pub schema: u32,
    pub space: SpaceDoc,
    #[serde(default)]
    pub kappa: f64,
    pub base_point: Vec<f64>,
    pub factors: Vec<FactorDoc>,
    pub a_vectors: Vec<Vec<f64>>,
    #[serde(default)]
    pub b_vector: Option<Vec<f64>>,
    #[serde(default)]
    pub flags: Flags,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceDoc {
    pub dim: usize,
    pub index: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactorDoc {
    pub basis: Vec<Vec<f64>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Flags {
    #[serde(default)]
    pub canonical: Option<bool>,
    #[serde(default)]
    pub connected: Option<bool>,
}

pub fn load_document(path: &std::path::Path) -> Result<SeedDocument, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Parse(format!("cannot read {}: {e}", path.display())))?;
    let doc: SeedDocument = serde_json::from_str(&text)
        .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
    if doc.schema != 1 {
        return Err(CliError::Parse(format!(
            "{}: unsupported schema version {} (expected 1)",
            path.display(),
            doc.schema
        )));
    }
    Ok(doc)
}

fn vector(space: Space, coords: &[f64], field: &str) -> Result<Vector<f64>, CliError> {
    Vector::from_f64(space, coords).map_err(|e| CliError::Validation(format!("{field}: {e}")))
}

/// Convert the document into validated initial data and build, restricting
/// to the hyperquadric when `kappa != 0`.
pub fn build_seed(doc: &SeedDocument) -> Result<BuiltSeed<f64>, CliError> {
    let space = Space::new(doc.space.dim, doc.space.index)
        .map_err(|e| CliError::Validation(format!("space: {e}")))?;
    if doc.factors.is_empty() {
        return Err(CliError::Validation(
            "factors: at least the geodesic factor and one spherical factor are required".into(),
        ));
    }
    let base = vector(space, &doc.base_point, "base_point")?;
    let mut factors = Vec::with_capacity(doc.factors.len());
    for (i, f) in doc.factors.iter().enumerate() {
        let field = format!("factors[{i}].basis");
        let mut basis = Vec::with_capacity(f.basis.len());
        for row in &f.basis {
            basis.push(vector(space, row, &field)?);
        }
        factors.push(
            Subspace::span(space, basis)
                .map_err(|e| CliError::Validation(format!("{field}: {e}")))?,
        );
    }
    let mut a_vectors = Vec::with_capacity(doc.a_vectors.len());
    for (i, row) in doc.a_vectors.iter().enumerate() {
        a_vectors.push(vector(space, row, &format!("a_vectors[{i}]"))?);
    }
    let b_vector = match &doc.b_vector {
        Some(row) => Some(vector(space, row, "b_vector")?),
        None => None,
    };
    let data = InitialData::new_full(
        Subspace::whole(space),
        base,
        factors,
        a_vectors,
        doc.kappa,
        b_vector,
    )
    .map_err(|e| CliError::Validation(e.to_string()))?;
    if doc.flags.canonical == Some(true) && !data.is_canonical() {
        return Err(CliError::Validation(
            "flags.canonical: the seed is not in canonical form".into(),
        ));
    }
    if doc.flags.connected == Some(false) {
        return Err(CliError::Validation(
            "flags.connected: only connected factors are supported; image predicates              always stay on the component of the base point"
                .into(),
        ));
    }
    let decomposition =
        WarpedDecomposition::build(data).map_err(|e| CliError::Validation(e.to_string()))?;
    if doc.kappa != 0.0 {
        let restricted = decomposition
            .restrict_to_quadric()
            .map_err(|e| CliError::Validation(e.to_string()))?;
        Ok(BuiltSeed::Restricted(restricted))
    } else {
        Ok(BuiltSeed::Flat(decomposition))
    }
}
