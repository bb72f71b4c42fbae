//! Subcommand implementations: build / eval / invert / validate / enumerate
//! / circle.

use std::path::Path;

use serde::Serialize;
use warpgeo::circles::{circle_integrate, closed_form_state, CircleSample, CircleState};
use warpgeo::pseudo_linear::{Space, Vector};
use warpgeo::validation::{run_validation, BuiltSeed, ValidationConfig};
use warpgeo::warp::WarpedPoint;

use crate::output::{emit, float_array, float_matrix, fmt_f64, to_sorted_json};
use crate::seed::SeedDocument;
use crate::CliError;

type V = Vector<f64>;

fn seed_summary(doc: &SeedDocument, seed: &BuiltSeed<f64>) -> serde_json::Value {
    let w = seed.flat();
    let factors: Vec<serde_json::Value> = (1..=w.spherical_count())
        .map(|i| {
            let f = w.spherical_factor(i);
            let (dim, index) = f.intrinsic_signature();
            serde_json::json!({
                "kind": f.kind().to_string(),
                "dim": dim,
                "index": index,
                "curvature": f.curvature(),
                "center": f.center().map(|c| c.coords().to_vec()),
                "disconnected": f.is_disconnected(),
            })
        })
        .collect();
    let tag = match seed {
        BuiltSeed::Flat(w) => w.enumerate_type(),
        BuiltSeed::Restricted(r) => r.enumerate_type(),
    };
    let image = match seed {
        BuiltSeed::Flat(w) => match w.case() {
            warpgeo::warp::CaseTag::Null => {
                "c + { p : <a, p> > 0 }".to_string()
            }
            warpgeo::warp::CaseTag::NonNull => {
                "c + { p : sgn (P_i p)^2 = eps_i, component cuts on disconnected factors }"
                    .to_string()
            }
            warpgeo::warp::CaseTag::Composed => {
                "nested image of the composed decompositions".to_string()
            }
        },
        BuiltSeed::Restricted(r) => format!(
            "image of the flat decomposition on <p,p> = 1/kappa{}",
            if r.is_two_sheeted() {
                ", cut to the sheet of the base point"
            } else {
                ""
            }
        ),
    };
    serde_json::json!({
        "schema": 1,
        "version": env!("CARGO_PKG_VERSION"),
        "case_tag": w.case().to_string(),
        "canonical": w.is_canonical(),
        "space": {"dim": w.space().dim(), "index": w.space().index()},
        "kappa": doc.kappa,
        "spherical_factors": factors,
        "type_tag": {"family": tag.family.to_string(), "product": tag.product},
        "image": image,
    })
}

pub fn cmd_build(input: &Path, report: Option<&Path>) -> Result<(), CliError> {
    let doc = crate::seed::load_document(input)?;
    let seed = crate::seed::build_seed(&doc)?;
    let summary = seed_summary(&doc, &seed);
    let text = to_sorted_json(&summary).map_err(|e| CliError::Validation(e.to_string()))?;
    emit(report, &text).map_err(|e| CliError::Validation(e.to_string()))?;
    Ok(())
}

fn parse_components(space: Space, text: &str, expected: usize) -> Result<WarpedPoint<f64>, CliError> {
    let rows: Vec<Vec<f64>> = serde_json::from_str(text)
        .map_err(|e| CliError::Parse(format!("--point: {e}")))?;
    if rows.len() != expected {
        return Err(CliError::Validation(format!(
            "--point: expected {expected} factor components, got {}",
            rows.len()
        )));
    }
    let mut components = Vec::with_capacity(rows.len());
    for (i, row) in rows.iter().enumerate() {
        components.push(
            Vector::from_f64(space, row)
                .map_err(|e| CliError::Validation(format!("--point[{i}]: {e}")))?,
        );
    }
    WarpedPoint::new(components).map_err(|e| CliError::Validation(e.to_string()))
}

pub fn cmd_eval(input: &Path, point: &str) -> Result<(), CliError> {
    let doc = crate::seed::load_document(input)?;
    let seed = crate::seed::build_seed(&doc)?;
    let w = seed.flat();
    let p = parse_components(w.space(), point, w.spherical_count() + 1)?;
    let q = match &seed {
        BuiltSeed::Flat(w) => w.psi_forward(&p),
        BuiltSeed::Restricted(r) => r.psi_forward(&p),
    }
    .map_err(|e| CliError::Validation(e.to_string()))?;
    println!("{}", float_array(q.coords()));
    Ok(())
}

pub fn cmd_invert(input: &Path, ambient_point: &str) -> Result<(), CliError> {
    let doc = crate::seed::load_document(input)?;
    let seed = crate::seed::build_seed(&doc)?;
    let w = seed.flat();
    let coords: Vec<f64> = serde_json::from_str(ambient_point)
        .map_err(|e| CliError::Parse(format!("--ambient-point: {e}")))?;
    let q = Vector::from_f64(w.space(), &coords)
        .map_err(|e| CliError::Validation(format!("--ambient-point: {e}")))?;
    let p = match &seed {
        BuiltSeed::Flat(w) => w.psi_inverse(&q),
        BuiltSeed::Restricted(r) => r.psi_inverse(&q),
    }
    .map_err(|e| CliError::Validation(e.to_string()))?;
    let rows: Vec<Vec<f64>> = p.components().iter().map(|c| c.coords().to_vec()).collect();
    println!("{}", float_matrix(&rows));
    Ok(())
}

#[derive(Serialize)]
struct CheckRecord {
    name: String,
    samples: usize,
    max_error: f64,
    tolerance: f64,
    pass: bool,
}

pub fn cmd_validate(
    input: &Path,
    samples: usize,
    seed_value: u64,
    tol: f64,
    report: Option<&Path>,
) -> Result<bool, CliError> {
    let doc = crate::seed::load_document(input)?;
    let seed = crate::seed::build_seed(&doc)?;
    let cfg = ValidationConfig {
        samples,
        seed: seed_value,
        tolerance_scale: tol,
    };
    let checks = run_validation(&seed, &cfg);
    let records: Vec<CheckRecord> = checks
        .iter()
        .map(|c| CheckRecord {
            name: c.name.to_string(),
            samples: c.samples,
            max_error: c.max_error,
            tolerance: c.tolerance * tol,
            pass: c.pass,
        })
        .collect();
    let pass = records.iter().all(|r| r.pass);
    let payload = serde_json::json!({
        "schema": 1,
        "version": env!("CARGO_PKG_VERSION"),
        "seed": seed_value,
        "samples": samples,
        "tolerance_scale": tol,
        "summary": seed_summary(&doc, &seed),
        "checks": records,
        "pass": pass,
    });
    let text = to_sorted_json(&payload).map_err(|e| CliError::Validation(e.to_string()))?;
    emit(report, &text).map_err(|e| CliError::Validation(e.to_string()))?;
    Ok(pass)
}

pub fn cmd_enumerate(input: &Path) -> Result<(), CliError> {
    let doc = crate::seed::load_document(input)?;
    let seed = crate::seed::build_seed(&doc)?;
    let tag = match &seed {
        BuiltSeed::Flat(w) => w.enumerate_type(),
        BuiltSeed::Restricted(r) => r.enumerate_type(),
    };
    let payload = serde_json::json!({
        "family": tag.family.to_string(),
        "product": tag.product,
    });
    println!(
        "{}",
        serde_json::to_string_pretty(&payload).map_err(|e| CliError::Validation(e.to_string()))?
    );
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CircleMode {
    ClosedForm,
    Integrate,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrajectoryFormat {
    Json,
    Csv,
}

fn parse_csv_floats(text: &str, field: &str) -> Result<Vec<f64>, CliError> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| CliError::Parse(format!("{field}: {e}")))
        })
        .collect()
}

#[allow(clippy::too_many_arguments)]
pub fn cmd_circle(
    space_arg: &str,
    p_arg: &str,
    x_arg: &str,
    y_arg: &str,
    t_max: f64,
    dt: f64,
    mode: CircleMode,
    format: TrajectoryFormat,
    output: Option<&Path>,
) -> Result<(), CliError> {
    let dims = parse_csv_floats(space_arg, "--space")?;
    if dims.len() != 2 {
        return Err(CliError::Parse("--space: expected \"n,nu\"".into()));
    }
    let space = Space::new(dims[0] as usize, dims[1] as usize)
        .map_err(|e| CliError::Validation(format!("--space: {e}")))?;
    let mk = |text: &str, field: &str| -> Result<V, CliError> {
        let coords = parse_csv_floats(text, field)?;
        Vector::from_f64(space, &coords)
            .map_err(|e| CliError::Validation(format!("{field}: {e}")))
    };
    let state = CircleState::new(mk(p_arg, "--p")?, mk(x_arg, "--X")?, mk(y_arg, "--Y")?)
        .map_err(|e| CliError::Validation(e.to_string()))?;
    if dt <= 0.0 || t_max <= 0.0 || !dt.is_finite() || !t_max.is_finite() {
        return Err(CliError::Validation(
            "--t-max and --dt must be positive".into(),
        ));
    }
    let steps = (t_max / dt).round().max(1.0) as usize;
    let grid: Vec<f64> = (0..=steps).map(|i| i as f64 * dt).collect();

    let integrated: Option<Vec<CircleSample<f64>>> = match mode {
        CircleMode::ClosedForm => None,
        _ => Some(
            circle_integrate(&state, &grid).map_err(|e| CliError::Validation(e.to_string()))?,
        ),
    };
    let closed: Option<Vec<CircleSample<f64>>> = match mode {
        CircleMode::Integrate => None,
        _ => Some(grid.iter().map(|&t| closed_form_state(&state, t)).collect()),
    };
    let main: &[CircleSample<f64>] = integrated
        .as_deref()
        .or(closed.as_deref())
        .expect("one trajectory exists");
    let deviation: Option<Vec<f64>> = match (mode, &integrated, &closed) {
        (CircleMode::Both, Some(num), Some(cf)) => Some(
            num.iter()
                .zip(cf)
                .map(|(a, b)| (&a.position - &b.position).euclid_norm())
                .collect(),
        ),
        _ => None,
    };

    let text = match format {
        TrajectoryFormat::Json => {
            let mut obj = vec![
                ("schema".to_string(), "1".to_string()),
                ("class".to_string(), format!("\"{}\"", state.class())),
                ("curvature".to_string(), fmt_f64(state.curvature())),
                ("t".to_string(), float_array(&grid)),
                (
                    "position".to_string(),
                    float_matrix(
                        &main.iter().map(|s| s.position.coords().to_vec()).collect::<Vec<_>>(),
                    ),
                ),
                (
                    "velocity".to_string(),
                    float_matrix(
                        &main.iter().map(|s| s.velocity.coords().to_vec()).collect::<Vec<_>>(),
                    ),
                ),
                (
                    "acceleration".to_string(),
                    float_matrix(
                        &main
                            .iter()
                            .map(|s| s.acceleration.coords().to_vec())
                            .collect::<Vec<_>>(),
                    ),
                ),
                (
                    "xx".to_string(),
                    float_array(&main.iter().map(|s| s.velocity.norm_sq()).collect::<Vec<_>>()),
                ),
                (
                    "yy".to_string(),
                    float_array(
                        &main.iter().map(|s| s.acceleration.norm_sq()).collect::<Vec<_>>(),
                    ),
                ),
                (
                    "xy".to_string(),
                    float_array(
                        &main
                            .iter()
                            .map(|s| s.velocity.inner(&s.acceleration))
                            .collect::<Vec<_>>(),
                    ),
                ),
            ];
            if let Some(dev) = &deviation {
                obj.push(("deviation".to_string(), float_array(dev)));
            }
            let body: Vec<String> = obj
                .into_iter()
                .map(|(k, v)| format!("  \"{k}\": {v}"))
                .collect();
            format!("{{\n{}\n}}\n", body.join(",\n"))
        }
        TrajectoryFormat::Csv => {
            let n = space.dim();
            let mut header: Vec<String> = vec!["t".into()];
            header.extend((0..n).map(|i| format!("p{i}")));
            header.extend((0..n).map(|i| format!("x{i}")));
            header.extend((0..n).map(|i| format!("y{i}")));
            header.extend(["xx".to_string(), "yy".to_string(), "xy".to_string()]);
            if deviation.is_some() {
                header.push("deviation".into());
            }
            let mut lines = vec![header.join(",")];
            for (row, s) in main.iter().enumerate() {
                let mut cells = vec![fmt_f64(s.t)];
                cells.extend(s.position.coords().iter().map(|x| fmt_f64(*x)));
                cells.extend(s.velocity.coords().iter().map(|x| fmt_f64(*x)));
                cells.extend(s.acceleration.coords().iter().map(|x| fmt_f64(*x)));
                cells.push(fmt_f64(s.velocity.norm_sq()));
                cells.push(fmt_f64(s.acceleration.norm_sq()));
                cells.push(fmt_f64(s.velocity.inner(&s.acceleration)));
                if let Some(dev) = &deviation {
                    cells.push(fmt_f64(dev[row]));
                }
                lines.push(cells.join(","));
            }
            format!("{}\n", lines.join("\n"))
        }
    };
    emit(output, &text).map_err(|e| CliError::Validation(e.to_string()))?;
    Ok(())
}
