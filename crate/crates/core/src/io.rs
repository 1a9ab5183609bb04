//! JSON file formats for vectors, operators and reports, plus CSV profiles.
//!
//! Emission is deterministic: object keys serialize in sorted order and every
//! float is written with 17 significant digits, so identical inputs produce
//! byte-identical reports.
//!
//! Vector files: `{"space": "shift"|"fourier"|"dense"|"sum", "multiplicity"?,
//! "base"?, "dimension"?, "parts"?, "entries": [{"index": ..., "re": ...,
//! "im": ...}]}` with shift indices `[level, slot]` and fourier/dense indices
//! plain integers.
//!
//! Operator files: `{"kind": "shift"|"doubling"|"matrix"|"weighted_shift"|
//! "diag_unitary"|"direct_sum", ...}` with kind-specific fields.

use std::str::FromStr;

use num_complex::Complex64;
use serde_json::{json, Map, Number, Value};

use crate::dilation::ContractionConditions;
use crate::dyadic::{ChainVerdict, FourierSeries};
use crate::error::Error;
use crate::operator::OperatorSpec;
use crate::solver::{ConditionReport, SolveResult};
use crate::vector::{CoeffVector, Index, Space};
use crate::wold::WoldSplit;

/// A float as a JSON number with 17 significant digits.
pub fn json_f64(x: f64) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    let x = if x == 0.0 { 0.0 } else { x }; // canonicalize -0.0
    let text = format!("{x:.16e}");
    Number::from_str(&text)
        .map(Value::Number)
        .unwrap_or(Value::Null)
}

fn get_u32(obj: &Map<String, Value>, key: &str) -> Result<Option<u32>, Error> {
    match obj.get(key) {
        None | Some(Value::Null) => Ok(None),
        Some(v) => v
            .as_u64()
            .and_then(|n| u32::try_from(n).ok())
            .map(Some)
            .ok_or_else(|| Error::Parse(format!("`{key}` must be a small nonnegative integer"))),
    }
}

fn parse_complex(value: &Value, what: &str) -> Result<Complex64, Error> {
    match value {
        Value::Number(n) => n
            .as_f64()
            .map(|re| Complex64::new(re, 0.0))
            .ok_or_else(|| Error::Parse(format!("{what}: number out of range"))),
        Value::Array(parts) if parts.len() == 2 => {
            let re = parts[0]
                .as_f64()
                .ok_or_else(|| Error::Parse(format!("{what}: real part must be a number")))?;
            let im = parts[1]
                .as_f64()
                .ok_or_else(|| Error::Parse(format!("{what}: imaginary part must be a number")))?;
            Ok(Complex64::new(re, im))
        }
        Value::Object(obj) => {
            let re = obj.get("re").and_then(Value::as_f64).unwrap_or(0.0);
            let im = obj.get("im").and_then(Value::as_f64).unwrap_or(0.0);
            Ok(Complex64::new(re, im))
        }
        _ => Err(Error::Parse(format!(
            "{what}: expected a number, an [re, im] pair or an object"
        ))),
    }
}

fn parse_space(obj: &Map<String, Value>, hint: Option<&Space>) -> Result<Space, Error> {
    let name = obj
        .get("space")
        .and_then(Value::as_str)
        .ok_or_else(|| Error::Parse("vector file needs a `space` string".into()))?;
    match name {
        "shift" => {
            let hinted = match hint {
                Some(Space::Shift { multiplicity }) => Some(*multiplicity),
                _ => None,
            };
            Ok(Space::Shift {
                multiplicity: get_u32(obj, "multiplicity")?.or(hinted).unwrap_or(1),
            })
        }
        "fourier" => {
            let hinted = match hint {
                Some(Space::Fourier { base }) => Some(*base),
                _ => None,
            };
            Space::fourier(get_u32(obj, "base")?.or(hinted).unwrap_or(2))
        }
        "dense" => {
            let hinted = match hint {
                Some(Space::Dense { dim }) => Some(*dim),
                _ => None,
            };
            let dim = get_u32(obj, "dimension")?.or(hinted).ok_or_else(|| {
                Error::Parse("dense vectors need a `dimension`".into())
            })?;
            Ok(Space::Dense { dim })
        }
        "sum" => match obj.get("parts").and_then(Value::as_array) {
            Some(parts) => {
                let hinted: Vec<Option<&Space>> = match hint {
                    Some(Space::Sum(h)) if h.len() == parts.len() => {
                        h.iter().map(Some).collect()
                    }
                    _ => vec![None; parts.len()],
                };
                let parts: Vec<Space> = parts
                    .iter()
                    .zip(hinted)
                    .map(|(p, h)| {
                        p.as_object()
                            .ok_or_else(|| Error::Parse("sum parts must be space objects".into()))
                            .and_then(|o| parse_space(o, h))
                    })
                    .collect::<Result<_, _>>()?;
                Ok(Space::Sum(parts))
            }
            None => match hint {
                Some(space @ Space::Sum(_)) => Ok(space.clone()),
                _ => Err(Error::Parse("sum spaces need a `parts` array".into())),
            },
        },
        other => Err(Error::Parse(format!("unknown space `{other}`"))),
    }
}

fn int_index_for(space: &Space, n: i64, what: &str) -> Result<Index, Error> {
    match space {
        Space::Fourier { base } => Index::fourier_mode(n, *base),
        Space::Dense { .. } => u32::try_from(n)
            .map(Index::dense)
            .map_err(|_| Error::Parse(format!("{what}: coordinate must be nonnegative"))),
        Space::Sum(parts) => {
            let int_parts: Vec<&Space> = parts
                .iter()
                .filter(|p| matches!(p, Space::Fourier { .. } | Space::Dense { .. }))
                .collect();
            match int_parts.as_slice() {
                [unique] => int_index_for(unique, n, what),
                [] => Err(Error::Parse(format!(
                    "{what}: no direct-sum part takes integer indices"
                ))),
                _ => Err(Error::Parse(format!(
                    "{what}: integer index is ambiguous between fourier and dense parts"
                ))),
            }
        }
        Space::Shift { .. } => Err(Error::Parse(format!(
            "{what}: shift indices are written as [level, slot]"
        ))),
    }
}

fn parse_index(space: &Space, value: &Value, what: &str) -> Result<Index, Error> {
    match value {
        Value::Array(pair) if pair.len() == 2 => {
            let level = pair[0]
                .as_u64()
                .ok_or_else(|| Error::Parse(format!("{what}: level must be nonnegative")))?;
            let slot = pair[1]
                .as_u64()
                .and_then(|s| u32::try_from(s).ok())
                .ok_or_else(|| Error::Parse(format!("{what}: slot must be nonnegative")))?;
            Ok(Index::shift(level, slot))
        }
        Value::Number(n) => {
            let mode = n
                .as_i64()
                .ok_or_else(|| Error::Parse(format!("{what}: index out of integer range")))?;
            int_index_for(space, mode, what)
        }
        _ => Err(Error::Parse(format!(
            "{what}: expected [level, slot] or an integer index"
        ))),
    }
}

/// Parses a coefficient vector file. The optional `hint` space fills in
/// parameters the file omits (fourier base, dense dimension, sum parts); the
/// CLI passes the operator's space.
pub fn parse_vector(text: &str, hint: Option<&Space>) -> Result<CoeffVector, Error> {
    let root: Value = serde_json::from_str(text)?;
    let obj = root
        .as_object()
        .ok_or_else(|| Error::Parse("vector file must be a JSON object".into()))?;
    let space = parse_space(obj, hint)?;
    let entries = obj
        .get("entries")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::Parse("vector file needs an `entries` array".into()))?;
    let mut pairs = Vec::with_capacity(entries.len());
    for (k, entry) in entries.iter().enumerate() {
        let what = format!("entry {k}");
        let obj = entry
            .as_object()
            .ok_or_else(|| Error::Parse(format!("{what}: must be an object")))?;
        let index = parse_index(
            &space,
            obj.get("index")
                .ok_or_else(|| Error::Parse(format!("{what}: missing `index`")))?,
            &what,
        )?;
        let re = obj.get("re").and_then(Value::as_f64).unwrap_or(0.0);
        let im = obj.get("im").and_then(Value::as_f64).unwrap_or(0.0);
        pairs.push((index, Complex64::new(re, im)));
    }
    CoeffVector::from_entries(space, pairs)
}

fn space_fields(space: &Space, obj: &mut Map<String, Value>) -> Result<(), Error> {
    match space {
        Space::Shift { multiplicity } => {
            obj.insert("space".into(), json!("shift"));
            obj.insert("multiplicity".into(), json!(multiplicity));
        }
        Space::Fourier { base } => {
            obj.insert("space".into(), json!("fourier"));
            obj.insert("base".into(), json!(base));
        }
        Space::Dense { dim } => {
            obj.insert("space".into(), json!("dense"));
            obj.insert("dimension".into(), json!(dim));
        }
        Space::Sum(parts) => {
            obj.insert("space".into(), json!("sum"));
            let parts: Vec<Value> = parts
                .iter()
                .map(|p| {
                    let mut sub = Map::new();
                    space_fields(p, &mut sub).map(|_| Value::Object(sub))
                })
                .collect::<Result<_, _>>()?;
            obj.insert("parts".into(), Value::Array(parts));
        }
    }
    Ok(())
}

fn index_value(space: &Space, index: &Index) -> Result<Value, Error> {
    match index {
        Index::Shift { level, slot } => Ok(json!([level, slot])),
        Index::Dense { coord } => Ok(json!(coord)),
        Index::Fourier { .. } => {
            let base = match space {
                Space::Fourier { base } => *base,
                Space::Sum(parts) => parts
                    .iter()
                    .find_map(|p| match p {
                        Space::Fourier { base } => Some(*base),
                        _ => None,
                    })
                    .ok_or(Error::ModeOverflow)?,
                _ => return Err(Error::ModeOverflow),
            };
            let mode = index
                .mode_i128(base)
                .and_then(|m| i64::try_from(m).ok())
                .ok_or(Error::ModeOverflow)?;
            Ok(json!(mode))
        }
    }
}

/// The coefficient-file JSON value of a vector.
pub fn vector_to_value(v: &CoeffVector) -> Result<Value, Error> {
    let mut obj = Map::new();
    space_fields(v.space(), &mut obj)?;
    let entries: Vec<Value> = v
        .entries()
        .map(|(index, coeff)| {
            index_value(v.space(), index).map(|iv| {
                let mut e = Map::new();
                e.insert("index".into(), iv);
                e.insert("re".into(), json_f64(coeff.re));
                e.insert("im".into(), json_f64(coeff.im));
                Value::Object(e)
            })
        })
        .collect::<Result<_, _>>()?;
    obj.insert("entries".into(), Value::Array(entries));
    Ok(Value::Object(obj))
}

/// Parses an operator description file.
pub fn parse_operator(text: &str) -> Result<OperatorSpec, Error> {
    let root: Value = serde_json::from_str(text)?;
    operator_from_value(&root)
}

fn operator_from_value(value: &Value) -> Result<OperatorSpec, Error> {
    let obj = value
        .as_object()
        .ok_or_else(|| Error::Parse("operator file must be a JSON object".into()))?;
    let kind = obj
        .get("kind")
        .and_then(Value::as_str)
        .ok_or_else(|| Error::Parse("operator file needs a `kind` string".into()))?;
    match kind {
        "shift" => OperatorSpec::unilateral_shift(get_u32(obj, "multiplicity")?.unwrap_or(1)),
        "doubling" => OperatorSpec::doubling_koopman(get_u32(obj, "base")?.unwrap_or(2)),
        "matrix" => {
            let rows = obj
                .get("matrix")
                .and_then(Value::as_array)
                .ok_or_else(|| Error::Parse("matrix operators need a `matrix` array".into()))?;
            let dim = rows.len();
            let mut data = Vec::with_capacity(dim * dim);
            for (i, row) in rows.iter().enumerate() {
                let row = row
                    .as_array()
                    .ok_or_else(|| Error::Parse(format!("matrix row {i} must be an array")))?;
                if row.len() != dim {
                    return Err(Error::Parse(format!(
                        "matrix row {i} has {} entries, expected {dim}",
                        row.len()
                    )));
                }
                for (j, cell) in row.iter().enumerate() {
                    data.push(parse_complex(cell, &format!("matrix entry ({i},{j})"))?);
                }
            }
            OperatorSpec::matrix_contraction(nalgebra::DMatrix::from_row_slice(dim, dim, &data))
        }
        "weighted_shift" => {
            let weights = obj
                .get("weights")
                .and_then(Value::as_array)
                .ok_or_else(|| Error::Parse("weighted shifts need a `weights` array".into()))?;
            let weights: Vec<Complex64> = weights
                .iter()
                .enumerate()
                .map(|(k, w)| parse_complex(w, &format!("weight {k}")))
                .collect::<Result<_, _>>()?;
            OperatorSpec::weighted_shift(weights)
        }
        "diag_unitary" => {
            let phases = obj
                .get("phases")
                .and_then(Value::as_array)
                .ok_or_else(|| Error::Parse("diagonal unitaries need a `phases` array".into()))?;
            let phases: Vec<Complex64> = phases
                .iter()
                .enumerate()
                .map(|(k, p)| parse_complex(p, &format!("phase {k}")))
                .collect::<Result<_, _>>()?;
            OperatorSpec::diagonal_unitary(phases)
        }
        "direct_sum" => {
            let parts = obj
                .get("parts")
                .and_then(Value::as_array)
                .ok_or_else(|| Error::Parse("direct sums need a `parts` array".into()))?;
            let parts: Vec<OperatorSpec> = parts
                .iter()
                .map(operator_from_value)
                .collect::<Result<_, _>>()?;
            OperatorSpec::direct_sum(parts)
        }
        other => Err(Error::Parse(format!("unknown operator kind `{other}`"))),
    }
}

fn condition_report_value(report: &ConditionReport) -> Value {
    let mut obj = Map::new();
    obj.insert("summability_value".into(), json_f64(report.summab_value));
    obj.insert("summability_exact".into(), json!(report.summab_exact));
    obj.insert(
        "ergodic_limit".into(),
        report.ergodic_limit.map(json_f64).unwrap_or(Value::Null),
    );
    obj.insert("browder_sup".into(), json_f64(report.browder_sup));
    obj.insert(
        "browder_bounded_up_to".into(),
        json!(report.browder_bounded_up_to),
    );
    obj.insert("browder_bounded".into(), json!(report.browder_bounded));
    obj.insert("notes".into(), json!(report.notes));
    Value::Object(obj)
}

/// Report JSON for a solve, embedding the solution in the coefficient file
/// format.
pub fn solve_result_to_value(result: &SolveResult) -> Result<Value, Error> {
    let mut obj = Map::new();
    obj.insert("verdict".into(), json!(result.verdict.as_str()));
    obj.insert("residual".into(), json_f64(result.residual));
    obj.insert(
        "growth_constant".into(),
        result.growth_constant.map(json_f64).unwrap_or(Value::Null),
    );
    obj.insert(
        "condition_report".into(),
        condition_report_value(&result.diagnostics),
    );
    obj.insert(
        "solution".into(),
        match &result.solution {
            Some(y) => vector_to_value(y)?,
            None => Value::Null,
        },
    );
    Ok(Value::Object(obj))
}

/// Report JSON for a chain solve.
pub fn chain_verdict_to_value(verdict: &ChainVerdict) -> Result<Value, Error> {
    let mut obj = Map::new();
    obj.insert("solvable".into(), json!(verdict.solvable));
    obj.insert(
        "g".into(),
        match &verdict.g {
            Some(g) => vector_to_value(&g.to_coeff_vector())?,
            None => Value::Null,
        },
    );
    let obstructions: Vec<Value> = verdict
        .obstructions
        .iter()
        .map(|o| {
            let mut e = Map::new();
            e.insert("seed".into(), json!(o.seed));
            e.insert("sum_re".into(), json_f64(o.chain_sum.re));
            e.insert("sum_im".into(), json_f64(o.chain_sum.im));
            Value::Object(e)
        })
        .collect();
    obj.insert("obstructions".into(), Value::Array(obstructions));
    obj.insert(
        "substitution_residual".into(),
        json_f64(verdict.substitution_residual),
    );
    Ok(Value::Object(obj))
}

/// Summary JSON for a Wold split: per-level norms and the exactness flag.
pub fn wold_split_to_value(
    split: &WoldSplit<CoeffVector>,
    include_components: bool,
) -> Result<Value, Error> {
    let mut obj = Map::new();
    obj.insert("exact".into(), json!(split.exact));
    obj.insert("max_level".into(), json!(split.max_level));
    obj.insert(
        "component_norms".into(),
        Value::Array(
            split
                .components
                .iter()
                .map(|c| json_f64(c.norm()))
                .collect(),
        ),
    );
    obj.insert("residual_norm".into(), json_f64(split.residual.norm()));
    if include_components {
        obj.insert(
            "components".into(),
            Value::Array(
                split
                    .components
                    .iter()
                    .map(vector_to_value)
                    .collect::<Result<_, _>>()?,
            ),
        );
        obj.insert("residual".into(), vector_to_value(&split.residual)?);
    }
    Ok(Value::Object(obj))
}

/// Condition-profile JSON for the contraction-side checks; the verdicts are
/// finite-sample heuristics and labeled as such.
pub fn contraction_conditions_to_value(report: &ContractionConditions) -> Value {
    let pairs = |rows: &[(u64, f64)]| -> Value {
        Value::Array(
            rows.iter()
                .map(|(n, v)| Value::Array(vec![json!(n), json_f64(*v)]))
                .collect(),
        )
    };
    let mut obj = Map::new();
    obj.insert(
        "defect_partial_sums".into(),
        pairs(&report.defect_partial_sums),
    );
    obj.insert("defect_slope".into(), json_f64(report.defect_slope));
    obj.insert("defect_o_n_heuristic".into(), json!(report.defect_o_n));
    obj.insert(
        "kronecker_partial_sums".into(),
        pairs(&report.kronecker_partial_sums),
    );
    obj.insert(
        "kronecker_converged_heuristic".into(),
        json!(report.kronecker_converged),
    );
    obj.insert("sqrt_growth_profile".into(), pairs(&report.sqrt_profile));
    Value::Object(obj)
}

/// Two-column CSV with deterministic float formatting.
pub fn profile_csv(value_label: &str, rows: &[(u64, f64)]) -> String {
    let mut out = String::with_capacity(rows.len() * 32 + 16);
    out.push_str("n,");
    out.push_str(value_label);
    out.push('\n');
    for (n, v) in rows {
        out.push_str(&format!("{n},{v:.16e}\n"));
    }
    out
}

/// Sampled time-domain CSV `(t, re, im)` of a Fourier series.
pub fn samples_csv(f: &FourierSeries, m: usize) -> Result<String, Error> {
    let samples = crate::dyadic::synthesize_samples(f, m)?;
    let mut out = String::from("t,re,im\n");
    for (j, s) in samples.iter().enumerate() {
        out.push_str(&format!(
            "{:.16e},{:.16e},{:.16e}\n",
            j as f64 / m as f64,
            s.re,
            s.im
        ));
    }
    Ok(out)
}
