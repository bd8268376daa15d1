//! Browser bindings: three small explorers that return JSON strings.
//!
//! The `*_json` functions hold the logic and run natively as well, so they
//! are tested without a browser; the exported wrappers only convert errors.

use serde_json::{json, Value};
use sumrank_core::bounds::table1_markdown;
use sumrank_core::matrix::companion_property_check;
use sumrank_core::ortho::{companion_for, g1_pipeline, g2_pipeline};
use sumrank_core::report::table1_report;
use sumrank_core::sumrank::{
    construction1_code, construction1_distance, construction2_code, coset_analysis, Family, SumRankCode,
};
use sumrank_core::{Error, FieldSpec};
use wasm_bindgen::prelude::*;

/// Keeps every call interactive in a single browser thread.
pub const WEB_BUDGET: u64 = 1_000_000;

fn small(q: u32, n: usize) -> Result<(), Error> {
    if (q as u64).pow(n as u32) > 3125 {
        return Err(Error::PreconditionViolation(format!("q^n = {q}^{n} is too large for the demo")));
    }
    Ok(())
}

/// Companion matrix of the `index`-th primitive polynomial and the group it
/// generates (`g1`), or the product group with the next polynomial (`g2`).
pub fn explore_group_json(q: u32, n: usize, kind: &str, index: usize) -> Result<String, Error> {
    small(q, n)?;
    let field = FieldSpec::galois(q)?;
    let (f, a) = companion_for(&field, n, index)?;
    let props = companion_property_check(&a, &f)?;
    let group = match kind {
        "g1" => g1_pipeline(&field, n, 0, index)?,
        "g2" => g2_pipeline(&field, n, 0, index, index + 1, false)?,
        other => return Err(Error::Parse(format!("unknown group kind {other:?}"))),
    };
    let v = json!({
        "field": field.to_string(),
        "polynomial": f.to_string(),
        "companion": a.to_string(),
        "properties": props,
        "group": {
            "kind": group.kind,
            "order": group.order,
            "generator_orders": group.generator_orders,
            "form": group.form.matrix.to_string(),
            "all_orthogonal": group.all_orthogonal()?,
            "non_cyclic_witness": group.non_cyclic_witness()?,
            "element_order_histogram": group.element_order_histogram()?,
        },
    });
    Ok(serde_json::to_string_pretty(&v).expect("serializable"))
}

fn family_code(family: Family, field: &FieldSpec, n: usize, t: usize) -> Result<(SumRankCode, usize, &'static str), Error> {
    match family {
        Family::C1Bar | Family::C2Bar => {
            let w = if family == Family::C1Bar { 4 } else { 8 };
            let (c_mrd, code) = construction1_code(field, w, &vec![2; t - 1], WEB_BUDGET)?;
            let v = construction1_distance(&c_mrd, &code, WEB_BUDGET, 2000, 0)?;
            let mode = match v.mode {
                sumrank_core::sumrank::ScanMode::Exhaustive => "exhaustive",
                _ => "structural argument plus sampling",
            };
            Ok((code, v.d, mode))
        }
        Family::C3Bar | Family::C4Bar => {
            let code = construction2_code(field, n, t, family == Family::C4Bar)?;
            let d = code.min_distance(WEB_BUDGET)?;
            Ok((code, d, "exhaustive"))
        }
    }
}

/// Shape, size, distance and (when the ambient space is small) covering
/// radius and list sizes of one of the four sum-rank families.
pub fn code_parameters_json(family: &str, q: u32, n: usize, t: usize) -> Result<String, Error> {
    small(q, n)?;
    if !(1..=4).contains(&t) {
        return Err(Error::InvalidDimension(format!("t = {t}; the demo allows 1..=4")));
    }
    let family = Family::parse(family)?;
    let field = FieldSpec::galois(q)?;
    let (code, d, mode) = family_code(family, &field, n, t)?;
    let mut v = json!({
        "family": family.name(),
        "shape": code.shape().describe(),
        "dim_q": code.dim(),
        "k": code.k(),
        "cardinality": code.cardinality().to_string(),
        "d": d,
        "distance_method": mode,
        "msrd": code.is_msrd_at(d)?,
        "singleton_bound": code.singleton_bound(d)?.to_string(),
    });
    v["cosets"] = match coset_analysis(&code, WEB_BUDGET) {
        Ok(ca) => json!({
            "covering_radius": ca.covering_radius,
            "max_list_by_radius": ca.max_ball,
        }),
        Err(Error::EnumerationBudgetExceeded { needed, .. }) => {
            json!({ "skipped": format!("ambient space has {needed} words") })
        }
        Err(e) => return Err(e),
    };
    Ok(serde_json::to_string_pretty(&v).expect("serializable"))
}

/// The list-size comparison table as rows plus a markdown rendering.
pub fn list_size_table_json(q: u32, n: usize, t: usize) -> Result<String, Error> {
    small(q, n)?;
    if !(2..=6).contains(&t) {
        return Err(Error::InvalidDimension(format!("t = {t}; the table needs 2..=6")));
    }
    let rows = table1_report(q, n, t, WEB_BUDGET)?;
    let v: Value = json!({ "rows": rows, "markdown": table1_markdown(&rows) });
    Ok(serde_json::to_string_pretty(&v).expect("serializable"))
}

fn js(r: Result<String, Error>) -> Result<String, JsError> {
    r.map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen]
pub fn explore_group(q: u32, n: usize, kind: &str, index: usize) -> Result<String, JsError> {
    js(explore_group_json(q, n, kind, index))
}

#[wasm_bindgen]
pub fn code_parameters(family: &str, q: u32, n: usize, t: usize) -> Result<String, JsError> {
    js(code_parameters_json(family, q, n, t))
}

#[wasm_bindgen]
pub fn list_size_table(q: u32, n: usize, t: usize) -> Result<String, JsError> {
    js(list_size_table_json(q, n, t))
}
