//! Browser bindings for the nsbox toolkit. Every entry point takes plain
//! strings and numbers and returns a JSON string, so the demo page needs no
//! framework glue; errors come back as `{"error": "..."}`.

use serde::Serialize;
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use nsbox::box_core::{mix, NsBox};
use nsbox::catalog::{
    cc_box, det_box, mermin_box_mm, nmm_boxes, pr_box, tsirelson_box, white_noise, DetIndex,
    MerminFamily, PrIndex,
};
use nsbox::decompose::{canonical3, membership, Region};
use nsbox::families::{box_at, SweepFamily};
use nsbox::measures::{
    bell_discord, chsh_violation, measure_report, mermin_discord, mermin_functions,
    steering_value,
};
use nsbox::EPS_VAL;

fn err_json(msg: impl std::fmt::Display) -> String {
    json!({ "error": msg.to_string() }).to_string()
}

fn ok_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).unwrap_or_else(err_json)
}

fn full_report(bx: &NsBox) -> Value {
    let measures = measure_report(bx, false);
    let decomp = canonical3(bx).ok().map(|d| {
        json!({
            "mu": d.mu,
            "pr_index": d.pr.map(|k| k.to_string()),
            "nu": d.nu,
            "q2box": d.q2box,
            "residual": d.residual,
            "residual_noise_distance": d.residual.distance(&white_noise()),
        })
    });
    let badges: Value = Region::ALL
        .iter()
        .map(|r| (r.name().to_string(), json!(membership(bx, *r).member)))
        .collect::<serde_json::Map<_, _>>()
        .into();
    json!({
        "box": bx,
        "measures": measures,
        "decomposition": decomp,
        "membership": badges,
    })
}

/// All catalog entries as `{family, index}` pairs, in listing order.
#[wasm_bindgen]
pub fn catalog_names() -> String {
    let mut names: Vec<Value> = Vec::new();
    for k in PrIndex::all() {
        names.push(json!({"family": "pr", "index": k.to_string()}));
    }
    for l in DetIndex::all() {
        names.push(json!({"family": "det", "index": l.to_string()}));
    }
    for k in PrIndex::all() {
        names.push(json!({"family": "mermin-mm", "index": k.to_string()}));
    }
    for e in nmm_boxes() {
        names.push(json!({"family": "mermin-nmm", "index": format!("{}:{}", e.family, e.raw)}));
    }
    for k in PrIndex::all() {
        names.push(json!({"family": "cc", "index": k.to_string()}));
    }
    for k in PrIndex::all() {
        names.push(json!({"family": "tsirelson", "index": k.to_string()}));
    }
    names.push(json!({"family": "white-noise", "index": "-"}));
    ok_json(&names)
}

fn lookup_catalog(family: &str, index: &str) -> Result<NsBox, String> {
    let pr_index = |s: &str| -> Result<PrIndex, String> {
        let b: Vec<u8> = s.bytes().map(|c| c - b'0').collect();
        if b.len() != 3 || b.iter().any(|&x| x > 1) {
            return Err(format!("bad 3-bit index `{s}`"));
        }
        Ok(PrIndex::new(b[0], b[1], b[2]))
    };
    match family {
        "pr" => Ok(pr_box(pr_index(index)?)),
        "det" => {
            let b: Vec<u8> = index.bytes().map(|c| c.wrapping_sub(b'0')).collect();
            if b.len() != 4 || b.iter().any(|&x| x > 1) {
                return Err(format!("bad 4-bit index `{index}`"));
            }
            Ok(det_box(DetIndex::new(b[0], b[1], b[2], b[3])))
        }
        "mermin-mm" => Ok(mermin_box_mm(pr_index(index)?)),
        "mermin-nmm" => {
            let (fam, bits) = index
                .split_once(':')
                .ok_or_else(|| format!("bad index `{index}`, expected FAMILY:bits"))?;
            let fam = match fam {
                "M" => MerminFamily::M,
                "M'" => MerminFamily::MPrime,
                _ => return Err(format!("bad family tag `{fam}`")),
            };
            let b: Vec<u8> = bits.bytes().map(|c| c.wrapping_sub(b'0')).collect();
            if b.len() != 4 || b.iter().any(|&x| x > 1) {
                return Err(format!("bad 4-bit index `{bits}`"));
            }
            Ok(nsbox::catalog::mermin_box_nmm(
                fam,
                DetIndex::new(b[0], b[1], b[2], b[3]),
            ))
        }
        "cc" => Ok(cc_box(pr_index(index)?)),
        "tsirelson" => Ok(tsirelson_box(pr_index(index)?)),
        "white-noise" => Ok(white_noise()),
        other => Err(format!("unknown catalog family `{other}`")),
    }
}

/// A catalog box mixed with white noise at weight `noise`, with its full
/// report: measures, 3-term decomposition, and membership badges.
#[wasm_bindgen]
pub fn catalog_box(family: &str, index: &str, noise: f64) -> String {
    if !(0.0..=1.0).contains(&noise) {
        return err_json("noise must lie in [0, 1]");
    }
    match lookup_catalog(family, index) {
        Ok(bx) => {
            let mixed = mix(&[bx, white_noise()], &[1.0 - noise, noise])
                .expect("noise mixture is valid");
            ok_json(&full_report(&mixed))
        }
        Err(e) => err_json(e),
    }
}

/// Full report for a user-supplied `{"table": ...}` box.
#[wasm_bindgen]
pub fn box_report(box_json: &str) -> String {
    match NsBox::from_json(box_json, EPS_VAL) {
        Ok(bx) => ok_json(&full_report(&bx)),
        Err(e) => err_json(e),
    }
}

/// Curve data for one family/preset pair: grid value plus the five standard
/// quantities at `steps` points, ready for plotting.
#[wasm_bindgen]
pub fn family_curve(family: &str, preset: &str, steps: usize) -> String {
    let family: SweepFamily = match family.parse() {
        Ok(f) => f,
        Err(e) => return err_json(e),
    };
    let preset = if preset.is_empty() { None } else { Some(preset) };
    let steps = steps.clamp(2, 2001);
    let (lo, hi) = family.domain();
    let mut rows = Vec::with_capacity(steps);
    for i in 0..steps {
        let x = lo + (hi - lo) * i as f64 / (steps - 1) as f64;
        let bx = match box_at(family, preset, x) {
            Ok(b) => b,
            Err(e) => return err_json(e),
        };
        let m = mermin_functions(&bx).m;
        rows.push(vec![
            x,
            bell_discord(&bx).value,
            mermin_discord(&bx).value,
            chsh_violation(&bx).max,
            m.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        ]);
    }
    ok_json(&json!({
        "grid": family.grid_name(),
        "columns": ["x", "G", "Q", "chsh", "mermin"],
        "rows": rows,
    }))
}

/// Full report for one family/preset pair at a single grid value.
#[wasm_bindgen]
pub fn family_point(family: &str, preset: &str, x: f64) -> String {
    let family: SweepFamily = match family.parse() {
        Ok(f) => f,
        Err(e) => return err_json(e),
    };
    let preset = if preset.is_empty() { None } else { Some(preset) };
    match box_at(family, preset, x) {
        Ok(bx) => {
            let mut v = full_report(&bx);
            v["steering"] = json!(steering_value(&bx, true));
            ok_json(&v)
        }
        Err(e) => err_json(e),
    }
}
