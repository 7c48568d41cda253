//! wasm-bindgen exports for the static page in `www/`.
//!
//! Every function returns a JSON string; errors come back as the message.

use serde_json::json;
use wasm_bindgen::prelude::*;

use cmreduce::numbase::fmt_rat;
use cmreduce::quadforms::{ClassGroup, Discriminant};
use cmreduce::reduction::joint_reduce;
use cmreduce::ssenum::enumerate_ss;

/// Keeps the page responsive: quaternion class sets grow like p/12.
pub const MAX_PRIME: i64 = 400;
pub const MAX_ABS_D: i64 = 20_000;

fn disc(d: i64) -> Result<Discriminant, String> {
    if d.abs() > MAX_ABS_D {
        return Err(format!("|D| is limited to {MAX_ABS_D} here"));
    }
    Discriminant::new(d).map_err(|e| e.to_string())
}

fn prime(p: i64) -> Result<i64, String> {
    if p > MAX_PRIME {
        return Err(format!("p is limited to {MAX_PRIME} here"));
    }
    Ok(p)
}

/// Reduced forms of discriminant `d`.
#[wasm_bindgen(js_name = classGroup)]
pub fn class_group(d: i32) -> Result<String, String> {
    Ok(ClassGroup::new(disc(d.into())?).to_json().to_string())
}

/// Supersingular j-invariants mod `p` with their weights and mass.
#[wasm_bindgen]
pub fn supersingular(p: i32) -> Result<String, String> {
    let ss = enumerate_ss(prime(p.into())?).map_err(|e| e.to_string())?;
    Ok(json!({
        "p": p,
        "mass": fmt_rat(&ss.mass),
        "points": ss.points.iter().map(|pt| json!({"j": pt.j.to_string(), "weight": pt.weight})).collect::<Vec<_>>(),
    })
    .to_string())
}

/// Joint reduction of Pic(O_D) at the comma-separated inert primes.
#[wasm_bindgen(js_name = jointReduction)]
pub fn joint_reduction(d: i32, primes: &str) -> Result<String, String> {
    let primes = primes
        .split(',')
        .map(|s| s.trim().parse::<i64>().map_err(|e| format!("bad prime {s:?}: {e}")).and_then(prime))
        .collect::<Result<Vec<_>, _>>()?;
    let j = joint_reduce(disc(d.into())?, &primes).map_err(|e| e.to_string())?;
    let mut v = j.to_json();
    v["surjective"] = json!(j.is_surjective());
    Ok(v.to_string())
}
