//! Browser bindings. Each call takes one of the three worked examples on the
//! half disk, builds (or reuses) its envelope on the unit ball and returns
//! JSON for the page to draw.

use std::cell::RefCell;

use semiconcave::extension::{build_support_set, ExtensionField, SupportParams};
use semiconcave::funcspace::FunctionSpec;
use semiconcave::geometry::{BallRegion, DomainSpec};
use semiconcave::gradients::{reachable_gradients, ReachableParams};
use semiconcave::semiconcavity::ModulusParams;
use semiconcave::singularity::{
    check_condition_h, deepest_candidate, propagation_directions, trace_singular_arc, ArcParams,
};
use semiconcave::Error;
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

thread_local! {
    static CACHE: RefCell<Option<(String, f64, ExtensionField)>> = const { RefCell::new(None) };
}

fn unit() -> BallRegion {
    BallRegion { center: vec![0.0, 0.0], radius: 1.0 }
}

fn function(example: &str) -> Result<FunctionSpec, String> {
    match example {
        "example1" => Ok(FunctionSpec::NegNorm),
        "example2" => Ok(FunctionSpec::NegAbsX2),
        "example3" => Ok(FunctionSpec::NegSqrtX1p4X2sq),
        other => Err(format!("unknown example {other:?}; expected example1, example2 or example3")),
    }
}

fn text(e: Error) -> String {
    e.to_string()
}

/// Runs `f` on the envelope of `example` built with support `spacing`.
fn with_envelope<T>(example: &str, spacing: f64, f: impl FnOnce(&ExtensionField) -> Result<T, String>) -> Result<T, String> {
    if !(spacing >= 0.005 && spacing <= 0.1) {
        return Err(format!("support spacing must lie in [0.005, 0.1], got {spacing}"));
    }
    CACHE.with(|cache| {
        let mut cache = cache.borrow_mut();
        let hit = matches!(&*cache, Some((name, s, _)) if name == example && *s == spacing);
        if !hit {
            let u = function(example)?;
            let params = SupportParams::with_spacing(spacing, 1.0);
            let support = build_support_set(&u, &DomainSpec::half_disk(), &unit(), &params).map_err(text)?;
            let e = ExtensionField::new(support, ModulusParams::new(1.0, 0.0).map_err(text)?, None).map_err(text)?;
            *cache = Some((example.to_string(), spacing, e));
        }
        f(&cache.as_ref().unwrap().2)
    })
}

/// Envelope values at the centers of a `cells` x `cells` grid over
/// `[-1, 1]^2`, row by row from the top; cells outside the ball are null.
#[wasm_bindgen]
pub fn envelope_heatmap(example: &str, spacing: f64, cells: usize) -> Result<String, String> {
    if !(8..=400).contains(&cells) {
        return Err(format!("cells must lie in [8, 400], got {cells}"));
    }
    with_envelope(example, spacing, |e| {
        let mut values = Vec::with_capacity(cells * cells);
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        let w = 2.0 / cells as f64;
        for r in 0..cells {
            for c in 0..cells {
                let x = [-1.0 + (c as f64 + 0.5) * w, 1.0 - (r as f64 + 0.5) * w];
                if x[0] * x[0] + x[1] * x[1] > 1.0 {
                    values.push(Value::Null);
                    continue;
                }
                let v = e.extend(&x).map_err(text)?;
                lo = lo.min(v);
                hi = hi.max(v);
                values.push(json!(v));
            }
        }
        Ok(json!({ "cells": cells, "min": lo, "max": hi, "pairs": e.support.len(), "values": values }).to_string())
    })
}

/// Reachable gradients at the origin of `u` and of its envelope, with the
/// hull-gap verdict and the propagation directions it yields.
#[wasm_bindgen]
pub fn gradient_sets(example: &str, spacing: f64) -> Result<String, String> {
    let u = function(example)?;
    let params = ReachableParams::for_radius(1.0);
    let us = reachable_gradients(&u, &DomainSpec::half_disk(), &[0.0, 0.0], &params).map_err(text)?;
    let (holds, candidates) = check_condition_h(&us, 0.01).map_err(text)?;
    let p0 = if holds { deepest_candidate(&us, &candidates) } else { None };
    let directions = match &p0 {
        Some(p) => propagation_directions(&us, p).map_err(text)?,
        None => Vec::new(),
    };
    with_envelope(example, spacing, |e| {
        let es = reachable_gradients(e, &unit().as_domain(), &[0.0, 0.0], &params).map_err(text)?;
        Ok(json!({
            "u": us.representatives,
            "envelope": es.representatives,
            "condition_h": holds,
            "p0": p0,
            "directions": directions,
        })
        .to_string())
    })
}

/// Traces the singular arc from the origin along the unit vector at
/// `theta_deg`. A lost singularity still returns the part traced so far.
#[wasm_bindgen]
pub fn trace_arc(example: &str, spacing: f64, theta_deg: f64) -> Result<String, String> {
    let t = theta_deg.to_radians();
    let theta = [t.cos(), t.sin()];
    with_envelope(example, spacing, |e| {
        let (arc, lost) = match trace_singular_arc(e, &unit(), &[0.0, 0.0], &theta, None, &ArcParams::for_radius(1.0)) {
            Ok(arc) => (arc, None),
            Err(Error::PropagationLost { s, partial }) => (*partial, Some(s)),
            Err(e) => return Err(text(e)),
        };
        let points: Vec<&Vec<f64>> = arc.samples.iter().map(|s| &s.point).collect();
        let indicator: Vec<f64> = arc.samples.iter().map(|s| s.indicator).collect();
        Ok(json!({
            "points": points,
            "indicator": indicator,
            "residuals": arc.residuals(),
            "validated": arc.validated,
            "lost_at": lost,
        })
        .to_string())
    })
}
