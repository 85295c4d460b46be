// Copyright 2026 cvent Contributors
// SPDX-License-Identifier: Apache-2.0

//! Matrix exponential by scaling and squaring with the [13/13] Padé
//! approximant.
//!
//! The degree is fixed at 13; only the number of squarings depends on the
//! 1-norm of the input. Results are bit-reproducible for a given input.

use crate::cv::Mat4;
use crate::error::{CoreError, Result};

const PADE13: [f64; 14] = [
    64_764_752_532_480_000.0,
    32_382_376_266_240_000.0,
    7_771_770_303_897_600.0,
    1_187_353_796_428_800.0,
    129_060_195_264_000.0,
    10_559_470_521_600.0,
    670_442_572_800.0,
    33_522_128_640.0,
    1_323_241_920.0,
    40_840_800.0,
    960_960.0,
    16_380.0,
    182.0,
    1.0,
];

/// Largest 1-norm for which [13/13] Padé meets double precision unscaled.
const THETA_13: f64 = 5.371_920_351_148_152;

/// Squarings above this mean the input is far outside the physical range.
const MAX_SQUARINGS: i32 = 64;

fn norm1(a: &Mat4) -> f64 {
    a.column_iter()
        .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn expm(a: &Mat4) -> Result<Mat4> {
    if !a.iter().all(|v| v.is_finite()) {
        return Err(CoreError::Numeric("matrix exponential of non-finite input".into()));
    }
    let norm = norm1(a);
    let squarings = if norm > THETA_13 {
        (norm / THETA_13).log2().ceil() as i32
    } else {
        0
    };
    if squarings > MAX_SQUARINGS {
        return Err(CoreError::Numeric(format!(
            "matrix exponential input norm {norm:e} needs {squarings} squarings"
        )));
    }
    let a = a * 2f64.powi(-squarings);

    let b = &PADE13;
    let ident = Mat4::identity();
    let a2 = a * a;
    let a4 = a2 * a2;
    let a6 = a4 * a2;
    let u_inner = a6 * (a6 * b[13] + a4 * b[11] + a2 * b[9]) + a6 * b[7] + a4 * b[5] + a2 * b[3] + ident * b[1];
    let u = a * u_inner;
    let v = a6 * (a6 * b[12] + a4 * b[10] + a2 * b[8]) + a6 * b[6] + a4 * b[4] + a2 * b[2] + ident * b[0];

    let p = v + u;
    let q = v - u;
    let mut r = q
        .lu()
        .solve(&p)
        .ok_or_else(|| CoreError::Numeric("singular denominator in Padé approximant".into()))?;
    for _ in 0..squarings {
        r = r * r;
    }
    if !r.iter().all(|v| v.is_finite()) {
        return Err(CoreError::Numeric("matrix exponential overflowed".into()));
    }
    Ok(r)
}
