//! Complete elliptic integral of the first kind and Jacobi elliptic functions.
//!
//! Both take the *parameter* `m = k^2` (not the modulus `k`), with `0 <= m < 1`.

use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};

const AGM_MAX_ITERS: usize = 40;
const AGM_TOL: f64 = 1e-15;

fn check_parameter(m: f64) -> Result<()> {
    if !(0.0..1.0).contains(&m) {
        return Err(Error::Domain(format!(
            "elliptic parameter must lie in [0, 1), got {m}"
        )));
    }
    Ok(())
}

/// `K(m) = ∫_0^{π/2} (1 - m sin²θ)^{-1/2} dθ = π / (2 AGM(1, √(1-m)))`.
pub fn elliptic_k(m: f64) -> Result<f64> {
    check_parameter(m)?;
    let mut a = 1.0_f64;
    let mut b = (1.0 - m).sqrt();
    for _ in 0..AGM_MAX_ITERS {
        if (a - b).abs() <= AGM_TOL * a {
            break;
        }
        let next = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = next;
    }
    Ok(FRAC_PI_2 / a)
}

/// Jacobi `(sn, cn, dn)(x | m)` by the descending Landen (AGM) recursion.
pub(crate) fn jacobi_sn_cn_dn(x: f64, m: f64) -> Result<(f64, f64, f64)> {
    check_parameter(m)?;
    if !x.is_finite() {
        return Err(Error::Domain(format!("argument must be finite, got {x}")));
    }
    if m == 0.0 {
        return Ok((x.sin(), x.cos(), 1.0));
    }
    let mut a = vec![1.0_f64];
    let mut c = vec![m.sqrt()];
    let mut b = (1.0 - m).sqrt();
    for _ in 0..AGM_MAX_ITERS {
        let an = *a.last().unwrap();
        let cn = *c.last().unwrap();
        if cn.abs() <= AGM_TOL * an {
            break;
        }
        let next_a = 0.5 * (an + b);
        let next_c = 0.5 * (an - b);
        b = (an * b).sqrt();
        a.push(next_a);
        c.push(next_c);
    }
    let n = a.len() - 1;
    let mut phi = (1u64 << n) as f64 * a[n] * x;
    let mut phi_prev = phi;
    for j in (1..=n).rev() {
        phi_prev = phi;
        phi = 0.5 * (phi + (c[j] / a[j] * phi.sin()).asin());
    }
    let sn = phi.sin();
    let cn = phi.cos();
    let dn = if n == 0 {
        1.0
    } else {
        cn / (phi_prev - phi).cos()
    };
    Ok((sn, cn, dn))
}

/// Jacobi `cn(x | m)`.
pub fn jacobi_cn(x: f64, m: f64) -> Result<f64> {
    jacobi_sn_cn_dn(x, m).map(|(_, cn, _)| cn)
}
