//! Reference computations that share no code with the library.

#![allow(dead_code)]

use num_bigint::BigInt;

/// Ai(0) and -Ai'(0) scaled by 10^50.
const AI0: &str = "35502805388781723926006318600418317639797917419918";
const NEG_AIP0: &str = "25881940379280679840518356018920396347909113835493";

/// Ai(1) to 30 decimals from 50 Maclaurin terms summed in integer
/// arithmetic with 50 fractional digits.
pub fn ai_at_one_fixed_point() -> String {
    let scale = BigInt::from(10u8).pow(50);
    let c1 = BigInt::parse_bytes(AI0.as_bytes(), 10).unwrap();
    let c2 = BigInt::parse_bytes(NEG_AIP0.as_bytes(), 10).unwrap();
    // At x = 1: f = Σ t_k with t_k = t_{k-1}/((3k-1)3k), g = Σ u_k with
    // u_k = u_{k-1}/(3k(3k+1)).
    let (mut t, mut u) = (scale.clone(), scale.clone());
    let (mut f, mut g) = (t.clone(), u.clone());
    for k in 1..50u64 {
        t /= BigInt::from((3 * k - 1) * 3 * k);
        u /= BigInt::from(3 * k * (3 * k + 1));
        f += &t;
        g += &u;
    }
    let ai = (c1 * f - c2 * g) / &scale;
    format!("0.{:0>50}", ai.to_string())[..32].to_string()
}

/// (Ai, Ai') by the plain f64 Maclaurin series; accurate for |x| ≲ 4.
pub fn ai_series(x: f64) -> (f64, f64) {
    let c1 = 0.355_028_053_887_817_2;
    let c2 = 0.258_819_403_792_806_8;
    let x3 = x * x * x;
    let (mut tf, mut tg, mut tfp, mut tgp) = (1.0, x, 0.0, 1.0);
    let (mut f, mut g, mut fp, mut gp) = (tf, tg, 0.0, tgp);
    for k in 1..120 {
        let k = k as f64;
        tf *= x3 / ((3.0 * k - 1.0) * (3.0 * k));
        tg *= x3 / ((3.0 * k) * (3.0 * k + 1.0));
        tfp = if k == 1.0 {
            x * x / 2.0
        } else {
            tfp * x3 / ((3.0 * k - 3.0) * (3.0 * k - 1.0))
        };
        tgp *= x3 / ((3.0 * k) * (3.0 * k - 2.0));
        f += tf;
        g += tg;
        fp += tfp;
        gp += tgp;
    }
    (c1 * f - c2 * g, c1 * fp - c2 * gp)
}

/// Root of `h` in [lo, hi] (sign change required): bisection to 1e-10,
/// then Newton with `dh`.
pub fn bisect_newton(h: impl Fn(f64) -> f64, dh: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let mut hlo = h(lo);
    assert!(hlo * h(hi) < 0.0, "no sign change in [{lo}, {hi}]");
    while hi - lo > 1e-10 {
        let mid = 0.5 * (lo + hi);
        let hm = h(mid);
        if hm * hlo <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
            hlo = hm;
        }
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..5 {
        x -= h(x) / dh(x);
    }
    x
}

/// -a'_1 and -a_1 from the series oracle.
pub fn oracle_lambdas() -> (f64, f64) {
    let a1p = bisect_newton(|x| ai_series(x).1, |x| x * ai_series(x).0, -1.5, -0.5);
    let a1 = bisect_newton(|x| ai_series(x).0, |x| ai_series(x).1, -3.0, -2.0);
    (-a1p, -a1)
}

/// Trapezoid rule on uniform samples.
pub fn trapezoid(values: &[f64], dx: f64) -> f64 {
    let n = values.len();
    dx * (values.iter().sum::<f64>() - 0.5 * (values[0] + values[n - 1]))
}

/// One result line of the acceptance run, written to the raw stdout handle
/// so it is not swallowed by the harness's capture.
pub fn report(criterion: u32, pass: bool, detail: &str) {
    use std::io::Write;
    let line = format!(
        "{} criterion {criterion}: {detail}\n",
        if pass { "PASS" } else { "FAIL" }
    );
    let _ = std::io::stdout().lock().write_all(line.as_bytes());
}
