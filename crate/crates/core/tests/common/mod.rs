#![allow(dead_code)]

use polyosc_core::bases::{ModelParams, Sign};
use rand::Rng;

/// Clebsch-Gordan coefficient from exact factorials; every argument is given doubled.
pub fn cg_factorial(ja2: i64, ma2: i64, jb2: i64, mb2: i64, jc2: i64, mc2: i64) -> f64 {
    fn fact(n: i64) -> f64 {
        (1..=n).map(|i| i as f64).product()
    }
    if ma2 + mb2 != mc2 || ma2.abs() > ja2 || mb2.abs() > jb2 || mc2.abs() > jc2 {
        return 0.0;
    }
    let h = |x: i64| {
        assert!(x % 2 == 0, "odd doubled combination {x}");
        x / 2
    };
    let (t1, t2, t3) = (ja2 + jb2 - jc2, ja2 - jb2 + jc2, -ja2 + jb2 + jc2);
    if t1 < 0 || t2 < 0 || t3 < 0 {
        return 0.0;
    }
    let (t1, t2, t3) = (h(t1), h(t2), h(t3));
    let pre = ((jc2 + 1) as f64 * fact(t1) * fact(t2) * fact(t3) / fact(h(ja2 + jb2 + jc2) + 1)
        * fact(h(ja2 + ma2))
        * fact(h(ja2 - ma2))
        * fact(h(jb2 + mb2))
        * fact(h(jb2 - mb2))
        * fact(h(jc2 + mc2))
        * fact(h(jc2 - mc2)))
    .sqrt();
    let mut sum = 0.0;
    for z in 0..=t1 {
        let d = [z, t1 - z, h(ja2 - ma2) - z, h(jb2 + mb2) - z, h(jc2 - jb2 + ma2) + z, h(jc2 - ja2 - mb2) + z];
        if d.iter().any(|&x| x < 0) {
            continue;
        }
        let sign = if z % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign / d.iter().map(|&x| fact(x)).product::<f64>();
    }
    pre * sum
}

/// `2x` as an integer, or `None` when `x` is not a multiple of one half.
pub fn doubled(x: f64) -> Option<i64> {
    let d = 2.0 * x;
    let r = d.round();
    ((d - r).abs() < 1e-12).then_some(r as i64)
}

/// Random `k` in `(0.2, 2.5)`, with a random branch wherever `k <= 1/2` allows one.
pub fn random_params<R: Rng>(rng: &mut R, dim: usize, omega: f64) -> ModelParams {
    let k: Vec<f64> = (0..dim).map(|_| rng.gen_range(0.2..2.5)).collect();
    let signs = k.iter().map(|&ki| if ki <= 0.5 && rng.gen_bool(0.5) { Sign::Minus } else { Sign::Plus }).collect();
    ModelParams::new(omega, k, signs).unwrap()
}
