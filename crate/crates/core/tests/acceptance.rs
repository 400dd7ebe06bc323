//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on failure.

use std::f64::consts::PI;
use std::time::Instant;

use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use toric_ell::fan::{ale_tangent_weights, refinement_morphism};
use toric_ell::genus::{self, generic_samples};
use toric_ell::pwpoly::{projection_check, pushforward};
use toric_ell::rational::{frac, int};
use toric_ell::{
    ale_fan, orbifold, theta, Complex64 as C64, Divisor, EvalContext, Fan, FanMorphism,
    PiecewisePoly, Rational, SL2Matrix, ToricPair, TorusSample,
};

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn ints(v: &[i64]) -> Vec<Rational> {
    v.iter().map(|&x| int(x)).collect()
}

/// Jacobi triple-product sum, independent of the product formula.
fn theta_sum(t: C64, tau: C64) -> C64 {
    let mut acc = c(0.0, 0.0);
    for n in -40i32..=40 {
        let m = n as f64 + 0.5;
        let term = (C64::i() * PI * (tau * m * m + t * (2.0 * n as f64 + 1.0))).exp();
        acc += if n % 2 == 0 { term } else { -term };
    }
    -C64::i() * acc
}

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn samples(
    count: usize,
    dim: usize,
    seed: u64,
    accept: impl Fn(&TorusSample) -> bool,
) -> Vec<TorusSample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    generic_samples(&mut rng, count, dim, accept).expect("generic samples")
}

fn theta_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for tau in [c(0.0, 1.0), c(0.1, 0.8)] {
        let ctx = EvalContext::new(tau, c(0.2, 0.0)).unwrap();
        for _ in 0..100 {
            let t = c(rng.gen_range(-1.0..1.0), rng.gen_range(-0.5..0.5));
            let got = theta::theta(t, &ctx).unwrap();
            let want = theta_sum(t, tau);
            worst = worst.max((got - want).norm() / want.norm().max(1.0));
        }
    }
    let ms = start.elapsed().as_secs_f64() * 1e3;
    outcome(
        worst < 1e-10 && ms < 1000.0,
        format!("max deviation {worst:.2e}, {ms:.1} ms"),
    )
}

fn modularity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut mats = vec![SL2Matrix::S, SL2Matrix::T];
    mats.extend((0..5).map(|_| SL2Matrix::random(&mut rng, 5)));
    let ctx = EvalContext::new(c(0.1, 0.9), c(0.2, 0.0)).unwrap();
    let t = c(0.23, 0.07);
    let worst = mats
        .iter()
        .map(|g| theta::modular_residual(g, t, &ctx).unwrap())
        .fold(0.0, f64::max);
    outcome(
        worst < 1e-8,
        format!("{} matrices, max residual {worst:.2e}", mats.len()),
    )
}

fn rigidity() -> Outcome {
    let start = Instant::now();
    let p1 = Fan::projective(1);
    let pairs = [
        ToricPair::new(Fan::projective(2), ints(&[0, 0, 3])).unwrap(),
        ToricPair::new(p1.product(&p1), ints(&[2, 0, 2, 0])).unwrap(),
        ToricPair::new(p1.clone(), ints(&[2, 0])).unwrap(),
    ];
    let ctxs = [
        EvalContext::new(c(0.0, 1.0), c(0.21, 0.03)).unwrap(),
        EvalContext::new(c(0.1, 0.8), c(0.13, -0.05)).unwrap(),
        EvalContext::new(c(-0.3, 1.2), c(0.37, 0.01)).unwrap(),
    ];
    let mut worst = 0.0f64;
    let mut all_cy = true;
    for (i, pair) in pairs.iter().enumerate() {
        all_cy &= genus::cy_check(pair);
        let ss = samples(10, pair.fan.dim, 30 + i as u64, |s| {
            ctxs.iter().all(|e| pair.is_generic(s, e))
        });
        for e in &ctxs {
            for s in &ss {
                worst = worst.max(genus::rigidity_residual(pair, s, e).unwrap());
            }
        }
    }
    let ms = start.elapsed().as_secs_f64() * 1e3;
    outcome(
        all_cy && worst < 1e-8 && ms < 1000.0,
        format!("max relative sum {worst:.2e}, {ms:.1} ms"),
    )
}

/// Coefficients on a star subdivision pulled back from the coarse pair: the
/// new ray carries `1 + sum (delta_i - 1)` over the subdivided cone.
fn pulled_back(coarse: &ToricPair, cone: &[usize]) -> ToricPair {
    let fine = coarse.fan.star_subdivide(cone).unwrap();
    let mut delta = coarse.delta.clone();
    let shifted: Rational = cone
        .iter()
        .map(|&r| &coarse.delta[r] - Rational::one())
        .sum();
    delta.push(shifted + Rational::one());
    ToricPair::new(fine, delta).unwrap()
}

fn change_of_variables() -> Outcome {
    let ctx = EvalContext::new(c(0.0, 1.0), c(0.21, 0.03)).unwrap();
    let c2 = ToricPair::new(Fan::affine(2), ints(&[0, -1])).unwrap();
    let p2 = ToricPair::new(Fan::projective(2), ints(&[0, 0, 0])).unwrap();
    let c2_fine = pulled_back(&c2, &[0, 1]);
    let p2_fine = pulled_back(&p2, &[0, 1]);
    let p2_twice = pulled_back(&p2_fine, &[0, p2_fine.fan.num_rays() - 1]);
    let cases = [
        ("C2", &c2_fine, &c2),
        ("P2", &p2_fine, &p2),
        ("P2 twice vs once", &p2_twice, &p2_fine),
        ("P2 twice vs P2", &p2_twice, &p2),
    ];
    let mut parts = Vec::new();
    let mut pass = true;
    for (i, (name, fine, coarse)) in cases.iter().enumerate() {
        let m = refinement_morphism(&fine.fan, &coarse.fan).unwrap();
        let ss = samples(10, 2, 40 + i as u64, |s| {
            fine.is_generic(s, &ctx) && coarse.is_generic(s, &ctx)
        });
        let r = genus::blowup_identity_residual(fine, coarse, &m, &ss, &ctx).unwrap();
        pass &= r < 1e-8;
        parts.push(format!("{name} {r:.2e}"));
    }
    outcome(pass, parts.join(", "))
}

fn eval_form(form: &[i64], point: &[Rational]) -> Rational {
    form.iter().zip(point).map(|(&a, x)| int(a) * x).sum()
}

/// Localization formula for a refinement, evaluated pointwise: target cone
/// `C` receives `sum f_i * prod x^C / prod x^{C_i}` over source cones inside `C`.
fn pushforward_oracle(
    fine: &Fan,
    coarse: &Fan,
    f: &PiecewisePoly,
    k: usize,
    point: &[Rational],
) -> Rational {
    let target = coarse.dual_frame(k).unwrap();
    let top: Rational = target.forms.iter().map(|w| eval_form(w, point)).product();
    let inside = |ray: &[i64]| {
        target
            .forms
            .iter()
            .all(|w| w.iter().zip(ray).map(|(a, b)| a * b).sum::<i64>() >= 0)
    };
    (0..fine.num_max_cones())
        .filter(|&i| fine.max_cones[i].iter().all(|&r| inside(&fine.rays[r])))
        .map(|i| {
            let frame = fine.dual_frame(i).unwrap();
            let den: Rational = frame.forms.iter().map(|w| eval_form(w, point)).product();
            f.piece(i).eval(point) * &top / den
        })
        .sum()
}

fn pushforward_exactness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let c2 = Fan::affine(2);
    let p2 = Fan::projective(2);
    let mut pass = true;
    for coarse in [&c2, &p2] {
        let fine = coarse.star_subdivide(&[0, 1]).unwrap();
        let m = refinement_morphism(&fine, coarse).unwrap();
        pass &= pushforward(&m, &PiecewisePoly::one(&fine)).unwrap() == PiecewisePoly::one(coarse);
        let exc = PiecewisePoly::thom_basis_element(&fine, &[fine.num_rays() - 1]).unwrap();
        pass &= pushforward(&m, &exc).unwrap() == PiecewisePoly::zero(coarse);
    }
    let fine = p2.star_subdivide(&[0, 1]).unwrap();
    let m: FanMorphism = refinement_morphism(&fine, &p2).unwrap();
    let points: Vec<Vec<Rational>> =
        vec![vec![frac(3, 7), frac(-5, 11)], vec![int(2), frac(13, 5)]];
    let mut projection_ok = 0;
    let mut oracle_ok = true;
    for _ in 0..20 {
        let f = PiecewisePoly::random(&fine, 3, &mut rng).unwrap();
        let g = PiecewisePoly::random(&p2, 3, &mut rng).unwrap();
        if projection_check(&m, &f, &g).unwrap() {
            projection_ok += 1;
        }
        let pushed = pushforward(&m, &f).unwrap();
        for k in 0..p2.num_max_cones() {
            for pt in &points {
                oracle_ok &= pushed.piece(k).eval(pt) == pushforward_oracle(&fine, &p2, &f, k, pt);
            }
        }
    }
    pass &= projection_ok == 20 && oracle_ok;
    outcome(
        pass,
        format!(
            "projection formula {projection_ok}/20, pointwise oracle {}",
            if oracle_ok { "exact" } else { "mismatch" }
        ),
    )
}

fn mckay() -> Outcome {
    let start = Instant::now();
    let ctxs = [
        EvalContext::new(c(0.0, 1.0), c(0.2, 0.0)).unwrap(),
        EvalContext::new(c(0.1, 0.8), c(0.21, 0.03)).unwrap(),
    ];
    let mut worst = 0.0f64;
    for n in 1..=6 {
        let ss = samples(10, 2, 60 + n as u64, |s| {
            ctxs.iter().all(|e| orbifold::orbifold_generic(n, s, e))
        });
        for e in &ctxs {
            worst = worst.max(orbifold::mckay_residual(n, &ss, e).unwrap());
        }
    }
    let ms = start.elapsed().as_secs_f64() * 1e3;
    outcome(
        worst < 1e-7 && ms < 10_000.0,
        format!("n = 1..6, max residual {worst:.2e}, {ms:.1} ms"),
    )
}

fn euler_corollary() -> Outcome {
    let ctx = EvalContext::new(c(0.0, 1.0), c(0.2, 0.0)).unwrap();
    let mut counts_ok = true;
    let mut worst = 0.0f64;
    for n in 1..=6 {
        counts_ok &= orbifold::orbifold_euler(n).unwrap() == n as u64;
        counts_ok &= ale_fan(n).unwrap().0.num_max_cones() == n;
        let s = samples(1, 2, 70 + n as u64, |s| {
            orbifold::orbifold_generic(n, s, &ctx)
        })
        .remove(0);
        worst = worst.max(orbifold::euler_degeneration(n, &s, &ctx).unwrap());
    }
    outcome(
        counts_ok && worst < 1e-3,
        format!(
            "counts {}, degeneration {worst:.2e}",
            if counts_ok { "exact" } else { "wrong" }
        ),
    )
}

fn orbifold_blowup() -> Outcome {
    let ctx = EvalContext::new(c(0.0, 1.0), c(0.21, 0.03)).unwrap();
    let mut parts = Vec::new();
    let mut pass = true;
    for n in 1..=3 {
        let ss = samples(10, 2, 80 + n as u64, |s| {
            orbifold::orbifold_generic(n, s, &ctx)
        });
        let r = orbifold::orbifold_blowup_residual(n, &ss, &ctx).unwrap();
        pass &= r < 1e-7;
        parts.push(format!("n={n} {r:.2e}"));
    }
    outcome(pass, parts.join(", "))
}

fn stringy() -> Outcome {
    let p2 = Fan::projective(2);
    let ctx = EvalContext::new(c(0.0, 1.0), c(0.21, 0.03)).unwrap();
    let mut pass = true;
    let mut parts = Vec::new();
    for (a, want) in [(1, int(2)), (2, frac(5, 3))] {
        let d = Divisor::new(vec![0], vec![int(a)]).unwrap();
        let e = genus::stringy_euler(&p2, &d).unwrap();
        let one_plus = Rational::one() + int(2) / (int(a) + Rational::one());
        pass &= e == want && e == one_plus;
        let s = samples(1, 2, 90 + a as u64, |s| {
            genus::chi_y_generic(&p2, s)
                && ToricPair::new(p2.clone(), ints(&[-a, 0, 0]))
                    .unwrap()
                    .is_generic(s, &ctx)
        })
        .remove(0);
        let lim = genus::stringy_limit_residual(&p2, &d, &s, &ctx).unwrap();
        pass &= lim.residual < 1e-3 && lim.theta_residual < 1e-3;
        parts.push(format!(
            "a={a}: e_str {} limits {:.1e}/{:.1e}",
            toric_ell::rational::format(&e),
            lim.residual,
            lim.theta_residual
        ));
    }
    let ys = [c(0.3, 0.2), c(2.0, 0.0), c(-1.5, 0.7)];
    let mut worst = 0.0f64;
    for s in samples(5, 2, 99, |s| genus::chi_y_generic(&p2, s)) {
        for &y in &ys {
            let got = genus::chi_y_genus(&p2, &s, y).unwrap();
            worst = worst.max((got - (1.0 + y + y * y)).norm());
        }
    }
    let empty = genus::stringy_euler(&p2, &Divisor::empty()).unwrap();
    pass &= worst < 1e-9 && empty == int(3);
    parts.push(format!("chi_y {worst:.1e}"));
    outcome(pass, parts.join(", "))
}

fn fan_integrity() -> Outcome {
    let p1 = Fan::projective(1);
    let mut fans = vec![
        Fan::affine(2),
        p1.clone(),
        Fan::projective(2),
        Fan::projective(3),
        p1.product(&p1),
    ];
    for n in 1..=6 {
        fans.push(ale_fan(n).unwrap().0);
    }
    let base = fans.clone();
    for fan in &base {
        let mut faces: Vec<Vec<usize>> = Vec::new();
        for cone in &fan.max_cones {
            for mask in 1u32..(1 << cone.len()) {
                let face: Vec<usize> = (0..cone.len())
                    .filter(|&b| mask >> b & 1 == 1)
                    .map(|b| cone[b])
                    .collect();
                let mut key = face.clone();
                key.sort_unstable();
                if face.len() >= 2 && !faces.contains(&key) {
                    faces.push(key);
                }
            }
        }
        for face in faces {
            let fine = fan.star_subdivide(&face).unwrap();
            if let Some(cone) = fine
                .max_cones
                .iter()
                .find(|c| c.contains(&(fine.num_rays() - 1)))
            {
                let again: Vec<usize> = cone.iter().copied().take(2).collect();
                fans.push(fine.star_subdivide(&again).unwrap());
            }
            fans.push(fine);
        }
    }
    let bad = fans.iter().filter(|f| !f.validate().is_empty()).count();
    let mut crepant = true;
    for n in 1..=6 {
        for [x1, x2] in ale_tangent_weights(n).unwrap() {
            crepant &= x1[0] + x2[0] == 1 && x1[1] + x2[1] == 1;
        }
    }
    outcome(
        bad == 0 && crepant,
        format!(
            "{} fans, {bad} invalid, crepancy {}",
            fans.len(),
            if crepant { "exact" } else { "broken" }
        ),
    )
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("theta oracle", theta_oracle),
        ("modularity", modularity),
        ("rigidity", rigidity),
        ("change of variables", change_of_variables),
        ("pushforward exactness", pushforward_exactness),
        ("mckay", mckay),
        ("euler corollary", euler_corollary),
        ("orbifold blow-up", orbifold_blowup),
        ("stringy specialization", stringy),
        ("fan integrity", fan_integrity),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        println!(
            "criterion {:>2} {:<24} {}  {}",
            i + 1,
            name,
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
        failed += usize::from(!o.pass);
    }
    println!(
        "{}/{} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
