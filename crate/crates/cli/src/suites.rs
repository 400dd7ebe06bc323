//! One function per subcommand, each producing a report.

use std::f64::consts::PI;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use toric_ell::fan::refinement_morphism;
use toric_ell::genus::{self, generic_samples};
use toric_ell::pwpoly::{projection_check, pushforward};
use toric_ell::scenario::{load_fan, DivisorFile, Scenario};
use toric_ell::{
    orbifold, rational, theta, Complex64 as C64, EvalContext, Fan, PiecewisePoly, SL2Matrix,
    ToricPair, TorusSample,
};

use crate::config::{Config, Overrides};
use crate::report::{Report, ReportBuilder};
use crate::CliError;

pub const ORACLE_TOL: f64 = 1e-10;
pub const MODULAR_TOL: f64 = 1e-8;
pub const LIMIT_TOL: f64 = 1e-3;
pub const CHI_Y_TOL: f64 = 1e-9;
pub const ORACLE_POINTS: usize = 100;
pub const RANDOM_MATRICES: usize = 5;

fn rng(cfg: &Config) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(cfg.seed)
}

fn samples(
    cfg: &Config,
    dim: usize,
    accept: impl Fn(&TorusSample) -> bool,
) -> Result<Vec<TorusSample>, CliError> {
    Ok(generic_samples(&mut rng(cfg), cfg.samples, dim, accept)?)
}

fn path_str(p: &Path) -> Value {
    json!(p.display().to_string())
}

fn with(mut params: Value, extra: Value) -> Value {
    if let (Some(p), Value::Object(e)) = (params.as_object_mut(), extra) {
        p.extend(e);
    }
    params
}

/// Triple-product sum for theta; the oracle for the product formula.
pub fn theta_series(t: C64, tau: C64) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    let mut n = 0i64;
    loop {
        let mut block = C64::new(0.0, 0.0);
        for k in [n, -n - 1] {
            let m = k as f64 + 0.5;
            let term = (C64::i() * PI * (tau * m * m + t * (2 * k + 1) as f64)).exp();
            block += if k.rem_euclid(2) == 0 { term } else { -term };
        }
        acc += block;
        n += 1;
        if block.norm() < 1e-18 * acc.norm().max(1.0) && n > 2 {
            break;
        }
    }
    -C64::i() * acc
}

pub fn theta_check(cfg: &Config, timings: bool) -> Result<Report, CliError> {
    let ctx = cfg.context()?;
    let mut r = ReportBuilder::new("theta-check", cfg.echo(), timings);
    for (label, tau) in [("i", C64::new(0.0, 1.0)), ("0.1+0.8i", C64::new(0.1, 0.8))] {
        let local = ctx.with_tau(tau)?;
        r.check(
            &format!("oracle/tau={label}"),
            ORACLE_TOL,
            || -> Result<f64, CliError> {
                let mut g = rng(cfg);
                let mut worst = 0.0f64;
                for _ in 0..ORACLE_POINTS {
                    let t = C64::new(g.gen_range(-1.0..1.0), g.gen_range(-0.5..0.5));
                    let want = theta_series(t, tau);
                    worst =
                        worst.max((theta::theta(t, &local)? - want).norm() / want.norm().max(1.0));
                }
                Ok(worst)
            },
        )?;
    }
    let mut g = rng(cfg);
    let mut mats = vec![
        ("S".to_string(), SL2Matrix::S),
        ("T".to_string(), SL2Matrix::T),
    ];
    for k in 0..RANDOM_MATRICES {
        let m = SL2Matrix::random(&mut g, 5);
        mats.push((format!("random-{k}[{},{},{},{}]", m.a, m.b, m.c, m.d), m));
    }
    for (name, m) in &mats {
        r.check(&format!("modular/{name}"), MODULAR_TOL, || {
            theta::modular_residual(m, cfg.z, &ctx)
        })?;
    }
    Ok(r.finish())
}

fn load_scenario(path: &Path, cfg: &mut Config) -> Result<ToricPair, CliError> {
    let scenario = Scenario::load(path)?;
    cfg.apply_scenario(&scenario);
    let base = path.parent().unwrap_or(Path::new("."));
    let pair = scenario.pair(base)?;
    Ok(pair)
}

pub fn rigidity(
    path: &Path,
    cfg: &Config,
    overrides: &Overrides,
    timings: bool,
) -> Result<Report, CliError> {
    let mut cfg = cfg.clone();
    let pair = load_scenario(path, &mut cfg)?;
    overrides.apply(&mut cfg);
    let ctx = cfg.context()?;
    let params = with(cfg.echo(), json!({"pair": path_str(path)}));
    let mut r = ReportBuilder::new("rigidity", params, timings);
    let cy = genus::cy_check(&pair);
    r.value("calabi_yau", cy);
    r.check("calabi-yau", 0.0, || {
        Ok::<_, CliError>(if cy { 0.0 } else { 1.0 })
    })?;
    let ss = samples(&cfg, pair.fan.dim, |s| pair.is_generic(s, &ctx))?;
    r.check("rigidity", cfg.tol, || {
        ss.iter().try_fold(0.0f64, |w, s| {
            Ok::<_, CliError>(w.max(genus::rigidity_residual(&pair, s, &ctx)?))
        })
    })?;
    Ok(r.finish())
}

pub fn blowup(
    fine: &Path,
    coarse: &Path,
    cfg: &Config,
    overrides: &Overrides,
    timings: bool,
) -> Result<Report, CliError> {
    let mut cfg = cfg.clone();
    let coarse_pair = load_scenario(coarse, &mut cfg)?;
    let fine_pair = load_scenario(fine, &mut cfg)?;
    overrides.apply(&mut cfg);
    let ctx = cfg.context()?;
    let m = refinement_morphism(&fine_pair.fan, &coarse_pair.fan)?;
    genus::check_pulled_back(&fine_pair, &coarse_pair, &m)?;
    let params = with(
        cfg.echo(),
        json!({"fine": path_str(fine), "coarse": path_str(coarse)}),
    );
    let mut r = ReportBuilder::new("blowup", params, timings);
    let ss = samples(&cfg, fine_pair.fan.dim, |s| {
        fine_pair.is_generic(s, &ctx) && coarse_pair.is_generic(s, &ctx)
    })?;
    r.check("blowup-identity", cfg.tol, || {
        genus::blowup_identity_residual(&fine_pair, &coarse_pair, &m, &ss, &ctx)
    })?;
    Ok(r.finish())
}

/// Star-subdivides each maximal cone and checks the pushforward on the
/// resulting blow-up: `nu_*(1) = 1`, `nu_*` of the exceptional indicator is 0,
/// and the projection formula on `samples` random pairs of degree <= 3.
pub fn pushforward_suite(path: &Path, cfg: &Config, timings: bool) -> Result<Report, CliError> {
    let fan = load_fan(path)?;
    let params = with(cfg.echo(), json!({"fan": path_str(path)}));
    let mut r = ReportBuilder::new("pushforward", params, timings);
    let mut g = rng(cfg);
    for (k, cone) in fan.max_cones.iter().enumerate() {
        if cone.len() < 2 {
            continue;
        }
        let fine = fan.star_subdivide(cone)?;
        let m = refinement_morphism(&fine, &fan)?;
        let mismatch = |ok: bool| if ok { 0.0 } else { 1.0 };
        r.check(&format!("cone-{k}/unit"), 0.0, || {
            Ok::<_, CliError>(mismatch(
                pushforward(&m, &PiecewisePoly::one(&fine))? == PiecewisePoly::one(&fan),
            ))
        })?;
        r.check(&format!("cone-{k}/exceptional"), 0.0, || {
            let exc = PiecewisePoly::thom_basis_element(&fine, &[fine.num_rays() - 1])?;
            Ok::<_, CliError>(mismatch(
                pushforward(&m, &exc)? == PiecewisePoly::zero(&fan),
            ))
        })?;
        r.check(&format!("cone-{k}/projection"), 0.0, || {
            let mut failures = 0usize;
            for _ in 0..cfg.samples {
                let f = PiecewisePoly::random(&fine, 3, &mut g)?;
                let h = PiecewisePoly::random(&fan, 3, &mut g)?;
                failures += usize::from(!projection_check(&m, &f, &h)?);
            }
            Ok::<_, CliError>(failures as f64)
        })?;
    }
    Ok(r.finish())
}

fn orbifold_samples(
    n: usize,
    cfg: &Config,
    ctx: &EvalContext,
) -> Result<Vec<TorusSample>, CliError> {
    samples(cfg, 2, |s| orbifold::orbifold_generic(n, s, ctx))
}

pub fn mckay(n: usize, cfg: &Config, timings: bool) -> Result<Report, CliError> {
    let ctx = cfg.context()?;
    let mut r = ReportBuilder::new("mckay", with(cfg.echo(), json!({"n": n})), timings);
    r.value("orbifold_euler", orbifold::orbifold_euler(n)?);
    r.value(
        "resolution_fixed_points",
        orbifold::ale_fixed_point_count(n)?,
    );
    let ss = orbifold_samples(n, cfg, &ctx)?;
    r.check("mckay", cfg.tol, || orbifold::mckay_residual(n, &ss, &ctx))?;
    r.check("euler-count", 0.0, || {
        Ok::<_, CliError>(
            (orbifold::orbifold_euler(n)? as f64 - orbifold::ale_fixed_point_count(n)? as f64)
                .abs(),
        )
    })?;
    r.check("euler-degeneration", LIMIT_TOL, || {
        orbifold::euler_degeneration(n, &ss[0], &ctx)
    })?;
    Ok(r.finish())
}

pub fn orb_blowup(n: usize, cfg: &Config, timings: bool) -> Result<Report, CliError> {
    let ctx = cfg.context()?;
    let mut r = ReportBuilder::new("orb-blowup", with(cfg.echo(), json!({"n": n})), timings);
    let ss = orbifold_samples(n, cfg, &ctx)?;
    r.check("orbifold-blowup", cfg.tol, || {
        orbifold::orbifold_blowup_residual(n, &ss, &ctx)
    })?;
    Ok(r.finish())
}

pub fn stringy(
    fan_path: &Path,
    divisor_path: &Path,
    cfg: &Config,
    timings: bool,
) -> Result<Report, CliError> {
    let ctx = cfg.context()?;
    let fan = load_fan(fan_path)?;
    let divisor = DivisorFile::load(divisor_path)?;
    let params = with(
        cfg.echo(),
        json!({"fan": path_str(fan_path), "divisor": path_str(divisor_path)}),
    );
    let mut r = ReportBuilder::new("stringy", params, timings);
    let e_str = genus::stringy_euler(&fan, &divisor)?;
    r.value("e_str", rational::format(&e_str));
    let mut delta = vec![rational::int(0); fan.num_rays()];
    for (&ray, a) in divisor.rays.iter().zip(&divisor.coefficients) {
        delta[ray] = -a.clone();
    }
    let pair = ToricPair::new(fan.clone(), delta)?;
    let s = generic_samples(&mut rng(cfg), 1, fan.dim, |s| {
        genus::chi_y_generic(&fan, s) && pair.is_generic(s, &ctx)
    })?;
    let lim = genus::stringy_limit_residual(&fan, &divisor, &s[0], &ctx)?;
    r.value("chi_y_limit", lim.chi_y_limit.re);
    r.value("theta_limit", lim.theta_limit.re);
    r.check("chi-y-limit", LIMIT_TOL, || Ok::<_, CliError>(lim.residual))?;
    r.check("theta-limit", LIMIT_TOL, || {
        Ok::<_, CliError>(lim.theta_residual)
    })?;
    Ok(r.finish())
}

/// Coefficients of the chi_y polynomial (degree `dim`) from its values at the
/// `dim + 1`-st roots of unity.
fn chi_y_coefficients(fan: &Fan, s: &TorusSample) -> Result<Vec<f64>, CliError> {
    let m = fan.dim + 1;
    let roots: Vec<C64> = (0..m)
        .map(|j| C64::from_polar(1.0, 2.0 * PI * j as f64 / m as f64))
        .collect();
    let values = roots
        .iter()
        .map(|&y| genus::chi_y_genus(fan, s, y))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((0..m)
        .map(|k| {
            let c: C64 = values
                .iter()
                .zip(&roots)
                .map(|(v, y)| v * y.powu(k as u32).conj())
                .sum::<C64>()
                / m as f64;
            c.re
        })
        .collect())
}

pub fn chi_y(path: &Path, cfg: &Config, timings: bool) -> Result<Report, CliError> {
    let fan = load_fan(path)?;
    let params = with(cfg.echo(), json!({"fan": path_str(path)}));
    let mut r = ReportBuilder::new("chi-y", params, timings);
    let ss = samples(cfg, fan.dim, |s| genus::chi_y_generic(&fan, s))?;
    let coeffs = chi_y_coefficients(&fan, &ss[0])?;
    r.value(
        "chi_y_coefficients",
        coeffs
            .iter()
            .map(|c| (c * 1e9).round() / 1e9)
            .collect::<Vec<_>>(),
    );
    let probes = [C64::new(0.3, 0.2), C64::new(2.0, 0.0), C64::new(-1.5, 0.7)];
    r.check("u-independence", CHI_Y_TOL, || {
        let mut worst = 0.0f64;
        for &y in &probes {
            let base = genus::chi_y_genus(&fan, &ss[0], y)?;
            for s in &ss[1..] {
                worst = worst
                    .max((genus::chi_y_genus(&fan, s, y)? - base).norm() / base.norm().max(1.0));
            }
        }
        Ok::<_, CliError>(worst)
    })?;
    r.check("stringy-consistency", CHI_Y_TOL, || {
        let e = genus::stringy_euler(&fan, &toric_ell::Divisor::empty())?;
        let at_one = genus::chi_y_genus(&fan, &ss[0], C64::new(1.0, 0.0))?;
        Ok::<_, CliError>((at_one - rational::to_f64(&e)).norm())
    })?;
    Ok(r.finish())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn series_matches_product() {
        let ctx = EvalContext::new(C64::new(0.1, 0.8), C64::new(0.2, 0.0)).unwrap();
        let t = C64::new(0.31, -0.2);
        let a = theta_series(t, ctx.tau);
        assert!((a - theta::theta(t, &ctx).unwrap()).norm() < 1e-12);
    }
}
