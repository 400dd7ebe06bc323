//! Python bindings. Rationals cross the boundary as `"p/q"` strings (ints are
//! accepted too), complex numbers as Python `complex`, torus samples as lists
//! of complex numbers.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use toric_ell::fan::{ale_fan, refinement_morphism};
use toric_ell::genus::{self, generic_samples};
use toric_ell::pwpoly::{projection_check, pushforward};
use toric_ell::theta as th;
use toric_ell::{
    orbifold, rational, Complex64 as C64, Divisor, EvalContext, PiecewisePoly, Rational, SL2Matrix,
    ToricPair, TorusSample, Truncation,
};

fn err(e: toric_ell::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn rationals(values: &[Bound<'_, PyAny>]) -> PyResult<Vec<Rational>> {
    values
        .iter()
        .map(|v| rational::parse(&v.str()?.to_string()).map_err(err))
        .collect()
}

fn sample(u: Vec<C64>) -> TorusSample {
    TorusSample::new(u)
}

fn samples(us: Vec<Vec<C64>>) -> Vec<TorusSample> {
    us.into_iter().map(TorusSample::new).collect()
}

#[pyclass(name = "Fan", module = "toric_ell_py", from_py_object)]
#[derive(Clone)]
struct PyFan {
    inner: toric_ell::Fan,
}

#[pymethods]
impl PyFan {
    #[new]
    fn new(dim: usize, rays: Vec<Vec<i64>>, max_cones: Vec<Vec<usize>>) -> PyResult<Self> {
        Ok(Self {
            inner: toric_ell::Fan::new(dim, rays, max_cones).map_err(err)?,
        })
    }

    #[staticmethod]
    fn projective(dim: usize) -> Self {
        Self {
            inner: toric_ell::Fan::projective(dim),
        }
    }

    #[staticmethod]
    fn affine(dim: usize) -> Self {
        Self {
            inner: toric_ell::Fan::affine(dim),
        }
    }

    /// Minimal resolution of `C^2 / Z_n`.
    #[staticmethod]
    fn ale(n: usize) -> PyResult<Self> {
        Ok(Self {
            inner: ale_fan(n).map_err(err)?.0,
        })
    }

    #[staticmethod]
    fn from_json(s: &str) -> PyResult<Self> {
        Ok(Self {
            inner: toric_ell::Fan::from_json(s).map_err(err)?,
        })
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    fn product(&self, other: &PyFan) -> Self {
        Self {
            inner: self.inner.product(&other.inner),
        }
    }

    fn star_subdivide(&self, cone: Vec<usize>) -> PyResult<Self> {
        Ok(Self {
            inner: self.inner.star_subdivide(&cone).map_err(err)?,
        })
    }

    /// Problems found; empty for a valid smooth fan.
    fn validate(&self) -> Vec<String> {
        self.inner.validate()
    }

    /// Dual forms of each maximal cone, i.e. the tangent weights at its fixed point.
    fn dual_frames(&self) -> PyResult<Vec<Vec<Vec<i64>>>> {
        Ok(self
            .inner
            .dual_frames()
            .map_err(err)?
            .into_iter()
            .map(|f| f.forms)
            .collect())
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim
    }

    #[getter]
    fn rays(&self) -> Vec<Vec<i64>> {
        self.inner.rays.clone()
    }

    #[getter]
    fn max_cones(&self) -> Vec<Vec<usize>> {
        self.inner.max_cones.clone()
    }

    fn __len__(&self) -> usize {
        self.inner.num_max_cones()
    }

    fn __eq__(&self, other: &PyFan) -> bool {
        self.inner == other.inner
    }

    fn __repr__(&self) -> String {
        format!(
            "Fan(dim={}, rays={:?}, max_cones={:?})",
            self.inner.dim, self.inner.rays, self.inner.max_cones
        )
    }
}

/// Evaluation parameters `(tau, z)`, truncation (`None` for automatic) and
/// tolerance.
#[pyclass(name = "Context", module = "toric_ell_py", from_py_object)]
#[derive(Clone)]
struct PyContext {
    inner: EvalContext,
}

#[pymethods]
impl PyContext {
    #[new]
    #[pyo3(signature = (tau = C64::new(0.0, 1.0), z = C64::new(0.21, 0.03), trunc = None, tol = 1e-7))]
    fn new(tau: C64, z: C64, trunc: Option<usize>, tol: f64) -> PyResult<Self> {
        let t = trunc.map_or(Truncation::Auto, Truncation::Fixed);
        Ok(Self {
            inner: EvalContext::new(tau, z)
                .map_err(err)?
                .with_trunc(t)
                .with_tol(tol),
        })
    }

    #[getter]
    fn tau(&self) -> C64 {
        self.inner.tau
    }

    #[getter]
    fn z(&self) -> C64 {
        self.inner.z
    }

    fn __repr__(&self) -> String {
        format!(
            "Context(tau={}, z={}, tol={:e})",
            self.inner.tau, self.inner.z, self.inner.tol
        )
    }
}

fn pair(fan: &PyFan, delta: &[Bound<'_, PyAny>]) -> PyResult<ToricPair> {
    if delta.is_empty() {
        return Ok(ToricPair::trivial(fan.inner.clone()));
    }
    ToricPair::new(fan.inner.clone(), rationals(delta)?).map_err(err)
}

fn divisor(rays: Vec<usize>, coefficients: &[Bound<'_, PyAny>]) -> PyResult<Divisor> {
    Divisor::new(rays, rationals(coefficients)?).map_err(err)
}

#[pyfunction]
fn theta(t: C64, ctx: &PyContext) -> PyResult<C64> {
    th::theta(t, &ctx.inner).map_err(err)
}

#[pyfunction]
fn theta_prime_zero(ctx: &PyContext) -> PyResult<C64> {
    th::theta_prime_zero(&ctx.inner).map_err(err)
}

/// `theta(x + c z) / (theta(x) theta(c z))`.
#[pyfunction]
fn phi(x: C64, c: f64, ctx: &PyContext) -> PyResult<C64> {
    th::phi(x, c, &ctx.inner).map_err(err)
}

#[pyfunction]
fn orb_factor(x: C64, eps_g: f64, eps_h: f64, coeff: f64, ctx: &PyContext) -> PyResult<C64> {
    th::orb_factor(x, eps_g, eps_h, coeff, &ctx.inner).map_err(err)
}

#[pyfunction]
fn modular_residual(matrix: (i64, i64, i64, i64), t: C64, ctx: &PyContext) -> PyResult<f64> {
    let (a, b, c, d) = matrix;
    let g = SL2Matrix::new(a, b, c, d).map_err(err)?;
    th::modular_residual(&g, t, &ctx.inner).map_err(err)
}

#[pyfunction]
fn cy_check(fan: &PyFan, delta: Vec<Bound<'_, PyAny>>) -> PyResult<bool> {
    Ok(genus::cy_check(&pair(fan, &delta)?))
}

#[pyfunction]
fn normalized_ell(
    fan: &PyFan,
    delta: Vec<Bound<'_, PyAny>>,
    u: Vec<C64>,
    ctx: &PyContext,
) -> PyResult<C64> {
    genus::normalized_ell(&pair(fan, &delta)?, &sample(u), &ctx.inner).map_err(err)
}

#[pyfunction]
fn rigidity_residual(
    fan: &PyFan,
    delta: Vec<Bound<'_, PyAny>>,
    u: Vec<C64>,
    ctx: &PyContext,
) -> PyResult<f64> {
    genus::rigidity_residual(&pair(fan, &delta)?, &sample(u), &ctx.inner).map_err(err)
}

/// Samples accepted by the genericity test of the pair.
#[pyfunction]
fn pair_samples(
    fan: &PyFan,
    delta: Vec<Bound<'_, PyAny>>,
    count: usize,
    seed: u64,
    ctx: &PyContext,
) -> PyResult<Vec<Vec<C64>>> {
    let p = pair(fan, &delta)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ss = generic_samples(&mut rng, count, p.fan.dim, |s| p.is_generic(s, &ctx.inner))
        .map_err(err)?;
    Ok(ss.into_iter().map(|s| s.u).collect())
}

#[pyfunction]
fn blowup_identity_residual(
    fine: &PyFan,
    fine_delta: Vec<Bound<'_, PyAny>>,
    coarse: &PyFan,
    coarse_delta: Vec<Bound<'_, PyAny>>,
    us: Vec<Vec<C64>>,
    ctx: &PyContext,
) -> PyResult<f64> {
    let f = pair(fine, &fine_delta)?;
    let c = pair(coarse, &coarse_delta)?;
    let m = refinement_morphism(&f.fan, &c.fan).map_err(err)?;
    genus::blowup_identity_residual(&f, &c, &m, &samples(us), &ctx.inner).map_err(err)
}

/// Pushforward along the star subdivision of `cone`: whether `nu_*(1) = 1`,
/// whether the exceptional indicator pushes to 0, and how many of `trials`
/// random projection-formula checks failed.
#[pyfunction]
fn pushforward_check<'py>(
    py: Python<'py>,
    fan: &PyFan,
    cone: Vec<usize>,
    trials: usize,
    seed: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let coarse = &fan.inner;
    let fine = coarse.star_subdivide(&cone).map_err(err)?;
    let m = refinement_morphism(&fine, coarse).map_err(err)?;
    let unit =
        pushforward(&m, &PiecewisePoly::one(&fine)).map_err(err)? == PiecewisePoly::one(coarse);
    let exc = PiecewisePoly::thom_basis_element(&fine, &[fine.num_rays() - 1]).map_err(err)?;
    let exceptional = pushforward(&m, &exc).map_err(err)? == PiecewisePoly::zero(coarse);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = 0usize;
    for _ in 0..trials {
        let f = PiecewisePoly::random(&fine, 3, &mut rng).map_err(err)?;
        let g = PiecewisePoly::random(coarse, 3, &mut rng).map_err(err)?;
        failures += usize::from(!projection_check(&m, &f, &g).map_err(err)?);
    }
    let d = PyDict::new(py);
    d.set_item("unit", unit)?;
    d.set_item("exceptional", exceptional)?;
    d.set_item("projection_failures", failures)?;
    Ok(d)
}

#[pyfunction]
fn chi_y_genus(fan: &PyFan, u: Vec<C64>, y: C64) -> PyResult<C64> {
    genus::chi_y_genus(&fan.inner, &sample(u), y).map_err(err)
}

/// Stringy Euler number as a `"p/q"` string.
#[pyfunction]
fn stringy_euler(
    fan: &PyFan,
    rays: Vec<usize>,
    coefficients: Vec<Bound<'_, PyAny>>,
) -> PyResult<String> {
    let d = divisor(rays, &coefficients)?;
    Ok(rational::format(
        &genus::stringy_euler(&fan.inner, &d).map_err(err)?,
    ))
}

#[pyfunction]
fn stringy_limit<'py>(
    py: Python<'py>,
    fan: &PyFan,
    rays: Vec<usize>,
    coefficients: Vec<Bound<'_, PyAny>>,
    u: Vec<C64>,
    ctx: &PyContext,
) -> PyResult<Bound<'py, PyDict>> {
    let d = divisor(rays, &coefficients)?;
    let lim = genus::stringy_limit_residual(&fan.inner, &d, &sample(u), &ctx.inner).map_err(err)?;
    let out = PyDict::new(py);
    out.set_item("e_str", rational::format(&lim.e_str))?;
    out.set_item("chi_y_limit", lim.chi_y_limit)?;
    out.set_item("theta_limit", lim.theta_limit)?;
    out.set_item("residual", lim.residual)?;
    out.set_item("theta_residual", lim.theta_residual)?;
    Ok(out)
}

#[pyfunction]
fn orbifold_samples(n: usize, count: usize, seed: u64, ctx: &PyContext) -> PyResult<Vec<Vec<C64>>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ss = generic_samples(&mut rng, count, 2, |s| {
        orbifold::orbifold_generic(n, s, &ctx.inner)
    })
    .map_err(err)?;
    Ok(ss.into_iter().map(|s| s.u).collect())
}

#[pyfunction]
fn orbifold_ell_c2(n: usize, u: Vec<C64>, ctx: &PyContext) -> PyResult<C64> {
    orbifold::orbifold_ell_c2(n, &sample(u), &ctx.inner).map_err(err)
}

#[pyfunction]
fn resolution_ell(n: usize, u: Vec<C64>, ctx: &PyContext) -> PyResult<C64> {
    orbifold::resolution_ell(n, &sample(u), &ctx.inner).map_err(err)
}

#[pyfunction]
fn mckay_residual(n: usize, us: Vec<Vec<C64>>, ctx: &PyContext) -> PyResult<f64> {
    orbifold::mckay_residual(n, &samples(us), &ctx.inner).map_err(err)
}

#[pyfunction]
fn orbifold_blowup_residual(n: usize, us: Vec<Vec<C64>>, ctx: &PyContext) -> PyResult<f64> {
    orbifold::orbifold_blowup_residual(n, &samples(us), &ctx.inner).map_err(err)
}

#[pyfunction]
fn orbifold_euler(n: usize) -> PyResult<u64> {
    orbifold::orbifold_euler(n).map_err(err)
}

#[pyfunction]
fn euler_degeneration(n: usize, u: Vec<C64>, ctx: &PyContext) -> PyResult<f64> {
    orbifold::euler_degeneration(n, &sample(u), &ctx.inner).map_err(err)
}

#[pymodule]
fn toric_ell_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyFan>()?;
    m.add_class::<PyContext>()?;
    m.add_function(wrap_pyfunction!(theta, m)?)?;
    m.add_function(wrap_pyfunction!(theta_prime_zero, m)?)?;
    m.add_function(wrap_pyfunction!(phi, m)?)?;
    m.add_function(wrap_pyfunction!(orb_factor, m)?)?;
    m.add_function(wrap_pyfunction!(modular_residual, m)?)?;
    m.add_function(wrap_pyfunction!(cy_check, m)?)?;
    m.add_function(wrap_pyfunction!(normalized_ell, m)?)?;
    m.add_function(wrap_pyfunction!(rigidity_residual, m)?)?;
    m.add_function(wrap_pyfunction!(pair_samples, m)?)?;
    m.add_function(wrap_pyfunction!(blowup_identity_residual, m)?)?;
    m.add_function(wrap_pyfunction!(pushforward_check, m)?)?;
    m.add_function(wrap_pyfunction!(chi_y_genus, m)?)?;
    m.add_function(wrap_pyfunction!(stringy_euler, m)?)?;
    m.add_function(wrap_pyfunction!(stringy_limit, m)?)?;
    m.add_function(wrap_pyfunction!(orbifold_samples, m)?)?;
    m.add_function(wrap_pyfunction!(orbifold_ell_c2, m)?)?;
    m.add_function(wrap_pyfunction!(resolution_ell, m)?)?;
    m.add_function(wrap_pyfunction!(mckay_residual, m)?)?;
    m.add_function(wrap_pyfunction!(orbifold_blowup_residual, m)?)?;
    m.add_function(wrap_pyfunction!(orbifold_euler, m)?)?;
    m.add_function(wrap_pyfunction!(euler_degeneration, m)?)?;
    Ok(())
}
