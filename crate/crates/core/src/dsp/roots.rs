//! Polynomial roots through the companion matrix and the reverse expansion
//! from a pole set back to real polynomial coefficients.

use nalgebra::{Complex, DMatrix};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;

/// Imaginary parts below this are treated as rounding noise on a real root.
pub const REAL_SNAP: f64 = 1e-10;
/// Largest imaginary residue tolerated on an expanded coefficient.
pub const IMAG_RESIDUE_MAX: f64 = 1e-8;

const CONJ_MATCH_TOL: f64 = 1e-9;

/// Poles of an all-pole synthesis filter `gain / A(z)`.
///
/// Always closed under conjugation and strictly inside the unit circle.
#[derive(Debug, Clone, PartialEq)]
pub struct PoleSet {
    poles: Vec<C64>,
    gain: f64,
}

impl PoleSet {
    pub fn new(poles: Vec<C64>, gain: f64) -> Result<Self> {
        check_conjugate_closed(&poles)?;
        if let Some(p) = poles
            .iter()
            .find(|p| p.norm().partial_cmp(&1.0) != Some(std::cmp::Ordering::Less))
        {
            return Err(Error::invalid(format!("pole {p} is not inside the unit circle")));
        }
        Ok(Self { poles, gain })
    }

    /// Poles of `1 / A(z)` for monic LPC coefficients.
    pub fn from_lpc(coefficients: &[f64]) -> Result<Self> {
        let poles = poly_roots(coefficients)?;
        Self::new(poles, 1.0 / coefficients[0])
    }

    /// Caller guarantees conjugate closure and stability.
    pub(crate) fn from_parts_unchecked(poles: Vec<C64>, gain: f64) -> Self {
        Self { poles, gain }
    }

    pub fn poles(&self) -> &[C64] {
        &self.poles
    }

    pub fn gain(&self) -> f64 {
        self.gain
    }

    pub fn len(&self) -> usize {
        self.poles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.poles.is_empty()
    }

    pub fn to_coefficients(&self) -> Result<Vec<f64>> {
        poles_to_coeffs(&self.poles)
    }
}

/// Pairs every non-real pole with a distinct conjugate partner, returning the
/// partner index for each pole (itself for real poles).
pub(crate) fn conjugate_partners(poles: &[C64]) -> Option<Vec<usize>> {
    let mut partner: Vec<Option<usize>> = vec![None; poles.len()];
    for i in 0..poles.len() {
        if partner[i].is_some() {
            continue;
        }
        let p = poles[i];
        if p.im.abs() <= REAL_SNAP {
            partner[i] = Some(i);
            continue;
        }
        let tol = CONJ_MATCH_TOL * p.norm().max(1.0);
        let best = (i + 1..poles.len())
            .filter(|&j| partner[j].is_none() && poles[j].im.abs() > REAL_SNAP)
            .map(|j| (j, (poles[j] - p.conj()).norm()))
            .filter(|&(_, d)| d <= tol)
            .min_by(|a, b| a.1.total_cmp(&b.1))?;
        partner[i] = Some(best.0);
        partner[best.0] = Some(i);
    }
    partner.into_iter().collect()
}

fn check_conjugate_closed(poles: &[C64]) -> Result<()> {
    if poles.iter().any(|p| !(p.re.is_finite() && p.im.is_finite())) {
        return Err(Error::invalid("pole set contains non-finite values"));
    }
    conjugate_partners(poles)
        .map(|_| ())
        .ok_or_else(|| Error::invalid("pole set is not closed under complex conjugation"))
}

/// Roots of `sum_k a_k z^(p-k)`, i.e. the poles of `1 / A(z)`.
///
/// Initial estimates are eigenvalues of the balanced companion matrix (or,
/// if the QR iteration stalls, points on a circle of the Cauchy radius) and
/// are refined together with Aberth-Ehrlich steps on the original
/// polynomial. Near-real roots are snapped to the real axis and complex roots
/// are re-paired so each one is followed by its exact conjugate. Pairs come
/// first in order of increasing angle, then real roots in decreasing order.
pub fn poly_roots(coefficients: &[f64]) -> Result<Vec<C64>> {
    let lead = *coefficients
        .first()
        .ok_or_else(|| Error::invalid("empty coefficient list"))?;
    if lead == 0.0 || !lead.is_finite() {
        return Err(Error::invalid("leading coefficient must be finite and nonzero"));
    }
    if coefficients.iter().any(|c| !c.is_finite()) {
        return Err(Error::invalid("coefficients must be finite"));
    }
    let degree = coefficients.len() - 1;
    if degree == 0 {
        return Ok(Vec::new());
    }
    let monic: Vec<f64> = coefficients.iter().map(|c| c / lead).collect();

    if degree == 1 {
        return Ok(vec![C64::new(-monic[1], 0.0)]);
    }
    let refined = match companion_eigenvalues(&monic) {
        Some(initial) => aberth(&monic, initial, ABERTH_POLISH_STEPS),
        None => {
            tracing::debug!(degree, "companion QR stalled; solving by Aberth iteration");
            let roots = aberth(&monic, circle_start(&monic), ABERTH_SOLVE_STEPS);
            if roots.iter().any(|z| !z.is_finite()) {
                return Err(Error::Numerical(format!(
                    "roots of degree-{degree} polynomial did not converge"
                )));
            }
            roots
        }
    };
    Ok(pair_conjugates(refined))
}

const ABERTH_POLISH_STEPS: usize = 8;
const ABERTH_SOLVE_STEPS: usize = 500;

fn companion_eigenvalues(monic: &[f64]) -> Option<Vec<C64>> {
    let degree = monic.len() - 1;
    let mut companion = DMatrix::<f64>::zeros(degree, degree);
    for (j, &c) in monic[1..].iter().enumerate() {
        companion[(0, j)] = -c;
    }
    for i in 1..degree {
        companion[(i, i - 1)] = 1.0;
    }
    nalgebra::linalg::balancing::balance_parlett_reinsch(&mut companion);
    let schur = nalgebra::linalg::Schur::try_new(companion, f64::EPSILON, 10_000)?;
    Some(schur.complex_eigenvalues().iter().copied().collect())
}

/// Points on a circle whose radius bounds every root, offset from the real axis.
fn circle_start(monic: &[f64]) -> Vec<C64> {
    let degree = monic.len() - 1;
    let radius = 1.0 + monic[1..].iter().fold(0.0f64, |m, c| m.max(c.abs()));
    (0..degree)
        .map(|k| C64::from_polar(radius, 2.0 * std::f64::consts::PI * (k as f64 + 0.25) / degree as f64))
        .collect()
}

/// Value and derivative of a monic polynomial. The value is accumulated in
/// double-double so that clustered roots can still be told apart where plain
/// Horner only returns rounding noise.
fn horner(monic: &[f64], z: C64) -> (C64, C64) {
    let (mut re, mut im) = (Dd::ZERO, Dd::ZERO);
    let mut deriv = C64::new(0.0, 0.0);
    for &c in monic {
        deriv = deriv * z + C64::new(re.value(), im.value());
        (re, im) = (
            re.mul(z.re).add(im.mul(z.im).neg()).add(Dd::from(c)),
            re.mul(z.im).add(im.mul(z.re)),
        );
    }
    (C64::new(re.value(), im.value()), deriv)
}

#[derive(Debug, Clone, Copy)]
struct Dd {
    hi: f64,
    lo: f64,
}

impl Dd {
    const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };

    fn from(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    fn value(self) -> f64 {
        self.hi + self.lo
    }

    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }

    fn add(self, other: Dd) -> Dd {
        let s = self.hi + other.hi;
        let bb = s - self.hi;
        let err = (self.hi - (s - bb)) + (other.hi - bb);
        Dd::renorm(s, err + self.lo + other.lo)
    }

    fn mul(self, x: f64) -> Dd {
        let p = self.hi * x;
        let err = self.hi.mul_add(x, -p);
        Dd::renorm(p, err + self.lo * x)
    }

    fn renorm(hi: f64, lo: f64) -> Dd {
        let s = hi + lo;
        Dd {
            hi: s,
            lo: lo - (s - hi),
        }
    }
}

/// Simultaneous Aberth-Ehrlich refinement. An update is kept only if it does
/// not increase `|p(z)|`, so good initial estimates are never degraded.
fn aberth(monic: &[f64], mut roots: Vec<C64>, max_steps: usize) -> Vec<C64> {
    let n = roots.len();
    let mut residual: Vec<f64> = roots.iter().map(|&z| horner(monic, z).0.norm()).collect();
    for _ in 0..max_steps {
        let mut moved = false;
        for k in 0..n {
            let z = roots[k];
            let (value, deriv) = horner(monic, z);
            if value.norm() == 0.0 {
                continue;
            }
            let newton = value / deriv;
            let repulsion: C64 = (0..n)
                .filter(|&j| j != k)
                .map(|j| C64::new(1.0, 0.0) / (z - roots[j]))
                .sum();
            let step = newton / (C64::new(1.0, 0.0) - newton * repulsion);
            if !step.is_finite() {
                continue;
            }
            let candidate = z - step;
            let r = horner(monic, candidate).0.norm();
            if r <= residual[k] && candidate != z {
                moved |= step.norm() > f64::EPSILON * candidate.norm().max(1.0);
                roots[k] = candidate;
                residual[k] = r;
            }
        }
        if !moved {
            break;
        }
    }
    roots
}

fn pair_conjugates(roots: Vec<C64>) -> Vec<C64> {
    let mut reals = Vec::new();
    let mut upper = Vec::new();
    let mut lower = Vec::new();
    for z in roots {
        if z.im.abs() < REAL_SNAP {
            reals.push(z.re);
        } else if z.im > 0.0 {
            upper.push(z);
        } else {
            lower.push(z);
        }
    }
    let mut pairs = Vec::new();
    let mut used = vec![false; lower.len()];
    for p in upper {
        let partner = lower
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .min_by(|a, b| (a.1 - p.conj()).norm().total_cmp(&(b.1 - p.conj()).norm()))
            .map(|(j, _)| j);
        match partner {
            Some(j) => {
                used[j] = true;
                pairs.push((p + lower[j].conj()) * 0.5);
            }
            None => reals.push(p.re),
        }
    }
    reals.extend(lower.iter().zip(&used).filter(|(_, u)| !**u).map(|(z, _)| z.re));

    pairs.sort_by(|a, b| a.arg().total_cmp(&b.arg()).then(b.norm().total_cmp(&a.norm())));
    reals.sort_by(|a, b| b.total_cmp(a));

    let mut out = Vec::with_capacity(pairs.len() * 2 + reals.len());
    for p in pairs {
        out.push(p);
        out.push(p.conj());
    }
    out.extend(reals.into_iter().map(|r| C64::new(r, 0.0)));
    out
}

/// Expands `prod (z - p_i)` into monic real coefficients `[1, c_1, .., c_n]`.
pub fn poles_to_coeffs(poles: &[C64]) -> Result<Vec<f64>> {
    check_conjugate_closed(poles)?;
    let mut acc = vec![C64::new(1.0, 0.0)];
    for &p in poles {
        acc.push(C64::new(0.0, 0.0));
        for k in (1..acc.len()).rev() {
            let prev = acc[k - 1];
            acc[k] -= p * prev;
        }
    }
    if let Some((k, c)) = acc.iter().enumerate().find(|(_, c)| c.im.abs() >= IMAG_RESIDUE_MAX) {
        return Err(Error::Numerical(format!(
            "coefficient {k} kept imaginary residue {:.3e}",
            c.im
        )));
    }
    Ok(acc.into_iter().map(|c| c.re).collect())
}
