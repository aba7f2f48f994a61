//! The dihedral operator pencil: characteristic functions, complex zeros,
//! and the edge exponent `mu`.
//!
//! For five boundary pairs the spectrum of the dihedral pencil is the zero
//! set of an explicit entire function of `lambda` (quadratic dependence on
//! the spectral parameter, transcendental in `lambda * theta`).  Zeros are
//! isolated by argument-principle counts over rectangles, refined by Newton,
//! and the exponent `mu` is selected from the spectrum by the parity/angle
//! rule.  Pairs without a closed form go through the collocation oracle.

mod rootfind;

pub use rootfind::{count_zeros, find_roots, SearchBox};

use crate::exact::Exact;
use crate::geometry::BcKind;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

/// Boundary pair at an edge, stored as given; the spectrum depends only on
/// the unordered pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BcPair {
    pub plus: BcKind,
    pub minus: BcKind,
}

impl BcPair {
    pub fn new(plus: BcKind, minus: BcKind) -> Self {
        BcPair { plus, minus }
    }

    pub fn codes(codes: (u8, u8)) -> Result<Self, PencilError> {
        Ok(BcPair {
            plus: BcKind::new(codes.0).map_err(|_| PencilError::BadPair(codes.0, codes.1))?,
            minus: BcKind::new(codes.1).map_err(|_| PencilError::BadPair(codes.0, codes.1))?,
        })
    }

    /// Unordered identity `(min, max)`.
    pub fn sorted(&self) -> (u8, u8) {
        let (a, b) = (self.plus.code(), self.minus.code());
        (a.min(b), a.max(b))
    }

    pub fn sum(&self) -> u8 {
        self.plus.code() + self.minus.code()
    }

    /// True exactly for the pairs {0,0}, {3,3}, {0,1}, {0,2}, {0,3}.
    pub fn has_closed_form(&self) -> bool {
        matches!(self.sorted(), (0, 0) | (3, 3) | (0, 1) | (0, 2) | (0, 3))
    }

    /// `m = 1` for equal conditions on both sides, `m = 2` otherwise.
    pub fn angle_divisor(&self) -> u8 {
        if self.plus == self.minus {
            1
        } else {
            2
        }
    }

    /// Multiplicity of the characteristic function's zero at the origin, for
    /// pairs where `lambda = 0` is not an eigenvalue and must be excluded.
    /// `None` for the pair {3,3}, which keeps `lambda = 0` in its spectrum.
    pub fn excluded_origin_multiplicity(&self) -> Option<u32> {
        match self.sorted() {
            (0, 0) => Some(3),
            (0, 1) | (0, 2) => Some(2),
            (0, 3) => Some(1),
            _ => None,
        }
    }
}

impl std::fmt::Display for BcPair {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{})", self.plus.code(), self.minus.code())
    }
}

#[derive(Debug, Error)]
pub enum PencilError {
    #[error("boundary pair ({0},{1}) is not a valid pair of condition codes")]
    BadPair(u8, u8),
    #[error("pair {0} has no closed-form characteristic function; use the collocation oracle")]
    NoClosedForm(BcPair),
    #[error("theta = {0} outside (0, 2*pi)")]
    BadTheta(f64),
    #[error("search box {0:?} is degenerate or exceeds the hard caps (Re in [-10,10], |Im| <= 50)")]
    BadBox(SearchBox),
    #[error("could not clear the box boundary of zeros after 8 outward perturbations ({0:?})")]
    BoundaryClearance(SearchBox),
    #[error("root isolation did not converge in sub-box {0:?}")]
    NonConvergence(SearchBox),
    #[error("no spectrum found for {pair} at theta = {theta} within Re <= {re_max}")]
    SpectrumNotFound { pair: BcPair, theta: f64, re_max: f64 },
    #[error(transparent)]
    Oracle(#[from] crate::oracle::OracleError),
}

/// Tolerances, caps, and default boxes for the pencil machinery.
/// Partial configuration files are fine; missing fields take the defaults.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct PencilConfig {
    /// Hard cap on |Re| for any search box.
    pub re_hard_cap: f64,
    /// Hard cap on |Im| for any search box.
    pub im_hard_cap: f64,
    /// Left end of the default exponent search box.
    pub mu_box_re_min: f64,
    /// Right end of the default exponent search box (auto-expanded).
    pub mu_box_re_max: f64,
    /// Imaginary truncation used for exponent searches and strip checks.
    pub im_cap: f64,
    /// Newton residual target.
    pub tol: f64,
    /// Collocation order used when the exponent is delegated to the oracle.
    pub oracle_order: usize,
    /// Imaginary truncation for oracle-backed exponent searches.
    pub oracle_im_cap: f64,
}

impl Default for PencilConfig {
    fn default() -> Self {
        PencilConfig {
            re_hard_cap: 10.0,
            im_hard_cap: 50.0,
            mu_box_re_min: 0.01,
            mu_box_re_max: 5.0,
            im_cap: 20.0,
            tol: 1e-12,
            oracle_order: 48,
            oracle_im_cap: 6.0,
        }
    }
}

/// One zero of the characteristic function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PencilRoot {
    pub re: f64,
    pub im: f64,
    pub multiplicity: u32,
    /// |F(lambda)| at the refined zero.
    pub residual: f64,
}

impl PencilRoot {
    pub fn lambda(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

/// Zeros of a characteristic function inside a search box, with the trivial
/// origin roots reported separately for pairs that exclude `lambda = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PencilSpectrum {
    pub pair: BcPair,
    pub theta: f64,
    /// The effective box after any boundary-clearance perturbation.
    pub search_box: SearchBox,
    /// Eigen-roots sorted by (Re, Im).
    pub roots: Vec<PencilRoot>,
    /// Removed trivial roots (the origin, for Dirichlet-containing pairs).
    pub excluded: Vec<PencilRoot>,
}

impl PencilSpectrum {
    pub fn total_multiplicity(&self) -> u32 {
        self.roots.iter().chain(self.excluded.iter()).map(|r| r.multiplicity).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MuKind {
    Exact,
    StrictLowerBound,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MuSource {
    ClosedForm,
    RootFinder,
    Oracle,
    User,
}

/// The edge exponent, either an exact value or a certified strict lower bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MuBound {
    pub value: f64,
    /// Exact rational value when one is known (rule-supplied bounds).
    pub exact: Option<Exact>,
    pub kind: MuKind,
    pub source: MuSource,
}

impl MuBound {
    pub fn exact_value(&self) -> Exact {
        self.exact
            .clone()
            .unwrap_or_else(|| Exact::from_f64(self.value).expect("finite mu"))
    }

    pub fn exact_from_f64(value: f64, source: MuSource) -> Self {
        MuBound { value, exact: None, kind: MuKind::Exact, source }
    }

    /// A strict lower bound `mu > value` with exact rational value.
    pub fn strict_lower(value: Exact) -> Self {
        MuBound {
            value: value.to_f64(),
            exact: Some(value),
            kind: MuKind::StrictLowerBound,
            source: MuSource::User,
        }
    }
}

// ---------------------------------------------------------------------------
// Characteristic functions

fn check_theta(theta: f64) -> Result<(), PencilError> {
    if theta > 0.0 && theta < 2.0 * PI {
        Ok(())
    } else {
        Err(PencilError::BadTheta(theta))
    }
}

/// Both factors of the characteristic function, with a magnitude scale (the
/// sum of the absolute values of the second factor's additive terms).
pub(crate) fn char_factors(
    pair: BcPair,
    theta: f64,
    lambda: Complex64,
) -> (Complex64, Complex64, f64) {
    let lt = lambda * theta;
    let sin_t = theta.sin();
    let sin_2t = (2.0 * theta).sin();
    match pair.sorted() {
        (0, 0) | (3, 3) => {
            let f1 = lt.sin();
            let t1 = lambda * lambda * sin_t * sin_t;
            let t2 = lt.sin() * lt.sin();
            (f1, t1 - t2, t1.norm() + t2.norm())
        }
        (0, 1) => {
            let f1 = lt.sin();
            let t1 = lambda * sin_2t;
            let t2 = (lt * 2.0).sin();
            (f1, t1 + t2, t1.norm() + t2.norm())
        }
        (0, 2) => {
            let f1 = (lt * 2.0).sin();
            let t1 = lambda * sin_2t;
            let t2 = (lt * 2.0).sin();
            (f1, t1 - t2, t1.norm() + t2.norm())
        }
        (0, 3) => {
            let f1 = (lt * 2.0).sin();
            let t1 = lambda * lambda * sin_t * sin_t;
            let t2 = lt.cos() * lt.cos();
            (f1, t1 - t2, t1.norm() + t2.norm())
        }
        _ => unreachable!("no closed form"),
    }
}

/// Characteristic function value together with a magnitude scale (the sum of
/// the absolute values of its additive terms), used for relative residuals.
pub(crate) fn char_terms(pair: BcPair, theta: f64, lambda: Complex64) -> (Complex64, f64) {
    let (f1, g, g_scale) = char_factors(pair, theta, lambda);
    (f1 * g, f1.norm() * g_scale)
}

/// The scalar factor governing the axial velocity component: its boundary
/// problem decouples, with `U_3 = 0` on sides carrying a velocity condition
/// on the axial direction (`d` in {0, 1}) and `U_3' = 0` on stress sides
/// (`d` in {2, 3}).
pub fn axial_factor(pair: BcPair, theta: f64, lambda: Complex64) -> Complex64 {
    let stress = |d: u8| d >= 2;
    let (a, b) = (stress(pair.plus.code()), stress(pair.minus.code()));
    match (a, b) {
        // Velocity pinned on both sides, or stress on both sides.
        (false, false) | (true, true) => (lambda * theta).sin(),
        // One of each.
        _ => (lambda * theta).cos(),
    }
}

pub(crate) fn char_derivative(pair: BcPair, theta: f64, lambda: Complex64) -> Complex64 {
    let lt = lambda * theta;
    let sin_t = theta.sin();
    let sin_2t = (2.0 * theta).sin();
    match pair.sorted() {
        (0, 0) | (3, 3) => {
            let f1 = lt.sin();
            let df1 = lt.cos() * theta;
            let g = lambda * lambda * sin_t * sin_t - lt.sin() * lt.sin();
            let dg = lambda * 2.0 * sin_t * sin_t - (lt * 2.0).sin() * theta;
            df1 * g + f1 * dg
        }
        (0, 1) => {
            let f1 = lt.sin();
            let df1 = lt.cos() * theta;
            let g = lambda * sin_2t + (lt * 2.0).sin();
            let dg = (lt * 2.0).cos() * (2.0 * theta) + sin_2t;
            df1 * g + f1 * dg
        }
        (0, 2) => {
            let f1 = (lt * 2.0).sin();
            let df1 = (lt * 2.0).cos() * (2.0 * theta);
            let g = lambda * sin_2t - (lt * 2.0).sin();
            let dg = -(lt * 2.0).cos() * (2.0 * theta) + sin_2t;
            df1 * g + f1 * dg
        }
        (0, 3) => {
            let f1 = (lt * 2.0).sin();
            let df1 = (lt * 2.0).cos() * (2.0 * theta);
            let g = lambda * lambda * sin_t * sin_t - lt.cos() * lt.cos();
            let dg = lambda * 2.0 * sin_t * sin_t + (lt * 2.0).sin() * theta;
            df1 * g + f1 * dg
        }
        _ => unreachable!("no closed form"),
    }
}

/// Evaluates the characteristic function of the dihedral pencil.
pub fn char_fn(pair: BcPair, theta: f64, lambda: Complex64) -> Result<Complex64, PencilError> {
    check_theta(theta)?;
    if !pair.has_closed_form() {
        return Err(PencilError::NoClosedForm(pair));
    }
    Ok(char_terms(pair, theta, lambda).0)
}

// ---------------------------------------------------------------------------
// The exponent `mu`

/// The parity/angle rule: `true` when the exponent is taken from the second
/// eigenvalue (smallest real part greater than one).
pub fn selects_lambda2(pair: BcPair, theta: f64) -> bool {
    pair.sum().is_multiple_of(2) && theta < PI / pair.angle_divisor() as f64
}

fn select_mu_from(
    pair: BcPair,
    theta: f64,
    eigen_re: &[f64],
    source: MuSource,
    re_max: f64,
) -> Result<MuBound, PencilError> {
    let lambda1 = eigen_re.iter().copied().filter(|&x| x > 1e-9).fold(f64::INFINITY, f64::min);
    let wanted = if selects_lambda2(pair, theta) {
        eigen_re
            .iter()
            .copied()
            .filter(|&x| x > 1.0 + 1e-12)
            .fold(f64::INFINITY, f64::min)
    } else {
        lambda1
    };
    if wanted.is_finite() {
        Ok(MuBound {
            value: wanted,
            exact: None,
            kind: MuKind::Exact,
            source,
        })
    } else {
        Err(PencilError::SpectrumNotFound { pair, theta, re_max })
    }
}

/// Computes the edge exponent for a boundary pair at opening angle `theta`.
///
/// Dirichlet below `pi` short-circuits to `pi/theta`; closed-form pairs go
/// through the transcendental root finder; the rest are delegated to the
/// collocation oracle.
pub fn mu(pair: BcPair, theta: f64, cfg: &PencilConfig) -> Result<MuBound, PencilError> {
    check_theta(theta)?;
    if pair.sorted() == (0, 0) && theta < PI {
        return Ok(MuBound {
            value: PI / theta,
            exact: None,
            kind: MuKind::Exact,
            source: MuSource::ClosedForm,
        });
    }
    if !pair.has_closed_form() {
        let evs = crate::oracle::eigenvalues_for_exponent(pair, theta, cfg)?;
        let re: Vec<f64> = evs.iter().map(|z| z.re).collect();
        return select_mu_from(pair, theta, &re, MuSource::Oracle, cfg.re_hard_cap);
    }
    let mut re_max = cfg.mu_box_re_max;
    let mut nudges = 0;
    loop {
        let search = SearchBox::new(cfg.mu_box_re_min, re_max, -cfg.im_cap, cfg.im_cap)
            .map_err(PencilError::BadBox)?;
        let spectrum = match find_roots(pair, theta, search, cfg.tol, cfg) {
            Ok(s) => s,
            // A zero sitting essentially on the right edge defeats the
            // outward-perturbation ladder; move the edge instead.
            Err(PencilError::BoundaryClearance(_)) if nudges < 6 => {
                nudges += 1;
                re_max = (re_max + 0.0371).min(cfg.re_hard_cap);
                continue;
            }
            Err(e) => return Err(e),
        };
        let re: Vec<f64> = spectrum.roots.iter().map(|r| r.re).collect();
        match select_mu_from(pair, theta, &re, MuSource::RootFinder, re_max) {
            Ok(bound) => return Ok(bound),
            Err(e) => {
                if re_max >= cfg.re_hard_cap {
                    return Err(e);
                }
                re_max = (re_max * 1.5).min(cfg.re_hard_cap);
            }
        }
    }
}

/// Edge exponent over a sampled angle list: the infimum of the per-sample
/// exponents.
pub fn mu_infimum(
    pair: BcPair,
    angles: impl IntoIterator<Item = f64>,
    cfg: &PencilConfig,
) -> Result<MuBound, PencilError> {
    let mut best: Option<MuBound> = None;
    for theta in angles {
        let candidate = mu(pair, theta, cfg)?;
        best = Some(match best {
            None => candidate,
            Some(b) if candidate.value < b.value => candidate,
            Some(b) => b,
        });
    }
    best.ok_or(PencilError::BadTheta(f64::NAN))
}

/// True iff the pencil has no eigenvalues with real part in `[re_lo, re_hi]`
/// (imaginary parts truncated at the configured cap).
pub fn edge_strip_free(
    pair: BcPair,
    theta: f64,
    re_lo: f64,
    re_hi: f64,
    cfg: &PencilConfig,
) -> Result<bool, PencilError> {
    let search =
        SearchBox::new(re_lo, re_hi, -cfg.im_cap, cfg.im_cap).map_err(PencilError::BadBox)?;
    let spectrum = find_roots(pair, theta, search, cfg.tol, cfg)?;
    Ok(spectrum.roots.is_empty())
}
