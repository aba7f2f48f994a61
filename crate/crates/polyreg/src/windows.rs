//! Solvability and regularity windows: evaluating theorem hypotheses over
//! exact rationals, and inverting them into admissible `s`-ranges.
//!
//! Every check reduces to three ingredient families:
//!
//! * **edge windows** `max(l - mu_k, 0) < delta_k + 2/s < l`, with two
//!   endpoint refinements: a strict-lower-bound exponent closes the left
//!   endpoint (the inequality stays strict for every domain in the class),
//!   and the weak level admits `delta = 0` at `s = 2`;
//! * **corner conditions**: an eigenvalue-free line (cone theorems) or a
//!   closed strip anchored at `Re lambda = -1/2` (bounded domains), checked
//!   against strip certificates;
//! * **attested compatibility flags** carried on the query.
//!
//! All endpoint comparisons run over exact rationals so the emitted
//! inclusivity flags are decisions, not rounding artifacts.

use crate::certificates::StripCertificate;
use crate::exact::Exact;
use crate::geometry::{BcKind, DomainModel};
use crate::pencil::{MuBound, MuKind};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Stable theorem handles, decoupled from any external numbering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TheoremId {
    /// Strong solutions in a polyhedral cone (level 2).
    StrongCone,
    /// Weak solutions in a polyhedral cone (level 1).
    WeakCone,
    /// Regularity lift in a polyhedral cone (level `l`, from a base window).
    LiftCone,
    /// Weak-solution regularity in a bounded polyhedral domain.
    WeakBounded,
    /// Regularity lift in a bounded polyhedral domain.
    LiftBounded,
}

/// Descriptions for the stable theorem ids used in reports.
pub const THEOREM_TABLE: &[(&str, &str)] = &[
    ("ft1", "existence of strong solutions in a polyhedral cone"),
    ("ft2", "uniqueness of the strong cone solution"),
    ("ft3", "transfer of strong cone solutions between two weight windows"),
    ("gt1", "existence and uniqueness of weak cone solutions"),
    ("ht1", "decomposition of weak cone solutions into singular terms and a remainder"),
    ("ht2", "level-2 regularity lift for weak cone solutions"),
    ("ht3", "level-l regularity lift for weak cone solutions"),
    ("it2", "weighted regularity of weak solutions in a bounded polyhedral domain"),
    ("it3", "level-l regularity lift in a bounded polyhedral domain"),
];

const CITE_STRONG_LINE: &str =
    r"no eigenvalues of the pencil ${\mathfrak A}(\lambda)$ on the line";
const CITE_STRONG_WINDOW: &str = r"$\max(2-\mu_k,0) < \delta_k +2/s <2$";
const CITE_WEAK_WINDOW: &str = r"$\max(1-\mu_k,0)< \delta_k+2/s < 1$";
const CITE_LIFT_WINDOW: &str = r"$\max(0,l-\mu_k)<\delta_k+2/s<l$";
const CITE_S2_SPECIAL: &str = r"also valid if $s=2$, $\delta=0$";
const CITE_S2_WEIGHTED: &str = r"can be replaced by $-\min(\mu_k,1) <\delta_k\le 0$";
const CITE_WEAK_BOUNDED_STRIP: &str =
    r"closed strip between the lines $\mbox{Re}\lambda = -1/2$ and $\mbox{Re}\lambda = 1-\beta-3/s$";
const CITE_LIFT_BOUNDED_STRIP: &str =
    r"between the lines $\mbox{\em Re}\, \lambda= -1/2$ and $\mbox{\em Re}\, \lambda =l-\beta-3/s$";
const CITE_LIFT_CONE_STRIP: &str =
    r"no eigenvalues of the pencil ${\mathfrak A}(\lambda)$ in the closed strip between the lines";
const CITE_COMPAT_III: &str =
    r"a condition on the traces of $g$, $\phi_j$, $h_j$ and the derivatives of $h_j$ on the edges";
const CITE_G_FLAGS: &str =
    r"provided $g$ satisfies (\ref{condg}) if $s=2$ and $g=0$ on $M_k$";
const CITE_SOLVABILITY: &str = r"$F(v) = 0 \quad\mbox{for all } v\in L_V$";

/// Attested data assumptions; the engine never evaluates them on data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssumptionFlags {
    /// Edge trace compatibility of the boundary data.
    pub compat_iii: bool,
    /// The weighted integrability condition on `g` near vertices.
    pub condg_0_3: bool,
    /// `g` vanishes on the edges.
    pub g_edge_trace_zero: bool,
    /// Solvability preconditions of the bounded weak problem.
    pub solvability_5_4_5_5: bool,
}

impl Default for AssumptionFlags {
    fn default() -> Self {
        AssumptionFlags {
            compat_iii: true,
            condg_0_3: true,
            g_edge_trace_zero: true,
            solvability_5_4_5_5: true,
        }
    }
}

/// Base integrability window for transfer/lift checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaseWindow {
    pub l: u32,
    pub sigma: Exact,
    /// Scalar beta of the base window (cone form).
    pub beta: Exact,
    /// Per-edge delta of the base window.
    pub delta: Vec<Exact>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegularityQuery {
    pub theorem: TheoremId,
    pub l: u32,
    pub s: Exact,
    /// Per-vertex weight exponents (a single entry broadcasts; cone theorems
    /// use exactly one).
    pub beta: Vec<Exact>,
    /// Per-edge weight exponents (a single entry broadcasts).
    pub delta: Vec<Exact>,
    pub flags: AssumptionFlags,
    pub base: Option<BaseWindow>,
}

impl RegularityQuery {
    pub fn nonweighted(theorem: TheoremId, l: u32, s: Exact) -> Self {
        RegularityQuery {
            theorem,
            l,
            s,
            beta: vec![Exact::zero()],
            delta: vec![Exact::zero()],
            flags: AssumptionFlags::default(),
            base: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintStatus {
    Satisfied,
    Violated,
    /// The certificate does not cover the required region; nothing is known.
    Insufficient,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub name: String,
    pub status: ConstraintStatus,
    pub detail: String,
    pub citation: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub admissible: bool,
    pub constraints: Vec<Constraint>,
    pub notes: Vec<String>,
}

impl Verdict {
    fn from_constraints(constraints: Vec<Constraint>, notes: Vec<String>) -> Self {
        let admissible = constraints
            .iter()
            .all(|c| c.status == ConstraintStatus::Satisfied);
        Verdict {
            admissible,
            constraints,
            notes,
        }
    }
}

#[derive(Debug, Error)]
pub enum WindowError {
    #[error("query requires s > 1, got {0}")]
    BadS(Exact),
    #[error("weak theorems use l = 1, got l = {0}")]
    WeakLevel(u32),
    #[error("lift checks need l >= 2 (or an explicit base window), got l = {0}")]
    LiftLevel(u32),
    #[error("theorem {0:?} is not handled by this entry point")]
    WrongTheorem(TheoremId),
    #[error("missing exponent bound for some edge: {edges} edges, {mus} bounds")]
    MissingMu { edges: usize, mus: usize },
    #[error("bounded-domain check needs one certificate per vertex: {vertices} vertices, {certs} certificates")]
    MissingCertificate { vertices: usize, certs: usize },
    #[error("cone transfer check needs a base window (sigma, beta', delta')")]
    MissingBase,
}

fn two_over(s: &Exact) -> Exact {
    Exact::from_int(2) / s.clone()
}

fn three_over(s: &Exact) -> Exact {
    Exact::from_int(3) / s.clone()
}

fn broadcast(values: &[Exact], n: usize) -> impl Iterator<Item = &Exact> {
    let single = values.len() == 1;
    (0..n).map(move |i| if single { &values[0] } else { &values[i] })
}

// ---------------------------------------------------------------------------
// Edge windows

/// The admissible open interval for `delta_k + 2/s` at integrability level `l`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaWindow {
    pub lo: Exact,
    pub hi: Exact,
    /// With a strict-lower-bound exponent the left endpoint is attainable in
    /// the limit; `s`-range inversion may close the corresponding endpoint.
    pub lo_closure_admissible: bool,
    /// At the weak level with `s = 2`, `delta = 0` (the upper endpoint) is
    /// admissible.
    pub s2_upper_closed: bool,
}

/// Window for `delta_k + 2/s` from the level and the edge exponent.
pub fn edge_window(l: u32, s: &Exact, mu: &MuBound) -> DeltaWindow {
    let l_ex = Exact::from_int(l as i64);
    let mu_ex = mu.exact_value();
    let lo = (l_ex.clone() - mu_ex).max(Exact::zero());
    DeltaWindow {
        lo_closure_admissible: mu.kind == MuKind::StrictLowerBound && lo.is_positive(),
        s2_upper_closed: l == 1 && *s == Exact::from_int(2),
        lo,
        hi: l_ex,
    }
}

/// Checks one edge window; `detail` explains the binding inequality.
fn edge_window_status(
    l: u32,
    s: &Exact,
    delta_k: &Exact,
    mu: &MuBound,
    edge_label: &str,
) -> Constraint {
    let citation = match l {
        1 => CITE_WEAK_WINDOW,
        2 => CITE_STRONG_WINDOW,
        _ => CITE_LIFT_WINDOW,
    };
    let w = delta_k.clone() + two_over(s);
    let window = edge_window(l, s, mu);
    let name = format!("edge window ({edge_label}, l = {l})");

    let upper_ok = if window.s2_upper_closed {
        w <= window.hi
    } else {
        w < window.hi
    };
    if !upper_ok {
        return Constraint {
            name,
            status: ConstraintStatus::Violated,
            detail: format!(
                "upper bound: delta + 2/s = {w} must be below {} (strict)",
                window.hi
            ),
            citation: citation.into(),
        };
    }

    let lower_ok = match mu.kind {
        MuKind::Exact => w > window.lo,
        MuKind::StrictLowerBound => {
            if window.lo.is_positive() {
                w >= window.lo
            } else {
                w.is_positive()
            }
        }
    };
    if !lower_ok {
        return Constraint {
            name,
            status: ConstraintStatus::Violated,
            detail: format!(
                "lower bound: delta + 2/s = {w} must exceed max(l - mu, 0) = {}{}",
                window.lo,
                if window.lo_closure_admissible {
                    " (attainable: mu is a strict lower bound)"
                } else {
                    ""
                }
            ),
            citation: citation.into(),
        };
    }

    let mut detail = format!("delta + 2/s = {w} lies in ({}, {})", window.lo, window.hi);
    if window.s2_upper_closed && w == window.hi {
        detail = format!("delta + 2/s = {w}: admitted by the s = 2, delta = 0 special case");
    }
    Constraint {
        name,
        status: ConstraintStatus::Satisfied,
        detail,
        citation: if window.s2_upper_closed && w == window.hi {
            format!("{CITE_S2_SPECIAL}; {CITE_S2_WEIGHTED}")
        } else {
            citation.into()
        },
    }
}

// ---------------------------------------------------------------------------
// Corner conditions over exact scalars

struct ExactCert {
    lo: Exact,
    hi: Exact,
    lo_open: bool,
    hi_open: bool,
    exceptional: Vec<Exact>,
    label: String,
    citation: String,
}

impl ExactCert {
    fn from(cert: &StripCertificate, label: String) -> Self {
        ExactCert {
            lo: Exact::from_f64(cert.re_lo).expect("finite strip bound"),
            hi: Exact::from_f64(cert.re_hi).expect("finite strip bound"),
            lo_open: cert.lo_open,
            hi_open: cert.hi_open,
            exceptional: cert
                .exceptional_eigenvalues
                .iter()
                .map(|&e| Exact::from_f64(e).expect("finite eigenvalue"))
                .collect(),
            label,
            citation: cert.citation.clone(),
        }
    }

    fn covers(&self, x: &Exact) -> bool {
        let lo_ok = if self.lo_open { *x > self.lo } else { *x >= self.lo };
        let hi_ok = if self.hi_open { *x < self.hi } else { *x <= self.hi };
        lo_ok && hi_ok
    }

    fn strip_desc(&self) -> String {
        format!(
            "{}{}, {}{}",
            if self.lo_open { "(" } else { "[" },
            self.lo,
            self.hi,
            if self.hi_open { ")" } else { "]" }
        )
    }

    fn classify_line(&self, x: &Exact, name: String) -> Constraint {
        if !self.covers(x) {
            return Constraint {
                name,
                status: ConstraintStatus::Insufficient,
                detail: format!(
                    "line Re lambda = {x} exits certified strip {} ({})",
                    self.strip_desc(),
                    self.label
                ),
                citation: self.citation.clone(),
            };
        }
        if let Some(e) = self.exceptional.iter().find(|e| *e == x) {
            return Constraint {
                name,
                status: ConstraintStatus::Violated,
                detail: format!("line Re lambda = {x} hits the exceptional eigenvalue {e}"),
                citation: self.citation.clone(),
            };
        }
        Constraint {
            name,
            status: ConstraintStatus::Satisfied,
            detail: format!("line Re lambda = {x} certified free ({})", self.label),
            citation: self.citation.clone(),
        }
    }

    /// Closed strip `[a, b]` (callers pass `a <= b`).
    fn classify_strip(&self, a: &Exact, b: &Exact, name: String, citation: &str) -> Constraint {
        for (end, which) in [(a, "lower"), (b, "upper")] {
            if !self.covers(end) {
                return Constraint {
                    name,
                    status: ConstraintStatus::Insufficient,
                    detail: format!(
                        "strip endpoint Re lambda = {end} ({which}) exits certified strip {} ({})",
                        self.strip_desc(),
                        self.label
                    ),
                    citation: format!("{}; {}", citation, self.citation),
                };
            }
        }
        let crossed: Vec<String> = self
            .exceptional
            .iter()
            .filter(|e| **e >= *a && **e <= *b)
            .map(|e| e.to_string())
            .collect();
        if !crossed.is_empty() {
            // Reported as the full list of eigenvalue lines crossed, which is
            // exactly the data a singular-term decomposition would be indexed
            // by.
            return Constraint {
                name,
                status: ConstraintStatus::Violated,
                detail: format!(
                    "closed strip [{a}, {b}] contains the exceptional eigenvalue{} {}",
                    if crossed.len() == 1 { "" } else { "s" },
                    crossed.join(", ")
                ),
                citation: format!("{}; {}", citation, self.citation),
            };
        }
        Constraint {
            name,
            status: ConstraintStatus::Satisfied,
            detail: format!("closed strip [{a}, {b}] certified free ({})", self.label),
            citation: citation.into(),
        }
    }
}

fn flag_constraint(name: &str, attested: bool, detail: &str, citation: &str) -> Constraint {
    Constraint {
        name: name.into(),
        status: if attested {
            ConstraintStatus::Satisfied
        } else {
            ConstraintStatus::Violated
        },
        detail: if attested {
            format!("attested: {detail}")
        } else {
            format!("not attested: {detail}")
        },
        citation: citation.into(),
    }
}

fn validate_query(q: &RegularityQuery, mus: &[MuBound]) -> Result<(), WindowError> {
    if q.s <= Exact::from_int(1) {
        return Err(WindowError::BadS(q.s.clone()));
    }
    if q.delta.len() != 1 && q.delta.len() != mus.len() {
        return Err(WindowError::MissingMu {
            edges: q.delta.len(),
            mus: mus.len(),
        });
    }
    if mus.is_empty() {
        return Err(WindowError::MissingMu { edges: 0, mus: 0 });
    }
    Ok(())
}

fn edge_constraints(
    l: u32,
    s: &Exact,
    delta: &[Exact],
    mus: &[MuBound],
    label: &str,
) -> Vec<Constraint> {
    broadcast(delta, mus.len())
        .zip(mus.iter())
        .enumerate()
        .map(|(k, (d, mu))| edge_window_status(l, s, d, mu, &format!("{label}{k}")))
        .collect()
}

/// Per-edge requirements on `g` for level-`l` lifts: at `delta_k + 2/s = l-1`
/// the trace of `g` on the edge is defined only in the limiting integral
/// sense, below that it must vanish.
fn g_flag_constraints(q: &RegularityQuery, mus_len: usize) -> Vec<Constraint> {
    let mut need_condg = false;
    let mut need_zero_trace = false;
    let lm1 = Exact::from_int(q.l as i64 - 1);
    for d in broadcast(&q.delta, mus_len) {
        let w = d.clone() + two_over(&q.s);
        if w == lm1 {
            need_condg = true;
        } else if w < lm1 {
            need_zero_trace = true;
        }
    }
    let mut out = Vec::new();
    if need_condg {
        out.push(flag_constraint(
            "g weighted integrability",
            q.flags.condg_0_3,
            "delta + 2/s = l - 1 on some edge: g needs the weighted integrability condition",
            CITE_G_FLAGS,
        ));
    }
    if need_zero_trace {
        out.push(flag_constraint(
            "g edge trace",
            q.flags.g_edge_trace_zero,
            "delta + 2/s < l - 1 on some edge: g must vanish on the edges",
            CITE_G_FLAGS,
        ));
    }
    out
}

/// Existence of strong cone solutions: line condition, level-2 edge windows,
/// and the attested edge compatibility.
pub fn check_strong_cone(
    q: &RegularityQuery,
    mus: &[MuBound],
    cone_cert: &StripCertificate,
) -> Result<Verdict, WindowError> {
    if q.theorem != TheoremId::StrongCone {
        return Err(WindowError::WrongTheorem(q.theorem));
    }
    validate_query(q, mus)?;
    let beta = &q.beta[0];
    let line = Exact::from_int(2) - beta.clone() - three_over(&q.s);
    let cert = ExactCert::from(cone_cert, "cone vertex".into());

    let mut constraints = vec![{
        let mut c = cert.classify_line(&line, "(i) pencil line Re lambda = 2 - beta - 3/s".into());
        c.citation = format!("{CITE_STRONG_LINE}; {}", c.citation);
        c
    }];
    constraints.extend(edge_constraints(2, &q.s, &q.delta, mus, "(ii) edge M"));
    constraints.push(flag_constraint(
        "(iii) edge compatibility",
        q.flags.compat_iii,
        "boundary data admits the edge-trace reduction",
        CITE_COMPAT_III,
    ));
    Ok(Verdict::from_constraints(constraints, Vec::new()))
}

/// Weak solutions: the cone form checks one spectral line, the bounded form
/// checks the closed strip anchored at `Re lambda = -1/2` against every
/// vertex certificate.
pub fn check_weak(
    q: &RegularityQuery,
    mus: &[MuBound],
    certs: &[StripCertificate],
) -> Result<Verdict, WindowError> {
    if q.l != 1 {
        return Err(WindowError::WeakLevel(q.l));
    }
    validate_query(q, mus)?;
    let mut constraints = Vec::new();
    let mut notes = Vec::new();

    match q.theorem {
        TheoremId::WeakCone => {
            let cert = certs.first().ok_or(WindowError::MissingCertificate {
                vertices: 1,
                certs: 0,
            })?;
            let line = Exact::from_int(1) - q.beta[0].clone() - three_over(&q.s);
            constraints.push(
                ExactCert::from(cert, "cone vertex".into())
                    .classify_line(&line, "(i) pencil line Re lambda = 1 - beta - 3/s".into()),
            );
        }
        TheoremId::WeakBounded => {
            if certs.is_empty() || (q.beta.len() != 1 && q.beta.len() != certs.len()) {
                return Err(WindowError::MissingCertificate {
                    vertices: q.beta.len(),
                    certs: certs.len(),
                });
            }
            let minus_half = Exact::ratio(-1, 2);
            for (j, (beta, cert)) in broadcast(&q.beta, certs.len()).zip(certs.iter()).enumerate() {
                let x = Exact::from_int(1) - beta.clone() - three_over(&q.s);
                let (a, b) = if x < minus_half {
                    (x.clone(), minus_half.clone())
                } else {
                    (minus_half.clone(), x.clone())
                };
                constraints.push(ExactCert::from(cert, format!("vertex {j}")).classify_strip(
                    &a,
                    &b,
                    format!("(i) vertex strip, vertex {j}"),
                    CITE_WEAK_BOUNDED_STRIP,
                ));
            }
        }
        other => return Err(WindowError::WrongTheorem(other)),
    }

    constraints.extend(edge_constraints(1, &q.s, &q.delta, mus, "(ii) edge M"));
    if q.s == Exact::from_int(2) {
        notes.push(format!(
            "s = 2: edge windows evaluated with the special case ({CITE_S2_SPECIAL}; {CITE_S2_WEIGHTED})"
        ));
    }
    constraints.push(flag_constraint(
        "(iii) trace compatibility",
        q.flags.compat_iii,
        "boundary traces satisfy the edge matching conditions",
        CITE_COMPAT_III,
    ));
    if q.theorem == TheoremId::WeakBounded {
        constraints.push(flag_constraint(
            "solvability preconditions",
            q.flags.solvability_5_4_5_5,
            "data balance and rigid-motion orthogonality of the weak problem",
            CITE_SOLVABILITY,
        ));
    }
    Ok(Verdict::from_constraints(constraints, notes))
}

/// Regularity lifts.  The cone form takes an explicit base window and checks
/// the closed strip between the base and target spectral lines; the bounded
/// form anchors the strip at `Re lambda = -1/2`.
pub fn check_lift(
    q: &RegularityQuery,
    mus: &[MuBound],
    certs: &[StripCertificate],
) -> Result<Verdict, WindowError> {
    validate_query(q, mus)?;
    let mut constraints = Vec::new();
    let notes = Vec::new();

    match q.theorem {
        TheoremId::LiftCone => {
            let base = q.base.as_ref().ok_or(WindowError::MissingBase)?;
            let cert = certs.first().ok_or(WindowError::MissingCertificate {
                vertices: 1,
                certs: 0,
            })?;
            let x_base =
                Exact::from_int(base.l as i64) - base.beta.clone() - three_over(&base.sigma);
            let x_tgt = Exact::from_int(q.l as i64) - q.beta[0].clone() - three_over(&q.s);
            let (a, b) = if x_base <= x_tgt {
                (x_base, x_tgt)
            } else {
                (x_tgt, x_base)
            };
            constraints.push(ExactCert::from(cert, "cone vertex".into()).classify_strip(
                &a,
                &b,
                "(i) strip between the base and target lines".into(),
                CITE_LIFT_CONE_STRIP,
            ));
            constraints.extend(edge_constraints(
                base.l,
                &base.sigma,
                &base.delta,
                mus,
                "(ii) base edge M",
            ));
        }
        TheoremId::LiftBounded => {
            if q.l < 2 {
                return Err(WindowError::LiftLevel(q.l));
            }
            if certs.is_empty() || (q.beta.len() != 1 && q.beta.len() != certs.len()) {
                return Err(WindowError::MissingCertificate {
                    vertices: q.beta.len(),
                    certs: certs.len(),
                });
            }
            let minus_half = Exact::ratio(-1, 2);
            for (j, (beta, cert)) in broadcast(&q.beta, certs.len()).zip(certs.iter()).enumerate() {
                let x = Exact::from_int(q.l as i64) - beta.clone() - three_over(&q.s);
                let (a, b) = if x < minus_half {
                    (x.clone(), minus_half.clone())
                } else {
                    (minus_half.clone(), x.clone())
                };
                constraints.push(ExactCert::from(cert, format!("vertex {j}")).classify_strip(
                    &a,
                    &b,
                    format!("(i) vertex strip, vertex {j}"),
                    CITE_LIFT_BOUNDED_STRIP,
                ));
            }
        }
        other => return Err(WindowError::WrongTheorem(other)),
    }

    constraints.extend(edge_constraints(q.l, &q.s, &q.delta, mus, "(ii) edge M"));
    constraints.push(flag_constraint(
        "(iii) edge compatibility",
        q.flags.compat_iii,
        "boundary data admits the edge-trace reduction at the lifted level",
        CITE_COMPAT_III,
    ));
    if q.l >= 2 {
        constraints.extend(g_flag_constraints(q, mus.len()));
    }
    Ok(Verdict::from_constraints(constraints, notes))
}

// ---------------------------------------------------------------------------
// Inversion: admissible s-ranges

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SBound {
    pub value: Exact,
    pub open: bool,
    pub origin: String,
}

/// An admissible `s`-interval with exact endpoints and inclusivity flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SRange {
    pub empty: bool,
    pub lo: Exact,
    pub lo_open: bool,
    pub hi: Option<Exact>,
    pub hi_open: bool,
    /// Isolated interior values removed by exceptional-eigenvalue lines
    /// (cone line conditions only).
    pub excluded: Vec<Exact>,
    pub lo_origin: String,
    pub hi_origin: String,
    pub notes: Vec<String>,
    pub required_flags: Vec<FlagRequirement>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlagRequirement {
    pub flag: String,
    pub condition: String,
    pub citation: String,
}

impl SRange {
    pub fn contains(&self, s: &Exact) -> bool {
        if self.empty {
            return false;
        }
        let lo_ok = if self.lo_open { *s > self.lo } else { *s >= self.lo };
        let hi_ok = match &self.hi {
            None => true,
            Some(hi) => {
                if self.hi_open {
                    *s < *hi
                } else {
                    *s <= *hi
                }
            }
        };
        lo_ok && hi_ok && !self.excluded.contains(s)
    }
}

struct RangeBuilder {
    lowers: Vec<SBound>,
    uppers: Vec<SBound>,
    punctures: Vec<Exact>,
    empty_reason: Option<String>,
    notes: Vec<String>,
    flags: Vec<FlagRequirement>,
}

impl RangeBuilder {
    fn new() -> Self {
        RangeBuilder {
            lowers: vec![SBound {
                value: Exact::from_int(1),
                open: true,
                origin: "integrability requires s > 1".into(),
            }],
            uppers: Vec::new(),
            punctures: Vec::new(),
            empty_reason: None,
            notes: Vec::new(),
            flags: Vec::new(),
        }
    }

    fn lower(&mut self, value: Exact, open: bool, origin: String) {
        self.lowers.push(SBound { value, open, origin });
    }

    fn upper(&mut self, value: Exact, open: bool, origin: String) {
        self.uppers.push(SBound { value, open, origin });
    }

    fn finish(mut self) -> SRange {
        // Tightest lower: largest value; on ties an open bound dominates.
        let mut lo = self.lowers.remove(0);
        for b in self.lowers {
            if b.value > lo.value || (b.value == lo.value && b.open && !lo.open) {
                lo = b;
            }
        }
        let mut hi: Option<SBound> = None;
        for b in self.uppers {
            hi = Some(match hi {
                None => b,
                Some(h) => {
                    if b.value < h.value || (b.value == h.value && b.open && !h.open) {
                        b
                    } else {
                        h
                    }
                }
            });
        }
        let mut empty = self.empty_reason.is_some();
        if let Some(reason) = self.empty_reason {
            self.notes.push(reason);
        }
        if let Some(h) = &hi {
            if h.value < lo.value || (h.value == lo.value && (h.open || lo.open)) {
                empty = true;
            }
        }
        let strictly_inside = |x: &Exact, lo: &SBound, hi: &Option<SBound>| -> bool {
            let above = if lo.open { x > &lo.value } else { x >= &lo.value };
            let below = match hi {
                None => true,
                Some(h) => {
                    if h.open {
                        x < &h.value
                    } else {
                        x <= &h.value
                    }
                }
            };
            above && below
        };
        let mut excluded: Vec<Exact> = self
            .punctures
            .into_iter()
            .filter(|x| !empty && strictly_inside(x, &lo, &hi))
            .collect();
        excluded.sort();
        excluded.dedup();
        SRange {
            empty,
            lo_origin: lo.origin,
            lo: lo.value,
            lo_open: lo.open,
            hi_origin: hi.as_ref().map(|h| h.origin.clone()).unwrap_or_default(),
            hi_open: hi.as_ref().map(|h| h.open).unwrap_or(false),
            hi: hi.map(|h| h.value),
            excluded,
            notes: self.notes,
            required_flags: self.flags,
        }
    }
}

/// Bounds on `s` from requiring `x(s) = l - 3/s` to stay inside the
/// certificate; shared by the line and strip forms.
fn coverage_bounds(b: &mut RangeBuilder, cert: &ExactCert, l: u32, label: &str) {
    let l_ex = Exact::from_int(l as i64);
    if l_ex <= cert.lo {
        b.empty_reason = Some(format!(
            "{label}: the line l - 3/s never reaches the certified strip (l <= {})",
            cert.lo
        ));
        return;
    }
    // x(s) >= lo  <=>  s >= 3/(l - lo)
    let s_lo = Exact::from_int(3) / (l_ex.clone() - cert.lo.clone());
    b.lower(
        s_lo,
        cert.lo_open,
        format!("{label}: line l - 3/s must not fall below the certified strip"),
    );
    if l_ex > cert.hi {
        let s_hi = Exact::from_int(3) / (l_ex - cert.hi.clone());
        b.upper(
            s_hi,
            cert.hi_open,
            format!("{label}: line l - 3/s must not exceed the certified strip"),
        );
    }
}

/// Inverts a theorem's conditions into the admissible nonweighted `s`-range
/// (`beta = 0`, `delta = 0`).  Vertices without certificates contribute no
/// corner bound; the provenance notes say so.
pub fn max_s_range(
    theorem: TheoremId,
    l: u32,
    mus: &[MuBound],
    certs: &[StripCertificate],
) -> SRange {
    let mut b = RangeBuilder::new();
    let l_ex = Exact::from_int(l as i64);

    // Edge upper window: 2/s < l.
    if l == 1 {
        b.lower(
            Exact::from_int(2),
            true,
            "edge window upper bound 2/s < 1".into(),
        );
        b.notes.push(format!(
            "s = 2 itself is admissible with delta = 0 via the special case ({CITE_S2_SPECIAL})"
        ));
    }

    // Edge exponent bounds.
    for (k, mu) in mus.iter().enumerate() {
        let mu_ex = mu.exact_value();
        if mu_ex >= l_ex {
            continue;
        }
        let bound = Exact::from_int(2) / (l_ex.clone() - mu_ex.clone());
        match mu.kind {
            MuKind::Exact => b.upper(
                bound,
                true,
                format!("edge {k}: 2/s > l - mu with mu = {} exactly", mu.value),
            ),
            MuKind::StrictLowerBound => b.upper(
                bound,
                false,
                format!("edge {k}: 2/s >= l - mu0 with strict lower bound mu > {mu_ex}"),
            ),
        }
    }

    // Corner bounds.
    if certs.is_empty() {
        b.notes
            .push("no vertex certificates supplied; corner condition unconstrained".into());
    }
    let line_form = matches!(theorem, TheoremId::StrongCone | TheoremId::WeakCone);
    for (j, cert) in certs.iter().enumerate() {
        let cert = ExactCert::from(cert, format!("vertex {j}"));
        let label = format!("vertex {j}");
        coverage_bounds(&mut b, &cert, l, &label);
        let minus_half = Exact::ratio(-1, 2);
        if !line_form {
            if !cert.covers(&minus_half) {
                b.empty_reason = Some(format!(
                    "{label}: certificate does not cover the base line Re lambda = -1/2"
                ));
            }
            if cert.exceptional.contains(&minus_half) {
                b.empty_reason = Some(format!(
                    "{label}: the base line Re lambda = -1/2 is an exceptional eigenvalue"
                ));
            }
        }
        for e in &cert.exceptional {
            if l_ex <= *e {
                continue;
            }
            let s_star = Exact::from_int(3) / (l_ex.clone() - e.clone());
            if line_form {
                b.punctures.push(s_star);
            } else if *e > minus_half {
                b.upper(
                    s_star,
                    true,
                    format!("{label}: strip must stay below the exceptional eigenvalue {e}"),
                );
            } else if *e < minus_half {
                b.lower(
                    s_star,
                    true,
                    format!("{label}: strip must stay above the exceptional eigenvalue {e}"),
                );
            }
        }
    }

    let mut range = b.finish();

    // Flag requirements surfaced for nonweighted lifts, attached only where
    // they intersect the computed interval.
    if l >= 2 && !range.empty {
        let s_condg = Exact::from_int(2) / Exact::from_int(l as i64 - 1);
        if range.contains(&s_condg) {
            range.required_flags.push(FlagRequirement {
                flag: "condg_0_3".into(),
                condition: format!(
                    "required at s = {s_condg} (edge trace of g in the limiting integral sense)"
                ),
                citation: CITE_G_FLAGS.into(),
            });
        }
        let extends_past = match &range.hi {
            None => true,
            Some(hi) => *hi > s_condg,
        };
        if extends_past {
            range.required_flags.push(FlagRequirement {
                flag: "g_edge_trace_zero".into(),
                condition: format!("required for s > {s_condg}"),
                citation: CITE_G_FLAGS.into(),
            });
        }
    }

    range
}

// ---------------------------------------------------------------------------
// Compatibility checklist

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CompatScope {
    Edge(String),
    Global,
}

/// One named compatibility condition the user must attest; never evaluated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompatRequirement {
    pub scope: CompatScope,
    pub condition_id: String,
    pub statement: String,
    pub citation: String,
}

const CITE_DIRICHLET_TRACE: &str = r"$h_{k_+}|_{M_k} = h_{k_-}|_{M_k}$";
const CITE_DIRICHLET_DERIVATIVE: &str = r"$n_{k_-}\cdot (\partial_r h_{k_+})|_{M_k} + n_{k_+}\cdot (\partial_r h_{k_-})|_{M_k} = \big( g|_{M_k} + \partial_t(h_{k_+}\cdot e_k)|_{M_k}\big)\, \sin\theta_k$";
const CITE_GENERALIZED_TRACE: &str = r"generalized trace condition";
const CITE_NEUMANN_MATCH: &str = r"$\phi^+\cdot n^- = \phi^-\cdot n^+ \ \mbox{ on }M$";
const CITE_RANGE_CONDITION: &str = r"$Ah^+|_M = Bh^-|_M$";
const CITE_NORMAL_MATCH_02: &str = r"$h^-\cdot n^+ = h^+$";
const CITE_DERIVATIVE_02: &str = r"$\partial_r h^+\, \cos 2\theta - (2n^+\cos\theta\, + n^-)\, \partial_r h^- + 2\sin^2\theta\, (\phi_1^+\cos\theta/2 + \phi_2^+\sin\theta/2) + \frac 12 (g+\partial_{x_3}h_3^-)\, \sin 2\theta=0$";
const CITE_EVEN_EXTRA: &str = r"holds only under additional compatibility conditions on the functions $h^\pm$, $\phi^\pm$ and $g$";
const CITE_DIVERGENCE_BALANCE: &str = r"$\int_{\cal G} g\, dx + \sum_{j:\, d_j=0} \int_{\Gamma_j} h_j\cdot n\, dx + \sum_{j:\, d_j=2} \int_{\Gamma_j} h_j\, dx =0$";

/// Lists, per edge and globally, the compatibility conditions the data must
/// satisfy for the checked theorems to apply.  Items are attestations with
/// citations; nothing is evaluated on data.
pub fn compatibility_requirements(model: &DomainModel) -> Vec<CompatRequirement> {
    let mut out = Vec::new();
    let edge_item = |edge: &str, id: &str, statement: &str, citation: &str| CompatRequirement {
        scope: CompatScope::Edge(edge.to_string()),
        condition_id: id.to_string(),
        statement: statement.to_string(),
        citation: citation.to_string(),
    };

    for edge in &model.edges {
        let Some((bp, bm)) = model.edge_bc(edge) else {
            continue;
        };
        let pair = (bp.code().min(bm.code()), bp.code().max(bm.code()));
        match pair {
            (0, 0) => {
                out.push(edge_item(
                    &edge.id,
                    "dirichlet-trace-match",
                    "velocity traces from both faces agree on the edge",
                    CITE_DIRICHLET_TRACE,
                ));
                out.push(edge_item(
                    &edge.id,
                    "dirichlet-normal-derivative",
                    "normal derivatives of the velocity data balance the divergence datum on the edge (limiting weights: in the generalized trace sense)",
                    CITE_DIRICHLET_DERIVATIVE,
                ));
                out.push(edge_item(
                    &edge.id,
                    "dirichlet-generalized-trace",
                    "at the limiting weight delta + 2/s = 1 the derivative relation is required in integral form",
                    CITE_GENERALIZED_TRACE,
                ));
            }
            (3, 3) => out.push(edge_item(
                &edge.id,
                "neumann-traction-match",
                "traction data from both faces agree against the opposite normals on the edge",
                CITE_NEUMANN_MATCH,
            )),
            (0, 2) => {
                out.push(edge_item(
                    &edge.id,
                    "normal-velocity-trace-match",
                    "the normal-velocity datum equals the normal component of the velocity trace on the edge",
                    CITE_NORMAL_MATCH_02,
                ));
                out.push(edge_item(
                    &edge.id,
                    "mixed-02-derivative-relation",
                    "the derivative-level relation among h, phi and g on the edge",
                    CITE_DERIVATIVE_02,
                ));
            }
            (0, 1) | (1, 2) => out.push(edge_item(
                &edge.id,
                "velocity-trace-range",
                "the pair of velocity traces lies in the range of the edge trace operator",
                CITE_RANGE_CONDITION,
            )),
            (0, 3) | (2, 3) => {
                // Velocity data on one side only and odd pair sum: the trace
                // matching is vacuous and the reduction needs no extra condition.
            }
            _ => out.push(edge_item(
                &edge.id,
                "additional-edge-compatibility",
                "the edge trace system for (b, c, d, q) must be solvable for the given data",
                CITE_EVEN_EXTRA,
            )),
        }
    }

    let all_velocity_type = !model.faces.is_empty()
        && model
            .faces
            .iter()
            .all(|f| matches!(f.bc.code(), 0 | 2));
    if all_velocity_type {
        out.push(CompatRequirement {
            scope: CompatScope::Global,
            condition_id: "divergence-data-balance".into(),
            statement: "the divergence datum and the normal boundary fluxes balance".into(),
            citation: CITE_DIVERGENCE_BALANCE.into(),
        });
    }
    let has_dirichlet_face = model.faces.iter().any(|f| f.bc == BcKind::DIRICHLET);
    if !has_dirichlet_face {
        out.push(CompatRequirement {
            scope: CompatScope::Global,
            condition_id: "functional-annihilates-rigid-motions".into(),
            statement: "the load functional vanishes on rigid motions compatible with the velocity constraints".into(),
            citation: CITE_SOLVABILITY.into(),
        });
    }
    out
}
