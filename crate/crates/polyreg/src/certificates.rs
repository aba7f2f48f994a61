//! Eigenvalue-strip certificates for the vertex pencils.
//!
//! No numerical solve of the three-dimensional cone pencil happens here.  A
//! certificate is a citable, sufficient assertion that a real-part strip is
//! free of vertex-pencil eigenvalues (possibly minus a listed exceptional
//! set), produced by matching the vertex's boundary-condition configuration
//! against a small rule table, or adopted verbatim from a user override.

use crate::geometry::BcKind;
use crate::pencil::BcPair;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const RULE_ALL_DIRICHLET: &str = "all_dirichlet";
pub const RULE_ALL_DIRICHLET_CONVEX: &str = "all_dirichlet_convex";
pub const RULE_ALL_NEUMANN: &str = "all_neumann";
pub const RULE_MIXED_DIRICHLET_ADJACENT: &str = "mixed_dirichlet_adjacent";
pub const RULE_CONVEX_COND_II_FACE: &str = "convex_cond_ii_face";
pub const RULE_USER: &str = "user";

const CITE_ALL_DIRICHLET: &str =
    r"no eigenvalues of the pencils ${\mathfrak A}_j(\lambda)$ in the strip $-1 \le \mbox{Re}\, \lambda \le 0$";
const CITE_ALL_DIRICHLET_CONVEX: &str = r"even the strip $-2 < \mbox{Re}\, \lambda < 1$";
const CITE_ALL_NEUMANN: &str = r"contains only the eigenvalues $\lambda=0$ and $\lambda=1$";
const CITE_MIXED_DIRICHLET_ADJACENT: &str =
    r"the strip $-1\le \mbox{Re}\, \lambda\le 0$ is free of eigenvalues";
const CITE_CONVEX_COND_II_FACE: &str =
    r"$-1/2\le \mbox{Re}\, \lambda <1$ is free of eigenvalues";

/// Assertion that `(re_lo, re_hi)` (with the stated endpoint openness) is
/// free of vertex-pencil eigenvalues except for `exceptional_eigenvalues`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StripCertificate {
    pub re_lo: f64,
    pub re_hi: f64,
    /// `true` when the strip's lower endpoint is *not* certified free.
    pub lo_open: bool,
    /// `true` when the strip's upper endpoint is *not* certified free.
    pub hi_open: bool,
    /// Real eigenvalues known to lie inside the strip.
    pub exceptional_eigenvalues: Vec<f64>,
    pub rule_id: String,
    pub citation: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LineStatus {
    /// The line lies in the certified region and misses the exceptional set.
    Free,
    /// The line hits a known eigenvalue.
    Exceptional,
    /// The certificate says nothing about this line.
    Uncovered,
}

impl StripCertificate {
    fn check(&self) -> Result<(), CertificateError> {
        if self.re_lo >= self.re_hi || !self.re_lo.is_finite() || !self.re_hi.is_finite() {
            return Err(CertificateError::MalformedBounds {
                re_lo: self.re_lo,
                re_hi: self.re_hi,
            });
        }
        for &e in &self.exceptional_eigenvalues {
            if e < self.re_lo || e > self.re_hi {
                return Err(CertificateError::ExceptionalOutsideStrip(e));
            }
        }
        Ok(())
    }

    pub fn covers_line(&self, re: f64) -> bool {
        let lo_ok = if self.lo_open { re > self.re_lo } else { re >= self.re_lo };
        let hi_ok = if self.hi_open { re < self.re_hi } else { re <= self.re_hi };
        lo_ok && hi_ok
    }

    pub fn classify_line(&self, re: f64) -> LineStatus {
        if !self.covers_line(re) {
            LineStatus::Uncovered
        } else if self.exceptional_eigenvalues.contains(&re) {
            LineStatus::Exceptional
        } else {
            LineStatus::Free
        }
    }

    /// Width of the certified strip.
    pub fn width(&self) -> f64 {
        self.re_hi - self.re_lo
    }
}

/// Boundary-condition configuration of a vertex, plus the attestations the
/// rule table keys on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VertexConfig {
    pub vertex_id: String,
    /// Boundary kinds of the incident faces.
    pub incident_bcs: Vec<BcKind>,
    /// Boundary pairs of the incident edges.
    pub edge_pairs: Vec<BcPair>,
    pub convex: bool,
    pub lipschitz: bool,
    /// Attests that condition (ii) holds on exactly one face, the polyhedron
    /// is convex, and the angles at that face's edges are below pi/2.
    pub cond_ii_face_special: bool,
}

impl VertexConfig {
    fn all_bc(&self, bc: BcKind) -> bool {
        !self.incident_bcs.is_empty() && self.incident_bcs.iter().all(|&b| b == bc)
    }

    fn dirichlet_adjacent_each_edge(&self) -> bool {
        !self.edge_pairs.is_empty()
            && self.edge_pairs.iter().all(|p| {
                p.plus == BcKind::DIRICHLET || p.minus == BcKind::DIRICHLET
            })
    }
}

#[derive(Debug, Error)]
pub enum CertificateError {
    #[error("no applicable rule for vertex {0:?} — supply override")]
    NoApplicableRule(String),
    #[error("malformed strip bounds: re_lo = {re_lo}, re_hi = {re_hi}")]
    MalformedBounds { re_lo: f64, re_hi: f64 },
    #[error("exceptional eigenvalue {0} lies outside the strip")]
    ExceptionalOutsideStrip(f64),
}

fn certificate(
    rule_id: &str,
    citation: &str,
    re_lo: f64,
    re_hi: f64,
    lo_open: bool,
    hi_open: bool,
    exceptional: &[f64],
) -> StripCertificate {
    StripCertificate {
        re_lo,
        re_hi,
        lo_open,
        hi_open,
        exceptional_eigenvalues: exceptional.to_vec(),
        rule_id: rule_id.to_string(),
        citation: citation.to_string(),
    }
}

/// Produces a strip certificate for the vertex, or reports that no rule
/// applies.  More specific rules win: the convex all-Dirichlet strip
/// supersedes the general one, and the special condition-(ii) configuration
/// supersedes the generic mixed rule.
pub fn certify(config: &VertexConfig) -> Result<StripCertificate, CertificateError> {
    if config.all_bc(BcKind::DIRICHLET) {
        if config.convex {
            return Ok(certificate(
                RULE_ALL_DIRICHLET_CONVEX,
                CITE_ALL_DIRICHLET_CONVEX,
                -2.0,
                1.0,
                true,
                true,
                &[],
            ));
        }
        return Ok(certificate(
            RULE_ALL_DIRICHLET,
            CITE_ALL_DIRICHLET,
            -1.0,
            0.0,
            false,
            false,
            &[],
        ));
    }
    if config.all_bc(BcKind::NEUMANN) && config.lipschitz {
        // The cited statement places both 0 and 1 among the eigenvalues met
        // up to Re lambda = 1, so the certificate spans [-1, 1] minus {0, 1}.
        return Ok(certificate(
            RULE_ALL_NEUMANN,
            CITE_ALL_NEUMANN,
            -1.0,
            1.0,
            false,
            false,
            &[0.0, 1.0],
        ));
    }
    if config.cond_ii_face_special
        && config.convex
        && config
            .incident_bcs
            .iter()
            .all(|&b| b == BcKind::DIRICHLET || b == BcKind::TANGENTIAL_VELOCITY)
        && config.incident_bcs.contains(&BcKind::TANGENTIAL_VELOCITY)
    {
        return Ok(certificate(
            RULE_CONVEX_COND_II_FACE,
            CITE_CONVEX_COND_II_FACE,
            -0.5,
            1.0,
            false,
            true,
            &[],
        ));
    }
    let mixed_i_to_iii = !config.incident_bcs.is_empty()
        && config.incident_bcs.iter().all(|b| b.code() <= 2);
    if mixed_i_to_iii && config.dirichlet_adjacent_each_edge() {
        return Ok(certificate(
            RULE_MIXED_DIRICHLET_ADJACENT,
            CITE_MIXED_DIRICHLET_ADJACENT,
            -1.0,
            0.0,
            false,
            false,
            &[],
        ));
    }
    Err(CertificateError::NoApplicableRule(config.vertex_id.clone()))
}

/// User override document: bounds, openness, exceptional set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UserStrip {
    pub vertex_id: String,
    pub re_lo: f64,
    pub re_hi: f64,
    #[serde(default)]
    pub lo_open: bool,
    #[serde(default)]
    pub hi_open: bool,
    #[serde(default)]
    pub exceptional: Vec<f64>,
}

/// Adopts a user-supplied certificate over whatever the rules produced.
/// Returns the adopted certificate and any advisory warnings.
pub fn override_certificate(
    base: Option<&StripCertificate>,
    user: &UserStrip,
) -> Result<(StripCertificate, Vec<String>), CertificateError> {
    let cert = StripCertificate {
        re_lo: user.re_lo,
        re_hi: user.re_hi,
        lo_open: user.lo_open,
        hi_open: user.hi_open,
        exceptional_eigenvalues: user.exceptional.clone(),
        rule_id: RULE_USER.to_string(),
        citation: format!("user override for vertex {}", user.vertex_id),
    };
    cert.check()?;
    let mut warnings = Vec::new();
    if let Some(base) = base {
        if user.re_lo < base.re_lo || user.re_hi > base.re_hi {
            warnings.push(format!(
                "override widens certified strip: rule {} gave [{}, {}], user supplied [{}, {}]",
                base.rule_id, base.re_lo, base.re_hi, user.re_lo, user.re_hi
            ));
        }
    }
    Ok((cert, warnings))
}

/// True iff the line `Re lambda = re_value` is certified eigenvalue-free.
pub fn line_free(cert: &StripCertificate, re_value: f64) -> bool {
    cert.classify_line(re_value) == LineStatus::Free
}
