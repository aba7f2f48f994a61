//! End-to-end analysis over a domain model, and report rendering.
//!
//! A report is plain data: every numeric entry carries its provenance, the
//! effective configuration is echoed, and serialization is deterministic
//! (same input and configuration give byte-identical JSON).

use crate::certificates::{self, CertificateError, StripCertificate, UserStrip, VertexConfig};
use crate::geometry::{self, Diagnostic, DomainModel, Severity};
use crate::pencil::{self, BcPair, MuBound, PencilConfig, PencilError};
use crate::windows::{self, RegularityQuery, SRange, TheoremId, Verdict, WindowError};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct AnalysisConfig {
    #[serde(default)]
    pub pencil: PencilConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToolInfo {
    pub name: String,
    pub version: String,
}

impl Default for ToolInfo {
    fn default() -> Self {
        ToolInfo {
            name: "polyreg".into(),
            version: env!("CARGO_PKG_VERSION").into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeReport {
    pub id: String,
    pub theta: f64,
    pub theta_samples: Vec<f64>,
    pub pair: BcPair,
    pub mu: MuBound,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VertexReport {
    pub id: String,
    pub certificate: Option<StripCertificate>,
    /// Why no rule applied, when `certificate` is absent.
    pub no_rule_reason: Option<String>,
    pub override_applied: bool,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryReport {
    pub query: RegularityQuery,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SRangeReport {
    pub theorem: TheoremId,
    pub l: u32,
    pub range: SRange,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub tool: ToolInfo,
    pub config: AnalysisConfig,
    pub attestations: Vec<String>,
    pub diagnostics: Vec<Diagnostic>,
    pub edges: Vec<EdgeReport>,
    pub vertices: Vec<VertexReport>,
    pub verdicts: Vec<QueryReport>,
    pub s_ranges: Vec<SRangeReport>,
    pub checklist: Vec<windows::CompatRequirement>,
}

#[derive(Debug, Error)]
pub enum AnalyzeError {
    #[error("domain validation failed: {0:?}")]
    Validation(Vec<Diagnostic>),
    #[error(transparent)]
    Geometry(#[from] geometry::GeometryError),
    #[error(transparent)]
    Pencil(#[from] PencilError),
    #[error(transparent)]
    Certificate(#[from] CertificateError),
    #[error(transparent)]
    Window(#[from] WindowError),
    #[error("cone theorems expect a single-vertex (cone) domain, found {0} vertices")]
    NotACone(usize),
    #[error("vertex {0:?} has no certificate; supply an override")]
    MissingVertexCertificate(String),
}

fn vertex_flag(model: &DomainModel, vertex: &geometry::VertexModel, flag: &str) -> bool {
    model.attests(flag) || vertex.attestations.iter().any(|a| a == flag)
}

fn build_vertex_config(model: &DomainModel, vertex: &geometry::VertexModel) -> VertexConfig {
    let incident_bcs = vertex
        .incident_faces
        .iter()
        .filter_map(|fid| model.face(fid).map(|f| f.bc))
        .collect();
    let edge_pairs = vertex
        .incident_edges
        .iter()
        .filter_map(|eid| model.edge(eid))
        .filter_map(|e| model.edge_bc(e).map(|(p, m)| BcPair::new(p, m)))
        .collect();
    VertexConfig {
        vertex_id: vertex.id.clone(),
        incident_bcs,
        edge_pairs,
        convex: vertex_flag(model, vertex, "convex"),
        lipschitz: vertex_flag(model, vertex, "lipschitz") || vertex_flag(model, vertex, "Lipschitz"),
        cond_ii_face_special: vertex_flag(model, vertex, "cond_ii_face_special"),
    }
}

/// Runs the full pipeline: validation, per-edge exponents, per-vertex
/// certificates (with overrides), the requested queries, their `s`-range
/// inversions, and the compatibility checklist.
pub fn analyze(
    model: &DomainModel,
    config: &AnalysisConfig,
    overrides: &[UserStrip],
    queries: &[RegularityQuery],
) -> Result<AnalysisReport, AnalyzeError> {
    let diagnostics = geometry::validate(model);
    if diagnostics.iter().any(|d| d.severity == Severity::Error) {
        return Err(AnalyzeError::Validation(diagnostics));
    }

    let mut edges = Vec::new();
    for edge in &model.edges {
        let (bc_p, bc_m) = model
            .edge_bc(edge)
            .expect("validated model has resolvable faces");
        let pair = BcPair::new(bc_p, bc_m);
        let mu = pencil::mu_infimum(pair, edge.angles(), &config.pencil)?;
        edges.push(EdgeReport {
            id: edge.id.clone(),
            theta: edge.theta,
            theta_samples: edge.theta_samples.clone(),
            pair,
            mu,
        });
    }

    let mut vertices = Vec::new();
    for vertex in &model.vertices {
        let vc = build_vertex_config(model, vertex);
        let rule_result = certificates::certify(&vc);
        let user = overrides.iter().find(|o| o.vertex_id == vertex.id);
        let (certificate, no_rule_reason, override_applied, warnings) = match (rule_result, user) {
            (Ok(cert), None) => (Some(cert), None, false, Vec::new()),
            (Ok(cert), Some(user)) => {
                let (adopted, warnings) = certificates::override_certificate(Some(&cert), user)?;
                (Some(adopted), None, true, warnings)
            }
            (Err(e), Some(user)) => {
                let (adopted, warnings) = certificates::override_certificate(None, user)?;
                (Some(adopted), Some(e.to_string()), true, warnings)
            }
            (Err(e), None) => (None, Some(e.to_string()), false, Vec::new()),
        };
        vertices.push(VertexReport {
            id: vertex.id.clone(),
            certificate,
            no_rule_reason,
            override_applied,
            warnings,
        });
    }

    let mus: Vec<MuBound> = edges.iter().map(|e| e.mu.clone()).collect();
    let available_certs: Vec<StripCertificate> = vertices
        .iter()
        .filter_map(|v| v.certificate.clone())
        .collect();

    let mut verdicts = Vec::new();
    let mut s_ranges = Vec::new();
    for query in queries {
        let verdict = run_query(query, &mus, &vertices)?;
        s_ranges.push(SRangeReport {
            theorem: query.theorem,
            l: query.l,
            range: windows::max_s_range(query.theorem, query.l, &mus, &available_certs),
        });
        verdicts.push(QueryReport {
            query: query.clone(),
            verdict,
        });
    }

    Ok(AnalysisReport {
        tool: ToolInfo::default(),
        config: config.clone(),
        attestations: model.attestations.clone(),
        diagnostics,
        edges,
        vertices,
        verdicts,
        s_ranges,
        checklist: windows::compatibility_requirements(model),
    })
}

fn run_query(
    query: &RegularityQuery,
    mus: &[MuBound],
    vertices: &[VertexReport],
) -> Result<Verdict, AnalyzeError> {
    let cone_form = matches!(
        query.theorem,
        TheoremId::StrongCone | TheoremId::WeakCone | TheoremId::LiftCone
    );
    if cone_form && vertices.len() != 1 {
        return Err(AnalyzeError::NotACone(vertices.len()));
    }
    let mut certs = Vec::new();
    for v in vertices {
        match &v.certificate {
            Some(c) => certs.push(c.clone()),
            None => return Err(AnalyzeError::MissingVertexCertificate(v.id.clone())),
        }
    }
    let verdict = match query.theorem {
        TheoremId::StrongCone => windows::check_strong_cone(query, mus, &certs[0])?,
        TheoremId::WeakCone | TheoremId::WeakBounded => windows::check_weak(query, mus, &certs)?,
        TheoremId::LiftCone | TheoremId::LiftBounded => windows::check_lift(query, mus, &certs)?,
    };
    Ok(verdict)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RenderFormat {
    Json,
    Text,
}

/// Renders a report.  JSON output is schema-stable and round-trips; text
/// output quotes the supporting citation for every constraint that is not
/// satisfied.
pub fn render(report: &AnalysisReport, format: RenderFormat) -> String {
    match format {
        RenderFormat::Json => {
            serde_json::to_string_pretty(report).expect("report serialization cannot fail")
        }
        RenderFormat::Text => render_text(report),
    }
}

fn render_text(report: &AnalysisReport) -> String {
    use std::fmt::Write;
    let mut out = String::new();
    let _ = writeln!(out, "{} {}", report.tool.name, report.tool.version);
    if !report.diagnostics.is_empty() {
        let _ = writeln!(out, "\ndiagnostics:");
        for d in &report.diagnostics {
            let _ = writeln!(out, "  [{:?}] {}: {}", d.severity, d.entity, d.message);
        }
    }
    let _ = writeln!(out, "\nedge exponents:");
    let _ = writeln!(out, "  {:<12} {:>12} {:>8} {:>12} source", "edge", "theta", "pair", "mu");
    for e in &report.edges {
        let _ = writeln!(
            out,
            "  {:<12} {:>12.8} {:>8} {:>12.8} {:?}",
            e.id,
            e.theta,
            e.pair.to_string(),
            e.mu.value,
            e.mu.source
        );
    }
    let _ = writeln!(out, "\nvertex certificates:");
    for v in &report.vertices {
        match &v.certificate {
            Some(c) => {
                let _ = writeln!(
                    out,
                    "  {}: {}{}, {}{} minus {:?} (rule {})",
                    v.id,
                    if c.lo_open { "(" } else { "[" },
                    c.re_lo,
                    c.re_hi,
                    if c.hi_open { ")" } else { "]" },
                    c.exceptional_eigenvalues,
                    c.rule_id
                );
            }
            None => {
                let _ = writeln!(
                    out,
                    "  {}: no certificate ({})",
                    v.id,
                    v.no_rule_reason.as_deref().unwrap_or("unknown")
                );
            }
        }
        for w in &v.warnings {
            let _ = writeln!(out, "    warning: {w}");
        }
    }
    for q in &report.verdicts {
        let _ = writeln!(
            out,
            "\nquery {:?} (l = {}, s = {}): {}",
            q.query.theorem,
            q.query.l,
            q.query.s,
            if q.verdict.admissible { "ADMISSIBLE" } else { "NOT ADMISSIBLE" }
        );
        for c in &q.verdict.constraints {
            let _ = writeln!(out, "  [{:?}] {}: {}", c.status, c.name, c.detail);
            if c.status != windows::ConstraintStatus::Satisfied {
                let _ = writeln!(out, "      supporting statement: {}", c.citation);
            }
        }
        for n in &q.verdict.notes {
            let _ = writeln!(out, "  note: {n}");
        }
    }
    for r in &report.s_ranges {
        let hi = match &r.range.hi {
            Some(h) => h.to_string(),
            None => "inf".into(),
        };
        let _ = writeln!(
            out,
            "\nadmissible s-range for {:?} (l = {}): {}{}, {}{}{}",
            r.theorem,
            r.l,
            if r.range.lo_open { "(" } else { "[" },
            r.range.lo,
            hi,
            if r.range.hi_open || r.range.hi.is_none() { ")" } else { "]" },
            if r.range.empty { "  (empty)" } else { "" }
        );
        for n in &r.range.notes {
            let _ = writeln!(out, "  note: {n}");
        }
    }
    if !report.checklist.is_empty() {
        let _ = writeln!(out, "\ncompatibility checklist (attestations, not verified):");
        for item in &report.checklist {
            let scope = match &item.scope {
                windows::CompatScope::Edge(e) => format!("edge {e}"),
                windows::CompatScope::Global => "global".into(),
            };
            let _ = writeln!(out, "  [{scope}] {}: {}", item.condition_id, item.statement);
            let _ = writeln!(out, "      condition: {}", item.citation);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::Exact;

    fn tiny_domain() -> DomainModel {
        geometry::parse_domain(
            r#"{
              "faces": [{"id": "a", "bc": 0}, {"id": "b", "bc": 0}],
              "edges": [{"id": "e1", "faces": ["a", "b"], "theta": 1.5707963267948966,
                         "vertices": ["v1"]}],
              "vertices": [{"id": "v1", "edges": ["e1"]}]
            }"#,
        )
        .unwrap()
    }

    #[test]
    fn analyze_reports_mu_and_certificate() {
        let model = tiny_domain();
        let report = analyze(&model, &AnalysisConfig::default(), &[], &[]).unwrap();
        assert_eq!(report.edges.len(), 1);
        assert!((report.edges[0].mu.value - 2.0).abs() < 1e-12);
        assert!(report.vertices[0].certificate.is_some());
        assert!(!report.checklist.is_empty());
    }

    #[test]
    fn report_roundtrips_through_json() {
        let model = tiny_domain();
        let query = RegularityQuery::nonweighted(TheoremId::WeakBounded, 1, Exact::ratio(5, 2));
        let report = analyze(&model, &AnalysisConfig::default(), &[], &[query]).unwrap();
        let json = render(&report, RenderFormat::Json);
        let back: AnalysisReport = serde_json::from_str(&json).unwrap();
        assert_eq!(report, back);
    }

    #[test]
    fn text_render_quotes_citations_on_violation() {
        // All-Neumann single edge/vertex at s = 3 violates through the
        // exceptional eigenvalue; the text report must quote the rule.
        let model = geometry::parse_domain(
            r#"{
              "faces": [{"id": "a", "bc": 3}, {"id": "b", "bc": 3}],
              "edges": [{"id": "e1", "faces": ["a", "b"], "theta": 1.5707963267948966,
                         "vertices": ["v1"]}],
              "vertices": [{"id": "v1", "edges": ["e1"], "attestations": ["lipschitz"]}]
            }"#,
        )
        .unwrap();
        let query = RegularityQuery::nonweighted(TheoremId::WeakBounded, 1, Exact::from_int(3));
        let report = analyze(&model, &AnalysisConfig::default(), &[], &[query]).unwrap();
        assert!(!report.verdicts[0].verdict.admissible);
        let text = render(&report, RenderFormat::Text);
        assert!(text.contains("contains only the eigenvalues"), "{text}");
    }

    #[test]
    fn sampled_edge_takes_the_infimum_exponent() {
        // An edge whose opening varies from a quarter turn to the reentrant
        // three-quarter turn: the exponent is the infimum over the samples,
        // attained at the widest angle.
        let model = geometry::parse_domain(
            r#"{
              "faces": [{"id": "a", "bc": 0}, {"id": "b", "bc": 0}],
              "edges": [{"id": "e1", "faces": ["a", "b"],
                         "theta_samples": [1.5707963267948966, 4.71238898038469],
                         "vertices": []}],
              "vertices": []
            }"#,
        )
        .unwrap();
        let report = analyze(&model, &AnalysisConfig::default(), &[], &[]).unwrap();
        assert!((report.edges[0].mu.value - 0.5444837367).abs() < 1e-8);
    }

    #[test]
    fn analyze_is_deterministic() {
        let model = tiny_domain();
        let query = RegularityQuery::nonweighted(TheoremId::WeakBounded, 1, Exact::ratio(5, 2));
        let cfg = AnalysisConfig::default();
        let a = render(&analyze(&model, &cfg, &[], std::slice::from_ref(&query)).unwrap(), RenderFormat::Json);
        let b = render(&analyze(&model, &cfg, &[], std::slice::from_ref(&query)).unwrap(), RenderFormat::Json);
        assert_eq!(a, b);
    }
}
