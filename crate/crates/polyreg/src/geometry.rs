//! Polyhedral domain description: faces, edges, vertices, dihedral angles.
//!
//! The domain file gives the combinatorics (which faces meet at which edges)
//! plus, per edge, either an explicit interior angle or enough plane geometry
//! to derive one.  Everything downstream (exponents, certificates, windows)
//! depends only on the angles and the boundary-condition labels, so this
//! module is deliberately not a mesh library: it validates and normalizes,
//! nothing more.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::PI;
use thiserror::Error;

/// Boundary-condition kind on a face.
///
/// * `0` — velocity prescribed (Dirichlet),
/// * `1` — tangential velocity and normal stress,
/// * `2` — normal velocity and tangential stress,
/// * `3` — full traction (Neumann).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct BcKind(u8);

impl BcKind {
    pub const DIRICHLET: BcKind = BcKind(0);
    pub const TANGENTIAL_VELOCITY: BcKind = BcKind(1);
    pub const NORMAL_VELOCITY: BcKind = BcKind(2);
    pub const NEUMANN: BcKind = BcKind(3);

    pub fn new(code: u8) -> Result<Self, GeometryError> {
        if code <= 3 {
            Ok(BcKind(code))
        } else {
            Err(GeometryError::BadBcCode(code))
        }
    }

    pub fn code(self) -> u8 {
        self.0
    }

    /// Number of scalar conditions on the velocity trace (the stress operator
    /// supplies the remaining `code()` conditions).
    pub fn velocity_components(self) -> u8 {
        3 - self.0
    }
}

impl TryFrom<u8> for BcKind {
    type Error = GeometryError;
    fn try_from(code: u8) -> Result<Self, Self::Error> {
        BcKind::new(code)
    }
}

impl From<BcKind> for u8 {
    fn from(bc: BcKind) -> u8 {
        bc.0
    }
}

pub type Vec3 = [f64; 3];

pub fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn norm(a: Vec3) -> f64 {
    dot(a, a).sqrt()
}

pub fn normalize(a: Vec3) -> Vec3 {
    let n = norm(a);
    [a[0] / n, a[1] / n, a[2] / n]
}

/// Plane data for a face: a point on the plane and the outward unit normal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlaneData {
    pub point: Vec3,
    pub normal: Vec3,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Face {
    pub id: String,
    pub bc: BcKind,
    pub plane: Option<PlaneData>,
}

/// An edge with its two adjacent faces and interior dihedral angle.
///
/// `theta_samples` models edges along which the opening angle varies; the
/// edge exponent is then the infimum of the per-sample exponents.  A plain
/// edge carries the single angle in `theta`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeModel {
    pub id: String,
    pub face_plus: String,
    pub face_minus: String,
    pub theta: f64,
    pub theta_samples: Vec<f64>,
    /// Unit vector along the edge, oriented by the convention of
    /// [`dihedral_angle`]; required to derive `theta` from plane data.
    pub direction: Option<Vec3>,
    pub vertex_ids: Vec<String>,
}

impl EdgeModel {
    /// All angle samples for this edge (the single angle if unsampled).
    pub fn angles(&self) -> impl Iterator<Item = f64> + '_ {
        let single = if self.theta_samples.is_empty() {
            Some(self.theta)
        } else {
            None
        };
        single.into_iter().chain(self.theta_samples.iter().copied())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VertexModel {
    pub id: String,
    pub incident_edges: Vec<String>,
    pub incident_faces: Vec<String>,
    pub attestations: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainModel {
    pub faces: Vec<Face>,
    pub edges: Vec<EdgeModel>,
    pub vertices: Vec<VertexModel>,
    pub attestations: Vec<String>,
}

impl DomainModel {
    pub fn face(&self, id: &str) -> Option<&Face> {
        self.faces.iter().find(|f| f.id == id)
    }

    pub fn edge(&self, id: &str) -> Option<&EdgeModel> {
        self.edges.iter().find(|e| e.id == id)
    }

    pub fn vertex(&self, id: &str) -> Option<&VertexModel> {
        self.vertices.iter().find(|v| v.id == id)
    }

    pub fn attests(&self, what: &str) -> bool {
        self.attestations.iter().any(|a| a == what)
    }

    /// Boundary pair (bc of `face_plus`, bc of `face_minus`) at an edge.
    pub fn edge_bc(&self, edge: &EdgeModel) -> Option<(BcKind, BcKind)> {
        Some((self.face(&edge.face_plus)?.bc, self.face(&edge.face_minus)?.bc))
    }
}

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("boundary condition code {0} out of range 0..=3")]
    BadBcCode(u8),
    #[error("schema violation at {path}: {message}")]
    Schema { path: String, message: String },
    #[error("dangling {kind} id {id:?} referenced from {from}")]
    DanglingReference {
        kind: &'static str,
        id: String,
        from: String,
    },
    #[error("duplicate {kind} id {id:?}")]
    DuplicateId { kind: &'static str, id: String },
    #[error("angle out of range at edge {edge:?}: theta = {theta} not in (0, 2*pi)")]
    AngleOutOfRange { edge: String, theta: f64 },
    #[error("edge {edge:?}: supplied angle {supplied} disagrees with derived angle {derived} by more than 1e-6")]
    AngleMismatch {
        edge: String,
        supplied: f64,
        derived: f64,
    },
    #[error("edge {edge:?} has neither an angle nor enough plane data to derive one")]
    MissingAngle { edge: String },
    #[error("edge {edge:?} joins a face to itself")]
    SelfAdjacentEdge { edge: String },
    #[error("face {face:?} normal is not unit length (|n| = {len})")]
    NonUnitNormal { face: String, len: f64 },
    #[error("faces {0:?} and {1:?} are parallel; dihedral angle undefined")]
    ParallelFaces(String, String),
    #[error("missing plane data on face {0:?}")]
    MissingPlaneData(String),
    #[error("edge direction does not lie in both face planes (deviation {0:.3e})")]
    DirectionNotInPlanes(f64),
}

/// Interior dihedral angle at an edge, in `(0, 2*pi)`.
///
/// `edge_direction` orients the edge: looking along it, the in-face direction
/// of `face_plus` rotates counterclockwise through the solid interior onto
/// the in-face direction of `face_minus`.  The orientation is what
/// distinguishes an angle from its reflex complement, so it is part of the
/// domain-file contract.
pub fn dihedral_angle(
    face_plus: &Face,
    face_minus: &Face,
    edge_direction: Vec3,
) -> Result<f64, GeometryError> {
    let np = face_plus
        .plane
        .ok_or_else(|| GeometryError::MissingPlaneData(face_plus.id.clone()))?
        .normal;
    let nm = face_minus
        .plane
        .ok_or_else(|| GeometryError::MissingPlaneData(face_minus.id.clone()))?
        .normal;
    let e = normalize(edge_direction);
    let deviation = dot(e, np).abs().max(dot(e, nm).abs());
    if deviation > 1e-9 {
        return Err(GeometryError::DirectionNotInPlanes(deviation));
    }
    // In-face directions perpendicular to the edge.  A flat continuation
    // (equal normals) gives the straight angle pi; anti-parallel normals
    // bound a slab with no interior wedge and are rejected below.
    let t_plus = cross(e, np);
    let t_minus = cross(nm, e);
    let sin_theta = dot(cross(t_plus, t_minus), e);
    let cos_theta = dot(t_plus, t_minus);
    let mut theta = sin_theta.atan2(cos_theta);
    if theta <= 0.0 {
        theta += 2.0 * PI;
    }
    if !(theta > 1e-9 && theta < 2.0 * PI - 1e-9) {
        return Err(GeometryError::ParallelFaces(
            face_plus.id.clone(),
            face_minus.id.clone(),
        ));
    }
    Ok(theta)
}

// ---------------------------------------------------------------------------
// JSON ingestion

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FaceDoc {
    id: String,
    bc: u8,
    normal: Option<Vec3>,
    point: Option<Vec3>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeDoc {
    id: String,
    faces: [String; 2],
    theta: Option<f64>,
    theta_samples: Option<Vec<f64>>,
    direction: Option<Vec3>,
    vertices: Option<Vec<String>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct VertexDoc {
    id: String,
    edges: Vec<String>,
    attestations: Option<Vec<String>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct DomainDoc {
    faces: Vec<FaceDoc>,
    edges: Vec<EdgeDoc>,
    vertices: Option<Vec<VertexDoc>>,
    attestations: Option<Vec<String>>,
}

/// Parses and validates a JSON domain document.
///
/// Unknown fields are rejected; all referential and range invariants are
/// checked.  When a face supplies plane data and an edge supplies both a
/// direction and an explicit angle, the supplied and derived angles must
/// agree within 1e-6 rad.
pub fn parse_domain(document: &str) -> Result<DomainModel, GeometryError> {
    let doc: DomainDoc = serde_json::from_str(document).map_err(|e| GeometryError::Schema {
        path: format!("line {}, column {}", e.line(), e.column()),
        message: e.to_string(),
    })?;

    let mut faces = Vec::new();
    for f in &doc.faces {
        let plane = match (f.point, f.normal) {
            (Some(point), Some(normal)) => {
                let len = norm(normal);
                if (len - 1.0).abs() > 1e-12 {
                    return Err(GeometryError::NonUnitNormal {
                        face: f.id.clone(),
                        len,
                    });
                }
                Some(PlaneData { point, normal })
            }
            (None, None) => None,
            _ => {
                return Err(GeometryError::Schema {
                    path: format!("faces[{}]", f.id),
                    message: "point and normal must be supplied together".into(),
                })
            }
        };
        faces.push(Face {
            id: f.id.clone(),
            bc: BcKind::new(f.bc)?,
            plane,
        });
    }
    check_unique(faces.iter().map(|f| f.id.as_str()), "face")?;

    let face_ids: BTreeMap<&str, usize> =
        faces.iter().enumerate().map(|(i, f)| (f.id.as_str(), i)).collect();

    let mut edges = Vec::new();
    for e in &doc.edges {
        for fid in &e.faces {
            if !face_ids.contains_key(fid.as_str()) {
                return Err(GeometryError::DanglingReference {
                    kind: "face",
                    id: fid.clone(),
                    from: format!("edge {}", e.id),
                });
            }
        }
        if e.faces[0] == e.faces[1] {
            return Err(GeometryError::SelfAdjacentEdge { edge: e.id.clone() });
        }
        let theta_samples = e.theta_samples.clone().unwrap_or_default();
        for &t in e.theta.iter().chain(theta_samples.iter()) {
            if !(t > 0.0 && t < 2.0 * PI) {
                return Err(GeometryError::AngleOutOfRange {
                    edge: e.id.clone(),
                    theta: t,
                });
            }
        }
        let derived = match e.direction {
            Some(dir) => {
                let fp = &faces[face_ids[e.faces[0].as_str()]];
                let fm = &faces[face_ids[e.faces[1].as_str()]];
                if fp.plane.is_some() && fm.plane.is_some() {
                    Some(dihedral_angle(fp, fm, dir)?)
                } else {
                    None
                }
            }
            None => None,
        };
        let theta = match (e.theta, derived) {
            (Some(t), Some(d)) => {
                if (t - d).abs() > 1e-6 {
                    return Err(GeometryError::AngleMismatch {
                        edge: e.id.clone(),
                        supplied: t,
                        derived: d,
                    });
                }
                t
            }
            (Some(t), None) => t,
            (None, Some(d)) => d,
            (None, None) if !theta_samples.is_empty() => theta_samples[0],
            (None, None) => return Err(GeometryError::MissingAngle { edge: e.id.clone() }),
        };
        edges.push(EdgeModel {
            id: e.id.clone(),
            face_plus: e.faces[0].clone(),
            face_minus: e.faces[1].clone(),
            theta,
            theta_samples,
            direction: e.direction,
            vertex_ids: e.vertices.clone().unwrap_or_default(),
        });
    }
    check_unique(edges.iter().map(|e| e.id.as_str()), "edge")?;

    let edge_ids: BTreeMap<&str, usize> =
        edges.iter().enumerate().map(|(i, e)| (e.id.as_str(), i)).collect();

    let mut vertices = Vec::new();
    for v in doc.vertices.as_deref().unwrap_or(&[]) {
        let mut incident_faces: Vec<String> = Vec::new();
        for eid in &v.edges {
            let Some(&ei) = edge_ids.get(eid.as_str()) else {
                return Err(GeometryError::DanglingReference {
                    kind: "edge",
                    id: eid.clone(),
                    from: format!("vertex {}", v.id),
                });
            };
            for fid in [&edges[ei].face_plus, &edges[ei].face_minus] {
                if !incident_faces.contains(fid) {
                    incident_faces.push(fid.clone());
                }
            }
        }
        vertices.push(VertexModel {
            id: v.id.clone(),
            incident_edges: v.edges.clone(),
            incident_faces,
            attestations: v.attestations.clone().unwrap_or_default(),
        });
    }
    check_unique(vertices.iter().map(|v| v.id.as_str()), "vertex")?;

    // Edge -> vertex references must resolve, and the vertex must list the edge.
    let vertex_ids: BTreeMap<&str, usize> =
        vertices.iter().enumerate().map(|(i, v)| (v.id.as_str(), i)).collect();
    for e in &edges {
        for vid in &e.vertex_ids {
            let Some(&vi) = vertex_ids.get(vid.as_str()) else {
                return Err(GeometryError::DanglingReference {
                    kind: "vertex",
                    id: vid.clone(),
                    from: format!("edge {}", e.id),
                });
            };
            if !vertices[vi].incident_edges.contains(&e.id) {
                return Err(GeometryError::DanglingReference {
                    kind: "edge",
                    id: e.id.clone(),
                    from: format!("vertex {} (edge endpoint not listed back)", vid),
                });
            }
        }
    }

    Ok(DomainModel {
        faces,
        edges,
        vertices,
        attestations: doc.attestations.unwrap_or_default(),
    })
}

fn check_unique<'a>(
    ids: impl Iterator<Item = &'a str>,
    kind: &'static str,
) -> Result<(), GeometryError> {
    let mut seen = std::collections::BTreeSet::new();
    for id in ids {
        if !seen.insert(id) {
            return Err(GeometryError::DuplicateId {
                kind,
                id: id.to_string(),
            });
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Validation diagnostics

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    Warning,
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub entity: String,
    pub code: String,
    pub message: String,
    pub citation: Option<String>,
}

const ANGLE_PI_CITATION: &str = r"we assume additionally that $\theta\not=\pi$, $\theta\not=2\pi$";
const ODD3_CITATION: &str =
    r"the condition of Lemma \ref{bl3} is satisfied for $d^+ +d^-=3$, $\sin 2\theta\not=0$";
const ODD15_CITATION: &str =
    r"for $d^+ + d^- \in \{1,5\}$, $\cos\theta\, \cos 2\theta\not=0$";

/// Structural re-validation plus degenerate-angle warnings.
///
/// The warnings flag exactly the angle conditions under which the edge
/// compatibility reduction degenerates: `theta` in `{pi, 2*pi}` for pairs with
/// even `d_+ + d_-`, `sin 2*theta = 0` for `d_+ + d_- = 3`, and
/// `cos theta * cos 2*theta = 0` for `d_+ + d_-` in `{1, 5}`.
pub fn validate(model: &DomainModel) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let err = |entity: &str, code: &str, message: String| Diagnostic {
        severity: Severity::Error,
        entity: entity.to_string(),
        code: code.to_string(),
        message,
        citation: None,
    };

    for edge in &model.edges {
        for fid in [&edge.face_plus, &edge.face_minus] {
            if model.face(fid).is_none() {
                out.push(err(
                    &edge.id,
                    "dangling-face",
                    format!("edge references missing face {fid:?}"),
                ));
            }
        }
        if edge.face_plus == edge.face_minus {
            out.push(err(&edge.id, "self-adjacent", "edge joins a face to itself".into()));
        }
        let Some((bc_p, bc_m)) = model.edge_bc(edge) else {
            continue;
        };
        let dsum = bc_p.code() + bc_m.code();
        for theta in edge.angles() {
            if !(theta > 0.0 && theta < 2.0 * PI) {
                out.push(err(
                    &edge.id,
                    "angle-out-of-range",
                    format!("theta = {theta} outside (0, 2*pi)"),
                ));
                continue;
            }
            let warn = |code: &str, message: String, citation: &str| Diagnostic {
                severity: Severity::Warning,
                entity: edge.id.clone(),
                code: code.to_string(),
                message,
                citation: Some(citation.to_string()),
            };
            if dsum % 2 == 0 {
                if (theta - PI).abs() < 1e-12 || (theta - 2.0 * PI).abs() < 1e-12 {
                    out.push(warn(
                        "degenerate-angle",
                        format!(
                            "degenerate angle for compatibility reduction: theta = {theta} with boundary pair ({}, {})",
                            bc_p.code(),
                            bc_m.code()
                        ),
                        ANGLE_PI_CITATION,
                    ));
                }
            } else if dsum == 3 {
                if (2.0 * theta).sin().abs() < 1e-12 {
                    out.push(warn(
                        "degenerate-angle",
                        format!("sin 2*theta = 0 at theta = {theta} with boundary pair sum 3"),
                        ODD3_CITATION,
                    ));
                }
            } else if theta.cos().abs() < 1e-12 || (2.0 * theta).cos().abs() < 1e-12 {
                out.push(warn(
                    "degenerate-angle",
                    format!("cos theta * cos 2*theta = 0 at theta = {theta} with boundary pair sum {dsum}"),
                    ODD15_CITATION,
                ));
            }
        }
    }

    for vertex in &model.vertices {
        for eid in &vertex.incident_edges {
            match model.edge(eid) {
                None => out.push(err(
                    &vertex.id,
                    "dangling-edge",
                    format!("vertex references missing edge {eid:?}"),
                )),
                Some(edge) => {
                    if !edge.vertex_ids.is_empty() && !edge.vertex_ids.contains(&vertex.id) {
                        out.push(err(
                            &vertex.id,
                            "endpoint-mismatch",
                            format!("incident edge {eid:?} does not list this vertex as an endpoint"),
                        ));
                    }
                }
            }
        }
    }

    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn face(id: &str, normal: Vec3, point: Vec3) -> Face {
        Face {
            id: id.into(),
            bc: BcKind::DIRICHLET,
            plane: Some(PlaneData { point, normal }),
        }
    }

    #[test]
    fn perpendicular_faces_give_right_angle() {
        let fp = face("zlo", [0.0, 0.0, -1.0], [0.5, 0.5, 0.0]);
        let fm = face("ylo", [0.0, -1.0, 0.0], [0.5, 0.0, 0.5]);
        let theta = dihedral_angle(&fp, &fm, [1.0, 0.0, 0.0]).unwrap();
        assert!((theta - PI / 2.0).abs() < 1e-12);
    }

    #[test]
    fn coplanar_continuation_gives_straight_angle() {
        let fp = face("a", [0.0, 0.0, 1.0], [0.0, 0.0, 0.0]);
        let fm = face("b", [0.0, 0.0, 1.0], [1.0, 0.0, 0.0]);
        let theta = dihedral_angle(&fp, &fm, [1.0, 0.0, 0.0]).unwrap();
        assert!((theta - PI).abs() < 1e-12);
        // Anti-parallel normals bound a slab: no interior wedge.
        let fm_flip = face("b", [0.0, 0.0, -1.0], [1.0, 0.0, 0.0]);
        assert!(matches!(
            dihedral_angle(&fp, &fm_flip, [1.0, 0.0, 0.0]),
            Err(GeometryError::ParallelFaces(..))
        ));
    }

    #[test]
    fn reentrant_edge_gives_reflex_angle() {
        // Solid occupying three quadrants around the x-axis: interior angle 3*pi/2.
        let fp = face("wall_y", [0.0, -1.0, 0.0], [0.5, 0.0, -0.5]);
        let fm = face("wall_z", [0.0, 0.0, -1.0], [0.5, -0.5, 0.0]);
        let theta = dihedral_angle(&fp, &fm, [1.0, 0.0, 0.0]).unwrap();
        assert!((theta - 3.0 * PI / 2.0).abs() < 1e-12);
    }

    #[test]
    fn dihedral_angle_is_rigid_motion_invariant() {
        use rand::prelude::*;
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        for _ in 0..50 {
            // Random rotation from a random axis-angle.
            let axis = normalize([
                rng.random::<f64>() - 0.5,
                rng.random::<f64>() - 0.5,
                rng.random::<f64>() - 0.5,
            ]);
            let angle = rng.random::<f64>() * 2.0 * PI;
            let rot = |v: Vec3| -> Vec3 {
                // Rodrigues' formula.
                let c = angle.cos();
                let s = angle.sin();
                let k = axis;
                let kxv = cross(k, v);
                let kdv = dot(k, v);
                [
                    v[0] * c + kxv[0] * s + k[0] * kdv * (1.0 - c),
                    v[1] * c + kxv[1] * s + k[1] * kdv * (1.0 - c),
                    v[2] * c + kxv[2] * s + k[2] * kdv * (1.0 - c),
                ]
            };
            let fp = face("p", [0.0, 0.0, -1.0], [0.5, 0.5, 0.0]);
            let fm = face("m", [0.0, -1.0, 0.0], [0.5, 0.0, 0.5]);
            let base = dihedral_angle(&fp, &fm, [1.0, 0.0, 0.0]).unwrap();
            let fp_r = face("p", rot([0.0, 0.0, -1.0]), rot([0.5, 0.5, 0.0]));
            let fm_r = face("m", rot([0.0, -1.0, 0.0]), rot([0.5, 0.0, 0.5]));
            let rotated = dihedral_angle(&fp_r, &fm_r, rot([1.0, 0.0, 0.0])).unwrap();
            assert!((base - rotated).abs() < 1e-9, "drift {}", (base - rotated).abs());
        }
    }

    fn minimal_doc(theta: &str) -> String {
        format!(
            r#"{{
              "faces": [
                {{"id": "a", "bc": 0}},
                {{"id": "b", "bc": 0}}
              ],
              "edges": [
                {{"id": "e1", "faces": ["a", "b"], "theta": {theta}, "vertices": []}}
              ],
              "vertices": []
            }}"#
        )
    }

    #[test]
    fn parse_rejects_angle_out_of_range() {
        let err = parse_domain(&minimal_doc("6.5")).unwrap_err();
        assert!(matches!(err, GeometryError::AngleOutOfRange { .. }), "{err}");
    }

    #[test]
    fn parse_rejects_dangling_face() {
        let doc = r#"{
          "faces": [{"id": "a", "bc": 0}],
          "edges": [{"id": "e1", "faces": ["a", "ghost"], "theta": 1.0}],
          "vertices": []
        }"#;
        let err = parse_domain(doc).unwrap_err();
        match err {
            GeometryError::DanglingReference { kind, id, .. } => {
                assert_eq!(kind, "face");
                assert_eq!(id, "ghost");
            }
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn parse_rejects_unknown_fields() {
        let doc = r#"{
          "faces": [{"id": "a", "bc": 0, "color": "red"}],
          "edges": [],
          "vertices": []
        }"#;
        assert!(matches!(parse_domain(doc), Err(GeometryError::Schema { .. })));
    }

    #[test]
    fn validate_warns_on_flat_dirichlet_edge() {
        let mut model = parse_domain(&minimal_doc("1.0")).unwrap();
        model.edges[0].theta = PI;
        let diags = validate(&model);
        assert!(diags
            .iter()
            .any(|d| d.severity == Severity::Warning && d.code == "degenerate-angle"));
        assert!(diags[0].message.contains("degenerate angle for compatibility reduction"));
    }

    #[test]
    fn validate_no_warning_for_0_3_pair_with_nonzero_sin2theta() {
        let doc = r#"{
          "faces": [{"id": "a", "bc": 0}, {"id": "b", "bc": 3}],
          "edges": [{"id": "e1", "faces": ["a", "b"], "theta": 0.7853981633974483}],
          "vertices": []
        }"#;
        let model = parse_domain(doc).unwrap();
        assert!(validate(&model).is_empty());
    }

    #[test]
    fn validate_warns_for_0_3_pair_when_sin2theta_vanishes() {
        let doc = r#"{
          "faces": [{"id": "a", "bc": 0}, {"id": "b", "bc": 3}],
          "edges": [{"id": "e1", "faces": ["a", "b"], "theta": 1.5707963267948966}],
          "vertices": []
        }"#;
        let model = parse_domain(doc).unwrap();
        let diags = validate(&model);
        assert_eq!(diags.len(), 1);
        assert!(diags[0].citation.as_deref().unwrap().contains("sin 2\\theta"));
    }

    #[test]
    fn model_roundtrips_through_serde() {
        let model = parse_domain(&minimal_doc("1.25")).unwrap();
        let json = serde_json::to_string(&model).unwrap();
        let back: DomainModel = serde_json::from_str(&json).unwrap();
        assert_eq!(model, back);
    }
}
