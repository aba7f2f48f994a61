//! Argument-principle zero counting and root isolation on rectangles.
//!
//! The count over a box is the winding number of the characteristic function
//! along the boundary, computed by adaptive phase tracking (segments are
//! bisected until the phase step between samples is below pi/2, which pins
//! the unwinding as long as the function stays nonzero on the contour).
//! Boxes are then bisected until each piece isolates a single zero cluster,
//! and Newton's method (with the multiplicity-scaled step) polishes it.

use super::{char_derivative, char_terms, BcPair, PencilConfig, PencilError, PencilRoot, PencilSpectrum};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchBox {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl SearchBox {
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Result<Self, SearchBox> {
        let b = SearchBox { re_min, re_max, im_min, im_max };
        if re_min < re_max && im_min < im_max && b.finite() {
            Ok(b)
        } else {
            Err(b)
        }
    }

    fn finite(&self) -> bool {
        [self.re_min, self.re_max, self.im_min, self.im_max]
            .iter()
            .all(|x| x.is_finite())
    }

    pub fn width(&self) -> f64 {
        self.re_max - self.re_min
    }

    pub fn height(&self) -> f64 {
        self.im_max - self.im_min
    }

    pub fn center(&self) -> Complex64 {
        Complex64::new(
            0.5 * (self.re_min + self.re_max),
            0.5 * (self.im_min + self.im_max),
        )
    }

    pub fn contains(&self, z: Complex64) -> bool {
        z.re >= self.re_min && z.re <= self.re_max && z.im >= self.im_min && z.im <= self.im_max
    }

    fn contains_with_tol(&self, z: Complex64, tol: f64) -> bool {
        z.re >= self.re_min - tol
            && z.re <= self.re_max + tol
            && z.im >= self.im_min - tol
            && z.im <= self.im_max + tol
    }

    /// Conjugation-symmetric up to floating noise.
    pub fn is_conjugation_symmetric(&self) -> bool {
        (self.im_min + self.im_max).abs() < 1e-12 * (1.0 + self.height())
    }

    fn grown(&self, delta: f64) -> SearchBox {
        SearchBox {
            re_min: self.re_min - delta,
            re_max: self.re_max + delta,
            im_min: self.im_min - delta,
            im_max: self.im_max + delta,
        }
    }

    fn corners(&self) -> [Complex64; 4] {
        [
            Complex64::new(self.re_min, self.im_min),
            Complex64::new(self.re_max, self.im_min),
            Complex64::new(self.re_max, self.im_max),
            Complex64::new(self.re_min, self.im_max),
        ]
    }

    fn within_caps(&self, cfg: &PencilConfig) -> bool {
        self.re_min >= -cfg.re_hard_cap
            && self.re_max <= cfg.re_hard_cap
            && self.im_min >= -cfg.im_hard_cap
            && self.im_max <= cfg.im_hard_cap
    }
}

/// Signals that the contour passed too close to a zero.
#[derive(Debug)]
struct ContourTrouble;

/// Total argument change of `f` along the segment from `a` to `b`, adaptive.
///
/// A segment is accepted only when both halves turn by at most pi/2 *and*
/// the step is short against the logarithmic derivative (`|dz| |f'/f| <= 1`
/// at the sampled points).  The phase criterion alone is unsound: a zero of
/// multiplicity m close to the contour turns the phase by a near-multiple of
/// 2*pi between two samples, which sampled phase steps alias away.  The
/// log-derivative bound caps the true phase change across an accepted
/// segment, so full turns cannot hide between samples.
/// Wrapped phase difference `arg(f1) - arg(f0)` in `(-pi, pi]`, computed
/// without a complex division (whose `norm_sqr` overflows for magnitudes
/// beyond ~1e154, well within reach of the exponential regime at large
/// imaginary parts).
fn phase_step(f0: Complex64, f1: Complex64) -> f64 {
    let mut d = f1.arg() - f0.arg();
    if d > PI {
        d -= 2.0 * PI;
    } else if d <= -PI {
        d += 2.0 * PI;
    }
    d
}

fn arg_change(
    f: &impl Fn(Complex64) -> Complex64,
    df: &impl Fn(Complex64) -> Complex64,
    a: Complex64,
    b: Complex64,
    budget: &mut usize,
) -> Result<f64, ContourTrouble> {
    const MIN_MAG: f64 = 1e-290;
    let logd = |z: Complex64, fz: Complex64| df(z).norm() / fz.norm();
    let fa = f(a);
    let fb = f(b);
    if fa.norm() < MIN_MAG || fb.norm() < MIN_MAG {
        return Err(ContourTrouble);
    }
    // Stack of (t0, t1, f(t0), f(t1), depth) over the segment parameter.
    let mut total = 0.0;
    let mut stack = vec![(0.0_f64, 1.0_f64, fa, fb, 0_u32)];
    while let Some((t0, t1, f0, f1, depth)) = stack.pop() {
        if *budget == 0 {
            return Err(ContourTrouble);
        }
        *budget = budget.saturating_sub(1);
        let tm = 0.5 * (t0 + t1);
        let z0 = a + (b - a) * t0;
        let z1 = a + (b - a) * t1;
        let zm = a + (b - a) * tm;
        let fm = f(zm);
        if fm.norm() < MIN_MAG {
            return Err(ContourTrouble);
        }
        let left = phase_step(f0, fm);
        let right = phase_step(fm, f1);
        let seg_len = (b - a).norm() * (t1 - t0);
        let rate = logd(z0, f0).max(logd(zm, fm)).max(logd(z1, f1));
        if left.abs() <= PI / 2.0 && right.abs() <= PI / 2.0 && seg_len * rate <= 1.0 {
            total += left + right;
            continue;
        }
        if depth >= 52 {
            return Err(ContourTrouble);
        }
        stack.push((t0, tm, f0, fm, depth + 1));
        stack.push((tm, t1, fm, f1, depth + 1));
    }
    Ok(total)
}

fn winding_number(
    f: &impl Fn(Complex64) -> Complex64,
    df: &impl Fn(Complex64) -> Complex64,
    search: SearchBox,
) -> Result<f64, ContourTrouble> {
    let corners = search.corners();
    let mut total = 0.0;
    let mut budget = 200_000usize;
    for i in 0..4 {
        // Seed each side with a few interior points so long sides do not
        // fold more than pi/2 between initial samples.
        let a = corners[i];
        let b = corners[(i + 1) % 4];
        let pieces = 8;
        for k in 0..pieces {
            let p = a + (b - a) * (k as f64 / pieces as f64);
            let q = a + (b - a) * ((k + 1) as f64 / pieces as f64);
            total += arg_change(f, df, p, q, &mut budget)?;
        }
    }
    Ok(total / (2.0 * PI))
}

/// Winding count with the deterministic outward-perturbation retry ladder.
fn count_in_box(
    f: &impl Fn(Complex64) -> Complex64,
    df: &impl Fn(Complex64) -> Complex64,
    search: SearchBox,
) -> Result<(usize, SearchBox), PencilError> {
    for k in 0..=8u32 {
        let b = search.grown(1e-6 * k as f64);
        if let Ok(w) = winding_number(f, df, b) {
            let n = w.round();
            if (w - n).abs() < 0.25 && n >= -0.1 {
                return Ok((n as usize, b));
            }
        }
    }
    Err(PencilError::BoundaryClearance(search))
}

/// Splits with a jittered cut line so that no zero sits on the shared child
/// boundary; the child counts must sum to the parent's.
fn split_counted(
    f: &impl Fn(Complex64) -> Complex64,
    df: &impl Fn(Complex64) -> Complex64,
    search: SearchBox,
    parent_count: usize,
) -> Result<[(usize, SearchBox); 2], PencilError> {
    let vertical = search.width() >= search.height();
    let (lo, hi) = if vertical {
        (search.re_min, search.re_max)
    } else {
        (search.im_min, search.im_max)
    };
    let span = hi - lo;
    for &jitter in &[0.0, 1e-6, -1e-6, 7e-6, -7e-6, 5e-5, -5e-5, 3e-4] {
        let cut = 0.5 * (lo + hi) + jitter * span;
        let (b1, b2) = if vertical {
            (
                SearchBox { re_max: cut, ..search },
                SearchBox { re_min: cut, ..search },
            )
        } else {
            (
                SearchBox { im_max: cut, ..search },
                SearchBox { im_min: cut, ..search },
            )
        };
        // Children are counted without outward growth: growing an interior
        // split line would double-count across siblings.
        let w1 = winding_number(f, df, b1);
        let w2 = winding_number(f, df, b2);
        if let (Ok(w1), Ok(w2)) = (w1, w2) {
            let n1 = w1.round();
            let n2 = w2.round();
            if (w1 - n1).abs() < 0.25
                && (w2 - n2).abs() < 0.25
                && n1 >= -0.1
                && n2 >= -0.1
                && (n1 + n2 - parent_count as f64).abs() < 0.1
            {
                return Ok([(n1 as usize, b1), (n2 as usize, b2)]);
            }
        }
    }
    Err(PencilError::NonConvergence(search))
}

struct Refiner<'a> {
    f: &'a dyn Fn(Complex64) -> Complex64,
    df: &'a dyn Fn(Complex64) -> Complex64,
    scale: &'a dyn Fn(Complex64) -> f64,
    tol: f64,
}

impl Refiner<'_> {
    fn residual_ok(&self, z: Complex64) -> bool {
        let s = (self.scale)(z);
        (self.f)(z).norm() <= self.tol * (1.0 + s)
    }

    /// Multiplicity-scaled Newton from `start`; `None` if it leaves the
    /// neighborhood, stalls, or converges to a zero outside the box (the
    /// wrong zero — including exact floating-point zeros like the origin).
    fn newton(&self, start: Complex64, m: u32, search: SearchBox) -> Option<Complex64> {
        let mut z = start;
        let reach = 3.0 * (search.width() + search.height());
        for _ in 0..120 {
            let fz = (self.f)(z);
            if fz.norm() == 0.0 {
                break;
            }
            let dz = (self.df)(z);
            if dz.norm() == 0.0 {
                return None;
            }
            let step = fz / dz * m as f64;
            z -= step;
            if (z - start).norm() > reach {
                return None;
            }
            if step.norm() < 1e-15 * (1.0 + z.norm()) {
                break;
            }
        }
        let slack = 1e-9 * (1.0 + search.width() + search.height());
        if self.residual_ok(z) && search.contains_with_tol(z, slack) {
            Some(z)
        } else {
            None
        }
    }

    /// Newton from the center, then from a coarse |f|-minimizing grid.
    fn refine(&self, search: SearchBox, m: u32) -> Option<Complex64> {
        if let Some(z) = self.newton(search.center(), m, search) {
            return Some(z);
        }
        let mut starts: Vec<Complex64> = Vec::new();
        let n = 7;
        for i in 0..=n {
            for j in 0..=n {
                let z = Complex64::new(
                    search.re_min + search.width() * i as f64 / n as f64,
                    search.im_min + search.height() * j as f64 / n as f64,
                );
                starts.push(z);
            }
        }
        starts.sort_by(|a, b| {
            (self.f)(*a)
                .norm()
                .partial_cmp(&(self.f)(*b).norm())
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        for start in starts.into_iter().take(6) {
            if let Some(z) = self.newton(start, m, search) {
                return Some(z);
            }
        }
        None
    }
}

fn isolate(
    f: &impl Fn(Complex64) -> Complex64,
    df: &impl Fn(Complex64) -> Complex64,
    refiner: &Refiner<'_>,
    search: SearchBox,
    count: usize,
    depth: u32,
    out: &mut Vec<(Complex64, u32)>,
) -> Result<(), PencilError> {
    if count == 0 {
        return Ok(());
    }
    let diam = search.width().max(search.height());
    // A cluster that refuses to separate below this size is one multiple zero.
    let cluster_eps = 1e-7;
    if count == 1 || diam < cluster_eps {
        match refiner.refine(search, count as u32) {
            Some(z) => {
                out.push((z, count as u32));
                return Ok(());
            }
            None if count == 1 && diam >= 1e-11 => {
                // Newton failed; shrink the box around the zero instead.
            }
            None => return Err(PencilError::NonConvergence(search)),
        }
    }
    if depth >= 60 {
        return Err(PencilError::NonConvergence(search));
    }
    let children = split_counted(f, df, search, count)?;
    for (n, child) in children {
        isolate(f, df, refiner, child, n, depth + 1, out)?;
    }
    Ok(())
}

/// Number of characteristic-function zeros in the box, counted with
/// multiplicity, by the argument principle.
pub fn count_zeros(
    pair: BcPair,
    theta: f64,
    search: SearchBox,
    cfg: &PencilConfig,
) -> Result<usize, PencilError> {
    if !pair.has_closed_form() {
        return Err(PencilError::NoClosedForm(pair));
    }
    if !(theta > 0.0 && theta < 2.0 * PI) {
        return Err(PencilError::BadTheta(theta));
    }
    if !search.within_caps(cfg) {
        return Err(PencilError::BadBox(search));
    }
    let f = move |z| char_terms(pair, theta, z).0;
    let df = move |z| char_derivative(pair, theta, z);
    count_in_box(&f, &df, search).map(|(n, _)| n)
}

/// All zeros in the box with multiplicities; trivial origin roots are
/// reported in `excluded` for pairs whose spectrum omits `lambda = 0`.
pub fn find_roots(
    pair: BcPair,
    theta: f64,
    search: SearchBox,
    tol: f64,
    cfg: &PencilConfig,
) -> Result<PencilSpectrum, PencilError> {
    if !pair.has_closed_form() {
        return Err(PencilError::NoClosedForm(pair));
    }
    if !(theta > 0.0 && theta < 2.0 * PI) {
        return Err(PencilError::BadTheta(theta));
    }
    if !search.within_caps(cfg) {
        return Err(PencilError::BadBox(search));
    }
    let f = move |z| char_terms(pair, theta, z).0;
    let df = move |z| char_derivative(pair, theta, z);
    let scale = move |z| char_terms(pair, theta, z).1;
    let refiner = Refiner {
        f: &f,
        df: &df,
        scale: &scale,
        tol,
    };

    let (count, eff_box) = count_in_box(&f, &df, search)?;
    let mut raw: Vec<(Complex64, u32)> = Vec::new();
    isolate(&f, &df, &refiner, eff_box, count, 0, &mut raw)?;

    // Snap near-real zeros onto the axis and enforce conjugate pairing when
    // the box is symmetric, so output is independent of traversal order.
    for (z, _) in raw.iter_mut() {
        if z.im.abs() < 1e-9 * (1.0 + z.norm()) {
            z.im = 0.0;
        }
    }
    if eff_box.is_conjugation_symmetric() {
        let snapshot: Vec<(Complex64, u32)> = raw.clone();
        for (z, _) in raw.iter_mut() {
            if z.im > 0.0 {
                if let Some((w, _)) = snapshot
                    .iter()
                    .find(|(w, _)| w.im < 0.0 && (w.conj() - *z).norm() < 1e-7 * (1.0 + z.norm()))
                {
                    let re = 0.5 * (z.re + w.re);
                    let im = 0.5 * (z.im - w.im);
                    *z = Complex64::new(re, im);
                }
            } else if z.im < 0.0 {
                if let Some((w, _)) = snapshot
                    .iter()
                    .find(|(w, _)| w.im > 0.0 && (w.conj() - *z).norm() < 1e-7 * (1.0 + z.norm()))
                {
                    let re = 0.5 * (z.re + w.re);
                    let im = -0.5 * (w.im - z.im);
                    *z = Complex64::new(re, im);
                }
            }
        }
    }

    // Merge refined zeros that landed on the same point (split artifacts).
    raw.sort_by(|a, b| (a.0.re, a.0.im).partial_cmp(&(b.0.re, b.0.im)).unwrap());
    let mut merged: Vec<(Complex64, u32)> = Vec::new();
    for (z, m) in raw {
        match merged.last_mut() {
            Some((w, n)) if (*w - z).norm() < 1e-8 * (1.0 + z.norm()) => *n += m,
            _ => merged.push((z, m)),
        }
    }

    let origin_mult = pair.excluded_origin_multiplicity();
    let mut roots = Vec::new();
    let mut excluded = Vec::new();
    let mut total = 0u32;
    for (z, m) in merged {
        total += m;
        let root = PencilRoot {
            re: z.re,
            im: z.im,
            multiplicity: m,
            residual: f(z).norm(),
        };
        // The trivial-root classification only applies when the origin
        // actually lies in the searched region.
        let origin_in_box = eff_box.contains(Complex64::new(0.0, 0.0));
        if origin_mult.is_some() && origin_in_box && z.norm() < 1e-9 {
            excluded.push(root);
        } else {
            roots.push(root);
        }
    }
    // The refined zeros must still account for every zero the contour saw.
    if total != count as u32 {
        return Err(PencilError::NonConvergence(eff_box));
    }

    Ok(PencilSpectrum {
        pair,
        theta,
        search_box: eff_box,
        roots,
        excluded,
    })
}
