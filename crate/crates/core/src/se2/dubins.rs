//! Shortest forward-only paths with a bounded turning radius.

use std::f64::consts::TAU;

use super::Pose2D;

/// Values this close to a full turn are treated as zero-length arcs.
const ARC_SNAP: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SegmentKind {
    Left,
    Straight,
    Right,
}

/// The six candidate words, listed in tie-break order.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DubinsWord {
    Lsl,
    Rsr,
    Lsr,
    Rsl,
    Rlr,
    Lrl,
}

impl DubinsWord {
    pub const ALL: [DubinsWord; 6] = [
        DubinsWord::Lsl,
        DubinsWord::Rsr,
        DubinsWord::Lsr,
        DubinsWord::Rsl,
        DubinsWord::Rlr,
        DubinsWord::Lrl,
    ];

    pub fn segments(self) -> [SegmentKind; 3] {
        use SegmentKind::*;
        match self {
            DubinsWord::Lsl => [Left, Straight, Left],
            DubinsWord::Rsr => [Right, Straight, Right],
            DubinsWord::Lsr => [Left, Straight, Right],
            DubinsWord::Rsl => [Right, Straight, Left],
            DubinsWord::Rlr => [Right, Left, Right],
            DubinsWord::Lrl => [Left, Right, Left],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DubinsPath {
    pub start: Pose2D,
    pub word: DubinsWord,
    /// Segment lengths normalized by the turning radius.
    pub params: [f64; 3],
    pub turn_radius: f64,
}

impl DubinsPath {
    pub fn length(&self) -> f64 {
        self.params.iter().sum::<f64>() * self.turn_radius
    }

    /// Pose after travelling `s` meters along the path (clamped to its ends).
    pub fn sample(&self, s: f64) -> Pose2D {
        let r = self.turn_radius;
        let mut remaining = (s / r).clamp(0.0, self.params.iter().sum());
        let mut pose = self.start;
        for (kind, &len) in self.word.segments().iter().zip(&self.params) {
            let step = remaining.min(len);
            pose = advance(&pose, *kind, step, r);
            remaining -= step;
            if remaining <= 0.0 {
                break;
            }
        }
        pose
    }

    /// Poses spaced at most `step` meters apart, including both endpoints.
    pub fn sample_many(&self, step: f64) -> Vec<Pose2D> {
        let len = self.length();
        let n = ((len / step).ceil() as usize).max(1);
        (0..=n).map(|i| self.sample(len * i as f64 / n as f64)).collect()
    }
}

fn advance(p: &Pose2D, kind: SegmentKind, t: f64, r: f64) -> Pose2D {
    match kind {
        SegmentKind::Straight => {
            let (s, c) = p.theta.sin_cos();
            Pose2D::new(p.x + t * r * c, p.y + t * r * s, p.theta)
        }
        SegmentKind::Left => {
            let th = p.theta + t;
            Pose2D::new(
                p.x + r * (th.sin() - p.theta.sin()),
                p.y - r * (th.cos() - p.theta.cos()),
                th,
            )
        }
        SegmentKind::Right => {
            let th = p.theta - t;
            Pose2D::new(
                p.x - r * (th.sin() - p.theta.sin()),
                p.y + r * (th.cos() - p.theta.cos()),
                th,
            )
        }
    }
}

fn mod2pi(a: f64) -> f64 {
    let m = a.rem_euclid(TAU);
    if TAU - m < ARC_SNAP || m < ARC_SNAP {
        0.0
    } else {
        m
    }
}

struct Frame {
    alpha: f64,
    beta: f64,
    d: f64,
    sa: f64,
    sb: f64,
    ca: f64,
    cb: f64,
    c_ab: f64,
}

fn word_params(word: DubinsWord, f: &Frame) -> Option<[f64; 3]> {
    let Frame {
        alpha,
        beta,
        d,
        sa,
        sb,
        ca,
        cb,
        c_ab,
    } = *f;
    match word {
        DubinsWord::Lsl => {
            let p_sq = 2.0 + d * d - 2.0 * c_ab + 2.0 * d * (sa - sb);
            if p_sq < 0.0 {
                return None;
            }
            let tmp = (cb - ca).atan2(d + sa - sb);
            Some([mod2pi(tmp - alpha), p_sq.sqrt(), mod2pi(beta - tmp)])
        }
        DubinsWord::Rsr => {
            let p_sq = 2.0 + d * d - 2.0 * c_ab + 2.0 * d * (sb - sa);
            if p_sq < 0.0 {
                return None;
            }
            let tmp = (ca - cb).atan2(d - sa + sb);
            Some([mod2pi(alpha - tmp), p_sq.sqrt(), mod2pi(tmp - beta)])
        }
        DubinsWord::Lsr => {
            let p_sq = -2.0 + d * d + 2.0 * c_ab + 2.0 * d * (sa + sb);
            if p_sq < 0.0 {
                return None;
            }
            let p = p_sq.sqrt();
            let tmp = (-ca - cb).atan2(d + sa + sb) - (-2.0f64).atan2(p);
            Some([mod2pi(tmp - alpha), p, mod2pi(tmp - beta)])
        }
        DubinsWord::Rsl => {
            let p_sq = -2.0 + d * d + 2.0 * c_ab - 2.0 * d * (sa + sb);
            if p_sq < 0.0 {
                return None;
            }
            let p = p_sq.sqrt();
            let tmp = (ca + cb).atan2(d - sa - sb) - 2.0f64.atan2(p);
            Some([mod2pi(alpha - tmp), p, mod2pi(beta - tmp)])
        }
        DubinsWord::Rlr => {
            let tmp = (6.0 - d * d + 2.0 * c_ab + 2.0 * d * (sa - sb)) / 8.0;
            if tmp.abs() > 1.0 {
                return None;
            }
            let phi = (ca - cb).atan2(d - sa + sb);
            let p = mod2pi(TAU - tmp.acos());
            let t = mod2pi(alpha - phi + mod2pi(p / 2.0));
            Some([t, p, mod2pi(alpha - beta - t + mod2pi(p))])
        }
        DubinsWord::Lrl => {
            let tmp = (6.0 - d * d + 2.0 * c_ab + 2.0 * d * (sb - sa)) / 8.0;
            if tmp.abs() > 1.0 {
                return None;
            }
            let phi = (ca - cb).atan2(d + sa - sb);
            let p = mod2pi(TAU - tmp.acos());
            let t = mod2pi(-alpha - phi + p / 2.0);
            Some([t, p, mod2pi(mod2pi(beta) - alpha - t + mod2pi(p))])
        }
    }
}

/// Shortest of the six words from `a` to `b`; ties go to the earlier word.
///
/// Panics if `turn_radius` is not strictly positive.
pub fn dubins_path(a: &Pose2D, b: &Pose2D, turn_radius: f64) -> DubinsPath {
    assert!(turn_radius > 0.0, "turn radius must be positive");
    let dx = b.x - a.x;
    let dy = b.y - a.y;
    let d = dx.hypot(dy) / turn_radius;
    let phi = if d > 0.0 { dy.atan2(dx) } else { 0.0 };
    let alpha = mod2pi(a.theta - phi);
    let beta = mod2pi(b.theta - phi);
    let frame = Frame {
        alpha,
        beta,
        d,
        sa: alpha.sin(),
        sb: beta.sin(),
        ca: alpha.cos(),
        cb: beta.cos(),
        c_ab: (alpha - beta).cos(),
    };

    let mut best: Option<(DubinsWord, [f64; 3], f64)> = None;
    for word in DubinsWord::ALL {
        if let Some(params) = word_params(word, &frame) {
            let len: f64 = params.iter().sum();
            if best.as_ref().is_none_or(|(_, _, l)| len < *l - 1e-12) {
                best = Some((word, params, len));
            }
        }
    }
    // LSL or RSR is always feasible.
    let (word, params, _) = best.expect("at least one Dubins word is feasible");
    DubinsPath {
        start: *a,
        word,
        params,
        turn_radius,
    }
}

pub fn dubins_length(a: &Pose2D, b: &Pose2D, turn_radius: f64) -> f64 {
    dubins_path(a, b, turn_radius).length()
}
