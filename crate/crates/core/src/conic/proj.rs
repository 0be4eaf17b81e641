//! Exact Euclidean projections the subproblem engine is built from.

use crate::Float;

/// Soft-threshold `sign(x) * max(|x| - tau, 0)`.
pub fn soft_threshold<F: Float>(x: F, tau: F) -> F {
    let mag = x.abs() - tau;
    if mag <= F::zero() {
        F::zero()
    } else {
        mag * x.signum()
    }
}

/// Euclidean projection onto the l1 ball of radius `r` (pure form).
pub fn project_l1_ball<F: Float>(z: &[F], r: F) -> Vec<F> {
    let mut out = z.to_vec();
    project_l1_ball_in_place(&mut out, r, None);
    out
}

/// In-place l1-ball projection, optionally leaving one coordinate untouched
/// (the scale variable `t` in the scaled templates).
///
/// Water-filling threshold `tau` from an exact descending sort of the
/// magnitudes; entries shrink by `tau` and small ones hit zero, so signs are
/// preserved and already-nonnegative coordinates stay nonnegative.
pub fn project_l1_ball_in_place<F: Float>(v: &mut [F], r: F, skip: Option<usize>) {
    debug_assert!(r >= F::zero());
    let total: F = v
        .iter()
        .enumerate()
        .filter(|(j, _)| Some(*j) != skip)
        .map(|(_, e)| e.abs())
        .sum();
    if total <= r {
        return;
    }
    if r == F::zero() {
        for (j, e) in v.iter_mut().enumerate() {
            if Some(j) != skip {
                *e = F::zero();
            }
        }
        return;
    }
    let mut mags: Vec<F> = v
        .iter()
        .enumerate()
        .filter(|(j, _)| Some(*j) != skip)
        .map(|(_, e)| e.abs())
        .collect();
    mags.sort_by(|a, b| b.partial_cmp(a).expect("magnitudes are finite"));
    let mut cumulative = F::zero();
    let mut tau = F::zero();
    for (k, &u) in mags.iter().enumerate() {
        cumulative += u;
        let cand = (cumulative - r) / F::from_usize(k + 1).expect("index fits scalar");
        if u - cand > F::zero() {
            tau = cand;
        } else {
            break;
        }
    }
    for (j, e) in v.iter_mut().enumerate() {
        if Some(j) != skip {
            *e = soft_threshold(*e, tau);
        }
    }
}

/// In-place projection onto the ball `{ w : ||w - center||_2 <= radius }`;
/// radius zero pins `w` to the center.
pub fn project_ball_in_place<F: Float>(w: &mut [F], center: &[F], radius: F) {
    debug_assert_eq!(w.len(), center.len());
    let dist: F = w
        .iter()
        .zip(center.iter())
        .map(|(&a, &b)| (a - b) * (a - b))
        .sum::<F>()
        .sqrt();
    if dist <= radius {
        return;
    }
    if dist == F::zero() {
        w.copy_from_slice(center);
        return;
    }
    let scale = radius / dist;
    for (wi, &ci) in w.iter_mut().zip(center.iter()) {
        *wi = ci + (*wi - ci) * scale;
    }
}

/// Projection onto the second-order cone `{ (u, s) : ||u||_2 <= s }`
/// (pure form).
pub fn project_soc<F: Float>(u: &[F], s: F) -> (Vec<F>, F) {
    let mut joint = u.to_vec();
    joint.push(s);
    project_soc_in_place(&mut joint);
    let s_out = joint.pop().expect("joint vector is nonempty");
    (joint, s_out)
}

/// In-place second-order-cone projection on a joint slice `(u..., s)`.
pub fn project_soc_in_place<F: Float>(w: &mut [F]) {
    let p = w.len();
    debug_assert!(p >= 1);
    let s = w[p - 1];
    let norm: F = w[..p - 1].iter().map(|&e| e * e).sum::<F>().sqrt();
    if norm <= s {
        return;
    }
    if norm <= -s {
        for e in w.iter_mut() {
            *e = F::zero();
        }
        return;
    }
    let a = F::c(0.5) * (F::one() + s / norm);
    for e in w[..p - 1].iter_mut() {
        *e = *e * a;
    }
    w[p - 1] = a * norm;
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn l1_ball_projection_hand_cases() {
        assert_eq!(project_l1_ball(&[3.0, 0.0], 1.0), vec![1.0, 0.0]);
        assert_eq!(project_l1_ball(&[1.0, 1.0], 1.0), vec![0.5, 0.5]);
        // tau = 1 from the water-filling equation.
        assert_eq!(project_l1_ball(&[2.0, 1.0], 1.0), vec![1.0, 0.0]);
        // Interior points are untouched.
        assert_eq!(project_l1_ball(&[0.2, -0.3], 1.0), vec![0.2, -0.3]);
        // Signs survive projection.
        assert_eq!(project_l1_ball(&[-1.0, 1.0], 1.0), vec![-0.5, 0.5]);
    }

    #[test]
    fn l1_ball_projection_respects_skip_index() {
        let mut v: Vec<f64> = vec![2.0, 5.0, 1.0];
        project_l1_ball_in_place(&mut v, 1.0, Some(1));
        assert_eq!(v[1], 5.0);
        assert!((v[0] + v[2] - 1.0).abs() < 1e-15);
        let mut z: Vec<f64> = vec![0.3, 9.0];
        project_l1_ball_in_place(&mut z, 0.0, Some(1));
        assert_eq!(z, vec![0.0, 9.0]);
    }

    #[test]
    fn soc_projection_hand_cases() {
        let (u, s) = project_soc(&[0.3, 0.4], 1.0);
        assert_eq!((u, s), (vec![0.3, 0.4], 1.0));
        let (u, s) = project_soc(&[1.0, 0.0], -2.0);
        assert_eq!((u, s), (vec![0.0, 0.0], 0.0));
        let (u, s) = project_soc::<f64>(&[3.0, 4.0], 0.0);
        assert!((u[0] - 1.5).abs() < 1e-15);
        assert!((u[1] - 2.0).abs() < 1e-15);
        assert!((s - 2.5).abs() < 1e-15);
    }

    #[test]
    fn ball_projection_scales_toward_center() {
        let mut w: Vec<f64> = vec![3.0, 4.0];
        project_ball_in_place(&mut w, &[0.0, 0.0], 1.0);
        assert!((w[0] - 0.6).abs() < 1e-15);
        assert!((w[1] - 0.8).abs() < 1e-15);
        let mut v: Vec<f64> = vec![2.0, 0.0];
        project_ball_in_place(&mut v, &[1.0, 0.0], 0.0);
        assert_eq!(v, vec![1.0, 0.0]);
    }

    #[test]
    fn l1_projection_is_idempotent_and_feasible() {
        let pts: [Vec<f64>; 3] = [
            vec![0.9, -2.3, 0.4, 7.0],
            vec![-0.1, 0.1, 0.0, 0.0],
            vec![5.0, 5.0, 5.0, 5.0],
        ];
        for p in pts {
            let once = project_l1_ball(&p, 2.0);
            let twice = project_l1_ball(&once, 2.0);
            let l1: f64 = once.iter().map(|e| e.abs()).sum();
            assert!(l1 <= 2.0 + 1e-12);
            for (a, b) in once.iter().zip(twice.iter()) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }
}
