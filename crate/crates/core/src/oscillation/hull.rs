use num_complex::Complex64;

const BRUTE_FORCE_LIMIT: usize = 64;

/// Diameter `max |z_i - z_j|` of a finite set of complex values.
pub fn diameter(values: &[Complex64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    if values.iter().all(|z| z.im == 0.0) {
        let (lo, hi) = values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), z| (lo.min(z.re), hi.max(z.re)));
        return hi - lo;
    }
    if values.len() <= BRUTE_FORCE_LIMIT {
        return brute_force(values);
    }
    let hull = convex_hull(values);
    if hull.len() <= BRUTE_FORCE_LIMIT {
        return brute_force(&hull);
    }
    calipers(&hull)
}

pub(crate) fn brute_force(values: &[Complex64]) -> f64 {
    let mut best: f64 = 0.0;
    for (i, a) in values.iter().enumerate() {
        for b in &values[i + 1..] {
            best = best.max((a - b).norm());
        }
    }
    best
}

fn cross(o: Complex64, a: Complex64, b: Complex64) -> f64 {
    (a.re - o.re) * (b.im - o.im) - (a.im - o.im) * (b.re - o.re)
}

/// Counter-clockwise hull without collinear points (monotone chain).
pub(crate) fn convex_hull(values: &[Complex64]) -> Vec<Complex64> {
    let mut pts = values.to_vec();
    pts.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut hull: Vec<Complex64> = Vec::with_capacity(2 * pts.len());
    for &p in &pts {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    let lower = hull.len() + 1;
    for &p in pts.iter().rev().skip(1) {
        while hull.len() >= lower && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();
    hull
}

fn calipers(hull: &[Complex64]) -> f64 {
    let n = hull.len();
    let mut best: f64 = 0.0;
    let mut j = 1;
    for i in 0..n {
        let ni = (i + 1) % n;
        let edge = hull[ni] - hull[i];
        loop {
            let nj = (j + 1) % n;
            let next = hull[nj] - hull[j];
            if edge.re * next.im - edge.im * next.re > 0.0 {
                j = nj;
            } else {
                break;
            }
        }
        best = best.max((hull[i] - hull[j]).norm()).max((hull[ni] - hull[j]).norm());
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn unit_circle_diameter_is_two() {
        let pts: Vec<Complex64> =
            (0..=1000).map(|j| Complex64::from_polar(1.0, std::f64::consts::TAU * j as f64 / 1000.0)).collect();
        assert!((diameter(&pts) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_sets() {
        assert_eq!(diameter(&[]), 0.0);
        assert_eq!(diameter(&[Complex64::new(1.0, 1.0)]), 0.0);
        let line: Vec<Complex64> = (0..200).map(|k| Complex64::new(k as f64, 2.0 * k as f64)).collect();
        assert!((diameter(&line) - 199.0 * 5f64.sqrt()).abs() < 1e-9);
    }

    proptest! {
        #[test]
        fn calipers_match_brute_force(pts in prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 65..300)) {
            let v: Vec<Complex64> = pts.iter().map(|&(a, b)| Complex64::new(a, b)).collect();
            let hull = convex_hull(&v);
            prop_assert!((calipers(&hull) - brute_force(&v)).abs() < 1e-12);
            prop_assert!((diameter(&v) - brute_force(&v)).abs() < 1e-12);
        }
    }
}
