use morphopt_web::{hybrid_landscape, locus_arm, optimizer_trace, path_points, DemoError};

#[test]
fn arm_tip_lies_on_the_circle() {
    for phi in [1.0, 20.0, 45.0, 70.0, 89.0] {
        let a = locus_arm(phi, 0.4).unwrap();
        let reach = a[4].hypot(a[5]);
        assert!((reach - 0.4).abs() < 1e-12, "φ = {phi}: tip at {reach}");
        assert!((a[2].hypot(a[3]) - a[0]).abs() < 1e-12);
        assert!((a[6] - (2.0 * phi.to_radians()).sin()).abs() < 1e-12);
    }
    let a = locus_arm(45.0, 0.4).unwrap();
    assert!((a[0] - a[1]).abs() < 1e-15 && a[6] == 1.0);
}

#[test]
fn landscape_peaks_inside_the_box() {
    let n = 23;
    let g = hybrid_landscape("ellipse", n).unwrap();
    assert_eq!(g.len(), n * n + 2);
    let (lo, hi) = (g[n * n], g[n * n + 1]);
    assert!(g[..n * n].iter().all(|&v| v.is_finite() && v >= lo && v <= hi));
    assert!(hi > 0.0 && lo < hi);
    assert_eq!(hybrid_landscape("circle", 1), Err(DemoError::Resolution(1)));
}

#[test]
fn optimizer_traces_climb_to_the_peak() {
    for (m, evals) in [("pso", 3630.0), ("bo", 45.0), ("cmaes", 720.0)] {
        let t = optimizer_trace(m, 0).unwrap();
        assert_eq!(t[2], evals);
        assert!((t[0] - 45.0).abs() < 1.0);
        assert!(t[3..].windows(2).all(|w| w[1] >= w[0]));
        assert_eq!(*t.last().unwrap(), t[1]);
    }
    assert!(matches!(optimizer_trace("adam", 0), Err(DemoError::UnknownOptimizer(_))));
}

#[test]
fn paths_and_tasks() {
    assert_eq!(path_points("rect", 100).unwrap().len(), 200);
    assert!(matches!(path_points("hexagon", 10), Err(DemoError::UnknownTask(_))));
}
