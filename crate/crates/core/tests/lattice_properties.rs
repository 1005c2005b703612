use proptest::prelude::*;
use pwframes::sampling::{build_lattice, verify_lattice};
use pwframes::{DomainBox, Point};

/// Dense regular probes of a domain, independent of the lattice's candidates.
fn probes(domain: &DomainBox) -> Vec<Point> {
    let ([x0, x1], [y0, y1]) = match *domain {
        DomainBox::Interval { interval: [lo, hi] } => {
            return (0..=2000).map(|i| Point::Line(lo + (hi - lo) * i as f64 / 2000.0)).collect();
        }
        DomainBox::HalfPlane { x, y } => (x, y),
    };
    let mut out = Vec::new();
    for i in 0..=60 {
        // log-spaced rows so the probes are uniform in the hyperbolic metric
        let y = y0 * (y1 / y0).powf(i as f64 / 60.0);
        for k in 0..=60 {
            out.push(Point::half(x0 + (x1 - x0) * k as f64 / 60.0, y).unwrap());
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn interval_lattices_pack_and_cover(seed in any::<u64>(), rho in 0.05f64..2.0, lo in -5.0f64..5.0, len in 0.5f64..6.0) {
        let domain = DomainBox::interval(lo, lo + len);
        let lattice = build_lattice(&domain, rho, 500, seed).unwrap();
        prop_assert!(lattice.certificate.min_pairwise_distance >= rho / 2.0 || lattice.len() == 1);
        prop_assert!(lattice.certificate.covering_radius < rho / 2.0);
        // every point is within a quarter rho of a grid seed, which is itself covered
        let fresh = verify_lattice(&lattice, &probes(&domain)).unwrap();
        prop_assert!(fresh.covering_radius <= 0.75 * rho);
        for p in &lattice.points {
            let (x, _) = p.coords();
            prop_assert!(x >= lo && x <= lo + len);
        }
    }

    #[test]
    fn half_plane_lattices_pack_and_cover(seed in any::<u64>(), rho in 0.4f64..1.5) {
        let domain = DomainBox::half_plane((-1.0, 1.0), (0.5, 2.0));
        let lattice = build_lattice(&domain, rho, 800, seed).unwrap();
        prop_assert!(lattice.certificate.min_pairwise_distance >= rho / 2.0 || lattice.len() == 1);
        prop_assert!(lattice.certificate.covering_radius < rho / 2.0);
        let fresh = verify_lattice(&lattice, &probes(&domain)).unwrap();
        prop_assert!(fresh.covering_radius <= 0.75 * rho, "{} vs {}", fresh.covering_radius, rho);
        for p in &lattice.points {
            let (x, y) = p.coords();
            let y = y.unwrap();
            prop_assert!((-1.0..=1.0).contains(&x) && (0.5..=2.0).contains(&y));
        }
    }

    #[test]
    fn lattices_are_reproducible(seed in any::<u64>()) {
        let domain = DomainBox::half_plane((-1.0, 1.0), (0.5, 2.0));
        let a = build_lattice(&domain, 0.7, 300, seed).unwrap();
        let b = build_lattice(&domain, 0.7, 300, seed).unwrap();
        prop_assert_eq!(a, b);
    }
}
