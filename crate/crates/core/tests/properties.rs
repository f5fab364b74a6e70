//! Property tests for the structural invariants: partition covers, cube
//! machinery, cut-off bounds, dual transforms, counting comparability, and
//! serialization round trips.

use proptest::prelude::*;

use landscape_core::landscape::LandscapeField;
use landscape_core::lattice::{cutoff, gradient, make_torus, partition, Cube};
use landscape_core::operator::{assemble, dual_vector};
use landscape_core::potential::PotentialField;
use landscape_core::spectrum::{ids_curve, CountOptions};
use landscape_core::{box_counting, box_counting_shifted, s_of_mu};

/// (d, K) pairs small enough for exhaustive scans.
fn torus_shape() -> impl Strategy<Value = (usize, usize)> {
    prop_oneof![
        (Just(1usize), 3usize..=20),
        (Just(2usize), 3usize..=8),
        (Just(3usize), 3usize..=5),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn partition_is_disjoint_exact_cover(
        (d, k) in torus_shape(),
        s_frac in 0.0f64..1.0,
        shift_frac in 0.0f64..1.0,
    ) {
        let t = make_torus(d, k).unwrap();
        let s = 1 + (s_frac * (k - 1) as f64) as usize;
        let shift: Vec<usize> = (0..d).map(|i| ((shift_frac * (i + 1) as f64 * 7.3) as usize) % s).collect();
        let p = partition(t, s, Some(&shift)).unwrap();
        let mut mult = vec![0usize; t.volume()];
        for b in p.boxes() {
            b.for_each_site(|n| mult[n] += 1);
        }
        prop_assert!(mult.iter().all(|&m| m == 1));
        // per-axis lengths are s except one remainder
        let boxes = p.boxes();
        let sides: Vec<usize> = boxes.iter().map(|b| b.lengths()[0]).collect();
        let small = sides.iter().filter(|&&l| l != s).count();
        prop_assert!(small == 0 || sides.iter().filter(|&&l| l != s).all(|&l| l == k % s));
    }

    #[test]
    fn middle_third_tripled_stays_inside(
        side in 3usize..=15,
        anchor_frac in 0.0f64..1.0,
    ) {
        let k = 3 * side + 2;
        let t = make_torus(1, k).unwrap();
        let anchor = 1 + (anchor_frac * (k - 1) as f64) as usize;
        let q = Cube::new(t, vec![anchor], vec![side]).unwrap();
        let inner = q.middle_third().unwrap().tripled().unwrap();
        let q_sites: std::collections::HashSet<_> = q.sites().into_iter().collect();
        for s in inner.sites() {
            prop_assert!(q_sites.contains(&s));
        }
        if side % 3 == 0 {
            prop_assert_eq!(inner.volume(), q.volume());
        }
    }

    #[test]
    fn cutoff_is_bounded_and_supported(
        side in 3usize..=9,
        d in 1usize..=2,
        anchor_frac in 0.0f64..1.0,
    ) {
        let k = 3 * side;
        let t = make_torus(d, k).unwrap();
        let a = 1 + (anchor_frac * (k - 1) as f64) as usize;
        let q = Cube::new(t, vec![a; d], vec![side; d]).unwrap();
        let chi = cutoff(&q).unwrap();
        let bound = 3.0 / side as f64 + 1e-14;
        let g = gradient(t, &chi).unwrap();
        for n in t.sites() {
            prop_assert!((0.0..=1.0).contains(&chi[n]));
            for axis in 0..d {
                prop_assert!(g.component(axis)[n].abs() <= bound);
            }
        }
        let q_sites: std::collections::HashSet<_> = q.sites().into_iter().collect();
        for n in t.sites() {
            if !q_sites.contains(&n) {
                prop_assert_eq!(chi[n], 0.0);
            }
        }
        // 1 exactly on the middle third
        for s in q.middle_third().unwrap().sites() {
            prop_assert_eq!(chi[s], 1.0);
        }
    }

    #[test]
    fn dual_vector_is_an_isometric_involution(
        k_half in 2usize..=12,
        seedling in 0u64..1000,
    ) {
        let t = make_torus(1, 2 * k_half).unwrap();
        let phi: Vec<f64> = (0..t.volume()).map(|i| ((i as u64 * 2654435761 + seedling) % 997) as f64 / 499.0 - 1.0).collect();
        let tilde = dual_vector(t, &phi).unwrap();
        let back = dual_vector(t, &tilde).unwrap();
        prop_assert_eq!(&back, &phi);
        let n1: f64 = phi.iter().map(|x| x * x).sum();
        let n2: f64 = tilde.iter().map(|x| x * x).sum();
        prop_assert!((n1 - n2).abs() <= 1e-12 * (1.0 + n1));
    }

    #[test]
    fn shifted_box_counts_within_3d_factor(
        (d, k) in torus_shape(),
        mu in 0.05f64..2.0,
        shift_frac in 0.0f64..1.0,
    ) {
        let t = make_torus(d, k).unwrap();
        let u: Vec<f64> = (0..t.volume())
            .map(|i| 0.2 + ((i as u64 * 40503 + 77) % 1009) as f64 / 30.0)
            .collect();
        let l = LandscapeField::from_values(t, u).unwrap();
        let s = s_of_mu(mu).unwrap();
        prop_assume!(s <= k);
        let base = box_counting(&l, mu).unwrap();
        let shift: Vec<usize> = (0..d).map(|i| ((shift_frac * 13.7) as usize + i) % s).collect();
        let shifted = box_counting_shifted(&l, mu, Some(&shift)).unwrap();
        if base > 0.0 && shifted > 0.0 {
            let f = 3f64.powi(d as i32);
            prop_assert!(shifted / base <= f + 1e-12);
            prop_assert!(base / shifted <= f + 1e-12);
        }
    }

    #[test]
    fn refinement_counts_within_stated_factor(
        (d, k) in torus_shape(),
        r_small in 1usize..=4,
        extra in 1usize..=4,
    ) {
        let t = make_torus(d, k).unwrap();
        let r_big = r_small + extra;
        prop_assume!(r_big <= k);
        let w: Vec<f64> = (0..t.volume())
            .map(|i| 0.1 + ((i as u64 * 9001 + 5) % 613) as f64 / 100.0)
            .collect();
        let threshold = 2.5;
        let count_at = |side: usize| -> f64 {
            let p = partition(t, side, None).unwrap();
            p.boxes()
                .iter()
                .filter(|b| {
                    let mut min = f64::INFINITY;
                    b.for_each_site(|n| min = min.min(w[n]));
                    min <= threshold
                })
                .count() as f64
        };
        let fine = count_at(r_small);
        let coarse = count_at(r_big);
        if fine > 0.0 && coarse > 0.0 {
            let factor = (r_big as f64 / r_small as f64 + 2.0).powi(d as i32);
            prop_assert!(fine / coarse <= factor + 1e-9);
            prop_assert!(coarse / fine <= factor + 1e-9);
        }
    }

    #[test]
    fn hamiltonian_is_exactly_symmetric(
        (d, k) in torus_shape(),
        vmax in 0.5f64..6.0,
    ) {
        let t = make_torus(d, k).unwrap();
        let vals: Vec<f64> = (0..t.volume()).map(|i| (i % 5) as f64 * vmax / 4.0).collect();
        let h = assemble(t, PotentialField::explicit(t, vals).unwrap()).unwrap();
        let m = h.dense();
        for i in 0..h.n() {
            for j in 0..i {
                prop_assert_eq!(m[(i, j)], m[(j, i)]);
            }
        }
    }

    #[test]
    fn ids_curve_monotone_in_unit_interval(
        k in 6usize..=24,
        seedling in 0u64..100,
    ) {
        let t = make_torus(1, k).unwrap();
        let vals: Vec<f64> = (0..k).map(|i| ((i as u64 * 31 + seedling) % 17) as f64 / 3.0).collect();
        let h = assemble(t, PotentialField::explicit(t, vals).unwrap()).unwrap();
        let top = h.top_of_spectrum();
        let grid: Vec<f64> = (0..40).map(|i| -0.2 + (top + 0.4) * i as f64 / 39.0).collect();
        let c = ids_curve(&h, &grid, &CountOptions::default()).unwrap();
        prop_assert!(c.is_nondecreasing());
        prop_assert!(c.values.iter().all(|&v| (0.0..=1.0).contains(&v)));
        prop_assert_eq!(*c.values.last().unwrap(), 1.0);
    }

    #[test]
    fn potential_text_round_trips_exactly(
        (d, k) in torus_shape(),
        scale in 0.1f64..100.0,
    ) {
        let t = make_torus(d, k).unwrap();
        let vals: Vec<f64> = (0..t.volume()).map(|i| scale * ((i * 7919) % 1000) as f64 / 999.0).collect();
        let v = PotentialField::explicit(t, vals).unwrap();
        let back = PotentialField::from_text(&v.to_text()).unwrap();
        prop_assert_eq!(back.values(), v.values());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn quadratic_form_matches_inner_product(
        k in 5usize..=16,
        seedling in 0u64..50,
    ) {
        let t = make_torus(2, k).unwrap();
        let n = t.volume();
        let vals: Vec<f64> = (0..n).map(|i| ((i as u64 * 131 + seedling) % 23) as f64 / 4.0).collect();
        let h = assemble(t, PotentialField::explicit(t, vals).unwrap()).unwrap();
        let f: Vec<f64> = (0..n).map(|i| ((i as u64 * 733 + seedling) % 101) as f64 / 50.0 - 1.0).collect();
        let a = h.quadratic_form(&f).unwrap();
        let hf = h.apply(&f).unwrap();
        let b: f64 = f.iter().zip(&hf).map(|(x, y)| x * y).sum();
        prop_assert!((a - b).abs() <= 1e-10 * (1.0 + a.abs()));
    }
}
