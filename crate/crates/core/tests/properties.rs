use proptest::prelude::*;
use sirpns::fem::{assemble_reaction_weighted_mass, interpolate, Discretization};
use sirpns::io::{experiment_preset, parse_config, ExperimentId};
use sirpns::model::{safe_population, CoefficientFn};
use sirpns::sparse::{csr_from_triplets, solve_direct};
use sirpns::Mesh;

fn small_mesh() -> impl Strategy<Value = (usize, usize)> {
    (1usize..12, 1usize..12)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn mesh_counts_match_closed_forms((nx, ny) in small_mesh()) {
        let m = Mesh::unit_square(nx, ny).unwrap();
        prop_assert_eq!(m.n_vertices(), (nx + 1) * (ny + 1));
        prop_assert_eq!(m.n_triangles(), 2 * nx * ny);
        prop_assert_eq!(m.boundary_edges().len(), 2 * (nx + ny));
        prop_assert_eq!(m.boundary_vertex_set().len(), 2 * (nx + ny));
        prop_assert!((m.total_area() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn interior_edges_have_two_triangles((nx, ny) in small_mesh()) {
        let m = Mesh::unit_square(nx, ny).unwrap();
        let inc = m.edge_incidence();
        let single = inc.values().filter(|&&k| k == 1).count();
        prop_assert_eq!(single, 2 * (nx + ny));
        prop_assert!(inc.values().all(|&k| k == 1 || k == 2));
    }

    #[test]
    fn clamped_coefficients_stay_in_bounds(
        c0 in -10.0f64..10.0,
        lo in 0.0f64..1.0,
        width in 0.0f64..5.0,
        s in prop::collection::vec(-1e3f64..1e3, 1..64),
    ) {
        let f = CoefficientFn::ClampedAffine { c0, lo, hi: lo + width };
        for x in s {
            let v = f.eval(x);
            prop_assert!(v >= lo && v <= lo + width);
        }
    }

    #[test]
    fn safe_population_respects_floor(
        s in -1.0f64..10.0, i in -1.0f64..10.0, r in -1.0f64..10.0, floor in 1e-12f64..1e-2,
    ) {
        let n = safe_population(s, i, r, floor);
        prop_assert!(n >= floor);
        if s + i + r >= floor {
            prop_assert_eq!(n, s + i + r);
        }
    }

    #[test]
    fn matvec_is_linear(
        entries in prop::collection::vec((0usize..20, 0usize..20, -5.0f64..5.0), 1..80),
        x in prop::collection::vec(-3.0f64..3.0, 20),
        y in prop::collection::vec(-3.0f64..3.0, 20),
        a in -2.0f64..2.0,
        b in -2.0f64..2.0,
    ) {
        let m = csr_from_triplets(&entries, (20, 20)).unwrap();
        let mix: Vec<f64> = x.iter().zip(&y).map(|(p, q)| a * p + b * q).collect();
        let (mx, my, mm) = (m.matvec(&x), m.matvec(&y), m.matvec(&mix));
        let scale = m.values().iter().fold(1.0f64, |s, v| s.max(v.abs())) * 20.0 * 3.0;
        for k in 0..20 {
            prop_assert!((mm[k] - (a * mx[k] + b * my[k])).abs() <= 1e-13 * scale);
        }
    }

    #[test]
    fn direct_solve_residual_is_small(
        off in prop::collection::vec((0usize..15, 0usize..15, -1.0f64..1.0), 0..40),
        rhs in prop::collection::vec(-1.0f64..1.0, 15),
    ) {
        // diagonally dominant, so always solvable
        let mut trip = off;
        trip.extend((0..15).map(|i| (i, i, 50.0)));
        let a = csr_from_triplets(&trip, (15, 15)).unwrap();
        let x = solve_direct(&a, &rhs).unwrap();
        let res = a.residual(&x, &rhs);
        prop_assert!(res.iter().all(|r| r.abs() <= 1e-12));
    }

    #[test]
    fn reaction_mass_is_linear_in_weight(
        w1 in prop::collection::vec(0.0f64..2.0, 25),
        w2 in prop::collection::vec(0.0f64..2.0, 25),
    ) {
        let m = Mesh::unit_square(4, 4).unwrap();
        let sum: Vec<f64> = w1.iter().zip(&w2).map(|(a, b)| a + b).collect();
        let a = assemble_reaction_weighted_mass(&m, &w1).unwrap();
        let b = assemble_reaction_weighted_mass(&m, &w2).unwrap();
        let c = assemble_reaction_weighted_mass(&m, &sum).unwrap();
        prop_assert!(a.same_pattern(&c) && b.same_pattern(&c));
        for k in 0..c.nnz() {
            prop_assert!((c.values()[k] - a.values()[k] - b.values()[k]).abs() <= 1e-12);
        }
    }

    #[test]
    fn constants_integrate_exactly((nx, ny) in small_mesh(), value in -5.0f64..5.0) {
        let disc = Discretization::new(Mesh::unit_square(nx, ny).unwrap()).unwrap();
        let u = interpolate(disc.mesh(), &disc.p1_layout(), |_, _| value).unwrap();
        prop_assert!(u.iter().all(|&v| v == value));
        prop_assert!((disc.integrate(&u) - value).abs() <= 1e-12);
        let total: f64 = disc.mass_row_sums().iter().sum();
        prop_assert!((total - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn custom_configs_round_trip(
        d in prop::collection::vec(0.01f64..1.0, 4),
        alpha in 0.0f64..1.0,
        beta0 in 0.01f64..1.0,
        dt in 0.001f64..0.1,
        n in 2usize..40,
    ) {
        let mut cfg = experiment_preset(ExperimentId::Custom);
        cfg.params.d_s = d[0];
        cfg.params.d_i = d[1];
        cfg.params.d_r = d[2];
        cfg.params.d_c = d[3];
        cfg.params.alpha = alpha;
        cfg.params.beta = CoefficientFn::Affine { c0: beta0 };
        cfg.controls.dt = dt;
        cfg.nx = n;
        cfg.ny = n + 1;
        let text = cfg.to_config_string().unwrap();
        prop_assert_eq!(parse_config(&text).unwrap(), cfg);
    }
}

#[test]
fn every_preset_round_trips() {
    for id in ExperimentId::ALL {
        let cfg = experiment_preset(id);
        let back = parse_config(&cfg.to_config_string().unwrap()).unwrap();
        assert_eq!(back, cfg, "{id}");
    }
}
