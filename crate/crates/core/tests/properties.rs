//! Property tests for the structural invariants of the library.

use proptest::prelude::*;
use serde_json::json;
use zerovar::chaos::{chaos_polys, Rational};
use zerovar::cli::output::{config_from_text, Artifact, Cell};
use zerovar::mc::{count_zeros, discretize};
use zerovar::spectral::{mu_hat, CatalogSpec, Kernel, SpectralMeasure};
use zerovar::variance::{arccos_remainder, degenerate_variance, key_integral, parseval_dual, special_atom_scaling};

fn rational(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

fn catalog() -> impl Strategy<Value = CatalogSpec> {
    prop_oneof![
        Just(CatalogSpec::Sinc),
        Just(CatalogSpec::Gaussian),
        Just(CatalogSpec::BesselJ0),
        (0.05..0.24f64).prop_map(|b| CatalogSpec::Powerlaw { b }),
        (0.2..3.0f64).prop_map(|sigma| CatalogSpec::Cosine { sigma }),
    ]
}

fn two_atoms() -> impl Strategy<Value = Vec<(f64, f64)>> {
    (0.1..3.0f64, 0.1..3.0f64, 0.05..0.95f64).prop_filter("distinct frequencies", |(a, b, _)| (a - b).abs() > 0.05).prop_map(|(a, b, w)| vec![(a, w), (b, 1.0 - w)])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn p_q_is_even_homogeneous_and_factors(q in 1u32..=8, x in -50i64..50, y in -50i64..50, z in -50i64..50, d in 1i64..20) {
        let polys = chaos_polys(q).unwrap();
        prop_assert!(polys.p.is_homogeneous(2 * q));
        prop_assert!(polys.p.is_even_in_y());
        let (x, y, z) = (rational(x, d), rational(y, d), rational(z, d));
        let s = &x + &z;
        prop_assert_eq!(polys.p.eval_rational(&x, &y, &z), &s * &s * polys.r.eval_rational(&x, &y, &z));
        prop_assert_eq!(polys.p.eval_rational(&x, &-y.clone(), &z), polys.p.eval_rational(&x, &y, &z));
    }

    #[test]
    fn kernels_are_normalised_and_bounded(spec in catalog(), t in 0.01..200.0f64) {
        let k = Kernel::from_catalog(&spec).unwrap();
        prop_assert!((k.r(0.0) - 1.0).abs() < 1e-14);
        prop_assert!(mu_hat(&k, 0.0).abs() < 1e-12);
        prop_assert!(k.r(t).abs() <= 1.0 + 1e-12);
        prop_assert!((k.r(t) - k.r(-t)).abs() < 1e-14);
    }

    #[test]
    fn parseval_duality_for_two_atoms(atoms in two_atoms(), t in 1.0..60.0f64) {
        let measure = SpectralMeasure::atomic(atoms.clone());
        let k = Kernel::from_catalog(&CatalogSpec::Atomic { atoms }).unwrap();
        let i = key_integral(&k, t, 1e-12).unwrap();
        let d = parseval_dual(&measure, t, 1e-12).unwrap();
        prop_assert!((i - d).abs() <= 1e-8 * i.abs().max(1e-12), "{} vs {}", i, d);
    }

    #[test]
    fn special_atom_scales_by_one_minus_theta_squared(theta in 0.01..0.99f64, t in 2.0..40.0f64) {
        let k = Kernel::from_catalog(&CatalogSpec::Gaussian).unwrap();
        let s = special_atom_scaling(&k, theta, t, 1e-12).unwrap();
        let expect = (1.0 - theta) * (1.0 - theta);
        prop_assert!((s.ratio - expect).abs() <= 1e-9 * expect);
    }

    #[test]
    fn bernoulli_variances_lie_in_quarter_interval(sigma in 0.1..5.0f64, t in 0.0..100.0f64, r in -1.0..1.0f64) {
        let v = degenerate_variance(sigma, t).unwrap();
        prop_assert!((0.0..=0.25).contains(&v));
        let a = arccos_remainder(r);
        prop_assert!((0.0..=0.25 + 1e-15).contains(&a));
    }

    #[test]
    fn zero_count_is_sign_scale_and_reversal_invariant(values in prop::collection::vec(-1.0..1.0f64, 2..300), c in 0.1..10.0f64) {
        let base = count_zeros(&values, 0.0);
        let flipped: Vec<f64> = values.iter().map(|v| -c * v).collect();
        let reversed: Vec<f64> = values.iter().rev().copied().collect();
        prop_assert_eq!(count_zeros(&flipped, 0.0).zeros, base.zeros);
        prop_assert_eq!(count_zeros(&reversed, 0.0).zeros, base.zeros);
        prop_assert!(base.zeros < values.len() as u64);
        let changes = values.windows(2).filter(|w| w[0] * w[1] < 0.0).count() as u64;
        prop_assert!(base.zeros >= changes);
    }

    #[test]
    fn spectral_nodes_keep_mass_and_second_moment(j in 256usize..1200) {
        let k = Kernel::from_catalog(&CatalogSpec::Sinc).unwrap();
        let nodes = discretize(k.measure().unwrap(), j).unwrap();
        prop_assert!((nodes.mass() - 1.0).abs() < 1e-12);
        prop_assert!((nodes.second_moment() - k.sigma2()).abs() < 1e-12);
        prop_assert!((nodes.covariance(0.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn csv_cells_round_trip(v in prop::num::f64::NORMAL | prop::num::f64::SUBNORMAL | prop::num::f64::ZERO, label in "[a-z,\" ]{0,12}") {
        let mut a = Artifact::new(&["v", "label"]);
        a.row(vec![Cell::Num(v), Cell::from(label.as_str())]);
        let cfg = json!({"command": "sweep", "x": v});
        let csv = a.to_csv(&cfg);
        prop_assert_eq!(config_from_text(&csv).unwrap(), cfg);
        let row = csv.lines().nth(3).unwrap();
        let first = row.split(',').next().unwrap();
        prop_assert_eq!(first.parse::<f64>().unwrap().to_bits(), v.to_bits());
    }
}
