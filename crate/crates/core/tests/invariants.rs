use effdim::bounds::{bound_rhs_log, xi_n, BoundInputs};
use effdim::effdim::effective_dimension_from_kappa;
use effdim::fisher::{normalize, EstimatorTag, KroneckerBlock, Region};
use effdim::{sample_ball, Architecture, BallSpec, FisherOperator, ParamPoint, Spectrum};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn spectra_strategy() -> impl Strategy<Value = Vec<Vec<f64>>> {
    (1usize..12, 1usize..6).prop_flat_map(|(d, k)| {
        prop::collection::vec(prop::collection::vec(prop_oneof![Just(0.0), 1e-6..50.0f64], d), k)
    })
}

fn normalized(raw: &[Vec<f64>]) -> Option<Vec<Spectrum>> {
    let spectra: Vec<Spectrum> = raw.iter().map(|v| Spectrum::new(v.clone()).unwrap()).collect();
    normalize(&spectra, Region::Point).ok().map(|(s, _)| s)
}

fn psd(rows: usize, entries: &[f64]) -> DMatrix<f64> {
    let b = DMatrix::from_row_slice(rows, rows, &entries[..rows * rows]);
    &b * b.transpose()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn ed_is_nonnegative_and_zeta_is_max(raw in spectra_strategy(), log_k in 0.05..12.0f64) {
        if let Some(s) = normalized(&raw) {
            let (ed, z, zeta) = effective_dimension_from_kappa(&s, log_k.exp()).unwrap();
            prop_assert!(ed >= 0.0);
            prop_assert!(z.iter().all(|v| *v <= zeta) && z.contains(&zeta));
        }
    }

    // trace-d spectrum: Σ log(1+κλ) ≤ d log(1+κ), equality at λ ≡ 1
    #[test]
    fn single_sample_ed_bounded_by_flat_spectrum(raw in spectra_strategy(), log_k in 0.05..12.0f64) {
        if let Some(s) = normalized(&raw[..1]) {
            let k = log_k.exp();
            let ed = effective_dimension_from_kappa(&s, k).unwrap().0;
            let d = s[0].len() as f64;
            let flat = d * k.ln_1p() / k.ln();
            prop_assert!(ed <= flat * (1.0 + 1e-12), "ed {ed} flat {flat}");
            let ones = Spectrum::new(vec![1.0; s[0].len()]).unwrap();
            let top = effective_dimension_from_kappa(&[ones], k).unwrap().0;
            prop_assert!((top - flat).abs() < 1e-12 * flat);
        }
    }

    #[test]
    fn normalization_fixes_mean_trace_and_ignores_scale(raw in spectra_strategy(), c in -6.0..6.0f64) {
        if let Some(s) = normalized(&raw) {
            let d = s[0].len() as f64;
            let mean = s.iter().map(Spectrum::trace).sum::<f64>() / s.len() as f64;
            prop_assert!((mean - d).abs() < 1e-10 * d);
            let scaled: Vec<Vec<f64>> = raw.iter().map(|v| v.iter().map(|x| x * 10f64.powf(c)).collect()).collect();
            let t = normalized(&scaled).unwrap();
            let a = effective_dimension_from_kappa(&s, 500.0).unwrap().0;
            let b = effective_dimension_from_kappa(&t, 500.0).unwrap().0;
            prop_assert!((a - b).abs() < 1e-10 * d.max(1.0));
        }
    }

    #[test]
    fn sample_order_and_duplication_do_not_matter(raw in spectra_strategy(), log_k in 0.5..10.0f64) {
        if let Some(s) = normalized(&raw) {
            let k = log_k.exp();
            let base = effective_dimension_from_kappa(&s, k).unwrap().0;
            let mut rev = s.clone();
            rev.reverse();
            let doubled: Vec<Spectrum> = s.iter().chain(s.iter()).cloned().collect();
            prop_assert!((effective_dimension_from_kappa(&rev, k).unwrap().0 - base).abs() < 1e-10);
            prop_assert!((effective_dimension_from_kappa(&doubled, k).unwrap().0 - base).abs() < 1e-10);
        }
    }

    #[test]
    fn ed_never_exceeds_largest_single_sample(raw in spectra_strategy(), log_k in 0.5..10.0f64) {
        if let Some(s) = normalized(&raw) {
            let k = log_k.exp();
            let all = effective_dimension_from_kappa(&s, k).unwrap().0;
            let best = s
                .iter()
                .map(|one| effective_dimension_from_kappa(std::slice::from_ref(one), k).unwrap().0)
                .fold(0.0, f64::max);
            prop_assert!(all <= best + 1e-10);
        }
    }

    #[test]
    fn ball_samples_stay_inside(dim in 1usize..30, radius in 1e-4..10.0f64, seed in any::<u64>()) {
        let center = ParamPoint::new((0..dim).map(|i| i as f64 * 0.1).collect(), Architecture::Logistic { dim }).unwrap();
        let ball = BallSpec::new(center.clone(), radius).unwrap();
        let pts = sample_ball(&ball, 16, seed).unwrap();
        for p in &pts {
            prop_assert!(p.distance(&center) <= radius);
        }
        prop_assert_eq!(sample_ball(&ball, 16, seed).unwrap(), pts);
    }

    #[test]
    fn kronecker_spectrum_matches_dense(
        a_rows in 2usize..5,
        g_rows in 1usize..4,
        entries in prop::collection::vec(-2.0..2.0f64, 32),
    ) {
        let a = psd(a_rows, &entries);
        let g = psd(g_rows, &entries[16..]);
        let op = FisherOperator::kronecker(vec![KroneckerBlock::new(a.clone(), g.clone()).unwrap()], EstimatorTag::Empirical).unwrap();
        let fast = op.spectrum().unwrap();
        let dense = FisherOperator::dense(a.kronecker(&g), EstimatorTag::Empirical).unwrap().spectrum().unwrap();
        let scale = 1.0 + dense.max();
        for (x, y) in fast.values().iter().zip(dense.values()) {
            prop_assert!((x - y).abs() < 1e-9 * scale, "{x} vs {y}");
        }
        prop_assert!((op.trace() - a.trace() * g.trace()).abs() < 1e-9 * scale);
    }

    #[test]
    fn xi_scales_inversely_with_sqrt_kappa(m in 0.01..10.0f64, eps in 1e-3..1.0f64, k in 1.5..1e6f64) {
        let a = xi_n(m, eps, k).unwrap();
        let b = xi_n(m, eps, 4.0 * k).unwrap();
        prop_assert!((a - 2.0 * b).abs() < 1e-12 * a);
    }

    #[test]
    fn log_rhs_grows_with_effective_dimension(n in 100u64..1_000_000, lo in 0.0..50.0f64, extra in 0.0..50.0f64) {
        let gamma = 1.0;
        let a = bound_rhs_log(&BoundInputs::new(n, gamma, 100, lo)).unwrap();
        let b = bound_rhs_log(&BoundInputs::new(n, gamma, 100, lo + extra)).unwrap();
        prop_assert!(b.log_rhs >= a.log_rhs);
        prop_assert!((b.log_rhs - a.log_rhs - 0.5 * extra * a.kappa.ln()).abs() < 1e-8 * (1.0 + b.log_rhs.abs()));
    }
}
