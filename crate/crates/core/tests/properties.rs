use cpless::analysis::{
    build_r, dense_equivalence_oracle, gamma_from_bank, gamma_sequence, partial_fraction, two_path,
    unit_circle_min_det, TwoPathOutcome,
};
use cpless::channel::{freq_response, ChannelRealization};
use cpless::dft::{dft, dft_reference, dft_scalar, idft};
use cpless::equalizer::{build_schedule, EqualizerBank, EqualizerMode};
use cpless::harness::{csv_string, parse_csv, SerRecord, SimScheme};
use cpless::{CMatrix, MatrixSequence, VectorSequence};
use num_complex::Complex64;
use proptest::prelude::*;

fn complex() -> impl Strategy<Value = Complex64> {
    (-1.0..1.0f64, -1.0..1.0f64).prop_map(|(re, im)| Complex64::new(re, im))
}

fn nonzero_complex() -> impl Strategy<Value = Complex64> {
    complex().prop_filter("bounded away from zero", |z| z.norm() > 0.05)
}

fn siso_channel(max_taps: usize) -> impl Strategy<Value = ChannelRealization> {
    (nonzero_complex(), prop::collection::vec(complex(), 1..max_taps))
        .prop_map(|(h0, rest)| ChannelRealization::siso(&[vec![h0], rest].concat()).unwrap())
        .prop_filter("last tap nonzero", |ch| {
            ch.taps().scalars().last().unwrap().norm() > 0.05
        })
}

fn mimo_channel() -> impl Strategy<Value = ChannelRealization> {
    (1..=2usize, 1..=3usize).prop_flat_map(|(nt, l)| {
        prop::collection::vec(complex(), nt * nt * l).prop_map(move |v| {
            let taps = v
                .chunks(nt * nt)
                .map(|c| CMatrix::from_rows(nt, nt, c.to_vec()).unwrap())
                .collect();
            ChannelRealization::from_taps(MatrixSequence::new(taps).unwrap())
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dft_is_unitary(n in prop::sample::select(vec![1usize, 2, 3, 4, 8, 12, 16, 512]), seed in any::<u64>()) {
        let mut rng = cpless::rng::seeded(seed);
        let x = VectorSequence::from_flat(1, (0..n).map(|_| cpless::rng::complex_gaussian(&mut rng, 1.0)).collect()).unwrap();
        prop_assert!(idft(&dft(&x).unwrap()).unwrap().max_abs_diff(&x) < 1e-12);
        let fast = dft_scalar(x.as_flat());
        let slow = dft_reference(x.as_flat());
        prop_assert!(fast.iter().zip(&slow).all(|(a, b)| (a - b).norm() < 1e-10));
    }

    #[test]
    fn dft_is_linear(x in prop::collection::vec(complex(), 12), y in prop::collection::vec(complex(), 12), a in complex(), b in complex()) {
        let mix: Vec<Complex64> = x.iter().zip(&y).map(|(p, q)| a * p + b * q).collect();
        let (fx, fy, fm) = (dft_scalar(&x), dft_scalar(&y), dft_scalar(&mix));
        for i in 0..12 {
            prop_assert!((fm[i] - a * fx[i] - b * fy[i]).norm() < 1e-12);
        }
    }

    #[test]
    fn r_is_self_reciprocal(ch in siso_channel(5), k in 0.0..1.0f64) {
        let r = build_r(&ch, k).unwrap();
        let c = r.coeffs();
        let deg = c.len() - 1;
        let scale = r.poly().max_abs();
        for i in 0..=deg {
            prop_assert!((c[i] - c[deg - i].conj()).norm() <= 1e-9 * scale);
        }
    }

    #[test]
    fn mmse_determinant_positive_on_unit_circle(ch in mimo_channel(), k in 0.01..1.0f64) {
        prop_assert!(unit_circle_min_det(&ch, k, 512) > 0.0);
    }

    #[test]
    fn closed_form_gamma_matches_idft(ch in siso_channel(4), k in 0.05..1.0f64, n in 16usize..96) {
        let pf = partial_fraction(&ch, EqualizerMode::Mmse, k).unwrap();
        let closed = gamma_sequence(&pf, n).unwrap();
        let bank = EqualizerBank::design(&freq_response(&ch, n).unwrap(), EqualizerMode::Mmse, k).unwrap();
        let oracle = gamma_from_bank(&bank).unwrap();
        prop_assert!(closed.max_abs_diff(&oracle) < 1e-6);
    }

    #[test]
    fn two_path_root_invariants(h0 in nonzero_complex(), h1 in nonzero_complex(), d in 1usize..4, k in 0.0..1.0f64) {
        let TwoPathOutcome::TwoPath(a) = two_path(h0, h1, d, k).unwrap() else {
            return Err(TestCaseError::fail("both paths nonzero"));
        };
        prop_assert!((a.rho1 - 1.0 / a.rho2.conj()).norm() <= 1e-10 * a.rho1.norm().max(1.0));
        let r2 = a.rho2.norm();
        prop_assert!(r2 >= 1.0 - 1e-12);
        let ratio = (h0.norm() / h1.norm()).max(h1.norm() / h0.norm());
        prop_assert!(r2 >= ratio * (1.0 - 1e-12));
    }

    #[test]
    fn schedule_tiles_stream(frames in 1usize..6, n in 8usize..64, frac in 0.0..0.49f64) {
        let d = (frac * n as f64) as usize;
        let m = frames * n;
        let sched = build_schedule(m, n, d).unwrap();
        let mut seen = vec![0u32; m];
        for w in sched.windows() {
            for i in w.kept.clone() {
                seen[i] += 1;
            }
        }
        prop_assert!(seen.iter().all(|&c| c == 1));
    }

    #[test]
    fn ser_csv_roundtrip(rows in prop::collection::vec((0usize..6, -10.0..40.0f64, 0usize..64, 1u64..1_000_000, any::<u64>()), 1..12), frac in 0.0..=1.0f64) {
        let recs: Vec<SerRecord> = rows
            .iter()
            .map(|&(s, snr, d, trials, seed)| {
                let errors = (frac * trials as f64) as u64;
                SerRecord::new(SimScheme::ALL[s], snr, d, trials, errors, seed).unwrap()
            })
            .collect();
        let text = csv_string(&recs).unwrap();
        prop_assert_eq!(parse_csv(&text).unwrap(), recs);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn per_tone_equals_dense_equalizer(ch in mimo_channel(), k in prop::sample::select(vec![0.0, 0.1]), seed in any::<u64>()) {
        if k == 0.0 {
            // ZF needs every tone invertible with some margin.
            let hf = freq_response(&ch, 16).unwrap();
            prop_assume!(hf.iter().all(|m| m.det().norm() > 1e-3));
        }
        prop_assert!(dense_equivalence_oracle(&ch, 16, k, 1, seed).unwrap() < 1e-8);
    }
}
