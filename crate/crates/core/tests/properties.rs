use opmeasure::json::{from_json, to_json};
use opmeasure::linalg::{gaussian_matrix, gaussian_vector, haar_unitary, min_hermitian_eigenvalue, op_norm, CMatrix, CVector, C};
use opmeasure::measurable::{integrate_scalar, AtomicSpace, ComplexMeasure, FunctionSpec, MeasurableFunction, MeasurableSet};
use opmeasure::normed::{abs_sum_dual_sup, dual_ball_sample, pair, phase_ascent_trace, Budget, Functional, Norm, SpaceDescriptor};
use opmeasure::operator_measure::spectral_measure_of;
use opmeasure::quantum::{
    instrument_apply, povm_integrate, povm_probabilities, random_instrument, random_povm, random_state, DensityOperator,
};
use opmeasure::verify::oracles::{conjugated_diagonal, phase_grid_sup_l2};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn cx() -> impl Strategy<Value = C> {
    (-10.0..10.0f64, -10.0..10.0f64).prop_map(|(re, im)| C::new(re, im))
}

fn weights(max: usize) -> impl Strategy<Value = Vec<C>> {
    prop::collection::vec(cx(), 1..max)
}

fn norm() -> impl Strategy<Value = Norm> {
    prop::sample::select(Norm::ALL.to_vec())
}

fn vector(d: usize, seed: u64) -> CVector {
    gaussian_vector(&mut ChaCha8Rng::seed_from_u64(seed), d)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn disjoint_additivity(w in weights(16), mask in any::<u32>(), other in any::<u32>()) {
        let sp = AtomicSpace::indexed(w.len());
        let mu = ComplexMeasure::from_weights(&sp, w.clone()).unwrap();
        let e: Vec<usize> = (0..w.len()).filter(|i| mask & (1 << i) != 0).collect();
        let f: Vec<usize> = (0..w.len()).filter(|i| mask & (1 << i) == 0 && other & (1 << i) != 0).collect();
        let (e, f) = (MeasurableSet::from_indices(&sp, e).unwrap(), MeasurableSet::from_indices(&sp, f).unwrap());
        let joint = mu.measure_of(&e.union(&f).unwrap()).unwrap();
        let split = mu.measure_of(&e).unwrap() + mu.measure_of(&f).unwrap();
        let scale: f64 = w.iter().map(|c| c.norm()).sum();
        prop_assert!((joint - split).norm() <= 1e-14 * w.len() as f64 * scale.max(1.0));
    }

    #[test]
    fn total_variation_dominates(w in weights(16), mask in any::<u32>()) {
        let sp = AtomicSpace::indexed(w.len());
        let mu = ComplexMeasure::from_weights(&sp, w.clone()).unwrap();
        let e = MeasurableSet::from_indices(&sp, (0..w.len()).filter(|i| mask & (1 << i) != 0)).unwrap();
        prop_assert!(mu.measure_of(&e).unwrap().norm() <= mu.total_variation(&e).unwrap() * (1.0 + 1e-14));
    }

    #[test]
    fn integral_is_bilinear(w in weights(12), a in cx(), b in cx(), seed in any::<u64>()) {
        let m = w.len();
        let sp = AtomicSpace::indexed(m);
        let mu = ComplexMeasure::from_weights(&sp, w).unwrap();
        let nu = ComplexMeasure::from_weights(&sp, vector(m, seed).iter().copied().collect()).unwrap();
        let f = MeasurableFunction::tabulated(&sp, vector(m, seed ^ 1).iter().copied().collect()).unwrap();
        let g = MeasurableFunction::tabulated(&sp, vector(m, seed ^ 2).iter().copied().collect()).unwrap();
        let scale = (a.norm() + b.norm()).max(1.0) * (mu.total_variation_all() + nu.total_variation_all()) * (f.sup_norm() + g.sup_norm()).max(1.0);
        let combo = f.scaled(a).add(&g.scaled(b)).unwrap();
        let lhs = integrate_scalar(&combo, &mu).unwrap();
        let rhs = a * integrate_scalar(&f, &mu).unwrap() + b * integrate_scalar(&g, &mu).unwrap();
        prop_assert!((lhs - rhs).norm() <= 1e-12 * scale);
        let mixed = mu.scaled(a).add(&nu.scaled(b)).unwrap();
        let lhs = integrate_scalar(&f, &mixed).unwrap();
        let rhs = a * integrate_scalar(&f, &mu).unwrap() + b * integrate_scalar(&f, &nu).unwrap();
        prop_assert!((lhs - rhs).norm() <= 1e-12 * scale);
    }

    #[test]
    fn quantization_error_is_bounded(w in weights(12), f in weights(12), h in 1e-6..1.0f64) {
        let m = w.len().min(f.len());
        let sp = AtomicSpace::indexed(m);
        let mu = ComplexMeasure::from_weights(&sp, w[..m].to_vec()).unwrap();
        let f = MeasurableFunction::tabulated(&sp, f[..m].to_vec()).unwrap();
        let gap = (integrate_scalar(&f, &mu).unwrap() - integrate_scalar(&f.quantized(h), &mu).unwrap()).norm();
        prop_assert!(gap <= h * mu.total_variation_all() * (1.0 + 1e-12));
    }

    #[test]
    fn holder_inequality(d in 1usize..9, n in norm(), seed in any::<u64>()) {
        let space = SpaceDescriptor::new(d, n).unwrap();
        let x = vector(d, seed);
        for l in dual_ball_sample(&space, 8, seed) {
            let lhs = pair(&l, &x).unwrap().norm();
            prop_assert!(lhs <= (1.0 + 1e-12) * space.dual_norm(l.coeffs()) * space.norm(&x));
        }
    }

    #[test]
    fn dual_sup_brackets(d in 1usize..5, m in 1usize..7, n in norm(), seed in any::<u64>()) {
        let space = SpaceDescriptor::new(d, n).unwrap();
        let vs: Vec<CVector> = (0..m).map(|i| vector(d, seed.wrapping_add(i as u64))).collect();
        let b = abs_sum_dual_sup(&vs, &space, &Budget { seed, ..Budget::default() }).unwrap();
        prop_assert!(b.lower <= b.upper * (1.0 + 1e-12));
        if n == Norm::L2 && m <= 3 && d <= 3 {
            let grid = phase_grid_sup_l2(&vs, 1e-3);
            prop_assert!(b.contains(grid, 1e-3));
        }
    }

    #[test]
    fn phase_ascent_never_decreases(d in 1usize..6, m in 1usize..8, n in norm(), seed in any::<u64>()) {
        let space = SpaceDescriptor::new(d, n).unwrap();
        let vs: Vec<CVector> = (0..m).map(|i| vector(d, seed.wrapping_add(7 * i as u64))).collect();
        let start = dual_ball_sample(&space, 1, seed).remove(0);
        let (trace, _) = phase_ascent_trace(&vs, &space, &start, 50, 0.0);
        for w in trace.windows(2) {
            prop_assert!(w[1] >= w[0] * (1.0 - 1e-12));
        }
    }

    #[test]
    fn calculus_is_a_homomorphism(d in 1usize..7, seed in any::<u64>(), p in prop::collection::vec(cx(), 1..4), q in prop::collection::vec(cx(), 1..4)) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = haar_unitary(&mut rng, d);
        let eigs: Vec<C> = gaussian_vector(&mut rng, d).iter().copied().collect();
        let t = conjugated_diagonal(&u, &eigs, |z| z);
        let e = spectral_measure_of(&t, None).unwrap();
        let fp = e.apply(&FunctionSpec::Poly(p.clone())).unwrap();
        let fq = e.apply(&FunctionSpec::Poly(q.clone())).unwrap();
        let len = p.len().max(q.len());
        let sum: Vec<C> = (0..len).map(|i| p.get(i).copied().unwrap_or_default() + q.get(i).copied().unwrap_or_default()).collect();
        let mut prod = vec![C::default(); p.len() + q.len() - 1];
        for (i, a) in p.iter().enumerate() {
            for (j, b) in q.iter().enumerate() {
                prod[i + j] += a * b;
            }
        }
        let scale = (op_norm(&fp) * op_norm(&fq)).max(op_norm(&fp) + op_norm(&fq)).max(1.0);
        prop_assert!(op_norm(&(e.apply(&FunctionSpec::Poly(sum)).unwrap() - (&fp + &fq))) <= 1e-10 * scale);
        prop_assert!(op_norm(&(e.apply(&FunctionSpec::Poly(prod)).unwrap() - &fp * &fq)) <= 1e-10 * scale);
    }

    #[test]
    fn trace_preserving_instruments_yield_states(d in 1usize..6, m in 1usize..5, k in 1usize..3, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = random_instrument(&mut rng, d, m, k);
        let rho = random_state(&mut rng, d, d);
        let out = instrument_apply(&inst, &MeasurableSet::all(inst.measurable()), &rho).unwrap();
        prop_assert!((out.trace() - 1.0).abs() <= 1e-10);
        prop_assert!(DensityOperator::normalized(out.matrix().clone()).is_ok());
    }

    #[test]
    fn povm_statistics(d in 1usize..6, m in 1usize..6, seed in any::<u64>(), f in prop::collection::vec(0.0..5.0f64, 5)) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let povm = random_povm(&mut rng, d, m);
        let rho = random_state(&mut rng, d, 1);
        let probs = povm_probabilities(&povm, &rho).unwrap();
        prop_assert!(probs.weights().iter().all(|p| p.re >= -1e-12 && p.im.abs() <= 1e-10));
        prop_assert!((probs.weights().iter().map(|p| p.re).sum::<f64>() - 1.0).abs() <= 1e-10);
        let g = MeasurableFunction::tabulated_real(povm.measurable(), &f[..m]).unwrap();
        prop_assert!(min_hermitian_eigenvalue(&povm_integrate(&g, &povm).unwrap()) >= -1e-10);
    }

    #[test]
    fn measures_round_trip_through_json(w in weights(10)) {
        let sp = AtomicSpace::indexed(w.len());
        let mu = ComplexMeasure::from_weights(&sp, w).unwrap();
        let back: ComplexMeasure = from_json(&to_json(&mu)).unwrap();
        prop_assert_eq!(back.weights(), mu.weights());
        prop_assert_eq!(to_json(&back), to_json(&mu));
    }

    #[test]
    fn matrices_round_trip_exactly(d in 1usize..6, seed in any::<u64>()) {
        let m: CMatrix = gaussian_matrix(&mut ChaCha8Rng::seed_from_u64(seed), d, d);
        let back = opmeasure::json::read_matrix(&opmeasure::json::write_matrix(&m)).unwrap();
        prop_assert_eq!(back, m);
    }

    #[test]
    fn functionals_are_linear(d in 1usize..6, a in cx(), seed in any::<u64>()) {
        let l = Functional::new(vector(d, seed));
        let (x, y) = (vector(d, seed ^ 3), vector(d, seed ^ 4));
        let lhs = l.apply(&(&x * a + &y)).unwrap();
        let rhs = a * l.apply(&x).unwrap() + l.apply(&y).unwrap();
        prop_assert!((lhs - rhs).norm() <= 1e-12 * (1.0 + a.norm()) * (l.coeffs().norm() * (x.norm() + y.norm())).max(1.0));
    }
}
