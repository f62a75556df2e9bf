use dmmcodes::codec::{build_system, matmul, parse_transcript_line, CodecError, CodedProduct, Matrix, WorkerResponse};
use dmmcodes::constructions::{
    better_box, box_matdot, box_poly, corner_d, half_hyperbolic, sep_vars, validate_poly, Solution,
};
use dmmcodes::exponents::{reduce_q, total, xi_bound, ExponentSet, ExponentVector, DEFAULT_LIMIT};
use dmmcodes::field::Field;
use dmmcodes::simulator::{plan, run, sweep, SimConfig, StragglerModel};
use proptest::prelude::*;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const PRIMES: [u64; 6] = [2, 3, 5, 7, 11, 13];

fn arb_set(q: u64, l: usize) -> impl Strategy<Value = ExponentSet> {
    prop::collection::vec(prop::collection::vec(0..q as u32, l), 1..12)
        .prop_map(move |vs| ExponentSet::new(q, l, vs.into_iter().map(ExponentVector)).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn prime_field_matches_modular_arithmetic(i in 0..PRIMES.len(), a in 0u32..1000, b in 0u32..1000) {
        let p = PRIMES[i];
        let f = Field::new(p as u32, 1).unwrap();
        let (a, b) = (a % p as u32, b % p as u32);
        prop_assert_eq!(f.add(a, b) as u64, (a as u64 + b as u64) % p);
        prop_assert_eq!(f.mul(a, b) as u64, (a as u64 * b as u64) % p);
        prop_assert_eq!(f.sub(a, b) as u64, (a as u64 + p - b as u64) % p);
        if a != 0 {
            prop_assert_eq!(f.mul(a, f.inv(a).unwrap()), 1);
        }
    }

    #[test]
    fn extension_field_axioms(spec in prop::sample::select(vec!["4", "8", "9", "16", "25", "27", "64", "2^8/285"]),
                              a in any::<u32>(), b in any::<u32>(), c in any::<u32>()) {
        let f: Field = spec.parse().unwrap();
        let q = f.order() as u32;
        let (a, b, c) = (a % q, b % q, c % q);
        prop_assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
        prop_assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
        prop_assert_eq!(f.add(a, f.neg(a)), 0);
        prop_assert_eq!(f.pow(a, f.order()), a);
        if a != 0 {
            prop_assert_eq!(f.mul(a, f.inv(a).unwrap()), 1);
        }
    }

    #[test]
    fn reduction_preserves_functions(i in 0..PRIMES.len(), a in 0u64..26, x in 0u64..13) {
        let q = PRIMES[i];
        let (a, x) = (a % (2 * q - 1), x % q);
        let r = reduce_q(a, q).unwrap();
        prop_assert!(r < q);
        let pow = |k: u64| (0..k).fold(1u64, |acc, _| acc * x % q);
        prop_assert_eq!(pow(a), pow(r));
        prop_assert!(reduce_q(2 * q - 1, q).is_err());
    }

    #[test]
    fn reduced_sum_matches_pairwise(sets in (prop::sample::select(vec![2u64, 3, 5, 7]), 1usize..4)
        .prop_flat_map(|(q, l)| (arb_set(q, l), arb_set(q, l)))) {
        let (a, b) = sets;
        let sum = a.minkowski_sum_q(&b).unwrap();
        let q = a.q();
        let mut want: Vec<ExponentVector> = a.iter().flat_map(|x| b.iter().map(move |y| x.add_q(y, q))).collect();
        want.sort();
        want.dedup();
        prop_assert_eq!(sum.members(), &want[..]);
        // A set with footprint F lies in the hyperbolic set of F.
        let fb = sum.fb().unwrap().value;
        prop_assert!(fb <= xi_bound(a.q(), a.l(), sum.len() as u64).unwrap());
        prop_assert_eq!(sum.delta().unwrap(), total(a.q(), a.l()) - fb);
    }

    #[test]
    fn box_solutions_are_valid(q in prop::sample::select(vec![5u64, 7, 8, 9, 11, 13, 16, 19]),
                               m in prop::collection::vec(1u32..5, 1..3), n in 1u32..5) {
        let nvec = vec![n; m.len()];
        prop_assume!(m.iter().all(|&mi| (mi * n) as u64 <= q));
        let s = box_poly(q, &m, &nvec).unwrap();
        let report = validate_poly(&s);
        prop_assert!(report.valid, "{:?}", report);
        let bb = better_box(q, &m, s.fb.value).unwrap();
        prop_assert!(bb.fb.value >= s.fb.value);
        prop_assert!(bb.n() >= s.n());
        prop_assert!(validate_poly(&bb).valid);
    }

    #[test]
    fn sep_vars_footprint_is_product(m_prime in 1usize..4, n_prime in 1usize..4, fa in 1u64..9, fb in 1u64..9) {
        let q = 3;
        prop_assume!(fa <= total(q, m_prime) && fb <= total(q, n_prime));
        let s = sep_vars(q, m_prime, n_prime, fa, fb).unwrap();
        let measured = s.sum_set().fb().unwrap().value;
        prop_assert_eq!(s.fb.value, measured);
        prop_assert!(measured >= fa * fb);
        prop_assert!(validate_poly(&s).valid);
    }

    #[test]
    fn half_hyperbolic_meets_design(q in prop::sample::select(vec![5u64, 7, 8, 9, 11]), l in 1usize..4, f in 1u64..200) {
        let d = corner_d(q, l);
        if let Ok(s) = half_hyperbolic(q, f, &d) {
            prop_assert!(s.fb.value >= f);
            prop_assert!(s.recovery_threshold() >= s.measured_threshold());
            prop_assert!(s.fb.value <= xi_bound(q, l, s.sum_set().len() as u64).unwrap());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn any_threshold_subset_decodes(q in prop::sample::select(vec![5u64, 7, 8, 9]), matdot in any::<bool>(),
                                    seed in any::<u64>(), dims in (1usize..6, 1usize..6, 1usize..6)) {
        let sol = if matdot {
            Solution::Matdot(box_matdot(q, &[2, 2]).unwrap())
        } else {
            Solution::Poly(box_poly(q, &[2, 1], &[2, 2]).unwrap())
        };
        let field = Field::of_order(q).unwrap();
        let points = field.enumerate_points(2, DEFAULT_LIMIT).unwrap();
        let sys = build_system(&field, &sol.da().minkowski_sum_q(sol.db()).unwrap(), points.clone()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = Matrix::random(&field, dims.0, dims.1, &mut rng);
        let b = Matrix::random(&field, dims.1, dims.2, &mut rng);
        let coded = CodedProduct::new(&sol, &a, &b).unwrap();
        let k1 = sol.recovery_threshold() as usize;
        let subset = sample(&mut rng, points.len(), k1).into_vec();
        let responses: Vec<WorkerResponse> = subset.iter().map(|&i| coded.payload(i, &points[i]).unwrap().compute()).collect();
        let (c, stats) = coded.decode(&sys, &responses).unwrap();
        prop_assert_eq!(c, matmul(&a, &b).unwrap());
        prop_assert!(stats.examined <= k1);
        // The decoder never needs more than the threshold.
        prop_assert!(sys.needed(subset.iter().copied()).unwrap() <= k1);
    }
}

#[test]
fn too_few_responses_are_reported() {
    let field = Field::of_order(7).unwrap();
    let sol = Solution::Matdot(box_matdot(7, &[2, 2]).unwrap());
    let points = field.enumerate_points(2, DEFAULT_LIMIT).unwrap();
    let sys = build_system(&field, &sol.da().minkowski_sum_q(sol.db()).unwrap(), points.clone()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let a = Matrix::random(&field, 4, 4, &mut rng);
    let b = Matrix::random(&field, 4, 4, &mut rng);
    let coded = CodedProduct::new(&sol, &a, &b).unwrap();
    let responses: Vec<_> = (0..20).map(|i| coded.payload(i, &points[i]).unwrap().compute()).collect();
    match coded.decode(&sys, &responses) {
        Err(CodecError::InsufficientResponses { have, need, deficit }) => {
            assert_eq!((have, need, deficit), (20, 25, 5));
        }
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn transcript_replays_through_the_decoder() {
    let mut cfg = SimConfig::new(Field::of_order(9).unwrap(), "better-box m=2,2 F=25".parse().unwrap());
    cfg.straggler = StragglerModel::RandomDrop(0.25);
    cfg.seed = 41;
    (cfg.r, cfg.s, cfg.t) = (6, 5, 4);
    let report = run(&cfg).unwrap();
    assert!(report.success, "{}", report.summary());

    let p = plan(&cfg).unwrap();
    let responses: Vec<WorkerResponse> = report
        .transcript_text()
        .lines()
        .map(|line| {
            let (point, r) = parse_transcript_line(&cfg.field, line).unwrap();
            assert_eq!(point, p.points()[r.index]);
            r
        })
        .collect();
    assert_eq!(responses.len(), p.threshold);
    let (c, _) = p.coded.decode(&p.system, &responses).unwrap();
    assert_eq!(c, matmul(&p.a, &p.b).unwrap());
}

#[test]
fn small_table_matdot_row_recovers() {
    // q = 8, l = 3, F = 9 at the corner of the half box.
    let cfg = SimConfig::parse(
        "field = 8\nconstruction = matdot-half l=3 F=9 d=corner\nr = 3\ns = 124\nt = 2\nstraggler.kind = random\nstraggler.param = 0.01\nseed = 9\n",
    )
    .unwrap();
    let p = plan(&cfg).unwrap();
    let Solution::Matdot(s) = &p.solution else { panic!() };
    assert_eq!((s.m(), p.threshold), (62, 504));
    let report = run(&cfg).unwrap();
    assert!(report.success, "{}", report.summary());
}

#[test]
fn sweep_over_drop_counts() {
    let template = SimConfig::parse("field = 7\nconstruction = matdot-box m=2,2\nseed = 3\n").unwrap();
    let grid: Vec<Vec<(String, String)>> = [20, 24, 25]
        .iter()
        .map(|n| {
            vec![
                ("straggler.kind".to_string(), "adversarial".to_string()),
                ("straggler.param".to_string(), format!("count:{n}")),
            ]
        })
        .collect();
    let table = sweep(&template, &grid);
    let ok: Vec<bool> = table
        .cells
        .iter()
        .map(|c| c.outcome.as_ref().is_ok_and(|s| s.success))
        .collect();
    assert_eq!(ok, [true, true, false]);
    assert_eq!(sweep(&template, &grid).to_tsv(), table.to_tsv());
}
