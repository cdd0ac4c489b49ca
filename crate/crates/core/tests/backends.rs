use gppl::exact::{denote, enumerate_envs, env_of, eval_exact, eval_in, FiniteModel};
use gppl::graphon::{permutations, AdjMatrix, Graphon};
use gppl::lang::{gen_t_n, gen_t_n_permuted, parse, Type};
use gppl::rational::{ratio, to_f64};
use gppl::sampler::{estimate, GraphImpl};
use gppl::symbolic::{normalize, outcome_distribution};
use gppl::termgen::TermGen;
use gppl::Rational;
use num_traits::One;

fn numeral_types() -> Vec<Type> {
    vec![
        Type::bool(),
        Type::prod(Type::bool(), Type::bool()),
        Type::sum(Type::Unit, Type::bool()),
    ]
}

fn step_mixed() -> Graphon {
    Graphon::step(
        vec![ratio(1, 3), ratio(2, 3)],
        vec![vec![ratio(1, 2), ratio(1, 4)], vec![ratio(1, 4), ratio(3, 4)]],
    )
    .unwrap()
}

#[test]
fn vertex_free_programs_agree_across_exact_and_symbolic() {
    let model = FiniteModel::two_cluster();
    let w = Graphon::constant(ratio(1, 3)).unwrap();
    let tys = numeral_types();
    for seed in 0..200u64 {
        let ty = &tys[seed as usize % tys.len()];
        let t = TermGen::new(seed).without_vertices().gen_program(ty);
        let exact = eval_exact(&model, &t).unwrap();
        let symbolic = outcome_distribution(&normalize(&t).unwrap(), &w).unwrap();
        assert_eq!(exact, symbolic, "seed {seed}: {t}");
    }
}

#[test]
fn matrix_route_matches_interpreter_on_random_open_terms() {
    let models = [FiniteModel::two_cluster(), FiniteModel::resampling(&ratio(1, 2), 2)];
    let tys = [Type::bool(), Type::Vertex, Type::prod(Type::bool(), Type::Vertex)];
    for seed in 0..120u64 {
        let mut gen = TermGen::new(seed).with_depth(2);
        let ctx = gen.gen_context(2);
        let t = gen.gen_term(&ctx, &tys[seed as usize % tys.len()], 2);
        for model in &models {
            let den = denote(model, &ctx, &t).unwrap();
            let envs = enumerate_envs(&ctx, model.vertex_count() as u32);
            assert_eq!(den.domain, envs);
            for (row, env) in envs.iter().enumerate() {
                let direct = eval_in(model, &env_of(&ctx, env), &t).unwrap();
                assert_eq!(den.row_dist(row), direct, "seed {seed}: {t}");
            }
        }
    }
}

#[test]
fn normal_form_leaves_partition_every_graph() {
    let tys = numeral_types();
    let mut checked = 0;
    for seed in 0..150u64 {
        let t = TermGen::new(seed).gen_program(&tys[seed as usize % tys.len()]);
        let nf = normalize(&t).unwrap();
        let k = nf.max_k() as usize;
        if k > 4 {
            continue;
        }
        for g in AdjMatrix::all(k.max(1)) {
            assert_eq!(nf.consistent_weight(&g), Rational::one(), "seed {seed}: {t}");
        }
        checked += 1;
    }
    assert!(checked > 100);
}

#[test]
fn relabelled_allocation_gives_permuted_distribution() {
    let w = step_mixed();
    let base = outcome_distribution(&normalize(&gen_t_n(3)).unwrap(), &w).unwrap();
    for perm in permutations(3) {
        let t = gen_t_n_permuted(3, &perm);
        let d = outcome_distribution(&normalize(&t).unwrap(), &w).unwrap();
        assert_eq!(d, base, "allocation order {perm:?}");
    }
}

#[test]
fn sampler_tracks_exact_values_within_four_standard_errors() {
    let progs = [
        "let a = new() in let b = new() in edge(a, b)",
        "let a = new() in let b = new() in let c = new() in edge(a,b) & edge(b,c) & edge(a,c)",
        "let a = new() in let b = new() in if bernoulli(1/3) then edge(a, b) else not edge(b, a)",
    ];
    let w = step_mixed();
    let model = FiniteModel::two_cluster();
    for src in progs {
        let t = parse(src).unwrap();
        let symbolic = outcome_distribution(&normalize(&t).unwrap(), &w).unwrap();
        let mc = estimate(&t, &GraphImpl::from_graphon(&w), 20_000, 7).unwrap();
        for (v, p) in symbolic.iter() {
            assert!(mc.z_score(v, to_f64(p)) <= 4.0, "{src} at {v}");
        }
        let exact = eval_exact(&model, &t).unwrap();
        let mc = estimate(&t, &GraphImpl::Finite(model.clone()), 20_000, 7).unwrap();
        for (v, p) in exact.iter() {
            assert!(mc.z_score(v, to_f64(p)) <= 4.0, "{src} at {v} (finite model)");
        }
    }
}

#[test]
fn memoized_sampler_never_resamples_a_finite_model() {
    let t = parse("let a = new() in let b = new() in edge(a, b) & not edge(a, b)").unwrap();
    let model = FiniteModel::resampling(&ratio(1, 2), 2);
    assert_eq!(eval_exact(&model, &t).unwrap().prob_true(), ratio(1, 4));
    let mc = estimate(&t, &GraphImpl::Finite(model), 5_000, 1).unwrap();
    assert_eq!(mc.frequency(&gppl::lang::Value::bool(true)), 0.0);
}

#[test]
fn seeded_sampling_is_reproducible() {
    let t = gen_t_n(3);
    let imp = GraphImpl::from_graphon(&step_mixed());
    let a = estimate(&t, &imp, 2_000, 42).unwrap();
    let b = estimate(&t, &imp, 2_000, 42).unwrap();
    assert_eq!(a.counts, b.counts);
}

/// Triangle probability on the 2-sphere with caps of angular radius
/// `theta`: the first point sits at the pole, the second at polar angle `t`,
/// the third at polar angle `u`; the azimuth integral is done in closed form
/// and the two polar integrals by the midpoint rule.
fn sphere_triangle_oracle(theta: f64, steps: usize) -> f64 {
    let h = theta / steps as f64;
    let mut total = 0.0;
    for a in 0..steps {
        let t = (a as f64 + 0.5) * h;
        for b in 0..steps {
            let u = (b as f64 + 0.5) * h;
            let c = (theta.cos() - u.cos() * t.cos()) / (u.sin() * t.sin());
            let frac = if c <= -1.0 {
                1.0
            } else if c >= 1.0 {
                0.0
            } else {
                c.acos() / std::f64::consts::PI
            };
            total += t.sin() / 2.0 * u.sin() / 2.0 * frac * h * h;
        }
    }
    total
}

#[test]
fn sphere_triangles_exceed_independent_edges() {
    let theta = std::f64::consts::PI / 6.0;
    let p = (1.0 - theta.cos()) / 2.0;
    let q = sphere_triangle_oracle(theta, 800);
    assert!(q > 2.0 * p * p * p, "oracle {q} vs p^3 {}", p * p * p);
    let w = Graphon::sphere(3, theta).unwrap();
    let t = parse("let a = new() in let b = new() in let c = new() in edge(a,b) & edge(b,c) & edge(a,c)").unwrap();
    let est = estimate(&t, &GraphImpl::from_graphon(&w), 100_000, 5).unwrap();
    let yes = gppl::lang::Value::bool(true);
    assert!(est.z_score(&yes, q) <= 4.0, "estimate {} vs oracle {q}", est.frequency(&yes));
    assert!(est.frequency(&yes) - 4.0 * est.standard_error(&yes) > p * p * p);
}
