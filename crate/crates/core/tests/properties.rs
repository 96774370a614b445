use std::collections::BTreeSet;

use proptest::prelude::*;

use persuasion::beliefs::{
    encode_big_issues, ideology_classification_experiment, opinion_similarity, pca_project, IdeologyKind,
    MissingIssuePolicy,
};
use persuasion::corpus::{
    load_corpus_from, stance_changed, write_corpus, Corpus, IssueOpinion, PointWeights, Stance, UserProfile,
    ValidationMode,
};
use persuasion::learn::{
    mcnemar, nested_cv, solve, train_logreg, CvConfig, DatasetMatrix, FoldData, Folding, Penalty, Problem,
    RegConfig, SolverOptions,
};
use persuasion::synth::{generate_synthetic, SyntheticParams};
use persuasion::tasks::{
    build_instances, build_task1_instances, CategoryFilter, FeatureSelection, TaskFeatures, TaskKind, TaskSpec,
};
use persuasion::textfeat::{extract_scalars, scalar_feature_names, tokenize, LexiconSet, TfidfConfig, TfidfModel};

fn opinion() -> impl Strategy<Value = IssueOpinion> {
    prop_oneof![
        Just(IssueOpinion::Pro),
        Just(IssueOpinion::Con),
        Just(IssueOpinion::NoOpinion),
        Just(IssueOpinion::Undecided),
    ]
}

fn profile(id: &str, catalog: &[String], answers: &[IssueOpinion]) -> UserProfile {
    let mut p = UserProfile::new(id);
    for (issue, &a) in catalog.iter().zip(answers) {
        p.big_issue_opinions.insert(issue.clone(), a);
    }
    p
}

fn catalog(k: usize) -> Vec<String> {
    (0..k).map(|i| format!("issue{i}")).collect()
}

fn small_params() -> impl Strategy<Value = SyntheticParams> {
    (1usize..12, 1usize..5, 0.0..=1.0f64, 1usize..6, 0.0..=1.0f64, 0.0..=1.0f64, 0.0..=0.3f64, 1usize..4, any::<u64>())
        .prop_map(|(n_debates, voters, p_match, n_issues, align, change, ns, rounds, seed)| SyntheticParams {
            n_debates,
            voters_per_debate: voters,
            p_match,
            n_issues,
            p_issue_align: align,
            p_stance_change: change,
            p_not_saying: ns,
            rounds,
            sentences_per_round: 1,
            seed,
            ..SyntheticParams::default()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn encoding_is_one_hot_per_issue(answers in prop::collection::vec(opinion(), 1..20)) {
        let cat = catalog(answers.len());
        let v = encode_big_issues(&profile("u", &cat, &answers), &cat, MissingIssuePolicy::Error).unwrap();
        prop_assert_eq!(v.values().len(), 4 * answers.len());
        for block in v.values().chunks(4) {
            prop_assert_eq!(block.iter().filter(|&&x| x == 1.0).count(), 1);
            prop_assert_eq!(block.iter().filter(|&&x| x == 0.0).count(), 3);
        }
    }

    #[test]
    fn similarity_is_the_agreement_fraction(
        pairs in prop::collection::vec((opinion(), opinion()), 1..20)
    ) {
        let cat = catalog(pairs.len());
        let a: Vec<IssueOpinion> = pairs.iter().map(|p| p.0).collect();
        let b: Vec<IssueOpinion> = pairs.iter().map(|p| p.1).collect();
        let va = encode_big_issues(&profile("a", &cat, &a), &cat, MissingIssuePolicy::Error).unwrap();
        let vb = encode_big_issues(&profile("b", &cat, &b), &cat, MissingIssuePolicy::Error).unwrap();
        let agree = pairs.iter().filter(|(x, y)| x == y).count() as f64 / pairs.len() as f64;
        let sim = opinion_similarity(&va, &vb).unwrap();
        prop_assert!((sim - agree).abs() < 1e-12);
        prop_assert!((opinion_similarity(&vb, &va).unwrap() - sim).abs() < 1e-15);
    }

    #[test]
    fn pca_axes_are_orthonormal_and_centered(
        rows in prop::collection::vec(prop::collection::vec(-5.0..5.0f64, 4), 3..25)
    ) {
        let Ok(p) = pca_project(&rows) else { return Ok(()) };
        for (i, a) in p.components.iter().enumerate() {
            for (j, b) in p.components.iter().enumerate() {
                let d: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
                let expected = if i == j { 1.0 } else { 0.0 };
                prop_assert!((d - expected).abs() < 1e-8, "dot {i}{j} = {d}");
            }
        }
        prop_assert!(p.explained_variance[0] >= p.explained_variance[1] - 1e-12);
        prop_assert!(p.explained_variance[0] + p.explained_variance[1] <= p.total_variance + 1e-9);
        for axis in 0..2 {
            let mean: f64 = p.projected.iter().map(|x| x[axis]).sum::<f64>() / rows.len() as f64;
            prop_assert!(mean.abs() < 1e-8);
        }
    }

    #[test]
    fn tokens_rejoin_to_the_text(text in "[a-zA-Z0-9 .,!?']{0,80}") {
        let joined: String = tokenize(&text).concat();
        let expected: String = text.to_lowercase().chars().filter(|c| !c.is_whitespace()).collect();
        prop_assert_eq!(joined, expected);
    }

    #[test]
    fn token_level_counts_add_over_concatenation(
        a in prop::collection::vec(word(), 0..30),
        b in prop::collection::vec(word(), 0..30),
    ) {
        let lex = LexiconSet::builtin();
        let names = scalar_feature_names(&lex);
        let (ta, tb) = (a.join(" "), b.join(" "));
        let fa = extract_scalars(&ta, &lex);
        let fb = extract_scalars(&tb, &lex);
        let fab = extract_scalars(&format!("{ta}\n{tb}"), &lex);
        for name in [
            "length", "subj_neg_strong", "subj_neg_weak", "subj_pos_strong", "subj_pos_weak", "swear",
            "pronouns_first", "pronouns_second", "pronouns_third", "modals", "spelling_errors", "numbers",
            "exclamations", "questions",
        ] {
            let j = names.iter().position(|n| n == name).unwrap();
            prop_assert_eq!(fab[j], fa[j] + fb[j], "{}", name);
        }
    }

    #[test]
    fn tfidf_rows_have_unit_or_zero_norm(
        docs in prop::collection::vec(prop::collection::vec(word(), 0..12), 2..10),
        probe in prop::collection::vec(word(), 0..12),
    ) {
        let texts: Vec<String> = docs.iter().map(|d| d.join(" ")).collect();
        let Ok(model) = TfidfModel::fit(&texts, &TfidfConfig::default()) else { return Ok(()) };
        for text in texts.iter().chain(std::iter::once(&probe.join(" "))) {
            let norm: f64 = model.transform(text).iter().map(|(_, v)| v * v).sum::<f64>().sqrt();
            prop_assert!(norm == 0.0 || (norm - 1.0).abs() < 1e-12, "norm {norm}");
        }
    }

    #[test]
    fn tfidf_is_invariant_to_duplicating_the_corpus(
        docs in prop::collection::vec(prop::collection::vec(word(), 1..12), 2..8),
    ) {
        let texts: Vec<String> = docs.iter().map(|d| d.join(" ")).collect();
        let doubled: Vec<String> = texts.iter().chain(&texts).cloned().collect();
        let cfg = TfidfConfig { min_df: 1, ..TfidfConfig::default() };
        let once = TfidfModel::fit(&texts, &cfg).unwrap();
        let twice = TfidfModel::fit(&doubled, &cfg).unwrap();
        prop_assert_eq!(once.feature_names(), twice.feature_names());
        for t in &texts {
            let (x, y) = (once.transform(t), twice.transform(t));
            prop_assert_eq!(x.len(), y.len());
            // duplicated documents shift idf only through the +1 smoothing
            let dot: f64 = x.iter().zip(&y).map(|((i, a), (j, b))| { assert_eq!(i, j); a * b }).sum();
            prop_assert!(dot > 0.9 || x.is_empty());
        }
    }

    #[test]
    fn mcnemar_is_symmetric_in_the_two_models(
        rows in prop::collection::vec((any::<bool>(), any::<bool>(), any::<bool>()), 1..200)
    ) {
        let a: Vec<u8> = rows.iter().map(|r| u8::from(r.0)).collect();
        let b: Vec<u8> = rows.iter().map(|r| u8::from(r.1)).collect();
        let y: Vec<u8> = rows.iter().map(|r| u8::from(r.2)).collect();
        let ab = mcnemar(&a, &b, &y).unwrap();
        let ba = mcnemar(&b, &a, &y).unwrap();
        prop_assert_eq!((ab.b, ab.c), (ba.c, ba.b));
        prop_assert!((ab.p_value - ba.p_value).abs() < 1e-15);
        prop_assert!((0.0..=1.0).contains(&ab.p_value));
    }

    #[test]
    fn solver_objective_never_increases(
        seed in any::<u64>(),
        c in prop_oneof![Just(0.01), Just(1.0), Just(100.0)],
        l1 in any::<bool>(),
    ) {
        let data = random_data(seed, 60, 5);
        let penalty = if l1 { Penalty::L1 } else { Penalty::L2 };
        let sol = solve(&Problem::raw(&data), penalty, c, &SolverOptions::default(), None);
        for w in sol.objective_trace.windows(2) {
            prop_assert!(w[1] <= w[0] * (1.0 + 1e-12) + 1e-12, "{} -> {}", w[0], w[1]);
        }
    }

    #[test]
    fn rescaling_a_feature_leaves_predictions_unchanged(
        seed in any::<u64>(),
        factor in prop_oneof![Just(1e-3), Just(7.5), Just(1e4)],
    ) {
        let data = random_data(seed, 80, 4);
        let mut scaled = data.clone();
        scaled.scale_column(1, factor);
        let tight = SolverOptions { tolerance: 1e-10, max_iterations: 10_000 };
        let m1 = train_logreg(&data, Penalty::L2, 1.0, &tight).unwrap();
        let m2 = train_logreg(&scaled, Penalty::L2, 1.0, &tight).unwrap();
        let p1 = m1.predict(&data).unwrap();
        let p2 = m2.predict(&scaled).unwrap();
        for (a, b) in p1.probabilities.iter().zip(&p2.probabilities) {
            prop_assert!((a - b).abs() < 1e-6);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn synthetic_corpora_pass_strict_ingestion(params in small_params()) {
        let corpus = generate_synthetic(&params).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let paths = write_corpus(&corpus, dir.path()).unwrap();
        let (loaded, report) = load_corpus_from(&paths, ValidationMode::Strict).unwrap();
        prop_assert!(report.is_clean(), "{:?}", report);
        prop_assert_eq!(&loaded, &corpus);
        prop_assert_eq!(corpus.debates.len(), params.n_debates);
        prop_assert_eq!(corpus.votes.len(), params.n_debates * params.voters_per_debate);
        for d in corpus.debates.values() {
            prop_assert!(d.check().is_ok());
            prop_assert_eq!(d.rounds.len(), params.rounds);
        }
    }

    #[test]
    fn debater_swap_flips_every_task_label(params in small_params(), task1 in any::<bool>()) {
        let corpus = generate_synthetic(&params).unwrap();
        let swapped = swap_debaters(&corpus);
        let task = if task1 { TaskKind::Task1Religious } else { TaskKind::Task2Political };
        let spec = TaskSpec::new(task);
        let w = PointWeights::default();
        let a = build_instances(&corpus, &spec, &w, MissingIssuePolicy::AsNoOpinion).unwrap();
        let b = build_instances(&swapped, &spec, &w, MissingIssuePolicy::AsNoOpinion).unwrap();
        prop_assert_eq!(a.len(), b.len());
        for (x, y) in a.instances.iter().zip(&b.instances) {
            prop_assert_eq!((&x.voter_id, &x.debate_id), (&y.voter_id, &y.debate_id));
            prop_assert_eq!(x.label, 1 - y.label);
            for k in 0..3 {
                prop_assert_eq!(x.user_features[2 * k], y.user_features[2 * k + 1]);
                prop_assert_eq!(x.user_features[2 * k + 1], y.user_features[2 * k]);
            }
        }
    }
}

fn word() -> impl Strategy<Value = String> {
    prop_oneof![
        prop::sample::select(vec![
            "good", "bad", "terrible", "i", "we", "you", "they", "should", "must", "damn", "thanks", "the", "debate",
            "42", "!", "?", "qzxv", "opponent", "study", "my",
        ])
        .prop_map(String::from),
        "[a-z]{1,6}",
    ]
}

fn random_data(seed: u64, n: usize, d: usize) -> DatasetMatrix {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| rng.gen_range(-2.0..2.0)).collect()).collect();
    let mut labels: Vec<u8> = rows
        .iter()
        .map(|r| u8::from(r[0] + 0.5 * r[1] + rng.gen_range(-1.0..1.0) > 0.0))
        .collect();
    labels[0] = 0;
    labels[1] = 1;
    DatasetMatrix::ungrouped(rows, labels, (0..d).map(|j| format!("x{j}")).collect()).unwrap()
}

fn swap_debaters(corpus: &Corpus) -> Corpus {
    let mut out = corpus.clone();
    for d in out.debates.values_mut() {
        std::mem::swap(&mut d.pro_debater, &mut d.con_debater);
        for r in &mut d.rounds {
            std::mem::swap(&mut r.pro_text, &mut r.con_text);
        }
    }
    for v in &mut out.votes {
        v.pre_stance = v.pre_stance.flipped();
        v.post_stance = v.post_stance.flipped();
        v.allocations = v.allocations.flipped();
    }
    out
}

fn planted(p_match: f64, p_issue_align: f64, seed: u64) -> Corpus {
    generate_synthetic(&SyntheticParams {
        n_debates: 400,
        voters_per_debate: 5,
        p_match,
        p_issue_align,
        sentences_per_round: 1,
        seed,
        ..SyntheticParams::default()
    })
    .unwrap()
}

/// Accuracy of "the voter sides with the debater sharing their religion".
fn matching_accuracy(corpus: &Corpus) -> (usize, f64) {
    let spec = TaskSpec::new(TaskKind::Task1Religious);
    let inst = build_task1_instances(corpus, &spec, MissingIssuePolicy::AsNoOpinion).unwrap();
    let hits = inst
        .instances
        .iter()
        .filter(|i| u8::from(i.user_features[4] == 1.0) == i.label)
        .count();
    (inst.len(), hits as f64 / inst.len() as f64)
}

#[test]
fn full_match_rate_makes_labels_follow_the_matching_debater() {
    let (n, acc) = matching_accuracy(&planted(1.0, 0.8, 3));
    assert_eq!(n, 2000);
    assert_eq!(acc, 1.0);
}

#[test]
fn even_match_rate_leaves_the_matching_feature_at_chance() {
    let (n, acc) = matching_accuracy(&planted(0.5, 0.8, 5));
    assert_eq!(n, 2000);
    assert!((acc - 0.5).abs() <= 0.04, "accuracy {acc}");
}

#[test]
fn aligned_issues_make_ideology_separable() {
    let corpus = generate_synthetic(&SyntheticParams {
        n_debates: 60,
        p_issue_align: 1.0,
        sentences_per_round: 1,
        seed: 8,
        ..SyntheticParams::default()
    })
    .unwrap();
    for (kind, pair) in [
        (IdeologyKind::Political, ("Conservative", "Liberal")),
        (IdeologyKind::Religious, ("Atheist", "Christian")),
    ] {
        let e = ideology_classification_experiment(&corpus, kind, pair, &CvConfig::default(), MissingIssuePolicy::Error)
            .unwrap();
        assert_eq!(e.model_accuracy, 1.0, "{kind}");
    }
}

#[test]
fn task_instances_satisfy_their_filters() {
    let corpus = planted(0.8, 0.8, 21);
    for category in ["ALL", "religion", "Politics"] {
        let mut spec = TaskSpec::new(TaskKind::Task1Religious);
        spec.category_filter = category.to_string().try_into().unwrap();
        let inst = build_task1_instances(&corpus, &spec, MissingIssuePolicy::AsNoOpinion).unwrap();
        assert!(!inst.is_empty());
        let votes: std::collections::HashMap<(&str, &str), _> = corpus
            .votes
            .iter()
            .map(|v| ((v.voter_id.as_str(), v.debate_id.as_str()), v))
            .collect();
        for i in &inst.instances {
            let d = &corpus.debates[&i.debate_id];
            assert!(spec.category_filter.accepts(&d.category));
            let religion = |id: &str| corpus.users[id].religious_ideology.clone().unwrap();
            let (p, c) = (religion(&d.pro_debater), religion(&d.con_debater));
            assert_ne!(p, c);
            assert!([&p, &c].contains(&&religion(&i.voter_id)));
            let v = votes[&(i.voter_id.as_str(), i.debate_id.as_str())];
            assert!(stance_changed(v));
            let side = if i.label == 1 { Stance::Pro } else { Stance::Con };
            assert_eq!(v.post_stance, side);
        }
        if category == "ALL" {
            assert_eq!(inst.filter_counts.debates_wrong_category, 0);
        }
        if let CategoryFilter::Single(c) = &spec.category_filter {
            let n = corpus.debates.values().filter(|d| d.category.eq_ignore_ascii_case(c)).count();
            assert_eq!(inst.filter_counts.debates_considered - inst.filter_counts.debates_wrong_category, n);
        }
    }
}

#[test]
fn ngram_vocabulary_never_sees_evaluation_debates() {
    let corpus = planted(0.8, 0.8, 13);
    let spec = TaskSpec::new(TaskKind::Task1Religious);
    let mut inst = build_task1_instances(&corpus, &spec, MissingIssuePolicy::AsNoOpinion).unwrap();
    // a marker word unique to each debate, on both sides so its df is 2
    for (id, texts) in inst.debates.iter_mut() {
        let marker = format!(" zz{}", id.trim_start_matches('d'));
        texts.pro.text.push_str(&marker);
        texts.con.text.push_str(&marker);
    }
    let lex = LexiconSet::builtin();
    let features = TaskFeatures::new(&inst, &lex, &TfidfConfig::default());
    let selection = FeatureSelection::from_groups(&["tfidf"], &lex).unwrap();
    let view = features.view(&selection);
    let debates: Vec<&String> = inst.debates.keys().collect();
    let held_out: BTreeSet<&str> = debates.iter().step_by(4).map(|d| d.as_str()).collect();
    let (train, eval): (Vec<usize>, Vec<usize>) =
        (0..inst.len()).partition(|&r| !held_out.contains(inst.instances[r].debate_id.as_str()));
    let (train_m, eval_m) = view.materialize(&train, &eval).unwrap();
    assert_eq!(train_m.feature_names(), eval_m.feature_names());
    let markers: BTreeSet<String> = train_m
        .feature_names()
        .iter()
        .filter_map(|n| n.rsplit("tfidf:").next())
        .filter(|t| t.starts_with("zz"))
        .map(String::from)
        .collect();
    assert!(!markers.is_empty(), "training markers should be in the vocabulary");
    for d in &held_out {
        let marker = format!("zz{}", d.trim_start_matches('d'));
        assert!(!markers.contains(&marker), "{marker} leaked from an evaluation debate");
    }
    for d in debates.iter().filter(|d| !held_out.contains(d.as_str())) {
        assert!(markers.contains(&format!("zz{}", d.trim_start_matches('d'))));
    }
}

#[test]
fn nested_cv_on_small_grid_is_deterministic() {
    let data = random_data(4, 120, 3);
    let cv = CvConfig {
        grid: RegConfig {
            c_grid: vec![0.1, 1.0, 10.0],
            ..RegConfig::default()
        },
        folding: Folding::Stratified,
        seed: 9,
        ..CvConfig::default()
    };
    let a = nested_cv(&data, &cv).unwrap();
    let b = nested_cv(&data, &cv).unwrap();
    assert_eq!(a.predictions, b.predictions);
    assert_eq!(a.selected, b.selected);
    assert!(a.mean_accuracy > 0.6);
}
