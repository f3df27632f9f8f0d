//! Acceptance suite: each criterion runs against an oracle written here,
//! independent of the library, and prints one PASS/FAIL line.

use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use chrono::{TimeZone, Utc};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use regretstream::analytics::{nud_value, ntd_value, trait_tally, TraitMap};
use regretstream::classify::{
    ablate, fit_adaboost, train_stage1, two_stage_train, DenseMatrix, Stage1Hyper, Stage1Model, TrainConfig,
};
use regretstream::cleanup::{detect_superficial, run_cleanup, CleanupConfig};
use regretstream::exec::with_threads;
use regretstream::features::{FeatureGroup, SparseVec, TextResources};
use regretstream::ingest::{build_corpus, TweetPayload};
use regretstream::stats::{fisher_exact, mann_whitney_u, Contingency2x2};
use regretstream::synth::{generate, SynthConfig};
use regretstream::{Corpus, Error, Exec, TweetRecord};

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit_secs: u64) -> Result<(), String> {
    check(elapsed < Duration::from_secs(limit_secs), || format!("took {elapsed:.2?}, limit {limit_secs} s"))
}

// ---------------------------------------------------------------- Fisher

fn criterion_fisher_anchor() -> Outcome {
    let t0 = Instant::now();
    let r = fisher_exact(Contingency2x2::new(6, 94, 16, 84).map_err(|e| e.to_string())?, 0.05)
        .map_err(|e| e.to_string())?;
    let elapsed = t0.elapsed();
    check((r.effect - 0.335).abs() <= 0.005, || format!("odds ratio {}", r.effect))?;
    check((r.p_two_sided - 0.04).abs() <= 0.01, || format!("p {}", r.p_two_sided))?;
    within(elapsed, 1)?;
    Ok(format!("OR {:.4}, p {:.4}, {elapsed:.2?}", r.effect, r.p_two_sided))
}

fn choose(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Exact-integer two-sided Fisher p: same-margin tables whose hypergeometric
/// weight does not exceed the observed one.
fn fisher_oracle(a: u64, b: u64, c: u64, d: u64) -> f64 {
    let (r1, r2, c1) = (a + b, c + d, a + c);
    let weight = |x: u64| choose(r1, x) * choose(r2, c1 - x);
    let lo = c1.saturating_sub(r2);
    let hi = r1.min(c1);
    let obs = weight(a);
    let num: u128 = (lo..=hi).map(weight).filter(|&w| w <= obs).sum();
    num as f64 / choose(r1 + r2, c1) as f64
}

fn criterion_fisher_oracle() -> Outcome {
    let t0 = Instant::now();
    let mut tables = 0usize;
    let mut total_twelve = 0usize;
    let mut worst = 0.0f64;
    for n in 1..=12u64 {
        for a in 0..=n {
            for b in 0..=n - a {
                for c in 0..=n - a - b {
                    let d = n - a - b - c;
                    if n == 12 {
                        total_twelve += 1;
                    }
                    if a + b == 0 || c + d == 0 {
                        continue;
                    }
                    let got = fisher_exact(Contingency2x2::new(a, b, c, d).unwrap(), 0.05).unwrap().p_two_sided;
                    let want = fisher_oracle(a, b, c, d);
                    let diff = (got - want).abs();
                    worst = worst.max(diff);
                    check(diff < 1e-9, || format!("[[{a},{b}],[{c},{d}]] p {got} vs oracle {want}"))?;
                    tables += 1;
                }
            }
        }
    }
    let elapsed = t0.elapsed();
    check(total_twelve == 455, || format!("{total_twelve} tables of total 12"))?;
    within(elapsed, 10)?;
    Ok(format!("{tables} tables, max |dp| {worst:.1e}, {elapsed:.2?}"))
}

// ---------------------------------------------------------------- Mann-Whitney

/// Full enumeration of group assignments; U doubled from pairwise comparisons.
fn mwu_oracle(xs: &[f64], ys: &[f64]) -> f64 {
    let pooled: Vec<f64> = xs.iter().chain(ys).copied().collect();
    let n = pooled.len();
    let n1 = xs.len();
    let doubled_u = |mask: u32| -> i64 {
        let mut u = 0i64;
        for i in 0..n {
            if mask & (1 << i) == 0 {
                continue;
            }
            for j in 0..n {
                if mask & (1 << j) != 0 {
                    continue;
                }
                u += match pooled[i].partial_cmp(&pooled[j]).unwrap() {
                    std::cmp::Ordering::Greater => 2,
                    std::cmp::Ordering::Equal => 1,
                    std::cmp::Ordering::Less => 0,
                };
            }
        }
        u
    };
    let center = (n1 * (n - n1)) as i64;
    let observed = (doubled_u((1u32 << n1) - 1) - center).abs();
    let (mut extreme, mut total) = (0u64, 0u64);
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize != n1 {
            continue;
        }
        total += 1;
        if (doubled_u(mask) - center).abs() >= observed {
            extreme += 1;
        }
    }
    extreme as f64 / total as f64
}

fn criterion_mwu_oracle() -> Outcome {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut seen = [[false; 8]; 8];
    let mut worst = 0.0f64;
    let mut with_ties = 0;
    for i in 0..200usize {
        let (n1, n2) = ((i % 64) / 8 + 1, i % 8 + 1);
        seen[n1 - 1][n2 - 1] = true;
        let tied = i % 3 == 2;
        let mut draw = |k: usize| -> Vec<f64> {
            (0..k)
                .map(|_| {
                    let v: f64 = rng.gen_range(-5.0..5.0);
                    if tied {
                        v.round()
                    } else {
                        v
                    }
                })
                .collect()
        };
        let xs = draw(n1);
        let ys = draw(n2);
        let got = mann_whitney_u(&xs, &ys, 0.05).map_err(|e| e.to_string())?.p_two_sided;
        let want = mwu_oracle(&xs, &ys);
        let diff = (got - want).abs();
        worst = worst.max(diff);
        check(diff < 1e-9, || format!("{xs:?} vs {ys:?}: p {got} vs oracle {want}"))?;
        with_ties += tied as usize;
    }
    let elapsed = t0.elapsed();
    check(seen.iter().flatten().all(|&s| s), || "size pairs not all covered".into())?;
    within(elapsed, 30)?;
    Ok(format!("200 instances ({with_ties} with rounding ties), 64 size pairs, max |dp| {worst:.1e}, {elapsed:.2?}"))
}

// ---------------------------------------------------------------- superficial deletions

fn tweet(id: u64, text: &str) -> TweetRecord {
    TweetRecord::unlabeled(TweetPayload {
        id,
        user_id: 7,
        created_at: Utc.timestamp_opt(1_438_400_000 + id as i64 * 60, 0).unwrap(),
        text: text.into(),
        lang: "en".into(),
        source: "Twitter Web Client".into(),
        in_reply_to_id: None,
        quoted_id: None,
        retweet_of_id: None,
        hashtags: vec![],
        urls: vec![],
        mentions: vec![],
        has_geo: false,
        user: None,
    })
}

fn repeat(parts: &[(&str, usize)]) -> String {
    parts.iter().flat_map(|&(w, k)| std::iter::repeat_n(w, k)).collect::<Vec<_>>().join(" ")
}

/// (name, deleted text, followups, expected). Edit distances and cosines
/// were computed outside the library; cosine ignores punctuation and case.
fn superficial_fixture() -> Vec<(&'static str, String, Vec<String>, bool)> {
    let s = |t: &str| t.to_string();
    vec![
        ("identical", s("going to the beach later"), vec![s("going to the beach later")], true),
        // edit 4, cosine 0.5
        ("edit distance 4", s("abcd xyz"), vec![s("wxyz xyz")], true),
        // edit 5, cosine 0.5
        ("edit distance 5", s("abcde xyz"), vec![s("vwxyz xyz")], false),
        // {p:3,q:4} against {p:1}: cosine 3/5, edit 12
        ("cosine exactly 0.6", s("p p p q q q q"), vec![s("p")], false),
        // 119/sqrt(132*298) = 0.60000085, edit 15
        (
            "cosine just above 0.6",
            repeat(&[("w", 7), ("u", 9), ("v", 1), ("z", 1)]),
            vec![repeat(&[("w", 17), ("k", 3)])],
            true,
        ),
        ("no followups", s("anything at all"), vec![], false),
        (
            "match beyond lookahead",
            s("lunch was great today"),
            vec![
                s("totally unrelated words here"),
                s("another different sentence now"),
                s("third one about cats"),
                s("lunch was great today"),
            ],
            false,
        ),
        (
            "match at third followup",
            s("lunch was great today"),
            vec![s("totally unrelated words here"), s("another different sentence now"), s("lunch was grate today")],
            true,
        ),
        // edit 14, cosine 1
        ("reordered words", s("one two three four five"), vec![s("five four three two one")], true),
        // edit 15, cosine 1
        ("case change", s("HELLO THERE WORLD"), vec![s("hello there world")], true),
        ("unrelated", s("the game starts at eight"), vec![s("my cat refuses to eat breakfast")], false),
        ("single typo", s("Good mornng all"), vec![s("Good morning all")], true),
        ("four substitutions", s("abcd"), vec![s("wxyz")], true),
        ("five substitutions", s("abcde"), vec![s("vwxyz")], false),
        // edit 6, cosine 1
        ("added punctuation", s("good morning all"), vec![s("good morning all!!!!!!")], true),
        ("short against empty", s("hi"), vec![s("")], true),
        // edit 5 and cosine 3/5 at once
        ("both boundaries", s("w1 w2 w3 dd ee"), vec![s("w1 w2 w3 ddd eeeeee")], false),
        (
            "second followup close",
            s("big news coming soon"),
            vec![s("nothing to see here folks"), s("big news coming son")],
            true,
        ),
        ("empty deleted text", s(""), vec![s("hello")], false),
        // edit 15, cosine 0.365
        ("cosine below 0.6", s("red green blue black white"), vec![s("red green pink gray brown teal")], false),
    ]
}

fn criterion_superficial() -> Outcome {
    let cfg = CleanupConfig::default();
    let cases = superficial_fixture();
    let mut wrong = Vec::new();
    for (name, deleted, followups, expected) in &cases {
        let del = tweet(1, deleted);
        let recs: Vec<TweetRecord> = followups.iter().enumerate().map(|(i, t)| tweet(2 + i as u64, t)).collect();
        let refs: Vec<&TweetRecord> = recs.iter().collect();
        if detect_superficial(&del, &refs, &cfg) != *expected {
            wrong.push(*name);
        }
    }
    check(cases.len() == 20, || format!("{} cases", cases.len()))?;
    check(wrong.is_empty(), || format!("wrong verdicts: {wrong:?}"))?;
    Ok(format!("{} cases", cases.len()))
}

// ---------------------------------------------------------------- synthetic corpus

fn criterion_closure(clean: &mut Option<Corpus>) -> Outcome {
    let t0 = Instant::now();
    let out = generate(&SynthConfig::default()).map_err(|e| e.to_string())?;
    let corpus = build_corpus(&out.events, out.ledger.window).map_err(|e| e.to_string())?;
    let (cleaned, report) = run_cleanup(&corpus, &CleanupConfig::default()).map_err(|e| e.to_string())?;
    let elapsed = t0.elapsed();
    let exp = &out.ledger.expected;
    check(corpus.stats == exp.ingest, || format!("ingest {:?} vs ledger {:?}", corpus.stats, exp.ingest))?;
    check(report.before == exp.before, || format!("before {:?} vs {:?}", report.before, exp.before))?;
    check(report.stages == exp.stages, || format!("stages {:?} vs {:?}", report.stages, exp.stages))?;
    check(report.after == exp.after, || format!("after {:?} vs {:?}", report.after, exp.after))?;
    within(elapsed, 60)?;
    let removed = report.stage_counts();
    *clean = Some(cleaned);
    Ok(format!("{} tweets, removed per stage {removed:?}, {elapsed:.2?}", out.ledger.tweets.len()))
}

// ---------------------------------------------------------------- NTD / NUD

fn criterion_relative_difference() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut valued = 0;
    let mut undefined = 0;
    for _ in 0..1000 {
        let n1 = rng.gen_range(1..=5000u64);
        let n2 = rng.gen_range(1..=5000u64);
        // roughly one in twenty has a zero denominator fraction
        let k1 = rng.gen_range(0..=n1);
        let k2 = if rng.gen_bool(0.05) { 0 } else { rng.gen_range(0..=n2) };
        let (a, b) = (k1 as f64 / n1 as f64, k2 as f64 / n2 as f64);
        for (name, got) in [("ntd", ntd_value(a, b)), ("nud", nud_value(a, b))] {
            if k2 == 0 {
                check(matches!(got, Err(Error::Undefined(_))), || format!("{name}({a}, 0) = {got:?}"))?;
                undefined += 1;
                continue;
            }
            let got = got.map_err(|e| e.to_string())?;
            let want = a / b * 100.0 - 100.0;
            let tol = 1e-12 * want.abs().max(1.0);
            check((got - want).abs() <= tol, || format!("{name}({a}, {b}) = {got}, direct {want}"))?;
            valued += 1;
        }
    }
    for bad in [(-0.1, 0.5), (0.5, -0.1), (f64::NAN, 0.5), (0.5, f64::INFINITY)] {
        check(ntd_value(bad.0, bad.1).is_err() && nud_value(bad.0, bad.1).is_err(), || {
            format!("accepted {bad:?}")
        })?;
    }
    Ok(format!("{valued} values matched, {undefined} undefined denominators rejected"))
}

// ---------------------------------------------------------------- classifiers

fn criterion_classifiers() -> Outcome {
    // Naive Bayes, Laplace smoothing over terms a b c d. Deleted counts a3 b1 c1,
    // non-deleted b2 c2 d1; both classes total 5 + 4 smoothing.
    let docs: Vec<SparseVec> = vec![
        vec![(0, 2.0), (1, 1.0)],
        vec![(0, 1.0), (2, 1.0)],
        vec![(1, 2.0), (2, 1.0)],
        vec![(2, 1.0), (3, 1.0)],
    ];
    let labels = [true, true, false, false];
    let nb = train_stage1(&docs, &labels, 4, Stage1Hyper::MultinomialNb { alpha: 1.0 }, 0).map_err(|e| e.to_string())?;
    let Stage1Model::MultinomialNb(nb) = nb else { return Err("expected a naive Bayes model".into()) };
    // deleted P: 4/9 2/9 2/9 1/9, non-deleted P: 1/9 3/9 3/9 2/9, equal priors
    let probes: [(SparseVec, f64); 3] =
        [(vec![(0, 1.0), (1, 1.0)], 8.0 / 11.0), (vec![(2, 1.0), (3, 2.0)], 1.0 / 7.0), (vec![(0, 1.0), (3, 1.0)], 2.0 / 3.0)];
    for (x, want) in &probes {
        let got = nb.posterior(x);
        check((got - want).abs() < 1e-9, || format!("NB posterior {got} vs {want} for {x:?}"))?;
    }

    // Linear SVM: two blocks of terms, each point normalized, plus a shared noise term.
    let mut xs: Vec<SparseVec> = Vec::new();
    let mut ys = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for k in 0..60u32 {
        let pos = k % 2 == 0;
        let base = if pos { 0 } else { 2 };
        let raw = [(base, rng.gen_range(0.5..2.0)), (base + 1, rng.gen_range(0.5..2.0)), (4 + k % 3, rng.gen_range(0.0..0.5))];
        let norm = raw.iter().map(|(_, v): &(u32, f64)| v * v).sum::<f64>().sqrt();
        xs.push(raw.iter().map(|&(i, v)| (i, v / norm)).collect());
        ys.push(pos);
    }
    let svm = train_stage1(&xs, &ys, 7, Stage1Hyper::default(), 9).map_err(|e| e.to_string())?;
    let svm_acc = xs.iter().zip(&ys).filter(|(x, &l)| svm.predict(x) == l).count() as f64 / xs.len() as f64;
    check(svm_acc == 1.0, || format!("linear SVM training accuracy {svm_acc}"))?;

    // AdaBoost: bound on noisy XOR for several seeds, then exact fit of clean XOR.
    let xor = |n: usize, seed: u64, noise: f64| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut rows = Vec::new();
        let mut y = Vec::new();
        for _ in 0..n {
            let (a, b): (f64, f64) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            rows.push(vec![a, b, rng.gen_range(-1.0..1.0)]);
            y.push(((a > 0.0) != (b > 0.0)) != rng.gen_bool(noise));
        }
        (DenseMatrix::from_rows(&rows), y)
    };
    let mut bound_runs = 0;
    for seed in 0..8 {
        let (x, y) = xor(160, seed, 0.15);
        let m = fit_adaboost(&x, &y, &[0, 1, 2], 2, 40).map_err(|e| e.to_string())?;
        let bound: f64 = m.stages.iter().map(|s| 2.0 * (s.error.max(1e-10) * (1.0 - s.error)).sqrt()).product();
        let wrong = (0..y.len()).filter(|&i| m.predict(x.row(i)) != y[i]).count() as f64 / y.len() as f64;
        check(wrong <= bound + 1e-12, || format!("seed {seed}: training error {wrong} above bound {bound}"))?;
        bound_runs += 1;
    }
    let (x, y) = xor(200, 1, 0.0);
    let m = fit_adaboost(&x, &y, &[0, 1, 2], 2, 50).map_err(|e| e.to_string())?;
    let acc = (0..y.len()).filter(|&i| m.predict(x.row(i)) == y[i]).count() as f64 / y.len() as f64;
    check(acc == 1.0 && m.stages.len() <= 50, || format!("XOR accuracy {acc} after {} rounds", m.stages.len()))?;
    Ok(format!("NB exact, SVM acc 1.0, bound held on {bound_runs} runs, XOR fit in {} rounds", m.stages.len()))
}

// ---------------------------------------------------------------- end to end

fn criterion_end_to_end(clean: &Corpus) -> Outcome {
    let t0 = Instant::now();
    let res = TextResources::builtin();
    let cfg = TrainConfig::default();
    let trained = two_stage_train(clean, &cfg, 42, &res, Exec::default()).map_err(|e| e.to_string())?;
    let f1 = trained.report.held_out.f1;
    check(f1 >= 0.75, || format!("held-out F1 {f1}"))?;
    let ab = ablate(clean, &cfg, &FeatureGroup::ALL, 42, &res, Exec::default()).map_err(|e| e.to_string())?;
    check(ab.largest_drop() == Some(FeatureGroup::User), || {
        format!("largest drop from {:?}: {:?}", ab.largest_drop(), ab.rows.iter().map(|r| (r.group, r.delta_f1)).collect::<Vec<_>>())
    })?;
    let post_cfg = TrainConfig { restrict_to_replied: true, ..cfg.clone() };
    let post = two_stage_train(clean, &post_cfg, 42, &res, Exec::default()).map_err(|e| e.to_string())?;
    let resp = two_stage_train(clean, &cfg.with_response_mode(), 42, &res, Exec::default()).map_err(|e| e.to_string())?;
    let (pf, rf) = (post.report.held_out.f1, resp.report.held_out.f1);
    check(rf - pf >= 0.01, || format!("response F1 {rf} vs post-time F1 {pf}"))?;
    let elapsed = t0.elapsed();
    within(elapsed, 300)?;
    let user_drop = ab.rows.iter().find(|r| r.group == FeatureGroup::User).map_or(f64::NAN, |r| r.delta_f1);
    Ok(format!(
        "F1 {f1:.3}, largest drop user ({user_drop:+.3}), response {rf:.3} vs post-time {pf:.3}, {elapsed:.2?}"
    ))
}

fn criterion_determinism(clean: &Corpus) -> Outcome {
    let res = TextResources::builtin();
    let cfg = TrainConfig::default();
    let run = |threads: Option<usize>, exec: Exec| -> Result<(Vec<u8>, String), String> {
        with_threads(threads, || {
            let o = two_stage_train(clean, &cfg, 42, &res, exec).map_err(|e| e.to_string())?;
            let bytes = o.bundle.to_bytes().map_err(|e| e.to_string())?;
            let metrics = serde_json::to_string(&o.report).map_err(|e| e.to_string())?;
            Ok((bytes, metrics))
        })
    };
    let one = run(Some(1), Exec::Parallel)?;
    let four = run(Some(4), Exec::Parallel)?;
    let seq = run(None, Exec::Sequential)?;
    check(one == four, || "bundles differ between 1 and 4 threads".into())?;
    check(one == seq, || "parallel and sequential bundles differ".into())?;
    Ok(format!("bundle {} bytes identical across 1 thread, 4 threads and sequential", one.0.len()))
}

// ---------------------------------------------------------------- trait tally

fn criterion_trait_tally() -> Outcome {
    let map = TraitMap::builtin();
    let t = trait_tally(&map.observations(), &map);
    let (low_c, c) = (t.count("~C"), t.count("C"));
    check(low_c == 10 && c == 1, || format!("~C {low_c}, C {c}"))?;
    check(t.unmapped.is_empty(), || format!("unmapped {:?}", t.unmapped))?;
    Ok(format!("~C {low_c}, C {c}"))
}

// ---------------------------------------------------------------- driver

fn run(results: &mut Vec<(usize, bool)>, n: usize, title: &str, f: impl FnOnce() -> Outcome) {
    let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
        let msg = p
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_default();
        Err(format!("panicked: {msg}"))
    });
    let (ok, detail) = match outcome {
        Ok(d) => (true, d),
        Err(d) => (false, d),
    };
    let line = format!("criterion {n:>2} {title:<36} {} ({detail})\n", if ok { "PASS" } else { "FAIL" });
    // written to the raw handle so the line shows without --nocapture
    let _ = std::io::stderr().write_all(line.as_bytes());
    results.push((n, ok));
}

#[test]
fn acceptance() {
    let mut results = Vec::new();
    let mut clean = None;
    run(&mut results, 1, "Fisher anchor", criterion_fisher_anchor);
    run(&mut results, 2, "Fisher enumeration oracle", criterion_fisher_oracle);
    run(&mut results, 3, "Mann-Whitney enumeration oracle", criterion_mwu_oracle);
    run(&mut results, 4, "superficial-deletion boundaries", criterion_superficial);
    run(&mut results, 5, "cleanup closure on synth", || criterion_closure(&mut clean));
    run(&mut results, 6, "NTD/NUD identities", criterion_relative_difference);
    run(&mut results, 7, "classifier unit oracles", criterion_classifiers);
    match &clean {
        Some(corpus) => {
            run(&mut results, 8, "end-to-end synthetic reproduction", || criterion_end_to_end(corpus));
            run(&mut results, 9, "determinism across threads", || criterion_determinism(corpus));
        }
        None => {
            for (n, title) in [(8, "end-to-end synthetic reproduction"), (9, "determinism across threads")] {
                run(&mut results, n, title, || Err("no cleaned synthetic corpus".into()));
            }
        }
    }
    run(&mut results, 10, "trait tally anchor", criterion_trait_tally);
    let failed: Vec<usize> = results.iter().filter(|(_, ok)| !ok).map(|(n, _)| *n).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
