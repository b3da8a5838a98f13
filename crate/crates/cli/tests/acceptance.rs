//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

use std::collections::BTreeSet;
use std::process::Command;
use std::time::{Duration, Instant};

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use ccg_core::bundled;
use ccg_core::gen::{all_shapes, backward_chain, build_on_shape, forward_chain, DerivationGen, Shape};
use ccg_core::oracle::{enumerate_all, enumerate_sentence, explore_rewrites, sem_partition};
use ccg_core::parser::{parse, ParsePolicy, TraceKind};
use ccg_core::rewrite::{contract, find_redexes, normalize, standard_strategies, RewriteStrategy};
use ccg_core::viability::{label_sentence, train, ViabilityModel};
use ccg_core::{cat, sem_equiv, Derivation, Direction, Lexicon, RuleConfig};

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn internal(d: &Derivation) -> usize {
    match d.as_node() {
        None => 0,
        Some(n) => 1 + internal(&n.left) + internal(&n.right),
    }
}

fn sigma(d: &Derivation) -> usize {
    match d.as_node() {
        None => 0,
        Some(n) => sigma(&n.left) + sigma(&n.right) + internal(&n.left),
    }
}

fn catalan(n: u128) -> u128 {
    // (2n choose n) / (n + 1)
    let mut c: u128 = 1;
    for i in 0..n {
        c = c * (2 * n - i) / (i + 1);
    }
    c / (n + 1)
}

fn triangular(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

fn unbounded() -> RuleConfig {
    RuleConfig::with_max_degree(usize::MAX)
}

/// 1000 random derivations of 1..=12 internal nodes.
fn random_family(seed: u64) -> Vec<Derivation> {
    let mut g = DerivationGen::new(ChaCha8Rng::seed_from_u64(seed));
    (0..1000).map(|i| g.derivation(1 + i % 12)).collect()
}

/// Every shape with up to six leaves, labelled three ways.
fn shape_family() -> Vec<Derivation> {
    let mut g = DerivationGen::new(ChaCha8Rng::seed_from_u64(99));
    let mut out = Vec::new();
    for leaves in 1..=6 {
        for shape in all_shapes(leaves) {
            out.push(build_on_shape(&shape, &forward_chain(leaves), Direction::Forward).unwrap());
            out.push(build_on_shape(&shape, &backward_chain(leaves), Direction::Backward).unwrap());
            out.push(g.on_shape(&shape));
        }
    }
    out
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let ds = enumerate_all(&forward_chain(7), &RuleConfig::default()).map_err(|e| e.to_string())?;
    let classes = sem_partition(&ds).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    ensure(ds.len() as u128 == catalan(6), || format!("{} derivations", ds.len()))?;
    ensure(ds.len() == 132, || format!("{} derivations", ds.len()))?;
    ensure(ds.iter().all(|d| d.cat() == &cat("x0/x7")), || "root category differs".into())?;
    ensure(classes.len() == 1, || format!("{} classes", classes.len()))?;
    ensure(elapsed < Duration::from_secs(1), || format!("took {:?}", elapsed))?;
    Ok(format!("132 derivations, 1 class, {:?}", elapsed))
}

fn criterion_2(cases: &[Derivation]) -> Outcome {
    let rules = unbounded();
    let mut steps = 0;
    for d in cases {
        ensure(internal(d) <= 12, || "derivation too large".into())?;
        let mut cur = d.clone();
        // contract every initial redex once, then follow a random path
        for p in find_redexes(d) {
            let a = internal(&d.at(&p).unwrap().as_node().unwrap().left.as_node().unwrap().left);
            let after = contract(d, &p, &rules).map_err(|e| e.to_string())?;
            ensure(sigma(d) == sigma(&after) + a + 1, || format!("{} at {}", d.bracketed(), p))?;
            steps += 1;
        }
        let r = normalize(&cur, RewriteStrategy::RandomSeeded(steps as u64), &rules).map_err(|e| e.to_string())?;
        for p in &r.positions {
            let a = internal(&cur.at(p).unwrap().as_node().unwrap().left.as_node().unwrap().left);
            let after = contract(&cur, p, &rules).map_err(|e| e.to_string())?;
            ensure(sigma(&cur) == sigma(&after) + a + 1, || format!("{} at {}", cur.bracketed(), p))?;
            cur = after;
            steps += 1;
        }
    }
    Ok(format!("{} derivations, {} contractions, 0 violations", cases.len(), steps))
}

fn criterion_3(cases: &[Derivation]) -> Outcome {
    let rules = unbounded();
    let mut runs = 0;
    let mut explored = 0;
    for d in cases {
        let n = internal(d);
        for s in standard_strategies(10) {
            let r = normalize(d, s, &rules).map_err(|e| e.to_string())?;
            ensure(r.steps <= triangular(n), || format!("{} under {}: {} steps", d.bracketed(), s, r.steps))?;
            runs += 1;
        }
        if n <= 6 {
            let e = explore_rewrites(d, &rules).map_err(|e| e.to_string())?;
            ensure(e.max_length() <= triangular(n), || format!("{}: sequence of {}", d.bracketed(), e.max_length()))?;
            explored += 1;
        }
    }
    for leaves in 2..=7 {
        let n = leaves - 1;
        for (items, dir) in [(forward_chain(leaves), Direction::Forward), (backward_chain(leaves), Direction::Backward)] {
            let comb = build_on_shape(&Shape::left_comb(leaves), &items, dir).unwrap();
            let e = explore_rewrites(&comb, &rules).map_err(|e| e.to_string())?;
            ensure(e.max_length() == triangular(n), || format!("left comb n={}: max {}", n, e.max_length()))?;
        }
    }
    Ok(format!("{} normalizations, {} exhaustive explorations, bound tight on left combs n<=6", runs, explored))
}

fn criterion_4(cases: &[Derivation]) -> Outcome {
    let rules = unbounded();
    let mut worst = 0usize;
    for d in cases {
        let r = normalize(d, RewriteStrategy::RootFirst, &rules).map_err(|e| e.to_string())?;
        ensure(r.steps <= internal(d), || format!("{}: {} steps", d.bracketed(), r.steps))?;
        worst = worst.max(r.steps);
    }
    Ok(format!("{} derivations, at most n steps (longest run {})", cases.len(), worst))
}

fn criterion_5(shapes: &[Derivation], larger: &[Derivation]) -> Outcome {
    let rules = unbounded();
    let strategies = standard_strategies(10);
    let mut explored = 0;
    for d in shapes.iter().chain(larger) {
        let mut forms = BTreeSet::new();
        for s in &strategies {
            forms.insert(normalize(d, *s, &rules).map_err(|e| e.to_string())?.normal_form);
        }
        ensure(forms.len() == 1, || format!("{}: {} normal forms", d.bracketed(), forms.len()))?;
        if internal(d) <= 5 {
            let e = explore_rewrites(d, &rules).map_err(|e| e.to_string())?;
            ensure(e.normal_forms.len() == 1, || format!("{}: {} terminal forms", d.bracketed(), e.normal_forms.len()))?;
            explored += 1;
        }
    }
    Ok(format!(
        "{} exhaustive shapes + {} random, 12 strategies agree; {} explored to a unique terminal form",
        shapes.len(),
        larger.len(),
        explored
    ))
}

fn criterion_6(cases: &[Derivation]) -> Outcome {
    let rules = unbounded();
    let mut checked = 0;
    for d in cases {
        for s in standard_strategies(10) {
            let nf = normalize(d, s, &rules).map_err(|e| e.to_string())?.normal_form;
            ensure(nf.cat() == d.cat(), || format!("{}: category", d.bracketed()))?;
            ensure(nf.frontier() == d.frontier(), || format!("{}: frontier", d.bracketed()))?;
            let same = sem_equiv(d.sem(), nf.sem(), d.cat().arity()).map_err(|e| e.to_string())?;
            ensure(same, || format!("{}: meaning", d.bracketed()))?;
            checked += 1;
        }
    }
    Ok(format!("{} normalizations preserve category, frontier and meaning", checked))
}

fn words(s: &str) -> Vec<&str> {
    s.split_whitespace().collect()
}

fn criterion_7() -> Outcome {
    let err = |e: ccg_core::ParseError| e.to_string();

    let lex = Lexicon::parse("the := s/(s\\np)/n\nflowers := n\nsent := s\\np/pp\n").unwrap();
    let r = parse(&words("the flowers sent"), &lex, &ParsePolicy::eager()).map_err(err)?;
    ensure(
        r.analyses.len() == 1 && r.analyses[0].category_strings() == ["s/pp"],
        || format!("flowers: {:?}", r.analyses.iter().map(|a| a.to_string()).collect::<Vec<_>>()),
    )?;

    let r = parse(&words("whose cat did fred find"), &bundled::WHOSE.lexicon(), &ParsePolicy::eager()).map_err(err)?;
    ensure(r.complete.len() == 1 && r.complete[0].cat() == &cat("q"), || "whose: no q".into())?;
    let after_did: Vec<Vec<String>> = r.snapshots[2].iter().map(|a| a.category_strings()).collect();
    ensure(after_did == [vec!["q/(s/np)".to_string(), "s/s".to_string()]], || format!("whose: {:?}", after_did))?;

    let madly = bundled::MADLY.lexicon();
    let r = parse(&words("john loves mary madly"), &madly, &ParsePolicy::eager_with_reveal()).map_err(err)?;
    ensure(r.complete.len() == 1 && r.events(TraceKind::Attached).count() == 1, || "madly: no attachment".into())?;
    let plain = parse(&words("john loves mary madly"), &madly, &ParsePolicy::eager()).map_err(err)?;
    ensure(plain.complete.is_empty(), || "madly: succeeded without reveal".into())?;

    let bcbc = bundled::BCBC.lexicon();
    let r = parse(&words("p q r t u"), &bcbc, &ParsePolicy::eager_with_reveal()).map_err(err)?;
    ensure(r.complete.len() == 1 && r.complete[0].cat() == &cat("a"), || "bcbc: no a".into())?;
    let plain = parse(&words("p q r t u"), &bcbc, &ParsePolicy::eager()).map_err(err)?;
    ensure(plain.complete.is_empty(), || "bcbc: succeeded without rewriting".into())?;

    let r = parse(&words("p q r z"), &bundled::REANALYSIS.lexicon(), &ParsePolicy::eager_with_reveal()).map_err(err)?;
    ensure(r.complete.is_empty(), || "reanalysis accepted".into())?;
    ensure(r.events(TraceKind::RefusedNonendocentric).count() == 1, || "no refusal event".into())?;

    Ok("flowers s/pp; whose q via [q/(s/np), s/s]; madly and bcbc via reveal; reanalysis refused".into())
}

fn criterion_8() -> Outcome {
    let mut sentences = 0;
    for g in bundled::all() {
        let lex = g.lexicon();
        for s in g.tokenized() {
            ensure(s.len() <= 8, || format!("{}: sentence too long", g.name))?;
            let oracle: BTreeSet<Derivation> = enumerate_sentence(&s, &lex, &RuleConfig::default())
                .map_err(|e| e.to_string())?
                .into_iter()
                .collect();
            let parsed: BTreeSet<Derivation> = parse(&s, &lex, &ParsePolicy::exhaustive())
                .map_err(|e| e.to_string())?
                .spanning()
                .into_iter()
                .collect();
            ensure(parsed == oracle, || {
                format!("{}: {:?}: parser {} vs oracle {}", g.name, s.join(" "), parsed.len(), oracle.len())
            })?;
            sentences += 1;
        }
    }
    Ok(format!("{} sentences over {} grammars", sentences, bundled::all().len()))
}

fn criterion_9() -> Outcome {
    let lex = bundled::INSULTS.lexicon();
    let corpus = bundled::insults_corpus();
    ensure(corpus.len() >= 20, || format!("corpus has {} sentences", corpus.len()))?;
    let (model, report) = train(&corpus, &lex, ViabilityModel::default(), &RuleConfig::default());
    ensure(report.skipped.is_empty(), || format!("skipped {:?}", report.skipped))?;

    let test = words("the insults hurt the new students");
    let r = parse(&test, &lex, &ParsePolicy::exhaustive().with_viability(model.clone())).map_err(|e| e.to_string())?;
    let dropped: Vec<_> = r
        .events(TraceKind::DiscardedViability)
        .filter(|e| e.categories.last().map(String::as_str) == Some("s\\np/np") && e.categories.len() >= 2)
        .collect();
    ensure(!dropped.is_empty(), || "verb reading never discarded".into())?;
    ensure(dropped[0].word_index == 1, || format!("discarded at word {}", dropped[0].word_index))?;
    ensure(dropped[0].categories[dropped[0].categories.len() - 2] == "np/n", || "not after the determiner".into())?;
    ensure(!r.complete.is_empty(), || "test sentence lost".into())?;

    let mut successes = 0;
    for s in &corpus {
        for (a, ok) in label_sentence(s, &lex, &RuleConfig::default()).map_err(|e| e.to_string())? {
            if ok {
                ensure(model.is_viable(&a), || format!("success analysis {} would be discarded", a))?;
                successes += 1;
            }
        }
    }
    Ok(format!(
        "trained on {} sentences; verb reading dropped at word 1; {} in-sample successes all kept",
        corpus.len(),
        successes
    ))
}

fn criterion_10() -> Outcome {
    let start = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_ccg"))
        .arg("check")
        .output()
        .map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let stdout = String::from_utf8_lossy(&out.stdout);
    ensure(out.status.success(), || format!("exit {:?}: {}", out.status.code(), stdout))?;
    let suites = stdout.lines().filter(|l| l.contains("\"type\":\"suite\"")).count();
    ensure(suites == 6, || format!("{} suites reported", suites))?;
    ensure(elapsed < Duration::from_secs(60), || format!("took {:?}", elapsed))?;
    Ok(format!("6 suites passed in {:.1?}", elapsed))
}

fn main() {
    let random = random_family(2024);
    let shapes = shape_family();
    let mut all: Vec<Derivation> = shapes.clone();
    all.extend(random.iter().cloned());
    let larger: Vec<Derivation> = {
        let mut g = DerivationGen::new(ChaCha8Rng::seed_from_u64(7));
        (0..1000).map(|i| g.derivation(6 + i % 7)).collect()
    };

    let results: Vec<(&str, Outcome)> = vec![
        ("1 spurious-ambiguity count", criterion_1()),
        ("2 strict sigma descent", criterion_2(&random)),
        ("3 termination bound", criterion_3(&all)),
        ("4 root-first linearity", criterion_4(&all)),
        ("5 confluence", criterion_5(&shapes, &larger)),
        ("6 preservation", criterion_6(&all)),
        ("7 worked sentences", criterion_7()),
        ("8 oracle equivalence", criterion_8()),
        ("9 viability learning", criterion_9()),
        ("10 check tooling", criterion_10()),
    ];
    let mut failed = 0;
    for (name, outcome) in &results {
        match outcome {
            Ok(detail) => println!("PASS criterion {}: {}", name, detail),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {}: {}", name, why);
            }
        }
    }
    println!("acceptance: {} passed, {} failed", results.len() - failed, failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
