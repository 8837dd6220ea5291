mod common;

use std::collections::HashSet;
use std::sync::OnceLock;

use ndarray::Array2;
use proptest::prelude::*;

use common::*;
use lexfactor::efa::*;
use lexfactor::ingest::{read_jsonl, tokenize, write_jsonl, Review};
use lexfactor::lexicon::{build_dictionary, parse_lexical_database, Lexicon, Pos, StopWords};
use lexfactor::matrix::{filter_low_variance, DocTermMatrix, VarianceFilter};

fn lex() -> &'static Lexicon {
    static LEX: OnceLock<Lexicon> = OnceLock::new();
    LEX.get_or_init(|| parse_lexical_database(&lexicon_dir()).unwrap())
}

fn vocabulary() -> &'static Vec<String> {
    static WORDS: OnceLock<Vec<String>> = OnceLock::new();
    WORDS.get_or_init(|| {
        let mut w: Vec<String> = Pos::ALL
            .iter()
            .flat_map(|&p| lex().lemmas(p).map(str::to_owned).collect::<Vec<_>>())
            .collect();
        w.sort();
        w.dedup();
        w
    })
}

/// Text built from lexicon words (sometimes pluralized), stopwords and junk.
fn review_text() -> impl Strategy<Value = String> {
    let n = vocabulary().len();
    prop::collection::vec((0..n + 4, any::<bool>()), 0..15).prop_map(move |picks| {
        picks
            .into_iter()
            .map(|(i, plural)| match i.checked_sub(n) {
                None => format!("{}{}", vocabulary()[i], if plural { "s" } else { "" }),
                Some(0) => "the".to_string(),
                Some(1) => "corpora".to_string(),
                Some(2) => "better".to_string(),
                Some(_) => "xyzzy".to_string(),
            })
            .collect::<Vec<_>>()
            .join(" ")
    })
}

fn corpus() -> impl Strategy<Value = Vec<Review>> {
    prop::collection::vec(review_text(), 1..25).prop_map(|texts| {
        texts
            .into_iter()
            .enumerate()
            .map(|(i, text)| Review { id: i.to_string(), source: "p".into(), text })
            .collect()
    })
}

fn binary_matrix() -> impl Strategy<Value = DocTermMatrix> {
    (1usize..40, 1usize..20).prop_flat_map(|(docs, terms)| {
        prop::collection::vec(prop::collection::vec(any::<bool>(), terms), docs).prop_map(move |cells| {
            let rows = cells
                .iter()
                .map(|r| r.iter().enumerate().filter(|(_, &b)| b).map(|(c, _)| c as u32).collect())
                .collect();
            DocTermMatrix::new(
                (0..docs).map(|d| d.to_string()).collect(),
                (0..terms).map(|t| format!("t{t}")).collect(),
                rows,
            )
            .unwrap()
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tokenize_fixes_plain_words(w in "[a-z]{1,12}") {
        let toks = tokenize(&w);
        prop_assert_eq!(toks.len(), 1);
        prop_assert_eq!(toks[0].as_str(), w.as_str());
    }

    #[test]
    fn tokenize_concatenates(a in "[a-zA-Z ,.0-9-]{0,30}", b in "[a-zA-Z ,.0-9-]{0,30}") {
        let joined = tokenize(&format!("{a} {b}"));
        let mut parts = tokenize(&a);
        parts.extend(tokenize(&b));
        prop_assert_eq!(joined, parts);
    }

    #[test]
    fn reviews_round_trip(texts in prop::collection::vec("\\PC{0,40}", 1..10)) {
        let reviews: Vec<Review> = texts
            .iter()
            .enumerate()
            .filter(|(_, t)| !t.trim().is_empty())
            .map(|(i, t)| Review { id: format!("r{i}"), source: "s\"x".into(), text: t.clone() })
            .collect();
        let mut buf = Vec::new();
        write_jsonl(&reviews, &mut buf).unwrap();
        prop_assert_eq!(read_jsonl(&buf[..], "mem").unwrap(), reviews);
    }

    #[test]
    fn lemmatize_is_idempotent(i in 0usize..10_000, suffix in prop::sample::select(vec!["", "s", "es", "er", "est", "ies"]), noun in any::<bool>()) {
        let words = vocabulary();
        let w = format!("{}{}", words[i % words.len()], suffix);
        let pos = if noun { Pos::Noun } else { Pos::Adjective };
        if let Some(l) = lex().lemmatize(&w, pos) {
            prop_assert_eq!(lex().lemmatize(l, pos), Some(l));
        }
    }

    #[test]
    fn dictionary_admits_no_conflicts(docs in corpus()) {
        let stop = StopWords::english();
        let Ok(dict) = build_dictionary(&docs, lex(), &stop) else { return Ok(()) };
        let mut seen = HashSet::new();
        for t in dict.terms() {
            let senses = lex().senses(&t.lemma, t.pos);
            prop_assert!(!senses.is_empty());
            for s in senses {
                prop_assert!(seen.insert(*s), "sense shared by {}", t.lemma);
            }
        }
        for a in &seen {
            for b in lex().antonyms_of(*a) {
                prop_assert!(!seen.contains(b));
            }
        }
        prop_assert_eq!(build_dictionary(&docs, lex(), &stop).unwrap(), dict);
    }

    #[test]
    fn more_stopwords_never_add_terms(docs in corpus(), extra in prop::collection::vec(0usize..400, 0..20)) {
        let base = StopWords::english();
        let words = vocabulary();
        let more: StopWords = StopWords::english()
            .words()
            .map(str::to_owned)
            .chain(extra.iter().map(|&i| words[i % words.len()].clone()))
            .collect();
        let a = build_dictionary(&docs, lex(), &base).map(|d| d.len()).unwrap_or(0);
        let b = build_dictionary(&docs, lex(), &more).map(|d| d.len()).unwrap_or(0);
        prop_assert!(b <= a, "{} stopwords gave {} terms, more gave {}", base.len(), a, b);
    }

    #[test]
    fn filter_idempotent_and_monotone(m in binary_matrix(), v1 in 0.0f64..0.25, v2 in 0.0f64..0.25) {
        let (lo, hi) = if v1 <= v2 { (v1, v2) } else { (v2, v1) };
        let once = filter_low_variance(&m, VarianceFilter::MinVariance(lo));
        if let Ok((f, _)) = &once {
            let (twice, _) = filter_low_variance(f, VarianceFilter::MinVariance(lo)).unwrap();
            prop_assert_eq!(&twice, f);
        }
        let count = |v| filter_low_variance(&m, VarianceFilter::MinVariance(v)).map(|(f, _)| f.n_terms()).unwrap_or(0);
        prop_assert!(count(hi) <= count(lo));
    }

    #[test]
    fn phi_matches_textbook(m in binary_matrix()) {
        let df = m.doc_freq();
        let keep: Vec<usize> = (0..m.n_terms()).filter(|&c| df[c] > 0 && df[c] < m.n_docs()).collect();
        if keep.is_empty() {
            return Ok(());
        }
        let sub = m.select_columns(&keep).unwrap();
        let c = correlation_matrix::<f64>(&sub).unwrap();
        let n = sub.n_docs() as f64;
        let col = |j: usize| -> Vec<f64> { (0..sub.n_docs()).map(|d| sub.get(d, j) as u8 as f64).collect() };
        for a in 0..keep.len() {
            prop_assert_eq!(c.values()[[a, a]], 1.0);
            for b in 0..keep.len() {
                let (x, y) = (col(a), col(b));
                let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
                let sxy: f64 = x.iter().zip(&y).map(|(p, q)| (p - mx) * (q - my)).sum();
                let sxx: f64 = x.iter().map(|p| (p - mx) * (p - mx)).sum();
                let syy: f64 = y.iter().map(|q| (q - my) * (q - my)).sum();
                let r = sxy / (sxx * syy).sqrt();
                prop_assert!((c.values()[[a, b]] - r).abs() <= 1e-12);
                prop_assert_eq!(c.values()[[a, b]], c.values()[[b, a]]);
            }
        }
    }

    #[test]
    fn exact_model_recovered(
        k in 1usize..=3,
        extra in 0usize..=6,
        values in prop::collection::vec(0.45f64..0.9, 12),
    ) {
        let p = (3 * k + extra).min(12);
        let lambda = Array2::from_shape_fn((p, k), |(i, j)| if i % k == j { values[i] } else { 0.0 });
        let norms: Vec<f64> = (0..k).map(|j| lambda.column(j).dot(&lambda.column(j))).collect();
        for a in 0..k {
            for b in 0..a {
                prop_assume!((norms[a] - norms[b]).abs() > 0.05);
            }
        }
        let mut c = lambda.dot(&lambda.t());
        for i in 0..p {
            c[[i, i]] = 1.0;
        }
        let model = extract_uls(&CorrelationMatrix::from_array(c).unwrap(), k, &UlsOptions::default())
            .unwrap()
            .rotate_varimax(&VarimaxOptions::default());
        // Match columns greedily by the row each planted factor loads on first.
        for j in 0..k {
            let got = (0..k)
                .map(|g| {
                    let col = model.rotated.column(g);
                    let sign = col[j].signum();
                    (0..p).map(|i| (sign * col[i] - lambda[[i, j]]).abs()).fold(0.0, f64::max)
                })
                .fold(f64::INFINITY, f64::min);
            prop_assert!(got <= 1e-3, "factor {j}: error {got}");
        }
    }

    #[test]
    fn uls_stationary(values in prop::collection::vec(0.3f64..0.85, 6), noise in prop::collection::vec(-0.04f64..0.04, 15)) {
        // One-factor structure with perturbed off-diagonals.
        let mut c = Array2::<f64>::eye(6);
        let mut e = noise.iter();
        for i in 0..6 {
            for j in 0..i {
                let v = values[i] * values[j] + e.next().unwrap();
                c[[i, j]] = v;
                c[[j, i]] = v;
            }
        }
        let Ok(cm) = CorrelationMatrix::from_array(c.clone()) else { return Ok(()) };
        let opts = UlsOptions { tol: 1e-12, max_iter: 100_000 };
        let model = extract_uls(&cm, 1, &opts).unwrap();
        prop_assume!(model.extraction.heywood.is_empty() && model.extraction.converged);
        let objective = |h: &[f64]| {
            let mut r = c.clone();
            for i in 0..6 {
                r[[i, i]] = h[i];
            }
            let eig = symmetric_eigen(&r).unwrap();
            let l = eig.vectors.column(0).to_owned() * eig.values[0].max(0.0).sqrt();
            uls_objective(&c, &l.insert_axis(ndarray::Axis(1)))
        };
        let h: Vec<f64> = model.communalities.to_vec();
        for i in 0..6 {
            let (mut up, mut down) = (h.clone(), h.clone());
            up[i] += 1e-6;
            down[i] -= 1e-6;
            let g = (objective(&up) - objective(&down)) / 2e-6;
            prop_assert!(g.abs() <= 1e-4, "d/dh{} = {}", i, g);
        }
    }

    #[test]
    fn factor_model_deterministic(m in binary_matrix()) {
        let Ok((f, _)) = filter_low_variance(&m, VarianceFilter::MinVariance(0.05)) else { return Ok(()) };
        let Ok(c) = correlation_matrix::<f64>(&f) else { return Ok(()) };
        if c.dim() < 3 {
            return Ok(());
        }
        let run = || extract_uls(&c, 2, &UlsOptions::default()).map(|m| m.rotate_varimax(&VarimaxOptions::default()));
        let (a, b) = (run(), run());
        if let (Ok(a), Ok(b)) = (a, b) {
            prop_assert_eq!(a, b);
        }
    }
}
