//! One function per subcommand. Each writes its artifacts plus a
//! `header.json` stamp and prints a short summary to stdout.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::Serialize;

use lexvar::corpus::{load_corpus, read_manifest, scan_directory};
use lexvar::lda::{lda_fit, rare_topic_report, LdaOptions};
use lexvar::lsa::{
    count_outliers, singular_spectrum, truncated_svd_sparse, OutlierPolicy, SparseColumns,
};
use lexvar::matrix::{count_matrix, TermDocMatrix};
use lexvar::plsa::{plsa_em, PlsaInit, PlsaOptions};
use lexvar::synth::{null_calibration_experiment, word_name, GeneratorSpec};
use lexvar::varstats::{
    cross_text_moments, fit_power_law, volatility_ratio, write_fit_csv, write_moments_csv,
    WordSelection,
};

use crate::output::{write_header, write_labeled_matrix_csv, write_records_csv};
use crate::{CalibrateArgs, IngestArgs, LdaArgs, LsaArgs, PlsaArgs, SimulateArgs, StatsArgs};

fn display(p: &Path) -> String {
    p.display().to_string()
}

pub fn ingest(args: &IngestArgs) -> Result<()> {
    let sources = match (&args.manifest, &args.dir) {
        (Some(manifest), None) => read_manifest(manifest)?,
        (None, Some(dir)) => scan_directory(dir)?,
        _ => bail!("pass exactly one of --manifest and --dir"),
    };
    let corpus = load_corpus(&sources)?;
    let matrix = count_matrix(&corpus);

    fs::create_dir_all(&args.out)
        .with_context(|| format!("creating {}", args.out.display()))?;
    matrix.write_artifact(&args.out)?;

    #[derive(Serialize)]
    struct Config {
        manifest: Option<String>,
        dir: Option<String>,
        out: String,
    }
    write_header(
        &args.out,
        "ingest",
        None,
        &Config {
            manifest: args.manifest.as_deref().map(display),
            dir: args.dir.as_deref().map(display),
            out: display(&args.out),
        },
    )?;

    if matrix.num_docs() == 0 {
        log::warn!("corpus is empty: no documents found");
    } else if matrix.total_tokens() == 0 {
        log::warn!("corpus has documents but no tokens survived tokenization");
    }
    println!(
        "documents {}  word types {}  tokens {}",
        matrix.num_docs(),
        matrix.num_words(),
        matrix.total_tokens()
    );
    Ok(())
}

pub fn stats(args: &StatsArgs) -> Result<()> {
    let matrix = TermDocMatrix::read_artifact(&args.input)?;
    let table = cross_text_moments(&matrix, args.kappa)?;
    let fit = fit_power_law(&table, &WordSelection::TopByMean(args.top_words))?;
    let vol = volatility_ratio(&table, &fit);

    fs::create_dir_all(&args.out)
        .with_context(|| format!("creating {}", args.out.display()))?;
    write_moments_csv(&table, &args.out.join("moments.csv"))?;
    write_fit_csv(&fit, &args.out.join("fit.csv"))?;
    let order = table.by_rank();
    write_records_csv(
        &args.out.join("normvar.csv"),
        &["word", "mean", "norm_var"],
        order.iter().map(|&w| {
            vec![
                table.words()[w].clone(),
                table.mean()[w].to_string(),
                table.norm_var()[w].to_string(),
            ]
        }),
    )?;

    #[derive(Serialize)]
    struct Config {
        input: String,
        out: String,
        top_words: usize,
        kappa: f64,
    }
    write_header(
        &args.out,
        "stats",
        None,
        &Config {
            input: display(&args.input),
            out: display(&args.out),
            top_words: args.top_words,
            kappa: args.kappa,
        },
    )?;

    println!(
        "fit over top {} words: sigma^2 = {:.6e} * xbar^{:.4}  (stderr {:.4}, r^2 {:.4}, {} points, {} excluded)",
        args.top_words, fit.amplitude, fit.exponent, fit.stderr, fit.r_squared, fit.n_points, fit.n_excluded
    );
    println!(
        "sigma exponent {:.4}, sigma/xbar exponent {:.4}",
        vol.sigma_exponent, vol.ratio_exponent
    );
    Ok(())
}

pub fn lsa(args: &LsaArgs) -> Result<()> {
    let matrix = TermDocMatrix::read_artifact(&args.input)?;
    if matrix.num_words() == 0 || matrix.num_docs() == 0 {
        bail!("corpus in {} is empty", args.input.display());
    }
    let m = args.top_words.min(matrix.num_words());
    let (restricted, _) = matrix.restrict_top(m)?;
    let freq = restricted.frequencies();
    let x = SparseColumns::from_frequencies(&freq);

    let spectrum = singular_spectrum(&x);
    let max_rank = m.min(matrix.num_docs());
    if args.rank > max_rank {
        log::warn!(
            "rank {} exceeds min(words, documents) = {max_rank}; clamping",
            args.rank
        );
    }
    let rank = args.rank.min(max_rank);
    let decomp = truncated_svd_sparse(&x, rank)?;

    fs::create_dir_all(&args.out)
        .with_context(|| format!("creating {}", args.out.display()))?;
    write_records_csv(
        &args.out.join("spectrum.csv"),
        &["k", "theta_k"],
        spectrum
            .iter()
            .enumerate()
            .map(|(i, theta)| vec![(i + 1).to_string(), theta.to_string()]),
    )?;
    write_labeled_matrix_csv(
        &args.out.join("factors.csv"),
        "word",
        restricted.words(),
        "f",
        decomp.rank(),
        |w, k| decomp.word_factors[(w, k)],
    )?;
    write_labeled_matrix_csv(
        &args.out.join("bookfactors.csv"),
        "doc",
        restricted.doc_ids(),
        "v",
        decomp.rank(),
        |b, k| decomp.book_factors[(b, k)],
    )?;

    #[derive(Serialize)]
    struct Config {
        input: String,
        out: String,
        top_words: usize,
        rank: usize,
    }
    write_header(
        &args.out,
        "lsa",
        None,
        &Config {
            input: display(&args.input),
            out: display(&args.out),
            top_words: args.top_words,
            rank: args.rank,
        },
    )?;

    let lead: Vec<String> = decomp
        .thetas
        .iter()
        .take(4)
        .map(|t| format!("{t:.4}"))
        .collect();
    println!(
        "kept {} words x {} documents, rank {}; leading theta: {}",
        m,
        restricted.num_docs(),
        decomp.rank(),
        lead.join(", ")
    );
    let eigs: Vec<f64> = spectrum.iter().map(|t| t * t).collect();
    match count_outliers(&eigs, &OutlierPolicy::default()) {
        Ok(report) => println!(
            "{} spectral outliers above bulk edge {:.6}",
            report.count, report.bulk_edge
        ),
        Err(err) => log::warn!("outlier scan skipped: {err}"),
    }
    Ok(())
}

pub fn plsa(args: &PlsaArgs) -> Result<()> {
    let matrix = TermDocMatrix::read_artifact(&args.input)?;
    let opts = PlsaOptions {
        max_iters: args.max_iters,
        rel_tol: args.tol,
    };
    let model = plsa_em(&matrix, args.topics, PlsaInit::Seed(args.seed), &opts)?;

    fs::create_dir_all(&args.out)
        .with_context(|| format!("creating {}", args.out.display()))?;

    #[derive(Serialize)]
    struct Summary {
        model: &'static str,
        topics: usize,
        num_words: usize,
        num_docs: usize,
        seed: u64,
        iterations: usize,
        converged: bool,
        final_loglik: f64,
    }
    let summary = Summary {
        model: "plsa",
        topics: model.num_topics(),
        num_words: model.num_words(),
        num_docs: model.num_docs(),
        seed: args.seed,
        iterations: model.iterations,
        converged: model.converged,
        final_loglik: model.final_loglik(),
    };
    let json = serde_json::to_string_pretty(&summary)?;
    fs::write(args.out.join("model.json"), json + "\n")
        .with_context(|| format!("writing {}", args.out.join("model.json").display()))?;

    write_labeled_matrix_csv(
        &args.out.join("word_given_topic.csv"),
        "word",
        matrix.words(),
        "topic",
        model.num_topics(),
        |w, z| model.word_given_topic[(z, w)],
    )?;
    write_labeled_matrix_csv(
        &args.out.join("topic_given_doc.csv"),
        "doc",
        matrix.doc_ids(),
        "topic",
        model.num_topics(),
        |b, z| model.topic_given_doc[(b, z)],
    )?;

    #[derive(Serialize)]
    struct Config {
        input: String,
        out: String,
        topics: usize,
        seed: u64,
        tol: f64,
        max_iters: usize,
    }
    write_header(
        &args.out,
        "plsa",
        Some(args.seed),
        &Config {
            input: display(&args.input),
            out: display(&args.out),
            topics: args.topics,
            seed: args.seed,
            tol: args.tol,
            max_iters: args.max_iters,
        },
    )?;

    println!(
        "{} topics, {} EM updates, converged {}, log-likelihood {:.6}",
        model.num_topics(),
        model.iterations,
        model.converged,
        model.final_loglik()
    );
    Ok(())
}

pub fn lda(args: &LdaArgs) -> Result<()> {
    let matrix = TermDocMatrix::read_artifact(&args.input)?;
    if matrix.num_words() == 0 || matrix.nnz() == 0 {
        bail!("corpus in {} has no tokens", args.input.display());
    }
    let m = args.top_words.min(matrix.num_words());
    let (restricted, _) = matrix.restrict_top(m)?;

    let opts = LdaOptions {
        max_iters: args.max_iters,
        rel_tol: args.tol,
        ..LdaOptions::default()
    };
    let model = lda_fit(&restricted, args.topics, args.seed, &opts)?;
    let table = cross_text_moments(&restricted, 1.25)?;
    let reports = rare_topic_report(&model, restricted.words(), table.mean(), args.markers)?;

    fs::create_dir_all(&args.out)
        .with_context(|| format!("creating {}", args.out.display()))?;

    #[derive(Serialize)]
    struct Summary {
        model: &'static str,
        topics: usize,
        num_words: usize,
        num_docs: usize,
        seed: u64,
        iterations: usize,
        converged: bool,
        alpha: Vec<f64>,
        alpha_damped: bool,
        final_elbo: f64,
        elbo_trace: Vec<f64>,
    }
    let summary = Summary {
        model: "lda",
        topics: model.num_topics(),
        num_words: model.num_words(),
        num_docs: model.num_docs(),
        seed: args.seed,
        iterations: model.iterations,
        converged: model.converged,
        alpha: model.alpha.to_vec(),
        alpha_damped: model.alpha_damped,
        final_elbo: model.final_elbo(),
        elbo_trace: model.elbo_trace.clone(),
    };
    let json = serde_json::to_string_pretty(&summary)?;
    fs::write(args.out.join("model.json"), json + "\n")
        .with_context(|| format!("writing {}", args.out.join("model.json").display()))?;

    write_labeled_matrix_csv(
        &args.out.join("beta.csv"),
        "word",
        restricted.words(),
        "topic",
        model.num_topics(),
        |w, z| model.beta[(z, w)],
    )?;
    write_records_csv(
        &args.out.join("rare_topics.csv"),
        &["topic", "alpha", "word", "beta", "corpus_mean", "marker_strength"],
        reports.iter().flat_map(|report| {
            report.markers.iter().map(|marker| {
                vec![
                    report.topic.to_string(),
                    report.alpha.to_string(),
                    marker.word.clone(),
                    marker.beta.to_string(),
                    marker.corpus_mean.to_string(),
                    marker.strength.to_string(),
                ]
            })
        }),
    )?;

    #[derive(Serialize)]
    struct Config {
        input: String,
        out: String,
        topics: usize,
        seed: u64,
        tol: f64,
        max_iters: usize,
        top_words: usize,
        markers: usize,
    }
    write_header(
        &args.out,
        "lda",
        Some(args.seed),
        &Config {
            input: display(&args.input),
            out: display(&args.out),
            topics: args.topics,
            seed: args.seed,
            tol: args.tol,
            max_iters: args.max_iters,
            top_words: args.top_words,
            markers: args.markers,
        },
    )?;

    let alphas: Vec<String> = model.alpha.iter().map(|a| format!("{a:.4}")).collect();
    println!(
        "{} topics over {} words, {} iterations, converged {}, alpha [{}]",
        model.num_topics(),
        model.num_words(),
        model.iterations,
        model.converged,
        alphas.join(", ")
    );
    if let Some(rarest) = reports.first() {
        let words: Vec<&str> = rarest
            .markers
            .iter()
            .take(3)
            .map(|m| m.word.as_str())
            .collect();
        println!(
            "rarest topic {} (alpha {:.4}) markers: {}",
            rarest.topic,
            rarest.alpha,
            words.join(", ")
        );
    }
    Ok(())
}

pub fn simulate(args: &SimulateArgs) -> Result<()> {
    let text = fs::read_to_string(&args.spec)
        .with_context(|| format!("reading {}", args.spec.display()))?;
    let spec: GeneratorSpec = serde_json::from_str(&text)
        .with_context(|| format!("parsing {}", args.spec.display()))?;
    let (corpus, truth) = spec.generate()?;

    let docs_dir = args.out.join("docs");
    fs::create_dir_all(&docs_dir)
        .with_context(|| format!("creating {}", docs_dir.display()))?;

    let mut manifest = String::new();
    for doc in &corpus.documents {
        let words: Vec<&str> = doc
            .tokens
            .iter()
            .map(|&t| corpus.vocabulary.word(t as usize))
            .collect();
        let rel = format!("docs/{}.txt", doc.id);
        fs::write(args.out.join(&rel), words.join(" ") + "\n")
            .with_context(|| format!("writing document {}", doc.id))?;
        manifest.push_str(&format!("{}\t{}\n", doc.id, rel));
    }
    fs::write(args.out.join("manifest.tsv"), manifest)
        .with_context(|| format!("writing {}", args.out.join("manifest.tsv").display()))?;
    let truth_json = serde_json::to_string(&truth)?;
    fs::write(args.out.join("truth.json"), truth_json + "\n")
        .with_context(|| format!("writing {}", args.out.join("truth.json").display()))?;

    write_header(&args.out, "simulate", Some(spec.seed), &spec)?;

    println!(
        "wrote {} documents, {} tokens, vocabulary {}",
        corpus.num_documents(),
        corpus.total_tokens,
        corpus.num_word_types()
    );
    Ok(())
}

pub fn calibrate(args: &CalibrateArgs) -> Result<()> {
    if args.words == 0 {
        bail!("need a nonempty vocabulary");
    }
    // Zipf weights give the null corpus a realistic frequency spread while
    // keeping every word common enough to be scored.
    let raw: Vec<f64> = (1..=args.words).map(|i| 1.0 / i as f64).collect();
    let total: f64 = raw.iter().sum();
    let probs: Vec<f64> = raw.iter().map(|r| r / total).collect();

    let result = null_calibration_experiment(&probs, args.docs, args.doc_len, args.seed)?;

    fs::create_dir_all(&args.out)
        .with_context(|| format!("creating {}", args.out.display()))?;
    write_records_csv(
        &args.out.join("normvar_null.csv"),
        &["word", "prob", "norm_var"],
        probs.iter().enumerate().map(|(i, p)| {
            vec![
                word_name(i),
                p.to_string(),
                result.norm_var[i].to_string(),
            ]
        }),
    )?;

    #[derive(Serialize)]
    struct Config {
        out: String,
        words: usize,
        docs: u32,
        doc_len: u32,
        seed: u64,
    }
    write_header(
        &args.out,
        "calibrate",
        Some(args.seed),
        &Config {
            out: display(&args.out),
            words: args.words,
            docs: args.docs,
            doc_len: args.doc_len,
            seed: args.seed,
        },
    )?;

    println!(
        "normalized variance over {} scored words: mean {:.4}, quantiles 5% {:.4} / 50% {:.4} / 95% {:.4}",
        result.scored, result.mean, result.q05, result.median, result.q95
    );
    Ok(())
}
