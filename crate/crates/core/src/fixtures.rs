//! Deterministic corpora used by tests, benchmarks, examples and the CLI's
//! `fixture write` command.
//!
//! Generators draw from a seeded ChaCha8 stream through `next_u64` only, so
//! their output is stable across `rand` releases.

use chrono::NaiveDate;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use std::path::{Path, PathBuf};

use crate::corpus::{
    chunk_corpus, token_count, write_jsonl, Article, ChunkStore, PassageChunk, QAPair,
    DEFAULT_MAX_TOKENS, DEFAULT_MIN_TOKENS,
};
use crate::error::Result;

pub const SYNTHETIC_SEED: u64 = 20_200_415;
pub const SYNTHETIC_ARTICLES: usize = 50;
pub const SYNTHETIC_PARAGRAPHS: usize = 4;

/// A single-chunk passage whose article id is the part of `id` before `#`.
pub fn chunk(id: &str, text: &str) -> PassageChunk {
    PassageChunk {
        chunk_id: id.to_string(),
        article_id: id.split('#').next().unwrap_or(id).to_string(),
        text: text.to_string(),
        token_count: token_count(text),
        char_span: (0, text.len()),
        journal: String::new(),
        publish_date: None,
        title: String::new(),
    }
}

/// Build a store from `(chunk_id, text)` pairs.
///
/// # Panics
/// On duplicate ids.
pub fn store_from_texts(items: &[(&str, &str)]) -> ChunkStore {
    ChunkStore::new(items.iter().map(|(id, text)| chunk(id, text)).collect())
        .expect("fixture ids are unique")
}

fn date(y: i32, m: u32, d: u32) -> Option<NaiveDate> {
    NaiveDate::from_ymd_opt(y, m, d)
}

fn article(
    id: &str,
    title: &str,
    journal: &str,
    published: Option<NaiveDate>,
    paragraphs: &[&str],
) -> Article {
    Article {
        article_id: id.to_string(),
        title: title.to_string(),
        journal: journal.to_string(),
        publish_date: published,
        paragraphs: paragraphs.iter().map(|p| p.to_string()).collect(),
    }
}

/// Six short single-passage articles covering distinct COVID-19 topics.
pub fn demo_articles() -> Vec<Article> {
    vec![
        article(
            "demo-symptoms",
            "Clinical features of patients infected with SARS-CoV-2",
            "The Lancet",
            date(2020, 3, 15),
            &["The most common symptoms of COVID-19 at onset of illness were fever, dry cough and fatigue. \
               Less common symptoms included sputum production, headache, haemoptysis and diarrhoea. \
               Loss of smell and taste was reported by a substantial share of outpatients."],
        ),
        article(
            "demo-aerosol",
            "Airborne spread of SARS-CoV-2 in indoor settings",
            "Nature",
            date(2020, 7, 1),
            &["Aerosol transmission occurs when small respiratory particles remain suspended in indoor air for hours. \
               Poorly ventilated rooms allow aerosols to accumulate, and outbreaks in choirs and restaurants \
               point to airborne spread beyond two metres."],
        ),
        article(
            "demo-masks",
            "Face masks and community transmission",
            "JAMA",
            date(2020, 6, 10),
            &["Universal masking with surgical or cloth masks reduced the number of new infections among health care workers. \
               Masks block respiratory droplets at the source, which protects people nearby as well as the wearer."],
        ),
        article(
            "demo-vaccines",
            "Efficacy of an mRNA vaccine against COVID-19",
            "NEJM",
            date(2021, 1, 5),
            &["Two doses of the mRNA vaccine conferred 95 percent protection against symptomatic COVID-19 in persons 16 years of age or older. \
               Injection site pain and short-lived fatigue were the most frequent reactions after vaccination."],
        ),
        article(
            "demo-incubation",
            "The incubation period of coronavirus disease 2019",
            "Annals of Internal Medicine",
            date(2020, 4, 20),
            &["The median incubation period was estimated to be 5.1 days, and 97.5 percent of those who develop symptoms \
               will do so within 11.5 days of infection. Quarantine periods of 14 days are supported by these estimates."],
        ),
        article(
            "demo-long-covid",
            "Persistent symptoms after acute COVID-19",
            "BMJ",
            date(2021, 5, 30),
            &["Long covid describes symptoms such as breathlessness, brain fog and exhaustion that persist for months after infection. \
               Rehabilitation programmes focus on pacing and gradual return to activity."],
        ),
    ]
}

/// Two groups of ten near-duplicate passages: mask use and vaccination, both
/// mentioning transmission. Mask passages differ by a single place name;
/// vaccine passages vary more.
pub fn two_topic_chunks() -> Vec<PassageChunk> {
    const CITIES: [&str; 10] = [
        "boston", "lyon", "osaka", "lagos", "lima", "oslo", "pune", "perth", "quito", "turin",
    ];
    const VACCINES: [(&str, &str, &str); 10] = [
        ("mrna", "adults", "spring"),
        ("vector", "teachers", "summer"),
        ("inactivated", "nurses", "autumn"),
        ("protein", "students", "winter"),
        ("booster", "elders", "january"),
        ("bivalent", "workers", "march"),
        ("adjuvanted", "drivers", "may"),
        ("intranasal", "cleaners", "july"),
        ("recombinant", "farmers", "september"),
        ("monovalent", "grocers", "november"),
    ];
    let mut out = Vec::with_capacity(20);
    for (i, city) in CITIES.iter().enumerate() {
        let text = format!(
            "Wearing masks indoors in {city} helped reduce transmission of the virus. \
             Surgical masks and cloth masks reduce transmission of respiratory droplets in crowded rooms."
        );
        let mut c = chunk(&format!("masks-{i:02}#000"), &text);
        c.publish_date = date(2020, 5, 1 + i as u32);
        c.journal = "Mask Studies".into();
        out.push(c);
    }
    for (i, (kind, group, season)) in VACCINES.iter().enumerate() {
        let text = format!(
            "The {kind} vaccine campaign among {group} during {season} lowered household transmission of the virus. \
             Vaccination coverage and booster uptake were tracked for every cohort of {group}."
        );
        let mut c = chunk(&format!("vaccines-{i:02}#000"), &text);
        c.publish_date = date(2021, 2, 1 + i as u32);
        c.journal = "Vaccine Reports".into();
        out.push(c);
    }
    out
}

/// The query used with [`two_topic_chunks`].
pub const TWO_TOPIC_QUERY: &str = "How do masks reduce transmission?";

const DRUGS: [&str; 25] = [
    "zelbavir",
    "tramicort",
    "olanexib",
    "pexaldine",
    "corvimab",
    "lutrazole",
    "menavudine",
    "quinotrel",
    "sarpavir",
    "dexolimab",
    "fenostat",
    "galcitrine",
    "hexaprovir",
    "ivorantel",
    "jelvimab",
    "kestrafen",
    "lomadivir",
    "nuvacort",
    "ortalizumab",
    "pravonex",
    "rilovudine",
    "tesmorin",
    "ulvaprost",
    "vendarizine",
    "wexolimab",
];

/// Attribute names paired with the outcome clause reported for them.
const ATTRIBUTES: [(&str, &str); 10] = [
    ("viral clearance", "accelerated viral clearance by {n} days"),
    ("fever duration", "shortened fever duration by {n} days"),
    (
        "oxygen saturation",
        "raised oxygen saturation by {n} points",
    ),
    ("hospital stay", "cut the hospital stay by {n} days"),
    (
        "ventilation rate",
        "lowered the ventilation rate by {n} percent",
    ),
    ("mortality", "reduced mortality by {n} percent"),
    (
        "inflammatory markers",
        "halved inflammatory markers within {n} days",
    ),
    ("antibody titers", "boosted antibody titers {n} fold"),
    ("symptom recovery", "sped symptom recovery by {n} days"),
    (
        "lung opacity",
        "cleared lung opacity in {n} percent of patients",
    ),
];

const JOURNALS: [&str; 5] = [
    "Journal of Antiviral Research",
    "Clinical Infectious Diseases",
    "Respiratory Medicine",
    "Critical Care",
    "Lancet Infectious Diseases",
];

const BACKGROUND: [&str; 8] = [
    "Repurposed compounds were screened against the coronavirus in cell culture before any human study began.",
    "Early laboratory work suggested that the compound interferes with replication of the viral genome.",
    "Pharmacokinetic modelling was used to choose a dose that keeps plasma levels above the inhibitory concentration.",
    "Prior experience with related molecules in influenza informed the safety monitoring plan.",
    "Regulators granted emergency access while evidence from controlled studies was still being collected.",
    "Several observational cohorts had reported mixed results, which motivated a randomised comparison.",
    "The molecule is taken orally and is cleared mainly through the kidneys.",
    "Animal models showed reduced lung injury when treatment started soon after exposure.",
];

const METHODS: [&str; 8] = [
    "Adults admitted to participating hospitals with confirmed infection were randomly assigned to treatment or placebo.",
    "Randomisation was stratified by site and by the need for supplemental oxygen at enrolment.",
    "Participants, investigators and outcome assessors were unaware of the assigned group.",
    "The primary analysis followed the intention to treat principle across all enrolled participants.",
    "Blood samples were drawn on days one, three, seven and fourteen for laboratory testing.",
    "An independent data monitoring committee reviewed safety reports every two weeks.",
    "Sample size was calculated to detect a moderate difference with ninety percent power.",
    "Patients who withdrew consent were censored at the date of their last contact.",
];

const RESULTS: [&str; 8] = [
    "Baseline characteristics were well balanced between the two groups.",
    "Adverse events were mostly mild and occurred at similar rates in each arm.",
    "Adherence to the assigned regimen exceeded ninety percent in both groups.",
    "Few participants were lost to follow up before the final visit.",
    "Subgroup analyses by age and sex were consistent with the overall estimate.",
    "Serious adverse events were judged unrelated to the study drug by the committee.",
    "The median time from symptom onset to randomisation was four days.",
    "Sensitivity analyses that excluded protocol deviations gave similar estimates.",
];

const DISCUSSION: [&str; 8] = [
    "These observations should be interpreted with caution given the open questions about dosing.",
    "Larger studies in outpatient settings are needed before routine use can be recommended.",
    "Differences in standard of care between sites may have influenced the observed effects.",
    "Cost and supply constraints will shape how widely any benefit can be realised.",
    "Further work should examine interactions with corticosteroids and anticoagulants.",
    "Results from ongoing platform trials will help place these findings in context.",
    "The pandemic setting limited the collection of long term outcome data.",
    "Clinicians will weigh these data against the growing number of alternative therapies.",
];

/// Article `i` of the synthetic corpus is about `DRUGS[i % 25]` and
/// `ATTRIBUTES[i % 10]`.
pub fn synthetic_topic(i: usize) -> (&'static str, &'static str, &'static str) {
    let drug = DRUGS[i % DRUGS.len()];
    let (attr, outcome) = ATTRIBUTES[i % ATTRIBUTES.len()];
    (drug, attr, outcome)
}

fn pick<'a>(rng: &mut ChaCha8Rng, items: &'a [&'a str]) -> &'a str {
    items[(rng.next_u64() % items.len() as u64) as usize]
}

/// Pad `para` with filler sentences until it holds at least `min` tokens.
fn pad(para: &mut String, rng: &mut ChaCha8Rng, filler: &[&str], min: usize) {
    while token_count(para) < min {
        if !para.is_empty() {
            para.push(' ');
        }
        para.push_str(pick(rng, filler));
    }
}

fn answer_clause(i: usize) -> String {
    let (drug, _, outcome) = synthetic_topic(i);
    let n = 2 + (i * 7) % 9;
    format!("{drug} {}", outcome.replace("{n}", &n.to_string()))
}

/// 50 trial reports of four paragraphs each; every paragraph lands in the
/// 105–150 token range so the corpus chunks into exactly 200 passages.
///
/// Paragraph 2 states the trial's outcome. In every third article it is
/// preceded by a sentence that echoes the question's wording without
/// answering it. Paragraph 3 repeatedly discusses a different attribute.
pub fn synthetic_articles() -> Vec<Article> {
    let mut rng = ChaCha8Rng::seed_from_u64(SYNTHETIC_SEED);
    (0..SYNTHETIC_ARTICLES)
        .map(|i| {
            let (drug, attr, _) = synthetic_topic(i);
            let (other_attr, _) = ATTRIBUTES[(i + 3) % ATTRIBUTES.len()];

            let mut intro = format!(
                "{} is an antiviral candidate evaluated in hospitalised patients with COVID-19.",
                capitalize(drug)
            );
            pad(&mut intro, &mut rng, &BACKGROUND, 105);

            let mut methods = format!(
                "The trial enrolled patients at {} centres and followed them for twenty eight days.",
                8 + i % 12
            );
            pad(&mut methods, &mut rng, &METHODS, 105);

            let mut results = String::new();
            if i % 3 == 0 {
                results.push_str(&format!(
                    "The trial of {drug} was designed to find differences in {attr} between groups. "
                ));
            }
            results.push_str(pick(&mut rng, &RESULTS));
            results.push_str(&format!(" Compared with placebo, {}.", answer_clause(i)));
            pad(&mut results, &mut rng, &RESULTS, 105);

            let mut discussion = String::new();
            for sentence in [
                format!("Changes in {other_attr} were recorded as a secondary outcome."),
                format!("Reports on {other_attr} vary widely between cohorts."),
                format!("Measurement of {other_attr} was standardised across centres."),
                format!("Baseline {other_attr} predicted the course of illness."),
                format!("Future work on {other_attr} is planned."),
            ] {
                if !discussion.is_empty() {
                    discussion.push(' ');
                }
                discussion.push_str(&sentence);
            }
            pad(&mut discussion, &mut rng, &DISCUSSION, 105);

            let year = 2020 + (i % 3) as i32;
            let month = 1 + (i % 12) as u32;
            let day = 1 + (i * 5 % 28) as u32;
            Article {
                article_id: format!("syn-{i:03}"),
                title: format!("Randomised trial of {drug} for {attr} in COVID-19"),
                journal: JOURNALS[i % JOURNALS.len()].to_string(),
                publish_date: date(year, month, day),
                paragraphs: vec![intro, methods, results, discussion],
            }
        })
        .collect()
}

/// One question per synthetic article; the answer is the outcome clause.
pub fn synthetic_qa() -> Vec<QAPair> {
    (0..SYNTHETIC_ARTICLES)
        .map(|i| {
            let (drug, attr, _) = synthetic_topic(i);
            QAPair {
                question_id: Some(format!("syn-q{i:03}")),
                question: format!("What did the {drug} trial find about {attr}?"),
                answer: answer_clause(i),
                context_article_id: format!("syn-{i:03}"),
                split: None,
            }
        })
        .collect()
}

fn capitalize(word: &str) -> String {
    let mut chars = word.chars();
    match chars.next() {
        Some(first) => first.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

const RANDOM_WORDS: [&str; 24] = [
    "virus",
    "patients",
    "cohort",
    "protein",
    "spike",
    "cells",
    "masks",
    "ward",
    "covid-19",
    "sars-cov-2",
    "respiratory",
    "immune",
    "response",
    "dose",
    "trial",
    "samples",
    "testing",
    "outbreak",
    "cases",
    "lungs",
    "variant",
    "symptoms",
    "clinic",
    "data",
];

/// A random article for property tests: 1–6 paragraphs of 1–420 tokens,
/// sentences of 1–40 tokens, occasionally unpunctuated or abbreviation-heavy.
pub fn random_article(seed: u64) -> Article {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let paragraphs = 1 + (rng.next_u64() % 6) as usize;
    let paragraphs = (0..paragraphs)
        .map(|_| {
            let target = 1 + (rng.next_u64() % 420) as usize;
            let unpunctuated = rng.next_u64() % 8 == 0;
            let mut words = 0;
            let mut para = String::new();
            while words < target {
                let len = (1 + (rng.next_u64() % 40) as usize).min(target - words);
                let mut sentence: Vec<String> = (0..len)
                    .map(|_| pick(&mut rng, &RANDOM_WORDS).to_string())
                    .collect();
                sentence[0] = capitalize(&sentence[0]);
                if rng.next_u64() % 10 == 0 {
                    sentence.insert(len / 2, "e.g.".into());
                }
                words += len;
                if !para.is_empty() {
                    para.push(' ');
                }
                para.push_str(&sentence.join(" "));
                if !unpunctuated {
                    para.push(['.', '!', '?'][(rng.next_u64() % 3) as usize]);
                }
            }
            para
        })
        .collect();
    Article {
        article_id: format!("rand-{seed}"),
        title: String::new(),
        journal: String::new(),
        publish_date: None,
        paragraphs,
    }
}

/// File names written by [`write_fixture_files`].
pub const FIXTURE_FILES: [&str; 6] = [
    "demo_articles.jsonl",
    "demo_chunks.jsonl",
    "synthetic_articles.jsonl",
    "synthetic_chunks.jsonl",
    "synthetic_qa.jsonl",
    "two_topic_chunks.jsonl",
];

/// Write every fixture as JSONL into `dir`, returning the paths written.
pub fn write_fixture_files(dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir)?;
    let demo = demo_articles();
    let synthetic = synthetic_articles();
    let [a, b, c, d, e, f] = FIXTURE_FILES.map(|name| dir.join(name));
    write_jsonl(&a, &demo)?;
    write_jsonl(
        &b,
        &chunk_corpus(&demo, DEFAULT_MIN_TOKENS, DEFAULT_MAX_TOKENS)?,
    )?;
    write_jsonl(&c, &synthetic)?;
    write_jsonl(
        &d,
        &chunk_corpus(&synthetic, DEFAULT_MIN_TOKENS, DEFAULT_MAX_TOKENS)?,
    )?;
    write_jsonl(&e, &synthetic_qa())?;
    write_jsonl(&f, &two_topic_chunks())?;
    Ok(vec![a, b, c, d, e, f])
}
