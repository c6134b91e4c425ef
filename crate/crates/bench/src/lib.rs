//! Synthetic English/Chinese workloads with known code-switching content.
//!
//! Every generated sentence is built from fixed templates, so the lexicon
//! below covers exactly the slot nouns and nothing else. Plain filler never
//! contains a lexicon term in either language.

use std::io::Write;
use std::sync::Arc;

use cskit_core::seed::Stream;
use cskit_core::stats::SegmentClass;
use cskit_core::synth::{synthesize_sentence, CsType, DictionaryGenerator, DictionaryTranslator};
use cskit_core::{Document, LanguagePair, Lexicon, Result};

const NOUNS: &[(&str, &str)] = &[
    ("towel", "毛巾"),
    ("mirror", "镜子"),
    ("refrigerator", "冰箱"),
    ("microwave", "微波炉"),
    ("computer", "电脑"),
    ("bookcase", "书橱"),
    ("dictionary", "字典"),
    ("razor", "剃须刀"),
    ("umbrella", "雨伞"),
    ("teapot", "茶壶"),
    ("blanket", "毯子"),
    ("pillow", "枕头"),
    ("lamp", "台灯"),
    ("scissors", "剪刀"),
    ("notebook", "笔记本"),
    ("backpack", "背包"),
    ("bicycle", "自行车"),
    ("camera", "相机"),
    ("wallet", "钱包"),
    ("keyboard", "键盘"),
    ("sofa", "沙发"),
    ("curtain", "窗帘"),
    ("candle", "蜡烛"),
    ("basket", "篮子"),
    ("ladder", "梯子"),
    ("hammer", "锤子"),
    ("bucket", "水桶"),
    ("piano", "钢琴"),
    ("guitar", "吉他"),
    ("kettle", "烧水壶"),
];

/// Parallel templates with two noun slots.
const TEMPLATES: &[(&str, &str)] = &[
    ("Please put the {0} next to the {1}.", "请把{0}放在{1}旁边。"),
    ("I could not find the {0} or the {1} this morning.", "今天早上我找不到{0}和{1}。"),
    ("She bought a new {0} and a used {1} at the market.", "她在市场上买了新的{0}和旧的{1}。"),
    ("Remember to clean the {0} before you move the {1}.", "搬{1}之前记得把{0}擦干净。"),
    ("The {0} is much heavier than the {1}.", "{0}比{1}重得多。"),
    ("We keep the {0} in the same room as the {1}.", "我们把{0}和{1}放在同一个房间里。"),
    ("My brother borrowed the {0} and returned the {1}.", "我哥哥借走了{0}，还回了{1}。"),
    ("Nobody noticed that the {0} was lying on the {1}.", "没有人注意到{0}放在{1}上面。"),
];

const EN_SUBJECTS: &[&str] = &["The teacher", "My neighbour", "The committee", "Our team", "The old farmer", "A young student", "Her cousin", "The manager"];
const EN_VERBS: &[&str] = &["discussed", "finished", "described", "ignored", "explained", "organised", "revised", "postponed"];
const EN_OBJECTS: &[&str] = &["the plan", "the report", "the lesson", "a long story", "the weekly schedule", "the new rules", "the budget", "the final answer"];
const EN_TAILS: &[&str] = &["yesterday", "after lunch", "with great care", "before the meeting", "in the evening", "without any help", "on Monday", "for the second time"];

const ZH_SUBJECTS: &[&str] = &["老师", "我的邻居", "委员会", "我们的团队", "那位老农民", "一个年轻的学生", "她的表妹", "经理"];
const ZH_TAILS: &[&str] = &["昨天", "午饭以后", "非常认真地", "在开会之前", "在晚上", "没有任何帮助地", "星期一", "第二次"];
const ZH_VERBS: &[&str] = &["讨论了", "完成了", "介绍了", "忽略了", "解释了", "安排了", "修改了", "推迟了"];
const ZH_OBJECTS: &[&str] = &["这个计划", "那份报告", "今天的课程", "一个很长的故事", "每周的日程", "新的规定", "预算", "最后的答案"];

/// Kana-heavy Japanese: foreign script that is not part of the pair.
const JA_SENTENCES: &[&str] = &[
    "お客様、こちらのブラウスですと、いまお召しのスーツにもよく合いますが。",
    "きのうはとてもさむかったので、いえでゆっくりやすみました。",
    "このおみせのケーキはとてもおいしいですね。",
    "あしたのあさ、えきのまえでまちあわせしましょう。",
    "すみません、トイレはどこにありますか。",
    "たなかさんはいつもにこにこしていて、みんなにすかれています。",
];

pub fn en_zh() -> LanguagePair {
    "en-zh".parse().expect("built-in pair")
}

pub fn lexicon_tsv() -> String {
    let mut s = String::from("src_term\ttgt_term\tconcept_id\n");
    for (en, zh) in NOUNS {
        s.push_str(&format!("{en}\t{zh}\tc_{en}\n"));
    }
    s
}

pub fn lexicon() -> Arc<Lexicon> {
    Arc::new(Lexicon::parse_tsv(&lexicon_tsv()).expect("workload lexicon parses"))
}

fn pick<'a>(rng: &mut Stream, items: &[&'a str]) -> &'a str {
    items[rng.below(items.len() as u64) as usize]
}

/// A sentence with no lexicon term.
pub fn filler(rng: &mut Stream, lang: &str) -> String {
    if lang == "zh" {
        format!(
            "{}{}{}{}。",
            pick(rng, ZH_SUBJECTS),
            pick(rng, ZH_TAILS),
            pick(rng, ZH_VERBS),
            pick(rng, ZH_OBJECTS)
        )
    } else {
        format!(
            "{} {} {} {}.",
            pick(rng, EN_SUBJECTS),
            pick(rng, EN_VERBS),
            pick(rng, EN_OBJECTS),
            pick(rng, EN_TAILS)
        )
    }
}

/// A parallel (English, Chinese) sentence pair holding two distinct
/// lexicon nouns.
pub fn carrier_pair(rng: &mut Stream) -> (String, String) {
    let (en_t, zh_t) = TEMPLATES[rng.below(TEMPLATES.len() as u64) as usize];
    let a = rng.below(NOUNS.len() as u64) as usize;
    let b = (a + 1 + rng.below(NOUNS.len() as u64 - 1) as usize) % NOUNS.len();
    let en = en_t.replace("{0}", NOUNS[a].0).replace("{1}", NOUNS[b].0);
    let zh = zh_t.replace("{0}", NOUNS[a].1).replace("{1}", NOUNS[b].1);
    (en, zh)
}

pub fn carrier(rng: &mut Stream, lang: &str) -> String {
    let (en, zh) = carrier_pair(rng);
    if lang == "zh" {
        zh
    } else {
        en
    }
}

fn join(lang: &str, sentences: &[String]) -> String {
    sentences.join(if lang == "zh" { "" } else { " " })
}

/// Dictionary backends over the workload lexicon.
pub struct DictionaryBackends {
    pub translator: DictionaryTranslator,
    pub generator: DictionaryGenerator,
}

impl DictionaryBackends {
    pub fn new() -> Self {
        let lex = lexicon();
        DictionaryBackends {
            translator: DictionaryTranslator::new(lex.clone(), en_zh()),
            generator: DictionaryGenerator::new(lex, en_zh()),
        }
    }
}

impl Default for DictionaryBackends {
    fn default() -> Self {
        Self::new()
    }
}

#[derive(Debug, Clone)]
pub struct PlantedDoc {
    pub doc: Document,
    pub class: SegmentClass,
}

fn cs_type(class: SegmentClass) -> Option<CsType> {
    match class {
        SegmentClass::SentAnnt => Some(CsType::SentAnnt),
        SegmentClass::SentRepl => Some(CsType::SentRepl),
        SegmentClass::TokenAnnt => Some(CsType::TokenAnnt),
        SegmentClass::TokenRepl => Some(CsType::TokenRepl),
        SegmentClass::Unrelated => None,
    }
}

/// Exact per-class counts for `n` items; rounding residue goes to the
/// classes with the largest remainders.
pub fn class_counts(n: usize, proportions: [f64; 5]) -> [usize; 5] {
    let total: f64 = proportions.iter().sum();
    let raw: Vec<f64> = proportions.iter().map(|p| p / total * n as f64).collect();
    let mut counts: [usize; 5] = std::array::from_fn(|i| raw[i].floor() as usize);
    let mut order: Vec<usize> = (0..5).collect();
    order.sort_by(|&a, &b| (raw[b] - raw[b].floor()).total_cmp(&(raw[a] - raw[a].floor())).then(a.cmp(&b)));
    let missing = n - counts.iter().sum::<usize>();
    for &i in order.iter().take(missing) {
        counts[i] += 1;
    }
    counts
}

/// One document holding a single planted segment of `class`, written in
/// `lang` with the other pair language inserted.
pub fn planted_doc(
    id: &str,
    lang: &str,
    class: SegmentClass,
    rng: &mut Stream,
    backends: &DictionaryBackends,
) -> Result<Document> {
    let other = if lang == "zh" { "en" } else { "zh" };
    let n = 2 + rng.below(4) as usize;
    let mut sentences: Vec<String> = (0..n).map(|_| filler(rng, lang)).collect();
    let at = rng.below(n as u64 + 1) as usize;
    match cs_type(class) {
        Some(t) => {
            let s = carrier(rng, lang);
            let rewritten = synthesize_sentence(&s, t, lang, other, &backends.translator, &backends.generator)?;
            sentences.insert(at, rewritten);
        }
        None => {
            sentences.insert(at, carrier(rng, lang));
            let ja = pick(rng, JA_SENTENCES).to_string();
            let at = rng.below(sentences.len() as u64 + 1) as usize;
            sentences.insert(at, ja);
        }
    }
    Ok(Document::new(id, lang, join(lang, &sentences)))
}

/// `n` documents, each with exactly one planted segment; classes follow
/// `proportions` (in [`SegmentClass::ALL`] order) exactly, languages are
/// split evenly between English and Chinese.
pub fn planted_corpus(n: usize, proportions: [f64; 5], seed: u64) -> Result<Vec<PlantedDoc>> {
    let backends = DictionaryBackends::new();
    let counts = class_counts(n, proportions);
    let mut classes: Vec<SegmentClass> = SegmentClass::ALL
        .iter()
        .zip(counts)
        .flat_map(|(&c, k)| std::iter::repeat_n(c, k))
        .collect();
    let mut rng = Stream::new(seed);
    rng.shuffle(&mut classes);
    classes
        .into_iter()
        .enumerate()
        .map(|(i, class)| {
            let lang = if i % 2 == 0 { "en" } else { "zh" };
            let doc = planted_doc(&format!("p{i:05}"), lang, class, &mut rng, &backends)?;
            Ok(PlantedDoc { doc, class })
        })
        .collect()
}

/// Monolingual documents mixing filler and carrier sentences; the raw
/// material for synthesis runs.
pub fn monolingual_corpus(n: usize, lang: &str, sentences_per_doc: usize, seed: u64) -> Vec<Document> {
    let mut rng = Stream::new(seed);
    (0..n)
        .map(|i| {
            let sentences: Vec<String> = (0..sentences_per_doc)
                .map(|k| if k % 3 == 2 { filler(&mut rng, lang) } else { carrier(&mut rng, lang) })
                .collect();
            Document::new(format!("{lang}{i:06}"), lang, join(lang, &sentences))
        })
        .collect()
}

pub fn carrier_sentences(n: usize, lang: &str, seed: u64) -> Vec<String> {
    let mut rng = Stream::new(seed);
    (0..n).map(|_| carrier(&mut rng, lang)).collect()
}

pub fn parallel_pairs(n: usize, seed: u64) -> Vec<(String, String)> {
    let mut rng = Stream::new(seed);
    (0..n).map(|_| carrier_pair(&mut rng)).collect()
}

/// Writes a mixed English/Chinese corpus of at least `target_bytes` bytes;
/// roughly one document in five carries a planted segment. Returns the
/// number of documents and bytes written.
pub fn write_throughput_corpus<W: Write>(mut out: W, target_bytes: u64, seed: u64) -> Result<(usize, u64)> {
    let backends = DictionaryBackends::new();
    let mut rng = Stream::new(seed);
    let (mut docs, mut bytes) = (0usize, 0u64);
    let mut line = Vec::new();
    while bytes < target_bytes {
        let lang = if rng.below(2) == 0 { "en" } else { "zh" };
        let id = format!("t{docs:08}");
        let doc = if rng.below(5) == 0 {
            let class = SegmentClass::ALL[rng.below(5) as usize];
            let mut d = planted_doc(&id, lang, class, &mut rng, &backends)?;
            let extra: Vec<String> = (0..8).map(|_| filler(&mut rng, lang)).collect();
            d.text.push_str(if lang == "zh" { "" } else { " " });
            d.text.push_str(&join(lang, &extra));
            d
        } else {
            let n = 6 + rng.below(20) as usize;
            let sentences: Vec<String> = (0..n)
                .map(|k| if k % 4 == 3 { carrier(&mut rng, lang) } else { filler(&mut rng, lang) })
                .collect();
            Document::new(id, lang, join(lang, &sentences))
        };
        line.clear();
        serde_json::to_writer(&mut line, &doc).map_err(std::io::Error::from)?;
        line.push(b'\n');
        out.write_all(&line)?;
        bytes += line.len() as u64;
        docs += 1;
    }
    out.flush()?;
    Ok((docs, bytes))
}

#[cfg(test)]
mod tests {
    use super::*;
    use cskit_core::lexicon::Side;

    #[test]
    fn filler_is_lexicon_free() {
        let lex = lexicon();
        let mut rng = Stream::new(1);
        for _ in 0..500 {
            assert!(lex.find(&filler(&mut rng, "en"), Side::Source).is_empty());
            assert!(lex.find(&filler(&mut rng, "zh"), Side::Target).is_empty());
        }
    }

    #[test]
    fn carriers_hold_two_terms() {
        let lex = lexicon();
        let mut rng = Stream::new(2);
        for _ in 0..500 {
            let (en, zh) = carrier_pair(&mut rng);
            assert_eq!(lex.find(&en, Side::Source).len(), 2, "{en}");
            assert_eq!(lex.find(&zh, Side::Target).len(), 2, "{zh}");
        }
    }

    #[test]
    fn exact_class_counts() {
        assert_eq!(class_counts(2000, [0.09, 0.09, 0.43, 0.20, 0.19]), [180, 180, 860, 400, 380]);
        assert_eq!(class_counts(7, [1.0; 5]).iter().sum::<usize>(), 7);
    }
}
