mod common;

use std::collections::BTreeSet;

use csfe::g2p::{split_stress, token_g2p, tone_of};
use csfe::schema::{build_symbol_tables, split_ipa};
use csfe::segmentation::{segment_scripts, segment_words, tag_pos};
use csfe::{
    apply_config, deserialize, load_resources, serialize, Column, Encoder, EncoderOptions, Format,
    Language, ResourceError, SegmentalMode, SystemConfig,
};

fn encoder() -> Encoder<'static> {
    Encoder::new(common::bundle(), EncoderOptions::default())
}

#[test]
fn shipped_resources_meet_scale_and_load_deterministically() {
    let a = load_resources(common::resources_dir()).unwrap();
    let b = load_resources(common::resources_dir()).unwrap();
    assert_eq!(a.to_canonical_bytes(), b.to_canonical_bytes());
    let [chars, words, english, pinyin, arpabet, pos] = a.table_sizes();
    assert!(
        chars >= 3000 && words >= 300 && english >= 10_000,
        "{:?}",
        a.table_sizes()
    );
    assert!(pinyin >= 400 && arpabet >= 39 && pos > 0);
}

#[test]
fn missing_table_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    for entry in std::fs::read_dir(common::resources_dir()).unwrap() {
        let entry = entry.unwrap();
        if entry.file_name() != "pinyin_ipa.tsv" {
            std::fs::copy(entry.path(), dir.path().join(entry.file_name())).unwrap();
        }
    }
    match load_resources(dir.path()) {
        Err(ResourceError::MissingResource(name)) => assert!(name.contains("pinyin_ipa")),
        other => panic!("{other:?}"),
    }
}

#[test]
fn pinyin_table_agrees_with_reference_sample() {
    let bundle = common::bundle();
    let reference = std::fs::read_to_string(common::fixture("pinyin_ipa_reference.tsv")).unwrap();
    let mut n = 0;
    for line in reference.lines().filter(|l| !l.starts_with('#')) {
        let (key, ipa) = line.split_once('\t').unwrap();
        assert_eq!(bundle.pinyin_ipa(key), Some(ipa), "{key}");
        n += 1;
    }
    assert_eq!(n, 20);
    for (key, ipa) in bundle.pinyin_ipa_table().chain(bundle.arpabet_ipa_table()) {
        assert!(
            !ipa.is_empty() && !ipa.chars().any(|c| c.is_ascii_digit()),
            "{key}"
        );
    }
}

#[test]
fn example_syllables() {
    let bundle = common::bundle();
    let syllables = |text: &str| {
        let spans = segment_scripts(text).unwrap();
        let tokens = tag_pos(segment_words(&spans, bundle), bundle);
        tokens
            .iter()
            .flat_map(|t| token_g2p(t, bundle).unwrap())
            .collect::<Vec<_>>()
    };
    let s = syllables("欢");
    assert_eq!(
        (s[0].base.as_str(), s[0].tone, s[0].ipa.as_str()),
        ("huan", 1, "xwan")
    );
    let s = syllables("语");
    assert_eq!((s[0].base.as_str(), s[0].tone), ("yu", 3));
    let s = syllables("hello");
    assert_eq!(s.iter().map(|x| x.stress).collect::<Vec<_>>(), [0, 1]);
    let s = syllables("a");
    assert_eq!((s.len(), s[0].stress), (1, 0));
}

#[test]
fn syllable_counts_over_the_lexicon() {
    let bundle = common::bundle();
    for (word, phones) in bundle.english_words().step_by(3) {
        let vowels = phones
            .iter()
            .filter(|p| split_stress(p).1.is_some())
            .count();
        let tokens = segment_words(&segment_scripts(word).unwrap(), bundle);
        let s = token_g2p(&tokens[0], bundle).unwrap();
        assert_eq!(s.len(), vowels, "{word}");
        assert!(s
            .iter()
            .all(|x| x.tone == 0 && x.language == Language::English));
    }
    for (word, _) in bundle.mandarin_words().step_by(5) {
        let tokens = segment_words(&segment_scripts(word).unwrap(), bundle);
        assert_eq!(tokens.len(), 1, "{word}");
        let s = token_g2p(&tokens[0], bundle).unwrap();
        assert_eq!(s.len(), word.chars().count(), "{word}");
        assert!(s.iter().all(|x| x.stress == 0 && (1..=5).contains(&x.tone)));
    }
}

#[test]
fn tone_of_inverts_tone_digits_over_the_lexicon() {
    let bundle = common::bundle();
    for (_, readings) in bundle.mandarin_chars() {
        for r in readings {
            let (base, tone) = tone_of(r).unwrap();
            assert_eq!(format!("{base}{tone}"), *r);
        }
    }
}

#[test]
fn symbol_tables_are_deterministic_and_sized() {
    let bundle = common::bundle();
    let a = build_symbol_tables(bundle, &SystemConfig::ITE_BWS).unwrap();
    let b = build_symbol_tables(bundle, &SystemConfig::ITE_BWS).unwrap();
    assert_eq!(a.to_manifest(), b.to_manifest());

    let clusters: BTreeSet<String> = ["pinyin_ipa.tsv", "arpabet_ipa.tsv"]
        .iter()
        .flat_map(|f| common::table_values(f))
        .flat_map(|(_, v)| common::oracle_clusters(&v))
        .collect();
    let ite = a.get(Column::Segmental(SegmentalMode::IpaSplit)).unwrap();
    assert_eq!(ite.len(), clusters.len() + 3 + 2);

    let pe = build_symbol_tables(bundle, &SystemConfig::PE).unwrap();
    let pte = build_symbol_tables(bundle, &SystemConfig::PTE).unwrap();
    let pe_len = pe
        .get(Column::Segmental(SegmentalMode::PhonemeTonal))
        .unwrap()
        .len();
    let pte_len = pte
        .get(Column::Segmental(SegmentalMode::Phoneme))
        .unwrap()
        .len();
    assert!(pe_len > pte_len, "{pe_len} <= {pte_len}");
    assert!(pe_len <= u16::MAX as usize);

    let tone = pte.get(Column::Tone).unwrap();
    assert_eq!(tone.len(), 9);
    assert_eq!(pte.get(Column::ToneDesc(2)).unwrap().len(), 6);
}

#[test]
fn example_sentence_frame_count_under_ite() {
    let bundle = common::bundle();
    let expected: usize = ["huan", "sheng", "xiao", "yu", "sa", "man", "cun", "zhuang"]
        .iter()
        .map(|p| split_ipa(bundle.pinyin_ipa(p).unwrap()).unwrap().len())
        .sum();
    let m = encoder()
        .encode_utterance("欢声笑语洒满村庄", &SystemConfig::ITE)
        .unwrap();
    assert_eq!(m.len(), expected);
    assert_eq!(expected, 28);
}

#[test]
fn presets_are_reductions_of_the_superset() {
    let enc = encoder();
    for text in common::corpus50() {
        for mode in SegmentalMode::ALL {
            let full = enc.encode_full(&text, mode).unwrap();
            for config in SystemConfig::PRESETS.iter().filter(|c| c.segmental == mode) {
                let direct = enc.encode_utterance(&text, config).unwrap();
                assert_eq!(
                    apply_config(&full, config).unwrap(),
                    direct,
                    "{text} {config}"
                );
                assert_eq!(apply_config(&direct, config).unwrap(), direct);
            }
        }
        let ipa_full = enc.encode_full(&text, SegmentalMode::IpaSplit).unwrap();
        assert!(apply_config(&ipa_full, &SystemConfig::PTE).is_err());
    }
}

#[test]
fn context_presets_agree_on_shared_columns() {
    let enc = encoder();
    for text in common::corpus50() {
        let ite = enc.encode_utterance(&text, &SystemConfig::ITE).unwrap();
        let bws = enc.encode_utterance(&text, &SystemConfig::ITE_BWS).unwrap();
        let ordinary: Vec<_> = bws.frames.iter().filter(|f| f.boundary == 0).collect();
        assert_eq!(ordinary.len(), ite.len());
        for (a, b) in ite.frames.iter().zip(ordinary) {
            assert_eq!((a.segmental, a.tone), (b.segmental, b.tone));
        }
        let b = enc.encode_utterance(&text, &SystemConfig::ITE_B).unwrap();
        for config in [SystemConfig::ITE_BW, SystemConfig::ITE_BS] {
            let m = enc.encode_utterance(&text, &config).unwrap();
            assert_eq!(m.len(), b.len());
            for col in SystemConfig::ITE_B.columns() {
                assert_eq!(m.column(col), b.column(col), "{text} {config} {col}");
            }
        }
    }
}

#[test]
fn serialization_round_trips_random_sentences() {
    let enc = encoder();
    let corpus = common::mixed_corpus(100, 40, 3);
    for (i, text) in corpus.iter().enumerate() {
        let config = SystemConfig::PRESETS[i % 8];
        let m = enc.encode_utterance(text, &config).unwrap();
        for format in [Format::Jsonl, Format::Tsv] {
            assert_eq!(deserialize(&serialize(&m, format), format).unwrap(), m);
        }
        let back = deserialize(&serialize(&m, Format::Bin), Format::Bin).unwrap();
        assert_eq!((back.config, back.frames), (m.config, m.frames.clone()));
    }
}

#[test]
fn generated_corpus_encodes_cleanly() {
    let enc = encoder();
    let corpus = common::mixed_corpus(1000, 40, 8);
    for r in enc.encode_batch(&corpus, &SystemConfig::ITE_BWS) {
        r.unwrap();
    }
}
