//! Grapheme-to-phoneme conversion into [`Syllable`]s.
//!
//! Mandarin: word reading if the whole token is in the word lexicon, else
//! the default reading of each character; the tone digit is split off and the
//! toneless syllable is mapped through the pinyin IPA table.
//!
//! English: CMU phones are grouped into one syllable per vowel nucleus. Each
//! consonant joins the nucleus that follows it; consonants after the last
//! nucleus join the last one. Stress comes from the nucleus digit.

use thiserror::Error;

use crate::resources::LexiconBundle;
pub use crate::segmentation::Language;
use crate::segmentation::Token;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum G2pError {
    #[error("character {0:?} is in neither the character nor the word lexicon")]
    UnknownCharacter(char),
    #[error("no pronunciation for {0:?}")]
    OutOfVocabulary(String),
    #[error("no IPA mapping for pinyin {0:?}")]
    UnknownPinyin(String),
    #[error("no IPA mapping for ARPAbet phone {0:?}")]
    UnknownPhone(String),
    #[error("malformed tonal pinyin {0:?}")]
    MalformedPinyin(String),
    #[error("pronunciation of {0:?} has no vowel nucleus")]
    NoNucleus(String),
}

/// One pronounceable unit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Syllable {
    pub language: Language,
    /// Toneless pinyin, or the stress-stripped ARPAbet phones joined by spaces.
    pub base: String,
    /// Segmental IPA, without tone or stress marks.
    pub ipa: String,
    /// Mandarin 1..=5 (5 = neutral); 0 for English.
    pub tone: u8,
    /// English 0..=2 from the nucleus digit; 0 for Mandarin.
    pub stress: u8,
    /// [`Token::position`] of the owning token.
    pub token_index: usize,
    pub unit_index_in_word: usize,
}

impl Syllable {
    /// Shared tone-layer class: Mandarin tones keep 1..=5, English stress
    /// 0/1/2 becomes 6/7/8, so the two languages never share a class.
    pub fn tone_class(&self) -> u8 {
        match self.language {
            Language::Mandarin => self.tone,
            Language::English => 6 + self.stress,
        }
    }

    /// Tag appended to unsplit tonal symbols: `1`..`5` or `E0`..`E2`.
    pub fn tone_tag(&self) -> String {
        match self.language {
            Language::Mandarin => self.tone.to_string(),
            Language::English => format!("E{}", self.stress),
        }
    }
}

/// Hook for tone sandhi rules. Nothing is applied unless an implementation
/// is handed to the encoder.
pub trait ToneSandhi: Send + Sync {
    /// Rewrites tones in place; `syllables` covers one whole line.
    fn apply(&self, tokens: &[Token], syllables: &mut [Syllable]);
}

/// Splits a tonal pinyin syllable into its base and tone; no digit means
/// neutral tone (5).
pub fn tone_of(tonal: &str) -> Result<(String, u8), G2pError> {
    let malformed = || G2pError::MalformedPinyin(tonal.to_string());
    let (base, tone) = match tonal.chars().last() {
        Some(d) if d.is_ascii_digit() => {
            let tone = d as u8 - b'0';
            if !(1..=5).contains(&tone) {
                return Err(malformed());
            }
            (&tonal[..tonal.len() - 1], tone)
        }
        _ => (tonal, 5),
    };
    if base.is_empty() || !base.chars().all(|c| c.is_ascii_lowercase() || c == 'ü') {
        return Err(malformed());
    }
    Ok((base.to_string(), tone))
}

/// `"OW1"` → `("OW", Some(1))`, `"L"` → `("L", None)`.
pub fn split_stress(phone: &str) -> (&str, Option<u8>) {
    match phone.as_bytes().last() {
        Some(d @ b'0'..=b'9') => (&phone[..phone.len() - 1], Some(d - b'0')),
        _ => (phone, None),
    }
}

pub fn pinyin_to_ipa_lookup<'b>(
    base: &str,
    bundle: &'b LexiconBundle,
) -> Result<&'b str, G2pError> {
    bundle
        .pinyin_ipa(base)
        .ok_or_else(|| G2pError::UnknownPinyin(base.to_string()))
}

pub fn mandarin_g2p(token: &Token, bundle: &LexiconBundle) -> Result<Vec<Syllable>, G2pError> {
    let readings: Vec<&str> = match bundle.word_reading(&token.surface) {
        Some(r) => r.iter().map(String::as_str).collect(),
        None => token
            .surface
            .chars()
            .map(|c| bundle.char_reading(c).ok_or(G2pError::UnknownCharacter(c)))
            .collect::<Result<_, _>>()?,
    };
    readings
        .into_iter()
        .enumerate()
        .map(|(i, reading)| {
            let (base, tone) = tone_of(reading)?;
            let ipa = pinyin_to_ipa_lookup(&base, bundle)?.to_string();
            Ok(Syllable {
                language: Language::Mandarin,
                base,
                ipa,
                tone,
                stress: 0,
                token_index: token.position,
                unit_index_in_word: i,
            })
        })
        .collect()
}

/// Groups CMU phones into `(stress-stripped phones, nucleus stress)` units.
pub fn english_syllable_groups(phones: &[String]) -> Vec<(Vec<&str>, u8)> {
    let mut groups: Vec<(Vec<&str>, u8)> = Vec::new();
    let mut pending: Vec<&str> = Vec::new();
    for p in phones {
        let (phone, stress) = split_stress(p);
        pending.push(phone);
        if let Some(stress) = stress {
            groups.push((std::mem::take(&mut pending), stress));
        }
    }
    if let Some(last) = groups.last_mut() {
        last.0.extend(pending);
    }
    groups
}

pub fn english_g2p(token: &Token, bundle: &LexiconBundle) -> Result<Vec<Syllable>, G2pError> {
    let key = token.surface.to_lowercase();
    let phones = bundle
        .english_phones(&key)
        .ok_or_else(|| G2pError::OutOfVocabulary(token.surface.clone()))?;
    let groups = english_syllable_groups(phones);
    if groups.is_empty() {
        return Err(G2pError::NoNucleus(token.surface.clone()));
    }
    groups
        .into_iter()
        .enumerate()
        .map(|(i, (group, stress))| {
            let ipa = group
                .iter()
                .map(|p| {
                    bundle
                        .arpabet_ipa(p)
                        .ok_or_else(|| G2pError::UnknownPhone(p.to_string()))
                })
                .collect::<Result<String, _>>()?;
            Ok(Syllable {
                language: Language::English,
                base: group.join(" "),
                ipa,
                tone: 0,
                stress: stress.min(2),
                token_index: token.position,
                unit_index_in_word: i,
            })
        })
        .collect()
}

pub fn token_g2p(token: &Token, bundle: &LexiconBundle) -> Result<Vec<Syllable>, G2pError> {
    match token.language {
        Language::Mandarin => mandarin_g2p(token, bundle),
        Language::English => english_g2p(token, bundle),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::resources::ResourceTexts;
    use crate::segmentation::PosTag;

    fn bundle() -> LexiconBundle {
        ResourceTexts {
            mandarin_char: "欢\thuan1\n语\tyu3\n了\tle5,liao3\n行\txing2,hang2\n",
            mandarin_word: "银行\tyin2 hang2\n",
            english: "HELLO  HH AH0 L OW1\nA  AH0\nSTRENGTHS  S T R EH1 NG K TH S\n",
            pinyin_ipa: "huan\txwan\nyu\ty\nle\tlɤ\nliao\tljɑʊ\nxing\tɕiŋ\nhang\txɑŋ\nyin\tin\n",
            arpabet_ipa:
                "HH\th\nAH\tə\nL\tl\nOW\toʊ\nS\ts\nT\tt\nR\tɹ\nEH\tɛ\nNG\tŋ\nK\tk\nTH\tθ\n",
            pos: "",
        }
        .parse()
        .unwrap()
    }

    fn token(surface: &str, language: Language) -> Token {
        Token {
            surface: surface.into(),
            language,
            pos: PosTag::X,
            word_index: 0,
            sentence_index: 0,
            char_count: surface.chars().count(),
            position: 3,
            offset: 0,
        }
    }

    #[test]
    fn tone_digit_convention() {
        assert_eq!(tone_of("huan1").unwrap(), ("huan".into(), 1));
        assert_eq!(tone_of("ma").unwrap(), ("ma".into(), 5));
        assert_eq!(tone_of("lü4").unwrap(), ("lü".into(), 4));
        for bad in ["x9", "x0", "", "5", "Ma1"] {
            assert_eq!(
                tone_of(bad),
                Err(G2pError::MalformedPinyin(bad.into())),
                "{bad}"
            );
        }
    }

    #[test]
    fn mandarin_character_readings() {
        let b = bundle();
        let s = mandarin_g2p(&token("欢", Language::Mandarin), &b).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(
            (s[0].base.as_str(), s[0].tone, s[0].ipa.as_str()),
            ("huan", 1, "xwan")
        );
        assert_eq!(s[0].stress, 0);
        assert_eq!(s[0].token_index, 3);
        let s = mandarin_g2p(&token("语", Language::Mandarin), &b).unwrap();
        assert_eq!((s[0].base.as_str(), s[0].tone), ("yu", 3));
    }

    #[test]
    fn word_reading_overrides_character_default() {
        let b = bundle();
        let s = mandarin_g2p(&token("银行", Language::Mandarin), &b).unwrap();
        let bases: Vec<_> = s
            .iter()
            .map(|x| (x.base.as_str(), x.unit_index_in_word))
            .collect();
        assert_eq!(bases, [("yin", 0), ("hang", 1)]);
        let s = mandarin_g2p(&token("行了", Language::Mandarin), &b).unwrap();
        assert_eq!(s[0].base, "xing");
        assert_eq!(s[1].tone, 5);
    }

    #[test]
    fn unknown_character() {
        let b = bundle();
        assert_eq!(
            mandarin_g2p(&token("嫑", Language::Mandarin), &b),
            Err(G2pError::UnknownCharacter('嫑'))
        );
    }

    #[test]
    fn english_nucleus_grouping() {
        let b = bundle();
        let s = english_g2p(&token("Hello", Language::English), &b).unwrap();
        let got: Vec<_> = s
            .iter()
            .map(|x| (x.base.as_str(), x.stress, x.ipa.as_str()))
            .collect();
        assert_eq!(got, [("HH AH", 0, "hə"), ("L OW", 1, "loʊ")]);
        assert!(s.iter().all(|x| x.tone == 0));

        let s = english_g2p(&token("a", Language::English), &b).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].stress, 0);

        let s = english_g2p(&token("strengths", Language::English), &b).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].base, "S T R EH NG K TH S");
        assert_eq!(s[0].ipa, "stɹɛŋkθs");
    }

    #[test]
    fn english_oov() {
        let b = bundle();
        assert_eq!(
            english_g2p(&token("zzzyx", Language::English), &b),
            Err(G2pError::OutOfVocabulary("zzzyx".into()))
        );
    }

    #[test]
    fn pinyin_lookup() {
        let b = bundle();
        assert_eq!(pinyin_to_ipa_lookup("huan", &b), Ok("xwan"));
        assert_eq!(
            pinyin_to_ipa_lookup("", &b),
            Err(G2pError::UnknownPinyin(String::new()))
        );
    }

    #[test]
    fn tone_classes_do_not_collide() {
        let b = bundle();
        let m = mandarin_g2p(&token("欢", Language::Mandarin), &b).unwrap();
        let e = english_g2p(&token("hello", Language::English), &b).unwrap();
        assert_eq!(m[0].tone_class(), 1);
        assert_eq!(e[0].tone_class(), 6);
        assert_eq!(e[1].tone_class(), 7);
        assert_eq!(e[1].tone_tag(), "E1");
    }
}
