#!/usr/bin/env python3
"""Regenerate the shipped lexicon files under resources/.

Inputs are the unpacked contents of three PyPI distributions:

    pip download --no-deps cmudict jieba dragonmapper
    pip install pypinyin

    python3 tools/build_resources.py \
        --cmudict   <unpacked>/cmudict/data/cmudict.dict \
        --jieba     <unpacked>/jieba-0.42.1/jieba/dict.txt \
        --ipa-table <unpacked>/dragonmapper/data/transcriptions.csv \
        --out resources

The output is deterministic: every file is key-sorted.
"""

import argparse
import collections
import csv
import os
import re

from pypinyin import Style, pinyin

N_CHARS = 6000
MIN_WORD_FREQ = 20

# Syllables missing from the dragonmapper table. Syllabic nasals carry
# U+0329 / U+030D so they stay one grapheme cluster with their base.
EXTRA_PINYIN_IPA = {
    "m": "m̩",
    "n": "n̩",
    "ng": "ŋ̍",
    "hm": "hm̩",
    "hng": "hŋ̍",
    "ea": "ɛ",
    "lo": "lɔ",
    "yo": "jɔ",
    "o": "ɔ",
    "den": "tən",
    "nun": "nwən",
    "kei": "kʰeɪ",
    "fiao": "fjɑʊ",
    "lvan": "lɥœn",
    "lun": "lwən",
    "len": "lən",
    "eng": "ɤŋ",
    "er": "ɑɻ",
}

ARPABET_IPA = {
    "AA": "ɑ", "AE": "æ", "AH": "ə", "AO": "ɔ",
    "AW": "aʊ", "AY": "aɪ", "B": "b", "CH": "tʃ",
    "D": "d", "DH": "ð", "EH": "ɛ", "ER": "ɝ",
    "EY": "eɪ", "F": "f", "G": "ɡ", "HH": "h",
    "IH": "ɪ", "IY": "i", "JH": "dʒ", "K": "k",
    "L": "l", "M": "m", "N": "n", "NG": "ŋ",
    "OW": "oʊ", "OY": "ɔɪ", "P": "p", "R": "ɹ",
    "S": "s", "SH": "ʃ", "T": "t", "TH": "θ",
    "UH": "ʊ", "UW": "u", "V": "v", "W": "w",
    "Y": "j", "Z": "z", "ZH": "ʒ",
}

POS_MAP = {
    "n": "n", "nr": "n", "ns": "n", "nt": "n", "nz": "n", "ng": "n",
    "nrt": "n", "nrfg": "n", "s": "n", "t": "n", "tg": "n", "f": "n",
    "j": "n", "i": "n", "l": "n",
    "v": "v", "vn": "v", "vd": "v", "vg": "v", "vi": "v", "vq": "v",
    "a": "a", "an": "a", "ad": "a", "ag": "a", "b": "a", "z": "a",
    "d": "d", "df": "d", "dg": "d",
    "p": "p", "c": "c",
    "u": "u", "uj": "u", "ul": "u", "uz": "u", "ud": "u", "ug": "u", "uv": "u",
    "m": "m", "mq": "m", "mg": "m",
    "q": "q",
    "r": "r", "rr": "r", "rz": "r", "rg": "r",
}

TONAL = re.compile(r"^([a-z]+)([1-5])$")


def is_cjk(ch):
    return 0x4E00 <= ord(ch) <= 0x9FFF


def load_ipa_table(path):
    table = {}
    with open(path, encoding="utf-8") as f:
        for row in csv.DictReader(f):
            key = row["Pinyin"].replace("ü", "v")
            table[key] = row["IPA"]
    for k, v in EXTRA_PINYIN_IPA.items():
        table.setdefault(k, v)
    return table


def readings_of(ch, ipa):
    out = []
    for r in pinyin(ch, style=Style.TONE3, heteronym=True, neutral_tone_with_five=True)[0]:
        m = TONAL.match(r)
        if m and m.group(1) in ipa and r not in out:
            out.append(r)
    return out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--cmudict", required=True)
    ap.add_argument("--jieba", required=True)
    ap.add_argument("--ipa-table", required=True)
    ap.add_argument("--out", required=True)
    args = ap.parse_args()
    os.makedirs(args.out, exist_ok=True)

    ipa = load_ipa_table(args.ipa_table)

    jieba = []
    with open(args.jieba, encoding="utf-8") as f:
        for line in f:
            parts = line.split()
            if len(parts) == 3:
                jieba.append((parts[0], int(parts[1]), parts[2]))

    char_freq = collections.Counter()
    for word, freq, _ in jieba:
        for ch in word:
            if is_cjk(ch):
                char_freq[ch] += freq

    chars = {}
    for ch, _ in sorted(char_freq.items(), key=lambda kv: (-kv[1], kv[0])):
        rs = readings_of(ch, ipa)
        if rs:
            chars[ch] = rs
        if len(chars) == N_CHARS:
            break

    words = {}
    ranked = sorted(
        (w for w in jieba if len(w[0]) >= 2 and w[1] >= MIN_WORD_FREQ and all(c in chars for c in w[0])),
        key=lambda w: (-w[1], w[0]),
    )
    for word, _, _ in ranked:
        syls = [s[0] for s in pinyin(word, style=Style.TONE3, neutral_tone_with_five=True)]
        if len(syls) != len(word):
            continue
        if all(TONAL.match(s) and TONAL.match(s).group(1) in ipa for s in syls):
            words[word] = syls

    pos = {}
    for word, _, tag in jieba:
        if (word in words or word in chars) and word not in pos:
            pos[word] = POS_MAP.get(tag, "x")

    english = {}
    with open(args.cmudict, encoding="utf-8") as f:
        for line in f:
            line = line.split("#")[0].strip()
            if not line:
                continue
            head, *phones = line.split()
            if "(" in head or not re.fullmatch(r"[a-z']*[a-z][a-z']*", head):
                continue
            if not any(p[-1].isdigit() for p in phones):
                continue
            if all(re.sub(r"\d", "", p) in ARPABET_IPA for p in phones):
                english.setdefault(head, phones)

    def write(name, header, rows):
        with open(os.path.join(args.out, name), "w", encoding="utf-8", newline="\n") as f:
            for h in header:
                f.write(h + "\n")
            for r in rows:
                f.write(r + "\n")

    write(
        "mandarin_char.tsv",
        ["# <char>\\t<tonal_pinyin>[,<alt>...]  first reading is the default"],
        (f"{c}\t{','.join(rs)}" for c, rs in sorted(chars.items())),
    )
    write(
        "mandarin_word.tsv",
        ["# <word>\\t<tonal_pinyin> <tonal_pinyin> ..."],
        (f"{w}\t{' '.join(s)}" for w, s in sorted(words.items())),
    )
    write(
        "pinyin_ipa.tsv",
        ["# <toneless_pinyin>\\t<ipa>  (v spells u-umlaut)"],
        (f"{k}\t{v}" for k, v in sorted(ipa.items())),
    )
    write(
        "arpabet_ipa.tsv",
        ["# <arpabet_phone>\\t<ipa>"],
        (f"{k}\t{v}" for k, v in sorted(ARPABET_IPA.items())),
    )
    write(
        "pos.tsv",
        ["# <word>\\t<tag>  tagset: n v a d p c u m q r x"],
        (f"{w}\t{t}" for w, t in sorted(pos.items())),
    )
    write(
        "english.dict",
        [";;; CMU Pronouncing Dictionary subset, see LICENSE-cmudict"],
        (f"{w.upper()}  {' '.join(p)}" for w, p in sorted(english.items())),
    )
    print(f"chars={len(chars)} words={len(words)} pos={len(pos)} english={len(english)} pinyin={len(ipa)}")


if __name__ == "__main__":
    main()
