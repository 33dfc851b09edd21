#!/usr/bin/env python3
"""Regenerate the bundled fixture lexicons from the `wordfreq` package.

Each output file is `word<TAB>count`, where count is the word's frequency
scaled to occurrences per ten million tokens (minimum 1). Only words made
entirely of letters and combining marks are kept.

    pip install wordfreq
    python3 scripts/make_fixture_lexicons.py crates/core/tests/fixtures/lexicons
"""
import sys
import unicodedata
from pathlib import Path

import regex
import wordfreq

LANGS = ["es", "it", "pt", "fr", "en", "de", "pl", "cs", "ru"]
TOP_N = 8000
WORD = regex.compile(r"^[\p{L}\p{M}]+$")


def main(out_dir: str) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for lang in LANGS:
        rows = []
        for word in wordfreq.top_n_list(lang, TOP_N * 2):
            word = unicodedata.normalize("NFC", word.lower())
            if not WORD.match(word):
                continue
            count = max(1, round(wordfreq.word_frequency(word, lang) * 1e7))
            rows.append((word, count))
            if len(rows) == TOP_N:
                break
        with open(out / f"{lang}.tsv", "w", encoding="utf-8") as fh:
            fh.write("word\tcount\n")
            for word, count in rows:
                fh.write(f"{word}\t{count}\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "crates/core/tests/fixtures/lexicons")
