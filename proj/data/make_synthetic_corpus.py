#!/usr/bin/env python3
"""Generate data/synthetic_corpus.csv.

The phrases follow an invented SOV toy language. They are NOT Owens Valley
Paiute; they only give the harness a 100-pair corpus of the right scale and
shape (single-word glosses plus short sentences) for offline runs and tests.
"""
import csv
import random
import sys

NOUNS = {
    "kwiyaa": "bear", "tsoni": "lizard", "kusupi": "bird", "togoa": "snake",
    "paya": "water", "kutsu": "wood", "tipi": "rock", "kamuu": "jackrabbit",
    "ithaa": "coyote", "hoopi": "squirrel", "pavoo": "chair", "toyabi": "mountain",
    "wogo": "tree", "sadee": "dog",
}
DEMS = {"ina": "this", "usu": "that", "mai": "the"}
# root -> (3sg present, past, bare), transitive?
VERBS = {
    "hupi": ("sleeps", "slept", "sleep", False),
    "tika": ("eats", "ate", "eat", True),
    "puni": ("sees", "saw", "see", True),
    "tono": ("hits", "hit", "hit", True),
    "mia": ("runs", "ran", "run", False),
    "hibi": ("drinks", "drank", "drink", True),
    "naka": ("hears", "heard", "hear", True),
    "wiki": ("climbs", "climbed", "climb", False),
    "sawa": ("cooks", "cooked", "cook", True),
    "poro": ("writes", "wrote", "write", False),
}
TENSES = {"ki": 0, "nu": 1, "wei": "will", "pa": "going"}


def english_verb(forms, tense):
    pres, past, bare, _ = forms
    if tense == "ki":
        return pres
    if tense == "nu":
        return past
    if tense == "wei":
        return "will " + bare
    return "is going to " + bare


def main(out_path):
    rng = random.Random(20250101)
    rows = [(s, t) for s, t in NOUNS.items()] + [(s, t) for s, t in DEMS.items()]
    refs = set()
    sentences = []
    while len(sentences) < 83:
        dem_s = rng.choice(list(DEMS))
        noun_s = rng.choice(list(NOUNS))
        root = rng.choice(list(VERBS))
        tense = rng.choice(list(TENSES))
        forms = VERBS[root]
        src = [dem_s, noun_s]
        eng = [DEMS[dem_s], NOUNS[noun_s], english_verb(forms, tense)]
        if forms[3]:
            dem_o = rng.choice(list(DEMS))
            noun_o = rng.choice([n for n in NOUNS if n != noun_s])
            src += [dem_o, noun_o]
            eng += [DEMS[dem_o], NOUNS[noun_o]]
        src.append(root + tense)
        text = " ".join(eng)
        ref = text[0].upper() + text[1:] + "."
        if ref.lower() in refs or any(ref.lower() in r or r in ref.lower() for r in refs):
            continue
        refs.add(ref.lower())
        sentences.append((" ".join(src), ref))
    rows += sentences
    with open(out_path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["source", "translation"])
        w.writerows(rows)


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "synthetic_corpus.csv")
