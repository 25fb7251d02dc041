#!/usr/bin/env python3
"""Generate data/toy_corpus.tsv (short labelled movie-review sentences) and
data/lm_corpus.tsv (more sentences from the same grammar, none of them in the
labelled corpus) for training the auxiliary language model."""

import random
import sys

POS_ADJ = ["good", "great", "fun", "funny", "moving", "smart", "charming", "lovely", "warm", "bright",
           "clever", "solid", "fresh", "sweet", "gripping", "tender", "witty", "honest"]
NEG_ADJ = ["bad", "dull", "boring", "weak", "silly", "slow", "flat", "awful", "bland", "messy",
           "tired", "cheap", "clumsy", "stale", "sloppy", "empty", "grim", "lazy"]
NOUNS = ["film", "movie", "story", "plot", "cast", "script", "ending", "score", "hero", "director",
         "acting", "dialogue", "comedy", "drama", "sequel", "villain"]
ADV = ["very", "really", "quite", "so", "truly", "rather"]
POS_VERB = ["loved", "enjoyed", "liked", "adored", "admired"]
NEG_VERB = ["hated", "disliked", "regretted", "endured", "resented"]
PEOPLE = ["i", "we", "my friends", "the kids", "everyone"]

TEMPLATES = [
    "{adv} {adj} {noun} .",
    "{adj} {noun} !",
    "the {noun} is {adj} .",
    "the {noun} was {adv} {adj} .",
    "a {adj} {noun} .",
    "what a {adj} {noun} !",
    "{people} {verb} the {noun} .",
    "{people} {verb} this {adj} {noun} .",
    "the {noun} and the {noun2} are {adj} .",
    "an {adv} {adj} {noun} with a {adj2} {noun2} .",
    "this {noun} feels {adv} {adj} .",
    "{people} {verb} it , the {noun} is {adj} .",
]


def sentence(rng, label):
    adjs = POS_ADJ if label else NEG_ADJ
    verbs = POS_VERB if label else NEG_VERB
    t = rng.choice(TEMPLATES)
    noun, noun2 = rng.sample(NOUNS, 2)
    adj, adj2 = rng.sample(adjs, 2)
    s = t.format(noun=noun, noun2=noun2, adj=adj, adj2=adj2, adv=rng.choice(ADV), verb=rng.choice(verbs),
                 people=rng.choice(PEOPLE))
    if s.startswith("an ") and not s.split()[1][0] in "aeiou":
        s = "a " + s[3:]
    return s


def generate(rng, count, exclude):
    seen = set(exclude)
    rows = []
    while len(rows) < count:
        label = len(rows) % 2
        s = sentence(rng, label)
        n = len(s.split())
        if s in seen or not 3 <= n <= 10:
            continue
        seen.add(s)
        rows.append((label, s))
    rng.shuffle(rows)
    return rows


def write(path, rows):
    with open(path, "w", encoding="utf-8") as f:
        for label, s in rows:
            f.write(f"{label}\t{s}\n")


def main():
    out = sys.argv[1] if len(sys.argv) > 1 else "data/toy_corpus.tsv"
    lm_out = sys.argv[2] if len(sys.argv) > 2 else "data/lm_corpus.tsv"
    labelled = generate(random.Random(7), 200, ())
    write(out, labelled)
    write(lm_out, generate(random.Random(11), 2000, {s for _, s in labelled}))


if __name__ == "__main__":
    main()
