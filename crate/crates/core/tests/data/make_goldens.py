"""Regenerates the tokenizer and stemmer golden files with NLTK.

    pip install nltk
    python make_goldens.py <text files...>

The stemmer runs in MARTIN_EXTENSIONS mode, which follows the reference C
implementation of the Porter algorithm. Words are drawn from the text files
given on the command line plus a fixed list of classic test words.
"""

import re
import sys
from pathlib import Path

from nltk.stem.porter import PorterStemmer

HERE = Path(__file__).parent
CLASSIC = """
caresses ponies ties caress cats feed agreed plastered bled motoring sing
conflated troubled sized hopping tanned falling hissing fizzed failing filing
happy sky relational conditional rational valenci hesitanci digitizer
conformabli radicalli differentli vileli analogousli vietnamization
predication operator feudalism decisiveness hopefulness callousness
formaliti sensitiviti sensibiliti triplicate formative formalize electriciti
electrical hopeful goodness revival allowance inference airliner gyroscopic
adjustable defensible irritant replacement adjustment dependent adoption
homologou communism activate angulariti homologous effective bowdlerize
probate rate cease controll roll generalizations oscillators running
archaeology apology logi bli eat ate is as a i by to us yes sky skies
generously generate generation generational agreement disagreement
""".split()
SENTENCES = [
    "I can't GO on!!! Nobody cares anymore...",
    "Feeling hopeless; thinking about ending everything tonight.",
    "Just finished my homework and played 3 games of chess :)",
    "The relational databases were conditionally normalized.",
    "Why does everyone keep ignoring me?? I'm SO tired of living",
    "Caresses, ponies and ties: the classic stemming examples.",
    "\U0001F61E\t\n",
    "Running, runner, runs... RAN!!! 100% done at 9am.",
    "It's 2am and I can't sleep, my thoughts won't stop racing",
    "école café naïve résumé",
]


def clean(text):
    return re.sub(r"[^a-z0-9]+", " ", text.lower()).strip()


def main():
    stemmer = PorterStemmer(mode=PorterStemmer.MARTIN_EXTENSIONS)
    stop = set((HERE.parent.parent / "data" / "stopwords.txt").read_text().split())
    words = set(CLASSIC)
    for path in sys.argv[1:]:
        text = Path(path).read_text(errors="ignore").lower()
        words.update(w for w in re.findall(r"[a-z]+", text) if len(w) < 25)
    with open(HERE / "porter_golden.tsv", "w") as f:
        for w in sorted(words):
            f.write(f"{w}\t{stemmer.stem(w, to_lowercase=False)}\n")
    with open(HERE / "tokenizer_golden.tsv", "w") as f:
        for s in SENTENCES:
            cleaned = clean(s)
            tokens = [stemmer.stem(t, to_lowercase=False) for t in cleaned.split() if t not in stop]
            escaped = s.replace("\\", "\\\\").replace("\t", "\\t").replace("\n", "\\n")
            f.write(f"{escaped}\t{cleaned}\t{' '.join(tokens)}\n")


if __name__ == "__main__":
    main()
