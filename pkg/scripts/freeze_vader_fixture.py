"""Freeze reference VADER scores for the fixture corpus.

Runs the published ``vaderSentiment`` package (install it separately; it is not
a dependency of sentifolio) with sentifolio's bundled lexicon files and writes
``tests/fixtures/vader_reference.json``.

    pip install vaderSentiment
    python scripts/freeze_vader_fixture.py
"""
import json
from pathlib import Path

from vaderSentiment import vaderSentiment as ref

ROOT = Path(__file__).resolve().parents[1]
DATA = ROOT / "src" / "sentifolio" / "data"
FIXTURES = ROOT / "tests" / "fixtures"


def main() -> None:
    lexicon = DATA / "vader_lexicon.txt"
    emoji = DATA / "emoji_utf8_lexicon.txt"
    # the reference resolves lexicon paths relative to its own module
    analyzer = ref.SentimentIntensityAnalyzer(lexicon_file=str(lexicon), emoji_lexicon=str(emoji))
    sentences = (FIXTURES / "vader_corpus.txt").read_text(encoding="utf-8").splitlines()
    rows = [{"text": s, **analyzer.polarity_scores(s)} for s in sentences]
    out = FIXTURES / "vader_reference.json"
    out.write_text(json.dumps(rows, indent=1, ensure_ascii=False) + "\n", encoding="utf-8")
    print(f"wrote {len(rows)} reference scores to {out}")


if __name__ == "__main__":
    main()
