import pathlib
from types import SimpleNamespace

import pytest

from taxalign.candidates import generate_candidates, load_dict
from taxalign.evaluation import load_gold
from taxalign.taxonomy import build_closure, load_taxonomy

DATA_DIR = pathlib.Path(__file__).parent / "data"


def _load_bundle(name: str) -> SimpleNamespace:
    base = DATA_DIR / name
    with open(base / "source.tax", encoding="utf-8") as fh:
        src = load_taxonomy(fh, path=str(base / "source.tax"))
    with open(base / "target.tax", encoding="utf-8") as fh:
        tgt = load_taxonomy(fh, path=str(base / "target.tax"))
    with open(base / "dict.tsv", encoding="utf-8") as fh:
        dictionary = load_dict(fh, path=str(base / "dict.tsv"))
    with open(base / "gold.tsv", encoding="utf-8") as fh:
        gold = load_gold(fh, path=str(base / "gold.tsv"))
    cand = generate_candidates(src, tgt, dictionary)
    return SimpleNamespace(
        base=base, src=src, tgt=tgt, dictionary=dictionary, gold=gold, cand=cand,
        src_index=build_closure(src), tgt_index=build_closure(tgt))


@pytest.fixture(scope="session")
def worked():
    """The animal/ave/faisan/rapaz fragment with its concept-side counterpart."""
    return _load_bundle("worked")


@pytest.fixture(scope="session")
def piel():
    """The piel/marta/vison hierarchy whose right concepts live in noun.substance."""
    return _load_bundle("piel")


@pytest.fixture()
def data_dir():
    return DATA_DIR
