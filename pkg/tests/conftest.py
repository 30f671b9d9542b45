import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from corpus import build_corpus  # noqa: E402

from jarscan.kb import KnowledgeBase, build_entry  # noqa: E402
from jarscan.classfile import parse_class  # noqa: E402


@pytest.fixture(scope="session")
def corpus():
    return build_corpus()


@pytest.fixture(scope="session")
def corpus_kb(corpus):
    records = {}
    for cve in corpus.cve_ids:
        pre = [parse_class(b) for _n, b in corpus.pre_classes[cve]]
        post = [parse_class(b) for _n, b in corpus.post_classes[cve]]
        records[cve] = build_entry(cve, pre, post)
    return KnowledgeBase(records=records)
