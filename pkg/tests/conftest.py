from __future__ import annotations

import json
from pathlib import Path

import pytest

from procrastimate.domain import default_deck
from procrastimate.engine import RulesEngine
from procrastimate.storypack import load_reference_pack

PACK_PATH = (Path(__file__).resolve().parents[1]
             / "src" / "procrastimate" / "data" / "packs" / "reference.json")


@pytest.fixture(scope="session")
def reference_pack():
    return load_reference_pack()


@pytest.fixture(scope="session")
def deck():
    return default_deck()


@pytest.fixture()
def engine(reference_pack, deck):
    return RulesEngine(reference_pack, deck)


@pytest.fixture()
def reference_doc() -> dict:
    """A fresh mutable copy of the reference pack document, for mutation tests."""
    return json.loads(PACK_PATH.read_text(encoding="utf-8"))
