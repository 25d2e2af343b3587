from __future__ import annotations

import sys
from pathlib import Path

import pytest

from minisa.cfg import build_all
from minisa.frontend import compile_source

TESTS = Path(__file__).parent
CORPUS = TESTS / "corpus"
sys.path.insert(0, str(TESTS))


def corpus_files() -> list[Path]:
    return sorted(CORPUS.glob("*.mc"))


def load(name: str):
    path = CORPUS / name
    return compile_source(path.read_text(), str(path))


def compile_fn(body: str, header: str = "int f()"):
    """Compile a single function and return (unit, cfg of that function)."""
    tu = compile_source(f"{header} {{ {body} }}", "t.mc")
    name = header.split("(")[0].split()[-1]
    return tu, build_all(tu.info)[name]


@pytest.fixture
def corpus():
    return CORPUS
