import shutil
from pathlib import Path

import pytest

from haluforge.corpus.manifest import CveEntry
from haluforge.pipeline.config import RunConfig

FIXTURES = Path(__file__).parent / "fixtures"
VECDEQUE_CVE = "CVE-2018-1000657"
VECDEQUE_PATH = "src/liballoc/vec_deque.rs"


@pytest.fixture
def vecdeque_entry():
    return CveEntry(
        cve_id=VECDEQUE_CVE,
        cwe_id="CWE-119",
        program="standard library in rust",
        version_note="before 1.22.0",
        patch_url="https://github.com/rust-lang/rust/commit/f71b37bc28326e272a37b938e835d4f99113eec2",
    )


@pytest.fixture
def vecdeque_patch():
    return (FIXTURES / "patches" / f"{VECDEQUE_CVE}.patch").read_text(encoding="utf-8")


@pytest.fixture
def vecdeque_source():
    return (FIXTURES / "sources" / VECDEQUE_CVE / VECDEQUE_PATH).read_text(encoding="utf-8")


@pytest.fixture
def mock_corpus(tmp_path):
    """Six-record corpus with cached patches and descriptions, copied to tmp."""
    corpus = tmp_path / "corpus"
    shutil.copytree(FIXTURES / "mock_corpus", corpus)
    shutil.copy(FIXTURES / "patches" / f"{VECDEQUE_CVE}.patch", corpus / "patches")
    shutil.copytree(FIXTURES / "sources", corpus / "sources")
    return corpus


@pytest.fixture
def mock_config(tmp_path, mock_corpus):
    return RunConfig(
        corpus_dir=mock_corpus,
        run_dir=tmp_path / "run",
        manifest_path=mock_corpus / "manifest.csv",
        mock_mode=True,
        k_rounds=3,
        p=0.5,
    )
