from __future__ import annotations

from pathlib import Path

import pytest

from screenbench.corpus import apply_label_corrections, generate_synthetic_fixture

DATA = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def marginals_dir(tmp_path_factory) -> Path:
    out = tmp_path_factory.mktemp("marginals")
    generate_synthetic_fixture(1, "paper_marginals", out, inject_known_errors=True)
    return out


@pytest.fixture(scope="session")
def marginals_raw(marginals_dir):
    from screenbench.corpus import load_manifest

    return load_manifest(marginals_dir / "manifest.csv")


@pytest.fixture(scope="session")
def marginals_manifest(marginals_raw):
    return apply_label_corrections(marginals_raw)


@pytest.fixture(scope="session")
def small_dir(tmp_path_factory) -> Path:
    out = tmp_path_factory.mktemp("small")
    generate_synthetic_fixture(7, "uniform", out, n=40)
    return out


@pytest.fixture(scope="session")
def small_manifest(small_dir):
    from screenbench.corpus import load_manifest

    return load_manifest(small_dir / "manifest.csv")


def pytest_terminal_summary(terminalreporter):
    from helpers import ACCEPTANCE

    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[n])
