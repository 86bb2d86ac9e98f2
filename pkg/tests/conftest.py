from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

from tmac.dsl import parse
from tmac.elicitation import elicit
from tmac.risk import assess

settings.register_profile(
    "repo",
    max_examples=100,
    derandomize=True,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("repo")

REPO_ROOT = Path(__file__).resolve().parent.parent
REFERENCE = REPO_ROOT / "reference"


def parse_file(path: Path):
    result = parse(path.read_text(encoding="utf-8"), source_name=str(path))
    assert result.ok, result.diagnostics
    return result.document


@pytest.fixture(scope="session")
def reference_dir() -> Path:
    return REFERENCE


@pytest.fixture(scope="session")
def reference_paths() -> tuple[Path, Path, Path]:
    return (
        REFERENCE / "smart-home.tma",
        REFERENCE / "linddun-sh.tma",
        REFERENCE / "masking-e2ee.tma",
    )


@pytest.fixture(scope="session")
def reference_model():
    (model,) = parse_file(REFERENCE / "smart-home.tma").items
    return model


@pytest.fixture(scope="session")
def reference_catalog():
    (catalog,) = parse_file(REFERENCE / "linddun-sh.tma").items
    return catalog


@pytest.fixture(scope="session")
def reference_scenario():
    (scenario,) = parse_file(REFERENCE / "masking-e2ee.tma").items
    return scenario


@pytest.fixture(scope="session")
def reference_matrix(reference_model, reference_catalog):
    return elicit(reference_model, reference_catalog, ())


@pytest.fixture(scope="session")
def baseline_report(reference_matrix, reference_catalog):
    return assess(reference_matrix, reference_catalog)
