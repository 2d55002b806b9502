import sys
from pathlib import Path

import pytest

TESTS_DIR = Path(__file__).resolve().parent
DATA_DIR = TESTS_DIR / "data"

if str(TESTS_DIR) not in sys.path:
    sys.path.insert(0, str(TESTS_DIR))


@pytest.fixture(scope="session")
def sample_corpus_path() -> Path:
    return DATA_DIR / "sample_news.jsonl"


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    """Trigger JIT compilation once so timed acceptance windows measure
    steady-state sampling, not compilation."""
    from newstm.lda import LdaHyperparams, train_lda
    from newstm.preprocess import BowDoc

    train_lda(
        [BowDoc("warm", {0: 2, 1: 1})],
        vocab_size=2,
        hyper=LdaHyperparams(k=2, alpha=1.0, iterations=3, burn_in=1, thin=1),
    )


_ACCEPTANCE: dict[str, str] = {}


def pytest_runtest_logreport(report):
    if "test_acceptance" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    if report.when == "call":
        _ACCEPTANCE[name] = report.outcome
    elif report.when == "setup" and report.outcome != "passed":
        _ACCEPTANCE[name] = report.outcome


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    labels = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}
    for name in sorted(_ACCEPTANCE):
        outcome = _ACCEPTANCE[name]
        terminalreporter.write_line(f"{labels.get(outcome, outcome.upper())}  {name}")
