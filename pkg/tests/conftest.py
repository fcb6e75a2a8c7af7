import contextlib

import pytest

import curveflow.integrator as integrator

# Every attempted adaptive step in the whole session passes through this wrapper,
# so "accepted error <= tol" is checked suite-wide, not only in one test.
STEP_LOG = {"accepted": 0, "violations": []}
ACCEPTANCE = {}

_original_rkm_step = integrator.rkm_step


def _monitored_rkm_step(rhs, t, y, dt, config):
    result = _original_rkm_step(rhs, t, y, dt, config)
    if result.accepted:
        STEP_LOG["accepted"] += 1
        if not result.error <= config.tol:
            STEP_LOG["violations"].append((t, dt, result.error, config.tol))
    return result


def pytest_configure(config):
    integrator.rkm_step = _monitored_rkm_step


def pytest_unconfigure(config):
    integrator.rkm_step = _original_rkm_step


def pytest_collection_modifyitems(session, config, items):
    # acceptance runs last so the step monitor has seen the rest of the suite
    items.sort(key=lambda item: item.path.name == "test_acceptance.py")


class CriterionRecord:
    def __init__(self, key, title):
        self.key = key
        self.title = title
        self.details = []

    def note(self, text):
        self.details.append(text)


def _split(key):
    """``"8b"`` -> ``(8, "b")``."""
    digits = "".join(ch for ch in key if ch.isdigit())
    return int(digits), key[len(digits):]


@pytest.fixture
def criterion():
    """Record PASS/FAIL of an acceptance criterion part such as ``"8b"``; failures still propagate."""

    @contextlib.contextmanager
    def _criterion(key, title):
        rec = CriterionRecord(str(key), title)
        try:
            yield rec
        except BaseException as exc:
            reason = f"{type(exc).__name__}: {exc}".splitlines()[0]
            ACCEPTANCE[rec.key] = ("FAIL", title, rec.details + [reason])
            print(f"[criterion {rec.key:>3}] FAIL  {title}")
            raise
        else:
            ACCEPTANCE[rec.key] = ("PASS", title, rec.details)
            print(f"[criterion {rec.key:>3}] PASS  {title}")

    return _criterion


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        numbers = sorted({_split(k)[0] for k in ACCEPTANCE})
        for n in numbers:
            parts = sorted((k for k in ACCEPTANCE if _split(k)[0] == n), key=_split)
            status = "PASS" if all(ACCEPTANCE[k][0] == "PASS" for k in parts) else "FAIL"
            terminalreporter.write_line(f"criterion {n:>2}: {status}")
            for k in parts:
                part_status, title, details = ACCEPTANCE[k]
                terminalreporter.write_line(f"    {k:<4}{part_status}  {title}")
                for d in details:
                    terminalreporter.write_line(f"            {d}")
    terminalreporter.section("adaptive step monitor")
    terminalreporter.write_line(
        f"accepted steps: {STEP_LOG['accepted']}, accepted with error > tol: {len(STEP_LOG['violations'])}"
    )


def pytest_sessionfinish(session, exitstatus):
    if STEP_LOG["violations"] and session.exitstatus == 0:
        session.exitstatus = 1
