import numpy as np
import pytest

FD_STEP = 1e-6


def central_difference(fun, x, h=FD_STEP):
    """Central finite differences of scalar ``fun`` at flat vector ``x``."""
    x = np.array(x, dtype=float)
    out = np.empty_like(x)
    for i in range(x.size):
        xp, xm = x.copy(), x.copy()
        xp[i] += h
        xm[i] -= h
        out[i] = (fun(xp) - fun(xm)) / (2 * h)
    return out


def relative_error(analytic, numeric):
    analytic = np.asarray(analytic, dtype=float)
    numeric = np.asarray(numeric, dtype=float)
    return np.max(np.abs(analytic - numeric) / np.maximum(1.0, np.abs(analytic)), initial=0.0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# criterion id -> (passed, detail); filled by test_acceptance.py
ACCEPTANCE = {}


@pytest.fixture
def criterion(request):
    """Record a pass/fail line for an acceptance criterion.

    Call ``criterion(cid, detail)`` before the asserts; the entry stays
    FAIL unless the test body finishes.
    """
    state = {}

    def register(cid, detail=""):
        state["cid"] = cid
        ACCEPTANCE[cid] = (False, detail)
        state["detail"] = detail

    def update(detail):
        state["detail"] = detail
        ACCEPTANCE[state["cid"]] = (False, detail)

    register.update = update
    yield register
    if "cid" in state:
        rep = getattr(request.node, "rep_call", None)
        ACCEPTANCE[state["cid"]] = (rep is not None and rep.passed, state["detail"])


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        item.rep_call = rep


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for cid in sorted(ACCEPTANCE, key=lambda c: int(c.split()[0])):
        passed, detail = ACCEPTANCE[cid]
        terminalreporter.write_line(f"[{'PASS' if passed else 'FAIL'}] {cid}: {detail}")
