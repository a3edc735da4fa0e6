"""Shared fixtures: the showcase model, sample banks, and the acceptance
report that prints one PASS/FAIL line per criterion at the end of the run."""

import time

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

import mtdkit as mk

settings.register_profile(
    "suite",
    max_examples=40,
    deadline=None,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")


# ---------------------------------------------------------------------------
# showcase model: binary chain with relevant lags {1, 15, 30}
# ---------------------------------------------------------------------------
# The component matrices are stated to seven/eight significant digits; the
# second column of each row is taken as the exact complement of the first so
# every row sums to 1 exactly in binary floating point.

SHOWCASE_LAGS = (1, 15, 30)
SHOWCASE_LAMBDA0 = 0.01
SHOWCASE_LAMBDAS = (0.39, 0.30, 0.30)
SHOWCASE_P0 = (0.5, 0.5)
SHOWCASE_PJ = np.array([
    [[0.35190318, 1 - 0.35190318], [0.03558321, 1 - 0.03558321]],
    [[0.4278830, 1 - 0.4278830], [0.7670555, 1 - 0.7670555]],
    [[0.8341439, 1 - 0.8341439], [0.2184814, 1 - 0.2184814]],
])

# Transition probabilities of the first symbol, derived by exact decimal
# arithmetic from the convex combination of the components above.  Contexts
# are ordered oldest lag first: row i is the base-2 expansion of i as
# (x_{t-30}, x_{t-15}, x_{t-1}).
SHOWCASE_P_COL0 = (
    0.5208503102,
    0.3974855219,
    0.6226020602,
    0.4992372719,
    0.3361515602,
    0.2127867719,
    0.4379033102,
    0.3145385219,
)

# Exact oscillations of the showcase model: lambda_j times the TV gap
# between the two rows of the lag-j component matrix.
SHOWCASE_OSC = {1: 0.1233647883, 15: 0.10175175, 30: 0.18469875}


def make_showcase_model():
    return mk.build_model(
        ("0", "1"),
        SHOWCASE_LAGS,
        lambda0=SHOWCASE_LAMBDA0,
        lambdas=SHOWCASE_LAMBDAS,
        p0=SHOWCASE_P0,
        pj=SHOWCASE_PJ,
    )


@pytest.fixture(scope="session")
def showcase_model():
    return make_showcase_model()


@pytest.fixture(scope="session")
def showcase_table(showcase_model):
    return mk.transition_table(showcase_model)


@pytest.fixture(scope="session")
def showcase_sample_1k(showcase_model):
    return mk.perfect_sample(showcase_model, 1000, mk.RandomSource(11).child("unit-1k"))


@pytest.fixture(scope="session")
def showcase_sample_10k(showcase_model):
    return mk.perfect_sample(showcase_model, 10_000, mk.RandomSource(11).child("unit-10k"))


RECOVERY_BANK_INFO: dict = {}


@pytest.fixture(scope="session")
def recovery_bank(showcase_model):
    """100 stationary samples of length 10,000 with forward-selection runs.

    Shared by the lag-recovery acceptance checks, the selection invariants,
    and the EM weight-recovery check (which uses the first 50 samples).
    The wall-clock cost of building the bank lands in RECOVERY_BANK_INFO so
    the recovery runtime gate can see it no matter which test built the bank.
    """
    t0 = time.monotonic()
    bank = []
    for rep in range(100):
        sample = mk.perfect_sample(
            showcase_model, 10_000, mk.RandomSource(2024).child("recovery", rep)
        )
        fs3 = mk.fs_select(sample, 40, 3)
        fs4 = mk.fs_select(sample, 40, 4)
        bank.append({"sample": sample, "fs3": fs3, "fs4": fs4})
    RECOVERY_BANK_INFO["seconds"] = time.monotonic() - t0
    return bank


# ---------------------------------------------------------------------------
# acceptance report plumbing
# ---------------------------------------------------------------------------

ACCEPTANCE_LINES: list[tuple[int, bool, str]] = []


def record_acceptance(number: int, ok: bool, detail: str) -> None:
    ACCEPTANCE_LINES.append((number, ok, detail))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number, ok, detail in sorted(ACCEPTANCE_LINES):
        status = "PASS" if ok else "FAIL"
        terminalreporter.write_line(f"criterion {number}: {status} — {detail}")
