"""Shared helpers for statistical assertions against exact curves, plus the
acceptance-criteria report section printed after the run."""

import numpy as np

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def sound_grid(n: int, replicates: int, t_max: int, step: int = 25,
               min_survivors: float = 10.0) -> np.ndarray:
    """Sampled t values where a 4-sem normal test against a geometric curve
    is statistically meaningful.

    For single-bit-improvement dynamics the sample mean at time t is driven
    by per-bit survivor counts ~ Binomial(replicates, (1/2)(1-1/n)^t). Once
    the expected count for the heaviest weight drops below ~10, the error
    distribution is too heavy-tailed for z-scores (a missing top-weight
    survivor shifts the mean by orders of magnitude while sem collapses),
    so those t are excluded from the sampled grid.
    """
    t = np.arange(0, t_max + 1, step)
    lam = replicates * 0.5 * (1.0 - 1.0 / n) ** t
    return t[lam >= min_survivors]


def assert_within_4sem(mc, reference: np.ndarray, grid: np.ndarray) -> float:
    """Check |mean - reference| <= 4 sem on the grid; returns the worst z."""
    worst = 0.0
    for t in grid:
        sem = mc.sem[t]
        dev = abs(mc.mean_error[t] - reference[t])
        if sem == 0.0:
            assert dev == 0.0, f"t={t}: degenerate sample off the curve"
            continue
        worst = max(worst, dev / sem)
        assert dev <= 4.0 * sem, f"t={t}: |{mc.mean_error[t]} - {reference[t]}| > 4*{sem}"
    return worst
