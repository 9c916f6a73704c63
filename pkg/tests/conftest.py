import os
import time
import warnings

import pytest

from pcmrcs import geometry as geo
from pcmrcs.cache import SpectrumCache
from pcmrcs.solver import SolverConfig, config_hash, run_reference, run_unit_cell

FAST = SolverConfig(resolution=0.1, n_freq=41)
DEFAULT = SolverConfig()


@pytest.fixture(scope="session")
def spectrum_cache(request):
    """Solved spectra persisted between test sessions (set PCMRCS_TEST_NOCACHE=1 to bypass)."""
    if os.environ.get("PCMRCS_TEST_NOCACHE") == "1":
        return None
    return SpectrumCache(request.config.cache.mkdir("pcmrcs-spectra"))


class Solves:
    """Memoised solver runs shared across the session; one calibration per config."""

    def __init__(self, cache):
        self.cache = cache
        self.mem = {}
        self.cal = {}

    def __call__(self, cell, cfg, mask=None, tag=None):
        key = config_hash(cell, cfg, extra=tag)
        if key in self.mem:
            return self.mem[key]
        spec = self.cache.get(key) if self.cache is not None else None
        if spec is None:
            cal_key = config_hash(geo.paper_cell(), cfg, extra={"cal": cell.stack.h})
            if cal_key not in self.cal:
                t = time.perf_counter()
                self.cal[cal_key] = (run_reference(cell.stack, cfg), time.perf_counter() - t)
            cal, cal_s = self.cal[cal_key]
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                spec = run_unit_cell(cell, cfg, calibration=cal, mask=mask)
            spec.meta["calibration_s"] = cal_s
            if self.cache is not None:
                self.cache.put(key, spec)
        self.mem[key] = spec
        return spec


@pytest.fixture(scope="session")
def solve(spectrum_cache):
    return Solves(spectrum_cache)


@pytest.fixture(scope="session")
def paper():
    return geo.paper_cell()


@pytest.fixture(scope="session")
def paper_lossless(paper):
    return paper.with_params(stack=paper.stack.lossless())


# one PASS/FAIL line per acceptance criterion, repeated in the terminal summary
ACCEPTANCE_LINES = []


@pytest.fixture
def report():
    def _report(number, title, ok, detail):
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:2d} {title}: {detail}"
        ACCEPTANCE_LINES.append((number, line))
        print(line)
        return ok

    return _report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance")
        for _, line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
