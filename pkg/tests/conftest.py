import os
import warnings

import pytest

from fraccim.contour import SectorHypothesisWarning

# criterion number -> (passed, detail); filled by test_acceptance
ACCEPTANCE = {}


@pytest.fixture(autouse=True)
def _quiet_sector_warning():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", SectorHypothesisWarning)
        yield


@pytest.fixture
def cache_dir(tmp_path, monkeypatch):
    d = tmp_path / "cache"
    monkeypatch.setenv("CIM_CACHE_DIR", str(d))
    return d


@pytest.fixture(scope="session", autouse=True)
def session_cache(tmp_path_factory):
    """Cache directory shared by the session; honours a preset CIM_CACHE_DIR."""
    preset = os.environ.get("CIM_CACHE_DIR")
    d = preset or str(tmp_path_factory.mktemp("cim-cache"))
    os.environ["CIM_CACHE_DIR"] = d
    yield d
    if preset is None:
        del os.environ["CIM_CACHE_DIR"]


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        passed, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"criterion {key}: {'PASS' if passed else 'FAIL'}  {detail}")
