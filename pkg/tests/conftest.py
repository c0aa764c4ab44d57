import pytest


def pytest_addoption(parser):
    parser.addoption("--run-release", action="store_true", default=False,
                     help="run full-profile release-gate studies (takes hours)")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--run-release"):
        return
    skip = pytest.mark.skip(reason="release gate; enable with --run-release")
    for item in items:
        if "release" in item.keywords:
            item.add_marker(skip)
