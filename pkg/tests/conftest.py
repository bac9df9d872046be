import pytest


def pytest_addoption(parser):
    parser.addoption("--oracle-n7", action="store_true", default=False,
                     help="also run the n=7 brute-force oracle (135135 pairings)")


def pytest_configure(config):
    config.addinivalue_line("markers", "oracle_n7: the n=7 exhaustive oracle, enabled by --oracle-n7")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--oracle-n7"):
        return
    skip = pytest.mark.skip(reason="needs --oracle-n7")
    for item in items:
        if "oracle_n7" in item.keywords:
            item.add_marker(skip)
