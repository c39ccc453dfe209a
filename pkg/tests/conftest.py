import os

import pytest


@pytest.fixture(scope="session", autouse=True)
def isolated_reference_cache(tmp_path_factory):
    """Point the on-disk reference cache at a session-scoped temp dir.

    Keeps test runs from reading or polluting the user's real cache and
    makes the acceptance timing an honest cold-cache measurement.
    """
    path = tmp_path_factory.mktemp("reference-cache")
    old = os.environ.get("PRVA_CACHE_DIR")
    os.environ["PRVA_CACHE_DIR"] = str(path)
    yield str(path)
    if old is None:
        os.environ.pop("PRVA_CACHE_DIR", None)
    else:
        os.environ["PRVA_CACHE_DIR"] = old
