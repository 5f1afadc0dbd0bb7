import pytest
import requests

from haluforge.core.errors import EmptyPatchError, FetchFailedError
from haluforge.core.metrics import default_registry
from haluforge.corpus.fetch import (
    FixturePatchFetcher, HttpPatchFetcher, PatchCache, fetch_all, fetch_patch, patch_url,
)
from tests.conftest import FIXTURES, VECDEQUE_CVE


class FakeResponse:
    def __init__(self, status_code=200, content=b""):
        self.status_code = status_code
        self.content = content


class FakeSession:
    def __init__(self, responses=None, error=None):
        self.headers = {}
        self.responses = responses or {}
        self.error = error
        self.requested = []

    def get(self, url, timeout=None):
        self.requested.append(url)
        if self.error:
            raise self.error
        return self.responses.get(url, FakeResponse(404))


@pytest.mark.parametrize("url,expected", [
    ("https://github.com/rust-lang/rust/commit/f71b37bc",
     "https://github.com/rust-lang/rust/commit/f71b37bc.patch"),
    ("https://github.com/a/b/pull/51/commits/33fcd548/",
     "https://github.com/a/b/pull/51/commits/33fcd548.patch"),
    ("https://github.com/a/b/commit/abc123.patch", "https://github.com/a/b/commit/abc123.patch"),
    ("https://example.com/fix.diff", "https://example.com/fix.diff"),
])
def test_patch_url(url, expected):
    assert patch_url(url) == expected


async def test_http_fetcher_uses_patch_suffix_and_token():
    target = "https://github.com/a/b/commit/abc123.patch"
    session = FakeSession({target: FakeResponse(200, b"diff")})
    fetcher = HttpPatchFetcher(session=session, token="t0ken")
    response = await fetcher.fetch("https://github.com/a/b/commit/abc123")
    assert response.status == 200 and response.body == b"diff"
    assert session.requested == [target]
    assert session.headers["Authorization"] == "token t0ken"
    assert session.headers["User-Agent"] == "halu-forge"


async def test_http_fetcher_connection_error():
    fetcher = HttpPatchFetcher(session=FakeSession(error=requests.exceptions.ConnectionError("down")))
    with pytest.raises(FetchFailedError):
        await fetcher.fetch("https://example.com/x.patch")


async def test_fixture_fetcher_and_cache(tmp_path, vecdeque_entry):
    fetcher = FixturePatchFetcher.for_entries(FIXTURES / "patches", [vecdeque_entry])
    cache = PatchCache(tmp_path)
    metrics = default_registry()

    first = await fetch_patch(vecdeque_entry, fetcher, cache, metrics)
    second = await fetch_patch(vecdeque_entry, fetcher, cache, metrics)
    assert first == second
    assert "+        if new_cap > old_cap {" in first
    assert fetcher.calls == 1
    assert cache.path_for(VECDEQUE_CVE).is_file()
    assert metrics.get_metric("patch_fetches").total() == 1
    assert metrics.get_metric("patch_cache_hits").total() == 1


async def test_missing_fixture_is_404(tmp_path, vecdeque_entry):
    fetcher = FixturePatchFetcher(tmp_path)
    with pytest.raises(FetchFailedError) as exc:
        await fetch_patch(vecdeque_entry, fetcher)
    assert exc.value.details["status"] == 404


async def test_empty_body(tmp_path, vecdeque_entry):
    (tmp_path / f"{VECDEQUE_CVE}.patch").write_bytes(b"  \n")
    fetcher = FixturePatchFetcher.for_entries(tmp_path, [vecdeque_entry])
    with pytest.raises(EmptyPatchError):
        await fetch_patch(vecdeque_entry, fetcher)


async def test_fetch_all_collects_failures(tmp_path, vecdeque_entry):
    from haluforge.corpus.manifest import CveEntry
    missing = CveEntry("CVE-2099-0001", "CWE-416", "nothing", "", "https://example.com/none")
    fetcher = FixturePatchFetcher.for_entries(FIXTURES / "patches", [vecdeque_entry])
    batch = await fetch_all([vecdeque_entry, missing], fetcher, PatchCache(tmp_path), max_in_flight=1)
    assert list(batch.patches) == [VECDEQUE_CVE]
    assert isinstance(batch.failures["CVE-2099-0001"], FetchFailedError)
