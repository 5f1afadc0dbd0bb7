"""Patch retrieval and the on-disk patch cache."""

import asyncio
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, Mapping, Optional, Sequence

import requests
from loguru import logger

from ..core.errors import EmptyPatchError, FetchFailedError
from ..core.interfaces import FetchResponse, PatchFetcher
from ..core.metrics import MetricsRegistry
from .manifest import CveEntry

GITHUB_COMMIT = re.compile(r"^https?://github\.com/[^/]+/[^/]+/(?:pull/\d+/)?commits?/[0-9a-fA-F]+/?$")


def patch_url(url: str) -> str:
    """GitHub commit URLs get the `.patch` suffix that serves raw diffs."""
    if GITHUB_COMMIT.match(url) and not url.endswith(".patch"):
        return url.rstrip("/") + ".patch"
    return url


class HttpPatchFetcher(PatchFetcher):
    """Fetches patches over HTTP with a shared requests session."""

    def __init__(self, timeout: float = 30.0, session: Optional[requests.Session] = None,
                 token: Optional[str] = None):
        self.timeout = timeout
        self._session = session or requests.Session()
        self._session.headers.setdefault("User-Agent", "halu-forge")
        if token:
            self._session.headers["Authorization"] = f"token {token}"

    def _get(self, url: str) -> FetchResponse:
        target = patch_url(url)
        try:
            response = self._session.get(target, timeout=self.timeout)
        except requests.exceptions.RequestException as e:
            raise FetchFailedError(target, None, str(e)) from e
        return FetchResponse(status=response.status_code, body=response.content, url=target)

    async def fetch(self, url: str) -> FetchResponse:
        return await asyncio.to_thread(self._get, url)


class FixturePatchFetcher(PatchFetcher):
    """Serves patch files from a directory, never touching the network.

    A URL resolves to `<directory>/<cve_id>.patch` through `url_to_cve`, or
    to the file named like the URL's last path segment.
    """

    def __init__(self, directory: Path, url_to_cve: Optional[Mapping[str, str]] = None):
        self.directory = Path(directory)
        self.url_to_cve = dict(url_to_cve or {})
        self.calls = 0

    @classmethod
    def for_entries(cls, directory: Path, entries: Iterable[CveEntry]) -> "FixturePatchFetcher":
        return cls(directory, {entry.patch_url: entry.cve_id for entry in entries})

    async def fetch(self, url: str) -> FetchResponse:
        self.calls += 1
        candidates = []
        if url in self.url_to_cve:
            candidates.append(self.directory / f"{self.url_to_cve[url]}.patch")
        tail = url.rstrip("/").rsplit("/", 1)[-1]
        candidates.extend([self.directory / tail, self.directory / f"{tail}.patch"])
        for path in candidates:
            if path.is_file():
                return FetchResponse(status=200, body=path.read_bytes(), url=url)
        return FetchResponse(status=404, body=b"", url=url)


class PatchCache:
    """One raw patch file per CVE under `<corpus_dir>/patches/`."""

    def __init__(self, corpus_dir: Path):
        self.root = Path(corpus_dir) / "patches"

    def path_for(self, cve_id: str) -> Path:
        return self.root / f"{cve_id}.patch"

    def get(self, cve_id: str) -> Optional[bytes]:
        path = self.path_for(cve_id)
        return path.read_bytes() if path.is_file() else None

    def put(self, cve_id: str, body: bytes) -> None:
        self.root.mkdir(parents=True, exist_ok=True)
        self.path_for(cve_id).write_bytes(body)


def _decode(body: bytes) -> str:
    return body.decode("utf-8", errors="replace")


async def fetch_patch(entry: CveEntry, fetcher: PatchFetcher,
                      cache: Optional[PatchCache] = None,
                      metrics: Optional[MetricsRegistry] = None) -> str:
    """Patch text of an entry, served from the cache when warm.

    Raises:
        FetchFailedError: non-2xx status
        EmptyPatchError: empty body
    """
    if cache is not None:
        cached = cache.get(entry.cve_id)
        if cached is not None:
            if metrics:
                metrics.increment("patch_cache_hits")
            return _decode(cached)

    if metrics:
        metrics.increment("patch_fetches")
    response = await fetcher.fetch(entry.patch_url)
    if not 200 <= response.status < 300:
        raise FetchFailedError(response.url or entry.patch_url, response.status)
    if not response.body.strip():
        raise EmptyPatchError(response.url or entry.patch_url)

    if cache is not None:
        cache.put(entry.cve_id, response.body)
    logger.debug("{}: fetched {} bytes", entry.cve_id, len(response.body))
    return _decode(response.body)


@dataclass
class FetchBatch:
    """Patches fetched in a batch, with the entries that failed."""
    patches: Dict[str, str] = field(default_factory=dict)
    failures: Dict[str, Exception] = field(default_factory=dict)


async def fetch_all(entries: Sequence[CveEntry], fetcher: PatchFetcher,
                    cache: Optional[PatchCache] = None, max_in_flight: int = 4,
                    metrics: Optional[MetricsRegistry] = None) -> FetchBatch:
    """Fetch every entry's patch with at most `max_in_flight` requests open."""
    semaphore = asyncio.Semaphore(max(1, max_in_flight))

    async def one(entry: CveEntry):
        async with semaphore:
            try:
                return entry.cve_id, await fetch_patch(entry, fetcher, cache, metrics), None
            except (FetchFailedError, EmptyPatchError) as e:
                logger.warning("{}: {}", entry.cve_id, e.message)
                return entry.cve_id, None, e

    batch = FetchBatch()
    for cve_id, text, error in await asyncio.gather(*(one(e) for e in entries)):
        if error is not None:
            batch.failures[cve_id] = error
        else:
            batch.patches[cve_id] = text
    return batch
