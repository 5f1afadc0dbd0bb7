"""CVE description sources."""

import asyncio
from pathlib import Path
from typing import Dict, Optional

import requests
import yaml
from loguru import logger

from ..core.interfaces import DescriptionSource

NVD_API = "https://services.nvd.nist.gov/rest/json/cves/2.0"


class YamlDescriptionSource(DescriptionSource):
    """Descriptions from a `cve_id: text` YAML mapping."""

    def __init__(self, path: Path):
        self.path = Path(path)
        self._descriptions: Optional[Dict[str, str]] = None

    def _load(self) -> Dict[str, str]:
        if self._descriptions is None:
            if self.path.is_file():
                with open(self.path, "r", encoding="utf-8") as f:
                    data = yaml.safe_load(f) or {}
                self._descriptions = {str(k): str(v).strip() for k, v in data.items()}
            else:
                self._descriptions = {}
        return self._descriptions

    async def describe(self, cve_id: str) -> str:
        return self._load().get(cve_id, "")


class NvdDescriptionSource(DescriptionSource):
    """English description from the NVD CVE API."""

    def __init__(self, api_key: Optional[str] = None, timeout: float = 30.0,
                 session: Optional[requests.Session] = None):
        self.timeout = timeout
        self._session = session or requests.Session()
        if api_key:
            self._session.headers["apiKey"] = api_key

    def _lookup(self, cve_id: str) -> str:
        try:
            response = self._session.get(NVD_API, params={"cveId": cve_id},
                                         timeout=self.timeout)
        except requests.exceptions.RequestException as e:
            logger.warning("{}: NVD lookup failed: {}", cve_id, e)
            return ""
        if response.status_code != 200:
            logger.warning("{}: NVD returned {}", cve_id, response.status_code)
            return ""
        for item in response.json().get("vulnerabilities", []):
            for entry in item.get("cve", {}).get("descriptions", []):
                if entry.get("lang") == "en":
                    return entry.get("value", "").strip()
        return ""

    async def describe(self, cve_id: str) -> str:
        return await asyncio.to_thread(self._lookup, cve_id)
