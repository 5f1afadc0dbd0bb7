"""Layered YAML configuration for HaluForge runs."""

import copy
import os
from pathlib import Path
from typing import Any, Collection, Dict, Iterator, List, Mapping, Optional, Sequence, Tuple

import yaml
from loguru import logger

from ..errors import ConfigurationError, InvalidConfigError
from ..interfaces import ConfigurationProvider

Layer = Tuple[str, Dict[str, Any]]


def deep_merge(base: Dict[str, Any], override: Mapping[str, Any]) -> None:
    """Merge `override` into `base`; nested mappings merge, anything else replaces."""
    for key, value in override.items():
        if isinstance(base.get(key), dict) and isinstance(value, Mapping):
            deep_merge(base[key], value)
        else:
            base[key] = value


def _assign(tree: Dict[str, Any], parts: Sequence[str], value: Any) -> None:
    for part in parts[:-1]:
        child = tree.get(part)
        if not isinstance(child, dict):
            child = tree[part] = {}
        tree = child
    tree[parts[-1]] = value


def _walk(tree: Mapping[str, Any], prefix: str = "") -> Iterator[Tuple[str, Any]]:
    for key, value in tree.items():
        dotted = f"{prefix}.{key}" if prefix else str(key)
        if isinstance(value, Mapping):
            yield from _walk(value, dotted)
        else:
            yield dotted, value


def env_layer(environ: Mapping[str, str], prefix: str,
              keys: Optional[Collection[str]] = None) -> Dict[str, Any]:
    """Nested overrides from `<prefix>A__B=value` variables.

    Values are YAML-typed (`0.5` is a float, `true` a bool); text YAML cannot
    parse stays a string. With `keys`, variables whose top-level segment is
    not one of them are left alone.
    """
    layer: Dict[str, Any] = {}
    for name in sorted(environ):
        if not name.startswith(prefix) or len(name) == len(prefix):
            continue
        parts = name[len(prefix):].lower().split("__")
        if keys is not None and parts[0] not in keys:
            logger.debug("{}: not a configuration key, ignored", name)
            continue
        raw = environ[name]
        try:
            value = yaml.safe_load(raw)
        except yaml.YAMLError:
            value = raw
        _assign(layer, parts, value)
    return layer


class YAMLConfigProvider(ConfigurationProvider):
    """Run configuration assembled from layers, lowest precedence first.

    The layers are the run file, an optional overlay file, `HALU_`
    environment variables and the mapping handed to `initialize` (the
    command-line flags). `layers` names the ones that contributed. With
    `env_keys`, only variables naming one of those top-level keys count.
    """

    def __init__(
        self,
        config_path: Optional[str] = None,
        env_prefix: str = "HALU_",
        overlay_path: Optional[str] = None,
        env_keys: Optional[Collection[str]] = None
    ):
        self._path = Path(config_path) if config_path else None
        self._overlay = Path(overlay_path) if overlay_path else None
        self._prefix = env_prefix
        self._env_keys = env_keys
        self._config: Optional[Dict[str, Any]] = None
        self.layers: List[str] = []

    async def load(self, source: str) -> Dict[str, Any]:
        """Read one YAML document; an empty file is an empty mapping.

        Raises:
            ConfigurationError: unreadable file, bad YAML or a non-mapping document
        """
        path = Path(source)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as e:
            raise ConfigurationError(f"Cannot read configuration {path}: {e}") from e
        try:
            data = yaml.safe_load(text)
        except yaml.YAMLError as e:
            raise ConfigurationError(f"Malformed YAML in {path}: {e}") from e
        if data is None:
            return {}
        if not isinstance(data, dict):
            raise ConfigurationError(f"{path}: top level must be a mapping")
        return data

    async def _collect(self, overrides: Optional[Mapping[str, Any]]) -> List[Layer]:
        layers: List[Layer] = []
        if self._path is not None:
            layers.append((str(self._path), await self.load(str(self._path))))
        if self._overlay is not None and self._overlay.is_file():
            layers.append((str(self._overlay), await self.load(str(self._overlay))))
        environment = env_layer(os.environ, self._prefix, self._env_keys)
        if environment:
            layers.append(("environment", environment))
        if overrides:
            layers.append(("overrides", dict(overrides)))
        return layers

    async def initialize(self, config: Optional[Dict[str, Any]] = None) -> None:
        layers = await self._collect(config)
        merged: Dict[str, Any] = {}
        for _, layer in layers:
            deep_merge(merged, copy.deepcopy(layer))
        self._config = merged
        self.layers = [name for name, _ in layers]
        logger.debug("configuration layers: {}", ", ".join(self.layers) or "none")

    def _tree(self) -> Dict[str, Any]:
        if self._config is None:
            raise ConfigurationError("Configuration not initialized")
        return self._config

    def _lookup(self, key: str) -> Any:
        node: Any = self._tree()
        for part in key.split("."):
            if not isinstance(node, dict) or part not in node:
                raise KeyError(key)
            node = node[part]
        return node

    async def get(self, key: str, default: Any = None) -> Any:
        """Dotted lookup; missing and null values give `default`."""
        try:
            value = self._lookup(key)
        except KeyError:
            return default
        return default if value is None else value

    async def set(self, key: str, value: Any) -> None:
        tree = self._tree()
        parts = key.split(".")
        if not all(parts):
            raise InvalidConfigError(f"Invalid configuration key {key!r}")
        _assign(tree, parts, value)

    async def has(self, key: str) -> bool:
        try:
            return self._lookup(key) is not None
        except (KeyError, ConfigurationError):
            return False

    async def get_namespace(self, namespace: str) -> Dict[str, Any]:
        """Flattened `namespace.*` leaves keyed by their dotted path."""
        return {key: value for key, value in _walk(self._tree())
                if key == namespace or key.startswith(namespace + ".")}
