import pytest
from haluforge.core.config.provider import YAMLConfigProvider, deep_merge, env_layer
from haluforge.core.errors import ConfigurationError, InvalidConfigError


@pytest.fixture
def config_file(tmp_path):
    """Create a temporary config file."""
    path = tmp_path / "run.yaml"
    path.write_text(
        "run_dir: runs/default\n"
        "selection:\n"
        "  p: 0.8\n"
        "  k_rounds: 5\n"
        "backends:\n"
        "  - name: gpt-4o\n"
    )
    return str(path)


@pytest.fixture
def overlay_file(tmp_path):
    """Create a temporary overlay file."""
    path = tmp_path / "overlay.yaml"
    path.write_text("selection:\n  k_rounds: 2\nmock_mode: true\n")
    return str(path)


@pytest.mark.asyncio
async def test_basic_config_loading(config_file):
    """Test basic configuration loading."""
    provider = YAMLConfigProvider(config_file)
    await provider.initialize({})

    assert await provider.get("run_dir") == "runs/default"
    assert await provider.get("selection.p") == 0.8
    assert await provider.get("backends") == [{"name": "gpt-4o"}]


@pytest.mark.asyncio
async def test_overlay_loading(config_file, overlay_file):
    """Overlay values win, untouched keys survive."""
    provider = YAMLConfigProvider(config_file, overlay_path=overlay_file)
    await provider.initialize({})

    assert await provider.get("selection.k_rounds") == 2
    assert await provider.get("selection.p") == 0.8
    assert await provider.get("mock_mode") is True


@pytest.mark.asyncio
async def test_environment_override(config_file, monkeypatch):
    """Test environment variable overrides."""
    monkeypatch.setenv("HALU_RUN_DIR", "/tmp/elsewhere")
    monkeypatch.setenv("HALU_SELECTION__P", "0.5")
    monkeypatch.setenv("HALU_NEW__STRING", "text")

    provider = YAMLConfigProvider(config_file)
    await provider.initialize({})

    assert await provider.get("run_dir") == "/tmp/elsewhere"
    assert await provider.get("selection.p") == 0.5
    assert await provider.get("new.string") == "text"


@pytest.mark.asyncio
async def test_runtime_values_override_environment(config_file, monkeypatch):
    monkeypatch.setenv("HALU_BASE_SEED", "3")
    provider = YAMLConfigProvider(config_file)
    await provider.initialize({"base_seed": 7, "selection": {"k_rounds": 1}})

    assert await provider.get("base_seed") == 7
    assert await provider.get("selection.k_rounds") == 1
    assert await provider.get("selection.p") == 0.8


@pytest.mark.asyncio
async def test_config_namespace(config_file):
    """Test getting configuration namespace."""
    provider = YAMLConfigProvider(config_file)
    await provider.initialize({})

    selection = await provider.get_namespace("selection")
    assert selection == {"selection.p": 0.8, "selection.k_rounds": 5}


@pytest.mark.asyncio
async def test_config_modification(config_file):
    """Test configuration modification."""
    provider = YAMLConfigProvider(config_file)
    await provider.initialize({})

    await provider.set("selection.pair_lock", True)
    assert await provider.get("selection.pair_lock") is True

    await provider.set("new.key", "value")
    assert await provider.get("new.key") == "value"
    assert await provider.has("new.key")
    assert not await provider.has("missing.key")


@pytest.mark.asyncio
async def test_error_handling(tmp_path):
    """Test error handling."""
    provider = YAMLConfigProvider(str(tmp_path / "nonexistent.yaml"))
    with pytest.raises(ConfigurationError):
        await provider.initialize({})

    bad = tmp_path / "bad.yaml"
    bad.write_text("invalid: yaml: :")
    provider = YAMLConfigProvider(str(bad))
    with pytest.raises(ConfigurationError):
        await provider.initialize({})

    with pytest.raises(ConfigurationError):
        await YAMLConfigProvider().get("run_dir")


@pytest.mark.asyncio
async def test_type_conversion(config_file, monkeypatch):
    """Test environment variable type conversion."""
    monkeypatch.setenv("HALU_APP__INT", "42")
    monkeypatch.setenv("HALU_APP__FLOAT", "42.5")
    monkeypatch.setenv("HALU_APP__BOOL", "true")
    monkeypatch.setenv("HALU_APP__LIST", "[1, 2, 3]")

    provider = YAMLConfigProvider(config_file)
    await provider.initialize({})

    assert isinstance(await provider.get("app.int"), int)
    assert isinstance(await provider.get("app.float"), float)
    assert isinstance(await provider.get("app.bool"), bool)
    assert isinstance(await provider.get("app.list"), list)


@pytest.mark.asyncio
async def test_layers_recorded(config_file, overlay_file, monkeypatch):
    monkeypatch.setenv("HALU_BASE_SEED", "1")
    provider = YAMLConfigProvider(config_file, overlay_path=overlay_file)
    await provider.initialize({"mock_mode": False})

    assert provider.layers == [config_file, overlay_file, "environment", "overrides"]
    assert await provider.get("mock_mode") is False


@pytest.mark.asyncio
async def test_overrides_not_mutated(config_file):
    overrides = {"selection": {"k_rounds": 1}}
    provider = YAMLConfigProvider(config_file)
    await provider.initialize(overrides)
    await provider.set("selection.k_rounds", 9)

    assert overrides == {"selection": {"k_rounds": 1}}


@pytest.mark.asyncio
async def test_empty_and_non_mapping_files(tmp_path):
    empty = tmp_path / "empty.yaml"
    empty.write_text("")
    provider = YAMLConfigProvider(str(empty))
    await provider.initialize()
    assert await provider.get("run_dir", "runs/default") == "runs/default"

    listing = tmp_path / "list.yaml"
    listing.write_text("- a\n- b\n")
    with pytest.raises(ConfigurationError):
        await YAMLConfigProvider(str(listing)).initialize()


@pytest.mark.asyncio
async def test_set_rejects_blank_segments(config_file):
    provider = YAMLConfigProvider(config_file)
    await provider.initialize()
    with pytest.raises(InvalidConfigError):
        await provider.set("selection..p", 0.1)


def test_env_layer():
    environ = {
        "HALU_SELECTION__P": "0.25",
        "HALU_RUN_DIR": "runs/x",
        "HALU_NOTE": "a: b: c",
        "HALU_": "ignored",
        "OTHER_P": "1",
    }
    assert env_layer(environ, "HALU_") == {
        "selection": {"p": 0.25},
        "run_dir": "runs/x",
        "note": "a: b: c",
    }


def test_env_layer_known_keys_only():
    environ = {"HALU_SELECTION__P": "0.25", "HALU_OPENAI_KEY": "sk-test"}
    assert env_layer(environ, "HALU_", keys=("selection", "run_dir")) == {"selection": {"p": 0.25}}


@pytest.mark.asyncio
async def test_provider_env_keys(config_file, monkeypatch):
    monkeypatch.setenv("HALU_OPENAI_KEY", "sk-test")
    monkeypatch.setenv("HALU_SELECTION__P", "0.25")
    provider = YAMLConfigProvider(config_file, env_keys=("selection",))
    await provider.initialize()
    assert await provider.get("selection.p") == 0.25
    assert not await provider.has("openai_key")


def test_deep_merge():
    base = {"selection": {"p": 0.8, "k_rounds": 5}, "backends": [{"name": "a"}]}
    deep_merge(base, {"selection": {"p": 0.5}, "backends": [{"name": "b"}]})
    assert base == {"selection": {"p": 0.5, "k_rounds": 5}, "backends": [{"name": "b"}]}
