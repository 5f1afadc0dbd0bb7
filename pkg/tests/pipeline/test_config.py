from dataclasses import replace
from pathlib import Path

import pytest
import yaml

from haluforge.core.errors import ConfigError
from haluforge.gateway.retry import RetryPolicy
from haluforge.pipeline.config import RunConfig, flag_overrides, load_run_config
from haluforge.prompts.engine import PromptKind
from tests.conftest import FIXTURES

EXAMPLE = FIXTURES.parent.parent / "configs" / "example.yaml"


def _write(tmp_path, data):
    path = tmp_path / "run.yaml"
    path.write_text(yaml.safe_dump(data), encoding="utf-8")
    return str(path)


def test_defaults():
    config = RunConfig()
    assert config.prompt_kind is PromptKind.CO_STAR
    assert (config.p, config.k_rounds, config.base_seed) == (0.8, 5, 0)
    assert config.retry == RetryPolicy()
    assert config.generator_specs == ()
    assert [s.name for s in replace(config, mock_mode=True).generator_specs] == ["mock-generator"]


@pytest.mark.asyncio
async def test_example_config():
    """The shipped example loads and keeps secrets out of the file."""
    config = await load_run_config(str(EXAMPLE))
    assert [s.name for s in config.backends] == ["gpt-4o", "llama3-70b"]
    assert config.backends[0].api_key_env == "OPENAI_API_KEY"
    assert config.classifier.model_id == "gemma-7b-lora-round{round}"
    assert config.embedding.name == "nomic-embed"
    assert config.descriptions == "nvd"
    assert config.train == {"epochs": 350, "lora_rank": 8}


@pytest.mark.asyncio
async def test_flags_override_file(tmp_path):
    path = _write(tmp_path, {"base_seed": 1, "selection": {"p": 0.8, "source": "code"}})
    overrides = flag_overrides(mock=True, seed=7, prompt="ro", rounds=2, p=0.5,
                               pair_lock=True, report_filter="gpt-4o")
    config = await load_run_config(path, overrides)
    assert config.mock_mode
    assert config.base_seed == 7
    assert config.prompt_kind is PromptKind.ROLE_ORIENTED
    assert (config.k_rounds, config.p, config.pair_lock) == (2, 0.5, True)
    assert config.selection_source == "code"
    assert config.report_filter == "gpt-4o"


def test_flag_overrides_only_given():
    assert flag_overrides() == {}
    assert flag_overrides(rounds=3) == {"selection": {"k_rounds": 3}}


@pytest.mark.asyncio
async def test_environment_between_file_and_flags(tmp_path, monkeypatch):
    path = _write(tmp_path, {"run_dir": "runs/file", "base_seed": 1})
    monkeypatch.setenv("HALU_RUN_DIR", str(tmp_path / "from-env"))
    monkeypatch.setenv("HALU_SELECTION__P", "0.25")
    monkeypatch.setenv("HALU_BASE_SEED", "3")
    config = await load_run_config(path, flag_overrides(seed=9))
    assert config.run_dir == tmp_path / "from-env"
    assert config.p == 0.25
    assert config.base_seed == 9



@pytest.mark.asyncio
async def test_prefixed_secret_variable_is_not_config(tmp_path, monkeypatch):
    data = yaml.safe_load(EXAMPLE.read_text(encoding="utf-8"))
    data["backends"][0]["api_key_env"] = "HALU_OPENAI_KEY"
    monkeypatch.setenv("HALU_OPENAI_KEY", "sk-test")
    monkeypatch.setenv("HALU_BASE_SEED", "4")
    config = await load_run_config(_write(tmp_path, data))
    assert config.backends[0].api_key_env == "HALU_OPENAI_KEY"
    assert config.base_seed == 4
    assert "openai_key" not in config.to_dict()

@pytest.mark.asyncio
async def test_inline_api_key_rejected(tmp_path):
    path = _write(tmp_path, {"backends": [{"name": "gpt-4o", "api_key": "sk-live"}]})
    with pytest.raises(ConfigError) as exc:
        await load_run_config(path)
    assert exc.value.details["field"] == "backends[0].api_key"


@pytest.mark.asyncio
async def test_missing_file():
    with pytest.raises(ConfigError) as exc:
        await load_run_config("/nonexistent/run.yaml")
    assert exc.value.details["field"] == "config"


@pytest.mark.parametrize("data,field_name", [
    ({"colour": "blue"}, "colour"),
    ({"prompt_kind": "cot"}, "prompt_kind"),
    ({"selection": {"p": 1.5}}, "p"),
    ({"selection": {"k_rounds": 0}}, "k_rounds"),
    ({"selection": {"mode": "random"}}, "selection_mode"),
    ({"train": {"dropout": 0.1}}, "train.dropout"),
    ({"retry": {"max_attempts": 0}}, "retry"),
    ({"backends": [{"name": "a"}, {"name": "a"}]}, "backends"),
    ({"export": "all"}, "export"),
])
def test_invalid_values(data, field_name):
    with pytest.raises(ConfigError) as exc:
        RunConfig.from_dict(data)
    assert exc.value.details["field"] == field_name


@pytest.mark.asyncio
async def test_dump_round_trip():
    config = await load_run_config(str(EXAMPLE))
    assert RunConfig.from_dict(config.to_dict()) == config
    assert yaml.safe_load(config.dump()) == config.to_dict()
    assert isinstance(config.corpus_dir, Path)
