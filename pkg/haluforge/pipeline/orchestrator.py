"""Stage wiring for a run."""

import os
from typing import Any, Awaitable, Callable, Dict, List, Optional, Sequence, Tuple

from loguru import logger

from ..core.errors import (
    ConfigError, ConfigurationError, CorpusError, MissingStageInputError, PipelineError,
    StageError, ValidationError,
)
from ..core.interfaces import (
    ClassifierBackend, DescriptionSource, EmbeddingBackend, GeneratorBackend, PatchFetcher,
    PipelineOrchestrator, StageContext, StageStatus,
)
from ..core.metrics import MetricsRegistry, default_registry
from ..core.monitoring import StageMonitor
from ..corpus.census import census, format_census
from ..corpus.descriptions import NvdDescriptionSource, YamlDescriptionSource
from ..corpus.diff import parse_unified_diff
from ..corpus.fetch import FixturePatchFetcher, HttpPatchFetcher, PatchCache, fetch_all
from ..corpus.manifest import CveEntry, parse_manifest
from ..corpus.samples import Sample, build_samples
from ..evaluation.report import BackendResult, write_metrics
from ..evaluation.scoring import aggregate_rounds, breakdown, confusion, metrics
from ..finetune.export import export_training_set, write_export
from ..finetune.config import write_train_config
from ..gateway.backends import (
    MockEmbeddingBackend, MockGenerator, MockKeywordClassifier, WireClassifier,
    WireEmbeddingBackend, WireGenerator,
)
from ..gateway.runner import classify_all, generate_all, report_store
from ..gateway.types import Classification, Label, Report
from ..prompts.engine import Phase, PromptTemplates, RenderedPrompt, render_for_sample
from ..selection.diverse import SplitRound, make_rounds, make_unseen_split, pair_partners
from ..selection.partition import CwePartition, partition_unseen_cwe
from ..selection.similarity import EmbeddingStore, EmbeddingVector, embed_all
from .config import RunConfig
from .store import RunStore

STAGES = ("ingest", "extract", "prompt", "generate", "select", "export-train",
          "classify", "evaluate")
COMMANDS = STAGES + ("census", "all")

CORPUS_MANIFEST = "manifest.json"
DESCRIPTIONS_FILE = "descriptions.yaml"
SAMPLES = "samples.jsonl"
PROMPTS = "prompts.jsonl"
REPORTS = "reports.jsonl"
EMBEDDINGS = "embeddings.jsonl"
ROUNDS = "rounds.json"
CLASSIFICATIONS = "classifications.jsonl"
TRAIN_CONFIG = "train_config.json"
CENSUS = "census.json"

ClassifierFactory = Callable[[int], ClassifierBackend]


class Orchestrator(PipelineOrchestrator):
    """Runs stages in order over one corpus directory and one run directory.

    Backends, the patch fetcher and the description source are built from
    the config unless injected.
    """

    def __init__(self, config: RunConfig,
                 fetcher: Optional[PatchFetcher] = None,
                 generators: Optional[Sequence[GeneratorBackend]] = None,
                 classifier_factory: Optional[ClassifierFactory] = None,
                 embedding: Optional[EmbeddingBackend] = None,
                 descriptions: Optional[DescriptionSource] = None,
                 templates: Optional[PromptTemplates] = None,
                 metrics_registry: Optional[MetricsRegistry] = None):
        self.config = config
        self.store = RunStore(config.run_dir)
        self.corpus = RunStore(config.corpus_dir)
        self.metrics = metrics_registry or default_registry()
        self.monitor = StageMonitor(self.metrics)
        self.templates = templates or PromptTemplates()
        self._fetcher = fetcher
        self._generators = list(generators) if generators is not None else None
        self._classifier_factory = classifier_factory
        self._embedding = embedding
        self._descriptions = descriptions
        self._handlers: Dict[str, Callable[[], Awaitable[Dict[str, Any]]]] = {
            "ingest": self._ingest,
            "extract": self._extract,
            "prompt": self._prompt,
            "generate": self._generate,
            "select": self._select,
            "export-train": self._export_train,
            "classify": self._classify,
            "evaluate": self._evaluate,
            "census": self._census,
        }

    async def run(self, command: str) -> List[StageContext]:
        """Run one command; `all` runs every stage in order."""
        if command not in COMMANDS:
            raise ValidationError(f"unknown command {command!r}",
                                  details={"commands": list(COMMANDS)})
        stages = STAGES if command == "all" else (command,)
        return [await self.run_stage(stage) for stage in stages]

    async def run_stage(self, stage: str) -> StageContext:
        if stage not in self._handlers:
            raise ValidationError(f"unknown stage {stage!r}")
        self.store.check_version()
        context = StageContext(stage=stage, status=StageStatus.RUNNING)
        try:
            with self.monitor.track(stage):
                context.metadata = await self._handlers[stage]()
            context.status = StageStatus.COMPLETED
        except (PipelineError, ConfigurationError) as e:
            context.status, context.error = StageStatus.FAILED, e
            raise
        except Exception as e:
            context.status, context.error = StageStatus.FAILED, e
            raise StageError(stage, e) from e
        finally:
            self.store.record_stage(context, self.monitor.summary())
        return context

    def get_stage_status(self, stage: str) -> StageStatus:
        return self.store.stage_status(stage)

    def _require(self, store: RunStore, stage: str, key: str) -> None:
        if not store.exists(key):
            raise MissingStageInputError(stage, str(store.path(key)))

    # backends

    def fetcher(self, entries: Sequence[CveEntry]) -> PatchFetcher:
        if self._fetcher is None:
            if self.config.mock_mode:
                self._fetcher = FixturePatchFetcher.for_entries(
                    self.config.corpus_dir / "patches", entries)
            else:
                self._fetcher = HttpPatchFetcher(token=os.environ.get("GITHUB_TOKEN"))
        return self._fetcher

    def description_source(self) -> DescriptionSource:
        if self._descriptions is None:
            if self.config.descriptions == "nvd" and not self.config.mock_mode:
                self._descriptions = NvdDescriptionSource(api_key=os.environ.get("NVD_API_KEY"))
            else:
                self._descriptions = YamlDescriptionSource(
                    self.config.corpus_dir / DESCRIPTIONS_FILE)
        return self._descriptions

    def generators(self) -> List[GeneratorBackend]:
        if self._generators is None:
            specs = self.config.generator_specs
            if not specs:
                raise ConfigError("backends", "at least one generator is required")
            if self.config.mock_mode:
                self._generators = [MockGenerator(name=spec.name, seed=self.config.base_seed)
                                    for spec in specs]
            else:
                self._generators = [WireGenerator(spec) for spec in specs]
        return self._generators

    def embedding(self) -> EmbeddingBackend:
        if self._embedding is None:
            if self.config.mock_mode:
                self._embedding = MockEmbeddingBackend(seed=self.config.base_seed)
            elif self.config.embedding is None:
                raise ConfigError("embedding", "an embedding backend is required")
            else:
                self._embedding = WireEmbeddingBackend(self.config.embedding)
        return self._embedding

    def classifier(self, round_index: int) -> ClassifierBackend:
        if self._classifier_factory is not None:
            return self._classifier_factory(round_index)
        if self.config.mock_mode:
            return MockKeywordClassifier()
        spec = self.config.classifier
        if spec is None:
            raise ConfigError("classifier", "a classifier backend is required")
        model_id = spec.model_id.replace("{round}", str(round_index))
        return WireClassifier(spec, model_id=model_id, templates=self.templates)

    # artifacts

    def _entries(self, stage: str) -> List[CveEntry]:
        self._require(self.corpus, stage, CORPUS_MANIFEST)
        return [CveEntry(**row) for row in self.corpus.retrieve(CORPUS_MANIFEST)]

    def _samples(self, stage: str) -> List[Sample]:
        self._require(self.store, stage, SAMPLES)
        return [Sample.from_dict(row) for row in self.store.retrieve(SAMPLES)]

    def _prompts(self, stage: str) -> List[RenderedPrompt]:
        self._require(self.store, stage, PROMPTS)
        return [RenderedPrompt.from_dict(row) for row in self.store.retrieve(PROMPTS)]

    def _reports(self, stage: str) -> List[Report]:
        self._require(self.store, stage, REPORTS)
        return report_store(self.store.path(REPORTS)).read()

    def _rounds(self, stage: str) -> Tuple[Dict[str, Any], List[SplitRound]]:
        self._require(self.store, stage, ROUNDS)
        document = self.store.retrieve(ROUNDS)
        return document, [SplitRound.from_dict(r) for r in document["rounds"]]

    def _reports_for(self, reports: Sequence[Report], phase: Phase) -> List[Report]:
        return [r for r in reports
                if r.phase is phase and r.prompt_kind is self.config.prompt_kind]

    # stages

    async def _ingest(self) -> Dict[str, Any]:
        path = self.config.manifest_path
        if not path.is_file():
            raise MissingStageInputError("ingest", str(path))
        entries = parse_manifest(path.read_text(encoding="utf-8"))
        self.corpus.store(CORPUS_MANIFEST, [entry.to_dict() for entry in entries])

        batch = await fetch_all(entries, self.fetcher(entries), PatchCache(self.config.corpus_dir),
                                self.config.fetch_max_in_flight, self.metrics)
        for cve_id in sorted(batch.failures):
            logger.warning("{}: no patch, left out of extraction", cve_id)
        return {"entries": len(entries), "patches": len(batch.patches),
                "failures": sorted(batch.failures)}

    def _pre_sources(self, cve_id: str, paths: Sequence[str]) -> Dict[str, str]:
        root = self.config.corpus_dir / "sources" / cve_id
        sources = {}
        for path in paths:
            candidate = root / path
            if path and candidate.is_file():
                sources[path] = candidate.read_text(encoding="utf-8")
        return sources

    async def _extract(self) -> Dict[str, Any]:
        entries = self._entries("extract")
        cache = PatchCache(self.config.corpus_dir)
        source = self.description_source()
        samples: List[Sample] = []
        skipped: List[str] = []

        for entry in entries:
            body = cache.get(entry.cve_id)
            if body is None:
                skipped.append(entry.cve_id)
                continue
            try:
                patch = parse_unified_diff(body.decode("utf-8", errors="replace"), entry.cve_id)
                paths = sorted({p for f in patch.files for p in (f.path, f.old_path) if p})
                description = await source.describe(entry.cve_id)
                samples.extend(build_samples(entry, patch, self._pre_sources(entry.cve_id, paths),
                                             description))
            except CorpusError as e:
                logger.warning("{}: {}", entry.cve_id, e.message)
                skipped.append(entry.cve_id)

        if not samples:
            raise MissingStageInputError("extract", "at least one extractable patch")
        self.store.store(SAMPLES, [sample.to_dict() for sample in samples])
        return {"samples": len(samples), "skipped": skipped}

    async def _prompt(self) -> Dict[str, Any]:
        samples = self._samples("prompt")
        prompts = [render_for_sample(sample, self.config.prompt_kind, phase, self.templates)
                   for phase in (Phase.TRAINING, Phase.EVALUATION)
                   for sample in samples]
        self.store.store(PROMPTS, [prompt.to_dict() for prompt in prompts])
        return {"prompts": len(prompts), "kind": self.config.prompt_kind.value}

    async def _generate(self) -> Dict[str, Any]:
        prompts = self._prompts("generate")
        samples = {s.sample_id: s for s in self._samples("generate")}
        store = report_store(self.store.path(REPORTS))
        existing = {r.report_id: r for r in store.read()}
        failures: Dict[str, Exception] = {}
        created = 0

        for backend in self.generators():
            pending = [p for p in prompts
                       if Report.make_id(p.sample_id, backend.name, p.kind, p.phase) not in existing]
            if not pending:
                continue
            batch = await generate_all(backend, pending, samples, self.config.max_in_flight,
                                       self.config.retry, self.metrics)
            store.append(batch.items)
            existing.update((r.report_id, r) for r in batch.items)
            created += len(batch.items)
            failures.update({f"{backend.name}|{key}": e for key, e in batch.failures.items()})

        ordered = [existing[key] for key in (
            Report.make_id(p.sample_id, backend.name, p.kind, p.phase)
            for backend in self.generators() for p in prompts) if key in existing]
        store.rewrite(ordered)
        if failures:
            first = next(iter(failures.values()))
            raise StageError("generate", first)
        return {"reports": len(ordered), "created": created}

    def _selection_texts(self, samples: Sequence[Sample],
                         reports: Sequence[Report]) -> List[Tuple[str, str]]:
        if self.config.selection_source == "code":
            return [(s.sample_id, s.text) for s in samples]
        backend = self.generators()[0].name
        by_sample = {r.sample_id: r.text for r in self._reports_for(reports, Phase.TRAINING)
                     if r.backend_name == backend}
        missing = [s.sample_id for s in samples if s.sample_id not in by_sample]
        if missing:
            raise MissingStageInputError("select", f"{backend} training report for {missing[0]}")
        return [(s.sample_id, by_sample[s.sample_id]) for s in samples]

    async def _embeddings(self, items: Sequence[Tuple[str, str]]) -> Dict[str, EmbeddingVector]:
        store = EmbeddingStore(self.store.path(EMBEDDINGS))
        cached = store.read() if store.exists() else {}
        pending = [(i, t) for i, t in items if i not in cached]
        if pending:
            cached.update(await embed_all(self.embedding(), pending, self.config.max_in_flight,
                                          self.config.retry, self.metrics))
        vectors = {i: cached[i] for i, _ in items}
        store.write(vectors.values())
        return vectors

    async def _select(self) -> Dict[str, Any]:
        samples = self._samples("select")
        entries = self._entries("select")
        ids = [s.sample_id for s in samples]
        partition = partition_unseen_cwe(entries)

        if self.config.selection_mode == "unseen_cwe":
            cwe_map = {s.sample_id: s.cwe_id for s in samples}
            rounds = [make_unseen_split(ids, cwe_map, partition, self.config.base_seed)]
        else:
            reports = self._reports("select") if self.config.selection_source == "report" else []
            vectors = await self._embeddings(self._selection_texts(samples, reports))
            partner = pair_partners(ids) if self.config.pair_lock else None
            rounds = make_rounds(ids, vectors, self.config.k_rounds, self.config.p,
                                 self.config.base_seed, partner)

        self.store.store(ROUNDS, {
            "mode": self.config.selection_mode,
            "source": self.config.selection_source,
            "p": self.config.p,
            "base_seed": self.config.base_seed,
            "pair_lock": self.config.pair_lock,
            "partition": partition.to_dict(),
            "rounds": [r.to_dict() for r in rounds],
        })
        return {"rounds": len(rounds), "selected": len(rounds[0].selected_ids),
                "held_out": len(rounds[0].held_out_ids)}

    async def _export_train(self) -> Dict[str, Any]:
        document, rounds = self._rounds("export-train")
        samples = {s.sample_id: s for s in self._samples("export-train")}
        reports: List[Report] = []
        if self.config.export_input_source == "report":
            reports = self._reports("export-train")

        counts = []
        for split in rounds:
            export = export_training_set(
                self._reports_for(reports, Phase.TRAINING), split, samples,
                report_filter=self.config.report_filter,
                input_source=self.config.export_input_source,
                eval_reports=self._reports_for(reports, Phase.EVALUATION),
            )
            write_export(export, self.store.path(f"rounds/round_{split.round_index}"), {
                "mode": document["mode"],
                "prompt_kind": self.config.prompt_kind.value,
                "report_filter": self.config.report_filter,
                "input_source": self.config.export_input_source,
            })
            counts.append(len(export.train))
        write_train_config(self.store.path(TRAIN_CONFIG), self.config.train)
        return {"rounds": len(rounds), "train_records": counts}

    async def _classify(self) -> Dict[str, Any]:
        _, rounds = self._rounds("classify")
        evaluation = self._reports_for(self._reports("classify"), Phase.EVALUATION)
        names = [g.name for g in self.generators()]
        previous = self.store.retrieve(CLASSIFICATIONS) if self.store.exists(CLASSIFICATIONS) else []
        done = {(row["round_index"], row["generator"], row["classification"]["sample_id"]): row
                for row in previous}
        failures: Dict[str, Exception] = {}

        for split in rounds:
            held_out = set(split.held_out_ids)
            classifier = None
            for name in names:
                pending = [r for r in evaluation if r.backend_name == name
                           and r.sample_id in held_out
                           and (split.round_index, name, r.sample_id) not in done]
                if not pending:
                    continue
                classifier = classifier or self.classifier(split.round_index)
                batch = await classify_all(classifier, pending, self.config.max_in_flight,
                                           self.config.retry, self.metrics)
                for item in batch.items:
                    done[(split.round_index, name, item.sample_id)] = {
                        "round_index": split.round_index,
                        "generator": name,
                        "classification": item.to_dict(),
                    }
                failures.update({f"{split.round_index}|{key}": e
                                 for key, e in batch.failures.items()})

        order = {name: index for index, name in enumerate(names)}
        rows = sorted(done.values(), key=lambda row: (
            row["round_index"], order.get(row["generator"], len(order)), row["generator"],
            row["classification"]["sample_id"]))
        self.store.store(CLASSIFICATIONS, rows)
        if failures:
            raise StageError("classify", next(iter(failures.values())))
        return {"classifications": len(rows)}

    async def _evaluate(self) -> Dict[str, Any]:
        document, rounds = self._rounds("evaluate")
        self._require(self.store, "evaluate", CLASSIFICATIONS)
        samples = self._samples("evaluate")
        truth = {s.sample_id: Label.for_kind(s.kind) for s in samples}
        cwe_map = {s.sample_id: s.cwe_id for s in samples}
        partition = CwePartition(
            seen_cwes=frozenset(document["partition"]["seen_cwes"]),
            unseen_cwes=frozenset(document["partition"]["unseen_cwes"]),
        )

        skipped = [s.round_index for s in rounds if not s.held_out_ids]
        for round_index in skipped:
            logger.warning("round {}: no held-out samples, not evaluated", round_index)
        evaluable = [s for s in rounds if s.held_out_ids]
        if not evaluable:
            return {"backends": [], "skipped_rounds": skipped}

        grouped: Dict[str, Dict[int, List[Classification]]] = {}
        for row in self.store.retrieve(CLASSIFICATIONS):
            grouped.setdefault(row["generator"], {}).setdefault(row["round_index"], []).append(
                Classification.from_dict(row["classification"]))

        results = []
        for name in sorted(grouped):
            result = BackendResult(backend=name, prompt_kind=self.config.prompt_kind.value)
            for split in evaluable:
                items = grouped[name].get(split.round_index, [])
                result.rounds.append(metrics(confusion(items, truth)))
                result.breakdowns.append(breakdown(items, truth, cwe_map, partition))
            result.aggregate = aggregate_rounds(result.rounds)
            results.append(result)
        if not results:
            raise MissingStageInputError("evaluate", "classifications for any generator")

        write_metrics(self.config.run_dir, results, document["mode"])
        return {"backends": [r.backend for r in results], "skipped_rounds": skipped}

    async def _census(self) -> Dict[str, Any]:
        path = self.config.manifest_path
        if not path.is_file():
            raise MissingStageInputError("census", str(path))
        entries = parse_manifest(path.read_text(encoding="utf-8"))
        samples = ([Sample.from_dict(row) for row in self.store.retrieve(SAMPLES)]
                   if self.store.exists(SAMPLES) else [])
        stats = census(samples, entries)
        self.store.store(CENSUS, stats.to_dict())
        return {"table": format_census(stats)}
