import pytest

from haluforge.corpus.functions import FunctionSpan
from haluforge.corpus.samples import Sample, SampleKind
from haluforge.gateway.retry import RetryPolicy
from haluforge.prompts.engine import Phase, PromptKind, render_for_sample


def make_sample(cve_id, kind, body="    grow();"):
    span = FunctionSpan("src/lib.rs", "reserve", 10, 12, f"fn reserve() {{\n{body}\n}}")
    suffix = "vuln" if kind is SampleKind.VULNERABLE else "fixed"
    return Sample(f"{cve_id}:{suffix}", cve_id, "CWE-119", kind, (span,),
                  "Buffer overflow in reserve." if kind is SampleKind.VULNERABLE else "")


@pytest.fixture
def samples():
    out = {}
    for n in range(3):
        cve_id = f"CVE-2020-{1000 + n}"
        for kind in SampleKind:
            sample = make_sample(cve_id, kind, f"    grow({n});" if kind is SampleKind.VULNERABLE
                                 else f"    grow_checked({n});")
            out[sample.sample_id] = sample
    return out


@pytest.fixture
def prompts(samples):
    return [render_for_sample(s, PromptKind.CO_STAR, Phase.EVALUATION) for s in samples.values()]


@pytest.fixture
def no_wait():
    return RetryPolicy(max_attempts=3, base_delay=0.0, jitter=0.0)
