"""Prompt families and context selection."""

from .engine import (
    ContextSource, Phase, PromptKind, PromptTemplates, RenderedPrompt,
    render_classifier_prompt, render_for_sample, render_prompt, select_context,
)

__all__ = [
    "ContextSource", "Phase", "PromptKind", "PromptTemplates", "RenderedPrompt",
    "render_classifier_prompt", "render_for_sample", "render_prompt", "select_context",
]
