"""Translation guide, prompt assembly, completion providers and response extraction."""

from .guide import (TIERS, TITLES, Guide, GuideCategory, GuideEntry, default_guide, load_guide, parse_guide,
                    render_guide)
from .prompt import (HEADERS, SEGMENTS, Example, PromptBundle, PromptComponents, TargetTask, assemble_prompt,
                     load_components, select_examples)
from .providers import (Completion, ModelConfig, Provider, extract_spec_block, fenced, load_registry, load_schedule,
                        make_provider, mutate_spec, resolve_model)

__all__ = [
    "Completion", "Example", "Guide", "GuideCategory", "GuideEntry", "HEADERS", "ModelConfig", "PromptBundle",
    "PromptComponents", "Provider", "SEGMENTS", "TIERS", "TITLES", "TargetTask", "assemble_prompt", "default_guide",
    "extract_spec_block", "fenced", "load_components", "load_guide", "load_registry", "load_schedule",
    "make_provider", "mutate_spec", "parse_guide", "render_guide", "resolve_model", "select_examples",
]
