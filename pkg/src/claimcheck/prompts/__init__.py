"""Versioned prompt templates for the fact-source backends.

Templates are plain text with ``{slot}`` markers substituted verbatim via
string replacement (never ``str.format``, since the prompt bodies contain
literal braces).
"""

from __future__ import annotations

from importlib import resources

TEMPLATES = {
    "msan_trace_v1": "msan_trace_v1.txt",
    "msan_formalize_v1": "msan_formalize_v1.txt",
    "equiv_formalize_v1": "equiv_formalize_v1.txt",
}


def load_template(template_id: str) -> str:
    try:
        filename = TEMPLATES[template_id]
    except KeyError:
        raise KeyError(
            f"unknown template {template_id!r}; known: {sorted(TEMPLATES)}"
        ) from None
    return (resources.files(__package__) / filename).read_text(encoding="utf-8")


def render_template(template_id: str, **slots: str) -> str:
    text = load_template(template_id)
    for name, value in slots.items():
        text = text.replace("{" + name + "}", value)
    return text
