"""Run configuration: flat key-value file with per-patch override sections.

Grammar (INI, parsed by configparser)::

    [defaults]
    n_theta = 8
    sigma = 0.05
    sigma2 = 0.1
    epsilon = 0.1
    tau = 150

    [patch.3]          ; overrides for patch id 3 only
    H = 7
    sigma = 0.02

Keys are the EngineParams field names; values are coerced to the field
type.  Unknown keys raise, so typos never pass silently.  ``H = auto``
(or an absent H) keeps the per-patch default of round(size/3).
"""

import configparser
import dataclasses
from pathlib import Path

from .pipeline import EngineParams

_FIELD_TYPES = {f.name: f.type for f in dataclasses.fields(EngineParams)}
_INT_FIELDS = {"n_theta", "H", "n_paths", "tau", "min_size", "seed", "wavelet_order"}
_FLOAT_FIELDS = {"sigma", "sigma2", "delta_s", "epsilon", "inflection"}
_STR_FIELDS = {"backend"}


def coerce_param(key: str, raw: str):
    """Convert one textual config value to its EngineParams type."""
    if key not in _FIELD_TYPES:
        raise ValueError(f"unknown parameter {key!r}")
    raw = raw.strip()
    if key == "H" and raw.lower() in ("auto", "none", ""):
        return None
    if key in _INT_FIELDS:
        return int(raw)
    if key in _FLOAT_FIELDS:
        return float(raw)
    return raw


def apply_params(base: EngineParams, updates: dict) -> EngineParams:
    """Return a copy of ``base`` with the given (already typed) fields set."""
    if not updates:
        return base
    return dataclasses.replace(base, **updates)


def load_config(path):
    """Parse a config file into (defaults dict, {patch_id: overrides dict}).

    Values are typed; validation of ranges happens when EngineParams is
    constructed from them.
    """
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    parser.optionxform = str  # keys are case-sensitive (H vs h)
    text = Path(path).read_text()
    parser.read_string(text)
    defaults = {}
    per_patch = {}
    for section in parser.sections():
        items = {k: coerce_param(k, v) for k, v in parser.items(section)}
        if section == "defaults":
            defaults = items
        elif section.startswith("patch."):
            try:
                pid = int(section.split(".", 1)[1])
            except ValueError as exc:
                raise ValueError(f"bad patch section name [{section}]") from exc
            per_patch[pid] = items
        else:
            raise ValueError(f"unknown config section [{section}]")
    return defaults, per_patch


def export_fragment(patch_id: int, params: EngineParams, kernel_H: int) -> str:
    """Per-patch override fragment capturing one tuned parameter set.

    The emitted text parses back through ``load_config`` and reproduces the
    same labeling when fed to a run (H is pinned to the value actually
    used, even when it came from the size heuristic).
    """
    lines = [
        f"[patch.{patch_id}]",
        f"H = {kernel_H}",
        f"n_paths = {params.n_paths}",
        f"sigma = {params.sigma}",
        f"sigma2 = {params.sigma2}",
        f"delta_s = {params.delta_s}",
        f"epsilon = {params.epsilon}",
        f"tau = {params.tau}",
        f"min_size = {params.min_size}",
        f"n_theta = {params.n_theta}",
        f"seed = {params.seed}",
    ]
    return "\n".join(lines) + "\n"
