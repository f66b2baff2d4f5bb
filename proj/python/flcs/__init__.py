"""FTLE fields and Lagrangian coherent structures on manifolds.

Thin wrapper over the C++ core; see ``flcs._core`` for the raw bindings.
"""

import json

from ._core import (
    Config,
    Field,
    FlcsError,
    RidgeSet,
    cauchy_green,
    compute_field,
    extract_level_set,
    extract_ridges,
    field_ids,
    ftle,
    generalized_eigh,
    hausdorff,
    manifold_ids,
    parse_config,
    randers_fundamental_tensor,
    read_field,
    read_ridges,
    run_lcs,
    validate,
    verify_alignment,
)


def load_config(path):
    with open(path, encoding="utf-8") as f:
        return parse_config(f.read())


def flowmap(config, x):
    """Flow map, Jacobian and deformation spectrum at one chart point, as a dict."""
    return json.loads(_core.flowmap_json(config, list(x)))


from . import _core  # noqa: E402

__all__ = [name for name in dir() if not name.startswith("_")]
