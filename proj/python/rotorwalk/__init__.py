import json

from ._rotorwalk import (
    Domain,
    GraphError,
    SpecError,
    WalkError,
    __version__,
    bary_tree,
    corpus,
    count_forests,
    experiment_names,
    forests,
    from_edge_list,
    green,
    grid,
    sample_forest,
    tree_with_ray,
    walk,
)
from ._rotorwalk import run_experiment as _run_experiment


def run_experiment(spec, threads=1):
    """Run an experiment from a spec dict (or JSON string) and return the report as a dict."""
    text = spec if isinstance(spec, str) else json.dumps(spec)
    return json.loads(_run_experiment(text, threads))
