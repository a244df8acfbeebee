"""Python access to the themis scenario engine.

Models, runs and reports are plain dicts in the same JSON layout the
command line and HTTP service use.
"""

import json
from pathlib import Path

try:
    from . import _themis
except ImportError:  # in-tree build: the extension sits next to the package
    import _themis

ThemisError = _themis.ThemisError
__version__ = _themis.__version__

__all__ = [
    "ThemisError",
    "__version__",
    "load_model",
    "validate",
    "fingerprint",
    "analyze",
    "run",
    "what_if",
    "report",
    "infer",
    "aggregate_scenarios",
]


def _text(doc):
    return doc if isinstance(doc, str) else json.dumps(doc)


def load_model(path):
    return json.loads(_themis.load_model(str(Path(path))))


def validate(model):
    _themis.validate(_text(model))


def fingerprint(model):
    return _themis.fingerprint(_text(model))


def analyze(model, variance_threshold=0.90, max_vars=7, r_threshold=0.3):
    return json.loads(_themis.analyze(_text(model), variance_threshold, max_vars, r_threshold))


def run(model, **config):
    """Runs the full pipeline. Keyword arguments are run config fields
    (seed, samples, horizon_years, tripwire, ...)."""
    return json.loads(_themis.run(_text(model), json.dumps(config)))


def what_if(run_record, edits):
    return json.loads(_themis.what_if(_text(run_record), json.dumps(list(edits))))


def report(run_record, tripwire=None):
    if tripwire is None:
        tripwire = run_record["config"]["tripwire"]
    return json.loads(_themis.report(_text(run_record), tripwire))


def infer(network, query, evidence=None):
    return json.loads(_themis.infer(_text(network), query, dict(evidence or {})))


def aggregate_scenarios(per_scenario):
    """per_scenario maps scenario id to (weight, p_intervention)."""
    return _themis.aggregate_scenarios({k: (float(w), float(p)) for k, (w, p) in per_scenario.items()})
