"""Python bindings for the dsvit C++ core."""

import json

from . import _core
from ._core import DsvitError

__all__ = [
    "DsvitError",
    "ablation_suite",
    "generate_dataset",
    "generate_subject",
    "infer",
    "read_manifest",
    "run_cli",
    "token_count",
]


def generate_subject(spec, subject_seed):
    """Returns (volume, labels, label) for one subject of `spec` (a dict)."""
    return _core.generate_subject(json.dumps(spec), subject_seed)


def generate_dataset(spec, out_dir, longitudinal=False):
    """Writes a cohort to `out_dir` and returns the manifest content hash."""
    return _core.generate_dataset(json.dumps(spec), str(out_dir), longitudinal)


def read_manifest(data_dir):
    return json.loads(_core.read_manifest(str(data_dir)))


def ablation_suite(data_dir, config):
    """Runs every arm on the dataset in `data_dir`; returns the report dict."""
    return json.loads(_core.ablation_suite(str(data_dir), json.dumps(config)))


def infer(checkpoint, volume, labels):
    """Returns (logits, feature) for one scan under a trained checkpoint."""
    return _core.infer(str(checkpoint), volume, labels)


def run_cli(*args):
    """Runs the dsvit command line in-process; returns (exit_code, stdout, stderr)."""
    return _core.run_cli([str(a) for a in args])


token_count = _core.token_count
