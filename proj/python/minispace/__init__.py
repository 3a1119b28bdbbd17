"""Python access to the mini-SPACE core: task plans, session logs, scoring,
statistics, batch export and the command line."""

import json as _json


class MinispaceError(ValueError):
    """Raised for every library error. ``kind`` is the machine-readable tag
    (``parse``, ``validation``, ``domain``, ...) and ``details`` the same
    object the HTTP API returns under ``error``."""

    def __init__(self, kind, message, details=None):
        super().__init__(message)
        self.kind = kind
        self.details = details or {}


from . import _minispace as _core  # noqa: E402
from ._minispace import (  # noqa: E402,F401
    angular_deviation,
    wrap_degrees,
    validate_session,
    score_sus,
    score_nasa_tlx,
    score_ueq,
    spearman_brown,
    icc_two_way,
    holm_adjust,
)


def generate_plan(week, seed, n_pairs=None):
    return _json.loads(_core.generate_plan_json(week, seed, n_pairs))


def canonical_session(text):
    """Parse a session log and return its canonical serialization."""
    return _core.canonical_session_json(_as_text(text))


def session_metrics(text):
    return _json.loads(_core.session_metrics_json(_as_text(text)))


def wilcoxon_signed_rank(x, benchmark):
    return _json.loads(_core.wilcoxon_json(list(x), float(benchmark)))


def spearman_rho(x, y):
    return _json.loads(_core.spearman_json(list(x), list(y)))


def catalog(data, mode="quick_summary", name="batch.zip"):
    """Variable catalog for an uploaded archive or single log (bytes)."""
    return _json.loads(_core.catalog_json(name, bytes(data), mode))


def export_csv(data, mode="quick_summary", columns=None, name="batch.zip"):
    return _core.export_csv(name, bytes(data), mode, columns)


def run_cli(*args):
    """Run the ``space`` command in-process; returns (exit_code, stdout, stderr)."""
    code, out, err = _core.run_cli([str(a) for a in args])
    return code, out.decode(), err.decode()


def _as_text(text):
    return text.decode() if isinstance(text, (bytes, bytearray)) else text
