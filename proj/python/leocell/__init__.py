"""Li-ion LEO cycling models: simulation, regression, MLP and comparison statistics."""

import json

try:
    from ._leocell import *  # noqa: F401,F403
    from ._leocell import comparison_report_json
except ImportError:  # in-tree build: the extension sits next to the package
    from _leocell import *  # noqa: F401,F403
    from _leocell import comparison_report_json

__version__ = "0.1.0"


def comparison_report(pairs, ba_mode="absolute"):
    """Comparison statistics for (observed, predicted) pairs as a dict."""
    return json.loads(comparison_report_json(list(pairs), ba_mode))
