"""Defected grids, isoperimetric searches, path covers and NLS ground states."""

import json as _json

from ._gridwave import (
    Grid,
    ValidationError,
    Window,
    critical_mass,
    discriminant,
    exp_trial,
    exp_trial_radius,
    generator_kinds,
    identify_defects,
    integrate_ivp,
    make_block,
    probe_inequality,
    search_violation,
    solve_ground_state,
    staircase_bound,
    z2_negativity_probe,
)


def _window(w):
    if isinstance(w, Window):
        return w
    if isinstance(w, int):
        return Window.square(w)
    return Window.parse(w)


def make_grid(kind="q", window=8, **params):
    """Materialize a named generator on a window given as Window, radius or "xmin:xmax x ymin:ymax"."""
    from ._gridwave import _make_grid

    return _make_grid(kind, _window(window), _json.dumps(params))


def grid_from_json(spec):
    """Grid from a spec dict or JSON text as written by `gridwave grid build`."""
    from ._gridwave import _grid_from_json

    return _grid_from_json(spec if isinstance(spec, str) else _json.dumps(spec))


__all__ = [
    "Grid",
    "ValidationError",
    "Window",
    "critical_mass",
    "discriminant",
    "exp_trial",
    "exp_trial_radius",
    "generator_kinds",
    "grid_from_json",
    "identify_defects",
    "integrate_ivp",
    "make_block",
    "make_grid",
    "probe_inequality",
    "search_violation",
    "solve_ground_state",
    "staircase_bound",
    "z2_negativity_probe",
]
