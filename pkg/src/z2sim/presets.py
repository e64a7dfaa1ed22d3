"""Named parameter sets.

The paper-* presets are the four production schedules (full ramps to
g_final = 2); the desk-* presets are reduced schedules sized for a
commodity machine, with decomposition-error budgets re-evaluated through
the same closed forms. The asymmetric production runs quote error totals
that pin g_step = 0.01 for them (see the error-budget tests).
"""

from __future__ import annotations

from .evolution import AdiabaticSchedule

PRESETS = {
    "paper-d3-sym": {
        "d": 3,
        "L": 2,
        "schedule": AdiabaticSchedule(g_final=2.0, g_step=0.001, t_step=0.1, substeps=200, kind="sym"),
    },
    "paper-d2-sym": {
        "d": 2,
        "L": 3,
        "schedule": AdiabaticSchedule(g_final=2.0, g_step=0.001, t_step=0.2, substeps=5000, kind="sym"),
    },
    "paper-d3-asym": {
        "d": 3,
        "L": 2,
        "schedule": AdiabaticSchedule(g_final=2.0, g_step=0.01, t_step=0.01, substeps=500, kind="asym"),
    },
    "paper-d2-asym": {
        "d": 2,
        "L": 3,
        "schedule": AdiabaticSchedule(g_final=2.0, g_step=0.01, t_step=0.02, substeps=500, kind="asym"),
    },
    "desk-d2": {
        "d": 2,
        "L": 3,
        "schedule": AdiabaticSchedule(g_final=2.0, g_step=0.01, t_step=0.2, substeps=100, kind="sym"),
    },
    "desk-d3": {
        "d": 3,
        "L": 2,
        "schedule": AdiabaticSchedule(g_final=2.0, g_step=0.02, t_step=0.1, substeps=50, kind="sym"),
    },
}


def get_preset(name: str) -> dict:
    if name not in PRESETS:
        raise KeyError(f"unknown preset {name!r}; have {sorted(PRESETS)}")
    return PRESETS[name]
