"""Transition probabilities on truncated grids of crossing linear potentials.

Two routes to the same transition matrix: direct integration of the coupled
equations (:mod:`lingrid.integrate`) and the quasidegeneracy approximation,
which decouples the grid into independent two-state channels by an SVD of
the coupling matrix (:mod:`lingrid.decouple`, :mod:`lingrid.qda`).
"""

from .decouple import DecoupledSystem, decouple, gap_ratio, separable_svd, svd_couplings
from .integrate import PropagationSettings, numeric_smatrix, propagate, unitarity_defect
from .model import (GridError, GridModel, TransitionLabel, TransitionMatrix, bandwidths,
                    build_grid, gauge_reduce, is_counterintuitive, rescale_beta,
                    section_v_model)
from .qda import criteria_margin, oscillation_period, qda_smatrix, two_state_smatrix
from .specfun import KummerQuery, kummer_m

__version__ = "0.1.0"

__all__ = [
    "DecoupledSystem", "GridError", "GridModel", "KummerQuery", "PropagationSettings",
    "TransitionLabel", "TransitionMatrix", "bandwidths", "build_grid", "criteria_margin",
    "decouple", "gap_ratio", "gauge_reduce", "is_counterintuitive", "kummer_m",
    "numeric_smatrix", "oscillation_period", "propagate", "qda_smatrix", "rescale_beta",
    "section_v_model", "separable_svd", "svd_couplings", "two_state_smatrix",
    "unitarity_defect",
]
