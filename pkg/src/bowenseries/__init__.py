"""Generalized Bowen-Series boundary maps of genus-g surfaces."""

from .boundary import ParameterChoice, eval_map, iterate, make_parameters
from .conjugacy import PsiTable, build_psi, conjugated_slope, psi_eval, psi_inverse, verify_psi_theorems
from .entropy import EntropyReport, entropy_lap_growth, entropy_markov, lap_count, rigidity_sweep
from .estimators import ConstantSlopeConjugacy
from .geometry import MobiusTransform, PolygonData, make_generator, make_polygon, sigma
from .markov import SpectralData, build_transition_matrix, closed_form_lambda, parry_measure, power_iteration
from .symbolic import recode_P_to_Q, verify_recoding

__version__ = "0.1.0"
