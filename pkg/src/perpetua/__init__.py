"""Tail exponents of perpetuities ``X = A X + B`` in the light-tail regime."""

from .exceptions import (InputError, PerpetuaError, PreconditionError, PropertyFailure,
                         UnsupportedQueryError)
from .regvar import RegVarFn, potter_check
from .models import (AlphaFn, ALaw, AtomSurvivalModel, BLaw, IndependentModel, PairModel,
                     model_from_dict, sample_ED)
from .ldm import (Example8LDM, LDMCurve, PQDLDM, StepLDM, closed_form_ldm, ldm_estimate,
                  ldm_example8, ldm_pqd)
from .legendre import (admissibility, fixed_point_check, lambda_star, lambda_star_pqd_closed,
                       phi, phi_pqd_closed, transform_report)
from .perpetuity import (envelope, iterate, one_step_tail, sample_stationary,
                         stochastic_monotonicity_check, tail_log_estimate)
from .bk18 import bk18_bound_constant, compare_case, h_function
from .estimators import LDMEstimator, TailExponentEstimator

__version__ = "0.1.0"
